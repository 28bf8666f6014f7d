"""Smoke test for the pymimo extension module.

Build and install first (`pip install ./crates/python`, or `maturin develop`
inside crates/python), then run `python crates/python/python/smoke_test.py`.
"""

import random

import pymimo


def rel_close(a, b, tol=1e-9):
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def random_system(rng, mods, sigma2):
    n = len(mods)
    s = 0.5**0.5
    h = [[complex(rng.gauss(0, s), rng.gauss(0, s)) for _ in range(n)] for _ in range(n)]
    cons = [pymimo.Constellation(m) for m in mods]
    sent = [rng.randrange(c.size) for c in cons]
    x = [c.point(k) * c.scale for c, k in zip(cons, sent)]
    ns = (sigma2 / 2) ** 0.5
    y = [
        sum(h[r][c] * x[c] for c in range(n)) + complex(rng.gauss(0, ns), rng.gauss(0, ns))
        for r in range(n)
    ]
    return h, y, sent


def main():
    rng = random.Random(1)

    c = pymimo.Constellation(16)
    assert (c.size, c.bits) == (16, 4)
    assert c.point(0) == 1 + 1j and c.point(15) == -3 - 3j
    assert c.symbol_from_bits(c.bits_of(9)) == 9

    for _ in range(50):
        h, y, _ = random_system(rng, [16, 64], 0.05)
        priors = [[rng.gauss(0, 2) for _ in range(4)], [rng.gauss(0, 2) for _ in range(6)]]
        det = pymimo.detect_2layer(h, y, [16, 64], priors)
        ref = pymimo.exhaustive_map(h, y, [16, 64], priors)
        assert det.hard == ref.hard
        for a, b in zip(sum(det.llr, []), sum(ref.llr, [])):
            assert rel_close(a, b), (a, b)

    h, y, sent = random_system(rng, [4, 4, 4, 4], 1e-4)
    assert pymimo.detect_wld(h, y, [4, 4, 4, 4]).hard == sent
    assert pymimo.exact_ml(h, y, [4, 4, 4, 4])[0] == sent

    assert pymimo.count_distinct_terms(16) == (8, 33, 8, 914, 8)
    assert pymimo.count_coprime_classes(16) == 49
    cost, listing = pymimo.shiftadd_plan([9, 25, 49, 81, 121, 169, 225])
    assert cost <= 11 and listing
    assert pymimo.quantize(0.25, 4, 1) == 0.5

    channels, observations = [], []
    for _ in range(24):
        h, y, _ = random_system(rng, [64, 16], 1e-6)
        channels.append(h)
        observations.append(y)
    assert pymimo.classify_interferer(channels, observations, 64, 1e-6) == 16

    csv = pymimo.run_sweep([4, 4], [10.0, 20.0], 200, detector="map2", seed=3)
    assert csv.splitlines()[0].startswith("snr_db,trials,ser,ber")
    assert len(csv.splitlines()) == 3

    try:
        pymimo.Constellation(32)
    except pymimo.DetectionError:
        pass
    else:
        raise AssertionError("32-QAM should be rejected")

    print("pymimo smoke test passed")


if __name__ == "__main__":
    main()
