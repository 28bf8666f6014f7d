//! Soft-input soft-output max-log-MAP MIMO detection.
//!
//! The two-layer detector enumerates one layer and slices the other through
//! prior-aware decision boundaries, which yields exact max-log-MAP LLRs with
//! `|X1| + |X2|` distance evaluations. Up to four layers are handled by the
//! punctured (WL) decomposition, one candidate list per layer, combined by
//! taking minima across lists.

pub mod constellation;
pub mod decomp;
pub mod detcore;
pub mod error;
pub mod hwmodel;
pub mod linalg;
pub mod llrpost;
pub mod mumimo;
pub mod oracle;
pub mod sim;

pub use constellation::{Constellation, ModScheme, PamAxis};
pub use decomp::{ql_decompose, ql_decompose_flipped, transform_observation, wld, PuncturedDecomposition, QlDecomp};
pub use detcore::{detect_one_sided, rescore_candidates, CandidateList, DistanceScaling, LayerConstants, SliceMode};
pub use error::{DetectError, Result};
pub use linalg::{CMatrix, CVector};
pub use llrpost::{llr_two_sided_2layer, wl_combine, DetectionResult, DistanceMode};
