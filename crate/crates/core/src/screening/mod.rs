//! Predictor screening and response reduction for `p > n` designs.

mod corr;
mod pca;
mod transform;

pub use corr::{
    canonical_corr, screen, screen_count, screen_protected, Correlation, ResponseBasis,
    ScreenResult,
};
pub use pca::{parallel_analysis, pca_reduce, ParallelAnalysis, PcaReduction};
pub(crate) use transform::transform_for;
pub use transform::{conditional_transform, ConditionalTransform};
