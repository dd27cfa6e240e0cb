//! Repeated sample splitting for `p > n`: screen (and optionally reduce the
//! responses) on one half, test on the other, aggregate the split p-values.

mod aggregate;
mod config;
mod procedure;
mod split;

pub use aggregate::{adaptive_pt, q_gamma};
pub use config::{MultiSplitConfig, PcaPolicy};
pub use procedure::{
    multisplit_test, no_split_pvalue, per_split_pvalue, MultiSplitOutcome, SplitOutcome,
};
pub use split::split_indices;
