//! Haar systems, the pivotal condition, sparse stopping trees, the averaging
//! lemma and Carleson sums.

mod avg;
mod carleson;
mod haar;
mod pivotal;
mod sparse;

pub use avg::{avg_intervals, lemma_avg_ratio, picture_bound_ratio, picture_integral};
pub use carleson::{carleson_a, carleson_ratios, poisson_decay_ratio};
pub use haar::{haar_project, mean_split, HaarProjection, HaarSystem};
pub use pivotal::{
    pivotal_best_family, pivotal_constant, pivotal_ratio, pivotal_term, stopping_children, StoppingChild, DEFAULT_STOP_MULTIPLIER,
};
pub use sparse::{build_sparse, SparseCheck, SparseNode, SparseTree};
