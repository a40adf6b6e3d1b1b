//! Localized weak (1,1) machinery: level sets of `M↑_{I₀}`, the
//! Calderón-Zygmund split, the Rubio de Francia majorant and the two-weight
//! maximal estimate.

mod cz;
mod rdf;
mod twoweight;

pub use cz::{
    causal_tail_ratio, cz_split, maximal_level_set, weak11_experiment, weak_l1_quasi_norm, CzComponent, CzDecomposition, CzInvariants,
    Weak11Report,
};
pub use rdf::{
    extrapolation_check, mr_bound_ratio, proof_parameter_factor, rdf_constant, rdf_step, rubio_de_francia, ExtrapolationEntry,
    ExtrapolationReport, RdfResult,
};
pub use twoweight::{auxiliary_weight, two_weight_maximal_check, TwoWeightComponent, TwoWeightReport};
