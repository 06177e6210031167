//! Contextuality versus Bell nonclassicality on random pure two-qubit
//! states: noncontextuality/Bell functionals with brute-force classical
//! bounds, Haar sampling, per-state CHSH maximization, and the ensemble
//! statistics pipeline behind the `ctxlab` CLI.

// index loops mirror the matrix formulas; iterator chains obscure them here
#![allow(clippy::needless_range_loop)]

pub mod chsh;
pub mod functionals;
pub mod haar;
pub mod pipeline;
pub mod plot;
pub mod quantum;
pub mod stats;

pub use chsh::{correlation_matrix, horodecki_bmax, optimize_chsh, CorrelationMatrix, OptResult};
pub use functionals::{
    build_c, build_cabello18, build_cabello18_from_str, build_chsh, build_pm, eval,
    InequalityFunctional, MeasurementSettings, OperatorRealization,
};
pub use haar::{haar_unitary, random_pure_state, SeedSpec, Unitary4};
pub use pipeline::{
    filter_contextual, run_bmax_scan, run_c_scan, scatter_data, summarize, EnsembleRecord,
    RunConfig,
};
pub use quantum::{
    commutes, direction_observable, expectation, pauli, product, tensor, BlochDirection,
    Operator2, Operator4, PauliAxis, StateVector,
};
