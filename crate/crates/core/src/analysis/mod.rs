//! KMS diagnostics, the deviation metric and `(T, δ)` sweeps.
//!
//! Continuations `τ → τ + iβs` are carried out inside the frequency integrand
//! (a factor `e^{−βsΩ}` next to the thermal weight), never numerically.

mod continuation;
mod deviation;
mod kms;

pub use continuation::{
    analytic_continuation_eval, continued_correlator, thermal_weight, ModelParams,
};
pub use deviation::{
    default_deltas, default_temperatures, deviation_metric, deviation_of_samples, sweep_d,
    SweepOptions, SweepRow, SweepTable,
};
pub use kms::{kms_residual, three_point_kms_check, KMSReport, KmsPair};
