//! Control-functional estimators for integrals `∫ f dΠ`.
//!
//! The pipeline is:
//!
//! 1. a radial base kernel ([`kernel::BaseKernel`]) with analytic derivatives,
//! 2. a boundary weight that makes it vanish on the domain faces
//!    ([`boundary::ModifiedKernel`]),
//! 3. a Stein kernel `k0` built from the score `∇ log π`, whose sections all
//!    integrate to zero under `Π` ([`stein::SteinKernel`]),
//! 4. estimators that fit `f` in the span of `c + k0` on one part of the
//!    sample and average residuals on the rest ([`estimator`]).
//!
//! Bandwidth selection, samplers and the experiment harness used by the
//! `steinctrl` CLI live in [`bandwidth`], [`sampling`] and [`experiment`].

pub mod bandwidth;
pub mod boundary;
pub mod error;
pub mod estimator;
pub mod experiment;
pub mod kernel;
pub mod linalg;
pub mod sampling;
pub mod selftest;
pub mod stein;

pub use bandwidth::{log_marginal_likelihood, optimal_split, optimize_bandwidth, BandwidthChoice, BandwidthSearch};
pub use boundary::{BoundaryWeight, Domain, ModifiedKernel};
pub use error::{Error, Result};
pub use estimator::{
    dedupe, estimate_cf, estimate_loo, estimate_mc, fit, mse_summary, ControlFunctionalFit, EstimateSummary, Estimator,
    FitStatus, LooBandwidth, SplitDataset,
};
pub use kernel::{BaseKernel, Family, RadialProfile};
pub use sampling::{fill_distance, sample_iid_uniform, sample_torus_walk, ChainConfig, FillDistanceReport};
pub use stein::{GramKind, ScoreFunction, SteinKernel, UniformScore};
