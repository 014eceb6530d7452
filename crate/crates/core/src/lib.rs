//! Streaming dynamic mode decomposition.
//!
//! Three ways to estimate the spectrum of the linear operator best
//! mapping a stream of snapshot pairs `(x_i, y_i)`, `y_i = x_{i+1}`:
//!
//! - [`batch::fit_batch`]: classic batch DMD over the full data matrices,
//!   used here as the reference.
//! - [`SdmdState`]: the two-basis streaming baseline, maintaining separate
//!   orthonormal bases for the `x` and `y` column spaces.
//! - [`EsdmdState`]: single-basis streaming DMD. Because consecutive
//!   pairs overlap, one evolving basis spans both column spaces; each
//!   update does one Gram-Schmidt test and at most one POD compression,
//!   roughly halving the per-iteration work of the baseline.
//!
//! [`spectrum::dynamic_spectrum`] lifts any of the reduced operators to
//! full-space modes with normalized frequencies, [`systems`] generates
//! the two seeded benchmark trajectories, and [`bench`] is the experiment
//! harness behind the `esdmd-bench` CLI.

pub mod batch;
pub mod bench;
pub mod error;
pub mod esdmd;
pub mod numerics;
pub mod sdmd;
pub mod snapshots;
pub mod spectrum;
pub mod systems;

pub use batch::{fit_batch, full_operator, BatchDmdResult};
pub use bench::{
    emit_report, run_experiment, ExperimentConfig, ExperimentReport, Method, ReportFormat,
    SystemKind,
};
pub use error::{Error, Result};
pub use esdmd::{EsdmdState, EsdmdUpdate};
pub use numerics::{eig_general, orthonormal_columns, pinv_psd, sym_eig_descending, EigenPairs};
pub use sdmd::{SdmdState, SdmdUpdate};
pub use snapshots::{read_trajectory_csv, write_trajectory_csv, SnapshotPair, SnapshotStream};
pub use spectrum::{dynamic_spectrum, match_spectra, Spectrum};
pub use systems::{
    kuramoto_phases, kuramoto_phases_with, kuramoto_trajectory, oscillatory_trajectory,
    KuramotoConfig, OscillatoryConfig,
};
