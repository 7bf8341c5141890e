//! Correlated electron interference in two distant Aharonov–Bohm devices
//! driven by a shared two-mode quantized field.
//!
//! The phase factor of each device is the displacement operator
//! `D(iq e^{iωt})`; fringe visibility and shift follow from the Weyl
//! function `Tr[ρ D(λ)]`. The crate evaluates single and joint fringe
//! intensities and their correlation ratio `R` by truncated Fock-space
//! traces, and provides the closed forms for the separable mixture
//! `½(|01⟩⟨01| + |10⟩⟨10|)` and the entangled state `(|01⟩ + |10⟩)/√2`.
//!
//! Modules, bottom up: [`fock`] (operators, displacement, partial trace),
//! [`states`], [`weyl`], [`interference`], [`scan`] (sweeps and CSV), and
//! [`validate`] (invariant suite).

pub mod error;
pub mod expm;
pub mod fock;
pub mod interference;
pub mod laguerre;
pub mod scan;
pub mod states;
pub mod validate;
pub mod weyl;

pub use error::{Error, Result};
pub use fock::{
    displacement_analytic, displacement_exp, joint_index, make_annihilation, make_creation,
    make_number, partial_trace, split_index, tensor, ComplexScalar, FockOperator, Mode,
    TruncationPolicy,
};
pub use interference::{
    alpha, beta, calibrate_q, intensity_joint_ent_closed, intensity_joint_numeric,
    intensity_joint_sep_closed, intensity_single, intensity_single_closed, lambda_of, ratio,
    ratio_ent_closed, ratio_sep_closed, rsep_bounds, rsep_extrema, screen_axis, BoundKind,
    Calibration, ExperimentConfig, ModeParams, PreparedExperiment, ScreenPhase,
};
pub use scan::{FringeGrid, Quantity, ScanSetup, Slice, TimeSeries};
pub use states::{
    classify, load_state, load_state_file, make_product, make_rho_ent, make_rho_sep,
    ppt_min_eigenvalue, CorrelationClass, TwoModeState,
};
pub use weyl::{weyl_single, weyl_two, DisplacementMethod, Evaluator, WeylValue};
