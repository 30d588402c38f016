//! Exact numerics for small spin-½ clusters: spin operators on tensor
//! product spaces, the Yangian operator `Y` and its square `Q`, Heisenberg
//! couplings that commute with `Q`, closed-form spectra, local moments, and
//! rate-equation magnetization dynamics of coupled spin-1 clusters.
//!
//! Everything is dense and in natural units (`ℏ = 1`). Basis index `b` of
//! an `n`-site register holds site `k` in bit `n − 1 − k`, with `0` = up.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod observables;
pub mod spectra;
pub mod spin_ops;
pub mod states;
pub mod symmetry;
pub mod yangian;

pub use dynamics::{
    CoefficientMode, FieldProfile, InitialCondition, LevelComparisonReport, LzsMode, ProfileKind, RateCoefficients,
    RateParams, Rates, Trajectory, TrajectoryRow,
};
pub use error::{Error, Result};
pub use observables::{MomentReport, MomentVector};
pub use spectra::{GroundSpin, Level, LevelSet, PhasePoint};
pub use spin_ops::{Axis, OperatorMatrix, Spectrum, SpinRegister, StateVector, VectorOperator};
pub use symmetry::{CouplingFamily, CouplingSet, ThetaReport};
pub use yangian::{AxiomReport, LabeledBasis, LabeledState, YangianWeights};
