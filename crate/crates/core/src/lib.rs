//! Work statistics of driven finite-level quantum systems under projective
//! and Gaussian two-point energy measurements, their split into population
//! and coherence contributions, and the predictability / effectiveness
//! measures built on that split.

pub mod duality;
pub mod error;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod process;
pub mod propagator;
pub mod quadrature;
pub mod tolerance;
pub mod workdist;

pub use duality::{
    BoundViolation, DualityReport, FinalEnergyReading, ProofChainReport, ScanRow, ScanTable, SplitRoute,
    TwoLevelClosedForm,
};
pub use error::{Error, Result};
pub use linalg::{hermitian_eigensystem, EigenSystem, Operator, C64};
pub use model::{DrivenTwoLevel, HamiltonianSchedule};
pub use process::DrivenProcess;
pub use propagator::{evolve, PropagatorResult};
pub use tolerance::Tolerances;
pub use workdist::{
    build_work_distribution, MeasurementScheme, MixtureComponent, MixtureDistribution,
    WorkDecomposition,
};
