//! Convergence studies against the reference solver and their reports.

mod energy;
mod fit;
mod report;
pub mod sampling;
mod study;

pub use energy::{energy_error, energy_norm_of_difference, energy_norm_stratified, EnergyEstimate};
pub use fit::{fit_loglog, SlopeFit};
pub use report::{emit_report, ROW_COLUMNS};
pub use sampling::{PairSampling, Sampling, SamplingStrategy};
pub use study::{
    run_study, EnergySettings, Quantity, RowTiming, StudyResult, StudyRow, StudySpec, SweepParameter,
    TRUST_RATIO,
};
