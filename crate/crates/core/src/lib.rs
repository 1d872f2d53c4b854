//! Exact and finite-shot simulation of a qubit sandwiched between two
//! projective measurements.
//!
//! The crate is layered bottom-up:
//!
//! - [`qubit`]: 2×2 operator algebra, carrier pulses, Gibbs states, Born rule
//! - [`protocol`]: preparation, measurement pulses and the exact outcome
//!   distribution `p_n`, `q_m`, `p_{m|n}`, `p_nm`
//! - [`fluctuation`]: pointwise mutual information, `⟨e^{−I}⟩`, work,
//!   free-energy difference and `⟨e^{β(W−ΔF)}⟩`
//! - [`montecarlo`]: projection-noise sampling, plug-in estimators and
//!   seeded replication
//!
//! ```
//! use tpm_core::{joint_distribution, pointwise_mutual_information, exp_neg_info_average};
//! use tpm_core::{BlochVector, ProtocolConfig, PulseSpec};
//!
//! let cfg = ProtocolConfig::pure(0.6, BlochVector::Z, BlochVector::Y, PulseSpec::new(1.0, 0.0));
//! let dist = joint_distribution(&cfg).unwrap();
//! let info = pointwise_mutual_information(&dist).unwrap();
//! assert!((exp_neg_info_average(&dist, &info).unwrap() - 1.0).abs() < 1e-12);
//! ```

pub mod error;
pub mod fluctuation;
pub mod montecarlo;
pub mod protocol;
pub mod qubit;

pub use error::{Error, Result};
pub use fluctuation::{
    dissipation_average, exp_neg_info_average, free_energy_difference, info_thermo_bridge, jarzynski_average,
    pointwise_mutual_information, thermo_record, total_mutual_information, work_matrix, InfoRecord, ThermoRecord,
};
pub use montecarlo::{
    plugin_estimates, replicate, sample_binary, simulate_protocol, CountsTable, EstimateReport, PluginEstimates,
    Quantity, Replication, ShotPlan, Spam,
};
pub use protocol::{
    joint_distribution, joint_from_state, EnergySpec, InitialState, Levels, OutcomeDistribution, ProtocolConfig,
};
pub use qubit::{BlochVector, Operator2, Outcome, PulseSpec, QubitState};
