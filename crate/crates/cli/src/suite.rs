//! Experiment grids and their evaluation.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use tpm_core::montecarlo::reported_quantities;
use tpm_core::{
    dissipation_average, exp_neg_info_average, jarzynski_average, joint_distribution, pointwise_mutual_information,
    replicate, thermo_record, total_mutual_information, BlochVector, InitialState, ProtocolConfig, PulseSpec, Quantity,
    Replication,
};

use crate::config::{time_grid, Suite, SuiteSpec};
use crate::emit::format_number;
use crate::CliError;

/// Pure-state amplitudes `1, √(2/3), √(1/3)`.
pub fn table2_alphas() -> [f64; 3] {
    [1.0, (2.0f64 / 3.0).sqrt(), (1.0f64 / 3.0).sqrt()]
}

pub const TABLE4_BETA_E: [f64; 3] = [0.2, 0.5, 1.0];
/// Duration unit of the pure-state grid as a carrier angle.
pub const TAU: f64 = PI / 5.0;

/// Final Hamiltonian axes `x`, `y` and `(x + √3 y)/2`.
pub fn table4_axes() -> [(&'static str, BlochVector); 3] {
    [
        ("hf1", BlochVector::X),
        ("hf2", BlochVector::Y),
        ("hf3", BlochVector::oblique()),
    ]
}

/// A carrier pulse that commutes with `q·σ` for an in-plane `q`.
pub fn commuting_evolution(q: BlochVector) -> PulseSpec {
    PulseSpec::new(PI / 2.0, (-q.y).atan2(q.x))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub alpha_or_beta_e: f64,
    pub t_or_hf: String,
    pub config: ProtocolConfig,
    pub quantities: Vec<Quantity>,
}

fn pure_cell(alpha: f64, k: usize, spec: &SuiteSpec, quantities: Vec<Quantity>) -> Cell {
    let theta = time_grid()[k];
    let mut config = ProtocolConfig::pure(alpha, BlochVector::Z, BlochVector::Y, PulseSpec::new(theta, spec.phi1));
    config.prep_phase = spec.phi0;
    Cell {
        alpha_or_beta_e: alpha,
        t_or_hf: format_number(theta / TAU),
        config,
        quantities,
    }
}

/// The grid of a suite, in output order.
pub fn cells(spec: &SuiteSpec) -> Vec<Cell> {
    match spec.suite {
        Suite::Table2 => table2_alphas()
            .into_iter()
            .flat_map(|a| (0..4).map(move |k| (a, k)))
            .map(|(a, k)| pure_cell(a, k, spec, vec![Quantity::TotalInfo, Quantity::ExpNegInfo]))
            .collect(),
        Suite::Fig2 => (0..4)
            .map(|k| pure_cell(table2_alphas()[1], k, spec, Quantity::probabilities()))
            .collect(),
        Suite::Table4 => TABLE4_BETA_E
            .iter()
            .flat_map(|&b| table4_axes().map(move |(label, q)| (b, label, q)))
            .map(|(beta_e, label, q)| Cell {
                alpha_or_beta_e: beta_e,
                t_or_hf: label.to_string(),
                config: ProtocolConfig::gibbs(beta_e, BlochVector::Z, q, commuting_evolution(q)),
                quantities: vec![Quantity::Dissipation, Quantity::Jarzynski],
            })
            .collect(),
        Suite::Custom => {
            let config = spec.custom.expect("resolved custom spec carries its config");
            let coord = match config.initial {
                InitialState::Pure { alpha } => alpha,
                InitialState::Gibbs { beta_e } => beta_e,
            };
            vec![Cell {
                alpha_or_beta_e: coord,
                t_or_hf: format_number(config.evolution.theta / TAU),
                config,
                quantities: reported_quantities(&config),
            }]
        }
    }
}

/// Exact value of each requested quantity; `None` where undefined.
pub fn exact_values(config: &ProtocolConfig, quantities: &[Quantity]) -> Result<Vec<Option<f64>>, CliError> {
    let dist = joint_distribution(config)?;
    let info = pointwise_mutual_information(&dist)?;
    let thermo = config
        .energy_spec()
        .map(|e| thermo_record(&e, config.p_axis, config.q_axis))
        .transpose()?;
    quantities
        .iter()
        .map(|q| {
            Ok(match q {
                Quantity::ExpNegInfo => Some(exp_neg_info_average(&dist, &info)?),
                Quantity::TotalInfo => Some(total_mutual_information(&dist, &info)?),
                Quantity::Jarzynski => thermo.as_ref().map(|t| jarzynski_average(&dist, t)),
                Quantity::Dissipation => thermo.as_ref().map(|t| dissipation_average(&dist, t)),
                other => other.of_distribution(&dist),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub cell: Cell,
    pub exact: Option<Vec<Option<f64>>>,
    pub montecarlo: Option<Replication>,
}

/// Evaluates every cell. Cell `i` draws from substream `i` of the seed.
pub fn evaluate(spec: &SuiteSpec) -> Result<Vec<CellResult>, CliError> {
    cells(spec)
        .into_iter()
        .enumerate()
        .map(|(i, cell)| {
            let exact = spec
                .mode
                .exact()
                .then(|| exact_values(&cell.config, &cell.quantities))
                .transpose()?;
            let montecarlo = spec
                .shot_plan(i)
                .map(|plan| replicate(&cell.config, &plan))
                .transpose()?;
            Ok(CellResult {
                cell,
                exact,
                montecarlo,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub suite: String,
    #[serde(rename = "alpha_or_betaE")]
    pub alpha_or_beta_e: f64,
    pub t_or_hf: String,
    pub quantity: String,
    pub exact: Option<f64>,
    pub mc_mean: Option<f64>,
    pub mc_rms: Option<f64>,
    /// `;`-separated notes, empty when clean.
    pub flags: String,
}

pub fn rows(suite: Suite, results: &[CellResult]) -> Vec<ResultRow> {
    let mut out = vec![];
    for r in results {
        for (i, &q) in r.cell.quantities.iter().enumerate() {
            let mut flags = vec![];
            let exact = r.exact.as_ref().and_then(|e| e[i]);
            if r.exact.is_some() && exact.is_none() {
                flags.push("undefined".to_string());
            }
            let report = r.montecarlo.as_ref().and_then(|m| m.report(q));
            if let Some(rep) = report {
                if rep.flagged > 0 {
                    flags.push(format!("flagged={}", rep.flagged));
                }
            }
            if let (Quantity::TotalInfo, Some(m)) = (q, &r.montecarlo) {
                if m.replications_with_negative_info > 0 {
                    flags.push(format!("negative_info={}", m.replications_with_negative_info));
                }
            }
            let finite = |v: f64| v.is_finite().then_some(v);
            out.push(ResultRow {
                suite: suite.name().to_string(),
                alpha_or_beta_e: r.cell.alpha_or_beta_e,
                t_or_hf: r.cell.t_or_hf.clone(),
                quantity: q.name(),
                exact,
                mc_mean: report.and_then(|r| finite(r.point_estimate)),
                mc_rms: report.and_then(|r| finite(r.rms_error)),
                flags: flags.join(";"),
            });
        }
    }
    out
}

pub fn run_suite(spec: &SuiteSpec) -> Result<Vec<ResultRow>, CliError> {
    Ok(rows(spec.suite, &evaluate(spec)?))
}
