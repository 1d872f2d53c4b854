//! Finite-shot simulation of the three measurement processes.
//!
//! Each process gets its own shot budget. Shots are aggregated with binomial
//! draws: process (III) first draws how many shots land in each first
//! outcome `n`, then, for each `n`, draws the second outcome from the
//! collapsed-and-evolved state. Preparation and detection errors are applied
//! the same way, per shot in distribution.
//!
//! Replication `r` of a plan draws from ChaCha8 keyed by `seed`, on stream
//! `(substream << 32) | r`, so results do not depend on the thread count.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fluctuation::{
    dissipation_average, exp_neg_info_average, jarzynski_average, pointwise_mutual_information, thermo_record,
    total_mutual_information, ThermoRecord,
};
use crate::protocol::{OutcomeDistribution, ProtocolConfig};
use crate::qubit::{
    born_probability, carrier_unitary, evolve, post_measurement_state, projector, BlochVector, Outcome, QubitState,
};

pub const DEFAULT_SHOTS: u64 = 40_000;
pub const DEFAULT_REPLICATIONS: u32 = 100;

/// State-preparation and detection error probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spam {
    /// Probability that the prepared state is replaced by `I − ρ`.
    pub p_prep_error: f64,
    /// Probability that a recorded binary outcome is flipped.
    pub p_detect_error: f64,
}

impl Spam {
    /// 0.7 % preparation and 0.22 % detection infidelity.
    pub const TRAPPED_ION_BUDGET: Spam = Spam {
        p_prep_error: 0.007,
        p_detect_error: 0.0022,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotPlan {
    pub shots_per_setting: u64,
    pub replications: u32,
    pub seed: u64,
    pub spam: Option<Spam>,
    /// Separates the random streams of different grid cells sharing a seed.
    pub substream: u32,
}

impl ShotPlan {
    pub fn new(seed: u64) -> Self {
        ShotPlan {
            shots_per_setting: DEFAULT_SHOTS,
            replications: DEFAULT_REPLICATIONS,
            seed,
            spam: None,
            substream: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.shots_per_setting == 0 {
            return Err(invalid("shots per setting must be >= 1"));
        }
        if self.replications < 2 {
            return Err(invalid("at least 2 replications are needed for an RMS error"));
        }
        if let Some(s) = self.spam {
            for (name, p) in [("preparation", s.p_prep_error), ("detection", s.p_detect_error)] {
                if !(0.0..=1.0).contains(&p) {
                    return Err(invalid(format!("{name} error probability {p} is outside [0, 1]")));
                }
            }
        }
        Ok(())
    }

    fn rng_for(&self, replication: u32) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream((u64::from(self.substream) << 32) | u64::from(replication));
        rng
    }
}

/// Raw outcome counts of one run of the three processes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountsTable {
    /// Shots spent on each process.
    pub shots: u64,
    /// Process (I): recorded `n`.
    pub first: [u64; 2],
    /// Process (II): recorded `m`.
    pub second: [u64; 2],
    /// Process (III): recorded `(n, m)`.
    pub pairs: [[u64; 2]; 2],
}

impl CountsTable {
    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::InvalidCounts("zero shots per process".into()));
        }
        let pair_total: u64 = self.pairs.iter().flatten().sum();
        let sums = [
            self.first[0] + self.first[1],
            self.second[0] + self.second[1],
            pair_total,
        ];
        if sums.iter().any(|&s| s != self.shots) {
            return Err(Error::InvalidCounts(format!(
                "process totals {sums:?} do not match {} shots",
                self.shots
            )));
        }
        Ok(())
    }
}

/// Number of successes in `n` Bernoulli(`p`) trials.
pub fn sample_binary<R: Rng + ?Sized>(p: f64, n: u64, rng: &mut R) -> u64 {
    let p = p.clamp(0.0, 1.0);
    if n == 0 || p == 0.0 {
        return 0;
    }
    if p == 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("p is within [0, 1]").sample(rng)
}

/// Splits `count` shots into (no prep error, prep error) groups.
fn prep_groups<R: Rng + ?Sized>(
    state: &QubitState,
    count: u64,
    spam: Option<Spam>,
    rng: &mut R,
) -> [(QubitState, u64); 2] {
    let bad = spam.map_or(0, |s| sample_binary(s.p_prep_error, count, rng));
    [(*state, count - bad), (state.complement(), bad)]
}

/// Physical `(minus, plus)` counts for a binary projective measurement.
fn measure<R: Rng + ?Sized>(state: &QubitState, axis: BlochVector, count: u64, rng: &mut R) -> Result<[u64; 2]> {
    let p_plus = born_probability(state, &projector(axis, Outcome::Plus)?)?;
    let plus = sample_binary(p_plus, count, rng);
    Ok([count - plus, plus])
}

fn record<R: Rng + ?Sized>(physical: [u64; 2], spam: Option<Spam>, rng: &mut R) -> [u64; 2] {
    let d = spam.map_or(0.0, |s| s.p_detect_error);
    let down = sample_binary(d, physical[0], rng);
    let up = sample_binary(d, physical[1], rng);
    [physical[0] - down + up, physical[1] - up + down]
}

/// Runs processes (I), (II) and (III) once, each with `plan.shots_per_setting` shots.
pub fn simulate_protocol<R: Rng + ?Sized>(
    config: &ProtocolConfig,
    plan: &ShotPlan,
    rng: &mut R,
) -> Result<CountsTable> {
    let state = config.initial_state()?;
    let shots = plan.shots_per_setting;
    let spam = plan.spam;
    let u = carrier_unitary(config.evolution);

    // (I) first measurement only
    let mut first = [0u64; 2];
    for (s, count) in prep_groups(&state, shots, spam, rng) {
        let rec = record(measure(&s, config.p_axis, count, rng)?, spam, rng);
        first[0] += rec[0];
        first[1] += rec[1];
    }

    // (II) evolution then second measurement
    let mut second = [0u64; 2];
    for (s, count) in prep_groups(&state, shots, spam, rng) {
        let rec = record(measure(&evolve(&s, &u)?, config.q_axis, count, rng)?, spam, rng);
        second[0] += rec[0];
        second[1] += rec[1];
    }

    // (III) sequential: n, collapse, evolve, m
    let mut physical = [[0u64; 2]; 2];
    for (s, count) in prep_groups(&state, shots, spam, rng) {
        let n_counts = measure(&s, config.p_axis, count, rng)?;
        for n in Outcome::ALL {
            let c = n_counts[n.index()];
            if c == 0 {
                continue;
            }
            let p_n = projector(config.p_axis, n)?;
            let collapsed = match post_measurement_state(&s, &p_n) {
                Ok(c) => c,
                // a draw from a sub-tolerance probability; rank-1 collapse is P_n itself
                Err(Error::OutcomeImpossible) => QubitState::new(p_n)?,
                Err(e) => return Err(e),
            };
            let m_counts = measure(&evolve(&collapsed, &u)?, config.q_axis, c, rng)?;
            physical[n.index()][0] += m_counts[0];
            physical[n.index()][1] += m_counts[1];
        }
    }
    let pairs = record_pairs(physical, spam, rng);

    let table = CountsTable {
        shots,
        first,
        second,
        pairs,
    };
    debug_assert!(table.validate().is_ok());
    Ok(table)
}

fn record_pairs<R: Rng + ?Sized>(physical: [[u64; 2]; 2], spam: Option<Spam>, rng: &mut R) -> [[u64; 2]; 2] {
    let d = spam.map_or(0.0, |s| s.p_detect_error);
    let mut out = [[0u64; 2]; 2];
    for n in 0..2 {
        for m in 0..2 {
            let c = physical[n][m];
            let n_flipped = sample_binary(d, c, rng);
            let both = sample_binary(d, n_flipped, rng);
            let m_only = sample_binary(d, c - n_flipped, rng);
            out[n][m] += c - n_flipped - m_only;
            out[1 - n][m] += n_flipped - both;
            out[n][1 - m] += m_only;
            out[1 - n][1 - m] += both;
        }
    }
    out
}

/// Why a replication's information estimate is unusable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimateFlag {
    /// `p̂_n > 0` but process (III) never recorded `n`.
    MissingConditionalRow { n: usize },
    /// `q̂_m = 0` while some `p̂_{m|n} > 0`.
    SingularSupport { m: usize },
}

/// Every quantity estimated from one [`CountsTable`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PluginEstimates {
    pub p_n: [f64; 2],
    pub q_m: [f64; 2],
    pub p_m_given_n: [Option<[f64; 2]>; 2],
    pub exp_neg_info: Option<f64>,
    pub total_info: Option<f64>,
    /// Number of cells with `Î_nm < 0`.
    pub negative_info_cells: usize,
    pub jarzynski: Option<f64>,
    pub dissipation: Option<f64>,
    pub flag: Option<EstimateFlag>,
}

/// Names of the reported quantities, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantity {
    FirstOutcome(Outcome),
    SecondOutcome(Outcome),
    /// `p_{m|n}`.
    Conditional {
        m: Outcome,
        n: Outcome,
    },
    ExpNegInfo,
    TotalInfo,
    Jarzynski,
    Dissipation,
}

impl Quantity {
    /// Probabilities in the panel order `p_-, p_+, q_-, q_+, p_{-|-}, p_{-|+}, p_{+|-}, p_{+|+}`.
    pub fn probabilities() -> Vec<Quantity> {
        let mut out = vec![];
        out.extend(Outcome::ALL.map(Quantity::FirstOutcome));
        out.extend(Outcome::ALL.map(Quantity::SecondOutcome));
        for m in Outcome::ALL {
            for n in Outcome::ALL {
                out.push(Quantity::Conditional { m, n });
            }
        }
        out
    }

    pub fn name(&self) -> String {
        match self {
            Quantity::FirstOutcome(n) => format!("p_{}", n.symbol()),
            Quantity::SecondOutcome(m) => format!("q_{}", m.symbol()),
            Quantity::Conditional { m, n } => format!("p_{}|{}", m.symbol(), n.symbol()),
            Quantity::ExpNegInfo => "exp_neg_info".into(),
            Quantity::TotalInfo => "total_info".into(),
            Quantity::Jarzynski => "jarzynski".into(),
            Quantity::Dissipation => "dissipation".into(),
        }
    }

    /// Value of this quantity in an exact distribution.
    pub fn of_distribution(&self, dist: &OutcomeDistribution) -> Option<f64> {
        match *self {
            Quantity::FirstOutcome(n) => Some(dist.p_n[n.index()]),
            Quantity::SecondOutcome(m) => Some(dist.q_m[m.index()]),
            Quantity::Conditional { m, n } => dist.conditional(n.index(), m.index()),
            _ => None,
        }
    }
}

impl PluginEstimates {
    pub fn value(&self, q: Quantity) -> Option<f64> {
        match q {
            Quantity::FirstOutcome(n) => Some(self.p_n[n.index()]),
            Quantity::SecondOutcome(m) => Some(self.q_m[m.index()]),
            Quantity::Conditional { m, n } => self.p_m_given_n[n.index()].map(|r| r[m.index()]),
            Quantity::ExpNegInfo => self.exp_neg_info,
            Quantity::TotalInfo => self.total_info,
            Quantity::Jarzynski => self.jarzynski,
            Quantity::Dissipation => self.dissipation,
        }
    }
}

/// Plug-in estimates by substituting frequencies into the exact functionals.
///
/// `p̂_{m|n}` uses the per-`n` denominators of process (III) and the joint is
/// `p̂_nm = p̂_n p̂_{m|n}` with `p̂_n` from process (I).
pub fn plugin_estimates(counts: &CountsTable, thermo: Option<&ThermoRecord>) -> Result<PluginEstimates> {
    counts.validate()?;
    let shots = counts.shots as f64;
    let p_n = counts.first.map(|c| c as f64 / shots);
    let q_m = counts.second.map(|c| c as f64 / shots);
    let mut p_m_given_n = [None; 2];
    for (n, row) in counts.pairs.iter().enumerate() {
        let total = row[0] + row[1];
        if total > 0 {
            p_m_given_n[n] = Some([row[0] as f64 / total as f64, row[1] as f64 / total as f64]);
        }
    }

    let mut est = PluginEstimates {
        p_n,
        q_m,
        p_m_given_n,
        exp_neg_info: None,
        total_info: None,
        negative_info_cells: 0,
        jarzynski: None,
        dissipation: None,
        flag: None,
    };

    if let Some(n) = (0..2).find(|&n| p_n[n] > 0.0 && p_m_given_n[n].is_none()) {
        est.flag = Some(EstimateFlag::MissingConditionalRow { n });
        return Ok(est);
    }
    let dist = OutcomeDistribution::new(p_n, q_m, p_m_given_n)?;
    if let Some(t) = thermo {
        est.jarzynski = Some(jarzynski_average(&dist, t));
        est.dissipation = Some(dissipation_average(&dist, t));
    }
    match pointwise_mutual_information(&dist) {
        Ok(info) => {
            est.exp_neg_info = Some(exp_neg_info_average(&dist, &info)?);
            est.total_info = Some(total_mutual_information(&dist, &info)?);
            est.negative_info_cells = info.negative_entries();
        }
        Err(Error::SingularSupport { m }) => est.flag = Some(EstimateFlag::SingularSupport { m }),
        Err(e) => return Err(e),
    }
    Ok(est)
}

/// Replication mean and spread of one quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub quantity: String,
    /// Mean over the replications where the quantity was defined.
    pub point_estimate: f64,
    /// Standard deviation across replications: the RMS error of a single
    /// `shots`-shot experiment.
    pub rms_error: f64,
    /// `rms_error / √replications`, the error of `point_estimate` itself.
    pub sem: f64,
    /// Replications contributing to the estimate.
    pub replications: usize,
    pub shots: u64,
    /// Replications where the quantity was undefined or invalidated.
    pub flagged: usize,
}

impl EstimateReport {
    fn from_samples(quantity: String, samples: &[Option<f64>], shots: u64) -> Self {
        let values: Vec<f64> = samples.iter().flatten().copied().collect();
        let k = values.len();
        let mean = if k == 0 {
            f64::NAN
        } else {
            values.iter().sum::<f64>() / k as f64
        };
        let rms = if k < 2 {
            f64::NAN
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64).sqrt()
        };
        EstimateReport {
            quantity,
            point_estimate: mean,
            rms_error: rms,
            sem: rms / (k as f64).sqrt(),
            replications: k,
            shots,
            flagged: samples.len() - k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replication {
    pub reports: Vec<EstimateReport>,
    pub replications: u32,
    /// Replications whose information estimate carried an [`EstimateFlag`].
    pub flagged_replications: usize,
    /// Replications with at least one negative `Î_nm`.
    pub replications_with_negative_info: usize,
}

impl Replication {
    pub fn report(&self, quantity: Quantity) -> Option<&EstimateReport> {
        let name = quantity.name();
        self.reports.iter().find(|r| r.quantity == name)
    }
}

/// Quantities reported for a config: the eight probabilities, the two
/// information functionals and, when energies are defined, the two
/// thermodynamic ones.
pub fn reported_quantities(config: &ProtocolConfig) -> Vec<Quantity> {
    let mut qs = Quantity::probabilities();
    qs.extend([Quantity::ExpNegInfo, Quantity::TotalInfo]);
    if config.energy_spec().is_some() {
        qs.extend([Quantity::Jarzynski, Quantity::Dissipation]);
    }
    qs
}

/// One replication: counts and plug-in estimates from its own stream.
pub fn run_replication(
    config: &ProtocolConfig,
    plan: &ShotPlan,
    thermo: Option<&ThermoRecord>,
    index: u32,
) -> Result<(CountsTable, PluginEstimates)> {
    let mut rng = plan.rng_for(index);
    let counts = simulate_protocol(config, plan, &mut rng)?;
    let est = plugin_estimates(&counts, thermo)?;
    Ok((counts, est))
}

/// Repeats the finite-shot experiment `plan.replications` times and reports
/// the mean and RMS error of every quantity.
pub fn replicate(config: &ProtocolConfig, plan: &ShotPlan) -> Result<Replication> {
    plan.validate()?;
    config.validate()?;
    let thermo = config
        .energy_spec()
        .map(|e| thermo_record(&e, config.p_axis, config.q_axis))
        .transpose()?;

    let estimates: Vec<PluginEstimates> = (0..plan.replications)
        .into_par_iter()
        .map(|r| run_replication(config, plan, thermo.as_ref(), r).map(|(_, est)| est))
        .collect::<Result<_>>()?;

    let reports = reported_quantities(config)
        .into_iter()
        .map(|q| {
            let samples: Vec<Option<f64>> = estimates.iter().map(|e| e.value(q)).collect();
            EstimateReport::from_samples(q.name(), &samples, plan.shots_per_setting)
        })
        .collect();

    Ok(Replication {
        reports,
        replications: plan.replications,
        flagged_replications: estimates.iter().filter(|e| e.flag.is_some()).count(),
        replications_with_negative_info: estimates.iter().filter(|e| e.negative_info_cells > 0).count(),
    })
}
