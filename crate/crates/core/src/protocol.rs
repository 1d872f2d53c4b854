//! The two-measurement protocol: state preparation, one carrier pulse
//! between a `{P_±}` and a `{Q_±}` projective measurement, and the exact
//! outcome statistics of the three measurement processes:
//!
//! 1. measure `P` on `ρ` → `p_n`
//! 2. evolve, then measure `Q` → `q_m`
//! 3. measure `P`, keep the collapsed state `ρ_n`, evolve, measure `Q` → `p_{m|n}`

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::qubit::{
    born_probability, carrier_unitary, evolve, gibbs_state, post_measurement_state, projector, BlochVector, Operator2,
    Outcome, PulseSpec, QubitState, TOL,
};

/// Energies assigned to the `-` and `+` outcomes of one measurement basis,
/// in units of `E`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Levels {
    pub minus: f64,
    pub plus: f64,
}

impl Levels {
    /// `E_- = -E`, `E_+ = +E`.
    pub const STANDARD: Levels = Levels { minus: -1.0, plus: 1.0 };

    pub fn get(&self, outcome: Outcome) -> f64 {
        match outcome {
            Outcome::Minus => self.minus,
            Outcome::Plus => self.plus,
        }
    }

    pub fn swapped(&self) -> Levels {
        Levels {
            minus: self.plus,
            plus: self.minus,
        }
    }

    pub fn scaled(&self, s: f64) -> Levels {
        Levels {
            minus: s * self.minus,
            plus: s * self.plus,
        }
    }
}

/// Inverse temperature (as the product `βE`) and the eigenvalue-to-outcome
/// assignment of `H_i = Σ E^i_± P_±` and `H_f = Σ E^f_± Q_±`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergySpec {
    pub beta_e: f64,
    pub initial: Levels,
    pub final_levels: Levels,
}

impl EnergySpec {
    pub fn new(beta_e: f64) -> Self {
        EnergySpec {
            beta_e,
            initial: Levels::STANDARD,
            final_levels: Levels::STANDARD,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.beta_e.is_finite() || self.beta_e < 0.0 {
            return Err(invalid(format!("beta*E must be finite and >= 0, got {}", self.beta_e)));
        }
        let levels = [self.initial, self.final_levels];
        if levels.iter().any(|l| !l.minus.is_finite() || !l.plus.is_finite()) {
            return Err(invalid("energy levels must be finite"));
        }
        Ok(())
    }
}

/// `Σ_± E_± (I ± n·σ)/2`.
pub fn hamiltonian(axis: BlochVector, levels: Levels) -> Result<Operator2> {
    Ok(projector(axis, Outcome::Minus)?.scale_real(levels.minus)
        + projector(axis, Outcome::Plus)?.scale_real(levels.plus))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InitialState {
    /// `α|↓⟩ − i√(1−α²)|↑⟩` (for the default preparation phase).
    Pure { alpha: f64 },
    /// `exp(−βH_i)/Z_i` with `H_i` built on the first-measurement axis.
    Gibbs { beta_e: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub initial: InitialState,
    /// Laser phase of the preparation pulse (pure states only).
    pub prep_phase: f64,
    pub p_axis: BlochVector,
    pub q_axis: BlochVector,
    pub evolution: PulseSpec,
    /// Required for the thermodynamic functionals. A Gibbs config without an
    /// explicit spec uses the standard levels at its own `βE`.
    pub energy: Option<EnergySpec>,
}

impl ProtocolConfig {
    pub fn pure(alpha: f64, p_axis: BlochVector, q_axis: BlochVector, evolution: PulseSpec) -> Self {
        ProtocolConfig {
            initial: InitialState::Pure { alpha },
            prep_phase: 0.0,
            p_axis,
            q_axis,
            evolution,
            energy: None,
        }
    }

    pub fn gibbs(beta_e: f64, p_axis: BlochVector, q_axis: BlochVector, evolution: PulseSpec) -> Self {
        ProtocolConfig {
            initial: InitialState::Gibbs { beta_e },
            prep_phase: 0.0,
            p_axis,
            q_axis,
            evolution,
            energy: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, axis) in [("p_axis", self.p_axis), ("q_axis", self.q_axis)] {
            if !axis.is_unit() {
                return Err(invalid(format!("{name} {axis:?} is not unit norm")));
            }
        }
        if !self.evolution.theta.is_finite() || !self.evolution.phi.is_finite() || !self.prep_phase.is_finite() {
            return Err(invalid("pulse angles must be finite"));
        }
        match self.initial {
            InitialState::Pure { alpha } => check_alpha(alpha)?,
            InitialState::Gibbs { beta_e } => {
                check_beta_e(beta_e)?;
                if let Some(e) = self.energy {
                    if e.beta_e != beta_e {
                        return Err(invalid(format!(
                            "Gibbs preparation at beta*E = {beta_e} conflicts with energy spec beta*E = {}",
                            e.beta_e
                        )));
                    }
                }
            }
        }
        if let Some(e) = self.energy {
            e.validate()?;
        }
        Ok(())
    }

    pub fn energy_spec(&self) -> Option<EnergySpec> {
        match (self.energy, self.initial) {
            (Some(e), _) => Some(e),
            (None, InitialState::Gibbs { beta_e }) => Some(EnergySpec::new(beta_e)),
            (None, InitialState::Pure { .. }) => None,
        }
    }

    pub fn initial_state(&self) -> Result<QubitState> {
        self.validate()?;
        match self.initial {
            InitialState::Pure { alpha } => prepare_pure_with_phase(alpha, self.prep_phase),
            InitialState::Gibbs { beta_e } => {
                let levels = self.energy_spec().map_or(Levels::STANDARD, |e| e.initial);
                gibbs_state(&hamiltonian(self.p_axis, levels)?, beta_e)
            }
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(invalid(format!("amplitude alpha must lie in [0, 1], got {alpha}")));
    }
    Ok(())
}

fn check_beta_e(beta_e: f64) -> Result<()> {
    if !beta_e.is_finite() || beta_e < 0.0 {
        return Err(invalid(format!("beta*E must be finite and >= 0, got {beta_e}")));
    }
    Ok(())
}

/// `U_C(2 arccos α, 0)|↓⟩ = α|↓⟩ − i√(1−α²)|↑⟩`.
pub fn prepare_pure(alpha: f64) -> Result<QubitState> {
    prepare_pure_with_phase(alpha, 0.0)
}

pub fn prepare_pure_with_phase(alpha: f64, phi0: f64) -> Result<QubitState> {
    check_alpha(alpha)?;
    let u = carrier_unitary(PulseSpec::new(2.0 * alpha.acos(), phi0));
    evolve(&QubitState::down(), &u)
}

/// Zeroes the coherences in the `(|↓⟩, |↑⟩)` basis.
pub fn dephase(state: &QubitState) -> QubitState {
    let rho = state.rho();
    QubitState::new(Operator2::diag(rho[(0, 0)].re, rho[(1, 1)].re))
        .expect("diagonal of a density matrix is a density matrix")
}

/// Thermal state of `E σ_z` at `βE`, reached the way the experiment does it:
/// a preparation pulse with `cos²(θ₀/2) = e^{βE}/Z` followed by dephasing.
pub fn prepare_gibbs(beta_e: f64) -> Result<QubitState> {
    check_beta_e(beta_e)?;
    // e^{βE}/Z = 1/(1 + e^{-2βE})
    let weight_down = 1.0 / (1.0 + (-2.0 * beta_e).exp());
    let state = dephase(&prepare_pure(weight_down.sqrt())?);
    debug_assert!({
        let direct = gibbs_state(&crate::qubit::pauli(crate::qubit::Pauli::Z), beta_e)?;
        direct.rho().approx_eq(state.rho(), TOL)
    });
    Ok(state)
}

/// Measurement-pulse operator `U_C(θ,φ)† |↑⟩⟨↑| U_C(θ,φ)`: the projector
/// effectively measured by pulsing then detecting `|↑⟩`.
pub fn measured_projector(pulse: PulseSpec) -> Operator2 {
    let u = carrier_unitary(pulse);
    u.adjoint() * Operator2::up_projector() * u
}

/// Pulse `(θ₂, φ₂)` whose [`measured_projector`] equals `(I ± n·σ)/2`.
///
/// The pulse maps `|↑⟩⟨↑|` onto the Bloch direction
/// `(sin θ sin φ, sin θ cos φ, cos θ)`, which is inverted here.
pub fn pulse_for_projector(axis: BlochVector, sign: Outcome) -> Result<PulseSpec> {
    if !axis.is_unit() {
        return Err(invalid(format!("measurement axis {axis:?} is not unit norm")));
    }
    let target = axis.scaled(sign.sign());
    let theta = target.z.clamp(-1.0, 1.0).acos();
    let in_plane = target.x.hypot(target.y);
    let phi = if in_plane <= TOL { 0.0 } else { target.x.atan2(target.y) };
    Ok(PulseSpec::new(theta, phi))
}

/// Process (I): `(p_-, p_+)`.
pub fn first_measurement(state: &QubitState, p_axis: BlochVector) -> Result<[f64; 2]> {
    born_pair(state, p_axis)
}

/// Process (II): `(q_-, q_+)` of `U ρ U†` with no prior measurement.
pub fn second_measurement_unconditional(
    state: &QubitState,
    evolution: PulseSpec,
    q_axis: BlochVector,
) -> Result<[f64; 2]> {
    let evolved = evolve(state, &carrier_unitary(evolution))?;
    born_pair(&evolved, q_axis)
}

/// Process (III): row `n` holds `(p_{-|n}, p_{+|n})`, or `None` when the
/// conditioning outcome `n` is impossible.
pub fn conditional_probabilities(
    state: &QubitState,
    p_axis: BlochVector,
    evolution: PulseSpec,
    q_axis: BlochVector,
) -> Result<[Option<[f64; 2]>; 2]> {
    let u = carrier_unitary(evolution);
    let mut rows = [None; 2];
    for n in Outcome::ALL {
        let collapsed = match post_measurement_state(state, &projector(p_axis, n)?) {
            Ok(s) => s,
            Err(Error::OutcomeImpossible) => continue,
            Err(e) => return Err(e),
        };
        rows[n.index()] = Some(born_pair(&evolve(&collapsed, &u)?, q_axis)?);
    }
    Ok(rows)
}

fn born_pair(state: &QubitState, axis: BlochVector) -> Result<[f64; 2]> {
    Ok([
        born_probability(state, &projector(axis, Outcome::Minus)?)?,
        born_probability(state, &projector(axis, Outcome::Plus)?)?,
    ])
}

/// `p_n`, `q_m`, `p_{m|n}` and `p_{nm} = p_n p_{m|n}` for one protocol instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub p_n: [f64; 2],
    pub q_m: [f64; 2],
    pub p_m_given_n: [Option<[f64; 2]>; 2],
    pub p_nm: [[f64; 2]; 2],
}

impl OutcomeDistribution {
    /// Assembles the joint from its factors and checks every invariant.
    /// A conditional row may be undefined only when its `p_n` vanishes.
    pub fn new(p_n: [f64; 2], q_m: [f64; 2], p_m_given_n: [Option<[f64; 2]>; 2]) -> Result<Self> {
        check_simplex("p_n", &p_n)?;
        check_simplex("q_m", &q_m)?;
        let mut p_nm = [[0.0; 2]; 2];
        for n in 0..2 {
            match p_m_given_n[n] {
                Some(row) => {
                    check_simplex("p_{m|n}", &row)?;
                    p_nm[n] = [p_n[n] * row[0], p_n[n] * row[1]];
                }
                None if p_n[n] <= TOL => {}
                None => {
                    return Err(invalid(format!(
                        "conditional row n={n} is undefined but p_n = {}",
                        p_n[n]
                    )))
                }
            }
        }
        Ok(OutcomeDistribution {
            p_n,
            q_m,
            p_m_given_n,
            p_nm,
        })
    }

    pub fn conditional(&self, n: usize, m: usize) -> Option<f64> {
        self.p_m_given_n[n].map(|row| row[m])
    }

    /// `Σ_n p_{nm}`, the classical marginal of the second outcome.
    pub fn joint_marginal_m(&self) -> [f64; 2] {
        [self.p_nm[0][0] + self.p_nm[1][0], self.p_nm[0][1] + self.p_nm[1][1]]
    }

    /// Same statistics with the second-measurement labels exchanged.
    pub fn with_m_labels_swapped(&self) -> Self {
        let swap = |r: [f64; 2]| [r[1], r[0]];
        OutcomeDistribution {
            p_n: self.p_n,
            q_m: swap(self.q_m),
            p_m_given_n: self.p_m_given_n.map(|r| r.map(swap)),
            p_nm: self.p_nm.map(swap),
        }
    }
}

fn check_simplex(name: &str, v: &[f64; 2]) -> Result<()> {
    if v.iter().any(|p| !p.is_finite() || *p < 0.0 || *p > 1.0) {
        return Err(invalid(format!("{name} = {v:?} has entries outside [0, 1]")));
    }
    if (v[0] + v[1] - 1.0).abs() > TOL {
        return Err(invalid(format!("{name} = {v:?} does not sum to 1")));
    }
    Ok(())
}

/// Exact outcome statistics for an arbitrary initial state.
pub fn joint_from_state(
    state: &QubitState,
    p_axis: BlochVector,
    evolution: PulseSpec,
    q_axis: BlochVector,
) -> Result<OutcomeDistribution> {
    let p_n = first_measurement(state, p_axis)?;
    let q_m = second_measurement_unconditional(state, evolution, q_axis)?;
    let cond = conditional_probabilities(state, p_axis, evolution, q_axis)?;
    OutcomeDistribution::new(p_n, q_m, cond)
}

pub fn joint_distribution(config: &ProtocolConfig) -> Result<OutcomeDistribution> {
    let state = config.initial_state()?;
    joint_from_state(&state, config.p_axis, config.evolution, config.q_axis)
}
