//! Information and work functionals over an [`OutcomeDistribution`].
//!
//! Cells with `p_nm = 0` are skipped everywhere (`0·ln 0 = 0`,
//! `0·e^x = 0`). All logarithms are natural.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{hamiltonian, EnergySpec, OutcomeDistribution};
use crate::qubit::{ln_partition_function, BlochVector, Outcome};

/// Pointwise information `I_nm` in nats; `None` where the joint has no weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoRecord {
    pub i_nm: [[Option<f64>; 2]; 2],
}

impl InfoRecord {
    pub fn has_negative_entry(&self) -> bool {
        self.i_nm.iter().flatten().flatten().any(|&i| i < 0.0)
    }

    pub fn negative_entries(&self) -> usize {
        self.i_nm.iter().flatten().flatten().filter(|&&i| i < 0.0).count()
    }
}

/// Work matrix and free-energy difference, energies in units of `E`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoRecord {
    /// `W_nm = E^i_n − E^f_m`.
    pub w_nm: [[f64; 2]; 2],
    /// `β` in units of `1/E`.
    pub beta: f64,
    /// `β ΔF = ln Z_f − ln Z_i`, defined at every `β ≥ 0`.
    pub beta_delta_f: f64,
    /// `ΔF = F_i − F_f`; `None` at `β = 0`.
    pub delta_f: Option<f64>,
}

/// `I_nm = ln p_{m|n} − ln q_m` on the support of `p_nm`.
#[allow(clippy::needless_range_loop)]
pub fn pointwise_mutual_information(dist: &OutcomeDistribution) -> Result<InfoRecord> {
    let mut i_nm = [[None; 2]; 2];
    for n in 0..2 {
        for m in 0..2 {
            if dist.p_nm[n][m] <= 0.0 {
                continue;
            }
            let cond = dist.conditional(n, m).ok_or(Error::InconsistentRecord { n, m })?;
            if dist.q_m[m] <= 0.0 {
                return Err(Error::SingularSupport { m });
            }
            i_nm[n][m] = Some(cond.ln() - dist.q_m[m].ln());
        }
    }
    Ok(InfoRecord { i_nm })
}

fn weighted_sum(dist: &OutcomeDistribution, info: &InfoRecord, f: impl Fn(f64) -> f64) -> Result<f64> {
    let mut acc = 0.0;
    for n in 0..2 {
        for m in 0..2 {
            let w = dist.p_nm[n][m];
            if w <= 0.0 {
                continue;
            }
            let i = info.i_nm[n][m].ok_or(Error::InconsistentRecord { n, m })?;
            acc += w * f(i);
        }
    }
    Ok(acc)
}

/// `⟨e^{−I}⟩ = Σ p_nm e^{−I_nm}`.
///
/// Cells with `p_nm = 0` contribute nothing, so the result falls below 1 when
/// some `p_{m|n} = 0` while `q_m > 0`: the skipped `q_m` mass is lost.
pub fn exp_neg_info_average(dist: &OutcomeDistribution, info: &InfoRecord) -> Result<f64> {
    weighted_sum(dist, info, |i| (-i).exp())
}

/// `Σ p_nm I_nm`, a `p_n`-weighted sum of KL divergences for exact inputs.
pub fn total_mutual_information(dist: &OutcomeDistribution, info: &InfoRecord) -> Result<f64> {
    weighted_sum(dist, info, |i| i)
}

pub fn work_matrix(energy: &EnergySpec) -> [[f64; 2]; 2] {
    let mut w = [[0.0; 2]; 2];
    for n in Outcome::ALL {
        for m in Outcome::ALL {
            w[n.index()][m.index()] = energy.initial.get(n) - energy.final_levels.get(m);
        }
    }
    w
}

fn beta_delta_f(energy: &EnergySpec, h_i_axis: BlochVector, h_f_axis: BlochVector) -> Result<f64> {
    energy.validate()?;
    let beta = energy.beta_e;
    let ln_zi = ln_partition_function(&hamiltonian(h_i_axis, energy.initial)?, beta)?;
    let ln_zf = ln_partition_function(&hamiltonian(h_f_axis, energy.final_levels)?, beta)?;
    Ok(ln_zf - ln_zi)
}

/// `ΔF = F_i − F_f` with `F_k = −ln Z_k / β`, in units of `E`.
pub fn free_energy_difference(energy: &EnergySpec, h_i_axis: BlochVector, h_f_axis: BlochVector) -> Result<f64> {
    let bdf = beta_delta_f(energy, h_i_axis, h_f_axis)?;
    if energy.beta_e == 0.0 {
        return Err(Error::UndefinedFreeEnergy);
    }
    Ok(bdf / energy.beta_e)
}

pub fn thermo_record(energy: &EnergySpec, h_i_axis: BlochVector, h_f_axis: BlochVector) -> Result<ThermoRecord> {
    let bdf = beta_delta_f(energy, h_i_axis, h_f_axis)?;
    Ok(ThermoRecord {
        w_nm: work_matrix(energy),
        beta: energy.beta_e,
        beta_delta_f: bdf,
        delta_f: (energy.beta_e > 0.0).then(|| bdf / energy.beta_e),
    })
}

fn thermo_sum(dist: &OutcomeDistribution, thermo: &ThermoRecord, f: impl Fn(f64) -> f64) -> f64 {
    let mut acc = 0.0;
    for n in 0..2 {
        for m in 0..2 {
            let w = dist.p_nm[n][m];
            if w > 0.0 {
                acc += w * f(thermo.beta * thermo.w_nm[n][m] - thermo.beta_delta_f);
            }
        }
    }
    acc
}

/// `⟨e^{β(W−ΔF)}⟩`.
pub fn jarzynski_average(dist: &OutcomeDistribution, thermo: &ThermoRecord) -> f64 {
    thermo_sum(dist, thermo, f64::exp)
}

/// `Σ p_nm β(ΔF − W_nm)`, dimensionless.
pub fn dissipation_average(dist: &OutcomeDistribution, thermo: &ThermoRecord) -> f64 {
    thermo_sum(dist, thermo, |x| -x)
}

/// Information content `β(ΔF − W_nm)` implied by the energies, so that
/// `e^{−I} = e^{β(W−ΔF)}` cell by cell.
pub fn info_thermo_bridge(thermo: &ThermoRecord) -> InfoRecord {
    InfoRecord {
        i_nm: thermo
            .w_nm
            .map(|row| row.map(|w| Some(thermo.beta_delta_f - thermo.beta * w))),
    }
}

/// Energy spec with the second-measurement labels exchanged, matching
/// [`OutcomeDistribution::with_m_labels_swapped`].
pub fn with_final_labels_swapped(energy: &EnergySpec) -> EnergySpec {
    EnergySpec {
        final_levels: energy.final_levels.swapped(),
        ..*energy
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{joint_distribution, joint_from_state, ProtocolConfig};
    use crate::qubit::{PulseSpec, QubitState};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    const TOL: f64 = 1e-12;

    fn table2_cell(alpha: f64, k: f64) -> OutcomeDistribution {
        let cfg = ProtocolConfig::pure(alpha, BlochVector::Z, BlochVector::Y, PulseSpec::new(k * PI / 5.0, 0.0));
        joint_distribution(&cfg).unwrap()
    }

    #[test]
    fn independence_gives_zero_information() {
        let d = OutcomeDistribution::new([0.3, 0.7], [0.4, 0.6], [Some([0.4, 0.6]), Some([0.4, 0.6])]).unwrap();
        let info = pointwise_mutual_information(&d).unwrap();
        for v in info.i_nm.iter().flatten() {
            assert_abs_diff_eq!(v.unwrap(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn gibbs_suite_information_vanishes() {
        let cfg = ProtocolConfig::gibbs(1.0, BlochVector::Z, BlochVector::X, PulseSpec::new(0.8, 0.0));
        let d = joint_distribution(&cfg).unwrap();
        let info = pointwise_mutual_information(&d).unwrap();
        for v in info.i_nm.iter().flatten() {
            assert_abs_diff_eq!(v.unwrap(), 0.0, epsilon = TOL);
        }
        assert_abs_diff_eq!(total_mutual_information(&d, &info).unwrap(), 0.0, epsilon = TOL);
    }

    #[test]
    fn pure_state_information_matches_direct_ratio() {
        let d = table2_cell((2.0f64 / 3.0).sqrt(), 1.0);
        let info = pointwise_mutual_information(&d).unwrap();
        let cond = d.conditional(0, 0).unwrap();
        assert_abs_diff_eq!(cond, (1.0 - (PI / 5.0).sin()) / 2.0, epsilon = TOL);
        assert_abs_diff_eq!(info.i_nm[0][0].unwrap(), (cond / d.q_m[0]).ln(), epsilon = TOL);
    }

    #[test]
    fn singular_support_is_an_error() {
        let d = OutcomeDistribution::new([1.0, 0.0], [1.0, 0.0], [Some([0.5, 0.5]), None]).unwrap();
        assert_eq!(pointwise_mutual_information(&d), Err(Error::SingularSupport { m: 1 }));
    }

    #[test]
    fn equality_and_total_information_examples() {
        for alpha in [1.0, (2.0f64 / 3.0).sqrt(), (1.0f64 / 3.0).sqrt()] {
            for k in 1..=4 {
                let d = table2_cell(alpha, k as f64);
                let info = pointwise_mutual_information(&d).unwrap();
                assert_abs_diff_eq!(exp_neg_info_average(&d, &info).unwrap(), 1.0, epsilon = TOL);
                if alpha == 1.0 {
                    assert_abs_diff_eq!(total_mutual_information(&d, &info).unwrap(), 0.0, epsilon = TOL);
                }
            }
        }
        // frozen from the direct 2×2 oracle in tests/oracles.rs
        let d = table2_cell((2.0f64 / 3.0).sqrt(), 4.0);
        let info = pointwise_mutual_information(&d).unwrap();
        assert_abs_diff_eq!(
            total_mutual_information(&d, &info).unwrap(),
            0.504_118_570_343_031_6,
            epsilon = 1e-12
        );
    }

    #[test]
    fn zero_conditional_with_support_breaks_the_equality() {
        // repeated z measurement of |+x⟩: p_{m|n} = δ_{mn} while q = (1/2, 1/2)
        let plus_x = QubitState::new(crate::qubit::Operator2::from_real([[0.5, 0.5], [0.5, 0.5]])).unwrap();
        let d = joint_from_state(&plus_x, BlochVector::Z, PulseSpec::identity(), BlochVector::Z).unwrap();
        let info = pointwise_mutual_information(&d).unwrap();
        assert_abs_diff_eq!(exp_neg_info_average(&d, &info).unwrap(), 0.5, epsilon = TOL);
        assert_abs_diff_eq!(total_mutual_information(&d, &info).unwrap(), 2f64.ln(), epsilon = TOL);
    }

    #[test]
    fn work_matrix_examples() {
        let w = work_matrix(&EnergySpec::new(1.0));
        assert_eq!(w[0][0], 0.0);
        assert_eq!(w[0][1], -2.0);
        assert_eq!(w[1][0], 2.0);
        assert_eq!(w[1][1], 0.0);
    }

    #[test]
    fn free_energy_examples() {
        let e = EnergySpec::new(1.0);
        assert_abs_diff_eq!(
            free_energy_difference(&e, BlochVector::Z, BlochVector::X).unwrap(),
            0.0,
            epsilon = TOL
        );
        let cold = EnergySpec::new(250.0);
        assert_abs_diff_eq!(
            free_energy_difference(&cold, BlochVector::Z, BlochVector::oblique()).unwrap(),
            0.0,
            epsilon = TOL
        );

        let doubled = EnergySpec {
            final_levels: crate::protocol::Levels::STANDARD.scaled(2.0),
            ..EnergySpec::new(1.0)
        };
        // F_i − F_f = (ln Z_f − ln Z_i)/β
        let expected = (2.0 * 2f64.cosh()).ln() - (2.0 * 1f64.cosh()).ln();
        assert_abs_diff_eq!(
            free_energy_difference(&doubled, BlochVector::Z, BlochVector::X).unwrap(),
            expected,
            epsilon = TOL
        );

        assert_eq!(
            free_energy_difference(&EnergySpec::new(0.0), BlochVector::Z, BlochVector::X),
            Err(Error::UndefinedFreeEnergy)
        );
        let hot = thermo_record(&EnergySpec::new(0.0), BlochVector::Z, BlochVector::X).unwrap();
        assert_eq!(hot.delta_f, None);
        assert_eq!(hot.beta_delta_f, 0.0);
    }

    #[test]
    fn jarzynski_examples() {
        for (be, q) in [(0.5, BlochVector::X), (1.0, BlochVector::oblique())] {
            let cfg = ProtocolConfig::gibbs(be, BlochVector::Z, q, PulseSpec::new(1.0, (-q.y).atan2(q.x)));
            let d = joint_distribution(&cfg).unwrap();
            let t = thermo_record(&cfg.energy_spec().unwrap(), BlochVector::Z, q).unwrap();
            assert_abs_diff_eq!(jarzynski_average(&d, &t), 1.0, epsilon = TOL);
        }
    }

    #[test]
    fn non_gibbs_diagonal_state_violates_jarzynski() {
        let rho = QubitState::new(crate::qubit::Operator2::diag(0.9, 0.1)).unwrap();
        let d = joint_from_state(&rho, BlochVector::Z, PulseSpec::new(0.7, 0.0), BlochVector::X).unwrap();
        let t = thermo_record(&EnergySpec::new(1.0), BlochVector::Z, BlochVector::X).unwrap();
        let cosh1 = 1f64.cosh();
        // Σ_n p_n e^{βE_n} cosh(βE) with p_{m|n} = 1/2
        let expected = (0.9 * (-1f64).exp() + 0.1 * 1f64.exp()) * cosh1;
        assert_abs_diff_eq!(jarzynski_average(&d, &t), expected, epsilon = TOL);
        assert!((jarzynski_average(&d, &t) - 1.0).abs() > 1e-3);
    }

    #[test]
    fn dissipation_examples() {
        for (be, expected) in [(0.5, 0.2311), (1.0, 0.7616), (0.0, 0.0)] {
            let cfg = ProtocolConfig::gibbs(be, BlochVector::Z, BlochVector::X, PulseSpec::new(0.3, 0.0));
            let d = joint_distribution(&cfg).unwrap();
            let t = thermo_record(&cfg.energy_spec().unwrap(), BlochVector::Z, BlochVector::X).unwrap();
            let got = dissipation_average(&d, &t);
            assert_abs_diff_eq!(got, be * be.tanh(), epsilon = TOL);
            assert_abs_diff_eq!(got, expected, epsilon = 5e-5);
        }
    }

    #[test]
    fn bridge_examples() {
        let t = thermo_record(&EnergySpec::new(1.0), BlochVector::Z, BlochVector::X).unwrap();
        let info = info_thermo_bridge(&t);
        assert_eq!(info.i_nm[0][0], Some(0.0));
        assert_eq!(info.i_nm[0][1], Some(2.0));
        assert_eq!(info.i_nm[1][0], Some(-2.0));

        let cfg = ProtocolConfig::gibbs(1.0, BlochVector::Z, BlochVector::X, PulseSpec::new(2.2, 1.1));
        let d = joint_distribution(&cfg).unwrap();
        assert_abs_diff_eq!(
            exp_neg_info_average(&d, &info).unwrap(),
            jarzynski_average(&d, &t),
            epsilon = TOL
        );
    }

    #[test]
    fn inconsistent_record_is_rejected() {
        let d = table2_cell(0.6, 1.0);
        let empty = InfoRecord { i_nm: [[None; 2]; 2] };
        assert!(matches!(
            exp_neg_info_average(&d, &empty),
            Err(Error::InconsistentRecord { .. })
        ));
    }
}
