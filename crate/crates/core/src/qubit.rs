//! Exact single-qubit operator algebra.
//!
//! Everything lives in the fixed basis order `(|↓⟩, |↑⟩)`. The Pauli set is
//! right-handed (`σ_x σ_y = i σ_z`) with
//!
//! ```text
//! σ_z |↓⟩ = -|↓⟩     σ_z |↑⟩ = +|↑⟩
//! σ_x |↓⟩ =  |↑⟩     σ_y |↓⟩ = -i |↑⟩
//! ```
//!
//! so `|↓⟩` is the low-energy level of `E σ_z` and the carrier pulses
//! `U_C(θ, φ) = cos(θ/2) I − i sin(θ/2)(σ_x cos φ − σ_y sin φ)` realise the
//! measurement-pulse tables used by the protocol module.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Absolute tolerance for every physicality check in this crate.
pub const TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Binary measurement outcome. `Minus` is index 0, `Plus` is index 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    Minus,
    Plus,
}

impl Outcome {
    pub const ALL: [Outcome; 2] = [Outcome::Minus, Outcome::Plus];

    pub fn index(self) -> usize {
        match self {
            Outcome::Minus => 0,
            Outcome::Plus => 1,
        }
    }

    pub fn from_index(i: usize) -> Outcome {
        if i == 0 {
            Outcome::Minus
        } else {
            Outcome::Plus
        }
    }

    /// `-1.0` or `+1.0`.
    pub fn sign(self) -> f64 {
        match self {
            Outcome::Minus => -1.0,
            Outcome::Plus => 1.0,
        }
    }

    pub fn flipped(self) -> Outcome {
        match self {
            Outcome::Minus => Outcome::Plus,
            Outcome::Plus => Outcome::Minus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Outcome::Minus => '-',
            Outcome::Plus => '+',
        }
    }
}

/// 2×2 complex matrix in the `(|↓⟩, |↑⟩)` basis.
#[derive(Clone, Copy, PartialEq)]
pub struct Operator2 {
    m: [[Complex64; 2]; 2],
}

impl fmt::Debug for Operator2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1]
        )
    }
}

impl Operator2 {
    pub const fn from_rows(rows: [[Complex64; 2]; 2]) -> Self {
        Operator2 { m: rows }
    }

    pub fn from_real(rows: [[f64; 2]; 2]) -> Self {
        Operator2 {
            m: rows.map(|r| r.map(|x| Complex64::new(x, 0.0))),
        }
    }

    pub fn identity() -> Self {
        Operator2::from_rows([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn zero() -> Self {
        Operator2::from_rows([[ZERO, ZERO], [ZERO, ZERO]])
    }

    pub fn diag(a: f64, b: f64) -> Self {
        Operator2::from_real([[a, 0.0], [0.0, b]])
    }

    /// `|↓⟩⟨↓|`
    pub fn down_projector() -> Self {
        Operator2::diag(1.0, 0.0)
    }

    /// `|↑⟩⟨↑|`, the state the detector registers.
    pub fn up_projector() -> Self {
        Operator2::diag(0.0, 1.0)
    }

    pub fn rows(&self) -> [[Complex64; 2]; 2] {
        self.m
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Operator2::from_rows([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Operator2 {
            m: self.m.map(|r| r.map(|x| x * s)),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Operator2) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.m[r][c] - other.m[r][c]).norm());
            }
        }
        worst
    }

    pub fn approx_eq(&self, other: &Operator2, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.approx_eq(&self.adjoint(), tol)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        (*self * self.adjoint()).approx_eq(&Operator2::identity(), tol)
    }

    pub fn is_projector(&self, tol: f64) -> bool {
        self.is_hermitian(tol) && (*self * *self).approx_eq(self, tol)
    }

    /// Expansion `H = a I + b·σ` of a Hermitian operator; returns `(a, b)`.
    pub fn pauli_decomposition(&self) -> (f64, [f64; 3]) {
        let half = |op: Operator2| 0.5 * (*self * op).trace().re;
        (
            0.5 * self.trace().re,
            [half(pauli(Pauli::X)), half(pauli(Pauli::Y)), half(pauli(Pauli::Z))],
        )
    }

    /// Eigenvalues of a Hermitian operator, ascending.
    pub fn hermitian_eigenvalues(&self) -> [f64; 2] {
        let a = self.m[0][0].re;
        let d = self.m[1][1].re;
        let b = self.m[0][1];
        let mean = 0.5 * (a + d);
        let radius = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        [mean - radius, mean + radius]
    }

    fn hermitized(&self) -> Self {
        (*self + self.adjoint()).scale_real(0.5)
    }
}

impl Index<(usize, usize)> for Operator2 {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.m[r][c]
    }
}

impl Add for Operator2 {
    type Output = Operator2;
    fn add(self, rhs: Operator2) -> Operator2 {
        let mut out = self.m;
        for (r, row) in out.iter_mut().enumerate() {
            for (c, x) in row.iter_mut().enumerate() {
                *x += rhs.m[r][c];
            }
        }
        Operator2 { m: out }
    }
}

impl Sub for Operator2 {
    type Output = Operator2;
    fn sub(self, rhs: Operator2) -> Operator2 {
        self + (-rhs)
    }
}

impl Neg for Operator2 {
    type Output = Operator2;
    fn neg(self) -> Operator2 {
        Operator2 {
            m: self.m.map(|r| r.map(|x| -x)),
        }
    }
}

impl Mul for Operator2 {
    type Output = Operator2;
    fn mul(self, rhs: Operator2) -> Operator2 {
        let a = &self.m;
        let b = &rhs.m;
        let mut out = [[ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, x) in row.iter_mut().enumerate() {
                *x = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Operator2 { m: out }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

pub fn pauli(axis: Pauli) -> Operator2 {
    match axis {
        Pauli::I => Operator2::identity(),
        Pauli::X => Operator2::from_rows([[ZERO, ONE], [ONE, ZERO]]),
        Pauli::Y => Operator2::from_rows([[ZERO, I], [-I, ZERO]]),
        Pauli::Z => Operator2::diag(-1.0, 1.0),
    }
}

/// Direction on the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const X: BlochVector = BlochVector::new(1.0, 0.0, 0.0);
    pub const Y: BlochVector = BlochVector::new(0.0, 1.0, 0.0);
    pub const Z: BlochVector = BlochVector::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        BlochVector { x, y, z }
    }

    /// The in-plane axis `(1/2, √3/2, 0)`, i.e. `O = (σ_x + √3 σ_y)/2`.
    pub fn oblique() -> Self {
        BlochVector::new(0.5, 0.75f64.sqrt(), 0.0)
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn is_unit(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite() && (self.norm() - 1.0).abs() <= TOL
    }

    /// Rescales a nonzero finite vector to unit length.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !n.is_finite() || n == 0.0 {
            return Err(invalid(format!("cannot normalize Bloch vector {self:?}")));
        }
        Ok(BlochVector::new(self.x / n, self.y / n, self.z / n))
    }

    pub fn scaled(&self, s: f64) -> Self {
        BlochVector::new(s * self.x, s * self.y, s * self.z)
    }

    pub fn dot(&self, o: &BlochVector) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    fn require_unit(&self) -> Result<()> {
        if self.is_unit() {
            Ok(())
        } else {
            Err(invalid(format!(
                "Bloch vector {:?} is not unit norm (|n| = {})",
                self,
                self.norm()
            )))
        }
    }
}

/// `x σ_x + y σ_y + z σ_z` without the unit-norm check.
fn sigma_dot(v: &BlochVector) -> Operator2 {
    pauli(Pauli::X).scale_real(v.x) + pauli(Pauli::Y).scale_real(v.y) + pauli(Pauli::Z).scale_real(v.z)
}

/// `n·σ` for a unit vector `n`.
pub fn bloch_operator(n: BlochVector) -> Result<Operator2> {
    n.require_unit()?;
    Ok(sigma_dot(&n))
}

/// Rank-1 projector `(I ± n·σ)/2`.
pub fn projector(n: BlochVector, sign: Outcome) -> Result<Operator2> {
    let ns = bloch_operator(n)?;
    Ok((Operator2::identity() + ns.scale_real(sign.sign())).scale_real(0.5))
}

/// Carrier pulse parameters: rotation angle `θ = Ωt` and laser phase `φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub theta: f64,
    pub phi: f64,
}

impl PulseSpec {
    /// Wraps `theta` into `[0, 2π)` and `phi` into `(-π, π]`.
    pub fn new(theta: f64, phi: f64) -> Self {
        PulseSpec {
            theta: wrap_theta(theta),
            phi: wrap_phi(phi),
        }
    }

    pub const fn identity() -> Self {
        PulseSpec { theta: 0.0, phi: 0.0 }
    }
}

fn wrap_theta(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t >= 2.0 * PI {
        0.0
    } else {
        t
    }
}

fn wrap_phi(phi: f64) -> f64 {
    let mut p = phi.rem_euclid(2.0 * PI);
    if p > PI {
        p -= 2.0 * PI;
    }
    if p <= -PI {
        p += 2.0 * PI;
    }
    // rem_euclid maps -π to π already; this also clears a negative zero
    p + 0.0
}

/// `U_C(θ, φ) = cos(θ/2) I − i sin(θ/2)(σ_x cos φ − σ_y sin φ)`.
pub fn carrier_unitary(pulse: PulseSpec) -> Operator2 {
    let (s, c) = (0.5 * pulse.theta).sin_cos();
    let generator = pauli(Pauli::X).scale_real(pulse.phi.cos()) - pauli(Pauli::Y).scale_real(pulse.phi.sin());
    Operator2::identity().scale_real(c) + generator.scale(Complex64::new(0.0, -s))
}

/// A validated density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    rho: Operator2,
}

impl QubitState {
    /// Checks Hermiticity, unit trace and positivity, each within [`TOL`].
    pub fn new(rho: Operator2) -> Result<Self> {
        if !rho.is_finite() {
            return Err(invalid("density matrix has non-finite entries"));
        }
        if !rho.is_hermitian(TOL) {
            return Err(invalid(format!("density matrix is not Hermitian: {rho:?}")));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > TOL || tr.im.abs() > TOL {
            return Err(invalid(format!("density matrix trace is {tr}, expected 1")));
        }
        let rho = rho.hermitized();
        let [low, _] = rho.hermitian_eigenvalues();
        if low < -TOL {
            return Err(invalid(format!("density matrix has negative eigenvalue {low}")));
        }
        Ok(QubitState { rho })
    }

    /// `|ψ⟩⟨ψ|` for a normalized amplitude pair `(⟨↓|ψ⟩, ⟨↑|ψ⟩)`.
    pub fn from_amplitudes(down: Complex64, up: Complex64) -> Result<Self> {
        let amps = [down, up];
        let mut m = [[ZERO; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                m[r][c] = amps[r] * amps[c].conj();
            }
        }
        QubitState::new(Operator2::from_rows(m))
    }

    pub fn maximally_mixed() -> Self {
        QubitState {
            rho: Operator2::diag(0.5, 0.5),
        }
    }

    pub fn down() -> Self {
        QubitState {
            rho: Operator2::down_projector(),
        }
    }

    pub fn up() -> Self {
        QubitState {
            rho: Operator2::up_projector(),
        }
    }

    pub fn rho(&self) -> &Operator2 {
        &self.rho
    }

    /// Bloch vector `r` with `ρ = (I + r·σ)/2`.
    pub fn bloch(&self) -> BlochVector {
        let (_, b) = self.rho.pauli_decomposition();
        BlochVector::new(2.0 * b[0], 2.0 * b[1], 2.0 * b[2])
    }

    /// `I − ρ`: for a pure state its orthogonal complement, for a mixed state
    /// the point reflection through the centre of the Bloch ball.
    pub fn complement(&self) -> Self {
        QubitState {
            rho: (Operator2::identity() - self.rho).hermitized(),
        }
    }
}

/// `U ρ U†`.
pub fn evolve(state: &QubitState, u: &Operator2) -> Result<QubitState> {
    if !u.is_unitary(TOL) {
        return Err(invalid(format!("evolution operator is not unitary: {u:?}")));
    }
    QubitState::new((*u * state.rho * u.adjoint()).hermitized())
}

/// `ln tr exp(−βH)` via `exp(aI + b·σ) = e^a (cosh|b| I + sinh|b| b̂·σ)`.
pub fn ln_partition_function(h: &Operator2, beta: f64) -> Result<f64> {
    check_gibbs_args(h, beta)?;
    let (a, b) = h.pauli_decomposition();
    let r = BlochVector::new(b[0], b[1], b[2]).norm();
    // ln(2 cosh x) = |x| + ln(1 + e^{-2|x|})
    let x = beta * r;
    Ok(-beta * a + x + (-2.0 * x).exp().ln_1p())
}

pub fn partition_function(h: &Operator2, beta: f64) -> Result<f64> {
    ln_partition_function(h, beta).map(f64::exp)
}

fn check_gibbs_args(h: &Operator2, beta: f64) -> Result<()> {
    if !h.is_finite() || !h.is_hermitian(TOL) {
        return Err(invalid(format!("Hamiltonian is not Hermitian: {h:?}")));
    }
    if !beta.is_finite() || beta < 0.0 {
        return Err(invalid(format!(
            "inverse temperature must be finite and >= 0, got {beta}"
        )));
    }
    Ok(())
}

/// `exp(−βH) / tr exp(−βH)`.
///
/// With `H = aI + b·σ` the identity part cancels and the state is
/// `(I − tanh(β|b|) b̂·σ)/2`.
pub fn gibbs_state(h: &Operator2, beta: f64) -> Result<QubitState> {
    check_gibbs_args(h, beta)?;
    let (_, b) = h.pauli_decomposition();
    let bv = BlochVector::new(b[0], b[1], b[2]);
    let r = bv.norm();
    if r == 0.0 {
        return Ok(QubitState::maximally_mixed());
    }
    let polarization = -(beta * r).tanh() / r;
    let rho = (Operator2::identity() + sigma_dot(&bv.scaled(polarization))).scale_real(0.5);
    QubitState::new(rho)
}

/// `tr{P ρ}`, clamped to `[0, 1]` when it overshoots by no more than [`TOL`].
pub fn born_probability(state: &QubitState, projector: &Operator2) -> Result<f64> {
    let p = (*projector * state.rho).trace().re;
    clamp_probability(p)
}

pub(crate) fn clamp_probability(p: f64) -> Result<f64> {
    if !(-TOL..=1.0 + TOL).contains(&p) {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// `PρP / tr{PρP}`.
pub fn post_measurement_state(state: &QubitState, projector: &Operator2) -> Result<QubitState> {
    let p = born_probability(state, projector)?;
    if p <= TOL {
        return Err(Error::OutcomeImpossible);
    }
    let collapsed = (*projector * state.rho * *projector).scale_real(1.0 / p);
    QubitState::new(collapsed.hermitized())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{E, FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pauli_conventions() {
        assert!(pauli(Pauli::Z).approx_eq(&Operator2::diag(-1.0, 1.0), 0.0));
        let x = pauli(Pauli::X);
        assert!((x * x).approx_eq(&Operator2::identity(), 0.0));
        assert_eq!(pauli(Pauli::Y).trace(), ZERO);
        // σ_y |↓⟩ = -i |↑⟩: first column of σ_y
        let y = pauli(Pauli::Y);
        assert_eq!(y[(0, 0)], ZERO);
        assert_eq!(y[(1, 0)], c(0.0, -1.0));
        // right-handed: σ_x σ_y = i σ_z
        let xy = pauli(Pauli::X) * pauli(Pauli::Y);
        assert!(xy.approx_eq(&pauli(Pauli::Z).scale(I), 1e-15));
    }

    #[test]
    fn bloch_operator_examples() {
        assert!(bloch_operator(BlochVector::Z).unwrap().approx_eq(&pauli(Pauli::Z), 0.0));
        let o = bloch_operator(BlochVector::oblique()).unwrap();
        let expected = (pauli(Pauli::X) + pauli(Pauli::Y).scale_real(3f64.sqrt())).scale_real(0.5);
        assert!(o.approx_eq(&expected, TOL));
        let ev = bloch_operator(BlochVector::X).unwrap().hermitian_eigenvalues();
        assert_abs_diff_eq!(ev[0], -1.0, epsilon = TOL);
        assert_abs_diff_eq!(ev[1], 1.0, epsilon = TOL);
        assert!(matches!(
            bloch_operator(BlochVector::new(1.0, 1.0, 0.0)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn projector_examples() {
        let up = projector(BlochVector::Z, Outcome::Plus).unwrap();
        assert!(up.approx_eq(&Operator2::up_projector(), TOL));
        let sum = up + projector(BlochVector::Z, Outcome::Minus).unwrap();
        assert!(sum.approx_eq(&Operator2::identity(), TOL));
        // (I + σ_y)/2 under σ_y = [[0, i], [-i, 0]]
        let py = projector(BlochVector::Y, Outcome::Plus).unwrap();
        let expected = Operator2::from_rows([[c(0.5, 0.0), c(0.0, 0.5)], [c(0.0, -0.5), c(0.5, 0.0)]]);
        assert!(py.approx_eq(&expected, TOL));
        assert!(projector(BlochVector::new(0.0, 0.0, 2.0), Outcome::Plus).is_err());
    }

    #[test]
    fn carrier_unitary_examples() {
        for phi in [-3.0, -1.0, 0.0, 0.7, PI] {
            assert!(carrier_unitary(PulseSpec::new(0.0, phi)).approx_eq(&Operator2::identity(), TOL));
        }
        let flip = carrier_unitary(PulseSpec::new(PI, 0.0));
        assert!(flip.approx_eq(&pauli(Pauli::X).scale(-I), TOL));
        let half = carrier_unitary(PulseSpec::new(PI / 2.0, PI / 2.0));
        let expected = (Operator2::identity() + pauli(Pauli::Y).scale(I)).scale_real(FRAC_1_SQRT_2);
        assert!(half.approx_eq(&expected, TOL));
    }

    #[test]
    fn pulse_spec_wraps_into_canonical_ranges() {
        let p = PulseSpec::new(2.0 * PI + 0.5, -PI);
        assert_abs_diff_eq!(p.theta, 0.5, epsilon = 1e-15);
        assert_eq!(p.phi, PI);
        assert_eq!(PulseSpec::new(0.0, -0.0).phi.to_bits(), 0.0f64.to_bits());
        assert_abs_diff_eq!(PulseSpec::new(0.0, 3.0 * PI / 2.0).phi, -PI / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn evolve_examples() {
        let rho = QubitState::from_amplitudes(c(0.6, 0.0), c(0.0, -0.8)).unwrap();
        let same = evolve(&rho, &Operator2::identity()).unwrap();
        assert!(same.rho().approx_eq(rho.rho(), TOL));
        let flipped = evolve(&QubitState::down(), &carrier_unitary(PulseSpec::new(PI, 0.0))).unwrap();
        assert!(flipped.rho().approx_eq(&Operator2::up_projector(), TOL));
        let u = carrier_unitary(PulseSpec::new(1.1, -2.3));
        let mixed = evolve(&QubitState::maximally_mixed(), &u).unwrap();
        assert!(mixed.rho().approx_eq(&Operator2::diag(0.5, 0.5), TOL));
        assert!(evolve(&rho, &Operator2::diag(1.0, 2.0)).is_err());
    }

    #[test]
    fn gibbs_examples() {
        let hz = pauli(Pauli::Z);
        let hot = gibbs_state(&hz, 0.0).unwrap();
        assert!(hot.rho().approx_eq(&Operator2::diag(0.5, 0.5), TOL));

        let z = E + 1.0 / E;
        let cold = gibbs_state(&hz, 1.0).unwrap();
        assert!(cold.rho().approx_eq(&Operator2::diag(E / z, 1.0 / E / z), TOL));
        assert_abs_diff_eq!(cold.rho()[(0, 0)].re, 0.8808, epsilon = 5e-5);
        assert_abs_diff_eq!(partition_function(&hz, 1.0).unwrap(), z, epsilon = TOL);
        assert_abs_diff_eq!(z, 3.0862, epsilon = 5e-5);

        assert!(gibbs_state(&Operator2::from_rows([[ZERO, ONE], [ZERO, ZERO]]), 1.0).is_err());
        assert!(gibbs_state(&hz, -1.0).is_err());
    }

    #[test]
    fn ln_partition_function_is_stable_at_low_temperature() {
        let hz = pauli(Pauli::Z).scale_real(3.0);
        let lz = ln_partition_function(&hz, 400.0).unwrap();
        assert_abs_diff_eq!(lz, 1200.0, epsilon = 1e-9);
        let shifted = hz + Operator2::identity().scale_real(2.0);
        assert_abs_diff_eq!(
            ln_partition_function(&shifted, 0.5).unwrap(),
            -1.0 + (2.0 * 1.5f64.cosh()).ln(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn born_probability_examples() {
        let p_minus = Operator2::down_projector();
        assert_abs_diff_eq!(
            born_probability(&QubitState::down(), &p_minus).unwrap(),
            1.0,
            epsilon = TOL
        );
        let any = projector(BlochVector::new(0.36, 0.48, 0.8), Outcome::Plus).unwrap();
        assert_abs_diff_eq!(
            born_probability(&QubitState::maximally_mixed(), &any).unwrap(),
            0.5,
            epsilon = TOL
        );
        // (√6|↓⟩ − i√3|↑⟩)/3
        let psi = QubitState::from_amplitudes(c(6f64.sqrt() / 3.0, 0.0), c(0.0, -3f64.sqrt() / 3.0)).unwrap();
        assert_abs_diff_eq!(born_probability(&psi, &p_minus).unwrap(), 2.0 / 3.0, epsilon = TOL);
    }

    #[test]
    fn born_probability_rejects_gross_overshoot() {
        let bogus = Operator2::diag(2.0, 0.0);
        assert!(matches!(
            born_probability(&QubitState::down(), &bogus),
            Err(Error::ProbabilityOutOfRange(_))
        ));
    }

    #[test]
    fn post_measurement_examples() {
        let psi = QubitState::from_amplitudes(c(0.8, 0.0), c(0.0, 0.6)).unwrap();
        let p_minus = Operator2::down_projector();
        let after = post_measurement_state(&psi, &p_minus).unwrap();
        assert!(after.rho().approx_eq(&p_minus, TOL));
        let after = post_measurement_state(&QubitState::maximally_mixed(), &Operator2::up_projector()).unwrap();
        assert!(after.rho().approx_eq(&Operator2::up_projector(), TOL));
        assert_eq!(
            post_measurement_state(&QubitState::up(), &p_minus),
            Err(Error::OutcomeImpossible)
        );
    }

    #[test]
    fn state_validation() {
        assert!(QubitState::new(Operator2::diag(0.7, 0.7)).is_err());
        assert!(QubitState::new(Operator2::diag(1.2, -0.2)).is_err());
        let nonherm = Operator2::from_rows([[c(0.5, 0.0), c(0.1, 0.0)], [c(0.0, 0.0), c(0.5, 0.0)]]);
        assert!(QubitState::new(nonherm).is_err());
        assert!(QubitState::new(Operator2::diag(f64::NAN, 0.5)).is_err());
        let s = QubitState::from_amplitudes(c(0.6, 0.0), c(0.8, 0.0)).unwrap();
        let b = s.bloch();
        assert_abs_diff_eq!(b.norm(), 1.0, epsilon = TOL);
        assert!(s.complement().rho().approx_eq(&(Operator2::identity() - *s.rho()), TOL));
    }
}
