//! Truncated Fock-space linear algebra.
//!
//! A single bosonic mode is represented on the number basis `|0⟩..|N−1⟩`.
//! Operators and density matrices are dense complex matrices; at the sizes
//! this crate targets (N ≤ 256) that is both simpler and faster than any
//! structured representation.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum `|ρ − ρ†|` accepted for a density matrix.
pub const TOL_HERMITIAN: f64 = 1e-10;
/// Maximum `|Tr ρ − 1|` accepted for a density matrix.
pub const TOL_TRACE: f64 = 1e-10;
/// Smallest eigenvalue accepted for a density matrix. Dissipative
/// integration leaves tiny negative eigenvalues near the truncation corner.
pub const TOL_POSITIVITY: f64 = -1e-8;
/// Eigenvalues at or below this floor contribute nothing to the entropy.
pub const EIG_FLOOR: f64 = 1e-14;

/// Physical constants fixing the quadrature scales: `ħ`, mass and angular
/// frequency. Natural units (`ħ = m = ω = 1`) by default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemUnits {
    pub hbar: f64,
    pub mass: f64,
    pub omega: f64,
}

impl Default for SystemUnits {
    fn default() -> Self {
        SystemUnits { hbar: 1.0, mass: 1.0, omega: 1.0 }
    }
}

impl SystemUnits {
    pub fn new(hbar: f64, mass: f64, omega: f64) -> Result<Self> {
        let units = SystemUnits { hbar, mass, omega };
        units.validate()?;
        Ok(units)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("hbar", self.hbar), ("mass", self.mass), ("omega", self.omega)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    /// Oscillator length `√(ħ/mω)`.
    pub fn length_scale(&self) -> f64 {
        (self.hbar / (self.mass * self.omega)).sqrt()
    }

    /// Oscillator momentum `√(ħmω)`.
    pub fn momentum_scale(&self) -> f64 {
        (self.hbar * self.mass * self.omega).sqrt()
    }

    /// Coherent-state label of the phase-space point `(x, p)`:
    /// `α = √(mω/2ħ)(x + ip/(mω))`.
    ///
    /// Every phase-space convention in the crate goes through this function.
    pub fn alpha_of(&self, x: f64, p: f64) -> C64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        C64::new(s * x / self.length_scale(), s * p / self.momentum_scale())
    }

    /// Inverse of [`SystemUnits::alpha_of`].
    pub fn xp_of(&self, alpha: C64) -> (f64, f64) {
        let s = std::f64::consts::SQRT_2;
        (s * alpha.re * self.length_scale(), s * alpha.im * self.momentum_scale())
    }

    /// Jacobian `d²α / (dx dp) = 1/(2ħ)`.
    pub fn alpha_jacobian(&self) -> f64 {
        0.5 / self.hbar
    }
}

/// An operator on the truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    matrix: DMatrix<C64>,
}

impl FockOperator {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { left: matrix.nrows(), right: matrix.ncols() });
        }
        if matrix.nrows() < 2 {
            return Err(Error::InvalidDimension { dim: matrix.nrows() });
        }
        if matrix.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Numerical("operator has non-finite entries".into()));
        }
        Ok(FockOperator { matrix })
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(FockOperator { matrix: DMatrix::zeros(dim, dim) })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(FockOperator { matrix: DMatrix::identity(dim, dim) })
    }

    /// The number operator `a†a`.
    pub fn number(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(FockOperator {
            matrix: DMatrix::from_fn(dim, dim, |i, j| if i == j { C64::from(i as f64) } else { C64::new(0.0, 0.0) }),
        })
    }

    /// `ħω(a†a + ½)`.
    pub fn harmonic_hamiltonian(dim: usize, units: &SystemUnits) -> Result<Self> {
        units.validate()?;
        let n = Self::number(dim)?;
        let id = DMatrix::<C64>::identity(dim, dim);
        let hw = units.hbar * units.omega;
        Ok(FockOperator { matrix: (n.matrix + id * C64::from(0.5)) * C64::from(hw) })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        FockOperator { matrix: self.matrix.adjoint() }
    }

    pub fn scale(&self, s: C64) -> Self {
        FockOperator { matrix: &self.matrix * s }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_dim(self.dim(), other.dim())?;
        Ok(FockOperator { matrix: &self.matrix + &other.matrix })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        same_dim(self.dim(), other.dim())?;
        Ok(FockOperator { matrix: &self.matrix * &other.matrix })
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        same_dim(self.dim(), other.dim())?;
        Ok(FockOperator { matrix: &self.matrix * &other.matrix - &other.matrix * &self.matrix })
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut out = DMatrix::<C64>::identity(self.dim(), self.dim());
        for _ in 0..k {
            out = &out * &self.matrix;
        }
        FockOperator { matrix: out }
    }

    /// Largest entry of `|A − A†|`.
    pub fn hermiticity_error(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// Leading `k×k` block.
    pub fn truncate(&self, k: usize) -> Result<Self> {
        if k > self.dim() {
            return Err(Error::DimensionMismatch { left: k, right: self.dim() });
        }
        FockOperator::new(self.matrix.view((0, 0), (k, k)).into_owned())
    }

    /// Eigenvalues of a Hermitian operator, ascending.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        let err = self.hermiticity_error();
        if err > 1e-8 * (1.0 + max_abs(&self.matrix)) {
            return Err(Error::domain(format!("operator is not Hermitian (|A - A†| = {err:.3e})")));
        }
        let mut ev: Vec<f64> = hermitian_part(&self.matrix).symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }
}

/// A density matrix on the truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    rho: DMatrix<C64>,
}

impl FockState {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn from_density(rho: DMatrix<C64>) -> Result<Self> {
        let state = Self::from_density_unchecked(rho)?;
        state.check()?;
        Ok(state)
    }

    /// Only shape and finiteness are checked.
    pub(crate) fn from_density_unchecked(rho: DMatrix<C64>) -> Result<Self> {
        let op = FockOperator::new(rho)?;
        Ok(FockState { rho: op.into_matrix() })
    }

    pub fn check(&self) -> Result<()> {
        let herm = max_abs(&(&self.rho - self.rho.adjoint()));
        if herm > TOL_HERMITIAN {
            return Err(Error::InvalidState(format!("not Hermitian: max |rho - rho†| = {herm:.3e}")));
        }
        let tr = self.rho.trace();
        if (tr.re - 1.0).abs() > TOL_TRACE || tr.im.abs() > TOL_TRACE {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = self.raw_eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < TOL_POSITIVITY {
            return Err(Error::InvalidState(format!("smallest eigenvalue {min:.3e} below {TOL_POSITIVITY:e}")));
        }
        Ok(())
    }

    /// Pure state `|ψ⟩⟨ψ|`, normalizing `ψ`.
    pub fn pure(psi: &DVector<C64>) -> Result<Self> {
        check_dim(psi.len())?;
        let norm = psi.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidState("state vector has zero or non-finite norm".into()));
        }
        let psi = psi / C64::from(norm);
        Ok(FockState { rho: &psi * psi.adjoint() })
    }

    /// Number state `|n⟩⟨n|`.
    pub fn fock(dim: usize, n: usize) -> Result<Self> {
        check_dim(dim)?;
        if n >= dim {
            return Err(Error::Truncation(format!("|{n}⟩ does not fit in dimension {dim}")));
        }
        let mut psi = DVector::zeros(dim);
        psi[n] = C64::from(1.0);
        Self::pure(&psi)
    }

    pub fn vacuum(dim: usize) -> Result<Self> {
        Self::fock(dim, 0)
    }

    /// Truncated, renormalized coherent state `|α⟩`.
    pub fn coherent(dim: usize, alpha: C64) -> Result<Self> {
        Self::pure(&coherent_vector(dim, alpha)?)
    }

    /// Even cat state `(|α⟩ + |−α⟩)`, normalized.
    pub fn cat(dim: usize, alpha: C64) -> Result<Self> {
        let psi = coherent_vector(dim, alpha)? + coherent_vector(dim, -alpha)?;
        Self::pure(&psi)
    }

    /// Thermal state of the harmonic oscillator with mean occupation `nbar`.
    pub fn thermal(dim: usize, nbar: f64) -> Result<Self> {
        if !(nbar.is_finite() && nbar >= 0.0) {
            return Err(Error::domain(format!("mean occupation must be non-negative, got {nbar}")));
        }
        if nbar == 0.0 {
            return Self::vacuum(dim);
        }
        let units = SystemUnits::default();
        let beta = (1.0 + 1.0 / nbar).ln();
        gibbs_state(&FockOperator::harmonic_hamiltonian(dim, &units)?, beta)
    }

    /// `I/k` on the first `k` levels.
    pub fn maximally_mixed(dim: usize, k: usize) -> Result<Self> {
        check_dim(dim)?;
        if k == 0 || k > dim {
            return Err(Error::domain(format!("support size {k} outside 1..={dim}")));
        }
        let w = C64::from(1.0 / k as f64);
        Ok(FockState { rho: DMatrix::from_fn(dim, dim, |i, j| if i == j && i < k { w } else { C64::from(0.0) }) })
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn rho(&self) -> &DMatrix<C64> {
        &self.rho
    }

    pub fn into_rho(self) -> DMatrix<C64> {
        self.rho
    }

    /// `Tr(ρ O)`.
    pub fn expectation(&self, op: &FockOperator) -> Result<C64> {
        same_dim(self.dim(), op.dim())?;
        Ok(trace_of_product(&self.rho, op.matrix()))
    }

    /// `⟨a†a⟩`.
    pub fn mean_occupation(&self) -> f64 {
        (0..self.dim()).map(|n| n as f64 * self.rho[(n, n)].re).sum()
    }

    /// Population held in the top `k` basis states.
    pub fn corner_population(&self, k: usize) -> f64 {
        let d = self.dim();
        (d.saturating_sub(k)..d).map(|n| self.rho[(n, n)].re).sum()
    }

    pub fn purity(&self) -> f64 {
        trace_of_product(&self.rho, &self.rho).re
    }

    /// `U ρ U†`.
    pub fn conjugate_by(&self, u: &FockOperator) -> Result<Self> {
        same_dim(self.dim(), u.dim())?;
        Ok(FockState { rho: u.matrix() * &self.rho * u.matrix().adjoint() })
    }

    /// Embed into a larger truncation, padding with zeros.
    pub fn embed(&self, dim: usize) -> Result<Self> {
        if dim < self.dim() {
            return Err(Error::DimensionMismatch { left: dim, right: self.dim() });
        }
        let mut rho = DMatrix::zeros(dim, dim);
        rho.view_mut((0, 0), (self.dim(), self.dim())).copy_from(&self.rho);
        Ok(FockState { rho })
    }

    /// Eigenvalues with the truncation slack clipped to zero.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.raw_eigenvalues().into_iter().map(|v| v.max(0.0)).collect()
    }

    fn raw_eigenvalues(&self) -> Vec<f64> {
        hermitian_part(&self.rho).symmetric_eigenvalues().iter().copied().collect()
    }
}

/// Annihilation operator: `a[n−1, n] = √n`.
pub fn build_ladder(dim: usize) -> Result<FockOperator> {
    check_dim(dim)?;
    let mut a = DMatrix::<C64>::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = C64::from((n as f64).sqrt());
    }
    Ok(FockOperator { matrix: a })
}

/// Position and momentum quadratures built from the annihilation operator.
pub fn quadratures(a: &FockOperator, units: &SystemUnits) -> Result<(FockOperator, FockOperator)> {
    units.validate()?;
    let ad = a.adjoint();
    let x_scale = (units.hbar / (2.0 * units.mass * units.omega)).sqrt();
    let p_scale = (units.hbar * units.mass * units.omega / 2.0).sqrt();
    let x = (ad.matrix() + a.matrix()) * C64::from(x_scale);
    let p = (ad.matrix() - a.matrix()) * C64::new(0.0, p_scale);
    Ok((FockOperator { matrix: x }, FockOperator { matrix: p }))
}

/// Position quadrature computed on a padded basis and then truncated, so
/// that polynomials in `X` are exact on the leading block.
pub fn padded_position_power(dim: usize, units: &SystemUnits, power: u32) -> Result<FockOperator> {
    let big = dim + power as usize + 1;
    let (x, _) = quadratures(&build_ladder(big)?, units)?;
    x.powi(power).truncate(dim)
}

/// Von Neumann entropy `−Tr ρ ln ρ` in nats.
pub fn von_neumann_entropy(s: &FockState) -> Result<f64> {
    let ev = s.raw_eigenvalues();
    if ev.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("eigendecomposition returned non-finite eigenvalues".into()));
    }
    if let Some(min) = ev.iter().copied().reduce(f64::min) {
        if min < TOL_POSITIVITY {
            return Err(Error::InvalidState(format!("smallest eigenvalue {min:.3e} below {TOL_POSITIVITY:e}")));
        }
    }
    Ok(shannon_of_spectrum(&ev))
}

/// `−Σ p ln p` over entries above the eigenvalue floor.
pub fn shannon_of_spectrum(probs: &[f64]) -> f64 {
    let s: f64 = probs.iter().filter(|&&p| p > EIG_FLOOR).map(|&p| -p * p.ln()).sum();
    s.max(0.0)
}

/// Trace distance `½‖r − s‖₁`.
pub fn trace_distance(r: &FockState, s: &FockState) -> Result<f64> {
    same_dim(r.dim(), s.dim())?;
    let diff = hermitian_part(&(r.rho() - s.rho()));
    let d: f64 = diff.symmetric_eigenvalues().iter().map(|v| v.abs()).sum::<f64>() * 0.5;
    Ok(d.clamp(0.0, 1.0))
}

/// Gibbs state `e^{−βH}/Tr e^{−βH}`.
///
/// The spectrum is shifted by its minimum before exponentiating, so large
/// `β` saturates to the ground state instead of overflowing.
pub fn gibbs_state(h: &FockOperator, beta: f64) -> Result<FockState> {
    if !(beta > 0.0) || beta.is_nan() {
        return Err(Error::domain(format!("inverse temperature must be positive, got {beta}")));
    }
    if !h.is_hermitian(1e-10 * (1.0 + max_abs(h.matrix()))) {
        return Err(Error::domain("Gibbs state needs a Hermitian Hamiltonian"));
    }
    let eig = SymmetricEigen::new(hermitian_part(h.matrix()));
    let e_min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&e| if beta.is_infinite() { if e == e_min { 1.0 } else { 0.0 } } else { (-beta * (e - e_min)).exp() })
        .collect();
    let z: f64 = weights.iter().sum();
    if !(z.is_finite() && z > 0.0) {
        return Err(Error::Numerical(format!("partition function not finite ({z})")));
    }
    let d = h.dim();
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (k, w) in weights.iter().enumerate() {
        scaled.column_mut(k).scale_mut(w / z);
    }
    let rho = hermitian_part(&(scaled * v.adjoint()));
    let state = FockState { rho };
    debug_assert_eq!(state.dim(), d);
    state.check()?;
    Ok(state)
}

/// Truncated coherent-state amplitudes `e^{−|α|²/2} αⁿ/√n!`, renormalized.
pub fn coherent_vector(dim: usize, alpha: C64) -> Result<DVector<C64>> {
    check_dim(dim)?;
    let mut v = DVector::zeros(dim);
    v[0] = C64::from((-0.5 * alpha.norm_sqr()).exp());
    for n in 1..dim {
        v[n] = v[n - 1] * alpha / (n as f64).sqrt();
    }
    let norm = v.norm();
    if !(norm > 0.0) {
        return Err(Error::Truncation(format!("|α|² = {} underflows in dimension {dim}", alpha.norm_sqr())));
    }
    Ok(v / C64::from(norm))
}

/// `Tr(A B)` without forming the product.
pub fn trace_of_product(a: &DMatrix<C64>, b: &DMatrix<C64>) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub(crate) fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::from(0.5)
}

pub(crate) fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        Err(Error::InvalidDimension { dim })
    } else {
        Ok(())
    }
}

fn same_dim(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { left, right })
    }
}
