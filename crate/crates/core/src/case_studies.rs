//! Traditional classical limits recast as checks: the small-β expansion of
//! black-body radiation, the vanishing first-order quantum correction of
//! thermal Wigner functions, and entropic aliasing of a two-slit qubit.

use std::f64::consts::LN_2;

use nalgebra::{Matrix2, Vector3};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{build_ladder, gibbs_state, padded_position_power, quadratures, FockOperator, SystemUnits};
use crate::grid::{self, PhaseGrid};
use crate::quasiprob::{check_resolution, wigner_values};

/// Largest Gibbs population allowed in the top quarter of the Fock basis,
/// where the truncated Hamiltonian is unreliable.
pub const THERMAL_TAIL_TOL: f64 = 1e-4;

/// Above this `hβν` the Planck denominator overflows; the radiance is taken as 0.
pub const PLANCK_SATURATION: f64 = 700.0;

/// Frequency, inverse temperature and constants of the radiation laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadianceParams {
    pub nu: f64,
    pub beta: f64,
    pub h: f64,
    pub c: f64,
    pub k_b: f64,
}

impl RadianceParams {
    /// Reduced units `h = c = k_B = 1`.
    pub fn reduced(nu: f64, beta: f64) -> Result<Self> {
        Self::new(nu, beta, 1.0, 1.0, 1.0)
    }

    pub fn new(nu: f64, beta: f64, h: f64, c: f64, k_b: f64) -> Result<Self> {
        let p = RadianceParams { nu, beta, h, c, k_b };
        for (name, v) in [("nu", nu), ("beta", beta), ("h", h), ("c", c), ("k_b", k_b)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(p)
    }

    /// `β = 1/(k_B T)`.
    pub fn from_temperature(nu: f64, temperature: f64, h: f64, c: f64, k_b: f64) -> Result<Self> {
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::domain(format!("temperature must be positive, got {temperature}")));
        }
        Self::new(nu, 1.0 / (k_b * temperature), h, c, k_b)
    }

    /// `x = hβν`.
    pub fn x(&self) -> f64 {
        self.h * self.beta * self.nu
    }

    fn prefactor(&self) -> f64 {
        2.0 * self.h * self.nu.powi(3) / (self.c * self.c)
    }
}

/// `(2hν³/c²)/(e^{hβν} − 1)`.
pub fn planck(p: &RadianceParams) -> f64 {
    let x = p.x();
    if x > PLANCK_SATURATION {
        return 0.0;
    }
    p.prefactor() / x.exp_m1()
}

/// `2ν²/(c²β)`.
pub fn rayleigh_jeans(p: &RadianceParams) -> f64 {
    2.0 * p.nu * p.nu / (p.c * p.c * p.beta)
}

/// Small-β expansion of Planck's law: order 1 is Rayleigh–Jeans, order 2
/// adds `−hν³/c²` from `1/(eˣ−1) = 1/x − ½ + …`.
pub fn planck_beta_series(p: &RadianceParams, order: u32) -> Result<f64> {
    match order {
        1 => Ok(rayleigh_jeans(p)),
        2 => Ok(rayleigh_jeans(p) - 0.5 * p.prefactor()),
        _ => Err(Error::domain(format!("series order must be 1 or 2, got {order}"))),
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::domain("slope fit needs at least two paired points"));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::domain("slope fit needs positive finite values"));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("slope fit needs distinct abscissae"));
    }
    Ok(sxy / sxx)
}

/// Measured order of the relative error `|series − Planck|/Planck` over `betas`.
pub fn series_convergence_order(p: &RadianceParams, order: u32, betas: &[f64]) -> Result<f64> {
    let errs = betas
        .iter()
        .map(|&beta| {
            let q = RadianceParams { beta, ..*p };
            let exact = planck(&q);
            Ok((planck_beta_series(&q, order)? - exact).abs() / exact)
        })
        .collect::<Result<Vec<f64>>>()?;
    log_log_slope(betas, &errs)
}

/// `V(x) = Σ coeffs[k] xᵏ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialPotential {
    pub coeffs: Vec<f64>,
}

impl PolynomialPotential {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("potential coefficients must be finite"));
        }
        let degree = coeffs.iter().rposition(|c| *c != 0.0).unwrap_or(0);
        if degree % 2 == 1 || coeffs.get(degree).is_some_and(|c| *c < 0.0) {
            return Err(Error::domain("potential must be bounded below: even degree with positive leading coefficient"));
        }
        Ok(PolynomialPotential { coeffs })
    }

    /// `½ m ω² x²` in the given units.
    pub fn harmonic(units: &SystemUnits) -> Self {
        PolynomialPotential { coeffs: vec![0.0, 0.0, 0.5 * units.mass * units.omega * units.omega] }
    }

    /// Harmonic well plus `g x⁴`.
    pub fn quartic(units: &SystemUnits, g: f64) -> Result<Self> {
        let mut v = Self::harmonic(units);
        v.coeffs.extend([0.0, g]);
        Self::new(v.coeffs)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|c| *c != 0.0).unwrap_or(0)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    /// `k`-th derivative.
    pub fn derivative(&self, k: usize) -> PolynomialPotential {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(k)
            .map(|(j, c)| c * ((j - k + 1)..=j).map(|f| f as f64).product::<f64>())
            .collect();
        PolynomialPotential { coeffs }
    }

    /// `V(X)` on the truncated space, exact on the leading block.
    pub fn operator(&self, dim: usize, units: &SystemUnits) -> Result<FockOperator> {
        let mut v = FockOperator::zeros(dim)?;
        for (k, c) in self.coeffs.iter().enumerate() {
            if *c == 0.0 {
                continue;
            }
            let term = if k == 0 { FockOperator::identity(dim)? } else { padded_position_power(dim, units, k as u32)? };
            v = v.add(&term.scale(C64::from(*c)))?;
        }
        Ok(v)
    }
}

/// `P²/2m + V(X)`, with both terms built on a padded basis.
pub fn hamiltonian(v: &PolynomialPotential, dim: usize, units: &SystemUnits) -> Result<FockOperator> {
    let big = dim + 3;
    let (_, p) = quadratures(&build_ladder(big)?, units)?;
    let kinetic = p.powi(2).truncate(dim)?.scale(C64::from(0.5 / units.mass));
    kinetic.add(&v.operator(dim, units)?)
}

/// Classical energy `p²/2m + V(x)`.
pub fn classical_energy(v: &PolynomialPotential, units: &SystemUnits, x: f64, p: f64) -> f64 {
    0.5 * p * p / units.mass + v.value(x)
}

/// Grid whose box holds `e^{−βε}` down to `e^{−30}` of its peak.
pub fn thermal_grid(v: &PolynomialPotential, units: &SystemUnits, beta: f64, n: usize) -> Result<PhaseGrid> {
    let cutoff = 30.0 / beta;
    let v_min = (0..=2000).map(|i| v.value(-20.0 + 0.02 * i as f64)).fold(f64::INFINITY, f64::min);
    let mut x = units.length_scale();
    while v.value(x) - v_min < cutoff || v.value(-x) - v_min < cutoff {
        x *= 1.05;
        if x > 1e6 {
            return Err(Error::domain("potential does not confine the thermal state"));
        }
    }
    let p = (2.0 * units.mass * cutoff).sqrt();
    PhaseGrid::symmetric(x, p, n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalCorrectionReport {
    pub potential: PolynomialPotential,
    pub betas: Vec<f64>,
    /// Sup-norm distance between the normalized quantum and classical densities.
    pub distances: Vec<f64>,
    /// Peak of the classical density at each β.
    pub classical_peaks: Vec<f64>,
    /// `D ∝ β^s` fitted on the three smallest β.
    pub slope: f64,
    /// Richardson estimate of `lim D(β)/β` relative to `peak/β` at the smallest β.
    pub first_order_ratio: f64,
}

/// Quantum–classical Gibbs distance `D(β)` for each β, on grids of `n²`
/// points sized by [`thermal_grid`].
pub fn thermal_wigner_correction(
    v: &PolynomialPotential,
    betas: &[f64],
    dim: usize,
    units: &SystemUnits,
    n: usize,
) -> Result<ThermalCorrectionReport> {
    if betas.len() < 3 {
        return Err(Error::domain("need at least three β values for the slope fit"));
    }
    if betas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::domain("β list must be strictly decreasing"));
    }
    let h = hamiltonian(v, dim, units)?;
    let rows = betas
        .par_iter()
        .map(|&beta| {
            let g = thermal_grid(v, units, beta, n)?;
            let rho = gibbs_state(&h, beta)?;
            let tail = rho.corner_population(dim / 4);
            if tail > THERMAL_TAIL_TOL {
                return Err(Error::Truncation(format!(
                    "Gibbs state at β = {beta} puts {tail:.2e} of its weight in the top {} of {dim} levels; raise dim or β",
                    dim / 4
                )));
            }
            // the βV ≥ 30 box already bounds the tails; only resolution and
            // normalization are checked here
            check_resolution(&rho, &g, units)?;
            let w = wigner_values(&rho, &g, units);
            let norm = g.integrate(&w);
            if (norm - 1.0).abs() > 1e-6 {
                return Err(Error::Numerical(format!("thermal Wigner function at β = {beta} integrates to {norm:.8}")));
            }
            let wq = &w / norm;
            let cl = g.sample(|x, p| (-beta * classical_energy(v, units, x, p)).exp());
            let cl = &cl / g.integrate(&cl);
            Ok((grid::sup_norm_diff(&wq, &cl), cl.max()))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let distances: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let classical_peaks: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let k = betas.len();
    let slope = log_log_slope(&betas[k - 3..], &distances[k - 3..])?;
    // D(β)/β = c₁ + c₂β + c₃β² + …: Richardson (Lagrange) extrapolation of
    // the three smallest β to β = 0
    let (bs, rs) = (&betas[k - 3..], (k - 3..k).map(|i| distances[i] / betas[i]).collect::<Vec<_>>());
    let c1: f64 = (0..3)
        .map(|i| {
            let w: f64 = (0..3).filter(|&j| j != i).map(|j| bs[j] / (bs[j] - bs[i])).product();
            w * rs[i]
        })
        .sum();
    let first_order_ratio = c1.abs() / (classical_peaks[k - 1] / bs[2]);
    Ok(ThermalCorrectionReport { potential: v.clone(), betas: betas.to_vec(), distances, classical_peaks, slope, first_order_ratio })
}

/// A two-level density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Qubit {
    rho: Matrix2<C64>,
}

const QUBIT_TOL: f64 = 1e-12;

impl Qubit {
    pub fn new(rho: Matrix2<C64>) -> Result<Self> {
        let q = Qubit { rho };
        let herm = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > QUBIT_TOL {
            return Err(Error::InvalidState(format!("qubit density not Hermitian ({herm:.2e})")));
        }
        let tr = rho.trace();
        if (tr - C64::from(1.0)).norm() > QUBIT_TOL {
            return Err(Error::InvalidState(format!("qubit trace {tr} differs from 1")));
        }
        let r = q.bloch().norm();
        if r > 1.0 + QUBIT_TOL {
            return Err(Error::InvalidState(format!("Bloch vector length {r} exceeds 1")));
        }
        Ok(q)
    }

    /// `½(I + r·σ)`.
    pub fn from_bloch(r: Vector3<f64>) -> Result<Self> {
        let half = C64::from(0.5);
        let rho = Matrix2::new(
            half * (1.0 + r.z),
            C64::new(0.5 * r.x, -0.5 * r.y),
            C64::new(0.5 * r.x, 0.5 * r.y),
            half * (1.0 - r.z),
        );
        Self::new(rho)
    }

    pub fn pure(psi: [C64; 2]) -> Result<Self> {
        let norm = (psi[0].norm_sqr() + psi[1].norm_sqr()).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidState("qubit state vector has zero norm".into()));
        }
        let (a, b) = (psi[0] / norm, psi[1] / norm);
        Self::new(Matrix2::new(a * a.conj(), a * b.conj(), b * a.conj(), b * b.conj()))
    }

    pub fn maximally_mixed() -> Self {
        Qubit { rho: Matrix2::identity() * C64::from(0.5) }
    }

    pub fn rho(&self) -> &Matrix2<C64> {
        &self.rho
    }

    pub fn bloch(&self) -> Vector3<f64> {
        let off = self.rho[(1, 0)];
        Vector3::new(2.0 * off.re, 2.0 * off.im, (self.rho[(0, 0)] - self.rho[(1, 1)]).re)
    }

    /// Eigenvalues are `(1 ± |r|)/2`.
    pub fn entropy(&self) -> f64 {
        let r = self.bloch().norm().min(1.0);
        [0.5 * (1.0 + r), 0.5 * (1.0 - r)].iter().filter(|p| **p > 0.0).map(|p| -p * p.ln()).sum()
    }

    /// `½‖ρ − σ‖₁ = ½|r − s|`.
    pub fn trace_distance(&self, other: &Qubit) -> f64 {
        0.5 * (self.bloch() - other.bloch()).norm()
    }

    pub fn mix(&self, other: &Qubit, w: f64) -> Result<Qubit> {
        Qubit::new(self.rho * C64::from(1.0 - w) + other.rho * C64::from(w))
    }

    fn max_entry_diff(&self, other: &Qubit) -> f64 {
        (self.rho - other.rho).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Slit basis `|L⟩`, `|R⟩` and the phase family `(|L⟩ + e^{−iθ}|R⟩)/√2`.
pub mod slits {
    use super::*;

    pub fn left() -> Qubit {
        Qubit::pure([C64::from(1.0), C64::from(0.0)]).expect("basis state")
    }

    pub fn right() -> Qubit {
        Qubit::pure([C64::from(0.0), C64::from(1.0)]).expect("basis state")
    }

    pub fn phase(theta: f64) -> Qubit {
        Qubit::pure([C64::from(1.0), C64::from_polar(1.0, -theta)]).expect("normalizable")
    }

    pub fn plus() -> Qubit {
        phase(0.0)
    }

    pub fn minus() -> Qubit {
        phase(std::f64::consts::PI)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AliasingReport {
    /// Max entry of `½|+⟩⟨+| + ½|−⟩⟨−| − (½|L⟩⟨L| + ½|R⟩⟨R|)`.
    pub mixture_diff: f64,
    /// Max entry of the uniform phase average minus `I/2`.
    pub phase_average_diff: f64,
    pub pure_entropy: f64,
    pub mixed_entropy: f64,
}

/// Number of equally spaced phases in the θ-average; any count ≥ 2 averages
/// `e^{iθ}` to zero exactly.
const PHASE_SAMPLES: usize = 64;

/// Two different preparations that are the same mixed state.
pub fn two_slit_aliasing() -> AliasingReport {
    let which_slit = slits::left().mix(&slits::right(), 0.5).expect("mixture");
    let which_phase = slits::plus().mix(&slits::minus(), 0.5).expect("mixture");
    let mut avg = Matrix2::zeros();
    for k in 0..PHASE_SAMPLES {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / PHASE_SAMPLES as f64;
        avg += slits::phase(theta).rho;
    }
    let avg = Qubit { rho: avg / C64::from(PHASE_SAMPLES as f64) };
    let mm = Qubit::maximally_mixed();
    AliasingReport {
        mixture_diff: which_phase.max_entry_diff(&which_slit),
        phase_average_diff: avg.max_entry_diff(&mm),
        pure_entropy: slits::plus().entropy(),
        mixed_entropy: which_slit.entropy(),
    }
}

/// `ρ → (1 − s)ρ + s·I/2`.
pub fn depolarize(q: &Qubit, strength: f64) -> Result<Qubit> {
    if !(0.0..=1.0).contains(&strength) {
        return Err(Error::domain(format!("depolarizing strength must lie in [0, 1], got {strength}")));
    }
    q.mix(&Qubit::maximally_mixed(), strength)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub strength: f64,
    /// `max |D(ρ'₁, ρ'₂) − (1 − s)·D(ρ₁, ρ₂)|` over the pairs.
    pub max_factor_error: f64,
    /// Smallest entropy gain over inputs that are not maximally mixed.
    pub min_entropy_gain: f64,
    /// Distance of the image of `I/2` from `I/2`.
    pub fixed_point_error: f64,
}

pub fn contraction_check(pairs: &[(Qubit, Qubit)], strength: f64) -> Result<ContractionReport> {
    let mut max_factor_error = 0.0f64;
    let mut min_entropy_gain = f64::INFINITY;
    for (a, b) in pairs {
        let (da, db) = (depolarize(a, strength)?, depolarize(b, strength)?);
        let err = (da.trace_distance(&db) - (1.0 - strength) * a.trace_distance(b)).abs();
        max_factor_error = max_factor_error.max(err);
        for (q, dq) in [(a, da), (b, db)] {
            if q.bloch().norm() > QUBIT_TOL {
                min_entropy_gain = min_entropy_gain.min(dq.entropy() - q.entropy());
            }
        }
    }
    let mm = Qubit::maximally_mixed();
    Ok(ContractionReport {
        strength,
        max_factor_error,
        min_entropy_gain,
        fixed_point_error: depolarize(&mm, strength)?.max_entry_diff(&mm),
    })
}

/// Deterministic, roughly uniform directions on the sphere.
pub fn fibonacci_directions(n: usize) -> Vec<Vector3<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            Vector3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellReport {
    /// Largest entropy spread within one shell.
    pub entropy_spread: f64,
    /// Largest `| |r'| − (1 − s)|r| |` after depolarizing.
    pub radius_error: f64,
    /// Largest entropy spread within an image shell.
    pub image_entropy_spread: f64,
}

/// Equal-radius Bloch shells have equal entropy and depolarizing maps each
/// shell onto the shell of radius `(1 − s)r`.
pub fn bloch_shell_check(radii: &[f64], strength: f64, directions: usize) -> Result<ShellReport> {
    let dirs = fibonacci_directions(directions);
    let mut rep = ShellReport { entropy_spread: 0.0, radius_error: 0.0, image_entropy_spread: 0.0 };
    let spread = |v: &[f64]| v.iter().fold(f64::NEG_INFINITY, |a, b| a.max(*b)) - v.iter().fold(f64::INFINITY, |a, b| a.min(*b));
    for &r in radii {
        let shell = dirs.iter().map(|d| Qubit::from_bloch(d * r)).collect::<Result<Vec<_>>>()?;
        let image = shell.iter().map(|q| depolarize(q, strength)).collect::<Result<Vec<_>>>()?;
        let s_in: Vec<f64> = shell.iter().map(Qubit::entropy).collect();
        let s_out: Vec<f64> = image.iter().map(Qubit::entropy).collect();
        rep.entropy_spread = rep.entropy_spread.max(spread(&s_in));
        rep.image_entropy_spread = rep.image_entropy_spread.max(spread(&s_out));
        for q in &image {
            rep.radius_error = rep.radius_error.max((q.bloch().norm() - (1.0 - strength) * r).abs());
        }
    }
    Ok(rep)
}

/// `ln 2`, the entropy of the maximally mixed qubit.
pub const QUBIT_MAX_ENTROPY: f64 = LN_2;
