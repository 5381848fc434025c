//! The quantum pure stretch `T_Q`: a Lindblad amplifier with jump operator
//! `a†` run for `γt = ln λ`, and the closed forms it induces on the Husimi
//! and Wigner distributions.

use std::io::Write;

use log::warn;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;

use crate::fock::{build_ladder, quadratures, von_neumann_entropy, FockOperator, FockState, SystemUnits};
use crate::grid::{self, PhaseGrid};
use crate::quasiprob::{self, check_margin, xp_sigmas, QuasiDistribution, QuasiKind, TOL_NORM};

/// Largest accepted `γ·dt` for the explicit integrator.
pub const MAX_RATE_STEP: f64 = 0.1;
/// Default `γ·dt`.
pub const DEFAULT_RATE_STEP: f64 = 0.01;
/// The a priori occupation estimate must stay below `dim / TRUNCATION_DIVISOR`.
pub const TRUNCATION_DIVISOR: f64 = 4.0;
/// Occupation bound for [`squeeze_unitary`], as a fraction of `dim`.
pub const SQUEEZE_DIVISOR: f64 = 8.0;
/// Weight the squeezed state may lose above the truncation before refusal.
pub const SQUEEZE_LOSS_TOL: f64 = 1e-8;

/// Generator `dρ/dt = −(i/ħ)[H, ρ] + Σ γᵢ (Lᵢ ρ Lᵢ† − ½{Lᵢ†Lᵢ, ρ})`.
#[derive(Debug, Clone)]
pub struct LindbladSpec {
    pub hamiltonian: FockOperator,
    pub jumps: Vec<(f64, FockOperator)>,
    pub hbar: f64,
}

impl LindbladSpec {
    pub fn new(hamiltonian: FockOperator, jumps: Vec<(f64, FockOperator)>, hbar: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::domain(format!("ħ must be positive, got {hbar}")));
        }
        let dim = hamiltonian.dim();
        for (rate, op) in &jumps {
            if !(*rate > 0.0 && rate.is_finite()) {
                return Err(Error::domain(format!("jump rates must be positive, got {rate}")));
            }
            if op.dim() != dim {
                return Err(Error::DimensionMismatch { left: dim, right: op.dim() });
            }
        }
        Ok(LindbladSpec { hamiltonian, jumps, hbar })
    }

    /// Quantum-limited amplifier `L = a†`, `H = 0`: realizes `T_Q` with `λ = e^{γt}`.
    pub fn amplifier(dim: usize, gamma: f64) -> Result<Self> {
        let a = build_ladder(dim)?;
        Self::new(FockOperator::zeros(dim)?, vec![(gamma, a.adjoint())], 1.0)
    }

    /// Pure loss `L = a`, the shrinking counterpart.
    pub fn attenuator(dim: usize, gamma: f64) -> Result<Self> {
        Self::new(FockOperator::zeros(dim)?, vec![(gamma, build_ladder(dim)?)], 1.0)
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn max_rate(&self) -> f64 {
        self.jumps.iter().map(|(g, _)| *g).fold(0.0, f64::max)
    }

    /// `Σ γᵢ (Lᵢ†Lᵢ − LᵢLᵢ†)`.
    pub fn entropy_generator(&self) -> DMatrix<C64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for (g, l) in &self.jumps {
            let l = l.matrix();
            m += (l.adjoint() * l - l * l.adjoint()) * C64::from(*g);
        }
        m
    }

    /// Exponential growth rate of `⟨a†a⟩ + 1` implied by the jumps: the top
    /// of the spectrum of the entropy generator away from the truncation
    /// corner (1 per unit rate for `a†`, none for `a`).
    pub fn growth_rate(&self) -> f64 {
        let d = self.dim();
        if d < 2 {
            return 0.0;
        }
        let block = self.entropy_generator().view((0, 0), (d - 1, d - 1)).into_owned();
        let top = crate::fock::hermitian_part(&block).symmetric_eigenvalues().max();
        top.max(0.0)
    }

    fn effective(&self) -> DMatrix<C64> {
        let d = self.dim();
        let mut k = self.hamiltonian.matrix() * C64::new(0.0, -1.0 / self.hbar);
        for (g, l) in &self.jumps {
            let l = l.matrix();
            k -= l.adjoint() * l * C64::from(0.5 * g);
        }
        debug_assert_eq!(k.nrows(), d);
        k
    }
}

/// Precomputed right-hand side of the master equation.
struct Generator {
    k: DMatrix<C64>,
    k_adj: DMatrix<C64>,
    jumps: Vec<(f64, DMatrix<C64>, DMatrix<C64>)>,
}

impl Generator {
    fn new(spec: &LindbladSpec) -> Self {
        let k = spec.effective();
        let k_adj = k.adjoint();
        let jumps = spec.jumps.iter().map(|(g, l)| (*g, l.matrix().clone(), l.matrix().adjoint())).collect();
        Generator { k, k_adj, jumps }
    }

    fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = &self.k * rho + rho * &self.k_adj;
        for (g, l, l_adj) in &self.jumps {
            out += (l * rho * l_adj) * C64::from(*g);
        }
        out
    }
}

/// `λ(n̄₀ + 1)` style estimate of the final occupation; refuse when it
/// crowds the truncation.
fn truncation_gate(s: &FockState, spec: &LindbladSpec, t: f64) -> Result<()> {
    let growth = spec.growth_rate();
    if growth == 0.0 {
        return Ok(());
    }
    let estimate = (growth * t).exp() * (s.mean_occupation() + 1.0);
    let bound = spec.dim() as f64 / TRUNCATION_DIVISOR;
    // relative slack so that an exact λ(n̄₀+1) = dim/4 is not refused by rounding
    if estimate > bound * (1.0 + 1e-9) {
        return Err(Error::Truncation(format!(
            "estimated final occupation λ(n̄₀+1) = {estimate:.2} exceeds dim/{TRUNCATION_DIVISOR} = {bound:.2}; \
             raise dim to at least {}",
            (estimate * TRUNCATION_DIVISOR).ceil()
        )));
    }
    Ok(())
}

/// Integrate the master equation with classical RK4 and step `≤ dt`.
pub fn lindblad_evolve(s: &FockState, spec: &LindbladSpec, t: f64, dt: f64) -> Result<FockState> {
    lindblad_evolve_observed(s, spec, t, dt, |_, _| Ok(()))
}

/// As [`lindblad_evolve`], calling `observe(time, state)` after every step.
pub fn lindblad_evolve_observed<F>(s: &FockState, spec: &LindbladSpec, t: f64, dt: f64, mut observe: F) -> Result<FockState>
where
    F: FnMut(f64, &FockState) -> Result<()>,
{
    if s.dim() != spec.dim() {
        return Err(Error::DimensionMismatch { left: s.dim(), right: spec.dim() });
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("evolution time must be non-negative, got {t}")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::domain(format!("time step must be positive, got {dt}")));
    }
    let rate = spec.max_rate();
    if rate * dt > MAX_RATE_STEP {
        return Err(Error::Stability { dt, max_dt: MAX_RATE_STEP / rate });
    }
    truncation_gate(s, spec, t)?;
    if t == 0.0 {
        return Ok(s.clone());
    }

    let gen = Generator::new(spec);
    let steps = (t / dt - 1e-9).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let half = C64::from(0.5 * h);
    let mut rho = s.rho().clone();
    for step in 1..=steps {
        let k1 = gen.apply(&rho);
        let k2 = gen.apply(&(&rho + &k1 * half));
        let k3 = gen.apply(&(&rho + &k2 * half));
        let k4 = gen.apply(&(&rho + &k3 * C64::from(h)));
        rho += (k1 + (k2 + k3) * C64::from(2.0) + k4) * C64::from(h / 6.0);
        // keep exact Hermiticity; RK4 preserves it only up to rounding
        rho = crate::fock::hermitian_part(&rho);
        let state = FockState::from_density_unchecked(rho.clone())?;
        observe(step as f64 * h, &state)?;
    }
    let out = FockState::from_density(rho)?;
    let corner = out.corner_population(1);
    if corner > 1e-8 {
        warn!("evolved state holds {corner:.2e} in the top Fock level; truncation error may be visible");
    }
    Ok(out)
}

/// Run the amplifier to stretch factor `lambda` with the default step.
pub fn amplify(s: &FockState, lambda: f64) -> Result<FockState> {
    if !(lambda >= 1.0 && lambda.is_finite()) {
        return Err(Error::domain(format!("stretch factor must be ≥ 1, got {lambda}")));
    }
    let spec = LindbladSpec::amplifier(s.dim(), 1.0)?;
    lindblad_evolve(s, &spec, lambda.ln(), DEFAULT_RATE_STEP)
}

/// Whether `Σ γᵢ (Lᵢ†Lᵢ − LᵢLᵢ†) ⪰ 0` away from the truncation corner.
pub fn entropy_criterion(spec: &LindbladSpec) -> bool {
    let d = spec.dim();
    if d < 2 {
        return true;
    }
    let m = spec.entropy_generator();
    let block = crate::fock::hermitian_part(&m.view((0, 0), (d - 1, d - 1)).into_owned());
    let scale = crate::fock::max_abs(&block).max(1.0);
    block.symmetric_eigenvalues().min() >= -1e-12 * scale
}

/// Values of `f(x/√λ, p/√λ)/λ` on `target`, with `f` given on `source` by its
/// band-limited interpolant and taken as zero outside the source box.
fn scaled_onto(source: &QuasiDistribution, lambda: f64, target: &PhaseGrid) -> Result<DMatrix<f64>> {
    let sg = &source.grid;
    let edge = grid::edge_ratio(&source.values);
    if edge > quasiprob::MARGIN_TOL {
        return Err(Error::grid(format!(
            "source distribution is {edge:.2e} of its peak at the grid edge; it must vanish there to be stretched"
        )));
    }
    let r = lambda.sqrt();
    let (x_hi, p_hi) = (sg.x(sg.nx - 1), sg.p(sg.np - 1));
    let xs: Vec<f64> = target.xs().iter().map(|x| x / r).collect();
    let ps: Vec<f64> = target.ps().iter().map(|p| p / r).collect();
    let mut values = grid::resample(sg, &source.values, &xs, &ps) / lambda;
    for (i, x) in xs.iter().enumerate() {
        for (j, p) in ps.iter().enumerate() {
            if *x < sg.x_min || *x > x_hi || *p < sg.p_min || *p > p_hi {
                values[(i, j)] = 0.0;
            }
        }
    }
    Ok(values)
}

fn check_stretch_factor(lambda: f64, strict: bool) -> Result<()> {
    let ok = if strict { lambda > 1.0 } else { lambda >= 1.0 };
    if !(ok && lambda.is_finite()) {
        let bound = if strict { "> 1" } else { "≥ 1" };
        return Err(Error::domain(format!("stretch factor must be {bound}, got {lambda}")));
    }
    Ok(())
}

fn support_error(kind: QuasiKind, lambda: f64, norm: f64, target: &PhaseGrid) -> Error {
    Error::grid(format!(
        "{kind:?} distribution stretched by λ = {lambda} integrates to {norm:.9} on x ∈ [{:.3}, {:.3}], \
         p ∈ [{:.3}, {:.3}]; its support escapes the grid",
        target.x_min, target.x_max, target.p_min, target.p_max
    ))
}

/// `Q_λ(α) = Q₁(α/√λ)/λ` on the grid of `q1`.
pub fn stretch_q(q1: &QuasiDistribution, lambda: f64) -> Result<QuasiDistribution> {
    stretch_q_onto(q1, lambda, &q1.grid)
}

/// [`stretch_q`] sampled on another grid.
pub fn stretch_q_onto(q1: &QuasiDistribution, lambda: f64, target: &PhaseGrid) -> Result<QuasiDistribution> {
    if q1.kind != QuasiKind::Husimi {
        return Err(Error::domain("stretch_q expects a Husimi distribution"));
    }
    check_stretch_factor(lambda, false)?;
    if lambda == 1.0 && *target == q1.grid {
        return Ok(q1.clone());
    }
    let values = scaled_onto(q1, lambda, target)?.map(|v| v.max(0.0));
    let norm = target.integrate(&values);
    if (norm - 1.0).abs() > TOL_NORM {
        return Err(support_error(QuasiKind::Husimi, lambda, norm, target));
    }
    QuasiDistribution::new(*target, values, QuasiKind::Husimi, q1.units)
}

/// Kernel widths in `x` and `p` of the Gaussian that completes `W₁(α/√λ)/λ`
/// to `W_λ`: variance `(λ−1)/4` per component in `α`.
pub fn stretch_kernel_sigmas(units: &SystemUnits, lambda: f64) -> (f64, f64) {
    xp_sigmas(units, 0.25 * (lambda - 1.0))
}

/// `W_λ(β) = (2/(πλ(λ−1))) ∬ W₁(α/√λ) e^{−2|α−β|²/(λ−1)} d²α`, by direct
/// real-space convolution on the grid of `w1`.
pub fn stretch_w(w1: &QuasiDistribution, lambda: f64) -> Result<QuasiDistribution> {
    stretch_w_onto(w1, lambda, &w1.grid)
}

/// [`stretch_w`] sampled on another grid.
pub fn stretch_w_onto(w1: &QuasiDistribution, lambda: f64, target: &PhaseGrid) -> Result<QuasiDistribution> {
    let scaled = scaled_wigner(w1, lambda, target)?;
    let (sx, sp) = stretch_kernel_sigmas(&w1.units, lambda);
    check_margin(target, &scaled, sx, sp, "stretched Wigner convolution")?;
    let values = grid::gaussian_convolve_direct(target, &scaled, sx, sp);
    let norm = target.integrate(&values);
    if (norm - 1.0).abs() > TOL_NORM {
        return Err(support_error(QuasiKind::Wigner, lambda, norm, target));
    }
    QuasiDistribution::new(*target, values, QuasiKind::Wigner, w1.units)
}

fn scaled_wigner(w1: &QuasiDistribution, lambda: f64, target: &PhaseGrid) -> Result<DMatrix<f64>> {
    if w1.kind != QuasiKind::Wigner {
        return Err(Error::domain("stretch_w expects a Wigner distribution"));
    }
    check_stretch_factor(lambda, true)?;
    scaled_onto(w1, lambda, target)
}

/// Largest deviation of `F(W_λ)/F(W₁(·/√λ)/λ)` from the Gaussian filter
/// `e^{−(λ−1)|k|²/8}` (in `α`-conjugate wavenumbers), over modes where the
/// denominator exceeds `floor`.
pub fn filter_ratio_deviation(w1: &QuasiDistribution, w_lambda: &QuasiDistribution, lambda: f64, floor: f64) -> Result<f64> {
    let target = &w_lambda.grid;
    let scaled = scaled_wigner(w1, lambda, target)?;
    let num = grid::spectrum(target, &w_lambda.values);
    let den = grid::spectrum(target, &scaled);
    let (sx, sp) = stretch_kernel_sigmas(&w1.units, lambda);
    let (kx, kp) = (target.kx(), target.kp());
    let mut worst = 0.0f64;
    for i in 0..target.nx {
        for j in 0..target.np {
            if den[(i, j)].norm() <= floor {
                continue;
            }
            let expect = (-0.5 * (sx * sx * kx[i] * kx[i] + sp * sp * kp[j] * kp[j])).exp();
            worst = worst.max((num[(i, j)] / den[(i, j)] - expect).norm());
        }
    }
    Ok(worst)
}

/// `Tr(ρ aⁿ (a†)ᵐ)`, evaluated with enough padding that the truncation does
/// not touch the result.
pub fn antinormal_moment(s: &FockState, n: u32, m: u32) -> Result<C64> {
    if n + m > 6 {
        return Err(Error::domain(format!("moment order {} exceeds 6", n + m)));
    }
    let tail = s.corner_population((n + m + 1) as usize);
    if tail > 1e-10 {
        warn!("state holds {tail:.2e} in its top {} Fock levels; moment ({n},{m}) may be truncated", n + m + 1);
    }
    let padded = s.embed(s.dim() + (n + m) as usize)?;
    let a = build_ladder(padded.dim())?;
    let op = a.powi(n).mul(&a.adjoint().powi(m))?;
    padded.expectation(&op)
}

/// Anti-normally ordered moments `(n, m)` with `n + m ≤ order`.
pub fn antinormal_table(s: &FockState, order: u32) -> Result<Vec<MomentEntry>> {
    let mut out = Vec::new();
    for total in 0..=order {
        for n in 0..=total {
            let m = total - n;
            out.push(MomentEntry { n, m, before: antinormal_moment(s, n, m)?, after: C64::new(0.0, 0.0) });
        }
    }
    Ok(out)
}

fn exp_anti_hermitian(g: &DMatrix<C64>) -> DMatrix<C64> {
    // g = −i·H with H Hermitian, so e^{g} = V e^{−iD} V†
    let h = g * C64::new(0.0, 1.0);
    let eig = crate::fock::hermitian_part(&h).symmetric_eigen();
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|d| C64::from_polar(1.0, -d)));
    &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}

/// Squeeze so that `⟨X²⟩ → alpha_sq·⟨X²⟩` and `⟨P²⟩ → ⟨P²⟩/alpha_sq`: the state
/// is conjugated by `U = e^{(z/2)(a² − a†²)}` as `U†ρU`, `z = ½ ln alpha_sq`.
/// The unitary is built in a padded space and the result truncated back.
pub fn squeeze_unitary(s: &FockState, alpha_sq: f64) -> Result<FockState> {
    if !(alpha_sq > 0.0 && alpha_sq.is_finite()) {
        return Err(Error::domain(format!("squeeze factor must be positive, got {alpha_sq}")));
    }
    if alpha_sq == 1.0 {
        return Ok(s.clone());
    }
    let z = 0.5 * alpha_sq.ln();
    let dim = s.dim();
    let estimate = (2.0 * z.abs()).exp() * (s.mean_occupation() + 0.5) - 0.5;
    let bound = dim as f64 / SQUEEZE_DIVISOR;
    if estimate > bound {
        return Err(Error::Truncation(format!(
            "squeezed occupation could reach {estimate:.2}, above dim/{SQUEEZE_DIVISOR} = {bound:.2}"
        )));
    }
    let big = 2 * dim + 16;
    let a = build_ladder(big)?;
    let a2 = a.matrix() * a.matrix();
    let gen = (&a2 - a2.adjoint()) * C64::from(0.5 * z);
    let u = exp_anti_hermitian(&gen);
    let padded = s.embed(big)?;
    let rho_big = u.adjoint() * padded.rho() * &u;
    let rho = rho_big.view((0, 0), (dim, dim)).into_owned();
    let kept = rho.trace().re;
    if (1.0 - kept).abs() > SQUEEZE_LOSS_TOL {
        let lost = 1.0 - kept;
        return Err(Error::Truncation(format!("squeezed state leaves {lost:.2e} of its weight above dimension {dim}")));
    }
    FockState::from_density(crate::fock::hermitian_part(&rho) / C64::from(kept))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommutatorReport {
    pub lambda: f64,
    /// `ħ/λ`.
    pub commutator: f64,
    /// `ħ/(2λ)`.
    pub min_uncertainty: f64,
    /// `Im [X̂, P̂]` read off the matrices, averaged away from the corner.
    pub measured: f64,
    /// Largest deviation of `[X̂, P̂]` from `iħ/λ` away from the corner.
    pub max_deviation: f64,
}

/// Commutator of the rescaled quadratures `X/√λ`, `P/√λ`.
pub fn commutator_rescale_report(lambda: f64, units: &SystemUnits, dim: usize) -> Result<CommutatorReport> {
    check_stretch_factor(lambda, false)?;
    if dim < 16 {
        return Err(Error::domain(format!("commutator check needs dim ≥ 16, got {dim}")));
    }
    units.validate()?;
    let (x, p) = quadratures(&build_ladder(dim)?, units)?;
    let r = C64::from(1.0 / lambda.sqrt());
    let c = x.scale(r).commutator(&p.scale(r))?;
    let expect = C64::new(0.0, units.hbar / lambda);
    let block = dim - 1;
    let mut dev = 0.0f64;
    let mut diag = 0.0;
    for i in 0..block {
        for j in 0..block {
            let want = if i == j { expect } else { C64::new(0.0, 0.0) };
            dev = dev.max((c.matrix()[(i, j)] - want).norm());
        }
        diag += c.matrix()[(i, i)].im;
    }
    Ok(CommutatorReport {
        lambda,
        commutator: units.hbar / lambda,
        min_uncertainty: 0.5 * units.hbar / lambda,
        measured: diag / block as f64,
        max_deviation: dev,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEntry {
    pub n: u32,
    pub m: u32,
    pub before: C64,
    pub after: C64,
}

/// Summary of one application of `T_Q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StretchReport {
    pub lambda: f64,
    pub entropy_before: f64,
    pub entropy_after: f64,
    pub antinormal_moments: Vec<MomentEntry>,
    pub min_wigner: f64,
    pub sup_dist_w_q: f64,
}

impl StretchReport {
    pub fn write_json<W: Write>(reports: &[StretchReport], out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, reports)?;
        Ok(())
    }
}

/// Half-widths `(x, p)` of a grid holding a distribution stretched by
/// `lambda`, with room for the Wigner convolution margin. `peak` is the
/// largest `|α|` among the unstretched state's features and `nbar_th` its
/// thermal-like spread.
pub fn stretch_half_widths(units: &SystemUnits, kind: QuasiKind, peak: f64, nbar_th: f64, lambda: f64) -> (f64, f64) {
    // per-component α variance of the stretched distribution
    let var = match kind {
        QuasiKind::Wigner => lambda * (2.0 * nbar_th + 1.0) / 4.0,
        QuasiKind::Husimi => lambda * (nbar_th + 1.0) / 2.0,
    };
    // Wigner: tails down to the convolution margin tolerance, then the
    // margin itself; Husimi: enough tail that the lost mass is ≪ TOL_NORM.
    // Wider is not better on a fixed node count: coarser grids alias the
    // fast oscillations of populated high Fock levels.
    let (tail, margin) = match kind {
        QuasiKind::Wigner => (
            // e^{−5²/2} ≈ 4e−6, just inside the margin tolerance
            5.0,
            quasiprob::MARGIN_WIDTHS * (0.25 * (lambda - 1.0).max(0.0)).sqrt(),
        ),
        QuasiKind::Husimi => (5.5, 0.0),
    };
    let r = lambda.sqrt() * peak + tail * var.sqrt() + margin;
    let s = std::f64::consts::SQRT_2 * r;
    (s * units.length_scale(), s * units.momentum_scale())
}

/// Stretch `s` by each λ: entropies and moments from the Lindblad channel,
/// negativity and the `W_λ`–`Q_λ` distance from the closed forms, all on
/// grids from `grid_for(λ)`. `w1` and `q1` are the unstretched distributions.
pub fn stretch_sweep<G>(
    s: &FockState,
    w1: &QuasiDistribution,
    q1: &QuasiDistribution,
    lambdas: &[f64],
    grid_for: G,
) -> Result<Vec<StretchReport>>
where
    G: Fn(f64) -> Result<PhaseGrid> + Sync,
{
    let before = antinormal_table(s, 4)?;
    let s0 = von_neumann_entropy(s)?;
    lambdas
        .par_iter()
        .map(|&lambda| {
            check_stretch_factor(lambda, true)?;
            let evolved = amplify(s, lambda)?;
            let mut table = before.clone();
            for e in table.iter_mut() {
                e.after = antinormal_moment(&evolved, e.n, e.m)?;
            }
            let target = grid_for(lambda)?;
            let w = stretch_w_onto(w1, lambda, &target)?;
            let q = stretch_q_onto(q1, lambda, &target)?;
            Ok(StretchReport {
                lambda,
                entropy_before: s0,
                entropy_after: von_neumann_entropy(&evolved)?,
                antinormal_moments: table,
                min_wigner: w.min_value(),
                sup_dist_w_q: w.sup_distance(&q)?,
            })
        })
        .collect()
}
