//! Wigner and Husimi distributions of truncated Fock states.
//!
//! Distributions are stored as densities in `(x, p)`, so
//! `∬ values dx dp = 1`. Coherent-state coordinates go through
//! [`SystemUnits::alpha_of`]; a density in `α` is the stored value times
//! `2ħ`.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockState, SystemUnits};
use crate::grid::{self, PhaseGrid};

/// Normalization tolerance for every distribution.
pub const TOL_NORM: f64 = 1e-6;
/// Husimi values may dip this far below zero from round-off.
pub const TOL_HUSIMI_NEG: f64 = -1e-9;
/// Cells below this value count towards the negative area.
pub const NEG_THRESHOLD: f64 = -1e-9;
/// Required empty margin, in kernel standard deviations, around a
/// distribution before Gaussian smoothing.
pub const MARGIN_WIDTHS: f64 = 4.0;
/// Relative size a field may have inside that margin.
pub const MARGIN_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuasiKind {
    Wigner,
    Husimi,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasiDistribution {
    pub grid: PhaseGrid,
    pub values: DMatrix<f64>,
    pub kind: QuasiKind,
    pub units: SystemUnits,
}

/// Metadata written next to a CSV grid dump.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridHeader {
    pub grid: PhaseGrid,
    pub kind: QuasiKind,
    pub units: SystemUnits,
    pub columns: Vec<String>,
}

impl QuasiDistribution {
    /// Checks normalization and, for Husimi distributions, positivity.
    pub fn new(grid: PhaseGrid, values: DMatrix<f64>, kind: QuasiKind, units: SystemUnits) -> Result<Self> {
        let q = Self::from_parts(grid, values, kind, units)?;
        q.check()?;
        Ok(q)
    }

    pub(crate) fn from_parts(grid: PhaseGrid, values: DMatrix<f64>, kind: QuasiKind, units: SystemUnits) -> Result<Self> {
        grid.validate()?;
        units.validate()?;
        if values.shape() != (grid.nx, grid.np) {
            return Err(Error::grid(format!("values are {:?}, grid is {}×{}", values.shape(), grid.nx, grid.np)));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("distribution has non-finite values".into()));
        }
        Ok(QuasiDistribution { grid, values, kind, units })
    }

    pub fn check(&self) -> Result<()> {
        let norm = self.norm();
        if (norm - 1.0).abs() > TOL_NORM {
            return Err(Error::grid(format!(
                "{:?} distribution integrates to {norm:.9} on the grid; the grid does not cover its support",
                self.kind
            )));
        }
        if self.kind == QuasiKind::Husimi {
            let min = self.min_value();
            if min < TOL_HUSIMI_NEG {
                return Err(Error::Numerical(format!("Husimi distribution has negative value {min:.3e}")));
            }
        }
        Ok(())
    }

    pub fn norm(&self) -> f64 {
        self.grid.integrate(&self.values)
    }

    pub fn min_value(&self) -> f64 {
        self.values.min()
    }

    pub fn max_value(&self) -> f64 {
        self.values.max()
    }

    /// Value as a density in coherent-state coordinates.
    pub fn alpha_density(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)] / self.units.alpha_jacobian()
    }

    /// `∬ αⁿ (α*)ᵐ f d²α`: anti-normally ordered moments for a Husimi
    /// distribution, symmetrically ordered ones for a Wigner distribution.
    pub fn alpha_moment(&self, n: u32, m: u32) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..self.grid.np {
            for i in 0..self.grid.nx {
                let a = self.units.alpha_of(self.grid.x(i), self.grid.p(j));
                acc += a.powu(n) * a.conj().powu(m) * self.values[(i, j)];
            }
        }
        acc * self.grid.cell_area()
    }

    /// `∬ xⁿ pᵐ f dx dp`.
    pub fn xp_moment(&self, n: i32, m: i32) -> f64 {
        self.grid.integrate_with(&self.values, |x, p| x.powi(n) * p.powi(m))
    }

    /// Position marginal `∫ f dp` on the x nodes.
    pub fn x_marginal(&self) -> Vec<f64> {
        (0..self.grid.nx).map(|i| self.values.row(i).sum() * self.grid.dp()).collect()
    }

    /// Momentum marginal `∫ f dx` on the p nodes.
    pub fn p_marginal(&self) -> Vec<f64> {
        (0..self.grid.np).map(|j| self.values.column(j).sum() * self.grid.dx()).collect()
    }

    pub fn sup_distance(&self, other: &QuasiDistribution) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::grid("distributions live on different grids"));
        }
        Ok(grid::sup_norm_diff(&self.values, &other.values))
    }

    pub fn header(&self) -> GridHeader {
        GridHeader {
            grid: self.grid,
            kind: self.kind,
            units: self.units,
            columns: vec!["x".into(), "p".into(), "value".into()],
        }
    }

    /// `x,p,value` rows, x-major.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,p,value")?;
        for i in 0..self.grid.nx {
            for j in 0..self.grid.np {
                writeln!(out, "{:.12e},{:.12e},{:.12e}", self.grid.x(i), self.grid.p(j), self.values[(i, j)])?;
            }
        }
        Ok(())
    }
}

/// Normalized Hermite functions `φ₀..φ_{n−1}` at `xi`.
///
/// The three-term recurrence runs on mantissas with a separate log-scale so
/// that neither the Gaussian factor nor the polynomial growth overflows.
pub fn hermite_functions(xi: f64, n: usize) -> Vec<f64> {
    const RESCALE: f64 = 1e150;
    let mut out = vec![0.0; n];
    if n == 0 {
        return out;
    }
    let mut log_scale = -0.5 * xi * xi;
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25);
    let mut scales = vec![0.0; n];
    let mut mants = vec![0.0; n];
    mants[0] = cur;
    scales[0] = log_scale;
    for k in 1..n {
        let kf = k as f64;
        let next = (2.0 / kf).sqrt() * xi * cur - ((kf - 1.0) / kf).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            log_scale += RESCALE.ln();
        }
        mants[k] = cur;
        scales[k] = log_scale;
    }
    for k in 0..n {
        out[k] = if mants[k] == 0.0 { 0.0 } else { mants[k] * scales[k].exp() };
    }
    out
}

/// Position-space number-state wavefunctions `ψ₀(x)..ψ_{n−1}(x)`.
pub fn position_wavefunctions(x: f64, n: usize, units: &SystemUnits) -> Vec<f64> {
    let l = units.length_scale();
    let s = 1.0 / l.sqrt();
    hermite_functions(x / l, n).into_iter().map(|v| v * s).collect()
}

/// `⟨x|ρ|x⟩` on the grid's x nodes.
pub fn position_density(s: &FockState, grid: &PhaseGrid, units: &SystemUnits) -> Vec<f64> {
    let d = s.dim();
    grid.xs()
        .iter()
        .map(|&x| {
            let psi = DVector::from_vec(position_wavefunctions(x, d, units).into_iter().map(C64::from).collect());
            (psi.transpose() * s.rho() * &psi)[(0, 0)].re
        })
        .collect()
}

/// `⟨p|ρ|p⟩` on the grid's p nodes. Number states in momentum space are
/// `(−i)ⁿ` times the Hermite functions scaled by `√(ħmω)`.
pub fn momentum_density(s: &FockState, grid: &PhaseGrid, units: &SystemUnits) -> Vec<f64> {
    let d = s.dim();
    let p0 = units.momentum_scale();
    grid.ps()
        .iter()
        .map(|&p| {
            let phi = hermite_functions(p / p0, d);
            let psi = DVector::from_fn(d, |n, _| C64::new(0.0, -1.0).powu(n as u32) * phi[n] / p0.sqrt());
            (psi.adjoint() * s.rho() * &psi)[(0, 0)].re
        })
        .collect()
}

/// Highest number state carrying population above `1e-16`.
fn occupied_top(s: &FockState) -> usize {
    (0..s.dim()).rev().find(|&n| s.rho()[(n, n)].re.abs() > 1e-16).unwrap_or(0)
}

/// Refuse grids that cannot resolve the oscillation scale of the state,
/// warn when its second moments reach the grid edge.
fn check_grid_for_state(s: &FockState, grid: &PhaseGrid, units: &SystemUnits) -> Result<()> {
    check_resolution(s, grid, units)?;
    let nbar = s.mean_occupation().max(0.0);
    // ⟨X²⟩ and ⟨P²⟩ from ⟨a†a⟩ bound the spread for any state
    let sx = (units.length_scale() * units.length_scale() * (nbar + 0.5)).sqrt();
    let sp = (units.momentum_scale() * units.momentum_scale() * (nbar + 0.5)).sqrt();
    let half_x = 0.5 * (grid.x_max - grid.x_min);
    let half_p = 0.5 * (grid.p_max - grid.p_min);
    if half_x < 5.0 * sx || half_p < 5.0 * sp {
        log::warn!("grid half-widths ({half_x:.3}, {half_p:.3}) are within 5σ of the state's spread ({sx:.3}, {sp:.3})");
    }
    Ok(())
}

/// Refuse grids whose spacing cannot resolve the oscillation scale of `s`.
pub(crate) fn check_resolution(s: &FockState, grid: &PhaseGrid, units: &SystemUnits) -> Result<()> {
    grid.validate()?;
    units.validate()?;
    let nbar = s.mean_occupation().max(0.0);
    let k = 2.0 * (2.0 * nbar + 1.0).sqrt();
    let max_dx = PI * units.length_scale() / k;
    let max_dp = PI * units.momentum_scale() / k;
    if grid.dx() > max_dx || grid.dp() > max_dp {
        return Err(Error::grid(format!(
            "grid too coarse for a state with n̄ = {nbar:.3}: need dx ≤ {max_dx:.4} and dp ≤ {max_dp:.4}, have {:.4} and {:.4}",
            grid.dx(),
            grid.dp()
        )));
    }
    Ok(())
}

/// Wigner function of `s` on `grid`:
/// `W(x,p) = (1/πħ) ∫ ⟨x+y|ρ|x−y⟩ e^{−2ipy/ħ} dy`.
///
/// Each x row is computed independently: the off-diagonal kernel is built
/// from number-state wavefunctions and its y-integral is a discrete Fourier
/// sum evaluated at the grid momenta.
pub fn wigner_from_state(s: &FockState, grid: &PhaseGrid, units: &SystemUnits) -> Result<QuasiDistribution> {
    check_grid_for_state(s, grid, units)?;
    let values = wigner_values(s, grid, units);
    QuasiDistribution::new(*grid, values, QuasiKind::Wigner, *units)
}

/// Pointwise Wigner samples on the grid nodes, without the resolution and
/// normalization checks of [`wigner_from_state`].
pub fn wigner_values(s: &FockState, grid: &PhaseGrid, units: &SystemUnits) -> DMatrix<f64> {
    let top = occupied_top(s) + 1;
    let rho = s.rho().view((0, 0), (top, top)).into_owned();
    let l = units.length_scale();
    let hbar = units.hbar;
    let k_max = ((2.0 * top as f64 + 1.0).sqrt() + 5.0) / l;
    let p_abs = grid.p_min.abs().max(grid.p_max.abs());
    let bandwidth = 2.0 * k_max + 2.0 * p_abs / hbar;
    let reach = l * ((2.0 * top as f64 + 1.0).sqrt() + 7.0);
    let ps = grid.ps();

    let rows: Vec<Vec<f64>> = (0..grid.nx)
        .into_par_iter()
        .map(|i| {
            let x = grid.x(i);
            let y_max = reach - x.abs();
            if y_max <= 0.0 {
                return vec![0.0; grid.np];
            }
            let h = (PI / bandwidth).min(y_max / 4.0);
            let ny = (y_max / h).ceil() as usize;
            let kernel: Vec<C64> = (0..=ny)
                .map(|k| {
                    let y = k as f64 * h;
                    let plus = DVector::from_vec(position_wavefunctions(x + y, top, units));
                    let minus = DVector::from_vec(position_wavefunctions(x - y, top, units));
                    let mut acc = C64::new(0.0, 0.0);
                    for n in 0..top {
                        if minus[n] == 0.0 {
                            continue;
                        }
                        let mut col = C64::new(0.0, 0.0);
                        for m in 0..top {
                            col += rho[(m, n)] * plus[m];
                        }
                        acc += col * minus[n];
                    }
                    acc
                })
                .collect();
            ps.iter()
                .map(|&p| {
                    let mut sum = 0.5 * kernel[0].re;
                    for (k, kv) in kernel.iter().enumerate().skip(1) {
                        let phase = -2.0 * p * (k as f64 * h) / hbar;
                        sum += kv.re * phase.cos() - kv.im * phase.sin();
                    }
                    2.0 * sum * h / (PI * hbar)
                })
                .collect()
        })
        .collect();
    DMatrix::from_fn(grid.nx, grid.np, |i, j| rows[i][j])
}

/// Husimi distribution `⟨α|ρ|α⟩/π` expressed as a density in `(x, p)`.
pub fn husimi_from_state(s: &FockState, grid: &PhaseGrid, units: &SystemUnits) -> Result<QuasiDistribution> {
    check_grid_for_state(s, grid, units)?;
    let values = husimi_values(s, grid, units);
    QuasiDistribution::new(*grid, values, QuasiKind::Husimi, *units)
}

/// Pointwise Husimi samples on the grid nodes, without the normalization
/// check of [`husimi_from_state`].
pub fn husimi_values(s: &FockState, grid: &PhaseGrid, units: &SystemUnits) -> DMatrix<f64> {
    let d = s.dim();
    let rho = s.rho();
    let scale = units.alpha_jacobian() / PI;
    let cols: Vec<Vec<f64>> = (0..grid.np)
        .into_par_iter()
        .map(|j| {
            let p = grid.p(j);
            (0..grid.nx)
                .map(|i| {
                    let alpha = units.alpha_of(grid.x(i), p);
                    let v = number_overlaps(alpha, d);
                    let mut acc = C64::new(0.0, 0.0);
                    for n in 0..d {
                        let mut row = C64::new(0.0, 0.0);
                        for m in 0..d {
                            row += v[m].conj() * rho[(m, n)];
                        }
                        acc += row * v[n];
                    }
                    acc.re.max(0.0) * scale
                })
                .collect()
        })
        .collect();
    DMatrix::from_fn(grid.nx, grid.np, |i, j| cols[j][i])
}

/// `⟨n|α⟩ = e^{−|α|²/2} αⁿ/√n!` for `n < d`.
fn number_overlaps(alpha: C64, d: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); d];
    v[0] = C64::from((-0.5 * alpha.norm_sqr()).exp());
    for n in 1..d {
        v[n] = v[n - 1] * alpha / (n as f64).sqrt();
    }
    v
}

/// Standard deviations in `x` and `p` of the Gaussian whose `α`-space
/// variance per component is `alpha_var`.
pub fn xp_sigmas(units: &SystemUnits, alpha_var: f64) -> (f64, f64) {
    let s = (2.0 * alpha_var).sqrt();
    (s * units.length_scale(), s * units.momentum_scale())
}

/// Require `values` to vanish within `MARGIN_WIDTHS` kernel widths of the
/// grid edge.
pub(crate) fn check_margin(grid: &PhaseGrid, values: &DMatrix<f64>, sigma_x: f64, sigma_p: f64, what: &str) -> Result<()> {
    let bx = ((MARGIN_WIDTHS * sigma_x) / grid.dx()).ceil() as usize;
    let bp = ((MARGIN_WIDTHS * sigma_p) / grid.dp()).ceil() as usize;
    let max = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(());
    }
    let mut band = 0.0f64;
    for i in 0..grid.nx {
        for j in 0..grid.np {
            let near = i < bx || i + bx >= grid.nx || j < bp || j + bp >= grid.np;
            if near {
                band = band.max(values[(i, j)].abs());
            }
        }
    }
    if band > MARGIN_TOL * max {
        return Err(Error::grid(format!(
            "{what}: field reaches within {MARGIN_WIDTHS} kernel widths of the grid edge \
             (relative size {:.2e}); pad x by at least {:.4} and p by at least {:.4} on each side",
            band / max,
            MARGIN_WIDTHS * sigma_x,
            MARGIN_WIDTHS * sigma_p
        )));
    }
    Ok(())
}

/// Weierstrass transform `Q(α) = (2/π) ∬ W(β) e^{−2|α−β|²} d²β`, applied
/// as a Gaussian filter on the discrete spectrum of `W`.
pub fn weierstrass(w: &QuasiDistribution) -> Result<QuasiDistribution> {
    if w.kind != QuasiKind::Wigner {
        return Err(Error::domain("Weierstrass transform expects a Wigner distribution"));
    }
    let (sx, sp) = xp_sigmas(&w.units, 0.25);
    check_margin(&w.grid, &w.values, sx, sp, "Weierstrass transform")?;
    let pad_x = ((MARGIN_WIDTHS * sx) / w.grid.dx()).ceil() as usize;
    let pad_p = ((MARGIN_WIDTHS * sp) / w.grid.dp()).ceil() as usize;
    let values = grid::spectral_filter(&w.grid, &w.values, pad_x, pad_p, |kx, kp| {
        C64::from((-0.5 * (sx * sx * kx * kx + sp * sp * kp * kp)).exp())
    });
    let values = values.map(|v| v.max(0.0));
    QuasiDistribution::new(w.grid, values, QuasiKind::Husimi, w.units)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegativityReport {
    /// `∬ max(0, −W) dx dp`.
    pub neg_volume: f64,
    pub min_value: f64,
    /// Area of `{W < −1e−9}`.
    pub neg_area: f64,
}

pub fn negativity_report(w: &QuasiDistribution) -> Result<NegativityReport> {
    if w.kind != QuasiKind::Wigner {
        return Err(Error::domain("negativity is defined for Wigner distributions"));
    }
    let cell = w.grid.cell_area();
    let neg_volume = w.values.iter().map(|&v| (-v).max(0.0)).sum::<f64>() * cell;
    let neg_area = w.values.iter().filter(|&&v| v < NEG_THRESHOLD).count() as f64 * cell;
    Ok(NegativityReport { neg_volume, min_value: w.min_value(), neg_area })
}
