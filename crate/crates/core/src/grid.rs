//! Uniform rectangular phase-space grids and the spectral machinery that
//! runs on them.
//!
//! Grid nodes sit at `x_min + i·dx` for `i = 0..nx` with
//! `dx = (x_max − x_min)/nx`, i.e. the grid is treated as one period of a
//! periodic domain. Symmetric ranges with even `nx` therefore contain the
//! origin. Integrals are rectangle sums, which are spectrally accurate for
//! the smooth, edge-decayed fields used throughout the crate.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::SystemUnits;

pub const MIN_POINTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nx: usize,
    pub np: usize,
}

impl PhaseGrid {
    pub fn new(x_min: f64, x_max: f64, p_min: f64, p_max: f64, nx: usize, np: usize) -> Result<Self> {
        let g = PhaseGrid { x_min, x_max, p_min, p_max, nx, np };
        g.validate()?;
        Ok(g)
    }

    /// `[−half_x, half_x) × [−half_p, half_p)` with `n` points per axis.
    pub fn symmetric(half_x: f64, half_p: f64, n: usize) -> Result<Self> {
        Self::new(-half_x, half_x, -half_p, half_p, n, n)
    }

    /// Symmetric grid spanning `±widths` oscillator lengths and momenta.
    pub fn natural(units: &SystemUnits, widths: f64, n: usize) -> Result<Self> {
        units.validate()?;
        Self::symmetric(widths * units.length_scale(), widths * units.momentum_scale(), n)
    }

    /// 128² grid spanning ±8 natural widths.
    pub fn default_for(units: &SystemUnits) -> Result<Self> {
        Self::natural(units, 8.0, 128)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.p_min, self.p_max].iter().all(|v| v.is_finite());
        if !finite || !(self.x_max > self.x_min) || !(self.p_max > self.p_min) {
            return Err(Error::grid(format!(
                "empty or non-finite ranges x ∈ [{}, {}], p ∈ [{}, {}]",
                self.x_min, self.x_max, self.p_min, self.p_max
            )));
        }
        if self.nx < MIN_POINTS || self.np < MIN_POINTS {
            return Err(Error::grid(format!("need at least {MIN_POINTS} points per axis, got {}×{}", self.nx, self.np)));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.nx as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / self.np as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dp()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn p(&self, j: usize) -> f64 {
        self.p_min + j as f64 * self.dp()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn ps(&self) -> Vec<f64> {
        (0..self.np).map(|j| self.p(j)).collect()
    }

    /// Same node count, ranges multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.x_min * factor, self.x_max * factor, self.p_min * factor, self.p_max * factor, self.nx, self.np)
    }

    /// Same ranges, node counts doubled.
    pub fn refined(&self) -> Result<Self> {
        Self::new(self.x_min, self.x_max, self.p_min, self.p_max, self.nx * 2, self.np * 2)
    }

    pub fn contains(&self, x: f64, p: f64) -> bool {
        x >= self.x_min && x <= self.x(self.nx - 1) && p >= self.p_min && p <= self.p(self.np - 1)
    }

    pub fn zeros(&self) -> DMatrix<f64> {
        DMatrix::zeros(self.nx, self.np)
    }

    pub fn sample<F: Fn(f64, f64) -> f64>(&self, f: F) -> DMatrix<f64> {
        DMatrix::from_fn(self.nx, self.np, |i, j| f(self.x(i), self.p(j)))
    }

    pub fn integrate(&self, values: &DMatrix<f64>) -> f64 {
        values.sum() * self.cell_area()
    }

    /// `∬ f(x, p)·values dx dp`.
    pub fn integrate_with<F: Fn(f64, f64) -> f64>(&self, values: &DMatrix<f64>, f: F) -> f64 {
        let mut acc = 0.0;
        for j in 0..self.np {
            let p = self.p(j);
            for i in 0..self.nx {
                acc += f(self.x(i), p) * values[(i, j)];
            }
        }
        acc * self.cell_area()
    }

    /// Angular wavenumbers of the discrete Fourier modes along x (FFT order).
    pub fn kx(&self) -> Vec<f64> {
        wavenumbers(self.nx, self.dx())
    }

    pub fn kp(&self) -> Vec<f64> {
        wavenumbers(self.np, self.dp())
    }
}

/// Largest `|value|` on the outermost rows and columns relative to the
/// largest `|value|` anywhere.
pub fn edge_ratio(values: &DMatrix<f64>) -> f64 {
    let max = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    let (nx, np) = values.shape();
    let mut edge = 0.0f64;
    for i in 0..nx {
        edge = edge.max(values[(i, 0)].abs()).max(values[(i, np - 1)].abs());
    }
    for j in 0..np {
        edge = edge.max(values[(0, j)].abs()).max(values[(nx - 1, j)].abs());
    }
    edge / max
}

pub fn sup_norm_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
}

fn wavenumbers(n: usize, h: f64) -> Vec<f64> {
    let base = 2.0 * PI / (n as f64 * h);
    (0..n)
        .map(|m| {
            let m = m as i64;
            let signed = if m <= (n as i64) / 2 { m } else { m - n as i64 };
            base * signed as f64
        })
        .collect()
}

/// Reusable forward/inverse FFT pair for one transform length.
pub(crate) struct FftPair {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    n: usize,
}

impl FftPair {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        FftPair { forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n), n }
    }

    pub(crate) fn forward(&self, buf: &mut [C64]) {
        self.forward.process(buf);
    }

    /// Normalized inverse.
    pub(crate) fn inverse(&self, buf: &mut [C64]) {
        self.inverse.process(buf);
        let s = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|z| *z *= s);
    }
}

/// Multiply the 2-D spectrum of `values` by `transfer(kx, kp)` and return
/// the real part of the inverse transform. `pad_x`/`pad_p` zero cells are
/// added on each side first and cropped afterwards, so a filter narrower
/// than the padding does not wrap around.
pub fn spectral_filter<F>(grid: &PhaseGrid, values: &DMatrix<f64>, pad_x: usize, pad_p: usize, transfer: F) -> DMatrix<f64>
where
    F: Fn(f64, f64) -> C64,
{
    let nx = grid.nx + 2 * pad_x;
    let np = grid.np + 2 * pad_p;
    let fx = FftPair::new(nx);
    let fp = FftPair::new(np);
    let kx = wavenumbers(nx, grid.dx());
    let kp = wavenumbers(np, grid.dp());

    // rows[i] holds the p-line at x index i
    let mut rows: Vec<Vec<C64>> = vec![vec![C64::new(0.0, 0.0); np]; nx];
    for i in 0..grid.nx {
        for j in 0..grid.np {
            rows[i + pad_x][j + pad_p] = C64::from(values[(i, j)]);
        }
    }
    rows.iter_mut().for_each(|r| fp.forward(r));
    let mut col = vec![C64::new(0.0, 0.0); nx];
    for j in 0..np {
        for i in 0..nx {
            col[i] = rows[i][j];
        }
        fx.forward(&mut col);
        for i in 0..nx {
            col[i] *= transfer(kx[i], kp[j]);
        }
        fx.inverse(&mut col);
        for i in 0..nx {
            rows[i][j] = col[i];
        }
    }
    rows.iter_mut().for_each(|r| fp.inverse(r));
    DMatrix::from_fn(grid.nx, grid.np, |i, j| rows[i + pad_x][j + pad_p].re)
}

/// Discrete approximation of `∬ f e^{−i(kx·x + kp·p)} dx dp` up to a
/// phase fixed by the grid origin, indexed like [`PhaseGrid::kx`] and
/// [`PhaseGrid::kp`].
pub fn spectrum(grid: &PhaseGrid, values: &DMatrix<f64>) -> DMatrix<C64> {
    let fx = FftPair::new(grid.nx);
    let fp = FftPair::new(grid.np);
    let mut out = values.map(C64::from);
    let mut buf = vec![C64::new(0.0, 0.0); grid.np.max(grid.nx)];
    for i in 0..grid.nx {
        for j in 0..grid.np {
            buf[j] = out[(i, j)];
        }
        fp.forward(&mut buf[..grid.np]);
        for j in 0..grid.np {
            out[(i, j)] = buf[j];
        }
    }
    for j in 0..grid.np {
        for i in 0..grid.nx {
            buf[i] = out[(i, j)];
        }
        fx.forward(&mut buf[..grid.nx]);
        for i in 0..grid.nx {
            out[(i, j)] = buf[i] * grid.cell_area();
        }
    }
    out
}

/// `∂ₓᵃ ∂ₚᵇ values` by Fourier differentiation on the periodic grid. The
/// Nyquist mode is dropped for odd orders so real fields stay real.
pub fn spectral_derivative(grid: &PhaseGrid, values: &DMatrix<f64>, order_x: u32, order_p: u32) -> DMatrix<f64> {
    if order_x == 0 && order_p == 0 {
        return values.clone();
    }
    // even-length transforms carry a lone Nyquist mode at +π/h
    let nyq_x = (grid.nx % 2 == 0).then(|| PI / grid.dx());
    let nyq_p = (grid.np % 2 == 0).then(|| PI / grid.dp());
    let drop_x = order_x % 2 == 1;
    let drop_p = order_p % 2 == 1;
    spectral_filter(grid, values, 0, 0, |kx, kp| {
        if (drop_x && is_nyquist(kx, nyq_x)) || (drop_p && is_nyquist(kp, nyq_p)) {
            C64::new(0.0, 0.0)
        } else {
            C64::new(0.0, kx).powu(order_x) * C64::new(0.0, kp).powu(order_p)
        }
    })
}

fn is_nyquist(k: f64, nyq: Option<f64>) -> bool {
    nyq.is_some_and(|n| (k - n).abs() <= 1e-9 * n)
}

/// Matrix evaluating the periodic trigonometric interpolant of samples at
/// `origin + j·h` (j < n) at the given target points.
pub fn trig_interp_matrix(n: usize, origin: f64, h: f64, targets: &[f64]) -> DMatrix<f64> {
    let period = n as f64 * h;
    DMatrix::from_fn(targets.len(), n, |t, j| {
        let u = targets[t] - (origin + j as f64 * h);
        periodic_sinc(u, h, period, n)
    })
}

fn periodic_sinc(u: f64, h: f64, period: f64, n: usize) -> f64 {
    let a = PI * u / h;
    let b = PI * u / period;
    if b.sin().abs() < 1e-14 {
        // u is a multiple of the period
        let k = (u / period).round() as i64;
        return if n % 2 == 0 && k % 2 != 0 { -1.0 } else { 1.0 };
    }
    if n % 2 == 0 {
        a.sin() / (n as f64 * b.tan())
    } else {
        a.sin() / (n as f64 * b.sin())
    }
}

/// Values of the band-limited interpolant of `values` on the tensor product
/// of `xs` and `ps`.
pub fn resample(grid: &PhaseGrid, values: &DMatrix<f64>, xs: &[f64], ps: &[f64]) -> DMatrix<f64> {
    let mx = trig_interp_matrix(grid.nx, grid.x_min, grid.dx(), xs);
    let mp = trig_interp_matrix(grid.np, grid.p_min, grid.dp(), ps);
    mx * values * mp.transpose()
}

/// Separable real-space convolution with a normalized Gaussian of standard
/// deviations `sigma_x`, `sigma_p`; values outside the grid count as zero.
pub fn gaussian_convolve_direct(grid: &PhaseGrid, values: &DMatrix<f64>, sigma_x: f64, sigma_p: f64) -> DMatrix<f64> {
    let kx = gaussian_kernel_matrix(grid.nx, grid.dx(), sigma_x);
    let kp = gaussian_kernel_matrix(grid.np, grid.dp(), sigma_p);
    kx * values * kp.transpose()
}

fn gaussian_kernel_matrix(n: usize, h: f64, sigma: f64) -> DMatrix<f64> {
    let norm = h / ((2.0 * PI).sqrt() * sigma);
    DMatrix::from_fn(n, n, |i, j| {
        let d = (i as f64 - j as f64) * h / sigma;
        norm * (-0.5 * d * d).exp()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn gauss(x: f64, p: f64, sx: f64, sp: f64, x0: f64, p0: f64) -> f64 {
        (-(x - x0).powi(2) / (2.0 * sx * sx) - (p - p0).powi(2) / (2.0 * sp * sp)).exp() / (2.0 * PI * sx * sp)
    }

    #[test]
    fn grid_contains_origin_and_validates() {
        let g = PhaseGrid::symmetric(8.0, 8.0, 128).unwrap();
        assert_eq!(g.x(64), 0.0);
        assert_eq!(g.p(64), 0.0);
        assert!(PhaseGrid::symmetric(8.0, 8.0, 8).is_err());
        assert!(PhaseGrid::new(1.0, -1.0, -1.0, 1.0, 16, 16).is_err());
    }

    #[test]
    fn rectangle_rule_normalizes_gaussian() {
        let g = PhaseGrid::symmetric(8.0, 8.0, 64).unwrap();
        let v = g.sample(|x, p| gauss(x, p, 1.0, 0.7, 0.3, -0.2));
        assert_abs_diff_eq!(g.integrate(&v), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.integrate_with(&v, |x, _| x), 0.3, epsilon = 1e-12);
    }

    #[test]
    fn spectral_derivatives_of_gaussian() {
        let g = PhaseGrid::symmetric(10.0, 10.0, 128).unwrap();
        let v = g.sample(|x, p| (-(x * x + p * p) / 2.0).exp());
        let dx = spectral_derivative(&g, &v, 1, 0);
        let want = g.sample(|x, p| -x * (-(x * x + p * p) / 2.0).exp());
        assert!(sup_norm_diff(&dx, &want) < 1e-10);
        let dp3 = spectral_derivative(&g, &v, 0, 3);
        let want3 = g.sample(|x, p| (3.0 * p - p.powi(3)) * (-(x * x + p * p) / 2.0).exp());
        assert!(sup_norm_diff(&dp3, &want3) < 1e-9);
    }

    #[test]
    fn resample_reproduces_smooth_function() {
        let g = PhaseGrid::symmetric(10.0, 10.0, 64).unwrap();
        let f = |x: f64, p: f64| gauss(x, p, 1.3, 0.9, 0.5, -0.4);
        let v = g.sample(f);
        let xs: Vec<f64> = (0..37).map(|k| -6.0 + 0.31 * k as f64).collect();
        let ps: Vec<f64> = (0..29).map(|k| -5.0 + 0.37 * k as f64).collect();
        let r = resample(&g, &v, &xs, &ps);
        for (a, &x) in xs.iter().enumerate() {
            for (b, &p) in ps.iter().enumerate() {
                assert_abs_diff_eq!(r[(a, b)], f(x, p), epsilon = 1e-12);
            }
        }
        // on-node evaluation is the identity
        let same = resample(&g, &v, &g.xs(), &g.ps());
        assert!(sup_norm_diff(&same, &v) < 1e-13);
    }

    #[test]
    fn convolution_adds_variances_both_routes() {
        let g = PhaseGrid::symmetric(12.0, 12.0, 128).unwrap();
        let v = g.sample(|x, p| gauss(x, p, 0.8, 0.6, 0.0, 0.0));
        let want = g.sample(|x, p| gauss(x, p, (0.64f64 + 0.25).sqrt(), (0.36f64 + 1.0).sqrt(), 0.0, 0.0));
        let direct = gaussian_convolve_direct(&g, &v, 0.5, 1.0);
        assert!(sup_norm_diff(&direct, &want) < 1e-12);
        let fourier = spectral_filter(&g, &v, 16, 16, |kx, kp| C64::from((-0.5 * (0.25 * kx * kx + kp * kp)).exp()));
        assert!(sup_norm_diff(&fourier, &want) < 1e-12);
    }

    #[test]
    fn edge_ratio_flags_support_at_boundary() {
        let g = PhaseGrid::symmetric(4.0, 4.0, 32).unwrap();
        let narrow = g.sample(|x, p| gauss(x, p, 0.5, 0.5, 0.0, 0.0));
        let wide = g.sample(|x, p| gauss(x, p, 3.0, 3.0, 0.0, 0.0));
        assert!(edge_ratio(&narrow) < 1e-10);
        assert!(edge_ratio(&wide) > 0.1);
    }
}
