//! Classical phase-space densities and affine maps acting on them.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::SystemUnits;
use crate::grid::PhaseGrid;

pub const TOL_NORM: f64 = 1e-6;

/// A non-negative, normalized density on a phase-space grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDistribution {
    pub grid: PhaseGrid,
    pub values: DMatrix<f64>,
    /// `ħ` fixes the reference cell `h = 2πħ` for entropies.
    pub units: SystemUnits,
}

impl PhaseDistribution {
    pub fn new(grid: PhaseGrid, values: DMatrix<f64>, units: SystemUnits) -> Result<Self> {
        grid.validate()?;
        units.validate()?;
        if values.shape() != (grid.nx, grid.np) {
            return Err(Error::grid(format!("values are {:?}, grid is {}×{}", values.shape(), grid.nx, grid.np)));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::domain(format!("densities must be finite and non-negative, found {v}")));
        }
        let norm = grid.integrate(&values);
        if (norm - 1.0).abs() > TOL_NORM {
            return Err(Error::grid(format!("density integrates to {norm:.9}; the grid does not cover its support")));
        }
        Ok(PhaseDistribution { grid, values, units })
    }

    /// Samples `f` and rescales so the grid sum is exactly one.
    pub fn from_fn<F: Fn(f64, f64) -> f64>(grid: PhaseGrid, units: SystemUnits, f: F) -> Result<Self> {
        let values = grid.sample(f);
        let norm = grid.integrate(&values);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::domain("density has no mass on the grid"));
        }
        Self::new(grid, values / norm, units)
    }

    /// Uncorrelated Gaussian with standard deviations `sx`, `sp`.
    pub fn gaussian(grid: PhaseGrid, units: SystemUnits, center: (f64, f64), sx: f64, sp: f64) -> Result<Self> {
        if !(sx > 0.0 && sp > 0.0) {
            return Err(Error::domain("Gaussian widths must be positive"));
        }
        Self::from_fn(grid, units, |x, p| {
            let u = (x - center.0) / sx;
            let v = (p - center.1) / sp;
            (-0.5 * (u * u + v * v)).exp()
        })
    }

    /// Plateau of half-widths `half` with logistic edges of width `edge`;
    /// `edge = 0` gives a hard box.
    pub fn plateau(grid: PhaseGrid, units: SystemUnits, center: (f64, f64), half: (f64, f64), edge: f64) -> Result<Self> {
        let step = |d: f64| {
            if edge > 0.0 {
                // box blurred by a Gaussian of width `edge`: tails stay Gaussian
                0.5 * (1.0 + libm::erf(d / (std::f64::consts::SQRT_2 * edge)))
            } else if d >= 0.0 {
                1.0
            } else {
                0.0
            }
        };
        Self::from_fn(grid, units, |x, p| step(half.0 - (x - center.0).abs()) * step(half.1 - (p - center.1).abs()))
    }

    pub fn norm(&self) -> f64 {
        self.grid.integrate(&self.values)
    }

    pub fn mean(&self) -> (f64, f64) {
        (self.grid.integrate_with(&self.values, |x, _| x), self.grid.integrate_with(&self.values, |_, p| p))
    }

    /// Equal-weight mixture of two densities on the same grid.
    pub fn mix(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::grid("mixture components live on different grids"));
        }
        Self::new(self.grid, (&self.values + &other.values) * 0.5, self.units)
    }
}

/// Differential entropy `−∬ ρ ln(ρ h) dx dp` with `0·ln 0 = 0`, in nats.
pub fn shannon_entropy(rho: &PhaseDistribution) -> f64 {
    let h = 2.0 * PI * rho.units.hbar;
    let cell = rho.grid.cell_area();
    -rho.values.iter().filter(|&&v| v > 0.0).map(|&v| v * (v * h).ln()).sum::<f64>() * cell
}

/// `z ↦ linear·z + shift` on `(x, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap2D {
    pub linear: Matrix2<f64>,
    pub shift: Vector2<f64>,
}

impl AffineMap2D {
    pub fn new(linear: Matrix2<f64>, shift: Vector2<f64>) -> Result<Self> {
        if linear.iter().chain(shift.iter()).any(|v| !v.is_finite()) {
            return Err(Error::domain("affine map has non-finite entries"));
        }
        if linear.determinant() == 0.0 {
            return Err(Error::domain("affine map is singular"));
        }
        Ok(AffineMap2D { linear, shift })
    }

    pub fn linear(m: Matrix2<f64>) -> Result<Self> {
        Self::new(m, Vector2::zeros())
    }

    pub fn identity() -> Self {
        AffineMap2D { linear: Matrix2::identity(), shift: Vector2::zeros() }
    }

    pub fn diagonal(sx: f64, sp: f64) -> Result<Self> {
        Self::linear(Matrix2::new(sx, 0.0, 0.0, sp))
    }

    /// Isotropic stretch `(x, p) ↦ (√λ x, √λ p)`.
    pub fn pure_stretch(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::domain(format!("stretch factor must be positive, got {lambda}")));
        }
        Self::diagonal(lambda.sqrt(), lambda.sqrt())
    }

    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        AffineMap2D { linear: Matrix2::new(c, -s, s, c), shift: Vector2::zeros() }
    }

    /// Canonical squeeze `(x, p) ↦ (s x, p/s)`.
    pub fn squeeze(s: f64) -> Result<Self> {
        Self::diagonal(s, 1.0 / s)
    }

    pub fn translation(dx: f64, dp: f64) -> Self {
        AffineMap2D { linear: Matrix2::identity(), shift: Vector2::new(dx, dp) }
    }

    pub fn apply(&self, x: f64, p: f64) -> (f64, f64) {
        let z = self.linear * Vector2::new(x, p) + self.shift;
        (z[0], z[1])
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn compose(&self, inner: &AffineMap2D) -> AffineMap2D {
        AffineMap2D { linear: self.linear * inner.linear, shift: self.linear * inner.shift + self.shift }
    }

    pub fn inverse(&self) -> Result<AffineMap2D> {
        let inv = self.linear.try_inverse().ok_or_else(|| Error::domain("affine map is singular"))?;
        Ok(AffineMap2D { linear: inv, shift: -(inv * self.shift) })
    }

    pub fn determinant(&self) -> f64 {
        self.linear.determinant()
    }

    pub fn max_abs_diff(&self, other: &AffineMap2D) -> f64 {
        (self.linear - other.linear).abs().max().max((self.shift - other.shift).abs().max())
    }
}

/// Push-forward `ρ'(z) = ρ(R⁻¹z)/|det R|`, sampling the source at the
/// pre-image of every target node with Keys cubic convolution.
/// Largest interpolation mass defect silently renormalized by [`apply_map`].
pub const MAX_INTERP_DEFECT: f64 = 1e-3;

pub fn apply_map(rho: &PhaseDistribution, map: &AffineMap2D) -> Result<PhaseDistribution> {
    let g = rho.grid;
    check_image_fits(rho, map)?;
    let inv = map.inverse()?;
    let jac = map.determinant().abs();
    let values = DMatrix::from_fn(g.nx, g.np, |i, j| {
        let (x, p) = inv.apply(g.x(i), g.p(j));
        (cubic_convolution(&g, &rho.values, x, p) / jac).max(0.0)
    });
    // Escaped mass is ruled out above, so whatever is left is interpolation
    // error; a large defect means the density is under-resolved.
    let mass = g.integrate(&values);
    if (mass - 1.0).abs() > MAX_INTERP_DEFECT {
        return Err(Error::grid(format!(
            "interpolated image integrates to {mass:.9}; refine the grid (dx = {:.4}, dp = {:.4})",
            g.dx(),
            g.dp()
        )));
    }
    PhaseDistribution::new(g, values / mass, rho.units)
}

/// Mass whose image leaves the target grid must stay below a tenth of the
/// normalization tolerance.
fn check_image_fits(rho: &PhaseDistribution, map: &AffineMap2D) -> Result<()> {
    let g = rho.grid;
    let last_x = g.x(g.nx - 1);
    let last_p = g.p(g.np - 1);
    let mut escaped = 0.0;
    let (mut x0, mut x1, mut p0, mut p1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..g.nx {
        for j in 0..g.np {
            let (x, p) = map.apply(g.x(i), g.p(j));
            if x < g.x_min || x > last_x || p < g.p_min || p > last_p {
                escaped += rho.values[(i, j)];
                if rho.values[(i, j)] > 0.0 {
                    x0 = x0.min(x);
                    x1 = x1.max(x);
                    p0 = p0.min(p);
                    p1 = p1.max(p);
                }
            }
        }
    }
    let escaped = escaped * g.cell_area();
    if escaped > 0.1 * TOL_NORM {
        return Err(Error::grid(format!(
            "mass {escaped:.3e} escapes the grid x ∈ [{:.4}, {last_x:.4}], p ∈ [{:.4}, {last_p:.4}]; \
             the image reaches x ∈ [{x0:.4}, {x1:.4}], p ∈ [{p0:.4}, {p1:.4}]",
            g.x_min, g.p_min
        )));
    }
    Ok(())
}

/// Keys cubic-convolution kernel with `a = −½`.
fn keys(t: f64) -> f64 {
    let t = t.abs();
    if t < 1.0 {
        (1.5 * t - 2.5) * t * t + 1.0
    } else if t < 2.0 {
        ((-0.5 * t + 2.5) * t - 4.0) * t + 2.0
    } else {
        0.0
    }
}

/// 4×4-stencil interpolation; nodes outside the grid count as zero.
fn cubic_convolution(g: &PhaseGrid, values: &DMatrix<f64>, x: f64, p: f64) -> f64 {
    let u = (x - g.x_min) / g.dx();
    let v = (p - g.p_min) / g.dp();
    if u < -2.0 || v < -2.0 || u > (g.nx + 1) as f64 || v > (g.np + 1) as f64 {
        return 0.0;
    }
    let (iu, iv) = (u.floor() as i64, v.floor() as i64);
    let mut acc = 0.0;
    for a in (iu - 1)..=(iu + 2) {
        if a < 0 || a >= g.nx as i64 {
            continue;
        }
        let wa = keys(u - a as f64);
        for b in (iv - 1)..=(iv + 2) {
            if b < 0 || b >= g.np as i64 {
                continue;
            }
            acc += wa * keys(v - b as f64) * values[(a as usize, b as usize)];
        }
    }
    acc
}

/// Poisson bracket `{f, g} = ∂ₓf ∂ₚg − ∂ₚf ∂ₓg` of the linear functions
/// `f = a·z`, `g = b·z` given by their gradients.
pub fn linear_poisson_bracket(f: (f64, f64), g: (f64, f64)) -> f64 {
    f.0 * g.1 - f.1 * g.0
}

/// Jacobian determinant of the map and the Poisson bracket of its
/// transformed coordinates `{R(x), R(p)}`.
pub fn jacobian_and_bracket(map: &AffineMap2D) -> (f64, f64) {
    let m = map.linear;
    let jac = m.determinant();
    let bracket = linear_poisson_bracket((m[(0, 0)], m[(0, 1)]), (m[(1, 0)], m[(1, 1)]));
    (jac, bracket)
}

/// `∬ (x − x̄)ⁿ (p − p̄)ᵐ ρ dx dp`.
pub fn central_moment(rho: &PhaseDistribution, n: u32, m: u32) -> Result<f64> {
    if n + m > 8 {
        return Err(Error::domain(format!("moment order {} exceeds the grid accuracy bound 8", n + m)));
    }
    let (mx, mp) = rho.mean();
    Ok(rho.grid.integrate_with(&rho.values, |x, p| (x - mx).powi(n as i32) * (p - mp).powi(m as i32)))
}

/// Factor a stretching map as `R = T ∘ U` with `T` the pure stretch by
/// `λ = det R` and `U` canonical.
pub fn decompose_stretch(map: &AffineMap2D) -> Result<(AffineMap2D, AffineMap2D)> {
    let lambda = map.determinant();
    if !(lambda > 1.0) {
        return Err(Error::domain(format!("not a stretching map: Jacobian {lambda} must exceed 1")));
    }
    let t = AffineMap2D::pure_stretch(lambda)?;
    let u = t.inverse()?.compose(map);
    Ok((u, t))
}
