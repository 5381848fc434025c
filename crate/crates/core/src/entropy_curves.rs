//! Entropy–uncertainty curves of Gaussian states.
//!
//! `sigma` is the uncertainty product `Δx·Δp` in units of `ħ`. The
//! classical curve is measured against the phase-space cell `h = 2πħ`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest uncertainty product a quantum state can have.
pub const HEISENBERG: f64 = 0.5;

/// `S_C(Σ) = ln Σ + 1`.
pub fn s_classical(sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::domain(format!("uncertainty must be positive, got {sigma}")));
    }
    Ok(sigma.ln() + 1.0)
}

/// `S_Q(Σ) = (Σ+½)ln(Σ+½) − (Σ−½)ln(Σ−½)`, zero at the Heisenberg bound.
pub fn s_quantum(sigma: f64) -> Result<f64> {
    if !(sigma >= HEISENBERG && sigma.is_finite()) {
        return Err(Error::domain(format!("uncertainty {sigma} violates the Heisenberg bound ħ/2")));
    }
    if sigma == HEISENBERG {
        return Ok(0.0);
    }
    if sigma < 2.0 {
        let lo = sigma - 0.5;
        return Ok((sigma + 0.5) * (sigma + 0.5).ln() - lo * lo.ln());
    }
    // ln(Σ ± ½) = ln Σ + ln(1 ± 1/2Σ) avoids cancelling two large terms
    let u = 0.5 / sigma;
    Ok(sigma.ln() + (sigma + 0.5) * u.ln_1p() - (sigma - 0.5) * (-u).ln_1p())
}

/// `S_λQ(Σ) = S_Q(λΣ) − ln λ`.
pub fn s_quantum_rescaled(sigma: f64, lambda: f64) -> Result<f64> {
    if !(lambda >= 1.0 && lambda.is_finite()) {
        return Err(Error::domain(format!("stretch factor must be ≥ 1, got {lambda}")));
    }
    if !(sigma >= HEISENBERG / lambda) {
        return Err(Error::domain(format!("λΣ = {} is below ħ/2", lambda * sigma)));
    }
    // λ·(½/λ) can round to just under ½
    Ok(s_quantum((lambda * sigma).max(HEISENBERG))? - lambda.ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Classical,
    Quantum,
    Rescaled(f64),
}

impl CurveKind {
    pub fn entropy(&self, sigma: f64) -> Result<f64> {
        match *self {
            CurveKind::Classical => s_classical(sigma),
            CurveKind::Quantum => s_quantum(sigma),
            CurveKind::Rescaled(lambda) => s_quantum_rescaled(sigma, lambda),
        }
    }

    /// Smallest admissible uncertainty (exclusive for the classical curve).
    pub fn sigma_floor(&self) -> f64 {
        match *self {
            CurveKind::Classical => 0.0,
            CurveKind::Quantum => HEISENBERG,
            CurveKind::Rescaled(lambda) => HEISENBERG / lambda,
        }
    }

    /// Infimum of the curve.
    pub fn entropy_floor(&self) -> f64 {
        match *self {
            CurveKind::Classical => f64::NEG_INFINITY,
            CurveKind::Quantum => 0.0,
            CurveKind::Rescaled(lambda) => -lambda.ln(),
        }
    }
}

/// Inverse `Σ(S)` of a curve, by bisection in `ln Σ`.
pub fn sigma_from_entropy(s: f64, kind: CurveKind) -> Result<f64> {
    if !s.is_finite() {
        return Err(Error::domain(format!("entropy must be finite, got {s}")));
    }
    if let CurveKind::Rescaled(l) = kind {
        if !(l >= 1.0 && l.is_finite()) {
            return Err(Error::domain(format!("stretch factor must be ≥ 1, got {l}")));
        }
    }
    let floor = kind.entropy_floor();
    if s < floor {
        return Err(Error::domain(format!("entropy {s} is below the curve minimum {floor}")));
    }
    if s == floor {
        return Ok(kind.sigma_floor());
    }
    let mut lo = match kind {
        CurveKind::Classical => 1e-300,
        _ => kind.sigma_floor(),
    };
    let mut hi = lo.max(1.0);
    while kind.entropy(hi)? < s {
        lo = hi;
        hi *= 2.0;
    }
    while kind.entropy(lo)? > s {
        // only reachable for the classical curve
        hi = lo;
        lo *= 0.5;
    }
    for _ in 0..400 {
        let mid = if lo > 0.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if mid <= lo || mid >= hi {
            break;
        }
        if kind.entropy(mid)? < s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (sl, sh) = (kind.entropy(lo)?, kind.entropy(hi)?);
    let found = if (sl - s).abs() <= (sh - s).abs() { lo } else { hi };
    let resid = (kind.entropy(found)? - s).abs();
    if resid > 1e-10 {
        return Err(Error::Numerical(format!("inversion stalled with residual {resid:.3e}")));
    }
    Ok(found)
}

/// One sampled point of the curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub sigma: f64,
    pub s_classical: f64,
    /// `None` below the Heisenberg bound.
    pub s_quantum: Option<f64>,
    pub difference: Option<f64>,
    /// One entry per requested λ; `None` where `λΣ < ½`.
    pub rescaled: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveTable {
    pub lambdas: Vec<f64>,
    pub rows: Vec<CurveRow>,
}

/// Log-spaced samples of all curves on `[sigma_min, sigma_max]`.
pub fn sample_curves(sigma_min: f64, sigma_max: f64, points: usize, lambdas: &[f64]) -> Result<CurveTable> {
    if !(sigma_min > 0.0 && sigma_max > sigma_min) || points < 2 {
        return Err(Error::domain(format!("need 0 < sigma_min < sigma_max and ≥ 2 points, got [{sigma_min}, {sigma_max}] with {points}")));
    }
    if let Some(l) = lambdas.iter().find(|l| !(**l >= 1.0 && l.is_finite())) {
        return Err(Error::domain(format!("stretch factor must be ≥ 1, got {l}")));
    }
    let ratio = (sigma_max / sigma_min).ln() / (points - 1) as f64;
    let rows = (0..points)
        .map(|k| {
            let sigma = if k + 1 == points { sigma_max } else { sigma_min * (ratio * k as f64).exp() };
            let sc = s_classical(sigma)?;
            let sq = s_quantum(sigma).ok();
            let rescaled = lambdas.iter().map(|&l| s_quantum_rescaled(sigma, l).ok()).collect();
            Ok(CurveRow { sigma, s_classical: sc, s_quantum: sq, difference: sq.map(|q| sc - q), rescaled })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CurveTable { lambdas: lambdas.to_vec(), rows })
}

impl CurveTable {
    /// Columns `sigma,s_classical,s_quantum,difference,s_rescaled_<λ>...`;
    /// undefined entries are left empty.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut header = String::from("sigma,s_classical,s_quantum,difference");
        for l in &self.lambdas {
            header.push_str(&format!(",s_rescaled_{l}"));
        }
        writeln!(out, "{header}")?;
        let cell = |v: Option<f64>| v.map(|x| format!("{x:.15e}")).unwrap_or_default();
        for r in &self.rows {
            let mut line = format!("{:.15e},{:.15e},{},{}", r.sigma, r.s_classical, cell(r.s_quantum), cell(r.difference));
            for v in &r.rescaled {
                line.push(',');
                line.push_str(&cell(*v));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn classical_reference_values() {
        assert_abs_diff_eq!(s_classical((-1f64).exp()).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s_classical(1.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s_classical(2.0).unwrap(), 2f64.ln() + 1.0, epsilon = 1e-15);
        assert!(s_classical(0.1).unwrap() < 0.0);
        assert!(s_classical(0.0).is_err());
        assert!(s_classical(-1.0).is_err());
    }

    #[test]
    fn quantum_reference_values() {
        assert_eq!(s_quantum(0.5).unwrap(), 0.0);
        assert_abs_diff_eq!(s_quantum(1.5).unwrap(), 2.0 * 2f64.ln(), epsilon = 1e-14);
        let oracle = 2.5 * 2.5f64.ln() - 1.5 * 1.5f64.ln();
        assert_abs_diff_eq!(s_quantum(2.0).unwrap(), oracle, epsilon = 1e-14);
        assert_abs_diff_eq!(s_quantum(2.0).unwrap(), 1.68253, epsilon = 5e-6);
        assert!(matches!(s_quantum(0.49), Err(Error::Domain(_))));
    }

    #[test]
    fn stable_branch_agrees_with_direct_form() {
        for sigma in [2.0, 3.7, 20.0, 150.0, 900.0] {
            let direct = (sigma + 0.5) * (sigma + 0.5f64).ln() - (sigma - 0.5) * (sigma - 0.5f64).ln();
            assert_abs_diff_eq!(s_quantum(sigma).unwrap(), direct, epsilon = 1e-11);
        }
    }

    #[test]
    fn rescaled_reference_values() {
        for sigma in [0.5, 0.9, 3.0] {
            assert_eq!(s_quantum_rescaled(sigma, 1.0).unwrap(), s_quantum(sigma).unwrap());
        }
        let gap = (s_quantum_rescaled(1.0, 10.0).unwrap() - s_classical(1.0).unwrap()).abs();
        assert!(gap < 5e-3, "{gap}");
        assert!(s_quantum_rescaled(0.01, 10.0).is_err());
        assert!(s_quantum_rescaled(1.0, 0.5).is_err());
    }

    #[test]
    fn rescaled_zero_moves_towards_classical_zero() {
        let zeros: Vec<f64> = [1.0, 10.0, 100.0]
            .iter()
            .map(|&l| sigma_from_entropy(0.0, CurveKind::Rescaled(l)).unwrap())
            .collect();
        assert_abs_diff_eq!(zeros[0], 0.5, epsilon = 1e-12);
        let target = (-1f64).exp();
        assert!(zeros[0] > zeros[1] && zeros[1] > zeros[2] && zeros[2] > target);
        assert!((zeros[2] - target).abs() < (zeros[1] - target).abs());
        assert!((zeros[2] - target).abs() < 1e-3);
    }

    #[test]
    fn inverse_reference_values() {
        assert_abs_diff_eq!(sigma_from_entropy(1.0, CurveKind::Classical).unwrap(), 1.0, epsilon = 1e-10);
        assert_eq!(sigma_from_entropy(0.0, CurveKind::Quantum).unwrap(), 0.5);
        assert_abs_diff_eq!(sigma_from_entropy(2.0 * 2f64.ln(), CurveKind::Quantum).unwrap(), 1.5, epsilon = 1e-9);
        assert!(sigma_from_entropy(-0.1, CurveKind::Quantum).is_err());
        assert!(sigma_from_entropy(-3.0, CurveKind::Rescaled(10.0)).is_err());
        assert!(sigma_from_entropy(-5.0, CurveKind::Classical).is_ok());
    }

    #[test]
    fn dominance_on_dense_log_grid() {
        let t = sample_curves(0.5, 1e3, 10_000, &[]).unwrap();
        let mut prev = f64::INFINITY;
        for r in &t.rows {
            let d = r.difference.unwrap();
            assert!(d > 0.0, "Σ = {}", r.sigma);
            assert!(d < prev, "gap not decreasing at Σ = {}", r.sigma);
            prev = d;
        }
    }

    #[test]
    fn convergence_thresholds() {
        let gap = |s: f64| s_classical(s).unwrap() - s_quantum(s).unwrap();
        assert!(gap(2.0) < 0.011);
        // the gap is 1/(24Σ²) + 1/(320Σ⁴) + …, so it falls below 1e−4
        // just past Σ ≈ 20.4
        let series = |s: f64| 1.0 / (24.0 * s * s) + 1.0 / (320.0 * s.powi(4));
        assert_abs_diff_eq!(gap(20.0), series(20.0), epsilon = 1e-9);
        assert!(gap(20.0) > 1e-4);
        assert!(gap(20.5) < 1e-4);
    }

    #[test]
    fn curve_csv_layout() {
        let t = sample_curves(0.3, 8.0, 5, &[2.0, 10.0]).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "sigma,s_classical,s_quantum,difference,s_rescaled_2,s_rescaled_10");
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first.len(), 6);
        assert!(first[2].is_empty() && first[3].is_empty());
        assert!(!first[4].is_empty());
    }

    proptest! {
        #[test]
        fn quantum_curve_strictly_increasing(a in 0.5f64..50.0, b in 0.5f64..50.0) {
            prop_assume!((a - b).abs() > 1e-6);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(s_quantum(lo).unwrap() < s_quantum(hi).unwrap());
        }

        #[test]
        fn inversion_round_trips(s in 0.0f64..8.0, lambda in 1.0f64..200.0) {
            for kind in [CurveKind::Classical, CurveKind::Quantum, CurveKind::Rescaled(lambda)] {
                let sigma = sigma_from_entropy(s, kind).unwrap();
                prop_assert!((kind.entropy(sigma).unwrap() - s).abs() < 1e-10);
            }
        }

        #[test]
        fn rescaled_gap_shrinks_with_lambda(sigma in 0.6f64..20.0) {
            let gaps: Vec<f64> = [1.0, 2.0, 10.0, 100.0]
                .iter()
                .map(|&l| (s_quantum_rescaled(sigma, l).unwrap() - s_classical(sigma).unwrap()).abs())
                .collect();
            prop_assert!(gaps.windows(2).all(|w| w[1] < w[0]));
        }
    }
}
