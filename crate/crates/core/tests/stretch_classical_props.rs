use proptest::prelude::*;
use stretchlab::fock::SystemUnits;
use stretchlab::grid::PhaseGrid;
use stretchlab::stretch_classical::*;

const TOL_ENTROPY: f64 = 2e-3;

fn grid() -> PhaseGrid {
    PhaseGrid::symmetric(16.0, 16.0, 256).unwrap()
}

// fourth moments at 1e-4 need the cubic interpolant's O(h³) error an order lower
fn fine_grid() -> PhaseGrid {
    PhaseGrid::symmetric(16.0, 16.0, 512).unwrap()
}

#[derive(Debug, Clone)]
enum Family {
    Gaussian { center: (f64, f64), sx: f64, sp: f64 },
    Plateau { center: (f64, f64), half: (f64, f64), edge: f64 },
    Bimodal { sep: f64, sx: f64, sp: f64 },
}

impl Family {
    fn build(&self) -> PhaseDistribution {
        let (g, u) = (grid(), SystemUnits::default());
        match *self {
            Family::Gaussian { center, sx, sp } => PhaseDistribution::gaussian(g, u, center, sx, sp).unwrap(),
            Family::Plateau { center, half, edge } => PhaseDistribution::plateau(g, u, center, half, edge).unwrap(),
            Family::Bimodal { sep, sx, sp } => {
                let a = PhaseDistribution::gaussian(g, u, (-sep, 0.0), sx, sp).unwrap();
                let b = PhaseDistribution::gaussian(g, u, (sep, 0.3), sx, sp).unwrap();
                a.mix(&b).unwrap()
            }
        }
    }
}

fn family() -> impl Strategy<Value = Family> {
    let c = (-0.8..0.8f64, -0.8..0.8f64);
    prop_oneof![
        (c.clone(), 0.6..0.75f64, 0.6..0.75f64).prop_map(|(center, sx, sp)| Family::Gaussian { center, sx, sp }),
        (c, (0.6..1.1f64, 0.6..1.1f64), 0.25..0.4f64)
            .prop_map(|(center, half, edge)| Family::Plateau { center, half, edge }),
        (0.8..1.3f64, 0.6..0.7f64, 0.6..0.7f64).prop_map(|(sep, sx, sp)| Family::Bimodal { sep, sx, sp }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn stretch_adds_log_lambda(f in family(), k in 0usize..3) {
        let lambda = [2.0, 4.0, 9.0][k];
        let rho = f.build();
        let out = apply_map(&rho, &AffineMap2D::pure_stretch(lambda).unwrap()).unwrap();
        let gain = shannon_entropy(&out) - shannon_entropy(&rho);
        prop_assert!((gain - lambda.ln()).abs() < TOL_ENTROPY, "gain {gain} vs ln {lambda}");
    }

    #[test]
    fn canonical_maps_keep_entropy(f in family(), theta in -3.1..3.1f64, r in 0.7..1.4f64, shear in -0.5..0.5f64) {
        let rho = f.build();
        let s0 = shannon_entropy(&rho);
        for map in [
            AffineMap2D::rotation(theta),
            AffineMap2D::squeeze(r).unwrap(),
            AffineMap2D::linear(nalgebra::Matrix2::new(1.0, shear, 0.0, 1.0)).unwrap(),
        ] {
            let out = apply_map(&rho, &map).unwrap();
            prop_assert!((shannon_entropy(&out) - s0).abs() < TOL_ENTROPY);
        }
    }

    #[test]
    fn central_moments_scale_with_stretch(sx in 0.6..0.75f64, sp in 0.6..0.75f64, sep in 0.0..1.0f64, k in 0usize..3) {
        let lambda = [2.0, 4.0, 9.0][k];
        let (g, u) = (fine_grid(), SystemUnits::default());
        let a = PhaseDistribution::gaussian(g, u, (-sep, 0.0), sx, sp).unwrap();
        let rho = a.mix(&PhaseDistribution::gaussian(g, u, (sep, 0.3), sx, sp).unwrap()).unwrap();
        let out = apply_map(&rho, &AffineMap2D::pure_stretch(lambda).unwrap()).unwrap();
        for n in 0..=4u32 {
            for m in 0..=(4 - n) {
                let before = central_moment(&rho, n, m).unwrap();
                let after = central_moment(&out, n, m).unwrap();
                let expect = before * lambda.powf(f64::from(n + m) / 2.0);
                // odd moments of near-symmetric shapes vanish; compare on the scale of the even ones
                let scale = expect.abs().max(lambda.powf(f64::from(n + m) / 2.0) * 1e-2);
                prop_assert!((after - expect).abs() <= 1e-4 * scale, "({n},{m}): {after} vs {expect}");
            }
        }
    }

    #[test]
    fn disjoint_mixture_entropy(h1 in 0.6..1.0f64, h2 in 0.6..1.0f64, e in 0.25..0.35f64) {
        let (g, u) = (grid(), SystemUnits::default());
        let a = PhaseDistribution::plateau(g, u, (-4.0, 0.0), (h1, h1), e).unwrap();
        let b = PhaseDistribution::plateau(g, u, (4.0, 1.0), (h2, 0.8), e).unwrap();
        let s = shannon_entropy(&a.mix(&b).unwrap());
        let expect = 2f64.ln() + 0.5 * (shannon_entropy(&a) + shannon_entropy(&b));
        prop_assert!((s - expect).abs() < TOL_ENTROPY);
    }
}
