use num_complex::Complex64 as C64;
use proptest::prelude::*;
use stretchlab::fock::{FockState, SystemUnits};
use stretchlab::grid::PhaseGrid;
use stretchlab::quasiprob::*;

const DIM: usize = 40;

fn grid() -> PhaseGrid {
    PhaseGrid::symmetric(10.0, 10.0, 128).unwrap()
}

#[test]
fn wigner_marginal_is_position_density() {
    let u = SystemUnits::default();
    let g = grid();
    let s = FockState::cat(DIM, C64::new(1.2, 0.4)).unwrap();
    let w = wigner_from_state(&s, &g, &u).unwrap();
    let rho_x = position_density(&s, &g, &u);
    for (a, b) in w.x_marginal().iter().zip(&rho_x) {
        assert!((a - b).abs() < 1e-8);
    }
    let rho_p = momentum_density(&s, &g, &u);
    for (a, b) in w.p_marginal().iter().zip(&rho_p) {
        assert!((a - b).abs() < 1e-8);
    }
}

#[test]
fn number_state_wigner_at_origin() {
    let u = SystemUnits::default();
    // periodic grid: node n/2 sits on the origin
    let g = PhaseGrid::symmetric(8.0, 8.0, 96).unwrap();
    for n in 0..5 {
        let w = wigner_from_state(&FockState::fock(DIM, n).unwrap(), &g, &u).unwrap();
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        assert!((w.values[(48, 48)] - sign / std::f64::consts::PI).abs() < 1e-10, "n = {n}");
    }
}

#[test]
fn coarse_grids_are_refused() {
    let u = SystemUnits::default();
    let g = PhaseGrid::symmetric(8.0, 8.0, 16).unwrap();
    assert!(wigner_from_state(&FockState::fock(DIM, 20).unwrap(), &g, &u).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn husimi_is_a_probability_density(c0 in -1.0..1.0f64, c1 in -1.0..1.0f64, c2 in -1.0..1.0f64, c3 in -1.0..1.0f64) {
        let mut psi = nalgebra::DVector::<C64>::zeros(DIM);
        for (n, c) in [c0, c1, c2, c3].into_iter().enumerate() {
            psi[n] = C64::new(c, 0.5 * c * n as f64);
        }
        prop_assume!(psi.norm() > 0.1);
        let s = FockState::pure(&(psi.unscale(psi.norm()))).unwrap();
        let q = husimi_from_state(&s, &grid(), &SystemUnits::default()).unwrap();
        prop_assert!(q.min_value() >= TOL_HUSIMI_NEG);
        prop_assert!((q.norm() - 1.0).abs() < TOL_NORM);
        prop_assert!(q.max_value() <= 1.0 / (2.0 * std::f64::consts::PI) + 1e-9);
    }

    #[test]
    fn weierstrass_of_wigner_is_husimi(re in -1.5..1.5f64, im in -1.5..1.5f64, cat in proptest::bool::ANY) {
        let u = SystemUnits::default();
        let alpha = C64::new(re, im);
        let s = if cat { FockState::cat(DIM, alpha) } else { FockState::coherent(DIM, alpha) }.unwrap();
        let w = wigner_from_state(&s, &grid(), &u).unwrap();
        let q = husimi_from_state(&s, &grid(), &u).unwrap();
        prop_assert!(weierstrass(&w).unwrap().sup_distance(&q).unwrap() < 1e-8);
    }

    #[test]
    fn husimi_moments_are_antinormal(re in -1.5..1.5f64, im in -1.5..1.5f64) {
        let alpha = C64::new(re, im);
        let q = husimi_from_state(&FockState::coherent(DIM, alpha).unwrap(), &grid(), &SystemUnits::default()).unwrap();
        // ⟨a a†⟩ = |α|² + 1 for a coherent state
        prop_assert!((q.alpha_moment(1, 0) - alpha).norm() < 1e-8);
        prop_assert!((q.alpha_moment(1, 1).re - alpha.norm_sqr() - 1.0).abs() < 1e-8, "{}", q.alpha_moment(1, 1));
    }

    #[test]
    fn units_rescale_the_grid_not_the_state(hbar in 0.2..3.0f64, mass in 0.5..2.0f64, omega in 0.5..2.0f64) {
        let u = SystemUnits::new(hbar, mass, omega).unwrap();
        let g = PhaseGrid::natural(&u, 8.0, 96).unwrap();
        let w = wigner_from_state(&FockState::fock(DIM, 1).unwrap(), &g, &u).unwrap();
        prop_assert!((w.norm() - 1.0).abs() < TOL_NORM);
        prop_assert!((w.min_value() + 1.0 / (std::f64::consts::PI * hbar)).abs() < 1e-2 / hbar);
    }
}
