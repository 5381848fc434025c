use num_complex::Complex64 as C64;
use proptest::prelude::*;
use stretchlab::fock::*;
use stretchlab::grid::PhaseGrid;
use stretchlab::quasiprob::*;
use stretchlab::stretch_quantum::*;

const DIM: usize = 48;

fn units() -> SystemUnits {
    SystemUnits::default()
}

fn entropy_trace(s: &FockState, spec: &LindbladSpec, t: f64) -> Vec<f64> {
    let mut out = vec![von_neumann_entropy(s).unwrap()];
    lindblad_evolve_observed(s, spec, t, DEFAULT_RATE_STEP / spec.max_rate(), |_, st| {
        out.push(von_neumann_entropy(st)?);
        Ok(())
    })
    .unwrap();
    out
}

#[test]
fn amplifier_entropy_never_decreases() {
    let spec = LindbladSpec::amplifier(DIM, 1.0).unwrap();
    let states = [
        FockState::vacuum(DIM).unwrap(),
        FockState::fock(DIM, 1).unwrap(),
        FockState::coherent(DIM, C64::new(0.6, -0.4)).unwrap(),
        FockState::cat(DIM, C64::new(1.2, 0.0)).unwrap(),
        FockState::thermal(DIM, 0.8).unwrap(),
    ];
    for s in &states {
        let trace = entropy_trace(s, &spec, 2f64.ln());
        assert!(trace.windows(2).all(|w| w[1] > w[0] - 1e-10));
        assert!(trace.last().unwrap() - trace[0] > 0.1);
    }
}

#[test]
fn attenuator_lowers_some_entropy() {
    let spec = LindbladSpec::attenuator(DIM, 1.0).unwrap();
    assert!(!entropy_criterion(&spec));
    let trace = entropy_trace(&FockState::thermal(DIM, 1.0).unwrap(), &spec, 2f64.ln());
    assert!(trace.last().unwrap() < &(trace[0] - 0.1));
}

#[test]
fn symmetric_moments_do_not_scale() {
    // Wigner moments are symmetrically ordered: ⟨(aa† + a†a)/2⟩ of the
    // stretched vacuum is λ − ½, not λ·½
    let u = units();
    let g = PhaseGrid::symmetric(14.0, 14.0, 128).unwrap();
    let vac = FockState::vacuum(DIM).unwrap();
    let before = wigner_from_state(&vac, &g, &u).unwrap().alpha_moment(1, 1).re;
    assert!((before - 0.5).abs() < 1e-10);
    for lambda in [1.5, 2.0, 4.0] {
        let w = wigner_from_state(&amplify(&vac, lambda).unwrap(), &g, &u).unwrap();
        let sym = w.alpha_moment(1, 1).re;
        assert!((sym - (lambda - 0.5)).abs() < 1e-4, "{sym}");
        assert!((sym - lambda * before - 0.5 * (lambda - 1.0)).abs() < 1e-4);
    }
}

#[test]
fn fock_one_negativity_is_suppressed() {
    let u = units();
    let src = PhaseGrid::symmetric(8.0, 8.0, 128).unwrap();
    let w1 = wigner_from_state(&FockState::fock(DIM, 1).unwrap(), &src, &u).unwrap();
    let mut prev = w1.min_value();
    for lambda in [1.5, 2.0, 4.0, 8.0] {
        let (hx, hp) = stretch_half_widths(&u, QuasiKind::Wigner, 0.0, 1.0, lambda);
        let w = stretch_w_onto(&w1, lambda, &PhaseGrid::symmetric(hx, hp, 128).unwrap()).unwrap();
        assert!(w.min_value() > prev && w.min_value() < 0.0);
        assert!(w.min_value().abs() <= w1.min_value().abs() / (0.9 * lambda));
        prev = w.min_value();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn channel_scales_antinormal_moments(re in -1.0..1.0f64, im in -1.0..1.0f64, lambda in 1.2..3.0f64) {
        let s = FockState::coherent(DIM, C64::new(re, im)).unwrap();
        let out = amplify(&s, lambda).unwrap();
        for total in 0..=4u32 {
            for n in 0..=total {
                let m = total - n;
                let before = antinormal_moment(&s, n, m).unwrap();
                let after = antinormal_moment(&out, n, m).unwrap();
                let expect = before * lambda.powf(f64::from(total) / 2.0);
                let scale = expect.norm().max(lambda.powf(f64::from(total) / 2.0) * 1e-3);
                prop_assert!((after - expect).norm() < 1e-3 * scale, "({n},{m})");
            }
        }
    }

    #[test]
    fn stretched_husimi_moments_scale(re in -1.0..1.0f64, im in -1.0..1.0f64, lambda in 1.0..4.0f64) {
        let u = units();
        let g = PhaseGrid::symmetric(8.0, 8.0, 128).unwrap();
        let q1 = husimi_from_state(&FockState::coherent(DIM, C64::new(re, im)).unwrap(), &g, &u).unwrap();
        let (hx, hp) = stretch_half_widths(&u, QuasiKind::Husimi, re.hypot(im), 0.0, lambda);
        let q = stretch_q_onto(&q1, lambda, &PhaseGrid::symmetric(hx, hp, 192).unwrap()).unwrap();
        prop_assert!((q.norm() - 1.0).abs() < 1e-6);
        for (n, m) in [(1, 0), (0, 1), (1, 1), (2, 0), (2, 1), (2, 2), (1, 3)] {
            let total = f64::from(n + m);
            let expect = q1.alpha_moment(n, m) * lambda.powf(total / 2.0);
            let scale = expect.norm().max(lambda.powf(total / 2.0) * 1e-2);
            prop_assert!((q.alpha_moment(n, m) - expect).norm() < 1e-4 * scale, "({n},{m})");
        }
    }

    #[test]
    fn gaussian_filter_cross_check(re in -1.0..1.0f64, lambda in 1.2..4.0f64) {
        let u = units();
        let src = PhaseGrid::symmetric(8.0, 8.0, 128).unwrap();
        let w1 = wigner_from_state(&FockState::cat(DIM, C64::new(re, 0.3)).unwrap(), &src, &u).unwrap();
        let (hx, hp) = stretch_half_widths(&u, QuasiKind::Wigner, re.hypot(0.3), 0.0, lambda);
        let w = stretch_w_onto(&w1, lambda, &PhaseGrid::symmetric(hx, hp, 128).unwrap()).unwrap();
        prop_assert!(filter_ratio_deviation(&w1, &w, lambda, 1e-6).unwrap() < 1e-3);
    }

    #[test]
    fn amplifier_specs_satisfy_entropy_criterion(g1 in 0.1..3.0f64, g2 in 0.1..3.0f64) {
        let a = build_ladder(16).unwrap();
        let h = FockOperator::number(16).unwrap();
        let spec = LindbladSpec::new(h.clone(), vec![(g1, a.adjoint()), (g2, FockOperator::identity(16).unwrap())], 1.0).unwrap();
        prop_assert!(entropy_criterion(&spec));
        let spec = LindbladSpec::new(h, vec![(g1, a.adjoint()), (g1 + g2, a)], 1.0).unwrap();
        prop_assert!(!entropy_criterion(&spec));
    }
}
