use std::f64::consts::SQRT_2;
use std::path::Path;
use std::process::ExitCode;

use num_complex::Complex64 as C64;
use serde::Serialize;

use stretchlab::case_studies::{self, slits, PolynomialPotential, Qubit, RadianceParams};
use stretchlab::entropy_curves::sample_curves;
use stretchlab::fock::{FockState, SystemUnits};
use stretchlab::grid::PhaseGrid;
use stretchlab::moyal_dynamics::{self, HamiltonianSpec};
use stretchlab::quasiprob::{self, QuasiDistribution, QuasiKind};
use stretchlab::stretch_quantum::{self as quantum};
use stretchlab::verify::{self, Fault, VerifyConfig};
use stretchlab::Error;

use crate::output::{csv_row, Checks, CliError, CliResult, RunDir};
use crate::*;

/// Everything a run consumed, echoed into each sidecar.
#[derive(Serialize)]
struct Echo<'a, A: Serialize> {
    command: &'a str,
    params: &'a A,
    units: UnitArgs,
}

pub fn run(cli: &Cli, root: &Path) -> CliResult<ExitCode> {
    let u = SystemUnits::new(cli.units.hbar, cli.units.mass, cli.units.omega)?;
    let name = cli.command.name();
    macro_rules! dispatch {
        ($args:expr, $f:path) => {{
            let echo = Echo { command: name, params: $args, units: cli.units };
            let dir = RunDir::create(root, name, &echo)?;
            $f($args, &u, &dir)
        }};
    }
    match &cli.command {
        Command::Curves(a) => dispatch!(a, curves),
        Command::StretchSweep(a) => dispatch!(a, stretch_sweep),
        Command::WignerDemo(a) => dispatch!(a, wigner_demo),
        Command::Blackbody(a) => dispatch!(a, blackbody),
        Command::Thermal(a) => dispatch!(a, thermal),
        Command::Qubit(a) => dispatch!(a, qubit),
        Command::Moyal(a) => dispatch!(a, moyal),
        Command::VerifyAll(a) => dispatch!(a, verify_all),
    }
}

fn require(ok: bool, msg: impl Into<String>) -> CliResult<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Usage(msg.into()))
    }
}

fn curves<C: Serialize>(a: &CurvesArgs, _: &SystemUnits, dir: &RunDir<C>) -> CliResult<ExitCode> {
    let table = sample_curves(a.sigma_min, a.sigma_max, a.points, &a.lambdas)?;
    dir.write_with("curves.csv", |w| table.write_csv(w))?;
    let mut checks = Checks::default();
    let bad = table.rows.iter().filter(|r| r.difference.is_some_and(|d| d <= 0.0)).count();
    checks.expect(bad == 0, "classical entropy above quantum", format!("{bad} rows with S_C ≤ S_Q"));
    checks.finish(dir)
}

/// `(largest |α| feature, thermal-like spread)` used to size grids.
fn state_extent(s: &StateArgs) -> (f64, f64) {
    match s.state {
        StateKind::Vacuum => (0.0, 0.0),
        StateKind::Fock1 => (0.0, 1.0),
        StateKind::Coherent | StateKind::Cat => (s.alpha.abs(), 0.0),
        StateKind::Thermal => (0.0, s.nbar),
    }
}

fn build_state(s: &StateArgs) -> CliResult<FockState> {
    let alpha = C64::new(s.alpha, 0.0);
    Ok(match s.state {
        StateKind::Vacuum => FockState::vacuum(s.dim)?,
        StateKind::Fock1 => FockState::fock(s.dim, 1)?,
        StateKind::Coherent => FockState::coherent(s.dim, alpha)?,
        StateKind::Cat => FockState::cat(s.dim, alpha)?,
        StateKind::Thermal => FockState::thermal(s.dim, s.nbar)?,
    })
}

fn source_grid(s: &StateArgs, u: &SystemUnits, n: usize) -> CliResult<PhaseGrid> {
    let (peak, nth) = state_extent(s);
    let (hx, hp) = quantum::stretch_half_widths(u, QuasiKind::Husimi, peak, nth, 1.0);
    // at least 5.5σ of the ⟨a†a⟩ spread, and never below ±8 natural units
    let nbar = build_state(s)?.mean_occupation().max(0.0);
    let floor = (5.5 * (nbar + 0.5).sqrt()).max(8.0) * u.length_scale().max(u.momentum_scale());
    Ok(PhaseGrid::symmetric(hx.max(floor), hp.max(floor), n)?)
}

fn stretch_sweep<C: Serialize>(a: &SweepArgs, u: &SystemUnits, dir: &RunDir<C>) -> CliResult<ExitCode> {
    require(!a.lambdas.is_empty(), "--lambdas must not be empty")?;
    let s = build_state(&a.state)?;
    let (peak, nth) = state_extent(&a.state);
    let src = source_grid(&a.state, u, a.grid)?;
    let w1 = quasiprob::wigner_from_state(&s, &src, u)?;
    let q1 = quasiprob::husimi_from_state(&s, &src, u)?;
    let reports = quantum::stretch_sweep(&s, &w1, &q1, &a.lambdas, |lambda| {
        let (hx, hp) = quantum::stretch_half_widths(u, QuasiKind::Wigner, peak, nth, lambda);
        PhaseGrid::symmetric(hx, hp, a.grid)
    })?;
    dir.write_json("stretch_sweep.json", &reports)?;

    let mut checks = Checks::default();
    for r in &reports {
        checks.expect(
            r.entropy_after >= r.entropy_before - 1e-10,
            "entropy increases",
            format!("λ={}: {} → {}", r.lambda, r.entropy_before, r.entropy_after),
        );
    }
    let mut by_lambda: Vec<_> = reports.iter().collect();
    by_lambda.sort_by(|x, y| x.lambda.total_cmp(&y.lambda));
    if w1.min_value() < quasiprob::NEG_THRESHOLD {
        let mins: Vec<f64> = std::iter::once(w1.min_value()).chain(by_lambda.iter().map(|r| r.min_wigner)).collect();
        checks.expect(mins.windows(2).all(|w| w[1] >= w[0]), "negativity suppression", format!("min W by λ: {mins:?}"));
    }
    let dists: Vec<f64> = by_lambda.iter().map(|r| r.sup_dist_w_q).collect();
    checks.expect(dists.windows(2).all(|w| w[1] <= w[0]), "W_λ approaches Q_λ", format!("sup|W−Q| by λ: {dists:?}"));
    checks.finish(dir)
}

fn write_grid<C: Serialize>(dir: &RunDir<C>, name: &str, q: &QuasiDistribution) -> CliResult<()> {
    dir.write_with(name, |w| q.write_csv(w))?;
    Ok(())
}

#[derive(Serialize)]
struct DemoSummary {
    lambda: f64,
    wigner: quasiprob::NegativityReport,
    wigner_stretched: quasiprob::NegativityReport,
    husimi_min: f64,
    husimi_stretched_min: f64,
    sup_dist_stretched_w_q: f64,
}

fn wigner_demo<C: Serialize>(a: &DemoArgs, u: &SystemUnits, dir: &RunDir<C>) -> CliResult<ExitCode> {
    let s = build_state(&a.state)?;
    let (peak, nth) = state_extent(&a.state);
    let src = source_grid(&a.state, u, a.grid)?;
    let w = quasiprob::wigner_from_state(&s, &src, u)?;
    let q = quasiprob::husimi_from_state(&s, &src, u)?;
    let (hx, hp) = quantum::stretch_half_widths(u, QuasiKind::Wigner, peak, nth, a.lambda);
    let target = PhaseGrid::symmetric(hx, hp, a.grid)?;
    let ws = quantum::stretch_w_onto(&w, a.lambda, &target)?;
    let qs = quantum::stretch_q_onto(&q, a.lambda, &target)?;
    write_grid(dir, "wigner.csv", &w)?;
    write_grid(dir, "husimi.csv", &q)?;
    write_grid(dir, "wigner_stretched.csv", &ws)?;
    write_grid(dir, "husimi_stretched.csv", &qs)?;
    let summary = DemoSummary {
        lambda: a.lambda,
        wigner: quasiprob::negativity_report(&w)?,
        wigner_stretched: quasiprob::negativity_report(&ws)?,
        husimi_min: q.min_value(),
        husimi_stretched_min: qs.min_value(),
        sup_dist_stretched_w_q: ws.sup_distance(&qs)?,
    };
    dir.write_json("summary.json", &summary)?;
    let mut checks = Checks::default();
    checks.expect(
        summary.wigner_stretched.neg_volume <= summary.wigner.neg_volume + 1e-12,
        "stretching reduces negative volume",
        format!("{} → {}", summary.wigner.neg_volume, summary.wigner_stretched.neg_volume),
    );
    checks.finish(dir)
}

#[derive(Serialize)]
struct BlackbodySummary {
    order_rayleigh_jeans: f64,
    order_second: f64,
    max_ratio_identity_error: f64,
}

fn blackbody<C: Serialize>(a: &BlackbodyArgs, _: &SystemUnits, dir: &RunDir<C>) -> CliResult<ExitCode> {
    require(a.points >= 2 && a.beta_min > 0.0 && a.beta_max > a.beta_min, "need 0 < beta-min < beta-max and ≥ 2 points")?;
    let base = RadianceParams::new(a.nu, a.beta_min, a.planck_h, a.c, a.k_b)?;
    let step = (a.beta_max / a.beta_min).ln() / (a.points - 1) as f64;
    let mut rows = Vec::with_capacity(a.points);
    let mut ratio_err = 0.0f64;
    for k in 0..a.points {
        let beta = if k + 1 == a.points { a.beta_max } else { a.beta_min * (step * k as f64).exp() };
        let p = RadianceParams { beta, ..base };
        let (planck, rj) = (case_studies::planck(&p), case_studies::rayleigh_jeans(&p));
        let x = p.x();
        if x < case_studies::PLANCK_SATURATION {
            let want = x / x.exp_m1();
            ratio_err = ratio_err.max((planck / rj - want).abs() / want);
        }
        rows.push([beta, x, planck, rj, case_studies::planck_beta_series(&p, 1)?, case_studies::planck_beta_series(&p, 2)?, planck / rj]);
    }
    dir.write_with("blackbody.csv", |w| {
        writeln!(w, "beta,x,planck,rayleigh_jeans,series_order1,series_order2,planck_over_rj")?;
        rows.iter().try_for_each(|r| writeln!(w, "{}", csv_row(r)))
    })?;
    // orders are measured deep in the small-x regime, x = hβν ≤ 0.02
    let betas: Vec<f64> = (0..6).map(|k| 0.02 / (a.planck_h * a.nu) / 2f64.powi(k)).collect();
    let summary = BlackbodySummary {
        order_rayleigh_jeans: case_studies::series_convergence_order(&base, 1, &betas)?,
        order_second: case_studies::series_convergence_order(&base, 2, &betas)?,
        max_ratio_identity_error: ratio_err,
    };
    dir.write_json("blackbody.json", &summary)?;
    let mut checks = Checks::default();
    checks.expect(ratio_err < 1e-12, "Planck/RJ = x/(eˣ−1)", format!("max relative error {ratio_err:e}"));
    checks.expect((summary.order_rayleigh_jeans - 1.0).abs() < 0.15, "order-1 convergence", format!("{}", summary.order_rayleigh_jeans));
    checks.expect((summary.order_second - 2.0).abs() < 0.15, "order-2 convergence", format!("{}", summary.order_second));
    checks.finish(dir)
}

fn potential(kind: WellKind, g: f64, u: &SystemUnits) -> CliResult<PolynomialPotential> {
    Ok(match kind {
        WellKind::Harmonic => PolynomialPotential::harmonic(u),
        WellKind::Quartic => PolynomialPotential::quartic(u, g)?,
    })
}

fn thermal<C: Serialize>(a: &ThermalArgs, u: &SystemUnits, dir: &RunDir<C>) -> CliResult<ExitCode> {
    let v = potential(a.potential, a.g, u)?;
    let rep = case_studies::thermal_wigner_correction(&v, &a.betas, a.dim, u, a.grid)?;
    dir.write_json("thermal.json", &rep)?;
    dir.write_with("thermal.csv", |w| {
        writeln!(w, "beta,distance,classical_peak")?;
        (0..rep.betas.len()).try_for_each(|k| writeln!(w, "{}", csv_row(&[rep.betas[k], rep.distances[k], rep.classical_peaks[k]])))
    })?;
    let mut checks = Checks::default();
    checks.expect(rep.slope >= 1.7, "distance vanishes at second order", format!("fitted slope {}", rep.slope));
    checks.expect(rep.first_order_ratio < 1e-3, "first-order coefficient negligible", format!("{}", rep.first_order_ratio));
    checks.finish(dir)
}

#[derive(Serialize)]
struct QubitSummary {
    aliasing: case_studies::AliasingReport,
    contraction: case_studies::ContractionReport,
    shells: case_studies::ShellReport,
}

fn qubit<C: Serialize>(a: &QubitArgs, _: &SystemUnits, dir: &RunDir<C>) -> CliResult<ExitCode> {
    require(a.directions >= 2, "--directions must be at least 2")?;
    let radii = [0.1, 0.4, 0.75, 1.0];
    let dirs = case_studies::fibonacci_directions(a.directions);
    let mut pairs = vec![(slits::plus(), slits::minus()), (slits::left(), slits::right())];
    for (k, d) in dirs.iter().enumerate() {
        let e = dirs[(k * 7 + 3) % dirs.len()];
        pairs.push((Qubit::from_bloch(d * radii[k % 4])?, Qubit::from_bloch(e * radii[(k + 1) % 4])?));
    }
    let summary = QubitSummary {
        aliasing: case_studies::two_slit_aliasing(),
        contraction: case_studies::contraction_check(&pairs, a.strength)?,
        shells: case_studies::bloch_shell_check(&radii, a.strength, a.directions)?,
    };
    dir.write_json("qubit.json", &summary)?;
    let mut checks = Checks::default();
    let al = &summary.aliasing;
    checks.expect(al.mixture_diff < 1e-14 && al.phase_average_diff < 1e-14, "two-slit aliasing", format!("{al:?}"));
    checks.expect(summary.contraction.max_factor_error < 1e-12, "contraction factor 1 − s", format!("{:?}", summary.contraction));
    let sh = &summary.shells;
    checks.expect(sh.radius_error < 1e-12 && sh.image_entropy_spread < 1e-12, "shells map to shells", format!("{sh:?}"));
    checks.finish(dir)
}

#[derive(Serialize)]
struct MoyalSummary {
    dt: f64,
    steps: usize,
    n_corr: usize,
    sup_dist_moyal_poisson: f64,
    norm_drift: f64,
    energy_drift: f64,
    lambdas: Vec<f64>,
    classicality_ratios: Vec<f64>,
    ratio_slope: Option<f64>,
}

fn moyal<C: Serialize>(a: &MoyalArgs, u: &SystemUnits, dir: &RunDir<C>) -> CliResult<ExitCode> {
    require(!a.lambdas.is_empty() && a.lambdas.iter().all(|l| *l >= 1.0), "--lambdas must be ≥ 1")?;
    let h = match a.potential {
        WellKind::Harmonic => HamiltonianSpec::harmonic(u.mass, u.omega)?,
        WellKind::Quartic => HamiltonianSpec::quartic(u.mass, u.omega, a.g)?,
    };
    let s = build_state(&a.state)?;
    let g = PhaseGrid::symmetric(a.half_x * u.length_scale(), a.half_p * u.momentum_scale(), a.grid)?;
    let w0 = quasiprob::wigner_from_state(&s, &g, u)?;
    let dt = match a.dt {
        Some(dt) => dt,
        None => moyal_dynamics::stable_dt(&g, &h, u.hbar, a.n_corr),
    };
    let mut steps = 0usize;
    let xs = g.xs();
    let ps = g.ps();
    let to_lib = |e: CliError| match e {
        CliError::Lib(l) => l,
        CliError::Io(i) => Error::Io(i),
        CliError::Usage(m) => Error::Io(std::io::Error::other(m)),
    };
    let evolved = moyal_dynamics::evolve_wigner_observed(&w0, &h, a.n_corr, a.t, dt, |_, values| {
        steps += 1;
        if a.stride > 0 && steps % a.stride == 0 {
            let name = format!("snapshots/wigner_{steps:06}.csv");
            dir.write_with(&name, |w| {
                writeln!(w, "x,p,value")?;
                for (i, x) in xs.iter().enumerate() {
                    for (j, p) in ps.iter().enumerate() {
                        writeln!(w, "{}", csv_row(&[*x, *p, values[(i, j)]]))?;
                    }
                }
                Ok(())
            })
            .map_err(to_lib)?;
        }
        Ok(())
    })?;
    let poisson = moyal_dynamics::evolve_wigner(&w0, &h, 0, a.t, dt)?;
    write_grid(dir, "wigner_initial.csv", &w0)?;
    write_grid(dir, "wigner_final.csv", &evolved)?;

    let (peak, nth) = state_extent(&a.state);
    let ratios = a
        .lambdas
        .iter()
        .map(|&lambda| {
            let r = SQRT_2 * (lambda.sqrt() * peak + 7.0 * (lambda * (2.0 * nth + 1.0) / 4.0).sqrt() + 4.0 * ((lambda - 1.0) / 4.0).sqrt());
            let tg = PhaseGrid::symmetric(r * u.length_scale(), r * u.momentum_scale(), a.grid.max(128))?;
            let w = if lambda == 1.0 {
                quasiprob::wigner_from_state(&s, &tg, u)?
            } else {
                let src = source_grid(&a.state, u, a.grid.max(128))?;
                quantum::stretch_w_onto(&quasiprob::wigner_from_state(&s, &src, u)?, lambda, &tg)?
            };
            Ok(moyal_dynamics::classicality_ratio(&w, &h)?)
        })
        .collect::<CliResult<Vec<f64>>>()?;
    let ratio_slope = if a.lambdas.len() >= 2 && ratios.iter().all(|r| *r > 0.0) {
        Some(case_studies::log_log_slope(&a.lambdas, &ratios)?)
    } else {
        None
    };
    dir.write_with("classicality.csv", |w| {
        writeln!(w, "lambda,ratio")?;
        a.lambdas.iter().zip(&ratios).try_for_each(|(l, r)| writeln!(w, "{}", csv_row(&[*l, *r])))
    })?;
    let summary = MoyalSummary {
        dt,
        steps,
        n_corr: a.n_corr,
        sup_dist_moyal_poisson: evolved.sup_distance(&poisson)?,
        norm_drift: evolved.norm() - w0.norm(),
        energy_drift: moyal_dynamics::mean_energy(&evolved, &h) - moyal_dynamics::mean_energy(&w0, &h),
        lambdas: a.lambdas.clone(),
        classicality_ratios: ratios.clone(),
        ratio_slope,
    };
    dir.write_json("moyal.json", &summary)?;

    let mut checks = Checks::default();
    checks.expect(summary.norm_drift.abs() < moyal_dynamics::NORM_DRIFT_TOL, "normalization conserved", format!("{}", summary.norm_drift));
    if a.potential == WellKind::Harmonic {
        checks.expect(summary.sup_dist_moyal_poisson < 1e-6, "harmonic Moyal equals Poisson", format!("{}", summary.sup_dist_moyal_poisson));
    } else {
        let mut sorted: Vec<(f64, f64)> = a.lambdas.iter().copied().zip(ratios).collect();
        sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
        checks.expect(sorted.windows(2).all(|w| w[1].1 < w[0].1), "classicality ratio falls with λ", format!("{sorted:?}"));
    }
    checks.finish(dir)
}

fn verify_all<C: Serialize>(a: &VerifyArgs, _: &SystemUnits, dir: &RunDir<C>) -> CliResult<ExitCode> {
    let cfg = VerifyConfig { dim: a.dim, grid_points: a.grid, fault: a.inject_fault.then_some(Fault::AnnihilationJump) };
    let summary = verify::verify_all(&cfg);
    summary.write_matrix(std::io::stdout().lock())?;
    dir.write_json("verify.json", &summary)?;
    let mut checks = Checks::default();
    for c in summary.failures() {
        checks.expect(false, &format!("{}: {}", c.topic, c.name), format!("{:?}: {}", c.status, c.detail));
    }
    checks.finish(dir)
}
