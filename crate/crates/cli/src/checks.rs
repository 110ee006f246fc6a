//! The `paper-checks` suite: every acceptance criterion at desk scale, one
//! line per criterion, with runtime budgets.

use std::io::Write;
use std::time::Instant;

use kramers_core::bath_kernels::{noise_kernel_freq, noise_kernel_time};
use kramers_core::decoherence::{decoherence_params, decoherence_substep, wigner_at_zero_momentum, MasterEquation};
use kramers_core::determinants::*;
use kramers_core::fokker_planck::compare::{compare_langevin_fp, CompareConfig};
use kramers_core::fokker_planck::{KramersSolver, SmoluchowskiSolver};
use kramers_core::langevin_sim::{noise_expectation, TrajectoryView};
use kramers_core::noise_gen::{colored_noise, estimate_spectrum};
use kramers_core::{
    Axis, BathParams, DensityField, DensityGrid, InitialCondition, Mode, NoiseKernel, NoiseSpec, Ordering, PhaseGrid, Potential, ProbField,
    SimConfig, TimeGrid,
};

use crate::commands::random_coefficients;
use crate::{CheckRecord, CliError, Run, RunConfig};

type Records = Result<Vec<CheckRecord>, CliError>;

struct Criterion {
    id: u32,
    label: &'static str,
    budget_s: Option<f64>,
    body: fn() -> Records,
}

fn criteria() -> Vec<Criterion> {
    vec![
        Criterion { id: 1, label: "retarded first-order determinant is exactly one", budget_s: Some(5.0), body: retarded_identity },
        Criterion { id: 2, label: "advanced and midpoint determinants, first-order convergence", budget_s: None, body: advanced_midpoint },
        Criterion { id: 3, label: "Drude trace-log rate and analytic regularization", budget_s: None, body: trace_log },
        Criterion { id: 4, label: "Kramers ordering: conservation and e^{-γt/2} sink", budget_s: Some(30.0), body: kramers_ordering },
        Criterion { id: 5, label: "Smoluchowski ordering: conservation and ω0²/2γ decay", budget_s: None, body: smoluchowski_ordering },
        Criterion { id: 6, label: "Langevin and Fokker-Planck agree for the OU process", budget_s: Some(60.0), body: langevin_fp },
        Criterion { id: 7, label: "equipartition and double-well Boltzmann steady state", budget_s: None, body: stationarity },
        Criterion { id: 8, label: "noise kernel normalization and colored-noise spectrum", budget_s: Some(20.0), body: kernels },
        Criterion { id: 9, label: "decoherence rate, interference decay and trace", budget_s: None, body: decoherence },
    ]
}

fn retarded_identity() -> Records {
    let mut out = Vec::new();
    let mut worst = 1.0f64;
    let mut exact = true;
    for &n in &[1usize << 10, 1 << 12, 1 << 14] {
        for k in 0..100u64 {
            let coeff = random_coefficients(n + 1, 1000 * n as u64 + k)?;
            let op = FirstOrderOp::new(coeff.iter().map(|c| 3.0 * c).collect(), 1.0 / n as f64)?;
            let d = sliced_first_order_det(&op, SlicingScheme::Retarded)?;
            if d.to_bits() != 1.0f64.to_bits() {
                exact = false;
                worst = d;
            }
        }
    }
    out.push(CheckRecord::new("retarded_300_cases_bitwise_one", worst, 1.0, exact));
    Ok(out)
}

fn advanced_midpoint() -> Records {
    let e = std::f64::consts::E;
    let op = FirstOrderOp::from_fn(10_000, 1.0, |_| 2.0)?;
    let adv = sliced_first_order_det(&op, SlicingScheme::Advanced)?;
    let mid = sliced_first_order_det(&op, SlicingScheme::Midpoint)?;
    let mut out = vec![CheckRecord::rel("advanced_c2_e2", adv, e * e, 0.01), CheckRecord::rel("midpoint_c2_e", mid, e, 0.01)];
    // ∫₀¹ (2 + sin 3t) dt
    let integral = 2.0 + (1.0 - 3.0f64.cos()) / 3.0;
    for (scheme, target) in [(SlicingScheme::Advanced, integral), (SlicingScheme::Midpoint, 0.5 * integral)] {
        let err = |n: usize| -> Result<f64, CliError> {
            let op = FirstOrderOp::from_fn(n, 1.0, |t| 2.0 + (3.0 * t).sin())?;
            Ok((sliced_first_order_det(&op, scheme)?.ln() - target).abs())
        };
        let order = (err(2000)? / err(4000)?).log2();
        out.push(CheckRecord::abs(format!("{}_order", scheme.name()), order, 1.0, 0.2));
    }
    Ok(out)
}

fn trace_log() -> Records {
    let gamma = 1.0;
    let rate = drude_trace_log_rate(gamma, 100.0 * gamma)?;
    let mut out = vec![CheckRecord::new("drude_rate_wd_100_gamma", rate, 0.0, rate.abs() < 1e-3 * gamma)];
    for (g, mu) in [(3.0, 1.0), (5.0, 1.0)] {
        out.push(CheckRecord::abs(format!("intanal_{g}_{mu}"), quadrature_check_intanal(g, mu)?, 0.5 * (g - mu), 1e-6));
    }
    Ok(out)
}

fn kramers_ordering() -> Records {
    let (x, v) = (Axis::new(-6.0, 6.0, 128)?, Axis::new(-6.0, 6.0, 128)?);
    let pot = Potential::harmonic(1.0, 1.0)?;
    let params = BathParams::new(1.0, 1.0, 1.0, 0.0)?;

    let mut solver = KramersSolver::new(x, v, &pot, &params, Ordering::MomentaLeft);
    let mut p = ProbField::gaussian_2d(x, v, (1.0, 0.5), (0.3, 0.3));
    let m0 = p.mass();
    let dt = solver.max_dt();
    for _ in 0..1000 {
        solver.step(&mut p, dt)?;
    }
    let mut out = vec![CheckRecord::abs("momenta_left_mass_drift_1000_steps", p.mass() - m0, 0.0, 1e-8)];

    let mut solver = KramersSolver::new(x, v, &pot, &params, Ordering::Symmetric);
    let mut p = ProbField::gaussian_2d(x, v, (0.0, 0.0), (1.0, 1.0));
    let m0 = p.mass();
    solver.evolve(&mut p, 2.0)?;
    out.push(CheckRecord::rel("symmetric_mass_t2", p.mass() / m0, (-1.0f64).exp(), 0.02));
    Ok(out)
}

fn smoluchowski_ordering() -> Records {
    let axis = Axis::new(-5.0, 5.0, 200)?;
    let (omega0, gamma) = (1.5, 2.0);
    let pot = Potential::harmonic(1.0, omega0)?;
    let params = BathParams::new(1.0, gamma, 1.0, 0.0)?;

    let mut solver = SmoluchowskiSolver::new(axis, &pot, &params, Ordering::MomentaLeft);
    let mut p = ProbField::gaussian_1d(axis, 0.5, 0.5);
    let m0 = p.mass();
    solver.evolve(&mut p, 2.0)?;
    let mut out = vec![CheckRecord::abs("momenta_left_mass_drift", p.mass() - m0, 0.0, 1e-8)];

    let mut solver = SmoluchowskiSolver::new(axis, &pot, &params, Ordering::Symmetric);
    let mut p = ProbField::gaussian_1d(axis, 0.5, 0.5);
    solver.evolve(&mut p, 0.5)?;
    let m1 = p.mass();
    solver.evolve(&mut p, 1.5)?;
    let rate = -(p.mass() / m1).ln();
    out.push(CheckRecord::rel("symmetric_decay_rate", rate, omega0 * omega0 / (2.0 * gamma), 0.02));
    Ok(out)
}

fn langevin_fp() -> Records {
    let params = BathParams::new(1.0, 4.0, 0.5, 0.0)?;
    let x0 = 1.0;
    let mut sim = SimConfig::new(Potential::harmonic(1.0, 1.0)?, params, 0.01, 100, 100_000, 31);
    sim.initial = InitialCondition::Point { x: x0, v: 0.0 };
    let grid = PhaseGrid::line(Axis::new(-3.0, 4.0, 512)?);
    let cfg = CompareConfig { sim, mode: Mode::Overdamped, grid, times: vec![1.0], cells_per_bin: 8, init_width: None };
    let report = compare_langevin_fp(&cfg)?;
    let r = &report.records[0];
    let t = r.t;
    let s0 = report.init_width.0;
    // OU from a Gaussian start of width s0: relaxation rate ω0²/γ = 1/4.
    let decay = (-t / 4.0).exp();
    let mean = decay * x0;
    let var = s0 * s0 * decay * decay + 0.5 * (1.0 - (-t / 2.0).exp());
    let n = (report.trajectories - report.diverged) as f64;
    let (se_mean, se_var) = ((var / n).sqrt(), var * (2.0 / (n - 1.0)).sqrt());
    let bound = 3.0 * (r.stat_err + r.disc_err);
    Ok(vec![
        CheckRecord::new("l1_vs_3x_stat_plus_disc", r.l1, bound, r.l1 < bound),
        CheckRecord::new("langevin_mean", r.mean_langevin, mean, (r.mean_langevin - mean).abs() < 3.0 * se_mean),
        CheckRecord::new("langevin_variance", r.var_langevin, var, (r.var_langevin - var).abs() < 3.0 * se_var),
        CheckRecord::new("fp_mean", r.mean_fp, mean, (r.mean_fp - mean).abs() < 3.0 * se_mean),
        CheckRecord::new("fp_variance", r.var_fp, var, (r.var_fp - var).abs() < 3.0 * se_var),
    ])
}

fn stationarity() -> Records {
    let params = BathParams::new(1.0, 2.0, 1.0, 0.0)?;
    let cfg = SimConfig::new(Potential::harmonic(1.0, 2.0)?, params, 0.001, 60_000, 300, 17);
    let burn = 5000;
    let v2 = noise_expectation(
        |t: &TrajectoryView| {
            let v = t.v.expect("inertial run records v");
            v[burn..].iter().map(|v| v * v).sum::<f64>() / (v.len() - burn) as f64
        },
        &cfg,
        Mode::Inertial,
    )?;
    let target = params.kbt / params.mass;
    let mut out = vec![CheckRecord::new("equipartition_v2", v2.mean, target, (v2.mean - target).abs() < 3.0 * v2.std_error)];

    let axis = Axis::new(-4.0, 4.0, 160)?;
    let pot = Potential::double_well(-1.0, 0.25)?;
    let params = BathParams::new(1.0, 1.0, 1.0, 0.0)?;
    let mut solver = SmoluchowskiSolver::new(axis, &pot, &params, Ordering::MomentaLeft);
    let mut p = ProbField::gaussian_1d(axis, 1.2, 0.3);
    solver.evolve(&mut p, 40.0)?;
    let exact: Vec<f64> = {
        let w: Vec<f64> = axis.centers().iter().map(|&x| (-pot.value(x) / params.kbt).exp()).collect();
        let z = w.iter().sum::<f64>() * axis.spacing();
        w.iter().map(|v| v / z).collect()
    };
    let l1 = p.l1_distance(&exact);
    out.push(CheckRecord::new("double_well_boltzmann_l1", l1, 0.0, l1 < 0.02));
    Ok(out)
}

fn kernels() -> Records {
    let omega_d = 10.0;
    let params = BathParams::new(1.0, 1.0, 1.0, 0.0)?.with_drude_cutoff(omega_d)?;
    let model = params.spectral_density();
    let k0 = noise_kernel_freq(&params, &model, 0.0)?;
    let ks = noise_kernel_time(&params, &model, &TimeGrid::symmetric(3.0, 0.002)?)?;
    let mut out = vec![CheckRecord::new("k0_exact", k0, 1.0, k0 == 1.0), CheckRecord::abs("k_time_area", ks.area, 1.0, 1e-6)];

    let (w, dt) = (2.0, 0.005);
    let spec = NoiseSpec { kernel: NoiseKernel::Colored { params, model: model.clone() }, w, dt, n: 1_000_000, seed: 4 };
    let traj = colored_noise(&spec)?;
    let spectrum = estimate_spectrum(&traj.samples, dt, 2048)?;
    let mut worst = 0.0f64;
    let mut bands = 0;
    for c in spectrum[1..].chunks(8).filter(|c| c.len() == 8 && c[7].0 < 5.0 * omega_d) {
        let est = c.iter().map(|(_, s)| s).sum::<f64>() / 8.0;
        let mut target = 0.0;
        for (om, _) in c {
            target += w * noise_kernel_freq(&params, &model, *om)? / 8.0;
        }
        worst = worst.max((est / target - 1.0).abs());
        bands += 1;
    }
    out.push(CheckRecord::new(format!("periodogram_worst_rel_dev_{bands}_bands"), worst, 0.0, bands >= 9 && worst < 0.05));
    Ok(out)
}

fn decoherence() -> Records {
    let grid = DensityGrid::new(64, 0.25, 128, 0.2)?;
    let mut out = Vec::new();

    let rho0 = DensityField::two_gaussians(grid, 4.0, 0.7);
    let mut rho = rho0.clone();
    let (lambda, dt) = (1.7, 0.01);
    for _ in 0..25 {
        decoherence_substep(&mut rho, lambda, dt);
    }
    let mut worst = 0.0f64;
    for i in 0..grid.nx {
        for j in 0..grid.ny {
            let expect = rho0.at(i, j) * (-lambda * grid.y(j).powi(2) * 25.0 * dt).exp();
            if expect.norm() > 0.0 {
                worst = worst.max((rho.at(i, j) - expect).norm() / expect.norm());
            }
        }
    }
    out.push(CheckRecord::new("substep_rel_error", worst, 0.0, worst <= 1e-14));

    let heavy = BathParams::new(100.0, 0.01, 1.0, 1.0)?;
    let dp = decoherence_params(&heavy)?;
    let (d, sigma, dt) = (6.0, 0.5, 1e-4);
    let mut prop = MasterEquation::new(grid, &Potential::free(), &heavy, Ordering::MomentaLeft, dt)?;
    let mut rho = DensityField::two_gaussians(grid, d, sigma);
    let start = wigner_at_zero_momentum(&rho, grid.x_zero(), heavy.hbar);
    for _ in 0..10 {
        prop.step(&mut rho)?;
    }
    let end = wigner_at_zero_momentum(&rho, grid.x_zero(), heavy.hbar);
    let slope = -(end / start).ln() / (10.0 * dt);
    out.push(CheckRecord::rel("interference_slope_over_lambda_d2", slope / (dp.lambda * d * d), 1.0, 0.05));

    let p = BathParams::new(5.0, 0.5, 1.0, 1.0)?;
    let mut prop = MasterEquation::new(grid, &Potential::harmonic(5.0, 0.8)?, &p, Ordering::MomentaLeft, 1e-3)?;
    let mut rho = DensityField::two_gaussians(grid, 3.0, 0.6);
    let tr0 = rho.trace();
    for _ in 0..1000 {
        prop.step(&mut rho)?;
    }
    out.push(CheckRecord::abs("trace_drift_1000_steps", (rho.trace() - tr0).norm(), 0.0, 1e-8));

    let mut identity_ok = true;
    let mut worst = 0.0f64;
    for &(m, g, kt, h) in &[(1.0, 2.0, 0.5, 1.0), (3.0, 0.25, 7.0, 0.5), (100.0, 0.01, 1.0, 1.0)] {
        let dp = decoherence_params(&BathParams::new(m, g, kt, h)?)?;
        let lhs = dp.lambda * dp.thermal_length.powi(2);
        let dev = (lhs / (std::f64::consts::TAU * g) - 1.0).abs();
        worst = worst.max(dev);
        identity_ok &= dev <= 4.0 * f64::EPSILON;
    }
    out.push(CheckRecord::new("lambda_le2_equals_2pi_gamma", worst, 0.0, identity_ok));
    Ok(out)
}

/// Config used for the reproducibility criterion: a short Langevin
/// ensemble with colored noise plus a Smoluchowski solve.
pub const REPRO_CONFIG: &str = "\
bath.model = drude
bath.gamma = 2
bath.omega_d = 20
potential.kind = double_well
sim.noise = colored
sim.dt = 0.002
sim.steps = 2000
sim.n_traj = 200
sim.seed = 12345
sim.x0 = 1
sim.burn_in = 1000
sim.stride = 50
sim.autocorr_lags = 5
simulate.fp = true
fp.x_min = -4
fp.x_max = 4
fp.nx = 80
fp.t_end = 1
";

fn reproducibility(out: &std::path::Path) -> Records {
    let cfg = RunConfig::parse(REPRO_CONFIG)?;
    let mut bytes = Vec::new();
    for tag in ["a", "b"] {
        let mut run = Run::new(out.join(format!("repro_{tag}")), true)?;
        crate::commands::simulate(&cfg, &mut run)?;
        let mut files = Vec::new();
        for name in run.outputs().iter().filter(|n| n.ends_with(".csv")) {
            files.push((name.clone(), std::fs::read(run.out.join(name))?));
        }
        bytes.push(files);
    }
    let identical = !bytes[0].is_empty() && bytes[0] == bytes[1];
    Ok(vec![CheckRecord::new("csv_byte_identical", bytes[0].len() as f64, bytes[1].len() as f64, identical)])
}

fn report(
    run: &mut Run,
    lines: &mut Vec<CheckRecord>,
    id: u32,
    label: &str,
    mut records: Vec<CheckRecord>,
    start: Instant,
    budget: Option<f64>,
) {
    let secs = start.elapsed().as_secs_f64();
    if let Some(b) = budget {
        records.push(CheckRecord::new(format!("runtime_under_{b}s"), secs, b, secs < b));
    }
    let status = if records.iter().all(|r| r.pass) { "PASS" } else { "FAIL" };
    run.say(format!("criterion {id:2} {status} {label} ({secs:.2} s)"));
    for r in records {
        if !r.pass {
            run.say(format!("    {}: computed {} target {}", r.case, r.computed, r.target));
        }
        let tagged = CheckRecord { case: format!("c{id}_{}", r.case), ..r };
        lines.push(tagged.clone());
        run.check(tagged);
    }
}

/// Runs every criterion, prints one line each and writes `checks.jsonl`.
pub fn paper_checks(run: &mut Run) -> Result<(), CliError> {
    let mut lines = Vec::new();
    for c in criteria() {
        let start = Instant::now();
        let records = (c.body)()?;
        report(run, &mut lines, c.id, c.label, records, start, c.budget_s);
    }
    let start = Instant::now();
    let out = run.out.clone();
    let records = reproducibility(&out)?;
    report(run, &mut lines, 10, "identical configs and seeds give byte-identical CSV", records, start, None);
    run.write_file("checks.jsonl", |f| {
        for r in &lines {
            serde_json::to_writer(&mut *f, r).map_err(std::io::Error::other)?;
            writeln!(f)?;
        }
        Ok(())
    })
}
