//! The `kernels`, `det-check`, `simulate` and `decohere` subcommands.

use std::io::Write;

use kramers_core::bath_kernels::{friction_kernel_time, noise_kernel_freq, noise_kernel_time, spectral_density};
use kramers_core::decoherence::{decoherence_params, wigner_at_zero_momentum, wigner_transform, MasterEquation};
use kramers_core::determinants::*;
use kramers_core::fokker_planck::compare::{compare_langevin_fp, CompareConfig};
use kramers_core::fokker_planck::{KramersSolver, SmoluchowskiSolver};
use kramers_core::io::write_csv_rows;
use kramers_core::langevin_sim::run_ensemble;
use kramers_core::noise_gen::{white_noise, NoiseSpec};
use kramers_core::{DensityField, DensityGrid, Error, Ordering, ProbField, TimeGrid};

use crate::{CheckRecord, CliError, Run, RunConfig};

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// σ(ω), K(ω) and, with a Drude cutoff, γ(t) and K(t).
pub fn kernels(cfg: &RunConfig, run: &mut Run) -> Result<(), CliError> {
    let params = cfg.bath()?;
    let model = params.spectral_density();
    let n_omega = cfg.usize("kernels.n_omega")?;
    let scale = params.omega_d.unwrap_or(params.gamma);
    let mut omega_max = 50.0 * scale;
    if params.hbar > 0.0 {
        omega_max = omega_max.max(50.0 * params.kbt / params.hbar);
    }
    let omega_max = cfg.opt_f64("kernels.omega_max")?.unwrap_or(omega_max);
    let omegas = linspace(-omega_max, omega_max, n_omega);

    let mut sigma = Vec::with_capacity(n_omega);
    let mut k_omega = Vec::with_capacity(n_omega);
    for &w in &omegas {
        sigma.push([w, spectral_density(&model, params.mass, w)?]);
        k_omega.push([w, noise_kernel_freq(&params, &model, w)?]);
    }
    run.write_file("sigma.csv", |f| write_csv_rows(f, &["omega", "sigma"], &sigma))?;
    run.write_file("k_omega.csv", |f| write_csv_rows(f, &["omega", "k"], &k_omega))?;

    let k0 = noise_kernel_freq(&params, &model, 0.0)?;
    run.say(format!("K(0) = {k0:.6}"));
    run.check(CheckRecord::new("k_omega_at_zero", k0, 1.0, k0 == 1.0));

    if params.omega_d.is_none() {
        run.say("Ohmic bath: the time-domain kernels are delta functions; set bath.model = drude for gamma_t.csv and k_t.csv");
        return Ok(());
    }
    let grid = TimeGrid::symmetric(cfg.f64("kernels.t_max")?, cfg.f64("kernels.dt")?)?;
    let times = grid.times();
    let mut gamma_t = Vec::with_capacity(times.len());
    for &t in &times {
        gamma_t.push([t, friction_kernel_time(&model, params.mass, t)?]);
    }
    run.write_file("gamma_t.csv", |f| write_csv_rows(f, &["t", "gamma"], &gamma_t))?;

    let ks = noise_kernel_time(&params, &model, &grid)?;
    let rows: Vec<[f64; 2]> = ks.t.iter().zip(&ks.values).map(|(&t, &k)| [t, k]).collect();
    run.write_file("k_t.csv", |f| write_csv_rows(f, &["t", "k"], &rows))?;
    if ks.short_grid {
        run.say(format!("K area = {:.6} (grid too short to hold the unit area; raise kernels.t_max)", ks.area));
    } else {
        run.say(format!("K area = {:.6} ± 1e-6", ks.area));
        run.check(CheckRecord::abs("k_time_area", ks.area, 1.0, 1e-6));
    }
    Ok(())
}

/// Gaussian coefficients of unit variance, reproducible per `seed`.
pub fn random_coefficients(n: usize, seed: u64) -> Result<Vec<f64>, CliError> {
    Ok(white_noise(&NoiseSpec::white(1.0, 1.0, n, seed))?.samples)
}

/// Determinant identities and trace-log rates as `det.jsonl`.
pub fn det_check(cfg: &RunConfig, run: &mut Run) -> Result<(), CliError> {
    let e = std::f64::consts::E;
    let n = cfg.usize("det.n")?;
    let total = cfg.f64("det.total_time")?;
    let gamma = cfg.f64("det.gamma")?;
    let seed = cfg.u64("sim.seed")?;
    let mut records = Vec::new();

    for &nn in &[1usize << 10, 1 << 12, 1 << 14] {
        for k in 0..cfg.usize("det.random_cases")? {
            let coeff = random_coefficients(nn + 1, seed.wrapping_add((nn as u64) << 20 | k as u64))?;
            let op = FirstOrderOp::new(coeff.iter().map(|c| 3.0 * c).collect(), total / nn as f64)?;
            let d = sliced_first_order_det(&op, SlicingScheme::Retarded)?;
            records.push(CheckRecord::new(format!("retarded_first_order_n{nn}_{k}"), d, 1.0, d.to_bits() == 1.0f64.to_bits()));
        }
    }

    let op = FirstOrderOp::from_fn(n, total, |_| gamma)?;
    let adv = sliced_first_order_det(&op, SlicingScheme::Advanced)?;
    let mid = sliced_first_order_det(&op, SlicingScheme::Midpoint)?;
    records.push(CheckRecord::rel("advanced_first_order_constant", adv, (gamma * total).exp(), 0.01));
    records.push(CheckRecord::rel("midpoint_first_order_constant", mid, (0.5 * gamma * total).exp(), 0.01));

    for scheme in [SlicingScheme::Advanced, SlicingScheme::Midpoint] {
        let target = match scheme {
            SlicingScheme::Advanced => gamma * total,
            _ => 0.5 * gamma * total,
        };
        let err = |m: usize| -> Result<f64, CliError> {
            let op = FirstOrderOp::from_fn(m, total, |_| gamma)?;
            Ok((sliced_first_order_det(&op, scheme)?.ln() - target).abs())
        };
        let order = (err(n)? / err(2 * n)?).log2();
        records.push(CheckRecord::abs(format!("{}_convergence_order", scheme.name()), order, 1.0, 0.1));
    }

    let omega_sq = 0.5 * gamma * gamma / 4.0;
    let op2 = SecondOrderOp::from_fn(n, total, |_| gamma, |_| omega_sq)?;
    let ret2 = sliced_second_order_det(&op2, SlicingScheme::Retarded)?;
    let mid2 = sliced_second_order_det(&op2, SlicingScheme::Midpoint)?;
    records.push(CheckRecord::new("retarded_second_order", ret2, 1.0, ret2 == 1.0));
    records.push(CheckRecord::rel("midpoint_second_order", mid2, (0.5 * gamma * total).exp(), 0.01));
    if (gamma - 2.0).abs() < f64::EPSILON && (total - 1.0).abs() < f64::EPSILON {
        records.push(CheckRecord::rel("midpoint_gamma2_equals_e", mid, e, 0.01));
    }

    let omega_d = cfg.f64("det.drude_ratio")? * gamma;
    let rate = drude_trace_log_rate(gamma, omega_d)?;
    records.push(CheckRecord::new("drude_trace_log_rate", rate, 0.0, rate.abs() < 1e-3 * gamma));
    let ohmic = regularized_trace_log_rate(&ohmic_symbol(gamma))?;
    records.push(CheckRecord::abs("ohmic_trace_log_rate", ohmic, 0.5 * gamma, 1e-10));
    for (g, mu) in [(3.0, 1.0), (5.0, 1.0)] {
        let q = quadrature_check_intanal(g, mu)?;
        records.push(CheckRecord::abs(format!("intanal_quadrature_{g}_{mu}"), q, 0.5 * (g - mu), 1e-6));
    }

    run.write_file("det.jsonl", |f| {
        for r in &records {
            serde_json::to_writer(&mut *f, r).map_err(std::io::Error::other)?;
            writeln!(f)?;
        }
        Ok(())
    })?;
    let failed = records.iter().filter(|r| !r.pass).count();
    run.say(format!("{} determinant cases, {failed} failed", records.len()));
    for r in records {
        if !r.pass {
            run.say(format!("FAIL {}: computed {} target {}", r.case, r.computed, r.target));
        }
        run.check(r);
    }
    Ok(())
}

enum FpSolver {
    Line(SmoluchowskiSolver),
    Plane(KramersSolver),
}

impl FpSolver {
    fn max_dt(&self) -> f64 {
        match self {
            Self::Line(s) => s.max_dt(),
            Self::Plane(s) => s.max_dt(),
        }
    }

    fn step(&mut self, field: &mut ProbField, dt: f64) -> kramers_core::Result<()> {
        match self {
            Self::Line(s) => s.step(field, dt),
            Self::Plane(s) => s.step(field, dt),
        }
    }
}

/// Langevin ensemble, Fokker-Planck solve and their comparison, as enabled
/// by the `simulate.*` switches.
pub fn simulate(cfg: &RunConfig, run: &mut Run) -> Result<(), CliError> {
    let mode = cfg.mode()?;
    let sim = cfg.sim()?;
    let (langevin, fp, compare) = (cfg.bool("simulate.langevin")?, cfg.bool("simulate.fp")?, cfg.bool("simulate.compare")?);
    let grid = cfg.fp_grid()?;
    let ordering = cfg.fp_ordering()?;
    let times = cfg.f64_list("compare.times")?;
    let (t_end, samples) = (cfg.f64("fp.t_end")?, cfg.usize("fp.samples")?.max(1));
    let fp_dt = cfg.opt_f64("fp.dt")?;
    let x0 = cfg.opt_f64("fp.x0")?.unwrap_or(cfg.f64("sim.x0")?);
    let v0 = cfg.opt_f64("fp.v0")?.unwrap_or(cfg.f64("sim.v0")?);
    let width = cfg.f64("fp.width")?;

    if langevin {
        let stats = run_ensemble(&sim, mode)?;
        run.write_file("moments.csv", |f| stats.write_moments_csv(f))?;
        run.write_file("hist_x.csv", |f| stats.hist_x.write_csv(f))?;
        if let Some(h) = &stats.hist_v {
            run.write_file("hist_v.csv", |f| h.write_csv(f))?;
        }
        run.say(format!(
            "langevin: {} trajectories ({} diverged), <x> = {:.6}, var x = {:.6}",
            stats.n_traj,
            stats.diverged,
            stats.x.mean,
            stats.x.variance()
        ));
        if let Some(v2) = &stats.v_sq {
            run.say(format!("langevin: <v^2> = {:.6} ± {:.6} (k_BT/M = {:.6})", v2.mean, v2.std_error(), sim.params.kbt / sim.params.mass));
        }
    }

    if fp {
        let (pot, params) = (&sim.potential, &sim.params);
        let (mut solver, mut field) = match grid.v {
            None => (FpSolver::Line(SmoluchowskiSolver::new(grid.x, pot, params, ordering)), ProbField::gaussian_1d(grid.x, x0, width)),
            Some(v) => (
                FpSolver::Plane(KramersSolver::new(grid.x, v, pot, params, ordering)),
                ProbField::gaussian_2d(grid.x, v, (x0, v0), (width, width)),
            ),
        };
        let max_dt = solver.max_dt();
        let dt = match fp_dt {
            Some(dt) if dt > max_dt => return Err(Error::Unstable { dt, max_dt, suggested: 0.9 * max_dt }.into()),
            Some(dt) => dt,
            None => max_dt,
        };
        let steps = ((t_end / dt).ceil() as usize).max(1);
        let dt = t_end / steps as f64;
        let record_every = steps.div_ceil(samples);
        let mut mass = vec![[0.0, field.mass(), field.min_value()]];
        let mass0 = field.mass();
        for s in 1..=steps {
            solver.step(&mut field, dt)?;
            if s % record_every == 0 || s == steps {
                mass.push([s as f64 * dt, field.mass(), field.min_value()]);
            }
        }
        run.write_file("fp_mass.csv", |f| write_csv_rows(f, &["t", "mass", "min_value"], &mass))?;
        run.write_file("fp_field.csv", |f| field.write_csv(f))?;
        let final_mass = field.mass();
        run.say(format!("fokker-planck: {steps} steps of dt = {dt:.3e}, mass {mass0:.12} -> {final_mass:.12}"));
        if ordering == Ordering::MomentaLeft {
            run.check(CheckRecord::abs("fp_mass_conservation", final_mass, mass0, 1e-8));
        }
    }

    if compare {
        let ccfg =
            CompareConfig { sim: sim.clone(), mode, grid, times, cells_per_bin: cfg.usize("compare.cells_per_bin")?, init_width: None };
        let report = compare_langevin_fp(&ccfg)?;
        run.write_file("compare.jsonl", |f| report.write_jsonl(f))?;
        let rows: Vec<[f64; 9]> = report
            .records
            .iter()
            .map(|r| [r.t, r.l1, r.sup, r.stat_err, r.disc_err, r.mean_langevin, r.var_langevin, r.mean_fp, r.var_fp])
            .collect();
        let header = ["t", "l1", "sup", "stat_err", "disc_err", "mean_langevin", "var_langevin", "mean_fp", "var_fp"];
        run.write_file("compare.csv", |f| write_csv_rows(f, &header, &rows))?;
        for r in &report.records {
            let bound = 3.0 * (r.stat_err + r.disc_err);
            run.say(format!("compare t = {}: L1 = {:.5} (bound {:.5})", r.t, r.l1, bound));
            run.check(CheckRecord::new(format!("compare_l1_t{}", r.t), r.l1, bound, r.l1 < bound));
        }
    }
    Ok(())
}

/// Two-Gaussian superposition under the high-temperature master equation.
pub fn decohere(cfg: &RunConfig, run: &mut Run) -> Result<(), CliError> {
    let params = cfg.bath()?;
    let dp = decoherence_params(&params)?;
    let grid = DensityGrid::new(cfg.usize("decohere.nx")?, cfg.f64("decohere.dx")?, cfg.usize("decohere.ny")?, cfg.f64("decohere.dy")?)?;
    let (d, sigma) = (cfg.f64("decohere.separation")?, cfg.f64("decohere.sigma")?);
    let (dt, steps) = (cfg.f64("decohere.dt")?, cfg.usize("decohere.steps")?);
    let snapshots = cfg.usize("decohere.snapshots")?;
    let p_max = cfg.f64("decohere.p_max")?;
    let p_grid = linspace(-p_max, p_max, cfg.usize("decohere.np")?);
    let ordering = cfg.decohere_ordering()?;
    let potential = cfg.potential()?;

    let mut prop = MasterEquation::new(grid, &potential, &params, ordering, dt)?;
    let mut rho = DensityField::two_gaussians(grid, d, sigma);
    let i0 = grid.x_zero();
    let tr0 = rho.trace();
    let snap_steps: Vec<usize> = match snapshots {
        0 => Vec::new(),
        1 => vec![steps],
        k => (0..k).map(|j| j * steps / (k - 1)).collect(),
    };

    let mut decay = Vec::with_capacity(steps + 1);
    let mut worst_herm = 0.0f64;
    let mut worst_trace = 0.0f64;
    for s in 0..=steps {
        if s > 0 {
            prop.step(&mut rho)?;
        }
        let tr = rho.trace();
        let herm = rho.hermiticity_violation();
        worst_herm = worst_herm.max(herm);
        worst_trace = worst_trace.max((tr - tr0).norm());
        let peak = wigner_at_zero_momentum(&rho, i0, params.hbar);
        decay.push([s as f64 * dt, tr.re, tr.im, peak, herm]);
        if snap_steps.contains(&s) {
            run.write_file(&format!("rho_{s:06}.csv"), |f| rho.write_csv(f))?;
            let w = wigner_transform(&rho, &p_grid, params.hbar)?;
            run.write_file(&format!("wigner_{s:06}.csv"), |f| w.write_csv(f))?;
        }
    }
    run.write_file("decay.csv", |f| write_csv_rows(f, &["t", "trace_re", "trace_im", "peak", "hermiticity"], &decay))?;

    let t_end = steps as f64 * dt;
    let (first, last) = (decay[0][3], decay[steps][3]);
    let slope = if steps > 0 && first > 0.0 && last > 0.0 { -(last / first).ln() / t_end } else { f64::NAN };
    let target = dp.lambda * d * d;
    let record = serde_json::json!({
        "lambda": dp.lambda,
        "thermal_length": dp.thermal_length,
        "separation": d,
        "slope": slope,
        "lambda_d2": target,
        "ratio": slope / target,
    });
    run.write_file("decay_slope.jsonl", |f| writeln!(f, "{record}"))?;
    run.say(format!("decoherence: slope {slope:.6e}, Λd² = {target:.6e}, ratio {:.4}", slope / target));

    run.check(CheckRecord::new("hermiticity", worst_herm, 0.0, worst_herm < 1e-8));
    if ordering == Ordering::MomentaLeft {
        run.check(CheckRecord::abs("trace_conservation", worst_trace, 0.0, 1e-8));
    }
    Ok(())
}
