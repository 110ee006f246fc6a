//! Langevin ensemble versus Fokker-Planck grid solution.
//!
//! Both sides start from the same Gaussian cloud. A point initial
//! condition is widened to a Gaussian of `init_width` (default two cells)
//! on both sides, so the comparison measures dynamics only.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{Axis, KramersSolver, Ordering, PhaseGrid, ProbField, SmoluchowskiSolver};
use crate::error::{invalid, Error, Result};
use crate::langevin_sim::{simulate_into, Histogram, HistogramSpec, InitialCondition, Mode, SimConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct CompareConfig {
    pub sim: SimConfig,
    pub mode: Mode,
    /// 1D for overdamped, `(x, v)` for inertial.
    pub grid: PhaseGrid,
    pub times: Vec<f64>,
    /// Grid cells per histogram bin along `x`; must be even.
    pub cells_per_bin: usize,
    /// Width used in place of a point start, in `x` and `v`.
    pub init_width: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRecord {
    pub t: f64,
    /// `Σ |p̂_b - q_b|` over bins (L1 of the densities).
    pub l1: f64,
    /// Largest density difference over bins.
    pub sup: f64,
    /// Expected L1 from multinomial sampling, `Σ √(2 q_b (1 - q_b) / π n)`.
    pub stat_err: f64,
    /// L1 between the grid solution and the same solve on a half-resolution grid.
    pub disc_err: f64,
    pub mean_langevin: f64,
    pub var_langevin: f64,
    pub mean_fp: f64,
    pub var_fp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub records: Vec<ComparisonRecord>,
    pub trajectories: usize,
    pub diverged: usize,
    pub init_width: (f64, f64),
}

impl ComparisonReport {
    /// One JSON object per line.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            writeln!(out)?;
        }
        Ok(())
    }
}

fn bin_masses(marginal: &[f64], dx: f64, cells_per_bin: usize) -> Vec<f64> {
    marginal.chunks(cells_per_bin).map(|c| c.iter().sum::<f64>() * dx).collect()
}

fn marginal_moments(axis: &Axis, marginal: &[f64]) -> (f64, f64) {
    let dx = axis.spacing();
    let mass: f64 = marginal.iter().sum::<f64>() * dx;
    let mean = (0..axis.n).map(|i| axis.center(i) * marginal[i]).sum::<f64>() * dx / mass;
    let var = (0..axis.n).map(|i| (axis.center(i) - mean).powi(2) * marginal[i]).sum::<f64>() * dx / mass;
    (mean, var)
}

enum Solver {
    Line(SmoluchowskiSolver),
    Plane(KramersSolver),
}

impl Solver {
    fn evolve(&mut self, field: &mut ProbField, t: f64) -> Result<()> {
        match self {
            Self::Line(s) => s.evolve(field, t),
            Self::Plane(s) => s.evolve(field, t),
        }
    }
}

fn build(grid: PhaseGrid, cfg: &CompareConfig, mean: (f64, f64), width: (f64, f64)) -> (Solver, ProbField) {
    let (pot, params) = (&cfg.sim.potential, &cfg.sim.params);
    match grid.v {
        None => (
            Solver::Line(SmoluchowskiSolver::new(grid.x, pot, params, Ordering::MomentaLeft)),
            ProbField::gaussian_1d(grid.x, mean.0, width.0),
        ),
        Some(v) => (
            Solver::Plane(KramersSolver::new(grid.x, v, pot, params, Ordering::MomentaLeft)),
            ProbField::gaussian_2d(grid.x, v, mean, width),
        ),
    }
}

pub fn compare_langevin_fp(cfg: &CompareConfig) -> Result<ComparisonReport> {
    match (cfg.mode, cfg.grid.v) {
        (Mode::Overdamped, None) | (Mode::Inertial, Some(_)) => {}
        _ => return Err(Error::DomainMismatch("overdamped needs an x grid, inertial an (x, v) grid".into())),
    }
    if cfg.cells_per_bin < 2 || !cfg.cells_per_bin.is_multiple_of(2) || !cfg.grid.x.n.is_multiple_of(cfg.cells_per_bin) {
        return Err(invalid("cells_per_bin", "must be even and divide the x cell count"));
    }
    let dt = cfg.sim.dt;
    let mut steps = Vec::with_capacity(cfg.times.len());
    for &t in &cfg.times {
        let s = (t / dt).round();
        if t < 0.0 || (s * dt - t).abs() > 1e-9 * t.max(1.0) {
            return Err(invalid("times", format!("time {t} is not a multiple of dt = {dt}")));
        }
        steps.push(s as usize);
    }
    let last_step = steps.iter().copied().max().unwrap_or(0);

    let dx = cfg.grid.x.spacing();
    let default_width = (2.0 * dx, cfg.grid.v.map_or(0.0, |v| 2.0 * v.spacing()));
    let (mean, width) = match cfg.sim.initial {
        InitialCondition::Point { x, v } => ((x, v), cfg.init_width.unwrap_or(default_width)),
        InitialCondition::Gaussian { mean_x, std_x, mean_v, std_v } => ((mean_x, mean_v), (std_x, std_v)),
    };
    let mut sim = cfg.sim.clone();
    sim.steps = last_step;
    sim.initial = InitialCondition::Gaussian { mean_x: mean.0, std_x: width.0, mean_v: mean.1, std_v: width.1 };
    if cfg.mode == Mode::Overdamped {
        sim.initial = InitialCondition::Gaussian { mean_x: mean.0, std_x: width.0, mean_v: 0.0, std_v: 0.0 };
    }
    sim.validate()?;

    let spec = HistogramSpec { lo: cfg.grid.x.min, hi: cfg.grid.x.max, bins: cfg.grid.x.n / cfg.cells_per_bin };
    let mut hists: Vec<Histogram> = steps.iter().map(|_| Histogram::new(spec)).collect();
    let mut moments: Vec<crate::langevin_sim::Moments> = vec![Default::default(); steps.len()];
    let (mut xs, mut vs) = (Vec::new(), Vec::new());
    let mut diverged = 0;
    for index in 0..sim.n_traj {
        if simulate_into(&sim, cfg.mode, index, &mut xs, &mut vs).is_err() {
            diverged += 1;
            continue;
        }
        for ((h, m), &s) in hists.iter_mut().zip(&mut moments).zip(&steps) {
            h.push(xs[s]);
            m.push(xs[s]);
        }
    }
    let n = (sim.n_traj - diverged) as f64;

    let coarse_grid = cfg.grid.coarsened()?;
    let (mut fine, mut fine_field) = build(cfg.grid, cfg, mean, width);
    let (mut coarse, mut coarse_field) = build(coarse_grid, cfg, mean, width);
    let mut order: Vec<usize> = (0..steps.len()).collect();
    order.sort_by(|&a, &b| cfg.times[a].total_cmp(&cfg.times[b]));
    let mut records = vec![None; steps.len()];
    for k in order {
        let t = cfg.times[k];
        fine.evolve(&mut fine_field, t)?;
        coarse.evolve(&mut coarse_field, t)?;
        let fine_marg = fine_field.marginal_x();
        let q = bin_masses(&fine_marg, dx, cfg.cells_per_bin);
        let q_coarse = bin_masses(&coarse_field.marginal_x(), coarse_grid.x.spacing(), cfg.cells_per_bin / 2);
        let p_hat = hists[k].probabilities();
        let width_bin = hists[k].width();
        let l1: f64 = p_hat.iter().zip(&q).map(|(a, b)| (a - b).abs()).sum();
        let sup = p_hat.iter().zip(&q).map(|(a, b)| (a - b).abs() / width_bin).fold(0.0, f64::max);
        let stat_err: f64 = q.iter().map(|&qb| (2.0 * qb.max(0.0) * (1.0 - qb).max(0.0) / (std::f64::consts::PI * n)).sqrt()).sum();
        let disc_err: f64 = q.iter().zip(&q_coarse).map(|(a, b)| (a - b).abs()).sum();
        let (mean_fp, var_fp) = marginal_moments(&cfg.grid.x, &fine_marg);
        records[k] = Some(ComparisonRecord {
            t,
            l1,
            sup,
            stat_err,
            disc_err,
            mean_langevin: moments[k].mean,
            var_langevin: moments[k].variance(),
            mean_fp,
            var_fp,
        });
    }
    Ok(ComparisonReport {
        records: records.into_iter().map(|r| r.expect("every time evaluated")).collect(),
        trajectories: sim.n_traj,
        diverged,
        init_width: width,
    })
}
