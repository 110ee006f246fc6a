//! Langevin integrators with inertia and in the overdamped limit, ensemble
//! statistics, and noise-averaged trajectory functionals.
//!
//! All drift and force terms are evaluated at the earlier point of each
//! step (pre-point). With that slicing the map from noise to trajectory is
//! lower triangular with unit diagonal, so noise averages need no Jacobian
//! weight. The noise is additive, so Itô and Stratonovich readings agree and
//! no drift correction is applied.

use std::io::Write;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bath_kernels::BathParams;
use crate::error::{invalid, require_positive, Error, Result};
use crate::io::fmt17;
use crate::noise_gen::{colored_noise, derive_seed, rng_from_seed, NoiseKernel, NoiseSpec, WhiteNoiseStream};
use crate::potential::Potential;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InertialState {
    pub x: f64,
    pub v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Inertial,
    Overdamped,
}

/// Where the overdamped force is evaluated within a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum StepPoint {
    #[default]
    PrePoint,
    /// Implicit evaluation at the later point; a diagnostic for the
    /// advanced slicing.
    PostPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InitialCondition {
    Point { x: f64, v: f64 },
    Gaussian { mean_x: f64, std_x: f64, mean_v: f64, std_v: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramSpec {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

/// Which steps contribute to the statistics: every `stride`-th step at or
/// after `burn_in`. Step `steps` (the final state) is always eligible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    pub burn_in: usize,
    pub stride: usize,
}

impl Sampling {
    /// Record only the final state.
    pub fn final_only(steps: usize) -> Self {
        Self { burn_in: steps, stride: 1 }
    }

    fn records(&self, step: usize) -> bool {
        step >= self.burn_in && (step - self.burn_in).is_multiple_of(self.stride)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub potential: Potential,
    pub params: BathParams,
    pub dt: f64,
    pub steps: usize,
    pub n_traj: usize,
    pub master_seed: u64,
    pub initial: InitialCondition,
    pub noise: NoiseKernel,
    pub step_point: StepPoint,
    pub sampling: Sampling,
    pub hist_x: HistogramSpec,
    pub hist_v: Option<HistogramSpec>,
    pub autocorr_lags: usize,
}

impl SimConfig {
    /// Defaults: white noise, pre-point steps, final-state sampling, no
    /// autocorrelation, histogram over ±6 stationary widths of a unit box.
    pub fn new(potential: Potential, params: BathParams, dt: f64, steps: usize, n_traj: usize, master_seed: u64) -> Self {
        Self {
            potential,
            params,
            dt,
            steps,
            n_traj,
            master_seed,
            initial: InitialCondition::Point { x: 0.0, v: 0.0 },
            noise: NoiseKernel::White,
            step_point: StepPoint::PrePoint,
            sampling: Sampling::final_only(steps),
            hist_x: HistogramSpec { lo: -6.0, hi: 6.0, bins: 60 },
            hist_v: None,
            autocorr_lags: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("dt", self.dt)?;
        if self.dt * self.params.gamma >= 0.1 {
            let suggested = 0.05 / self.params.gamma;
            return Err(Error::Unstable { dt: self.dt, max_dt: 0.1 / self.params.gamma, suggested });
        }
        if self.steps == 0 {
            return Err(invalid("steps", "need at least one step"));
        }
        if self.n_traj == 0 {
            return Err(invalid("n_traj", "need at least one trajectory"));
        }
        if self.sampling.stride == 0 {
            return Err(invalid("stride", "must be >= 1"));
        }
        for h in std::iter::once(&self.hist_x).chain(self.hist_v.as_ref()) {
            if !(h.hi > h.lo) || h.bins == 0 {
                return Err(invalid("histogram", "need hi > lo and bins >= 1"));
            }
        }
        Ok(())
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.dt
    }
}

fn check_finite(step: usize, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::TrajectoryDiverged { step })
    }
}

/// Pre-point step of `M ẍ + M γ ẋ + V'(x) = η`.
pub fn step_inertial(state: InertialState, potential: &Potential, params: &BathParams, eta: f64, dt: f64) -> Result<InertialState> {
    let m = params.mass;
    let accel = -params.gamma * state.v - potential.grad(state.x) / m + eta / m;
    let next = InertialState { x: state.x + dt * state.v, v: state.v + dt * accel };
    check_finite(0, &[next.x, next.v])?;
    Ok(next)
}

/// Pre-point step of `M γ ẋ = -V'(x) + η`.
pub fn step_overdamped(x: f64, potential: &Potential, params: &BathParams, eta: f64, dt: f64) -> Result<f64> {
    let next = x + dt / (params.mass * params.gamma) * (-potential.grad(x) + eta);
    check_finite(0, &[next])?;
    Ok(next)
}

/// Post-point step, `x⁺ = x + (dt/Mγ)(-V'(x⁺) + η)`, solved by Newton.
pub fn step_overdamped_postpoint(x: f64, potential: &Potential, params: &BathParams, eta: f64, dt: f64) -> Result<f64> {
    let k = dt / (params.mass * params.gamma);
    let mut y = x + k * (-potential.grad(x) + eta);
    for _ in 0..50 {
        let residual = y - x - k * (-potential.grad(y) + eta);
        let slope = 1.0 + k * potential.hess(y);
        let delta = residual / slope;
        y -= delta;
        if !y.is_finite() {
            break;
        }
        if delta.abs() <= 1e-15 * (1.0 + y.abs()) {
            break;
        }
    }
    check_finite(0, &[y])?;
    Ok(y)
}

/// Running mean and variance (Welford), mergeable with Chan's update.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let d = other.mean - self.mean;
        self.mean += d * other.count as f64 / n;
        self.m2 += other.m2 + d * d * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CoMoment {
    count: u64,
    mean_a: f64,
    mean_b: f64,
    c: f64,
}

impl CoMoment {
    pub fn push(&mut self, a: f64, b: f64) {
        self.count += 1;
        let n = self.count as f64;
        let da = a - self.mean_a;
        self.mean_a += da / n;
        self.mean_b += (b - self.mean_b) / n;
        self.c += da * (b - self.mean_b);
    }

    pub fn merge(&mut self, other: &CoMoment) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let da = other.mean_a - self.mean_a;
        let db = other.mean_b - self.mean_b;
        self.c += other.c + da * db * na * nb / n;
        self.mean_a += da * nb / n;
        self.mean_b += db * nb / n;
        self.count += other.count;
    }

    pub fn covariance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.c / (self.count - 1) as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub spec: HistogramSpec,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
}

impl Histogram {
    pub fn new(spec: HistogramSpec) -> Self {
        Self { spec, counts: vec![0; spec.bins], underflow: 0, overflow: 0 }
    }

    pub fn width(&self) -> f64 {
        (self.spec.hi - self.spec.lo) / self.spec.bins as f64
    }

    pub fn push(&mut self, x: f64) {
        if x < self.spec.lo {
            self.underflow += 1;
        } else if x >= self.spec.hi {
            self.overflow += 1;
        } else {
            let bin = (((x - self.spec.lo) / self.width()) as usize).min(self.spec.bins - 1);
            self.counts[bin] += 1;
        }
    }

    pub fn merge(&mut self, other: &Histogram) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.underflow += other.underflow;
        self.overflow += other.overflow;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.underflow + self.overflow
    }

    /// Probability mass per bin, normalized by all samples including
    /// those outside the range.
    pub fn probabilities(&self) -> Vec<f64> {
        let n = self.total().max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    pub fn densities(&self) -> Vec<f64> {
        let w = self.width();
        self.probabilities().into_iter().map(|p| p / w).collect()
    }

    pub fn edges(&self, bin: usize) -> (f64, f64) {
        let w = self.width();
        (self.spec.lo + bin as f64 * w, self.spec.lo + (bin + 1) as f64 * w)
    }

    /// CSV with columns `bin_left,bin_right,density`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "bin_left,bin_right,density")?;
        for (i, d) in self.densities().iter().enumerate() {
            let (l, r) = self.edges(i);
            writeln!(out, "{},{},{}", fmt17(l), fmt17(r), fmt17(*d))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub mode: Mode,
    pub n_traj: usize,
    pub accepted: usize,
    pub diverged: usize,
    /// Recorded states per accepted trajectory.
    pub records_per_traj: usize,
    pub x: Moments,
    pub v: Option<Moments>,
    /// Moments of `x²` and `v²`, for standard errors of second moments.
    pub x_sq: Moments,
    pub v_sq: Option<Moments>,
    pub xv: Option<CoMoment>,
    pub hist_x: Histogram,
    pub hist_v: Option<Histogram>,
    /// Autocovariance of `x` at lags `0..` in units of recorded samples.
    pub autocorr_x: Vec<f64>,
}

impl EnsembleStats {
    /// CSV rows `key,value` for the scalar moments.
    pub fn write_moments_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "key,value")?;
        let mut row = |k: &str, v: f64| writeln!(out, "{k},{}", fmt17(v));
        row("n_traj", self.n_traj as f64)?;
        row("accepted", self.accepted as f64)?;
        row("diverged", self.diverged as f64)?;
        row("samples", self.x.count as f64)?;
        row("mean_x", self.x.mean)?;
        row("var_x", self.x.variance())?;
        row("se_mean_x", self.x.std_error())?;
        row("mean_x2", self.x_sq.mean)?;
        row("se_mean_x2", self.x_sq.std_error())?;
        if let (Some(v), Some(v2)) = (&self.v, &self.v_sq) {
            row("mean_v", v.mean)?;
            row("var_v", v.variance())?;
            row("mean_v2", v2.mean)?;
            row("se_mean_v2", v2.std_error())?;
        }
        if let Some(xv) = &self.xv {
            row("cov_xv", xv.covariance())?;
        }
        for (k, c) in self.autocorr_x.iter().enumerate() {
            row(&format!("acov_x_{k}"), *c)?;
        }
        Ok(())
    }
}

/// Borrowed view of one simulated path, handed to trajectory functionals.
#[derive(Debug, Clone, Copy)]
pub struct TrajectoryView<'a> {
    pub dt: f64,
    pub x: &'a [f64],
    pub v: Option<&'a [f64]>,
}

impl TrajectoryView<'_> {
    pub fn final_x(&self) -> f64 {
        *self.x.last().expect("trajectory has at least the initial point")
    }
}

fn initial_state(config: &SimConfig, traj_seed: u64) -> InertialState {
    match config.initial {
        InitialCondition::Point { x, v } => InertialState { x, v },
        InitialCondition::Gaussian { mean_x, std_x, mean_v, std_v } => {
            // separate stream so the noise sequence does not depend on it
            let mut rng = rng_from_seed(derive_seed(traj_seed, u64::MAX));
            let zx: f64 = StandardNormal.sample(&mut rng);
            let zv: f64 = StandardNormal.sample(&mut rng);
            InertialState { x: mean_x + std_x * zx, v: mean_v + std_v * zv }
        }
    }
}

fn noise_source(config: &SimConfig, seed: u64) -> Result<Box<dyn Iterator<Item = f64>>> {
    let w = config.params.noise_strength();
    match &config.noise {
        NoiseKernel::White => Ok(Box::new(WhiteNoiseStream::new(w, config.dt, seed))),
        colored => {
            let spec = NoiseSpec { kernel: colored.clone(), w, dt: config.dt, n: config.steps, seed };
            Ok(Box::new(colored_noise(&spec)?.samples.into_iter()))
        }
    }
}

/// Simulates trajectory `index`, storing every state in `xs` / `vs`.
pub(crate) fn simulate_into(config: &SimConfig, mode: Mode, index: usize, xs: &mut Vec<f64>, vs: &mut Vec<f64>) -> Result<()> {
    let seed = derive_seed(config.master_seed, index as u64);
    let mut state = initial_state(config, seed);
    let mut noise = noise_source(config, seed)?;
    xs.clear();
    vs.clear();
    xs.push(state.x);
    vs.push(state.v);
    let (pot, params, dt) = (&config.potential, &config.params, config.dt);
    for step in 1..=config.steps {
        let eta = noise.next().unwrap_or(0.0);
        let next = match mode {
            Mode::Inertial => step_inertial(state, pot, params, eta, dt),
            Mode::Overdamped => match config.step_point {
                StepPoint::PrePoint => step_overdamped(state.x, pot, params, eta, dt),
                StepPoint::PostPoint => step_overdamped_postpoint(state.x, pot, params, eta, dt),
            }
            .map(|x| InertialState { x, v: 0.0 }),
        };
        state = next.map_err(|_| Error::TrajectoryDiverged { step })?;
        xs.push(state.x);
        vs.push(state.v);
    }
    Ok(())
}

struct Accumulator {
    x: Moments,
    v: Moments,
    x_sq: Moments,
    v_sq: Moments,
    xv: CoMoment,
    hist_x: Histogram,
    hist_v: Option<Histogram>,
    lag_sums: Vec<f64>,
    lag_counts: Vec<u64>,
}

impl Accumulator {
    fn new(config: &SimConfig) -> Self {
        Self {
            x: Moments::default(),
            v: Moments::default(),
            x_sq: Moments::default(),
            v_sq: Moments::default(),
            xv: CoMoment::default(),
            hist_x: Histogram::new(config.hist_x),
            hist_v: config.hist_v.map(Histogram::new),
            lag_sums: vec![0.0; config.autocorr_lags + 1],
            lag_counts: vec![0; config.autocorr_lags + 1],
        }
    }

    fn merge(&mut self, other: &Accumulator) {
        self.x.merge(&other.x);
        self.v.merge(&other.v);
        self.x_sq.merge(&other.x_sq);
        self.v_sq.merge(&other.v_sq);
        self.xv.merge(&other.xv);
        self.hist_x.merge(&other.hist_x);
        if let (Some(a), Some(b)) = (&mut self.hist_v, &other.hist_v) {
            a.merge(b);
        }
        for (a, b) in self.lag_sums.iter_mut().zip(&other.lag_sums) {
            *a += b;
        }
        for (a, b) in self.lag_counts.iter_mut().zip(&other.lag_counts) {
            *a += b;
        }
    }
}

/// Runs `n_traj` independent trajectories with seeds derived from the
/// master seed. Per-trajectory accumulators are merged in index order, so
/// the result is bit-for-bit reproducible. Diverged trajectories are
/// dropped and counted.
pub fn run_ensemble(config: &SimConfig, mode: Mode) -> Result<EnsembleStats> {
    config.validate()?;
    let mut total = Accumulator::new(config);
    let (mut xs, mut vs, mut rec) = (Vec::new(), Vec::new(), Vec::new());
    let mut diverged = 0;
    let mut records_per_traj = 0;
    for index in 0..config.n_traj {
        match simulate_into(config, mode, index, &mut xs, &mut vs) {
            Ok(()) => {}
            Err(Error::TrajectoryDiverged { .. }) => {
                diverged += 1;
                continue;
            }
            Err(e) => return Err(e),
        }
        let mut acc = Accumulator::new(config);
        rec.clear();
        for step in 0..=config.steps {
            if !config.sampling.records(step) {
                continue;
            }
            let (x, v) = (xs[step], vs[step]);
            rec.push(x);
            acc.x.push(x);
            acc.x_sq.push(x * x);
            acc.hist_x.push(x);
            if mode == Mode::Inertial {
                acc.v.push(v);
                acc.v_sq.push(v * v);
                acc.xv.push(x, v);
                if let Some(h) = &mut acc.hist_v {
                    h.push(v);
                }
            }
        }
        records_per_traj = rec.len();
        for lag in 0..=config.autocorr_lags.min(rec.len().saturating_sub(1)) {
            acc.lag_sums[lag] = rec.iter().zip(&rec[lag..]).map(|(a, b)| a * b).sum();
            acc.lag_counts[lag] = (rec.len() - lag) as u64;
        }
        total.merge(&acc);
    }
    let mean = total.x.mean;
    let autocorr_x = if config.autocorr_lags == 0 {
        Vec::new()
    } else {
        total.lag_sums.iter().zip(&total.lag_counts).map(|(s, &c)| if c == 0 { 0.0 } else { s / c as f64 - mean * mean }).collect()
    };
    let inertial = mode == Mode::Inertial;
    Ok(EnsembleStats {
        mode,
        n_traj: config.n_traj,
        accepted: config.n_traj - diverged,
        diverged,
        records_per_traj,
        x: total.x,
        v: inertial.then_some(total.v),
        x_sq: total.x_sq,
        v_sq: inertial.then_some(total.v_sq),
        xv: inertial.then_some(total.xv),
        hist_x: total.hist_x,
        hist_v: if inertial { total.hist_v } else { None },
        autocorr_x,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    pub diverged: usize,
}

/// Monte-Carlo average of a trajectory functional over the noise, with a
/// delete-one jackknife standard error. No Jacobian reweighting is applied.
pub fn noise_expectation<F>(functional: F, config: &SimConfig, mode: Mode) -> Result<Estimate>
where
    F: Fn(&TrajectoryView) -> f64,
{
    config.validate()?;
    let (mut xs, mut vs) = (Vec::new(), Vec::new());
    let mut values = Vec::with_capacity(config.n_traj);
    let mut diverged = 0;
    for index in 0..config.n_traj {
        match simulate_into(config, mode, index, &mut xs, &mut vs) {
            Ok(()) => {}
            Err(Error::TrajectoryDiverged { .. }) => {
                diverged += 1;
                continue;
            }
            Err(e) => return Err(e),
        }
        let view = TrajectoryView { dt: config.dt, x: &xs, v: (mode == Mode::Inertial).then_some(&vs[..]) };
        values.push(functional(&view));
    }
    let (mean, std_error) = jackknife_mean(&values);
    Ok(Estimate { mean, std_error, samples: values.len(), diverged })
}

/// Mean and delete-one jackknife standard error.
pub fn jackknife_mean(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let sum: f64 = values.iter().sum();
    let mean = sum / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let nf = n as f64;
    let spread: f64 = values
        .iter()
        .map(|v| {
            let leave_out = (sum - v) / (nf - 1.0);
            (leave_out - mean).powi(2)
        })
        .sum();
    (mean, ((nf - 1.0) / nf * spread).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(gamma: f64) -> BathParams {
        BathParams::new(1.0, gamma, 0.5, 0.0).unwrap()
    }

    #[test]
    fn ballistic_motion_is_exact() {
        let p = BathParams { gamma: 0.0, ..params(1.0) };
        let free = Potential::free();
        let mut s = InertialState { x: 1.0, v: 0.5 };
        for _ in 0..100 {
            s = step_inertial(s, &free, &p, 0.0, 0.25).unwrap();
        }
        assert_eq!(s.v, 0.5);
        assert_eq!(s.x, 1.0 + 0.5 * 25.0);
    }

    #[test]
    fn velocity_relaxation_converges_to_exponential() {
        let free = Potential::free();
        let p = params(1.0);
        let errors: Vec<f64> = [1000usize, 2000]
            .iter()
            .map(|&n| {
                let dt = 1.0 / n as f64;
                let mut s = InertialState { x: 0.0, v: 1.0 };
                for _ in 0..n {
                    s = step_inertial(s, &free, &p, 0.0, dt).unwrap();
                }
                (s.v - (-1.0f64).exp()).abs()
            })
            .collect();
        assert!(errors[0] < 2e-4);
        assert!((errors[0] / errors[1] - 2.0).abs() < 0.1);
    }

    #[test]
    fn overdamped_deterministic_decay() {
        let pot = Potential::harmonic(1.0, 1.0).unwrap();
        let p = params(4.0);
        let dt = 1e-4;
        let mut x = 1.0;
        for _ in 0..20_000 {
            x = step_overdamped(x, &pot, &p, 0.0, dt).unwrap();
        }
        // rate ω₀²/γ = 1/4 over t = 2
        assert!((x - (-0.5f64).exp()).abs() < 1e-4);
    }

    #[test]
    fn postpoint_solves_implicit_equation() {
        let pot = Potential::double_well(-1.0, 0.25).unwrap();
        let p = params(2.0);
        let (x, eta, dt) = (0.7, 0.3, 0.01);
        let y = step_overdamped_postpoint(x, &pot, &p, eta, dt).unwrap();
        let k = dt / (p.mass * p.gamma);
        assert!((y - x - k * (-pot.grad(y) + eta)).abs() < 1e-14);
    }

    #[test]
    fn divergence_reported() {
        let pot = Potential::polynomial(vec![0.0, 0.0, 0.0, 0.0, -1.0]).unwrap();
        let p = params(1.0);
        let mut s = InertialState { x: 1e80, v: 0.0 };
        let mut result = Ok(s);
        for _ in 0..5 {
            result = step_inertial(s, &pot, &p, 0.0, 0.01);
            match result {
                Ok(n) => s = n,
                Err(_) => break,
            }
        }
        assert!(matches!(result, Err(Error::TrajectoryDiverged { .. })));
    }

    #[test]
    fn stability_guard() {
        let cfg = SimConfig::new(Potential::free(), params(2.0), 0.06, 10, 1, 0);
        assert!(matches!(cfg.validate(), Err(Error::Unstable { .. })));
    }

    #[test]
    fn zero_noise_point_start_fills_one_bin() {
        let mut p = params(1.0);
        p.kbt = f64::MIN_POSITIVE;
        let mut cfg = SimConfig::new(Potential::free(), p, 0.01, 50, 20, 1);
        cfg.initial = InitialCondition::Point { x: 0.3, v: 0.0 };
        let stats = run_ensemble(&cfg, Mode::Overdamped).unwrap();
        let occupied = stats.hist_x.counts.iter().filter(|&&c| c > 0).count();
        assert_eq!(occupied, 1);
        assert_eq!(stats.hist_x.counts.iter().sum::<u64>(), 20);
    }

    #[test]
    fn unit_functional_is_exact() {
        let cfg = SimConfig::new(Potential::free(), params(1.0), 0.01, 10, 50, 3);
        let e = noise_expectation(|_| 1.0, &cfg, Mode::Overdamped).unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn moments_merge_matches_sequential() {
        let data: Vec<f64> = (0..100).map(|i| ((i * 37) % 17) as f64 * 0.3 - 2.0).collect();
        let mut all = Moments::default();
        data.iter().for_each(|&x| all.push(x));
        let (mut a, mut b) = (Moments::default(), Moments::default());
        data[..40].iter().for_each(|&x| a.push(x));
        data[40..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert!((a.mean - all.mean).abs() < 1e-13);
        assert!((a.variance() - all.variance()).abs() < 1e-12);
    }

    #[test]
    fn jackknife_matches_classical_error_for_the_mean() {
        let v: Vec<f64> = (0..50).map(|i| (i as f64 * 0.7).sin()).collect();
        let (mean, se) = jackknife_mean(&v);
        let mut m = Moments::default();
        v.iter().for_each(|&x| m.push(x));
        assert!((mean - m.mean).abs() < 1e-14);
        assert!((se - m.std_error()).abs() < 1e-12);
    }
}
