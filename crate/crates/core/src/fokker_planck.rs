//! Finite-volume solvers for the Kramers equation in `(x, v)` and the
//! Smoluchowski equation in `x`, with selectable operator ordering.
//!
//! Both solvers write the evolution in flux form on cell-centered grids
//! with zero-flux (reflecting) walls, so the momenta-left ordering conserves
//! mass to rounding. The symmetric ordering is the same operator plus the
//! commutator term, applied as an exact exponential sink after each step:
//! `γ/2` for Kramers, `V''(x)/2Mγ` pointwise for Smoluchowski.
//!
//! Sign convention: `∂_t P = -H P`, with `p = -i∂` and the ordering chosen
//! so that the momenta-left generator is a total derivative.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bath_kernels::BathParams;
use crate::error::{invalid, Error, Result};
use crate::io::fmt17;
use crate::potential::Potential;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && max > min) {
            return Err(invalid("axis", format!("need finite min < max, got [{min}, {max}]")));
        }
        if n < 16 {
            return Err(invalid("axis", format!("need at least 16 cells, got {n}")));
        }
        Ok(Self { min, max, n })
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / self.n as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        self.min + (i as f64 + 0.5) * self.spacing()
    }

    pub fn face(&self, i: usize) -> f64 {
        self.min + i as f64 * self.spacing()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.center(i)).collect()
    }

    fn coarsened(&self) -> Result<Self> {
        Self::new(self.min, self.max, self.n / 2)
    }
}

/// Cell-centered grid in `x`, or in `(x, v)` when `v` is present.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub x: Axis,
    pub v: Option<Axis>,
}

impl PhaseGrid {
    pub fn line(x: Axis) -> Self {
        Self { x, v: None }
    }

    pub fn plane(x: Axis, v: Axis) -> Self {
        Self { x, v: Some(v) }
    }

    pub fn cells(&self) -> usize {
        self.x.n * self.v.map_or(1, |v| v.n)
    }

    pub fn cell_volume(&self) -> f64 {
        self.x.spacing() * self.v.map_or(1.0, |v| v.spacing())
    }

    fn coarsened(&self) -> Result<Self> {
        Ok(Self { x: self.x.coarsened()?, v: self.v.map(|v| v.coarsened()).transpose()? })
    }
}

fn cell_averages(axis: Axis, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let (nodes, weights) = crate::quad::gauss_legendre(6);
    let h = axis.spacing();
    (0..axis.n)
        .map(|i| {
            let c = axis.center(i);
            nodes.iter().zip(&weights).map(|(t, w)| 0.5 * w * f(c + 0.5 * h * t)).sum()
        })
        .collect()
}

/// Probability density on a [`PhaseGrid`]; 2D values are stored with `v`
/// varying fastest (`values[i * nv + j]`).
#[derive(Debug, Clone, PartialEq)]
pub struct ProbField {
    pub values: Vec<f64>,
    pub grid: PhaseGrid,
    pub time: f64,
}

impl ProbField {
    pub fn from_fn_1d(grid: Axis, f: impl Fn(f64) -> f64) -> Self {
        Self { values: grid.centers().into_iter().map(f).collect(), grid: PhaseGrid::line(grid), time: 0.0 }
    }

    pub fn from_fn_2d(x: Axis, v: Axis, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(x.n * v.n);
        for i in 0..x.n {
            for j in 0..v.n {
                values.push(f(x.center(i), v.center(j)));
            }
        }
        Self { values, grid: PhaseGrid::plane(x, v), time: 0.0 }
    }

    /// Gaussian averaged over each cell (6-point Gauss-Legendre per cell),
    /// rescaled to unit mass. Cell averages rather than center samples keep
    /// narrow clouds faithful on a finite-volume grid.
    pub fn gaussian_1d(grid: Axis, mean: f64, std: f64) -> Self {
        let avg = cell_averages(grid, |x| (-0.5 * ((x - mean) / std).powi(2)).exp());
        let mut p = Self { values: avg, grid: PhaseGrid::line(grid), time: 0.0 };
        p.normalize();
        p
    }

    /// Product of cell-averaged Gaussians in `x` and `v`.
    pub fn gaussian_2d(x: Axis, v: Axis, mean: (f64, f64), std: (f64, f64)) -> Self {
        let gx = cell_averages(x, |a| (-0.5 * ((a - mean.0) / std.0).powi(2)).exp());
        let gv = cell_averages(v, |b| (-0.5 * ((b - mean.1) / std.1).powi(2)).exp());
        let values = gx.iter().flat_map(|a| gv.iter().map(move |b| a * b)).collect();
        let mut p = Self { values, grid: PhaseGrid::plane(x, v), time: 0.0 };
        p.normalize();
        p
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn normalize(&mut self) {
        let m = self.mass();
        self.values.iter_mut().for_each(|p| *p /= m);
    }

    /// Marginal density in `x`.
    pub fn marginal_x(&self) -> Vec<f64> {
        match self.grid.v {
            None => self.values.clone(),
            Some(v) => self.values.chunks(v.n).map(|row| row.iter().sum::<f64>() * v.spacing()).collect(),
        }
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `∫ |P - Q|` against another field on the same grid.
    pub fn l1_distance(&self, other: &[f64]) -> f64 {
        self.values.iter().zip(other).map(|(a, b)| (a - b).abs()).sum::<f64>() * self.grid.cell_volume()
    }

    /// CSV with columns `x,P` or `x,v,P`; negative undershoot is clamped.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        match self.grid.v {
            None => {
                writeln!(out, "x,P")?;
                for (i, p) in self.values.iter().enumerate() {
                    writeln!(out, "{},{}", fmt17(self.grid.x.center(i)), fmt17(p.max(0.0)))?;
                }
            }
            Some(v) => {
                writeln!(out, "x,v,P")?;
                for i in 0..self.grid.x.n {
                    for j in 0..v.n {
                        let p = self.values[i * v.n + j].max(0.0);
                        writeln!(out, "{},{},{}", fmt17(self.grid.x.center(i)), fmt17(v.center(j)), fmt17(p))?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Placement of momentum operators in the Fokker-Planck generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ordering {
    /// All momenta to the left of all coordinates; conserves probability.
    MomentaLeft,
    /// Symmetrized products, which add the commutator as a sink.
    Symmetric,
}

/// Bernoulli function `z / (e^z - 1)`.
fn bernoulli(z: f64) -> f64 {
    if z.abs() < 1e-6 {
        1.0 - 0.5 * z + z * z / 12.0
    } else {
        z / z.exp_m1()
    }
}

fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

fn check_dt(dt: f64, max_dt: f64) -> Result<()> {
    if dt > 0.0 && dt <= max_dt {
        Ok(())
    } else {
        Err(Error::Unstable { dt, max_dt, suggested: 0.9 * max_dt })
    }
}

/// Explicit Smoluchowski solver,
/// `∂_t P = ∂_x [D ∂_x P + V'(x) P / Mγ]` (momenta left).
///
/// Face fluxes use exponential fitting on potential differences
/// (Scharfetter-Gummel): with `u = (V_{i+1} - V_i)/k_BT`,
/// `J = (D/dx) [B(u) P_i - B(-u) P_{i+1}]`, `B(z) = z/(e^z - 1)`. This is
/// upwinded for strong drift, centered for weak drift, and its discrete
/// steady state is exactly Boltzmann at the cell centers.
#[derive(Debug, Clone)]
pub struct SmoluchowskiSolver {
    axis: Axis,
    ordering: Ordering,
    /// `(D/dx) B(u)` and `(D/dx) B(-u)` per interior face.
    forward: Vec<f64>,
    backward: Vec<f64>,
    sink: Vec<f64>,
    max_dt: f64,
    flux: Vec<f64>,
}

impl SmoluchowskiSolver {
    pub fn new(axis: Axis, potential: &Potential, params: &BathParams, ordering: Ordering) -> Self {
        let dx = axis.spacing();
        let d = params.diffusion();
        let centers = axis.centers();
        let mut forward = Vec::with_capacity(axis.n - 1);
        let mut backward = Vec::with_capacity(axis.n - 1);
        for i in 0..axis.n - 1 {
            let u = (potential.value(centers[i + 1]) - potential.value(centers[i])) / params.kbt;
            forward.push(d / dx * bernoulli(u));
            backward.push(d / dx * bernoulli(-u));
        }
        // Forward-Euler positivity: the outflow of each cell per unit time.
        let mut outflow = 0.0f64;
        for i in 0..axis.n {
            let right = if i + 1 < axis.n { forward[i] } else { 0.0 };
            let left = if i > 0 { backward[i - 1] } else { 0.0 };
            outflow = outflow.max((right + left) / dx);
        }
        let max_dt = (1.0 / outflow).min(0.4 * dx * dx / d);
        let sink = centers.iter().map(|&x| potential.hess(x) / (2.0 * params.mass * params.gamma)).collect();
        Self { axis, ordering, forward, backward, sink, max_dt, flux: vec![0.0; axis.n + 1] }
    }

    pub fn max_dt(&self) -> f64 {
        self.max_dt
    }

    pub fn step(&mut self, field: &mut ProbField, dt: f64) -> Result<()> {
        if field.grid != PhaseGrid::line(self.axis) {
            return Err(Error::DomainMismatch("field grid differs from solver grid".into()));
        }
        check_dt(dt, self.max_dt)?;
        let p = &mut field.values;
        for i in 0..self.axis.n - 1 {
            self.flux[i + 1] = self.forward[i] * p[i] - self.backward[i] * p[i + 1];
        }
        let k = dt / self.axis.spacing();
        for i in 0..self.axis.n {
            p[i] -= k * (self.flux[i + 1] - self.flux[i]);
        }
        if self.ordering == Ordering::Symmetric {
            for (pi, s) in p.iter_mut().zip(&self.sink) {
                *pi *= (-dt * s).exp();
            }
        }
        field.time += dt;
        Ok(())
    }

    /// Advances to `t_end` with equal steps no larger than `max_dt`.
    pub fn evolve(&mut self, field: &mut ProbField, t_end: f64) -> Result<()> {
        evolve_with(field, t_end, self.max_dt, |f, dt| self.step(f, dt))
    }
}

fn evolve_with(field: &mut ProbField, t_end: f64, max_dt: f64, mut step: impl FnMut(&mut ProbField, f64) -> Result<()>) -> Result<()> {
    let span = t_end - field.time;
    if span <= 0.0 {
        return Ok(());
    }
    let n = (span / max_dt).ceil().max(1.0) as usize;
    let dt = span / n as f64;
    let t0 = field.time;
    for k in 0..n {
        step(field, dt)?;
        field.time = t0 + (k + 1) as f64 * dt;
    }
    Ok(())
}

/// One step of the Smoluchowski equation.
pub fn smoluchowski_step(field: &ProbField, potential: &Potential, params: &BathParams, ordering: Ordering, dt: f64) -> Result<ProbField> {
    let mut solver = SmoluchowskiSolver::new(field.grid.x, potential, params, ordering);
    let mut next = field.clone();
    solver.step(&mut next, dt)?;
    Ok(next)
}

/// Explicit Kramers solver,
/// `∂_t P = -∂_x(vP) + ∂_v[(γv + V'(x)/M) P] + (γ k_BT/M) ∂_v² P`.
///
/// Streaming in `x` uses MUSCL reconstruction with a minmod limiter;
/// the velocity direction uses exponentially fitted fluxes for the local
/// drift and diffusion. Time stepping is two-stage SSP Runge-Kutta.
#[derive(Debug, Clone)]
pub struct KramersSolver {
    x: Axis,
    v: Axis,
    ordering: Ordering,
    gamma: f64,
    /// `(Dv/dv) B(-Pe)` and `(Dv/dv) B(Pe)` per `(i, interior v-face)`.
    up: Vec<f64>,
    down: Vec<f64>,
    max_dt: f64,
    rate: Vec<f64>,
    stage: Vec<f64>,
}

impl KramersSolver {
    pub fn new(x: Axis, v: Axis, potential: &Potential, params: &BathParams, ordering: Ordering) -> Self {
        let (dx, dv) = (x.spacing(), v.spacing());
        let dv_diff = params.gamma * params.kbt / params.mass;
        let mut up = Vec::with_capacity(x.n * (v.n - 1));
        let mut down = Vec::with_capacity(x.n * (v.n - 1));
        let mut v_outflow = 0.0f64;
        for i in 0..x.n {
            let force = potential.grad(x.center(i)) / params.mass;
            let base = up.len();
            for j in 0..v.n - 1 {
                let drift = -(params.gamma * v.face(j + 1) + force);
                let pe = drift * dv / dv_diff;
                up.push(dv_diff / dv * bernoulli(-pe));
                down.push(dv_diff / dv * bernoulli(pe));
            }
            for j in 0..v.n {
                let out_up = if j + 1 < v.n { up[base + j] } else { 0.0 };
                let out_down = if j > 0 { down[base + j - 1] } else { 0.0 };
                v_outflow = v_outflow.max((out_up + out_down) / dv);
            }
        }
        let v_max = v.min.abs().max(v.max.abs());
        // MUSCL-minmod forward Euler stays positive at CFL 1/2.
        let max_dt = 1.0 / (2.0 * v_max / dx + v_outflow);
        Self { x, v, ordering, gamma: params.gamma, up, down, max_dt, rate: vec![0.0; x.n * v.n], stage: vec![0.0; x.n * v.n] }
    }

    pub fn max_dt(&self) -> f64 {
        self.max_dt
    }

    /// `rate = dP/dt` for the momenta-left operator.
    fn rhs(&self, p: &[f64], rate: &mut [f64]) {
        let (nx, nv) = (self.x.n, self.v.n);
        let (dx, dv) = (self.x.spacing(), self.v.spacing());
        rate.iter_mut().for_each(|r| *r = 0.0);
        let at = |i: usize, j: usize| p[i * nv + j];
        for j in 0..nv {
            let vel = self.v.center(j);
            let slope = |i: usize| {
                if i == 0 || i + 1 == nx {
                    0.0
                } else {
                    minmod(at(i, j) - at(i - 1, j), at(i + 1, j) - at(i, j))
                }
            };
            for i in 0..nx - 1 {
                let state = if vel >= 0.0 { at(i, j) + 0.5 * slope(i) } else { at(i + 1, j) - 0.5 * slope(i + 1) };
                let f = vel * state / dx;
                rate[i * nv + j] -= f;
                rate[(i + 1) * nv + j] += f;
            }
        }
        for i in 0..nx {
            let row = &p[i * nv..(i + 1) * nv];
            let faces = i * (nv - 1);
            for j in 0..nv - 1 {
                let f = (self.up[faces + j] * row[j] - self.down[faces + j] * row[j + 1]) / dv;
                rate[i * nv + j] -= f;
                rate[i * nv + j + 1] += f;
            }
        }
    }

    pub fn step(&mut self, field: &mut ProbField, dt: f64) -> Result<()> {
        if field.grid != PhaseGrid::plane(self.x, self.v) {
            return Err(Error::DomainMismatch("field grid differs from solver grid".into()));
        }
        check_dt(dt, self.max_dt)?;
        let mut rate = std::mem::take(&mut self.rate);
        let mut stage = std::mem::take(&mut self.stage);
        self.rhs(&field.values, &mut rate);
        for ((s, p), r) in stage.iter_mut().zip(&field.values).zip(&rate) {
            *s = p + dt * r;
        }
        self.rhs(&stage, &mut rate);
        for ((p, s), r) in field.values.iter_mut().zip(&stage).zip(&rate) {
            *p = 0.5 * *p + 0.5 * (s + dt * r);
        }
        self.rate = rate;
        self.stage = stage;
        if self.ordering == Ordering::Symmetric {
            let decay = (-0.5 * self.gamma * dt).exp();
            field.values.iter_mut().for_each(|p| *p *= decay);
        }
        field.time += dt;
        Ok(())
    }

    pub fn evolve(&mut self, field: &mut ProbField, t_end: f64) -> Result<()> {
        let max_dt = self.max_dt;
        evolve_with(field, t_end, max_dt, |f, dt| self.step(f, dt))
    }
}

/// One step of the Kramers equation.
pub fn kramers_step(field: &ProbField, potential: &Potential, params: &BathParams, ordering: Ordering, dt: f64) -> Result<ProbField> {
    let v = field.grid.v.ok_or_else(|| Error::DomainMismatch("Kramers step needs an (x, v) grid".into()))?;
    let mut solver = KramersSolver::new(field.grid.x, v, potential, params, ordering);
    let mut next = field.clone();
    solver.step(&mut next, dt)?;
    Ok(next)
}

/// Boltzmann density `∝ e^{-V/k_BT}` (1D) or `∝ e^{-(Mv²/2 + V)/k_BT}`
/// (2D) at the cell centers of `grid`, normalized on the grid.
pub fn boltzmann(grid: PhaseGrid, potential: &Potential, params: &BathParams) -> ProbField {
    let beta = 1.0 / params.kbt;
    let mut p = match grid.v {
        None => ProbField::from_fn_1d(grid.x, |x| (-beta * potential.value(x)).exp()),
        Some(v) => ProbField::from_fn_2d(grid.x, v, |x, u| (-beta * (0.5 * params.mass * u * u + potential.value(x))).exp()),
    };
    p.normalize();
    p
}

pub mod compare;

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> BathParams {
        BathParams::new(1.0, 1.0, 0.5, 0.0).unwrap()
    }

    #[test]
    fn bernoulli_branches_agree() {
        for z in [-1.0001e-6, -0.9999e-6, 0.9999e-6, 1.0001e-6] {
            assert!((bernoulli(z) - z / z.exp_m1()).abs() < 1e-12);
        }
        assert_eq!(bernoulli(0.0), 1.0);
    }

    #[test]
    fn axis_rejects_small_grids() {
        assert!(Axis::new(-1.0, 1.0, 8).is_err());
        assert!(Axis::new(1.0, -1.0, 32).is_err());
    }

    #[test]
    fn too_large_step_reports_suggestion() {
        let axis = Axis::new(-4.0, 4.0, 64).unwrap();
        let p = ProbField::gaussian_1d(axis, 0.0, 1.0);
        let pot = Potential::harmonic(1.0, 1.0).unwrap();
        match smoluchowski_step(&p, &pot, &params(), Ordering::MomentaLeft, 1.0) {
            Err(Error::Unstable { suggested, max_dt, .. }) => assert!(suggested < max_dt),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn smoluchowski_steady_state_is_fixed_point() {
        let axis = Axis::new(-3.5, 3.5, 128).unwrap();
        let pot = Potential::double_well(-1.0, 0.25).unwrap();
        let p = boltzmann(PhaseGrid::line(axis), &pot, &params());
        let mut solver = SmoluchowskiSolver::new(axis, &pot, &params(), Ordering::MomentaLeft);
        let mut q = p.clone();
        solver.step(&mut q, solver.max_dt()).unwrap();
        assert!(p.l1_distance(&q.values) < 1e-13);
    }

    #[test]
    fn kramers_needs_plane_grid() {
        let axis = Axis::new(-4.0, 4.0, 32).unwrap();
        let p = ProbField::gaussian_1d(axis, 0.0, 1.0);
        let pot = Potential::free();
        assert!(matches!(kramers_step(&p, &pot, &params(), Ordering::MomentaLeft, 1e-3), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn csv_clamps_undershoot() {
        let axis = Axis::new(0.0, 1.6, 16).unwrap();
        let mut p = ProbField::from_fn_1d(axis, |_| 1.0);
        p.values[0] = -1e-13;
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "5.0000000000000003e-2,0.0000000000000000e0");
    }
}
