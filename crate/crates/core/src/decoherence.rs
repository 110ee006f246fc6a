//! High-temperature density-matrix evolution in center/relative
//! coordinates `x = (x₊ + x₋)/2`, `y = x₊ - x₋`:
//!
//! `∂_t ρ = (iħ/M) ∂_x ∂_y ρ - γ y ∂_y ρ - (i/ħ)[V(x + y/2) - V(x - y/2)] ρ - Λ y² ρ`
//!
//! which is `iħ ∂_t ρ = H̄ ρ` with `H̄ = p̂_y p̂_x / M + γ y p̂_y + ΔV - i(w/2ħ) y²`
//! and `p̂ = -iħ∂`. The friction term acts as `y ∂_y` (derivative applied
//! directly to ρ), which leaves the diagonal `y = 0` untouched and conserves
//! the trace; [`Ordering::Symmetric`] adds the commutator sink `γ/2`.
//!
//! Each step is a Strang splitting: half steps of the pointwise factors
//! around an exact spectral kinetic step.

use std::io::Write;

use num_complex::Complex64;
use rustfft::{Fft, FftPlannerScalar};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::bath_kernels::BathParams;
use crate::error::{invalid, require_positive, Error, Result};
use crate::fokker_planck::Ordering;
use crate::io::fmt17;
use crate::potential::Potential;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoherenceParams {
    pub w: f64,
    pub diffusion: f64,
    /// Decoherence rate per square distance, `w / 2ħ²`.
    pub lambda: f64,
    /// Thermal length `√(2πħ²/(M k_BT))`.
    pub thermal_length: f64,
}

pub fn decoherence_params(params: &BathParams) -> Result<DecoherenceParams> {
    if params.hbar <= 0.0 {
        return Err(Error::ClassicalLimit);
    }
    let hbar2 = params.hbar * params.hbar;
    Ok(DecoherenceParams {
        w: params.noise_strength(),
        diffusion: params.diffusion(),
        lambda: params.noise_strength() / (2.0 * hbar2),
        thermal_length: (std::f64::consts::TAU * hbar2 / (params.mass * params.kbt)).sqrt(),
    })
}

/// Periodic node grid: `x_i = (i - nx/2) dx`, `y_j = (j - ny/2) dy`, both
/// counts even so that `x = 0` and `y = 0` are nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub nx: usize,
    pub dx: f64,
    pub ny: usize,
    pub dy: f64,
}

impl DensityGrid {
    pub fn new(nx: usize, dx: f64, ny: usize, dy: f64) -> Result<Self> {
        require_positive("dx", dx)?;
        require_positive("dy", dy)?;
        if nx < 16 || ny < 16 || !nx.is_multiple_of(2) || !ny.is_multiple_of(2) {
            return Err(invalid("grid", "nx and ny must be even and >= 16"));
        }
        Ok(Self { nx, dx, ny, dy })
    }

    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - (self.nx / 2) as f64) * self.dx
    }

    pub fn y(&self, j: usize) -> f64 {
        (j as f64 - (self.ny / 2) as f64) * self.dy
    }

    /// Index of `y = 0`.
    pub fn y_zero(&self) -> usize {
        self.ny / 2
    }

    pub fn x_zero(&self) -> usize {
        self.nx / 2
    }
}

/// Complex `ρ(x, y)` stored with `y` varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    pub values: Vec<Complex64>,
    pub grid: DensityGrid,
    pub time: f64,
}

impl DensityField {
    /// `ρ(x, y) = ψ(x + y/2) ψ*(x - y/2)`.
    pub fn pure_state(grid: DensityGrid, psi: impl Fn(f64) -> Complex64) -> Self {
        let mut values = Vec::with_capacity(grid.nx * grid.ny);
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                let (x, y) = (grid.x(i), grid.y(j));
                values.push(psi(x + 0.5 * y) * psi(x - 0.5 * y).conj());
            }
        }
        Self { values, grid, time: 0.0 }
    }

    /// Equal superposition of two Gaussian packets of width `sigma` at
    /// `±separation/2`, normalized to unit trace on the grid.
    pub fn two_gaussians(grid: DensityGrid, separation: f64, sigma: f64) -> Self {
        let g = |x: f64| (-(x * x) / (4.0 * sigma * sigma)).exp();
        let mut rho = Self::pure_state(grid, |x| Complex64::new(g(x - 0.5 * separation) + g(x + 0.5 * separation), 0.0));
        let tr = rho.trace().re;
        rho.values.iter_mut().for_each(|v| *v /= tr);
        rho
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.grid.ny + j]
    }

    /// `∫ ρ(x, 0) dx`.
    pub fn trace(&self) -> Complex64 {
        let j0 = self.grid.y_zero();
        (0..self.grid.nx).map(|i| self.at(i, j0)).sum::<Complex64>() * self.grid.dx
    }

    /// `max |ρ(x, y) - ρ*(x, -y)| / max |ρ|` over mirrored node pairs.
    pub fn hermiticity_violation(&self) -> f64 {
        let ny = self.grid.ny;
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.norm())).max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for i in 0..self.grid.nx {
            for j in 1..ny {
                worst = worst.max((self.at(i, j) - self.at(i, ny - j).conj()).norm());
            }
        }
        worst / scale
    }

    /// CSV with columns `x,y,re,im`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,y,re,im")?;
        for i in 0..self.grid.nx {
            for j in 0..self.grid.ny {
                let v = self.at(i, j);
                writeln!(out, "{},{},{},{}", fmt17(self.grid.x(i)), fmt17(self.grid.y(j)), fmt17(v.re), fmt17(v.im))?;
            }
        }
        Ok(())
    }
}

/// Multiplies by `e^{-Λ y² dt}`, the exact flow of the decoherence term.
pub fn decoherence_substep(rho: &mut DensityField, lambda: f64, dt: f64) {
    let grid = rho.grid;
    let damp: Vec<f64> = (0..grid.ny).map(|j| (-lambda * grid.y(j).powi(2) * dt).exp()).collect();
    for row in rho.values.chunks_mut(grid.ny) {
        for (v, d) in row.iter_mut().zip(&damp) {
            *v *= d;
        }
    }
}

fn wavenumbers(n: usize, spacing: f64) -> Vec<f64> {
    let len = n as f64 * spacing;
    (0..n)
        .map(|k| {
            if k == n / 2 {
                // Nyquist mode has no sign; zero keeps y -> -y symmetry.
                0.0
            } else if k < n / 2 {
                std::f64::consts::TAU * k as f64 / len
            } else {
                std::f64::consts::TAU * (k as f64 - n as f64) / len
            }
        })
        .collect()
}

/// Split-step propagator for a fixed potential, parameters and `dt`.
pub struct MasterEquation {
    grid: DensityGrid,
    dt: f64,
    ordering: Ordering,
    gamma: f64,
    /// `e^{-(i/ħ) ΔV dt/2} e^{-Λ y² dt/2}` per node.
    half_local: Vec<Complex64>,
    /// `e^{-iħ k_x k_y dt / M}` per Fourier node.
    kinetic: Vec<Complex64>,
    fft_x: (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>),
    fft_y: (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>),
    scratch: Vec<Complex64>,
    column: Vec<Complex64>,
}

impl MasterEquation {
    pub fn new(grid: DensityGrid, potential: &Potential, params: &BathParams, ordering: Ordering, dt: f64) -> Result<Self> {
        require_positive("dt", dt)?;
        let dp = decoherence_params(params)?;
        let y_max = grid.y(0).abs();
        let max_dt = grid.dy / (params.gamma * y_max);
        if dt > max_dt {
            return Err(Error::Unstable { dt, max_dt, suggested: 0.9 * max_dt });
        }
        let hbar = params.hbar;
        let mut half_local = Vec::with_capacity(grid.nx * grid.ny);
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                let (x, y) = (grid.x(i), grid.y(j));
                let dv = potential.value(x + 0.5 * y) - potential.value(x - 0.5 * y);
                // The edge row y = -Y is its own mirror on the periodic grid
                // and must stay real; it carries no phase.
                let phase = if j == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, -dv * 0.5 * dt / hbar).exp() };
                half_local.push(phase * (-dp.lambda * y * y * 0.5 * dt).exp());
            }
        }
        let kx = wavenumbers(grid.nx, grid.dx);
        let ky = wavenumbers(grid.ny, grid.dy);
        let mut kinetic = Vec::with_capacity(grid.nx * grid.ny);
        for a in &kx {
            for b in &ky {
                kinetic.push(Complex64::new(0.0, -hbar * a * b * dt / params.mass).exp());
            }
        }
        let mut planner = FftPlannerScalar::new();
        Ok(Self {
            grid,
            dt,
            ordering,
            gamma: params.gamma,
            half_local,
            kinetic,
            fft_x: (planner.plan_fft_forward(grid.nx), planner.plan_fft_inverse(grid.nx)),
            fft_y: (planner.plan_fft_forward(grid.ny), planner.plan_fft_inverse(grid.ny)),
            scratch: vec![Complex64::new(0.0, 0.0); grid.ny],
            column: vec![Complex64::new(0.0, 0.0); grid.nx],
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn transform(&mut self, values: &mut [Complex64], forward: bool) {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let fy = if forward { &self.fft_y.0 } else { &self.fft_y.1 };
        for row in values.chunks_mut(ny) {
            fy.process(row);
        }
        let fx = if forward { &self.fft_x.0 } else { &self.fft_x.1 };
        for j in 0..ny {
            for i in 0..nx {
                self.column[i] = values[i * ny + j];
            }
            fx.process(&mut self.column);
            for i in 0..nx {
                values[i * ny + j] = self.column[i];
            }
        }
        if !forward {
            let norm = 1.0 / (nx * ny) as f64;
            values.iter_mut().for_each(|v| *v *= norm);
        }
    }

    /// Upwind advection `∂_t ρ = -γ y ∂_y ρ` over `dt`.
    fn friction(&mut self, values: &mut [Complex64], dt: f64) {
        let grid = self.grid;
        let c = self.gamma * dt / grid.dy;
        for row in values.chunks_mut(grid.ny) {
            self.scratch.copy_from_slice(row);
            let old = &self.scratch;
            for j in 0..grid.ny {
                let y = grid.y(j);
                let grad = if j == 0 {
                    Complex64::new(0.0, 0.0)
                } else if y > 0.0 {
                    old[j] - old[j - 1]
                } else if y < 0.0 {
                    old[j + 1] - old[j]
                } else {
                    Complex64::new(0.0, 0.0)
                };
                row[j] = old[j] - c * y * grad;
            }
        }
        if self.ordering == Ordering::Symmetric {
            let decay = (-0.5 * self.gamma * dt).exp();
            values.iter_mut().for_each(|v| *v *= decay);
        }
    }

    fn local_half(&self, values: &mut [Complex64]) {
        for (v, f) in values.iter_mut().zip(&self.half_local) {
            *v *= f;
        }
    }

    pub fn step(&mut self, rho: &mut DensityField) -> Result<()> {
        if rho.grid != self.grid {
            return Err(Error::DomainMismatch("density grid differs from propagator grid".into()));
        }
        let mut values = std::mem::take(&mut rho.values);
        let half = 0.5 * self.dt;
        self.local_half(&mut values);
        self.friction(&mut values, half);
        self.transform(&mut values, true);
        for (v, k) in values.iter_mut().zip(&self.kinetic) {
            *v *= k;
        }
        self.transform(&mut values, false);
        self.friction(&mut values, half);
        self.local_half(&mut values);
        rho.values = values;
        rho.time += self.dt;
        let violation = rho.hermiticity_violation();
        if violation > 1e-8 {
            return Err(Error::HermiticityViolation { violation });
        }
        Ok(())
    }
}

/// One split step of the high-temperature master equation.
pub fn master_step(rho: &DensityField, potential: &Potential, params: &BathParams, ordering: Ordering, dt: f64) -> Result<DensityField> {
    let mut prop = MasterEquation::new(rho.grid, potential, params, ordering, dt)?;
    let mut next = rho.clone();
    prop.step(&mut next)?;
    Ok(next)
}

/// Wigner function on `x` nodes of the density grid and the given momenta.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerField {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    /// `values[i * p.len() + k]`
    pub values: Vec<f64>,
    /// Largest discarded imaginary part.
    pub max_imag: f64,
}

impl WignerField {
    /// `∫ W dx dp` by the rectangle rule on uniform grids.
    pub fn integral(&self) -> f64 {
        let dx = self.x.get(1).map_or(1.0, |b| b - self.x[0]);
        let dp = self.p.get(1).map_or(1.0, |b| b - self.p[0]);
        self.values.iter().sum::<f64>() * dx * dp
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// CSV with columns `x,p,re,im`; `im` is zero by construction.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,p,re,im")?;
        for (i, x) in self.x.iter().enumerate() {
            for (k, p) in self.p.iter().enumerate() {
                writeln!(out, "{},{},{},{}", fmt17(*x), fmt17(*p), fmt17(self.values[i * self.p.len() + k]), fmt17(0.0))?;
            }
        }
        Ok(())
    }
}

/// `W(x, p) = (1/2πħ) ∫ e^{ipy/ħ} ρ(x, y) dy` by the trapezoid rule in `y`.
/// With this sign a factor `e^{ip₀y/ħ}` on ρ moves W to `p - p₀`.
pub fn wigner_transform(rho: &DensityField, p_grid: &[f64], hbar: f64) -> Result<WignerField> {
    require_positive("hbar", hbar)?;
    let grid = rho.grid;
    let norm = 1.0 / (std::f64::consts::TAU * hbar);
    let mut values = Vec::with_capacity(grid.nx * p_grid.len());
    let mut max_imag = 0.0f64;
    for i in 0..grid.nx {
        for &p in p_grid {
            let w = y_quadrature(rho, i, |y| Complex64::new(0.0, p * y / hbar).exp()) * norm;
            max_imag = max_imag.max(w.im.abs());
            values.push(w.re);
        }
    }
    Ok(WignerField { x: (0..grid.nx).map(|i| grid.x(i)).collect(), p: p_grid.to_vec(), values, max_imag })
}

/// Trapezoid rule over the symmetric interval `[-Y, Y]`. The periodic grid
/// stores only `y = -Y`; its partner at `+Y` is filled in by Hermiticity,
/// which keeps the sum real for Hermitian input.
fn y_quadrature(rho: &DensityField, i: usize, weight: impl Fn(f64) -> Complex64) -> Complex64 {
    let grid = rho.grid;
    let edge = rho.at(i, 0);
    let y_edge = grid.y(0);
    let mut s = 0.5 * (weight(y_edge) * edge + weight(-y_edge) * edge.conj());
    for j in 1..grid.ny {
        s += weight(grid.y(j)) * rho.at(i, j);
    }
    s * grid.dy
}

/// `W(x_i, 0)` at the grid node `i`: the interference peak of a symmetric
/// superposition sits at `i = nx/2`.
pub fn wigner_at_zero_momentum(rho: &DensityField, i: usize, hbar: f64) -> f64 {
    y_quadrature(rho, i, |_| Complex64::new(1.0, 0.0)).re / (std::f64::consts::TAU * hbar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn parameter_values() {
        let p = BathParams::new(1.0, 2.0, 0.5, 1.0).unwrap();
        let d = decoherence_params(&p).unwrap();
        assert_eq!(d.w, 2.0);
        assert_eq!(d.diffusion, 0.25);
        assert_eq!(d.lambda, 1.0);
        assert_relative_eq!(d.thermal_length, (4.0 * std::f64::consts::PI).sqrt(), epsilon = 1e-15);
        let doubled = decoherence_params(&BathParams { hbar: 2.0, ..p }).unwrap();
        assert_eq!(doubled.lambda, 0.25);
        assert_eq!(decoherence_params(&BathParams { hbar: 0.0, ..p }), Err(Error::ClassicalLimit));
    }

    #[test]
    fn grid_requires_even_counts() {
        assert!(DensityGrid::new(17, 0.1, 32, 0.1).is_err());
        let g = DensityGrid::new(32, 0.1, 32, 0.2).unwrap();
        assert_eq!(g.y(g.y_zero()), 0.0);
        assert_eq!(g.x(g.x_zero()), 0.0);
    }

    #[test]
    fn pure_state_is_hermitian() {
        let g = DensityGrid::new(32, 0.25, 32, 0.25).unwrap();
        let rho = DensityField::pure_state(g, |x| Complex64::new(0.0, 1.3 * x).exp() * (-(x - 0.4).powi(2)).exp());
        assert!(rho.hermiticity_violation() < 1e-15);
    }

    #[test]
    fn friction_cfl_guard() {
        let g = DensityGrid::new(32, 0.25, 32, 0.25).unwrap();
        let p = BathParams::new(1.0, 10.0, 1.0, 1.0).unwrap();
        assert!(matches!(MasterEquation::new(g, &Potential::free(), &p, Ordering::MomentaLeft, 0.1), Err(Error::Unstable { .. })));
    }
}
