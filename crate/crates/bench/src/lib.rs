//! Fixtures shared by the criterion benchmarks.

use kramers_core::fokker_planck::{KramersSolver, SmoluchowskiSolver};
use kramers_core::{Axis, BathParams, DensityField, DensityGrid, NoiseKernel, NoiseSpec, Ordering, Potential, ProbField};

pub fn unit_bath() -> BathParams {
    BathParams::new(1.0, 1.0, 1.0, 0.0).expect("valid bath")
}

pub fn drude_noise(n: usize) -> NoiseSpec {
    let params = unit_bath().with_drude_cutoff(10.0).expect("valid cutoff");
    NoiseSpec {
        kernel: NoiseKernel::Colored { params, model: params.spectral_density() },
        w: params.noise_strength(),
        dt: 0.005,
        n,
        seed: 1,
    }
}

pub fn smoluchowski(n: usize) -> (SmoluchowskiSolver, ProbField) {
    let axis = Axis::new(-5.0, 5.0, n).expect("valid axis");
    let pot = Potential::double_well(-1.0, 0.25).expect("valid potential");
    (SmoluchowskiSolver::new(axis, &pot, &unit_bath(), Ordering::MomentaLeft), ProbField::gaussian_1d(axis, 1.0, 0.5))
}

pub fn kramers(n: usize) -> (KramersSolver, ProbField) {
    let (x, v) = (Axis::new(-6.0, 6.0, n).expect("valid axis"), Axis::new(-6.0, 6.0, n).expect("valid axis"));
    let pot = Potential::harmonic(1.0, 1.0).expect("valid potential");
    (KramersSolver::new(x, v, &pot, &unit_bath(), Ordering::MomentaLeft), ProbField::gaussian_2d(x, v, (1.0, 0.0), (0.5, 0.5)))
}

pub fn density(nx: usize, ny: usize) -> DensityField {
    DensityField::two_gaussians(DensityGrid::new(nx, 0.25, ny, 0.2).expect("valid grid"), 4.0, 0.6)
}
