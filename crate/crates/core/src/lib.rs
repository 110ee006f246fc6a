//! Numerics for a particle coupled linearly to a harmonic-oscillator heat
//! bath: bath kernels, noise generation, Langevin ensembles, Fokker-Planck
//! solvers with explicit operator ordering, sliced fluctuation determinants
//! and the high-temperature decoherence master equation.

pub mod bath_kernels;
pub mod decoherence;
pub mod determinants;
pub mod error;
pub mod fokker_planck;
pub mod io;
pub mod langevin_sim;
pub mod noise_gen;
pub mod potential;
pub mod quad;

pub use bath_kernels::{BathParams, Oscillator, SpectralDensity, TimeGrid};
pub use decoherence::{DensityField, DensityGrid};
pub use determinants::SlicingScheme;
pub use error::{Error, Result};
pub use fokker_planck::{Axis, Ordering, PhaseGrid, ProbField};
pub use langevin_sim::{InitialCondition, Mode, SimConfig, StepPoint};
pub use noise_gen::{NoiseKernel, NoiseSpec};
pub use potential::Potential;
