//! Seeded Gaussian noise: white (δ-correlated) and colored with
//! `⟨η(t)η(t')⟩ = w K(t - t')`, plus correlation and spectrum estimators.
//!
//! Randomness comes from ChaCha8 seeded per trajectory; FFTs use the scalar
//! planner so that no CPU-dependent SIMD path changes the rounding.

use std::io::Write;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlannerScalar;

use crate::bath_kernels::{noise_kernel_freq, BathParams, SpectralDensity};
use crate::error::{invalid, require_positive, Error, Result};

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of stream `index` under `master`: `mix(master + mix(index + φ))`
/// with the SplitMix64 increment φ. Independent of the order in which
/// streams are requested.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
    mix64(master.wrapping_add(mix64(index.wrapping_add(GOLDEN))))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq)]
pub enum NoiseKernel {
    White,
    Colored { params: BathParams, model: SpectralDensity },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub kernel: NoiseKernel,
    /// Noise strength `w = 2 M γ k_BT`.
    pub w: f64,
    pub dt: f64,
    pub n: usize,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn white(w: f64, dt: f64, n: usize, seed: u64) -> Self {
        Self { kernel: NoiseKernel::White, w, dt, n, seed }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("dt", self.dt)?;
        if self.n == 0 {
            return Err(invalid("n", "need at least one sample"));
        }
        if !(self.w.is_finite() && self.w >= 0.0) {
            return Err(invalid("w", format!("must be finite and >= 0, got {}", self.w)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTrajectory {
    pub samples: Vec<f64>,
    pub spec: NoiseSpec,
}

impl NoiseTrajectory {
    /// CSV with columns `index,t,eta`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "index,t,eta")?;
        for (i, eta) in self.samples.iter().enumerate() {
            writeln!(out, "{},{},{}", i, crate::io::fmt17(i as f64 * self.spec.dt), crate::io::fmt17(*eta))?;
        }
        Ok(())
    }
}

/// Endless stream of white-noise samples with variance `w/dt`, the
/// pre-point discretization of `w δ(t - t')`.
pub struct WhiteNoiseStream {
    rng: ChaCha8Rng,
    scale: f64,
}

impl WhiteNoiseStream {
    pub fn new(w: f64, dt: f64, seed: u64) -> Self {
        Self { rng: rng_from_seed(seed), scale: (w / dt).sqrt() }
    }
}

impl Iterator for WhiteNoiseStream {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let z: f64 = StandardNormal.sample(&mut self.rng);
        Some(self.scale * z)
    }
}

pub fn white_noise(spec: &NoiseSpec) -> Result<NoiseTrajectory> {
    spec.validate()?;
    if spec.kernel != NoiseKernel::White {
        return Err(invalid("kernel", "white_noise needs the White kernel"));
    }
    let samples = WhiteNoiseStream::new(spec.w, spec.dt, spec.seed).take(spec.n).collect();
    Ok(NoiseTrajectory { samples, spec: spec.clone() })
}

/// Spectral synthesis on a circulant of length `2N`.
///
/// Mode `k` at `ω_k = 2πk/(2N dt)` (wrapped to the symmetric band) gets the
/// complex amplitude `√(w K(ω_k) / (2N dt)) (a_k + i b_k)`; the real part of
/// the transform is a stationary sequence whose covariance is the Riemann
/// sum of `∫dω/2π w K(ω) cos ωτ`. Only the first `N` points are kept, which
/// keeps wrap-around correlation out of lags below `N`.
pub fn colored_noise(spec: &NoiseSpec) -> Result<NoiseTrajectory> {
    spec.validate()?;
    let (params, model) = match &spec.kernel {
        NoiseKernel::White => return Err(invalid("kernel", "colored_noise needs a colored kernel")),
        NoiseKernel::Colored { params, model } => (params, model),
    };
    match model {
        SpectralDensity::Drude { .. } => {}
        SpectralDensity::Ohmic { .. } => return Err(Error::NonIntegrableSpectrum("Ohmic kernel is white or grows with frequency")),
        SpectralDensity::Discrete(_) => return Err(Error::DistributionalDensity),
    }
    let m = 2 * spec.n;
    let period = m as f64 * spec.dt;
    let mut rng = rng_from_seed(spec.seed);
    let mut modes = Vec::with_capacity(m);
    for k in 0..m {
        let signed = if k <= m / 2 { k as f64 } else { k as f64 - m as f64 };
        let omega = std::f64::consts::TAU * signed / period;
        let s = spec.w * noise_kernel_freq(params, model, omega)?;
        if s < 0.0 || !s.is_finite() {
            return Err(Error::NegativeSpectrum { omega, value: s });
        }
        let a: f64 = StandardNormal.sample(&mut rng);
        let b: f64 = StandardNormal.sample(&mut rng);
        modes.push(Complex64::new(a, b) * (s / period).sqrt());
    }
    let fft = FftPlannerScalar::new().plan_fft_forward(m);
    fft.process(&mut modes);
    let samples = modes[..spec.n].iter().map(|z| z.re).collect();
    Ok(NoiseTrajectory { samples, spec: spec.clone() })
}

/// Lagged products `(1/(N-k)) Σ x_n x_{n+k}` for `k = 0..=max_lag`.
pub fn estimate_autocorr(samples: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if max_lag * 10 >= samples.len() {
        return Err(invalid("max_lag", "must be below N/10"));
    }
    Ok((0..=max_lag)
        .map(|k| {
            let n = samples.len() - k;
            samples[..n].iter().zip(&samples[k..]).map(|(a, b)| a * b).sum::<f64>() / n as f64
        })
        .collect())
}

/// Standard error of each lag estimate under the Gaussian (Bartlett)
/// approximation, given the true autocovariance `acov` at lags `0..`.
pub fn autocorr_standard_error(acov: &[f64], n: usize, lag: usize) -> f64 {
    // Var(ĉ_k) ≈ (1/n) Σ_j [c_j² + c_{j+k} c_{j-k}]
    let at = |j: isize| acov.get(j.unsigned_abs()).copied().unwrap_or(0.0);
    let l = acov.len() as isize;
    let k = lag as isize;
    let s: f64 = (-l..=l).map(|j| at(j) * at(j) + at(j + k) * at(j - k)).sum();
    (s / n as f64).sqrt()
}

/// Welch spectrum estimate with Hann windows of `segment` samples and 50%
/// overlap. Returns `(ω, S(ω))` for `ω ∈ [0, π/dt]`, normalized so white
/// noise of variance `w/dt` has `S = w`.
pub fn estimate_spectrum(samples: &[f64], dt: f64, segment: usize) -> Result<Vec<(f64, f64)>> {
    if segment < 8 || segment > samples.len() {
        return Err(invalid("segment", "must lie in [8, N]"));
    }
    let window: Vec<f64> = (0..segment).map(|i| 0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / segment as f64).cos()).collect();
    let norm: f64 = window.iter().map(|w| w * w).sum();
    let fft = FftPlannerScalar::new().plan_fft_forward(segment);
    let bins = segment / 2 + 1;
    let mut acc = vec![0.0; bins];
    let mut count = 0usize;
    let mut buf = vec![Complex64::new(0.0, 0.0); segment];
    let mut start = 0;
    while start + segment <= samples.len() {
        for (b, (x, w)) in buf.iter_mut().zip(samples[start..start + segment].iter().zip(&window)) {
            *b = Complex64::new(x * w, 0.0);
        }
        fft.process(&mut buf);
        for (a, z) in acc.iter_mut().zip(&buf) {
            *a += z.norm_sqr();
        }
        count += 1;
        start += segment / 2;
    }
    let scale = dt / (norm * count as f64);
    Ok(acc.iter().enumerate().map(|(k, a)| (std::f64::consts::TAU * k as f64 / (segment as f64 * dt), a * scale)).collect())
}

/// Excess kurtosis of a sample.
pub fn excess_kurtosis(samples: &[f64]) -> f64 {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let (m2, m4) = samples.iter().fold((0.0, 0.0), |(m2, m4), x| {
        let d2 = (x - mean) * (x - mean);
        (m2 + d2, m4 + d2 * d2)
    });
    let (m2, m4) = (m2 / n, m4 / n);
    m4 / (m2 * m2) - 3.0
}
