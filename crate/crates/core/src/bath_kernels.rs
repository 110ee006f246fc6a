//! Bath-derived kernels: spectral densities, friction and noise kernels,
//! oscillator correlators, frequency renormalization, thermal Green function.
//!
//! Units are natural: `hbar` is an ordinary parameter (zero selects the
//! classical limit), `k_B` is folded into `kbt`, and all rates are in
//! inverse time. Fourier conventions are `K(t) = ∫dω/2π K(ω) e^{-iωt}` and
//! `γ(ω) = ∫dt γ(t) e^{iωt}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Error, Result};

/// One bath oscillator of the Caldeira-Leggett type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Oscillator {
    pub coupling: f64,
    pub mass: f64,
    pub freq: f64,
}

/// Bath model from which every kernel in this module derives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SpectralDensity {
    Ohmic { gamma: f64 },
    Drude { gamma: f64, omega_d: f64 },
    Discrete(Vec<Oscillator>),
}

impl SpectralDensity {
    pub fn ohmic(gamma: f64) -> Result<Self> {
        require_positive("gamma", gamma)?;
        Ok(Self::Ohmic { gamma })
    }

    pub fn drude(gamma: f64, omega_d: f64) -> Result<Self> {
        require_positive("gamma", gamma)?;
        require_positive("omega_d", omega_d)?;
        Ok(Self::Drude { gamma, omega_d })
    }

    pub fn discrete(oscillators: Vec<Oscillator>) -> Result<Self> {
        for (index, o) in oscillators.iter().enumerate() {
            require_positive("mass", o.mass)?;
            if !(o.freq > 0.0) {
                return Err(Error::MasslessBathMode { index });
            }
        }
        Ok(Self::Discrete(oscillators))
    }

    /// Friction rate carried by the continuous models.
    pub fn gamma(&self) -> Option<f64> {
        match *self {
            Self::Ohmic { gamma } | Self::Drude { gamma, .. } => Some(gamma),
            Self::Discrete(_) => None,
        }
    }
}

/// Physical constants of the system-plus-bath problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathParams {
    pub mass: f64,
    pub gamma: f64,
    pub kbt: f64,
    pub hbar: f64,
    pub omega_d: Option<f64>,
}

impl BathParams {
    pub fn new(mass: f64, gamma: f64, kbt: f64, hbar: f64) -> Result<Self> {
        require_positive("mass", mass)?;
        require_positive("gamma", gamma)?;
        require_positive("kbt", kbt)?;
        if !(hbar.is_finite() && hbar >= 0.0) {
            return Err(invalid("hbar", format!("must be finite and >= 0, got {hbar}")));
        }
        Ok(Self { mass, gamma, kbt, hbar, omega_d: None })
    }

    pub fn with_drude_cutoff(mut self, omega_d: f64) -> Result<Self> {
        require_positive("omega_d", omega_d)?;
        self.omega_d = Some(omega_d);
        Ok(self)
    }

    /// Noise strength `w = 2 M γ k_BT`.
    pub fn noise_strength(&self) -> f64 {
        2.0 * self.mass * self.gamma * self.kbt
    }

    /// Diffusion constant `D = k_BT / (M γ)`.
    pub fn diffusion(&self) -> f64 {
        self.kbt / (self.mass * self.gamma)
    }

    /// `w` rebuilt from the diffusion constant, `2 γ² M² D`.
    pub fn noise_strength_from_diffusion(&self) -> f64 {
        2.0 * self.gamma * self.gamma * self.mass * self.mass * self.diffusion()
    }

    /// Ohmic or Drude density matching these parameters.
    pub fn spectral_density(&self) -> SpectralDensity {
        match self.omega_d {
            Some(omega_d) => SpectralDensity::Drude { gamma: self.gamma, omega_d },
            None => SpectralDensity::Ohmic { gamma: self.gamma },
        }
    }
}

/// `x coth x`, with the series `1 + x²/3 - x⁴/45` near zero so that the
/// value at the origin is exactly one.
pub fn x_coth_x(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 1e-3 {
        let x2 = x * x;
        1.0 + x2 / 3.0 - x2 * x2 / 45.0
    } else if ax > 20.0 {
        // coth x = 1 to double precision here
        ax
    } else {
        x / x.tanh()
    }
}

/// Bath spectral density `σ(ω)`, odd in `ω`.
pub fn spectral_density(model: &SpectralDensity, mass: f64, omega: f64) -> Result<f64> {
    match *model {
        SpectralDensity::Ohmic { gamma } => Ok(2.0 * mass * gamma * omega),
        SpectralDensity::Drude { gamma, omega_d } => {
            Ok(2.0 * mass * gamma * omega * omega_d * omega_d / (omega_d * omega_d + omega * omega))
        }
        SpectralDensity::Discrete(_) => Err(Error::DistributionalDensity),
    }
}

/// Retarded friction kernel `γ(t)`; zero for `t < 0`.
///
/// The discrete bath is integrated exactly over its delta functions, giving
/// `Θ(t) (1/M) Σ c²/(M_i Ω_i²) cos Ω_i t`. The pure Ohmic kernel is the
/// one-sided delta `2γ δ^R(t)` and has no pointwise value.
pub fn friction_kernel_time(model: &SpectralDensity, mass: f64, t: f64) -> Result<f64> {
    if t < 0.0 {
        return Ok(0.0);
    }
    match model {
        SpectralDensity::Ohmic { .. } => Err(Error::DistributionalDensity),
        SpectralDensity::Drude { gamma, omega_d } => Ok(gamma * omega_d * (-omega_d * t).exp()),
        SpectralDensity::Discrete(oscs) => {
            Ok(oscs.iter().map(|o| o.coupling * o.coupling / (o.mass * o.freq * o.freq) * (o.freq * t).cos()).sum::<f64>() / mass)
        }
    }
}

/// Fourier transform `γ(ω) = γ iω_D / (ω + iω_D)` of the retarded Drude kernel.
///
/// The Ohmic model returns the static value `γ` at every frequency.
pub fn friction_kernel_freq(model: &SpectralDensity, omega: f64) -> Result<Complex64> {
    match *model {
        SpectralDensity::Ohmic { gamma } => Ok(Complex64::new(gamma, 0.0)),
        SpectralDensity::Drude { gamma, omega_d } => {
            let i_wd = Complex64::new(0.0, omega_d);
            Ok(gamma * i_wd / (omega + i_wd))
        }
        SpectralDensity::Discrete(_) => Err(Error::DistributionalDensity),
    }
}

/// Normalized noise kernel `K(ω) = σ(ω)/(2Mγω) · x coth x`, `x = ħω/2k_BT`.
///
/// `K(0) = 1` exactly for every continuous model.
pub fn noise_kernel_freq(params: &BathParams, model: &SpectralDensity, omega: f64) -> Result<f64> {
    let x = params.hbar * omega / (2.0 * params.kbt);
    let quantum = x_coth_x(x);
    match *model {
        SpectralDensity::Ohmic { .. } => Ok(quantum),
        SpectralDensity::Drude { omega_d, .. } => Ok(quantum * omega_d * omega_d / (omega * omega + omega_d * omega_d)),
        SpectralDensity::Discrete(_) => Err(Error::DistributionalDensity),
    }
}

/// Uniform time grid symmetric about zero: `t_j = (j - n) dt`, `j = 0..=2n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub half_len: usize,
}

impl TimeGrid {
    pub fn symmetric(half_span: f64, dt: f64) -> Result<Self> {
        require_positive("dt", dt)?;
        require_positive("half_span", half_span)?;
        Ok(Self { dt, half_len: (half_span / dt).round() as usize })
    }

    pub fn times(&self) -> Vec<f64> {
        let n = self.half_len as f64;
        (0..=2 * self.half_len).map(|j| (j as f64 - n) * self.dt).collect()
    }

    pub fn half_span(&self) -> f64 {
        self.half_len as f64 * self.dt
    }
}

/// Sampled kernel on a uniform time grid.
#[derive(Debug, Clone)]
pub struct KernelSamples {
    pub t: Vec<f64>,
    pub values: Vec<f64>,
    pub dt: f64,
    /// Trapezoidal area over the grid.
    pub area: f64,
    /// Upper frequency of the Fourier inversion.
    pub omega_max: f64,
    /// Bound on `|K_band(t) - K(t)|` from the rolled-off part of the
    /// spectrum; infinite for quantum kernels.
    pub truncation_error: f64,
    /// Set when the grid misses more than 1e-4 of the unit area.
    pub short_grid: bool,
}

/// Inverse Fourier transform of `K(ω)` onto `grid` by composite
/// Gauss-Legendre quadrature on `[0, ω_max]`, `ω_max = max(50 ω_D, 50 k_BT/ħ)`.
///
/// The spectrum is rolled off by a `cos²` taper over `[0.8 ω_max, ω_max]`.
/// The taper equals one at `ω = 0`, so the band-limited kernel keeps the
/// exact unit area, and its smoothness removes the slowly decaying ringing a
/// hard cutoff would leave in the time domain. Panels start at width
/// `π / T` (T the half span) and are halved until the samples stop changing.
pub fn noise_kernel_time(params: &BathParams, model: &SpectralDensity, grid: &TimeGrid) -> Result<KernelSamples> {
    let omega_d = match *model {
        SpectralDensity::Drude { omega_d, .. } => omega_d,
        SpectralDensity::Ohmic { .. } => return Err(Error::NonIntegrableSpectrum("Ohmic noise kernel has no finite Fourier transform")),
        SpectralDensity::Discrete(_) => return Err(Error::DistributionalDensity),
    };
    let mut omega_max = 50.0 * omega_d;
    if params.hbar > 0.0 {
        omega_max = omega_max.max(50.0 * params.kbt / params.hbar);
    }
    let t = grid.times();
    let n = grid.half_len;
    let half_span = grid.half_span().max(grid.dt);
    let (gx, gw) = crate::quad::gauss_legendre(16);

    let omega_taper = 0.8 * omega_max;
    let taper = |omega: f64| {
        if omega <= omega_taper {
            1.0
        } else {
            (0.5 * std::f64::consts::PI * (omega - omega_taper) / (omega_max - omega_taper)).cos().powi(2)
        }
    };

    // The band-limited kernel is even in t, so only t >= 0 is evaluated.
    let invert = |panels: usize| -> Result<Vec<f64>> {
        let width = omega_max / panels as f64;
        let mut half = vec![0.0; n + 1];
        for p in 0..panels {
            let center = (p as f64 + 0.5) * width;
            for (x, w) in gx.iter().zip(&gw) {
                let omega = center + 0.5 * width * x;
                let s = w * 0.5 * width * taper(omega) * noise_kernel_freq(params, model, omega)? / std::f64::consts::PI;
                for (j, h) in half.iter_mut().enumerate() {
                    *h += s * (omega * j as f64 * grid.dt).cos();
                }
            }
        }
        Ok((0..=2 * n).map(|j| half[j.abs_diff(n)]).collect())
    };

    // A multiple of five puts the taper onset on a panel boundary.
    let mut panels = 5 * (omega_max * half_span / (5.0 * std::f64::consts::PI)).ceil().max(1.0) as usize;
    let mut values = invert(panels)?;
    for _ in 0..6 {
        panels *= 2;
        let next = invert(panels)?;
        let scale = next.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let change = next.iter().zip(&values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        values = next;
        if change <= 1e-12 * scale {
            break;
        }
    }

    let area = crate::quad::trapezoid(&values, grid.dt);
    // Pointwise bound (1/π)∫ K over the tapered and discarded band. The
    // quantum kernel falls off only like 1/ω there, so the full kernel is
    // log-singular at t = 0 and no finite bound exists.
    let truncation_error = if params.hbar > 0.0 { f64::INFINITY } else { omega_d * (omega_d / omega_taper).atan() / std::f64::consts::PI };
    Ok(KernelSamples { t, values, dt: grid.dt, area, omega_max, truncation_error, short_grid: (area - 1.0).abs() > 1e-4 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathCorrelators {
    /// Anticommutator correlator `A_b(t, t')`.
    pub symmetric: f64,
    /// Retarded commutator part `Θ(t - t') Σ c² ⟨[X(t), X(t')]⟩`.
    pub retarded: Complex64,
}

/// Oscillator correlation functions of a discrete bath.
///
/// `ħ coth(ħΩ/2k_BT)` is evaluated as `(2k_BT/Ω) x coth x`, so `ħ = 0`
/// gives the classical correlator.
pub fn bath_correlators(oscillators: &[Oscillator], hbar: f64, kbt: f64, t: f64, t_prime: f64) -> Result<BathCorrelators> {
    if kbt == 0.0 && hbar == 0.0 {
        return Err(Error::DegenerateClassicalGroundState);
    }
    if kbt < 0.0 || hbar < 0.0 {
        return Err(invalid("kbt", "kbt and hbar must be >= 0"));
    }
    let tau = t - t_prime;
    let mut symmetric = 0.0;
    let mut commutator = 0.0;
    for (index, o) in oscillators.iter().enumerate() {
        if !(o.freq > 0.0) {
            return Err(Error::MasslessBathMode { index });
        }
        let weight = o.coupling * o.coupling / (o.mass * o.freq);
        let thermal = if kbt == 0.0 { hbar } else { 2.0 * kbt / o.freq * x_coth_x(hbar * o.freq / (2.0 * kbt)) };
        symmetric += weight * thermal * (o.freq * tau).cos();
        commutator += weight * hbar * (o.freq * tau).sin();
    }
    let retarded = if tau < 0.0 { Complex64::new(0.0, 0.0) } else { Complex64::new(0.0, -commutator) };
    Ok(BathCorrelators { symmetric, retarded })
}

/// Squared-frequency shift `Δω² = -(1/M) Σ c²/(M_i Ω_i²)`, never positive.
pub fn freq_shift(oscillators: &[Oscillator], mass: f64) -> Result<f64> {
    require_positive("mass", mass)?;
    let mut sum = 0.0;
    for (index, o) in oscillators.iter().enumerate() {
        if !(o.freq > 0.0) {
            return Err(Error::MasslessBathMode { index });
        }
        sum += o.coupling * o.coupling / (o.mass * o.freq * o.freq);
    }
    Ok(-sum / mass)
}

/// Real-time continuation of the thermal oscillator Green function,
/// `(ħ/2MΩ) cosh[Ω(ħβ - iΔt)/2] / sinh(ħΩβ/2)`.
pub fn thermal_green(omega: f64, beta: f64, dt: f64, mass: f64, hbar: f64) -> Result<Complex64> {
    require_positive("omega", omega)?;
    require_positive("beta", beta)?;
    require_positive("mass", mass)?;
    require_positive("hbar", hbar)?;
    let a = 0.5 * hbar * beta * omega;
    let b = 0.5 * omega * dt;
    let prefactor = hbar / (2.0 * mass * omega);
    let ratio = if a > 20.0 {
        // cosh(a - ib)/sinh(a) = (e^{-ib} + e^{-2a + ib}) / (1 - e^{-2a})
        let damp = (-2.0 * a).exp();
        (Complex64::new(0.0, -b).exp() + damp * Complex64::new(0.0, b).exp()) / (1.0 - damp)
    } else {
        Complex64::new(a, -b).cosh() / a.sinh()
    };
    Ok(prefactor * ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit(x: f64) -> Oscillator {
        Oscillator { coupling: 1.0, mass: 1.0, freq: x }
    }

    #[test]
    fn spectral_density_values() {
        let ohm = SpectralDensity::ohmic(2.0).unwrap();
        assert_eq!(spectral_density(&ohm, 1.0, 3.0).unwrap(), 12.0);
        let drude = SpectralDensity::drude(1.0, 10.0).unwrap();
        assert_eq!(spectral_density(&drude, 1.0, 0.0).unwrap(), 0.0);
        assert_relative_eq!(spectral_density(&drude, 1.0, 10.0).unwrap(), 10.0, epsilon = 1e-14);
        let disc = SpectralDensity::discrete(vec![unit(1.0)]).unwrap();
        assert_eq!(spectral_density(&disc, 1.0, 1.0), Err(Error::DistributionalDensity));
    }

    #[test]
    fn drude_density_limits() {
        let drude = SpectralDensity::drude(1.0, 10.0).unwrap();
        let ratio = |w: f64| spectral_density(&drude, 1.0, w).unwrap() / (2.0 * w);
        assert_relative_eq!(ratio(1e-6), 1.0, epsilon = 1e-12);
        assert!(ratio(1e6) < 1e-9);
    }

    #[test]
    fn friction_time_values() {
        let drude = SpectralDensity::drude(1.0, 10.0).unwrap();
        assert_relative_eq!(friction_kernel_time(&drude, 1.0, 0.1).unwrap(), 10.0 * (-1.0f64).exp(), epsilon = 1e-14);
        assert_eq!(friction_kernel_time(&drude, 1.0, -0.5).unwrap(), 0.0);
        let ohm = SpectralDensity::ohmic(1.0).unwrap();
        assert_eq!(friction_kernel_time(&ohm, 1.0, -0.5).unwrap(), 0.0);
        let disc = SpectralDensity::discrete(vec![unit(2.0)]).unwrap();
        assert_relative_eq!(friction_kernel_time(&disc, 1.0, 0.0).unwrap(), 0.25);
    }

    #[test]
    fn friction_freq_values() {
        let drude = SpectralDensity::drude(1.0, 4.0).unwrap();
        assert_eq!(friction_kernel_freq(&drude, 0.0).unwrap(), Complex64::new(1.0, 0.0));
        let at_cutoff = friction_kernel_freq(&drude, 4.0).unwrap();
        assert_relative_eq!(at_cutoff.re, 0.5, epsilon = 1e-15);
        assert_relative_eq!(at_cutoff.im, 0.5, epsilon = 1e-15);
        assert_relative_eq!(at_cutoff.norm(), 0.5f64.sqrt(), epsilon = 1e-15);
        assert!(friction_kernel_freq(&drude, 1e12).unwrap().norm() < 1e-11);
    }

    #[test]
    fn noise_kernel_freq_values() {
        let p = BathParams::new(1.0, 1.0, 0.5, 1.0).unwrap();
        let ohm = SpectralDensity::ohmic(1.0).unwrap();
        assert_eq!(noise_kernel_freq(&p, &ohm, 0.0).unwrap(), 1.0);
        // ħω/2k_BT = 1 at ω = 1
        assert_relative_eq!(noise_kernel_freq(&p, &ohm, 1.0).unwrap(), 1.313_035_285_499_331_4, epsilon = 1e-14);
        let classical = BathParams::new(1.0, 1.0, 0.5, 0.0).unwrap();
        let drude = SpectralDensity::drude(1.0, 10.0).unwrap();
        assert_eq!(noise_kernel_freq(&classical, &drude, 0.0).unwrap(), 1.0);
        assert_relative_eq!(noise_kernel_freq(&classical, &drude, 10.0).unwrap(), 0.5);
    }

    #[test]
    fn x_coth_x_branch_continuity() {
        for x in [9.999e-4, 1.0001e-3, 19.999, 20.001] {
            let direct = x / f64::tanh(x);
            assert_relative_eq!(x_coth_x(x), direct, max_relative = 1e-13);
        }
        assert_eq!(x_coth_x(0.0), 1.0);
    }

    #[test]
    fn correlator_values() {
        let osc = [unit(1.0)];
        let c = bath_correlators(&osc, 1.0, 0.5, 0.3, 0.3).unwrap();
        assert_relative_eq!(c.symmetric, 1.313_035_285_499_331_4, epsilon = 1e-14);
        let before = bath_correlators(&osc, 1.0, 0.5, 0.1, 0.4).unwrap();
        assert_eq!(before.retarded, Complex64::new(0.0, 0.0));
        let doubled = bath_correlators(&[unit(1.0), unit(1.0)], 1.0, 0.5, 0.2, 0.7).unwrap();
        let single = bath_correlators(&osc, 1.0, 0.5, 0.2, 0.7).unwrap();
        assert_relative_eq!(doubled.symmetric, 2.0 * single.symmetric, epsilon = 1e-15);
        assert_eq!(bath_correlators(&osc, 0.0, 0.0, 0.0, 0.0), Err(Error::DegenerateClassicalGroundState));
        let ground = bath_correlators(&osc, 1.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(ground.symmetric, 1.0);
    }

    #[test]
    fn frequency_shift_values() {
        assert_eq!(freq_shift(&[Oscillator { coupling: 1.0, mass: 1.0, freq: 2.0 }], 1.0).unwrap(), -0.25);
        assert_eq!(freq_shift(&[], 1.0).unwrap(), 0.0);
        assert_eq!(freq_shift(&[unit(2.0), unit(2.0)], 1.0).unwrap(), -0.5);
        assert_eq!(freq_shift(&[unit(0.0)], 1.0), Err(Error::MasslessBathMode { index: 0 }));
    }

    #[test]
    fn thermal_green_values() {
        let g = thermal_green(1.0, 2.0, 0.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(g.re, 0.5 / 1.0f64.tanh(), epsilon = 1e-15);
        assert_eq!(g.im, 0.0);
        let cold = thermal_green(1.0, 1e6, 0.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(cold.re, 0.5, epsilon = 1e-15);
        let plus = thermal_green(1.3, 0.7, 0.9, 2.0, 1.0).unwrap();
        let minus = thermal_green(1.3, 0.7, -0.9, 2.0, 1.0).unwrap();
        assert_relative_eq!(plus.re, minus.re, epsilon = 1e-15);
        // both branches agree near the switch
        let lo = thermal_green(1.0, 39.999, 0.4, 1.0, 1.0).unwrap();
        let hi = thermal_green(1.0, 40.001, 0.4, 1.0, 1.0).unwrap();
        assert!((lo - hi).norm() < 1e-10);
    }

    #[test]
    fn params_derived_quantities() {
        let p = BathParams::new(1.0, 2.0, 0.5, 1.0).unwrap();
        assert_eq!(p.noise_strength(), 2.0);
        assert_eq!(p.diffusion(), 0.25);
        assert_relative_eq!(p.noise_strength_from_diffusion(), p.noise_strength(), epsilon = 1e-15);
        assert!(BathParams::new(0.0, 1.0, 1.0, 0.0).is_err());
        assert!(BathParams::new(1.0, 1.0, 1.0, -1.0).is_err());
    }
}
