use kramers_core::bath_kernels::*;
use kramers_core::quad::{integrate, integrate_to_infinity, QuadOptions};
use kramers_core::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn drude(gamma: f64, omega_d: f64) -> SpectralDensity {
    SpectralDensity::drude(gamma, omega_d).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn spectral_density_is_odd(omega in -1e3f64..1e3, gamma in 0.01f64..10.0, omega_d in 0.1f64..100.0) {
        for model in [SpectralDensity::ohmic(gamma).unwrap(), drude(gamma, omega_d)] {
            let a = spectral_density(&model, 1.3, omega).unwrap();
            let b = spectral_density(&model, 1.3, -omega).unwrap();
            prop_assert_eq!(a, -b);
        }
    }

    #[test]
    fn correlators_symmetric_and_causal(t in -10.0f64..10.0, tp in -10.0f64..10.0, kbt in 0.0f64..3.0) {
        let bath = [
            Oscillator { coupling: 0.7, mass: 1.0, freq: 1.3 },
            Oscillator { coupling: 1.1, mass: 2.0, freq: 0.4 },
        ];
        let a = bath_correlators(&bath, 1.0, kbt, t, tp).unwrap();
        let b = bath_correlators(&bath, 1.0, kbt, tp, t).unwrap();
        prop_assert!((a.symmetric - b.symmetric).abs() <= 1e-12 * a.symmetric.abs().max(1.0));
        if t < tp {
            prop_assert_eq!(a.retarded, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn quantum_ohmic_kernel_tends_to_one(omega in -1e3f64..1e3) {
        let p = BathParams::new(1.0, 1.0, 1.0, 1e-12).unwrap();
        let k = noise_kernel_freq(&p, &SpectralDensity::ohmic(1.0).unwrap(), omega).unwrap();
        prop_assert!((k - 1.0).abs() < 1e-12);
    }
}

#[test]
fn quantum_drude_approaches_classical_at_small_x() {
    let model = drude(1.0, 10.0);
    let classical = BathParams::new(1.0, 1.0, 1.0, 0.0).unwrap().with_drude_cutoff(10.0).unwrap();
    for &omega in &[0.0, 1e-4, 3e-4, 1e-3, 1.5e-3] {
        // ħω/2kT stays below 1e-3
        let quantum = BathParams { hbar: 1.0, ..classical };
        let q = noise_kernel_freq(&quantum, &model, omega).unwrap();
        let c = noise_kernel_freq(&classical, &model, omega).unwrap();
        assert!((q - c).abs() < 1e-3);
    }
}

#[test]
fn friction_kernel_is_fourier_transform_of_time_kernel() {
    let (gamma, omega_d) = (1.5, 4.0);
    let model = drude(gamma, omega_d);
    let opts = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-12, max_intervals: 20000 };
    for k in 0..=40 {
        let omega = -5.0 * omega_d + k as f64 * 0.25 * omega_d;
        // Split the half line so the oscillatory part is well resolved.
        let cut = 40.0 / omega_d;
        let re = integrate(|t| friction_kernel_time(&model, 1.0, t).unwrap() * (omega * t).cos(), 0.0, cut, opts).unwrap().value
            + integrate_to_infinity(|t| friction_kernel_time(&model, 1.0, t).unwrap() * (omega * t).cos(), cut, opts).unwrap().value;
        let im = integrate(|t| friction_kernel_time(&model, 1.0, t).unwrap() * (omega * t).sin(), 0.0, cut, opts).unwrap().value
            + integrate_to_infinity(|t| friction_kernel_time(&model, 1.0, t).unwrap() * (omega * t).sin(), cut, opts).unwrap().value;
        let exact = friction_kernel_freq(&model, omega).unwrap();
        let got = Complex64::new(re, im);
        assert!((got - exact).norm() <= 1e-6 * exact.norm(), "omega={omega}: {got} vs {exact}");
    }
}

#[test]
fn drude_friction_kernel_has_area_gamma() {
    for &omega_d in &[0.5, 3.0, 40.0] {
        let model = drude(2.5, omega_d);
        let area = integrate_to_infinity(|t| friction_kernel_time(&model, 1.0, t).unwrap(), 0.0, QuadOptions::default()).unwrap().value;
        assert!((area - 2.5).abs() < 1e-9);
    }
}

#[test]
fn classical_drude_noise_kernel_in_time() {
    let omega_d = 10.0;
    let p = BathParams::new(1.0, 1.0, 1.0, 0.0).unwrap().with_drude_cutoff(omega_d).unwrap();
    let grid = TimeGrid::symmetric(3.0, 0.002).unwrap();
    let ks = noise_kernel_time(&p, &p.spectral_density(), &grid).unwrap();
    assert!((ks.area - 1.0).abs() < 1e-6, "area {}", ks.area);
    assert!(!ks.short_grid);
    for (t, k) in ks.t.iter().zip(&ks.values) {
        let exact = 0.5 * omega_d * (-omega_d * t.abs()).exp();
        assert!((k - exact).abs() <= ks.truncation_error, "t={t}");
    }
}

#[test]
fn quantum_drude_noise_kernel_has_unit_area() {
    let p = BathParams::new(1.0, 1.0, 0.5, 1.0).unwrap().with_drude_cutoff(5.0).unwrap();
    let grid = TimeGrid::symmetric(8.0, 0.002).unwrap();
    let ks = noise_kernel_time(&p, &p.spectral_density(), &grid).unwrap();
    assert!((ks.area - 1.0).abs() < 1e-6, "area {}", ks.area);
    assert_eq!(noise_kernel_freq(&p, &p.spectral_density(), 0.0).unwrap(), 1.0);
}

#[test]
fn short_grid_is_flagged() {
    let p = BathParams::new(1.0, 1.0, 1.0, 0.0).unwrap().with_drude_cutoff(1.0).unwrap();
    let grid = TimeGrid::symmetric(1.0, 0.01).unwrap();
    assert!(noise_kernel_time(&p, &p.spectral_density(), &grid).unwrap().short_grid);
}

#[test]
fn kernel_narrows_with_cutoff() {
    let half_width = |omega_d: f64| {
        let p = BathParams::new(1.0, 1.0, 1.0, 0.0).unwrap().with_drude_cutoff(omega_d).unwrap();
        let grid = TimeGrid::symmetric(2.0, 0.001).unwrap();
        let ks = noise_kernel_time(&p, &p.spectral_density(), &grid).unwrap();
        let peak = ks.values[grid.half_len];
        let j = (grid.half_len..ks.values.len()).find(|&j| ks.values[j] < 0.5 * peak).unwrap();
        ks.t[j]
    };
    assert!(half_width(40.0) < half_width(10.0));
    assert!(half_width(10.0) < half_width(2.5));
}

#[test]
fn ohmic_and_discrete_inputs_refused() {
    let p = BathParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
    let grid = TimeGrid::symmetric(1.0, 0.01).unwrap();
    assert!(matches!(noise_kernel_time(&p, &SpectralDensity::ohmic(1.0).unwrap(), &grid), Err(Error::NonIntegrableSpectrum(_))));
    let discrete = SpectralDensity::discrete(vec![Oscillator { coupling: 1.0, mass: 1.0, freq: 1.0 }]).unwrap();
    assert_eq!(spectral_density(&discrete, 1.0, 1.0), Err(Error::DistributionalDensity));
}

#[test]
fn discrete_bath_additivity() {
    let one = [Oscillator { coupling: 1.0, mass: 1.0, freq: 2.0 }];
    let two = [one[0], one[0]];
    assert_eq!(freq_shift(&one, 1.0).unwrap(), -0.25);
    assert_eq!(freq_shift(&two, 1.0).unwrap(), -0.5);
    assert_eq!(freq_shift(&[], 1.0).unwrap(), 0.0);
    let a1 = bath_correlators(&one, 1.0, 0.5, 0.3, 0.1).unwrap().symmetric;
    let a2 = bath_correlators(&two, 1.0, 0.5, 0.3, 0.1).unwrap().symmetric;
    assert!((a2 - 2.0 * a1).abs() < 1e-15);
}
