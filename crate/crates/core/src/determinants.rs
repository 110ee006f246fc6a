//! Time-sliced functional determinants of first- and second-order
//! differential operators.
//!
//! Every determinant is returned as a ratio against the coefficient-free
//! operator `∂_t` sliced on the same grid. With Dirichlet data at the first
//! node the sliced operator is an `N × N` lower-bidiagonal matrix; after
//! multiplying by `dt` the free operator has unit diagonal and `-1` below it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Error, Result};
use crate::quad::{integrate_real_line, QuadOptions};

/// Where the coefficient of a first-order operator is evaluated inside each slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SlicingScheme {
    /// Coefficient multiplies the earlier grid point.
    Retarded,
    /// Coefficient multiplies the later grid point.
    Advanced,
    /// Coefficient multiplies the average of both points.
    Midpoint,
}

impl SlicingScheme {
    pub const ALL: [SlicingScheme; 3] = [Self::Retarded, Self::Advanced, Self::Midpoint];

    pub fn name(self) -> &'static str {
        match self {
            Self::Retarded => "retarded",
            Self::Advanced => "advanced",
            Self::Midpoint => "midpoint",
        }
    }
}

/// `∂_t + c(t)` with `c` sampled at the `N + 1` nodes of a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstOrderOp {
    coeff: Vec<f64>,
    dt: f64,
}

impl FirstOrderOp {
    pub fn new(coeff: Vec<f64>, dt: f64) -> Result<Self> {
        require_positive("dt", dt)?;
        if coeff.len() < 3 {
            return Err(invalid("coeff", "need at least two intervals"));
        }
        if coeff.iter().any(|c| !c.is_finite()) {
            return Err(invalid("coeff", "coefficients must be finite"));
        }
        Ok(Self { coeff, dt })
    }

    /// Samples `c` on `n` intervals covering `[0, total_time]`.
    pub fn from_fn(n: usize, total_time: f64, c: impl Fn(f64) -> f64) -> Result<Self> {
        let dt = total_time / n as f64;
        Self::new((0..=n).map(|k| c(k as f64 * dt)).collect(), dt)
    }

    pub fn intervals(&self) -> usize {
        self.coeff.len() - 1
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn coeff(&self) -> &[f64] {
        &self.coeff
    }

    /// Diagonal and sub-diagonal of the `dt`-normalized slicing matrix.
    /// Row `n` couples `x_n` (diagonal) to `x_{n-1}` (sub-diagonal).
    pub fn slicing_matrix(&self, scheme: SlicingScheme) -> Bidiagonal {
        let dt = self.dt;
        let n = self.intervals();
        let mut diag = Vec::with_capacity(n);
        let mut sub = Vec::with_capacity(n);
        for k in 1..=n {
            let (early, late) = (self.coeff[k - 1], self.coeff[k]);
            let (d, s) = match scheme {
                SlicingScheme::Retarded => (1.0, -1.0 + dt * early),
                SlicingScheme::Advanced => (1.0 + dt * late, -1.0),
                SlicingScheme::Midpoint => {
                    let half = 0.25 * dt * (early + late);
                    (1.0 + half, -1.0 + half)
                }
            };
            diag.push(d);
            sub.push(s);
        }
        Bidiagonal { diag, sub }
    }
}

/// Lower-bidiagonal matrix; `sub[0]` couples to the fixed boundary value
/// and is not part of the square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Bidiagonal {
    pub diag: Vec<f64>,
    pub sub: Vec<f64>,
}

impl Bidiagonal {
    /// Determinant by forward elimination, failing on a non-positive pivot.
    pub fn determinant(&self) -> Result<f64> {
        let mut det = 1.0;
        // Eliminating sub[k] with row k-1 leaves diag[k] untouched, since
        // row k-1 has no entry in column k.
        for (index, &pivot) in self.diag.iter().enumerate() {
            if !(pivot > 0.0) {
                return Err(Error::SlicingTooCoarse { index, factor: pivot });
            }
            det *= pivot;
        }
        Ok(det)
    }
}

/// Determinant ratio `Det(∂_t + c) / Det(∂_t)` under `scheme`.
pub fn sliced_first_order_det(op: &FirstOrderOp, scheme: SlicingScheme) -> Result<f64> {
    op.slicing_matrix(scheme).determinant()
}

/// Starting value of `Ω₂` for the Riccati factorization.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum RiccatiStart {
    /// Smaller real root of `z² - γ(t_a) z + Ω²(t_a) = 0`.
    #[default]
    SmallerRoot,
    Value(f64),
}

/// `∂_t² + γ(t) ∂_t + Ω²(t)` sampled on the nodes of a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderOp {
    gamma: Vec<f64>,
    omega_sq: Vec<f64>,
    dt: f64,
}

impl SecondOrderOp {
    pub fn new(gamma: Vec<f64>, omega_sq: Vec<f64>, dt: f64) -> Result<Self> {
        require_positive("dt", dt)?;
        if gamma.len() != omega_sq.len() {
            return Err(invalid("omega_sq", "gamma and omega_sq must share the grid"));
        }
        if gamma.len() < 3 {
            return Err(invalid("gamma", "need at least two intervals"));
        }
        if gamma.iter().chain(&omega_sq).any(|v| !v.is_finite()) {
            return Err(invalid("gamma", "coefficients must be finite"));
        }
        Ok(Self { gamma, omega_sq, dt })
    }

    pub fn from_fn(n: usize, total_time: f64, gamma: impl Fn(f64) -> f64, omega_sq: impl Fn(f64) -> f64) -> Result<Self> {
        let dt = total_time / n as f64;
        let t = |k: usize| k as f64 * dt;
        Self::new((0..=n).map(|k| gamma(t(k))).collect(), (0..=n).map(|k| omega_sq(t(k))).collect(), dt)
    }

    /// Splits the operator into `(∂_t + Ω₁)(∂_t + Ω₂)` with
    /// `Ω₁ + Ω₂ = γ` and `∂_t Ω₂ + Ω₁ Ω₂ = Ω²`.
    ///
    /// `Ω₂` obeys `Ω₂' = Ω² - γ Ω₂ + Ω₂²`, integrated with RK4 using linear
    /// interpolation of the coefficients inside each step.
    pub fn factorize(&self, start: RiccatiStart) -> Result<(FirstOrderOp, FirstOrderOp)> {
        let z0 = match start {
            RiccatiStart::Value(z) => z,
            RiccatiStart::SmallerRoot => {
                let (g, w2) = (self.gamma[0], self.omega_sq[0]);
                let disc = g * g - 4.0 * w2;
                if disc < 0.0 {
                    return Err(Error::FactorizationSingular { time: 0.0 });
                }
                0.5 * (g - disc.sqrt())
            }
        };
        let dt = self.dt;
        let rhs = |z: f64, g: f64, w2: f64| w2 - g * z + z * z;
        let scale = self.gamma.iter().chain(&self.omega_sq).fold(1.0f64, |m, v| m.max(v.abs())).max(z0.abs());
        let mut omega2 = Vec::with_capacity(self.gamma.len());
        omega2.push(z0);
        let mut z = z0;
        for k in 0..self.gamma.len() - 1 {
            let (g0, g1) = (self.gamma[k], self.gamma[k + 1]);
            let (w0, w1) = (self.omega_sq[k], self.omega_sq[k + 1]);
            let (gm, wm) = (0.5 * (g0 + g1), 0.5 * (w0 + w1));
            let k1 = rhs(z, g0, w0);
            let k2 = rhs(z + 0.5 * dt * k1, gm, wm);
            let k3 = rhs(z + 0.5 * dt * k2, gm, wm);
            let k4 = rhs(z + dt * k3, g1, w1);
            z += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if !z.is_finite() || z.abs() > 1e6 * scale {
                return Err(Error::FactorizationSingular { time: (k + 1) as f64 * dt });
            }
            omega2.push(z);
        }
        let omega1: Vec<f64> = self.gamma.iter().zip(&omega2).map(|(g, z)| g - z).collect();
        Ok((FirstOrderOp::new(omega1, dt)?, FirstOrderOp::new(omega2, dt)?))
    }
}

/// Determinant ratio of the second-order operator via its first-order
/// factorization; both factors are sliced with `scheme`.
pub fn sliced_second_order_det(op: &SecondOrderOp, scheme: SlicingScheme) -> Result<f64> {
    sliced_second_order_det_with(op, scheme, RiccatiStart::default())
}

pub fn sliced_second_order_det_with(op: &SecondOrderOp, scheme: SlicingScheme, start: RiccatiStart) -> Result<f64> {
    let (first, second) = op.factorize(start)?;
    Ok(sliced_first_order_det(&first, scheme)? * sliced_first_order_det(&second, scheme)?)
}

/// Polynomial in `ω` with complex coefficients in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    fn eval_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for c in coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c * factor).collect() }
    }

    /// All roots, zeros at the origin first. Uses Aberth-Ehrlich iteration
    /// on the polynomial with its trivial zero roots deflated.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let mut coeffs = self.coeffs.clone();
        while coeffs.last().is_some_and(|c| c.norm() == 0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Err(invalid("poly", "zero polynomial"));
        }
        let zeros = coeffs.iter().take_while(|c| c.norm() == 0.0).count();
        let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
        let reduced = &coeffs[zeros..];
        let degree = reduced.len() - 1;
        if degree == 0 {
            return Ok(roots);
        }
        let lead = reduced[degree];
        let monic: Vec<Complex64> = reduced.iter().map(|c| c / lead).collect();
        if degree == 1 {
            roots.push(-monic[0]);
            return Ok(roots);
        }
        // Cauchy bound on the root moduli.
        let radius = 1.0 + monic[..degree].iter().fold(0.0f64, |m, c| m.max(c.norm()));
        let mut z: Vec<Complex64> =
            (0..degree).map(|k| Complex64::from_polar(0.5 * radius, 0.4 + std::f64::consts::TAU * k as f64 / degree as f64)).collect();
        for _ in 0..500 {
            let mut largest_step = 0.0f64;
            for i in 0..degree {
                let (p, dp) = Self::eval_with_derivative(&monic, z[i]);
                if p.norm() == 0.0 {
                    continue;
                }
                let ratio = p / dp;
                let repulsion: Complex64 = (0..degree).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
                let step = ratio / (1.0 - ratio * repulsion);
                z[i] -= step;
                largest_step = largest_step.max(step.norm() / (1.0 + z[i].norm()));
            }
            if largest_step < 1e-16 {
                break;
            }
        }
        roots.extend(z);
        Ok(roots)
    }
}

/// Analytically regularized `∫dω/2π log P(ω)` per unit time.
///
/// Each linear factor `ω - r` contributes `|Im r| / 2`; factors at the
/// origin contribute zero. A real nonzero root has no regularized value.
pub fn regularized_trace_log_rate(poly: &Polynomial) -> Result<f64> {
    let roots = poly.roots()?;
    let scale = 1.0 + roots.iter().fold(0.0f64, |m, r| m.max(r.norm()));
    let tol = 1e-9 * scale;
    let mut rate = 0.0;
    for r in roots {
        if r.norm() <= tol {
            continue;
        }
        if r.im.abs() <= tol {
            return Err(Error::MarginalRoot { re: r.re, im: r.im });
        }
        rate += 0.5 * r.im.abs();
    }
    Ok(rate)
}

/// Rate of a rational symbol `numerator / denominator`.
pub fn regularized_trace_log_rate_ratio(numerator: &Polynomial, denominator: &Polynomial) -> Result<f64> {
    Ok(regularized_trace_log_rate(numerator)? - regularized_trace_log_rate(denominator)?)
}

/// Symbol `ω² - iγω` of the Ohmic damped free particle.
pub fn ohmic_symbol(gamma: f64) -> Polynomial {
    let c = Complex64::new;
    Polynomial::new(vec![c(0.0, 0.0), c(0.0, -gamma), c(1.0, 0.0)])
}

/// Symbol `ω² - γ ω ω_D / (ω + iω_D)` with the retarded Drude friction,
/// returned as `(ω (ω² + iω_D ω - γ ω_D), ω + iω_D)`.
pub fn drude_symbol(gamma: f64, omega_d: f64) -> (Polynomial, Polynomial) {
    let c = Complex64::new;
    (
        Polynomial::new(vec![c(0.0, 0.0), c(-gamma * omega_d, 0.0), c(0.0, omega_d), c(1.0, 0.0)]),
        Polynomial::new(vec![c(0.0, omega_d), c(1.0, 0.0)]),
    )
}

/// Trace-log rate of the retarded Drude symbol; it vanishes for every `ω_D > 0`.
pub fn drude_trace_log_rate(gamma: f64, omega_d: f64) -> Result<f64> {
    let (num, den) = drude_symbol(gamma, omega_d);
    regularized_trace_log_rate_ratio(&num, &den)
}

/// Adaptive-quadrature value of `∫dω/2π ½[log(ω²+γ²) - log(ω²+μ²)]`,
/// whose regularized value is `(γ - μ)/2`.
pub fn quadrature_check_intanal(gamma: f64, mu: f64) -> Result<f64> {
    require_positive("gamma", gamma)?;
    require_positive("mu", mu)?;
    let (g2, m2) = (gamma * gamma, mu * mu);
    let opts = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-12, max_intervals: 2000 };
    let r = integrate_real_line(|w| 0.5 * ((g2 - m2) / (w * w + m2)).ln_1p(), opts)?;
    Ok(r.value / std::f64::consts::TAU)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant_coefficient_schemes() {
        let op = FirstOrderOp::from_fn(10_000, 1.0, |_| 2.0).unwrap();
        assert_eq!(sliced_first_order_det(&op, SlicingScheme::Retarded).unwrap(), 1.0);
        let adv = sliced_first_order_det(&op, SlicingScheme::Advanced).unwrap();
        let mid = sliced_first_order_det(&op, SlicingScheme::Midpoint).unwrap();
        assert_relative_eq!(adv, 2.0f64.exp(), max_relative = 1e-3);
        assert_relative_eq!(mid, 1.0f64.exp(), max_relative = 1e-3);
    }

    #[test]
    fn coarse_advanced_step_rejected() {
        let op = FirstOrderOp::from_fn(4, 1.0, |_| -10.0).unwrap();
        assert!(matches!(sliced_first_order_det(&op, SlicingScheme::Advanced), Err(Error::SlicingTooCoarse { index: 0, .. })));
        assert_eq!(sliced_first_order_det(&op, SlicingScheme::Retarded).unwrap(), 1.0);
    }

    #[test]
    fn too_few_intervals() {
        assert!(FirstOrderOp::new(vec![1.0, 1.0], 0.1).is_err());
    }

    #[test]
    fn second_order_constant_cases() {
        let free = SecondOrderOp::from_fn(20_000, 1.0, |_| 2.0, |_| 0.0).unwrap();
        assert_relative_eq!(sliced_second_order_det(&free, SlicingScheme::Midpoint).unwrap(), 1.0f64.exp(), max_relative = 1e-3);
        let bound = SecondOrderOp::from_fn(20_000, 1.0, |_| 2.0, |_| 0.64).unwrap();
        let (f1, f2) = bound.factorize(RiccatiStart::SmallerRoot).unwrap();
        assert_relative_eq!(f2.coeff()[20_000], 0.4, epsilon = 1e-12);
        assert_relative_eq!(f1.coeff()[0], 1.6, epsilon = 1e-12);
        assert_relative_eq!(sliced_second_order_det(&bound, SlicingScheme::Midpoint).unwrap(), 1.0f64.exp(), max_relative = 1e-3);
        assert_eq!(sliced_second_order_det(&bound, SlicingScheme::Retarded).unwrap(), 1.0);
    }

    #[test]
    fn underdamped_start_has_no_real_factorization() {
        let op = SecondOrderOp::from_fn(100, 1.0, |_| 1.0, |_| 4.0).unwrap();
        assert_eq!(sliced_second_order_det(&op, SlicingScheme::Midpoint), Err(Error::FactorizationSingular { time: 0.0 }));
    }

    #[test]
    fn riccati_blow_up_located() {
        // Ω₂' = Ω₂² from Ω₂(0) = 1 diverges at t = 1.
        let op = SecondOrderOp::from_fn(1000, 2.0, |_| 0.0, |_| 0.0).unwrap();
        match op.factorize(RiccatiStart::Value(1.0)) {
            Err(Error::FactorizationSingular { time }) => assert!((time - 1.0).abs() < 0.01, "{time}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn trace_log_examples() {
        let c = Complex64::new;
        let single = Polynomial::new(vec![c(0.0, 3.0), c(1.0, 0.0)]);
        assert_relative_eq!(regularized_trace_log_rate(&single).unwrap(), 1.5, epsilon = 1e-14);
        assert_relative_eq!(regularized_trace_log_rate(&ohmic_symbol(2.0)).unwrap(), 1.0, epsilon = 1e-14);
        assert!(drude_trace_log_rate(1.0, 100.0).unwrap().abs() < 1e-10);
        let marginal = Polynomial::new(vec![c(-4.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(regularized_trace_log_rate(&marginal), Err(Error::MarginalRoot { .. })));
    }

    #[test]
    fn drude_roots_match_large_cutoff_limit() {
        let (num, _) = drude_symbol(1.0, 100.0);
        let mut im: Vec<f64> = num.roots().unwrap().iter().map(|r| r.im.abs()).collect();
        im.sort_by(f64::total_cmp);
        assert_eq!(im[0], 0.0);
        assert_relative_eq!(im[1], 1.0, max_relative = 0.02);
        assert_relative_eq!(im[2], 99.0, max_relative = 0.001);
    }

    #[test]
    fn intanal_quadrature() {
        assert!((quadrature_check_intanal(3.0, 1.0).unwrap() - 1.0).abs() < 1e-6);
        assert!((quadrature_check_intanal(5.0, 1.0).unwrap() - 2.0).abs() < 1e-6);
        assert_eq!(quadrature_check_intanal(2.0, 2.0).unwrap(), 0.0);
    }
}
