use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Result};

/// External potential `V(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Potential {
    /// `½ M ω₀² x²`
    Harmonic { mass: f64, omega0: f64 },
    /// `a x² + b x⁴`; `a < 0` gives two wells.
    DoubleWell { a: f64, b: f64 },
    /// `Σ c_k x^k`, ascending coefficients.
    Polynomial { coeffs: Vec<f64> },
}

impl Potential {
    pub fn harmonic(mass: f64, omega0: f64) -> Result<Self> {
        require_positive("mass", mass)?;
        require_positive("omega0", omega0)?;
        Ok(Self::Harmonic { mass, omega0 })
    }

    pub fn double_well(a: f64, b: f64) -> Result<Self> {
        require_positive("b", b)?;
        if !a.is_finite() {
            return Err(invalid("a", "must be finite"));
        }
        Ok(Self::DoubleWell { a, b })
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(invalid("coeffs", "must be finite"));
        }
        Ok(Self::Polynomial { coeffs })
    }

    /// The zero potential.
    pub fn free() -> Self {
        Self::Polynomial { coeffs: Vec::new() }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            Self::Harmonic { mass, omega0 } => 0.5 * mass * omega0 * omega0 * x * x,
            Self::DoubleWell { a, b } => {
                let x2 = x * x;
                a * x2 + b * x2 * x2
            }
            Self::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c),
        }
    }

    pub fn grad(&self, x: f64) -> f64 {
        match self {
            Self::Harmonic { mass, omega0 } => mass * omega0 * omega0 * x,
            Self::DoubleWell { a, b } => 2.0 * a * x + 4.0 * b * x * x * x,
            Self::Polynomial { coeffs } => coeffs.iter().enumerate().skip(1).rev().fold(0.0, |acc, (k, c)| acc * x + k as f64 * c),
        }
    }

    pub fn hess(&self, x: f64) -> f64 {
        match self {
            Self::Harmonic { mass, omega0 } => mass * omega0 * omega0,
            Self::DoubleWell { a, b } => 2.0 * a + 12.0 * b * x * x,
            Self::Polynomial { coeffs } => {
                coeffs.iter().enumerate().skip(2).rev().fold(0.0, |acc, (k, c)| acc * x + (k * (k - 1)) as f64 * c)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn potentials() -> Vec<Potential> {
        vec![
            Potential::harmonic(1.5, 0.7).unwrap(),
            Potential::double_well(-1.0, 0.25).unwrap(),
            Potential::polynomial(vec![0.3, -1.0, 0.5, 0.2, 0.05]).unwrap(),
        ]
    }

    proptest! {
        #[test]
        fn derivatives_match_finite_differences(x in -3.0f64..3.0) {
            for p in potentials() {
                let h = 1e-5;
                let fd_grad = (p.value(x + h) - p.value(x - h)) / (2.0 * h);
                let fd_hess = (p.grad(x + h) - p.grad(x - h)) / (2.0 * h);
                let tol = |v: f64| 1e-6 * v.abs().max(1.0);
                prop_assert!((fd_grad - p.grad(x)).abs() < tol(p.grad(x)));
                prop_assert!((fd_hess - p.hess(x)).abs() < tol(p.hess(x)));
            }
        }
    }

    #[test]
    fn double_well_minima() {
        let p = Potential::double_well(-1.0, 0.25).unwrap();
        assert!(p.grad(2f64.sqrt()).abs() < 1e-12);
        assert_eq!(p.hess(0.0), -2.0);
    }

    #[test]
    fn free_is_flat() {
        let p = Potential::free();
        assert_eq!((p.value(3.0), p.grad(3.0), p.hess(3.0)), (0.0, 0.0, 0.0));
    }
}
