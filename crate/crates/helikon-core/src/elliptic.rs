//! The odd theta function `θ₁,₁` and products of its translates.
//!
//! `θ(z, τ) = Σₙ exp(πi(n+½)²τ + 2πi(n+½)(z+½))`. It is odd, has simple
//! zeros exactly at the lattice points and satisfies
//!
//! * `θ(z+1) = −θ(z)`
//! * `θ(z+τ) = e^{−2πi(z+(τ+1)/2)} θ(z)`

use alloc::format;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{domain, Error, Result};
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);
const MIN_TERMS: i64 = 8;
const REL_CUTOFF: f64 = 1e-17;
const MAX_TERMS: i64 = 4096;

/// Lattice `{1, τ}` with `Im τ > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    pub tau: C64,
}

impl Lattice {
    pub fn new(tau: C64) -> Result<Self> {
        if !(tau.im > 0.0) || !tau.re.is_finite() {
            return Err(domain(format!("lattice needs Im tau > 0, got {tau}")));
        }
        Ok(Self { tau })
    }

    /// Rhombic lattice `τ = e^{iθ}`.
    pub fn rhombic(theta_angle: f64) -> Result<Self> {
        if !(theta_angle > 0.0 && theta_angle < PI) {
            return Err(domain(format!("rhombic angle must lie in (0, pi), got {theta_angle}")));
        }
        Self::new(C64::from_polar(1.0, theta_angle))
    }

    pub fn is_rhombic(&self) -> bool {
        (self.tau.norm() - 1.0).abs() < 1e-12
    }
}

/// A zero (`exponent > 0`) or pole (`exponent < 0`) factor `θ(z − shift)^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaFactor {
    pub shift: C64,
    pub exponent: f64,
}

/// Value and derivative of the series, summed together.
#[derive(Debug, Clone, Copy)]
pub struct ThetaEval {
    pub value: C64,
    pub derivative: C64,
}

/// Sums the series and its term-wise derivative.
///
/// Terms are generated by the ratio recurrence outward from the dominant
/// index and the walk stops once a term drops below `1e-17` of the larger of
/// the partial sum and the largest term seen (so exact zeros terminate too).
pub fn theta_eval(z: C64, lattice: &Lattice) -> ThetaEval {
    let tau = lattice.tau;
    let y = tau.im;
    // |term_n| ∝ exp(−π y (n+½)² − 2π (n+½) Im z), peaked at n+½ = −Im z / y.
    let centre = (-z.im / y - 0.5).round() as i64;
    let w = (2.0 * PI * I * (z + 0.5)).exp();
    let q = (PI * I * tau).exp();

    let term = |n: i64| -> C64 {
        let m = n as f64 + 0.5;
        (PI * I * m * m * tau + 2.0 * PI * I * m * (z + 0.5)).exp()
    };

    let t0 = term(centre);
    let mut value = t0;
    let mut derivative = 2.0 * PI * I * (centre as f64 + 0.5) * t0;
    let mut biggest = t0.norm();

    // forward: t_{n+1} = t_n · q^{2n+2} · w
    let mut t = t0;
    let mut qpow = q.powi((2 * centre + 2) as i32);
    let q2 = q * q;
    let mut n = centre;
    loop {
        t = t * qpow * w;
        qpow *= q2;
        n += 1;
        let m = n as f64 + 0.5;
        value += t;
        derivative += 2.0 * PI * I * m * t;
        biggest = biggest.max(t.norm());
        if (n - centre >= MIN_TERMS && t.norm() < REL_CUTOFF * value.norm().max(biggest)) || n - centre > MAX_TERMS {
            break;
        }
    }
    // backward: t_{n−1} = t_n / (q^{2n} · w)
    let mut t = t0;
    let mut qpow = q.powi((2 * centre) as i32);
    let qi2 = (q * q).inv();
    let mut n = centre;
    loop {
        t = t / (qpow * w);
        qpow *= qi2;
        n -= 1;
        let m = n as f64 + 0.5;
        value += t;
        derivative += 2.0 * PI * I * m * t;
        biggest = biggest.max(t.norm());
        if (centre - n >= MIN_TERMS && t.norm() < REL_CUTOFF * value.norm().max(biggest)) || centre - n > MAX_TERMS {
            break;
        }
    }
    ThetaEval { value, derivative }
}

/// `θ(z, τ)`.
pub fn theta(z: C64, lattice: &Lattice) -> C64 {
    theta_eval(z, lattice).value
}

/// Factor relating `θ(z+τ)` to `θ(z)`: `e^{−2πi(z+(τ+1)/2)}`.
pub fn theta_quasi_factor(z: C64, lattice: &Lattice) -> C64 {
    (-2.0 * PI * I * (z + (lattice.tau + 1.0) * 0.5)).exp()
}

/// `θ′(z)/θ(z)`.
pub fn log_theta_derivative(z: C64, lattice: &Lattice) -> Result<C64> {
    let e = theta_eval(z, lattice);
    if e.value.norm() <= 1e-15 * e.derivative.norm().max(1.0) {
        return Err(Error::Pole(format!("log-derivative of theta at a zero ({z})")));
    }
    Ok(e.derivative / e.value)
}

/// `θ′(0)`, the normalising constant of the simple zero.
pub fn theta_prime_zero(lattice: &Lattice) -> C64 {
    theta_eval(C64::new(0.0, 0.0), lattice).derivative
}

/// `∏ θ(z − shift)^exponent` with principal logarithms at `z`.
pub fn theta_product(z: C64, factors: &[ThetaFactor], lattice: &Lattice) -> Result<C64> {
    let sum: f64 = factors.iter().map(|f| f.exponent).sum();
    let scale: f64 = factors.iter().map(|f| f.exponent.abs()).sum::<f64>().max(1.0);
    if sum.abs() > 1e-12 * scale {
        return Err(Error::Contract(format!("theta exponents must sum to zero, got {sum}")));
    }
    let mut log = C64::new(0.0, 0.0);
    for f in factors {
        let t = theta(z - f.shift, lattice);
        if t.norm() == 0.0 {
            return Err(Error::Pole(format!("theta factor vanishes at {z}")));
        }
        log += f.exponent * t.ln();
    }
    Ok(log.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanishes_at_origin() {
        let l = Lattice::new(I).unwrap();
        assert!(theta(C64::new(0.0, 0.0), &l).norm() < 1e-14);
    }

    #[test]
    fn rejects_lower_half_plane() {
        assert!(Lattice::new(C64::new(0.3, -0.1)).is_err());
        assert!(Lattice::rhombic(3.5).is_err());
    }

    #[test]
    fn quasi_factor_at_special_points() {
        let l = Lattice::new(I).unwrap();
        let f = theta_quasi_factor(C64::new(0.0, 0.0), &l);
        assert!((f - C64::new(-PI.exp(), 0.0)).norm() < 1e-12 * PI.exp());
        let z = -(l.tau + 1.0) * 0.5;
        assert!((theta_quasi_factor(z, &l) - 1.0).norm() < 1e-15);
    }

    #[test]
    fn log_derivative_near_zero_is_one_over_z() {
        let l = Lattice::rhombic(1.9).unwrap();
        let z = C64::new(1e-3, 0.0);
        let v = log_theta_derivative(z, &l).unwrap();
        assert!((v * z - 1.0).norm() < 1e-2);
        assert!(log_theta_derivative(C64::new(0.0, 0.0), &l).is_err());
    }

    #[test]
    fn empty_product_is_one() {
        let l = Lattice::new(I).unwrap();
        assert_eq!(theta_product(C64::new(0.2, 0.1), &[], &l).unwrap(), C64::new(1.0, 0.0));
    }

    #[test]
    fn unbalanced_product_is_rejected() {
        let l = Lattice::new(I).unwrap();
        let f = [ThetaFactor { shift: C64::new(0.1, 0.0), exponent: 1.0 }];
        assert!(matches!(theta_product(C64::new(0.3, 0.2), &f, &l), Err(Error::Contract(_))));
    }
}
