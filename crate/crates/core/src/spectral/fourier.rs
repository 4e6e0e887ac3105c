//! Truncated Fourier series of periodic samples.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

/// Coefficients below this fraction of the largest one are dropped.
pub const TRUNCATION: f64 = 1e-12;

/// `f(k) = Σ_m c_m exp(2πi m k / p)` on a period `p`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FourierSeries {
    period: f64,
    coeffs: Vec<(i64, Complex64)>,
}

impl FourierSeries {
    /// Interpolating series through `samples[i] = f(p·i/L)`.
    pub fn from_samples(samples: &[Complex64], period: f64) -> Self {
        let len = samples.len();
        let mut buf = samples.to_vec();
        FftPlanner::new().plan_fft_forward(len).process(&mut buf);
        let scale = 1.0 / len as f64;
        let largest = buf.iter().map(|c| c.norm()).fold(0.0, f64::max) * scale;
        let coeffs = buf
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() * scale > TRUNCATION * largest)
            .map(|(m, c)| {
                let freq = if m > len / 2 { m as i64 - len as i64 } else { m as i64 };
                (freq, c * scale)
            })
            .collect();
        Self { period, coeffs }
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// `(frequency, coefficient)` pairs in FFT order.
    pub fn coefficients(&self) -> &[(i64, Complex64)] {
        &self.coeffs
    }

    fn omega(&self) -> f64 {
        2.0 * PI / self.period
    }

    pub fn eval(&self, k: f64) -> Complex64 {
        let w = self.omega();
        self.coeffs
            .iter()
            .map(|(m, c)| c * Complex64::from_polar(1.0, w * *m as f64 * k))
            .sum()
    }

    pub fn derivative(&self, k: f64) -> Complex64 {
        let w = self.omega();
        self.coeffs
            .iter()
            .map(|(m, c)| c * Complex64::new(0.0, w * *m as f64) * Complex64::from_polar(1.0, w * *m as f64 * k))
            .sum()
    }

    /// Greatest common divisor of the nonzero frequencies whose coefficient
    /// exceeds `threshold`; 0 when there are none.
    pub fn frequency_gcd(&self, threshold: f64) -> u64 {
        self.coeffs
            .iter()
            .filter(|(m, c)| *m != 0 && c.norm() > threshold)
            .fold(0u64, |g, (m, _)| gcd(g, m.unsigned_abs()))
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_trigonometric_polynomial() {
        let p = 4.0 * PI;
        let f = |k: f64| Complex64::from_polar(1.0, 1.5 * k) * 0.5 + Complex64::new(0.25, 0.0);
        let len = 64;
        let samples: Vec<_> = (0..len).map(|i| f(p * i as f64 / len as f64)).collect();
        let s = FourierSeries::from_samples(&samples, p);
        assert_eq!(s.coefficients().len(), 2);
        for k in [0.1, 2.0, 7.3, -1.0] {
            assert!((s.eval(k) - f(k)).norm() < 1e-13);
            let df = Complex64::new(0.0, 1.5) * Complex64::from_polar(0.5, 1.5 * k);
            assert!((s.derivative(k) - df).norm() < 1e-12);
        }
        assert_eq!(s.frequency_gcd(1e-9), 3);
    }

    #[test]
    fn negative_frequencies() {
        let p = 2.0 * PI;
        let samples: Vec<_> = (0..32).map(|i| Complex64::from_polar(1.0, -2.0 * p * i as f64 / 32.0)).collect();
        let s = FourierSeries::from_samples(&samples, p);
        assert_eq!(s.coefficients()[0].0, -2);
        assert!((s.eval(0.3) - Complex64::from_polar(1.0, -0.6)).norm() < 1e-13);
    }
}
