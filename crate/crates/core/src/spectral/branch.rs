use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::fourier::FourierSeries;
use crate::error::{QwError, Result};

/// Samples must lie on the unit circle to this accuracy.
pub const MODULUS_TOLERANCE: f64 = 1e-9;

/// Sample variance at or below this marks a branch as constant.
pub const CONSTANT_VARIANCE: f64 = 1e-12;

/// Sup-norm tolerance for accepting a candidate period.
pub const PERIOD_TOLERANCE: f64 = 1e-7;

/// Fourier coefficients above this size count when looking for the period lattice.
const FREQUENCY_THRESHOLD: f64 = 1e-9;

/// Largest phase increment between adjacent samples that unwrapping trusts.
pub const MAX_PHASE_STEP: f64 = 0.5 * PI;

/// An analytic unit-circle-valued function sampled on `[0, p)`.
///
/// Sample `i` sits at `k = p·i/L`. Derived data (Fourier series, minimal
/// period, winding) is computed once at construction.
#[derive(Clone, Debug, Serialize)]
pub struct EigenvalueFunction {
    samples: Vec<Complex64>,
    period: f64,
    minimal_period: f64,
    winding: i64,
    constant: bool,
    closure_defect: f64,
    #[serde(skip)]
    closure_prediction: Complex64,
    #[serde(skip)]
    fourier: FourierSeries,
}

impl EigenvalueFunction {
    pub fn from_samples(samples: Vec<Complex64>, period: f64) -> Result<Self> {
        if samples.len() < 8 || !(period > 0.0) {
            return Err(QwError::InvalidArgument(format!(
                "an eigenvalue function needs at least 8 samples and a positive period (got {} samples, p = {period})",
                samples.len()
            )));
        }
        if let Some((i, z)) = samples
            .iter()
            .enumerate()
            .find(|(_, z)| (z.norm() - 1.0).abs() > MODULUS_TOLERANCE)
        {
            return Err(QwError::NonUnitarySymbol {
                k: period * i as f64 / samples.len() as f64,
                deviation: z.norm() - 1.0,
            });
        }
        let len = samples.len() as f64;
        let mean = samples.iter().sum::<Complex64>() / len;
        let variance = samples.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / len;
        let fourier = FourierSeries::from_samples(&samples, period);
        let mut f = Self {
            samples,
            period,
            minimal_period: 0.0,
            winding: 0,
            constant: variance <= CONSTANT_VARIANCE,
            closure_defect: 0.0,
            closure_prediction: Complex64::new(0.0, 0.0),
            fourier,
        };
        if !f.constant {
            let phase = f.unwrapped_phase()?;
            let m = f.period_divisor();
            f.minimal_period = period / m as f64;
            let total = phase_total(&f.samples, &phase);
            let turns = (total / (2.0 * PI)).round() as i64;
            f.winding = (turns as f64 / m as f64).round() as i64;
            f.closure_prediction = continue_to_period(&f.samples, &phase);
            f.closure_defect = (f.closure_prediction - f.samples[0]).norm();
        }
        Ok(f)
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Declared period `p`.
    pub fn period(&self) -> f64 {
        self.period
    }

    /// Smallest period `p/m`; 0 for constants.
    pub fn minimal_period(&self) -> f64 {
        self.minimal_period
    }

    /// Turns around the origin per minimal period; 0 for constants.
    pub fn winding(&self) -> i64 {
        self.winding
    }

    pub fn is_constant(&self) -> bool {
        self.constant
    }

    /// Mismatch between `λ(0)` and the smooth continuation of the last samples to `k = p`.
    ///
    /// For branches tracked from a walk the continuation is first snapped to the
    /// nearest eigenvalue of the symbol at `k = p`, so the figure measures whether
    /// the strand closes on itself rather than the extrapolation error.
    pub fn closure_defect(&self) -> f64 {
        self.closure_defect
    }

    pub(crate) fn snap_closure(&mut self, eigenvalues: &[Complex64]) {
        if self.constant {
            return;
        }
        let target = self.closure_prediction;
        if let Some(z) = eigenvalues
            .iter()
            .min_by(|a, b| (*a - target).norm().total_cmp(&(*b - target).norm()))
        {
            self.closure_defect = (z - self.samples[0]).norm();
        }
    }

    pub fn fourier(&self) -> &FourierSeries {
        &self.fourier
    }

    pub fn grid_point(&self, i: usize) -> f64 {
        self.period * i as f64 / self.samples.len() as f64
    }

    /// Number of copies of `[0, 2π)` the period covers, when `p ∈ 2πℕ`.
    pub fn sheets(&self) -> usize {
        (self.period / (2.0 * PI)).round().max(1.0) as usize
    }

    pub fn constant_value(&self) -> Option<Complex64> {
        self.constant
            .then(|| self.samples.iter().sum::<Complex64>() / self.samples.len() as f64)
    }

    /// `λ(k)` for any real `k`, by Fourier interpolation.
    pub fn value_at(&self, k: f64) -> Complex64 {
        match self.constant_value() {
            Some(c) => c,
            None => self.fourier.eval(k),
        }
    }

    pub fn derivative_at(&self, k: f64) -> Complex64 {
        if self.constant {
            Complex64::default()
        } else {
            self.fourier.derivative(k)
        }
    }

    /// `d/dk arg λ(k)`.
    pub fn group_velocity(&self, k: f64) -> f64 {
        if self.constant {
            return 0.0;
        }
        let z = self.fourier.eval(k);
        (z.conj() * self.fourier.derivative(k)).im / z.norm_sqr()
    }

    /// Continuous phase with `φ(0) ∈ (−π, π]`.
    pub fn unwrapped_phase(&self) -> Result<Vec<f64>> {
        let mut phase = Vec::with_capacity(self.samples.len());
        phase.push(self.samples[0].arg());
        for i in 1..self.samples.len() {
            let jump = (self.samples[i] / self.samples[i - 1]).arg();
            if jump_too_large(jump) {
                return Err(QwError::UnwrapFailure { index: i, jump });
            }
            phase.push(phase[i - 1] + jump);
        }
        let wrap = (self.samples[0] / self.samples[self.samples.len() - 1]).arg();
        if jump_too_large(wrap) {
            return Err(QwError::UnwrapFailure {
                index: self.samples.len(),
                jump: wrap,
            });
        }
        Ok(phase)
    }

    /// `k ↦ λ(k − l)` on the same grid.
    pub fn translated(&self, l: f64) -> Result<Self> {
        let samples = (0..self.len())
            .map(|i| {
                let z = self.value_at(self.grid_point(i) - l);
                z / z.norm()
            })
            .collect();
        Self::from_samples(samples, self.period)
    }

    /// Pointwise product of two functions sampled on the same grid.
    pub fn product(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() || (self.period - other.period).abs() > 1e-12 {
            return Err(QwError::InvalidArgument(
                "pointwise product needs functions on the same grid".into(),
            ));
        }
        let samples = self.samples.iter().zip(&other.samples).map(|(a, b)| a * b).collect();
        Self::from_samples(samples, self.period)
    }

    /// `sup_i |λ(k_i + p/m) − λ(k_i)|`.
    fn shift_error(&self, m: usize) -> f64 {
        let len = self.samples.len();
        if len % m == 0 {
            let s = len / m;
            (0..len)
                .map(|i| (self.samples[(i + s) % len] - self.samples[i]).norm())
                .fold(0.0, f64::max)
        } else {
            let q = self.period / m as f64;
            (0..len)
                .map(|i| (self.fourier.eval(self.grid_point(i) + q) - self.samples[i]).norm())
                .fold(0.0, f64::max)
        }
    }

    /// Largest `m` such that `p/m` is a period. Any period `p/m` forces every
    /// frequency present to be a multiple of `m`, so the divisors of the
    /// frequency gcd are the only candidates.
    fn period_divisor(&self) -> usize {
        let g = self.fourier.frequency_gcd(FREQUENCY_THRESHOLD) as usize;
        let mut divisors: Vec<usize> = (1..=g).filter(|m| g % m == 0).collect();
        divisors.reverse();
        divisors
            .into_iter()
            .find(|&m| m == 1 || self.shift_error(m) <= PERIOD_TOLERANCE)
            .unwrap_or(1)
    }
}

fn jump_too_large(jump: f64) -> bool {
    jump.abs() > MAX_PHASE_STEP
}

/// Total phase change around the closed loop.
fn phase_total(samples: &[Complex64], phase: &[f64]) -> f64 {
    let last = phase[phase.len() - 1];
    last + (samples[0] / samples[samples.len() - 1]).arg() - phase[0]
}

/// Six-point polynomial extrapolation of the phase to `k = p`.
fn continue_to_period(samples: &[Complex64], phase: &[f64]) -> Complex64 {
    const WEIGHTS: [f64; 6] = [6.0, -15.0, 20.0, -15.0, 6.0, -1.0];
    let len = phase.len();
    let predicted: f64 = WEIGHTS.iter().enumerate().map(|(j, w)| w * phase[len - 1 - j]).sum();
    samples[len - 1] * Complex64::from_polar(1.0, predicted - phase[len - 1])
}
