//! Continuous-time realizations of discrete-time walks.
//!
//! A 1-D walk is the time-one map of a continuous-time walk exactly when
//! every eigenvalue branch has winding number zero. Then each branch has a
//! real periodic logarithm `h` with `exp(ih) = λ`, and
//! `V⁽ᵗ⁾ = Σ_b exp(i t h_b(k)) · (projection onto the section of b)` is a
//! strongly continuous unitary group with `V⁽¹⁾ = U`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::category::random_state;
use crate::dynamics::{step, StateVector};
use crate::error::{QwError, Result};
use crate::spectral::{self, state_to_wavenumber, wavenumber_to_state, SpectrumDecomposition, DEFAULT_GRID};
use crate::symbol::WalkDefinition;

/// Amplitudes below this are dropped from evolved states.
pub const AMPLITUDE_CUTOFF: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchWinding {
    pub branch: usize,
    pub winding: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizabilityVerdict {
    pub realizable: bool,
    pub windings: Vec<BranchWinding>,
    /// First branch with nonzero winding.
    pub obstruction: Option<BranchWinding>,
}

pub fn realizable(w: &WalkDefinition) -> Result<RealizabilityVerdict> {
    Ok(spectrum_realizable(&spectral::track_branches(w, DEFAULT_GRID)?))
}

pub fn spectrum_realizable(s: &SpectrumDecomposition) -> RealizabilityVerdict {
    let windings: Vec<BranchWinding> = s
        .branches()
        .iter()
        .enumerate()
        .map(|(branch, f)| BranchWinding {
            branch,
            winding: f.winding(),
        })
        .collect();
    let obstruction = windings.iter().find(|b| b.winding != 0).cloned();
    RealizabilityVerdict {
        realizable: obstruction.is_none(),
        windings,
        obstruction,
    }
}

/// Real phases `h_b` with `exp(i h_b) = λ_b`, sampled on the branch grids.
#[derive(Clone, Debug)]
pub struct PhaseGenerator {
    spectrum: Arc<SpectrumDecomposition>,
    phases: Vec<Vec<f64>>,
}

/// Persisted form of one branch of a generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorBranchDocument {
    pub branch: usize,
    pub period: f64,
    pub phase_samples: Vec<f64>,
}

pub fn build_generator(w: &WalkDefinition) -> Result<PhaseGenerator> {
    generator_from_spectrum(Arc::new(spectral::track_branches(w, DEFAULT_GRID)?))
}

pub fn generator_from_spectrum(spectrum: Arc<SpectrumDecomposition>) -> Result<PhaseGenerator> {
    let verdict = spectrum_realizable(&spectrum);
    if let Some(b) = verdict.obstruction {
        return Err(QwError::NotRealizable {
            branch: b.branch,
            winding: b.winding,
        });
    }
    let phases = spectrum
        .branches()
        .iter()
        .map(|f| {
            let mut h = match f.constant_value() {
                Some(c) => vec![c.arg(); f.len()],
                None => f.unwrapped_phase()?,
            };
            // Principal value at k = 0; unwrapping already starts there.
            if h[0] <= -PI + 1e-12 {
                h.iter_mut().for_each(|x| *x += 2.0 * PI);
            }
            Ok(h)
        })
        .collect::<Result<_>>()?;
    Ok(PhaseGenerator { spectrum, phases })
}

impl PhaseGenerator {
    pub fn spectrum(&self) -> &SpectrumDecomposition {
        &self.spectrum
    }

    pub fn phase_samples(&self, b: usize) -> &[f64] {
        &self.phases[b]
    }

    /// `h_b(κ)`: the nearest grid value corrected by the phase of `λ_b(κ)/λ_b(k_i)`.
    pub fn phase_at(&self, b: usize, kappa: f64) -> f64 {
        let f = self.spectrum.branch(b);
        let len = f.len();
        let kappa = kappa.rem_euclid(f.period());
        let i = ((kappa / f.period() * len as f64).round() as usize) % len;
        let anchor = f.samples()[i];
        let mut offset = kappa - f.grid_point(i);
        if offset > 0.5 * f.period() {
            offset -= f.period();
        }
        self.phases[b][i] + (f.value_at(f.grid_point(i) + offset) / anchor).arg()
    }

    /// Largest `|exp(i h_b) − λ_b|` on the sample grids.
    pub fn residual(&self) -> f64 {
        self.spectrum
            .branches()
            .iter()
            .zip(&self.phases)
            .flat_map(|(f, h)| f.samples().iter().zip(h).map(|(z, x)| (Complex64::from_polar(1.0, *x) - z).norm()))
            .fold(0.0, f64::max)
    }

    /// Largest mismatch between the phase continued to `k = p` and `h(0)`.
    pub fn endpoint_mismatch(&self) -> f64 {
        self.spectrum
            .branches()
            .iter()
            .zip(&self.phases)
            .map(|(f, h)| {
                let last = h[h.len() - 1] + (f.samples()[0] / f.samples()[f.len() - 1]).arg();
                (last - h[0]).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn to_documents(&self) -> Vec<GeneratorBranchDocument> {
        self.spectrum
            .branches()
            .iter()
            .enumerate()
            .map(|(branch, f)| GeneratorBranchDocument {
                branch,
                period: f.period(),
                phase_samples: self.phases[branch].clone(),
            })
            .collect()
    }
}

/// `V⁽ᵗ⁾ ξ` computed in wavenumber space on a periodic window of `window` sites.
///
/// The state must sit inside the central half of the window, which is then
/// centred on the state.
pub fn evolve_continuous(g: &PhaseGenerator, t: f64, xi: &StateVector, window: usize) -> Result<StateVector> {
    let w = g.spectrum.walk();
    if xi.dim() != 1 || xi.degree() != w.degree() {
        return Err(QwError::DimensionMismatch(format!(
            "state has d = {}, n = {} but the walk has d = 1, n = {}",
            xi.dim(),
            xi.degree(),
            w.degree()
        )));
    }
    let Some(bounds) = xi.support_bounds() else {
        return Ok(xi.clone());
    };
    let (lo, hi) = bounds[0];
    let width = (hi - lo + 1) as usize;
    if 2 * width > window {
        return Err(QwError::WindowTooSmall {
            window,
            reason: format!("state support spans {width} sites, more than half the window"),
        });
    }
    let start = (lo + hi) / 2 - window as i64 / 2;
    let xi_hat = state_to_wavenumber(xi, window)?;
    let out: Vec<DVector<Complex64>> = (0..window)
        .into_par_iter()
        .map(|j| -> Result<DVector<Complex64>> {
            let k = 2.0 * PI * j as f64 / window as f64;
            let mut acc = DVector::zeros(w.degree());
            for e in g.spectrum.frame_at(k)? {
                let h = g.phase_at(e.branch, k + 2.0 * PI * e.sheet as f64);
                acc += &e.vector * (Complex64::from_polar(1.0, t * h) * e.vector.dotc(&xi_hat[j]));
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    wavenumber_to_state(&out, start, AMPLITUDE_CUTOFF)
}

/// `max ‖V⁽¹⁾ξ − Uξ‖` over seeded random unit states supported on a tenth of the window.
pub fn verify_realization(g: &PhaseGenerator, w: &WalkDefinition, window: usize, trials: usize, seed: u64) -> Result<f64> {
    let r = w.propagation_radius() as usize;
    let half = (window / 20) as i64;
    if window < 40 || 2 * (2 * half as usize + 1 + 2 * r) > window {
        return Err(QwError::WindowTooSmall {
            window,
            reason: format!("too small for test states of a walk with radius {r}"),
        });
    }
    let defects: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|s| -> Result<f64> {
            let xi = random_state(w.degree(), -half, half, seed, s as u64)?;
            Ok(evolve_continuous(g, 1.0, &xi, window)?.distance(&step(w, &xi)?))
        })
        .collect::<Result<_>>()?;
    Ok(defects.into_iter().fold(0.0, f64::max))
}
