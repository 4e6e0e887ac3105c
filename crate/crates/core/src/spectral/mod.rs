//! Eigenvalue branches of one-dimensional symbols.
//!
//! For a 1-D walk, `k ↦ Û(k)` is a `2π`-periodic analytic family of unitary
//! matrices. Its eigenvalues organize into finitely many analytic branches
//! `λ_b`, each periodic with some period `2π·c_b`, such that at every `k` the
//! list `λ_b(k + 2πm)` (over all `b` and `0 ≤ m < c_b`) is the spectrum of
//! `Û(k)`. [`track_branches`] recovers these branches and a smooth unit
//! eigenvector section along each one.

mod branch;
mod fourier;
mod sections;
mod tracking;

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

pub use branch::{EigenvalueFunction, CONSTANT_VARIANCE, MAX_PHASE_STEP, MODULUS_TOLERANCE, PERIOD_TOLERANCE};
pub use fourier::FourierSeries;
pub use sections::SECTION_CLUSTER;
pub use tracking::{AMBIGUITY_RATIO, CLUSTER_TOLERANCE, MAX_BISECTIONS};

use crate::dynamics::{Atoms, StateVector, NORM_TOLERANCE};
use crate::error::{QwError, Result};
use crate::linalg::{min_cost_assignment, EigenPairs};
use crate::symbol::WalkDefinition;

/// Smallest accepted tracking grid.
pub const MIN_GRID: usize = 512;

/// Grid used when none is specified.
pub const DEFAULT_GRID: usize = 4096;

pub(crate) fn require_1d(w: &WalkDefinition) -> Result<()> {
    if w.dim() != 1 {
        return Err(QwError::UnsupportedDimension(w.dim()));
    }
    Ok(())
}

/// Eigenvalues of `Û(k)`, sorted by argument.
pub fn eigenvalues_at(w: &WalkDefinition, k: f64) -> Result<Vec<Complex64>> {
    require_1d(w)?;
    let mut values = tracking::solve_at(w, k)?.values;
    values.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
    Ok(values)
}

/// One eigenpair of `Û(k)` labelled by the branch translate it belongs to.
#[derive(Clone, Debug)]
pub struct FrameEntry {
    pub branch: usize,
    /// `m` in `λ_b(k + 2πm)`.
    pub sheet: usize,
    pub value: Complex64,
    pub vector: DVector<Complex64>,
}

/// Branches of a 1-D walk together with their eigenvector sections.
#[derive(Clone, Debug)]
pub struct SpectrumDecomposition {
    walk: WalkDefinition,
    grid_size: usize,
    branches: Vec<Arc<EigenvalueFunction>>,
    sections: Vec<Vec<DVector<Complex64>>>,
    grid: Vec<EigenPairs>,
}

/// Tracks the eigenvalue branches of `Û` on a uniform grid of `grid_size` points per `2π`.
pub fn track_branches(w: &WalkDefinition, grid_size: usize) -> Result<SpectrumDecomposition> {
    require_1d(w)?;
    if grid_size < MIN_GRID {
        return Err(QwError::InvalidArgument(format!(
            "tracking grid must have at least {MIN_GRID} points, got {grid_size}"
        )));
    }
    let grid = tracking::solve_grid(w, grid_size)?;
    let tracked = tracking::track(w, &grid)?;
    let mut parts = Vec::with_capacity(tracked.cycles.len());
    for cycle in tracked.cycles {
        let sheets = cycle.samples.len() / grid_size;
        let section = sections::transport(&grid, &cycle.samples, &cycle.slots, tracked.start);
        let mut f = EigenvalueFunction::from_samples(cycle.samples, 2.0 * PI * sheets as f64)?;
        f.snap_closure(&grid[0].values);
        parts.push((f, section));
    }
    parts.sort_by(|a, b| branch_order(&a.0, &b.0));
    let (branches, mut sections): (Vec<_>, Vec<_>) = parts.into_iter().map(|(f, s)| (Arc::new(f), s)).unzip();

    for j in 0..grid_size {
        let mut index = Vec::new();
        let mut values = Vec::new();
        let mut vectors = Vec::new();
        for (b, f) in branches.iter().enumerate() {
            for m in 0..f.sheets() {
                let i = j + m * grid_size;
                index.push((b, i));
                values.push(f.samples()[i]);
                vectors.push(sections[b][i].clone());
            }
        }
        sections::orthonormalize(&values, &mut vectors);
        for ((b, i), v) in index.into_iter().zip(vectors) {
            sections[b][i] = v;
        }
    }

    Ok(SpectrumDecomposition {
        walk: w.clone(),
        grid_size,
        branches,
        sections,
        grid,
    })
}

/// Constants first, then by period, by `arg λ(0)`, and by the direction the phase moves.
fn branch_order(a: &EigenvalueFunction, b: &EigenvalueFunction) -> Ordering {
    let tol = 1e-9;
    match (a.constant_value(), b.constant_value()) {
        (Some(x), Some(y)) => return x.arg().total_cmp(&y.arg()),
        (Some(_), None) => return Ordering::Less,
        (None, Some(_)) => return Ordering::Greater,
        (None, None) => {}
    }
    if (a.period() - b.period()).abs() > tol {
        return a.period().total_cmp(&b.period());
    }
    let (pa, pb) = (a.samples()[0].arg(), b.samples()[0].arg());
    if (pa - pb).abs() > tol {
        return pa.total_cmp(&pb);
    }
    b.samples()[1].im.total_cmp(&a.samples()[1].im)
}

impl SpectrumDecomposition {
    pub fn walk(&self) -> &WalkDefinition {
        &self.walk
    }

    /// Grid points per `2π`.
    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn branches(&self) -> &[Arc<EigenvalueFunction>] {
        &self.branches
    }

    pub fn branch(&self, b: usize) -> &Arc<EigenvalueFunction> {
        &self.branches[b]
    }

    /// Unit eigenvectors along branch `b`, one per sample.
    pub fn sections(&self, b: usize) -> &[DVector<Complex64>] {
        &self.sections[b]
    }

    /// `(branch, sheet, λ_b(k_j + 2πm))` for every eigenvalue at grid point `j`.
    pub fn translates_at(&self, j: usize) -> Vec<(usize, usize, Complex64)> {
        self.branches
            .iter()
            .enumerate()
            .flat_map(|(b, f)| (0..f.sheets()).map(move |m| (b, m, f.samples()[j + m * self.grid_size])))
            .collect()
    }

    /// Largest optimal-assignment mismatch between branch translates and the
    /// eigenvalues of `Û` over the tracking grid.
    pub fn coverage_defect(&self) -> f64 {
        (0..self.grid_size)
            .map(|j| {
                let t: Vec<Complex64> = self.translates_at(j).into_iter().map(|(_, _, z)| z).collect();
                matching_defect(&t, &self.grid[j].values)
            })
            .fold(0.0, f64::max)
    }

    /// The same mismatch at an arbitrary `k`, with branches evaluated by interpolation.
    pub fn coverage_defect_at(&self, k: f64) -> Result<f64> {
        let eig = eigenvalues_at(&self.walk, k)?;
        let t: Vec<Complex64> = self
            .branches
            .iter()
            .flat_map(|f| (0..f.sheets()).map(move |m| f.value_at(k + 2.0 * PI * m as f64)))
            .collect();
        Ok(matching_defect(&t, &eig))
    }

    /// Largest `‖Û v − λ v‖` and largest deviation of the sections from an
    /// orthonormal frame, over the tracking grid.
    pub fn section_residuals(&self) -> (f64, f64) {
        let mut eigen_res = 0.0_f64;
        let mut ortho = 0.0_f64;
        for j in 0..self.grid_size {
            let u = self.walk.evaluate_symbol(&[2.0 * PI * j as f64 / self.grid_size as f64]);
            let frame: Vec<(Complex64, &DVector<Complex64>)> = self
                .translates_at(j)
                .into_iter()
                .map(|(b, m, z)| (z, &self.sections[b][j + m * self.grid_size]))
                .collect();
            for (a, (z, v)) in frame.iter().enumerate() {
                eigen_res = eigen_res.max((&u * *v - *v * *z).norm());
                for (b, (_, w)) in frame.iter().enumerate() {
                    let target = if a == b { 1.0 } else { 0.0 };
                    ortho = ortho.max((v.dotc(w) - target).norm());
                }
            }
        }
        (eigen_res, ortho)
    }

    /// All eigenpairs of `Û(k)` at an arbitrary `k`, labelled by branch and
    /// sheet, with eigenvectors aligned to the tracked sections.
    pub fn frame_at(&self, k: f64) -> Result<Vec<FrameEntry>> {
        let k0 = k.rem_euclid(2.0 * PI);
        let eigen = tracking::solve_at(&self.walk, k0)?;
        let mut labels = Vec::new();
        let mut targets = Vec::new();
        let mut guesses = Vec::new();
        for (b, f) in self.branches.iter().enumerate() {
            for m in 0..f.sheets() {
                let kappa = k0 + 2.0 * PI * m as f64;
                let len = f.len();
                let idx = ((kappa / f.period() * len as f64).round() as usize) % len;
                labels.push((b, m));
                targets.push(f.value_at(kappa));
                guesses.push(&self.sections[b][idx]);
            }
        }
        let cost: Vec<Vec<f64>> = targets
            .iter()
            .map(|t| eigen.values.iter().map(|z| (t - z).norm()).collect())
            .collect();
        let assignment = min_cost_assignment(&cost);
        let values: Vec<Complex64> = assignment.iter().map(|&c| eigen.values[c]).collect();
        let mut vectors: Vec<DVector<Complex64>> = guesses
            .iter()
            .zip(&assignment)
            .map(|(g, &c)| {
                let mut v = sections::project(&eigen, eigen.values[c], g);
                if v.norm() < 1e-3 {
                    v = eigen.vectors.column(c).into_owned();
                }
                v.normalize()
            })
            .collect();
        sections::orthonormalize(&values, &mut vectors);
        Ok(labels
            .into_iter()
            .zip(values)
            .zip(vectors)
            .map(|(((branch, sheet), value), vector)| FrameEntry {
                branch,
                sheet,
                value,
                vector,
            })
            .collect())
    }

    /// Section of branch `b` at an arbitrary `κ` (reduced modulo the branch period).
    pub fn section_at(&self, b: usize, kappa: f64) -> Result<DVector<Complex64>> {
        let p = self.branches[b].period();
        let kappa = kappa.rem_euclid(p);
        let sheet = ((kappa / (2.0 * PI)).floor() as usize).min(self.branches[b].sheets() - 1);
        let frame = self.frame_at(kappa - 2.0 * PI * sheet as f64)?;
        Ok(frame
            .into_iter()
            .find(|e| e.branch == b && e.sheet == sheet)
            .expect("frame contains every branch translate")
            .vector)
    }

    /// Weak limit of the velocity distribution of `U^t ξ`.
    pub fn limit_distribution(&self, xi: &StateVector) -> Result<LimitDistribution> {
        let norm = xi.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(QwError::NotNormalized(norm));
        }
        let g = self.grid_size;
        let xi_hat = state_to_wavenumber(xi, g)?;
        let mut atoms = Vec::new();
        for (b, f) in self.branches.iter().enumerate() {
            for i in 0..f.len() {
                let mass = self.sections[b][i].dotc(&xi_hat[i % g]).norm_sqr() / g as f64;
                if mass > 0.0 {
                    atoms.push((f.group_velocity(f.grid_point(i)), mass));
                }
            }
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(LimitDistribution { atoms })
    }
}

fn matching_defect(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let cost: Vec<Vec<f64>> = a.iter().map(|x| b.iter().map(|y| (x - y).norm()).collect()).collect();
    min_cost_assignment(&cost)
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i][j])
        .fold(0.0, f64::max)
}

/// `ξ̂(k_j) = Σ_x ξ(x) exp(i k_j x)` at `k_j = 2πj/points`.
///
/// Exact as long as the support of `ξ` spans at most `points` sites.
pub fn state_to_wavenumber(xi: &StateVector, points: usize) -> Result<Vec<DVector<Complex64>>> {
    if xi.dim() != 1 {
        return Err(QwError::UnsupportedDimension(xi.dim()));
    }
    let n = xi.degree();
    if let Some(b) = xi.support_bounds() {
        let width = (b[0].1 - b[0].0 + 1) as usize;
        if width > points {
            return Err(QwError::WindowTooSmall {
                window: points,
                reason: format!("state support spans {width} sites"),
            });
        }
    }
    let mut buffers = vec![vec![Complex64::default(); points]; n];
    for (site, comp, amp) in xi.iter() {
        buffers[comp][site[0].rem_euclid(points as i64) as usize] += amp;
    }
    let fft = FftPlanner::new().plan_fft_inverse(points);
    for buf in &mut buffers {
        fft.process(buf);
    }
    Ok((0..points)
        .map(|j| DVector::from_iterator(n, buffers.iter().map(|buf| buf[j])))
        .collect())
}

/// Inverse of [`state_to_wavenumber`] onto the sites `lo .. lo + points`,
/// dropping amplitudes of modulus below `threshold`.
pub fn wavenumber_to_state(values: &[DVector<Complex64>], lo: i64, threshold: f64) -> Result<StateVector> {
    let points = values.len();
    let n = values.first().map_or(1, |v| v.len());
    let fft = FftPlanner::new().plan_fft_forward(points);
    let mut entries = Vec::new();
    for comp in 0..n {
        let mut buf: Vec<Complex64> = values.iter().map(|v| v[comp]).collect();
        fft.process(&mut buf);
        for x in lo..lo + points as i64 {
            let a = buf[x.rem_euclid(points as i64) as usize] / points as f64;
            if a.norm() >= threshold {
                entries.push((vec![x], comp, a));
            }
        }
    }
    StateVector::from_amplitudes(1, n, entries)
}

/// Smallest period of `λ` of the form `p/m`; 0 for constants.
pub fn minimal_period(lambda: &EigenvalueFunction) -> f64 {
    lambda.minimal_period()
}

/// Turns of `λ` around the origin per minimal period.
pub fn winding_number(lambda: &EigenvalueFunction) -> i64 {
    lambda.winding()
}

/// `d/dk arg λ(k)`.
pub fn group_velocity(lambda: &EigenvalueFunction, k: f64) -> f64 {
    lambda.group_velocity(k)
}

/// Velocity atoms `(v, mass)` sorted by `v`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitDistribution {
    pub atoms: Vec<(f64, f64)>,
}

impl LimitDistribution {
    /// Largest `|v|` carrying mass above `threshold`.
    pub fn support_radius(&self, threshold: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|(_, m)| *m > threshold)
            .map(|(v, _)| v.abs())
            .fold(0.0, f64::max)
    }
}

impl Atoms for LimitDistribution {
    fn dim(&self) -> usize {
        1
    }

    fn atoms(&self) -> Vec<(Vec<f64>, f64)> {
        self.atoms.iter().map(|(v, m)| (vec![*v], *m)).collect()
    }
}

/// Weak limit of the velocity distribution of `U^t ξ` as `t → ∞`.
pub fn limit_velocity_distribution(w: &WalkDefinition, xi: &StateVector) -> Result<LimitDistribution> {
    track_branches(w, DEFAULT_GRID)?.limit_distribution(xi)
}
