//! Continuation of the eigenvalues of `Û(k)` across one turn of `k`.
//!
//! Each eigenvalue strand is extrapolated in phase from its last few points
//! and the strands are matched to the eigenvalues at the next `k` by optimal
//! assignment. A step whose match is not clearly better than the nearest
//! competing eigenvalue is bisected. After one turn the strands end on a
//! permutation of their starting eigenvalues; each cycle of that permutation
//! is one branch, with period `2π` times the cycle length.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::branch::MODULUS_TOLERANCE;
use crate::error::{QwError, Result};
use crate::linalg::{eigen_normal, min_cost_assignment, EigenPairs};
use crate::symbol::WalkDefinition;

/// Eigenvalues closer than this are treated as one degenerate eigenvalue.
pub const CLUSTER_TOLERANCE: f64 = 1e-9;

/// A match is ambiguous when the prediction error exceeds this fraction of
/// the distance to the nearest distinct eigenvalue.
pub const AMBIGUITY_RATIO: f64 = 0.3;

/// Maximum bisection depth before giving up on a step.
pub const MAX_BISECTIONS: u32 = 12;

/// Cost added to non-preferred matches, to break exact ties deterministically.
const TIE_BREAK: f64 = 1e-13;

pub(crate) fn solve_at(w: &WalkDefinition, k: f64) -> Result<EigenPairs> {
    let e = eigen_normal(&w.evaluate_symbol(&[k]));
    if let Some(z) = e.values.iter().find(|z| (z.norm() - 1.0).abs() > MODULUS_TOLERANCE) {
        return Err(QwError::NonUnitarySymbol {
            k,
            deviation: z.norm() - 1.0,
        });
    }
    Ok(e)
}

/// Eigen-decompositions at `k_j = 2πj/g`.
pub(crate) fn solve_grid(w: &WalkDefinition, g: usize) -> Result<Vec<EigenPairs>> {
    (0..g)
        .into_par_iter()
        .map(|j| solve_at(w, 2.0 * PI * j as f64 / g as f64))
        .collect()
}

struct Strand {
    /// Last few `(k, unwrapped phase)` points, oldest first.
    history: Vec<(f64, f64)>,
    value: Complex64,
    slot: usize,
}

impl Strand {
    fn new(k: f64, value: Complex64, slot: usize) -> Self {
        Self {
            history: vec![(k, value.arg())],
            value,
            slot,
        }
    }

    fn k(&self) -> f64 {
        self.history[self.history.len() - 1].0
    }

    /// Lagrange extrapolation of the phase through the stored points.
    fn predict(&self, k: f64) -> Complex64 {
        let h = &self.history;
        let mut phase = 0.0;
        for (i, &(ki, pi)) in h.iter().enumerate() {
            let mut w = 1.0;
            for (j, &(kj, _)) in h.iter().enumerate() {
                if i != j {
                    w *= (k - kj) / (ki - kj);
                }
            }
            phase += w * pi;
        }
        Complex64::from_polar(1.0, phase)
    }

    fn advance(&mut self, k: f64, value: Complex64, slot: usize) {
        let last = self.history[self.history.len() - 1].1;
        let phase = last + (value / self.value).arg();
        if self.history.len() == 3 {
            self.history.remove(0);
        }
        self.history.push((k, phase));
        self.value = value;
        self.slot = slot;
    }
}

/// Smallest distance between distinct (non-clustered) eigenvalues.
pub(crate) fn spectral_gap(values: &[Complex64]) -> f64 {
    let mut gap = f64::INFINITY;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            let d = (a - b).norm();
            if d > CLUSTER_TOLERANCE {
                gap = gap.min(d);
            }
        }
    }
    gap
}

fn cluster_count(values: &[Complex64]) -> usize {
    (0..values.len())
        .filter(|&i| values[..i].iter().all(|z| (z - values[i]).norm() > CLUSTER_TOLERANCE))
        .count()
}

/// `Some(distance to the competing eigenvalue)` for the worst ambiguous match.
fn ambiguity(preds: &[Complex64], values: &[Complex64], assignment: &[usize]) -> Option<f64> {
    let mut worst: Option<f64> = None;
    for (s, &c) in assignment.iter().enumerate() {
        let own = (preds[s] - values[c]).norm();
        let alt = values
            .iter()
            .filter(|z| (*z - values[c]).norm() > CLUSTER_TOLERANCE)
            .map(|z| (preds[s] - z).norm())
            .fold(f64::INFINITY, f64::min);
        if own > AMBIGUITY_RATIO * alt {
            worst = Some(worst.map_or(alt, |w: f64| w.min(alt)));
        }
    }
    worst
}

fn step(
    w: &WalkDefinition,
    strands: &mut [Strand],
    k_to: f64,
    target: &EigenPairs,
    prefer: &[Option<usize>],
    depth: u32,
) -> Result<()> {
    let n = strands.len();
    let preds: Vec<Complex64> = strands.iter().map(|s| s.predict(k_to)).collect();
    let cost: Vec<Vec<f64>> = (0..n)
        .map(|s| {
            (0..n)
                .map(|c| (preds[s] - target.values[c]).norm() + if prefer[s] == Some(c) { 0.0 } else { TIE_BREAK })
                .collect()
        })
        .collect();
    let assignment = min_cost_assignment(&cost);
    if let Some(gap) = ambiguity(&preds, &target.values, &assignment) {
        if depth >= MAX_BISECTIONS {
            return Err(QwError::TrackingAmbiguity { k: k_to, gap });
        }
        let mid = 0.5 * (strands[0].k() + k_to);
        let mid_eigen = solve_at(w, mid)?;
        step(w, strands, mid, &mid_eigen, &vec![None; n], depth + 1)?;
        return step(w, strands, k_to, target, prefer, depth + 1);
    }
    for (s, &c) in assignment.iter().enumerate() {
        strands[s].advance(k_to, target.values[c], c);
    }
    Ok(())
}

/// One branch before it becomes an eigenvalue function: values and the
/// eigen-index they occupy at each grid point, starting at `k = 0`.
#[derive(Clone, Debug)]
pub(crate) struct Cycle {
    pub samples: Vec<Complex64>,
    pub slots: Vec<usize>,
}

pub(crate) struct Tracked {
    /// Grid index where tracking started (largest spectral gap).
    pub start: usize,
    pub cycles: Vec<Cycle>,
}

pub(crate) fn track(w: &WalkDefinition, grid: &[EigenPairs]) -> Result<Tracked> {
    let g = grid.len();
    let n = w.degree();
    // Start where the spectrum splits into the most clusters, widest gap first,
    // so no two strands begin on a crossing.
    let start = (0..g)
        .map(|j| (j, cluster_count(&grid[j].values), spectral_gap(&grid[j].values)))
        .fold((0, 0, f64::NEG_INFINITY), |best, cur| {
            if (cur.1, cur.2) > (best.1, best.2) {
                cur
            } else {
                best
            }
        })
        .0;
    let k0 = 2.0 * PI * start as f64 / g as f64;
    let mut strands: Vec<Strand> = (0..n).map(|s| Strand::new(k0, grid[start].values[s], s)).collect();
    let mut values = vec![Vec::with_capacity(g); n];
    let mut slots = vec![Vec::with_capacity(g); n];
    for s in 0..n {
        values[s].push(strands[s].value);
        slots[s].push(s);
    }
    for t in 1..=g {
        let j = (start + t) % g;
        let k = k0 + 2.0 * PI * t as f64 / g as f64;
        // On closing the turn, exact ties go back to the strand's own start.
        let prefer: Vec<Option<usize>> = if t == g {
            (0..n).map(Some).collect()
        } else {
            strands.iter().map(|s| Some(s.slot)).collect()
        };
        step(w, &mut strands, k, &grid[j], &prefer, 0)?;
        if t < g {
            for s in 0..n {
                values[s].push(strands[s].value);
                slots[s].push(strands[s].slot);
            }
        }
    }
    let perm: Vec<usize> = strands.iter().map(|s| s.slot).collect();

    let mut visited = vec![false; n];
    let mut cycles = Vec::new();
    for s0 in 0..n {
        if visited[s0] {
            continue;
        }
        let mut order = Vec::new();
        let mut s = s0;
        while !visited[s] {
            visited[s] = true;
            order.push(s);
            s = perm[s];
        }
        let cat_values: Vec<Complex64> = order.iter().flat_map(|&s| values[s].iter().copied()).collect();
        let cat_slots: Vec<usize> = order.iter().flat_map(|&s| slots[s].iter().copied()).collect();
        let len = cat_values.len();
        let rotate = |offset: usize| -> Cycle {
            Cycle {
                samples: (0..len).map(|i| cat_values[(i + len - start + offset) % len]).collect(),
                slots: (0..len).map(|i| cat_slots[(i + len - start + offset) % len]).collect(),
            }
        };
        let best = (0..order.len())
            .map(|r| rotate(r * g))
            .min_by(|a, b| canonical_start(&a.samples, &b.samples))
            .expect("cycle is non-empty");
        cycles.push(best);
    }
    Ok(Tracked { start, cycles })
}

/// Preference among the `2π`-translates of one branch: `λ(0)` nearest 1,
/// then the one below the real axis, then the one whose phase increases.
fn canonical_start(a: &[Complex64], b: &[Complex64]) -> Ordering {
    let tol = 1e-9;
    let (pa, pb) = (a[0].arg(), b[0].arg());
    if (pa.abs() - pb.abs()).abs() > tol {
        return pa.abs().total_cmp(&pb.abs());
    }
    if (pa - pb).abs() > tol {
        return pa.total_cmp(&pb);
    }
    b[1].im.total_cmp(&a[1].im)
}
