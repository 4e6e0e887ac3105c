//! Smooth eigenvector sections along tracked branches.
//!
//! A section is carried along its branch by projecting a linear
//! extrapolation of the previous two vectors onto the eigenspace at the next
//! grid point. This keeps `⟨v(k), v(k+h)⟩` close to real positive. Going
//! once around the period returns the start vector times a phase, which is
//! spread evenly over the samples so the section closes up.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::linalg::{lowdin, EigenPairs};

/// Eigenvalues within this distance share an eigenspace for projection purposes.
pub const SECTION_CLUSTER: f64 = 1e-8;

pub(crate) type Vector = DVector<Complex64>;

/// Projection of `v` onto the span of the eigenvectors whose eigenvalue is near `value`.
pub(crate) fn project(eigen: &EigenPairs, value: Complex64, v: &Vector) -> Vector {
    let mut out = Vector::zeros(v.len());
    for (c, z) in eigen.values.iter().enumerate() {
        if (z - value).norm() <= SECTION_CLUSTER {
            let q = eigen.vectors.column(c);
            out += q * q.dotc(v);
        }
    }
    out
}

/// Transported section of one branch. `samples[i]` lives at grid point
/// `i mod g` in eigen-slot `slots[i]`; transport starts at sample `start`.
pub(crate) fn transport(grid: &[EigenPairs], samples: &[Complex64], slots: &[usize], start: usize) -> Vec<Vector> {
    let g = grid.len();
    let len = samples.len();
    let column = |i: usize| -> Vector { grid[i % g].vectors.column(slots[i]).into_owned() };
    let mut out = vec![Vector::zeros(0); len];
    let first = column(start);
    out[start] = first.clone();
    let mut prev: Option<Vector> = None;
    let mut cur = first.clone();
    let mut holonomy = Complex64::new(1.0, 0.0);
    for step in 1..=len {
        let i = (start + step) % len;
        let guess = match &prev {
            Some(p) => &cur * Complex64::new(2.0, 0.0) - p,
            None => cur.clone(),
        };
        let eigen = &grid[i % g];
        let mut next = project(eigen, samples[i], &guess);
        if next.norm() < 0.5 {
            next = project(eigen, samples[i], &cur);
        }
        if next.norm() < 1e-3 {
            next = column(i);
        }
        next.normalize_mut();
        if step == len {
            let overlap = first.dotc(&next);
            holonomy = overlap / overlap.norm();
            break;
        }
        out[i] = next.clone();
        prev = Some(std::mem::replace(&mut cur, next));
    }
    let gamma = holonomy.arg();
    for step in 0..len {
        let i = (start + step) % len;
        out[i] *= Complex64::from_polar(1.0, -gamma * step as f64 / len as f64);
    }
    out
}

/// Groups indices whose values lie within [`SECTION_CLUSTER`] of each other.
pub(crate) fn clusters(values: &[Complex64]) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, z) in values.iter().enumerate() {
        match groups
            .iter_mut()
            .find(|grp| grp.iter().any(|&j| (values[j] - z).norm() <= SECTION_CLUSTER))
        {
            Some(grp) => grp.push(i),
            None => groups.push(vec![i]),
        }
    }
    groups
}

/// Orthonormalizes each degenerate group of `(value, vector)` pairs in place.
pub(crate) fn orthonormalize(values: &[Complex64], vectors: &mut [Vector]) {
    for grp in clusters(values) {
        if grp.len() < 2 {
            continue;
        }
        let cols: Vec<Vector> = grp.iter().map(|&i| vectors[i].clone()).collect();
        for (&i, v) in grp.iter().zip(lowdin(&cols)) {
            vectors[i] = v;
        }
    }
}
