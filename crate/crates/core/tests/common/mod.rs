//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls into the library's evolution or eigen-solvers: walks
//! are read only through their Laurent coefficients.

#![allow(dead_code)]

pub mod properties;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use qwcat::dynamics::StateVector;
use qwcat::WalkDefinition;

pub type C = Complex64;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// `(target component, source component, shift, coefficient)` for every term.
pub fn stencil(w: &WalkDefinition) -> Vec<(usize, usize, Vec<i64>, C)> {
    let n = w.degree();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for term in w.entry(i, j).terms() {
                out.push((i, j, term.shift.clone(), term.coeff));
            }
        }
    }
    out
}

/// Dense matrix of a 1-D walk restricted to sites `lo..=hi`, index `(x − lo)·n + j`.
/// Terms that would leave the window are dropped.
pub fn dense_matrix_1d(w: &WalkDefinition, lo: i64, hi: i64) -> DMatrix<C> {
    assert_eq!(w.dim(), 1);
    let n = w.degree();
    let sites = (hi - lo + 1) as usize;
    let mut m = DMatrix::zeros(sites * n, sites * n);
    for (i, j, s, coeff) in stencil(w) {
        for x in lo..=hi {
            let y = x + s[0];
            if (lo..=hi).contains(&y) {
                m[((y - lo) as usize * n + i, (x - lo) as usize * n + j)] += coeff;
            }
        }
    }
    m
}

fn to_dense_1d(xi: &StateVector, lo: i64, hi: i64) -> DVector<C> {
    let n = xi.degree();
    let mut v = DVector::zeros((hi - lo + 1) as usize * n);
    for (site, j, a) in xi.iter() {
        assert!((lo..=hi).contains(&site[0]), "initial state leaves the window");
        v[(site[0] - lo) as usize * n + j] = a;
    }
    v
}

/// `U^t ξ` by repeated dense matrix-vector products. `None` when mass reaches
/// the window edge, where truncation would corrupt the result.
pub fn dense_evolve_1d(w: &WalkDefinition, xi: &StateVector, t: u64, lo: i64, hi: i64) -> Option<StateVector> {
    let n = w.degree();
    let m = dense_matrix_1d(w, lo, hi);
    let mut v = to_dense_1d(xi, lo, hi);
    let edge = |v: &DVector<C>| {
        let last = v.len() - n;
        (0..n).any(|j| v[j].norm() > 0.0 || v[last + j].norm() > 0.0)
    };
    for _ in 0..t {
        if edge(&v) {
            return None;
        }
        v = &m * v;
    }
    if edge(&v) {
        return None;
    }
    let entries = (0..v.len())
        .filter(|&idx| v[idx] != C::default())
        .map(|idx| (vec![lo + (idx / n) as i64], idx % n, v[idx]));
    Some(StateVector::from_amplitudes(1, n, entries).unwrap())
}

/// `U^t ξ` on the box `[lo, hi]^d` stored as a flat array, one stencil pass per step.
pub fn array_evolve(w: &WalkDefinition, xi: &StateVector, t: u64, lo: i64, hi: i64) -> Option<StateVector> {
    let (d, n) = (w.dim(), w.degree());
    let side = (hi - lo + 1) as usize;
    let cells = side.pow(d as u32);
    let index = |x: &[i64]| -> Option<usize> {
        let mut idx = 0;
        for &xa in x.iter().rev() {
            if xa < lo || xa > hi {
                return None;
            }
            idx = idx * side + (xa - lo) as usize;
        }
        Some(idx)
    };
    let site = |mut idx: usize| -> Vec<i64> {
        (0..d)
            .map(|_| {
                let v = lo + (idx % side) as i64;
                idx /= side;
                v
            })
            .collect()
    };
    let on_edge = |x: &[i64]| x.iter().any(|&xa| xa == lo || xa == hi);
    let mut cur = vec![C::default(); cells * n];
    for (x, j, a) in xi.iter() {
        cur[index(&x).expect("initial state leaves the window") * n + j] = a;
    }
    let terms = stencil(w);
    let touches = |v: &[C]| (0..cells).any(|cell| (0..n).any(|j| v[cell * n + j].norm() > 0.0) && on_edge(&site(cell)));
    if touches(&cur) {
        return None;
    }
    for _ in 0..t {
        let mut next = vec![C::default(); cells * n];
        for cell in 0..cells {
            let x = site(cell);
            for (i, j, s, coeff) in &terms {
                let a = cur[cell * n + j];
                if a == C::default() {
                    continue;
                }
                let y: Vec<i64> = x.iter().zip(s).map(|(a, b)| a + b).collect();
                let target = index(&y)?;
                next[target * n + i] += coeff * a;
            }
        }
        cur = next;
        if touches(&cur) {
            return None;
        }
    }
    let entries: Vec<_> = (0..cells * n)
        .filter(|&idx| cur[idx] != C::default())
        .map(|idx| (site(idx / n), idx % n, cur[idx]))
        .collect();
    Some(StateVector::from_amplitudes(d, n, entries).unwrap())
}

/// `Û(k)` summed directly from the coefficients.
pub fn symbol_at(w: &WalkDefinition, k: &[f64]) -> DMatrix<C> {
    let n = w.degree();
    let mut m = DMatrix::zeros(n, n);
    for (i, j, s, coeff) in stencil(w) {
        let phase: f64 = s.iter().zip(k).map(|(a, b)| *a as f64 * b).sum();
        m[(i, j)] += coeff * C::from_polar(1.0, phase);
    }
    m
}

/// Characteristic polynomial coefficients, highest degree first, by Faddeev–LeVerrier.
pub fn char_poly(a: &DMatrix<C>) -> Vec<C> {
    let n = a.nrows();
    let eye = DMatrix::<C>::identity(n, n);
    let mut coeffs = vec![c(1.0, 0.0)];
    let mut m = DMatrix::<C>::zeros(n, n);
    for k in 1..=n {
        m = a * &m + &eye * coeffs[k - 1];
        let am = a * &m;
        coeffs.push(-am.trace() / k as f64);
    }
    coeffs
}

fn horner(p: &[C], z: C) -> C {
    p.iter().fold(C::default(), |acc, &a| acc * z + a)
}

/// Roots of a monic polynomial by Durand–Kerner iteration with a Newton polish.
pub fn roots(p: &[C]) -> Vec<C> {
    let n = p.len() - 1;
    let seed = c(0.4, 0.9);
    let mut z: Vec<C> = (0..n).map(|i| seed.powu(i as u32)).collect();
    for _ in 0..500 {
        let prev = z.clone();
        for i in 0..n {
            let denom: C = (0..n).filter(|&j| j != i).map(|j| z[i] - z[j]).product();
            let delta = horner(p, z[i]) / denom;
            z[i] -= delta;
        }
        if z.iter().zip(&prev).all(|(a, b)| (a - b).norm() < 1e-15) {
            break;
        }
    }
    let dp: Vec<C> = p[..n].iter().enumerate().map(|(i, a)| a * (n - i) as f64).collect();
    for zi in &mut z {
        for _ in 0..3 {
            let d = horner(&dp, *zi);
            if d.norm() > 1e-8 {
                *zi -= horner(p, *zi) / d;
            }
        }
    }
    z
}

/// Eigenvalues of `Û(k)` for a 1-D walk, by characteristic polynomial.
pub fn oracle_eigenvalues(w: &WalkDefinition, k: f64) -> Vec<C> {
    roots(&char_poly(&symbol_at(w, &[k])))
}

/// Smallest possible worst-case distance when matching `a` to `b` one-to-one.
pub fn matching_error(a: &[C], b: &[C]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    let mut best = f64::INFINITY;
    let mut perm: Vec<usize> = (0..n).collect();
    permutations(&mut perm, 0, &mut |p| {
        let e = (0..n).map(|i| (a[i] - b[p[i]]).norm()).fold(0.0, f64::max);
        best = best.min(e);
    });
    best
}

fn permutations(p: &mut Vec<usize>, at: usize, f: &mut dyn FnMut(&[usize])) {
    if at == p.len() {
        f(p);
        return;
    }
    for i in at..p.len() {
        p.swap(at, i);
        permutations(p, at + 1, f);
        p.swap(at, i);
    }
}

/// Central difference of the phase of `λ`.
pub fn finite_difference_velocity(f: impl Fn(f64) -> C, k: f64) -> f64 {
    let h = 1e-5;
    (f(k + h) / f(k - h)).arg() / (2.0 * h)
}

pub mod closed {
    //! Eigenvalue functions known in closed form.
    use super::*;

    /// Branch of `[[aS, −bS], [b, a]]`, period 4π.
    pub fn coin(a: f64, k: f64) -> C {
        let h = k / 2.0;
        C::from_polar(1.0, h) * c(a * h.cos(), -(1.0 - a * a * h.cos().powi(2)).sqrt())
    }

    /// Non-constant branch of the 3-state Grover walk, period 4π.
    pub fn grover3(k: f64) -> C {
        c((2.0 + k.cos()) / 3.0, (k / 2.0).sin() * (10.0 + 2.0 * k.cos()).sqrt() / 3.0)
    }

    /// Non-constant branches of the 4-state Grover walk.
    pub fn grover4(sign: f64, k: f64) -> C {
        c(
            (k.cos() + (3.0 * k).cos()) / 2.0,
            sign * k.sin() * (1.0 + 4.0 * k.cos().powi(4)).sqrt(),
        )
    }

    /// Branches of `[[aS⁻¹, −bS⁻¹], [bS, aS]]`.
    pub fn decomposable(a: f64, sign: f64, k: f64) -> C {
        c(a * k.cos(), sign * (1.0 - a * a * k.cos().powi(2)).sqrt())
    }

    /// Cube walk branch, period 6π.
    pub fn cube(k: f64) -> C {
        C::from_polar(1.0, 2.0 * k / 3.0)
    }

    pub const TWO_PI: f64 = 2.0 * PI;
}

/// Worst error of `samples[i] ≈ f(k_i + 2πm)` over the best sheet offset `m`.
pub fn closed_form_error(samples: &[C], period: f64, f: impl Fn(f64) -> C) -> f64 {
    let sheets = (period / (2.0 * PI)).round() as i64;
    (0..sheets)
        .map(|m| {
            samples
                .iter()
                .enumerate()
                .map(|(i, z)| {
                    let k = period * i as f64 / samples.len() as f64 + 2.0 * PI * m as f64;
                    (z - f(k)).norm()
                })
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}
