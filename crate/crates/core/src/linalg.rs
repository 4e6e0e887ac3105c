//! Small dense helpers: unitary eigen-decomposition, optimal assignment and
//! symmetric orthonormalization.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::symbol::CMatrix;

const SCHUR_EPS: f64 = 1e-15;
const SCHUR_MAX_ITER: usize = 10_000;

/// Eigenvalues and orthonormal eigenvectors of a normal matrix.
///
/// For a normal matrix the complex Schur form is diagonal, so the Schur
/// vectors are eigenvectors; column `i` of `vectors` belongs to `values[i]`.
#[derive(Clone, Debug)]
pub struct EigenPairs {
    pub values: Vec<Complex64>,
    pub vectors: CMatrix,
}

pub fn eigen_normal(m: &CMatrix) -> EigenPairs {
    let n = m.nrows();
    if n == 1 {
        return EigenPairs {
            values: vec![m[(0, 0)]],
            vectors: CMatrix::identity(1, 1),
        };
    }
    let schur = Schur::try_new(m.clone(), SCHUR_EPS, SCHUR_MAX_ITER)
        .or_else(|| Schur::try_new(m.clone(), 1e-13, 10 * SCHUR_MAX_ITER))
        .expect("complex Schur iteration converges for unitary matrices");
    let (q, t) = schur.unpack();
    EigenPairs {
        values: (0..n).map(|i| t[(i, i)]).collect(),
        vectors: q,
    }
}

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method).
/// Returns `assignment[row] = column`.
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        if p[j] != 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Löwdin orthonormalization `V (V*V)^{-1/2}`: the orthonormal basis of the
/// column span closest to the input columns.
pub fn lowdin(vectors: &[DVector<Complex64>]) -> Vec<DVector<Complex64>> {
    if vectors.len() < 2 {
        return vectors.iter().map(|v| v.normalize()).collect();
    }
    let n = vectors[0].len();
    let v = DMatrix::from_columns(vectors);
    debug_assert_eq!(v.nrows(), n);
    let gram = v.adjoint() * &v;
    let eig = SymmetricEigen::new(gram);
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(1.0 / l.max(1e-300).sqrt(), 0.0)));
    let s = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.adjoint();
    let out = v * s;
    out.column_iter().map(|c| c.into_owned()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assignment_finds_optimum() {
        let cost = vec![
            vec![4.0, 1.0, 3.0],
            vec![2.0, 0.0, 5.0],
            vec![3.0, 2.0, 2.0],
        ];
        let a = min_cost_assignment(&cost);
        let total: f64 = a.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        assert_eq!(total, 5.0);
        let mut seen = a.clone();
        seen.sort();
        assert_eq!(seen, vec![0, 1, 2]);
    }

    #[test]
    fn eigen_of_rotation() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[0.6, -0.8, 0.8, 0.6].map(|x| Complex64::new(x, 0.0)),
        );
        let e = eigen_normal(&m);
        let mut vals = e.values.clone();
        vals.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((vals[0] - Complex64::new(0.6, -0.8)).norm() < 1e-14);
        assert!((vals[1] - Complex64::new(0.6, 0.8)).norm() < 1e-14);
        for (i, l) in e.values.iter().enumerate() {
            let v = e.vectors.column(i);
            assert!((&m * v - v * *l).norm() < 1e-14);
        }
    }

    #[test]
    fn lowdin_orthonormalizes() {
        let a = DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.1, 0.0)]);
        let b = DVector::from_vec(vec![Complex64::new(0.1, 0.2), Complex64::new(1.0, 0.0)]);
        let out = lowdin(&[a, b]);
        assert!((out[0].dotc(&out[0]).re - 1.0).abs() < 1e-14);
        assert!(out[0].dotc(&out[1]).norm() < 1e-14);
    }
}
