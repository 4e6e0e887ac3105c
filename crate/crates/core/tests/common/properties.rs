//! Strategies and invariant checks shared by the property suites.

use std::f64::consts::PI;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestCaseError, TestRunner};
use qwcat::category;
use qwcat::spectral::{track_branches, EigenvalueFunction};
use qwcat::{registry, LaurentPoly, WalkDefinition};

use super::{symbol_at, C};

pub type Check = Result<(), TestCaseError>;

pub fn config(cases: u32, seed: u64) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(seed),
        failure_persistence: None,
        ..Config::default()
    }
}

/// Deterministic runner for use outside the `proptest!` macro.
pub fn runner(cases: u32, seed: u64) -> TestRunner {
    TestRunner::new(config(cases, seed))
}

pub fn mono(shift: i64, z: C) -> LaurentPoly {
    LaurentPoly::monomial(vec![shift], z)
}

fn unitary2(theta: f64, alpha: f64, beta: f64, phi: f64) -> [[C; 2]; 2] {
    let g = C::from_polar(1.0, phi);
    let (ct, st) = (theta.cos(), theta.sin());
    [
        [g * C::from_polar(ct, alpha), g * C::from_polar(st, beta)],
        [-g * C::from_polar(st, -beta), g * C::from_polar(ct, -alpha)],
    ]
}

fn matmul(a: &[Vec<LaurentPoly>], b: &[Vec<LaurentPoly>]) -> Vec<Vec<LaurentPoly>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).fold(LaurentPoly::zero(), |acc, m| acc + &a[i][m] * &b[m][j]))
                .collect()
        })
        .collect()
}

fn layer(shifts: [i64; 2], u: [[C; 2]; 2]) -> Vec<Vec<LaurentPoly>> {
    (0..2)
        .map(|i| (0..2).map(|j| mono(shifts[i], u[i][j])).collect())
        .collect()
}

/// `diag(S^s) C₁ diag(S^r) C₂` for random 2×2 unitaries.
pub fn two_layer_walk() -> impl Strategy<Value = WalkDefinition> {
    let angles = (0.1f64..1.4, -PI..PI, -PI..PI, -PI..PI);
    let shifts = (-2i64..=2, -2i64..=2);
    (angles.clone(), shifts.clone(), angles, shifts).prop_map(|(a1, s1, a2, s2)| {
        let rows = matmul(
            &layer([s1.0, s1.1], unitary2(a1.0, a1.1, a1.2, a1.3)),
            &layer([s2.0, s2.1], unitary2(a2.0, a2.1, a2.2, a2.3)),
        );
        WalkDefinition::from_rows("random", 1, rows).expect("products of unitaries are unitary")
    })
}

pub const FAMILIES: usize = 7;

/// Registry walks with parameters, by index.
pub fn family(kind: usize, a: f64) -> WalkDefinition {
    match kind {
        0 => registry::coin(a),
        1 => registry::coin_decomposable(a),
        2 => registry::coin_realizable(a),
        3 => registry::grover3(),
        4 => registry::grover4(),
        5 => registry::s3_walk(),
        _ => registry::cube(),
    }
    .unwrap()
}

pub fn coin_parameter() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.6), Just(0.8), Just(std::f64::consts::FRAC_1_SQRT_2), 0.2f64..0.95]
}

/// A registry family member.
pub fn family_walk() -> impl Strategy<Value = (usize, f64)> {
    (0..FAMILIES, coin_parameter())
}

/// Winding over the full period rather than per minimal period.
pub fn total_winding(f: &EigenvalueFunction) -> i64 {
    if f.is_constant() {
        0
    } else {
        f.winding() * (f.period() / f.minimal_period()).round() as i64
    }
}

pub fn check_unitarity(w: &WalkDefinition) -> Check {
    let n = w.degree();
    for j in 0..64 {
        let k = 2.0 * PI * j as f64 / 64.0;
        let u = symbol_at(w, &[k]);
        let defect = (&u * u.adjoint() - nalgebra::DMatrix::<C>::identity(n, n)).norm();
        prop_assert!(defect < 1e-10, "unitarity defect {defect} at k = {k}");
    }
    let (defect, _) = w.unitarity_defect(256);
    prop_assert!(defect <= 1e-10);
    Ok(())
}

pub fn check_closure_and_coverage(w: &WalkDefinition) -> Check {
    let s = track_branches(w, 512).unwrap();
    prop_assert!(s.coverage_defect() <= 1e-8, "coverage {}", s.coverage_defect());
    for f in s.branches() {
        prop_assert!(f.closure_defect() <= 1e-8, "closure {}", f.closure_defect());
    }
    let (residual, ortho) = s.section_residuals();
    prop_assert!(residual <= 1e-8 && ortho <= 1e-8, "sections {residual} {ortho}");
    let weight: f64 = s.branches().iter().map(|f| f.period() / (2.0 * PI)).sum();
    prop_assert!((weight - w.degree() as f64).abs() < 1e-9);
    Ok(())
}

pub fn check_grid_doubling(w: &WalkDefinition) -> Check {
    let (a, b) = (track_branches(w, 512).unwrap(), track_branches(w, 1024).unwrap());
    prop_assert_eq!(a.branches().len(), b.branches().len());
    for (fa, fb) in a.branches().iter().zip(b.branches()) {
        prop_assert_eq!(fa.winding(), fb.winding());
        prop_assert_eq!(fa.is_constant(), fb.is_constant());
        prop_assert!((fa.period() - fb.period()).abs() < 1e-9);
        if !fa.is_constant() {
            prop_assert!((fa.minimal_period() - fb.minimal_period()).abs() < 1e-9);
        }
    }
    Ok(())
}

pub fn check_group_velocity_bound(w: &WalkDefinition) -> Check {
    let s = track_branches(w, 512).unwrap();
    let r = w.propagation_radius() as f64;
    for f in s.branches() {
        for i in 0..f.len() {
            let v = f.group_velocity(f.grid_point(i));
            prop_assert!(v.abs() <= r + 1e-6, "velocity {v} exceeds radius {r}");
        }
    }
    Ok(())
}

pub fn check_winding_additivity(w1: &WalkDefinition, w2: &WalkDefinition) -> Check {
    let (s1, s2) = (track_branches(w1, 512).unwrap(), track_branches(w2, 512).unwrap());
    for f in s1.branches() {
        for g in s2.branches() {
            if (f.period() - g.period()).abs() > 1e-9 {
                continue;
            }
            let h = f.product(g).unwrap();
            prop_assert_eq!(total_winding(&h), total_winding(f) + total_winding(g));
        }
    }
    Ok(())
}

pub fn check_intertwiner_symmetry(w1: &WalkDefinition, w2: &WalkDefinition) -> Check {
    let there = category::has_uniform_intertwiner(w1, w2).unwrap();
    let back = category::has_uniform_intertwiner(w2, w1).unwrap();
    prop_assert_eq!(there.exists, back.exists);
    prop_assert_eq!(there.pairings.len(), back.pairings.len());
    Ok(())
}

pub fn check_direct_sum_additivity(w1: &WalkDefinition, w2: &WalkDefinition) -> Check {
    let parts = |w: &WalkDefinition| category::decompose_with_grid(w, 512).unwrap().parts().to_vec();
    let whole = parts(&w1.direct_sum(w2).unwrap());
    let mut pool = parts(w1);
    pool.extend(parts(w2));
    prop_assert_eq!(whole.len(), pool.len());
    for m in &whole {
        let hit = pool
            .iter()
            .position(|q| category::intertwiner_space(m, q).exists() && (m.period() - q.period()).abs() < 1e-9);
        prop_assert!(hit.is_some(), "part with period {} unmatched", m.period());
        pool.remove(hit.unwrap());
    }
    Ok(())
}
