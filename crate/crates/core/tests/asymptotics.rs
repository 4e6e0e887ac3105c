//! Long-time behaviour of velocity distributions.

mod common;

use std::f64::consts::FRAC_1_SQRT_2;

use common::c;
use qwcat::category;
use qwcat::dynamics::{evolve, kolmogorov_distance, mass_outside, velocity_distribution, StateVector};
use qwcat::spectral::limit_velocity_distribution;
use qwcat::{registry, WalkDefinition};

fn initial_states(w: &WalkDefinition) -> Vec<StateVector> {
    let n = w.degree();
    let d = w.dim();
    let mut out: Vec<StateVector> = (0..n).map(|j| StateVector::delta(d, n, &vec![0; d], j).unwrap()).collect();
    if d == 1 {
        let mut internal = vec![c(0.0, 0.0); n];
        internal[0] = c(FRAC_1_SQRT_2, 0.0);
        internal[n - 1] += c(0.0, FRAC_1_SQRT_2);
        let profile = StateVector::gaussian_1d(0.0, 3.0, 0.7, &internal).unwrap();
        assert!(profile.support_bounds().is_some());
        out.push(profile);
    }
    out
}

#[test]
fn velocity_mass_concentrates_within_the_radius() {
    for w in registry::all_default().unwrap() {
        let t = if w.dim() == 1 { 500 } else { 120 };
        let r = w.propagation_radius() as f64;
        for xi in initial_states(&w) {
            let nu = velocity_distribution(&evolve(&w, &xi, t).unwrap(), t).unwrap();
            let outside = mass_outside(&nu, r + 0.05);
            assert!(outside <= 1e-3, "{}: {outside}", w.name());
        }
    }
}

#[test]
fn spectral_limit_agrees_with_long_time_evolution() {
    let w = registry::coin(FRAC_1_SQRT_2).unwrap();
    let xi = StateVector::delta(1, 2, &[0], 0).unwrap();
    let limit = limit_velocity_distribution(&w, &xi).unwrap();
    let nu = velocity_distribution(&evolve(&w, &xi, 2000).unwrap(), 2000).unwrap();
    let k = kolmogorov_distance(&limit, &nu).unwrap();
    assert!(k <= 0.05, "{k}");
}

fn cdf(atoms: &[(f64, f64)], v: f64) -> f64 {
    atoms.iter().filter(|(x, _)| *x <= v).map(|(_, m)| m).sum()
}

/// The flat band of the 3-state Grover walk localizes mass on a few sites, so
/// the empirical measure carries its atom at `0` spread over `{0, ±1/t}`.
/// Distribution functions then converge only away from the atom.
#[test]
fn grover3_limit_holds_at_continuity_points() {
    let w = registry::grover3().unwrap();
    let t = 2000;
    for j in 0..3 {
        let xi = StateVector::delta(1, 3, &[0], j).unwrap();
        let limit: Vec<(f64, f64)> = limit_velocity_distribution(&w, &xi).unwrap().atoms;
        let nu: Vec<(f64, f64)> = velocity_distribution(&evolve(&w, &xi, t).unwrap(), t)
            .unwrap()
            .atoms
            .into_iter()
            .map(|(v, m)| (v[0], m))
            .collect();
        let atom: f64 = limit.iter().filter(|(v, _)| v.abs() < 1e-9).map(|(_, m)| m).sum();
        let near: f64 = nu.iter().filter(|(v, _)| v.abs() < 0.01).map(|(_, m)| m).sum();
        assert!(atom > 0.1 && (atom - near).abs() < 0.02, "component {j}: atom {atom}, near {near}");
        for i in 0..=80 {
            let v = -1.0 + 0.025 * i as f64;
            if v.abs() < 0.01 {
                continue;
            }
            let gap = (cdf(&limit, v) - cdf(&nu, v)).abs();
            assert!(gap <= 0.05, "component {j} at v = {v}: {gap}");
        }
    }
}

#[test]
fn intertwiner_transports_velocity_distributions() {
    let (w1, w2) = (registry::s3_walk().unwrap(), registry::grover4().unwrap());
    let (d1, d2) = (category::decompose(&w1).unwrap(), category::decompose(&w2).unwrap());
    let pairing = category::common_divisor_pairing(&d1, &d2);
    let xi = category::random_state(2, -3, 3, 5, 0).unwrap();
    let image = category::apply_intertwiner(&pairing, &d1, &d2, &xi, 256).unwrap();
    // The pairing covers every part of w1, so W is an isometry.
    assert!((image.norm() - 1.0).abs() < 1e-9, "{}", image.norm());
    let t = 2000;
    let nu1 = velocity_distribution(&evolve(&w1, &xi, t).unwrap(), t).unwrap();
    let nu2 = velocity_distribution(&evolve(&w2, &image.normalized(), t).unwrap(), t).unwrap();
    let k = kolmogorov_distance(&nu1, &nu2).unwrap();
    assert!(k <= 0.05, "{k}");
}
