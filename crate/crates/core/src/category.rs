//! Model walks, intertwiners and similarity between 1-D walks.
//!
//! A model walk `(λ, p)` is multiplication by `λ` on square-integrable
//! functions on the circle of length `p`. Every 1-D walk is similar to a
//! direct sum of model walks, one per eigenvalue branch, and a model walk
//! at a period `p = m·q` with `q` minimal splits into `m` copies of `(λ, q)`.
//! Two non-constant models at their minimal periods admit a nonzero uniform
//! intertwiner exactly when `λ₂(k) = λ₁(k − l)` for some shift `l`, and then
//! every uniform intertwiner is `M[f]·σ_l` with `f` continuous.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{step, StateVector};
use crate::error::{QwError, Result};
use crate::spectral::{self, state_to_wavenumber, wavenumber_to_state, EigenvalueFunction, FrameEntry, SpectrumDecomposition, DEFAULT_GRID};
use crate::symbol::WalkDefinition;

/// Sup-norm tolerance for `λ₂(k) = λ₁(k − l)`.
pub const TRANSLATION_TOLERANCE: f64 = 1e-7;

/// Offsets tried by the coarse cross-correlation search.
pub const SEARCH_POINTS: usize = 4096;

/// Two periods (or two constants) closer than this are equal.
const MATCH_TOLERANCE: f64 = 1e-9;

/// `(λ, p)`: multiplication by `λ` on the circle of length `p`.
#[derive(Clone, Debug)]
pub struct ModelWalk {
    lambda: Arc<EigenvalueFunction>,
    period: f64,
    branch: usize,
    copy: usize,
}

impl ModelWalk {
    /// `p` must be a multiple of the minimal period of `λ` (any positive `p` for constants).
    pub fn new(lambda: Arc<EigenvalueFunction>, period: f64) -> Result<Self> {
        Self::from_branch(lambda, period, 0, 0)
    }

    fn from_branch(lambda: Arc<EigenvalueFunction>, period: f64, branch: usize, copy: usize) -> Result<Self> {
        if !(period > 0.0) {
            return Err(QwError::InvalidArgument(format!("model period must be positive, got {period}")));
        }
        if !lambda.is_constant() {
            let ratio = period / lambda.minimal_period();
            if (ratio - ratio.round()).abs() > MATCH_TOLERANCE || ratio.round() < 1.0 {
                return Err(QwError::InvalidArgument(format!(
                    "{period} is not a period of an eigenvalue function with minimal period {}",
                    lambda.minimal_period()
                )));
            }
        }
        Ok(Self {
            lambda,
            period,
            branch,
            copy,
        })
    }

    pub fn lambda(&self) -> &Arc<EigenvalueFunction> {
        &self.lambda
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Index of the branch of the source walk this part comes from.
    pub fn branch(&self) -> usize {
        self.branch
    }

    /// Which of the copies produced by splitting the branch this is.
    pub fn copy(&self) -> usize {
        self.copy
    }

    pub fn is_constant(&self) -> bool {
        self.lambda.is_constant()
    }

    /// Non-constant with a period larger than the minimal one.
    pub fn is_splittable(&self) -> bool {
        !self.is_constant() && self.period > self.lambda.minimal_period() * (1.0 + MATCH_TOLERANCE)
    }

    /// Number of copies of `[0, 2π)` the model occupies, i.e. its share of `n`.
    pub fn weight(&self) -> f64 {
        self.period / (2.0 * PI)
    }
}

/// `(λ, m·q)` ↦ `m` copies of `(λ, q)`. Constants split into copies at `2π`.
pub fn split_model(m: &ModelWalk) -> Vec<ModelWalk> {
    let q = if m.is_constant() {
        2.0 * PI
    } else {
        m.lambda.minimal_period()
    };
    let copies = (m.period / q).round().max(1.0) as usize;
    if copies == 1 {
        return vec![m.clone()];
    }
    (0..copies)
        .map(|c| ModelWalk {
            lambda: m.lambda.clone(),
            period: q,
            branch: m.branch,
            copy: m.copy * copies + c,
        })
        .collect()
}

/// A walk written as a direct sum of model walks at minimal periods.
#[derive(Clone, Debug)]
pub struct Decomposition {
    spectrum: Arc<SpectrumDecomposition>,
    parts: Vec<ModelWalk>,
}

impl Decomposition {
    pub fn spectrum(&self) -> &SpectrumDecomposition {
        &self.spectrum
    }

    pub fn parts(&self) -> &[ModelWalk] {
        &self.parts
    }

    pub fn walk(&self) -> &WalkDefinition {
        self.spectrum.walk()
    }

    /// Unit eigenvectors realizing part `i`, sampled along its source branch.
    pub fn section_samples(&self, i: usize) -> &[DVector<Complex64>] {
        self.spectrum.sections(self.parts[i].branch)
    }

    /// `Σ p_i / 2π`, which equals the degree `n` of the walk.
    pub fn total_weight(&self) -> f64 {
        self.parts.iter().map(ModelWalk::weight).sum()
    }
}

pub fn decompose(w: &WalkDefinition) -> Result<Decomposition> {
    decompose_with_grid(w, DEFAULT_GRID)
}

pub fn decompose_with_grid(w: &WalkDefinition, grid: usize) -> Result<Decomposition> {
    Ok(decompose_spectrum(Arc::new(spectral::track_branches(w, grid)?)))
}

pub fn decompose_spectrum(spectrum: Arc<SpectrumDecomposition>) -> Decomposition {
    let parts = spectrum
        .branches()
        .iter()
        .enumerate()
        .flat_map(|(b, f)| {
            let whole = ModelWalk {
                lambda: f.clone(),
                period: f.period(),
                branch: b,
                copy: 0,
            };
            split_model(&whole)
        })
        .collect();
    Decomposition { spectrum, parts }
}

/// Fourier coefficients of a non-constant `λ` re-expressed on its minimal period.
fn minimal_coefficients(f: &EigenvalueFunction) -> Vec<(i64, Complex64)> {
    let m = (f.period() / f.minimal_period()).round() as i64;
    f.fourier()
        .coefficients()
        .iter()
        .filter(|(freq, _)| freq % m == 0)
        .map(|(freq, c)| (freq / m, *c))
        .collect()
}

/// `sup_k |λ₂(k) − λ₁(k − l)|` over the sample grid of `λ₂`.
pub fn translation_error(l1: &EigenvalueFunction, l2: &EigenvalueFunction, l: f64) -> f64 {
    (0..l2.len())
        .map(|i| (l2.samples()[i] - l1.value_at(l2.grid_point(i) - l)).norm())
        .fold(0.0, f64::max)
}

/// Shift `l ∈ [0, q)` with `λ₂(k) = λ₁(k − l)`, if one exists.
pub fn translation_shift(l1: &EigenvalueFunction, l2: &EigenvalueFunction) -> Option<f64> {
    if l1.is_constant() || l2.is_constant() {
        return None;
    }
    let q = l1.minimal_period();
    if (q - l2.minimal_period()).abs() > MATCH_TOLERANCE * q {
        return None;
    }
    let a = minimal_coefficients(l1);
    let b = minimal_coefficients(l2);
    // G(l) = Re Σ_ω b_ω conj(a_ω) e^{iωl} peaks at the true shift, where b_ω = a_ω e^{−iωl}.
    let cross: Vec<(f64, Complex64)> = b
        .iter()
        .filter_map(|(f, bc)| {
            a.iter()
                .find(|(g, _)| g == f)
                .map(|(_, ac)| (2.0 * PI * *f as f64 / q, bc * ac.conj()))
        })
        .collect();
    if cross.is_empty() {
        return None;
    }
    let eval = |l: f64, order: u32| -> f64 {
        cross
            .iter()
            .map(|(w, c)| (c * Complex64::new(0.0, *w).powu(order) * Complex64::from_polar(1.0, w * l)).re)
            .sum()
    };
    let h = q / SEARCH_POINTS as f64;
    let coarse: Vec<f64> = (0..SEARCH_POINTS).map(|i| eval(i as f64 * h, 0)).collect();
    let mut peaks: Vec<usize> = (0..SEARCH_POINTS)
        .filter(|&i| {
            let prev = coarse[(i + SEARCH_POINTS - 1) % SEARCH_POINTS];
            let next = coarse[(i + 1) % SEARCH_POINTS];
            coarse[i] >= prev && coarse[i] >= next
        })
        .collect();
    peaks.sort_by(|&i, &j| coarse[j].total_cmp(&coarse[i]));
    for &i in peaks.iter().take(4) {
        let l = refine_peak(&eval, (i as f64 - 1.0) * h, (i as f64 + 1.0) * h);
        if translation_error(l1, l2, l) <= TRANSLATION_TOLERANCE {
            let l = l.rem_euclid(q);
            return Some(if q - l < 1e-12 { 0.0 } else { l });
        }
    }
    None
}

/// Golden-section search on `[lo, hi]` followed by Newton steps on `G′ = 0`.
fn refine_peak(g: &impl Fn(f64, u32) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut g1, mut g2) = (g(x1, 0), g(x2, 0));
    for _ in 0..60 {
        if g1 < g2 {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + ratio * (hi - lo);
            g2 = g(x2, 0);
        } else {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - ratio * (hi - lo);
            g1 = g(x1, 0);
        }
    }
    let mut l = 0.5 * (lo + hi);
    for _ in 0..4 {
        let curvature = g(l, 2);
        if curvature >= 0.0 {
            break;
        }
        l -= g(l, 1) / curvature;
    }
    l
}

/// Uniform intertwiners between two model walks at minimal periods.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum IntertwinerDescriptor {
    None,
    /// Every uniform intertwiner is `M[f]·σ_l`; `shift` is defined modulo `period`.
    Translation { shift: f64, period: f64 },
}

impl IntertwinerDescriptor {
    pub fn exists(&self) -> bool {
        matches!(self, Self::Translation { .. })
    }

    pub fn shift(&self) -> Option<f64> {
        match self {
            Self::Translation { shift, .. } => Some(*shift),
            Self::None => None,
        }
    }

    pub fn family_note(&self) -> String {
        match self {
            Self::None => "only the zero operator".into(),
            Self::Translation { shift, period } => {
                format!("M[f]·σ_l with l = {shift} (mod {period}) and f continuous on the circle of length {period}")
            }
        }
    }
}

pub fn intertwiner_space(m1: &ModelWalk, m2: &ModelWalk) -> IntertwinerDescriptor {
    if (m1.period - m2.period).abs() > MATCH_TOLERANCE * m1.period {
        return IntertwinerDescriptor::None;
    }
    match (m1.lambda.constant_value(), m2.lambda.constant_value()) {
        (Some(a), Some(b)) if (a - b).norm() <= MATCH_TOLERANCE => IntertwinerDescriptor::Translation {
            shift: 0.0,
            period: m1.period,
        },
        (None, None) => match translation_shift(&m1.lambda, &m2.lambda) {
            Some(shift) => IntertwinerDescriptor::Translation {
                shift,
                period: m1.period,
            },
            None => IntertwinerDescriptor::None,
        },
        _ => IntertwinerDescriptor::None,
    }
}

/// A part of the first walk matched to a part of the second.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartPairing {
    pub left: usize,
    pub right: usize,
    pub shift: f64,
}

/// Every pair of parts admitting a nonzero uniform intertwiner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntertwinerReport {
    pub exists: bool,
    pub pairings: Vec<PartPairing>,
}

fn all_pairings(d1: &Decomposition, d2: &Decomposition) -> Vec<PartPairing> {
    let mut out = Vec::new();
    for (i, m1) in d1.parts.iter().enumerate() {
        for (j, m2) in d2.parts.iter().enumerate() {
            if let Some(shift) = intertwiner_space(m1, m2).shift() {
                out.push(PartPairing { left: i, right: j, shift });
            }
        }
    }
    out
}

pub fn uniform_intertwiners(d1: &Decomposition, d2: &Decomposition) -> IntertwinerReport {
    let pairings = all_pairings(d1, d2);
    IntertwinerReport {
        exists: !pairings.is_empty(),
        pairings,
    }
}

pub fn has_uniform_intertwiner(w1: &WalkDefinition, w2: &WalkDefinition) -> Result<IntertwinerReport> {
    Ok(uniform_intertwiners(&decompose(w1)?, &decompose(w2)?))
}

pub fn is_indecomposable(w: &WalkDefinition) -> Result<bool> {
    Ok(decomposition_is_indecomposable(&decompose(w)?))
}

pub fn decomposition_is_indecomposable(d: &Decomposition) -> bool {
    d.parts.len() == 1 && (!d.parts[0].is_constant() || d.walk().degree() == 1)
}

/// A maximal set of disjoint part pairings. Translation equivalence is
/// transitive, so pairing greedily inside each equivalence class is optimal;
/// parts are taken in branch order so copies of one branch stay together.
pub fn common_divisor_pairing(d1: &Decomposition, d2: &Decomposition) -> Vec<PartPairing> {
    let all = all_pairings(d1, d2);
    let mut used_left = vec![false; d1.parts.len()];
    let mut used_right = vec![false; d2.parts.len()];
    let mut out = Vec::new();
    for p in all {
        if !used_left[p.left] && !used_right[p.right] {
            used_left[p.left] = true;
            used_right[p.right] = true;
            out.push(p);
        }
    }
    out
}

/// Largest family of model walks embeddable isometrically in both walks.
pub fn common_divisor(d1: &Decomposition, d2: &Decomposition) -> Vec<ModelWalk> {
    common_divisor_pairing(d1, d2)
        .into_iter()
        .map(|p| d1.parts[p.left].clone())
        .collect()
}

/// Settings for materializing an intertwiner on a finite window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub window: usize,
    pub states: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            window: 256,
            states: 20,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub verdict: bool,
    pub pairing: Vec<PartPairing>,
    /// Intertwining residual of the witness, when one exists.
    pub defect: Option<f64>,
}

/// Similar iff the parts can be matched one-to-one up to translation.
pub fn similarity(d1: &Decomposition, d2: &Decomposition, cfg: &VerifyConfig) -> Result<SimilarityReport> {
    let pairing = common_divisor_pairing(d1, d2);
    let verdict = pairing.len() == d1.parts.len() && pairing.len() == d2.parts.len();
    let defect = if verdict {
        Some(verify_intertwiner(&pairing, d1, d2, cfg)?)
    } else {
        None
    };
    Ok(SimilarityReport {
        verdict,
        pairing,
        defect,
    })
}

/// Branch-level piece of a materialized intertwiner.
struct BranchMap {
    left: usize,
    right: usize,
    shift: f64,
    sheets: usize,
}

fn branch_maps(pairing: &[PartPairing], d1: &Decomposition, d2: &Decomposition) -> Result<Vec<BranchMap>> {
    let mut maps: Vec<BranchMap> = Vec::new();
    for p in pairing {
        let (m1, m2) = (
            d1.parts.get(p.left).ok_or_else(|| bad_pairing(p))?,
            d2.parts.get(p.right).ok_or_else(|| bad_pairing(p))?,
        );
        let (b1, b2) = (m1.branch, m2.branch);
        if maps.iter().any(|m| m.left == b1 && m.right == b2) {
            continue;
        }
        let (f1, f2) = (d1.spectrum.branch(b1), d2.spectrum.branch(b2));
        if (f1.period() - f2.period()).abs() > MATCH_TOLERANCE * f1.period() {
            return Err(QwError::InvalidArgument(format!(
                "parts {} and {} come from branches of different periods and cannot be paired branch by branch",
                p.left, p.right
            )));
        }
        maps.push(BranchMap {
            left: b1,
            right: b2,
            shift: p.shift,
            sheets: f1.sheets(),
        });
    }
    Ok(maps)
}

fn bad_pairing(p: &PartPairing) -> QwError {
    QwError::InvalidArgument(format!("pairing ({}, {}) refers to a missing part", p.left, p.right))
}

/// `max ‖W U₁ ξ − U₂ W ξ‖` over seeded random unit states, with
/// `W = (sections of w₂) ∘ σ_l ∘ (sections of w₁)*` on each paired branch.
pub fn verify_intertwiner(pairing: &[PartPairing], d1: &Decomposition, d2: &Decomposition, cfg: &VerifyConfig) -> Result<f64> {
    verify_intertwiner_with_multiplier(pairing, d1, d2, cfg, &|_, _| Complex64::new(1.0, 0.0))
}

/// As [`verify_intertwiner`] for `W = M[f]·σ_l`; `f(pair, κ)` multiplies the
/// image of pair number `pair` at wavenumber `κ`.
pub fn verify_intertwiner_with_multiplier(
    pairing: &[PartPairing],
    d1: &Decomposition,
    d2: &Decomposition,
    cfg: &VerifyConfig,
    f: &(dyn Fn(usize, f64) -> Complex64 + Sync),
) -> Result<f64> {
    let (w1, w2) = (d1.walk(), d2.walk());
    let radius = (w1.propagation_radius() + w2.propagation_radius()) as usize;
    let n = cfg.window;
    if n < 8 * (radius + 1) || n < 16 {
        return Err(QwError::WindowTooSmall {
            window: n,
            reason: format!("need at least {} sites for walks of combined radius {radius}", (8 * (radius + 1)).max(16)),
        });
    }
    let w = Materialized::new(pairing, d1, d2, n)?;
    let symbols: Vec<_> = w.ks.iter().map(|&k| w2.evaluate_symbol(&[k])).collect();
    let half = (n / 8) as i64;
    let states: Vec<StateVector> = (0..cfg.states)
        .map(|s| random_state(w1.degree(), -half, half, cfg.seed, s as u64))
        .collect::<Result<_>>()?;
    let defects: Vec<f64> = states
        .par_iter()
        .map(|xi| -> Result<f64> {
            let lhs = w.apply_hat(&step(w1, xi)?, f)?;
            let w_xi = w.apply_hat(xi, f)?;
            let sq: f64 = (0..n).map(|j| (&lhs[j] - &symbols[j] * &w_xi[j]).norm_squared()).sum();
            Ok((sq / n as f64).sqrt())
        })
        .collect::<Result<_>>()?;
    Ok(defects.into_iter().fold(0.0, f64::max))
}

/// `W ξ` as a lattice state, computed on a periodic window of `window` sites
/// centred on the support of `ξ`. Amplitudes below `1e-12` are dropped.
pub fn apply_intertwiner(
    pairing: &[PartPairing],
    d1: &Decomposition,
    d2: &Decomposition,
    xi: &StateVector,
    window: usize,
) -> Result<StateVector> {
    if xi.dim() != 1 || xi.degree() != d1.walk().degree() {
        return Err(QwError::DimensionMismatch(format!(
            "state has d = {}, n = {} but the source walk has d = 1, n = {}",
            xi.dim(),
            xi.degree(),
            d1.walk().degree()
        )));
    }
    let Some(bounds) = xi.support_bounds() else {
        return Ok(StateVector::zeros(1, d2.walk().degree()));
    };
    let (lo, hi) = bounds[0];
    if 2 * (hi - lo + 1) as usize > window {
        return Err(QwError::WindowTooSmall {
            window,
            reason: format!("state support spans {} sites, more than half the window", hi - lo + 1),
        });
    }
    let w = Materialized::new(pairing, d1, d2, window)?;
    let values = w.apply_hat(xi, &|_, _| Complex64::new(1.0, 0.0))?;
    wavenumber_to_state(&values, (lo + hi) / 2 - window as i64 / 2, 1e-12)
}

/// Frames of both walks on a `k`-grid, ready to apply `W = M[f]·σ_l` branch by branch.
struct Materialized {
    maps: Vec<BranchMap>,
    ks: Vec<f64>,
    left_frames: Vec<Vec<Vec<FrameEntry>>>,
    right_frames: Vec<Vec<FrameEntry>>,
    degree: usize,
}

impl Materialized {
    fn new(pairing: &[PartPairing], d1: &Decomposition, d2: &Decomposition, n: usize) -> Result<Self> {
        let maps = branch_maps(pairing, d1, d2)?;
        let ks: Vec<f64> = (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect();
        let right_frames = ks.par_iter().map(|&k| d2.spectrum.frame_at(k)).collect::<Result<_>>()?;
        let left_frames = maps
            .iter()
            .map(|m| ks.par_iter().map(|&k| d1.spectrum.frame_at(k - m.shift)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        Ok(Self {
            maps,
            ks,
            left_frames,
            right_frames,
            degree: d2.walk().degree(),
        })
    }

    /// `(W ξ)^` on the grid.
    fn apply_hat(&self, xi: &StateVector, f: &(dyn Fn(usize, f64) -> Complex64 + Sync)) -> Result<Vec<DVector<Complex64>>> {
        let n = self.ks.len();
        let mut out = vec![DVector::<Complex64>::zeros(self.degree); n];
        for (mi, m) in self.maps.iter().enumerate() {
            let shifted = state_to_wavenumber(&modulate(xi, -m.shift)?, n)?;
            for j in 0..n {
                let turn = ((self.ks[j] - m.shift) / (2.0 * PI)).floor() as i64;
                for sheet in 0..m.sheets {
                    let kappa = self.ks[j] + 2.0 * PI * sheet as f64;
                    let src_sheet = (sheet as i64 + turn).rem_euclid(m.sheets as i64) as usize;
                    let v1 = &self.left_frames[mi][j]
                        .iter()
                        .find(|e| e.branch == m.left && e.sheet == src_sheet)
                        .expect("frame covers every sheet")
                        .vector;
                    let v2 = &self.right_frames[j]
                        .iter()
                        .find(|e| e.branch == m.right && e.sheet == sheet)
                        .expect("frame covers every sheet")
                        .vector;
                    out[j] += v2 * (f(mi, kappa) * v1.dotc(&shifted[j]));
                }
            }
        }
        Ok(out)
    }
}

/// `ξ(x) ↦ e^{iθx} ξ(x)`, so that the transform moves from `k` to `k + θ`.
fn modulate(xi: &StateVector, theta: f64) -> Result<StateVector> {
    StateVector::from_amplitudes(
        1,
        xi.degree(),
        xi.iter().map(|(x, j, a)| {
            let phase = Complex64::from_polar(1.0, theta * x[0] as f64);
            (x, j, a * phase)
        }),
    )
}

/// Unit state with independent Gaussian amplitudes on `lo ..= hi`.
pub fn random_state(n: usize, lo: i64, hi: i64, seed: u64, stream: u64) -> Result<StateVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut entries = Vec::new();
    for x in lo..=hi {
        for j in 0..n {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            entries.push((vec![x], j, Complex64::new(re, im)));
        }
    }
    Ok(StateVector::from_amplitudes(1, n, entries)?.normalized())
}
