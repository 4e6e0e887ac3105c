//! Time evolution of finitely supported states and the position and velocity
//! distributions they induce.
//!
//! Evolution is a sparse convolution of the state with the symbol
//! coefficients, which is exact for Laurent walks: after `t` steps the state
//! occupies a box that has grown by `t` times the per-axis shift extent.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QwError, Result};
use crate::symbol::WalkDefinition;

/// Normalization tolerance for distribution operations.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Largest order accepted by [`moments`].
pub const MAX_MOMENT_ORDER: usize = 8;

/// A finitely supported amplitude field on `Z^d × {0..n}`.
///
/// Amplitudes are stored densely on a bounding box; sites are laid out
/// row-major with axis 0 slowest, the internal index fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    d: usize,
    n: usize,
    origin: Vec<i64>,
    shape: Vec<usize>,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zeros(d: usize, n: usize) -> Self {
        Self {
            d,
            n,
            origin: vec![0; d],
            shape: vec![0; d],
            amps: Vec::new(),
        }
    }

    /// `δ_site ⊗ e_component`.
    pub fn delta(d: usize, n: usize, site: &[i64], component: usize) -> Result<Self> {
        Self::from_amplitudes(d, n, [(site.to_vec(), component, Complex64::new(1.0, 0.0))])
    }

    /// Collects `(site, component, amplitude)` triples; repeated keys add up.
    pub fn from_amplitudes<I>(d: usize, n: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<i64>, usize, Complex64)>,
    {
        if d == 0 || n == 0 {
            return Err(QwError::Schema(format!("d and n must be positive (d = {d}, n = {n})")));
        }
        let entries: Vec<_> = entries.into_iter().collect();
        if entries.is_empty() {
            return Ok(Self::zeros(d, n));
        }
        let mut lo = vec![i64::MAX; d];
        let mut hi = vec![i64::MIN; d];
        for (site, comp, amp) in &entries {
            if site.len() != d {
                return Err(QwError::DimensionMismatch(format!(
                    "site {site:?} has length {} but d = {d}",
                    site.len()
                )));
            }
            if *comp >= n {
                return Err(QwError::DimensionMismatch(format!("component {comp} out of range for n = {n}")));
            }
            if !amp.re.is_finite() || !amp.im.is_finite() {
                return Err(QwError::Schema("non-finite amplitude".into()));
            }
            for a in 0..d {
                lo[a] = lo[a].min(site[a]);
                hi[a] = hi[a].max(site[a]);
            }
        }
        let shape: Vec<usize> = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1) as usize).collect();
        let mut state = Self {
            d,
            n,
            origin: lo,
            amps: vec![Complex64::default(); shape.iter().product::<usize>() * n],
            shape,
        };
        for (site, comp, amp) in entries {
            let idx = state.flat_site(&site).expect("site inside bounding box");
            state.amps[idx * n + comp] += amp;
        }
        Ok(state.trimmed(0.0))
    }

    /// Truncated Gaussian wave packet on `Z`, `ψ(x) ∝ exp(−(x−c)²/4σ² + ipx) · internal`,
    /// cut where the discarded tail mass is below `1e−8` and renormalized.
    pub fn gaussian_1d(center: f64, sigma: f64, momentum: f64, internal: &[Complex64]) -> Result<Self> {
        if !(sigma > 0.0) || internal.is_empty() {
            return Err(QwError::InvalidArgument("gaussian profile needs sigma > 0 and a non-empty internal vector".into()));
        }
        let radius = (6.5 * sigma).ceil() as i64 + 1;
        let c = center.round() as i64;
        let mut entries = Vec::new();
        for x in (c - radius)..=(c + radius) {
            let dx = x as f64 - center;
            let env = (-dx * dx / (4.0 * sigma * sigma)).exp();
            let phase = Complex64::from_polar(env, momentum * x as f64);
            for (j, v) in internal.iter().enumerate() {
                entries.push((vec![x], j, phase * v));
            }
        }
        let s = Self::from_amplitudes(1, internal.len(), entries)?;
        Ok(s.normalized())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    /// Lower corner and extent of the storage box.
    pub fn bounding_box(&self) -> (&[i64], &[usize]) {
        (&self.origin, &self.shape)
    }

    fn site_count(&self) -> usize {
        self.shape.iter().product()
    }

    fn flat_site(&self, site: &[i64]) -> Option<usize> {
        let mut flat = 0usize;
        for a in 0..self.d {
            let off = site[a] - self.origin[a];
            if off < 0 || off as usize >= self.shape[a] {
                return None;
            }
            flat = flat * self.shape[a] + off as usize;
        }
        Some(flat)
    }

    fn site_of(&self, mut flat: usize) -> Vec<i64> {
        let mut site = vec![0; self.d];
        for a in (0..self.d).rev() {
            site[a] = self.origin[a] + (flat % self.shape[a]) as i64;
            flat /= self.shape[a];
        }
        site
    }

    pub fn get(&self, site: &[i64], component: usize) -> Complex64 {
        if self.is_empty() || site.len() != self.d || component >= self.n {
            return Complex64::default();
        }
        self.flat_site(site)
            .map(|f| self.amps[f * self.n + component])
            .unwrap_or_default()
    }

    /// Nonzero amplitudes as `(site, component, amplitude)`.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<i64>, usize, Complex64)> + '_ {
        self.amps
            .chunks(self.n)
            .enumerate()
            .flat_map(move |(s, chunk)| {
                chunk
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| **a != Complex64::default())
                    .map(move |(j, a)| (self.site_of(s), j, *a))
            })
    }

    /// `(site, Σ_j |ξ(site, j)|²)` for every site in the box.
    pub fn site_masses(&self) -> impl Iterator<Item = (Vec<i64>, f64)> + '_ {
        self.amps
            .chunks(self.n)
            .enumerate()
            .map(move |(s, chunk)| (self.site_of(s), chunk.iter().map(|a| a.norm_sqr()).sum()))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(mut self) -> Self {
        let norm = self.norm();
        if norm > 0.0 {
            for a in &mut self.amps {
                *a /= norm;
            }
        }
        self
    }

    /// Per-axis `(min, max)` over sites carrying a nonzero amplitude.
    pub fn support_bounds(&self) -> Option<Vec<(i64, i64)>> {
        let mut bounds: Option<Vec<(i64, i64)>> = None;
        for (s, chunk) in self.amps.chunks(self.n).enumerate() {
            if chunk.iter().all(|a| *a == Complex64::default()) {
                continue;
            }
            let site = self.site_of(s);
            let b = bounds.get_or_insert_with(|| site.iter().map(|&x| (x, x)).collect());
            for (e, &x) in b.iter_mut().zip(&site) {
                e.0 = e.0.min(x);
                e.1 = e.1.max(x);
            }
        }
        bounds
    }

    /// Zeroes amplitudes with modulus at most `threshold` and shrinks the box
    /// to the remaining support.
    pub fn trimmed(&self, threshold: f64) -> Self {
        let kept: Vec<_> = self
            .amps
            .chunks(self.n)
            .enumerate()
            .flat_map(|(s, chunk)| {
                chunk
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| a.norm() > threshold)
                    .map(move |(j, a)| (s, j, *a))
            })
            .collect();
        if kept.is_empty() {
            return Self::zeros(self.d, self.n);
        }
        let mut lo = vec![i64::MAX; self.d];
        let mut hi = vec![i64::MIN; self.d];
        for &(s, _, _) in &kept {
            for (a, x) in self.site_of(s).into_iter().enumerate() {
                lo[a] = lo[a].min(x);
                hi[a] = hi[a].max(x);
            }
        }
        let shape: Vec<usize> = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1) as usize).collect();
        let mut out = Self {
            d: self.d,
            n: self.n,
            origin: lo,
            amps: vec![Complex64::default(); shape.iter().product::<usize>() * self.n],
            shape,
        };
        for (s, j, a) in kept {
            let idx = out.flat_site(&self.site_of(s)).expect("inside trimmed box");
            out.amps[idx * self.n + j] = a;
        }
        out
    }

    /// Inner product `⟨self, other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.iter()
            .map(|(site, j, a)| a.conj() * other.get(&site, j))
            .sum()
    }

    /// `‖self − other‖`.
    pub fn distance(&self, other: &StateVector) -> f64 {
        let mut total = 0.0;
        for (site, j, a) in self.iter() {
            total += (a - other.get(&site, j)).norm_sqr();
        }
        for (site, j, b) in other.iter() {
            if self.get(&site, j) == Complex64::default() {
                total += b.norm_sqr();
            }
        }
        total.sqrt()
    }

    pub fn to_document(&self) -> StateDocument {
        StateDocument {
            d: self.d,
            n: self.n,
            amplitudes: self
                .iter()
                .map(|(site, component, a)| AmplitudeDocument {
                    site,
                    component,
                    re: a.re,
                    im: a.im,
                })
                .collect(),
        }
    }
}

/// On-disk form of a state; mirrors the walk document layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateDocument {
    pub d: usize,
    pub n: usize,
    pub amplitudes: Vec<AmplitudeDocument>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeDocument {
    pub site: Vec<i64>,
    pub component: usize,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl StateDocument {
    pub fn into_state(self) -> Result<StateVector> {
        StateVector::from_amplitudes(
            self.d,
            self.n,
            self.amplitudes
                .into_iter()
                .map(|a| (a.site, a.component, Complex64::new(a.re, a.im))),
        )
    }
}

pub fn parse_state(text: &str) -> Result<StateVector> {
    let doc: StateDocument = serde_json::from_str(text).map_err(|e| QwError::Schema(e.to_string()))?;
    doc.into_state()
}

fn check_shape(w: &WalkDefinition, xi: &StateVector) -> Result<()> {
    if w.dim() != xi.d || w.degree() != xi.n {
        return Err(QwError::DimensionMismatch(format!(
            "walk {} acts on d = {}, n = {} but the state has d = {}, n = {}",
            w.name(),
            w.dim(),
            w.degree(),
            xi.d,
            xi.n
        )));
    }
    Ok(())
}

/// One application of the walk: `(Uξ)(x, i) = Σ_j Σ_{c·S^s ∈ U_ij} c · ξ(x − s, j)`.
pub fn step(w: &WalkDefinition, xi: &StateVector) -> Result<StateVector> {
    check_shape(w, xi)?;
    if xi.is_empty() {
        return Ok(xi.clone());
    }
    let (d, n) = (xi.d, xi.n);
    let ext = w.shift_extents();
    let origin: Vec<i64> = xi.origin.iter().zip(&ext).map(|(o, e)| o + e.0).collect();
    let shape: Vec<usize> = xi
        .shape
        .iter()
        .zip(&ext)
        .map(|(s, e)| s + (e.1 - e.0) as usize)
        .collect();
    let mut strides = vec![1usize; d];
    for a in (0..d.saturating_sub(1)).rev() {
        strides[a] = strides[a + 1] * shape[a + 1];
    }
    let sites = xi.site_count();
    let base: Vec<usize> = (0..sites)
        .map(|mut flat| {
            let mut out = 0usize;
            for a in (0..d).rev() {
                let idx = flat % xi.shape[a];
                flat /= xi.shape[a];
                out += (idx as i64 - ext[a].0) as usize * strides[a];
            }
            out
        })
        .collect();
    let mut amps = vec![Complex64::default(); shape.iter().product::<usize>() * n];
    for i in 0..n {
        for j in 0..n {
            for (shift, &c) in w.entry(i, j).raw_terms() {
                let off: isize = shift.iter().zip(&strides).map(|(&s, &st)| s as isize * st as isize).sum();
                for (site, &b) in base.iter().enumerate() {
                    let a = xi.amps[site * n + j];
                    if a != Complex64::default() {
                        amps[(b as isize + off) as usize * n + i] += c * a;
                    }
                }
            }
        }
    }
    Ok(StateVector { d, n, origin, shape, amps })
}

/// `U^t ξ`.
pub fn evolve(w: &WalkDefinition, xi: &StateVector, t: u64) -> Result<StateVector> {
    check_shape(w, xi)?;
    let mut state = xi.clone();
    for _ in 0..t {
        state = step(w, &state)?;
    }
    Ok(state)
}

/// Factors `V₁, …, V_p` applied cyclically, `V₁` first.
#[derive(Clone, Debug)]
pub struct PeriodicSchedule {
    factors: Vec<WalkDefinition>,
}

impl PeriodicSchedule {
    pub fn new(factors: Vec<WalkDefinition>) -> Result<Self> {
        let first = factors
            .first()
            .ok_or_else(|| QwError::InvalidArgument("a periodic schedule needs at least one factor".into()))?;
        let (d, n) = (first.dim(), first.degree());
        if let Some(bad) = factors.iter().find(|f| f.dim() != d || f.degree() != n) {
            return Err(QwError::DimensionMismatch(format!(
                "factor {} has (d, n) = ({}, {}), expected ({d}, {n})",
                bad.name(),
                bad.dim(),
                bad.degree()
            )));
        }
        Ok(Self { factors })
    }

    pub fn period(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[WalkDefinition] {
        &self.factors
    }
}

/// `V_t V_{t−1} ⋯ V₁ ξ` with `V_{i+p} = V_i`.
pub fn periodic_evolve(sched: &PeriodicSchedule, xi: &StateVector, t: u64) -> Result<StateVector> {
    check_shape(&sched.factors[0], xi)?;
    let mut state = xi.clone();
    for s in 0..t as usize {
        state = step(&sched.factors[s % sched.period()], &state)?;
    }
    Ok(state)
}

/// A finite collection of weighted points in `R^d`.
pub trait Atoms {
    fn dim(&self) -> usize;
    fn atoms(&self) -> Vec<(Vec<f64>, f64)>;

    fn total_mass(&self) -> f64 {
        self.atoms().iter().map(|(_, m)| m).sum()
    }
}

/// Position measure `μ_ξ` on `Z^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositionDistribution {
    pub d: usize,
    pub masses: BTreeMap<Vec<i64>, f64>,
}

impl Atoms for PositionDistribution {
    fn dim(&self) -> usize {
        self.d
    }

    fn atoms(&self) -> Vec<(Vec<f64>, f64)> {
        self.masses
            .iter()
            .map(|(x, m)| (x.iter().map(|&v| v as f64).collect(), *m))
            .collect()
    }
}

/// Velocity measure `ν_{U,t,ξ}`: the position measure of `U^t ξ` rescaled by `1/t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VelocityDistribution {
    pub d: usize,
    pub t: u64,
    /// Atoms `(x / t, μ({x}))`, sorted by position.
    pub atoms: Vec<(Vec<f64>, f64)>,
}

impl Atoms for VelocityDistribution {
    fn dim(&self) -> usize {
        self.d
    }

    fn atoms(&self) -> Vec<(Vec<f64>, f64)> {
        self.atoms.clone()
    }
}

fn require_unit(xi: &StateVector) -> Result<()> {
    let norm = xi.norm();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(QwError::NotNormalized(norm));
    }
    Ok(())
}

/// `μ_ξ({x}) = Σ_j |ξ(x, j)|²`, zero-mass sites omitted.
pub fn position_distribution(xi: &StateVector) -> Result<PositionDistribution> {
    require_unit(xi)?;
    let masses = xi.site_masses().filter(|(_, m)| *m > 0.0).collect();
    Ok(PositionDistribution { d: xi.d, masses })
}

/// `ν_{U,t,ξ}` from the already evolved state `U^t ξ`.
pub fn velocity_distribution(evolved: &StateVector, t: u64) -> Result<VelocityDistribution> {
    if t == 0 {
        return Err(QwError::InvalidArgument("velocity distribution needs t > 0".into()));
    }
    let mu = position_distribution(evolved)?;
    let atoms = mu
        .masses
        .into_iter()
        .map(|(x, m)| (x.iter().map(|&v| v as f64 / t as f64).collect(), m))
        .collect();
    Ok(VelocityDistribution { d: evolved.d, t, atoms })
}

/// `∫ exp(i v·k) dν(v)`.
pub fn characteristic_function(nu: &impl Atoms, k: &[f64]) -> Complex64 {
    nu.atoms()
        .iter()
        .map(|(v, m)| {
            let phase: f64 = v.iter().zip(k).map(|(a, b)| a * b).sum();
            Complex64::from_polar(*m, phase)
        })
        .sum()
}

/// Per-axis moments of a finite measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub order: usize,
    pub mass: f64,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    /// `raw[a][r] = ∫ v_a^r dν` for `r = 0..=order`.
    pub raw: Vec<Vec<f64>>,
}

pub fn moments(dist: &impl Atoms, order: usize) -> Result<MomentReport> {
    if order > MAX_MOMENT_ORDER {
        return Err(QwError::InvalidArgument(format!(
            "moment order {order} exceeds {MAX_MOMENT_ORDER}"
        )));
    }
    let d = dist.dim();
    let atoms = dist.atoms();
    let mass: f64 = atoms.iter().map(|(_, m)| m).sum();
    let mut raw = vec![vec![0.0; order + 1]; d];
    let mut first = vec![0.0; d];
    let mut second = vec![0.0; d];
    for (v, m) in &atoms {
        for a in 0..d {
            let mut p = 1.0;
            for r in raw[a].iter_mut() {
                *r += m * p;
                p *= v[a];
            }
            first[a] += m * v[a];
            second[a] += m * v[a] * v[a];
        }
    }
    let mean: Vec<f64> = first.iter().map(|f| f / mass).collect();
    let variance = second
        .iter()
        .zip(&mean)
        .map(|(s, mu)| (s / mass - mu * mu).max(0.0))
        .collect();
    Ok(MomentReport {
        order,
        mass,
        mean,
        variance,
        raw,
    })
}

/// Sup-distance between the distribution functions of two measures on `R`.
pub fn kolmogorov_distance(a: &impl Atoms, b: &impl Atoms) -> Result<f64> {
    if a.dim() != 1 || b.dim() != 1 {
        return Err(QwError::UnsupportedDimension(a.dim().max(b.dim())));
    }
    let mut merged: Vec<(f64, f64)> = a
        .atoms()
        .into_iter()
        .map(|(v, m)| (v[0], m))
        .chain(b.atoms().into_iter().map(|(v, m)| (v[0], -m)))
        .collect();
    merged.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut diff = 0.0_f64;
    let mut worst = 0.0_f64;
    let mut i = 0;
    while i < merged.len() {
        let v = merged[i].0;
        while i < merged.len() && merged[i].0 == v {
            diff += merged[i].1;
            i += 1;
        }
        worst = worst.max(diff.abs());
    }
    Ok(worst)
}

/// Mass of atoms with some coordinate outside `[−half_width, half_width]`.
pub fn mass_outside(dist: &impl Atoms, half_width: f64) -> f64 {
    dist.atoms()
        .iter()
        .filter(|(v, _)| v.iter().any(|x| x.abs() > half_width))
        .map(|(_, m)| m)
        .sum()
}
