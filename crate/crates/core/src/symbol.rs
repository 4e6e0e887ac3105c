//! Walks as matrices of Laurent polynomials in the lattice shifts.
//!
//! Entry `(i, j)` of a walk is a finite sum of terms `c · S^s`, where `S^s`
//! translates a vector on `Z^d` by the integer vector `s`. A term moves
//! amplitude from site `x` and internal state `j` to site `x + s` and internal
//! state `i`. In wavenumber space the same term contributes `c · exp(i s·k)`
//! to the symbol `Û(k)`, so the shift `S` evaluates to `exp(+ik)` throughout
//! this crate.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QwError, Result};

/// Largest tolerated `‖Û(k)Û(k)* − I‖_F` for a walk to count as unitary.
pub const UNITARITY_TOLERANCE: f64 = 1e-10;

/// Grid points per axis used when validating unitarity.
pub const VALIDATION_GRID: usize = 256;

/// Coefficients at or below this magnitude are treated as absent.
const ZERO_COEFF: f64 = 1e-15;

/// Complex n×n matrix used for symbols and eigen-decompositions.
pub type CMatrix = DMatrix<Complex64>;

/// A single monomial `coeff · S^shift`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaurentTerm {
    pub shift: Vec<i64>,
    pub coeff: Complex64,
}

/// A Laurent polynomial in `d` commuting shifts with complex coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LaurentPoly {
    terms: BTreeMap<Vec<i64>, Complex64>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(d: usize, c: impl Into<Complex64>) -> Self {
        Self::monomial(vec![0; d], c)
    }

    pub fn monomial(shift: Vec<i64>, c: impl Into<Complex64>) -> Self {
        Self::from_terms([(shift, c.into())])
    }

    /// Builds a polynomial, summing coefficients of repeated shifts and
    /// dropping zeros.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<i64>, Complex64)>,
    {
        let mut map: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
        for (shift, c) in terms {
            *map.entry(shift).or_default() += c;
        }
        map.retain(|_, c| c.norm() > ZERO_COEFF);
        Self { terms: map }
    }

    pub fn terms(&self) -> impl Iterator<Item = LaurentTerm> + '_ {
        self.terms.iter().map(|(s, c)| LaurentTerm {
            shift: s.clone(),
            coeff: *c,
        })
    }

    pub(crate) fn raw_terms(&self) -> impl Iterator<Item = (&Vec<i64>, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Σ c · exp(i s·k)`.
    pub fn evaluate(&self, k: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(s, c)| {
                let phase: f64 = s.iter().zip(k).map(|(&si, &ki)| si as f64 * ki).sum();
                c * Complex64::from_polar(1.0, phase)
            })
            .sum()
    }

    /// Largest `‖s‖_∞` over the terms; 0 for the zero polynomial.
    pub fn radius(&self) -> u64 {
        self.terms
            .keys()
            .flat_map(|s| s.iter().map(|v| v.unsigned_abs()))
            .max()
            .unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|s| s.iter().all(|&v| v == 0))
    }

    pub fn scale(&self, c: impl Into<Complex64>) -> Self {
        let c = c.into();
        Self::from_terms(self.terms.iter().map(|(s, v)| (s.clone(), v * c)))
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        LaurentPoly::from_terms(
            self.terms
                .iter()
                .chain(rhs.terms.iter())
                .map(|(s, c)| (s.clone(), *c)),
        )
    }
}

impl Add for LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: LaurentPoly) -> LaurentPoly {
        &self + &rhs
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        self.scale(-1.0)
    }
}

impl Sub for LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: LaurentPoly) -> LaurentPoly {
        &self + &(-&rhs)
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = Vec::with_capacity(self.len() * rhs.len());
        for (s1, c1) in &self.terms {
            for (s2, c2) in &rhs.terms {
                let s: Vec<i64> = s1.iter().zip(s2).map(|(a, b)| a + b).collect();
                out.push((s, c1 * c2));
            }
        }
        LaurentPoly::from_terms(out)
    }
}

impl Mul for LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: LaurentPoly) -> LaurentPoly {
        &self * &rhs
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(s, c)| format!("({:.6}{:+.6}i)S^{:?}", c.re, c.im, s))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Regularity of a walk. Declaration order is the implication order:
/// finite propagation implies analytic implies smooth implies uniform.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum RegularityClass {
    FinitePropagation { radius: u64 },
    Analytic,
    Smooth,
    Uniform,
}

impl RegularityClass {
    pub fn has_finite_propagation(&self) -> bool {
        matches!(self, Self::FinitePropagation { .. })
    }

    pub fn is_analytic(&self) -> bool {
        *self <= Self::Analytic
    }

    pub fn is_smooth(&self) -> bool {
        *self <= Self::Smooth
    }

    pub fn is_uniform(&self) -> bool {
        true
    }
}

/// A space-homogeneous walk on `Z^d ⊗ C^n` given by its Laurent symbol.
///
/// Values of this type have passed the unitarity gate, either at construction
/// or because they were assembled from validated walks.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkDefinition {
    name: String,
    d: usize,
    n: usize,
    entries: Vec<LaurentPoly>,
}

impl WalkDefinition {
    /// Validates shapes and unitarity of the symbol on a
    /// [`VALIDATION_GRID`]-per-axis grid.
    pub fn new(name: impl Into<String>, d: usize, n: usize, entries: Vec<LaurentPoly>) -> Result<Self> {
        let walk = Self::new_unchecked(name, d, n, entries)?;
        let (defect, k) = walk.unitarity_defect(VALIDATION_GRID);
        if defect > UNITARITY_TOLERANCE || !defect.is_finite() {
            return Err(QwError::NonUnitary { defect, k });
        }
        Ok(walk)
    }

    /// Checks shapes only. Used for walks assembled from validated parts.
    pub(crate) fn new_unchecked(
        name: impl Into<String>,
        d: usize,
        n: usize,
        entries: Vec<LaurentPoly>,
    ) -> Result<Self> {
        if d == 0 || n == 0 {
            return Err(QwError::Schema(format!("d and n must be positive (d = {d}, n = {n})")));
        }
        if entries.len() != n * n {
            return Err(QwError::Schema(format!(
                "expected {} entries for n = {n}, got {}",
                n * n,
                entries.len()
            )));
        }
        for p in &entries {
            if let Some(bad) = p.terms.keys().find(|s| s.len() != d) {
                return Err(QwError::Schema(format!(
                    "shift {bad:?} has length {} but d = {d}",
                    bad.len()
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            d,
            n,
            entries,
        })
    }

    /// Builds a walk from a row-major nested array of polynomials.
    pub fn from_rows(name: impl Into<String>, d: usize, rows: Vec<Vec<LaurentPoly>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(QwError::Schema("entry matrix is not square".into()));
        }
        Self::new(name, d, n, rows.into_iter().flatten().collect())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> &LaurentPoly {
        &self.entries[i * self.n + j]
    }

    /// `Û(k)[i][j] = Σ c · exp(i s·k)`.
    pub fn evaluate_symbol(&self, k: &[f64]) -> CMatrix {
        assert_eq!(k.len(), self.d, "wavenumber has wrong dimension");
        CMatrix::from_fn(self.n, self.n, |i, j| self.entry(i, j).evaluate(k))
    }

    /// Worst `‖Û(k)Û(k)* − I‖_F` over a uniform grid on `[0, 2π)^d`, together
    /// with the wavenumber where it occurs.
    pub fn unitarity_defect(&self, per_axis: usize) -> (f64, Vec<f64>) {
        let per_axis = effective_grid(self.d, per_axis);
        let total = per_axis.pow(self.d as u32);
        let eye = CMatrix::identity(self.n, self.n);
        let mut worst = (0.0_f64, vec![0.0; self.d]);
        let mut k = vec![0.0; self.d];
        for flat in 0..total {
            let mut rem = flat;
            for ka in k.iter_mut() {
                *ka = 2.0 * PI * (rem % per_axis) as f64 / per_axis as f64;
                rem /= per_axis;
            }
            let u = self.evaluate_symbol(&k);
            let defect = (&u * u.adjoint() - &eye).norm();
            if defect > worst.0 || defect.is_nan() {
                worst = (defect, k.clone());
                if defect.is_nan() {
                    break;
                }
            }
        }
        worst
    }

    /// Smallest `R` with every term shift in `[−R, R]^d`.
    pub fn propagation_radius(&self) -> u64 {
        self.entries.iter().map(LaurentPoly::radius).max().unwrap_or(0)
    }

    /// Per-axis minimum and maximum shift over all terms.
    pub fn shift_extents(&self) -> Vec<(i64, i64)> {
        let mut ext = vec![(0_i64, 0_i64); self.d];
        for p in &self.entries {
            for s in p.terms.keys() {
                for (e, &v) in ext.iter_mut().zip(s) {
                    e.0 = e.0.min(v);
                    e.1 = e.1.max(v);
                }
            }
        }
        ext
    }

    pub fn classify_regularity(&self) -> RegularityClass {
        RegularityClass::FinitePropagation {
            radius: self.propagation_radius(),
        }
    }

    /// Block-diagonal walk `self ⊕ other`.
    pub fn direct_sum(&self, other: &WalkDefinition) -> Result<WalkDefinition> {
        if self.d != other.d {
            return Err(QwError::DimensionMismatch(format!(
                "direct sum of walks with d = {} and d = {}",
                self.d, other.d
            )));
        }
        let n = self.n + other.n;
        let mut entries = vec![LaurentPoly::zero(); n * n];
        for i in 0..self.n {
            for j in 0..self.n {
                entries[i * n + j] = self.entry(i, j).clone();
            }
        }
        for i in 0..other.n {
            for j in 0..other.n {
                entries[(i + self.n) * n + j + self.n] = other.entry(i, j).clone();
            }
        }
        Self::new_unchecked(format!("{} ⊕ {}", self.name, other.name), self.d, n, entries)
    }

    pub fn to_document(&self) -> WalkDocument {
        WalkDocument {
            name: self.name.clone(),
            d: self.d,
            n: self.n,
            entries: (0..self.n)
                .map(|i| {
                    (0..self.n)
                        .map(|j| {
                            self.entry(i, j)
                                .terms()
                                .map(|t| TermDocument {
                                    shift: t.shift,
                                    re: t.coeff.re,
                                    im: t.coeff.im,
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("walk document serializes")
    }
}

fn effective_grid(d: usize, per_axis: usize) -> usize {
    // keep the total number of validation points bounded for d >= 3
    const MAX_POINTS: f64 = (1u64 << 20) as f64;
    if d <= 2 {
        per_axis
    } else {
        per_axis.min(MAX_POINTS.powf(1.0 / d as f64).floor() as usize).max(8)
    }
}

/// On-disk form of a walk: `entries[i][j]` lists the terms of entry `(i, j)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkDocument {
    #[serde(default)]
    pub name: String,
    pub d: usize,
    pub n: usize,
    pub entries: Vec<Vec<Vec<TermDocument>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermDocument {
    pub shift: Vec<i64>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl WalkDocument {
    pub fn into_walk(self) -> Result<WalkDefinition> {
        if self.entries.len() != self.n || self.entries.iter().any(|r| r.len() != self.n) {
            return Err(QwError::Schema(format!(
                "entries must be an {n}×{n} array",
                n = self.n
            )));
        }
        let d = self.d;
        let mut polys = Vec::with_capacity(self.n * self.n);
        for row in self.entries {
            for cell in row {
                let mut terms = Vec::with_capacity(cell.len());
                for t in cell {
                    if t.shift.len() != d {
                        return Err(QwError::Schema(format!(
                            "shift {:?} has length {} but d = {d}",
                            t.shift,
                            t.shift.len()
                        )));
                    }
                    if !t.re.is_finite() || !t.im.is_finite() {
                        return Err(QwError::Schema("non-finite coefficient".into()));
                    }
                    terms.push((t.shift, Complex64::new(t.re, t.im)));
                }
                polys.push(LaurentPoly::from_terms(terms));
            }
        }
        WalkDefinition::new(self.name, self.d, self.n, polys)
    }
}

/// Parses and validates a walk-definition JSON document.
pub fn parse_walk(text: &str) -> Result<WalkDefinition> {
    let doc: WalkDocument =
        serde_json::from_str(text).map_err(|e| QwError::Schema(e.to_string()))?;
    doc.into_walk()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: i64) -> Vec<i64> {
        vec![v]
    }

    fn coin(a: f64) -> WalkDefinition {
        let b = (1.0 - a * a).sqrt();
        WalkDefinition::from_rows(
            "coin",
            1,
            vec![
                vec![LaurentPoly::monomial(s(1), a), LaurentPoly::monomial(s(1), -b)],
                vec![LaurentPoly::constant(1, b), LaurentPoly::constant(1, a)],
            ],
        )
        .unwrap()
    }

    #[test]
    fn parse_coin_document() {
        let text = r#"{"name":"coin","d":1,"n":2,"entries":[
            [[{"shift":[1],"re":0.6,"im":0}],[{"shift":[1],"re":-0.8}]],
            [[{"shift":[0],"re":0.8}],[{"shift":[0],"re":0.6}]]]}"#;
        let w = parse_walk(text).unwrap();
        assert_eq!((w.dim(), w.degree()), (1, 2));
        assert_eq!(w.propagation_radius(), 1);
    }

    #[test]
    fn identity_walk_is_unitary() {
        let text = r#"{"name":"id","d":1,"n":1,"entries":[[[{"shift":[0],"re":1.0}]]]}"#;
        let w = parse_walk(text).unwrap();
        assert_eq!(w.propagation_radius(), 0);
        assert_eq!(w.classify_regularity(), RegularityClass::FinitePropagation { radius: 0 });
    }

    #[test]
    fn scaled_shift_is_rejected() {
        let text = r#"{"name":"2S","d":1,"n":2,"entries":[
            [[{"shift":[1],"re":2.0}],[]],
            [[],[{"shift":[1],"re":2.0}]]]}"#;
        match parse_walk(text) {
            Err(QwError::NonUnitary { defect, .. }) => assert!(defect > 1.0),
            other => panic!("expected NonUnitary, got {other:?}"),
        }
    }

    #[test]
    fn malformed_documents_are_schema_errors() {
        for text in [
            "not json",
            r#"{"d":1,"n":2,"entries":[[[]]]}"#,
            r#"{"d":1,"n":1,"entries":[[[{"shift":[0,0],"re":1.0}]]]}"#,
            r#"{"d":0,"n":1,"entries":[[[]]]}"#,
        ] {
            assert!(matches!(parse_walk(text), Err(QwError::Schema(_))), "{text}");
        }
    }

    #[test]
    fn coin_symbol_at_zero_is_coefficient_sum() {
        let u = coin(0.6).evaluate_symbol(&[0.0]);
        let expect = [[0.6, -0.8], [0.8, 0.6]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((u[(i, j)] - Complex64::new(expect[i][j], 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn symbol_is_two_pi_periodic() {
        let w = coin(0.6);
        for &k in &[0.3, -1.7, 2.9] {
            let a = w.evaluate_symbol(&[k]);
            let b = w.evaluate_symbol(&[k + 2.0 * PI]);
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn direct_sum_layout_and_radius() {
        let sp = WalkDefinition::from_rows("S", 1, vec![vec![LaurentPoly::monomial(s(1), 1.0)]]).unwrap();
        let sm = WalkDefinition::from_rows("S^-1", 1, vec![vec![LaurentPoly::monomial(s(-1), 1.0)]]).unwrap();
        let sum = sp.direct_sum(&sm).unwrap();
        assert_eq!(sum.degree(), 2);
        assert_eq!(sum.entry(0, 0), &LaurentPoly::monomial(s(1), 1.0));
        assert_eq!(sum.entry(1, 1), &LaurentPoly::monomial(s(-1), 1.0));
        assert!(sum.entry(0, 1).is_empty() && sum.entry(1, 0).is_empty());
        assert_eq!(sum.propagation_radius(), 1);
        let c = coin(0.6).direct_sum(&sum).unwrap();
        assert_eq!(c.classify_regularity(), coin(0.6).classify_regularity().max(sum.classify_regularity()));
    }

    #[test]
    fn direct_sum_rejects_dimension_mismatch() {
        let one = WalkDefinition::from_rows("1", 1, vec![vec![LaurentPoly::constant(1, 1.0)]]).unwrap();
        let two = WalkDefinition::from_rows("1", 2, vec![vec![LaurentPoly::constant(2, 1.0)]]).unwrap();
        assert!(matches!(one.direct_sum(&two), Err(QwError::DimensionMismatch(_))));
    }

    #[test]
    fn regularity_chain() {
        let r = RegularityClass::FinitePropagation { radius: 1 };
        assert!(r.has_finite_propagation() && r.is_analytic() && r.is_smooth() && r.is_uniform());
        assert!(!RegularityClass::Smooth.is_analytic());
        assert!(RegularityClass::Analytic < RegularityClass::Smooth);
    }

    #[test]
    fn polynomial_arithmetic() {
        let p = LaurentPoly::monomial(s(1), 1.0) + LaurentPoly::monomial(s(-1), 1.0);
        let q = &p * &p;
        // (S + S^-1)^2 = S^2 + 2 + S^-2
        assert_eq!(q.len(), 3);
        assert_eq!(q.radius(), 2);
        assert!((q.evaluate(&[0.0]) - Complex64::new(4.0, 0.0)).norm() < 1e-15);
        let z = p.clone() - p;
        assert!(z.is_empty());
        assert!(z.is_constant());
    }
}
