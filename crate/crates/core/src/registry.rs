//! Built-in walks, addressable as `@name` or `@name(arg)`.

use num_complex::Complex64;

use crate::error::{QwError, Result};
use crate::symbol::{LaurentPoly, WalkDefinition};

/// Registry names with a short description and their parameter, if any.
pub const ENTRIES: &[(&str, &str)] = &[
    ("coin(a)", "[[aS, -bS], [b, a]], b = sqrt(1 - a^2); indecomposable, winding 1"),
    ("coin-decomposable(a)", "[[aS^-1, -bS^-1], [bS, aS]]; two 2π branches a cos k ± i sqrt(1 - a^2 cos^2 k)"),
    ("coin-realizable(a)", "[[aS^-1, bS^-1], [bS, -aS]]; reflection coin, all windings 0"),
    ("grover3", "3-state Grover walk diag(S^-1, 1, S) G3/3"),
    ("grover4", "4-state Grover walk diag(S^-3, S^-1, S, S^3) G4/2"),
    ("cube", "[[0, S, 0], [0, 0, S], [1, 0, 0]]; branch exp(2ik/3) with minimal period 3π"),
    ("shift", "[[S]]"),
    ("identity(n)", "n×n identity walk (default n = 1)"),
    ("s3-walk", "(1/2)[[S^3 + S, S - S^-1], [S - S^-1, S^-1 + S^-3]]"),
    ("grover2d", "two-state walk (1/2)[[Sr + Su, -Sr^-1 + Su^-1], [Sr - Su, Sr^-1 + Su^-1]] on Z^2"),
    ("grover2d-4state", "4-state Grover walk diag(Sr, Sr^-1, Su, Su^-1) G4/2 on Z^2"),
];

fn mono(shift: &[i64], c: f64) -> LaurentPoly {
    LaurentPoly::monomial(shift.to_vec(), Complex64::new(c, 0.0))
}

fn zero() -> LaurentPoly {
    LaurentPoly::zero()
}

fn coin_b(a: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&a.abs()) || !a.is_finite() {
        return Err(QwError::InvalidArgument(format!("coin parameter must satisfy |a| <= 1, got {a}")));
    }
    Ok((1.0 - a * a).sqrt())
}

/// `[[aS, −bS], [b, a]]`.
pub fn coin(a: f64) -> Result<WalkDefinition> {
    let b = coin_b(a)?;
    WalkDefinition::from_rows(
        format!("coin({a})"),
        1,
        vec![
            vec![mono(&[1], a), mono(&[1], -b)],
            vec![mono(&[0], b), mono(&[0], a)],
        ],
    )
}

/// `[[aS⁻¹, −bS⁻¹], [bS, aS]]`.
pub fn coin_decomposable(a: f64) -> Result<WalkDefinition> {
    let b = coin_b(a)?;
    WalkDefinition::from_rows(
        format!("coin-decomposable({a})"),
        1,
        vec![
            vec![mono(&[-1], a), mono(&[-1], -b)],
            vec![mono(&[1], b), mono(&[1], a)],
        ],
    )
}

/// `[[aS⁻¹, bS⁻¹], [bS, −aS]]`: shift after the reflection coin `[[a, b], [b, −a]]`.
pub fn coin_realizable(a: f64) -> Result<WalkDefinition> {
    let b = coin_b(a)?;
    WalkDefinition::from_rows(
        format!("coin-realizable({a})"),
        1,
        vec![
            vec![mono(&[-1], a), mono(&[-1], b)],
            vec![mono(&[1], b), mono(&[1], -a)],
        ],
    )
}

/// `diag(shifts) · coin`, with `coin` given as real rows.
fn shifted_coin(name: &str, d: usize, shifts: &[Vec<i64>], coin: &[Vec<f64>]) -> Result<WalkDefinition> {
    let n = shifts.len();
    let rows = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| LaurentPoly::monomial(shifts[i].clone(), Complex64::new(coin[i][j], 0.0)))
                .collect()
        })
        .collect();
    WalkDefinition::from_rows(name, d, rows)
}

fn grover_coin(n: usize) -> Vec<Vec<f64>> {
    let scale = 2.0 / n as f64;
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 - scale } else { -scale }).collect())
        .collect()
}

/// `(1/3) diag(S⁻¹, 1, S) · [[1, −2, −2], [−2, 1, −2], [−2, −2, 1]]`.
pub fn grover3() -> Result<WalkDefinition> {
    shifted_coin("grover3", 1, &[vec![-1], vec![0], vec![1]], &grover_coin(3))
}

/// `(1/2) diag(S⁻³, S⁻¹, S, S³) · (2I − J)`.
pub fn grover4() -> Result<WalkDefinition> {
    shifted_coin("grover4", 1, &[vec![-3], vec![-1], vec![1], vec![3]], &grover_coin(4))
}

pub fn cube() -> Result<WalkDefinition> {
    WalkDefinition::from_rows(
        "cube",
        1,
        vec![
            vec![zero(), mono(&[1], 1.0), zero()],
            vec![zero(), zero(), mono(&[1], 1.0)],
            vec![mono(&[0], 1.0), zero(), zero()],
        ],
    )
}

pub fn shift() -> Result<WalkDefinition> {
    WalkDefinition::from_rows("shift", 1, vec![vec![mono(&[1], 1.0)]])
}

pub fn identity(n: usize) -> Result<WalkDefinition> {
    let rows = (0..n)
        .map(|i| (0..n).map(|j| if i == j { mono(&[0], 1.0) } else { zero() }).collect())
        .collect();
    WalkDefinition::from_rows(format!("identity({n})"), 1, rows)
}

/// `(1/2)[[S³ + S, S − S⁻¹], [S − S⁻¹, S⁻¹ + S⁻³]]`.
pub fn s3_walk() -> Result<WalkDefinition> {
    let off = mono(&[1], 0.5) + mono(&[-1], -0.5);
    WalkDefinition::from_rows(
        "s3-walk",
        1,
        vec![
            vec![mono(&[3], 0.5) + mono(&[1], 0.5), off.clone()],
            vec![off, mono(&[-1], 0.5) + mono(&[-3], 0.5)],
        ],
    )
}

/// `(1/2)[[Sr + Su, −Sr⁻¹ + Su⁻¹], [Sr − Su, Sr⁻¹ + Su⁻¹]]` on `Z²`.
pub fn grover2d() -> Result<WalkDefinition> {
    WalkDefinition::from_rows(
        "grover2d",
        2,
        vec![
            vec![
                mono(&[1, 0], 0.5) + mono(&[0, 1], 0.5),
                mono(&[-1, 0], -0.5) + mono(&[0, -1], 0.5),
            ],
            vec![
                mono(&[1, 0], 0.5) + mono(&[0, 1], -0.5),
                mono(&[-1, 0], 0.5) + mono(&[0, -1], 0.5),
            ],
        ],
    )
}

/// `(1/2) diag(Sr, Sr⁻¹, Su, Su⁻¹) · (2I − J)` on `Z²`.
pub fn grover2d_4state() -> Result<WalkDefinition> {
    shifted_coin(
        "grover2d-4state",
        2,
        &[vec![1, 0], vec![-1, 0], vec![0, 1], vec![0, -1]],
        &grover_coin(4),
    )
}

/// Every registry walk, with default parameters where one is needed.
pub fn all_default() -> Result<Vec<WalkDefinition>> {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    Ok(vec![
        coin(0.6)?,
        coin(a)?,
        coin_decomposable(0.6)?,
        coin_decomposable(0.8)?,
        coin_realizable(0.6)?,
        grover3()?,
        grover4()?,
        cube()?,
        shift()?,
        identity(1)?,
        s3_walk()?,
        grover2d()?,
        grover2d_4state()?,
    ])
}

/// Resolves `@name` or `@name(arg)`. The leading `@` is optional.
pub fn resolve(spec: &str) -> Result<WalkDefinition> {
    let spec = spec.trim();
    let body = spec.strip_prefix('@').unwrap_or(spec);
    let (name, arg) = match body.find('(') {
        Some(open) => {
            let close = body
                .strip_suffix(')')
                .ok_or_else(|| QwError::InvalidArgument(format!("unbalanced parentheses in {spec}")))?;
            (&body[..open], Some(close[open + 1..].trim()))
        }
        None => (body, None),
    };
    let real = |default: Option<f64>| -> Result<f64> {
        match (arg, default) {
            (Some(a), _) => parse_real(a),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(QwError::InvalidArgument(format!("{name} needs a parameter, e.g. @{name}(0.6)"))),
        }
    };
    let no_arg = || -> Result<()> {
        match arg {
            None | Some("") => Ok(()),
            Some(a) => Err(QwError::InvalidArgument(format!("{name} takes no parameter, got ({a})"))),
        }
    };
    match name {
        "coin" => coin(real(None)?),
        "coin-decomposable" => coin_decomposable(real(None)?),
        "coin-realizable" => coin_realizable(real(None)?),
        "grover3" => no_arg().and_then(|_| grover3()),
        "grover4" => no_arg().and_then(|_| grover4()),
        "cube" => no_arg().and_then(|_| cube()),
        "shift" => no_arg().and_then(|_| shift()),
        "s3-walk" => no_arg().and_then(|_| s3_walk()),
        "grover2d" => no_arg().and_then(|_| grover2d()),
        "grover2d-4state" => no_arg().and_then(|_| grover2d_4state()),
        "identity" => {
            let n = real(Some(1.0))?;
            if n < 1.0 || n.fract() != 0.0 {
                return Err(QwError::InvalidArgument(format!("identity size must be a positive integer, got {n}")));
            }
            identity(n as usize)
        }
        _ => Err(QwError::InvalidArgument(format!("unknown registry walk @{name}"))),
    }
}

/// Accepts plain decimals and `1/sqrt(2)`-style shorthands.
fn parse_real(text: &str) -> Result<f64> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let lowered = t.to_ascii_lowercase();
    let value = match lowered.as_str() {
        "1/sqrt(2)" | "1/√2" | "sqrt(1/2)" => Some(std::f64::consts::FRAC_1_SQRT_2),
        _ => lowered.parse::<f64>().ok(),
    };
    value.ok_or_else(|| QwError::InvalidArgument(format!("cannot parse parameter '{text}'")))
}
