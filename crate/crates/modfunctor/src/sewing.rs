//! Exact verification of the sewing-element commutation identity.
//!
//! Over a graded module with conformal weight `w`, the truncated sewing
//! element is the formal sum of graded identity tensors
//! `e(q) = sum_{d<=n} sum_b e_{d,b} (x) eps_{d,b} q^d` with `dims[d]` basis
//! tensors in degree `d`. The operator `q d/dq` acts on a degree-`d` term
//! in three parts: the monomial contributes `d`, and the two tensor factors
//! contribute `-alpha_plus (d+w)` and `-alpha_minus (d+w)` through their
//! grading operators, for any split with `alpha_plus + alpha_minus = 1`.
//! The identity under test is
//!
//! `(q d/dq) o E = E o (q d/dq) - w E`
//!
//! applied to an inert generic input symbol, with every coefficient compared
//! in exact rational arithmetic. Any floating-point value in this module is
//! a defect.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::modular::{Label, Rational};
use crate::report::{CheckEntry, Residual};

/// Degree-indexed dimensions of a module, with its conformal weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedModule {
    pub label: Label,
    pub weight: Rational,
    pub dims: Vec<usize>,
}

impl GradedModule {
    pub fn new(label: Label, weight: Rational, dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::DimensionMismatch(
                "graded module needs at least degree 0".into(),
            ));
        }
        if label == Label::VACUUM && dims[0] < 1 {
            return Err(Error::DimensionMismatch(
                "vacuum module must have dims[0] >= 1".into(),
            ));
        }
        Ok(GradedModule {
            label,
            weight,
            dims,
        })
    }

    pub fn max_degree(&self) -> usize {
        self.dims.len() - 1
    }
}

/// Tangent-vector split at the two branches of the node; the two parts must
/// sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitParameters {
    pub alpha_plus: Rational,
    pub alpha_minus: Rational,
}

impl SplitParameters {
    pub fn new(alpha_plus: Rational, alpha_minus: Rational) -> Result<Self> {
        if alpha_plus + alpha_minus != Rational::from_integer(1) {
            return Err(Error::DimensionMismatch(format!(
                "split parameters must sum to 1, got {} + {}",
                alpha_plus, alpha_minus
            )));
        }
        Ok(SplitParameters {
            alpha_plus,
            alpha_minus,
        })
    }

    pub fn halves() -> Self {
        SplitParameters {
            alpha_plus: Rational::new(1, 2),
            alpha_minus: Rational::new(1, 2),
        }
    }
}

/// Truncated sewing element: one elementary tensor per degree and basis
/// index, each carrying the monomial `q^degree` with coefficient one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SewingElement {
    pub truncation: usize,
    pub weight: Rational,
    terms: Vec<(usize, usize)>,
}

impl SewingElement {
    /// Elementary tensors as `(degree, basis)` pairs.
    pub fn terms(&self) -> &[(usize, usize)] {
        &self.terms
    }
}

/// Build the degree-truncated sewing element of a graded module.
pub fn build_sewing_element(m: &GradedModule, truncation: usize) -> Result<SewingElement> {
    if truncation > m.max_degree() {
        return Err(Error::TruncationTooLarge {
            requested: truncation,
            max: m.max_degree(),
        });
    }
    let mut terms = Vec::new();
    for (d, &dim) in m.dims.iter().enumerate().take(truncation + 1) {
        for b in 0..dim {
            terms.push((d, b));
        }
    }
    Ok(SewingElement {
        truncation,
        weight: m.weight,
        terms,
    })
}

/// Result of letting `q d/dq` act on a sewing element: a rational
/// coefficient per elementary tensor (the monomial degree is unchanged).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaledElement {
    pub coeffs: BTreeMap<(usize, usize), Rational>,
}

/// Apply `q d/dq` to the element itself: the Leibniz term `d` from the
/// monomial plus the grading action `-(alpha_plus + alpha_minus)(d + w)`
/// from the two tensor factors. The result scales every degree-`d` tensor
/// by `-w`, independent of the split.
pub fn apply_q_del_q(e: &SewingElement, split: &SplitParameters) -> ScaledElement {
    let mut coeffs = BTreeMap::new();
    for &(d, b) in &e.terms {
        let degree = Rational::from_integer(d as i64);
        let l0 = degree + e.weight;
        let coeff = degree - split.alpha_plus * l0 - split.alpha_minus * l0;
        coeffs.insert((d, b), coeff);
    }
    ScaledElement { coeffs }
}

/// Marker for the inert input symbol: either the symbol itself or its
/// formal `q d/dq` image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum XFactor {
    Plain,
    Differentiated,
}

type Expression = BTreeMap<(usize, usize, XFactor), Rational>;

fn add_term(expr: &mut Expression, key: (usize, usize, XFactor), coeff: Rational) {
    let slot = expr.entry(key).or_insert_with(Rational::zero);
    *slot += coeff;
    if slot.is_zero() {
        expr.remove(&key);
    }
}

fn expand_sides(
    m: &GradedModule,
    truncation: usize,
    split: &SplitParameters,
    weight_lhs: Rational,
    weight_rhs: Rational,
) -> Result<(Expression, Expression)> {
    let element = build_sewing_element(m, truncation)?;
    let mut lhs = Expression::new();
    let mut rhs = Expression::new();
    for &(d, b) in element.terms() {
        let degree = Rational::from_integer(d as i64);
        // (q d/dq) E x: differentiate the x factor, the monomial, and the
        // two tensor factors through the split
        add_term(
            &mut lhs,
            (d, b, XFactor::Differentiated),
            Rational::from_integer(1),
        );
        add_term(&mut lhs, (d, b, XFactor::Plain), degree);
        let l0 = degree + weight_lhs;
        add_term(&mut lhs, (d, b, XFactor::Plain), -split.alpha_plus * l0);
        add_term(&mut lhs, (d, b, XFactor::Plain), -split.alpha_minus * l0);
        // E (q d/dq) x - w E x
        add_term(
            &mut rhs,
            (d, b, XFactor::Differentiated),
            Rational::from_integer(1),
        );
        add_term(&mut rhs, (d, b, XFactor::Plain), -weight_rhs);
    }
    Ok((lhs, rhs))
}

/// Compare both sides of the commutation identity coefficient by
/// coefficient in exact rational arithmetic. The returned entry carries the
/// exact-zero residual; a violation reports the first differing degree and
/// basis index.
pub fn verify_qdq_identity(
    m: &GradedModule,
    truncation: usize,
    split: &SplitParameters,
) -> Result<CheckEntry> {
    verify_with_weights(m, truncation, split, m.weight, m.weight)
}

/// Identity check with independently chosen weights on the two sides;
/// the fault-injection hook for tests.
pub(crate) fn verify_with_weights(
    m: &GradedModule,
    truncation: usize,
    split: &SplitParameters,
    weight_lhs: Rational,
    weight_rhs: Rational,
) -> Result<CheckEntry> {
    let (lhs, rhs) = expand_sides(m, truncation, split, weight_lhs, weight_rhs)?;
    let mut keys: Vec<(usize, usize, XFactor)> = lhs.keys().chain(rhs.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    for key in keys {
        let l = lhs.get(&key).cloned().unwrap_or_else(Rational::zero);
        let r = rhs.get(&key).cloned().unwrap_or_else(Rational::zero);
        if l != r {
            return Err(Error::IdentityViolation {
                degree: key.0,
                basis: key.1,
            });
        }
    }
    let n_terms = build_sewing_element(m, truncation)?.terms().len();
    Ok(CheckEntry::pass(
        format!("sewing/qdq_label{}", m.label.0),
        Residual::Exact,
        format!(
            "identity holds on {} tensors up to degree {} (weight {})",
            n_terms, truncation, m.weight
        ),
    ))
}

/// Parse the graded-module file format:
/// `module <label> weight <p>/<q> dims <d0> <d1> ...`, one module per line.
pub fn parse_graded_modules(text: &str) -> Result<Vec<GradedModule>> {
    let syntax = |line: usize, msg: &str| Error::Syntax {
        line,
        msg: msg.to_string(),
    };
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() < 5 || parts[0] != "module" || parts[2] != "weight" || parts[4] != "dims" {
            return Err(syntax(
                lineno,
                "expected `module <label> weight <p>/<q> dims <d0> ...`",
            ));
        }
        let label: usize = parts[1].parse().map_err(|_| syntax(lineno, "bad label"))?;
        let weight = {
            let (p, q) = parts[3]
                .split_once('/')
                .ok_or_else(|| syntax(lineno, "weight must be p/q"))?;
            let p: i64 = p.parse().map_err(|_| syntax(lineno, "bad weight"))?;
            let q: i64 = q.parse().map_err(|_| syntax(lineno, "bad weight"))?;
            if q <= 0 {
                return Err(syntax(lineno, "weight denominator must be positive"));
            }
            Rational::new(p, q)
        };
        let dims: Vec<usize> = parts[5..]
            .iter()
            .map(|x| x.parse().map_err(|_| syntax(lineno, "bad dimension")))
            .collect::<Result<_>>()?;
        if dims.is_empty() {
            return Err(syntax(lineno, "dims list is empty"));
        }
        out.push(GradedModule::new(Label(label), weight, dims)?);
    }
    Ok(out)
}
