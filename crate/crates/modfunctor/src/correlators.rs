//! Cardy-case correlator checks on doubled surfaces.
//!
//! For the bulk object of the unit algebra, the correlator space on the
//! doubled surface diagonalizes into products of single-copy dimensions:
//! summing `dim(g; S_1..S_n) * dim(g; dual S_1..dual S_n)` over all label
//! tuples. The doubled category is never materialized. On the torus the
//! necessary condition is that the charge-conjugation matrix commutes with
//! both S and T.

use num_complex::Complex64;

use crate::blocks::BlockEvaluator;
use crate::error::Result;
use crate::modular::{Label, ModularDatum, Tolerances};
use crate::report::{CheckEntry, Residual};

/// A doubled query: genus `g` with `n` paired insertion points.
#[derive(Debug, Clone, Copy)]
pub struct DoubledQuery {
    pub genus: u32,
    pub insertions: usize,
}

/// Correlator-space dimension for the charge-conjugation bulk object:
/// nonzero for every valid modular datum.
pub fn dim_cardy(ev: &BlockEvaluator<'_>, q: &DoubledQuery) -> Result<u64> {
    let d = ev.datum();
    let rank = d.rank();
    let mut labels = vec![Label(0); q.insertions];
    let mut total: u64 = 0;
    loop {
        let left = ev.dim_smooth(q.genus, &labels)?;
        if left > 0 {
            let dualized: Vec<Label> = labels.iter().map(|&l| d.dual(l)).collect();
            total += left * ev.dim_smooth(q.genus, &dualized)?;
        }
        // advance the tuple odometer
        let mut pos = 0;
        loop {
            if pos == q.insertions {
                return Ok(total);
            }
            if labels[pos].0 + 1 < rank {
                labels[pos] = Label(labels[pos].0 + 1);
                break;
            }
            labels[pos] = Label(0);
            pos += 1;
        }
    }
}

/// Torus-level modular invariance of the charge-conjugation partition
/// function: `[C, S] = [C, T] = 0` within tolerance.
pub fn check_cardy_invariant(d: &ModularDatum, tol: &Tolerances) -> CheckEntry {
    let n = d.rank();
    let mut cs: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            // (C S)[i][j] = S[dual(i)][j], (S C)[i][j] = S[i][dual(j)]
            let gap = (d.s(d.dual(Label(i)).0, j) - d.s(i, d.dual(Label(j)).0)).norm();
            cs = cs.max(gap);
        }
    }
    let mut ct: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            // T diagonal: (C T)[i][j] = C[i][j] theta_j, (T C)[i][j] = theta_i C[i][j]
            if d.dual(Label(i)).0 == j {
                ct = ct.max((d.t(j) - d.t(i)).norm());
            }
        }
    }
    let residual = cs.max(ct);
    let detail = format!("max |[C,S]| = {:.3e}, max |[C,T]| = {:.3e}", cs, ct);
    if residual <= tol.axiom {
        CheckEntry {
            name: "cardy/modular_invariant".into(),
            pass: true,
            residual: Residual::Float(residual),
            detail,
        }
    } else {
        CheckEntry::fail("cardy/modular_invariant", Residual::Float(residual), detail)
    }
}

/// Dense commutator norms for diagnostics and tests.
pub fn commutator_norms(d: &ModularDatum) -> (f64, f64) {
    let n = d.rank();
    let c = |i: usize, j: usize| -> Complex64 {
        Complex64::new(if d.dual(Label(i)).0 == j { 1.0 } else { 0.0 }, 0.0)
    };
    let mut cs: f64 = 0.0;
    let mut ct: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut cs_ij = Complex64::new(0.0, 0.0);
            let mut ct_ij = Complex64::new(0.0, 0.0);
            for k in 0..n {
                cs_ij += c(i, k) * d.s(k, j) - d.s(i, k) * c(k, j);
                let t_kj = if k == j {
                    d.t(j)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                let t_ik = if i == k {
                    d.t(i)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                ct_ij += c(i, k) * t_kj - t_ik * c(k, j);
            }
            cs = cs.max(cs_ij.norm());
            ct = ct.max(ct_ij.norm());
        }
    }
    (cs, ct)
}
