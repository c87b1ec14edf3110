//! The fusion ring and its diagonalization by the S-matrix.
//!
//! Basis element `i` acts in the regular representation through the integer
//! matrix `N_i` with `(N_i)[j][k] = N[i][j][dual(k)]` (input slot `j`, output
//! slot `k`). Conjugating any `N_i` by S diagonalizes it, with eigenvalue
//! matrix `E[i][m] = S[i][m] / S[0][m]`; the columns of E are the characters
//! of the ring. Eigenvalues are taken as these exact ratios rather than from
//! a numeric eigensolver, which avoids eigenvector-ordering ambiguity; the
//! S-conjugation residual is still reported as the diagnostic.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::modular::{within_tol, Label, ModularDatum, Tolerances};

pub struct FusionRing<'a> {
    datum: &'a ModularDatum,
    mult: Vec<Vec<u64>>,
}

/// Outcome of S-conjugating all multiplication matrices.
#[derive(Debug, Clone)]
pub struct Diagonalization {
    /// `eigenvalues[i][m] = S[i][m]/S[0][m]`.
    pub eigenvalues: Vec<Vec<Complex64>>,
    /// Largest off-diagonal entry of any conjugated matrix.
    pub max_offdiag: f64,
    /// Largest gap between a conjugated diagonal and the ratio eigenvalue.
    pub max_eigen_gap: f64,
}

/// A character of the fusion ring: evaluation against one column of the
/// eigenvalue matrix.
#[derive(Debug, Clone)]
pub struct Character {
    pub values: Vec<Complex64>,
}

impl Character {
    pub fn eval(&self, a: &[i64]) -> Complex64 {
        a.iter()
            .zip(&self.values)
            .map(|(&c, &v)| v * c as f64)
            .sum()
    }
}

impl<'a> FusionRing<'a> {
    /// Build the regular representation and verify its integer identities:
    /// `N_0` is the identity matrix and `N_i N_j = sum_k N[i][j][dual(k)] N_k`.
    pub fn new(datum: &'a ModularDatum) -> Result<Self> {
        let n = datum.rank();
        let mult: Vec<Vec<u64>> = (0..n)
            .map(|i| {
                let mut m = vec![0u64; n * n];
                for j in 0..n {
                    for k in 0..n {
                        m[j * n + k] = datum.fusion(Label(i), Label(j), datum.dual(Label(k)));
                    }
                }
                m
            })
            .collect();
        for j in 0..n {
            for k in 0..n {
                let expect = u64::from(j == k);
                if mult[0][j * n + k] != expect {
                    return Err(Error::FusionMismatch {
                        i: 0,
                        j,
                        k,
                        declared: mult[0][j * n + k],
                        computed: expect,
                    });
                }
            }
        }
        let ring = FusionRing { datum, mult };
        ring.check_regular_representation()?;
        Ok(ring)
    }

    fn check_regular_representation(&self) -> Result<()> {
        let n = self.datum.rank();
        for i in 0..n {
            for j in 0..n {
                // lhs = N_i N_j
                for r in 0..n {
                    for c in 0..n {
                        let lhs: u64 = (0..n)
                            .map(|s| self.mult[i][r * n + s] * self.mult[j][s * n + c])
                            .sum();
                        let rhs: u64 = (0..n)
                            .map(|k| {
                                self.datum
                                    .fusion(Label(i), Label(j), self.datum.dual(Label(k)))
                                    * self.mult[k][r * n + c]
                            })
                            .sum();
                        if lhs != rhs {
                            return Err(Error::FusionMismatch {
                                i,
                                j,
                                k: r * n + c,
                                declared: lhs,
                                computed: rhs,
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.datum.rank()
    }

    pub fn datum(&self) -> &ModularDatum {
        self.datum
    }

    /// Entry `(N_i)[j][k]`.
    pub fn mult_matrix(&self, i: Label) -> &[u64] {
        &self.mult[i.0]
    }

    /// Bilinear product of two integer vectors in the label basis.
    pub fn multiply(&self, a: &[i64], b: &[i64]) -> Result<Vec<i64>> {
        let n = self.datum.rank();
        if a.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: a.len(),
            });
        }
        if b.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: b.len(),
            });
        }
        let mut out = vec![0i64; n];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                if bj == 0 {
                    continue;
                }
                for (k, o) in out.iter_mut().enumerate() {
                    *o += ai
                        * bj
                        * self
                            .datum
                            .fusion(Label(i), Label(j), self.datum.dual(Label(k)))
                            as i64;
                }
            }
        }
        Ok(out)
    }

    /// Conjugate every multiplication matrix by S and compare against the
    /// diagonal of exact eigenvalue ratios. The permitted off-diagonal
    /// residual scales with the rank.
    pub fn diagonalize(&self, tol: &Tolerances) -> Result<Diagonalization> {
        let d = self.datum;
        let n = d.rank();
        let eigenvalues: Vec<Vec<Complex64>> = (0..n)
            .map(|i| (0..n).map(|m| d.s(i, m) / d.s(0, m)).collect())
            .collect();
        let mut max_offdiag: f64 = 0.0;
        let mut max_eigen_gap: f64 = 0.0;
        for i in 0..n {
            // conj = Sdag N_i S
            for r in 0..n {
                for c in 0..n {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for a in 0..n {
                        let mut row = Complex64::new(0.0, 0.0);
                        for b in 0..n {
                            row += self.mult[i][a * n + b] as f64 * d.s(b, c);
                        }
                        acc += d.s(a, r).conj() * row;
                    }
                    if r == c {
                        max_eigen_gap = max_eigen_gap.max((acc - eigenvalues[i][r]).norm());
                    } else {
                        max_offdiag = max_offdiag.max(acc.norm());
                    }
                }
            }
        }
        let threshold = tol.axiom * n as f64;
        // NaN-strict comparison so infinite ratios from degenerate S fail
        if !within_tol(max_offdiag, threshold) || !within_tol(max_eigen_gap, threshold) {
            return Err(Error::DiagonalizationFailure(
                max_offdiag.max(max_eigen_gap),
            ));
        }
        Ok(Diagonalization {
            eigenvalues,
            max_offdiag,
            max_eigen_gap,
        })
    }

    /// The characters of the ring: column `m` of the eigenvalue matrix.
    pub fn characters(&self) -> Vec<Character> {
        let d = self.datum;
        let n = d.rank();
        (0..n)
            .map(|m| Character {
                values: (0..n).map(|i| d.s(i, m) / d.s(0, m)).collect(),
            })
            .collect()
    }
}
