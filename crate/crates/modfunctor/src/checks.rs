//! The aggregate check suite behind `check` and `report`.
//!
//! One datum in, one deterministic [`CheckReport`] out: structural axioms,
//! Verlinde consistency, ring diagonalization, transparent-center tests,
//! the charge-conjugation invariant, dimension batteries (factorization,
//! graph independence, propagation of vacua) and the exact sewing identity.
//! All randomized parts derive from fixed seeds so repeated runs are
//! byte-identical.

use std::time::Instant;

use crate::blocks::{canonical_pants_graph, BlockEvaluator, BlockQuery};
use crate::correlators::check_cardy_invariant;
use crate::error::{Error, Result};
use crate::graph::{random_stable_graph, stable_pair, GenusGraph};
use crate::modular::{
    mueger_center, parse_unchecked, rank_identity, validate_axioms, verlinde_coefficients_detailed,
    Label, ModularDatum, Rational, Tolerances,
};
use crate::report::{CheckEntry, CheckReport, Residual};
use crate::rng::Rng;
use crate::sewing::{verify_qdq_identity, GradedModule, SplitParameters};
use crate::verlinde::FusionRing;

#[derive(Debug, Clone, Copy)]
pub struct CheckOptions {
    pub tol: Tolerances,
    pub max_genus: u32,
    pub max_legs: usize,
    pub jobs: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            tol: Tolerances::default(),
            max_genus: 3,
            max_legs: 4,
            jobs: 1,
        }
    }
}

const BATTERY_SEED: u64 = 0x6d6f_6466;

/// Run the full suite on a datum document. Returns `Err` only for syntax or
/// structural input problems; every axiom or identity failure becomes a
/// failing entry in the report.
pub fn run_check_suite(text: &str, opts: &CheckOptions) -> Result<CheckReport> {
    let started = Instant::now();
    let datum = parse_unchecked(text)?;
    let tol = opts.tol;

    let mut entries = validate_axioms(&datum, &tol);
    let axioms_ok = entries.iter().all(|e| e.pass);

    entries.push(verlinde_entry(&datum, &tol));
    let ring = FusionRing::new(&datum);
    entries.push(match &ring {
        Ok(_) => CheckEntry::pass(
            "verlinde/regular_representation",
            Residual::Exact,
            "multiplication matrices close under the fusion product",
        ),
        Err(e) => CheckEntry::fail(
            "verlinde/regular_representation",
            error_residual(e),
            e.to_string(),
        ),
    });
    entries.push(match ring.as_ref().map(|r| r.diagonalize(&tol)) {
        Ok(Ok(diag)) => CheckEntry::pass(
            "verlinde/diagonalization",
            Residual::Float(diag.max_offdiag.max(diag.max_eigen_gap)),
            "S-conjugated multiplication matrices are diagonal",
        ),
        Ok(Err(e)) => CheckEntry::fail(
            "verlinde/diagonalization",
            error_residual(&e),
            e.to_string(),
        ),
        Err(_) => CheckEntry::fail(
            "verlinde/diagonalization",
            Residual::Float(1.0),
            "skipped: fusion ring construction failed",
        ),
    });

    entries.push(center_entry(&datum, &tol));
    entries.push(rank_identity_entry(&datum, &tol));
    entries.push(check_cardy_invariant(&datum, &tol));

    if axioms_ok {
        let ev = BlockEvaluator::with_jobs(&datum, tol, opts.jobs);
        for g in 0..=opts.max_genus {
            for n in 0..=opts.max_legs {
                if !stable_pair(g, n) {
                    continue;
                }
                let mut rng = Rng::new(BATTERY_SEED ^ ((g as u64) << 32) ^ n as u64);
                let tuples = battery_tuples(&datum, n, &mut rng);
                entries.push(factorization_entry(&ev, g, n, &tuples, &mut rng));
                entries.push(vacuum_entry(&ev, g, &tuples));
            }
        }
    }

    for label in datum.labels() {
        entries.push(sewing_entry(&datum, label));
    }

    Ok(CheckReport {
        datum_fingerprint: format!("{:016x}", datum.fingerprint()),
        entries,
        elapsed_ms: started.elapsed().as_millis(),
    })
}

fn error_residual(e: &Error) -> Residual {
    Residual::Float(match e {
        Error::FusionMismatch {
            declared, computed, ..
        } => (*declared as f64 - *computed as f64).abs(),
        Error::NonIntegralCoefficient { value, .. } => (value - value.round()).abs(),
        Error::DiagonalizationFailure(r) => *r,
        _ => 1.0,
    })
}

fn verlinde_entry(d: &ModularDatum, tol: &Tolerances) -> CheckEntry {
    match verlinde_coefficients_detailed(d, tol) {
        Ok(outcome) => CheckEntry::pass(
            "verlinde/consistency",
            Residual::Float(outcome.max_deviation),
            "recomputed fusion tensor matches the declared one",
        ),
        Err(e) => CheckEntry::fail("verlinde/consistency", error_residual(&e), e.to_string()),
    }
}

fn center_entry(d: &ModularDatum, tol: &Tolerances) -> CheckEntry {
    let center = mueger_center(d, tol);
    let names: Vec<&str> = center.iter().map(|&l| d.name(l)).collect();
    if center.len() == 1 && center.contains(&Label::VACUUM) {
        CheckEntry::pass(
            "mueger/center",
            Residual::Exact,
            "only the vacuum is transparent",
        )
    } else {
        CheckEntry::fail(
            "mueger/center",
            Residual::Float(center.len() as f64 - 1.0),
            format!("transparent labels {:?}: datum is not modular", names),
        )
    }
}

fn rank_identity_entry(d: &ModularDatum, tol: &Tolerances) -> CheckEntry {
    let (center_size, rank) = rank_identity(d, tol);
    if center_size == 1 {
        CheckEntry::pass(
            "mueger/rank_identity",
            Residual::Exact,
            format!("center rank 1 of {} simple objects", rank),
        )
    } else {
        CheckEntry::fail(
            "mueger/rank_identity",
            Residual::Float(center_size as f64 - 1.0),
            format!("center rank {} of {} simple objects", center_size, rank),
        )
    }
}

/// Deterministic label tuples for one battery point: the all-vacuum tuple
/// plus two seeded random tuples (when the rank allows variety).
fn battery_tuples(d: &ModularDatum, n: usize, rng: &mut Rng) -> Vec<Vec<Label>> {
    let mut tuples = vec![vec![Label::VACUUM; n]];
    if d.rank() > 1 && n > 0 {
        for _ in 0..2 {
            tuples.push((0..n).map(|_| Label(rng.below(d.rank()))).collect());
        }
    }
    tuples
}

fn factorization_entry(
    ev: &BlockEvaluator<'_>,
    g: u32,
    n: usize,
    tuples: &[Vec<Label>],
    rng: &mut Rng,
) -> CheckEntry {
    let name = format!("blocks/factorization_g{}n{}", g, n);
    let single = GenusGraph::single_vertex(g, n).expect("battery pairs are stable");
    let mut graphs: Vec<GenusGraph> = vec![single.clone(), canonical_pants_graph(g, n)];
    graphs.extend(single.one_edge_degenerations());
    for _ in 0..2 {
        graphs.push(random_stable_graph(rng, g, n));
    }
    let mut comparisons = 0usize;
    for labels in tuples {
        let oracle = match ev.dim_closed_form(g, labels) {
            Ok(v) => v,
            Err(e) => return CheckEntry::fail(name, error_residual(&e), e.to_string()),
        };
        for shape in &graphs {
            let value = match ev.dim_graph(&BlockQuery {
                shape: shape.clone(),
                leg_labels: labels.clone(),
            }) {
                Ok(r) => r.value,
                Err(e) => return CheckEntry::fail(name, error_residual(&e), e.to_string()),
            };
            comparisons += 1;
            if value != oracle {
                return CheckEntry::fail(
                    name,
                    Residual::Float((value as f64 - oracle as f64).abs()),
                    format!(
                        "graph with {} vertices gives {} but the closed form gives {} on {:?}",
                        shape.graph.n_vertices(),
                        value,
                        oracle,
                        labels
                    ),
                );
            }
        }
    }
    CheckEntry::pass(
        name,
        Residual::Exact,
        format!(
            "{} graph evaluations match the closed form ({} graphs)",
            comparisons,
            graphs.len()
        ),
    )
}

fn vacuum_entry(ev: &BlockEvaluator<'_>, g: u32, tuples: &[Vec<Label>]) -> CheckEntry {
    let n = tuples[0].len();
    let name = format!("blocks/vacuum_g{}n{}", g, n);
    for labels in tuples {
        let base = match ev.dim_smooth(g, labels) {
            Ok(v) => v,
            Err(e) => return CheckEntry::fail(name, error_residual(&e), e.to_string()),
        };
        let mut extended = labels.clone();
        extended.push(Label::VACUUM);
        let with_vacuum = match ev.dim_smooth(g, &extended) {
            Ok(v) => v,
            Err(e) => return CheckEntry::fail(name, error_residual(&e), e.to_string()),
        };
        if base != with_vacuum {
            return CheckEntry::fail(
                name,
                Residual::Float((base as f64 - with_vacuum as f64).abs()),
                format!(
                    "dim {} became {} after vacuum insertion on {:?}",
                    base, with_vacuum, labels
                ),
            );
        }
    }
    CheckEntry::pass(
        name,
        Residual::Exact,
        format!("{} tuples unchanged by vacuum insertion", tuples.len()),
    )
}

fn sewing_entry(d: &ModularDatum, label: Label) -> CheckEntry {
    let dims = vec![1, 2, 2, 3, 3, 4, 4];
    let module = match GradedModule::new(label, d.weight(label), dims) {
        Ok(m) => m,
        Err(e) => {
            return CheckEntry::fail(
                format!("sewing/qdq_label{}", label.0),
                Residual::Float(1.0),
                e.to_string(),
            )
        }
    };
    let mut rng = Rng::new(BATTERY_SEED ^ 0x5e71 ^ label.0 as u64);
    let mut splits = vec![
        SplitParameters::halves(),
        SplitParameters::new(Rational::from_integer(1), Rational::from_integer(0)).unwrap(),
    ];
    for _ in 0..2 {
        let p = rng.below(21) as i64 - 10;
        let q = 1 + rng.below(7) as i64;
        let ap = Rational::new(p, q);
        splits.push(SplitParameters::new(ap, Rational::from_integer(1) - ap).unwrap());
    }
    let mut last = None;
    for split in &splits {
        match verify_qdq_identity(&module, 6, split) {
            Ok(entry) => last = Some(entry),
            Err(e) => {
                return CheckEntry::fail(
                    format!("sewing/qdq_label{}", label.0),
                    Residual::Float(1.0),
                    e.to_string(),
                )
            }
        }
    }
    let mut entry = last.expect("at least one split");
    entry.detail = format!("{} ({} splits)", entry.detail, splits.len());
    entry
}
