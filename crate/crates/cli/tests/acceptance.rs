//! Acceptance criteria 1-9. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use framelab::constructors::{
    harmonic_frame, offset_bases_4_2, random_equal_norm, random_parseval, simplex_etf, split_source_index, split_zero,
    Seed,
};
use framelab::linalg::binomial;
use framelab::measures::{plucker, plucker_relation_42, sum_sq_volume, total_coherence, total_volume};
use framelab::optimize::{self, Manifold, Objective, ObjectiveKind, OptimizerConfig};
use framelab::verify::{k_domain, run_check, CheckStatus};
use framelab::{gram, predicates, Frame, ScalarField, SubsetSelector, Tolerances, C64};

const SHAPES: [(usize, usize); 5] = [(4, 2), (5, 2), (5, 3), (6, 3), (7, 3)];

type Criterion = (&'static str, Duration, fn() -> Outcome);

struct Outcome {
    ok: bool,
    detail: String,
}

fn field_for(i: u64) -> ScalarField {
    if i.is_multiple_of(2) {
        ScalarField::Real
    } else {
        ScalarField::Complex
    }
}

fn seed_for(criterion: u64, m: usize, n: usize, trial: u64) -> Seed {
    Seed(criterion * 1_000_000 + (m as u64) * 10_000 + (n as u64) * 1_000 + trial)
}

/// Tracks the worst residual of a named quantity against its tolerance.
#[derive(Default)]
struct Worst {
    items: Vec<(&'static str, f64, f64)>,
    errors: Vec<String>,
}

impl Worst {
    fn record(&mut self, name: &'static str, residual: f64, tol: f64) {
        match self.items.iter_mut().find(|(n, _, _)| *n == name) {
            Some(item) => item.1 = item.1.max(residual),
            None => self.items.push((name, residual, tol)),
        }
    }

    /// Runs a registered check and records its residual; a skip or error is a failure.
    fn check(&mut self, name: &'static str, frame: &Frame, k: impl Into<Option<usize>>, tol: f64) {
        let k = k.into();
        match run_check(name, frame, k) {
            Ok(r) if r.status != CheckStatus::Skipped => {
                self.record(
                    name,
                    if r.residual.is_finite() {
                        r.residual
                    } else {
                        f64::INFINITY
                    },
                    tol,
                );
                if r.status == CheckStatus::Failed {
                    self.errors.push(format!("{name} k={k:?} failed: {}", r.context));
                }
            }
            Ok(r) => self.errors.push(format!("{name} k={k:?} skipped: {}", r.context)),
            Err(e) => self.errors.push(format!("{name} k={k:?}: {e}")),
        }
    }

    fn outcome(self) -> Outcome {
        let ok = self.errors.is_empty() && self.items.iter().all(|(_, r, t)| r <= t);
        let mut parts: Vec<String> = self
            .items
            .iter()
            .map(|(n, r, t)| format!("{n} {r:.1e}<={t:.0e}"))
            .collect();
        parts.extend(self.errors.into_iter().take(3));
        Outcome {
            ok,
            detail: parts.join(", "),
        }
    }
}

fn criterion_1() -> Outcome {
    let mut w = Worst::default();
    for n in [2, 3] {
        let f = simplex_etf(n).unwrap();
        let (m, n) = (f.n_vecs(), f.n_dim());
        let bound = ((n * (m - n) * (m - 1)) as f64).sqrt();
        let tc = total_coherence(&f);
        w.record("|TC-bound|", (tc - bound).abs(), 1e-9);
        w.record("|TC-N|", (tc - n as f64).abs(), 1e-9);
    }
    w.outcome()
}

fn criterion_2() -> Outcome {
    let f = offset_bases_4_2();
    let mut w = Worst::default();
    let a = 2f64.sqrt() / 4.0;
    let expected = [a, 0.5, a, a, 0.5, a];
    let coords = plucker(&f).unwrap();
    let diff = coords
        .iter()
        .zip(expected)
        .map(|(c, e)| (c - C64::new(e, 0.0)).norm())
        .fold(0.0, f64::max);
    w.record("plucker", diff, 1e-12);
    w.record("V2", (total_volume(&f, 2).unwrap() - (1.0 + 2f64.sqrt())).abs(), 1e-12);
    w.record("relation", plucker_relation_42(&coords).unwrap().norm(), 1e-12);
    w.outcome()
}

fn criterion_3() -> Outcome {
    let cases = [
        ("TC P(3,2)", 3, 2, ObjectiveKind::TotalCoherence, 2.0),
        ("TC P(4,3)", 4, 3, ObjectiveKind::TotalCoherence, 3.0),
        ("V2 P(4,2)", 4, 2, ObjectiveKind::TotalVolume(2), 1.0 + 2f64.sqrt()),
    ];
    let config = OptimizerConfig {
        manifold: Manifold::Parseval,
        deterministic: true,
        ..OptimizerConfig::default()
    };
    let seeds: Vec<Seed> = (0..20).map(|s| Seed(3_000 + s)).collect();
    let mut w = Worst::default();
    for (label, m, n, kind, target) in cases {
        match optimize::maximize_multistart(m, n, ScalarField::Real, kind, &config, &seeds) {
            Ok(runs) => {
                let best = optimize::best_run(&runs).unwrap();
                w.record(label, (runs[best].trace.best_true - target).abs(), 1e-4);
            }
            Err(e) => w.errors.push(format!("{label}: {e}")),
        }
    }
    w.outcome()
}

fn criterion_4() -> Outcome {
    let mut w = Worst::default();
    for (m, n) in SHAPES {
        for t in 0..100 {
            let f = random_parseval(m, n, field_for(t), seed_for(4, m, n, t)).unwrap();
            w.check("prop_tcnaimark", &f, None, 1e-9);
            for k in 1..=n {
                w.check("prop_prodcos", &f, k, 1e-9);
                w.check("prop_svn", &f, k, 1e-9);
                w.check("prop_vcv", &f, k, 1e-8);
            }
            for k in 1..=4.min(m) {
                w.check("nukebound_identity", &f, k, 1e-9);
            }
            for k in 1..m {
                w.check("ne_naimark_offset", &f, k, 1e-7);
            }
        }
    }
    w.outcome()
}

fn criterion_5() -> Outcome {
    let mut w = Worst::default();
    let mut min_margin = f64::INFINITY;
    for (m, n) in SHAPES {
        for t in 0..100 {
            let f = random_equal_norm(m, n, field_for(t), seed_for(5, m, n, t)).unwrap();
            // at k = 1 the sum is N for every equal-norm frame, so strictness starts at k = 2
            for k in 2..=n {
                let margin = binomial(n, k) as f64 - sum_sq_volume(&f, k).unwrap();
                min_margin = min_margin.min(margin);
                w.check("thm_fp", &f, k, 1e-9);
            }
            for k in 1..=n {
                w.check("volwelch", &f, k, 1e-9);
            }
            for k in k_domain("cv_cauchy_binet", n, m).unwrap() {
                w.check("cv_cauchy_binet", &f, k, 1e-9);
            }
            for k in 1..=m {
                w.check("en_ne_sumsq", &f, k, 1e-9);
            }
        }
        // harmonic frames are equal-norm Parseval controls
        let control = harmonic_frame(m, &SubsetSelector::new(m, (0..n).collect()).unwrap()).unwrap();
        for k in 1..=n {
            w.record(
                "control |C(N,k)-sum|",
                (binomial(n, k) as f64 - sum_sq_volume(&control, k).unwrap()).abs(),
                1e-9,
            );
            w.check("thm_fp", &control, k, 1e-9);
        }
    }
    let mut out = w.outcome();
    out.ok &= min_margin > 1e-12;
    out.detail = format!("min strict margin {min_margin:.2e}>1e-12, {}", out.detail);
    out
}

fn criterion_6() -> Outcome {
    let mut w = Worst::default();
    let etf73 = harmonic_frame(7, &SubsetSelector::new(7, vec![1, 2, 4]).unwrap()).unwrap();
    let g = gram(&etf73);
    let target = 2f64.sqrt() / 7.0;
    let mut pairs = 0;
    for i in 0..7 {
        for j in i + 1..7 {
            w.record("|<phi_i,phi_j>|-sqrt2/7", (g.get(i, j).norm() - target).abs(), 1e-12);
            pairs += 1;
        }
    }
    if pairs != 21 {
        w.errors.push(format!("{pairs} pairs"));
    }
    w.check("thm_eanuke_saturation", &etf73, None, 1e-9);
    let tol = Tolerances {
        angle: 1e-10,
        ..Tolerances::default()
    };
    for n in 1..=10 {
        let s = simplex_etf(n).unwrap();
        if !predicates(&s, &tol).unwrap().is_equiangular {
            w.errors.push(format!("simplex_etf({n}) not equiangular"));
        }
        w.check("thm_eanuke_saturation", &s, None, 1e-9);
    }
    w.outcome()
}

fn criterion_7() -> Outcome {
    let mut w = Worst::default();
    let instances = [
        ("P(4,2)", 4, 2, Manifold::Parseval),
        ("E(5,3)", 5, 3, Manifold::EqualNorm),
    ];
    for (label, m, n, manifold) in instances {
        for (fi, field) in [ScalarField::Real, ScalarField::Complex].into_iter().enumerate() {
            let frame = optimize::random_start(m, n, field, manifold, Seed(7_000 + fi as u64 + m as u64)).unwrap();
            let mut kinds = vec![
                ObjectiveKind::TotalCoherence,
                ObjectiveKind::NegEad,
                ObjectiveKind::NegGramVariance,
            ];
            kinds.extend((1..=n).map(ObjectiveKind::TotalVolume));
            kinds.extend((n..=m).map(ObjectiveKind::TotalCompVolume));
            kinds.extend((1..=m).map(ObjectiveKind::NuclearEnergy));
            for kind in kinds {
                let tol = match kind {
                    ObjectiveKind::TotalCoherence | ObjectiveKind::TotalVolume(_) => 1e-5,
                    _ => 1e-4,
                };
                for eps in [1e-2, 1e-4] {
                    let obj = Objective::new(kind, eps).unwrap();
                    match optimize::gradcheck(&frame, &obj, 1e-6) {
                        Ok(err) => {
                            let name: &'static str = if tol == 1e-5 { "TC/V_k" } else { "other" };
                            w.record(name, err, tol);
                            if err > tol {
                                w.errors
                                    .push(format!("{label} {field:?} {} eps={eps}: {err:.2e}", kind.name()));
                            }
                        }
                        Err(e) => w.errors.push(format!("{label} {}: {e}", kind.name())),
                    }
                }
            }
        }
    }
    w.outcome()
}

fn criterion_8() -> Outcome {
    let mut w = Worst::default();
    let mut min_gain = f64::INFINITY;
    for t in 0..50u64 {
        let (m, n) = SHAPES[(t % 5) as usize];
        let f = random_parseval(m, n, field_for(t), Seed(8_000 + t))
            .unwrap()
            .pad_zeros(1);
        let src = split_source_index(&f).unwrap();
        let g = gram(&f);
        let psi_sq = g.get(src, src).re;
        let cross: f64 = (0..f.n_vecs())
            .filter(|&i| i != src)
            .map(|i| g.get(src, i).norm())
            .sum();
        let expansion = psi_sq + (2.0 * 2f64.sqrt() - 2.0) * cross;
        let gain = total_coherence(&split_zero(&f).unwrap()) - total_coherence(&f);
        min_gain = min_gain.min(gain);
        w.record("|gain-expansion|", (gain - expansion).abs(), 1e-10);
    }
    let mut out = w.outcome();
    out.ok &= min_gain > 0.0;
    out.detail = format!("min gain {min_gain:.3e}>0, {}", out.detail);
    out
}

fn run_cli(dir: &Path, args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_framelab"))
        .current_dir(dir)
        .arg("--deterministic")
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn deterministic_session(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let steps: &[&[&str]] = &[
        &[
            "construct",
            "random_parseval",
            "--m",
            "5",
            "--n",
            "3",
            "--field",
            "complex",
            "--seed",
            "11",
            "--out",
            "frame.json",
        ],
        &[
            "analyze",
            "frame.json",
            "--k",
            "1,2,3",
            "--out",
            "report.json",
            "--csv",
            "report.csv",
        ],
        &["complement", "frame.json", "--out", "complement.json"],
        &[
            "verify",
            "--m-list",
            "4,5",
            "--n-list",
            "2,3",
            "--trials",
            "2",
            "--seed",
            "5",
            "--out",
            "verify.json",
            "--junit",
            "verify.xml",
        ],
        &[
            "optimize",
            "--objective",
            "tc",
            "--m",
            "4",
            "--n",
            "2",
            "--seeds",
            "3",
            "--seed",
            "9",
            "--max-iters",
            "50",
            "--out-dir",
            "opt",
        ],
        &[
            "gradcheck",
            "--objective",
            "ne",
            "--k",
            "2",
            "--m",
            "5",
            "--n",
            "3",
            "--seed",
            "4",
        ],
    ];
    let mut captured = Vec::new();
    for (i, args) in steps.iter().enumerate() {
        captured.push((format!("stdout#{i}"), run_cli(dir, args)?));
    }
    let mut files: Vec<_> = walk(dir);
    files.sort();
    for p in files {
        let rel = p.strip_prefix(dir).unwrap().display().to_string();
        captured.push((rel, std::fs::read(&p).map_err(|e| e.to_string())?));
    }
    Ok(captured)
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

fn criterion_9() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (ra, rb) = match (deterministic_session(a.path()), deterministic_session(b.path())) {
        (Ok(ra), Ok(rb)) => (ra, rb),
        (Err(e), _) | (_, Err(e)) => return Outcome { ok: false, detail: e },
    };
    let names: Vec<&str> = ra.iter().map(|(n, _)| n.as_str()).collect();
    let differing: Vec<&str> = ra
        .iter()
        .zip(&rb)
        .filter(|(x, y)| x != y)
        .map(|(x, _)| x.0.as_str())
        .collect();
    let with_timestamp = ra
        .iter()
        .filter(|(n, c)| n.ends_with("manifest.json") && String::from_utf8_lossy(c).contains("timestamp"))
        .count();
    let ok = ra.len() == rb.len() && differing.is_empty() && with_timestamp == 0 && names.len() > 10;
    Outcome {
        ok,
        detail: format!(
            "{} outputs compared, {} differ {:?}, {} manifests with timestamps",
            names.len(),
            differing.len(),
            differing,
            with_timestamp
        ),
    }
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("ETF optima of total coherence", Duration::from_secs(1), criterion_1),
        (
            "offset (4,2) example: Plücker coordinates, V2, relation",
            Duration::from_secs(1),
            criterion_2,
        ),
        (
            "optimizer recovery over 20 seeds",
            Duration::from_secs(120),
            criterion_3,
        ),
        ("Parseval identity suite", Duration::from_secs(120), criterion_4),
        ("equal-norm suite", Duration::from_secs(120), criterion_5),
        ("ETF certification", Duration::from_secs(5), criterion_6),
        ("gradient checks", Duration::from_secs(30), criterion_7),
        ("split-zero monotonicity", Duration::from_secs(5), criterion_8),
        ("deterministic CLI outputs", Duration::from_secs(120), criterion_9),
    ];
    let mut failures = 0;
    for (i, (label, budget, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let mut out = run();
        let elapsed = start.elapsed();
        if elapsed > budget {
            out.ok = false;
        }
        let tag = if out.ok { "PASS" } else { "FAIL" };
        println!(
            "{tag} criterion {}: {label} [{:.2}s of {}s] {}",
            i + 1,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            out.detail
        );
        failures += usize::from(!out.ok);
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
