//! Named numerical checks of frame identities and inequalities.
//!
//! Each check evaluates a residual on a frame (and optionally a subset size
//! `k`) and passes when `residual <= tolerance`. Checks whose hypotheses do not
//! hold on the input are reported as skipped rather than passed.

use std::cell::OnceCell;
use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constructors::{
    harmonic_frame, naimark_complement, offset_bases_4_2, onb_padded, random_equal_norm, random_parseval, simplex_etf,
    split_source_index, split_zero, Seed,
};
use crate::error::{FrameError, Result};
use crate::frame::{
    gram, partial_frame, predicates, subsets, Frame, FramePredicates, ScalarField, SubsetSelector, Tolerances,
};
use crate::linalg::{self, binomial_f64};
use crate::measures::{self, equal_volume_constant};

/// Tolerance used to decide whether an input satisfies a check's hypotheses.
pub const PRECONDITION_TOL: f64 = 1e-9;

/// Hypothesis "all k-volumes equal" is accepted when their spread is below this.
pub const EQUAL_VOLUME_TOL: f64 = 1e-8;

/// Margin required for the strict branch of the equal-norm volume inequality.
pub const STRICT_MARGIN: f64 = 1e-12;

/// What a check needs from its input frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Requirement {
    Any,
    Parseval,
    EqualNorm,
    EqualNormParseval,
    Equiangular,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckInfo {
    pub name: &'static str,
    pub statement: &'static str,
    pub tolerance: f64,
    pub requirement: Requirement,
    pub uses_k: bool,
}

const fn info(
    name: &'static str,
    statement: &'static str,
    tolerance: f64,
    requirement: Requirement,
    uses_k: bool,
) -> CheckInfo {
    CheckInfo {
        name,
        statement,
        tolerance,
        requirement,
        uses_k,
    }
}

use Requirement::*;

/// All registered checks, in report order.
pub const REGISTRY: &[CheckInfo] = &[
    info("prop_tcnaimark", "Naimark complements have equal total coherence: TC(Φ) = TC(Ψ).", 1e-9, Parseval, false),
    info("thm_main_bound", "A Parseval frame satisfies TC(Φ) <= sqrt(N(M-N)(M-1)).", 1e-9, Parseval, false),
    info("prop_tcbound_lower", "An equal-norm Parseval frame with N < M satisfies TC(Φ) >= max{N, M-N}.", 1e-9, EqualNormParseval, false),
    info(
        "split_zero_increases_tc",
        "Replacing a vector ψ and a zero vector by two copies of ψ/sqrt(2) raises TC by ‖ψ‖² + (2sqrt(2)-2) Σ_i |<ψ,φ_i>| > 0.",
        1e-10,
        Parseval,
        false,
    ),
    info("ead_identity", "For Parseval frames EAD(Φ) = N - N²/M + M(M-1)c² - 2c TC(Φ) with c = c_{M,N}.", 1e-8, Parseval, false),
    info("v_identity", "For Parseval frames the Gram variance equals N(M-N)/M - TC(Φ)²/(M(M-1)).", 1e-8, Parseval, false),
    info("prop_prodcos", "For Parseval frames Σ_{|K|=k} v_k(Φ_K)² = C(N,k).", 1e-9, Parseval, true),
    info("prop_volbound", "For Parseval frames C(N,k) <= V_k(Φ) <= sqrt(C(M,k) C(N,k)).", 1e-9, Parseval, true),
    info(
        "thm_equalvol",
        "If a Parseval frame has equal k-volumes then every (k-1)-volume equals c_{M,N,k-1}.",
        1e-6,
        Parseval,
        true,
    ),
    info("cor_equal_2vol_equiangular", "A Parseval frame with equal 2-volumes is equiangular.", 1e-8, Parseval, false),
    info(
        "prop_naimarkvol",
        "For Naimark complements det(Ψ_K*Ψ_K) = Σ_{J⊆K} (-1)^|J| v_|J|(Φ_J)², so equal k-volumes c_{M,N,k} carry over as c_{M,M-N,k}.",
        1e-8,
        Parseval,
        true,
    ),
    info(
        "prop_svn",
        "The singular values of Ψ_{K^c} are those of Φ_K with ones filling the remaining positions.",
        1e-9,
        Parseval,
        true,
    ),
    info("prop_vcv", "For Naimark complements V_k(Φ) = CV_{M-k}(Ψ).", 1e-8, Parseval, true),
    info("plucker_relation_42", "Plücker coordinates of a 2x4 frame satisfy x12 x34 - x13 x24 + x14 x23 = 0.", 1e-10, Any, false),
    info("nukebound_identity", "For Parseval frames Σ_{|K|=k} Σ_i σ_i(Φ_K)² = N C(M-1,k-1).", 1e-9, Parseval, true),
    info(
        "thm_eanuke_saturation",
        "An equiangular Parseval frame has equal 2-nuclear norms and NE_2 = sqrt(MN(M-1)²/2 + M(M-1)V_2).",
        1e-9,
        Equiangular,
        false,
    ),
    info("ne_naimark_offset", "For Naimark complements NE_{M-k}(Ψ) - NE_k(Φ) = (M-N-k) C(M,k).", 1e-7, Parseval, true),
    info(
        "thm_fp",
        "For equal-norm frames Σ_{|K|=k} v_k(Φ_K)² <= C(N,k), with equality for k >= 2 exactly when Φ is Parseval.",
        1e-9,
        EqualNorm,
        true,
    ),
    info(
        "volwelch",
        "For equal-norm frames min_K v_k(Φ_K) <= c_{M,N,k}; at k = 2 this is the Welch bound on coherence.",
        1e-9,
        EqualNorm,
        true,
    ),
    info(
        "cv_cauchy_binet",
        "For equal-norm frames Σ cv_k² = C(M-N,M-k) det(ΦΦ*) and CV_k(Φ) <= sqrt(C(M,k) C(M-N,M-k)).",
        1e-9,
        EqualNorm,
        true,
    ),
    info("en_ne_sumsq", "For equal-norm frames Σ_{|K|=k} Σ_i σ_i(Φ_K)² = (kN/M) C(M,k).", 1e-9, EqualNorm, true),
];

pub fn check_info(name: &str) -> Result<&'static CheckInfo> {
    REGISTRY
        .iter()
        .find(|c| c.name == name)
        .ok_or_else(|| FrameError::UnknownCheck(name.to_string()))
}

/// Markdown table of the registry: name, statement, tolerance, input requirement.
pub fn registry_markdown() -> String {
    let mut out =
        String::from("# Checks\n\n| name | statement | tolerance | input | takes k |\n|---|---|---|---|---|\n");
    for c in REGISTRY {
        out.push_str(&format!(
            "| `{}` | {} | {:e} | {} | {} |\n",
            c.name,
            c.statement.replace('|', "\\|"),
            c.tolerance,
            requirement_label(c.requirement),
            if c.uses_k { "yes" } else { "no" }
        ));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Passed,
    Failed,
    Skipped,
}

/// Outcome of one check on one input.
///
/// For evaluated checks `passed == (residual <= tolerance)`. Skipped checks
/// carry `passed == false`, a zero residual and the reason in `context`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub k: Option<usize>,
    pub status: CheckStatus,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
    /// Slack of an inequality (positive when strictly satisfied).
    pub margin: Option<f64>,
    pub context: String,
}

struct Eval {
    residual: f64,
    tolerance: f64,
    margin: Option<f64>,
    note: String,
}

impl Eval {
    fn new(residual: f64, tolerance: f64) -> Self {
        Eval {
            residual,
            tolerance,
            margin: None,
            note: String::new(),
        }
    }

    fn margin(mut self, margin: f64) -> Self {
        self.margin = Some(margin);
        self
    }

    fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

fn skip(reason: impl Into<String>) -> FrameError {
    FrameError::NotApplicable(reason.into())
}

struct Ctx<'a> {
    frame: &'a Frame,
    n: usize,
    m: usize,
    preds: FramePredicates,
    complement: OnceCell<Result<Frame>>,
}

impl<'a> Ctx<'a> {
    fn new(frame: &'a Frame) -> Result<Self> {
        let tol = Tolerances {
            parseval: PRECONDITION_TOL,
            norm: PRECONDITION_TOL,
            angle: PRECONDITION_TOL,
        };
        Ok(Ctx {
            frame,
            n: frame.n_dim(),
            m: frame.n_vecs(),
            preds: predicates(frame, &tol)?,
            complement: OnceCell::new(),
        })
    }

    fn complement(&self) -> Result<&Frame> {
        if self.n >= self.m {
            return Err(skip("Naimark complement needs N < M"));
        }
        self.complement
            .get_or_init(|| naimark_complement(self.frame))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn require(&self, req: Requirement) -> Result<()> {
        let p = &self.preds;
        let ok = match req {
            Any => true,
            Parseval => p.is_parseval,
            EqualNorm => p.is_equal_norm,
            EqualNormParseval => p.is_equal_norm && p.is_parseval,
            Equiangular => p.is_equiangular,
        };
        if ok {
            Ok(())
        } else {
            Err(skip(format!("input is not {}", requirement_label(req))))
        }
    }
}

fn requirement_label(req: Requirement) -> &'static str {
    match req {
        Any => "a frame",
        Parseval => "Parseval",
        EqualNorm => "equal-norm with norms sqrt(N/M)",
        EqualNormParseval => "equal-norm Parseval",
        Equiangular => "equiangular Parseval",
    }
}

/// Subset sizes a k-dependent check is defined for.
pub fn k_domain(name: &str, n: usize, m: usize) -> Result<std::ops::RangeInclusive<usize>> {
    let lo_hi = match name {
        "prop_prodcos" | "prop_volbound" | "prop_svn" | "prop_vcv" | "thm_fp" | "volwelch" => (1, n),
        "thm_equalvol" => (2, n),
        "prop_naimarkvol" => (1, n.min(m.saturating_sub(n))),
        "nukebound_identity" | "en_ne_sumsq" => (1, m),
        "ne_naimark_offset" => (1, m.saturating_sub(1)),
        "cv_cauchy_binet" => (n.max(1), m),
        other => {
            check_info(other)?;
            return Err(FrameError::InvalidShape(format!("check {other} takes no k")));
        }
    };
    Ok(lo_hi.0..=lo_hi.1)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn spread(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if values.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

fn eval_fixed(name: &str, ctx: &Ctx) -> Result<Eval> {
    let (n, m, frame) = (ctx.n, ctx.m, ctx.frame);
    let tol = check_info(name)?.tolerance;
    match name {
        "prop_tcnaimark" => {
            let psi = ctx.complement()?;
            let (a, b) = (measures::total_coherence(frame), measures::total_coherence(psi));
            Ok(Eval::new((a - b).abs(), tol).note(format!("TC(Φ)={a:.12}, TC(Ψ)={b:.12}")))
        }
        "thm_main_bound" => {
            let tc = measures::total_coherence(frame);
            let bound = ((n * (m - n) * (m.saturating_sub(1))) as f64).sqrt();
            Ok(Eval::new((tc - bound).max(0.0), tol).margin(bound - tc).note(format!(
                "TC={tc:.12}, bound={bound:.12}, |TC-bound|={:.3e}",
                (tc - bound).abs()
            )))
        }
        "prop_tcbound_lower" => {
            if n >= m {
                return Err(skip("lower bound needs N < M"));
            }
            let tc = measures::total_coherence(frame);
            let lower = n.max(m - n) as f64;
            Ok(Eval::new((lower - tc).max(0.0), tol)
                .margin(tc - lower)
                .note(format!("TC={tc:.12}, lower={lower}")))
        }
        "split_zero_increases_tc" => {
            let last = frame.column_norm_sq(m - 1);
            let (base, note) = if last == 0.0 && m >= 2 {
                (frame.clone(), "")
            } else {
                (frame.pad_zeros(1), "zero vector appended; ")
            };
            let src = split_source_index(&base)?;
            let zero = base.n_vecs() - 1;
            let split = split_zero(&base)?;
            let gain = measures::total_coherence(&split) - measures::total_coherence(&base);
            let psi = base.column(src);
            let mut cross = 0.0;
            for i in 0..base.n_vecs() {
                if i != src && i != zero {
                    cross += psi.dotc(&base.column(i)).norm();
                }
            }
            let expected = psi.norm_squared() + (2.0 * 2f64.sqrt() - 2.0) * cross;
            let residual = if gain > 0.0 { (gain - expected).abs() } else { f64::MAX };
            Ok(Eval::new(residual, tol)
                .margin(gain)
                .note(format!("{note}gain={gain:.12}, expansion={expected:.12}")))
        }
        "ead_identity" => {
            if n >= m {
                return Err(skip("EAD needs N < M"));
            }
            let tc = measures::total_coherence(frame);
            let direct = measures::equiangular_distance(frame)?;
            let closed = measures::equiangular_distance_parseval_identity(m, n, tc);
            Ok(Eval::new((direct - closed).abs(), tol).note(format!("direct={direct:.12}, closed form={closed:.12}")))
        }
        "v_identity" => {
            if m < 2 {
                return Err(skip("Gram variance needs M >= 2"));
            }
            let tc = measures::total_coherence(frame);
            let (direct, _) = measures::gram_variance(frame);
            let closed = measures::gram_variance_parseval_identity(m, n, tc);
            Ok(Eval::new((direct - closed).abs(), tol).note(format!("direct={direct:.12}, closed form={closed:.12}")))
        }
        "cor_equal_2vol_equiangular" => {
            if n < 2 || n >= m {
                return Err(skip("needs 2 <= N < M"));
            }
            let vols = measures::volumes(frame, 2)?;
            let s = spread(&vols);
            if s > EQUAL_VOLUME_TOL {
                return Err(skip(format!("2-volumes are not equal (spread {s:.3e})")));
            }
            let res = ctx.preds.residuals.get("equiangular").copied().unwrap_or(f64::INFINITY);
            let norm_res = ctx.preds.residuals.get("equal_norm").copied().unwrap_or(f64::INFINITY);
            Ok(Eval::new(res.max(norm_res), tol)
                .note(format!("angle residual={res:.3e}, norm residual={norm_res:.3e}")))
        }
        "plucker_relation_42" => {
            if (n, m) != (2, 4) {
                return Err(skip("needs a 2x4 frame"));
            }
            let x = measures::plucker(frame)?;
            let r = measures::plucker_relation_42(&x)?.norm();
            Ok(Eval::new(r, tol))
        }
        "thm_eanuke_saturation" => {
            if m < 2 {
                return Err(skip("needs M >= 2"));
            }
            let norms = measures::nuclear_norms(frame, 2)?;
            let ne: f64 = norms.iter().sum();
            let v2 = if n >= 2 { measures::total_volume(frame, 2)? } else { 0.0 };
            let (mf, nf) = (m as f64, n as f64);
            let bound = (0.5 * mf * nf * (mf - 1.0).powi(2) + mf * (mf - 1.0) * v2).sqrt();
            let s = spread(&norms);
            Ok(Eval::new(s.max((ne - bound).abs()), tol)
                .margin(bound - ne)
                .note(format!("NE_2={ne:.12}, bound={bound:.12}, norm spread={s:.3e}")))
        }
        other => Err(FrameError::InvalidShape(format!("check {other} needs k"))),
    }
}

fn eval_k(name: &str, ctx: &Ctx, k: usize) -> Result<Eval> {
    let (n, m, frame) = (ctx.n, ctx.m, ctx.frame);
    let tol = check_info(name)?.tolerance;
    match name {
        "prop_prodcos" => {
            let s = measures::sum_sq_volume(frame, k)?;
            let c = binomial_f64(n, k);
            Ok(Eval::new((s - c).abs(), tol).note(format!("sum v_k^2={s:.12}, C(N,k)={c}")))
        }
        "prop_volbound" => {
            let v = measures::total_volume(frame, k)?;
            let lo = binomial_f64(n, k);
            let hi = (binomial_f64(m, k) * binomial_f64(n, k)).sqrt();
            let margin = (v - lo).min(hi - v);
            Ok(Eval::new((-margin).max(0.0), tol)
                .margin(margin)
                .note(format!("V_k={v:.12}, bounds=[{lo}, {hi:.12}]")))
        }
        "thm_equalvol" => {
            let vols = measures::volumes(frame, k)?;
            let s = spread(&vols);
            if s > EQUAL_VOLUME_TOL {
                return Err(skip(format!("{k}-volumes are not equal (spread {s:.3e})")));
            }
            let target = equal_volume_constant(m, n, k - 1);
            let lower = if k - 1 == 0 {
                vec![1.0]
            } else {
                measures::volumes(frame, k - 1)?
            };
            let r = lower.iter().map(|v| (v - target).abs()).fold(0.0, f64::max);
            Ok(Eval::new(r, tol).note(format!("c_(M,N,k-1)={target:.12}")))
        }
        "prop_naimarkvol" => {
            let psi = ctx.complement()?;
            let g_phi = gram(frame);
            let g_psi = gram(psi);
            let mut r: f64 = 0.0;
            for s in subsets(m, k)? {
                let idx = s.indices();
                let lhs = linalg::hermitian_det(&g_psi.principal(&s));
                let mut rhs = 0.0;
                for mask in 0u32..(1u32 << k) {
                    let j: Vec<usize> = (0..k).filter(|b| mask & (1 << b) != 0).map(|b| idx[b]).collect();
                    let sign = if j.len().is_multiple_of(2) { 1.0 } else { -1.0 };
                    let det = if j.is_empty() {
                        1.0
                    } else {
                        linalg::hermitian_det(&g_phi.principal(&SubsetSelector::new(m, j)?))
                    };
                    rhs += sign * det;
                }
                r = r.max((lhs - rhs).abs());
            }
            let vols = measures::volumes(frame, k)?;
            let mut note = format!("det identity residual={r:.3e}");
            if spread(&vols) <= EQUAL_VOLUME_TOL {
                let target = equal_volume_constant(m, m - n, k);
                let cr = measures::volumes(psi, k)?
                    .iter()
                    .map(|v| (v - target).abs())
                    .fold(0.0, f64::max);
                r = r.max(cr);
                note.push_str(&format!("; equal volumes carried to complement, residual={cr:.3e}"));
            }
            Ok(Eval::new(r, tol).note(note))
        }
        "prop_svn" => {
            let psi = ctx.complement()?;
            let d = m - n;
            let mut r: f64 = 0.0;
            for s in subsets(m, k)? {
                let sv_phi = sv_of(frame, &s)?;
                let comp = s.complement_selector().expect("k < M");
                let sv_psi = sv_of(psi, &comp)?;
                let drop = k.saturating_sub(d);
                let mut expected = vec![1.0; d.saturating_sub(k)];
                expected.extend_from_slice(&sv_phi[drop..]);
                r = r.max(max_abs_diff(&expected, &sv_psi));
                r = r.max(sv_phi[..drop].iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max));
                if expected.len() != sv_psi.len() {
                    return Err(FrameError::NumericalFailure("singular value count mismatch".into()));
                }
            }
            Ok(Eval::new(r, tol))
        }
        "prop_vcv" => {
            let psi = ctx.complement()?;
            let v = measures::total_volume(frame, k)?;
            let cv = measures::total_comp_volume(psi, m - k)?;
            Ok(Eval::new((v - cv).abs(), tol).note(format!("V_k(Φ)={v:.12}, CV_(M-k)(Ψ)={cv:.12}")))
        }
        "nukebound_identity" => {
            let s = measures::nuclear_stats(frame, k)?.sum_sq_singular;
            let c = n as f64 * binomial_f64(m - 1, k - 1);
            Ok(Eval::new((s - c).abs(), tol).note(format!("sum sigma^2={s:.12}, N C(M-1,k-1)={c}")))
        }
        "ne_naimark_offset" => {
            let psi = ctx.complement()?;
            let a = measures::nuclear_energy(psi, m - k)?;
            let b = measures::nuclear_energy(frame, k)?;
            let offset = (m as f64 - n as f64 - k as f64) * binomial_f64(m, k);
            Ok(Eval::new((a - b - offset).abs(), tol)
                .note(format!("NE_(M-k)(Ψ)={a:.12}, NE_k(Φ)={b:.12}, offset={offset}")))
        }
        "thm_fp" => {
            let s = measures::sum_sq_volume(frame, k)?;
            let c = binomial_f64(n, k);
            let margin = c - s;
            // k = 1 is an equality for every equal-norm frame
            if ctx.preds.is_parseval || k == 1 {
                Ok(Eval::new(margin.abs(), tol).margin(margin).note("equality branch"))
            } else {
                Ok(Eval::new((STRICT_MARGIN - margin).max(0.0), 0.0)
                    .margin(margin)
                    .note("strict branch"))
            }
        }
        "volwelch" => {
            let vmin = measures::volume_stats(frame, k)?.min;
            let c = equal_volume_constant(m, n, k);
            let mut r = (vmin - c).max(0.0);
            let mut note = format!("min v_k={vmin:.12}, c_(M,N,k)={c:.12}");
            if k == 2 && n < m {
                let mu = measures::coherence(frame)?;
                let w = measures::welch_bound(m, n);
                r = r.max(w - mu);
                note.push_str(&format!("; coherence={mu:.12}, welch={w:.12}"));
            }
            Ok(Eval::new(r, tol).margin(c - vmin).note(note))
        }
        "cv_cauchy_binet" => {
            let cvs = measures::comp_volumes(frame, k)?;
            let total: f64 = cvs.iter().sum();
            let sum_sq: f64 = cvs.iter().map(|x| x * x).sum();
            let det = linalg::hermitian_det(frame.frame_operator().entries());
            let identity = binomial_f64(m - n, m - k) * det;
            let bound = (binomial_f64(m, k) * binomial_f64(m - n, m - k)).sqrt();
            let r = (total - bound).max(0.0).max((sum_sq - identity).abs());
            Ok(Eval::new(r, tol)
                .margin(bound - total)
                .note(format!("CV_k={total:.12}, bound={bound:.12}")))
        }
        "en_ne_sumsq" => {
            let s = measures::nuclear_stats(frame, k)?.sum_sq_singular;
            let c = k as f64 * n as f64 / m as f64 * binomial_f64(m, k);
            Ok(Eval::new((s - c).abs(), tol).note(format!("sum sigma^2={s:.12}, kN/M C(M,k)={c:.12}")))
        }
        other => Err(FrameError::InvalidShape(format!("check {other} takes no k"))),
    }
}

fn sv_of(f: &Frame, s: &SubsetSelector) -> Result<Vec<f64>> {
    crate::frame::singular_values(&partial_frame(f, s)?)
}

fn finish(name: &str, k: Option<usize>, outcome: Result<Eval>, label: &str) -> Result<CheckResult> {
    let info = check_info(name)?;
    let ctx_label = |extra: &str| {
        if extra.is_empty() {
            label.to_string()
        } else {
            format!("{label}: {extra}")
        }
    };
    match outcome {
        Ok(e) => {
            let passed = e.residual <= e.tolerance;
            Ok(CheckResult {
                name: info.name.to_string(),
                k,
                status: if passed {
                    CheckStatus::Passed
                } else {
                    CheckStatus::Failed
                },
                passed,
                residual: e.residual,
                tolerance: e.tolerance,
                margin: e.margin,
                context: ctx_label(&e.note),
            })
        }
        Err(FrameError::NotApplicable(reason)) => Ok(CheckResult {
            name: info.name.to_string(),
            k,
            status: CheckStatus::Skipped,
            passed: false,
            residual: 0.0,
            tolerance: info.tolerance,
            margin: None,
            context: ctx_label(&format!("skipped: {reason}")),
        }),
        Err(e) => Err(e),
    }
}

fn run_in_ctx(name: &str, ctx: &Ctx, k: Option<usize>, label: &str) -> Result<CheckResult> {
    let info = check_info(name)?;
    let outcome = ctx.require(info.requirement).and_then(|_| {
        if !info.uses_k {
            return eval_fixed(name, ctx);
        }
        let domain = k_domain(name, ctx.n, ctx.m)?;
        let ks: Vec<usize> = match k {
            Some(k) if domain.contains(&k) => vec![k],
            Some(k) => return Err(skip(format!("k={k} outside {}..={}", domain.start(), domain.end()))),
            None => domain.collect(),
        };
        if ks.is_empty() {
            return Err(skip("no admissible k for this shape"));
        }
        // with several k the worst residual is reported
        let mut worst: Option<(usize, Eval)> = None;
        for kk in ks {
            let e = eval_k(name, ctx, kk)?;
            let ratio = |e: &Eval| {
                if e.tolerance > 0.0 {
                    e.residual / e.tolerance
                } else if e.residual > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            };
            if worst.as_ref().is_none_or(|(_, w)| ratio(&e) > ratio(w)) {
                worst = Some((kk, e));
            }
        }
        let (kk, e) = worst.expect("nonempty");
        let note = if k.is_none() {
            format!("worst k={kk}; {}", e.note)
        } else {
            e.note
        };
        Ok(Eval { note, ..e })
    });
    if let (Some(k), true) = (k, info.uses_k) {
        if k == 0 || k > ctx.m {
            return Err(FrameError::InvalidShape(format!("k={k} not in 1..={}", ctx.m)));
        }
    }
    finish(name, if info.uses_k { k } else { None }, outcome, label)
}

/// Runs one named check on a frame. With `k = None`, k-dependent checks run
/// over every admissible k and report the worst case.
pub fn run_check(name: &str, frame: &Frame, k: Option<usize>) -> Result<CheckResult> {
    check_info(name)?;
    let ctx = Ctx::new(frame)?;
    run_in_ctx(
        name,
        &ctx,
        k,
        &format!("frame {}x{} ({})", frame.n_dim(), frame.n_vecs(), frame.field()),
    )
}

/// Runs one named check on a seeded random frame of the kind the check needs.
pub fn run_check_random(
    name: &str,
    m: usize,
    n: usize,
    field: ScalarField,
    seed: Seed,
    k: Option<usize>,
) -> Result<CheckResult> {
    let info = check_info(name)?;
    let frame = match info.requirement {
        EqualNorm => random_equal_norm(m, n, field, seed)?,
        _ => random_parseval(m, n, field, seed)?,
    };
    let ctx = Ctx::new(&frame)?;
    let label = format!(
        "random {}(m={m}, n={n}, {field}, seed={})",
        if info.requirement == EqualNorm {
            "equal-norm"
        } else {
            "Parseval"
        },
        seed.0
    );
    run_in_ctx(name, &ctx, k, &label)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub m_list: Vec<usize>,
    pub n_list: Vec<usize>,
    /// Subset sizes to test; empty means every admissible k.
    pub k_list: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Restrict to these checks; empty means all.
    pub checks: Vec<String>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            m_list: (2..=8).collect(),
            n_list: (1..=7).collect(),
            k_list: Vec::new(),
            trials: 50,
            seed: 0,
            checks: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

impl Counts {
    fn add(&mut self, status: CheckStatus) {
        self.total += 1;
        match status {
            CheckStatus::Passed => self.passed += 1,
            CheckStatus::Failed => self.failed += 1,
            CheckStatus::Skipped => self.skipped += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema: u32,
    pub seed: u64,
    pub trials: usize,
    pub config: SuiteConfig,
    pub summary: Counts,
    pub per_check: BTreeMap<String, Counts>,
    pub results: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn from_results(config: &SuiteConfig, results: Vec<CheckResult>) -> Self {
        let mut summary = Counts::default();
        let mut per_check: BTreeMap<String, Counts> = BTreeMap::new();
        for r in &results {
            summary.add(r.status);
            per_check.entry(r.name.clone()).or_default().add(r.status);
        }
        VerifyReport {
            schema: measures::REPORT_SCHEMA,
            seed: config.seed,
            trials: config.trials,
            config: config.clone(),
            summary,
            per_check,
            results,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }
}

/// A frame the suite runs checks on.
#[derive(Debug, Clone)]
pub struct Instance {
    pub label: String,
    pub frame: Frame,
}

/// Deterministic per-instance seed.
pub fn derive_seed(base: u64, parts: &[u64]) -> Seed {
    // splitmix64 over the parts
    let mut x = base;
    for &p in parts {
        x = x.wrapping_add(p).wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = x;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        x = z ^ (z >> 31);
    }
    Seed(x)
}

/// Constructed and random frames for the configured shapes.
pub fn suite_instances(config: &SuiteConfig) -> Result<Vec<Instance>> {
    let mut out = Vec::new();
    let shapes: Vec<(usize, usize)> = config
        .m_list
        .iter()
        .flat_map(|&m| config.n_list.iter().map(move |&n| (m, n)))
        .filter(|&(m, n)| n >= 1 && n <= m)
        .collect();
    for &(m, n) in &shapes {
        out.push(Instance {
            label: format!("onb_padded(m={m}, n={n})"),
            frame: onb_padded(m, n, ScalarField::Real)?,
        });
    }
    for &n in &config.n_list {
        if n >= 1 && config.m_list.contains(&(n + 1)) {
            out.push(Instance {
                label: format!("simplex(n={n})"),
                frame: simplex_etf(n)?,
            });
        }
    }
    out.push(Instance {
        label: "harmonic(m=7, rows=1,2,4)".into(),
        frame: harmonic_frame(7, &SubsetSelector::new(7, vec![1, 2, 4])?)?,
    });
    out.push(Instance {
        label: "offset42".into(),
        frame: offset_bases_4_2(),
    });
    for &(m, n) in &shapes {
        if n >= m {
            continue;
        }
        for t in 0..config.trials {
            let field = if t % 2 == 0 {
                ScalarField::Real
            } else {
                ScalarField::Complex
            };
            let s = derive_seed(config.seed, &[m as u64, n as u64, t as u64, 0]);
            out.push(Instance {
                label: format!("random_parseval(m={m}, n={n}, {field}, seed={})", s.0),
                frame: random_parseval(m, n, field, s)?,
            });
            let s = derive_seed(config.seed, &[m as u64, n as u64, t as u64, 1]);
            out.push(Instance {
                label: format!("random_equal_norm(m={m}, n={n}, {field}, seed={})", s.0),
                frame: random_equal_norm(m, n, field, s)?,
            });
        }
    }
    Ok(out)
}

/// Runs the selected checks on a list of instances. Results are ordered by
/// instance, then registry order, then k.
pub fn run_on_instances(instances: &[Instance], config: &SuiteConfig) -> Result<Vec<CheckResult>> {
    for c in &config.checks {
        check_info(c)?;
    }
    let selected: Vec<&CheckInfo> = REGISTRY
        .iter()
        .filter(|c| config.checks.is_empty() || config.checks.iter().any(|x| x == c.name))
        .collect();
    let per_instance: Vec<Result<Vec<CheckResult>>> = instances
        .par_iter()
        .map(|inst| {
            let ctx = Ctx::new(&inst.frame)?;
            let mut out = Vec::new();
            for info in &selected {
                if info.uses_k && !config.k_list.is_empty() {
                    for &k in &config.k_list {
                        if k == 0 || k > ctx.m {
                            out.push(finish(
                                info.name,
                                Some(k),
                                Err(skip(format!("k={k} not in 1..={}", ctx.m))),
                                &inst.label,
                            )?);
                        } else {
                            out.push(run_in_ctx(info.name, &ctx, Some(k), &inst.label)?);
                        }
                    }
                } else {
                    out.push(run_in_ctx(info.name, &ctx, None, &inst.label)?);
                }
            }
            Ok(out)
        })
        .collect();
    let mut results = Vec::new();
    for r in per_instance {
        results.extend(r?);
    }
    Ok(results)
}

/// Runs every applicable check over constructed and random frames.
pub fn run_suite(config: &SuiteConfig) -> Result<VerifyReport> {
    let instances = suite_instances(config)?;
    let results = run_on_instances(&instances, config)?;
    Ok(VerifyReport::from_results(config, results))
}
