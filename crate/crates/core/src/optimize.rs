//! Smoothed frame objectives and retraction-based gradient ascent over
//! Parseval frames or equal-norm frames.
//!
//! Gradients follow the convention `∇f = 2 ∂f/∂conj(Φ) = ∂f/∂Re Φ + i ∂f/∂Im Φ`,
//! so `df = Re tr(∇f* dΦ)` and central differences on the real and imaginary
//! parts of each entry recover the real and imaginary parts of `∇f`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constructors::{random_equal_norm, random_parseval, Seed};
use crate::error::{FrameError, Result};
use crate::frame::{subsets, Frame, ScalarField, SubsetSelector};
use crate::linalg::{self, CMatrix, C64};
use crate::measures;

/// Maximum number of step halvings before a stage gives up.
pub const MAX_BACKTRACKS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "k", rename_all = "snake_case")]
pub enum ObjectiveKind {
    TotalCoherence,
    TotalVolume(usize),
    TotalCompVolume(usize),
    NuclearEnergy(usize),
    NegEad,
    NegGramVariance,
}

impl ObjectiveKind {
    pub fn k(&self) -> Option<usize> {
        match self {
            ObjectiveKind::TotalVolume(k) | ObjectiveKind::TotalCompVolume(k) | ObjectiveKind::NuclearEnergy(k) => {
                Some(*k)
            }
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ObjectiveKind::TotalCoherence => "tc",
            ObjectiveKind::TotalVolume(_) => "vk",
            ObjectiveKind::TotalCompVolume(_) => "cvk",
            ObjectiveKind::NuclearEnergy(_) => "ne",
            ObjectiveKind::NegEad => "neg_ead",
            ObjectiveKind::NegGramVariance => "neg_gram_variance",
        }
    }

    /// Checks the subset size against an `N x M` frame.
    pub fn validate(&self, n: usize, m: usize) -> Result<()> {
        let bad = |msg: String| Err(FrameError::InvalidShape(msg));
        match *self {
            ObjectiveKind::TotalVolume(k) if k == 0 || k > n => {
                bad(format!("total volume needs 1 <= k <= N={n}, got {k}"))
            }
            ObjectiveKind::TotalCompVolume(k) if k < n || k > m => {
                bad(format!("complementary volume needs N={n} <= k <= M={m}, got {k}"))
            }
            ObjectiveKind::NuclearEnergy(k) if k == 0 || k > m => {
                bad(format!("nuclear energy needs 1 <= k <= M={m}, got {k}"))
            }
            ObjectiveKind::NegEad if n >= m => bad("equiangular distance needs N < M".into()),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub kind: ObjectiveKind,
    pub smoothing_eps: f64,
}

impl Objective {
    pub fn new(kind: ObjectiveKind, smoothing_eps: f64) -> Result<Self> {
        if !(smoothing_eps > 0.0) {
            return Err(FrameError::PreconditionFailed(format!(
                "smoothing eps must be positive, got {smoothing_eps}"
            )));
        }
        Ok(Objective { kind, smoothing_eps })
    }
}

/// `sqrt(|z|^2 + eps^2) - eps` and its derivative `conj(z) / sqrt(|z|^2 + eps^2)`.
pub fn smooth_abs(z: C64, eps: f64) -> (f64, C64) {
    let r = (z.norm_sqr() + eps * eps).sqrt();
    (r - eps, z.conj() / r)
}

fn gram_of(x: &CMatrix) -> CMatrix {
    linalg::hermitian_part(&(x.adjoint() * x))
}

fn columns(x: &CMatrix, k_set: &SubsetSelector) -> CMatrix {
    let idx = k_set.indices();
    CMatrix::from_fn(x.nrows(), idx.len(), |r, c| x[(r, idx[c])])
}

fn scatter_add(grad: &mut CMatrix, part: &CMatrix, k_set: &SubsetSelector) {
    for (c, &col) in k_set.indices().iter().enumerate() {
        for r in 0..grad.nrows() {
            grad[(r, col)] += part[(r, c)];
        }
    }
}

/// Off-diagonal smoothing weights: `s_ij` and `w_ij = G_ij / sqrt(|G_ij|^2 + eps^2)`.
fn smoothed_offdiag(g: &CMatrix, eps: f64) -> (CMatrix, CMatrix) {
    let m = g.nrows();
    let mut s = CMatrix::zeros(m, m);
    let mut w = CMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            if i != j {
                let (v, d) = smooth_abs(g[(i, j)], eps);
                s[(i, j)] = C64::new(v, 0.0);
                w[(i, j)] = d.conj();
            }
        }
    }
    (s, w)
}

/// Value and gradient of Gram-entry objectives `Σ h_ij(G)`; `omega` satisfies
/// `df = Σ Re(conj(Ω_ij) dG_ij)` so that `∇f = 2ΦΩ`.
fn gram_objective(x: &CMatrix, kind: ObjectiveKind, eps: f64, want_grad: bool) -> (f64, Option<CMatrix>) {
    let (n, m) = (x.nrows(), x.ncols());
    let g = gram_of(x);
    let (s, w) = smoothed_offdiag(&g, eps);
    let offdiag_sum: f64 = s.iter().map(|z| z.re).sum();
    let target = n as f64 / m as f64;
    let (value, omega) = match kind {
        ObjectiveKind::TotalCoherence => (offdiag_sum, w),
        ObjectiveKind::NegEad | ObjectiveKind::NegGramVariance => {
            let center = if kind == ObjectiveKind::NegEad {
                crate::frame::welch_constant(m, n)
            } else if m > 1 {
                offdiag_sum / (m * (m - 1)) as f64
            } else {
                0.0
            };
            let mut omega = CMatrix::zeros(m, m);
            let mut value = 0.0;
            for i in 0..m {
                let d = g[(i, i)].re - target;
                value += d * d;
                omega[(i, i)] = C64::new(-2.0 * d, 0.0);
                for j in 0..m {
                    if i != j {
                        let dev = s[(i, j)].re - center;
                        value += dev * dev;
                        // the mean's own derivative cancels because deviations sum to zero
                        omega[(i, j)] = w[(i, j)] * (-2.0 * dev);
                    }
                }
            }
            (-value, omega)
        }
        _ => unreachable!("not a Gram-entry objective"),
    };
    let grad = want_grad.then(|| (x * omega).scale(2.0));
    (value, grad)
}

fn subset_objective(x: &CMatrix, kind: ObjectiveKind, eps: f64, want_grad: bool) -> Result<(f64, Option<CMatrix>)> {
    let (n, m) = (x.nrows(), x.ncols());
    let k = kind.k().expect("subset objective");
    let mut value = 0.0;
    let mut grad = want_grad.then(|| CMatrix::zeros(n, m));
    for s in subsets(m, k)? {
        let f = columns(x, &s);
        let (v, part) = match kind {
            ObjectiveKind::TotalVolume(_) => {
                // sqrt det(F*F + eps I), gradient sqrt(det) F A^{-1}
                let a = gram_of(&f) + CMatrix::identity(k, k).scale(eps);
                let (vals, vecs) = linalg::hermitian_eigen(&a)?;
                let det: f64 = vals.iter().product();
                let root = det.max(0.0).sqrt();
                let part = grad
                    .is_some()
                    .then(|| &f * linalg::spectral_map(&vals, &vecs, |l| 1.0 / l) * C64::new(root, 0.0));
                (root, part)
            }
            ObjectiveKind::TotalCompVolume(_) => {
                let b = linalg::hermitian_part(&(&f * f.adjoint())) + CMatrix::identity(n, n).scale(eps);
                let (vals, vecs) = linalg::hermitian_eigen(&b)?;
                let det: f64 = vals.iter().product();
                let root = det.max(0.0).sqrt();
                let part = grad
                    .is_some()
                    .then(|| linalg::spectral_map(&vals, &vecs, |l| 1.0 / l) * &f * C64::new(root, 0.0));
                (root, part)
            }
            ObjectiveKind::NuclearEnergy(_) => {
                // Σ sqrt(σ_i^2 + eps^2) over the min(N, k) singular values
                let e2 = eps * eps;
                if k <= n {
                    let (vals, vecs) = linalg::hermitian_eigen(&gram_of(&f))?;
                    let v: f64 = vals.iter().map(|l| (l.max(0.0) + e2).sqrt()).sum();
                    let part = grad
                        .is_some()
                        .then(|| &f * linalg::spectral_map(&vals, &vecs, |l| 1.0 / (l.max(0.0) + e2).sqrt()));
                    (v, part)
                } else {
                    let (vals, vecs) = linalg::hermitian_eigen(&linalg::hermitian_part(&(&f * f.adjoint())))?;
                    let v: f64 = vals.iter().map(|l| (l.max(0.0) + e2).sqrt()).sum();
                    let part = grad
                        .is_some()
                        .then(|| linalg::spectral_map(&vals, &vecs, |l| 1.0 / (l.max(0.0) + e2).sqrt()) * &f);
                    (v, part)
                }
            }
            _ => unreachable!("not a subset objective"),
        };
        value += v;
        if let (Some(g), Some(p)) = (grad.as_mut(), part) {
            scatter_add(g, &p, &s);
        }
    }
    Ok((value, grad))
}

fn smoothed_raw(x: &CMatrix, obj: &Objective, want_grad: bool) -> Result<(f64, Option<CMatrix>)> {
    obj.kind.validate(x.nrows(), x.ncols())?;
    match obj.kind {
        ObjectiveKind::TotalCoherence | ObjectiveKind::NegEad | ObjectiveKind::NegGramVariance => {
            Ok(gram_objective(x, obj.kind, obj.smoothing_eps, want_grad))
        }
        _ => subset_objective(x, obj.kind, obj.smoothing_eps, want_grad),
    }
}

/// The exact (unsmoothed) objective value.
pub fn true_value(frame: &Frame, kind: ObjectiveKind) -> Result<f64> {
    kind.validate(frame.n_dim(), frame.n_vecs())?;
    match kind {
        ObjectiveKind::TotalCoherence => Ok(measures::total_coherence(frame)),
        ObjectiveKind::TotalVolume(k) => measures::total_volume(frame, k),
        ObjectiveKind::TotalCompVolume(k) => measures::total_comp_volume(frame, k),
        ObjectiveKind::NuclearEnergy(k) => measures::nuclear_energy(frame, k),
        ObjectiveKind::NegEad => Ok(-measures::equiangular_distance(frame)?),
        ObjectiveKind::NegGramVariance => Ok(-measures::gram_variance(frame).0),
    }
}

/// `(smoothed, true)` objective values.
pub fn objective_eval(frame: &Frame, obj: &Objective) -> Result<(f64, f64)> {
    let (s, _) = smoothed_raw(frame.entries(), obj, false)?;
    Ok((s, true_value(frame, obj.kind)?))
}

/// Euclidean gradient of the smoothed objective.
pub fn objective_grad(frame: &Frame, obj: &Objective) -> Result<CMatrix> {
    let (_, g) = smoothed_raw(frame.entries(), obj, true)?;
    Ok(clean(frame.field(), g.expect("gradient requested")))
}

/// Smoothed value of an arbitrary complex matrix (used by finite differences).
pub fn smoothed_value(x: &CMatrix, obj: &Objective) -> Result<f64> {
    Ok(smoothed_raw(x, obj, false)?.0)
}

fn clean(field: ScalarField, mut a: CMatrix) -> CMatrix {
    if field == ScalarField::Real {
        a.iter_mut().for_each(|z| z.im = 0.0);
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Manifold {
    Parseval,
    EqualNorm,
}

fn retract_raw(x: &CMatrix, manifold: Manifold) -> Result<CMatrix> {
    let (n, m) = (x.nrows(), x.ncols());
    match manifold {
        Manifold::Parseval => {
            let s = linalg::inv_sqrt_psd(&(x * x.adjoint()))?;
            Ok(s * x)
        }
        Manifold::EqualNorm => {
            let radius = (n as f64 / m as f64).sqrt();
            let mut out = x.clone();
            for c in 0..m {
                let norm = x.column(c).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if norm <= 1e-300 {
                    return Err(FrameError::ZeroVector(c));
                }
                let scale = radius / norm;
                out.column_mut(c).iter_mut().for_each(|z| *z *= scale);
            }
            Ok(out)
        }
    }
}

/// Parseval: polar factor `(ΦΦ*)^{-1/2}Φ`. Equal norm: columns rescaled to `sqrt(N/M)`.
pub fn retract(frame: &Frame, manifold: Manifold) -> Result<Frame> {
    Frame::new(
        frame.field(),
        clean(frame.field(), retract_raw(frame.entries(), manifold)?),
    )
}

/// Projection of an ambient direction onto the tangent space at `x`.
fn project_tangent(x: &CMatrix, g: &CMatrix, manifold: Manifold) -> CMatrix {
    match manifold {
        Manifold::Parseval => {
            // tangent vectors Z satisfy Z X* skew-Hermitian
            let sym = linalg::hermitian_part(&(g * x.adjoint()));
            g - sym * x
        }
        Manifold::EqualNorm => {
            let mut out = g.clone();
            for c in 0..x.ncols() {
                let xc = x.column(c);
                let nsq: f64 = xc.iter().map(|z| z.norm_sqr()).sum();
                if nsq > 0.0 {
                    let radial: f64 = xc
                        .iter()
                        .zip(g.column(c).iter())
                        .map(|(a, b)| (a.conj() * b).re)
                        .sum::<f64>()
                        / nsq;
                    for r in 0..x.nrows() {
                        out[(r, c)] -= xc[r] * radial;
                    }
                }
            }
            out
        }
    }
}

/// Largest constraint violation: `‖ΦΦ* - I‖_F` or `max_i |‖φ_i‖ - sqrt(N/M)|`.
pub fn feasibility_residual(frame: &Frame, manifold: Manifold) -> f64 {
    let (n, m) = (frame.n_dim(), frame.n_vecs());
    match manifold {
        Manifold::Parseval => linalg::frobenius(&(frame.frame_operator().entries() - CMatrix::identity(n, n))),
        Manifold::EqualNorm => {
            let radius = (n as f64 / m as f64).sqrt();
            frame
                .column_norms_sq()
                .iter()
                .map(|x| (x.sqrt() - radius).abs())
                .fold(0.0, f64::max)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub manifold: Manifold,
    /// Iteration budget per smoothing stage.
    pub max_iters: usize,
    pub step_init: f64,
    pub backtrack_factor: f64,
    pub armijo_c: f64,
    pub grad_tol: f64,
    pub eps_schedule: Vec<f64>,
    pub seed: Seed,
    pub deterministic: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            manifold: Manifold::Parseval,
            max_iters: 500,
            step_init: 1.0,
            backtrack_factor: 0.5,
            armijo_c: 1e-4,
            grad_tol: 1e-10,
            eps_schedule: (2..=8).map(|e| 10f64.powi(-e)).collect(),
            seed: Seed(0),
            deterministic: true,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(FrameError::PreconditionFailed(msg.to_string()));
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1");
        }
        if !(self.grad_tol > 0.0) {
            return bad("grad_tol must be positive");
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return bad("backtrack_factor must lie in (0, 1)");
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return bad("armijo_c must lie in (0, 1)");
        }
        if !(self.step_init > 0.0) {
            return bad("step_init must be positive");
        }
        if self.eps_schedule.is_empty() || self.eps_schedule.iter().any(|e| !(*e > 0.0)) {
            return bad("eps_schedule must be a nonempty list of positive values");
        }
        if self.eps_schedule.windows(2).any(|w| w[1] >= w[0]) {
            return bad("eps_schedule must be strictly decreasing");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIters,
    LineSearchFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub iter: usize,
    pub stage: usize,
    pub eps: f64,
    pub f_smooth: f64,
    pub f_true: f64,
    pub grad_norm: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub records: Vec<IterRecord>,
    pub stage_status: Vec<Status>,
    pub status: Status,
    pub frame: Frame,
    pub final_true: f64,
    pub best_true: f64,
    pub best_frame: Frame,
}

/// Projected gradient ascent with Armijo backtracking, annealing the smoothing
/// parameter through `config.eps_schedule`.
pub fn maximize(start: &Frame, kind: ObjectiveKind, config: &OptimizerConfig) -> Result<Trace> {
    config.validate()?;
    kind.validate(start.n_dim(), start.n_vecs())?;
    let field = start.field();
    let mut x = clean(field, retract_raw(start.entries(), config.manifold)?);
    let to_frame = |x: &CMatrix| Frame::new(field, x.clone());

    let mut records = Vec::new();
    let mut stage_status = Vec::new();
    let mut iter = 0usize;
    let first = to_frame(&x)?;
    let mut best_true = true_value(&first, kind)?;
    let mut best_frame = first;

    for (stage, &eps) in config.eps_schedule.iter().enumerate() {
        let obj = Objective::new(kind, eps)?;
        let (mut f, _) = smoothed_raw(&x, &obj, false)?;
        let mut step = config.step_init;
        let mut status = Status::MaxIters;
        for _ in 0..config.max_iters {
            let (_, g) = smoothed_raw(&x, &obj, true)?;
            let dir = clean(field, project_tangent(&x, &g.expect("gradient"), config.manifold));
            let gnorm = linalg::frobenius(&dir);
            if gnorm < config.grad_tol {
                status = Status::Converged;
                break;
            }
            let mut t = step;
            let mut accepted = None;
            for _ in 0..MAX_BACKTRACKS {
                let trial = &x + dir.scale(t);
                if let Ok(y) = retract_raw(&trial, config.manifold) {
                    let y = clean(field, y);
                    let (fy, _) = smoothed_raw(&y, &obj, false)?;
                    if fy >= f + config.armijo_c * t * gnorm * gnorm {
                        accepted = Some((y, fy));
                        break;
                    }
                }
                t *= config.backtrack_factor;
            }
            let Some((y, fy)) = accepted else {
                status = Status::LineSearchFailed;
                break;
            };
            let step_taken = linalg::frobenius(&(&y - &x));
            x = y;
            f = fy;
            iter += 1;
            let frame = to_frame(&x)?;
            let ft = true_value(&frame, kind)?;
            if ft > best_true {
                best_true = ft;
                best_frame = frame;
            }
            records.push(IterRecord {
                iter,
                stage,
                eps,
                f_smooth: f,
                f_true: ft,
                grad_norm: gnorm,
                step: t,
            });
            // a step that no longer moves the iterate ends the stage
            if step_taken == 0.0 {
                status = Status::Converged;
                break;
            }
            step = (t / config.backtrack_factor).min(config.step_init.max(t));
        }
        stage_status.push(status);
    }
    let frame = to_frame(&x)?;
    let final_true = true_value(&frame, kind)?;
    if final_true > best_true {
        best_true = final_true;
        best_frame = frame.clone();
    }
    let status = *stage_status.last().expect("nonempty schedule");
    Ok(Trace {
        records,
        stage_status,
        status,
        frame,
        final_true,
        best_true,
        best_frame,
    })
}

/// Known upper bound on the true objective over the manifold, if any.
///
/// Over equal-norm frames TC is bounded by `(M-1)N`, the value at repeated
/// copies of one vector. Nuclear energy uses the Cauchy-Schwarz bound from the
/// fixed sum of squared singular values.
pub fn objective_upper_bound(kind: ObjectiveKind, manifold: Manifold, m: usize, n: usize) -> Option<f64> {
    let c = |a: usize, b: usize| linalg::binomial_f64(a, b);
    let (mf, nf) = (m as f64, n as f64);
    match kind {
        ObjectiveKind::TotalCoherence => Some(match manifold {
            Manifold::Parseval => (nf * (mf - nf) * (mf - 1.0)).sqrt(),
            Manifold::EqualNorm => (mf - 1.0) * nf,
        }),
        ObjectiveKind::TotalVolume(k) if k <= n => Some((c(m, k) * c(n, k)).sqrt()),
        ObjectiveKind::TotalCompVolume(k) if k >= n && k <= m => Some((c(m, k) * c(m - n, m - k)).sqrt()),
        ObjectiveKind::NuclearEnergy(k) if k >= 1 && k <= m => {
            Some((n.min(k) as f64 * c(m, k) * nf * c(m - 1, k - 1)).sqrt())
        }
        ObjectiveKind::NegEad | ObjectiveKind::NegGramVariance => Some(0.0),
        _ => None,
    }
}

/// Random starting point on the configured manifold.
pub fn random_start(m: usize, n: usize, field: ScalarField, manifold: Manifold, seed: Seed) -> Result<Frame> {
    match manifold {
        Manifold::Parseval => random_parseval(m, n, field, seed),
        Manifold::EqualNorm => random_equal_norm(m, n, field, seed),
    }
}

/// One result of a multi-start batch.
#[derive(Debug, Clone)]
pub struct StartResult {
    pub seed: Seed,
    pub trace: Trace,
}

/// Independent runs from each seed; results are returned in seed order.
///
/// Runs execute on the current rayon pool; each run is single-threaded.
pub fn maximize_multistart(
    m: usize,
    n: usize,
    field: ScalarField,
    kind: ObjectiveKind,
    config: &OptimizerConfig,
    seeds: &[Seed],
) -> Result<Vec<StartResult>> {
    seeds
        .par_iter()
        .map(|&seed| {
            let start = random_start(m, n, field, config.manifold, seed)?;
            let mut cfg = config.clone();
            cfg.seed = seed;
            Ok(StartResult {
                seed,
                trace: maximize(&start, kind, &cfg)?,
            })
        })
        .collect()
}

/// Index of the run with the largest best true value (first on ties).
pub fn best_run(results: &[StartResult]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, r) in results.iter().enumerate() {
        if best.is_none_or(|b| r.trace.best_true > results[b].trace.best_true) {
            best = Some(i);
        }
    }
    best
}

/// Central-difference gradient of the smoothed objective on every real and
/// imaginary coordinate.
pub fn finite_difference_grad(frame: &Frame, obj: &Objective, h: f64) -> Result<CMatrix> {
    let x = frame.entries();
    let (n, m) = (x.nrows(), x.ncols());
    let mut out = CMatrix::zeros(n, m);
    for c in 0..m {
        for r in 0..n {
            let mut parts = [0.0; 2];
            for (p, unit) in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)].into_iter().enumerate() {
                let mut plus = x.clone();
                plus[(r, c)] += unit * h;
                let mut minus = x.clone();
                minus[(r, c)] -= unit * h;
                parts[p] = (smoothed_value(&plus, obj)? - smoothed_value(&minus, obj)?) / (2.0 * h);
            }
            out[(r, c)] = C64::new(parts[0], parts[1]);
        }
    }
    Ok(out)
}

/// Largest coordinate difference between the analytic and finite-difference
/// gradients, relative to the largest finite-difference coordinate.
pub fn gradcheck(frame: &Frame, obj: &Objective, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(FrameError::PreconditionFailed(
            "finite-difference step must be positive".into(),
        ));
    }
    let analytic = smoothed_raw(frame.entries(), obj, true)?.1.expect("gradient");
    let numeric = finite_difference_grad(frame, obj, h)?;
    let scale = numeric
        .iter()
        .flat_map(|z| [z.re.abs(), z.im.abs()])
        .fold(0.0, f64::max);
    let diff = analytic
        .iter()
        .zip(numeric.iter())
        .flat_map(|(a, b)| [(a.re - b.re).abs(), (a.im - b.im).abs()])
        .fold(0.0, f64::max);
    Ok(if scale > 0.0 { diff / scale } else { diff })
}
