//! Audit harness: sweeps evaluation points, compares each value against its
//! envelope in log space, searches for the tightest point, and measures
//! residuals of classical q-series identities.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::{Complex, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::bounds::{
    envelope_aq_gaussian, envelope_entire, envelope_meromorphic, envelope_phi, envelope_theta,
    meromorphic_bound_params,
};
use crate::error::{invalid, Error, Result};
use crate::qcore::{pochhammer_infinite, QBase};
use crate::series::{
    eval_confluent_f, eval_laurent, eval_phi, eval_ramanujan_aq, eval_theta, ConfluentParams,
    EvalResult, LaurentSpec, PhiParams,
};

pub const DEFAULT_SLACK: f64 = 1e-12;
pub const DEFAULT_TOL: f64 = 1e-14;

/// Which evaluator an audit record came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionTag {
    ConfluentF,
    Phi,
    Aq,
    Theta,
    Laurent,
}

impl FunctionTag {
    pub fn as_str(self) -> &'static str {
        match self {
            FunctionTag::ConfluentF => "confluent_f",
            FunctionTag::Phi => "phi",
            FunctionTag::Aq => "aq",
            FunctionTag::Theta => "theta",
            FunctionTag::Laurent => "laurent",
        }
    }
}

impl fmt::Display for FunctionTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FunctionTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "confluent_f" | "f" => FunctionTag::ConfluentF,
            "phi" => FunctionTag::Phi,
            "aq" => FunctionTag::Aq,
            "theta" => FunctionTag::Theta,
            "laurent" => FunctionTag::Laurent,
            other => return invalid(format!("unknown function tag {other:?}")),
        })
    }
}

/// A concrete function together with everything its envelope needs.
#[derive(Debug, Clone)]
pub enum AuditTarget {
    ConfluentF(ConfluentParams),
    Phi(PhiParams),
    Aq(QBase),
    Theta { q: QBase, alpha: f64 },
    Laurent(LaurentSpec),
}

/// Formats a complex number as `<re>[+|-]<im>i`.
pub fn format_complex(z: Complex64) -> String {
    if z.im.is_sign_negative() {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

/// Parses `<re>[+|-]<im>i` or a plain real number.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t = s.trim();
    let bad = || Error::InvalidArgument(format!("cannot parse complex number {s:?}"));
    if let Some(body) = t.strip_suffix('i') {
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
        return match split {
            Some(i) => {
                let re = body[..i].parse::<f64>().map_err(|_| bad())?;
                let im_str = &body[i..];
                let im = match im_str {
                    "+" => 1.0,
                    "-" => -1.0,
                    _ => im_str.parse::<f64>().map_err(|_| bad())?,
                };
                Ok(Complex64::new(re, im))
            }
            None => {
                let im = match body {
                    "" | "+" => 1.0,
                    "-" => -1.0,
                    _ => body.parse::<f64>().map_err(|_| bad())?,
                };
                Ok(Complex64::new(0.0, im))
            }
        };
    }
    t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad())
}

fn join_complex(list: &[Complex64]) -> String {
    list.iter().map(|&a| format_complex(a)).collect::<Vec<_>>().join("|")
}

fn join_real(list: &[f64]) -> String {
    list.iter().map(|b| b.to_string()).collect::<Vec<_>>().join("|")
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split('|').filter(|p| !p.is_empty())
}

impl AuditTarget {
    pub fn tag(&self) -> FunctionTag {
        match self {
            AuditTarget::ConfluentF(_) => FunctionTag::ConfluentF,
            AuditTarget::Phi(_) => FunctionTag::Phi,
            AuditTarget::Aq(_) => FunctionTag::Aq,
            AuditTarget::Theta { .. } => FunctionTag::Theta,
            AuditTarget::Laurent(_) => FunctionTag::Laurent,
        }
    }

    pub fn q(&self) -> QBase {
        match self {
            AuditTarget::ConfluentF(p) => p.q,
            AuditTarget::Phi(p) => p.q,
            AuditTarget::Aq(q) => *q,
            AuditTarget::Theta { q, .. } => *q,
            AuditTarget::Laurent(spec) => spec.q,
        }
    }

    /// Gaussian weight of the entire-function members.
    pub fn l(&self) -> Option<f64> {
        match self {
            AuditTarget::ConfluentF(p) => Some(p.l),
            AuditTarget::Phi(p) => Some(p.weight()),
            AuditTarget::Aq(_) => Some(1.0),
            _ => None,
        }
    }

    /// `key=value` pairs joined by `;`, sufficient together with the tag and
    /// `q` to rebuild the target (Laurent targets rebuild as the theta stream).
    pub fn digest(&self) -> String {
        match self {
            AuditTarget::ConfluentF(p) => format!(
                "a={};b={};l={}",
                join_complex(&p.a_list),
                join_real(&p.b_list),
                p.l
            ),
            AuditTarget::Phi(p) => format!("a={};b={}", join_complex(&p.a_list), join_real(&p.b_list)),
            AuditTarget::Aq(_) => String::new(),
            AuditTarget::Theta { alpha, .. } => format!("alpha={alpha}"),
            AuditTarget::Laurent(spec) => format!(
                "alpha={};center={};c={}",
                spec.alpha,
                format_complex(spec.center),
                spec.c_weighted
            ),
        }
    }

    /// Inverse of [`AuditTarget::digest`].
    pub fn from_digest(tag: FunctionTag, q: QBase, digest: &str) -> Result<Self> {
        let mut a_list = Vec::new();
        let mut b_list = Vec::new();
        let mut l = None;
        let mut alpha = None;
        let mut center = Complex64::new(0.0, 0.0);
        for field in digest.split(';').filter(|f| !f.is_empty()) {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("malformed digest field {field:?}")))?;
            let real = |v: &str| {
                v.parse::<f64>()
                    .map_err(|_| Error::InvalidArgument(format!("malformed number {v:?} in digest")))
            };
            match key {
                "a" => a_list = split_list(value).map(parse_complex).collect::<Result<_>>()?,
                "b" => b_list = split_list(value).map(real).collect::<Result<_>>()?,
                "l" => l = Some(real(value)?),
                "alpha" => alpha = Some(real(value)?),
                "center" => center = parse_complex(value)?,
                "c" => {}
                other => return invalid(format!("unknown digest key {other:?}")),
            }
        }
        let need_alpha = || alpha.ok_or_else(|| Error::InvalidArgument("digest lacks alpha".into()));
        Ok(match tag {
            FunctionTag::ConfluentF => AuditTarget::ConfluentF(ConfluentParams::new(
                a_list,
                b_list,
                l.ok_or_else(|| Error::InvalidArgument("digest lacks l".into()))?,
                q,
            )?),
            FunctionTag::Phi => AuditTarget::Phi(PhiParams::new(a_list, b_list, q)?),
            FunctionTag::Aq => AuditTarget::Aq(q),
            FunctionTag::Theta => AuditTarget::Theta { q, alpha: need_alpha()? },
            FunctionTag::Laurent => {
                let mut spec = LaurentSpec::theta(q, need_alpha()?)?;
                spec.center = center;
                AuditTarget::Laurent(spec)
            }
        })
    }

    fn center(&self) -> Complex64 {
        match self {
            AuditTarget::Laurent(spec) => spec.center,
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// Evaluation point at modulus `abs_z` (distance from the Laurent center)
    /// and argument `angle`.
    pub fn point(&self, abs_z: f64, angle: f64) -> Complex64 {
        self.center() + Complex64::from_polar(abs_z, angle)
    }

    pub fn evaluate(&self, z: Complex64, tol: f64) -> Result<EvalResult> {
        match self {
            AuditTarget::ConfluentF(p) => eval_confluent_f(p, z, tol),
            AuditTarget::Phi(p) => eval_phi(p, z, tol),
            AuditTarget::Aq(q) => eval_ramanujan_aq(*q, z, tol),
            AuditTarget::Theta { q, .. } => eval_theta(*q, z, tol),
            AuditTarget::Laurent(spec) => eval_laurent(spec, z, tol),
        }
    }

    /// Log of the envelope that must dominate `|f(z)|`.
    pub fn envelope_log(&self, z: Complex64) -> Result<f64> {
        let r = (z - self.center()).norm();
        let env = match self {
            AuditTarget::ConfluentF(p) => envelope_entire(p, r)?,
            AuditTarget::Phi(p) => envelope_phi(p, r)?,
            AuditTarget::Aq(q) => envelope_aq_gaussian(*q, r)?,
            AuditTarget::Theta { q, alpha } => envelope_theta(*alpha, *q, r)?,
            AuditTarget::Laurent(spec) => {
                let params = meromorphic_bound_params(spec.alpha, spec.q)?;
                envelope_meromorphic(&params, spec.c_weighted, r)?
            }
        };
        Ok(env.log_bound)
    }
}

/// One audited evaluation point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub function: FunctionTag,
    pub q: f64,
    pub l: Option<f64>,
    pub param_digest: String,
    pub re_z: f64,
    pub im_z: f64,
    pub abs_value: f64,
    pub envelope_log: f64,
    /// `|f(z)| / envelope`, formed in log space.
    pub ratio: f64,
    pub pass: bool,
    pub terms_used: usize,
    pub tail_bound: f64,
    /// Set when the evaluation itself failed; such records never pass and
    /// are counted separately from violations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl AuditRecord {
    pub fn z(&self) -> Complex64 {
        Complex64::new(self.re_z, self.im_z)
    }

    pub fn is_violation(&self) -> bool {
        self.error.is_none() && !self.pass
    }
}

/// Evaluates `target` at `z` and compares against its envelope:
/// `pass` iff `ln|f(z)| <= envelope_log + ln(1 + slack)`.
pub fn audit_point(target: &AuditTarget, z: Complex64, slack: f64, tol: f64) -> AuditRecord {
    let mut record = AuditRecord {
        function: target.tag(),
        q: target.q().value(),
        l: target.l(),
        param_digest: target.digest(),
        re_z: z.re,
        im_z: z.im,
        abs_value: f64::NAN,
        envelope_log: f64::NAN,
        ratio: f64::NAN,
        pass: false,
        terms_used: 0,
        tail_bound: f64::NAN,
        error: None,
    };
    let outcome = target
        .evaluate(z, tol)
        .and_then(|value| {
            if !value.converged {
                return Err(Error::NonConvergent(format!(
                    "series not converged after {} terms",
                    value.terms_used
                )));
            }
            Ok((value, target.envelope_log(z)?))
        });
    match outcome {
        Ok((value, envelope_log)) => {
            let log_abs = value.log_abs();
            record.abs_value = value.abs();
            record.envelope_log = envelope_log;
            record.ratio = (log_abs - envelope_log).exp();
            record.pass = log_abs <= envelope_log + slack.ln_1p();
            record.terms_used = value.terms_used;
            record.tail_bound = value.tail_bound_abs();
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    record
}

/// Sampling plan for [`audit_envelope`] and [`audit_random`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub abs_z_grid: Vec<f64>,
    pub angle_count: usize,
    pub parameter_draws: usize,
    pub seed: u64,
    pub slack: f64,
    pub tol: f64,
}

impl SweepPlan {
    /// Plan over `count` log-spaced moduli in `[lo, hi]`.
    pub fn log_spaced(lo: f64, hi: f64, count: usize, angle_count: usize) -> Result<Self> {
        Ok(SweepPlan {
            abs_z_grid: log_grid(lo, hi, count)?,
            angle_count,
            parameter_draws: 1,
            seed: 0,
            slack: DEFAULT_SLACK,
            tol: DEFAULT_TOL,
        })
    }

    /// Angles `2 pi (j + 1/2) / n`, so a single angle lands on the negative
    /// real axis.
    pub fn angles(&self) -> Vec<f64> {
        let n = self.angle_count as f64;
        (0..self.angle_count).map(|j| TAU * (j as f64 + 0.5) / n).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.abs_z_grid.is_empty() {
            return invalid("sweep grid is empty");
        }
        if let Some(bad) = self.abs_z_grid.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return invalid(format!("grid modulus {bad} is not positive"));
        }
        if self.angle_count == 0 {
            return invalid("angle count must be at least 1");
        }
        if !(self.slack >= 0.0) {
            return invalid(format!("slack must be non-negative, got {}", self.slack));
        }
        if !(self.tol > 0.0) {
            return invalid(format!("tolerance must be positive, got {}", self.tol));
        }
        Ok(())
    }

    fn points(&self) -> Vec<(f64, f64)> {
        let angles = self.angles();
        self.abs_z_grid
            .iter()
            .flat_map(|&r| angles.iter().map(move |&t| (r, t)))
            .collect()
    }
}

/// `count` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return invalid(format!("grid needs 0 < lo <= hi, got {lo}:{hi}"));
    }
    match count {
        0 => invalid("grid count must be at least 1"),
        1 => Ok(vec![lo]),
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            let step = (b - a) / (count - 1) as f64;
            Ok((0..count)
                .map(|i| if i + 1 == count { hi } else { (a + step * i as f64).exp() })
                .collect())
        }
    }
}

/// Audits `target` on every `(|z|, angle)` pair of the plan, in plan order.
pub fn audit_envelope(plan: &SweepPlan, target: &AuditTarget) -> Result<Vec<AuditRecord>> {
    plan.validate()?;
    Ok(plan
        .points()
        .par_iter()
        .map(|&(r, t)| audit_point(target, target.point(r, t), plan.slack, plan.tol))
        .collect())
}

/// Draws `plan.parameter_draws` random targets of kind `tag` and audits each
/// on the full grid. Targets are drawn sequentially from the seed before any
/// evaluation, so the output is independent of scheduling.
pub fn audit_random(plan: &SweepPlan, tag: FunctionTag) -> Result<Vec<AuditRecord>> {
    plan.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let targets = (0..plan.parameter_draws)
        .map(|_| random_target(tag, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let points = plan.points();
    Ok(targets
        .par_iter()
        .flat_map_iter(|target| {
            points
                .iter()
                .map(move |&(r, t)| audit_point(target, target.point(r, t), plan.slack, plan.tol))
        })
        .collect())
}

/// `count` independent draws of a random target of kind `tag` together with
/// a random point: `|z|` log-uniform in `abs_z_range`, angle uniform.
pub fn sample_random(
    tag: FunctionTag,
    count: usize,
    seed: u64,
    abs_z_range: (f64, f64),
    slack: f64,
    tol: f64,
) -> Result<Vec<AuditRecord>> {
    let (lo, hi) = abs_z_range;
    if !(lo > 0.0 && hi >= lo) {
        return invalid(format!("range needs 0 < lo <= hi, got {lo}:{hi}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws = (0..count)
        .map(|_| {
            let target = random_target(tag, &mut rng)?;
            let r = (rng.gen_range(lo.ln()..=hi.ln())).exp();
            let angle = rng.gen_range(0.0..TAU);
            Ok((target, r, angle))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(draws
        .par_iter()
        .map(|(target, r, angle)| audit_point(target, target.point(*r, *angle), slack, tol))
        .collect())
}

const WEIGHTS: [f64; 4] = [0.5, 1.0, 1.5, 2.5];
const THETA_ALPHAS: [f64; 3] = [0.25, 0.5, 0.75];

fn random_q(rng: &mut impl Rng) -> QBase {
    QBase::new(rng.gen_range(0.05..=0.95)).expect("range lies inside (0, 1)")
}

/// Uniform on the disk `|a| <= radius`.
pub fn random_disk(rng: &mut impl Rng, radius: f64) -> Complex64 {
    Complex64::from_polar(radius * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..TAU))
}

/// Draws a target of kind `tag`: `a_i` uniform on `|a| <= 2`, `b_j` uniform
/// on `[0, 0.95]`, `l` from `{0.5, 1, 1.5, 2.5}`, `q` uniform on
/// `[0.05, 0.95]`, `r <= 2`, `s <= 3`, theta `alpha` from `{0.25, 0.5, 0.75}`.
pub fn random_target(tag: FunctionTag, rng: &mut impl Rng) -> Result<AuditTarget> {
    let q = random_q(rng);
    Ok(match tag {
        FunctionTag::ConfluentF => {
            let r = rng.gen_range(0..=2);
            let s = rng.gen_range(0..=3);
            let a = (0..r).map(|_| random_disk(rng, 2.0)).collect();
            let b = (0..s).map(|_| rng.gen_range(0.0..=0.95)).collect();
            let l = WEIGHTS[rng.gen_range(0..WEIGHTS.len())];
            AuditTarget::ConfluentF(ConfluentParams::new(a, b, l, q)?)
        }
        FunctionTag::Phi => {
            let r = rng.gen_range(0..=2);
            let s = rng.gen_range(r..=3);
            let a = (0..r).map(|_| random_disk(rng, 2.0)).collect();
            let b = (0..s).map(|_| rng.gen_range(0.0..=0.95)).collect();
            AuditTarget::Phi(PhiParams::new(a, b, q)?)
        }
        FunctionTag::Aq => AuditTarget::Aq(q),
        FunctionTag::Theta => AuditTarget::Theta {
            q,
            alpha: THETA_ALPHAS[rng.gen_range(0..THETA_ALPHAS.len())],
        },
        FunctionTag::Laurent => {
            let alpha = THETA_ALPHAS[rng.gen_range(0..THETA_ALPHAS.len())];
            AuditTarget::Laurent(LaurentSpec::theta(q, alpha)?)
        }
    })
}

/// Counts over a batch of audit records.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct AuditSummary {
    pub total: usize,
    pub passed: usize,
    pub violations: usize,
    pub errors: usize,
}

impl AuditSummary {
    pub fn of(records: &[AuditRecord]) -> Self {
        let mut s = AuditSummary {
            total: records.len(),
            ..Default::default()
        };
        for r in records {
            if r.error.is_some() {
                s.errors += 1;
            } else if r.pass {
                s.passed += 1;
            } else {
                s.violations += 1;
            }
        }
        s
    }

    pub fn all_pass(&self) -> bool {
        self.violations == 0 && self.errors == 0
    }
}

/// Outcome of [`tightness_search`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TightnessResult {
    pub best_abs_z: f64,
    pub best_angle: f64,
    pub best_ratio: f64,
    pub evaluations: usize,
}

/// Coarse grid used by [`tightness_search`]: `(log-moduli, angles)` with
/// angles `2 pi j / n` so both real half-axes are included for even `n`.
pub fn coarse_grid(abs_z_range: (f64, f64), budget: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let coarse = budget / 2;
    let n_angles = ((coarse as f64 / 2.0).sqrt().floor() as usize).max(4) & !1;
    let n_moduli = (coarse / n_angles).max(1);
    let moduli = log_grid(abs_z_range.0, abs_z_range.1, n_moduli)?;
    let angles = (0..n_angles).map(|j| TAU * j as f64 / n_angles as f64).collect();
    Ok((moduli.into_iter().map(f64::ln).collect(), angles))
}

struct Incumbent<'a> {
    target: &'a AuditTarget,
    tol: f64,
    best: (f64, f64, f64),
    evaluations: usize,
}

impl Incumbent<'_> {
    /// Log of `|f| / envelope`; failures count as `-inf`.
    fn probe(&mut self, ln_r: f64, angle: f64) -> f64 {
        self.evaluations += 1;
        let z = self.target.point(ln_r.exp(), angle);
        let log_ratio = self
            .target
            .evaluate(z, self.tol)
            .and_then(|v| Ok(v.log_abs() - self.target.envelope_log(z)?))
            .unwrap_or(f64::NEG_INFINITY);
        if log_ratio > self.best.2 {
            self.best = (ln_r, angle, log_ratio);
        }
        log_ratio
    }

    fn golden(&mut self, mut lo: f64, mut hi: f64, evals: usize, along_modulus: bool) {
        const INV_PHI: f64 = 0.618_033_988_749_894_8;
        let (fixed_r, fixed_t) = (self.best.0, self.best.1);
        let f = |s: &mut Self, x: f64| {
            if along_modulus {
                s.probe(x, fixed_t)
            } else {
                s.probe(fixed_r, x)
            }
        };
        if evals < 2 || hi <= lo {
            return;
        }
        let mut x1 = hi - INV_PHI * (hi - lo);
        let mut x2 = lo + INV_PHI * (hi - lo);
        let mut f1 = f(self, x1);
        let mut f2 = f(self, x2);
        for _ in 2..evals {
            if f1 >= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - INV_PHI * (hi - lo);
                f1 = f(self, x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + INV_PHI * (hi - lo);
                f2 = f(self, x2);
            }
        }
    }
}

/// Largest observed `|f(z)| / envelope(|z|)`: a coarse log-grid scan over
/// `|z|` and angle with half the budget, then golden-section refinement in
/// `ln|z|` and in the angle around the best coarse cell. For Laurent
/// targets `|z|` is the distance from the center.
pub fn tightness_search(
    target: &AuditTarget,
    abs_z_range: (f64, f64),
    budget: usize,
    tol: f64,
) -> Result<TightnessResult> {
    if budget < 32 {
        return invalid(format!("tightness search needs a budget of at least 32, got {budget}"));
    }
    let (moduli, angles) = coarse_grid(abs_z_range, budget)?;
    let mut inc = Incumbent {
        target,
        tol,
        best: (moduli[0], angles[0], f64::NEG_INFINITY),
        evaluations: 0,
    };
    let mut best_cell = (0, 0);
    for (i, &ln_r) in moduli.iter().enumerate() {
        for (j, &t) in angles.iter().enumerate() {
            let before = inc.best.2;
            if inc.probe(ln_r, t) > before {
                best_cell = (i, j);
            }
        }
    }
    let remaining = budget.saturating_sub(inc.evaluations);
    let (i, _) = best_cell;
    let r_lo = moduli[i.saturating_sub(1)];
    let r_hi = moduli[(i + 1).min(moduli.len() - 1)];
    inc.golden(r_lo, r_hi, remaining / 2, true);
    let dt = PI / angles.len() as f64 * 2.0;
    let t0 = inc.best.1;
    let rest = budget.saturating_sub(inc.evaluations);
    inc.golden(t0 - dt, t0 + dt, rest, false);
    let (ln_r, angle, log_ratio) = inc.best;
    Ok(TightnessResult {
        best_abs_z: ln_r.exp(),
        best_angle: angle.rem_euclid(TAU),
        best_ratio: log_ratio.exp(),
        evaluations: inc.evaluations,
    })
}

fn require_unit_disk(z: Complex64) -> Result<()> {
    if !(z.norm() < 1.0) {
        return invalid(format!("identity requires |z| < 1, got |z| = {}", z.norm()));
    }
    Ok(())
}

/// Double-double reciprocal. `twofloat` division skips the fused
/// residual step and is only f64-accurate, so refine with one Newton step
/// built from multiplication and subtraction.
fn recip_dd(x: TwoFloat) -> TwoFloat {
    let r = TwoFloat::from(1.0 / x.hi());
    r + r * (TwoFloat::from(1.0) - x * r)
}

/// `sum_k (a;q)_k z^k / (q;q)_k` for `|z| < 1`, summed until the geometric
/// certificate with ratio bound `(1 + |a| q^k) |z| / (1 - q^{k+1})` meets
/// `tol` relative to the partial sum.
///
/// Terms and partial sums are carried in double-double arithmetic: for
/// negative `z` the sum is far smaller than its largest terms.
fn q_binomial_series(a: Complex64, q: QBase, z: Complex64, tol: f64) -> Result<Complex64> {
    let dd = |x: Complex64| Complex::new(TwoFloat::from(x.re), TwoFloat::from(x.im));
    let hi = |x: &Complex<TwoFloat>| Complex64::new(x.re.hi(), x.im.hi());
    let one = TwoFloat::from(1.0);
    let (a_dd, z_dd, q_dd) = (dd(a), dd(z), TwoFloat::from(q.value()));
    let mut term = Complex::new(one, TwoFloat::from(0.0));
    let mut sum = term;
    let mut qk = one;
    for _ in 0..crate::series::MAX_TERMS {
        let den = one - qk * q_dd;
        let rho = (1.0 + a.norm() * qk.hi()) * z.norm() / den.hi();
        if rho < 1.0 && hi(&term).norm() * rho / (1.0 - rho) <= tol * hi(&sum).norm().max(f64::MIN_POSITIVE) {
            return Ok(hi(&sum));
        }
        let factor = Complex::new(one, TwoFloat::from(0.0)) - a_dd * Complex::new(qk, TwoFloat::from(0.0));
        let inv = recip_dd(den);
        term = term * factor * z_dd * Complex::new(inv, TwoFloat::from(0.0));
        if term.re.hi() == 0.0 && term.im.hi() == 0.0 {
            return Ok(hi(&sum));
        }
        sum += term;
        qk *= q_dd;
    }
    Err(Error::NonConvergent("q-binomial series did not converge".into()))
}

/// Residual `|(z;q)_inf * sum_k z^k / (q;q)_k - 1|` of Euler's sum.
pub fn identity_euler(q: QBase, z: Complex64, tol: f64) -> Result<f64> {
    require_unit_disk(z)?;
    let product = pochhammer_infinite(z, q, tol)?.value;
    let series = q_binomial_series(Complex64::new(0.0, 0.0), q, z, tol)?;
    Ok((product * series - 1.0).norm())
}

/// Residual of the q-binomial theorem,
/// `|P - sum_k (a;q)_k z^k / (q;q)_k| / (1 + |P|)` with `P = (az;q)_inf / (z;q)_inf`.
/// The quotient can reach 1e14 inside the unit disk, so the difference is
/// measured against its scale.
pub fn identity_qbinomial_theorem(a: Complex64, q: QBase, z: Complex64, tol: f64) -> Result<f64> {
    require_unit_disk(z)?;
    let num = pochhammer_infinite(a * z, q, tol)?.value;
    let den = pochhammer_infinite(z, q, tol)?.value;
    let series = q_binomial_series(a, q, z, tol)?;
    let quotient = num / den;
    Ok((quotient - series).norm() / (1.0 + quotient.norm()))
}

/// Relative residual `|(q^l;q)_inf * sum_k q^{kl} / (q;q)_k - 1|`.
pub fn identity_ql_sum(l: f64, q: QBase, tol: f64) -> Result<f64> {
    if !(l > 0.0) {
        return invalid(format!("l must be positive, got {l}"));
    }
    let x = Complex64::new(q.pow(l), 0.0);
    let product = pochhammer_infinite(x, q, tol)?.value;
    let series = q_binomial_series(Complex64::new(0.0, 0.0), q, x, tol)?;
    Ok((product * series - 1.0).norm())
}

/// Residual of the Jacobi triple product
/// `Theta(z|q) = (q^2;q^2)_inf (-zq;q^2)_inf (-q/z;q^2)_inf`,
/// as `|Theta - product| / (1 + |Theta|)`.
pub fn identity_theta_triple_product(q: QBase, z: Complex64, tol: f64) -> Result<f64> {
    if z == Complex64::new(0.0, 0.0) {
        return invalid("triple product is undefined at z = 0");
    }
    let theta = eval_theta(q, z, tol)?.to_complex();
    let q2 = q.squared();
    let qv = q.value();
    let product = pochhammer_infinite(Complex64::new(qv * qv, 0.0), q2, tol)?.value
        * pochhammer_infinite(-z * qv, q2, tol)?.value
        * pochhammer_infinite(-qv / z, q2, tol)?.value;
    Ok((theta - product).norm() / (1.0 + theta.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: f64) -> QBase {
        QBase::new(v).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn reciprocal_is_double_double_accurate() {
        let one = TwoFloat::from(1.0);
        for x in [3.0, 0.054_572_141_805_083_3, 1.0 - 1e-9, 7.5e-300] {
            let x = TwoFloat::from(x) + TwoFloat::from(x * 1e-17);
            let err = (x * recip_dd(x) - one).hi().abs();
            assert!(err < 1e-30, "x = {x:?}, err = {err:e}");
        }
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("0.3-0.4i").unwrap(), c(0.3, -0.4));
        assert_eq!(parse_complex("1+0i").unwrap(), c(1.0, 0.0));
        assert_eq!(parse_complex("-2").unwrap(), c(-2.0, 0.0));
        assert_eq!(parse_complex("1e-3+2e+2i").unwrap(), c(1e-3, 200.0));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("2.5i").unwrap(), c(0.0, 2.5));
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("1+xi").is_err());
        let z = c(-0.1, 1e-300);
        assert_eq!(parse_complex(&format_complex(z)).unwrap(), z);
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-4, 1e4, 41).unwrap();
        assert_eq!(g.len(), 41);
        assert_eq!(g[40], 1e4);
        assert!((g[0] - 1e-4).abs() < 1e-18);
        assert!((g[20] - 1.0).abs() < 1e-14);
        assert_eq!(log_grid(1.0, 1.0, 1).unwrap(), vec![1.0]);
        assert!(log_grid(0.0, 1.0, 3).is_err());
        assert!(log_grid(1.0, 2.0, 0).is_err());
    }

    #[test]
    fn degenerate_plan_ratio() {
        let plan = SweepPlan::log_spaced(1.0, 1.0, 1, 1).unwrap();
        let records = audit_envelope(&plan, &AuditTarget::Aq(q(0.5))).unwrap();
        assert_eq!(records.len(), 1);
        let r = &records[0];
        assert!((r.re_z + 1.0).abs() < 1e-15);
        assert!((r.ratio - 2.172_668_750_849_663_7 / 4.117_922_917_307_581).abs() < 1e-12);
        assert!(r.pass);
    }

    #[test]
    fn digest_round_trip() {
        let targets = vec![
            AuditTarget::ConfluentF(
                ConfluentParams::new(vec![c(0.3, -1.25), c(0.0, 0.1)], vec![0.2], 1.5, q(0.7)).unwrap(),
            ),
            AuditTarget::Phi(PhiParams::new(vec![], vec![0.1, 0.9], q(0.3)).unwrap()),
            AuditTarget::Aq(q(0.5)),
            AuditTarget::Theta { q: q(0.3), alpha: 0.5 },
            AuditTarget::Laurent(LaurentSpec::theta(q(0.4), 0.25).unwrap()),
        ];
        for t in targets {
            let back = AuditTarget::from_digest(t.tag(), t.q(), &t.digest()).unwrap();
            assert_eq!(back.digest(), t.digest());
        }
    }

    #[test]
    fn plan_validation() {
        let mut plan = SweepPlan::log_spaced(1.0, 2.0, 2, 1).unwrap();
        plan.angle_count = 0;
        assert!(audit_envelope(&plan, &AuditTarget::Aq(q(0.5))).is_err());
    }

    #[test]
    fn evaluation_failures_are_marked() {
        let target = AuditTarget::Theta { q: q(0.5), alpha: 0.5 };
        let r = audit_point(&target, c(0.0, 0.0), DEFAULT_SLACK, DEFAULT_TOL);
        assert!(r.error.is_some() && !r.pass && !r.is_violation());
        let s = AuditSummary::of(&[r]);
        assert_eq!((s.errors, s.violations), (1, 0));
        assert!(!s.all_pass());
    }

    #[test]
    fn identity_preconditions() {
        assert!(identity_euler(q(0.5), c(1.0, 0.0), 1e-14).is_err());
        assert!(identity_qbinomial_theorem(c(0.1, 0.0), q(0.5), c(0.0, 1.2), 1e-14).is_err());
        assert!(identity_theta_triple_product(q(0.5), c(0.0, 0.0), 1e-14).is_err());
        assert!(identity_ql_sum(0.0, q(0.5), 1e-14).is_err());
    }

    #[test]
    fn identity_examples() {
        assert_eq!(identity_euler(q(0.5), c(0.0, 0.0), 1e-16).unwrap(), 0.0);
        assert!(identity_euler(q(0.5), c(0.5, 0.0), 1e-16).unwrap() <= 1e-12);
        assert!(identity_euler(q(0.9), c(-0.8, 0.0), 1e-16).unwrap() <= 1e-11);
        assert!(identity_qbinomial_theorem(c(0.5, 0.0), q(0.5), c(0.3, 0.0), 1e-16).unwrap() <= 1e-12);
        let a1 = identity_qbinomial_theorem(c(1.0, 0.0), q(0.5), c(0.7, 0.2), 1e-16).unwrap();
        assert!(a1 <= 1e-15);
        assert!(identity_ql_sum(1.0, q(0.5), 1e-16).unwrap() <= 1e-12);
        assert!(identity_ql_sum(0.5, q(0.9), 1e-16).unwrap() <= 1e-11);
        assert!(identity_ql_sum(200.0, q(0.5), 1e-16).unwrap() <= 1e-15);
        assert!(identity_theta_triple_product(q(0.5), c(1.0, 0.0), 1e-16).unwrap() <= 1e-12);
        assert!(identity_theta_triple_product(q(0.5), c(-2.0, 0.0), 1e-16).unwrap() <= 1e-12);
        assert!(identity_theta_triple_product(q(0.3), c(2.0, 1.0), 1e-16).unwrap() <= 1e-12);
    }

    #[test]
    fn euler_matches_binomial_theorem_at_zero() {
        let z = c(0.4, -0.3);
        let e = identity_euler(q(0.6), z, 1e-16).unwrap();
        let b = identity_qbinomial_theorem(c(0.0, 0.0), q(0.6), z, 1e-16).unwrap();
        let scale = pochhammer_infinite(z, q(0.6), 1e-16).unwrap().value.norm();
        assert!((e / scale - b).abs() < 1e-14);
    }
}
