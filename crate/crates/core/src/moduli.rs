//! Rate functions and quantitative forms of the convergence condition.
//!
//! All integer functions saturate at `u64::MAX`; callers that need to detect
//! overflow use the `checked_*` accessors, which report saturation as a
//! resource error.
//!
//! Thresholds are harmonic (`1/(k+1)`) everywhere except [`ThetaModulus`],
//! which uses dyadic thresholds `2^{-k}`. Since `2^{-k} ≤ 1/(k+1)`, a dyadic
//! index `k` is used for the harmonic index `k` unchanged.

use std::fmt;
use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{AccretiveOperator, GraphPair};
use crate::space::{dot, Point};

fn overflow(what: &str) -> Error {
    Error::Resource(format!("{what} overflowed u64"))
}

/// A total function ℕ → ℕ: a rate of convergence, a counterfunction, or a
/// rate of approximate zeros depending on context.
#[derive(Clone)]
pub struct RateFn {
    label: String,
    f: Arc<dyn Fn(u64) -> u64 + Send + Sync>,
}

impl RateFn {
    pub fn from_fn(label: impl Into<String>, f: impl Fn(u64) -> u64 + Send + Sync + 'static) -> Self {
        RateFn {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn id() -> Self {
        RateFn::from_fn("id", |n| n)
    }

    pub fn constant(c: u64) -> Self {
        RateFn::from_fn(format!("const({c})"), move |_| c)
    }

    /// `n ↦ a·n + b`.
    pub fn affine(a: u64, b: u64) -> Self {
        RateFn::from_fn(format!("affine({a},{b})"), move |n| {
            a.saturating_mul(n).saturating_add(b)
        })
    }

    /// `n ↦ n^p`.
    pub fn pow(p: u32) -> Self {
        RateFn::from_fn(format!("pow({p})"), move |n| n.saturating_pow(p))
    }

    /// Table lookup, clamped to the last entry. An empty table is `≡ 0`.
    pub fn table(values: Vec<u64>) -> Self {
        let label = format!("table(len={})", values.len());
        RateFn::from_fn(label, move |n| {
            if values.is_empty() {
                0
            } else {
                let i = usize::try_from(n).unwrap_or(usize::MAX).min(values.len() - 1);
                values[i]
            }
        })
    }

    pub fn at(&self, n: u64) -> u64 {
        (self.f)(n)
    }

    pub fn checked_at(&self, n: u64) -> Result<u64> {
        match self.at(n) {
            u64::MAX => Err(overflow(&self.label)),
            v => Ok(v),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Borrowed closure view, for combinators taking `&dyn Fn(u64) -> u64`.
    pub fn as_fn(&self) -> impl Fn(u64) -> u64 + '_ {
        move |n| self.at(n)
    }
}

impl fmt::Debug for RateFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RateFn({})", self.label)
    }
}

/// Serializable rate-function expression:
/// `"id" | {"const": c} | {"affine": [a, b]} | {"pow": p} | {"table": [v0, ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RateExpr {
    Keyword(RateKeyword),
    Const {
        #[serde(rename = "const")]
        value: u64,
    },
    Affine {
        affine: [u64; 2],
    },
    Pow {
        pow: u32,
    },
    Table {
        table: Vec<u64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateKeyword {
    Id,
}

impl RateExpr {
    pub fn to_rate(&self) -> RateFn {
        match self {
            RateExpr::Keyword(RateKeyword::Id) => RateFn::id(),
            RateExpr::Const { value } => RateFn::constant(*value),
            RateExpr::Affine { affine: [a, b] } => RateFn::affine(*a, *b),
            RateExpr::Pow { pow } => RateFn::pow(*pow),
            RateExpr::Table { table } => RateFn::table(table.clone()),
        }
    }

    /// Short human-readable form used in reports.
    pub fn describe(&self) -> String {
        match self {
            RateExpr::Keyword(RateKeyword::Id) => "id".into(),
            RateExpr::Const { value } => format!("const({value})"),
            RateExpr::Affine { affine: [a, b] } => format!("{a}n+{b}"),
            RateExpr::Pow { pow } => format!("n^{pow}"),
            RateExpr::Table { table } => format!("table{table:?}"),
        }
    }
}

/// A total function ℕ² → ℕ, `(k, m) ↦` end of the window starting at `m`.
#[derive(Clone)]
pub struct LiminfRateFn {
    f: Arc<dyn Fn(u64, u64) -> u64 + Send + Sync>,
}

impl LiminfRateFn {
    pub fn from_fn(f: impl Fn(u64, u64) -> u64 + Send + Sync + 'static) -> Self {
        LiminfRateFn { f: Arc::new(f) }
    }

    pub fn at(&self, k: u64, m: u64) -> u64 {
        (self.f)(k, m)
    }
}

/// Full modulus `Ω^f(K, k)`: if `y ∈ Ax`, `‖x‖, ‖y‖ ≤ K` and
/// `|⟨y, x − Px⟩| ≤ 1/(Ω^f(K,k)+1)` then `‖x − Px‖ ≤ 1/(k+1)`.
#[derive(Clone)]
pub struct FullModulus {
    label: String,
    f: Arc<dyn Fn(u64, u64) -> u64 + Send + Sync>,
}

impl FullModulus {
    pub fn from_fn(
        label: impl Into<String>,
        f: impl Fn(u64, u64) -> u64 + Send + Sync + 'static,
    ) -> Self {
        FullModulus {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn at(&self, bound: u64, k: u64) -> u64 {
        (self.f)(bound, k)
    }

    pub fn checked_at(&self, bound: u64, k: u64) -> Result<u64> {
        match self.at(bound, k) {
            u64::MAX => Err(overflow(&self.label)),
            v => Ok(v),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for FullModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FullModulus({})", self.label)
    }
}

type SimpleFn = dyn Fn(u64, &RateFn) -> LiminfRateFn + Send + Sync;
type WeakFn = dyn Fn(u64, &RateFn) -> RateFn + Send + Sync;

/// Simple modulus: `(K, φ)` ↦ liminf-rate for `‖x_n − Px_n‖`.
#[derive(Clone)]
pub struct SimpleModulus {
    label: String,
    f: Arc<SimpleFn>,
}

impl SimpleModulus {
    pub fn from_fn(
        label: impl Into<String>,
        f: impl Fn(u64, &RateFn) -> LiminfRateFn + Send + Sync + 'static,
    ) -> Self {
        SimpleModulus {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn apply(&self, bound: u64, phi: &RateFn) -> LiminfRateFn {
        (self.f)(bound, phi)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for SimpleModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SimpleModulus({})", self.label)
    }
}

/// Weak modulus: `(K, φ)` ↦ rate of approximate zeros for `‖x_n − Px_n‖`.
#[derive(Clone)]
pub struct WeakModulus {
    label: String,
    f: Arc<WeakFn>,
}

impl WeakModulus {
    pub fn from_fn(
        label: impl Into<String>,
        f: impl Fn(u64, &RateFn) -> RateFn + Send + Sync + 'static,
    ) -> Self {
        WeakModulus {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn apply(&self, bound: u64, phi: &RateFn) -> RateFn {
        (self.f)(bound, phi)
    }

    /// `Ω^w(K, id)(k)`, the only instantiation the rate theorems need.
    pub fn at_id(&self, bound: u64, k: u64) -> u64 {
        self.apply(bound, &RateFn::id()).at(k)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for WeakModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WeakModulus({})", self.label)
    }
}

/// Modulus of accretivity at zero `Θ_K(k)`, dyadic scale.
#[derive(Clone)]
pub struct ThetaModulus {
    label: String,
    f: Arc<dyn Fn(u64, u64) -> u64 + Send + Sync>,
}

impl ThetaModulus {
    pub fn from_fn(
        label: impl Into<String>,
        f: impl Fn(u64, u64) -> u64 + Send + Sync + 'static,
    ) -> Self {
        ThetaModulus {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn at(&self, bound: u64, k: u64) -> u64 {
        (self.f)(bound, k)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

fn truncated_square_law(scale: u64, k: u64) -> u64 {
    scale
        .saturating_mul((k + 1).saturating_mul(k + 1))
        .saturating_sub(1)
}

/// `Ω^f_a(K, k) = a(k+1)² ∸ 1`, valid whenever the strong-accretivity
/// constant satisfies `α ≥ 1/a`.
pub fn full_strongly_accretive(a: u64) -> Result<FullModulus> {
    if a == 0 {
        return Err(Error::OutOfRange {
            what: "strong accretivity index a",
            value: 0.0,
        });
    }
    Ok(FullModulus::from_fn(
        format!("strongly-accretive(a={a})"),
        move |_, k| truncated_square_law(a, k),
    ))
}

/// `Ω^f_Λ(K, k) = Λ(k+1)² ∸ 1` where `1/Λ` bounds the spectrum from below.
pub fn full_laplacian(lambda: u64) -> Result<FullModulus> {
    if lambda == 0 {
        return Err(Error::OutOfRange {
            what: "eigenvalue index Lambda",
            value: 0.0,
        });
    }
    Ok(FullModulus::from_fn(
        format!("laplacian(Lambda={lambda})"),
        move |_, k| truncated_square_law(lambda, k),
    ))
}

/// Smallest admissible `Λ` for a given smallest eigenvalue.
pub fn laplacian_index(lambda_min: f64) -> Result<u64> {
    if !(lambda_min > 0.0) {
        return Err(Error::OutOfRange {
            what: "smallest eigenvalue",
            value: lambda_min,
        });
    }
    Ok((1.0 / lambda_min).ceil().max(1.0) as u64)
}

/// `Ω^f(K, k) = (k+1)⁴ − 1` for the quartic subdifferential.
pub fn full_quartic() -> FullModulus {
    FullModulus::from_fn("quartic", |_, k| {
        (k + 1).saturating_pow(4).saturating_sub(1)
    })
}

/// `Ω^f(K, k) = 2^{Θ_{K+Z}(k)}` with `Z ≥ ‖z‖` for the zero `z`.
///
/// Exponents above 62 saturate; [`FullModulus::checked_at`] reports them.
pub fn full_from_theta(theta: ThetaModulus, zero_norm_bound: u64) -> FullModulus {
    let label = format!("theta({}, Z={zero_norm_bound})", theta.label());
    FullModulus::from_fn(label, move |bound, k| {
        let e = theta.at(bound.saturating_add(zero_norm_bound), k);
        if e > 62 {
            u64::MAX
        } else {
            1u64 << e
        }
    })
}

/// `Ω(K, φ)(k, m) = max{m, φ(Ω^f(K, k))}`.
pub fn simple_from_full(full: FullModulus) -> SimpleModulus {
    let label = format!("simple<{}>", full.label());
    SimpleModulus::from_fn(label, move |bound, phi| {
        let full = full.clone();
        let phi = phi.clone();
        LiminfRateFn::from_fn(move |k, m| m.max(phi.at(full.at(bound, k))))
    })
}

/// `Ω^w(K, φ)(k) = Ω(K, φ)(k, 0)`.
pub fn weak_from_simple(simple: SimpleModulus) -> WeakModulus {
    let label = format!("weak<{}>", simple.label());
    WeakModulus::from_fn(label.clone(), move |bound, phi| {
        let window = simple.apply(bound, phi);
        RateFn::from_fn(format!("{label}(K={bound},{})", phi.label()), move |k| {
            window.at(k, 0)
        })
    })
}

/// Full → simple → weak.
pub fn weak_from_full(full: FullModulus) -> WeakModulus {
    weak_from_simple(simple_from_full(full))
}

/// Where graph points are drawn from when checking a full modulus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphSampling {
    /// Seeded uniform samples from the `K`-ball.
    Random { samples: usize },
    /// Equispaced `x` in `[lo, hi]` (one-dimensional operators only).
    Grid { lo: f64, hi: f64, step: f64 },
}

/// A graph point at which the full-modulus implication failed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusViolation {
    pub k: u64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `|⟨y, x − Px⟩|`.
    pub premise: f64,
    /// `‖x − Px‖`.
    pub distance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FullModulusReport {
    pub operator: String,
    pub modulus: String,
    pub bound: u64,
    pub k_max: u64,
    pub pairs_checked: usize,
    /// Per `k`: number of pairs meeting the premise, largest distance among them.
    pub per_k: Vec<(u64, usize, f64)>,
    pub violations: Vec<ModulusViolation>,
}

impl FullModulusReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the full-modulus implication on sampled graph points.
///
/// The premise is tested exactly, `|⟨y, x − Px⟩| ≤ 1/(Ω^f(K,k)+1)`; the
/// conclusion gets the additive slack, `‖x − Px‖ ≤ 1/(k+1) + tol`.
pub fn check_full_modulus(
    op: &dyn AccretiveOperator,
    full: &FullModulus,
    bound: u64,
    k_max: u64,
    sampling: &GraphSampling,
    rng: &mut dyn RngCore,
    tol: f64,
) -> Result<FullModulusReport> {
    let radius = bound as f64;
    let pairs: Vec<GraphPair> = match *sampling {
        GraphSampling::Random { samples } => (0..samples)
            .map(|_| {
                op.sample_graph(rng, radius).ok_or_else(|| {
                    Error::Unsupported(format!("{} has no graph samples", op.name()))
                })
            })
            .collect::<Result<_>>()?,
        GraphSampling::Grid { lo, hi, step } => {
            if op.dim() != 1 {
                return Err(Error::Unsupported(
                    "grid sampling needs a one-dimensional operator".into(),
                ));
            }
            if !(step > 0.0) || hi < lo {
                return Err(Error::OutOfRange {
                    what: "grid step",
                    value: step,
                });
            }
            let n = ((hi - lo) / step).round() as usize;
            let mut pairs = Vec::with_capacity(n + 1);
            for i in 0..=n {
                let x = Point::scalar(lo + i as f64 * step);
                let y = op
                    .value(&x)
                    .ok_or_else(|| Error::Unsupported(format!("{} has no value map", op.name())))?;
                if x.norm() <= radius && y.norm() <= radius {
                    pairs.push(GraphPair { x, y });
                }
            }
            pairs
        }
    };

    let thresholds: Vec<(u64, f64, f64)> = (0..=k_max)
        .map(|k| {
            let omega = full.checked_at(bound, k)?;
            Ok((k, 1.0 / (omega as f64 + 1.0), 1.0 / (k as f64 + 1.0)))
        })
        .collect::<Result<_>>()?;
    let mut per_k: Vec<(u64, usize, f64)> = thresholds.iter().map(|&(k, _, _)| (k, 0, 0.0)).collect();
    let mut violations = Vec::new();
    for pair in &pairs {
        let residual = &pair.x - &op.zero_projection(&pair.x);
        let premise = dot(&pair.y, &residual).abs();
        let distance = residual.norm();
        for (slot, &(k, premise_cap, target)) in per_k.iter_mut().zip(&thresholds) {
            if premise <= premise_cap {
                slot.1 += 1;
                slot.2 = slot.2.max(distance);
                if distance > target + tol {
                    violations.push(ModulusViolation {
                        k,
                        x: pair.x.coords().to_vec(),
                        y: pair.y.coords().to_vec(),
                        premise,
                        distance,
                    });
                }
            }
        }
    }
    Ok(FullModulusReport {
        operator: op.name(),
        modulus: full.label().to_string(),
        bound,
        k_max,
        pairs_checked: pairs.len(),
        per_k,
        violations,
    })
}

/// Outcome of checking a modulus against one sequence.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SequenceVerdict {
    Passed,
    /// The caller-supplied `φ` is not a rate of convergence for
    /// `|⟨y_n, x_n − Px_n⟩|` on the given sequence, or the bound `K` fails.
    PremiseNotCertified { reason: String },
    /// Windows `(k, m)` (or indices `k`) where no approximate zero was found.
    Violations { cells: Vec<(u64, u64)> },
}

impl SequenceVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, SequenceVerdict::Passed)
    }
}

struct SequenceProfile {
    premise: Vec<f64>,
    distance: Vec<f64>,
}

fn profile(op: &dyn AccretiveOperator, seq: &[GraphPair]) -> SequenceProfile {
    let mut premise = Vec::with_capacity(seq.len());
    let mut distance = Vec::with_capacity(seq.len());
    for pair in seq {
        let residual = &pair.x - &op.zero_projection(&pair.x);
        premise.push(dot(&pair.y, &residual).abs());
        distance.push(residual.norm());
    }
    SequenceProfile { premise, distance }
}

/// Empirical certification of the premise: bounds `K` hold and `φ` is a rate
/// of convergence for the premise sequence over every `k` whose threshold
/// index `φ(k)` falls inside the sequence.
fn certify_premise(
    seq: &[GraphPair],
    prof: &SequenceProfile,
    phi: &RateFn,
    bound: u64,
    k_limit: u64,
    tol: f64,
) -> Option<String> {
    let radius = bound as f64 + tol;
    if let Some(n) = seq
        .iter()
        .position(|p| p.x.norm() > radius || p.y.norm() > radius)
    {
        return Some(format!("element {n} exceeds the bound K={bound}"));
    }
    // suffix maxima of the premise sequence
    let mut tail = prof.premise.clone();
    for i in (0..tail.len().saturating_sub(1)).rev() {
        tail[i] = tail[i].max(tail[i + 1]);
    }
    for k in 0..=k_limit {
        let start = phi.at(k);
        if start >= seq.len() as u64 {
            continue;
        }
        let worst = tail[start as usize];
        if worst > 1.0 / (k as f64 + 1.0) + tol {
            return Some(format!(
                "phi({k}) = {start} but the premise reaches {worst:e} afterwards"
            ));
        }
    }
    None
}

/// Checks that `Ω(K, φ)` is a liminf-rate for `‖x_n − Px_n‖` on `seq`, for
/// `k ≤ k_max` and window starts `m ≤ m_max`.
#[allow(clippy::too_many_arguments)]
pub fn check_simple_modulus(
    op: &dyn AccretiveOperator,
    simple: &SimpleModulus,
    seq: &[GraphPair],
    phi: &RateFn,
    bound: u64,
    k_max: u64,
    m_max: u64,
    tol: f64,
) -> Result<SequenceVerdict> {
    let window = simple.apply(bound, phi);
    let mut needed = 0;
    for k in 0..=k_max {
        for m in 0..=m_max {
            needed = needed.max(window.at(k, m));
        }
    }
    if needed >= seq.len() as u64 {
        return Err(Error::SequenceTooShort {
            len: seq.len(),
            needed,
        });
    }
    let prof = profile(op, seq);
    if let Some(reason) = certify_premise(seq, &prof, phi, bound, seq.len() as u64, tol) {
        return Ok(SequenceVerdict::PremiseNotCertified { reason });
    }
    let mut cells = Vec::new();
    for k in 0..=k_max {
        let target = 1.0 / (k as f64 + 1.0) + tol;
        for m in 0..=m_max {
            let end = window.at(k, m);
            let hit = (m..=end).any(|n| prof.distance[n as usize] <= target);
            if !hit {
                cells.push((k, m));
            }
        }
    }
    Ok(if cells.is_empty() {
        SequenceVerdict::Passed
    } else {
        SequenceVerdict::Violations { cells }
    })
}

/// Checks that `Ω^w(K, φ)` is a rate of approximate zeros for
/// `‖x_n − Px_n‖` on `seq`, for `k ≤ k_max`.
pub fn check_weak_modulus(
    op: &dyn AccretiveOperator,
    weak: &WeakModulus,
    seq: &[GraphPair],
    phi: &RateFn,
    bound: u64,
    k_max: u64,
    tol: f64,
) -> Result<SequenceVerdict> {
    let rate = weak.apply(bound, phi);
    let needed = (0..=k_max).map(|k| rate.at(k)).max().unwrap_or(0);
    if needed >= seq.len() as u64 {
        return Err(Error::SequenceTooShort {
            len: seq.len(),
            needed,
        });
    }
    let prof = profile(op, seq);
    if let Some(reason) = certify_premise(seq, &prof, phi, bound, seq.len() as u64, tol) {
        return Ok(SequenceVerdict::PremiseNotCertified { reason });
    }
    let cells: Vec<(u64, u64)> = (0..=k_max)
        .filter(|&k| {
            let target = 1.0 / (k as f64 + 1.0) + tol;
            !(0..=rate.at(k)).any(|n| prof.distance[n as usize] <= target)
        })
        .map(|k| (k, 0))
        .collect();
    Ok(if cells.is_empty() {
        SequenceVerdict::Passed
    } else {
        SequenceVerdict::Violations { cells }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{make_quartic, make_scaled_identity};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn strongly_accretive_values() {
        let m1 = full_strongly_accretive(1).unwrap();
        assert_eq!(m1.at(7, 0), 0);
        assert_eq!(m1.at(7, 1), 3);
        assert_eq!(full_strongly_accretive(3).unwrap().at(0, 2), 26);
        assert!(full_strongly_accretive(0).is_err());
    }

    #[test]
    fn laplacian_values() {
        assert_eq!(full_laplacian(1).unwrap().at(0, 0), 0);
        assert_eq!(full_laplacian(2).unwrap().at(0, 3), 31);
        let lambda_min = 2.0 - 2.0 * (std::f64::consts::PI / 5.0).cos();
        assert_eq!(laplacian_index(lambda_min).unwrap(), 3);
    }

    #[test]
    fn quartic_values() {
        let q = full_quartic();
        assert_eq!(q.at(0, 0), 0);
        assert_eq!(q.at(0, 1), 15);
        assert_eq!(q.at(0, 2), 80);
    }

    #[test]
    fn theta_conversion_values() {
        let zero = full_from_theta(ThetaModulus::from_fn("0", |_, _| 0), 0);
        assert_eq!(zero.at(5, 5), 1);
        let lin = full_from_theta(ThetaModulus::from_fn("k", |_, k| k), 0);
        assert_eq!(lin.at(0, 3), 8);
        let mixed = full_from_theta(ThetaModulus::from_fn("K+k", |b, k| b + k), 1);
        assert_eq!(mixed.at(2, 1), 16);
        let huge = full_from_theta(ThetaModulus::from_fn("63", |_, _| 63), 0);
        assert!(matches!(huge.checked_at(0, 0), Err(Error::Resource(_))));
        let edge = full_from_theta(ThetaModulus::from_fn("62", |_, _| 62), 0);
        assert_eq!(edge.checked_at(0, 0).unwrap(), 1 << 62);
    }

    #[test]
    fn conversion_chain_values() {
        let zero = FullModulus::from_fn("0", |_, _| 0);
        assert_eq!(simple_from_full(zero.clone()).apply(3, &RateFn::id()).at(5, 7), 7);
        assert_eq!(
            simple_from_full(full_quartic()).apply(3, &RateFn::id()).at(1, 0),
            15
        );
        let double = RateFn::affine(2, 0);
        assert_eq!(
            simple_from_full(full_strongly_accretive(1).unwrap())
                .apply(3, &double)
                .at(1, 1),
            6
        );

        assert_eq!(weak_from_full(zero).apply(3, &RateFn::id()).at(9), 0);
        assert_eq!(weak_from_full(full_quartic()).at_id(3, 1), 15);
        let weak = weak_from_full(full_strongly_accretive(1).unwrap());
        for k in 0..=10 {
            assert_eq!(weak.at_id(4, k), (k + 1) * (k + 1) - 1);
        }
    }

    #[test]
    fn rate_expr_grammar() {
        let parse = |s: &str| serde_json::from_str::<RateExpr>(s).unwrap().to_rate();
        assert_eq!(parse(r#""id""#).at(9), 9);
        assert_eq!(parse(r#"{"const": 4}"#).at(9), 4);
        assert_eq!(parse(r#"{"affine": [2, 1]}"#).at(3), 7);
        assert_eq!(parse(r#"{"pow": 2}"#).at(5), 25);
        let table = parse(r#"{"table": [3, 1, 4]}"#);
        assert_eq!((table.at(0), table.at(2), table.at(100)), (3, 4, 4));
        assert!(serde_json::from_str::<RateExpr>(r#""sqrt""#).is_err());
        let expr = RateExpr::Affine { affine: [2, 0] };
        assert_eq!(serde_json::to_string(&expr).unwrap(), r#"{"affine":[2,0]}"#);
    }

    #[test]
    fn saturation_is_reported() {
        let r = RateFn::pow(5);
        assert!(r.checked_at(1 << 20).is_err());
        assert_eq!(r.checked_at(3).unwrap(), 243);
    }

    #[test]
    fn full_modulus_scaled_identity_passes() {
        let op = make_scaled_identity(1.0, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let report = check_full_modulus(
            &op,
            &full_strongly_accretive(1).unwrap(),
            10,
            10,
            &GraphSampling::Random { samples: 2000 },
            &mut rng,
            1e-9,
        )
        .unwrap();
        assert!(report.passed());
        assert_eq!(report.pairs_checked, 2000);
    }

    #[test]
    fn quartic_wrong_modulus_is_caught_near_threshold() {
        let op = make_quartic();
        let wrong = FullModulus::from_fn("k", |_, k| k);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let report = check_full_modulus(
            &op,
            &wrong,
            500,
            5,
            &GraphSampling::Grid {
                lo: -6.0,
                hi: 6.0,
                step: 1e-3,
            },
            &mut rng,
            1e-9,
        )
        .unwrap();
        assert!(!report.passed());
        // counterexamples sit just beyond x = 1 + 1/(k+1)
        let v = report.violations.iter().find(|v| v.k == 1 && v.x[0] > 0.0).unwrap();
        assert!(v.x[0] > 1.5 && v.x[0] < 1.6);
    }

    #[test]
    fn simple_modulus_constant_zero_sequence() {
        let op = make_quartic();
        let seq = vec![
            GraphPair {
                x: Point::scalar(0.5),
                y: Point::scalar(0.0),
            };
            50
        ];
        let simple = simple_from_full(full_quartic());
        let verdict =
            check_simple_modulus(&op, &simple, &seq, &RateFn::constant(0), 1, 3, 10, 1e-9).unwrap();
        assert!(verdict.passed());
    }

    #[test]
    fn stalled_sequence_is_flagged() {
        let op = make_scaled_identity(1.0, 1).unwrap();
        let seq = vec![
            GraphPair {
                x: Point::scalar(1.0),
                y: Point::scalar(1.0),
            };
            40
        ];
        let simple = simple_from_full(full_strongly_accretive(1).unwrap());
        let verdict =
            check_simple_modulus(&op, &simple, &seq, &RateFn::id(), 1, 1, 2, 1e-9).unwrap();
        assert!(matches!(verdict, SequenceVerdict::PremiseNotCertified { .. }));
    }

    #[test]
    fn short_sequence_is_a_usage_error() {
        let op = make_quartic();
        let seq = vec![
            GraphPair {
                x: Point::scalar(0.0),
                y: Point::scalar(0.0),
            };
            5
        ];
        let simple = simple_from_full(full_quartic());
        let err = check_simple_modulus(&op, &simple, &seq, &RateFn::id(), 1, 2, 0, 1e-9).unwrap_err();
        assert!(matches!(err, Error::SequenceTooShort { .. }));
    }
}
