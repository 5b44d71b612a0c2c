//! The semigroup `S(t)` generated by an accretive operator.
//!
//! `S(t)x` is approximated by the exponential formula
//! `J_{t/n}^n x → S(t)x`, with the a-priori certificate
//! `‖J_{t/n}^n x − S(t)x‖ ≤ 2t‖v‖/√n` for `v ∈ Ax`.
//! Closed-form flows of the linear and quartic instances act as independent
//! oracles.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::moduli::RateFn;
use crate::operators::{AccretiveOperator, ClosedForm};
use crate::space::Point;

const MAX_STEPS: u64 = 1 << 30;

/// `J_{t/n}` applied `n` times to `x`.
pub fn exponential_formula(op: &dyn AccretiveOperator, x: &Point, t: f64, n: u64) -> Point {
    let gamma = t / n as f64;
    let mut z = x.clone();
    for _ in 0..n {
        z = op.resolvent(gamma, &z);
    }
    z
}

/// `2t‖v‖/√n`.
pub fn cl_certificate(t: f64, v_norm: f64, n: u64) -> f64 {
    2.0 * t * v_norm / (n as f64).sqrt()
}

/// A point together with a certified bound on its distance to the exact value.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub point: Point,
    pub err_bound: f64,
    pub steps: u64,
}

/// Evaluates `S(t)x` by the exponential formula, doubling `n` from 4 until
/// the certificate is at most `tol`.
pub fn evaluate_semigroup(
    op: &dyn AccretiveOperator,
    x: &Point,
    t: f64,
    tol: f64,
) -> Result<Evaluation> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::OutOfRange {
            what: "time",
            value: t,
        });
    }
    if !(tol > 0.0) {
        return Err(Error::OutOfRange {
            what: "tolerance",
            value: tol,
        });
    }
    if t == 0.0 {
        return Ok(Evaluation {
            point: x.clone(),
            err_bound: 0.0,
            steps: 0,
        });
    }
    let v = op
        .value(x)
        .ok_or_else(|| Error::Unsupported(format!("{} has no value map", op.name())))?;
    let v_norm = v.norm();
    let mut n = 4;
    while cl_certificate(t, v_norm, n) > tol {
        n *= 2;
        if n > MAX_STEPS {
            return Err(Error::Resource(format!(
                "exponential formula needs more than 2^30 steps for t={t}, tol={tol:e}"
            )));
        }
    }
    Ok(Evaluation {
        point: exponential_formula(op, x, t, n),
        err_bound: cl_certificate(t, v_norm, n),
        steps: n,
    })
}

/// Quartic flow `u′ = −f′(u)`: stationary on `[−1, 1]`, otherwise
/// `u(t) = 1 + ((u₀−1)^{−2} + 8t)^{−1/2}` for `u₀ > 1`, mirrored below `−1`.
pub fn quartic_flow(x0: f64, t: f64) -> f64 {
    if x0.abs() <= 1.0 {
        return x0;
    }
    let d = x0.abs() - 1.0;
    let d_t = 1.0 / (1.0 / (d * d) + 8.0 * t).sqrt();
    x0.signum() * (1.0 + d_t)
}

/// Exact `S(t)x` for operators with a closed-form flow.
pub fn evaluate_oracle(op: &dyn AccretiveOperator, x: &Point, t: f64) -> Result<Point> {
    if !(t >= 0.0) {
        return Err(Error::OutOfRange {
            what: "time",
            value: t,
        });
    }
    match op.closed_form() {
        Some(ClosedForm::ScaledIdentity { alpha }) => Ok(x.scale((-alpha * t).exp())),
        Some(ClosedForm::Linear { matrix }) => {
            let eig = matrix.symmetric_eigen();
            let coeffs = eig.eigenvectors.transpose() * DVector::from_column_slice(x.coords());
            let decayed = DVector::from_iterator(
                coeffs.len(),
                coeffs
                    .iter()
                    .zip(eig.eigenvalues.iter())
                    .map(|(c, lambda)| c * (-lambda * t).exp()),
            );
            let out = &eig.eigenvectors * decayed;
            Ok(Point::from_vec(out.iter().copied().collect()))
        }
        Some(ClosedForm::Quartic) => Ok(x.map(|c| quartic_flow(c, t))),
        None => Err(Error::Unsupported(format!(
            "{} has no closed-form flow",
            op.name()
        ))),
    }
}

/// How `S(t)x` is computed during verification.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowEvaluator {
    /// Closed-form flow, error bound zero.
    Oracle,
    /// Exponential formula with the given per-evaluation certificate.
    CrandallLiggett { tol: f64 },
}

impl FlowEvaluator {
    pub fn evaluate(&self, op: &dyn AccretiveOperator, x: &Point, t: f64) -> Result<Evaluation> {
        match *self {
            FlowEvaluator::Oracle => Ok(Evaluation {
                point: evaluate_oracle(op, x, t)?,
                err_bound: 0.0,
                steps: 0,
            }),
            FlowEvaluator::CrandallLiggett { tol } => evaluate_semigroup(op, x, t, tol),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub point: Point,
    pub err_bound: f64,
}

/// Samples of `t ↦ S(t)x` with certified error bounds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub operator: String,
    pub initial: Point,
    pub samples: Vec<TrajectorySample>,
}

impl Trajectory {
    pub fn max_err(&self) -> f64 {
        self.samples.iter().map(|s| s.err_bound).fold(0.0, f64::max)
    }
}

/// Evaluates the flow on a sorted time grid, stepping from one grid point to
/// the next via `S(t+s) = S(t)S(s)`. Since `S(t)` is nonexpansive, per-step
/// certificates add up.
pub fn trajectory(
    op: &dyn AccretiveOperator,
    x: &Point,
    grid: &[f64],
    evaluator: FlowEvaluator,
) -> Result<Trajectory> {
    if grid.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::OutOfRange {
            what: "grid time",
            value: grid.iter().copied().find(|t| !(*t >= 0.0)).unwrap_or(f64::NAN),
        });
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("grid", "times must be strictly increasing"));
    }
    let mut samples = Vec::with_capacity(grid.len());
    let (mut t_prev, mut z, mut err) = (0.0, x.clone(), 0.0);
    for &t in grid {
        let point = match evaluator {
            FlowEvaluator::Oracle => evaluate_oracle(op, x, t)?,
            FlowEvaluator::CrandallLiggett { tol } => {
                let step = evaluate_semigroup(op, &z, t - t_prev, tol)?;
                err += step.err_bound;
                step.point
            }
        };
        samples.push(TrajectorySample {
            t,
            point: point.clone(),
            err_bound: err,
        });
        t_prev = t;
        z = point;
    }
    Ok(Trajectory {
        operator: op.name(),
        initial: x.clone(),
        samples,
    })
}

type PathFn = Arc<dyn Fn(f64) -> Result<Evaluation> + Send + Sync>;
type EnvelopeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// An almost-orbit `u` of the semigroup together with a rate `Φ` on the
/// almost-orbit condition and a bound `B ≥ ‖u(t) − p‖`.
#[derive(Clone)]
pub struct AlmostOrbit {
    op: Arc<dyn AccretiveOperator>,
    evaluator: FlowEvaluator,
    path: PathFn,
    rate_phi: RateFn,
    /// Known bound on `sup_t ‖u(s+t) − S(t)u(s)‖` as a function of `s`.
    defect_envelope: Option<EnvelopeFn>,
    base: Point,
    bound_b: u64,
}

impl AlmostOrbit {
    /// Wraps a user-supplied path. `B` is computed by [`almost_orbit_bound_b`]
    /// on `bound_grid`.
    pub fn new(
        op: Arc<dyn AccretiveOperator>,
        evaluator: FlowEvaluator,
        path: impl Fn(f64) -> Result<Evaluation> + Send + Sync + 'static,
        rate_phi: RateFn,
        base: Point,
        bound_grid: &[f64],
    ) -> Result<Self> {
        let mut orbit = AlmostOrbit {
            op,
            evaluator,
            path: Arc::new(path),
            rate_phi,
            defect_envelope: None,
            base,
            bound_b: 1,
        };
        orbit.bound_b = almost_orbit_bound_b(&orbit, &orbit.base.clone(), bound_grid)?;
        Ok(orbit)
    }

    pub fn evaluate(&self, t: f64) -> Result<Evaluation> {
        (self.path)(t)
    }

    pub fn operator(&self) -> &dyn AccretiveOperator {
        self.op.as_ref()
    }

    pub fn operator_arc(&self) -> Arc<dyn AccretiveOperator> {
        Arc::clone(&self.op)
    }

    pub fn evaluator(&self) -> FlowEvaluator {
        self.evaluator
    }

    pub fn rate_phi(&self) -> &RateFn {
        &self.rate_phi
    }

    pub fn bound_b(&self) -> u64 {
        self.bound_b
    }

    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn defect_envelope(&self, s: f64) -> Option<f64> {
        self.defect_envelope.as_ref().map(|f| f(s))
    }
}

impl fmt::Debug for AlmostOrbit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AlmostOrbit")
            .field("operator", &self.op.name())
            .field("rate_phi", &self.rate_phi)
            .field("base", &self.base)
            .field("bound_b", &self.bound_b)
            .finish()
    }
}

/// `Φ(k) = ⌈2c(k+1) − 1⌉₊`, the smallest `s` with `2c/(1+s) ≤ 1/(k+1)`.
pub fn harmonic_rate(c: f64) -> RateFn {
    RateFn::from_fn(format!("harmonic(c={c})"), move |k| {
        let s = (2.0 * c * (k as f64 + 1.0) - 1.0).ceil();
        if s <= 0.0 {
            0
        } else if s >= u64::MAX as f64 {
            u64::MAX
        } else {
            s as u64
        }
    })
}

/// `u(t) = S(t)x + (c/(1+t))·e`.
///
/// The defect satisfies `‖u(t+s) − S(t)u(s)‖ ≤ c/(1+t+s) + c/(1+s) ≤ 2c/(1+s)`,
/// which gives the rate [`harmonic_rate`]. The base point is `Px`.
pub fn make_almost_orbit(
    op: Arc<dyn AccretiveOperator>,
    x: &Point,
    c: f64,
    direction: &Point,
    evaluator: FlowEvaluator,
) -> Result<AlmostOrbit> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::OutOfRange {
            what: "perturbation size c",
            value: c,
        });
    }
    if direction.dim() != x.dim() || x.dim() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: direction.dim(),
        });
    }
    let len = direction.norm();
    if (len - 1.0).abs() > 1e-12 {
        return Err(Error::OutOfRange {
            what: "direction norm",
            value: len,
        });
    }
    let base = op.zero_projection(x);
    let start = x.clone();
    let dir = direction.clone();
    let flow_op = Arc::clone(&op);
    let path = move |t: f64| -> Result<Evaluation> {
        let mut eval = evaluator.evaluate(flow_op.as_ref(), &start, t)?;
        eval.point = &eval.point + &dir.scale(c / (1.0 + t));
        Ok(eval)
    };
    let rate_phi = harmonic_rate(c);
    let s_star = rate_phi.at(0) as f64;
    let mut orbit = AlmostOrbit {
        op,
        evaluator,
        path: Arc::new(path),
        rate_phi,
        defect_envelope: Some(Arc::new(move |s| 2.0 * c / (1.0 + s))),
        base: base.clone(),
        bound_b: 1,
    };
    let grid: Vec<f64> = (0..=((s_star + 1.0) * 100.0) as usize)
        .map(|i| i as f64 * 0.01)
        .collect();
    orbit.bound_b = almost_orbit_bound_b(&orbit, &base, &grid)?;
    Ok(orbit)
}

/// Integer `B ≥ ‖u(t) − p‖`: the maximum over `grid`, combined with the tail
/// bound `d(s*) + ‖u(s*) − p‖` for `s* = Φ(0)`, where `d(s*)` is the defect
/// bound at `s*` (1 unless the orbit carries a sharper envelope).
///
/// Beyond `s*`, `‖u(s*+t) − p‖ ≤ ‖u(s*+t) − S(t)u(s*)‖ + ‖S(t)u(s*) − p‖`
/// and `S(t)` fixes `p` nonexpansively.
pub fn almost_orbit_bound_b(u: &AlmostOrbit, p: &Point, grid: &[f64]) -> Result<u64> {
    let mut worst: f64 = 0.0;
    for &t in grid {
        let e = u.evaluate(t)?;
        worst = worst.max(e.point.dist(p) + e.err_bound);
    }
    let s_star = u.rate_phi.at(0) as f64;
    let at_star = u.evaluate(s_star)?;
    let tail_defect = u.defect_envelope(s_star).unwrap_or(1.0);
    worst = worst.max(tail_defect + at_star.point.dist(p) + at_star.err_bound);
    Ok((worst.ceil() as u64).max(1))
}
