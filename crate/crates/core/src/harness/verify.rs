//! Grid-based checks of the certified bounds against simulated trajectories.
//!
//! Continuous quantifiers are sampled on a uniform grid; each report records
//! the grid step and horizon. An observation fails only if it exceeds the
//! target by more than `tol + 2·err`, where `err` is the largest certified
//! evaluation error among the samples involved.
//!
//! Statements that hold only outside a null set of times have no grid
//! counterpart. Grid points are never excluded; the shipped instances have
//! C¹ trajectories, so nothing is lost.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::moduli::RateFn;
use crate::operators::AccretiveOperator;
use crate::rates::CertifiedThreshold;
use crate::semigroup::{trajectory, AlmostOrbit, FlowEvaluator};
use crate::space::{dot, Point};

use super::report::{finite, GridInfo, Report, ReportRow, Status};

/// Largest grid a single check may sample.
pub const MAX_GRID_POINTS: usize = 1_000_000;

/// Above this many points, multi-dimensional diameters are bounded by the
/// bounding-box diagonal instead of computed pairwise.
const PAIRWISE_LIMIT: usize = 5_000;

fn harmonic(k: u64) -> f64 {
    1.0 / (k as f64 + 1.0)
}

fn check_step(step: f64) -> Result<()> {
    if step > 0.0 && step.is_finite() {
        Ok(())
    } else {
        Err(Error::config("grid_step", format!("must be positive, got {step}")))
    }
}

/// `lo, lo+step, …` up to `hi` (inclusive up to rounding).
pub fn time_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    check_step(step)?;
    if !(hi >= lo) {
        return Ok(Vec::new());
    }
    let count = ((hi - lo) / step + 1e-9).floor() + 1.0;
    if count > MAX_GRID_POINTS as f64 {
        return Err(Error::Resource(format!(
            "grid [{lo}, {hi}] with step {step} needs {count} points (limit {MAX_GRID_POINTS})"
        )));
    }
    Ok((0..count as usize).map(|i| lo + i as f64 * step).collect())
}

/// Index range of grid points `i·step` that lie in `[a, b]`.
fn index_window(a: f64, b: f64, step: f64, len: usize) -> std::ops::Range<usize> {
    let lo = ((a / step) - 1e-9).ceil().max(0.0) as usize;
    let hi = (((b / step) + 1e-9).floor() as usize + 1).min(len);
    lo..hi.max(lo)
}

/// Diameter of a point cloud: exact in one dimension or for small clouds,
/// otherwise the bounding-box diagonal (an upper bound).
pub fn diameter(points: &[&Point]) -> f64 {
    let Some(first) = points.first() else {
        return 0.0;
    };
    let d = first.dim();
    if d > 1 && points.len() <= PAIRWISE_LIMIT {
        let mut worst: f64 = 0.0;
        for (i, a) in points.iter().enumerate() {
            for b in &points[i + 1..] {
                worst = worst.max(a.dist(b));
            }
        }
        return worst;
    }
    let mut lo = first.coords().to_vec();
    let mut hi = lo.clone();
    for p in points {
        for (j, &c) in p.coords().iter().enumerate() {
            lo[j] = lo[j].min(c);
            hi[j] = hi[j].max(c);
        }
    }
    lo.iter().zip(&hi).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt()
}

/// Shared existential-window scan over sampled values `g(i·step)`: for every
/// `k ≤ k_max` and integer `n ≤ n_max` some sample in `[n, n + len(k)]` must
/// satisfy `g ≤ 1/(k+1)` (up to slack).
#[allow(clippy::too_many_arguments)]
fn window_scan(
    report: &mut Report,
    values: &[f64],
    errs: &[f64],
    step: f64,
    window_len: impl Fn(u64) -> u64,
    k_max: u64,
    n_max: u64,
    tol: f64,
) {
    for k in 0..=k_max {
        let target = harmonic(k);
        let len = window_len(k);
        let mut worst = (f64::NEG_INFINITY, 0.0, 0.0);
        let mut failed = Vec::new();
        for n in 0..=n_max {
            let range = index_window(n as f64, (n + len) as f64, step, values.len());
            let mut best = (f64::INFINITY, n as f64, 0.0);
            for i in range {
                if values[i] < best.0 {
                    best = (values[i], i as f64 * step, errs[i]);
                }
                if values[i] <= target {
                    break;
                }
            }
            if Status::classify(best.0, target, tol + 2.0 * best.2) == Status::Fail {
                failed.push(n);
            }
            if best.0 > worst.0 {
                worst = best;
            }
        }
        let allowance = tol + 2.0 * worst.2;
        let status = if failed.is_empty() {
            Status::classify(worst.0, target, allowance)
        } else {
            Status::Fail
        };
        let row = ReportRow {
            k,
            counterfunction: None,
            certified_bound: len,
            target,
            worst_observed: finite(worst.0),
            slack: finite(target + allowance - worst.0),
            status,
            witness: Some(worst.1),
        };
        report.push_row(row, || {
            format!("no sample at most 1/(k+1) in windows [n, n+{len}] for n in {failed:?}")
        });
    }
}

/// Checks that every window `[n, ⌈L+1⌉(k+1) + n]` contains a grid time `t`
/// with `f(t) ≤ 1/(k+1) + tol`, for `k ≤ k_max`, `n ≤ n_max`.
///
/// The caller certifies `∫₀^∞ f ≤ L` for the nonnegative `f`.
pub fn verify_liminf_lemma(
    f: &dyn Fn(f64) -> f64,
    l: f64,
    k_max: u64,
    n_max: u64,
    grid_step: f64,
    tol: f64,
) -> Result<Report> {
    let start = Instant::now();
    if !(l >= 0.0 && l.is_finite()) {
        return Err(Error::config("integral_bound", format!("must be finite and nonnegative, got {l}")));
    }
    let factor = (l + 1.0).ceil() as u64;
    let horizon = (n_max + factor * (k_max + 1)) as f64;
    let grid = time_grid(0.0, horizon, grid_step)?;
    let values: Vec<f64> = grid.iter().map(|&t| f(t)).collect();
    let errs = vec![0.0; grid.len()];
    let mut report = Report::new("liminf-integral", format!("integrand with bound L={l}"), tol);
    report.grid = Some(GridInfo {
        step: grid_step,
        horizon,
        points: grid.len(),
    });
    report.notes.push(format!("window [n, {factor}(k+1)+n], n <= {n_max}"));
    window_scan(&mut report, &values, &errs, grid_step, |k| factor * (k + 1), k_max, n_max, tol);
    report.runtime = start.elapsed();
    Ok(report)
}

/// Checks the liminf-rate for `t ↦ ⟨Aw(t), w(t) − Pw(t)⟩` along the orbit
/// `w(t) = S(t)x`: every window `[n, ⌈b²/2+1⌉(k+1) + n]` contains a grid
/// time where the integrand is at most `1/(k+1) + tol`.
#[allow(clippy::too_many_arguments)]
pub fn verify_nr_liminf(
    op: &dyn AccretiveOperator,
    x: &Point,
    b: u64,
    k_max: u64,
    n_max: u64,
    grid_step: f64,
    evaluator: FlowEvaluator,
    tol: f64,
) -> Result<Report> {
    let start = Instant::now();
    let dist = x.dist(&op.zero_projection(x));
    if dist > b as f64 + tol {
        return Err(Error::config("b", format!("b = {b} is below |x-Px| = {dist}")));
    }
    let factor = b.saturating_mul(b).saturating_add(1) / 2 + 1;
    let horizon = (n_max + factor * (k_max + 1)) as f64;
    let grid = time_grid(0.0, horizon, grid_step)?;
    let traj = trajectory(op, x, &grid, evaluator)?;
    let mut values = Vec::with_capacity(grid.len());
    let mut errs = Vec::with_capacity(grid.len());
    for s in &traj.samples {
        let v = op
            .value(&s.point)
            .ok_or_else(|| Error::Unsupported(format!("{} has no value map", op.name())))?;
        let residual = &s.point - &op.zero_projection(&s.point);
        values.push(dot(&v, &residual));
        errs.push(s.err_bound);
    }
    let mut report = Report::new("liminf-nr", format!("{} from {:?}", op.name(), x), tol);
    report.grid = Some(GridInfo {
        step: grid_step,
        horizon,
        points: grid.len(),
    });
    report.notes.push(format!("window [n, {factor}(k+1)+n], n <= {n_max}"));
    report.provenance.push(crate::rates::Provenance::new(
        "b",
        b,
        format!("b >= |x-Px| = {dist}"),
    ));
    window_scan(&mut report, &values, &errs, grid_step, |k| factor * (k + 1), k_max, n_max, tol);
    report.runtime = start.elapsed();
    Ok(report)
}

/// A sampled path `t ↦ (point, err_bound)`.
pub struct PathSamples {
    pub times: Vec<f64>,
    pub points: Vec<Point>,
    pub errs: Vec<f64>,
}

/// For each `(k, T_k)`: all sampled `s, s′ ≥ T_k` satisfy
/// `‖u(s) − u(s′)‖ ≤ 1/(k+1)` up to slack.
pub fn verify_tail(report: &mut Report, path: &PathSamples, thresholds: &[(u64, u64)], tol: f64) {
    let n = path.points.len();
    let dim = path.points.first().map_or(1, Point::dim);
    // suffix bounding boxes and error maxima
    let mut lo = vec![vec![f64::INFINITY; dim]; n + 1];
    let mut hi = vec![vec![f64::NEG_INFINITY; dim]; n + 1];
    let mut err_tail = vec![0.0f64; n + 1];
    for i in (0..n).rev() {
        for j in 0..dim {
            let c = path.points[i].coords()[j];
            lo[i][j] = lo[i + 1][j].min(c);
            hi[i][j] = hi[i + 1][j].max(c);
        }
        err_tail[i] = err_tail[i + 1].max(path.errs[i]);
    }
    for &(k, threshold) in thresholds {
        let target = harmonic(k);
        let first = path.times.partition_point(|&t| t < threshold as f64 - 1e-9);
        let err = err_tail[first];
        let allowance = tol + 2.0 * err;
        let mut worst = if first < n {
            lo[first]
                .iter()
                .zip(&hi[first])
                .map(|(a, b)| (b - a) * (b - a))
                .sum::<f64>()
                .sqrt()
        } else {
            0.0
        };
        if worst > target && dim > 1 && n - first <= PAIRWISE_LIMIT {
            let cloud: Vec<&Point> = path.points[first..].iter().collect();
            worst = diameter(&cloud);
        }
        let row = ReportRow {
            k,
            counterfunction: None,
            certified_bound: threshold,
            target,
            worst_observed: worst,
            slack: target + allowance - worst,
            status: Status::classify(worst, target, allowance),
            witness: None,
        };
        report.push_row(row, || {
            format!("samples beyond t = {threshold} spread {worst:e} > 1/(k+1) + {allowance:e}")
        });
    }
}

fn threshold_table(threshold: &CertifiedThreshold, k_range: (u64, u64)) -> Result<Vec<(u64, u64)>> {
    if k_range.0 > k_range.1 {
        return Err(Error::config("k_range", "lower end exceeds upper end"));
    }
    (k_range.0..=k_range.1)
        .map(|k| Ok((k, threshold.checked_at(k)?)))
        .collect()
}

fn horizon_for(table: &[(u64, u64)], horizon_pad: f64) -> Result<(f64, f64)> {
    if !(horizon_pad >= 0.0 && horizon_pad.is_finite()) {
        return Err(Error::config("horizon_pad", format!("must be nonnegative, got {horizon_pad}")));
    }
    let lo = table.iter().map(|e| e.1).min().unwrap_or(0) as f64;
    let hi = table.iter().map(|e| e.1).max().unwrap_or(0) as f64 + horizon_pad;
    Ok((lo, hi))
}

/// Checks a certified Cauchy threshold on the orbit `S(t)x`: for each `k`,
/// all grid times `s, s′ ∈ [threshold(k), H]` satisfy
/// `‖S(s)x − S(s′)x‖ ≤ 1/(k+1) + tol + 2·err`, with
/// `H = max_k threshold(k) + horizon_pad`.
#[allow(clippy::too_many_arguments)]
pub fn verify_cauchy_rate(
    op: &dyn AccretiveOperator,
    x: &Point,
    threshold: &CertifiedThreshold,
    k_range: (u64, u64),
    grid_step: f64,
    horizon_pad: f64,
    evaluator: FlowEvaluator,
    tol: f64,
) -> Result<Report> {
    let start = Instant::now();
    let table = threshold_table(threshold, k_range)?;
    let (lo, hi) = horizon_for(&table, horizon_pad)?;
    let grid = time_grid(lo, hi, grid_step)?;
    let traj = trajectory(op, x, &grid, evaluator)?;
    let path = PathSamples {
        times: grid.clone(),
        errs: traj.samples.iter().map(|s| s.err_bound).collect(),
        points: traj.samples.into_iter().map(|s| s.point).collect(),
    };
    let mut report = Report::new("cauchy-rate", format!("{} from {:?}", op.name(), x), tol);
    report.grid = Some(GridInfo {
        step: grid_step,
        horizon: hi,
        points: grid.len(),
    });
    report.notes.push(format!("threshold {}", threshold.label()));
    verify_tail(&mut report, &path, &table, tol);
    report.runtime = start.elapsed();
    Ok(report)
}

/// Tail check of a certified threshold along an almost-orbit.
pub fn verify_almost_orbit_tail(
    u: &AlmostOrbit,
    threshold: &CertifiedThreshold,
    k_range: (u64, u64),
    grid_step: f64,
    horizon_pad: f64,
    tol: f64,
) -> Result<Report> {
    let start = Instant::now();
    let table = threshold_table(threshold, k_range)?;
    let (lo, hi) = horizon_for(&table, horizon_pad)?;
    let grid = time_grid(lo, hi, grid_step)?;
    let mut points = Vec::with_capacity(grid.len());
    let mut errs = Vec::with_capacity(grid.len());
    for &t in &grid {
        let e = u.evaluate(t)?;
        points.push(e.point);
        errs.push(e.err_bound);
    }
    let path = PathSamples {
        times: grid.clone(),
        points,
        errs,
    };
    let mut report = Report::new("almost-orbit-tail", format!("almost-orbit of {}", u.operator().name()), tol);
    report.grid = Some(GridInfo {
        step: grid_step,
        horizon: hi,
        points: grid.len(),
    });
    report.notes.push(format!("threshold {}", threshold.label()));
    verify_tail(&mut report, &path, &table, tol);
    report.runtime = start.elapsed();
    Ok(report)
}

/// Upper bound on path evaluations in one metastability check.
const METASTABILITY_BUDGET: u64 = 50_000_000;

/// For each `k` and counterfunction `f`, searches integer `n ≤ Γ(k, f)` for
/// a window `[n, n+f(n)]` on which all grid samples of `u` are within
/// `1/(k+1)` of each other, and reports the first such `n`.
pub fn verify_metastability(
    u: &AlmostOrbit,
    gamma_bound: &dyn Fn(u64, &RateFn) -> Result<u64>,
    k_range: (u64, u64),
    counterfunctions: &[RateFn],
    grid_step: f64,
    tol: f64,
) -> Result<Report> {
    let start = Instant::now();
    check_step(grid_step)?;
    if k_range.0 > k_range.1 {
        return Err(Error::config("k_range", "lower end exceeds upper end"));
    }
    if counterfunctions.is_empty() {
        return Err(Error::config("counterfunctions", "at least one counterfunction is needed"));
    }
    let mut report = Report::new("metastability", format!("almost-orbit of {}", u.operator().name()), tol);
    let mut budget = METASTABILITY_BUDGET;
    let mut horizon: f64 = 0.0;
    for k in k_range.0..=k_range.1 {
        let target = harmonic(k);
        for f in counterfunctions {
            let bound = gamma_bound(k, f)?;
            let mut best: Option<(f64, u64, f64)> = None;
            let mut witness = None;
            for n in 0..=bound {
                let end = n.saturating_add(f.at(n));
                let steps = ((end - n) as f64 / grid_step + 1e-9).floor() as u64 + 1;
                if steps > budget {
                    return Err(Error::Resource(format!(
                        "metastability search for k={k}, f={} exhausted its evaluation budget",
                        f.label()
                    )));
                }
                let mut window = Vec::new();
                let mut err: f64 = 0.0;
                let mut spread = 0.0;
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for i in 0..steps {
                    budget -= 1;
                    let t = n as f64 + i as f64 * grid_step;
                    horizon = horizon.max(t);
                    let e = u.evaluate(t)?;
                    err = err.max(e.err_bound);
                    if e.point.dim() == 1 {
                        let c = e.point.coords()[0];
                        lo = lo.min(c);
                        hi = hi.max(c);
                        spread = hi - lo;
                        if spread > target + tol + 2.0 * err {
                            break;
                        }
                    } else {
                        window.push(e.point);
                    }
                }
                if !window.is_empty() {
                    spread = diameter(&window.iter().collect::<Vec<_>>());
                }
                if best.is_none_or(|b| spread < b.0) {
                    best = Some((spread, n, err));
                }
                if Status::classify(spread, target, tol + 2.0 * err) != Status::Fail {
                    witness = Some((spread, n, err));
                    break;
                }
            }
            let (observed, n, err) = witness.or(best).unwrap_or((f64::INFINITY, 0, 0.0));
            let allowance = tol + 2.0 * err;
            let row = ReportRow {
                k,
                counterfunction: Some(f.label().to_string()),
                certified_bound: bound,
                target,
                worst_observed: finite(observed),
                slack: finite(target + allowance - observed),
                status: if witness.is_some() {
                    Status::classify(observed, target, allowance)
                } else {
                    Status::Fail
                },
                witness: witness.map(|w| w.1 as f64),
            };
            report.push_row(row, || {
                format!("no window [n, n+f(n)] with n <= {bound} has spread <= 1/(k+1); best n = {n}")
            });
        }
    }
    report.grid = Some(GridInfo {
        step: grid_step,
        horizon,
        points: (METASTABILITY_BUDGET - budget) as usize,
    });
    report.runtime = start.elapsed();
    Ok(report)
}

/// Checks the almost-orbit condition against `Φ`: for integer
/// `s ∈ [Φ(k), horizon]` and grid `t ∈ [0, horizon − s]`,
/// `‖u(s+t) − S(t)u(s)‖ ≤ 1/(k+1)` up to slack.
pub fn verify_almost_orbit_rate(
    u: &AlmostOrbit,
    k_max: u64,
    horizon: f64,
    grid_step: f64,
    tol: f64,
) -> Result<Report> {
    let start = Instant::now();
    check_step(grid_step)?;
    let phi = u.rate_phi();
    if phi.at(k_max) as f64 > horizon {
        return Err(Error::config(
            "horizon",
            format!("Phi({k_max}) = {} lies beyond the horizon {horizon}", phi.at(k_max)),
        ));
    }
    let op = u.operator();
    let mut report = Report::new("almost-orbit-rate", format!("almost-orbit of {}", op.name()), tol);
    let mut points = 0usize;
    for k in 0..=k_max {
        let target = harmonic(k);
        let s0 = phi.at(k);
        let mut worst = (0.0f64, s0 as f64, 0.0f64);
        let mut s = s0;
        while s as f64 <= horizon {
            let base = u.evaluate(s as f64)?;
            for t in time_grid(0.0, horizon - s as f64, grid_step)? {
                let moved = u.evaluator().evaluate(op, &base.point, t)?;
                let ahead = u.evaluate(s as f64 + t)?;
                let defect = ahead.point.dist(&moved.point);
                let err = base.err_bound + moved.err_bound + ahead.err_bound;
                points += 1;
                if defect > worst.0 {
                    worst = (defect, s as f64, err);
                }
            }
            s += 1;
        }
        let allowance = tol + 2.0 * worst.2;
        let row = ReportRow {
            k,
            counterfunction: None,
            certified_bound: s0,
            target,
            worst_observed: worst.0,
            slack: target + allowance - worst.0,
            status: Status::classify(worst.0, target, allowance),
            witness: Some(worst.1),
        };
        report.push_row(row, || format!("defect {:e} at s = {}", worst.0, worst.1));
    }
    report.grid = Some(GridInfo {
        step: grid_step,
        horizon,
        points,
    });
    report.runtime = start.elapsed();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moduli::{full_quartic, full_strongly_accretive, weak_from_full};
    use crate::operators::{make_quartic, make_scaled_identity};
    use crate::rates::{gamma, nr_threshold, omega_hilbert_exact, NrInputs, XuInputs};
    use crate::semigroup::make_almost_orbit;
    use std::sync::Arc;

    #[test]
    fn grid_construction() {
        let g = time_grid(0.0, 1.0, 0.25).unwrap();
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(time_grid(0.0, 1.0, 0.0).is_err());
        assert!(matches!(time_grid(0.0, 1e7, 1.0), Err(Error::Resource(_))));
        assert_eq!(index_window(1.0, 2.0, 0.01, 1000), 100..201);
    }

    #[test]
    fn diameter_exact_and_bounded() {
        let pts = [Point::scalar(1.0), Point::scalar(-2.0), Point::scalar(0.5)];
        assert_eq!(diameter(&pts.iter().collect::<Vec<_>>()), 3.0);
        let square = [
            Point::new(vec![0.0, 0.0]).unwrap(),
            Point::new(vec![1.0, 1.0]).unwrap(),
            Point::new(vec![1.0, 0.0]).unwrap(),
        ];
        assert!((diameter(&square.iter().collect::<Vec<_>>()) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn liminf_lemma_examples() {
        let f = |t: f64| 1.0 / ((1.0 + t) * (1.0 + t));
        let r = verify_liminf_lemma(&f, 1.0, 0, 0, 0.01, 1e-9).unwrap();
        assert!(r.passed());
        assert_eq!(r.rows[0].certified_bound, 2);
        assert_eq!(r.rows[0].witness, Some(0.0));
        let r = verify_liminf_lemma(&f, 1.0, 20, 20, 0.01, 1e-9).unwrap();
        assert!(r.passed());
        assert_eq!(r.rows.len(), 21);
        let zero = verify_liminf_lemma(&|_| 0.0, 5.0, 3, 3, 0.5, 0.0).unwrap();
        assert!(zero.passed());
    }

    #[test]
    fn liminf_lemma_flags_wrong_integral_bound() {
        // ∫ 3·1_{[0,10]} = 30, but L = 0 claims windows of length k+1 suffice
        let f = |t: f64| if t <= 10.0 { 3.0 } else { 0.0 };
        let r = verify_liminf_lemma(&f, 0.0, 0, 2, 0.1, 1e-9).unwrap();
        assert!(!r.passed());
    }

    #[test]
    fn nr_liminf_scaled_identity() {
        let op = make_scaled_identity(1.0, 1).unwrap();
        let r = verify_nr_liminf(&op, &Point::scalar(2.0), 2, 10, 10, 0.01, FlowEvaluator::Oracle, 1e-9)
            .unwrap();
        assert!(r.passed());
        assert_eq!(r.rows[0].certified_bound, 3);
        // first t with 4e^{-2t} ≤ 1 on the grid is ln 2 rounded up
        let w = r.rows[0].witness.unwrap();
        assert!((w - 0.7).abs() < 1e-9);
    }

    #[test]
    fn nr_liminf_quartic_and_zero_start() {
        let q = make_quartic();
        let r = verify_nr_liminf(&q, &Point::scalar(3.0), 2, 10, 10, 0.01, FlowEvaluator::Oracle, 1e-9)
            .unwrap();
        assert!(r.passed());
        let z = verify_nr_liminf(&q, &Point::scalar(0.5), 0, 3, 3, 0.1, FlowEvaluator::Oracle, 0.0)
            .unwrap();
        assert!(z.passed());
        assert!(z.rows.iter().all(|row| row.worst_observed == 0.0));
        assert!(verify_nr_liminf(&q, &Point::scalar(3.0), 1, 1, 1, 0.1, FlowEvaluator::Oracle, 0.0).is_err());
    }

    #[test]
    fn cauchy_rate_scaled_identity() {
        let op = make_scaled_identity(1.0, 1).unwrap();
        let weak = weak_from_full(full_strongly_accretive(1).unwrap());
        let inp = NrInputs::from_witnesses(&op, weak, &Point::scalar(2.0)).unwrap();
        let th = nr_threshold(&inp);
        let r = verify_cauchy_rate(&op, &Point::scalar(2.0), &th, (0, 5), 0.25, 10.0, FlowEvaluator::Oracle, 1e-9)
            .unwrap();
        assert!(r.passed());
        assert_eq!(r.rows[0].certified_bound, 12);
        assert!((r.rows[0].worst_observed - 2.0 * (-12.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn cauchy_rate_stationary_start() {
        let op = make_scaled_identity(1.0, 1).unwrap();
        let weak = weak_from_full(full_strongly_accretive(1).unwrap());
        let th = nr_threshold(&NrInputs::new(weak, 0, 0));
        let r = verify_cauchy_rate(&op, &Point::scalar(0.0), &th, (0, 3), 0.5, 5.0, FlowEvaluator::Oracle, 0.0)
            .unwrap();
        assert!(r.rows.iter().all(|row| row.worst_observed == 0.0));
    }

    #[test]
    fn cauchy_rate_catches_premature_threshold() {
        let q = make_quartic();
        let th = CertifiedThreshold::from_fn("zero", |_| 0);
        let r = verify_cauchy_rate(&q, &Point::scalar(3.0), &th, (0, 2), 0.25, 20.0, FlowEvaluator::Oracle, 1e-9)
            .unwrap();
        assert!(!r.passed());
    }

    #[test]
    fn cauchy_rate_quartic_with_crandall_liggett() {
        let q = make_quartic();
        let weak = weak_from_full(full_quartic());
        let x = Point::scalar(1.5);
        let inp = NrInputs::from_witnesses(&q, weak, &x).unwrap();
        let th = nr_threshold(&inp);
        assert_eq!(th.at(0), 32);
        let evaluator = FlowEvaluator::CrandallLiggett { tol: 0.1 };
        let r = verify_cauchy_rate(&q, &x, &th, (0, 0), 4.0, 8.0, evaluator, 1e-9).unwrap();
        assert!(r.passed());
        assert!(r.rows[0].worst_observed <= 1.0);
    }

    fn perturbed_orbit(c: f64) -> AlmostOrbit {
        let op: Arc<dyn AccretiveOperator> = Arc::new(make_scaled_identity(1.0, 1).unwrap());
        make_almost_orbit(op, &Point::scalar(2.0), c, &Point::scalar(1.0), FlowEvaluator::Oracle).unwrap()
    }

    #[test]
    fn almost_orbit_rate_examples() {
        let u = perturbed_orbit(1.0);
        let r = verify_almost_orbit_rate(&u, 4, 12.0, 0.05, 1e-9).unwrap();
        assert!(r.passed());
        assert_eq!(r.rows[0].certified_bound, 1);
        assert!(r.rows[0].worst_observed <= 1.0);
        assert_eq!(r.rows[4].certified_bound, 9);
        assert!(r.rows[4].worst_observed <= 0.2);
        let exact = perturbed_orbit(0.0);
        let r = verify_almost_orbit_rate(&exact, 2, 4.0, 0.1, 0.0).unwrap();
        assert!(r.rows.iter().all(|row| row.worst_observed < 1e-12));
    }

    #[test]
    fn metastability_examples() {
        let u = perturbed_orbit(1.0);
        let weak = weak_from_full(full_strongly_accretive(1).unwrap());
        let inp = XuInputs::for_almost_orbit(&u, weak, omega_hilbert_exact()).unwrap();
        let bound = |k: u64, f: &RateFn| gamma(&inp, k, &|n| f.at(n));
        let fs = [RateFn::id(), RateFn::affine(1, 1), RateFn::pow(2)];
        let r = verify_metastability(&u, &bound, (0, 3), &fs, 0.25, 1e-9).unwrap();
        assert!(r.passed());
        for row in &r.rows {
            assert!(row.witness.unwrap() <= row.certified_bound as f64);
        }
        let zero = [RateFn::constant(0)];
        let r = verify_metastability(&u, &bound, (0, 0), &zero, 0.25, 0.0).unwrap();
        assert_eq!(r.rows[0].witness, Some(0.0));
    }

    #[test]
    fn metastability_fails_with_too_small_bound() {
        let u = perturbed_orbit(1.0);
        let r = verify_metastability(&u, &|_, _| Ok(0), (3, 3), &[RateFn::affine(1, 1)], 0.25, 1e-9)
            .unwrap();
        assert!(!r.passed());
    }
}
