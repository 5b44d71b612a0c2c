//! Accretive operators: resolvents, zero-set projections and graph access.
//!
//! Every instance here is everywhere defined and single-valued, so the graph
//! of `A` is `{(x, Ax)}` and `dom A` is the whole space.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::space::{dot, Point};

/// A pair `(x, y)` with `y ∈ Ax`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphPair {
    pub x: Point,
    pub y: Point,
}

/// Closed-form description of an operator whose flow is known exactly.
#[derive(Clone, Debug)]
pub enum ClosedForm {
    /// `Ax = αx`.
    ScaledIdentity { alpha: f64 },
    /// `Ax = Mx` with `M` symmetric positive definite.
    Linear { matrix: DMatrix<f64> },
    /// Subdifferential of the flat-bottomed quartic on ℝ.
    Quartic,
}

/// An m-accretive operator on the Hilbert model.
pub trait AccretiveOperator: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    fn dim(&self) -> usize;

    /// The resolvent `J_γ = (Id + γA)^{-1}`.
    fn resolvent(&self, gamma: f64, x: &Point) -> Point;

    /// Nearest-point projection onto the zero set `A⁻¹0`.
    fn zero_projection(&self, x: &Point) -> Point;

    /// `Ax`, where `A` is single-valued.
    fn value(&self, _x: &Point) -> Option<Point> {
        None
    }

    /// Some `p` with `0 ∈ Ap`.
    fn zero_witness(&self) -> Point;

    fn closed_form(&self) -> Option<ClosedForm> {
        None
    }

    /// Draws `x` uniformly from the ball of radius `bound`, sets `y = Ax`
    /// and rejects when `‖y‖ > bound`. Returns `None` after 10 000 rejections.
    fn sample_graph(&self, rng: &mut dyn RngCore, bound: f64) -> Option<GraphPair> {
        for _ in 0..10_000 {
            let x = sample_ball(rng, self.dim(), bound);
            let y = self.value(&x)?;
            if y.norm() <= bound {
                return Some(GraphPair { x, y });
            }
        }
        None
    }
}

/// Uniform sample from the closed ball of radius `radius` in ℝ^dim.
pub fn sample_ball(rng: &mut dyn RngCore, dim: usize, radius: f64) -> Point {
    loop {
        let dir: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut *rng)).collect();
        let len = dir.iter().map(|c| c * c).sum::<f64>().sqrt();
        if len < 1e-300 {
            continue;
        }
        let u: f64 = rng.random();
        let r = radius * u.powf(1.0 / dim as f64);
        return Point::from_vec(dir.into_iter().map(|c| c * r / len).collect());
    }
}

/// `Ax = αx` on ℝ^dim.
#[derive(Clone, Debug)]
pub struct ScaledIdentity {
    alpha: f64,
    dim: usize,
}

pub fn make_scaled_identity(alpha: f64, dim: usize) -> Result<ScaledIdentity> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::OutOfRange {
            what: "alpha",
            value: alpha,
        });
    }
    if dim == 0 {
        return Err(Error::OutOfRange {
            what: "dimension",
            value: 0.0,
        });
    }
    Ok(ScaledIdentity { alpha, dim })
}

impl ScaledIdentity {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl AccretiveOperator for ScaledIdentity {
    fn name(&self) -> String {
        format!("scaled-identity(alpha={}, dim={})", self.alpha, self.dim)
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn resolvent(&self, gamma: f64, x: &Point) -> Point {
        x.scale(1.0 / (1.0 + gamma * self.alpha))
    }

    fn zero_projection(&self, x: &Point) -> Point {
        Point::zeros(x.dim())
    }

    fn value(&self, x: &Point) -> Option<Point> {
        Some(x.scale(self.alpha))
    }

    fn zero_witness(&self) -> Point {
        Point::zeros(self.dim)
    }

    fn closed_form(&self) -> Option<ClosedForm> {
        Some(ClosedForm::ScaledIdentity { alpha: self.alpha })
    }
}

/// `Ax = Mx` for a symmetric positive-definite `M`.
#[derive(Clone, Debug)]
pub struct SpdLinear {
    matrix: DMatrix<f64>,
    lambda_min: f64,
}

pub fn make_spd_linear(matrix: DMatrix<f64>) -> Result<SpdLinear> {
    if !matrix.is_square() || matrix.nrows() == 0 {
        return Err(Error::NotSpd(format!(
            "shape {}x{}",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotSpd("non-finite entry".into()));
    }
    let asym = (&matrix - matrix.transpose()).amax();
    if asym > 1e-12 * matrix.amax().max(1.0) {
        return Err(Error::NotSpd(format!("asymmetry {asym:e}")));
    }
    if matrix.clone().cholesky().is_none() {
        return Err(Error::NotSpd("Cholesky factorization failed".into()));
    }
    let lambda_min = matrix.clone().symmetric_eigenvalues().min();
    if lambda_min <= 0.0 {
        return Err(Error::NotSpd(format!("smallest eigenvalue {lambda_min:e}")));
    }
    Ok(SpdLinear { matrix, lambda_min })
}

/// Discrete Dirichlet Laplacian `tridiag(−1, 2, −1)` of the given size.
pub fn dirichlet_laplacian(size: usize) -> DMatrix<f64> {
    DMatrix::from_fn(size, size, |i, j| {
        if i == j {
            2.0
        } else if i.abs_diff(j) == 1 {
            -1.0
        } else {
            0.0
        }
    })
}

impl SpdLinear {
    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

impl AccretiveOperator for SpdLinear {
    fn name(&self) -> String {
        format!("spd-linear(dim={})", self.matrix.nrows())
    }

    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn resolvent(&self, gamma: f64, x: &Point) -> Point {
        let n = self.dim();
        let system = DMatrix::identity(n, n) + &self.matrix * gamma;
        let rhs = DVector::from_column_slice(x.coords());
        let z = system
            .cholesky()
            .expect("I + γM is SPD for γ ≥ 0")
            .solve(&rhs);
        Point::from_vec(z.iter().copied().collect())
    }

    fn zero_projection(&self, x: &Point) -> Point {
        Point::zeros(x.dim())
    }

    fn value(&self, x: &Point) -> Option<Point> {
        let v = &self.matrix * DVector::from_column_slice(x.coords());
        Some(Point::from_vec(v.iter().copied().collect()))
    }

    fn zero_witness(&self) -> Point {
        Point::zeros(self.dim())
    }

    fn closed_form(&self) -> Option<ClosedForm> {
        Some(ClosedForm::Linear {
            matrix: self.matrix.clone(),
        })
    }
}

/// `A = ∂f` for `f(x) = (|x| − 1)₊⁴` on ℝ; zero set `[−1, 1]`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Quartic;

pub fn make_quartic() -> Quartic {
    Quartic
}

/// `f(x)` for the quartic instance.
pub fn quartic_potential(x: f64) -> f64 {
    if x <= -1.0 {
        (x + 1.0).powi(4)
    } else if x >= 1.0 {
        (x - 1.0).powi(4)
    } else {
        0.0
    }
}

/// `f′(x)` for the quartic instance.
pub fn quartic_derivative(x: f64) -> f64 {
    if x <= -1.0 {
        4.0 * (x + 1.0).powi(3)
    } else if x >= 1.0 {
        4.0 * (x - 1.0).powi(3)
    } else {
        0.0
    }
}

fn quartic_second_derivative(x: f64) -> f64 {
    if x <= -1.0 {
        12.0 * (x + 1.0).powi(2)
    } else if x >= 1.0 {
        12.0 * (x - 1.0).powi(2)
    } else {
        0.0
    }
}

/// Solves `z + γ f′(z) = x` for the quartic.
///
/// Newton steps are accepted only while they stay inside the current sign
/// bracket; otherwise the bracket is bisected.
pub fn quartic_resolvent(gamma: f64, x: f64) -> f64 {
    if gamma == 0.0 || (-1.0..=1.0).contains(&x) {
        return x;
    }
    let g = |z: f64| z + gamma * quartic_derivative(z) - x;
    let spread = gamma * quartic_derivative(x).abs() + 1.0;
    let (mut lo, mut hi) = (x - spread, x + spread);
    while g(lo) > 0.0 {
        lo -= 2.0 * (hi - lo);
    }
    while g(hi) < 0.0 {
        hi += 2.0 * (hi - lo);
    }
    let tol = 1e-12 * x.abs().max(1.0);
    let mut z = 0.5 * (lo + hi);
    for _ in 0..500 {
        let r = g(z);
        if r.abs() <= tol {
            return z;
        }
        if r > 0.0 {
            hi = z;
        } else {
            lo = z;
        }
        let slope = 1.0 + gamma * quartic_second_derivative(z);
        let newton = z - r / slope;
        z = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * x.abs().max(1.0) {
            return z;
        }
    }
    z
}

impl AccretiveOperator for Quartic {
    fn name(&self) -> String {
        "quartic".into()
    }

    fn dim(&self) -> usize {
        1
    }

    fn resolvent(&self, gamma: f64, x: &Point) -> Point {
        x.map(|c| quartic_resolvent(gamma, c))
    }

    fn zero_projection(&self, x: &Point) -> Point {
        x.map(|c| c.clamp(-1.0, 1.0))
    }

    fn value(&self, x: &Point) -> Option<Point> {
        Some(x.map(quartic_derivative))
    }

    fn zero_witness(&self) -> Point {
        Point::scalar(0.0)
    }

    fn closed_form(&self) -> Option<ClosedForm> {
        Some(ClosedForm::Quartic)
    }
}

/// `Ax = −x`. Not accretive; exists to exercise violation reporting.
#[derive(Clone, Debug)]
pub struct AntiMonotone {
    dim: usize,
}

pub fn make_anti_monotone(dim: usize) -> AntiMonotone {
    AntiMonotone { dim }
}

impl AccretiveOperator for AntiMonotone {
    fn name(&self) -> String {
        format!("anti-monotone(dim={})", self.dim)
    }

    fn dim(&self) -> usize {
        self.dim
    }

    /// `(1 − γ)z = x`; only meaningful for `γ < 1`.
    fn resolvent(&self, gamma: f64, x: &Point) -> Point {
        x.scale(1.0 / (1.0 - gamma))
    }

    fn zero_projection(&self, x: &Point) -> Point {
        Point::zeros(x.dim())
    }

    fn value(&self, x: &Point) -> Option<Point> {
        Some(x.scale(-1.0))
    }

    fn zero_witness(&self) -> Point {
        Point::zeros(self.dim)
    }
}

/// Graph pairs found violating `⟨u − v, x − y⟩ ≥ −tol`.
#[derive(Clone, Debug, Serialize)]
pub struct AccretivityViolation {
    pub first: GraphPair,
    pub second: GraphPair,
    pub pairing: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AccretivityReport {
    pub operator: String,
    pub samples: usize,
    pub violations: Vec<AccretivityViolation>,
}

impl AccretivityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples `n_samples` pairs of graph points in the `bound`-ball and records
/// every pair whose pairing falls below `−tol`.
pub fn check_accretive(
    op: &dyn AccretiveOperator,
    rng: &mut dyn RngCore,
    n_samples: usize,
    bound: f64,
    tol: f64,
) -> Result<AccretivityReport> {
    let mut violations = Vec::new();
    for _ in 0..n_samples {
        let (a, b) = match (op.sample_graph(rng, bound), op.sample_graph(rng, bound)) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(Error::Unsupported(format!(
                    "{} provides no graph samples within radius {bound}",
                    op.name()
                )))
            }
        };
        let pairing = dot(&(&a.y - &b.y), &(&a.x - &b.x));
        if pairing < -tol {
            violations.push(AccretivityViolation {
                first: a,
                second: b,
                pairing,
            });
        }
    }
    Ok(AccretivityReport {
        operator: op.name(),
        samples: n_samples,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    #[test]
    fn scaled_identity_examples() {
        let a = make_scaled_identity(1.0, 1).unwrap();
        assert_eq!(a.resolvent(1.0, &p(&[2.0])), p(&[1.0]));
        let a2 = make_scaled_identity(1.0, 2).unwrap();
        assert_eq!(a2.zero_projection(&p(&[5.0, -3.0])), p(&[0.0, 0.0]));
        let b = make_scaled_identity(2.0, 2).unwrap();
        assert_eq!(b.value(&p(&[1.0, 2.0])).unwrap(), p(&[2.0, 4.0]));
        assert!(make_scaled_identity(0.0, 1).is_err());
    }

    #[test]
    fn spd_examples() {
        let m = make_spd_linear(DMatrix::identity(3, 3) * 2.0).unwrap();
        let x = p(&[1.0, -2.0, 4.0]);
        let r = m.resolvent(0.5, &x);
        assert!(r.dist(&x.scale(0.5)) < 1e-15);

        let lap = make_spd_linear(dirichlet_laplacian(4)).unwrap();
        let expected = 2.0 - 2.0 * (std::f64::consts::PI / 5.0).cos();
        assert!((lap.lambda_min() - 0.381_966_011_250_105_1).abs() < 1e-12);
        assert!((lap.lambda_min() - expected).abs() < 1e-12);

        let id = make_spd_linear(DMatrix::identity(2, 2)).unwrap();
        assert_eq!(id.value(&p(&[3.0, 1.0])).unwrap(), p(&[3.0, 1.0]));
    }

    #[test]
    fn spd_rejects_indefinite_and_asymmetric() {
        let indefinite = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(make_spd_linear(indefinite), Err(Error::NotSpd(_))));
        let asym = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 2.0]);
        assert!(matches!(make_spd_linear(asym), Err(Error::NotSpd(_))));
    }

    #[test]
    fn quartic_examples() {
        let q = make_quartic();
        assert_eq!(q.value(&p(&[2.0])).unwrap(), p(&[4.0]));
        assert_eq!(q.zero_projection(&p(&[0.5])), p(&[0.5]));
        assert_eq!(q.resolvent(1.0, &p(&[0.5])), p(&[0.5]));
        assert_eq!(q.zero_projection(&p(&[-3.0])), p(&[-1.0]));
    }

    #[test]
    fn quartic_resolvent_residual() {
        for &gamma in &[1e-3, 0.1, 1.0, 10.0, 1e4] {
            for i in -200..=200 {
                let x = i as f64 * 0.37;
                let z = quartic_resolvent(gamma, x);
                let residual = z + gamma * quartic_derivative(z) - x;
                assert!(
                    residual.abs() <= 1e-12 * x.abs().max(1.0),
                    "gamma={gamma} x={x} residual={residual}"
                );
            }
        }
    }

    #[test]
    fn accretivity_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let id = make_scaled_identity(1.0, 3).unwrap();
        assert!(check_accretive(&id, &mut rng, 1000, 5.0, 1e-12).unwrap().passed());
        let q = make_quartic();
        assert!(check_accretive(&q, &mut rng, 1000, 5.0, 1e-12).unwrap().passed());
        let anti = make_anti_monotone(2);
        let report = check_accretive(&anti, &mut rng, 1000, 5.0, 1e-12).unwrap();
        assert!(!report.violations.is_empty());
    }

    #[test]
    fn quartic_accretive_brute_force() {
        // f′ nondecreasing: exhaustive pair scan on a grid
        let grid: Vec<f64> = (-60..=60).map(|i| i as f64 * 0.05).collect();
        for &a in &grid {
            for &b in &grid {
                let lhs = (quartic_derivative(a) - quartic_derivative(b)) * (a - b);
                assert!(lhs >= 0.0);
            }
        }
    }

    #[test]
    fn resolvent_fixes_zero_witness() {
        let ops: Vec<Box<dyn AccretiveOperator>> = vec![
            Box::new(make_scaled_identity(1.5, 2).unwrap()),
            Box::new(make_spd_linear(dirichlet_laplacian(4)).unwrap()),
            Box::new(make_quartic()),
        ];
        for op in &ops {
            let p0 = op.zero_witness();
            for &gamma in &[0.1, 1.0, 10.0] {
                assert!(op.resolvent(gamma, &p0).dist(&p0) <= 1e-12);
            }
        }
        let q = make_quartic();
        for &z in &[-1.0, -0.3, 1.0] {
            assert_eq!(q.resolvent(10.0, &p(&[z])), p(&[z]));
        }
    }

    #[test]
    fn sample_graph_respects_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = make_quartic();
        for _ in 0..500 {
            let g = q.sample_graph(&mut rng, 3.0).unwrap();
            assert!(g.x.norm() <= 3.0 && g.y.norm() <= 3.0);
        }
    }
}
