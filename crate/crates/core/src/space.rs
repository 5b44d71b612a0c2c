//! Finite-dimensional Hilbert model of the state space.
//!
//! States are vectors in ℝ^d with the Euclidean norm. In a Hilbert space the
//! normalized duality map is the identity, so the duality pairing
//! `⟨y, J(x)⟩` is just the inner product `⟨y, x⟩`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A state vector with finite coordinates.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    /// Builds a point, rejecting empty or non-finite input.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::OutOfRange {
                what: "dimension",
                value: 0.0,
            });
        }
        if let Some(index) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Point(coords))
    }

    /// Builds a point without validation. Arithmetic on valid points keeps
    /// coordinates finite unless it overflows.
    pub(crate) fn from_vec(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        Point(vec![0.0; dim])
    }

    pub fn scalar(value: f64) -> Self {
        Point(vec![value])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn norm(&self) -> f64 {
        norm(self)
    }

    /// Euclidean distance.
    pub fn dist(&self, other: &Point) -> f64 {
        assert_same_dim(self, other);
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&self, factor: f64) -> Point {
        Point(self.0.iter().map(|c| c * factor).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Point {
        Point(self.0.iter().map(|&c| f(c)).collect())
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.0).finish()
    }
}

fn assert_same_dim(a: &Point, b: &Point) {
    assert_eq!(
        a.dim(),
        b.dim(),
        "point dimension mismatch ({} vs {})",
        a.dim(),
        b.dim()
    );
}

impl Sub for &Point {
    type Output = Point;

    fn sub(self, rhs: &Point) -> Point {
        assert_same_dim(self, rhs);
        Point(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Add for &Point {
    type Output = Point;

    fn add(self, rhs: &Point) -> Point {
        assert_same_dim(self, rhs);
        Point(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Mul<f64> for &Point {
    type Output = Point;

    fn mul(self, rhs: f64) -> Point {
        self.scale(rhs)
    }
}

impl Neg for &Point {
    type Output = Point;

    fn neg(self) -> Point {
        self.scale(-1.0)
    }
}

/// Euclidean norm.
pub fn norm(x: &Point) -> f64 {
    x.0.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Duality pairing `⟨y, J(x)⟩`, the inner product in the Hilbert model.
pub fn pairing(y: &Point, x: &Point) -> Result<f64> {
    if y.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: y.dim(),
            got: x.dim(),
        });
    }
    Ok(dot(y, x))
}

pub(crate) fn dot(y: &Point, x: &Point) -> f64 {
    assert_same_dim(y, x);
    y.0.iter().zip(&x.0).map(|(a, b)| a * b).sum()
}

/// Modulus of uniform convexity of a Hilbert space, `1 − sqrt(1 − ε²/4)`.
///
/// Evaluated as `(ε²/4) / (1 + sqrt(1 − ε²/4))` to avoid cancellation for
/// small `ε`.
pub fn eta_hilbert(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 2.0) {
        return Err(Error::OutOfRange {
            what: "convexity modulus argument",
            value: eps,
        });
    }
    let q = eps * eps / 4.0;
    Ok(q / (1.0 + (1.0 - q).sqrt()))
}

/// Shared convexity modulus `η : (0, 2] → (0, 1]`.
pub type ConvexityModulus = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Ambient space description: dimension plus a modulus of uniform convexity.
#[derive(Clone)]
pub struct SpaceModel {
    dim: usize,
    convexity_modulus: ConvexityModulus,
}

impl SpaceModel {
    pub fn hilbert(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::OutOfRange {
                what: "dimension",
                value: 0.0,
            });
        }
        Ok(SpaceModel {
            dim,
            convexity_modulus: Arc::new(|eps| eta_hilbert(eps).unwrap_or(f64::NAN)),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn convexity_modulus(&self) -> ConvexityModulus {
        Arc::clone(&self.convexity_modulus)
    }

    pub fn eta(&self, eps: f64) -> f64 {
        (self.convexity_modulus)(eps)
    }

    /// Validates that `x` lives in this space.
    pub fn check(&self, x: &Point) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.dim(),
            });
        }
        if let Some(index) = x.coords().iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(())
    }
}

impl fmt::Debug for SpaceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpaceModel").field("dim", &self.dim).finish()
    }
}
