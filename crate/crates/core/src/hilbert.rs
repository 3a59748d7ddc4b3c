//! Vector primitives of the ambient space R^d with the Euclidean inner
//! product, plus the two-point convexity identity
//!
//! ```text
//! |λx + (1−λ)y|² = λ|x|² + (1−λ)|y|² − λ(1−λ)|x−y|²
//! ```
//!
//! which holds for every real λ and is the workhorse estimate behind the
//! convex-combination and averaging arguments elsewhere in this crate.
//!
//! All operations here are pure functions on immutable values. Vectors are
//! finite by construction (no NaN/Inf components) and every experiment keeps
//! a single dimension `d >= 1` throughout; mixing dimensions is a programming
//! error and panics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Construction errors for [`Vector`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum VectorError {
    #[error("vector must have at least one component")]
    Empty,
    #[error("vector component {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
}

/// A point of R^d. Serializes as a plain JSON array of numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

impl Vector {
    /// Validating constructor: rejects empty vectors and non-finite
    /// components.
    pub fn new(coords: Vec<f64>) -> Result<Self, VectorError> {
        if coords.is_empty() {
            return Err(VectorError::Empty);
        }
        for (index, &value) in coords.iter().enumerate() {
            if !value.is_finite() {
                return Err(VectorError::NonFinite { index, value });
            }
        }
        Ok(Vector(coords))
    }

    /// Convenience constructor for literals.
    ///
    /// Panics if the slice is empty or contains a non-finite component.
    pub fn from_slice(coords: &[f64]) -> Self {
        Self::new(coords.to_vec()).expect("invalid vector literal")
    }

    /// Zero vector of dimension `d`.
    pub fn zeros(d: usize) -> Self {
        assert!(d >= 1, "dimension must be >= 1");
        Vector(vec![0.0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Euclidean inner product. Panics on dimension mismatch.
    pub fn inner(&self, other: &Vector) -> f64 {
        assert_dims(self, other);
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn dist(&self, other: &Vector) -> f64 {
        self.sub(other).norm()
    }

    pub fn add(&self, other: &Vector) -> Vector {
        assert_dims(self, other);
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        assert_dims(self, other);
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, t: f64) -> Vector {
        Vector(self.0.iter().map(|a| t * a).collect())
    }

    /// True when some component is NaN or infinite. Freshly constructed
    /// vectors are always finite; arithmetic can overflow into Inf/NaN and
    /// callers that iterate must check.
    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|a| a.is_finite())
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = VectorError;
    fn try_from(coords: Vec<f64>) -> Result<Self, Self::Error> {
        Vector::new(coords)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Vec<f64> {
        v.0
    }
}

fn assert_dims(x: &Vector, y: &Vector) {
    assert_eq!(
        x.dim(),
        y.dim(),
        "dimension mismatch: {} vs {}",
        x.dim(),
        y.dim()
    );
}

/// Convex/affine combination `λx + (1−λ)y`, componentwise.
///
/// `λ` may be any finite real; iteration callers restrict it to `[0, 1]`.
/// Panics on dimension mismatch or non-finite `λ`.
pub fn combine(lambda: f64, x: &Vector, y: &Vector) -> Vector {
    assert!(lambda.is_finite(), "combination weight must be finite");
    assert_dims(x, y);
    Vector(
        x.0.iter()
            .zip(&y.0)
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect(),
    )
}

/// Residual of the two-point convexity identity:
///
/// ```text
/// | |λx+(1−λ)y|² − ( λ|x|² + (1−λ)|y|² − λ(1−λ)|x−y|² ) |
/// ```
///
/// Mathematically zero for all finite λ; numerically bounded by
/// `1e-9 · (1 + |x|² + |y|²)` for doubles at moderate λ.
pub fn convexity_identity_residual(lambda: f64, x: &Vector, y: &Vector) -> f64 {
    assert!(lambda.is_finite(), "combination weight must be finite");
    assert_dims(x, y);
    let lhs = combine(lambda, x, y).inner(&combine(lambda, x, y));
    let rhs = lambda * x.inner(x) + (1.0 - lambda) * y.inner(y)
        - lambda * (1.0 - lambda) * x.sub(y).inner(&x.sub(y));
    (lhs - rhs).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn inner_examples() {
        let e1 = Vector::from_slice(&[1.0, 0.0]);
        let e2 = Vector::from_slice(&[0.0, 1.0]);
        assert_eq!(e1.inner(&e2), 0.0);
        assert_eq!(
            Vector::from_slice(&[1.0, 2.0]).inner(&Vector::from_slice(&[3.0, 4.0])),
            11.0
        );
        assert_eq!(
            Vector::from_slice(&[0.0, 0.0]).inner(&Vector::from_slice(&[5.0, 7.0])),
            0.0
        );
    }

    #[test]
    fn norm_is_sqrt_of_inner() {
        let v = Vector::from_slice(&[3.0, 4.0]);
        assert_eq!(v.norm(), 5.0);
    }

    #[test]
    fn combine_endpoints_and_midpoint() {
        let x = Vector::from_slice(&[2.0, 0.0]);
        let y = Vector::from_slice(&[0.0, 2.0]);
        assert_eq!(combine(1.0, &x, &y), x);
        assert_eq!(combine(0.0, &x, &y), y);
        assert_eq!(combine(0.5, &x, &y), Vector::from_slice(&[1.0, 1.0]));
    }

    #[test]
    fn combine_of_equal_points_is_exact_at_simple_weights() {
        let x = Vector::from_slice(&[0.3, -7.25, 1e-3]);
        for lambda in [0.0, 0.5, 1.0] {
            assert_eq!(combine(lambda, &x, &x), x);
        }
    }

    #[test]
    fn identity_residual_exact_at_endpoints() {
        let x = Vector::from_slice(&[1.5, -2.0]);
        let y = Vector::from_slice(&[0.25, 9.0]);
        assert_eq!(convexity_identity_residual(0.0, &x, &y), 0.0);
        assert_eq!(convexity_identity_residual(1.0, &x, &y), 0.0);
    }

    #[test]
    fn identity_residual_small_on_random_inputs() {
        // Deterministic LCG so the test is reproducible without rand.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 20.0 - 10.0
        };
        for _ in 0..200 {
            let x = Vector::new((0..5).map(|_| next()).collect()).unwrap();
            let y = Vector::new((0..5).map(|_| next()).collect()).unwrap();
            let bound = 1e-9 * (1.0 + x.inner(&x) + y.inner(&y));
            assert!(convexity_identity_residual(0.3, &x, &y) <= bound);
        }
    }

    #[test]
    #[should_panic(expected = "dimension mismatch")]
    fn inner_rejects_dimension_mismatch() {
        Vector::from_slice(&[1.0]).inner(&Vector::from_slice(&[1.0, 2.0]));
    }

    #[test]
    #[should_panic(expected = "dimension mismatch")]
    fn combine_rejects_dimension_mismatch() {
        combine(
            0.5,
            &Vector::from_slice(&[1.0]),
            &Vector::from_slice(&[1.0, 2.0]),
        );
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert_eq!(Vector::new(vec![]), Err(VectorError::Empty));
        assert!(matches!(
            Vector::new(vec![1.0, f64::NAN]),
            Err(VectorError::NonFinite { index: 1, .. })
        ));
        assert!(matches!(
            Vector::new(vec![f64::INFINITY]),
            Err(VectorError::NonFinite { index: 0, .. })
        ));
    }

    #[test]
    fn serde_round_trip_is_a_plain_array() {
        let v = Vector::from_slice(&[3.0, 3.0]);
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(json, "[3.0,3.0]");
        let back: Vector = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
        assert!(serde_json::from_str::<Vector>("[]").is_err());
    }

    proptest! {
        // Identity residual stays below the documented bound across
        // dimensions and weights (including weights outside [0,1]).
        #[test]
        fn prop_convexity_identity(
            d in prop::sample::select(vec![1usize, 2, 5, 20]),
            lambda in -2.0..3.0f64,
            seed in any::<u64>(),
        ) {
            let mut state = seed | 1;
            let mut next = move || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 11) as f64 / (1u64 << 53) as f64) * 20.0 - 10.0
            };
            let x = Vector::new((0..d).map(|_| next()).collect()).unwrap();
            let y = Vector::new((0..d).map(|_| next()).collect()).unwrap();
            let bound = 1e-9 * (1.0 + x.inner(&x) + y.inner(&y));
            prop_assert!(convexity_identity_residual(lambda, &x, &y) <= bound);
        }

        // Inner product is symmetric and bilinear to tight relative tolerance.
        #[test]
        fn prop_inner_symmetric_bilinear(
            a in -5.0..5.0f64,
            b in -5.0..5.0f64,
            seed in any::<u64>(),
        ) {
            let mut state = seed | 1;
            let mut next = move || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 11) as f64 / (1u64 << 53) as f64) * 10.0 - 5.0
            };
            let x = Vector::new((0..4).map(|_| next()).collect()).unwrap();
            let y = Vector::new((0..4).map(|_| next()).collect()).unwrap();
            let z = Vector::new((0..4).map(|_| next()).collect()).unwrap();
            prop_assert!((x.inner(&y) - y.inner(&x)).abs() <= 1e-12);
            let lhs = x.scale(a).add(&y.scale(b)).inner(&z);
            let rhs = a * x.inner(&z) + b * y.inner(&z);
            let scale = 1.0 + lhs.abs() + rhs.abs();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
        }
    }
}
