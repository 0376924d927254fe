//! Points of the Riemann sphere.

use crate::scalar::{approx_eq, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub enum Point<S> {
    Finite(S),
    Infinity,
}

impl<S: Scalar> Point<S> {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Point::Infinity)
    }

    pub fn finite(&self) -> Option<&S> {
        match self {
            Point::Finite(z) => Some(z),
            Point::Infinity => None,
        }
    }

    /// Both infinite, or both finite and within tolerance.
    pub fn approx_eq(&self, other: &Point<S>, tol: f64) -> bool {
        match (self, other) {
            (Point::Infinity, Point::Infinity) => true,
            (Point::Finite(a), Point::Finite(b)) => approx_eq(a, b, tol),
            _ => false,
        }
    }

    /// Chordal-style distance proxy used for picking well separated charts.
    pub fn rough_distance(&self, other: &Point<S>) -> f64 {
        match (self, other) {
            (Point::Infinity, Point::Infinity) => 0.0,
            (Point::Finite(a), Point::Finite(b)) => {
                let (a, b) = (a.to_c64(), b.to_c64());
                (a - b).norm() / ((1.0 + a.norm_sqr()).sqrt() * (1.0 + b.norm_sqr()).sqrt())
            }
            (Point::Finite(a), Point::Infinity) | (Point::Infinity, Point::Finite(a)) => {
                1.0 / (1.0 + a.to_c64().norm_sqr()).sqrt()
            }
        }
    }
}

impl<S> From<S> for Point<S> {
    fn from(z: S) -> Self {
        Point::Finite(z)
    }
}
