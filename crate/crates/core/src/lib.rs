//! Rational maps through their fixed-point data, noded Riemann spheres and the
//! degenerations connecting them.
//!
//! Every algorithm is generic over [`Scalar`]; the aliases below fix the three
//! supported backends.

pub mod degeneration;
pub mod dynamics;
pub mod error;
pub mod function;
pub mod io;
pub mod map;
pub mod mobius;
pub mod obstruction;
pub mod point;
pub mod poly;
pub mod reopening;
pub mod roots;
pub mod scalar;
pub mod sphere;

pub use dynamics::{
    dynamical_index, fixed_points, from_fixed_point_data, from_principal_parts, is_polynomial_like,
    principal_part, FixedPointData, PolynomialLike, PrincipalPart,
};
pub use error::{Error, Result, Violation, ViolationKind};
pub use map::RationalMap;
pub use mobius::{mobius_from_triple, Mobius};
pub use point::Point;
pub use poly::Poly;
pub use scalar::{FloatScalar, MpComplex, Scalar, DEFAULT_PRECISION};

/// Double precision complex numbers.
pub type C64 = num_complex::Complex<f64>;
/// Gaussian rationals, for exact arithmetic.
pub type Exact = num_complex::Complex<num_rational::BigRational>;
/// Arbitrary precision complex numbers.
pub type Mp = MpComplex;

pub type MapF64 = RationalMap<C64>;
pub type MapExact = RationalMap<Exact>;
pub type MapMp = RationalMap<Mp>;


