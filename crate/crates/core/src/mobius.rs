//! Möbius transformations `z -> (a z + b) / (c z + d)`.

use crate::error::{Error, Result};
use crate::point::Point;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Mobius<S> {
    pub a: S,
    pub b: S,
    pub c: S,
    pub d: S,
}

impl<S: Scalar> Mobius<S> {
    pub fn new(a: S, b: S, c: S, d: S) -> Result<Self> {
        let det = a.clone() * d.clone() - b.clone() * c.clone();
        if det.is_zero() {
            return Err(Error::SingularMobius);
        }
        Ok(Mobius { a, b, c, d })
    }

    pub fn identity(ctx: S::Ctx) -> Self {
        Mobius { a: S::one(ctx), b: S::zero(ctx), c: S::zero(ctx), d: S::one(ctx) }
    }

    /// `z -> 1 / (z - s)`
    pub fn inversion_at(s: &S) -> Self {
        let ctx = s.ctx();
        Mobius { a: S::zero(ctx), b: S::one(ctx), c: S::one(ctx), d: -s.clone() }
    }

    pub fn ctx(&self) -> S::Ctx {
        self.a.ctx()
    }

    pub fn apply(&self, p: &Point<S>) -> Point<S> {
        match p {
            Point::Infinity => {
                if self.c.is_zero() {
                    Point::Infinity
                } else {
                    Point::Finite(self.a.clone() / self.c.clone())
                }
            }
            Point::Finite(z) => {
                let den = self.c.clone() * z.clone() + self.d.clone();
                if den.is_zero() {
                    Point::Infinity
                } else {
                    Point::Finite((self.a.clone() * z.clone() + self.b.clone()) / den)
                }
            }
        }
    }

    /// Image of a finite point known not to be the pole.
    pub fn apply_finite(&self, z: &S) -> S {
        (self.a.clone() * z.clone() + self.b.clone()) / (self.c.clone() * z.clone() + self.d.clone())
    }

    pub fn inverse(&self) -> Self {
        Mobius { a: self.d.clone(), b: -self.b.clone(), c: -self.c.clone(), d: self.a.clone() }
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &Mobius<S>) -> Self {
        let m = |x: &S, y: &S| x.clone() * y.clone();
        Mobius {
            a: m(&self.a, &other.a) + m(&self.b, &other.c),
            b: m(&self.a, &other.b) + m(&self.b, &other.d),
            c: m(&self.c, &other.a) + m(&self.d, &other.c),
            d: m(&self.c, &other.b) + m(&self.d, &other.d),
        }
    }

    /// Derivative at a finite non-pole point.
    pub fn derivative(&self, z: &S) -> S {
        let det = self.a.clone() * self.d.clone() - self.b.clone() * self.c.clone();
        let den = self.c.clone() * z.clone() + self.d.clone();
        det / (den.clone() * den)
    }
}

/// The unique transformation sending `p, q, r` to `0, 1, ∞`.
pub fn mobius_from_triple<S: Scalar>(p: &Point<S>, q: &Point<S>, r: &Point<S>) -> Result<Mobius<S>> {
    let ctx = [p, q, r]
        .iter()
        .find_map(|x| x.finite().map(|z| z.ctx()))
        .ok_or(Error::InvalidTriple)?;
    let tol = S::tol(ctx);
    if p.approx_eq(q, tol) || p.approx_eq(r, tol) || q.approx_eq(r, tol) {
        return Err(Error::InvalidTriple);
    }
    let one = S::one(ctx);
    let zero = S::zero(ctx);
    let m = match (p, q, r) {
        (Point::Infinity, Point::Finite(q), Point::Finite(r)) => {
            Mobius { a: zero, b: q.clone() - r.clone(), c: one, d: -r.clone() }
        }
        (Point::Finite(p), Point::Infinity, Point::Finite(r)) => {
            Mobius { a: one.clone(), b: -p.clone(), c: one, d: -r.clone() }
        }
        (Point::Finite(p), Point::Finite(q), Point::Infinity) => {
            Mobius { a: one, b: -p.clone(), c: zero, d: q.clone() - p.clone() }
        }
        (Point::Finite(p), Point::Finite(q), Point::Finite(r)) => {
            let qr = q.clone() - r.clone();
            let qp = q.clone() - p.clone();
            Mobius {
                a: qr.clone(),
                b: -(p.clone() * qr),
                c: qp.clone(),
                d: -(r.clone() * qp),
            }
        }
        _ => return Err(Error::InvalidTriple),
    };
    Ok(m)
}
