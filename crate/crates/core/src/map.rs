//! Rational maps of the Riemann sphere as reduced quotients of polynomials.

use crate::error::{Error, Result};
use crate::mobius::Mobius;
use crate::point::Point;
use crate::poly::Poly;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct RationalMap<S: Scalar> {
    num: Poly<S>,
    den: Poly<S>,
}

/// Relative size below which a coefficient produced by floating arithmetic
/// is treated as cancellation noise.
pub fn noise_tol<S: Scalar>(ctx: S::Ctx) -> f64 {
    S::tol(ctx).powf(1.5)
}

impl<S: Scalar> RationalMap<S> {
    /// Builds `num / den`, cancelling common factors.
    pub fn new(num: Poly<S>, den: Poly<S>) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Input("zero denominator".into()));
        }
        let (num, den) = S::cancel_common(num, den);
        Ok(RationalMap { num, den })
    }

    /// Trusts the caller that `num` and `den` are coprime.
    pub fn from_coprime(num: Poly<S>, den: Poly<S>) -> Self {
        debug_assert!(!den.is_zero());
        RationalMap { num, den }
    }

    pub fn identity(ctx: S::Ctx) -> Self {
        RationalMap {
            num: Poly::linear(S::zero(ctx), S::one(ctx)),
            den: Poly::one(ctx),
        }
    }

    pub fn num(&self) -> &Poly<S> {
        &self.num
    }

    pub fn den(&self) -> &Poly<S> {
        &self.den
    }

    pub fn ctx(&self) -> S::Ctx {
        self.den.ctx()
    }

    pub fn degree(&self) -> usize {
        self.num.degree().unwrap_or(0).max(self.den.degree().unwrap_or(0))
    }

    pub fn eval(&self, p: &Point<S>) -> Point<S> {
        match p {
            Point::Finite(z) => {
                let d = self.den.eval(z);
                if d.is_zero() {
                    Point::Infinity
                } else {
                    Point::Finite(self.num.eval(z) / d)
                }
            }
            Point::Infinity => {
                let dn = self.num.degree();
                let dd = self.den.degree().unwrap_or(0);
                match dn {
                    Some(n) if n > dd => Point::Infinity,
                    Some(n) if n == dd => Point::Finite(self.num.leading() / self.den.leading()),
                    _ => Point::Finite(S::zero(self.ctx())),
                }
            }
        }
    }

    pub fn eval_finite(&self, z: &S) -> S {
        self.num.eval(z) / self.den.eval(z)
    }

    /// `F'(z)` at a finite non-pole point.
    pub fn derivative_at(&self, z: &S) -> S {
        let n = self.num.eval(z);
        let d = self.den.eval(z);
        let n1 = self.num.derivative().eval(z);
        let d1 = self.den.derivative().eval(z);
        (n1 * d.clone() - n * d1) / (d.clone() * d)
    }

    /// `num - z den`, whose roots are the finite fixed points.
    pub fn fixed_point_poly(&self) -> Poly<S> {
        &self.num - &self.den.shift_up(1)
    }

    /// Multiplicity of `∞` as a fixed point.
    pub fn infinity_multiplicity(&self) -> usize {
        let p = self.fixed_point_poly().trim_rel(noise_tol::<S>(self.ctx()));
        match p.degree() {
            Some(k) => (self.degree() + 1).saturating_sub(k),
            None => 0,
        }
    }

    pub fn is_identity(&self) -> bool {
        let p = self.fixed_point_poly();
        let scale = self.num.norm().max(self.den.norm());
        if S::EXACT {
            p.is_zero()
        } else {
            p.norm() <= S::tol(self.ctx()) * scale
        }
    }

    /// `t ∘ F ∘ t⁻¹`, computed homogeneously so the result stays reduced.
    pub fn conjugate(&self, t: &Mobius<S>) -> Self {
        let d = self.degree();
        let ti = t.inverse();
        let x = Poly::linear(ti.b.clone(), ti.a.clone());
        let y = Poly::linear(ti.d.clone(), ti.c.clone());
        let n = self.num.homogeneous_substitute(d, &x, &y);
        let m = self.den.homogeneous_substitute(d, &x, &y);
        let num = &n.scale(&t.a) + &m.scale(&t.b);
        let den = &n.scale(&t.c) + &m.scale(&t.d);
        let tol = noise_tol::<S>(self.ctx());
        let scale = num.norm().max(den.norm());
        RationalMap {
            num: trim_abs(num, tol * scale),
            den: trim_abs(den, tol * scale),
        }
    }

    /// Rescales so the largest denominator coefficient is one.
    pub fn normalized(&self) -> Self {
        let (i, _) = self
            .den
            .coeffs()
            .iter()
            .enumerate()
            .map(|(i, x)| (i, x.abs()))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        let s = self.den.coeff(i).recip();
        RationalMap { num: self.num.scale(&s), den: self.den.scale(&s) }
    }

    /// Equality as maps, up to a relative coefficient tolerance.
    pub fn approx_eq(&self, other: &RationalMap<S>, tol: f64) -> bool {
        let a = self.normalized();
        let (i, _) = a
            .den
            .coeffs()
            .iter()
            .enumerate()
            .find(|(_, x)| if S::EXACT { !x.is_zero() } else { x.abs() >= 0.5 })
            .expect("normalized denominator has a unit coefficient");
        let oi = other.den.coeff(i);
        if oi.near_zero(tol) {
            return false;
        }
        let s = a.den.coeff(i) / oi;
        let b = RationalMap { num: other.num.scale(&s), den: other.den.scale(&s) };
        let scale = 1.0 + a.num.norm().max(a.den.norm());
        let close = |p: &Poly<S>, q: &Poly<S>| {
            let diff = p - q;
            if S::EXACT {
                diff.is_zero()
            } else {
                diff.norm() <= tol * scale
            }
        };
        close(&a.num, &b.num) && close(&a.den, &b.den)
    }
}

fn trim_abs<S: Scalar>(p: Poly<S>, cut: f64) -> Poly<S> {
    if S::EXACT {
        return p;
    }
    let ctx = p.ctx();
    let mut c = p.into_coeffs();
    while c.last().is_some_and(|x| x.abs() <= cut) {
        c.pop();
    }
    Poly::new(ctx, c)
}
