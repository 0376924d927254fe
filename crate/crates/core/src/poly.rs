//! Dense univariate polynomials, coefficients in ascending order.

use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Poly<S: Scalar> {
    ctx: S::Ctx,
    c: Vec<S>,
}

impl<S: Scalar> Poly<S> {
    /// Builds a polynomial, dropping exactly-zero leading coefficients.
    pub fn new(ctx: S::Ctx, coeffs: Vec<S>) -> Self {
        let mut p = Poly { ctx, c: coeffs };
        p.trim_exact();
        p
    }

    pub fn zero(ctx: S::Ctx) -> Self {
        Poly { ctx, c: Vec::new() }
    }

    pub fn constant(c: S) -> Self {
        Poly::new(c.ctx(), vec![c])
    }

    pub fn one(ctx: S::Ctx) -> Self {
        Poly::constant(S::one(ctx))
    }

    /// `a + b z`
    pub fn linear(a: S, b: S) -> Self {
        Poly::new(a.ctx(), vec![a, b])
    }

    /// `z - r`
    pub fn root_factor(r: &S) -> Self {
        Poly::linear(-r.clone(), S::one(r.ctx()))
    }

    pub fn from_roots(ctx: S::Ctx, roots: &[S]) -> Self {
        roots
            .iter()
            .fold(Poly::one(ctx), |acc, r| &acc * &Poly::root_factor(r))
    }

    pub fn ctx(&self) -> S::Ctx {
        self.ctx
    }

    pub fn coeffs(&self) -> &[S] {
        &self.c
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.c
    }

    pub fn coeff(&self, i: usize) -> S {
        self.c.get(i).cloned().unwrap_or_else(|| S::zero(self.ctx))
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    /// Largest coefficient modulus.
    pub fn norm(&self) -> f64 {
        self.c.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    fn trim_exact(&mut self) {
        while self.c.last().is_some_and(|x| x.is_zero()) {
            self.c.pop();
        }
    }

    /// Drops leading coefficients below `tol` relative to the largest one.
    pub fn trim_rel(mut self, tol: f64) -> Self {
        if S::EXACT {
            return self;
        }
        let cut = tol * self.norm();
        while self.c.last().is_some_and(|x| x.abs() <= cut) {
            self.c.pop();
        }
        self
    }

    /// Degree after relative trimming.
    pub fn degree_rel(&self, tol: f64) -> Option<usize> {
        self.clone().trim_rel(tol).degree()
    }

    pub fn leading(&self) -> S {
        self.c.last().cloned().unwrap_or_else(|| S::zero(self.ctx))
    }

    pub fn eval(&self, z: &S) -> S {
        let mut acc = S::zero(self.ctx);
        for a in self.c.iter().rev() {
            acc = acc * z.clone() + a.clone();
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        let c = self
            .c
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, a)| a.clone() * S::from_i64(self.ctx, i as i64))
            .collect();
        Poly::new(self.ctx, c)
    }

    pub fn scale(&self, s: &S) -> Self {
        Poly::new(self.ctx, self.c.iter().map(|a| a.clone() * s.clone()).collect())
    }

    /// Multiplication by `z^k`.
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = vec![S::zero(self.ctx); k];
        c.extend(self.c.iter().cloned());
        Poly { ctx: self.ctx, c }
    }

    /// Drops the `k` lowest coefficients (division by `z^k`, discarding the remainder).
    pub fn shift_down(&self, k: usize) -> Self {
        Poly::new(self.ctx, self.c.iter().skip(k).cloned().collect())
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Poly::one(self.ctx), |acc, _| &acc * self)
    }

    /// Long division. Panics on a zero divisor.
    pub fn div_rem(&self, d: &Poly<S>) -> (Poly<S>, Poly<S>) {
        let dd = d.degree().expect("division by zero polynomial");
        let lead = d.leading();
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (Poly::zero(self.ctx), self.clone());
        }
        let mut q = vec![S::zero(self.ctx); r.len() - dd];
        for i in (0..q.len()).rev() {
            let f = r[i + dd].clone() / lead.clone();
            for j in 0..=dd {
                r[i + j] = r[i + j].clone() - f.clone() * d.c[j].clone();
            }
            q[i] = f;
        }
        r.truncate(dd);
        (Poly::new(self.ctx, q), Poly::new(self.ctx, r))
    }

    /// Synthetic division by `z - a`: returns quotient and `p(a)`.
    pub fn deflate(&self, a: &S) -> (Poly<S>, S) {
        if self.c.is_empty() {
            return (self.clone(), S::zero(self.ctx));
        }
        let n = self.c.len();
        let mut q = vec![S::zero(self.ctx); n - 1];
        let mut acc = S::zero(self.ctx);
        for i in (0..n).rev() {
            acc = acc * a.clone() + self.c[i].clone();
            if i > 0 {
                q[i - 1] = acc.clone();
            }
        }
        (Poly::new(self.ctx, q), acc)
    }

    /// Taylor shift: the polynomial `t -> p(a + t)`.
    pub fn taylor_shift(&self, a: &S) -> Self {
        let mut c = self.c.clone();
        let n = c.len();
        for i in 0..n {
            for j in (i..n.saturating_sub(1)).rev() {
                c[j] = c[j].clone() + a.clone() * c[j + 1].clone();
            }
        }
        Poly::new(self.ctx, c)
    }

    /// Number of leading low-order coefficients that vanish, i.e. the order of
    /// vanishing at zero. Float backends compare against `tol` times the norm.
    pub fn zero_order(&self, tol: f64) -> usize {
        if self.is_zero() {
            return usize::MAX;
        }
        let cut = tol * self.norm();
        self.c
            .iter()
            .take_while(|x| if S::EXACT { x.is_zero() } else { x.abs() <= cut })
            .count()
    }

    /// Truncated power series quotient `self / d` up to order `n` (exclusive).
    /// `d(0)` must be nonzero.
    pub fn series_div(&self, d: &Poly<S>, n: usize) -> Vec<S> {
        let d0 = d.coeff(0);
        let mut out: Vec<S> = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = self.coeff(k);
            for i in 1..=k {
                acc = acc - d.coeff(i) * out[k - i].clone();
            }
            out.push(acc / d0.clone());
        }
        out
    }

    /// Monic greatest common divisor via the Euclidean algorithm.
    /// Meaningful for exact backends only.
    pub fn gcd(&self, other: &Poly<S>) -> Poly<S> {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        let l = a.leading();
        a.scale(&l.recip())
    }

    /// Evaluates `sum c_i x^i y^(deg - i)` at `x = X(z)`, `y = Y(z)` for linear `X`, `Y`.
    pub fn homogeneous_substitute(&self, deg: usize, x: &Poly<S>, y: &Poly<S>) -> Poly<S> {
        let xp: Vec<Poly<S>> = powers(x, deg);
        let yp: Vec<Poly<S>> = powers(y, deg);
        let mut acc = Poly::zero(self.ctx);
        for (i, ci) in self.c.iter().enumerate() {
            if ci.is_zero() {
                continue;
            }
            acc = &acc + &(&xp[i] * &yp[deg - i]).scale(ci);
        }
        acc
    }
}

fn powers<S: Scalar>(p: &Poly<S>, n: usize) -> Vec<Poly<S>> {
    let mut out = vec![Poly::one(p.ctx())];
    for i in 0..n {
        let next = &out[i] * p;
        out.push(next);
    }
    out
}

impl<S: Scalar> Add for &Poly<S> {
    type Output = Poly<S>;
    fn add(self, o: &Poly<S>) -> Poly<S> {
        let n = self.c.len().max(o.c.len());
        let c = (0..n).map(|i| self.coeff(i) + o.coeff(i)).collect();
        Poly::new(self.ctx, c)
    }
}

impl<S: Scalar> Sub for &Poly<S> {
    type Output = Poly<S>;
    fn sub(self, o: &Poly<S>) -> Poly<S> {
        let n = self.c.len().max(o.c.len());
        let c = (0..n).map(|i| self.coeff(i) - o.coeff(i)).collect();
        Poly::new(self.ctx, c)
    }
}

impl<S: Scalar> Mul for &Poly<S> {
    type Output = Poly<S>;
    fn mul(self, o: &Poly<S>) -> Poly<S> {
        if self.is_zero() || o.is_zero() {
            return Poly::zero(self.ctx);
        }
        let mut c = vec![S::zero(self.ctx); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] = c[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::new(self.ctx, c)
    }
}

impl<S: Scalar> Neg for &Poly<S> {
    type Output = Poly<S>;
    fn neg(self) -> Poly<S> {
        Poly::new(self.ctx, self.c.iter().map(|a| -a.clone()).collect())
    }
}
