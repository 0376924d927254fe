//! Fixed points, holomorphic indices and principal parts of the 1-form
//! `dz / (z - F(z))`, plus the inverse constructions.

use crate::error::{Error, Result};
use crate::map::{noise_tol, RationalMap};
use crate::mobius::{mobius_from_triple, Mobius};
use crate::point::Point;
use crate::poly::Poly;
use crate::roots::roots_with_multiplicity;
use crate::scalar::{approx_eq, FloatScalar, Scalar};

/// Fixed points with their indices, describing a generic map of degree `len - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct FixedPointData<S> {
    pub points: Vec<S>,
    pub indices: Vec<S>,
}

impl<S: Scalar> FixedPointData<S> {
    pub fn new(points: Vec<S>, indices: Vec<S>) -> Result<Self> {
        let d = FixedPointData { points, indices };
        d.validate()?;
        Ok(d)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.points.len().saturating_sub(1)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.points.len();
        if self.indices.len() != n {
            return Err(Error::Input("points and indices differ in length".into()));
        }
        if n < 3 {
            return Err(Error::TooFewPoints(n));
        }
        let ctx = self.points[0].ctx();
        let tol = S::tol(ctx);
        for i in 0..n {
            for j in i + 1..n {
                if approx_eq(&self.points[i], &self.points[j], tol) {
                    return Err(Error::Collision(i, j));
                }
            }
        }
        let big = self.indices.iter().map(|x| x.abs()).fold(1.0, f64::max);
        if let Some(i) = self.indices.iter().position(|x| x.near_zero(tol * big)) {
            return Err(Error::DegenerateIndex(i));
        }
        let sum = self.indices.iter().cloned().fold(S::zero(ctx), |a, b| a + b);
        let off = sum.clone() - S::one(ctx);
        if !off.near_zero(tol * big * n as f64) {
            return Err(Error::IndexFormula(format!("{}", sum.to_c64())));
        }
        Ok(())
    }
}

/// Polar part `sum_l c_l / (z - p)^l` of the 1-form at a finite point.
#[derive(Clone, Debug, PartialEq)]
pub struct PrincipalPart<S> {
    pub point: S,
    pub coeffs: Vec<S>,
}

/// The rational map whose 1-form `dz / (z - F)` has exactly the given
/// principal parts (and no others). With residues summing to one, `∞` is not fixed.
pub fn from_principal_parts<S: Scalar>(parts: &[PrincipalPart<S>]) -> Result<RationalMap<S>> {
    let parts: Vec<(S, Vec<S>)> = parts
        .iter()
        .filter_map(|p| {
            let mut c = p.coeffs.clone();
            while c.last().is_some_and(|x| x.is_zero()) {
                c.pop();
            }
            (!c.is_empty()).then(|| (p.point.clone(), c))
        })
        .collect();
    if parts.is_empty() {
        return Err(Error::Input("no nonzero principal part".into()));
    }
    let ctx = parts[0].0.ctx();
    let tol = S::tol(ctx);
    for i in 0..parts.len() {
        for j in i + 1..parts.len() {
            if approx_eq(&parts[i].0, &parts[j].0, tol) {
                return Err(Error::Collision(i, j));
            }
        }
    }
    let factors: Vec<Poly<S>> = parts
        .iter()
        .map(|(p, c)| Poly::root_factor(p).pow(c.len()))
        .collect();
    let mut den_form = Poly::one(ctx);
    for f in &factors {
        den_form = &den_form * f;
    }
    let mut n = Poly::zero(ctx);
    for (k, (p, c)) in parts.iter().enumerate() {
        let mut others = Poly::one(ctx);
        for (i, f) in factors.iter().enumerate() {
            if i != k {
                others = &others * f;
            }
        }
        let lin = Poly::root_factor(p);
        let l = c.len();
        let mut local = Poly::zero(ctx);
        for (idx, cl) in c.iter().enumerate() {
            local = &local + &lin.pow(l - 1 - idx).scale(cl);
        }
        n = &n + &(&local * &others);
    }
    if n.is_zero() {
        return Err(Error::Input("principal parts cancel".into()));
    }
    let mut num = &n.shift_up(1) - &den_form;
    let total = den_form.degree().unwrap();
    let residue_sum = parts.iter().fold(S::zero(ctx), |a, (_, c)| a + c[0].clone());
    if !S::EXACT && (residue_sum - S::one(ctx)).near_zero(tol) && num.degree() == Some(total) {
        let mut c = num.into_coeffs();
        c.pop();
        num = Poly::new(ctx, c);
    }
    Ok(RationalMap::from_coprime(num, n))
}

/// The generic map with simple fixed points `points` and the given indices.
pub fn from_fixed_point_data<S: Scalar>(data: &FixedPointData<S>) -> Result<RationalMap<S>> {
    data.validate()?;
    let parts: Vec<PrincipalPart<S>> = data
        .points
        .iter()
        .zip(&data.indices)
        .map(|(p, l)| PrincipalPart { point: p.clone(), coeffs: vec![l.clone()] })
        .collect();
    from_principal_parts(&parts)
}

/// Fixed-point multiset of `f`, including `∞`.
pub fn fixed_points<S: FloatScalar>(f: &RationalMap<S>) -> Result<Vec<(Point<S>, usize)>> {
    if f.is_identity() {
        return Err(Error::IdentityMap);
    }
    let mut out = Vec::new();
    let m = f.infinity_multiplicity();
    if m > 0 {
        out.push((Point::Infinity, m));
    }
    let p = f.fixed_point_poly().trim_rel(noise_tol::<S>(f.ctx()));
    for (z, k) in roots_with_multiplicity(&p) {
        out.push((Point::Finite(z), k));
    }
    Ok(out)
}

/// Order of vanishing of `z - F(z)` at a finite point, with the Laurent
/// coefficients `c_1..c_m` of `1 / (z - F(z))` there.
pub fn local_expansion<S: Scalar>(f: &RationalMap<S>, p: &S) -> Result<(usize, Vec<S>)> {
    let ctx = f.ctx();
    let shifted = (-&f.fixed_point_poly()).taylor_shift(p);
    let m = shifted.zero_order(S::tol(ctx));
    if m == usize::MAX {
        return Err(Error::IdentityMap);
    }
    if m == 0 {
        return Err(Error::NotFixed);
    }
    let q = shifted.shift_down(m);
    let d = f.den().taylor_shift(p);
    let s = d.series_div(&q, m);
    Ok((m, (1..=m).map(|l| s[m - l].clone()).collect()))
}

/// Fixed-point multiplicity of `f` at `p` (zero when not fixed).
pub fn multiplicity_at<S: Scalar>(f: &RationalMap<S>, p: &Point<S>) -> Result<usize> {
    if f.is_identity() {
        return Err(Error::IdentityMap);
    }
    Ok(match p {
        Point::Infinity => f.infinity_multiplicity(),
        Point::Finite(z) => {
            let shifted = f.fixed_point_poly().taylor_shift(z);
            shifted.zero_order(S::tol(f.ctx()))
        }
    })
}

/// A point that is not fixed, used to move `∞` into a finite chart.
pub fn non_fixed_point<S: Scalar>(f: &RationalMap<S>) -> S {
    let ctx = f.ctx();
    let p = f.fixed_point_poly();
    let scale = p.norm().max(1e-300);
    let mut best = (S::zero(ctx), -1.0);
    for k in 0..12i64 {
        let re = [0, 1, -1, 2, -2, 3][(k % 6) as usize];
        let s = if k < 6 { S::from_i64(ctx, re) } else { S::from_f64(ctx, re as f64 * 0.5, 1.0) };
        let w = p.eval(&s).abs() / (scale * (1.0 + s.abs()).powi(p.degree().unwrap_or(0) as i32));
        if w > 1e-3 {
            return s;
        }
        if w > best.1 {
            best = (s, w);
        }
    }
    best.0
}

/// Holomorphic index `Res_p dz / (z - F(z))` at a fixed point.
pub fn dynamical_index<S: Scalar>(f: &RationalMap<S>, p: &Point<S>) -> Result<S> {
    match p {
        Point::Finite(z) => Ok(local_expansion(f, z)?.1.remove(0)),
        Point::Infinity => {
            if f.is_identity() {
                return Err(Error::IdentityMap);
            }
            if f.infinity_multiplicity() == 0 {
                return Err(Error::NotFixed);
            }
            let s = non_fixed_point(f);
            let g = f.conjugate(&Mobius::inversion_at(&s));
            Ok(local_expansion(&g, &S::zero(f.ctx()))?.1.remove(0))
        }
    }
}

/// Principal part coefficients `(c_1..c_level)` of the 1-form at `p` in the
/// chart sending `p, u, v` to `0, 1, ∞`.
pub fn principal_part<S: Scalar>(
    f: &RationalMap<S>,
    p: &Point<S>,
    u: &Point<S>,
    v: &Point<S>,
    level: usize,
) -> Result<Vec<S>> {
    let t = mobius_from_triple(p, u, v)?;
    let g = f.conjugate(&t);
    let ctx = f.ctx();
    let (m, mut c) = local_expansion(&g, &S::zero(ctx))?;
    if m > level {
        return Err(Error::LevelExceeded { multiplicity: m, level });
    }
    c.resize(level, S::zero(ctx));
    Ok(c)
}

#[derive(Clone, Debug, PartialEq)]
pub enum PolynomialLike<S> {
    Constant,
    /// Conjugate to a polynomial by `witness`, which sends `point` to `∞`.
    Conjugate { point: Point<S>, witness: Mobius<S> },
    No,
}

/// Detects a totally invariant fixed point.
pub fn is_polynomial_like<S: FloatScalar>(f: &RationalMap<S>) -> Result<PolynomialLike<S>> {
    let ctx = f.ctx();
    let d = f.degree();
    if d == 0 {
        return Ok(PolynomialLike::Constant);
    }
    let tol = S::tol(ctx);
    let nt = noise_tol::<S>(ctx);
    if f.den().clone().trim_rel(nt).degree() == Some(0) {
        return Ok(PolynomialLike::Conjugate { point: Point::Infinity, witness: Mobius::identity(ctx) });
    }
    for (p, _) in fixed_points(f)? {
        let Point::Finite(q) = p else { continue };
        let r = f.num() - &f.den().scale(&q);
        if r.clone().trim_rel(nt).degree() != Some(d) {
            continue;
        }
        if r.taylor_shift(&q).zero_order(tol) == d {
            return Ok(PolynomialLike::Conjugate {
                witness: Mobius::inversion_at(&q),
                point: Point::Finite(q),
            });
        }
    }
    Ok(PolynomialLike::No)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Exact, Mp, C64};

    fn q(n: i64, d: i64) -> Exact {
        Exact::from_ratio((), n, d)
    }

    #[test]
    fn exact_round_trip_three_points() {
        let data = FixedPointData::new(
            vec![q(0, 1), q(1, 1), q(-2, 1)],
            vec![q(1, 2), q(1, 3), q(1, 6)],
        )
        .unwrap();
        let f = from_fixed_point_data(&data).unwrap();
        assert_eq!(f.degree(), 2);
        for (p, l) in data.points.iter().zip(&data.indices) {
            assert_eq!(&dynamical_index(&f, &Point::Finite(p.clone())).unwrap(), l);
        }
        assert_eq!(f.infinity_multiplicity(), 0);
    }

    #[test]
    fn index_at_infinity_of_quadratic_polynomial() {
        // z^2 + c: infinity is superattracting, so its index is 1
        let ctx = 128;
        let c = Mp::from_f64(ctx, -0.3, 0.2);
        let f = RationalMap::new(
            Poly::new(ctx, vec![c, Mp::zero(ctx), Mp::one(ctx)]),
            Poly::one(ctx),
        )
        .unwrap();
        let idx = dynamical_index(&f, &Point::Infinity).unwrap();
        assert!((idx - Mp::one(ctx)).abs() < 1e-30);
        let total = fixed_points(&f)
            .unwrap()
            .into_iter()
            .map(|(p, _)| dynamical_index(&f, &p).unwrap())
            .fold(Mp::zero(ctx), |a, b| a + b);
        assert!((total - Mp::one(ctx)).abs() < 1e-30);
    }

    #[test]
    fn polynomial_like_detection() {
        let f = RationalMap::new(
            Poly::new((), vec![C64::new(0.25, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]),
            Poly::one(()),
        )
        .unwrap();
        assert!(matches!(is_polynomial_like(&f).unwrap(), PolynomialLike::Conjugate { point: Point::Infinity, .. }));
        let g = f.conjugate(&Mobius::inversion_at(&C64::new(2.0, 0.0)));
        match is_polynomial_like(&g).unwrap() {
            PolynomialLike::Conjugate { point: Point::Finite(z), .. } => assert!(z.norm() < 1e-6),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn double_point_principal_part_exact() {
        // 1/(z - F) = 1/z + 2/z^2 + (-0)/(z-1)... built from parts
        let parts = vec![
            PrincipalPart { point: q(0, 1), coeffs: vec![q(1, 2), q(2, 1)] },
            PrincipalPart { point: q(3, 1), coeffs: vec![q(1, 2)] },
        ];
        let f = from_principal_parts(&parts).unwrap();
        let (m, c) = local_expansion(&f, &q(0, 1)).unwrap();
        assert_eq!(m, 2);
        assert_eq!(c, vec![q(1, 2), q(2, 1)]);
    }
}
