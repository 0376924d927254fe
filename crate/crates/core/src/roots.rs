//! Simultaneous polynomial root finding (Aberth iteration) with multiplicity
//! detection by clustering.

use num_complex::Complex;
use petgraph::unionfind::UnionFind;

use crate::poly::Poly;
use crate::scalar::{FloatScalar, Scalar};

type C = Complex<f64>;

fn aberth_step<S: Scalar>(p: &Poly<S>, dp: &Poly<S>, z: &mut [S]) -> f64 {
    let n = z.len();
    let mut max_rel = 0.0f64;
    for i in 0..n {
        let pv = p.eval(&z[i]);
        if pv.is_zero() {
            continue;
        }
        let ratio = pv / dp.eval(&z[i]);
        let mut sum = S::zero(z[i].ctx());
        for j in 0..n {
            if j != i {
                let diff = z[i].clone() - z[j].clone();
                if !diff.is_zero() {
                    sum = sum + diff.recip();
                }
            }
        }
        let denom = S::one(z[i].ctx()) - ratio.clone() * sum;
        let step = if denom.is_zero() { ratio } else { ratio / denom };
        let rel = step.abs() / (1.0 + z[i].abs());
        if rel.is_finite() {
            max_rel = max_rel.max(rel);
            z[i] = z[i].clone() - step;
        } else {
            max_rel = f64::INFINITY;
        }
    }
    max_rel
}

fn initial_guesses(p: &Poly<C>) -> Vec<C> {
    let n = p.degree().unwrap_or(0);
    let lead = p.leading().norm();
    // Fujiwara bound on the root moduli
    let mut r = 0.0f64;
    for i in 1..=n {
        let a = p.coeff(n - i).norm() / lead;
        let f = if i == n { a / 2.0 } else { a };
        r = r.max(f.powf(1.0 / i as f64));
    }
    let r = (2.0 * r).max(1e-3);
    (0..n)
        .map(|k| C::from_polar(r, std::f64::consts::TAU * k as f64 / n as f64 + 0.4))
        .collect()
}

/// All roots of `p` repeated by multiplicity, polished to working precision.
pub fn roots<S: FloatScalar>(p: &Poly<S>) -> Vec<S> {
    let n = match p.degree() {
        Some(n) if n > 0 => n,
        _ => return Vec::new(),
    };
    let ctx = p.ctx();
    let pc = Poly::new((), p.coeffs().iter().map(|x| x.to_c64()).collect());
    let dpc = pc.derivative();
    let mut z = initial_guesses(&pc);
    let mut best = f64::INFINITY;
    let mut stall = 0;
    for _ in 0..2000 {
        let step = aberth_step(&pc, &dpc, &mut z);
        if step < 1e-15 {
            break;
        }
        if step < best * 0.999 {
            best = step;
            stall = 0;
        } else {
            stall += 1;
            if stall > 50 {
                break;
            }
        }
    }
    let mut zs: Vec<S> = z.iter().map(|w| S::from_c64(ctx, *w)).collect();
    if n > 0 && S::precision(ctx) > 53 {
        let dp = p.derivative();
        let target = S::unit_roundoff(ctx) * 16.0;
        let mut best = f64::INFINITY;
        let mut stall = 0;
        for _ in 0..4000 {
            let step = aberth_step(p, &dp, &mut zs);
            if step < target {
                break;
            }
            if step < best * 0.99 {
                best = step;
                stall = 0;
            } else {
                stall += 1;
                if stall > 20 {
                    break;
                }
            }
        }
    }
    zs
}

/// Distinct roots with multiplicities. Approximations whose spread is
/// compatible with a multiple root at working precision are merged and
/// replaced by their centroid.
pub fn roots_with_multiplicity<S: FloatScalar>(p: &Poly<S>) -> Vec<(S, usize)> {
    let zs = roots(p);
    let n = zs.len();
    if n == 0 {
        return Vec::new();
    }
    let ctx = p.ctx();
    let u = S::unit_roundoff(ctx) * 2f64.powi(20);
    let scale = 1.0 + zs.iter().map(|z| z.abs()).fold(0.0, f64::max);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    split_clusters(&zs, (0..n).collect(), scale, u, &mut groups);
    groups
        .into_iter()
        .map(|idx| {
            let m = idx.len();
            let mut c = S::zero(ctx);
            for &i in &idx {
                c = c + zs[i].clone();
            }
            c = c / S::from_i64(ctx, m as i64);
            if m > 1 {
                c = polish_multiple(p, c, m);
            }
            (c, m)
        })
        .collect()
}

fn diameter<S: Scalar>(zs: &[S], idx: &[usize]) -> f64 {
    let mut d = 0.0f64;
    for (k, &i) in idx.iter().enumerate() {
        for &j in &idx[k + 1..] {
            d = d.max((zs[i].clone() - zs[j].clone()).abs());
        }
    }
    d
}

fn link<S: Scalar>(zs: &[S], idx: &[usize], threshold: f64) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::<usize>::new(idx.len());
    for a in 0..idx.len() {
        for b in a + 1..idx.len() {
            if (zs[idx[a]].clone() - zs[idx[b]].clone()).abs() <= threshold {
                uf.union(a, b);
            }
        }
    }
    let mut out: Vec<(usize, Vec<usize>)> = Vec::new();
    for (a, &i) in idx.iter().enumerate() {
        let r = uf.find(a);
        match out.iter_mut().find(|g| g.0 == r) {
            Some(g) => g.1.push(i),
            None => out.push((r, vec![i])),
        }
    }
    out.into_iter().map(|g| g.1).collect()
}

/// A group of `m` approximations is one root when its diameter is within the
/// spread expected of an `m`-fold root; otherwise it is split with a tighter
/// linkage threshold.
fn split_clusters<S: Scalar>(zs: &[S], idx: Vec<usize>, scale: f64, u: f64, out: &mut Vec<Vec<usize>>) {
    let m = idx.len();
    if m == 1 || diameter(zs, &idx) <= scale * u.powf(1.0 / m as f64) {
        out.push(idx);
        return;
    }
    for k in (1..m).rev() {
        let parts = link(zs, &idx, scale * u.powf(1.0 / k as f64));
        if parts.len() > 1 {
            for part in parts {
                split_clusters(zs, part, scale, u, out);
            }
            return;
        }
    }
    for i in idx {
        out.push(vec![i]);
    }
}

/// Newton on the `(m-1)`-th derivative, which has a simple root at an `m`-fold root.
fn polish_multiple<S: FloatScalar>(p: &Poly<S>, mut z: S, m: usize) -> S {
    let mut q = p.clone();
    for _ in 1..m {
        q = q.derivative();
    }
    let dq = q.derivative();
    for _ in 0..8 {
        let d = dq.eval(&z);
        if d.is_zero() {
            break;
        }
        let step = q.eval(&z) / d;
        if step.abs() > 1e-3 * (1.0 + z.abs()) {
            break;
        }
        z = z - step;
    }
    z
}

/// Cancels approximate common roots of a numerator/denominator pair.
pub fn cancel_common_roots<S: FloatScalar>(mut num: Poly<S>, mut den: Poly<S>) -> (Poly<S>, Poly<S>) {
    let tol = S::tol(den.ctx());
    loop {
        if num.is_zero() || den.degree().unwrap_or(0) == 0 || num.degree().unwrap_or(0) == 0 {
            return (num, den);
        }
        let rs = roots(&den);
        let nn = num.norm();
        let hit = rs.into_iter().find(|r| {
            let s = (1.0 + r.abs()).powi(num.degree().unwrap() as i32);
            num.eval(r).abs() <= tol * nn * s
        });
        match hit {
            Some(r) => {
                num = num.deflate(&r).0;
                den = den.deflate(&r).0;
            }
            None => return (num, den),
        }
    }
}
