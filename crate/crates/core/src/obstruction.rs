//! Two boundary points of the space of degree 5 and 6 maps: one that generic
//! maps approach (a built family), one they cannot approach (a sweep that
//! searches for approximations and records how close it gets).

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::degeneration::{degenerate, DegenerationConfig, DegenerationReport, FamilySample};
use crate::dynamics::{from_principal_parts, FixedPointData, PrincipalPart};
use crate::error::{Error, Result};
use crate::function::{structures_equal, NodedFunction};
use crate::point::Point;
use crate::scalar::Scalar;
use crate::sphere::{Component, Marking, NodedSphere, PartialCrush, Puncture};
use crate::C64;

fn sign(j: usize) -> i64 {
    if j % 2 == 1 {
        -1
    } else {
        1
    }
}

/// `z -> μ z / (z - 2s)` with `s = (-1)^j`: fixes 0, sends `2s` to ∞ and `2s + ε` to 1.
fn s_chart<S: Scalar>(j: usize, eps: &S, z: &S) -> S {
    let ctx = z.ctx();
    let two_s = S::from_i64(ctx, 2 * sign(j));
    let mu = eps.clone() / (two_s.clone() + eps.clone());
    mu * z.clone() / (z.clone() - two_s)
}

/// Two 3-punctured ordinary components `D_1`, `D_2` with punctures `0, 1, ∞`,
/// glued at 0 through one crushed component carrying the free labels
/// `5..=4+free.len()` at the given positions. Labels 1, 2 sit at `1, ∞` on
/// `D_1` and 3, 4 on `D_2`.
fn two_sided_target<S: Scalar>(maps: [crate::map::RationalMap<S>; 2], free: &[S]) -> Result<NodedFunction<S>> {
    let ctx = maps[0].ctx();
    let fin = |x: i64| Point::Finite(S::from_i64(ctx, x));
    let side = |id: usize, base: usize| Component {
        id,
        punctures: vec![
            Puncture { id: base, position: fin(0) },
            Puncture { id: base + 1, position: fin(1) },
            Puncture { id: base + 2, position: Point::Infinity },
        ],
    };
    let mut middle = Component {
        id: 2,
        punctures: vec![Puncture { id: 6, position: fin(-2) }, Puncture { id: 7, position: fin(2) }],
    };
    for (i, p) in free.iter().enumerate() {
        middle.punctures.push(Puncture { id: 8 + i, position: Point::Finite(p.clone()) });
    }
    let [g1, g2] = maps;
    let nf = NodedFunction {
        crush: PartialCrush {
            sphere: NodedSphere { components: vec![side(0, 0), side(1, 3), middle], nodes: vec![(0, 6), (3, 7)] },
            ordinary: vec![0, 1],
        },
        marking: Marking { blocks: vec![vec![1], vec![2], vec![3], vec![4], (5..5 + free.len()).collect()] },
        maps: BTreeMap::from([(0, g1), (1, g2)]),
    };
    let v = nf.validate();
    if !v.is_empty() {
        return Err(Error::Validation(v));
    }
    Ok(nf)
}

/// Decoration `(c_1, c_2, c_3) = (-1, (-1)^j, 1)` at 0 and index 2 at 1 on `D_j`;
/// `∞` is a puncture but not fixed.
pub fn example2_map<S: Scalar>(ctx: S::Ctx, j: usize) -> Result<crate::map::RationalMap<S>> {
    let i = |x: i64| S::from_i64(ctx, x);
    from_principal_parts(&[
        PrincipalPart { point: i(1), coeffs: vec![i(2)] },
        PrincipalPart { point: i(0), coeffs: vec![i(-1), i(sign(j)), i(1)] },
    ])
}

pub fn example2_target<S: Scalar>(ctx: S::Ctx) -> Result<NodedFunction<S>> {
    let free = [S::zero(ctx), S::one(ctx), S::from_i64(ctx, -1)];
    two_sided_target([example2_map(ctx, 1)?, example2_map(ctx, 2)?], &free)
}

/// Target data: indices `(λ_1^j, λ_2^j)` at `∞` and 1 on `D_j`, second
/// coefficient `c_2^j` at 0; `c_1^j` follows from the index relation.
#[derive(Clone, Debug, PartialEq)]
pub struct Prop1Params<S> {
    pub lambda1: [S; 2],
    pub lambda2: [S; 2],
    pub c2: [S; 2],
}

impl<S: Scalar> Prop1Params<S> {
    /// `(λ_1, λ_2) = (0.3 + 0.1i, 0.4)` and `c_2 = 0.2` on both sides.
    pub fn standard(ctx: S::Ctx) -> Self {
        let l1 = S::from_ratio(ctx, 3, 10) + S::from_ratio(ctx, 1, 10) * S::from_f64(ctx, 0.0, 1.0);
        let l2 = S::from_ratio(ctx, 2, 5);
        let c2 = S::from_ratio(ctx, 1, 5);
        Prop1Params { lambda1: [l1.clone(), l1], lambda2: [l2.clone(), l2], c2: [c2.clone(), c2] }
    }

    pub fn c1(&self, j: usize) -> S {
        let ctx = self.c2[0].ctx();
        S::one(ctx) - self.lambda1[j - 1].clone() - self.lambda2[j - 1].clone()
    }

    pub fn target(&self) -> Result<NodedFunction<S>> {
        let ctx = self.c2[0].ctx();
        let map = |j: usize| {
            from_principal_parts(&[
                PrincipalPart { point: S::zero(ctx), coeffs: vec![self.c1(j), self.c2[j - 1].clone()] },
                PrincipalPart { point: S::one(ctx), coeffs: vec![self.lambda2[j - 1].clone()] },
            ])
        };
        two_sided_target([map(1)?, map(2)?], &[S::zero(ctx), S::one(ctx)])
    }
}

/// One member of the family with its internal quantities.
#[derive(Clone, Debug, PartialEq)]
pub struct Prop1Sample<S> {
    pub data: FixedPointData<S>,
    pub eps: [S; 2],
    pub b: [S; 2],
    /// `(c̃_1, c̃_2)`, the indices at 0 and 1.
    pub c_tilde: [S; 2],
}

impl<S: Scalar> Prop1Sample<S> {
    /// `S_j(1)`.
    pub fn chart_at_one(&self, j: usize) -> S {
        let ctx = self.eps[0].ctx();
        s_chart(j, &self.eps[j - 1], &S::one(ctx))
    }
}

/// Fixed points by label: `-2+ε_1, -2, 2+ε_2, 2, 0, 1`.
pub fn build_prop1_sample<S: Scalar>(p: &Prop1Params<S>, k: u64) -> Result<Prop1Sample<S>> {
    if k == 0 {
        return Err(Error::Input("k must be positive".into()));
    }
    let ctx = p.c2[0].ctx();
    let kk = S::from_i64(ctx, k as i64);
    let b: [S; 2] = std::array::from_fn(|i| {
        if p.c2[i].is_zero() {
            kk.clone().recip()
        } else {
            -p.c2[i].clone()
        }
    });
    let star = if b[0].abs() >= b[1].abs() { 1 } else { 2 };
    let two_s = |j: usize| S::from_i64(ctx, 2 * sign(j));
    let one = S::one(ctx);
    let mut eps: [S; 2] = [S::zero(ctx), S::zero(ctx)];
    eps[star - 1] = S::from_ratio(ctx, 1, 2) / (kk.clone() * kk.clone());
    let at_one = s_chart(star, &eps[star - 1], &one);
    let c1 = b[star - 1].clone() / at_one;
    let other = 3 - star;
    let mu = b[other - 1].clone() / c1.clone() * (one.clone() - two_s(other));
    if (one.clone() - mu.clone()).is_zero() {
        return Err(Error::Input(format!("no admissible ε at k = {k}")));
    }
    eps[other - 1] = two_s(other) * mu.clone() / (one.clone() - mu);
    let lam_sum = p.lambda1.iter().chain(&p.lambda2).cloned().fold(S::zero(ctx), |a, b| a + b);
    let c2 = one.clone() - lam_sum - c1.clone();
    let points = vec![
        two_s(1) + eps[0].clone(),
        two_s(1),
        two_s(2) + eps[1].clone(),
        two_s(2),
        S::zero(ctx),
        one,
    ];
    let indices = vec![
        p.lambda2[0].clone(),
        p.lambda1[0].clone(),
        p.lambda2[1].clone(),
        p.lambda1[1].clone(),
        c1.clone(),
        c2.clone(),
    ];
    let data = FixedPointData::new(points, indices).map_err(|e| Error::Input(format!("k = {k}: {e}")))?;
    Ok(Prop1Sample { data, eps, b, c_tilde: [c1, c2] })
}

pub fn build_prop1_family<S: Scalar>(p: &Prop1Params<S>, k: u64) -> Result<FixedPointData<S>> {
    Ok(build_prop1_sample(p, k)?.data)
}

/// Geometric schedule `k0, 2 k0, ...` with `len` entries.
pub fn geometric_schedule(k0: u64, len: usize) -> Vec<u64> {
    (0..len).map(|i| k0 << i).collect()
}

/// Largest distance between the decorations of one sample, seen through the
/// charts `S_j`, and the targets.
pub fn prop1_sample_residual<S: Scalar>(p: &Prop1Params<S>, sample: &Prop1Sample<S>) -> f64 {
    let ctx = p.c2[0].ctx();
    let pts = &sample.data.points;
    let idx = &sample.data.indices;
    let mut worst = 0.0f64;
    for j in 1..=2 {
        let (ia, ib) = if j == 1 { (1, 0) } else { (3, 2) };
        worst = worst.max((idx[ia].clone() - p.lambda1[j - 1].clone()).abs());
        worst = worst.max((idx[ib].clone() - p.lambda2[j - 1].clone()).abs());
        let cluster: Vec<usize> = (0..pts.len()).filter(|&i| i != ia && i != ib).collect();
        let ws: Vec<S> = cluster.iter().map(|&i| s_chart(j, &sample.eps[j - 1], &pts[i])).collect();
        let target = [p.c1(j), p.c2[j - 1].clone()];
        for l in 0..cluster.len() {
            let m = cluster
                .iter()
                .zip(&ws)
                .fold(S::zero(ctx), |a, (&i, w)| a + idx[i].clone() * w.powu(l as u32));
            let t = target.get(l).cloned().unwrap_or_else(|| S::zero(ctx));
            worst = worst.max((m - t).abs());
        }
    }
    worst
}

#[derive(Clone, Debug)]
pub struct Prop1Report<S: Scalar> {
    /// `(k, residual)`, the residual including 1 when the limit has the wrong shape.
    pub trace: Vec<(u64, f64)>,
    pub report: DegenerationReport<S>,
    pub target: NodedFunction<S>,
    pub stratum_matches: bool,
}

impl<S: Scalar> Prop1Report<S> {
    /// Strictly decreasing over the last `n` trace points.
    pub fn tail_decreasing(&self, n: usize) -> bool {
        let t = &self.trace[self.trace.len().saturating_sub(n)..];
        t.windows(2).all(|w| w[1].1 < w[0].1)
    }
}

/// Degenerates the built family and compares it with the target.
pub fn verify_prop1<S: Scalar>(p: &Prop1Params<S>, schedule: &[u64], cfg: &DegenerationConfig) -> Result<Prop1Report<S>> {
    let target = p.target()?;
    let built = schedule.iter().map(|&k| build_prop1_sample(p, k)).collect::<Result<Vec<_>>>()?;
    let samples: Vec<FamilySample<S>> =
        built.iter().zip(schedule).map(|(b, &k)| FamilySample { k, data: b.data.clone() }).collect();
    let report = degenerate(&samples, cfg, Some(&target))?;
    let crushed = report.components.iter().filter(|c| c.crushed).count();
    let stratum_matches = structures_equal(&report.limit, &target, cfg.tol.sqrt())
        && report.limit.crush.ordinary.len() == 2
        && crushed == 1
        && report.limit.crush.crush_data().is_ok_and(|cd| cd.bouquets.len() == 1 && cd.bouquets[0].level == 2);
    let penalty = if stratum_matches { 0.0 } else { 1.0 };
    let trace = built
        .iter()
        .zip(schedule)
        .map(|(b, &k)| (k, prop1_sample_residual(p, b) + penalty))
        .collect();
    Ok(Prop1Report { trace, report, target, stratum_matches })
}

/// What the sweep tries to reach on both sides: index at the point sent to
/// ∞, index at the point sent to 1, principal part at 0 (zero padded).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTarget {
    pub name: String,
    pub at_infinity: [C64; 2],
    pub at_one: [C64; 2],
    pub at_zero: [Vec<C64>; 2],
    /// Fixed points besides `±2, ±2 + ε, 0`.
    pub free_points: usize,
}

impl SweepTarget {
    pub fn example2() -> Self {
        let c = |x: f64| C64::new(x, 0.0);
        SweepTarget {
            name: "example2".into(),
            at_infinity: [c(0.0), c(0.0)],
            at_one: [c(2.0), c(2.0)],
            at_zero: [vec![c(-1.0), c(-1.0), c(1.0)], vec![c(-1.0), c(1.0), c(1.0)]],
            free_points: 2,
        }
    }

    /// The degree 5 analogue built from the same shape.
    pub fn control(p: &Prop1Params<C64>) -> Self {
        SweepTarget {
            name: "control".into(),
            at_infinity: p.lambda1,
            at_one: p.lambda2,
            at_zero: [vec![p.c1(1), p.c2[0]], vec![p.c1(2), p.c2[1]]],
            free_points: 1,
        }
    }

    pub fn degree(&self) -> usize {
        self.free_points + 4
    }
}

/// A point of the search space: `ε_j = α_j / k` and the free fixed points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub alpha: [C64; 2],
    pub free: Vec<C64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub starts: usize,
    pub schedule: Vec<u64>,
    pub seed: u64,
    pub margin: f64,
    /// Objective evaluations allowed per local search.
    pub evals_per_start: usize,
    /// Total evaluation budget; `None` is unlimited.
    pub budget: Option<u64>,
    pub time_limit: Option<Duration>,
    /// Optionally pin the sum of the indices at `0` and the free points.
    pub center_sum: Option<C64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            starts: 64,
            schedule: vec![16, 64, 256, 1024],
            seed: 1,
            margin: 0.1,
            evals_per_start: 6000,
            budget: None,
            time_limit: None,
            center_sum: None,
        }
    }
}

/// Fixed points `-2, -2+ε_1, 2, 2+ε_2, 0, free...` of a sweep point.
pub fn sweep_points(point: &SweepPoint, k: u64) -> Vec<C64> {
    let kk = k as f64;
    let mut pts = vec![
        C64::new(-2.0, 0.0),
        C64::new(-2.0, 0.0) + point.alpha[0] / kk,
        C64::new(2.0, 0.0),
        C64::new(2.0, 0.0) + point.alpha[1] / kk,
        C64::new(0.0, 0.0),
    ];
    pts.extend(point.free.iter().copied());
    pts
}

fn ls_residual(rows: Vec<Vec<C64>>, rhs: Vec<C64>, constraint: &[C64], total: C64) -> (f64, Vec<C64>) {
    // eliminate the last unknown with the linear constraint
    let n = constraint.len();
    let last = n - 1;
    let m = rows.len();
    let mut a = DMatrix::<C64>::zeros(m, last);
    let mut b = DVector::<C64>::zeros(m);
    let cl = constraint[last];
    for (r, row) in rows.iter().enumerate() {
        let f = row[last] / cl;
        for c in 0..last {
            a[(r, c)] = row[c] - f * constraint[c];
        }
        b[r] = rhs[r] - f * total;
    }
    let mut scale = vec![1.0; last];
    for c in 0..last {
        let nrm = a.column(c).norm();
        if nrm > 0.0 {
            scale[c] = nrm;
            for r in 0..m {
                a[(r, c)] /= nrm;
            }
        }
    }
    let svd = a.clone().svd(true, true);
    let Ok(y) = svd.solve(&b, 1e-13) else {
        return (f64::INFINITY, Vec::new());
    };
    let res = (&a * &y - &b).norm();
    let mut x: Vec<C64> = (0..last).map(|c| y[c] / scale[c]).collect();
    let s = (0..last).fold(C64::new(0.0, 0.0), |acc, c| acc + constraint[c] * x[c]);
    x.push((total - s) / cl);
    (res, x)
}

/// Least-squares distance from the targets over all index vectors summing
/// to 1, at fixed positions. Returns the residual and the optimal indices.
pub fn example2_residual_with_indices(target: &SweepTarget, point: &SweepPoint, k: u64) -> Result<(f64, Vec<C64>)> {
    if point.free.len() != target.free_points {
        return Err(Error::Input("wrong number of free points".into()));
    }
    let pts = sweep_points(point, k);
    let n = pts.len();
    for i in 0..n {
        for j in i + 1..n {
            if (pts[i] - pts[j]).norm() < 1e-12 {
                return Err(Error::Collision(i, j));
            }
        }
    }
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let unit = |i: usize| {
        let mut r = vec![C64::new(0.0, 0.0); n];
        r[i] = C64::new(1.0, 0.0);
        r
    };
    for j in 1..=2 {
        let (ia, ib) = if j == 1 { (0, 1) } else { (2, 3) };
        let eps = pts[ib] - pts[ia];
        rows.push(unit(ia));
        rhs.push(target.at_infinity[j - 1]);
        rows.push(unit(ib));
        rhs.push(target.at_one[j - 1]);
        let w: Vec<Option<C64>> =
            (0..n).map(|i| (i != ia && i != ib).then(|| s_chart(j, &eps, &pts[i]))).collect();
        for l in 0..n - 2 {
            rows.push(w.iter().map(|x| x.map_or(C64::new(0.0, 0.0), |w| w.powu(l as u32))).collect());
            rhs.push(target.at_zero[j - 1].get(l).copied().unwrap_or_default());
        }
    }
    Ok(ls_residual(rows, rhs, &vec![C64::new(1.0, 0.0); n], C64::new(1.0, 0.0)))
}

pub fn example2_residual(target: &SweepTarget, point: &SweepPoint, k: u64) -> Result<f64> {
    Ok(example2_residual_with_indices(target, point, k)?.0)
}

/// Checks the relation tying the two charts together at the free points
/// `δ, δ'`. In chart `j` the three simple terms at `0, S_j, S'_j` combine to
/// `N_j(z) / (z (z - S_j)(z - S'_j))`; the constant term `a_j` of `N_j` is
/// recovered by interpolation and compared through `λ_1 = a_j / (S_j S'_j)`
/// and through `a_1 (δ+2)(δ'+2) / μ_1^2 = a_2 (δ-2)(δ'-2) / μ_2^2`.
/// Returns the largest relative gap.
pub fn forced_relation_gap(point: &SweepPoint, lambdas: [C64; 3], k: u64) -> f64 {
    let pts = sweep_points(point, k);
    let (d1, d2) = (point.free[0], point.free[1]);
    let one = C64::new(1.0, 0.0);
    let mut firsts = Vec::new();
    let mut scaled = Vec::new();
    for j in 1..=2 {
        let (ia, ib) = if j == 1 { (0, 1) } else { (2, 3) };
        let eps = pts[ib] - pts[ia];
        let (s, s2) = (s_chart(j, &eps, &d1), s_chart(j, &eps, &d2));
        let numer = |z: C64| {
            let r = lambdas[0] / z + lambdas[1] / (z - s) + lambdas[2] / (z - s2);
            z * (z - s) * (z - s2) * r
        };
        // quadratic through z = 1, 2, 3; constant term by Lagrange at 0
        let (y1, y2, y3) = (numer(one), numer(2.0 * one), numer(3.0 * one));
        let a = 3.0 * y1 - 3.0 * y2 + y3;
        firsts.push(a / (s * s2));
        let two_s = C64::new(2.0 * sign(j) as f64, 0.0);
        let mu = eps / (two_s + eps);
        scaled.push(a * (d1 - two_s) * (d2 - two_s) / (mu * mu * d1 * d2));
    }
    let scale = 1.0 + lambdas[0].norm();
    let mut gap: f64 = 0.0;
    for v in firsts.iter().chain(&scaled) {
        gap = gap.max((v - lambdas[0]).norm() / scale);
    }
    gap
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepStep {
    pub k: u64,
    pub residual: f64,
    pub argmin: SweepPoint,
    pub indices: Vec<C64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub target: String,
    pub steps: Vec<SweepStep>,
    pub min_residual: f64,
    pub margin: f64,
    /// Minimum at least the margin. Numerical evidence only, never a proof.
    pub above_margin: bool,
    pub evaluations: u64,
    pub budget_exhausted: bool,
    pub note: String,
}

impl SweepReport {
    pub fn csv(&self) -> String {
        let mut s = String::from("k,residual\n");
        for st in &self.steps {
            s.push_str(&format!("{},{:e}\n", st.k, st.residual));
        }
        s
    }
}

const EVIDENCE_NOTE: &str = "numerical evidence, not a proof";

fn decode(v: &[f64], free: usize) -> SweepPoint {
    let c = |i: usize| C64::new(v[2 * i], v[2 * i + 1]);
    let clamp = |a: C64| if a.norm() > 1.0 { a / a.norm() } else { a };
    SweepPoint { alpha: [clamp(c(0)), clamp(c(1))], free: (0..free).map(|i| c(2 + i)).collect() }
}

fn objective(target: &SweepTarget, v: &[f64], k: u64) -> f64 {
    let p = decode(v, target.free_points);
    if p.alpha.iter().any(|a| a.norm() < 1e-9) {
        return 1e9;
    }
    example2_residual(target, &p, k).unwrap_or(1e9)
}

/// Compass search from `x`; returns the best value and point, and the evaluations used.
fn pattern_search(f: impl Fn(&[f64]) -> f64, mut x: Vec<f64>, max_evals: usize) -> (f64, Vec<f64>, usize) {
    let mut fx = f(&x);
    let mut evals = 1;
    let mut step = 0.25;
    while step > 1e-10 && evals < max_evals {
        let mut improved = false;
        for i in 0..x.len() {
            for dir in [1.0, -1.0] {
                let mut y = x.clone();
                y[i] += dir * step;
                let fy = f(&y);
                evals += 1;
                if fy < fx {
                    x = y;
                    fx = fy;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (fx, x, evals)
}

/// Multi-start search for the best approximation of the target at every `k`
/// of the schedule. Deterministic for a given seed.
pub fn example2_sweep(target: &SweepTarget, cfg: &SweepConfig) -> SweepReport {
    let started = Instant::now();
    let dim = 4 + 2 * target.free_points;
    let mut steps = Vec::new();
    let mut evaluations = 0u64;
    let mut exhausted = false;
    for (ki, &k) in cfg.schedule.iter().enumerate() {
        let remaining = cfg.budget.map(|b| b.saturating_sub(evaluations));
        let timed_out = cfg.time_limit.is_some_and(|t| started.elapsed() >= t);
        if remaining == Some(0) || timed_out {
            exhausted = true;
            break;
        }
        let per_start = match remaining {
            Some(r) => (r as usize / cfg.starts.max(1)).min(cfg.evals_per_start),
            None => cfg.evals_per_start,
        };
        if per_start == 0 {
            exhausted = true;
            break;
        }
        let runs: Vec<(f64, Vec<f64>, usize)> = (0..cfg.starts)
            .into_par_iter()
            .map(|s| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ ((ki as u64) << 32) ^ s as u64);
                let x0: Vec<f64> = (0..dim)
                    .map(|i| if i < 4 { rng.random_range(-0.7..0.7) } else { rng.random_range(-3.0..3.0) })
                    .collect();
                pattern_search(|v| objective(target, v, k), x0, per_start)
            })
            .collect();
        evaluations += runs.iter().map(|r| r.2 as u64).sum::<u64>();
        let best = runs
            .into_iter()
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .expect("at least one start");
        let argmin = decode(&best.1, target.free_points);
        let indices = example2_residual_with_indices(target, &argmin, k).map(|r| r.1).unwrap_or_default();
        steps.push(SweepStep { k, residual: best.0, argmin, indices });
    }
    let min_residual = steps.iter().map(|s| s.residual).fold(f64::INFINITY, f64::min);
    SweepReport {
        target: target.name.clone(),
        above_margin: !steps.is_empty() && min_residual >= cfg.margin,
        min_residual,
        margin: cfg.margin,
        steps,
        evaluations,
        budget_exhausted: exhausted,
        note: EVIDENCE_NOTE.into(),
    }
}

/// Truncated power series of `S_j` at 0 up to `z^2`.
fn s_series(j: usize, eps: C64) -> [C64; 3] {
    let two_s = C64::new(2.0 * sign(j) as f64, 0.0);
    let mu = eps / (two_s + eps);
    [C64::new(0.0, 0.0), -mu / two_s, -mu / (two_s * two_s)]
}

fn series_mul(a: &[C64; 3], b: &[C64; 3]) -> [C64; 3] {
    [a[0] * b[0], a[0] * b[1] + a[1] * b[0], a[0] * b[2] + a[1] * b[1] + a[2] * b[0]]
}

/// Least-squares distance from the degree 6 targets for the family whose
/// cluster at 0 is a single pole of order three, at given `ε_1, ε_2`.
/// Unknowns are `(η_1, κ_1, η_2, κ_2, λ_1, λ_2, λ_3)` with
/// `η_1 + κ_1 + η_2 + κ_2 + λ_1 = 1`.
pub fn remark_residual(eps: [C64; 2]) -> f64 {
    let target = SweepTarget::example2();
    let pts = [C64::new(-2.0, 0.0), C64::new(-2.0, 0.0) + eps[0], C64::new(2.0, 0.0), C64::new(2.0, 0.0) + eps[1]];
    let zero = C64::new(0.0, 0.0);
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for j in 1..=2 {
        let (ia, ib) = if j == 1 { (0, 1) } else { (2, 3) };
        let mut r = vec![zero; 7];
        r[ia] = C64::new(1.0, 0.0);
        rows.push(r);
        rhs.push(target.at_infinity[j - 1]);
        let mut r = vec![zero; 7];
        r[ib] = C64::new(1.0, 0.0);
        rows.push(r);
        rhs.push(target.at_one[j - 1]);
        let ser = s_series(j, eps[j - 1]);
        let mut pw = [C64::new(1.0, 0.0), zero, zero];
        for l in 0..5 {
            let mut r = vec![zero; 7];
            for i in [0, 1, 2, 3] {
                if i != ia && i != ib {
                    r[i] = s_chart(j, &eps[j - 1], &pts[i]).powu(l as u32);
                }
            }
            // residues of S^l (λ_1/z + λ_2/z^2 + λ_3/z^3) at 0
            r[4] = pw[0];
            r[5] = pw[1];
            r[6] = pw[2];
            rows.push(r);
            rhs.push(target.at_zero[j - 1].get(l).copied().unwrap_or_default());
            pw = series_mul(&pw, &ser);
        }
    }
    let one = C64::new(1.0, 0.0);
    // put λ_1 last so the constraint eliminates it
    let perm = [0, 1, 2, 3, 5, 6, 4];
    let rows = rows.into_iter().map(|r| perm.iter().map(|&i| r[i]).collect()).collect();
    let constraint = [one, one, one, one, zero, zero, one];
    ls_residual(rows, rhs, &constraint, one).0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemarkReport {
    pub min_residual: f64,
    pub argmin: ([C64; 2], u64),
    pub evaluated: usize,
    pub margin: f64,
    pub above_margin: bool,
    pub note: String,
}

/// Grid of `ε_j = r e^(iθ) / k` over radii, phases and the schedule.
pub fn remark_check(schedule: &[u64], radii: &[f64], phases: usize, margin: f64) -> RemarkReport {
    let alphas: Vec<C64> = radii
        .iter()
        .flat_map(|&r| (0..phases).map(move |p| C64::from_polar(r, std::f64::consts::TAU * p as f64 / phases as f64)))
        .collect();
    let mut best = (f64::INFINITY, ([C64::new(0.0, 0.0); 2], 0));
    let mut evaluated = 0;
    for &k in schedule {
        for a in &alphas {
            for b in &alphas {
                let eps = [a / k as f64, b / k as f64];
                let r = remark_residual(eps);
                evaluated += 1;
                if r < best.0 {
                    best = (r, (eps, k));
                }
            }
        }
    }
    RemarkReport {
        min_residual: best.0,
        argmin: best.1,
        evaluated,
        margin,
        above_margin: best.0 >= margin,
        note: EVIDENCE_NOTE.into(),
    }
}

pub fn default_remark_check() -> RemarkReport {
    remark_check(&[16, 64, 256, 1024], &[0.25, 0.5, 1.0], 8, 0.1)
}
