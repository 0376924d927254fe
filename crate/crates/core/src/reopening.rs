//! Splitting singular punctures back into clusters of simple fixed points.
//!
//! A level-`L` singular puncture `q` with principal part `(c_1..c_L)` is
//! replaced by the points `q + ε_ν` carrying indices `λ_ν` for which
//! `sum_ν λ_ν / (t - ε_ν)` has numerator `sum_l c_l t^(L-l)`. The system for
//! the `λ_ν` has the matrix of elementary symmetric functions of the `ε`'s.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::degeneration::FamilySample;
use crate::dynamics::{local_expansion, non_fixed_point, FixedPointData};
use crate::error::{Error, Result};
use crate::function::NodedFunction;
use crate::mobius::Mobius;
use crate::point::Point;
use crate::scalar::Scalar;
use crate::sphere::XElement;

/// `entries[j][ν] = e_j(ε with ε_ν removed)`, rows `j = 0..L`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix<S> {
    pub eps: Vec<S>,
    pub entries: Vec<Vec<S>>,
}

/// Elementary symmetric polynomials `e_0..e_n` of `xs`.
pub fn elementary_symmetric<S: Scalar>(ctx: S::Ctx, xs: &[S]) -> Vec<S> {
    let mut e = vec![S::zero(ctx); xs.len() + 1];
    e[0] = S::one(ctx);
    for (i, x) in xs.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            e[j] = e[j].clone() + e[j - 1].clone() * x.clone();
        }
    }
    e
}

fn require_distinct<S: Scalar>(eps: &[S]) -> Result<()> {
    for i in 0..eps.len() {
        for j in i + 1..eps.len() {
            if (eps[i].clone() - eps[j].clone()).is_zero() {
                return Err(Error::SingularInput);
            }
        }
    }
    Ok(())
}

pub fn sym_matrix<S: Scalar>(eps: &[S]) -> Result<SymMatrix<S>> {
    if eps.is_empty() {
        return Err(Error::Input("empty ε vector".into()));
    }
    require_distinct(eps)?;
    let ctx = eps[0].ctx();
    let l = eps.len();
    let mut entries = vec![Vec::with_capacity(l); l];
    for nu in 0..l {
        let rest: Vec<S> = eps.iter().enumerate().filter(|(i, _)| *i != nu).map(|(_, x)| x.clone()).collect();
        let e = elementary_symmetric(ctx, &rest);
        for (j, row) in entries.iter_mut().enumerate() {
            row.push(e[j].clone());
        }
    }
    Ok(SymMatrix { eps: eps.to_vec(), entries })
}

impl<S: Scalar> SymMatrix<S> {
    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }

    /// Determinant by Gaussian elimination.
    pub fn det(&self) -> S {
        let ctx = self.eps[0].ctx();
        let n = self.len();
        let mut a = self.entries.clone();
        let mut det = S::one(ctx);
        for col in 0..n {
            let pivot = (col..n)
                .filter(|&r| !a[r][col].is_zero())
                .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()));
            let Some(p) = pivot else {
                return S::zero(ctx);
            };
            if p != col {
                a.swap(p, col);
                det = -det;
            }
            det = det * a[col][col].clone();
            for r in col + 1..n {
                let f = a[r][col].clone() / a[col][col].clone();
                for c in col..n {
                    a[r][c] = a[r][c].clone() - f.clone() * a[col][c].clone();
                }
            }
        }
        det
    }

    /// `prod_{μ<ν} (ε_μ - ε_ν)`.
    pub fn det_product(&self) -> S {
        let ctx = self.eps[0].ctx();
        let mut p = S::one(ctx);
        for m in 0..self.len() {
            for n in m + 1..self.len() {
                p = p * (self.eps[m].clone() - self.eps[n].clone());
            }
        }
        p
    }

    pub fn mul_vec(&self, x: &[S]) -> Vec<S> {
        let ctx = self.eps[0].ctx();
        self.entries
            .iter()
            .map(|row| row.iter().zip(x).fold(S::zero(ctx), |a, (m, v)| a + m.clone() * v.clone()))
            .collect()
    }
}

/// Closed-form inverse: `inv[k][j] = (-1)^j ε_k^(L-1-j) / prod_{ν≠k}(ε_k - ε_ν)` (0-based).
pub fn sym_inverse<S: Scalar>(m: &SymMatrix<S>) -> Result<Vec<Vec<S>>> {
    require_distinct(&m.eps)?;
    let ctx = m.eps[0].ctx();
    let l = m.len();
    let mut inv = Vec::with_capacity(l);
    for k in 0..l {
        let mut delta = S::one(ctx);
        for nu in 0..l {
            if nu != k {
                delta = delta * (m.eps[k].clone() - m.eps[nu].clone());
            }
        }
        let row = (0..l)
            .map(|j| {
                let v = m.eps[k].powu((l - 1 - j) as u32) / delta.clone();
                if j % 2 == 1 {
                    -v
                } else {
                    v
                }
            })
            .collect();
        inv.push(row);
    }
    Ok(inv)
}

/// Right-hand side `((-1)^(j) c_(j+1))` for principal part coefficients `c`.
pub fn sign_targets<S: Scalar>(c: &[S]) -> Vec<S> {
    c.iter().enumerate().map(|(j, x)| if j % 2 == 1 { -x.clone() } else { x.clone() }).collect()
}

/// Indices `λ` with `M λ = a`.
pub fn solve_lambdas<S: Scalar>(eps: &[S], a: &[S]) -> Result<Vec<S>> {
    if a.len() != eps.len() {
        return Err(Error::Input("target length differs from ε length".into()));
    }
    let m = sym_matrix(eps)?;
    let inv = sym_inverse(&m)?;
    let ctx = eps[0].ctx();
    let lambdas: Vec<S> = inv
        .iter()
        .map(|row| row.iter().zip(a).fold(S::zero(ctx), |s, (x, y)| s + x.clone() * y.clone()))
        .collect();
    let big = lambdas.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let tol = S::tol(ctx) * big;
    if let Some(i) = lambdas.iter().position(|x| x.is_zero() || x.near_zero(tol)) {
        return Err(Error::ZeroLambda(i));
    }
    Ok(lambdas)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReopenConfig {
    /// First step: `ε_ν = ν 2^(-t)`, `k = 2^t`.
    pub t0: u32,
    pub steps: usize,
    pub seed: u64,
}

impl Default for ReopenConfig {
    fn default() -> Self {
        ReopenConfig { t0: 16, steps: 8, seed: 0 }
    }
}

/// One puncture of the component in the working chart.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanEntry<S> {
    pub puncture: usize,
    pub position: S,
    /// Labels carried by the puncture, sorted; one per emitted fixed point.
    pub labels: Vec<usize>,
    /// Principal part `(c_1..c_L)` padded to the level.
    pub targets: Vec<S>,
}

impl<S> PlanEntry<S> {
    pub fn level(&self) -> usize {
        self.labels.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReopeningPlan<S> {
    /// Sends the component's coordinate to the working chart.
    pub chart: Mobius<S>,
    pub entries: Vec<PlanEntry<S>>,
    /// Simple puncture whose index absorbs the perturbations of the others.
    pub absorber: Option<usize>,
    /// Per entry, the rate of the index given to a simple puncture that is not fixed.
    pub drift: Vec<Option<S>>,
    pub n: usize,
    pub seed: u64,
}

/// Plan for a noded function with exactly one ordinary component.
pub fn plan<S: Scalar>(nf: &NodedFunction<S>, seed: u64) -> Result<ReopeningPlan<S>> {
    let v = nf.validate();
    if !v.is_empty() {
        return Err(Error::Validation(v));
    }
    if nf.crush.ordinary.len() != 1 {
        return Err(Error::Unsupported("a plan covers a single ordinary component".into()));
    }
    let comp_id = nf.crush.ordinary[0];
    let f = &nf.maps[&comp_id];
    let ctx = f.ctx();
    let cd = nf.crush.crush_data()?;
    let comp = nf.crush.sphere.component(comp_id).unwrap();
    let chart = if comp.punctures.iter().any(|p| p.position.is_infinite()) {
        let mut s = non_fixed_point(f);
        let mut bump = 0;
        while comp.punctures.iter().any(|p| p.position.approx_eq(&Point::Finite(s.clone()), 1e-6)) {
            bump += 1;
            s = s + S::from_f64(ctx, 0.37 * bump as f64, 0.61);
        }
        Mobius::inversion_at(&s)
    } else {
        Mobius::identity(ctx)
    };
    let g = f.conjugate(&chart);
    let mut entries = Vec::new();
    for p in &comp.punctures {
        let e = cd
            .element_of(p.id)
            .ok_or_else(|| Error::Input(format!("puncture {} is not marked", p.id)))?;
        let mut labels = nf.marking.blocks[e].clone();
        labels.sort();
        let level = match cd.elements[e] {
            XElement::Puncture(_) => 1,
            XElement::Bouquet(b) => cd.bouquets[b].level,
        };
        debug_assert_eq!(level, labels.len());
        let position = chart.apply(&p.position).finite().cloned().ok_or(Error::SingularMobius)?;
        let mut targets = match local_expansion(&g, &position) {
            Ok((_, c)) => c,
            Err(Error::NotFixed) => Vec::new(),
            Err(e) => return Err(e),
        };
        targets.resize(level, S::zero(ctx));
        entries.push(PlanEntry { puncture: p.id, position, labels, targets });
    }
    entries.sort_by_key(|e| e.labels[0]);
    let absorber = entries
        .iter()
        .enumerate()
        .filter(|(_, e)| e.level() == 1)
        .max_by(|a, b| a.1.targets[0].abs().total_cmp(&b.1.targets[0].abs()))
        .map(|x| x.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let drift = entries
        .iter()
        .map(|e| {
            (e.level() == 1 && e.targets[0].is_zero()).then(|| {
                let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                S::from_f64(ctx, a.cos(), a.sin())
            })
        })
        .collect();
    Ok(ReopeningPlan { chart, entries, absorber, drift, n: nf.n(), seed })
}

/// Fixed-point data of the approximating generic map at step `t`, in label order.
pub fn build_reopened_map<S: Scalar>(plan: &ReopeningPlan<S>, t: u32) -> Result<FixedPointData<S>> {
    let ctx = plan.chart.ctx();
    let h = S::from_ratio(ctx, 1, 1i64 << t);
    let mut points: Vec<Option<S>> = vec![None; plan.n];
    let mut indices: Vec<Option<S>> = vec![None; plan.n];
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed ^ (t as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let nudge = if S::EXACT { 1e-20 } else { S::tol(ctx) };
    for (i, e) in plan.entries.iter().enumerate() {
        if e.level() == 1 {
            let lam = match &plan.drift[i] {
                Some(w) => w.clone() * h.clone(),
                None => e.targets[0].clone(),
            };
            points[e.labels[0] - 1] = Some(e.position.clone());
            indices[e.labels[0] - 1] = Some(lam);
            continue;
        }
        let eps: Vec<S> = (1..=e.level()).map(|nu| S::from_i64(ctx, nu as i64) * h.clone()).collect();
        let mut a = sign_targets(&e.targets);
        let mut tries = 0;
        let lambdas = loop {
            match solve_lambdas(&eps, &a) {
                Ok(l) => break l,
                Err(Error::ZeroLambda(_)) if tries < 8 => {
                    tries += 1;
                    for x in a.iter_mut() {
                        let ang: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                        *x = x.clone() + S::from_f64(ctx, nudge * ang.cos(), nudge * ang.sin());
                    }
                }
                Err(err) => return Err(err),
            }
        };
        for (nu, (lam, eps)) in lambdas.into_iter().zip(eps).enumerate() {
            points[e.labels[nu] - 1] = Some(e.position.clone() + eps);
            indices[e.labels[nu] - 1] = Some(lam);
        }
    }
    let mut points: Vec<S> = points.into_iter().map(|x| x.expect("every label emitted")).collect();
    let mut indices: Vec<S> = indices.into_iter().map(|x| x.expect("every label emitted")).collect();
    let sum = indices.iter().cloned().fold(S::zero(ctx), |a, b| a + b);
    let gap = S::one(ctx) - sum;
    let slot = match plan.absorber {
        Some(i) => plan.entries[i].labels[0] - 1,
        None => (0..indices.len()).max_by(|&a, &b| indices[a].abs().total_cmp(&indices[b].abs())).unwrap(),
    };
    indices[slot] = indices[slot].clone() + gap;
    points.shrink_to_fit();
    FixedPointData::new(points, indices)
}

/// Samples of one ordinary component, in that component's working chart.
#[derive(Clone, Debug)]
pub struct ReopenedFamily<S: Scalar> {
    pub component: usize,
    /// What the family should degenerate to.
    pub target: NodedFunction<S>,
    pub plan: ReopeningPlan<S>,
    pub samples: Vec<FamilySample<S>>,
}

/// Approximating family of a target whose realization is a single ordinary
/// component. Anything else needs surgery at non-singular nodes or a joint
/// construction across components, and is rejected.
pub fn reopen_family<S: Scalar>(nf: &NodedFunction<S>, cfg: &ReopenConfig) -> Result<Vec<ReopenedFamily<S>>> {
    let v = nf.validate();
    if !v.is_empty() {
        return Err(Error::Validation(v));
    }
    let real = nf.crush.reduced_realization()?;
    let pieces = real.realization_components().len();
    if pieces > 1 {
        return Err(Error::Unsupported(format!(
            "realization is disconnected ({pieces} pieces); only per-component families are available"
        )));
    }
    if !real.edges.is_empty() {
        return Err(Error::Unsupported("reopening non-singular nodes is not supported".into()));
    }
    reopen_components(nf, cfg)
}

/// One family per ordinary component, each approximating that component's
/// restriction on its own. For several components this says nothing about a
/// joint approximation by maps of the full degree.
pub fn reopen_components<S: Scalar>(nf: &NodedFunction<S>, cfg: &ReopenConfig) -> Result<Vec<ReopenedFamily<S>>> {
    let v = nf.validate();
    if !v.is_empty() {
        return Err(Error::Validation(v));
    }
    if cfg.steps < 3 {
        return Err(Error::Input("need at least 3 steps".into()));
    }
    if cfg.t0 as usize + cfg.steps > 62 {
        return Err(Error::Input("schedule exceeds 2^62".into()));
    }
    let targets: Vec<(usize, NodedFunction<S>)> = if nf.crush.ordinary.len() == 1 {
        vec![(nf.crush.ordinary[0], nf.clone())]
    } else {
        nf.crush
            .ordinary
            .iter()
            .map(|&c| Ok((c, nf.component_restriction(c)?)))
            .collect::<Result<_>>()?
    };
    targets
        .into_iter()
        .enumerate()
        .map(|(i, (component, target))| {
            let plan = plan(&target, cfg.seed.wrapping_add(i as u64))?;
            let samples = (0..cfg.steps as u32)
                .map(|s| {
                    let t = cfg.t0 + s;
                    Ok(FamilySample { k: 1u64 << t, data: build_reopened_map(&plan, t)? })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ReopenedFamily { component, target, plan, samples })
        })
        .collect()
}
