//! Limits of one-parameter families of generic maps given by their
//! fixed-point data. Colliding fixed points are resolved into bubbles by
//! rescaling, bubbles whose decoration diverges are crushed, and the surviving
//! components are rebuilt from their limiting principal parts.

use std::collections::BTreeMap;

use petgraph::unionfind::UnionFind;

use crate::dynamics::{from_principal_parts, FixedPointData, PrincipalPart};
use crate::error::{Error, Result};
use crate::function::{structures_equal, NodedFunction};
use crate::map::RationalMap;
use crate::point::Point;
use crate::scalar::Scalar;
use crate::sphere::{Component, Marking, NodedSphere, PartialCrush, Puncture, XElement};

/// Fixed-point data of the family member with parameter `k` (`k -> ∞`).
#[derive(Clone, Debug, PartialEq)]
pub struct FamilySample<S> {
    pub k: u64,
    pub data: FixedPointData<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DegenerationConfig {
    /// Limits closer than this are one cluster; limiting coefficients below it vanish.
    pub tol: f64,
    /// Number of trailing samples used by the polynomial extrapolation.
    pub richardson_points: usize,
    /// A sequence beyond this size that keeps growing is declared divergent.
    pub divergence_threshold: f64,
    /// Allowed disagreement between extrapolations from shifted windows.
    pub cauchy_tol: f64,
}

impl Default for DegenerationConfig {
    fn default() -> Self {
        DegenerationConfig { tol: 1e-6, richardson_points: 3, divergence_threshold: 1e6, cauchy_tol: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Limit<S> {
    Finite(S),
    Infinite,
}

impl<S: Scalar> Limit<S> {
    pub fn finite(&self) -> Option<&S> {
        match self {
            Limit::Finite(x) => Some(x),
            Limit::Infinite => None,
        }
    }
}

/// Labels (1-based family positions) sharing a limit point.
#[derive(Clone, Debug, PartialEq)]
pub struct Cluster<S> {
    pub labels: Vec<usize>,
    pub point: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitPuncture<S> {
    pub id: usize,
    pub position: S,
    pub labels: Vec<usize>,
    pub decoration: Vec<Limit<S>>,
    /// The puncture facing the parent component.
    pub outer: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitComponent<S> {
    pub id: usize,
    /// Parent component id and the parent's puncture this bubble grew from.
    pub parent: Option<(usize, usize)>,
    pub punctures: Vec<LimitPuncture<S>>,
    pub crushed: bool,
}

#[derive(Clone, Debug)]
pub struct DegenerationReport<S: Scalar> {
    pub components: Vec<LimitComponent<S>>,
    pub limit: NodedFunction<S>,
    /// Largest distance of a finite decoration entry from its limit, per sample.
    pub residual_trace: Vec<(u64, f64)>,
    /// Whether the limit matches the expected object, when one was supplied.
    pub matches_hint: Option<bool>,
}

/// Polynomial extrapolation to `h = 0` through the points `(hs[i], ys[i])` (Neville).
pub fn richardson<S: Scalar>(hs: &[S], ys: &[S]) -> S {
    let n = ys.len();
    let mut p = ys.to_vec();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (hs[i].clone() * p[i + 1].clone() - hs[i + m].clone() * p[i].clone())
                / (hs[i].clone() - hs[i + m].clone());
        }
    }
    p[0].clone()
}

enum Raw<S> {
    Finite(S),
    Infinite,
    Unstable,
}

struct Work<'a, S: Scalar> {
    samples: &'a [FamilySample<S>],
    hs: Vec<S>,
    cfg: &'a DegenerationConfig,
}

impl<'a, S: Scalar> Work<'a, S> {
    fn new(samples: &'a [FamilySample<S>], cfg: &'a DegenerationConfig) -> Result<Self> {
        if samples.len() < 3 || samples.len() < cfg.richardson_points {
            return Err(Error::Input(format!("need at least 3 samples, got {}", samples.len())));
        }
        let n = samples[0].data.len();
        if n < 3 {
            return Err(Error::TooFewPoints(n));
        }
        for w in samples.windows(2) {
            if w[1].k <= w[0].k {
                return Err(Error::Input("sample parameters must increase".into()));
            }
        }
        if samples.iter().any(|s| s.data.len() != n) {
            return Err(Error::Input("samples differ in size".into()));
        }
        let ctx = samples[0].data.points[0].ctx();
        let hs = samples.iter().map(|s| S::from_ratio(ctx, 1, s.k as i64)).collect();
        Ok(Work { samples, hs, cfg })
    }

    fn ctx(&self) -> S::Ctx {
        self.hs[0].ctx()
    }

    fn last(&self) -> usize {
        self.samples.len() - 1
    }

    fn extrapolate(&self, seq: &[S]) -> Raw<S> {
        let n = seq.len();
        let r = self.cfg.richardson_points.min(n);
        let top = seq[n - 1].abs();
        if top > self.cfg.divergence_threshold
            && n >= 3
            && seq[n - 3].abs() < seq[n - 2].abs()
            && seq[n - 2].abs() < top
        {
            return Raw::Infinite;
        }
        let value = richardson(&self.hs[n - r..], &seq[n - r..]);
        if n > r {
            let prev = richardson(&self.hs[n - r - 1..n - 1], &seq[n - r - 1..n - 1]);
            let gap = (value.clone() - prev).abs();
            if !(gap <= self.cfg.cauchy_tol * (1.0 + value.abs())) {
                return Raw::Unstable;
            }
        }
        if value.abs().is_finite() {
            Raw::Finite(value)
        } else {
            Raw::Unstable
        }
    }

    fn limit_of(&self, chart: &[Vec<S>], j: usize) -> Result<S> {
        let seq: Vec<S> = chart.iter().map(|row| row[j].clone()).collect();
        match self.extrapolate(&seq) {
            Raw::Finite(x) => Ok(x),
            _ => Err(Error::NoLimit(format!("fixed point {} has no limit in its chart", j + 1))),
        }
    }

    fn cluster(&self, limits: &[(usize, S)]) -> Vec<Cluster<S>> {
        let mut uf = UnionFind::<usize>::new(limits.len());
        for a in 0..limits.len() {
            for b in a + 1..limits.len() {
                let (x, y) = (&limits[a].1, &limits[b].1);
                let scale = 1.0 + x.abs().max(y.abs());
                if (x.clone() - y.clone()).abs() <= self.cfg.tol * scale {
                    uf.union(a, b);
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for a in 0..limits.len() {
            groups.entry(uf.find(a)).or_default().push(a);
        }
        let mut out: Vec<Cluster<S>> = groups
            .into_values()
            .map(|g| {
                let mut labels: Vec<usize> = g.iter().map(|&a| limits[a].0).collect();
                labels.sort();
                let first = g.iter().min_by_key(|&&a| limits[a].0).unwrap();
                Cluster { labels, point: limits[*first].1.clone() }
            })
            .collect();
        out.sort_by_key(|c| c.labels[0]);
        out
    }

    /// Moment sequences `sum λ_j (w_j - center)^(l-1)` over the samples.
    fn moments(&self, chart: &[Vec<S>], labels: &[usize], center: &S) -> Vec<Vec<S>> {
        let ctx = self.ctx();
        let len = labels.len();
        let mut out = vec![Vec::with_capacity(chart.len()); len];
        for (i, row) in chart.iter().enumerate() {
            let mut acc = vec![S::zero(ctx); len];
            for &l in labels {
                let j = l - 1;
                let lam = self.samples[i].data.indices[j].clone();
                let d = row[j].clone() - center.clone();
                let mut pw = S::one(ctx);
                for a in acc.iter_mut() {
                    *a = a.clone() + lam.clone() * pw.clone();
                    pw = pw * d.clone();
                }
            }
            for (l, a) in acc.into_iter().enumerate() {
                out[l].push(a);
            }
        }
        out
    }

    /// Chart in which cluster `members` is resolved: affine normalization by two
    /// members followed by an inversion putting everything else near 0.
    fn child_chart(&self, members: &[usize]) -> Vec<Vec<S>> {
        let ctx = self.ctx();
        let last = self.last();
        let z = |i: usize, l: usize| self.samples[i].data.points[l - 1].clone();
        let j0 = members[0];
        let j1 = *members
            .iter()
            .max_by(|&&a, &&b| {
                let da = (z(last, a) - z(last, j0)).abs();
                let db = (z(last, b) - z(last, j0)).abs();
                da.total_cmp(&db)
            })
            .unwrap();
        let rescale = |i: usize, w: S| (w - z(i, j0)) / (z(i, j1) - z(i, j0));
        let rl: Vec<num_complex::Complex<f64>> =
            members.iter().map(|&l| rescale(last, z(last, l)).to_c64()).collect();
        let candidates = [(-1.0, 0.0), (2.0, 0.0), (-2.0, 0.0), (0.5, 1.5), (0.5, -1.5), (-1.0, 1.0), (3.0, 2.0)];
        let s = candidates
            .iter()
            .map(|&(a, b)| {
                let c = num_complex::Complex::new(a, b);
                let d = rl.iter().map(|r| (r - c).norm()).fold(f64::INFINITY, f64::min);
                (c, d)
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap()
            .0;
        let s = S::from_c64(ctx, s);
        let n = self.samples[0].data.len();
        (0..self.samples.len())
            .map(|i| {
                (1..=n)
                    .map(|l| (rescale(i, z(i, l)) - s.clone()).recip())
                    .collect()
            })
            .collect()
    }
}

/// Clusters of the limiting fixed points in the coordinates of the samples.
pub fn cluster_fixed_points<S: Scalar>(samples: &[FamilySample<S>], cfg: &DegenerationConfig) -> Result<Vec<Cluster<S>>> {
    let w = Work::new(samples, cfg)?;
    let chart: Vec<Vec<S>> = samples.iter().map(|s| s.data.points.clone()).collect();
    let n = samples[0].data.len();
    let limits = (1..=n).map(|l| Ok((l, w.limit_of(&chart, l - 1)?))).collect::<Result<Vec<_>>>()?;
    Ok(w.cluster(&limits))
}

/// Limiting moments `(c_1..c_L)` of a cluster around its limit point, in the
/// coordinates of the samples. Divergent entries are reported as infinite.
pub fn limit_decoration<S: Scalar>(
    samples: &[FamilySample<S>],
    cluster: &Cluster<S>,
    cfg: &DegenerationConfig,
) -> Result<Vec<Limit<S>>> {
    let w = Work::new(samples, cfg)?;
    let chart: Vec<Vec<S>> = samples.iter().map(|s| s.data.points.clone()).collect();
    w.moments(&chart, &cluster.labels, &cluster.point)
        .iter()
        .enumerate()
        .map(|(l, seq)| match w.extrapolate(seq) {
            Raw::Finite(x) => Ok(Limit::Finite(x)),
            Raw::Infinite => Ok(Limit::Infinite),
            Raw::Unstable => Err(Error::NoLimit(format!("moment {} of cluster {:?} does not settle", l + 1, cluster.labels))),
        })
        .collect()
}

struct Pending<S> {
    members: Vec<usize>,
    chart: Vec<Vec<S>>,
    parent: Option<(usize, usize)>,
}

/// Resolves the family into its limiting noded function.
pub fn degenerate<S: Scalar>(
    samples: &[FamilySample<S>],
    cfg: &DegenerationConfig,
    hint: Option<&NodedFunction<S>>,
) -> Result<DegenerationReport<S>> {
    let w = Work::new(samples, cfg)?;
    let ctx = w.ctx();
    let n = samples[0].data.len();
    let mut components: Vec<LimitComponent<S>> = Vec::new();
    let mut trace = vec![0.0f64; samples.len()];
    let mut next_puncture = 0;
    let mut queue = std::collections::VecDeque::from([Pending {
        members: (1..=n).collect(),
        chart: samples.iter().map(|s| s.data.points.clone()).collect::<Vec<_>>(),
        parent: None,
    }]);
    while let Some(job) = queue.pop_front() {
        let id = components.len();
        let limits = job
            .members
            .iter()
            .map(|&l| Ok((l, w.limit_of(&job.chart, l - 1)?)))
            .collect::<Result<Vec<_>>>()?;
        let clusters = w.cluster(&limits);
        if job.parent.is_none() && clusters.len() < 3 {
            return Err(Error::NoLimit(format!(
                "only {} distinct limit points; the family needs a chart separating at least three",
                clusters.len()
            )));
        }
        let mut spots: Vec<(Vec<usize>, S, bool)> = Vec::new();
        if job.parent.is_some() {
            let outside: Vec<usize> = (1..=n).filter(|l| !job.members.contains(l)).collect();
            spots.push((outside, S::zero(ctx), true));
        }
        spots.extend(clusters.iter().map(|c| (c.labels.clone(), c.point.clone(), false)));
        let mut raw_decorations = Vec::new();
        for (labels, center, _) in &spots {
            let seqs = w.moments(&job.chart, labels, center);
            let raws: Vec<(Raw<S>, Vec<S>)> = seqs.into_iter().map(|s| (w.extrapolate(&s), s)).collect();
            raw_decorations.push(raws);
        }
        let crushed = raw_decorations.iter().flatten().any(|(r, _)| matches!(r, Raw::Infinite));
        let mut punctures = Vec::new();
        for ((labels, center, outer), raws) in spots.into_iter().zip(raw_decorations) {
            let mut decoration = Vec::new();
            for (r, seq) in raws {
                match r {
                    Raw::Finite(x) => {
                        for (i, v) in seq.iter().enumerate() {
                            trace[i] = trace[i].max((v.clone() - x.clone()).abs());
                        }
                        decoration.push(Limit::Finite(x));
                    }
                    Raw::Infinite => decoration.push(Limit::Infinite),
                    Raw::Unstable if crushed => decoration.push(Limit::Infinite),
                    Raw::Unstable => {
                        return Err(Error::NoLimit(format!("decoration of fixed points {labels:?} does not settle")))
                    }
                }
            }
            let pid = next_puncture;
            next_puncture += 1;
            if !outer && labels.len() >= 2 {
                queue.push_back(Pending { chart: w.child_chart(&labels), members: labels.clone(), parent: Some((id, pid)) });
            }
            punctures.push(LimitPuncture { id: pid, position: center, labels, decoration, outer });
        }
        components.push(LimitComponent { id, parent: job.parent, punctures, crushed });
    }
    normalize_residues(&mut components, cfg.tol);
    let limit = assemble(&components, cfg)?;
    let residual_trace = samples.iter().map(|s| s.k).zip(trace).collect();
    let matches_hint = hint.map(|h| structures_equal(&limit, h, cfg.tol.sqrt().max(cfg.tol)));
    Ok(DegenerationReport { components, limit, residual_trace, matches_hint })
}

/// Zeroes negligible limits, then restores the residue sum on every ordinary
/// component and the index relation across ordinary-ordinary nodes.
fn normalize_residues<S: Scalar>(components: &mut [LimitComponent<S>], tol: f64) {
    for c in components.iter_mut() {
        for p in c.punctures.iter_mut() {
            for e in p.decoration.iter_mut() {
                if let Limit::Finite(x) = e {
                    if x.near_zero(tol) {
                        *x = S::zero(x.ctx());
                    }
                }
            }
        }
    }
    for i in 0..components.len() {
        if components[i].crushed {
            continue;
        }
        let ctx = components[i].punctures[0].position.ctx();
        if let Some((pc, pp)) = components[i].parent {
            if !components[pc].crushed {
                let parent_c1 = components[pc]
                    .punctures
                    .iter()
                    .find(|p| p.id == pp)
                    .and_then(|p| p.decoration[0].finite().cloned())
                    .unwrap_or_else(|| S::zero(ctx));
                components[i].punctures[0].decoration[0] = Limit::Finite(S::one(ctx) - parent_c1);
            }
        }
        let fixed_outer = components[i].parent.is_some_and(|(pc, _)| !components[pc].crushed);
        let sum = components[i]
            .punctures
            .iter()
            .filter_map(|p| p.decoration[0].finite().cloned())
            .fold(S::zero(ctx), |a, b| a + b);
        let gap = S::one(ctx) - sum;
        let target = components[i]
            .punctures
            .iter()
            .enumerate()
            .filter(|(_, p)| !(p.outer && fixed_outer))
            .filter_map(|(k, p)| p.decoration[0].finite().map(|x| (k, x.abs())))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|x| x.0);
        if let Some(k) = target {
            if let Limit::Finite(x) = &mut components[i].punctures[k].decoration[0] {
                *x = x.clone() + gap;
            }
        }
    }
}

fn assemble<S: Scalar>(components: &[LimitComponent<S>], cfg: &DegenerationConfig) -> Result<NodedFunction<S>> {
    let mut nodes = Vec::new();
    let mut sphere_components = Vec::new();
    let mut leaf_label: BTreeMap<usize, usize> = BTreeMap::new();
    for c in components {
        if let Some((_, pp)) = c.parent {
            nodes.push((pp, c.punctures[0].id));
        }
        for p in &c.punctures {
            if !p.outer && p.labels.len() == 1 {
                leaf_label.insert(p.id, p.labels[0]);
            }
        }
        sphere_components.push(Component {
            id: c.id,
            punctures: c
                .punctures
                .iter()
                .map(|p| Puncture { id: p.id, position: Point::Finite(p.position.clone()) })
                .collect(),
        });
    }
    let ordinary: Vec<usize> = components.iter().filter(|c| !c.crushed).map(|c| c.id).collect();
    let crush = PartialCrush { sphere: NodedSphere { components: sphere_components, nodes }, ordinary };
    let violations = crush.validate();
    if !violations.is_empty() {
        let text: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::InconsistentLimit(text.join("; ")));
    }
    let cd = crush.crush_data()?;
    let blocks = cd
        .elements
        .iter()
        .map(|x| match *x {
            XElement::Puncture(p) => vec![leaf_label[&p]],
            XElement::Bouquet(b) => {
                let mut ls: Vec<usize> = cd.bouquets[b].free.iter().map(|p| leaf_label[p]).collect();
                ls.sort();
                ls
            }
        })
        .collect();
    let mut maps = BTreeMap::new();
    for c in components.iter().filter(|c| !c.crushed) {
        let parts: Vec<PrincipalPart<S>> = c
            .punctures
            .iter()
            .map(|p| PrincipalPart {
                point: p.position.clone(),
                coeffs: p.decoration.iter().map(|e| e.finite().cloned().unwrap()).collect(),
            })
            .collect();
        let f: RationalMap<S> = from_principal_parts(&parts)
            .map_err(|e| Error::InconsistentLimit(format!("component {}: {e}", c.id)))?;
        maps.insert(c.id, f);
    }
    let nf = NodedFunction { crush, marking: Marking { blocks }, maps };
    let v = nf.validate_with_tol(cfg.tol);
    if !v.is_empty() {
        let text: Vec<String> = v.iter().map(|v| v.to_string()).collect();
        return Err(Error::InconsistentLimit(text.join("; ")));
    }
    Ok(nf)
}
