//! Stable noded spheres, partial crushes, markings and their normal forms.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use petgraph::unionfind::UnionFind;

use crate::error::{Error, Result, Violation, ViolationKind as K};
use crate::mobius::{mobius_from_triple, Mobius};
use crate::point::Point;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Puncture<S> {
    pub id: usize,
    pub position: Point<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Component<S> {
    pub id: usize,
    pub punctures: Vec<Puncture<S>>,
}

/// A tree of spheres glued at pairs of punctures.
#[derive(Clone, Debug, PartialEq)]
pub struct NodedSphere<S> {
    pub components: Vec<Component<S>>,
    /// Each node identifies two punctures (by id) on different components.
    pub nodes: Vec<(usize, usize)>,
}

impl<S: Scalar> NodedSphere<S> {
    /// Number of non-nodal punctures.
    pub fn n(&self) -> usize {
        let total: usize = self.components.iter().map(|c| c.punctures.len()).sum();
        total.saturating_sub(2 * self.nodes.len())
    }

    pub fn component(&self, id: usize) -> Option<&Component<S>> {
        self.components.iter().find(|c| c.id == id)
    }

    /// Component id owning each puncture id.
    pub fn owners(&self) -> HashMap<usize, usize> {
        let mut m = HashMap::new();
        for c in &self.components {
            for p in &c.punctures {
                m.insert(p.id, c.id);
            }
        }
        m
    }

    pub fn position(&self, puncture: usize) -> Option<&Point<S>> {
        self.components
            .iter()
            .flat_map(|c| c.punctures.iter())
            .find(|p| p.id == puncture)
            .map(|p| &p.position)
    }

    /// Node index and partner of a nodal puncture.
    pub fn partner(&self, puncture: usize) -> Option<(usize, usize)> {
        self.nodes.iter().enumerate().find_map(|(i, &(a, b))| {
            if a == puncture {
                Some((i, b))
            } else if b == puncture {
                Some((i, a))
            } else {
                None
            }
        })
    }

    pub fn is_nodal(&self, puncture: usize) -> bool {
        self.partner(puncture).is_some()
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let mut seen = BTreeSet::new();
        for c in &self.components {
            if c.punctures.len() < 3 {
                v.push(Violation::new(
                    K::TooFewPunctures,
                    format!("component {} has {} punctures", c.id, c.punctures.len()),
                ));
            }
            for p in &c.punctures {
                if !seen.insert(p.id) {
                    v.push(Violation::new(K::DuplicatePuncture, format!("puncture id {} repeated", p.id)));
                }
            }
            let tol = c
                .punctures
                .iter()
                .find_map(|p| p.position.finite().map(|z| S::tol(z.ctx())))
                .unwrap_or(0.0);
            for i in 0..c.punctures.len() {
                for j in i + 1..c.punctures.len() {
                    if c.punctures[i].position.approx_eq(&c.punctures[j].position, tol) {
                        v.push(Violation::new(
                            K::CoincidentPositions,
                            format!(
                                "punctures {} and {} of component {} coincide",
                                c.punctures[i].id, c.punctures[j].id, c.id
                            ),
                        ));
                    }
                }
            }
        }
        let mut comp_ids = BTreeSet::new();
        for c in &self.components {
            if !comp_ids.insert(c.id) {
                v.push(Violation::new(K::DuplicatePuncture, format!("component id {} repeated", c.id)));
            }
        }
        let owners = self.owners();
        let mut used = BTreeSet::new();
        for &(a, b) in &self.nodes {
            match (owners.get(&a), owners.get(&b)) {
                (Some(ca), Some(cb)) if ca != cb => {}
                (Some(_), Some(_)) => v.push(Violation::new(
                    K::BadNode,
                    format!("node ({a}, {b}) joins a component to itself"),
                )),
                _ => v.push(Violation::new(K::BadNode, format!("node ({a}, {b}) names an unknown puncture"))),
            }
            for p in [a, b] {
                if !used.insert(p) {
                    v.push(Violation::new(K::BadNode, format!("puncture {p} lies on two nodes")));
                }
            }
        }
        let m = self.components.len();
        if self.nodes.len() + 1 != m {
            v.push(Violation::new(
                K::NodeCount,
                format!("{} nodes for {} components", self.nodes.len(), m),
            ));
        }
        let n = self.n();
        if n < 3 {
            v.push(Violation::new(K::PunctureCount, format!("only {n} non-nodal punctures")));
        } else if self.nodes.len() > n - 3 {
            v.push(Violation::new(
                K::TooManyNodes,
                format!("{} nodes exceed n - 3 = {}", self.nodes.len(), n - 3),
            ));
        }
        if m > 0 && !self.connected() {
            v.push(Violation::new(K::Disconnected, "dual graph is disconnected"));
        }
        v
    }

    fn connected(&self) -> bool {
        let idx: HashMap<usize, usize> =
            self.components.iter().enumerate().map(|(i, c)| (c.id, i)).collect();
        let owners = self.owners();
        let mut uf = UnionFind::<usize>::new(self.components.len());
        for (a, b) in &self.nodes {
            if let (Some(ca), Some(cb)) = (owners.get(a), owners.get(b)) {
                uf.union(idx[ca], idx[cb]);
            }
        }
        (1..self.components.len()).all(|i| uf.equiv(0, i))
    }

    /// Components reachable from `start` without crossing node `cut`.
    fn side(&self, start: usize, cut: usize) -> Vec<usize> {
        let owners = self.owners();
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            for (i, &(a, b)) in self.nodes.iter().enumerate() {
                if i == cut {
                    continue;
                }
                let (ca, cb) = (owners[&a], owners[&b]);
                let next = if ca == c {
                    cb
                } else if cb == c {
                    ca
                } else {
                    continue;
                };
                if seen.insert(next) {
                    queue.push_back(next);
                }
            }
        }
        seen.into_iter().collect()
    }
}

/// A noded sphere with a chosen set of ordinary components; the rest are crushed.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialCrush<S> {
    pub sphere: NodedSphere<S>,
    pub ordinary: Vec<usize>,
}

/// A crushed component together with the ordinary punctures glued to it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bouquet {
    pub crushed: Vec<usize>,
    /// Punctures of ordinary components attached to the crushed region.
    pub singular: Vec<usize>,
    /// Non-nodal punctures of the crushed region.
    pub free: Vec<usize>,
    pub level: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum XElement {
    Puncture(usize),
    Bouquet(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrushData {
    /// Non-nodal punctures of ordinary components, in component order.
    pub nonsingular: Vec<usize>,
    pub bouquets: Vec<Bouquet>,
    /// Indices of nodes joining two ordinary components.
    pub retained: Vec<usize>,
    /// The marked set: `nonsingular` followed by the bouquets.
    pub elements: Vec<XElement>,
}

impl CrushData {
    pub fn level(&self, x: XElement) -> usize {
        match x {
            XElement::Puncture(_) => 1,
            XElement::Bouquet(b) => self.bouquets[b].level,
        }
    }

    pub fn bouquet_of(&self, puncture: usize) -> Option<usize> {
        self.bouquets.iter().position(|b| b.singular.contains(&puncture))
    }

    pub fn element_of(&self, puncture: usize) -> Option<usize> {
        self.elements.iter().position(|x| match *x {
            XElement::Puncture(p) => p == puncture,
            XElement::Bouquet(b) => self.bouquets[b].singular.contains(&puncture),
        })
    }
}

/// Ordered partition of `1..=n`, one block per marked element (see [`CrushData::elements`]).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Marking {
    pub blocks: Vec<Vec<usize>>,
}

/// Ordinary components joined by retained (non-singular) edges and singular hubs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Realization {
    pub vertices: Vec<usize>,
    /// `(component, component, node index)`
    pub edges: Vec<(usize, usize, usize)>,
    /// Components meeting at each bouquet.
    pub hubs: Vec<Vec<usize>>,
}

impl Realization {
    fn groups(&self, with_hubs: bool) -> Vec<Vec<usize>> {
        let idx: HashMap<usize, usize> = self.vertices.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let mut uf = UnionFind::<usize>::new(self.vertices.len());
        for &(a, b, _) in &self.edges {
            uf.union(idx[&a], idx[&b]);
        }
        if with_hubs {
            for h in &self.hubs {
                for w in h.windows(2) {
                    uf.union(idx[&w[0]], idx[&w[1]]);
                }
            }
        }
        let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, &c) in self.vertices.iter().enumerate() {
            out.entry(uf.find(i)).or_default().push(c);
        }
        out.into_values().collect()
    }

    /// Connectedness once singular nodes are counted as joints.
    pub fn is_connected(&self) -> bool {
        self.groups(true).len() <= 1
    }

    /// Connected pieces using retained nodes only.
    pub fn realization_components(&self) -> Vec<Vec<usize>> {
        self.groups(false)
    }
}

impl<S: Scalar> PartialCrush<S> {
    pub fn is_ordinary(&self, component: usize) -> bool {
        self.ordinary.contains(&component)
    }

    /// Ordinary components in sphere order.
    pub fn ordinary_components(&self) -> impl Iterator<Item = &Component<S>> {
        self.sphere.components.iter().filter(|c| self.ordinary.contains(&c.id))
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut v = self.sphere.validate();
        for id in &self.ordinary {
            if self.sphere.component(*id).is_none() {
                v.push(Violation::new(K::UnknownComponent, format!("ordinary component {id} does not exist")));
            }
        }
        if self.ordinary.is_empty() {
            v.push(Violation::new(K::NoOrdinary, "no ordinary component"));
        }
        let owners = self.sphere.owners();
        for &(a, b) in &self.sphere.nodes {
            if let (Some(ca), Some(cb)) = (owners.get(&a), owners.get(&b)) {
                if !self.is_ordinary(*ca) && !self.is_ordinary(*cb) {
                    v.push(Violation::new(
                        K::CrushedNode,
                        format!("node ({a}, {b}) joins two crushed components"),
                    ));
                }
            }
        }
        for c in &self.sphere.components {
            if self.is_ordinary(c.id) {
                continue;
            }
            let free = c.punctures.iter().filter(|p| !self.sphere.is_nodal(p.id)).count();
            if free < 2 {
                v.push(Violation::new(
                    K::CrushedTooSmall,
                    format!("crushed component {} carries {free} non-nodal punctures", c.id),
                ));
            }
        }
        v
    }

    pub fn retained_nodes(&self) -> Vec<usize> {
        let owners = self.sphere.owners();
        self.sphere
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, (a, b))| self.is_ordinary(owners[a]) && self.is_ordinary(owners[b]))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn crush_data(&self) -> Result<CrushData> {
        let v = self.validate();
        if !v.is_empty() {
            return Err(Error::Validation(v));
        }
        let owners = self.sphere.owners();
        let mut nonsingular = Vec::new();
        for c in self.ordinary_components() {
            for p in &c.punctures {
                if !self.sphere.is_nodal(p.id) {
                    nonsingular.push(p.id);
                }
            }
        }
        // crushed regions: connected pieces of crushed components
        let crushed: Vec<&Component<S>> =
            self.sphere.components.iter().filter(|c| !self.is_ordinary(c.id)).collect();
        let idx: HashMap<usize, usize> = crushed.iter().enumerate().map(|(i, c)| (c.id, i)).collect();
        let mut uf = UnionFind::<usize>::new(crushed.len());
        for (a, b) in &self.sphere.nodes {
            if let (Some(&i), Some(&j)) = (idx.get(&owners[a]), idx.get(&owners[b])) {
                uf.union(i, j);
            }
        }
        let mut regions: Vec<Vec<usize>> = Vec::new();
        let mut root_pos: HashMap<usize, usize> = HashMap::new();
        for (i, c) in crushed.iter().enumerate() {
            let r = uf.find(i);
            let k = *root_pos.entry(r).or_insert_with(|| {
                regions.push(Vec::new());
                regions.len() - 1
            });
            regions[k].push(c.id);
        }
        let mut bouquets = Vec::new();
        for region in regions {
            let mut singular = Vec::new();
            let mut free = Vec::new();
            for cid in &region {
                for p in &self.sphere.component(*cid).unwrap().punctures {
                    match self.sphere.partner(p.id) {
                        None => free.push(p.id),
                        Some((_, q)) if self.is_ordinary(owners[&q]) => singular.push(q),
                        Some(_) => {}
                    }
                }
            }
            // singular punctures in sphere order
            let order: HashMap<usize, usize> = self
                .sphere
                .components
                .iter()
                .flat_map(|c| c.punctures.iter())
                .enumerate()
                .map(|(i, p)| (p.id, i))
                .collect();
            singular.sort_by_key(|p| order[p]);
            let level = free.len();
            bouquets.push(Bouquet { crushed: region, singular, free, level });
        }
        let mut elements: Vec<XElement> = nonsingular.iter().map(|&p| XElement::Puncture(p)).collect();
        elements.extend((0..bouquets.len()).map(XElement::Bouquet));
        Ok(CrushData { nonsingular, bouquets, retained: self.retained_nodes(), elements })
    }

    pub fn reduced_realization(&self) -> Result<Realization> {
        let cd = self.crush_data()?;
        let owners = self.sphere.owners();
        let vertices: Vec<usize> = self.ordinary_components().map(|c| c.id).collect();
        let edges = cd
            .retained
            .iter()
            .map(|&i| {
                let (a, b) = self.sphere.nodes[i];
                (owners[&a], owners[&b], i)
            })
            .collect();
        let hubs = cd
            .bouquets
            .iter()
            .map(|b| {
                let mut h: Vec<usize> = b.singular.iter().map(|p| owners[p]).collect();
                h.dedup();
                h
            })
            .collect();
        Ok(Realization { vertices, edges, hubs })
    }

    pub fn validate_marking(&self, marking: &Marking) -> Vec<Violation> {
        let cd = match self.crush_data() {
            Ok(cd) => cd,
            Err(Error::Validation(v)) => return v,
            Err(e) => return vec![Violation::new(K::MarkingShape, e.to_string())],
        };
        let mut v = Vec::new();
        if marking.blocks.len() != cd.elements.len() {
            v.push(Violation::new(
                K::MarkingShape,
                format!("{} blocks for {} marked elements", marking.blocks.len(), cd.elements.len()),
            ));
            return v;
        }
        for (i, (blk, x)) in marking.blocks.iter().zip(&cd.elements).enumerate() {
            let want = cd.level(*x);
            if blk.len() != want {
                v.push(Violation::new(
                    K::MarkingShape,
                    format!("block {i} has {} labels, level is {want}", blk.len()),
                ));
            }
        }
        let n = self.sphere.n();
        let all: Vec<usize> = marking.blocks.iter().flatten().copied().collect();
        let set: BTreeSet<usize> = all.iter().copied().collect();
        if set.len() != all.len() || set != (1..=n).collect() {
            v.push(Violation::new(K::MarkingLabels, format!("labels are not a partition of 1..={n}")));
        }
        v
    }

    /// Key label of every puncture on an ordinary component: its own label when
    /// non-nodal, otherwise the smallest label behind the node.
    pub fn derived_labels(&self, marking: &Marking) -> Result<BTreeMap<usize, usize>> {
        let v = self.validate_marking(marking);
        if !v.is_empty() {
            return Err(Error::Validation(v));
        }
        let cd = self.crush_data()?;
        let owners = self.sphere.owners();
        let mut own: HashMap<usize, usize> = HashMap::new();
        for (x, blk) in cd.elements.iter().zip(&marking.blocks) {
            if let XElement::Puncture(p) = x {
                own.insert(*p, blk[0]);
            }
        }
        let mut crushed_labels: HashMap<usize, Vec<usize>> = HashMap::new();
        for (x, blk) in cd.elements.iter().zip(&marking.blocks) {
            if let XElement::Bouquet(b) = x {
                for c in &cd.bouquets[*b].crushed {
                    crushed_labels.insert(*c, blk.clone());
                }
            }
        }
        let mut out = BTreeMap::new();
        for c in self.ordinary_components() {
            for p in &c.punctures {
                let key = match self.sphere.partner(p.id) {
                    None => own[&p.id],
                    Some((node, q)) => {
                        let side = self.sphere.side(owners[&q], node);
                        let mut best = usize::MAX;
                        for comp in side {
                            if let Some(ls) = crushed_labels.get(&comp) {
                                best = best.min(*ls.iter().min().unwrap());
                                continue;
                            }
                            for r in &self.sphere.component(comp).unwrap().punctures {
                                if let Some(l) = own.get(&r.id) {
                                    best = best.min(*l);
                                }
                            }
                        }
                        best
                    }
                };
                out.insert(p.id, key);
            }
        }
        Ok(out)
    }

    /// Per ordinary component, the transformation sending its three
    /// lowest-keyed punctures to `0, 1, ∞`, and the normalized structure.
    pub fn canonical_form(&self, marking: &Marking) -> Result<(CanonicalStructure<S>, BTreeMap<usize, Mobius<S>>)> {
        let keys = self.derived_labels(marking)?;
        let cd = self.crush_data()?;
        let owners = self.sphere.owners();
        let mut comps = Vec::new();
        let mut charts = BTreeMap::new();
        for c in self.ordinary_components() {
            let mut ps: Vec<(usize, &Point<S>)> =
                c.punctures.iter().map(|p| (keys[&p.id], &p.position)).collect();
            ps.sort_by_key(|x| x.0);
            let t = mobius_from_triple(ps[0].1, ps[1].1, ps[2].1)?;
            comps.push(CanonicalComponent {
                id: c.id,
                keys: ps.iter().map(|x| x.0).collect(),
                positions: ps.iter().map(|x| t.apply(x.1)).collect(),
            });
            charts.insert(c.id, t);
        }
        comps.sort_by(|a, b| a.keys.cmp(&b.keys));
        let pos_of: HashMap<usize, usize> = comps.iter().enumerate().map(|(i, c)| (c.id, i)).collect();
        let slot = |p: usize| (pos_of[&owners[&p]], keys[&p]);
        let mut bouquets: Vec<(Vec<usize>, Vec<(usize, usize)>)> = cd
            .elements
            .iter()
            .zip(&marking.blocks)
            .filter_map(|(x, blk)| match x {
                XElement::Bouquet(b) => {
                    let mut labels = blk.clone();
                    labels.sort();
                    let mut sing: Vec<(usize, usize)> = cd.bouquets[*b].singular.iter().map(|&p| slot(p)).collect();
                    sing.sort();
                    Some((labels, sing))
                }
                XElement::Puncture(_) => None,
            })
            .collect();
        bouquets.sort();
        let mut nodes: Vec<((usize, usize), (usize, usize))> = cd
            .retained
            .iter()
            .map(|&i| {
                let (a, b) = self.sphere.nodes[i];
                let (x, y) = (slot(a), slot(b));
                if x <= y {
                    (x, y)
                } else {
                    (y, x)
                }
            })
            .collect();
        nodes.sort();
        Ok((CanonicalStructure { components: comps, bouquets, nodes }, charts))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalComponent<S> {
    /// Component id in the source object.
    pub id: usize,
    pub keys: Vec<usize>,
    pub positions: Vec<Point<S>>,
}

/// Label-keyed normal form of a marked partial crush.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalStructure<S> {
    pub components: Vec<CanonicalComponent<S>>,
    /// Sorted labels of each bouquet with its singular slots `(component, key)`.
    pub bouquets: Vec<(Vec<usize>, Vec<(usize, usize)>)>,
    /// Retained nodes as pairs of slots.
    pub nodes: Vec<((usize, usize), (usize, usize))>,
}

impl<S: Scalar> CanonicalStructure<S> {
    pub fn approx_eq(&self, other: &CanonicalStructure<S>, tol: f64) -> bool {
        self.components.len() == other.components.len()
            && self.bouquets == other.bouquets
            && self.nodes == other.nodes
            && self.components.iter().zip(&other.components).all(|(a, b)| {
                a.keys == b.keys
                    && a.positions.iter().zip(&b.positions).all(|(p, q)| p.approx_eq(q, tol))
            })
    }
}
