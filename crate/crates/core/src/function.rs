//! Noded rational functions: a rational map on every ordinary component of a
//! marked partial crush, with fixed points confined to the punctures.

use std::collections::BTreeMap;

use crate::dynamics::{dynamical_index, multiplicity_at, principal_part};
use crate::error::{Error, Result, Violation, ViolationKind as K};
use crate::map::RationalMap;
use crate::point::Point;
use crate::scalar::Scalar;
use crate::sphere::{CanonicalStructure, Component, Marking, NodedSphere, PartialCrush, Puncture, XElement};

#[derive(Clone, Debug, PartialEq)]
pub struct NodedFunction<S: Scalar> {
    pub crush: PartialCrush<S>,
    pub marking: Marking,
    /// Map of each ordinary component, keyed by component id.
    pub maps: BTreeMap<usize, RationalMap<S>>,
}

/// How the chart at a singular puncture `p` is fixed: `p, u, v -> 0, 1, ∞`.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum NormalizationConvention {
    /// `u`, `v` are the next two punctures of the component in cyclic key order.
    #[default]
    Adjacent,
    /// Explicit `(u, v)` puncture ids per singular puncture id.
    Explicit(BTreeMap<usize, (usize, usize)>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum DecorationEntry<S> {
    Index(S),
    /// Principal part coefficients at each singular puncture of a bouquet.
    Bouquet(Vec<Vec<S>>),
}

/// Decoration aligned with the marked elements of the crush.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedDecoration<S> {
    pub entries: Vec<DecorationEntry<S>>,
}

impl<S: Clone> ReducedDecoration<S> {
    pub fn flatten(&self) -> Vec<S> {
        let mut out = Vec::new();
        for e in &self.entries {
            match e {
                DecorationEntry::Index(x) => out.push(x.clone()),
                DecorationEntry::Bouquet(parts) => out.extend(parts.iter().flatten().cloned()),
            }
        }
        out
    }
}

impl<S: Scalar> NodedFunction<S> {
    pub fn n(&self) -> usize {
        self.crush.sphere.n()
    }

    fn ctx(&self) -> Option<S::Ctx> {
        self.maps.values().next().map(|f| f.ctx())
    }

    pub fn validate(&self) -> Vec<Violation> {
        let tol = self.ctx().map(S::tol).unwrap_or(0.0);
        self.validate_with_tol(tol)
    }

    /// Validation with an explicit tolerance for the node index relation.
    pub fn validate_with_tol(&self, tol: f64) -> Vec<Violation> {
        let mut v = self.crush.validate_marking(&self.marking);
        if !v.is_empty() {
            return v;
        }
        let cd = self.crush.crush_data().expect("validated");
        for c in self.crush.ordinary_components() {
            let Some(f) = self.maps.get(&c.id) else {
                v.push(Violation::new(K::MissingMap, format!("component {} has no map", c.id)));
                continue;
            };
            if f.is_identity() {
                v.push(Violation::new(K::IdentityMap, format!("component {} carries the identity", c.id)));
                continue;
            }
            let mut counted = 0;
            for p in &c.punctures {
                let m = multiplicity_at(f, &p.position).unwrap_or(0);
                counted += m;
                let retained = self.crush.sphere.is_nodal(p.id) && cd.bouquet_of(p.id).is_none();
                let level = cd.bouquet_of(p.id).map(|b| cd.bouquets[b].level).unwrap_or(1);
                if retained && m > 1 {
                    v.push(Violation::new(
                        K::NodalMultiplicity,
                        format!("nodal puncture {} is a multiple fixed point", p.id),
                    ));
                } else if m > level {
                    v.push(Violation::new(
                        K::LevelExceeded,
                        format!("puncture {} has multiplicity {m} above level {level}", p.id),
                    ));
                }
            }
            if counted < f.degree() + 1 {
                v.push(Violation::new(
                    K::StrayFixedPoint,
                    format!("component {} has fixed points away from its punctures", c.id),
                ));
            }
        }
        if v.is_empty() {
            for &i in &cd.retained {
                let (a, b) = self.crush.sphere.nodes[i];
                let ia = self.index_at(a);
                let ib = self.index_at(b);
                if let (Some(ia), Some(ib)) = (ia, ib) {
                    let ctx = ia.ctx();
                    let off = ia + ib - S::one(ctx);
                    if !off.near_zero(tol.max(S::tol(ctx))) {
                        v.push(Violation::new(
                            K::NodalIndexSum,
                            format!("indices at node ({a}, {b}) do not sum to 1"),
                        ));
                    }
                }
            }
        }
        v
    }

    /// Index at a puncture of an ordinary component, zero when not fixed.
    pub fn index_at(&self, puncture: usize) -> Option<S> {
        let owner = *self.crush.sphere.owners().get(&puncture)?;
        let f = self.maps.get(&owner)?;
        let pos = self.crush.sphere.position(puncture)?;
        match dynamical_index(f, pos) {
            Ok(x) => Some(x),
            Err(Error::NotFixed) => Some(S::zero(f.ctx())),
            Err(_) => None,
        }
    }

    /// `(u, v)` for every singular puncture.
    pub fn normalization_pairs(&self, conv: &NormalizationConvention) -> Result<BTreeMap<usize, (usize, usize)>> {
        let cd = self.crush.crush_data()?;
        let singular: Vec<usize> = cd.bouquets.iter().flat_map(|b| b.singular.clone()).collect();
        match conv {
            NormalizationConvention::Explicit(m) => {
                for p in &singular {
                    if !m.contains_key(p) {
                        return Err(Error::Input(format!("no normalization for singular puncture {p}")));
                    }
                }
                Ok(m.clone())
            }
            NormalizationConvention::Adjacent => {
                let keys = self.crush.derived_labels(&self.marking)?;
                let owners = self.crush.sphere.owners();
                let mut out = BTreeMap::new();
                for p in singular {
                    let comp = self.crush.sphere.component(owners[&p]).unwrap();
                    let mut ids: Vec<usize> = comp.punctures.iter().map(|q| q.id).collect();
                    ids.sort_by_key(|q| keys[q]);
                    let i = ids.iter().position(|&q| q == p).unwrap();
                    let k = ids.len();
                    out.insert(p, (ids[(i + 1) % k], ids[(i + 2) % k]));
                }
                Ok(out)
            }
        }
    }

    pub fn reduced_decoration(&self, conv: &NormalizationConvention) -> Result<ReducedDecoration<S>> {
        let v = self.validate();
        if !v.is_empty() {
            return Err(Error::Validation(v));
        }
        let cd = self.crush.crush_data()?;
        let pairs = self.normalization_pairs(conv)?;
        let owners = self.crush.sphere.owners();
        let pos = |p: usize| self.crush.sphere.position(p).unwrap().clone();
        let mut entries = Vec::new();
        for x in &cd.elements {
            match *x {
                XElement::Puncture(p) => {
                    entries.push(DecorationEntry::Index(self.index_at(p).ok_or(Error::NotFixed)?));
                }
                XElement::Bouquet(b) => {
                    let bq = &cd.bouquets[b];
                    let mut parts = Vec::new();
                    for &p in &bq.singular {
                        let f = &self.maps[&owners[&p]];
                        let (u, w) = pairs[&p];
                        parts.push(principal_part(f, &pos(p), &pos(u), &pos(w), bq.level)?);
                    }
                    entries.push(DecorationEntry::Bouquet(parts));
                }
            }
        }
        Ok(ReducedDecoration { entries })
    }

    /// Canonical structure together with the maps conjugated into the canonical charts,
    /// aligned with `structure.components`.
    pub fn canonical(&self) -> Result<(CanonicalStructure<S>, Vec<RationalMap<S>>)> {
        let (cs, charts) = self.crush.canonical_form(&self.marking)?;
        let maps = cs
            .components
            .iter()
            .map(|c| {
                let f = self.maps.get(&c.id).ok_or_else(|| Error::Input(format!("no map on {}", c.id)))?;
                Ok(f.conjugate(&charts[&c.id]))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((cs, maps))
    }

    /// The single-component object seen by one ordinary component: nodal
    /// punctures become plain punctures and every singular puncture keeps a
    /// crushed bubble of its level. Labels follow the key order.
    pub fn component_restriction(&self, component: usize) -> Result<NodedFunction<S>> {
        let cd = self.crush.crush_data()?;
        let keys = self.crush.derived_labels(&self.marking)?;
        let comp = self
            .crush
            .sphere
            .component(component)
            .filter(|_| self.crush.is_ordinary(component))
            .ok_or_else(|| Error::Input(format!("{component} is not an ordinary component")))?;
        let mut ps: Vec<&Puncture<S>> = comp.punctures.iter().collect();
        ps.sort_by_key(|p| keys[&p.id]);
        let levels = ps
            .iter()
            .map(|p| cd.bouquet_of(p.id).map(|b| cd.bouquets[b].level).unwrap_or(1))
            .collect();
        let positions = ps.iter().map(|p| p.position.clone()).collect();
        single_component(positions, levels, self.maps[&component].clone())
    }
}

/// One ordinary component carrying `map`, with a crushed bubble of the given
/// level hanging off every puncture of level at least two.
pub fn single_component<S: Scalar>(
    positions: Vec<Point<S>>,
    levels: Vec<usize>,
    map: RationalMap<S>,
) -> Result<NodedFunction<S>> {
    let ctx = map.ctx();
    let k = positions.len();
    let mut main = Component { id: 0, punctures: Vec::new() };
    let mut components = Vec::new();
    let mut nodes = Vec::new();
    let mut next_id = k;
    let mut simple_blocks = Vec::new();
    let mut bouquet_blocks = Vec::new();
    let mut label = 1;
    for (i, (pos, &lvl)) in positions.into_iter().zip(&levels).enumerate() {
        main.punctures.push(Puncture { id: i, position: pos });
        if lvl <= 1 {
            simple_blocks.push(vec![label]);
            label += 1;
            continue;
        }
        let node_id = next_id;
        let mut bubble = Component {
            id: components.len() + 1,
            punctures: vec![Puncture { id: node_id, position: Point::Infinity }],
        };
        for j in 0..lvl {
            bubble.punctures.push(Puncture {
                id: node_id + 1 + j,
                position: Point::Finite(S::from_i64(ctx, j as i64)),
            });
        }
        next_id += lvl + 1;
        nodes.push((i, node_id));
        components.push(bubble);
        bouquet_blocks.push((label..label + lvl).collect::<Vec<_>>());
        label += lvl;
    }
    components.insert(0, main);
    let mut blocks = simple_blocks;
    blocks.extend(bouquet_blocks);
    let nf = NodedFunction {
        crush: PartialCrush { sphere: NodedSphere { components, nodes }, ordinary: vec![0] },
        marking: Marking { blocks },
        maps: BTreeMap::from([(0, map)]),
    };
    let v = nf.validate();
    if !v.is_empty() {
        return Err(Error::Validation(v));
    }
    Ok(nf)
}

/// The object of a single map whose punctures are its distinct fixed points,
/// listed in `order`; labels are handed out along that order.
pub fn embed_vm<S: Scalar>(f: &RationalMap<S>, order: &[Point<S>]) -> Result<NodedFunction<S>> {
    let mut levels = Vec::new();
    for p in order {
        let m = multiplicity_at(f, p)?;
        if m == 0 {
            return Err(Error::NotFixed);
        }
        levels.push(m);
    }
    let total: usize = levels.iter().sum();
    if total != f.degree() + 1 {
        return Err(Error::Input(format!(
            "order lists {total} fixed points counted with multiplicity, degree {} needs {}",
            f.degree(),
            f.degree() + 1
        )));
    }
    if order.len() < 3 {
        return Err(Error::TooFewPoints(order.len()));
    }
    single_component(order.to_vec(), levels, f.clone())
}

/// Largest entrywise gap between the reduced decorations of two objects,
/// matched through their marking blocks; infinite if the blocks differ.
pub fn decoration_distance<S: Scalar>(a: &NodedFunction<S>, b: &NodedFunction<S>) -> Result<f64> {
    let conv = NormalizationConvention::Adjacent;
    let keyed = |x: &NodedFunction<S>| -> Result<BTreeMap<Vec<usize>, Vec<S>>> {
        let d = x.reduced_decoration(&conv)?;
        Ok(x.marking
            .blocks
            .iter()
            .zip(d.entries)
            .map(|(blk, e)| {
                let mut k = blk.clone();
                k.sort();
                let v = match e {
                    DecorationEntry::Index(v) => vec![v],
                    DecorationEntry::Bouquet(parts) => parts.into_iter().flatten().collect(),
                };
                (k, v)
            })
            .collect())
    };
    let (da, db) = (keyed(a)?, keyed(b)?);
    if da.len() != db.len() {
        return Ok(f64::INFINITY);
    }
    let mut worst = 0.0f64;
    for (k, va) in &da {
        let Some(vb) = db.get(k).filter(|vb| vb.len() == va.len()) else {
            return Ok(f64::INFINITY);
        };
        for (x, y) in va.iter().zip(vb) {
            worst = worst.max((x.clone() - y.clone()).abs());
        }
    }
    Ok(worst)
}

/// Equivalence up to per-component Möbius changes of coordinates, preserving
/// labels, nodes and crush data.
pub fn structures_equal<S: Scalar>(a: &NodedFunction<S>, b: &NodedFunction<S>, tol: f64) -> bool {
    let (Ok((ca, ma)), Ok((cb, mb))) = (a.canonical(), b.canonical()) else {
        return false;
    };
    ca.approx_eq(&cb, tol) && ma.iter().zip(&mb).all(|(f, g)| f.approx_eq(g, tol))
}
