//! JSON documents. Complex values are `["re", "im"]` string pairs, `∞` is
//! `"inf"`, polynomials list coefficients from degree 0 up. Every top-level
//! document carries `"schema": "noded-rational/1"`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::degeneration::{DegenerationReport, FamilySample, Limit};
use crate::dynamics::FixedPointData;
use crate::error::{Error, Result};
use crate::function::{NodedFunction, NormalizationConvention};
use crate::map::RationalMap;
use crate::point::Point;
use crate::poly::Poly;
use crate::reopening::ReopenedFamily;
use crate::scalar::Scalar;
use crate::sphere::{Component, Marking, NodedSphere, PartialCrush, Puncture};

pub const SCHEMA: &str = "noded-rational/1";
const INF: &str = "inf";

pub type RawComplex = [String; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawPoint {
    Finite(RawComplex),
    Token(String),
}

fn schema() -> Option<String> {
    Some(SCHEMA.to_string())
}

fn check_schema(s: &Option<String>) -> Result<()> {
    match s.as_deref() {
        Some(SCHEMA) => Ok(()),
        Some(other) => Err(Error::Input(format!("unsupported schema {other:?}"))),
        None => Err(Error::Input("missing \"schema\" field".into())),
    }
}

pub fn scalar_out<S: Scalar>(x: &S) -> RawComplex {
    let (re, im) = x.to_strings();
    [re, im]
}

pub fn scalar_in<S: Scalar>(ctx: S::Ctx, raw: &RawComplex) -> Result<S> {
    S::parse(ctx, &raw[0], &raw[1]).map_err(Error::Input)
}

pub fn point_out<S: Scalar>(p: &Point<S>) -> RawPoint {
    match p {
        Point::Infinity => RawPoint::Token(INF.into()),
        Point::Finite(x) => RawPoint::Finite(scalar_out(x)),
    }
}

pub fn point_in<S: Scalar>(ctx: S::Ctx, raw: &RawPoint) -> Result<Point<S>> {
    match raw {
        RawPoint::Token(t) if t == INF => Ok(Point::Infinity),
        RawPoint::Token(t) => Err(Error::Input(format!("unknown point token {t:?}"))),
        RawPoint::Finite(c) => Ok(Point::Finite(scalar_in(ctx, c)?)),
    }
}

fn scalars_in<S: Scalar>(ctx: S::Ctx, raw: &[RawComplex]) -> Result<Vec<S>> {
    raw.iter().map(|c| scalar_in(ctx, c)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub points: Vec<RawComplex>,
    pub indices: Vec<RawComplex>,
}

impl FixedPointsDoc {
    pub fn from_data<S: Scalar>(d: &FixedPointData<S>) -> Self {
        FixedPointsDoc {
            schema: schema(),
            points: d.points.iter().map(scalar_out).collect(),
            indices: d.indices.iter().map(scalar_out).collect(),
        }
    }

    /// Parsed but not validated.
    pub fn to_data<S: Scalar>(&self, ctx: S::Ctx) -> Result<FixedPointData<S>> {
        check_schema(&self.schema)?;
        Ok(FixedPointData { points: scalars_in(ctx, &self.points)?, indices: scalars_in(ctx, &self.indices)? })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawMap {
    pub num: Vec<RawComplex>,
    pub den: Vec<RawComplex>,
}

impl RawMap {
    pub fn from_map<S: Scalar>(f: &RationalMap<S>) -> Self {
        RawMap { num: f.num().coeffs().iter().map(scalar_out).collect(), den: f.den().coeffs().iter().map(scalar_out).collect() }
    }

    pub fn to_map<S: Scalar>(&self, ctx: S::Ctx) -> Result<RationalMap<S>> {
        let num = Poly::new(ctx, scalars_in(ctx, &self.num)?);
        let den = Poly::new(ctx, scalars_in(ctx, &self.den)?);
        RationalMap::new(num, den)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawFixedPoint {
    pub pos: RawPoint,
    pub index: RawComplex,
}

/// A map with the recomputed indices at the points it was built from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub num: Vec<RawComplex>,
    pub den: Vec<RawComplex>,
    pub fixed_points: Vec<RawFixedPoint>,
}

impl MapDoc {
    pub fn new<S: Scalar>(f: &RationalMap<S>, fixed: &[(Point<S>, S)]) -> Self {
        let raw = RawMap::from_map(f);
        MapDoc {
            schema: schema(),
            num: raw.num,
            den: raw.den,
            fixed_points: fixed.iter().map(|(p, i)| RawFixedPoint { pos: point_out(p), index: scalar_out(i) }).collect(),
        }
    }

    pub fn to_map<S: Scalar>(&self, ctx: S::Ctx) -> Result<RationalMap<S>> {
        check_schema(&self.schema)?;
        RawMap { num: self.num.clone(), den: self.den.clone() }.to_map(ctx)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawPuncture {
    pub id: usize,
    pub pos: RawPoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawComponent {
    pub id: usize,
    pub punctures: Vec<RawPuncture>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodedDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub components: Vec<RawComponent>,
    pub nodes: Vec<[usize; 2]>,
    pub ordinary: Vec<usize>,
    pub marking: Vec<Vec<usize>>,
    #[serde(default)]
    pub maps: BTreeMap<String, RawMap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<BTreeMap<String, [usize; 2]>>,
}

impl NodedDoc {
    pub fn from_function<S: Scalar>(nf: &NodedFunction<S>, conv: Option<&NormalizationConvention>) -> Self {
        let sphere = &nf.crush.sphere;
        NodedDoc {
            schema: schema(),
            components: sphere
                .components
                .iter()
                .map(|c| RawComponent {
                    id: c.id,
                    punctures: c.punctures.iter().map(|p| RawPuncture { id: p.id, pos: point_out(&p.position) }).collect(),
                })
                .collect(),
            nodes: sphere.nodes.iter().map(|&(a, b)| [a, b]).collect(),
            ordinary: nf.crush.ordinary.clone(),
            marking: nf.marking.blocks.clone(),
            maps: nf.maps.iter().map(|(id, f)| (id.to_string(), RawMap::from_map(f))).collect(),
            convention: match conv {
                Some(NormalizationConvention::Explicit(m)) => {
                    Some(m.iter().map(|(p, &(u, v))| (p.to_string(), [u, v])).collect())
                }
                _ => None,
            },
        }
    }

    fn without_schema(mut self) -> Self {
        self.schema = None;
        self
    }

    /// Parsed but not validated.
    pub fn to_function<S: Scalar>(&self, ctx: S::Ctx) -> Result<(NodedFunction<S>, NormalizationConvention)> {
        check_schema(&self.schema)?;
        self.to_function_unchecked(ctx)
    }

    fn to_function_unchecked<S: Scalar>(&self, ctx: S::Ctx) -> Result<(NodedFunction<S>, NormalizationConvention)> {
        let components = self
            .components
            .iter()
            .map(|c| {
                Ok(Component {
                    id: c.id,
                    punctures: c
                        .punctures
                        .iter()
                        .map(|p| Ok(Puncture { id: p.id, position: point_in(ctx, &p.pos)? }))
                        .collect::<Result<_>>()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let maps = self
            .maps
            .iter()
            .map(|(k, m)| {
                let id = k.parse::<usize>().map_err(|_| Error::Input(format!("bad component id {k:?}")))?;
                Ok((id, m.to_map(ctx)?))
            })
            .collect::<Result<BTreeMap<_, _>>>()?;
        let conv = match &self.convention {
            None => NormalizationConvention::Adjacent,
            Some(m) => NormalizationConvention::Explicit(
                m.iter()
                    .map(|(k, &[u, v])| {
                        let p = k.parse::<usize>().map_err(|_| Error::Input(format!("bad puncture id {k:?}")))?;
                        Ok((p, (u, v)))
                    })
                    .collect::<Result<_>>()?,
            ),
        };
        let nf = NodedFunction {
            crush: PartialCrush {
                sphere: NodedSphere { components, nodes: self.nodes.iter().map(|n| (n[0], n[1])).collect() },
                ordinary: self.ordinary.clone(),
            },
            marking: Marking { blocks: self.marking.clone() },
            maps,
        };
        Ok((nf, conv))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawSample {
    pub k: u64,
    pub points: Vec<RawComplex>,
    pub indices: Vec<RawComplex>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub component: Option<usize>,
    pub samples: Vec<RawSample>,
    /// Expected limit, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<NodedDoc>,
}

impl FamilyDoc {
    pub fn from_samples<S: Scalar>(samples: &[FamilySample<S>], target: Option<&NodedFunction<S>>) -> Self {
        FamilyDoc {
            schema: schema(),
            component: None,
            samples: samples
                .iter()
                .map(|s| RawSample {
                    k: s.k,
                    points: s.data.points.iter().map(scalar_out).collect(),
                    indices: s.data.indices.iter().map(scalar_out).collect(),
                })
                .collect(),
            target: target.map(|t| NodedDoc::from_function(t, None).without_schema()),
        }
    }

    pub fn to_samples<S: Scalar>(&self, ctx: S::Ctx) -> Result<(Vec<FamilySample<S>>, Option<NodedFunction<S>>)> {
        let samples = self
            .samples
            .iter()
            .map(|s| {
                let data = FixedPointData { points: scalars_in(ctx, &s.points)?, indices: scalars_in(ctx, &s.indices)? };
                data.validate()?;
                Ok(FamilySample { k: s.k, data })
            })
            .collect::<Result<Vec<_>>>()?;
        let target = match &self.target {
            Some(t) => Some(t.to_function_unchecked(ctx)?.0),
            None => None,
        };
        Ok((samples, target))
    }
}

/// Per-component families produced by reopening.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySetDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub families: Vec<FamilyDoc>,
}

impl FamilySetDoc {
    pub fn from_families<S: Scalar>(fams: &[ReopenedFamily<S>]) -> Self {
        FamilySetDoc {
            schema: schema(),
            families: fams
                .iter()
                .map(|f| {
                    let mut d = FamilyDoc::from_samples(&f.samples, Some(&f.target));
                    d.schema = None;
                    d.component = Some(f.component);
                    d
                })
                .collect(),
        }
    }
}

/// Either a single family or a set of them.
pub fn parse_families(text: &str) -> Result<Vec<FamilyDoc>> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Input(e.to_string()))?;
    if v.get("families").is_some() {
        let set: FamilySetDoc = serde_json::from_value(v).map_err(|e| Error::Input(e.to_string()))?;
        check_schema(&set.schema)?;
        Ok(set.families)
    } else {
        let doc: FamilyDoc = serde_json::from_value(v).map_err(|e| Error::Input(e.to_string()))?;
        check_schema(&doc.schema)?;
        Ok(vec![doc])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawLimitPuncture {
    pub id: usize,
    pub pos: RawPoint,
    pub labels: Vec<usize>,
    /// `"inf"` for divergent entries.
    pub decoration: Vec<RawPoint>,
    pub outer: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawLimitComponent {
    pub id: usize,
    pub parent: Option<[usize; 2]>,
    pub crushed: bool,
    pub punctures: Vec<RawLimitPuncture>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub component: Option<usize>,
    pub limit: NodedDoc,
    pub components: Vec<RawLimitComponent>,
    pub residual_trace: Vec<(u64, f64)>,
    pub matches_target: Option<bool>,
}

impl ReportDoc {
    pub fn from_report<S: Scalar>(r: &DegenerationReport<S>) -> Self {
        ReportDoc {
            schema: schema(),
            component: None,
            limit: NodedDoc::from_function(&r.limit, None).without_schema(),
            components: r
                .components
                .iter()
                .map(|c| RawLimitComponent {
                    id: c.id,
                    parent: c.parent.map(|(a, b)| [a, b]),
                    crushed: c.crushed,
                    punctures: c
                        .punctures
                        .iter()
                        .map(|p| RawLimitPuncture {
                            id: p.id,
                            pos: point_out(&Point::Finite(p.position.clone())),
                            labels: p.labels.clone(),
                            decoration: p
                                .decoration
                                .iter()
                                .map(|e| match e {
                                    Limit::Finite(x) => RawPoint::Finite(scalar_out(x)),
                                    Limit::Infinite => RawPoint::Token(INF.into()),
                                })
                                .collect(),
                            outer: p.outer,
                        })
                        .collect(),
                })
                .collect(),
            residual_trace: r.residual_trace.clone(),
            matches_target: r.matches_hint,
        }
    }

    pub fn limit_function<S: Scalar>(&self, ctx: S::Ctx) -> Result<NodedFunction<S>> {
        Ok(self.limit.to_function_unchecked(ctx)?.0)
    }

    pub fn csv(&self) -> String {
        trace_csv(&self.residual_trace)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportSetDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub reports: Vec<ReportDoc>,
}

pub fn trace_csv(trace: &[(u64, f64)]) -> String {
    let mut s = String::from("k,residual\n");
    for (k, r) in trace {
        s.push_str(&format!("{k},{r:e}\n"));
    }
    s
}

/// Wraps any serializable report with the schema tag.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tagged<T> {
    pub schema: String,
    #[serde(flatten)]
    pub body: T,
}

impl<T> Tagged<T> {
    pub fn new(body: T) -> Self {
        Tagged { schema: SCHEMA.into(), body }
    }

    pub fn check(&self) -> Result<()> {
        check_schema(&Some(self.schema.clone()))
    }
}
