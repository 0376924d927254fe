#![allow(dead_code)]

use noded_core::function::{single_component, NodedFunction};
use noded_core::sphere::{Component, Marking, NodedSphere, PartialCrush, Puncture};
use noded_core::{
    from_principal_parts, FixedPointData, MapF64, Point, PrincipalPart, Scalar, ViolationKind, C64,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn random_c64(rng: &mut ChaCha8Rng, r: f64) -> C64 {
    c(rng.random_range(-r..r), rng.random_range(-r..r))
}

/// Points in a box at least `sep` apart.
pub fn spread_points(rng: &mut ChaCha8Rng, count: usize, radius: f64, sep: f64) -> Vec<C64> {
    let mut pts: Vec<C64> = Vec::new();
    while pts.len() < count {
        let z = random_c64(rng, radius);
        if pts.iter().all(|p| (p - z).norm() >= sep) {
            pts.push(z);
        }
    }
    pts
}

/// Generic fixed-point data of degree `d`: indices of modulus at least 0.3, summing to 1.
pub fn random_generic<S: Scalar>(ctx: S::Ctx, rng: &mut ChaCha8Rng, d: usize) -> FixedPointData<S> {
    let pts = spread_points(rng, d + 1, 3.0, 0.4);
    loop {
        let mut idx: Vec<S> = (0..d)
            .map(|_| {
                let r = rng.random_range(0.3..2.0);
                let t = rng.random_range(0.0..std::f64::consts::TAU);
                S::from_c64(ctx, C64::from_polar(r, t))
            })
            .collect();
        let rest = idx.iter().cloned().fold(S::one(ctx), |a, b| a - b);
        if rest.abs() < 0.3 {
            continue;
        }
        idx.push(rest);
        let points = pts.iter().map(|&p| S::from_c64(ctx, p)).collect();
        return FixedPointData::new(points, idx).expect("generic data");
    }
}

/// `(1 / 2πi) ∮ dz / (z - F(z))` over a circle, by the trapezoid rule.
pub fn contour_index(f: &MapF64, center: C64, radius: f64) -> C64 {
    let n = 512;
    let mut acc = c(0.0, 0.0);
    for i in 0..n {
        let t = std::f64::consts::TAU * i as f64 / n as f64;
        let e = C64::from_polar(1.0, t);
        let z = center + radius * e;
        let fz = f.eval_finite(&z);
        // dz = i r e dt
        acc += c(0.0, radius) * e / (z - fz);
    }
    acc * (std::f64::consts::TAU / n as f64) / c(0.0, std::f64::consts::TAU)
}

/// A random single ordinary component whose first puncture carries a bouquet
/// of level 2..=4; the other punctures are simple or, sometimes, also singular.
pub fn random_single_component<S: Scalar>(ctx: S::Ctx, rng: &mut ChaCha8Rng) -> NodedFunction<S> {
    loop {
        let count = rng.random_range(3..=5);
        let pos: Vec<C64> = (0..count)
            .map(|i| c(4.0 * i as f64, 0.0) + random_c64(rng, 1.0))
            .collect();
        let mut levels = vec![rng.random_range(2..=4)];
        for _ in 1..count {
            levels.push(if rng.random_bool(0.25) { 2 } else { 1 });
        }
        let mut parts: Vec<PrincipalPart<C64>> = Vec::new();
        for (p, &l) in pos.iter().zip(&levels) {
            let mut coeffs: Vec<C64> = (0..l).map(|_| random_c64(rng, 1.5)).collect();
            let top = C64::from_polar(rng.random_range(1.0..2.0), rng.random_range(0.0..std::f64::consts::TAU));
            coeffs[l - 1] = if l == 1 { coeffs[0] } else { top };
            parts.push(PrincipalPart { point: *p, coeffs });
        }
        let others: C64 = parts[..count - 1].iter().map(|p| p.coeffs[0]).sum();
        parts[count - 1].coeffs[0] = c(1.0, 0.0) - others;
        if parts.iter().any(|p| p.coeffs[0].norm() < 0.2) {
            continue;
        }
        let parts: Vec<PrincipalPart<S>> = parts
            .into_iter()
            .map(|p| PrincipalPart {
                point: S::from_c64(ctx, p.point),
                coeffs: p.coeffs.into_iter().map(|x| S::from_c64(ctx, x)).collect(),
            })
            .collect();
        let Ok(map) = from_principal_parts(&parts) else { continue };
        let positions = pos.into_iter().map(|z| Point::Finite(S::from_c64(ctx, z))).collect();
        if let Ok(nf) = single_component(positions, levels, map) {
            return nf;
        }
    }
}

// ---- combinatorial validator table ----

pub fn fin(x: f64) -> Point<C64> {
    Point::Finite(c(x, 0.0))
}

fn comp(id: usize, ids: &[usize]) -> Component<C64> {
    let pos = [fin(0.0), fin(1.0), Point::Infinity, fin(2.0), fin(3.0), fin(-1.0), fin(-2.0)];
    Component {
        id,
        punctures: ids.iter().enumerate().map(|(i, &p)| Puncture { id: p, position: pos[i].clone() }).collect(),
    }
}

fn singles(n: usize) -> Vec<Vec<usize>> {
    (1..=n).map(|i| vec![i]).collect()
}

pub struct Case {
    pub name: &'static str,
    pub crush: PartialCrush<C64>,
    pub marking: Marking,
    /// Expected violation kind, `None` when valid.
    pub expect: Option<ViolationKind>,
    /// Expected `(A, levels)` for valid cases.
    pub shape: Option<(usize, Vec<usize>)>,
}

fn case(
    name: &'static str,
    comps: Vec<Component<C64>>,
    nodes: Vec<(usize, usize)>,
    ordinary: Vec<usize>,
    blocks: Vec<Vec<usize>>,
    expect: Option<ViolationKind>,
    shape: Option<(usize, Vec<usize>)>,
) -> Case {
    Case {
        name,
        crush: PartialCrush { sphere: NodedSphere { components: comps, nodes }, ordinary },
        marking: Marking { blocks },
        expect,
        shape,
    }
}

fn bouquet_marking(a: usize, levels: &[usize]) -> Vec<Vec<usize>> {
    let mut b = singles(a);
    let mut next = a + 1;
    for &l in levels {
        b.push((next..next + l).collect());
        next += l;
    }
    b
}

pub fn validator_table() -> Vec<Case> {
    use ViolationKind as K;
    let three_way = || vec![comp(0, &[0, 1, 2]), comp(1, &[3, 4, 5]), comp(2, &[6, 7, 8, 9])];
    let ex2 = || vec![comp(0, &[0, 1, 2]), comp(1, &[3, 4, 5]), comp(2, &[6, 7, 8, 9, 10])];
    let mut t = vec![
        case("one sphere, three punctures", vec![comp(0, &[0, 1, 2])], vec![], vec![0], singles(3), None, Some((3, vec![]))),
        case("one sphere, five punctures", vec![comp(0, &[0, 1, 2, 3, 4])], vec![], vec![0], singles(5), None, Some((5, vec![]))),
        case("three spheres, nothing crushed", three_way(), vec![(0, 6), (3, 7)], vec![0, 1, 2], singles(6), None, Some((6, vec![]))),
        case(
            "middle sphere crushed, level 2",
            three_way(),
            vec![(0, 6), (3, 7)],
            vec![0, 1],
            bouquet_marking(4, &[2]),
            None,
            Some((4, vec![2])),
        ),
        case(
            "middle sphere crushed, level 3",
            ex2(),
            vec![(0, 6), (3, 7)],
            vec![0, 1],
            bouquet_marking(4, &[3]),
            None,
            Some((4, vec![3])),
        ),
        case(
            "chain of three ordinary spheres",
            vec![comp(0, &[0, 1, 2]), comp(1, &[3, 4, 5, 6]), comp(2, &[7, 8, 9])],
            vec![(2, 3), (6, 7)],
            vec![0, 1, 2],
            singles(6),
            None,
            Some((6, vec![])),
        ),
        case(
            "bubble on a single sphere",
            vec![comp(0, &[0, 1, 2]), comp(1, &[3, 4, 5])],
            vec![(0, 3)],
            vec![0],
            bouquet_marking(2, &[2]),
            None,
            Some((2, vec![2])),
        ),
        case(
            "permuted labels",
            three_way(),
            vec![(0, 6), (3, 7)],
            vec![0, 1],
            vec![vec![6], vec![5], vec![4], vec![3], vec![2, 1]],
            None,
            Some((4, vec![2])),
        ),
        case(
            "crushed hub joining three spheres",
            vec![comp(0, &[0, 1, 2]), comp(1, &[3, 4, 5]), comp(2, &[6, 7, 8]), comp(3, &[9, 10, 11, 12, 13])],
            vec![(0, 9), (3, 10), (6, 11)],
            vec![0, 1, 2],
            bouquet_marking(6, &[2]),
            None,
            Some((6, vec![2])),
        ),
        case(
            "two bubbles on one sphere",
            vec![comp(0, &[0, 1, 2, 3]), comp(1, &[4, 5, 6]), comp(2, &[7, 8, 9])],
            vec![(0, 4), (1, 7)],
            vec![0],
            bouquet_marking(2, &[2, 2]),
            None,
            Some((2, vec![2, 2])),
        ),
    ];
    let bad = |name, comps, nodes, ordinary, blocks, k| case(name, comps, nodes, ordinary, blocks, Some(k), None);
    t.extend([
        bad("two-punctured sphere", vec![comp(0, &[0, 1])], vec![], vec![0], singles(2), K::TooFewPunctures),
        bad("empty sphere", vec![comp(0, &[0, 1, 2]), comp(1, &[])], vec![], vec![0], singles(3), K::TooFewPunctures),
        bad(
            "two spheres, no node",
            vec![comp(0, &[0, 1, 2]), comp(1, &[3, 4, 5])],
            vec![],
            vec![0, 1],
            singles(6),
            K::NodeCount,
        ),
        bad(
            "node on a single sphere",
            vec![comp(0, &[0, 1, 2, 3, 4]), comp(1, &[5, 6, 7])],
            vec![(0, 1)],
            vec![0, 1],
            singles(6),
            K::BadNode,
        ),
        bad(
            "puncture on two nodes",
            vec![comp(0, &[0, 1, 2]), comp(1, &[3, 4, 5]), comp(2, &[6, 7, 8])],
            vec![(0, 3), (0, 6)],
            vec![0, 1, 2],
            singles(5),
            K::BadNode,
        ),
        bad("repeated puncture id", vec![comp(0, &[0, 1, 1])], vec![], vec![0], singles(3), K::DuplicatePuncture),
        bad(
            "coincident positions",
            vec![Component {
                id: 0,
                punctures: vec![
                    Puncture { id: 0, position: fin(0.0) },
                    Puncture { id: 1, position: fin(1.0) },
                    Puncture { id: 2, position: fin(1.0) },
                ],
            }],
            vec![],
            vec![0],
            singles(3),
            K::CoincidentPositions,
        ),
        bad(
            "double edge",
            vec![comp(0, &[0, 1, 2, 3]), comp(1, &[4, 5, 6, 7])],
            vec![(0, 4), (1, 5)],
            vec![0, 1],
            singles(4),
            K::NodeCount,
        ),
        bad(
            "node names a missing puncture",
            vec![comp(0, &[0, 1, 2]), comp(1, &[3, 4, 5])],
            vec![(0, 99)],
            vec![0, 1],
            singles(4),
            K::BadNode,
        ),
        bad(
            "cycle plus an isolated sphere",
            vec![comp(0, &[0, 1, 2, 3]), comp(1, &[4, 5, 6, 7]), comp(2, &[8, 9, 10])],
            vec![(0, 4), (1, 5)],
            vec![0, 1, 2],
            singles(7),
            K::Disconnected,
        ),
        bad(
            "crushed sphere with one free puncture",
            vec![comp(0, &[0, 1, 2]), comp(1, &[3, 4, 5]), comp(2, &[6, 7, 8])],
            vec![(2, 3), (5, 6)],
            vec![0, 2],
            bouquet_marking(4, &[1]),
            K::CrushedTooSmall,
        ),
        bad(
            "crushed hub without free punctures",
            vec![comp(0, &[0, 1, 2]), comp(1, &[3, 4, 5]), comp(2, &[6, 7, 8]), comp(3, &[9, 10, 11])],
            vec![(0, 9), (3, 10), (6, 11)],
            vec![0, 1, 2],
            singles(6),
            K::CrushedTooSmall,
        ),
        bad(
            "two adjacent crushed spheres",
            vec![comp(0, &[0, 1, 2]), comp(1, &[3, 4, 5, 6]), comp(2, &[7, 8, 9])],
            vec![(0, 3), (6, 7)],
            vec![0],
            bouquet_marking(2, &[4]),
            K::CrushedNode,
        ),
        bad("no ordinary sphere", vec![comp(0, &[0, 1, 2])], vec![], vec![], singles(3), K::NoOrdinary),
        bad("unknown ordinary id", vec![comp(0, &[0, 1, 2])], vec![], vec![0, 7], singles(3), K::UnknownComponent),
        bad("too few blocks", three_way(), vec![(0, 6), (3, 7)], vec![0, 1], singles(4), K::MarkingShape),
        bad(
            "bouquet block of the wrong size",
            ex2(),
            vec![(0, 6), (3, 7)],
            vec![0, 1],
            vec![vec![1], vec![2], vec![3], vec![4], vec![5, 6], vec![7]],
            K::MarkingShape,
        ),
        bad(
            "level 3 bouquet marked with two labels",
            ex2(),
            vec![(0, 6), (3, 7)],
            vec![0, 1],
            vec![vec![1], vec![2], vec![3], vec![4], vec![5, 6]],
            K::MarkingShape,
        ),
        bad(
            "repeated label",
            three_way(),
            vec![(0, 6), (3, 7)],
            vec![0, 1],
            vec![vec![1], vec![2], vec![3], vec![4], vec![4, 5]],
            K::MarkingLabels,
        ),
        bad(
            "label out of range",
            three_way(),
            vec![(0, 6), (3, 7)],
            vec![0, 1],
            vec![vec![0], vec![2], vec![3], vec![4], vec![5, 6]],
            K::MarkingLabels,
        ),
    ]);
    t
}

/// Checks a table entry; `Err` describes a misclassification.
pub fn check_case(case: &Case) -> Result<(), String> {
    let v = case.crush.validate_marking(&case.marking);
    match (&case.expect, v.is_empty()) {
        (None, false) => return Err(format!("{}: rejected with {v:?}", case.name)),
        (Some(k), true) => return Err(format!("{}: accepted, expected {k:?}", case.name)),
        (Some(k), false) => {
            if !v.iter().any(|x| x.kind == *k) {
                return Err(format!("{}: expected {k:?}, got {v:?}", case.name));
            }
            return Ok(());
        }
        (None, true) => {}
    }
    let s = &case.crush.sphere;
    let m = s.components.len();
    let j = s.nodes.len();
    let n = s.n();
    let total: usize = s.components.iter().map(|c| c.punctures.len()).sum();
    if total != 2 * j + n || j + 1 != m || j + 3 > n {
        return Err(format!("{}: counting identities fail", case.name));
    }
    let cd = case.crush.crush_data().map_err(|e| format!("{}: {e}", case.name))?;
    let levels: Vec<usize> = cd.bouquets.iter().map(|b| b.level).collect();
    let a = cd.nonsingular.len();
    if a + levels.iter().sum::<usize>() != n || levels.iter().any(|&l| l < 2) {
        return Err(format!("{}: A + ΣL = n fails", case.name));
    }
    if cd.bouquets.len() != m - case.crush.ordinary.len() {
        return Err(format!("{}: bouquet count differs from crushed count", case.name));
    }
    if let Some((ea, el)) = &case.shape {
        if *ea != a || *el != levels {
            return Err(format!("{}: got A = {a}, levels {levels:?}", case.name));
        }
    }
    Ok(())
}
