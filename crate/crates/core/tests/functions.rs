mod common;

use std::collections::BTreeMap;

use common::c;
use noded_core::function::{
    embed_vm, single_component, structures_equal, DecorationEntry, NodedFunction, NormalizationConvention,
};
use noded_core::obstruction::{example2_map, example2_target};
use noded_core::sphere::{Component, Marking, NodedSphere, PartialCrush, Puncture};
use noded_core::{
    from_fixed_point_data, from_principal_parts, FixedPointData, Mobius, Mp, Point, PrincipalPart, Scalar,
    ViolationKind, C64,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn f(x: f64) -> Point<C64> {
    Point::Finite(c(x, 0.0))
}

fn three(id: usize, base: usize) -> Component<C64> {
    Component {
        id,
        punctures: vec![
            Puncture { id: base, position: f(0.0) },
            Puncture { id: base + 1, position: f(1.0) },
            Puncture { id: base + 2, position: f(-1.0) },
        ],
    }
}

/// Two ordinary spheres joined by a retained node at `-1 ~ 0`.
fn joined(shift: f64) -> NodedFunction<C64> {
    let left = FixedPointData::new(vec![c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)], vec![c(0.5, 0.0), c(0.2, 0.0), c(0.3, 0.0)])
        .unwrap();
    let right = FixedPointData::new(
        vec![c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)],
        vec![c(0.7 + shift, 0.0), c(0.6 - shift, 0.0), c(-0.3, 0.0)],
    )
    .unwrap();
    NodedFunction {
        crush: PartialCrush { sphere: NodedSphere { components: vec![three(0, 0), three(1, 3)], nodes: vec![(2, 3)] }, ordinary: vec![0, 1] },
        marking: Marking { blocks: (1..=4).map(|i| vec![i]).collect() },
        maps: BTreeMap::from([(0, from_fixed_point_data(&left).unwrap()), (1, from_fixed_point_data(&right).unwrap())]),
    }
}

#[test]
fn example2_target_is_valid() {
    let nf = example2_target::<C64>(()).unwrap();
    assert!(nf.validate().is_empty());
    assert_eq!(nf.n(), 7);
}

#[test]
fn retained_node_indices_must_sum_to_one() {
    assert!(joined(0.0).validate().is_empty());
    let bad = joined(0.1);
    assert!(bad.validate().iter().any(|v| v.kind == ViolationKind::NodalIndexSum));
}

#[test]
fn stray_fixed_point_is_reported() {
    let data = FixedPointData::new(
        vec![c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(3.0, 0.0)],
        vec![c(0.5, 0.0), c(0.2, 0.0), c(0.2, 0.0), c(0.1, 0.0)],
    )
    .unwrap();
    let nf = NodedFunction {
        crush: PartialCrush { sphere: NodedSphere { components: vec![three(0, 0)], nodes: vec![] }, ordinary: vec![0] },
        marking: Marking { blocks: (1..=3).map(|i| vec![i]).collect() },
        maps: BTreeMap::from([(0, from_fixed_point_data(&data).unwrap())]),
    };
    assert!(nf.validate().iter().any(|v| v.kind == ViolationKind::StrayFixedPoint));
}

#[test]
fn identity_map_is_reported() {
    let nf = NodedFunction {
        crush: PartialCrush { sphere: NodedSphere { components: vec![three(0, 0)], nodes: vec![] }, ordinary: vec![0] },
        marking: Marking { blocks: (1..=3).map(|i| vec![i]).collect() },
        maps: BTreeMap::from([(0, noded_core::RationalMap::identity(()))]),
    };
    assert!(nf.validate().iter().any(|v| v.kind == ViolationKind::IdentityMap));
}

#[test]
fn example2_decoration_and_dimension() {
    let nf = example2_target::<C64>(()).unwrap();
    let dec = nf.reduced_decoration(&NormalizationConvention::Adjacent).unwrap();
    let cd = nf.crush.crush_data().unwrap();
    let dim = cd.nonsingular.len() + cd.bouquets.iter().map(|b| b.singular.len() * b.level).sum::<usize>();
    assert_eq!(dec.flatten().len(), dim);
    assert_eq!(dim, 4 + 2 * 3);
    let parts = dec
        .entries
        .iter()
        .find_map(|e| match e {
            DecorationEntry::Bouquet(b) => Some(b.clone()),
            _ => None,
        })
        .unwrap();
    for (j, part) in parts.iter().enumerate() {
        let sign = if j == 0 { -1.0 } else { 1.0 };
        let want = [c(-1.0, 0.0), c(sign, 0.0), c(1.0, 0.0)];
        for (a, b) in part.iter().zip(want) {
            assert!((a - b).norm() < 1e-10, "{part:?}");
        }
    }
    for comp in [0, 1] {
        let cps = &nf.crush.sphere.component(comp).unwrap().punctures;
        let sum: C64 = cps.iter().map(|p| nf.index_at(p.id).unwrap()).sum();
        assert!((sum - c(1.0, 0.0)).norm() < 1e-10);
    }
}

#[test]
fn simple_object_decoration_is_the_index_vector() {
    let data = FixedPointData::new(
        vec![c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(2.0, 1.0)],
        vec![c(0.5, 0.0), c(0.2, 0.1), c(0.2, -0.1), c(0.1, 0.0)],
    )
    .unwrap();
    let g = from_fixed_point_data(&data).unwrap();
    let nf = embed_vm(&g, &data.points.iter().map(|p| Point::Finite(*p)).collect::<Vec<_>>()).unwrap();
    let flat = nf.reduced_decoration(&NormalizationConvention::Adjacent).unwrap().flatten();
    assert_eq!(flat.len(), 4);
    for (a, b) in flat.iter().zip(&data.indices) {
        assert!((a - b).norm() < 1e-10);
    }
}

#[test]
fn first_coefficient_survives_a_change_of_convention() {
    let nf = single_component(vec![f(0.0), f(1.0), f(-1.0)], vec![3, 1, 1], triple_map()).unwrap();
    let a = nf.reduced_decoration(&NormalizationConvention::Adjacent).unwrap();
    let pairs = nf.normalization_pairs(&NormalizationConvention::Adjacent).unwrap();
    let swapped = pairs.iter().map(|(&p, &(u, v))| (p, (v, u))).collect();
    let b = nf.reduced_decoration(&NormalizationConvention::Explicit(swapped)).unwrap();
    let (fa, fb) = (a.flatten(), b.flatten());
    let bouquet = |d: &noded_core::function::ReducedDecoration<C64>| {
        d.entries
            .iter()
            .find_map(|e| match e {
                DecorationEntry::Bouquet(b) => Some(b[0].clone()),
                _ => None,
            })
            .unwrap()
    };
    let (ba, bb) = (bouquet(&a), bouquet(&b));
    assert!((ba[0] - bb[0]).norm() < 1e-10);
    assert!((ba[1] - bb[1]).norm() > 1e-3);
    assert_eq!(fa.len(), fb.len());
}

fn triple_map() -> noded_core::MapF64 {
    from_principal_parts(&[
        PrincipalPart { point: c(0.0, 0.0), coeffs: vec![c(0.5, 0.0), c(0.3, 0.2), c(1.0, 0.0)] },
        PrincipalPart { point: c(1.0, 0.0), coeffs: vec![c(0.2, 0.0)] },
        PrincipalPart { point: c(-1.0, 0.0), coeffs: vec![c(0.3, 0.0)] },
    ])
    .unwrap()
}

#[test]
fn generic_embedding_has_no_bouquets() {
    let data = FixedPointData::new(vec![c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)], vec![c(0.5, 0.0), c(0.2, 0.0), c(0.3, 0.0)])
        .unwrap();
    let g = from_fixed_point_data(&data).unwrap();
    let nf = embed_vm(&g, &[f(0.0), f(1.0), f(-1.0)]).unwrap();
    let cd = nf.crush.crush_data().unwrap();
    assert!(cd.bouquets.is_empty());
    assert_eq!(nf.crush.sphere.components.len(), 1);
    assert!(nf.crush.reduced_realization().unwrap().is_connected());
}

#[test]
fn double_fixed_point_becomes_a_level_two_bouquet() {
    let g = from_principal_parts(&[
        PrincipalPart { point: c(0.0, 0.0), coeffs: vec![c(0.4, 0.0), c(1.0, 0.0)] },
        PrincipalPart { point: c(1.0, 0.0), coeffs: vec![c(0.5, 0.0)] },
        PrincipalPart { point: c(-1.0, 0.0), coeffs: vec![c(0.1, 0.0)] },
    ])
    .unwrap();
    assert_eq!(g.degree(), 3);
    let nf = embed_vm(&g, &[f(0.0), f(1.0), f(-1.0)]).unwrap();
    let cd = nf.crush.crush_data().unwrap();
    assert_eq!(cd.bouquets.len(), 1);
    assert_eq!(cd.bouquets[0].level, 2);
    assert!(nf.validate().is_empty());
    assert!(embed_vm(&g, &[f(0.0), f(1.0)]).is_err());
}

#[test]
fn the_two_sides_of_the_degree_six_target_differ() {
    let one = |j| single_component(vec![f(0.0), f(1.0), Point::Infinity], vec![3, 1, 1], example2_map((), j).unwrap());
    let (a, b) = (one(1).unwrap(), one(2).unwrap());
    assert!(structures_equal(&a, &a, 1e-9));
    assert!(!structures_equal(&a, &b, 1e-9));
}

fn random_mobius(rng: &mut ChaCha8Rng, prec: u32) -> Mobius<Mp> {
    loop {
        let mut r = || c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let (a, b, cc, d) = (r(), r(), r(), r());
        if (a * d - b * cc).norm() > 0.5 {
            let m = |z| Mp::from_c64(prec, z);
            return Mobius::new(m(a), m(b), m(cc), m(d)).unwrap();
        }
    }
}

fn moved(nf: &NodedFunction<Mp>, rng: &mut ChaCha8Rng, prec: u32) -> NodedFunction<Mp> {
    let mut out = nf.clone();
    for comp in &mut out.crush.sphere.components {
        let t = random_mobius(rng, prec);
        for p in &mut comp.punctures {
            p.position = t.apply(&p.position);
        }
        if let Some(g) = out.maps.get_mut(&comp.id) {
            *g = g.conjugate(&t);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn moved_copies_are_equal(seed in any::<u64>()) {
        let prec = 192;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nf = common::random_single_component::<Mp>(prec, &mut rng);
        let other = moved(&nf, &mut rng, prec);
        prop_assert!(other.validate().is_empty());
        prop_assert!(structures_equal(&nf, &other, 1e-20));
        prop_assert!(structures_equal(&other, &nf, 1e-20));
        let third = moved(&other, &mut rng, prec);
        prop_assert!(structures_equal(&nf, &third, 1e-20));
    }

    #[test]
    fn embedding_separates_non_conjugate_maps(seed in any::<u64>()) {
        let prec = 192;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = rng.random_range(2..=5);
        let data = common::random_generic::<Mp>(prec, &mut rng, d);
        let g = from_fixed_point_data(&data).unwrap();
        let order: Vec<Point<Mp>> = data.points.iter().cloned().map(Point::Finite).collect();
        let a = embed_vm(&g, &order).unwrap();
        let t = random_mobius(&mut rng, prec);
        let moved_order: Vec<Point<Mp>> = order.iter().map(|p| t.apply(p)).collect();
        let b = embed_vm(&g.conjugate(&t), &moved_order).unwrap();
        prop_assert!(structures_equal(&a, &b, 1e-20));
        let mut other = data.clone();
        let bump = Mp::from_f64(prec, 0.05, 0.0);
        other.indices[0] = other.indices[0].clone() + bump.clone();
        other.indices[1] = other.indices[1].clone() - bump;
        let h = from_fixed_point_data(&other).unwrap();
        let e = embed_vm(&h, &order).unwrap();
        prop_assert!(!structures_equal(&a, &e, 1e-20));
    }

    #[test]
    fn per_component_index_formula(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nf = common::random_single_component::<Mp>(192, &mut rng);
        for comp in nf.crush.ordinary_components() {
            let sum = comp.punctures.iter().fold(Mp::zero(192), |s, p| s + nf.index_at(p.id).unwrap());
            prop_assert!((sum - Mp::one(192)).abs() < 1e-40);
        }
        let dec = nf.reduced_decoration(&NormalizationConvention::Adjacent).unwrap();
        let cd = nf.crush.crush_data().unwrap();
        let dim = cd.nonsingular.len() + cd.bouquets.iter().map(|b| b.singular.len() * b.level).sum::<usize>();
        prop_assert_eq!(dec.flatten().len(), dim);
    }
}
