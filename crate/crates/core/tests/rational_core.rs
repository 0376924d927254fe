mod common;

use common::{c, contour_index, random_generic};
use noded_core::{
    dynamical_index, fixed_points, from_fixed_point_data, from_principal_parts, is_polynomial_like,
    mobius_from_triple, principal_part, Error, Exact, FixedPointData, MapExact, MapF64, Mobius, Mp, Point, Poly,
    PolynomialLike, PrincipalPart, RationalMap, Scalar, C64,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn q(n: i64, d: i64) -> Exact {
    Exact::from_ratio((), n, d)
}

fn qi(n: i64) -> Exact {
    q(n, 1)
}

fn fq(x: Exact) -> Point<Exact> {
    Point::Finite(x)
}

fn square() -> MapExact {
    RationalMap::new(Poly::new((), vec![qi(0), qi(0), qi(1)]), Poly::one(())).unwrap()
}

fn two_z_over() -> MapExact {
    RationalMap::new(Poly::new((), vec![qi(0), qi(2)]), Poly::new((), vec![qi(1), qi(0), qi(1)])).unwrap()
}

fn random_mobius(rng: &mut ChaCha8Rng) -> Mobius<C64> {
    loop {
        let mut r = || c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let (a, b, cc, d) = (r(), r(), r(), r());
        if (a * d - b * cc).norm() > 0.5 {
            return Mobius::new(a, b, cc, d).unwrap();
        }
    }
}

#[test]
fn triple_at_standard_points_is_identity() {
    let t = mobius_from_triple(&fq(qi(0)), &fq(qi(1)), &Point::Infinity).unwrap();
    for z in [q(3, 7), q(-5, 2), qi(11)] {
        assert_eq!(t.apply(&fq(z.clone())), fq(z));
    }
    assert_eq!(t.apply(&Point::Infinity), Point::Infinity);
}

#[test]
fn triple_with_infinity_in_the_middle() {
    let t = mobius_from_triple(&fq(qi(0)), &Point::Infinity, &fq(qi(1))).unwrap();
    assert_eq!(t.apply(&fq(qi(0))), fq(qi(0)));
    assert_eq!(t.apply(&Point::Infinity), fq(qi(1)));
    assert_eq!(t.apply(&fq(qi(1))), Point::Infinity);
    // z / (z - 1) at z = 3
    assert_eq!(t.apply(&fq(qi(3))), fq(q(3, 2)));
}

#[test]
fn triple_recovers_the_normalizing_chart() {
    let eps = q(1, 1000);
    for s in [-1i64, 1] {
        let two_s = qi(2 * s);
        let t = mobius_from_triple(&fq(qi(0)), &fq(two_s.clone() + eps.clone()), &fq(two_s.clone())).unwrap();
        let mu = eps.clone() / (two_s.clone() + eps.clone());
        for z in [q(1, 3), qi(5), q(-7, 4)] {
            let want = mu.clone() * z.clone() / (z.clone() - two_s.clone());
            assert_eq!(t.apply(&fq(z)), fq(want));
        }
    }
}

#[test]
fn coincident_triple_is_rejected() {
    assert!(matches!(mobius_from_triple(&fq(qi(1)), &fq(qi(1)), &Point::Infinity), Err(Error::InvalidTriple)));
    assert!(matches!(
        mobius_from_triple::<Exact>(&Point::Infinity, &fq(qi(0)), &Point::Infinity),
        Err(Error::InvalidTriple)
    ));
}

#[test]
fn conjugation_by_identity_and_inversion() {
    let f = two_z_over();
    assert_eq!(f.conjugate(&Mobius::identity(())), f);
    let inv = Mobius::new(qi(0), qi(1), qi(1), qi(0)).unwrap();
    let g = square().conjugate(&inv);
    for z in [qi(2), q(-1, 3), q(5, 7)] {
        assert_eq!(g.eval_finite(&z), z.clone() * z);
    }
    let fps = fixed_points(&square().conjugate(&Mobius::new(qi(0), qi(1), qi(1), qi(0)).unwrap()).to_mp(128));
    assert_eq!(fps.unwrap().len(), 3);
}

trait ToMp {
    fn to_mp(&self, prec: u32) -> RationalMap<Mp>;
}

impl ToMp for MapExact {
    fn to_mp(&self, prec: u32) -> RationalMap<Mp> {
        let conv = |p: &Poly<Exact>| Poly::new(prec, p.coeffs().iter().map(|x| Mp::from_c64(prec, x.to_c64())).collect());
        RationalMap::new(conv(self.num()), conv(self.den())).unwrap()
    }
}

#[test]
fn three_point_data_gives_the_expected_map() {
    let data = FixedPointData::new(vec![qi(-1), qi(0), qi(1)], vec![qi(1), qi(-1), qi(1)]).unwrap();
    let f = from_fixed_point_data(&data).unwrap();
    assert_eq!(f.degree(), 2);
    let g = two_z_over();
    for z in [qi(2), qi(3), q(1, 2), q(-7, 3)] {
        assert_eq!(f.eval_finite(&z), g.eval_finite(&z));
    }
}

#[test]
fn invalid_fixed_point_data() {
    let bad_sum = FixedPointData::new(vec![qi(0), qi(1), qi(2)], vec![q(3, 10), q(3, 10), q(3, 10)]);
    assert!(matches!(bad_sum, Err(Error::IndexFormula(_))));
    let dup = FixedPointData::new(vec![qi(0), qi(1), qi(1)], vec![qi(1), qi(1), qi(-1)]);
    assert!(matches!(dup, Err(Error::Collision(_, _))));
    let zero = FixedPointData::new(vec![qi(0), qi(1), qi(2)], vec![qi(0), qi(2), qi(-1)]);
    assert!(matches!(zero, Err(Error::DegenerateIndex(_))));
    let short = FixedPointData::new(vec![qi(0), qi(1)], vec![q(1, 2), q(1, 2)]);
    assert!(matches!(short, Err(Error::TooFewPoints(2))));
}

#[test]
fn fixed_points_of_small_maps() {
    let prec = 128;
    let sorted = |f: MapExact| {
        let mut v: Vec<(Option<f64>, usize)> = fixed_points(&f.to_mp(prec))
            .unwrap()
            .into_iter()
            .map(|(p, m)| (p.finite().map(|z| z.to_c64().re), m))
            .collect();
        v.sort_by(|a, b| a.0.unwrap_or(f64::MAX).total_cmp(&b.0.unwrap_or(f64::MAX)));
        v
    };
    let close = |v: Vec<(Option<f64>, usize)>, want: &[(Option<f64>, usize)]| {
        assert_eq!(v.len(), want.len());
        for (a, b) in v.iter().zip(want) {
            assert_eq!(a.1, b.1);
            match (a.0, b.0) {
                (Some(x), Some(y)) => assert!((x - y).abs() < 1e-30),
                (None, None) => {}
                _ => panic!("{v:?} vs {want:?}"),
            }
        }
    };
    close(sorted(square()), &[(Some(0.0), 1), (Some(1.0), 1), (None, 1)]);
    close(sorted(two_z_over()), &[(Some(-1.0), 1), (Some(0.0), 1), (Some(1.0), 1)]);
    let f = RationalMap::new(Poly::new((), vec![qi(0), qi(0), qi(1)]), Poly::new((), vec![qi(-1), qi(2)])).unwrap();
    close(sorted(f), &[(Some(0.0), 1), (Some(1.0), 1), (None, 1)]);
    assert!(matches!(fixed_points(&RationalMap::<Mp>::identity(prec)), Err(Error::IdentityMap)));
}

#[test]
fn indices_of_the_square_map() {
    let f = square();
    assert_eq!(dynamical_index(&f, &fq(qi(1))).unwrap(), qi(-1));
    assert_eq!(dynamical_index(&f, &fq(qi(0))).unwrap(), qi(1));
    assert_eq!(dynamical_index(&f, &Point::Infinity).unwrap(), qi(1));
    assert!(matches!(dynamical_index(&f, &fq(qi(2))), Err(Error::NotFixed)));
}

fn example2_g2() -> MapExact {
    from_principal_parts(&[
        PrincipalPart { point: qi(1), coeffs: vec![qi(2)] },
        PrincipalPart { point: qi(0), coeffs: vec![qi(-1), qi(1), qi(1)] },
    ])
    .unwrap()
}

#[test]
fn principal_part_of_the_triple_point() {
    let f = example2_g2();
    let pp = principal_part(&f, &fq(qi(0)), &fq(qi(1)), &Point::Infinity, 3).unwrap();
    assert_eq!(pp, vec![qi(-1), qi(1), qi(1)]);
    assert!(matches!(
        principal_part(&f, &fq(qi(0)), &fq(qi(1)), &Point::Infinity, 2),
        Err(Error::LevelExceeded { multiplicity: 3, level: 2 })
    ));
    let simple = principal_part(&f, &fq(qi(1)), &fq(qi(0)), &Point::Infinity, 1).unwrap();
    assert_eq!(simple, vec![dynamical_index(&f, &fq(qi(1))).unwrap()]);
}

#[test]
fn first_coefficient_ignores_the_chart() {
    let f = example2_g2();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut seen_c2 = Vec::new();
    for _ in 0..20 {
        let mut r = || q(rng.random_range(-50..50), rng.random_range(1..9));
        let (u, v) = (r(), r());
        if u.is_zero() || v.is_zero() || u == v {
            continue;
        }
        let pp = principal_part(&f, &fq(qi(0)), &fq(u), &fq(v), 3).unwrap();
        assert_eq!(pp[0], qi(-1));
        seen_c2.push(pp[1].clone());
    }
    seen_c2.dedup();
    assert!(seen_c2.len() > 1);
}

#[test]
fn polynomial_like_classification() {
    let prec = 128;
    assert!(matches!(is_polynomial_like(&square().to_mp(prec)).unwrap(), PolynomialLike::Conjugate { point: Point::Infinity, .. }));
    // 1 is superattracting with no other preimage: F(z) - 1 = -(z - 1)^2 / (z^2 + 1)
    match is_polynomial_like(&two_z_over().to_mp(prec)).unwrap() {
        PolynomialLike::Conjugate { point: Point::Finite(p), .. } => assert!((p.to_c64() - c(1.0, 0.0)).norm() < 1e-20),
        other => panic!("{other:?}"),
    }
    let data = FixedPointData::new(vec![qi(-1), qi(0), qi(1)], vec![q(1, 2), q(1, 4), q(1, 4)]).unwrap();
    let generic = from_fixed_point_data(&data).unwrap().to_mp(prec);
    assert!(matches!(is_polynomial_like(&generic).unwrap(), PolynomialLike::No));
    let constant = RationalMap::new(Poly::constant(Mp::from_i64(prec, 3)), Poly::one(prec)).unwrap();
    assert!(matches!(is_polynomial_like(&constant).unwrap(), PolynomialLike::Constant));
    // z^2 moved so that its totally invariant points 0, ∞ sit at 1, 2
    let t = Mobius::new(qi(2), qi(1), qi(1), qi(1)).unwrap();
    let g = square().conjugate(&t).to_mp(prec);
    match is_polynomial_like(&g).unwrap() {
        PolynomialLike::Conjugate { point: Point::Finite(p), witness } => {
            assert!(witness.apply(&Point::Finite(p.clone())).is_infinite());
            let p = p.to_c64();
            assert!((p - c(1.0, 0.0)).norm() < 1e-20 || (p - c(2.0, 0.0)).norm() < 1e-20);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn index_agrees_with_a_contour_integral() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..30 {
        let d = rng.random_range(2..=6);
        let data = random_generic::<C64>((), &mut rng, d);
        let f: MapF64 = from_fixed_point_data(&data).unwrap();
        for (p, lam) in data.points.iter().zip(&data.indices) {
            let oracle = contour_index(&f, *p, 0.1);
            let got = dynamical_index(&f, &Point::Finite(*p)).unwrap();
            assert!((oracle - lam).norm() < 1e-8, "{oracle} vs {lam}");
            assert!((got - lam).norm() < 1e-8);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_round_trip(seed in any::<u64>(), d in 2usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pts: Vec<Exact> = Vec::new();
        while pts.len() < d + 1 {
            let z = Exact::new(
                num_rational::BigRational::new(rng.random_range(-20i64..20).into(), rng.random_range(1i64..5).into()),
                num_rational::BigRational::new(rng.random_range(-20i64..20).into(), rng.random_range(1i64..5).into()),
            );
            if !pts.contains(&z) {
                pts.push(z);
            }
        }
        let mut idx: Vec<Exact> = (0..d).map(|_| q(rng.random_range(1..9), rng.random_range(1..5))).collect();
        let rest = idx.iter().cloned().fold(qi(1), |a, b| a - b);
        prop_assume!(!rest.is_zero());
        idx.push(rest);
        let data = FixedPointData::new(pts, idx).unwrap();
        let f = from_fixed_point_data(&data).unwrap();
        prop_assert_eq!(f.degree(), d);
        let mut sum = qi(0);
        for (p, lam) in data.points.iter().zip(&data.indices) {
            let got = dynamical_index(&f, &fq(p.clone())).unwrap();
            prop_assert_eq!(&got, lam);
            sum = sum + got;
        }
        prop_assert_eq!(sum, qi(1));
        prop_assert!(matches!(dynamical_index(&f, &Point::Infinity), Err(Error::NotFixed)));
    }

    #[test]
    fn conjugation_moves_fixed_points_and_keeps_indices(seed in any::<u64>()) {
        let prec = 160;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = rng.random_range(2..=5);
        let data = random_generic::<Mp>(prec, &mut rng, d);
        let f = from_fixed_point_data(&data).unwrap();
        let t64 = random_mobius(&mut rng);
        let t = Mobius::new(
            Mp::from_c64(prec, t64.a), Mp::from_c64(prec, t64.b), Mp::from_c64(prec, t64.c), Mp::from_c64(prec, t64.d),
        ).unwrap();
        let g = f.conjugate(&t);
        prop_assert_eq!(g.degree(), f.degree());
        for (p, lam) in data.points.iter().zip(&data.indices) {
            let tp = t.apply(&Point::Finite(p.clone()));
            let got = dynamical_index(&g, &tp).unwrap();
            prop_assert!((got - lam.clone()).abs() < 1e-30);
        }
        let total = fixed_points(&g).unwrap().iter().map(|(_, m)| m).sum::<usize>();
        prop_assert_eq!(total, d + 1);
    }

    #[test]
    fn double_precision_index_sum(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = rng.random_range(2..=8);
        let f: MapF64 = from_fixed_point_data(&random_generic::<C64>((), &mut rng, d)).unwrap();
        let sum: C64 = fixed_points(&f).unwrap().iter().map(|(p, _)| dynamical_index(&f, p).unwrap()).sum();
        prop_assert!((sum - c(1.0, 0.0)).norm() < 1e-8);
    }
}
