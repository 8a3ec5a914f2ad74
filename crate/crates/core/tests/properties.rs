use proptest::prelude::*;

use cubeshift::castle::{locate, odometer_castle, pullback, verify_castle, SamplePoints, VerifyMode};
use cubeshift::embedding::{cantor_code, interleave_phi, trajectory_block, BaseMap, BaseMapSpec};
use cubeshift::scalar::{int, pow2_neg, ratio};
use cubeshift::systems::{act, dist_x, dyn_metric, CubeSeqPoint, MetricConfig, OdometerPoint, ProductPoint};
use cubeshift::widim::{
    covers, lebesgue_lower_bound, mesh, order, widim_exact, widim_greedy, AxisBox, BoxCover, ExactConfig, WeightedCube,
    Witness,
};
use cubeshift::window::{boundary, is_invariant, sum_set, FiniteWindow, InvarianceParams};
use cubeshift::Rational;

fn window() -> impl Strategy<Value = FiniteWindow> {
    prop::collection::vec(-12i64..12, 1..6).prop_map(FiniteWindow::from)
}

fn odometer() -> impl Strategy<Value = OdometerPoint> {
    (prop::collection::vec(0u8..2, 0..6), prop::collection::vec(0u8..2, 1..4))
        .prop_map(|(pre, per)| OdometerPoint::new(pre, per).unwrap())
}

fn point() -> impl Strategy<Value = ProductPoint> {
    (odometer(), prop::collection::vec((-5i64..5, 0i64..=8), 0..5)).prop_map(|(y, entries)| {
        let mut u = CubeSeqPoint::zero(1).unwrap();
        for (n, v) in entries {
            u.set(n, vec![ratio(v, 8)]).unwrap();
        }
        ProductPoint::new(y, u)
    })
}

fn dyadic_weight() -> impl Strategy<Value = Rational> {
    (0u64..4).prop_map(pow2_neg)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn invariance_is_translation_invariant(f in window(), g in -20i64..20) {
        let k = FiniteWindow::interval(-1, 1);
        prop_assert_eq!(boundary(&f, &k).unwrap().len(), boundary(&f.translate(g), &k).unwrap().len());
        let p = InvarianceParams::new(k.clone(), ratio(1, 2)).unwrap();
        prop_assert_eq!(is_invariant(&f, &p).unwrap(), is_invariant(&f.translate(g), &p).unwrap());
        prop_assert!(f.is_subset(&sum_set(&k, &f).unwrap()));
    }

    #[test]
    fn odometer_action_law(y in odometer(), a in -300i64..300, b in -300i64..300) {
        prop_assert_eq!(y.add_int(a).add_int(b), y.add_int(a + b));
        prop_assert_eq!(y.add_int(a).add_int(-a), y.clone());
        let n = 8;
        prop_assert_eq!(y.add_int(a).residue(n), (y.residue(n) as i64 + a).rem_euclid(1 << n) as u64);
    }

    #[test]
    fn odometer_metric_is_translation_invariant(y in odometer(), z in odometer(), g in -100i64..100) {
        prop_assert_eq!(y.dist(&z), y.add_int(g).dist(&z.add_int(g)));
        prop_assert_eq!(y.dist(&z), z.dist(&y));
    }

    #[test]
    fn product_metric_axioms(a in point(), b in point(), c in point()) {
        let mc = MetricConfig::default();
        let ab = dist_x(&a, &b, &mc).unwrap();
        prop_assert_eq!(&ab, &dist_x(&b, &a, &mc).unwrap());
        prop_assert!(ab <= dist_x(&a, &c, &mc).unwrap() + dist_x(&c, &b, &mc).unwrap());
        prop_assert_eq!(ab == int(0), a == b);
    }

    #[test]
    fn dynamical_metric_matches_translates(a in point(), b in point(), f in window(), g in -6i64..6) {
        let mc = MetricConfig::default();
        let by_translates = f
            .iter()
            .map(|h| dist_x(&act(&a, h), &act(&b, h), &mc).unwrap())
            .max()
            .unwrap();
        prop_assert_eq!(dyn_metric(&a, &b, &f, &mc).unwrap(), by_translates);
        prop_assert_eq!(
            dyn_metric(&a, &b, &f.translate(g), &mc).unwrap(),
            dyn_metric(&act(&a, g), &act(&b, g), &f, &mc).unwrap()
        );
    }

    #[test]
    fn greedy_witness_is_valid(weights in prop::collection::vec(dyadic_weight(), 0..3), e in 1u64..4) {
        let cube = WeightedCube::new(weights).unwrap();
        let eps = pow2_neg(e);
        let r = widim_greedy(&cube, &eps);
        let Witness::Explicit(w) = &r.witness else { panic!("small covers are explicit") };
        prop_assert!(covers(w, &cube).unwrap());
        prop_assert!(mesh(w, &cube).unwrap() <= eps);
        prop_assert_eq!(order(w).unwrap(), r.value);
    }

    #[test]
    fn exact_value_is_bracketed(weights in prop::collection::vec(dyadic_weight(), 0..4), e in 1u64..4) {
        let cube = WeightedCube::new(weights).unwrap();
        let eps = pow2_neg(e);
        let r = widim_exact(&cube, &eps, &ExactConfig::default()).unwrap();
        prop_assert_eq!(r.value, lebesgue_lower_bound(&cube, &eps));
        prop_assert!(r.value <= widim_greedy(&cube, &eps).value);
        let Witness::Explicit(w) = &r.witness else { panic!("explicit witness expected") };
        prop_assert!(covers(w, &cube).unwrap());
        prop_assert!(mesh(w, &cube).unwrap() <= eps);
        prop_assert_eq!(order(w).unwrap(), r.value);
    }

    #[test]
    fn order_grows_with_the_cover(cuts in prop::collection::vec((0i64..8, 1i64..8), 1..6)) {
        let boxes: Vec<AxisBox<Rational>> = cuts
            .iter()
            .map(|&(a, l)| AxisBox::new(vec![(ratio(a, 8), ratio((a + l).min(8), 8))]).unwrap())
            .collect();
        let whole = BoxCover::new(boxes.clone());
        let part = BoxCover::new(boxes[..boxes.len() - 1].to_vec());
        if !part.is_empty() {
            prop_assert!(order(&part).unwrap() <= order(&whole).unwrap());
        }
        let cube = WeightedCube::unweighted(1);
        if !part.is_empty() && covers(&part, &cube).unwrap() {
            prop_assert!(covers(&whole, &cube).unwrap());
        }
    }

    #[test]
    fn odometer_castle_levels_follow_residues(y in odometer(), n in 1u32..7) {
        let c = odometer_castle(n).unwrap();
        prop_assert_eq!(locate(&c, &y).unwrap(), (0, y.residue(n) as i64));
    }

    #[test]
    fn pulled_back_castles_pass_sampled_checks(pts in prop::collection::vec(point(), 1..12), n in 1u32..5) {
        let c = pullback(&odometer_castle(n).unwrap());
        let p = InvarianceParams::new(FiniteWindow::interval(-1, 1), pow2_neg(n as u64 - 1)).unwrap();
        let r = verify_castle(&c, VerifyMode::Sampled(SamplePoints::Product(&pts)), &p).unwrap();
        prop_assert!(r.passed());
    }

    #[test]
    fn cantor_code_separates_at_first_difference(y in odometer(), z in odometer()) {
        match y.first_difference(&z) {
            None => prop_assert_eq!(cantor_code(&y), cantor_code(&z)),
            Some(n) => {
                let gap = cantor_code(&y) - cantor_code(&z);
                let gap = if gap < int(0) { -gap } else { gap };
                prop_assert!(gap >= int(1) / num_traits::pow(int(3), n + 1));
            }
        }
    }

    #[test]
    fn interleave_stays_in_its_slot(t in 0i64..=64, l in 1usize..7, j in 1usize..7) {
        prop_assume!(j <= l);
        let v = interleave_phi(&ratio(t, 64), j, l).unwrap();
        let lo = ratio(j as i64 - 1, l as i64);
        prop_assert!(lo <= v && v <= &lo + ratio(1, 2 * l as i64));
    }

    #[test]
    fn trajectory_blocks_commute_with_the_action(x in point(), g in -5i64..5, w in window()) {
        let f: BaseMap<Rational> = BaseMap::new(BaseMapSpec::standard(1, 2), 1).unwrap();
        prop_assert_eq!(
            trajectory_block(&f, &act(&x, g), &w).unwrap(),
            trajectory_block(&f, &x, &w.translate(g)).unwrap()
        );
    }
}
