use deltametric::amalgam::{cap_distances, free_amalgam};
use deltametric::coding::{approx_check, decode, encode_dvs, sim_check};
use deltametric::equiv::scaling_witness;
use deltametric::limitbuilder::{density_perturb, extend_partial_isometry};
use deltametric::ramsey::{arrow, ArrowStatus};
use deltametric::space::{copies_of, isomorphic, PartialIsometry};
use deltametric::{DistanceSet, ExactReal, Space};
use proptest::prelude::*;

fn int(n: i64) -> ExactReal {
    ExactReal::int(n)
}

fn surd(d: u64) -> impl Strategy<Value = ExactReal> {
    (-30i64..30, 1i64..9, -30i64..30, 1i64..9).prop_map(move |(a, ad, b, bd)| ExactReal::quadratic(a, ad, b, bd, d))
}

/// Shortest-path metric of a complete graph with random integer weights.
fn space(max: usize) -> impl Strategy<Value = Space> {
    (1..=max)
        .prop_flat_map(|n| {
            (
                proptest::collection::vec(1i64..7, n * n),
                Just((0..n).collect::<Vec<usize>>()).prop_shuffle(),
            )
        })
        .prop_map(|(w, order)| {
            let n = order.len();
            let mut d: Vec<Vec<i64>> = (0..n)
                .map(|i| (0..n).map(|j| if i == j { 0 } else { w[i.min(j) * n + i.max(j)] }).collect())
                .collect();
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
                    }
                }
            }
            Space::from_fn(n, false, |i, j| int(d[i][j])).with_order(order).unwrap()
        })
}

fn closed_set() -> impl Strategy<Value = DistanceSet> {
    (2i64..7, proptest::collection::vec(any::<bool>(), 6)).prop_map(|(cap, keep)| {
        let mut vals: Vec<i64> = (1..cap).filter(|&v| keep[v as usize - 1]).collect();
        vals.push(cap);
        DistanceSet::from_ints(&vals, Some(cap)).unwrap().close(&int(cap), 1000).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn field_laws(a in surd(7), b in surd(7), c in surd(7)) {
        prop_assert_eq!(a.clone() + b.clone(), b.clone() + a.clone());
        prop_assert_eq!(a.clone() * b.clone(), b.clone() * a.clone());
        prop_assert_eq!((a.clone() + b.clone()) + c.clone(), a.clone() + (b.clone() + c.clone()));
        prop_assert_eq!((a.clone() * b.clone()) * c.clone(), a.clone() * (b.clone() * c.clone()));
        if !b.is_zero() {
            prop_assert_eq!((a.clone() * b.clone()) / b.clone(), a.clone());
        }
    }

    #[test]
    fn comparison_agrees_with_floats(a in surd(3), b in surd(3)) {
        let (fa, fb) = (a.to_f64(), b.to_f64());
        prop_assume!((fa - fb).abs() > 1e-6);
        prop_assert_eq!(a.partial_cmp(&b), fa.partial_cmp(&fb));
    }

    #[test]
    fn text_round_trip(a in surd(5)) {
        prop_assert_eq!(a.to_string().parse::<ExactReal>().unwrap(), a);
    }

    #[test]
    fn validation_is_hereditary(x in space(6), mask in 0u32..64) {
        prop_assert!(x.validate().is_ok());
        let pts: Vec<usize> = (0..x.len()).filter(|i| mask >> i & 1 == 1).collect();
        prop_assert!(x.induced(&pts).validate().is_ok());
    }

    #[test]
    fn ordered_spaces_have_only_the_identity(x in space(6)) {
        let id: Vec<usize> = (0..x.len()).collect();
        prop_assert_eq!(isomorphic(&x, &x), Some(id));
    }

    #[test]
    fn copies_match_subset_enumeration(c in space(6), a in space(3)) {
        let found = copies_of(&c, &a).unwrap();
        for mask in 0u32..1 << c.len() {
            let pts: Vec<usize> = (0..c.len()).filter(|i| mask >> i & 1 == 1).collect();
            if pts.len() != a.len() {
                continue;
            }
            let is_copy = isomorphic(&c.induced(&pts), &a).is_some();
            prop_assert_eq!(is_copy, found.iter().any(|f| {
                let mut f = f.clone();
                f.sort_unstable();
                f == pts
            }));
        }
    }

    #[test]
    fn cross_distances_bounded_by_every_overlap_point(b in space(5), extra in space(3), k in 0usize..3) {
        let k = k.min(b.len());
        // C: the first k points of B, then `extra` at distance 12 from them
        let n = k + extra.len();
        let c = Space::from_fn(n, false, |i, j| match (i < k, j < k) {
            (true, true) => b.d(i, j).clone(),
            (false, false) => extra.d(i - k, j - k).clone(),
            _ => int(6) * int(2),
        });
        prop_assume!(c.validate().is_ok());
        let overlap: Vec<(usize, usize)> = (0..k).map(|i| (i, i)).collect();
        prop_assume!(!(k == 0 && b.len() == 1 && c.len() == 1));
        let am = free_amalgam(&b, &c, &overlap).unwrap();
        prop_assert!(am.space.validate().is_ok());
        for x in 0..b.len() {
            for y in k..c.len() {
                let d = am.space.d(x, am.from_c[y]);
                for &(zb, zc) in &overlap {
                    prop_assert!(d <= &(b.d(x, zb).clone() + c.d(zc, y).clone()));
                }
            }
        }
        for i in 0..k {
            prop_assert_eq!(am.from_c[i], i);
        }
    }

    #[test]
    fn forth_steps_keep_pairs_and_distances(x in space(6), seed in 0usize..64) {
        let n = x.len();
        let p = PartialIsometry::identity(&[seed % n]);
        let target = (seed / 7) % n;
        prop_assume!(target != seed % n);
        let (y, q) = extend_partial_isometry(&x, &p, target).unwrap();
        prop_assert!(q.pairs().contains(&(seed % n, seed % n)));
        let c = q.check(&y, &y);
        prop_assert!(c.isometric && c.order_preserving);
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(y.d(i, j), x.d(i, j));
            }
        }
    }

    #[test]
    fn encode_decode_round_trip(d in closed_set()) {
        prop_assert_eq!(decode(&encode_dvs(&d)).unwrap(), d);
    }

    #[test]
    fn bridge_agrees_with_scaling(d in closed_set(), num in 1i64..7, den in 1i64..4, other in closed_set(), scaled in any::<bool>()) {
        let e = if scaled { d.scale(&ExactReal::rational(num, den)).unwrap() } else { other };
        let w = scaling_witness(&d, &e).unwrap();
        let (cd, ce) = (encode_dvs(&d), encode_dvs(&e));
        let s = if cd.len() == ce.len() { sim_check(&cd, &ce) } else { None };
        prop_assert_eq!(w.as_ref().map(|w| w.ratio.clone()), s.as_ref().map(|s| s.ratio.clone()));
        if s.is_some() {
            prop_assert!(approx_check(&cd, &ce, 1_000_000, 1).unwrap().is_some());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn capping_keeps_metrics_and_is_idempotent(x in space(6), cap in 1i64..8) {
        let once = cap_distances(&x, &int(cap)).unwrap();
        prop_assert!(once.validate().is_ok());
        prop_assert_eq!(cap_distances(&once, &int(cap)).unwrap(), once);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn perturbation_is_exact(pick in 0usize..3, seed in 0usize..1000) {
        let sets = [
            DistanceSet::from_ints(&[1, 2, 3, 4], Some(4)).unwrap(),
            DistanceSet::from_ints(&[1, 2], Some(2)).unwrap(),
            DistanceSet::from_ints(&[2, 3, 4], Some(4)).unwrap(),
        ];
        let d = &sets[pick];
        let m = Space::uniform(3, d.values().last().unwrap().clone(), true);
        let (a, b) = (seed % 3, (seed / 3) % 3);
        let p = PartialIsometry::new(vec![(a, b)]).unwrap();
        let out = density_perturb(&m, &p, d.values().last().unwrap(), d).unwrap();
        prop_assert_eq!(out.space.d(b, out.images[0]), &out.delta);
        prop_assert!(out.space.validate().is_ok());
        prop_assert!(&out.delta < d.values().last().unwrap());
    }

    #[test]
    fn arrow_monotone_in_c(n in 3usize..6) {
        let (b, a) = (Space::uniform(3, int(1), true), Space::uniform(2, int(1), true));
        let small = arrow(&Space::uniform(n, int(1), true), &b, &a, 2, 1_000_000, 1).unwrap();
        let big = arrow(&Space::uniform(n + 1, int(1), true), &b, &a, 2, 1_000_000, 1).unwrap();
        if small.status == ArrowStatus::Holds {
            prop_assert_eq!(big.status, ArrowStatus::Holds);
        }
        if let Some(col) = &small.bad_coloring {
            prop_assert_eq!(small.status, ArrowStatus::Fails);
            prop_assert_eq!(col.len(), n * (n - 1) / 2);
        }
    }
}
