use proptest::prelude::*;
use swclab_core::{
    binary_tree, derive_once, distortion_report, gauge, kloeckner_prune, separation_value,
    trace_count, verify_james_system, AmbientNorm, ConvexBody, DeriveOptions, Embedding,
    JamesSystem, PointSet, SetFamily, Vector,
};

fn planar_set(max: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..=max)
}

fn to_set(norm: AmbientNorm, pts: &[(f64, f64)]) -> PointSet {
    let pts = pts
        .iter()
        .map(|&(x, y)| Vector::new(vec![x, y]).unwrap())
        .collect();
    PointSet::new(2, norm, pts).unwrap()
}

fn shatters(sets: &[u32], s: u32) -> bool {
    let traces: std::collections::BTreeSet<u32> = sets.iter().map(|m| m & s).collect();
    traces.len() == 1usize << s.count_ones()
}

fn binom(n: u32, k: u32) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn larger_eps_removes_more(pts in planar_set(6), e1 in 0.05f64..1.0, e2 in 0.05f64..1.0) {
        let set = to_set(AmbientNorm::L2, &pts);
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let (keep_lo, _) = derive_once(&set, lo, &DeriveOptions::exact()).unwrap();
        let (keep_hi, _) = derive_once(&set, hi, &DeriveOptions::exact()).unwrap();
        prop_assert!(keep_hi.iter().all(|i| keep_lo.contains(i)), "{keep_hi:?} not inside {keep_lo:?}");
    }

    #[test]
    fn derivation_keeps_a_subset(pts in planar_set(6), eps in 0.05f64..2.0) {
        let set = to_set(AmbientNorm::Linf, &pts);
        let (keep, witnesses) = derive_once(&set, eps, &DeriveOptions::exact()).unwrap();
        prop_assert_eq!(keep.len() + witnesses.len(), set.len());
        prop_assert!(keep.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn james_systems_are_separated(n in 2usize..8, scale in 0.1f64..3.0) {
        // Scaled summing-basis points with coordinate functionals.
        let points: Vec<Vector> = (1..=n)
            .map(|m| Vector::new((0..n).map(|i| if i < m { scale } else { 0.0 }).collect()).unwrap())
            .collect();
        let functionals = (0..n).map(|i| Vector::basis(n, i)).collect();
        let sys = JamesSystem::new(scale, AmbientNorm::Linf, points.clone(), functionals).unwrap();
        prop_assert!(verify_james_system(&sys, 1e-9).pass);
        let cert = separation_value(&points, AmbientNorm::Linf).unwrap();
        prop_assert!(cert.theta >= scale - 1e-9, "separation {} below {}", cert.theta, scale);
    }

    #[test]
    fn traces_obey_sauer_shelah(masks in prop::collection::vec(0u32..256, 1..40), a_mask in 1u32..256) {
        let sets: Vec<Vec<u32>> = masks
            .iter()
            .map(|m| (0..8).filter(|i| m >> i & 1 == 1).map(|i| i + 1).collect())
            .collect();
        let fam = SetFamily::new(8, sets).unwrap();
        let a: Vec<u32> = (0..8).filter(|i| a_mask >> i & 1 == 1).map(|i| i + 1).collect();
        let count = trace_count(&fam, &a).unwrap().count as u64;

        let traces: std::collections::BTreeSet<u32> = masks.iter().map(|m| m & a_mask).collect();
        prop_assert_eq!(count, traces.len() as u64);
        let vc = (0..256u32)
            .filter(|s| s & !a_mask == 0 && shatters(&masks, *s))
            .map(u32::count_ones)
            .max()
            .unwrap();
        let bound: u64 = (0..=vc).map(|i| binom(a.len() as u32, i)).sum();
        prop_assert!(count <= bound, "{count} traces exceed {bound} for vc {vc}");
    }

    #[test]
    fn gauges_are_homogeneous(pts in planar_set(5), x in -1.0f64..1.0, y in -1.0f64..1.0, t in -4.0f64..4.0) {
        prop_assume!(pts.iter().any(|&(a, b)| a.abs() + b.abs() > 1e-3));
        let body = ConvexBody::abs_hull(to_set(AmbientNorm::L2, &pts)).unwrap();
        let v = Vector::new(vec![x, y]).unwrap();
        match (gauge(&body, &v), gauge(&body, &v.scale(t))) {
            (Ok(g), Ok(gt)) if t == 0.0 => prop_assert!(gt == 0.0 && g >= 0.0),
            (Ok(g), Ok(gt)) if g.is_infinite() => prop_assert!(gt.is_infinite()),
            (Ok(g), Ok(gt)) => prop_assert!((gt - t.abs() * g).abs() <= 1e-8 * (1.0 + gt)),
            (g, gt) => {
                // Outside the span both sides are infinite or rejected together, unless t = 0.
                prop_assert!(g.is_err() == gt.is_err() || t == 0.0);
            }
        }
    }

    #[test]
    fn pruning_never_worsens_constants(coords in prop::collection::vec(-1.0f64..1.0, 3 * 31)) {
        let tree = binary_tree(4).unwrap();
        let map: Vec<Vector> = coords.chunks(3).map(|c| Vector::new(c.to_vec()).unwrap()).collect();
        let e = Embedding::new(tree, map, AmbientNorm::L2, ConvexBody::unit_ball(AmbientNorm::L2)).unwrap();
        let before = distortion_report(&e).unwrap();
        let (pruned, _) = kloeckner_prune(&e).unwrap();
        let after = distortion_report(&pruned).unwrap();
        prop_assert!(after.sep_norm >= before.sep_norm - 1e-12);
        prop_assert!(after.lip_gauge <= before.lip_gauge + 1e-12);
    }
}
