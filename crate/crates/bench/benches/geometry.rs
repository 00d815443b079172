use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use swclab_core::fixtures::{l2ball_net, random_points_in_body, sb, sb_james};
use swclab_core::{
    bourgain_embedding, distortion_report, gauge, hull_distance, AmbientNorm, ConvexBody, PointSet,
};

fn hull_distances(c: &mut Criterion) {
    let mut group = c.benchmark_group("hull_distance");
    for norm in [
        AmbientNorm::L1,
        AmbientNorm::L2,
        AmbientNorm::Linf,
        AmbientNorm::Lp(3.0),
    ] {
        let net = l2ball_net(4, 64, 1).unwrap().with_norm(norm);
        let a = net.subset(&(0..32).collect::<Vec<_>>());
        let b = PointSet::new(
            4,
            norm,
            net.points()[32..].iter().map(|p| p.scale(0.5)).collect(),
        )
        .unwrap();
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{norm:?}")),
            &(a, b),
            |bench, (a, b)| bench.iter(|| hull_distance(black_box(a), black_box(b)).unwrap()),
        );
    }
    group.finish();
}

fn gauges(c: &mut Criterion) {
    let body = ConvexBody::abs_hull(sb(16).unwrap()).unwrap();
    let probe = random_points_in_body(&ConvexBody::unit_ball(AmbientNorm::L2), 16, 1, 3)
        .unwrap()
        .remove(0);
    c.bench_function("gauge_abs_hull_sb16", |b| {
        b.iter(|| gauge(black_box(&body), black_box(&probe)).unwrap())
    });
}

fn distortion(c: &mut Criterion) {
    let e = bourgain_embedding(&sb_james(31).unwrap(), 4).unwrap();
    c.bench_function("distortion_report_t4", |b| {
        b.iter(|| distortion_report(black_box(&e)).unwrap())
    });
}

criterion_group!(benches, hull_distances, gauges, distortion);
criterion_main!(benches);
