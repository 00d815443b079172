//! Acceptance suite: one PASS/FAIL line per criterion, with pinned tolerances.
//!
//! Expected values come from oracles written here, independent of the library
//! code paths they check. Run with `cargo test --test acceptance`.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use swclab_core::convexity::SignSumStatus;
use swclab_core::embed::{kloeckner_iterate, orthonormal_tree};
use swclab_core::fixtures::{self, sb_james, sb_points};
use swclab_core::{
    binary_tree, block_family, bourgain_embedding, check_derivation_shrink,
    check_midpoint_inequality, check_sign_sum_bound, diamond, distortion_report, dz_index,
    find_functionals, gauge, hull_distance, laakso, modulus, schreier, separation_value,
    slicing_functional, to_points, trace_count, vc_extract, verify_james_system, AmbientNorm,
    ConvexBody, DeltaEvaluator, DeriveOptions, ModulusMethod, PointSet, SetFamily, Vector,
};

/// Criteria that cannot hold as stated; they still run and print FAIL.
const KNOWN_UNATTAINABLE: &[(u32, &str)] = &[(
    9,
    "sep_norm >= 1/2 is impossible for trees of height >= 2 built on SB points under the sup norm; 1/3 is optimal",
)];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn main() {
    let criteria: Vec<Criterion> = vec![
        (
            1,
            "block-family derivation index and survivors",
            c01_block_derivation,
        ),
        (2, "slicing functionals isolate block points", c02_slicing),
        (3, "block-family trace formula", c03_trace_formula),
        (4, "Schreier trace growth", c04_schreier_growth),
        (5, "shattered sets and chain separation", c05_sauer_shelah),
        (6, "functional certificates on SB(n)", c06_james_sb),
        (7, "tree metric equals prefix formula", c07_tree_metric),
        (8, "diamond and Laakso recurrences", c08_graph_recurrences),
        (9, "Bourgain map distortion on SB trees", c09_bourgain),
        (10, "fork pruning in the Euclidean ball", c10_fork_pruning),
        (11, "modulus identities", c11_modulus),
        (12, "shrink inclusion on a Euclidean net", c12_shrink),
        (13, "hull distance and gauge oracles", c13_oracles),
        (14, "byte-identical repeated runs", c14_determinism),
    ];
    let mut unexpected = Vec::new();
    for (id, name, check) in criteria {
        let start = Instant::now();
        let out = check();
        let secs = start.elapsed().as_secs_f64();
        let known = KNOWN_UNATTAINABLE.iter().find(|(k, _)| *k == id);
        let status = if out.pass { "PASS" } else { "FAIL" };
        println!("[{id:02}] {status} {name} ({secs:.1}s): {}", out.detail);
        match (out.pass, known) {
            (false, Some((_, why))) => println!("     known: {why}"),
            (false, None) => unexpected.push(id),
            (true, Some(_)) => {
                println!("     note: listed as unattainable but passed");
                unexpected.push(id);
            }
            (true, None) => {}
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected results for criteria {unexpected:?}");
        std::process::exit(1);
    }
}

fn c01_block_derivation() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for n_max in [2, 3, 4] {
        let set = fixtures::blocks(n_max).unwrap();
        let trace = dz_index(&set, 0.5, 64, &DeriveOptions::exact()).unwrap();
        let origin_only = trace.levels.get(1) == Some(&vec![0]) && set.points()[0].is_zero();
        pass &= trace.index == Some(2) && origin_only;
        details.push(format!(
            "n_max={n_max}: index={:?} level1={:?}",
            trace.index,
            trace.levels.get(1)
        ));
    }
    outcome(pass, details.join("; "))
}

fn c02_slicing() -> Outcome {
    let points = to_points(&block_family(4).unwrap(), AmbientNorm::Linf).unwrap();
    let mut failures = 0;
    let mut checked = 0;
    for n in 1..=4u32 {
        for m in 1..=n {
            checked += 1;
            let Ok(r) = slicing_functional(n, m, 4) else {
                failures += 1;
                continue;
            };
            // Oracle: block n occupies coordinates n(n-1)/2+1 ..= n(n+1)/2.
            let base = (n * (n - 1) / 2) as usize;
            let target: Vec<f64> = (0..10)
                .map(|i| {
                    if i >= base && i < base + m as usize {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect();
            let alpha_ok = (r.halfspace.alpha - (m as f64 - 0.5)).abs() < 1e-12;
            for (i, y) in points.points().iter().enumerate() {
                let inside = r.halfspace.c.dot(y) > r.halfspace.alpha;
                let is_target = y.coords() == target.as_slice();
                if inside != is_target || (is_target && i != r.target) || !alpha_ok {
                    failures += 1;
                }
            }
        }
    }
    outcome(
        failures == 0,
        format!("{checked} functionals, {failures} pointwise failures"),
    )
}

fn c03_trace_formula() -> Outcome {
    let fam = block_family(4).unwrap();
    let mut bad = 0;
    let mut checked = 0;
    for mask in 0u32..(1 << 10) {
        if mask.count_ones() > 8 {
            continue;
        }
        let a: Vec<u32> = (1..=10).filter(|k| mask >> (k - 1) & 1 == 1).collect();
        checked += 1;
        if trace_count(&fam, &a).unwrap().count != a.len() + 1 {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("{checked} subsets, {bad} mismatches"))
}

/// Oracle: count subsets `F` of `[1..n]` with `|F| <= min F` by enumeration.
fn schreier_count(n: u32) -> usize {
    (0u64..1 << n)
        .filter(|&m| m == 0 || m.count_ones() <= m.trailing_zeros() + 1)
        .count()
}

fn c04_schreier_growth() -> Outcome {
    let mut pass = true;
    let mut details = Vec::new();
    for n in [4usize, 6, 8, 10, 12] {
        let fam = schreier(n).unwrap();
        let a: Vec<u32> = (1..=n as u32).collect();
        let count = trace_count(&fam, &a).unwrap().count;
        let bound = if n == 4 { 2 } else { 1usize << (n / 2 - 1) };
        pass &= count > bound && count == schreier_count(n as u32);
        details.push(format!("N={n}: {count} > {bound}"));
    }
    pass &= trace_count(&schreier(4).unwrap(), &[1, 2, 3, 4])
        .unwrap()
        .count
        == 8;
    outcome(pass, details.join(", "))
}

fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Oracle: `S` is shattered when every subset of `S` is some `F ∩ S`.
fn shattered(fam: &SetFamily, s: &[u32]) -> bool {
    let traces: BTreeSet<Vec<u32>> = fam
        .sets()
        .iter()
        .map(|f| f.iter().copied().filter(|k| s.contains(k)).collect())
        .collect();
    traces.len() == 1 << s.len()
}

fn c05_sauer_shelah() -> Outcome {
    let fam = schreier(10).unwrap();
    let mut triggered = 0;
    let mut failures = 0;
    let mut chains = 0;
    let mut worst_gap: f64 = 0.0;
    for mask in 1u32..(1 << 10) {
        let a: Vec<u32> = (1..=10).filter(|k| mask >> (k - 1) & 1 == 1).collect();
        let count = trace_count(&fam, &a).unwrap().count;
        let needed_p = (1..=4)
            .filter(|&p| count > (0..p).map(|j| binom(a.len(), j)).sum::<usize>())
            .max();
        let Some(p) = needed_p else { continue };
        triggered += 1;
        let report = vc_extract(&fam, &a, 1 << 20).unwrap();
        let s = &report.shattered.s;
        if s.len() < p || !shattered(&fam, s) {
            failures += 1;
            continue;
        }
        if report.chain.len() >= 2 {
            chains += 1;
            let cert = separation_value(&report.chain_points(10), AmbientNorm::Linf).unwrap();
            worst_gap = worst_gap.max((cert.theta - 1.0).abs());
            if (cert.theta - 1.0).abs() > 1e-8 {
                failures += 1;
            }
        }
    }
    outcome(
        failures == 0 && triggered > 0,
        format!("{triggered} triggering subsets, {chains} chains, {failures} failures, max |sep-1| = {worst_gap:.1e}"),
    )
}

fn c06_james_sb() -> Outcome {
    let mut failures = Vec::new();
    for n in 1..=8 {
        let pts = sb_points(n).unwrap();
        let search = find_functionals(&pts, 1.0, AmbientNorm::Linf).unwrap();
        let Some(fs) = search.functionals.clone() else {
            failures.push(format!("n={n}: no functionals"));
            continue;
        };
        let sys = search
            .into_system(1.0, AmbientNorm::Linf, pts.clone())
            .unwrap();
        if !verify_james_system(&sys, 1e-9).pass {
            failures.push(format!("n={n}: system rejected"));
        }
        if n < 2 {
            continue;
        }
        let cert = separation_value(&pts, AmbientNorm::Linf).unwrap();
        if (cert.theta - 1.0).abs() > 1e-8 {
            failures.push(format!("n={n}: separation {}", cert.theta));
        }
        for split in &cert.per_split {
            // The functional x*_{k+1} separates the prefix hull from the suffix hull.
            let f = &fs[split.k];
            let dual: f64 = f.coords().iter().map(|c| c.abs()).sum();
            let lo = pts[split.k..]
                .iter()
                .map(|x| f.dot(x))
                .fold(f64::INFINITY, f64::min);
            let hi = pts[..split.k]
                .iter()
                .map(|x| f.dot(x))
                .fold(f64::NEG_INFINITY, f64::max);
            if (lo - hi) / dual > split.value + 1e-8 {
                failures.push(format!(
                    "n={n}, k={}: functional bound exceeds hull distance",
                    split.k
                ));
            }
        }
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            "n = 1..8 certified, theta = 1".into()
        } else {
            failures.join("; ")
        },
    )
}

fn c07_tree_metric() -> Outcome {
    let mut bad = 0u64;
    let mut pairs = 0u64;
    for n in 0..=8 {
        let g = binary_tree(n).unwrap();
        for i in 0..g.len() {
            for j in 0..g.len() {
                let (s, t) = (&g.vertices[i], &g.vertices[j]);
                let common = s.bytes().zip(t.bytes()).take_while(|(a, b)| a == b).count();
                pairs += 1;
                if g.dist(i, j) != s.len() + t.len() - 2 * common {
                    bad += 1;
                }
            }
        }
    }
    outcome(
        bad == 0,
        format!("{pairs} ordered pairs over N = 0..8, {bad} mismatches"),
    )
}

fn c08_graph_recurrences() -> Outcome {
    let mut bad = Vec::new();
    for k in 0..=5u32 {
        let g = diamond(k as usize).unwrap();
        let (s, t) = g.endpoints().unwrap();
        let v = 2 + 2 * (4usize.pow(k) - 1) / 3;
        if g.edges.len() != 4usize.pow(k) || g.len() != v || g.dist(s, t) != 1 << k {
            bad.push(format!("diamond({k})"));
        }
    }
    for k in 0..=4u32 {
        let g = laakso(k as usize).unwrap();
        let (s, t) = g.endpoints().unwrap();
        if g.edges.len() != 6usize.pow(k) || g.dist(s, t) != 4usize.pow(k) {
            bad.push(format!("laakso({k})"));
        }
    }
    outcome(
        bad.is_empty(),
        if bad.is_empty() {
            "diamond k<=5, laakso k<=4".into()
        } else {
            bad.join(", ")
        },
    )
}

/// Oracle for the gauge of `AbsHull(SB(n))`: coefficients in the summing basis are consecutive differences.
fn sb_gauge(v: &[f64]) -> f64 {
    (0..v.len())
        .map(|m| (v[m] - v.get(m + 1).copied().unwrap_or(0.0)).abs())
        .sum()
}

fn c09_bourgain() -> Outcome {
    let mut pass = true;
    let mut details = Vec::new();
    for n in 1..=5usize {
        let sys = sb_james((1 << (n + 1)) - 1).unwrap();
        let e = bourgain_embedding(&sys, n).unwrap();
        let r = distortion_report(&e).unwrap();
        let g = &e.graph;
        let (mut lip, mut sep) = (0.0f64, f64::INFINITY);
        for i in 0..g.len() {
            for j in i + 1..g.len() {
                let d = g.dist(i, j) as f64;
                let diff: Vec<f64> = e.map[i]
                    .coords()
                    .iter()
                    .zip(e.map[j].coords())
                    .map(|(a, b)| a - b)
                    .collect();
                lip = lip.max(sb_gauge(&diff) / d);
                sep = sep.min(diff.iter().fold(0.0f64, |m, x| m.max(x.abs())) / d);
            }
        }
        let agree = (lip - r.lip_gauge).abs() < 1e-9 && (sep - r.sep_norm).abs() < 1e-9;
        pass &= agree && r.lip_gauge <= 1.0 + 1e-9 && r.sep_norm >= 0.5 - 1e-9;
        details.push(format!(
            "N={n}: lip={:.6} sep={:.6}",
            r.lip_gauge, r.sep_norm
        ));
    }
    outcome(pass, details.join(", "))
}

fn l2_delta(eps: f64) -> f64 {
    if eps >= 2.0 {
        1.0
    } else {
        1.0 - (1.0 - eps * eps / 4.0).sqrt()
    }
}

fn c10_fork_pruning() -> Outcome {
    let body = ConvexBody::unit_ball(AmbientNorm::L2);
    let e = orthonormal_tree(8, body.clone()).unwrap();
    let theta = distortion_report(&e).unwrap().sep_norm;
    let delta = DeltaEvaluator::closed_form(&body, AmbientNorm::L2, e.dim()).unwrap();
    let (_, trace) = kloeckner_iterate(&e, theta, &delta, 3).unwrap();
    let d = l2_delta(theta);
    let mut pass = trace.rounds.len() == 4 && (trace.rounds[0].delta - d).abs() < 1e-12;
    let mut steps = Vec::new();
    for w in trace.rounds.windows(2) {
        let drop = w[0].lip_gauge - w[1].lip_gauge;
        pass &= drop >= d - 1e-9;
        steps.push(format!("{:.6}", drop));
    }
    outcome(
        pass,
        format!(
            "theta={theta:.4} delta={d:.6}, per-round decrease [{}]",
            steps.join(", ")
        ),
    )
}

fn c11_modulus() -> Outcome {
    let body = ConvexBody::unit_ball(AmbientNorm::L2);
    let mut worst_excess = f64::NEG_INFINITY;
    let mut least_excess = f64::INFINITY;
    let mut below = 0;
    for k in 1..=20 {
        let eps = 0.1 * k as f64;
        let est = modulus(
            &body,
            AmbientNorm::L2,
            2,
            eps,
            ModulusMethod::SampledUpperBound {
                samples: 2000,
                seed: 11,
            },
        )
        .unwrap();
        let excess = est.value - l2_delta(eps);
        worst_excess = worst_excess.max(excess);
        least_excess = least_excess.min(excess);
        if excess < -1e-9 {
            below += 1;
        }
    }
    let grid_ok = worst_excess <= 1e-3 && below == 0;

    let delta = DeltaEvaluator::closed_form(&body, AmbientNorm::L2, 3).unwrap();
    let pts = fixtures::random_points_in_body(&body, 3, 20_000, 17).unwrap();
    let pairs: Vec<(Vector, Vector)> = pts
        .chunks(2)
        .map(|c| (c[0].clone(), c[1].clone()))
        .collect();
    let report = check_midpoint_inequality(&body, AmbientNorm::L2, &delta, &pairs, 1e-9).unwrap();
    let own_violations = pairs
        .iter()
        .filter(|(x, y)| {
            let mid: Vec<f64> = x
                .coords()
                .iter()
                .zip(y.coords())
                .map(|(a, b)| (a + b) / 2.0)
                .collect();
            let dist = AmbientNorm::L2.distance(x, y);
            AmbientNorm::L2.eval(&mid) > 1.0 - l2_delta(dist) + 1e-9
        })
        .count();
    let midpoint_ok = report.pass && report.max_violation <= 1e-9 && own_violations == 0;

    let s = std::f64::consts::FRAC_1_SQRT_2;
    let good = [
        Vector::new(vec![s, 0.0]).unwrap(),
        Vector::new(vec![0.0, s]).unwrap(),
    ];
    let bad = [Vector::basis(2, 0), Vector::basis(2, 1)];
    let d2 = DeltaEvaluator::closed_form(&body, AmbientNorm::L2, 2).unwrap();
    let g = check_sign_sum_bound(&body, AmbientNorm::L2, &d2, &good, 1e-9).unwrap();
    let b = check_sign_sum_bound(&body, AmbientNorm::L2, &d2, &bad, 1e-9).unwrap();
    let signsum_ok = g.status == SignSumStatus::Ok && b.status == SignSumStatus::HypothesisViolated;

    outcome(
        grid_ok && midpoint_ok && signsum_ok,
        format!(
            "sampled minus closed form in [{least_excess:.2e}, {worst_excess:.2e}] (below by > 1e-9: {below}); {} pairs, max violation {:.1e}; sign sums {:?}/{:?}",
            report.pairs, report.max_violation, g.status, b.status
        ),
    )
}

fn c12_shrink() -> Outcome {
    let body = ConvexBody::unit_ball(AmbientNorm::L2);
    let net = fixtures::l2ball_net(2, 64, 7).unwrap();
    let delta = DeltaEvaluator::closed_form(&body, AmbientNorm::L2, 2).unwrap();
    let report =
        check_derivation_shrink(&body, &delta, &net, 0.5, &DeriveOptions::exact()).unwrap();
    let mesh = (0..net.len())
        .map(|i| {
            (0..net.len())
                .filter(|&j| j != i)
                .map(|j| net.distance(i, j))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    let bound = 1.0 - l2_delta(0.5) + mesh + 1e-6;
    let worst = report
        .survivors
        .iter()
        .map(|&i| AmbientNorm::L2.eval(net.points()[i].coords()))
        .fold(0.0, f64::max);
    let pass = report.pass && worst <= bound && (report.mesh - mesh).abs() < 1e-12;
    outcome(
        pass,
        format!(
            "{} survivors, max gauge {worst:.6} <= {bound:.6} (mesh {mesh:.6})",
            report.survivors.len()
        ),
    )
}

/// Oracle: minimize `||A l - B m||_2` over both simplices by a coarse grid and pairwise weight transfers.
fn brute_hull_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let dim = a[0].len();
    let eval = |l: &[f64], m: &[f64]| -> f64 {
        (0..dim)
            .map(|k| {
                let x: f64 = a.iter().zip(l).map(|(p, w)| p[k] * w).sum::<f64>()
                    - b.iter().zip(m).map(|(p, w)| p[k] * w).sum::<f64>();
                x * x
            })
            .sum()
    };
    fn grid(n: usize, steps: usize) -> Vec<Vec<f64>> {
        if n == 1 {
            return vec![vec![steps as f64]];
        }
        let mut out = Vec::new();
        for k in 0..=steps {
            for mut rest in grid(n - 1, steps - k) {
                let mut w = vec![k as f64];
                w.append(&mut rest);
                out.push(w);
            }
        }
        out
    }
    let scale = |g: Vec<Vec<f64>>, steps: usize| -> Vec<Vec<f64>> {
        g.into_iter()
            .map(|w| w.into_iter().map(|x| x / steps as f64).collect())
            .collect()
    };
    const STEPS: usize = 8;
    let (ga, gb) = (
        scale(grid(a.len(), STEPS), STEPS),
        scale(grid(b.len(), STEPS), STEPS),
    );
    let (mut l, mut m, mut best) = (ga[0].clone(), gb[0].clone(), f64::INFINITY);
    for x in &ga {
        for y in &gb {
            let v = eval(x, y);
            if v < best {
                (l, m, best) = (x.clone(), y.clone(), v);
            }
        }
    }
    let mut h = 1.0 / STEPS as f64;
    while h > 1e-10 {
        let mut improved = false;
        for side in 0..2 {
            let n = if side == 0 { l.len() } else { m.len() };
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let (mut l2, mut m2) = (l.clone(), m.clone());
                    let w = if side == 0 { &mut l2 } else { &mut m2 };
                    let step = h.min(w[i]);
                    if step <= 0.0 {
                        continue;
                    }
                    w[i] -= step;
                    w[j] += step;
                    let v = eval(&l2, &m2);
                    if v < best - 1e-16 {
                        (l, m, best, improved) = (l2, m2, v, true);
                    }
                }
            }
        }
        if !improved {
            h /= 2.0;
        }
    }
    best.max(0.0).sqrt()
}

fn c13_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let dim = rng.random_range(1..=3);
        let (na, nb) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let mut cloud = |n: usize| -> Vec<Vec<f64>> {
            (0..n)
                .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect()
        };
        let (a, b) = (cloud(na), cloud(nb));
        let set = |p: &[Vec<f64>]| {
            PointSet::from_rows(
                AmbientNorm::L2,
                &p.iter().map(Vec::as_slice).collect::<Vec<_>>(),
            )
            .unwrap()
        };
        let got = hull_distance(&set(&a), &set(&b)).unwrap().value;
        worst = worst.max((got - brute_hull_distance(&a, &b)).abs());
    }
    let hull_ok = worst <= 1e-3;

    let mut gauge_err: f64 = 0.0;
    for k in 0..100 {
        let dim = 2 + k % 4;
        let signed = k % 2 == 0;
        let mut gens: Vec<Vector> = (0..dim).map(|i| Vector::basis(dim, i)).collect();
        if signed {
            gens.extend((0..dim).map(|i| Vector::basis(dim, i).scale(-1.0)));
        }
        let body =
            ConvexBody::abs_hull(PointSet::new(dim, AmbientNorm::L2, gens).unwrap()).unwrap();
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-5.0..5.0)).collect();
        let l1: f64 = v.iter().map(|x| x.abs()).sum();
        gauge_err = gauge_err.max((gauge(&body, &Vector::new(v).unwrap()).unwrap() - l1).abs());
    }
    let gauge_ok = gauge_err <= 1e-9;
    outcome(
        hull_ok && gauge_ok,
        format!("hull distance max error {worst:.2e} (50 instances); cross-polytope gauge max error {gauge_err:.2e} (100 vectors)"),
    )
}

fn cli(args: &[&str], dir: &Path) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_swclab"))
        .args(args)
        .current_dir(dir)
        .env_remove("SWCLAB_CLIQUE_CAP")
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stdout)
    );
    out.stdout
}

fn c14_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    cli(&["fixtures", "blocks(3)", "l2ball-net(2,64,7)", "sb(7)"], p);
    let fixture_bytes = std::fs::read(p.join("l2ball-net-2-64-7.json")).unwrap();
    cli(&["fixtures", "l2ball-net(2,64,7)"], p);
    let mut same = fixture_bytes == std::fs::read(p.join("l2ball-net-2-64-7.json")).unwrap();
    let commands: Vec<Vec<&str>> = vec![
        vec![
            "dz",
            "--eps",
            "0.5",
            "--input",
            "blocks3.json",
            "--mode",
            "exact",
        ],
        vec![
            "dz",
            "--eps",
            "0.5",
            "--input",
            "blocks3.json",
            "--mode",
            "sweep",
        ],
        vec![
            "modulus", "--ball", "l2", "--dim", "2", "--eps", "0.7", "--method", "sampled",
            "--seed", "5",
        ],
        vec![
            "uc-check", "midpoint", "--ball", "l2", "--dim", "3", "--pairs", "2000", "--seed", "9",
        ],
        vec![
            "uc-check",
            "shrink",
            "--ball",
            "l2",
            "--input",
            "l2ball-net-2-64-7.json",
            "--eps",
            "0.5",
        ],
        vec!["james", "search", "--input", "sb7.json", "--theta", "1"],
        vec!["embed", "bourgain", "--sb", "--n", "3"],
        vec![
            "family",
            "schreier",
            "--n",
            "10",
            "vcextract",
            "--A",
            "1,2,3,4,5,6,7,8,9,10",
        ],
        vec!["graph", "laakso", "--n", "2", "--full"],
    ];
    let mut index_ok = false;
    for args in &commands {
        let first = cli(args, p);
        let second = cli(args, p);
        same &= first == second;
        if args[..2] == ["dz", "--eps"] && args[6] == "exact" {
            let v: serde_json::Value = serde_json::from_slice(&first).unwrap();
            index_ok = v["result"]["index"] == 2;
        }
    }
    let jobs_one = cli(&["--jobs", "1", "embed", "bourgain", "--sb", "--n", "3"], p);
    let jobs_two = cli(&["--jobs", "2", "embed", "bourgain", "--sb", "--n", "3"], p);
    let strip = |b: &[u8]| -> serde_json::Value {
        let v: serde_json::Value = serde_json::from_slice(b).unwrap();
        v["result"].clone()
    };
    let jobs_ok = strip(&jobs_one) == strip(&jobs_two);
    outcome(
        same && index_ok && jobs_ok,
        format!(
            "{} commands run twice; identical: {same}; results independent of --jobs: {jobs_ok}",
            commands.len()
        ),
    )
}
