//! Distance between convex hulls of two finite sets.
//!
//! Polyhedral norms (`l1`, `linf`) are solved exactly as linear programs.
//! For `l2` the nearest point of the Minkowski difference `conv(A) - conv(B)`
//! to the origin is found with Wolfe's corral method; other `l_p` norms use
//! Frank-Wolfe with a dual lower bound. Iterative routes stop on a certified
//! gap `upper - lower <= gap`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::vector::dot;
use super::{AmbientNorm, PointSet, Vector};
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome, Relation};

const WOLFE_MAX_ITERS: usize = 20_000;
const FW_MAX_ITERS: usize = 20_000;

/// Result of a hull-distance computation, with the achieving combinations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullDistance {
    /// `||a - b||` for the witness pair.
    pub value: f64,
    /// Certified lower bound on the true distance.
    pub lower_bound: f64,
    pub a_weights: Vec<f64>,
    pub b_weights: Vec<f64>,
    pub witness: (Vector, Vector),
}

/// `inf { ||a - b|| : a in conv(A), b in conv(B) }`.
pub fn hull_distance(a: &PointSet, b: &PointSet) -> Result<HullDistance> {
    a.check_compatible(b)?;
    hull_distance_points(a.points(), b.points(), a.norm(), 1e-8)
}

/// Same as [`hull_distance`] on raw (possibly repeated) point lists.
pub fn hull_distance_points(
    a: &[Vector],
    b: &[Vector],
    norm: AmbientNorm,
    gap: f64,
) -> Result<HullDistance> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("hull distance needs two nonempty sets"));
    }
    let dim = a[0].dim();
    for p in a.iter().chain(b) {
        p.check_dim(dim)?;
    }
    let (aw, bw, lower) = match norm {
        AmbientNorm::L1 | AmbientNorm::Linf => polyhedral(a, b, norm)?,
        AmbientNorm::L2 => wolfe(a, b, gap)?,
        AmbientNorm::Lp(p) => frank_wolfe(a, b, p, gap)?,
    };
    let pa: Vec<&Vector> = a.iter().collect();
    let pb: Vec<&Vector> = b.iter().collect();
    let wa = Vector::combination(&pa, &aw);
    let wb = Vector::combination(&pb, &bw);
    let value = norm.distance(&wa, &wb);
    Ok(HullDistance {
        value,
        lower_bound: lower.min(value),
        a_weights: aw,
        b_weights: bw,
        witness: (wa, wb),
    })
}

type Solved = (Vec<f64>, Vec<f64>, f64);

fn polyhedral(a: &[Vector], b: &[Vector], norm: AmbientNorm) -> Result<Solved> {
    let (na, nb, d) = (a.len(), b.len(), a[0].dim());
    // Variables: lambda (na), mu (nb), then t (linf) or u_1..u_d (l1).
    let extra = if norm == AmbientNorm::Linf { 1 } else { d };
    let nv = na + nb + extra;
    let mut obj = vec![0.0; nv];
    for o in &mut obj[na + nb..] {
        *o = 1.0;
    }
    let mut lp = LinearProgram::minimize(obj);
    let mut sum_a = vec![0.0; nv];
    sum_a[..na].fill(1.0);
    lp.add(sum_a, Relation::Eq, 1.0);
    let mut sum_b = vec![0.0; nv];
    sum_b[na..na + nb].fill(1.0);
    lp.add(sum_b, Relation::Eq, 1.0);
    for k in 0..d {
        let mut row = vec![0.0; nv];
        for (i, p) in a.iter().enumerate() {
            row[i] = p[k];
        }
        for (j, q) in b.iter().enumerate() {
            row[na + j] = -q[k];
        }
        let bound_col = if norm == AmbientNorm::Linf {
            na + nb
        } else {
            na + nb + k
        };
        let mut pos = row.clone();
        pos[bound_col] = -1.0;
        lp.add(pos, Relation::Le, 0.0);
        let mut neg: Vec<f64> = row.iter().map(|x| -x).collect();
        neg[bound_col] = -1.0;
        lp.add(neg, Relation::Le, 0.0);
    }
    match lp.solve() {
        LpOutcome::Optimal(s) => {
            let aw = normalize_weights(&s.x[..na]);
            let bw = normalize_weights(&s.x[na..na + nb]);
            Ok((aw, bw, s.objective.max(0.0)))
        }
        other => Err(Error::Verification(format!(
            "hull-distance LP returned {other:?}"
        ))),
    }
}

fn normalize_weights(w: &[f64]) -> Vec<f64> {
    let clipped: Vec<f64> = w.iter().map(|x| x.max(0.0)).collect();
    let s: f64 = clipped.iter().sum();
    clipped.iter().map(|x| x / s).collect()
}

/// Corral element: a pair `(i, j)` standing for `a_i - b_j`.
type Pair = (usize, usize);

fn diff(a: &[Vector], b: &[Vector], (i, j): Pair) -> Vec<f64> {
    a[i].coords()
        .iter()
        .zip(b[j].coords())
        .map(|(x, y)| x - y)
        .collect()
}

fn wolfe(a: &[Vector], b: &[Vector], gap: f64) -> Result<Solved> {
    let d = a[0].dim();
    // Start from the closest vertex pair.
    let mut start = (0, 0);
    let mut best = f64::INFINITY;
    for i in 0..a.len() {
        for j in 0..b.len() {
            let v = diff(a, b, (i, j));
            let n = dot(&v, &v);
            if n < best {
                best = n;
                start = (i, j);
            }
        }
    }
    let mut corral: Vec<Pair> = vec![start];
    let mut weights: Vec<f64> = vec![1.0];
    let mut lower = 0.0_f64;
    let mut upper;

    let point = |corral: &[Pair], weights: &[f64]| -> Vec<f64> {
        let mut x = vec![0.0; d];
        for (&pr, &w) in corral.iter().zip(weights) {
            for (xk, v) in x.iter_mut().zip(diff(a, b, pr)) {
                *xk += w * v;
            }
        }
        x
    };

    for _ in 0..WOLFE_MAX_ITERS {
        let x = point(&corral, &weights);
        let xx = dot(&x, &x);
        upper = xx.sqrt();
        if upper <= gap {
            return Ok(collect_weights(a.len(), b.len(), &corral, &weights, 0.0));
        }
        // Support point of the Minkowski difference in direction -x.
        let (ia, va) = argmin_dot(a, &x);
        let (jb, vb) = argmax_dot(b, &x);
        let support = va - vb;
        lower = lower.max(support / upper);
        if upper - lower <= gap {
            return Ok(collect_weights(a.len(), b.len(), &corral, &weights, lower));
        }
        let cand = (ia, jb);
        if corral.contains(&cand) || xx - support <= 1e-15 * (1.0 + xx) {
            // No further progress is possible in floating point.
            break;
        }
        corral.push(cand);
        weights.push(0.0);

        loop {
            let alpha = affine_minimizer(a, b, &corral);
            if alpha.iter().all(|&al| al > 1e-14) {
                weights = alpha;
                break;
            }
            let mut theta = 1.0_f64;
            for (w, al) in weights.iter().zip(&alpha) {
                if *al <= 1e-14 && w - al > 0.0 {
                    theta = theta.min(w / (w - al));
                }
            }
            for (w, al) in weights.iter_mut().zip(&alpha) {
                *w = theta * al + (1.0 - theta) * *w;
            }
            let mut k = 0;
            let mut removed = false;
            while k < corral.len() {
                if weights[k] <= 1e-14 {
                    corral.remove(k);
                    weights.remove(k);
                    removed = true;
                } else {
                    k += 1;
                }
            }
            if !removed {
                // Guard against a stuck minor cycle: drop the smallest weight.
                let (kmin, _) = weights
                    .iter()
                    .enumerate()
                    .min_by(|x, y| x.1.total_cmp(y.1))
                    .expect("nonempty corral");
                corral.remove(kmin);
                weights.remove(kmin);
            }
            let s: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= s);
            if corral.len() == 1 {
                weights = vec![1.0];
                break;
            }
        }
    }
    let x = point(&corral, &weights);
    upper = dot(&x, &x).sqrt();
    if upper - lower <= gap {
        Ok(collect_weights(a.len(), b.len(), &corral, &weights, lower))
    } else {
        Err(Error::NonConvergence {
            iterations: WOLFE_MAX_ITERS,
            lower,
            upper,
        })
    }
}

/// Minimum-norm point of the affine hull of the corral, as affine weights.
fn affine_minimizer(a: &[Vector], b: &[Vector], corral: &[Pair]) -> Vec<f64> {
    let k = corral.len();
    if k == 1 {
        return vec![1.0];
    }
    let p0 = diff(a, b, corral[0]);
    let d = p0.len();
    let q = DMatrix::from_fn(d, k - 1, |r, c| {
        let pc = diff(a, b, corral[c + 1]);
        pc[r] - p0[r]
    });
    let rhs = -DVector::from_column_slice(&p0);
    let beta = q
        .svd(true, true)
        .solve(&rhs, 1e-13)
        .unwrap_or_else(|_| DVector::zeros(k - 1));
    let mut alpha = Vec::with_capacity(k);
    alpha.push(1.0 - beta.sum());
    alpha.extend(beta.iter());
    alpha
}

fn argmin_dot(pts: &[Vector], x: &[f64]) -> (usize, f64) {
    pts.iter()
        .enumerate()
        .map(|(i, p)| (i, dot(p.coords(), x)))
        .min_by(|u, v| u.1.total_cmp(&v.1))
        .expect("nonempty")
}

fn argmax_dot(pts: &[Vector], x: &[f64]) -> (usize, f64) {
    pts.iter()
        .enumerate()
        .map(|(i, p)| (i, dot(p.coords(), x)))
        .max_by(|u, v| u.1.total_cmp(&v.1))
        .expect("nonempty")
}

fn collect_weights(na: usize, nb: usize, corral: &[Pair], weights: &[f64], lower: f64) -> Solved {
    let mut aw = vec![0.0; na];
    let mut bw = vec![0.0; nb];
    for (&(i, j), &w) in corral.iter().zip(weights) {
        aw[i] += w;
        bw[j] += w;
    }
    (
        normalize_weights(&aw),
        normalize_weights(&bw),
        lower.max(0.0),
    )
}

/// Away-step Frank-Wolfe on `||a - b||_p` over the pairs `a_i - b_j`.
fn frank_wolfe(a: &[Vector], b: &[Vector], p: f64, gap: f64) -> Result<Solved> {
    let norm = AmbientNorm::Lp(p);
    let q = p / (p - 1.0);
    let dual = AmbientNorm::Lp(q);
    let mut active: Vec<Pair> = vec![(0, 0)];
    let mut weights: Vec<f64> = vec![1.0];
    let mut z: Vec<f64> = diff(a, b, (0, 0));
    let mut lower = 0.0_f64;
    let mut upper = norm.eval(&z);
    for _ in 0..FW_MAX_ITERS {
        upper = norm.eval(&z);
        if upper <= gap {
            return Ok(collect_weights(a.len(), b.len(), &active, &weights, 0.0));
        }
        // Gradient of the p-norm at z; it has unit dual norm.
        let g: Vec<f64> = z
            .iter()
            .map(|x| x.signum() * (x.abs() / upper).powf(p - 1.0))
            .collect();
        lower = lower.max(dual_bound(a, b, &g, dual));
        // Zeroing near-zero coordinates gives sharper certificates near degenerate optima.
        let zmax = z.iter().map(|x| x.abs()).fold(0.0, f64::max);
        for tau in [1e-3, 1e-5, 1e-7] {
            let cleaned: Vec<f64> = z
                .iter()
                .zip(&g)
                .map(|(x, gk)| if x.abs() < tau * zmax { 0.0 } else { *gk })
                .collect();
            lower = lower.max(dual_bound(a, b, &cleaned, dual));
        }
        if upper - lower <= gap {
            return Ok(collect_weights(a.len(), b.len(), &active, &weights, lower));
        }

        let (ia, _) = argmin_dot(a, &g);
        let (jb, _) = argmax_dot(b, &g);
        let fw = diff(a, b, (ia, jb));
        let (k_away, away_val) = active
            .iter()
            .enumerate()
            .map(|(k, &pr)| (k, dot(&diff(a, b, pr), &g)))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("nonempty active set");
        let zg = dot(&z, &g);
        let away_gain = away_val - zg;
        let fw_dir: Vec<f64> = fw.iter().zip(&z).map(|(s, x)| s - x).collect();
        let line = |dir: &[f64], gamma_max: f64| {
            let at = |t: f64| -> Vec<f64> { z.iter().zip(dir).map(|(x, dx)| x + t * dx).collect() };
            // Bisection on the sign of the directional derivative resolves the step to machine precision.
            let slope = |t: f64| {
                let y = at(t);
                y.iter()
                    .zip(dir)
                    .map(|(yk, dk)| yk.signum() * yk.abs().powf(p - 1.0) * dk)
                    .sum::<f64>()
            };
            if slope(0.0) >= 0.0 {
                return 0.0;
            }
            if slope(gamma_max) <= 0.0 {
                return gamma_max;
            }
            let (mut lo, mut hi) = (0.0_f64, gamma_max);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if slope(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            if norm.eval(&at(lo)) < upper {
                lo
            } else {
                0.0
            }
        };
        // Pairwise step: move weight from the away atom to the Frank-Wolfe atom.
        let mut step = None;
        if away_gain > 0.0 && active.len() > 1 && active[k_away] != (ia, jb) {
            let v = diff(a, b, active[k_away]);
            let dir: Vec<f64> = fw.iter().zip(&v).map(|(s, vk)| s - vk).collect();
            let gamma = line(&dir, weights[k_away]);
            if gamma > 0.0 {
                step = Some((gamma, false));
            }
        }
        if step.is_none() {
            let gamma = line(&fw_dir, 1.0);
            if gamma > 0.0 {
                step = Some((gamma, true));
            }
        }
        let Some((gamma, is_fw)) = step else {
            break;
        };
        if is_fw {
            weights.iter_mut().for_each(|w| *w *= 1.0 - gamma);
        } else {
            weights[k_away] -= gamma;
        }
        match active.iter().position(|&pr| pr == (ia, jb)) {
            Some(k) => weights[k] += gamma,
            None => {
                active.push((ia, jb));
                weights.push(gamma);
            }
        }
        let mut k = 0;
        while k < active.len() {
            if weights[k] <= 1e-15 {
                active.remove(k);
                weights.remove(k);
            } else {
                k += 1;
            }
        }
        z = combine(a, b, &active, &weights);
    }
    if upper - lower <= gap {
        return Ok(collect_weights(a.len(), b.len(), &active, &weights, lower));
    }
    Err(Error::NonConvergence {
        iterations: FW_MAX_ITERS,
        lower,
        upper,
    })
}

fn combine(a: &[Vector], b: &[Vector], active: &[Pair], weights: &[f64]) -> Vec<f64> {
    let mut z = vec![0.0; a[0].dim()];
    for (&pr, &w) in active.iter().zip(weights) {
        for (zk, v) in z.iter_mut().zip(diff(a, b, pr)) {
            *zk += w * v;
        }
    }
    z
}

/// `min_a <g,a> - max_b <g,b>` for `g` rescaled to unit dual norm.
fn dual_bound(a: &[Vector], b: &[Vector], g: &[f64], dual: AmbientNorm) -> f64 {
    let n = dual.eval(g);
    if n == 0.0 {
        return 0.0;
    }
    let (_, va) = argmin_dot(a, g);
    let (_, vb) = argmax_dot(b, g);
    (va - vb) / n
}
