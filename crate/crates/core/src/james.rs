//! James-type certificates on concrete finite data: prefix/suffix hull
//! separation, functional systems with the 0/θ pattern, cube maps, dyadic
//! trees by averaging, and separation inside finite-codimensional subspaces.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{hull_distance_points, AmbientNorm, PointSet, Vector};
use crate::lp::{LinearProgram, LpOutcome, Relation};

/// Gap target used for every hull distance computed here.
const HULL_GAP: f64 = 1e-8;
/// Tolerance on the dual-norm constraint in [`find_functionals`].
const DUAL_TOL: f64 = 1e-9;
/// Residual allowed on the pattern equations for the Euclidean solve.
const L2_RESIDUAL: f64 = 1e-6;
/// Largest cube dimension accepted by [`verify_cube`].
pub const MAX_CUBE_DIM: usize = 12;

fn check_dims(points: &[Vector]) -> Result<usize> {
    let dim = points
        .first()
        .map(Vector::dim)
        .ok_or_else(|| Error::invalid("no points"))?;
    for p in points {
        p.check_dim(dim)?;
    }
    Ok(dim)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitValue {
    /// Prefix length: the split is `x_1..x_k | x_{k+1}..x_n`.
    pub k: usize,
    pub value: f64,
    pub lower_bound: f64,
    pub witness: (Vector, Vector),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationCertificate {
    pub theta: f64,
    pub norm: AmbientNorm,
    pub points: Vec<Vector>,
    pub per_split: Vec<SplitValue>,
}

/// `min_k dist(conv{x_j : j <= k}, conv{x_j : j > k})` with every split recorded.
pub fn separation_value(points: &[Vector], norm: AmbientNorm) -> Result<SeparationCertificate> {
    if points.len() < 2 {
        return Err(Error::InsufficientPoints {
            found: points.len(),
            needed: 2,
        });
    }
    check_dims(points)?;
    let per_split: Vec<SplitValue> = (1..points.len())
        .into_par_iter()
        .map(|k| {
            let h = hull_distance_points(&points[..k], &points[k..], norm, HULL_GAP)?;
            Ok(SplitValue {
                k,
                value: h.value,
                lower_bound: h.lower_bound,
                witness: h.witness,
            })
        })
        .collect::<Result<_>>()?;
    let theta = per_split
        .iter()
        .map(|s| s.value)
        .fold(f64::INFINITY, f64::min);
    Ok(SeparationCertificate {
        theta,
        norm,
        points: points.to_vec(),
        per_split,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JamesSystem {
    pub theta: f64,
    pub norm: AmbientNorm,
    pub points: Vec<Vector>,
    /// Coefficients of `x*_1..x*_n` against the standard pairing.
    pub functionals: Vec<Vector>,
    #[serde(default = "one")]
    pub dual_norm_bound: f64,
}

fn one() -> f64 {
    1.0
}

impl JamesSystem {
    pub fn new(
        theta: f64,
        norm: AmbientNorm,
        points: Vec<Vector>,
        functionals: Vec<Vector>,
    ) -> Result<Self> {
        if points.is_empty() || points.len() != functionals.len() {
            return Err(Error::invalid(format!(
                "{} points and {} functionals",
                points.len(),
                functionals.len()
            )));
        }
        if !theta.is_finite() {
            return Err(Error::invalid("theta must be finite"));
        }
        let dim = check_dims(&points)?;
        for f in &functionals {
            f.check_dim(dim)?;
        }
        Ok(JamesSystem {
            theta,
            norm,
            points,
            functionals,
            dual_norm_bound: 1.0,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Target value of `x*_n(x_k)` (both 1-based).
fn pattern(theta: f64, n: usize, k: usize) -> f64 {
    if n > k {
        0.0
    } else {
        theta
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JamesReport {
    pub pass: bool,
    pub tol: f64,
    pub max_pattern_residual: f64,
    /// `(n, k)`, 1-based, of the worst pattern entry.
    pub worst_entry: Option<(usize, usize)>,
    pub max_dual_norm_excess: f64,
    pub worst_functional: Option<usize>,
    /// `theta == 0`: the pattern carries no information.
    pub degenerate: bool,
}

pub fn verify_james_system(sys: &JamesSystem, tol: f64) -> JamesReport {
    let dual = sys.norm.dual();
    let mut residual = 0.0_f64;
    let mut worst_entry = None;
    for (n, f) in sys.functionals.iter().enumerate() {
        for (k, x) in sys.points.iter().enumerate() {
            let r = (f.dot(x) - pattern(sys.theta, n + 1, k + 1)).abs();
            if r > residual || worst_entry.is_none() {
                residual = r.max(residual);
                worst_entry = Some((n + 1, k + 1));
            }
        }
    }
    let mut excess = 0.0_f64;
    let mut worst_functional = None;
    for (n, f) in sys.functionals.iter().enumerate() {
        let e = (dual.eval(f.coords()) - sys.dual_norm_bound).max(0.0);
        if e > excess || worst_functional.is_none() {
            excess = e.max(excess);
            worst_functional = Some(n + 1);
        }
    }
    JamesReport {
        pass: residual <= tol && excess <= tol,
        tol,
        max_pattern_residual: residual,
        worst_entry,
        max_dual_norm_excess: excess,
        worst_functional,
        degenerate: sys.theta == 0.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalSearch {
    pub functionals: Option<Vec<Vector>>,
    /// Indices `n` (1-based) with no functional of dual norm `<= 1`.
    pub failed: Vec<usize>,
    /// Smallest dual norm meeting the pattern, per index; absent when the pattern itself is infeasible.
    pub dual_norms: Vec<Option<f64>>,
}

impl FunctionalSearch {
    pub fn into_system(
        self,
        theta: f64,
        norm: AmbientNorm,
        points: Vec<Vector>,
    ) -> Result<JamesSystem> {
        match self.functionals {
            Some(f) => JamesSystem::new(theta, norm, points, f),
            None => Err(Error::Infeasible(format!(
                "no functional of dual norm <= 1 for indices {:?}",
                self.failed
            ))),
        }
    }
}

/// For each `n`, a functional `c` with `<c, x_k> = 0` (k < n), `= theta` (k >= n), and dual norm `<= 1`.
///
/// Each subproblem minimizes the dual norm over the affine pattern set: an LP
/// for `l1`/`linf` ambients, the minimum-norm least-squares solution for `l2`.
pub fn find_functionals(
    points: &[Vector],
    theta: f64,
    norm: AmbientNorm,
) -> Result<FunctionalSearch> {
    let dim = check_dims(points)?;
    if !theta.is_finite() {
        return Err(Error::invalid("theta must be finite"));
    }
    if matches!(norm, AmbientNorm::Lp(_)) {
        return Err(Error::Unsupported(
            "functional search needs an l1, l2 or linf ambient norm".into(),
        ));
    }
    let solved: Vec<Option<Vec<f64>>> = (1..=points.len())
        .into_par_iter()
        .map(|n| {
            let rhs: Vec<f64> = (1..=points.len()).map(|k| pattern(theta, n, k)).collect();
            match norm {
                AmbientNorm::L2 => min_l2_solution(points, &rhs, dim),
                _ => min_polyhedral_solution(points, &rhs, dim, norm),
            }
        })
        .collect();
    let dual = norm.dual();
    let mut functionals = Vec::new();
    let mut dual_norms = Vec::new();
    let mut failed = Vec::new();
    for (i, c) in solved.into_iter().enumerate() {
        match c {
            Some(c) if dual.eval(&c) <= 1.0 + DUAL_TOL => {
                dual_norms.push(Some(dual.eval(&c)));
                functionals.push(Vector::new(c)?);
            }
            other => {
                dual_norms.push(other.map(|c| dual.eval(&c)));
                failed.push(i + 1);
            }
        }
    }
    Ok(FunctionalSearch {
        functionals: failed.is_empty().then_some(functionals),
        failed,
        dual_norms,
    })
}

/// `min ||c||_dual` s.t. `<c, x_k> = rhs_k`, with `c = u - w`, `u, w >= 0`.
fn min_polyhedral_solution(
    points: &[Vector],
    rhs: &[f64],
    dim: usize,
    norm: AmbientNorm,
) -> Option<Vec<f64>> {
    // linf ambient: dual l1, objective sum(u + w).
    // l1 ambient: dual linf, extra variable t with u_i + w_i <= t, objective t.
    let linf_ambient = norm == AmbientNorm::Linf;
    let nv = 2 * dim + usize::from(!linf_ambient);
    let mut obj = vec![0.0; nv];
    if linf_ambient {
        obj.fill(1.0);
    } else {
        obj[2 * dim] = 1.0;
    }
    let mut lp = LinearProgram::minimize(obj);
    for (x, &b) in points.iter().zip(rhs) {
        let mut row = vec![0.0; nv];
        for i in 0..dim {
            row[i] = x[i];
            row[dim + i] = -x[i];
        }
        lp.add(row, Relation::Eq, b);
    }
    if !linf_ambient {
        for i in 0..dim {
            lp.add_sparse(
                &[(i, 1.0), (dim + i, 1.0), (2 * dim, -1.0)],
                Relation::Le,
                0.0,
            );
        }
    }
    match lp.solve() {
        LpOutcome::Optimal(s) => Some((0..dim).map(|i| s.x[i] - s.x[dim + i]).collect()),
        _ => None,
    }
}

/// Minimum Euclidean-norm solution of the pattern system, if the system is consistent.
fn min_l2_solution(points: &[Vector], rhs: &[f64], dim: usize) -> Option<Vec<f64>> {
    let a = DMatrix::from_fn(points.len(), dim, |k, i| points[k][i]);
    let b = DVector::from_column_slice(rhs);
    let svd = a.clone().svd(true, true);
    let eps = 1e-12 * svd.singular_values.max().max(1.0);
    let c = svd.solve(&b, eps).ok()?;
    let residual = (&a * &c - &b).amax();
    (residual <= L2_RESIDUAL * (1.0 + b.amax())).then(|| c.iter().copied().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeSplit {
    /// Fixed leading bits `a_1..a_{k-1}`.
    pub prefix: Vec<u8>,
    pub k: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeCertificate {
    pub n: usize,
    pub theta: f64,
    pub certified: bool,
    pub splits_checked: usize,
    /// Split with the smallest hull distance, absent when there are no splits.
    pub worst_split: Option<CubeSplit>,
}

/// Checks `dist(conv f(A_0), conv f(A_1)) >= theta` over every split with `1 < k <= n`.
///
/// `f[i]` is the image of the bit string whose binary value is `i`, with
/// `a_1` the most significant bit.
pub fn verify_cube(f: &[Vector], theta: f64, norm: AmbientNorm) -> Result<CubeCertificate> {
    if f.is_empty() || !f.len().is_power_of_two() {
        return Err(Error::invalid(format!(
            "cube map needs 2^n images, got {}",
            f.len()
        )));
    }
    let n = f.len().trailing_zeros() as usize;
    if n > MAX_CUBE_DIM {
        return Err(Error::BudgetExceeded {
            what: format!("cube of dimension {n}"),
            cap: MAX_CUBE_DIM as u64,
        });
    }
    check_dims(f)?;
    let mut jobs = Vec::new();
    for k in 2..=n {
        for prefix in 0..1usize << (k - 1) {
            jobs.push((k, prefix));
        }
    }
    let splits: Vec<CubeSplit> = jobs
        .par_iter()
        .map(|&(k, prefix)| {
            let tail = n - k;
            let base = prefix << (tail + 1);
            let a0: Vec<Vector> = (0..1usize << tail).map(|r| f[base | r].clone()).collect();
            let a1: Vec<Vector> = (0..1usize << tail)
                .map(|r| f[base | 1 << tail | r].clone())
                .collect();
            let h = hull_distance_points(&a0, &a1, norm, HULL_GAP)?;
            let bits = (0..k - 1)
                .map(|j| (prefix >> (k - 2 - j) & 1) as u8)
                .collect();
            Ok(CubeSplit {
                prefix: bits,
                k,
                distance: h.value,
            })
        })
        .collect::<Result<_>>()?;
    let worst_split = splits
        .iter()
        .min_by(|a, b| a.distance.total_cmp(&b.distance))
        .cloned();
    let certified = splits.iter().all(|s| s.distance >= theta - HULL_GAP);
    Ok(CubeCertificate {
        n,
        theta,
        certified,
        splits_checked: splits.len(),
        worst_split,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNodePoint {
    pub bits: Vec<u8>,
    pub point: Vector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicTree {
    pub height: usize,
    pub norm: AmbientNorm,
    /// Nodes in breadth-first order: node `s` sits at `2^|s| - 1 + value(s)`.
    pub nodes: Vec<TreeNodePoint>,
    /// `min ||x_{s0} - x_{s1}||` over internal nodes.
    pub sibling_separation: Option<f64>,
    /// `min ||x_s - x_{si}||` over internal nodes and children.
    pub level_separation: Option<f64>,
    /// `max ||x_s - (x_{s0} + x_{s1}) / 2||_inf` over internal nodes.
    pub midpoint_residual: f64,
}

impl DyadicTree {
    pub fn node(&self, bits: &[u8]) -> &Vector {
        let idx = bits.iter().fold(0usize, |v, &b| 2 * v + b as usize);
        &self.nodes[(1usize << bits.len()) - 1 + idx].point
    }
}

/// Midpoint tree whose leaves are the given `2^n` points in binary order.
pub fn tree_from_points(points: &[Vector], norm: AmbientNorm) -> Result<DyadicTree> {
    if points.is_empty() || !points.len().is_power_of_two() {
        return Err(Error::invalid(format!(
            "tree needs 2^n points, got {}",
            points.len()
        )));
    }
    check_dims(points)?;
    let height = points.len().trailing_zeros() as usize;
    // levels[j] holds the 2^j nodes of depth j.
    let mut levels: Vec<Vec<Vector>> = vec![points.to_vec()];
    for _ in 0..height {
        let below = levels.last().expect("nonempty");
        let up = below
            .chunks(2)
            .map(|pair| Vector::combination(&[&pair[0], &pair[1]], &[0.5, 0.5]))
            .collect();
        levels.push(up);
    }
    levels.reverse();

    let mut sibling: Option<f64> = None;
    let mut level: Option<f64> = None;
    let mut residual = 0.0_f64;
    for depth in 0..height {
        for (i, x) in levels[depth].iter().enumerate() {
            let (c0, c1) = (&levels[depth + 1][2 * i], &levels[depth + 1][2 * i + 1]);
            let s = norm.distance(c0, c1);
            sibling = Some(sibling.map_or(s, |v| v.min(s)));
            let l = norm.distance(x, c0).min(norm.distance(x, c1));
            level = Some(level.map_or(l, |v| v.min(l)));
            let mid = Vector::combination(&[c0, c1], &[0.5, 0.5]);
            residual = residual.max(x.sup_distance(&mid));
        }
    }
    let nodes = levels
        .into_iter()
        .enumerate()
        .flat_map(|(depth, row)| {
            row.into_iter()
                .enumerate()
                .map(move |(i, point)| TreeNodePoint {
                    bits: (0..depth)
                        .map(|j| (i >> (depth - 1 - j) & 1) as u8)
                        .collect(),
                    point,
                })
        })
        .collect();
    Ok(DyadicTree {
        height,
        norm,
        nodes,
        sibling_separation: sibling,
        level_separation: level,
        midpoint_residual: residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceCertificate {
    /// Indices of the points lying in the subspace.
    pub kept: Vec<usize>,
    pub subset_size: usize,
    pub certificate: SeparationCertificate,
}

/// [`separation_value`] on the points with `|<y*, x>| <= tol` for every constraint `y*`.
pub fn restrict_and_separate(
    points: &PointSet,
    constraints: &[Vector],
    tol: f64,
) -> Result<SubspaceCertificate> {
    for c in constraints {
        c.check_dim(points.dim())?;
    }
    let kept: Vec<usize> = points
        .points()
        .iter()
        .enumerate()
        .filter(|(_, x)| constraints.iter().all(|c| c.dot(x).abs() <= tol))
        .map(|(i, _)| i)
        .collect();
    if kept.len() < 2 {
        return Err(Error::InsufficientPoints {
            found: kept.len(),
            needed: 2,
        });
    }
    let subset: Vec<Vector> = kept.iter().map(|&i| points.points()[i].clone()).collect();
    let certificate = separation_value(&subset, points.norm())?;
    Ok(SubspaceCertificate {
        subset_size: kept.len(),
        kept,
        certificate,
    })
}
