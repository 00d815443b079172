//! Moduli of convexity of concrete bodies and numerical checks of the
//! midpoint inequality, the sign-sum bound and the derivation shrink.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dentability::{derive_once, DeriveOptions};
use crate::error::{Error, Result};
use crate::geometry::{AmbientNorm, ConvexBody, PointSet, PreparedGauge, Vector};

/// Coordinate-descent sweeps applied to the best sampled pairs.
pub const REFINE_STEPS: usize = 200;
/// Number of best samples that get refined.
const REFINE_CANDIDATES: usize = 5;
/// Tolerance for "inside the body".
const INSIDE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModulusMethod {
    ClosedForm,
    /// An upper bound on the infimum, from seeded boundary-pair sampling.
    SampledUpperBound {
        samples: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusEstimate {
    pub body: ConvexBody,
    pub ambient: AmbientNorm,
    pub dim: usize,
    pub eps: f64,
    pub value: f64,
    pub method: ModulusMethod,
}

/// Known moduli, all of the form `g(eps * scale)` and clamped to 1 past the diameter.
#[derive(Debug, Clone, Copy, PartialEq)]
enum ClosedForm {
    /// `1 - (1 - (t/2)^p)^(1/p)`, `p >= 2` (p = 2 is the Euclidean ball).
    Power { p: f64, scale: f64 },
    /// Bodies with a flat face through every direction: `0` up to the diameter.
    Flat { scale: f64 },
    /// One-dimensional bodies: `t / 2`.
    Segment { scale: f64 },
}

impl ClosedForm {
    fn find(body: &ConvexBody, ambient: AmbientNorm, dim: usize) -> Result<Self> {
        let unsupported = || {
            Error::Unsupported(format!(
                "no closed-form modulus for this body under the {ambient} norm"
            ))
        };
        match body {
            ConvexBody::LpBall { norm, radius } => {
                if *norm != ambient {
                    return Err(unsupported());
                }
                let scale = 1.0 / radius;
                if dim == 1 {
                    return Ok(ClosedForm::Segment { scale });
                }
                match norm {
                    AmbientNorm::L1 | AmbientNorm::Linf => Ok(ClosedForm::Flat { scale }),
                    AmbientNorm::L2 => Ok(ClosedForm::Power { p: 2.0, scale }),
                    AmbientNorm::Lp(p) if *p >= 2.0 => Ok(ClosedForm::Power { p: *p, scale }),
                    AmbientNorm::Lp(_) => Err(unsupported()),
                }
            }
            ConvexBody::Ellipsoid { .. } if ambient == AmbientNorm::L2 => {
                let scale = body.ellipsoid_min_eigenvalue().expect("ellipsoid").sqrt();
                Ok(if dim == 1 {
                    ClosedForm::Segment { scale }
                } else {
                    ClosedForm::Power { p: 2.0, scale }
                })
            }
            _ => Err(unsupported()),
        }
    }

    fn eval(&self, eps: f64) -> f64 {
        let t = match *self {
            ClosedForm::Power { scale, .. }
            | ClosedForm::Flat { scale }
            | ClosedForm::Segment { scale } => eps * scale,
        };
        if t > 2.0 {
            return 1.0;
        }
        let t = t.max(0.0);
        match *self {
            ClosedForm::Power { p: 2.0, .. } => 1.0 - (1.0 - t * t / 4.0).max(0.0).sqrt(),
            ClosedForm::Power { p, .. } => 1.0 - (1.0 - (t / 2.0).powf(p)).max(0.0).powf(1.0 / p),
            ClosedForm::Flat { .. } => 0.0,
            ClosedForm::Segment { .. } => t / 2.0,
        }
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::invalid(format!("eps must be > 0, got {eps}")));
    }
    Ok(())
}

fn check_body_dim(body: &ConvexBody, dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::invalid("dimension must be >= 1"));
    }
    match body.dim() {
        Some(d) if d != dim => Err(Error::DimensionMismatch {
            expected: d,
            found: dim,
        }),
        _ => Ok(()),
    }
}

/// `delta_K(eps) = inf{1 - |(x+y)/2|_K : x, y in K, ||x - y|| >= eps}`.
///
/// Closed forms: `l_p` balls with `p >= 2` measured in their own norm,
/// `l_1`/`l_inf` balls (zero in dimension >= 2), one-dimensional bodies, and
/// ellipsoids in the Euclidean norm. Past the diameter the infimum is over an
/// empty set and is reported as 1.
pub fn modulus(
    body: &ConvexBody,
    ambient: AmbientNorm,
    dim: usize,
    eps: f64,
    method: ModulusMethod,
) -> Result<ModulusEstimate> {
    check_eps(eps)?;
    check_body_dim(body, dim)?;
    let value = match method {
        ModulusMethod::ClosedForm => ClosedForm::find(body, ambient, dim)?.eval(eps),
        ModulusMethod::SampledUpperBound { samples, seed } => {
            sampled_modulus(body, ambient, dim, eps, samples, seed)?
        }
    };
    Ok(ModulusEstimate {
        body: body.clone(),
        ambient,
        dim,
        eps,
        value,
        method,
    })
}

/// Draws a direction inside the span of the body.
fn random_direction(body: &ConvexBody, dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match body {
        ConvexBody::AbsHull(set) => {
            let mut d = vec![0.0; dim];
            for p in set.points() {
                let z: f64 = rng.sample(StandardNormal);
                for (o, x) in d.iter_mut().zip(p.coords()) {
                    *o += z * x;
                }
            }
            d
        }
        _ => (0..dim).map(|_| rng.sample(StandardNormal)).collect(),
    }
}

struct PairObjective<'a> {
    gauge: &'a PreparedGauge,
    ambient: AmbientNorm,
    eps: f64,
}

impl PairObjective<'_> {
    fn boundary(&self, v: &[f64]) -> Option<Vec<f64>> {
        let g = self.gauge.eval(&Vector::new(v.to_vec()).ok()?).ok()?;
        (g.is_finite() && g > 0.0).then(|| v.iter().map(|c| c / g).collect())
    }

    /// `1 - |(x+y)/2|_K` for the boundary points along `a` and `b`, if they are `eps` apart.
    fn value(&self, a: &[f64], b: &[f64]) -> Option<f64> {
        let x = self.boundary(a)?;
        let y = self.boundary(b)?;
        let diff: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p - q).collect();
        if self.ambient.eval(&diff) < self.eps {
            return None;
        }
        let mid: Vec<f64> = x.iter().zip(&y).map(|(p, q)| 0.5 * (p + q)).collect();
        let g = self.gauge.eval(&Vector::new(mid).ok()?).ok()?;
        Some((1.0 - g).clamp(0.0, 1.0))
    }

    fn refine(&self, mut a: Vec<f64>, mut b: Vec<f64>, mut best: f64) -> f64 {
        let scale = a.iter().chain(&b).fold(0.0_f64, |m, c| m.max(c.abs()));
        let mut h = 0.1 * scale.max(1e-12);
        let dim = a.len();
        for _ in 0..REFINE_STEPS {
            let mut improved = false;
            for k in 0..2 * dim {
                for sign in [1.0, -1.0] {
                    let (v, i) = if k < dim {
                        (&mut a, k)
                    } else {
                        (&mut b, k - dim)
                    };
                    let old = v[i];
                    v[i] = old + sign * h;
                    match self.value(&a, &b) {
                        Some(val) if val < best => {
                            best = val;
                            improved = true;
                        }
                        _ => {
                            let (v, i) = if k < dim {
                                (&mut a, k)
                            } else {
                                (&mut b, k - dim)
                            };
                            v[i] = old;
                        }
                    }
                }
            }
            if !improved {
                h *= 0.5;
            }
        }
        best
    }
}

fn sampled_modulus(
    body: &ConvexBody,
    ambient: AmbientNorm,
    dim: usize,
    eps: f64,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if samples == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    let gauge = PreparedGauge::new(body);
    let obj = PairObjective {
        gauge: &gauge,
        ambient,
        eps,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut found: Vec<(f64, Vec<f64>, Vec<f64>)> = Vec::new();
    for _ in 0..samples {
        let a = random_direction(body, dim, &mut rng);
        let b = random_direction(body, dim, &mut rng);
        if let Some(v) = obj.value(&a, &b) {
            found.push((v, a, b));
        }
    }
    found.sort_by(|p, q| p.0.total_cmp(&q.0));
    // delta <= 1 always; with no admissible pair that trivial bound is all we have.
    let mut best = 1.0_f64;
    for (v, a, b) in found.into_iter().take(REFINE_CANDIDATES) {
        best = best.min(obj.refine(a, b, v));
    }
    Ok(best)
}

/// Evaluates `delta_K` for the inequality checks.
///
/// Built from a closed form whenever one exists. Otherwise it interpolates a
/// table of sampled upper bounds and every verdict based on it is advisory.
#[derive(Debug, Clone)]
pub struct DeltaEvaluator {
    closed: Option<ClosedForm>,
    table: Vec<(f64, f64)>,
}

impl DeltaEvaluator {
    pub fn closed_form(body: &ConvexBody, ambient: AmbientNorm, dim: usize) -> Result<Self> {
        check_body_dim(body, dim)?;
        Ok(DeltaEvaluator {
            closed: Some(ClosedForm::find(body, ambient, dim)?),
            table: Vec::new(),
        })
    }

    /// Closed form if available, else a sampled table on `grid`.
    pub fn for_body(
        body: &ConvexBody,
        ambient: AmbientNorm,
        dim: usize,
        grid: &[f64],
        samples: usize,
        seed: u64,
    ) -> Result<Self> {
        match Self::closed_form(body, ambient, dim) {
            Ok(d) => Ok(d),
            Err(Error::Unsupported(_)) => {
                let mut table = Vec::with_capacity(grid.len());
                for &e in grid {
                    table.push((e, sampled_modulus(body, ambient, dim, e, samples, seed)?));
                }
                table.sort_by(|p, q| p.0.total_cmp(&q.0));
                Ok(DeltaEvaluator {
                    closed: None,
                    table,
                })
            }
            Err(e) => Err(e),
        }
    }

    pub fn advisory(&self) -> bool {
        self.closed.is_none()
    }

    /// `delta(eps)`, with `delta(0) = 0`.
    pub fn eval(&self, eps: f64) -> f64 {
        if eps <= 0.0 {
            return 0.0;
        }
        match &self.closed {
            Some(c) => c.eval(eps),
            None => self
                .table
                .iter()
                .take_while(|(e, _)| *e <= eps)
                .last()
                .map_or(0.0, |(_, v)| *v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MidpointReport {
    pub pairs: usize,
    /// Pairs skipped because a point has gauge above 1.
    pub outside_body: usize,
    pub max_violation: f64,
    pub worst_pair: Option<usize>,
    pub tol: f64,
    pub pass: bool,
    pub advisory: bool,
}

/// Largest excess of `|(x+y)/2|_K - (max(|x|_K, |y|_K) - delta(||x - y||))` over the pairs.
pub fn check_midpoint_inequality(
    body: &ConvexBody,
    ambient: AmbientNorm,
    delta: &DeltaEvaluator,
    pairs: &[(Vector, Vector)],
    tol: f64,
) -> Result<MidpointReport> {
    let gauge = PreparedGauge::new(body);
    let mut outside = 0;
    let mut max_violation = f64::NEG_INFINITY;
    let mut worst = None;
    for (i, (x, y)) in pairs.iter().enumerate() {
        x.check_dim(y.dim())?;
        let (gx, gy) = (gauge.eval(x)?, gauge.eval(y)?);
        if gx > 1.0 + INSIDE_TOL || gy > 1.0 + INSIDE_TOL {
            outside += 1;
            continue;
        }
        let mid = Vector::combination(&[x, y], &[0.5, 0.5]);
        let lhs = gauge.eval(&mid)?;
        let rhs = gx.max(gy) - delta.eval(ambient.distance(x, y));
        let v = lhs - rhs;
        if v > max_violation {
            max_violation = v;
            worst = Some(i);
        }
    }
    let max_violation = max_violation.max(0.0);
    Ok(MidpointReport {
        pairs: pairs.len(),
        outside_body: outside,
        max_violation,
        worst_pair: worst,
        tol,
        pass: max_violation <= tol && outside == 0,
        advisory: delta.advisory(),
    })
}

pub const MAX_SIGN_TERMS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignSumStatus {
    Ok,
    HypothesisViolated,
    BoundViolated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignSumReport {
    pub status: SignSumStatus,
    /// Largest `|sum s_n x_n|_K` over sign patterns.
    pub max_sign_gauge: f64,
    /// Pattern attaining it, as `+1`/`-1` per term.
    pub worst_signs: Vec<i8>,
    /// `sum_n delta(2 ||x_n||)`, computed only when the hypothesis holds.
    pub delta_sum: Option<f64>,
    pub advisory: bool,
}

/// Checks `|sum s_n x_n|_K <= 1` for all sign patterns, then `sum_n delta(2||x_n||) <= 1`.
pub fn check_sign_sum_bound(
    body: &ConvexBody,
    ambient: AmbientNorm,
    delta: &DeltaEvaluator,
    xs: &[Vector],
    tol: f64,
) -> Result<SignSumReport> {
    if xs.is_empty() {
        return Err(Error::invalid("need at least one vector"));
    }
    if xs.len() > MAX_SIGN_TERMS {
        return Err(Error::BudgetExceeded {
            what: format!("{} sign terms", xs.len()),
            cap: MAX_SIGN_TERMS as u64,
        });
    }
    let dim = xs[0].dim();
    for x in xs {
        x.check_dim(dim)?;
    }
    let gauge = PreparedGauge::new(body);
    let refs: Vec<&Vector> = xs.iter().collect();
    let mut max_gauge = f64::NEG_INFINITY;
    let mut worst = 0usize;
    // Patterns and their negations have the same gauge, so fix the first sign.
    for pattern in 0..1usize << (xs.len() - 1) {
        let signs: Vec<f64> = (0..xs.len())
            .map(|n| {
                if n > 0 && pattern >> (n - 1) & 1 == 1 {
                    -1.0
                } else {
                    1.0
                }
            })
            .collect();
        let g = gauge.eval(&Vector::combination(&refs, &signs))?;
        if g > max_gauge {
            max_gauge = g;
            worst = pattern;
        }
    }
    let worst_signs = (0..xs.len())
        .map(|n| {
            if n > 0 && worst >> (n - 1) & 1 == 1 {
                -1
            } else {
                1
            }
        })
        .collect();
    if max_gauge > 1.0 + tol {
        return Ok(SignSumReport {
            status: SignSumStatus::HypothesisViolated,
            max_sign_gauge: max_gauge,
            worst_signs,
            delta_sum: None,
            advisory: delta.advisory(),
        });
    }
    let sum: f64 = xs
        .iter()
        .map(|x| delta.eval(2.0 * ambient.eval(x.coords())))
        .sum();
    Ok(SignSumReport {
        status: if sum <= 1.0 + tol {
            SignSumStatus::Ok
        } else {
            SignSumStatus::BoundViolated
        },
        max_sign_gauge: max_gauge,
        worst_signs,
        delta_sum: Some(sum),
        advisory: delta.advisory(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShrinkReport {
    pub eps: f64,
    pub delta: f64,
    /// `1 - delta(eps)`.
    pub bound: f64,
    /// Largest nearest-neighbour distance in the net.
    pub mesh: f64,
    /// `mesh + 1e-6`.
    pub tolerance: f64,
    pub survivors: Vec<usize>,
    pub max_survivor_gauge: Option<f64>,
    pub pass: bool,
    /// Set when `delta(eps) = 0`: the inclusion carries no information.
    pub note: Option<String>,
    pub advisory: bool,
}

/// Largest distance from a net point to its nearest neighbour; zero for a single point.
pub fn net_mesh(net: &PointSet) -> f64 {
    let n = net.len();
    if n < 2 {
        return 0.0;
    }
    (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| net.distance(i, j))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// One exact derivation step on `net`, then checks every survivor has gauge `<= 1 - delta(eps) + tolerance`.
pub fn check_derivation_shrink(
    body: &ConvexBody,
    delta: &DeltaEvaluator,
    net: &PointSet,
    eps: f64,
    opts: &DeriveOptions,
) -> Result<ShrinkReport> {
    check_eps(eps)?;
    let gauge = PreparedGauge::new(body);
    let gauges: Vec<f64> = net
        .points()
        .iter()
        .map(|p| gauge.eval(p))
        .collect::<Result<_>>()?;
    if let Some(i) = gauges.iter().position(|&g| g > 1.0 + INSIDE_TOL) {
        return Err(Error::invalid(format!(
            "net point {i} lies outside the body (gauge {})",
            gauges[i]
        )));
    }
    let (survivors, _) = derive_once(net, eps, opts)?;
    let d = delta.eval(eps);
    let bound = 1.0 - d;
    let mesh = net_mesh(net);
    let tolerance = mesh + 1e-6;
    let max_survivor_gauge = survivors.iter().map(|&i| gauges[i]).reduce(f64::max);
    let pass = max_survivor_gauge.is_none_or(|g| g <= bound + tolerance);
    Ok(ShrinkReport {
        eps,
        delta: d,
        bound,
        mesh,
        tolerance,
        survivors,
        max_survivor_gauge,
        pass,
        note: (d == 0.0).then(|| "no shrink guaranteed".to_string()),
        advisory: delta.advisory(),
    })
}
