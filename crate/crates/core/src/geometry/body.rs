use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{AmbientNorm, PointSet, Vector};
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome, Relation};

/// An absolutely convex body `K`, evaluated through its Minkowski functional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", try_from = "BodyRepr", into = "BodyRepr")]
pub enum ConvexBody {
    /// Closed absolutely convex hull of finitely many points.
    AbsHull(PointSet),
    /// `radius * B_p`.
    LpBall { norm: AmbientNorm, radius: f64 },
    /// `{x : x^T A x <= 1}` for symmetric positive definite `A` (row-major).
    Ellipsoid { matrix: Vec<Vec<f64>> },
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum BodyRepr {
    AbsHull(PointSet),
    LpBall { norm: AmbientNorm, radius: f64 },
    Ellipsoid { matrix: Vec<Vec<f64>> },
}

impl TryFrom<BodyRepr> for ConvexBody {
    type Error = Error;
    fn try_from(r: BodyRepr) -> Result<Self> {
        match r {
            BodyRepr::AbsHull(p) => ConvexBody::abs_hull(p),
            BodyRepr::LpBall { norm, radius } => ConvexBody::lp_ball(norm, radius),
            BodyRepr::Ellipsoid { matrix } => ConvexBody::ellipsoid(matrix),
        }
    }
}

impl From<ConvexBody> for BodyRepr {
    fn from(b: ConvexBody) -> Self {
        match b {
            ConvexBody::AbsHull(p) => BodyRepr::AbsHull(p),
            ConvexBody::LpBall { norm, radius } => BodyRepr::LpBall { norm, radius },
            ConvexBody::Ellipsoid { matrix } => BodyRepr::Ellipsoid { matrix },
        }
    }
}

impl ConvexBody {
    pub fn abs_hull(points: PointSet) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("absolute hull of an empty set"));
        }
        Ok(ConvexBody::AbsHull(points))
    }

    pub fn lp_ball(norm: AmbientNorm, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::invalid(format!(
                "ball radius must be > 0, got {radius}"
            )));
        }
        Ok(ConvexBody::LpBall { norm, radius })
    }

    pub fn unit_ball(norm: AmbientNorm) -> Self {
        ConvexBody::LpBall { norm, radius: 1.0 }
    }

    pub fn ellipsoid(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let a = square_matrix(&matrix)?;
        let n = a.nrows();
        for i in 0..n {
            for j in 0..i {
                let (x, y) = (a[(i, j)], a[(j, i)]);
                if (x - y).abs() > 1e-12 * (1.0 + x.abs().max(y.abs())) {
                    return Err(Error::invalid("ellipsoid matrix must be symmetric"));
                }
            }
        }
        if a.clone().cholesky().is_none() {
            return Err(Error::invalid("ellipsoid matrix must be positive definite"));
        }
        Ok(ConvexBody::Ellipsoid { matrix })
    }

    /// Dimension the body lives in, when it is fixed.
    pub fn dim(&self) -> Option<usize> {
        match self {
            ConvexBody::AbsHull(p) => Some(p.dim()),
            ConvexBody::LpBall { .. } => None,
            ConvexBody::Ellipsoid { matrix } => Some(matrix.len()),
        }
    }

    /// Smallest eigenvalue of the ellipsoid matrix.
    pub fn ellipsoid_min_eigenvalue(&self) -> Option<f64> {
        match self {
            ConvexBody::Ellipsoid { matrix } => {
                let a = square_matrix(matrix).ok()?;
                Some(a.symmetric_eigenvalues().min())
            }
            _ => None,
        }
    }
}

fn square_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::invalid("matrix must be square and nonempty"));
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::invalid("matrix entries must be finite"));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// A body with any per-body factorization done once, for repeated gauge queries.
#[derive(Debug, Clone)]
pub struct PreparedGauge {
    kind: Prepared,
}

#[derive(Debug, Clone)]
enum Prepared {
    Ball {
        norm: AmbientNorm,
        radius: f64,
    },
    Ellipsoid {
        a: DMatrix<f64>,
    },
    /// Linearly independent generators: coefficients are unique.
    Basis {
        gens: DMatrix<f64>,
        /// Left inverse `R^{-1} Q^T` of `gens`.
        left_inverse: DMatrix<f64>,
    },
    Lp {
        gens: Vec<Vector>,
        dim: usize,
    },
}

impl PreparedGauge {
    pub fn new(body: &ConvexBody) -> Self {
        let kind = match body {
            ConvexBody::LpBall { norm, radius } => Prepared::Ball {
                norm: *norm,
                radius: *radius,
            },
            ConvexBody::Ellipsoid { matrix } => Prepared::Ellipsoid {
                a: square_matrix(matrix).expect("validated at construction"),
            },
            ConvexBody::AbsHull(set) => {
                let d = set.dim();
                let m = set.len();
                let gens = DMatrix::from_fn(d, m, |i, j| set.points()[j][i]);
                if m <= d && full_column_rank(&gens) {
                    let qr = gens.clone().qr();
                    let left_inverse = qr
                        .r()
                        .solve_upper_triangular(&qr.q().transpose())
                        .expect("full column rank");
                    Prepared::Basis { gens, left_inverse }
                } else {
                    Prepared::Lp {
                        gens: set.points().to_vec(),
                        dim: d,
                    }
                }
            }
        };
        PreparedGauge { kind }
    }

    /// `min{t >= 0 : v in tK}`, or `+inf` when `v` is outside the span of `K`.
    pub fn eval(&self, v: &Vector) -> Result<f64> {
        match &self.kind {
            Prepared::Ball { norm, radius } => Ok(norm.eval(v.coords()) / radius),
            Prepared::Ellipsoid { a } => {
                v.check_dim(a.nrows())?;
                let x = DVector::from_column_slice(v.coords());
                Ok((x.dot(&(a * &x))).max(0.0).sqrt())
            }
            Prepared::Basis { gens, left_inverse } => {
                v.check_dim(gens.nrows())?;
                let x = DVector::from_column_slice(v.coords());
                let coeffs = left_inverse * &x;
                let residual = (&x - gens * &coeffs).amax();
                if residual > 1e-9 * (1.0 + x.amax()) {
                    return Ok(f64::INFINITY);
                }
                Ok(coeffs.iter().map(|c| c.abs()).sum())
            }
            Prepared::Lp { gens, dim } => {
                v.check_dim(*dim)?;
                Ok(abs_hull_gauge_lp(gens, v))
            }
        }
    }
}

fn full_column_rank(m: &DMatrix<f64>) -> bool {
    if m.ncols() == 0 {
        return false;
    }
    let sv = m.clone().singular_values();
    let max = sv.max();
    max > 0.0 && sv.min() > 1e-10 * max
}

/// LP form of the absolute-hull gauge: `min sum |l_i|` s.t. `sum l_i p_i = v`.
pub(crate) fn abs_hull_gauge_lp(gens: &[Vector], v: &Vector) -> f64 {
    let m = gens.len();
    let d = v.dim();
    let mut lp = LinearProgram::minimize(vec![1.0; 2 * m]);
    for row in 0..d {
        let mut coeffs = vec![0.0; 2 * m];
        for (j, g) in gens.iter().enumerate() {
            coeffs[j] = g[row];
            coeffs[m + j] = -g[row];
        }
        lp.add(coeffs, Relation::Eq, v[row]);
    }
    match lp.solve() {
        LpOutcome::Optimal(s) => s.objective.max(0.0),
        _ => f64::INFINITY,
    }
}

/// Minkowski functional of `body` at `v`.
pub fn gauge(body: &ConvexBody, v: &Vector) -> Result<f64> {
    PreparedGauge::new(body).eval(v)
}
