use serde::{Deserialize, Serialize};

use super::{AmbientNorm, Vector};
use crate::error::{Error, Result};

/// A weakly convergent sequence that the finite set stands in for.
///
/// The set is understood to also contain infinitely many points converging
/// weakly to `points[limit]`, each at norm distance at least `separation`
/// from it and each exposed by a slice of its own. A truncated `c_0` family
/// (the block family cut at `n_max`) is the intended use: the omitted blocks
/// accumulate weakly at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakTail {
    pub limit: usize,
    pub separation: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PointSetRepr {
    dim: usize,
    norm: AmbientNorm,
    points: Vec<Vector>,
    #[serde(default, skip_serializing_if = "is_false")]
    empty: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weak_tail: Option<WeakTail>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// A finite configuration in `R^dim` under a fixed ambient norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointSetRepr", into = "PointSetRepr")]
pub struct PointSet {
    dim: usize,
    norm: AmbientNorm,
    points: Vec<Vector>,
    weak_tail: Option<WeakTail>,
}

impl PointSet {
    /// Builds a nonempty set, dropping later duplicates (sup-distance `<= 1e-12`).
    pub fn new(dim: usize, norm: AmbientNorm, points: Vec<Vector>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("point set must be nonempty"));
        }
        Self::build(dim, norm, points)
    }

    pub fn empty(dim: usize, norm: AmbientNorm) -> Self {
        PointSet {
            dim,
            norm,
            points: Vec::new(),
            weak_tail: None,
        }
    }

    fn build(dim: usize, norm: AmbientNorm, points: Vec<Vector>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be >= 1"));
        }
        let mut kept: Vec<Vector> = Vec::with_capacity(points.len());
        for p in points {
            p.check_dim(dim)?;
            if !kept.iter().any(|q| q.sup_distance(&p) <= 1e-12) {
                kept.push(p);
            }
        }
        Ok(PointSet {
            dim,
            norm,
            points: kept,
            weak_tail: None,
        })
    }

    /// Convenience constructor from raw rows.
    pub fn from_rows(norm: AmbientNorm, rows: &[&[f64]]) -> Result<Self> {
        let points = rows
            .iter()
            .map(|r| Vector::new(r.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        let dim = points.first().map_or(0, Vector::dim);
        Self::new(dim, norm, points)
    }

    pub fn with_weak_tail(mut self, tail: WeakTail) -> Result<Self> {
        if tail.limit >= self.points.len() {
            return Err(Error::invalid(format!(
                "weak tail limit index {} out of range",
                tail.limit
            )));
        }
        if !(tail.separation.is_finite() && tail.separation > 0.0) {
            return Err(Error::invalid("weak tail separation must be positive"));
        }
        self.weak_tail = Some(tail);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm(&self) -> AmbientNorm {
        self.norm
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn weak_tail(&self) -> Option<WeakTail> {
        self.weak_tail
    }

    pub fn with_norm(&self, norm: AmbientNorm) -> PointSet {
        PointSet {
            norm,
            ..self.clone()
        }
    }

    /// The sub-configuration at `indices` (in that order). The weak tail is not carried over.
    pub fn subset(&self, indices: &[usize]) -> PointSet {
        PointSet {
            dim: self.dim,
            norm: self.norm,
            points: indices.iter().map(|&i| self.points[i].clone()).collect(),
            weak_tail: None,
        }
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.norm.distance(&self.points[i], &self.points[j])
    }

    pub fn check_compatible(&self, other: &PointSet) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        if self.norm != other.norm {
            return Err(Error::invalid(format!(
                "norm mismatch: {} vs {}",
                self.norm, other.norm
            )));
        }
        Ok(())
    }

    pub fn position(&self, v: &Vector) -> Option<usize> {
        self.points.iter().position(|p| p.sup_distance(v) <= 1e-12)
    }
}

impl TryFrom<PointSetRepr> for PointSet {
    type Error = Error;
    fn try_from(r: PointSetRepr) -> Result<Self> {
        if r.points.is_empty() && !r.empty {
            return Err(Error::invalid(
                "point set has no points; set \"empty\": true to allow this",
            ));
        }
        let set = Self::build(r.dim, r.norm, r.points)?;
        match r.weak_tail {
            Some(t) => set.with_weak_tail(t),
            None => Ok(set),
        }
    }
}

impl From<PointSet> for PointSetRepr {
    fn from(s: PointSet) -> Self {
        PointSetRepr {
            dim: s.dim,
            norm: s.norm,
            empty: s.points.is_empty(),
            points: s.points,
            weak_tail: s.weak_tail,
        }
    }
}

/// Largest pairwise distance; `0` for a singleton.
pub fn diameter(set: &PointSet) -> f64 {
    let n = set.len();
    let mut best = 0.0_f64;
    for i in 0..n {
        for j in i + 1..n {
            best = best.max(set.distance(i, j));
        }
    }
    best
}
