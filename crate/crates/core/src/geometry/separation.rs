use serde::{Deserialize, Serialize};

use super::vector::dot;
use super::{PointSet, Vector};
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome, Relation};

/// The open halfspace `{x : <c, x> > alpha}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub c: Vector,
    pub alpha: f64,
}

impl HalfSpace {
    pub fn new(c: Vector, alpha: f64) -> Result<Self> {
        if c.is_zero() {
            return Err(Error::invalid("halfspace functional must be nonzero"));
        }
        if !alpha.is_finite() {
            return Err(Error::invalid("halfspace threshold must be finite"));
        }
        Ok(HalfSpace { c, alpha })
    }

    pub fn value(&self, x: &Vector) -> f64 {
        self.c.dot(x)
    }

    pub fn contains(&self, x: &Vector) -> bool {
        self.value(x) > self.alpha
    }

    /// Indices of `set` lying in the halfspace.
    pub fn slice_indices(&self, points: &[Vector]) -> Vec<usize> {
        points
            .iter()
            .enumerate()
            .filter(|(_, p)| self.contains(p))
            .map(|(i, _)| i)
            .collect()
    }
}

/// An open halfspace containing all of `s` and none of `t`, if one exists.
///
/// Solved as a feasibility LP with unit margin
/// (`<c,x> - alpha >= 1` on `s`, `<c,y> - alpha <= 0` on `t`) while minimizing
/// `||c||_1`; the returned functional is rescaled to unit sup-norm and the
/// threshold placed midway between the two classes.
pub fn separability(s: &[Vector], t: &[Vector]) -> Option<HalfSpace> {
    let dim = s.first().or(t.first())?.dim();
    if s.iter()
        .any(|x| t.iter().any(|y| x.sup_distance(y) <= 1e-12))
    {
        return None;
    }
    if t.is_empty() || s.is_empty() {
        let c = Vector::basis(dim, 0);
        let alpha = if t.is_empty() {
            s.iter().map(|x| c.dot(x)).fold(f64::INFINITY, f64::min) - 1.0
        } else {
            t.iter().map(|y| c.dot(y)).fold(f64::NEG_INFINITY, f64::max)
        };
        return HalfSpace::new(c, alpha).ok();
    }

    // Variables: u (d), w (d), alpha (free); c = u - w.
    let nv = 2 * dim + 1;
    let mut obj = vec![1.0; nv];
    obj[2 * dim] = 0.0;
    let mut lp = LinearProgram::minimize(obj);
    lp.set_free(2 * dim);
    let row = |x: &Vector| {
        let mut r = vec![0.0; nv];
        for k in 0..dim {
            r[k] = x[k];
            r[dim + k] = -x[k];
        }
        r[2 * dim] = -1.0;
        r
    };
    for x in s {
        lp.add(row(x), Relation::Ge, 1.0);
    }
    for y in t {
        lp.add(row(y), Relation::Le, 0.0);
    }
    let sol = match lp.solve() {
        LpOutcome::Optimal(sol) => sol,
        _ => return None,
    };
    let c: Vec<f64> = (0..dim).map(|k| sol.x[k] - sol.x[dim + k]).collect();
    let scale = c.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    let c: Vec<f64> = c.iter().map(|x| x / scale).collect();
    let lo_s = s
        .iter()
        .map(|x| dot(&c, x.coords()))
        .fold(f64::INFINITY, f64::min);
    let hi_t = t
        .iter()
        .map(|y| dot(&c, y.coords()))
        .fold(f64::NEG_INFINITY, f64::max);
    if lo_s <= hi_t {
        return None;
    }
    let h = HalfSpace::new(Vector::new(c).ok()?, 0.5 * (lo_s + hi_t)).ok()?;
    debug_assert!(s.iter().all(|x| h.contains(x)) && t.iter().all(|y| !h.contains(y)));
    Some(h)
}

/// Set-level wrapper over [`separability`].
pub fn separability_sets(s: &PointSet, t: &PointSet) -> Result<Option<HalfSpace>> {
    s.check_compatible(t)?;
    Ok(separability(s.points(), t.points()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::AmbientNorm;

    fn pts(rows: &[&[f64]]) -> Vec<Vector> {
        rows.iter()
            .map(|r| Vector::new(r.to_vec()).unwrap())
            .collect()
    }

    #[test]
    fn separable_pairs() {
        let h = separability(&pts(&[&[1.0, 0.0]]), &pts(&[&[0.0, 0.0]])).unwrap();
        assert!(h.contains(&pts(&[&[1.0, 0.0]])[0]));
        assert!(!h.contains(&pts(&[&[0.0, 0.0]])[0]));

        let s = pts(&[&[1.0, 1.0]]);
        let t = pts(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let h = separability(&s, &t).unwrap();
        assert!(h.contains(&s[0]) && t.iter().all(|y| !h.contains(y)));
    }

    #[test]
    fn centroid_is_not_separable() {
        let s = pts(&[&[0.0, 0.0]]);
        let t = pts(&[&[1.0, 0.0], &[-1.0, 0.0], &[0.0, 1.0], &[0.0, -1.0]]);
        assert!(separability(&s, &t).is_none());
    }

    #[test]
    fn overlap_and_empty_sides() {
        let s = pts(&[&[0.5, 0.5]]);
        assert!(separability(&s, &s).is_none());
        let h = separability(&s, &[]).unwrap();
        assert!(h.contains(&s[0]));
        let a = PointSet::from_rows(AmbientNorm::L2, &[&[0.0, 0.0]]).unwrap();
        let b = PointSet::from_rows(AmbientNorm::L1, &[&[1.0, 0.0]]).unwrap();
        assert!(separability_sets(&a, &b).is_err());
    }
}
