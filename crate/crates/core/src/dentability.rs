//! Slice derivations on finite point sets.
//!
//! One derivation step removes every point that lies in some slice
//! `K ∩ {<c,x> > alpha}` whose spread is at most `eps`. The spread is the
//! diameter for the set derivation and the oscillation of a function for the
//! function derivation. Iterating until the set is exhausted yields the
//! dentability index.
//!
//! Two search modes are provided. `Exact` decides, for each point, whether any
//! slice through it has small spread: it walks in/out assignments of the
//! point's `eps`-neighbours and prunes with the separability LP. `Sweep` only
//! tries prefix slices along a list of directions; its removals are sound but
//! may be fewer.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::DEFAULT_CLIQUE_CAP;
use crate::error::{Error, Result};
use crate::geometry::{separability, AmbientNorm, HalfSpace, PointSet, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeriveMode {
    Exact,
    Sweep,
}

impl std::str::FromStr for DeriveMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(DeriveMode::Exact),
            "sweep" => Ok(DeriveMode::Sweep),
            other => Err(Error::invalid(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DeriveOptions {
    pub mode: DeriveMode,
    /// Search-node budget for exact mode, summed over the points of one step.
    pub clique_cap: u64,
    /// Sweep directions; `None` means coordinate directions and pairwise differences.
    pub directions: Option<Vec<Vector>>,
}

impl DeriveOptions {
    pub fn exact() -> Self {
        DeriveOptions {
            mode: DeriveMode::Exact,
            clique_cap: DEFAULT_CLIQUE_CAP,
            directions: None,
        }
    }

    pub fn sweep() -> Self {
        DeriveOptions {
            mode: DeriveMode::Sweep,
            ..Self::exact()
        }
    }

    pub fn with_directions(mut self, directions: Vec<Vector>) -> Self {
        self.directions = Some(directions);
        self
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.clique_cap = cap;
        self
    }
}

impl From<DeriveMode> for DeriveOptions {
    fn from(mode: DeriveMode) -> Self {
        DeriveOptions {
            mode,
            ..DeriveOptions::exact()
        }
    }
}

/// Evidence that `removed` lies in a slice of small spread.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceWitness {
    /// Index into the original point set.
    pub removed: usize,
    pub removed_point: Vector,
    pub halfspace: HalfSpace,
    /// Members of the slice, as indices into the original point set.
    pub slice: Vec<usize>,
    /// Diameter (or oscillation, for the function derivation) of the slice.
    pub slice_diameter: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceOutcome {
    /// The derivation emptied the set.
    Exhausted,
    /// A step removed nothing while points remained: not finitely dentable at this scale and mode.
    Stagnated,
    /// `max_steps` ran out first.
    StepLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivationTrace {
    pub eps: f64,
    pub mode: DeriveMode,
    /// `levels[n]` lists the surviving indices after `n` steps; `levels[0]` is everything.
    pub levels: Vec<Vec<usize>>,
    /// `witnesses[n]` justifies the removals of step `n + 1`.
    pub witnesses: Vec<Vec<SliceWitness>>,
    /// Number of steps to exhaust the set, when that happened.
    pub index: Option<usize>,
    pub outcome: TraceOutcome,
}

impl DerivationTrace {
    /// Step (1-based) at which each original point was removed.
    pub fn removal_steps(&self) -> Vec<Option<usize>> {
        let n = self.levels.first().map_or(0, Vec::len);
        let mut steps = vec![None; n];
        for (k, ws) in self.witnesses.iter().enumerate() {
            for w in ws {
                steps[w.removed] = Some(k + 1);
            }
        }
        steps
    }
}

/// How the spread of a slice is measured.
#[derive(Clone, Copy)]
enum Spread<'a> {
    Diameter(AmbientNorm),
    Oscillation(&'a [f64]),
}

impl Spread<'_> {
    fn pair(&self, points: &[Vector], i: usize, j: usize) -> f64 {
        match self {
            Spread::Diameter(n) => n.distance(&points[i], &points[j]),
            Spread::Oscillation(f) => (f[i] - f[j]).abs(),
        }
    }

    fn of(&self, points: &[Vector], members: &[usize]) -> f64 {
        match self {
            Spread::Oscillation(f) => {
                let (lo, hi) = members
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                        (lo.min(f[i]), hi.max(f[i]))
                    });
                if members.is_empty() {
                    0.0
                } else {
                    hi - lo
                }
            }
            Spread::Diameter(_) => {
                let mut best = 0.0_f64;
                for (a, &i) in members.iter().enumerate() {
                    for &j in &members[a + 1..] {
                        best = best.max(self.pair(points, i, j));
                    }
                }
                best
            }
        }
    }
}

/// Everything a single derivation step needs.
struct Step<'a> {
    points: &'a [Vector],
    active: &'a [usize],
    eps: f64,
    spread: Spread<'a>,
    /// `(limit index, separation)` while the weak tail is still present.
    tail: Option<(usize, f64)>,
}

impl Step<'_> {
    /// Slices through the tail limit pick up tail points and have spread at least the separation.
    fn blocked(&self, i: usize) -> bool {
        matches!(self.tail, Some((limit, sep)) if limit == i && sep > self.eps)
    }

    /// Independent re-check of a witness against the current level.
    fn verify(&self, w: &SliceWitness) -> Result<()> {
        let slice: Vec<usize> = self
            .active
            .iter()
            .copied()
            .filter(|&i| w.halfspace.contains(&self.points[i]))
            .collect();
        if slice != w.slice {
            return Err(Error::Verification(format!(
                "slice identity failed for point {}",
                w.removed
            )));
        }
        if !slice.contains(&w.removed) {
            return Err(Error::Verification(format!(
                "removed point {} is not in its slice",
                w.removed
            )));
        }
        let spread = self.spread.of(self.points, &slice);
        if spread > self.eps + 1e-12 || (spread - w.slice_diameter).abs() > 1e-12 {
            return Err(Error::Verification(format!(
                "slice spread {spread} exceeds eps {}",
                self.eps
            )));
        }
        if slice.iter().any(|&i| self.blocked(i)) {
            return Err(Error::Verification(
                "slice contains the weak-tail limit".into(),
            ));
        }
        Ok(())
    }

    fn witness(&self, removed: usize, halfspace: HalfSpace) -> Option<SliceWitness> {
        let slice: Vec<usize> = self
            .active
            .iter()
            .copied()
            .filter(|&i| halfspace.contains(&self.points[i]))
            .collect();
        if !slice.contains(&removed) || slice.iter().any(|&i| self.blocked(i)) {
            return None;
        }
        let spread = self.spread.of(self.points, &slice);
        (spread <= self.eps).then(|| SliceWitness {
            removed,
            removed_point: self.points[removed].clone(),
            halfspace,
            slice,
            slice_diameter: spread,
        })
    }

    fn run(&self, opts: &DeriveOptions) -> Result<(Vec<usize>, Vec<SliceWitness>)> {
        let found: Vec<Option<SliceWitness>> = match opts.mode {
            DeriveMode::Exact => {
                let results: Vec<(Option<SliceWitness>, u64)> = self
                    .active
                    .par_iter()
                    .map(|&x| self.exact_search(x, opts.clique_cap))
                    .collect::<Result<_>>()?;
                let used: u64 = results.iter().map(|r| r.1).sum();
                if used > opts.clique_cap {
                    return Err(Error::BudgetExceeded {
                        what: "exact slice enumeration".into(),
                        cap: opts.clique_cap,
                    });
                }
                results.into_iter().map(|r| r.0).collect()
            }
            DeriveMode::Sweep => self.sweep(opts.directions.as_deref()),
        };
        let mut survivors = Vec::new();
        let mut witnesses = Vec::new();
        for (&i, w) in self.active.iter().zip(found) {
            match w {
                Some(w) => {
                    self.verify(&w)?;
                    witnesses.push(w);
                }
                None => survivors.push(i),
            }
        }
        Ok((survivors, witnesses))
    }

    /// Branch and bound over in/out assignments of the neighbours of `x`.
    ///
    /// A slice through `x` with spread `<= eps` is a clique of the
    /// `eps`-spread graph containing `x`; each search node asks the LP whether
    /// the current partial assignment is still separable.
    fn exact_search(&self, x: usize, cap: u64) -> Result<(Option<SliceWitness>, u64)> {
        if self.blocked(x) {
            return Ok((None, 0));
        }
        let mut inside = vec![x];
        let mut outside = Vec::new();
        let mut undecided = Vec::new();
        for &y in self.active {
            if y == x {
                continue;
            }
            if self.blocked(y) || self.spread.pair(self.points, x, y) > self.eps {
                outside.push(y);
            } else {
                undecided.push(y);
            }
        }
        let mut nodes = 0u64;
        let found = self.branch(&mut inside, &mut outside, &undecided, &mut nodes, cap)?;
        Ok((found.and_then(|h| self.witness(x, h)), nodes))
    }

    fn branch(
        &self,
        inside: &mut Vec<usize>,
        outside: &mut Vec<usize>,
        undecided: &[usize],
        nodes: &mut u64,
        cap: u64,
    ) -> Result<Option<HalfSpace>> {
        *nodes += 1;
        if *nodes > cap {
            return Err(Error::BudgetExceeded {
                what: "exact slice enumeration".into(),
                cap,
            });
        }
        let pts = |ids: &[usize]| {
            ids.iter()
                .map(|&i| self.points[i].clone())
                .collect::<Vec<_>>()
        };
        let Some(h) = separability(&pts(inside), &pts(outside)) else {
            return Ok(None);
        };
        // The LP's own halfspace may already cut out a small slice.
        if self.witness(inside[0], h.clone()).is_some() {
            return Ok(Some(h));
        }
        let Some((&y, rest)) = undecided.split_first() else {
            return Ok(None);
        };

        // y out.
        outside.push(y);
        let r = self.branch(inside, outside, rest, nodes, cap)?;
        outside.pop();
        if r.is_some() {
            return Ok(r);
        }

        // y in: everything too far from y is forced out.
        let (keep, forced): (Vec<usize>, Vec<usize>) = rest
            .iter()
            .partition(|&&z| self.spread.pair(self.points, y, z) <= self.eps);
        inside.push(y);
        let mark = outside.len();
        outside.extend(&forced);
        let r = self.branch(inside, outside, &keep, nodes, cap)?;
        outside.truncate(mark);
        inside.pop();
        Ok(r)
    }

    fn default_directions(&self) -> Vec<Vector> {
        let dim = self.points[0].dim();
        let mut dirs = Vec::new();
        for k in 0..dim {
            dirs.push(Vector::basis(dim, k));
            dirs.push(Vector::basis(dim, k).scale(-1.0));
        }
        for &i in self.active {
            for &j in self.active {
                if i != j {
                    let d = &self.points[i] - &self.points[j];
                    if !d.is_zero() {
                        dirs.push(d);
                    }
                }
            }
        }
        dirs
    }

    /// Prefix slices along each direction; the first direction to remove a point supplies its witness.
    fn sweep(&self, directions: Option<&[Vector]>) -> Vec<Option<SliceWitness>> {
        let dirs = match directions {
            Some(d) => d.to_vec(),
            None => self.default_directions(),
        };
        let mut found: Vec<Option<SliceWitness>> = vec![None; self.active.len()];
        let pos_of = |i: usize| self.active.iter().position(|&a| a == i).expect("active");
        for c in dirs.iter().filter(|c| !c.is_zero()) {
            let mut order: Vec<(f64, usize)> = self
                .active
                .iter()
                .map(|&i| (c.dot(&self.points[i]), i))
                .collect();
            order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

            // Longest prefix ending at a value gap with spread <= eps.
            let mut best_len = 0;
            let mut members: Vec<usize> = Vec::new();
            let mut k = 0;
            while k < order.len() {
                let v = order[k].0;
                let mut tier_end = k;
                while tier_end < order.len() && order[tier_end].0 == v {
                    tier_end += 1;
                }
                let tier: Vec<usize> = order[k..tier_end].iter().map(|p| p.1).collect();
                if tier.iter().any(|&i| self.blocked(i)) {
                    break;
                }
                let mut grown = members.clone();
                grown.extend(&tier);
                if self.spread.of(self.points, &grown) > self.eps {
                    break;
                }
                members = grown;
                best_len = tier_end;
                k = tier_end;
            }
            if best_len == 0 {
                continue;
            }
            let last = order[best_len - 1].0;
            let alpha = if best_len < order.len() {
                0.5 * (last + order[best_len].0)
            } else {
                last - 1.0
            };
            let Ok(h) = HalfSpace::new(c.clone(), alpha) else {
                continue;
            };
            for &i in &members {
                let p = pos_of(i);
                if found[p].is_none() {
                    found[p] = self.witness(i, h.clone());
                }
            }
        }
        found
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::invalid(format!("eps must be > 0, got {eps}")));
    }
    Ok(())
}

/// One derivation step on all of `set`; survivors and witnesses refer to indices of `set`.
pub fn derive_once(
    set: &PointSet,
    eps: f64,
    opts: &DeriveOptions,
) -> Result<(Vec<usize>, Vec<SliceWitness>)> {
    check_eps(eps)?;
    let active: Vec<usize> = (0..set.len()).collect();
    Step {
        points: set.points(),
        active: &active,
        eps,
        spread: Spread::Diameter(set.norm()),
        tail: set.weak_tail().map(|t| (t.limit, t.separation)),
    }
    .run(opts)
}

fn iterate(
    set: &PointSet,
    eps: f64,
    max_steps: usize,
    opts: &DeriveOptions,
    spread: Spread<'_>,
) -> Result<DerivationTrace> {
    check_eps(eps)?;
    if max_steps == 0 {
        return Err(Error::invalid("max_steps must be >= 1"));
    }
    if set.is_empty() {
        return Err(Error::invalid("derivation needs a nonempty set"));
    }
    let mut levels = vec![(0..set.len()).collect::<Vec<_>>()];
    let mut witnesses = Vec::new();
    let mut tail = set.weak_tail().map(|t| (t.limit, t.separation));
    let mut outcome = TraceOutcome::StepLimit;
    let mut index = None;
    for step in 1..=max_steps {
        let current = levels.last().expect("level 0");
        let (survivors, ws) = Step {
            points: set.points(),
            active: current,
            eps,
            spread,
            tail,
        }
        .run(opts)?;
        // Every tail point is exposed on its own, so the tail is gone after one step.
        tail = None;
        let stalled = ws.is_empty();
        levels.push(survivors);
        witnesses.push(ws);
        if levels.last().is_some_and(Vec::is_empty) {
            index = Some(step);
            outcome = TraceOutcome::Exhausted;
            break;
        }
        if stalled {
            outcome = TraceOutcome::Stagnated;
            break;
        }
    }
    Ok(DerivationTrace {
        eps,
        mode: opts.mode,
        levels,
        witnesses,
        index,
        outcome,
    })
}

/// Iterates [`derive_once`] until the set is empty, stagnates, or `max_steps` is hit.
pub fn dz_index(
    set: &PointSet,
    eps: f64,
    max_steps: usize,
    opts: &DeriveOptions,
) -> Result<DerivationTrace> {
    iterate(set, eps, max_steps, opts, Spread::Diameter(set.norm()))
}

/// The derivation driven by the oscillation of `values` on slices.
pub fn derive_function(
    set: &PointSet,
    values: &[f64],
    eps: f64,
    max_steps: usize,
    opts: &DeriveOptions,
) -> Result<DerivationTrace> {
    if values.len() != set.len() {
        return Err(Error::invalid(format!(
            "{} function values for {} points",
            values.len(),
            set.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("function values must be finite"));
    }
    if set.weak_tail().is_some() {
        return Err(Error::invalid(
            "the function derivation has no values on a weak tail",
        ));
    }
    iterate(set, eps, max_steps, opts, Spread::Oscillation(values))
}

/// `f(x) = min_{y in F} ||x - y||`, checked to be 1-Lipschitz on all pairs of `set`.
pub fn distance_to_set_function(set: &PointSet, targets: &PointSet) -> Result<Vec<f64>> {
    if targets.is_empty() {
        return Err(Error::invalid("target set must be nonempty"));
    }
    set.check_compatible(targets)?;
    let norm = set.norm();
    let values: Vec<f64> = set
        .points()
        .iter()
        .map(|x| {
            targets
                .points()
                .iter()
                .map(|y| norm.distance(x, y))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    for i in 0..set.len() {
        for j in i + 1..set.len() {
            if (values[i] - values[j]).abs() > set.distance(i, j) + 1e-12 {
                return Err(Error::Verification(format!(
                    "distance function is not 1-Lipschitz at ({i}, {j})"
                )));
            }
        }
    }
    Ok(values)
}
