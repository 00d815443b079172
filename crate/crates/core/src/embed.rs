//! Tree embeddings into normed spaces and their two-norm distortion.
//!
//! A map is measured twice: its Lipschitz constant in the gauge of a body `K`
//! and its co-Lipschitz (separation) constant in the ambient norm.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::convexity::DeltaEvaluator;
use crate::error::{Error, Result};
use crate::geometry::{AmbientNorm, ConvexBody, PointSet, PreparedGauge, Vector};
use crate::graphs::{binary_tree, diamond, laakso, GraphFamily, MetricGraph, TreeNode};
use crate::james::JamesSystem;

/// Slack allowed on the separation and Lipschitz preconditions.
const PRECONDITION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub graph: MetricGraph,
    /// `map[i]` is the image of vertex `i`.
    pub map: Vec<Vector>,
    pub ambient: AmbientNorm,
    pub body: ConvexBody,
}

impl Embedding {
    pub fn new(
        graph: MetricGraph,
        map: Vec<Vector>,
        ambient: AmbientNorm,
        body: ConvexBody,
    ) -> Result<Self> {
        if map.len() != graph.len() {
            return Err(Error::invalid(format!(
                "{} images for {} vertices",
                map.len(),
                graph.len()
            )));
        }
        let dim = map
            .first()
            .map(Vector::dim)
            .ok_or_else(|| Error::invalid("empty map"))?;
        for v in &map {
            v.check_dim(dim)?;
        }
        if let Some(d) = body.dim() {
            if d != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: d,
                });
            }
        }
        Ok(Embedding {
            graph,
            map,
            ambient,
            body,
        })
    }

    pub fn dim(&self) -> usize {
        self.map[0].dim()
    }

    /// The same map shifted by `v` and scaled by `s`.
    pub fn affine(&self, s: f64, v: &Vector) -> Result<Embedding> {
        v.check_dim(self.dim())?;
        let map = self
            .map
            .iter()
            .map(|x| Vector::combination(&[x, v], &[s, 1.0]))
            .collect();
        Embedding::new(self.graph.clone(), map, self.ambient, self.body.clone())
    }
}

#[derive(Serialize)]
struct GraphRef {
    family: GraphFamily,
    level: usize,
}

struct OrderedMap<'a>(&'a Embedding);

impl Serialize for OrderedMap<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.map.len()))?;
        for (id, v) in self.0.graph.vertices.iter().zip(&self.0.map) {
            m.serialize_entry(id, v)?;
        }
        m.end()
    }
}

impl Serialize for Embedding {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            graph: GraphRef,
            ambient: AmbientNorm,
            body: &'a ConvexBody,
            map: OrderedMap<'a>,
        }
        Repr {
            graph: GraphRef {
                family: self.graph.family,
                level: self.graph.level,
            },
            ambient: self.ambient,
            body: &self.body,
            map: OrderedMap(self),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Embedding {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct GraphSpec {
            family: GraphFamily,
            level: usize,
        }
        #[derive(Deserialize)]
        struct Repr {
            graph: GraphSpec,
            ambient: AmbientNorm,
            body: ConvexBody,
            map: BTreeMap<String, Vector>,
        }
        let r = Repr::deserialize(d)?;
        let build = || -> Result<Embedding> {
            let graph = match r.graph.family {
                GraphFamily::Tree => binary_tree(r.graph.level)?,
                GraphFamily::Diamond => diamond(r.graph.level)?,
                GraphFamily::Laakso => laakso(r.graph.level)?,
            };
            let map = graph
                .vertices
                .iter()
                .map(|id| {
                    r.map
                        .get(id)
                        .cloned()
                        .ok_or_else(|| Error::invalid(format!("vertex {id:?} is not mapped")))
                })
                .collect::<Result<_>>()?;
            Embedding::new(graph, map, r.ambient, r.body.clone())
        };
        build().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    /// `max |f(s) - f(t)|_K / d(s, t)`; infinite when a difference leaves the span of `K`.
    #[serde(with = "extended_float")]
    pub lip_gauge: f64,
    pub lip_witness: (usize, usize),
    /// `min ||f(s) - f(t)|| / d(s, t)`.
    pub sep_norm: f64,
    pub sep_witness: (usize, usize),
    /// Largest gauge over the average range `{(f(s) - f(t)) / d(s, t)}`.
    #[serde(with = "extended_float")]
    pub ave_range_max_gauge: f64,
    pub pairs: u64,
    /// `sep_norm > 0` and `lip_gauge` finite.
    pub certificate: bool,
}

/// Floats that may be infinite, written as `"inf"` in JSON.
mod extended_float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else if *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Exhaustive scan over all vertex pairs.
pub fn distortion_report(e: &Embedding) -> Result<DistortionReport> {
    let n = e.graph.len();
    if n < 2 {
        return Err(Error::invalid("distortion needs at least two vertices"));
    }
    let gauge = PreparedGauge::new(&e.body);
    type Best = ((f64, (usize, usize)), (f64, (usize, usize)));
    let per_row: Vec<Best> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut lip = (f64::NEG_INFINITY, (i, i));
            let mut sep = (f64::INFINITY, (i, i));
            for j in i + 1..n {
                let d = e.graph.dist(i, j) as f64;
                let diff = &e.map[i] - &e.map[j];
                let g = gauge.eval(&diff)? / d;
                let s = e.ambient.eval(diff.coords()) / d;
                if g > lip.0 {
                    lip = (g, (i, j));
                }
                if s < sep.0 {
                    sep = (s, (i, j));
                }
            }
            Ok((lip, sep))
        })
        .collect::<Result<_>>()?;
    let mut lip = (f64::NEG_INFINITY, (0, 0));
    let mut sep = (f64::INFINITY, (0, 0));
    for (l, s) in per_row {
        if l.0 > lip.0 {
            lip = l;
        }
        if s.0 < sep.0 {
            sep = s;
        }
    }
    Ok(DistortionReport {
        lip_gauge: lip.0,
        lip_witness: lip.1,
        sep_norm: sep.0,
        sep_witness: sep.1,
        ave_range_max_gauge: lip.0,
        pairs: (n * (n - 1) / 2) as u64,
        certificate: sep.0 > 0.0 && lip.0.is_finite(),
    })
}

/// Depth-first preorder index of `node` in `T_height`, visiting the 0-subtree first.
pub fn preorder_label(node: &TreeNode, height: usize) -> usize {
    node.bits()
        .iter()
        .enumerate()
        .map(|(j, &b)| if b == 0 { 1 } else { 1usize << (height - j) })
        .sum()
}

fn tree_points(height: usize) -> usize {
    (1usize << (height + 1)) - 1
}

fn bourgain_images(points: &[Vector], height: usize, depth: usize, skip_root: bool) -> Vec<Vector> {
    let dim = points[0].dim();
    TreeNode::all(depth)
        .iter()
        .map(|s| {
            let mut out = vec![0.0; dim];
            let start = usize::from(skip_root);
            for k in start..=s.depth() {
                let prefix = TreeNode::new(s.bits()[..k].to_vec()).expect("bits");
                for (o, x) in out
                    .iter_mut()
                    .zip(points[preorder_label(&prefix, height)].coords())
                {
                    *o += x;
                }
            }
            Vector::new(out).expect("finite")
        })
        .collect()
}

/// `f(s) = sum_{t ⪯ s} x_{σ(t)}` on `T_height`, with σ the preorder labelling.
pub fn bourgain_map(points: &[Vector], height: usize) -> Result<Vec<Vector>> {
    let needed = tree_points(height);
    if points.len() < needed {
        return Err(Error::InsufficientPoints {
            found: points.len(),
            needed,
        });
    }
    Ok(bourgain_images(points, height, height, false))
}

/// Bourgain's map of `T_height` built on the points of a James system, with `K` their absolute hull.
pub fn bourgain_embedding(sys: &JamesSystem, height: usize) -> Result<Embedding> {
    let map = bourgain_map(&sys.points, height)?;
    let dim = sys.points[0].dim();
    let body = ConvexBody::abs_hull(PointSet::new(dim, sys.norm, sys.points.clone())?)?;
    Embedding::new(binary_tree(height)?, map, sys.norm, body)
}

/// Blocks whose coefficient is nonzero somewhere on `T_depth`.
pub fn baudier_blocks_needed(depth: usize) -> usize {
    match depth {
        0 => 0,
        d => d.ilog2() as usize + 1 + usize::from(!d.is_power_of_two()),
    }
}

/// Gluing weights `(n, lambda)` at depth `k >= 1`: `f = lambda f_n + (1 - lambda) f_{n+1}`.
pub fn baudier_weights(k: usize) -> (usize, f64) {
    let n = k.ilog2() as usize;
    let lambda = ((1usize << (n + 1)) - k) as f64 / (1usize << n) as f64;
    (n, lambda)
}

/// Barycentric gluing of per-block Bourgain maps into a map of `T_depth`.
///
/// Block `n` is mapped onto `T_{2^{n+1}}` with the root sent to 0. Blocks must
/// have pairwise disjoint coordinate supports; `K` is the absolute hull of all
/// block points.
pub fn baudier_embedding(blocks: &[JamesSystem], depth: usize) -> Result<Embedding> {
    let needed = baudier_blocks_needed(depth);
    if blocks.len() < needed.max(1) {
        return Err(Error::invalid(format!(
            "depth {depth} needs {} blocks, got {}",
            needed.max(1),
            blocks.len()
        )));
    }
    let dim = blocks[0].points[0].dim();
    let norm = blocks[0].norm;
    for b in blocks {
        if b.norm != norm {
            return Err(Error::invalid("blocks must share the ambient norm"));
        }
        for p in &b.points {
            p.check_dim(dim)?;
        }
    }
    check_disjoint_supports(blocks, dim)?;
    let maps: Vec<Vec<Vector>> = blocks[..needed]
        .iter()
        .enumerate()
        .map(|(n, b)| {
            let height = 1usize << (n + 1);
            let want = tree_points(height);
            if b.points.len() < want {
                return Err(Error::InsufficientPoints {
                    found: b.points.len(),
                    needed: want,
                });
            }
            Ok(bourgain_images(&b.points, height, depth.min(height), true))
        })
        .collect::<Result<_>>()?;
    let image = |n: usize, s: &TreeNode| -> &Vector { &maps[n][s.heap_index()] };
    let map = TreeNode::all(depth)
        .iter()
        .map(|s| {
            if s.depth() == 0 {
                return Vector::zeros(dim);
            }
            let (n, lambda) = baudier_weights(s.depth());
            if lambda == 1.0 {
                image(n, s).clone()
            } else {
                Vector::combination(&[image(n, s), image(n + 1, s)], &[lambda, 1.0 - lambda])
            }
        })
        .collect();
    let all: Vec<Vector> = blocks
        .iter()
        .flat_map(|b| b.points.iter().cloned())
        .collect();
    let body = ConvexBody::abs_hull(PointSet::new(dim, norm, all)?)?;
    Embedding::new(binary_tree(depth)?, map, norm, body)
}

fn check_disjoint_supports(blocks: &[JamesSystem], dim: usize) -> Result<()> {
    let mut owner: Vec<Option<usize>> = vec![None; dim];
    for (b, sys) in blocks.iter().enumerate() {
        for p in &sys.points {
            for (i, &c) in p.coords().iter().enumerate() {
                if c != 0.0 {
                    match owner[i] {
                        Some(o) if o != b => {
                            return Err(Error::invalid(format!(
                                "blocks {o} and {b} share coordinate {i}"
                            )))
                        }
                        _ => owner[i] = Some(b),
                    }
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneRound {
    /// Height of the tree fed into this round.
    pub height: usize,
    pub lip_gauge: f64,
    pub sep_norm: f64,
    /// `delta(theta)` for the body.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    /// Kept node, as bits in the input tree.
    pub node: TreeNode,
    /// Chosen grandchild for each child route (`0` then `1`).
    pub grandchildren: [TreeNode; 2],
    /// `|f(node) - f(grandchild)|_K` for each route.
    pub gauges: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneTrace {
    pub theta: f64,
    /// One entry per input tree, then the final tree.
    pub rounds: Vec<PruneRound>,
    pub selections: Vec<Vec<Selection>>,
}

/// One round of the fork argument: `T_N` to `T_{N/2}`.
///
/// Every kept node routes through both of its children; on each route the
/// grandchild closest in the gauge is kept. The new map is `f / 2` on the
/// kept nodes, which keeps `theta`-separation and turns the edge bound
/// `2 (C - delta(theta))` into `C - delta(theta)`.
pub fn kloeckner_prune(e: &Embedding) -> Result<(Embedding, Vec<Selection>)> {
    if e.graph.family != GraphFamily::Tree {
        return Err(Error::invalid("fork pruning needs a tree embedding"));
    }
    let height = e.graph.level;
    if height == 0 || height % 2 == 1 {
        return Err(Error::invalid(format!(
            "tree height must be even and positive, got {height}"
        )));
    }
    let gauge = PreparedGauge::new(&e.body);
    let at = |s: &TreeNode| &e.map[s.heap_index()];
    let new_height = height / 2;
    let new_nodes = TreeNode::all(new_height);
    // old[k] is the input-tree node kept as new node k.
    let mut old: Vec<TreeNode> = Vec::with_capacity(new_nodes.len());
    let mut selections = Vec::new();
    for (k, s) in new_nodes.iter().enumerate() {
        let here = if k == 0 {
            TreeNode::root()
        } else {
            let parent = &old[(k - 1) / 2];
            let sel: &Selection = selections
                .iter()
                .find(|x: &&Selection| &x.node == parent)
                .expect("parent selected before child");
            sel.grandchildren[*s.bits().last().expect("non-root") as usize].clone()
        };
        if s.depth() < new_height {
            let mut grandchildren = [TreeNode::root(), TreeNode::root()];
            let mut gauges = [0.0; 2];
            for route in 0..2u8 {
                let child = here.child(route);
                let mut best: Option<(f64, TreeNode)> = None;
                for g in 0..2u8 {
                    let gc = child.child(g);
                    let val = gauge.eval(&(at(&here) - at(&gc)))?;
                    if best.as_ref().is_none_or(|(b, _)| val < *b) {
                        best = Some((val, gc));
                    }
                }
                let (val, gc) = best.expect("two candidates");
                grandchildren[route as usize] = gc;
                gauges[route as usize] = val;
            }
            selections.push(Selection {
                node: here.clone(),
                grandchildren,
                gauges,
            });
        }
        old.push(here);
    }
    let map = old.iter().map(|s| at(s).scale(0.5)).collect();
    let pruned = Embedding::new(binary_tree(new_height)?, map, e.ambient, e.body.clone())?;
    Ok((pruned, selections))
}

/// Repeated pruning; checks first that `e` is `theta`-separated with `lip_gauge <= 1`.
pub fn kloeckner_iterate(
    e: &Embedding,
    theta: f64,
    delta: &DeltaEvaluator,
    rounds: usize,
) -> Result<(Embedding, PruneTrace)> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(Error::invalid(format!("theta must be > 0, got {theta}")));
    }
    let d = delta.eval(theta);
    let mut current = e.clone();
    let mut trace = PruneTrace {
        theta,
        rounds: Vec::new(),
        selections: Vec::new(),
    };
    for round in 0..=rounds {
        let report = distortion_report(&current)?;
        if report.sep_norm < theta - PRECONDITION_TOL {
            return Err(Error::Infeasible(format!(
                "embedding is only {}-separated, below theta = {theta}",
                report.sep_norm
            )));
        }
        if report.lip_gauge > 1.0 + PRECONDITION_TOL {
            return Err(Error::invalid(format!(
                "lip_gauge {} exceeds 1; rescale the map into K first",
                report.lip_gauge
            )));
        }
        trace.rounds.push(PruneRound {
            height: current.graph.level,
            lip_gauge: report.lip_gauge,
            sep_norm: report.sep_norm,
            delta: d,
        });
        if round == rounds {
            break;
        }
        let (next, sel) = kloeckner_prune(&current)?;
        trace.selections.push(sel);
        current = next;
    }
    Ok((current, trace))
}

/// `x_k = χ_{[1..k]} / sqrt(n)` with coordinate functionals: a James system in `l_2` with `theta = 1/sqrt(n)`.
pub fn l2_james_system(n: usize) -> Result<JamesSystem> {
    if n == 0 {
        return Err(Error::invalid("need n >= 1"));
    }
    let s = 1.0 / (n as f64).sqrt();
    let points = (1..=n)
        .map(|k| Vector::new((0..n).map(|i| if i < k { s } else { 0.0 }).collect()))
        .collect::<Result<_>>()?;
    let functionals = (0..n).map(|i| Vector::basis(n, i)).collect();
    JamesSystem::new(s, AmbientNorm::L2, points, functionals)
}

/// `f(s) = sum_{t ⪯ s} e_{σ(t)}` in `R^{2^{N+1}-1}`: unit orthogonal increments along every edge.
pub fn orthonormal_tree(height: usize, body: ConvexBody) -> Result<Embedding> {
    let n = tree_points(height);
    let basis: Vec<Vector> = (0..n).map(|i| Vector::basis(n, i)).collect();
    Embedding::new(
        binary_tree(height)?,
        bourgain_map(&basis, height)?,
        AmbientNorm::L2,
        body,
    )
}
