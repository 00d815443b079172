//! Binary trees, diamond graphs and Laakso graphs with their shortest-path metrics.

use std::collections::VecDeque;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_TREE_HEIGHT: usize = 12;
pub const MAX_DIAMOND_LEVEL: usize = 6;
pub const MAX_LAAKSO_LEVEL: usize = 4;

/// A node of the dyadic tree: a finite 0/1 sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TreeNode {
    bits: Vec<u8>,
}

impl TreeNode {
    pub fn root() -> Self {
        TreeNode { bits: Vec::new() }
    }

    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::invalid("tree node bits must be 0 or 1"));
        }
        Ok(TreeNode { bits })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn depth(&self) -> usize {
        self.bits.len()
    }

    pub fn child(&self, b: u8) -> TreeNode {
        let mut bits = self.bits.clone();
        bits.push(b);
        TreeNode { bits }
    }

    pub fn parent(&self) -> Option<TreeNode> {
        let (_, rest) = self.bits.split_last()?;
        Some(TreeNode {
            bits: rest.to_vec(),
        })
    }

    /// `self ⪯ other`: `self` is a prefix of `other`.
    pub fn is_ancestor_of(&self, other: &TreeNode) -> bool {
        other.bits.starts_with(&self.bits)
    }

    /// Position in breadth-first order: `2^|s| - 1 + value(s)`.
    pub fn heap_index(&self) -> usize {
        let value = self.bits.iter().fold(0usize, |v, &b| 2 * v + b as usize);
        (1usize << self.bits.len()) - 1 + value
    }

    pub fn from_heap_index(index: usize) -> TreeNode {
        let depth = (usize::BITS - (index + 1).leading_zeros() - 1) as usize;
        let value = index + 1 - (1usize << depth);
        TreeNode {
            bits: (0..depth)
                .map(|j| (value >> (depth - 1 - j) & 1) as u8)
                .collect(),
        }
    }

    /// All nodes of `T_N` in breadth-first order.
    pub fn all(height: usize) -> Vec<TreeNode> {
        (0..(1usize << (height + 1)) - 1)
            .map(TreeNode::from_heap_index)
            .collect()
    }
}

impl fmt::Display for TreeNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl TryFrom<String> for TreeNode {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::invalid(format!("bad tree node {s:?}"))),
            })
            .collect::<Result<_>>()?;
        Ok(TreeNode { bits })
    }
}

impl From<TreeNode> for String {
    fn from(n: TreeNode) -> Self {
        n.to_string()
    }
}

/// `|s| + |t| - 2|a|` with `a` the longest common prefix.
pub fn tree_distance(s: &TreeNode, t: &TreeNode) -> usize {
    let common = s
        .bits
        .iter()
        .zip(&t.bits)
        .take_while(|(a, b)| a == b)
        .count();
    s.depth() + t.depth() - 2 * common
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphFamily {
    Tree,
    Diamond,
    Laakso,
}

impl fmt::Display for GraphFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphFamily::Tree => "tree",
            GraphFamily::Diamond => "diamond",
            GraphFamily::Laakso => "laakso",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricGraph {
    pub family: GraphFamily,
    pub level: usize,
    /// Tree vertices are bit strings; diamond and Laakso vertices are `s`, `t`,
    /// or `<level>.<edge>.<role>` for the vertices inserted on an edge.
    pub vertices: Vec<String>,
    pub edges: Vec<[u32; 2]>,
    #[serde(skip)]
    dist: Vec<u16>,
}

impl MetricGraph {
    fn build(
        family: GraphFamily,
        level: usize,
        vertices: Vec<String>,
        edges: Vec<[u32; 2]>,
    ) -> Result<Self> {
        let n = vertices.len();
        let mut adj = vec![Vec::new(); n];
        for &[u, v] in &edges {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        let rows: Vec<Vec<u16>> = (0..n).into_par_iter().map(|s| bfs(&adj, s)).collect();
        if rows.iter().flatten().any(|&d| d == u16::MAX) {
            return Err(Error::invalid("graph is disconnected"));
        }
        Ok(MetricGraph {
            family,
            level,
            vertices,
            edges,
            dist: rows.concat(),
        })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn dist(&self, i: usize, j: usize) -> usize {
        self.dist[i * self.len() + j] as usize
    }

    pub fn dist_row(&self, i: usize) -> &[u16] {
        let n = self.len();
        &self.dist[i * n..(i + 1) * n]
    }

    pub fn diameter(&self) -> usize {
        self.dist.iter().copied().max().unwrap_or(0) as usize
    }

    /// The two original endpoints of a diamond or Laakso graph.
    pub fn endpoints(&self) -> Option<(usize, usize)> {
        (self.family != GraphFamily::Tree).then_some((0, 1))
    }

    /// Tree node of vertex `i`, for trees.
    pub fn tree_node(&self, i: usize) -> Option<TreeNode> {
        (self.family == GraphFamily::Tree).then(|| TreeNode::from_heap_index(i))
    }

    /// Exhaustive check of symmetry, zero diagonal, positivity and the triangle inequality.
    pub fn check_metric(&self) -> MetricCheck {
        let n = self.len();
        let mut check = MetricCheck {
            symmetric: true,
            zero_diagonal: true,
            positive: true,
            triangle: true,
        };
        for i in 0..n {
            check.zero_diagonal &= self.dist(i, i) == 0;
            for j in 0..n {
                check.symmetric &= self.dist(i, j) == self.dist(j, i);
                check.positive &= i == j || self.dist(i, j) > 0;
            }
        }
        check.triangle = (0..n).into_par_iter().all(|i| {
            let ri = self.dist_row(i);
            (0..n).all(|k| {
                let dik = ri[k];
                let rk = self.dist_row(k);
                ri.iter().zip(rk).all(|(&dij, &dkj)| dij <= dik + dkj)
            })
        });
        check
    }

    /// Tree distances against the closed formula on all pairs.
    pub fn check_tree_formula(&self) -> Option<bool> {
        if self.family != GraphFamily::Tree {
            return None;
        }
        let nodes = TreeNode::all(self.level);
        Some((0..self.len()).into_par_iter().all(|i| {
            (0..self.len()).all(|j| self.dist(i, j) == tree_distance(&nodes[i], &nodes[j]))
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricCheck {
    pub symmetric: bool,
    pub zero_diagonal: bool,
    pub positive: bool,
    pub triangle: bool,
}

impl MetricCheck {
    pub fn ok(&self) -> bool {
        self.symmetric && self.zero_diagonal && self.positive && self.triangle
    }
}

fn bfs(adj: &[Vec<u32>], source: usize) -> Vec<u16> {
    let mut dist = vec![u16::MAX; adj.len()];
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            let v = v as usize;
            if dist[v] == u16::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

fn level_cap(what: &str, level: usize, cap: usize) -> Result<()> {
    if level > cap {
        return Err(Error::BudgetExceeded {
            what: format!("{what} of level {level}"),
            cap: cap as u64,
        });
    }
    Ok(())
}

/// `T_N` with parent-child edges; vertices in breadth-first order.
pub fn binary_tree(height: usize) -> Result<MetricGraph> {
    level_cap("binary tree", height, MAX_TREE_HEIGHT)?;
    let nodes = TreeNode::all(height);
    let edges = (1..nodes.len())
        .map(|i| [((i - 1) / 2) as u32, i as u32])
        .collect();
    MetricGraph::build(
        GraphFamily::Tree,
        height,
        nodes.iter().map(ToString::to_string).collect(),
        edges,
    )
}

/// Repeatedly replaces every edge `{u, v}` by `gadget`, starting from a single edge `s - t`.
///
/// `gadget` lists edges over local labels: 0 is `u`, 1 is `v`, and `2..` are
/// the fresh vertices named by `roles`.
fn replace_edges(
    family: GraphFamily,
    level: usize,
    roles: &[&str],
    gadget: &[[u32; 2]],
) -> Result<MetricGraph> {
    let mut vertices = vec!["s".to_string(), "t".to_string()];
    let mut edges = vec![[0u32, 1u32]];
    for step in 1..=level {
        let mut next = Vec::with_capacity(edges.len() * gadget.len());
        for (e, &[u, v]) in edges.iter().enumerate() {
            let base = vertices.len() as u32;
            vertices.extend(roles.iter().map(|r| format!("{step}.{e}.{r}")));
            let local = |x: u32| match x {
                0 => u,
                1 => v,
                k => base + k - 2,
            };
            next.extend(gadget.iter().map(|&[a, b]| [local(a), local(b)]));
        }
        edges = next;
    }
    MetricGraph::build(family, level, vertices, edges)
}

/// `D_k`: each edge becomes two disjoint paths of length 2.
pub fn diamond(level: usize) -> Result<MetricGraph> {
    level_cap("diamond graph", level, MAX_DIAMOND_LEVEL)?;
    replace_edges(
        GraphFamily::Diamond,
        level,
        &["a", "b"],
        &[[0, 2], [2, 1], [0, 3], [3, 1]],
    )
}

/// `L_k`: each edge becomes `u-a, a-b1, a-b2, b1-c, b2-c, c-v`.
pub fn laakso(level: usize) -> Result<MetricGraph> {
    level_cap("Laakso graph", level, MAX_LAAKSO_LEVEL)?;
    replace_edges(
        GraphFamily::Laakso,
        level,
        &["a", "b1", "b2", "c"],
        &[[0, 2], [2, 3], [2, 4], [3, 5], [4, 5], [5, 1]],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(s: &str) -> TreeNode {
        TreeNode::try_from(s.to_string()).unwrap()
    }

    #[test]
    fn tree_distance_examples() {
        assert_eq!(tree_distance(&node("01"), &node("01")), 0);
        assert_eq!(tree_distance(&node("00"), &node("01")), 2);
        assert_eq!(tree_distance(&node(""), &node("101")), 3);
    }

    #[test]
    fn heap_indices_round_trip() {
        for i in 0..63 {
            assert_eq!(TreeNode::from_heap_index(i).heap_index(), i);
        }
        assert_eq!(node("10").heap_index(), 5);
        assert!(node("1").is_ancestor_of(&node("10")));
        assert!(!node("0").is_ancestor_of(&node("10")));
    }

    #[test]
    fn trees() {
        assert_eq!(binary_tree(0).unwrap().len(), 1);
        let t2 = binary_tree(2).unwrap();
        assert_eq!(t2.len(), 7);
        assert_eq!(t2.diameter(), 4);
        let t5 = binary_tree(5).unwrap();
        assert_eq!(t5.len(), 63);
        assert_eq!(t5.check_tree_formula(), Some(true));
        assert!(t5.check_metric().ok());
        assert!(binary_tree(13).is_err());
    }

    #[test]
    fn diamonds() {
        let d0 = diamond(0).unwrap();
        assert_eq!((d0.len(), d0.dist(0, 1)), (2, 1));
        let d1 = diamond(1).unwrap();
        assert_eq!(d1.len(), 4);
        assert_eq!(d1.dist(2, 3), 2);
        let d2 = diamond(2).unwrap();
        assert_eq!((d2.len(), d2.edges.len()), (12, 16));
        assert_eq!(d2.dist(0, 1), 4);
        assert!(d2.check_metric().ok());
    }

    #[test]
    fn laakso_graphs() {
        assert_eq!(laakso(0).unwrap().dist(0, 1), 1);
        let l1 = laakso(1).unwrap();
        assert_eq!((l1.len(), l1.edges.len()), (6, 6));
        assert_eq!(l1.dist(0, 1), 4);
        let b1 = l1.vertices.iter().position(|v| v == "1.0.b1").unwrap();
        let b2 = l1.vertices.iter().position(|v| v == "1.0.b2").unwrap();
        assert_eq!(l1.dist(b1, b2), 2);
        let l2 = laakso(2).unwrap();
        assert_eq!((l2.len(), l2.edges.len()), (30, 36));
        assert!(l2.check_metric().ok());
    }

    #[test]
    fn graph_json() {
        let g = diamond(1).unwrap();
        let v = serde_json::to_value(&g).unwrap();
        assert_eq!(v["family"], "diamond");
        assert_eq!(v["level"], 1);
        assert_eq!(v["edges"][0], serde_json::json!([0, 2]));
        assert_eq!(serde_json::to_value(node("")).unwrap(), "");
    }
}
