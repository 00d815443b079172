//! Canonical inputs shared by the tests, benches and the command line.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dentability::distance_to_set_function;
use crate::error::{Error, Result};
use crate::families::{block_family, schreier, to_points, SetFamily};
use crate::geometry::{AmbientNorm, ConvexBody, PointSet, PreparedGauge, Vector, WeakTail};
use crate::james::{tree_from_points, JamesSystem};

/// `χ_{[1..m]}` for `m = 1..n` in `R^n`.
pub fn sb_points(n: usize) -> Result<Vec<Vector>> {
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    (1..=n)
        .map(|m| Vector::new((0..n).map(|i| if i < m { 1.0 } else { 0.0 }).collect()))
        .collect()
}

/// The summing-basis set `SB(n)` under the sup norm.
pub fn sb(n: usize) -> Result<PointSet> {
    PointSet::new(n, AmbientNorm::Linf, sb_points(n)?)
}

/// `SB(n)` with coordinate functionals: `e*_j(χ_{[1..m]}) = 1` iff `j <= m`.
pub fn sb_james(n: usize) -> Result<JamesSystem> {
    let functionals = (0..n).map(|i| Vector::basis(n, i)).collect();
    JamesSystem::new(1.0, AmbientNorm::Linf, sb_points(n)?, functionals)
}

/// Characteristic vectors of `block_family(n_max)` with the origin as the weak limit of the omitted blocks.
pub fn blocks(n_max: usize) -> Result<PointSet> {
    to_points(&block_family(n_max)?, AmbientNorm::Linf)?.with_weak_tail(WeakTail {
        limit: 0,
        separation: 1.0,
    })
}

pub fn schreier_family(n: usize) -> Result<SetFamily> {
    schreier(n)
}

/// `count` points of the Euclidean unit ball in `R^d`: half on the sphere, half inside.
///
/// In the plane the sphere half is evenly spaced by angle; otherwise it is drawn from
/// normalized Gaussians. Interior points are uniform in the ball. Both use `seed`.
pub fn l2ball_net(d: usize, count: usize, seed: u64) -> Result<PointSet> {
    if d == 0 || count == 0 {
        return Err(Error::invalid("need d >= 1 and count >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let boundary = count.div_ceil(2);
    let mut pts = Vec::with_capacity(count);
    for k in 0..boundary {
        if d == 2 {
            let a = std::f64::consts::TAU * k as f64 / boundary as f64;
            pts.push(Vector::new(vec![a.cos(), a.sin()])?);
        } else {
            pts.push(gaussian_direction(&mut rng, d));
        }
    }
    while pts.len() < count {
        let r = rng.random::<f64>().powf(1.0 / d as f64);
        pts.push(gaussian_direction(&mut rng, d).scale(r));
    }
    PointSet::new(d, AmbientNorm::L2, pts)
}

fn gaussian_direction(rng: &mut ChaCha8Rng, d: usize) -> Vector {
    loop {
        let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = AmbientNorm::L2.eval(&g);
        if n > 1e-12 {
            return Vector::new(g.into_iter().map(|x| x / n).collect()).expect("finite");
        }
    }
}

/// `count` seeded points of a body in `R^dim`: a Gaussian direction scaled to the
/// boundary, then by `U^{1/dim}`.
pub fn random_points_in_body(
    body: &ConvexBody,
    dim: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<Vector>> {
    if let Some(d) = body.dim() {
        if d != dim {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: dim,
            });
        }
    }
    let gauge = PreparedGauge::new(body);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        if attempts > 100 * count.max(1) {
            return Err(Error::Infeasible(
                "body has empty interior in the sampled directions".into(),
            ));
        }
        let g = gaussian_direction(&mut rng, dim);
        let k = gauge.eval(&g)?;
        if !(k.is_finite() && k > 0.0) {
            continue;
        }
        let r = rng.random::<f64>().powf(1.0 / dim as f64);
        out.push(g.scale(r / k));
    }
    Ok(out)
}

/// Disjointly supported SB blocks for barycentric gluing up to depth `depth`.
///
/// Block `n` is the chain `χ_{F_{N,1}}, ..., χ_{F_{N,N}}` of one block of the block
/// family, with `N = 2^{2^{n+1}+1} - 1`, kept on its own coordinates only.
pub fn baudier_blocks(depth: usize) -> Result<Vec<JamesSystem>> {
    let count = crate::embed::baudier_blocks_needed(depth).max(1);
    let sizes: Vec<usize> = (0..count)
        .map(|n| (1usize << ((1 << (n + 1)) + 1)) - 1)
        .collect();
    let dim: usize = sizes.iter().sum();
    if dim > 4096 {
        return Err(Error::BudgetExceeded {
            what: format!("gluing blocks for depth {depth} ({dim} coordinates)"),
            cap: 4096,
        });
    }
    let mut offset = 0;
    let mut out = Vec::with_capacity(count);
    for size in sizes {
        let point = |m: usize| {
            let mut c = vec![0.0; dim];
            c[offset..offset + m].fill(1.0);
            Vector::new(c)
        };
        let points = (1..=size).map(point).collect::<Result<_>>()?;
        let functionals = (0..size).map(|i| Vector::basis(dim, offset + i)).collect();
        out.push(JamesSystem::new(
            1.0,
            AmbientNorm::Linf,
            points,
            functionals,
        )?);
        offset += size;
    }
    Ok(out)
}

/// A midpoint tree of height `height` averaged from `SB(2^height)`, with `f` the
/// distance to its odd-level nodes.
///
/// Returns the node set (breadth-first order), the values and the node depths.
pub fn odd_level_tree(height: usize) -> Result<(PointSet, Vec<f64>, Vec<usize>)> {
    if height > 10 {
        return Err(Error::invalid("height must be <= 10"));
    }
    let tree = tree_from_points(&sb_points(1 << height)?, AmbientNorm::Linf)?;
    let points: Vec<Vector> = tree.nodes.iter().map(|n| n.point.clone()).collect();
    let depths: Vec<usize> = tree.nodes.iter().map(|n| n.bits.len()).collect();
    let set = PointSet::new(points[0].dim(), AmbientNorm::Linf, points.clone())?;
    if set.len() != points.len() {
        return Err(Error::Verification("tree nodes are not distinct".into()));
    }
    let odd: Vec<Vector> = points
        .iter()
        .zip(&depths)
        .filter(|(_, d)| *d % 2 == 1)
        .map(|(p, _)| p.clone())
        .collect();
    let targets = PointSet::new(set.dim(), AmbientNorm::Linf, odd)?;
    let values = distance_to_set_function(&set, &targets)?;
    Ok((set, values, depths))
}

/// A named fixture as accepted on the command line, e.g. `sb(3)` or `l2ball-net(2,64,7)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fixture {
    Sb(usize),
    Blocks(usize),
    Schreier(usize),
    L2BallNet { d: usize, count: usize, seed: u64 },
}

impl Fixture {
    /// File stem used when writing the fixture.
    pub fn file_stem(&self) -> String {
        match self {
            Fixture::Sb(n) => format!("sb{n}"),
            Fixture::Blocks(n) => format!("blocks{n}"),
            Fixture::Schreier(n) => format!("schreier{n}"),
            Fixture::L2BallNet { d, count, seed } => format!("l2ball-net-{d}-{count}-{seed}"),
        }
    }

    pub fn to_json(&self) -> Result<serde_json::Value> {
        let v = match *self {
            Fixture::Sb(n) => serde_json::to_value(sb(n)?),
            Fixture::Blocks(n) => serde_json::to_value(blocks(n)?),
            Fixture::Schreier(n) => serde_json::to_value(schreier_family(n)?),
            Fixture::L2BallNet { d, count, seed } => {
                serde_json::to_value(l2ball_net(d, count, seed)?)
            }
        };
        v.map_err(|e| Error::Verification(format!("serialization failed: {e}")))
    }
}

impl fmt::Display for Fixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fixture::Sb(n) => write!(f, "sb({n})"),
            Fixture::Blocks(n) => write!(f, "blocks({n})"),
            Fixture::Schreier(n) => write!(f, "schreier({n})"),
            Fixture::L2BallNet { d, count, seed } => write!(f, "l2ball-net({d},{count},{seed})"),
        }
    }
}

impl FromStr for Fixture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("unknown fixture {s:?}"));
        let (name, rest) = s.trim().split_once('(').ok_or_else(bad)?;
        let args = rest.strip_suffix(')').ok_or_else(bad)?;
        let nums: Vec<u64> = args
            .split(',')
            .map(|a| a.trim().parse::<u64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let one = || match nums.as_slice() {
            [n] => Ok(*n as usize),
            _ => Err(bad()),
        };
        match name.trim() {
            "sb" => Ok(Fixture::Sb(one()?)),
            "blocks" => Ok(Fixture::Blocks(one()?)),
            "schreier" => Ok(Fixture::Schreier(one()?)),
            "l2ball-net" => match nums.as_slice() {
                [d, count, seed] => Ok(Fixture::L2BallNet {
                    d: *d as usize,
                    count: *count as usize,
                    seed: *seed,
                }),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }
}
