//! Families of finite subsets of `{1..N}`: generators, traces, VC extraction,
//! and export to characteristic vectors.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{AmbientNorm, HalfSpace, PointSet, Vector};

/// Largest universe handled; sets are stored as 64-bit masks internally.
pub const MAX_UNIVERSE: usize = 64;
/// Cap on the number of member sets a generator may produce.
pub const MAX_FAMILY_SIZE: u64 = 1 << 22;
/// Largest ground set accepted by [`vc_extract`].
pub const MAX_VC_GROUND: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FamilyRepr", into = "FamilyRepr")]
pub struct SetFamily {
    n: usize,
    sets: Vec<Vec<u32>>,
}

#[derive(Serialize, Deserialize)]
struct FamilyRepr {
    #[serde(rename = "N")]
    n: usize,
    sets: Vec<Vec<u32>>,
}

impl TryFrom<FamilyRepr> for SetFamily {
    type Error = Error;
    fn try_from(r: FamilyRepr) -> Result<Self> {
        SetFamily::new(r.n, r.sets)
    }
}

impl From<SetFamily> for FamilyRepr {
    fn from(f: SetFamily) -> Self {
        FamilyRepr {
            n: f.n,
            sets: f.sets,
        }
    }
}

fn mask_of(set: &[u32]) -> u64 {
    set.iter().fold(0, |m, &k| m | 1u64 << (k - 1))
}

fn set_of(mask: u64) -> Vec<u32> {
    (0..64)
        .filter(|b| mask >> b & 1 == 1)
        .map(|b| b + 1)
        .collect()
}

fn check_universe(n: usize) -> Result<()> {
    if n == 0 || n > MAX_UNIVERSE {
        return Err(Error::invalid(format!(
            "universe size must be in 1..={MAX_UNIVERSE}, got {n}"
        )));
    }
    Ok(())
}

fn check_subset(n: usize, a: &[u32]) -> Result<u64> {
    if let Some(&k) = a.iter().find(|&&k| k == 0 || k as usize > n) {
        return Err(Error::invalid(format!("element {k} outside [1, {n}]")));
    }
    Ok(mask_of(a))
}

impl SetFamily {
    /// Sorts each set, removes duplicate sets, and orders the family lexicographically.
    pub fn new(n: usize, sets: Vec<Vec<u32>>) -> Result<Self> {
        check_universe(n)?;
        let mut clean = BTreeSet::new();
        for mut s in sets {
            check_subset(n, &s)?;
            s.sort_unstable();
            let len = s.len();
            s.dedup();
            if s.len() != len {
                return Err(Error::invalid("member sets must not repeat elements"));
            }
            clean.insert(s);
        }
        Ok(SetFamily {
            n,
            sets: clean.into_iter().collect(),
        })
    }

    pub fn universe_size(&self) -> usize {
        self.n
    }

    pub fn sets(&self) -> &[Vec<u32>] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    fn masks(&self) -> Vec<u64> {
        self.sets.iter().map(|s| mask_of(s)).collect()
    }
}

/// `{∅} ∪ {F ⊆ [1..N] : |F| <= min F}`.
pub fn schreier(n: usize) -> Result<SetFamily> {
    check_universe(n)?;
    fn grow(
        n: u32,
        cap: usize,
        cur: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
        budget: &mut u64,
    ) -> Result<()> {
        out.push(cur.clone());
        *budget += 1;
        if *budget > MAX_FAMILY_SIZE {
            return Err(Error::BudgetExceeded {
                what: "Schreier family".into(),
                cap: MAX_FAMILY_SIZE,
            });
        }
        if cur.len() == cap {
            return Ok(());
        }
        let next = cur.last().map_or(1, |&k| k + 1);
        for k in next..=n {
            cur.push(k);
            grow(n, cap, cur, out, budget)?;
            cur.pop();
        }
        Ok(())
    }
    let mut out = vec![Vec::new()];
    let mut budget = 0;
    for first in 1..=n as u32 {
        let mut cur = vec![first];
        grow(n as u32, first as usize, &mut cur, &mut out, &mut budget)?;
    }
    SetFamily::new(n, out)
}

/// `F_{n,m} = {k : n(n-1)/2 < k <= n(n-1)/2 + m}`.
pub fn block_set(n: u32, m: u32) -> Vec<u32> {
    let base = n * (n - 1) / 2;
    (base + 1..=base + m).collect()
}

/// `{∅} ∪ {F_{n,m} : 1 <= m <= n <= n_max}` on the universe `[1..n_max(n_max+1)/2]`.
pub fn block_family(n_max: usize) -> Result<SetFamily> {
    if n_max == 0 {
        return Err(Error::invalid("n_max must be >= 1"));
    }
    let universe = n_max * (n_max + 1) / 2;
    check_universe(universe)?;
    let mut sets = vec![Vec::new()];
    for n in 1..=n_max as u32 {
        for m in 1..=n {
            sets.push(block_set(n, m));
        }
    }
    SetFamily::new(universe, sets)
}

/// All subsets of `[1..N]` with at most `p` elements.
pub fn bounded_card_family(n: usize, p: usize) -> Result<SetFamily> {
    check_universe(n)?;
    if p > n {
        return Err(Error::invalid(format!("p = {p} exceeds N = {n}")));
    }
    let total: u64 = (0..=p as u64).map(|j| binomial(n as u64, j)).sum();
    if total > MAX_FAMILY_SIZE {
        return Err(Error::BudgetExceeded {
            what: "bounded-cardinality family".into(),
            cap: MAX_FAMILY_SIZE,
        });
    }
    let mut sets = Vec::new();
    let mut stack: Vec<Vec<u32>> = vec![Vec::new()];
    while let Some(cur) = stack.pop() {
        if cur.len() < p {
            let next = cur.last().map_or(1, |&k| k + 1);
            for k in next..=n as u32 {
                let mut s = cur.clone();
                s.push(k);
                stack.push(s);
            }
        }
        sets.push(cur);
    }
    SetFamily::new(n, sets)
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceReport {
    #[serde(rename = "A")]
    pub a: Vec<u32>,
    pub count: usize,
    pub traces: Vec<Vec<u32>>,
}

/// Distinct traces `{F ∩ A : F in fam}`, sorted.
pub fn trace_count(fam: &SetFamily, a: &[u32]) -> Result<TraceReport> {
    let am = check_subset(fam.n, a)?;
    let traces: BTreeSet<Vec<u32>> = fam.masks().iter().map(|m| set_of(m & am)).collect();
    let mut a = a.to_vec();
    a.sort_unstable();
    a.dedup();
    Ok(TraceReport {
        a,
        count: traces.len(),
        traces: traces.into_iter().collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceTestReport {
    pub pass: bool,
    pub p: u32,
    #[serde(rename = "C")]
    pub c: f64,
    pub samples: usize,
    /// Sample with the largest ratio `count / bound`.
    pub worst: Option<TraceWitness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceWitness {
    #[serde(rename = "A")]
    pub a: Vec<u32>,
    pub count: usize,
    pub bound: f64,
}

/// Checks `|{F ∩ A}| <= C * max(|A|, 1)^p` on every sample.
///
/// `|A|` is floored at 1 so the empty sample, whose single trace is `∅`,
/// passes for `C >= 1`.
pub fn polynomial_trace_test(
    fam: &SetFamily,
    p: u32,
    c: f64,
    samples: &[Vec<u32>],
) -> Result<TraceTestReport> {
    if samples.is_empty() {
        return Err(Error::invalid("need at least one sample set"));
    }
    if !(c.is_finite() && c >= 0.0) {
        return Err(Error::invalid(format!(
            "C must be finite and >= 0, got {c}"
        )));
    }
    let mut worst: Option<(f64, TraceWitness)> = None;
    let mut pass = true;
    for a in samples {
        let r = trace_count(fam, a)?;
        let bound = c * (r.a.len().max(1) as f64).powi(p as i32);
        pass &= r.count as f64 <= bound;
        let ratio = r.count as f64 / bound;
        if worst.as_ref().is_none_or(|(w, _)| ratio > *w) {
            worst = Some((
                ratio,
                TraceWitness {
                    a: r.a,
                    count: r.count,
                    bound,
                },
            ));
        }
    }
    Ok(TraceTestReport {
        pass,
        p,
        c,
        samples: samples.len(),
        worst: worst.map(|w| w.1),
    })
}

/// All subsets of `[1..n]` with at most `max_size` elements.
pub fn subsets_up_to(n: u32, max_size: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut stack: Vec<Vec<u32>> = vec![Vec::new()];
    while let Some(cur) = stack.pop() {
        if cur.len() < max_size {
            let next = cur.last().map_or(1, |&k| k + 1);
            for k in (next..=n).rev() {
                let mut s = cur.clone();
                s.push(k);
                stack.push(s);
            }
        }
        out.push(cur);
    }
    out.sort();
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShatterWitness {
    #[serde(rename = "S")]
    pub s: Vec<u32>,
    /// `(T, F)` with `F ∩ S = T`, one entry per subset `T` of `S`.
    pub trace_map: Vec<(Vec<u32>, Vec<u32>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VcReport {
    pub shattered: ShatterWitness,
    /// `F_k` with `F_k ∩ S = {n_1..n_k}`, for `k = 1..|S|`.
    pub chain: Vec<Vec<u32>>,
    /// Subset checks performed.
    pub checked: u64,
}

impl VcReport {
    /// Characteristic vectors of the chain, in chain order.
    pub fn chain_points(&self, universe: usize) -> Vec<Vector> {
        self.chain
            .iter()
            .map(|f| characteristic(universe, f))
            .collect()
    }
}

fn characteristic(universe: usize, set: &[u32]) -> Vector {
    let mut x = vec![0.0; universe];
    for &k in set {
        x[k as usize - 1] = 1.0;
    }
    Vector::new(x).expect("finite, nonempty")
}

/// Largest `S ⊆ A` shattered by `fam`, searched by decreasing size.
pub fn vc_extract(fam: &SetFamily, a: &[u32], cap: u64) -> Result<VcReport> {
    let am = check_subset(fam.n, a)?;
    let ground = set_of(am);
    if ground.len() > MAX_VC_GROUND {
        return Err(Error::invalid(format!(
            "|A| = {} exceeds {MAX_VC_GROUND}",
            ground.len()
        )));
    }
    let masks = fam.masks();
    let traces: Vec<u64> = masks
        .iter()
        .map(|m| m & am)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut checked = 0u64;
    for size in (0..=ground.len()).rev() {
        if traces.len() < 1usize << size {
            continue;
        }
        for combo in combinations(ground.len(), size) {
            checked += 1;
            if checked > cap {
                return Err(Error::BudgetExceeded {
                    what: "shattered-set search".into(),
                    cap,
                });
            }
            let sm = combo.iter().fold(0u64, |m, &i| m | 1u64 << (ground[i] - 1));
            let seen: HashSet<u64> = traces.iter().map(|t| t & sm).collect();
            if seen.len() == 1usize << size {
                return Ok(build_vc_report(fam, &masks, sm, checked));
            }
        }
    }
    unreachable!("the empty set is always shattered by a nonempty family");
}

fn build_vc_report(fam: &SetFamily, masks: &[u64], sm: u64, checked: u64) -> VcReport {
    let witness_for = |t: u64| -> Vec<u32> {
        let i = masks.iter().position(|m| m & sm == t).expect("shattered");
        fam.sets[i].clone()
    };
    let s = set_of(sm);
    let mut trace_map: Vec<(Vec<u32>, Vec<u32>)> = Vec::new();
    let mut sub = sm;
    loop {
        trace_map.push((set_of(sub), witness_for(sub)));
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & sm;
    }
    trace_map.sort();
    let chain = (1..=s.len())
        .map(|k| witness_for(mask_of(&s[..k])))
        .collect();
    VcReport {
        shattered: ShatterWitness { s, trace_map },
        chain,
        checked,
    }
}

/// Index combinations of `k` out of `n`, in lexicographic order.
fn combinations(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut cur: Option<Vec<usize>> = (k <= n).then(|| (0..k).collect());
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        let c = cur.as_mut().expect("checked above");
        let mut i = k;
        loop {
            if i == 0 {
                cur = None;
                break;
            }
            i -= 1;
            if c[i] < n - k + i {
                c[i] += 1;
                for j in i + 1..k {
                    c[j] = c[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    })
}

/// Characteristic vectors of the family, in family order.
pub fn to_points(fam: &SetFamily, norm: AmbientNorm) -> Result<PointSet> {
    let pts = fam.sets.iter().map(|s| characteristic(fam.n, s)).collect();
    PointSet::new(fam.n, norm, pts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlicingReport {
    pub n: u32,
    pub m: u32,
    pub n_max: u32,
    pub halfspace: HalfSpace,
    /// Indices of the block-family points in the slice.
    pub slice: Vec<usize>,
    /// Index of `χ_{F_{n,m}}` among the block-family points.
    pub target: usize,
}

/// The functional isolating `χ_{F_{n,m}}` in the block family, checked pointwise.
pub fn slicing_functional(n: u32, m: u32, n_max: u32) -> Result<SlicingReport> {
    if !(1 <= m && m <= n && n <= n_max) {
        return Err(Error::invalid(format!(
            "need 1 <= m <= n <= n_max, got m = {m}, n = {n}, n_max = {n_max}"
        )));
    }
    let fam = block_family(n_max as usize)?;
    let universe = fam.n;
    let base = n * (n - 1) / 2;
    let mut a = vec![0.0; universe];
    for k in 1..=universe as u32 {
        if base < k && k <= base + m {
            a[k as usize - 1] = 1.0;
        } else if base + m < k && k <= n * (n + 1) / 2 {
            a[k as usize - 1] = -1.0;
        }
    }
    let halfspace = HalfSpace::new(Vector::new(a)?, m as f64 - 0.5)?;
    let points = to_points(&fam, AmbientNorm::Linf)?;
    let slice = halfspace.slice_indices(points.points());
    let target_set = block_set(n, m);
    let target = fam
        .sets
        .iter()
        .position(|s| *s == target_set)
        .expect("F_{n,m} is a member");
    if slice != [target] {
        return Err(Error::Verification(format!(
            "slice for (n, m) = ({n}, {m}) is {slice:?}, expected [{target}]"
        )));
    }
    Ok(SlicingReport {
        n,
        m,
        n_max,
        halfspace,
        slice,
        target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schreier_small() {
        assert_eq!(schreier(1).unwrap().sets(), &[vec![], vec![1]]);
        let s4 = schreier(4).unwrap();
        let expect: Vec<Vec<u32>> = vec![
            vec![],
            vec![1],
            vec![2],
            vec![2, 3],
            vec![2, 4],
            vec![3],
            vec![3, 4],
            vec![4],
        ];
        assert_eq!(s4.sets(), expect.as_slice());
        assert!(schreier(10).unwrap().len() > 16);
    }

    #[test]
    fn block_sets() {
        assert_eq!(block_set(1, 1), vec![1]);
        assert_eq!(block_set(3, 2), vec![4, 5]);
        let f = block_family(3).unwrap();
        assert_eq!(f.len(), 7);
        assert_eq!(f.universe_size(), 6);
    }

    #[test]
    fn bounded_counts() {
        assert_eq!(bounded_card_family(4, 0).unwrap().len(), 1);
        assert_eq!(bounded_card_family(4, 1).unwrap().len(), 5);
        assert_eq!(bounded_card_family(5, 2).unwrap().len(), 16);
        assert!(bounded_card_family(3, 4).is_err());
    }

    #[test]
    fn traces() {
        let b3 = block_family(3).unwrap();
        assert_eq!(trace_count(&b3, &[1, 2]).unwrap().count, 3);
        assert_eq!(
            trace_count(&schreier(4).unwrap(), &[1, 2, 3, 4])
                .unwrap()
                .count,
            8
        );
        assert_eq!(trace_count(&b3, &[]).unwrap().count, 1);
        assert!(trace_count(&b3, &[7]).is_err());
    }

    #[test]
    fn polynomial_test_cases() {
        let fam = bounded_card_family(12, 2).unwrap();
        let r = polynomial_trace_test(&fam, 2, 2.0, &subsets_up_to(12, 6)).unwrap();
        assert!(r.pass);
        let s = schreier(12).unwrap();
        let all: Vec<u32> = (1..=12).collect();
        assert_eq!(trace_count(&s, &all).unwrap().count, 377);
        for p in 1..=2 {
            let r = polynomial_trace_test(&s, p, 1.0, std::slice::from_ref(&all)).unwrap();
            assert!(!r.pass);
            assert_eq!(r.worst.unwrap().a, all);
        }
        // 377 <= 12^3: the cubic bound still holds at this size.
        assert!(
            polynomial_trace_test(&s, 3, 1.0, std::slice::from_ref(&all))
                .unwrap()
                .pass
        );
        let trivial = SetFamily::new(3, vec![vec![]]).unwrap();
        assert!(
            polynomial_trace_test(&trivial, 1, 1.0, &[vec![], vec![1, 2]])
                .unwrap()
                .pass
        );
    }

    #[test]
    fn vc_cases() {
        let r = vc_extract(&schreier(6).unwrap(), &[3, 4, 5], 1 << 20).unwrap();
        assert_eq!(r.shattered.s, vec![3, 4, 5]);
        assert_eq!(r.shattered.trace_map.len(), 8);
        assert_eq!(r.chain.len(), 3);
        for (k, f) in r.chain.iter().enumerate() {
            let inter: Vec<u32> = f
                .iter()
                .copied()
                .filter(|x| [3, 4, 5].contains(x))
                .collect();
            assert_eq!(inter, vec![3, 4, 5][..=k].to_vec());
        }
        for p in 0..=3 {
            let fam = bounded_card_family(6, p).unwrap();
            let r = vc_extract(&fam, &[1, 2, 3, 4, 5, 6], 1 << 20).unwrap();
            assert_eq!(r.shattered.s.len(), p);
        }
        let empty = SetFamily::new(4, vec![vec![]]).unwrap();
        assert!(vc_extract(&empty, &[1, 2], 10)
            .unwrap()
            .shattered
            .s
            .is_empty());
    }

    #[test]
    fn combinations_enumerate() {
        assert_eq!(combinations(4, 2).count(), 6);
        assert_eq!(
            combinations(3, 0).collect::<Vec<_>>(),
            vec![Vec::<usize>::new()]
        );
        assert_eq!(combinations(2, 3).count(), 0);
    }

    #[test]
    fn slicing_and_points() {
        let r = slicing_functional(2, 1, 2).unwrap();
        assert_eq!(r.halfspace.c.coords(), &[0.0, 1.0, -1.0]);
        let r = slicing_functional(1, 1, 1).unwrap();
        assert_eq!(r.halfspace.c.coords(), &[1.0]);
        assert!(slicing_functional(2, 3, 4).is_err());

        let pts = to_points(&block_family(2).unwrap(), AmbientNorm::Linf).unwrap();
        assert_eq!(pts.len(), 4);
        let zero = to_points(&SetFamily::new(2, vec![vec![]]).unwrap(), AmbientNorm::Linf).unwrap();
        assert!(zero.points()[0].is_zero());
        let s3 = to_points(&schreier(3).unwrap(), AmbientNorm::Linf).unwrap();
        assert_eq!(s3.len(), 5);
        for i in 1..5 {
            for j in i + 1..5 {
                assert_eq!(s3.distance(i, j), 1.0);
            }
        }
    }

    #[test]
    fn family_json() {
        let f: SetFamily = serde_json::from_str(r#"{"N": 3, "sets": [[2, 1], []]}"#).unwrap();
        assert_eq!(f.sets(), &[vec![], vec![1, 2]]);
        assert!(serde_json::from_str::<SetFamily>(r#"{"N": 2, "sets": [[3]]}"#).is_err());
    }
}
