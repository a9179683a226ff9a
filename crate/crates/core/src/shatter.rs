//! Shattering, growth function, VC dimension, ε-shattering and the
//! fat-shattering dimension.
//!
//! Dimension searches run level by level in increasing subset size. Both
//! shattering and ε-shattering are hereditary (every subset of a shattered
//! set is shattered, with the restricted witness in the ε case), so a
//! candidate of size `n + 1` is only examined when all of its `n`-subsets
//! survived the previous level. Candidates are generated in lexicographic
//! order and filtered in parallel with an order-preserving collect, so the
//! certificate is always the lexicographically first maximal set.

use std::collections::HashSet;

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Concept, ConceptClass, FunctionClass, PointSubset};

/// Result of a dimension query.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionResult {
    pub value: usize,
    pub certificate: PointSubset,
    /// The witness `c` for fat-shattering results.
    pub witness: Option<Vec<f64>>,
    /// Every subset larger than `value` was refuted.
    pub exhausted: bool,
}

/// `π(n; C)` for `n = 0..=n_max`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GrowthTable {
    entries: Vec<u64>,
}

impl GrowthTable {
    pub fn get(&self, n: usize) -> Option<u64> {
        self.entries.get(n).copied()
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn n_max(&self) -> usize {
        self.entries.len() - 1
    }
}

/// Outcome of an ε-shattering test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsShatter {
    pub shattered: bool,
    pub witness: Option<Vec<f64>>,
}

fn require_points(s: &PointSubset, points: usize) -> Result<()> {
    match s.indices().last() {
        Some(&last) if last >= points => Err(Error::validation(format!(
            "subset index {last} out of range for {points} points"
        ))),
        _ => Ok(()),
    }
}

#[inline]
fn pattern(c: &Concept, s: &[usize]) -> u64 {
    s.iter()
        .enumerate()
        .fold(0u64, |acc, (j, &x)| acc | ((c.contains(x) as u64) << j))
}

/// Number of distinct traces `A ∩ S`; `s.len()` must be below 64.
fn trace_count_raw(class: &ConceptClass, s: &[usize], scratch: &mut Vec<u64>) -> usize {
    scratch.clear();
    scratch.extend(class.concepts().iter().map(|c| pattern(c, s)));
    scratch.sort_unstable();
    scratch.dedup();
    scratch.len()
}

fn shatters_raw(class: &ConceptClass, s: &[usize]) -> bool {
    if s.len() >= 64 || (1u128 << s.len()) > class.len() as u128 {
        return false;
    }
    let mut scratch = Vec::with_capacity(class.len());
    trace_count_raw(class, s, &mut scratch) == 1usize << s.len()
}

/// `π(S; C) = |{A ∩ S : A ∈ C}|`.
pub fn trace_count(class: &ConceptClass, s: &PointSubset) -> Result<usize> {
    if class.is_empty() {
        return Err(Error::EmptyClass);
    }
    require_points(s, class.points())?;
    if s.len() < 64 {
        let mut scratch = Vec::new();
        return Ok(trace_count_raw(class, s.indices(), &mut scratch));
    }
    let traces: HashSet<Vec<bool>> = class
        .concepts()
        .iter()
        .map(|c| s.indices().iter().map(|&x| c.contains(x)).collect())
        .collect();
    Ok(traces.len())
}

/// Whether `C` shatters `S`, i.e. realises all `2^|S|` traces on it.
pub fn shatters(class: &ConceptClass, s: &PointSubset) -> Result<bool> {
    if class.is_empty() {
        return Err(Error::EmptyClass);
    }
    require_points(s, class.points())?;
    Ok(shatters_raw(class, s.indices()))
}

/// Exact growth function `π(n; C)` for `n = 0..=n_max`.
///
/// For each size the scan over subsets stops as soon as the trivial upper
/// bound `min(2^n, |C|, 2·π(n−1))` is reached, and once `π(n) = |C|` all
/// larger sizes are filled in directly.
pub fn growth(class: &ConceptClass, n_max: usize) -> Result<GrowthTable> {
    if class.is_empty() {
        return Err(Error::EmptyClass);
    }
    let points = class.points();
    if n_max > points {
        return Err(Error::domain(format!(
            "n_max = {n_max} exceeds the number of points ({points})"
        )));
    }
    let size = class.len() as u64;
    let mut entries = vec![1u64];
    let mut scratch = Vec::with_capacity(class.len());
    for n in 1..=n_max {
        let prev = entries[n - 1];
        if prev == size {
            entries.push(size);
            continue;
        }
        let pow = if n < 64 { 1u64 << n } else { u64::MAX };
        let cap = pow.min(size).min(prev.saturating_mul(2));
        let mut best = 0u64;
        for s in (0..points).combinations(n) {
            let count = if n < 64 {
                trace_count_raw(class, &s, &mut scratch) as u64
            } else {
                trace_count(class, &PointSubset::from_sorted(s))? as u64
            };
            best = best.max(count);
            if best == cap {
                break;
            }
        }
        entries.push(best);
    }
    Ok(GrowthTable { entries })
}

/// Level-wise hereditary search shared by the VC and fat dimensions.
///
/// `check` returns `Some(payload)` when the candidate set is shattered.
fn levelwise_search<T, F>(points: usize, max_size: usize, empty: T, check: F) -> (Vec<usize>, T)
where
    T: Send + Clone,
    F: Fn(&[usize]) -> Option<T> + Sync,
{
    let mut level: Vec<Vec<usize>> = vec![Vec::new()];
    let mut best = (Vec::new(), empty);
    for size in 1..=max_size.min(points) {
        let survivors: HashSet<&[usize]> = level.iter().map(Vec::as_slice).collect();
        let mut candidates = Vec::new();
        for t in &level {
            let start = t.last().map_or(0, |&l| l + 1);
            for j in start..points {
                let mut cand = t.clone();
                cand.push(j);
                // t itself (dropping j) survived; check the other facets
                let all_facets = (0..size - 1).all(|drop| {
                    let facet: Vec<usize> = cand
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != drop)
                        .map(|(_, &x)| x)
                        .collect();
                    survivors.contains(facet.as_slice())
                });
                if all_facets {
                    candidates.push(cand);
                }
            }
        }
        let next: Vec<(Vec<usize>, T)> = candidates
            .into_par_iter()
            .filter_map(|c| check(&c).map(|p| (c, p)))
            .collect();
        match next.first() {
            Some(first) => best = first.clone(),
            None => break,
        }
        level = next.into_iter().map(|(c, _)| c).collect();
    }
    best
}

fn floor_log2(n: usize) -> usize {
    (usize::BITS - 1 - n.leading_zeros()) as usize
}

/// VC dimension with the lexicographically first shattered set of maximal size.
pub fn vc_dimension(class: &ConceptClass) -> Result<DimensionResult> {
    if class.is_empty() {
        return Err(Error::EmptyClass);
    }
    let max = floor_log2(class.len());
    let (set, ()) = levelwise_search(class.points(), max, (), |s| {
        shatters_raw(class, s).then_some(())
    });
    Ok(DimensionResult {
        value: set.len(),
        certificate: PointSubset::from_sorted(set),
        witness: None,
        exhausted: true,
    })
}

/// Sauer's bound `(e·n/d)^d`, valid for `n ≥ d ≥ 1`.
pub fn sauer_bound(n: usize, d: usize) -> Result<f64> {
    if d == 0 || n < d {
        return Err(Error::domain(format!(
            "Sauer bound requires n >= d >= 1, got n = {n}, d = {d}"
        )));
    }
    let base = std::f64::consts::E * n as f64 / d as f64;
    Ok(base.powf(d as f64))
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::domain(format!("scale ε = {eps} must lie in (0, 1]")));
    }
    Ok(())
}

fn check_tolerance(tol: f64) -> Result<()> {
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::domain(format!("tolerance {tol} must be finite and >= 0")));
    }
    Ok(())
}

/// One admissible witness value at a coordinate, with the functions it
/// places above (`≥ c+ε`) and below (`≤ c−ε`).
struct Threshold {
    value: f64,
    above: Vec<bool>,
    below: Vec<bool>,
}

/// Candidate witness values at one coordinate: midpoints `(a+b)/2` of
/// achieved values with `b − a ≥ 2ε`, keeping only undominated pairs (for
/// every `a` the smallest admissible `b`, and for every `b` the largest `a`).
fn coordinate_thresholds(column: &[f64], eps: f64, tol: f64) -> Vec<Threshold> {
    let mut vals: Vec<f64> = column.to_vec();
    vals.sort_by(f64::total_cmp);
    vals.dedup();
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    let mut bi = 0;
    for &a in &vals {
        while bi < vals.len() && vals[bi] - a < 2.0 * eps - tol {
            bi += 1;
        }
        if bi == vals.len() {
            break;
        }
        let b = vals[bi];
        match pairs.last_mut() {
            Some(last) if last.1 == b => last.0 = a,
            _ => pairs.push((a, b)),
        }
    }
    pairs
        .into_iter()
        .filter_map(|(a, b)| {
            let c = (a + b) / 2.0;
            let hi = c + eps - tol;
            let lo = c - eps + tol;
            // knife-edge rounding can push a or b across the margin
            if !(b >= hi && a <= lo) {
                return None;
            }
            Some(Threshold {
                value: c,
                above: column.iter().map(|&v| v >= hi).collect(),
                below: column.iter().map(|&v| v <= lo).collect(),
            })
        })
        .collect()
}

const DEAD: u64 = u64::MAX;

fn witness_search(
    columns: &[Vec<f64>],
    eps: f64,
    tol: f64,
    nfuncs: usize,
) -> Option<Vec<f64>> {
    let s = columns.len();
    if s == 0 {
        return Some(Vec::new());
    }
    if s >= 64 || (1u128 << s) > nfuncs as u128 {
        return None;
    }
    let thresholds: Vec<Vec<Threshold>> = columns
        .iter()
        .map(|col| coordinate_thresholds(col, eps, tol))
        .collect();
    if thresholds.iter().any(Vec::is_empty) {
        return None;
    }
    let mut chosen = Vec::with_capacity(s);
    let patterns = vec![0u64; nfuncs];
    let mut seen = vec![false; 1usize << s];
    if dfs(&thresholds, 0, &patterns, &mut chosen, &mut seen) {
        Some(chosen)
    } else {
        None
    }
}

/// Depth-first search over per-coordinate thresholds. Each node extends the
/// partial sign patterns of the surviving functions and prunes as soon as
/// some prefix pattern on the first `depth + 1` coordinates is unrealised.
fn dfs(
    thresholds: &[Vec<Threshold>],
    depth: usize,
    patterns: &[u64],
    chosen: &mut Vec<f64>,
    seen: &mut [bool],
) -> bool {
    if depth == thresholds.len() {
        return true;
    }
    let needed = 1usize << (depth + 1);
    let mut next = vec![DEAD; patterns.len()];
    for t in &thresholds[depth] {
        seen[..needed].iter_mut().for_each(|b| *b = false);
        let mut distinct = 0;
        for (f, &p) in patterns.iter().enumerate() {
            next[f] = if p == DEAD {
                DEAD
            } else if t.above[f] {
                p | (1 << depth)
            } else if t.below[f] {
                p
            } else {
                DEAD
            };
            if next[f] != DEAD && !seen[next[f] as usize] {
                seen[next[f] as usize] = true;
                distinct += 1;
            }
        }
        if distinct < needed {
            continue;
        }
        chosen.push(t.value);
        if dfs(thresholds, depth + 1, &next, chosen, seen) {
            return true;
        }
        chosen.pop();
    }
    false
}

fn columns(class: &FunctionClass, s: &[usize]) -> Vec<Vec<f64>> {
    s.iter()
        .map(|&x| class.functions().iter().map(|f| f.value(x)).collect())
        .collect()
}

/// Whether `F` ε-shatters `S`, returning a realising witness when it does.
pub fn eps_shatters(class: &FunctionClass, s: &PointSubset, eps: f64) -> Result<EpsShatter> {
    eps_shatters_with_tolerance(class, s, eps, 0.0)
}

/// As [`eps_shatters`], with every margin comparison relaxed by `tol`.
pub fn eps_shatters_with_tolerance(
    class: &FunctionClass,
    s: &PointSubset,
    eps: f64,
    tol: f64,
) -> Result<EpsShatter> {
    check_eps(eps)?;
    check_tolerance(tol)?;
    if class.is_empty() {
        return Err(Error::EmptyClass);
    }
    require_points(s, class.points())?;
    let witness = witness_search(&columns(class, s.indices()), eps, tol, class.len());
    Ok(EpsShatter {
        shattered: witness.is_some(),
        witness,
    })
}

/// Checks the ε-shattering definition directly for a given witness.
pub fn eps_shatters_with_witness(
    class: &FunctionClass,
    s: &PointSubset,
    witness: &[f64],
    eps: f64,
    tol: f64,
) -> Result<bool> {
    check_eps(eps)?;
    check_tolerance(tol)?;
    if class.is_empty() {
        return Err(Error::EmptyClass);
    }
    require_points(s, class.points())?;
    if witness.len() != s.len() {
        return Err(Error::Dimension {
            expected: s.len(),
            found: witness.len(),
        });
    }
    if let Some(c) = witness.iter().find(|c| !(0.0..=1.0).contains(*c)) {
        return Err(Error::domain(format!("witness value {c} is not in [0,1]")));
    }
    let n = s.len();
    if n >= 64 || (1u128 << n) > class.len() as u128 {
        return Ok(false);
    }
    let mut realised = vec![false; 1 << n];
    for f in class.functions() {
        let mut p = 0usize;
        let mut ok = true;
        for (j, (&x, &c)) in s.indices().iter().zip(witness).enumerate() {
            let v = f.value(x);
            if v >= c + eps - tol {
                p |= 1 << j;
            } else if !(v <= c - eps + tol) {
                ok = false;
                break;
            }
        }
        if ok {
            realised[p] = true;
        }
    }
    Ok(realised.iter().all(|&b| b))
}

/// Fat-shattering dimension at scale `eps`, with certificate and witness.
pub fn fat_dimension(class: &FunctionClass, eps: f64) -> Result<DimensionResult> {
    fat_dimension_with_tolerance(class, eps, 0.0)
}

pub fn fat_dimension_with_tolerance(
    class: &FunctionClass,
    eps: f64,
    tol: f64,
) -> Result<DimensionResult> {
    check_eps(eps)?;
    check_tolerance(tol)?;
    if class.is_empty() {
        return Err(Error::EmptyClass);
    }
    let max = floor_log2(class.len());
    let (set, witness) = levelwise_search(class.points(), max, Vec::new(), |s| {
        witness_search(&columns(class, s), eps, tol, class.len())
    });
    Ok(DimensionResult {
        value: set.len(),
        certificate: PointSubset::from_sorted(set),
        witness: Some(witness),
        exhausted: true,
    })
}
