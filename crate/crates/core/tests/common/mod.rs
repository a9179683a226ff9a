//! Brute-force oracles shared by the integration tests. Each one follows the
//! definition directly, with no pruning, so that it can be trusted on small
//! inputs.

#![allow(dead_code)]

use std::collections::HashSet;

use shatterlab::cover::FiniteMetric;
use shatterlab::{ConceptClass, FunctionClass};

fn members(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|&i| mask >> i & 1 == 1).collect()
}

/// Distinct traces `A ∩ S` as sorted member lists.
pub fn traces(class: &ConceptClass, s: &[usize]) -> HashSet<Vec<usize>> {
    class
        .concepts()
        .iter()
        .map(|c| s.iter().copied().filter(|&x| c.contains(x)).collect())
        .collect()
}

pub fn shatters(class: &ConceptClass, s: &[usize]) -> bool {
    traces(class, s).len() == 1 << s.len()
}

/// Largest shattered subset size, over every subset of the domain.
pub fn vc(class: &ConceptClass) -> usize {
    let n = class.points();
    (0u32..1 << n)
        .filter(|&m| shatters(class, &members(m, n)))
        .map(|m| m.count_ones() as usize)
        .max()
        .unwrap()
}

/// `π(k; C)` for `k = 0..=n`, by scanning every subset.
pub fn growth(class: &ConceptClass) -> Vec<usize> {
    let n = class.points();
    let mut best = vec![0; n + 1];
    for m in 0u32..1 << n {
        let k = m.count_ones() as usize;
        best[k] = best[k].max(traces(class, &members(m, n)).len());
    }
    best
}

/// Whether witness `c` ε-shatters `s`: every sign pattern is realised.
pub fn witness_shatters(class: &FunctionClass, s: &[usize], c: &[f64], eps: f64) -> bool {
    (0u32..1 << s.len()).all(|pattern| {
        class.functions().iter().any(|f| {
            s.iter().enumerate().all(|(j, &x)| {
                if pattern >> j & 1 == 1 {
                    f.value(x) >= c[j] + eps
                } else {
                    f.value(x) <= c[j] - eps
                }
            })
        })
    })
}

/// Midpoints of every pair of values at point `x` at least `2ε` apart.
fn midpoints(class: &FunctionClass, x: usize, eps: f64) -> Vec<f64> {
    let vals: Vec<f64> = class.functions().iter().map(|f| f.value(x)).collect();
    let mut out = Vec::new();
    for &a in &vals {
        for &b in &vals {
            if b - a >= 2.0 * eps {
                out.push((a + b) / 2.0);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Fat-shattering dimension over every subset and every tuple of midpoint
/// witnesses (no dominance pruning).
pub fn fat(class: &FunctionClass, eps: f64) -> usize {
    let n = class.points();
    let mut best = 0;
    for m in 0u32..1 << n {
        let s = members(m, n);
        if s.len() <= best {
            continue;
        }
        let cands: Vec<Vec<f64>> = s.iter().map(|&x| midpoints(class, x, eps)).collect();
        if cands.iter().any(Vec::is_empty) {
            continue;
        }
        let mut idx = vec![0; s.len()];
        'tuples: loop {
            let c: Vec<f64> = idx.iter().zip(&cands).map(|(&i, v)| v[i]).collect();
            if witness_shatters(class, &s, &c, eps) {
                best = s.len();
                break;
            }
            for j in 0..idx.len() {
                idx[j] += 1;
                if idx[j] < cands[j].len() {
                    continue 'tuples;
                }
                idx[j] = 0;
            }
            break;
        }
    }
    best
}

/// Minimum number of internal centers covering every point at distance
/// `< eps`, by enumerating center subsets.
pub fn cover(m: &FiniteMetric, eps: f64) -> usize {
    let n = m.size();
    assert!(n <= 16);
    (1u32..1 << n)
        .filter(|mask| (0..n).all(|p| (0..n).any(|c| mask >> c & 1 == 1 && m.get(p, c) < eps)))
        .map(u32::count_ones)
        .min()
        .unwrap() as usize
}
