//! Seeded instance generators: the worked example classes (interval traces,
//! powersets, hyperplane traces, the step-function family) and random
//! classes and metrics for property runs.

use std::sync::Arc;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cover::FiniteMetric;
use crate::model::{Concept, ConceptClass, FiniteSpace, FunctionClass, FunctionTable};

/// Deterministic generator for sub-stream `stream` of `seed`.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Traces of closed intervals `[a,b]` on the domain `{1, …, n}` (uniform).
pub fn interval_traces(n: usize) -> ConceptClass {
    let space = Arc::new(
        FiniteSpace::uniform((1..=n).map(|i| i.to_string()).collect())
            .expect("labels are distinct"),
    );
    let mut concepts = vec![Concept::empty(n)];
    for a in 0..n {
        for b in a..n {
            let members: Vec<usize> = (a..=b).collect();
            concepts.push(Concept::from_members(n, &members).expect("in range"));
        }
    }
    ConceptClass::new(space, concepts).expect("lengths agree")
}

/// All `2^n` subsets of an `n`-point uniform domain.
pub fn powerset(n: usize) -> ConceptClass {
    assert!(n < 24, "powerset of {n} points is too large");
    let space = Arc::new(FiniteSpace::with_size(n).expect("n >= 1"));
    let concepts = (0u32..1 << n)
        .map(|mask| Concept::from_bools(&(0..n).map(|i| mask >> i & 1 == 1).collect::<Vec<_>>()))
        .collect();
    ConceptClass::new(space, concepts).expect("lengths agree")
}

/// Point set for the hyperplane example: the standard unit vectors, the
/// origin, then `extra` distinct random integer points with coordinates in
/// `-3..=3`.
pub fn hyperplane_points<R: Rng>(n: usize, extra: usize, rng: &mut R) -> Vec<Vec<i64>> {
    let mut pts: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| (i == j) as i64).collect())
        .collect();
    pts.push(vec![0; n]);
    while pts.len() < n + 1 + extra {
        let p: Vec<i64> = (0..n).map(|_| rng.gen_range(-3..=3)).collect();
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    pts
}

/// Rank of an integer matrix by fraction-free (Bareiss) elimination.
pub fn integer_rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| v as i128).collect())
        .collect();
    let nrows = m.len();
    if nrows == 0 {
        return 0;
    }
    let ncols = m[0].len();
    let mut rank = 0;
    let mut prev = 1i128;
    for col in 0..ncols {
        let Some(pivot) = (rank..nrows).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(rank, pivot);
        for r in rank + 1..nrows {
            for c in col + 1..ncols {
                m[r][c] = (m[rank][col] * m[r][c] - m[r][col] * m[rank][c]) / prev;
            }
            m[r][col] = 0;
        }
        prev = m[rank][col];
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    rank
}

fn affine_rank(points: &[&Vec<i64>]) -> usize {
    if points.is_empty() {
        return 0;
    }
    let base = points[0];
    let diffs: Vec<Vec<i64>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    integer_rank(&diffs) + 1
}

/// Every trace `P ∩ H` of a hyperplane `H = {x : x·a = b}` (`a ≠ 0`) on the
/// integer point set `P ⊂ ℝⁿ`.
///
/// A trace is either empty or equal to `P ∩ aff(Q)` for an affinely
/// independent `Q ⊆ P` with `|Q| ≤ n`: a hyperplane through `aff(Q)` can be
/// tilted to miss any finite set of points off `aff(Q)`. Affine membership is
/// decided with exact integer rank computations.
pub fn hyperplane_traces(points: &[Vec<i64>]) -> ConceptClass {
    let n = points[0].len();
    let np = points.len();
    let mut labels: Vec<String> = (1..=n).map(|i| format!("e{i}")).collect();
    labels.push("o".into());
    labels.extend((1..np.saturating_sub(n)).map(|i| format!("p{i}")));
    let space = Arc::new(FiniteSpace::uniform(labels).expect("distinct labels"));
    let mut concepts = vec![Concept::empty(np)];
    for size in 1..=n {
        for q in (0..np).combinations(size) {
            let qp: Vec<&Vec<i64>> = q.iter().map(|&i| &points[i]).collect();
            let r = affine_rank(&qp);
            if r != size {
                continue;
            }
            let members: Vec<bool> = (0..np)
                .map(|p| {
                    let mut ext = qp.clone();
                    ext.push(&points[p]);
                    affine_rank(&ext) == r
                })
                .collect();
            concepts.push(Concept::from_bools(&members));
        }
    }
    ConceptClass::new(space, concepts).expect("lengths agree")
}

/// Step-function family `{f_e}` restricted to the integers `1..=n`, plus the
/// half-integers between them when `midpoints` is set. At a half-integer the
/// piecewise-linear interpolant takes `0.5` if neighbours differ, else their
/// common value.
pub fn step_function_traces(n: usize, midpoints: bool) -> FunctionClass {
    assert!((1..20).contains(&n));
    let mut labels = Vec::new();
    for i in 1..=n {
        labels.push(i.to_string());
        if midpoints && i < n {
            labels.push(format!("{i}.5"));
        }
    }
    let space = Arc::new(FiniteSpace::uniform(labels).expect("distinct labels"));
    let functions = (0u32..1 << n)
        .map(|mask| {
            let e = |i: usize| (mask >> i & 1) as f64;
            let mut v = Vec::new();
            for i in 0..n {
                v.push(e(i));
                if midpoints && i + 1 < n {
                    v.push(if e(i) == e(i + 1) { e(i) } else { 0.5 });
                }
            }
            FunctionTable::new(v).expect("values in [0,1]")
        })
        .collect();
    FunctionClass::new(space, functions).expect("lengths agree")
}

/// Uniform space of `n` points or, when `skewed`, random positive weights.
pub fn random_space<R: Rng>(rng: &mut R, n: usize, skewed: bool) -> Arc<FiniteSpace> {
    let labels = (1..=n).map(|i| format!("x{i}")).collect();
    if !skewed {
        return Arc::new(FiniteSpace::uniform(labels).expect("n >= 1"));
    }
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let w = raw.iter().map(|x| x / total).collect();
    Arc::new(FiniteSpace::new(labels, w).expect("normalised weights"))
}

/// `size` random concepts (before deduplication), each point a member with
/// probability `density`.
pub fn random_concept_class<R: Rng>(
    rng: &mut R,
    space: Arc<FiniteSpace>,
    size: usize,
    density: f64,
) -> ConceptClass {
    let n = space.len();
    let concepts = (0..size)
        .map(|_| Concept::from_bools(&(0..n).map(|_| rng.gen_bool(density)).collect::<Vec<_>>()))
        .collect();
    ConceptClass::new(space, concepts).expect("lengths agree")
}

/// A random concept class whose VC dimension is at most `max_vc`: a random
/// sample of interval-like runs, threshold sets and (for `max_vc ≥ 2`)
/// arbitrary sets, trimmed until the bound holds.
pub fn random_bounded_vc_class<R: Rng>(
    rng: &mut R,
    space: Arc<FiniteSpace>,
    max_vc: usize,
) -> ConceptClass {
    let n = space.len();
    loop {
        let style = rng.gen_range(0..3);
        let size = rng.gen_range(2..=(3 * n).max(3));
        let concepts: Vec<Concept> = (0..size)
            .map(|_| match style {
                0 => {
                    let a = rng.gen_range(0..n);
                    let b = rng.gen_range(a..n);
                    Concept::from_bools(&(0..n).map(|i| a <= i && i <= b).collect::<Vec<_>>())
                }
                1 => {
                    let t = rng.gen_range(0..=n);
                    Concept::from_bools(&(0..n).map(|i| i < t).collect::<Vec<_>>())
                }
                _ => Concept::from_bools(&(0..n).map(|_| rng.gen_bool(0.5)).collect::<Vec<_>>()),
            })
            .collect();
        let mut class = ConceptClass::new(space.clone(), concepts).expect("lengths agree");
        // shrink until the VC bound holds; |C| < 2^(max_vc+1) guarantees it
        while crate::shatter::vc_dimension(&class).expect("non-empty").value > max_vc {
            let mut cs = class.concepts().to_vec();
            cs.pop();
            class = ConceptClass::new(space.clone(), cs).expect("lengths agree");
        }
        if !class.is_empty() {
            return class;
        }
    }
}

/// `size` random tables; values uniform on `[0,1]`, or on the grid
/// `{0, 1/g, …, 1}` when `grid = Some(g)`.
pub fn random_function_class<R: Rng>(
    rng: &mut R,
    space: Arc<FiniteSpace>,
    size: usize,
    grid: Option<u32>,
) -> FunctionClass {
    let n = space.len();
    let functions = (0..size)
        .map(|_| {
            let v = (0..n)
                .map(|_| match grid {
                    Some(g) => rng.gen_range(0..=g) as f64 / g as f64,
                    None => rng.gen::<f64>(),
                })
                .collect();
            FunctionTable::new(v).expect("values in [0,1]")
        })
        .collect();
    FunctionClass::new(space, functions).expect("lengths agree")
}

/// Tables drawn around `clusters` random centres, each coordinate perturbed
/// by at most `spread` and clamped to `[0,1]`. Produces many close pairs.
pub fn clustered_function_class<R: Rng>(
    rng: &mut R,
    space: Arc<FiniteSpace>,
    clusters: usize,
    per_cluster: usize,
    spread: f64,
) -> FunctionClass {
    let n = space.len();
    let mut functions = Vec::with_capacity(clusters * per_cluster);
    for _ in 0..clusters {
        let centre: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
        for _ in 0..per_cluster {
            let v = centre
                .iter()
                .map(|&c| (c + rng.gen_range(-spread..=spread)).clamp(0.0, 1.0))
                .collect();
            functions.push(FunctionTable::new(v).expect("clamped"));
        }
    }
    functions.shuffle(rng);
    FunctionClass::new(space, functions).expect("lengths agree")
}

/// Random points in `[0,1]^dim`.
pub fn random_points<R: Rng>(rng: &mut R, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.gen()).collect())
        .collect()
}

/// Euclidean metric on `n` random points of `[0,1]^dim`.
pub fn random_euclidean_metric<R: Rng>(rng: &mut R, n: usize, dim: usize) -> FiniteMetric {
    FiniteMetric::from_points(&random_points(rng, n, dim))
}

/// Shortest-path metric of a random connected weighted graph; not
/// Euclidean-embeddable in general.
#[allow(clippy::needless_range_loop)] // symmetric fills read clearer with explicit indices
pub fn random_graph_metric<R: Rng>(rng: &mut R, n: usize, edge_prob: f64) -> FiniteMetric {
    let inf = f64::INFINITY;
    let mut d = vec![vec![inf; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    let w = |rng: &mut R| rng.gen_range(0.05..1.0);
    // random spanning tree keeps the graph connected
    for i in 1..n {
        let j = rng.gen_range(0..i);
        let x = w(rng);
        d[i][j] = x;
        d[j][i] = x;
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(edge_prob) {
                let x: f64 = w(rng);
                let y = d[i][j].min(x);
                d[i][j] = y;
                d[j][i] = y;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    FiniteMetric::new(d).expect("shortest paths form a metric")
}
