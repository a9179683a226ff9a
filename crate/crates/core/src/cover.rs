//! ε-covering and packing numbers of finite metric spaces.
//!
//! Coverage is strict: a center `m` covers `x` when `d(x, m) < ε`, and
//! centers are points of the space itself. The exact minimum is found by
//! branch-and-bound on the ε-ball incidence structure (a minimum dominating
//! set problem): the incumbent starts at the greedy cover, branching is on
//! the uncovered point with the fewest covering balls, and subtrees are cut
//! with a disjoint-ball lower bound.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::model::{self, ConceptClass, FunctionClass};

/// Slack allowed in the triangle inequality of user-supplied matrices.
pub const TRIANGLE_TOLERANCE: f64 = 1e-9;

/// Above this many points exact covering falls back to greedy.
pub const DEFAULT_EXACT_LIMIT: usize = 4096;

/// Default cap on the number of points of an enumerated product space.
pub const DEFAULT_PRODUCT_CAP: usize = 100_000;

/// A finite space with a distance function.
pub trait MetricSpace: Sync {
    fn len(&self) -> usize;
    fn dist(&self, i: usize, j: usize) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Symmetric distance matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteMetric {
    size: usize,
    dist: Vec<f64>,
}

impl FiniteMetric {
    /// Validates symmetry (exact), zero diagonal, non-negativity and the
    /// triangle inequality (within [`TRIANGLE_TOLERANCE`]).
    pub fn new(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let size = matrix.len();
        if size == 0 {
            return Err(Error::validation("metric space must have at least one point"));
        }
        let mut dist = Vec::with_capacity(size * size);
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != size {
                return Err(Error::Dimension {
                    expected: size,
                    found: row.len(),
                });
            }
            for (j, &d) in row.iter().enumerate() {
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::validation(format!("d[{i}][{j}] = {d} is not a finite non-negative number")));
                }
                if i == j && d != 0.0 {
                    return Err(Error::validation(format!("d[{i}][{i}] = {d}, expected 0")));
                }
                if matrix[j][i] != d {
                    return Err(Error::validation(format!("d[{i}][{j}] != d[{j}][{i}]")));
                }
            }
            dist.extend_from_slice(row);
        }
        let m = FiniteMetric { size, dist };
        for i in 0..size {
            for j in 0..size {
                for k in 0..size {
                    if m.get(i, j) > m.get(i, k) + m.get(k, j) + TRIANGLE_TOLERANCE {
                        return Err(Error::validation(format!(
                            "triangle inequality fails: d[{i}][{j}] > d[{i}][{k}] + d[{k}][{j}]"
                        )));
                    }
                }
            }
        }
        Ok(m)
    }

    /// Builds the matrix from a distance function that is a (pseudo)metric by
    /// construction; only the upper triangle is evaluated.
    pub(crate) fn from_fn_trusted(size: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut dist = vec![0.0; size * size];
        for i in 0..size {
            for j in i + 1..size {
                let d = f(i, j);
                dist[i * size + j] = d;
                dist[j * size + i] = d;
            }
        }
        FiniteMetric { size, dist }
    }

    /// Euclidean distances between points (all of one dimension).
    pub fn from_points(points: &[Vec<f64>]) -> Self {
        Self::from_fn_trusted(points.len(), |i, j| {
            points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
    }

    /// Points on the real line with `|x − y|`.
    pub fn from_line(xs: &[f64]) -> Self {
        Self::from_fn_trusted(xs.len(), |i, j| (xs[i] - xs[j]).abs())
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.size + j]
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.dist.chunks(self.size).map(<[f64]>::to_vec).collect()
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }
}

impl MetricSpace for FiniteMetric {
    fn len(&self) -> usize {
        self.size
    }

    #[inline]
    fn dist(&self, i: usize, j: usize) -> f64 {
        self.get(i, j)
    }
}

/// `M₁ × … × M_k` with the L2 product distance, evaluated lazily. Point `i`
/// is decoded in mixed radix with the first factor most significant.
pub struct ProductMetric<'a> {
    factors: &'a [FiniteMetric],
    len: usize,
}

impl<'a> ProductMetric<'a> {
    pub fn new(factors: &'a [FiniteMetric], cap: usize) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::domain("product of zero spaces"));
        }
        let size = factors
            .iter()
            .try_fold(1u128, |acc, m| acc.checked_mul(m.size() as u128))
            .unwrap_or(u128::MAX);
        if size > cap as u128 {
            return Err(Error::capacity("product metric space", size, cap as u128));
        }
        Ok(ProductMetric {
            factors,
            len: size as usize,
        })
    }

    /// Per-factor coordinates of product point `i`.
    pub fn decode(&self, mut i: usize) -> Vec<usize> {
        let mut out = vec![0; self.factors.len()];
        for (slot, m) in out.iter_mut().zip(self.factors).rev() {
            *slot = i % m.size();
            i /= m.size();
        }
        out
    }
}

impl MetricSpace for ProductMetric<'_> {
    fn len(&self) -> usize {
        self.len
    }

    fn dist(&self, mut i: usize, mut j: usize) -> f64 {
        let mut total = 0.0;
        for m in self.factors.iter().rev() {
            let n = m.size();
            let d = m.get(i % n, j % n);
            total += d * d;
            i /= n;
            j /= n;
        }
        total.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoverMode {
    Exact,
    Greedy,
}

impl FromStr for CoverMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(CoverMode::Exact),
            "greedy" => Ok(CoverMode::Greedy),
            other => Err(Error::Parse(format!("unknown cover mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverResult {
    pub number: usize,
    pub centers: Vec<usize>,
    /// The method that produced `number`; `greedy` when exact was requested
    /// but the space exceeded the exact-search limit.
    pub method: CoverMode,
    /// Size of a greedy `2ε`-separated set; no cover can be smaller.
    pub lower_bound: usize,
}

impl CoverResult {
    /// Whether every point lies at distance `< eps` from some center.
    pub fn verify<M: MetricSpace + ?Sized>(&self, m: &M, eps: f64) -> bool {
        self.centers.len() == self.number
            && (0..m.len()).all(|p| self.centers.iter().any(|&c| m.dist(p, c) < eps))
    }
}

fn check_radius(eps: f64) -> Result<()> {
    if !(eps > 0.0) || eps.is_nan() {
        return Err(Error::domain(format!("radius ε = {eps} must be > 0")));
    }
    Ok(())
}

fn balls<M: MetricSpace + ?Sized>(m: &M, eps: f64) -> Vec<BitSet> {
    let n = m.len();
    let mut balls: Vec<BitSet> = (0..n).map(|_| BitSet::new(n)).collect();
    for i in 0..n {
        balls[i].insert(i);
        for j in i + 1..n {
            if m.dist(i, j) < eps {
                balls[i].insert(j);
                balls[j].insert(i);
            }
        }
    }
    balls
}

fn greedy_cover(balls: &[BitSet]) -> Vec<usize> {
    let n = balls.len();
    let mut uncovered = BitSet::full(n);
    let mut centers = Vec::new();
    while !uncovered.none() {
        let (best, _) = balls
            .iter()
            .enumerate()
            .map(|(c, b)| (c, b.intersection_count(&uncovered)))
            .fold((0, 0), |acc, x| if x.1 > acc.1 { x } else { acc });
        centers.push(best);
        uncovered.difference_with(&balls[best]);
    }
    centers
}

/// Greedy (index-order) maximal set with pairwise distances `≥ sep`.
fn greedy_packing<M: MetricSpace + ?Sized>(m: &M, sep: f64) -> Vec<usize> {
    let mut picked: Vec<usize> = Vec::new();
    for p in 0..m.len() {
        if picked.iter().all(|&q| m.dist(p, q) >= sep) {
            picked.push(p);
        }
    }
    picked
}

struct BranchAndBound<'a> {
    balls: &'a [BitSet],
    best: Vec<usize>,
    floor: usize,
}

impl BranchAndBound<'_> {
    /// Uncovered points whose balls are pairwise disjoint each need their own
    /// center (balls are symmetric, so the centers covering `p` are `ball[p]`).
    fn lower_bound(&self, uncovered: &BitSet) -> usize {
        let mut order: Vec<(usize, usize)> = uncovered
            .iter()
            .map(|p| (self.balls[p].count(), p))
            .collect();
        order.sort_unstable();
        let mut used = BitSet::new(self.balls.len());
        let mut independent = 0;
        for (_, p) in order {
            if !self.balls[p].intersects(&used) {
                used.union_with(&self.balls[p]);
                independent += 1;
            }
        }
        let remaining = uncovered.count();
        let widest = self
            .balls
            .iter()
            .map(|b| b.intersection_count(uncovered))
            .max()
            .unwrap_or(1)
            .max(1);
        independent.max(remaining.div_ceil(widest))
    }

    fn search(&mut self, uncovered: &BitSet, chosen: &mut Vec<usize>) {
        if uncovered.none() {
            if chosen.len() < self.best.len() {
                self.best = chosen.clone();
            }
            return;
        }
        if self.best.len() <= self.floor {
            return;
        }
        if chosen.len() + self.lower_bound(uncovered) >= self.best.len() {
            return;
        }
        let pivot = uncovered
            .iter()
            .min_by_key(|&p| (self.balls[p].count(), p))
            .expect("non-empty");
        let mut options: Vec<(usize, usize)> = self.balls[pivot]
            .iter()
            .map(|c| (self.balls[c].intersection_count(uncovered), c))
            .collect();
        options.sort_unstable_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        for (_, c) in options {
            let mut rest = uncovered.clone();
            rest.difference_with(&self.balls[c]);
            chosen.push(c);
            self.search(&rest, chosen);
            chosen.pop();
            if self.best.len() <= self.floor {
                return;
            }
        }
    }
}

/// ε-covering number of `m` with internal centers and strict coverage.
pub fn covering_number<M: MetricSpace + ?Sized>(m: &M, eps: f64, mode: CoverMode) -> Result<CoverResult> {
    covering_number_with_limit(m, eps, mode, DEFAULT_EXACT_LIMIT)
}

pub fn covering_number_with_limit<M: MetricSpace + ?Sized>(
    m: &M,
    eps: f64,
    mode: CoverMode,
    exact_limit: usize,
) -> Result<CoverResult> {
    check_radius(eps)?;
    let n = m.len();
    if n == 0 {
        return Ok(CoverResult {
            number: 0,
            centers: Vec::new(),
            method: mode,
            lower_bound: 0,
        });
    }
    let balls = balls(m, eps);
    let lower_bound = greedy_packing(m, 2.0 * eps).len();
    let greedy = greedy_cover(&balls);
    let mode = if mode == CoverMode::Exact && n > exact_limit {
        log::warn!("exact cover refused for {n} points (limit {exact_limit}); using greedy");
        CoverMode::Greedy
    } else {
        mode
    };
    let mut centers = match mode {
        CoverMode::Greedy => greedy,
        CoverMode::Exact => {
            let mut bb = BranchAndBound {
                balls: &balls,
                best: greedy,
                floor: lower_bound,
            };
            let uncovered = BitSet::full(n);
            bb.floor = bb.floor.max(bb.lower_bound(&uncovered));
            bb.search(&uncovered, &mut Vec::new());
            bb.best
        }
    };
    centers.sort_unstable();
    Ok(CoverResult {
        number: centers.len(),
        centers,
        method: mode,
        lower_bound,
    })
}

/// Size of a greedy maximal set whose points are pairwise at distance `≥ eps`.
pub fn packing_number<M: MetricSpace + ?Sized>(m: &M, eps: f64) -> Result<usize> {
    check_radius(eps)?;
    Ok(greedy_packing(m, eps).len())
}

/// Distance used to turn a class into a metric space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassDistance {
    L2,
    ExpectedAbs,
    SymDiff,
}

impl FromStr for ClassDistance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l2" => Ok(ClassDistance::L2),
            "expected-abs" | "abs" => Ok(ClassDistance::ExpectedAbs),
            "symdiff" => Ok(ClassDistance::SymDiff),
            other => Err(Error::Parse(format!("unknown class distance {other:?}"))),
        }
    }
}

/// Pairwise-distance matrix of a function class.
pub fn metric_from_class(class: &FunctionClass, which: ClassDistance) -> Result<FiniteMetric> {
    if class.is_empty() {
        return Err(Error::EmptyClass);
    }
    let space = class.space();
    let fs = class.functions();
    let m = match which {
        ClassDistance::L2 => FiniteMetric::from_fn_trusted(fs.len(), |i, j| {
            model::l2_unchecked(fs[i].values(), fs[j].values(), space.weights())
        }),
        ClassDistance::ExpectedAbs => FiniteMetric::from_fn_trusted(fs.len(), |i, j| {
            model::expected_abs_diff(&fs[i], &fs[j], space).expect("same space")
        }),
        ClassDistance::SymDiff => {
            return metric_from_concepts(&class.to_concept_class().map_err(|_| {
                Error::domain("symmetric-difference distance needs a bit-valued class")
            })?)
        }
    };
    Ok(m)
}

/// `μ(A △ B)` distance matrix of a concept class.
pub fn metric_from_concepts(class: &ConceptClass) -> Result<FiniteMetric> {
    if class.is_empty() {
        return Err(Error::EmptyClass);
    }
    let cs = class.concepts();
    let space = class.space();
    Ok(FiniteMetric::from_fn_trusted(cs.len(), |i, j| {
        model::sym_diff_measure(&cs[i], &cs[j], space).expect("same space")
    }))
}

/// Both sides of the product covering inequality
/// `N(M₁×…×M_k, ε, d²) ≤ Π N(Mᵢ, ε/√k, dᵢ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductCoverReport {
    pub k: usize,
    pub eps: f64,
    pub factor_scale: f64,
    pub factor_numbers: Vec<usize>,
    pub bound: u128,
    pub product_size: usize,
    pub product_number: usize,
    pub product_method: CoverMode,
    pub holds: bool,
}

pub fn check_product_cover(spaces: &[FiniteMetric], eps: f64, cap: usize) -> Result<ProductCoverReport> {
    check_radius(eps)?;
    if spaces.len() < 2 {
        return Err(Error::domain(format!(
            "product covering needs k >= 2 spaces, got {}",
            spaces.len()
        )));
    }
    let product = ProductMetric::new(spaces, cap)?;
    let k = spaces.len();
    let factor_scale = eps / (k as f64).sqrt();
    let factor_numbers = spaces
        .iter()
        .map(|m| covering_number(m, factor_scale, CoverMode::Exact).map(|r| r.number))
        .collect::<Result<Vec<_>>>()?;
    let bound = factor_numbers.iter().map(|&n| n as u128).product();
    let cover = covering_number(&product, eps, CoverMode::Exact)?;
    Ok(ProductCoverReport {
        k,
        eps,
        factor_scale,
        factor_numbers,
        bound,
        product_size: product.len(),
        product_number: cover.number,
        product_method: cover.method,
        holds: cover.number as u128 <= bound,
    })
}

/// Both sides of `N(u(M), ε) ≤ N(M, δ)` plus the continuity pre-check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImageCoverReport {
    pub eps: f64,
    pub delta: f64,
    pub pairs_checked: usize,
    /// Pairs with `d(m,m′) < δ` but `d(u m, u m′) ≥ ε`.
    pub continuity_violations: usize,
    pub image_number: Option<usize>,
    pub domain_number: Option<usize>,
    /// `None` when the continuity precondition failed and nothing was asserted.
    pub holds: Option<bool>,
}

/// `map[i]` is the index in `images` of the image of point `i` of `domain`;
/// the map must be onto.
pub fn check_image_cover(
    domain: &FiniteMetric,
    images: &FiniteMetric,
    map: &[usize],
    delta: f64,
    eps: f64,
) -> Result<ImageCoverReport> {
    check_radius(eps)?;
    check_radius(delta)?;
    if map.len() != domain.size() {
        return Err(Error::Dimension {
            expected: domain.size(),
            found: map.len(),
        });
    }
    let mut hit = vec![false; images.size()];
    for (i, &u) in map.iter().enumerate() {
        if u >= images.size() {
            return Err(Error::validation(format!("map[{i}] = {u} is not an image index")));
        }
        hit[u] = true;
    }
    if let Some(miss) = hit.iter().position(|h| !h) {
        return Err(Error::validation(format!("image point {miss} has no preimage")));
    }
    let n = domain.size();
    let mut pairs_checked = 0;
    let mut violations = 0;
    for i in 0..n {
        for j in i + 1..n {
            if domain.get(i, j) < delta {
                pairs_checked += 1;
                if !(images.get(map[i], map[j]) < eps) {
                    violations += 1;
                }
            }
        }
    }
    if violations > 0 {
        return Ok(ImageCoverReport {
            eps,
            delta,
            pairs_checked,
            continuity_violations: violations,
            image_number: None,
            domain_number: None,
            holds: None,
        });
    }
    let image_number = covering_number(images, eps, CoverMode::Exact)?.number;
    let domain_number = covering_number(domain, delta, CoverMode::Exact)?.number;
    Ok(ImageCoverReport {
        eps,
        delta,
        pairs_checked,
        continuity_violations: 0,
        image_number: Some(image_number),
        domain_number: Some(domain_number),
        holds: Some(image_number <= domain_number),
    })
}

/// Base of the logarithms in the entropy bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Natural,
    Two,
    Ten,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Two => x.log2(),
            LogBase::Ten => x.log10(),
        }
    }
}

impl FromStr for LogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "e" | "ln" | "natural" => Ok(LogBase::Natural),
            "2" | "two" => Ok(LogBase::Two),
            "10" | "ten" => Ok(LogBase::Ten),
            other => Err(Error::Parse(format!("unknown log base {other:?}"))),
        }
    }
}

/// The unspecified absolute constants of the entropy bounds, supplied by
/// the caller. `c`, `k` belong to the upper (Mendelson–Vershynin) bound and
/// `c_prime`, `k_prime` to the lower (Talagrand) bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantsConfig {
    pub c: f64,
    pub c_prime: f64,
    pub k: f64,
    pub k_prime: f64,
    pub log_base: LogBase,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        ConstantsConfig {
            c: 1.0,
            c_prime: 1.0,
            k: 1.0,
            k_prime: 1.0,
            log_base: LogBase::Natural,
        }
    }
}

impl ConstantsConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("c", self.c), ("c'", self.c_prime), ("K", self.k), ("K'", self.k_prime)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("constant {name} = {v} must be positive")));
            }
        }
        Ok(())
    }

    /// `c·ε`, the scale at which the fat dimension enters the upper bound.
    pub fn upper_scale(&self, eps: f64) -> Result<f64> {
        self.validate()?;
        scale_in_unit(self.c * eps, "c·ε")
    }

    /// `c′·ε`, the scale at which the fat dimension enters the lower bound.
    pub fn lower_scale(&self, eps: f64) -> Result<f64> {
        self.validate()?;
        scale_in_unit(self.c_prime * eps, "c'·ε")
    }
}

fn scale_in_unit(s: f64, what: &str) -> Result<f64> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::domain(format!("{what} = {s} is outside (0, 1]")));
    }
    Ok(s)
}

/// Upper entropy bound `(2/ε)^(K·fat)` given `fat = fat_{cε}(F)`.
pub fn mv_entropy_bound(fat_at_c_eps: usize, eps: f64, cfg: &ConstantsConfig) -> Result<f64> {
    cfg.validate()?;
    if !(eps > 0.0 && eps < 2.0) {
        return Err(Error::domain(format!("ε = {eps} must lie in (0, 2)")));
    }
    Ok((2.0 / eps).powf(cfg.k * fat_at_c_eps as f64))
}

/// Lower entropy bound `2^(K′·fat)` given `fat = fat_{c′ε}(F)`.
pub fn talagrand_lower_bound(fat_at_cp_eps: usize, cfg: &ConstantsConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(2f64.powf(cfg.k_prime * fat_at_cp_eps as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyRow {
    pub eps: f64,
    pub number: usize,
    pub lower_bound: usize,
    pub method: CoverMode,
    pub centers: Vec<usize>,
}

/// Covering numbers of a concept class under `μ(△)`, one row per radius.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyReport {
    pub class_size: usize,
    pub rows: Vec<EntropyRow>,
}

pub fn metric_entropy_condition(class: &ConceptClass, eps_list: &[f64]) -> Result<EntropyReport> {
    let m = metric_from_concepts(class)?;
    let rows = eps_list
        .iter()
        .map(|&eps| {
            covering_number(&m, eps, CoverMode::Exact).map(|r| EntropyRow {
                eps,
                number: r.number,
                lower_bound: r.lower_bound,
                method: r.method,
                centers: r.centers,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EntropyReport {
        class_size: class.len(),
        rows,
    })
}
