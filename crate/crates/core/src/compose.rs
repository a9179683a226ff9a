//! Connectives and composition classes.
//!
//! A classical connective `u: {0,1}^k → {0,1}` turns concept classes
//! `C₁,…,C_k` into `u(C₁,…,C_k)`; a continuous connective
//! `u: [0,1]^k → [0,1]` with a declared modulus of uniform continuity does
//! the same for function classes. The verifiers here check the
//! constant-free steps behind the composition bound: the modulus itself,
//! its transfer to the map `(f₁,…,f_k) ↦ u(f₁,…,f_k)`, and the covering
//! chain that follows from it.

use std::fmt;
use std::sync::Arc;

use itertools::Itertools;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cover::{self, ClassDistance, ConstantsConfig, CoverMode, LogBase};
use crate::error::{Error, Result};
use crate::gen;
use crate::model::{
    self, Concept, ConceptClass, FiniteSpace, FunctionClass, FunctionTable,
};
use crate::shatter;

/// Default cap on `Π |Cᵢ|` when enumerating a composition class.
pub const DEFAULT_COMPOSE_CAP: u128 = 1_000_000;

/// Samples per parallel chunk in the Monte Carlo verifiers. Fixed so that
/// results do not depend on the number of worker threads.
const CHUNK: usize = 4096;

/// A boolean connective of arity `k ≥ 2` given by its truth table. Row `r`
/// of the table is the output for the inputs whose bits spell `r` with the
/// first input most significant, so `"0110"` is exclusive or.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassicalConnective {
    name: String,
    arity: usize,
    table: Vec<bool>,
}

impl ClassicalConnective {
    pub fn new(name: impl Into<String>, arity: usize, table: Vec<bool>) -> Result<Self> {
        if arity < 2 {
            return Err(Error::domain(format!("connective arity must be >= 2, got {arity}")));
        }
        if arity > 20 {
            return Err(Error::capacity("truth table rows", 1u128 << arity, 1 << 20));
        }
        if table.len() != 1 << arity {
            return Err(Error::Dimension {
                expected: 1 << arity,
                found: table.len(),
            });
        }
        Ok(ClassicalConnective {
            name: name.into(),
            arity,
            table,
        })
    }

    /// Parses a string of `2^k` characters `0`/`1`.
    pub fn from_truth_table(bits: &str) -> Result<Self> {
        let table = bits
            .chars()
            .map(|ch| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("truth table character {other:?} is not 0 or 1"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let n = table.len();
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::Parse(format!(
                "truth table length {n} is not 2^k with k >= 2"
            )));
        }
        Self::new(bits, n.trailing_zeros() as usize, table)
    }

    /// `and`, `or`, `xor` (parity) and `nand` at any arity.
    pub fn catalog(name: &str, arity: usize) -> Result<Self> {
        let rule: fn(u32, usize) -> bool = match name {
            "and" => |ones, k| ones as usize == k,
            "or" => |ones, _| ones > 0,
            "xor" => |ones, _| ones % 2 == 1,
            "nand" => |ones, k| (ones as usize) < k,
            other => return Err(Error::Parse(format!("unknown classical connective {other:?}"))),
        };
        if !(2..=20).contains(&arity) {
            return Err(Error::domain(format!("connective arity must be in 2..=20, got {arity}")));
        }
        let table = (0u32..1 << arity).map(|r| rule(r.count_ones(), arity)).collect();
        Self::new(name, arity, table)
    }

    /// The connective returning input `i` (0-based).
    pub fn projection(arity: usize, i: usize) -> Result<Self> {
        if i >= arity {
            return Err(Error::domain(format!("projection index {i} >= arity {arity}")));
        }
        let table = (0usize..1 << arity).map(|r| r >> (arity - 1 - i) & 1 == 1).collect();
        Self::new(format!("proj{}", i + 1), arity, table)
    }

    pub fn constant(arity: usize, value: bool) -> Result<Self> {
        Self::new(format!("const{}", value as u8), arity, vec![value; 1 << arity])
    }

    /// Uniformly random truth table.
    pub fn random<R: Rng>(rng: &mut R, arity: usize) -> Result<Self> {
        let table: Vec<bool> = (0..1usize << arity).map(|_| rng.gen()).collect();
        let name: String = table.iter().map(|&b| if b { '1' } else { '0' }).collect();
        Self::new(name, arity, table)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn table(&self) -> &[bool] {
        &self.table
    }

    pub fn eval(&self, inputs: &[bool]) -> bool {
        debug_assert_eq!(inputs.len(), self.arity);
        let row = inputs.iter().fold(0usize, |acc, &b| acc << 1 | b as usize);
        self.table[row]
    }
}

type ModulusFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type EvalFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A modulus of uniform continuity `δ: (0,1] → (0,1]`.
#[derive(Clone)]
pub struct Modulus {
    name: String,
    f: ModulusFn,
}

impl fmt::Debug for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Modulus({})", self.name)
    }
}

impl Modulus {
    pub fn new(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Modulus {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    /// `δ(ε) = min(a·ε, 1)`.
    pub fn linear(a: f64) -> Self {
        Modulus::new(format!("{a}*eps"), move |e| (a * e).min(1.0))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `δ(ε)`, with both the argument and the value checked against `(0,1]`.
    pub fn eval(&self, eps: f64) -> Result<f64> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::domain(format!("modulus argument {eps} is outside (0, 1]")));
        }
        let d = (self.f)(eps);
        if !(d > 0.0 && d <= 1.0) {
            return Err(Error::Invariant(format!(
                "modulus {} gave δ({eps}) = {d}, outside (0, 1]",
                self.name
            )));
        }
        Ok(d)
    }
}

/// A map `[0,1]^k → [0,1]` with a declared modulus of uniform continuity
/// with respect to the L2 product distance on the inputs.
#[derive(Clone)]
pub struct ContinuousConnective {
    name: String,
    arity: usize,
    eval: EvalFn,
    modulus: Modulus,
}

impl fmt::Debug for ContinuousConnective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ContinuousConnective")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .field("modulus", &self.modulus)
            .finish()
    }
}

/// Points of `[0,1]^k` probed at construction: every corner plus seeded
/// uniform draws.
fn probe_points(arity: usize) -> Vec<Vec<f64>> {
    let corners = (0..1usize << arity.min(10))
        .map(|r| (0..arity).map(|i| (r >> i & 1) as f64).collect());
    let mut rng = gen::rng(0x5eed, arity as u64);
    let random = (0..256).map(move |_| (0..arity).map(|_| rng.gen::<f64>()).collect());
    corners.chain(random).collect()
}

impl ContinuousConnective {
    /// Checks the evaluator on sampled inputs and the modulus on sampled
    /// radii before accepting the connective.
    pub fn new(
        name: impl Into<String>,
        arity: usize,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        modulus: Modulus,
    ) -> Result<Self> {
        let name = name.into();
        if arity < 2 {
            return Err(Error::domain(format!("connective arity must be >= 2, got {arity}")));
        }
        for x in probe_points(arity) {
            let y = eval(&x);
            if !(0.0..=1.0).contains(&y) {
                return Err(Error::validation(format!(
                    "connective {name} maps {x:?} to {y}, outside [0, 1]"
                )));
            }
        }
        for i in 1..=100 {
            modulus.eval(i as f64 / 100.0)?;
        }
        modulus.eval(1e-9)?;
        Ok(ContinuousConnective {
            name,
            arity,
            eval: Arc::new(eval),
            modulus,
        })
    }

    /// Built-in connectives: `mul` (product, `δ(ε) = ε/k`), `min`, `max`,
    /// `mean` and `neg` (`1 − x₁`), the last four with `δ(ε) = ε`.
    pub fn catalog(name: &str, arity: usize) -> Result<Self> {
        let k = arity as f64;
        match name {
            "mul" => Self::new(
                "mul",
                arity,
                |x: &[f64]| x.iter().product(),
                Modulus::new(format!("eps/{arity}"), move |e| e / k),
            ),
            "min" => Self::new(
                "min",
                arity,
                |x: &[f64]| x.iter().copied().fold(1.0, f64::min),
                Modulus::linear(1.0),
            ),
            "max" => Self::new(
                "max",
                arity,
                |x: &[f64]| x.iter().copied().fold(0.0, f64::max),
                Modulus::linear(1.0),
            ),
            "mean" => Self::new(
                "mean",
                arity,
                move |x: &[f64]| (x.iter().sum::<f64>() / k).min(1.0),
                Modulus::linear(1.0),
            ),
            "neg" => Self::new("neg", arity, |x: &[f64]| 1.0 - x[0], Modulus::linear(1.0)),
            other => Err(Error::Parse(format!("unknown continuous connective {other:?}"))),
        }
    }

    /// The constant map; any modulus is valid for it.
    pub fn constant(arity: usize, value: f64, modulus: Modulus) -> Result<Self> {
        Self::new(format!("const({value})"), arity, move |_: &[f64]| value, modulus)
    }

    /// The same evaluator with a different declared modulus.
    pub fn with_modulus(&self, modulus: Modulus) -> Result<Self> {
        let eval = self.eval.clone();
        Self::new(self.name.clone(), self.arity, move |x: &[f64]| eval(x), modulus)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn eval(&self, inputs: &[f64]) -> f64 {
        (self.eval)(inputs)
    }
}

fn check_operands(arity: usize, count: usize, spaces: &[&Arc<FiniteSpace>]) -> Result<()> {
    if count != arity {
        return Err(Error::Dimension {
            expected: arity,
            found: count,
        });
    }
    if let Some(first) = spaces.first() {
        if spaces.iter().any(|s| s != first) {
            return Err(Error::validation("composed classes must share one space"));
        }
    }
    Ok(())
}

fn check_product_size(mut sizes: impl Iterator<Item = usize>, cap: u128) -> Result<u128> {
    let size = sizes.try_fold(1u128, |a, s| a.checked_mul(s as u128));
    match size {
        Some(s) if s <= cap => Ok(s),
        other => Err(Error::capacity("composition product", other.unwrap_or(u128::MAX), cap)),
    }
}

/// `u(C₁,…,C_k) = {u∘(χ_{A₁},…,χ_{A_k})}`, deduplicated, in lexicographic
/// order of the member tuples.
pub fn compose_concepts(u: &ClassicalConnective, classes: &[ConceptClass], cap: u128) -> Result<ConceptClass> {
    let spaces: Vec<_> = classes.iter().map(ConceptClass::space).collect();
    check_operands(u.arity(), classes.len(), &spaces)?;
    if classes.iter().any(ConceptClass::is_empty) {
        return Err(Error::EmptyClass);
    }
    check_product_size(classes.iter().map(ConceptClass::len), cap)?;
    let n = classes[0].points();
    let mut inputs = vec![false; u.arity()];
    let composed = classes
        .iter()
        .map(|c| c.concepts().iter())
        .multi_cartesian_product()
        .map(|tuple| {
            let bits: Vec<bool> = (0..n)
                .map(|p| {
                    for (slot, a) in inputs.iter_mut().zip(&tuple) {
                        *slot = a.contains(p);
                    }
                    u.eval(&inputs)
                })
                .collect();
            Concept::from_bools(&bits)
        })
        .collect();
    ConceptClass::new(spaces[0].clone(), composed)
}

/// Smallest integer `α` with `k < α / log(e·α)`.
pub fn alpha_k(k: usize, base: LogBase) -> Result<usize> {
    if k < 2 {
        return Err(Error::domain(format!("alpha_k needs k >= 2, got {k}")));
    }
    let kf = k as f64;
    (1..=1usize << 40)
        .find(|&a| {
            let a = a as f64;
            let denom = base.log(std::f64::consts::E * a);
            denom > 0.0 && kf < a / denom
        })
        .ok_or_else(|| Error::Invariant(format!("alpha_k scan did not terminate for k = {k}")))
}

/// `d·α_k`, a strict upper bound on the VC dimension of `u(C₁,…,C_k)`
/// when every `VC(Cᵢ) ≤ d`.
pub fn vc_composition_bound(d: usize, k: usize, base: LogBase) -> Result<usize> {
    if d < 1 {
        return Err(Error::domain("vc_composition_bound needs d >= 1"));
    }
    Ok(d * alpha_k(k, base)?)
}

/// `u(F₁,…,F_k) = {u(f₁,…,f_k)}`, deduplicated, in lexicographic order of
/// the member tuples.
pub fn compose_functions(u: &ContinuousConnective, classes: &[FunctionClass], cap: u128) -> Result<FunctionClass> {
    let spaces: Vec<_> = classes.iter().map(FunctionClass::space).collect();
    check_operands(u.arity(), classes.len(), &spaces)?;
    if classes.iter().any(FunctionClass::is_empty) {
        return Err(Error::EmptyClass);
    }
    check_product_size(classes.iter().map(FunctionClass::len), cap)?;
    let n = classes[0].points();
    let mut inputs = vec![0.0; u.arity()];
    let composed = classes
        .iter()
        .map(|c| c.functions().iter())
        .multi_cartesian_product()
        .map(|tuple| {
            let values: Vec<f64> = (0..n)
                .map(|p| {
                    for (slot, f) in inputs.iter_mut().zip(&tuple) {
                        *slot = f.value(p);
                    }
                    u.eval(&inputs)
                })
                .collect();
            FunctionTable::new(values).map_err(|e| Error::Invariant(format!("connective {} left [0,1]: {e}", u.name())))
        })
        .collect::<Result<Vec<_>>>()?;
    FunctionClass::new(spaces[0].clone(), composed)
}

/// `δ(ε/2)·ε/(2k)`: a modulus for `(f₁,…,f_k) ↦ u(f₁,…,f_k)` from the
/// product L2 distance to the L2(μ) distance, given a modulus `δ` of `u`.
pub fn modulus_transfer(delta: &Modulus, k: usize, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::domain(format!("ε = {eps} is outside (0, 1]")));
    }
    if k < 1 {
        return Err(Error::domain("arity must be >= 1"));
    }
    Ok(delta.eval(eps / 2.0)? * eps / (2.0 * k as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityRow {
    pub eps: f64,
    pub delta: f64,
    /// Pairs drawn at distance `< δ(ε)` and compared.
    pub pairs: usize,
    /// Draws discarded because the partner fell outside the cube.
    pub rejected: usize,
    pub violations: usize,
    /// Largest `|u(x) − u(y)|` seen among compared pairs.
    pub max_gap: f64,
    /// A violating pair, if any was found.
    pub example: Option<(Vec<f64>, Vec<f64>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityReport {
    pub connective: String,
    pub modulus: String,
    pub samples: usize,
    pub seed: u64,
    pub rows: Vec<ContinuityRow>,
    pub violations: usize,
}

fn continuity_chunk(
    u: &ContinuousConnective,
    eps: f64,
    delta: f64,
    count: usize,
    rng: &mut impl Rng,
) -> ContinuityRow {
    let k = u.arity();
    let mut row = ContinuityRow {
        eps,
        delta,
        pairs: 0,
        rejected: 0,
        violations: 0,
        max_gap: 0.0,
        example: None,
    };
    let mut dir = vec![0.0; k];
    for s in 0..count {
        // a quarter of the anchors sit on faces of the cube
        let x: Vec<f64> = (0..k)
            .map(|_| {
                if s % 4 == 0 && rng.gen_bool(0.5) {
                    rng.gen_range(0..=1) as f64
                } else {
                    rng.gen()
                }
            })
            .collect();
        // half of the radii land in [0.9δ, δ)
        let r = if s % 2 == 0 {
            rng.gen_range(0.9 * delta..delta)
        } else {
            rng.gen_range(0.0..delta)
        };
        let mut y = None;
        for _ in 0..64 {
            let norm = loop {
                for d in dir.iter_mut() {
                    *d = rng.gen_range(-1.0..=1.0);
                }
                let n2: f64 = dir.iter().map(|d| d * d).sum();
                if n2 > 1e-12 && n2 <= 1.0 {
                    break n2.sqrt();
                }
            };
            let cand: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + r * di / norm).collect();
            if cand.iter().all(|v| (0.0..=1.0).contains(v)) {
                y = Some(cand);
                break;
            }
        }
        let Some(y) = y else {
            row.rejected += 1;
            continue;
        };
        let d = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if !(d < delta) {
            row.rejected += 1;
            continue;
        }
        row.pairs += 1;
        let gap = (u.eval(&x) - u.eval(&y)).abs();
        row.max_gap = row.max_gap.max(gap);
        if !(gap < eps) {
            row.violations += 1;
            if row.example.is_none() {
                row.example = Some((x, y));
            }
        }
    }
    row
}

fn merge_rows(mut a: ContinuityRow, b: ContinuityRow) -> ContinuityRow {
    a.pairs += b.pairs;
    a.rejected += b.rejected;
    a.violations += b.violations;
    a.max_gap = a.max_gap.max(b.max_gap);
    if a.example.is_none() {
        a.example = b.example;
    }
    a
}

fn chunk_sizes(total: usize) -> Vec<usize> {
    (0..total.div_ceil(CHUNK))
        .map(|c| CHUNK.min(total - c * CHUNK))
        .collect()
}

/// Draws `samples` seeded pairs `x, y ∈ [0,1]^k` with `d₂(x,y) < δ(ε)` per
/// radius and counts pairs with `|u(x) − u(y)| ≥ ε`.
pub fn verify_uniform_continuity(
    u: &ContinuousConnective,
    eps_list: &[f64],
    samples: usize,
    seed: u64,
) -> Result<ContinuityReport> {
    if samples == 0 {
        return Err(Error::domain("samples must be >= 1"));
    }
    let mut rows = Vec::with_capacity(eps_list.len());
    for (ei, &eps) in eps_list.iter().enumerate() {
        let delta = u.modulus().eval(eps)?;
        let row = chunk_sizes(samples)
            .into_par_iter()
            .enumerate()
            .map(|(c, count)| {
                let mut rng = gen::rng(seed, (ei as u64) << 32 | c as u64);
                continuity_chunk(u, eps, delta, count, &mut rng)
            })
            .collect::<Vec<_>>()
            .into_iter()
            .reduce(merge_rows)
            .expect("samples >= 1");
        rows.push(row);
    }
    let violations = rows.iter().map(|r| r.violations).sum();
    Ok(ContinuityReport {
        connective: u.name().to_string(),
        modulus: u.modulus().name().to_string(),
        samples,
        seed,
        rows,
        violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiRow {
    pub eps: f64,
    /// `δ(ε/2)·ε/(2k)`.
    pub threshold: f64,
    pub pairs_tested: usize,
    pub in_threshold: usize,
    pub violations: usize,
    /// Largest composed distance among in-threshold pairs.
    pub max_image_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiReport {
    pub connective: String,
    pub trials: usize,
    pub seed: u64,
    pub rows: Vec<PhiRow>,
    pub violations: usize,
}

/// For each function, the index of its nearest other member (itself for a
/// singleton class).
fn nearest_neighbours(class: &FunctionClass) -> Vec<usize> {
    let w = class.space().weights();
    let fs = class.functions();
    (0..fs.len())
        .map(|i| {
            (0..fs.len())
                .filter(|&j| j != i)
                .min_by(|&a, &b| {
                    let da = model::l2_unchecked(fs[i].values(), fs[a].values(), w);
                    let db = model::l2_unchecked(fs[i].values(), fs[b].values(), w);
                    da.total_cmp(&db)
                })
                .unwrap_or(i)
        })
        .collect()
}

/// Samples tuple pairs from `F₁ × … × F_k` (half of them perturbing a
/// random subset of coordinates to nearest neighbours) and checks that
/// product distance `< δ(ε/2)·ε/(2k)` forces `‖u(f) − u(f′)‖₂ < ε`.
pub fn verify_phi_modulus(
    u: &ContinuousConnective,
    classes: &[FunctionClass],
    eps_list: &[f64],
    trials: usize,
    seed: u64,
) -> Result<PhiReport> {
    let spaces: Vec<_> = classes.iter().map(FunctionClass::space).collect();
    check_operands(u.arity(), classes.len(), &spaces)?;
    if classes.iter().any(FunctionClass::is_empty) {
        return Err(Error::EmptyClass);
    }
    let space = spaces[0].clone();
    let w = space.weights();
    let n = space.len();
    let k = u.arity();
    let neighbours: Vec<Vec<usize>> = classes.iter().map(nearest_neighbours).collect();
    let compose_at = |tuple: &[usize]| -> Vec<f64> {
        let mut inputs = vec![0.0; k];
        (0..n)
            .map(|p| {
                for (i, slot) in inputs.iter_mut().enumerate() {
                    *slot = classes[i].functions()[tuple[i]].value(p);
                }
                u.eval(&inputs)
            })
            .collect()
    };
    let mut rows = Vec::with_capacity(eps_list.len());
    for (ei, &eps) in eps_list.iter().enumerate() {
        let threshold = modulus_transfer(u.modulus(), k, eps)?;
        let row = chunk_sizes(trials)
            .into_par_iter()
            .enumerate()
            .map(|(c, count)| {
                let mut rng = gen::rng(seed, (ei as u64) << 32 | c as u64);
                let mut row = PhiRow {
                    eps,
                    threshold,
                    pairs_tested: 0,
                    in_threshold: 0,
                    violations: 0,
                    max_image_distance: 0.0,
                };
                for s in 0..count {
                    let a: Vec<usize> = classes.iter().map(|c| rng.gen_range(0..c.len())).collect();
                    let b: Vec<usize> = if s % 2 == 0 {
                        classes.iter().map(|c| rng.gen_range(0..c.len())).collect()
                    } else {
                        a.iter()
                            .enumerate()
                            .map(|(i, &ai)| if rng.gen_bool(0.5) { neighbours[i][ai] } else { ai })
                            .collect()
                    };
                    let parts: Vec<f64> = (0..k)
                        .map(|i| {
                            let fs = classes[i].functions();
                            model::l2_unchecked(fs[a[i]].values(), fs[b[i]].values(), w)
                        })
                        .collect();
                    let d = model::l2_product_distance(&parts).expect("k >= 2 non-negative parts");
                    row.pairs_tested += 1;
                    if d < threshold {
                        row.in_threshold += 1;
                        let image = model::l2_unchecked(&compose_at(&a), &compose_at(&b), w);
                        row.max_image_distance = row.max_image_distance.max(image);
                        if !(image < eps) {
                            row.violations += 1;
                        }
                    }
                }
                row
            })
            .collect::<Vec<_>>()
            .into_iter()
            .reduce(|mut x, y| {
                x.pairs_tested += y.pairs_tested;
                x.in_threshold += y.in_threshold;
                x.violations += y.violations;
                x.max_image_distance = x.max_image_distance.max(y.max_image_distance);
                x
            })
            .unwrap_or(PhiRow {
                eps,
                threshold,
                pairs_tested: 0,
                in_threshold: 0,
                violations: 0,
                max_image_distance: 0.0,
            });
        rows.push(row);
    }
    let violations = rows.iter().map(|r| r.violations).sum();
    Ok(PhiReport {
        connective: u.name().to_string(),
        trials,
        seed,
        rows,
        violations,
    })
}

/// Both sides of `N(u(F₁,…,F_k), ε) ≤ Π N(Fᵢ, δ(ε,k)/√k)` under L2(μ),
/// with `δ(ε,k)` the transferred modulus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    pub connective: String,
    pub eps: f64,
    pub k: usize,
    pub transferred_modulus: f64,
    pub factor_scale: f64,
    pub composed_size: usize,
    pub composed_number: usize,
    pub factor_sizes: Vec<usize>,
    pub factor_numbers: Vec<usize>,
    pub bound: u128,
    pub holds: bool,
}

pub fn verify_covering_chain(
    u: &ContinuousConnective,
    classes: &[FunctionClass],
    eps: f64,
    cap: u128,
) -> Result<ChainReport> {
    let k = u.arity();
    let composed = compose_functions(u, classes, cap)?;
    let transferred = modulus_transfer(u.modulus(), k, eps)?;
    let factor_scale = transferred / (k as f64).sqrt();
    let composed_number = cover::covering_number(
        &cover::metric_from_class(&composed, ClassDistance::L2)?,
        eps,
        CoverMode::Exact,
    )?
    .number;
    let factor_numbers = classes
        .iter()
        .map(|f| {
            let m = cover::metric_from_class(f, ClassDistance::L2)?;
            cover::covering_number(&m, factor_scale, CoverMode::Exact).map(|r| r.number)
        })
        .collect::<Result<Vec<_>>>()?;
    let bound = factor_numbers.iter().map(|&x| x as u128).product();
    Ok(ChainReport {
        connective: u.name().to_string(),
        eps,
        k,
        transferred_modulus: transferred,
        factor_scale,
        composed_size: composed.len(),
        composed_number,
        factor_sizes: classes.iter().map(FunctionClass::len).collect(),
        factor_numbers,
        bound,
        holds: composed_number as u128 <= bound,
    })
}

/// Everything the composition fat-dimension bound depends on.
#[derive(Debug, Clone)]
pub struct MainBoundInputs {
    pub eps: f64,
    pub k: usize,
    pub modulus: Modulus,
    /// `fat` of each factor class at [`main_bound_scale`].
    pub fat_values: Vec<usize>,
    pub cfg: ConstantsConfig,
}

/// `δ(ε/(2c′))`, the modulus value shared by the scale and the multiplier.
fn inner_modulus(eps: f64, modulus: &Modulus, cfg: &ConstantsConfig) -> Result<f64> {
    cfg.validate()?;
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::domain(format!("ε = {eps} is outside (0, 1]")));
    }
    modulus.eval(eps / (2.0 * cfg.c_prime))
}

/// `c·δ(ε/(2c′))·ε/(k√k)`, the scale at which the factor classes' fat
/// dimensions enter the bound; must lie in `(0,1]`.
pub fn main_bound_scale(eps: f64, k: usize, modulus: &Modulus, cfg: &ConstantsConfig) -> Result<f64> {
    if k < 2 {
        return Err(Error::domain(format!("arity must be >= 2, got {k}")));
    }
    let inner = inner_modulus(eps, modulus, cfg)?;
    let kf = k as f64;
    let scale = cfg.c * inner * eps / (kf * kf.sqrt());
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(Error::domain(format!(
            "inner scale {scale} is outside (0, 1]; the bound is vacuous at ε = {eps}"
        )));
    }
    Ok(scale)
}

/// `K·log(4c′k√k/(δ(ε/(2c′))·ε)) / (K′·log 2)`.
pub fn main_bound_multiplier(eps: f64, k: usize, modulus: &Modulus, cfg: &ConstantsConfig) -> Result<f64> {
    main_bound_scale(eps, k, modulus, cfg)?;
    let inner = inner_modulus(eps, modulus, cfg)?;
    let kf = k as f64;
    let arg = 4.0 * cfg.c_prime * kf * kf.sqrt() / (inner * eps);
    if !(arg > 1.0) {
        return Err(Error::domain(format!("log argument {arg} is <= 1")));
    }
    let base = cfg.log_base;
    Ok(cfg.k * base.log(arg) / (cfg.k_prime * base.log(2.0)))
}

/// Right-hand side of `fat_ε(u(F₁,…,F_k)) ≤ multiplier · Σᵢ fat_scale(Fᵢ)`.
pub fn main_bound_rhs(inputs: &MainBoundInputs) -> Result<f64> {
    if inputs.fat_values.len() != inputs.k {
        return Err(Error::Dimension {
            expected: inputs.k,
            found: inputs.fat_values.len(),
        });
    }
    let multiplier = main_bound_multiplier(inputs.eps, inputs.k, &inputs.modulus, &inputs.cfg)?;
    Ok(multiplier * inputs.fat_values.iter().sum::<usize>() as f64)
}

/// Measured left side against the bound under caller-supplied constants.
/// Nothing is asserted when the constants make the inner scale invalid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MainBoundReport {
    pub eps: f64,
    pub k: usize,
    pub scale: Option<f64>,
    pub multiplier: Option<f64>,
    pub fat_values: Vec<usize>,
    pub rhs: Option<f64>,
    pub composed_fat: usize,
    pub holds: Option<bool>,
    pub note: Option<String>,
}

pub fn check_main_bound(
    u: &ContinuousConnective,
    classes: &[FunctionClass],
    eps: f64,
    cfg: &ConstantsConfig,
    tolerance: f64,
    cap: u128,
) -> Result<MainBoundReport> {
    let k = u.arity();
    let composed = compose_functions(u, classes, cap)?;
    let composed_fat = shatter::fat_dimension_with_tolerance(&composed, eps, tolerance)?.value;
    let scale = match main_bound_scale(eps, k, u.modulus(), cfg) {
        Ok(s) => s,
        Err(Error::Domain(msg)) => {
            return Ok(MainBoundReport {
                eps,
                k,
                scale: None,
                multiplier: None,
                fat_values: Vec::new(),
                rhs: None,
                composed_fat,
                holds: None,
                note: Some(msg),
            })
        }
        Err(e) => return Err(e),
    };
    let fat_values = classes
        .iter()
        .map(|f| shatter::fat_dimension_with_tolerance(f, scale, tolerance).map(|r| r.value))
        .collect::<Result<Vec<_>>>()?;
    let inputs = MainBoundInputs {
        eps,
        k,
        modulus: u.modulus().clone(),
        fat_values: fat_values.clone(),
        cfg: *cfg,
    };
    let multiplier = main_bound_multiplier(eps, k, u.modulus(), cfg)?;
    let rhs = main_bound_rhs(&inputs)?;
    Ok(MainBoundReport {
        eps,
        k,
        scale: Some(scale),
        multiplier: Some(multiplier),
        fat_values,
        rhs: Some(rhs),
        composed_fat,
        holds: Some(composed_fat as f64 <= rhs),
        note: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point_space() -> Arc<FiniteSpace> {
        Arc::new(FiniteSpace::with_size(2).unwrap())
    }

    fn class(space: &Arc<FiniteSpace>, members: &[&str]) -> ConceptClass {
        ConceptClass::new(
            space.clone(),
            members.iter().map(|m| Concept::parse(m).unwrap()).collect(),
        )
        .unwrap()
    }

    fn sorted_bits(c: &ConceptClass) -> Vec<String> {
        c.concepts().iter().map(Concept::to_bit_string).sorted().collect()
    }

    #[test]
    fn truth_table_order() {
        let xor = ClassicalConnective::from_truth_table("0110").unwrap();
        assert_eq!(xor.table(), ClassicalConnective::catalog("xor", 2).unwrap().table());
        let implies = ClassicalConnective::from_truth_table("1101").unwrap();
        assert!(!implies.eval(&[true, false]));
        assert!(implies.eval(&[false, true]));
        assert!(ClassicalConnective::from_truth_table("011").is_err());
        assert!(ClassicalConnective::from_truth_table("01").is_err());
        assert!(ClassicalConnective::from_truth_table("01x0").is_err());
        let p = ClassicalConnective::projection(3, 0).unwrap();
        assert!(p.eval(&[true, false, false]));
        assert!(!p.eval(&[false, true, true]));
    }

    #[test]
    fn xor_composition_example() {
        let s = two_point_space();
        let c1 = class(&s, &["00", "10"]);
        let c2 = class(&s, &["00", "01"]);
        let xor = ClassicalConnective::catalog("xor", 2).unwrap();
        let out = compose_concepts(&xor, &[c1.clone(), c2.clone()], DEFAULT_COMPOSE_CAP).unwrap();
        assert_eq!(sorted_bits(&out), vec!["00", "01", "10", "11"]);
        let proj = ClassicalConnective::projection(2, 0).unwrap();
        let out = compose_concepts(&proj, &[c1.clone(), c2.clone()], DEFAULT_COMPOSE_CAP).unwrap();
        assert_eq!(sorted_bits(&out), sorted_bits(&c1));
        let zero = ClassicalConnective::constant(2, false).unwrap();
        let out = compose_concepts(&zero, &[c1.clone(), c2.clone()], DEFAULT_COMPOSE_CAP).unwrap();
        assert_eq!(sorted_bits(&out), vec!["00"]);
        assert!(matches!(
            compose_concepts(&xor, &[c1.clone(), c2.clone()], 3),
            Err(Error::Capacity { .. })
        ));
        assert!(compose_concepts(&xor, &[c1], DEFAULT_COMPOSE_CAP).is_err());
        let other = Arc::new(FiniteSpace::uniform(vec!["a".into(), "b".into()]).unwrap());
        assert!(compose_concepts(&xor, &[c2, class(&other, &["11"])], DEFAULT_COMPOSE_CAP).is_err());
    }

    #[test]
    fn alpha_values() {
        // independent scan: smallest α with 2 < α/(1 + ln α)
        let oracle = |k: f64| (1..).find(|&a| k < a as f64 / (1.0 + (a as f64).ln())).unwrap();
        assert_eq!(alpha_k(2, LogBase::Natural).unwrap(), 6);
        assert_eq!(alpha_k(3, LogBase::Natural).unwrap(), 10);
        for k in 2..12 {
            assert_eq!(alpha_k(k, LogBase::Natural).unwrap(), oracle(k as f64));
            assert!(alpha_k(k + 1, LogBase::Natural).unwrap() >= alpha_k(k, LogBase::Natural).unwrap());
        }
        assert_eq!(vc_composition_bound(1, 2, LogBase::Natural).unwrap(), 6);
        assert_eq!(vc_composition_bound(2, 2, LogBase::Natural).unwrap(), 12);
        assert!(alpha_k(1, LogBase::Natural).is_err());
        assert!(vc_composition_bound(0, 2, LogBase::Natural).is_err());
    }

    #[test]
    fn function_composition_examples() {
        let space = Arc::new(FiniteSpace::with_size(3).unwrap());
        let f1 = gen::random_function_class(&mut gen::rng(3, 0), space.clone(), 5, None);
        let one = FunctionClass::new(space.clone(), vec![FunctionTable::constant(3, 1.0).unwrap()]).unwrap();
        let zero = FunctionClass::new(space.clone(), vec![FunctionTable::constant(3, 0.0).unwrap()]).unwrap();
        let mul = ContinuousConnective::catalog("mul", 2).unwrap();
        let out = compose_functions(&mul, &[f1.clone(), one], DEFAULT_COMPOSE_CAP).unwrap();
        assert_eq!(out.functions(), f1.functions());
        let out = compose_functions(&mul, &[f1, zero], DEFAULT_COMPOSE_CAP).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out.functions()[0].values(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn min_on_bits_matches_and() {
        let space = Arc::new(FiniteSpace::with_size(4).unwrap());
        let c1 = gen::random_concept_class(&mut gen::rng(5, 0), space.clone(), 6, 0.5);
        let c2 = gen::random_concept_class(&mut gen::rng(5, 1), space, 6, 0.5);
        let and = ClassicalConnective::catalog("and", 2).unwrap();
        let min = ContinuousConnective::catalog("min", 2).unwrap();
        let via_bits = compose_concepts(&and, &[c1.clone(), c2.clone()], DEFAULT_COMPOSE_CAP).unwrap();
        let via_values = compose_functions(
            &min,
            &[c1.to_function_class(), c2.to_function_class()],
            DEFAULT_COMPOSE_CAP,
        )
        .unwrap()
        .to_concept_class()
        .unwrap();
        assert_eq!(sorted_bits(&via_bits), sorted_bits(&via_values));
    }

    #[test]
    fn modulus_transfer_examples() {
        let half = Modulus::linear(0.5);
        assert!((modulus_transfer(&half, 2, 0.4).unwrap() - 0.01).abs() < 1e-15);
        assert!((modulus_transfer(&Modulus::linear(1.0), 2, 1.0).unwrap() - 0.125).abs() < 1e-15);
        let by_k: Vec<f64> = (1..6).map(|k| modulus_transfer(&half, k, 0.5).unwrap()).collect();
        assert!(by_k.windows(2).all(|w| w[1] < w[0]));
        assert!(modulus_transfer(&half, 2, 0.0).is_err());
        assert!(modulus_transfer(&half, 2, 1.5).is_err());
    }

    #[test]
    fn catalog_rejects_unknown_and_bad_outputs() {
        assert!(ContinuousConnective::catalog("pow", 2).is_err());
        assert!(ContinuousConnective::new("sum", 2, |x: &[f64]| x[0] + x[1], Modulus::linear(0.5)).is_err());
        assert!(ContinuousConnective::new(
            "id",
            2,
            |x: &[f64]| x[0],
            Modulus::new("zero", |_| 0.0)
        )
        .is_err());
        assert_eq!(ContinuousConnective::catalog("mul", 2).unwrap().modulus().eval(0.5).unwrap(), 0.25);
    }

    #[test]
    fn continuity_controls() {
        let mul = ContinuousConnective::catalog("mul", 2).unwrap();
        let ok = verify_uniform_continuity(&mul, &[0.1, 0.5], 20_000, 1).unwrap();
        assert_eq!(ok.violations, 0);
        let wrong = mul.with_modulus(Modulus::linear(2.0)).unwrap();
        let bad = verify_uniform_continuity(&wrong, &[0.1, 0.25], 20_000, 1).unwrap();
        assert!(bad.violations > 0);
        let constant = ContinuousConnective::constant(2, 0.3, Modulus::linear(1.0)).unwrap();
        assert_eq!(verify_uniform_continuity(&constant, &[0.1], 1000, 1).unwrap().violations, 0);
        assert!(verify_uniform_continuity(&mul, &[0.1], 0, 1).is_err());
    }

    #[test]
    fn continuity_report_is_reproducible() {
        let mul = ContinuousConnective::catalog("mul", 2).unwrap();
        let a = verify_uniform_continuity(&mul, &[0.25], 9000, 7).unwrap();
        let b = verify_uniform_continuity(&mul, &[0.25], 9000, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn phi_identical_tuples() {
        let space = Arc::new(FiniteSpace::with_size(3).unwrap());
        let f = gen::random_function_class(&mut gen::rng(1, 0), space, 1, None);
        let mul = ContinuousConnective::catalog("mul", 2).unwrap();
        let r = verify_phi_modulus(&mul, &[f.clone(), f], &[0.5], 200, 3).unwrap();
        assert_eq!(r.rows[0].in_threshold, 200);
        assert_eq!(r.rows[0].max_image_distance, 0.0);
        assert_eq!(r.violations, 0);
    }

    #[test]
    fn chain_with_singletons() {
        let space = Arc::new(FiniteSpace::with_size(3).unwrap());
        let f = gen::random_function_class(&mut gen::rng(1, 0), space, 1, None);
        let mul = ContinuousConnective::catalog("mul", 2).unwrap();
        let r = verify_covering_chain(&mul, &[f.clone(), f], 0.5, DEFAULT_COMPOSE_CAP).unwrap();
        assert_eq!((r.composed_number, r.bound), (1, 1));
        assert!(r.holds);
    }

    #[test]
    fn main_bound_example() {
        let cfg = ConstantsConfig::default();
        let half = Modulus::linear(0.5);
        let scale = main_bound_scale(0.5, 2, &half, &cfg).unwrap();
        assert!((scale - 0.125 * 0.5 / (2.0 * 2f64.sqrt())).abs() < 1e-15);
        assert!((scale - 0.02210).abs() < 1e-5);
        let inputs = MainBoundInputs {
            eps: 0.5,
            k: 2,
            modulus: half.clone(),
            fat_values: vec![2, 3],
            cfg,
        };
        let rhs = main_bound_rhs(&inputs).unwrap();
        // log₂(4·2·√2 / (0.125·0.5)) = log₂(2^7.5)
        assert!((rhs - 37.5).abs() < 1e-9, "{rhs}");
        let zero = MainBoundInputs { fat_values: vec![0, 0], ..inputs.clone() };
        assert_eq!(main_bound_rhs(&zero).unwrap(), 0.0);
        let mults: Vec<f64> = [0.9, 0.5, 0.2, 0.05]
            .iter()
            .map(|&e| main_bound_multiplier(e, 2, &half, &cfg).unwrap())
            .collect();
        assert!(mults.windows(2).all(|w| w[1] > w[0]));
        let huge_c = ConstantsConfig { c: 1e6, ..cfg };
        assert!(main_bound_scale(0.5, 2, &half, &huge_c).is_err());
        let short = MainBoundInputs { fat_values: vec![1], ..inputs };
        assert!(main_bound_rhs(&short).is_err());
    }
}
