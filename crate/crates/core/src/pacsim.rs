//! PAC experiments.
//!
//! Two learners live here. The tightest-rectangle learner for axis-aligned
//! rectangles in the plane is run over many seeded trials against explicit
//! distributions. The one-point learner for the counterexample function
//! class identifies a concept from a single labelled value, even though
//! that class has unbounded fat-shattering dimension below scale 1/6.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gen;
use crate::model::{Concept, ConceptClass, FunctionClass, FunctionTable, PointSubset};
use crate::shatter;

/// Points drawn by the Monte Carlo error estimator.
pub const MONTE_CARLO_POINTS: usize = 100_000;

/// Tolerance on the sum of mixture weights.
const MIXTURE_SUM_TOLERANCE: f64 = 1e-12;

/// An axis-aligned closed rectangle `[x_min,x_max] × [y_min,y_max]`, or the
/// empty set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Rectangle {
    Empty,
    Box {
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
    },
}

impl Rectangle {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let r = Rectangle::Box {
            x_min,
            x_max,
            y_min,
            y_max,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if let Rectangle::Box {
            x_min,
            x_max,
            y_min,
            y_max,
        } = *self
        {
            if [x_min, x_max, y_min, y_max].iter().any(|v| !v.is_finite()) {
                return Err(Error::validation("rectangle bounds must be finite"));
            }
            if x_min > x_max || y_min > y_max {
                return Err(Error::validation(format!(
                    "rectangle [{x_min},{x_max}]x[{y_min},{y_max}] has reversed bounds"
                )));
            }
        }
        Ok(())
    }

    pub fn contains(&self, (x, y): (f64, f64)) -> bool {
        match *self {
            Rectangle::Empty => false,
            Rectangle::Box {
                x_min,
                x_max,
                y_min,
                y_max,
            } => x_min <= x && x <= x_max && y_min <= y && y <= y_max,
        }
    }

    /// Whether `self ⊆ other`.
    pub fn is_within(&self, other: &Rectangle) -> bool {
        match (*self, *other) {
            (Rectangle::Empty, _) => true,
            (Rectangle::Box { .. }, Rectangle::Empty) => false,
            (
                Rectangle::Box {
                    x_min,
                    x_max,
                    y_min,
                    y_max,
                },
                Rectangle::Box {
                    x_min: a,
                    x_max: b,
                    y_min: c,
                    y_max: d,
                },
            ) => a <= x_min && x_max <= b && c <= y_min && y_max <= d,
        }
    }

    pub fn intersection(&self, other: &Rectangle) -> Rectangle {
        match (*self, *other) {
            (
                Rectangle::Box {
                    x_min,
                    x_max,
                    y_min,
                    y_max,
                },
                Rectangle::Box {
                    x_min: a,
                    x_max: b,
                    y_min: c,
                    y_max: d,
                },
            ) => {
                let (lx, hx, ly, hy) = (x_min.max(a), x_max.min(b), y_min.max(c), y_max.min(d));
                if lx <= hx && ly <= hy {
                    Rectangle::Box {
                        x_min: lx,
                        x_max: hx,
                        y_min: ly,
                        y_max: hy,
                    }
                } else {
                    Rectangle::Empty
                }
            }
            _ => Rectangle::Empty,
        }
    }
}

/// One uniform component of a one-dimensional mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub weight: f64,
}

/// A probability distribution on the plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PlaneDistribution {
    /// Uniform on a box of positive area.
    UniformBox {
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
    },
    /// Independent coordinates, each a finite mixture of uniform segments.
    SegmentMixture { x: Vec<Segment>, y: Vec<Segment> },
}

impl Default for PlaneDistribution {
    fn default() -> Self {
        PlaneDistribution::UniformBox {
            x_min: 0.0,
            x_max: 1.0,
            y_min: 0.0,
            y_max: 1.0,
        }
    }
}

fn validate_mixture(axis: &str, segs: &[Segment]) -> Result<Vec<Segment>> {
    if segs.is_empty() {
        return Err(Error::validation(format!("{axis}: mixture has no segments")));
    }
    for (i, s) in segs.iter().enumerate() {
        if !(s.lo.is_finite() && s.hi.is_finite() && s.lo < s.hi) {
            return Err(Error::validation(format!("{axis}[{i}]: need finite lo < hi")));
        }
        if !(s.weight.is_finite() && s.weight >= 0.0) {
            return Err(Error::validation(format!("{axis}[{i}]: weight must be >= 0")));
        }
    }
    let total: f64 = segs.iter().map(|s| s.weight).sum();
    if (total - 1.0).abs() > MIXTURE_SUM_TOLERANCE {
        return Err(Error::validation(format!("{axis}: weights sum to {total}, not 1")));
    }
    Ok(segs
        .iter()
        .map(|s| Segment {
            weight: s.weight / total,
            ..*s
        })
        .collect())
}

fn interval_mass(segs: &[Segment], lo: f64, hi: f64) -> f64 {
    segs.iter()
        .map(|s| {
            let overlap = (hi.min(s.hi) - lo.max(s.lo)).max(0.0);
            s.weight * overlap / (s.hi - s.lo)
        })
        .sum()
}

fn sample_mixture<R: Rng>(segs: &[Segment], rng: &mut R) -> f64 {
    let mut u: f64 = rng.gen();
    let pick = segs
        .iter()
        .position(|s| {
            u -= s.weight;
            u < 0.0
        })
        .unwrap_or_else(|| segs.iter().rposition(|s| s.weight > 0.0).expect("total mass 1"));
    let s = segs[pick];
    rng.gen_range(s.lo..s.hi)
}

impl PlaneDistribution {
    /// Validates and renormalises mixture weights.
    pub fn validated(&self) -> Result<Self> {
        match self {
            PlaneDistribution::UniformBox {
                x_min,
                x_max,
                y_min,
                y_max,
            } => {
                let ok = [x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite())
                    && x_min < x_max
                    && y_min < y_max;
                if !ok {
                    return Err(Error::validation("uniform box needs finite bounds with positive area"));
                }
                Ok(self.clone())
            }
            PlaneDistribution::SegmentMixture { x, y } => Ok(PlaneDistribution::SegmentMixture {
                x: validate_mixture("x", x)?,
                y: validate_mixture("y", y)?,
            }),
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> (f64, f64) {
        match self {
            PlaneDistribution::UniformBox {
                x_min,
                x_max,
                y_min,
                y_max,
            } => (rng.gen_range(*x_min..*x_max), rng.gen_range(*y_min..*y_max)),
            PlaneDistribution::SegmentMixture { x, y } => (sample_mixture(x, rng), sample_mixture(y, rng)),
        }
    }

    /// Exact probability of a closed rectangle.
    pub fn mass(&self, r: &Rectangle) -> f64 {
        let Rectangle::Box {
            x_min,
            x_max,
            y_min,
            y_max,
        } = *r
        else {
            return 0.0;
        };
        match self {
            PlaneDistribution::UniformBox {
                x_min: a,
                x_max: b,
                y_min: c,
                y_max: d,
            } => {
                let w = (x_max.min(*b) - x_min.max(*a)).max(0.0);
                let h = (y_max.min(*d) - y_min.max(*c)).max(0.0);
                w * h / ((b - a) * (d - c))
            }
            PlaneDistribution::SegmentMixture { x, y } => {
                interval_mass(x, x_min, x_max) * interval_mass(y, y_min, y_max)
            }
        }
    }

    /// `μ(H △ A) = μ(H) + μ(A) − 2μ(H ∩ A)`, clamped at zero.
    pub fn sym_diff_mass(&self, h: &Rectangle, a: &Rectangle) -> f64 {
        (self.mass(h) + self.mass(a) - 2.0 * self.mass(&h.intersection(a))).max(0.0)
    }
}

/// Bounding box of the positively labelled points; `Empty` without positives.
pub fn tightest_rectangle(sample: &[((f64, f64), bool)]) -> Rectangle {
    sample
        .iter()
        .filter(|(_, label)| *label)
        .fold(Rectangle::Empty, |acc, &((x, y), _)| match acc {
            Rectangle::Empty => Rectangle::Box {
                x_min: x,
                x_max: x,
                y_min: y,
                y_max: y,
            },
            Rectangle::Box {
                x_min,
                x_max,
                y_min,
                y_max,
            } => Rectangle::Box {
                x_min: x_min.min(x),
                x_max: x_max.max(x),
                y_min: y_min.min(y),
                y_max: y_max.max(y),
            },
        })
}

/// `⌈(4/ε)·ln(4/δ)⌉`, enough samples for error `< ε` with confidence `1 − δ`.
pub fn rect_sample_complexity(eps: f64, delta: f64) -> Result<usize> {
    for (name, v) in [("ε", eps), ("δ", delta)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::domain(format!("{name} = {v} must lie in (0, 1)")));
        }
    }
    Ok(((4.0 / eps) * (4.0 / delta).ln()).ceil() as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorEstimator {
    #[default]
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoSize {
    Auto,
}

/// Sample size per trial: a number, or `"auto"` for the sufficient bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SampleSize {
    Fixed(usize),
    Auto(AutoSize),
}

impl Default for SampleSize {
    fn default() -> Self {
        SampleSize::Auto(AutoSize::Auto)
    }
}

fn default_seed() -> u64 {
    42
}

/// A rectangle-learning experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RectExperiment {
    pub target: Rectangle,
    #[serde(default)]
    pub distribution: PlaneDistribution,
    pub eps: f64,
    pub delta: f64,
    #[serde(default)]
    pub m: SampleSize,
    pub trials: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub estimator: ErrorEstimator,
}

impl RectExperiment {
    pub fn sample_size(&self) -> Result<usize> {
        match self.m {
            SampleSize::Fixed(0) => Err(Error::domain("m must be >= 1")),
            SampleSize::Fixed(m) => Ok(m),
            SampleSize::Auto(_) => rect_sample_complexity(self.eps, self.delta),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialRow {
    pub trial: usize,
    pub error: f64,
    pub failure: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialReport {
    pub trials: usize,
    /// Trials whose error was `≥ ε`.
    pub failures: usize,
    pub empirical_failure_rate: f64,
    pub m_used: usize,
    pub error_estimator: ErrorEstimator,
    pub mean_error: f64,
    pub eps: f64,
    pub delta: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RectRun {
    pub report: TrialReport,
    pub rows: Vec<TrialRow>,
}

fn monte_carlo_error<R: Rng>(dist: &PlaneDistribution, h: &Rectangle, a: &Rectangle, rng: &mut R) -> f64 {
    let misses = (0..MONTE_CARLO_POINTS)
        .filter(|_| {
            let p = dist.sample(rng);
            h.contains(p) != a.contains(p)
        })
        .count();
    misses as f64 / MONTE_CARLO_POINTS as f64
}

/// Runs `trials` independent trials; trial `t` draws from sub-stream `t` of
/// the seed, so results do not depend on scheduling. Fails with an
/// invariant error if any hypothesis leaves the target.
pub fn run_rectangle_trials(exp: &RectExperiment) -> Result<RectRun> {
    exp.target.validate()?;
    let dist = exp.distribution.validated()?;
    if !(exp.eps > 0.0 && exp.eps < 1.0) {
        return Err(Error::domain(format!("ε = {} must lie in (0, 1)", exp.eps)));
    }
    if !(exp.delta > 0.0 && exp.delta < 1.0) {
        return Err(Error::domain(format!("δ = {} must lie in (0, 1)", exp.delta)));
    }
    if exp.trials == 0 {
        return Err(Error::domain("trials must be >= 1"));
    }
    let m = exp.sample_size()?;
    let rows = (0..exp.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = gen::rng(exp.seed, t as u64);
            let sample: Vec<((f64, f64), bool)> = (0..m)
                .map(|_| {
                    let p = dist.sample(&mut rng);
                    (p, exp.target.contains(p))
                })
                .collect();
            let h = tightest_rectangle(&sample);
            if !h.is_within(&exp.target) {
                return Err(Error::Invariant(format!("trial {t}: hypothesis {h:?} leaves the target")));
            }
            let error = match exp.estimator {
                ErrorEstimator::Exact => dist.sym_diff_mass(&h, &exp.target),
                ErrorEstimator::MonteCarlo => {
                    let mut mc = gen::rng(exp.seed, 1 << 63 | t as u64);
                    monte_carlo_error(&dist, &h, &exp.target, &mut mc)
                }
            };
            Ok(TrialRow {
                trial: t,
                error,
                failure: error >= exp.eps,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let failures = rows.iter().filter(|r| r.failure).count();
    let report = TrialReport {
        trials: exp.trials,
        failures,
        empirical_failure_rate: failures as f64 / exp.trials as f64,
        m_used: m,
        error_estimator: exp.estimator,
        mean_error: rows.iter().map(|r| r.error).sum::<f64>() / exp.trials as f64,
        eps: exp.eps,
        delta: exp.delta,
        seed: exp.seed,
    };
    Ok(RectRun { report, rows })
}

/// The function class `{f_A : A ∈ C}` with `f_A = 1 − b(A)` on `A` and
/// `b(A)` off it, where `b(Aᵢ) = i/(3|C|)` in the class's order.
#[derive(Debug, Clone)]
pub struct CounterexampleClass {
    concepts: ConceptClass,
    functions: FunctionClass,
    offsets: Vec<f64>,
}

impl CounterexampleClass {
    pub fn concepts(&self) -> &ConceptClass {
        &self.concepts
    }

    pub fn functions(&self) -> &FunctionClass {
        &self.functions
    }

    /// `b(Aᵢ)` for each concept, in class order.
    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }
}

/// `f_A` for one concept and offset `b ∈ [0, 1/3)`.
pub fn counterexample_table(concept: &Concept, b: f64) -> Result<FunctionTable> {
    if !(0.0..1.0 / 3.0).contains(&b) {
        return Err(Error::domain(format!("offset {b} is outside [0, 1/3)")));
    }
    FunctionTable::new(
        (0..concept.len())
            .map(|p| if concept.contains(p) { 1.0 - b } else { b })
            .collect(),
    )
}

pub fn build_counterexample_class(class: &ConceptClass) -> Result<CounterexampleClass> {
    if class.is_empty() {
        return Err(Error::EmptyClass);
    }
    let size = class.len() as f64;
    let offsets: Vec<f64> = (0..class.len()).map(|i| i as f64 / (3.0 * size)).collect();
    let tables = class
        .concepts()
        .iter()
        .zip(&offsets)
        .map(|(c, &b)| counterexample_table(c, b))
        .collect::<Result<Vec<_>>>()?;
    let functions = FunctionClass::new(Arc::clone(class.space()), tables)?;
    if functions.len() != class.len() {
        return Err(Error::Invariant("counterexample tables are not pairwise distinct".into()));
    }
    Ok(CounterexampleClass {
        concepts: class.clone(),
        functions,
        offsets,
    })
}

/// The concept whose table takes `value` at `point`. Since every offset is
/// below 1/3, no value in `[1/3, 2/3]` identifies anything.
pub fn identify_from_one_point(cx: &CounterexampleClass, point: usize, value: f64) -> Result<Concept> {
    let n = cx.concepts.points();
    if point >= n {
        return Err(Error::validation(format!("point {point} out of range for {n} points")));
    }
    let mut hits = cx
        .functions
        .functions()
        .iter()
        .enumerate()
        .filter(|(_, f)| f.value(point) == value)
        .map(|(i, _)| i);
    match (hits.next(), hits.next()) {
        (None, _) => Err(Error::UnknownFunction { value }),
        (Some(i), None) => Ok(cx.concepts.concepts()[i].clone()),
        (Some(_), Some(_)) => Err(Error::Invariant(format!(
            "value {value} at point {point} matches several tables"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleFatReport {
    pub eps: f64,
    pub vc: usize,
    pub vc_certificate: PointSubset,
    /// Whether the constant witness `0.5` ε-shatters the VC certificate.
    pub half_witness_shatters: bool,
    pub fat: usize,
    pub fat_certificate: PointSubset,
    pub max_offset: f64,
    pub holds: bool,
}

/// Checks `fat_ε(F_C) ≥ VC(C)` for `ε < 1/6` by re-verifying the witness
/// `(0.5, …, 0.5)` on a VC certificate and computing `fat_ε` exactly.
pub fn counterexample_fat_check(class: &ConceptClass, eps: f64) -> Result<CounterexampleFatReport> {
    if !(eps > 0.0 && eps < 1.0 / 6.0) {
        return Err(Error::domain(format!("ε = {eps} must lie in (0, 1/6)")));
    }
    let cx = build_counterexample_class(class)?;
    let vc = shatter::vc_dimension(class)?;
    let witness = vec![0.5; vc.value];
    let half_witness_shatters =
        shatter::eps_shatters_with_witness(cx.functions(), &vc.certificate, &witness, eps, 0.0)?;
    let fat = shatter::fat_dimension(cx.functions(), eps)?;
    let max_offset = cx.offsets.last().copied().unwrap_or(0.0);
    Ok(CounterexampleFatReport {
        eps,
        vc: vc.value,
        vc_certificate: vc.certificate,
        half_witness_shatters,
        fat: fat.value,
        fat_certificate: fat.certificate,
        max_offset,
        holds: half_witness_shatters && fat.value >= vc.value && max_offset < 1.0 / 3.0,
    })
}
