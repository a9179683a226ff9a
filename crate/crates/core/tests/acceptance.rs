//! Acceptance suite: twelve end-to-end criteria, each printed as one
//! PASS/FAIL line. Runs as a plain binary so the lines are always visible;
//! exits non-zero if any criterion fails.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use shatterlab::compose::{self, ClassicalConnective, ContinuousConnective, Modulus, DEFAULT_COMPOSE_CAP};
use shatterlab::cover::{self, CoverMode, FiniteMetric, LogBase, DEFAULT_PRODUCT_CAP};
use shatterlab::gen;
use shatterlab::model::{Concept, ConceptClass, FiniteSpace};
use shatterlab::pacsim::{self, ErrorEstimator, PlaneDistribution, Rectangle, RectExperiment, SampleSize};
use shatterlab::shatter;
use shatterlab::PointSubset;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c01_interval_vc() -> Result<String, String> {
    let c = gen::interval_traces(10);
    let r = shatter::vc_dimension(&c).map_err(|e| e.to_string())?;
    ensure(r.value == 2, || format!("VC = {}", r.value))?;
    ensure(r.exhausted, || "search not exhausted".into())?;
    ensure(shatter::shatters(&c, &r.certificate).unwrap(), || "certificate not shattered".into())?;
    ensure(common::shatters(&c, r.certificate.indices()), || "oracle rejects certificate".into())?;
    ensure(common::vc(&c) == 2, || "brute-force VC differs".into())?;
    let labels = r.certificate.labels(c.space());
    Ok(format!("VC = 2, certificate {labels:?}"))
}

fn c02_hyperplane_vc() -> Result<String, String> {
    let mut out = Vec::new();
    for n in 2..=3usize {
        let pts = gen::hyperplane_points(n, 2, &mut gen::rng(42, n as u64));
        let exact = gen::hyperplane_traces(&pts);
        let vc = shatter::vc_dimension(&exact).map_err(|e| e.to_string())?;
        // brute force: every integer hyperplane a·x = b with |aᵢ| ≤ 3
        let bound = 3 * 3 * n as i64;
        let mut brute = Vec::new();
        let mut a = vec![-3i64; n];
        loop {
            if a.iter().any(|&v| v != 0) {
                for b in -bound..=bound {
                    brute.push(Concept::from_bools(
                        &pts.iter()
                            .map(|p| p.iter().zip(&a).map(|(x, y)| x * y).sum::<i64>() == b)
                            .collect::<Vec<_>>(),
                    ));
                }
            }
            let Some(j) = a.iter().position(|&v| v < 3) else { break };
            a[j] += 1;
            for v in &mut a[..j] {
                *v = -3;
            }
        }
        let brute = ConceptClass::new(exact.space().clone(), brute).unwrap();
        let sound = brute.concepts().iter().all(|t| exact.concepts().contains(t));
        ensure(sound, || format!("n={n}: a brute-force trace is missing from the enumerated family"))?;
        let brute_vc = common::vc(&brute);
        let exact_vc = common::vc(&exact);
        ensure(vc.value == n && brute_vc == n && exact_vc == n, || {
            format!("n={n}: measured {} brute {brute_vc} oracle {exact_vc}", vc.value)
        })?;
        out.push(format!("n={n}: VC={} ({} traces, {} brute-force)", vc.value, exact.len(), brute.len()));
    }
    Ok(out.join("; "))
}

fn c03_sauer() -> Result<String, String> {
    let mut checked = 0usize;
    let mut made = 0u64;
    let mut violations = Vec::new();
    let mut classes = 0;
    while classes < 200 {
        let mut r = gen::rng(3, made);
        made += 1;
        let n = r.gen_range(2..=12);
        let space = gen::random_space(&mut r, n, false);
        let c = if made.is_multiple_of(2) {
            let size = r.gen_range(2..=300);
            let density = r.gen_range(0.05..0.95);
            gen::random_concept_class(&mut r, space, size, density)
        } else {
            let cap = r.gen_range(1..=3);
            gen::random_bounded_vc_class(&mut r, space, cap)
        };
        let d = shatter::vc_dimension(&c).unwrap().value;
        if d == 0 {
            continue;
        }
        classes += 1;
        let g = shatter::growth(&c, n).unwrap();
        for k in d..=n {
            checked += 1;
            let bound = shatter::sauer_bound(k, d).unwrap();
            if g.get(k).unwrap() as f64 > bound {
                violations.push(format!("class {made}: π({k}) = {} > {bound}", g.get(k).unwrap()));
            }
        }
    }
    ensure(violations.is_empty(), || violations.join(", "))?;
    Ok(format!("200 classes, {checked} (n, d) pairs, 0 violations"))
}

fn c04_binary_equivalence() -> Result<String, String> {
    let scales = [0.1, 0.3, 0.5];
    let mut classes: Vec<(usize, Vec<u32>)> = Vec::new();
    for n in 1..=3usize {
        for family in 1u64..1 << (1 << n) {
            classes.push((n, (0u32..1 << n).filter(|m| family >> m & 1 == 1).collect()));
        }
    }
    let exhaustive_small = classes.len();
    let four: Vec<u32> = (1u32..=u16::MAX as u32).collect();
    let check = |n: usize, masks: &[u32]| -> Option<String> {
        let space = Arc::new(FiniteSpace::with_size(n).unwrap());
        let c = ConceptClass::new(
            space,
            masks
                .iter()
                .map(|m| Concept::from_bools(&(0..n).map(|i| m >> i & 1 == 1).collect::<Vec<_>>()))
                .collect(),
        )
        .unwrap();
        let vc = shatter::vc_dimension(&c).unwrap().value;
        let f = c.to_function_class();
        scales.iter().find_map(|&e| {
            let fat = shatter::fat_dimension(&f, e).unwrap().value;
            (fat != vc).then(|| format!("n={n} {masks:?} ε={e}: fat {fat} vs VC {vc}"))
        })
    };
    let mut bad: Vec<String> = classes.par_iter().filter_map(|(n, m)| check(*n, m)).collect();
    bad.extend(four.par_iter().filter_map(|&family| {
        let masks: Vec<u32> = (0u32..16).filter(|m| family >> m & 1 == 1).collect();
        check(4, &masks)
    }).collect::<Vec<_>>());
    let random: Vec<String> = (0..100u64)
        .into_par_iter()
        .filter_map(|t| {
            let mut r = gen::rng(4, t);
            let n = r.gen_range(5..=10);
            let space = gen::random_space(&mut r, n, t % 2 == 0);
            let size = r.gen_range(1..=96);
            let c = gen::random_concept_class(&mut r, space, size, 0.5);
            let vc = shatter::vc_dimension(&c).unwrap().value;
            let f = c.to_function_class();
            scales.iter().find_map(|&e| {
                let fat = shatter::fat_dimension(&f, e).unwrap().value;
                (fat != vc).then(|| format!("random {t} ε={e}: fat {fat} vs VC {vc}"))
            })
        })
        .collect();
    bad.extend(random);
    ensure(bad.is_empty(), || bad.iter().take(5).cloned().collect::<Vec<_>>().join("; "))?;
    Ok(format!(
        "{} exhaustive classes on <= 4 points + 100 random, 3 scales, 0 violations",
        exhaustive_small + four.len()
    ))
}

fn c05_multiplication_modulus() -> Result<String, String> {
    let eps = [0.1, 0.25, 0.5, 1.0];
    let mul = ContinuousConnective::catalog("mul", 2).unwrap();
    let ok = compose::verify_uniform_continuity(&mul, &eps, 100_000, 42).unwrap();
    ensure(ok.violations == 0, || format!("declared modulus violated {} times", ok.violations))?;
    ensure(ok.rows.iter().all(|r| r.pairs > 90_000), || "too many rejected draws".into())?;
    let wrong = mul.with_modulus(Modulus::linear(2.0)).unwrap();
    let bad = compose::verify_uniform_continuity(&wrong, &eps, 100_000, 42).unwrap();
    ensure(bad.violations >= 1, || "negative control found no violation".into())?;
    let gaps: Vec<String> = ok.rows.iter().map(|r| format!("{:.4}", r.max_gap)).collect();
    Ok(format!(
        "eps/2: 0 violations (max gaps {}); 2*eps control: {} violations",
        gaps.join(", "),
        bad.violations
    ))
}

fn operand_pair(r: &mut impl Rng, max_points: usize, max_size: usize, tight: f64) -> Vec<shatterlab::FunctionClass> {
    let n = r.gen_range(2..=max_points);
    let skewed = r.gen_bool(0.5);
    let space = gen::random_space(r, n, skewed);
    (0..2)
        .map(|_| {
            if r.gen_bool(0.5) {
                let clusters = r.gen_range(1..=3);
                let per = r.gen_range(1..=max_size / clusters);
                let spread = r.gen_range(0.0..tight);
                gen::clustered_function_class(r, space.clone(), clusters, per, spread)
            } else {
                let size = r.gen_range(1..=max_size);
                let grid = if r.gen_bool(0.5) { Some(r.gen_range(2..10)) } else { None };
                gen::random_function_class(r, space.clone(), size, grid)
            }
        })
        .collect()
}

fn c06_phi_transfer() -> Result<String, String> {
    let names = ["mul", "min", "max"];
    let eps = [0.25, 0.5];
    let results: Vec<(usize, usize, usize)> = (0..50u64)
        .into_par_iter()
        .map(|t| {
            let mut r = gen::rng(6, t);
            let classes = operand_pair(&mut r, 8, 32, 0.004);
            names
                .iter()
                .map(|name| {
                    let u = ContinuousConnective::catalog(name, 2).unwrap();
                    let rep = compose::verify_phi_modulus(&u, &classes, &eps, 2000, t).unwrap();
                    let inside: usize = rep.rows.iter().map(|x| x.in_threshold).sum();
                    let moved = rep.rows.iter().filter(|x| x.max_image_distance > 0.0).count();
                    (rep.violations, inside, moved)
                })
                .fold((0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2))
        })
        .collect();
    let violations: usize = results.iter().map(|x| x.0).sum();
    let inside: usize = results.iter().map(|x| x.1).sum();
    let moved: usize = results.iter().map(|x| x.2).sum();
    ensure(violations == 0, || format!("{violations} violations"))?;
    ensure(moved > 0, || "no in-threshold pair with distinct images was sampled".into())?;
    Ok(format!(
        "50 class pairs x 3 connectives x 2 scales: {inside} in-threshold pairs ({moved} runs with distinct images), 0 violations"
    ))
}

fn c07_covering_chain() -> Result<String, String> {
    let names = ["mul", "min", "max", "mean"];
    let scales = [0.25, 0.5, 1.0];
    let reports: Vec<Result<compose::ChainReport, String>> = (0..1000u64)
        .into_par_iter()
        .map(|t| {
            let mut r = gen::rng(7, t);
            let classes = operand_pair(&mut r, 6, 8, 0.05);
            let u = ContinuousConnective::catalog(names[t as usize % 4], 2).unwrap();
            compose::verify_covering_chain(&u, &classes, scales[t as usize % 3], DEFAULT_COMPOSE_CAP)
                .map_err(|e| format!("trial {t}: {e}"))
        })
        .collect();
    let mut failures = Vec::new();
    let mut nontrivial = 0;
    for (t, rep) in reports.iter().enumerate() {
        match rep {
            Ok(rep) if rep.holds => nontrivial += (rep.composed_number < rep.composed_size) as usize,
            Ok(rep) => failures.push(format!("trial {t}: {} > {}", rep.composed_number, rep.bound)),
            Err(e) => failures.push(e.clone()),
        }
    }
    ensure(failures.is_empty(), || failures.join("; "))?;
    Ok(format!("1000 trials hold ({nontrivial} with composed cover smaller than the class)"))
}

fn random_metric(r: &mut impl Rng, n: usize) -> FiniteMetric {
    match r.gen_range(0..3) {
        0 => gen::random_euclidean_metric(r, n, 1),
        1 => gen::random_euclidean_metric(r, n, 2),
        _ => {
            let p = r.gen_range(0.0..0.6);
            gen::random_graph_metric(r, n, p)
        }
    }
}

fn c08_product_and_image() -> Result<String, String> {
    let product: Vec<String> = (0..1000u64)
        .into_par_iter()
        .filter_map(|t| {
            let mut r = gen::rng(81, t);
            let k = if r.gen_bool(0.7) { 2 } else { 3 };
            let max = if k == 2 { 7 } else { 4 };
            let spaces: Vec<FiniteMetric> = (0..k)
                .map(|_| {
                    let n = r.gen_range(1..=max);
                    random_metric(&mut r, n)
                })
                .collect();
            let eps = r.gen_range(0.05..1.0);
            match cover::check_product_cover(&spaces, eps, DEFAULT_PRODUCT_CAP) {
                Ok(rep) if rep.holds => None,
                Ok(rep) => Some(format!("product {t}: {} > {}", rep.product_number, rep.bound)),
                Err(e) => Some(format!("product {t}: {e}")),
            }
        })
        .collect();
    let maps = ["mul", "min", "max", "mean", "proj"];
    let image: Vec<String> = (0..1000u64)
        .into_par_iter()
        .filter_map(|t| {
            let mut r = gen::rng(82, t);
            let g = r.gen_range(2..=6);
            let mut grid: Vec<[f64; 2]> = (0..=g)
                .flat_map(|i| (0..=g).map(move |j| [i as f64 / g as f64, j as f64 / g as f64]))
                .collect();
            grid.shuffle(&mut r);
            let take = r.gen_range(2..=grid.len().min(14));
            let pts: Vec<Vec<f64>> = grid[..take].iter().map(|p| p.to_vec()).collect();
            let domain = FiniteMetric::from_points(&pts);
            let name = maps[t as usize % maps.len()];
            let (u, delta_of): (ContinuousConnective, Box<dyn Fn(f64) -> f64>) = if name == "proj" {
                let u = ContinuousConnective::new("proj", 2, |x: &[f64]| x[0], Modulus::linear(1.0)).unwrap();
                (u, Box::new(|e| e))
            } else {
                let u = ContinuousConnective::catalog(name, 2).unwrap();
                let m = u.modulus().clone();
                (u, Box::new(move |e| m.eval(e).unwrap()))
            };
            let values: Vec<f64> = pts.iter().map(|p| u.eval(p)).collect();
            let mut distinct = values.clone();
            distinct.sort_by(f64::total_cmp);
            distinct.dedup();
            let map: Vec<usize> = values
                .iter()
                .map(|v| distinct.iter().position(|d| d == v).unwrap())
                .collect();
            let images = FiniteMetric::from_line(&distinct);
            let eps = r.gen_range(0.05..=1.0);
            match cover::check_image_cover(&domain, &images, &map, delta_of(eps), eps) {
                Ok(rep) if rep.holds == Some(true) => None,
                Ok(rep) => Some(format!("image {t} ({name}): {rep:?}")),
                Err(e) => Some(format!("image {t}: {e}")),
            }
        })
        .collect();
    let bad: Vec<String> = product.into_iter().chain(image).collect();
    ensure(bad.is_empty(), || bad.iter().take(5).cloned().collect::<Vec<_>>().join("; "))?;
    Ok("1000 product + 1000 image instances, 0 violations".into())
}

fn c09_classical_bound() -> Result<String, String> {
    let alpha = compose::alpha_k(2, LogBase::Natural).unwrap();
    ensure(alpha == 6, || format!("alpha_2 = {alpha}"))?;
    let rows: Vec<Result<(usize, usize), String>> = (0..200u64)
        .into_par_iter()
        .map(|t| {
            let mut r = gen::rng(9, t);
            let n = r.gen_range(3..=10);
            let space = gen::random_space(&mut r, n, false);
            let c1 = gen::random_bounded_vc_class(&mut r, space.clone(), 2);
            let c2 = gen::random_bounded_vc_class(&mut r, space, 2);
            let u = ClassicalConnective::random(&mut r, 2).unwrap();
            let d = shatter::vc_dimension(&c1).unwrap().value.max(shatter::vc_dimension(&c2).unwrap().value).max(1);
            let composed = compose::compose_concepts(&u, &[c1, c2], DEFAULT_COMPOSE_CAP).unwrap();
            let vc = shatter::vc_dimension(&composed).unwrap().value;
            let bound = compose::vc_composition_bound(d, 2, LogBase::Natural).unwrap();
            if vc < bound {
                Ok((vc, bound))
            } else {
                Err(format!("trial {t} ({}): VC {vc} >= {bound}", u.name()))
            }
        })
        .collect();
    let bad: Vec<String> = rows.iter().filter_map(|r| r.clone().err()).collect();
    ensure(bad.is_empty(), || bad.join("; "))?;
    let max_vc = rows.iter().filter_map(|r| r.as_ref().ok()).map(|x| x.0).max().unwrap_or(0);
    Ok(format!("200 trials, largest composed VC {max_vc}, 0 violations"))
}

fn c10_rectangle() -> Result<String, String> {
    let m = pacsim::rect_sample_complexity(0.1, 0.1).unwrap();
    ensure(m == 148, || format!("m = {m}"))?;
    let run = pacsim::run_rectangle_trials(&RectExperiment {
        target: Rectangle::new(0.25, 0.75, 0.25, 0.75).unwrap(),
        distribution: PlaneDistribution::default(),
        eps: 0.1,
        delta: 0.1,
        m: SampleSize::Fixed(m),
        trials: 1000,
        seed: 42,
        estimator: ErrorEstimator::Exact,
    })
    .map_err(|e| e.to_string())?;
    let rep = run.report;
    ensure(rep.empirical_failure_rate <= 0.1, || format!("failure rate {}", rep.empirical_failure_rate))?;
    Ok(format!(
        "m = 148, failure rate {} ({} / 1000), mean error {:.5}, hypothesis inside target in every trial",
        rep.empirical_failure_rate, rep.failures, rep.mean_error
    ))
}

fn c11_counterexample() -> Result<String, String> {
    let c = gen::powerset(3);
    let rep = pacsim::counterexample_fat_check(&c, 0.1).map_err(|e| e.to_string())?;
    ensure(rep.half_witness_shatters && rep.fat >= 3 && rep.holds, || format!("{rep:?}"))?;
    let cx = pacsim::build_counterexample_class(&c).unwrap();
    let all = PointSubset::new(vec![0, 1, 2], 3).unwrap();
    ensure(
        shatter::eps_shatters_with_witness(cx.functions(), &all, &[0.5; 3], 0.1, 0.0).unwrap(),
        || "witness (0.5, 0.5, 0.5) fails".into(),
    )?;
    let mut recovered = 0;
    for (concept, table) in c.concepts().iter().zip(cx.functions().functions()) {
        for p in 0..3 {
            let got = pacsim::identify_from_one_point(&cx, p, table.value(p)).map_err(|e| e.to_string())?;
            ensure(&got == concept, || format!("point {p}: {got:?} != {concept:?}"))?;
            recovered += 1;
        }
    }
    Ok(format!("fat_0.1 = {} >= VC = 3 via witness 0.5; {recovered}/24 observations identify their concept", rep.fat))
}

fn c12_exact_vs_greedy() -> Result<String, String> {
    let rows: Vec<Result<(usize, usize, usize), String>> = (0..500u64)
        .into_par_iter()
        .map(|t| {
            let mut r = gen::rng(12, t);
            let n = r.gen_range(1..=64);
            let m = random_metric(&mut r, n);
            let eps = r.gen_range(0.05..0.6);
            let exact = cover::covering_number(&m, eps, CoverMode::Exact).map_err(|e| e.to_string())?;
            let greedy = cover::covering_number(&m, eps, CoverMode::Greedy).map_err(|e| e.to_string())?;
            let ok = exact.method == CoverMode::Exact
                && exact.number <= greedy.number
                && exact.number >= exact.lower_bound
                && exact.verify(&m, eps)
                && greedy.verify(&m, eps);
            if ok {
                Ok((exact.number, greedy.number, exact.lower_bound))
            } else {
                Err(format!("instance {t}: exact {exact:?} greedy {greedy:?}"))
            }
        })
        .collect();
    let bad: Vec<String> = rows.iter().filter_map(|r| r.clone().err()).collect();
    ensure(bad.is_empty(), || bad.iter().take(3).cloned().collect::<Vec<_>>().join("; "))?;
    let ok: Vec<_> = rows.into_iter().flatten().collect();
    let improved = ok.iter().filter(|x| x.0 < x.1).count();
    let tight = ok.iter().filter(|x| x.0 == x.2).count();
    Ok(format!("500 instances valid; exact beats greedy on {improved}, meets the packing bound on {tight}"))
}

fn main() {
    let criteria: [(&str, Option<Duration>, Check); 12] = [
        ("interval traces on 10 points: VC = 2", Some(Duration::from_secs(1)), c01_interval_vc),
        ("hyperplane traces: VC = n for n = 2, 3", Some(Duration::from_secs(10)), c02_hyperplane_vc),
        ("Sauer bound on 200 random classes", Some(Duration::from_secs(60)), c03_sauer),
        ("binary fat = VC", None, c04_binary_equivalence),
        ("multiplication modulus eps/2", None, c05_multiplication_modulus),
        ("modulus transfer to composed tables", None, c06_phi_transfer),
        ("covering chain, 1000 trials", Some(Duration::from_secs(300)), c07_covering_chain),
        ("product and image covering", None, c08_product_and_image),
        ("classical composition VC < d*alpha_k", None, c09_classical_bound),
        ("rectangle learner at m = 148", Some(Duration::from_secs(30)), c10_rectangle),
        ("counterexample class", None, c11_counterexample),
        ("exact vs greedy covers", None, c12_exact_vs_greedy),
    ];
    let mut failed = 0;
    for (i, (title, budget, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(format!("panic: {:?}", p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())))));
        let elapsed = start.elapsed();
        let outcome = match (outcome, budget) {
            (Ok(_), Some(limit)) if elapsed > limit => Err(format!("took {elapsed:.2?}, budget {limit:?}")),
            (o, _) => o,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d.clone()),
            Err(e) => {
                failed += 1;
                ("FAIL", e.clone())
            }
        };
        println!("{tag} [{:>2}] {title} ({elapsed:.2?}): {detail}", i + 1);
    }
    println!("acceptance: {} passed, {failed} failed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
