//! One handler per subcommand. Handlers only load inputs, call the library
//! and shape its results into a [`Report`].

use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde_json::json;
use shatterlab::compose::{self, ContinuousConnective, Modulus};
use shatterlab::cover::{self, ClassDistance, ConstantsConfig, CoverMode, FiniteMetric};
use shatterlab::doc::ClassDocument;
use shatterlab::pacsim::{self, PlaneDistribution, RectExperiment, Rectangle, SampleSize};
use shatterlab::{gen, shatter, ConceptClass, Error, FiniteSpace, PointSubset, Result};

use crate::args::{Command, Global, PacRect, Verify};
use crate::report::Report;

pub fn dispatch(command: &Command, g: &Global) -> Result<Report> {
    match command {
        Command::Vc(i) => vc(&i.input),
        Command::Fat { input, scales } => fat(&input.input, &scales.eps, g),
        Command::Growth { input, n_max } => growth(&input.input, *n_max),
        Command::Sauer { d, n } => sauer(*d, n),
        Command::Cover { source, scales, mode } => {
            let (m, labels) = match (&source.input, &source.matrix) {
                (Some(p), _) => class_metric(&ClassDocument::load(p)?, source.distance)?,
                (None, Some(p)) => (load_matrix(p)?, None),
                (None, None) => return Err(Error::Validation("--input or --matrix is required".into())),
            };
            cover_numbers(&m, labels.as_deref(), &scales.eps, *mode, g)
        }
        Command::Entropy { input, scales } => entropy(&input.input, &scales.eps, g),
        Command::ComposeC { input, connective } => compose_classical(&input.input, connective, g),
        Command::ComposeF { input, connective } => compose_continuous(&input.input, connective, g),
        Command::Alpha { k } => alpha(k, g),
        Command::BoundMain { input, connective, eps } => bound_main(&input.input, connective, *eps, g),
        Command::BoundMv { input, scales } => bound_mv(&input.input, &scales.eps, g),
        Command::Verify(v) => verify(v, g),
        Command::PacRect(p) => pac_rect(p, g),
        Command::Counterexample { input, powerset, eps } => counterexample(input.as_deref(), *powerset, *eps),
    }
}

fn constants(g: &Global) -> Result<ConstantsConfig> {
    let cfg = ConstantsConfig {
        c: g.const_c,
        c_prime: g.const_c_prime,
        k: g.const_k,
        k_prime: g.const_k_prime,
        log_base: g.log_base,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// `{a, b}` in point labels.
fn label_set(s: &PointSubset, space: &FiniteSpace) -> String {
    format!("{{{}}}", s.labels(space).join(", "))
}

fn float_list(xs: &[f64]) -> String {
    xs.iter().map(f64::to_string).collect::<Vec<_>>().join(" ")
}

fn index_list(xs: &[usize]) -> String {
    xs.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

fn load_matrix(path: &Path) -> Result<FiniteMetric> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let rows: Vec<Vec<f64>> =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    FiniteMetric::new(rows)
}

/// The metric on the document's top-level class, with member names for centres.
fn class_metric(doc: &ClassDocument, distance: ClassDistance) -> Result<(FiniteMetric, Option<Vec<String>>)> {
    let f = doc.function_class()?;
    let names = (0..f.len()).map(|i| format!("f{i}")).collect();
    Ok((cover::metric_from_class(&f, distance)?, Some(names)))
}

fn vc(input: &Path) -> Result<Report> {
    let c = ClassDocument::load(input)?.concept_class()?;
    let r = shatter::vc_dimension(&c)?;
    let cert = label_set(&r.certificate, c.space());
    Ok(Report::new(
        "vc",
        json!({
            "points": c.points(),
            "concepts": c.len(),
            "vc": r.value,
            "certificate": r.certificate.labels(c.space()),
            "exhausted": r.exhausted,
        }),
    )
    .line("vc", r.value)
    .line("certificate", cert)
    .line("exhausted", r.exhausted))
}

fn fat(input: &Path, eps: &[f64], g: &Global) -> Result<Report> {
    let f = ClassDocument::load(input)?.function_class()?;
    let mut rep_rows = Vec::new();
    let mut report = Report::new("fat", ()).columns(&["eps", "fat", "certificate", "witness", "exhausted"]);
    for &e in eps {
        let r = shatter::fat_dimension_with_tolerance(&f, e, g.tolerance)?;
        let witness = r.witness.clone().unwrap_or_default();
        report.row(vec![
            e.to_string(),
            r.value.to_string(),
            label_set(&r.certificate, f.space()),
            float_list(&witness),
            r.exhausted.to_string(),
        ]);
        rep_rows.push(json!({
            "eps": e,
            "fat": r.value,
            "certificate": r.certificate.labels(f.space()),
            "witness": witness,
            "exhausted": r.exhausted,
        }));
    }
    Ok(report.with_body(json!({ "tolerance": g.tolerance, "rows": rep_rows })))
}

fn growth(input: &Path, n_max: Option<usize>) -> Result<Report> {
    let c = ClassDocument::load(input)?.concept_class()?;
    let n_max = n_max.unwrap_or(c.points());
    let table = shatter::growth(&c, n_max)?;
    let d = shatter::vc_dimension(&c)?.value;
    let mut report = Report::new("growth", ()).line("vc", d).columns(&["n", "growth", "sauer_bound"]);
    let mut rows = Vec::new();
    for (n, &p) in table.entries().iter().enumerate() {
        let bound = if d >= 1 && n >= d { Some(shatter::sauer_bound(n, d)?) } else { None };
        report.row(vec![n.to_string(), p.to_string(), bound.map(|b| b.to_string()).unwrap_or_default()]);
        rows.push(json!({ "n": n, "growth": p, "sauer_bound": bound }));
    }
    Ok(report.with_body(json!({ "vc": d, "rows": rows })))
}

fn sauer(d: usize, ns: &[usize]) -> Result<Report> {
    let mut report = Report::new("sauer", ()).columns(&["n", "d", "bound"]);
    let mut rows = Vec::new();
    for &n in ns {
        let b = shatter::sauer_bound(n, d)?;
        report.row(vec![n.to_string(), d.to_string(), b.to_string()]);
        rows.push(json!({ "n": n, "d": d, "bound": b }));
    }
    Ok(report.with_body(rows))
}

fn cover_numbers(m: &FiniteMetric, names: Option<&[String]>, eps: &[f64], mode: CoverMode, g: &Global) -> Result<Report> {
    let mut report = Report::new("cover", ())
        .line("points", m.size())
        .columns(&["eps", "number", "lower_bound", "method", "centers"]);
    let mut rows = Vec::new();
    for &e in eps {
        let r = cover::covering_number_with_limit(m, e, mode, g.exact_limit)?;
        let centers = match names {
            Some(n) => r.centers.iter().map(|&i| n[i].clone()).collect::<Vec<_>>().join(" "),
            None => index_list(&r.centers),
        };
        report.row(vec![
            e.to_string(),
            r.number.to_string(),
            r.lower_bound.to_string(),
            mode_name(r.method).into(),
            centers,
        ]);
        rows.push(json!({ "eps": e, "cover": r }));
    }
    Ok(report.with_body(json!({ "points": m.size(), "rows": rows })))
}

fn mode_name(m: CoverMode) -> &'static str {
    match m {
        CoverMode::Exact => "exact",
        CoverMode::Greedy => "greedy",
    }
}

fn entropy(input: &Path, eps: &[f64], g: &Global) -> Result<Report> {
    let c = ClassDocument::load(input)?.concept_class()?;
    let r = cover::metric_entropy_condition(&c, eps)?;
    let mut report = Report::new("entropy", &r)
        .line("class_size", r.class_size)
        .columns(&["eps", "number", "log_number", "lower_bound", "method"]);
    for row in &r.rows {
        report.row(vec![
            row.eps.to_string(),
            row.number.to_string(),
            g.log_base.log(row.number as f64).to_string(),
            row.lower_bound.to_string(),
            mode_name(row.method).into(),
        ]);
    }
    Ok(report)
}

fn compose_classical(input: &Path, name: &str, g: &Global) -> Result<Report> {
    let doc = ClassDocument::load(input)?;
    let classes = doc.concept_classes()?;
    let u = doc.connective(name, classes.len())?;
    let composed = compose::compose_concepts(&u, &classes, g.class_cap)?;
    let operand_vc = classes
        .iter()
        .map(|c| shatter::vc_dimension(c).map(|r| r.value))
        .collect::<Result<Vec<_>>>()?;
    let d = operand_vc.iter().copied().max().unwrap_or(0).max(1);
    let vc = shatter::vc_dimension(&composed)?.value;
    let bound = compose::vc_composition_bound(d, classes.len(), g.log_base)?;
    let mut report = Report::new(
        "compose-c",
        json!({
            "connective": u.name(),
            "table": u.table(),
            "operand_vc": operand_vc,
            "vc": vc,
            "bound": bound,
            "document": ClassDocument::from_concept_class(&composed),
        }),
    )
    .line("connective", u.name())
    .line("operand_vc", index_list(&operand_vc))
    .line("composed_size", composed.len())
    .line("vc", vc)
    .line("bound", bound)
    .columns(&["concept"]);
    for c in composed.concepts() {
        report.row(vec![c.to_bit_string()]);
    }
    Ok(report)
}

fn continuous(name: &str, arity: usize, linear: Option<f64>) -> Result<ContinuousConnective> {
    let u = ContinuousConnective::catalog(name, arity)?;
    match linear {
        Some(a) => u.with_modulus(Modulus::linear(a)),
        None => Ok(u),
    }
}

fn compose_continuous(input: &Path, name: &str, g: &Global) -> Result<Report> {
    let doc = ClassDocument::load(input)?;
    let classes = doc.function_classes()?;
    let u = continuous(name, classes.len(), None)?;
    let composed = compose::compose_functions(&u, &classes, g.class_cap)?;
    let mut columns = vec!["function".to_string()];
    columns.extend(composed.space().labels().iter().cloned());
    let mut report = Report::new(
        "compose-f",
        json!({
            "connective": u.name(),
            "modulus": u.modulus().name(),
            "document": ClassDocument::from_function_class(&composed),
        }),
    )
    .line("connective", u.name())
    .line("composed_size", composed.len())
    .owned_columns(columns);
    for (i, f) in composed.functions().iter().enumerate() {
        let mut row = vec![format!("f{i}")];
        row.extend(f.values().iter().map(f64::to_string));
        report.row(row);
    }
    Ok(report)
}

fn alpha(ks: &[usize], g: &Global) -> Result<Report> {
    let mut report = Report::new("alpha", ()).columns(&["k", "alpha"]);
    let mut rows = Vec::new();
    for &k in ks {
        let a = compose::alpha_k(k, g.log_base)?;
        report.row(vec![k.to_string(), a.to_string()]);
        rows.push(json!({ "k": k, "alpha": a }));
    }
    Ok(report.with_body(json!({ "log_base": g.log_base, "rows": rows })))
}

fn bound_main(input: &Path, name: &str, eps: f64, g: &Global) -> Result<Report> {
    let cfg = constants(g)?;
    let classes = ClassDocument::load(input)?.function_classes()?;
    let u = continuous(name, classes.len(), None)?;
    let r = compose::check_main_bound(&u, &classes, eps, &cfg, g.tolerance, g.class_cap)?;
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_else(|| "n/a".into());
    let mut report = Report::new("bound-main", json!({ "constants": cfg, "report": &r }))
        .line("eps", r.eps)
        .line("k", r.k)
        .line("scale", opt(r.scale))
        .line("multiplier", opt(r.multiplier))
        .line("fat_values", index_list(&r.fat_values))
        .line("rhs", opt(r.rhs))
        .line("composed_fat", r.composed_fat)
        .line("holds", r.holds.map(|h| h.to_string()).unwrap_or_else(|| "n/a".into()));
    if let Some(note) = &r.note {
        report = report.line("note", note);
    }
    Ok(report)
}

fn bound_mv(input: &Path, eps: &[f64], g: &Global) -> Result<Report> {
    let cfg = constants(g)?;
    let f = ClassDocument::load(input)?.function_class()?;
    let m = cover::metric_from_class(&f, ClassDistance::L2)?;
    let mut report = Report::new("bound-mv", ()).columns(&[
        "eps",
        "cover",
        "log_cover",
        "fat_upper_scale",
        "upper_bound",
        "fat_lower_scale",
        "lower_bound",
    ]);
    let mut rows = Vec::new();
    for &e in eps {
        let n = cover::covering_number_with_limit(&m, e, CoverMode::Exact, g.exact_limit)?.number;
        let fat_up = shatter::fat_dimension_with_tolerance(&f, cfg.upper_scale(e)?, g.tolerance)?.value;
        let fat_lo = shatter::fat_dimension_with_tolerance(&f, cfg.lower_scale(e)?, g.tolerance)?.value;
        let upper = cover::mv_entropy_bound(fat_up, e, &cfg)?;
        let lower = cover::talagrand_lower_bound(fat_lo, &cfg)?;
        let log_n = cfg.log_base.log(n as f64);
        report.row(vec![
            e.to_string(),
            n.to_string(),
            log_n.to_string(),
            fat_up.to_string(),
            upper.to_string(),
            fat_lo.to_string(),
            lower.to_string(),
        ]);
        rows.push(json!({
            "eps": e, "cover": n, "log_cover": log_n,
            "fat_upper_scale": fat_up, "upper_bound": upper,
            "fat_lower_scale": fat_lo, "lower_bound": lower,
        }));
    }
    Ok(report.with_body(json!({ "constants": cfg, "rows": rows })))
}

fn verify(v: &Verify, g: &Global) -> Result<Report> {
    match v {
        Verify::Modulus { connective, arity, eps, samples, linear_modulus } => {
            let u = continuous(connective, *arity, *linear_modulus)?;
            let r = compose::verify_uniform_continuity(&u, eps, *samples, g.seed)?;
            let mut report = Report::new("verify modulus", &r)
                .line("connective", &r.connective)
                .line("modulus", &r.modulus)
                .line("violations", r.violations)
                .columns(&["eps", "delta", "pairs", "rejected", "violations", "max_gap"])
                .violations(r.violations);
            for row in &r.rows {
                report.row(vec![
                    row.eps.to_string(),
                    row.delta.to_string(),
                    row.pairs.to_string(),
                    row.rejected.to_string(),
                    row.violations.to_string(),
                    row.max_gap.to_string(),
                ]);
            }
            Ok(report)
        }
        Verify::Phi { input, connective, eps, trials } => {
            let classes = ClassDocument::load(&input.input)?.function_classes()?;
            let u = continuous(connective, classes.len(), None)?;
            let r = compose::verify_phi_modulus(&u, &classes, eps, *trials, g.seed)?;
            let mut report = Report::new("verify phi", &r)
                .line("connective", &r.connective)
                .line("violations", r.violations)
                .columns(&["eps", "threshold", "pairs_tested", "in_threshold", "violations", "max_image_distance"])
                .violations(r.violations);
            for row in &r.rows {
                report.row(vec![
                    row.eps.to_string(),
                    row.threshold.to_string(),
                    row.pairs_tested.to_string(),
                    row.in_threshold.to_string(),
                    row.violations.to_string(),
                    row.max_image_distance.to_string(),
                ]);
            }
            Ok(report)
        }
        Verify::Chain { input, connective, scales } => {
            let classes = ClassDocument::load(&input.input)?.function_classes()?;
            let u = continuous(connective, classes.len(), None)?;
            let reports = scales
                .eps
                .iter()
                .map(|&e| compose::verify_covering_chain(&u, &classes, e, g.class_cap))
                .collect::<Result<Vec<_>>>()?;
            let bad = reports.iter().filter(|r| !r.holds).count();
            let mut report = Report::new("verify chain", &reports)
                .line("connective", u.name())
                .line("violations", bad)
                .columns(&["eps", "composed_number", "bound", "factor_scale", "factor_numbers", "holds"])
                .violations(bad);
            for r in &reports {
                report.row(vec![
                    r.eps.to_string(),
                    r.composed_number.to_string(),
                    r.bound.to_string(),
                    r.factor_scale.to_string(),
                    index_list(&r.factor_numbers),
                    r.holds.to_string(),
                ]);
            }
            Ok(report)
        }
        Verify::Product { input, matrix, distance, scales } => {
            let factors = match input {
                Some(p) => ClassDocument::load(p)?
                    .function_classes()?
                    .iter()
                    .map(|f| cover::metric_from_class(f, *distance))
                    .collect::<Result<Vec<_>>>()?,
                None => matrix.iter().map(|p| load_matrix(p)).collect::<Result<Vec<_>>>()?,
            };
            let reports = scales
                .eps
                .iter()
                .map(|&e| cover::check_product_cover(&factors, e, g.cover_cap))
                .collect::<Result<Vec<_>>>()?;
            let bad = reports.iter().filter(|r| !r.holds).count();
            let mut report = Report::new("verify product", &reports)
                .line("factors", factors.len())
                .line("violations", bad)
                .columns(&["eps", "product_number", "bound", "factor_numbers", "method", "holds"])
                .violations(bad);
            for r in &reports {
                report.row(vec![
                    r.eps.to_string(),
                    r.product_number.to_string(),
                    r.bound.to_string(),
                    index_list(&r.factor_numbers),
                    mode_name(r.product_method).into(),
                    r.holds.to_string(),
                ]);
            }
            Ok(report)
        }
        Verify::Image { connective, arity, grid, scales, linear_modulus } => {
            verify_image(connective, *arity, *grid, &scales.eps, *linear_modulus, g)
        }
        Verify::Sauer { input, trials, max_points } => verify_sauer(input.as_deref(), *trials, *max_points, g),
        Verify::BinaryEq { input, eps, trials, max_points } => {
            verify_binary(input.as_deref(), eps, *trials, *max_points, g)
        }
        Verify::VcComp { input, connective, trials, max_points, max_vc } => {
            verify_vc_comp(input.as_deref(), connective.as_deref(), *trials, *max_points, *max_vc, g)
        }
    }
}

/// The grid `{0, 1/grid, …, 1}^arity` mapped through the connective.
fn verify_image(name: &str, arity: usize, grid: usize, eps: &[f64], linear: Option<f64>, g: &Global) -> Result<Report> {
    if grid == 0 {
        return Err(Error::Domain("grid must be >= 1".into()));
    }
    let u = continuous(name, arity, linear)?;
    let size = (grid as u128 + 1).checked_pow(arity as u32).unwrap_or(u128::MAX);
    if size > g.cover_cap as u128 {
        return Err(Error::Capacity { what: "image grid".into(), size, cap: g.cover_cap as u128 });
    }
    let points: Vec<Vec<f64>> = (0..size as usize)
        .map(|mut i| {
            (0..arity)
                .map(|_| {
                    let v = i % (grid + 1);
                    i /= grid + 1;
                    v as f64 / grid as f64
                })
                .collect()
        })
        .collect();
    let values: Vec<f64> = points.iter().map(|p| u.eval(p)).collect();
    let mut distinct = values.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let map: Vec<usize> = values
        .iter()
        .map(|v| distinct.binary_search_by(|d| d.total_cmp(v)).expect("value present"))
        .collect();
    let domain = FiniteMetric::from_points(&points);
    let images = FiniteMetric::from_line(&distinct);
    let reports = eps
        .iter()
        .map(|&e| cover::check_image_cover(&domain, &images, &map, u.modulus().eval(e)?, e))
        .collect::<Result<Vec<_>>>()?;
    let bad: usize = reports
        .iter()
        .map(|r| r.continuity_violations + usize::from(r.holds == Some(false)))
        .sum();
    let opt = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_else(|| "n/a".into());
    let mut report = Report::new("verify image", &reports)
        .line("connective", u.name())
        .line("modulus", u.modulus().name())
        .line("domain_points", points.len())
        .line("violations", bad)
        .columns(&["eps", "delta", "continuity_violations", "image_number", "domain_number", "holds"])
        .violations(bad);
    for r in &reports {
        report.row(vec![
            r.eps.to_string(),
            r.delta.to_string(),
            r.continuity_violations.to_string(),
            opt(r.image_number),
            opt(r.domain_number),
            r.holds.map(|h| h.to_string()).unwrap_or_else(|| "n/a".into()),
        ]);
    }
    Ok(report)
}

/// The document's concepts, or `trials` seeded random classes.
fn concept_batch(input: Option<&Path>, trials: usize, max_points: usize, g: &Global) -> Result<Vec<ConceptClass>> {
    if let Some(p) = input {
        return Ok(vec![ClassDocument::load(p)?.concept_class()?]);
    }
    if max_points < 1 {
        return Err(Error::Domain("max-points must be >= 1".into()));
    }
    Ok((0..trials as u64)
        .into_par_iter()
        .map(|t| {
            use rand::Rng;
            let mut r = gen::rng(g.seed, t);
            let n = r.gen_range(1..=max_points);
            let space = gen::random_space(&mut r, n, t % 2 == 1);
            if t % 2 == 0 {
                let size = r.gen_range(1..=4 * n * n);
                let density = r.gen_range(0.1..0.9);
                gen::random_concept_class(&mut r, space, size, density)
            } else {
                let cap = r.gen_range(1..=3.min(n));
                gen::random_bounded_vc_class(&mut r, space, cap)
            }
        })
        .collect())
}

fn verify_sauer(input: Option<&Path>, trials: usize, max_points: usize, g: &Global) -> Result<Report> {
    let classes = concept_batch(input, trials, max_points, g)?;
    let rows = classes
        .par_iter()
        .map(|c| {
            let d = shatter::vc_dimension(c)?.value;
            let table = shatter::growth(c, c.points())?;
            let mut checked = 0;
            let mut bad = 0;
            for n in d.max(1)..=c.points() {
                checked += 1;
                if table.get(n).unwrap_or(0) as f64 > shatter::sauer_bound(n, d.max(1))? {
                    bad += 1;
                }
            }
            Ok((c.points(), c.len(), d, checked, bad))
        })
        .collect::<Result<Vec<_>>>()?;
    let bad: usize = rows.iter().map(|r| r.4).sum();
    let checked: usize = rows.iter().map(|r| r.3).sum();
    let mut report = Report::new(
        "verify sauer",
        json!({
            "seed": g.seed,
            "classes": rows.iter().map(|r| json!({"points": r.0, "size": r.1, "vc": r.2, "checked": r.3, "violations": r.4})).collect::<Vec<_>>(),
        }),
    )
    .line("classes", rows.len())
    .line("checked", checked)
    .line("violations", bad)
    .columns(&["class", "points", "size", "vc", "checked", "violations"])
    .hide_rows_in_table()
    .violations(bad);
    for (i, r) in rows.iter().enumerate() {
        report.row(vec![i.to_string(), r.0.to_string(), r.1.to_string(), r.2.to_string(), r.3.to_string(), r.4.to_string()]);
    }
    Ok(report)
}

fn verify_binary(input: Option<&Path>, eps: &[f64], trials: usize, max_points: usize, g: &Global) -> Result<Report> {
    let classes = concept_batch(input, trials, max_points, g)?;
    let rows = classes
        .par_iter()
        .map(|c| {
            let vc = shatter::vc_dimension(c)?.value;
            let f = c.to_function_class();
            let fats = eps
                .iter()
                .map(|&e| shatter::fat_dimension_with_tolerance(&f, e, g.tolerance).map(|r| r.value))
                .collect::<Result<Vec<_>>>()?;
            Ok((vc, fats))
        })
        .collect::<Result<Vec<_>>>()?;
    let bad = rows.iter().map(|(vc, fats)| fats.iter().filter(|&&f| f != *vc).count()).sum();
    let mut report = Report::new(
        "verify binary-eq",
        json!({
            "seed": g.seed,
            "eps": eps,
            "classes": rows.iter().map(|(vc, fats)| json!({"vc": vc, "fat": fats})).collect::<Vec<_>>(),
        }),
    )
    .line("classes", rows.len())
    .line("violations", bad)
    .columns(&["class", "vc", "fat"])
    .hide_rows_in_table()
    .violations(bad);
    for (i, (vc, fats)) in rows.iter().enumerate() {
        report.row(vec![i.to_string(), vc.to_string(), index_list(fats)]);
    }
    Ok(report)
}

fn verify_vc_comp(
    input: Option<&Path>,
    connective: Option<&str>,
    trials: usize,
    max_points: usize,
    max_vc: usize,
    g: &Global,
) -> Result<Report> {
    use rand::Rng;
    let instances: Vec<(compose::ClassicalConnective, Vec<ConceptClass>)> = match (input, connective) {
        (Some(p), Some(name)) => {
            let doc = ClassDocument::load(p)?;
            let classes = doc.concept_classes()?;
            vec![(doc.connective(name, classes.len())?, classes)]
        }
        _ => {
            if max_points < 1 || max_vc < 1 {
                return Err(Error::Domain("max-points and max-vc must be >= 1".into()));
            }
            (0..trials as u64)
                .map(|t| {
                    let mut r = gen::rng(g.seed, t);
                    let n = r.gen_range(1..=max_points);
                    let space: Arc<FiniteSpace> = gen::random_space(&mut r, n, false);
                    let classes = (0..2)
                        .map(|_| gen::random_bounded_vc_class(&mut r, space.clone(), max_vc))
                        .collect();
                    let u = match connective {
                        Some(name) => compose::ClassicalConnective::catalog(name, 2)?,
                        None => compose::ClassicalConnective::random(&mut r, 2)?,
                    };
                    Ok((u, classes))
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    let rows = instances
        .par_iter()
        .map(|(u, classes)| {
            let d = classes
                .iter()
                .map(|c| shatter::vc_dimension(c).map(|r| r.value))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .max()
                .unwrap_or(0)
                .max(1);
            let composed = compose::compose_concepts(u, classes, g.class_cap)?;
            let vc = shatter::vc_dimension(&composed)?.value;
            let bound = compose::vc_composition_bound(d, classes.len(), g.log_base)?;
            Ok((u.name().to_string(), d, vc, bound))
        })
        .collect::<Result<Vec<_>>>()?;
    let bad = rows.iter().filter(|r| r.2 >= r.3).count();
    let mut report = Report::new(
        "verify vc-comp",
        json!({
            "seed": g.seed,
            "instances": rows.iter().map(|r| json!({"connective": r.0, "d": r.1, "vc": r.2, "bound": r.3})).collect::<Vec<_>>(),
        }),
    )
    .line("instances", rows.len())
    .line("violations", bad)
    .columns(&["instance", "connective", "d", "vc", "bound"])
    .hide_rows_in_table()
    .violations(bad);
    for (i, r) in rows.iter().enumerate() {
        report.row(vec![i.to_string(), r.0.clone(), r.1.to_string(), r.2.to_string(), r.3.to_string()]);
    }
    Ok(report)
}

fn pac_rect(p: &PacRect, g: &Global) -> Result<Report> {
    let exp = match &p.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<RectExperiment>(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
        }
        None => RectExperiment {
            target: Rectangle::new(p.target[0], p.target[1], p.target[2], p.target[3])?,
            distribution: PlaneDistribution::default(),
            eps: p.eps,
            delta: p.delta,
            m: match p.m.as_str() {
                "auto" => SampleSize::default(),
                s => SampleSize::Fixed(
                    s.parse().map_err(|_| Error::Parse(format!("--m expects `auto` or a count, got {s:?}")))?,
                ),
            },
            trials: p.trials,
            seed: g.seed,
            estimator: p.estimator.into(),
        },
    };
    let run = pacsim::run_rectangle_trials(&exp)?;
    let r = &run.report;
    let mut report = Report::new("pac-rect", json!({ "experiment": &exp, "report": r, "rows": &run.rows }))
        .line("m", r.m_used)
        .line("trials", r.trials)
        .line("failures", r.failures)
        .line("empirical_failure_rate", r.empirical_failure_rate)
        .line("delta", r.delta)
        .line("mean_error", r.mean_error)
        .line("seed", r.seed)
        .columns(&["trial", "error", "failure"])
        .hide_rows_in_table();
    for row in &run.rows {
        report.row(vec![row.trial.to_string(), row.error.to_string(), row.failure.to_string()]);
    }
    Ok(report)
}

fn counterexample(input: Option<&Path>, powerset: usize, eps: f64) -> Result<Report> {
    let c = match input {
        Some(p) => ClassDocument::load(p)?.concept_class()?,
        None => gen::powerset(powerset),
    };
    let r = pacsim::counterexample_fat_check(&c, eps)?;
    let cx = pacsim::build_counterexample_class(&c)?;
    let mut identified = 0;
    for (concept, table) in c.concepts().iter().zip(cx.functions().functions()) {
        for p in 0..c.points() {
            if &pacsim::identify_from_one_point(&cx, p, table.value(p))? == concept {
                identified += 1;
            }
        }
    }
    let observations = c.len() * c.points();
    let mut report = Report::new(
        "counterexample",
        json!({ "check": &r, "identified": identified, "observations": observations, "offsets": cx.offsets() }),
    )
    .line("eps", r.eps)
    .line("vc", r.vc)
    .line("half_witness_shatters", r.half_witness_shatters)
    .line("fat", r.fat)
    .line("max_offset", r.max_offset)
    .line("holds", r.holds)
    .line("identified", format!("{identified}/{observations}"))
    .columns(&["concept", "offset", "values"]);
    for ((concept, b), f) in c.concepts().iter().zip(cx.offsets()).zip(cx.functions().functions()) {
        report.row(vec![concept.to_bit_string(), b.to_string(), float_list(f.values())]);
    }
    Ok(report)
}
