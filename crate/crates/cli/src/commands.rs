//! Subcommand implementations.

use std::fs::File;
use std::path::Path;
use std::time::Instant;

use psdyn_core::conformal::{
    ahlfors_regularity, boundary_measure, critical_exponent_graded, hausdorff_dimension_relation, level_measure,
    radon_nikodym_check, AhlforsOptions, AtomicMeasure, BranchPair, Provenance,
};
use psdyn_core::export::format_sig;
use psdyn_core::graph::{logscale_from_cone, max_admissible_alpha, metric_from_logscale, Budget, GradedCone};
use psdyn_core::growth::{
    check_growth_sandwich, check_submultiplicativity, dual_entropy_check, growth_fit, GradedSource, Potential,
};
use psdyn_core::rational::{
    branch_derivative_ratios, brolin_lyubich_hierarchy, build_preimage_cone, distortion_check, julia_dimension, level_cone, sample_level,
    Polynomial, RationalMap, RationalMapSystem, DERIVATIVE, LEVEL,
};
use psdyn_core::sft::{
    conformal_cylinder_measure, conformal_measure_atoms, parry_two_sided, prepend_pairs, project_cocycle,
    word_cone, HolderData, ProductBowen, ProjectionOptions, SftSystem, SymbolicCone, TwoSidedPotential,
};
use psdyn_core::Error;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{complex, CocycleChoice, Format, RationalConfig, RunConfig, SftConfig, SystemSpec, RN_ATOM_GAP};
use crate::output::{rounded_value, Manifest, OutputDir};
use crate::{CliError, Command};

/// Default level depth of rational preimage cones.
pub const RATIONAL_DEPTH: u32 = 12;
/// Default depth of subshift word cones and symbolic sources.
pub const SFT_DEPTH: u32 = 18;
/// Explicit word cones are kept below this many nodes unless a depth is set.
const WORD_CONE_NODES: u64 = 2_000_000;
/// Leaves used by the metric check.
const METRIC_LEAVES: usize = 64;
const DISTORTION_NODES: usize = 64;
/// Relative tolerance of the exact conformality check.
const CONFORMAL_TOL: f64 = 1e-10;
const PRODUCT_TOL: f64 = 1e-8;
const BROLIN_LYUBICH_TOL: f64 = 1e-12;
/// Word length of the exact conformality check.
const CONFORMAL_WORDS: usize = 10;
const RECTANGLE_LEN: usize = 6;
const AHLFORS_SLOPE_TOL: f64 = 0.1;

enum Model {
    Rational(RationalMapSystem),
    Sft(SftSystem),
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    seed: u64,
    dir: OutputDir,
}

impl Ctx<'_> {
    fn csv(&self) -> bool {
        self.cfg.output.wants(Format::Csv)
    }

    fn json(&self) -> bool {
        self.cfg.output.wants(Format::Json)
    }

    fn report<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        if self.json() {
            self.dir.write_json(name, value)?;
        }
        Ok(())
    }

    fn timed<T>(&mut self, stage: &str, f: impl FnOnce(&mut Self) -> Result<T, CliError>) -> Result<T, CliError> {
        let t = Instant::now();
        let r = f(self);
        self.dir.record_time(stage, t.elapsed());
        r
    }
}

/// Runs `cmd`; the manifest is written whether or not the command succeeds.
pub fn execute(cmd: Command, cfg: &RunConfig, seed: u64, out: &Path) -> Result<Manifest, CliError> {
    let mut ctx = Ctx {
        cfg,
        seed,
        dir: OutputDir::create(out)?,
    };
    let result = ctx
        .timed("system", |_| build_model(cfg))
        .and_then(|model| {
            ctx.timed(cmd.name(), |ctx| match cmd {
                Command::Entropy => entropy(ctx, &model),
                Command::Growth => growth(ctx, &model),
                Command::Dimension => dimension(ctx, &model),
                Command::Measure => measure(ctx, &model),
                Command::Check => check(ctx, &model),
                Command::ProjectCocycle => project(ctx, &model),
            })
        });
    let (results, failure) = match result {
        Ok(Outcome { results, failure }) => (results, failure),
        Err(e) => (json!({ "error": e.to_string(), "exit_code": e.exit_code() }), Some(e)),
    };
    let manifest = Manifest {
        tool: "psdyn".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: cmd.name().into(),
        config: rounded_value(cfg)?,
        seed,
        results: rounded_value(&results)?,
        outputs: Vec::new(),
    };
    let manifest = ctx.dir.finish(manifest)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(manifest),
    }
}

struct Outcome {
    results: Value,
    failure: Option<CliError>,
}

impl Outcome {
    fn ok(results: Value) -> Self {
        Outcome { results, failure: None }
    }
}

fn polynomial(coeffs: &[[f64; 2]]) -> Polynomial {
    Polynomial::new(coeffs.iter().map(|&c| complex(c)).collect())
}

fn build_rational(r: &RationalConfig) -> Result<RationalMapSystem, CliError> {
    let map = RationalMap::new(polynomial(&r.numerator), polynomial(&r.denominator))?;
    Ok(RationalMapSystem::new(
        map,
        r.seed.map(complex),
        r.certificate.params(),
        r.root_tol,
    )?)
}

fn build_sft(s: &SftConfig) -> Result<SftSystem, CliError> {
    Ok(match s.eigen_tol {
        Some(t) => SftSystem::with_tolerance(s.matrix.clone(), t)?,
        None => SftSystem::new(s.matrix.clone())?,
    })
}

fn build_model(cfg: &RunConfig) -> Result<Model, CliError> {
    Ok(match cfg.system() {
        SystemSpec::Rational(r) => Model::Rational(build_rational(&r)?),
        SystemSpec::Sft(s) => {
            if cfg.task.cocycle != CocycleChoice::Level {
                return Err(CliError::Config("subshifts support the level cocycle only".into()));
            }
            Model::Sft(build_sft(&s)?)
        }
    })
}

fn rational_cocycle(c: CocycleChoice) -> usize {
    match c {
        CocycleChoice::Level => LEVEL,
        CocycleChoice::Derivative => DERIVATIVE,
    }
}

/// Writes the certificate and refuses when it failed.
fn certified(ctx: &mut Ctx, sys: &RationalMapSystem) -> Result<(), CliError> {
    ctx.report("certificate.json", sys.certificate())?;
    sys.require_certificate()?;
    Ok(())
}

/// The preimage cone of the task: a budget on the chosen cocycle when one is
/// given, otherwise a level cone of the task depth.
fn rational_cone(ctx: &mut Ctx, sys: &RationalMapSystem) -> Result<(GradedCone, usize), CliError> {
    certified(ctx, sys)?;
    let task = &ctx.cfg.task;
    let cocycle = rational_cocycle(task.cocycle);
    let cone = ctx.timed("cone", |ctx| {
        let task = &ctx.cfg.task;
        Ok(match task.budget {
            Some(b) => build_preimage_cone(
                sys,
                Budget {
                    cocycle,
                    limit: b + 1e-9 * (1.0 + b),
                },
            )?,
            None => level_cone(sys, task.depth.unwrap_or(RATIONAL_DEPTH))?,
        })
    })?;
    Ok((cone, cocycle))
}

/// Deepest word cone not above the default node count, at least one level
/// below the cells.
fn default_word_depth(sft: &SftSystem, floor: u32) -> Result<u32, CliError> {
    let sums = SymbolicCone::new(sft.clone(), SFT_DEPTH).level_sums(&Potential::zero(), SFT_DEPTH)?;
    let mut total = 0u64;
    let mut depth = 0;
    for (d, &(count, _)) in sums.iter().enumerate() {
        total = total.saturating_add(count);
        if total > WORD_CONE_NODES {
            break;
        }
        depth = d as u32;
    }
    Ok(depth.max(floor))
}

fn sft_word_cone(ctx: &mut Ctx, sft: &SftSystem) -> Result<GradedCone, CliError> {
    let depth = match ctx.cfg.task.depth {
        Some(d) => d,
        None => default_word_depth(sft, ctx.cfg.task.cell_depth + 1)?,
    };
    ctx.timed("cone", |_| Ok(word_cone(sft, depth, &[])?))
}

fn pairs_up_to(n_max: u32) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for a in 1..n_max {
        for b in a..=n_max - a {
            out.push((a, b));
        }
    }
    out
}

fn annuli_csv(series: &psdyn_core::growth::AnnulusSeries) -> String {
    let mut s = String::from("n,count,u\n");
    for e in &series.entries {
        s.push_str(&format!("{},{},{}\n", e.n, e.count, format_sig(e.u)));
    }
    s
}

fn growth_report<S: GradedSource + ?Sized>(
    ctx: &mut Ctx,
    src: &S,
    cocycle: usize,
    psi: &Potential,
) -> Result<Value, CliError> {
    let (series, est) = growth_fit(src, cocycle, psi, ctx.cfg.task.n_max, None)?;
    let sandwich = check_growth_sandwich(&series, &est);
    let mult = check_submultiplicativity(src, cocycle, psi, &pairs_up_to(est.n_max))?;
    if ctx.csv() {
        ctx.dir.write("annuli.csv", annuli_csv(&series).as_bytes())?;
    }
    Ok(json!({
        "estimate": est,
        "bracket_width": est.width(),
        "sandwich": sandwich,
        "submultiplicativity": mult,
    }))
}

fn system_label(model: &Model) -> &'static str {
    match model {
        Model::Rational(_) => "rational",
        Model::Sft(_) => "sft",
    }
}

/// Exact growth rate of the level cocycle: `ln lambda` or `ln d`.
fn level_reference(model: &Model) -> f64 {
    match model {
        Model::Rational(s) => (s.degree() as f64).ln(),
        Model::Sft(s) => s.lambda().ln(),
    }
}

fn entropy(ctx: &mut Ctx, model: &Model) -> Result<Outcome, CliError> {
    let zero = Potential::zero();
    let mut report = match model {
        Model::Sft(sft) => {
            let depth = ctx.cfg.task.depth.unwrap_or(SFT_DEPTH);
            let src = SymbolicCone::new(sft.clone(), depth);
            let mut r = growth_report(ctx, &src, psdyn_core::sft::LEVEL, &zero)?;
            let n = r["estimate"]["n_max"].as_u64().unwrap_or(depth as u64) as u32;
            r["dual"] = serde_json::to_value(dual_entropy_check(sft, n)?).map_err(|e| CliError::Io(e.to_string()))?;
            r
        }
        Model::Rational(sys) => {
            let (cone, cocycle) = rational_cone(ctx, sys)?;
            growth_report(ctx, &cone, cocycle, &zero)?
        }
    };
    report["system"] = json!(system_label(model));
    report["cocycle"] = json!(ctx.cfg.task.cocycle);
    if ctx.cfg.task.cocycle == CocycleChoice::Level {
        let r = level_reference(model);
        let low = report["estimate"]["bracket_low"].as_f64().unwrap_or(f64::NAN);
        let high = report["estimate"]["bracket_high"].as_f64().unwrap_or(f64::NAN);
        report["reference"] = json!(r);
        report["reference_in_bracket"] = json!(low <= r && r <= high);
    }
    ctx.report("entropy.json", &report)?;
    Ok(Outcome::ok(report))
}

fn growth(ctx: &mut Ctx, model: &Model) -> Result<Outcome, CliError> {
    let tilt = ctx.cfg.task.tilt;
    let mut report = match model {
        Model::Sft(sft) => {
            let src = SymbolicCone::new(sft.clone(), ctx.cfg.task.depth.unwrap_or(SFT_DEPTH));
            growth_report(ctx, &src, psdyn_core::sft::LEVEL, &Potential::scaled(psdyn_core::sft::LEVEL, -tilt))?
        }
        Model::Rational(sys) => {
            let (cone, cocycle) = rational_cone(ctx, sys)?;
            growth_report(ctx, &cone, cocycle, &Potential::scaled(cocycle, -tilt))?
        }
    };
    report["system"] = json!(system_label(model));
    report["cocycle"] = json!(ctx.cfg.task.cocycle);
    report["tilt"] = json!(tilt);
    if ctx.cfg.task.cocycle == CocycleChoice::Level {
        report["reference"] = json!(level_reference(model) - tilt);
    }
    ctx.report("growth.json", &report)?;
    Ok(Outcome::ok(report))
}

fn dimension(ctx: &mut Ctx, model: &Model) -> Result<Outcome, CliError> {
    let task = &ctx.cfg.task;
    let report = match model {
        Model::Rational(sys) => {
            certified(ctx, sys)?;
            let task = &ctx.cfg.task;
            let limit = task
                .budget
                .unwrap_or(task.depth.unwrap_or(RATIONAL_DEPTH) as f64 * (sys.degree() as f64).ln());
            let tol = task.tolerance;
            let e = ctx.timed("critical_exponent", |_| {
                Ok(julia_dimension(
                    sys,
                    Budget {
                        cocycle: DERIVATIVE,
                        limit,
                    },
                    tol,
                )?)
            })?;
            json!({
                "system": "rational",
                "budget": limit,
                "dimension": e.s,
                "low": e.low,
                "high": e.high,
                "critical_exponent": e,
            })
        }
        Model::Sft(sft) => {
            let alpha = task
                .alpha
                .ok_or_else(|| CliError::Config("the dimension of a subshift needs task.alpha".into()))?;
            let src = SymbolicCone::new(sft.clone(), task.depth.unwrap_or(SFT_DEPTH));
            let (_, est) = growth_fit(&src, psdyn_core::sft::LEVEL, &Potential::zero(), task.n_max, None)?;
            json!({
                "system": "sft",
                "alpha": alpha,
                "beta_hat": est.beta_hat,
                "dimension": hausdorff_dimension_relation(est.beta_hat, alpha)?,
                "low": hausdorff_dimension_relation(est.bracket_low.max(0.0), alpha)?,
                "high": hausdorff_dimension_relation(est.bracket_high, alpha)?,
                "reference": hausdorff_dimension_relation(sft.lambda().ln(), alpha)?,
                "estimate": est,
            })
        }
    };
    ctx.report("dimension.json", &report)?;
    Ok(Outcome::ok(report))
}

fn s_grid(ctx: &Ctx, beta: f64) -> Result<Vec<f64>, CliError> {
    let t = &ctx.cfg.task;
    let s = match &t.s_values {
        Some(v) => v.clone(),
        None => t.s_offsets.iter().map(|o| beta + o).collect(),
    };
    if let Some(bad) = s.iter().find(|&&x| !(x > beta)) {
        return Err(Error::Input(format!("s = {bad} is not above the growth estimate {beta}")).into());
    }
    Ok(s)
}

/// Growth rate substituted for the exponent: the entropy estimate for the
/// level cocycle, the critical exponent otherwise.
fn exponent_on(cone: &GradedCone, cocycle: usize, tol: f64, n_max: Option<u32>) -> Result<f64, CliError> {
    if cocycle == LEVEL {
        Ok(growth_fit(cone, LEVEL, &Potential::zero(), n_max, None)?.1.beta_hat)
    } else {
        Ok(critical_exponent_graded(cone, cocycle, LEVEL, &Potential::zero(), tol)?.s)
    }
}

fn cells_csv(rows: &[(String, f64)]) -> String {
    let mut s = String::from("word,weight\n");
    for (w, m) in rows {
        s.push_str(&format!("{w},{}\n", format_sig(*m)));
    }
    s
}

fn measure_csv(m: &AtomicMeasure) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    m.write_csv(&mut buf)?;
    Ok(buf)
}

fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// All words over `d` letters of lengths `1..=depth` with mass `d^{-len}`.
fn uniform_address_measure(d: usize, depth: u32) -> Result<AtomicMeasure, CliError> {
    let mut atoms = Vec::new();
    let mut level: Vec<Vec<u8>> = vec![vec![]];
    for n in 1..=depth {
        level = level
            .iter()
            .flat_map(|w| {
                (0..d as u8).map(move |b| {
                    let mut v = w.clone();
                    v.push(b);
                    v
                })
            })
            .collect();
        let weight = (d as f64).powi(-(n as i32));
        atoms.extend(level.iter().map(|w| psdyn_core::conformal::Atom {
            location: psdyn_core::conformal::Location::Word(w.clone()),
            weight,
        }));
    }
    Ok(AtomicMeasure::new(atoms, Provenance::BrolinLyubich)?)
}

fn measure(ctx: &mut Ctx, model: &Model) -> Result<Outcome, CliError> {
    let zero = Potential::zero();
    let cell_depth = ctx.cfg.task.cell_depth;
    let tol = ctx.cfg.task.tolerance;
    let n_max = ctx.cfg.task.n_max;
    let (cone, cocycle, words) = match model {
        Model::Rational(sys) => {
            let (cone, cocycle) = rational_cone(ctx, sys)?;
            (cone, cocycle, false)
        }
        Model::Sft(sft) => (sft_word_cone(ctx, sft)?, psdyn_core::sft::LEVEL, true),
    };
    let beta = exponent_on(&cone, cocycle, tol, n_max)?;
    let s = s_grid(ctx, beta)?;
    let bm = ctx.timed("boundary_measure", |_| Ok(boundary_measure(&cone, cocycle, &zero, &s, cell_depth, beta)?))?;
    let labels: Vec<String> = bm
        .cells
        .iter()
        .zip(&bm.addresses)
        .map(|(&node, addr)| {
            let w = if words {
                cone.nodes()[node].payload.word().unwrap_or(addr).to_vec()
            } else {
                addr.clone()
            };
            psdyn_core::conformal::word_to_text(&w)
        })
        .collect();
    let (reference, reference_measure) = match model {
        Model::Rational(sys) => {
            let u = (sys.degree() as f64).powi(-(cell_depth as i32));
            (
                vec![u; bm.cells.len()],
                uniform_address_measure(sys.degree(), cell_depth)?,
            )
        }
        Model::Sft(sft) => {
            let r: Result<Vec<f64>, Error> = bm
                .cells
                .iter()
                .map(|&n| conformal_cylinder_measure(sft, cone.nodes()[n].payload.word().unwrap_or(&[])))
                .collect();
            (r?, conformal_measure_atoms(sft, cell_depth as usize)?)
        }
    };
    let tv = total_variation(&bm.final_masses, &reference);
    let max_dev = bm
        .final_masses
        .iter()
        .zip(&reference)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if ctx.csv() {
        let rows: Vec<(String, f64)> = labels.into_iter().zip(bm.final_masses.iter().cloned()).collect();
        ctx.dir.write("cells.csv", cells_csv(&rows).as_bytes())?;
        ctx.dir.write("reference.csv", &measure_csv(&reference_measure)?)?;
    }
    let report = json!({
        "system": system_label(model),
        "cocycle": ctx.cfg.task.cocycle,
        "beta_hat": beta,
        "s_values": s,
        "cell_depth": cell_depth,
        "cone_depth": cone.max_depth(),
        "cells": bm.cells.len(),
        "extrapolated": bm.extrapolated,
        "cauchy": bm.cauchy,
        "shallow_fraction": bm.shallow_fraction,
        "reference": match model {
            Model::Rational(_) => "uniform preimage measure",
            Model::Sft(_) => "conformal cylinder measure",
        },
        "total_variation": tv,
        "max_cell_deviation": max_dev,
    });
    ctx.report("measure.json", &report)?;
    Ok(Outcome::ok(report))
}

#[derive(Clone, Debug, Serialize)]
struct CheckItem {
    name: String,
    passed: bool,
    value: f64,
    limit: f64,
    detail: Value,
}

impl CheckItem {
    fn at_most(name: &str, value: f64, limit: f64, detail: Value) -> Self {
        CheckItem {
            name: name.into(),
            passed: value <= limit,
            value,
            limit,
            detail,
        }
    }

    fn failed(name: &str, err: &CliError) -> Self {
        CheckItem {
            name: name.into(),
            passed: false,
            value: f64::NAN,
            limit: f64::NAN,
            detail: json!({ "error": err.to_string() }),
        }
    }
}

fn item(name: &str, f: impl FnOnce() -> Result<CheckItem, CliError>) -> CheckItem {
    f().unwrap_or_else(|e| CheckItem::failed(name, &e))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

/// Synthesized metric on a sample of cone leaves: the exponent must satisfy
/// `e^{alpha delta} <= 2^{1/4}` and the chain metric must be a metric.
fn metric_item(cone: &GradedCone, cocycle: usize, depth: u32, alpha: Option<f64>) -> CheckItem {
    item("metric", || {
        let leaves = sample_level(cone, depth.min(cone.max_depth()), METRIC_LEAVES);
        let table = logscale_from_cone(cone, cocycle, &leaves)?;
        let delta = table.delta();
        let amax = max_admissible_alpha(delta);
        let alpha = alpha.unwrap_or(if amax.is_finite() { 0.5 * amax } else { 1.0 }.min(1.0));
        let m = metric_from_logscale(&table, alpha)?;
        let violation = m.distances.max_triangle_violation();
        Ok(CheckItem::at_most(
            "metric",
            violation,
            1e-12,
            json!({
                "points": leaves.len(),
                "delta": delta,
                "alpha": alpha,
                "max_admissible_alpha": if amax.is_finite() { json!(amax) } else { json!("inf") },
                "sandwich_constant": m.sandwich_constant,
            }),
        ))
    })
}

/// Radon-Nikodym check of an external measure file of word atoms.
fn measure_file_item(ctx: &Ctx, model: &Model, path: &Path) -> Result<CheckItem, CliError> {
    let file = File::open(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let m = AtomicMeasure::read_csv(file, Provenance::External)?;
    let (pairs, beta) = match model {
        Model::Sft(sft) => (prepend_pairs(sft, &m), sft.lambda().ln()),
        Model::Rational(sys) => (parent_pairs(&m), (sys.degree() as f64).ln()),
    };
    if pairs.is_empty() {
        return Err(Error::Input("measure file has no cell/branch pairs".into()).into());
    }
    let rn = radon_nikodym_check(&m, &pairs, beta)?;
    Ok(CheckItem::at_most(
        "measure_file_radon_nikodym",
        rn.max_relative_deviation,
        ctx.cfg.task.tolerance,
        json!({ "atoms": m.len(), "pairs": pairs.len(), "max_factor": rn.max_factor, "excluded": rn.excluded.len() }),
    ))
}

/// Address pairs `w -> wb` between word atoms, each with increment 1.
fn parent_pairs(m: &AtomicMeasure) -> Vec<BranchPair> {
    let index: std::collections::HashMap<&[u8], usize> = m
        .atoms()
        .iter()
        .enumerate()
        .filter_map(|(i, a)| a.location.word().map(|w| (w, i)))
        .collect();
    let mut pairs = Vec::new();
    for (i, a) in m.atoms().iter().enumerate() {
        if let Some(w) = a.location.word() {
            if let Some((_, parent)) = w.split_last() {
                if let Some(&p) = index.get(parent) {
                    pairs.push(BranchPair {
                        source: p,
                        target: i,
                        increment: 1.0,
                    });
                }
            }
        }
    }
    pairs
}

fn rational_suite(ctx: &mut Ctx, sys: &RationalMapSystem) -> Result<Vec<CheckItem>, CliError> {
    let cert = sys.certificate();
    let mut items = vec![CheckItem {
        name: "certificate".into(),
        passed: cert.passed,
        value: cert.min_distance,
        limit: cert.params.min_distance,
        detail: json!({ "failures": cert.failures }),
    }];
    if !cert.passed {
        ctx.report("certificate.json", cert)?;
        return Ok(items);
    }
    let task = ctx.cfg.task.clone();
    let depth = task.depth.unwrap_or(RATIONAL_DEPTH);
    let (cone, cocycle) = rational_cone(ctx, sys)?;
    items.push(metric_item(&cone, cocycle, task.cell_depth, task.alpha));
    items.push(item("distortion", || {
        let nodes = sample_level(&cone, cone.max_depth(), DISTORTION_NODES);
        let r = distortion_check(sys, &cone, &nodes, task.epsilon)?;
        Ok(CheckItem::at_most("distortion", r.constant, task.distortion_limit, to_value(&r)))
    }));
    items.push(item("radon_nikodym_brolin_lyubich", || {
        let (m, pairs) = brolin_lyubich_hierarchy(sys, task.cell_depth)?;
        let rn = radon_nikodym_check(&m, &pairs, (sys.degree() as f64).ln())?;
        Ok(CheckItem::at_most(
            "radon_nikodym_brolin_lyubich",
            rn.max_relative_deviation,
            BROLIN_LYUBICH_TOL,
            json!({ "pairs": pairs.len() }),
        ))
    }));
    let delta = ctx.timed("critical_exponent", |_| {
        Ok(critical_exponent_graded(&cone, DERIVATIVE, LEVEL, &Potential::zero(), task.tolerance)?.s)
    });
    match delta {
        Ok(delta) => {
            items.push(item("radon_nikodym_conformal", || {
                let atom_depth = task.rn_branch_depth + RN_ATOM_GAP;
                let atoms = level_cone(sys, atom_depth)?;
                let r = branch_derivative_ratios(sys, &atoms, delta, task.rn_radius, task.rn_branch_depth)?;
                Ok(CheckItem::at_most(
                    "radon_nikodym_conformal",
                    r.max_factor,
                    task.rn_factor_limit,
                    json!({
                        "exponent": delta,
                        "branches": r.rows.len(),
                        "atom_depth": atom_depth,
                        "atoms_in_ball": r.atoms_in_ball,
                        "min_image_atoms": r.min_image_atoms,
                        "ambiguous": r.ambiguous,
                        "max_relative_deviation": r.max_relative_deviation,
                    }),
                ))
            }));
            let seed = ctx.seed;
            items.push(item("ahlfors", || {
                let m = level_measure(&cone, DERIVATIVE, delta, depth.min(cone.max_depth()))?;
                let opts = AhlforsOptions {
                    seed,
                    ..AhlforsOptions::default()
                };
                let r = ahlfors_regularity(&m, &opts)?;
                Ok(CheckItem::at_most(
                    "ahlfors",
                    (r.slope - delta).abs(),
                    AHLFORS_SLOPE_TOL,
                    json!({
                        "slope": r.slope,
                        "exponent": delta,
                        "residual": r.residual,
                        "radius_floor": r.radius_floor,
                        "degenerate": r.degenerate,
                    }),
                ))
            }));
        }
        Err(e) => {
            items.push(CheckItem::failed("radon_nikodym_conformal", &e));
            items.push(CheckItem::failed("ahlfors", &e));
        }
    }
    Ok(items)
}

fn sft_suite(ctx: &mut Ctx, sft: &SftSystem) -> Result<Vec<CheckItem>, CliError> {
    let task = ctx.cfg.task.clone();
    let mut items = Vec::new();
    items.push(item("conformality", || {
        let m = conformal_measure_atoms(sft, CONFORMAL_WORDS)?;
        let pairs = prepend_pairs(sft, &m);
        let rn = radon_nikodym_check(&m, &pairs, sft.lambda().ln())?;
        Ok(CheckItem::at_most(
            "conformality",
            rn.max_relative_deviation,
            CONFORMAL_TOL,
            json!({ "pairs": pairs.len(), "word_length": CONFORMAL_WORDS }),
        ))
    }));
    items.push(item("product_vs_parry", || {
        let pb = ProductBowen::new(sft)?;
        let mut worst = 0.0f64;
        let mut rectangles = 0usize;
        for n in 1..=RECTANGLE_LEN {
            for w in sft.words(n) {
                let parry = parry_two_sided(sft, &w, 0)?;
                for k in 0..n {
                    let v = pb.measure(&w[..=k], &w[k..])?;
                    worst = worst.max((v - parry).abs());
                    rectangles += 1;
                }
            }
        }
        Ok(CheckItem::at_most(
            "product_vs_parry",
            worst,
            PRODUCT_TOL,
            json!({ "rectangles": rectangles }),
        ))
    }));
    items.push(item("dual_entropy", || {
        let n = task.n_max.unwrap_or(SFT_DEPTH);
        let d = dual_entropy_check(sft, n)?;
        let gap = (d.forward.midpoint() - d.transpose.midpoint()).abs();
        Ok(CheckItem {
            name: "dual_entropy".into(),
            passed: d.overlap,
            value: gap,
            limit: f64::NAN,
            detail: to_value(&d),
        })
    }));
    let metric_depth = task.cell_depth.min(6);
    let cone = ctx.timed("cone", |_| Ok(word_cone(sft, metric_depth, &[])?))?;
    items.push(metric_item(&cone, psdyn_core::sft::LEVEL, metric_depth, task.alpha));
    if !task.potential.is_empty() {
        items.push(item("livsic", || {
            let (livsic, cert) = project_sft(ctx, sft)?;
            Ok(CheckItem {
                name: "livsic".into(),
                passed: livsic.max_difference <= task.tolerance && cert.passed,
                value: livsic.max_difference,
                limit: task.tolerance,
                detail: json!({ "future_certificate": cert, "orbits": livsic.orbits.len() }),
            })
        }));
    }
    Ok(items)
}

fn check(ctx: &mut Ctx, model: &Model) -> Result<Outcome, CliError> {
    let mut items = match model {
        Model::Rational(sys) => rational_suite(ctx, sys)?,
        Model::Sft(sft) => sft_suite(ctx, sft)?,
    };
    if let Some(path) = ctx.cfg.task.measure_file.clone() {
        items.push(measure_file_item(ctx, model, &path)?);
    }
    let failed: Vec<String> = items.iter().filter(|i| !i.passed).map(|i| i.name.clone()).collect();
    let report = json!({
        "system": system_label(model),
        "passed": failed.is_empty(),
        "failed": failed,
        "checks": items,
    });
    ctx.report("check.json", &report)?;
    let failure = (!failed.is_empty()).then(|| CliError::CheckFailed(failed.join(", ")));
    Ok(Outcome {
        results: report,
        failure,
    })
}

/// Default Hölder data of a window potential: constant `sum |c| / theta^r`
/// with `r` the window radius, which bounds the variation on agreement
/// windows `[-n, n]` for every `n`.
fn default_holder(psi: &dyn TwoSidedPotential, coefficients: f64, theta: f64) -> HolderData {
    let (lo, hi) = psi.window();
    let r = lo.unsigned_abs().max(hi.unsigned_abs()) as i32;
    HolderData {
        constant: coefficients * theta.powi(-r),
        theta,
    }
}

fn project_sft(
    ctx: &Ctx,
    sft: &SftSystem,
) -> Result<(psdyn_core::sft::LivsicReport, psdyn_core::sft::FutureCertificate), CliError> {
    let task = &ctx.cfg.task;
    if task.potential.is_empty() {
        return Err(CliError::Config("project-cocycle needs task.potential terms".into()));
    }
    let psi = ctx.cfg.window_potential();
    let total: f64 = psi.terms.iter().map(|(c, _)| c.abs()).sum();
    let holder = match task.holder_constant {
        Some(c) => HolderData {
            constant: c,
            theta: task.holder_theta,
        },
        None => default_holder(&psi, total, task.holder_theta),
    };
    let opts = ProjectionOptions {
        depth: task.projection_depth,
        seed: ctx.seed,
        ..ProjectionOptions::default()
    };
    let proj = project_cocycle(sft, &psi, holder, &opts)?;
    let livsic = proj.livsic_check(task.max_period)?;
    let cert = proj.future_certificate(task.pairs, ctx.seed)?;
    Ok((livsic, cert))
}

fn project(ctx: &mut Ctx, model: &Model) -> Result<Outcome, CliError> {
    let Model::Sft(sft) = model else {
        return Err(CliError::Config("project-cocycle needs an sft system".into()));
    };
    let (livsic, cert) = ctx.timed("projection", |ctx| project_sft(ctx, sft))?;
    if ctx.csv() {
        let mut s = String::from("word,birkhoff_psi,birkhoff_psi_plus,difference\n");
        for o in &livsic.orbits {
            s.push_str(&format!(
                "{},{},{},{}\n",
                psdyn_core::conformal::word_to_text(&o.word),
                format_sig(o.birkhoff_psi),
                format_sig(o.birkhoff_psi_plus),
                format_sig(o.birkhoff_psi - o.birkhoff_psi_plus)
            ));
        }
        ctx.dir.write("orbits.csv", s.as_bytes())?;
    }
    let tol = ctx.cfg.task.tolerance;
    let passed = livsic.max_difference <= tol && cert.passed;
    let report = json!({
        "system": "sft",
        "projection_depth": ctx.cfg.task.projection_depth,
        "max_period": livsic.max_period,
        "orbits": livsic.orbits.len(),
        "max_difference": livsic.max_difference,
        "tolerance": tol,
        "future_certificate": cert,
        "passed": passed,
    });
    ctx.report("projection.json", &report)?;
    let failure = (!passed).then(|| {
        CliError::CheckFailed(format!(
            "Birkhoff sums differ by {:e} (tolerance {tol:e}) or the future certificate failed",
            livsic.max_difference
        ))
    });
    Ok(Outcome {
        results: report,
        failure,
    })
}
