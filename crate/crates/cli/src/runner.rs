//! Subcommand execution. Every run produces an in-memory set of named
//! artifacts; [`write_artifacts`] stores them together with a manifest.
//!
//! Seeds are derived from the root seed, the system's index in the config
//! and a fixed purpose tag, so a run never depends on iteration order or on
//! the worker count.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use anyhow::{ensure, Context, Result};
use dircomplex::covering::{profiles, ComplexityProfile, Coverage, Grid, Verdict};
use dircomplex::equicont::{
    close_sample, modulus_from_records, CloseSample, mu_report_from_records, pair_records, EquiFamily,
};
use dircomplex::metrics::{Family, Geometry};
use dircomplex::rng::{derive_seed, seeded};
use dircomplex::spectral::{spectrum_verdict, SpectralReport, SpectrumVerdict};
use dircomplex::suspension::{
    compare_profiles, diameter_note, shared_fiber_domination, suspension_profile, CrossValidation,
    DominationReport, SuspensionSystem,
};
use dircomplex::systems::{sample_measure, NetSpec};
use dircomplex::{ActionSystem, Slope};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, SystemSpec};
use crate::with_system;
use crate::zoo::{direction, sized, AnySystem, Purpose, Windowed};

const NET: u64 = 1;
const CROSS: u64 = 2;
const SPECTRAL: u64 = 3;
const CLOSE: u64 = 4;
const DOMINATION: u64 = 5;

const SPAN_HEADER: [&str; 9] = ["family", "beta", "b", "k", "eps", "exact", "greedy", "lower", "verdict"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Span,
    MeasureSpan,
    Equicont,
    Suspend,
    Spectral,
    Sweep,
    ZooCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Span => "span",
            Command::MeasureSpan => "measure-span",
            Command::Equicont => "equicont",
            Command::Suspend => "suspend",
            Command::Spectral => "spectral",
            Command::Sweep => "sweep",
            Command::ZooCheck => "zoo-check",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Named output files, kept sorted by name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Artifacts {
    pub files: BTreeMap<String, Vec<u8>>,
}

impl Artifacts {
    fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.insert(name.into(), bytes);
    }

    fn add_json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.add(name, bytes);
        Ok(())
    }

    pub fn json(&self, name: &str) -> Result<Value> {
        let bytes = self.files.get(name).with_context(|| format!("no artifact {name}"))?;
        Ok(serde_json::from_slice(bytes)?)
    }
}

fn seed_for(root: u64, system: usize, purpose: u64) -> u64 {
    derive_seed(derive_seed(root, system as u64), purpose)
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    Ok(w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)
}

/// One row per `(ε, k)` cell, tagged with the row verdict.
fn profile_rows(p: &ComplexityProfile, beta: Slope, b: f64) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for ((eps, row), verdict) in p.eps.iter().zip(&p.cells).zip(&p.verdicts) {
        for cell in row {
            rows.push(vec![
                p.family.name().to_string(),
                beta.to_string(),
                num(b),
                cell.k.to_string(),
                num(*eps),
                cell.exact.map(|e| e.to_string()).unwrap_or_default(),
                cell.greedy_upper.to_string(),
                cell.lower.to_string(),
                verdict.to_string(),
            ]);
        }
    }
    rows
}

fn profile_summary(p: &ComplexityProfile) -> Value {
    let mut v = json!({
        "family": p.family.name(),
        "verdicts": p.verdicts.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        "overall": p.overall.to_string(),
    });
    if !p.half_verdicts.is_empty() {
        v["half_eps_verdicts"] = json!(p.half_verdicts.iter().map(|v| v.to_string()).collect::<Vec<_>>());
    }
    v
}

fn topological_grid(config: &ExperimentConfig) -> Grid {
    Grid {
        eps: config.topological.eps.clone(),
        k: config.topological.k.clone(),
        coverage: Coverage::Full,
        cap: config.exact_cap,
        half_eps: config.topological.half_eps,
    }
}

fn measure_grid(config: &ExperimentConfig) -> Grid {
    Grid {
        eps: config.measure.eps.clone(),
        k: config.measure.k.clone(),
        coverage: Coverage::Measure,
        cap: config.exact_cap,
        half_eps: false,
    }
}

fn net<S: Windowed>(sys: &S, spec: &SystemSpec, config: &ExperimentConfig, index: usize) -> Vec<S::Point> {
    let net = NetSpec {
        size: config.topological.net_size,
        max_level: config.topological.max_level,
    };
    sized(sys, spec, config, Purpose::Net).net(net, &mut seeded(seed_for(config.seed, index, NET)))
}

/// Base measure sample; the same draws `cross_validate` uses for this system.
fn measure_sample<S: Windowed>(
    sys: &S,
    spec: &SystemSpec,
    config: &ExperimentConfig,
    index: usize,
) -> Result<Vec<S::Point>> {
    let seed = derive_seed(seed_for(config.seed, index, CROSS), 0);
    Ok(sample_measure(&sized(sys, spec, config, Purpose::Measure), config.measure.samples, seed)?)
}

fn close_points<S: Windowed>(sys: &S, spec: &SystemSpec, config: &ExperimentConfig, index: usize) -> CloseSample<S::Point> {
    close_sample(
        &sized(sys, spec, config, Purpose::Close),
        config.equicont.clusters,
        config.equicont.max_level,
        &mut seeded(seed_for(config.seed, index, CLOSE)),
    )
}

/// The system of a single-system subcommand, built with its index 0.
fn single(config: &ExperimentConfig) -> Result<(SystemSpec, AnySystem)> {
    let spec = config.single_system()?.clone();
    let sys = AnySystem::build(&spec, config)?;
    Ok((spec, sys))
}

fn directions_json(config: &ExperimentConfig, bs: &[f64]) -> Value {
    let mut out = Vec::new();
    for beta in &config.betas {
        for &b in bs {
            out.push(json!({"index": out.len(), "beta": beta.to_string(), "b": b}));
        }
    }
    Value::Array(out)
}

/// Runs `command` and returns its artifacts (without the manifest).
pub fn run(command: Command, config: &ExperimentConfig) -> Result<Artifacts> {
    config.validate()?;
    match command {
        Command::Span => run_span(config, Coverage::Full, command),
        Command::MeasureSpan => run_span(config, Coverage::Measure, command),
        Command::Sweep => {
            ensure!(config.betas.len() >= 2, "sweep needs at least two β values");
            run_span(config, Coverage::Measure, command)
        }
        Command::Equicont => run_equicont(config),
        Command::Suspend => run_suspend(config),
        Command::Spectral => run_spectral(config),
        Command::ZooCheck => run_zoo(config),
    }
}

fn run_span(config: &ExperimentConfig, coverage: Coverage, command: Command) -> Result<Artifacts> {
    let (spec, sys) = single(config)?;
    let (rows, directions, errors) = with_system!(&sys, s => span_table(s, &spec, config, coverage, command == Command::Sweep))?;
    let mut art = Artifacts::default();
    art.add(format!("{}.csv", command.name()), csv_bytes(&SPAN_HEADER, &rows)?);
    art.add_json(
        "summary.json",
        &json!({
            "command": command.name(),
            "system": spec.name(),
            "description": sys.describe(),
            "coverage": coverage,
            "directions": directions,
            "errors": errors,
        }),
    )?;
    Ok(art)
}

type SpanTable = (Vec<Vec<String>>, Vec<Value>, Vec<Value>);

fn span_table<S: Windowed>(
    sys: &S,
    spec: &SystemSpec,
    config: &ExperimentConfig,
    coverage: Coverage,
    tolerant: bool,
) -> Result<SpanTable> {
    let (sample, grid, bs) = match coverage {
        Coverage::Full => (net(sys, spec, config, 0), topological_grid(config), &config.b),
        Coverage::Measure => (measure_sample(sys, spec, config, 0)?, measure_grid(config), &config.measure.b),
    };
    let mut rows = Vec::new();
    let mut directions = Vec::new();
    let mut errors = Vec::new();
    for &beta in &config.betas {
        for &b in bs {
            let cell = direction(beta, b)
                .and_then(|d| Ok(profiles(sys, &Geometry::Directional(d), &config.families, &sample, &grid)?));
            match cell {
                Ok(ps) => {
                    for p in &ps {
                        rows.extend(profile_rows(p, beta, b));
                    }
                    directions.push(json!({
                        "beta": beta.to_string(),
                        "b": b,
                        "profiles": ps.iter().map(profile_summary).collect::<Vec<_>>(),
                    }));
                }
                Err(e) if tolerant => {
                    for family in &config.families {
                        let mut row = vec![family.name().to_string(), beta.to_string(), num(b)];
                        row.extend(std::iter::repeat(String::new()).take(5));
                        row.push("ERROR".into());
                        rows.push(row);
                    }
                    errors.push(json!({"beta": beta.to_string(), "b": b, "error": format!("{e:#}")}));
                }
                Err(e) => return Err(e.context(format!("β = {beta}, b = {b}"))),
            }
        }
    }
    Ok((rows, directions, errors))
}

const EQUI_HEADER: [&str; 5] = ["family", "eps", "delta", "discarded", "verdict"];

fn pass(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn run_equicont(config: &ExperimentConfig) -> Result<Artifacts> {
    let (spec, sys) = single(config)?;
    let mut art = Artifacts::default();
    let summaries = with_system!(&sys, s => equicont_tables(s, &spec, config, &mut art))?;
    art.add_json(
        "summary.json",
        &json!({
            "command": "equicont",
            "system": spec.name(),
            "description": sys.describe(),
            "k_max": config.equicont_k_max(),
            "directions": directions_json(config, &config.b),
            "files": {"modulus": "equicont.d{index}.csv", "mu": "equicont-mu.d{index}.csv"},
            "results": summaries,
        }),
    )?;
    Ok(art)
}

fn equicont_tables<S: Windowed>(
    sys: &S,
    spec: &SystemSpec,
    config: &ExperimentConfig,
    art: &mut Artifacts,
) -> Result<Vec<Value>> {
    let sample = close_points(sys, spec, config, 0);
    let deltas = config.deltas();
    let eps = &config.equicont.eps;
    let mut out = Vec::new();
    let mut index = 0;
    for &beta in &config.betas {
        for &b in &config.b {
            let d = direction(beta, b)?;
            let records = pair_records(sys, &d, &sample, config.equicont_k_max())?;
            let mut rows = Vec::new();
            let mut mu_rows = Vec::new();
            let mut families = Vec::new();
            for family in EquiFamily::ALL {
                let curve = modulus_from_records(&records, sample.len(), family, eps, &deltas);
                for (e, delta) in eps.iter().zip(&curve.delta) {
                    rows.push(vec![family.name().into(), num(*e), num(*delta), "0".into(), pass(*delta > 0.0).into()]);
                }
                let mu = mu_report_from_records(&records, sample.len(), family, config.equicont.tau, eps, &deltas)?;
                for ((e, delta), discarded) in eps.iter().zip(&mu.delta).zip(&mu.discarded) {
                    mu_rows.push(vec![
                        family.name().into(),
                        num(*e),
                        num(*delta),
                        discarded.to_string(),
                        pass(*delta > 0.0).into(),
                    ]);
                }
                families.push(json!({
                    "family": family.name(),
                    "modulus": pass(curve.passes()),
                    "mu": mu.verdict.to_string(),
                    "mu_budget": mu.budget,
                }));
            }
            art.add(format!("equicont.d{index}.csv"), csv_bytes(&EQUI_HEADER, &rows)?);
            art.add(format!("equicont-mu.d{index}.csv"), csv_bytes(&EQUI_HEADER, &mu_rows)?);
            out.push(json!({"index": index, "population": sample.len(), "families": families}));
            index += 1;
        }
    }
    Ok(out)
}

const SUSPEND_HEADER: [&str; 7] = ["side", "b", "k", "eps", "greedy", "lower", "verdict"];

fn suspend_rows(side: &str, b: Option<f64>, p: &ComplexityProfile) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for ((eps, row), verdict) in p.eps.iter().zip(&p.cells).zip(&p.verdicts) {
        for cell in row {
            rows.push(vec![
                side.into(),
                b.map(num).unwrap_or_default(),
                cell.k.to_string(),
                num(*eps),
                cell.greedy_upper.to_string(),
                cell.lower.to_string(),
                verdict.to_string(),
            ]);
        }
    }
    rows
}

/// Base measure profiles for `families` at every `measure.b`, the
/// suspension profile, and their comparison on the mean family.
struct CrossRun {
    base: Vec<(f64, Vec<ComplexityProfile>)>,
    cross: CrossValidation,
    domination: DominationReport,
}

fn cross_run<S: Windowed>(
    sys: &S,
    spec: &SystemSpec,
    sample: &[S::Point],
    config: &ExperimentConfig,
    index: usize,
    beta_index: usize,
    beta: Slope,
    families: &[Family],
) -> Result<CrossRun> {
    let grid = measure_grid(config);
    let mean = families
        .iter()
        .position(|&f| f == Family::Mean)
        .context("suspension comparison needs the mean family")?;
    let mut base = Vec::new();
    for &b in &config.measure.b {
        let geom = Geometry::Directional(direction(beta, b)?);
        base.push((b, profiles(sys, &geom, families, sample, &grid)?));
    }
    let root = seed_for(config.seed, index, CROSS);
    let measured = sized(sys, spec, config, Purpose::Measure);
    let susp = suspension_profile(
        &measured,
        beta,
        &grid.eps,
        &grid.k,
        config.measure.samples,
        derive_seed(root, 1),
        grid.cap,
    )?;
    let means = base.iter().map(|(b, ps)| (*b, ps[mean].clone())).collect();
    let cross = compare_profiles(beta, means, susp, diameter_note(sys))?;
    let ss = SuspensionSystem::new(measured, beta)?;
    let domination = shared_fiber_domination(
        &ss,
        config.domination_pairs,
        &config.measure.k,
        derive_seed(seed_for(config.seed, index, DOMINATION), beta_index as u64),
    )?;
    Ok(CrossRun { base, cross, domination })
}

fn cross_summary(cross: &CrossValidation, domination: &DominationReport) -> Value {
    json!({
        "beta": cross.beta,
        "base": cross.base.iter().map(|(b, p)| json!({"b": b, "verdict": p.overall.to_string()})).collect::<Vec<_>>(),
        "suspension": cross.suspension.overall.to_string(),
        "base_consistent": cross.base_consistent,
        "agreement": cross.agreement,
        "decisive": cross.decisive,
        "note": cross.note,
        "domination": domination,
    })
}

fn run_suspend(config: &ExperimentConfig) -> Result<Artifacts> {
    let (spec, sys) = single(config)?;
    let mut art = Artifacts::default();
    let agreement = with_system!(&sys, s => {
        let sample = measure_sample(s, &spec, config, 0)?;
        let mut agreement = Vec::new();
        for (i, &beta) in config.betas.iter().enumerate() {
            let run = cross_run(s, &spec, &sample, config, 0, i, beta, &[Family::Mean])?;
            let mut rows = Vec::new();
            for (b, p) in &run.cross.base {
                rows.extend(suspend_rows("base", Some(*b), p));
            }
            rows.extend(suspend_rows("suspension", None, &run.cross.suspension));
            art.add(format!("suspend.d{i}.csv"), csv_bytes(&SUSPEND_HEADER, &rows)?);
            let mut entry = cross_summary(&run.cross, &run.domination);
            entry["index"] = json!(i);
            agreement.push(entry);
        }
        anyhow::Ok(agreement)
    })?;
    art.add_json("agreement.json", &agreement)?;
    art.add_json(
        "summary.json",
        &json!({
            "command": "suspend",
            "system": spec.name(),
            "description": sys.describe(),
            "files": "suspend.d{index}.csv, one per β in config order",
            "agreement": agreement,
        }),
    )?;
    Ok(art)
}

const SPECTRAL_HEADER: [&str; 6] = ["function_id", "k", "eps", "greedy", "lower", "verdict"];

fn spectral_rows(report: &SpectralReport) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for f in &report.functions {
        for ((eps, row), verdict) in report.eps.iter().zip(&f.cells).zip(&f.verdicts) {
            for cell in row {
                rows.push(vec![
                    f.function.clone(),
                    cell.k.to_string(),
                    num(*eps),
                    cell.greedy_upper.to_string(),
                    cell.lower.to_string(),
                    verdict.to_string(),
                ]);
            }
        }
    }
    rows
}

fn spectral_sample<S: Windowed>(
    sys: &S,
    spec: &SystemSpec,
    config: &ExperimentConfig,
    index: usize,
) -> Result<Vec<S::Point>> {
    let sys = sized(sys, spec, config, Purpose::Spectral);
    Ok(sample_measure(&sys, config.spectral.samples, seed_for(config.seed, index, SPECTRAL))?)
}

fn spectral_report<S: ActionSystem>(
    sys: &S,
    sample: &[S::Point],
    config: &ExperimentConfig,
    beta: Slope,
    b: f64,
) -> Result<SpectralReport> {
    Ok(spectrum_verdict(
        sys,
        &direction(beta, b)?,
        &sys.observables(),
        sample,
        &config.spectral.eps,
        &config.spectral.k,
        config.exact_cap,
    )?)
}

fn run_spectral(config: &ExperimentConfig) -> Result<Artifacts> {
    let (spec, sys) = single(config)?;
    let mut art = Artifacts::default();
    let verdicts = with_system!(&sys, s => {
        let sample = spectral_sample(s, &spec, config, 0)?;
        let mut verdicts = Vec::new();
        for &beta in &config.betas {
            for &b in &config.b {
                let report = spectral_report(s, &sample, config, beta, b)?;
                art.add(format!("spectral.d{}.csv", verdicts.len()), csv_bytes(&SPECTRAL_HEADER, &spectral_rows(&report))?);
                verdicts.push(json!({
                    "index": verdicts.len(),
                    "verdict": report.verdict.to_string(),
                    "functions": report.functions.iter().map(|f| json!({"id": f.function, "overall": f.overall.to_string()})).collect::<Vec<_>>(),
                }));
            }
        }
        anyhow::Ok(verdicts)
    })?;
    art.add_json(
        "summary.json",
        &json!({
            "command": "spectral",
            "system": spec.name(),
            "description": sys.describe(),
            "directions": directions_json(config, &config.b),
            "results": verdicts,
        }),
    )?;
    Ok(art)
}

/// A verdict of one family at one half-width.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyVerdict {
    pub family: String,
    pub b: f64,
    pub verdict: String,
    pub label: String,
}

impl FamilyVerdict {
    fn new(family: &str, b: f64, verdict: &Verdict) -> Self {
        FamilyVerdict {
            family: family.into(),
            b,
            verdict: verdict.to_string(),
            label: verdict.label().into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusEntry {
    pub family: String,
    pub b: f64,
    pub delta: Vec<f64>,
    pub pass: bool,
    /// Measure-theoretic probe with the configured `τ`.
    pub mu: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralEntry {
    pub b: f64,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuspensionEntry {
    pub verdict: String,
    pub base_consistent: bool,
    pub agreement: bool,
    pub decisive: bool,
    pub domination: DominationReport,
}

/// Consistency checks of one zoo cell; each compares two independent
/// computations that theory says must agree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZooChecks {
    /// Topological bowen verdict ⇔ positive bowen modulus, every `b`.
    pub bowen_covering_vs_modulus: bool,
    /// Topological maxmean verdict ⇔ positive maxmean modulus, every `b`.
    pub maxmean_covering_vs_modulus: bool,
    /// Mean-family measure verdict is decisive and equal across `measure.b`.
    pub mean_b_consistent: bool,
    /// Mean measure verdict BOUNDED ⇔ spectral DISCRETE-LIKE.
    pub mean_vs_spectral: bool,
    /// Base and suspension mean verdicts agree decisively.
    pub suspension_agreement: bool,
    /// Shared-fiber domination never violated.
    pub domination: bool,
    /// Maxmean and mean measure verdicts agree decisively at every `b`.
    pub maxmean_vs_mean: bool,
    /// Every verdict matches the known answer.
    pub ground_truth: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZooCell {
    pub system: String,
    pub beta: String,
    pub expected: String,
    pub topological: Vec<FamilyVerdict>,
    pub modulus: Vec<ModulusEntry>,
    pub measure: Vec<FamilyVerdict>,
    pub spectral: Vec<SpectralEntry>,
    pub suspension: SuspensionEntry,
    pub checks: ZooChecks,
}

const TOPOLOGICAL_FAMILIES: [Family; 3] = [Family::Bowen, Family::MaxMean, Family::Mean];
const MEASURE_FAMILIES: [Family; 2] = [Family::Mean, Family::MaxMean];

fn spectral_label(v: SpectrumVerdict) -> &'static str {
    match v {
        SpectrumVerdict::DiscreteLike => "BOUNDED",
        SpectrumVerdict::NonDiscrete => "GROWING",
        SpectrumVerdict::Inconclusive => "INCONCLUSIVE",
    }
}

/// Every zoo computation for one system across all configured β.
pub fn zoo_cells(spec: &SystemSpec, index: usize, config: &ExperimentConfig) -> Result<(Vec<ZooCell>, Vec<Vec<String>>)> {
    let sys = AnySystem::build(spec, config)?;
    with_system!(&sys, s => zoo_cells_for(s, spec, index, config))
}

fn zoo_cells_for<S: Windowed>(
    sys: &S,
    spec: &SystemSpec,
    index: usize,
    config: &ExperimentConfig,
) -> Result<(Vec<ZooCell>, Vec<Vec<String>>)> {
    let topo_sample = net(sys, spec, config, index);
    let measure = measure_sample(sys, spec, config, index)?;
    let spectral = spectral_sample(sys, spec, config, index)?;
    let close = close_points(sys, spec, config, index);
    let deltas = config.deltas();
    let topo_grid = topological_grid(config);
    let mut cells = Vec::new();
    let mut rows = Vec::new();
    let tag = |coverage: &str, mut r: Vec<String>| {
        r.insert(0, coverage.to_string());
        r.insert(0, spec.name().to_string());
        r
    };
    for (beta_index, &beta) in config.betas.iter().enumerate() {
        let expected = if spec.bounded_along(beta) { "BOUNDED" } else { "GROWING" };
        let mut topological = Vec::new();
        let mut modulus = Vec::new();
        let mut spectral_entries = Vec::new();
        for &b in &config.b {
            let d = direction(beta, b)?;
            let ps = profiles(sys, &Geometry::Directional(d.clone()), &TOPOLOGICAL_FAMILIES, &topo_sample, &topo_grid)?;
            for p in &ps {
                rows.extend(profile_rows(p, beta, b).into_iter().map(|r| tag("full", r)));
                topological.push(FamilyVerdict::new(p.family.name(), b, &p.overall));
            }
            let records = pair_records(sys, &d, &close, config.equicont_k_max())?;
            for family in EquiFamily::ALL {
                let curve = modulus_from_records(&records, close.len(), family, &config.equicont.eps, &deltas);
                let mu = mu_report_from_records(
                    &records,
                    close.len(),
                    family,
                    config.equicont.tau,
                    &config.equicont.eps,
                    &deltas,
                )?;
                modulus.push(ModulusEntry {
                    family: family.name().into(),
                    b,
                    pass: curve.passes(),
                    delta: curve.delta,
                    mu: mu.verdict.to_string(),
                });
            }
            let report = spectral_report(sys, &spectral, config, beta, b)?;
            spectral_entries.push(SpectralEntry {
                b,
                verdict: report.verdict.to_string(),
            });
        }
        let run = cross_run(sys, spec, &measure, config, index, beta_index, beta, &MEASURE_FAMILIES)?;
        let mut measure_verdicts = Vec::new();
        for (b, ps) in &run.base {
            for p in ps {
                rows.extend(profile_rows(p, beta, *b).into_iter().map(|r| tag("measure", r)));
                measure_verdicts.push(FamilyVerdict::new(p.family.name(), *b, &p.overall));
            }
        }
        let suspension = SuspensionEntry {
            verdict: run.cross.suspension.overall.to_string(),
            base_consistent: run.cross.base_consistent,
            agreement: run.cross.agreement,
            decisive: run.cross.decisive,
            domination: run.domination,
        };
        let checks = zoo_checks(expected, &topological, &modulus, &measure_verdicts, &spectral_entries, &suspension);
        cells.push(ZooCell {
            system: spec.name().into(),
            beta: beta.to_string(),
            expected: expected.into(),
            topological,
            modulus,
            measure: measure_verdicts,
            spectral: spectral_entries,
            suspension,
            checks,
        });
    }
    Ok((cells, rows))
}

fn covering_vs_modulus(family: &str, topological: &[FamilyVerdict], modulus: &[ModulusEntry]) -> bool {
    topological.iter().filter(|t| t.family == family).all(|t| {
        modulus
            .iter()
            .find(|m| m.family == family && m.b == t.b)
            .is_some_and(|m| match t.label.as_str() {
                "BOUNDED" => m.pass,
                "GROWING" => !m.pass,
                _ => false,
            })
    })
}

fn zoo_checks(
    expected: &str,
    topological: &[FamilyVerdict],
    modulus: &[ModulusEntry],
    measure: &[FamilyVerdict],
    spectral: &[SpectralEntry],
    suspension: &SuspensionEntry,
) -> ZooChecks {
    let means: Vec<&FamilyVerdict> = measure.iter().filter(|m| m.family == "mean").collect();
    let mean_label = means.first().map(|m| m.label.as_str()).unwrap_or("INCONCLUSIVE");
    let mean_b_consistent = mean_label != "INCONCLUSIVE" && means.iter().all(|m| m.label == mean_label);
    let spectral_labels: Vec<&str> = spectral
        .iter()
        .map(|s| match s.verdict.as_str() {
            "DISCRETE-LIKE" => spectral_label(SpectrumVerdict::DiscreteLike),
            "NON-DISCRETE" => spectral_label(SpectrumVerdict::NonDiscrete),
            _ => spectral_label(SpectrumVerdict::Inconclusive),
        })
        .collect();
    let mean_vs_spectral = mean_b_consistent && spectral_labels.iter().all(|&l| l == mean_label);
    let maxmean_vs_mean = means.iter().all(|m| {
        m.label != "INCONCLUSIVE"
            && measure
                .iter()
                .any(|x| x.family == "maxmean" && x.b == m.b && x.label == m.label)
    });
    let bounded = expected == "BOUNDED";
    let ground_truth = topological.iter().all(|t| t.label == expected)
        && modulus
            .iter()
            .filter(|m| m.family != "mean-limsup")
            .all(|m| m.pass == bounded)
        && measure.iter().all(|m| m.label == expected)
        && spectral_labels.iter().all(|&l| l == expected)
        && suspension.verdict.starts_with(expected);
    ZooChecks {
        bowen_covering_vs_modulus: covering_vs_modulus("bowen", topological, modulus),
        maxmean_covering_vs_modulus: covering_vs_modulus("maxmean", topological, modulus),
        mean_b_consistent,
        mean_vs_spectral,
        suspension_agreement: suspension.decisive,
        domination: suspension.domination.violations == 0,
        maxmean_vs_mean,
        ground_truth,
    }
}

const ZOO_HEADER: [&str; 11] = [
    "system", "coverage", "family", "beta", "b", "k", "eps", "exact", "greedy", "lower", "verdict",
];

fn run_zoo(config: &ExperimentConfig) -> Result<Artifacts> {
    let mut cells = Vec::new();
    let mut rows = Vec::new();
    for (index, spec) in config.zoo_systems().iter().enumerate() {
        let (c, r) = zoo_cells(spec, index, config).with_context(|| format!("system {}", spec.name()))?;
        cells.extend(c);
        rows.extend(r);
    }
    let mut matrix = BTreeMap::new();
    for c in &cells {
        let entry: &mut BTreeMap<String, Value> = matrix.entry(c.system.clone()).or_default();
        let observed = c.topological.iter().find(|t| t.family == "bowen").map(|t| t.label.clone());
        entry.insert(
            c.beta.clone(),
            json!({"expected": c.expected, "observed": observed, "match": c.checks.ground_truth}),
        );
    }
    let all = |f: fn(&ZooChecks) -> bool| cells.iter().all(|c| f(&c.checks));
    let mut art = Artifacts::default();
    art.add("zoo.csv", csv_bytes(&ZOO_HEADER, &rows)?);
    art.add_json(
        "summary.json",
        &json!({
            "command": "zoo-check",
            "ground_truth": matrix,
            "all": {
                "bowen_covering_vs_modulus": all(|c| c.bowen_covering_vs_modulus),
                "maxmean_covering_vs_modulus": all(|c| c.maxmean_covering_vs_modulus),
                "mean_b_consistent": all(|c| c.mean_b_consistent),
                "mean_vs_spectral": all(|c| c.mean_vs_spectral),
                "suspension_agreement": all(|c| c.suspension_agreement),
                "domination": all(|c| c.domination),
                "maxmean_vs_mean": all(|c| c.maxmean_vs_mean),
                "ground_truth": all(|c| c.ground_truth),
            },
            "cells": cells,
        }),
    )?;
    Ok(art)
}

fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Manifest describing a run: tool version, command, seed, config hash and
/// the digest of every artifact.
pub fn manifest(command: Command, config: &ExperimentConfig, artifacts: &Artifacts) -> Value {
    let mut config = config.clone();
    config.out = None;
    let canonical = config.canonical_json();
    let outputs: Vec<Value> = artifacts
        .files
        .iter()
        .map(|(name, bytes)| json!({"file": name, "bytes": bytes.len(), "sha256": sha256_hex(bytes)}))
        .collect();
    json!({
        "tool": "dircomplex",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command.name(),
        "seed": config.seed,
        "config_sha256": sha256_hex(canonical.as_bytes()),
        "config": config,
        "outputs": outputs,
    })
}

/// Writes every artifact and `manifest.json` into `dir`.
pub fn write_artifacts(dir: &Path, command: Command, config: &ExperimentConfig, artifacts: &Artifacts) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for (name, bytes) in &artifacts.files {
        let path = dir.join(name);
        std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    }
    let mut m = serde_json::to_vec_pretty(&manifest(command, config, artifacts))?;
    m.push(b'\n');
    let path = dir.join("manifest.json");
    std::fs::write(&path, m).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
