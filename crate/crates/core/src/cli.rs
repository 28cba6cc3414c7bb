//! Command-line front end. Every command builds a typed job, runs it to a set
//! of in-memory files and writes them out, so `--replay` can rebuild the same
//! bytes from the job echoed in an artifact.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::analytics::{self, DiabaticModel, PowerInput, PredictionInput, TimeBoundsInput};
use crate::basis::{binomial, MAX_SITES};
use crate::competitors::{self, ComparisonReport};
use crate::ensemble::{self, CycleSettings, EngineVariant, LevelStatsConfig, RunConfig, Sweep, SweepParam};
use crate::error::{Error, Result};
use crate::spectra::{self, SpacingHistogram};
use crate::stats::Estimate;

pub const ARTIFACT_FORMAT: &str = "mbl-otto-artifact/1";

#[derive(Debug, Parser)]
#[command(name = "mbl-otto", version, about = "Quantum Otto engine on a disordered spin chain")]
pub struct Cli {
    /// Rebuild the outputs of an earlier artifact (a JSON file written by any command).
    #[arg(long, value_name = "ARTIFACT")]
    pub replay: Option<PathBuf>,
    /// Output directory for --replay.
    #[arg(long, requires = "replay", value_name = "DIR")]
    pub replay_out: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Disorder-averaged cycle at one parameter point.
    Cycle(CycleArgs),
    /// Disorder-averaged cycle over a grid of one parameter.
    Sweep(SweepArgs),
    /// Level-spacing statistics and KS distances to Poisson and Wigner.
    Spacings(LevelArgs),
    /// Level-repulsion scale from the small-gap spacing histogram.
    DeltaMinus(LevelArgs),
    /// Closed-form work, heat, efficiency and time-scale estimates.
    Predict(PredictArgs),
    /// Power and power density of a physical platform.
    Estimate(EstimateArgs),
    /// Worst-case and spread comparison against the equal-disorder engine.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Standard,
    EqualDisorder,
    Bandwidth,
}

impl From<VariantArg> for EngineVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Standard => EngineVariant::Standard,
            VariantArg::EqualDisorder => EngineVariant::EqualDisorder,
            VariantArg::Bandwidth => EngineVariant::Bandwidth,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    #[arg(long)]
    pub sites: usize,
    #[arg(long, default_value_t = 2.0)]
    pub h_eth: f64,
    #[arg(long, default_value_t = 20.0)]
    pub h_mbl: f64,
    /// Cold-bath bandwidth as a fraction of the mean gap.
    #[arg(long, default_value_t = 0.0625)]
    pub wb_frac: f64,
    /// Cold-bath bandwidth as an energy; overrides --wb-frac.
    #[arg(long)]
    pub wb: Option<f64>,
    /// Cold-bath inverse temperature (`inf` allowed).
    #[arg(long, default_value = "inf", value_parser = crate::beta::parse)]
    pub beta_c: f64,
    #[arg(long, default_value_t = 0.0, value_parser = crate::beta::parse)]
    pub beta_h: f64,
    #[arg(long, default_value_t = 100)]
    pub realizations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Tuning speed; 0 selects adiabatic tuning.
    #[arg(long, default_value_t = 0.0)]
    pub speed: f64,
    /// Time step in units of the mean gap.
    #[arg(long, default_value_t = 0.405)]
    pub dt_factor: f64,
    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,
    #[arg(long, value_enum, default_value_t = VariantArg::Standard)]
    pub variant: VariantArg,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Also write per-realization records as CSV.
    #[arg(long)]
    pub records: bool,
}

impl EngineArgs {
    fn run_config(&self) -> RunConfig {
        RunConfig {
            sites: self.sites,
            h_eth: self.h_eth,
            h_mbl: self.h_mbl,
            realizations: self.realizations,
            master_seed: self.seed,
            eps: self.eps,
            cycle: CycleSettings {
                wb: self.wb.unwrap_or(self.wb_frac),
                wb_absolute: self.wb.is_some(),
                beta_c: self.beta_c,
                beta_h: self.beta_h,
                speed: self.speed,
                dt_factor: self.dt_factor,
            },
            sweep: None,
            variant: self.variant.into(),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CycleArgs {
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub engine: EngineArgs,
    /// wb, beta_c, beta_h or speed. W_b grid values follow --wb (absolute) or are fractions.
    #[arg(long)]
    pub param: SweepParam,
    /// Comma list or logspace:lo:hi:n (powers of ten).
    #[arg(long, value_parser = parse_grid)]
    pub grid: Grid,
}

#[derive(Debug, Clone, Args)]
pub struct LevelArgs {
    #[arg(long)]
    pub sites: usize,
    /// Disorder strength.
    #[arg(long)]
    pub h: f64,
    #[arg(long, default_value_t = 1000)]
    pub realizations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Central fraction of each spectrum kept.
    #[arg(long, default_value_t = 0.5)]
    pub window: f64,
    #[arg(long, default_value_t = 40)]
    pub bins: usize,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    /// Cold-bath bandwidth (energy).
    #[arg(long)]
    pub wb: f64,
    #[arg(long, default_value = "inf", value_parser = crate::beta::parse)]
    pub beta_c: f64,
    #[arg(long, default_value_t = 0.0, value_parser = crate::beta::parse)]
    pub beta_h: f64,
    /// Mean gap; defaults to the Gaussian estimate for --sites.
    #[arg(long)]
    pub mean_gap: Option<f64>,
    #[arg(long, default_value_t = 12)]
    pub sites: usize,
    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,
    /// Enables the diabatic estimates (needs --delta-minus).
    #[arg(long)]
    pub speed: Option<f64>,
    /// Enables the time bounds and diabatic estimates.
    #[arg(long)]
    pub delta_minus: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub xi_deep: f64,
    #[arg(long, default_value_t = 12.0)]
    pub xi_shallow: f64,
    /// Write predict.json here as well as printing it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    #[arg(long, default_value = "si-p")]
    pub preset: String,
    #[arg(long)]
    pub eps_ev: Option<f64>,
    #[arg(long)]
    pub subengine_sites: Option<usize>,
    #[arg(long)]
    pub pitch_nm: Option<f64>,
    #[arg(long)]
    pub wb_fraction: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[arg(long, default_value_t = 10)]
    pub sites: usize,
    #[arg(long, default_value_t = 2.0)]
    pub h_eth: f64,
    #[arg(long, default_value_t = 20.0)]
    pub h_mbl: f64,
    /// One or more W_b / <delta> values (comma list or logspace:lo:hi:n).
    #[arg(long, default_value = "0.125", value_parser = parse_grid)]
    pub wb_frac: Grid,
    #[arg(long, default_value = "inf", value_parser = crate::beta::parse)]
    pub beta_c: f64,
    #[arg(long, default_value_t = 0.0, value_parser = crate::beta::parse)]
    pub beta_h: f64,
    #[arg(long, default_value_t = 100)]
    pub realizations: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials_per_realization: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Also write every W_tot sample as CSV.
    #[arg(long)]
    pub samples: bool,
}

/// Parameter grid parsed from the command line.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

/// Parses `a,b,c` (each may be `inf`) or `logspace:lo:hi:n`.
pub fn parse_grid(text: &str) -> std::result::Result<Grid, String> {
    if let Some(rest) = text.strip_prefix("logspace:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err("expected logspace:lo:hi:n".into());
        }
        let lo: f64 = parts[0].parse().map_err(|e| format!("bad lo: {e}"))?;
        let hi: f64 = parts[1].parse().map_err(|e| format!("bad hi: {e}"))?;
        let n: usize = parts[2].parse().map_err(|e| format!("bad n: {e}"))?;
        if n < 1 {
            return Err("logspace needs n >= 1".into());
        }
        if n == 1 {
            return Ok(Grid(vec![10f64.powf(lo)]));
        }
        let step = (hi - lo) / (n - 1) as f64;
        return Ok(Grid((0..n).map(|i| 10f64.powf(lo + step * i as f64)).collect()));
    }
    let values = text
        .split(',')
        .map(|s| crate::beta::parse(s))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err("empty grid".into());
    }
    Ok(Grid(values))
}

/// A command with everything needed to rebuild its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "config", rename_all = "kebab-case")]
pub enum Job {
    Cycle { run: RunConfig, records: bool },
    Sweep { run: RunConfig, records: bool },
    Spacings(LevelStatsConfig),
    DeltaMinus(LevelStatsConfig),
    Predict(PredictJob),
    Estimate(PowerInput),
    Compare(CompareJob),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictJob {
    pub input: PredictionInput,
    pub speed: Option<f64>,
    pub delta_minus: Option<f64>,
    pub xi_deep: f64,
    pub xi_shallow: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareJob {
    pub sites: usize,
    pub h_eth: f64,
    pub h_mbl: f64,
    pub wb_fractions: Vec<f64>,
    #[serde(with = "crate::beta")]
    pub beta_c: f64,
    pub beta_h: f64,
    pub realizations: usize,
    pub trials_per_realization: usize,
    pub master_seed: u64,
    pub samples: bool,
}

/// One output file.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Serialize)]
struct Artifact<'a, R: Serialize> {
    format: &'a str,
    software: &'a str,
    version: &'a str,
    #[serde(flatten)]
    job: &'a Job,
    results: R,
}

#[derive(Deserialize)]
struct ArtifactHeader {
    format: String,
    #[serde(flatten)]
    job: Job,
}

fn artifact_json<R: Serialize>(job: &Job, results: R) -> Result<Vec<u8>> {
    let a = Artifact {
        format: ARTIFACT_FORMAT,
        software: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        job,
        results,
    };
    let mut bytes = serde_json::to_vec_pretty(&a)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn file(name: &str, bytes: Vec<u8>) -> OutputFile {
    OutputFile { name: name.to_string(), bytes }
}

/// CSV text preceded by `#` metadata lines.
struct CsvBuilder {
    head: String,
    writer: csv::Writer<Vec<u8>>,
}

impl CsvBuilder {
    fn new(format: &str, meta: &[(&str, String)], columns: &[&str]) -> Result<Self> {
        let mut head = format!("# {} {}\n# format: {format}\n", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"));
        for (k, v) in meta {
            head.push_str(&format!("# {k}: {v}\n"));
        }
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(columns)?;
        Ok(Self { head, writer })
    }

    fn row(&mut self, cells: &[String]) -> Result<()> {
        Ok(self.writer.write_record(cells)?)
    }

    fn finish(self) -> Result<Vec<u8>> {
        let body = self.writer.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        let mut out = self.head.into_bytes();
        out.extend(body);
        Ok(out)
    }
}

/// Shortest round-trip text; exponent form outside [1e-4, 1e15).
fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn estimate_cells(e: &Estimate) -> [String; 2] {
    [num(e.mean), opt(e.stderr)]
}

/// Runs a job to its output files.
pub fn execute(job: &Job) -> Result<Vec<OutputFile>> {
    match job {
        Job::Cycle { run, records } | Job::Sweep { run, records } => ensemble_files(job, run, *records),
        Job::Spacings(c) => level_files(job, c, false),
        Job::DeltaMinus(c) => level_files(job, c, true),
        Job::Predict(p) => Ok(vec![file("predict.json", artifact_json(job, predict_report(p)?)?)]),
        Job::Estimate(p) => Ok(vec![file("estimate.json", artifact_json(job, analytics::power_estimate(p)?)?)]),
        Job::Compare(c) => compare_files(job, c),
    }
}

#[derive(Serialize)]
struct SweepResults<'a> {
    summary: &'a ensemble::EnsembleSummary,
    diabatic_fit: Option<ensemble::DiabaticFit>,
}

fn ensemble_files(job: &Job, run: &RunConfig, records: bool) -> Result<Vec<OutputFile>> {
    let out = ensemble::run_ensemble(run)?;
    let s = &out.summary;
    let diabatic_fit = match (&run.sweep, s.metadata.delta_minus) {
        (Some(sw), Some(dm)) if sw.param == SweepParam::Speed && sw.grid.iter().filter(|&&v| v > 0.0).count() >= 4 => {
            let speeds: Vec<f64> = s.points.iter().map(|p| p.speed).collect();
            let w: Vec<f64> = s.points.iter().map(|p| p.w_tot.mean).collect();
            ensemble::fit_diabatic(&speeds, &w, dm, s.points[0].wb).ok()
        }
        _ => None,
    };
    let mut files = vec![file("summary.json", artifact_json(job, SweepResults { summary: s, diabatic_fit })?)];
    let meta = |extra: &str| {
        vec![
            ("command", extra.to_string()),
            ("master_seed", run.master_seed.to_string()),
            ("sites", run.sites.to_string()),
            ("realizations", run.realizations.to_string()),
            ("mean_gap", num(s.metadata.mean_gap)),
            ("delta_minus", opt(s.metadata.delta_minus)),
            ("excluded", s.metadata.excluded.len().to_string()),
        ]
    };
    if let Some(sw) = &run.sweep {
        let mut csv = CsvBuilder::new(
            "sweep/1",
            &meta("sweep"),
            &[
                "value", "wb", "beta_c", "beta_h", "speed", "realizations", "w1", "w1_err", "q2", "q2_err", "w3",
                "w3_err", "q4", "q4_err", "w_tot", "w_tot_err", "eta", "eta_err",
            ],
        )?;
        for (x, p) in sw.grid.iter().zip(&s.points) {
            let mut row = vec![num(*x), num(p.wb), num(p.beta_c), num(p.beta_h), num(p.speed), p.realizations.to_string()];
            for e in [&p.w1, &p.q2, &p.w3, &p.q4, &p.w_tot] {
                row.extend(estimate_cells(e));
            }
            row.push(opt(p.eta.map(|e| e.mean)));
            row.push(opt(p.eta.and_then(|e| e.stderr)));
            csv.row(&row)?;
        }
        files.push(file("sweep.csv", csv.finish()?));
    }
    if records {
        let mut csv = CsvBuilder::new(
            "records/1",
            &meta("records"),
            &["grid_point", "realization_id", "W1", "Q2", "W3", "Q4", "Wtot"],
        )?;
        for (g, recs) in out.records.iter().enumerate() {
            for r in recs {
                csv.row(&[
                    g.to_string(),
                    r.realization_id.to_string(),
                    num(r.w1),
                    num(r.q2),
                    num(r.w3),
                    num(r.q4),
                    num(r.w_tot),
                ])?;
            }
        }
        files.push(file("records.csv", csv.finish()?));
    }
    Ok(files)
}

fn histogram_csv(h: &SpacingHistogram, meta: &[(&str, String)]) -> Result<Vec<u8>> {
    let mut csv = CsvBuilder::new("histogram/1", meta, &["bin_left", "bin_right", "count", "density"])?;
    for b in &h.bins {
        csv.row(&[num(b.bin_left), num(b.bin_right), b.count.to_string(), num(b.density)])?;
    }
    csv.finish()
}

#[derive(Serialize)]
struct DeltaMinusResults {
    mean_gap: f64,
    delta_minus: f64,
    delta_minus_over_mean_gap: f64,
    spacings: usize,
}

fn level_files(job: &Job, c: &LevelStatsConfig, delta_minus_only: bool) -> Result<Vec<OutputFile>> {
    let stats = ensemble::level_statistics(c)?;
    let meta = vec![
        ("master_seed", c.master_seed.to_string()),
        ("sites", c.sites.to_string()),
        ("h", num(c.h)),
        ("realizations", c.realizations.to_string()),
        ("window", num(c.window)),
        ("spacings", "unfolded to unit mean".to_string()),
    ];
    if delta_minus_only {
        let dm = stats.delta_minus.ok_or_else(|| {
            Error::Statistics(format!(
                "{} spacings; at least {} needed for the repulsion scale",
                stats.spacings,
                spectra::MIN_DELTA_MINUS_SPACINGS
            ))
        })?;
        let results = DeltaMinusResults {
            mean_gap: stats.mean_gap,
            delta_minus: dm,
            delta_minus_over_mean_gap: dm / stats.mean_gap,
            spacings: stats.spacings,
        };
        let merged = stats.histogram.merged(spectra::MIN_BIN_COUNT);
        return Ok(vec![
            file("delta_minus.json", artifact_json(job, results)?),
            file("histogram.csv", histogram_csv(&merged, &meta)?),
        ]);
    }
    Ok(vec![
        file("spacings.json", artifact_json(job, &stats)?),
        file("histogram.csv", histogram_csv(&stats.histogram, &meta)?),
    ])
}

fn merge_flat(map: &mut Map<String, Value>, prefix: &str, value: Value) {
    if let Value::Object(inner) = value {
        for (k, v) in inner {
            map.insert(format!("{prefix}{k}"), v);
        }
    }
}

fn predict_report(p: &PredictJob) -> Result<Value> {
    let i = &p.input;
    let mut map = Map::new();
    map.insert("mean_gap".into(), Value::from(i.mean_gap));
    merge_flat(&mut map, "", serde_json::to_value(analytics::predicted_cycle(i)?)?);
    if i.wb > 0.0 {
        merge_flat(&mut map, "", serde_json::to_value(analytics::cold_bath_probabilities(i.wb, i.beta_c, i.mean_gap)?)?);
    }
    if i.wb < i.mean_gap {
        merge_flat(&mut map, "", serde_json::to_value(analytics::worst_case_analytic(i.wb, i.mean_gap)?)?);
    }
    if let Some(dm) = p.delta_minus {
        let tb = analytics::time_bounds(&TimeBoundsInput {
            wb: i.wb,
            delta_minus: dm,
            eps: i.eps,
            mean_gap: i.mean_gap,
            xi_shallow: p.xi_shallow,
            xi_deep: p.xi_deep,
            coupling: None,
        })?;
        merge_flat(&mut map, "", serde_json::to_value(tb)?);
        if let Some(v) = p.speed {
            let m = DiabaticModel::new(v, dm, i.wb, p.xi_deep, p.xi_shallow, i.sites);
            merge_flat(&mut map, "", serde_json::to_value(analytics::diabatic_predictions(&m, i.eps)?)?);
        }
    } else if p.speed.is_some() {
        return Err(Error::param("--speed needs --delta-minus"));
    }
    Ok(Value::Object(map))
}

#[derive(Serialize)]
struct ComparePoint {
    wb_fraction: f64,
    wb: f64,
    mean_gap: f64,
    analytic: Option<analytics::WorstCase>,
    report: ComparisonReport,
}

#[derive(Serialize)]
struct CompareResults {
    points: Vec<ComparePoint>,
    /// Log-log slopes of p_worst against W_b / <delta> (standard, equal-disorder).
    slopes: Option<(f64, f64)>,
}

fn compare_files(job: &Job, c: &CompareJob) -> Result<Vec<OutputFile>> {
    let mut points = Vec::new();
    let mut csv = CsvBuilder::new(
        "samples/1",
        &[("master_seed", c.master_seed.to_string()), ("sites", c.sites.to_string())],
        &["wb_fraction", "engine", "w_tot"],
    )?;
    for (g, &frac) in c.wb_fractions.iter().enumerate() {
        let mut run = RunConfig {
            sites: c.sites,
            h_eth: c.h_eth,
            h_mbl: c.h_mbl,
            realizations: c.realizations,
            master_seed: c.master_seed,
            eps: 1.0,
            cycle: CycleSettings { wb: frac, beta_c: c.beta_c, beta_h: c.beta_h, ..CycleSettings::default() },
            sweep: None,
            variant: EngineVariant::Standard,
        };
        let (standard, mean_gap) = competitors::sample_ensemble_trials(&run, c.trials_per_realization)?;
        let wb = frac * mean_gap;
        run.variant = EngineVariant::EqualDisorder;
        run.cycle.wb = wb;
        run.cycle.wb_absolute = true;
        let (tilde, _) = competitors::sample_ensemble_trials(&run, c.trials_per_realization)?;
        let report = competitors::compare_worst_case(&standard, &tilde, c.master_seed.wrapping_add(g as u64))?;
        if c.samples {
            for (label, w) in [("standard", &standard), ("equal_disorder", &tilde)] {
                for x in w {
                    csv.row(&[num(frac), label.to_string(), num(*x)])?;
                }
            }
        }
        points.push(ComparePoint {
            wb_fraction: frac,
            wb,
            mean_gap,
            analytic: analytics::worst_case_analytic(wb, mean_gap).ok(),
            report,
        });
    }
    let slopes = if points.len() >= 2 {
        let x: Vec<f64> = points.iter().map(|p| p.wb_fraction).collect();
        let ps: Vec<f64> = points.iter().map(|p| p.report.standard.p_worst).collect();
        let pt: Vec<f64> = points.iter().map(|p| p.report.tilde.p_worst).collect();
        match (competitors::worst_case_slope(&x, &ps), competitors::worst_case_slope(&x, &pt)) {
            (Ok(a), Ok(b)) => Some((a.slope, b.slope)),
            _ => None,
        }
    } else {
        None
    };
    let mut files = vec![file("compare.json", artifact_json(job, CompareResults { points, slopes })?)];
    if c.samples {
        files.push(file("samples.csv", csv.finish()?));
    }
    Ok(files)
}

impl Command {
    /// Job and output directory (`None`: print to stdout only).
    pub fn job(&self) -> Result<(Job, Option<PathBuf>)> {
        Ok(match self {
            Command::Cycle(a) => (Job::Cycle { run: a.engine.run_config(), records: a.engine.records }, Some(a.engine.out.clone())),
            Command::Sweep(a) => {
                let mut run = a.engine.run_config();
                run.sweep = Some(Sweep { param: a.param, grid: a.grid.0.clone() });
                (Job::Sweep { run, records: a.engine.records }, Some(a.engine.out.clone()))
            }
            Command::Spacings(a) | Command::DeltaMinus(a) => {
                let c = LevelStatsConfig {
                    sites: a.sites,
                    h: a.h,
                    realizations: a.realizations,
                    master_seed: a.seed,
                    window: a.window,
                    bins: a.bins,
                };
                let job = if matches!(self, Command::Spacings(_)) { Job::Spacings(c) } else { Job::DeltaMinus(c) };
                (job, Some(a.out.clone()))
            }
            Command::Predict(a) => {
                let mean_gap = match a.mean_gap {
                    Some(g) => g,
                    None => {
                        if a.sites < 2 || a.sites % 2 != 0 || a.sites > 60 {
                            return Err(Error::param("--sites must be even and in 2..=60"));
                        }
                        let dim = if a.sites <= MAX_SITES {
                            binomial(a.sites as u64, (a.sites / 2) as u64) as usize
                        } else {
                            return Err(Error::param(format!("give --mean-gap explicitly above {MAX_SITES} sites")));
                        };
                        spectra::analytic_mean_gap(a.sites, a.eps, dim)
                    }
                };
                let input = PredictionInput {
                    wb: a.wb,
                    beta_c: a.beta_c,
                    beta_h: a.beta_h,
                    mean_gap,
                    sites: a.sites,
                    eps: a.eps,
                };
                let job = PredictJob {
                    input,
                    speed: a.speed,
                    delta_minus: a.delta_minus,
                    xi_deep: a.xi_deep,
                    xi_shallow: a.xi_shallow,
                };
                (Job::Predict(job), a.out.clone())
            }
            Command::Estimate(a) => {
                let mut p = PowerInput::preset(&a.preset)?;
                if let Some(x) = a.eps_ev {
                    p.eps_ev = x;
                }
                if let Some(x) = a.subengine_sites {
                    p.subengine_sites = x;
                }
                if let Some(x) = a.pitch_nm {
                    p.pitch_nm = x;
                }
                if let Some(x) = a.wb_fraction {
                    p.wb_fraction = x;
                }
                (Job::Estimate(p), a.out.clone())
            }
            Command::Compare(a) => (
                Job::Compare(CompareJob {
                    sites: a.sites,
                    h_eth: a.h_eth,
                    h_mbl: a.h_mbl,
                    wb_fractions: a.wb_frac.0.clone(),
                    beta_c: a.beta_c,
                    beta_h: a.beta_h,
                    realizations: a.realizations,
                    trials_per_realization: a.trials_per_realization,
                    master_seed: a.seed,
                    samples: a.samples,
                }),
                Some(a.out.clone()),
            ),
        })
    }
}

/// Reads the job echoed in an artifact.
pub fn read_artifact(path: &Path) -> Result<Job> {
    let text = std::fs::read(path)?;
    let header: ArtifactHeader = serde_json::from_slice(&text)?;
    if header.format != ARTIFACT_FORMAT {
        return Err(Error::param(format!("unsupported artifact format {:?}", header.format)));
    }
    Ok(header.job)
}

fn write_files(dir: &Path, files: &[OutputFile], info: &RunInfo) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for f in files {
        std::fs::write(dir.join(&f.name), &f.bytes)?;
    }
    let mut bytes = serde_json::to_vec_pretty(info)?;
    bytes.push(b'\n');
    std::fs::write(dir.join("run_info.json"), bytes)?;
    Ok(())
}

/// Wall-clock facts kept out of the reproducible artifacts.
#[derive(Serialize)]
struct RunInfo {
    unix_time_s: u64,
    wall_time_s: f64,
    threads: Option<usize>,
    files: Vec<String>,
}

/// Maps an error to the process exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Numeric { .. } | Error::Statistics(_) | Error::FailureThreshold { .. } | Error::Singularity(_) => 3,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<()> {
    let started = Instant::now();
    let unix_time_s = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let (job, dir, original) = match (&cli.replay, &cli.command) {
        (Some(_), Some(_)) => return Err(Error::param("--replay cannot be combined with a command")),
        (Some(path), None) => {
            let job = read_artifact(path)?;
            let dir = cli.replay_out.clone().ok_or_else(|| Error::param("--replay needs --replay-out"))?;
            (job, Some(dir), Some(std::fs::read(path)?))
        }
        (None, Some(cmd)) => {
            let (job, dir) = cmd.job()?;
            (job, dir, None)
        }
        (None, None) => return Err(Error::param("no command given (see --help)")),
    };
    let files = ensemble::with_threads(cli.threads, || execute(&job))??;
    match &dir {
        Some(d) => {
            let info = RunInfo {
                unix_time_s,
                wall_time_s: started.elapsed().as_secs_f64(),
                threads: cli.threads,
                files: files.iter().map(|f| f.name.clone()).collect(),
            };
            write_files(d, &files, &info)?;
            for f in &files {
                eprintln!("wrote {}", d.join(&f.name).display());
            }
        }
        None => {}
    }
    if dir.is_none() || matches!(job, Job::Predict(_) | Job::Estimate(_)) {
        print!("{}", String::from_utf8_lossy(&files[0].bytes));
    }
    if let Some(bytes) = original {
        if files[0].bytes == bytes {
            eprintln!("replay: artifact reproduced byte for byte");
        } else {
            eprintln!("replay: regenerated artifact differs from the original");
            return Err(Error::Numeric { msg: "replay mismatch".into(), tag: None });
        }
    }
    Ok(())
}

/// Entry point of the binary; returns the exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
