//! Experiment harness: drive each requested method over one trajectory,
//! time the streaming update calls with a monotonic clock, compare final
//! spectra against batch DMD, and emit plot-ready CSV/JSON reports.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::batch::fit_batch;
use crate::error::{Error, Result};
use crate::esdmd::EsdmdState;
use crate::sdmd::SdmdState;
use crate::snapshots::{read_trajectory_csv, SnapshotPair, SnapshotStream};
use crate::spectrum::{dynamic_spectrum, match_spectra, Spectrum};
use crate::systems::{
    kuramoto_trajectory, oscillatory_trajectory, KuramotoConfig, OscillatoryConfig,
};

/// Data source for an experiment run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "path")]
pub enum SystemKind {
    Oscillatory,
    Kuramoto,
    CsvFile(PathBuf),
}

/// Decomposition methods the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dmd,
    Sdmd,
    Esdmd,
}

impl Method {
    pub fn is_streaming(self) -> bool {
        matches!(self, Method::Sdmd | Method::Esdmd)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Method::Dmd => "dmd",
            Method::Sdmd => "sdmd",
            Method::Esdmd => "esdmd",
        };
        f.write_str(name)
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dmd" => Ok(Method::Dmd),
            "sdmd" => Ok(Method::Sdmd),
            "esdmd" => Ok(Method::Esdmd),
            other => Err(Error::InvalidConfig(format!(
                "unknown method {other:?}; expected one of dmd, sdmd, esdmd"
            ))),
        }
    }
}

/// Full experiment description; echoed verbatim into `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub system: SystemKind,
    pub methods: Vec<Method>,
    /// State dimension for the generated systems (ignored for CSV input).
    pub state_dim: usize,
    pub sample_rate_hz: f64,
    pub duration_s: f64,
    /// Rank cap for the streaming methods and truncation rank for batch.
    pub rank: usize,
    /// Gram-Schmidt expansion tolerance for the streaming methods.
    pub tolerance: f64,
    /// Pseudoinverse cutoff used when forming reduced operators.
    pub rcond: f64,
    pub seed: u64,
    /// Timing passes; per-iteration times take the minimum across passes.
    pub repeats: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            system: SystemKind::Oscillatory,
            methods: vec![Method::Dmd, Method::Sdmd, Method::Esdmd],
            state_dim: 100,
            sample_rate_hz: 120.0,
            duration_s: 10.0,
            rank: 10,
            tolerance: 1e-10,
            rcond: 1e-12,
            seed: 29,
            repeats: 5,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rank < 2 {
            return Err(Error::InvalidConfig(format!(
                "rank must be at least 2, got {}",
                self.rank
            )));
        }
        if self.repeats == 0 {
            return Err(Error::InvalidConfig("repeat count must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidConfig("tolerance must be positive".into()));
        }
        if self.rcond < 0.0 {
            return Err(Error::InvalidConfig("rcond must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Wall-clock statistics for one streaming method, in microseconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingSummary {
    /// Mean/std/median of the per-iteration minima across repeat passes.
    pub mean_us: f64,
    pub std_us: f64,
    pub median_us: f64,
    /// Mean/std over the iterations of the first pass alone.
    pub single_pass_mean_us: f64,
    pub single_pass_std_us: f64,
    /// One-off cost of forming the reduced operator and extracting the
    /// final spectrum (kept outside the per-iteration numbers).
    pub spectrum_us: f64,
}

/// Everything measured for one method.
#[derive(Debug, Clone)]
pub struct MethodResult {
    pub method: Method,
    pub spectrum: Spectrum,
    /// Per-iteration update times (minimum across repeat passes); exactly
    /// one entry per snapshot pair. `None` for batch DMD.
    pub per_iteration_us: Option<Vec<f64>>,
    pub timing: Option<TimingSummary>,
    /// Greedy spectral distance to the batch spectrum when batch DMD ran.
    pub distance_to_batch: Option<f64>,
}

/// Output of [`run_experiment`].
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    /// Number of snapshot pairs the streaming methods processed.
    pub pair_count: usize,
    pub results: Vec<MethodResult>,
}

impl ExperimentReport {
    pub fn result(&self, method: Method) -> Option<&MethodResult> {
        self.results.iter().find(|r| r.method == method)
    }
}

trait StreamingEngine: Sized {
    fn init(pair: &SnapshotPair, rank: usize, tol: f64) -> Result<Self>;
    fn step(&mut self, pair: &SnapshotPair) -> Result<()>;
    fn final_spectrum(&self, rcond: f64) -> Result<Spectrum>;
}

impl StreamingEngine for SdmdState {
    fn init(pair: &SnapshotPair, rank: usize, tol: f64) -> Result<Self> {
        SdmdState::new(pair, rank, tol)
    }

    fn step(&mut self, pair: &SnapshotPair) -> Result<()> {
        self.update(pair).map(|_| ())
    }

    fn final_spectrum(&self, rcond: f64) -> Result<Spectrum> {
        let operator = self.operator(rcond)?;
        dynamic_spectrum(&self.basis_x(), &operator.view())
    }
}

impl StreamingEngine for EsdmdState {
    fn init(pair: &SnapshotPair, rank: usize, tol: f64) -> Result<Self> {
        EsdmdState::new(pair, rank, tol)
    }

    fn step(&mut self, pair: &SnapshotPair) -> Result<()> {
        self.update(pair).map(|_| ())
    }

    fn final_spectrum(&self, rcond: f64) -> Result<Spectrum> {
        let operator = self.operator(rcond)?;
        dynamic_spectrum(&self.basis(), &operator.view())
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn std_dev(xs: &[f64]) -> f64 {
    let mu = mean(xs);
    (xs.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / xs.len() as f64).sqrt()
}

fn median(xs: &[f64]) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 0 {
        0.5 * (sorted[mid - 1] + sorted[mid])
    } else {
        sorted[mid]
    }
}

/// Drive one streaming engine through all pairs `repeats` times, timing
/// only the update call (initialization counts as the first iteration).
fn run_streaming<E: StreamingEngine>(
    pairs: &[SnapshotPair],
    cfg: &ExperimentConfig,
) -> Result<(Spectrum, Vec<f64>, TimingSummary)> {
    let m = pairs.len();
    let mut min_us = vec![f64::INFINITY; m];
    let mut first_pass = vec![0.0f64; m];
    let mut final_state = None;

    for pass in 0..cfg.repeats {
        let start = Instant::now();
        let mut engine = E::init(&pairs[0], cfg.rank, cfg.tolerance)?;
        let mut elapsed = start.elapsed().as_secs_f64() * 1e6;
        if pass == 0 {
            first_pass[0] = elapsed;
        }
        min_us[0] = min_us[0].min(elapsed);

        for (slot, pair) in pairs[1..].iter().enumerate() {
            let start = Instant::now();
            engine.step(pair)?;
            elapsed = start.elapsed().as_secs_f64() * 1e6;
            if pass == 0 {
                first_pass[slot + 1] = elapsed;
            }
            min_us[slot + 1] = min_us[slot + 1].min(elapsed);
        }
        final_state = Some(engine);
    }

    let engine = final_state.expect("at least one pass runs");
    let start = Instant::now();
    let spectrum = engine.final_spectrum(cfg.rcond)?;
    let spectrum_us = start.elapsed().as_secs_f64() * 1e6;

    let timing = TimingSummary {
        mean_us: mean(&min_us),
        std_us: std_dev(&min_us),
        median_us: median(&min_us),
        single_pass_mean_us: mean(&first_pass),
        single_pass_std_us: std_dev(&first_pass),
        spectrum_us,
    };
    Ok((spectrum, min_us, timing))
}

fn build_trajectory(cfg: &ExperimentConfig) -> Result<ndarray::Array2<f64>> {
    match &cfg.system {
        SystemKind::Oscillatory => oscillatory_trajectory(&OscillatoryConfig {
            state_dim: cfg.state_dim,
            sample_rate_hz: cfg.sample_rate_hz,
            duration_s: cfg.duration_s,
            seed: cfg.seed,
            ..Default::default()
        }),
        SystemKind::Kuramoto => {
            let mut kcfg = KuramotoConfig::fully_connected(cfg.state_dim);
            kcfg.sample_rate_hz = cfg.sample_rate_hz;
            kcfg.duration_s = cfg.duration_s;
            kcfg.seed = cfg.seed;
            kuramoto_trajectory(&kcfg)
        }
        SystemKind::CsvFile(path) => read_trajectory_csv(path),
    }
}

/// Run the configured methods over a single trajectory.
///
/// The timed region covers exactly the per-pair update call of each
/// streaming method; trajectory generation, operator formation, spectrum
/// extraction, and I/O stay outside it. The benchmark loop is
/// single-threaded.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let trajectory = build_trajectory(cfg)?;
    let stream = SnapshotStream::from_trajectory(trajectory)?;
    let pairs: Vec<SnapshotPair> = stream.clone().collect();
    let pair_count = pairs.len();

    let mut methods: Vec<Method> = Vec::new();
    for &m in &cfg.methods {
        if !methods.contains(&m) {
            methods.push(m);
        }
    }

    let batch_spectrum = if methods.contains(&Method::Dmd) {
        let (x, y) = stream.batch_matrices();
        let fit = fit_batch(&x.view(), &y.view(), cfg.rank)?;
        Some(dynamic_spectrum(&fit.basis.view(), &fit.operator.view())?)
    } else {
        None
    };

    let mut results = Vec::with_capacity(methods.len());
    for method in methods {
        let result = match method {
            Method::Dmd => MethodResult {
                method,
                spectrum: batch_spectrum.clone().expect("batch spectrum computed"),
                per_iteration_us: None,
                timing: None,
                distance_to_batch: None,
            },
            Method::Sdmd | Method::Esdmd => {
                let (spectrum, per_iter, timing) = match method {
                    Method::Sdmd => run_streaming::<SdmdState>(&pairs, cfg)?,
                    _ => run_streaming::<EsdmdState>(&pairs, cfg)?,
                };
                let distance_to_batch = batch_spectrum
                    .as_ref()
                    .map(|batch| {
                        let top_k = cfg.rank.min(spectrum.len()).min(batch.len());
                        match_spectra(&spectrum, batch, top_k)
                    })
                    .transpose()?;
                MethodResult {
                    method,
                    spectrum,
                    per_iteration_us: Some(per_iter),
                    timing: Some(timing),
                    distance_to_batch,
                }
            }
        };
        results.push(result);
    }

    Ok(ExperimentReport {
        config: cfg.clone(),
        pair_count,
        results,
    })
}

/// Report serialization formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ReportFormat {
    Csv,
    Json,
}

#[derive(Serialize)]
struct JsonMethodReport<'a> {
    method: String,
    eigenvalues_re: Vec<f64>,
    eigenvalues_im: Vec<f64>,
    normalized_frequencies: &'a [f64],
    amplitudes: &'a [f64],
    timing: Option<&'a TimingSummary>,
    distance_to_batch: Option<f64>,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    config: &'a ExperimentConfig,
    pair_count: usize,
    methods: Vec<JsonMethodReport<'a>>,
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Write the report under `out_dir`; returns the paths written.
///
/// CSV output: one `spectrum_<method>.csv` per method with columns
/// `re,im,normalized_frequency,amplitude`, plus `timing.csv` with one
/// microsecond column per streaming method. JSON output: `report.json`
/// with the config echo, spectra, and timing summaries. Floats are
/// serialized with 17 significant digits.
pub fn emit_report(
    report: &ExperimentReport,
    out_dir: &Path,
    formats: &BTreeSet<ReportFormat>,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|source| Error::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();

    if formats.contains(&ReportFormat::Csv) {
        for result in &report.results {
            let path = out_dir.join(format!("spectrum_{}.csv", result.method));
            let mut body = String::from("re,im,normalized_frequency,amplitude\n");
            let s = &result.spectrum;
            for (j, lam) in s.eigenvalues.iter().enumerate() {
                body.push_str(&format!(
                    "{:.16e},{:.16e},{:.16e},{:.16e}\n",
                    lam.re, lam.im, s.normalized_frequencies[j], s.amplitudes[j]
                ));
            }
            write_file(&path, &body)?;
            written.push(path);
        }

        let timed: Vec<&MethodResult> = report
            .results
            .iter()
            .filter(|r| r.per_iteration_us.is_some())
            .collect();
        if !timed.is_empty() {
            let path = out_dir.join("timing.csv");
            let mut body = String::from("iteration");
            for r in &timed {
                body.push_str(&format!(",{}_us", r.method));
            }
            body.push('\n');
            for i in 0..report.pair_count {
                body.push_str(&(i + 1).to_string());
                for r in &timed {
                    let us = r.per_iteration_us.as_ref().expect("filtered")[i];
                    body.push_str(&format!(",{us:.16e}"));
                }
                body.push('\n');
            }
            write_file(&path, &body)?;
            written.push(path);
        }
    }

    if formats.contains(&ReportFormat::Json) {
        let methods: Vec<JsonMethodReport<'_>> = report
            .results
            .iter()
            .map(|r| JsonMethodReport {
                method: r.method.to_string(),
                eigenvalues_re: r.spectrum.eigenvalues.iter().map(|z| z.re).collect(),
                eigenvalues_im: r.spectrum.eigenvalues.iter().map(|z| z.im).collect(),
                normalized_frequencies: &r.spectrum.normalized_frequencies,
                amplitudes: &r.spectrum.amplitudes,
                timing: r.timing.as_ref(),
                distance_to_batch: r.distance_to_batch,
            })
            .collect();
        let json = JsonReport {
            config: &report.config,
            pair_count: report.pair_count,
            methods,
        };
        let path = out_dir.join("report.json");
        let body = serde_json::to_string_pretty(&json)
            .map_err(|e| Error::InvalidConfig(format!("report serialization failed: {e}")))?;
        write_file(&path, &body)?;
        written.push(path);
    }

    Ok(written)
}

/// Both formats, the default for the CLI.
pub fn all_formats() -> BTreeSet<ReportFormat> {
    [ReportFormat::Csv, ReportFormat::Json].into_iter().collect()
}
