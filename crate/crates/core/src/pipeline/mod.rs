//! The end-to-end procedure: sample filter, grouping, per-year statistics,
//! Fourier fits of the yearly series, prediction diagnostics, correlations
//! against macro series, and report emission.

mod emit;
mod stats;

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dataset::{
    apply_sample_filter, emit_csv, synth_outcomes, synth_registry_with, DatasetError,
    FirmYearRecord, GroupKey, OutcomeDraws, SynthConfig,
};
use crate::evolution::{OPERATIONS_PER_PERIOD, DEFAULT_H};
use crate::fitting::{
    fit_fourier1_with, fourier_extrema, pearson, CorrelationResult, FitOptions, FourierFit,
    TimeSeries, DEFAULT_GRID_STEP,
};
use crate::par::{self, Execution};

pub use emit::{emit_report, report_json, ReportFormat};
pub use stats::{year_stats, year_stats_with, SpiMode, SpiSource, YearStats};

/// Fewest firms a year needs before it enters a fit.
pub const DEFAULT_MIN_SAMPLE: usize = 50;

/// Expected ratio of the top-2..10 period to the top-1 period.
pub const EXPECTED_PERIOD_RATIO: f64 = 0.5;
/// Relative tolerance on [`EXPECTED_PERIOD_RATIO`].
pub const PERIOD_RATIO_TOLERANCE: f64 = 0.05;
/// Expected phase offset between the top-2..10 and SPI = 1 waves.
pub const EXPECTED_PHASE_DIFFERENCE: f64 = PI;
/// Absolute tolerance on [`EXPECTED_PHASE_DIFFERENCE`], radians.
pub const PHASE_TOLERANCE: f64 = 0.1;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("no group has a year with at least {min_sample} sampled firms")]
    NothingToFit { min_sample: usize },
    #[error("{firm_id} ({year}): top-11 mode needs a meeting share")]
    MissingMeetingShare { firm_id: String, year: i32 },
    #[error("{firm_id} ({year}): {message}")]
    Game {
        firm_id: String,
        year: i32,
        message: String,
    },
    #[error("records from {found} mixed into {expected}")]
    MixedGroupYear { expected: String, found: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub min_sample: usize,
    pub spi_mode: SpiMode,
    /// Period search interval; `None` uses the fitting default.
    pub period_range: Option<(f64, f64)>,
    pub grid_step: f64,
    /// Years per evolution operation, for the hypothesis reference.
    pub h: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            min_sample: DEFAULT_MIN_SAMPLE,
            spi_mode: SpiMode::Top10,
            period_range: None,
            grid_step: DEFAULT_GRID_STEP,
            h: DEFAULT_H,
        }
    }
}

/// A `(year, value)` series to correlate against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroSeries {
    pub name: String,
    pub points: Vec<(i32, f64)>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PipelineInput {
    pub records: Vec<FirmYearRecord>,
    /// Planted top-1 SPI values; group-years listed here take `r_spi_1` and
    /// the below-one statistics from these instead of the voting games.
    pub outcomes: OutcomeDraws,
    pub macro_series: Vec<MacroSeries>,
    pub seed: Option<u64>,
}

impl PipelineInput {
    pub fn from_records(records: Vec<FirmYearRecord>) -> Self {
        Self {
            records,
            ..Self::default()
        }
    }

    /// Generates the registry and planted outcomes of a synthetic config.
    pub fn from_synth(config: &SynthConfig, exec: Execution) -> Result<Self, PipelineError> {
        Ok(Self {
            records: synth_registry_with(config, exec)?,
            outcomes: synth_outcomes(config)?,
            macro_series: Vec::new(),
            seed: Some(config.seed),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    /// sha256 over the canonically ordered registry and planted outcomes.
    pub input_digest: String,
    pub macro_digests: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub n_records: usize,
    pub n_filtered: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub year: i32,
    pub t: f64,
    pub observed: f64,
    pub fitted: Option<f64>,
}

/// One yearly series over the fit window and its first-order Fourier fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    pub points: Vec<SeriesPoint>,
    pub fit: Option<FourierFit>,
    pub max: Option<f64>,
    pub min: Option<f64>,
    /// Why `fit` or the extrema are missing.
    pub note: Option<String>,
}

impl SeriesReport {
    pub fn period(&self) -> Option<f64> {
        self.fit.and_then(|f| f.period)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `T(m_top2_10) / T(m_top1)`.
    pub period_ratio: Option<f64>,
    pub period_ratio_expected: f64,
    pub period_ratio_tolerance: f64,
    pub period_ratio_within: Option<bool>,
    /// `phase(m_top2_10) - phase(r_spi_1)` wrapped to `[0, 2π)`.
    pub phase_difference: Option<f64>,
    pub phase_difference_expected: f64,
    pub phase_tolerance: f64,
    pub phase_within: Option<bool>,
    /// `T(m_top2_10) / T(r_spi_1)`; the phase comparison assumes this is near 1.
    pub phase_period_ratio: Option<f64>,
    pub r_spi_1_degenerate: Option<bool>,
    pub m_top1_degenerate: Option<bool>,
    pub m_top2_10_degenerate: Option<bool>,
    /// Period expected of `r_spi_1` from the evolution model: twelve
    /// operations of `h` years each.
    pub hypothesis_period: f64,
    pub hypothesis_max: f64,
    pub hypothesis_min: f64,
    /// `T(r_spi_1) / hypothesis_period - 1`.
    pub r_spi_1_period_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub group: GroupKey,
    pub label: String,
    /// Every year with at least one sampled firm, fitted or not.
    pub years: Vec<YearStats>,
    pub fit_window: Option<(i32, i32)>,
    pub r_spi_1: SeriesReport,
    pub m_top1: SeriesReport,
    pub m_top2_10: SeriesReport,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEntry {
    pub group: String,
    pub series: String,
    pub macro_name: String,
    pub n: usize,
    pub result: Option<CorrelationResult>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub provenance: Provenance,
    pub config: PipelineConfig,
    pub groups: Vec<GroupReport>,
    pub correlations: Vec<CorrelationEntry>,
}

impl Report {
    pub fn group(&self, key: GroupKey) -> Option<&GroupReport> {
        self.groups.iter().find(|g| g.group == key)
    }
}

fn canonical_order(a: &FirmYearRecord, b: &FirmYearRecord) -> std::cmp::Ordering {
    let shares = |r: &FirmYearRecord| -> Vec<u64> { r.shares().iter().map(|s| s.to_bits()).collect() };
    (a.group(), a.year, &a.firm_id)
        .cmp(&(b.group(), b.year, &b.firm_id))
        .then_with(|| shares(a).cmp(&shares(b)))
        .then_with(|| {
            let m = |r: &FirmYearRecord| (r.meeting_share.map(f64::to_bits), r.n_meetings);
            m(a).cmp(&m(b))
        })
}

fn digest_input(records: &[FirmYearRecord], outcomes: &OutcomeDraws) -> Result<String, PipelineError> {
    let mut hasher = Sha256::new();
    let mut buf = Vec::new();
    emit_csv(records, &mut buf)?;
    hasher.update(&buf);
    for ((group, year), draws) in outcomes {
        hasher.update(format!("\n{group},{year},{}\n", draws.len()).as_bytes());
        for d in draws {
            hasher.update(d.to_bits().to_le_bytes());
        }
    }
    Ok(hex::encode(hasher.finalize()))
}

fn digest_macro(series: &MacroSeries) -> String {
    let mut hasher = Sha256::new();
    for (year, value) in &series.points {
        hasher.update(year.to_le_bytes());
        hasher.update(value.to_bits().to_le_bytes());
    }
    hex::encode(hasher.finalize())
}

fn fit_series(
    stats: &[&YearStats],
    origin: i32,
    value: impl Fn(&YearStats) -> f64,
    opts: &FitOptions,
) -> SeriesReport {
    let mut points: Vec<SeriesPoint> = stats
        .iter()
        .map(|s| SeriesPoint {
            year: s.year,
            t: (s.year - origin) as f64,
            observed: value(s),
            fitted: None,
        })
        .collect();
    let fit = TimeSeries::new(
        points.iter().map(|p| p.t).collect(),
        points.iter().map(|p| p.observed).collect(),
    )
    .and_then(|ts| fit_fourier1_with(&ts, opts));
    match fit {
        Ok(fit) => {
            for p in &mut points {
                p.fitted = Some(fit.predict(p.t));
            }
            let extrema = fourier_extrema(&fit);
            SeriesReport {
                points,
                fit: Some(fit),
                max: extrema.as_ref().ok().map(|e| e.0),
                min: extrema.as_ref().ok().map(|e| e.1),
                note: extrema.err().map(|e| e.to_string()),
            }
        }
        Err(e) => SeriesReport {
            points,
            fit: None,
            max: None,
            min: None,
            note: Some(e.to_string()),
        },
    }
}

fn wrap_angle(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

fn diagnostics(
    r_spi_1: &SeriesReport,
    m_top1: &SeriesReport,
    m_top2_10: &SeriesReport,
    h: f64,
) -> Diagnostics {
    let live = |s: &SeriesReport| s.fit.filter(|f| !f.degenerate);
    let period_ratio = match (m_top2_10.period(), m_top1.period()) {
        (Some(a), Some(b)) => Some(a / b),
        _ => None,
    };
    let phase_difference = match (live(m_top2_10), live(r_spi_1)) {
        (Some(a), Some(b)) => Some(wrap_angle(a.phase() - b.phase())),
        _ => None,
    };
    let phase_period_ratio = match (m_top2_10.period(), r_spi_1.period()) {
        (Some(a), Some(b)) => Some(a / b),
        _ => None,
    };
    let hypothesis_period = OPERATIONS_PER_PERIOD as f64 * h;
    Diagnostics {
        period_ratio,
        period_ratio_expected: EXPECTED_PERIOD_RATIO,
        period_ratio_tolerance: PERIOD_RATIO_TOLERANCE,
        period_ratio_within: period_ratio.map(|r| {
            (r - EXPECTED_PERIOD_RATIO).abs() <= PERIOD_RATIO_TOLERANCE * EXPECTED_PERIOD_RATIO
        }),
        phase_difference,
        phase_difference_expected: EXPECTED_PHASE_DIFFERENCE,
        phase_tolerance: PHASE_TOLERANCE,
        phase_within: phase_difference
            .map(|d| (d - EXPECTED_PHASE_DIFFERENCE).abs() <= PHASE_TOLERANCE),
        phase_period_ratio,
        r_spi_1_degenerate: r_spi_1.fit.map(|f| f.degenerate),
        m_top1_degenerate: m_top1.fit.map(|f| f.degenerate),
        m_top2_10_degenerate: m_top2_10.fit.map(|f| f.degenerate),
        hypothesis_period,
        hypothesis_max: 2.0 / 3.0,
        hypothesis_min: 0.5,
        r_spi_1_period_gap: r_spi_1.period().map(|p| p / hypothesis_period - 1.0),
    }
}

fn correlate(group: &GroupReport, macros: &[MacroSeries]) -> Vec<CorrelationEntry> {
    let mut out = Vec::new();
    for m in macros {
        let lookup: BTreeMap<i32, f64> = m.points.iter().copied().collect();
        for (name, series) in [
            ("r_spi_1", &group.r_spi_1),
            ("m_top1", &group.m_top1),
            ("m_top2_10", &group.m_top2_10),
        ] {
            let (x, y): (Vec<f64>, Vec<f64>) = series
                .points
                .iter()
                .filter_map(|p| lookup.get(&p.year).map(|&v| (p.observed, v)))
                .unzip();
            let result = pearson(&x, &y);
            out.push(CorrelationEntry {
                group: group.label.clone(),
                series: name.to_string(),
                macro_name: m.name.clone(),
                n: x.len(),
                note: result.as_ref().err().map(|e| e.to_string()),
                result: result.ok(),
            });
        }
    }
    out
}

/// [`run_pipeline_with`] on the default execution strategy.
pub fn run_pipeline(input: &PipelineInput, config: &PipelineConfig) -> Result<Report, PipelineError> {
    run_pipeline_with(input, config, Execution::default())
}

/// Runs the full procedure. The report depends only on the input contents
/// and the configuration: not on record order and not on `exec`.
pub fn run_pipeline_with(
    input: &PipelineInput,
    config: &PipelineConfig,
    exec: Execution,
) -> Result<Report, PipelineError> {
    if !(config.h.is_finite() && config.h > 0.0) {
        return Err(PipelineError::Config(format!("h must be positive, got {}", config.h)));
    }
    let mut records = input.records.clone();
    records.sort_by(canonical_order);
    let input_digest = digest_input(&records, &input.outcomes)?;
    let filtered = apply_sample_filter(&records);

    let mut cells: BTreeMap<(GroupKey, i32), Vec<&FirmYearRecord>> = BTreeMap::new();
    for r in &filtered {
        cells.entry((r.group(), r.year)).or_default().push(r);
    }
    let cell_list: Vec<(&(GroupKey, i32), &Vec<&FirmYearRecord>)> = cells.iter().collect();
    let stats = par::map(&cell_list, exec, |(key, recs)| {
        let planted = input.outcomes.get(key).map(Vec::as_slice);
        year_stats_with(recs, config.spi_mode, planted, Execution::Sequential)
    });
    let mut by_group: BTreeMap<GroupKey, Vec<YearStats>> = BTreeMap::new();
    for s in stats {
        if let Some(s) = s? {
            by_group.entry(s.group).or_default().push(s);
        }
    }

    let opts = FitOptions {
        period_range: config.period_range,
        grid_step: config.grid_step,
        execution: exec,
    };
    let mut groups = Vec::new();
    let mut any_fitted = false;
    for key in GroupKey::ALL {
        let Some(years) = by_group.remove(&key) else {
            continue;
        };
        let fitted: Vec<&YearStats> = years
            .iter()
            .filter(|s| s.n_sample >= config.min_sample)
            .collect();
        any_fitted |= !fitted.is_empty();
        let fit_window = fitted.first().zip(fitted.last()).map(|(a, b)| (a.year, b.year));
        let origin = fit_window.map_or(0, |w| w.0);
        let r_spi_1 = fit_series(&fitted, origin, |s| s.r_spi_1, &opts);
        let m_top1 = fit_series(&fitted, origin, |s| s.m_top1, &opts);
        let m_top2_10 = fit_series(&fitted, origin, |s| s.m_top2_10, &opts);
        let diagnostics = diagnostics(&r_spi_1, &m_top1, &m_top2_10, config.h);
        groups.push(GroupReport {
            group: key,
            label: key.label(),
            years,
            fit_window,
            r_spi_1,
            m_top1,
            m_top2_10,
            diagnostics,
        });
    }
    if !any_fitted {
        return Err(PipelineError::NothingToFit {
            min_sample: config.min_sample,
        });
    }

    let correlations = groups
        .iter()
        .flat_map(|g| correlate(g, &input.macro_series))
        .collect();
    Ok(Report {
        provenance: Provenance {
            version: env!("CARGO_PKG_VERSION").to_string(),
            input_digest,
            macro_digests: input
                .macro_series
                .iter()
                .map(|m| (m.name.clone(), digest_macro(m)))
                .collect(),
            seed: input.seed,
            n_records: records.len(),
            n_filtered: filtered.len(),
        },
        config: *config,
        groups,
        correlations,
    })
}
