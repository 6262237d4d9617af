use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{GroupReport, PipelineError, Report, SeriesReport};
use crate::dataset::GroupKey;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    /// The whole report as one JSON document.
    Json,
    /// A directory of per-table CSV files.
    CsvTables,
    /// A directory with one `(t, year, observed, fitted)` CSV per fitted series.
    PlotData,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv-tables" => Ok(ReportFormat::CsvTables),
            "plot-data" => Ok(ReportFormat::PlotData),
            other => Err(format!(
                "unknown format {other:?} (expected json, csv-tables or plot-data)"
            )),
        }
    }
}

pub fn report_json(report: &Report) -> Result<String, PipelineError> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

fn num(x: f64) -> String {
    x.to_string()
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn opt_bool(x: Option<bool>) -> String {
    x.map(|b| b.to_string()).unwrap_or_default()
}

struct Table {
    name: &'static str,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &'static str, header: &[&str]) -> Self {
        Self {
            name,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn write(&self, dir: &Path) -> Result<PathBuf, PipelineError> {
        let path = dir.join(format!("{}.csv", self.name));
        let mut w = csv::Writer::from_path(&path).map_err(csv_error)?;
        w.write_record(&self.header).map_err(csv_error)?;
        for row in &self.rows {
            w.write_record(row).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(path)
    }
}

fn csv_error(e: csv::Error) -> PipelineError {
    PipelineError::Dataset(e.into())
}

fn years_table(report: &Report) -> Table {
    let mut t = Table::new(
        "years",
        &[
            "group",
            "year",
            "n_sample",
            "spi_source",
            "n_spi",
            "r_spi_1",
            "m_top1",
            "sd_top1",
            "min_top1",
            "max_top1",
            "m_top2_10",
            "sd_top2_10",
            "min_top2_10",
            "max_top2_10",
            "n_meeting",
            "meeting_ratio_mean",
            "meeting_ratio_sd",
            "band_count_ratio",
            "r_spi_1_top9",
            "r_spi_1_top10",
            "r_spi_1_top11",
            "n_spi_lt1",
            "spi_lt1_mean",
            "spi_lt1_sd",
            "spi_lt1_band",
        ],
    );
    for g in &report.groups {
        for s in &g.years {
            t.rows.push(vec![
                g.label.clone(),
                s.year.to_string(),
                s.n_sample.to_string(),
                match s.spi_source {
                    super::SpiSource::Computed => "computed".into(),
                    super::SpiSource::Planted => "planted".into(),
                },
                s.n_spi.to_string(),
                num(s.r_spi_1),
                num(s.m_top1),
                opt(s.sd_top1),
                num(s.min_top1),
                num(s.max_top1),
                num(s.m_top2_10),
                opt(s.sd_top2_10),
                num(s.min_top2_10),
                num(s.max_top2_10),
                s.n_meeting.to_string(),
                opt(s.meeting_ratio_mean),
                opt(s.meeting_ratio_sd),
                opt(s.band_count_ratio),
                num(s.r_spi_1_top9),
                num(s.r_spi_1_top10),
                opt(s.r_spi_1_top11),
                s.n_spi_lt1.to_string(),
                opt(s.spi_lt1_mean),
                opt(s.spi_lt1_sd),
                opt(s.spi_lt1_band),
            ]);
        }
    }
    t
}

// meeting attendance and the three SPI = 1 variants
fn table1(report: &Report) -> Table {
    let mut t = Table::new(
        "table1",
        &[
            "group",
            "year",
            "n",
            "S_meeting/S_top10_mean",
            "S_meeting/S_top10_sd",
            "band_count_ratio",
            "R_SPI=1(top9)",
            "R_SPI=1(top10)",
            "R_SPI=1(top11)",
        ],
    );
    for g in &report.groups {
        for s in g.years.iter().filter(|s| s.n_meeting > 0) {
            t.rows.push(vec![
                g.label.clone(),
                s.year.to_string(),
                s.n_meeting.to_string(),
                opt(s.meeting_ratio_mean),
                opt(s.meeting_ratio_sd),
                opt(s.band_count_ratio),
                num(s.r_spi_1_top9),
                num(s.r_spi_1_top10),
                opt(s.r_spi_1_top11),
            ]);
        }
    }
    t
}

// wide layout: one ratio column and one count column per group
fn table2(report: &Report) -> Table {
    let labels: Vec<String> = GroupKey::ALL.iter().map(GroupKey::label).collect();
    let mut header = vec!["year".to_string()];
    for l in &labels {
        header.push(format!("{l}_ratio"));
        header.push(format!("{l}_n"));
    }
    let mut years: Vec<i32> = report
        .groups
        .iter()
        .flat_map(|g| g.years.iter().map(|s| s.year))
        .collect();
    years.sort_unstable();
    years.dedup();
    let mut t = Table {
        name: "table2",
        header,
        rows: Vec::new(),
    };
    for year in years {
        let mut row = vec![year.to_string()];
        for key in GroupKey::ALL {
            let s = report
                .group(key)
                .and_then(|g| g.years.iter().find(|s| s.year == year));
            match s {
                Some(s) => {
                    row.push(num(s.r_spi_1));
                    row.push(s.n_spi.to_string());
                }
                None => row.extend([String::new(), String::new()]),
            }
        }
        t.rows.push(row);
    }
    t
}

fn table3(report: &Report) -> Table {
    let mut t = Table::new(
        "table3",
        &["group", "year", "n", "mean", "sd", "band_ratio"],
    );
    for g in &report.groups {
        for s in &g.years {
            t.rows.push(vec![
                g.label.clone(),
                s.year.to_string(),
                s.n_spi_lt1.to_string(),
                opt(s.spi_lt1_mean),
                opt(s.spi_lt1_sd),
                opt(s.spi_lt1_band),
            ]);
        }
    }
    t
}

// share-rate descriptives, one block per group
fn table_a(report: &Report) -> Table {
    let mut t = Table::new(
        "tableA",
        &[
            "group",
            "year",
            "n",
            "top1_mean",
            "top1_sd",
            "top1_min",
            "top1_max",
            "top2_10_mean",
            "top2_10_sd",
            "top2_10_min",
            "top2_10_max",
        ],
    );
    for g in &report.groups {
        for s in &g.years {
            t.rows.push(vec![
                g.label.clone(),
                s.year.to_string(),
                s.n_sample.to_string(),
                num(s.m_top1),
                opt(s.sd_top1),
                num(s.min_top1),
                num(s.max_top1),
                num(s.m_top2_10),
                opt(s.sd_top2_10),
                num(s.min_top2_10),
                num(s.max_top2_10),
            ]);
        }
    }
    t
}

fn table_a5(report: &Report) -> Table {
    let mut t = Table::new(
        "tableA5",
        &["group", "series", "macro", "n", "r", "p_value", "note"],
    );
    for c in &report.correlations {
        t.rows.push(vec![
            c.group.clone(),
            c.series.clone(),
            c.macro_name.clone(),
            c.n.to_string(),
            opt(c.result.map(|r| r.r)),
            opt(c.result.map(|r| r.p_value)),
            c.note.clone().unwrap_or_default(),
        ]);
    }
    t
}

fn named_series(g: &GroupReport) -> [(&'static str, &SeriesReport); 3] {
    [
        ("r_spi_1", &g.r_spi_1),
        ("m_top1", &g.m_top1),
        ("m_top2_10", &g.m_top2_10),
    ]
}

fn fits_table(report: &Report) -> Table {
    let mut t = Table::new(
        "fits",
        &[
            "group", "series", "window_start", "window_end", "n", "a0", "a1", "b1", "T", "sse",
            "r2", "max", "min", "degenerate", "note",
        ],
    );
    for g in &report.groups {
        for (name, s) in named_series(g) {
            let f = s.fit;
            t.rows.push(vec![
                g.label.clone(),
                name.to_string(),
                g.fit_window.map(|w| w.0.to_string()).unwrap_or_default(),
                g.fit_window.map(|w| w.1.to_string()).unwrap_or_default(),
                s.points.len().to_string(),
                opt(f.map(|f| f.a0)),
                opt(f.map(|f| f.a1)),
                opt(f.map(|f| f.b1)),
                opt(f.and_then(|f| f.period)),
                opt(f.map(|f| f.sse)),
                opt(f.map(|f| f.r_squared)),
                opt(s.max),
                opt(s.min),
                opt_bool(f.map(|f| f.degenerate)),
                s.note.clone().unwrap_or_default(),
            ]);
        }
    }
    t
}

fn diagnostics_table(report: &Report) -> Table {
    let mut t = Table::new(
        "diagnostics",
        &[
            "group",
            "period_ratio",
            "period_ratio_expected",
            "period_ratio_tolerance",
            "period_ratio_within",
            "phase_difference",
            "phase_difference_expected",
            "phase_tolerance",
            "phase_within",
            "phase_period_ratio",
            "hypothesis_period",
            "r_spi_1_period_gap",
        ],
    );
    for g in &report.groups {
        let d = &g.diagnostics;
        t.rows.push(vec![
            g.label.clone(),
            opt(d.period_ratio),
            num(d.period_ratio_expected),
            num(d.period_ratio_tolerance),
            opt_bool(d.period_ratio_within),
            opt(d.phase_difference),
            num(d.phase_difference_expected),
            num(d.phase_tolerance),
            opt_bool(d.phase_within),
            opt(d.phase_period_ratio),
            num(d.hypothesis_period),
            opt(d.r_spi_1_period_gap),
        ]);
    }
    t
}

fn plot_tables(report: &Report) -> Vec<(String, Vec<Vec<String>>)> {
    let mut out = Vec::new();
    for g in &report.groups {
        for (name, s) in named_series(g) {
            if s.fit.is_none() {
                continue;
            }
            let rows = s
                .points
                .iter()
                .map(|p| vec![num(p.t), p.year.to_string(), num(p.observed), opt(p.fitted)])
                .collect();
            out.push((format!("plot_{}_{name}", g.label), rows));
        }
    }
    out
}

/// Writes the report. `dest` is a file for JSON and a directory (created if
/// needed) for the CSV formats. Returns the paths written.
pub fn emit_report(
    report: &Report,
    format: ReportFormat,
    dest: &Path,
) -> Result<Vec<PathBuf>, PipelineError> {
    match format {
        ReportFormat::Json => {
            fs::write(dest, report_json(report)?)?;
            Ok(vec![dest.to_path_buf()])
        }
        ReportFormat::CsvTables => {
            fs::create_dir_all(dest)?;
            [
                years_table(report),
                table1(report),
                table2(report),
                table3(report),
                table_a(report),
                table_a5(report),
                fits_table(report),
                diagnostics_table(report),
            ]
            .iter()
            .map(|t| t.write(dest))
            .collect()
        }
        ReportFormat::PlotData => {
            fs::create_dir_all(dest)?;
            let mut paths = Vec::new();
            for (name, rows) in plot_tables(report) {
                let path = dest.join(format!("{name}.csv"));
                let mut w = csv::Writer::from_path(&path).map_err(csv_error)?;
                w.write_record(["t", "year", "observed", "fitted"]).map_err(csv_error)?;
                for row in rows {
                    w.write_record(&row).map_err(csv_error)?;
                }
                w.flush()?;
                paths.push(path);
            }
            Ok(paths)
        }
    }
}
