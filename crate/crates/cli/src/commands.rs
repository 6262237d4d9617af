use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use ctrlpower::dataset::{
    emit_csv, ingest_path, read_macro_series, synth_outcomes, FirmYearRecord, GroupKey,
    OutcomeDraws, SynthConfig,
};
use ctrlpower::evolution::{
    collapse_walk, fib_iterate, hypothesis_wave, pdf_sample, ratio_sequence, state_to_f64,
    wave_equation_residual_with, ControlPowerPdf, InterruptionLaw, WaveParams, REPORTED_WAVE,
};
use ctrlpower::fitting::{fit_fourier1_with, fourier_extrema, FitOptions, TimeSeries};
use ctrlpower::pipeline::{
    emit_report, report_json, run_pipeline, MacroSeries, PipelineConfig, PipelineInput,
    ReportFormat, SpiMode,
};
use ctrlpower::power_index::{
    make_game, spi_dp, spi_permutation_oracle, spi_subset, PowerProfile, WeightedVotingGame,
};
use ctrlpower::Execution;
use serde_json::json;

use crate::output::{io_error, parse_range, short, sink};
use crate::{
    CliError, Command, EvolveArgs, EvolveCommand, FitArgs, PipelineArgs, Preset, SpiArgs,
    SpiMethod, SynthArgs,
};

type Result<T> = std::result::Result<T, CliError>;

fn data<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Data(e.to_string())
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Spi(a) => spi(a),
        Command::Evolve(a) => evolve(a),
        Command::Fit(a) => fit(a),
        Command::Synth(a) => synth(a),
        Command::Pipeline(a) => pipeline(a),
    }
}

fn profile(game: &WeightedVotingGame, method: SpiMethod) -> Result<PowerProfile> {
    match method {
        SpiMethod::Dp => Ok(spi_dp(game)),
        SpiMethod::Subset => Ok(spi_subset(game)),
        SpiMethod::Oracle => spi_permutation_oracle(game).map_err(data),
    }
}

/// Loads a registry, reporting skipped rows on stderr unless `strict`.
fn load_registry(path: &Path, strict: bool) -> Result<Vec<FirmYearRecord>> {
    let ingested = ingest_path(path).map_err(|e| data(format!("{}: {e}", path.display())))?;
    if let Some(first) = ingested.rejected.first() {
        if strict {
            return Err(data(format!(
                "{}: line {}: {}",
                path.display(),
                first.line,
                first.message
            )));
        }
        for d in &ingested.rejected {
            eprintln!("warning: {}: line {} skipped: {}", path.display(), d.line, d.message);
        }
    }
    Ok(ingested.records)
}

fn registry_game(r: &FirmYearRecord, mode: SpiMode) -> Result<WeightedVotingGame> {
    let shares = r.shares();
    let game = match mode {
        SpiMode::Top9 => make_game(&shares[..shares.len().min(9)]),
        SpiMode::Top10 => make_game(shares),
        SpiMode::Top11 => {
            let meeting = r.meeting_share.ok_or_else(|| {
                data(format!("{} ({}): top11 mode needs meeting_share", r.firm_id, r.year))
            })?;
            make_game(shares).and_then(|g| g.extend_with_residual(meeting - r.top10()))
        }
    };
    game.map_err(|e| data(format!("{} ({}): {e}", r.firm_id, r.year)))
}

fn spi(a: SpiArgs) -> Result<()> {
    let mut out = sink(a.output.as_deref())?;
    if let Some(path) = &a.input {
        let mode: SpiMode = a.spi_mode.parse().map_err(usage)?;
        let records = load_registry(path, a.strict)?;
        writeln!(out, "firm_id,year,player,share,spi").map_err(io_error)?;
        for r in &records {
            let game = registry_game(r, mode)?;
            let p = profile(&game, a.method)?;
            for (i, (w, v)) in game.weights().iter().zip(p.values()).enumerate() {
                writeln!(out, "{},{},{},{},{}", r.firm_id, r.year, i + 1, w, short(v))
                    .map_err(io_error)?;
            }
        }
        return out.flush().map_err(io_error);
    }

    let shares = a
        .shares
        .ok_or_else(|| usage("give either --shares or --input"))?;
    let mut game = make_game(&shares).map_err(data)?;
    if let Some(res) = a.residual {
        game = game.extend_with_residual(res).map_err(data)?;
    }
    let p = profile(&game, a.method)?;
    match a.format.as_str() {
        "text" => {
            let line: Vec<String> = p.values().into_iter().map(short).collect();
            writeln!(out, "{}", line.join(", ")).map_err(io_error)?;
        }
        "json" => {
            let exact: Vec<String> = (0..p.players())
                .map(|i| {
                    let (n, d) = p.exact(i);
                    let g = gcd(n, d).max(1);
                    format!("{}/{}", n / g, d / g)
                })
                .collect();
            let doc = json!({
                "weights": game.weights(),
                "quota": game.quota(),
                "spi": p.values(),
                "exact": exact,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).map_err(data)?)
                .map_err(io_error)?;
        }
        other => return Err(usage(format!("unknown format {other:?} (expected text or json)"))),
    }
    out.flush().map_err(io_error)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn parse_law(s: &str) -> Result<InterruptionLaw> {
    let bad = || usage(format!("law {s:?}: expected uniform, fixed:L or weighted:w1,w2,w3,w4"));
    match s.split_once(':') {
        None if s == "uniform" => Ok(InterruptionLaw::Uniform),
        Some(("fixed", l)) => Ok(InterruptionLaw::Fixed(l.parse().map_err(|_| bad())?)),
        Some(("weighted", ws)) => {
            let w: Vec<f64> = ws
                .split(',')
                .map(|x| x.trim().parse())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad())?;
            let w: [f64; 4] = w.try_into().map_err(|_| bad())?;
            Ok(InterruptionLaw::Weighted(w))
        }
        _ => Err(bad()),
    }
}

fn wave_from(params: Option<Vec<f64>>) -> Result<WaveParams> {
    match params {
        None => Ok(REPORTED_WAVE),
        Some(p) if p.len() == 4 => WaveParams::new(p[0], p[1], p[2], p[3]).map_err(data),
        Some(_) => Err(usage("--params takes exactly four values: a0,a1,b1,T")),
    }
}

fn evolve(a: EvolveArgs) -> Result<()> {
    let mut out = sink(a.output.as_deref())?;
    let mut rows: Vec<(String, String)> = Vec::new();
    let header = match a.what {
        EvolveCommand::Ratios { k, exact } => {
            for (i, s) in ratio_sequence(k).map_err(data)?.into_iter().enumerate() {
                let v = if exact { s.to_string() } else { short(state_to_f64(s)) };
                rows.push(((i + 1).to_string(), v));
            }
            "step,value"
        }
        EvolveCommand::Fib { n } => {
            let f = fib_iterate(n).map_err(data)?;
            rows.push(("leading".into(), f.leading.to_string()));
            rows.push(("trailing".into(), f.trailing.to_string()));
            "component,value"
        }
        EvolveCommand::Walk {
            ops,
            seed,
            law,
            exact,
        } => {
            let walk = collapse_walk(seed, ops, &parse_law(&law)?).map_err(data)?;
            for (i, &s) in walk.states.iter().enumerate() {
                let v = if exact { s.to_string() } else { short(state_to_f64(s)) };
                rows.push((i.to_string(), v));
            }
            "step,value"
        }
        EvolveCommand::Wave {
            params,
            hypothesis,
            h,
            from,
            to,
            step,
        } => {
            let w = if hypothesis {
                hypothesis_wave(h).map_err(data)?.params
            } else {
                wave_from(params)?
            };
            if !(step > 0.0 && to >= from) {
                return Err(usage("need --step > 0 and --to >= --from"));
            }
            let n = ((to - from) / step + 1e-9).floor() as usize;
            for i in 0..=n {
                let t = from + i as f64 * step;
                rows.push((short(t), short(w.eval(t))));
            }
            "t,value"
        }
        EvolveCommand::Residual {
            params,
            h,
            period_l,
            points,
        } => {
            let w = wave_from(params)?;
            let pl = period_l.unwrap_or(w.period / h);
            for i in 0..points.max(1) {
                let t = w.period * i as f64 / points.max(1) as f64;
                let r = wave_equation_residual_with(&w, pl, h, t).map_err(data)?;
                rows.push((short(t), format!("{r:e}")));
            }
            "t,value"
        }
        EvolveCommand::Sample { t, n, seed } => {
            for (i, v) in pdf_sample(&ControlPowerPdf::reported(), t, seed, n)
                .into_iter()
                .enumerate()
            {
                rows.push((i.to_string(), short(v)));
            }
            "draw,value"
        }
    };
    writeln!(out, "{header}").map_err(io_error)?;
    for (k, v) in rows {
        writeln!(out, "{k},{v}").map_err(io_error)?;
    }
    out.flush().map_err(io_error)
}

fn read_series(path: &Path) -> Result<TimeSeries> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| data(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| data(format!("{}: empty file", path.display())))?
        .split(',')
        .map(str::trim)
        .collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| data(format!("{}: missing column {name}", path.display())))
    };
    let (ti, yi) = (col("t")?, col("y")?);
    let (mut t, mut y) = (Vec::new(), Vec::new());
    for (k, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let parse = |i: usize| -> Result<f64> {
            cells
                .get(i)
                .and_then(|c| c.parse().ok())
                .ok_or_else(|| data(format!("{}: line {}: bad number", path.display(), k + 2)))
        };
        t.push(parse(ti)?);
        y.push(parse(yi)?);
    }
    TimeSeries::new(t, y).map_err(|e| data(format!("{}: {e}", path.display())))
}

fn checked_range(s: Option<&str>) -> Result<Option<(f64, f64)>> {
    let Some(s) = s else { return Ok(None) };
    let (lo, hi) = parse_range(s)?;
    if !(lo > 0.0 && hi >= lo) {
        return Err(usage(format!("period range {s:?} needs 0 < lo <= hi")));
    }
    Ok(Some((lo, hi)))
}

fn fit(a: FitArgs) -> Result<()> {
    let series = read_series(&a.input)?;
    let opts = FitOptions {
        period_range: checked_range(a.period_range.as_deref())?,
        grid_step: a.grid_step,
        execution: Execution::default(),
    };
    let f = fit_fourier1_with(&series, &opts).map_err(data)?;
    let (max, min) = match fourier_extrema(&f) {
        Ok((hi, lo)) => (Some(hi), Some(lo)),
        Err(_) => (None, None),
    };
    let doc = json!({
        "a0": f.a0, "a1": f.a1, "b1": f.b1, "T": f.period,
        "sse": f.sse, "r2": f.r_squared, "max": max, "min": min,
        "degenerate": f.degenerate,
    });
    let mut out = sink(a.output.as_deref())?;
    writeln!(out, "{}", serde_json::to_string_pretty(&doc).map_err(data)?).map_err(io_error)?;
    out.flush().map_err(io_error)
}

fn preset_config(preset: Preset, seed: u64, h: f64) -> Result<SynthConfig> {
    match preset {
        Preset::Default => Ok(SynthConfig::calibrated(seed)),
        Preset::Hypothesis => SynthConfig::hypothesis(seed, h).map_err(data),
        Preset::Oscillation => Ok(SynthConfig::oscillation(seed)),
    }
}

fn write_outcomes(draws: &OutcomeDraws, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| data(format!("{}: {e}", path.display())))?;
    let mut w = std::io::BufWriter::new(f);
    writeln!(w, "group,year,spi").map_err(io_error)?;
    for ((group, year), values) in draws {
        for v in values {
            writeln!(w, "{group},{year},{v}").map_err(io_error)?;
        }
    }
    w.flush().map_err(io_error)
}

fn read_outcomes(path: &Path) -> Result<OutcomeDraws> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| data(format!("{}: {e}", path.display())))?;
    let mut draws = OutcomeDraws::new();
    for (k, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |what: &str| data(format!("{}: line {}: {what}", path.display(), k + 1));
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let [g, y, v] = cells[..] else {
            return Err(bad("expected group,year,spi"));
        };
        let group: GroupKey = g.parse().map_err(|e: String| bad(&e))?;
        let year: i32 = y.parse().map_err(|_| bad("bad year"))?;
        let value: f64 = v.parse().map_err(|_| bad("bad spi"))?;
        if !(value > 0.0 && value <= 1.0) {
            return Err(bad("spi must lie in (0, 1]"));
        }
        draws.entry((group, year)).or_default().push(value);
    }
    Ok(draws)
}

fn synth(a: SynthArgs) -> Result<()> {
    let cfg = preset_config(a.preset, a.seed, a.h)?;
    let input = PipelineInput::from_synth(&cfg, Execution::default()).map_err(data)?;
    let mut out = sink(a.output.as_deref())?;
    emit_csv(&input.records, &mut out).map_err(data)?;
    out.flush().map_err(io_error)?;
    if let Some(path) = &a.outcomes {
        write_outcomes(&synth_outcomes(&cfg).map_err(data)?, path)?;
    }
    Ok(())
}

fn pipeline(a: PipelineArgs) -> Result<()> {
    let format: ReportFormat = a.format.parse().map_err(usage)?;
    let spi_mode: SpiMode = a.spi_mode.parse().map_err(usage)?;
    if format != ReportFormat::Json && a.output.is_none() {
        return Err(usage("csv-tables and plot-data need --output <dir>"));
    }
    let config = PipelineConfig {
        min_sample: a.min_sample,
        spi_mode,
        period_range: checked_range(a.period_range.as_deref())?,
        grid_step: a.grid_step,
        h: a.h,
    };

    let mut input = match (&a.input, a.synth) {
        (Some(path), _) => {
            let mut input = PipelineInput::from_records(load_registry(path, a.strict)?);
            input.seed = a.seed;
            if let Some(o) = &a.outcomes {
                input.outcomes = read_outcomes(o)?;
            }
            input
        }
        (None, Some(preset)) => {
            let seed = a.seed.ok_or_else(|| usage("--synth needs --seed"))?;
            PipelineInput::from_synth(&preset_config(preset, seed, a.h)?, Execution::default())
                .map_err(data)?
        }
        (None, None) => return Err(usage("give either --input or --synth")),
    };

    let mut seen = BTreeMap::new();
    for spec in &a.macros {
        let (name, path) = spec
            .split_once('=')
            .ok_or_else(|| usage(format!("--macro {spec:?} must look like name=path")))?;
        if seen.insert(name.to_string(), ()).is_some() {
            return Err(usage(format!("macro series {name:?} given twice")));
        }
        let f = File::open(path).map_err(|e| data(format!("{path}: {e}")))?;
        let points = read_macro_series(f).map_err(|e| data(format!("{path}: {e}")))?;
        input.macro_series.push(MacroSeries {
            name: name.to_string(),
            points,
        });
    }

    let report = run_pipeline(&input, &config).map_err(data)?;
    match (format, &a.output) {
        (ReportFormat::Json, None) => {
            let mut out = sink(None)?;
            out.write_all(report_json(&report).map_err(data)?.as_bytes())
                .map_err(io_error)?;
            out.flush().map_err(io_error)
        }
        (_, Some(dest)) => emit_report(&report, format, dest).map(|_| ()).map_err(data),
        (_, None) => unreachable!("checked above"),
    }
}
