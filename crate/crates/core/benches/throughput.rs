use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use ctrlpower::dataset::SynthConfig;
use ctrlpower::evolution::REPORTED_WAVE;
use ctrlpower::fitting::{fit_fourier1_with, FitOptions, TimeSeries};
use ctrlpower::par;
use ctrlpower::pipeline::{run_pipeline_with, PipelineConfig, PipelineInput};
use ctrlpower::power_index::{make_game, spi_dp};
use ctrlpower::Execution;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn batch_spi(c: &mut Criterion) {
    let input = PipelineInput::from_synth(&SynthConfig::calibrated(1), Execution::Parallel)
        .expect("synthetic registry");
    let games: Vec<Vec<f64>> = input
        .records
        .iter()
        .take(5000)
        .map(|r| r.shares().to_vec())
        .collect();
    let mut group = c.benchmark_group("batch_spi");
    group.sample_size(20);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, games.len()), &games, |b, games| {
            b.iter(|| {
                par::map(games, exec, |w| {
                    spi_dp(&make_game(w).expect("valid game")).value(0)
                })
            })
        });
    }
    group.finish();
}

fn fourier_grid(c: &mut Criterion) {
    let t: Vec<f64> = (0..26).map(f64::from).collect();
    let y: Vec<f64> = t.iter().map(|&x| REPORTED_WAVE.eval(x)).collect();
    let series = TimeSeries::new(t, y).expect("series");
    let mut group = c.benchmark_group("fourier_grid");
    for (name, exec) in MODES {
        let opts = FitOptions {
            grid_step: 0.005,
            execution: exec,
            ..FitOptions::default()
        };
        group.bench_function(name, |b| {
            b.iter(|| fit_fourier1_with(black_box(&series), &opts).expect("fit"))
        });
    }
    group.finish();
}

fn pipeline(c: &mut Criterion) {
    let config = PipelineConfig::default();
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(10);
    for (name, exec) in MODES {
        let input = PipelineInput::from_synth(&SynthConfig::calibrated(2), exec).expect("input");
        group.bench_function(name, |b| {
            b.iter(|| run_pipeline_with(black_box(&input), &config, exec).expect("report"))
        });
    }
    group.finish();
}

criterion_group!(benches, batch_spi, fourier_grid, pipeline);
criterion_main!(benches);
