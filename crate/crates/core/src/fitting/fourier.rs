use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::FitError;
use crate::evolution::WaveParams;
use crate::par::{self, Execution};

/// Smallest series a first-order Fourier fit accepts.
pub const MIN_FOURIER_POINTS: usize = 4;

/// Spacing of the coarse period grid, in years.
pub const DEFAULT_GRID_STEP: f64 = 0.05;

/// Fits whose amplitude falls below this are reported as degenerate.
pub const DEGENERATE_AMPLITUDE: f64 = 1e-9;

const DEFAULT_MIN_PERIOD: f64 = 4.0;
const GOLDEN_ITERATIONS: usize = 90;

/// `(t, y)` pairs with strictly increasing `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    t: Vec<f64>,
    y: Vec<f64>,
}

impl TimeSeries {
    pub fn new(t: Vec<f64>, y: Vec<f64>) -> Result<Self, FitError> {
        if t.len() != y.len() {
            return Err(FitError::LengthMismatch(t.len(), y.len()));
        }
        for (i, v) in y.iter().enumerate() {
            if !v.is_finite() {
                return Err(FitError::NonFinite(i));
            }
        }
        for i in 0..t.len() {
            if !t[i].is_finite() || (i > 0 && t[i] <= t[i - 1]) {
                return Err(FitError::UnorderedTime(i));
            }
        }
        Ok(Self { t, y })
    }

    /// Points at `t = 0, 1, 2, ...`.
    pub fn yearly(y: Vec<f64>) -> Result<Self, FitError> {
        let t = (0..y.len()).map(|i| i as f64).collect();
        Self::new(t, y)
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn span(&self) -> f64 {
        match (self.t.first(), self.t.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    /// Same values with every time shifted by `offset`.
    pub fn shifted(&self, offset: f64) -> Result<Self, FitError> {
        Self::new(self.t.iter().map(|t| t + offset).collect(), self.y.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Inclusive period search interval; `None` means `[4, 2 × span]`.
    pub period_range: Option<(f64, f64)>,
    pub grid_step: f64,
    pub execution: Execution,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            period_range: None,
            grid_step: DEFAULT_GRID_STEP,
            execution: Execution::default(),
        }
    }
}

/// Best first-order Fourier fit of a series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierFit {
    pub a0: f64,
    pub a1: f64,
    pub b1: f64,
    /// `None` when the fit is degenerate.
    #[serde(rename = "T")]
    pub period: Option<f64>,
    pub sse: f64,
    pub rmse: f64,
    #[serde(rename = "r2")]
    pub r_squared: f64,
    pub degenerate: bool,
    pub n: usize,
}

impl FourierFit {
    pub fn amplitude(&self) -> f64 {
        self.a1.hypot(self.b1)
    }

    pub fn wave(&self) -> Option<WaveParams> {
        self.period.map(|period| WaveParams {
            a0: self.a0,
            a1: self.a1,
            b1: self.b1,
            period,
        })
    }

    /// Angle of `(a1, b1)` in `(-π, π]`.
    pub fn phase(&self) -> f64 {
        self.b1.atan2(self.a1)
    }

    pub fn predict(&self, t: f64) -> f64 {
        match self.wave() {
            Some(w) => w.eval(t),
            None => self.a0,
        }
    }
}

/// Coefficients `(a0, a1, b1)` and sse for a fixed period.
pub fn solve_fixed_period(series: &TimeSeries, period: f64) -> ([f64; 3], f64) {
    let w = std::f64::consts::TAU / period;
    let mut ata = Matrix3::<f64>::zeros();
    let mut aty = Vector3::<f64>::zeros();
    for (&t, &y) in series.t.iter().zip(&series.y) {
        let row = Vector3::new(1.0, (w * t).cos(), (w * t).sin());
        ata += row * row.transpose();
        aty += row * y;
    }
    let coef = match ata.cholesky() {
        Some(chol) => chol.solve(&aty),
        None => ata
            .svd(true, true)
            .solve(&aty, 1e-14)
            .unwrap_or_else(|_| Vector3::zeros()),
    };
    let sse = series
        .t
        .iter()
        .zip(&series.y)
        .map(|(&t, &y)| {
            let r = y - coef[0] - coef[1] * (w * t).cos() - coef[2] * (w * t).sin();
            r * r
        })
        .sum();
    ([coef[0], coef[1], coef[2]], sse)
}

/// [`fit_fourier1_with`] using default options and an explicit range.
pub fn fit_fourier1(series: &TimeSeries, period_range: Option<(f64, f64)>) -> Result<FourierFit, FitError> {
    fit_fourier1_with(
        series,
        &FitOptions {
            period_range,
            ..FitOptions::default()
        },
    )
}

/// Least-squares fit of `a0 + a1 cos(2πt/T) + b1 sin(2πt/T)`.
///
/// For each candidate `T` the coefficients come from a linear solve; `T`
/// itself is chosen on a regular grid and then refined by golden-section
/// search between the grid neighbours of the best cell. Equal sse values
/// resolve to the smaller period, so parallel and sequential runs agree.
pub fn fit_fourier1_with(series: &TimeSeries, opts: &FitOptions) -> Result<FourierFit, FitError> {
    let n = series.len();
    if n < MIN_FOURIER_POINTS {
        return Err(FitError::TooFewPoints {
            needed: MIN_FOURIER_POINTS,
            got: n,
        });
    }
    if !(opts.grid_step.is_finite() && opts.grid_step > 0.0) {
        return Err(FitError::BadGridStep(opts.grid_step));
    }
    let (lo, hi) = opts
        .period_range
        .unwrap_or((DEFAULT_MIN_PERIOD, 2.0 * series.span()));
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi >= lo) {
        return Err(FitError::EmptyPeriodRange(lo, hi));
    }

    let mean = series.y.iter().sum::<f64>() / n as f64;
    let sst: f64 = series.y.iter().map(|y| (y - mean).powi(2)).sum();
    if series.y.iter().all(|&y| y == series.y[0]) {
        return Ok(degenerate(series.y[0], 0.0, 0.0, n));
    }

    let cells = ((hi - lo) / opts.grid_step + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=cells).map(|k| lo + k as f64 * opts.grid_step).collect();
    if *grid.last().expect("grid has lo") < hi {
        grid.push(hi);
    }
    let sse_on_grid = par::map(&grid, opts.execution, |&p| solve_fixed_period(series, p).1);

    let mut best = 0;
    for (k, &s) in sse_on_grid.iter().enumerate() {
        if s < sse_on_grid[best] {
            best = k;
        }
    }
    let left = grid[best.saturating_sub(1)];
    let right = grid[(best + 1).min(grid.len() - 1)];
    let mut period = grid[best];
    let (mut coef, mut sse) = solve_fixed_period(series, period);
    if right > left {
        let refined = golden_section(left, right, |p| solve_fixed_period(series, p).1);
        let (c, s) = solve_fixed_period(series, refined);
        if s < sse {
            period = refined;
            coef = c;
            sse = s;
        }
    }

    if coef[1].hypot(coef[2]) < DEGENERATE_AMPLITUDE {
        return Ok(degenerate(coef[0], sse, sst, n));
    }
    Ok(FourierFit {
        a0: coef[0],
        a1: coef[1],
        b1: coef[2],
        period: Some(period),
        sse,
        rmse: (sse / n as f64).sqrt(),
        r_squared: r_squared(sse, sst),
        degenerate: false,
        n,
    })
}

fn r_squared(sse: f64, sst: f64) -> f64 {
    if sst > 0.0 {
        1.0 - sse / sst
    } else {
        1.0
    }
}

fn degenerate(a0: f64, sse: f64, sst: f64, n: usize) -> FourierFit {
    FourierFit {
        a0,
        a1: 0.0,
        b1: 0.0,
        period: None,
        sse,
        rmse: (sse / n as f64).sqrt(),
        r_squared: r_squared(sse, sst),
        degenerate: true,
        n,
    }
}

fn golden_section(mut a: f64, mut b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..GOLDEN_ITERATIONS {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        if b - a <= 1e-13 * b.abs().max(1.0) {
            break;
        }
    }
    if fc <= fd {
        c
    } else {
        d
    }
}

/// `(a0 + amplitude, a0 - amplitude)` of a non-degenerate fit.
pub fn fourier_extrema(fit: &FourierFit) -> Result<(f64, f64), FitError> {
    if fit.degenerate {
        return Err(FitError::Degenerate);
    }
    let amp = fit.amplitude();
    Ok((fit.a0 + amp, fit.a0 - amp))
}
