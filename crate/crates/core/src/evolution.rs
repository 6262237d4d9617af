//! Dynamics of the top shareholder's chance of holding full control.
//!
//! The chance climbs the ladder of consecutive Fibonacci ratios
//! `1/2, 2/3, 3/5, 5/8, 8/13, ...` one operation at a time, is knocked back to
//! `1/2` at random, and over many operations behaves like a harmonic wave
//! between `1/2` and `2/3` with a period of twelve operations. With `h` years
//! per operation the wave lives on calendar time `t = h * l`.

use std::f64::consts::{PI, TAU};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use thiserror::Error;

/// A probability state on the Fibonacci ladder.
pub type LadderState = Ratio<u64>;

/// Largest supported exponent for [`fib_iterate`].
pub const FIB_MAX_N: u32 = 90;

/// Years per evolution operation used for yearly registry data.
pub const DEFAULT_H: f64 = 1.5;

/// Operations in one full oscillation (lcm of the run lengths 1..=4).
pub const OPERATIONS_PER_PERIOD: u32 = 12;

/// Wave fitted to the private-owned main-board `R_{SPI=1}` series over
/// 1996-2021 with `t = 0` at the first sample year.
pub const REPORTED_WAVE: WaveParams = WaveParams {
    a0: 0.553,
    a1: 0.060,
    b1: -0.083,
    period: 17.357,
};

/// Period of [`REPORTED_WAVE`] when expressed in operations.
pub const REPORTED_OPERATION_PERIOD: f64 = 11.571;

/// Mean and standard deviation of the top-1 SPI among firms without full
/// control (private-owned main board, 1993-2021 average).
pub const REPORTED_SPI_MEAN: f64 = 0.466;
pub const REPORTED_SPI_SD: f64 = 0.165;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolutionError {
    #[error("fibonacci exponent {0} is beyond the supported range (max {FIB_MAX_N})")]
    FibOutOfRange(u32),
    #[error("a ratio sequence needs at least one state")]
    EmptySequence,
    #[error("a collapse walk needs at least one operation")]
    NoOperations,
    #[error("invalid interruption law: {0}")]
    InvalidLaw(String),
    #[error("years per operation must be positive and finite, got {0}")]
    InvalidH(f64),
    #[error("invalid wave parameters: {0}")]
    InvalidWave(String),
    #[error("invalid density: {0}")]
    InvalidPdf(String),
    #[error("control power {0} lies outside (0, 1]")]
    SpiOutOfRange(f64),
}

/// `(F_{n+2}, F_{n+1})`: the iteration matrix `[[1,1],[1,0]]` raised to `n`
/// and applied to `(1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FibVector {
    pub leading: u64,
    pub trailing: u64,
}

impl FibVector {
    /// Probability state carried by this vector: `trailing / leading`.
    pub fn ratio(&self) -> LadderState {
        Ratio::new(self.trailing, self.leading)
    }
}

type Mat2 = [[u128; 2]; 2];

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

pub fn fib_iterate(n: u32) -> Result<FibVector, EvolutionError> {
    if n > FIB_MAX_N {
        return Err(EvolutionError::FibOutOfRange(n));
    }
    let mut result: Mat2 = [[1, 0], [0, 1]];
    let mut base: Mat2 = [[1, 1], [1, 0]];
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result = mat_mul(&result, &base);
        }
        e >>= 1;
        if e > 0 {
            base = mat_mul(&base, &base);
        }
    }
    let leading = result[0][0] + result[0][1];
    let trailing = result[1][0] + result[1][1];
    Ok(FibVector {
        leading: leading as u64,
        trailing: trailing as u64,
    })
}

/// The first `k` states of the ladder, exactly.
pub fn ratio_sequence(k: usize) -> Result<Vec<LadderState>, EvolutionError> {
    if k == 0 {
        return Err(EvolutionError::EmptySequence);
    }
    (1..=k as u32)
        .map(|n| fib_iterate(n).map(|v| v.ratio()))
        .collect()
}

/// `(sqrt(5) - 1) / 2`, the limit of the ladder.
pub fn golden_limit() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

pub fn state_to_f64(state: LadderState) -> f64 {
    *state.numer() as f64 / *state.denom() as f64
}

/// How many operations an episode climbs before it collapses back to `1/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InterruptionLaw {
    /// Run lengths 1, 2, 3, 4 equally likely.
    Uniform,
    /// Relative weights of run lengths 1..=4.
    Weighted([f64; 4]),
    /// Every episode has the same run length.
    Fixed(u8),
}

impl Default for InterruptionLaw {
    fn default() -> Self {
        InterruptionLaw::Uniform
    }
}

impl InterruptionLaw {
    fn validate(&self) -> Result<(), EvolutionError> {
        match self {
            InterruptionLaw::Uniform => Ok(()),
            InterruptionLaw::Fixed(l) if (1..=4).contains(l) => Ok(()),
            InterruptionLaw::Fixed(l) => Err(EvolutionError::InvalidLaw(format!(
                "run length {l} is outside 1..=4"
            ))),
            InterruptionLaw::Weighted(w) => {
                if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
                    Err(EvolutionError::InvalidLaw(
                        "weights must be finite and non-negative".into(),
                    ))
                } else if w.iter().sum::<f64>() <= 0.0 {
                    Err(EvolutionError::InvalidLaw("weights sum to zero".into()))
                } else {
                    Ok(())
                }
            }
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> u8 {
        match self {
            InterruptionLaw::Uniform => rng.gen_range(1..=4),
            InterruptionLaw::Fixed(l) => *l,
            InterruptionLaw::Weighted(w) => {
                let total: f64 = w.iter().sum();
                let mut u = rng.gen::<f64>() * total;
                for (i, &wi) in w.iter().enumerate() {
                    if u < wi {
                        return i as u8 + 1;
                    }
                    u -= wi;
                }
                // u landed on the upper edge through rounding
                w.iter().rposition(|&x| x > 0.0).map_or(4, |i| i as u8 + 1)
            }
        }
    }
}

/// States visited by a collapse walk, episode after episode.
#[derive(Debug, Clone, PartialEq)]
pub struct CollapseWalk {
    /// Each episode contributes `1/2` followed by one state per climb.
    pub states: Vec<LadderState>,
    /// Run length drawn for each episode; the last one may have been cut
    /// short by the operation budget.
    pub run_lengths: Vec<u8>,
}

impl CollapseWalk {
    pub fn episodes(&self) -> usize {
        self.run_lengths.len()
    }

    pub fn mean_state(&self) -> f64 {
        self.states.iter().map(|&s| state_to_f64(s)).sum::<f64>() / self.states.len() as f64
    }
}

/// Climbs the ladder for `n_operations` operations in total, collapsing back
/// to `1/2` whenever the current episode's run length is used up.
pub fn collapse_walk(
    seed: u64,
    n_operations: usize,
    law: &InterruptionLaw,
) -> Result<CollapseWalk, EvolutionError> {
    if n_operations == 0 {
        return Err(EvolutionError::NoOperations);
    }
    law.validate()?;
    let ladder = ratio_sequence(5)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states = Vec::with_capacity(n_operations * 2);
    let mut run_lengths = Vec::new();
    let mut remaining = n_operations;
    while remaining > 0 {
        let run = law.draw(&mut rng);
        let climbs = (run as usize).min(remaining);
        states.extend_from_slice(&ladder[..=climbs]);
        run_lengths.push(run);
        remaining -= climbs;
    }
    Ok(CollapseWalk {
        states,
        run_lengths,
    })
}

/// Years per operation and operation count; `t = h * l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionClock {
    h: f64,
    l: u64,
}

impl EvolutionClock {
    pub fn new(h: f64, l: u64) -> Result<Self, EvolutionError> {
        check_h(h)?;
        Ok(Self { h, l })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn operations(&self) -> u64 {
        self.l
    }

    pub fn years(&self) -> f64 {
        self.h * self.l as f64
    }
}

fn check_h(h: f64) -> Result<(), EvolutionError> {
    if h.is_finite() && h > 0.0 {
        Ok(())
    } else {
        Err(EvolutionError::InvalidH(h))
    }
}

/// `a0 + a1 cos(2πt/T) + b1 sin(2πt/T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveParams {
    pub a0: f64,
    pub a1: f64,
    pub b1: f64,
    #[serde(rename = "T")]
    pub period: f64,
}

impl WaveParams {
    pub fn new(a0: f64, a1: f64, b1: f64, period: f64) -> Result<Self, EvolutionError> {
        if ![a0, a1, b1].iter().all(|x| x.is_finite()) {
            return Err(EvolutionError::InvalidWave("non-finite coefficient".into()));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(EvolutionError::InvalidWave(format!(
                "period must be positive, got {period}"
            )));
        }
        Ok(Self { a0, a1, b1, period })
    }

    pub fn amplitude(&self) -> f64 {
        self.a1.hypot(self.b1)
    }

    /// Angle of `(a1, b1)`: the wave is `a0 + amp cos(2πt/T - phase)`.
    pub fn phase(&self) -> f64 {
        self.b1.atan2(self.a1)
    }

    pub fn angular_frequency(&self) -> f64 {
        TAU / self.period
    }

    pub fn eval(&self, t: f64) -> f64 {
        let x = self.angular_frequency() * t;
        self.a0 + self.a1 * x.cos() + self.b1 * x.sin()
    }

    /// Closed-form `d²R/dt²`.
    pub fn second_derivative(&self, t: f64) -> f64 {
        let w = self.angular_frequency();
        let x = w * t;
        -w * w * (self.a1 * x.cos() + self.b1 * x.sin())
    }

    pub fn max(&self) -> f64 {
        self.a0 + self.amplitude()
    }

    pub fn min(&self) -> f64 {
        self.a0 - self.amplitude()
    }

    /// The same wave measured in operations instead of years.
    pub fn in_operations(&self, h: f64) -> Result<Self, EvolutionError> {
        check_h(h)?;
        Self::new(self.a0, self.a1, self.b1, self.period / h)
    }
}

pub fn wave_eval(params: &WaveParams, t: f64) -> f64 {
    params.eval(t)
}

/// The hypothesised wave of the full-control ratio, with its level and
/// amplitude kept as exact fractions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisWave {
    pub level: LadderState,
    pub amplitude: LadderState,
    pub params: WaveParams,
}

impl HypothesisWave {
    pub fn max_exact(&self) -> LadderState {
        self.level + self.amplitude
    }

    pub fn min_exact(&self) -> LadderState {
        self.level - self.amplitude
    }
}

/// Wave between `1/2` and `2/3` with period `12h`, starting at its mean on
/// the way up.
pub fn hypothesis_wave(h: f64) -> Result<HypothesisWave, EvolutionError> {
    check_h(h)?;
    let level = Ratio::new(7, 12);
    let amplitude = Ratio::new(1, 12);
    let params = WaveParams::new(
        state_to_f64(level),
        0.0,
        state_to_f64(amplitude),
        OPERATIONS_PER_PERIOD as f64 * h,
    )?;
    Ok(HypothesisWave {
        level,
        amplitude,
        params,
    })
}

/// `d²R/dt² - (1/h²) d²R/dl²` where the operation-time wave has period
/// `T / h`, so the residual vanishes up to rounding.
pub fn wave_equation_residual(params: &WaveParams, h: f64, t: f64) -> Result<f64, EvolutionError> {
    let period_l = params.in_operations(h)?.period;
    wave_equation_residual_with(params, period_l, h, t)
}

/// Same residual with an explicitly supplied operation-time period, as when
/// both periods were fitted or rounded independently.
pub fn wave_equation_residual_with(
    params: &WaveParams,
    period_l: f64,
    h: f64,
    t: f64,
) -> Result<f64, EvolutionError> {
    check_h(h)?;
    let in_ops = WaveParams::new(params.a0, params.a1, params.b1, period_l)?;
    let l = t / h;
    Ok(params.second_derivative(t) - in_ops.second_derivative(l) / (h * h))
}

/// Scale of `d²R/dt²`: `(2π/T)² · amplitude`.
pub fn curvature_scale(params: &WaveParams) -> f64 {
    params.angular_frequency().powi(2) * params.amplitude()
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Mixed density of the top-1 SPI at time `t`: an atom at `SPI = 1` whose
/// mass follows the wave, plus a normal branch restricted to `(0, 1)` and
/// renormalised so the two parts add up to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlPowerPdf {
    pub wave: WaveParams,
    pub mu: f64,
    pub sigma: f64,
}

impl ControlPowerPdf {
    pub fn new(wave: WaveParams, mu: f64, sigma: f64) -> Result<Self, EvolutionError> {
        if !(sigma.is_finite() && sigma > 0.0) || !mu.is_finite() {
            return Err(EvolutionError::InvalidPdf(format!(
                "normal branch needs finite mu and positive sigma (mu {mu}, sigma {sigma})"
            )));
        }
        if wave.min() < -1e-12 || wave.max() > 1.0 + 1e-12 {
            return Err(EvolutionError::InvalidPdf(format!(
                "atom mass ranges over [{}, {}], outside [0, 1]",
                wave.min(),
                wave.max()
            )));
        }
        Ok(Self { wave, mu, sigma })
    }

    /// The reported wave with the reported normal branch.
    pub fn reported() -> Self {
        Self {
            wave: REPORTED_WAVE,
            mu: REPORTED_SPI_MEAN,
            sigma: REPORTED_SPI_SD,
        }
    }

    /// Probability mass at `SPI = 1`.
    pub fn atom(&self, t: f64) -> f64 {
        self.wave.eval(t).clamp(0.0, 1.0)
    }

    /// Mass of the untruncated normal that falls inside `(0, 1)`.
    pub fn normal_mass_in_unit(&self) -> f64 {
        std_normal_cdf((1.0 - self.mu) / self.sigma) - std_normal_cdf(-self.mu / self.sigma)
    }

    /// Density of the continuous branch on `(0, 1)` at time `t`.
    pub fn continuous_density(&self, spi: f64, t: f64) -> f64 {
        let z = (spi - self.mu) / self.sigma;
        let phi = (-0.5 * z * z).exp() / (self.sigma * (TAU).sqrt());
        (1.0 - self.atom(t)) * phi / self.normal_mass_in_unit()
    }

    /// Mean of the normal branch after truncation to `(0, 1)`.
    pub fn truncated_mean(&self) -> f64 {
        let a = -self.mu / self.sigma;
        let b = (1.0 - self.mu) / self.sigma;
        let pdf = |z: f64| (-0.5 * z * z).exp() / (2.0 * PI).sqrt();
        self.mu + self.sigma * (pdf(a) - pdf(b)) / self.normal_mass_in_unit()
    }
}

/// Atom mass at `spi = 1`, continuous density on `(0, 1)`.
pub fn pdf_eval(pdf: &ControlPowerPdf, spi: f64, t: f64) -> Result<f64, EvolutionError> {
    if spi == 1.0 {
        Ok(pdf.atom(t))
    } else if spi > 0.0 && spi < 1.0 {
        Ok(pdf.continuous_density(spi, t))
    } else {
        Err(EvolutionError::SpiOutOfRange(spi))
    }
}

/// Seeded sampler for [`ControlPowerPdf`]. One owner per instance;
/// independent instances may run side by side.
pub struct PdfSampler {
    pdf: ControlPowerPdf,
    normal: Normal<f64>,
    rng: ChaCha8Rng,
}

impl PdfSampler {
    pub fn new(pdf: ControlPowerPdf, seed: u64) -> Self {
        let normal = Normal::new(pdf.mu, pdf.sigma).expect("sigma validated positive");
        Self {
            pdf,
            normal,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn draw(&mut self, t: f64) -> f64 {
        if self.rng.gen::<f64>() < self.pdf.atom(t) {
            return 1.0;
        }
        loop {
            let x = self.normal.sample(&mut self.rng);
            if x > 0.0 && x < 1.0 {
                return x;
            }
        }
    }
}

/// `n` draws at time `t`.
pub fn pdf_sample(pdf: &ControlPowerPdf, t: f64, seed: u64, n: usize) -> Vec<f64> {
    let mut sampler = PdfSampler::new(*pdf, seed);
    (0..n).map(|_| sampler.draw(t)).collect()
}

/// Opposite oscillations of the top shareholder's share rate and effort.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillationModel {
    pub share_amplitude: f64,
    pub effort_amplitude: f64,
    pub period: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillationPoint {
    /// `A cos(2πt/T + π)`
    pub share: f64,
    /// `B cos(2πt/T)`
    pub effort: f64,
    /// `(AB/2) [cos(2πt/(T/2) + π) - 1]`, the product of the two
    pub others: f64,
}

impl OscillationModel {
    pub fn new(share_amplitude: f64, effort_amplitude: f64, period: f64) -> Result<Self, EvolutionError> {
        for (name, v) in [
            ("share amplitude", share_amplitude),
            ("effort amplitude", effort_amplitude),
            ("period", period),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(EvolutionError::InvalidWave(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(Self {
            share_amplitude,
            effort_amplitude,
            period,
        })
    }

    pub fn at(&self, t: f64) -> OscillationPoint {
        let x = TAU * t / self.period;
        let half = self.share_amplitude * self.effort_amplitude / 2.0;
        OscillationPoint {
            share: self.share_amplitude * (x + PI).cos(),
            effort: self.effort_amplitude * x.cos(),
            others: half * ((TAU * t / (self.period / 2.0) + PI).cos() - 1.0),
        }
    }
}

pub fn oscillation_curves(model: &OscillationModel, t: f64) -> OscillationPoint {
    model.at(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: u64, d: u64) -> LadderState {
        Ratio::new(n, d)
    }

    #[test]
    fn fib_small_powers() {
        let v = |n| fib_iterate(n).unwrap();
        assert_eq!(v(0), FibVector { leading: 1, trailing: 1 });
        assert_eq!(v(1), FibVector { leading: 2, trailing: 1 });
        assert_eq!(v(4), FibVector { leading: 8, trailing: 5 });
    }

    #[test]
    fn fib_recurrence_over_whole_range() {
        for n in 0..FIB_MAX_N {
            let a = fib_iterate(n).unwrap();
            let b = fib_iterate(n + 1).unwrap();
            assert_eq!(b.leading, a.leading + a.trailing);
            assert_eq!(b.trailing, a.leading);
        }
        assert_eq!(fib_iterate(91), Err(EvolutionError::FibOutOfRange(91)));
        // F(92)
        assert_eq!(fib_iterate(90).unwrap().leading, 7_540_113_804_746_346_429);
    }

    #[test]
    fn ladder_prefix() {
        assert_eq!(
            ratio_sequence(5).unwrap(),
            vec![r(1, 2), r(2, 3), r(3, 5), r(5, 8), r(8, 13)]
        );
        let last = state_to_f64(r(8, 13)) / 0.618;
        assert!((0.994..=0.996).contains(&last));
        assert_eq!(ratio_sequence(0), Err(EvolutionError::EmptySequence));
    }

    #[test]
    fn ladder_converges_monotonically() {
        let seq = ratio_sequence(30).unwrap();
        let err: Vec<f64> = seq
            .iter()
            .map(|&s| (state_to_f64(s) - golden_limit()).abs())
            .collect();
        assert!(err.windows(2).all(|w| w[1] < w[0]));
        assert!(err[24] < 1e-9);
    }

    #[test]
    fn fixed_episodes() {
        let w = collapse_walk(1, 8, &InterruptionLaw::Fixed(4)).unwrap();
        assert_eq!(&w.states[..5], &ratio_sequence(5).unwrap()[..]);
        assert_eq!(w.states[5], r(1, 2));
        let w = collapse_walk(1, 2, &InterruptionLaw::Fixed(1)).unwrap();
        assert_eq!(w.states, vec![r(1, 2), r(2, 3), r(1, 2), r(2, 3)]);
    }

    #[test]
    fn uniform_walk_stays_on_ladder() {
        let ladder = ratio_sequence(5).unwrap();
        let w = collapse_walk(42, 10_000, &InterruptionLaw::Uniform).unwrap();
        assert!(w.states.iter().all(|s| ladder.contains(s)));
        assert_eq!(w, collapse_walk(42, 10_000, &InterruptionLaw::Uniform).unwrap());
    }

    #[test]
    fn long_run_mean_between_half_and_two_thirds() {
        let w = collapse_walk(7, 250_000, &InterruptionLaw::Uniform).unwrap();
        assert!(w.episodes() >= 100_000);
        let m = w.mean_state();
        assert!((0.5..=2.0 / 3.0).contains(&m), "mean {m}");
    }

    #[test]
    fn bad_laws() {
        assert!(collapse_walk(0, 5, &InterruptionLaw::Fixed(0)).is_err());
        assert!(collapse_walk(0, 5, &InterruptionLaw::Fixed(5)).is_err());
        assert!(collapse_walk(0, 5, &InterruptionLaw::Weighted([0.0; 4])).is_err());
        assert!(collapse_walk(0, 5, &InterruptionLaw::Weighted([1.0, -1.0, 0.0, 0.0])).is_err());
        assert_eq!(
            collapse_walk(0, 0, &InterruptionLaw::Uniform),
            Err(EvolutionError::NoOperations)
        );
    }

    #[test]
    fn weighted_law_respects_zero_weights() {
        let law = InterruptionLaw::Weighted([0.0, 1.0, 0.0, 0.0]);
        let w = collapse_walk(3, 100, &law).unwrap();
        assert!(w.run_lengths.iter().all(|&l| l == 2));
    }

    #[test]
    fn hypothesis_wave_extrema() {
        let hw = hypothesis_wave(1.5).unwrap();
        assert_eq!(hw.params.period, 18.0);
        assert_eq!(hw.max_exact(), r(2, 3));
        assert_eq!(hw.min_exact(), r(1, 2));
        assert_eq!(hypothesis_wave(1.0).unwrap().params.period, 12.0);
        assert!(hypothesis_wave(0.0).is_err());
        assert!(hypothesis_wave(-1.0).is_err());
        // starts at the mean, rising
        assert!((hw.params.eval(0.0) - 7.0 / 12.0).abs() < 1e-15);
        assert!(hw.params.eval(0.1) > hw.params.eval(0.0));
    }

    #[test]
    fn reported_wave_values() {
        assert!((wave_eval(&REPORTED_WAVE, 0.0) - 0.613).abs() < 1e-12);
        let expected_max = 0.553 + (0.060f64.powi(2) + 0.083f64.powi(2)).sqrt();
        assert!((REPORTED_WAVE.max() - expected_max).abs() < 1e-15);
        for t in [0.0, 3.3, 11.0, 40.2] {
            let a = REPORTED_WAVE.eval(t);
            let b = REPORTED_WAVE.eval(t + REPORTED_WAVE.period);
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn consistent_operation_period_has_no_residual() {
        for t in [0.0, 1.0, 5.5, 17.0] {
            let res = wave_equation_residual(&REPORTED_WAVE, 1.5, t).unwrap();
            assert!(res.abs() < 1e-15, "{res}");
        }
    }

    #[test]
    fn residual_matches_finite_differences() {
        let p = REPORTED_WAVE;
        let h = 1.5;
        let step = 1e-3;
        let in_ops = WaveParams::new(p.a0, p.a1, p.b1, REPORTED_OPERATION_PERIOD).unwrap();
        for t in [0.5, 4.0, 9.0, 13.7] {
            let l = t / h;
            let d2t = (p.eval(t + step) - 2.0 * p.eval(t) + p.eval(t - step)) / (step * step);
            let d2l = (in_ops.eval(l + step) - 2.0 * in_ops.eval(l) + in_ops.eval(l - step))
                / (step * step);
            let fd = d2t - d2l / (h * h);
            let analytic = wave_equation_residual_with(&p, REPORTED_OPERATION_PERIOD, h, t).unwrap();
            assert!((fd - analytic).abs() < 1e-4);
        }
    }

    #[test]
    fn density_at_atom_and_peak() {
        let pdf = ControlPowerPdf::reported();
        assert!((pdf_eval(&pdf, 1.0, 0.0).unwrap() - 0.613).abs() < 1e-12);
        let at = |x| pdf_eval(&pdf, x, 0.0).unwrap();
        assert!(at(0.466) > at(0.465) && at(0.466) > at(0.467));
        assert!(pdf_eval(&pdf, 0.0, 0.0).is_err());
        assert!(pdf_eval(&pdf, 1.01, 0.0).is_err());
        assert!((pdf.normal_mass_in_unit() - 0.9967).abs() < 1e-3);
    }

    #[test]
    fn density_rejects_out_of_range_atom() {
        let wave = WaveParams::new(0.9, 0.2, 0.0, 10.0).unwrap();
        assert!(ControlPowerPdf::new(wave, 0.5, 0.1).is_err());
        assert!(ControlPowerPdf::new(REPORTED_WAVE, 0.5, 0.0).is_err());
    }

    #[test]
    fn degenerate_atom_samples() {
        let wave = WaveParams::new(1.0, 0.0, 0.0, 10.0).unwrap();
        let pdf = ControlPowerPdf::new(wave, 0.466, 0.165).unwrap();
        assert!(pdf_sample(&pdf, 3.0, 9, 1000).iter().all(|&x| x == 1.0));
    }

    #[test]
    fn sampler_is_seeded() {
        let pdf = ControlPowerPdf::reported();
        assert_eq!(pdf_sample(&pdf, 2.0, 5, 100), pdf_sample(&pdf, 2.0, 5, 100));
        assert_ne!(pdf_sample(&pdf, 2.0, 5, 100), pdf_sample(&pdf, 2.0, 6, 100));
    }

    #[test]
    fn oscillation_period_halves() {
        let m = OscillationModel::new(0.05, 0.8, 18.0).unwrap();
        for i in 0..50 {
            let t = i as f64 * 0.37;
            let p = m.at(t);
            let q = m.at(t + 9.0);
            assert!((p.others - q.others).abs() < 1e-12);
            assert!((p.share * p.effort - p.others).abs() < 1e-12);
            assert!(p.others <= 1e-15);
        }
        assert!(m.at(9.0 / 2.0).others.abs() < 1e-15);
        assert!(OscillationModel::new(0.0, 1.0, 1.0).is_err());
    }
}
