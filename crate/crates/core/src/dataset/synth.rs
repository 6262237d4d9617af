use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use super::calibration;
use super::{DatasetError, FirmYearRecord, GroupKey};
use crate::evolution::{
    hypothesis_wave, pdf_sample, ControlPowerPdf, EvolutionError, OscillationModel, WaveParams,
    REPORTED_SPI_MEAN, REPORTED_SPI_SD,
};
use crate::par::{self, Execution};

/// Synthetic shares are rounded to this many units per whole.
const SHARE_GRID: f64 = 1e6;
/// Headroom kept below a total of 1 so rounding cannot push a sum over.
const SUM_HEADROOM: f64 = 1e-5;

/// Firms per year in the single-group presets.
pub const PRESET_FIRMS: usize = 500;

/// Share-rate cycle of the oscillation preset, in years.
pub const OSCILLATION_PERIOD: f64 = 18.0;
const OSCILLATION_SHARE_AMPLITUDE: f64 = 0.03;
const OSCILLATION_EFFORT_AMPLITUDE: f64 = 2.0;
const OSCILLATION_TOP1_LEVEL: f64 = 0.28;
const OSCILLATION_TOP2_10_LEVEL: f64 = 0.32;
const OSCILLATION_SD: f64 = 0.03;
const OSCILLATION_FIRMS: usize = 4000;
const OSCILLATION_ATOM_LEVEL: f64 = 0.5;
const OSCILLATION_ATOM_AMPLITUDE: f64 = 0.3;

const REGISTRY_STREAM: u64 = 0x5245_4749;
const OUTCOME_STREAM: u64 = 0x4f55_5443;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub sd: f64,
}

impl Moments {
    pub const fn new(mean: f64, sd: f64) -> Self {
        Self { mean, sd }
    }
}

/// Where each year's target moments come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MomentSchedule {
    /// The group's published yearly moments; years without a row get no firms.
    Calibrated,
    Constant { top1: Moments, top2_10: Moments },
    /// Top-1 mean follows `level + A cos(2πt/T + π)` and the top-2..10 mean
    /// follows `level + (AB/2)[cos(2πt/(T/2) + π) - 1]`, `t` counted from
    /// the first configured year.
    Oscillating {
        model: OscillationModel,
        top1_level: f64,
        top2_10_level: f64,
        top1_sd: f64,
        top2_10_sd: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FirmCount {
    Fixed(usize),
    /// The published yearly sample size of the group.
    Calibrated,
}

/// How the top-2..10 total is divided among the nine holders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SplitLaw {
    /// Nine equal parts.
    Equal,
    /// Symmetric Dirichlet proportions, capped at the top-1 share.
    Dirichlet { alpha: f64 },
}

/// Ratio of the share present at meetings to the top-10 total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeetingLaw {
    pub ratio: Moments,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub key: GroupKey,
    pub firms: FirmCount,
    pub moments: MomentSchedule,
    /// When set, each firm-year also gets a top-1 SPI drawn from this density.
    pub outcome: Option<ControlPowerPdf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub first_year: i32,
    pub last_year: i32,
    pub groups: Vec<GroupSpec>,
    pub split: SplitLaw,
    pub meeting: Option<MeetingLaw>,
    /// Bounds applied to each drawn top-1 share.
    pub top1_clip: (f64, f64),
    pub seed: u64,
}

/// Planted top-1 SPI draws per group-year.
pub type OutcomeDraws = BTreeMap<(GroupKey, i32), Vec<f64>>;

impl SynthConfig {
    /// All four groups over 1996-2021 at their published moments and sample
    /// sizes, with meeting attendance around the observed 0.88 ratio.
    pub fn calibrated(seed: u64) -> Self {
        Self {
            first_year: 1996,
            last_year: 2021,
            groups: GroupKey::ALL
                .iter()
                .map(|&key| GroupSpec {
                    key,
                    firms: FirmCount::Calibrated,
                    moments: MomentSchedule::Calibrated,
                    outcome: None,
                })
                .collect(),
            split: SplitLaw::Equal,
            meeting: Some(MeetingLaw {
                ratio: Moments::new(0.88, 0.13),
            }),
            top1_clip: (0.02, 0.75),
            seed,
        }
    }

    /// The control group only, `firms` per year over 1996-2021.
    pub fn control_group(seed: u64, firms: usize, moments: MomentSchedule) -> Self {
        Self {
            first_year: 1996,
            last_year: 2021,
            groups: vec![GroupSpec {
                key: GroupKey::CONTROL,
                firms: FirmCount::Fixed(firms),
                moments,
                outcome: None,
            }],
            split: SplitLaw::Equal,
            meeting: None,
            top1_clip: (0.02, 0.75),
            seed,
        }
    }

    /// The control group at its published moments, with top-1 SPI drawn
    /// from a density whose atom follows the hypothesis wave for `h`.
    pub fn hypothesis(seed: u64, h: f64) -> Result<Self, DatasetError> {
        let wave = hypothesis_wave(h).map_err(config_error)?.params;
        let pdf = ControlPowerPdf::new(wave, REPORTED_SPI_MEAN, REPORTED_SPI_SD)
            .map_err(config_error)?;
        let mut cfg = Self::control_group(seed, PRESET_FIRMS, MomentSchedule::Calibrated);
        cfg.groups[0].outcome = Some(pdf);
        Ok(cfg)
    }

    /// The control group with share means following the oscillation model
    /// over an 18-year cycle. The atom of the planted SPI density peaks at
    /// `t = 0` with half that period, when the top-2..10 mean bottoms out.
    pub fn oscillation(seed: u64) -> Self {
        let model = OscillationModel::new(
            OSCILLATION_SHARE_AMPLITUDE,
            OSCILLATION_EFFORT_AMPLITUDE,
            OSCILLATION_PERIOD,
        )
        .expect("positive constants");
        let atom = WaveParams::new(
            OSCILLATION_ATOM_LEVEL,
            OSCILLATION_ATOM_AMPLITUDE,
            0.0,
            OSCILLATION_PERIOD / 2.0,
        )
        .expect("positive period");
        let mut cfg = Self::control_group(
            seed,
            OSCILLATION_FIRMS,
            MomentSchedule::Oscillating {
                model,
                top1_level: OSCILLATION_TOP1_LEVEL,
                top2_10_level: OSCILLATION_TOP2_10_LEVEL,
                top1_sd: OSCILLATION_SD,
                top2_10_sd: OSCILLATION_SD,
            },
        );
        cfg.groups[0].outcome = Some(
            ControlPowerPdf::new(atom, REPORTED_SPI_MEAN, REPORTED_SPI_SD).expect("atom in [0, 1]"),
        );
        cfg
    }

    pub fn years(&self) -> impl Iterator<Item = i32> {
        self.first_year..=self.last_year
    }

    fn validate(&self) -> Result<(), DatasetError> {
        let bad = |m: String| Err(DatasetError::Config(m));
        if self.first_year > self.last_year {
            return bad(format!(
                "first year {} after last year {}",
                self.first_year, self.last_year
            ));
        }
        let (lo, hi) = self.top1_clip;
        if !(lo > 0.0 && lo < hi && hi < 1.0) {
            return bad(format!("top-1 clip range ({lo}, {hi}) must lie inside (0, 1)"));
        }
        if let SplitLaw::Dirichlet { alpha } = self.split {
            if !(alpha.is_finite() && alpha > 0.0) {
                return bad(format!("dirichlet concentration must be positive, got {alpha}"));
            }
        }
        if let Some(m) = self.meeting {
            check_moments("meeting ratio", m.ratio, (0.0, f64::INFINITY))?;
        }
        for g in &self.groups {
            if let FirmCount::Fixed(0) = g.firms {
                return bad(format!("{}: firms per year must be at least 1", g.key));
            }
            for year in self.years() {
                if let Some((top1, top2)) = self.moments_for(g, year) {
                    check_moments(&format!("{} {year} top-1", g.key), top1, self.top1_clip)?;
                    check_moments(&format!("{} {year} top-2..10", g.key), top2, (0.0, 1.0))?;
                }
            }
        }
        Ok(())
    }

    fn moments_for(&self, g: &GroupSpec, year: i32) -> Option<(Moments, Moments)> {
        match &g.moments {
            MomentSchedule::Calibrated => calibration::lookup(g.key, year).map(|r| {
                (
                    Moments::new(r.top1_mean, r.top1_sd),
                    Moments::new(r.top2_10_mean, r.top2_10_sd),
                )
            }),
            MomentSchedule::Constant { top1, top2_10 } => Some((*top1, *top2_10)),
            MomentSchedule::Oscillating {
                model,
                top1_level,
                top2_10_level,
                top1_sd,
                top2_10_sd,
            } => {
                let p = model.at((year - self.first_year) as f64);
                Some((
                    Moments::new(top1_level + p.share, *top1_sd),
                    Moments::new(top2_10_level + p.others, *top2_10_sd),
                ))
            }
        }
    }

    fn firms_for(&self, g: &GroupSpec, year: i32) -> usize {
        if self.moments_for(g, year).is_none() {
            return 0;
        }
        match g.firms {
            FirmCount::Fixed(n) => n,
            FirmCount::Calibrated => calibration::lookup(g.key, year).map_or(0, |r| r.n_sample),
        }
    }

    fn jobs(&self) -> Vec<(usize, i32)> {
        (0..self.groups.len())
            .flat_map(|gi| self.years().map(move |y| (gi, y)))
            .collect()
    }
}

fn config_error(e: EvolutionError) -> DatasetError {
    DatasetError::Config(e.to_string())
}

fn check_moments(what: &str, m: Moments, (lo, hi): (f64, f64)) -> Result<(), DatasetError> {
    if !(m.sd.is_finite() && m.sd >= 0.0) {
        return Err(DatasetError::Config(format!("{what}: sd must be non-negative")));
    }
    if !(m.mean.is_finite() && m.mean >= lo && m.mean <= hi) {
        return Err(DatasetError::Config(format!(
            "{what}: mean {} is outside the feasible range [{lo}, {hi}]",
            m.mean
        )));
    }
    Ok(())
}

/// splitmix64 finaliser over the seed and a stream path.
fn stream_seed(seed: u64, path: &[u64]) -> u64 {
    let mut z = seed;
    for &p in path {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(p);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

fn draw_normal<R: Rng>(rng: &mut R, m: Moments) -> f64 {
    if m.sd == 0.0 {
        return m.mean;
    }
    Normal::new(m.mean, m.sd)
        .expect("sd validated")
        .sample(rng)
}

fn round_share(x: f64) -> f64 {
    (x * SHARE_GRID).round() / SHARE_GRID
}

// Splits `total` across nine holders, none above `cap`, largest first.
fn split_others<R: Rng>(rng: &mut R, law: SplitLaw, total: f64, cap: f64) -> Vec<f64> {
    let mut parts = match law {
        SplitLaw::Equal => vec![total / 9.0; 9],
        SplitLaw::Dirichlet { alpha } => {
            let gamma = Gamma::new(alpha, 1.0).expect("alpha validated");
            let g: Vec<f64> = (0..9).map(|_| gamma.sample(rng)).collect();
            let sum: f64 = g.iter().sum();
            if sum > 0.0 {
                g.iter().map(|x| total * x / sum).collect()
            } else {
                vec![total / 9.0; 9]
            }
        }
    };
    // water-fill: cap at the top-1 share and hand the excess to the rest
    loop {
        let excess: f64 = parts.iter().map(|p| (p - cap).max(0.0)).sum();
        if excess <= 0.0 {
            break;
        }
        let free: f64 = parts.iter().filter(|&&p| p < cap).sum();
        let n_free = parts.iter().filter(|&&p| p < cap).count();
        for p in parts.iter_mut() {
            if *p >= cap {
                *p = cap;
            } else if free > 0.0 {
                *p += excess * *p / free;
            } else {
                *p += excess / n_free as f64;
            }
        }
    }
    parts.sort_by(|a, b| b.total_cmp(a));
    parts
}

fn synth_group_year(config: &SynthConfig, gi: usize, year: i32) -> Vec<FirmYearRecord> {
    let g = &config.groups[gi];
    let n = config.firms_for(g, year);
    let Some((top1_m, top2_m)) = config.moments_for(g, year) else {
        return Vec::new();
    };
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(
        config.seed,
        &[REGISTRY_STREAM, gi as u64, year as u64],
    ));
    let (lo, hi) = config.top1_clip;
    (0..n)
        .map(|i| {
            let top1 = round_share(draw_normal(&mut rng, top1_m).clamp(lo, hi));
            let room = (1.0 - top1 - SUM_HEADROOM).min(9.0 * top1).max(0.0);
            let total = draw_normal(&mut rng, top2_m).clamp(0.0, room);
            let mut shares = vec![top1];
            shares.extend(
                split_others(&mut rng, config.split, total, top1)
                    .into_iter()
                    .map(|s| round_share(s).min(top1)),
            );
            let top10: f64 = shares.iter().sum();
            let (meeting_share, n_meetings) = match config.meeting {
                Some(law) => {
                    let ratio = draw_normal(&mut rng, law.ratio).max(0.0);
                    let m = round_share((ratio * top10).min(1.0));
                    (Some(m), Some(rng.gen_range(1..=4)))
                }
                None => (None, None),
            };
            FirmYearRecord::new(
                format!("{}-{year}-{i:05}", g.key),
                year,
                g.key,
                shares,
                meeting_share,
                n_meetings,
            )
            .expect("synthetic records satisfy the registry invariants")
        })
        .collect()
}

/// Draws a registry: per firm-year a top-1 share from the year's target
/// normal (clipped), a top-2..10 total likewise, split over nine holders.
/// Output is a pure function of the configuration and its seed, ordered by
/// group, then year, then firm.
pub fn synth_registry(config: &SynthConfig) -> Result<Vec<FirmYearRecord>, DatasetError> {
    synth_registry_with(config, Execution::default())
}

pub fn synth_registry_with(
    config: &SynthConfig,
    exec: Execution,
) -> Result<Vec<FirmYearRecord>, DatasetError> {
    config.validate()?;
    let jobs = config.jobs();
    let chunks = par::map(&jobs, exec, |&(gi, year)| synth_group_year(config, gi, year));
    Ok(chunks.into_iter().flatten().collect())
}

/// Planted top-1 SPI draws for every group that has an outcome density:
/// one draw per synthetic firm-year, at `t = year - first_year`.
pub fn synth_outcomes(config: &SynthConfig) -> Result<OutcomeDraws, DatasetError> {
    config.validate()?;
    let jobs: Vec<(usize, i32)> = config
        .jobs()
        .into_iter()
        .filter(|&(gi, _)| config.groups[gi].outcome.is_some())
        .collect();
    let draws = par::map(&jobs, Execution::default(), |&(gi, year)| {
        let g = &config.groups[gi];
        let pdf = g.outcome.expect("filtered above");
        let n = config.firms_for(g, year);
        let seed = stream_seed(config.seed, &[OUTCOME_STREAM, gi as u64, year as u64]);
        pdf_sample(&pdf, (year - config.first_year) as f64, seed, n)
    });
    Ok(jobs
        .into_iter()
        .zip(draws)
        .filter(|(_, d)| !d.is_empty())
        .map(|((gi, year), d)| ((config.groups[gi].key, year), d))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{emit_csv, group_records, ingest_csv_strict};
    use crate::evolution::{hypothesis_wave, WaveParams};

    fn mean_sd(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v.sqrt())
    }

    #[test]
    fn hits_calibrated_moments() {
        let mut cfg = SynthConfig::control_group(11, 1000, MomentSchedule::Calibrated);
        cfg.first_year = 2021;
        let recs = synth_registry(&cfg).unwrap();
        assert_eq!(recs.len(), 1000);
        let (m, s) = mean_sd(&recs.iter().map(|r| r.top1()).collect::<Vec<_>>());
        assert!((m - 0.278).abs() < 0.01, "mean {m}");
        assert!((s - 0.106).abs() < 0.01, "sd {s}");
    }

    #[test]
    fn zero_spread_gives_identical_firms() {
        let cfg = SynthConfig::control_group(
            3,
            20,
            MomentSchedule::Constant {
                top1: Moments::new(0.3, 0.0),
                top2_10: Moments::new(0.25, 0.0),
            },
        );
        let recs = synth_registry(&cfg).unwrap();
        assert!(recs.iter().all(|r| r.shares() == recs[0].shares()));
    }

    #[test]
    fn deterministic_and_parallel_invariant() {
        let cfg = SynthConfig::calibrated(99);
        let a = synth_registry_with(&cfg, Execution::Sequential).unwrap();
        let b = synth_registry_with(&cfg, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        let mut x = Vec::new();
        let mut y = Vec::new();
        emit_csv(&a, &mut x).unwrap();
        emit_csv(&synth_registry(&cfg).unwrap(), &mut y).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn output_passes_ingest_validation() {
        let mut cfg = SynthConfig::calibrated(5);
        cfg.split = SplitLaw::Dirichlet { alpha: 0.7 };
        let recs = synth_registry(&cfg).unwrap();
        let mut buf = Vec::new();
        emit_csv(&recs, &mut buf).unwrap();
        assert_eq!(ingest_csv_strict(buf.as_slice()).unwrap(), recs);
    }

    #[test]
    fn group_counts_follow_config() {
        let mut cfg = SynthConfig::calibrated(1);
        cfg.first_year = 2010;
        cfg.last_year = 2012;
        for g in &mut cfg.groups {
            g.firms = FirmCount::Fixed(17);
        }
        let groups = group_records(&synth_registry(&cfg).unwrap());
        for (_, recs) in groups {
            assert_eq!(recs.len(), 17 * 3);
        }
    }

    #[test]
    fn infeasible_targets_are_rejected() {
        let cfg = SynthConfig::control_group(
            1,
            5,
            MomentSchedule::Constant {
                top1: Moments::new(0.9, 0.1),
                top2_10: Moments::new(0.1, 0.1),
            },
        );
        assert!(matches!(synth_registry(&cfg), Err(DatasetError::Config(_))));
        let mut cfg = SynthConfig::calibrated(1);
        cfg.first_year = 2030;
        assert!(synth_registry(&cfg).is_err());
    }

    #[test]
    fn dirichlet_split_respects_cap() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..200 {
            let parts = split_others(&mut rng, SplitLaw::Dirichlet { alpha: 0.3 }, 0.6, 0.1);
            assert!(parts.iter().all(|&p| p <= 0.1 + 1e-15));
            assert!((parts.iter().sum::<f64>() - 0.6).abs() < 1e-12);
        }
    }

    #[test]
    fn outcome_extremes() {
        let mut cfg = SynthConfig::control_group(4, 50, MomentSchedule::Calibrated);
        let always = WaveParams::new(1.0, 0.0, 0.0, 10.0).unwrap();
        cfg.groups[0].outcome = Some(ControlPowerPdf::new(always, 0.466, 0.165).unwrap());
        let draws = synth_outcomes(&cfg).unwrap();
        assert_eq!(draws.len(), 26);
        assert!(draws.values().flatten().all(|&x| x == 1.0));

        let never = WaveParams::new(0.0, 0.0, 0.0, 10.0).unwrap();
        let pdf = ControlPowerPdf::new(never, 0.466, 0.165).unwrap();
        cfg.groups[0].outcome = Some(pdf);
        cfg.groups[0].firms = FirmCount::Fixed(4000);
        let draws = synth_outcomes(&cfg).unwrap();
        let one_year = &draws[&(GroupKey::CONTROL, 2000)];
        let (m, _) = mean_sd(one_year);
        assert!((m - pdf.truncated_mean()).abs() < 0.01);
        assert!((pdf.truncated_mean() - 0.466).abs() < 0.002);
    }

    #[test]
    fn hypothesis_outcomes_oscillate() {
        let mut cfg = SynthConfig::control_group(8, 500, MomentSchedule::Calibrated);
        let hw = hypothesis_wave(1.5).unwrap().params;
        cfg.groups[0].outcome = Some(ControlPowerPdf::new(hw, 0.466, 0.165).unwrap());
        let draws = synth_outcomes(&cfg).unwrap();
        let ratios: Vec<f64> = draws
            .values()
            .map(|d| d.iter().filter(|&&x| x == 1.0).count() as f64 / d.len() as f64)
            .collect();
        let hi = ratios.iter().cloned().fold(0.0, f64::max);
        let lo = ratios.iter().cloned().fold(1.0, f64::min);
        assert!((hi - 2.0 / 3.0).abs() < 0.06, "{hi}");
        assert!((lo - 0.5).abs() < 0.06, "{lo}");
    }
}
