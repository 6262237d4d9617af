use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::dataset::{FirmYearRecord, GroupKey};
use crate::fitting::{fit_normal, NormalFit};
use crate::par::{self, Execution};
use crate::power_index::{make_game, spi_dp_player, WeightedVotingGame};

/// Which players sit in each firm's voting game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpiMode {
    /// The nine largest holders.
    Top9,
    /// Every disclosed holder (at most ten).
    #[default]
    Top10,
    /// The disclosed holders plus `max(meeting_share - top10, 0)` as an
    /// eleventh voter.
    Top11,
}

impl SpiMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SpiMode::Top9 => "top9",
            SpiMode::Top10 => "top10",
            SpiMode::Top11 => "top11",
        }
    }
}

impl std::str::FromStr for SpiMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "top9" => Ok(SpiMode::Top9),
            "top10" => Ok(SpiMode::Top10),
            "top11" => Ok(SpiMode::Top11),
            other => Err(format!("unknown spi mode {other:?} (expected top9, top10 or top11)")),
        }
    }
}

/// Where the top-1 SPI values behind `r_spi_1` and `spi_lt1` came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpiSource {
    /// Computed from each firm's voting game.
    Computed,
    /// Supplied draws from a control-power density.
    Planted,
}

/// Aggregates for one group-year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearStats {
    pub group: GroupKey,
    pub year: i32,
    pub n_sample: usize,
    pub spi_source: SpiSource,
    /// Number of top-1 SPI values behind `r_spi_1`.
    pub n_spi: usize,
    /// Share of firms whose top holder has SPI exactly 1.
    pub r_spi_1: f64,
    pub m_top1: f64,
    pub sd_top1: Option<f64>,
    pub min_top1: f64,
    pub max_top1: f64,
    pub m_top2_10: f64,
    pub sd_top2_10: Option<f64>,
    pub min_top2_10: f64,
    pub max_top2_10: f64,
    /// Firms with a recorded meeting share.
    pub n_meeting: usize,
    pub meeting_ratio_mean: Option<f64>,
    pub meeting_ratio_sd: Option<f64>,
    /// Share of those firms whose ratio lies within one sd of the mean.
    pub band_count_ratio: Option<f64>,
    pub r_spi_1_top9: f64,
    pub r_spi_1_top10: f64,
    /// Only when every firm in the year has a meeting share.
    pub r_spi_1_top11: Option<f64>,
    /// Firms whose top holder has SPI below 1.
    pub n_spi_lt1: usize,
    pub spi_lt1_mean: Option<f64>,
    pub spi_lt1_sd: Option<f64>,
    pub spi_lt1_band: Option<f64>,
}

#[derive(Clone, Copy)]
struct FirmSpi {
    exact_one: bool,
    value: f64,
}

fn top1_spi(game: &WeightedVotingGame) -> FirmSpi {
    let (num, den) = spi_dp_player(game, 0);
    FirmSpi {
        exact_one: num == den,
        value: num as f64 / den as f64,
    }
}

fn firm_game(r: &FirmYearRecord, mode: SpiMode) -> Result<WeightedVotingGame, PipelineError> {
    let shares = r.shares();
    let game = match mode {
        SpiMode::Top9 => make_game(&shares[..shares.len().min(9)]),
        SpiMode::Top10 => make_game(shares),
        SpiMode::Top11 => {
            let meeting = r.meeting_share.ok_or_else(|| PipelineError::MissingMeetingShare {
                firm_id: r.firm_id.clone(),
                year: r.year,
            })?;
            make_game(shares).and_then(|g| g.extend_with_residual(meeting - r.top10()))
        }
    };
    game.map_err(|e| PipelineError::Game {
        firm_id: r.firm_id.clone(),
        year: r.year,
        message: e.to_string(),
    })
}

fn ratio_of_ones(spi: &[FirmSpi]) -> f64 {
    spi.iter().filter(|s| s.exact_one).count() as f64 / spi.len() as f64
}

fn summary(xs: &[f64]) -> (f64, Option<f64>, f64, f64) {
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let sd = fit_normal(xs).ok().map(|f| f.sigma);
    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (mean, sd, min, max)
}

/// Per-year aggregates of records that all share one group and year.
///
/// Returns `Ok(None)` for an empty slice. Under [`SpiMode::Top11`] every
/// record needs a meeting share.
pub fn year_stats(
    records: &[FirmYearRecord],
    mode: SpiMode,
) -> Result<Option<YearStats>, PipelineError> {
    let refs: Vec<&FirmYearRecord> = records.iter().collect();
    year_stats_with(&refs, mode, None, Execution::default())
}

/// As [`year_stats`], optionally taking the top-1 SPI values from `planted`
/// instead of the voting games.
pub fn year_stats_with(
    records: &[&FirmYearRecord],
    mode: SpiMode,
    planted: Option<&[f64]>,
    exec: Execution,
) -> Result<Option<YearStats>, PipelineError> {
    let Some(first) = records.first() else {
        return Ok(None);
    };
    let (group, year) = (first.group(), first.year);
    if let Some(r) = records.iter().find(|r| r.group() != group || r.year != year) {
        return Err(PipelineError::MixedGroupYear {
            expected: format!("{group} {year}"),
            found: format!("{} {}", r.group(), r.year),
        });
    }

    let all_have_meeting = records.iter().all(|r| r.meeting_share.is_some());
    let per_firm = par::map(records, exec, |r| -> Result<_, PipelineError> {
        let top9 = top1_spi(&firm_game(r, SpiMode::Top9)?);
        let top10 = top1_spi(&firm_game(r, SpiMode::Top10)?);
        let top11 = if all_have_meeting || mode == SpiMode::Top11 {
            Some(top1_spi(&firm_game(r, SpiMode::Top11)?))
        } else {
            None
        };
        Ok((top9, top10, top11))
    });
    let mut top9 = Vec::with_capacity(records.len());
    let mut top10 = Vec::with_capacity(records.len());
    let mut top11 = Vec::with_capacity(records.len());
    for firm in per_firm {
        let (a, b, c) = firm?;
        top9.push(a);
        top10.push(b);
        top11.extend(c);
    }

    let chosen: Vec<FirmSpi> = match (planted, mode) {
        (Some(draws), _) => draws
            .iter()
            .map(|&v| FirmSpi {
                exact_one: v == 1.0,
                value: v,
            })
            .collect(),
        (None, SpiMode::Top9) => top9.clone(),
        (None, SpiMode::Top10) => top10.clone(),
        (None, SpiMode::Top11) => top11.clone(),
    };
    let lt1: Vec<f64> = chosen
        .iter()
        .filter(|s| !s.exact_one)
        .map(|s| s.value)
        .collect();
    let lt1_fit: Option<NormalFit> = fit_normal(&lt1).ok();

    let t1: Vec<f64> = records.iter().map(|r| r.top1()).collect();
    let t2: Vec<f64> = records.iter().map(|r| r.top2_10()).collect();
    let (m_top1, sd_top1, min_top1, max_top1) = summary(&t1);
    let (m_top2_10, sd_top2_10, min_top2_10, max_top2_10) = summary(&t2);

    let ratios: Vec<f64> = records.iter().filter_map(|r| r.meeting_ratio()).collect();
    let meeting_fit = fit_normal(&ratios).ok();

    Ok(Some(YearStats {
        group,
        year,
        n_sample: records.len(),
        spi_source: if planted.is_some() {
            SpiSource::Planted
        } else {
            SpiSource::Computed
        },
        n_spi: chosen.len(),
        r_spi_1: if chosen.is_empty() {
            0.0
        } else {
            ratio_of_ones(&chosen)
        },
        m_top1,
        sd_top1,
        min_top1,
        max_top1,
        m_top2_10,
        sd_top2_10,
        min_top2_10,
        max_top2_10,
        n_meeting: ratios.len(),
        meeting_ratio_mean: meeting_fit.map(|f| f.mu),
        meeting_ratio_sd: meeting_fit.map(|f| f.sigma),
        band_count_ratio: meeting_fit.map(|f| f.band_ratio),
        r_spi_1_top9: ratio_of_ones(&top9),
        r_spi_1_top10: ratio_of_ones(&top10),
        r_spi_1_top11: (all_have_meeting).then(|| ratio_of_ones(&top11)),
        n_spi_lt1: lt1.len(),
        spi_lt1_mean: lt1_fit.map(|f| f.mu).or_else(|| lt1.first().copied()),
        spi_lt1_sd: lt1_fit.map(|f| f.sigma),
        spi_lt1_band: lt1_fit.map(|f| f.band_ratio),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn firm(id: &str, shares: &[f64], meeting: Option<f64>) -> FirmYearRecord {
        FirmYearRecord::new(id, 2020, GroupKey::CONTROL, shares.to_vec(), meeting, None).unwrap()
    }

    #[test]
    fn dictator_firm() {
        let s = year_stats(&[firm("a", &[0.40, 0.10, 0.10], None)], SpiMode::Top10)
            .unwrap()
            .unwrap();
        assert_eq!(s.r_spi_1, 1.0);
        assert_eq!(s.n_spi_lt1, 0);
        assert_eq!(s.spi_lt1_mean, None);
        assert_eq!(s.r_spi_1_top11, None);
    }

    #[test]
    fn symmetric_firm() {
        let s = year_stats(&[firm("a", &[0.2, 0.2, 0.2], None)], SpiMode::Top10)
            .unwrap()
            .unwrap();
        assert_eq!(s.r_spi_1, 0.0);
        assert!((s.spi_lt1_mean.unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn empty_year_is_absent() {
        assert_eq!(year_stats(&[], SpiMode::Top10).unwrap(), None);
    }

    #[test]
    fn top9_drops_the_tenth_holder() {
        // 0.3 vs 0.29 among nine others: the tenth holder decides the majority
        let shares: [f64; 10] = [0.3, 0.05, 0.05, 0.05, 0.05, 0.05, 0.02, 0.01, 0.005, 0.015];
        let mut sorted = shares.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let s = year_stats(&[firm("a", &sorted, None)], SpiMode::Top10)
            .unwrap()
            .unwrap();
        assert_eq!(s.r_spi_1_top10, 0.0);
        assert_eq!(s.r_spi_1_top9, 1.0);
    }

    #[test]
    fn top11_needs_meeting_share() {
        let recs = [firm("a", &[0.3, 0.2], None)];
        assert!(matches!(
            year_stats(&recs, SpiMode::Top11),
            Err(PipelineError::MissingMeetingShare { .. })
        ));
    }

    #[test]
    fn zero_residual_keeps_ratio() {
        let recs = [
            firm("a", &[0.3, 0.2], Some(0.5)),
            firm("b", &[0.3, 0.1], Some(0.3)),
            firm("c", &[0.2, 0.2, 0.1], Some(0.4)),
        ];
        let s = year_stats(&recs, SpiMode::Top11).unwrap().unwrap();
        assert_eq!(s.r_spi_1_top11, Some(s.r_spi_1_top10));
        assert_eq!(s.r_spi_1, s.r_spi_1_top10);
        assert_eq!(s.n_meeting, 3);
    }

    #[test]
    fn residual_voter_can_remove_dictatorship() {
        let recs = [firm("a", &[0.3, 0.1], Some(0.7))];
        let s = year_stats(&recs, SpiMode::Top11).unwrap().unwrap();
        assert_eq!(s.r_spi_1_top10, 1.0);
        assert_eq!(s.r_spi_1, 0.0);
    }

    #[test]
    fn mixed_years_rejected() {
        let mut b = firm("b", &[0.3], None);
        b.year = 2021;
        assert!(year_stats(&[firm("a", &[0.3], None), b], SpiMode::Top10).is_err());
    }

    #[test]
    fn planted_values_drive_ratio() {
        let recs = [firm("a", &[0.2, 0.2], None), firm("b", &[0.2, 0.2], None)];
        let refs: Vec<&FirmYearRecord> = recs.iter().collect();
        let s = year_stats_with(&refs, SpiMode::Top10, Some(&[1.0, 0.4, 0.6, 1.0]), Execution::Sequential)
            .unwrap()
            .unwrap();
        assert_eq!(s.spi_source, SpiSource::Planted);
        assert_eq!(s.n_spi, 4);
        assert_eq!(s.r_spi_1, 0.5);
        assert_eq!(s.spi_lt1_mean, Some(0.5));
        assert_eq!(s.r_spi_1_top10, 0.0);
    }
}
