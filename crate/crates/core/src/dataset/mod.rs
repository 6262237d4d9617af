//! Firm-year shareholder registries: validated records, the registry CSV
//! format, sample filtering, grouping and calibrated synthetic generators.

pub mod calibration;
mod csv_io;
mod synth;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use csv_io::{
    emit_csv, ingest_csv, ingest_csv_strict, ingest_path, read_macro_series, Ingested,
    RowDiagnostic, REGISTRY_HEADER,
};
pub use synth::{
    synth_outcomes, synth_registry, synth_registry_with, FirmCount, GroupSpec, MeetingLaw, MomentSchedule, Moments,
    OutcomeDraws, SplitLaw, SynthConfig, OSCILLATION_PERIOD, PRESET_FIRMS,
};

/// Most holders a record may list.
pub const MAX_HOLDERS: usize = 10;

/// Allowed excess of the summed shares over 1.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Out-of-order shares closer than this are re-sorted instead of rejected.
pub const ORDER_TOLERANCE: f64 = 1e-6;

/// Firms whose top holder owns at least this fraction are out of sample.
pub const MAJORITY_THRESHOLD: f64 = 0.5;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing required columns: {}", .0.join(", "))]
    MissingColumns(Vec<String>),
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("invalid record: {0}")]
    Record(#[from] RecordError),
    #[error("invalid synthetic configuration: {0}")]
    Config(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RecordError {
    #[error("no shareholders listed")]
    NoHolders,
    #[error("{0} holders listed, at most {MAX_HOLDERS} allowed")]
    TooManyHolders(usize),
    #[error("share {index} = {value} is outside [0, 1]")]
    ShareOutOfRange { index: usize, value: f64 },
    #[error("shares are not in descending order at position {index}")]
    Unordered { index: usize },
    #[error("shares sum to {0}, more than 1")]
    SumExceedsOne(f64),
    #[error("all listed shares are zero")]
    AllZero,
    #[error("meeting share {0} is outside [0, 1]")]
    MeetingShareOutOfRange(f64),
    #[error("firm id is empty")]
    EmptyFirmId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Board {
    Main,
    SmeGem,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ownership {
    Private,
    State,
}

impl Board {
    pub fn as_str(self) -> &'static str {
        match self {
            Board::Main => "main",
            Board::SmeGem => "sme_gem",
        }
    }
}

impl Ownership {
    pub fn as_str(self) -> &'static str {
        match self {
            Ownership::Private => "private",
            Ownership::State => "state",
        }
    }
}

impl FromStr for Board {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "main" => Ok(Board::Main),
            "sme_gem" => Ok(Board::SmeGem),
            other => Err(format!("unknown board {other:?} (expected main or sme_gem)")),
        }
    }
}

impl FromStr for Ownership {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "private" => Ok(Ownership::Private),
            "state" => Ok(Ownership::State),
            other => Err(format!(
                "unknown ownership {other:?} (expected private or state)"
            )),
        }
    }
}

/// One of the four board/ownership cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroupKey {
    pub board: Board,
    pub ownership: Ownership,
}

impl GroupKey {
    /// Private-owned firms on the main board.
    pub const CONTROL: GroupKey = GroupKey {
        board: Board::Main,
        ownership: Ownership::Private,
    };

    pub const ALL: [GroupKey; 4] = [
        GroupKey::CONTROL,
        GroupKey {
            board: Board::Main,
            ownership: Ownership::State,
        },
        GroupKey {
            board: Board::SmeGem,
            ownership: Ownership::Private,
        },
        GroupKey {
            board: Board::SmeGem,
            ownership: Ownership::State,
        },
    ];

    pub const fn new(board: Board, ownership: Ownership) -> Self {
        Self { board, ownership }
    }

    pub fn label(&self) -> String {
        format!("{}_{}", self.board.as_str(), self.ownership.as_str())
    }
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.board.as_str(), self.ownership.as_str())
    }
}

impl FromStr for GroupKey {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GroupKey::ALL
            .into_iter()
            .find(|k| k.label() == s)
            .ok_or_else(|| format!("unknown group {s:?}"))
    }
}

/// One firm's registry for one year: the largest holders' fractions of
/// total equity, in descending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirmYearRecord {
    pub firm_id: String,
    pub year: i32,
    pub board: Board,
    pub ownership: Ownership,
    shares: Vec<f64>,
    pub meeting_share: Option<f64>,
    pub n_meetings: Option<u32>,
}

impl FirmYearRecord {
    /// Validates a record. Shares that are out of order by no more than
    /// [`ORDER_TOLERANCE`] are re-sorted.
    pub fn new(
        firm_id: impl Into<String>,
        year: i32,
        group: GroupKey,
        shares: Vec<f64>,
        meeting_share: Option<f64>,
        n_meetings: Option<u32>,
    ) -> Result<Self, RecordError> {
        let firm_id = firm_id.into();
        if firm_id.is_empty() {
            return Err(RecordError::EmptyFirmId);
        }
        let shares = validate_shares(shares)?;
        if let Some(m) = meeting_share {
            if !(0.0..=1.0).contains(&m) {
                return Err(RecordError::MeetingShareOutOfRange(m));
            }
        }
        Ok(Self {
            firm_id,
            year,
            board: group.board,
            ownership: group.ownership,
            shares,
            meeting_share,
            n_meetings,
        })
    }

    pub fn group(&self) -> GroupKey {
        GroupKey::new(self.board, self.ownership)
    }

    /// Listed holders' shares, largest first.
    pub fn shares(&self) -> &[f64] {
        &self.shares
    }

    pub fn top1(&self) -> f64 {
        self.shares[0]
    }

    /// Sum of the second through tenth listed shares.
    pub fn top2_10(&self) -> f64 {
        self.shares[1..].iter().sum()
    }

    pub fn top10(&self) -> f64 {
        self.shares.iter().sum()
    }

    /// `S_meeting / S_top10`, when the meeting share is known.
    pub fn meeting_ratio(&self) -> Option<f64> {
        self.meeting_share.map(|m| m / self.top10())
    }
}

fn validate_shares(mut shares: Vec<f64>) -> Result<Vec<f64>, RecordError> {
    if shares.is_empty() {
        return Err(RecordError::NoHolders);
    }
    if shares.len() > MAX_HOLDERS {
        return Err(RecordError::TooManyHolders(shares.len()));
    }
    for (index, &value) in shares.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(RecordError::ShareOutOfRange { index, value });
        }
    }
    for index in 1..shares.len() {
        if shares[index] > shares[index - 1] + ORDER_TOLERANCE {
            return Err(RecordError::Unordered { index });
        }
    }
    shares.sort_by(|a, b| b.total_cmp(a));
    let sum: f64 = shares.iter().sum();
    if sum > 1.0 + SUM_TOLERANCE {
        return Err(RecordError::SumExceedsOne(sum));
    }
    if sum == 0.0 {
        return Err(RecordError::AllZero);
    }
    Ok(shares)
}

/// Keeps the records whose top holder has no outright majority.
pub fn apply_sample_filter(records: &[FirmYearRecord]) -> Vec<FirmYearRecord> {
    records
        .iter()
        .filter(|r| r.top1() < MAJORITY_THRESHOLD)
        .cloned()
        .collect()
}

/// Partitions records by board and ownership. Every cell is present in the
/// result, possibly empty; input order is kept within each cell.
pub fn group_records(records: &[FirmYearRecord]) -> BTreeMap<GroupKey, Vec<FirmYearRecord>> {
    let mut out: BTreeMap<GroupKey, Vec<FirmYearRecord>> =
        GroupKey::ALL.iter().map(|&k| (k, Vec::new())).collect();
    for r in records {
        out.entry(r.group()).or_default().push(r.clone());
    }
    out
}
