use std::io::{Read, Write};
use std::path::Path;

use super::{DatasetError, FirmYearRecord, GroupKey, MAX_HOLDERS};

/// Column order of the registry CSV.
pub const REGISTRY_HEADER: [&str; 16] = [
    "firm_id",
    "year",
    "board",
    "ownership",
    "s1",
    "s2",
    "s3",
    "s4",
    "s5",
    "s6",
    "s7",
    "s8",
    "s9",
    "s10",
    "meeting_share",
    "n_meetings",
];

// meeting_share and n_meetings may be left out of the header entirely
const REQUIRED_COLUMNS: usize = 14;

/// A data row that failed validation. `line` is the 1-based line number in
/// the file (the header is line 1).
#[derive(Debug, Clone, PartialEq)]
pub struct RowDiagnostic {
    pub line: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub records: Vec<FirmYearRecord>,
    pub rejected: Vec<RowDiagnostic>,
}

struct Columns {
    idx: [Option<usize>; 16],
}

impl Columns {
    fn locate(headers: &csv::StringRecord) -> Result<Self, DatasetError> {
        let mut idx = [None; 16];
        for (slot, name) in idx.iter_mut().zip(REGISTRY_HEADER) {
            *slot = headers.iter().position(|h| h == name);
        }
        let missing: Vec<String> = REGISTRY_HEADER[..REQUIRED_COLUMNS]
            .iter()
            .zip(&idx)
            .filter(|(_, i)| i.is_none())
            .map(|(n, _)| n.to_string())
            .collect();
        if !missing.is_empty() {
            return Err(DatasetError::MissingColumns(missing));
        }
        Ok(Self { idx })
    }

    fn get<'r>(&self, row: &'r csv::StringRecord, col: usize) -> &'r str {
        self.idx[col].and_then(|i| row.get(i)).unwrap_or("")
    }
}

fn parse_row(cols: &Columns, row: &csv::StringRecord) -> Result<FirmYearRecord, String> {
    let firm_id = cols.get(row, 0).to_string();
    let year: i32 = cols
        .get(row, 1)
        .parse()
        .map_err(|_| format!("year {:?} is not an integer", cols.get(row, 1)))?;
    let board = cols.get(row, 2).parse()?;
    let ownership = cols.get(row, 3).parse()?;

    let mut shares = Vec::with_capacity(MAX_HOLDERS);
    let mut gap_at = None;
    for k in 0..MAX_HOLDERS {
        let cell = cols.get(row, 4 + k);
        if cell.is_empty() {
            gap_at.get_or_insert(k + 1);
            continue;
        }
        if let Some(g) = gap_at {
            return Err(format!("s{} is blank but s{} is not", g, k + 1));
        }
        let v: f64 = cell
            .parse()
            .map_err(|_| format!("s{} = {cell:?} is not a number", k + 1))?;
        shares.push(v);
    }

    let meeting = cols.get(row, 14);
    let meeting_share = if meeting.is_empty() {
        None
    } else {
        Some(
            meeting
                .parse::<f64>()
                .map_err(|_| format!("meeting_share = {meeting:?} is not a number"))?,
        )
    };
    let nm = cols.get(row, 15);
    let n_meetings = if nm.is_empty() {
        None
    } else {
        Some(
            nm.parse::<u32>()
                .map_err(|_| format!("n_meetings = {nm:?} is not a count"))?,
        )
    };
    FirmYearRecord::new(
        firm_id,
        year,
        GroupKey::new(board, ownership),
        shares,
        meeting_share,
        n_meetings,
    )
    .map_err(|e| e.to_string())
}

/// Reads a registry CSV. Rows that fail validation are collected as
/// diagnostics; structural problems (unreadable input, missing columns)
/// are errors.
pub fn ingest_csv<R: Read>(source: R) -> Result<Ingested, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(source);
    let cols = Columns::locate(reader.headers()?)?;
    let mut records = Vec::new();
    let mut rejected = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        match parse_row(&cols, &row) {
            Ok(r) => records.push(r),
            Err(message) => rejected.push(RowDiagnostic { line, message }),
        }
    }
    Ok(Ingested { records, rejected })
}

/// Like [`ingest_csv`] but fails on the first rejected row.
pub fn ingest_csv_strict<R: Read>(source: R) -> Result<Vec<FirmYearRecord>, DatasetError> {
    let ingested = ingest_csv(source)?;
    match ingested.rejected.into_iter().next() {
        Some(d) => Err(DatasetError::Row {
            line: d.line,
            message: d.message,
        }),
        None => Ok(ingested.records),
    }
}

pub fn ingest_path(path: &Path) -> Result<Ingested, DatasetError> {
    ingest_csv(std::fs::File::open(path)?)
}

/// Writes records in the registry CSV layout; [`ingest_csv`] reads them
/// back unchanged.
pub fn emit_csv<W: Write>(records: &[FirmYearRecord], sink: W) -> Result<(), DatasetError> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(REGISTRY_HEADER)?;
    let mut fields: Vec<String> = Vec::with_capacity(REGISTRY_HEADER.len());
    for r in records {
        fields.clear();
        fields.push(r.firm_id.clone());
        fields.push(r.year.to_string());
        fields.push(r.board.as_str().to_string());
        fields.push(r.ownership.as_str().to_string());
        for k in 0..MAX_HOLDERS {
            fields.push(r.shares().get(k).map(f64::to_string).unwrap_or_default());
        }
        fields.push(r.meeting_share.map(|m| m.to_string()).unwrap_or_default());
        fields.push(r.n_meetings.map(|m| m.to_string()).unwrap_or_default());
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a `year,value` CSV.
pub fn read_macro_series<R: Read>(source: R) -> Result<Vec<(i32, f64)>, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = reader.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let (Some(yi), Some(vi)) = (find("year"), find("value")) else {
        let missing = ["year", "value"]
            .iter()
            .filter(|n| find(n).is_none())
            .map(|n| n.to_string())
            .collect();
        return Err(DatasetError::MissingColumns(missing));
    };
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |what: &str| DatasetError::Row {
            line,
            message: format!("unparseable {what}"),
        };
        let year = row.get(yi).unwrap_or("").parse().map_err(|_| bad("year"))?;
        let value: f64 = row.get(vi).unwrap_or("").parse().map_err(|_| bad("value"))?;
        out.push((year, value));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEAD: &str = "firm_id,year,board,ownership,s1,s2,s3,s4,s5,s6,s7,s8,s9,s10,meeting_share,n_meetings\n";

    #[test]
    fn accepts_trailing_zeros_and_blanks() {
        let csv = format!(
            "{HEAD}f1,2020,main,private,0.30,0.10,0.05,0,0,0,0,0,0,0,0.41,3\n\
             f2,2020,sme_gem,state,0.25,0.2,,,,,,,,,,\n"
        );
        let got = ingest_csv(csv.as_bytes()).unwrap();
        assert!(got.rejected.is_empty(), "{:?}", got.rejected);
        assert_eq!(got.records[0].shares().len(), 10);
        assert_eq!(got.records[0].meeting_share, Some(0.41));
        assert_eq!(got.records[0].n_meetings, Some(3));
        assert_eq!(got.records[1].shares(), &[0.25, 0.2]);
        assert_eq!(got.records[1].meeting_share, None);
    }

    #[test]
    fn rejects_with_line_numbers() {
        let csv = format!(
            "{HEAD}ok,2020,main,private,0.3,,,,,,,,,,,\n\
             big,2020,main,private,0.6,0.47,,,,,,,,,,\n\
             order,2020,main,private,0.10,0.30,,,,,,,,,,\n\
             nan,2020,main,private,abc,,,,,,,,,,,\n\
             gap,2020,main,private,0.3,,0.1,,,,,,,,,\n\
             board,2020,nasdaq,private,0.3,,,,,,,,,,,\n"
        );
        let got = ingest_csv(csv.as_bytes()).unwrap();
        assert_eq!(got.records.len(), 1);
        let lines: Vec<u64> = got.rejected.iter().map(|d| d.line).collect();
        assert_eq!(lines, vec![3, 4, 5, 6, 7]);
        assert!(got.rejected[0].message.contains("sum"));
        assert!(ingest_csv_strict(csv.as_bytes()).is_err());
    }

    #[test]
    fn missing_columns() {
        let err = ingest_csv("firm_id,year,board\nx,1,main\n".as_bytes()).unwrap_err();
        match err {
            DatasetError::MissingColumns(cols) => {
                assert!(cols.contains(&"ownership".to_string()));
                assert!(cols.contains(&"s10".to_string()));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn optional_columns_may_be_absent() {
        let csv = "firm_id,year,board,ownership,s1,s2,s3,s4,s5,s6,s7,s8,s9,s10\n\
                   a,2001,main,state,0.4,0.1,,,,,,,,\n";
        let got = ingest_csv(csv.as_bytes()).unwrap();
        assert_eq!(got.records.len(), 1);
    }

    #[test]
    fn emit_then_ingest() {
        let csv = format!(
            "{HEAD}f1,2020,main,private,0.3,0.1,0.05,0,,,,,,,0.41,3\n\
             f2,1999,sme_gem,state,0.123456,,,,,,,,,,,\n"
        );
        let records = ingest_csv_strict(csv.as_bytes()).unwrap();
        let mut out = Vec::new();
        emit_csv(&records, &mut out).unwrap();
        assert_eq!(String::from_utf8(out.clone()).unwrap(), csv);
        assert_eq!(ingest_csv_strict(out.as_slice()).unwrap(), records);
    }

    #[test]
    fn macro_series() {
        let s = read_macro_series("year,value\n2000,1.5\n2001,2\n".as_bytes()).unwrap();
        assert_eq!(s, vec![(2000, 1.5), (2001, 2.0)]);
        assert!(read_macro_series("yr,value\n".as_bytes()).is_err());
        assert!(read_macro_series("year,value\n2000,x\n".as_bytes()).is_err());
    }
}
