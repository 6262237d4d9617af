use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::CliError;

/// Four decimals with trailing zeros removed: `0.5000 -> 0.5`, `1.0000 -> 1`.
pub fn short(x: f64) -> String {
    let s = format!("{x:.4}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        &s
    };
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) => {
            let f = File::create(p)
                .map_err(|e| CliError::Data(format!("cannot create {}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout()))),
    }
}

pub fn io_error(e: io::Error) -> CliError {
    CliError::Data(format!("write failed: {e}"))
}

/// Parses `lo,hi`.
pub fn parse_range(s: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Usage(format!("period range {s:?} must look like lo,hi"));
    let (lo, hi) = s.split_once(',').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trims() {
        assert_eq!(short(0.5), "0.5");
        assert_eq!(short(2.0 / 3.0), "0.6667");
        assert_eq!(short(1.0), "1");
        assert_eq!(short(0.0), "0");
        assert_eq!(short(-1e-9), "0");
        assert_eq!(short(8.0 / 13.0), "0.6154");
        assert_eq!(short(12.0), "12");
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("4, 50").unwrap(), (4.0, 50.0));
        assert!(parse_range("4").is_err());
        assert!(parse_range("a,b").is_err());
    }
}
