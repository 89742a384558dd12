//! Per-symbol OHLCV CSV files: header `timestamp,open,high,low,close,volume`,
//! ISO-8601 local timestamps.

use std::io::{Read, Write};

use super::{format_timestamp, parse_timestamp, Bar, BarSeries, Granularity};

pub const BAR_HEADER: [&str; 6] = ["timestamp", "open", "high", "low", "close", "volume"];

/// A row-level problem; `line` is 1-based and counts the header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for RowError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

pub fn write_bars<W: Write>(series: &BarSeries, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BAR_HEADER)?;
    for b in series.bars() {
        w.write_record([
            format_timestamp(b.timestamp),
            b.open.to_string(),
            b.high.to_string(),
            b.low.to_string(),
            b.close.to_string(),
            b.volume.to_string(),
        ])?;
    }
    w.flush()
}

/// Parses a bar file; the first offending row aborts the parse.
pub fn read_bars<R: Read>(symbol: &str, granularity: Granularity, input: R) -> Result<BarSeries, RowError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = rdr.headers().map_err(|e| RowError {
        line: 1,
        message: e.to_string(),
    })?;
    let names: Vec<String> = header.iter().map(|h| h.to_ascii_lowercase()).collect();
    if names != BAR_HEADER {
        return Err(RowError {
            line: 1,
            message: format!("expected header {}, got {}", BAR_HEADER.join(","), names.join(",")),
        });
    }
    let mut bars: Vec<Bar> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let err = |message: String| RowError { line, message };
        let rec = rec.map_err(|e| err(e.to_string()))?;
        if rec.len() != 6 {
            return Err(err(format!("expected 6 fields, got {}", rec.len())));
        }
        let timestamp = parse_timestamp(&rec[0]).ok_or_else(|| err(format!("bad timestamp '{}'", &rec[0])))?;
        let num = |j: usize| {
            rec[j]
                .parse::<f64>()
                .map_err(|_| err(format!("bad {} '{}'", BAR_HEADER[j], &rec[j])))
        };
        let bar = Bar {
            timestamp,
            open: num(1)?,
            high: num(2)?,
            low: num(3)?,
            close: num(4)?,
            volume: num(5)?,
        };
        bar.validate().map_err(err)?;
        if let Some(prev) = bars.last() {
            if prev.timestamp >= bar.timestamp {
                return Err(err("timestamps not strictly increasing".into()));
            }
        }
        bars.push(bar);
    }
    BarSeries::new(symbol, granularity, bars).map_err(|e| RowError {
        line: 0,
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let bars = vec![
            Bar { timestamp: 1_577_957_460, open: 100.0, high: 100.31, low: 99.7, close: 100.1 / 3.0 * 3.0, volume: 1200.0 },
            Bar { timestamp: 1_577_957_520, open: 100.1, high: 101.0, low: 100.0, close: 100.987_654_321, volume: 0.0 },
        ];
        let s = BarSeries::new("X", Granularity::Min1, bars).unwrap();
        let mut buf = Vec::new();
        write_bars(&s, &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("timestamp,open,high,low,close,volume\n2020-01-02T09:31:00,"));
        assert_eq!(read_bars("X", Granularity::Min1, buf.as_slice()).unwrap(), s);
    }

    #[test]
    fn low_above_high_names_line() {
        let data = "timestamp,open,high,low,close,volume\n\
                    2020-01-02,10,11,9,10.5,100\n\
                    2020-01-03,10,11,12,10.5,100\n";
        let e = read_bars("X", Granularity::Daily, data.as_bytes()).unwrap_err();
        assert_eq!(e.line, 3);
        assert!(e.message.contains("low"));
    }

    #[test]
    fn bad_header_and_number() {
        assert_eq!(read_bars("X", Granularity::Daily, "a,b\n".as_bytes()).unwrap_err().line, 1);
        let data = "timestamp,open,high,low,close,volume\n2020-01-02,10,x,9,10,1\n";
        assert!(read_bars("X", Granularity::Daily, data.as_bytes()).unwrap_err().message.contains("high"));
    }
}
