use std::fmt::Write as _;
use std::io::Write;

use crate::error::Result;

pub const CSV_HEADER: &str = "metric,strategy,n,value";

/// One `metric,strategy,n,value` line. `n` is the dimension count of a
/// sweep point or the cutoff of a ranking metric.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub metric: String,
    pub strategy: String,
    pub n: Option<usize>,
    pub value: f64,
}

impl ReportRow {
    pub fn new(metric: &str, strategy: &str, n: Option<usize>, value: f64) -> Self {
        ReportRow {
            metric: metric.to_owned(),
            strategy: strategy.to_owned(),
            n,
            value,
        }
    }
}

/// Metric rows plus bookkeeping counts (skipped records and the like).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<ReportRow>,
    pub counts: Vec<(String, usize)>,
    /// Free-form summary lines shown in the table output.
    pub notes: Vec<String>,
}

impl EvalReport {
    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "{CSV_HEADER}")?;
        for row in &self.rows {
            let n = row.n.map(|n| n.to_string()).unwrap_or_default();
            writeln!(
                writer,
                "{},{},{},{:.6}",
                row.metric, row.strategy, n, row.value
            )?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "{:<12} {:<10} {:>6} {:>9}",
            "metric", "strategy", "n", "value"
        )
        .unwrap();
        for row in &self.rows {
            let n = row.n.map(|n| n.to_string()).unwrap_or_else(|| "-".into());
            writeln!(
                out,
                "{:<12} {:<10} {:>6} {:>9.4}",
                row.metric, row.strategy, n, row.value
            )
            .unwrap();
        }
        for (name, count) in &self.counts {
            writeln!(out, "{name}: {count}").unwrap();
        }
        for note in &self.notes {
            writeln!(out, "{note}").unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let report = EvalReport {
            rows: vec![
                ReportRow::new("ndcg", "cosine", Some(1), 0.5),
                ReportRow::new("map", "cosine", None, 0.25),
            ],
            ..Default::default()
        };
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "metric,strategy,n,value\nndcg,cosine,1,0.500000\nmap,cosine,,0.250000\n"
        );
        assert!(report.to_table().contains("ndcg"));
    }
}
