//! CSV emission for per-cell records and the sample-means experiment.

use std::collections::BTreeMap;
use std::io::{self, Write};

use satpart_core::estimator::SampleMeansReport;

use crate::schema::{LedgerRecord, RunStatusTag};

fn opt(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per solved cell, in cell order.
pub fn write_cells_csv<W: Write>(
    records: &BTreeMap<u64, LedgerRecord>,
    w: &mut W,
) -> io::Result<()> {
    writeln!(w, "cell,status,wall_seconds,conflicts,propagations,decisions")?;
    for record in records.values() {
        let status = match record.status {
            RunStatusTag::Sat => "sat",
            RunStatusTag::Unsat => "unsat",
            RunStatusTag::TimedOut => "timed_out",
        };
        writeln!(
            w,
            "{},{},{},{},{},{}",
            record.cell,
            status,
            record.wall_seconds,
            opt(record.conflicts),
            opt(record.propagations),
            opt(record.decisions),
        )?;
    }
    Ok(())
}

/// Boxplot-ready rows: one per sample size, all values normalized by the
/// population mean.
pub fn write_sample_means_csv<W: Write>(
    report: &SampleMeansReport,
    w: &mut W,
) -> io::Result<()> {
    writeln!(w, "n,mean_of_means,min,q1,median,q3,max")?;
    for row in &report.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            row.n, row.mean_of_means, row.min, row.q1, row.median, row.q3, row.max
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_csv_layout() {
        let mut records = BTreeMap::new();
        records.insert(
            3,
            LedgerRecord {
                cell: 3,
                status: RunStatusTag::Unsat,
                wall_seconds: 0.5,
                conflicts: Some(10),
                propagations: None,
                decisions: Some(4),
                model: None,
            },
        );
        let mut buf = Vec::new();
        write_cells_csv(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "cell,status,wall_seconds,conflicts,propagations,decisions\n3,unsat,0.5,10,,4\n"
        );
    }
}
