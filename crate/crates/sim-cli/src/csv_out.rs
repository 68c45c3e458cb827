//! CSV emission for sweep results.
//!
//! Provenance rides in `#`-prefixed comment lines before the fixed header;
//! values use plain decimal-point formatting (Rust's shortest
//! round-tripping float rendering), one row per sweep point in grid order.

use std::io::{self, Write};

use converge_core::SweepResult;

pub const CSV_HEADER: &str = "scheme,alpha,lambda_norm,drops,mean_interference_w,\
ci95_interference_w,norm_interference,mean_flow_bps,mean_power_w,mean_eff_bpj,\
ci95_eff_bpj,norm_eff";

pub fn write_csv<W: Write>(result: &SweepResult, writer: &mut W) -> io::Result<()> {
    writeln!(
        writer,
        "# config_digest={}",
        result.provenance.config_digest
    )?;
    writeln!(writer, "# master_seed={}", result.provenance.master_seed)?;
    writeln!(
        writer,
        "# resampled_drops={}",
        result.provenance.resampled_drops
    )?;
    writeln!(writer, "{CSV_HEADER}")?;
    for p in &result.points {
        writeln!(
            writer,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            p.scheme,
            p.alpha,
            p.lambda_norm,
            p.drops,
            p.mean_interference_w,
            opt(p.ci95_interference_w),
            p.norm_interference,
            p.mean_flow_bps,
            p.mean_power_w,
            p.mean_eff_bpj,
            opt(p.ci95_eff_bpj),
            p.norm_eff,
        )?;
    }
    Ok(())
}

fn opt(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

pub fn csv_string(result: &SweepResult) -> String {
    let mut buffer = Vec::new();
    write_csv(result, &mut buffer).expect("in-memory write");
    String::from_utf8(buffer).expect("csv is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use converge_core::metrics::{Provenance, Scheme};
    use converge_core::SweepPoint;

    fn tiny_result() -> SweepResult {
        SweepResult {
            points: vec![SweepPoint {
                scheme: Scheme::MaxSinr,
                alpha: 3.0,
                lambda_norm: 0.5,
                drops: 2,
                mean_interference_w: 1.25,
                ci95_interference_w: Some(0.5),
                mean_flow_bps: 2.0e7,
                mean_power_w: 15.0,
                mean_eff_bpj: 1.0e6,
                ci95_eff_bpj: None,
                norm_interference: 1.0,
                norm_eff: 1.0,
            }],
            provenance: Provenance {
                config_digest: "abc123".into(),
                master_seed: 7,
                resampled_drops: 0,
            },
        }
    }

    #[test]
    fn header_and_column_count_are_fixed() {
        let text = csv_string(&tiny_result());
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# config_digest="));
        assert_eq!(lines[3], CSV_HEADER);
        assert_eq!(CSV_HEADER.split(',').count(), 12);
        for row in &lines[4..] {
            assert_eq!(row.split(',').count(), 12, "row {row}");
        }
        // unavailable CI renders as an empty field
        assert!(lines[4].contains(",,"));
    }

    #[test]
    fn rows_use_plain_decimal_rendering() {
        let text = csv_string(&tiny_result());
        let row = text.lines().nth(4).unwrap();
        assert!(row.starts_with("max-sinr,3,0.5,2,1.25,0.5,1,20000000,15,1000000,,1"));
    }
}
