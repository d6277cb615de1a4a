//! CSV rendering of ranking reports and ablation tables. Metric values are
//! written with six fixed decimals so repeated runs produce identical bytes
//! and golden-file comparisons stay stable; parsing reverses the rendering
//! losslessly at that precision.

use crate::error::{Error, Result};
use crate::eval::RankingReport;
use crate::training::AblationRow;

pub const METRICS_HEADER: &str = "direction,k,recall,ndcg,n_users";
pub const ABLATION_HEADER: &str = "label,direction,k,recall,ndcg,n_users";

/// One row per (direction, K), directions in the order given.
pub fn reports_to_csv(reports: &[RankingReport]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in reports {
        for (i, &k) in r.k_values.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{:.6},{:.6},{}\n",
                r.direction, k, r.recall[i], r.ndcg[i], r.n_users
            ));
        }
    }
    out
}

/// Inverse of [`reports_to_csv`]: consecutive rows sharing a direction fold
/// back into one report.
pub fn reports_from_csv(text: &str) -> Result<Vec<RankingReport>> {
    let mut lines = text.lines().enumerate();
    let bad = |line_no: usize, msg: String| Error::Parse {
        location: format!("metrics csv line {}", line_no + 1),
        message: msg,
    };
    match lines.next() {
        Some((_, header)) if header == METRICS_HEADER => {}
        other => {
            return Err(bad(0, format!("expected header '{METRICS_HEADER}', found {other:?}")))
        }
    }
    let mut reports: Vec<RankingReport> = Vec::new();
    for (line_no, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(bad(line_no, format!("expected 5 fields, found {}", fields.len())));
        }
        let direction = fields[0].parse().map_err(|e| bad(line_no, format!("{e}")))?;
        let k: usize = fields[1].parse().map_err(|e| bad(line_no, format!("bad k: {e}")))?;
        let recall: f64 =
            fields[2].parse().map_err(|e| bad(line_no, format!("bad recall: {e}")))?;
        let ndcg: f64 = fields[3].parse().map_err(|e| bad(line_no, format!("bad ndcg: {e}")))?;
        let n_users: usize =
            fields[4].parse().map_err(|e| bad(line_no, format!("bad n_users: {e}")))?;
        match reports.last_mut() {
            Some(r) if r.direction == direction && r.n_users == n_users => {
                r.k_values.push(k);
                r.recall.push(recall);
                r.ndcg.push(ndcg);
            }
            _ => reports.push(RankingReport {
                direction,
                k_values: vec![k],
                recall: vec![recall],
                ndcg: vec![ndcg],
                n_users,
            }),
        }
    }
    Ok(reports)
}

/// One row per (label, direction, K).
pub fn ablation_to_csv(rows: &[AblationRow]) -> String {
    let mut out = String::from(ABLATION_HEADER);
    out.push('\n');
    for row in rows {
        let r = &row.report;
        for (i, &k) in r.k_values.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{:.6},{:.6},{}\n",
                row.label, r.direction, k, r.recall[i], r.ndcg[i], r.n_users
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Direction;

    fn sample() -> Vec<RankingReport> {
        vec![
            RankingReport {
                direction: Direction::AToB,
                k_values: vec![10, 50],
                recall: vec![0.25, 0.75],
                ndcg: vec![0.2, 0.6],
                n_users: 40,
            },
            RankingReport {
                direction: Direction::BToA,
                k_values: vec![10, 50],
                recall: vec![0.3, 0.8],
                ndcg: vec![0.25, 0.65],
                n_users: 40,
            },
        ]
    }

    #[test]
    fn csv_round_trips_losslessly() {
        let csv = reports_to_csv(&sample());
        let parsed = reports_from_csv(&csv).unwrap();
        assert_eq!(reports_to_csv(&parsed), csv);
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[0].k_values, vec![10, 50]);
        assert_eq!(parsed[1].direction, Direction::BToA);
    }

    #[test]
    fn fixed_point_rendering() {
        let csv = reports_to_csv(&sample());
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(METRICS_HEADER));
        assert_eq!(lines.next(), Some("a2b,10,0.250000,0.200000,40"));
    }

    #[test]
    fn malformed_rows_name_their_line() {
        let err = reports_from_csv("direction,k,recall,ndcg,n_users\na2b,10,0.5\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = reports_from_csv("nope\n").unwrap_err();
        assert!(err.to_string().contains("header"), "{err}");
    }

    #[test]
    fn ablation_rows_carry_labels() {
        let rows = vec![AblationRow { label: "full".to_string(), report: sample().remove(0) }];
        let csv = ablation_to_csv(&rows);
        assert!(csv.starts_with(ABLATION_HEADER));
        assert!(csv.contains("full,a2b,50,0.750000,0.600000,40"));
    }
}
