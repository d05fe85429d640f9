//! CSV and JSON emission of result tables.

use serde::{Deserialize, Serialize};

use super::bench::BenchRow;
use crate::error::{Error, Result};

/// One line of a results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub dataset: String,
    pub norm: String,
    pub test_error_mean: f64,
    pub test_error_sd: f64,
    /// Mean iteration count.
    #[serde(rename = "N")]
    pub iterations: f64,
    /// Mean numerical rank of the solution.
    pub r: f64,
    pub k: Option<f64>,
    pub a: Option<f64>,
    pub lambda: f64,
}

pub const RESULT_COLUMNS: [&str; 9] = [
    "dataset",
    "norm",
    "test_error_mean",
    "test_error_sd",
    "N",
    "r",
    "k",
    "a",
    "lambda",
];

/// Six significant digits, shortest form; exponent notation outside
/// `[1e-4, 1e15)`.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{x:.5e}").parse().expect("formatted float parses");
    let mag = rounded.abs();
    if mag != 0.0 && !(1e-4..1e15).contains(&mag) {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(sig6).unwrap_or_default()
}

pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut out = RESULT_COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        let fields = [
            r.dataset.clone(),
            r.norm.clone(),
            sig6(r.test_error_mean),
            sig6(r.test_error_sd),
            sig6(r.iterations),
            sig6(r.r),
            opt(r.k),
            opt(r.a),
            sig6(r.lambda),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn results_json(rows: &[ResultRow]) -> Result<String> {
    serde_json::to_string_pretty(rows)
        .map_err(|e| Error::InvalidInput(format!("cannot serialize results: {e}")))
}

pub const BENCH_COLUMNS: [&str; 6] = [
    "d",
    "k",
    "new_seconds",
    "baseline_seconds",
    "max_abs_diff",
    "ok",
];

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = BENCH_COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.d,
            r.k,
            sig6(r.new_seconds),
            sig6(r.baseline_seconds),
            sig6(r.max_abs_diff),
            r.ok
        ));
    }
    out
}

pub fn bench_json(rows: &[BenchRow]) -> Result<String> {
    serde_json::to_string_pretty(rows)
        .map_err(|e| Error::InvalidInput(format!("cannot serialize results: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.123456789), "0.123457");
        assert_eq!(sig6(4.0), "4");
        assert_eq!(sig6(1234567.0), "1234570");
        assert_eq!(sig6(-2.5e-9), "-2.5e-9");
        assert_eq!(sig6(2.220446049250313e-16), "2.22045e-16");
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(f64::NAN), "NaN");
    }

    #[test]
    fn csv_column_order() {
        let row = ResultRow {
            dataset: "lowrank".into(),
            norm: "box".into(),
            test_error_mean: 0.38981234,
            test_error_sd: 0.01,
            iterations: 120.0,
            r: 5.0,
            k: Some(1.5),
            a: None,
            lambda: 0.1,
        };
        let csv = results_csv(&[row.clone()]);
        assert_eq!(
            csv,
            "dataset,norm,test_error_mean,test_error_sd,N,r,k,a,lambda\nlowrank,box,0.389812,0.01,120,5,1.5,,0.1\n"
        );
        let json = results_json(&[row]).unwrap();
        let keys: Vec<usize> = RESULT_COLUMNS
            .iter()
            .map(|c| json.find(&format!("\"{c}\"")).unwrap())
            .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
    }
}
