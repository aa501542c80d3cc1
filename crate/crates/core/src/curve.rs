//! Sampled exponent curves and generic numeric tables, with their CSV and
//! JSON encodings.
//!
//! CSV layout: `# key: value` metadata lines, one header row, then data rows.
//! Numbers are written with 12 significant digits.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Slack allowed when checking that an exponent does not increase with rate.
pub const MONOTONE_SLACK: f64 = 1e-9;

/// Formats `x` rounded to 12 significant digits, shortest round-trip form.
pub fn fmt12(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    let mag = rounded.abs();
    let s = if mag != 0.0 && !(1e-5..1e15).contains(&mag) {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

/// `(rate, exponent)` samples, rates in nats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct ExponentCurve<T> {
    pub label: String,
    pub params: BTreeMap<String, String>,
    pub points: Vec<(T, T)>,
}

impl<T: Real> ExponentCurve<T> {
    pub fn new(label: impl Into<String>, params: BTreeMap<String, String>, points: Vec<(T, T)>) -> Result<Self> {
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::Domain(format!("rates not strictly increasing at {}", w[1].0)));
            }
            if w[1].1 > w[0].1 + T::lit(MONOTONE_SLACK) * w[0].1.abs().max(T::one()) {
                return Err(Error::Domain(format!("exponent increases at rate {}", w[1].0)));
            }
        }
        if let Some((r, e)) = points.iter().find(|(_, e)| !(*e >= T::zero())) {
            return Err(Error::Domain(format!("negative exponent {e} at rate {r}")));
        }
        Ok(Self {
            label: label.into(),
            params,
            points,
        })
    }

    /// Evaluate `f` on every rate, in parallel, keeping the rate order.
    pub fn sample<F>(label: impl Into<String>, params: BTreeMap<String, String>, rates: &[T], f: F) -> Result<Self>
    where
        F: Fn(T) -> Result<T> + Sync,
    {
        let points = rates
            .par_iter()
            .map(|&r| f(r).map(|e| (r, e)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(label, params, points)
    }

    /// Copy with rates and exponents divided by `ln 2`.
    pub fn to_bits(&self) -> Self {
        let ln2 = T::LN_2();
        Self {
            label: self.label.clone(),
            params: self.params.clone(),
            points: self.points.iter().map(|&(r, e)| (r / ln2, e / ln2)).collect(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# label: {}\n", self.label);
        for (k, v) in &self.params {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push_str("rate,exponent\n");
        for (r, e) in &self.points {
            out.push_str(&format!("{},{}\n", fmt12(r.as_f64()), fmt12(e.as_f64())));
        }
        out
    }

    pub fn from_csv(s: &str) -> Result<Self> {
        let table = DataTable::from_csv(s)?;
        if table.columns != ["rate", "exponent"] {
            return Err(Error::Parse(format!("unexpected header {:?}", table.columns)));
        }
        let mut params = table.meta;
        let label = params.remove("label").unwrap_or_default();
        let points = table.rows.iter().map(|r| (T::lit(r[0]), T::lit(r[1]))).collect();
        Self::new(label, params, points)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("curve serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(c.label, c.params, c.points)
    }
}

/// Named numeric columns plus free-form metadata; the output format of the
/// figure jobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataTable {
    pub meta: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl DataTable {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            meta: BTreeMap::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.insert(key.into(), value.to_string());
        self
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| fmt12(x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(s: &str) -> Result<Self> {
        let mut meta = BTreeMap::new();
        let mut columns: Option<Vec<String>> = None;
        let mut rows = Vec::new();
        for line in s.lines().filter(|l| !l.trim().is_empty()) {
            if let Some(rest) = line.strip_prefix("# ") {
                let (k, v) = rest
                    .split_once(": ")
                    .ok_or_else(|| Error::Parse(format!("bad metadata line {line:?}")))?;
                meta.insert(k.to_string(), v.to_string());
            } else if columns.is_none() {
                columns = Some(line.split(',').map(str::to_string).collect());
            } else {
                let row = line
                    .split(',')
                    .map(|c| c.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{c:?}: {e}"))))
                    .collect::<Result<Vec<_>>>()?;
                if row.len() != columns.as_ref().map_or(0, Vec::len) {
                    return Err(Error::Parse(format!("row width mismatch in {line:?}")));
                }
                rows.push(row);
            }
        }
        Ok(Self {
            meta,
            columns: columns.ok_or_else(|| Error::Parse("missing header row".into()))?,
            rows,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_bad_curves() {
        let p = BTreeMap::new();
        assert!(ExponentCurve::new("x", p.clone(), vec![(0.1f64, 1.0), (0.1, 0.5)]).is_err());
        assert!(ExponentCurve::new("x", p.clone(), vec![(0.1f64, 1.0), (0.2, 1.5)]).is_err());
        assert!(ExponentCurve::new("x", p.clone(), vec![(0.1f64, -1.0)]).is_err());
        assert!(ExponentCurve::new("x", p, vec![(0.1f64, 1.0), (0.2, 1.0), (0.3, 0.0)]).is_ok());
    }

    #[test]
    fn fixed_formatting() {
        assert_eq!(fmt12(0.1), "0.1");
        assert_eq!(fmt12(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt12(-0.0), "0");
        assert_eq!(fmt12(123456.789), "123456.789");
    }

    #[test]
    fn csv_layout() {
        let mut params = BTreeMap::new();
        params.insert("channel".to_string(), "bsc(0.02)".to_string());
        let c = ExponentCurve::new("E_r", params, vec![(0.0f64, 0.5), (0.25, 0.125)]).unwrap();
        assert_eq!(c.to_csv(), "# label: E_r\n# channel: bsc(0.02)\nrate,exponent\n0,0.5\n0.25,0.125\n");
    }

    proptest! {
        #[test]
        fn csv_json_round_trip(mut xs in proptest::collection::vec((0.0f64..10.0, 0.0f64..5.0), 1..20)) {
            xs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            xs.dedup_by(|a, b| fmt12(a.0) == fmt12(b.0));
            let mut es: Vec<f64> = xs.iter().map(|x| x.1).collect();
            es.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let pts: Vec<(f64, f64)> = xs.iter().zip(es).map(|(x, e)| (x.0, e)).collect();
            let curve = ExponentCurve::new("c", BTreeMap::new(), pts).unwrap();
            let csv = curve.to_csv();
            let parsed = ExponentCurve::<f64>::from_csv(&csv).unwrap();
            let via_json = ExponentCurve::<f64>::from_json(&parsed.to_json()).unwrap();
            prop_assert_eq!(&via_json, &parsed);
            prop_assert_eq!(via_json.to_csv(), csv);
        }
    }

    #[test]
    fn table_round_trip() {
        let mut t = DataTable::new(&["p", "sw", "virtual"]).with_meta("q", 0.1);
        t.push(vec![0.0, 0.2231, 0.25]);
        t.push(vec![0.5, 0.1, 0.05]);
        let back = DataTable::from_csv(&t.to_csv()).unwrap();
        assert_eq!(back, t);
        assert_eq!(DataTable::from_json(&t.to_json()).unwrap(), t);
        assert_eq!(t.column("sw").unwrap(), vec![0.2231, 0.1]);
    }
}
