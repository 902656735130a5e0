//! Tabular results with CSV and JSON encodings.
//!
//! CSV layout:
//!
//! ```text
//! # config: key=value key=value ...
//! # summary: mean1=... var1_norm=...        (optional)
//! # convergence: method=rk4 iterations=...   (optional)
//! col_a,col_b,...
//! 1.0,2.5,...
//! ```
//!
//! Numbers use the shortest representation that parses back to the same
//! `f64`, so identical inputs give identical bytes and parsing inverts
//! serialization.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::master::{Method, SteadyState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(Error::Parse(format!("unknown format '{s}' (expected csv or json)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub method: Method,
    pub iterations: usize,
    pub time: f64,
    pub dt: f64,
    pub residual: f64,
    pub tail_leak: f64,
    pub tail_mass: f64,
    pub accepted: bool,
}

impl From<&SteadyState> for Convergence {
    fn from(s: &SteadyState) -> Self {
        Self {
            method: s.method,
            iterations: s.iterations,
            time: s.time,
            dt: s.dt,
            residual: s.residual,
            tail_leak: s.dist.tail_leak,
            tail_mass: s.tail_mass,
            accepted: s.accepted(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub config: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub summary: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence: Option<Convergence>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn set_config(&mut self, key: &str, value: impl ToString) {
        self.config.insert(key.to_string(), value.to_string());
    }
}

/// Shortest round-trip decimal form of a finite `f64`.
pub fn fmt_f64(x: f64) -> String {
    serde_json::Number::from_f64(x)
        .map(|n| n.to_string())
        .unwrap_or_else(|| x.to_string())
}

fn check_token(kind: &str, s: &str) -> Result<()> {
    if s.is_empty() || s.chars().any(|c| c.is_whitespace() || c == '=' || c == ',') {
        return Err(Error::InvalidInput(format!("{kind} '{s}' cannot be written to CSV")));
    }
    Ok(())
}

fn check_finite(table: &Table) -> Result<()> {
    let conv = table
        .convergence
        .iter()
        .flat_map(|c| [c.time, c.dt, c.residual, c.tail_leak, c.tail_mass]);
    if table
        .rows
        .iter()
        .flatten()
        .chain(table.summary.values())
        .copied()
        .chain(conv)
        .any(|x| !x.is_finite())
    {
        return Err(Error::InvalidInput("non-finite values cannot be written".into()));
    }
    Ok(())
}

pub fn to_csv(table: &Table) -> Result<String> {
    check_finite(table)?;
    let mut out = String::from("# config:");
    for (k, v) in &table.config {
        check_token("config key", k)?;
        check_token("config value", v)?;
        let _ = write!(out, " {k}={v}");
    }
    out.push('\n');
    if !table.summary.is_empty() {
        out.push_str("# summary:");
        for (k, v) in &table.summary {
            check_token("summary key", k)?;
            let _ = write!(out, " {k}={}", fmt_f64(*v));
        }
        out.push('\n');
    }
    if let Some(c) = &table.convergence {
        let method = match c.method {
            Method::Rk4 => "rk4",
            Method::Direct => "direct",
        };
        let _ = writeln!(
            out,
            "# convergence: method={method} iterations={} time={} dt={} residual={} tail_leak={} tail_mass={} accepted={}",
            c.iterations,
            fmt_f64(c.time),
            fmt_f64(c.dt),
            fmt_f64(c.residual),
            fmt_f64(c.tail_leak),
            fmt_f64(c.tail_mass),
            c.accepted
        );
    }
    for c in &table.columns {
        check_token("column name", c)?;
    }
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        if row.len() != table.columns.len() {
            return Err(Error::InvalidInput(format!(
                "row has {} values for {} columns",
                row.len(),
                table.columns.len()
            )));
        }
        let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

fn parse_pairs(line: &str) -> Result<Vec<(String, String)>> {
    line.split_whitespace()
        .map(|tok| {
            tok.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| Error::Parse(format!("expected key=value, got '{tok}'")))
        })
        .collect()
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Parse(format!("bad value for {key}: '{v}'")))
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    let x: f64 = parse_num(key, v)?;
    if !x.is_finite() {
        return Err(Error::Parse(format!("non-finite value for {key}: '{v}'")));
    }
    Ok(x)
}

fn parse_convergence(pairs: Vec<(String, String)>) -> Result<Convergence> {
    let map: BTreeMap<String, String> = pairs.into_iter().collect();
    let get = |k: &str| {
        map.get(k)
            .map(String::as_str)
            .ok_or_else(|| Error::Parse(format!("convergence line lacks '{k}'")))
    };
    let method = match get("method")? {
        "rk4" => Method::Rk4,
        "direct" => Method::Direct,
        other => return Err(Error::Parse(format!("unknown method '{other}'"))),
    };
    Ok(Convergence {
        method,
        iterations: parse_num("iterations", get("iterations")?)?,
        time: parse_f64("time", get("time")?)?,
        dt: parse_f64("dt", get("dt")?)?,
        residual: parse_f64("residual", get("residual")?)?,
        tail_leak: parse_f64("tail_leak", get("tail_leak")?)?,
        tail_mass: parse_f64("tail_mass", get("tail_mass")?)?,
        accepted: parse_num("accepted", get("accepted")?)?,
    })
}

pub fn from_csv(text: &str) -> Result<Table> {
    let mut table = Table::default();
    let mut body_start = 0;
    let mut seen_config = false;
    for line in text.split_inclusive('\n') {
        let Some(rest) = line.strip_prefix('#') else { break };
        body_start += line.len();
        let rest = rest.trim();
        if let Some(cfg) = rest.strip_prefix("config:") {
            table.config.extend(parse_pairs(cfg)?);
            seen_config = true;
        } else if let Some(s) = rest.strip_prefix("summary:") {
            for (k, v) in parse_pairs(s)? {
                let x = parse_f64(&k, &v)?;
                table.summary.insert(k, x);
            }
        } else if let Some(c) = rest.strip_prefix("convergence:") {
            table.convergence = Some(parse_convergence(parse_pairs(c)?)?);
        } else {
            return Err(Error::Parse(format!("unrecognized comment line '{}'", line.trim_end())));
        }
    }
    if !seen_config {
        return Err(Error::Parse("missing '# config:' line".into()));
    }

    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(&text.as_bytes()[body_start..]);
    table.columns = rdr
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if table.columns.iter().any(String::is_empty) && !(table.columns.len() == 1 && table.columns[0].is_empty()) {
        return Err(Error::Parse("empty column name".into()));
    }
    if table.columns.len() == 1 && table.columns[0].is_empty() {
        table.columns.clear();
    }
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let row = rec
            .iter()
            .map(|cell| parse_f64("cell", cell))
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != table.columns.len() {
            return Err(Error::Parse(format!(
                "row has {} values for {} columns",
                row.len(),
                table.columns.len()
            )));
        }
        table.rows.push(row);
    }
    Ok(table)
}

pub fn to_json(table: &Table) -> Result<String> {
    check_finite(table)?;
    let mut s = serde_json::to_string_pretty(table).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn from_json(text: &str) -> Result<Table> {
    let table: Table = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if let Some(r) = table.rows.iter().find(|r| r.len() != table.columns.len()) {
        return Err(Error::Parse(format!(
            "row has {} values for {} columns",
            r.len(),
            table.columns.len()
        )));
    }
    Ok(table)
}

pub fn serialize(table: &Table, format: Format) -> Result<String> {
    match format {
        Format::Csv => to_csv(table),
        Format::Json => to_json(table),
    }
}

pub fn parse(text: &str, format: Format) -> Result<Table> {
    match format {
        Format::Csv => from_csv(text),
        Format::Json => from_json(text),
    }
}

pub fn write_table(table: &Table, format: Format, path: &Path) -> Result<()> {
    let text = serialize(table, format)?;
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["n", "p1", "p2"]);
        t.set_config("gamma", 2);
        t.set_config("kappa_l", fmt_f64(20000.0 * std::f64::consts::PI));
        t.rows.push(vec![0.0, 0.1, 1e-300]);
        t.rows.push(vec![1.0, 0.30000000000000004, 2.5e-17]);
        t.summary.insert("mean1".into(), 24.825932997941525);
        t.convergence = Some(Convergence {
            method: Method::Rk4,
            iterations: 14283,
            time: 28.566,
            dt: 2e-3,
            residual: 9.99e-13,
            tail_leak: 5.3e-46,
            tail_mass: 7.0e-48,
            accepted: true,
        });
        t
    }

    #[test]
    fn empty_table_is_header_and_config_only() {
        let mut t = Table::new(&["kappa_l", "p_one"]);
        t.set_config("k_ratio", "0.01");
        let csv = to_csv(&t).unwrap();
        assert_eq!(csv, "# config: k_ratio=0.01\nkappa_l,p_one\n");
        assert_eq!(from_csv(&csv).unwrap(), t);
    }

    #[test]
    fn csv_and_json_round_trip() {
        let t = sample();
        assert_eq!(from_csv(&to_csv(&t).unwrap()).unwrap(), t);
        assert_eq!(from_json(&to_json(&t).unwrap()).unwrap(), t);
    }

    #[test]
    fn shortest_float_form() {
        assert_eq!(fmt_f64(25.0), "25.0");
        assert_eq!(fmt_f64(0.1), "0.1");
        assert_eq!(fmt_f64(1e-300), "1e-300");
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(from_csv("n,p\n1,2\n").is_err());
        assert!(from_csv("# config: a=1\nn,p\n1\n").is_err());
        assert!(from_csv("# config: a=1\nn,p\n1,x\n").is_err());
        assert!(from_csv("# config: a\nn\n").is_err());
        assert!(from_csv("# nonsense\n").is_err());
        assert!(from_json("{\"config\":{},\"columns\":[\"a\"],\"rows\":[[1,2]]}").is_err());
        let mut t = Table::new(&["bad name"]);
        t.rows.push(vec![1.0]);
        assert!(to_csv(&t).is_err());
        let mut t = Table::new(&["x"]);
        t.rows.push(vec![f64::NAN]);
        assert!(to_json(&t).is_err());
    }

    #[test]
    fn format_names() {
        assert_eq!("csv".parse::<Format>().unwrap(), Format::Csv);
        assert_eq!("json".parse::<Format>().unwrap(), Format::Json);
        assert!("xml".parse::<Format>().is_err());
    }
}
