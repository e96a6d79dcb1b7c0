//! The report document every command emits, and its three renderings.

use std::collections::BTreeMap;
use std::io::Write;

use anyhow::Result;
use campana::constants::{ConstantReport, TailKind};
use campana::counting::{CountRecord, SlopeReport};
use campana::Enclosure;
use serde::Serialize;
use serde_json::Value;

/// Version of the report layout; bumped whenever `report.schema.json` changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub config: ConfigOut,
    pub constants: Vec<ConstantOut>,
    pub comparisons: Vec<Comparison>,
    pub counts: Vec<CountSeries>,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct ConfigOut {
    pub prime_cutoff: u64,
    pub cbv_truncation: u64,
    pub count_budget: Option<u64>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl From<Enclosure> for Interval {
    fn from(e: Enclosure) -> Self {
        Interval { lo: e.lo, hi: e.hi }
    }
}

#[derive(Debug, Serialize)]
pub struct ConstantOut {
    pub name: String,
    pub method: String,
    pub value: f64,
    /// Present only when the tail bound is rigorous.
    pub enclosure: Option<Interval>,
    pub lower_bound: f64,
    pub estimate: f64,
    pub tail_estimate: f64,
    pub tail_kind: TailKind,
    pub rounding_allowance: f64,
    pub truncation: String,
    pub alpha: f64,
    pub beta: f64,
    pub sigma_inf: f64,
    pub exponent_a: String,
    pub exponent_b: String,
    pub components: BTreeMap<String, f64>,
}

impl ConstantOut {
    pub fn new(r: &ConstantReport, method: &str) -> Self {
        ConstantOut {
            name: r.name.clone(),
            method: method.to_string(),
            value: r.value,
            enclosure: r.enclosure().map(Interval::from),
            lower_bound: r.lower_bound(),
            estimate: r.estimate(),
            tail_estimate: r.tail_estimate,
            tail_kind: r.tail_kind,
            rounding_allowance: r.rounding_allowance,
            truncation: r.truncation.clone(),
            alpha: r.alpha,
            beta: r.beta,
            sigma_inf: r.sigma_inf,
            exponent_a: r.exponent_a.to_string(),
            exponent_b: r.exponent_b.to_string(),
            components: r.components.clone(),
        }
    }

    /// Best available bounds: the enclosure, or `[lower_bound, inf)`.
    pub fn bounds(&self) -> Interval {
        self.enclosure.unwrap_or(Interval {
            lo: self.lower_bound,
            hi: f64::INFINITY,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Less,
    Greater,
    Undetermined,
}

#[derive(Debug, Serialize)]
pub struct Comparison {
    pub lhs: String,
    pub rhs: String,
    pub lhs_value: f64,
    pub rhs_value: f64,
    /// Decided from guaranteed bounds only.
    pub relation: Relation,
}

impl Comparison {
    pub fn new(lhs: &str, l: Interval, lv: f64, rhs: &str, r: Interval, rv: f64) -> Self {
        let relation = if l.hi < r.lo {
            Relation::Less
        } else if r.hi < l.lo {
            Relation::Greater
        } else {
            Relation::Undetermined
        };
        Comparison {
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
            lhs_value: lv,
            rhs_value: rv,
            relation,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CountOut {
    #[serde(rename = "B")]
    pub bound: u64,
    pub raw_count: u64,
    pub divisor: u64,
    pub value: f64,
}

#[derive(Debug, Serialize)]
pub struct SlopeOut {
    pub exponent: String,
    pub ratios: Vec<(u64, f64)>,
    pub reference_name: String,
    pub reference_value: f64,
}

#[derive(Debug, Serialize)]
pub struct CountSeries {
    pub problem: String,
    pub cache_key: String,
    pub records: Vec<CountOut>,
    pub slope: Option<SlopeOut>,
}

impl CountSeries {
    pub fn new(problem: &str, key: &str, records: &[CountRecord]) -> Self {
        CountSeries {
            problem: problem.to_string(),
            cache_key: key.to_string(),
            records: records
                .iter()
                .map(|r| CountOut {
                    bound: r.bound,
                    raw_count: r.raw_count,
                    divisor: r.divisor,
                    value: r.value(),
                })
                .collect(),
            slope: None,
        }
    }

    pub fn with_slope(mut self, s: &SlopeReport, exponent: &str, name: &str, value: f64) -> Self {
        self.slope = Some(SlopeOut {
            exponent: exponent.to_string(),
            ratios: s.ratios.clone(),
            reference_name: name.to_string(),
            reference_value: value,
        });
        self
    }
}

#[derive(Debug, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Report {
    pub fn new(command: String, config: ConfigOut) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command,
            config,
            constants: Vec::new(),
            comparisons: Vec::new(),
            counts: Vec::new(),
            tables: Vec::new(),
            checks: Vec::new(),
            passed: true,
        }
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.passed &= passed;
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail,
        });
    }

    pub fn render(&self, format: Format, out: &mut impl Write) -> Result<()> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, self)?;
                writeln!(out)?;
            }
            Format::Csv => self.render_csv(out)?,
            Format::Text => self.render_text(out)?,
        }
        Ok(())
    }

    /// Long format: one `section,item,field,value` row per scalar.
    fn render_csv(&self, out: &mut impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["section", "item", "field", "value"])?;
        for c in &self.constants {
            let mut row = |f: &str, v: String| w.write_record(["constant", &c.name, f, &v]);
            row("value", c.value.to_string())?;
            if let Some(e) = c.enclosure {
                row("enclosure_lo", e.lo.to_string())?;
                row("enclosure_hi", e.hi.to_string())?;
            }
            row("estimate", c.estimate.to_string())?;
            row("tail_estimate", c.tail_estimate.to_string())?;
            row("tail_kind", json_str(&c.tail_kind))?;
            row("truncation", c.truncation.clone())?;
            for (k, v) in &c.components {
                row(&format!("component.{k}"), v.to_string())?;
            }
        }
        for c in &self.comparisons {
            let item = format!("{} vs {}", c.lhs, c.rhs);
            w.write_record(["comparison", &item, "relation", &json_str(&c.relation)])?;
        }
        for s in &self.counts {
            for r in &s.records {
                let f = format!("B={}", r.bound);
                w.write_record(["count", &s.problem, &f, &format!("{}/{}", r.raw_count, r.divisor)])?;
            }
            if let Some(sl) = &s.slope {
                for (b, v) in &sl.ratios {
                    let f = format!("ratio.B={b}");
                    w.write_record(["count", &s.problem, &f, &v.to_string()])?;
                }
            }
        }
        for t in &self.tables {
            for (i, row) in t.rows.iter().enumerate() {
                for (col, v) in t.columns.iter().zip(row) {
                    let f = format!("row{i}.{col}");
                    w.write_record(["table", &t.name, &f, &plain(v)])?;
                }
            }
        }
        for c in &self.checks {
            w.write_record(["check", &c.name, "passed", &c.passed.to_string()])?;
            w.write_record(["check", &c.name, "detail", &c.detail])?;
        }
        w.write_record(["summary", &self.command, "passed", &self.passed.to_string()])?;
        w.flush()?;
        Ok(())
    }

    fn render_text(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "{}", self.command)?;
        for c in &self.constants {
            match c.enclosure {
                Some(e) => writeln!(out, "  {} = {:.12}  in [{:.12}, {:.12}]", c.name, c.value, e.lo, e.hi)?,
                None => writeln!(
                    out,
                    "  {} = {:.6}  (estimate {:.6}, {} tail)",
                    c.name,
                    c.value,
                    c.estimate,
                    json_str(&c.tail_kind)
                )?,
            }
        }
        for c in &self.comparisons {
            writeln!(out, "  {} vs {}: {}", c.lhs, c.rhs, json_str(&c.relation))?;
        }
        for s in &self.counts {
            writeln!(out, "  {}", s.problem)?;
            for r in &s.records {
                writeln!(out, "    B = {:>10}  count = {}", r.bound, plain(&Value::from(r.value)))?;
            }
            if let Some(sl) = &s.slope {
                let ratios: Vec<String> = sl.ratios.iter().map(|(b, v)| format!("{b}: {v:.5}")).collect();
                writeln!(
                    out,
                    "    count / B^{}: {}  ({} = {:.5})",
                    sl.exponent,
                    ratios.join(", "),
                    sl.reference_name,
                    sl.reference_value
                )?;
            }
        }
        for t in &self.tables {
            writeln!(out, "  {}", t.name)?;
            writeln!(out, "    {}", t.columns.join("\t"))?;
            for row in &t.rows {
                let cells: Vec<String> = row.iter().map(plain).collect();
                writeln!(out, "    {}", cells.join("\t"))?;
            }
        }
        for c in &self.checks {
            writeln!(out, "  {} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        writeln!(out, "{}", if self.passed { "PASS" } else { "FAIL" })?;
        Ok(())
    }
}

fn json_str(v: &impl Serialize) -> String {
    match serde_json::to_value(v) {
        Ok(Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
