use serde::Serialize;
use serde_json::Value;
use std::fs;
use std::io;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// |value − target| ≤ tolerance·|target|
    Rel,
    /// |value − target| ≤ tolerance
    Abs,
    /// value ≥ target
    AtLeast,
    /// value ≤ target
    AtMost,
    /// value ∈ [target − tolerance, target + tolerance]
    Band,
}

#[derive(Debug, Clone, Serialize)]
pub struct Assertion {
    pub name: String,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub rule: Rule,
    pub error_estimate: f64,
    pub pass: bool,
}

impl Assertion {
    fn make(name: impl Into<String>, value: f64, target: f64, tolerance: f64, rule: Rule, err: f64) -> Self {
        let pass = value.is_finite()
            && match rule {
                Rule::Rel => (value - target).abs() <= tolerance * target.abs(),
                Rule::Abs | Rule::Band => (value - target).abs() <= tolerance,
                Rule::AtLeast => value >= target,
                Rule::AtMost => value <= target,
            };
        Assertion { name: name.into(), value, target, tolerance, rule, error_estimate: err, pass }
    }

    pub fn rel(name: impl Into<String>, value: f64, target: f64, tol: f64, err: f64) -> Self {
        Self::make(name, value, target, tol, Rule::Rel, err)
    }

    pub fn abs(name: impl Into<String>, value: f64, target: f64, tol: f64, err: f64) -> Self {
        Self::make(name, value, target, tol, Rule::Abs, err)
    }

    pub fn at_least(name: impl Into<String>, value: f64, min: f64, err: f64) -> Self {
        Self::make(name, value, min, 0.0, Rule::AtLeast, err)
    }

    pub fn at_most(name: impl Into<String>, value: f64, max: f64, err: f64) -> Self {
        Self::make(name, value, max, 0.0, Rule::AtMost, err)
    }

    pub fn band(name: impl Into<String>, value: f64, lo: f64, hi: f64, err: f64) -> Self {
        Self::make(name, value, 0.5 * (lo + hi), 0.5 * (hi - lo), Rule::Band, err)
    }

    /// A yes/no property reported as 1 or 0 against target 1.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::make(name, if ok { 1.0 } else { 0.0 }, 1.0, 0.0, Rule::Abs, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // 17 significant digits
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub file: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(file: impl Into<String>, header: &[&'static str]) -> Self {
        Table { file: file.into(), header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, dir: &Path) -> io::Result<()> {
        let mut w = csv::Writer::from_path(dir.join(&self.file))?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render))?;
        }
        w.flush()
    }
}

/// What one pipeline produced: assertions, a JSON results block and plot tables.
#[derive(Debug, Clone, Default)]
pub struct Section {
    pub assertions: Vec<Assertion>,
    pub results: serde_json::Map<String, Value>,
    pub tables: Vec<Table>,
}

impl Section {
    pub fn pass(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }

    pub fn merge(&mut self, other: Section) {
        self.assertions.extend(other.assertions);
        self.results.extend(other.results);
        self.tables.extend(other.tables);
    }

    pub fn put(&mut self, key: &str, v: impl Serialize) {
        self.results.insert(key.to_string(), serde_json::to_value(v).unwrap_or(Value::Null));
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary<'a, C: Serialize> {
    pub command: &'a str,
    pub pass: bool,
    pub config: &'a C,
    pub assertions: &'a [Assertion],
    pub results: &'a serde_json::Map<String, Value>,
    pub artifacts: Vec<&'a str>,
}

pub fn write_run<C: Serialize>(dir: &Path, command: &str, config: &C, section: &Section) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    for t in &section.tables {
        t.write(dir)?;
    }
    let s = Summary {
        command,
        pass: section.pass(),
        config,
        assertions: &section.assertions,
        results: &section.results,
        artifacts: section.tables.iter().map(|t| t.file.as_str()).collect(),
    };
    let mut text = serde_json::to_string_pretty(&s).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(dir.join("summary.json"), text)
}
