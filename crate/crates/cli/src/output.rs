//! Long-format result rows, written as CSV or JSON lines.

use std::io::{self, Write};

use serde_json::{json, Map, Value as Json};

use crate::args::Format;

pub const SCHEMA_VERSION: u32 = 1;
pub const COLUMNS: [&str; 13] =
    ["experiment", "command", "quantity", "d", "n", "r", "delta", "alpha", "gamma", "x", "estimate", "std_error", "method"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    /// Infeasible or undefined value.
    Na,
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v}"),
            Cell::Int(v) => format!("{v}"),
            Cell::Na => "NA".into(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(v) => json!(v.to_string()),
            Cell::Int(v) => json!(v),
            Cell::Na => json!("NA"),
            Cell::Empty => Json::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub quantity: &'static str,
    pub d: Cell,
    pub n: Cell,
    pub r: Cell,
    pub delta: Cell,
    pub alpha: Cell,
    pub gamma: Cell,
    pub x: Cell,
    pub estimate: Cell,
    pub std_error: Cell,
    pub method: String,
    pub wall_time: Option<f64>,
}

impl Row {
    pub fn new(quantity: &'static str, estimate: impl Into<Cell>, method: impl Into<String>) -> Self {
        Row {
            quantity,
            d: Cell::Empty,
            n: Cell::Empty,
            r: Cell::Empty,
            delta: Cell::Empty,
            alpha: Cell::Empty,
            gamma: Cell::Empty,
            x: Cell::Empty,
            estimate: estimate.into(),
            std_error: Cell::Empty,
            method: method.into(),
            wall_time: None,
        }
    }

    pub fn d(mut self, d: usize) -> Self {
        self.d = Cell::Int(d as u64);
        self
    }
    pub fn n(mut self, n: usize) -> Self {
        self.n = Cell::Int(n as u64);
        self
    }
    pub fn r(mut self, r: f64) -> Self {
        self.r = Cell::Num(r);
        self
    }
    pub fn delta(mut self, delta: f64) -> Self {
        self.delta = Cell::Num(delta);
        self
    }
    pub fn alpha(mut self, alpha: f64) -> Self {
        self.alpha = Cell::Num(alpha);
        self
    }
    pub fn gamma(mut self, gamma: f64) -> Self {
        self.gamma = Cell::Num(gamma);
        self
    }
    pub fn x(mut self, x: f64) -> Self {
        self.x = Cell::Num(x);
        self
    }
    pub fn se(mut self, se: f64) -> Self {
        self.std_error = Cell::Num(se);
        self
    }
    pub fn timed(mut self, secs: f64) -> Self {
        self.wall_time = Some(secs);
        self
    }
}

pub struct Meta<'a> {
    pub experiment: &'a str,
    pub command: &'a str,
    pub seed: u64,
    pub timing: bool,
}

fn header_comment(meta: &Meta) -> String {
    format!(
        "weakcover {} schema={SCHEMA_VERSION} command={} seed={}",
        env!("CARGO_PKG_VERSION"),
        meta.command,
        meta.seed
    )
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_rows<W: Write>(out: &mut W, rows: &[Row], meta: &Meta, format: Format) -> io::Result<()> {
    match format {
        Format::Csv => {
            writeln!(out, "# {}", header_comment(meta))?;
            let mut header = COLUMNS.join(",");
            if meta.timing {
                header.push_str(",wall_time_s");
            }
            writeln!(out, "{header}")?;
            for row in rows {
                let mut fields = vec![csv_field(meta.experiment), meta.command.to_string(), row.quantity.to_string()];
                for c in [row.d, row.n, row.r, row.delta, row.alpha, row.gamma, row.x, row.estimate, row.std_error] {
                    fields.push(c.csv());
                }
                fields.push(csv_field(&row.method));
                if meta.timing {
                    fields.push(row.wall_time.map(|t| format!("{t:.6}")).unwrap_or_default());
                }
                writeln!(out, "{}", fields.join(","))?;
            }
        }
        Format::Jsonl => {
            writeln!(
                out,
                "{}",
                json!({"meta": header_comment(meta), "schema": SCHEMA_VERSION, "seed": meta.seed, "command": meta.command})
            )?;
            for row in rows {
                let mut m = Map::new();
                m.insert("experiment".into(), json!(meta.experiment));
                m.insert("command".into(), json!(meta.command));
                m.insert("quantity".into(), json!(row.quantity));
                let cells = [row.d, row.n, row.r, row.delta, row.alpha, row.gamma, row.x, row.estimate, row.std_error];
                for (name, c) in COLUMNS[3..12].iter().zip(cells) {
                    m.insert((*name).into(), c.json());
                }
                m.insert("method".into(), json!(row.method));
                if meta.timing {
                    m.insert("wall_time_s".into(), json!(row.wall_time));
                }
                writeln!(out, "{}", Json::Object(m))?;
            }
        }
    }
    Ok(())
}

/// Design dump: `index,x_1,..,x_d`.
pub fn write_design<W: Write>(out: &mut W, design: &weakcover::Design, meta: &Meta, format: Format) -> io::Result<()> {
    let d = design.dim();
    match format {
        Format::Csv => {
            writeln!(out, "# {} provenance={}", header_comment(meta), csv_field(&design.provenance.scheme))?;
            let cols: Vec<String> = (1..=d).map(|j| format!("x_{j}")).collect();
            writeln!(out, "index,{}", cols.join(","))?;
            for (i, p) in design.iter().enumerate() {
                let xs: Vec<String> = p.iter().map(|v| format!("{v}")).collect();
                writeln!(out, "{i},{}", xs.join(","))?;
            }
        }
        Format::Jsonl => {
            writeln!(out, "{}", json!({"meta": header_comment(meta), "schema": SCHEMA_VERSION, "seed": meta.seed}))?;
            for (i, p) in design.iter().enumerate() {
                writeln!(out, "{}", json!({"index": i, "x": p}))?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(timing: bool) -> Meta<'static> {
        Meta { experiment: "exp", command: "coverage", seed: 7, timing }
    }

    #[test]
    fn csv_layout() {
        let rows = vec![
            Row::new("coverage", 0.25, "design_averaged").d(3).n(10).r(0.5).se(0.01),
            Row::new("n_gamma", Cell::Na, "first_hit;unreachable").d(3),
        ];
        let mut buf = Vec::new();
        write_rows(&mut buf, &rows, &meta(false), Format::Csv).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# weakcover ") && lines[0].ends_with("seed=7"));
        assert_eq!(lines[1], COLUMNS.join(","));
        assert_eq!(lines[2], "exp,coverage,coverage,3,10,0.5,,,,,0.25,0.01,design_averaged");
        assert_eq!(lines[3], "exp,coverage,n_gamma,3,,,,,,,NA,,first_hit;unreachable");
    }

    #[test]
    fn timing_column_is_optional() {
        let rows = vec![Row::new("coverage", 1.0, "m").timed(0.5)];
        let mut buf = Vec::new();
        write_rows(&mut buf, &rows, &meta(true), Format::Csv).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(1).unwrap().ends_with(",wall_time_s"));
        assert!(text.lines().nth(2).unwrap().ends_with(",0.500000"));
    }

    #[test]
    fn jsonl_rows_carry_all_columns() {
        let rows = vec![Row::new("coverage", Cell::Na, "m").d(2)];
        let mut buf = Vec::new();
        write_rows(&mut buf, &rows, &meta(false), Format::Jsonl).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let v: Json = serde_json::from_str(text.lines().nth(1).unwrap()).unwrap();
        assert_eq!(v["estimate"], "NA");
        assert_eq!(v["d"], 2);
        assert!(v["r"].is_null());
        assert_eq!(v.as_object().unwrap().len(), COLUMNS.len());
    }
}
