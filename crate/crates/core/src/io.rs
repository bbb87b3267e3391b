//! Line-based text formats for models, configurations, odometers and simulation instances.
//!
//! ```text
//! sandpile-model v1 d=2
//! 1 0 1
//! -1 0 1
//! ```
//! Configurations use `sandpile-config v1 d=<d>` and `<x1> .. <xd> <count>` lines;
//! odometers the same with `sandpile-odometer v1 d=<d>`. `#` starts a comment.

use std::fmt::Write;

use crate::cell::Cell;
use crate::config::{Configuration, Odometer};
use crate::error::{Error, Result};
use crate::model::SandpileModel;

/// Non-empty lines with comments stripped, numbered from 1.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn parse_header(line: Option<(usize, &str)>, kind: &str) -> Result<usize> {
    let (no, l) = line.ok_or_else(|| Error::parse(1, format!("missing `{kind} v1 d=<d>` header")))?;
    let toks: Vec<&str> = l.split_whitespace().collect();
    if toks.len() != 3 || toks[0] != kind || toks[1] != "v1" {
        return Err(Error::parse(no, format!("expected `{kind} v1 d=<d>`, found {l:?}")));
    }
    let d = toks[2]
        .strip_prefix("d=")
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&d| d > 0)
        .ok_or_else(|| Error::parse(no, format!("bad dimension field {:?}", toks[2])))?;
    Ok(d)
}

fn parse_ints(no: usize, l: &str, want: usize) -> Result<Vec<i64>> {
    let v: Vec<i64> = l
        .split_whitespace()
        .map(|t| t.parse::<i64>().map_err(|_| Error::parse(no, format!("not an integer: {t:?}"))))
        .collect::<Result<_>>()?;
    if v.len() != want {
        return Err(Error::parse(no, format!("expected {want} integers, found {}", v.len())));
    }
    Ok(v)
}

/// Cell lines of `<x1> .. <xd> <value>` with value ≥ 1 unless `allow_zero`.
fn parse_cell_lines<'a>(
    lines: impl Iterator<Item = (usize, &'a str)>,
    d: usize,
) -> Result<Vec<(usize, Cell, u64)>> {
    let mut out = Vec::new();
    for (no, l) in lines {
        let v = parse_ints(no, l, d + 1)?;
        if v[d] < 0 {
            return Err(Error::parse(no, "negative count"));
        }
        out.push((no, Cell::new(&v[..d]), v[d] as u64));
    }
    Ok(out)
}

pub fn parse_model(text: &str) -> Result<SandpileModel> {
    let mut lines = content_lines(text);
    let d = parse_header(lines.next(), "sandpile-model")?;
    let mut n = Vec::new();
    for (no, cell, w) in parse_cell_lines(lines, d)? {
        if w == 0 {
            return Err(Error::parse(no, "neighbor weight must be positive"));
        }
        if n.iter().any(|(c, _)| *c == cell) {
            return Err(Error::parse(no, format!("duplicate neighbor {cell}")));
        }
        n.push((cell, w));
    }
    SandpileModel::new(d, n)
}

pub fn write_model(m: &SandpileModel) -> String {
    let mut s = format!("sandpile-model v1 d={}\n", m.dim());
    for (v, w) in m.neighbors() {
        write_cell_line(&mut s, v, *w);
    }
    s
}

fn write_cell_line(s: &mut String, c: &Cell, k: u64) {
    for x in c.iter() {
        let _ = write!(s, "{x} ");
    }
    let _ = writeln!(s, "{k}");
}

pub fn parse_config(text: &str) -> Result<Configuration> {
    let mut lines = content_lines(text);
    let d = parse_header(lines.next(), "sandpile-config")?;
    let mut c = Configuration::new(d);
    for (no, cell, k) in parse_cell_lines(lines, d)? {
        c.add(&cell, k).map_err(|e| Error::parse(no, e.to_string()))?;
    }
    Ok(c)
}

pub fn write_config(c: &Configuration) -> String {
    let mut s = format!("sandpile-config v1 d={}\n", c.dim());
    for (x, k) in c.iter() {
        write_cell_line(&mut s, x, k);
    }
    s
}

pub fn parse_odometer(text: &str) -> Result<Odometer> {
    let mut lines = content_lines(text);
    let d = parse_header(lines.next(), "sandpile-odometer")?;
    let cells = parse_cell_lines(lines, d)?;
    Ok(Odometer::from_pairs(d, cells.into_iter().map(|(_, c, k)| (c, k))))
}

pub fn write_odometer(o: &Odometer) -> String {
    let mut s = format!("sandpile-odometer v1 d={}\n", o.dim());
    for (x, k) in o.iter() {
        write_cell_line(&mut s, x, k);
    }
    s
}

/// A simulation instance: stable configuration, trigger cell and optional detector cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceFile {
    pub configuration: Configuration,
    pub trigger: Cell,
    pub detector: Option<Cell>,
}

/// `sandpile-instance v1 d=<d>`, then `trigger <x..>`, optional `detector <y..>`, then cell lines.
pub fn parse_instance(text: &str) -> Result<InstanceFile> {
    let mut lines = content_lines(text);
    let d = parse_header(lines.next(), "sandpile-instance")?;
    let mut trigger = None;
    let mut detector = None;
    let mut c = Configuration::new(d);
    for (no, l) in lines {
        if let Some(rest) = l.strip_prefix("trigger") {
            trigger = Some(Cell::from(parse_ints(no, rest, d)?));
        } else if let Some(rest) = l.strip_prefix("detector") {
            detector = Some(Cell::from(parse_ints(no, rest, d)?));
        } else {
            let v = parse_ints(no, l, d + 1)?;
            if v[d] < 0 {
                return Err(Error::parse(no, "negative count"));
            }
            c.add(&Cell::new(&v[..d]), v[d] as u64).map_err(|e| Error::parse(no, e.to_string()))?;
        }
    }
    let trigger = trigger.ok_or_else(|| Error::parse(0, "missing `trigger` line"))?;
    Ok(InstanceFile { configuration: c, trigger, detector })
}

pub fn write_instance(inst: &InstanceFile) -> String {
    let mut s = format!("sandpile-instance v1 d={}\ntrigger", inst.configuration.dim());
    for x in inst.trigger.iter() {
        let _ = write!(s, " {x}");
    }
    s.push('\n');
    if let Some(y) = &inst.detector {
        s.push_str("detector");
        for x in y.iter() {
            let _ = write!(s, " {x}");
        }
        s.push('\n');
    }
    for (x, k) in inst.configuration.iter() {
        write_cell_line(&mut s, x, k);
    }
    s
}

/// Parses a whitespace or comma separated cell such as `3 -1` or `3,-1`.
pub fn parse_cell_arg(s: &str, d: usize) -> Result<Cell> {
    let v = parse_ints(1, &s.replace(',', " "), d)?;
    Ok(Cell::from(v))
}
