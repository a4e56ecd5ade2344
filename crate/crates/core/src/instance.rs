//! Line-oriented text format for desk-scale instances.
//!
//! ```text
//! # comment
//! [function]
//! rows = 2
//! cols = 2
//! 1*
//! 01
//!
//! [protocol]
//! qubits = 1
//! epsilon = 0.0001
//! prior_budget = 1
//!
//! [messages]
//! x = 0
//! 1,0 0,0
//! 0,0 0,0
//! ```
//!
//! Other sections: `[measurements]` (blocks `y = k`), `[prior]` (one matrix), `[majix]`
//! (`n`, `x` as a bit string, `indices`), `[lsd]` (`dim`, then `v = ...` and `w = ...` rows),
//! `[pair]` (blocks `rho`, `sigma`, optional `projector`) and `[run]` (free `key = value`
//! settings used by replay files). Matrix entries are `re,im` or a bare real.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::function::{Cell, PartialFunction};
use crate::lsd::LsdInstance;
use crate::majix::MajIxInstance;
use crate::matrix::Matrix;
use crate::protocol::QuantumOneWayProtocol;
use crate::state::{DensityMatrix, Projector};

/// Two states and an optional projector, as used by the inequality sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePair {
    pub rho: DensityMatrix<f64>,
    pub sigma: DensityMatrix<f64>,
    pub projector: Option<Projector<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Function(PartialFunction),
    Protocol { function: PartialFunction, protocol: QuantumOneWayProtocol },
    MajIx(MajIxInstance),
    Lsd(LsdInstance),
    Pair(StatePair),
}

impl Instance {
    pub fn kind(&self) -> &'static str {
        match self {
            Instance::Function(_) => "function",
            Instance::Protocol { .. } => "protocol",
            Instance::MajIx(_) => "majix",
            Instance::Lsd(_) => "lsd",
            Instance::Pair(_) => "pair",
        }
    }
}

/// A parsed file: the instance plus its `[run]` settings.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceFile {
    pub instance: Instance,
    pub run: BTreeMap<String, String>,
}

impl InstanceFile {
    pub fn new(instance: Instance) -> Self {
        Self { instance, run: BTreeMap::new() }
    }

    pub fn with_setting(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.run.insert(key.into(), value.to_string());
        self
    }
}

const SECTIONS: [&str; 9] = ["function", "protocol", "messages", "measurements", "prior", "majix", "lsd", "pair", "run"];

#[derive(Debug, Clone, Copy)]
struct Line<'a> {
    number: usize,
    text: &'a str,
    /// Byte offset of `text` within the original line.
    offset: usize,
}

impl<'a> Line<'a> {
    fn error(&self, at: &str, message: impl Into<String>) -> Error {
        let column = column_of(self, at);
        Error::Parse { line: self.number, column, message: message.into() }
    }

    /// `key = value`, or `key` alone.
    fn key_value(&self) -> (&'a str, Option<&'a str>) {
        match self.text.split_once('=') {
            Some((k, v)) => (k.trim(), Some(v.trim())),
            None => (self.text.trim(), None),
        }
    }

    fn is_data(&self) -> bool {
        self.text.trim_start().starts_with(|c: char| c.is_ascii_digit() || matches!(c, '-' | '+' | '.'))
    }
}

fn column_of(line: &Line<'_>, at: &str) -> usize {
    let base = line.text.as_ptr() as usize;
    let ptr = at.as_ptr() as usize;
    let within = if ptr >= base && ptr <= base + line.text.len() { ptr - base } else { 0 };
    line.text[..within].chars().count() + line.offset + 1
}

struct Section<'a> {
    header: Line<'a>,
    lines: Vec<Line<'a>>,
}

fn split_sections(text: &str) -> Result<BTreeMap<&str, Section<'_>>> {
    let mut sections: BTreeMap<&str, Section<'_>> = BTreeMap::new();
    let mut current: Option<&str> = None;
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        let offset = body.len() - body.trim_start().len();
        let line = Line { number: i + 1, text: trimmed, offset };
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| line.error(trimmed, "unterminated section header"))?
                .trim();
            let name = SECTIONS
                .iter()
                .copied()
                .find(|&s| s == name)
                .ok_or_else(|| line.error(trimmed, format!("unknown section [{name}]")))?;
            if sections.contains_key(name) {
                return Err(line.error(trimmed, format!("duplicate section [{name}]")));
            }
            sections.insert(name, Section { header: line, lines: Vec::new() });
            current = Some(name);
        } else {
            let name = current.ok_or_else(|| line.error(trimmed, "content before the first section"))?;
            sections.get_mut(name).expect("current section exists").lines.push(line);
        }
    }
    Ok(sections)
}

fn parse_num<T: std::str::FromStr>(line: &Line<'_>, token: &str, what: &str) -> Result<T> {
    token.parse().map_err(|_| line.error(token, format!("expected {what}, found `{token}`")))
}

fn parse_entry(line: &Line<'_>, token: &str) -> Result<Complex<f64>> {
    match token.split_once(',') {
        Some((re, im)) => Ok(Complex::new(parse_num(line, re, "a real part")?, parse_num(line, im, "an imaginary part")?)),
        None => Ok(Complex::new(parse_num(line, token, "a number")?, 0.0)),
    }
}

/// Settings of the form `key = value` in a section without data rows.
fn settings<'a>(section: &Section<'a>, allowed: &[&str]) -> Result<BTreeMap<&'a str, (Line<'a>, &'a str)>> {
    let mut out = BTreeMap::new();
    for line in &section.lines {
        let (key, value) = line.key_value();
        let value = value.ok_or_else(|| line.error(line.text, "expected `key = value`"))?;
        if !allowed.is_empty() && !allowed.contains(&key) {
            return Err(line.error(key, format!("unknown key `{key}`")));
        }
        if out.insert(key, (*line, value)).is_some() {
            return Err(line.error(key, format!("duplicate key `{key}`")));
        }
    }
    Ok(out)
}

fn required<'a>(
    map: &BTreeMap<&str, (Line<'a>, &'a str)>,
    section: &Section<'a>,
    key: &str,
) -> Result<(Line<'a>, &'a str)> {
    map.get(key).copied().ok_or_else(|| {
        section.header.error(section.header.text, format!("missing `{key}`"))
    })
}

struct Block<'a> {
    label: Line<'a>,
    key: &'a str,
    value: Option<&'a str>,
    rows: Vec<Line<'a>>,
}

fn blocks<'a>(section: &Section<'a>) -> Result<Vec<Block<'a>>> {
    let mut out: Vec<Block<'a>> = Vec::new();
    for line in &section.lines {
        if line.is_data() {
            let block = out.last_mut().ok_or_else(|| line.error(line.text, "matrix row before a block label"))?;
            block.rows.push(*line);
        } else {
            let (key, value) = line.key_value();
            out.push(Block { label: *line, key, value, rows: Vec::new() });
        }
    }
    Ok(out)
}

fn matrix_rows(label: &Line<'_>, rows: &[Line<'_>]) -> Result<Matrix<f64>> {
    if rows.is_empty() {
        return Err(label.error(label.text, "block has no matrix rows"));
    }
    let dim = rows.len();
    let mut data = Vec::with_capacity(dim);
    for row in rows {
        let entries: Vec<&str> = row.text.split_whitespace().collect();
        if entries.len() != dim {
            let at = entries.get(dim).copied().unwrap_or(row.text);
            return Err(row.error(at, format!("expected {dim} entries for a square matrix, found {}", entries.len())));
        }
        data.push(entries.iter().map(|t| parse_entry(row, t)).collect::<Result<Vec<_>>>()?);
    }
    Matrix::from_rows(data)
}

fn located(err: Error, line: &Line<'_>, what: &str) -> Error {
    match err {
        Error::Invariant { invariant, detail } => {
            Error::Invariant { invariant, detail: format!("{what} (line {}): {detail}", line.number) }
        }
        other => other,
    }
}

fn indexed_blocks<'a>(section: &Section<'a>, key: &str) -> Result<Vec<(Line<'a>, Matrix<f64>)>> {
    let mut out = Vec::new();
    for block in blocks(section)? {
        if block.key != key {
            return Err(block.label.error(block.key, format!("expected `{key} = <index>`")));
        }
        let value = block.value.ok_or_else(|| block.label.error(block.label.text, format!("expected `{key} = <index>`")))?;
        let index: usize = parse_num(&block.label, value, "an index")?;
        if index != out.len() {
            return Err(block.label.error(value, format!("expected {key} = {}", out.len())));
        }
        out.push((block.label, matrix_rows(&block.label, &block.rows)?));
    }
    if out.is_empty() {
        return Err(section.header.error(section.header.text, "section is empty"));
    }
    Ok(out)
}

fn parse_function(section: &Section<'_>) -> Result<PartialFunction> {
    let mut rows_decl = None;
    let mut cols_decl = None;
    let mut table: Vec<(Line<'_>, Vec<Cell>)> = Vec::new();
    for line in &section.lines {
        let (key, value) = line.key_value();
        if let Some(value) = value {
            let n: usize = parse_num(line, value, "a count")?;
            match key {
                "rows" => rows_decl = Some(n),
                "cols" => cols_decl = Some(n),
                _ => return Err(line.error(key, format!("unknown key `{key}`"))),
            }
            continue;
        }
        let mut cells = Vec::new();
        for (i, c) in line.text.char_indices().filter(|(_, c)| !c.is_whitespace()) {
            let cell = Cell::from_symbol(c).ok_or_else(|| line.error(&line.text[i..], format!("unexpected symbol `{c}`")))?;
            cells.push(cell);
        }
        table.push((*line, cells));
    }
    let header = &section.header;
    let rows = rows_decl.ok_or_else(|| header.error(header.text, "missing `rows`"))?;
    let cols = cols_decl.ok_or_else(|| header.error(header.text, "missing `cols`"))?;
    if table.len() != rows {
        return Err(header.error(header.text, format!("declared {rows} rows, found {}", table.len())));
    }
    let mut cells = Vec::with_capacity(rows * cols);
    for (line, row) in table {
        if row.len() != cols {
            return Err(line.error(line.text, format!("expected {cols} symbols, found {}", row.len())));
        }
        cells.extend(row);
    }
    PartialFunction::new(rows, cols, cells)
}

fn parse_protocol(sections: &BTreeMap<&str, Section<'_>>, function: PartialFunction) -> Result<Instance> {
    let header = &sections["protocol"];
    let map = settings(header, &["qubits", "epsilon", "prior_budget"])?;
    let (ql, qv) = required(&map, header, "qubits")?;
    let qubits: usize = parse_num(&ql, qv, "a qubit count")?;
    let (el, ev) = required(&map, header, "epsilon")?;
    let epsilon: f64 = parse_num(&el, ev, "epsilon")?;
    let budget = map.get("prior_budget").map(|(l, v)| parse_num::<f64>(l, v, "a budget")).transpose()?;

    let section = |name: &str| {
        sections.get(name).ok_or_else(|| header.header.error(header.header.text, format!("protocol needs a [{name}] section")))
    };
    let messages = indexed_blocks(section("messages")?, "x")?
        .into_iter()
        .enumerate()
        .map(|(x, (line, m))| DensityMatrix::new(m).map_err(|e| located(e, &line, &format!("message x = {x}"))))
        .collect::<Result<Vec<_>>>()?;
    let measurements = indexed_blocks(section("measurements")?, "y")?
        .into_iter()
        .enumerate()
        .map(|(y, (line, m))| Projector::new(m).map_err(|e| located(e, &line, &format!("measurement y = {y}"))))
        .collect::<Result<Vec<_>>>()?;
    let prior = match sections.get("prior") {
        Some(s) => {
            let m = matrix_rows(&s.header, &s.lines)?;
            Some(DensityMatrix::new(m).map_err(|e| located(e, &s.header, "prior"))?)
        }
        None => None,
    };
    if messages.len() != function.x_count() || measurements.len() != function.y_count() {
        return Err(Error::DimensionMismatch(format!(
            "{} messages and {} measurements for a {} x {} function",
            messages.len(),
            measurements.len(),
            function.x_count(),
            function.y_count()
        )));
    }
    let protocol = QuantumOneWayProtocol::new(qubits, epsilon, messages, measurements, prior, budget)?;
    Ok(Instance::Protocol { function, protocol })
}

fn parse_majix(section: &Section<'_>) -> Result<MajIxInstance> {
    let map = settings(section, &["n", "x", "indices"])?;
    let (nl, nv) = required(&map, section, "n")?;
    let n: usize = parse_num(&nl, nv, "n")?;
    let (xl, xv) = required(&map, section, "x")?;
    let x = xv
        .char_indices()
        .map(|(i, c)| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(xl.error(&xv[i..], format!("unexpected bit `{c}`"))),
        })
        .collect::<Result<Vec<bool>>>()?;
    if x.len() != n {
        return Err(xl.error(xv, format!("expected {n} bits, found {}", x.len())));
    }
    let (il, iv) = required(&map, section, "indices")?;
    let indices = iv.split_whitespace().map(|t| parse_num(&il, t, "an index")).collect::<Result<Vec<usize>>>()?;
    MajIxInstance::new(x, indices)
}

fn parse_lsd(section: &Section<'_>) -> Result<LsdInstance> {
    let mut dim = None;
    let (mut v, mut w) = (Vec::new(), Vec::new());
    for line in &section.lines {
        let (key, value) = line.key_value();
        let value = value.ok_or_else(|| line.error(line.text, "expected `key = value`"))?;
        match key {
            "dim" => dim = Some(parse_num::<usize>(line, value, "a dimension")?),
            "v" | "w" => {
                let row = value.split_whitespace().map(|t| parse_num(line, t, "a real")).collect::<Result<Vec<f64>>>()?;
                if key == "v" { v.push(row) } else { w.push(row) }
            }
            _ => return Err(line.error(key, format!("unknown key `{key}`"))),
        }
    }
    let dim = dim.ok_or_else(|| section.header.error(section.header.text, "missing `dim`"))?;
    LsdInstance::new(dim, v, w)
}

fn parse_pair(section: &Section<'_>) -> Result<StatePair> {
    let (mut rho, mut sigma, mut projector) = (None, None, None);
    for block in blocks(section)? {
        if block.value.is_some() {
            return Err(block.label.error(block.label.text, "pair blocks are bare labels"));
        }
        let m = matrix_rows(&block.label, &block.rows)?;
        let slot_taken = match block.key {
            "rho" => rho.replace(DensityMatrix::new(m).map_err(|e| located(e, &block.label, "rho"))?).is_some(),
            "sigma" => sigma.replace(DensityMatrix::new(m).map_err(|e| located(e, &block.label, "sigma"))?).is_some(),
            "projector" => {
                projector.replace(Projector::new(m).map_err(|e| located(e, &block.label, "projector"))?).is_some()
            }
            other => return Err(block.label.error(other, format!("unknown block `{other}`"))),
        };
        if slot_taken {
            return Err(block.label.error(block.key, format!("duplicate block `{}`", block.key)));
        }
    }
    let header = &section.header;
    let rho = rho.ok_or_else(|| header.error(header.text, "missing `rho`"))?;
    let sigma = sigma.ok_or_else(|| header.error(header.text, "missing `sigma`"))?;
    if rho.dim() != sigma.dim() || projector.as_ref().is_some_and(|p: &Projector<f64>| p.dim() != rho.dim()) {
        return Err(Error::DimensionMismatch("pair members differ in dimension".into()));
    }
    Ok(StatePair { rho, sigma, projector })
}

pub fn parse_instance(text: &str) -> Result<InstanceFile> {
    let sections = split_sections(text)?;
    let run = match sections.get("run") {
        Some(s) => settings(s, &[])?.into_iter().map(|(k, (_, v))| (k.to_string(), v.to_string())).collect(),
        None => BTreeMap::new(),
    };
    let present: Vec<&str> = sections.keys().copied().filter(|&k| k != "run").collect();
    let only = |allowed: &[&str]| present.iter().all(|k| allowed.contains(k));
    let instance = if let Some(s) = sections.get("majix") {
        if !only(&["majix"]) {
            return Err(s.header.error(s.header.text, "[majix] cannot be combined with other instance sections"));
        }
        Instance::MajIx(parse_majix(s)?)
    } else if let Some(s) = sections.get("lsd") {
        if !only(&["lsd"]) {
            return Err(s.header.error(s.header.text, "[lsd] cannot be combined with other instance sections"));
        }
        Instance::Lsd(parse_lsd(s)?)
    } else if let Some(s) = sections.get("pair") {
        if !only(&["pair"]) {
            return Err(s.header.error(s.header.text, "[pair] cannot be combined with other instance sections"));
        }
        Instance::Pair(parse_pair(s)?)
    } else if let Some(s) = sections.get("function") {
        let function = parse_function(s)?;
        if sections.contains_key("protocol") {
            parse_protocol(&sections, function)?
        } else {
            if let Some(extra) = present.iter().find(|&&k| k != "function") {
                let h = &sections[extra].header;
                return Err(h.error(h.text, format!("[{extra}] needs a [protocol] section")));
            }
            Instance::Function(function)
        }
    } else {
        return Err(Error::Parse { line: 1, column: 1, message: "no instance section found".into() });
    };
    Ok(InstanceFile { instance, run })
}

fn write_matrix(out: &mut String, m: &Matrix<f64>) {
    for i in 0..m.dim() {
        let row: Vec<String> = m.row(i).iter().map(|z| format!("{:?},{:?}", z.re, z.im)).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
}

fn write_function(out: &mut String, f: &PartialFunction) {
    let _ = writeln!(out, "[function]\nrows = {}\ncols = {}", f.x_count(), f.y_count());
    for x in 0..f.x_count() {
        let row: String = f.row(x).iter().map(|c| c.symbol()).collect();
        let _ = writeln!(out, "{row}");
    }
}

/// Text that [`parse_instance`] maps back to an equal value.
pub fn serialize_instance(file: &InstanceFile) -> String {
    let mut out = String::new();
    match &file.instance {
        Instance::Function(f) => write_function(&mut out, f),
        Instance::Protocol { function, protocol } => {
            write_function(&mut out, function);
            let _ = writeln!(
                out,
                "\n[protocol]\nqubits = {}\nepsilon = {:?}\nprior_budget = {:?}\n\n[messages]",
                protocol.qubits(),
                protocol.epsilon(),
                protocol.prior_budget()
            );
            for (x, m) in protocol.messages().iter().enumerate() {
                let _ = writeln!(out, "x = {x}");
                write_matrix(&mut out, m.matrix());
            }
            out.push_str("\n[measurements]\n");
            for (y, p) in protocol.measurements().iter().enumerate() {
                let _ = writeln!(out, "y = {y}");
                write_matrix(&mut out, p.matrix());
            }
            out.push_str("\n[prior]\n");
            write_matrix(&mut out, protocol.prior().matrix());
        }
        Instance::MajIx(inst) => {
            let bits: String = inst.x().iter().map(|&b| if b { '1' } else { '0' }).collect();
            let idx: Vec<String> = inst.indices().iter().map(|i| i.to_string()).collect();
            let _ = writeln!(out, "[majix]\nn = {}\nx = {bits}\nindices = {}", inst.n(), idx.join(" "));
        }
        Instance::Lsd(inst) => {
            let _ = writeln!(out, "[lsd]\ndim = {}", inst.dim());
            for (key, basis) in [("v", inst.v()), ("w", inst.w())] {
                for row in basis {
                    let vals: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
                    let _ = writeln!(out, "{key} = {}", vals.join(" "));
                }
            }
        }
        Instance::Pair(pair) => {
            out.push_str("[pair]\nrho\n");
            write_matrix(&mut out, pair.rho.matrix());
            out.push_str("sigma\n");
            write_matrix(&mut out, pair.sigma.matrix());
            if let Some(p) = &pair.projector {
                out.push_str("projector\n");
                write_matrix(&mut out, p.matrix());
            }
        }
    }
    if !file.run.is_empty() {
        out.push_str("\n[run]\n");
        for (k, v) in &file.run {
            let _ = writeln!(out, "{k} = {v}");
        }
    }
    out
}
