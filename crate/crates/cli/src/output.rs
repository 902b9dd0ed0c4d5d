use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Buffered writer to a file, or stdout when no path is given.
pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Comment block opening every CSV file: command, schema version and the
/// resolved configuration as one line of JSON.
pub fn csv_header<W: Write + ?Sized>(
    w: &mut W,
    command: &str,
    config: &impl Serialize,
    extra: &[(&str, Value)],
) -> Result<(), CliError> {
    writeln!(w, "# aggint {command}")?;
    writeln!(w, "# schema_version = {SCHEMA_VERSION}")?;
    writeln!(w, "# config = {}", serde_json::to_string(config)?)?;
    for (key, value) in extra {
        writeln!(w, "# {key} = {}", serde_json::to_string(value)?)?;
    }
    Ok(())
}

pub fn write_row<W: Write + ?Sized>(w: &mut W, cells: &[Cell]) -> io::Result<()> {
    let line: Vec<String> = cells.iter().map(Cell::render).collect();
    writeln!(w, "{}", line.join(","))
}

pub enum Cell {
    Num(f64),
    Text(&'static str),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:e}"),
            Cell::Text(s) => (*s).to_string(),
            Cell::Empty => String::new(),
        }
    }
}

/// JSON document with the common envelope fields.
pub fn json_document(command: &str, config: &impl Serialize, body: Value) -> Result<Value, CliError> {
    let mut doc = json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": serde_json::to_value(config)?,
    });
    if let (Value::Object(out), Value::Object(extra)) = (&mut doc, body) {
        out.extend(extra);
    }
    Ok(doc)
}

pub fn write_json(path: &Path, doc: &Value) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, doc)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// JSON cannot hold non-finite numbers; map them to strings.
pub fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(v.to_string())
    }
}
