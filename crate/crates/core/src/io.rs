//! Plain-text formats: edge-list TSV, vertex-set files, point CSV and
//! per-vertex CSV tables.
//!
//! Edge lists are `src<TAB>dst<TAB>weight` with 0-based ids. Blank lines and
//! `#` comments are skipped, except for an optional `# n=<count>` line that
//! fixes the vertex count (otherwise the largest id seen plus one).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{build_graph, Graph};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EdgeList {
    pub n: Option<usize>,
    pub edges: Vec<(usize, usize, f64)>,
}

impl EdgeList {
    /// Vertex count implied by the directive, the edges and `extra` ids.
    pub fn vertex_count(&self, extra: &[usize]) -> usize {
        let seen = self
            .edges
            .iter()
            .flat_map(|&(s, d, _)| [s, d])
            .chain(extra.iter().copied())
            .map(|i| i + 1)
            .max()
            .unwrap_or(0);
        self.n.unwrap_or(seen)
    }

    pub fn into_graph(self, absorbing: &[usize]) -> Result<Graph> {
        let n = self.vertex_count(absorbing);
        build_graph(n, &self.edges, absorbing)
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_id(tok: &str, line: usize) -> Result<usize> {
    tok.trim().parse().map_err(|_| parse_err(line, format!("bad vertex id {tok:?}")))
}

pub fn read_edge_list<R: Read>(reader: R) -> Result<EdgeList> {
    let mut out = EdgeList::default();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let t = line.trim();
        if let Some(comment) = t.strip_prefix('#') {
            if let Some(v) = comment.trim().strip_prefix("n=") {
                out.n = Some(parse_id(v, lineno)?);
            }
            continue;
        }
        if t.is_empty() {
            continue;
        }
        let fields: Vec<&str> = t.split('\t').collect();
        if fields.len() != 3 {
            return Err(parse_err(lineno, format!("expected 3 tab-separated fields, got {}", fields.len())));
        }
        let w: f64 = fields[2].trim().parse().map_err(|_| parse_err(lineno, format!("bad weight {:?}", fields[2])))?;
        out.edges.push((parse_id(fields[0], lineno)?, parse_id(fields[1], lineno)?, w));
    }
    Ok(out)
}

pub fn write_edge_list<W: Write>(g: &Graph, mut w: W) -> Result<()> {
    writeln!(w, "# n={}", g.n())?;
    for (i, j, p) in g.edges() {
        writeln!(w, "{i}\t{j}\t{p}")?;
    }
    w.flush()?;
    Ok(())
}

/// One id per line, `#` comments allowed.
pub fn read_vertex_set<R: Read>(reader: R) -> Result<Vec<usize>> {
    let mut ids = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let t = line.split('#').next().unwrap_or("").trim();
        if !t.is_empty() {
            ids.push(parse_id(t, idx + 1)?);
        }
    }
    Ok(ids)
}

pub fn write_vertex_set<W: Write>(ids: &[usize], mut w: W) -> Result<()> {
    for i in ids {
        writeln!(w, "{i}")?;
    }
    w.flush()?;
    Ok(())
}

/// Comma-separated ids as given on a command line, e.g. `0,9`.
pub fn parse_vertex_list(s: &str) -> Result<Vec<usize>> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(|t| parse_id(t, 0)).collect()
}

/// Loads an edge list and an optional vertex-set file as absorbing vertices.
pub fn load_graph(edges: &Path, absorbing: &[usize]) -> Result<Graph> {
    read_edge_list(File::open(edges)?)?.into_graph(absorbing)
}

pub fn load_vertex_set(path: &Path) -> Result<Vec<usize>> {
    read_vertex_set(File::open(path)?)
}

/// `x,y` rows; a first line that does not parse as numbers is a header.
pub fn read_points_csv<R: Read>(reader: R) -> Result<Vec<[f64; 2]>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut points = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(idx + 1, e.to_string()))?;
        if rec.len() != 2 {
            return Err(parse_err(idx + 1, format!("expected 2 columns, got {}", rec.len())));
        }
        match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
            (Ok(x), Ok(y)) if x.is_finite() && y.is_finite() => points.push([x, y]),
            _ if idx == 0 => continue,
            _ => return Err(parse_err(idx + 1, "non-numeric coordinate")),
        }
    }
    Ok(points)
}

pub fn write_points_csv<W: Write>(points: &[[f64; 2]], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["x", "y"]).map_err(csv_err)?;
    for p in points {
        wtr.write_record([p[0].to_string(), p[1].to_string()]).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Column-oriented table written as CSV. All columns must have equal length.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub columns: Vec<Vec<String>>,
}

impl Table {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn column<T: ToString>(mut self, name: &str, values: impl IntoIterator<Item = T>) -> Self {
        self.header.push(name.to_string());
        self.columns.push(values.into_iter().map(|v| v.to_string()).collect());
        self
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn write<W: Write>(&self, w: W) -> Result<()> {
        let rows = self.rows();
        if let Some(bad) = self.columns.iter().find(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch { expected: rows, got: bad.len() });
        }
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(&self.header).map_err(csv_err)?;
        for r in 0..rows {
            wtr.write_record(self.columns.iter().map(|c| c[r].as_str())).map_err(csv_err)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write(BufWriter::new(File::create(path)?))
    }
}
