//! File formats: Matrix Market graphs and count matrices, label CSVs, price
//! panel CSVs, and a debug dump for spectral bases.

use crate::error::{Error, Result};
use crate::graph::SignedGraph;
use crate::mbo::Assignment;
use crate::pipelines::{CountsMatrix, TimeSeriesPanel};
use crate::spectral::SpectralBasis;
use nalgebra::DMatrix;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

/// Writes a signed graph as `matrix coordinate real symmetric`, one entry
/// per undirected edge (lower triangle), with a comment recording the node
/// count and a provenance string.
pub fn write_graph_mm(path: &Path, graph: &SignedGraph, provenance: &str) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(out, "% nodes={} provenance={}", graph.node_count(), provenance)?;
    writeln!(
        out,
        "{} {} {}",
        graph.node_count(),
        graph.node_count(),
        graph.edge_count()
    )?;
    for e in graph.edges() {
        // row >= col per the symmetric storage convention
        writeln!(out, "{} {} {}", e.j + 1, e.i + 1, e.w)?;
    }
    out.flush()?;
    Ok(())
}

struct MmHeader {
    symmetric: bool,
    pattern: bool,
    rows: usize,
    cols: usize,
    nnz: usize,
    provenance: Option<String>,
    body_start: usize,
}

fn read_mm_header(path: &Path, lines: &[String]) -> Result<MmHeader> {
    let first = lines
        .first()
        .ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let fields: Vec<&str> = first.split_whitespace().collect();
    if fields.len() < 5 || fields[0] != "%%MatrixMarket" || fields[1] != "matrix" {
        return Err(parse_err(path, 1, "expected a MatrixMarket matrix header"));
    }
    if fields[2] != "coordinate" {
        return Err(parse_err(path, 1, "only coordinate format is supported"));
    }
    let pattern = match fields[3] {
        "real" | "integer" => false,
        "pattern" => true,
        other => {
            return Err(parse_err(
                path,
                1,
                format!("unsupported value type {other:?}"),
            ))
        }
    };
    let symmetric = match fields[4] {
        "symmetric" => true,
        "general" => false,
        other => {
            return Err(parse_err(
                path,
                1,
                format!("unsupported symmetry {other:?}"),
            ))
        }
    };
    let mut provenance = None;
    let mut idx = 1;
    while idx < lines.len() && lines[idx].trim_start().starts_with('%') {
        if let Some(pos) = lines[idx].find("provenance=") {
            provenance = Some(lines[idx][pos + "provenance=".len()..].trim().to_string());
        }
        idx += 1;
    }
    let size_line = lines
        .get(idx)
        .ok_or_else(|| parse_err(path, idx + 1, "missing size line"))?;
    let dims: Vec<&str> = size_line.split_whitespace().collect();
    if dims.len() != 3 {
        return Err(parse_err(path, idx + 1, "size line must be `rows cols nnz`"));
    }
    let parse = |s: &str| -> Result<usize> {
        s.parse()
            .map_err(|_| parse_err(path, idx + 1, format!("bad integer {s:?}")))
    };
    Ok(MmHeader {
        symmetric,
        pattern,
        rows: parse(dims[0])?,
        cols: parse(dims[1])?,
        nnz: parse(dims[2])?,
        provenance,
        body_start: idx + 1,
    })
}

fn read_mm_entries(
    path: &Path,
    lines: &[String],
    header: &MmHeader,
) -> Result<Vec<(u32, u32, f64)>> {
    let mut entries = Vec::with_capacity(header.nnz);
    for (offset, line) in lines[header.body_start..].iter().enumerate() {
        let lineno = header.body_start + offset + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let expected = if header.pattern { 2 } else { 3 };
        if fields.len() < expected {
            return Err(parse_err(path, lineno, "too few fields in entry"));
        }
        let r: usize = fields[0]
            .parse()
            .map_err(|_| parse_err(path, lineno, "bad row index"))?;
        let c: usize = fields[1]
            .parse()
            .map_err(|_| parse_err(path, lineno, "bad column index"))?;
        if r < 1 || r > header.rows || c < 1 || c > header.cols {
            return Err(parse_err(path, lineno, "index out of range"));
        }
        let w: f64 = if header.pattern {
            1.0
        } else {
            fields[2]
                .parse()
                .map_err(|_| parse_err(path, lineno, "bad value"))?
        };
        entries.push((r as u32 - 1, c as u32 - 1, w));
    }
    if entries.len() != header.nnz {
        return Err(parse_err(
            path,
            lines.len(),
            format!("expected {} entries, found {}", header.nnz, entries.len()),
        ));
    }
    Ok(entries)
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    BufReader::new(File::open(path)?)
        .lines()
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(Error::from)
}

/// Reads a symmetric Matrix Market file as a signed graph, returning the
/// provenance comment when present.
pub fn read_graph_mm(path: &Path) -> Result<(SignedGraph, Option<String>)> {
    let lines = read_lines(path)?;
    let header = read_mm_header(path, &lines)?;
    if !header.symmetric {
        return Err(parse_err(path, 1, "graph file must be symmetric"));
    }
    if header.rows != header.cols {
        return Err(parse_err(path, 1, "graph matrix must be square"));
    }
    let entries = read_mm_entries(path, &lines, &header)?;
    let graph = SignedGraph::from_edges(header.rows, entries)?;
    Ok((graph, header.provenance))
}

/// Reads a general (possibly asymmetric) Matrix Market file as a count
/// matrix. Symmetric files are expanded.
pub fn read_counts_mm(path: &Path) -> Result<CountsMatrix> {
    let lines = read_lines(path)?;
    let header = read_mm_header(path, &lines)?;
    if header.rows != header.cols {
        return Err(parse_err(path, 1, "count matrix must be square"));
    }
    let mut entries = read_mm_entries(path, &lines, &header)?;
    if header.symmetric {
        let mirrored: Vec<(u32, u32, f64)> = entries
            .iter()
            .filter(|(r, c, _)| r != c)
            .map(|&(r, c, w)| (c, r, w))
            .collect();
        entries.extend(mirrored);
    }
    CountsMatrix::new(header.rows, entries)
}

/// Writes `node_id,label` rows (both 1-based).
pub fn write_labels_csv(path: &Path, assignment: &Assignment) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "node_id,label")?;
    for (i, &label) in assignment.as_slice().iter().enumerate() {
        writeln!(out, "{},{}", i + 1, label)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads labels written by [`write_labels_csv`]; rows may appear in any
/// order but must cover 1..=V exactly.
pub fn read_labels_csv(path: &Path) -> Result<Vec<u32>> {
    let lines = read_lines(path)?;
    let mut rows: Vec<(usize, u32)> = Vec::new();
    for (idx, line) in lines.iter().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || (idx == 0 && trimmed.starts_with("node_id")) {
            continue;
        }
        let mut fields = trimmed.split(',');
        let node: usize = fields
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| parse_err(path, idx + 1, "bad node id"))?;
        let label: u32 = fields
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| parse_err(path, idx + 1, "bad label"))?;
        rows.push((node, label));
    }
    rows.sort_unstable();
    let v = rows.len();
    let mut labels = Vec::with_capacity(v);
    for (expected, (node, label)) in rows.into_iter().enumerate() {
        if node != expected + 1 {
            return Err(parse_err(
                path,
                0,
                format!("node ids must cover 1..={v}; missing {}", expected + 1),
            ));
        }
        labels.push(label);
    }
    Ok(labels)
}

/// Reads a price panel CSV: header `date,ID1,ID2,...`, one ISO date plus one
/// price per instrument per row.
pub fn read_panel_csv(path: &Path) -> Result<TimeSeriesPanel> {
    let lines = read_lines(path)?;
    let header = lines
        .first()
        .ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let ids: Vec<String> = header
        .split(',')
        .skip(1)
        .map(|s| s.trim().to_string())
        .collect();
    if ids.is_empty() {
        return Err(parse_err(path, 1, "no instrument columns"));
    }
    let mut dates = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in lines.iter().enumerate().skip(1) {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != ids.len() + 1 {
            return Err(parse_err(
                path,
                idx + 1,
                format!("expected {} fields, got {}", ids.len() + 1, fields.len()),
            ));
        }
        dates.push(fields[0].trim().to_string());
        let mut row = Vec::with_capacity(ids.len());
        for f in &fields[1..] {
            row.push(
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| parse_err(path, idx + 1, format!("bad price {f:?}")))?,
            );
        }
        columns.push(row);
    }
    let t = dates.len();
    let n = ids.len();
    let prices = DMatrix::from_fn(n, t, |i, s| columns[s][i]);
    TimeSeriesPanel::new(ids, dates, prices)
}

/// Debug dump: first row holds the eigenvalues, following rows the
/// eigenvector components per node. No stability promises.
pub fn write_basis_csv(path: &Path, basis: &SpectralBasis) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let m = basis.m();
    let header: Vec<String> = (0..m).map(|j| format!("pair_{j}")).collect();
    writeln!(out, "{}", header.join(","))?;
    let eigenvalues: Vec<String> = basis.eigenvalues().iter().map(|l| l.to_string()).collect();
    writeln!(out, "{}", eigenvalues.join(","))?;
    for i in 0..basis.node_count() {
        let row: Vec<String> = (0..m)
            .map(|j| basis.eigenvectors()[(i, j)].to_string())
            .collect();
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    Ok(())
}
