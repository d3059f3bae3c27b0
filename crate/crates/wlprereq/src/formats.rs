//! Text formats: edge lists, embeddings, pair files and run outputs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use wlprereq_core::predictor::Metrics;
use wlprereq_core::tuples::{PositionGraph, TupleSet};
use wlprereq_core::wl::ColorMap;
use wlprereq_core::{DirectedGraph, Error, Matrix};

use crate::error::{CliError, Result};

fn lines<'a, R: BufRead + 'a>(reader: R, origin: &'a str) -> impl Iterator<Item = Result<(usize, String)>> + 'a {
    reader
        .lines()
        .enumerate()
        .map(move |(i, l)| l.map(|l| (i + 1, l)).map_err(|e| CliError::parse(origin, i + 1, e.to_string())))
}

fn is_blank_or_comment(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

/// `source<TAB>target` per line; `#` lines and blank lines are skipped.
/// Node indices follow first appearance; duplicate lines collapse.
pub fn load_edge_list(reader: impl BufRead, origin: &str) -> Result<DirectedGraph> {
    let mut ids: Vec<String> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut edges = Vec::new();
    for item in lines(reader, origin) {
        let (no, line) = item?;
        if is_blank_or_comment(&line) {
            continue;
        }
        let fields: Vec<&str> = line.trim_end_matches('\r').split('\t').collect();
        if fields.len() != 2 || fields.iter().any(|f| f.is_empty()) {
            return Err(CliError::parse(origin, no, format!("expected `source<TAB>target`, got {:?}", line)));
        }
        if fields[0] == fields[1] {
            return Err(Error::Validation(format!("{}:{}: self-loop on {:?}", origin, no, fields[0])).into());
        }
        let mut intern = |id: &str| {
            *index.entry(id.to_string()).or_insert_with(|| {
                ids.push(id.to_string());
                ids.len() - 1
            })
        };
        let u = intern(fields[0]);
        let v = intern(fields[1]);
        edges.push((u, v));
    }
    if ids.is_empty() {
        return Err(Error::Validation(format!("{}: no edges", origin)).into());
    }
    Ok(DirectedGraph::new(ids, edges)?)
}

pub fn write_edge_list(mut out: impl Write, graph: &DirectedGraph) -> std::io::Result<()> {
    for &(u, v) in graph.edges() {
        writeln!(out, "{}\t{}", graph.node_id(u), graph.node_id(v))?;
    }
    Ok(())
}

/// Header `N d`, then `node_id v1 … vd` per line. Rows are reordered to the
/// graph's node indices; every graph node must appear exactly once and no
/// other node may appear.
pub fn load_embeddings(reader: impl BufRead, graph: &DirectedGraph, origin: &str) -> Result<Matrix> {
    let mut it = lines(reader, origin).filter(|l| !matches!(l, Ok((_, s)) if s.trim().is_empty()));
    let (hno, header) = it.next().transpose()?.ok_or_else(|| CliError::parse(origin, 1, "missing `N d` header"))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    let parse_dim = |s: &str| s.parse::<usize>().ok();
    let (rows, d) = match dims.as_slice() {
        [a, b] => match (parse_dim(a), parse_dim(b)) {
            (Some(a), Some(b)) if b > 0 => (a, b),
            _ => return Err(CliError::parse(origin, hno, format!("bad header {:?}", header))),
        },
        _ => return Err(CliError::parse(origin, hno, format!("header must be `N d`, got {:?}", header))),
    };
    let n = graph.node_count();
    let mut data = vec![0.0; n * d];
    let mut seen = vec![false; n];
    let mut count = 0;
    for item in it {
        let (no, line) = item?;
        let mut fields = line.split_whitespace();
        let id = fields.next().unwrap_or_default();
        let values: Vec<&str> = fields.collect();
        if values.len() != d {
            return Err(Error::Validation(format!(
                "{}:{}: node {:?} has {} values, header says {}",
                origin,
                no,
                id,
                values.len(),
                d
            ))
            .into());
        }
        let v = graph
            .node_index(id)
            .ok_or_else(|| Error::Validation(format!("{}:{}: unknown node {:?}", origin, no, id)))?;
        if std::mem::replace(&mut seen[v], true) {
            return Err(Error::Validation(format!("{}:{}: node {:?} listed twice", origin, no, id)).into());
        }
        for (slot, s) in data[v * d..(v + 1) * d].iter_mut().zip(&values) {
            let x: f64 = s.parse().map_err(|_| CliError::parse(origin, no, format!("not a number: {:?}", s)))?;
            if !x.is_finite() {
                return Err(Error::Validation(format!("{}:{}: non-finite value {:?} for {:?}", origin, no, s, id)).into());
            }
            *slot = x;
        }
        count += 1;
    }
    if let Some(v) = seen.iter().position(|&s| !s) {
        return Err(Error::Validation(format!("{}: missing node {:?}", origin, graph.node_id(v))).into());
    }
    if count != rows {
        return Err(Error::Validation(format!("{}: header declares {} rows, found {}", origin, rows, count)).into());
    }
    Ok(Matrix::from_vec(n, d, data)?)
}

pub fn write_embeddings(mut out: impl Write, graph: &DirectedGraph, feats: &Matrix) -> std::io::Result<()> {
    writeln!(out, "{} {}", feats.rows(), feats.cols())?;
    for v in 0..feats.rows() {
        write!(out, "{}", graph.node_id(v))?;
        for x in feats.row(v) {
            write!(out, " {:e}", x)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// A pair to score, with an optional 0/1 label.
pub type PairRecord = (usize, usize, Option<bool>);

/// `source<TAB>target[<TAB>label]` per line.
pub fn load_pairs(reader: impl BufRead, graph: &DirectedGraph, origin: &str) -> Result<Vec<PairRecord>> {
    let mut out = Vec::new();
    for item in lines(reader, origin) {
        let (no, line) = item?;
        if is_blank_or_comment(&line) {
            continue;
        }
        let fields: Vec<&str> = line.trim_end_matches('\r').split('\t').collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(CliError::parse(origin, no, "expected `source<TAB>target[<TAB>label]`"));
        }
        let node = |id: &str| {
            graph.node_index(id).ok_or_else(|| Error::Validation(format!("{}:{}: unknown node {:?}", origin, no, id)))
        };
        let label = match fields.get(2).map(|s| s.trim()) {
            None => None,
            Some("0") => Some(false),
            Some("1") => Some(true),
            Some(other) => return Err(CliError::parse(origin, no, format!("label must be 0 or 1, got {:?}", other))),
        };
        out.push((node(fields[0])?, node(fields[1])?, label));
    }
    Ok(out)
}

/// One tuple per line: `idx<TAB>s1,…,sk` with node indices.
pub fn write_tuples(mut out: impl Write, tuples: &TupleSet) -> std::io::Result<()> {
    let mut buf = String::new();
    for (i, t) in tuples.iter().enumerate() {
        buf.clear();
        for (p, v) in t.iter().enumerate() {
            if p > 0 {
                buf.push(',');
            }
            let _ = write!(buf, "{}", v);
        }
        writeln!(out, "{}\t{}", i, buf)?;
    }
    Ok(())
}

/// One arc per line: `source_tuple<TAB>target_tuple`.
pub fn write_position_graph(mut out: impl Write, pg: &PositionGraph) -> std::io::Result<()> {
    for (s, t) in pg.arcs() {
        writeln!(out, "{}\t{}", s, t)?;
    }
    Ok(())
}

/// `tuple_idx<TAB>color` per tuple, then `histogram<TAB>c0,c1,…`.
pub fn write_colors(mut out: impl Write, colors: &ColorMap) -> std::io::Result<()> {
    for (i, c) in colors.colors.iter().enumerate() {
        writeln!(out, "{}\t{}", i, c)?;
    }
    let h: Vec<String> = colors.histogram().iter().map(|c| c.to_string()).collect();
    writeln!(out, "histogram\t{}", h.join(","))
}

pub const METRICS_HEADER: &str = "dataset\tprecision\trecall\tf1\ttp\tfp\tfn\ttn\tthreshold";

pub fn write_metrics(mut out: impl Write, rows: &[(&str, Metrics)], threshold: f64) -> std::io::Result<()> {
    writeln!(out, "{}", METRICS_HEADER)?;
    for (name, m) in rows {
        writeln!(
            out,
            "{}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}\t{}\t{}\t{}",
            name, m.precision, m.recall, m.f1, m.true_pos, m.false_pos, m.false_neg, m.true_neg, threshold
        )?;
    }
    Ok(())
}

pub fn write_loss_history(mut out: impl Write, history: &[f64]) -> std::io::Result<()> {
    writeln!(out, "epoch,mean_loss")?;
    for (i, l) in history.iter().enumerate() {
        writeln!(out, "{},{:.17e}", i + 1, l)?;
    }
    Ok(())
}

pub fn write_probabilities(
    mut out: impl Write,
    graph: &DirectedGraph,
    pairs: &[(usize, usize)],
    probs: &[f64],
) -> std::io::Result<()> {
    for (&(p, q), prob) in pairs.iter().zip(probs) {
        writeln!(out, "{}\t{}\t{:.6}", graph.node_id(p), graph.node_id(q), prob)?;
    }
    Ok(())
}
