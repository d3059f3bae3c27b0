//! Subcommand implementations. Each returns the text to print on stdout.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use wlprereq_core::gnn::GraphBundle;
use wlprereq_core::graph::build_labeled_pairs;
use wlprereq_core::predictor::{evaluate, train, Example, Model};
use wlprereq_core::tuples::{build_position_graphs, enumerate_tuples};
use wlprereq_core::wl::{compare, wl_refine};
use wlprereq_core::{DirectedGraph, Error, LabeledPairSet, Matrix, Split};

use crate::checkpoint::{read_checkpoint, write_checkpoint};
use crate::config::TrainSettings;
use crate::error::{CliError, Result};
use crate::formats;

/// File names written by [`cmd_train`] inside the output directory.
pub const CHECKPOINT_FILE: &str = "checkpoint.txt";
pub const LOSS_FILE: &str = "loss.csv";
pub const METRICS_FILE: &str = "metrics.tsv";
pub const SPLIT_FILE: &str = "split.tsv";
pub const CONFIG_FILE: &str = "config.txt";

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::io(path, e))
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

pub fn read_graph(path: &Path) -> Result<DirectedGraph> {
    formats::load_edge_list(open(path)?, &path.display().to_string())
}

pub fn read_embeddings(path: &Path, graph: &DirectedGraph) -> Result<Matrix> {
    formats::load_embeddings(open(path)?, graph, &path.display().to_string())
}

/// Writes `tuples.tsv`, one `G{j}.tsv` per position and, when
/// `color_rounds` is set, `colors.tsv` after that many refinement rounds.
pub fn cmd_tuples(edges: &Path, k: usize, out_dir: &Path, color_rounds: Option<usize>) -> Result<String> {
    let graph = read_graph(edges)?;
    let tuples = enumerate_tuples(&graph, k)?;
    let pgs = build_position_graphs(&graph, &tuples)?;
    ensure_dir(out_dir)?;
    write_file(&out_dir.join("tuples.tsv"), |w| formats::write_tuples(w, &tuples))?;
    let mut report = format!("tuples={}\n", tuples.len());
    for pg in &pgs {
        write_file(&out_dir.join(format!("G{}.tsv", pg.position())), |w| formats::write_position_graph(w, pg))?;
        report.push_str(&format!("G{} arcs={}\n", pg.position(), pg.arc_count()));
    }
    if let Some(rounds) = color_rounds {
        let colors = wl_refine(&graph, k, rounds)?;
        write_file(&out_dir.join("colors.tsv"), |w| formats::write_colors(w, &colors))?;
        report.push_str(&format!("colors={} rounds={}\n", colors.class_count(), colors.iteration));
    }
    Ok(report)
}

pub fn cmd_wl(first: &Path, second: &Path, k: usize, max_iters: usize) -> Result<String> {
    let v = compare(&read_graph(first)?, &read_graph(second)?, k, max_iters)?;
    let verdict = if v.distinguished { "DISTINGUISHED" } else { "NOT-DISTINGUISHED" };
    Ok(format!("{} rounds={}\n", verdict, v.rounds))
}

fn examples(set: &LabeledPairSet, split: Split) -> Vec<Example> {
    set.split(split).map(|p| (p.source, p.target, p.label)).collect()
}

fn required<'a>(p: &'a Option<PathBuf>, key: &str) -> Result<&'a Path> {
    p.as_deref().ok_or_else(|| CliError::Config(format!("missing required setting `{}`", key)))
}

/// Split, sample negatives, train, evaluate; writes the checkpoint, loss
/// history, metrics, the labeled split and the effective config.
pub fn cmd_train(settings: &TrainSettings) -> Result<String> {
    let edges = required(&settings.edges, "edges")?;
    let emb = required(&settings.embeddings, "embeddings")?;
    let out = required(&settings.out, "out")?;
    settings.train.validate()?;
    let graph = read_graph(edges)?;
    let feats = read_embeddings(emb, &graph)?;
    let model = Model::init(settings.model_config(feats.cols()), settings.train.seed)?;
    let seed = settings.train.seed;
    let pairs = build_labeled_pairs(&graph, settings.split_ratio, settings.train.negative_ratio, seed)?;
    let bundle = GraphBundle::new(graph, settings.order)?;
    ensure_dir(out)?;
    write_file(&out.join(CONFIG_FILE), |w| w.write_all(settings.to_config_text().as_bytes()))?;
    write_file(&out.join(SPLIT_FILE), |w| write_split(w, bundle.graph(), &pairs))?;

    let outcome = train(&bundle, &feats, &pairs, model, &settings.train)?;
    let threshold = settings.train.threshold;
    let mut rows = Vec::new();
    for (name, split) in [("train", Split::Train), ("test", Split::Test)] {
        let ex = examples(&pairs, split);
        if !ex.is_empty() {
            rows.push((name, evaluate(&outcome.model, &bundle, &feats, &ex, threshold)?));
        }
    }
    write_file(&out.join(CHECKPOINT_FILE), |w| write_checkpoint(w, &outcome.model))?;
    write_file(&out.join(LOSS_FILE), |w| formats::write_loss_history(w, &outcome.loss_history))?;
    write_file(&out.join(METRICS_FILE), |w| formats::write_metrics(w, &rows, threshold))?;

    let mut report = String::new();
    if let Some(last) = outcome.loss_history.last() {
        report.push_str(&format!("epochs={} final_loss={:.6}\n", outcome.loss_history.len(), last));
    }
    for (name, m) in &rows {
        report.push_str(&format!("{} precision={:.4} recall={:.4} f1={:.4}\n", name, m.precision, m.recall, m.f1));
    }
    Ok(report)
}

/// `source<TAB>target<TAB>label<TAB>split` with node identifiers.
pub fn write_split(mut w: impl Write, graph: &DirectedGraph, pairs: &LabeledPairSet) -> std::io::Result<()> {
    for p in &pairs.pairs {
        let split = match p.split {
            Split::Train => "train",
            Split::Test => "test",
        };
        writeln!(w, "{}\t{}\t{}\t{}", graph.node_id(p.source), graph.node_id(p.target), p.label as u8, split)?;
    }
    Ok(())
}

/// Scores every pair of `pairs` and writes the probability TSV to `out`.
pub fn cmd_predict(checkpoint: &Path, edges: &Path, embeddings: &Path, pairs: &Path, out: &Path) -> Result<String> {
    let model = read_checkpoint(open(checkpoint)?, &checkpoint.display().to_string())?;
    let graph = read_graph(edges)?;
    let feats = read_embeddings(embeddings, &graph)?;
    let want = model.config().gnn.input_dim;
    if feats.cols() != want {
        return Err(Error::Shape(format!(
            "checkpoint expects embedding width {}, {} has width {}",
            want,
            embeddings.display(),
            feats.cols()
        ))
        .into());
    }
    let records = formats::load_pairs(open(pairs)?, &graph, &pairs.display().to_string())?;
    let list: Vec<(usize, usize)> = records.iter().map(|&(p, q, _)| (p, q)).collect();
    let probs = if list.is_empty() {
        Vec::new()
    } else {
        let bundle = GraphBundle::new(graph.clone(), model.config().gnn.order)?;
        model.predict(&bundle, &feats, &list)?
    };
    write_file(out, |w| formats::write_probabilities(w, &graph, &list, &probs))?;
    Ok(format!("scored={}\n", list.len()))
}

/// Sizes the global worker pool. Results do not depend on the count.
pub fn configure_threads(threads: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot set up {} worker threads: {}", threads, e)))
}
