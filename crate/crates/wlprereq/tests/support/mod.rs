//! Helpers for driving the `wlprereq` binary on fixture files.

#![allow(dead_code)]

use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use wlprereq::formats::{write_edge_list, write_embeddings};
use wlprereq_core::fixtures::two_clusters;
use wlprereq_core::DirectedGraph;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wlprereq"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn write_text(path: &Path, text: &str) -> PathBuf {
    std::fs::write(path, text).unwrap();
    path.to_path_buf()
}

pub fn write_graph(path: &Path, g: &DirectedGraph) -> PathBuf {
    write_edge_list(File::create(path).unwrap(), g).unwrap();
    path.to_path_buf()
}

/// Writes the two-cluster fixture as `edges.tsv` and `emb.txt` in `dir`.
pub fn write_two_clusters(dir: &Path, seed: u64) -> (PathBuf, PathBuf) {
    let ds = two_clusters(seed);
    let edges = write_graph(&dir.join("edges.tsv"), &ds.graph);
    let emb = dir.join("emb.txt");
    write_embeddings(File::create(&emb).unwrap(), &ds.graph, &ds.features).unwrap();
    (edges, emb)
}

/// Reads `split.tsv` rows as `(source, target, label, split)`.
pub fn read_split(path: &Path) -> Vec<(String, String, bool, String)> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            (f[0].to_string(), f[1].to_string(), f[2] == "1", f[3].to_string())
        })
        .collect()
}

/// Metric rows keyed by dataset name: `(precision, recall, f1)`.
pub fn read_metrics(path: &Path) -> Vec<(String, f64, f64, f64)> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            (f[0].to_string(), f[1].parse().unwrap(), f[2].parse().unwrap(), f[3].parse().unwrap())
        })
        .collect()
}
