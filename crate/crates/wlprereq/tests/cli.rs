mod support;

use std::fs;

use tempfile::tempdir;
use wlprereq::checkpoint::{read_checkpoint, write_checkpoint};
use wlprereq_core::predictor::{Model, ModelConfig};

use support::*;

#[test]
fn tuples_on_single_edge() {
    let dir = tempdir().unwrap();
    let edges = write_text(&dir.path().join("e.tsv"), "a\tb\n");
    let out = dir.path().join("dump");
    let o = run(&["tuples", "--edges", edges.to_str().unwrap(), "-k", "2", "--out", out.to_str().unwrap(), "--colors", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("tuples=3\n") && text.contains("G1 arcs=1\n") && text.contains("G2 arcs=1\n"), "{}", text);
    assert_eq!(fs::read_to_string(out.join("tuples.tsv")).unwrap(), "0\t0,0\n1\t0,1\n2\t1,1\n");
    assert_eq!(fs::read_to_string(out.join("G1.tsv")).unwrap(), "1\t2\n");
    assert_eq!(fs::read_to_string(out.join("G2.tsv")).unwrap(), "0\t1\n");
    let colors = fs::read_to_string(out.join("colors.tsv")).unwrap();
    assert!(colors.lines().last().unwrap().starts_with("histogram\t"));
    assert_eq!(colors.lines().count(), 4);
}

#[test]
fn order_one_has_one_tuple_per_node() {
    let dir = tempdir().unwrap();
    let edges = write_text(&dir.path().join("e.tsv"), "a\tb\nb\tc\nc\td\n");
    let o = run(&["tuples", "--edges", edges.to_str().unwrap(), "-k", "1", "--out", dir.path().to_str().unwrap()]);
    assert!(stdout(&o).starts_with("tuples=4\n"));
}

#[test]
fn missing_edge_file_names_the_path() {
    let o = run(&["tuples", "--edges", "/nonexistent/edges.tsv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/nonexistent/edges.tsv"));
}

#[test]
fn malformed_edge_list_exits_2_with_line() {
    let dir = tempdir().unwrap();
    let edges = write_text(&dir.path().join("e.tsv"), "a\tb\nbroken\n");
    let o = run(&["tuples", "--edges", edges.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains(":2:"), "{}", stderr(&o));
}

#[test]
fn wl_verdicts() {
    let dir = tempdir().unwrap();
    let hex = write_text(&dir.path().join("hex.tsv"), "0\t1\n1\t2\n2\t3\n3\t4\n4\t5\n5\t0\n");
    let tri = write_text(&dir.path().join("tri.tsv"), "0\t1\n1\t2\n2\t0\n3\t4\n4\t5\n5\t3\n");
    let (h, t) = (hex.to_str().unwrap(), tri.to_str().unwrap());
    let verdict = |a: &str, b: &str, k: &str| {
        let o = run(&["wl", a, b, "-k", k]);
        assert_eq!(o.status.code(), Some(0));
        stdout(&o)
    };
    assert!(verdict(h, h, "2").starts_with("NOT-DISTINGUISHED"));
    assert!(verdict(h, t, "1").starts_with("NOT-DISTINGUISHED"));
    assert!(verdict(h, t, "2").starts_with("DISTINGUISHED rounds="));
}

fn train_args<'a>(edges: &'a str, emb: &'a str, out: &'a str, epochs: &'a str) -> Vec<&'a str> {
    vec!["train", "--edges", edges, "--embeddings", emb, "--out", out, "--epochs", epochs]
}

#[test]
fn zero_epochs_writes_the_initial_model() {
    let dir = tempdir().unwrap();
    let (edges, emb) = write_two_clusters(dir.path(), 0);
    let out = dir.path().join("run");
    let o = run(&train_args(edges.to_str().unwrap(), emb.to_str().unwrap(), out.to_str().unwrap(), "0"));
    assert!(o.status.success(), "{}", stderr(&o));
    let saved = fs::read(out.join("checkpoint.txt")).unwrap();
    let mut expect = Vec::new();
    write_checkpoint(&mut expect, &Model::init(ModelConfig::new(2, 8), 0).unwrap()).unwrap();
    assert_eq!(saved, expect);
    assert_eq!(read_metrics(&out.join("metrics.tsv")).len(), 2);
    assert_eq!(fs::read_to_string(out.join("loss.csv")).unwrap(), "epoch,mean_loss\n");
}

#[test]
fn separable_fixture_reaches_full_train_f1() {
    let dir = tempdir().unwrap();
    let (edges, emb) = write_two_clusters(dir.path(), 1);
    let out = dir.path().join("run");
    let mut args = train_args(edges.to_str().unwrap(), emb.to_str().unwrap(), out.to_str().unwrap(), "500");
    args.extend(["--seed", "1"]);
    let o = run(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    // Precondition: the sampled negatives never run from the source cluster
    // into the target cluster.
    let split = read_split(&out.join("split.tsv"));
    assert!(split.iter().all(|(s, t, label, _)| *label || !(s.starts_with('s') && t.starts_with('t'))));
    let metrics = read_metrics(&out.join("metrics.tsv"));
    assert_eq!(metrics[0].0, "train");
    assert_eq!(metrics[0].3, 1.0);
}

#[test]
fn training_is_reproducible_across_runs_and_thread_counts() {
    let dir = tempdir().unwrap();
    let (edges, emb) = write_two_clusters(dir.path(), 1);
    let (e, m) = (edges.to_str().unwrap().to_string(), emb.to_str().unwrap().to_string());
    let mut outputs = Vec::new();
    for (i, threads) in ["1", "4"].iter().enumerate() {
        let out = dir.path().join(format!("run{}", i));
        let mut args = train_args(&e, &m, out.to_str().unwrap(), "20");
        args.extend(["--threads", threads]);
        let o = run(&args);
        assert!(o.status.success(), "{}", stderr(&o));
        outputs.push(["metrics.tsv", "loss.csv", "checkpoint.txt", "split.tsv"].map(|f| fs::read(out.join(f)).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempdir().unwrap();
    let (edges, emb) = write_two_clusters(dir.path(), 0);
    let out = dir.path().join("run");
    let cfg = write_text(
        &dir.path().join("run.conf"),
        &format!(
            "edges = {}\nembeddings = {}\nout = {}\nepochs = 7\nhidden_dim = 8\noutput_dim = 8\ndataset_preset = university-courses\n",
            edges.display(),
            emb.display(),
            out.display()
        ),
    );
    let o = run(&["train", "--config", cfg.to_str().unwrap(), "--epochs", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(out.join("loss.csv")).unwrap().lines().count(), 4);
    let effective = fs::read_to_string(out.join("config.txt")).unwrap();
    assert!(effective.contains("batch_size = 512\n") && effective.contains("hidden_dim = 8\n"));

    let bad = write_text(&dir.path().join("bad.conf"), "epochs = many\n");
    let o = run(&["train", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn divergence_exits_3() {
    let dir = tempdir().unwrap();
    let (edges, emb) = write_two_clusters(dir.path(), 0);
    let out = dir.path().join("run");
    let mut args = train_args(edges.to_str().unwrap(), emb.to_str().unwrap(), out.to_str().unwrap(), "5");
    args.extend(["--learning-rate", "1e300", "--hidden-dim", "8", "--output-dim", "8"]);
    let o = run(&args);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn predict_scores_both_directions() {
    let dir = tempdir().unwrap();
    let (edges, emb) = write_two_clusters(dir.path(), 0);
    let out = dir.path().join("run");
    let mut args = train_args(edges.to_str().unwrap(), emb.to_str().unwrap(), out.to_str().unwrap(), "5");
    args.extend(["--hidden-dim", "8", "--output-dim", "8"]);
    assert!(run(&args).status.success());
    let ckpt = out.join("checkpoint.txt");
    let pairs = write_text(&dir.path().join("pairs.tsv"), "s0\tt5\ns0\tt5\t1\nt5\ts0\t0\n");
    let probs = dir.path().join("probs.tsv");
    let predict = |pairs: &std::path::Path, emb: &std::path::Path| {
        run(&[
            "predict",
            "--checkpoint",
            ckpt.to_str().unwrap(),
            "--edges",
            edges.to_str().unwrap(),
            "--embeddings",
            emb.to_str().unwrap(),
            "--pairs",
            pairs.to_str().unwrap(),
            "--out",
            probs.to_str().unwrap(),
        ])
    };
    let o = predict(&pairs, &emb);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&probs).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0], rows[1]);
    assert_eq!((rows[2][0], rows[2][1]), ("t5", "s0"));
    assert_ne!(rows[0][2], rows[2][2]);
    assert!(rows.iter().all(|r| r[2].split('.').nth(1).unwrap().len() == 6));

    let empty = write_text(&dir.path().join("none.tsv"), "");
    let o = predict(&empty, &emb);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(&probs).unwrap(), "");

    // Same nodes, width 3 instead of 8.
    let narrow = dir.path().join("narrow.txt");
    let text = fs::read_to_string(&emb).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().replace(" 8", " 3");
    let body: Vec<String> =
        lines.map(|l| l.split(' ').take(4).collect::<Vec<_>>().join(" ")).collect();
    write_text(&narrow, &format!("{}\n{}\n", header, body.join("\n")));
    let o = predict(&pairs, &narrow);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("width"), "{}", stderr(&o));
}

#[test]
fn checkpoint_file_round_trip_through_cli_output() {
    let dir = tempdir().unwrap();
    let (edges, emb) = write_two_clusters(dir.path(), 0);
    let out = dir.path().join("run");
    let mut args = train_args(edges.to_str().unwrap(), emb.to_str().unwrap(), out.to_str().unwrap(), "2");
    args.extend(["--hidden-dim", "8", "--output-dim", "8"]);
    assert!(run(&args).status.success());
    let bytes = fs::read(out.join("checkpoint.txt")).unwrap();
    let model = read_checkpoint(bytes.as_slice(), "ckpt").unwrap();
    let mut again = Vec::new();
    write_checkpoint(&mut again, &model).unwrap();
    assert_eq!(bytes, again);
}
