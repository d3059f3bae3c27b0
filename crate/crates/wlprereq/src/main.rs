use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wlprereq::commands::{cmd_predict, cmd_train, cmd_tuples, cmd_wl, configure_threads};
use wlprereq::config::{read_config, TrainSettings};
use wlprereq::Result;

#[derive(Parser)]
#[command(name = "wlprereq", version, about = "WL-guided higher-order GNN prerequisite link prediction")]
struct Cli {
    /// Worker threads for per-position and per-tuple work (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate restricted k-tuples and dump them with their position graphs.
    Tuples {
        #[arg(long)]
        edges: PathBuf,
        #[arg(short, long, default_value_t = 2)]
        k: usize,
        /// Output directory for tuples.tsv and G{j}.tsv.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Also run this many WL rounds and write colors.tsv.
        #[arg(long)]
        colors: Option<usize>,
    },
    /// Test whether k-WL tells two graphs apart.
    Wl {
        first: PathBuf,
        second: PathBuf,
        #[arg(short, long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 1000)]
        max_iters: usize,
    },
    /// Train on a graph and embeddings; write checkpoint, loss and metrics.
    Train(Box<TrainArgs>),
    /// Score pairs with a trained checkpoint.
    Predict {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        embeddings: PathBuf,
        /// `source<TAB>target[<TAB>label]` per line.
        #[arg(long)]
        pairs: PathBuf,
        /// Probability TSV to write.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct TrainArgs {
    /// `key = value` file; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    edges: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `default` or `university-courses` (batch size 512).
    #[arg(long)]
    dataset_preset: Option<String>,
    #[arg(short, long)]
    k: Option<usize>,
    #[arg(long)]
    hidden_dim: Option<usize>,
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long)]
    output_dim: Option<usize>,
    #[arg(long)]
    encoder_hidden_layers: Option<usize>,
    #[arg(long)]
    split_ratio: Option<f64>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    adam_beta1: Option<f64>,
    #[arg(long)]
    adam_beta2: Option<f64>,
    #[arg(long)]
    adam_eps: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    negative_ratio: Option<f64>,
    /// Redraw training negatives every epoch.
    #[arg(long)]
    resample_negatives: bool,
}

impl TrainArgs {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut o = Vec::new();
        let mut put = |k: &'static str, v: Option<String>| {
            if let Some(v) = v {
                o.push((k, v));
            }
        };
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        put("edges", path(&self.edges));
        put("embeddings", path(&self.embeddings));
        put("out", path(&self.out));
        put("dataset_preset", self.dataset_preset.clone());
        put("k", opt(&self.k));
        put("hidden_dim", opt(&self.hidden_dim));
        put("layers", opt(&self.layers));
        put("output_dim", opt(&self.output_dim));
        put("encoder_hidden_layers", opt(&self.encoder_hidden_layers));
        put("split_ratio", opt(&self.split_ratio));
        put("learning_rate", opt(&self.learning_rate));
        put("epochs", opt(&self.epochs));
        put("batch_size", opt(&self.batch_size));
        put("adam_beta1", opt(&self.adam_beta1));
        put("adam_beta2", opt(&self.adam_beta2));
        put("adam_eps", opt(&self.adam_eps));
        put("seed", opt(&self.seed));
        put("threshold", opt(&self.threshold));
        put("negative_ratio", opt(&self.negative_ratio));
        if self.resample_negatives {
            put("resample_negatives", Some("true".to_string()));
        }
        o
    }
}

fn opt<T: ToString>(v: &Option<T>) -> Option<String> {
    v.as_ref().map(|v| v.to_string())
}

fn run(cli: Cli) -> Result<String> {
    if let Some(n) = cli.threads {
        configure_threads(n)?;
    }
    match cli.command {
        Command::Tuples { edges, k, out, colors } => cmd_tuples(&edges, k, &out, colors),
        Command::Wl { first, second, k, max_iters } => cmd_wl(&first, &second, k, max_iters),
        Command::Train(args) => {
            let file = match &args.config {
                Some(p) => read_config(p)?,
                None => Vec::new(),
            };
            cmd_train(&TrainSettings::resolve(&file, &args.overrides())?)
        }
        Command::Predict { checkpoint, edges, embeddings, pairs, out } => {
            cmd_predict(&checkpoint, &edges, &embeddings, &pairs, &out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(text) => {
            print!("{}", text);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
