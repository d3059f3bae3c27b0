//! Versioned text checkpoint: architecture header plus every named tensor.
//!
//! ```text
//! wlprereq-checkpoint 1
//! order 2
//! input_dim 8
//! ...
//! tensor gnn.layer0.pos0.weight 16 64
//! <one line per row, 17 significant digits>
//! end
//! ```

use std::io::{BufRead, Write};

use wlprereq_core::gnn::GnnConfig;
use wlprereq_core::predictor::{Model, ModelConfig};
use wlprereq_core::Error;

use crate::error::{CliError, Result};

const MAGIC: &str = "wlprereq-checkpoint";
const VERSION: u32 = 1;

pub fn write_checkpoint(mut out: impl Write, model: &Model) -> std::io::Result<()> {
    let c = model.config();
    writeln!(out, "{} {}", MAGIC, VERSION)?;
    writeln!(out, "order {}", c.gnn.order)?;
    writeln!(out, "input_dim {}", c.gnn.input_dim)?;
    writeln!(out, "hidden_dim {}", c.gnn.hidden_dim)?;
    writeln!(out, "layers {}", c.gnn.layers)?;
    writeln!(out, "output_dim {}", c.gnn.output_dim)?;
    writeln!(out, "encoder_hidden_layers {}", c.encoder_hidden_layers)?;
    writeln!(out, "seed {}", model.gnn.rng_seed)?;
    for (name, t) in model.tensors() {
        writeln!(out, "tensor {} {} {}", name, t.rows, t.cols)?;
        for row in t.data.chunks(t.cols.max(1)) {
            let cells: Vec<String> = row.iter().map(|v| format!("{:.16e}", v)).collect();
            writeln!(out, "{}", cells.join(" "))?;
        }
    }
    writeln!(out, "end")
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    no: usize,
    origin: String,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self) -> Result<String> {
        self.no += 1;
        match self.inner.next() {
            Some(Ok(l)) => Ok(l),
            Some(Err(e)) => Err(self.err(e.to_string())),
            None => Err(self.err("unexpected end of checkpoint")),
        }
    }

    fn err(&self, msg: impl Into<String>) -> CliError {
        CliError::parse(&self.origin, self.no, msg)
    }

    fn field<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let line = self.next()?;
        let mut parts = line.split_whitespace();
        match (parts.next(), parts.next().and_then(|v| v.parse().ok()), parts.next()) {
            (Some(k), Some(v), None) if k == key => Ok(v),
            _ => Err(self.err(format!("expected `{} <value>`, got {:?}", key, line))),
        }
    }
}

pub fn read_checkpoint(reader: impl BufRead, origin: &str) -> Result<Model> {
    let mut lines = Lines { inner: reader.lines(), no: 0, origin: origin.to_string() };
    let head = lines.next()?;
    if head != format!("{} {}", MAGIC, VERSION) {
        return Err(lines.err(format!("not a version {} checkpoint: {:?}", VERSION, head)));
    }
    let gnn = GnnConfig {
        order: lines.field("order")?,
        input_dim: lines.field("input_dim")?,
        hidden_dim: lines.field("hidden_dim")?,
        layers: lines.field("layers")?,
        output_dim: lines.field("output_dim")?,
    };
    let config = ModelConfig { gnn, encoder_hidden_layers: lines.field("encoder_hidden_layers")? };
    let seed: u64 = lines.field("seed")?;
    let mut model = Model::init(config, seed)?;
    let layout: Vec<(String, usize, usize)> =
        model.tensors().into_iter().map(|(name, t)| (name, t.rows, t.cols)).collect();
    for (i, (name, rows, cols)) in layout.iter().enumerate() {
        let header = lines.next()?;
        let expect = format!("tensor {} {} {}", name, rows, cols);
        if header != expect {
            return Err(lines.err(format!("expected {:?}, got {:?}", expect, header)));
        }
        let mut values = Vec::with_capacity(rows * cols);
        for _ in 0..*rows {
            let line = lines.next()?;
            for cell in line.split_whitespace() {
                let v: f64 = cell.parse().map_err(|_| lines.err(format!("not a number: {:?}", cell)))?;
                if !v.is_finite() {
                    return Err(Error::Validation(format!("{}: non-finite value in {}", origin, name)).into());
                }
                values.push(v);
            }
            if values.len() % cols.max(&1) != 0 {
                return Err(lines.err(format!("row of {} has the wrong width", name)));
            }
        }
        if values.len() != rows * cols {
            return Err(lines.err(format!("{} holds {} values, expected {}", name, values.len(), rows * cols)));
        }
        model.tensors_mut()[i].copy_from_slice(&values);
    }
    let tail = lines.next()?;
    if tail != "end" {
        return Err(lines.err(format!("expected `end`, got {:?}", tail)));
    }
    Ok(model)
}
