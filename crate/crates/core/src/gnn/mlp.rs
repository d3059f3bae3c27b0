use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{relu_backward_in_place, relu_in_place, Matrix};

/// Affine map `x · weight + bias` with `weight` stored `in_dim × out_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

/// Parameters of one per-position GCN.
pub type GcnLayerParams = Dense;

impl Dense {
    pub fn new(weight: Matrix, bias: Vec<f64>) -> Result<Self> {
        if bias.len() != weight.cols() {
            return Err(Error::shape(format!(
                "bias of length {} for a {}x{} weight",
                bias.len(),
                weight.rows(),
                weight.cols()
            )));
        }
        if !weight.is_finite() || bias.iter().any(|b| !b.is_finite()) {
            return Err(Error::validation("non-finite parameter"));
        }
        Ok(Dense { weight, bias })
    }

    /// Glorot-uniform weight, zero bias.
    pub fn glorot(in_dim: usize, out_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let limit = libm::sqrt(6.0 / (in_dim + out_dim) as f64);
        let data = (0..in_dim * out_dim).map(|_| rng.gen_range(-limit..=limit)).collect();
        Dense {
            weight: Matrix::from_vec(in_dim, out_dim, data).expect("sized"),
            bias: vec![0.0; out_dim],
        }
    }

    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Dense { weight: Matrix::zeros(in_dim, out_dim), bias: vec![0.0; out_dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Dense { weight: Matrix::identity(dim), bias: vec![0.0; dim] }
    }

    pub fn in_dim(&self) -> usize {
        self.weight.rows()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.cols()
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.in_dim(), self.out_dim())
    }

    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        let mut y = x.matmul(&self.weight)?;
        y.add_row_vector(&self.bias)?;
        Ok(y)
    }

    /// Accumulates parameter gradients into `grad` and returns `∂/∂x`.
    pub(crate) fn backward(&self, x: &Matrix, dy: &Matrix, grad: &mut Dense) -> Result<Matrix> {
        grad.weight.add_assign(&x.t_matmul(dy)?)?;
        for (g, d) in grad.bias.iter_mut().zip(dy.col_sums()) {
            *g += d;
        }
        dy.matmul_t(&self.weight)
    }
}

/// Stack of dense layers with a rectifier between consecutive layers.
/// The last layer is linear.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

pub type MlpParams = Mlp;

#[derive(Debug, Clone)]
pub(crate) struct MlpCache {
    /// Input to each layer.
    inputs: Vec<Matrix>,
    /// Pre-activation output of each layer.
    pres: Vec<Matrix>,
}

impl Mlp {
    pub fn new(layers: Vec<Dense>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::config("an MLP needs at least one layer"));
        }
        for w in layers.windows(2) {
            if w[0].out_dim() != w[1].in_dim() {
                return Err(Error::shape(format!(
                    "layer widths do not chain: {} then {}",
                    w[0].out_dim(),
                    w[1].in_dim()
                )));
            }
        }
        Ok(Mlp { layers })
    }

    /// Glorot-initialized MLP through the given widths (`dims.len() >= 2`).
    pub fn glorot(dims: &[usize], rng: &mut ChaCha8Rng) -> Self {
        assert!(dims.len() >= 2);
        Mlp { layers: dims.windows(2).map(|w| Dense::glorot(w[0], w[1], rng)).collect() }
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    pub fn zeros_like(&self) -> Self {
        Mlp { layers: self.layers.iter().map(Dense::zeros_like).collect() }
    }

    pub fn forward(&self, x: &Matrix) -> Result<Matrix> {
        Ok(self.forward_cached(x)?.0)
    }

    pub(crate) fn forward_cached(&self, x: &Matrix) -> Result<(Matrix, MlpCache)> {
        if x.cols() != self.in_dim() {
            return Err(Error::shape(format!("MLP expects width {}, got {}", self.in_dim(), x.cols())));
        }
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pres = Vec::with_capacity(self.layers.len());
        let mut h = x.clone();
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let pre = layer.apply(&h)?;
            inputs.push(h);
            h = pre.clone();
            if l < last {
                relu_in_place(&mut h);
            }
            pres.push(pre);
        }
        Ok((h, MlpCache { inputs, pres }))
    }

    pub(crate) fn backward(&self, cache: &MlpCache, dy: &Matrix, grad: &mut Mlp) -> Result<Matrix> {
        let mut d = dy.clone();
        let last = self.layers.len() - 1;
        for l in (0..self.layers.len()).rev() {
            if l < last {
                relu_backward_in_place(&mut d, &cache.pres[l]);
            }
            d = self.layers[l].backward(&cache.inputs[l], &d, &mut grad.layers[l])?;
        }
        Ok(d)
    }
}
