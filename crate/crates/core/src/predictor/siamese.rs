use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::loss::sigmoid;
use crate::error::{Error, Result};
use crate::gnn::Mlp;
use crate::matrix::Matrix;

/// Shared encoder plus the scoring row over
/// `[e_p : e_q : e_p - e_q : e_p ⊙ e_q : 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SiameseParams {
    pub encoder: Mlp,
    pub score_row: Vec<f64>,
}

impl SiameseParams {
    pub fn new(encoder: Mlp, score_row: Vec<f64>) -> Result<Self> {
        let want = 4 * encoder.out_dim() + 1;
        if score_row.len() != want {
            return Err(Error::shape(format!(
                "score row has length {}, encoder output {} needs {}",
                score_row.len(),
                encoder.out_dim(),
                want
            )));
        }
        if score_row.iter().any(|w| !w.is_finite()) {
            return Err(Error::validation("non-finite score row"));
        }
        Ok(SiameseParams { encoder, score_row })
    }

    /// Encoder `input_dim → … → input_dim` with `hidden_layers` rectified
    /// hidden layers, then a Glorot-uniform score row.
    pub(crate) fn init_with(input_dim: usize, hidden_layers: usize, rng: &mut ChaCha8Rng) -> Self {
        let dims: Vec<usize> = core::iter::repeat_n(input_dim, hidden_layers + 2).collect();
        let encoder = Mlp::glorot(&dims, rng);
        let len = 4 * input_dim + 1;
        let limit = libm::sqrt(6.0 / (len + 1) as f64);
        let score_row = (0..len).map(|_| rng.gen_range(-limit..=limit)).collect();
        SiameseParams { encoder, score_row }
    }

    pub fn zeros_like(&self) -> Self {
        SiameseParams { encoder: self.encoder.zeros_like(), score_row: alloc::vec![0.0; self.score_row.len()] }
    }

    pub fn logit(&self, e_p: &[f64], e_q: &[f64]) -> f64 {
        let m = e_p.len();
        let w = &self.score_row;
        let mut z = w[4 * m];
        for i in 0..m {
            let (a, b) = (e_p[i], e_q[i]);
            z += w[i] * a + w[m + i] * b + w[2 * m + i] * (a - b) + w[3 * m + i] * (a * b);
        }
        z
    }
}

/// `[e_p : e_q : e_p - e_q : e_p ⊙ e_q : 1]`
pub fn pair_features(e_p: &[f64], e_q: &[f64]) -> Vec<f64> {
    let mut phi = Vec::with_capacity(4 * e_p.len() + 1);
    phi.extend_from_slice(e_p);
    phi.extend_from_slice(e_q);
    phi.extend(e_p.iter().zip(e_q).map(|(a, b)| a - b));
    phi.extend(e_p.iter().zip(e_q).map(|(a, b)| a * b));
    phi.push(1.0);
    phi
}

/// Probability that `p` is a prerequisite of `q`, strictly inside (0, 1)
/// up to floating-point saturation.
pub fn link_probability(f_p: &[f64], f_q: &[f64], params: &SiameseParams) -> Result<f64> {
    let d = params.encoder.in_dim();
    if f_p.len() != d || f_q.len() != d {
        return Err(Error::shape(format!(
            "node representations of width {} and {}, encoder expects {}",
            f_p.len(),
            f_q.len(),
            d
        )));
    }
    let x = Matrix::from_vec(2, d, [f_p, f_q].concat())?;
    let e = params.encoder.forward(&x)?;
    Ok(sigmoid(params.logit(e.row(0), e.row(1))))
}
