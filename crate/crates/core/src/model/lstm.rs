//! Single-layer LSTM with zero initial state.
//!
//! Gate pre-activations are stacked as `[input; forget; cell; output]`:
//!
//! ```text
//! z = W x_t + U h_{t-1} + b
//! i = σ(z_i)   f = σ(z_f)   g = tanh(z_g)   o = σ(z_o)
//! c_t = f ⊙ c_{t-1} + i ⊙ g
//! h_t = o ⊙ tanh(c_t)
//! ```

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::matrix::{sigmoid, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmParams {
    /// `4H × input_size`
    pub w_input: Matrix,
    /// `4H × H`
    pub w_hidden: Matrix,
    /// `4H`
    pub bias: Vec<f64>,
}

impl LstmParams {
    pub fn zeros(input_size: usize, hidden_size: usize) -> Self {
        Self {
            w_input: Matrix::zeros(4 * hidden_size, input_size),
            w_hidden: Matrix::zeros(4 * hidden_size, hidden_size),
            bias: vec![0.0; 4 * hidden_size],
        }
    }

    /// Glorot-uniform weights, forget-gate bias 1, other biases 0.
    pub fn init<R: Rng + ?Sized>(input_size: usize, hidden_size: usize, rng: &mut R) -> Self {
        let w_input = Matrix::glorot(4 * hidden_size, input_size, rng);
        let w_hidden = Matrix::glorot(4 * hidden_size, hidden_size, rng);
        let mut bias = vec![0.0; 4 * hidden_size];
        bias[hidden_size..2 * hidden_size].fill(1.0);
        Self {
            w_input,
            w_hidden,
            bias,
        }
    }

    pub fn hidden_size(&self) -> usize {
        self.w_hidden.cols()
    }

    pub fn input_size(&self) -> usize {
        self.w_input.cols()
    }
}

/// Activations of one time step.
#[derive(Debug, Clone)]
pub struct LstmStep {
    pub input_gate: Vec<f64>,
    pub forget_gate: Vec<f64>,
    pub candidate: Vec<f64>,
    pub output_gate: Vec<f64>,
    pub cell: Vec<f64>,
    pub cell_tanh: Vec<f64>,
    pub hidden: Vec<f64>,
}

/// Per-position activations, stored in input order regardless of direction.
#[derive(Debug, Clone)]
pub struct LstmTrace {
    pub reverse: bool,
    pub steps: Vec<LstmStep>,
}

impl LstmTrace {
    pub fn hidden(&self) -> impl Iterator<Item = &[f64]> {
        self.steps.iter().map(|s| s.hidden.as_slice())
    }

    fn order(&self) -> Vec<usize> {
        processing_order(self.steps.len(), self.reverse)
    }
}

fn processing_order(n: usize, reverse: bool) -> Vec<usize> {
    if reverse {
        (0..n).rev().collect()
    } else {
        (0..n).collect()
    }
}

/// One cell update from `(h_prev, c_prev)` given input `x`.
pub fn lstm_cell(params: &LstmParams, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> LstmStep {
    let h = params.hidden_size();
    let mut z = params.bias.clone();
    params.w_input.gemv_acc(x, &mut z);
    params.w_hidden.gemv_acc(h_prev, &mut z);
    let input_gate: Vec<f64> = z[..h].iter().map(|&v| sigmoid(v)).collect();
    let forget_gate: Vec<f64> = z[h..2 * h].iter().map(|&v| sigmoid(v)).collect();
    let candidate: Vec<f64> = z[2 * h..3 * h].iter().map(|v| v.tanh()).collect();
    let output_gate: Vec<f64> = z[3 * h..].iter().map(|&v| sigmoid(v)).collect();
    let cell: Vec<f64> = (0..h)
        .map(|k| forget_gate[k] * c_prev[k] + input_gate[k] * candidate[k])
        .collect();
    let cell_tanh: Vec<f64> = cell.iter().map(|c| c.tanh()).collect();
    let hidden = (0..h).map(|k| output_gate[k] * cell_tanh[k]).collect();
    LstmStep {
        input_gate,
        forget_gate,
        candidate,
        output_gate,
        cell,
        cell_tanh,
        hidden,
    }
}

/// Runs the LSTM over `inputs`; with `reverse` the sequence is consumed
/// back-to-front and outputs are re-aligned to input order.
pub fn lstm_forward(inputs: &[Vec<f64>], params: &LstmParams, reverse: bool) -> LstmTrace {
    let h = params.hidden_size();
    let n = inputs.len();
    let mut slots: Vec<Option<LstmStep>> = vec![None; n];
    let zeros = vec![0.0; h];
    let mut prev: Option<usize> = None;
    for t in processing_order(n, reverse) {
        let (h_prev, c_prev) = match prev {
            Some(p) => {
                let s = slots[p].as_ref().expect("previous step computed");
                (s.hidden.as_slice(), s.cell.as_slice())
            }
            None => (zeros.as_slice(), zeros.as_slice()),
        };
        let step = lstm_cell(params, &inputs[t], h_prev, c_prev);
        slots[t] = Some(step);
        prev = Some(t);
    }
    LstmTrace {
        reverse,
        steps: slots
            .into_iter()
            .map(|s| s.expect("all steps computed"))
            .collect(),
    }
}

/// Backpropagation through time. `d_hidden[t]` is the loss gradient with
/// respect to the output at input position `t`. Parameter gradients are
/// accumulated into `grads`; input gradients into `d_inputs` when given.
pub fn lstm_backward(
    inputs: &[Vec<f64>],
    params: &LstmParams,
    trace: &LstmTrace,
    d_hidden: &[Vec<f64>],
    grads: &mut LstmParams,
    mut d_inputs: Option<&mut [Vec<f64>]>,
) {
    let h = params.hidden_size();
    let zeros = vec![0.0; h];
    let order = trace.order();
    let mut dh_next = vec![0.0; h];
    let mut dc_next = vec![0.0; h];
    let mut dz = vec![0.0; 4 * h];
    for (k, &t) in order.iter().enumerate().rev() {
        let step = &trace.steps[t];
        let (h_prev, c_prev) = if k > 0 {
            let p = &trace.steps[order[k - 1]];
            (p.hidden.as_slice(), p.cell.as_slice())
        } else {
            (zeros.as_slice(), zeros.as_slice())
        };
        for j in 0..h {
            let dh = d_hidden[t][j] + dh_next[j];
            let i = step.input_gate[j];
            let f = step.forget_gate[j];
            let g = step.candidate[j];
            let o = step.output_gate[j];
            let tc = step.cell_tanh[j];
            let d_o = dh * tc;
            let dc = dc_next[j] + dh * o * (1.0 - tc * tc);
            dz[j] = dc * g * i * (1.0 - i);
            dz[h + j] = dc * c_prev[j] * f * (1.0 - f);
            dz[2 * h + j] = dc * i * (1.0 - g * g);
            dz[3 * h + j] = d_o * o * (1.0 - o);
            dc_next[j] = dc * f;
        }
        grads.w_input.add_outer(&dz, &inputs[t]);
        grads.w_hidden.add_outer(&dz, h_prev);
        for (b, d) in grads.bias.iter_mut().zip(&dz) {
            *b += d;
        }
        dh_next.fill(0.0);
        params.w_hidden.gemv_t_acc(&dz, &mut dh_next);
        if let Some(dx) = d_inputs.as_deref_mut() {
            params.w_input.gemv_t_acc(&dz, &mut dx[t]);
        }
    }
}
