use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Model(format!("{} values for a {rows}x{cols} matrix", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `out += selfᵀ · v`
    pub(crate) fn tr_mul_add(&self, v: &[f64], out: &mut [f64]) {
        for (r, &vr) in v.iter().enumerate() {
            if vr != 0.0 {
                for (o, &a) in out.iter_mut().zip(self.row(r)) {
                    *o += a * vr;
                }
            }
        }
    }

    /// `self += a · bᵀ`
    pub(crate) fn add_outer(&mut self, a: &[f64], b: &[f64]) {
        for (r, &ar) in a.iter().enumerate() {
            if ar != 0.0 {
                let row = &mut self.data[r * self.cols..(r + 1) * self.cols];
                for (x, &bc) in row.iter_mut().zip(b) {
                    *x += ar * bc;
                }
            }
        }
    }
}

/// Dot product with four independent accumulators so the loop vectorizes.
/// The summation order is fixed, so results are reproducible.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Anything that can act as a weight matrix in the recurrent cell.
pub trait Linear {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    /// `out += self · v`. Shapes are checked when the model is built.
    fn mul_add(&self, v: &[f64], out: &mut [f64]);
}

impl Linear for Matrix {
    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn mul_add(&self, v: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            *o += dot(self.row(r), v);
        }
    }
}

/// Gate order used by every per-gate array: forget, input, output, cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Forget = 0,
    Input = 1,
    Output = 2,
    Cell = 3,
}

pub const GATES: [Gate; 4] = [Gate::Forget, Gate::Input, Gate::Output, Gate::Cell];

impl Gate {
    pub fn suffix(self) -> char {
        match self {
            Gate::Forget => 'f',
            Gate::Input => 'i',
            Gate::Output => 'o',
            Gate::Cell => 'c',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LstmShape {
    /// Features per time step.
    pub input_size: usize,
    pub hidden_size: usize,
    /// Values emitted by the output layer (horizon × features).
    pub output_size: usize,
    /// Time steps per input window.
    pub input_len: usize,
}

impl LstmShape {
    pub fn window_len(&self) -> usize {
        self.input_len * self.input_size
    }
}

/// Gate input weights, recurrent weights, biases, output weights, output bias.
pub(crate) type Parts<M> = ([M; 4], [M; 4], [Vec<f64>; 4], M, Vec<f64>);

/// Single-layer LSTM with a fully-connected head on the final hidden state.
/// `M` is the weight storage: dense floats or quantized codes.
#[derive(Debug, Clone, PartialEq)]
pub struct Lstm<M = Matrix> {
    shape: LstmShape,
    w: [M; 4],
    u: [M; 4],
    b: [Vec<f64>; 4],
    wy: M,
    by: Vec<f64>,
}

pub type LstmModel = Lstm<Matrix>;

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Activations of one step, kept for backpropagation.
#[derive(Debug, Clone)]
pub(crate) struct StepTrace {
    pub gates: [Vec<f64>; 4],
    pub c: Vec<f64>,
    pub h: Vec<f64>,
}

impl<M: Linear> Lstm<M> {
    pub fn from_parts(shape: LstmShape, w: [M; 4], u: [M; 4], b: [Vec<f64>; 4], wy: M, by: Vec<f64>) -> Result<Self> {
        let LstmShape { input_size, hidden_size: hs, output_size, input_len } = shape;
        if input_size == 0 || hs == 0 || output_size == 0 || input_len == 0 {
            return Err(Error::Model(format!("all dimensions must be positive: {shape:?}")));
        }
        let check = |name: &str, m: &M, rows: usize, cols: usize| {
            if m.rows() != rows || m.cols() != cols {
                return Err(Error::Model(format!("{name} is {}x{}, expected {rows}x{cols}", m.rows(), m.cols())));
            }
            Ok(())
        };
        for g in GATES {
            check(&format!("W_{}", g.suffix()), &w[g as usize], hs, input_size)?;
            check(&format!("U_{}", g.suffix()), &u[g as usize], hs, hs)?;
            if b[g as usize].len() != hs {
                return Err(Error::Model(format!(
                    "b_{} has length {}, expected {hs}",
                    g.suffix(),
                    b[g as usize].len()
                )));
            }
        }
        check("W_y", &wy, output_size, hs)?;
        if by.len() != output_size {
            return Err(Error::Model(format!("b_y has length {}, expected {output_size}", by.len())));
        }
        if b.iter().chain(std::iter::once(&by)).flatten().any(|v| !v.is_finite()) {
            return Err(Error::Model("non-finite bias".into()));
        }
        Ok(Self { shape, w, u, b, wy, by })
    }

    pub fn shape(&self) -> LstmShape {
        self.shape
    }

    pub fn input_weights(&self, g: Gate) -> &M {
        &self.w[g as usize]
    }

    pub fn recurrent_weights(&self, g: Gate) -> &M {
        &self.u[g as usize]
    }

    pub fn bias(&self, g: Gate) -> &[f64] {
        &self.b[g as usize]
    }

    pub fn output_weights(&self) -> &M {
        &self.wy
    }

    pub fn output_bias(&self) -> &[f64] {
        &self.by
    }

    #[allow(clippy::type_complexity)]
    pub(crate) fn parts_mut(&mut self) -> (&mut [M; 4], &mut [M; 4], &mut [Vec<f64>; 4], &mut M, &mut Vec<f64>) {
        (&mut self.w, &mut self.u, &mut self.b, &mut self.wy, &mut self.by)
    }

    pub(crate) fn into_parts(self) -> Parts<M> {
        (self.w, self.u, self.b, self.wy, self.by)
    }

    pub(crate) fn gate_activations(&self, x: &[f64], h_prev: &[f64]) -> [Vec<f64>; 4] {
        GATES.map(|g| {
            let k = g as usize;
            let mut z = self.b[k].clone();
            self.w[k].mul_add(x, &mut z);
            self.u[k].mul_add(h_prev, &mut z);
            match g {
                Gate::Cell => z.iter_mut().for_each(|v| *v = v.tanh()),
                _ => z.iter_mut().for_each(|v| *v = sigmoid(*v)),
            }
            z
        })
    }

    pub(crate) fn trace_step(&self, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> StepTrace {
        let gates = self.gate_activations(x, h_prev);
        let [f, i, o, g] = &gates;
        let c: Vec<f64> = (0..c_prev.len()).map(|k| f[k] * c_prev[k] + i[k] * g[k]).collect();
        let h = c.iter().zip(o).map(|(c, o)| o * c.tanh()).collect();
        StepTrace { gates, c, h }
    }

    /// One recurrent step, returning `(h_t, c_t)`.
    pub fn step(&self, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let hs = self.shape.hidden_size;
        if x.len() != self.shape.input_size || h_prev.len() != hs || c_prev.len() != hs {
            return Err(Error::Model(format!(
                "step got x {}, h {}, c {}; expected {}, {hs}, {hs}",
                x.len(),
                h_prev.len(),
                c_prev.len(),
                self.shape.input_size
            )));
        }
        if x.iter().chain(h_prev).chain(c_prev).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite state or input".into()));
        }
        let t = self.trace_step(x, h_prev, c_prev);
        Ok((t.h, t.c))
    }

    pub(crate) fn run(&self, window: &[f64], mut trace: Option<&mut Vec<StepTrace>>) -> Vec<f64> {
        let hs = self.shape.hidden_size;
        let mut h = vec![0.0; hs];
        let mut c = vec![0.0; hs];
        for x in window.chunks(self.shape.input_size) {
            let t = self.trace_step(x, &h, &c);
            h.clone_from(&t.h);
            c.clone_from(&t.c);
            if let Some(tr) = trace.as_deref_mut() {
                tr.push(t);
            }
        }
        let mut y = self.by.clone();
        self.wy.mul_add(&h, &mut y);
        y
    }

    /// Runs the window from a zero state and maps the final hidden state
    /// through the output layer.
    pub fn forecast(&self, window: &[f64]) -> Result<Vec<f64>> {
        if window.len() != self.shape.window_len() {
            return Err(Error::InvalidInput(format!(
                "window has {} values, model expects {}",
                window.len(),
                self.shape.window_len()
            )));
        }
        if window.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite value in window".into()));
        }
        Ok(self.run(window, None))
    }
}

impl LstmModel {
    pub fn zeros(shape: LstmShape) -> Self {
        let hs = shape.hidden_size;
        Self {
            shape,
            w: std::array::from_fn(|_| Matrix::zeros(hs, shape.input_size)),
            u: std::array::from_fn(|_| Matrix::zeros(hs, hs)),
            b: std::array::from_fn(|_| vec![0.0; hs]),
            wy: Matrix::zeros(shape.output_size, hs),
            by: vec![0.0; shape.output_size],
        }
    }

    /// Uniform weights in ±1/√hidden and a forget-gate bias of 1.
    pub fn random(shape: LstmShape, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = Self::zeros(shape);
        let k = 1.0 / (shape.hidden_size as f64).sqrt();
        for p in m.params_mut() {
            p.iter_mut().for_each(|v| *v = rng.random_range(-k..k));
        }
        m.b[Gate::Forget as usize].iter_mut().for_each(|v| *v = 1.0);
        m
    }

    pub fn input_weights_mut(&mut self, g: Gate) -> &mut Matrix {
        &mut self.w[g as usize]
    }

    pub fn recurrent_weights_mut(&mut self, g: Gate) -> &mut Matrix {
        &mut self.u[g as usize]
    }

    pub fn bias_mut(&mut self, g: Gate) -> &mut [f64] {
        &mut self.b[g as usize]
    }

    pub fn output_weights_mut(&mut self) -> &mut Matrix {
        &mut self.wy
    }

    pub fn output_bias_mut(&mut self) -> &mut [f64] {
        &mut self.by
    }

    /// Parameter blocks in a fixed order: W_*, U_*, b_*, W_y, b_y.
    pub fn params(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::with_capacity(14);
        out.extend(self.w.iter().map(Matrix::as_slice));
        out.extend(self.u.iter().map(Matrix::as_slice));
        out.extend(self.b.iter().map(Vec::as_slice));
        out.push(self.wy.as_slice());
        out.push(&self.by);
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::with_capacity(14);
        out.extend(self.w.iter_mut().map(Matrix::as_mut_slice));
        out.extend(self.u.iter_mut().map(Matrix::as_mut_slice));
        out.extend(self.b.iter_mut().map(Vec::as_mut_slice));
        out.push(self.wy.as_mut_slice());
        out.push(&mut self.by);
        out
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.params().iter().all(|p| p.iter().all(|v| v.is_finite()))
    }
}
