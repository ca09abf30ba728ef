//! Fixed-point weight quantization.
//!
//! A matrix is scaled by `γ·median(|W|)`, clipped to `[-0.5, 0.5]`, shifted
//! to `[0, 1]` and snapped to the grid `k / (2^ω - 1)`. Dequantization maps
//! level `k` back to `(k / (2^ω - 1) - 0.5)·scale`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::lstm::{Linear, Lstm, LstmModel, Matrix};

pub const DEFAULT_GAMMA: f64 = 2.5;
pub const SUPPORTED_BITS: [u8; 4] = [2, 4, 8, 16];
/// Zero-level fraction above which matvec switches to the sparse kernel.
pub const DEFAULT_SPARSE_THRESHOLD: f64 = 0.5;

pub fn check_bits(bits: u8) -> Result<()> {
    if SUPPORTED_BITS.contains(&bits) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("unsupported bit width {bits}; expected one of {SUPPORTED_BITS:?}")))
    }
}

/// Largest code, `2^ω - 1`.
pub fn max_code(bits: u8) -> u32 {
    (1u32 << bits) - 1
}

/// Code that an exact zero weight snaps to. Because `2^ω - 1` is odd no
/// grid level is exactly 0.5, so this code dequantizes to a small
/// positive value rather than zero.
pub fn zero_code(bits: u8) -> u16 {
    snap(0.5, max_code(bits))
}

fn snap(level: f64, max: u32) -> u16 {
    (max as f64 * level + 0.5).floor() as u16
}

fn median_abs(values: &[f64]) -> f64 {
    let mut a: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    a.sort_by(f64::total_cmp);
    let n = a.len();
    if n % 2 == 1 {
        a[n / 2]
    } else {
        0.5 * (a[n / 2 - 1] + a[n / 2])
    }
}

/// Rows of nonzero deltas relative to the zero level, CSR layout.
#[derive(Debug, Clone, PartialEq)]
struct Sparse {
    row_ptr: Vec<usize>,
    entries: Vec<(u32, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedMatrix {
    rows: usize,
    cols: usize,
    bits: u8,
    scale: f64,
    codes: Vec<u16>,
    zero_fraction: f64,
    sparse: Option<Sparse>,
}

impl QuantizedMatrix {
    /// Builds from raw codes, validating every code and the scale.
    pub fn from_codes(rows: usize, cols: usize, bits: u8, scale: f64, codes: Vec<u16>) -> Result<Self> {
        check_bits(bits)?;
        if codes.len() != rows * cols {
            return Err(Error::Model(format!("{} codes for a {rows}x{cols} matrix", codes.len())));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Model(format!("scale must be positive and finite, got {scale}")));
        }
        let max = max_code(bits);
        if let Some(&c) = codes.iter().find(|&&c| u32::from(c) > max) {
            return Err(Error::Model(format!("code {c} exceeds {max} at {bits} bits")));
        }
        let z = zero_code(bits);
        let zero_fraction =
            if codes.is_empty() { 0.0 } else { codes.iter().filter(|&&c| c == z).count() as f64 / codes.len() as f64 };
        let mut q = Self { rows, cols, bits, scale, codes, zero_fraction, sparse: None };
        q.set_sparse_threshold(DEFAULT_SPARSE_THRESHOLD);
        Ok(q)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bits(&self) -> u8 {
        self.bits
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn codes(&self) -> &[u16] {
        &self.codes
    }

    /// Fraction of entries at [`zero_code`].
    pub fn zero_fraction(&self) -> f64 {
        self.zero_fraction
    }

    pub fn is_sparse(&self) -> bool {
        self.sparse.is_some()
    }

    /// Uses the sparse kernel when the zero-level fraction exceeds `threshold`.
    pub fn set_sparse_threshold(&mut self, threshold: f64) {
        self.sparse = (self.zero_fraction > threshold).then(|| {
            let z = zero_code(self.bits);
            let dz = self.level_value(z);
            let mut row_ptr = Vec::with_capacity(self.rows + 1);
            let mut entries = Vec::new();
            row_ptr.push(0);
            for r in 0..self.rows {
                for (c, &k) in self.codes[r * self.cols..(r + 1) * self.cols].iter().enumerate() {
                    if k != z {
                        entries.push((c as u32, self.level_value(k) - dz));
                    }
                }
                row_ptr.push(entries.len());
            }
            Sparse { row_ptr, entries }
        });
    }

    /// Grid level `k / (2^ω - 1)` of a code.
    pub fn level(&self, code: u16) -> f64 {
        f64::from(code) / max_code(self.bits) as f64
    }

    fn level_value(&self, code: u16) -> f64 {
        (self.level(code) - 0.5) * self.scale
    }

    pub fn dequantize(&self) -> Matrix {
        let data = self.codes.iter().map(|&k| self.level_value(k)).collect();
        Matrix::from_vec(self.rows, self.cols, data).expect("shape is consistent")
    }

    pub fn sparse_matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::Model(format!("vector of length {} for a {}x{} matrix", v.len(), self.rows, self.cols)));
        }
        let mut out = vec![0.0; self.rows];
        self.mul_add(v, &mut out);
        Ok(out)
    }
}

impl Linear for QuantizedMatrix {
    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn mul_add(&self, v: &[f64], out: &mut [f64]) {
        match &self.sparse {
            // W·v = d(z)·Σv + Σ_{k≠z} (d(k) - d(z))·v_j
            Some(sp) => {
                let base = self.level_value(zero_code(self.bits)) * v.iter().sum::<f64>();
                for (r, o) in out.iter_mut().enumerate() {
                    let row = &sp.entries[sp.row_ptr[r]..sp.row_ptr[r + 1]];
                    *o += base + row.iter().map(|&(c, d)| d * v[c as usize]).sum::<f64>();
                }
            }
            None => {
                for (r, o) in out.iter_mut().enumerate() {
                    let row = &self.codes[r * self.cols..(r + 1) * self.cols];
                    *o += row.iter().zip(v).map(|(&k, x)| self.level_value(k) * x).sum::<f64>();
                }
            }
        }
    }
}

pub fn quantize(w: &Matrix, bits: u8) -> Result<QuantizedMatrix> {
    quantize_with_gamma(w, bits, DEFAULT_GAMMA)
}

pub fn quantize_with_gamma(w: &Matrix, bits: u8, gamma: f64) -> Result<QuantizedMatrix> {
    if w.as_slice().is_empty() {
        return Err(Error::InvalidInput("cannot quantize an empty matrix".into()));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidInput(format!("gamma must be positive, got {gamma}")));
    }
    let med = median_abs(w.as_slice());
    if !(med > 0.0) {
        return Err(Error::QuantizationDegenerate);
    }
    quantize_with_scale(w, bits, gamma * med)
}

/// Quantizes against a fixed scale instead of one derived from the data.
pub fn quantize_with_scale(w: &Matrix, bits: u8, scale: f64) -> Result<QuantizedMatrix> {
    check_bits(bits)?;
    if w.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite weight".into()));
    }
    let max = max_code(bits);
    let codes = w.as_slice().iter().map(|&x| snap((x / scale).clamp(-0.5, 0.5) + 0.5, max)).collect();
    QuantizedMatrix::from_codes(w.rows(), w.cols(), bits, scale, codes)
}

/// Bit widths for the recurrent weights (`W_*`, `U_*`) and the output layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantSpec {
    pub weight_bits: u8,
    pub output_bits: u8,
    pub gamma: f64,
}

impl QuantSpec {
    pub fn uniform(bits: u8) -> Self {
        Self { weight_bits: bits, output_bits: bits, gamma: DEFAULT_GAMMA }
    }
}

impl Default for QuantSpec {
    fn default() -> Self {
        Self::uniform(4)
    }
}

pub type QuantizedLstm = Lstm<QuantizedMatrix>;

/// Post-training quantization. Biases stay full precision.
pub fn quantize_model(model: &LstmModel, spec: &QuantSpec) -> Result<QuantizedLstm> {
    let q = |m: &Matrix, bits| quantize_with_gamma(m, bits, spec.gamma);
    let shape = model.shape();
    let (w, u, b, wy, by) = model.clone().into_parts();
    let w = try_map4(&w, |m| q(m, spec.weight_bits))?;
    let u = try_map4(&u, |m| q(m, spec.weight_bits))?;
    Lstm::from_parts(shape, w, u, b, q(&wy, spec.output_bits)?, by)
}

fn try_map4<T, U>(a: &[T; 4], f: impl Fn(&T) -> Result<U>) -> Result<[U; 4]> {
    let [x0, x1, x2, x3] = a;
    Ok([f(x0)?, f(x1)?, f(x2)?, f(x3)?])
}

impl QuantizedLstm {
    /// Dense float model with the dequantized weights.
    pub fn dequantized(&self) -> LstmModel {
        let (w, u, b, wy, by) = self.clone().into_parts();
        Lstm::from_parts(self.shape(), w.map(|m| m.dequantize()), u.map(|m| m.dequantize()), b, wy.dequantize(), by)
            .expect("shapes carried over")
    }

    pub fn set_sparse_threshold(&mut self, threshold: f64) {
        let (w, u, _, wy, _) = self.parts_mut();
        w.iter_mut().chain(u.iter_mut()).chain(std::iter::once(wy)).for_each(|m| m.set_sparse_threshold(threshold));
    }
}
