//! Binary model container, version 1. All integers and floats are
//! little-endian.
//!
//! ```text
//! magic        8 bytes  "WFLSTM\0\0"
//! version      u16      1
//! channel      u8       0 speed, 1 direction, 2 direction sin/cos, 3 joint
//! reserved     u8
//! input_size   u32
//! hidden_size  u32
//! output_size  u32
//! input_len    u32
//! norm_count   u32      then norm_count × (min f64, max f64)
//! matrix_count u32      then per matrix:
//!   name       8 bytes  NUL-padded ("W_f", "U_c", "W_y", ...)
//!   rows, cols u32, u32
//!   bits       u8       2, 4, 8, 16, or 32 for f32 weights
//!   reserved   3 bytes
//!   scale      f64      dequantization scale (0 for f32 weights)
//!   payload    u32      byte length of the data that follows
//!   data                codes packed LSB-first, ceil(rows·cols·bits/8)
//!                       bytes, or rows·cols f32 values
//! bias_count   u32      then per bias: name (8 bytes), len u32, len × f64
//! ```
//!
//! Matrices appear in the order W_f, W_i, W_o, W_c, U_f, U_i, U_o, U_c, W_y
//! and biases in the order b_f, b_i, b_o, b_c, b_y. Float models are stored
//! at f32 precision, so a decoded float model is the f32-rounded original.

use serde::{Deserialize, Serialize};

use crate::data::{Channel, MinMax};
use crate::error::{Error, Result};

use super::lstm::{Lstm, LstmModel, LstmShape, Matrix, GATES};
use super::quant::{QuantizedLstm, QuantizedMatrix};
use super::ForecastModel;

pub const MAGIC: &[u8; 8] = b"WFLSTM\0\0";
pub const VERSION: u16 = 1;
/// Bytes of per-matrix metadata preceding each payload.
pub const MATRIX_HEADER_BYTES: usize = 32;
const NAME_BYTES: usize = 8;

/// A model with what is needed to use it on raw data.
#[derive(Debug, Clone, PartialEq)]
pub struct SavedModel {
    pub model: ForecastModel,
    pub channel: Channel,
    pub norms: Vec<MinMax>,
}

/// Payload bytes of one matrix with `n` entries at `bits` (32 = f32).
pub fn payload_bytes(bits: u8, n: usize) -> usize {
    (n * bits as usize).div_ceil(8)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixStorage {
    pub name: String,
    pub bits: u8,
    pub entries: usize,
    pub header_bytes: usize,
    pub payload_bytes: usize,
}

/// Per-matrix byte accounting of the weight section.
pub fn weight_storage(model: &ForecastModel) -> Vec<MatrixStorage> {
    matrix_entries(model)
        .into_iter()
        .map(|(name, rows, cols, bits, _)| MatrixStorage {
            name,
            bits,
            entries: rows * cols,
            header_bytes: MATRIX_HEADER_BYTES,
            payload_bytes: payload_bytes(bits, rows * cols),
        })
        .collect()
}

enum Payload<'a> {
    Float(&'a [f64]),
    Codes(&'a [u16]),
}

type Entry<'a> = (String, usize, usize, u8, (f64, Payload<'a>));

fn matrix_entries(model: &ForecastModel) -> Vec<Entry<'_>> {
    fn dense(name: String, m: &Matrix) -> Entry<'_> {
        (name, m.rows(), m.cols(), 32, (0.0, Payload::Float(m.as_slice())))
    }
    fn coded(name: String, m: &QuantizedMatrix) -> Entry<'_> {
        (name, m.rows(), m.cols(), m.bits(), (m.scale(), Payload::Codes(m.codes())))
    }
    match model {
        ForecastModel::Float(m) => named(m).into_iter().map(|(n, x)| dense(n, x)).collect(),
        ForecastModel::Quantized(m) => named(m).into_iter().map(|(n, x)| coded(n, x)).collect(),
    }
}

fn named<M: super::lstm::Linear>(m: &Lstm<M>) -> Vec<(String, &M)> {
    let mut out: Vec<(String, &M)> = GATES.iter().map(|&g| (format!("W_{}", g.suffix()), m.input_weights(g))).collect();
    out.extend(GATES.iter().map(|&g| (format!("U_{}", g.suffix()), m.recurrent_weights(g))));
    out.push(("W_y".into(), m.output_weights()));
    out
}

fn channel_code(c: Channel) -> u8 {
    match c {
        Channel::Speed => 0,
        Channel::Direction => 1,
        Channel::DirectionSinCos => 2,
        Channel::Joint => 3,
    }
}

fn put_name(out: &mut Vec<u8>, name: &str) {
    let mut buf = [0u8; NAME_BYTES];
    buf[..name.len()].copy_from_slice(name.as_bytes());
    out.extend_from_slice(&buf);
}

fn pack(codes: &[u16], bits: u8) -> Vec<u8> {
    let mut out = Vec::with_capacity(payload_bytes(bits, codes.len()));
    let (mut acc, mut filled) = (0u32, 0u8);
    for &c in codes {
        acc |= u32::from(c) << filled;
        filled += bits;
        while filled >= 8 {
            out.push(acc as u8);
            acc >>= 8;
            filled -= 8;
        }
    }
    if filled > 0 {
        out.push(acc as u8);
    }
    out
}

fn unpack(bytes: &[u8], bits: u8, n: usize) -> Vec<u16> {
    let mask = (1u32 << bits) - 1;
    let mut out = Vec::with_capacity(n);
    let (mut acc, mut filled) = (0u32, 0u8);
    let mut it = bytes.iter();
    while out.len() < n {
        while filled < bits {
            acc |= u32::from(*it.next().unwrap_or(&0)) << filled;
            filled += 8;
        }
        out.push((acc & mask) as u16);
        acc >>= bits;
        filled -= bits;
    }
    out
}

pub fn encode_model(saved: &SavedModel) -> Vec<u8> {
    let shape = saved.model.shape();
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(channel_code(saved.channel));
    out.push(0);
    for v in [shape.input_size, shape.hidden_size, shape.output_size, shape.input_len] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    out.extend_from_slice(&(saved.norms.len() as u32).to_le_bytes());
    for m in &saved.norms {
        out.extend_from_slice(&m.min.to_le_bytes());
        out.extend_from_slice(&m.max.to_le_bytes());
    }
    let entries = matrix_entries(&saved.model);
    out.extend_from_slice(&(entries.len() as u32).to_le_bytes());
    for (name, rows, cols, bits, (scale, payload)) in entries {
        let data = match payload {
            Payload::Float(v) => v.iter().flat_map(|&x| (x as f32).to_le_bytes()).collect(),
            Payload::Codes(c) => pack(c, bits),
        };
        put_name(&mut out, &name);
        out.extend_from_slice(&(rows as u32).to_le_bytes());
        out.extend_from_slice(&(cols as u32).to_le_bytes());
        out.extend_from_slice(&[bits, 0, 0, 0]);
        out.extend_from_slice(&scale.to_le_bytes());
        out.extend_from_slice(&(data.len() as u32).to_le_bytes());
        out.extend_from_slice(&data);
    }
    let biases: Vec<(String, &[f64])> = match &saved.model {
        ForecastModel::Float(m) => biases_of(m),
        ForecastModel::Quantized(m) => biases_of(m),
    };
    out.extend_from_slice(&(biases.len() as u32).to_le_bytes());
    for (name, b) in biases {
        put_name(&mut out, &name);
        out.extend_from_slice(&(b.len() as u32).to_le_bytes());
        b.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes()));
    }
    out
}

fn biases_of<M: super::lstm::Linear>(m: &Lstm<M>) -> Vec<(String, &[f64])> {
    let mut out: Vec<(String, &[f64])> = GATES.iter().map(|&g| (format!("b_{}", g.suffix()), m.bias(g))).collect();
    out.push(("b_y".into(), m.output_bias()));
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Codec(format!("truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn name(&mut self) -> Result<String> {
        let raw = self.take(NAME_BYTES)?;
        let end = raw.iter().position(|&b| b == 0).unwrap_or(NAME_BYTES);
        String::from_utf8(raw[..end].to_vec()).map_err(|_| Error::Codec("name is not UTF-8".into()))
    }
}

enum Decoded {
    Float(Matrix),
    Codes(QuantizedMatrix),
}

pub fn decode_model(bytes: &[u8]) -> Result<SavedModel> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(MAGIC.len())? != MAGIC {
        return Err(Error::Codec("bad magic".into()));
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(Error::Codec(format!("unsupported version {version}")));
    }
    let channel = match r.u8()? {
        0 => Channel::Speed,
        1 => Channel::Direction,
        2 => Channel::DirectionSinCos,
        3 => Channel::Joint,
        c => return Err(Error::Codec(format!("unknown channel code {c}"))),
    };
    r.u8()?;
    let shape = LstmShape { input_size: r.u32()?, hidden_size: r.u32()?, output_size: r.u32()?, input_len: r.u32()? };
    let norms = (0..r.u32()?).map(|_| Ok(MinMax { min: r.f64()?, max: r.f64()? })).collect::<Result<Vec<_>>>()?;

    let count = r.u32()?;
    if count != 9 {
        return Err(Error::Codec(format!("expected 9 weight matrices, found {count}")));
    }
    let mut mats = Vec::with_capacity(count);
    for _ in 0..count {
        let name = r.name()?;
        let (rows, cols) = (r.u32()?, r.u32()?);
        let bits = r.u8()?;
        r.take(3)?;
        let scale = r.f64()?;
        let len = r.u32()?;
        let n = rows.checked_mul(cols).ok_or_else(|| Error::Codec(format!("{name}: size overflow")))?;
        if len != payload_bytes(bits, n) {
            return Err(Error::Codec(format!("{name}: payload {len} bytes, expected {}", payload_bytes(bits, n))));
        }
        let data = r.take(len)?;
        mats.push(if bits == 32 {
            let v =
                data.chunks_exact(4).map(|c| f64::from(f32::from_le_bytes(c.try_into().expect("4 bytes")))).collect();
            Decoded::Float(Matrix::from_vec(rows, cols, v)?)
        } else {
            Decoded::Codes(QuantizedMatrix::from_codes(rows, cols, bits, scale, unpack(data, bits, n))?)
        });
    }
    let bias_count = r.u32()?;
    if bias_count != 5 {
        return Err(Error::Codec(format!("expected 5 bias vectors, found {bias_count}")));
    }
    let mut biases = Vec::with_capacity(5);
    for _ in 0..bias_count {
        r.name()?;
        let len = r.u32()?;
        biases.push((0..len).map(|_| r.f64()).collect::<Result<Vec<f64>>>()?);
    }
    if r.pos != bytes.len() {
        return Err(Error::Codec(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    let by = biases.pop().expect("5 biases");
    let b: [Vec<f64>; 4] = biases.try_into().expect("4 gate biases");

    let model = if mats.iter().all(|m| matches!(m, Decoded::Float(_))) {
        let m: Vec<Matrix> =
            mats.into_iter().map(|m| if let Decoded::Float(x) = m { x } else { unreachable!() }).collect();
        let (w, u, wy) = split9(m);
        ForecastModel::Float(LstmModel::from_parts(shape, w, u, b, wy, by)?)
    } else if mats.iter().all(|m| matches!(m, Decoded::Codes(_))) {
        let m: Vec<QuantizedMatrix> =
            mats.into_iter().map(|m| if let Decoded::Codes(x) = m { x } else { unreachable!() }).collect();
        let (w, u, wy) = split9(m);
        ForecastModel::Quantized(QuantizedLstm::from_parts(shape, w, u, b, wy, by)?)
    } else {
        return Err(Error::Codec("mixed float and quantized matrices".into()));
    };
    Ok(SavedModel { model, channel, norms })
}

fn split9<T>(mut v: Vec<T>) -> ([T; 4], [T; 4], T) {
    let wy = v.pop().expect("9 matrices");
    let u: Vec<T> = v.split_off(4);
    (v.try_into().unwrap_or_else(|_| unreachable!()), u.try_into().unwrap_or_else(|_| unreachable!()), wy)
}
