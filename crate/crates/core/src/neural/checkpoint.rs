//! Binary parameter checkpoints.
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! offset  size  field
//! 0       8     magic "RISDRLCK"
//! 8       4     u32 format version (1)
//! 12      4     u32 input size
//! 16      4     u32 layer count L
//! 20      4     u32 flags (bit 0: Adam moments present)
//! 24      24*L  layer records
//!               u8  kind (0 conv1d, 1 flatten, 2 dense)
//!               u8  activation (0 relu, 1 softmax, 2 linear, 3 tanh-scaled; 0 for flatten)
//!               u16 reserved, zero
//!               u32 a  (conv1d: filters, dense: units, flatten: 0)
//!               u32 b  (conv1d: width, else 0)
//!               u32 c  (conv1d: stride, else 0)
//!               f64 tanh scale (0.0 unless tanh-scaled)
//! ..      8     u64 parameter count P
//! ..      8     u64 Adam step counter
//! ..      8*P   f64 parameter values
//! ..      16*P  f64 first moments then f64 second moments (only if flag bit 0)
//! ```

use std::io::{Read, Write};
use std::path::Path;

use super::{Activation, LayerSpec, Network, NetworkSpec, ParameterSet};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"RISDRLCK";
pub const CHECKPOINT_VERSION: u32 = 1;
const FLAG_MOMENTS: u32 = 1;

fn activation_code(a: Activation) -> (u8, f64) {
    match a {
        Activation::Relu => (0, 0.0),
        Activation::Softmax => (1, 0.0),
        Activation::Linear => (2, 0.0),
        Activation::TanhScaled(s) => (3, s),
    }
}

fn activation_from(code: u8, scale: f64) -> Option<Activation> {
    Some(match code {
        0 => Activation::Relu,
        1 => Activation::Softmax,
        2 => Activation::Linear,
        3 => Activation::TanhScaled(scale),
        _ => return None,
    })
}

fn to_u32(x: usize, what: &str) -> Result<u32> {
    u32::try_from(x).map_err(|_| Error::Config(format!("{what} {x} does not fit the checkpoint format")))
}

/// Serializes a network into the byte layout above.
pub fn encode_checkpoint(net: &Network, with_moments: bool) -> Result<Vec<u8>> {
    let spec = &net.spec;
    let mut out = Vec::with_capacity(40 + 24 * spec.layers().len() + 24 * spec.param_count());
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&to_u32(spec.input_size(), "input size")?.to_le_bytes());
    out.extend_from_slice(&to_u32(spec.layers().len(), "layer count")?.to_le_bytes());
    out.extend_from_slice(&(if with_moments { FLAG_MOMENTS } else { 0 }).to_le_bytes());
    for layer in spec.layers() {
        let (kind, act, a, b, c) = match *layer {
            LayerSpec::Conv1d { filters, width, stride, activation } => (0u8, Some(activation), filters, width, stride),
            LayerSpec::Flatten => (1, None, 0, 0, 0),
            LayerSpec::Dense { units, activation } => (2, Some(activation), units, 0, 0),
        };
        let (code, scale) = act.map(activation_code).unwrap_or((0, 0.0));
        out.push(kind);
        out.push(code);
        out.extend_from_slice(&0u16.to_le_bytes());
        for v in [a, b, c] {
            out.extend_from_slice(&to_u32(v, "layer size")?.to_le_bytes());
        }
        out.extend_from_slice(&scale.to_le_bytes());
    }
    let p = &net.params;
    out.extend_from_slice(&(p.len() as u64).to_le_bytes());
    out.extend_from_slice(&p.step().to_le_bytes());
    let arrays: &[&[f64]] =
        if with_moments { &[p.values(), p.first_moment(), p.second_moment()] } else { &[p.values()] };
    for arr in arrays {
        for v in arr.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(self.err(format!("truncated at byte {} (need {n} more)", self.pos)));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let bytes = self.take(n.checked_mul(8).ok_or_else(|| self.err("parameter count overflow".into()))?)?;
        Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }

    fn err(&self, msg: String) -> Error {
        Error::Parse { path: self.path.to_path_buf(), msg }
    }
}

/// Parses bytes produced by [`encode_checkpoint`]. `path` is only used in
/// error messages.
pub fn decode_checkpoint(buf: &[u8], path: &Path) -> Result<Network> {
    let mut cur = Cursor { buf, pos: 0, path };
    if cur.take(8)? != CHECKPOINT_MAGIC {
        return Err(cur.err("bad magic".into()));
    }
    let version = cur.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(cur.err(format!("unsupported checkpoint version {version}")));
    }
    let input = cur.u32()? as usize;
    let n_layers = cur.u32()? as usize;
    let flags = cur.u32()?;
    let mut layers = Vec::with_capacity(n_layers.min(1024));
    for k in 0..n_layers {
        let kind = cur.u8()?;
        let code = cur.u8()?;
        let _reserved = cur.u16()?;
        let (a, b, c) = (cur.u32()? as usize, cur.u32()? as usize, cur.u32()? as usize);
        let scale = cur.f64()?;
        let act = activation_from(code, scale).ok_or_else(|| cur.err(format!("layer {k}: bad activation {code}")))?;
        layers.push(match kind {
            0 => LayerSpec::Conv1d { filters: a, width: b, stride: c, activation: act },
            1 => LayerSpec::Flatten,
            2 => LayerSpec::Dense { units: a, activation: act },
            other => return Err(cur.err(format!("layer {k}: unknown kind {other}"))),
        });
    }
    let spec = NetworkSpec::new(input, layers).map_err(|e| cur.err(e.to_string()))?;
    let count = cur.u64()? as usize;
    if count != spec.param_count() {
        return Err(cur.err(format!("topology needs {} parameters, file has {count}", spec.param_count())));
    }
    let step = cur.u64()?;
    let values = cur.f64s(count)?;
    let params = if flags & FLAG_MOMENTS != 0 {
        let m = cur.f64s(count)?;
        let v = cur.f64s(count)?;
        ParameterSet::from_parts(values, m, v, step)?
    } else {
        ParameterSet::from_parts(values, vec![0.0; count], vec![0.0; count], step)?
    };
    if cur.pos != buf.len() {
        return Err(cur.err(format!("{} trailing bytes", buf.len() - cur.pos)));
    }
    Network::new(spec, params)
}

pub fn write_checkpoint(path: &Path, net: &Network, with_moments: bool) -> Result<()> {
    let bytes = encode_checkpoint(net, with_moments)?;
    let mut f = std::fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<Network> {
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    decode_checkpoint(&buf, path)
}
