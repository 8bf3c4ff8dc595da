//! `PTTF` binary snapshots.
//!
//! Layout (little-endian): magic `PTTF`, version `u32`, `n` `u32`, `t` `f64`,
//! six parameters `f64` (`a, b, λ, μ, μ₁, μ₂`), then nine fields (three
//! velocity, six stress slots `11, 12, 13, 22, 23, 33`), each `n³` complex
//! coefficients as `(re, im)` pairs in storage order.

use std::path::Path;

use num_complex::Complex64;

use crate::error::{PttError, Result};
use crate::model::{FlowState, ModelParams};
use crate::spectral::{Grid, SpectralField, SymTensor};

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"PTTF";
pub const SNAPSHOT_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 8 + 6 * 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub state: FlowState,
    pub params: ModelParams,
}

pub fn encode_snapshot(state: &FlowState, params: &ModelParams) -> Vec<u8> {
    let grid = state.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 9 * 16 * grid.len());
    out.extend_from_slice(SNAPSHOT_MAGIC);
    out.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
    out.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    out.extend_from_slice(&state.t.to_le_bytes());
    for v in params.to_array() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for field in state.components() {
        for c in field.coeffs() {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let end = self.pos + N;
        let slice = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| PttError::Format(format!("truncated while reading {what} at byte {}", self.pos)))?;
        self.pos = end;
        Ok(slice.try_into().expect("slice has length N"))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(what)?))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(what)?))
    }
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<Snapshot> {
    let mut r = Reader { bytes, pos: 0 };
    if &r.take::<4>("magic")? != SNAPSHOT_MAGIC {
        return Err(PttError::Format("bad magic, expected PTTF".into()));
    }
    let version = r.u32("version")?;
    if version != SNAPSHOT_VERSION {
        return Err(PttError::UnsupportedVersion(version));
    }
    let n = r.u32("n")? as usize;
    let grid = Grid::new(n).map_err(|e| PttError::Format(format!("header grid size: {e}")))?;
    let t = r.f64("t")?;
    let mut params = [0.0; 6];
    for p in params.iter_mut() {
        *p = r.f64("parameters")?;
    }
    let expected = HEADER_LEN + 9 * 16 * grid.len();
    if bytes.len() != expected {
        return Err(PttError::Format(format!("expected {expected} bytes for n={n}, found {}", bytes.len())));
    }
    let mut fields = Vec::with_capacity(9);
    for _ in 0..9 {
        let mut coeffs = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            let re = r.f64("coefficients")?;
            let im = r.f64("coefficients")?;
            coeffs.push(Complex64::new(re, im));
        }
        fields.push(SpectralField::from_coeffs(grid, coeffs)?);
    }
    let mut it = fields.into_iter();
    let u = [(); 3].map(|_| it.next().expect("nine fields"));
    let tau = SymTensor {
        comps: [(); 6].map(|_| it.next().expect("nine fields")),
    };
    let state = FlowState {
        t,
        u,
        tau,
    };
    if !t.is_finite() {
        return Err(PttError::CorruptState(format!("non-finite time {t}")));
    }
    state.check_invariants().map_err(|e| PttError::CorruptState(e.to_string()))?;
    Ok(Snapshot {
        state,
        params: ModelParams::from_array(params),
    })
}

pub fn save_snapshot(state: &FlowState, params: &ModelParams, path: &Path) -> Result<()> {
    std::fs::write(path, encode_snapshot(state, params)).map_err(|e| PttError::io(path, e))
}

pub fn load_snapshot(path: &Path) -> Result<Snapshot> {
    let bytes = std::fs::read(path).map_err(|e| PttError::io(path, e))?;
    decode_snapshot(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_initial_data, InitialData};

    fn sample() -> (FlowState, ModelParams) {
        let g = Grid::new(8).unwrap();
        let mut s = make_initial_data(g, &InitialData::blowup(-2.0, 0.1, 3)).unwrap();
        s.t = 0.125;
        let p = ModelParams {
            a: 0.5,
            lambda: -0.25,
            ..ModelParams::default()
        };
        (s, p)
    }

    #[test]
    fn round_trip_is_bitwise() {
        let (s, p) = sample();
        let bytes = encode_snapshot(&s, &p);
        let back = decode_snapshot(&bytes).unwrap();
        assert_eq!(encode_snapshot(&back.state, &back.params), bytes);
        assert_eq!(back.state, s);
        assert_eq!(back.params, p);
    }

    #[test]
    fn truncation_and_version_errors() {
        let (s, p) = sample();
        let bytes = encode_snapshot(&s, &p);
        assert!(matches!(decode_snapshot(&bytes[..bytes.len() - 1]), Err(PttError::Format(_))));
        assert!(matches!(decode_snapshot(&bytes[..10]), Err(PttError::Format(_))));
        let mut v2 = bytes.clone();
        v2[4..8].copy_from_slice(&2u32.to_le_bytes());
        assert!(matches!(decode_snapshot(&v2), Err(PttError::UnsupportedVersion(2))));
        let mut bad = bytes;
        bad[0] = b'X';
        assert!(matches!(decode_snapshot(&bad), Err(PttError::Format(_))));
    }

    #[test]
    fn divergent_payload_is_corrupt() {
        let (s, p) = sample();
        let mut bytes = encode_snapshot(&s, &p);
        // real part of u₁ at k = (1, 0, 0)
        let g = s.grid();
        let off = HEADER_LEN + 16 * g.mode_index([1, 0, 0]);
        bytes[off..off + 8].copy_from_slice(&1.0f64.to_le_bytes());
        assert!(matches!(decode_snapshot(&bytes), Err(PttError::CorruptState(_))));
    }
}
