//! Flat binary snapshots: 8-byte magic, u32 LE header length, JSON header, then the
//! arrays named in the header as consecutive little-endian f64 in row-major order.

use serde::{Deserialize, Serialize};

use super::{ModeField, NullBlockField, WaveError};

pub const MAGIC: &[u8; 8] = b"HZLSNAP1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArraySpec {
    pub name: String,
    pub shape: Vec<usize>,
}

impl ArraySpec {
    fn len(&self) -> usize {
        self.shape.iter().product()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotHeader {
    pub kind: String,
    pub arrays: Vec<ArraySpec>,
    pub meta: serde_json::Value,
}

pub fn encode(header: &SnapshotHeader, arrays: &[&[f64]]) -> Result<Vec<u8>, WaveError> {
    if header.arrays.len() != arrays.len() || header.arrays.iter().zip(arrays).any(|(s, a)| s.len() != a.len()) {
        return Err(WaveError::Config("snapshot arrays do not match the header".into()));
    }
    let json = serde_json::to_vec(header).map_err(|e| WaveError::Config(e.to_string()))?;
    let len = u32::try_from(json.len()).map_err(|_| WaveError::Config("header too large".into()))?;
    let total: usize = arrays.iter().map(|a| a.len()).sum();
    let mut out = Vec::with_capacity(12 + json.len() + 8 * total);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&len.to_le_bytes());
    out.extend_from_slice(&json);
    for a in arrays {
        for x in *a {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode(bytes: &[u8]) -> Result<(SnapshotHeader, Vec<Vec<f64>>), WaveError> {
    let bad = |m: &str| WaveError::Config(format!("malformed snapshot: {m}"));
    if bytes.len() < 12 || &bytes[..8] != MAGIC {
        return Err(bad("magic"));
    }
    let len = u32::from_le_bytes(bytes[8..12].try_into().expect("four bytes")) as usize;
    let body = bytes.get(12..12 + len).ok_or_else(|| bad("header length"))?;
    let header: SnapshotHeader = serde_json::from_slice(body).map_err(|e| bad(&e.to_string()))?;
    let mut pos = 12 + len;
    let mut arrays = Vec::with_capacity(header.arrays.len());
    for spec in &header.arrays {
        let n = spec.len();
        let raw = bytes.get(pos..pos + 8 * n).ok_or_else(|| bad("truncated data"))?;
        arrays.push(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("eight bytes"))).collect());
        pos += 8 * n;
    }
    if pos != bytes.len() {
        return Err(bad("trailing bytes"));
    }
    Ok((header, arrays))
}

/// All snapshots of an exterior run: t, r and (u, ∂_t u, ∂_r u) per snapshot.
pub fn encode_mode_field(field: &ModeField) -> Result<Vec<u8>, WaveError> {
    let (ns, nr) = (field.snapshots.len(), field.r.len());
    let t: Vec<f64> = field.snapshots.iter().map(|s| s.t).collect();
    let flat = |f: fn(&super::FieldSnapshot) -> &Vec<f64>| field.snapshots.iter().flat_map(|s| f(s).iter().copied()).collect::<Vec<f64>>();
    let (u, pi, phi) = (flat(|s| &s.u), flat(|s| &s.pi), flat(|s| &s.phi));
    let spec = |name: &str, shape: Vec<usize>| ArraySpec { name: name.into(), shape };
    let header = SnapshotHeader {
        kind: "exterior".into(),
        arrays: vec![spec("t", vec![ns]), spec("r", vec![nr]), spec("u", vec![ns, nr]), spec("dt_u", vec![ns, nr]), spec("dr_u", vec![ns, nr])],
        meta: serde_json::to_value(&field.meta).map_err(|e| WaveError::Config(e.to_string()))?,
    };
    encode(&header, &[&t, &field.r, &u, &pi, &phi])
}

/// The coarse u_ℓ lattice of an interior run with its u and v coordinates.
pub fn encode_null_field(field: &NullBlockField) -> Result<Vec<u8>, WaveError> {
    let g = &field.geometry;
    let us: Vec<f64> = field.snapshot_rows.iter().map(|&i| g.u(i)).collect();
    let vs: Vec<f64> = field.snapshot_cols.iter().map(|&j| g.v(j)).collect();
    let spec = |name: &str, shape: Vec<usize>| ArraySpec { name: name.into(), shape };
    let meta = serde_json::json!({
        "ell": field.ell,
        "mass2": field.mass2,
        "h": g.h,
        "r1": g.r1,
        "r2": g.r2,
        "kappa1": g.kappa1,
        "kappa2": g.kappa2,
        "max_abs_u": field.max_abs_u,
        "overflow_row": field.overflow,
    });
    let header = SnapshotHeader {
        kind: "interior".into(),
        arrays: vec![spec("u", vec![us.len()]), spec("v", vec![vs.len()]), spec("value", vec![us.len(), vs.len()])],
        meta,
    };
    encode(&header, &[&us, &vs, &field.snapshot])
}
