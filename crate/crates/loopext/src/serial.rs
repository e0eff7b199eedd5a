//! Serialization of sampled maps: a flat binary container (header with kind
//! and grid sizes, payload of row-major complex doubles, little endian) and
//! a JSON form for small grids.  Readers go through the validating
//! constructors, so malformed payloads are rejected.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::SU2Element;
use crate::error::{Error, Result};
use crate::maps::{DiskMap, Loop, PathOfLoops, SphereMap};

const MAGIC: &[u8; 4] = b"LXSM";
const VERSION: u8 = 1;

/// Any of the group-valued sampled maps.
#[derive(Debug, Clone, PartialEq)]
pub enum SampledMapData {
    Loop(Loop),
    Path(PathOfLoops),
    Disk(DiskMap),
    Sphere(SphereMap),
}

impl SampledMapData {
    fn kind(&self) -> u8 {
        match self {
            SampledMapData::Loop(_) => 1,
            SampledMapData::Path(_) => 2,
            SampledMapData::Disk(_) => 3,
            SampledMapData::Sphere(_) => 4,
        }
    }

    /// (n_u, n_s, n_theta), with zeros for absent axes.
    fn dims(&self) -> [u32; 3] {
        match self {
            SampledMapData::Loop(l) => [0, 0, l.n_theta() as u32],
            SampledMapData::Path(p) => [0, p.n_s() as u32, p.n_theta() as u32],
            SampledMapData::Disk(d) => [d.n_u() as u32, d.n_s() as u32, d.n_theta() as u32],
            SampledMapData::Sphere(s) => {
                let d = s.as_disk();
                [d.n_u() as u32, d.n_s() as u32, d.n_theta() as u32]
            }
        }
    }

    fn samples(&self) -> &[SU2Element] {
        match self {
            SampledMapData::Loop(l) => l.samples(),
            SampledMapData::Path(p) => p.row_major_samples(),
            SampledMapData::Disk(d) => d.samples(),
            SampledMapData::Sphere(s) => s.as_disk().samples(),
        }
    }

    fn rebuild(kind: u8, dims: [u32; 3], samples: Vec<SU2Element>) -> Result<SampledMapData> {
        let (n_u, n_s, n_t) = (dims[0] as usize, dims[1] as usize, dims[2] as usize);
        match kind {
            1 => Ok(SampledMapData::Loop(Loop::new(samples)?)),
            2 => Ok(SampledMapData::Path(PathOfLoops::new(samples, n_s, n_t)?)),
            3 => Ok(SampledMapData::Disk(DiskMap::new(samples, n_u, n_s, n_t)?)),
            4 => {
                let disk = DiskMap::new(samples, n_u, n_s, n_t)?;
                Ok(SampledMapData::Sphere(disk.into_sphere()?))
            }
            other => Err(Error::Validation(format!("unknown container kind {other}"))),
        }
    }
}

/// Write the flat binary container.
pub fn write_binary(map: &SampledMapData, w: &mut impl Write) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&[VERSION, map.kind()])?;
    for d in map.dims() {
        w.write_all(&d.to_le_bytes())?;
    }
    for g in map.samples() {
        for row in g.entries() {
            for z in row {
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

/// Read and validate a flat binary container.
pub fn read_binary(r: &mut impl Read) -> Result<SampledMapData> {
    let mut head = [0u8; 6];
    r.read_exact(&mut head)?;
    if &head[0..4] != MAGIC {
        return Err(Error::Validation("bad container magic".into()));
    }
    if head[4] != VERSION {
        return Err(Error::Validation(format!("unsupported container version {}", head[4])));
    }
    let kind = head[5];
    let mut dims = [0u32; 3];
    for d in dims.iter_mut() {
        let mut b = [0u8; 4];
        r.read_exact(&mut b)?;
        *d = u32::from_le_bytes(b);
    }
    let count = match kind {
        1 => dims[2] as usize,
        2 => (dims[1] as usize + 1) * dims[2] as usize,
        3 | 4 => (dims[0] as usize + 1) * (dims[1] as usize + 1) * dims[2] as usize,
        other => return Err(Error::Validation(format!("unknown container kind {other}"))),
    };
    if count == 0 || count > (1 << 28) {
        return Err(Error::Validation(format!("implausible sample count {count}")));
    }
    let mut samples = Vec::with_capacity(count);
    let mut buf = [0u8; 8];
    for _ in 0..count {
        let mut entries = [[Complex64::new(0.0, 0.0); 2]; 2];
        for row in entries.iter_mut() {
            for z in row.iter_mut() {
                r.read_exact(&mut buf)?;
                let re = f64::from_le_bytes(buf);
                r.read_exact(&mut buf)?;
                let im = f64::from_le_bytes(buf);
                *z = Complex64::new(re, im);
            }
        }
        samples.push(SU2Element::from_matrix(entries)?);
    }
    SampledMapData::rebuild(kind, dims, samples)
}

#[derive(Serialize, Deserialize)]
struct JsonContainer {
    kind: u8,
    dims: [u32; 3],
    /// Row-major entries, 8 doubles per sample: re/im interleaved over the
    /// 2x2 matrix.
    data: Vec<f64>,
}

/// JSON form for small grids.
pub fn to_json(map: &SampledMapData) -> Result<String> {
    let mut data = Vec::with_capacity(map.samples().len() * 8);
    for g in map.samples() {
        for row in g.entries() {
            for z in row {
                data.push(z.re);
                data.push(z.im);
            }
        }
    }
    serde_json::to_string(&JsonContainer { kind: map.kind(), dims: map.dims(), data })
        .map_err(|e| Error::Validation(format!("json encode: {e}")))
}

pub fn from_json(text: &str) -> Result<SampledMapData> {
    let c: JsonContainer =
        serde_json::from_str(text).map_err(|e| Error::Validation(format!("json decode: {e}")))?;
    if c.data.len() % 8 != 0 {
        return Err(Error::Validation("json payload is not a whole number of samples".into()));
    }
    let mut samples = Vec::with_capacity(c.data.len() / 8);
    for chunk in c.data.chunks_exact(8) {
        let entries = [
            [Complex64::new(chunk[0], chunk[1]), Complex64::new(chunk[2], chunk[3])],
            [Complex64::new(chunk[4], chunk[5]), Complex64::new(chunk[6], chunk[7])],
        ];
        samples.push(SU2Element::from_matrix(entries)?);
    }
    SampledMapData::rebuild(c.kind, c.dims, samples)
}
