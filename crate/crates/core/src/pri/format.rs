//! Little-endian binary files for coarse depth maps (`CDM1`) and geometric
//! frame buffers (`GFB1`).
//!
//! Layout: magic (4 bytes) | u32 width | u32 height | 13 × f64 frame
//! (origin, u, v, w, pitch) | f32 depth[h][w] (NaN = miss), and for `GFB1`
//! additionally f32 normal[h][w][3] in `(u, v, w)` components and f32
//! mask[h][w]. Depths are in metres.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::{ScreenFrame, UnitVec3, Vec3};

use super::{is_miss, CoarseDepthMap, Gfb};

pub const CDM_MAGIC: &[u8; 4] = b"CDM1";
pub const GFB_MAGIC: &[u8; 4] = b"GFB1";
const HEADER_LEN: usize = 4 + 4 + 4 + 13 * 8;

fn put_frame(out: &mut Vec<u8>, magic: &[u8; 4], f: &ScreenFrame) {
    out.extend_from_slice(magic);
    out.extend_from_slice(&(f.width as u32).to_le_bytes());
    out.extend_from_slice(&(f.height as u32).to_le_bytes());
    for v in [f.origin, *f.u, *f.v, *f.w] {
        for c in v.to_array() {
            out.extend_from_slice(&c.to_le_bytes());
        }
    }
    out.extend_from_slice(&f.pitch.to_le_bytes());
}

fn put_f32(out: &mut Vec<u8>, x: f64) {
    let x = if is_miss(x) { f32::NAN } else { x as f32 };
    out.extend_from_slice(&x.to_le_bytes());
}

pub fn encode_cdm(map: &CoarseDepthMap) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * map.depth.len());
    put_frame(&mut out, CDM_MAGIC, &map.frame);
    map.depth.iter().for_each(|&d| put_f32(&mut out, d));
    out
}

pub fn encode_gfb(g: &Gfb) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 20 * g.depth.len());
    put_frame(&mut out, GFB_MAGIC, &g.frame);
    g.depth.iter().for_each(|&d| put_f32(&mut out, d));
    for n in &g.normal {
        n.to_array().iter().for_each(|&c| put_f32(&mut out, c));
    }
    g.mask.iter().for_each(|&m| put_f32(&mut out, m));
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    kind: &'static str,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn fail(&self, reason: impl Into<String>) -> Error {
        Error::format(self.kind, self.path, reason)
    }

    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        if end > self.bytes.len() {
            return Err(self.fail(format!("truncated at byte {}", self.pos)));
        }
        let mut buf = [0u8; N];
        buf.copy_from_slice(&self.bytes[self.pos..end]);
        self.pos = end;
        Ok(buf)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f64>> {
        let end = self.pos + 4 * n;
        if end > self.bytes.len() {
            return Err(self.fail(format!(
                "expected {} more bytes, file has {}",
                4 * n,
                self.bytes.len() - self.pos
            )));
        }
        let v = self.bytes[self.pos..end]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect();
        self.pos = end;
        Ok(v)
    }

    fn vec3(&mut self) -> Result<Vec3> {
        Ok(Vec3::new(self.f64()?, self.f64()?, self.f64()?))
    }

    fn header(&mut self, magic: &[u8; 4]) -> Result<ScreenFrame> {
        let m: [u8; 4] = self.take()?;
        if &m != magic {
            return Err(self.fail(format!(
                "bad magic {:?}, expected {:?}",
                String::from_utf8_lossy(&m),
                String::from_utf8_lossy(magic)
            )));
        }
        let width = self.u32()? as usize;
        let height = self.u32()? as usize;
        let origin = self.vec3()?;
        let axes = [self.vec3()?, self.vec3()?, self.vec3()?];
        let pitch = self.f64()?;
        let [u, v, w] = axes.map(UnitVec3::try_from_unit);
        let (Some(u), Some(v), Some(w)) = (u, v, w) else {
            return Err(self.fail("frame axes are not unit vectors"));
        };
        if width.checked_mul(height).is_none_or(|n| n > (1 << 30)) {
            return Err(self.fail(format!("implausible size {width}x{height}")));
        }
        let standoff = ScreenFrame::nominal_standoff(width, height, pitch);
        ScreenFrame::new(origin, u, v, w, pitch, width, height, standoff)
            .map_err(|e| self.fail(e.to_string()))
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(self.fail(format!("{} trailing bytes", self.bytes.len() - self.pos)));
        }
        Ok(())
    }
}

pub fn decode_cdm(bytes: &[u8], path: &Path) -> Result<CoarseDepthMap> {
    let mut r = Reader { bytes, pos: 0, kind: "CDM1", path };
    let frame = r.header(CDM_MAGIC)?;
    let depth = r.f32s(frame.pixel_count())?;
    r.finish()?;
    CoarseDepthMap::new(frame, depth)
}

/// Structural decode: magic, sizes and frame are checked; per-pixel
/// invariants are left to [`Gfb::validate`].
pub fn decode_gfb(bytes: &[u8], path: &Path) -> Result<Gfb> {
    let mut r = Reader { bytes, pos: 0, kind: "GFB1", path };
    let frame = r.header(GFB_MAGIC)?;
    let n = frame.pixel_count();
    let depth = r.f32s(n)?;
    let normal = r
        .f32s(3 * n)?
        .chunks_exact(3)
        .map(|c| Vec3::new(c[0], c[1], c[2]))
        .collect();
    let mask = r.f32s(n)?;
    r.finish()?;
    Ok(Gfb { frame, depth, normal, mask })
}

pub fn write_cdm(path: impl AsRef<Path>, map: &CoarseDepthMap) -> Result<()> {
    Ok(fs::write(path, encode_cdm(map))?)
}

pub fn read_cdm(path: impl AsRef<Path>) -> Result<CoarseDepthMap> {
    let path = path.as_ref();
    decode_cdm(&fs::read(path)?, path)
}

pub fn write_gfb(path: impl AsRef<Path>, g: &Gfb) -> Result<()> {
    Ok(fs::write(path, encode_gfb(g))?)
}

pub fn read_gfb(path: impl AsRef<Path>) -> Result<Gfb> {
    let path = path.as_ref();
    decode_gfb(&fs::read(path)?, path)
}
