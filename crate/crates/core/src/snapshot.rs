//! Field snapshots: CSV for analysis, binary for exact replay.
//!
//! Binary layout, little endian:
//!
//! ```text
//! magic   8  b"FLGASNAP"
//! version u16 (1)
//! model   u8  (1 = D1Q3, 2 = D2Q9)
//! pad     u8
//! nx, ny  u32, u32
//! time    u64
//! f       nx*ny*Q f64, row-major, channel fastest
//! kind    nx*ny u8 (0 fluid, 1 wall, 2 moving wall)
//! u_w     2 f64 per moving-wall site, in site order
//! ```

use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::field::{FieldState, SiteKind};
use crate::lattice::Model;

pub const MAGIC: &[u8; 8] = b"FLGASNAP";
pub const VERSION: u16 = 1;
/// Upper bound on decoded grid sites.
pub const MAX_SITES: usize = 1 << 24;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("bad magic")]
    Magic,
    #[error("unsupported version {0}")]
    Version(u16),
    #[error("unknown model tag {0}")]
    Model(u8),
    #[error("invalid grid {0}x{1}")]
    Shape(usize, usize),
    #[error("truncated input")]
    Truncated,
    #[error("{0} trailing bytes")]
    Trailing(usize),
    #[error("invalid site kind {0}")]
    Kind(u8),
    #[error("invalid value at {0}")]
    Value(String),
    #[error("line {line}: {msg}")]
    Csv { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn encode_binary(state: &FieldState) -> Vec<u8> {
    let mut out = Vec::with_capacity(32 + state.f.len() * 8 + state.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(state.model.tag());
    out.push(0);
    out.extend_from_slice(&(state.nx as u32).to_le_bytes());
    out.extend_from_slice(&(state.ny as u32).to_le_bytes());
    out.extend_from_slice(&state.time.to_le_bytes());
    for v in &state.f {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for k in &state.sites {
        out.push(match k {
            SiteKind::Fluid => 0,
            SiteKind::Wall => 1,
            SiteKind::MovingWall { .. } => 2,
        });
    }
    for k in &state.sites {
        if let SiteKind::MovingWall { velocity } = k {
            out.extend_from_slice(&velocity[0].to_le_bytes());
            out.extend_from_slice(&velocity[1].to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], SnapshotError> {
        if self.buf.len() < n {
            return Err(SnapshotError::Truncated);
        }
        let (a, b) = self.buf.split_at(n);
        self.buf = b;
        Ok(a)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], SnapshotError> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn f64(&mut self) -> Result<f64, SnapshotError> {
        Ok(f64::from_le_bytes(self.array()?))
    }
}

pub fn decode_binary(bytes: &[u8]) -> Result<FieldState, SnapshotError> {
    let mut r = Reader { buf: bytes };
    if r.take(8)? != MAGIC {
        return Err(SnapshotError::Magic);
    }
    let version = u16::from_le_bytes(r.array()?);
    if version != VERSION {
        return Err(SnapshotError::Version(version));
    }
    let [tag, pad] = r.array()?;
    if pad != 0 {
        return Err(SnapshotError::Value("header padding".into()));
    }
    let model = Model::from_tag(tag).ok_or(SnapshotError::Model(tag))?;
    let nx = u32::from_le_bytes(r.array()?) as usize;
    let ny = u32::from_le_bytes(r.array()?) as usize;
    let time = u64::from_le_bytes(r.array()?);
    let sites = nx.checked_mul(ny).filter(|&n| n <= MAX_SITES).ok_or(SnapshotError::Shape(nx, ny))?;
    let q = model.descriptor().q();
    // checked before allocating the field
    if r.buf.len() < sites * q * 8 + sites {
        return Err(SnapshotError::Truncated);
    }
    let mut state = FieldState::new(model, nx, ny).map_err(|_| SnapshotError::Shape(nx, ny))?;
    state.time = time;
    for (i, v) in state.f.iter_mut().enumerate() {
        *v = r.f64()?;
        if !v.is_finite() {
            return Err(SnapshotError::Value(format!("f[{i}]")));
        }
    }
    let kinds = r.take(sites)?;
    for (i, &k) in kinds.iter().enumerate() {
        state.sites[i] = match k {
            0 => SiteKind::Fluid,
            1 => SiteKind::Wall,
            2 => {
                let velocity = [r.f64()?, r.f64()?];
                if !(velocity[0].hypot(velocity[1]) < 1.0) {
                    return Err(SnapshotError::Value(format!("wall velocity at site {i}")));
                }
                SiteKind::MovingWall { velocity }
            }
            other => return Err(SnapshotError::Kind(other)),
        };
    }
    if !r.buf.is_empty() {
        return Err(SnapshotError::Trailing(r.buf.len()));
    }
    Ok(state)
}

/// Columns `x[,y],rho,u_x[,u_y],f_0..f_{Q-1}`.
pub fn write_csv<W: Write>(state: &FieldState, mut w: W) -> io::Result<()> {
    let q = state.q();
    let two_d = state.model == Model::D2Q9;
    let mut header = String::from(if two_d { "x,y,rho,u_x,u_y" } else { "x,rho,u_x" });
    for i in 0..q {
        header.push_str(&format!(",f_{i}"));
    }
    writeln!(w, "{header}")?;
    let m = state.macroscopic();
    for y in 0..state.ny {
        for x in 0..state.nx {
            let i = state.index(x, y);
            if two_d {
                write!(w, "{x},{y},{:?},{:?},{:?}", m.rho[i], m.ux[i], m.uy[i])?;
            } else {
                write!(w, "{x},{:?},{:?}", m.rho[i], m.ux[i])?;
            }
            for v in state.site(x, y) {
                write!(w, ",{v:?}")?;
            }
            writeln!(w)?;
        }
    }
    Ok(())
}

/// Reads the distribution columns of a CSV snapshot; site flags are not
/// stored in CSV and come back as fluid.
pub fn read_csv<R: BufRead>(r: R) -> Result<FieldState, SnapshotError> {
    let mut lines = r.lines();
    let header = lines.next().ok_or(SnapshotError::Truncated)??;
    let cols: Vec<&str> = header.trim().split(',').collect();
    let (model, lead) = match cols.len() {
        6 if cols[..3] == ["x", "rho", "u_x"] => (Model::D1Q3, 3),
        14 if cols[..5] == ["x", "y", "rho", "u_x", "u_y"] => (Model::D2Q9, 5),
        _ => return Err(SnapshotError::Csv { line: 1, msg: "unrecognized header".into() }),
    };
    let q = model.descriptor().q();
    let mut rows: Vec<(usize, usize, Vec<f64>)> = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        let lineno = n + 2;
        if line.trim().is_empty() {
            continue;
        }
        let err = |msg: &str| SnapshotError::Csv { line: lineno, msg: msg.into() };
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != lead + q {
            return Err(err("wrong column count"));
        }
        let x: usize = fields[0].parse().map_err(|_| err("bad x"))?;
        let y: usize = if lead == 5 { fields[1].parse().map_err(|_| err("bad y"))? } else { 0 };
        let f = fields[lead..]
            .iter()
            .map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| err("bad value"))?;
        rows.push((x, y, f));
        if rows.len() > MAX_SITES {
            return Err(err("too many rows"));
        }
    }
    let nx = rows.iter().map(|r| r.0 + 1).max().ok_or(SnapshotError::Truncated)?;
    let ny = rows.iter().map(|r| r.1 + 1).max().unwrap_or(1);
    if nx.checked_mul(ny).is_none_or(|n| n != rows.len()) {
        return Err(SnapshotError::Shape(nx, ny));
    }
    let mut state = FieldState::new(model, nx, ny).map_err(|_| SnapshotError::Shape(nx, ny))?;
    let mut seen = vec![false; nx * ny];
    for (x, y, f) in rows {
        let i = state.index(x, y);
        if std::mem::replace(&mut seen[i], true) {
            return Err(SnapshotError::Csv { line: 0, msg: format!("duplicate site ({x}, {y})") });
        }
        state.set_site(x, y, &f).map_err(|e| SnapshotError::Value(e.to_string()))?;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{init_lid_cavity, init_shockwave};

    #[test]
    fn binary_round_trip() {
        let mut s = init_lid_cavity(6, 0.2, 1.0).unwrap();
        s.time = 42;
        s.site_mut(2, 3)[4] = 0.123456789;
        let bytes = encode_binary(&s);
        let back = decode_binary(&bytes).unwrap();
        assert_eq!(back.f, s.f);
        assert_eq!(back.sites, s.sites);
        assert_eq!(back.time, 42);
    }

    #[test]
    fn binary_rejects_damage() {
        let s = init_shockwave(8, 4.0, 2.0).unwrap();
        let bytes = encode_binary(&s);
        assert!(matches!(decode_binary(&bytes[..bytes.len() - 1]), Err(SnapshotError::Truncated)));
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(decode_binary(&extra), Err(SnapshotError::Trailing(1))));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode_binary(&bad), Err(SnapshotError::Magic)));
        let mut huge = bytes.clone();
        huge[12..16].copy_from_slice(&u32::MAX.to_le_bytes());
        huge[16..20].copy_from_slice(&u32::MAX.to_le_bytes());
        assert!(matches!(decode_binary(&huge), Err(SnapshotError::Shape(..))));
    }

    #[test]
    fn csv_round_trip() {
        let s = init_lid_cavity(4, 0.1, 1.0).unwrap();
        let mut buf = Vec::new();
        write_csv(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x,y,rho,u_x,u_y,f_0,"));
        let back = read_csv(&buf[..]).unwrap();
        assert_eq!(back.f, s.f);

        let s = init_shockwave(8, 4.0, 2.0).unwrap();
        let mut buf = Vec::new();
        write_csv(&s, &mut buf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("x,rho,u_x,f_0,f_1,f_2\n"));
        assert_eq!(read_csv(&buf[..]).unwrap().f, s.f);
    }

    #[test]
    fn csv_rejects_gaps() {
        let text = "x,rho,u_x,f_0,f_1,f_2\n0,1,0,1,0,0\n2,1,0,1,0,0\n";
        assert!(read_csv(text.as_bytes()).is_err());
    }
}
