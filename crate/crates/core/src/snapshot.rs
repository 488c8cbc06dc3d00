//! Binary snapshots.
//!
//! A record is the magic `NSV1`, then little-endian `u32 n`, `u32 M`,
//! `f64 T`, `f64 alpha`, `u32 count`, then `count` modes, each `i32 kx, ky,
//! kz` followed by six `f64`: re/im of the three components. Only the
//! canonical half of the lattice is written; the other half is the complex
//! conjugate. A trajectory file is the `M + 1` records `u^0..u^M` in order.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{NsvError, Result};
use crate::field::{SpectralVector, SpectralVelocity};
use crate::lattice::{TruncationBall, WaveVector};
use crate::stepper::{DiscreteTrajectory, SchemeParams};

pub const MAGIC: &[u8; 4] = b"NSV1";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnapshotHeader {
    pub n: u32,
    pub steps: u32,
    pub final_time: f64,
    pub alpha: f64,
}

impl SnapshotHeader {
    pub fn of(params: &SchemeParams) -> Self {
        SnapshotHeader {
            n: params.ball.radius(),
            steps: params.steps as u32,
            final_time: params.final_time,
            alpha: params.alpha,
        }
    }
}

pub fn write_record<W: Write>(w: &mut W, header: &SnapshotHeader, u: &SpectralVelocity) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&header.n.to_le_bytes())?;
    w.write_all(&header.steps.to_le_bytes())?;
    w.write_all(&header.final_time.to_le_bytes())?;
    w.write_all(&header.alpha.to_le_bytes())?;
    w.write_all(&(u.coeffs().len() as u32).to_le_bytes())?;
    for (k, c) in u.iter() {
        for x in k.0 {
            w.write_all(&x.to_le_bytes())?;
        }
        for z in c {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    Ok(())
}

fn take<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

/// Reads one record; `Ok(None)` at a clean end of input.
pub fn read_record<R: Read>(r: &mut R) -> Result<Option<(SnapshotHeader, SpectralVelocity)>> {
    let mut magic = [0u8; 4];
    let mut got = 0;
    while got < 4 {
        let k = r.read(&mut magic[got..])?;
        if k == 0 {
            break;
        }
        got += k;
    }
    if got == 0 {
        return Ok(None);
    }
    if got < 4 || &magic != MAGIC {
        return Err(NsvError::Snapshot("bad magic".into()));
    }
    let header = SnapshotHeader {
        n: u32::from_le_bytes(take(r)?),
        steps: u32::from_le_bytes(take(r)?),
        final_time: f64::from_le_bytes(take(r)?),
        alpha: f64::from_le_bytes(take(r)?),
    };
    let count = u32::from_le_bytes(take(r)?) as usize;
    let ball = TruncationBall(header.n);
    let mut v = SpectralVector::zeros(ball);
    for _ in 0..count {
        let k = WaveVector([
            i32::from_le_bytes(take(r)?),
            i32::from_le_bytes(take(r)?),
            i32::from_le_bytes(take(r)?),
        ]);
        let mut c = [Complex64::new(0.0, 0.0); 3];
        for z in c.iter_mut() {
            z.re = f64::from_le_bytes(take(r)?);
            z.im = f64::from_le_bytes(take(r)?);
        }
        v.set(k, c)
            .map_err(|e| NsvError::Snapshot(format!("mode {k}: {e}")))?;
    }
    let u = SpectralVelocity::try_new(v).map_err(|e| NsvError::Snapshot(e.to_string()))?;
    Ok(Some((header, u)))
}

pub fn write_trajectory(path: &Path, traj: &DiscreteTrajectory) -> Result<()> {
    let header = SnapshotHeader::of(&traj.params);
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    for s in &traj.states {
        write_record(&mut w, &header, s)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a trajectory file and recomputes the pressures. Solver controls
/// take their defaults.
pub fn read_trajectory(path: &Path) -> Result<DiscreteTrajectory> {
    let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut states = Vec::new();
    let mut first: Option<SnapshotHeader> = None;
    while let Some((h, u)) = read_record(&mut r)? {
        match first {
            None => first = Some(h),
            Some(f) if f != h => {
                return Err(NsvError::Snapshot("records disagree on the header".into()))
            }
            _ => {}
        }
        states.push(u);
    }
    let h = first.ok_or_else(|| NsvError::Snapshot("empty file".into()))?;
    let params = SchemeParams::new(TruncationBall(h.n), h.steps as usize, h.final_time, h.alpha);
    DiscreteTrajectory::from_states(params, states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{generate_datum, DatumSpec};

    #[test]
    fn record_round_trip_is_bit_exact() {
        let u = generate_datum(&DatumSpec::random(3), TruncationBall(3)).unwrap();
        let h = SnapshotHeader {
            n: 3,
            steps: 5,
            final_time: 0.5,
            alpha: 0.25,
        };
        let mut buf = Vec::new();
        write_record(&mut buf, &h, &u).unwrap();
        assert_eq!(&buf[..4], b"NSV1");
        assert_eq!(buf.len(), 4 + 4 + 4 + 8 + 8 + 4 + u.coeffs().len() * (12 + 48));
        let (h2, u2) = read_record(&mut buf.as_slice()).unwrap().unwrap();
        assert_eq!(h, h2);
        assert_eq!(u.coeffs(), u2.coeffs());
    }

    #[test]
    fn header_layout() {
        let u = SpectralVelocity::zeros(TruncationBall(1));
        let h = SnapshotHeader {
            n: 1,
            steps: 2,
            final_time: 1.0,
            alpha: 0.0,
        };
        let mut buf = Vec::new();
        write_record(&mut buf, &h, &u).unwrap();
        assert_eq!(&buf[4..8], &1u32.to_le_bytes());
        assert_eq!(&buf[8..12], &2u32.to_le_bytes());
        assert_eq!(&buf[12..20], &1.0f64.to_le_bytes());
        assert_eq!(&buf[28..32], &3u32.to_le_bytes());
        // first canonical mode of the unit ball
        assert_eq!(&buf[32..44], [0i32, 0, 1].map(i32::to_le_bytes).concat().as_slice());
    }

    #[test]
    fn bad_magic() {
        let data = b"NSV2\0\0\0\0".to_vec();
        assert!(matches!(read_record(&mut data.as_slice()), Err(NsvError::Snapshot(_))));
    }
}
