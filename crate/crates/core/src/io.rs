//! Trajectory text files: `timestamp tx ty tz qx qy qz qw` per line, `#`
//! comments.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::{Pose, Quaternion, UnitQuaternion, Vec3};
use crate::pipeline::PoseStream;

/// Largest accepted deviation of a stored quaternion from unit norm.
pub const QUATERNION_NORM_TOLERANCE: f64 = 1e-3;

/// Parses one line; `None` for blanks and comments. `number` is reported
/// in errors.
pub fn parse_pose_line(line: &str, number: usize) -> Result<Option<Pose>> {
    let body = line.trim();
    if body.is_empty() || body.starts_with('#') {
        return Ok(None);
    }
    let err = |message: String| Error::Parse { line: number, message };
    let fields = body
        .split_whitespace()
        .map(|f| f.parse::<f64>().map_err(|e| err(format!("bad number {f:?}: {e}"))))
        .collect::<Result<Vec<f64>>>()?;
    let [t, x, y, z, qx, qy, qz, qw] = fields[..] else {
        return Err(err(format!("expected 8 fields, found {}", fields.len())));
    };
    if fields.iter().any(|v| !v.is_finite()) {
        return Err(err("non-finite value".into()));
    }
    let q = Quaternion::new(qw, qx, qy, qz);
    if (q.norm() - 1.0).abs() > QUATERNION_NORM_TOLERANCE {
        return Err(err(format!("quaternion norm {} is not 1", q.norm())));
    }
    Ok(Some(Pose::new(t, Vec3::new(x, y, z), UnitQuaternion::new_normalize(q))))
}

/// Reads poses without checking their order.
pub fn read_poses<R: BufRead>(reader: R) -> Result<Vec<Pose>> {
    let mut out = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        if let Some(p) = parse_pose_line(&line?, k + 1)? {
            out.push(p);
        }
    }
    Ok(out)
}

/// Reads a stream; timestamps must increase strictly.
pub fn read_trajectory<R: BufRead>(reader: R) -> Result<PoseStream> {
    PoseStream::new(read_poses(reader)?)
}

pub fn read_trajectory_file(path: impl AsRef<Path>) -> Result<PoseStream> {
    let f = std::fs::File::open(path)?;
    read_trajectory(std::io::BufReader::new(f))
}

/// Writes poses with shortest round-trip formatting.
pub fn write_poses<W: Write>(poses: &[Pose], mut sink: W) -> Result<()> {
    writeln!(sink, "# timestamp tx ty tz qx qy qz qw")?;
    for p in poses {
        let q = p.orientation.quaternion();
        writeln!(
            sink,
            "{:?} {:?} {:?} {:?} {:?} {:?} {:?} {:?}",
            p.t, p.position.x, p.position.y, p.position.z, q.x, q.y, q.z, q.w
        )?;
    }
    sink.flush()?;
    Ok(())
}

pub fn write_trajectory<W: Write>(stream: &PoseStream, sink: W) -> Result<()> {
    write_poses(stream.poses(), sink)
}

pub fn write_trajectory_file(poses: &[Pose], path: impl AsRef<Path>) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_poses(poses, std::io::BufWriter::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn origin_line() {
        let s = read_trajectory("0.0 0 0 0 0 0 0 1\n".as_bytes()).unwrap();
        let p = s.poses()[0];
        assert_eq!(p.t, 0.0);
        assert_eq!(p.position, Vec3::ZERO);
        assert_eq!(p.orientation, UnitQuaternion::IDENTITY);
    }

    #[test]
    fn comments_and_blanks() {
        let text = "# ground truth\n\n0 1 2 3 0 0 0 1\n  # more\n1 1 2 3 0 0 1 0\n";
        assert_eq!(read_trajectory(text.as_bytes()).unwrap().len(), 2);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "# header\n0 0 0 0 0 0 0 1\n1 0 0 x 0 0 0 1\n";
        assert!(matches!(read_trajectory(text.as_bytes()), Err(Error::Parse { line: 3, .. })));
        let text = "0 0 0 0 0 0 1\n";
        assert!(matches!(read_trajectory(text.as_bytes()), Err(Error::Parse { line: 1, .. })));
        let text = "0 0 0 0 0 0 0 1.1\n";
        assert!(matches!(read_trajectory(text.as_bytes()), Err(Error::Parse { line: 1, .. })));
        let text = "1 0 0 0 0 0 0 1\n0.5 0 0 0 0 0 0 1\n";
        assert!(matches!(read_trajectory(text.as_bytes()), Err(Error::NonMonotonicStream { index: 1 })));
    }

    #[test]
    fn slightly_off_unit_is_renormalised() {
        let s = read_trajectory("0 0 0 0 0 0 0 1.0005\n".as_bytes()).unwrap();
        assert!((s.poses()[0].orientation.quaternion().norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut t = 0.0;
        let poses: Vec<Pose> = (0..1000)
            .map(|_| {
                t += rng.gen_range(0.001..0.1);
                let q = Quaternion::new(rng.gen(), rng.gen(), rng.gen(), rng.gen::<f64>() + 0.1);
                Pose::new(
                    t,
                    Vec3::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)),
                    UnitQuaternion::new_normalize(q),
                )
            })
            .collect();
        let stream = PoseStream::new(poses).unwrap();
        let mut buf = Vec::new();
        write_trajectory(&stream, &mut buf).unwrap();
        let back = read_trajectory(buf.as_slice()).unwrap();
        for (a, b) in stream.poses().iter().zip(back.poses()) {
            assert!((a.t - b.t).abs() <= 1e-9);
            assert!((a.position - b.position).max_abs() <= 1e-9);
            let (qa, qb) = (a.orientation.quaternion(), b.orientation.quaternion());
            assert!((qa - qb).norm() <= 1e-9);
        }
    }
}
