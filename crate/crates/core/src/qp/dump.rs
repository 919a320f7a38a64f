//! Plain-text dump of a [`QpProblem`] for offline inspection.
//!
//! ```text
//! qp <n> <m>
//! P <nnz>            followed by nnz lines "<row> <col> <value>" (upper triangle)
//! A <nnz>            followed by nnz lines "<row> <col> <value>"
//! q                  followed by n values, one per line
//! l                  followed by m values
//! u                  followed by m values
//! ```
//!
//! Values are written with round-trip precision; infinite bounds appear as
//! the `±1e30` sentinel.

use std::io::{self, BufRead, Write};

use super::{CscMatrix, QpProblem};
use crate::scalar::Real;

pub fn write_dump<T: Real, W: Write>(problem: &QpProblem<T>, mut out: W) -> io::Result<()> {
    writeln!(out, "qp {} {}", problem.num_vars(), problem.num_constraints())?;
    for (name, mat) in [("P", &problem.p), ("A", &problem.a)] {
        writeln!(out, "{name} {}", mat.nnz())?;
        for (r, c, v) in mat.triplets() {
            writeln!(out, "{r} {c} {:?}", v.to_f64_lossy())?;
        }
    }
    for (name, vec) in [("q", &problem.q), ("l", &problem.l), ("u", &problem.u)] {
        writeln!(out, "{name}")?;
        for v in vec.iter() {
            writeln!(out, "{:?}", v.to_f64_lossy())?;
        }
    }
    Ok(())
}

fn bad(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

pub fn read_dump<T: Real, R: BufRead>(input: R) -> io::Result<QpProblem<T>> {
    let mut lines = input.lines();
    let mut next = move || -> io::Result<String> {
        lines
            .next()
            .ok_or_else(|| bad("unexpected end of dump"))?
            .map(|l| l.trim().to_string())
    };
    let header = next()?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 || parts[0] != "qp" {
        return Err(bad(format!("bad header {header:?}")));
    }
    let n: usize = parts[1].parse().map_err(|_| bad("bad n"))?;
    let m: usize = parts[2].parse().map_err(|_| bad("bad m"))?;

    let mut read_matrix = |tag: &str, rows: usize, cols: usize| -> io::Result<CscMatrix<T>> {
        let head = next()?;
        let nnz: usize = head
            .strip_prefix(tag)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| bad(format!("expected '{tag} <nnz>', got {head:?}")))?;
        let mut trip = Vec::with_capacity(nnz);
        for _ in 0..nnz {
            let line = next()?;
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(bad(format!("bad triplet {line:?}")));
            }
            let r: usize = f[0].parse().map_err(|_| bad("bad row"))?;
            let c: usize = f[1].parse().map_err(|_| bad("bad col"))?;
            let v: f64 = f[2].parse().map_err(|_| bad("bad value"))?;
            if r >= rows || c >= cols {
                return Err(bad(format!("entry ({r}, {c}) out of range")));
            }
            trip.push((r, c, T::of(v)));
        }
        Ok(CscMatrix::from_triplets(rows, cols, &trip))
    };
    let p = read_matrix("P", n, n)?;
    let a = read_matrix("A", m, n)?;

    let mut read_vec = |tag: &str, len: usize| -> io::Result<Vec<T>> {
        let head = next()?;
        if head != tag {
            return Err(bad(format!("expected '{tag}', got {head:?}")));
        }
        (0..len)
            .map(|_| {
                let line = next()?;
                line.parse::<f64>()
                    .map(T::of)
                    .map_err(|_| bad(format!("bad value {line:?}")))
            })
            .collect()
    };
    let q = read_vec("q", n)?;
    let l = read_vec("l", m)?;
    let u = read_vec("u", m)?;
    QpProblem::new(p, q, a, l, u).map_err(|e| bad(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_problem() {
        let prob = QpProblem::new(
            CscMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (0, 1, 0.1), (1, 1, 1.0 / 3.0)]),
            vec![-1.0, 1e-7],
            CscMatrix::from_dense(&[vec![1.0, 1.0], vec![0.0, -2.5]]),
            vec![1.0, -1e30],
            vec![1.0, 0.25],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_dump(&prob, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("qp 2 2\nP 3\n"));
        let back: QpProblem<f64> = read_dump(&buf[..]).unwrap();
        assert_eq!(back, prob);
    }

    #[test]
    fn truncated_dump_rejected() {
        assert!(read_dump::<f64, _>(&b"qp 1 0\nP 1\n"[..]).is_err());
    }
}
