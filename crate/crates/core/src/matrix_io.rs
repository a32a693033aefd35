//! Plain-text matrix files.
//!
//! ```text
//! rows cols
//! re im        # entry (0, 0)
//! re im        # entry (0, 1)
//! ...
//! ```
//!
//! Entries are row-major, one `re im` pair per line, printed with the
//! shortest representation that round-trips exactly. A channel realization is
//! the H block followed by the G block in the same stream.

use std::io::{self, BufRead, Write};

use crate::linalg::{Complex, ComplexMatrix};

fn invalid(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

pub fn write_matrix(w: &mut impl Write, m: &ComplexMatrix) -> io::Result<()> {
    writeln!(w, "{} {}", m.rows(), m.cols())?;
    for z in m.as_slice() {
        writeln!(w, "{:e} {:e}", z.re, z.im)?;
    }
    Ok(())
}

fn next_line(lines: &mut impl Iterator<Item = io::Result<String>>) -> io::Result<String> {
    for line in lines.by_ref() {
        let line = line?;
        if !line.trim().is_empty() {
            return Ok(line);
        }
    }
    Err(invalid("unexpected end of matrix data"))
}

fn read_from_lines(lines: &mut impl Iterator<Item = io::Result<String>>) -> io::Result<ComplexMatrix> {
    let header = next_line(lines)?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| invalid(format!("bad header {header:?}"))))
        .collect::<io::Result<_>>()?;
    let [rows, cols] = dims[..] else {
        return Err(invalid(format!("header needs `rows cols`, got {header:?}")));
    };
    let mut data = Vec::with_capacity(rows.saturating_mul(cols));
    for _ in 0..rows * cols {
        let line = next_line(lines)?;
        let parts: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| invalid(format!("bad entry {line:?}"))))
            .collect::<io::Result<_>>()?;
        let [re, im] = parts[..] else {
            return Err(invalid(format!("entry needs `re im`, got {line:?}")));
        };
        data.push(Complex::new(re, im));
    }
    ComplexMatrix::new(rows, cols, data).map_err(|e| invalid(e.to_string()))
}

pub fn read_matrix(r: impl BufRead) -> io::Result<ComplexMatrix> {
    read_from_lines(&mut r.lines())
}

/// Writes H then G.
pub fn write_link(w: &mut impl Write, h: &ComplexMatrix, g: &ComplexMatrix) -> io::Result<()> {
    write_matrix(w, h)?;
    write_matrix(w, g)
}

/// Reads H then G.
pub fn read_link(r: impl BufRead) -> io::Result<(ComplexMatrix, ComplexMatrix)> {
    let mut lines = r.lines();
    let h = read_from_lines(&mut lines)?;
    let g = read_from_lines(&mut lines)?;
    Ok((h, g))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_layout() {
        let m = ComplexMatrix::new(1, 2, vec![Complex::new(1.5, -0.25), Complex::new(0.0, 3.0)]).unwrap();
        let mut buf = Vec::new();
        write_matrix(&mut buf, &m).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "1 2\n1.5e0 -2.5e-1\n0e0 3e0\n");
    }

    #[test]
    fn rejects_malformed() {
        assert!(read_matrix("2 2\n1 0\n".as_bytes()).is_err());
        assert!(read_matrix("2\n".as_bytes()).is_err());
        assert!(read_matrix("1 1\n1 2 3\n".as_bytes()).is_err());
        assert!(read_matrix("1 1\nNaN 0\n".as_bytes()).is_err());
        assert!(read_matrix("1 1\nx 0\n".as_bytes()).is_err());
    }
}
