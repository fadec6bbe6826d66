//! Matrix Market reader and writer for dense in-memory matrices.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use gmres_forge_core::numkernel::{Matrix, C64};

use crate::error::{LabError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Coordinate,
    Array,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Field {
    Real,
    Complex,
    Integer,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

fn parse_err(line: usize, message: impl Into<String>) -> LabError {
    LabError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_header(line: &str, lineno: usize) -> Result<(Format, Field, Symmetry)> {
    let tokens: Vec<String> = line.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(lineno, "expected `%%MatrixMarket matrix <format> <field> <symmetry>`"));
    }
    let format = match tokens[2].as_str() {
        "coordinate" => Format::Coordinate,
        "array" => Format::Array,
        f => return Err(parse_err(lineno, format!("unknown format `{f}`"))),
    };
    let field = match tokens[3].as_str() {
        "real" | "double" => Field::Real,
        "complex" => Field::Complex,
        "integer" => Field::Integer,
        f @ "pattern" => return Err(LabError::UnsupportedField(f.to_string())),
        f => return Err(parse_err(lineno, format!("unknown field `{f}`"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        "hermitian" => Symmetry::Hermitian,
        s => return Err(parse_err(lineno, format!("unknown symmetry `{s}`"))),
    };
    if symmetry == Symmetry::Hermitian && field != Field::Complex {
        return Err(parse_err(lineno, "hermitian symmetry requires a complex field"));
    }
    Ok((format, field, symmetry))
}

fn parse_number<T: std::str::FromStr>(tok: Option<&str>, lineno: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(lineno, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(lineno, format!("invalid {what} `{tok}`")))
}

fn parse_value<'a>(tokens: &mut impl Iterator<Item = &'a str>, field: Field, lineno: usize) -> Result<C64> {
    let re: f64 = parse_number(tokens.next(), lineno, "value")?;
    let im: f64 = match field {
        Field::Complex => parse_number(tokens.next(), lineno, "imaginary part")?,
        _ => 0.0,
    };
    if !re.is_finite() || !im.is_finite() {
        return Err(parse_err(lineno, "non-finite value"));
    }
    Ok(C64::new(re, im))
}

fn mirror(m: &mut Matrix, i: usize, j: usize, v: C64, symmetry: Symmetry) {
    m[(i, j)] = v;
    if i != j {
        m[(j, i)] = match symmetry {
            Symmetry::General => return,
            Symmetry::Symmetric => v,
            Symmetry::SkewSymmetric => -v,
            Symmetry::Hermitian => v.conj(),
        };
    }
}

pub fn parse_matrix_market<R: BufRead>(reader: R) -> Result<Matrix> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (lineno, header) = match lines.next() {
        Some((n, l)) => (n, l?),
        None => return Err(parse_err(1, "empty file")),
    };
    let (format, field, symmetry) = parse_header(&header, lineno)?;

    let mut data = lines.filter_map(|(n, l)| match l {
        Ok(l) if l.trim().is_empty() || l.trim_start().starts_with('%') => None,
        other => Some((n, other)),
    });
    let (size_line, size) = match data.next() {
        Some((n, l)) => (n, l?),
        None => return Err(parse_err(lineno + 1, "missing size line")),
    };
    let mut tok = size.split_whitespace();
    let nrows: usize = parse_number(tok.next(), size_line, "row count")?;
    let ncols: usize = parse_number(tok.next(), size_line, "column count")?;
    if symmetry != Symmetry::General && nrows != ncols {
        return Err(parse_err(size_line, "symmetric storage requires a square matrix"));
    }
    let mut m = Matrix::zeros(nrows, ncols);
    match format {
        Format::Coordinate => {
            let nnz: usize = parse_number(tok.next(), size_line, "entry count")?;
            let mut count = 0;
            for (n, l) in data {
                let l = l?;
                if count == nnz {
                    return Err(parse_err(n, "more entries than declared"));
                }
                let mut t = l.split_whitespace();
                let i: usize = parse_number(t.next(), n, "row index")?;
                let j: usize = parse_number(t.next(), n, "column index")?;
                if i == 0 || j == 0 || i > nrows || j > ncols {
                    return Err(parse_err(n, format!("index ({i}, {j}) out of range")));
                }
                let v = parse_value(&mut t, field, n)?;
                if symmetry != Symmetry::General && j > i {
                    return Err(parse_err(n, "entry above the diagonal in symmetric storage"));
                }
                mirror(&mut m, i - 1, j - 1, v, symmetry);
                count += 1;
            }
            if count != nnz {
                return Err(parse_err(size_line, format!("declared {nnz} entries, found {count}")));
            }
        }
        Format::Array => {
            let mut positions = Vec::new();
            for j in 0..ncols {
                let start = match symmetry {
                    Symmetry::General => 0,
                    Symmetry::SkewSymmetric => j + 1,
                    _ => j,
                };
                for i in start..nrows {
                    positions.push((i, j));
                }
            }
            let mut pos = positions.into_iter();
            let mut last = size_line;
            for (n, l) in data {
                let l = l?;
                last = n;
                let (i, j) = pos.next().ok_or_else(|| parse_err(n, "more entries than the matrix holds"))?;
                let v = parse_value(&mut l.split_whitespace(), field, n)?;
                mirror(&mut m, i, j, v, symmetry);
            }
            if pos.next().is_some() {
                return Err(parse_err(last, "fewer entries than the matrix holds"));
            }
        }
    }
    Ok(m)
}

pub fn read_matrix_market(path: &Path) -> Result<Matrix> {
    let file = std::fs::File::open(path)?;
    parse_matrix_market(BufReader::new(file))
}

/// Writes a general coordinate file, complex when any entry has a nonzero
/// imaginary part. Values use shortest round-trip formatting.
pub fn write_matrix_market<W: Write>(m: &Matrix, mut out: W) -> Result<()> {
    let complex = m.iter().any(|z| z.im != 0.0);
    let field = if complex { "complex" } else { "real" };
    writeln!(out, "%%MatrixMarket matrix coordinate {field} general")?;
    let nnz = m.iter().filter(|z| **z != C64::new(0.0, 0.0)).count();
    writeln!(out, "{} {} {nnz}", m.nrows(), m.ncols())?;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if z == C64::new(0.0, 0.0) {
                continue;
            }
            if complex {
                writeln!(out, "{} {} {:e} {:e}", i + 1, j + 1, z.re, z.im)?;
            } else {
                writeln!(out, "{} {} {:e}", i + 1, j + 1, z.re)?;
            }
        }
    }
    Ok(())
}

pub fn save_matrix_market(m: &Matrix, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_matrix_market(m, &mut w)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use gmres_forge_core::numkernel::diag_real;

    fn parse(s: &str) -> Result<Matrix> {
        parse_matrix_market(s.as_bytes())
    }

    #[test]
    fn coordinate_diagonal() {
        let m = parse("%%MatrixMarket matrix coordinate real general\n% comment\n2 2 2\n1 1 4\n2 2 9\n").unwrap();
        assert_eq!(m, diag_real(&[4.0, 9.0]));
    }

    #[test]
    fn symmetric_expansion() {
        let m = parse("%%MatrixMarket matrix coordinate real symmetric\n3 3 3\n1 1 1\n3 1 2\n3 2 -5\n").unwrap();
        assert_eq!(m[(0, 2)], C64::new(2.0, 0.0));
        assert_eq!(m[(2, 0)], C64::new(2.0, 0.0));
        assert_eq!(m[(1, 2)], C64::new(-5.0, 0.0));
        let m = parse("%%MatrixMarket matrix coordinate complex hermitian\n2 2 1\n2 1 1 2\n").unwrap();
        assert_eq!(m[(0, 1)], C64::new(1.0, -2.0));
        let m = parse("%%MatrixMarket matrix coordinate integer skew-symmetric\n2 2 1\n2 1 3\n").unwrap();
        assert_eq!(m[(0, 1)], C64::new(-3.0, 0.0));
    }

    #[test]
    fn array_formats() {
        let m = parse("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n").unwrap();
        assert_eq!(m[(1, 0)], C64::new(2.0, 0.0));
        assert_eq!(m[(0, 1)], C64::new(3.0, 0.0));
        let m = parse("%%MatrixMarket matrix array real symmetric\n2 2\n1\n2\n4\n").unwrap();
        assert_eq!(m[(0, 1)], C64::new(2.0, 0.0));
        assert_eq!(m[(1, 1)], C64::new(4.0, 0.0));
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert!(matches!(
            parse("%%MatrixMarket matrix coordinate pattern general\n2 2 1\n1 1\n"),
            Err(LabError::UnsupportedField(f)) if f == "pattern"
        ));
        match parse("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 4\n2 x 9\n") {
            Err(LabError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        match parse("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 4\n3 1 9\n") {
            Err(LabError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 4\n"), Err(LabError::Parse { line: 2, .. })));
        assert!(matches!(parse("hello\n"), Err(LabError::Parse { line: 1, .. })));
    }

    #[test]
    fn round_trip() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for complex in [false, true] {
            let m = Matrix::from_fn(7, 5, |_, _| {
                C64::new(rng.random_range(-1e3..1e3), if complex { rng.random_range(-1.0..1.0) } else { 0.0 })
            });
            let mut buf = Vec::new();
            write_matrix_market(&m, &mut buf).unwrap();
            assert_eq!(parse_matrix_market(buf.as_slice()).unwrap(), m);
        }
    }
}
