//! Grid dumps: a one-line `dim,n` header followed by the values, either as
//! text (one value per line) or as little-endian `f64`s.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::GridFunction;
use crate::error::{Error, Result};

impl GridFunction {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{},{}", self.dim(), self.n())?;
        for v in self.values() {
            writeln!(out, "{v}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut lines = BufReader::new(input).lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty grid file".into()))??;
        let (dim, n) = parse_header(&header)?;
        let mut values = Vec::new();
        for (k, line) in lines.enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            values.push(
                line.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", k + 2)))?,
            );
        }
        Self::new(dim, n, values)
    }

    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{},{}", self.dim(), self.n())?;
        for v in self.values() {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(input: R) -> Result<Self> {
        let mut reader = BufReader::new(input);
        let mut header = String::new();
        reader.read_line(&mut header)?;
        let (dim, n) = parse_header(header.trim_end())?;
        let mut bytes = Vec::new();
        reader.read_to_end(&mut bytes)?;
        if bytes.len() % 8 != 0 {
            return Err(Error::Parse(format!(
                "binary payload of {} bytes is not a whole number of f64s",
                bytes.len()
            )));
        }
        let values = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        Self::new(dim, n, values)
    }

    /// Writes binary for a `.bin` extension and text otherwise.
    pub fn save(&self, path: &Path) -> Result<()> {
        let out = BufWriter::new(fs::File::create(path)?);
        if is_binary(path) {
            self.write_binary(out)
        } else {
            self.write_csv(out)
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let input = fs::File::open(path)?;
        if is_binary(path) {
            Self::read_binary(input)
        } else {
            Self::read_csv(input)
        }
    }
}

fn is_binary(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "bin")
}

fn parse_header(line: &str) -> Result<(usize, usize)> {
    let bad = || Error::Parse(format!("expected header `dim,n`, got `{line}`"));
    let (d, n) = line.split_once(',').ok_or_else(bad)?;
    Ok((
        d.trim().parse().map_err(|_| bad())?,
        n.trim().parse().map_err(|_| bad())?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_and_binary_round_trip() {
        let f = GridFunction::from_fn(2, 5, |x| (x[0] * 7.1).sin() - x[1] / 3.0).unwrap();
        let mut text = Vec::new();
        f.write_csv(&mut text).unwrap();
        assert!(text.starts_with(b"2,5\n"));
        assert_eq!(GridFunction::read_csv(&text[..]).unwrap(), f);

        let mut bin = Vec::new();
        f.write_binary(&mut bin).unwrap();
        assert_eq!(GridFunction::read_binary(&bin[..]).unwrap(), f);
    }

    #[test]
    fn header_is_validated() {
        assert!(matches!(
            GridFunction::read_csv(&b"2;5\n1.0\n"[..]),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            GridFunction::read_csv(&b"1,3\n1.0\n2.0\n"[..]),
            Err(Error::InvalidGrid(_))
        ));
    }
}
