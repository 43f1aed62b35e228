//! Plaintext CSV dump/load of transition data for post-hoc analysis and
//! offline datasets. Columns: `domain, s..., a..., r, s'..., terminal`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::buffer::ReplayBuffer;
use crate::error::CsvError;
use crate::transition::{Domain, Repr, Transition};

pub fn write_transitions<'a>(
    path: &Path,
    transitions: impl Iterator<Item = &'a Transition>,
) -> Result<(), CsvError> {
    let mut out = BufWriter::new(File::create(path)?);
    let mut header_written = false;
    for t in transitions {
        if !header_written {
            write_header(&mut out, t)?;
            header_written = true;
        }
        write!(out, "{}", t.domain.tag())?;
        write_repr(&mut out, &t.state)?;
        write_repr(&mut out, &t.action)?;
        write!(out, ",{}", t.reward)?;
        write_repr(&mut out, &t.next_state)?;
        writeln!(out, ",{}", u8::from(t.terminal))?;
    }
    Ok(())
}

pub fn write_buffer(path: &Path, buffer: &ReplayBuffer) -> Result<(), CsvError> {
    write_transitions(path, buffer.iter())
}

fn write_header(out: &mut impl Write, t: &Transition) -> Result<(), CsvError> {
    write!(out, "domain")?;
    match &t.state {
        Repr::Index(_) => write!(out, ",s")?,
        Repr::Vector(v) => {
            for i in 0..v.len() {
                write!(out, ",s{i}")?;
            }
        }
    }
    match &t.action {
        Repr::Index(_) => write!(out, ",a")?,
        Repr::Vector(v) => {
            for i in 0..v.len() {
                write!(out, ",a{i}")?;
            }
        }
    }
    write!(out, ",r")?;
    match &t.next_state {
        Repr::Index(_) => write!(out, ",ns")?,
        Repr::Vector(v) => {
            for i in 0..v.len() {
                write!(out, ",ns{i}")?;
            }
        }
    }
    writeln!(out, ",terminal")?;
    Ok(())
}

fn write_repr(out: &mut impl Write, r: &Repr) -> Result<(), CsvError> {
    match r {
        Repr::Index(i) => write!(out, ",{i}")?,
        Repr::Vector(v) => {
            for x in v {
                write!(out, ",{x}")?;
            }
        }
    }
    Ok(())
}

struct Layout {
    state_dim: Option<usize>, // None means discrete index
    action_dim: Option<usize>,
}

pub fn read_transitions(path: &Path) -> Result<Vec<Transition>, CsvError> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| CsvError::Header("empty file".into()))??;
    let layout = parse_header(&header)?;
    let mut out = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_row(&line, &layout, idx + 2)?);
    }
    Ok(out)
}

/// Loads a CSV dump into a fresh buffer with the given capacity.
pub fn read_buffer(path: &Path, capacity: usize) -> Result<ReplayBuffer, CsvError> {
    let mut buf = ReplayBuffer::new(capacity);
    for t in read_transitions(path)? {
        buf.push(t)
            .map_err(|e| CsvError::Header(format!("inconsistent rows: {e}")))?;
    }
    Ok(buf)
}

fn parse_header(header: &str) -> Result<Layout, CsvError> {
    let cols: Vec<&str> = header.trim().split(',').collect();
    if cols.first() != Some(&"domain") || cols.last() != Some(&"terminal") {
        return Err(CsvError::Header(header.into()));
    }
    let state_dim = if cols.contains(&"s") {
        None
    } else {
        Some(cols.iter().filter(|c| looks_indexed(c, 's')).count())
    };
    let action_dim = if cols.contains(&"a") {
        None
    } else {
        Some(cols.iter().filter(|c| looks_indexed(c, 'a')).count())
    };
    if state_dim == Some(0) || action_dim == Some(0) {
        return Err(CsvError::Header(header.into()));
    }
    Ok(Layout {
        state_dim,
        action_dim,
    })
}

fn looks_indexed(col: &str, prefix: char) -> bool {
    let mut chars = col.chars();
    chars.next() == Some(prefix) && chars.as_str().parse::<usize>().is_ok()
}

fn parse_row(line: &str, layout: &Layout, line_no: usize) -> Result<Transition, CsvError> {
    let mut fields = line.trim().split(',');
    let err = |msg: &str| CsvError::Parse {
        line: line_no,
        msg: msg.into(),
    };
    let domain = match fields.next().ok_or_else(|| err("missing domain"))? {
        "src" => Domain::Source,
        "tar" => Domain::Target,
        other => return Err(err(&format!("unknown domain tag {other:?}"))),
    };
    let take_repr = |dim: Option<usize>,
                         fields: &mut std::str::Split<'_, char>|
     -> Result<Repr, CsvError> {
        match dim {
            None => {
                let v = fields.next().ok_or_else(|| err("missing index column"))?;
                Ok(Repr::Index(
                    v.parse().map_err(|_| err(&format!("bad index {v:?}")))?,
                ))
            }
            Some(d) => {
                let mut vec = Vec::with_capacity(d);
                for _ in 0..d {
                    let v = fields.next().ok_or_else(|| err("missing vector column"))?;
                    vec.push(v.parse().map_err(|_| err(&format!("bad value {v:?}")))?);
                }
                Ok(Repr::Vector(vec))
            }
        }
    };
    let state = take_repr(layout.state_dim, &mut fields)?;
    let action = take_repr(layout.action_dim, &mut fields)?;
    let reward: f64 = {
        let v = fields.next().ok_or_else(|| err("missing reward"))?;
        v.parse().map_err(|_| err(&format!("bad reward {v:?}")))?
    };
    let next_state = take_repr(layout.state_dim, &mut fields)?;
    let terminal = match fields.next().ok_or_else(|| err("missing terminal"))? {
        "0" => false,
        "1" => true,
        other => return Err(err(&format!("bad terminal flag {other:?}"))),
    };
    Ok(Transition {
        state,
        action,
        reward,
        next_state,
        terminal,
        domain,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    #[test]
    fn continuous_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dump.csv");
        let mut rng = SeededRng::new(5);
        let transitions: Vec<Transition> = (0..50)
            .map(|i| {
                Transition::continuous(
                    vec![rng.uniform(), rng.uniform(), rng.uniform()],
                    vec![rng.uniform_in(-1.0, 1.0)],
                    rng.uniform(),
                    vec![rng.uniform(), rng.uniform(), rng.uniform()],
                    i % 7 == 0,
                    if i % 2 == 0 {
                        Domain::Source
                    } else {
                        Domain::Target
                    },
                )
            })
            .collect();
        write_transitions(&path, transitions.iter()).unwrap();
        let back = read_transitions(&path).unwrap();
        assert_eq!(back, transitions);
    }

    #[test]
    fn tabular_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dump.csv");
        let transitions: Vec<Transition> = (0..10)
            .map(|i| Transition::tabular(i, i % 4, 0.5, i + 1, false, Domain::Target))
            .collect();
        write_transitions(&path, transitions.iter()).unwrap();
        assert_eq!(read_transitions(&path).unwrap(), transitions);
    }

    #[test]
    fn bad_header_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "foo,bar\n1,2\n").unwrap();
        assert!(matches!(read_transitions(&path), Err(CsvError::Header(_))));
    }
}
