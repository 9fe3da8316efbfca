//! DIMACS CNF reading and writing.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use satpart_core::cnf::{Clause, Cnf, Lit};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DimacsError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("missing 'p cnf <vars> <clauses>' header")]
    MissingHeader,
    #[error("malformed header: {0}")]
    BadHeader(String),
    #[error("bad token '{0}'")]
    BadToken(String),
    #[error("literal {lit} out of range (header declares {num_vars} variables)")]
    LiteralOutOfRange { lit: i64, num_vars: u32 },
    #[error("empty clause in input")]
    EmptyClause,
    #[error("clause count mismatch: header says {declared}, body has {found}")]
    ClauseCountMismatch { declared: usize, found: usize },
    #[error("unterminated final clause")]
    Unterminated,
}

pub fn write_dimacs<W: Write>(cnf: &Cnf, w: &mut W) -> io::Result<()> {
    writeln!(w, "p cnf {} {}", cnf.num_vars(), cnf.num_clauses())?;
    for clause in cnf.clauses() {
        for lit in clause {
            write!(w, "{} ", lit.to_dimacs())?;
        }
        writeln!(w, "0")?;
    }
    Ok(())
}

pub fn write_dimacs_file(cnf: &Cnf, path: &Path) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_dimacs(cnf, &mut w)?;
    w.flush()
}

/// Writes `cnf` plus extra clauses appended after it, widening the header
/// variable count as needed. This is how partition constraints reach an
/// external solver.
pub fn write_dimacs_with_extra<W: Write>(
    cnf: &Cnf,
    extra: &[Clause],
    w: &mut W,
) -> io::Result<()> {
    let num_vars = cnf.num_vars().max(satpart_core::cnf::max_var_in(extra));
    writeln!(w, "p cnf {} {}", num_vars, cnf.num_clauses() + extra.len())?;
    for clause in cnf.clauses().iter().chain(extra) {
        for lit in clause {
            write!(w, "{} ", lit.to_dimacs())?;
        }
        writeln!(w, "0")?;
    }
    Ok(())
}

pub fn read_dimacs<R: Read>(r: R) -> Result<Cnf, DimacsError> {
    let reader = BufReader::new(r);
    let mut header: Option<(u32, usize)> = None;
    let mut cnf = Cnf::new(0);
    let mut declared_clauses = 0usize;
    let mut current: Vec<Lit> = Vec::new();
    let mut found = 0usize;
    let mut done = false;
    for line in reader.lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        // SATLIB-style trailing "%" terminator
        if trimmed.starts_with('%') {
            done = true;
            break;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(DimacsError::BadHeader("duplicate header".into()));
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            if fields.len() != 4 || fields[1] != "cnf" {
                return Err(DimacsError::BadHeader(trimmed.into()));
            }
            let num_vars: u32 = fields[2]
                .parse()
                .map_err(|_| DimacsError::BadHeader(trimmed.into()))?;
            let num_clauses: usize = fields[3]
                .parse()
                .map_err(|_| DimacsError::BadHeader(trimmed.into()))?;
            header = Some((num_vars, num_clauses));
            cnf = Cnf::new(num_vars);
            declared_clauses = num_clauses;
            continue;
        }
        let (num_vars, _) = header.ok_or(DimacsError::MissingHeader)?;
        for token in trimmed.split_whitespace() {
            let value: i64 = token
                .parse()
                .map_err(|_| DimacsError::BadToken(token.into()))?;
            if value == 0 {
                if current.is_empty() {
                    return Err(DimacsError::EmptyClause);
                }
                cnf.add_clause(std::mem::take(&mut current))
                    .map_err(|_| DimacsError::LiteralOutOfRange {
                        lit: 0,
                        num_vars,
                    })?;
                found += 1;
                continue;
            }
            if value.unsigned_abs() > u64::from(num_vars) {
                return Err(DimacsError::LiteralOutOfRange {
                    lit: value,
                    num_vars,
                });
            }
            current.push(Lit::from_dimacs(value as i32).expect("nonzero"));
        }
    }
    let _ = done;
    if header.is_none() {
        return Err(DimacsError::MissingHeader);
    }
    if !current.is_empty() {
        return Err(DimacsError::Unterminated);
    }
    if found != declared_clauses {
        return Err(DimacsError::ClauseCountMismatch {
            declared: declared_clauses,
            found,
        });
    }
    Ok(cnf)
}

pub fn read_dimacs_file(path: &Path) -> Result<Cnf, DimacsError> {
    read_dimacs(File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use satpart_core::cnf::clause_from_dimacs;

    #[test]
    fn format_matches_the_convention() {
        let mut cnf = Cnf::new(2);
        cnf.add_clause(clause_from_dimacs(&[1, -2])).unwrap();
        let mut buf = Vec::new();
        write_dimacs(&cnf, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "p cnf 2 1\n1 -2 0\n");
    }

    #[test]
    fn round_trip_preserves_clauses() {
        let mut cnf = Cnf::new(4);
        cnf.add_clause(clause_from_dimacs(&[1, -2, 3])).unwrap();
        cnf.add_clause(clause_from_dimacs(&[-1, 4])).unwrap();
        cnf.add_clause(clause_from_dimacs(&[2])).unwrap();
        let mut buf = Vec::new();
        write_dimacs(&cnf, &mut buf).unwrap();
        let back = read_dimacs(buf.as_slice()).unwrap();
        assert_eq!(back, cnf);
    }

    #[test]
    fn header_body_mismatch_is_an_error() {
        let text = "p cnf 2 2\n1 -2 0\n";
        assert!(matches!(
            read_dimacs(text.as_bytes()),
            Err(DimacsError::ClauseCountMismatch { .. })
        ));
    }

    #[test]
    fn out_of_range_literal_is_an_error() {
        let text = "p cnf 2 1\n1 -3 0\n";
        assert!(matches!(
            read_dimacs(text.as_bytes()),
            Err(DimacsError::LiteralOutOfRange { lit: -3, .. })
        ));
    }

    #[test]
    fn comments_and_multiline_clauses_are_accepted() {
        let text = "c a comment\np cnf 3 1\n1 2\n3 0\n";
        let cnf = read_dimacs(text.as_bytes()).unwrap();
        assert_eq!(cnf.num_clauses(), 1);
        assert_eq!(cnf.clauses()[0].len(), 3);
    }

    #[test]
    fn missing_header_is_an_error() {
        assert!(matches!(
            read_dimacs("1 2 0\n".as_bytes()),
            Err(DimacsError::MissingHeader)
        ));
    }

    #[test]
    fn extra_clauses_widen_the_header() {
        let mut cnf = Cnf::new(2);
        cnf.add_clause(clause_from_dimacs(&[1, 2])).unwrap();
        let extra = vec![clause_from_dimacs(&[3]), clause_from_dimacs(&[-1])];
        let mut buf = Vec::new();
        write_dimacs_with_extra(&cnf, &extra, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("p cnf 3 3\n"));
    }
}
