//! Plain-text cache of a [`StabilizerTable`].
//!
//! Layout: a header `# stabilizer-table n_qubits=N`, one line per state
//! `2^N,re_0,im_0,...,re_{2^N-1},im_{2^N-1}`, and a trailing integrity line
//! `# count=C`. A file whose count line disagrees with the body or with the
//! closed-form count is rejected.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64 as C64;

use super::stabilizer::{enumerate_stabilizer_states, stabilizer_state_count, StabilizerTable};
use crate::error::{Error, Result};

fn io_err(e: std::io::Error) -> Error {
    Error::InvalidParameter(format!("table cache I/O: {e}"))
}

pub fn write_table_cache(table: &StabilizerTable, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    let dim = 1usize << table.n_qubits();
    writeln!(w, "# stabilizer-table n_qubits={}", table.n_qubits()).map_err(io_err)?;
    for psi in table.states() {
        write!(w, "{dim}").map_err(io_err)?;
        for z in psi {
            write!(w, ",{},{}", z.re, z.im).map_err(io_err)?;
        }
        writeln!(w).map_err(io_err)?;
    }
    writeln!(w, "# count={}", table.len()).map_err(io_err)?;
    w.flush().map_err(io_err)
}

pub fn read_table_cache(path: &Path) -> Result<StabilizerTable> {
    let bad = |msg: &str| Error::InvalidParameter(format!("corrupt table cache {}: {msg}", path.display()));
    let file = fs::File::open(path).map_err(io_err)?;
    let mut lines = BufReader::new(file).lines();
    let header = lines.next().ok_or_else(|| bad("empty file"))?.map_err(io_err)?;
    let n: usize = header
        .strip_prefix("# stabilizer-table n_qubits=")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| bad("missing header"))?;
    let dim = 1usize << n;
    let mut states = Vec::new();
    let mut declared = None;
    for line in lines {
        let line = line.map_err(io_err)?;
        if let Some(c) = line.strip_prefix("# count=") {
            declared = Some(c.trim().parse::<usize>().map_err(|_| bad("bad count line"))?);
            break;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 1 + 2 * dim || fields[0].parse::<usize>().ok() != Some(dim) {
            return Err(bad("malformed row"));
        }
        let vals: Vec<f64> = fields[1..]
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| bad("bad number")))
            .collect::<Result<_>>()?;
        states.push(vals.chunks_exact(2).map(|c| C64::new(c[0], c[1])).collect());
    }
    let declared = declared.ok_or_else(|| bad("missing count line"))?;
    if declared != states.len() || declared as u128 != stabilizer_state_count(n) {
        return Err(bad("count check failed"));
    }
    Ok(StabilizerTable::from_states(n, states))
}

/// Reads the cache at `path`, regenerating and rewriting it when missing or
/// when its integrity check fails.
pub fn load_or_build_table(n: usize, path: &Path) -> Result<StabilizerTable> {
    if let Ok(t) = read_table_cache(path) {
        if t.n_qubits() == n {
            return Ok(t);
        }
    }
    let t = enumerate_stabilizer_states(n)?;
    write_table_cache(&t, path)?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_regeneration() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("stab2.csv");
        let t = load_or_build_table(2, &path).unwrap();
        let back = read_table_cache(&path).unwrap();
        assert_eq!(back.states(), t.states());
        for i in 0..t.len() {
            assert_eq!(back.pauli_column(i), t.pauli_column(i));
        }

        // truncate: integrity line now disagrees
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        lines.remove(3);
        std::fs::write(&path, lines.join("\n")).unwrap();
        assert!(read_table_cache(&path).is_err());
        let rebuilt = load_or_build_table(2, &path).unwrap();
        assert_eq!(rebuilt.len(), 60);
        assert!(read_table_cache(&path).is_ok());
    }
}
