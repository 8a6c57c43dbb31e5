//! `QNNSPT1` files: a line-oriented text header followed by the raw state
//! amplitudes as little-endian `f64` pairs `(re, im)`, `2^N` per state.
//!
//! ```text
//! QNNSPT1
//! qubits 8
//! count 2000
//! grid 0.0 2.0 0.001
//! label_rule lambda<1:0 lambda>1:1 lambda=1:excluded
//! lambdas 0.0 0.001 …
//! gaps …
//! labels 0 0 … 1
//! end
//! <count · 2^N · 16 bytes>
//! ```

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::data::{LabeledDataset, Samples, SptMeta};
use crate::error::{QnnError, Result};
use crate::spin_models::LambdaGrid;
use crate::statevec::StateVector;

pub const SPT_MAGIC: &str = "QNNSPT1";
const LABEL_RULE: &str = "lambda<1:0 lambda>1:1 lambda=1:excluded";

fn join<T: std::fmt::Debug>(v: &[T]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ")
}

pub fn save_spt(path: &Path, ds: &LabeledDataset) -> Result<()> {
    let states = ds.states().ok_or_else(|| {
        QnnError::InvalidArgument("SPT files hold quantum states, dataset has features".into())
    })?;
    let meta = ds
        .meta
        .spt
        .as_ref()
        .ok_or_else(|| QnnError::InvalidArgument("dataset carries no SPT metadata".into()))?;
    if meta.lambdas.len() != states.len() || meta.gaps.len() != states.len() {
        return Err(QnnError::InvalidArgument("SPT metadata does not cover every state".into()));
    }
    let n = meta.num_sites;
    let mut out = String::new();
    out.push_str(SPT_MAGIC);
    out.push('\n');
    out.push_str(&format!("qubits {n}\ncount {}\n", states.len()));
    out.push_str(&format!(
        "grid {:?} {:?} {:?}\n",
        meta.grid.start, meta.grid.stop, meta.grid.step
    ));
    out.push_str(&format!("label_rule {LABEL_RULE}\n"));
    out.push_str(&format!("lambdas {}\n", join(&meta.lambdas)));
    out.push_str(&format!("gaps {}\n", join(&meta.gaps)));
    out.push_str(&format!("labels {}\n", join(&ds.labels)));
    out.push_str("end\n");

    let mut bytes = out.into_bytes();
    bytes.reserve(states.len() * (16 << n));
    for s in states {
        if s.num_qubits() != n {
            return Err(QnnError::DimensionMismatch {
                what: "state qubit count",
                expected: n,
                actual: s.num_qubits(),
            });
        }
        for a in s.amplitudes() {
            bytes.extend_from_slice(&a.re.to_le_bytes());
            bytes.extend_from_slice(&a.im.to_le_bytes());
        }
    }
    fs::write(path, bytes).map_err(|e| QnnError::io(path, e))
}

fn parse_list<T: std::str::FromStr>(path: &Path, key: &str, rest: &str, count: usize) -> Result<Vec<T>> {
    let vals: std::result::Result<Vec<T>, _> = rest.split_whitespace().map(str::parse).collect();
    let vals = vals.map_err(|_| QnnError::format(path, format!("unparsable `{key}` entry")))?;
    if vals.len() != count {
        return Err(QnnError::format(
            path,
            format!("`{key}` has {} entries, header count is {count}", vals.len()),
        ));
    }
    Ok(vals)
}

/// Loads a `QNNSPT1` file; with `expected_qubits` set, a file for a
/// different chain length is rejected.
pub fn load_spt(path: &Path, expected_qubits: Option<usize>) -> Result<LabeledDataset> {
    let bytes = fs::read(path).map_err(|e| QnnError::io(path, e))?;
    let mut pos = 0;
    let mut lines = Vec::new();
    loop {
        let nl = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| QnnError::format(path, "header not terminated by `end`"))?;
        let line = std::str::from_utf8(&bytes[pos..pos + nl])
            .map_err(|_| QnnError::format(path, "header is not UTF-8"))?;
        pos += nl + 1;
        if line == "end" {
            break;
        }
        lines.push(line.to_string());
    }
    if lines.first().map(String::as_str) != Some(SPT_MAGIC) {
        return Err(QnnError::format(path, format!("missing magic `{SPT_MAGIC}`")));
    }
    let field = |key: &str| -> Result<&str> {
        lines
            .iter()
            .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(' ')))
            .ok_or_else(|| QnnError::format(path, format!("missing `{key}` line")))
    };
    let num = |key: &str| -> Result<usize> {
        field(key)?
            .trim()
            .parse()
            .map_err(|_| QnnError::format(path, format!("bad `{key}` value")))
    };
    let n = num("qubits")?;
    let count = num("count")?;
    if let Some(want) = expected_qubits {
        if want != n {
            return Err(QnnError::DimensionMismatch {
                what: "SPT file qubit count",
                expected: want,
                actual: n,
            });
        }
    }
    let grid: Vec<f64> = parse_list(path, "grid", field("grid")?, 3)?;
    let lambdas: Vec<f64> = parse_list(path, "lambdas", field("lambdas")?, count)?;
    let gaps: Vec<f64> = parse_list(path, "gaps", field("gaps")?, count)?;
    let labels: Vec<usize> = parse_list(path, "labels", field("labels")?, count)?;

    let dim = 1usize << n;
    let payload = &bytes[pos..];
    if payload.len() != count * dim * 16 {
        return Err(QnnError::format(
            path,
            format!(
                "expected {} amplitude bytes, found {}",
                count * dim * 16,
                payload.len()
            ),
        ));
    }
    let f = |c: &[u8]| f64::from_le_bytes(c.try_into().expect("8-byte chunk"));
    let mut states = Vec::with_capacity(count);
    for chunk in payload.chunks_exact(dim * 16) {
        let amps: Vec<Complex64> = chunk
            .chunks_exact(16)
            .map(|p| Complex64::new(f(&p[..8]), f(&p[8..])))
            .collect();
        states.push(StateVector::from_amplitudes(amps, n, false)?);
    }
    let mut ds = LabeledDataset::new(Samples::States(states), labels, format!("spt-{n}"))?;
    ds.meta.preprocessing.push(format!("loaded from {}", path.display()));
    ds.meta.spt = Some(SptMeta {
        num_sites: n,
        grid: LambdaGrid {
            start: grid[0],
            stop: grid[1],
            step: grid[2],
        },
        lambdas,
        gaps,
    });
    Ok(ds)
}
