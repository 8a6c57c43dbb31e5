//! Long-form and summary CSV emission for training runs.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{QnnError, Result};
use crate::trainer::RunRecord;

/// Coordinates of one table cell (a hyperparameter setting).
#[derive(Clone, Debug, PartialEq)]
pub struct CellKey {
    pub dataset: String,
    pub encoding: String,
    pub ent_kind: String,
    pub depth: usize,
    pub scale: Option<f64>,
    pub t_evo: Option<f64>,
}

/// A cell plus the seed of one repetition.
#[derive(Clone, Debug, PartialEq)]
pub struct RunKey {
    pub cell: CellKey,
    pub seed: u64,
}

#[derive(Serialize)]
struct LongRow<'a> {
    dataset: &'a str,
    encoding: &'a str,
    ent_kind: &'a str,
    depth: usize,
    scale: String,
    t_evo: String,
    seed: u64,
    iter: usize,
    train_acc: f64,
    train_loss: f64,
    test_acc: f64,
    test_loss: f64,
}

/// Aggregate of one cell over its seeds.
#[derive(Clone, Debug, Serialize)]
pub struct SummaryRow {
    pub dataset: String,
    pub encoding: String,
    pub ent_kind: String,
    pub depth: usize,
    pub scale: String,
    pub t_evo: String,
    pub runs: usize,
    pub failed: usize,
    pub mean_test_acc: f64,
    pub std_test_acc: f64,
    /// `ok`, `partial` (some seeds failed), `failed` (all failed) or `missing`.
    pub status: String,
    /// Contributing seeds, `;`-separated.
    pub seeds: String,
}

#[derive(Clone, Debug)]
pub struct ResultTable {
    pub name: String,
    pub rows: Vec<SummaryRow>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Final test accuracy of a completed run.
fn final_test_acc(r: &RunRecord) -> Option<f64> {
    if r.aborted.is_some() {
        return None;
    }
    r.evals.last().map(|e| e.test_acc)
}

/// Writes `runs.csv` (every evaluation point of every run) and
/// `summary_<table>.csv` (one row per entry of `cells`, in that order).
/// A run is either a record or the error message that replaced it; cells
/// without any run are kept and marked `missing`.
pub fn emit_results(
    runs: &[(RunKey, std::result::Result<RunRecord, String>)],
    cells: &[CellKey],
    table: &str,
    out_dir: &Path,
) -> Result<ResultTable> {
    fs::create_dir_all(out_dir).map_err(|e| QnnError::io(out_dir, e))?;

    let cell_pos = |k: &CellKey| cells.iter().position(|c| c == k).unwrap_or(usize::MAX);
    let mut order: Vec<usize> = (0..runs.len()).collect();
    order.sort_by_key(|&i| (cell_pos(&runs[i].0.cell), runs[i].0.seed));

    let long_path = out_dir.join("runs.csv");
    let mut w = csv::Writer::from_path(&long_path)?;
    for &i in &order {
        let (key, outcome) = &runs[i];
        let Ok(record) = outcome else { continue };
        let c = &key.cell;
        for e in &record.evals {
            w.serialize(LongRow {
                dataset: &c.dataset,
                encoding: &c.encoding,
                ent_kind: &c.ent_kind,
                depth: c.depth,
                scale: opt(c.scale),
                t_evo: opt(c.t_evo),
                seed: key.seed,
                iter: e.iteration,
                train_acc: e.train_acc,
                train_loss: e.train_loss,
                test_acc: e.test_acc,
                test_loss: e.test_loss,
            })?;
        }
    }
    w.flush().map_err(|e| QnnError::io(&long_path, e))?;

    let mut rows = Vec::with_capacity(cells.len());
    for cell in cells {
        let mut accs = Vec::new();
        let mut seeds = Vec::new();
        let mut failed = 0;
        let mut members: Vec<&(RunKey, std::result::Result<RunRecord, String>)> =
            runs.iter().filter(|(k, _)| &k.cell == cell).collect();
        members.sort_by_key(|(k, _)| k.seed);
        for (key, outcome) in members {
            match outcome.as_ref().ok().and_then(final_test_acc) {
                Some(acc) => {
                    accs.push(acc);
                    seeds.push(key.seed.to_string());
                }
                None => failed += 1,
            }
        }
        let n = accs.len();
        let mean = if n > 0 { accs.iter().sum::<f64>() / n as f64 } else { f64::NAN };
        let std = if n > 1 {
            (accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else if n == 1 {
            0.0
        } else {
            f64::NAN
        };
        let status = match (n, failed) {
            (0, 0) => "missing",
            (0, _) => "failed",
            (_, 0) => "ok",
            _ => "partial",
        };
        rows.push(SummaryRow {
            dataset: cell.dataset.clone(),
            encoding: cell.encoding.clone(),
            ent_kind: cell.ent_kind.clone(),
            depth: cell.depth,
            scale: opt(cell.scale),
            t_evo: opt(cell.t_evo),
            runs: n,
            failed,
            mean_test_acc: mean,
            std_test_acc: std,
            status: status.to_string(),
            seeds: seeds.join(";"),
        });
    }

    let summary_path = out_dir.join(format!("summary_{table}.csv"));
    let mut w = csv::Writer::from_path(&summary_path)?;
    for row in &rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| QnnError::io(&summary_path, e))?;

    Ok(ResultTable {
        name: table.to_string(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trainer::{EvalPoint, TrainConfig};

    fn record(acc: f64) -> RunRecord {
        RunRecord {
            evals: vec![
                EvalPoint {
                    iteration: 0,
                    train_acc: 0.5,
                    train_loss: 0.7,
                    test_acc: 0.5,
                    test_loss: 0.7,
                },
                EvalPoint {
                    iteration: 10,
                    train_acc: acc,
                    train_loss: 0.2,
                    test_acc: acc,
                    test_loss: 0.3,
                },
            ],
            initial_params: vec![],
            final_params: vec![],
            config: TrainConfig::default(),
            wall_time_secs: 0.0,
            gradient_evaluations: 0,
            aborted: None,
        }
    }

    fn grid() -> (Vec<CellKey>, Vec<(RunKey, std::result::Result<RunRecord, String>)>) {
        let mut cells = Vec::new();
        let mut runs = Vec::new();
        for depth in [1, 2] {
            for ent in ["cx", "cz"] {
                let cell = CellKey {
                    dataset: "mnist".into(),
                    encoding: "amplitude".into(),
                    ent_kind: ent.into(),
                    depth,
                    scale: None,
                    t_evo: None,
                };
                for seed in 0..3u64 {
                    let acc = 0.5 + 0.1 * seed as f64 + 0.01 * depth as f64;
                    runs.push((RunKey { cell: cell.clone(), seed }, Ok(record(acc))));
                }
                cells.push(cell);
            }
        }
        (cells, runs)
    }

    #[test]
    fn summary_counts_and_means() {
        let dir = tempfile::tempdir().unwrap();
        let (cells, runs) = grid();
        let table = emit_results(&runs, &cells, "t1", dir.path()).unwrap();
        assert_eq!(table.rows.len(), 4);
        let text = fs::read_to_string(dir.path().join("summary_t1.csv")).unwrap();
        assert_eq!(text.lines().count(), 5);
        let expected = (0.51 + 0.61 + 0.71) / 3.0;
        assert!((table.rows[0].mean_test_acc - expected).abs() < 1e-12);
        assert_eq!(table.rows[0].seeds, "0;1;2");
        let long = fs::read_to_string(dir.path().join("runs.csv")).unwrap();
        assert!(long.starts_with(
            "dataset,encoding,ent_kind,depth,scale,t_evo,seed,iter,train_acc,train_loss,test_acc,test_loss\n"
        ));
        assert_eq!(long.lines().count(), 1 + 12 * 2);
    }

    #[test]
    fn output_is_byte_identical_across_reruns() {
        let (cells, mut runs) = grid();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        emit_results(&runs, &cells, "t", a.path()).unwrap();
        runs.reverse();
        emit_results(&runs, &cells, "t", b.path()).unwrap();
        for f in ["runs.csv", "summary_t.csv"] {
            assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap());
        }
    }

    #[test]
    fn missing_and_failed_cells_are_marked() {
        let dir = tempfile::tempdir().unwrap();
        let (mut cells, mut runs) = grid();
        runs.retain(|(k, _)| k.cell != cells[3]);
        let bad = CellKey { depth: 9, ..cells[0].clone() };
        runs.push((RunKey { cell: bad.clone(), seed: 1 }, Err("diverged".into())));
        cells.push(bad);
        let table = emit_results(&runs, &cells, "t", dir.path()).unwrap();
        assert_eq!(table.rows[3].status, "missing");
        assert_eq!(table.rows[4].status, "failed");
        assert_eq!(table.rows[4].failed, 1);
    }
}
