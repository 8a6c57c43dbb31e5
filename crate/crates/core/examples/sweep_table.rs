// A small depth × entangler sweep on the 6-qubit SPT dataset, written as
// runs.csv and summary_mini.csv.
use qnn::ansatz::EntKind;
use qnn::sweep::{run_sweep, DatasetSelector, EntChoice, PreparedData, SweepSpec};
use qnn::trainer::TrainConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "results/mini".into());
    let spec = SweepSpec {
        dataset: DatasetSelector::Spt(6),
        depths: vec![1, 2, 4],
        ents: vec![EntChoice::Digital(EntKind::Cz), EntChoice::Digital(EntKind::Cx)],
        seeds: 3,
        num_train: 200,
        num_test: 100,
        train: TrainConfig { iterations: 60, eval_every: 0, learning_rate: 0.02, ..TrainConfig::default() },
        table: "mini".into(),
        out_dir: out.into(),
        jobs: std::thread::available_parallelism().map_or(1, |n| n.get()),
        ..SweepSpec::default()
    };
    let data = PreparedData::load(&spec.dataset, &spec.data_dir)?;
    let outcome = run_sweep(&spec, &data)?;
    println!("depth  ent  mean_test_acc  std");
    for r in &outcome.table.rows {
        println!("{:>5}  {:<3}  {:.3}          {:.3}", r.depth, r.ent_kind, r.mean_test_acc, r.std_test_acc);
    }
    println!("wrote {}", spec.out_dir.display());
    Ok(())
}
