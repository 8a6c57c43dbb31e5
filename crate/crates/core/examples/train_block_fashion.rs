// Block encoding on FashionMNIST (T-shirt vs ankle boot): 270 angles,
// each the sum of a trainable parameter and c times a pixel.
//
//     cargo run --release --example train_block_fashion -- [data_dir] [c]
use qnn::ansatz::EntKind;
use qnn::sweep::{default_data_dir, Cell, DatasetSelector, EncodingMode, EntChoice, PreparedData, SweepSpec};
use qnn::trainer::{train, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let data_dir = args.next().map(Into::into).unwrap_or_else(default_data_dir);
    let scale: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(2.0);

    let data = PreparedData::load(&DatasetSelector::Fashion, &data_dir)?;
    let spec = SweepSpec {
        encoding: EncodingMode::Block,
        ..SweepSpec::default()
    };
    let cell = Cell {
        depth: 9,
        ent: EntChoice::Digital(EntKind::Cx),
        scale: Some(scale),
        t_evo: None,
    };
    let h = spec.hypothesis(&cell, 10)?;
    let split = data.split(spec.num_train, spec.num_test, 1)?;
    let config = TrainConfig { eval_every: 50, ..TrainConfig::default() };
    let run = train(&h, &split.train, &split.test, &config)?;
    for e in &run.evals {
        println!("iter {:>3}  train {:.3}  test {:.3}", e.iteration, e.train_acc, e.test_acc);
    }
    Ok(())
}
