// Amplitude-encoded MNIST 1-vs-9 on 10 qubits.
//
//     cargo run --release --example train_amplitude_mnist -- [data_dir] [depth]
use qnn::ansatz::EntKind;
use qnn::sweep::{default_data_dir, Cell, DatasetSelector, EntChoice, PreparedData, SweepSpec};
use qnn::trainer::train;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let data_dir = args.next().map(Into::into).unwrap_or_else(default_data_dir);
    let depth = args.next().map(|s| s.parse()).transpose()?.unwrap_or(5);

    let data = PreparedData::load(&DatasetSelector::Mnist, &data_dir)?;
    let spec = SweepSpec::default();
    let split = data.split(spec.num_train, spec.num_test, 0)?;
    let cell = Cell {
        depth,
        ent: EntChoice::Digital(EntKind::Cx),
        scale: None,
        t_evo: None,
    };
    let h = spec.hypothesis(&cell, 10)?;
    println!("depth {depth}: {} parameters, readout qubit {}", h.num_params(), h.measured_qubit);

    let run = train(&h, &split.train, &split.test, &spec.train)?;
    for e in &run.evals {
        println!("iter {:>3}  train {:.3}  test {:.3}  loss {:.4}", e.iteration, e.train_acc, e.test_acc, e.train_loss);
    }
    println!("{:.1}s", run.wall_time_secs);
    Ok(())
}
