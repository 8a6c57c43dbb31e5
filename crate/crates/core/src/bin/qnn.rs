#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};

use qnn::data::save_spt;
use qnn::objective::{grad_check, GradientMethod, LossKind};
use qnn::spin_models::{make_spt_dataset, LambdaGrid};
use qnn::sweep::{one_based, run_sweep, EncodingMode, EntChoice, PreparedData, SweepFile, SweepOutcome, SweepSpec};

type Result<T> = std::result::Result<T, Box<dyn std::error::Error>>;

#[derive(Parser)]
#[command(name = "qnn", version, about = "Statevector QNN classifier simulator and benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate and save the cluster-Ising (SPT) state dataset.
    GenSpt {
        #[arg(long)]
        qubits: usize,
        #[arg(long, default_value_t = 0.001)]
        step: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// One seeded training run.
    Train(TrainArgs),
    /// Hyperparameter grid × seeds, written as summary tables.
    Sweep(SweepArgs),
    /// Compare parameter-shift gradients with finite differences.
    GradCheck {
        #[arg(long, default_value_t = 4)]
        qubits: usize,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Flags shared by `train` and `sweep`; unset flags fall back to the spec
/// file (sweep) and then to built-in defaults.
#[derive(Args)]
struct Common {
    /// mnist, fashion, spt-N, or a QNNSPT1 file.
    #[arg(long)]
    dataset: Option<String>,
    /// amplitude or block.
    #[arg(long)]
    encoding: Option<String>,
    /// Register size (default 10 for images, N for SPT data).
    #[arg(long)]
    qubits: Option<usize>,
    /// Readout qubit, counted from 1 (default: the middle one).
    #[arg(long)]
    measure_qubit: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    eval_every: Option<usize>,
    #[arg(long)]
    num_train: Option<usize>,
    #[arg(long)]
    num_test: Option<usize>,
    /// ce or mse.
    #[arg(long)]
    loss: Option<String>,
    /// adjoint or shift.
    #[arg(long)]
    grad: Option<String>,
    /// Append this many ones to every feature vector.
    #[arg(long)]
    global_phase_ones: Option<usize>,
    /// Dataset directory (default: $QNN_DATA_DIR or ./data).
    #[arg(long)]
    data_dir: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 1)]
    depth: usize,
    /// cz, cx, cx2 or analog.
    #[arg(long, default_value = "cx")]
    ent: String,
    #[arg(long)]
    t_evo: Option<f64>,
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML file with sweep settings.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
    #[arg(long, value_delimiter = ',')]
    depths: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    ents: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    scales: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    t_evos: Option<Vec<f64>>,
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    seed_base: Option<u64>,
    #[arg(long)]
    table: Option<String>,
    #[arg(long)]
    jobs: Option<usize>,
}

fn usage(msg: impl std::fmt::Display) -> ! {
    Cli::command().error(ErrorKind::InvalidValue, msg).exit()
}

fn parse<T: std::str::FromStr<Err = qnn::QnnError>>(s: &str) -> T {
    s.parse().unwrap_or_else(|e| usage(e))
}

fn apply_common(c: &Common, spec: &mut SweepSpec) {
    if let Some(d) = &c.dataset {
        spec.dataset = parse(d);
    }
    if let Some(e) = &c.encoding {
        spec.encoding = parse(e);
    }
    if c.qubits.is_some() {
        spec.num_qubits = c.qubits;
    }
    if let Some(q) = c.measure_qubit {
        spec.measure_qubit = Some(one_based(q).unwrap_or_else(|e| usage(e)));
    }
    if let Some(v) = c.lr {
        spec.train.learning_rate = v;
    }
    if let Some(v) = c.batch {
        spec.train.batch_size = v;
    }
    if let Some(v) = c.iters {
        spec.train.iterations = v;
    }
    if let Some(v) = c.eval_every {
        spec.train.eval_every = v;
    }
    if let Some(v) = c.num_train {
        spec.num_train = v;
    }
    if let Some(v) = c.num_test {
        spec.num_test = v;
    }
    if let Some(v) = &c.loss {
        spec.train.loss = parse::<LossKind>(v);
    }
    if let Some(v) = &c.grad {
        spec.train.gradient = parse::<GradientMethod>(v);
    }
    if let Some(v) = c.global_phase_ones {
        spec.global_phase_ones = v;
    }
    if let Some(v) = &c.data_dir {
        spec.data_dir = v.clone();
    }
    if let Some(v) = &c.out {
        spec.out_dir = v.clone();
    }
}

fn execute(spec: &SweepSpec) -> Result<SweepOutcome> {
    for w in spec.validate().unwrap_or_else(|e| usage(e)) {
        eprintln!("warning: {w}");
    }
    let data = PreparedData::load(&spec.dataset, &spec.data_dir)?;
    Ok(run_sweep(spec, &data)?)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::GenSpt { qubits, step, out } => {
            if !(step > 0.0) {
                usage("--step must be positive");
            }
            let grid = LambdaGrid {
                step,
                ..LambdaGrid::default()
            };
            let ds = make_spt_dataset(qubits, grid)?;
            save_spt(&out, &ds)?;
            let gaps = &ds.meta.spt.as_ref().expect("SPT metadata").gaps;
            let min = gaps.iter().copied().fold(f64::INFINITY, f64::min);
            let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
            let ones = ds.labels.iter().filter(|&&c| c == 1).count();
            println!("wrote {} states ({} SPT, {ones} antiferromagnetic) to {}", ds.len(), ds.len() - ones, out.display());
            println!("spectral gap: min {min:.6e}, mean {mean:.6}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Train(a) => {
            let mut spec = SweepSpec {
                table: "train".into(),
                out_dir: PathBuf::from("."),
                ..SweepSpec::default()
            };
            apply_common(&a.common, &mut spec);
            if a.common.out.is_none() {
                usage("--out is required");
            }
            let ent: EntChoice = parse(&a.ent);
            if a.t_evo.is_some() && ent != EntChoice::Analog {
                usage("--t-evo requires --ent analog");
            }
            if spec.train.iterations == 0 {
                usage("--iters must be at least 1");
            }
            if a.scale.is_some() && spec.encoding == EncodingMode::Amplitude {
                eprintln!("warning: --scale has no effect with amplitude encoding; ignored");
            }
            spec.depths = vec![a.depth];
            spec.ents = vec![ent];
            spec.scales = vec![a.scale.unwrap_or(1.0)];
            spec.t_evos = vec![a.t_evo.unwrap_or(1.0)];
            spec.seeds = 1;
            spec.seed_base = a.seed;
            if spec.encoding == EncodingMode::Amplitude {
                spec.scales = vec![1.0];
            }
            let outcome = execute(&spec)?;
            let (_, result) = &outcome.runs[0];
            match result {
                Ok(r) => {
                    let e = r.final_eval().expect("at least one evaluation");
                    println!(
                        "iter {}: train_acc {:.4} train_loss {:.6} test_acc {:.4} test_loss {:.6} ({:.1}s)",
                        e.iteration, e.train_acc, e.train_loss, e.test_acc, e.test_loss, r.wall_time_secs
                    );
                    Ok(ExitCode::SUCCESS)
                }
                Err(reason) => {
                    eprintln!("run failed: {reason}");
                    Ok(ExitCode::FAILURE)
                }
            }
        }
        Command::Sweep(a) => {
            let mut spec = SweepSpec::default();
            if let Some(p) = &a.spec {
                SweepFile::load(p)?.apply(&mut spec)?;
            }
            apply_common(&a.common, &mut spec);
            if let Some(v) = a.depths {
                spec.depths = v;
            }
            if let Some(v) = a.ents {
                spec.ents = v.iter().map(|s| parse(s)).collect();
            }
            if let Some(v) = a.scales {
                spec.scales = v;
            }
            if let Some(v) = a.t_evos {
                spec.t_evos = v;
            }
            if let Some(v) = a.seeds {
                spec.seeds = v;
            }
            if let Some(v) = a.seed_base {
                spec.seed_base = v;
            }
            if let Some(v) = a.table {
                spec.table = v;
            }
            if let Some(v) = a.jobs {
                spec.jobs = v;
            }
            let outcome = execute(&spec)?;
            println!("dataset,encoding,ent_kind,depth,scale,t_evo,runs,failed,mean_test_acc,std_test_acc,status");
            for r in &outcome.table.rows {
                println!(
                    "{},{},{},{},{},{},{},{},{:.4},{:.4},{}",
                    r.dataset, r.encoding, r.ent_kind, r.depth, r.scale, r.t_evo, r.runs, r.failed,
                    r.mean_test_acc, r.std_test_acc, r.status
                );
            }
            let failed = outcome.table.rows.iter().any(|r| r.status != "ok");
            Ok(if failed { ExitCode::FAILURE } else { ExitCode::SUCCESS })
        }
        Command::GradCheck { qubits, depth, trials, seed } => {
            if trials == 0 {
                usage("--trials must be at least 1");
            }
            let r = grad_check(qubits, depth, trials, seed)?;
            println!(
                "{} trials: max |shift - fd| = {:.3e}, max |shift - adjoint| = {:.3e}",
                r.trials, r.max_deviation, r.max_adjoint_deviation
            );
            Ok(if r.max_deviation > 1e-6 { ExitCode::FAILURE } else { ExitCode::SUCCESS })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
