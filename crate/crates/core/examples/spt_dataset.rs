// Generate a labeled cluster-Ising dataset, write it, read it back.
use qnn::data::{load_spt, save_spt};
use qnn::spin_models::{make_spt_dataset, LambdaGrid};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = LambdaGrid { step: 0.01, ..LambdaGrid::default() };
    let ds = make_spt_dataset(8, grid)?;
    let meta = ds.meta.spt.as_ref().expect("SPT metadata");
    let ones = ds.labels.iter().filter(|&&c| c == 1).count();
    println!("{} states: {} cluster phase, {ones} antiferromagnetic", ds.len(), ds.len() - ones);
    let (i, gap) = meta.gaps.iter().enumerate().fold((0, f64::INFINITY), |b, (i, &g)| if g < b.1 { (i, g) } else { b });
    println!("smallest gap {gap:.4} at lambda {:.2}", meta.lambdas[i]);

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("spt8.qnnspt");
    save_spt(&path, &ds)?;
    let back = load_spt(&path, Some(8))?;
    println!("round trip: {} states, labels equal: {}", back.len(), back.labels == ds.labels);
    Ok(())
}
