// Ground-state energy and gap of the cluster-Ising ring across the transition.
use qnn::spin_models::HamiltonianSpec;

fn main() -> qnn::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(8);
    println!("lambda,energy,gap");
    for i in 0..=10 {
        let lambda = 0.2 * i as f64;
        let gs = HamiltonianSpec::cluster_ising(n, lambda).ground_state()?;
        println!("{lambda:.1},{:.10},{:.6}", gs.energy, gs.gap);
    }
    Ok(())
}
