// How far e^{−iHt} of the Aubry-André chain is from the identity, and what
// that does to a depth-1 circuit's light cone.
use qnn::ansatz::{build_classifier, Entangler};
use qnn::spin_models::HamiltonianSpec;
use qnn::statevec::StateVector;

fn main() -> qnn::Result<()> {
    let n = 6;
    let h = HamiltonianSpec::aubry_andre(n, 1.0);
    println!("t     |U - I|_max   P(q0=1) after a flip on q5");
    for &t in &[0.0, 0.1, 0.5, 1.0, 2.0] {
        let u = h.evolution_unitary(t)?;
        let dev = (0..u.dim())
            .flat_map(|r| (0..u.dim()).map(move |c| (r, c)))
            .map(|(r, c)| (u.get(r, c) - if r == c { 1.0 } else { 0.0 }).norm())
            .fold(0.0, f64::max);
        // one excitation on the last site; zero rotation angles
        let template = build_classifier(n, 1, &Entangler::Analog { hamiltonian: h, t })?;
        let theta = vec![0.0; template.num_params()];
        let out = template.run(&theta, &StateVector::basis(n, 1)?)?;
        println!("{t:<4}  {dev:.4}        {:.4}", out.prob_one(0)?);
    }
    Ok(())
}
