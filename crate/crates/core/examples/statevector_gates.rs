// Bell state from |00⟩, then a rotation and the readout probabilities.
use qnn::statevec::{Gate, Observable, Pauli, StateVector};

fn main() -> qnn::Result<()> {
    let mut s = StateVector::zero(2)?;
    s.apply(&Gate::rotation(Pauli::Y, 0, std::f64::consts::FRAC_PI_2))?;
    s.apply(&Gate::Cnot { control: 0, target: 1 })?;
    for (i, a) in s.amplitudes().iter().enumerate() {
        println!("|{i:02b}⟩  {:+.6} {:+.6}i", a.re, a.im);
    }
    println!("<Z_1> = {:.6}", s.expectation(&Observable::z(1))?);

    s.apply(&Gate::rotation(Pauli::X, 1, 0.4))?;
    println!("P(q1 = 1) after RX(0.4) = {:.6}", s.prob_one(1)?);
    println!("norm² = {:.15}", s.norm_sqr());
    Ok(())
}
