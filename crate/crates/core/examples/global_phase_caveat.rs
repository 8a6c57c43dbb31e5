// (−1,−1) and (1,1) amplitude-encode to states that differ only by a global
// phase, so no circuit can tell them apart. Appending ones breaks the tie.
use qnn::encoding::{encode_amplitude, fix_global_phase, AmplitudeEncoding};

fn main() -> qnn::Result<()> {
    let (a, b) = ([-1.0, -1.0], [1.0, 1.0]);
    let enc = AmplitudeEncoding::new(1);
    let overlap = encode_amplitude(&a, &enc)?.inner(&encode_amplitude(&b, &enc)?)?;
    println!("plain:  <a|b> = {:+.3}, |<a|b>|² = {:.3}", overlap.re, overlap.norm_sqr());

    let enc = AmplitudeEncoding::new(2);
    let (pa, pb) = (fix_global_phase(&a, 2), fix_global_phase(&b, 2));
    let overlap = encode_amplitude(&pa, &enc)?.inner(&encode_amplitude(&pb, &enc)?)?;
    println!("padded: {pa:?} vs {pb:?}");
    println!("padded: |<a|b>|² = {:.3}", overlap.norm_sqr());
    Ok(())
}
