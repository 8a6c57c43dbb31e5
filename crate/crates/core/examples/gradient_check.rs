// Parameter-shift vs adjoint vs central differences on one small classifier.
use qnn::ansatz::{build_classifier, EntKind, Entangler};
use qnn::data::one_hot;
use qnn::encoding::{AmplitudeEncoding, Encoding};
use qnn::objective::{fd_gradient_oracle, grad_check, loss_gradient, GradientMethod, Hypothesis, LossKind, Sample};

fn main() -> qnn::Result<()> {
    let n = 3;
    let template = build_classifier(n, 2, &Entangler::Digital(EntKind::Cx))?;
    let h = Hypothesis::new(template, Encoding::Amplitude(AmplitudeEncoding::new(n)), 1)?;
    let x: Vec<f64> = (0..8).map(|i| (i as f64 * 0.7).sin()).collect();
    let theta: Vec<f64> = (0..h.num_params()).map(|k| 0.3 * k as f64).collect();
    let (s, label, kind) = (Sample::Features(&x), one_hot(1), LossKind::default());

    let shift = loss_gradient(&h, s, label, &theta, kind, GradientMethod::ParameterShift)?;
    let adjoint = loss_gradient(&h, s, label, &theta, kind, GradientMethod::Adjoint)?;
    let fd = fd_gradient_oracle(&h, s, label, &theta, kind, 1e-5)?;
    println!("slot  shift           adjoint         fd");
    for k in 0..theta.len() {
        println!("{k:>4}  {:+.10}  {:+.10}  {:+.10}", shift.grad[k], adjoint.grad[k], fd[k]);
    }
    println!("circuit runs: shift {}, adjoint {}", shift.evaluations, adjoint.evaluations);

    let r = grad_check(4, 3, 40, 7)?;
    println!("random sweep: max |shift-fd| {:.2e}, max |shift-adjoint| {:.2e}", r.max_deviation, r.max_adjoint_deviation);
    Ok(())
}
