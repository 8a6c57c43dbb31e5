//! Hypotheses (probabilities read off one measured qubit), losses, and
//! their gradients: the parameter-shift rule, an equivalent adjoint sweep,
//! and a finite-difference oracle.

use std::borrow::Cow;
use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::ansatz::{apply_entangler, CircuitTemplate, LayerSpec, ROTATION_AXES};
use crate::encoding::{encode_amplitude, encode_block_into, Encoding};
use crate::error::{QnnError, Result};
use crate::statevec::{rotation, Observable, Pauli, StateVector};

/// CE probability floor.
pub const DEFAULT_CE_EPS: f64 = 1e-10;

/// 0-based index of the default readout qubit: the middle one, `⌈n/2⌉`
/// counted from 1.
pub fn default_measured_qubit(num_qubits: usize) -> usize {
    num_qubits.div_ceil(2).saturating_sub(1)
}

/// One input to a hypothesis.
#[derive(Clone, Copy, Debug)]
pub enum Sample<'a> {
    /// A prepared quantum state (used as the circuit input directly).
    State(&'a StateVector),
    /// A classical feature vector, encoded per the hypothesis' encoding.
    Features(&'a [f64]),
}

/// Classifier `x ↦ (P(0), P(1))` on `measured_qubit` of the circuit output.
#[derive(Clone, Debug)]
pub struct Hypothesis {
    pub template: CircuitTemplate,
    pub encoding: Encoding,
    pub measured_qubit: usize,
}

impl Hypothesis {
    pub fn new(template: CircuitTemplate, encoding: Encoding, measured_qubit: usize) -> Result<Self> {
        let n = template.num_qubits();
        if measured_qubit >= n {
            return Err(QnnError::QubitOutOfRange {
                qubit: measured_qubit,
                num_qubits: n,
            });
        }
        match &encoding {
            Encoding::Amplitude(a) if a.num_qubits != n => {
                return Err(QnnError::DimensionMismatch {
                    what: "amplitude encoding qubits",
                    expected: n,
                    actual: a.num_qubits,
                })
            }
            Encoding::Block(b) if b.pad_to != template.num_params() => {
                return Err(QnnError::DimensionMismatch {
                    what: "block encoding width",
                    expected: template.num_params(),
                    actual: b.pad_to,
                })
            }
            _ => {}
        }
        Ok(Self {
            template,
            encoding,
            measured_qubit,
        })
    }

    pub fn num_params(&self) -> usize {
        self.template.num_params()
    }

    pub fn num_qubits(&self) -> usize {
        self.template.num_qubits()
    }

    /// Circuit input state and the angles bound to the slots.
    fn prepare<'t>(&self, sample: Sample<'_>, theta: &'t [f64]) -> Result<(StateVector, Cow<'t, [f64]>)> {
        if theta.len() != self.num_params() {
            return Err(QnnError::DimensionMismatch {
                what: "parameter count",
                expected: self.num_params(),
                actual: theta.len(),
            });
        }
        match (&self.encoding, sample) {
            (Encoding::Amplitude(_), Sample::State(s)) => Ok((s.clone(), Cow::Borrowed(theta))),
            (Encoding::Amplitude(enc), Sample::Features(x)) => {
                Ok((encode_amplitude(x, enc)?, Cow::Borrowed(theta)))
            }
            (Encoding::Block(enc), Sample::Features(x)) => {
                let mut angles = Vec::with_capacity(theta.len());
                encode_block_into(x, theta, enc, &mut angles)?;
                Ok((StateVector::zero(self.num_qubits())?, Cow::Owned(angles)))
            }
            (Encoding::Block(_), Sample::State(_)) => Err(QnnError::InvalidArgument(
                "block encoding needs classical features, got a state".into(),
            )),
        }
    }

    /// Output state `U ψ_in`.
    pub fn output_state(&self, sample: Sample<'_>, theta: &[f64]) -> Result<StateVector> {
        let (mut state, angles) = self.prepare(sample, theta)?;
        self.template.run_in_place(&angles, &mut state)?;
        Ok(state)
    }

    /// `(g₀, g₁)`: probabilities of reading 0 and 1 on the measured qubit.
    pub fn probabilities(&self, sample: Sample<'_>, theta: &[f64]) -> Result<[f64; 2]> {
        let out = self.output_state(sample, theta)?;
        self.readout(&out)
    }

    fn readout(&self, out: &StateVector) -> Result<[f64; 2]> {
        let q = self.measured_qubit;
        Ok([
            out.expectation(&Observable::p0(q))?,
            out.expectation(&Observable::p1(q))?,
        ])
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LossKind {
    Mse,
    /// `−Σ a_k ln max(g_k, eps_clip)`.
    CrossEntropy { eps_clip: f64 },
}

impl Default for LossKind {
    fn default() -> Self {
        LossKind::CrossEntropy {
            eps_clip: DEFAULT_CE_EPS,
        }
    }
}

impl LossKind {
    pub fn name(&self) -> &'static str {
        match self {
            LossKind::Mse => "mse",
            LossKind::CrossEntropy { .. } => "ce",
        }
    }
}

impl std::str::FromStr for LossKind {
    type Err = QnnError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mse" => Ok(LossKind::Mse),
            "ce" | "cross-entropy" | "crossentropy" => Ok(LossKind::default()),
            other => Err(QnnError::InvalidArgument(format!("unknown loss `{other}`"))),
        }
    }
}

pub fn loss(g: [f64; 2], a: [f64; 2], kind: LossKind) -> f64 {
    match kind {
        LossKind::Mse => (a[0] - g[0]).powi(2) + (a[1] - g[1]).powi(2),
        LossKind::CrossEntropy { eps_clip } => {
            -(0..2)
                .filter(|&k| a[k] != 0.0)
                .map(|k| a[k] * g[k].max(eps_clip).ln())
                .sum::<f64>()
        }
    }
}

/// `∂L/∂g_k`. For CE the clamped probability is used in the denominator,
/// which keeps the sign of the gradient at vanishing `g_k`.
pub fn loss_derivative(g: [f64; 2], a: [f64; 2], kind: LossKind) -> [f64; 2] {
    match kind {
        LossKind::Mse => [2.0 * (g[0] - a[0]), 2.0 * (g[1] - a[1])],
        LossKind::CrossEntropy { eps_clip } => [-a[0] / g[0].max(eps_clip), -a[1] / g[1].max(eps_clip)],
    }
}

/// How `∂g/∂θ` is obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GradientMethod {
    /// Two shifted circuit evaluations per slot.
    ParameterShift,
    /// One forward and one reverse sweep over the circuit; exact, same
    /// values as the shift rule.
    #[default]
    Adjoint,
}

impl GradientMethod {
    pub fn name(self) -> &'static str {
        match self {
            GradientMethod::ParameterShift => "shift",
            GradientMethod::Adjoint => "adjoint",
        }
    }
}

impl std::str::FromStr for GradientMethod {
    type Err = QnnError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "shift" | "parameter-shift" => Ok(GradientMethod::ParameterShift),
            "adjoint" => Ok(GradientMethod::Adjoint),
            other => Err(QnnError::InvalidArgument(format!("unknown gradient method `{other}`"))),
        }
    }
}

/// `(∂g₀/∂θ_k, ∂g₁/∂θ_k) = (g(θ + π/2·e_k) − g(θ − π/2·e_k)) / 2`.
pub fn shift_gradient(h: &Hypothesis, sample: Sample<'_>, theta: &[f64], k: usize) -> Result<[f64; 2]> {
    if k >= theta.len() {
        return Err(QnnError::InvalidArgument(format!(
            "slot {k} out of range for {} parameters",
            theta.len()
        )));
    }
    let mut shifted = theta.to_vec();
    shifted[k] = theta[k] + FRAC_PI_2;
    let plus = h.probabilities(sample, &shifted)?;
    shifted[k] = theta[k] - FRAC_PI_2;
    let minus = h.probabilities(sample, &shifted)?;
    Ok([(plus[0] - minus[0]) / 2.0, (plus[1] - minus[1]) / 2.0])
}

/// Loss, probabilities and loss gradient at one sample.
#[derive(Clone, Debug)]
pub struct LossGradient {
    pub loss: f64,
    pub probs: [f64; 2],
    pub grad: Vec<f64>,
    /// Circuit executions spent (forward passes, shifted passes, reverse
    /// sweeps).
    pub evaluations: u64,
}

pub fn loss_gradient(
    h: &Hypothesis,
    sample: Sample<'_>,
    label: [f64; 2],
    theta: &[f64],
    kind: LossKind,
    method: GradientMethod,
) -> Result<LossGradient> {
    match method {
        GradientMethod::ParameterShift => {
            let probs = h.probabilities(sample, theta)?;
            let dl = loss_derivative(probs, label, kind);
            let grad = (0..theta.len())
                .map(|k| shift_gradient(h, sample, theta, k).map(|dg| dl[0] * dg[0] + dl[1] * dg[1]))
                .collect::<Result<Vec<_>>>()?;
            Ok(LossGradient {
                loss: loss(probs, label, kind),
                probs,
                grad,
                evaluations: 1 + 2 * theta.len() as u64,
            })
        }
        GradientMethod::Adjoint => {
            let (probs, dg0) = adjoint_prob_gradient(h, sample, theta)?;
            let dl = loss_derivative(probs, label, kind);
            // g₁ = 1 − g₀
            let w = dl[0] - dl[1];
            Ok(LossGradient {
                loss: loss(probs, label, kind),
                probs,
                grad: dg0.into_iter().map(|d| w * d).collect(),
                evaluations: 2,
            })
        }
    }
}

/// `Im ⟨λ|P_q|φ⟩`.
fn im_pauli_overlap(lambda: &[Complex64], phi: &[Complex64], p: Pauli, mask: usize) -> f64 {
    match p {
        Pauli::Z => lambda
            .iter()
            .zip(phi)
            .enumerate()
            .map(|(i, (l, f))| {
                let v = (l.conj() * f).im;
                if i & mask == 0 {
                    v
                } else {
                    -v
                }
            })
            .sum(),
        Pauli::X => lambda
            .iter()
            .enumerate()
            .map(|(i, l)| (l.conj() * phi[i ^ mask]).im)
            .sum(),
        Pauli::Y => lambda
            .iter()
            .enumerate()
            .map(|(i, l)| {
                // Y|0⟩ = i|1⟩, Y|1⟩ = −i|0⟩
                let f = phi[i ^ mask];
                let yf = if i & mask == 0 {
                    Complex64::new(f.im, -f.re)
                } else {
                    Complex64::new(-f.im, f.re)
                };
                (l.conj() * yf).im
            })
            .sum(),
    }
}

/// `(g, ∂g₀/∂θ)` via a reverse sweep. With `λ = U_{>j}† P₀ φ_out` and `φ_j`
/// the state right after rotation `j` (generator `P`),
/// `∂g₀/∂θ_j = Im ⟨λ_j|P|φ_j⟩`.
pub fn adjoint_prob_gradient(h: &Hypothesis, sample: Sample<'_>, theta: &[f64]) -> Result<([f64; 2], Vec<f64>)> {
    let (mut phi, angles) = h.prepare(sample, theta)?;
    h.template.run_in_place(&angles, &mut phi)?;
    let probs = h.readout(&phi)?;
    let n = h.num_qubits();
    let total = phi.norm_sqr();
    let mut lambda = phi.clone();
    lambda.project(h.measured_qubit, false)?;
    lambda.amplitudes_mut().iter_mut().for_each(|a| *a /= total);

    let mut grad = vec![0.0; theta.len()];
    let all: Vec<usize> = (0..n).collect();
    for layer in h.template.layers().iter().rev() {
        match layer {
            LayerSpec::ParamRotations { slots } => {
                for q in 0..n {
                    let mask = 1usize << (n - 1 - q);
                    for r in (0..3).rev() {
                        let slot = slots[3 * q + r];
                        let axis = ROTATION_AXES[r];
                        grad[slot] = im_pauli_overlap(lambda.amplitudes(), phi.amplitudes(), axis, mask);
                        let inv = rotation(axis, -angles[slot]);
                        phi.apply_1q(q, &inv)?;
                        lambda.apply_1q(q, &inv)?;
                    }
                }
            }
            LayerSpec::Entangling { kind } => {
                apply_entangler(*kind, &mut phi, true)?;
                apply_entangler(*kind, &mut lambda, true)?;
            }
            LayerSpec::Analog { unitary, .. } => {
                phi.apply_unitary(&all, unitary, true)?;
                lambda.apply_unitary(&all, unitary, true)?;
            }
        }
    }
    Ok((probs, grad))
}

/// Central differences `(L(θ + ε e_k) − L(θ − ε e_k)) / 2ε`.
pub fn fd_gradient_oracle(
    h: &Hypothesis,
    sample: Sample<'_>,
    label: [f64; 2],
    theta: &[f64],
    kind: LossKind,
    eps: f64,
) -> Result<Vec<f64>> {
    if !(eps > 0.0) {
        return Err(QnnError::InvalidArgument(format!("step must be positive, got {eps}")));
    }
    let mut t = theta.to_vec();
    (0..theta.len())
        .map(|k| {
            t[k] = theta[k] + eps;
            let up = loss(h.probabilities(sample, &t)?, label, kind);
            t[k] = theta[k] - eps;
            let down = loss(h.probabilities(sample, &t)?, label, kind);
            t[k] = theta[k];
            Ok((up - down) / (2.0 * eps))
        })
        .collect()
}

/// Outcome of [`grad_check`].
#[derive(Clone, Debug)]
pub struct GradCheckReport {
    pub trials: usize,
    /// Largest `|shift − FD|` over every slot of every trial.
    pub max_deviation: f64,
    /// Largest `|shift − adjoint|`.
    pub max_adjoint_deviation: f64,
}

/// Compares parameter-shift loss gradients with central differences
/// (`ε = 1e-5`) and with the adjoint sweep on `trials` random circuits of
/// `num_qubits` qubits and `depth` blocks. Trials cycle through both
/// encodings, both losses and all entanglers, including the analog one.
pub fn grad_check(num_qubits: usize, depth: usize, trials: usize, seed: u64) -> Result<GradCheckReport> {
    use crate::ansatz::{build_classifier, EntKind, Entangler};
    use crate::encoding::{AmplitudeEncoding, BlockEncoding};
    use crate::spin_models::HamiltonianSpec;
    use rand::{Rng, SeedableRng};

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut report = GradCheckReport {
        trials,
        max_deviation: 0.0,
        max_adjoint_deviation: 0.0,
    };
    for t in 0..trials {
        let ent = match t % 4 {
            0 => Entangler::Digital(EntKind::Cx),
            1 => Entangler::Digital(EntKind::Cz),
            2 => Entangler::Digital(EntKind::Cx2),
            _ => Entangler::Analog {
                hamiltonian: HamiltonianSpec::aubry_andre(num_qubits, 1.0),
                t: rng.random_range(0.0..2.0),
            },
        };
        let template = build_classifier(num_qubits, depth, &ent)?;
        let p = template.num_params();
        let block = (t / 4) % 2 == 1;
        let (encoding, width) = if block {
            let scale = rng.random_range(0.5..3.0);
            (Encoding::Block(BlockEncoding { scale, pad_to: p }), p)
        } else {
            (Encoding::Amplitude(AmplitudeEncoding::new(num_qubits)), 1 << num_qubits)
        };
        let kind = if (t / 8) % 2 == 0 { LossKind::default() } else { LossKind::Mse };
        let h = Hypothesis::new(template, encoding, rng.random_range(0..num_qubits))?;
        let x: Vec<f64> = (0..width).map(|_| rng.random_range(-1.0..1.0)).collect();
        let theta: Vec<f64> = (0..p).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        let label = crate::data::one_hot(rng.random_range(0..2));
        let sample = Sample::Features(&x);
        let shift = loss_gradient(&h, sample, label, &theta, kind, GradientMethod::ParameterShift)?.grad;
        let adjoint = loss_gradient(&h, sample, label, &theta, kind, GradientMethod::Adjoint)?.grad;
        let fd = fd_gradient_oracle(&h, sample, label, &theta, kind, 1e-5)?;
        for k in 0..p {
            report.max_deviation = report.max_deviation.max((shift[k] - fd[k]).abs());
            report.max_adjoint_deviation = report.max_adjoint_deviation.max((shift[k] - adjoint[k]).abs());
        }
    }
    Ok(report)
}
