//! Classical data → circuit input. Amplitude encoding turns a feature
//! vector into the initial state; block encoding adds it, scaled, onto the
//! trainable angles.

use crate::error::{QnnError, Result};
use crate::statevec::StateVector;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PadPolicy {
    /// Short vectors are padded with zeros up to `2^n`.
    #[default]
    ZeroPad,
    /// Only vectors of length exactly `2^n` are accepted.
    Error,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AmplitudeEncoding {
    pub num_qubits: usize,
    pub pad_policy: PadPolicy,
    pub normalize: bool,
}

impl AmplitudeEncoding {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            pad_policy: PadPolicy::ZeroPad,
            normalize: true,
        }
    }
}

/// Interleaved block encoding: `angle_k = scale · x_k + θ_k` for every slot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockEncoding {
    /// Radians per unit feature.
    pub scale: f64,
    /// Total angle count; equals the circuit's parameter count.
    pub pad_to: usize,
}

/// Either encoding, as carried by a hypothesis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Encoding {
    Amplitude(AmplitudeEncoding),
    Block(BlockEncoding),
}

impl Encoding {
    pub fn name(&self) -> &'static str {
        match self {
            Encoding::Amplitude(_) => "amplitude",
            Encoding::Block(_) => "block",
        }
    }
}

/// `x / ‖x‖`, zero-padded to `2^n`, as a state.
pub fn encode_amplitude(x: &[f64], enc: &AmplitudeEncoding) -> Result<StateVector> {
    let n = enc.num_qubits;
    let dim = 1usize << n;
    if x.len() > dim || (enc.pad_policy == PadPolicy::Error && x.len() != dim) {
        return Err(QnnError::DimensionMismatch {
            what: "amplitude-encoded feature length",
            expected: dim,
            actual: x.len(),
        });
    }
    let mut padded = vec![0.0; dim];
    padded[..x.len()].copy_from_slice(x);
    StateVector::from_real(&padded, n, enc.normalize)
}

/// Combined angles `scale · x̃ + θ`, with `x̃` the zero-padded features.
pub fn encode_block(x: &[f64], theta: &[f64], enc: &BlockEncoding) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    encode_block_into(x, theta, enc, &mut out)?;
    Ok(out)
}

pub(crate) fn encode_block_into(x: &[f64], theta: &[f64], enc: &BlockEncoding, out: &mut Vec<f64>) -> Result<()> {
    if theta.len() != enc.pad_to {
        return Err(QnnError::DimensionMismatch {
            what: "parameter count",
            expected: enc.pad_to,
            actual: theta.len(),
        });
    }
    if x.len() > enc.pad_to {
        return Err(QnnError::DimensionMismatch {
            what: "block-encoded feature length",
            expected: enc.pad_to,
            actual: x.len(),
        });
    }
    out.clear();
    out.extend_from_slice(theta);
    for (a, &v) in out.iter_mut().zip(x) {
        *a += enc.scale * v;
    }
    Ok(())
}

/// Appends `num_ones` entries equal to 1, so that vectors differing only
/// by sign no longer encode to states differing only by a global phase.
pub fn fix_global_phase(x: &[f64], num_ones: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len() + num_ones);
    out.extend_from_slice(x);
    out.extend(std::iter::repeat_n(1.0, num_ones));
    out
}
