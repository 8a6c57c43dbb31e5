//! Circuit templates for the classifiers: trainable single-qubit rotation
//! layers, digital entangling layers, analog (Hamiltonian evolution)
//! entangling layers, and their depth-`N` composition.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{QnnError, Result};
use crate::spin_models::HamiltonianSpec;
use crate::statevec::{matmul2, rotation, DenseUnitary, Matrix2, Pauli, StateVector};

/// Axis sequence of the three rotations each qubit receives in a trainable
/// layer, in time order.
pub const ROTATION_AXES: [Pauli; 3] = [Pauli::Z, Pauli::X, Pauli::Z];

/// Digital entangling layer flavour. All are nearest-neighbour chains
/// `q → q+1` without wrap-around.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EntKind {
    /// One chain of CZ gates.
    Cz,
    /// One chain of CNOT gates.
    Cx,
    /// The CNOT chain applied twice.
    Cx2,
}

impl EntKind {
    pub fn name(self) -> &'static str {
        match self {
            EntKind::Cz => "cz",
            EntKind::Cx => "cx",
            EntKind::Cx2 => "cx2",
        }
    }
}

impl fmt::Display for EntKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for EntKind {
    type Err = QnnError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cz" => Ok(EntKind::Cz),
            "cx" | "cnot" => Ok(EntKind::Cx),
            "cx2" => Ok(EntKind::Cx2),
            other => Err(QnnError::InvalidArgument(format!("unknown entangler `{other}`"))),
        }
    }
}

/// Entangling layer used between trainable layers.
#[derive(Clone, Debug, PartialEq)]
pub enum Entangler {
    Digital(EntKind),
    /// `e^{−iHt}` of a spin-chain Hamiltonian on the whole register.
    Analog { hamiltonian: HamiltonianSpec, t: f64 },
}

impl Entangler {
    pub fn name(&self) -> String {
        match self {
            Entangler::Digital(k) => k.name().to_string(),
            Entangler::Analog { .. } => "analog".to_string(),
        }
    }
}

/// One layer of a circuit template.
#[derive(Clone, Debug)]
pub enum LayerSpec {
    /// Per qubit `q`: `RZ(θ[slots[3q]])`, then `RX(θ[slots[3q+1]])`, then
    /// `RZ(θ[slots[3q+2]])`.
    ParamRotations { slots: Vec<usize> },
    Entangling { kind: EntKind },
    Analog { key: String, unitary: Arc<DenseUnitary> },
}

impl LayerSpec {
    pub fn slots(&self) -> &[usize] {
        match self {
            LayerSpec::ParamRotations { slots } => slots,
            _ => &[],
        }
    }
}

/// Trainable rotation layer on `n` qubits using slots `slot_base..slot_base+3n`.
pub fn param_rotation_layer(n: usize, slot_base: usize) -> LayerSpec {
    LayerSpec::ParamRotations {
        slots: (slot_base..slot_base + 3 * n).collect(),
    }
}

pub fn ent_layer(n: usize, kind: EntKind) -> Result<LayerSpec> {
    if n < 2 {
        return Err(QnnError::InvalidArgument(format!(
            "entangling layer needs at least 2 qubits, got {n}"
        )));
    }
    Ok(LayerSpec::Entangling { kind })
}

type AnalogCache = RwLock<HashMap<String, Arc<DenseUnitary>>>;

fn analog_cache() -> &'static AnalogCache {
    static CACHE: OnceLock<AnalogCache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn analog_key(h: &HamiltonianSpec, t: f64) -> String {
    // 12 significant digits
    format!("{}|t={:.11e}", h.cache_key(), t)
}

/// Analog entangling layer holding `e^{−iHt}`. The unitary is computed
/// once per `(H, t)` and shared through a process-wide cache.
pub fn analog_layer(h: &HamiltonianSpec, t: f64) -> Result<LayerSpec> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(QnnError::InvalidArgument(format!(
            "evolution time must be finite and non-negative, got {t}"
        )));
    }
    let key = analog_key(h, t);
    if let Some(u) = analog_cache().read().expect("analog cache poisoned").get(&key) {
        return Ok(LayerSpec::Analog {
            key,
            unitary: u.clone(),
        });
    }
    // computed outside the lock; a racing thread may do the same work
    let u = Arc::new(h.evolution_unitary(t)?);
    let u = analog_cache()
        .write()
        .expect("analog cache poisoned")
        .entry(key.clone())
        .or_insert(u)
        .clone();
    Ok(LayerSpec::Analog { key, unitary: u })
}

/// Ordered layers over a fixed register with indexed parameter slots.
#[derive(Clone, Debug)]
pub struct CircuitTemplate {
    num_qubits: usize,
    layers: Vec<LayerSpec>,
    num_params: usize,
}

impl CircuitTemplate {
    /// Validates layer shapes and that the slots are a permutation of
    /// `0..num_params`.
    pub fn new(num_qubits: usize, layers: Vec<LayerSpec>) -> Result<Self> {
        if num_qubits == 0 || num_qubits > crate::statevec::MAX_QUBITS {
            return Err(QnnError::InvalidArgument(format!("bad qubit count {num_qubits}")));
        }
        let mut seen = Vec::new();
        for layer in &layers {
            match layer {
                LayerSpec::ParamRotations { slots } => {
                    if slots.len() != 3 * num_qubits {
                        return Err(QnnError::DimensionMismatch {
                            what: "rotation layer slots",
                            expected: 3 * num_qubits,
                            actual: slots.len(),
                        });
                    }
                    seen.extend_from_slice(slots);
                }
                LayerSpec::Entangling { .. } => {
                    if num_qubits < 2 {
                        return Err(QnnError::InvalidArgument(
                            "entangling layer on a single qubit".into(),
                        ));
                    }
                }
                LayerSpec::Analog { unitary, .. } => {
                    if unitary.num_qubits() != num_qubits {
                        return Err(QnnError::DimensionMismatch {
                            what: "analog layer qubits",
                            expected: num_qubits,
                            actual: unitary.num_qubits(),
                        });
                    }
                }
            }
        }
        let num_params = seen.len();
        seen.sort_unstable();
        if seen.iter().enumerate().any(|(i, &s)| i != s) {
            return Err(QnnError::InvalidArgument(
                "parameter slots are not a permutation of 0..num_params".into(),
            ));
        }
        Ok(Self {
            num_qubits,
            layers,
            num_params,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    /// Output state for `angles` bound to the slots, starting from `input`.
    pub fn run(&self, angles: &[f64], input: &StateVector) -> Result<StateVector> {
        let mut state = input.clone();
        self.run_in_place(angles, &mut state)?;
        Ok(state)
    }

    pub fn run_in_place(&self, angles: &[f64], state: &mut StateVector) -> Result<()> {
        self.check_inputs(angles, state)?;
        for layer in &self.layers {
            apply_layer(layer, angles, state)?;
        }
        Ok(())
    }

    pub(crate) fn check_inputs(&self, angles: &[f64], state: &StateVector) -> Result<()> {
        if angles.len() != self.num_params {
            return Err(QnnError::DimensionMismatch {
                what: "angle count",
                expected: self.num_params,
                actual: angles.len(),
            });
        }
        if state.num_qubits() != self.num_qubits {
            return Err(QnnError::DimensionMismatch {
                what: "input qubit count",
                expected: self.num_qubits,
                actual: state.num_qubits(),
            });
        }
        Ok(())
    }
}

/// `RZ(c)·RX(b)·RZ(a)`: the three rotations of one qubit fused.
pub(crate) fn fused_rotation(a: f64, b: f64, c: f64) -> Matrix2 {
    let m = rotation(ROTATION_AXES[0], a);
    let m = matmul2(&rotation(ROTATION_AXES[1], b), &m);
    matmul2(&rotation(ROTATION_AXES[2], c), &m)
}

pub(crate) fn apply_layer(layer: &LayerSpec, angles: &[f64], state: &mut StateVector) -> Result<()> {
    match layer {
        LayerSpec::ParamRotations { slots } => {
            for (q, s) in slots.chunks_exact(3).enumerate() {
                let m = fused_rotation(angles[s[0]], angles[s[1]], angles[s[2]]);
                state.apply_1q(q, &m)?;
            }
        }
        LayerSpec::Entangling { kind } => apply_entangler(*kind, state, false)?,
        LayerSpec::Analog { unitary, .. } => {
            let targets: Vec<usize> = (0..state.num_qubits()).collect();
            state.apply_unitary(&targets, unitary, false)?;
        }
    }
    Ok(())
}

/// Applies a digital entangling chain, or its inverse when `inverse` is set.
pub(crate) fn apply_entangler(kind: EntKind, state: &mut StateVector, inverse: bool) -> Result<()> {
    let n = state.num_qubits();
    match kind {
        // CZ gates commute and are self-inverse
        EntKind::Cz => {
            for q in 0..n - 1 {
                state.apply_cz(q, q + 1)?;
            }
        }
        EntKind::Cx | EntKind::Cx2 => {
            let reps = if kind == EntKind::Cx2 { 2 } else { 1 };
            for _ in 0..reps {
                if inverse {
                    for q in (0..n - 1).rev() {
                        state.apply_cnot(q, q + 1)?;
                    }
                } else {
                    for q in 0..n - 1 {
                        state.apply_cnot(q, q + 1)?;
                    }
                }
            }
        }
    }
    Ok(())
}

/// Depth-`depth` classifier: `depth` repetitions of a trainable rotation
/// layer followed by `ent`. Slot numbering runs layer by layer, qubit by
/// qubit.
pub fn build_classifier(n: usize, depth: usize, ent: &Entangler) -> Result<CircuitTemplate> {
    if depth < 1 {
        return Err(QnnError::InvalidArgument("depth must be at least 1".into()));
    }
    let ent_spec = match ent {
        Entangler::Digital(kind) => ent_layer(n, *kind)?,
        Entangler::Analog { hamiltonian, t } => {
            if hamiltonian.num_sites() != n {
                return Err(QnnError::DimensionMismatch {
                    what: "analog Hamiltonian sites",
                    expected: n,
                    actual: hamiltonian.num_sites(),
                });
            }
            analog_layer(hamiltonian, *t)?
        }
    };
    let mut layers = Vec::with_capacity(2 * depth);
    for d in 0..depth {
        layers.push(param_rotation_layer(n, 3 * n * d));
        layers.push(ent_spec.clone());
    }
    CircuitTemplate::new(n, layers)
}
