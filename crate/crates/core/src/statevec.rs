//! Dense statevector simulation.
//!
//! Basis-index convention: qubit `0` is the **most significant** bit of the
//! basis index, so for `n` qubits the computational state `|b_0 b_1 … b_{n-1}⟩`
//! lives at index `Σ b_q · 2^(n-1-q)`. Every module in the crate shares this
//! convention (Hamiltonian sites, encodings, the measured qubit).
//!
//! Gate kernels work in place with stride arithmetic; only
//! [`Gate::Unitary`] touches an explicit matrix.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{QnnError, Result};

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 14;

const NORM_TOLERANCE: f64 = 1e-8;
const UNITARY_TOLERANCE: f64 = 1e-9;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A 2×2 complex matrix, row-major: `[[m00, m01], [m10, m11]]`.
pub type Matrix2 = [[Complex64; 2]; 2];

/// Pure state of `n` qubits as `2^n` complex amplitudes.
#[derive(Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl fmt::Debug for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StateVector")
            .field("num_qubits", &self.num_qubits)
            .field("amps", &self.amps)
            .finish()
    }
}

fn check_register(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(QnnError::InvalidArgument(format!(
            "qubit count {n} outside 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

impl StateVector {
    /// `|0…0⟩` on `n` qubits.
    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_register(n)?;
        let dim = 1usize << n;
        if index >= dim {
            return Err(QnnError::InvalidArgument(format!(
                "basis index {index} out of range for {n} qubits"
            )));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(Self { num_qubits: n, amps })
    }

    /// Wraps raw amplitudes. With `normalize` the vector is rescaled to unit
    /// norm (a zero vector is rejected); otherwise its norm must already be
    /// within `1e-8` of one.
    pub fn from_amplitudes(amps: Vec<Complex64>, n: usize, normalize: bool) -> Result<Self> {
        check_register(n)?;
        let dim = 1usize << n;
        if amps.len() != dim {
            return Err(QnnError::DimensionMismatch {
                what: "amplitude count",
                expected: dim,
                actual: amps.len(),
            });
        }
        let mut state = Self { num_qubits: n, amps };
        let norm = state.norm_sqr().sqrt();
        if normalize {
            if norm == 0.0 || !norm.is_finite() {
                return Err(QnnError::InvalidArgument(
                    "cannot normalize a zero or non-finite vector".into(),
                ));
            }
            let inv = 1.0 / norm;
            state.amps.iter_mut().for_each(|a| *a *= inv);
        } else if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(QnnError::InvalidArgument(format!(
                "state norm {norm} is not 1 (set normalize to rescale)"
            )));
        }
        Ok(state)
    }

    /// Real-valued convenience wrapper around [`StateVector::from_amplitudes`].
    pub fn from_real(values: &[f64], n: usize, normalize: bool) -> Result<Self> {
        let amps = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Self::from_amplitudes(amps, n, normalize)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.num_qubits != other.num_qubits {
            return Err(QnnError::DimensionMismatch {
                what: "qubit count",
                expected: self.num_qubits,
                actual: other.num_qubits,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Multiplies every amplitude by `e^{iφ}`.
    pub fn with_global_phase(mut self, phi: f64) -> Self {
        let phase = Complex64::from_polar(1.0, phi);
        self.amps.iter_mut().for_each(|a| *a *= phase);
        self
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(QnnError::QubitOutOfRange {
                qubit,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    fn bit_of(&self, qubit: usize) -> usize {
        self.num_qubits - 1 - qubit
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        match gate {
            Gate::Rx { target, angle } => self.apply_1q(*target, &rotation(Pauli::X, *angle)),
            Gate::Ry { target, angle } => self.apply_1q(*target, &rotation(Pauli::Y, *angle)),
            Gate::Rz { target, angle } => {
                self.check_qubit(*target)?;
                let half = 0.5 * angle;
                let lo = Complex64::from_polar(1.0, -half);
                let hi = Complex64::from_polar(1.0, half);
                diagonal_1q(&mut self.amps, self.num_qubits - 1 - target, lo, hi);
                Ok(())
            }
            Gate::Cnot { control, target } => self.apply_cnot(*control, *target),
            Gate::Cz { control, target } => self.apply_cz(*control, *target),
            Gate::Unitary { targets, matrix } => self.apply_unitary(targets, matrix, false),
        }
    }

    /// Applies an arbitrary 2×2 matrix to one qubit. The caller is
    /// responsible for the matrix being unitary.
    pub fn apply_1q(&mut self, qubit: usize, m: &Matrix2) -> Result<()> {
        self.check_qubit(qubit)?;
        let bit = self.bit_of(qubit);
        kernel_1q(&mut self.amps, bit, m);
        Ok(())
    }

    /// Applies the bare Pauli `p` (not a rotation) to one qubit.
    pub fn apply_pauli(&mut self, p: Pauli, qubit: usize) -> Result<()> {
        self.check_qubit(qubit)?;
        let bit = self.bit_of(qubit);
        match p {
            Pauli::Z => diagonal_1q(&mut self.amps, bit, ONE, -ONE),
            _ => kernel_1q(&mut self.amps, bit, &p.matrix()),
        }
        Ok(())
    }

    fn check_pair(&self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(QnnError::InvalidArgument(format!(
                "control and target coincide (qubit {control})"
            )));
        }
        Ok(())
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_pair(control, target)?;
        let cmask = 1usize << self.bit_of(control);
        let tmask = 1usize << self.bit_of(target);
        for i in 0..self.amps.len() {
            // visit each swapped pair once, from its target-bit-0 member
            if i & cmask != 0 && i & tmask == 0 {
                self.amps.swap(i, i | tmask);
            }
        }
        Ok(())
    }

    pub fn apply_cz(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_pair(control, target)?;
        let mask = (1usize << self.bit_of(control)) | (1usize << self.bit_of(target));
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *a = -*a;
            }
        }
        Ok(())
    }

    /// Applies `U` (or `U†` when `adjoint` is set) on `targets`, where
    /// `targets[0]` is the most significant bit of the matrix index.
    pub(crate) fn apply_unitary(
        &mut self,
        targets: &[usize],
        matrix: &DenseUnitary,
        adjoint: bool,
    ) -> Result<()> {
        if targets.len() != matrix.num_qubits() {
            return Err(QnnError::DimensionMismatch {
                what: "unitary target count",
                expected: matrix.num_qubits(),
                actual: targets.len(),
            });
        }
        for (i, &t) in targets.iter().enumerate() {
            self.check_qubit(t)?;
            if targets[..i].contains(&t) {
                return Err(QnnError::InvalidArgument(format!(
                    "repeated unitary target {t}"
                )));
            }
        }
        let full = targets.len() == self.num_qubits && targets.iter().enumerate().all(|(i, &t)| i == t);
        if full {
            let out = matrix.mul_vec(&self.amps, adjoint);
            self.amps = out;
            return Ok(());
        }
        let k = targets.len();
        let masks: Vec<usize> = targets.iter().map(|&t| 1usize << self.bit_of(t)).collect();
        let all: usize = masks.iter().sum();
        let offsets: Vec<usize> = (0..1usize << k)
            .map(|sub| {
                (0..k)
                    .filter(|&j| sub >> (k - 1 - j) & 1 == 1)
                    .map(|j| masks[j])
                    .sum()
            })
            .collect();
        let mut local = vec![ZERO; 1 << k];
        for base in 0..self.amps.len() {
            if base & all != 0 {
                continue;
            }
            for (slot, off) in local.iter_mut().zip(&offsets) {
                *slot = self.amps[base | off];
            }
            let out = matrix.mul_vec(&local, adjoint);
            for (v, off) in out.into_iter().zip(&offsets) {
                self.amps[base | off] = v;
            }
        }
        Ok(())
    }

    /// Probability of reading `1` on `qubit`.
    pub fn prob_one(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let mask = 1usize << self.bit_of(qubit);
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// `⟨ψ|O|ψ⟩`. Probabilities are taken relative to the state's own norm
    /// so that `P0 + P1 = 1` holds to rounding.
    pub fn expectation(&self, obs: &Observable) -> Result<f64> {
        self.check_qubit(obs.qubit)?;
        let mask = 1usize << self.bit_of(obs.qubit);
        let (mut p0, mut p1) = (0.0, 0.0);
        for (i, a) in self.amps.iter().enumerate() {
            if i & mask == 0 {
                p0 += a.norm_sqr();
            } else {
                p1 += a.norm_sqr();
            }
        }
        let total = p0 + p1;
        Ok(match obs.kind {
            ObservableKind::PauliZ => (p0 - p1) / total,
            ObservableKind::Projector0 => p0 / total,
            ObservableKind::Projector1 => p1 / total,
        })
    }

    /// Zeroes every amplitude whose `qubit` bit differs from `value`
    /// (an unnormalized projection).
    pub(crate) fn project(&mut self, qubit: usize, value: bool) -> Result<()> {
        self.check_qubit(qubit)?;
        let mask = 1usize << self.bit_of(qubit);
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i & mask != 0) != value {
                *a = ZERO;
            }
        }
        Ok(())
    }
}

#[inline]
fn kernel_1q(amps: &mut [Complex64], bit: usize, m: &Matrix2) {
    let stride = 1usize << bit;
    let [[m00, m01], [m10, m11]] = *m;
    for chunk in amps.chunks_exact_mut(stride << 1) {
        let (lo, hi) = chunk.split_at_mut(stride);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = m00 * x + m01 * y;
            *b = m10 * x + m11 * y;
        }
    }
}

#[inline]
fn diagonal_1q(amps: &mut [Complex64], bit: usize, d0: Complex64, d1: Complex64) {
    let stride = 1usize << bit;
    for chunk in amps.chunks_exact_mut(stride << 1) {
        let (lo, hi) = chunk.split_at_mut(stride);
        lo.iter_mut().for_each(|a| *a *= d0);
        hi.iter_mut().for_each(|b| *b *= d1);
    }
}

/// Single-qubit Pauli operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> Matrix2 {
        let i = Complex64::i();
        match self {
            Pauli::X => [[ZERO, ONE], [ONE, ZERO]],
            Pauli::Y => [[ZERO, -i], [i, ZERO]],
            Pauli::Z => [[ONE, ZERO], [ZERO, -ONE]],
        }
    }
}

/// `e^{-iθP/2} = cos(θ/2)·I − i·sin(θ/2)·P`.
pub fn rotation(axis: Pauli, theta: f64) -> Matrix2 {
    let (s, c) = (0.5 * theta).sin_cos();
    let c = Complex64::new(c, 0.0);
    let p = axis.matrix();
    let mis = Complex64::new(0.0, -s);
    [
        [c + mis * p[0][0], mis * p[0][1]],
        [mis * p[1][0], c + mis * p[1][1]],
    ]
}

/// `a · b` for 2×2 matrices.
pub fn matmul2(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    let mut out = [[ZERO; 2]; 2];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

/// One gate of the supported set. Qubit indices follow the crate's
/// most-significant-bit convention.
#[derive(Clone, Debug)]
pub enum Gate {
    Rx { target: usize, angle: f64 },
    Ry { target: usize, angle: f64 },
    Rz { target: usize, angle: f64 },
    Cnot { control: usize, target: usize },
    Cz { control: usize, target: usize },
    Unitary { targets: Vec<usize>, matrix: Arc<DenseUnitary> },
}

impl Gate {
    pub fn rotation(axis: Pauli, target: usize, angle: f64) -> Self {
        match axis {
            Pauli::X => Gate::Rx { target, angle },
            Pauli::Y => Gate::Ry { target, angle },
            Pauli::Z => Gate::Rz { target, angle },
        }
    }

    /// Dense unitary acting on the whole `n`-qubit register.
    pub fn full_unitary(matrix: Arc<DenseUnitary>) -> Self {
        let targets = (0..matrix.num_qubits()).collect();
        Gate::Unitary { targets, matrix }
    }
}

/// A validated `2^k × 2^k` unitary, stored row-major.
///
/// Exact zeros are exploited: if the matrix only couples basis states
/// within disjoint index sets (e.g. a number-conserving evolution), it is
/// applied block by block.
#[derive(Clone, PartialEq)]
pub struct DenseUnitary {
    num_qubits: usize,
    dim: usize,
    data: Vec<Complex64>,
    blocks: Vec<Block>,
}

/// Square sub-matrix on the basis states `idx`, row-major.
#[derive(Clone, Debug, PartialEq)]
struct Block {
    idx: Vec<usize>,
    m: Vec<Complex64>,
}

/// Connected components of the coupling graph `r ~ c ⇔ coupled(r, c)`,
/// each sorted ascending, ordered by smallest member.
pub(crate) fn coupled_sets(dim: usize, coupled: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..dim).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for r in 0..dim {
        for c in r + 1..dim {
            if coupled(r, c) || coupled(c, r) {
                let (a, b) = (root(&mut parent, r), root(&mut parent, c));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut sets: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; dim];
    for i in 0..dim {
        let r = root(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = sets.len();
            sets.push(Vec::new());
        }
        sets[slot[r]].push(i);
    }
    sets
}

fn find_blocks(dim: usize, data: &[Complex64]) -> Vec<Block> {
    let sets = coupled_sets(dim, |r, c| data[r * dim + c] != ZERO);
    if sets.len() == 1 {
        return Vec::new();
    }
    sets.into_iter()
        .map(|idx| {
            let m = idx
                .iter()
                .flat_map(|&r| idx.iter().map(move |&c| data[r * dim + c]))
                .collect();
            Block { idx, m }
        })
        .collect()
}

impl fmt::Debug for DenseUnitary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DenseUnitary({}x{})", self.dim, self.dim)
    }
}

impl DenseUnitary {
    /// Checks `U†U = I` within `1e-9` before accepting the matrix.
    pub fn new(dim: usize, row_major: Vec<Complex64>) -> Result<Self> {
        if !dim.is_power_of_two() || !(2..=1 << MAX_QUBITS).contains(&dim) {
            return Err(QnnError::InvalidArgument(format!(
                "unitary dimension {dim} is not a power of two in 2..=2^{MAX_QUBITS}"
            )));
        }
        if row_major.len() != dim * dim {
            return Err(QnnError::DimensionMismatch {
                what: "unitary entry count",
                expected: dim * dim,
                actual: row_major.len(),
            });
        }
        let u = Self {
            num_qubits: dim.trailing_zeros() as usize,
            dim,
            blocks: find_blocks(dim, &row_major),
            data: row_major,
        };
        let deviation = u.unitarity_deviation();
        if !(deviation <= UNITARY_TOLERANCE) {
            return Err(QnnError::NotUnitary { deviation });
        }
        Ok(u)
    }

    pub fn from_matrix(m: &nalgebra::DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(QnnError::DimensionMismatch {
                what: "unitary shape",
                expected: m.nrows(),
                actual: m.ncols(),
            });
        }
        let dim = m.nrows();
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            data.extend((0..dim).map(|c| m[(r, c)]));
        }
        Self::new(dim, data)
    }

    pub fn identity(num_qubits: usize) -> Result<Self> {
        check_register(num_qubits)?;
        let dim = 1usize << num_qubits;
        let mut data = vec![ZERO; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = ONE;
        }
        Self::new(dim, data)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn to_matrix(&self) -> nalgebra::DMatrix<Complex64> {
        nalgebra::DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    /// `max |(U†U − I)_{ij}|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let m = self.to_matrix();
        let prod = m.adjoint() * &m;
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for c in 0..self.dim {
                let target = if r == c { ONE } else { ZERO };
                worst = worst.max((prod[(r, c)] - target).norm());
            }
        }
        worst
    }

    /// Sizes of the invariant blocks the matrix splits into (one entry,
    /// `dim`, when it does not split).
    pub fn block_sizes(&self) -> Vec<usize> {
        if self.blocks.is_empty() {
            vec![self.dim]
        } else {
            self.blocks.iter().map(|b| b.idx.len()).collect()
        }
    }

    pub(crate) fn mul_vec(&self, x: &[Complex64], adjoint: bool) -> Vec<Complex64> {
        if self.blocks.is_empty() {
            return mul_dense(&self.data, self.dim, x, adjoint);
        }
        let mut y = vec![ZERO; self.dim];
        for b in &self.blocks {
            let xb: Vec<Complex64> = b.idx.iter().map(|&i| x[i]).collect();
            for (v, &i) in mul_dense(&b.m, b.idx.len(), &xb, adjoint).into_iter().zip(&b.idx) {
                y[i] = v;
            }
        }
        y
    }
}

fn mul_dense(data: &[Complex64], d: usize, x: &[Complex64], adjoint: bool) -> Vec<Complex64> {
    if adjoint {
        // y = U† x = Σ_r conj(U_r·) x_r, accumulated row by row
        let mut y = vec![ZERO; d];
        for (row, &xr) in data.chunks_exact(d).zip(x) {
            if xr == ZERO {
                continue;
            }
            for (yi, u) in y.iter_mut().zip(row) {
                *yi += u.conj() * xr;
            }
        }
        y
    } else {
        data.chunks_exact(d)
            .map(|row| row.iter().zip(x).map(|(u, v)| u * v).sum())
            .collect()
    }
}

/// Measured quantity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObservableKind {
    PauliZ,
    Projector0,
    Projector1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Observable {
    pub kind: ObservableKind,
    pub qubit: usize,
}

impl Observable {
    pub fn z(qubit: usize) -> Self {
        Self {
            kind: ObservableKind::PauliZ,
            qubit,
        }
    }

    pub fn p0(qubit: usize) -> Self {
        Self {
            kind: ObservableKind::Projector0,
            qubit,
        }
    }

    pub fn p1(qubit: usize) -> Self {
        Self {
            kind: ObservableKind::Projector1,
            qubit,
        }
    }
}
