//! Spin-chain Hamiltonians used as data sources and as analog entanglers.
//!
//! Site `j` of a chain is qubit `j` of the register (most significant bit
//! first). Both models only involve real Pauli products (`XZX`, `YY`,
//! `XX + YY`, `Z`), so their matrices are real symmetric and are
//! diagonalized as such.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::data::{LabeledDataset, Samples, SptMeta};
use crate::error::{QnnError, Result};
use crate::statevec::{coupled_sets, DenseUnitary, StateVector, MAX_QUBITS};

/// Incommensurate ratio `(√5 − 1)/2` of the Aubry-André potential.
pub fn golden_alpha() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Boundary {
    Periodic,
    #[default]
    Open,
}

/// Defining parameters of a spin-chain Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HamiltonianSpec {
    /// `H = −Σ_j X_{j−1} Z_j X_{j+1} + λ Σ_j Y_j Y_{j+1}` on a ring.
    ClusterIsing { num_sites: usize, lambda: f64 },
    /// `H = −(g/2) Σ_k (X_k X_{k+1} + Y_k Y_{k+1}) − Σ_k (V_k/2) Z_k`,
    /// `V_k = V cos(2παk + φ)` with `k` counted from 1.
    AubryAndre {
        num_sites: usize,
        g: f64,
        v: f64,
        phi: f64,
        boundary: Boundary,
    },
}

/// An eigenvalue with its normalized eigenvector.
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub energy: f64,
    pub state: StateVector,
    /// `E_1 − E_0`; small values flag a (near-)degenerate ground space.
    pub gap: f64,
}

impl HamiltonianSpec {
    pub fn cluster_ising(num_sites: usize, lambda: f64) -> Self {
        HamiltonianSpec::ClusterIsing { num_sites, lambda }
    }

    /// Open Aubry-André chain with the default `V = 0`, `φ = 0`.
    pub fn aubry_andre(num_sites: usize, g: f64) -> Self {
        HamiltonianSpec::AubryAndre {
            num_sites,
            g,
            v: 0.0,
            phi: 0.0,
            boundary: Boundary::Open,
        }
    }

    pub fn num_sites(&self) -> usize {
        match *self {
            HamiltonianSpec::ClusterIsing { num_sites, .. }
            | HamiltonianSpec::AubryAndre { num_sites, .. } => num_sites,
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_sites();
        let min = match self {
            HamiltonianSpec::ClusterIsing { .. } => 3,
            HamiltonianSpec::AubryAndre { .. } => 2,
        };
        if n < min || n > MAX_QUBITS {
            return Err(QnnError::InvalidArgument(format!(
                "{n} sites outside {min}..={MAX_QUBITS} for {self:?}"
            )));
        }
        Ok(())
    }

    /// Stable textual key identifying the Hamiltonian, used for caching.
    pub fn cache_key(&self) -> String {
        match *self {
            HamiltonianSpec::ClusterIsing { num_sites, lambda } => {
                format!("ci:{num_sites}:{:016x}", lambda.to_bits())
            }
            HamiltonianSpec::AubryAndre {
                num_sites,
                g,
                v,
                phi,
                boundary,
            } => format!(
                "aa:{num_sites}:{:016x}:{:016x}:{:016x}:{boundary:?}",
                g.to_bits(),
                v.to_bits(),
                phi.to_bits()
            ),
        }
    }

    /// Dense `2^N × 2^N` real symmetric matrix.
    pub fn build_matrix(&self) -> Result<DMatrix<f64>> {
        self.validate()?;
        let n = self.num_sites();
        let dim = 1usize << n;
        let bit = |site: usize| 1usize << (n - 1 - site);
        let sign = |state: usize, site: usize| if state & bit(site) == 0 { 1.0 } else { -1.0 };
        let mut h = DMatrix::<f64>::zeros(dim, dim);

        match *self {
            HamiltonianSpec::ClusterIsing { lambda, .. } => {
                for col in 0..dim {
                    for j in 0..n {
                        let left = (j + n - 1) % n;
                        let right = (j + 1) % n;
                        // X_{j-1} Z_j X_{j+1}
                        let row = col ^ bit(left) ^ bit(right);
                        h[(row, col)] -= sign(col, j);
                        // λ Y_j Y_{j+1}: Y|b⟩ = i(−1)^b |b̄⟩, so YY picks up −s_j s_k
                        let row = col ^ bit(j) ^ bit(right);
                        h[(row, col)] += lambda * -(sign(col, j) * sign(col, right));
                    }
                }
            }
            HamiltonianSpec::AubryAndre {
                g,
                v,
                phi,
                boundary,
                ..
            } => {
                let alpha = golden_alpha();
                let bonds = match boundary {
                    Boundary::Open => n - 1,
                    Boundary::Periodic => n,
                };
                for col in 0..dim {
                    for k in 0..bonds {
                        let kk = (k + 1) % n;
                        // XX + YY moves a single excitation: 2 on |01⟩ ↔ |10⟩, 0 otherwise
                        let (sj, sk) = (sign(col, k), sign(col, kk));
                        if sj != sk {
                            let row = col ^ bit(k) ^ bit(kk);
                            h[(row, col)] -= 0.5 * g * 2.0;
                        }
                    }
                    if v != 0.0 {
                        let mut diag = 0.0;
                        for k in 0..n {
                            let vk = v * (2.0 * std::f64::consts::PI * alpha * (k + 1) as f64 + phi).cos();
                            diag -= 0.5 * vk * sign(col, k);
                        }
                        h[(col, col)] += diag;
                    }
                }
            }
        }
        Ok(h)
    }

    /// Full spectrum with eigenvectors, eigenvalues ascending.
    pub fn diagonalize(&self) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let h = self.build_matrix()?;
        diagonalize_symmetric(h)
    }

    /// Lowest eigenpair, phase-fixed so the largest-magnitude amplitude is
    /// real and positive. Among exactly tied energies the solver's first
    /// vector is kept.
    pub fn ground_state(&self) -> Result<EigenPair> {
        let (values, vectors) = self.diagonalize()?;
        let n = self.num_sites();
        let mut col: Vec<f64> = vectors.column(0).iter().copied().collect();
        let (mut best, mut best_abs) = (0, -1.0);
        for (i, v) in col.iter().enumerate() {
            if v.abs() > best_abs + 1e-12 {
                best = i;
                best_abs = v.abs();
            }
        }
        if col[best] < 0.0 {
            col.iter_mut().for_each(|v| *v = -*v);
        }
        let state = StateVector::from_real(&col, n, true)?;
        let gap = if values.len() > 1 { values[1] - values[0] } else { 0.0 };
        Ok(EigenPair {
            energy: values[0],
            state,
            gap,
        })
    }

    /// `U = e^{−iHt} = Q diag(e^{−iE_j t}) Qᵀ`, computed separately on each
    /// set of basis states that `H` couples (exact zeros elsewhere), so
    /// conserved quantities make both the solve and later products cheaper.
    pub fn evolution_unitary(&self, t: f64) -> Result<DenseUnitary> {
        if !t.is_finite() {
            return Err(QnnError::InvalidArgument(format!("evolution time {t}")));
        }
        let h = self.build_matrix()?;
        let dim = h.nrows();
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for idx in coupled_sets(dim, |r, c| h[(r, c)] != 0.0) {
            let k = idx.len();
            let sub = DMatrix::from_fn(k, k, |r, c| h[(idx[r], idx[c])]);
            let (values, q) = diagonalize_symmetric(sub)?;
            let mut q_cos = q.clone();
            let mut q_sin = q.clone();
            for (j, &e) in values.iter().enumerate() {
                let (s, c) = (e * t).sin_cos();
                q_cos.column_mut(j).scale_mut(c);
                q_sin.column_mut(j).scale_mut(s);
            }
            let qt = q.transpose();
            let re = q_cos * &qt;
            let im = q_sin * &qt;
            for (r, &gr) in idx.iter().enumerate() {
                for (c, &gc) in idx.iter().enumerate() {
                    data[gr * dim + gc] = Complex64::new(re[(r, c)], -im[(r, c)]);
                }
            }
        }
        DenseUnitary::new(dim, data)
    }
}

pub(crate) fn diagonalize_symmetric(h: DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let dim = h.nrows();
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 0)
        .ok_or_else(|| QnnError::Solver(format!("symmetric eigensolver did not converge (dim {dim})")))?;
    let mut order: Vec<usize> = (0..dim).collect();
    // stable: exact ties keep the solver's order
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(dim, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(dim, dim);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// Evenly spaced transverse-coupling values `start, start+step, …, stop`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for LambdaGrid {
    fn default() -> Self {
        Self {
            start: 0.0,
            stop: 2.0,
            step: 0.001,
        }
    }
}

impl LambdaGrid {
    pub fn points(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(QnnError::InvalidArgument(format!(
                "grid step must be positive, got {}",
                self.step
            )));
        }
        if !(self.stop >= self.start) {
            return Err(QnnError::InvalidArgument("grid stop below start".into()));
        }
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|i| self.start + i as f64 * self.step).collect())
    }
}

/// Class of a cluster-Ising ground state: `Some(0)` in the cluster phase
/// (`λ < 1`), `Some(1)` in the antiferromagnetic phase (`λ > 1`), `None`
/// at the critical point.
pub fn spt_label(lambda: f64, step: f64) -> Option<usize> {
    let tol = step.abs().max(f64::EPSILON) * 1e-6;
    if (lambda - 1.0).abs() <= tol {
        None
    } else if lambda < 1.0 {
        Some(0)
    } else {
        Some(1)
    }
}

/// Ground states of the cluster-Ising ring across `grid`, labeled by phase.
/// The critical point `λ = 1` is left out.
pub fn make_spt_dataset(num_sites: usize, grid: LambdaGrid) -> Result<LabeledDataset> {
    if !(3..=12).contains(&num_sites) {
        return Err(QnnError::InvalidArgument(format!(
            "SPT dataset supports 3..=12 sites, got {num_sites}"
        )));
    }
    let points: Vec<(f64, usize)> = grid
        .points()?
        .into_iter()
        .filter_map(|l| spt_label(l, grid.step).map(|c| (l, c)))
        .collect();
    let solved: Vec<Result<EigenPair>> = points
        .par_iter()
        .map(|&(lambda, _)| HamiltonianSpec::cluster_ising(num_sites, lambda).ground_state())
        .collect();

    let mut states = Vec::with_capacity(points.len());
    let mut meta = SptMeta {
        num_sites,
        grid,
        lambdas: Vec::with_capacity(points.len()),
        gaps: Vec::with_capacity(points.len()),
    };
    for (pair, &(lambda, _)) in solved.into_iter().zip(&points) {
        let pair = pair?;
        states.push(pair.state);
        meta.lambdas.push(lambda);
        meta.gaps.push(pair.gap);
    }
    let labels = points.iter().map(|&(_, c)| c).collect();
    let mut ds = LabeledDataset::new(Samples::States(states), labels, format!("spt-{num_sites}"))?;
    ds.meta.preprocessing.push("cluster-ising ground states, dense diagonalization".into());
    ds.meta.spt = Some(meta);
    Ok(ds)
}
