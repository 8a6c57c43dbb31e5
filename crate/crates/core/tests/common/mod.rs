// Dense Kronecker-product reference, written without the crate's gate kernels.
#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::DMatrix;
use num_complex::Complex64;
use qnn::ansatz::{CircuitTemplate, EntKind, LayerSpec};
use qnn::statevec::StateVector;

pub type CMat = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn mat2(a: [[Complex64; 2]; 2]) -> CMat {
    CMat::from_row_slice(2, 2, &[a[0][0], a[0][1], a[1][0], a[1][1]])
}

pub fn x() -> CMat {
    mat2([[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]])
}

pub fn y() -> CMat {
    mat2([[c(0., 0.), c(0., -1.)], [c(0., 1.), c(0., 0.)]])
}

pub fn z() -> CMat {
    mat2([[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]])
}

pub fn rz(t: f64) -> CMat {
    mat2([[Complex64::from_polar(1.0, -t / 2.0), c(0., 0.)], [c(0., 0.), Complex64::from_polar(1.0, t / 2.0)]])
}

pub fn ry(t: f64) -> CMat {
    let (s, co) = (t / 2.0).sin_cos();
    mat2([[c(co, 0.), c(-s, 0.)], [c(s, 0.), c(co, 0.)]])
}

pub fn rx(t: f64) -> CMat {
    let (s, co) = (t / 2.0).sin_cos();
    mat2([[c(co, 0.), c(0., -s)], [c(0., -s), c(co, 0.)]])
}

pub fn kron_all(ops: &[CMat]) -> CMat {
    ops.iter().fold(CMat::identity(1, 1), |acc, m| acc.kronecker(m))
}

/// `m` on qubit `q` (qubit 0 is the leftmost factor).
pub fn on(n: usize, q: usize, m: &CMat) -> CMat {
    let ops: Vec<CMat> = (0..n).map(|k| if k == q { m.clone() } else { CMat::identity(2, 2) }).collect();
    kron_all(&ops)
}

/// Product of single-qubit operators placed on several qubits.
pub fn string(n: usize, parts: &[(usize, CMat)]) -> CMat {
    let ops: Vec<CMat> = (0..n)
        .map(|k| {
            parts
                .iter()
                .find(|(q, _)| *q == k)
                .map(|(_, m)| m.clone())
                .unwrap_or_else(|| CMat::identity(2, 2))
        })
        .collect();
    kron_all(&ops)
}

fn controlled(n: usize, ctrl: usize, target: usize, u: &CMat) -> CMat {
    let p0 = mat2([[c(1., 0.), c(0., 0.)], [c(0., 0.), c(0., 0.)]]);
    let p1 = mat2([[c(0., 0.), c(0., 0.)], [c(0., 0.), c(1., 0.)]]);
    on(n, ctrl, &p0) + string(n, &[(ctrl, p1), (target, u.clone())])
}

pub fn cnot(n: usize, ctrl: usize, target: usize) -> CMat {
    controlled(n, ctrl, target, &x())
}

pub fn cz(n: usize, a: usize, b: usize) -> CMat {
    controlled(n, a, b, &z())
}

pub fn ent_matrix(n: usize, kind: EntKind) -> CMat {
    let mut m = CMat::identity(1 << n, 1 << n);
    let reps = if kind == EntKind::Cx2 { 2 } else { 1 };
    for _ in 0..reps {
        for q in 0..n - 1 {
            let g = match kind {
                EntKind::Cz => cz(n, q, q + 1),
                _ => cnot(n, q, q + 1),
            };
            m = g * m;
        }
    }
    m
}

/// Full circuit unitary, layer by layer.
pub fn template_unitary(t: &CircuitTemplate, angles: &[f64]) -> CMat {
    let n = t.num_qubits();
    let mut m = CMat::identity(1 << n, 1 << n);
    for layer in t.layers() {
        match layer {
            LayerSpec::ParamRotations { slots } => {
                for q in 0..n {
                    m = on(n, q, &rz(angles[slots[3 * q]])) * m;
                    m = on(n, q, &rx(angles[slots[3 * q + 1]])) * m;
                    m = on(n, q, &rz(angles[slots[3 * q + 2]])) * m;
                }
            }
            LayerSpec::Entangling { kind } => m = ent_matrix(n, *kind) * m,
            LayerSpec::Analog { unitary, .. } => m = unitary.to_matrix() * m,
        }
    }
    m
}

/// `e^{−iHt}` by the matrix exponential of a Kronecker-built Hamiltonian.
pub fn expm_evolution(h: &CMat, t: f64) -> CMat {
    (h * c(0.0, -t)).exp()
}

/// Open Aubry-André chain with `V = 0`.
pub fn aubry_andre_hopping(n: usize, g: f64) -> CMat {
    let mut h = CMat::zeros(1 << n, 1 << n);
    for k in 0..n - 1 {
        h -= string(n, &[(k, x()), (k + 1, x())]) * c(g / 2.0, 0.0);
        h -= string(n, &[(k, y()), (k + 1, y())]) * c(g / 2.0, 0.0);
    }
    h
}

/// Cluster-Ising ring `−Σ X Z X + λ Σ Y Y`.
pub fn cluster_ising(n: usize, lambda: f64) -> CMat {
    let mut h = CMat::zeros(1 << n, 1 << n);
    for j in 0..n {
        h -= stabilizer(n, j);
        h += string(n, &[(j, y()), ((j + 1) % n, y())]) * c(lambda, 0.0);
    }
    h
}

/// `X_{j−1} Z_j X_{j+1}` on the ring.
pub fn stabilizer(n: usize, j: usize) -> CMat {
    string(n, &[((j + n - 1) % n, x()), (j, z()), ((j + 1) % n, x())])
}

pub fn column(s: &StateVector) -> CMat {
    CMat::from_column_slice(s.dim(), 1, s.amplitudes())
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max)
}

/// `⟨ψ|M|ψ⟩`.
pub fn expect(s: &StateVector, m: &CMat) -> Complex64 {
    let v = column(s);
    (v.adjoint() * m * &v)[(0, 0)]
}

/// `$QNN_DATA_DIR`, or `data/` at the workspace root.
pub fn data_dir() -> PathBuf {
    std::env::var_os("QNN_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data"))
}

pub fn have_images(set: &str) -> bool {
    data_dir().join(set).join("train-images-idx3-ubyte").is_file()
}
