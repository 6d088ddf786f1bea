//! Small dense complex matrices and qudit-register helpers.
//!
//! Everything here works on the few-site subsystems touched by a polymer or a
//! single Hamiltonian term. Full-system dense work goes through `nalgebra` in
//! the oracle instead.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major data; `None` when the length is not a square.
    pub fn from_row_major(data: Vec<C64>) -> Option<Self> {
        let dim = (data.len() as f64).sqrt().round() as usize;
        (dim * dim == data.len()).then_some(Self { dim, data })
    }

    pub fn from_real(dim: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), dim * dim, "real data has wrong length");
        Self { dim, data: data.iter().map(|&x| C64::new(x, 0.0)).collect() }
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m.data[i * entries.len() + i] = e;
        }
        m
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) ket.
    pub fn outer(ket: &[C64]) -> Self {
        let dim = ket.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = ket[i] * ket[j].conj();
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&x| x * factor).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        let dim = n * m;
        let mut out = Self::zeros(dim);
        for i in 0..n {
            for j in 0..n {
                let a = self.data[i * n + j];
                for k in 0..m {
                    for l in 0..m {
                        out.data[(i * m + k) * dim + j * m + l] = a * other.data[k * m + l];
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim;
        (0..n).map(|i| self.data[i * n..(i + 1) * n].iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    /// Largest elementwise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and the
/// matching orthonormal eigenvectors (as columns of `vectors`).
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        let n = self.vectors.dim();
        (0..n).map(|i| self.vectors.get(i, k)).collect()
    }
}

/// Cyclic complex Jacobi diagonalization. Meant for the d^k-sized matrices of
/// single terms and single-site states, not full Hamiltonians.
pub fn hermitian_eigen(matrix: &CMatrix) -> HermitianEigen {
    let n = matrix.dim();
    let mut a = matrix.clone();
    // Symmetrize so round-off in the input cannot stall convergence.
    for i in 0..n {
        let d = a.get(i, i).re;
        a.set(i, i, C64::new(d, 0.0));
        for j in (i + 1)..n {
            let avg = (a.get(i, j) + a.get(j, i).conj()) * 0.5;
            a.set(i, j, avg);
            a.set(j, i, avg.conj());
        }
    }
    let mut v = CMatrix::identity(n);
    let scale = a.as_slice().iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let threshold = (f64::EPSILON * scale).powi(2);

    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).map(|(i, j)| a.get(i, j).norm_sqr()).sum();
        if off <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let phase = apq / mag; // e^{iφ}
                let theta = 0.5 * (2.0 * mag).atan2(a.get(q, q).re - a.get(p, p).re);
                let (s, c) = theta.sin_cos();
                let ph_conj = phase.conj();
                // U = D R with D = diag(1, e^{-iφ}) on (p, q).
                let upp = C64::new(c, 0.0);
                let upq = C64::new(s, 0.0);
                let uqp = ph_conj * (-s);
                let uqq = ph_conj * c;
                for row in 0..n {
                    let ap = a.get(row, p);
                    let aq = a.get(row, q);
                    a.set(row, p, ap * upp + aq * uqp);
                    a.set(row, q, ap * upq + aq * uqq);
                    let vp = v.get(row, p);
                    let vq = v.get(row, q);
                    v.set(row, p, vp * upp + vq * uqp);
                    v.set(row, q, vp * upq + vq * uqq);
                }
                for col in 0..n {
                    let bp = a.get(p, col);
                    let bq = a.get(q, col);
                    a.set(p, col, upp.conj() * bp + uqp.conj() * bq);
                    a.set(q, col, upq.conj() * bp + uqq.conj() * bq);
                }
                a.set(p, q, ZERO);
                a.set(q, p, ZERO);
                let (dp, dq) = (a.get(p, p).re, a.get(q, q).re);
                a.set(p, p, C64::new(dp, 0.0));
                a.set(q, q, C64::new(dq, 0.0));
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).re.total_cmp(&a.get(j, j).re));
    let values = order.iter().map(|&i| a.get(i, i).re).collect();
    let mut vectors = CMatrix::zeros(n);
    for (new, &old) in order.iter().enumerate() {
        for row in 0..n {
            vectors.set(row, new, v.get(row, old));
        }
    }
    HermitianEigen { values, vectors }
}

/// A local operator placed on some qudits of an `sites`-qudit register of
/// local dimension `d`. Qudit 0 is the most significant tensor factor.
#[derive(Debug, Clone)]
pub struct PlacedOp {
    matrix: CMatrix,
    offsets: Vec<usize>,
    bases: Vec<usize>,
}

impl PlacedOp {
    /// `positions` lists the register slots in the order of the matrix's
    /// tensor factors.
    pub fn new(matrix: CMatrix, positions: &[usize], d: usize, sites: usize) -> Self {
        let local = d.pow(positions.len() as u32);
        assert_eq!(matrix.dim(), local, "matrix does not match its placement");
        let stride = |p: usize| d.pow((sites - 1 - p) as u32);
        let offsets = (0..local)
            .map(|l| {
                let mut rem = l;
                let mut off = 0;
                for &p in positions.iter().rev() {
                    off += (rem % d) * stride(p);
                    rem /= d;
                }
                off
            })
            .collect();
        let total = d.pow(sites as u32);
        let bases = (0..total).filter(|&i| positions.iter().all(|&p| (i / stride(p)) % d == 0)).collect();
        Self { matrix, offsets, bases }
    }

    /// `out += M · input` on the full register.
    pub fn apply_add(&self, input: &[C64], out: &mut [C64]) {
        let local = self.offsets.len();
        let m = self.matrix.as_slice();
        for &base in &self.bases {
            for r in 0..local {
                let row = &m[r * local..(r + 1) * local];
                let mut acc = ZERO;
                for (c, &entry) in row.iter().enumerate() {
                    if entry != ZERO {
                        acc += entry * input[base + self.offsets[c]];
                    }
                }
                out[base + self.offsets[r]] += acc;
            }
        }
    }

    /// `out += M ⊗ I` as a dense matrix on the full register.
    pub fn add_into(&self, out: &mut CMatrix) {
        let local = self.offsets.len();
        let m = self.matrix.as_slice();
        for &base in &self.bases {
            for r in 0..local {
                for c in 0..local {
                    let entry = m[r * local + c];
                    if entry != ZERO {
                        let (i, j) = (base + self.offsets[r], base + self.offsets[c]);
                        out.data[i * out.dim + j] += entry;
                    }
                }
            }
        }
    }

    pub fn apply(&self, input: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; input.len()];
        self.apply_add(input, &mut out);
        out
    }
}

/// Tensor product of single-qudit kets, first factor most significant.
pub fn product_ket(factors: &[&[C64]]) -> Vec<C64> {
    factors.iter().fold(vec![ONE], |acc, f| {
        let mut out = Vec::with_capacity(acc.len() * f.len());
        for a in &acc {
            for b in f.iter() {
                out.push(a * b);
            }
        }
        out
    })
}

pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Pauli matrices and friends.
pub mod pauli {
    use super::{CMatrix, C64};

    pub fn identity() -> CMatrix {
        CMatrix::identity(2)
    }

    pub fn x() -> CMatrix {
        CMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0])
    }

    pub fn y() -> CMatrix {
        let i = C64::new(0.0, 1.0);
        CMatrix::from_row_major(vec![C64::new(0.0, 0.0), -i, i, C64::new(0.0, 0.0)]).unwrap()
    }

    pub fn z() -> CMatrix {
        CMatrix::from_real(2, &[1.0, 0.0, 0.0, -1.0])
    }
}
