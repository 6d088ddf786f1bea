//! Exact dense reference: full-register operators, their spectra, partition
//! functions, moments and cumulants, spectral measures, and time traces.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::linalg::{dot, hermitian_eigen, product_ket, CMatrix, PlacedOp, C64, ONE, ZERO};
use crate::model::{Hamiltonian, ProductState};

/// Default largest register dimension.
pub const DEFAULT_DENSE_CAP: usize = 4096;

/// Eigenvalues closer than this are merged in spectral measures.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// A full-register operator with a row-compressed copy for products.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    matrix: CMatrix,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

fn register_dim(d: usize, n: usize, cap: usize) -> Result<usize> {
    let needed = (d as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if needed > cap as u128 {
        return Err(Error::CapExceeded { needed: needed.min(usize::MAX as u128) as usize, cap });
    }
    Ok(needed as usize)
}

/// `Σ_Z h_Z ⊗ I`, site 0 most significant.
pub fn embed(h: &Hamiltonian, cap: usize) -> Result<DenseOperator> {
    let dim = register_dim(h.local_dim(), h.n_sites(), cap)?;
    let mut m = CMatrix::zeros(dim);
    for t in h.terms() {
        PlacedOp::new(t.matrix.clone(), &t.support, h.local_dim(), h.n_sites()).add_into(&mut m);
    }
    Ok(DenseOperator::new(m))
}

impl DenseOperator {
    pub fn new(matrix: CMatrix) -> Self {
        let dim = matrix.dim();
        let (mut row_start, mut cols, mut vals) = (Vec::with_capacity(dim + 1), Vec::new(), Vec::new());
        row_start.push(0);
        for i in 0..dim {
            for j in 0..dim {
                let v = matrix.get(i, j);
                if v != ZERO {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_start.push(cols.len());
        }
        Self { matrix, row_start, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        (0..self.dim()).map(|i| (self.row_start[i]..self.row_start[i + 1]).map(|k| self.vals[k] * v[self.cols[k]]).sum()).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim()).all(|i| (self.row_start[i]..self.row_start[i + 1]).all(|k| self.cols[k] == i))
    }

    /// Largest Gershgorin radius bound on `|E|`.
    pub fn gershgorin_bound(&self) -> f64 {
        (0..self.dim()).map(|i| (self.row_start[i]..self.row_start[i + 1]).map(|k| self.vals[k].norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Index sets of the connected blocks of the sparsity pattern.
    fn blocks(&self) -> Vec<Vec<usize>> {
        let dim = self.dim();
        let mut parent: Vec<usize> = (0..dim).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for i in 0..dim {
            for k in self.row_start[i]..self.row_start[i + 1] {
                let (a, b) = (find(&mut parent, i), find(&mut parent, self.cols[k]));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); dim];
        for i in 0..dim {
            let r = find(&mut parent, i);
            members[r].push(i);
        }
        members.into_iter().filter(|m| !m.is_empty()).collect()
    }

    /// Diagonalizes each connected block of the sparsity pattern separately.
    pub fn eigensystem(&self) -> Eigensystem {
        let mut blocks = Vec::new();
        let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(self.dim());
        for indices in self.blocks() {
            let b = blocks.len();
            let (values, vectors) = self.block_eigen(&indices);
            pairs.extend(values.iter().enumerate().map(|(c, &v)| (v, b, c)));
            blocks.push(Block { indices, vectors });
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        Eigensystem { dim: self.dim(), values: pairs.iter().map(|p| p.0).collect(), order: pairs.iter().map(|p| (p.1, p.2)).collect(), blocks }
    }

    /// Ascending eigenvalues without eigenvectors.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut values: Vec<f64> = self
            .blocks()
            .iter()
            .flat_map(|indices| {
                let n = indices.len();
                let entry = |r: usize, c: usize| self.matrix.get(indices[r], indices[c]);
                if (0..n).all(|r| (0..n).all(|c| entry(r, c).im == 0.0)) {
                    DMatrix::<f64>::from_fn(n, n, |r, c| 0.5 * (entry(r, c).re + entry(c, r).re)).symmetric_eigenvalues().iter().copied().collect::<Vec<_>>()
                } else {
                    DMatrix::<C64>::from_fn(n, n, |r, c| 0.5 * (entry(r, c) + entry(c, r).conj())).symmetric_eigenvalues().iter().copied().collect()
                }
            })
            .collect();
        values.sort_by(f64::total_cmp);
        values
    }

    fn block_eigen(&self, indices: &[usize]) -> (Vec<f64>, Vec<Vec<C64>>) {
        let n = indices.len();
        let entry = |r: usize, c: usize| self.matrix.get(indices[r], indices[c]);
        let real = (0..n).all(|r| (0..n).all(|c| entry(r, c).im == 0.0));
        if real {
            let m = DMatrix::<f64>::from_fn(n, n, |r, c| 0.5 * (entry(r, c).re + entry(c, r).re));
            let eig = SymmetricEigen::new(m);
            let vectors = (0..n).map(|k| eig.eigenvectors.column(k).iter().map(|&x| C64::new(x, 0.0)).collect()).collect();
            (eig.eigenvalues.iter().copied().collect(), vectors)
        } else {
            let m = DMatrix::<C64>::from_fn(n, n, |r, c| 0.5 * (entry(r, c) + entry(c, r).conj()));
            let eig = SymmetricEigen::new(m);
            let vectors = (0..n).map(|k| eig.eigenvectors.column(k).iter().copied().collect()).collect();
            (eig.eigenvalues.iter().copied().collect(), vectors)
        }
    }
}

#[derive(Debug, Clone)]
struct Block {
    indices: Vec<usize>,
    vectors: Vec<Vec<C64>>,
}

/// Eigenpairs in ascending order; vectors are stored per invariant block.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    dim: usize,
    values: Vec<f64>,
    order: Vec<(usize, usize)>,
    blocks: Vec<Block>,
}

impl Eigensystem {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Full-length `k`-th eigenvector.
    pub fn vector(&self, k: usize) -> Vec<C64> {
        let (b, c) = self.order[k];
        let mut v = vec![ZERO; self.dim];
        for (&i, &x) in self.blocks[b].indices.iter().zip(&self.blocks[b].vectors[c]) {
            v[i] = x;
        }
        v
    }

    /// `⟨v_k|ρ|v_k⟩` for each eigenvector.
    pub fn state_weights(&self, rho: &ProductState) -> Vec<f64> {
        if rho.is_maximally_mixed() {
            return vec![1.0 / self.dim as f64; self.dim];
        }
        let diagonal = rho.factors().iter().all(|f| {
            let d = f.dim();
            (0..d).all(|i| (0..d).all(|j| i == j || f.get(i, j) == ZERO))
        });
        if diagonal {
            let diag: Vec<Vec<f64>> = rho.factors().iter().map(|f| (0..f.dim()).map(|i| f.get(i, i).re).collect()).collect();
            let factors: Vec<Vec<C64>> = diag.iter().map(|d| d.iter().map(|&x| C64::new(x, 0.0)).collect()).collect();
            let refs: Vec<&[C64]> = factors.iter().map(Vec::as_slice).collect();
            let full: Vec<f64> = product_ket(&refs).iter().map(|z| z.re).collect();
            return self.map_vectors(|idx, v| idx.iter().zip(v).map(|(&i, x)| x.norm_sqr() * full[i]).sum());
        }
        let pure = rho.factors().iter().all(|f| (f.mul(f).trace().re - 1.0).abs() < 1e-12);
        if pure {
            let kets: Vec<Vec<C64>> = rho.factors().iter().map(dominant_ket).collect();
            let refs: Vec<&[C64]> = kets.iter().map(Vec::as_slice).collect();
            let psi = product_ket(&refs);
            return self.map_vectors(|idx, v| idx.iter().zip(v).map(|(&i, x)| x.conj() * psi[i]).sum::<C64>().norm_sqr());
        }
        let dense = dense_state(rho);
        self.map_vectors(|idx, v| {
            let mut acc = ZERO;
            for (a, &i) in idx.iter().enumerate() {
                for (b, &j) in idx.iter().enumerate() {
                    acc += v[a].conj() * dense.get(i, j) * v[b];
                }
            }
            acc.re
        })
    }

    /// `⟨v_k|ρ|v_k⟩` for a dense state.
    pub fn dense_weights(&self, rho: &CMatrix) -> Vec<f64> {
        self.map_vectors(|idx, v| {
            let mut acc = ZERO;
            for (a, &i) in idx.iter().enumerate() {
                for (b, &j) in idx.iter().enumerate() {
                    acc += v[a].conj() * rho.get(i, j) * v[b];
                }
            }
            acc.re
        })
    }

    fn map_vectors(&self, f: impl Fn(&[usize], &[C64]) -> f64) -> Vec<f64> {
        self.order.iter().map(|&(b, c)| f(&self.blocks[b].indices, &self.blocks[b].vectors[c])).collect()
    }

    /// `V diag(g(E)) V†`.
    pub fn function(&self, g: impl Fn(f64) -> C64) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim);
        for (k, &(b, c)) in self.order.iter().enumerate() {
            let gk = g(self.values[k]);
            let block = &self.blocks[b];
            let v = &block.vectors[c];
            for (a, &i) in block.indices.iter().enumerate() {
                let left = gk * v[a];
                if left == ZERO {
                    continue;
                }
                for (bb, &j) in block.indices.iter().enumerate() {
                    let cur = out.get(i, j);
                    out.set(i, j, cur + left * v[bb].conj());
                }
            }
        }
        out
    }
}

fn dominant_ket(f: &CMatrix) -> Vec<C64> {
    let eig = hermitian_eigen(f);
    eig.vector(eig.values.len() - 1)
}

/// `⊗_i ρ_i` as a dense matrix.
pub fn dense_state(rho: &ProductState) -> CMatrix {
    rho.factors().iter().fold(CMatrix::identity(1), |acc, f| acc.kron(f))
}

/// Spectrum of `H` weighted by `ρ`: `Z(β) = Σ_k q_k e^{-βE_k}`.
#[derive(Debug, Clone)]
pub struct ExactModel {
    energies: Vec<f64>,
    weights: Vec<f64>,
}

impl ExactModel {
    pub fn new(h: &Hamiltonian, rho: &ProductState, cap: usize) -> Result<Self> {
        rho.check_compatible(h)?;
        Ok(Self::from_operator(&embed(h, cap)?, rho))
    }

    /// Skips eigenvectors when `rho` is maximally mixed.
    pub fn from_operator(op: &DenseOperator, rho: &ProductState) -> Self {
        if rho.is_maximally_mixed() {
            let energies = op.eigenvalues();
            let q = 1.0 / energies.len() as f64;
            return Self { weights: vec![q; energies.len()], energies };
        }
        Self::from_eigensystem(&op.eigensystem(), rho)
    }

    pub fn from_eigensystem(eig: &Eigensystem, rho: &ProductState) -> Self {
        Self { energies: eig.values().to_vec(), weights: eig.state_weights(rho) }
    }

    pub fn from_parts(energies: Vec<f64>, weights: Vec<f64>) -> Self {
        Self { energies, weights }
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `(e^{shift} Z(β), shift)` with the shift chosen against overflow.
    fn scaled_z(&self, beta: C64) -> (C64, f64, f64) {
        let shift = self.energies.iter().zip(&self.weights).filter(|(_, &q)| q > 0.0).map(|(&e, _)| -beta.re * e).fold(f64::NEG_INFINITY, f64::max);
        let shift = if shift.is_finite() { shift } else { 0.0 };
        let (mut z, mut scale) = (ZERO, 0.0);
        for (&e, &q) in self.energies.iter().zip(&self.weights) {
            let term = (-beta * e - shift).exp() * q;
            z += term;
            scale += term.norm();
        }
        (z, shift, scale)
    }

    pub fn z(&self, beta: C64) -> C64 {
        let (z, shift, _) = self.scaled_z(beta);
        z * shift.exp()
    }

    /// `log Z(β)`, with the imaginary part continued along `s β`, `s ∈ [0, 1]`.
    pub fn log_z(&self, beta: C64) -> Result<C64> {
        let branch = |b: C64, z: C64, scale: f64| -> Result<()> {
            if z.norm() < 1e-14 * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::Branch { modulus: z.norm(), re: b.re, im: b.im });
            }
            Ok(())
        };
        let (target, shift, scale) = self.scaled_z(beta);
        branch(beta, target, scale)?;
        let mut phase = 0.0;
        if beta.im != 0.0 || target.re <= 0.0 {
            let (mut s, mut ds) = (0.0f64, 1.0 / 64.0);
            let mut prev = self.scaled_z(ZERO).0;
            while s < 1.0 {
                let next_s = (s + ds).min(1.0);
                let (z, _, sc) = self.scaled_z(beta * next_s);
                branch(beta * next_s, z, sc)?;
                let jump = (z / prev).arg();
                if jump.abs() >= FRAC_PI_2 {
                    ds *= 0.5;
                    if ds < 1e-12 {
                        return Err(Error::Branch { modulus: z.norm(), re: beta.re * next_s, im: beta.im * next_s });
                    }
                    continue;
                }
                phase += jump;
                prev = z;
                s = next_s;
                ds = (ds * 2.0).min(1.0 / 16.0);
            }
            // Align with the principal value at the end point, keeping the winding.
            let principal = target.arg();
            phase = principal + 2.0 * PI * ((phase - principal) / (2.0 * PI)).round();
        }
        Ok(C64::new(target.norm().ln() + shift, phase))
    }

    /// `Tr[e^{-iHt} ρ]` at `t = j dt`.
    pub fn time_trace(&self, dt: f64, n_t: usize) -> Vec<C64> {
        (0..n_t).map(|j| self.z(C64::new(0.0, j as f64 * dt))).collect()
    }

    pub fn measure(&self) -> SpectralMeasure {
        SpectralMeasure::from_weighted(&self.energies, &self.weights)
    }
}

/// `log Tr[e^{-βH} ρ]`.
pub fn exact_log_z(h: &Hamiltonian, rho: &ProductState, beta: C64, cap: usize) -> Result<C64> {
    ExactModel::new(h, rho, cap)?.log_z(beta)
}

/// Weighted spectrum with eigenvalues merged within [`DEGENERACY_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure {
    pub points: Vec<(f64, f64)>,
}

impl SpectralMeasure {
    pub fn from_weighted(values: &[f64], weights: &[f64]) -> Self {
        let mut pairs: Vec<(f64, f64)> = values.iter().copied().zip(weights.iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut points: Vec<(f64, f64)> = Vec::new();
        let mut group: Vec<(f64, f64)> = Vec::new();
        let flush = |group: &mut Vec<(f64, f64)>, points: &mut Vec<(f64, f64)>| {
            if group.is_empty() {
                return;
            }
            let mass: f64 = group.iter().map(|g| g.1.max(0.0)).sum();
            let mean = group.iter().map(|g| g.0).sum::<f64>() / group.len() as f64;
            if mass > 1e-14 {
                points.push((mean, mass));
            }
            group.clear();
        };
        for p in pairs {
            if group.last().is_some_and(|last| p.0 - last.0 > DEGENERACY_TOL) {
                flush(&mut group, &mut points);
            }
            group.push(p);
        }
        flush(&mut group, &mut points);
        Self { points }
    }

    pub fn total(&self) -> f64 {
        self.points.iter().map(|p| p.1).sum()
    }

    pub fn mean(&self) -> f64 {
        self.points.iter().map(|p| p.0 * p.1).sum::<f64>() / self.total()
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.points.iter().map(|p| (p.0 - mu).powi(2) * p.1).sum::<f64>() / self.total()
    }

    /// Right-continuous cumulative mass `P(a ≤ x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.points.iter().take_while(|p| p.0 <= x).map(|p| p.1).sum()
    }
}

/// Spectral measure of `A` under a product state.
pub fn spectral_measure(a: &DenseOperator, rho: &ProductState) -> SpectralMeasure {
    if rho.is_maximally_mixed() {
        let values = a.eigenvalues();
        return SpectralMeasure::from_weighted(&values, &vec![1.0 / values.len() as f64; values.len()]);
    }
    let eig = a.eigensystem();
    SpectralMeasure::from_weighted(eig.values(), &eig.state_weights(rho))
}

/// Spectral measure of `A` under a dense state.
pub fn spectral_measure_dense(a: &DenseOperator, rho: &CMatrix) -> SpectralMeasure {
    if a.is_diagonal() {
        let values: Vec<f64> = (0..a.dim()).map(|i| a.matrix().get(i, i).re).collect();
        let weights: Vec<f64> = (0..a.dim()).map(|i| rho.get(i, i).re).collect();
        return SpectralMeasure::from_weighted(&values, &weights);
    }
    let eig = a.eigensystem();
    SpectralMeasure::from_weighted(eig.values(), &eig.dense_weights(rho))
}

/// `e^{-βH} / Tr[e^{-βH}]`.
pub fn gibbs_state(eig: &Eigensystem, beta: f64) -> CMatrix {
    let shift = eig.values().iter().map(|&e| -beta * e).fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = eig.values().iter().map(|&e| (-beta * e - shift).exp()).sum();
    eig.function(|e| C64::new((-beta * e - shift).exp() / z, 0.0))
}

/// Diagonal of the Gibbs state in the computational basis.
pub fn gibbs_diagonal(eig: &Eigensystem, beta: f64) -> Vec<f64> {
    let shift = eig.values().iter().map(|&e| -beta * e).fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = eig.values().iter().map(|&e| (-beta * e - shift).exp()).sum();
    let mut diag = vec![0.0; eig.dim()];
    for (k, &(b, c)) in eig.order.iter().enumerate() {
        let w = (-beta * eig.values[k] - shift).exp() / z;
        let block = &eig.blocks[b];
        for (&i, x) in block.indices.iter().zip(&block.vectors[c]) {
            diag[i] += w * x.norm_sqr();
        }
    }
    diag
}

/// `μ_j = Tr[H^j ρ]` for `j = 0..=n`, by repeated application of `H`.
pub fn moments(h: &Hamiltonian, rho: &ProductState, n: usize, cap: usize) -> Result<Vec<f64>> {
    rho.check_compatible(h)?;
    let op = embed(h, cap)?;
    let sites: Vec<(Vec<f64>, Vec<Vec<C64>>)> = rho
        .factors()
        .iter()
        .map(|f| {
            let eig = hermitian_eigen(f);
            let keep: Vec<usize> = (0..f.dim()).filter(|&k| eig.values[k] > 1e-15).collect();
            (keep.iter().map(|&k| eig.values[k]).collect(), keep.iter().map(|&k| eig.vector(k)).collect())
        })
        .collect();
    let mut mu = vec![0.0; n + 1];
    let mut index = vec![0usize; sites.len()];
    loop {
        let p: f64 = index.iter().zip(&sites).map(|(&k, s)| s.0[k]).product();
        let kets: Vec<&[C64]> = index.iter().zip(&sites).map(|(&k, s)| s.1[k].as_slice()).collect();
        let e = product_ket(&kets);
        let mut powers = vec![e];
        for _ in 0..n.div_ceil(2) {
            let next = op.apply(powers.last().unwrap());
            powers.push(next);
        }
        for (j, m) in mu.iter_mut().enumerate() {
            let (a, b) = (j / 2, j - j / 2);
            *m += p * dot(&powers[a], &powers[b]).re;
        }
        let mut pos = 0;
        while pos < index.len() {
            index[pos] += 1;
            if index[pos] < sites[pos].0.len() {
                break;
            }
            index[pos] = 0;
            pos += 1;
        }
        if pos == index.len() {
            break;
        }
    }
    Ok(mu)
}

/// `κ_1..κ_n` from moments: `κ_n = μ_n − Σ_{m<n} C(n−1, m−1) κ_m μ_{n−m}`.
pub fn cumulants_from_moments(mu: &[f64]) -> Vec<f64> {
    let n = mu.len().saturating_sub(1);
    let mut kappa = vec![0.0; n + 1];
    for k in 1..=n {
        let mut v = mu[k];
        for m in 1..k {
            v -= binomial(k - 1, m - 1) * kappa[m] * mu[k - m];
        }
        kappa[k] = v;
    }
    kappa.remove(0);
    kappa
}

/// Cumulants `κ_1..κ_n` of `H` under `ρ`; `n ≤ 8`.
pub fn cumulants(h: &Hamiltonian, rho: &ProductState, n: usize, cap: usize) -> Result<Vec<f64>> {
    if n > 8 {
        return Err(Error::Domain(format!("cumulant order {n} exceeds 8")));
    }
    Ok(cumulants_from_moments(&moments(h, rho, n, cap)?))
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `log Tr[e^{λ_1 H_1} ⋯ e^{λ_K H_K} ρ]`, continued along `s λ`, `s ∈ [0, 1]`.
pub fn exact_log_z_general(parts: &[&Hamiltonian], lambdas: &[C64], rho: &ProductState, cap: usize) -> Result<C64> {
    if parts.len() != lambdas.len() || parts.is_empty() {
        return Err(Error::Domain(format!("{} couplings for {} Hamiltonians", lambdas.len(), parts.len())));
    }
    for h in parts {
        rho.check_compatible(h)?;
    }
    let eigs: Vec<Eigensystem> = parts.iter().map(|h| embed(h, cap).map(|op| op.eigensystem())).collect::<Result<_>>()?;
    let dense = dense_state(rho);
    let z_at = |s: f64| -> C64 {
        let mut product = CMatrix::identity(dense.dim());
        for (eig, &l) in eigs.iter().zip(lambdas) {
            product = product.mul(&eig.function(|e| (l * s * e).exp()));
        }
        product.mul(&dense).trace()
    };
    let target = z_at(1.0);
    if target.norm() < 1e-14 {
        return Err(Error::Branch { modulus: target.norm(), re: lambdas[0].re, im: lambdas[0].im });
    }
    let mut phase = 0.0;
    let (mut s, mut ds, mut prev) = (0.0f64, 1.0 / 16.0, ONE);
    while s < 1.0 {
        let next_s = (s + ds).min(1.0);
        let z = z_at(next_s);
        let jump = (z / prev).arg();
        if jump.abs() >= FRAC_PI_2 {
            ds *= 0.5;
            if ds < 1e-9 {
                return Err(Error::Branch { modulus: z.norm(), re: next_s, im: 0.0 });
            }
            continue;
        }
        phase += jump;
        prev = z;
        s = next_s;
    }
    let principal = target.arg();
    let phase = principal + 2.0 * PI * ((phase - principal) / (2.0 * PI)).round();
    Ok(C64::new(target.norm().ln(), phase))
}
