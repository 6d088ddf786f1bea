//! Lattices, Hamiltonian terms, product states, the built-in transverse-field
//! Ising chains, and the geometric constants that fix the convergence radius.

use std::f64::consts::E;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, pauli, CMatrix, C64};

/// Elementwise Hermiticity tolerance for term matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// D-dimensional open grid of sites, indexed in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    extents: Vec<usize>,
    n_sites: usize,
}

impl Lattice {
    pub fn new(extents: Vec<usize>) -> Result<Self> {
        if extents.is_empty() {
            return Err(Error::InvalidLattice("no extents given".into()));
        }
        if extents.contains(&0) {
            return Err(Error::InvalidLattice(format!("zero extent in {extents:?}")));
        }
        let n_sites = extents.iter().product();
        Ok(Self { extents, n_sites })
    }

    pub fn chain(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn dimension(&self) -> usize {
        self.extents.len()
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn coords(&self, site: usize) -> Vec<usize> {
        let mut rem = site;
        let mut out = vec![0; self.extents.len()];
        for (axis, &ext) in self.extents.iter().enumerate().rev() {
            out[axis] = rem % ext;
            rem /= ext;
        }
        out
    }

    pub fn manhattan(&self, a: usize, b: usize) -> usize {
        self.coords(a).iter().zip(self.coords(b)).map(|(&x, y)| x.abs_diff(y)).sum()
    }
}

/// A Hermitian operator on at most k sites (a hyperedge of the interaction
/// hypergraph). The matrix factors follow the order of `support`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub id: usize,
    pub support: Vec<usize>,
    pub matrix: CMatrix,
    pub color: usize,
}

/// Term data before ids are assigned by [`Hamiltonian::new`].
#[derive(Debug, Clone)]
pub struct TermSpec {
    pub support: Vec<usize>,
    pub matrix: CMatrix,
    pub color: usize,
}

impl TermSpec {
    pub fn new(support: Vec<usize>, matrix: CMatrix) -> Self {
        Self { support, matrix, color: 0 }
    }

    pub fn with_color(mut self, color: usize) -> Self {
        self.color = color;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    lattice: Lattice,
    local_dim: usize,
    terms: Vec<Term>,
    k: usize,
}

impl Hamiltonian {
    pub fn new(lattice: Lattice, local_dim: usize, specs: Vec<TermSpec>) -> Result<Self> {
        if local_dim < 2 {
            return Err(Error::InvalidHamiltonian(format!("local dimension {local_dim} < 2")));
        }
        let n = lattice.n_sites();
        let mut terms = Vec::with_capacity(specs.len());
        for (id, spec) in specs.into_iter().enumerate() {
            let bad = |reason: String| Error::InvalidTerm { id, reason };
            if spec.support.is_empty() {
                return Err(bad("empty support".into()));
            }
            if spec.support.windows(2).any(|w| w[0] >= w[1]) {
                return Err(bad(format!("support {:?} is not strictly increasing", spec.support)));
            }
            if let Some(&s) = spec.support.iter().find(|&&s| s >= n) {
                return Err(bad(format!("site {s} outside a lattice of {n} sites")));
            }
            let want = local_dim.pow(spec.support.len() as u32);
            if spec.matrix.dim() != want {
                return Err(bad(format!("matrix dimension {} != {want}", spec.matrix.dim())));
            }
            let defect = spec.matrix.hermiticity_defect();
            if defect > HERMITIAN_TOL {
                return Err(bad(format!("not Hermitian (defect {defect:e})")));
            }
            terms.push(Term { id, support: spec.support, matrix: spec.matrix, color: spec.color });
        }
        let k = terms.iter().map(|t| t.support.len()).max().unwrap_or(0);
        Ok(Self { lattice, local_dim, terms, k })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn n_sites(&self) -> usize {
        self.lattice.n_sites()
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn term(&self, id: usize) -> &Term {
        &self.terms[id]
    }

    /// Largest support size.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_colors(&self) -> usize {
        self.terms.iter().map(|t| t.color + 1).max().unwrap_or(1)
    }

    /// Concatenates Hamiltonians on a common lattice; the terms of `parts[l]`
    /// get color `l`.
    pub fn colored_union(parts: &[&Hamiltonian]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::InvalidHamiltonian("no Hamiltonians to combine".into()))?;
        let mut specs = Vec::new();
        for (color, h) in parts.iter().enumerate() {
            if h.lattice != first.lattice || h.local_dim != first.local_dim {
                return Err(Error::InvalidHamiltonian("colored parts must share lattice and local dimension".into()));
            }
            specs.extend(h.terms.iter().map(|t| TermSpec { support: t.support.clone(), matrix: t.matrix.clone(), color }));
        }
        Self::new(first.lattice.clone(), first.local_dim, specs)
    }

    /// Same terms with every color reset to 0.
    pub fn uncolored(&self) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.color = 0;
        }
        out
    }

    /// Inverse of [`Hamiltonian::colored_union`]: one uncolored Hamiltonian
    /// per color, possibly empty.
    pub fn split_colors(&self) -> Vec<Self> {
        (0..self.n_colors())
            .map(|c| {
                let terms: Vec<Term> = self.terms.iter().filter(|t| t.color == c).enumerate().map(|(id, t)| Term { id, color: 0, ..t.clone() }).collect();
                let k = terms.iter().map(|t| t.support.len()).max().unwrap_or(0);
                Self { lattice: self.lattice.clone(), local_dim: self.local_dim, terms, k }
            })
            .collect()
    }

    /// Same terms with colors reassigned by `color(term)`.
    pub fn recolored(&self, color: impl Fn(&Term) -> usize) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.color = color(t);
        }
        out
    }

    pub fn to_doc(&self) -> HamiltonianDoc {
        HamiltonianDoc {
            d: self.local_dim,
            extents: self.lattice.extents.clone(),
            terms: self.terms.iter().map(|t| TermDoc { support: t.support.clone(), matrix: MatrixDoc::from_matrix(&t.matrix), color: t.color }).collect(),
        }
    }

    pub fn from_doc(doc: &HamiltonianDoc) -> Result<Self> {
        let lattice = Lattice::new(doc.extents.clone())?;
        let specs = doc
            .terms
            .iter()
            .enumerate()
            .map(|(id, t)| {
                let matrix = t.matrix.to_matrix().map_err(|reason| Error::InvalidTerm { id, reason })?;
                Ok(TermSpec { support: t.support.clone(), matrix, color: t.color })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(lattice, doc.d, specs)
    }
}

/// JSON form of a Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianDoc {
    pub d: usize,
    pub extents: Vec<usize>,
    pub terms: Vec<TermDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDoc {
    pub support: Vec<usize>,
    pub matrix: MatrixDoc,
    #[serde(default)]
    pub color: usize,
}

/// Row-major real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDoc {
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Vec<Vec<f64>>,
}

impl MatrixDoc {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let n = m.dim();
        let rows = |f: fn(&C64) -> f64| (0..n).map(|i| (0..n).map(|j| f(&m.get(i, j))).collect()).collect();
        Self { re: rows(|z| z.re), im: rows(|z| z.im) }
    }

    pub fn to_matrix(&self) -> std::result::Result<CMatrix, String> {
        let n = self.re.len();
        if self.re.iter().any(|r| r.len() != n) {
            return Err("real part is not square".into());
        }
        if !self.im.is_empty() && (self.im.len() != n || self.im.iter().any(|r| r.len() != n)) {
            return Err("imaginary part does not match the real part".into());
        }
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let im = if self.im.is_empty() { 0.0 } else { self.im[i][j] };
                data.push(C64::new(self.re[i][j], im));
            }
        }
        CMatrix::from_row_major(data).ok_or_else(|| "empty matrix".to_string())
    }
}

/// Tensor product of single-site density matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductState {
    local_dim: usize,
    factors: Vec<CMatrix>,
}

impl ProductState {
    pub fn new(factors: Vec<CMatrix>) -> Result<Self> {
        let local_dim = factors.first().map(CMatrix::dim).ok_or_else(|| Error::InvalidState("no sites".into()))?;
        for (site, f) in factors.iter().enumerate() {
            let bad = |why: String| Error::InvalidState(format!("site {site}: {why}"));
            if f.dim() != local_dim {
                return Err(bad(format!("dimension {} != {local_dim}", f.dim())));
            }
            if !f.is_hermitian(1e-12) {
                return Err(bad("not Hermitian".into()));
            }
            let tr = f.trace();
            if (tr - C64::new(1.0, 0.0)).norm() > 1e-12 {
                return Err(bad(format!("trace {tr} != 1")));
            }
            let lowest = hermitian_eigen(f).values[0];
            if lowest < -1e-12 {
                return Err(bad(format!("negative eigenvalue {lowest:e}")));
            }
        }
        Ok(Self { local_dim, factors })
    }

    pub fn maximally_mixed(n_sites: usize, d: usize) -> Self {
        let f = CMatrix::identity(d).scale(C64::new(1.0 / d as f64, 0.0));
        Self { local_dim: d, factors: vec![f; n_sites] }
    }

    /// Pure product state from per-site kets; each ket is normalized.
    pub fn from_kets(kets: &[Vec<C64>]) -> Result<Self> {
        let factors = kets
            .iter()
            .map(|k| {
                let norm = k.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if norm == 0.0 {
                    return Err(Error::InvalidState("zero ket".into()));
                }
                let unit: Vec<C64> = k.iter().map(|z| z / norm).collect();
                Ok(CMatrix::outer(&unit))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(factors)
    }

    pub fn uniform_ket(n_sites: usize, ket: &[C64]) -> Result<Self> {
        Self::from_kets(&vec![ket.to_vec(); n_sites])
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn n_sites(&self) -> usize {
        self.factors.len()
    }

    pub fn factor(&self, site: usize) -> &CMatrix {
        &self.factors[site]
    }

    pub fn factors(&self) -> &[CMatrix] {
        &self.factors
    }

    pub fn is_maximally_mixed(&self) -> bool {
        let target = CMatrix::identity(self.local_dim).scale(C64::new(1.0 / self.local_dim as f64, 0.0));
        self.factors.iter().all(|f| *f == target)
    }

    pub fn check_compatible(&self, h: &Hamiltonian) -> Result<()> {
        if self.n_sites() != h.n_sites() || self.local_dim != h.local_dim() {
            return Err(Error::InvalidState(format!(
                "state on {} sites of dimension {} does not match the Hamiltonian ({} sites, d = {})",
                self.n_sites(),
                self.local_dim,
                h.n_sites(),
                h.local_dim()
            )));
        }
        Ok(())
    }
}

/// Decay exponent and the constants derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LongRangeConstants {
    pub alpha: f64,
    pub g: f64,
    pub u: f64,
    pub k: usize,
    pub beta_star: f64,
    /// `alpha > D`. Below it the radius is still computed but not backed by
    /// a thermodynamic-limit guarantee.
    pub weak_decay: bool,
}

impl LongRangeConstants {
    pub fn for_hamiltonian(h: &Hamiltonian, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("decay exponent {alpha} must be positive and finite")));
        }
        let u = compute_u(h.lattice(), alpha);
        let g = infer_g(h, alpha);
        let k = h.k().max(1);
        let beta_star = if g > 0.0 { beta_star(k, g, u) } else { f64::INFINITY };
        Ok(Self { alpha, g, u, k, beta_star, weak_decay: alpha > h.lattice().dimension() as f64 })
    }
}

/// `u = 2^α max_i Σ_j (1 + d_ij)^{-α}`, including `j = i`.
pub fn compute_u(lattice: &Lattice, alpha: f64) -> f64 {
    let n = lattice.n_sites();
    let coords: Vec<Vec<usize>> = (0..n).map(|i| lattice.coords(i)).collect();
    let dist = |a: &[usize], b: &[usize]| -> usize { a.iter().zip(b).map(|(x, y)| x.abs_diff(*y)).sum() };
    let best = (0..n).map(|i| (0..n).map(|j| (1.0 + dist(&coords[i], &coords[j]) as f64).powf(-alpha)).sum::<f64>()).fold(0.0, f64::max);
    2f64.powf(alpha) * best
}

/// Smallest g with `Σ_{Z ∋ i,i'} ‖h_Z‖ ≤ g / (1 + d_ii')^α` for all pairs,
/// the diagonal pair `i = i'` included so one-body terms are bounded too.
pub fn infer_g(h: &Hamiltonian, alpha: f64) -> f64 {
    let n = h.n_sites();
    let mut load = vec![0.0; n * n];
    for term in h.terms() {
        let norm = operator_norm(term);
        for (a, &i) in term.support.iter().enumerate() {
            for &j in &term.support[a..] {
                load[i * n + j] += norm;
            }
        }
    }
    let mut g: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            let s = load[i * n + j];
            if s > 0.0 {
                g = g.max(s * (1.0 + h.lattice().manhattan(i, j) as f64).powf(alpha));
            }
        }
    }
    g
}

/// Convergence radius `(8 e k g u)^{-1}`.
pub fn beta_star(k: usize, g: f64, u: f64) -> f64 {
    1.0 / (8.0 * E * k as f64 * g * u)
}

/// Spectral norm of a Hermitian term.
pub fn operator_norm(term: &Term) -> f64 {
    matrix_norm(&term.matrix)
}

pub(crate) fn matrix_norm(m: &CMatrix) -> f64 {
    let values = hermitian_eigen(m).values;
    values.first().map_or(0.0, |lo| lo.abs().max(values.last().unwrap().abs()))
}

/// `J Σ_{i<j} σx_i σx_j / |i-j|^α + h Σ_i σz_i` on an open chain.
pub fn build_lr_tfi(n: usize, alpha: f64, j: f64, h: f64) -> Result<Hamiltonian> {
    let xx = pauli::x().kron(&pauli::x());
    let mut specs = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            let c = j / ((b - a) as f64).powf(alpha);
            specs.push(TermSpec::new(vec![a, b], xx.scale(C64::new(c, 0.0))));
        }
    }
    specs.extend(field_terms(n, h));
    Hamiltonian::new(Lattice::chain(n)?, 2, specs)
}

/// Nearest-neighbour limit of [`build_lr_tfi`].
pub fn build_nn_tfi(n: usize, j: f64, h: f64) -> Result<Hamiltonian> {
    let xx = pauli::x().kron(&pauli::x()).scale(C64::new(j, 0.0));
    let mut specs: Vec<TermSpec> = (0..n.saturating_sub(1)).map(|a| TermSpec::new(vec![a, a + 1], xx.clone())).collect();
    specs.extend(field_terms(n, h));
    Hamiltonian::new(Lattice::chain(n)?, 2, specs)
}

/// `Σ_i σz_i` scaled by `h`, as a standalone Hamiltonian.
pub fn build_field(n: usize, h: f64) -> Result<Hamiltonian> {
    Hamiltonian::new(Lattice::chain(n)?, 2, field_terms(n, h).collect())
}

fn field_terms(n: usize, h: f64) -> impl Iterator<Item = TermSpec> {
    let z = pauli::z().scale(C64::new(h, 0.0));
    (0..n).map(move |a| TermSpec::new(vec![a], z.clone()))
}

/// Seeded random 2-local model on a chain: `pairs` random two-site terms and
/// `fields` random one-site terms with i.i.d. uniform entries in [-scale, scale].
pub fn random_two_body(n: usize, pairs: usize, fields: usize, scale: f64, seed: u64) -> Result<Hamiltonian> {
    if n < 2 {
        return Err(Error::InvalidHamiltonian("random two-body models need n >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut specs = Vec::with_capacity(pairs + fields);
    for _ in 0..pairs {
        let a = rng.gen_range(0..n);
        let mut b = rng.gen_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        let (a, b) = (a.min(b), a.max(b));
        specs.push(TermSpec::new(vec![a, b], random_hermitian(&mut rng, 4, scale)));
    }
    for _ in 0..fields {
        let a = rng.gen_range(0..n);
        specs.push(TermSpec::new(vec![a], random_hermitian(&mut rng, 2, scale)));
    }
    Hamiltonian::new(Lattice::chain(n)?, 2, specs)
}

pub fn random_hermitian<R: Rng>(rng: &mut R, dim: usize, scale: f64) -> CMatrix {
    let mut m = CMatrix::zeros(dim);
    for i in 0..dim {
        m.set(i, i, C64::new(rng.gen_range(-scale..=scale), 0.0));
        for j in (i + 1)..dim {
            let z = C64::new(rng.gen_range(-scale..=scale), rng.gen_range(-scale..=scale));
            m.set(i, j, z);
            m.set(j, i, z.conj());
        }
    }
    m
}
