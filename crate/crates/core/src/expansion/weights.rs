//! Polymer weights and the per-union cluster sums, with a cache keyed by the
//! structure of a polymer up to site relabeling.

use std::collections::HashMap;

use parking_lot::RwLock;

use crate::error::{Error, Result};
use crate::linalg::{dot, hermitian_eigen, product_ket, CMatrix, PlacedOp, C64, ONE, ZERO};
use crate::model::{Hamiltonian, ProductState};
use crate::polymers::{cluster_partitions, factorial, partition_graph, signed_count, Polymer, SubSpace};

use super::kahan::ComplexKahan;

/// Largest number of relabelings tried when canonicalizing a polymer.
const MAX_RELABELINGS: usize = 720;

/// Eigen-decomposition of one site's density matrix, zero weights dropped.
#[derive(Debug, Clone)]
pub(crate) struct SiteBasis {
    probs: Vec<f64>,
    kets: Vec<Vec<C64>>,
}

impl SiteBasis {
    fn new(factor: &CMatrix) -> Self {
        let eig = hermitian_eigen(factor);
        let (mut probs, mut kets) = (Vec::new(), Vec::new());
        for (k, &p) in eig.values.iter().enumerate() {
            if p > 1e-15 {
                probs.push(p);
                kets.push(eig.vector(k));
            }
        }
        Self { probs, kets }
    }
}

/// `(p_a, e_a)` for the product eigenbasis of the listed sites.
fn product_basis(sites: &[&SiteBasis]) -> Vec<(f64, Vec<C64>)> {
    let mut out = vec![(1.0, Vec::<usize>::new())];
    for site in sites {
        out = out
            .into_iter()
            .flat_map(|(p, idx)| {
                (0..site.probs.len()).map(move |k| {
                    let mut next = idx.clone();
                    next.push(k);
                    (p * site.probs[k], next)
                })
            })
            .collect();
    }
    out.into_iter()
        .map(|(p, idx)| {
            let kets: Vec<&[C64]> = idx.iter().zip(sites).map(|(&k, s)| s.kets[k].as_slice()).collect();
            (p, product_ket(&kets))
        })
        .collect()
}

struct LocalOp {
    op: PlacedOp,
    color: usize,
}

/// `Tr[S_1(r_1) ⋯ S_K(r_K) ρ]` for every sub-multiset `r`, where `S_l(r_l)`
/// sums the distinct orderings of the color-`l` operators.
fn subset_traces(ops: &[LocalOp], space: &SubSpace, basis: &[(f64, Vec<C64>)]) -> Vec<C64> {
    let items = ops.len();
    let lead: Vec<Vec<usize>> = (0..space.size)
        .map(|idx| {
            let present: Vec<usize> = (0..items).filter(|&z| space.digit(idx, z) > 0).collect();
            let low = present.iter().map(|&z| ops[z].color).min();
            present.into_iter().filter(|&z| Some(ops[z].color) == low).collect()
        })
        .collect();
    let mut tau = vec![ComplexKahan::new(); space.size];
    let mut w: Vec<Vec<C64>> = vec![Vec::new(); space.size];
    for (p, ket) in basis {
        let p = C64::new(*p, 0.0);
        w[0].clone_from(ket);
        tau[0].add(p * dot(ket, ket));
        for idx in 1..space.size {
            let mut acc = vec![ZERO; ket.len()];
            for &z in &lead[idx] {
                ops[z].op.apply_add(&w[idx - space.strides[z]], &mut acc);
            }
            tau[idx].add(p * dot(ket, &acc));
            w[idx] = acc;
        }
    }
    tau.iter().map(ComplexKahan::value).collect()
}

/// `Π_l t_l!` over the color profile of `idx`.
fn color_factorial(ops: &[LocalOp], space: &SubSpace, idx: usize) -> f64 {
    let mut per_color: Vec<usize> = Vec::new();
    for (z, op) in ops.iter().enumerate() {
        if per_color.len() <= op.color {
            per_color.resize(op.color + 1, 0);
        }
        per_color[op.color] += space.digit(idx, z);
    }
    per_color.into_iter().map(factorial).product()
}

fn check_cap(d: usize, sites: usize, cap: usize) -> Result<usize> {
    let needed = (d as u128).checked_pow(sites as u32).unwrap_or(u128::MAX);
    if needed > cap as u128 {
        return Err(Error::CapExceeded { needed: needed.min(usize::MAX as u128) as usize, cap });
    }
    Ok(needed as usize)
}

/// Default cap on the joint-support dimension: `d^12`.
pub fn default_support_cap(d: usize) -> usize {
    d.saturating_pow(12)
}

/// Direct evaluation on the raw term matrices of `h`.
struct Direct {
    ops: Vec<LocalOp>,
    space: SubSpace,
    basis: Vec<(f64, Vec<C64>)>,
}

impl Direct {
    fn new(h: &Hamiltonian, rho: &ProductState, items: &[(usize, usize)], colored: bool, cap: usize) -> Result<Self> {
        rho.check_compatible(h)?;
        let mut sites: Vec<usize> = items.iter().flat_map(|&(id, _)| h.term(id).support.iter().copied()).collect();
        sites.sort_unstable();
        sites.dedup();
        check_cap(h.local_dim(), sites.len(), cap)?;
        let local = |s: usize| sites.binary_search(&s).unwrap();
        let ops = items
            .iter()
            .map(|&(id, _)| {
                let t = h.term(id);
                let positions: Vec<usize> = t.support.iter().map(|&s| local(s)).collect();
                LocalOp { op: PlacedOp::new(t.matrix.clone(), &positions, h.local_dim(), sites.len()), color: if colored { t.color } else { 0 } }
            })
            .collect();
        let bases: Vec<SiteBasis> = sites.iter().map(|&s| SiteBasis::new(rho.factor(s))).collect();
        let basis = product_basis(&bases.iter().collect::<Vec<_>>());
        Ok(Self { ops, space: SubSpace::new(items.iter().map(|e| e.1).collect()), basis })
    }
}

/// `Tr[h_{Z_1} ⋯ h_{Z_n} ρ]`, evaluated on the joint support only.
pub fn trace_product(h: &Hamiltonian, seq: &[usize], rho: &ProductState, cap: usize) -> Result<C64> {
    if seq.is_empty() {
        return Err(Error::Domain("empty operator sequence".into()));
    }
    if let Some(&bad) = seq.iter().find(|&&id| id >= h.terms().len()) {
        return Err(Error::Domain(format!("unknown term id {bad}")));
    }
    let items: Vec<(usize, usize)> = seq.iter().map(|&id| (id, 1)).collect();
    let direct = Direct::new(h, rho, &items, false, cap)?;
    let mut total = ComplexKahan::new();
    for (p, ket) in &direct.basis {
        let mut v = ket.clone();
        for op in direct.ops.iter().rev() {
            v = op.op.apply(&v);
        }
        total.add(C64::new(*p, 0.0) * dot(ket, &v));
    }
    Ok(total.value())
}

/// `(1/‖γ‖!) Σ_{distinct orderings} Tr[Π h ρ]`, so that `w_γ = (−β)^{‖γ‖} ω_γ`.
pub fn polymer_amplitude(h: &Hamiltonian, polymer: &Polymer, rho: &ProductState, cap: usize) -> Result<C64> {
    let direct = Direct::new(h, rho, polymer.entries(), false, cap)?;
    let tau = subset_traces(&direct.ops, &direct.space, &direct.basis);
    Ok(tau[direct.space.full()] / factorial(polymer.norm()))
}

/// `w_γ = (−β)^{‖γ‖}/‖γ‖! · Σ_{distinct orderings} Tr[Π h ρ]`.
pub fn polymer_weight(h: &Hamiltonian, polymer: &Polymer, beta: C64, rho: &ProductState, cap: usize) -> Result<C64> {
    Ok((-beta).powu(polymer.norm() as u32) * polymer_amplitude(h, polymer, rho, cap)?)
}

/// `Π_l λ_l^{t_l}/t_l! · Tr[S_1 ⋯ S_K ρ]` with each block `S_l` summing the
/// distinct orderings of the color-`l` terms and blocks in increasing color.
pub fn colored_polymer_weight(h: &Hamiltonian, polymer: &Polymer, lambdas: &[C64], rho: &ProductState, cap: usize) -> Result<C64> {
    let mut profile = vec![0usize; lambdas.len()];
    for &(id, c) in polymer.entries() {
        let color = h.term(id).color;
        if color >= lambdas.len() {
            return Err(Error::Domain(format!("term {id} has color {color} but only {} couplings given", lambdas.len())));
        }
        profile[color] += c;
    }
    let direct = Direct::new(h, rho, polymer.entries(), true, cap)?;
    let tau = subset_traces(&direct.ops, &direct.space, &direct.basis);
    let full = direct.space.full();
    let scale: C64 = profile.iter().zip(lambdas).map(|(&t, l)| l.powu(t as u32)).product();
    Ok(scale * tau[full] / color_factorial(&direct.ops, &direct.space, full))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct KeyTerm {
    shape: u32,
    color: u32,
    count: u32,
    positions: Vec<u8>,
}

/// A polymer up to relabeling of its sites: site classes of the state plus
/// the placed, normalized term shapes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct StructureKey {
    classes: Vec<u32>,
    terms: Vec<KeyTerm>,
}

/// Interned per-term and per-site data, and the structure caches.
pub(crate) struct WeightEngine {
    d: usize,
    cap: usize,
    ursell_cap: usize,
    shapes: Vec<CMatrix>,
    term_shape: Vec<u32>,
    term_scale: Vec<C64>,
    term_color: Vec<u32>,
    term_support: Vec<Vec<usize>>,
    bases: Vec<SiteBasis>,
    site_class: Vec<u32>,
    cluster_cache: RwLock<HashMap<StructureKey, C64>>,
    amplitude_cache: RwLock<HashMap<StructureKey, C64>>,
}

fn bits_key(m: &CMatrix) -> Vec<u64> {
    m.as_slice().iter().flat_map(|z| [z.re.to_bits(), z.im.to_bits()]).collect()
}

impl WeightEngine {
    /// `colored` keeps term colors; otherwise every term is color 0.
    pub(crate) fn new(h: &Hamiltonian, rho: &ProductState, colored: bool, cap: usize, ursell_cap: usize) -> Result<Self> {
        rho.check_compatible(h)?;
        let mut shape_ids: HashMap<Vec<u64>, u32> = HashMap::new();
        let mut shapes = Vec::new();
        let (mut term_shape, mut term_scale) = (Vec::new(), Vec::new());
        for t in h.terms() {
            let max = t.matrix.max_abs();
            let scale = if max == 0.0 { ONE } else { *t.matrix.as_slice().iter().find(|z| z.norm() == max).unwrap() };
            let shape = if max == 0.0 { t.matrix.clone() } else { t.matrix.scale(ONE / scale) };
            let next = shapes.len() as u32;
            let id = *shape_ids.entry(bits_key(&shape)).or_insert_with(|| {
                shapes.push(shape);
                next
            });
            term_shape.push(id);
            term_scale.push(if max == 0.0 { ZERO } else { scale });
        }
        let mut class_ids: HashMap<Vec<u64>, u32> = HashMap::new();
        let mut bases = Vec::new();
        let site_class = rho
            .factors()
            .iter()
            .map(|f| {
                let next = bases.len() as u32;
                *class_ids.entry(bits_key(f)).or_insert_with(|| {
                    bases.push(SiteBasis::new(f));
                    next
                })
            })
            .collect();
        Ok(Self {
            d: h.local_dim(),
            cap,
            ursell_cap,
            shapes,
            term_shape,
            term_scale,
            term_color: h.terms().iter().map(|t| if colored { t.color as u32 } else { 0 }).collect(),
            term_support: h.terms().iter().map(|t| t.support.clone()).collect(),
            bases,
            site_class,
            cluster_cache: RwLock::new(HashMap::new()),
            amplitude_cache: RwLock::new(HashMap::new()),
        })
    }

    fn scale_of(&self, polymer: &Polymer) -> C64 {
        polymer.entries().iter().map(|&(id, c)| self.term_scale[id].powu(c as u32)).product()
    }

    fn canonical_key(&self, polymer: &Polymer) -> Result<StructureKey> {
        let sites = polymer.support();
        check_cap(self.d, sites.len(), self.cap)?;
        let local = |s: usize| sites.binary_search(&s).unwrap();
        let raw: Vec<(u32, u32, u32, Vec<usize>)> = polymer
            .entries()
            .iter()
            .map(|&(id, c)| {
                let pos = self.term_support[id].iter().map(|&s| local(s)).collect();
                (self.term_shape[id], self.term_color[id], c as u32, pos)
            })
            .collect();

        type Invariant = (u32, Vec<(u32, u32, u32, usize, usize)>);
        let invariants: Vec<Invariant> = (0..sites.len())
            .map(|v| {
                let mut inc: Vec<(u32, u32, u32, usize, usize)> = raw
                    .iter()
                    .filter_map(|(shape, color, count, pos)| pos.iter().position(|&p| p == v).map(|slot| (*shape, *color, *count, slot, pos.len())))
                    .collect();
                inc.sort_unstable();
                (self.site_class[sites[v]], inc)
            })
            .collect();
        let mut order: Vec<usize> = (0..sites.len()).collect();
        order.sort_by(|&a, &b| invariants[a].cmp(&invariants[b]).then(a.cmp(&b)));
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for &v in &order {
            match groups.last_mut() {
                Some(g) if invariants[g[0]] == invariants[v] => g.push(v),
                _ => groups.push(vec![v]),
            }
        }
        let classes: Vec<u32> = order.iter().map(|&v| invariants[v].0).collect();

        let build = |order: &[usize]| -> Vec<KeyTerm> {
            let mut label = vec![0u8; order.len()];
            for (new, &old) in order.iter().enumerate() {
                label[old] = new as u8;
            }
            let mut terms: Vec<KeyTerm> = raw
                .iter()
                .map(|(shape, color, count, pos)| KeyTerm { shape: *shape, color: *color, count: *count, positions: pos.iter().map(|&p| label[p]).collect() })
                .collect();
            terms.sort_unstable();
            terms
        };

        let relabelings = groups.iter().try_fold(1usize, |acc, g| {
            let f = (1..=g.len()).try_fold(1usize, |a, i| a.checked_mul(i))?;
            acc.checked_mul(f)
        });
        let terms = match relabelings {
            Some(n) if n > 1 && n <= MAX_RELABELINGS => {
                let mut best: Option<Vec<KeyTerm>> = None;
                let group_perms: Vec<Vec<Vec<usize>>> = groups.iter().map(|g| permutations(g)).collect();
                let mut odometer = vec![0usize; groups.len()];
                loop {
                    let candidate: Vec<usize> = odometer.iter().enumerate().flat_map(|(g, &k)| group_perms[g][k].iter().copied()).collect();
                    let terms = build(&candidate);
                    if best.as_ref().is_none_or(|b| terms < *b) {
                        best = Some(terms);
                    }
                    let mut g = 0;
                    while g < odometer.len() {
                        odometer[g] += 1;
                        if odometer[g] < group_perms[g].len() {
                            break;
                        }
                        odometer[g] = 0;
                        g += 1;
                    }
                    if g == odometer.len() {
                        break;
                    }
                }
                best.unwrap()
            }
            _ => build(&order),
        };
        Ok(StructureKey { classes, terms })
    }

    fn traces_for_key(&self, key: &StructureKey) -> (Vec<LocalOp>, SubSpace, Vec<C64>) {
        let s = key.classes.len();
        let ops: Vec<LocalOp> = key
            .terms
            .iter()
            .map(|t| {
                let positions: Vec<usize> = t.positions.iter().map(|&p| p as usize).collect();
                LocalOp { op: PlacedOp::new(self.shapes[t.shape as usize].clone(), &positions, self.d, s), color: t.color as usize }
            })
            .collect();
        let space = SubSpace::new(key.terms.iter().map(|t| t.count as usize).collect());
        let bases: Vec<&SiteBasis> = key.classes.iter().map(|&c| &self.bases[c as usize]).collect();
        let tau = subset_traces(&ops, &space, &product_basis(&bases));
        (ops, space, tau)
    }

    /// `Σ_{clusters with union U} φ · n!/Πc! · Π ω` for a normalized structure.
    fn cluster_sum_for_key(&self, key: &StructureKey) -> Result<C64> {
        let (ops, space, tau) = self.traces_for_key(key);
        let omega: Vec<C64> = (0..space.size).map(|idx| tau[idx] / color_factorial(&ops, &space, idx)).collect();
        let overlap = |a: usize, b: usize| key.terms[a].positions.iter().any(|p| key.terms[b].positions.contains(p));
        let mut total = ComplexKahan::new();
        for partition in cluster_partitions(&space, &overlap) {
            let graph = partition_graph(&space, &partition, &overlap);
            let signed = signed_count(&graph, self.ursell_cap)?;
            let denom: f64 = partition.iter().map(|&(_, c)| factorial(c)).product();
            let product: C64 = partition.iter().map(|&(p, c)| omega[p].powu(c as u32)).product();
            total.add(product * (signed as f64 / denom));
        }
        Ok(total.value())
    }

    /// Contribution of every cluster whose polymers merge into `union`.
    pub(crate) fn union_contribution(&self, union: &Polymer) -> Result<C64> {
        let scale = self.scale_of(union);
        if scale == ZERO {
            return Ok(ZERO);
        }
        let key = self.canonical_key(union)?;
        if let Some(&v) = self.cluster_cache.read().get(&key) {
            return Ok(v * scale);
        }
        let v = self.cluster_sum_for_key(&key)?;
        self.cluster_cache.write().insert(key, v);
        Ok(v * scale)
    }

    /// `ω_γ` (weight without the coupling powers), via the structure cache.
    pub(crate) fn amplitude(&self, polymer: &Polymer) -> Result<C64> {
        let scale = self.scale_of(polymer);
        if scale == ZERO {
            return Ok(ZERO);
        }
        let key = self.canonical_key(polymer)?;
        if let Some(&v) = self.amplitude_cache.read().get(&key) {
            return Ok(v * scale);
        }
        let (ops, space, tau) = self.traces_for_key(&key);
        let full = space.full();
        let v = tau[full] / color_factorial(&ops, &space, full);
        self.amplitude_cache.write().insert(key, v);
        Ok(v * scale)
    }

    /// Number of distinct structures evaluated so far.
    #[cfg(test)]
    pub(crate) fn structures(&self) -> usize {
        self.cluster_cache.read().len() + self.amplitude_cache.read().len()
    }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}
