//! Truncated cluster expansion of `log Tr[e^{-βH} ρ]` and its multi-coupling
//! generalization, with a-priori error certificates.
//!
//! Coefficients are computed once per truncation order and do not depend on
//! the coupling; evaluating at a given β is a polynomial sum. Contributions
//! are accumulated in canonical polymer order with compensated summation, in
//! fixed-size chunks, so the result is bit-identical for any worker count.

mod kahan;
mod weights;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};
use crate::model::{Hamiltonian, LongRangeConstants, ProductState};
use crate::polymers::{enumerate_connected_multisets, Polymer, DEFAULT_URSELL_CAP, URSELL_HARD_LIMIT};

pub use kahan::{ComplexKahan, KahanSum};
pub use weights::{colored_polymer_weight, default_support_cap, polymer_amplitude, polymer_weight, trace_product};

use weights::WeightEngine;

/// Polymers handed to the worker pool at a time.
const CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionConfig {
    /// Worker threads; 0 picks the available parallelism.
    pub workers: usize,
    /// Largest joint-support dimension; `None` means `d^12`.
    pub support_cap: Option<usize>,
    pub ursell_cap: usize,
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        Self { workers: 0, support_cap: None, ursell_cap: DEFAULT_URSELL_CAP }
    }
}

impl ExpansionConfig {
    pub fn with_workers(workers: usize) -> Self {
        Self { workers, ..Self::default() }
    }

    fn cap(&self, d: usize) -> usize {
        self.support_cap.unwrap_or_else(|| default_support_cap(d))
    }
}

/// Runs `f` over the polymers in chunks on a pool and feeds the results to
/// `sink` in enumeration order.
fn ordered_map<T, F, S>(cfg: &ExpansionConfig, polymers: impl Iterator<Item = Polymer>, f: F, mut sink: S) -> Result<()>
where
    T: Send,
    F: Fn(&Polymer) -> Result<T> + Sync,
    S: FnMut(&Polymer, T),
{
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build().map_err(|e| Error::Domain(format!("cannot start worker pool: {e}")))?;
    let mut polymers = polymers.peekable();
    let mut chunk = Vec::with_capacity(CHUNK);
    while polymers.peek().is_some() {
        chunk.clear();
        chunk.extend(polymers.by_ref().take(CHUNK));
        let results: Vec<Result<T>> = pool.install(|| chunk.par_iter().map(&f).collect());
        for (p, r) in chunk.iter().zip(results) {
            sink(p, r?);
        }
    }
    Ok(())
}

fn check_order(m: usize, cfg: &ExpansionConfig) -> Result<()> {
    if m == 0 {
        return Err(Error::Domain("truncation order must be at least 1".into()));
    }
    let cap = cfg.ursell_cap.min(URSELL_HARD_LIMIT);
    if m > cap {
        return Err(Error::UrsellCap { vertices: m, cap });
    }
    Ok(())
}

/// Sums cluster contributions by the color profile of their union.
fn profile_sums(
    h: &Hamiltonian,
    rho: &ProductState,
    max_norm: usize,
    colors: usize,
    colored: bool,
    cfg: &ExpansionConfig,
) -> Result<(BTreeMap<Vec<usize>, C64>, usize)> {
    check_order(max_norm, cfg)?;
    let engine = WeightEngine::new(h, rho, colored, cfg.cap(h.local_dim()), cfg.ursell_cap)?;
    let mut sums: BTreeMap<Vec<usize>, ComplexKahan> = BTreeMap::new();
    let mut unions = 0usize;
    ordered_map(
        cfg,
        enumerate_connected_multisets(h, max_norm, None),
        |u| engine.union_contribution(u),
        |u, value| {
            let mut profile = vec![0usize; colors];
            for &(id, c) in u.entries() {
                profile[if colored { h.term(id).color } else { 0 }] += c;
            }
            sums.entry(profile).or_default().add(value);
            unions += 1;
        },
    )?;
    Ok((sums.into_iter().map(|(k, v)| (k, v.value())).collect(), unions))
}

/// Per-order coefficients `c_n` of `log Z_ρ(β) ≈ Σ_{n ≤ m} c_n β^n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterSeries {
    pub n_sites: usize,
    pub order: usize,
    /// `coefficients[n]` is `c_n`; `coefficients[0] = 0`.
    pub coefficients: Vec<C64>,
    /// Number of union polymers visited.
    pub polymers: usize,
}

impl ClusterSeries {
    pub fn coefficient(&self, n: usize) -> C64 {
        self.coefficients.get(n).copied().unwrap_or(ZERO)
    }

    /// `T_m(β) = Σ_{n=1}^m c_n β^n`.
    pub fn evaluate(&self, beta: C64) -> C64 {
        let mut power = C64::new(1.0, 0.0);
        let mut total = ComplexKahan::new();
        for c in &self.coefficients[1..] {
            power *= beta;
            total.add(c * power);
        }
        total.value()
    }
}

/// `T_m` coefficients for a single coupling. Term colors are ignored.
pub fn truncated_log_z(h: &Hamiltonian, rho: &ProductState, m: usize, cfg: &ExpansionConfig) -> Result<ClusterSeries> {
    let (sums, polymers) = profile_sums(h, rho, m, 1, false, cfg)?;
    let mut coefficients = vec![ZERO; m + 1];
    for (profile, value) in sums {
        let n = profile[0];
        coefficients[n] = if n % 2 == 0 { value } else { -value };
    }
    Ok(ClusterSeries { n_sites: h.n_sites(), order: m, coefficients, polymers })
}

/// Error certificate attached to an evaluated series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certificate {
    pub beta_star: f64,
    /// `|β|/β*`, or `K Σ|λ_l| / β*` for several couplings.
    pub ratio: f64,
    /// `N · ratio^m`.
    pub error_bound: f64,
    /// Inside the convergence radius and with `α > D`.
    pub certified: bool,
}

impl Certificate {
    pub fn single(n_sites: usize, beta: C64, m: usize, constants: &LongRangeConstants) -> Self {
        let ratio = beta.norm() / constants.beta_star;
        Self {
            beta_star: constants.beta_star,
            ratio,
            error_bound: n_sites as f64 * ratio.powi(m as i32),
            certified: beta.norm() < constants.beta_star && constants.weak_decay,
        }
    }

    pub fn general(n_sites: usize, lambdas: &[C64], order: usize, constants: &LongRangeConstants) -> Self {
        let k = lambdas.len() as f64;
        let total: f64 = lambdas.iter().map(|l| l.norm()).sum();
        let ratio = k * total / constants.beta_star;
        Self {
            beta_star: constants.beta_star,
            ratio,
            error_bound: n_sites as f64 * ratio.powi(order as i32),
            certified: total <= constants.beta_star / k && constants.weak_decay,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub beta: C64,
    pub value: C64,
    pub series: ClusterSeries,
    pub constants: LongRangeConstants,
    pub certificate: Certificate,
}

/// `T_m(β)` with its certificate; `alpha` sets the decay exponent used for
/// the convergence radius.
pub fn estimate_log_z(h: &Hamiltonian, rho: &ProductState, beta: C64, m: usize, alpha: f64, cfg: &ExpansionConfig) -> Result<Estimate> {
    let constants = LongRangeConstants::for_hamiltonian(h, alpha)?;
    let series = truncated_log_z(h, rho, m, cfg)?;
    Ok(Estimate { beta, value: series.evaluate(beta), certificate: Certificate::single(h.n_sites(), beta, m, &constants), series, constants })
}

/// Coefficients of `log Tr[e^{λ_1 H_1} ⋯ e^{λ_K H_K} ρ]` indexed by the
/// multi-degree `(t_1, …, t_K)`, truncated at total degree `order`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralSeries {
    pub n_sites: usize,
    pub n_colors: usize,
    pub order: usize,
    pub coefficients: BTreeMap<Vec<usize>, C64>,
    pub polymers: usize,
}

impl GeneralSeries {
    pub fn evaluate(&self, lambdas: &[C64]) -> Result<C64> {
        if lambdas.len() != self.n_colors {
            return Err(Error::Domain(format!("{} couplings for {} colors", lambdas.len(), self.n_colors)));
        }
        let mut total = ComplexKahan::new();
        for (degree, c) in &self.coefficients {
            let monomial: C64 = degree.iter().zip(lambdas).map(|(&t, l)| l.powu(t as u32)).product();
            total.add(c * monomial);
        }
        Ok(total.value())
    }

    /// Sum of the coefficients of total degree `n`, weighted by `lambdas`.
    pub fn degree_part(&self, n: usize, lambdas: &[C64]) -> C64 {
        self.coefficients
            .iter()
            .filter(|(d, _)| d.iter().sum::<usize>() == n)
            .map(|(d, c)| c * d.iter().zip(lambdas).map(|(&t, l)| l.powu(t as u32)).product::<C64>())
            .collect::<ComplexKahan>()
            .value()
    }
}

/// Generalized expansion for `parts[l]` carrying coupling `λ_l`. The
/// truncation keeps every multi-degree with `Σ t_l ≤ Σ orders[l]`.
pub fn truncated_log_z_general(parts: &[&Hamiltonian], rho: &ProductState, orders: &[usize], cfg: &ExpansionConfig) -> Result<GeneralSeries> {
    if orders.len() != parts.len() {
        return Err(Error::Domain(format!("{} orders for {} Hamiltonians", orders.len(), parts.len())));
    }
    let h = Hamiltonian::colored_union(parts)?;
    let order: usize = orders.iter().sum();
    let (coefficients, polymers) = profile_sums(&h, rho, order, parts.len(), true, cfg)?;
    Ok(GeneralSeries { n_sites: h.n_sites(), n_colors: parts.len(), order, coefficients, polymers })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralEstimate {
    pub lambdas: Vec<C64>,
    pub value: C64,
    pub series: GeneralSeries,
    pub constants: LongRangeConstants,
    pub certificate: Certificate,
}

/// Constants for several Hamiltonians are those of their union.
pub fn estimate_log_z_general(
    parts: &[&Hamiltonian],
    lambdas: &[C64],
    rho: &ProductState,
    orders: &[usize],
    alpha: f64,
    cfg: &ExpansionConfig,
) -> Result<GeneralEstimate> {
    if lambdas.len() != parts.len() {
        return Err(Error::Domain(format!("{} couplings for {} Hamiltonians", lambdas.len(), parts.len())));
    }
    let union = Hamiltonian::colored_union(parts)?.uncolored();
    let constants = LongRangeConstants::for_hamiltonian(&union, alpha)?;
    let series = truncated_log_z_general(parts, rho, orders, cfg)?;
    Ok(GeneralEstimate {
        lambdas: lambdas.to_vec(),
        value: series.evaluate(lambdas)?,
        certificate: Certificate::general(union.n_sites(), lambdas, series.order, &constants),
        series,
        constants,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoschmidtEstimate {
    pub t: f64,
    /// `T_m(it)`, an estimate of `log ⟨Ψ|e^{-iHt}|Ψ⟩`.
    pub log_echo: C64,
    /// `log_echo / N`.
    pub rate: C64,
    pub certificate: Certificate,
}

/// Echo of a pure product state, from the series at `β = it`.
pub fn loschmidt_series(h: &Hamiltonian, psi: &ProductState, t: f64, m: usize, alpha: f64, cfg: &ExpansionConfig) -> Result<LoschmidtEstimate> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time {t} must be nonnegative")));
    }
    for (site, f) in psi.factors().iter().enumerate() {
        let purity = f.mul(f).trace().re;
        if (purity - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("site {site} is not pure (purity {purity})")));
        }
    }
    let est = estimate_log_z(h, psi, C64::new(0.0, t), m, alpha, cfg)?;
    Ok(LoschmidtEstimate { t, log_echo: est.value, rate: est.value / h.n_sites() as f64, certificate: est.certificate })
}

/// Truncated convergence check: per anchor term `Z*`,
/// `Σ_{γ ≁ Z*, ‖γ‖ ≤ m} |w_γ(β)| e^{|γ|}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KpReport {
    pub beta: f64,
    pub order: usize,
    pub sums: Vec<f64>,
    /// Right-hand side `a({Z*}) = 1` of the single-term criterion.
    pub threshold: f64,
    pub slack: f64,
    pub holds: bool,
}

impl KpReport {
    pub fn max(&self) -> f64 {
        self.sums.iter().copied().fold(0.0, f64::max)
    }
}

pub fn kp_check(h: &Hamiltonian, rho: &ProductState, beta: f64, m: usize, cfg: &ExpansionConfig) -> Result<KpReport> {
    check_order(m, cfg)?;
    let engine = WeightEngine::new(h, rho, false, cfg.cap(h.local_dim()), cfg.ursell_cap)?;
    let mut sums = vec![KahanSum::new(); h.terms().len()];
    ordered_map(
        cfg,
        enumerate_connected_multisets(h, m, None),
        |p| engine.amplitude(p).map(|a| a.norm() * beta.abs().powi(p.norm() as i32) * (p.distinct() as f64).exp()),
        |p, value| {
            for (z, t) in h.terms().iter().enumerate() {
                if t.support.iter().any(|s| p.support().binary_search(s).is_ok()) {
                    sums[z].add(value);
                }
            }
        },
    )?;
    let sums: Vec<f64> = sums.iter().map(KahanSum::value).collect();
    let (threshold, slack) = (1.0, 1e-9);
    let holds = sums.iter().all(|&s| s <= threshold * (1.0 + slack));
    Ok(KpReport { beta, order: m, sums, threshold, slack, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;
    use crate::model::{build_lr_tfi, Lattice, TermSpec};

    fn single_spin(field: f64) -> Hamiltonian {
        Hamiltonian::new(Lattice::chain(1).unwrap(), 2, vec![TermSpec::new(vec![0], pauli::z().scale(C64::new(field, 0.0)))]).unwrap()
    }

    #[test]
    fn single_spin_log_cosh_coefficients() {
        let h = 0.8;
        let series = truncated_log_z(&single_spin(h), &ProductState::maximally_mixed(1, 2), 6, &ExpansionConfig::default()).unwrap();
        let c = &series.coefficients;
        assert!(c[1].norm() < 1e-15 && c[3].norm() < 1e-15 && c[5].norm() < 1e-15);
        assert!((c[2].re - h * h / 2.0).abs() < 1e-12);
        assert!((c[4].re - (-h.powi(4) / 12.0)).abs() < 1e-12);
        assert!((c[6].re - h.powi(6) / 45.0).abs() < 1e-12);
    }

    #[test]
    fn first_coefficient_is_minus_mean_energy() {
        let h = build_lr_tfi(4, 1.5, 0.7, 0.3).unwrap();
        let rho = ProductState::maximally_mixed(4, 2);
        let s = truncated_log_z(&h, &rho, 1, &ExpansionConfig::default()).unwrap();
        assert!(s.coefficient(1).norm() < 1e-15);

        let shifted = Hamiltonian::new(
            Lattice::chain(2).unwrap(),
            2,
            vec![TermSpec::new(vec![0], pauli::identity().scale(C64::new(0.5, 0.0))), TermSpec::new(vec![1], pauli::z())],
        )
        .unwrap();
        let s = truncated_log_z(&shifted, &ProductState::maximally_mixed(2, 2), 2, &ExpansionConfig::default()).unwrap();
        assert!((s.coefficient(1).re + 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_beta_gives_zero_with_zero_bound() {
        let h = build_lr_tfi(3, 2.0, 1.0, 0.25).unwrap();
        let e = estimate_log_z(&h, &ProductState::maximally_mixed(3, 2), ZERO, 3, 2.0, &ExpansionConfig::default()).unwrap();
        assert_eq!(e.value, ZERO);
        assert_eq!(e.certificate.error_bound, 0.0);
        assert!(e.certificate.certified);
    }

    #[test]
    fn rejects_zero_order_and_oversized_order() {
        let h = single_spin(1.0);
        let rho = ProductState::maximally_mixed(1, 2);
        assert!(matches!(truncated_log_z(&h, &rho, 0, &ExpansionConfig::default()), Err(Error::Domain(_))));
        assert!(matches!(truncated_log_z(&h, &rho, 9, &ExpansionConfig::default()), Err(Error::UrsellCap { .. })));
    }

    #[test]
    fn loschmidt_single_spin_matches_log_cos() {
        let field = 0.9;
        let plus = ProductState::from_kets(&[vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]]).unwrap();
        let t = 0.05;
        let e = loschmidt_series(&single_spin(field), &plus, t, 8, 2.0, &ExpansionConfig::default()).unwrap();
        assert!((e.log_echo - C64::new((field * t).cos().ln(), 0.0)).norm() < 1e-12);
        let zero = loschmidt_series(&single_spin(field), &plus, 0.0, 4, 2.0, &ExpansionConfig::default()).unwrap();
        assert_eq!(zero.rate, ZERO);
    }

    #[test]
    fn loschmidt_rejects_mixed_states() {
        let err = loschmidt_series(&single_spin(1.0), &ProductState::maximally_mixed(1, 2), 0.1, 2, 2.0, &ExpansionConfig::default());
        assert!(matches!(err, Err(Error::InvalidState(_))));
    }

    #[test]
    fn one_color_general_series_is_the_plain_series() {
        let h = build_lr_tfi(4, 2.5, 1.0, 0.25).unwrap();
        let rho = ProductState::maximally_mixed(4, 2);
        let cfg = ExpansionConfig::default();
        let plain = truncated_log_z(&h, &rho, 4, &cfg).unwrap();
        let general = truncated_log_z_general(&[&h], &rho, &[4], &cfg).unwrap();
        let beta = C64::new(0.01, 0.0);
        let a = plain.evaluate(beta);
        let b = general.evaluate(&[-beta]).unwrap();
        assert!((a - b).norm() < 1e-15);
    }

    #[test]
    fn worker_count_does_not_change_bits() {
        let h = build_lr_tfi(6, 1.5, 1.0, 0.25).unwrap();
        let rho = ProductState::maximally_mixed(6, 2);
        let one = truncated_log_z(&h, &rho, 4, &ExpansionConfig::with_workers(1)).unwrap();
        let four = truncated_log_z(&h, &rho, 4, &ExpansionConfig::with_workers(4)).unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn kp_holds_far_inside_radius() {
        let h = build_lr_tfi(4, 2.5, 1.0, 0.25).unwrap();
        let rho = ProductState::maximally_mixed(4, 2);
        let c = LongRangeConstants::for_hamiltonian(&h, 2.5).unwrap();
        let r = kp_check(&h, &rho, c.beta_star, 3, &ExpansionConfig::default()).unwrap();
        assert!(r.holds, "{:?}", r.sums);
        assert_eq!(r.sums.len(), h.terms().len());
        assert!(r.max() > 0.0);
    }
}
