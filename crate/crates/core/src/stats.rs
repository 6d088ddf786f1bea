//! Concentration and moment-generating-function checks, the Berry–Esseen
//! distance, density of states from a time trace, Gaussian residuals, and
//! Loschmidt rate scans.

use std::f64::consts::PI;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::expansion::{truncated_log_z, ExpansionConfig};
use crate::linalg::C64;
use crate::model::{Hamiltonian, LongRangeConstants, ProductState};
use crate::oracle::{embed, gibbs_diagonal, gibbs_state, spectral_measure_dense, DenseOperator, ExactModel, SpectralMeasure};

/// Which form of the concentration constant to use.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CBetaVariant {
    /// `2u / (β* − β)²`, valid for `β < β*`.
    FullRadius,
    /// `1 / (β*/2 − β)²`, valid for `β < β*/2`.
    #[default]
    HalfRadius,
}

pub fn c_beta(beta: f64, beta_star: f64, u: f64, variant: CBetaVariant) -> Result<f64> {
    if !(beta >= 0.0) {
        return Err(Error::Domain(format!("inverse temperature {beta} must be nonnegative")));
    }
    match variant {
        CBetaVariant::HalfRadius if beta < beta_star / 2.0 => Ok((beta_star / 2.0 - beta).powi(-2)),
        CBetaVariant::FullRadius if beta < beta_star => Ok(2.0 * u / (beta_star - beta).powi(2)),
        _ => Err(Error::Domain(format!("beta = {beta} is outside the domain of the {variant:?} constant (beta* = {beta_star})"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub deltas: Vec<f64>,
    pub tails: Vec<f64>,
    pub bounds: Vec<f64>,
    pub c_beta: f64,
    pub variant: CBetaVariant,
    pub holds: bool,
}

/// Spectral measure of `A` under `e^{-βH}/Z`.
pub fn gibbs_measure(h: &Hamiltonian, a: &DenseOperator, beta: f64, cap: usize) -> Result<SpectralMeasure> {
    let eig = embed(h, cap)?.eigensystem();
    if a.dim() != eig.dim() {
        return Err(Error::Domain(format!("observable dimension {} != {}", a.dim(), eig.dim())));
    }
    if a.is_diagonal() {
        let values: Vec<f64> = (0..a.dim()).map(|i| a.matrix().get(i, i).re).collect();
        return Ok(SpectralMeasure::from_weighted(&values, &gibbs_diagonal(&eig, beta)));
    }
    Ok(spectral_measure_dense(a, &gibbs_state(&eig, beta)))
}

/// Two-sided tail `P(|a − ⟨A⟩| > δ)` against `2 exp(−δ² / (4 c_β N))`.
pub fn chernoff_check(
    measure: &SpectralMeasure,
    n_sites: usize,
    beta: f64,
    constants: &LongRangeConstants,
    variant: CBetaVariant,
    deltas: &[f64],
) -> Result<ConcentrationReport> {
    let c = c_beta(beta, constants.beta_star, constants.u, variant)?;
    let mean = measure.mean();
    let total = measure.total();
    let tails: Vec<f64> = deltas.iter().map(|&d| measure.points.iter().filter(|p| (p.0 - mean).abs() > d).map(|p| p.1).sum::<f64>() / total).collect();
    let bounds: Vec<f64> = deltas.iter().map(|&d| 2.0 * (-d * d / (4.0 * c * n_sites as f64)).exp()).collect();
    let holds = tails.iter().zip(&bounds).all(|(t, b)| t <= b);
    Ok(ConcentrationReport { deltas: deltas.to_vec(), tails, bounds, c_beta: c, variant, holds })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MgfReport {
    pub taus: Vec<f64>,
    /// `log ⟨e^{τ(A − ⟨A⟩)}⟩`.
    pub values: Vec<f64>,
    /// `c_β τ² N`.
    pub bounds: Vec<f64>,
    pub c_beta: f64,
    pub variant: CBetaVariant,
    pub holds: bool,
}

/// `τ_j = τ_max (j+1)/10` with `τ_max = β*/2 − β`.
pub fn default_tau_grid(beta: f64, beta_star: f64) -> Vec<f64> {
    let top = beta_star / 2.0 - beta;
    (1..=10).map(|j| top * j as f64 / 10.0).collect()
}

pub fn mgf_check(
    measure: &SpectralMeasure,
    n_sites: usize,
    beta: f64,
    constants: &LongRangeConstants,
    variant: CBetaVariant,
    taus: &[f64],
) -> Result<MgfReport> {
    let c = c_beta(beta, constants.beta_star, constants.u, variant)?;
    let limit = constants.beta_star / 2.0 - beta;
    if let Some(&bad) = taus.iter().find(|&&t| !(t >= 0.0 && t <= limit * (1.0 + 1e-12))) {
        return Err(Error::Domain(format!("tau = {bad} outside [0, beta*/2 - beta = {limit}]")));
    }
    let mean = measure.mean();
    let total = measure.total();
    let values: Vec<f64> = taus
        .iter()
        .map(|&t| {
            let top = measure.points.iter().map(|p| t * (p.0 - mean)).fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = measure.points.iter().map(|p| p.1 * (t * (p.0 - mean) - top).exp()).sum();
            top + (sum / total).ln()
        })
        .collect();
    let bounds: Vec<f64> = taus.iter().map(|&t| c * t * t * n_sites as f64).collect();
    let holds = values.iter().zip(&bounds).all(|(v, b)| *v <= b + 1e-15 * b.abs().max(1.0));
    Ok(MgfReport { taus: taus.to_vec(), values, bounds, c_beta: c, variant, holds })
}

/// `sup_x |C(x) − G(x)|` with `G` the Gaussian of matching mean and
/// variance; both one-sided limits of `C` are checked at every atom.
pub fn berry_esseen(measure: &SpectralMeasure) -> Result<f64> {
    let total = measure.total();
    let variance = measure.variance();
    let mean = measure.mean();
    if !(variance > 1e-300) {
        return Err(Error::ZeroVariance);
    }
    let normal = Normal::new(mean, variance.sqrt()).map_err(|e| Error::Domain(e.to_string()))?;
    let mut below = 0.0;
    let mut sup: f64 = 0.0;
    for &(a, p) in &measure.points {
        let g = normal.cdf(a);
        sup = sup.max((below / total - g).abs());
        below += p;
        sup = sup.max((below / total - g).abs());
    }
    Ok(sup)
}

/// Apodization applied to the time trace before the transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DosWindow {
    /// `exp(−t²/(2σ²))`; `None` uses `σ = n_t dt / 8`.
    Gaussian {
        sigma_t: Option<f64>,
    },
    Rectangular,
}

impl Default for DosWindow {
    fn default() -> Self {
        Self::Gaussian { sigma_t: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DosEstimate {
    pub energies: Vec<f64>,
    /// Nonnegative density with `Σ P ΔE = 1`.
    pub density: Vec<f64>,
    /// Trapezoidal cumulative density at each grid energy.
    pub cdos: Vec<f64>,
    pub de: f64,
}

impl DosEstimate {
    /// `max_k |C_k − F(E_k)|` against a reference measure.
    pub fn cdos_distance(&self, reference: &SpectralMeasure) -> f64 {
        let total = reference.total();
        self.energies.iter().zip(&self.cdos).map(|(&e, &c)| (c - reference.cdf(e) / total).abs()).fold(0.0, f64::max)
    }
}

/// `dt = π/(2 E_max)` with the Gershgorin bound, and `n_t = 4096`.
pub fn default_dos_grid(op: &DenseOperator) -> (f64, usize, f64) {
    let e_max = op.gershgorin_bound().max(f64::MIN_POSITIVE);
    (PI / (2.0 * e_max), 4096, e_max)
}

/// Density of states from `f(t_j) = Tr[e^{-iHt_j} ρ]`, `t_j = j dt`, using
/// `f(−t) = f(t)*`. `e_bound` bounds the spectrum for the sampling check.
pub fn dos_fft(trace: &[C64], dt: f64, e_bound: f64, window: DosWindow) -> Result<DosEstimate> {
    let n = trace.len();
    if n < 2 {
        return Err(Error::DegenerateSamples(format!("{n} time samples")));
    }
    let limit = PI / e_bound;
    if !(dt > 0.0) || dt >= limit {
        return Err(Error::Nyquist { dt, limit, suggested: PI / (2.0 * e_bound) });
    }
    let sigma = match window {
        DosWindow::Gaussian { sigma_t } => Some(sigma_t.unwrap_or(n as f64 * dt / 8.0)),
        DosWindow::Rectangular => None,
    };
    let mut buffer: Vec<C64> = trace
        .iter()
        .enumerate()
        .map(|(j, &f)| {
            let t = j as f64 * dt;
            let w = sigma.map_or(1.0, |s| (-t * t / (2.0 * s * s)).exp());
            if j == 0 {
                f * w * 0.5
            } else {
                f * w
            }
        })
        .collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buffer);
    let de = 2.0 * PI / (n as f64 * dt);
    let half = n / 2;
    let mut energies = Vec::with_capacity(n);
    let mut density = Vec::with_capacity(n);
    for k in 0..n {
        // Shift so that energies run from −n/2 ΔE upward.
        let idx = (k + n - half) % n;
        let signed = k as f64 - half as f64;
        energies.push(signed * de);
        density.push((dt / (2.0 * PI) * 2.0 * buffer[idx].re).max(0.0));
    }
    let mass: f64 = density.iter().sum::<f64>() * de;
    if !(mass > 0.0) {
        return Err(Error::DegenerateSamples("density vanishes everywhere".into()));
    }
    density.iter_mut().for_each(|p| *p /= mass);
    let mut cdos = Vec::with_capacity(n);
    let mut below = 0.0;
    for &p in &density {
        cdos.push(below + p * de / 2.0);
        below += p * de;
    }
    Ok(DosEstimate { energies, density, cdos, de })
}

/// How the comparison Gaussian is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GaussMode {
    #[default]
    MomentMatched,
    LeastSquares,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussFit {
    pub mean: f64,
    pub variance: f64,
    /// `Σ |y − g|² / (R max y)`.
    pub residual: f64,
    pub samples: usize,
}

fn trapezoid_widths(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { xs[i] - xs[i - 1] } else { 0.0 };
            let right = if i + 1 < n { xs[i + 1] - xs[i] } else { 0.0 };
            (left + right) / 2.0
        })
        .collect()
}

fn gauss_sse(xs: &[f64], ys: &[f64], mass: f64, mean: f64, sd: f64) -> f64 {
    let g = Normal::new(mean, sd).unwrap();
    xs.iter().zip(ys).map(|(&x, &y)| (y - mass * g.pdf(x)).powi(2)).sum()
}

/// Residual of sampled density values `ys` at increasing `xs` against a
/// Gaussian carrying the same mass.
pub fn gauss_residual(xs: &[f64], ys: &[f64], mode: GaussMode) -> Result<GaussFit> {
    let r = xs.len();
    if r < 3 || ys.len() != r {
        return Err(Error::DegenerateSamples(format!("{r} abscissae for {} values", ys.len())));
    }
    if xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::DegenerateSamples("abscissae must increase".into()));
    }
    let top = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(top > 0.0) {
        return Err(Error::DegenerateSamples("no positive density".into()));
    }
    let widths = trapezoid_widths(xs);
    let mass: f64 = ys.iter().zip(&widths).map(|(y, w)| y * w).sum();
    let mut mean = ys.iter().zip(&widths).zip(xs).map(|((y, w), x)| y * w * x).sum::<f64>() / mass;
    let mut variance = ys.iter().zip(&widths).zip(xs).map(|((y, w), x)| y * w * (x - mean).powi(2)).sum::<f64>() / mass;
    if !(variance > 0.0) {
        return Err(Error::ZeroVariance);
    }
    if mode == GaussMode::LeastSquares {
        (mean, variance) = least_squares(xs, ys, mass, mean, variance.sqrt());
    }
    let sse = gauss_sse(xs, ys, mass, mean, variance.sqrt());
    Ok(GaussFit { mean, variance, residual: sse / (r as f64 * top), samples: r })
}

/// Damped Gauss–Newton on `(μ, ln σ)`.
fn least_squares(xs: &[f64], ys: &[f64], mass: f64, mean: f64, sd: f64) -> (f64, f64) {
    let cost = |p: [f64; 2]| gauss_sse(xs, ys, mass, p[0], p[1].exp());
    let residuals = |p: [f64; 2]| -> Vec<f64> {
        let g = Normal::new(p[0], p[1].exp()).unwrap();
        xs.iter().zip(ys).map(|(&x, &y)| mass * g.pdf(x) - y).collect()
    };
    let mut p = [mean, sd.ln()];
    let mut lambda = 1e-3;
    let mut current = cost(p);
    for _ in 0..200 {
        let r0 = residuals(p);
        let h = [1e-7 * sd.max(1e-12), 1e-7];
        let jac: Vec<[f64; 2]> = {
            let r_mu = residuals([p[0] + h[0], p[1]]);
            let r_ls = residuals([p[0], p[1] + h[1]]);
            (0..r0.len()).map(|i| [(r_mu[i] - r0[i]) / h[0], (r_ls[i] - r0[i]) / h[1]]).collect()
        };
        let mut a = [[0.0; 2]; 2];
        let mut g = [0.0; 2];
        for (row, &ri) in jac.iter().zip(&r0) {
            for u in 0..2 {
                g[u] += row[u] * ri;
                for v in 0..2 {
                    a[u][v] += row[u] * row[v];
                }
            }
        }
        let mut improved = false;
        for _ in 0..20 {
            let m = [[a[0][0] * (1.0 + lambda), a[0][1]], [a[1][0], a[1][1] * (1.0 + lambda)]];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            if det.abs() < 1e-300 {
                lambda *= 10.0;
                continue;
            }
            let step = [-(m[1][1] * g[0] - m[0][1] * g[1]) / det, -(m[0][0] * g[1] - m[1][0] * g[0]) / det];
            let trial = [p[0] + step[0], p[1] + step[1]];
            let c = cost(trial);
            if c < current {
                p = trial;
                current = c;
                lambda = (lambda / 10.0).max(1e-12);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (p[0], p[1].exp().powi(2))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DptPoint {
    pub t: f64,
    /// `log ⟨Ψ|e^{-iHt}|Ψ⟩ / N` from the oracle; `None` at a zero of the echo.
    pub exact_rate: Option<C64>,
    pub exact_error: Option<String>,
    pub series_rate: C64,
    pub error_bound: f64,
    pub certified: bool,
}

/// Rate function `log⟨Ψ|e^{-iHt}|Ψ⟩/N` on a time grid, exact and from `T_m`.
pub fn dpt_scan(h: &Hamiltonian, psi: &ProductState, ts: &[f64], m: usize, alpha: f64, cfg: &ExpansionConfig, cap: usize) -> Result<Vec<DptPoint>> {
    let constants = LongRangeConstants::for_hamiltonian(h, alpha)?;
    let series = truncated_log_z(h, psi, m, cfg)?;
    let exact = ExactModel::new(h, psi, cap)?;
    let n = h.n_sites() as f64;
    Ok(ts
        .iter()
        .map(|&t| {
            let beta = C64::new(0.0, t);
            let cert = crate::expansion::Certificate::single(h.n_sites(), beta, m, &constants);
            let (exact_rate, exact_error) = match exact.log_z(beta) {
                Ok(v) => (Some(v / n), None),
                Err(e) => (None, Some(e.to_string())),
            };
            DptPoint { t, exact_rate, exact_error, series_rate: series.evaluate(beta) / n, error_bound: cert.error_bound, certified: cert.certified }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli, ONE};
    use crate::model::{build_lr_tfi, Lattice, TermSpec};
    use crate::oracle::{spectral_measure, DEFAULT_DENSE_CAP};

    fn single(m: crate::linalg::CMatrix) -> Hamiltonian {
        Hamiltonian::new(Lattice::chain(1).unwrap(), 2, vec![TermSpec::new(vec![0], m)]).unwrap()
    }

    fn constants(beta_star: f64, u: f64) -> LongRangeConstants {
        LongRangeConstants { alpha: 2.0, g: 1.0, u, k: 2, beta_star, weak_decay: true }
    }

    #[test]
    fn c_beta_at_zero() {
        let bs = 0.01;
        assert!((c_beta(0.0, bs, 5.0, CBetaVariant::HalfRadius).unwrap() - (2.0 / bs).powi(2)).abs() < 1e-9);
        assert!((c_beta(0.0, bs, 5.0, CBetaVariant::FullRadius).unwrap() - 10.0 / (bs * bs)).abs() < 1e-9);
    }

    #[test]
    fn c_beta_at_quarter_radius() {
        let (bs, u) = (0.01, 5.0);
        let b = bs / 4.0;
        let app = c_beta(b, bs, u, CBetaVariant::HalfRadius).unwrap();
        let main = c_beta(b, bs, u, CBetaVariant::FullRadius).unwrap();
        assert!((app - 1.0 / (0.0025f64 * 0.0025)).abs() < 1e-6);
        assert!((main - 10.0 / (0.0075f64 * 0.0075)).abs() < 1e-6);
    }

    #[test]
    fn c_beta_domains() {
        assert!(c_beta(0.005, 0.01, 5.0, CBetaVariant::HalfRadius).is_err());
        assert!(c_beta(0.007, 0.01, 5.0, CBetaVariant::FullRadius).is_ok());
        assert!(c_beta(0.01, 0.01, 5.0, CBetaVariant::FullRadius).is_err());
        assert!(c_beta(-0.001, 0.01, 5.0, CBetaVariant::HalfRadius).is_err());
    }

    #[test]
    fn chernoff_trivial_deltas() {
        let m = SpectralMeasure { points: vec![(-1.0, 0.5), (1.0, 0.5)] };
        let r = chernoff_check(&m, 1, 0.0, &constants(0.01, 5.0), CBetaVariant::HalfRadius, &[0.0, 2.5]).unwrap();
        assert_eq!(r.tails, vec![1.0, 0.0]);
        assert_eq!(r.bounds[0], 2.0);
        assert!(r.holds);
    }

    #[test]
    fn mgf_single_spin_is_log_cosh() {
        let m = SpectralMeasure { points: vec![(-1.0, 0.5), (1.0, 0.5)] };
        let c = constants(0.02, 5.0);
        let taus = default_tau_grid(0.0, c.beta_star);
        let r = mgf_check(&m, 1, 0.0, &c, CBetaVariant::HalfRadius, &taus).unwrap();
        for (t, v) in taus.iter().zip(&r.values) {
            assert!((v - t.cosh().ln()).abs() < 1e-15);
        }
        assert!(r.holds);
        let zero = mgf_check(&m, 1, 0.0, &c, CBetaVariant::HalfRadius, &[0.0]).unwrap();
        assert_eq!(zero.values, vec![0.0]);
        assert!(mgf_check(&m, 1, 0.0, &c, CBetaVariant::HalfRadius, &[0.02]).is_err());
    }

    #[test]
    fn berry_esseen_two_point() {
        let m = SpectralMeasure { points: vec![(-1.0, 0.5), (1.0, 0.5)] };
        let expected = Normal::new(0.0, 1.0).unwrap().cdf(1.0) - 0.5;
        assert!((berry_esseen(&m).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.341345).abs() < 1e-6);
    }

    #[test]
    fn berry_esseen_point_mass_is_zero_variance() {
        let m = SpectralMeasure { points: vec![(3.0, 1.0)] };
        assert_eq!(berry_esseen(&m), Err(Error::ZeroVariance));
    }

    #[test]
    fn dos_of_single_spin_has_two_equal_peaks() {
        let field = 0.8;
        let model = ExactModel::new(&single(pauli::z().scale(C64::new(field, 0.0))), &ProductState::maximally_mixed(1, 2), 8).unwrap();
        let dt = PI / (2.0 * field);
        let trace = model.time_trace(dt, 4096);
        let dos = dos_fft(&trace, dt, field, DosWindow::default()).unwrap();
        let peak = |target: f64| dos.energies.iter().zip(&dos.density).filter(|(e, _)| (*e - target).abs() < 0.2).map(|(_, p)| *p * dos.de).sum::<f64>();
        assert!((peak(field) - 0.5).abs() < 1e-3);
        assert!((peak(-field) - 0.5).abs() < 1e-3);
        let total: f64 = dos.density.iter().sum::<f64>() * dos.de;
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dos_of_constant_trace_peaks_at_zero() {
        let trace = vec![ONE; 1024];
        let dos = dos_fft(&trace, 0.1, 1.0, DosWindow::default()).unwrap();
        let k = dos.density.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert_eq!(dos.energies[k], 0.0);
    }

    #[test]
    fn dos_rejects_undersampling() {
        let trace = vec![ONE; 16];
        match dos_fft(&trace, 1.0, 4.0, DosWindow::default()) {
            Err(Error::Nyquist { suggested, .. }) => assert!((suggested - PI / 8.0).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gaussian_samples_have_tiny_residual() {
        let xs: Vec<f64> = (0..401).map(|i| -10.0 + i as f64 * 0.05).collect();
        let g = Normal::new(0.7, 1.3).unwrap();
        let ys: Vec<f64> = xs.iter().map(|&x| g.pdf(x)).collect();
        let fit = gauss_residual(&xs, &ys, GaussMode::MomentMatched).unwrap();
        assert!(fit.residual < 1e-12);
        assert!((fit.mean - 0.7).abs() < 1e-9 && (fit.variance - 1.69).abs() < 1e-9);
        let ls = gauss_residual(&xs, &ys, GaussMode::LeastSquares).unwrap();
        assert!(ls.residual < 1e-12);
    }

    #[test]
    fn two_point_spectrum_has_large_residual() {
        let xs: Vec<f64> = (0..201).map(|i| -2.0 + i as f64 * 0.02).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| if (x.abs() - 1.0).abs() < 0.011 { 25.0 } else { 0.0 }).collect();
        let fit = gauss_residual(&xs, &ys, GaussMode::MomentMatched).unwrap();
        assert!(fit.residual > 0.1);
    }

    #[test]
    fn gauss_residual_rejects_degenerate_input() {
        assert!(gauss_residual(&[0.0, 1.0], &[1.0, 1.0], GaussMode::MomentMatched).is_err());
        assert!(gauss_residual(&[0.0, 1.0, 2.0], &[0.0, 0.0, 0.0], GaussMode::MomentMatched).is_err());
    }

    #[test]
    fn gibbs_measure_at_zero_is_state_free_measure() {
        let h = build_lr_tfi(3, 1.5, 1.0, 0.25).unwrap();
        let a = embed(&crate::model::build_field(3, 1.0).unwrap(), DEFAULT_DENSE_CAP).unwrap();
        let g = gibbs_measure(&h, &a, 0.0, DEFAULT_DENSE_CAP).unwrap();
        let direct = spectral_measure(&a, &ProductState::maximally_mixed(3, 2));
        assert_eq!(g.points.len(), direct.points.len());
        for (x, y) in g.points.iter().zip(&direct.points) {
            assert!((x.0 - y.0).abs() < 1e-12 && (x.1 - y.1).abs() < 1e-12);
        }
    }

    #[test]
    fn dpt_single_spin_rate_is_log_cos() {
        let field = 1.0;
        let plus = ProductState::from_kets(&[vec![ONE, ONE]]).unwrap();
        let pts = dpt_scan(&single(pauli::z()), &plus, &[0.0, 0.5, 1.0, PI / 2.0], 4, 2.0, &ExpansionConfig::default(), 8).unwrap();
        assert_eq!(pts[0].exact_rate.unwrap().norm(), 0.0);
        assert_eq!(pts[0].series_rate.norm(), 0.0);
        for p in &pts[1..3] {
            assert!((p.exact_rate.unwrap() - C64::new((field * p.t).cos().ln(), 0.0)).norm() < 1e-12);
        }
        assert!(pts[3].exact_rate.is_none() && pts[3].exact_error.is_some());
        assert!(!pts[3].certified);
    }
}
