//! Run configuration: the model, the reference state, couplings, orders, and
//! per-subcommand parameters. Unknown keys are rejected everywhere.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use clusterx::linalg::{CMatrix, C64};
use clusterx::model::{build_lr_tfi, build_nn_tfi, random_two_body, Hamiltonian, HamiltonianDoc, MatrixDoc, ProductState};
use clusterx::stats::{DosWindow, GaussMode};

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    #[serde(default)]
    pub rho: RhoSpec,
    pub beta: Option<ComplexDoc>,
    /// Couplings of the color classes, multiplying `+H_l` in the exponent.
    pub lambdas: Option<Vec<ComplexDoc>>,
    pub m: Option<usize>,
    /// Per-color orders; the truncation keeps total degree `Σ orders`.
    pub orders: Option<Vec<usize>>,
    #[serde(default)]
    pub seed: u64,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub expansion: ExpansionSpec,
    #[serde(default)]
    pub dos: DosSpec,
    #[serde(default)]
    pub stats: StatsSpec,
    #[serde(default)]
    pub bench: BenchSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    LrTfi {
        #[serde(rename = "N", alias = "n")]
        n: usize,
        alpha: f64,
        #[serde(rename = "J", alias = "j", default = "one")]
        j: f64,
        #[serde(default = "quarter")]
        h: f64,
    },
    /// Certified with the bounding exponent `alpha`.
    NnTfi {
        #[serde(rename = "N", alias = "n")]
        n: usize,
        #[serde(rename = "J", alias = "j", default = "one")]
        j: f64,
        #[serde(default = "quarter")]
        h: f64,
        #[serde(default = "two")]
        alpha: f64,
    },
    /// Random two-body chain drawn from the config seed.
    Random {
        #[serde(rename = "N", alias = "n")]
        n: usize,
        pairs: usize,
        fields: usize,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default = "two")]
        alpha: f64,
    },
    /// A Hamiltonian document; relative paths resolve against the config file.
    Custom { path: PathBuf, alpha: f64 },
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

fn quarter() -> f64 {
    0.25
}

#[derive(Debug, Clone, Copy, Deserialize, serde::Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ComplexDoc {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl From<ComplexDoc> for C64 {
    fn from(c: ComplexDoc) -> Self {
        C64::new(c.re, c.im)
    }
}

impl From<C64> for ComplexDoc {
    fn from(c: C64) -> Self {
        Self { re: c.re, im: c.im }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RhoSpec {
    #[default]
    MaximallyMixed,
    /// One entry per site, or a single entry repeated on every site.
    Product(Vec<SiteState>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SiteState {
    Up,
    Down,
    Plus,
    Minus,
    Mixed,
    Ket {
        re: Vec<f64>,
        #[serde(default)]
        im: Vec<f64>,
    },
    Density(MatrixDoc),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpansionSpec {
    pub support_cap: Option<usize>,
    pub ursell_cap: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DosSpec {
    pub n_t: Option<usize>,
    pub dt: Option<f64>,
    #[serde(default)]
    pub window: DosWindow,
    #[serde(default)]
    pub fit: GaussMode,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    #[default]
    Magnetization,
    Hamiltonian,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum VariantChoice {
    FullRadius,
    HalfRadius,
    #[default]
    Both,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsSpec {
    #[serde(default)]
    pub observable: Observable,
    /// Inverse temperatures as fractions of the convergence radius.
    #[serde(default = "default_beta_fractions")]
    pub beta_fractions: Vec<f64>,
    /// Deviations `δ/N`.
    #[serde(default = "default_delta_fractions")]
    pub delta_fractions: Vec<f64>,
    #[serde(default)]
    pub variant: VariantChoice,
    /// Times for a Loschmidt rate scan of the configured pure state.
    #[serde(default)]
    pub dpt_times: Vec<f64>,
}

fn default_beta_fractions() -> Vec<f64> {
    vec![0.125, 0.25]
}

fn default_delta_fractions() -> Vec<f64> {
    (1..=10).map(|j| j as f64 / 10.0).collect()
}

impl Default for StatsSpec {
    fn default() -> Self {
        Self {
            observable: Observable::default(),
            beta_fractions: default_beta_fractions(),
            delta_fractions: default_delta_fractions(),
            variant: VariantChoice::default(),
            dpt_times: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSpec {
    /// Orders for the sweep at the configured size.
    #[serde(default = "default_bench_orders")]
    pub orders: Vec<usize>,
    /// Sizes for the sweep at fixed `m`; built-in models only.
    #[serde(default)]
    pub sizes: Vec<usize>,
    #[serde(default = "default_bench_m")]
    pub m: usize,
}

fn default_bench_orders() -> Vec<usize> {
    (1..=4).collect()
}

fn default_bench_m() -> usize {
    3
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self { orders: default_bench_orders(), sizes: Vec::new(), m: default_bench_m() }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: Self = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if let ModelSpec::Custom { path: model_path, .. } = &mut cfg.model {
            if model_path.is_relative() {
                if let Some(dir) = path.parent() {
                    *model_path = dir.join(&*model_path);
                }
            }
        }
        Ok(cfg)
    }

    pub fn alpha(&self) -> f64 {
        match self.model {
            ModelSpec::LrTfi { alpha, .. } | ModelSpec::NnTfi { alpha, .. } | ModelSpec::Random { alpha, .. } | ModelSpec::Custom { alpha, .. } => alpha,
        }
    }

    pub fn hamiltonian(&self) -> Result<Hamiltonian, CliError> {
        self.hamiltonian_with_size(None)
    }

    /// Built-in models rebuilt at another size; `None` keeps the configured one.
    pub fn hamiltonian_with_size(&self, size: Option<usize>) -> Result<Hamiltonian, CliError> {
        let built = match &self.model {
            ModelSpec::LrTfi { n, alpha, j, h } => build_lr_tfi(size.unwrap_or(*n), *alpha, *j, *h),
            ModelSpec::NnTfi { n, j, h, .. } => build_nn_tfi(size.unwrap_or(*n), *j, *h),
            ModelSpec::Random { n, pairs, fields, scale, .. } => random_two_body(size.unwrap_or(*n), *pairs, *fields, *scale, self.seed),
            ModelSpec::Custom { path, .. } => {
                if size.is_some() {
                    return Err(CliError::Config("size sweeps need a built-in model".into()));
                }
                let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                let doc: HamiltonianDoc = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                return Hamiltonian::from_doc(&doc).map_err(|e| CliError::Config(e.to_string()));
            }
        };
        // Built-in models split into couplings (color 0) and fields (color 1).
        built.map(|h| h.recolored(|t| usize::from(t.support.len() == 1))).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn product_state(&self, n_sites: usize, d: usize) -> Result<ProductState, CliError> {
        let sites = match &self.rho {
            RhoSpec::MaximallyMixed => return Ok(ProductState::maximally_mixed(n_sites, d)),
            RhoSpec::Product(sites) => sites,
        };
        if sites.len() != 1 && sites.len() != n_sites {
            return Err(CliError::Config(format!("{} site states for {n_sites} sites", sites.len())));
        }
        let factors = (0..n_sites).map(|i| site_matrix(&sites[if sites.len() == 1 { 0 } else { i }], d)).collect::<Result<Vec<_>, _>>()?;
        ProductState::new(factors).map_err(|e| CliError::Config(e.to_string()))
    }
}

fn site_matrix(state: &SiteState, d: usize) -> Result<CMatrix, CliError> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let named = |ket: [f64; 2]| -> Result<Vec<C64>, CliError> {
        if d != 2 {
            return Err(CliError::Config(format!("named site states need d = 2, not {d}")));
        }
        Ok(ket.iter().map(|&x| C64::new(x, 0.0)).collect())
    };
    let ket = match state {
        SiteState::Up => named([1.0, 0.0])?,
        SiteState::Down => named([0.0, 1.0])?,
        SiteState::Plus => named([s, s])?,
        SiteState::Minus => named([s, -s])?,
        SiteState::Mixed => return Ok(CMatrix::identity(d).scale(C64::new(1.0 / d as f64, 0.0))),
        SiteState::Ket { re, im } => {
            if re.len() != d || !(im.is_empty() || im.len() == d) {
                return Err(CliError::Config(format!("ket needs {d} components")));
            }
            let v: Vec<C64> = (0..d).map(|i| C64::new(re[i], im.get(i).copied().unwrap_or(0.0))).collect();
            let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if !norm.is_normal() {
                return Err(CliError::Config("zero ket".into()));
            }
            v.into_iter().map(|c| c / norm).collect()
        }
        SiteState::Density(doc) => return doc.to_matrix().map_err(CliError::Config),
    };
    Ok(CMatrix::outer(&ket))
}
