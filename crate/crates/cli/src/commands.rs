//! Subcommand implementations.

use std::time::Instant;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use clusterx::expansion::{estimate_log_z_general, truncated_log_z, Certificate, ExpansionConfig, GeneralSeries};
use clusterx::linalg::C64;
use clusterx::model::{build_field, Hamiltonian, LongRangeConstants, ProductState};
use clusterx::oracle::{cumulants, embed, exact_log_z_general, spectral_measure, DenseOperator, ExactModel, DEGENERACY_TOL};
use clusterx::polymers::{enumerate_clusters_with_cap, factorial, Polymer};
use clusterx::stats::{
    berry_esseen, chernoff_check, default_dos_grid, default_tau_grid, dos_fft, dpt_scan, gauss_residual, gibbs_measure, mgf_check, CBetaVariant, DosWindow,
    GaussMode,
};

use crate::config::{ComplexDoc, Observable, RunConfig, VariantChoice};
use crate::output::{f, json_line, Table};
use crate::{Cli, CliError, Format, Rendered};

/// Color classes, their couplings, and per-color orders.
type ColorSplit = (Vec<Hamiltonian>, Vec<C64>, Vec<usize>);

/// Everything a subcommand needs, resolved once.
pub struct Context<'a> {
    pub cfg: &'a RunConfig,
    pub format: Format,
    pub timing: bool,
    pub h: Hamiltonian,
    pub rho: ProductState,
    pub alpha: f64,
    pub expansion: ExpansionConfig,
    pub cap: usize,
}

impl<'a> Context<'a> {
    pub fn new(cli: &Cli, cfg: &'a RunConfig) -> Result<Self, CliError> {
        let h = cfg.hamiltonian()?;
        let rho = cfg.product_state(h.n_sites(), h.local_dim())?;
        let mut expansion = ExpansionConfig::with_workers(cli.workers);
        expansion.support_cap = cfg.expansion.support_cap;
        if let Some(cap) = cfg.expansion.ursell_cap {
            expansion.ursell_cap = cap;
        }
        Ok(Self { cfg, format: cli.format, timing: !cli.no_timing, h, rho, alpha: cfg.alpha(), expansion, cap: crate::dense_cap()? })
    }

    fn beta(&self) -> Result<C64, CliError> {
        self.cfg.beta.map(C64::from).ok_or_else(|| CliError::Config("`beta` is required".into()))
    }

    fn m(&self) -> Result<usize, CliError> {
        self.cfg.m.ok_or_else(|| CliError::Config("`m` is required".into()))
    }

    fn elapsed(&self, start: Instant) -> Option<f64> {
        self.timing.then(|| start.elapsed().as_secs_f64())
    }

    /// Color classes and their couplings when `lambdas` is configured.
    fn general(&self) -> Result<Option<ColorSplit>, CliError> {
        let Some(lambdas) = &self.cfg.lambdas else {
            return Ok(None);
        };
        let parts = self.h.split_colors();
        if lambdas.len() != parts.len() {
            return Err(CliError::Config(format!("{} lambdas for {} color classes", lambdas.len(), parts.len())));
        }
        let orders = match (&self.cfg.orders, self.cfg.m) {
            (Some(o), _) if o.len() == parts.len() => o.clone(),
            (Some(o), _) => return Err(CliError::Config(format!("{} orders for {} color classes", o.len(), parts.len()))),
            (None, Some(m)) => {
                let mut o = vec![0; parts.len()];
                o[0] = m;
                o
            }
            (None, None) => return Err(CliError::Config("`orders` or `m` is required".into())),
        };
        Ok(Some((parts, lambdas.iter().copied().map(C64::from).collect(), orders)))
    }

    fn constants(&self) -> Result<LongRangeConstants, CliError> {
        Ok(LongRangeConstants::for_hamiltonian(&self.h.uncolored(), self.alpha)?)
    }
}

#[derive(Serialize)]
struct ConstantsDoc {
    alpha: f64,
    g: f64,
    u: f64,
    k: usize,
    weak_decay: bool,
    g_convention: &'static str,
}

impl From<&LongRangeConstants> for ConstantsDoc {
    fn from(c: &LongRangeConstants) -> Self {
        Self { alpha: c.alpha, g: c.g, u: c.u, k: c.k, weak_decay: c.weak_decay, g_convention: "diagonal_pair_included" }
    }
}

#[derive(Serialize)]
struct Coefficient {
    n: usize,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct MultiCoefficient {
    degree: Vec<usize>,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct EstimateDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    method: Option<&'static str>,
    #[serde(rename = "N")]
    n: usize,
    m: usize,
    beta: ComplexDoc,
    beta_star: f64,
    coefficients: Vec<Coefficient>,
    #[serde(rename = "T_m")]
    t_m: ComplexDoc,
    error_bound: f64,
    certified: bool,
    wall_time_s: Option<f64>,
    constants: ConstantsDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    polymers: Option<usize>,
}

#[derive(Serialize)]
struct GeneralDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    method: Option<&'static str>,
    #[serde(rename = "N")]
    n: usize,
    orders: Vec<usize>,
    #[serde(rename = "M")]
    total_order: usize,
    lambdas: Vec<ComplexDoc>,
    beta_star: f64,
    coefficients: Vec<MultiCoefficient>,
    #[serde(rename = "T_m")]
    t_m: ComplexDoc,
    error_bound: f64,
    certified: bool,
    wall_time_s: Option<f64>,
    constants: ConstantsDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    polymers: Option<usize>,
}

fn coefficient_rows(coefficients: &[Coefficient]) -> Table {
    let mut t = Table::new(&["n", "re", "im"]);
    for c in coefficients {
        t.push(vec![c.n.to_string(), f(c.re), f(c.im)]);
    }
    t
}

fn multi_rows(coefficients: &[MultiCoefficient]) -> Table {
    let mut t = Table::new(&["degree", "re", "im"]);
    for c in coefficients {
        let degree: Vec<String> = c.degree.iter().map(usize::to_string).collect();
        t.push(vec![degree.join(";"), f(c.re), f(c.im)]);
    }
    t
}

fn single<T: Serialize>(ctx: &Context, doc: &T, table: impl FnOnce() -> Table) -> Rendered {
    match ctx.format {
        Format::Json => Rendered { body: json_line(doc), summary: None },
        Format::Csv => Rendered { body: table().render(), summary: Some(json_line(doc)) },
    }
}

fn multi_coefficients(series: &GeneralSeries) -> Vec<MultiCoefficient> {
    series.coefficients.iter().map(|(d, c)| MultiCoefficient { degree: d.clone(), re: c.re, im: c.im }).collect()
}

pub fn estimate(ctx: &Context) -> Result<Rendered, CliError> {
    let start = Instant::now();
    if let Some((parts, lambdas, orders)) = ctx.general()? {
        let refs: Vec<&Hamiltonian> = parts.iter().collect();
        let est = estimate_log_z_general(&refs, &lambdas, &ctx.rho, &orders, ctx.alpha, &ctx.expansion)?;
        let doc = GeneralDoc {
            method: None,
            n: ctx.h.n_sites(),
            total_order: est.series.order,
            orders,
            lambdas: lambdas.iter().map(|&l| l.into()).collect(),
            beta_star: est.constants.beta_star,
            coefficients: multi_coefficients(&est.series),
            t_m: est.value.into(),
            error_bound: est.certificate.error_bound,
            certified: est.certificate.certified,
            wall_time_s: ctx.elapsed(start),
            constants: (&est.constants).into(),
            polymers: Some(est.series.polymers),
        };
        return Ok(single(ctx, &doc, || multi_rows(&doc.coefficients)));
    }
    let (beta, m) = (ctx.beta()?, ctx.m()?);
    let h = ctx.h.uncolored();
    let constants = ctx.constants()?;
    let series = truncated_log_z(&h, &ctx.rho, m, &ctx.expansion)?;
    let cert = Certificate::single(h.n_sites(), beta, m, &constants);
    let doc = EstimateDoc {
        method: None,
        n: h.n_sites(),
        m,
        beta: beta.into(),
        beta_star: constants.beta_star,
        coefficients: (1..=m).map(|n| Coefficient { n, re: series.coefficients[n].re, im: series.coefficients[n].im }).collect(),
        t_m: series.evaluate(beta).into(),
        error_bound: cert.error_bound,
        certified: cert.certified,
        wall_time_s: ctx.elapsed(start),
        constants: (&constants).into(),
        polymers: Some(series.polymers),
    };
    Ok(single(ctx, &doc, || coefficient_rows(&doc.coefficients)))
}

/// Eigenvalues merged within the degeneracy tolerance, with multiplicity
/// and the mass of the reference state.
fn spectrum_rows(model: &ExactModel) -> Table {
    let mut t = Table::new(&["eigenvalue", "multiplicity", "weight"]);
    let (e, w) = (model.energies(), model.weights());
    let mut i = 0;
    while i < e.len() {
        let mut j = i + 1;
        while j < e.len() && e[j] - e[j - 1] <= DEGENERACY_TOL {
            j += 1;
        }
        let mean = e[i..j].iter().sum::<f64>() / (j - i) as f64;
        t.push(vec![f(mean), (j - i).to_string(), f(w[i..j].iter().sum())]);
        i = j;
    }
    t
}

pub fn exact(ctx: &Context) -> Result<Rendered, CliError> {
    let start = Instant::now();
    let constants = ctx.constants()?;
    if let Some((parts, lambdas, orders)) = ctx.general()? {
        let refs: Vec<&Hamiltonian> = parts.iter().collect();
        let value = exact_log_z_general(&refs, &lambdas, &ctx.rho, ctx.cap)?;
        let doc = GeneralDoc {
            method: Some("ed"),
            n: ctx.h.n_sites(),
            total_order: orders.iter().sum(),
            orders,
            lambdas: lambdas.iter().map(|&l| l.into()).collect(),
            beta_star: constants.beta_star,
            coefficients: Vec::new(),
            t_m: value.into(),
            error_bound: 0.0,
            certified: true,
            wall_time_s: ctx.elapsed(start),
            constants: (&constants).into(),
            polymers: None,
        };
        return Ok(single(ctx, &doc, || multi_rows(&[])));
    }
    let (beta, m) = (ctx.beta()?, ctx.m()?);
    let h = ctx.h.uncolored();
    let model = ExactModel::new(&h, &ctx.rho, ctx.cap)?;
    let value = model.log_z(beta)?;
    // c_n = (-1)^n κ_n / n!, available to order 8
    let kappa = cumulants(&h, &ctx.rho, m.min(8), ctx.cap)?;
    let coefficients = kappa
        .iter()
        .enumerate()
        .map(|(i, k)| {
            let n = i + 1;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            Coefficient { n, re: sign * k / factorial(n), im: 0.0 }
        })
        .collect();
    let doc = EstimateDoc {
        method: Some("ed"),
        n: h.n_sites(),
        m,
        beta: beta.into(),
        beta_star: constants.beta_star,
        coefficients,
        t_m: value.into(),
        error_bound: 0.0,
        certified: true,
        wall_time_s: ctx.elapsed(start),
        constants: (&constants).into(),
        polymers: None,
    };
    Ok(single(ctx, &doc, || spectrum_rows(&model)))
}

#[derive(Serialize)]
struct OrderRow {
    m: usize,
    estimate: ComplexDoc,
    abs_error: f64,
    error_bound: f64,
    bound_violated: bool,
}

#[derive(Serialize)]
struct CompareDoc {
    #[serde(rename = "N")]
    n: usize,
    m: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<ComplexDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambdas: Option<Vec<ComplexDoc>>,
    beta_star: f64,
    exact: ComplexDoc,
    estimate: ComplexDoc,
    abs_error: f64,
    error_bound: f64,
    certified: bool,
    /// Certified and the error exceeds the bound at some order.
    bound_violated: bool,
    orders: Vec<OrderRow>,
    wall_time_s: Option<f64>,
    constants: ConstantsDoc,
}

pub fn compare(ctx: &Context) -> Result<Rendered, CliError> {
    let start = Instant::now();
    let n = ctx.h.n_sites();
    let constants = ctx.constants()?;
    let (exact, partials, certs, beta, lambdas) = if let Some((parts, lambdas, orders)) = ctx.general()? {
        let refs: Vec<&Hamiltonian> = parts.iter().collect();
        let exact = exact_log_z_general(&refs, &lambdas, &ctx.rho, ctx.cap)?;
        let est = estimate_log_z_general(&refs, &lambdas, &ctx.rho, &orders, ctx.alpha, &ctx.expansion)?;
        let mut running = C64::new(0.0, 0.0);
        let mut partials = Vec::new();
        let mut certs = Vec::new();
        for total in 1..=est.series.order {
            running += est.series.degree_part(total, &lambdas);
            partials.push(running);
            certs.push(Certificate::general(n, &lambdas, total, &est.constants));
        }
        (exact, partials, certs, None, Some(lambdas.iter().map(|&l| l.into()).collect()))
    } else {
        let (beta, m) = (ctx.beta()?, ctx.m()?);
        let h = ctx.h.uncolored();
        let exact = ExactModel::new(&h, &ctx.rho, ctx.cap)?.log_z(beta)?;
        let series = truncated_log_z(&h, &ctx.rho, m, &ctx.expansion)?;
        let mut running = C64::new(0.0, 0.0);
        let mut partials = Vec::new();
        let mut certs = Vec::new();
        for j in 1..=m {
            running += series.coefficients[j] * beta.powu(j as u32);
            partials.push(running);
            certs.push(Certificate::single(n, beta, j, &constants));
        }
        (exact, partials, certs, Some(beta.into()), None)
    };
    if partials.is_empty() {
        return Err(CliError::Config("order must be at least 1".into()));
    }
    let orders: Vec<OrderRow> = partials
        .iter()
        .zip(&certs)
        .enumerate()
        .map(|(i, (p, c))| {
            let abs_error = (exact - p).norm();
            OrderRow { m: i + 1, estimate: (*p).into(), abs_error, error_bound: c.error_bound, bound_violated: c.certified && abs_error > c.error_bound }
        })
        .collect();
    let last = orders.last().unwrap();
    let cert = certs.last().unwrap();
    let doc = CompareDoc {
        n,
        m: orders.len(),
        beta,
        lambdas,
        beta_star: cert.beta_star,
        exact: exact.into(),
        estimate: last.estimate,
        abs_error: last.abs_error,
        error_bound: last.error_bound,
        certified: cert.certified,
        bound_violated: orders.iter().any(|o| o.bound_violated),
        wall_time_s: ctx.elapsed(start),
        constants: (&constants).into(),
        orders,
    };
    Ok(single(ctx, &doc, || {
        let mut t = Table::new(&["m", "re", "im", "abs_error", "error_bound", "bound_violated"]);
        for o in &doc.orders {
            t.push(vec![o.m.to_string(), f(o.estimate.re), f(o.estimate.im), f(o.abs_error), f(o.error_bound), o.bound_violated.to_string()]);
        }
        t
    }))
}

/// `{id: count}` in term order.
struct Terms<'a>(&'a Polymer);

impl Serialize for Terms<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.entries().len()))?;
        for (id, count) in self.0.entries() {
            map.serialize_entry(&id.to_string(), count)?;
        }
        map.end()
    }
}

#[derive(Serialize)]
struct PolymerDoc<'a> {
    terms: Terms<'a>,
}

#[derive(Serialize)]
struct ClusterDoc<'a> {
    polymers: Vec<PolymerDoc<'a>>,
    n: usize,
    norm: usize,
    ursell: f64,
    factor: u64,
}

pub fn enumerate(ctx: &Context) -> Result<Rendered, CliError> {
    let m = ctx.m()?;
    let mut body = Vec::new();
    let mut table = Table::new(&["n", "norm", "ursell", "factor", "polymers"]);
    let mut count = 0usize;
    for cluster in enumerate_clusters_with_cap(&ctx.h, m, ctx.expansion.ursell_cap) {
        let cluster = cluster?;
        count += 1;
        let polymers: Vec<PolymerDoc> =
            cluster.parts.iter().flat_map(|(p, c)| std::iter::repeat_with(move || PolymerDoc { terms: Terms(p) }).take(*c)).collect();
        match ctx.format {
            Format::Json => body.extend(json_line(&ClusterDoc { polymers, n: cluster.n, norm: cluster.norm, ursell: cluster.ursell, factor: cluster.factor })),
            Format::Csv => {
                let text: Vec<String> = cluster
                    .parts
                    .iter()
                    .flat_map(|(p, c)| {
                        let one: Vec<String> = p.entries().iter().map(|(id, k)| format!("{id}:{k}")).collect();
                        std::iter::repeat_n(one.join(" "), *c)
                    })
                    .collect();
                table.push(vec![cluster.n.to_string(), cluster.norm.to_string(), f(cluster.ursell), cluster.factor.to_string(), text.join("|")]);
            }
        }
    }
    #[derive(Serialize)]
    struct Summary {
        clusters: usize,
        m: usize,
    }
    let summary = json_line(&Summary { clusters: count, m });
    Ok(match ctx.format {
        Format::Json => Rendered { body, summary: None },
        Format::Csv => Rendered { body: table.render(), summary: Some(summary) },
    })
}

#[derive(Serialize)]
struct GaussDoc {
    mode: GaussMode,
    mean: f64,
    variance: f64,
    epsilon: f64,
    samples: usize,
}

#[derive(Serialize)]
struct DosRow {
    energy: f64,
    density: f64,
    cdos: f64,
    exact_cdos: f64,
}

#[derive(Serialize)]
struct DosDoc {
    #[serde(rename = "N")]
    n: usize,
    n_t: usize,
    dt: f64,
    e_bound: f64,
    de: f64,
    window: DosWindow,
    cdos_distance: f64,
    exact_mean: f64,
    exact_variance: f64,
    gauss: GaussDoc,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    rows: Vec<DosRow>,
}

pub fn dos(ctx: &Context) -> Result<Rendered, CliError> {
    let op = embed(&ctx.h, ctx.cap)?;
    let (default_dt, default_n, e_bound) = default_dos_grid(&op);
    let dt = ctx.cfg.dos.dt.unwrap_or(default_dt);
    let n_t = ctx.cfg.dos.n_t.unwrap_or(default_n);
    let model = ExactModel::from_operator(&op, &ctx.rho);
    let trace = model.time_trace(dt, n_t);
    let est = dos_fft(&trace, dt, e_bound, ctx.cfg.dos.window)?;
    let reference = model.measure();
    let total = reference.total();
    // The fit runs on the spectrum rescaled to [-1, 1].
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        est.energies.iter().zip(&est.density).filter(|(e, _)| e.abs() <= e_bound).map(|(e, p)| (e / e_bound, p * e_bound)).unzip();
    let fit = gauss_residual(&xs, &ys, ctx.cfg.dos.fit)?;
    let rows: Vec<DosRow> = est
        .energies
        .iter()
        .zip(&est.density)
        .zip(&est.cdos)
        .map(|((&energy, &density), &cdos)| DosRow { energy, density, cdos, exact_cdos: reference.cdf(energy) / total })
        .collect();
    let mut doc = DosDoc {
        n: ctx.h.n_sites(),
        n_t,
        dt,
        e_bound,
        de: est.de,
        window: ctx.cfg.dos.window,
        cdos_distance: est.cdos_distance(&reference),
        exact_mean: reference.mean(),
        exact_variance: reference.variance(),
        gauss: GaussDoc { mode: ctx.cfg.dos.fit, mean: fit.mean, variance: fit.variance, epsilon: fit.residual, samples: fit.samples },
        rows: Vec::new(),
    };
    Ok(match ctx.format {
        Format::Json => {
            doc.rows = rows;
            Rendered { body: json_line(&doc), summary: None }
        }
        Format::Csv => {
            let mut t = Table::new(&["energy", "density", "cdos", "exact_cdos"]);
            for r in &rows {
                t.push(vec![f(r.energy), f(r.density), f(r.cdos), f(r.exact_cdos)]);
            }
            Rendered { body: t.render(), summary: Some(json_line(&doc)) }
        }
    })
}

#[derive(Serialize)]
struct GridRow {
    kind: &'static str,
    beta: f64,
    variant: Option<CBetaVariant>,
    x: f64,
    value: f64,
    bound: f64,
    holds: Option<bool>,
}

#[derive(Serialize)]
struct StatsReport {
    beta: f64,
    beta_fraction: f64,
    variant: CBetaVariant,
    c_beta: f64,
    chernoff_holds: bool,
    mgf_holds: bool,
    zeta: f64,
}

#[derive(Serialize)]
struct DptRow {
    t: f64,
    exact_rate: Option<ComplexDoc>,
    exact_error: Option<String>,
    series_rate: ComplexDoc,
    error_bound: f64,
    certified: bool,
}

#[derive(Serialize)]
struct StatsDoc {
    #[serde(rename = "N")]
    n: usize,
    observable: &'static str,
    beta_star: f64,
    constants: ConstantsDoc,
    holds: bool,
    /// Berry-Esseen distance under the configured product state.
    zeta: Option<f64>,
    reports: Vec<StatsReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    dpt: Vec<DptRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    rows: Vec<GridRow>,
}

fn observable(ctx: &Context) -> Result<(DenseOperator, &'static str), CliError> {
    match ctx.cfg.stats.observable {
        Observable::Hamiltonian => Ok((embed(&ctx.h, ctx.cap)?, "hamiltonian")),
        Observable::Magnetization => {
            if ctx.h.local_dim() != 2 || ctx.h.lattice().dimension() != 1 {
                return Err(CliError::Config("the magnetization observable needs a spin-1/2 chain".into()));
            }
            Ok((embed(&build_field(ctx.h.n_sites(), 1.0)?, ctx.cap)?, "magnetization"))
        }
    }
}

pub fn stats(ctx: &Context) -> Result<Rendered, CliError> {
    let spec = &ctx.cfg.stats;
    let h = ctx.h.uncolored();
    let n = h.n_sites();
    let constants = ctx.constants()?;
    let (a, name) = observable(ctx)?;
    let variants: &[CBetaVariant] = match spec.variant {
        VariantChoice::Both => &[CBetaVariant::HalfRadius, CBetaVariant::FullRadius],
        VariantChoice::HalfRadius => &[CBetaVariant::HalfRadius],
        VariantChoice::FullRadius => &[CBetaVariant::FullRadius],
    };
    let deltas: Vec<f64> = spec.delta_fractions.iter().map(|d| d * n as f64).collect();
    let mut reports = Vec::new();
    let mut rows = Vec::new();
    for &fraction in &spec.beta_fractions {
        let beta = fraction * constants.beta_star;
        let measure = gibbs_measure(&h, &a, beta, ctx.cap)?;
        let zeta = berry_esseen(&measure)?;
        let taus = default_tau_grid(beta, constants.beta_star);
        for &variant in variants {
            let tail = chernoff_check(&measure, n, beta, &constants, variant, &deltas)?;
            let mgf = mgf_check(&measure, n, beta, &constants, variant, &taus)?;
            for ((&x, &value), &bound) in deltas.iter().zip(&tail.tails).zip(&tail.bounds) {
                rows.push(GridRow { kind: "chernoff", beta, variant: Some(variant), x, value, bound, holds: Some(value <= bound) });
            }
            for ((&x, &value), &bound) in taus.iter().zip(&mgf.values).zip(&mgf.bounds) {
                rows.push(GridRow { kind: "mgf", beta, variant: Some(variant), x, value, bound, holds: Some(value <= bound) });
            }
            reports.push(StatsReport { beta, beta_fraction: fraction, variant, c_beta: tail.c_beta, chernoff_holds: tail.holds, mgf_holds: mgf.holds, zeta });
        }
    }
    let zeta = match berry_esseen(&spectral_measure(&a, &ctx.rho)) {
        Ok(z) => Some(z),
        Err(clusterx::Error::ZeroVariance) => None,
        Err(e) => return Err(e.into()),
    };
    let mut dpt = Vec::new();
    if !spec.dpt_times.is_empty() {
        let m = ctx.cfg.m.unwrap_or(4);
        for p in dpt_scan(&h, &ctx.rho, &spec.dpt_times, m, ctx.alpha, &ctx.expansion, ctx.cap)? {
            let abs = p.exact_rate.map(|e| (e - p.series_rate).norm() * n as f64);
            rows.push(GridRow {
                kind: "dpt",
                beta: 0.0,
                variant: None,
                x: p.t,
                value: abs.unwrap_or(f64::NAN),
                bound: p.error_bound,
                holds: abs.map(|e| e <= p.error_bound),
            });
            dpt.push(DptRow {
                t: p.t,
                exact_rate: p.exact_rate.map(Into::into),
                exact_error: p.exact_error,
                series_rate: p.series_rate.into(),
                error_bound: p.error_bound,
                certified: p.certified,
            });
        }
    }
    let mut doc = StatsDoc {
        n,
        observable: name,
        beta_star: constants.beta_star,
        constants: (&constants).into(),
        holds: reports.iter().all(|r| r.chernoff_holds && r.mgf_holds),
        zeta,
        reports,
        dpt,
        rows: Vec::new(),
    };
    Ok(match ctx.format {
        Format::Json => {
            doc.rows = rows;
            Rendered { body: json_line(&doc), summary: None }
        }
        Format::Csv => {
            let mut t = Table::new(&["kind", "beta", "variant", "x", "value", "bound", "holds"]);
            for r in &rows {
                let variant = r.variant.map_or(String::new(), |v| match v {
                    CBetaVariant::HalfRadius => "half-radius".to_string(),
                    CBetaVariant::FullRadius => "full-radius".to_string(),
                });
                t.push(vec![r.kind.to_string(), f(r.beta), variant, f(r.x), f(r.value), f(r.bound), r.holds.map_or(String::new(), |h| h.to_string())]);
            }
            Rendered { body: t.render(), summary: Some(json_line(&doc)) }
        }
    })
}

#[derive(Serialize)]
struct BenchRow {
    sweep: &'static str,
    #[serde(rename = "N")]
    n: usize,
    m: usize,
    polymers: usize,
    wall_time_s: Option<f64>,
}

pub fn bench(ctx: &Context) -> Result<Rendered, CliError> {
    let spec = &ctx.cfg.bench;
    let mut rows = Vec::new();
    let h = ctx.h.uncolored();
    for &m in &spec.orders {
        let start = Instant::now();
        let series = truncated_log_z(&h, &ctx.rho, m, &ctx.expansion)?;
        rows.push(BenchRow { sweep: "m", n: h.n_sites(), m, polymers: series.polymers, wall_time_s: ctx.elapsed(start) });
    }
    for &size in &spec.sizes {
        let hs = ctx.cfg.hamiltonian_with_size(Some(size))?.uncolored();
        let rho = ctx.cfg.product_state(size, hs.local_dim())?;
        let start = Instant::now();
        let series = truncated_log_z(&hs, &rho, spec.m, &ctx.expansion)?;
        rows.push(BenchRow { sweep: "N", n: size, m: spec.m, polymers: series.polymers, wall_time_s: ctx.elapsed(start) });
    }
    #[derive(Serialize)]
    struct BenchDoc<'a> {
        rows: &'a [BenchRow],
    }
    let doc = BenchDoc { rows: &rows };
    Ok(single(ctx, &doc, || {
        let mut t = Table::new(&["sweep", "N", "m", "polymers", "wall_time_s"]);
        for r in &rows {
            t.push(vec![r.sweep.to_string(), r.n.to_string(), r.m.to_string(), r.polymers.to_string(), r.wall_time_s.map_or(String::new(), f)]);
        }
        t
    }))
}
