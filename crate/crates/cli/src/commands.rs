use std::f64::consts::PI;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::Args;
use nodal_transport::graph_uncertainty::{
    design_extremality_experiment, graph_w1, perfect_domination_check, search_designs,
    uncertainty_product_graph, verify_design, DesignCertificate, Graph, SearchMode, VertexFunction,
};
use nodal_transport::spectral_cube::band_sweep;
use nodal_transport::uncertainty::{
    critical_scale, cube_decomposition, scaling_sweep_with, uncertainty_product_at, Resolution,
};
use nodal_transport::{sample_family, FamilySpec, Method, SolverConfig};
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::Global;
use crate::output::Run;

fn solver(method: Method, p: f64, reg: Option<f64>) -> anyhow::Result<SolverConfig> {
    let cfg = SolverConfig {
        method,
        p,
        reg,
        ..SolverConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

/// `auto`, `full`, or a number of transport atoms per axis.
fn resolution(spec: &str, dim: usize, n: usize) -> anyhow::Result<Resolution> {
    Ok(match spec {
        "auto" => Resolution::auto(dim, n),
        "full" => Resolution::Full,
        s => Resolution::Blocks(
            s.parse()
                .ok()
                .filter(|b| *b > 0)
                .with_context(|| format!("resolution must be auto, full or a positive integer, got `{s}`"))?,
        ),
    })
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: nodal_transport::Error| e.to_string())
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

fn default_dim() -> usize {
    2
}
fn default_p() -> f64 {
    1.0
}
fn default_auto() -> String {
    "auto".into()
}
fn default_trig() -> String {
    "trig".into()
}
fn default_nauru() -> String {
    "nauru".into()
}

// ---------------------------------------------------------------- verify-grid

#[derive(Args, Debug, Serialize)]
pub struct VerifyGridArgs {
    /// Dimension.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    d: Option<usize>,
    /// Cells per axis.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    /// Number of corpus members (seeds `seed..seed+samples`).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    /// trig, bump, piecewise.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    family: Option<String>,
    #[arg(long, value_parser = parse_method)]
    #[serde(skip_serializing_if = "Option::is_none")]
    method: Option<Method>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    reg: Option<f64>,
    /// auto, full, or transport atoms per axis.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    resolution: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyGridConfig {
    #[serde(default = "default_dim")]
    d: usize,
    #[serde(default = "default_grid_n")]
    n: usize,
    #[serde(default = "default_samples")]
    samples: usize,
    #[serde(default = "default_trig")]
    family: String,
    #[serde(default)]
    method: MethodField,
    #[serde(default = "default_p")]
    p: f64,
    #[serde(default)]
    reg: Option<f64>,
    #[serde(default = "default_auto")]
    resolution: String,
}

fn default_grid_n() -> usize {
    128
}
fn default_samples() -> usize {
    50
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(transparent)]
struct MethodField(Method);

impl Default for MethodField {
    fn default() -> Self {
        Self(Method::Exact)
    }
}

const GRID_HEADER: [&str; 11] = [
    "d",
    "n",
    "eps",
    "ratio",
    "w",
    "nodal",
    "lhs",
    "rhs",
    "quotient",
    "method",
    "resolution",
];

pub fn verify_grid(global: &Global, cfg: VerifyGridConfig) -> anyhow::Result<Run> {
    let solver = solver(cfg.method.0, cfg.p, cfg.reg)?;
    let res = resolution(&cfg.resolution, cfg.d, cfg.n)?;
    if cfg.samples == 0 {
        bail!("samples must be positive");
    }
    let seeds: Vec<u64> = (0..cfg.samples as u64).map(|i| global.seed + i).collect();
    let reports = seeds
        .par_iter()
        .map(|&seed| {
            let f = sample_family(&FamilySpec::named(&cfg.family, cfg.d, cfg.n, seed)?)?;
            Ok((seed, uncertainty_product_at(&f, &solver, res)?))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let mut header = GRID_HEADER.to_vec();
    header.extend(["seed", "l1", "linf", "alpha", "converged"]);
    let rows = reports
        .iter()
        .map(|(seed, r)| {
            vec![
                r.dim.to_string(),
                r.n.to_string(),
                String::new(),
                fmt(r.ratio),
                fmt(r.w),
                fmt(r.nodal),
                fmt(r.lhs),
                fmt(r.rhs),
                fmt(r.quotient),
                r.method.to_string(),
                r.resolution.to_string(),
                seed.to_string(),
                fmt(r.l1),
                fmt(r.linf),
                fmt(r.alpha),
                r.converged.to_string(),
            ]
        })
        .collect();
    let q: Vec<f64> = reports.iter().map(|r| r.1.quotient).collect();
    let min_q = q.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Run {
        subcommand: "verify-grid",
        config: serde_json::to_value(&cfg)?,
        header,
        rows,
        summary: json!({
            "samples": q.len(),
            "min_quotient": min_q,
            "max_quotient": q.iter().copied().fold(0.0, f64::max),
            "all_positive": q.iter().all(|v| *v > 0.0),
        }),
        dumps: Vec::new(),
        inputs: Vec::new(),
    })
}

// ---------------------------------------------------------------- proof-trace

#[derive(Args, Debug, Serialize)]
pub struct ProofTraceArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    d: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    family: Option<String>,
    /// Cube sizes; each must be `1/q` with `q` dividing `n`. Default: the
    /// grid-aligned critical scale of each function.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    eps: Option<Vec<f64>>,
    /// Also write every cube to cubes.json.
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    dump_cubes: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProofTraceConfig {
    #[serde(default = "default_dim")]
    d: usize,
    #[serde(default = "default_grid_n")]
    n: usize,
    #[serde(default = "one")]
    samples: usize,
    #[serde(default = "default_trig")]
    family: String,
    #[serde(default)]
    eps: Option<Vec<f64>>,
    #[serde(default)]
    dump_cubes: bool,
}

fn one() -> usize {
    1
}

pub fn proof_trace(global: &Global, cfg: ProofTraceConfig) -> anyhow::Result<Run> {
    if cfg.samples == 0 {
        bail!("samples must be positive");
    }
    let seeds: Vec<u64> = (0..cfg.samples as u64).map(|i| global.seed + i).collect();
    let traces = seeds
        .par_iter()
        .map(|&seed| {
            let f = sample_family(&FamilySpec::named(&cfg.family, cfg.d, cfg.n, seed)?)?;
            let nodal = f.nodal_measure();
            let crit = critical_scale(&f, nodal)?;
            let eps_list = cfg.eps.clone().unwrap_or_else(|| vec![crit.eps_aligned]);
            let decs = eps_list
                .iter()
                .map(|&e| cube_decomposition(&f, e))
                .collect::<nodal_transport::Result<Vec<_>>>()?;
            Ok((seed, nodal, crit, decs))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let header = vec![
        "seed",
        "d",
        "n",
        "eps",
        "ratio",
        "nodal",
        "negligible",
        "significant",
        "balanced",
        "unbalanced",
        "b_lower",
        "b_lower_rigorous",
        "eps_star",
        "eps_aligned",
    ];
    let mut rows = Vec::new();
    let mut cubes = Vec::new();
    for (seed, nodal, crit, decs) in &traces {
        for dec in decs {
            rows.push(vec![
                seed.to_string(),
                dec.dim.to_string(),
                cfg.n.to_string(),
                fmt(dec.epsilon),
                fmt(crit.ratio),
                fmt(*nodal),
                dec.negligible.to_string(),
                dec.significant.to_string(),
                dec.balanced.to_string(),
                dec.unbalanced.to_string(),
                fmt(dec.bounds.b_lower),
                fmt(dec.bounds.b_lower_rigorous),
                fmt(crit.eps_star),
                fmt(crit.eps_aligned),
            ]);
            if cfg.dump_cubes {
                cubes.push(json!({"seed": seed, "decomposition": dec}));
            }
        }
    }
    let below = traces
        .iter()
        .flat_map(|t| t.3.iter())
        .filter(|d| (d.significant as f64) < d.bounds.b_lower_rigorous)
        .count();
    let dumps = if cfg.dump_cubes {
        vec![("cubes.json", serde_json::Value::Array(cubes))]
    } else {
        Vec::new()
    };
    Ok(Run {
        subcommand: "proof-trace",
        config: serde_json::to_value(&cfg)?,
        header,
        rows,
        summary: json!({
            "decompositions": traces.iter().map(|t| t.3.len()).sum::<usize>(),
            "below_rigorous_bound": below,
        }),
        dumps,
        inputs: Vec::new(),
    })
}

// ---------------------------------------------------------------- extremal

#[derive(Args, Debug, Serialize)]
pub struct ExtremalArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    d: Option<usize>,
    /// Number of bumps.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<usize>,
    /// Bump radii.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    eps: Option<Vec<f64>>,
    #[arg(long, value_parser = parse_method)]
    #[serde(skip_serializing_if = "Option::is_none")]
    method: Option<Method>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    reg: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    resolution: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtremalConfig {
    #[serde(default = "default_dim")]
    d: usize,
    #[serde(default = "default_points")]
    points: usize,
    #[serde(default = "default_eps_sweep")]
    eps: Vec<f64>,
    #[serde(default)]
    method: MethodField,
    #[serde(default = "default_p")]
    p: f64,
    #[serde(default)]
    reg: Option<f64>,
    #[serde(default = "default_auto")]
    resolution: String,
}

fn default_points() -> usize {
    16
}
fn default_eps_sweep() -> Vec<f64> {
    vec![0.02, 0.014, 0.01, 0.007]
}

pub fn extremal(_global: &Global, cfg: ExtremalConfig) -> anyhow::Result<Run> {
    let solver = solver(cfg.method.0, cfg.p, cfg.reg)?;
    // Validate the resolution once; it is re-derived per grid size.
    resolution(&cfg.resolution, cfg.d, 1)?;
    let sweep = scaling_sweep_with(cfg.d, cfg.points, &cfg.eps, &solver, |fam| {
        resolution(&cfg.resolution, cfg.d, fam.grid_cells()).unwrap_or(Resolution::Full)
    })?;
    let mut header = GRID_HEADER.to_vec();
    header.extend([
        "points",
        "analytic_ratio",
        "analytic_nodal",
        "analytic_w1",
        "analytic_lhs",
    ]);
    let rows = sweep
        .rows
        .iter()
        .map(|r| {
            vec![
                cfg.d.to_string(),
                r.cells.to_string(),
                fmt(r.eps),
                fmt(r.ratio),
                fmt(r.w),
                fmt(r.nodal),
                fmt(r.lhs),
                fmt(r.rhs),
                fmt(r.quotient),
                r.method.to_string(),
                r.resolution.to_string(),
                cfg.points.to_string(),
                fmt(r.analytic.ratio),
                fmt(r.analytic.nodal),
                fmt(r.analytic.w1),
                fmt(r.analytic.lhs),
            ]
        })
        .collect();
    Ok(Run {
        subcommand: "extremal",
        config: serde_json::to_value(&cfg)?,
        header,
        rows,
        summary: json!({"slope": sweep.slope, "target": sweep.target}),
        dumps: Vec::new(),
        inputs: Vec::new(),
    })
}

// ---------------------------------------------------------------- spectral

#[derive(Args, Debug, Serialize)]
pub struct SpectralArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    d: Option<usize>,
    /// Band thresholds; a trailing `pi2` multiplies by π² (e.g. `4pi2`).
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<Vec<String>>,
    /// Seeds per threshold.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    #[arg(long, value_parser = parse_method)]
    #[serde(skip_serializing_if = "Option::is_none")]
    method: Option<Method>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    reg: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum LambdaSpec {
    Value(f64),
    Text(String),
}

impl LambdaSpec {
    fn value(&self) -> anyhow::Result<f64> {
        let v = match self {
            Self::Value(v) => *v,
            Self::Text(s) => {
                let s = s.trim();
                match s.strip_suffix("pi2") {
                    Some(m) => m.trim().parse::<f64>().map(|m| m * PI * PI),
                    None => s.parse::<f64>(),
                }
                .with_context(|| format!("bad lambda `{s}`"))?
            }
        };
        if !(v > 0.0 && v.is_finite()) {
            bail!("lambda must be positive, got {v}");
        }
        Ok(v)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralConfig {
    #[serde(default = "default_dim")]
    d: usize,
    #[serde(default = "default_lambdas")]
    lambda: Vec<LambdaSpec>,
    #[serde(default = "default_spectral_samples")]
    samples: usize,
    #[serde(default)]
    method: MethodField,
    #[serde(default)]
    reg: Option<f64>,
}

fn default_lambdas() -> Vec<LambdaSpec> {
    ["4pi2", "16pi2", "64pi2", "256pi2"]
        .iter()
        .map(|s| LambdaSpec::Text(s.to_string()))
        .collect()
}
fn default_spectral_samples() -> usize {
    5
}

pub fn spectral(global: &Global, cfg: SpectralConfig) -> anyhow::Result<Run> {
    let solver = solver(cfg.method.0, 1.0, cfg.reg)?;
    let lambdas = cfg
        .lambda
        .iter()
        .map(LambdaSpec::value)
        .collect::<anyhow::Result<Vec<_>>>()?;
    if cfg.samples == 0 {
        bail!("samples must be positive");
    }
    let seeds: Vec<u64> = (0..cfg.samples as u64).map(|i| global.seed + i).collect();
    let sweep = band_sweep(cfg.d, &lambdas, &seeds, Default::default(), &solver)?;
    let header = vec![
        "d",
        "n",
        "lambda",
        "seed",
        "modes",
        "l1",
        "linf",
        "ratio",
        "w",
        "nodal",
        "w_over_l1",
        "heat_quotient",
        "product_quotient",
        "nodal_quotient",
        "method",
        "resolution",
    ];
    let rows = sweep
        .rows
        .iter()
        .map(|r| {
            vec![
                cfg.d.to_string(),
                r.n.to_string(),
                fmt(r.lambda),
                r.seed.to_string(),
                r.modes.to_string(),
                fmt(r.l1),
                fmt(r.linf),
                fmt(r.ratio),
                fmt(r.w),
                fmt(r.nodal),
                fmt(r.w_over_l1),
                fmt(r.heat_quotient),
                fmt(r.product_quotient),
                fmt(r.nodal_quotient),
                r.method.to_string(),
                r.resolution.to_string(),
            ]
        })
        .collect();
    let heat = if lambdas.len() > 1 {
        Some(sweep.heat_slope()?)
    } else {
        None
    };
    let nodal = if lambdas.len() > 1 {
        Some(sweep.nodal_slope()?)
    } else {
        None
    };
    Ok(Run {
        subcommand: "spectral",
        config: serde_json::to_value(&cfg)?,
        header,
        rows,
        summary: json!({
            "heat_slope": heat,
            "nodal_slope": nodal,
            "min_nodal_quotient": sweep.rows.iter().map(|r| r.nodal_quotient).fold(f64::INFINITY, f64::min),
        }),
        dumps: Vec::new(),
        inputs: Vec::new(),
    })
}

// ---------------------------------------------------------------- graph

fn load_graph(spec: &str) -> anyhow::Result<(Graph, Vec<PathBuf>)> {
    let g = Graph::resolve(spec)?;
    let inputs = if std::path::Path::new(spec).is_file() {
        vec![PathBuf::from(spec)]
    } else {
        Vec::new()
    };
    Ok((g, inputs))
}

#[derive(Args, Debug, Serialize)]
pub struct GraphArgs {
    /// Built-in name (nauru, mcgee, path:N, cycle:N, complete:N) or an
    /// edge-list file.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    graph: Option<String>,
    /// Use the centred indicator of these 1-based vertices.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    subset: Option<Vec<usize>>,
    /// File with one value per vertex (whitespace separated).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    values: Option<PathBuf>,
    /// Also write the optimal edge flow and potentials to flow.json.
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    dump_flow: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    #[serde(default = "default_nauru")]
    graph: String,
    #[serde(default)]
    subset: Option<Vec<usize>>,
    #[serde(default)]
    values: Option<PathBuf>,
    #[serde(default)]
    dump_flow: bool,
}

pub fn graph(global: &Global, cfg: GraphConfig) -> anyhow::Result<Run> {
    let (g, mut inputs) = load_graph(&cfg.graph)?;
    let f = match (&cfg.subset, &cfg.values) {
        (Some(_), Some(_)) => bail!("give either subset or values, not both"),
        (Some(s), None) => VertexFunction::centered_indicator(g.n(), s)?,
        (None, Some(path)) => {
            let text =
                std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let values = text
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .with_context(|| format!("bad value `{t}` in {}", path.display()))
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            inputs.push(path.clone());
            VertexFunction::new(values)?
        }
        (None, None) => {
            // Seeded random values, centred.
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(global.seed);
            let mut v: Vec<f64> = (0..g.n()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let mean = v.iter().sum::<f64>() / g.n() as f64;
            v.iter_mut().for_each(|x| *x -= mean);
            VertexFunction::new(v)?
        }
    };
    let product = uncertainty_product_graph(&g, &f)?;
    let header = vec![
        "graph",
        "n",
        "edges",
        "w1",
        "boundary",
        "product",
        "l1",
        "w1_normalized",
        "product_normalized",
    ];
    let rows = vec![vec![
        cfg.graph.clone(),
        g.n().to_string(),
        g.edges().len().to_string(),
        fmt(product.w1),
        product.boundary.to_string(),
        fmt(product.product),
        fmt(product.l1),
        fmt(product.w1_normalized),
        fmt(product.product_normalized),
    ]];
    let mut dumps = Vec::new();
    if cfg.dump_flow {
        let t = graph_w1(&g, &f)?;
        dumps.push((
            "flow.json",
            json!({"edges": g.edges(), "values": f.values(), "transport": t}),
        ));
    }
    Ok(Run {
        subcommand: "graph",
        config: serde_json::to_value(&cfg)?,
        header,
        rows,
        summary: serde_json::to_value(&product)?,
        dumps,
        inputs,
    })
}

// ---------------------------------------------------------------- designs

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DesignMode {
    Verify,
    Exhaustive,
    Random,
    Extremality,
}

#[derive(Args, Debug, Serialize)]
pub struct DesignsArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    graph: Option<String>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    mode: Option<DesignMode>,
    /// Subset size for search and extremality modes.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    size: Option<usize>,
    /// Number of nontrivial eigenfunctions to certify.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    /// 1-based vertices for verify mode.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    subset: Option<Vec<usize>>,
    /// Random subsets for random and extremality modes.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignsConfig {
    #[serde(default = "default_nauru")]
    graph: String,
    #[serde(default = "default_mode")]
    mode: DesignMode,
    #[serde(default)]
    size: Option<usize>,
    #[serde(default)]
    k: Option<usize>,
    #[serde(default)]
    subset: Option<Vec<usize>>,
    #[serde(default = "default_design_samples")]
    samples: usize,
}

fn default_mode() -> DesignMode {
    DesignMode::Exhaustive
}
fn default_design_samples() -> usize {
    1000
}

fn certificate_row(g: &Graph, c: &DesignCertificate) -> Vec<String> {
    let checked = c.residuals[..c.k_eigenspaces].iter().copied().fold(0.0, f64::max);
    vec![
        c.subset
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" "),
        c.k.to_string(),
        c.pass.to_string(),
        c.orthogonal_eigenspaces.to_string(),
        c.orthogonal_eigenfunctions.to_string(),
        c.orthogonal_eigenfunctions_total.to_string(),
        c.orthogonal_eigenvectors.to_string(),
        fmt(checked),
        perfect_domination_check(g, &c.subset).to_string(),
    ]
}

const CERT_HEADER: [&str; 9] = [
    "subset",
    "k",
    "pass",
    "orthogonal_eigenspaces",
    "orthogonal_eigenfunctions",
    "orthogonal_eigenfunctions_total",
    "orthogonal_eigenvectors",
    "max_checked_residual",
    "perfect_domination",
];

pub fn designs(global: &Global, cfg: DesignsConfig) -> anyhow::Result<Run> {
    let (g, inputs) = load_graph(&cfg.graph)?;
    let k = cfg.k.unwrap_or(g.n() - 1);
    let size = || -> anyhow::Result<usize> {
        cfg.size
            .or(cfg.subset.as_ref().map(Vec::len))
            .context("size is required for this mode")
    };
    let config = serde_json::to_value(&cfg)?;
    match cfg.mode {
        DesignMode::Verify => {
            let subset = cfg.subset.as_ref().context("verify mode needs --subset")?;
            let c = verify_design(&g, subset, k)?;
            Ok(Run {
                subcommand: "designs",
                config,
                header: CERT_HEADER.to_vec(),
                rows: vec![certificate_row(&g, &c)],
                summary: json!({"pass": c.pass, "orthogonal_eigenfunctions": c.orthogonal_eigenfunctions}),
                dumps: vec![("certificates.json", serde_json::to_value([&c])?)],
                inputs,
            })
        }
        DesignMode::Exhaustive | DesignMode::Random => {
            let mode = if cfg.mode == DesignMode::Exhaustive {
                SearchMode::Exhaustive
            } else {
                SearchMode::Randomized {
                    samples: cfg.samples,
                    seed: global.seed,
                }
            };
            let search = search_designs(&g, size()?, k, mode)?;
            Ok(Run {
                subcommand: "designs",
                config,
                header: CERT_HEADER.to_vec(),
                rows: search.best.iter().map(|c| certificate_row(&g, c)).collect(),
                summary: json!({
                    "examined": search.examined.to_string(),
                    "best_eigenfunctions": search.best_eigenfunctions,
                    "maximisers": search.best.len(),
                }),
                dumps: vec![("certificates.json", serde_json::to_value(&search.best)?)],
                inputs,
            })
        }
        DesignMode::Extremality => {
            let t = design_extremality_experiment(&g, size()?, cfg.samples, global.seed)?;
            let subset = t
                .design
                .subset
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(" ");
            let mut rows = vec![vec!["design".into(), subset, fmt(t.design_product.product)]];
            rows.extend(
                t.random_products
                    .iter()
                    .enumerate()
                    .map(|(i, p)| vec!["random".into(), i.to_string(), fmt(*p)]),
            );
            Ok(Run {
                subcommand: "designs",
                config,
                header: vec!["kind", "subset", "product"],
                rows,
                summary: json!({
                    "design": t.design.subset,
                    "design_product": t.design_product.product,
                    "random_median": t.random_median,
                    "random_min": t.random_min,
                    "fraction_below_design": t.fraction_below_design,
                }),
                dumps: vec![("extremality.json", serde_json::to_value(&t)?)],
                inputs,
            })
        }
    }
}
