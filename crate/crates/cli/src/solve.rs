//! `fraclap solve`: grid solutions plus a JSON run report.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use fraclap::quadrature::{QuadratureSpec, ScalarField, Support};
use fraclap::solver::{
    fmt17, linspace, picard_semilinear, solve_ball_dirichlet, solve_halfspace_linear, ExteriorRule, GridFunction, HalfspaceBox,
    Nonlinearity, PicardOptions,
};
use fraclap::{Domain, FracParams};
use serde_json::{json, Value};

use crate::config::{Format, SolveSection};
use crate::output::{sibling, write_atomic};
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Problem {
    /// (-Δ)^s u = f in B_R, u = g outside, constant f and g (checks: ball-torsion, boundary-estimate, holder)
    Ball,
    /// u = ∫ G_∞^+ f for f = c on the slab 0 < x_1 < slab (checks: strip-mass, decay-regimes)
    HalfspaceLinear,
    /// Picard iteration of u = ∫ G_∞^+ u^q on a truncated box (checks: liouville, monotonicity)
    HalfspaceSemilinear,
}

impl Problem {
    fn name(self) -> &'static str {
        match self {
            Problem::Ball => "ball",
            Problem::HalfspaceLinear => "halfspace-linear",
            Problem::HalfspaceSemilinear => "halfspace-semilinear",
        }
    }
}

/// Problem options after merging flags and the `[solve]` section.
#[derive(Clone, Debug, Default)]
pub struct SolveOptions {
    pub radius: Option<f64>,
    pub nodes: Option<usize>,
    pub f: Option<f64>,
    pub g: Option<f64>,
    pub slab: Option<f64>,
    pub depth: Option<f64>,
    pub half_width: Option<f64>,
    pub normal_cells: Option<usize>,
    pub lateral_cells: Option<usize>,
    pub q: Option<f64>,
    pub u0: Option<f64>,
    pub range_max: Option<f64>,
    pub max_iter: Option<usize>,
}

impl SolveOptions {
    pub fn merged(self, file: &SolveSection) -> Self {
        SolveOptions {
            radius: self.radius.or(file.radius),
            nodes: self.nodes.or(file.nodes),
            f: self.f.or(file.f),
            g: self.g.or(file.g),
            slab: self.slab.or(file.slab),
            depth: self.depth.or(file.depth),
            half_width: self.half_width.or(file.half_width),
            normal_cells: self.normal_cells.or(file.normal_cells),
            lateral_cells: self.lateral_cells.or(file.lateral_cells),
            q: self.q.or(file.q),
            u0: self.u0.or(file.u0),
            range_max: self.range_max.or(file.range_max),
            max_iter: self.max_iter.or(file.max_iter),
        }
    }
}

/// What a solve produced: the files' contents and the exit status.
pub struct Outcome {
    pub field: Option<String>,
    pub report: Value,
    pub error: Option<CliError>,
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("{name} must be positive, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("{name} must be finite")))
    }
}

fn default_nodes(dim: usize) -> usize {
    match dim {
        1 => 41,
        2 => 21,
        _ => 9,
    }
}

/// Grid as CSV: `x1,...,xN,value`.
pub fn grid_csv(u: &GridFunction) -> String {
    let dim = u.params().dim();
    let mut out: String = (1..=dim).map(|k| format!("x{k},")).collect();
    out.push_str("value\n");
    for i in 0..u.len() {
        for c in u.node(i) {
            let _ = write!(out, "{},", fmt17(c));
        }
        let _ = writeln!(out, "{}", fmt17(u.values()[i]));
    }
    out
}

fn render_field(u: &GridFunction, format: Option<Format>) -> String {
    match format {
        Some(Format::Csv) => grid_csv(u),
        _ => u.to_text(),
    }
}

fn base_report(problem: Problem, params: &FracParams, seed: u64, spec: &QuadratureSpec) -> Value {
    json!({
        "problem": problem.name(),
        "params": params,
        "seed": seed,
        "quadrature": spec,
    })
}

pub fn solve(
    problem: Problem,
    params: &FracParams,
    opts: &SolveOptions,
    seed: u64,
    spec: &QuadratureSpec,
    format: Option<Format>,
) -> Result<Outcome, CliError> {
    let mut report = base_report(problem, params, seed, spec);
    let dim = params.dim();
    match problem {
        Problem::Ball => {
            let radius = positive("radius", opts.radius.unwrap_or(1.0))?;
            let nodes = opts.nodes.unwrap_or_else(|| default_nodes(dim));
            if nodes < 2 {
                return Err(CliError::Usage("nodes must be at least 2".into()));
            }
            let f = finite("f", opts.f.unwrap_or(1.0))?;
            let g = finite("g", opts.g.unwrap_or(0.0))?;
            let axes = vec![linspace(-radius, radius, nodes); dim];
            let solution = solve_ball_dirichlet(params, radius, &ScalarField::constant(f), &ScalarField::constant(g), axes, spec)?;
            let errors: Vec<Value> =
                solution.node_errors.iter().map(|(i, e)| json!({"node": i, "error": e.to_string()})).collect();
            let complete = errors.is_empty();
            report["radius"] = json!(radius);
            report["f"] = json!(f);
            report["g"] = json!(g);
            report["nodes_per_axis"] = json!(nodes);
            report["sup_norm"] = json!(solution.field.sup_norm());
            report["verdict"] = json!(if complete { "ok" } else { "tolerance-not-met" });
            report["node_errors"] = Value::Array(errors);
            let error = (!complete).then(|| {
                CliError::Numeric(format!("{} nodes missed the quadrature tolerance", solution.node_errors.len()))
            });
            Ok(Outcome { field: Some(render_field(&solution.field, format)), report, error })
        }
        Problem::HalfspaceLinear => {
            let slab = positive("slab", opts.slab.unwrap_or(1.0))?;
            let depth = positive("depth", opts.depth.unwrap_or(2.0 * slab))?;
            let cells = opts.normal_cells.unwrap_or(40);
            if cells == 0 {
                return Err(CliError::Usage("normal-cells must be at least 1".into()));
            }
            let c = finite("f", opts.f.unwrap_or(1.0))?;
            let f = ScalarField::constant(c).with_support(Support::Slab { lower: 0.0, upper: slab }).with_tangential_invariance();
            let mut axes = vec![linspace(0.0, depth, cells + 1)];
            axes.extend((1..dim).map(|_| vec![0.0]));
            let u = solve_halfspace_linear(params, &f, axes, spec)?;
            report["f"] = json!(c);
            report["slab"] = json!(slab);
            report["depth"] = json!(depth);
            report["normal_cells"] = json!(cells);
            report["sup_norm"] = json!(u.sup_norm());
            report["verdict"] = json!("ok");
            report["note"] = json!("data depend on x_1 only, so the solution is sampled on the normal axis");
            Ok(Outcome { field: Some(render_field(&u, format)), report, error: None })
        }
        Problem::HalfspaceSemilinear => {
            let q = opts.q.ok_or_else(|| CliError::Usage("halfspace-semilinear needs --q".into()))?;
            let range_max = positive("range-max", opts.range_max.unwrap_or(1e3))?;
            let nonlinearity = Nonlinearity::power(q, range_max)?;
            let mut bx = HalfspaceBox::default_for(dim);
            if let Some(v) = opts.depth {
                bx.depth = v;
            }
            if let Some(v) = opts.half_width {
                bx.half_width = v;
            }
            if let Some(v) = opts.normal_cells {
                bx.normal_cells = v;
            }
            if let Some(v) = opts.lateral_cells {
                bx.lateral_cells = v;
            }
            bx.validate(dim)?;
            let start = finite("u0", opts.u0.unwrap_or(0.01))?;
            let u0 = GridFunction::from_fn(*params, Domain::HalfSpace, bx.axes(dim), ExteriorRule::Zero, |x| {
                if x[0] > 0.0 {
                    start
                } else {
                    0.0
                }
            })?;
            let options = PicardOptions { max_iter: opts.max_iter.unwrap_or(PicardOptions::default().max_iter), ..Default::default() };
            report["q"] = json!(q);
            report["u0"] = json!(start);
            report["options"] = json!(options);
            match picard_semilinear(params, &nonlinearity, &u0, &bx, &options, spec) {
                Ok((u, mut run)) => {
                    run.seed = Some(seed);
                    report["run"] = json!(run);
                    report["verdict"] = json!(run.verdict.as_str());
                    Ok(Outcome { field: Some(render_field(&u, format)), report, error: None })
                }
                Err(failure) => {
                    let mut run = failure.report;
                    run.seed = Some(seed);
                    report["run"] = json!(run);
                    report["verdict"] = json!("failed");
                    report["error"] = json!(failure.error.to_string());
                    Ok(Outcome { field: None, report, error: Some(CliError::from(failure.error)) })
                }
            }
        }
    }
}

/// Writes the field (when there is one) and `<output>.report.json`.
pub fn write(outcome: &Outcome, output: &Path) -> Result<PathBuf, CliError> {
    if let Some(field) = &outcome.field {
        write_atomic(output, field)?;
    }
    let report_path = sibling(output, ".report.json");
    let mut text = serde_json::to_string_pretty(&outcome.report).expect("report serializes");
    text.push('\n');
    write_atomic(&report_path, &text)?;
    Ok(report_path)
}
