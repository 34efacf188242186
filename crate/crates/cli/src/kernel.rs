//! `fraclap kernel`: pointwise kernel tables.

use std::fmt::Write as _;
use std::path::Path;

use clap::ValueEnum;
use fraclap::solver::fmt17;
use fraclap::{Error, FracParams, Kernels};
use serde_json::{json, Value};

use crate::config::Format;
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Target {
    /// Poisson kernel of the ball B_R (check: poisson-normalization)
    PoissonBall,
    /// Green function of the ball B_R (checks: green-symmetry, kernel-bounds)
    GreenBall,
    /// Green function of the half-space (checks: reflection-inequalities, green-limit, kernel-bounds)
    GreenHalfspace,
    /// Fundamental solution of (-Δ)^s (check: holder)
    Riesz,
    /// H(r, t) with G = κ H(|x - y|², 4 x_1 y_1); rows hold r t (check: h-monotonicity)
    #[value(name = "H", alias = "h")]
    H,
}

impl Target {
    fn name(self) -> &'static str {
        match self {
            Target::PoissonBall => "poisson-ball",
            Target::GreenBall => "green-ball",
            Target::GreenHalfspace => "green-halfspace",
            Target::Riesz => "riesz",
            Target::H => "H",
        }
    }

    /// Numbers per input row.
    fn arity(self, dim: usize) -> usize {
        match self {
            Target::H => 2,
            _ => 2 * dim,
        }
    }
}

/// One evaluated row.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub value: f64,
    pub flag: String,
}

/// Splits a points file into rows of `arity` numbers. Blank lines and `#`
/// comments are skipped; numbers are separated by whitespace or commas.
pub fn parse_points(text: &str, arity: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split(|c: char| c == ',' || c.is_whitespace()).filter(|f| !f.is_empty()).collect();
        if fields.len() != arity {
            return Err(CliError::Usage(format!("points line {}: expected {arity} numbers, found {}", n + 1, fields.len())));
        }
        let row = fields
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| CliError::Usage(format!("points line {}: '{f}' is not a number", n + 1))))
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn inline_rows(values: &[f64], arity: usize) -> Result<Vec<Vec<f64>>, CliError> {
    if values.len() % arity != 0 {
        return Err(CliError::Usage(format!(
            "dimension mismatch: {} inline numbers do not split into rows of {arity}",
            values.len()
        )));
    }
    Ok(values.chunks(arity).map(<[f64]>::to_vec).collect())
}

pub fn evaluate(target: Target, params: &FracParams, radius: f64, rows: &[Vec<f64>]) -> Result<Vec<Row>, CliError> {
    let k = Kernels::new(*params);
    let half = target.arity(params.dim()) / 2;
    rows.iter()
        .map(|row| {
            let (x, y) = row.split_at(half);
            let result = match target {
                Target::PoissonBall => k.poisson_ball(radius, x, y),
                Target::GreenBall => k.green_ball(radius, x, y),
                Target::GreenHalfspace => k.green_halfspace(x, y),
                Target::Riesz => k.riesz_potential(x, y),
                Target::H => k.h_function(x[0], y[0]),
            };
            let (value, flag) = match result {
                Ok(v) if target != Target::H && x == y => (v, "diagonal-limit".to_string()),
                Ok(v) if outside(target, radius, x, y) => (v, "outside-domain".to_string()),
                Ok(v) => (v, "ok".to_string()),
                Err(Error::DiagonalSingularity) => (f64::INFINITY, "diagonal".to_string()),
                Err(Error::Domain(msg)) => (f64::NAN, format!("domain: {msg}")),
                Err(Error::InvalidParams(msg)) if target != Target::H => return Err(CliError::Usage(msg)),
                Err(e) => return Err(e.into()),
            };
            Ok(Row { x: x.to_vec(), y: y.to_vec(), value, flag })
        })
        .collect()
}

/// The kernel is zero by definition at this pair.
fn outside(target: Target, radius: f64, x: &[f64], y: &[f64]) -> bool {
    let n2 = |p: &[f64]| p.iter().map(|v| v * v).sum::<f64>();
    let r2 = radius * radius;
    match target {
        Target::PoissonBall => !(n2(x) < r2 && n2(y) > r2),
        Target::GreenBall => !(n2(x) < r2 && n2(y) < r2),
        Target::GreenHalfspace => x[0] == 0.0 || y[0] == 0.0,
        Target::Riesz | Target::H => false,
    }
}

pub const CSV_HEADER: &str = "target,N,s,regime,x,y,value,flag";

fn coords(p: &[f64]) -> String {
    p.iter().map(|v| fmt17(*v)).collect::<Vec<_>>().join(" ")
}

pub fn render(target: Target, params: &FracParams, rows: &[Row], format: Format) -> String {
    match format {
        Format::Csv => {
            let mut out = format!("{CSV_HEADER}\n");
            for r in rows {
                let flag = if r.flag.contains([',', '"']) { format!("\"{}\"", r.flag.replace('"', "\"\"")) } else { r.flag.clone() };
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{flag}",
                    target.name(),
                    params.dim(),
                    fmt17(params.s()),
                    params.regime(),
                    coords(&r.x),
                    coords(&r.y),
                    fmt17(r.value)
                );
            }
            out
        }
        Format::Json => {
            let items: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "target": target.name(),
                        "N": params.dim(),
                        "s": params.s(),
                        "regime": params.regime().to_string(),
                        "x": r.x,
                        "y": r.y,
                        "value": if r.value.is_finite() { json!(r.value) } else { json!(r.value.to_string()) },
                        "flag": r.flag,
                    })
                })
                .collect();
            let mut text = serde_json::to_string_pretty(&Value::Array(items)).expect("rows serialize");
            text.push('\n');
            text
        }
    }
}

pub struct KernelArgs<'a> {
    pub target: Target,
    pub params: FracParams,
    pub radius: f64,
    pub points: Option<&'a Path>,
    pub values: &'a [f64],
    pub format: Format,
    pub output: Option<&'a Path>,
}

pub fn run(args: KernelArgs<'_>) -> Result<(), CliError> {
    if !(args.radius > 0.0 && args.radius.is_finite()) {
        return Err(CliError::Usage(format!("radius must be positive, got {}", args.radius)));
    }
    let arity = args.target.arity(args.params.dim());
    let rows = match (args.points, args.values.is_empty()) {
        (Some(_), false) => return Err(CliError::Usage("give either --points or inline values, not both".into())),
        (Some(path), true) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            parse_points(&text, arity)?
        }
        (None, false) => inline_rows(args.values, arity)?,
        (None, true) => return Err(CliError::Usage("no points: give --points FILE or inline values".into())),
    };
    let table = evaluate(args.target, &args.params, args.radius, &rows)?;
    crate::output::emit(args.output, &render(args.target, &args.params, &table, args.format))
}
