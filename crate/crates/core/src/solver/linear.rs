//! Linear Dirichlet problems through their Green representation.

use rayon::prelude::*;

use super::grid::{ExteriorRule, GridFunction};
use crate::error::{Error, Result};
use crate::kernels::{norm2, Domain};
use crate::params::FracParams;
use crate::quadrature::{ball_green_integral, exterior_poisson_integral, halfspace_green_integral, QuadratureSpec, ScalarField};

/// Result of [`solve_ball_dirichlet`].
#[derive(Clone, Debug)]
pub struct BallSolution {
    pub field: GridFunction,
    /// Nodes whose integrals stopped short of the tolerance; their values are
    /// the achieved estimates.
    pub node_errors: Vec<(usize, Error)>,
}

fn keep_estimate(result: Result<f64>, node: usize, errors: &mut Vec<(usize, Error)>) -> Result<f64> {
    match result {
        Ok(v) => Ok(v),
        Err(e @ Error::ToleranceNotMet { estimate, .. }) if estimate.is_finite() => {
            errors.push((node, e));
            Ok(estimate)
        }
        Err(e) => Err(e),
    }
}

/// Solves `(-Δ)^s u = f` in `B_R`, `u = g` outside, at the nodes of `axes`:
/// `u = ∫ Γ_R g + ∫ G_R f` inside the ball and `u = g` elsewhere.
pub fn solve_ball_dirichlet(
    params: &FracParams,
    radius: f64,
    f: &ScalarField,
    g: &ScalarField,
    axes: Vec<Vec<f64>>,
    spec: &QuadratureSpec,
) -> Result<BallSolution> {
    spec.validate()?;
    let domain = Domain::ball(radius)?;
    let template = GridFunction::zeros(*params, domain, axes, ExteriorRule::Provided(g.clone()))?;
    let g_is_zero = matches!(g.bound(), Some(b) if b == 0.0);
    let per_node: Vec<Result<(f64, Vec<(usize, Error)>)>> = (0..template.len())
        .into_par_iter()
        .map(|i| {
            let x = template.node(i);
            if norm2(&x) >= radius * radius {
                return Ok((g.eval(&x), Vec::new()));
            }
            let mut errors = Vec::new();
            let poisson = if g_is_zero {
                0.0
            } else {
                keep_estimate(exterior_poisson_integral(params, radius, g, &x, spec).map(|e| e.value), i, &mut errors)?
            };
            let green = keep_estimate(ball_green_integral(params, radius, f, &x, spec).map(|e| e.value), i, &mut errors)?;
            Ok((poisson + green, errors))
        })
        .collect();
    let mut values = Vec::with_capacity(per_node.len());
    let mut node_errors = Vec::new();
    for r in per_node {
        let (v, errs) = r?;
        values.push(v);
        node_errors.extend(errs);
    }
    Ok(BallSolution { field: template.with_values(values)?, node_errors })
}

/// `u(x) = ∫_{R^N_+} G_∞^+(x, y) f(y) dy` at the nodes of `axes`, zero below
/// the half-space. Tangentially invariant data are integrated once per `x_1`.
pub fn solve_halfspace_linear(params: &FracParams, f: &ScalarField, axes: Vec<Vec<f64>>, spec: &QuadratureSpec) -> Result<GridFunction> {
    spec.validate()?;
    let template = GridFunction::zeros(*params, Domain::HalfSpace, axes, ExteriorRule::Zero)?;
    let solve_at = |x: &[f64]| -> Result<f64> {
        if x[0] <= 0.0 {
            Ok(0.0)
        } else {
            halfspace_green_integral(params, f, x, spec).map(|r| r.value())
        }
    };
    let values = if f.is_tangentially_invariant() {
        let normal = &template.axes()[0];
        let profile = normal
            .par_iter()
            .map(|&x1| {
                let mut x = vec![0.0; params.dim()];
                x[0] = x1;
                solve_at(&x)
            })
            .collect::<Result<Vec<f64>>>()?;
        (0..template.len()).map(|i| profile[template.node_indices(i)[0]]).collect()
    } else {
        (0..template.len()).into_par_iter().map(|i| solve_at(&template.node(i))).collect::<Result<Vec<f64>>>()?
    };
    template.with_values(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{Smoothness, Support};
    use crate::solver::grid::linspace;

    #[test]
    fn zero_data_give_zero() {
        let p = FracParams::new(2, 0.5).unwrap();
        let spec = QuadratureSpec::default();
        let sol = solve_ball_dirichlet(&p, 1.0, &ScalarField::zero(), &ScalarField::zero(), vec![linspace(-1.0, 1.0, 5), linspace(-1.0, 1.0, 5)], &spec)
            .unwrap();
        assert!(sol.field.values().iter().all(|v| *v == 0.0));
        assert!(sol.node_errors.is_empty());
        let h = solve_halfspace_linear(&p, &ScalarField::zero().with_support(Support::Slab { lower: 0.0, upper: 1.0 }), vec![linspace(0.0, 1.0, 3), vec![0.0]], &spec)
            .unwrap();
        assert!(h.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn torsion_profile_in_one_dimension() {
        // (-Δ)^{1/2} (1 - x²)^{1/2} = 1 on (-1, 1)
        let p = FracParams::new(1, 0.5).unwrap();
        let spec = QuadratureSpec::with_tolerances(1e-8, 1e-12);
        let sol = solve_ball_dirichlet(&p, 1.0, &ScalarField::constant(1.0), &ScalarField::zero(), vec![linspace(-1.0, 1.0, 41)], &spec).unwrap();
        let mut worst: f64 = 0.0;
        for (i, v) in sol.field.values().iter().enumerate() {
            let x = sol.field.node(i)[0];
            if x.abs() <= 0.9 {
                worst = worst.max((v - (1.0 - x * x).sqrt()).abs());
            }
        }
        assert!(worst < 1e-6, "max error {worst}");
        // outside the ball the provided data are used
        assert_eq!(sol.field.eval(&[1.5]), 0.0);
    }

    #[test]
    fn unit_exterior_data_reproduce_one() {
        let p = FracParams::new(2, 0.3).unwrap();
        let spec = QuadratureSpec::default();
        let sol = solve_ball_dirichlet(&p, 1.0, &ScalarField::zero(), &ScalarField::constant(1.0), vec![linspace(-0.8, 0.8, 3), linspace(-0.8, 0.8, 3)], &spec)
            .unwrap();
        for v in sol.field.values() {
            assert!((v - 1.0).abs() < 1e-8, "{v}");
        }
    }

    #[test]
    fn halfspace_solution_properties() {
        let p = FracParams::new(2, 0.5).unwrap();
        let spec = QuadratureSpec::with_tolerances(1e-7, 1e-10);
        let f = ScalarField::constant(1.0)
            .with_support(Support::Slab { lower: 0.0, upper: 1.0 })
            .with_tangential_invariance();
        let u = solve_halfspace_linear(&p, &f, vec![linspace(0.0, 1.0, 11), linspace(-1.0, 1.0, 3)], &spec).unwrap();
        for i in 0..u.len() {
            let idx = u.node_indices(i);
            let first = u.values()[u.flat_index(&[idx[0], 0])];
            assert!((u.values()[i] - first).abs() <= 1e-8 * first.abs().max(1.0));
        }
        let column: Vec<f64> = (0..11).map(|k| u.values()[u.flat_index(&[k, 1])]).collect();
        assert_eq!(column[0], 0.0);
        // Lateral integration reduces to the half-line problem with data 1 on (0, 1);
        // values of ∫_0^1 asinh(√(4xy) / |x - y|) / π dy from 20-digit quadrature.
        for (k, expected) in [(3, 0.62281019128723753087), (7, 0.76371490209850728018), (9, 0.71971644234773967643), (10, 0.63661977236758134308)] {
            assert!((column[k] - expected).abs() < 1e-7, "x1 = {}: {}", k as f64 / 10.0, column[k]);
        }
        // increasing near the boundary, with an interior maximum below x1 = 1
        assert!(column[..7].windows(2).all(|w| w[1] > w[0]), "{column:?}");
        assert!(column[10] < column[7]);

        // the same data without the invariance tag are integrated node by node
        let box_f = ScalarField::constant(1.0)
            .with_smoothness(Smoothness::Continuous)
            .with_support(Support::Box { lower: vec![0.0, -1.0], upper: vec![1.0, 1.0] });
        let v = solve_halfspace_linear(&p, &box_f, vec![vec![0.5], vec![-0.5, 0.0, 0.5]], &spec).unwrap();
        assert!((v.values()[0] - v.values()[2]).abs() < 1e-8);
        assert!(v.values()[1] > v.values()[0]);
    }
}
