//! Integration over the unit sphere `S^{d-1}` in spherical coordinates about
//! a chosen pole, for `d <= 3`.

use std::f64::consts::PI;

use super::rules::{integrate_nested, Estimate, Tol};
use crate::error::{Error, Result};

/// Orthonormal frame whose first vector is the pole.
#[derive(Clone, Debug)]
pub(crate) struct Frame {
    axes: Vec<Vec<f64>>,
}

impl Frame {
    /// Frame with first axis along `pole` (or `e_1` if `pole` vanishes).
    pub(crate) fn new(pole: &[f64]) -> Self {
        let d = pole.len();
        let len = pole.iter().map(|v| v * v).sum::<f64>().sqrt();
        let first: Vec<f64> = if len > 0.0 {
            pole.iter().map(|v| v / len).collect()
        } else {
            let mut e = vec![0.0; d];
            e[0] = 1.0;
            e
        };
        let mut axes = vec![first];
        for k in 0..d {
            if axes.len() == d {
                break;
            }
            let mut v = vec![0.0; d];
            v[k] = 1.0;
            for a in &axes {
                let dot: f64 = v.iter().zip(a).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(a).for_each(|(x, y)| *x -= dot * y);
            }
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-8 {
                v.iter_mut().for_each(|x| *x /= n);
                axes.push(v);
            }
        }
        Frame { axes }
    }

    fn combine(&self, coeffs: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (c, axis) in coeffs.iter().zip(&self.axes) {
            out.iter_mut().zip(axis).for_each(|(o, a)| *o += c * a);
        }
    }
}

/// Integrates `f(θ)` over `S^{d-1}` (or over the hemisphere around the pole
/// when `half`), `d = frame dimension`. `f` returns `(value, inner error)`.
/// `polar_breaks` are polar angles (measured from the pole) at which the
/// integrand changes rapidly.
pub(crate) fn integrate_sphere<F>(frame: &Frame, half: bool, polar_breaks: &[f64], tol: Tol, depth: u32, mut f: F) -> Result<Estimate>
where
    F: FnMut(&[f64]) -> (f64, f64),
{
    let d = frame.axes.len();
    let mut dir = vec![0.0; d];
    match d {
        1 => {
            let (v1, e1) = f(&frame.axes[0]);
            let mut est = Estimate { value: v1, error: e1, evals: 1, converged: true };
            if !half {
                let neg: Vec<f64> = frame.axes[0].iter().map(|v| -v).collect();
                let (v2, e2) = f(&neg);
                est.value += v2;
                est.error += e2;
                est.evals += 1;
            }
            est.converged = est.error <= tol.target(est.value);
            Ok(est)
        }
        2 => {
            let (lo, mut breaks) = if half { (0.0, vec![]) } else { (-PI, vec![0.0]) };
            for &b in polar_breaks.iter().filter(|&&b| b > 0.0 && b < PI) {
                breaks.push(b);
                if !half {
                    breaks.push(-b);
                }
            }
            Ok(integrate_nested(
                |phi| {
                    frame.combine(&[phi.cos(), phi.sin()], &mut dir);
                    f(&dir)
                },
                lo,
                PI,
                &breaks,
                tol,
                depth,
            ))
        }
        3 => {
            let top = if half { 0.5 * PI } else { PI };
            let breaks: Vec<f64> = polar_breaks.iter().copied().filter(|&b| b > 0.0 && b < top).collect();
            let inner_tol = tol.nested();
            Ok(integrate_nested(
                |phi| {
                    let (sp, cp) = phi.sin_cos();
                    if sp == 0.0 {
                        return (0.0, 0.0);
                    }
                    let est = integrate_nested(
                        |psi| {
                            let (ss, cs) = psi.sin_cos();
                            frame.combine(&[cp, sp * cs, sp * ss], &mut dir);
                            f(&dir)
                        },
                        0.0,
                        2.0 * PI,
                        &[PI],
                        inner_tol,
                        depth,
                    );
                    (sp * est.value, sp * est.error)
                },
                0.0,
                top,
                &breaks,
                tol,
                depth,
            ))
        }
        _ => Err(Error::Unsupported(format!("sphere integration is implemented for dimension <= 3, got {d}"))),
    }
}

/// Integrates `f` over `S^{d-1}` when `f(θ)` depends only on the polar
/// angle from the pole: `|S^{d-2}| ∫_0^π f(cos φ e_0 + sin φ e_1) sin^{d-2} φ dφ`.
pub(crate) fn integrate_sphere_axisymmetric<F>(frame: &Frame, polar_breaks: &[f64], tol: Tol, depth: u32, mut f: F) -> Result<Estimate>
where
    F: FnMut(&[f64]) -> (f64, f64),
{
    let d = frame.axes.len();
    if d == 1 {
        return integrate_sphere(frame, false, polar_breaks, tol, depth, f);
    }
    let omega = match d {
        2 => 2.0,
        3 => 2.0 * PI,
        _ => return Err(Error::Unsupported(format!("sphere integration is implemented for dimension <= 3, got {d}"))),
    };
    let mut dir = vec![0.0; d];
    let breaks: Vec<f64> = polar_breaks.iter().copied().filter(|&b| b > 0.0 && b < PI).collect();
    let est = integrate_nested(
        |phi| {
            let (sp, cp) = phi.sin_cos();
            frame.combine(&[cp, sp], &mut dir);
            let (v, e) = f(&dir);
            let w = if d == 3 { sp } else { 1.0 };
            (w * v, w * e)
        },
        0.0,
        PI,
        &breaks,
        Tol::new(tol.abs / omega, tol.rel),
        depth,
    );
    Ok(est.scale(omega))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: Tol = Tol { abs: 1e-13, rel: 1e-12 };

    #[test]
    fn frames_are_orthonormal() {
        for pole in [vec![0.3, -0.4, 1.2], vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 0.0], vec![1.0, 2.0]] {
            let f = Frame::new(&pole);
            assert_eq!(f.axes.len(), pole.len());
            for (i, a) in f.axes.iter().enumerate() {
                for (j, b) in f.axes.iter().enumerate() {
                    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - expected).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn sphere_areas_and_moments() {
        let areas = [2.0, 2.0 * PI, 4.0 * PI];
        for d in 1..=3 {
            let frame = Frame::new(&vec![0.2; d]);
            let full = integrate_sphere(&frame, false, &[], TOL, 30, |_| (1.0, 0.0)).unwrap();
            assert!((full.value - areas[d - 1]).abs() < 1e-12);
            let half = integrate_sphere(&frame, true, &[], TOL, 30, |_| (1.0, 0.0)).unwrap();
            assert!((half.value - areas[d - 1] / 2.0).abs() < 1e-12);
        }
        // ∫_{S²} θ_1² = 4π/3
        let frame = Frame::new(&[0.0, 1.0, 1.0]);
        let m = integrate_sphere(&frame, false, &[0.1], TOL, 30, |t| (t[0] * t[0], 0.0)).unwrap();
        assert!((m.value - 4.0 * PI / 3.0).abs() < 1e-12);
        for d in 1..=3 {
            let frame = Frame::new(&vec![1.0; d]);
            let cos2 = |t: &[f64]| {
                let c: f64 = t.iter().sum::<f64>() / (d as f64).sqrt();
                (c * c, 0.0)
            };
            let full = integrate_sphere(&frame, false, &[], TOL, 30, cos2).unwrap();
            let axi = integrate_sphere_axisymmetric(&frame, &[], TOL, 30, cos2).unwrap();
            assert!((full.value - axi.value).abs() < 1e-12, "d={d}");
        }
        assert!(integrate_sphere(&Frame::new(&[1.0; 4]), false, &[], TOL, 30, |_| (1.0, 0.0)).is_err());
    }
}
