//! Projected quasi-Newton minimization over the unit box [0, 1]^n.
//!
//! Gradients come from central finite differences (one-sided at the bounds).
//! Variables sitting on a bound with the gradient pushing outward are held
//! fixed; the remaining ones take an inverse-BFGS step, projected back onto the
//! box and accepted by Armijo backtracking.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Stop once an accepted step lowers the cost by less than this fraction.
    pub rel_tol: f64,
    /// Stop once the projected gradient norm drops below this.
    pub grad_tol: f64,
    /// Finite-difference step in normalized units.
    pub fd_step: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            rel_tol: 1e-8,
            grad_tol: 1e-6,
            fd_step: 1e-6,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::Validation(
                "max_iterations must be at least 1".into(),
            ));
        }
        for (name, v) in [
            ("rel_tol", self.rel_tol),
            ("grad_tol", self.grad_tol),
            ("fd_step", self.fd_step),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Validation(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.fd_step >= 0.5 {
            return Err(Error::Validation("fd_step must be below 0.5".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxMinimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 40;

fn gradient<F: FnMut(&[f64]) -> f64>(f: &mut F, x: &[f64], fx: f64, h: f64) -> Result<Vec<f64>> {
    let mut probe = x.to_vec();
    let mut g = vec![0.0; x.len()];
    for i in 0..x.len() {
        let xi = x[i];
        let d = if xi - h >= 0.0 && xi + h <= 1.0 {
            probe[i] = xi + h;
            let up = f(&probe);
            probe[i] = xi - h;
            let down = f(&probe);
            (up - down) / (2.0 * h)
        } else if xi + h <= 1.0 {
            probe[i] = xi + h;
            (f(&probe) - fx) / h
        } else {
            probe[i] = xi - h;
            (fx - f(&probe)) / h
        };
        probe[i] = xi;
        if !d.is_finite() {
            return Err(Error::Solver(format!(
                "non-finite finite-difference derivative in coordinate {i}"
            )));
        }
        g[i] = d;
    }
    Ok(g)
}

fn project(x: &mut [f64]) {
    for v in x {
        *v = v.clamp(0.0, 1.0);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dense inverse-Hessian approximation.
struct InverseHessian {
    n: usize,
    h: Vec<f64>,
    fresh: bool,
}

impl InverseHessian {
    fn identity(n: usize) -> Self {
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            h[i * n + i] = 1.0;
        }
        Self { n, h, fresh: true }
    }

    fn reset(&mut self) {
        *self = Self::identity(self.n);
    }

    /// −H g restricted to the free coordinates.
    fn direction(&self, g: &[f64], free: &[bool]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                if !free[i] {
                    return 0.0;
                }
                -(0..n)
                    .filter(|&j| free[j])
                    .map(|j| self.h[i * n + j] * g[j])
                    .sum::<f64>()
            })
            .collect()
    }

    fn update(&mut self, s: &[f64], y: &[f64]) {
        let sy = dot(s, y);
        let yy = dot(y, y);
        if !(sy > 1e-12 * dot(s, s).sqrt() * yy.sqrt()) || !(sy > 0.0) {
            return;
        }
        let n = self.n;
        if self.fresh {
            let gamma = sy / yy;
            for v in &mut self.h {
                *v *= gamma;
            }
            self.fresh = false;
        }
        let rho = 1.0 / sy;
        // H+ = (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ
        let hy: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| self.h[i * n + j] * y[j]).sum())
            .collect();
        let yhy = dot(y, &hy);
        for i in 0..n {
            for j in 0..n {
                self.h[i * n + j] +=
                    -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
            }
        }
    }
}

/// Minimizes `f` over [0, 1]^n starting from `x0` (projected onto the box).
///
/// `f` should return `+∞` where it cannot be evaluated. The returned value is
/// never above `f(x0)`.
pub fn minimize_unit_box<F>(mut f: F, x0: &[f64], opts: &SolverOptions) -> Result<BoxMinimum>
where
    F: FnMut(&[f64]) -> f64,
{
    opts.validate()?;
    let n = x0.len();
    let mut x = x0.to_vec();
    project(&mut x);
    let mut fx = f(&x);
    if !fx.is_finite() {
        return Err(Error::Solver(
            "objective is not finite at the starting point".into(),
        ));
    }
    if n == 0 {
        return Ok(BoxMinimum {
            x,
            value: fx,
            iterations: 0,
            converged: true,
        });
    }

    let mut g = gradient(&mut f, &x, fx, opts.fd_step)?;
    let mut hess = InverseHessian::identity(n);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        iterations += 1;

        let pg_norm = x
            .iter()
            .zip(&g)
            .map(|(xi, gi)| {
                let d = xi - (xi - gi).clamp(0.0, 1.0);
                d * d
            })
            .sum::<f64>()
            .sqrt();
        if pg_norm < opts.grad_tol {
            converged = true;
            break;
        }

        let free: Vec<bool> = x
            .iter()
            .zip(&g)
            .map(|(&xi, &gi)| !((xi <= 0.0 && gi > 0.0) || (xi >= 1.0 && gi < 0.0)))
            .collect();
        let mut d = hess.direction(&g, &free);
        if !(dot(&g, &d) < 0.0) {
            hess.reset();
            d = hess.direction(&g, &free);
        }

        let mut accepted = None;
        let mut alpha = 1.0;
        for _ in 0..MAX_BACKTRACKS {
            let mut xn: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + alpha * di).collect();
            project(&mut xn);
            let step: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
            let decrease = dot(&g, &step);
            if decrease < 0.0 {
                let fxn = f(&xn);
                if fxn < fx && fxn <= fx + ARMIJO * decrease {
                    accepted = Some((xn, fxn, step));
                    break;
                }
            }
            alpha *= 0.5;
        }

        let Some((xn, fxn, s)) = accepted else {
            if hess.fresh {
                // Steepest descent found nothing either: stationary at FD resolution.
                converged = true;
                break;
            }
            hess.reset();
            continue;
        };

        let gn = gradient(&mut f, &xn, fxn, opts.fd_step)?;
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        hess.update(&s, &y);

        let rel = (fx - fxn) / fx.abs().max(f64::MIN_POSITIVE);
        x = xn;
        fx = fxn;
        g = gn;
        if rel < opts.rel_tol || fx == 0.0 {
            converged = true;
            break;
        }
    }

    Ok(BoxMinimum {
        x,
        value: fx,
        iterations,
        converged,
    })
}
