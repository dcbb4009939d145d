//! Smooth replacement profiles for the singular densities `x^{-j}` and the
//! desingularized moment primitives built from them.
//!
//! A profile of order `j` coincides with `x^{-j}` for `|x| >= eps` and is a
//! log-space even-polynomial spline under an exponential inside: positive and
//! even for even `j` (symplectic-type replacement), odd with a single
//! transversal zero at the origin for odd `j` (folded-type). The exponential
//! form guarantees positivity respectively the fold by construction; the
//! polynomial solves the C^{j-1} matching conditions at `|x| = eps`.

use crate::error::{Error, Result};
use crate::hamiltonian::{Geometry, ScenarioModel};
use crate::numerics::{adaptive_simpson, falling_factorial, linspace, Jet, QUADRATURE_TOL};
use nalgebra::{DMatrix, DVector};

/// Parity of a profile density.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// Odd density with a fold at the origin (odd order).
    Odd,
    /// Even, strictly positive density (even order).
    Even,
}

/// Smooth replacement for `x^{-m}` on `[-eps, eps]`.
#[derive(Debug, Clone)]
pub struct DesingProfile {
    pub m: usize,
    pub eps: f64,
    /// Coefficients `c_0..c_{m-1}` of the log-space polynomial `g(v)`,
    /// `v = (x/eps)^2`.
    pub log_coeffs: Vec<f64>,
    pub parity: Parity,
}

/// Builds the order-`m` profile: solves the `m` matching conditions (value
/// and first `m - 1` derivatives of `x^{-m}` at `x = eps`, transported to
/// log space) for the even polynomial `g`.
pub fn build_profile(m: usize, eps: f64) -> Result<DesingProfile> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be >= 1".into()));
    }
    if eps <= 0.0 || !eps.is_finite() {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    // After scaling to u = x / eps the conditions are eps-independent:
    //   sum_i c_i * d^k/du^k [u^{2i}] |_{u=1} = target_k,  k = 0..m-1
    // where the target is the k-th derivative at u = 1 of -p log(u) with
    // p = m (even) or p = m + 1 (odd; the explicit factor x supplies the rest).
    let p = if m % 2 == 0 { m as f64 } else { (m + 1) as f64 };
    let mut mat = DMatrix::zeros(m, m);
    let mut rhs = DVector::zeros(m);
    for k in 0..m {
        for i in 0..m {
            mat[(k, i)] = falling_factorial(2 * i as i64, k);
        }
        rhs[k] = if k == 0 {
            0.0
        } else {
            // d^k/du^k [-p log u] at u = 1
            -p * (if k % 2 == 1 { 1.0 } else { -1.0 }) * crate::numerics::factorial(k - 1)
        };
    }
    let coeffs = mat
        .lu()
        .solve(&rhs)
        .ok_or(Error::ProfileSolve(m))?
        .iter()
        .copied()
        .collect();
    Ok(DesingProfile {
        m,
        eps,
        log_coeffs: coeffs,
        parity: if m % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        },
    })
}

impl DesingProfile {
    fn g(&self, v: f64) -> f64 {
        // Horner evaluation of g(v)
        self.log_coeffs.iter().rev().fold(0.0, |acc, c| acc * v + c)
    }

    /// The profile density `q_eps(x)`: exactly `x^{-m}` for `|x| >= eps`.
    pub fn density(&self, x: f64) -> f64 {
        if x.abs() >= self.eps {
            return x.powi(-(self.m as i32));
        }
        let u = x / self.eps;
        let core = (self.g(u * u)).exp();
        match self.parity {
            Parity::Even => self.eps.powi(-(self.m as i32)) * core,
            Parity::Odd => x * self.eps.powi(-(self.m as i32 + 1)) * core,
        }
    }

    /// Taylor jet of the inner branch at `x0` (used to verify derivative
    /// matching without finite differences). Panics if `|x0| > eps`.
    pub fn inner_jet(&self, x0: f64, order: usize) -> Jet {
        assert!(x0.abs() <= self.eps);
        let x = Jet::variable(x0, order);
        let u = x.scale(1.0 / self.eps);
        let v = u.mul(&u);
        let mut g = Jet::constant(0.0, order);
        for c in self.log_coeffs.iter().rev() {
            g = g.mul(&v).add(&Jet::constant(*c, order));
        }
        let core = g.exp();
        match self.parity {
            Parity::Even => core.scale(self.eps.powi(-(self.m as i32))),
            Parity::Odd => x.mul(&core).scale(self.eps.powi(-(self.m as i32 + 1))),
        }
    }

    /// Taylor jet of `x^{-m}` at `x0 != 0` (the outer branch).
    pub fn outer_jet(&self, x0: f64, order: usize) -> Jet {
        Jet::variable(x0, order).powi(-(self.m as i32))
    }

    /// Primitive `P(x) = int_0^x q_eps(t) dt`, smooth through the origin.
    /// Odd-order densities give even primitives and vice versa; the parity is
    /// applied exactly so that symmetry holds bitwise.
    pub fn primitive(&self, x: f64) -> f64 {
        let ax = x.abs();
        let sign = if x >= 0.0 { 1.0 } else { -1.0 };
        let inner_end = ax.min(self.eps);
        let mut p = adaptive_simpson(|t| self.density(t), 0.0, inner_end, QUADRATURE_TOL);
        if ax > self.eps {
            // exact closed form of int_eps^ax t^{-m} dt
            p += if self.m == 1 {
                (ax / self.eps).ln()
            } else {
                let k = self.m as i32 - 1;
                (self.eps.powi(-k) - ax.powi(-k)) / k as f64
            };
        }
        match self.parity {
            Parity::Even => sign * p, // odd primitive of an even density
            Parity::Odd => p,         // even primitive of an odd density
        }
    }
}

/// All profiles of orders `1..=m` at a common `eps`; each pole order is
/// desingularized with the parity rule of its own order.
#[derive(Debug, Clone)]
pub struct DesingFamily {
    pub eps: f64,
    pub profiles: Vec<DesingProfile>,
}

impl DesingFamily {
    pub fn new(m: usize, eps: f64) -> Result<Self> {
        let profiles = (1..=m)
            .map(|j| build_profile(j, eps))
            .collect::<Result<Vec<_>>>()?;
        Ok(DesingFamily { eps, profiles })
    }

    pub fn order(&self) -> usize {
        self.profiles.len()
    }

    /// Weighted desingularized density `sum_j w_j q_eps^{(j)}(x)`.
    pub fn density(&self, w: &[f64], x: f64) -> f64 {
        w.iter()
            .zip(&self.profiles)
            .map(|(wj, q)| wj * q.density(x))
            .sum()
    }
}

/// Desingularized moment primitive
/// `s_{eps,w}(x) = int_0^x sum_j w_j q_eps^{(j)}(t) dt`.
///
/// Smooth for all `x` including 0; for `|x| >= eps` it differs from the
/// exact singular antiderivative by a side-dependent constant only.
pub fn desing_primitive(family: &DesingFamily, w: &[f64], x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    w.iter()
        .zip(&family.profiles)
        .map(|(wj, q)| wj * q.primitive(x))
        .sum()
}

/// Divergence scale of the desingularized moment image: the per-component
/// centered maximum of the desingularized moment's circle component.
///
/// For a collar the primitive is centered at the zero (`s(0) = 0`) and the
/// maximum of `|s|` over `[-delta, delta]` is returned. For a circle-glued
/// model each component between consecutive zeros is centered at its image
/// midpoint and the largest half-length is returned.
pub fn compute_a_eps(model: &ScenarioModel, eps: f64) -> Result<f64> {
    if eps <= 0.0 {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    let w = model.weights.xi_scalars(model.torus.xi_index);
    let family = DesingFamily::new(model.weights.order(), eps)?;
    const DENSE: usize = 4001;
    match &model.geometry {
        Geometry::Collar(c) => {
            if eps >= c.delta {
                return Err(Error::InvalidParameter(format!(
                    "eps = {eps} must be below the collar half-width {}",
                    c.delta
                )));
            }
            let mut a = 0.0f64;
            for x in linspace(-c.delta, c.delta, DENSE) {
                a = a.max(desing_primitive(&family, &w, x).abs());
            }
            Ok(a)
        }
        Geometry::CircleGlued(g) => {
            let mut a = 0.0f64;
            for (lo, hi) in g.component_arcs() {
                let thetas = linspace(lo, hi, DENSE);
                let mut val = 0.0;
                let mut min = f64::INFINITY;
                let mut max = f64::NEG_INFINITY;
                for pair in thetas.windows(2) {
                    min = min.min(val);
                    max = max.max(val);
                    val += adaptive_simpson(
                        |t| family.density(&w, g.defining_value(t)),
                        pair[0],
                        pair[1],
                        QUADRATURE_TOL,
                    );
                }
                min = min.min(val);
                max = max.max(val);
                a = a.max(0.5 * (max - min));
            }
            Ok(a)
        }
    }
}
