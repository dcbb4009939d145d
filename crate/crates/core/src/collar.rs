//! Local normal form of a b^m-symplectic structure on a collar
//! `U = (-delta, delta) x Z` with defining function `f(x, z) = x`.
//!
//! The singular two-form is encoded by its Laurent data: `m` leaf-constant
//! covectors `alpha_1..alpha_m` pairing torus directions, and the leaf
//! symplectic pairing in action-angle coordinates. The scalar densities and
//! primitives below are the building blocks for moment-map evaluation.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Laurent coefficients of a collar form: `alpha[j]` is the covector of the
/// order-(j+1) singular term, expressed in dual torus coordinates (length d).
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentData {
    pub alpha: Vec<Vec<f64>>,
}

impl LaurentData {
    /// Requires a nonzero top covector `alpha[m-1]` (nondegeneracy of the
    /// leading term).
    pub fn new(alpha: Vec<Vec<f64>>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::InvalidParameter(
                "Laurent data needs at least one covector".into(),
            ));
        }
        let d = alpha[0].len();
        if alpha.iter().any(|a| a.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: alpha.iter().map(|a| a.len()).find(|&l| l != d).unwrap_or(d),
            });
        }
        let top = alpha.last().unwrap();
        if top.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidParameter(
                "top Laurent covector alpha_m must be nonzero".into(),
            ));
        }
        Ok(LaurentData { alpha })
    }

    pub fn order(&self) -> usize {
        self.alpha.len()
    }

    pub fn torus_dim(&self) -> usize {
        self.alpha[0].len()
    }
}

/// A collar model `(-delta, delta) x S^1_t x (T^{d-1} x Delta)` of dimension
/// `2d`, with singularity order `m` along `{x = 0}`.
///
/// Tangent vectors for [`eval_bm_form`] are laid out as
/// `[x-slot, d angle slots, d-1 action slots]` (length `2d`): the angle slots
/// are the torus directions (the distinguished circle and the leaf torus),
/// the action slots are the leaf moment directions.
#[derive(Debug, Clone)]
pub struct CollarModel {
    pub m: usize,
    pub delta: f64,
    pub leaf_dim: usize,
    pub laurent: LaurentData,
}

impl CollarModel {
    pub fn new(m: usize, delta: f64, leaf_dim: usize, laurent: LaurentData) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("m must be >= 1".into()));
        }
        if delta <= 0.0 || !delta.is_finite() {
            return Err(Error::InvalidParameter("delta must be positive".into()));
        }
        if laurent.order() != m {
            return Err(Error::InvalidParameter(format!(
                "Laurent data has {} covectors, expected m = {}",
                laurent.order(),
                m
            )));
        }
        Ok(CollarModel {
            m,
            delta,
            leaf_dim,
            laurent,
        })
    }

    pub fn tangent_dim(&self) -> usize {
        1 + self.laurent.torus_dim() + self.leaf_dim
    }
}

/// Singular density `Q(x) = sum_j w_j x^{-j}`, the x-component density of the
/// collar form. Errors at the pole `x = 0`.
pub fn singular_density(w: &[f64], x: f64) -> Result<f64> {
    if x == 0.0 {
        return Err(Error::Pole(x));
    }
    Ok(w.iter()
        .enumerate()
        .map(|(i, &wj)| wj * x.powi(-(i as i32 + 1)))
        .sum())
}

/// Singular part of the moment map:
/// `s_w(x) = w_1 log|x| + sum_{i>=2} w_i x^{-(i-1)} / (i-1)`.
///
/// For `m = 1` the sum is empty. Errors at the pole `x = 0`.
pub fn singular_primitive(w: &[f64], x: f64) -> Result<f64> {
    if x == 0.0 {
        return Err(Error::Pole(x));
    }
    let mut s = match w.first() {
        Some(&w1) => w1 * x.abs().ln(),
        None => return Ok(0.0),
    };
    for (i, &wi) in w.iter().enumerate().skip(1) {
        // term index i+1 in 1-based convention, power -(i), divisor i
        s += wi * x.powi(-(i as i32)) / i as f64;
    }
    Ok(s)
}

/// Exact antiderivative of [`singular_density`]:
/// `A_w(x) = w_1 log|x| - sum_{j>=2} w_j x^{-(j-1)} / (j-1)`.
///
/// Differs from [`singular_primitive`] by the sign of the `j >= 2` terms;
/// this is the primitive the desingularized moment agrees with outside the
/// smoothing region.
pub fn singular_antiderivative(w: &[f64], x: f64) -> Result<f64> {
    if x == 0.0 {
        return Err(Error::Pole(x));
    }
    let mut s = match w.first() {
        Some(&w1) => w1 * x.abs().ln(),
        None => return Ok(0.0),
    };
    for (j, &wj) in w.iter().enumerate().skip(1) {
        s -= wj * x.powi(-(j as i32)) / j as f64;
    }
    Ok(s)
}

/// Evaluates the collar two-form on a pair of tangent vectors at a point with
/// coordinate `x != 0`. Vector layout: see [`CollarModel`]. Leaf pairing is
/// the canonical action-angle form `sum_i d(phi_i) ^ d(I_i)`.
pub fn eval_bm_form(collar: &CollarModel, x: f64, u: &[f64], v: &[f64]) -> Result<f64> {
    if x == 0.0 {
        return Err(Error::Pole(x));
    }
    let dim = collar.tangent_dim();
    if u.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: u.len(),
        });
    }
    if v.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: v.len(),
        });
    }
    let d = collar.laurent.torus_dim();
    let (ux, vx) = (u[0], v[0]);
    let u_ang = &u[1..1 + d];
    let v_ang = &v[1..1 + d];
    let u_act = &u[1 + d..];
    let v_act = &v[1 + d..];

    let mut total = 0.0;
    for (j, a) in collar.laurent.alpha.iter().enumerate() {
        let au: f64 = a.iter().zip(u_ang).map(|(c, t)| c * t).sum();
        let av: f64 = a.iter().zip(v_ang).map(|(c, t)| c * t).sum();
        // dx/x^j ∧ alpha_j, antisymmetrized explicitly so omega(u, u) = 0 exactly
        total += x.powi(-(j as i32 + 1)) * (ux * av - vx * au);
    }
    // leaf pairing: sum_i dphi_i ∧ dI_i on the last leaf_dim angle/action pairs
    for i in 0..collar.leaf_dim {
        // angle slot paired with action slot i: the leaf torus angles are the
        // non-distinguished torus coordinates; pair action i with angle i+... the
        // convention here pairs action slot i with angle slot (d - collar.leaf_dim + i).
        let ai = d - collar.leaf_dim + i;
        total += u_ang[ai] * v_act[i] - v_ang[ai] * u_act[i];
    }
    Ok(total)
}

/// Result of a Laurent least-squares fit.
#[derive(Debug, Clone)]
pub struct LaurentFit {
    /// Recovered weights in the moment-map convention of [`singular_primitive`].
    pub weights: Vec<f64>,
    /// Coefficients of the smooth polynomial part, constant first.
    pub smooth: Vec<f64>,
    /// Euclidean norm of the fit residual.
    pub residual: f64,
}

/// Default polynomial degree of the smooth remainder in [`fit_laurent_coefficients`].
pub const DEFAULT_SMOOTH_DEGREE: usize = 3;

/// Least-squares recovery of moment weights from samples `(x_i, s(x_i))` in
/// the basis `{log|x|, x^{-1}, ..., x^{-(m-1)}, 1, x, ..., x^k}`.
///
/// The recovered coefficients are mapped back to the convention of
/// [`singular_primitive`] (`w_{j+1} = j * c_{x^{-j}}`).
pub fn fit_laurent_coefficients(
    samples: &[(f64, f64)],
    m: usize,
    smooth_degree: usize,
) -> Result<LaurentFit> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be >= 1".into()));
    }
    let ncols = m + smooth_degree + 1;
    if samples.len() < ncols {
        return Err(Error::InsufficientSamples {
            need: ncols,
            got: samples.len(),
        });
    }
    if samples.iter().any(|&(x, _)| x == 0.0) {
        return Err(Error::Pole(0.0));
    }

    let n = samples.len();
    let mut a = DMatrix::zeros(n, ncols);
    let mut b = DVector::zeros(n);
    for (r, &(x, y)) in samples.iter().enumerate() {
        a[(r, 0)] = x.abs().ln();
        for j in 1..m {
            a[(r, j)] = x.powi(-(j as i32));
        }
        for k in 0..=smooth_degree {
            a[(r, m + k)] = x.powi(k as i32);
        }
        b[r] = y;
    }

    // Column equilibration keeps the SVD well scaled when inverse powers dwarf
    // the polynomial columns.
    let mut scale = vec![0.0f64; ncols];
    for c in 0..ncols {
        let norm = a.column(c).norm();
        scale[c] = if norm > 0.0 { norm } else { 1.0 };
        for r in 0..n {
            a[(r, c)] /= scale[c];
        }
    }

    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    const COND_TOL: f64 = 1e-12;
    if smax == 0.0 || smin / smax < COND_TOL {
        return Err(Error::RankDeficient(COND_TOL));
    }
    let sol = svd
        .solve(&b, 0.0)
        .map_err(|_| Error::RankDeficient(COND_TOL))?;
    let residual = (&a * &sol - &b).norm();

    let coeff: Vec<f64> = sol.iter().zip(&scale).map(|(c, s)| c / s).collect();
    let mut weights = vec![0.0; m];
    weights[0] = coeff[0];
    for j in 1..m {
        weights[j] = j as f64 * coeff[j];
    }
    let smooth = coeff[m..].to_vec();
    Ok(LaurentFit {
        weights,
        smooth,
        residual,
    })
}
