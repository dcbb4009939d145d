//! Shared numeric helpers: quadrature, truncated Taylor (jet) arithmetic,
//! smoothstep cutoffs and grid utilities.

/// Absolute tolerance used by the adaptive quadrature of moment primitives.
pub const QUADRATURE_TOL: f64 = 1e-10;

/// `n` equispaced points covering `[a, b]` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "linspace needs at least two points");
    let h = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { b } else { a + h * i as f64 })
        .collect()
}

fn simpson(f: &mut impl FnMut(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
}

#[allow(clippy::too_many_arguments)] // recursion state of the quadrature
fn adaptive_step(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    whole: f64,
    m: f64,
    fm: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let (left, lm, flm) = simpson(f, a, fa, m, fm);
    let (right, rm, frm) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adaptive_step(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
            + adaptive_step(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(&mut f, a, fa, b, fb);
    adaptive_step(&mut f, a, fa, b, fb, whole, m, fm, tol, 48)
}

/// Falling factorial `n (n-1) ... (n-k+1)` as a float; empty product is 1.
pub fn falling_factorial(n: i64, k: usize) -> f64 {
    (0..k).map(|i| (n - i as i64) as f64).product()
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Order-3 smoothstep (septic polynomial, C^3 at both ends): 1 at t <= 0,
/// 0 at t >= 1, monotone in between.
pub fn smoothstep_down(t: f64) -> f64 {
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        let s = t * t * t * t * (35.0 - 84.0 * t + 70.0 * t * t - 20.0 * t * t * t);
        1.0 - s
    }
}

/// Symmetric radial cutoff in `|x|`: 1 for |x| <= core, 0 for |x| >= support,
/// smoothstep transition in between.
#[derive(Debug, Clone, Copy)]
pub struct Cutoff {
    pub core: f64,
    pub support: f64,
}

impl Cutoff {
    pub fn new(core: f64, support: f64) -> Self {
        assert!(0.0 < core && core < support);
        Cutoff { core, support }
    }

    pub fn eval(&self, x: f64) -> f64 {
        smoothstep_down((x.abs() - self.core) / (self.support - self.core))
    }
}

/// Truncated Taylor series (jet) arithmetic for extracting derivatives of
/// closed-form expressions without finite differences. `coeff[k]` is the
/// k-th Taylor coefficient, so the k-th derivative is `coeff[k] * k!`.
#[derive(Debug, Clone)]
pub struct Jet {
    pub coeff: Vec<f64>,
}

impl Jet {
    pub fn constant(c: f64, order: usize) -> Self {
        let mut coeff = vec![0.0; order + 1];
        coeff[0] = c;
        Jet { coeff }
    }

    /// The identity jet `x0 + t`.
    pub fn variable(x0: f64, order: usize) -> Self {
        let mut coeff = vec![0.0; order + 1];
        coeff[0] = x0;
        if order >= 1 {
            coeff[1] = 1.0;
        }
        Jet { coeff }
    }

    pub fn order(&self) -> usize {
        self.coeff.len() - 1
    }

    pub fn derivative(&self, k: usize) -> f64 {
        self.coeff[k] * factorial(k)
    }

    pub fn add(&self, rhs: &Jet) -> Jet {
        let coeff = self
            .coeff
            .iter()
            .zip(&rhs.coeff)
            .map(|(a, b)| a + b)
            .collect();
        Jet { coeff }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            coeff: self.coeff.iter().map(|a| a * s).collect(),
        }
    }

    pub fn mul(&self, rhs: &Jet) -> Jet {
        let n = self.order();
        let mut coeff = vec![0.0; n + 1];
        for (k, c) in coeff.iter_mut().enumerate() {
            for i in 0..=k {
                *c += self.coeff[i] * rhs.coeff[k - i];
            }
        }
        Jet { coeff }
    }

    /// exp of a jet via the standard recurrence.
    pub fn exp(&self) -> Jet {
        let n = self.order();
        let mut out = vec![0.0; n + 1];
        out[0] = self.coeff[0].exp();
        for k in 1..=n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * self.coeff[j] * out[k - j];
            }
            out[k] = acc / k as f64;
        }
        Jet { coeff: out }
    }

    /// Integer power by repeated multiplication (exponent may be negative if
    /// the constant term is nonzero).
    pub fn powi(&self, e: i32) -> Jet {
        if e == 0 {
            return Jet::constant(1.0, self.order());
        }
        let base = if e > 0 { self.clone() } else { self.recip() };
        let mut acc = base.clone();
        for _ in 1..e.unsigned_abs() {
            acc = acc.mul(&base);
        }
        acc
    }

    /// Reciprocal jet; requires nonzero constant term.
    pub fn recip(&self) -> Jet {
        let n = self.order();
        let a0 = self.coeff[0];
        assert!(a0 != 0.0, "reciprocal of a jet with zero constant term");
        let mut out = vec![0.0; n + 1];
        out[0] = 1.0 / a0;
        for k in 1..=n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += self.coeff[j] * out[k - j];
            }
            out[k] = -acc / a0;
        }
        Jet { coeff: out }
    }
}

/// Lexicographic comparison of coordinate slices (total order; inputs must be
/// free of NaN, which holds for all finite clouds produced here).
pub fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.partial_cmp(y) {
            Some(std::cmp::Ordering::Equal) => continue,
            Some(o) => return o,
            None => return std::cmp::Ordering::Equal,
        }
    }
    a.len().cmp(&b.len())
}

pub fn euclid_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
