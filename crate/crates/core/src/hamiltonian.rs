//! Torus action data, modular weights, leaf moment polytope, and evaluation
//! of the full singular moment map; validation of the standing assumptions
//! (nonvanishing top weight, annihilator constraint, compact-leaf data,
//! transversality of the zero set).

use crate::collar::{singular_density, singular_primitive, CollarModel, LaurentData};
use crate::error::{Error, Result};
use crate::moment_image::hull::{convex_hull, Polytope};
use crate::numerics::{adaptive_simpson, QUADRATURE_TOL};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Tolerance for leaf-membership tests.
pub const LEAF_MEMBERSHIP_TOL: f64 = 1e-9;

/// Torus dimension and the distinguished circle direction.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct TorusData {
    /// Torus dimension `d`.
    pub d: usize,
    /// Index in `[0, d)` of the circle direction whose moment component is
    /// singular; the remaining coordinates span the leaf torus.
    pub xi_index: usize,
}

/// The vectors `a_1..a_m` in dual torus coordinates. Under the annihilator
/// constraint each is a scalar multiple `w_i` of the distinguished dual
/// coordinate; violations are reported by [`validate_assumptions`], not
/// rejected at construction.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ModularWeights {
    pub a: Vec<Vec<f64>>,
}

impl ModularWeights {
    /// Builds weights that are multiples of the distinguished coordinate.
    pub fn from_scalars(w: &[f64], d: usize, xi_index: usize) -> Self {
        let a = w
            .iter()
            .map(|&wi| {
                let mut v = vec![0.0; d];
                v[xi_index] = wi;
                v
            })
            .collect();
        ModularWeights { a }
    }

    /// Singularity order `m`.
    pub fn order(&self) -> usize {
        self.a.len()
    }

    /// The scalars `w_i = <a_i, xi>`.
    pub fn xi_scalars(&self, xi_index: usize) -> Vec<f64> {
        self.a.iter().map(|ai| ai[xi_index]).collect()
    }
}

/// V-rep leaf moment polytope in `R^{d-1}` with a lazily built hull cache.
#[derive(Debug, Serialize, Deserialize)]
pub struct LeafPolytope {
    pub vertices: Vec<Vec<f64>>,
    #[serde(skip)]
    hull_cache: OnceLock<Polytope>,
}

impl Clone for LeafPolytope {
    fn clone(&self) -> Self {
        LeafPolytope {
            vertices: self.vertices.clone(),
            hull_cache: OnceLock::new(),
        }
    }
}

impl LeafPolytope {
    pub fn new(vertices: Vec<Vec<f64>>) -> Self {
        LeafPolytope {
            vertices,
            hull_cache: OnceLock::new(),
        }
    }

    /// A zero-dimensional leaf image (single point of `R^0`).
    pub fn point() -> Self {
        Self::new(vec![vec![]])
    }

    pub fn dim(&self) -> usize {
        self.vertices.first().map(|v| v.len()).unwrap_or(0)
    }

    /// Convex hull of the vertex set (cached).
    pub fn hull(&self) -> Result<&Polytope> {
        if self.dim() == 0 {
            return Err(Error::InvalidParameter(
                "zero-dimensional leaf has no hull".into(),
            ));
        }
        if let Some(h) = self.hull_cache.get() {
            return Ok(h);
        }
        let h = convex_hull(&self.vertices)?;
        let _ = self.hull_cache.set(h);
        Ok(self.hull_cache.get().unwrap())
    }

    pub fn contains(&self, point: &[f64], tol: f64) -> bool {
        if self.dim() == 0 {
            return point.is_empty();
        }
        match self.hull() {
            Ok(h) => h.contains(point, tol),
            Err(_) => false,
        }
    }

    /// Checks that the stated vertices are exactly the extreme points of
    /// their hull ("hull of vertices equals itself").
    pub fn is_convex_position(&self) -> bool {
        if self.vertices.is_empty() {
            return false;
        }
        if self.dim() == 0 {
            return self.vertices.len() == 1 && self.vertices[0].is_empty();
        }
        match convex_hull(&self.vertices) {
            Ok(h) => {
                if h.vertices.len() != self.vertices.len() {
                    return false;
                }
                let mut sorted = self.vertices.clone();
                sorted.sort_by(|a, b| crate::numerics::lex_cmp(a, b));
                sorted
                    .iter()
                    .zip(&h.vertices)
                    .all(|(a, b)| crate::numerics::euclid_dist(a, b) <= 1e-9)
            }
            Err(_) => false,
        }
    }
}

/// Collar geometry: a single zero-set component at `x = 0`, collar
/// half-width `delta`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CollarGeometry {
    pub delta: f64,
}

/// Global model on a circle coordinate: the defining function has the given
/// finite zero set (all simple), each zero carrying the full singularity
/// order of the weights. With zeros `{0, pi}` the defining function is
/// `sin(theta)`; in general it is the product of half-angle sines.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CircleGluedModel {
    /// Sorted zeros in `[0, 2*pi)`.
    pub zeros: Vec<f64>,
}

impl CircleGluedModel {
    pub fn new(mut zeros: Vec<f64>) -> Self {
        zeros.sort_by(|a, b| a.partial_cmp(b).unwrap());
        CircleGluedModel { zeros }
    }

    fn is_standard_two_zero(&self) -> bool {
        self.zeros.len() == 2 && self.zeros[0].abs() < 1e-12 && (self.zeros[1] - PI).abs() < 1e-12
    }

    /// Defining function value at `theta`.
    pub fn defining_value(&self, theta: f64) -> f64 {
        if self.is_standard_two_zero() {
            return theta.sin();
        }
        self.zeros
            .iter()
            .map(|z| (0.5 * (theta - z)).sin())
            .product()
    }

    /// Derivative of the defining function at its `k`-th zero.
    pub fn defining_slope_at_zero(&self, k: usize) -> f64 {
        if self.is_standard_two_zero() {
            return self.zeros[k].cos();
        }
        let zk = self.zeros[k];
        0.5 * self
            .zeros
            .iter()
            .enumerate()
            .filter(|&(l, _)| l != k)
            .map(|(_, z)| (0.5 * (zk - z)).sin())
            .product::<f64>()
    }

    /// Open arcs between consecutive zeros (the components of `M \ Z`); the
    /// last arc wraps past `2*pi`.
    pub fn component_arcs(&self) -> Vec<(f64, f64)> {
        let r = self.zeros.len();
        (0..r)
            .map(|k| {
                let lo = self.zeros[k];
                let hi = if k + 1 < r {
                    self.zeros[k + 1]
                } else {
                    self.zeros[0] + 2.0 * PI
                };
                (lo, hi)
            })
            .collect()
    }

    /// Index of the component arc containing `theta` and the angle shifted
    /// into that arc's parametrization.
    pub fn locate(&self, theta: f64) -> (usize, f64) {
        let t = theta.rem_euclid(2.0 * PI);
        for (k, (lo, hi)) in self.component_arcs().iter().enumerate() {
            if t >= *lo && t < *hi {
                return (k, t);
            }
        }
        // below the first zero: belongs to the wrapped last arc
        (self.zeros.len() - 1, t + 2.0 * PI)
    }

    /// Smallest half-gap between consecutive zeros; the analogue of the
    /// collar half-width for eps bounds.
    pub fn half_width(&self) -> f64 {
        self.component_arcs()
            .iter()
            .map(|(lo, hi)| 0.5 * (hi - lo))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Geometry of the model manifold.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    Collar(CollarGeometry),
    CircleGlued(CircleGluedModel),
}

impl Geometry {
    /// Half-width bound that every smoothing eps must stay below.
    pub fn half_width(&self) -> f64 {
        match self {
            Geometry::Collar(c) => c.delta,
            Geometry::CircleGlued(g) => g.half_width(),
        }
    }

    /// Number of components of `M \ Z`.
    pub fn component_count(&self) -> usize {
        match self {
            Geometry::Collar(_) => 2,
            Geometry::CircleGlued(g) => g.zeros.len(),
        }
    }
}

/// A synthetic half-space restriction of the sampled moment image: a point
/// survives iff `normal . p <= offset`. `component` limits the cut to one
/// component of `M \ Z`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Cut {
    pub normal: Vec<f64>,
    pub offset: f64,
    #[serde(default)]
    pub component: Option<usize>,
}

/// A complete model: torus action, modular weights, leaf polytope, geometry
/// and optional image cuts. This is the JSON scenario schema root.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioModel {
    pub torus: TorusData,
    pub weights: ModularWeights,
    pub leaf: LeafPolytope,
    pub geometry: Geometry,
    #[serde(default)]
    pub cuts: Vec<Cut>,
}

impl ScenarioModel {
    /// Shape-level consistency (dimensions and counts); violations are
    /// schema errors, not assumption failures.
    pub fn structural_check(&self) -> Result<()> {
        let d = self.torus.d;
        if d == 0 {
            return Err(Error::Schema("torus dimension must be >= 1".into()));
        }
        if self.torus.xi_index >= d {
            return Err(Error::Schema(format!(
                "xi_index {} out of range for torus dimension {}",
                self.torus.xi_index, d
            )));
        }
        if self.weights.a.is_empty() {
            return Err(Error::Schema("weights must contain at least a_1".into()));
        }
        if let Some(bad) = self.weights.a.iter().find(|ai| ai.len() != d) {
            return Err(Error::Schema(format!(
                "weight vector {bad:?} does not have torus dimension {d}"
            )));
        }
        if self.leaf.vertices.is_empty() {
            return Err(Error::Schema("leaf polytope must be nonempty".into()));
        }
        if self.leaf.vertices.iter().any(|v| v.len() != d - 1) {
            return Err(Error::Schema(format!(
                "leaf vertices must live in R^{}",
                d - 1
            )));
        }
        if self.leaf.dim() > 2 {
            return Err(Error::Schema(
                "leaf polytopes of dimension > 2 are not supported".into(),
            ));
        }
        match &self.geometry {
            Geometry::Collar(c) => {
                if !(c.delta > 0.0 && c.delta.is_finite()) {
                    return Err(Error::Schema("collar delta must be positive".into()));
                }
            }
            Geometry::CircleGlued(g) => {
                if g.zeros.len() < 2 || g.zeros.len() % 2 != 0 {
                    return Err(Error::Schema(
                        "circle models need an even number (>= 2) of zeros".into(),
                    ));
                }
                if g.zeros.iter().any(|z| !(0.0..2.0 * PI).contains(z)) {
                    return Err(Error::Schema("zeros must lie in [0, 2*pi)".into()));
                }
            }
        }
        for cut in &self.cuts {
            if cut.normal.len() != d {
                return Err(Error::Schema(format!(
                    "cut normal {:?} does not have torus dimension {d}",
                    cut.normal
                )));
            }
            if let Some(c) = cut.component {
                if c >= self.geometry.component_count() {
                    return Err(Error::Schema(format!(
                        "cut references component {c}, model has {}",
                        self.geometry.component_count()
                    )));
                }
            }
        }
        Ok(())
    }

    /// The typed collar model with Laurent data derived from the weights.
    pub fn collar_model(&self) -> Result<CollarModel> {
        match &self.geometry {
            Geometry::Collar(c) => CollarModel::new(
                self.weights.order(),
                c.delta,
                self.torus.d - 1,
                LaurentData::new(self.weights.a.clone())?,
            ),
            Geometry::CircleGlued(_) => Err(Error::InvalidParameter(
                "model geometry is circle-glued, not a collar".into(),
            )),
        }
    }

    pub fn xi_weights(&self) -> Vec<f64> {
        self.weights.xi_scalars(self.torus.xi_index)
    }
}

/// Full singular moment map value in `R^d`: the distinguished component is
/// the singular primitive (for collars) or the component-wise antiderivative
/// of the singular circle density (for circle-glued models, measured from
/// the component midpoint); the remaining components are the leaf point.
pub fn moment_eval(model: &ScenarioModel, x_or_theta: f64, leaf_point: &[f64]) -> Result<Vec<f64>> {
    let d = model.torus.d;
    if leaf_point.len() != d - 1 {
        return Err(Error::DimensionMismatch {
            expected: d - 1,
            got: leaf_point.len(),
        });
    }
    if !model.leaf.contains(leaf_point, LEAF_MEMBERSHIP_TOL) {
        return Err(Error::LeafMembership(leaf_point.to_vec()));
    }
    let w = model.xi_weights();
    let xi_value = match &model.geometry {
        Geometry::Collar(_) => singular_primitive(&w, x_or_theta)?,
        Geometry::CircleGlued(g) => {
            let (k, theta) = g.locate(x_or_theta);
            let f = g.defining_value(theta);
            if f.abs() < 1e-12 {
                return Err(Error::Pole(x_or_theta));
            }
            let (lo, hi) = g.component_arcs()[k];
            let mid = 0.5 * (lo + hi);
            adaptive_simpson(
                |t| singular_density(&w, g.defining_value(t)).unwrap_or(f64::INFINITY),
                mid,
                theta,
                QUADRATURE_TOL,
            )
        }
    };
    let mut out = Vec::with_capacity(d);
    let mut leaf_iter = leaf_point.iter();
    for i in 0..d {
        if i == model.torus.xi_index {
            out.push(xi_value);
        } else {
            out.push(*leaf_iter.next().unwrap());
        }
    }
    Ok(out)
}

/// One entry of the standing-assumption validation report.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Pass/fail report over the standing assumptions; failures are entries,
/// never panics or errors.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    pub entries: Vec<AssumptionCheck>,
}

impl AssumptionReport {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn failures(&self) -> Vec<&AssumptionCheck> {
        self.entries.iter().filter(|e| !e.passed).collect()
    }
}

/// Validates the standing assumptions: nonzero top weight along the
/// distinguished direction, annihilator constraint on every weight vector,
/// leaf polytope validity, and transversality of all zeros.
pub fn validate_assumptions(model: &ScenarioModel) -> AssumptionReport {
    let mut entries = Vec::new();
    let xi = model.torus.xi_index;
    let w = model.xi_weights();

    let wm = w.last().copied().unwrap_or(0.0);
    entries.push(AssumptionCheck {
        name: "assumption_1_top_weight".into(),
        passed: wm != 0.0,
        detail: if wm != 0.0 {
            format!("top weight w_m = {wm} is nonzero along the distinguished circle")
        } else {
            "Assumption 1 violated: the top modular weight pairs to zero with every circle direction".into()
        },
    });

    let mut bad = Vec::new();
    for (i, ai) in model.weights.a.iter().enumerate() {
        for (c, &v) in ai.iter().enumerate() {
            if c != xi && v.abs() > 1e-12 {
                bad.push(format!("a_{}[{}] = {}", i + 1, c, v));
            }
        }
    }
    entries.push(AssumptionCheck {
        name: "annihilator_constraint".into(),
        passed: bad.is_empty(),
        detail: if bad.is_empty() {
            "every a_i annihilates the leaf torus directions".into()
        } else {
            format!("nonzero leaf-torus components: {}", bad.join(", "))
        },
    });

    let leaf_ok = model.leaf.is_convex_position()
        && model.leaf.vertices.iter().flatten().all(|v| v.is_finite());
    entries.push(AssumptionCheck {
        name: "leaf_polytope".into(),
        passed: leaf_ok,
        detail: if leaf_ok {
            format!(
                "leaf polytope with {} vertices in R^{} is bounded and in convex position",
                model.leaf.vertices.len(),
                model.leaf.dim()
            )
        } else {
            "leaf vertices are not the extreme points of a bounded convex polytope".into()
        },
    });

    let (trans_ok, trans_detail) = match &model.geometry {
        Geometry::Collar(_) => (
            true,
            "collar defining function has unit slope at its zero".into(),
        ),
        Geometry::CircleGlued(g) => {
            let mut problems = Vec::new();
            for k in 0..g.zeros.len() {
                let next = g.zeros[(k + 1) % g.zeros.len()]
                    + if k + 1 == g.zeros.len() {
                        2.0 * PI
                    } else {
                        0.0
                    };
                if (next - g.zeros[k]).abs() < 1e-9 {
                    problems.push(format!(
                        "zeros {} and {} coincide",
                        k,
                        (k + 1) % g.zeros.len()
                    ));
                }
                let slope = g.defining_slope_at_zero(k);
                if slope.abs() < 1e-12 {
                    problems.push(format!("zero {k} is not simple (slope {slope:.3e})"));
                }
            }
            if problems.is_empty() {
                (true, "all zeros are simple and separated".to_string())
            } else {
                (false, problems.join("; "))
            }
        }
    };
    entries.push(AssumptionCheck {
        name: "transversality".into(),
        passed: trans_ok,
        detail: trans_detail,
    });

    AssumptionReport { entries }
}


#[cfg(test)]
mod tests {
    use super::test_fixtures::*;
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn moment_eval_collar_examples() {
        let model = collar_scenario(2, &[1.0, 3.0]);
        let v = moment_eval(&model, 1.0, &[0.5]).unwrap();
        assert_relative_eq!(v[0], 3.0, epsilon = 1e-14);
        assert_eq!(v[1], 0.5);

        // d = 1: point leaf, order 1, weight 2, at x = e
        let m1 = ScenarioModel {
            torus: TorusData { d: 1, xi_index: 0 },
            weights: ModularWeights::from_scalars(&[2.0], 1, 0),
            leaf: LeafPolytope::point(),
            geometry: Geometry::Collar(CollarGeometry { delta: 4.0 }),
            cuts: vec![],
        };
        let v = moment_eval(&m1, std::f64::consts::E, &[]).unwrap();
        assert_relative_eq!(v[0], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn moment_diverges_with_top_weight_sign_near_zero() {
        let model = collar_scenario(2, &[1.0, 3.0]);
        let v = moment_eval(&model, 1e-9, &[0.5]).unwrap();
        assert!(v[0] > 1e8);
        let neg = collar_scenario(2, &[1.0, -3.0]);
        let v = moment_eval(&neg, 1e-9, &[0.5]).unwrap();
        assert!(v[0] < -1e8);
    }

    #[test]
    fn moment_eval_rejects_pole_and_outside_leaf() {
        let model = collar_scenario(2, &[1.0, 3.0]);
        assert!(matches!(
            moment_eval(&model, 0.0, &[0.5]),
            Err(Error::Pole(_))
        ));
        assert!(matches!(
            moment_eval(&model, 0.5, &[1.5]),
            Err(Error::LeafMembership(_))
        ));
        assert!(matches!(
            moment_eval(&model, 0.5, &[0.1, 0.2]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn leaf_components_ignore_the_collar_coordinate() {
        let model = collar_scenario(2, &[0.0, 1.0]);
        let leaf = [0.25];
        let base = moment_eval(&model, 0.1, &leaf).unwrap();
        for k in 1..=100 {
            let x = 0.001 + 0.45 * k as f64 / 100.0;
            let v = moment_eval(&model, x, &leaf).unwrap();
            assert_eq!(v[1], base[1]);
        }
    }

    #[test]
    fn xi_component_ignores_leaf_point() {
        let model = collar_scenario(2, &[1.0, 2.0]);
        let a = moment_eval(&model, 0.3, &[0.0]).unwrap();
        let b = moment_eval(&model, 0.3, &[1.0]).unwrap();
        assert_eq!(a[0], b[0]);
    }

    #[test]
    fn restriction_to_constant_x_is_identity_on_leaf_coordinates() {
        let model = collar_scenario(1, &[1.0]);
        for k in 0..=10 {
            let p = [k as f64 / 10.0];
            let v = moment_eval(&model, 0.2, &p).unwrap();
            assert_eq!(v[1], p[0]);
        }
    }

    #[test]
    fn weight_scaling_scales_singular_part_exactly() {
        let base = collar_scenario(2, &[1.0, 3.0]);
        let doubled = collar_scenario(2, &[2.0, 6.0]);
        for &x in &[0.1, -0.3, 0.45] {
            let a = moment_eval(&base, x, &[0.5]).unwrap()[0];
            let b = moment_eval(&doubled, x, &[0.5]).unwrap()[0];
            assert_eq!((2.0 * a).to_bits(), b.to_bits());
        }
    }

    #[test]
    fn circle_moment_matches_cotangent_closed_form() {
        // density 1/sin^2 has antiderivative -cot(theta); both vanish at pi/2
        let model = circle_model_m2();
        for &theta in &[0.4, 1.0, 2.0, 2.8] {
            let v = moment_eval(&model, theta, &[0.5]).unwrap();
            let expect = -theta.cos() / theta.sin() - 0.0;
            assert_relative_eq!(v[0], expect, epsilon = 1e-8, max_relative = 1e-8);
        }
    }

    #[test]
    fn circle_moment_log_density_matches_half_angle_form() {
        // density 1/sin has antiderivative log|tan(theta/2)|
        let mut model = circle_model_m2();
        model.weights = ModularWeights::from_scalars(&[1.0], 2, 0);
        for &theta in &[0.5, 1.2, 2.4] {
            let v = moment_eval(&model, theta, &[0.5]).unwrap();
            let expect = (theta / 2.0).tan().abs().ln();
            assert_relative_eq!(v[0], expect, epsilon = 1e-8, max_relative = 1e-8);
        }
    }

    #[test]
    fn circle_moment_rejects_zero_set() {
        let model = circle_model_m2();
        assert!(matches!(
            moment_eval(&model, 0.0, &[0.5]),
            Err(Error::Pole(_))
        ));
        assert!(matches!(
            moment_eval(&model, PI, &[0.5]),
            Err(Error::Pole(_))
        ));
    }

    #[test]
    fn validation_examples() {
        // planted Assumption-1 violation: w_m = 0
        let bad = collar_scenario(2, &[1.0, 0.0]);
        let report = validate_assumptions(&bad);
        assert!(!report.all_passed());
        assert!(report
            .failures()
            .iter()
            .any(|f| f.name == "assumption_1_top_weight"));

        // annihilator violation: a_1 has a leaf-torus component
        let mut skew = collar_scenario(2, &[1.0, 1.0]);
        skew.weights.a[0][1] = 0.5;
        let report = validate_assumptions(&skew);
        assert!(report
            .failures()
            .iter()
            .any(|f| f.name == "annihilator_constraint"));

        // well-formed scenarios pass everything
        assert!(validate_assumptions(&collar_scenario(2, &[0.0, 1.0])).all_passed());
        assert!(validate_assumptions(&circle_model_m2()).all_passed());
    }

    #[test]
    fn validation_flags_non_extreme_leaf_vertices() {
        let mut model = collar_scenario(1, &[1.0]);
        model.leaf = LeafPolytope::new(vec![vec![0.0], vec![0.5], vec![1.0]]);
        let report = validate_assumptions(&model);
        assert!(report.failures().iter().any(|f| f.name == "leaf_polytope"));
    }

    #[test]
    fn validation_flags_coincident_zeros() {
        let mut model = circle_model_m2();
        model.geometry = Geometry::CircleGlued(CircleGluedModel::new(vec![1.0, 1.0 + 1e-12]));
        let report = validate_assumptions(&model);
        assert!(report.failures().iter().any(|f| f.name == "transversality"));
    }

    #[test]
    fn structural_check_catches_dimension_problems() {
        let mut model = collar_scenario(2, &[1.0, 1.0]);
        model.weights.a[0] = vec![1.0];
        assert!(matches!(model.structural_check(), Err(Error::Schema(_))));

        let mut model = collar_scenario(2, &[1.0, 1.0]);
        model.torus.xi_index = 5;
        assert!(model.structural_check().is_err());

        let mut model = circle_model_m2();
        if let Geometry::CircleGlued(ref mut g) = model.geometry {
            g.zeros = vec![0.0, 1.0, 2.0];
        }
        assert!(model.structural_check().is_err());

        assert!(collar_scenario(2, &[1.0, 1.0]).structural_check().is_ok());
    }

    #[test]
    fn circle_arcs_and_location() {
        let g = CircleGluedModel::new(vec![0.0, PI]);
        let arcs = g.component_arcs();
        assert_eq!(arcs.len(), 2);
        assert_relative_eq!(arcs[1].1, 2.0 * PI, epsilon = 1e-15);
        assert_eq!(g.locate(1.0).0, 0);
        assert_eq!(g.locate(4.0).0, 1);
        assert_eq!(g.locate(-0.5).0, 1); // wraps into the (pi, 2 pi) arc
        assert_relative_eq!(g.half_width(), PI / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn general_zero_sets_have_simple_zeros() {
        let g = CircleGluedModel::new(vec![0.3, 1.4, 3.3, 5.1]);
        for (k, &z) in g.zeros.iter().enumerate() {
            assert!(g.defining_value(z).abs() < 1e-14);
            assert!(g.defining_slope_at_zero(k).abs() > 1e-3);
            // numerical slope agrees with the closed form
            let h = 1e-7;
            let fd = (g.defining_value(z + h) - g.defining_value(z - h)) / (2.0 * h);
            assert_relative_eq!(fd, g.defining_slope_at_zero(k), max_relative = 1e-6);
        }
    }
}
