//! Sampling of desingularized moment images and the polytope machinery used
//! to verify their product and convexity structure.
//!
//! Image clouds are deterministic grids: equispaced points along each
//! collar/circle segment crossed with a regular barycentric grid of the leaf
//! polytope (vertices always included), evaluated through the desingularized
//! moment primitive, then filtered by the model's half-space cuts.

pub mod checks;
pub mod hull;

use crate::desing::{desing_primitive, DesingFamily};
use crate::error::{Error, Result};
use crate::hamiltonian::{Cut, Geometry, LeafPolytope, ScenarioModel};
use crate::numerics::{adaptive_simpson, lex_cmp, linspace, QUADRATURE_TOL};
use hull::{insert_coord, FaceKind};
use rayon::prelude::*;
use serde::Serialize;

/// Provenance of one cloud point: the component of `M \ Z` it was sampled
/// from and the side of the nearest zero (-1 / +1, 0 on the zero itself).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PointTag {
    pub component: usize,
    pub side: i8,
}

/// A finite sampled moment image in `R^dim`, `dim <= 3`.
#[derive(Debug, Clone)]
pub struct PointCloud {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub tags: Vec<PointTag>,
}

impl PointCloud {
    pub fn new(dim: usize, points: Vec<Vec<f64>>, tags: Vec<PointTag>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("empty point cloud".into()));
        }
        if points.len() != tags.len() {
            return Err(Error::InvalidParameter(
                "cloud points and tags disagree in length".into(),
            ));
        }
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: points.iter().map(|p| p.len()).find(|&l| l != dim).unwrap(),
            });
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "cloud contains non-finite coordinates".into(),
            ));
        }
        Ok(PointCloud { dim, points, tags })
    }

    /// The distinguished-coordinate values of points on the given side.
    pub fn side_values(&self, side: i8, xi_index: usize) -> Vec<f64> {
        let mut vals: Vec<f64> = self
            .points
            .iter()
            .zip(&self.tags)
            .filter(|(_, t)| t.side == side)
            .map(|(p, _)| p[xi_index])
            .collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals
    }
}

/// Deterministic sample of the leaf polytope: a regular barycentric grid
/// (fan triangulation for polygons) plus all vertices, lexicographically
/// sorted and deduplicated.
pub fn leaf_samples(leaf: &LeafPolytope, n_leaf: usize) -> Result<Vec<Vec<f64>>> {
    match leaf.dim() {
        0 => Ok(vec![vec![]]),
        1 => {
            let h = leaf.hull()?;
            let lo = h.vertices[0][0];
            let hi = h.vertices.last().unwrap()[0];
            Ok(linspace(lo, hi, n_leaf.max(2))
                .into_iter()
                .map(|x| vec![x])
                .collect())
        }
        2 => {
            let h = leaf.hull()?;
            let ring = match &h.faces {
                FaceKind::Polygon { ring } => ring.clone(),
                // degenerate leaves are reported by validation; sample what we can
                FaceKind::Segment => {
                    return Ok(h.vertices.clone());
                }
                _ => return Ok(h.vertices.clone()),
            };
            let ntris = ring.len() - 2;
            let mut level = 1usize;
            while ntris * (level + 1) * (level + 2) / 2 < n_leaf {
                level += 1;
            }
            let mut pts = Vec::new();
            let v0 = &h.vertices[ring[0]];
            for t in 1..ring.len() - 1 {
                let v1 = &h.vertices[ring[t]];
                let v2 = &h.vertices[ring[t + 1]];
                for i in 0..=level {
                    for j in 0..=(level - i) {
                        let k = level - i - j;
                        let l = level as f64;
                        pts.push(vec![
                            (i as f64 * v0[0] + j as f64 * v1[0] + k as f64 * v2[0]) / l,
                            (i as f64 * v0[1] + j as f64 * v1[1] + k as f64 * v2[1]) / l,
                        ]);
                    }
                }
            }
            pts.extend(h.vertices.iter().cloned());
            pts.sort_by(|a, b| lex_cmp(a, b));
            pts.dedup_by(|a, b| crate::numerics::euclid_dist(a, b) <= 1e-12);
            Ok(pts)
        }
        d => Err(Error::InvalidParameter(format!(
            "leaf polytopes of dimension {d} are not supported"
        ))),
    }
}

/// Largest spacing of the leaf sample grid (image-space leaf pitch).
fn leaf_pitch(leaf: &LeafPolytope, samples: &[Vec<f64>]) -> f64 {
    match leaf.dim() {
        0 => 0.0,
        1 => {
            let mut xs: Vec<f64> = samples.iter().map(|p| p[0]).collect();
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            xs.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
        }
        _ => {
            // nearest-neighbor spacing bound: max over samples of min distance
            // to another sample (the barycentric grid is regular, so this is
            // the subdivided edge length)
            samples
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    samples
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != i)
                        .map(|(_, q)| crate::numerics::euclid_dist(p, q))
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max)
        }
    }
}

/// One sampled segment of `M \ Z`.
#[derive(Debug, Clone)]
pub struct SegmentSample {
    /// Collar coordinate or circle angle per grid node.
    pub params: Vec<f64>,
    /// Raw distinguished-component values: the collar primitive (centered at
    /// the zero), or the running integral from the segment's left zero.
    pub raw: Vec<f64>,
}

#[derive(Debug, Clone)]
enum Segmentation {
    /// Master grid over the full two-sided collar.
    Collar {
        master: SegmentSample,
    },
    Circle {
        arcs: Vec<SegmentSample>,
    },
}

/// Deterministic image samples plus the grid-pitch metadata that the
/// per-scenario tolerances are derived from.
#[derive(Debug, Clone)]
pub struct ImageSamples {
    seg: Segmentation,
    pub leaf_points: Vec<Vec<f64>>,
    pub xi_pitch: f64,
    pub leaf_pitch: f64,
    pub xi_index: usize,
    pub leaf_dim: usize,
    cuts: Vec<Cut>,
}

impl ImageSamples {
    /// `max(xi pitch, leaf pitch)`: the image-space grid pitch that the
    /// default check tolerance (2x pitch) is computed from.
    pub fn pitch(&self) -> f64 {
        self.xi_pitch.max(self.leaf_pitch)
    }

    pub fn component_count(&self) -> usize {
        match &self.seg {
            Segmentation::Collar { .. } => 2,
            Segmentation::Circle { arcs } => arcs.len(),
        }
    }

    /// Centered distinguished-component values of one component:
    /// collar components keep the zero-based centering `s(0) = 0`; circle
    /// components are centered at their image midpoint.
    pub fn component_values(&self, comp: usize) -> (Vec<f64>, Vec<f64>) {
        match &self.seg {
            Segmentation::Collar { master } => {
                let keep = |x: &f64| {
                    if comp == 0 {
                        *x <= 0.0
                    } else {
                        *x >= 0.0
                    }
                };
                let params: Vec<f64> = master.params.iter().filter(|x| keep(x)).copied().collect();
                let values: Vec<f64> = master
                    .params
                    .iter()
                    .zip(&master.raw)
                    .filter(|(x, _)| keep(x))
                    .map(|(_, v)| *v)
                    .collect();
                (params, values)
            }
            Segmentation::Circle { arcs } => {
                let arc = &arcs[comp];
                let (min, max) = min_max(&arc.raw);
                let mid = 0.5 * (min + max);
                (
                    arc.params.clone(),
                    arc.raw.iter().map(|v| v - mid).collect(),
                )
            }
        }
    }

    /// Half-length of the component's distinguished-coordinate image (before
    /// cuts).
    pub fn half_length(&self, comp: usize) -> f64 {
        let (_, values) = self.component_values(comp);
        let (min, max) = min_max(&values);
        match &self.seg {
            Segmentation::Collar { .. } => min.abs().max(max.abs()),
            Segmentation::Circle { .. } => 0.5 * (max - min),
        }
    }

    fn cut_allows(&self, comp: usize, p: &[f64]) -> bool {
        self.cuts.iter().all(|c| {
            if c.component.is_some_and(|k| k != comp) {
                return true;
            }
            c.normal.iter().zip(p).map(|(n, x)| n * x).sum::<f64>() <= c.offset + 1e-12
        })
    }

    /// Image points of one component (cuts applied when requested).
    pub fn component_points(&self, comp: usize, apply_cuts: bool) -> Vec<Vec<f64>> {
        let (_, values) = self.component_values(comp);
        let mut out = Vec::with_capacity(values.len() * self.leaf_points.len());
        for v in &values {
            for l in &self.leaf_points {
                let p = insert_coord(l, self.xi_index, *v);
                if !apply_cuts || self.cut_allows(comp, &p) {
                    out.push(p);
                }
            }
        }
        out
    }

    /// The full tagged cloud (all components, cuts applied).
    pub fn cloud(&self) -> Result<PointCloud> {
        let dim = self.leaf_dim + 1;
        let mut points = Vec::new();
        let mut tags = Vec::new();
        match &self.seg {
            Segmentation::Collar { master } => {
                for (x, v) in master.params.iter().zip(&master.raw) {
                    let (component, side) = if *x < 0.0 {
                        (0, -1)
                    } else if *x > 0.0 {
                        (1, 1)
                    } else {
                        (0, 0)
                    };
                    for l in &self.leaf_points {
                        let p = insert_coord(l, self.xi_index, *v);
                        if self.cut_allows(component, &p) {
                            points.push(p);
                            tags.push(PointTag { component, side });
                        }
                    }
                }
            }
            Segmentation::Circle { arcs } => {
                for (component, arc) in arcs.iter().enumerate() {
                    let (min, max) = min_max(&arc.raw);
                    let mid = 0.5 * (min + max);
                    let theta_mid = 0.5 * (arc.params[0] + *arc.params.last().unwrap());
                    for (t, v) in arc.params.iter().zip(&arc.raw) {
                        let side = if *t < theta_mid { -1 } else { 1 };
                        for l in &self.leaf_points {
                            let p = insert_coord(l, self.xi_index, v - mid);
                            if self.cut_allows(component, &p) {
                                points.push(p);
                                tags.push(PointTag { component, side });
                            }
                        }
                    }
                }
            }
        }
        PointCloud::new(dim, points, tags)
    }

    /// Collar neighborhood of one zero: two-sided window with the
    /// distinguished values re-centered so the zero maps to 0.
    ///
    /// For a collar geometry this is the whole collar; for circle models the
    /// window takes the given fraction of each adjacent arc.
    pub fn zero_window(&self, zero_index: usize, fraction: f64) -> Result<ZeroWindow> {
        let dim = self.leaf_dim + 1;
        let mut points = Vec::new();
        let mut tags = Vec::new();
        match &self.seg {
            Segmentation::Collar { master } => {
                if zero_index != 0 {
                    return Err(Error::InvalidParameter(
                        "collar models have a single zero".into(),
                    ));
                }
                for (x, v) in master.params.iter().zip(&master.raw) {
                    let side = if *x < 0.0 {
                        -1
                    } else if *x > 0.0 {
                        1
                    } else {
                        0
                    };
                    for l in &self.leaf_points {
                        points.push(insert_coord(l, self.xi_index, *v));
                        tags.push(PointTag {
                            component: usize::from(*x > 0.0),
                            side,
                        });
                    }
                }
            }
            Segmentation::Circle { arcs } => {
                let r = arcs.len();
                if zero_index >= r {
                    return Err(Error::InvalidParameter(format!(
                        "zero index {zero_index} out of range ({r} zeros)"
                    )));
                }
                // right side: start of arc `zero_index`; left side: end of the
                // previous arc (wrapping)
                let right = &arcs[zero_index];
                let left = &arcs[(zero_index + r - 1) % r];
                let right_span = right.params.last().unwrap() - right.params[0];
                let left_span = left.params.last().unwrap() - left.params[0];
                for (t, v) in right.params.iter().zip(&right.raw) {
                    if t - right.params[0] <= fraction * right_span + 1e-12 {
                        let centered = v - right.raw[0];
                        let side = if t - right.params[0] < 1e-12 { 0 } else { 1 };
                        for l in &self.leaf_points {
                            points.push(insert_coord(l, self.xi_index, centered));
                            tags.push(PointTag {
                                component: zero_index,
                                side,
                            });
                        }
                    }
                }
                let left_end = *left.params.last().unwrap();
                let left_anchor = *left.raw.last().unwrap();
                for (t, v) in left.params.iter().zip(&left.raw) {
                    if left_end - t <= fraction * left_span + 1e-12 && left_end - t > 1e-12 {
                        let centered = v - left_anchor;
                        for l in &self.leaf_points {
                            points.push(insert_coord(l, self.xi_index, centered));
                            tags.push(PointTag {
                                component: (zero_index + r - 1) % r,
                                side: -1,
                            });
                        }
                    }
                }
            }
        }
        let cloud = PointCloud::new(dim, points, tags)?;
        let a_window = cloud
            .points
            .iter()
            .map(|p| p[self.xi_index].abs())
            .fold(0.0f64, f64::max);
        Ok(ZeroWindow { cloud, a_window })
    }
}

/// Two-sided window around one zero of the defining function.
#[derive(Debug, Clone)]
pub struct ZeroWindow {
    pub cloud: PointCloud,
    /// Maximum |distinguished coordinate| inside the window (the local image
    /// half-length the product check runs against).
    pub a_window: f64,
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

/// Fraction of each adjacent segment used for local windows around a zero.
pub const ZERO_WINDOW_FRACTION: f64 = 0.25;

/// Samples the desingularized moment image on the deterministic grid.
pub fn sample_components(
    model: &ScenarioModel,
    eps: f64,
    resolution: (usize, usize),
) -> Result<ImageSamples> {
    let (n_collar, n_leaf) = resolution;
    if n_collar < 8 || n_leaf < 1 {
        return Err(Error::InvalidParameter(format!(
            "resolution ({n_collar}, {n_leaf}) below the minimum (8, 1)"
        )));
    }
    if eps <= 0.0 || eps >= model.geometry.half_width() {
        return Err(Error::InvalidParameter(format!(
            "eps = {eps} must lie in (0, {})",
            model.geometry.half_width()
        )));
    }
    let w = model.xi_weights();
    let family = DesingFamily::new(model.weights.order(), eps)?;
    let leaf_points = leaf_samples(&model.leaf, n_leaf)?;
    let lpitch = leaf_pitch(&model.leaf, &leaf_points);

    let seg = match &model.geometry {
        Geometry::Collar(c) => {
            let params = linspace(-c.delta, c.delta, n_collar);
            let raw: Vec<f64> = params
                .par_iter()
                .map(|&x| desing_primitive(&family, &w, x))
                .collect();
            Segmentation::Collar {
                master: SegmentSample { params, raw },
            }
        }
        Geometry::CircleGlued(g) => {
            let arcs = g
                .component_arcs()
                .into_iter()
                .map(|(lo, hi)| {
                    let params = linspace(lo, hi, n_collar);
                    let increments: Vec<f64> = params
                        .par_windows(2)
                        .map(|pair| {
                            adaptive_simpson(
                                |t| family.density(&w, g.defining_value(t)),
                                pair[0],
                                pair[1],
                                QUADRATURE_TOL,
                            )
                        })
                        .collect();
                    let mut raw = Vec::with_capacity(params.len());
                    let mut acc = 0.0;
                    raw.push(0.0);
                    for inc in increments {
                        acc += inc;
                        raw.push(acc);
                    }
                    SegmentSample { params, raw }
                })
                .collect();
            Segmentation::Circle { arcs }
        }
    };

    let xi_pitch = match &seg {
        Segmentation::Collar { master } => master
            .raw
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .fold(0.0, f64::max),
        Segmentation::Circle { arcs } => arcs
            .iter()
            .flat_map(|a| a.raw.windows(2).map(|w| (w[1] - w[0]).abs()))
            .fold(0.0, f64::max),
    };

    Ok(ImageSamples {
        seg,
        leaf_points,
        xi_pitch,
        leaf_pitch: lpitch,
        xi_index: model.torus.xi_index,
        leaf_dim: model.torus.d - 1,
        cuts: model.cuts.clone(),
    })
}

/// A sampled image cloud together with its grid-pitch metadata.
#[derive(Debug, Clone)]
pub struct SampledImage {
    pub cloud: PointCloud,
    pub xi_pitch: f64,
    pub leaf_pitch: f64,
}

/// Samples the moment image of the model at smoothing width `eps`: the
/// deterministic product grid evaluated through the desingularized moment,
/// filtered by the model's cuts.
pub fn sample_image(
    model: &ScenarioModel,
    eps: f64,
    resolution: (usize, usize),
) -> Result<SampledImage> {
    let samples = sample_components(model, eps, resolution)?;
    Ok(SampledImage {
        cloud: samples.cloud()?,
        xi_pitch: samples.xi_pitch,
        leaf_pitch: samples.leaf_pitch,
    })
}
