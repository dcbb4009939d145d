//! Verification of the product structure of moment images: local two-sided
//! product and fold checks around a zero, global per-component
//! classification (full product vs half-space-cut product), and the
//! raster-based convexity check.

use super::hull::{
    clip_polytope, convex_hull, hausdorff_distance, product_polytope, HalfSpace, Polytope,
};
use super::{sample_components, PointCloud};
use crate::desing::compute_a_eps;
use crate::error::{Error, Result};
use crate::hamiltonian::{Geometry, LeafPolytope, ScenarioModel};
use rayon::prelude::*;
use serde::Serialize;

/// Tolerance overrides for the structure checks; anything left `None` is
/// derived from the image grid pitch (2x pitch).
#[derive(Debug, Clone, Serialize)]
pub struct CheckTolerances {
    /// Hausdorff tolerance of product comparisons.
    pub product: Option<f64>,
    /// Maximum Hausdorff distance for leaf polytope coincidence.
    pub coincidence: f64,
    /// Maximum angle (radians) between a planted cut normal and the
    /// recovered facet normal.
    pub cut_angle: f64,
    /// Offset tolerance for cut recovery (default: 2x grid pitch).
    pub cut_offset: Option<f64>,
}

impl Default for CheckTolerances {
    fn default() -> Self {
        CheckTolerances {
            product: None,
            coincidence: 1e-9,
            cut_angle: 1e-3,
            cut_offset: None,
        }
    }
}

/// Hausdorff distance between the hull of a cloud and the product
/// `leaf x [lo, hi]`, with the witness point realizing the defect.
pub fn product_hausdorff(
    points: &[Vec<f64>],
    leaf_vertices: &[Vec<f64>],
    lo: f64,
    hi: f64,
    xi_index: usize,
) -> Result<(f64, Option<Vec<f64>>)> {
    let hull = convex_hull(points)?;
    let expected = product_polytope(leaf_vertices, lo, hi, xi_index)?;
    hausdorff_with_witness(&hull, &expected)
}

fn hausdorff_with_witness(a: &Polytope, b: &Polytope) -> Result<(f64, Option<Vec<f64>>)> {
    if a.ambient_dim != b.ambient_dim {
        return Err(Error::DimensionMismatch {
            expected: a.ambient_dim,
            got: b.ambient_dim,
        });
    }
    let mut best = 0.0f64;
    let mut witness = None;
    for v in &a.vertices {
        let d = b.distance(v);
        if d > best {
            best = d;
            witness = Some(v.clone());
        }
    }
    for v in &b.vertices {
        let d = a.distance(v);
        if d > best {
            best = d;
            witness = Some(v.clone());
        }
    }
    Ok((best, witness))
}

/// Fold identification result: the two collar sides' distinguished
/// coordinates compared as multisets.
#[derive(Debug, Clone, Serialize)]
pub struct FoldReport {
    pub passed: bool,
    pub max_gap: f64,
    pub left_count: usize,
    pub right_count: usize,
}

/// Result of the local product check around one zero.
#[derive(Debug, Clone, Serialize)]
pub struct LocalProductReport {
    pub passed: bool,
    /// "product" for even order, "fold-half-product" for odd.
    pub mode: String,
    pub hausdorff_defect: f64,
    pub tolerance: f64,
    pub a_eps: f64,
    pub fold: Option<FoldReport>,
    pub witness: Option<Vec<f64>>,
    pub detail: String,
}

/// Verifies the local structure of a two-sided cloud around one zero:
/// for even `m` the hull must match `leaf x [-a_eps, a_eps]`; for odd `m`
/// the two sides must coincide as multisets (the fold identification) and
/// the hull must match the half product `leaf x [0, a_eps]`.
pub fn check_local_product(
    cloud: &PointCloud,
    leaf: &LeafPolytope,
    m: usize,
    a_eps: f64,
    tol: f64,
    xi_index: usize,
) -> Result<LocalProductReport> {
    if m % 2 == 0 {
        let (defect, witness) =
            product_hausdorff(&cloud.points, &leaf.vertices, -a_eps, a_eps, xi_index)?;
        let passed = defect <= tol;
        Ok(LocalProductReport {
            passed,
            mode: "product".into(),
            hausdorff_defect: defect,
            tolerance: tol,
            a_eps,
            fold: None,
            witness: if passed { None } else { witness },
            detail: format!(
                "two-sided product defect {defect:.3e} against leaf x [-{a_eps:.6}, {a_eps:.6}]"
            ),
        })
    } else {
        let left = cloud.side_values(-1, xi_index);
        let right = cloud.side_values(1, xi_index);
        let mut fold_gap = 0.0f64;
        let counts_match = left.len() == right.len();
        if counts_match {
            for (l, r) in left.iter().zip(&right) {
                fold_gap = fold_gap.max((l - r).abs());
            }
        }
        let fold_passed = counts_match && fold_gap <= tol && !left.is_empty();
        let (defect, witness) =
            product_hausdorff(&cloud.points, &leaf.vertices, 0.0, a_eps, xi_index)?;
        let product_passed = defect <= tol;
        let passed = fold_passed && product_passed;
        Ok(LocalProductReport {
            passed,
            mode: "fold-half-product".into(),
            hausdorff_defect: defect,
            tolerance: tol,
            a_eps,
            fold: Some(FoldReport {
                passed: fold_passed,
                max_gap: fold_gap,
                left_count: left.len(),
                right_count: right.len(),
            }),
            witness: if passed { None } else { witness },
            detail: format!(
                "fold gap {fold_gap:.3e}, half-product defect {defect:.3e} against leaf x [0, {a_eps:.6}]"
            ),
        })
    }
}

/// Raster-based convexity check: the hull interior is rasterized at pitch
/// `tol` and every raster point must be within `2 * tol` of a cloud point.
#[derive(Debug, Clone, Serialize)]
pub struct ConvexityReport {
    pub passed: bool,
    pub max_gap: f64,
    pub raster_count: usize,
    /// Raster pitch actually used (coarsened if the raster would exceed the
    /// size cap).
    pub effective_pitch: f64,
    /// Containment of the cloud in its own hull (holds by construction; the
    /// report records it alongside the gap scan).
    pub cloud_inside_hull: bool,
    pub witness: Option<Vec<f64>>,
}

const RASTER_CAP: usize = 4_000_000;

pub fn convexity_check(cloud: &PointCloud, tol: f64) -> Result<ConvexityReport> {
    if cloud.points.len() < 2 {
        return Err(Error::InvalidParameter(
            "convexity check needs at least two points".into(),
        ));
    }
    if tol <= 0.0 {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let hull = convex_hull(&cloud.points)?;
    let dim = cloud.dim;
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for v in &hull.vertices {
        for i in 0..dim {
            lo[i] = lo[i].min(v[i]);
            hi[i] = hi[i].max(v[i]);
        }
    }
    let mut pitch = tol;
    let steps = |pitch: f64| -> Vec<usize> {
        (0..dim)
            .map(|i| ((hi[i] - lo[i]) / pitch).floor() as usize + 1)
            .collect()
    };
    while steps(pitch).iter().product::<usize>() > RASTER_CAP {
        pitch *= 1.5;
    }
    let counts = steps(pitch);
    let total: usize = counts.iter().product();

    // bucket cloud points on a uniform grid with cell size 2 tol
    let cell = 2.0 * tol;
    let key = |p: &[f64]| -> Vec<i64> {
        (0..dim)
            .map(|i| ((p[i] - lo[i]) / cell).floor() as i64)
            .collect()
    };
    let mut buckets: std::collections::HashMap<Vec<i64>, Vec<usize>> =
        std::collections::HashMap::new();
    for (idx, p) in cloud.points.iter().enumerate() {
        buckets.entry(key(p)).or_default().push(idx);
    }

    let raster_point = |flat: usize| -> Vec<f64> {
        let mut rem = flat;
        let mut p = vec![0.0; dim];
        for i in 0..dim {
            let c = rem % counts[i];
            rem /= counts[i];
            p[i] = lo[i] + c as f64 * pitch;
        }
        p
    };

    let gaps: Vec<(f64, usize)> = (0..total)
        .into_par_iter()
        .filter_map(|flat| {
            let p = raster_point(flat);
            if !hull.facets.iter().all(|h| h.contains(&p, 1e-12)) {
                return None;
            }
            let k = key(&p);
            let mut best = f64::INFINITY;
            let ranges: Vec<std::ops::RangeInclusive<i64>> =
                k.iter().map(|&c| (c - 1)..=(c + 1)).collect();
            let mut stack = vec![Vec::with_capacity(dim)];
            for r in &ranges {
                let mut next = Vec::new();
                for pref in stack {
                    for c in r.clone() {
                        let mut q: Vec<i64> = pref.clone();
                        q.push(c);
                        next.push(q);
                    }
                }
                stack = next;
            }
            for cell_key in stack {
                if let Some(idxs) = buckets.get(&cell_key) {
                    for &i in idxs {
                        let d = crate::numerics::euclid_dist(&p, &cloud.points[i]);
                        if d < best {
                            best = d;
                        }
                    }
                }
            }
            if best.is_infinite() {
                // no cloud point in the neighborhood: exact scan for the witness
                best = cloud
                    .points
                    .iter()
                    .map(|q| crate::numerics::euclid_dist(&p, q))
                    .fold(f64::INFINITY, f64::min);
            }
            Some((best, flat))
        })
        .collect();

    let mut max_gap = 0.0f64;
    let mut witness_flat = None;
    let mut raster_count = 0usize;
    for (g, flat) in gaps {
        raster_count += 1;
        if g > max_gap {
            max_gap = g;
            witness_flat = Some(flat);
        }
    }
    let scale = hull.extent().max(1.0);
    let cloud_inside_hull = cloud
        .points
        .iter()
        .all(|p| hull.facets.iter().all(|h| h.contains(p, 1e-9 * scale)));
    let passed = max_gap <= 2.0 * tol && cloud_inside_hull;
    Ok(ConvexityReport {
        passed,
        max_gap,
        raster_count,
        effective_pitch: pitch,
        cloud_inside_hull,
        witness: if passed {
            None
        } else {
            witness_flat.map(raster_point)
        },
    })
}

/// Match/recovery data for one planted cut.
#[derive(Debug, Clone, Serialize)]
pub struct CutRecovery {
    pub planted_normal: Vec<f64>,
    pub planted_offset: f64,
    pub matched: bool,
    pub angle_error: f64,
    pub offset_error: f64,
}

/// Per-component classification of the global image.
#[derive(Debug, Clone, Serialize)]
pub struct ComponentReport {
    pub component: usize,
    /// "product" (case 1) or "cut-product" (case 2).
    pub classification: String,
    pub half_length: f64,
    pub hausdorff_defect: f64,
    pub tolerance: f64,
    pub hull_vertex_count: usize,
    pub recovered_cuts: Vec<HalfSpace>,
    pub cut_recovery: Vec<CutRecovery>,
    pub passed: bool,
    pub detail: String,
}

/// Global classification report.
#[derive(Debug, Clone, Serialize)]
pub struct GlobalReport {
    pub components: Vec<ComponentReport>,
    /// Pairwise Hausdorff distances between consecutive components' leaf
    /// polytope projections.
    pub leaf_coincidence: Vec<(usize, usize, f64)>,
    pub max_leaf_coincidence: f64,
    pub a_eps: f64,
    pub grid_pitch: f64,
    pub passed: bool,
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

fn facet_matches_product(h: &HalfSpace, product: &Polytope, offset_tol: f64) -> bool {
    product.facets.iter().any(|g| {
        let c: f64 = h.normal.iter().zip(&g.normal).map(|(a, b)| a * b).sum();
        c >= 1.0 - 1e-9 && (h.offset - g.offset).abs() <= offset_tol
    })
}

/// Classifies each component of `M \ Z`: components bounded by two zeros
/// with no cuts must match the full product `leaf x [-a, a]`; components
/// with cuts or a single boundary zero must match the product clipped by
/// the recovered half-spaces.
pub fn check_global_structure(
    model: &ScenarioModel,
    eps: f64,
    resolution: (usize, usize),
    tols: &CheckTolerances,
) -> Result<GlobalReport> {
    let samples = sample_components(model, eps, resolution)?;
    let tol = tols.product.unwrap_or(2.0 * samples.pitch());
    let cut_offset_tol = tols.cut_offset.unwrap_or(2.0 * samples.pitch());
    let a_eps = compute_a_eps(model, eps)?;
    let xi = model.torus.xi_index;
    let ncomp = samples.component_count();

    let collar_like = matches!(model.geometry, Geometry::Collar(_));
    let global_half = (0..ncomp)
        .map(|k| samples.half_length(k))
        .fold(0.0f64, f64::max);

    let mut components = Vec::new();
    let mut leaf_hulls: Vec<Option<Polytope>> = Vec::new();
    for comp in 0..ncomp {
        let comp_cuts: Vec<&crate::hamiltonian::Cut> = model
            .cuts
            .iter()
            .filter(|c| c.component.is_none_or(|k| k == comp))
            .collect();
        let points = samples.component_points(comp, true);
        let hull = convex_hull(&points)?;
        let case_two = collar_like || !comp_cuts.is_empty();
        let base_half = if collar_like {
            global_half
        } else {
            samples.half_length(comp)
        };
        let base = product_polytope(&model.leaf.vertices, -base_half, base_half, xi)?;

        let (classification, defect, recovered, cut_recovery, passed, detail) = if !case_two {
            let (defect, _) = hausdorff_with_witness(&hull, &base)?;
            let passed = defect <= tol;
            (
                "product".to_string(),
                defect,
                vec![],
                vec![],
                passed,
                format!("full product defect {defect:.3e}"),
            )
        } else {
            // recovered half-spaces: hull facets not matching the base product
            let recovered: Vec<HalfSpace> = hull
                .facets
                .iter()
                .filter(|h| !facet_matches_product(h, &base, tol.max(cut_offset_tol)))
                .cloned()
                .collect();
            let mut expected = base.clone();
            for h in &recovered {
                expected = clip_polytope(&expected, h)?;
            }
            let (defect, _) = hausdorff_with_witness(&hull, &expected)?;
            let mut cut_recovery = Vec::new();
            let mut cuts_ok = true;
            for cut in &comp_cuts {
                let n = unit(&cut.normal);
                let scale = cut.normal.iter().map(|x| x * x).sum::<f64>().sqrt();
                let planted_offset = cut.offset / scale;
                let best = recovered
                    .iter()
                    .map(|h| {
                        let c: f64 = h.normal.iter().zip(&n).map(|(a, b)| a * b).sum();
                        let angle = c.clamp(-1.0, 1.0).acos();
                        let off = (h.offset - planted_offset).abs();
                        (angle, off)
                    })
                    .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                let (angle_error, offset_error) =
                    best.unwrap_or((std::f64::consts::PI, f64::INFINITY));
                let matched = angle_error <= tols.cut_angle && offset_error <= cut_offset_tol;
                cuts_ok &= matched;
                cut_recovery.push(CutRecovery {
                    planted_normal: cut.normal.clone(),
                    planted_offset: cut.offset,
                    matched,
                    angle_error,
                    offset_error,
                });
            }
            let passed = defect <= tol && cuts_ok;
            let detail = format!(
                "cut-product defect {defect:.3e} with {} recovered half-space(s)",
                recovered.len()
            );
            (
                "cut-product".to_string(),
                defect,
                recovered,
                cut_recovery,
                passed,
                detail,
            )
        };

        // leaf projection for the coincidence report
        let leaf_hull = if model.torus.d >= 2 {
            let projected: Vec<Vec<f64>> = points
                .iter()
                .map(|p| {
                    p.iter()
                        .enumerate()
                        .filter(|&(i, _)| i != xi)
                        .map(|(_, &v)| v)
                        .collect()
                })
                .collect();
            Some(convex_hull(&projected)?)
        } else {
            None
        };
        leaf_hulls.push(leaf_hull);

        components.push(ComponentReport {
            component: comp,
            classification,
            half_length: samples.half_length(comp),
            hausdorff_defect: defect,
            tolerance: tol,
            hull_vertex_count: hull.vertices.len(),
            recovered_cuts: recovered,
            cut_recovery,
            passed,
            detail,
        });
    }

    let mut leaf_coincidence = Vec::new();
    let mut max_leaf = 0.0f64;
    if ncomp >= 2 {
        let pairs: Vec<(usize, usize)> = if ncomp == 2 {
            vec![(0, 1)]
        } else {
            (0..ncomp).map(|k| (k, (k + 1) % ncomp)).collect()
        };
        for (i, j) in pairs {
            if let (Some(a), Some(b)) = (&leaf_hulls[i], &leaf_hulls[j]) {
                let d = hausdorff_distance(a, b)?;
                max_leaf = max_leaf.max(d);
                leaf_coincidence.push((i, j, d));
            }
        }
    }

    let passed = components.iter().all(|c| c.passed) && max_leaf <= tols.coincidence;
    Ok(GlobalReport {
        components,
        leaf_coincidence,
        max_leaf_coincidence: max_leaf,
        a_eps,
        grid_pitch: samples.pitch(),
        passed,
    })
}
