//! Acceptance suite: one test per contract criterion, each printing a
//! single PASS/FAIL line (run with `--nocapture` to see them).

use bm_moment::collar::fit_laurent_coefficients;
use bm_moment::desing::{build_profile, compute_a_eps};
use bm_moment::hamiltonian::{Geometry, ScenarioModel};
use bm_moment::moment_image::checks::{
    check_global_structure, check_local_product, product_hausdorff, CheckTolerances,
};
use bm_moment::moment_image::hull::convex_hull;
use bm_moment::moment_image::{sample_components, ZERO_WINDOW_FRACTION};
use bm_moment::moser::{moser_flow, Collar2DForm, DensitySpec, PerturbationTerm};
use bm_moment::scenario::{bundled_scenarios, load_scenario_str};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn criterion(name: &str, f: impl FnOnce() -> Result<(), String>) {
    match f() {
        Ok(()) => println!("acceptance {name}: PASS"),
        Err(msg) => {
            println!("acceptance {name}: FAIL ({msg})");
            panic!("acceptance {name} failed: {msg}");
        }
    }
}

fn bundled_model(name: &str) -> ScenarioModel {
    let (_, json) = bundled_scenarios()
        .into_iter()
        .find(|(n, _)| *n == name)
        .unwrap_or_else(|| panic!("missing bundled scenario {name}"));
    load_scenario_str(json).unwrap().model
}

#[test]
fn local_product_even_order() {
    criterion("local product (even order)", || {
        let model = bundled_model("collar_m2_segment");
        for &eps in &[0.2, 0.1, 0.05] {
            let started = Instant::now();
            let samples = sample_components(&model, eps, (201, 41)).map_err(|e| e.to_string())?;
            let tol = 2.0 * samples.pitch();
            let a = compute_a_eps(&model, eps).map_err(|e| e.to_string())?;
            let window = samples
                .zero_window(0, ZERO_WINDOW_FRACTION)
                .map_err(|e| e.to_string())?;
            let report = check_local_product(&window.cloud, &model.leaf, 2, a, tol, 0)
                .map_err(|e| e.to_string())?;
            if !report.passed {
                return Err(format!(
                    "eps {eps}: defect {:.3e} above tolerance {tol:.3e}",
                    report.hausdorff_defect
                ));
            }
            let elapsed = started.elapsed();
            if elapsed.as_secs_f64() >= 10.0 {
                return Err(format!("eps {eps}: took {elapsed:?}, budget is 10 s"));
            }
        }
        Ok(())
    });
}

#[test]
fn fold_quotient_odd_orders() {
    criterion("fold quotient (odd orders)", || {
        for name in ["collar_m1_fold", "collar_m3_fold"] {
            let model = bundled_model(name);
            let m = model.weights.order();
            for &eps in &[0.2, 0.1, 0.05] {
                let samples =
                    sample_components(&model, eps, (201, 41)).map_err(|e| e.to_string())?;
                let tol = 2.0 * samples.pitch();
                let a = compute_a_eps(&model, eps).map_err(|e| e.to_string())?;
                let window = samples
                    .zero_window(0, ZERO_WINDOW_FRACTION)
                    .map_err(|e| e.to_string())?;
                let report = check_local_product(&window.cloud, &model.leaf, m, a, tol, 0)
                    .map_err(|e| e.to_string())?;
                let fold = report.fold.as_ref().ok_or("missing fold report")?;
                if !fold.passed || fold.max_gap > tol {
                    return Err(format!(
                        "{name} eps {eps}: fold multisets disagree (gap {:.3e})",
                        fold.max_gap
                    ));
                }
                if !report.passed {
                    return Err(format!(
                        "{name} eps {eps}: half-interval product defect {:.3e} > {tol:.3e}",
                        report.hausdorff_defect
                    ));
                }
                // mutation control: the naive two-sided product check fails
                let (naive, _) =
                    product_hausdorff(&window.cloud.points, &model.leaf.vertices, -a, a, 0)
                        .map_err(|e| e.to_string())?;
                if naive <= tol {
                    return Err(format!(
                        "{name} eps {eps}: naive two-sided check unexpectedly passed \
                         (defect {naive:.3e})"
                    ));
                }
            }
        }
        Ok(())
    });
}

#[test]
fn divergence_of_image_half_length() {
    criterion("divergence of the image half-length", || {
        let eps_schedule: Vec<f64> = (0..=5).map(|k| 0.2 * 0.5f64.powi(k)).collect();
        for (name, json) in bundled_scenarios() {
            let model = load_scenario_str(json).unwrap().model;
            let mut prev = 0.0;
            for &eps in &eps_schedule {
                let a = compute_a_eps(&model, eps).map_err(|e| format!("{name}: {e}"))?;
                if a <= prev {
                    return Err(format!(
                        "{name}: a_eps not strictly increasing at eps {eps} ({a} <= {prev})"
                    ));
                }
                prev = a;
            }
        }
        // single-term order-2 collar scenarios: a_eps exceeds 1/eps - 1/delta
        for name in [
            "collar_m2_segment",
            "collar_m2_triangle",
            "hemisphere_m2_point_leaf",
        ] {
            let model = bundled_model(name);
            let delta = match &model.geometry {
                Geometry::Collar(c) => c.delta,
                _ => unreachable!(),
            };
            for &eps in &eps_schedule {
                let a = compute_a_eps(&model, eps).unwrap();
                let bound = 1.0 / eps - 1.0 / delta;
                if a <= bound {
                    return Err(format!(
                        "{name}: a_eps = {a} does not exceed 1/eps - 1/delta = {bound} at eps {eps}"
                    ));
                }
            }
        }
        Ok(())
    });
}

#[test]
fn global_two_zero_products_coincide() {
    criterion("global products with coinciding leaf polytopes", || {
        let model = bundled_model("t2_leaf_segment_m2");
        for &eps in &[0.2, 0.1] {
            let report =
                check_global_structure(&model, eps, (201, 41), &CheckTolerances::default())
                    .map_err(|e| e.to_string())?;
            if report.components.len() != 2 {
                return Err("expected two components".into());
            }
            for c in &report.components {
                if c.classification != "product" {
                    return Err(format!(
                        "component {} classified {} instead of product",
                        c.component, c.classification
                    ));
                }
                if c.hausdorff_defect > c.tolerance {
                    return Err(format!(
                        "component {}: defect {:.3e} above 2x pitch {:.3e}",
                        c.component, c.hausdorff_defect, c.tolerance
                    ));
                }
            }
            if report.max_leaf_coincidence > 1e-9 {
                return Err(format!(
                    "leaf polytopes differ by {:.3e}",
                    report.max_leaf_coincidence
                ));
            }
        }
        Ok(())
    });
}

#[test]
fn global_planted_cut_recovery() {
    criterion("planted cut recovery", || {
        let model = bundled_model("t2_leaf_segment_m2_cut");
        for &eps in &[0.2, 0.1] {
            let report =
                check_global_structure(&model, eps, (201, 41), &CheckTolerances::default())
                    .map_err(|e| e.to_string())?;
            let cut_component = &report.components[0];
            if cut_component.classification != "cut-product" {
                return Err("cut component not classified as cut-product".into());
            }
            let rec = cut_component
                .cut_recovery
                .first()
                .ok_or("no cut recovery entry")?;
            if !rec.matched {
                return Err(format!(
                    "cut not recovered: angle {:.3e}, offset {:.3e}",
                    rec.angle_error, rec.offset_error
                ));
            }
            if rec.angle_error > 1e-3 {
                return Err(format!("normal angle error {:.3e} > 1e-3", rec.angle_error));
            }
            if rec.offset_error > 2.0 * report.grid_pitch {
                return Err(format!(
                    "offset error {:.3e} > 2x pitch {:.3e}",
                    rec.offset_error,
                    2.0 * report.grid_pitch
                ));
            }
            if !report.passed {
                return Err("global report failed".into());
            }
        }
        Ok(())
    });
}

#[test]
fn desingularization_contract() {
    criterion("desingularization contract (orders 1..6)", || {
        for m in 1..=6usize {
            for &eps in &[0.2, 0.1, 0.05] {
                let q = build_profile(m, eps).map_err(|e| e.to_string())?;
                // exact agreement outside the smoothing region, bit for bit
                for &mult in &[1.0, 1.25, 2.0, 4.0] {
                    for &side in &[1.0f64, -1.0] {
                        let x = side * eps * mult;
                        if q.density(x).to_bits() != x.powi(-(m as i32)).to_bits() {
                            return Err(format!("m {m}: density differs from x^-m at {x}"));
                        }
                    }
                }
                // one-sided derivatives of orders 0..m-1 at +-eps
                for &side in &[1.0f64, -1.0] {
                    let x0 = side * eps;
                    let inner = q.inner_jet(x0, m);
                    let outer = q.outer_jet(x0, m);
                    for k in 0..m {
                        let (a, b) = (inner.derivative(k), outer.derivative(k));
                        let rel = (a - b).abs() / b.abs().max(1e-300);
                        if rel > 1e-5 {
                            return Err(format!(
                                "m {m} eps {eps}: derivative {k} at {x0} has relative error {rel:.2e}"
                            ));
                        }
                    }
                }
                // parity and positivity / fold
                for &u in &[0.1, 0.33, 0.7, 0.95] {
                    let x = u * eps;
                    let (a, b) = (q.density(x), q.density(-x));
                    if m % 2 == 0 {
                        if a.to_bits() != b.to_bits() || a <= 0.0 {
                            return Err(format!("m {m}: even parity/positivity fails at {x}"));
                        }
                    } else if a.to_bits() != (-b).to_bits() || a <= 0.0 {
                        return Err(format!("m {m}: odd parity fails at {x}"));
                    }
                }
                if m % 2 == 0 {
                    if q.density(0.0) <= 0.0 {
                        return Err(format!("m {m}: density not positive at 0"));
                    }
                } else {
                    if q.density(0.0) != 0.0 {
                        return Err(format!("m {m}: no fold at 0"));
                    }
                    let slope = (q.density(1e-9 * eps) - q.density(-1e-9 * eps)) / (2e-9 * eps);
                    if slope <= 0.0 {
                        return Err(format!("m {m}: fold not transversal"));
                    }
                }
            }
        }
        Ok(())
    });
}

fn demo_moser_form(amplitude: f64, n: usize, delta: f64) -> Collar2DForm {
    Collar2DForm {
        m: 1,
        delta,
        nx: n,
        ntheta: n,
        density: DensitySpec {
            base: vec![1.0],
            perturbations: if amplitude == 0.0 {
                vec![]
            } else {
                vec![PerturbationTerm {
                    amplitude,
                    x_power: 1,
                    harmonic: 1,
                    phase: 0.0,
                }]
            },
        },
    }
}

#[test]
fn normal_form_flow_residual_and_orders() {
    criterion("normal-form flow residual and convergence orders", || {
        // zero perturbation: exact identity, residual exactly zero
        let zero = moser_flow(&demo_moser_form(0.0, 64, 0.1), 100).map_err(|e| e.to_string())?;
        if zero.residual != 0.0 {
            return Err(format!("zero perturbation residual {} != 0", zero.residual));
        }
        // amplitude 0.05 on 64 x 64 with 100 steps
        let run = moser_flow(&demo_moser_form(0.05, 64, 0.1), 100).map_err(|e| e.to_string())?;
        if run.residual >= 1e-5 {
            return Err(format!("residual {:.3e} >= 1e-5", run.residual));
        }
        // grid convergence order ~ 2 (residual vs grid pitch)
        let mut residuals = Vec::new();
        for n in [16, 32, 64] {
            residuals.push(
                moser_flow(&demo_moser_form(0.05, n, 0.1), 100)
                    .unwrap()
                    .residual,
            );
        }
        let grid_slopes: Vec<f64> = residuals.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        for s in &grid_slopes {
            if (s - 2.0).abs() > 0.4 {
                return Err(format!(
                    "grid slope {s:.3} outside 2 +- 20% (all: {grid_slopes:?})"
                ));
            }
        }
        // time-step convergence order ~ 4 (map refinement differences on a
        // strongly t-dependent flow, where the RK4 error is well above noise)
        let form = demo_moser_form(0.5, 16, 1.0);
        let sup_diff = |a: &Vec<Vec<f64>>, b: &Vec<Vec<f64>>| -> f64 {
            a.iter()
                .flatten()
                .zip(b.iter().flatten())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0f64, f64::max)
        };
        let runs: Vec<_> = [4usize, 8, 16, 32]
            .iter()
            .map(|&s| moser_flow(&form, s).unwrap().displacement)
            .collect();
        let diffs: Vec<f64> = runs.windows(2).map(|w| sup_diff(&w[0], &w[1])).collect();
        let dt_slopes: Vec<f64> = diffs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        for s in &dt_slopes {
            if (s - 4.0).abs() > 0.8 {
                return Err(format!(
                    "time-step slope {s:.3} outside 4 +- 20% (all: {dt_slopes:?})"
                ));
            }
        }
        Ok(())
    });
}

#[test]
fn laurent_weight_recovery() {
    criterion("weight recovery from noiseless samples", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
        for trial in 0..100 {
            let m = rng.random_range(1..=4usize);
            let w: Vec<f64> = (0..m).map(|_| rng.random_range(-3.0..3.0)).collect();
            let smooth: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
            let mut samples = Vec::new();
            for side in [-1.0, 1.0] {
                for i in 0..30 {
                    let x = side * (0.05 + 0.95 * i as f64 / 29.0);
                    let mut y = bm_moment::collar::singular_primitive(&w, x).unwrap();
                    for (k, c) in smooth.iter().enumerate() {
                        y += c * x.powi(k as i32);
                    }
                    samples.push((x, y));
                }
            }
            let fit = fit_laurent_coefficients(&samples, m, 3).map_err(|e| e.to_string())?;
            for (j, (a, b)) in fit.weights.iter().zip(&w).enumerate() {
                if (a - b).abs() > 1e-8 {
                    return Err(format!(
                        "trial {trial}: weight {j} recovered {a} vs planted {b}"
                    ));
                }
            }
            for (k, (a, b)) in fit.smooth.iter().zip(&smooth).enumerate() {
                if (a - b).abs() > 1e-8 {
                    return Err(format!(
                        "trial {trial}: smooth coefficient {k} recovered {a} vs planted {b}"
                    ));
                }
            }
        }
        Ok(())
    });
}

// ---------------------------------------------------------------------------
// brute-force hull oracle (support-plane enumeration), used only here
// ---------------------------------------------------------------------------

fn oracle_vertices(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let dim = points[0].len();
    let n = points.len();
    let tol = 1e-9;
    let mut marked = vec![false; n];
    match dim {
        1 => {
            let mut min = 0;
            let mut max = 0;
            for (i, p) in points.iter().enumerate() {
                if p[0] < points[min][0] {
                    min = i;
                }
                if p[0] > points[max][0] {
                    max = i;
                }
            }
            marked[min] = true;
            marked[max] = true;
        }
        2 => {
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let (a, b) = (&points[i], &points[j]);
                    let nx = b[1] - a[1];
                    let ny = a[0] - b[0];
                    let mut all_le = true;
                    for (k, p) in points.iter().enumerate() {
                        if k == i || k == j {
                            continue;
                        }
                        let s = nx * (p[0] - a[0]) + ny * (p[1] - a[1]);
                        if s > tol {
                            all_le = false;
                            break;
                        }
                    }
                    if all_le {
                        marked[i] = true;
                        marked[j] = true;
                    }
                }
            }
        }
        _ => {
            for i in 0..n {
                for j in (i + 1)..n {
                    for k in (j + 1)..n {
                        let (a, b, c) = (&points[i], &points[j], &points[k]);
                        let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
                        let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
                        let nrm = [
                            u[1] * v[2] - u[2] * v[1],
                            u[2] * v[0] - u[0] * v[2],
                            u[0] * v[1] - u[1] * v[0],
                        ];
                        let len = (nrm[0] * nrm[0] + nrm[1] * nrm[1] + nrm[2] * nrm[2]).sqrt();
                        if len < 1e-12 {
                            continue;
                        }
                        let mut pos = false;
                        let mut neg = false;
                        for (l, p) in points.iter().enumerate() {
                            if l == i || l == j || l == k {
                                continue;
                            }
                            let s = (nrm[0] * (p[0] - a[0])
                                + nrm[1] * (p[1] - a[1])
                                + nrm[2] * (p[2] - a[2]))
                                / len;
                            if s > tol {
                                pos = true;
                            } else if s < -tol {
                                neg = true;
                            }
                            if pos && neg {
                                break;
                            }
                        }
                        if !(pos && neg) {
                            marked[i] = true;
                            marked[j] = true;
                            marked[k] = true;
                        }
                    }
                }
            }
        }
    }
    let mut out: Vec<Vec<f64>> = points
        .iter()
        .zip(&marked)
        .filter(|(_, &m)| m)
        .map(|(p, _)| p.clone())
        .collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    out
}

fn same_vertex_sets(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    a.iter().zip(b).all(|(p, q)| {
        p.iter()
            .zip(q)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
            <= tol
    })
}

#[test]
fn hull_oracle_agreement() {
    criterion("hull agreement with the brute-force oracle", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
        for trial in 0..500 {
            let dim = match trial % 5 {
                0 => 1,
                1 | 2 => 2,
                _ => 3,
            };
            let n = rng.random_range((dim + 2)..=60usize);
            let on_sphere = trial % 7 == 3; // all-extreme configurations
            let points: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    let mut p: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
                    if on_sphere {
                        let norm = p.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-9);
                        p.iter_mut().for_each(|v| *v /= norm);
                    }
                    p
                })
                .collect();
            let hull = convex_hull(&points).map_err(|e| e.to_string())?;
            let oracle = oracle_vertices(&points);
            if !same_vertex_sets(&hull.vertices, &oracle, 1e-9) {
                return Err(format!(
                    "trial {trial} (dim {dim}, n {n}): hull has {} vertices, oracle {}",
                    hull.vertices.len(),
                    oracle.len()
                ));
            }
            // idempotence
            let again = convex_hull(&hull.vertices).map_err(|e| e.to_string())?;
            if !same_vertex_sets(&hull.vertices, &again.vertices, 1e-12) {
                return Err(format!("trial {trial}: hull not idempotent"));
            }
            // membership monotonicity: adding an interior point changes nothing
            if hull.vertices.len() > dim {
                let mut weights: Vec<f64> = (0..hull.vertices.len())
                    .map(|_| rng.random_range(0.01..1.0))
                    .collect();
                let total: f64 = weights.iter().sum();
                weights.iter_mut().for_each(|w| *w /= total);
                let interior: Vec<f64> = (0..dim)
                    .map(|c| {
                        hull.vertices
                            .iter()
                            .zip(&weights)
                            .map(|(v, w)| v[c] * w)
                            .sum()
                    })
                    .collect();
                let mut augmented = points.clone();
                augmented.push(interior);
                let grown = convex_hull(&augmented).map_err(|e| e.to_string())?;
                if !same_vertex_sets(&hull.vertices, &grown.vertices, 1e-12) {
                    return Err(format!(
                        "trial {trial}: interior point changed the hull vertex set"
                    ));
                }
            }
        }
        Ok(())
    });
}
