//! JSON scenario schema, the bundled scenario corpus, and the check runner
//! that produces point-cloud CSVs, hull JSONs and the pass/fail report.

use crate::collar::{fit_laurent_coefficients, singular_primitive};
use crate::desing::{compute_a_eps, DesingFamily};
use crate::error::{Error, Result};
use crate::hamiltonian::{validate_assumptions, AssumptionReport, Geometry, ScenarioModel};
use crate::moment_image::checks::{
    check_global_structure, check_local_product, convexity_check, CheckTolerances,
    LocalProductReport,
};
use crate::moment_image::hull::convex_hull;
use crate::moment_image::{sample_components, PointCloud, ZERO_WINDOW_FRACTION};
use crate::moser::{moser_flow, Collar2DForm};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;
use std::time::Instant;

/// Current scenario schema version.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    Local,
    Global,
    Convexity,
    Fold,
    Desing,
    Moser,
    Fit,
}

impl std::fmt::Display for CheckKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CheckKind::Local => "local",
            CheckKind::Global => "global",
            CheckKind::Convexity => "convexity",
            CheckKind::Fold => "fold",
            CheckKind::Desing => "desing",
            CheckKind::Moser => "moser",
            CheckKind::Fit => "fit",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Resolution {
    pub n_collar: usize,
    pub n_leaf: usize,
}

/// Optional tolerance overrides; anything absent is derived per scenario
/// (products: 2x image grid pitch).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ToleranceOverrides {
    #[serde(default)]
    pub product: Option<f64>,
    #[serde(default)]
    pub coincidence: Option<f64>,
    #[serde(default)]
    pub cut_angle: Option<f64>,
    #[serde(default)]
    pub cut_offset: Option<f64>,
    #[serde(default)]
    pub fit: Option<f64>,
    #[serde(default)]
    pub desing_derivative: Option<f64>,
}

/// Normal-form flow block of a scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MoserBlock {
    pub form: Collar2DForm,
    pub steps: usize,
    #[serde(default = "default_moser_tol")]
    pub residual_tol: f64,
}

fn default_moser_tol() -> f64 {
    1e-5
}

/// A complete scenario: model, smoothing schedule, resolution and the checks
/// to run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    pub model: ScenarioModel,
    pub eps_list: Vec<f64>,
    pub resolution: Resolution,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
    pub checks: Vec<CheckKind>,
    #[serde(default)]
    pub moser: Option<MoserBlock>,
}

impl Scenario {
    /// Schema-level validation (shape and bounds, not the standing
    /// assumptions).
    pub fn validate_schema(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.name.is_empty() {
            return Err(Error::Schema("scenario name must be nonempty".into()));
        }
        self.model.structural_check()?;
        if self.eps_list.is_empty() {
            return Err(Error::Schema("eps_list must be nonempty".into()));
        }
        let hw = self.model.geometry.half_width();
        for pair in self.eps_list.windows(2) {
            if pair[1] >= pair[0] {
                return Err(Error::Schema(format!(
                    "eps_list must be strictly decreasing ({} then {})",
                    pair[0], pair[1]
                )));
            }
        }
        for &e in &self.eps_list {
            if !(e > 0.0 && e < hw) {
                return Err(Error::Schema(format!(
                    "eps {e} outside (0, {hw}) for this geometry"
                )));
            }
        }
        if self.resolution.n_collar < 8 || self.resolution.n_leaf < 1 {
            return Err(Error::Schema(format!(
                "resolution ({}, {}) below the minimum (8, 1)",
                self.resolution.n_collar, self.resolution.n_leaf
            )));
        }
        if self.checks.contains(&CheckKind::Moser) && self.moser.is_none() {
            return Err(Error::Schema(
                "check \"moser\" requires a moser block".into(),
            ));
        }
        if let Some(block) = &self.moser {
            block.form.validate().map_err(|e| match e {
                Error::Schema(s) => Error::Schema(s),
                other => Error::Schema(other.to_string()),
            })?;
            if block.steps == 0 {
                return Err(Error::Schema("moser steps must be >= 1".into()));
            }
        }
        Ok(())
    }
}

/// Parses a scenario from a JSON string (schema errors carry line/column).
pub fn load_scenario_str(json: &str) -> Result<Scenario> {
    let scenario: Scenario = serde_json::from_str(json).map_err(|e| {
        Error::Schema(format!(
            "parse error at line {} column {}: {e}",
            e.line(),
            e.column()
        ))
    })?;
    scenario.validate_schema()?;
    Ok(scenario)
}

/// Loads a scenario from a path, falling back to the bundled corpus when the
/// path does not exist (with or without the `.json` suffix).
pub fn load_scenario(path_or_name: &str) -> Result<Scenario> {
    let path = Path::new(path_or_name);
    if path.is_file() {
        let text = std::fs::read_to_string(path)?;
        return load_scenario_str(&text);
    }
    let stem = path_or_name.trim_end_matches(".json");
    for (name, json) in bundled_scenarios() {
        if name == stem {
            return load_scenario_str(json);
        }
    }
    Err(Error::Schema(format!(
        "no such scenario file or bundled scenario: {path_or_name}"
    )))
}

/// The bundled scenario corpus as `(name, json)` pairs.
pub fn bundled_scenarios() -> Vec<(&'static str, &'static str)> {
    vec![
        (
            "collar_m2_segment",
            include_str!("../scenarios/collar_m2_segment.json"),
        ),
        (
            "collar_m1_fold",
            include_str!("../scenarios/collar_m1_fold.json"),
        ),
        (
            "collar_m3_fold",
            include_str!("../scenarios/collar_m3_fold.json"),
        ),
        (
            "t2_leaf_segment_m2",
            include_str!("../scenarios/t2_leaf_segment_m2.json"),
        ),
        (
            "t2_leaf_segment_m2_cut",
            include_str!("../scenarios/t2_leaf_segment_m2_cut.json"),
        ),
        (
            "hemisphere_m2_point_leaf",
            include_str!("../scenarios/hemisphere_m2_point_leaf.json"),
        ),
        (
            "collar_m2_triangle",
            include_str!("../scenarios/collar_m2_triangle.json"),
        ),
        (
            "moser_m1_collar",
            include_str!("../scenarios/moser_m1_collar.json"),
        ),
        (
            "moser_m1_identity",
            include_str!("../scenarios/moser_m1_identity.json"),
        ),
    ]
}

/// One check outcome inside a report.
#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<f64>>,
}

/// Per-eps section of the report.
#[derive(Debug, Clone, Serialize)]
pub struct EpsReport {
    pub eps: f64,
    pub a_eps: f64,
    pub grid_pitch: f64,
    pub tolerance: f64,
    pub hull_vertex_count: usize,
    pub classification: Vec<String>,
    pub max_hausdorff_defect: f64,
    pub checks: Vec<CheckOutcome>,
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MoserSection {
    pub nx: usize,
    pub ntheta: usize,
    pub steps: usize,
    pub residual: f64,
    pub residual_tol: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitSection {
    pub max_weight_error: f64,
    pub max_smooth_error: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Full run report (written as `report.json`).
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub scenario: String,
    pub passed: bool,
    pub validation: AssumptionReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moser: Option<MoserSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitSection>,
    pub eps_results: Vec<EpsReport>,
}

/// Exit codes of the run operation.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CHECK_FAILURE: i32 = 1;
    pub const SCHEMA_ERROR: i32 = 2;
    pub const VALIDATION_FAILURE: i32 = 3;
}

fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_cloud_csv(path: &Path, cloud: &PointCloud) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    let coords: Vec<String> = (0..cloud.dim).map(|i| format!("coord_{i}")).collect();
    writeln!(w, "{},component,side", coords.join(","))?;
    for (p, t) in cloud.points.iter().zip(&cloud.tags) {
        let row: Vec<String> = p.iter().map(|&v| format_float(v)).collect();
        writeln!(w, "{},{},{}", row.join(","), t.component, t.side)?;
    }
    Ok(())
}

fn run_fit_check(model: &ScenarioModel, tol: f64) -> FitSection {
    let w = model.xi_weights();
    let m = w.len();
    let hw = model.geometry.half_width();
    let smooth = [0.5, -0.25, 0.125, -0.0625];
    let mut samples = Vec::new();
    for side in [-1.0, 1.0] {
        for i in 0..40 {
            let x = side * (0.1 * hw + 0.88 * hw * i as f64 / 39.0);
            let mut y = singular_primitive(&w, x).unwrap();
            for (k, c) in smooth.iter().enumerate() {
                y += c * x.powi(k as i32);
            }
            samples.push((x, y));
        }
    }
    match fit_laurent_coefficients(&samples, m, smooth.len() - 1) {
        Ok(fit) => {
            let max_weight_error = fit
                .weights
                .iter()
                .zip(&w)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            let max_smooth_error = fit
                .smooth
                .iter()
                .zip(&smooth)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            FitSection {
                max_weight_error,
                max_smooth_error,
                residual: fit.residual,
                tolerance: tol,
                passed: max_weight_error <= tol && max_smooth_error <= tol,
            }
        }
        Err(_) => FitSection {
            max_weight_error: f64::INFINITY,
            max_smooth_error: f64::INFINITY,
            residual: f64::INFINITY,
            tolerance: tol,
            passed: false,
        },
    }
}

fn run_desing_check(m: usize, eps: f64, hw: f64, jet_tol: f64) -> CheckOutcome {
    let family = match DesingFamily::new(m, eps) {
        Ok(f) => f,
        Err(e) => {
            return CheckOutcome {
                name: "desing".into(),
                passed: false,
                detail: format!("profile construction failed: {e}"),
                witness: None,
            }
        }
    };
    let mut passed = true;
    let mut max_jet_err = 0.0f64;
    let mut notes = Vec::new();
    for profile in &family.profiles {
        let j = profile.m;
        // exact agreement outside the smoothing region
        for &scale in &[1.0, 1.3, 2.0] {
            let x = (eps * scale).min(0.999 * hw);
            for &s in &[x, -x] {
                if profile.density(s).to_bits() != s.powi(-(j as i32)).to_bits() {
                    passed = false;
                    notes.push(format!("order {j}: density differs from x^-{j} at x = {s}"));
                }
            }
        }
        // parity
        for &u in &[0.15, 0.5, 0.95] {
            let x = u * eps;
            let (a, b) = (profile.density(x), profile.density(-x));
            let ok = if j % 2 == 0 {
                a.to_bits() == b.to_bits() && a > 0.0
            } else {
                a.to_bits() == (-b).to_bits()
            };
            if !ok {
                passed = false;
                notes.push(format!("order {j}: parity violated at |x| = {x}"));
            }
        }
        if j % 2 == 1 {
            if profile.density(0.0) != 0.0 {
                passed = false;
                notes.push(format!("order {j}: no fold at 0"));
            }
            let d0 = (profile.density(1e-9 * eps) - profile.density(-1e-9 * eps)) / (2e-9 * eps);
            if d0 <= 0.0 {
                passed = false;
                notes.push(format!("order {j}: fold not transversal"));
            }
        }
        // C^{j-1} derivative matching at the smoothing boundary
        let inner = profile.inner_jet(eps, j.max(1));
        let outer = profile.outer_jet(eps, j.max(1));
        for k in 0..j {
            let (a, b) = (inner.derivative(k), outer.derivative(k));
            let rel = (a - b).abs() / b.abs().max(1e-300);
            max_jet_err = max_jet_err.max(rel);
            if rel > jet_tol {
                passed = false;
                notes.push(format!(
                    "order {j}: derivative {k} mismatch at eps (rel {rel:.2e})"
                ));
            }
        }
    }
    CheckOutcome {
        name: "desing".into(),
        passed,
        detail: if passed {
            format!(
                "orders 1..={m}: exact outside, parity and fold invariants hold, \
                 max boundary derivative mismatch {max_jet_err:.2e}"
            )
        } else {
            notes.join("; ")
        },
        witness: None,
    }
}

/// Runs a scenario, writing `points_<eps>.csv`, `hull_<eps>.json` and
/// `report.json` into `out_dir`. The exit code follows the CLI contract:
/// 0 all checks passed, 1 check failure, 3 assumption-validation failure.
pub fn run_scenario(scenario: &Scenario, out_dir: &Path) -> Result<(Report, i32)> {
    std::fs::create_dir_all(out_dir)?;
    let validation = validate_assumptions(&scenario.model);
    if !validation.all_passed() {
        let report = Report {
            schema_version: SCHEMA_VERSION,
            scenario: scenario.name.clone(),
            passed: false,
            validation,
            moser: None,
            fit: None,
            eps_results: vec![],
        };
        write_report(out_dir, &report)?;
        return Ok((report, exit::VALIDATION_FAILURE));
    }

    let model = &scenario.model;
    let m = model.weights.order();
    let hw = model.geometry.half_width();
    let mut all_passed = true;

    let moser_section = if scenario.checks.contains(&CheckKind::Moser) {
        let block = scenario.moser.as_ref().expect("schema validated");
        let result = moser_flow(&block.form, block.steps)?;
        let passed = result.residual <= block.residual_tol;
        all_passed &= passed;
        Some(MoserSection {
            nx: result.nx,
            ntheta: result.ntheta,
            steps: result.steps,
            residual: result.residual,
            residual_tol: block.residual_tol,
            passed,
        })
    } else {
        None
    };

    let fit_section = if scenario.checks.contains(&CheckKind::Fit) {
        let section = run_fit_check(model, scenario.tolerances.fit.unwrap_or(1e-8));
        all_passed &= section.passed;
        Some(section)
    } else {
        None
    };

    let mut eps_results = Vec::new();
    for &eps in &scenario.eps_list {
        let started = Instant::now();
        let samples = sample_components(
            model,
            eps,
            (scenario.resolution.n_collar, scenario.resolution.n_leaf),
        )?;
        let pitch = samples.pitch();
        let tol = scenario.tolerances.product.unwrap_or(2.0 * pitch);
        let a_eps = compute_a_eps(model, eps)?;
        let cloud = samples.cloud()?;
        write_cloud_csv(&out_dir.join(format!("points_{eps}.csv")), &cloud)?;
        let hull = convex_hull(&cloud.points)?;
        {
            let file = std::fs::File::create(out_dir.join(format!("hull_{eps}.json")))?;
            serde_json::to_writer_pretty(std::io::BufWriter::new(file), &hull)
                .map_err(|e| Error::Schema(format!("hull serialization: {e}")))?;
        }

        let check_tols = CheckTolerances {
            product: Some(tol),
            coincidence: scenario.tolerances.coincidence.unwrap_or(1e-9),
            cut_angle: scenario.tolerances.cut_angle.unwrap_or(1e-3),
            cut_offset: scenario.tolerances.cut_offset,
        };
        // classification and defects are always computed for the report
        let global = check_global_structure(
            model,
            eps,
            (scenario.resolution.n_collar, scenario.resolution.n_leaf),
            &check_tols,
        )?;
        let classification: Vec<String> = global
            .components
            .iter()
            .map(|c| c.classification.clone())
            .collect();
        let max_defect = global
            .components
            .iter()
            .map(|c| c.hausdorff_defect)
            .fold(0.0f64, f64::max);

        let mut checks = Vec::new();
        for kind in &scenario.checks {
            match kind {
                CheckKind::Global => {
                    all_passed &= global.passed;
                    checks.push(CheckOutcome {
                        name: "global".into(),
                        passed: global.passed,
                        detail: format!(
                            "components [{}], max defect {:.3e}, leaf coincidence {:.3e}",
                            classification.join(", "),
                            max_defect,
                            global.max_leaf_coincidence
                        ),
                        witness: None,
                    });
                }
                CheckKind::Local | CheckKind::Fold => {
                    let zero_count = match &model.geometry {
                        Geometry::Collar(_) => 1,
                        Geometry::CircleGlued(g) => g.zeros.len(),
                    };
                    for zero in 0..zero_count {
                        let window = samples.zero_window(zero, ZERO_WINDOW_FRACTION)?;
                        let a_local = match &model.geometry {
                            Geometry::Collar(_) => a_eps,
                            Geometry::CircleGlued(_) => window.a_window,
                        };
                        let report: LocalProductReport = check_local_product(
                            &window.cloud,
                            &model.leaf,
                            m,
                            a_local,
                            tol,
                            model.torus.xi_index,
                        )?;
                        let (name, passed, detail, witness) = match kind {
                            CheckKind::Fold => {
                                if m % 2 == 1 {
                                    let fold = report.fold.as_ref().expect("odd order");
                                    (
                                        format!("fold[zero {zero}]"),
                                        fold.passed,
                                        format!(
                                            "side multisets {} vs {}, max gap {:.3e}",
                                            fold.left_count, fold.right_count, fold.max_gap
                                        ),
                                        None,
                                    )
                                } else {
                                    (
                                        format!("fold[zero {zero}]"),
                                        false,
                                        "fold check requires odd singularity order".into(),
                                        None,
                                    )
                                }
                            }
                            _ => (
                                format!("local[zero {zero}]"),
                                report.passed,
                                report.detail.clone(),
                                report.witness.clone(),
                            ),
                        };
                        all_passed &= passed;
                        checks.push(CheckOutcome {
                            name,
                            passed,
                            detail,
                            witness,
                        });
                    }
                }
                CheckKind::Convexity => {
                    for comp in 0..samples.component_count() {
                        let points = samples.component_points(comp, true);
                        let tags = vec![
                            crate::moment_image::PointTag {
                                component: comp,
                                side: 1
                            };
                            points.len()
                        ];
                        let comp_cloud = PointCloud::new(model.torus.d, points, tags)?;
                        let report = convexity_check(&comp_cloud, tol)?;
                        all_passed &= report.passed;
                        checks.push(CheckOutcome {
                            name: format!("convexity[component {comp}]"),
                            passed: report.passed,
                            detail: format!(
                                "max raster gap {:.3e} over {} raster points (pitch {:.3e})",
                                report.max_gap, report.raster_count, report.effective_pitch
                            ),
                            witness: report.witness,
                        });
                    }
                }
                CheckKind::Desing => {
                    let outcome = run_desing_check(
                        m,
                        eps,
                        hw,
                        scenario.tolerances.desing_derivative.unwrap_or(1e-5),
                    );
                    all_passed &= outcome.passed;
                    checks.push(outcome);
                }
                CheckKind::Moser | CheckKind::Fit => {} // reported once, above
            }
        }

        eps_results.push(EpsReport {
            eps,
            a_eps,
            grid_pitch: pitch,
            tolerance: tol,
            hull_vertex_count: hull.vertices.len(),
            classification,
            max_hausdorff_defect: max_defect,
            checks,
            wall_time_ms: started.elapsed().as_millis() as u64,
        });
    }

    let report = Report {
        schema_version: SCHEMA_VERSION,
        scenario: scenario.name.clone(),
        passed: all_passed,
        validation,
        moser: moser_section,
        fit: fit_section,
        eps_results,
    };
    write_report(out_dir, &report)?;
    let code = if all_passed {
        exit::OK
    } else {
        exit::CHECK_FAILURE
    };
    Ok((report, code))
}

fn write_report(out_dir: &Path, report: &Report) -> Result<()> {
    let file = std::fs::File::create(out_dir.join("report.json"))?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), report)
        .map_err(|e| Error::Schema(format!("report serialization: {e}")))?;
    Ok(())
}

/// Human-readable scenario description: resolved parameters and the derived
/// per-eps grid pitch and tolerance.
pub fn describe(scenario: &Scenario) -> Result<String> {
    use std::fmt::Write as _;
    let mut out = String::new();
    let model = &scenario.model;
    writeln!(out, "scenario: {}", scenario.name).ok();
    let geom = match &model.geometry {
        Geometry::Collar(c) => format!("collar, half-width {}", c.delta),
        Geometry::CircleGlued(g) => format!("circle-glued, zeros {:?}", g.zeros),
    };
    writeln!(out, "geometry: {geom}").ok();
    writeln!(
        out,
        "torus dimension: {} (distinguished index {})",
        model.torus.d, model.torus.xi_index
    )
    .ok();
    writeln!(out, "singularity order m: {}", model.weights.order()).ok();
    writeln!(out, "weights along the circle: {:?}", model.xi_weights()).ok();
    writeln!(
        out,
        "leaf polytope: {} vertices in R^{}",
        model.leaf.vertices.len(),
        model.leaf.dim()
    )
    .ok();
    writeln!(out, "cuts: {}", model.cuts.len()).ok();
    writeln!(
        out,
        "resolution: {} x {}",
        scenario.resolution.n_collar, scenario.resolution.n_leaf
    )
    .ok();
    writeln!(
        out,
        "checks: [{}]",
        scenario
            .checks
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    )
    .ok();
    writeln!(out, "eps_list: {:?}", scenario.eps_list).ok();
    for &eps in &scenario.eps_list {
        let samples = sample_components(
            model,
            eps,
            (scenario.resolution.n_collar, scenario.resolution.n_leaf),
        )?;
        let pitch = samples.pitch();
        let tol = scenario.tolerances.product.unwrap_or(2.0 * pitch);
        writeln!(
            out,
            "  eps {eps}: grid pitch {pitch:.6e}, product tolerance {tol:.6e}"
        )
        .ok();
    }
    Ok(out)
}
