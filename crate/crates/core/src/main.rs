use bm_moment::error::Error;
use bm_moment::scenario::{self, bundled_scenarios, describe, load_scenario, run_scenario};
use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "bm-moment",
    version,
    about = "Moment images of b^m-symplectic models: scenario runner and checkers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario: writes point clouds, hulls and report.json.
    Run {
        /// Scenario JSON path or bundled scenario name.
        scenario: String,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Replace the scenario's eps list (comma separated, decreasing).
        #[arg(long, value_delimiter = ',')]
        eps_override: Option<Vec<f64>>,
        /// Rayon worker threads (falls back to BM_MOMENT_THREADS).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// List the bundled scenarios.
    List,
    /// Print resolved parameters and derived tolerances of a scenario.
    Describe {
        /// Scenario JSON path or bundled scenario name.
        scenario: String,
    },
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Validation(_) => scenario::exit::VALIDATION_FAILURE,
        _ => scenario::exit::SCHEMA_ERROR,
    }
}

fn configure_threads(flag: Option<usize>) {
    let n = flag.or_else(|| {
        std::env::var("BM_MOMENT_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = n {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run {
            scenario: path,
            out,
            eps_override,
            threads,
        } => {
            configure_threads(threads);
            match load_scenario(&path) {
                Ok(mut s) => {
                    if let Some(eps) = eps_override {
                        s.eps_list = eps;
                        if let Err(e) = s.validate_schema() {
                            eprintln!("error: {e}");
                            std::process::exit(scenario::exit::SCHEMA_ERROR);
                        }
                    }
                    match run_scenario(&s, &out) {
                        Ok((report, code)) => {
                            if code == scenario::exit::VALIDATION_FAILURE {
                                eprintln!("model validation failed:");
                                for f in report.validation.failures() {
                                    eprintln!("  [{}] {}", f.name, f.detail);
                                }
                            } else {
                                if let Some(m) = &report.moser {
                                    println!(
                                        "moser: {} (residual {:.3e}, tol {:.3e})",
                                        if m.passed { "pass" } else { "FAIL" },
                                        m.residual,
                                        m.residual_tol
                                    );
                                }
                                if let Some(f) = &report.fit {
                                    println!(
                                        "fit: {} (max weight error {:.3e})",
                                        if f.passed { "pass" } else { "FAIL" },
                                        f.max_weight_error
                                    );
                                }
                                for eps in &report.eps_results {
                                    println!(
                                        "eps {}: a_eps {:.6}, classification [{}], max defect {:.3e}",
                                        eps.eps,
                                        eps.a_eps,
                                        eps.classification.join(", "),
                                        eps.max_hausdorff_defect
                                    );
                                    for c in &eps.checks {
                                        println!(
                                            "  {}: {} ({})",
                                            c.name,
                                            if c.passed { "pass" } else { "FAIL" },
                                            c.detail
                                        );
                                    }
                                }
                                println!("report written to {}", out.join("report.json").display());
                            }
                            code
                        }
                        Err(e) => {
                            eprintln!("error: {e}");
                            exit_code_for(&e)
                        }
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    exit_code_for(&e)
                }
            }
        }
        Command::List => {
            for (name, json) in bundled_scenarios() {
                match scenario::load_scenario_str(json) {
                    Ok(s) => {
                        let geom = match &s.model.geometry {
                            bm_moment::hamiltonian::Geometry::Collar(c) => {
                                format!("collar delta {}", c.delta)
                            }
                            bm_moment::hamiltonian::Geometry::CircleGlued(g) => {
                                format!("circle with {} zeros", g.zeros.len())
                            }
                        };
                        println!(
                            "{name}: m = {}, d = {}, {geom}, checks [{}]",
                            s.model.weights.order(),
                            s.model.torus.d,
                            s.checks
                                .iter()
                                .map(|c| c.to_string())
                                .collect::<Vec<_>>()
                                .join(", ")
                        );
                    }
                    Err(e) => println!("{name}: invalid ({e})"),
                }
            }
            0
        }
        Command::Describe { scenario: path } => match load_scenario(&path) {
            Ok(s) => match describe(&s) {
                Ok(text) => {
                    print!("{text}");
                    0
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    exit_code_for(&e)
                }
            },
            Err(e) => {
                eprintln!("error: {e}");
                exit_code_for(&e)
            }
        },
    };
    std::process::exit(code);
}
