//! Command-line front end: contraction certification, Picard iteration,
//! the fractional BVP solver, corpus goldens, and a combined report.
//!
//! Exit codes are a stable contract:
//! `0` success (verify: inequality holds; iterate: converged; solve-frac:
//! residual within tolerance), `1` verify found violations, `2` input error
//! (bad files, unknown labels, rejected audits), `3` iterate detected a
//! cycle, `4` iteration budget exhausted, `5` solver divergence.

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bfp_core::contraction::{
    implied_continuity, verify_almost_pc, verify_pc_with_tol, ContractionCertificate,
};
use bfp_core::corpus;
use bfp_core::fractional::{condition2_audit, lipschitz_audit, solve, FracError, SolveReport};
use bfp_core::io::{load_json, BvpConfigFile, CoeffFile, MapFile, SpaceFile};
use bfp_core::picard::{
    check_picard_continuity_finite, check_weakly_picard, compute_m, iterate, render_trace,
    uniqueness_check, ErrorBoundParams, IterationConfig, IterationStatus,
};
use bfp_core::space::check_axioms;
use bfp_core::{fmt17, runtime};

const EXIT_OK: u8 = 0;
const EXIT_VIOLATED: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_CYCLE: u8 = 3;
const EXIT_MAX_ITER: u8 = 4;
const EXIT_DIVERGED: u8 = 5;

#[derive(Parser)]
#[command(name = "bfp", version, about = "Fixed-point toolkit for bipolar metric spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Subcommand)]
enum Command {
    /// Certify the polynomial contraction inequality over a finite space
    Verify {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        coeffs: PathBuf,
        /// Check the almost variant (requires H terms in the coeff file)
        #[arg(long)]
        almost: bool,
        /// Absolute tolerance on inequality slack
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run the Picard bisequence from a start pair and export the trace
    Iterate {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        start_left: String,
        #[arg(long)]
        start_right: String,
        /// Coefficient file: enables the a-priori bound column
        #[arg(long)]
        coeffs: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Solve the fractional boundary value problem by Picard iteration
    SolveFrac {
        /// JSON config; flags below override nothing when this is given
        #[arg(long, conflicts_with_all = ["order", "omega", "sigma"])]
        config: Option<PathBuf>,
        #[arg(long, requires_all = ["omega", "sigma"])]
        order: Option<f64>,
        #[arg(long)]
        omega: Option<String>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, default_value_t = 201)]
        grid_n: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
        /// Proceed even when the Lipschitz audit fails
        #[arg(long)]
        force: bool,
        /// Write the solution as two-column text instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Corpus fixtures
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
    /// Combined analysis: axioms, certificate, fixed points, weak-Picard
    Report {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        coeffs: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Subcommand)]
enum CorpusAction {
    /// Rewrite the golden files
    Regen {
        #[arg(long, default_value = "fixtures/corpus")]
        dir: PathBuf,
    },
    /// Print one case rendering, or all when no name is given
    Show { name: Option<String> },
}

// default SIGPIPE disposition so piping into `head` exits quietly instead
// of panicking on a closed stdout
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() -> ExitCode {
    reset_sigpipe();
    runtime::init_threads_from_env();
    let cli = Cli::parse();
    let code = match run(cli.command) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            EXIT_INPUT
        }
    };
    ExitCode::from(code)
}

fn run(command: Command) -> Result<u8, String> {
    match command {
        Command::Verify {
            space,
            map,
            coeffs,
            almost,
            tol,
            format,
        } => cmd_verify(&space, &map, &coeffs, almost, tol, format),
        Command::Iterate {
            space,
            map,
            start_left,
            start_right,
            coeffs,
            max_iter,
            tol,
            format,
        } => cmd_iterate(
            &space,
            &map,
            &start_left,
            &start_right,
            coeffs.as_deref(),
            max_iter,
            tol,
            format,
        ),
        Command::SolveFrac {
            config,
            order,
            omega,
            sigma,
            grid_n,
            tol,
            max_iter,
            force,
            out,
            format,
        } => {
            let file = match config {
                Some(path) => load_json::<BvpConfigFile>(&path).map_err(|e| e.to_string())?,
                None => BvpConfigFile {
                    order: order.ok_or("either --config or --order/--omega/--sigma required")?,
                    omega: omega.ok_or("--omega required")?,
                    sigma: sigma.ok_or("--sigma required")?,
                    grid_n,
                    tol,
                    max_iter,
                },
            };
            cmd_solve_frac(file, force, out.as_deref(), format)
        }
        Command::Corpus { action } => match action {
            CorpusAction::Regen { dir } => {
                let written = corpus::regen_goldens(&dir).map_err(|e| e.to_string())?;
                for path in written {
                    println!("wrote {}", path.display());
                }
                Ok(EXIT_OK)
            }
            CorpusAction::Show { name } => {
                let cases = corpus::cases();
                match name {
                    None => {
                        for case in cases {
                            print!("{}", (case.render)());
                        }
                        Ok(EXIT_OK)
                    }
                    Some(name) => match cases.iter().find(|c| c.name == name) {
                        Some(case) => {
                            print!("{}", (case.render)());
                            Ok(EXIT_OK)
                        }
                        None => Err(format!("unknown corpus case {name:?}")),
                    },
                }
            }
        },
        Command::Report {
            space,
            map,
            coeffs,
            tol,
            format,
        } => cmd_report(&space, &map, coeffs.as_deref(), tol, format),
    }
}

struct VerifyInputs {
    space_file: SpaceFile,
    map_file: MapFile,
    coeff_file: Option<CoeffFile>,
}

fn load_verify_inputs(
    space: &Path,
    map: &Path,
    coeffs: Option<&Path>,
) -> Result<VerifyInputs, String> {
    Ok(VerifyInputs {
        space_file: load_json(space).map_err(|e| e.to_string())?,
        map_file: load_json(map).map_err(|e| e.to_string())?,
        coeff_file: match coeffs {
            Some(path) => Some(load_json(path).map_err(|e| e.to_string())?),
            None => None,
        },
    })
}

fn render_certificate(
    space: &bfp_core::space::FiniteBipolarSpace,
    cert: &ContractionCertificate,
) -> String {
    let mut out = String::new();
    out.push_str("pair lhs rhs slack verdict\n");
    for row in &cert.rows {
        out.push_str(&format!(
            "({},{}) {} {} {} {}\n",
            space.left_labels()[row.left],
            space.right_labels()[row.right],
            fmt17(row.lhs),
            fmt17(row.rhs),
            fmt17(row.slack),
            if row.slack < -cert.tol { "VIOLATED" } else { "ok" }
        ));
    }
    let side = &cert.side_conditions;
    out.push_str(&format!(
        "side conditions: q0==0: {}; q_rho >= Q: {}; q_u <= W: {}\n",
        side.q0_is_zero,
        side.lower_ok,
        match side.upper_ok {
            Some(ok) => ok.to_string(),
            None => "not declared".to_string(),
        }
    ));
    out.push_str(&format!("implied continuity: {}\n", implied_continuity(cert, side)));
    out.push_str(&format!("holds: {}\n", cert.holds));
    out
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    space: &'a SpaceFile,
    map: &'a MapFile,
    coeffs: &'a CoeffFile,
    certificate: &'a ContractionCertificate,
    implied_continuity: bool,
}

fn cmd_verify(
    space_path: &Path,
    map_path: &Path,
    coeffs_path: &Path,
    almost: bool,
    tol: f64,
    format: Format,
) -> Result<u8, String> {
    let inputs = load_verify_inputs(space_path, map_path, Some(coeffs_path))?;
    let coeff_file = inputs.coeff_file.as_ref().expect("coeffs loaded");
    let space = inputs
        .space_file
        .clone()
        .into_space()
        .map_err(|e| e.to_string())?;
    let map = inputs
        .map_file
        .clone()
        .into_mapping(&space)
        .map_err(|e| e.to_string())?;
    let (coeffs, spec) = coeff_file
        .clone()
        .into_parts()
        .map_err(|e| e.to_string())?;
    let cert = if almost {
        verify_almost_pc(&space, &map, &coeffs, &spec).map_err(|e| e.to_string())?
    } else {
        verify_pc_with_tol(&space, &map, &coeffs, &spec, tol).map_err(|e| e.to_string())?
    };
    match format {
        Format::Text => print!("{}", render_certificate(&space, &cert)),
        Format::Structured => {
            let output = VerifyOutput {
                space: &inputs.space_file,
                map: &inputs.map_file,
                coeffs: coeff_file,
                certificate: &cert,
                implied_continuity: implied_continuity(&cert, &cert.side_conditions),
            };
            println!(
                "{}",
                serde_json::to_string_pretty(&output).map_err(|e| e.to_string())?
            );
        }
    }
    Ok(if cert.holds { EXIT_OK } else { EXIT_VIOLATED })
}

#[allow(clippy::too_many_arguments)]
fn cmd_iterate(
    space_path: &Path,
    map_path: &Path,
    start_left: &str,
    start_right: &str,
    coeffs_path: Option<&Path>,
    max_iter: usize,
    tol: f64,
    format: Format,
) -> Result<u8, String> {
    let inputs = load_verify_inputs(space_path, map_path, coeffs_path)?;
    let space = inputs
        .space_file
        .clone()
        .into_space()
        .map_err(|e| e.to_string())?;
    let map = inputs
        .map_file
        .clone()
        .into_mapping(&space)
        .map_err(|e| e.to_string())?;
    let bound_params = match &inputs.coeff_file {
        None => None,
        Some(file) => {
            let (coeffs, spec) = file.clone().into_parts().map_err(|e| e.to_string())?;
            let m = compute_m(&space, &map, &coeffs, &spec, start_left, start_right)
                .map_err(|e| e.to_string())?;
            Some(
                ErrorBoundParams::new(m, spec.pi, spec.rho_index, map.variance)
                    .map_err(|e| e.to_string())?,
            )
        }
    };
    let config = IterationConfig {
        max_iter,
        tol,
        bound_params,
    };
    let outcome = iterate(&space, &map, start_left, start_right, &config)
        .map_err(|e| e.to_string())?;
    match format {
        Format::Text => {
            print!("{}", render_trace(&space, &outcome));
            match outcome.status {
                IterationStatus::Converged => println!(
                    "converged: fixed point {}",
                    outcome.fixed_point.as_deref().unwrap_or("?")
                ),
                IterationStatus::CycleDetected => println!(
                    "cycle detected: ({})",
                    outcome.cycle.as_deref().unwrap_or(&[]).join(", ")
                ),
                IterationStatus::MaxIterations => println!("stopped: iteration budget exhausted"),
            }
        }
        Format::Structured => {
            #[derive(Serialize)]
            struct IterateOutput<'a> {
                space: &'a SpaceFile,
                map: &'a MapFile,
                outcome: &'a bfp_core::picard::IterationOutcome,
            }
            println!(
                "{}",
                serde_json::to_string_pretty(&IterateOutput {
                    space: &inputs.space_file,
                    map: &inputs.map_file,
                    outcome: &outcome,
                })
                .map_err(|e| e.to_string())?
            );
        }
    }
    Ok(match outcome.status {
        IterationStatus::Converged => EXIT_OK,
        IterationStatus::CycleDetected => EXIT_CYCLE,
        IterationStatus::MaxIterations => EXIT_MAX_ITER,
    })
}

fn render_solution(report: &SolveReport) -> String {
    let mut out = String::new();
    for (rho, value) in report.nodes.iter().zip(report.solution.values().iter()) {
        out.push_str(&format!("{} {}\n", fmt17(*rho), fmt17(*value)));
    }
    out
}

fn cmd_solve_frac(
    file: BvpConfigFile,
    force: bool,
    out: Option<&Path>,
    format: Format,
) -> Result<u8, String> {
    let bvp = file.clone().into_bvp().map_err(|e| e.to_string())?;
    let lipschitz = lipschitz_audit(&bvp.omega, bvp.sigma, 4096);
    let kernel =
        bfp_core::fractional::build_kernel(bvp.order, bvp.grid_n).map_err(|e| e.to_string())?;
    let condition2 = condition2_audit(&kernel);
    if !lipschitz.passes {
        eprintln!(
            "warning: lipschitz audit failed: max observed ratio {} > sigma {}",
            fmt17(lipschitz.max_ratio),
            fmt17(bvp.sigma)
        );
        if !force {
            return Err("lipschitz audit failed; pass --force to proceed".into());
        }
    }
    if condition2.exceeds_one {
        eprintln!(
            "warning: kernel mass condition exceeds one: sup row integral {}",
            fmt17(condition2.value)
        );
    }

    let report = match solve(&bvp) {
        Ok(report) => report,
        Err(FracError::Diverged { streak, tail }) => {
            eprintln!(
                "divergence: successive distances grew for {streak} steps: {:?}",
                tail
            );
            return Ok(EXIT_DIVERGED);
        }
        Err(other) => return Err(other.to_string()),
    };

    match format {
        Format::Text => {
            println!("condition (1) audit: max ratio {} (sigma {}), passes: {}",
                fmt17(lipschitz.max_ratio), fmt17(bvp.sigma), lipschitz.passes);
            println!(
                "condition (2) audit: sup row integral {} at rho {}",
                fmt17(condition2.value),
                fmt17(condition2.at_rho)
            );
            println!("iterations: {}", report.iterations);
            println!("residual: {}", fmt17(report.residual));
            println!("converged: {}", report.converged);
            match out {
                Some(path) => {
                    std::fs::write(path, render_solution(&report)).map_err(|e| e.to_string())?;
                    println!("solution written to {}", path.display());
                }
                None => {
                    println!("solution:");
                    print!("{}", render_solution(&report));
                }
            }
        }
        Format::Structured => {
            #[derive(Serialize)]
            struct SolveOutput<'a> {
                config: &'a BvpConfigFile,
                lipschitz: &'a bfp_core::fractional::LipschitzReport,
                condition2: &'a bfp_core::fractional::Condition2Report,
                report: &'a SolveReport,
            }
            println!(
                "{}",
                serde_json::to_string_pretty(&SolveOutput {
                    config: &file,
                    lipschitz: &lipschitz,
                    condition2: &condition2,
                    report: &report,
                })
                .map_err(|e| e.to_string())?
            );
            if let Some(path) = out {
                std::fs::write(path, render_solution(&report)).map_err(|e| e.to_string())?;
            }
        }
    }
    Ok(if report.converged {
        EXIT_OK
    } else {
        EXIT_MAX_ITER
    })
}

fn cmd_report(
    space_path: &Path,
    map_path: &Path,
    coeffs_path: Option<&Path>,
    tol: f64,
    format: Format,
) -> Result<u8, String> {
    let inputs = load_verify_inputs(space_path, map_path, coeffs_path)?;
    let space = inputs
        .space_file
        .clone()
        .into_space()
        .map_err(|e| e.to_string())?;
    let map = inputs
        .map_file
        .clone()
        .into_mapping(&space)
        .map_err(|e| e.to_string())?;
    let axioms = check_axioms(&space);
    let certificate = match &inputs.coeff_file {
        None => None,
        Some(file) => {
            let (coeffs, spec) = file.clone().into_parts().map_err(|e| e.to_string())?;
            Some(verify_pc_with_tol(&space, &map, &coeffs, &spec, tol).map_err(|e| e.to_string())?)
        }
    };
    let weakly = check_weakly_picard(&space, &map);
    let continuity =
        check_picard_continuity_finite(&space, &map, space.n_left().max(2) * 4)
            .map_err(|e| e.to_string())?;
    let uniqueness = certificate
        .as_ref()
        .map(|cert| uniqueness_check(&space, &map, cert));

    match format {
        Format::Text => {
            println!(
                "axioms: separation {}, overlap symmetry {}, tetrahedral {} ({} violations)",
                axioms.axiom1_ok,
                axioms.axiom2_ok,
                axioms.axiom3_ok,
                axioms.violations.len()
            );
            if let Some(cert) = &certificate {
                print!("{}", render_certificate(&space, cert));
            }
            println!(
                "fixed points: left [{}], right [{}]",
                weakly.fixed.left.join(", "),
                weakly.fixed.right.join(", ")
            );
            println!("weakly picard: {}", weakly.holds);
            if !weakly.offending_left.is_empty() || !weakly.offending_right.is_empty() {
                println!(
                    "offending starts: left [{}], right [{}]",
                    weakly.offending_left.join(", "),
                    weakly.offending_right.join(", ")
                );
            }
            println!("picard-continuous: {}", continuity.picard_continuous);
            if let Some(u) = &uniqueness {
                println!("uniqueness: {}", u.summary);
                if let Some(diag) = &u.diagnostic {
                    println!("{diag}");
                }
            }
        }
        Format::Structured => {
            #[derive(Serialize)]
            struct ReportOutput<'a> {
                space: &'a SpaceFile,
                map: &'a MapFile,
                #[serde(skip_serializing_if = "Option::is_none")]
                coeffs: Option<&'a CoeffFile>,
                axioms: &'a bfp_core::space::AxiomReport,
                #[serde(skip_serializing_if = "Option::is_none")]
                certificate: Option<&'a ContractionCertificate>,
                weakly_picard: &'a bfp_core::picard::WeaklyPicardReport,
                picard_continuity: &'a bfp_core::picard::PicardContinuityReport,
                #[serde(skip_serializing_if = "Option::is_none")]
                uniqueness: Option<&'a bfp_core::picard::UniquenessReport>,
            }
            println!(
                "{}",
                serde_json::to_string_pretty(&ReportOutput {
                    space: &inputs.space_file,
                    map: &inputs.map_file,
                    coeffs: inputs.coeff_file.as_ref(),
                    axioms: &axioms,
                    certificate: certificate.as_ref(),
                    weakly_picard: &weakly,
                    picard_continuity: &continuity,
                    uniqueness: uniqueness.as_ref(),
                })
                .map_err(|e| e.to_string())?
            );
        }
    }
    Ok(EXIT_OK)
}
