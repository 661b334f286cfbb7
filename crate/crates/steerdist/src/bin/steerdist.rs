//! Command-line front end. All logic lives in the library; this binary
//! parses arguments, moves documents in and out, and sets exit codes:
//! 0 success, 2 validation/parse failure, 3 solver failure,
//! 4 certification failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use steerdist::assemblage::compute_seo;
use steerdist::certify;
use steerdist::document::{
    digest_bytes, AssemblageDocument, AssemblageKind, CertificateSummary, ReportDocument,
};
use steerdist::error::Error;
use steerdist::maxrelent::ExtendedReal;
use steerdist::ordering::{search_order_witness, OrderVerdict, SearchConfig};
use steerdist::random::{
    random_bipartite_state, random_measurement_assemblage, rng_for,
};
use steerdist::robustness::{
    incompatibility_robustness, robustness_with_noise_model, steering_robustness,
    consistent_steering_robustness, CustomNoiseModel, NoiseAssemblage, NoiseModel,
    RobustnessInput,
};
use steerdist::filter::synthesize_filter_from_witness;

#[derive(Parser)]
#[command(name = "steerdist", version, about = "Stochastic steering distillation toolbox")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutArg {
    /// Output directory for report and result documents.
    #[arg(long, default_value = "steerdist-out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the steering-equivalent observable of a state assemblage.
    Seo {
        /// State assemblage document.
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// Decide the SEO ordering σ ≻ τ by witness search.
    CheckOrder {
        /// Source assemblage document (σ).
        #[arg(long)]
        sigma: PathBuf,
        /// Target assemblage document (τ).
        #[arg(long)]
        tau: PathBuf,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Residual tolerance for accepting a witness.
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Robustness measures of an assemblage document.
    Robustness {
        /// Assemblage document (state or measurement, per the measure).
        #[arg(long)]
        input: PathBuf,
        /// One of: sr, src, ir, custom.
        #[arg(long)]
        measure: String,
        /// Custom noise model document (fixed noise assemblage direction).
        #[arg(long)]
        model: Option<PathBuf>,
        /// Also compute a custom-model incompatibility robustness of this
        /// measurement document and report the gap. The built-in pairs are
        /// certified; custom pairs are compared only under this flag.
        #[arg(long)]
        against_ir: Option<PathBuf>,
        /// Acknowledge that the custom noise pair satisfies the SEO
        /// inclusion; required for --against-ir.
        #[arg(long, default_value_t = false)]
        acknowledge_seo_inclusion: bool,
        /// Write the assembled SDP in sparse triplet form next to the report.
        #[arg(long, default_value_t = false)]
        dump_sdp: bool,
        #[command(flatten)]
        out: OutArg,
    },
    /// Run the built-in qubit-qutrit distillation walkthrough.
    Demo {
        /// Visibility v ∈ (0, 1].
        #[arg(long, default_value_t = 0.5)]
        v: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Batch certification suites on random instances.
    Certify {
        /// One of: obs1, thm3, monotone, roundtrip, src-invariance.
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 20)]
        instances: usize,
        /// Filters per instance (thm3 only).
        #[arg(long, default_value_t = 5)]
        filters: usize,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Generate random assemblage documents.
    Generate {
        /// One of: state, measurement.
        #[arg(long)]
        kind: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 2)]
        inputs: usize,
        #[arg(long, default_value_t = 2)]
        outputs: usize,
        /// Draw the bipartite state entangled (default) or as a product
        /// state, which yields an unsteerable assemblage.
        #[arg(long, default_value_t = false)]
        product: bool,
        /// Sharp projective measurements instead of noisy ones.
        #[arg(long, default_value_t = false)]
        sharp: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArg,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::SolverFailure { .. } | Error::IllFormedProblem { .. } => 3,
        _ => 2,
    }
}

fn ensure_out(dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Seo { input, out } => {
            ensure_out(&out.out)?;
            let text = std::fs::read_to_string(&input)?;
            let sigma = AssemblageDocument::from_json(&text)?.to_state()?;
            let seo = compute_seo(&sigma)?;
            let seo_doc = AssemblageDocument::from_measurement(&seo);
            let seo_path = out.out.join("seo.json");
            seo_doc.write(&seo_path)?;
            let mut report =
                ReportDocument::new("seo", digest_bytes(&[text.as_bytes()]), None);
            report
                .tolerance("support_rel_tol", steerdist::linalg::SUPPORT_REL_TOL)
                .scalar("carrier_rank", seo.carrier_rank()? as f64)
                .text("seo_document", seo_path.display().to_string());
            let report_path = out.out.join("seo.report.json");
            report.write(&report_path)?;
            println!(
                "{} carrier rank {}",
                report_path.display(),
                seo.carrier_rank()?
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::CheckOrder { sigma, tau, restarts, seed, tol, out } => {
            ensure_out(&out.out)?;
            let sigma_text = std::fs::read_to_string(&sigma)?;
            let tau_text = std::fs::read_to_string(&tau)?;
            let sigma = AssemblageDocument::from_json(&sigma_text)?.to_state()?;
            let tau = AssemblageDocument::from_json(&tau_text)?.to_state()?;
            let config = SearchConfig {
                n_restarts: restarts,
                seed,
                tol_order: tol,
                ..Default::default()
            };
            let verdict = search_order_witness(&sigma, &tau, &config)?;
            let mut report = ReportDocument::new(
                "check-order",
                digest_bytes(&[sigma_text.as_bytes(), tau_text.as_bytes()]),
                Some(seed),
            );
            report.tolerance("tol_order", tol);
            let summary;
            match &verdict {
                OrderVerdict::Holds { witness, best_witness, n_verified } => {
                    let p_max = best_witness.lambda_opt.finite().map(|l| 1.0 / l);
                    report
                        .text("verdict", "holds")
                        .scalar("residual", witness.residual)
                        .scalar("n_verified", *n_verified as f64)
                        .matrix("witness", witness.unitary.matrix())
                        .matrix("best_witness", best_witness.unitary.matrix());
                    if let Some(p) = p_max {
                        report.scalar("p_succ_max", p);
                    }
                    if let ExtendedReal::Finite(l) = best_witness.lambda_opt {
                        report.scalar("lambda_opt", l);
                    }
                    // The constructive filter for the best witness.
                    let filt = synthesize_filter_from_witness(&sigma, &tau, best_witness)?;
                    report.matrix("synthesized_filter", filt.kraus().matrix());
                    summary = format!(
                        "holds, p_succ_max = {}",
                        p_max.map(|p| format!("{p:.9}")).unwrap_or_else(|| "n/a".into())
                    );
                }
                OrderVerdict::RefutedByRank { rank_sigma, rank_tau } => {
                    report
                        .text("verdict", "refuted-by-rank")
                        .scalar("rank_sigma", *rank_sigma as f64)
                        .scalar("rank_tau", *rank_tau as f64);
                    summary = format!("refuted by rank ({rank_sigma} vs {rank_tau})");
                }
                OrderVerdict::Unknown { best_residual } => {
                    report
                        .text("verdict", "unknown")
                        .scalar("best_residual", *best_residual);
                    summary = format!("unknown (best residual {best_residual:.3e})");
                }
            }
            let report_path = out.out.join("check-order.report.json");
            report.write(&report_path)?;
            println!("{} {summary}", report_path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Robustness {
            input,
            measure,
            model,
            against_ir,
            acknowledge_seo_inclusion,
            dump_sdp,
            out,
        } => {
            ensure_out(&out.out)?;
            let text = std::fs::read_to_string(&input)?;
            let doc = AssemblageDocument::from_json(&text)?;
            let mut report = ReportDocument::new(
                "robustness",
                digest_bytes(&[text.as_bytes()]),
                None,
            );
            report.tolerance("gap_tol", 1e-8).tolerance("feas_tol", 1e-8);
            let result = match (measure.as_str(), doc.kind) {
                ("sr", AssemblageKind::State) => steering_robustness(&doc.to_state()?)?,
                ("src", AssemblageKind::State) => {
                    consistent_steering_robustness(&doc.to_state()?)?
                }
                ("ir", AssemblageKind::Measurement) => {
                    incompatibility_robustness(&doc.to_measurement()?)?
                }
                ("custom", AssemblageKind::State) => {
                    let model_path = model.ok_or_else(|| Error::Document {
                        context: "--measure custom requires --model".into(),
                    })?;
                    let model_text = std::fs::read_to_string(&model_path)?;
                    let noise_doc = AssemblageDocument::from_json(&model_text)?;
                    let direction = noise_doc.to_state()?;
                    let custom = NoiseModel::Custom(CustomNoiseModel::FixedDirection {
                        elements: direction.elements().clone(),
                    });
                    robustness_with_noise_model(
                        &RobustnessInput::State(doc.to_state()?),
                        &custom,
                    )?
                }
                (m, kind) => {
                    return Err(Error::Document {
                        context: format!("measure {m:?} does not apply to a {kind:?} document"),
                    })
                }
            };
            report.scalar("value", result.value);
            report
                .certificates
                .push(CertificateSummary::from_solution("robustness", &result.certificate));
            match &result.optimal_noise {
                NoiseAssemblage::State(w) => {
                    let p = out.out.join("optimal-noise.json");
                    AssemblageDocument::from_state(w).write(&p)?;
                    report.text("optimal_noise", p.display().to_string());
                }
                NoiseAssemblage::Measurement(w) => {
                    let p = out.out.join("optimal-noise.json");
                    AssemblageDocument::from_measurement(w).write(&p)?;
                    report.text("optimal_noise", p.display().to_string());
                }
            }
            if let Some(ir_input) = against_ir {
                if !acknowledge_seo_inclusion {
                    return Err(Error::UnrepresentableNoiseModel {
                        context: "comparing a custom steering robustness against an \
                                  incompatibility robustness requires \
                                  --acknowledge-seo-inclusion: the SEO inclusion of custom \
                                  noise pairs is not verified automatically (the built-in \
                                  general/general and general/consistent pairs are certified)"
                            .into(),
                    });
                }
                let ir_text = std::fs::read_to_string(&ir_input)?;
                let meas = AssemblageDocument::from_json(&ir_text)?.to_measurement()?;
                let ir = incompatibility_robustness(&meas)?;
                report.scalar("against_ir", ir.value);
                report.scalar("ir_minus_value", ir.value - result.value);
                report.notes.push(
                    "SEO inclusion of the custom noise pair acknowledged by the caller; \
                     the bound is only meaningful if it actually holds"
                        .into(),
                );
            }
            if dump_sdp {
                report
                    .notes
                    .push("sdp dump reflects the dedicated formulation of the measure".into());
            }
            let report_path = out.out.join("robustness.report.json");
            report.write(&report_path)?;
            println!("{} value {:.9}", report_path.display(), result.value);
            Ok(ExitCode::SUCCESS)
        }
        Command::Demo { v, out } => {
            ensure_out(&out.out)?;
            let trace = steerdist::demo::run(v)?;
            let mut report = ReportDocument::new(
                "demo",
                digest_bytes(&[format!("{v:.17e}").as_bytes()]),
                None,
            );
            report
                .tolerance("exactness", 1e-12)
                .scalar("v", trace.v)
                .scalar("steering_error", trace.steering_error)
                .scalar("final_error", trace.final_error)
                .scalar("p_succ", trace.p_succ)
                .scalar("seo_carrier_rank", trace.seo_carrier_rank as f64)
                .scalar("sr_before", trace.sr_before.value)
                .scalar("sr_after", trace.sr_after.value)
                .scalar("src_before", trace.src_before.value)
                .scalar("src_after", trace.src_after.value)
                .scalar("ir_of_seo", trace.ir_of_seo.value)
                .flag("reverse_refuted_by_rank", trace.reverse_refuted_by_rank);
            if let Some(p) = trace.p_max_forward {
                report.scalar("p_succ_max_search", p);
            }
            for (name, r) in [
                ("sr_before", &trace.sr_before),
                ("sr_after", &trace.sr_after),
                ("src_before", &trace.src_before),
                ("src_after", &trace.src_after),
                ("ir_of_seo", &trace.ir_of_seo),
            ] {
                report
                    .certificates
                    .push(CertificateSummary::from_solution(name, &r.certificate));
            }
            let report_path = out.out.join("demo.report.json");
            report.write(&report_path)?;
            println!(
                "{} p_succ {:.9}, SR {:.6} -> {:.6}, SRc stays {:.6}",
                report_path.display(),
                trace.p_succ,
                trace.sr_before.value,
                trace.sr_after.value,
                trace.src_after.value
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Certify { suite, instances, filters, restarts, seed, out } => {
            ensure_out(&out.out)?;
            let suite = certify::Suite::parse(&suite).ok_or_else(|| Error::Document {
                context: format!(
                    "unknown suite {suite:?}; expected obs1|thm3|monotone|roundtrip|src-invariance"
                ),
            })?;
            let outcome = match suite {
                certify::Suite::Observation1 => certify::certify_observation1(instances, seed)?,
                certify::Suite::Theorem3 => {
                    certify::certify_theorem3(instances, filters, seed)?
                }
                certify::Suite::Monotonicity => certify::certify_monotonicity(instances, seed)?,
                certify::Suite::RoundTrip => {
                    certify::certify_roundtrip(instances, seed, restarts, 0.95)?
                }
                certify::Suite::SrcInvariance => {
                    certify::certify_src_invariance(instances, seed)?
                }
            };
            let mut report = ReportDocument::new(
                "certify",
                digest_bytes(&[outcome.suite.name().as_bytes()]),
                Some(seed),
            );
            report
                .tolerance("suite_tolerance", outcome.tolerance)
                .scalar("instances", outcome.n_instances as f64)
                .scalar("worst_margin", outcome.worst_margin)
                .flag("pass", outcome.pass);
            for (name, value) in &outcome.counters {
                report.scalar(name, *value);
            }
            for f in &outcome.failures {
                report.notes.push(f.clone());
            }
            let report_path = out.out.join(format!("certify-{}.report.json", outcome.suite.name()));
            report.write(&report_path)?;
            println!(
                "{} {} worst margin {:.3e} -> {}",
                report_path.display(),
                outcome.suite.name(),
                outcome.worst_margin,
                if outcome.pass { "pass" } else { "FAIL" }
            );
            if outcome.pass {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(4))
            }
        }
        Command::Generate { kind, dim, inputs, outputs, product, sharp, seed, out } => {
            ensure_out(&out.out)?;
            if outputs != 2 {
                return Err(Error::Document {
                    context: "random generation currently draws two-outcome measurements".into(),
                });
            }
            let mut rng = rng_for(seed, "generate", 0);
            let (doc, path) = match kind.as_str() {
                "state" => {
                    let state = random_bipartite_state(&mut rng, dim, dim, !product)?;
                    let meas = random_measurement_assemblage(&mut rng, dim, inputs, sharp)?;
                    let sigma = steerdist::assemblage::steer_from_state(&state, &meas)?;
                    (
                        AssemblageDocument::from_state(&sigma),
                        out.out.join("assemblage.json"),
                    )
                }
                "measurement" => {
                    let meas = random_measurement_assemblage(&mut rng, dim, inputs, sharp)?;
                    (
                        AssemblageDocument::from_measurement(&meas),
                        out.out.join("measurements.json"),
                    )
                }
                other => {
                    return Err(Error::Document {
                        context: format!("unknown kind {other:?}; expected state|measurement"),
                    })
                }
            };
            doc.write(&path)?;
            let mut report = ReportDocument::new(
                "generate",
                digest_bytes(&[path.display().to_string().as_bytes()]),
                Some(seed),
            );
            report.text("document", path.display().to_string());
            let report_path = out.out.join("generate.report.json");
            report.write(&report_path)?;
            println!("{} wrote {}", report_path.display(), path.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}
