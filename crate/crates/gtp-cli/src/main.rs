//! Thin command-line front end: parses descriptors, drives the library, and
//! reports pass/fail.
//!
//! Exit codes: 0 when all checks pass, 1 on check failures, 2 on input errors.

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use gtp::diagnostics::{diagnose_trace, run_rate_experiment, RateConfig};
use gtp::game::run_game;
use gtp::gilat::{build_run, check_equalities, GilatConfig};
use gtp::parse::{parse_forecaster, parse_growth, parse_protocol, parse_reality, parse_skeptic};
use gtp::protocol::ProtocolSpec;
use gtp::reality::{SurrogateComply, SurrogateComplyStrong};
use gtp::trace_io::{read_jsonl, replay_verify, write_csv, write_jsonl};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gtp", about = "Betting-game simulations: run games, build constructions, verify traces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ProtocolArgs {
    /// Protocol name (bounded | bfqh | coin | trinomial | unbounded | ufgh) or
    /// a full descriptor like "bfqh:C=1".
    #[arg(long, default_value = "bfqh")]
    protocol: String,
    /// Bound C for the bounded protocols.
    #[arg(long = "C", default_value_t = 1.0)]
    bound: f64,
    /// Hedge descriptor for ufgh (e.g. "pow:1.5:h1").
    #[arg(long)]
    hedge: Option<String>,
}

impl ProtocolArgs {
    fn build(&self) -> Result<ProtocolSpec> {
        let descriptor = if self.protocol.contains(':')
            || self.protocol == "coin"
            || self.protocol == "trinomial"
            || self.protocol == "unbounded"
        {
            self.protocol.clone()
        } else {
            match self.protocol.as_str() {
                "bounded" => format!("bounded:C={}", self.bound),
                "bfqh" => format!("bfqh:C={}", self.bound),
                "ufgh" => {
                    let hedge = self.hedge.as_deref().ok_or_else(|| anyhow!("ufgh needs --hedge"))?;
                    format!("ufgh:{hedge}")
                }
                other => return Err(anyhow!("unknown protocol {other:?}")),
            }
        };
        Ok(parse_protocol(&descriptor)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Play one game and emit its trace.
    Run {
        #[command(flatten)]
        protocol: ProtocolArgs,
        #[arg(long, default_value = "const:m=0,v=1")]
        forecaster: String,
        #[arg(long, default_value = "quad-comp:+")]
        skeptic: String,
        #[arg(long, default_value = "price")]
        reality: String,
        #[arg(long, default_value_t = 1000)]
        rounds: usize,
        /// Initial capital.
        #[arg(long = "K0", default_value_t = 1.0)]
        initial_capital: f64,
        /// Recorded in the trace header; substituted for "{seed}" in the
        /// player descriptors.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<String>,
        #[arg(long, default_value = "jsonl", value_parser = ["jsonl", "csv"])]
        format: String,
        /// Growth scale for the trace diagnostics (Kronecker track, ratio
        /// bound, Cauchy witness).
        #[arg(long = "g")]
        growth: Option<String>,
        /// Diagnostics window (rounds); defaults to the last 10% of the
        /// horizon.
        #[arg(long)]
        window: Option<usize>,
        /// Diagnostics tolerance.
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
    /// Build the three-case construction and verify its identities.
    Gilat {
        /// Bound C.
        #[arg(long = "C", default_value_t = 1.0)]
        bound: f64,
        /// Harmonic shift a, or "auto" for the smallest admissible value.
        #[arg(long = "a", default_value = "auto")]
        shift: String,
        /// Plug-in forcing strategy.
        #[arg(long = "P", default_value = "quad-comp:+")]
        p_strategy: String,
        /// Plug-in hypothesized strategy.
        #[arg(long = "Q", default_value = "trunc:quad-comp:-:D=1")]
        q_strategy: String,
        #[arg(long, default_value_t = 10_000)]
        rounds: usize,
        /// JSONL output: one line per round with η, the blend stake, the case
        /// capitals, and the equality residual.
        #[arg(long)]
        out: Option<String>,
    },
    /// Replicated rate experiment: the normalized statistic across quartiles.
    Rate {
        #[command(flatten)]
        protocol: ProtocolArgs,
        /// Growth scale for the normalization (e.g. "ilog:2").
        #[arg(long = "g", default_value = "ilog:2")]
        growth: String,
        #[arg(long, default_value = "coin:p=0.5")]
        forecaster: String,
        #[arg(long, default_value = "coin-reduce:wcomp:ilog:2")]
        skeptic: String,
        #[arg(long, default_value = "fair-coin:seed={seed}")]
        reality: String,
        #[arg(long, default_value_t = 100_000)]
        rounds: usize,
        #[arg(long, default_value_t = 20)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Capital ceiling the Skeptic must stay below.
        #[arg(long, default_value_t = 1e3)]
        capital_bound: f64,
        /// Normalize by the running price sums (coin games) instead of the
        /// hedge-price sums.
        #[arg(long, default_value_t = true)]
        by_price_sums: bool,
        /// Minimum replications whose tail quartile max must drop below the
        /// first quartile's.
        #[arg(long, default_value_t = 18)]
        min_drops: usize,
        /// Plot-ready CSV of the per-replication quartile maxima.
        #[arg(long)]
        out: Option<String>,
    },
    /// Compliance demo: Reality suppresses an adversarial Skeptic's capital.
    ComplyDemo {
        #[command(flatten)]
        protocol: ProtocolArgs,
        /// "strong" or a positive ε.
        #[arg(long, default_value = "strong")]
        mode: String,
        #[arg(long, default_value = "rate-force:eps=0.2,Dmax=20,g=ilog:1")]
        surrogate: String,
        #[arg(long, default_value = "random:seed={seed}")]
        skeptic: String,
        #[arg(long, default_value = "random:seed={seed}")]
        forecaster: String,
        #[arg(long, default_value_t = 10_000)]
        rounds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Replay a JSONL trace and recompute every payoff and capital.
    Verify {
        /// Trace file.
        file: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn seeded(descriptor: &str, seed: u64) -> String {
    descriptor.replace("{seed}", &seed.to_string())
}

fn dispatch(command: Command) -> Result<bool> {
    match command {
        Command::Run {
            protocol,
            forecaster,
            skeptic,
            reality,
            rounds,
            initial_capital,
            seed,
            out,
            format,
            growth,
            window,
            tol,
        } => {
            let spec = protocol.build()?;
            let mut fc = parse_forecaster(&seeded(&forecaster, seed), &spec)?;
            let mut sk = parse_skeptic(&seeded(&skeptic, seed), &spec)?;
            let mut re = parse_reality(&seeded(&reality, seed), &spec)?;
            let trace = run_game(&spec, fc.as_mut(), sk.as_mut(), re.as_mut(), rounds, initial_capital)
                .map_err(|e| anyhow!("{e}"))?;

            let final_capital = trace.final_capital();
            let max_capital =
                trace.rounds.iter().map(|r| r.capital_after).fold(f64::NEG_INFINITY, f64::max);
            println!("protocol {spec}, {rounds} rounds");
            println!("final capital {final_capital}, max {max_capital}");
            if let Some(n) = trace.prudence_violation {
                println!("prudence violation first flagged at round {n}");
            }

            let window = window.unwrap_or((rounds / 10).max(1));
            let growth = growth.as_deref().map(parse_growth).transpose()?;
            let report = diagnose_trace(&trace, window, tol, growth.as_ref());
            println!("diagnostics (window = {window} rounds, tol = {tol}):");
            for (name, verdict) in &report.series {
                println!("  {name:<21} {verdict:?}");
            }
            if let Some(k) = &report.kronecker {
                println!(
                    "  kronecker             {:?} (cauchy width {:.3e}, tail ratio max {:.3e})",
                    k.verdict, k.cauchy_width, k.tail_ratio_max
                );
            }
            if let Some(rb) = &report.ratio_bound {
                println!(
                    "  ratio bound           limit ~ {:.4}, {} tail violations",
                    rb.estimated_limit,
                    rb.violations.len()
                );
            }
            if let Some(w) = &report.cauchy_witness {
                println!("  cauchy witness        |sum over ({}, {}]| = {:.3}", w.from, w.to, w.gap);
            }

            if let Some(path) = out {
                let mut writer = BufWriter::new(File::create(&path).with_context(|| path.clone())?);
                match format.as_str() {
                    "jsonl" => write_jsonl(&trace, Some(seed), &mut writer)?,
                    _ => write_csv(&trace, &mut writer)?,
                }
                writer.flush()?;
                println!("trace written to {path}");
            }

            // the emitted fields must replay bit-for-bit
            let mut bytes = Vec::new();
            write_jsonl(&trace, Some(seed), &mut bytes)?;
            let report = replay_verify(&read_jsonl(&mut bytes.as_slice())?);
            if !report.is_clean() {
                println!("self-replay FAILED:\n{report}");
                return Ok(false);
            }
            println!("self-replay clean");
            Ok(true)
        }

        Command::Gilat { bound, shift, p_strategy, q_strategy, rounds, out } => {
            let config = if shift == "auto" {
                GilatConfig::auto(bound, rounds)?
            } else {
                GilatConfig::new(bound, shift.parse::<u64>().context("--a takes an integer or auto")?, rounds)?
            };
            println!("bound {bound}, shift {}, horizon {rounds}", config.shift);
            let spec = ProtocolSpec::bfqh(bound)?;
            // validate the descriptors eagerly for a clean input error
            parse_skeptic(&p_strategy, &spec)?;
            parse_skeptic(&q_strategy, &spec)?;
            let run = build_run(
                config,
                || parse_skeptic(&p_strategy, &spec).expect("validated above"),
                || parse_skeptic(&q_strategy, &spec).expect("validated above"),
            )?;

            let report = check_equalities(&run);
            println!(
                "capital equalities: max residual {:.3e}{}",
                report.max_equality_residual,
                match &report.first_failure {
                    Some(f) => format!(", FIRST FAILURE at round {} ({} vs {})", f.round, f.lhs, f.rhs),
                    None => String::new(),
                }
            );
            println!(
                "blend capital nonincreasing: {}; component sum bounded by 3: {}",
                report.case1_monotone, report.component_sum_bounded
            );
            println!(
                "telescoped sums: case II residual {:.3e}, case III residual {:.3e}",
                report.max_case2_telescope_residual, report.max_case3_closed_form_residual
            );

            if let Some(path) = out {
                let mut writer = BufWriter::new(File::create(&path).with_context(|| path.clone())?);
                for r in &run.rounds {
                    let line = serde_json::json!({
                        "n": r.index,
                        "omega": r.omega,
                        "eta": r.eta,
                        "M_T": r.blend_stake,
                        "K_blend": r.case1_blend,
                        "K_P": r.case1_p,
                        "K_Q1": r.case1_q1,
                        "K_Q2": r.case1_q2,
                        "K_case2": r.case2_q,
                        "K_case3": r.case3_q,
                        "residual_q1": (r.case1_q1 - r.case2_q).abs(),
                        "residual_q2": (r.case1_q2 - r.case3_q).abs(),
                    });
                    writeln!(writer, "{line}")?;
                }
                writer.flush()?;
                println!("per-round record written to {path}");
            }
            Ok(report.is_clean())
        }

        Command::Rate {
            protocol,
            growth,
            forecaster,
            skeptic,
            reality,
            rounds,
            reps,
            seed,
            capital_bound,
            by_price_sums,
            min_drops,
            out,
        } => {
            let spec = protocol.build()?;
            let growth = parse_growth(&growth)?;
            // validate the descriptors once before the replication loop
            parse_forecaster(&seeded(&forecaster, seed), &spec)?;
            parse_skeptic(&seeded(&skeptic, seed), &spec)?;
            parse_reality(&seeded(&reality, seed), &spec)?;

            let cfg = RateConfig {
                growth,
                rounds,
                replications: reps,
                seed,
                capital_bound,
                normalize_by_price_sums: by_price_sums,
            };
            let summary = run_rate_experiment(&spec, &cfg, |stream| {
                (
                    parse_forecaster(&seeded(&forecaster, stream), &spec).expect("validated above"),
                    parse_skeptic(&seeded(&skeptic, stream), &spec).expect("validated above"),
                    parse_reality(&seeded(&reality, stream), &spec).expect("validated above"),
                )
            })
            .map_err(|e| anyhow!("{e}"))?;
            print!("{}", summary.table());
            println!(
                "(normalized statistic |S_n|/sqrt(g({})), quartile maxima; stochastic criterion: \
                 >= {min_drops}/{reps} drops)",
                if by_price_sums { "price sums" } else { "hedge-price sums" }
            );
            if let Some(path) = out {
                let mut writer = BufWriter::new(File::create(&path).with_context(|| path.clone())?);
                writeln!(writer, "rep,stream,q1_max,q2_max,q3_max,q4_max,drop,max_capital,final_statistic")?;
                for (i, r) in summary.replications.iter().enumerate() {
                    writeln!(
                        writer,
                        "{},{},{},{},{},{},{},{},{}",
                        i,
                        r.stream,
                        r.quartile_maxima[0],
                        r.quartile_maxima[1],
                        r.quartile_maxima[2],
                        r.quartile_maxima[3],
                        r.tail_below_first,
                        r.max_capital,
                        r.final_statistic
                    )?;
                }
                writer.flush()?;
                println!("per-replication table written to {path}");
            }
            Ok(summary.drops >= min_drops && summary.capitals_bounded)
        }

        Command::ComplyDemo { protocol, mode, surrogate, skeptic, forecaster, rounds, seed } => {
            let spec = protocol.build()?;
            let surrogate_strategy = parse_skeptic(&seeded(&surrogate, seed), &spec)?;
            let mut fc = parse_forecaster(&seeded(&forecaster, seed), &spec)?;
            let mut sk = parse_skeptic(&seeded(&skeptic, seed), &spec)?;

            if mode == "strong" {
                let mut reality = SurrogateComplyStrong::new(&spec, surrogate_strategy);
                run_game(&spec, fc.as_mut(), sk.as_mut(), &mut reality, rounds, 1.0)
                    .map_err(|e| anyhow!("{e}"))?;
                println!("strong compliance over {rounds} rounds:");
                match reality.activation_round() {
                    Some(n) => println!("  first nonzero bet answered at round {n}"),
                    None => println!("  the Skeptic never bet"),
                }
                println!("  max actual capital    {:.15}  (bound 1)", reality.max_actual_capital());
                println!("  max surrogate capital {:.6}", reality.max_surrogate_capital());
                let ok = reality.max_actual_capital() <= 1.0 + 1e-12;
                println!("  bound held: {ok}");
                Ok(ok)
            } else {
                let epsilon: f64 = mode.parse().context("--mode takes strong or a positive ε")?;
                let mut reality = SurrogateComply::new(&spec, surrogate_strategy, epsilon)?;
                run_game(&spec, fc.as_mut(), sk.as_mut(), &mut reality, rounds, 1.0)
                    .map_err(|e| anyhow!("{e}"))?;
                println!("ε-compliance (ε = {epsilon}) over {rounds} rounds:");
                println!(
                    "  max actual capital    {:.15}  (bound {})",
                    reality.max_actual_capital(),
                    1.0 + epsilon
                );
                println!(
                    "  max surrogate capital {:.6}  (bound {})",
                    reality.max_surrogate_capital(),
                    (1.0 + epsilon) / epsilon
                );
                let ok = reality.max_actual_capital() <= 1.0 + epsilon + 1e-12
                    && reality.max_surrogate_capital() <= (1.0 + epsilon) / epsilon + 1e-12;
                println!("  bounds held: {ok}");
                Ok(ok)
            }
        }

        Command::Verify { file } => {
            let mut reader = BufReader::new(File::open(&file).with_context(|| file.clone())?);
            let stored = read_jsonl(&mut reader)?;
            let report = replay_verify(&stored);
            println!("{report}");
            Ok(report.is_clean())
        }
    }
}
