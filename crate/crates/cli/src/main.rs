mod render;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use keynet_core::analysis::{self, compare_networks, sbep_regression};
use keynet_core::format::{max_host_in_text, parse_json, parse_text, to_json, to_text};
use keynet_core::oracle::{chromatic_index_lower_bound, min_steps_bruteforce_with, SearchLimits};
use keynet_core::protocols::{generate, sbep_formula, SbepCount};
use keynet_core::schedule::validate_schedule;
use keynet_core::simengine::{self, utilization_profile, SimConfig, TimedFailure};
use keynet_core::{NetworkTopology, Schedule, TopologyKind};

use render::{significant, table, write_atomic};

#[derive(Parser)]
#[command(name = "keynet", version, about = "Secure bit exchange schedules for key-exchange networks")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, env = "KEYNET_FORMAT", default_value = "table")]
    format: OutputFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Table,
    Csv,
    Json,
    /// Plot output; only `regress` produces one.
    Svg,
}

#[derive(Subcommand)]
enum Command {
    /// Star-network step count for one size or an inclusive range.
    Formula(FormulaArgs),
    /// Generate the exchange schedule for a topology.
    Schedule {
        #[command(flatten)]
        net: NetArgs,
        /// Write to this file instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a schedule file for completeness and hardware limits.
    Validate {
        /// Schedule file, text or JSON.
        #[arg(long = "in")]
        input: PathBuf,
        /// Topology of a text schedule (JSON files carry their own).
        #[arg(long, value_parser = parse_kind)]
        topology: Option<TopologyKind>,
        /// Host count of a text schedule; defaults to the largest host mentioned.
        #[arg(long, value_parser = parse_size)]
        n: Option<usize>,
    },
    /// Hardware, schedule length and failure impact of every topology.
    Compare {
        #[arg(long, value_parser = parse_size)]
        n: usize,
    },
    /// Exhaustive search for the shortest possible schedule.
    Oracle {
        #[command(flatten)]
        net: NetArgs,
        /// Raise the size ceiling of the search.
        #[arg(long)]
        max_hosts: Option<usize>,
    },
    /// Replay schedules to build k-bit keys, optionally with timed failures.
    Simulate {
        #[command(flatten)]
        net: NetArgs,
        /// Key length in bits.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        k: u32,
        /// Failure `center@T`, `cable:I@T`, `cable:I-J@T` or `ke:H[:S]@T`; repeatable.
        #[arg(long = "fail", value_parser = parse_failure)]
        failures: Vec<TimedFailure>,
    },
    /// Least-squares fit of the step count against the host count.
    Regress {
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(3..))]
        n_max: u64,
        /// Also write an SVG plot to this file.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
}

#[derive(Args)]
struct FormulaArgs {
    #[arg(long, value_parser = parse_size, conflicts_with = "range", required_unless_present = "range")]
    n: Option<usize>,
    /// Inclusive range `a..b`.
    #[arg(long, value_parser = parse_range)]
    range: Option<(usize, usize)>,
}

#[derive(Args)]
struct NetArgs {
    /// star, lch, fcn-full or fcn1.
    #[arg(long, value_parser = parse_kind)]
    topology: TopologyKind,
    #[arg(long, value_parser = parse_size)]
    n: usize,
}

fn parse_kind(s: &str) -> Result<TopologyKind, String> {
    s.parse().map_err(|e: keynet_core::Error| e.to_string())
}

fn parse_size(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 2 => Ok(n),
        Ok(n) => Err(format!("need at least 2 hosts, got {n}")),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once("..").ok_or("expected `a..b`")?;
    let (a, b) = (parse_size(a)?, parse_size(b)?);
    if a > b {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok((a, b))
}

fn parse_failure(s: &str) -> Result<TimedFailure, String> {
    s.parse().map_err(|e: keynet_core::Error| e.to_string())
}

/// Problem with the invocation itself; exits with status 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) if e.is::<UsageError>() => {
            let mut cmd = Cli::command();
            cmd.error(clap::error::ErrorKind::ArgumentConflict, e).exit()
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<String> {
    let format = cli.format;
    if format == OutputFormat::Svg && !matches!(cli.command, Command::Regress { .. }) {
        return Err(usage("`--format svg` is only available for `regress`"));
    }
    match &cli.command {
        Command::Formula(args) => formula(args, format),
        Command::Schedule { net, out } => {
            let schedule = generate(net.topology, net.n)?;
            let text = schedule_output(&schedule, format)?;
            match out {
                Some(path) => {
                    write_atomic(path, &text)?;
                    Ok(String::new())
                }
                None => Ok(text),
            }
        }
        Command::Validate { input, topology, n } => validate(input, *topology, *n, format),
        Command::Compare { n } => compare(*n, format),
        Command::Oracle { net, max_hosts } => oracle(net, *max_hosts, format),
        Command::Simulate { net, k, failures } => simulate(net, *k, failures, format),
        Command::Regress { n_max, plot } => regress(*n_max as usize, plot.as_ref(), format),
    }
}

fn formula(args: &FormulaArgs, format: OutputFormat) -> anyhow::Result<String> {
    let (lo, hi) = match (args.n, args.range) {
        (Some(n), _) => (n, n),
        (None, Some(r)) => r,
        (None, None) => return Err(usage("pass --n or --range")),
    };
    let rows: Vec<SbepCount> =
        (lo..=hi).map(|n| Ok(SbepCount { n, steps: sbep_formula(n)? })).collect::<keynet_core::Result<_>>()?;
    Ok(match format {
        OutputFormat::Table if args.n.is_some() => format!("{}\n", rows[0].steps),
        OutputFormat::Table => {
            table(&["n", "sbep"], &rows.iter().map(|r| vec![r.n.to_string(), r.steps.to_string()]).collect::<Vec<_>>())
        }
        OutputFormat::Csv => analysis::to_csv(&rows)?,
        OutputFormat::Json if args.n.is_some() => analysis::to_json(&rows[0])?,
        OutputFormat::Json => analysis::to_json(&rows)?,
        OutputFormat::Svg => unreachable!("rejected in run"),
    })
}

fn schedule_output(s: &Schedule, format: OutputFormat) -> anyhow::Result<String> {
    Ok(match format {
        OutputFormat::Table => to_text(s),
        OutputFormat::Json => to_json(s),
        OutputFormat::Csv => {
            #[derive(serde::Serialize)]
            struct Row {
                step: usize,
                initiator: usize,
                responder: usize,
            }
            let rows: Vec<Row> = s
                .exchanges()
                .map(|(st, ex)| Row {
                    step: st.index,
                    initiator: ex.initiator.index(),
                    responder: ex.responder.index(),
                })
                .collect();
            analysis::to_csv(&rows)?
        }
        OutputFormat::Svg => unreachable!("rejected in run"),
    })
}

fn validate(
    path: &PathBuf,
    kind: Option<TopologyKind>,
    n: Option<usize>,
    format: OutputFormat,
) -> anyhow::Result<String> {
    let input = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let schedule = if input.trim_start().starts_with('{') {
        parse_json(&input).with_context(|| format!("in {}", path.display()))?
    } else {
        let kind = kind.ok_or_else(|| usage("text schedules need --topology"))?;
        let n = match n {
            Some(n) => n,
            None => max_host_in_text(&input).with_context(|| format!("in {}", path.display()))?.max(2),
        };
        parse_text(&input, NetworkTopology::new(kind, n)?).with_context(|| format!("in {}", path.display()))?
    };
    let report = validate_schedule(&schedule);
    let out = match format {
        OutputFormat::Table => {
            let mut s = format!(
                "{} on {} hosts, {} steps: {}\n",
                schedule.topology().kind().label(),
                schedule.topology().n_hosts(),
                schedule.len(),
                if report.ok { "valid" } else { "INVALID" }
            );
            for v in &report.violations {
                s.push_str(&format!("  {v}\n"));
            }
            s
        }
        OutputFormat::Csv => {
            #[derive(serde::Serialize)]
            struct Row {
                step: String,
                violation: String,
            }
            let rows: Vec<Row> = report
                .violations
                .iter()
                .map(|v| Row { step: v.step().map(|s| s.to_string()).unwrap_or_default(), violation: v.to_string() })
                .collect();
            if rows.is_empty() {
                "step,violation\n".to_string()
            } else {
                analysis::to_csv(&rows)?
            }
        }
        OutputFormat::Json => analysis::to_json(&report)?,
        OutputFormat::Svg => unreachable!("rejected in run"),
    };
    if report.ok {
        Ok(out)
    } else {
        // the report still goes to stdout so scripts can inspect it
        print!("{out}");
        Err(anyhow!("schedule has {} violation(s)", report.violations.len()))
    }
}

fn compare(n: usize, format: OutputFormat) -> anyhow::Result<String> {
    let rows = compare_networks(n)?;
    Ok(match format {
        OutputFormat::Table => {
            let headers =
                ["network", "cables", "exchangers", "center", "steps", "cable", "ke", "time", "worst_loss", "spof"];
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.network.to_string(),
                        r.cables.to_string(),
                        r.exchangers.to_string(),
                        r.center_switches.to_string(),
                        r.steps.to_string(),
                        r.class_cable.to_string(),
                        r.class_ke.to_string(),
                        r.class_time.to_string(),
                        r.worst_single_failure.to_string(),
                        if r.single_point_of_failure { "yes" } else { "no" }.to_string(),
                    ]
                })
                .collect();
            table(&headers, &body)
        }
        OutputFormat::Csv => analysis::to_csv(&rows)?,
        OutputFormat::Json => analysis::to_json(&rows)?,
        OutputFormat::Svg => unreachable!("rejected in run"),
    })
}

fn oracle(net: &NetArgs, max_hosts: Option<usize>, format: OutputFormat) -> anyhow::Result<String> {
    let mut limits = SearchLimits::default();
    if let Some(m) = max_hosts {
        limits.max_hosts = m;
        limits.max_hosts_chain = m;
    }
    let r = min_steps_bruteforce_with(net.topology, net.n, limits)?;
    let lower_bound = match net.topology {
        TopologyKind::Star | TopologyKind::FcnSingle => Some(chromatic_index_lower_bound(net.n)?),
        _ => None,
    };
    let generated = generate(net.topology, net.n)?.len();
    Ok(match format {
        OutputFormat::Table => {
            let mut s = format!("min_steps: {}\ngenerated_steps: {generated}\n", r.min_steps);
            if let Some(lb) = lower_bound {
                s.push_str(&format!("matching_lower_bound: {lb}\n"));
            }
            s.push_str("witness:\n");
            s.push_str(&to_text(&r.witness));
            s
        }
        OutputFormat::Csv => {
            #[derive(serde::Serialize)]
            struct Row {
                topology: TopologyKind,
                n: usize,
                min_steps: usize,
                generated_steps: usize,
            }
            analysis::to_csv(&[Row {
                topology: net.topology,
                n: net.n,
                min_steps: r.min_steps,
                generated_steps: generated,
            }])?
        }
        OutputFormat::Json => {
            let witness: serde_json::Value = serde_json::from_str(&to_json(&r.witness))?;
            let doc = serde_json::json!({
                "topology": net.topology,
                "n": net.n,
                "min_steps": r.min_steps,
                "generated_steps": generated,
                "matching_lower_bound": lower_bound,
                "witness": witness,
            });
            analysis::to_json(&doc)?
        }
        OutputFormat::Svg => unreachable!("rejected in run"),
    })
}

fn simulate(net: &NetArgs, k: u32, failures: &[TimedFailure], format: OutputFormat) -> anyhow::Result<String> {
    let config = SimConfig::new(NetworkTopology::new(net.topology, net.n)?, k, failures.to_vec())?;
    let report = simengine::run(&config)?;
    Ok(match format {
        OutputFormat::Table => {
            let u = utilization_profile(&report);
            let mut s = format!(
                "steps_executed: {}\nkey_bits: {k}\npairs_complete: {}\nlost_pairs: {}\nskipped_exchanges: {}\nutilization: min {:.4} mean {:.4} max {:.4}\n",
                report.steps_executed,
                report.bits_per_pair.len() - report.lost_pairs.len(),
                report.lost_pairs.len(),
                report.skipped_exchanges,
                u.min,
                u.mean,
                u.max
            );
            if !report.lost_pairs.is_empty() {
                let lost: Vec<String> = report.lost_pairs.iter().map(|p| p.to_string()).collect();
                s.push_str(&format!("lost: {}\n", lost.join(" ")));
            }
            s
        }
        OutputFormat::Csv => report.to_csv()?,
        OutputFormat::Json => report.to_json()?,
        OutputFormat::Svg => unreachable!("rejected in run"),
    })
}

fn regress(n_max: usize, plot: Option<&PathBuf>, format: OutputFormat) -> anyhow::Result<String> {
    let fit = sbep_regression(n_max)?;
    let points: Vec<(f64, f64)> =
        (2..=n_max).map(|n| Ok((n as f64, sbep_formula(n)? as f64))).collect::<keynet_core::Result<_>>()?;
    let svg = render::regression_svg(&points, &fit);
    if let Some(path) = plot {
        write_atomic(path, &svg)?;
    }
    let (slope, intercept, r2) =
        (significant(fit.slope, 10), significant(fit.intercept, 10), significant(fit.r_squared, 10));
    Ok(match format {
        OutputFormat::Table => format!("slope: {slope}\nintercept: {intercept}\nr_squared: {r2}\n"),
        OutputFormat::Csv => format!("slope,intercept,r_squared\n{slope},{intercept},{r2}\n"),
        OutputFormat::Json => format!("{{\"slope\":{slope},\"intercept\":{intercept},\"r_squared\":{r2}}}\n"),
        OutputFormat::Svg => svg,
    })
}
