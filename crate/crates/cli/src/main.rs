//! `macexp` command-line front end.
//!
//! Exit codes: 0 success, 2 usage error, 1 computation error. Output files
//! are written whole or not at all.

mod figures;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use macexp::channels::{binary_example_channel, mac_from_additive_noise, ChannelModel, Dmc, Mac2, Pmf};
use macexp::curve::{fmt12, DataTable};
use macexp::gaussian::{
    distributed_nesting_exponent, gallager_spherical_ub, gaussian_capacity, gaussian_critical_rate,
    gaussian_expurgation_rate, poltyrev_exponent, r_struct_contains, su_gaussian_expurgated,
    su_gaussian_random_coding, GaussianMacParams,
};
use macexp::linear_codes::{exact_ml_error_probability, message_averaged_error_probability, split, GeneratorMatrix, TieRule};
use macexp::sim::{pam_error_probability, simulate_pam_mac, simulate_split_mac, simulate_split_vs_parent, PamTriplet, SimConfig};
use macexp::su_exponents::{
    capacity, critical_rate, expurgated_exponent, expurgation_rate, random_coding_exponent,
    slepian_wolf_mac_exponent, time_sharing_expurgated,
};
use macexp::transform::{apply_transform, independence_deviation, search_transform, virtual_exponent, TransformSpec};
use macexp::Error;
use serde_json::json;

use figures::FigureId;

#[derive(Parser)]
#[command(name = "macexp", version, about = "Error exponents for multiple-access channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single-user random-coding and expurgated exponents of a DMC.
    Su(SuArgs),
    /// Gaussian single-user and MAC exponents.
    Gaussian {
        #[command(subcommand)]
        command: GaussianCommand,
    },
    /// Slepian-Wolf exponent of a discrete MAC, with the time-sharing overlay.
    Mac(MacArgs),
    /// Apply a dithered modulo transformation to a discrete MAC.
    Transform(TransformArgs),
    /// Search transformation parameters for the best virtual exponent.
    Search(SearchArgs),
    /// Monte Carlo simulation of split linear codes or nested PAM.
    Simulate {
        #[command(subcommand)]
        command: SimulateCommand,
    },
    /// Emit the data behind a figure.
    Figure(FigureArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct OutputArgs {
    /// Write here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ChannelSource {
    /// Channel JSON document: {"m": .., "kind": "additive"|"dmc"|"mac2", "probs": ..}.
    #[arg(long)]
    channel: Option<PathBuf>,
    /// Additive noise law over Z_m, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    noise: Option<Vec<f64>>,
    /// Binary example MAC with parameters q,p.
    #[arg(long, value_parser = parse_pair)]
    example: Option<(f64, f64)>,
}

impl ChannelSource {
    fn model(&self) -> Result<ChannelModel<f64>> {
        if let Some(path) = &self.channel {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            return Ok(ChannelModel::from_json(&text)?);
        }
        if let Some(noise) = &self.noise {
            return Ok(ChannelModel::Additive(macexp::channels::AdditiveNoiseChannel::new(Pmf::new(noise.clone())?)));
        }
        let (q, p) = self.example.expect("clap enforces one source");
        Ok(ChannelModel::Mac2(binary_example_channel(q, p)?))
    }

    fn dmc(&self) -> Result<Dmc<f64>> {
        match self.model()? {
            ChannelModel::Additive(a) => Ok(a.to_dmc()),
            ChannelModel::Dmc(d) => Ok(d),
            ChannelModel::Mac2(_) => bail!("expected a single-user channel, got a two-user MAC"),
        }
    }

    fn mac(&self) -> Result<Mac2<f64>> {
        match self.model()? {
            ChannelModel::Additive(a) => Ok(mac_from_additive_noise(a.noise())),
            ChannelModel::Mac2(m) => Ok(m),
            ChannelModel::Dmc(_) => bail!("expected a two-user MAC, got a single-user channel"),
        }
    }
}

#[derive(Args)]
struct SuArgs {
    #[command(flatten)]
    source: ChannelSource,
    /// Evaluate at these rates instead of a grid from 0 to capacity.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    rate: Vec<f64>,
    /// Grid size when no rate is given.
    #[arg(long, default_value_t = 51, value_parser = clap::value_parser!(u64).range(2..))]
    points: u64,
    /// Rates and exponents in bits instead of nats (input rates too).
    #[arg(long)]
    bits: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Subcommand)]
enum GaussianCommand {
    /// Single-user exponents at SNR A.
    Su {
        /// Linear SNR, or dB with a `db` suffix.
        #[arg(long, value_parser = parse_snr)]
        snr: f64,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        rate: Vec<f64>,
        #[arg(long, default_value_t = 51, value_parser = clap::value_parser!(u64).range(2..))]
        points: u64,
        #[arg(long)]
        bits: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Distributed-nesting exponent and spherical-shell upper bound.
    Mac {
        #[arg(long, value_parser = parse_snr)]
        a1: f64,
        #[arg(long, value_parser = parse_snr)]
        a2: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        r1: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        r2: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Poltyrev exponent E_P(mu).
    Poltyrev {
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        mu: Vec<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args)]
struct MacArgs {
    #[command(flatten)]
    source: ChannelSource,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    r1: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    r2: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct TransformArgs {
    #[command(flatten)]
    source: ChannelSource,
    /// Transform spec as inline JSON or a path to a JSON file.
    #[arg(long)]
    spec: String,
    /// Sum rate for the virtual exponent, nats.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    rate: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    source: ChannelSource,
    /// Prime modulus.
    #[arg(long, default_value_t = 2)]
    m: usize,
    /// Exhaustive when the spec space fits, otherwise this many samples.
    #[arg(long, default_value_t = 100_000)]
    budget: usize,
    /// Sampling seed (unused when exhaustive).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    rate: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TieArg {
    Lex,
    Error,
}

impl From<TieArg> for TieRule {
    fn from(t: TieArg) -> Self {
        match t {
            TieArg::Lex => TieRule::LexicographicMin,
            TieArg::Error => TieRule::CountAsError,
        }
    }
}

#[derive(Subcommand)]
enum SimulateCommand {
    /// Split linear code over an additive MAC with joint ML decoding.
    Split {
        /// Generator as inline JSON {"p":..,"rows":[[..]]} or a file path.
        #[arg(long)]
        generator: String,
        /// Rows owned by user 1.
        #[arg(long)]
        k1: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        noise: Vec<f64>,
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = TieArg::Lex)]
        tie_rule: TieArg,
        /// Also run the parent single-user decoder on the same noise.
        #[arg(long)]
        paired: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Nested PAM over the Gaussian MAC.
    Pam {
        #[arg(long)]
        l0: u64,
        #[arg(long)]
        l1: u64,
        #[arg(long, default_value_t = 1.0)]
        step: f64,
        #[arg(long)]
        noise_std: f64,
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct FigureArgs {
    #[arg(value_enum)]
    id: FigureId,
    /// Grid points along the horizontal axis.
    #[arg(long, default_value_t = 51, value_parser = clap::value_parser!(u64).range(2..))]
    resolution: u64,
    /// SNR of user 1 for `region`.
    #[arg(long, value_parser = parse_snr, default_value = "30db")]
    a1: f64,
    /// SNR of user 2 for `region`.
    #[arg(long, value_parser = parse_snr, default_value = "27db")]
    a2: f64,
    #[command(flatten)]
    out: OutputArgs,
}

/// Linear SNR from `"1000"` or `"30db"`.
fn parse_snr(s: &str) -> std::result::Result<f64, String> {
    let lower = s.trim().to_ascii_lowercase();
    let (num, is_db) = match lower.strip_suffix("db") {
        Some(n) => (n.trim(), true),
        None => (lower.as_str(), false),
    };
    let x: f64 = num.parse().map_err(|_| format!("'{s}' is not a number"))?;
    let a = if is_db { 10f64.powf(x / 10.0) } else { x };
    if a.is_finite() && a > 0.0 {
        Ok(a)
    } else {
        Err(format!("SNR must be positive, got '{s}'"))
    }
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected 'q,p', got '{s}'"))?;
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("'{x}' is not a number"));
    Ok((num(a)?, num(b)?))
}

/// Inline JSON, or the contents of the named file.
fn json_arg(arg: &str) -> Result<String> {
    if arg.trim_start().starts_with('{') {
        Ok(arg.to_string())
    } else {
        fs::read_to_string(arg).with_context(|| format!("reading {arg}"))
    }
}

fn render(table: &DataTable, format: Format) -> String {
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json() + "\n",
    }
}

/// Write all of `text` to `path` through a sibling temporary file, or print it.
fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    let Some(path) = path else {
        print!("{text}");
        return Ok(());
    };
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, text).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("moving output to {}", path.display()))?;
    Ok(())
}

fn emit_json(value: &serde_json::Value, path: Option<&Path>) -> Result<()> {
    emit(&(serde_json::to_string_pretty(value)? + "\n"), path)
}

fn rate_grid(given: &[f64], top: f64, points: u64) -> Vec<f64> {
    if !given.is_empty() {
        return given.to_vec();
    }
    (0..points).map(|i| top * i as f64 / (points - 1) as f64).collect()
}

fn run_su(args: &SuArgs) -> Result<()> {
    let ch = args.source.dmc()?;
    let unit = if args.bits { std::f64::consts::LN_2 } else { 1.0 };
    let (c, _) = capacity(&ch);
    let mut t = DataTable::new(&["rate", "random_coding", "expurgated", "best"])
        .with_meta("units", if args.bits { "bits" } else { "nats" })
        .with_meta("capacity", fmt12(c / unit));
    match (critical_rate(&ch), expurgation_rate(&ch)) {
        (Ok(rcr), Ok(rex)) => {
            t = t.with_meta("critical_rate", fmt12(rcr / unit)).with_meta("expurgation_rate", fmt12(rex / unit));
        }
        (Err(Error::ZeroCapacity), _) | (_, Err(Error::ZeroCapacity)) => {}
        (Err(e), _) | (_, Err(e)) => return Err(e.into()),
    }
    for r in rate_grid(&args.rate, c / unit, args.points) {
        let rate = r * unit;
        let er = random_coding_exponent(&ch, rate)?.e_r;
        let ex = expurgated_exponent(&ch, rate)?.value;
        t.push(vec![r, er / unit, ex / unit, er.max(ex) / unit]);
    }
    emit(&render(&t, args.out.format), args.out.output.as_deref())
}

fn run_gaussian(cmd: &GaussianCommand) -> Result<()> {
    match cmd {
        GaussianCommand::Su {
            snr,
            rate,
            points,
            bits,
            out,
        } => {
            let unit = if *bits { std::f64::consts::LN_2 } else { 1.0 };
            let c = gaussian_capacity(*snr);
            let mut t = DataTable::new(&["rate", "random_coding", "expurgated", "best"])
                .with_meta("snr", fmt12(*snr))
                .with_meta("units", if *bits { "bits" } else { "nats" })
                .with_meta("capacity", fmt12(c / unit))
                .with_meta("critical_rate", fmt12(gaussian_critical_rate(*snr)? / unit))
                .with_meta("expurgation_rate", fmt12(gaussian_expurgation_rate(*snr)? / unit));
            for r in rate_grid(rate, c / unit, *points) {
                let er = su_gaussian_random_coding(r * unit, *snr)?;
                let ex = su_gaussian_expurgated(r * unit, *snr)?;
                t.push(vec![r, er / unit, ex / unit, er.max(ex) / unit]);
            }
            emit(&render(&t, out.format), out.output.as_deref())
        }
        GaussianCommand::Mac { a1, a2, r1, r2, out } => {
            let p = GaussianMacParams::new(*a1, *a2, *r1, *r2)?;
            let dn = distributed_nesting_exponent(&p);
            let (ub, state) = gallager_spherical_ub(r1 + r2, *a1, *a2)?;
            let mut t = DataTable::new(&["mu1", "mu2", "distributed_nesting", "spherical_shell_ub", "rho", "theta1", "theta2", "in_r_struct"])
                .with_meta("a1", fmt12(*a1))
                .with_meta("a2", fmt12(*a2))
                .with_meta("r1", fmt12(*r1))
                .with_meta("r2", fmt12(*r2));
            let inside = if r_struct_contains(&p) { 1.0 } else { 0.0 };
            t.push(vec![dn.mu1, dn.mu2, dn.exponent, ub, state.rho, state.theta1, state.theta2, inside]);
            emit(&render(&t, out.format), out.output.as_deref())
        }
        GaussianCommand::Poltyrev { mu, out } => {
            let mut t = DataTable::new(&["mu", "exponent"]);
            for &m in mu {
                t.push(vec![m, poltyrev_exponent(m)?]);
            }
            emit(&render(&t, out.format), out.output.as_deref())
        }
    }
}

fn run_mac(args: &MacArgs) -> Result<()> {
    let mac = args.source.mac()?;
    let sw = slepian_wolf_mac_exponent(&mac, args.r1, args.r2)?;
    let ts = time_sharing_expurgated(&mac, args.r1, args.r2)?;
    emit_json(
        &json!({
            "r1": args.r1,
            "r2": args.r2,
            "slepian_wolf": sw,
            "time_sharing_expurgated": ts,
        }),
        args.output.as_deref(),
    )
}

fn run_transform(args: &TransformArgs) -> Result<()> {
    let mac = args.source.mac()?;
    let spec = TransformSpec::from_json(&json_arg(&args.spec)?)?;
    let vc = apply_transform(&mac, &spec)?;
    emit_json(
        &json!({
            "spec": spec,
            "virtual_channel": vc,
            "independence_deviation": independence_deviation(&mac, &spec)?,
            "rate": args.rate,
            "exponent": virtual_exponent(&mac, &spec, args.rate)?,
        }),
        args.output.as_deref(),
    )
}

fn run_search(args: &SearchArgs) -> Result<()> {
    let mac = args.source.mac()?;
    let res = search_transform(&mac, args.m, args.budget, args.seed, args.rate)?;
    emit_json(&json!({ "rate": args.rate, "seed": args.seed, "result": res }), args.output.as_deref())
}

/// Exact message-averaged error probability when enumeration is cheap.
///
/// Under the lexicographic tie rule the error probability depends on the
/// message, so the all-zero value is not the average.
fn exact_split_error(g: &GeneratorMatrix, noise: &Pmf<f64>, rule: TieRule) -> Result<Option<f64>> {
    let exact = match rule {
        TieRule::CountAsError => exact_ml_error_probability(g, noise, rule),
        TieRule::LexicographicMin => {
            let work = (g.n() + 2 * g.k()) as f64 * (g.p() as f64).log2();
            if work > 24.0 {
                return Ok(None);
            }
            message_averaged_error_probability(g, noise, rule)
        }
    };
    match exact {
        Ok(e) => Ok(Some(e)),
        Err(Error::TooLarge(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn run_simulate(cmd: &SimulateCommand) -> Result<()> {
    match cmd {
        SimulateCommand::Split {
            generator,
            k1,
            noise,
            trials,
            seed,
            tie_rule,
            paired,
            output,
        } => {
            let g = GeneratorMatrix::from_json(&json_arg(generator)?)?;
            let sc = split(&g, *k1)?;
            let noise = Pmf::new(noise.clone())?;
            let cfg = SimConfig::new(*trials as usize, *seed)?.with_tie_rule((*tie_rule).into());
            let exact = exact_split_error(&g, &noise, cfg.tie_rule)?;
            let config = json!({ "sim": cfg, "generator": g, "k1": k1, "noise": noise });
            let record = if *paired {
                let run = simulate_split_vs_parent(&sc, &noise, &cfg)?;
                json!({
                    "config": config,
                    "estimate": run.split.estimate,
                    "ci": run.split.ci_halfwidth,
                    "exact_if_available": exact,
                    "parent_estimate": run.parent.estimate,
                    "mismatches": run.mismatches,
                })
            } else {
                let est = simulate_split_mac(&sc, &noise, &cfg)?;
                json!({
                    "config": config,
                    "estimate": est.estimate,
                    "ci": est.ci_halfwidth,
                    "exact_if_available": exact,
                })
            };
            emit_json(&record, output.as_deref())
        }
        SimulateCommand::Pam {
            l0,
            l1,
            step,
            noise_std,
            trials,
            seed,
            output,
        } => {
            let t = PamTriplet::new(*l0, *l1, *step)?;
            let cfg = SimConfig::new(*trials as usize, *seed)?;
            let run = simulate_pam_mac(&t, *noise_std, &cfg)?;
            emit_json(
                &json!({
                    "config": { "sim": cfg, "triplet": t, "noise_std": noise_std },
                    "estimate": run.joint.estimate,
                    "ci": run.joint.ci_halfwidth,
                    "exact_if_available": pam_error_probability(*l0, *step, *noise_std),
                    "single_user_estimate": run.single_user.estimate,
                    "mismatches": run.mismatches,
                }),
                output.as_deref(),
            )
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Su(a) => run_su(a),
        Command::Gaussian { command } => run_gaussian(command),
        Command::Mac(a) => run_mac(a),
        Command::Transform(a) => run_transform(a),
        Command::Search(a) => run_search(a),
        Command::Simulate { command } => run_simulate(command),
        Command::Figure(a) => {
            let t = figures::build(a.id, a.resolution as usize, a.a1, a.a2)?;
            emit(&render(&t, a.out.format), a.out.output.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
