//! Command-line front end: channel-spec ingestion, capacity bounds, SNR
//! sweeps to CSV, closed-loop simulation, and an identity-verification
//! command.
//!
//! Exit codes: 0 ok, 2 invalid spec, 3 numerical/solver failure,
//! 4 simulation divergence.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Deserialize;

use fbcap::{
    achieved_power, kim_first_order, lower_bound, rate_integral, stability_report, ArmaSpec,
    CapacityBound, CapacityQuery, Error, SimConfig, SimReport,
};

const EXIT_OK: i32 = 0;
const EXIT_INVALID_SPEC: i32 = 2;
const EXIT_NUMERICAL: i32 = 3;
const EXIT_DIVERGED: i32 = 4;

/// Tolerance for the unconditional identity checks of `verify`.
const VERIFY_TOL: f64 = 1e-8;

#[derive(Parser)]
#[command(
    name = "fbcap",
    about = "Feedback-capacity lower bounds for ARMA colored Gaussian noise channels",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a channel spec file and report violations.
    Validate { path: PathBuf },
    /// Solve the capacity lower bound for a channel spec.
    Capacity {
        path: PathBuf,
        /// Emit a machine-readable JSON object instead of the text table.
        #[arg(long)]
        json: bool,
    },
    /// Sweep the power constraint and write one CSV row per grid point.
    Sweep {
        path: PathBuf,
        #[arg(long)]
        power_min: f64,
        #[arg(long)]
        power_max: f64,
        #[arg(long)]
        points: usize,
        /// Space grid points logarithmically instead of linearly.
        #[arg(long)]
        log_spacing: bool,
        /// Output CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate a closed loop at the solved bound and print the report.
    Simulate {
        path: PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Samples discarded before moment estimation; defaults to the
        /// spec-derived transient length.
        #[arg(long)]
        burn_in: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-sample trace CSV path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the identity suite for a spec and print a pass/fail table.
    Verify { path: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Whitened,
    Colored,
}

/// On-disk channel description; unknown keys are rejected.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelSpecFile {
    f: Vec<f64>,
    g: Vec<f64>,
    noise_variance: f64,
    power: f64,
    #[serde(default)]
    c: Option<f64>,
}

struct Channel {
    spec: ArmaSpec,
    query: CapacityQuery,
}

/// Reads and fully validates a channel spec file. The error payload is the
/// list of messages to print before exiting with code 2.
fn load_channel(path: &Path) -> Result<Channel, Vec<String>> {
    let text = fs::read_to_string(path)
        .map_err(|e| vec![format!("cannot read {}: {e}", path.display())])?;
    let file: ChannelSpecFile =
        serde_json::from_str(&text).map_err(|e| vec![format!("malformed spec file: {e}")])?;
    let mut violations = fbcap::validate(&file.f, &file.g, file.noise_variance);
    if !file.power.is_finite() || file.power <= 0.0 {
        violations.push("power must be positive".into());
    }
    let c = file.c.unwrap_or(1.0);
    if !c.is_finite() || c == 0.0 {
        violations.push("c must be nonzero".into());
    }
    if !violations.is_empty() {
        return Err(violations);
    }
    let spec =
        ArmaSpec::new(file.f, file.g, file.noise_variance).map_err(|e| vec![e.to_string()])?;
    let query =
        CapacityQuery::with_c(spec.clone(), file.power, c).map_err(|e| vec![e.to_string()])?;
    Ok(Channel { spec, query })
}

/// Formats with 9 significant digits, plain decimal where reasonable.
fn fmt_g9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let s = format!("{:.*}", decimals, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{:.8e}", x);
        let (mantissa, exponent) = s.split_once('e').unwrap();
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exponent}")
    }
}

fn main() {
    std::process::exit(run(Cli::parse()));
}

fn run(cli: Cli) -> i32 {
    match cli.cmd {
        Cmd::Validate { path } => cmd_validate(&path),
        Cmd::Capacity { path, json } => cmd_capacity(&path, json),
        Cmd::Sweep {
            path,
            power_min,
            power_max,
            points,
            log_spacing,
            out,
        } => cmd_sweep(
            &path,
            power_min,
            power_max,
            points,
            log_spacing,
            out.as_deref(),
        ),
        Cmd::Simulate {
            path,
            mode,
            samples,
            burn_in,
            seed,
            out,
        } => cmd_simulate(&path, mode, samples, burn_in, seed, out.as_deref()),
        Cmd::Verify { path } => cmd_verify(&path),
    }
}

fn cmd_validate(path: &Path) -> i32 {
    match load_channel(path) {
        Ok(_) => {
            println!("ok");
            EXIT_OK
        }
        Err(violations) => {
            for v in violations {
                eprintln!("violation: {v}");
            }
            EXIT_INVALID_SPEC
        }
    }
}

fn solve(channel: &Channel) -> Result<CapacityBound, i32> {
    lower_bound(&channel.query).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_NUMERICAL
    })
}

fn cmd_capacity(path: &Path, json: bool) -> i32 {
    let channel = match load_channel(path) {
        Ok(c) => c,
        Err(violations) => {
            for v in violations {
                eprintln!("violation: {v}");
            }
            return EXIT_INVALID_SPEC;
        }
    };
    let bound = match solve(&channel) {
        Ok(b) => b,
        Err(code) => return code,
    };
    let achieved = achieved_power(&bound.signed_plant(channel.query.c), &channel.spec);
    if json {
        let value = serde_json::json!({
            "a_bar": bound.a_bar,
            "capacity_bits": bound.capacity_bits,
            "variant": bound.variant,
            "loop_verdict": bound.loop_verdict,
            "achieved_power": achieved,
            "all_real_roots": bound.all_real_roots,
            "residual": bound.residual,
        });
        println!("{}", serde_json::to_string_pretty(&value).unwrap());
    } else {
        println!("a_bar          {}", fmt_g9(bound.a_bar));
        println!("capacity_bits  {}", fmt_g9(bound.capacity_bits));
        println!("variant        {}", bound.variant);
        println!("loop_verdict   {}", bound.loop_verdict);
        println!("achieved_power {}", fmt_g9(achieved));
    }
    EXIT_OK
}

fn sweep_grid(power_min: f64, power_max: f64, points: usize, log_spacing: bool) -> Vec<f64> {
    (0..points)
        .map(|i| {
            let t = if points == 1 {
                0.0
            } else {
                i as f64 / (points - 1) as f64
            };
            if log_spacing {
                power_min * (power_max / power_min).powf(t)
            } else {
                power_min + (power_max - power_min) * t
            }
        })
        .collect()
}

fn cmd_sweep(
    path: &Path,
    power_min: f64,
    power_max: f64,
    points: usize,
    log_spacing: bool,
    out: Option<&Path>,
) -> i32 {
    if !power_min.is_finite()
        || power_min <= 0.0
        || !power_max.is_finite()
        || power_max <= power_min
        || points < 2
    {
        eprintln!("error: need 0 < power-min < power-max and points >= 2");
        return EXIT_INVALID_SPEC;
    }
    let channel = match load_channel(path) {
        Ok(c) => c,
        Err(violations) => {
            for v in violations {
                eprintln!("violation: {v}");
            }
            return EXIT_INVALID_SPEC;
        }
    };
    let first_order = channel.spec.p() <= 1 && channel.spec.q() <= 1;
    let mut csv = String::from("power,snr,a_bar,variant,capacity_bits,kim_bits,loop_verdict\n");
    let mut failed = false;
    for power in sweep_grid(power_min, power_max, points, log_spacing) {
        let snr = power / channel.spec.sigma_hat_sq();
        let query = CapacityQuery::with_c(channel.spec.clone(), power, channel.query.c)
            .expect("grid powers are positive");
        match lower_bound(&query) {
            Ok(bound) => {
                let kim = if first_order {
                    fmt_g9(kim_first_order(&query).expect("first-order spec"))
                } else {
                    String::new()
                };
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    fmt_g9(power),
                    fmt_g9(snr),
                    fmt_g9(bound.a_bar),
                    bound.variant,
                    fmt_g9(bound.capacity_bits),
                    kim,
                    bound.loop_verdict
                ));
            }
            Err(_) => {
                failed = true;
                csv.push_str(&format!(
                    "{},{},error,error,error,,error\n",
                    fmt_g9(power),
                    fmt_g9(snr)
                ));
            }
        }
    }
    match out {
        Some(path) => {
            if let Err(e) = fs::write(path, csv) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return EXIT_NUMERICAL;
            }
        }
        None => print!("{csv}"),
    }
    if failed {
        EXIT_NUMERICAL
    } else {
        EXIT_OK
    }
}

fn cmd_simulate(
    path: &Path,
    mode: ModeArg,
    samples: usize,
    burn_in: Option<usize>,
    seed: u64,
    out: Option<&Path>,
) -> i32 {
    let channel = match load_channel(path) {
        Ok(c) => c,
        Err(violations) => {
            for v in violations {
                eprintln!("violation: {v}");
            }
            return EXIT_INVALID_SPEC;
        }
    };
    let bound = match solve(&channel) {
        Ok(b) => b,
        Err(code) => return code,
    };
    let plant = bound.coding_plant(channel.query.c);
    let cfg = match SimConfig::new(
        samples,
        burn_in.unwrap_or_else(|| channel.spec.default_burn_in()),
        seed,
    ) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID_SPEC;
        }
    };

    let mut trace_csv = out.map(|_| String::from("k,x_tilde,y_prime,e_prime,u,v\n"));
    let sink = |r: fbcap::TraceRecord| {
        if let Some(csv) = trace_csv.as_mut() {
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.k,
                fmt_g9(r.x_tilde),
                fmt_g9(r.y_prime),
                fmt_g9(r.e_prime),
                fmt_g9(r.u),
                fmt_g9(r.v)
            ));
        }
    };
    let report: Result<SimReport, Error> = match mode {
        ModeArg::Whitened => {
            fbcap::coder::simulate_whitened_traced(&plant, &channel.spec, &cfg, sink)
        }
        ModeArg::Colored => {
            fbcap::coder::simulate_colored_traced(&plant, &channel.spec, &cfg, sink)
        }
    };
    let report = match report {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_NUMERICAL;
        }
    };
    if let (Some(path), Some(csv)) = (out, trace_csv) {
        if let Err(e) = fs::write(path, csv) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return EXIT_NUMERICAL;
        }
    }
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    if report.diverged {
        EXIT_DIVERGED
    } else {
        EXIT_OK
    }
}

struct VerifyTable {
    rows: Vec<(String, String, String)>,
    unconditional_failed: bool,
}

impl VerifyTable {
    fn new() -> Self {
        Self {
            rows: Vec::new(),
            unconditional_failed: false,
        }
    }

    fn check(&mut self, name: &str, rel_err: f64, tol: f64, detail: String) {
        let ok = rel_err <= tol;
        if !ok {
            self.unconditional_failed = true;
        }
        self.rows.push((
            name.to_string(),
            if ok { "pass" } else { "FAIL" }.to_string(),
            detail,
        ));
    }

    fn info(&mut self, name: &str, detail: String) {
        self.rows
            .push((name.to_string(), "info".to_string(), detail));
    }

    fn print(&self) {
        let width = self.rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
        println!("{:width$}  {:6}  detail", "check", "result");
        for (name, result, detail) in &self.rows {
            println!("{name:width$}  {result:6}  {detail}");
        }
    }
}

fn rel_err(actual: f64, expected: f64) -> f64 {
    (actual - expected).abs() / expected.abs().max(f64::MIN_POSITIVE)
}

fn cmd_verify(path: &Path) -> i32 {
    let channel = match load_channel(path) {
        Ok(c) => c,
        Err(violations) => {
            for v in violations {
                eprintln!("violation: {v}");
            }
            return EXIT_INVALID_SPEC;
        }
    };
    let bound = match solve(&channel) {
        Ok(b) => b,
        Err(code) => return code,
    };
    let spec = &channel.spec;
    let signed = bound.signed_plant(channel.query.c);
    let coding = bound.coding_plant(channel.query.c);
    let ss = fbcap::steady_state_colored(&signed, spec);
    let a = bound.a_bar;

    let mut table = VerifyTable::new();

    let at = Complex64::new(a, 0.0);
    let ar_at = spec.ar_poly().eval_delay(at).re;
    let ma_at = spec.ma_poly().eval_delay(at).re;
    let lhs = signed.c() * signed.c() * ss.p * ar_at * ar_at;
    let rhs = spec.sigma_hat_sq() * (a * a - 1.0) * ma_at * ma_at;
    table.check(
        "power_identity",
        rel_err(lhs, rhs),
        VERIFY_TOL,
        format!(
            "c^2 P (1-sum f a^-i)^2 = {} vs {}",
            fmt_g9(lhs),
            fmt_g9(rhs)
        ),
    );

    let gain = (a * a - 1.0) / a;
    table.check(
        "gain_identity",
        rel_err(ss.k_hat * ss.c_hat, gain),
        VERIFY_TOL,
        format!(
            "K c = {} vs (a^2-1)/a = {}",
            fmt_g9(ss.k_hat * ss.c_hat),
            fmt_g9(gain)
        ),
    );

    let sigma_e = a * a * spec.sigma_hat_sq();
    table.check(
        "innovation_identity",
        rel_err(ss.sigma_e_sq, sigma_e),
        VERIFY_TOL,
        format!(
            "sigma_e^2 = {} vs a^2 sigma^2 = {}",
            fmt_g9(ss.sigma_e_sq),
            fmt_g9(sigma_e)
        ),
    );

    let achieved = achieved_power(&signed, spec);
    table.check(
        "achieved_power",
        rel_err(achieved, channel.query.power),
        VERIFY_TOL,
        format!(
            "{} vs budget {}",
            fmt_g9(achieved),
            fmt_g9(channel.query.power)
        ),
    );

    if spec.p() <= 1 && spec.q() <= 1 {
        match kim_first_order(&channel.query) {
            Ok(kim) => table.check(
                "kim_tightness",
                (bound.capacity_bits - kim).abs(),
                VERIFY_TOL,
                format!("{} vs exact {}", fmt_g9(bound.capacity_bits), fmt_g9(kim)),
            ),
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_NUMERICAL;
            }
        }
    } else {
        table.info("kim_tightness", "skipped: p or q exceeds 1".into());
    }

    match rate_integral(&coding, spec) {
        Ok(ri) => {
            let status = if ri.discrepancy {
                "discrepancy: unstable loop poles"
            } else {
                "matches capacity"
            };
            table.info(
                "rate_integral",
                format!(
                    "{} bits vs log2|a_bar| = {} ({status})",
                    fmt_g9(ri.bits),
                    fmt_g9(ri.expected_bits)
                ),
            );
        }
        Err(Error::IllConditionedIntegral(_)) => {
            table.info("rate_integral", "skipped: marginal loop poles".into());
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_NUMERICAL;
        }
    }

    match stability_report(&coding, spec) {
        Ok(rep) => {
            let poles: Vec<String> = rep
                .chi_poles
                .iter()
                .map(|p| {
                    if p.im == 0.0 {
                        fmt_g9(p.re)
                    } else {
                        format!(
                            "{}{}{}i",
                            fmt_g9(p.re),
                            if p.im < 0.0 { "-" } else { "+" },
                            fmt_g9(p.im.abs())
                        )
                    }
                })
                .collect();
            table.info(
                "stability",
                format!(
                    "{}; equivalence_consistent={}; poles [{}]",
                    rep.verdict,
                    rep.equivalence_consistent,
                    poles.join(", ")
                ),
            );
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_NUMERICAL;
        }
    }

    table.print();
    if table.unconditional_failed {
        EXIT_NUMERICAL
    } else {
        EXIT_OK
    }
}
