//! Command-line front end: parse a symbol file, run one computation, write
//! `{prefix}.result.json` (and `{prefix}.samples.csv` for sampled commands).

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::cmat::C64;
use crate::error::{Error, Result};
use crate::functionals::{kv_tr, minimal_p, wodzicki_res, TrOptions};
use crate::oracle::{self, SumKind};
use crate::powers::{complex_power_with_report, sectorial_projection_with_report, PowerOptions};
use crate::schema::parse_symbol;
use crate::spectra::{eta_continued, zeta_continued, zeta_pole, MeromorphicSample, SpectralOptions};
use crate::symring::{ClassicalSymbol, SphereGrid};
use crate::verify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "shubin", version, about = "Shubin-class symbol calculus and spectral functions")]
pub struct Cli {
    /// Prefix of the output files.
    #[arg(long, global = true, default_value = "shubin")]
    pub output: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Both)]
    pub format: Format,
    /// Store elapsed seconds in the result (makes output non-deterministic).
    #[arg(long, global = true)]
    pub record_time: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
    Both,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Numerics {
    /// Number of homogeneous components.
    #[arg(long, default_value_t = crate::calculus::DEFAULT_DEPTH)]
    pub depth: usize,
    /// Sphere grid size (nodes on S¹; total nodes for n = 2).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Inner radius of the contour (default from the principal spectrum).
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<f64>,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1e6)]
    pub r_max: f64,
    #[arg(long, default_value_t = 24)]
    pub ray_panels: usize,
    #[arg(long, default_value_t = 16)]
    pub gauss_order: usize,
    #[arg(long, default_value_t = crate::resolvent::DEFAULT_ARC_PANELS)]
    pub arc_panels: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Wodzicki residue.
    Residue {
        #[arg(long)]
        symbol: PathBuf,
        #[command(flatten)]
        numerics: Numerics,
    },
    /// Kontsevich–Vishik finite-part integral.
    Kv {
        #[arg(long)]
        symbol: PathBuf,
        /// Expansion terms subtracted in the exterior (default: smallest admissible).
        #[arg(long)]
        p: Option<usize>,
        #[command(flatten)]
        numerics: Numerics,
    },
    /// Complex power a_θ^z.
    Power {
        #[arg(long)]
        symbol: PathBuf,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
        z: C64,
        #[arg(long, allow_hyphen_values = true, default_value_t = PI)]
        theta: f64,
        #[command(flatten)]
        numerics: Numerics,
    },
    /// Sectorial projection Π_{θ,θ'} and its residue.
    Project {
        #[arg(long)]
        symbol: PathBuf,
        #[arg(long, allow_hyphen_values = true, default_value_t = PI / 2.0)]
        theta: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = -PI / 2.0)]
        theta_prime: f64,
        #[command(flatten)]
        numerics: Numerics,
    },
    /// Spectral ζ_θ(a, z).
    Zeta {
        #[arg(long)]
        symbol: PathBuf,
        #[arg(long, allow_negative_numbers = true, value_parser = parse_complex, num_args = 1.., required = true)]
        z: Vec<C64>,
        #[arg(long, allow_hyphen_values = true, default_value_t = PI)]
        theta: f64,
        #[command(flatten)]
        numerics: Numerics,
    },
    /// η(op(a), z).
    Eta {
        #[arg(long)]
        symbol: PathBuf,
        #[arg(long, allow_negative_numbers = true, value_parser = parse_complex, num_args = 1.., required = true)]
        z: Vec<C64>,
        #[arg(long, allow_hyphen_values = true, default_value_t = PI / 2.0)]
        theta: f64,
        #[command(flatten)]
        numerics: Numerics,
    },
    /// Poles of ζ at (2n − j)/m.
    Poles {
        #[arg(long)]
        symbol: PathBuf,
        #[arg(long, num_args = 1.., default_values_t = vec![0usize])]
        j: Vec<usize>,
        #[arg(long, allow_hyphen_values = true, default_value_t = PI)]
        theta: f64,
        #[command(flatten)]
        numerics: Numerics,
    },
    /// Hermite-basis eigenvalues, trace and spectral sums (n = 1).
    Oracle {
        #[arg(long)]
        symbol: PathBuf,
        #[arg(long, default_value_t = 400)]
        basis: usize,
        #[arg(long, default_value_t = 20)]
        count: usize,
        /// Evaluate Σ λ^{−z} at these points.
        #[arg(long, allow_negative_numbers = true, value_parser = parse_complex, num_args = 1..)]
        zeta: Vec<C64>,
        /// Evaluate Σ sgn(λ)|λ|^{−z} at these points.
        #[arg(long, allow_negative_numbers = true, value_parser = parse_complex, num_args = 1..)]
        eta: Vec<C64>,
        #[arg(long)]
        trace: bool,
    },
    /// Run verification suites.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        /// Symbol for the `regularity` suite.
        #[arg(long)]
        symbol: Option<PathBuf>,
    },
}

/// `re`, `re,im` or `re+imi` / `re-imi`.
pub fn parse_complex(s: &str) -> std::result::Result<C64, String> {
    let t = s.trim();
    let bad = || format!("cannot parse complex number \"{s}\"");
    if let Some((a, b)) = t.split_once(',') {
        return Ok(C64::new(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?));
    }
    if let Some(body) = t.strip_suffix('i') {
        let cut = body.char_indices().skip(1).filter(|(_, ch)| *ch == '+' || *ch == '-').last().map(|(i, _)| i);
        return match cut {
            Some(i) if !body[..i].ends_with(['e', 'E']) => {
                let im = match &body[i..] {
                    "+" => 1.0,
                    "-" => -1.0,
                    v => v.parse().map_err(|_| bad())?,
                };
                Ok(C64::new(body[..i].parse().map_err(|_| bad())?, im))
            }
            _ => Ok(C64::new(0.0, if body.is_empty() { 1.0 } else { body.parse().map_err(|_| bad())? })),
        };
    }
    Ok(C64::new(t.parse().map_err(|_| bad())?, 0.0))
}

fn cval(z: C64) -> Value {
    json!([z.re, z.im])
}

fn load(path: &Path) -> Result<ClassicalSymbol> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))?;
    parse_symbol(&text)
}

fn grid_for(n: usize, numerics: &Numerics) -> Result<Arc<SphereGrid>> {
    Ok(Arc::new(match numerics.grid {
        Some(size) => SphereGrid::with_size(n, size)?,
        None => SphereGrid::default_for(n)?,
    }))
}

fn validate_numerics(nu: &Numerics) -> Result<()> {
    if nu.depth == 0 {
        return Err(Error::Invalid("depth must be positive".into()));
    }
    if nu.eps.is_some_and(|e| !(e > 0.0)) || !(nu.r_max > 1.0) || nu.ray_panels == 0 || nu.gauss_order == 0 || nu.arc_panels == 0 {
        return Err(Error::Invalid("contour parameters must be positive (r_max > 1)".into()));
    }
    Ok(())
}

fn spectral_options(n: usize, nu: &Numerics) -> Result<SpectralOptions> {
    validate_numerics(nu)?;
    let g = grid_for(n, nu)?;
    Ok(SpectralOptions {
        power: PowerOptions {
            depth: nu.depth,
            grid: Some(g.clone()),
            eps: nu.eps,
            r_max: nu.r_max,
            ray_panels: nu.ray_panels,
            gauss_order: nu.gauss_order,
            arc_panels: nu.arc_panels,
            ..Default::default()
        },
        tr: TrOptions { grid: Some(g), ..Default::default() },
    })
}

/// What a command produced before serialization.
struct Outcome {
    value: Value,
    uncertainty: f64,
    method: &'static str,
    extra: Value,
    samples: Vec<MeromorphicSample>,
    failed_checks: bool,
}

impl Outcome {
    fn scalar(value: C64, uncertainty: f64, method: &'static str) -> Self {
        Self { value: cval(value), uncertainty, method, extra: Value::Null, samples: Vec::new(), failed_checks: false }
    }
}

fn numerics_echo(n: usize, nu: &Numerics) -> Value {
    let mut v = serde_json::to_value(nu).expect("numerics serialize");
    let size = nu.grid.unwrap_or_else(|| SphereGrid::default_for(n).map_or(0, |g| g.len()));
    v["grid"] = json!(size);
    v
}

fn sample_outcome(samples: Vec<MeromorphicSample>) -> Outcome {
    let uncertainty = samples.iter().map(|s| s.truncation_uncertainty).fold(0.0, f64::max);
    let method = samples.first().map_or("symbolic", |s| s.method.as_str());
    let value = if samples.len() == 1 { cval(samples[0].value) } else { Value::Array(samples.iter().map(|s| cval(s.value)).collect()) };
    Outcome { value, uncertainty, method, extra: Value::Null, samples, failed_checks: false }
}

fn execute(cmd: &Command) -> (Value, Result<Outcome>) {
    match cmd {
        Command::Residue { symbol, numerics } => {
            let mut echo = json!({"command": "residue", "symbol": symbol});
            let r = load(symbol).and_then(|a| {
                echo["numerics"] = numerics_echo(a.n, numerics);
                validate_numerics(numerics)?;
                let g = grid_for(a.n, numerics)?;
                Ok(Outcome::scalar(wodzicki_res(&a, Some(&g))?, 0.0, "symbolic"))
            });
            (echo, r)
        }
        Command::Kv { symbol, p, numerics } => {
            let mut echo = json!({"command": "kv", "symbol": symbol});
            let r = load(symbol).and_then(|a| {
                let p = p.unwrap_or_else(|| minimal_p(a.order, a.n));
                echo["p"] = json!(p);
                echo["numerics"] = numerics_echo(a.n, numerics);
                let opts = spectral_options(a.n, numerics)?;
                let v = kv_tr(&a, p, &opts.tr)?;
                Ok(Outcome::scalar(v.value, v.uncertainty, "symbolic"))
            });
            (echo, r)
        }
        Command::Power { symbol, z, theta, numerics } => {
            let mut echo = json!({"command": "power", "symbol": symbol, "z": cval(*z), "theta": theta});
            let r = load(symbol).and_then(|a| {
                echo["numerics"] = numerics_echo(a.n, numerics);
                let opts = spectral_options(a.n, numerics)?;
                let out = complex_power_with_report(&a, *z, *theta, &opts.power)?;
                let g = opts.power.grid_for(a.n)?;
                let node = &g.nodes[0];
                let comps = out
                    .symbol
                    .components
                    .iter()
                    .map(|c| {
                        let m = c.eval(node)?;
                        Ok(json!({"degree": cval(c.degree), "trace_at_first_node": cval(crate::cmat::trace(&m))}))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let lead = crate::cmat::trace(&out.symbol.principal()?.eval(node)?);
                let mut o = Outcome::scalar(lead, out.tail_uncertainty, "symbolic");
                o.extra = json!({"order": cval(out.symbol.order), "first_node": node, "components": comps, "eps": out.eps});
                Ok(o)
            });
            (echo, r)
        }
        Command::Project { symbol, theta, theta_prime, numerics } => {
            let mut echo = json!({"command": "project", "symbol": symbol, "theta": theta, "theta_prime": theta_prime});
            let r = load(symbol).and_then(|a| {
                echo["numerics"] = numerics_echo(a.n, numerics);
                let opts = spectral_options(a.n, numerics)?;
                let out = sectorial_projection_with_report(&a, *theta, *theta_prime, &opts.power)?;
                let res = wodzicki_res(&out.symbol, opts.power.grid.as_ref())?;
                let mut o = Outcome::scalar(res, out.tail_uncertainty, "symbolic");
                o.extra = json!({"two_i_pi_res": cval(C64::new(0.0, 2.0 * PI) * res), "eps": out.eps});
                Ok(o)
            });
            (echo, r)
        }
        Command::Zeta { symbol, z, theta, numerics } => {
            let mut echo = json!({"command": "zeta", "symbol": symbol, "z": z.iter().map(|v| cval(*v)).collect::<Vec<_>>(), "theta": theta});
            let r = load(symbol).and_then(|a| {
                echo["numerics"] = numerics_echo(a.n, numerics);
                let opts = spectral_options(a.n, numerics)?;
                let samples = z.iter().map(|&w| zeta_continued(&a, w, *theta, &opts)).collect::<Result<Vec<_>>>()?;
                Ok(sample_outcome(samples))
            });
            (echo, r)
        }
        Command::Eta { symbol, z, theta, numerics } => {
            let mut echo = json!({"command": "eta", "symbol": symbol, "z": z.iter().map(|v| cval(*v)).collect::<Vec<_>>(), "theta": theta});
            let r = load(symbol).and_then(|a| {
                echo["numerics"] = numerics_echo(a.n, numerics);
                let opts = spectral_options(a.n, numerics)?;
                let samples = z.iter().map(|&w| eta_continued(&a, w, *theta, &opts)).collect::<Result<Vec<_>>>()?;
                Ok(sample_outcome(samples))
            });
            (echo, r)
        }
        Command::Poles { symbol, j, theta, numerics } => {
            let mut echo = json!({"command": "poles", "symbol": symbol, "j": j, "theta": theta});
            let r = load(symbol).and_then(|a| {
                echo["numerics"] = numerics_echo(a.n, numerics);
                let opts = spectral_options(a.n, numerics)?;
                let reports = j.iter().map(|&jj| zeta_pole(&a, jj, *theta, &opts)).collect::<Result<Vec<_>>>()?;
                let value = Value::Array(reports.iter().map(|r| cval(r.residue)).collect());
                let unc = reports.iter().map(|r| (r.residue - r.residue_formula_value).norm()).fold(0.0, f64::max);
                let extra = serde_json::to_value(&reports).expect("pole reports serialize");
                Ok(Outcome { value, uncertainty: unc, method: "symbolic", extra, samples: Vec::new(), failed_checks: false })
            });
            (echo, r)
        }
        Command::Oracle { symbol, basis, count, zeta, eta, trace } => {
            let echo = json!({"command": "oracle", "symbol": symbol, "basis": basis, "count": count,
                "zeta": zeta.iter().map(|v| cval(*v)).collect::<Vec<_>>(),
                "eta": eta.iter().map(|v| cval(*v)).collect::<Vec<_>>(), "trace": trace});
            let r = load(symbol).and_then(|a| {
                let d = oracle::discretize(&a, *basis)?;
                let ev = oracle::eigenvalues(&d, *count)?;
                let mut samples = Vec::new();
                for &z in zeta {
                    samples.push(oracle::spectral_sum(&d, SumKind::Zeta { z, theta: PI / 2.0 })?);
                }
                for &z in eta {
                    samples.push(oracle::spectral_sum(&d, SumKind::Eta { z })?);
                }
                let mut extra = json!({"quantization": d.quantization, "source": d.source});
                let (value, unc) = if *trace {
                    let (t, u) = oracle::trace(&d)?;
                    extra["trace"] = cval(t);
                    (cval(t), u)
                } else {
                    (Value::Array(ev.iter().map(|v| cval(*v)).collect()), 0.0)
                };
                extra["eigenvalues"] = Value::Array(ev.iter().map(|v| cval(*v)).collect());
                Ok(Outcome { value, uncertainty: unc, method: "oracle", extra, samples, failed_checks: false })
            });
            (echo, r)
        }
        Command::Verify { suite, symbol } => {
            let echo = json!({"command": "verify", "suite": suite, "symbol": symbol});
            let r = (|| {
                let sym = symbol.as_deref().map(load).transpose()?;
                let checks = verify::run(suite, sym.as_ref())?;
                for c in &checks {
                    println!("{}", c.line());
                }
                let failed = checks.iter().filter(|c| !c.passed).count();
                println!("{} checks, {} failed", checks.len(), failed);
                Ok(Outcome {
                    value: json!(failed == 0),
                    uncertainty: 0.0,
                    method: "verify",
                    extra: serde_json::to_value(&checks).expect("checks serialize"),
                    samples: Vec::new(),
                    failed_checks: failed > 0,
                })
            })();
            (echo, r)
        }
    }
}

fn suffixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Run a parsed command line; returns the process exit status.
pub fn run(cli: &Cli) -> i32 {
    let start = Instant::now();
    let (mut echo, result) = execute(&cli.command);
    echo["format"] = json!(cli.format);
    let wall = cli.record_time.then(|| start.elapsed().as_secs_f64());
    let (doc, code, samples) = match result {
        Ok(o) => {
            let code = if o.failed_checks { EXIT_NUMERICAL } else { EXIT_OK };
            let doc = json!({"value": o.value, "uncertainty": o.uncertainty, "method": o.method,
                "details": o.extra, "wall_time": wall, "config_echo": echo});
            (doc, code, o.samples)
        }
        Err(e) => {
            let code = if e.is_validation() { EXIT_VALIDATION } else { EXIT_NUMERICAL };
            eprintln!("error [{}]: {e}", e.code());
            let doc = json!({"value": null, "uncertainty": null, "method": null,
                "error": {"code": e.code(), "message": e.to_string()}, "wall_time": wall, "config_echo": echo});
            (doc, code, Vec::new())
        }
    };
    if cli.format != Format::Csv {
        let path = suffixed(&cli.output, ".result.json");
        if let Err(e) = std::fs::write(&path, serde_json::to_string_pretty(&doc).expect("result serializes") + "\n") {
            eprintln!("cannot write {}: {e}", path.display());
            return EXIT_VALIDATION;
        }
    }
    if cli.format != Format::Json && !samples.is_empty() {
        let mut csv = String::from(MeromorphicSample::csv_header());
        csv.push('\n');
        for s in &samples {
            csv.push_str(&s.csv_row());
            csv.push('\n');
        }
        let path = suffixed(&cli.output, ".samples.csv");
        if let Err(e) = std::fs::write(&path, csv) {
            eprintln!("cannot write {}: {e}", path.display());
            return EXIT_VALIDATION;
        }
    }
    code
}

/// Cap the worker pool from SHUBIN_THREADS, if set.
pub fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("SHUBIN_THREADS") {
        let n: usize = v.parse().map_err(|_| Error::Invalid(format!("SHUBIN_THREADS must be a positive integer, got \"{v}\"")))?;
        if n == 0 {
            return Err(Error::Invalid("SHUBIN_THREADS must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_parsing() {
        assert_eq!(parse_complex("2").unwrap(), C64::new(2.0, 0.0));
        assert_eq!(parse_complex("1.5,-0.5").unwrap(), C64::new(1.5, -0.5));
        assert_eq!(parse_complex("1+2i").unwrap(), C64::new(1.0, 2.0));
        assert_eq!(parse_complex("-1e-2-3i").unwrap(), C64::new(-0.01, -3.0));
        assert_eq!(parse_complex("2.5i").unwrap(), C64::new(0.0, 2.5));
        assert!(parse_complex("abc").is_err());
    }

    #[test]
    fn negative_arguments_parse() {
        let cli = Cli::try_parse_from(["shubin", "project", "--symbol", "a.json", "--theta-prime", "-1.5"]).unwrap();
        assert!(matches!(cli.command, Command::Project { theta_prime, .. } if theta_prime == -1.5));
        let cli = Cli::try_parse_from(["shubin", "power", "--symbol", "a.json", "--z", "-0.5+1i"]).unwrap();
        assert!(matches!(cli.command, Command::Power { z, .. } if z == C64::new(-0.5, 1.0)));
        let cli = Cli::try_parse_from(["shubin", "zeta", "--symbol", "a.json", "--z", "-1", "2", "--theta", "1"]).unwrap();
        assert!(matches!(cli.command, Command::Zeta { ref z, theta, .. } if z.len() == 2 && theta == 1.0));
    }
}
