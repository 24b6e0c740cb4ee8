mod claims;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use claims::Claim;
use config::{ConfigError, ExperimentConfig};
use output::{ClaimSummary, InputReport, Status, Summary};

#[derive(Parser)]
#[command(name = "dressing", version, about = "Scale-limit checks for the dressing action")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the claims of a config (or of the flags alone) and write CSV, JSON and SVG output.
    Run(RunArgs),
    /// Summarize the JSON summaries found in a results directory.
    Report {
        /// Results directory; the output default when absent.
        dir: Option<PathBuf>,
    },
    /// List the claim names.
    ListClaims,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Claim names, repeated or comma-separated; replaces the config's list.
    #[arg(long, value_delimiter = ',')]
    claim: Vec<String>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    xi: Vec<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    /// "a,b,c" or an integer range "from:to", e.g. -1:-12.
    #[arg(long = "s-grid", alias = "s", allow_hyphen_values = true)]
    s_grid: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run(args) => run(args),
        Command::Report { dir } => report(dir),
        Command::ListClaims => {
            for c in claims::ALL {
                println!("{:<14} {}", c.name(), c.describe());
            }
            0
        }
    };
    ExitCode::from(code)
}

fn build_config(args: &RunArgs) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = match &args.config {
        Some(p) => config::load(p)?,
        None => ExperimentConfig::default(),
    };
    if !args.claim.is_empty() {
        cfg.claims = args
            .claim
            .iter()
            .map(|name| Claim::parse(name).ok_or_else(|| ConfigError(format!("unknown claim {name:?}"))))
            .collect::<Result<_, _>>()?;
    }
    if !args.xi.is_empty() {
        cfg.xi = args.xi.clone();
    }
    if let Some(d) = args.delta {
        cfg.delta = d;
    }
    if let Some(e) = args.eps {
        cfg.eps = e;
    }
    if let Some(g) = &args.s_grid {
        cfg.s_grid = config::parse_grid(g)?;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn run(args: RunArgs) -> u8 {
    let validated = match build_config(&args).and_then(config::validate) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let dir = config::out_dir(args.out.clone(), &validated.config);
    if let Err(e) = std::fs::create_dir_all(&dir) {
        eprintln!("error: cannot create {}: {e}", dir.display());
        return 2;
    }
    let cfg = &validated.config;
    let results: Vec<(Claim, Result<claims::Reports, dressing_core::Error>)> =
        cfg.claims.iter().map(|&c| (c, claims::evaluate(c, &validated))).collect();

    let mut summaries = Vec::new();
    for (claim, res) in &results {
        let name = claim.name();
        let summary = match res {
            Ok(reports) => {
                let csv_name = format!("{name}.csv");
                if let Err(e) = output::write(&dir, &csv_name, &output::csv(name, reports)) {
                    eprintln!("error: writing {csv_name}: {e}");
                    return 2;
                }
                let mut svg_name = None;
                if cfg.svg {
                    if let Some(body) = output::svg(name, reports) {
                        let file = format!("{name}.svg");
                        if let Err(e) = output::write(&dir, &file, &body) {
                            eprintln!("error: writing {file}: {e}");
                            return 2;
                        }
                        svg_name = Some(file);
                    }
                }
                let status = Status::of_reports(reports);
                if *claim == Claim::Concentration {
                    for (_, rep) in reports {
                        if let Some(ser) = rep.series("fraction") {
                            for &(s, f) in &ser.points {
                                println!("concentration xi={} eps={} s={s}: {f:.6}", validated.xi.t[0], cfg.eps);
                            }
                        }
                    }
                }
                println!("{name}: {}", status.label());
                ClaimSummary {
                    claim: name,
                    status,
                    message: None,
                    csv: Some(csv_name),
                    svg: svg_name,
                    reports: reports.iter().map(|(id, r)| InputReport { input: id, report: r }).collect(),
                }
            }
            Err(e) => {
                let status = Status::of_error(e);
                println!("{name}: {} ({e})", status.label());
                ClaimSummary { claim: name, status, message: Some(e.to_string()), csv: None, svg: None, reports: Vec::new() }
            }
        };
        summaries.push(summary);
    }
    let code = output::worst(summaries.iter().map(|s| s.status.exit_code()));
    let summary = Summary { config: cfg, exit_code: code, claims: summaries };
    let body = match serde_json::to_string_pretty(&summary) {
        Ok(b) => b + "\n",
        Err(e) => {
            eprintln!("error: serializing summary: {e}");
            return 3;
        }
    };
    if let Err(e) = output::write(&dir, "summary.json", &body) {
        eprintln!("error: writing summary.json: {e}");
        return 2;
    }
    code
}

fn summaries_in(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut found = Vec::new();
    let direct = dir.join("summary.json");
    if direct.is_file() {
        found.push(direct);
    }
    let mut subdirs: Vec<PathBuf> = std::fs::read_dir(dir)?.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.is_dir()).collect();
    subdirs.sort();
    for d in subdirs {
        let f = d.join("summary.json");
        if f.is_file() {
            found.push(f);
        }
    }
    Ok(found)
}

fn report(dir: Option<PathBuf>) -> u8 {
    let dir = dir
        .or_else(|| std::env::var_os(config::OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(config::DEFAULT_OUT));
    let files = match summaries_in(&dir) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {}: {e}", dir.display());
            return 2;
        }
    };
    if files.is_empty() {
        eprintln!("error: no results in {}", dir.display());
        return 2;
    }
    let mut codes = Vec::new();
    println!("{:<24} {:<14} status", "suite", "claim");
    for f in files {
        let base = f.parent().unwrap_or(&dir).to_path_buf();
        let suite = base.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| ".".into());
        let value: serde_json::Value = match std::fs::read_to_string(&f).map_err(|e| e.to_string()).and_then(|t| serde_json::from_str(&t).map_err(|e| e.to_string())) {
            Ok(v) => v,
            Err(e) => {
                eprintln!("error: {}: {e}", f.display());
                return 2;
            }
        };
        let Some(claims) = value["claims"].as_array() else {
            eprintln!("error: {}: no claims array", f.display());
            return 2;
        };
        for c in claims {
            for key in ["csv", "svg"] {
                if let Some(name) = c[key].as_str() {
                    if !base.join(name).is_file() {
                        eprintln!("error: missing file {}", base.join(name).display());
                        return 2;
                    }
                }
            }
            let status = c["status"].as_str().unwrap_or("?");
            println!("{:<24} {:<14} {}", suite, c["claim"].as_str().unwrap_or("?"), status.to_uppercase());
        }
        codes.push(value["exit_code"].as_u64().unwrap_or(2) as u8);
    }
    output::worst(codes)
}
