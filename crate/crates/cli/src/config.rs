use std::path::{Path, PathBuf};

use dressing_core::cluster::{build_seed, ClusterPoint, SeedData};
use dressing_core::iwasawa::CartanPoint;
use dressing_core::verify::SGrid;
use serde::{Deserialize, Serialize};

use crate::claims::Claim;

pub const OUT_ENV: &str = "DRESSING_OUT";
pub const DEFAULT_OUT: &str = "results";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rank {
    Su2,
    Su3,
}

impl Rank {
    pub fn n(self) -> usize {
        match self {
            Rank::Su2 => 2,
            Rank::Su3 => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub lam: Vec<f64>,
    pub phi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub volume: f64,
    pub monte_carlo: f64,
    pub ks: f64,
    pub cauchy: f64,
    pub eta_volume: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { volume: 1e-9, monte_carlo: 3e-3, ks: 0.01, cauchy: 1e-4, eta_volume: 5e-3 }
    }
}

/// Flat experiment description. Every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub rank: Rank,
    /// Reduced word for w₀; the rank's default when absent.
    pub word: Option<Vec<usize>>,
    pub claims: Vec<Claim>,
    /// One entry t (meaning diag(t, -t)) or the full diagonal.
    pub xi: Vec<f64>,
    pub delta: f64,
    pub eps: f64,
    pub upsilon: f64,
    pub s_grid: Vec<f64>,
    /// Fit only the deepest this many resolvable points.
    pub fit_window: Option<usize>,
    pub points: Vec<PointSpec>,
    /// Extra points drawn from the δ-cone over the leaf of ξ.
    pub cone_samples: usize,
    /// Monte Carlo and KS sample count.
    pub samples: usize,
    /// Haar draws for the moment-map envelope.
    pub haar_samples: usize,
    pub big_cell_margin: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub svg: bool,
    pub tolerances: Tolerances,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            rank: Rank::Su2,
            word: None,
            claims: Vec::new(),
            xi: vec![1.0],
            delta: 0.3,
            eps: 0.1,
            upsilon: 1.0,
            s_grid: (1..=12).map(|k| -(k as f64)).collect(),
            fit_window: None,
            points: Vec::new(),
            cone_samples: 0,
            samples: 100_000,
            haar_samples: 200,
            big_cell_margin: 0.1,
            seed: 2024,
            out: None,
            svg: true,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<dressing_core::Error> for ConfigError {
    fn from(e: dressing_core::Error) -> Self {
        ConfigError(e.to_string())
    }
}

pub fn load(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
}

/// Accepts "a,b,c" or an integer range "from:to".
pub fn parse_grid(text: &str) -> Result<Vec<f64>, ConfigError> {
    let bad = || ConfigError(format!("cannot parse s grid {text:?}"));
    if let Some((a, b)) = text.split_once(':') {
        let a: i32 = a.trim().parse().map_err(|_| bad())?;
        let b: i32 = b.trim().parse().map_err(|_| bad())?;
        if a < b {
            return Err(bad());
        }
        return Ok((b..=a).rev().map(f64::from).collect());
    }
    text.split(',').map(|v| v.trim().parse::<f64>().map_err(|_| bad())).collect()
}

/// Everything a run needs, checked.
pub struct Validated {
    pub config: ExperimentConfig,
    pub seed: SeedData,
    pub xi: CartanPoint,
    pub grid: SGrid,
    pub points: Vec<ClusterPoint>,
}

pub fn validate(config: ExperimentConfig) -> Result<Validated, ConfigError> {
    let n = config.rank.n();
    if config.claims.is_empty() {
        return Err(ConfigError("no claims selected".into()));
    }
    let xi = match (n, config.xi.as_slice()) {
        (2, [t]) => CartanPoint::new(vec![*t, -*t])?,
        (_, t) if t.len() == n => CartanPoint::new(t.to_vec())?,
        _ => return Err(ConfigError(format!("xi needs 1 or {n} entries for rank {:?}", config.rank))),
    };
    if !xi.is_regular() {
        return Err(ConfigError(format!("xi = {:?} is not regular", xi.t)));
    }
    for (name, v) in [("delta", config.delta), ("eps", config.eps), ("upsilon", config.upsilon), ("big_cell_margin", config.big_cell_margin)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(ConfigError(format!("{name} must be positive, got {v}")));
        }
    }
    if n == 2 && config.delta >= xi.t[0] {
        return Err(ConfigError(
            dressing_core::Error::EmptyRegion(format!("delta = {} leaves no cone point over the leaf t = {}", config.delta, xi.t[0])).to_string(),
        ));
    }
    let word = config.word.clone().unwrap_or_else(|| if n == 2 { vec![1] } else { vec![1, 2, 1] });
    let seed = build_seed(n, &word)?;
    let grid = SGrid::new(config.s_grid.clone())?.with_window(config.fit_window);
    let mut points = Vec::new();
    for (i, p) in config.points.iter().enumerate() {
        if p.lam.len() != seed.r + seed.m || p.phi.len() != seed.m {
            return Err(ConfigError(format!(
                "point {i} needs {} lam and {} phi entries",
                seed.r + seed.m,
                seed.m
            )));
        }
        points.push(ClusterPoint::new(p.lam.clone(), p.phi.clone()));
    }
    if config.cone_samples > 0 {
        points.extend(dressing_core::tropical::sample_leaf(&seed, &xi, config.delta, config.cone_samples, config.seed)?);
    }
    if points.is_empty() && config.claims.iter().any(|c| c.needs_points()) {
        return Err(ConfigError("selected claims need points or cone_samples".into()));
    }
    if config.claims.iter().any(|c| c.su2_only()) && n != 2 {
        return Err(ConfigError("volume, concentration, dh and eta claims are rank su2 only".into()));
    }
    Ok(Validated { config, seed, xi, grid, points })
}

pub fn out_dir(flag: Option<PathBuf>, config: &ExperimentConfig) -> PathBuf {
    flag.or_else(|| config.out.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}
