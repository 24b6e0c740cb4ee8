use std::f64::consts::PI;

use dressing_core::cluster::GraphOptions;
use dressing_core::su2;
use dressing_core::tropical;
use dressing_core::verify::{self, CheckInputs, CheckReport, SGrid, Series};
use dressing_core::Error;
use serde::{Deserialize, Serialize};

use crate::config::Validated;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Claim {
    Volume,
    Concentration,
    Dh,
    Eta,
    Envelope,
    CasimirLimit,
    Subleading,
    Jacobian,
    UnitaryLimit,
    Coherence,
    Graph,
}

pub const ALL: [Claim; 11] = [
    Claim::Volume,
    Claim::Concentration,
    Claim::Dh,
    Claim::Eta,
    Claim::Envelope,
    Claim::CasimirLimit,
    Claim::Subleading,
    Claim::Jacobian,
    Claim::UnitaryLimit,
    Claim::Coherence,
    Claim::Graph,
];

impl Claim {
    pub fn name(self) -> &'static str {
        match self {
            Claim::Volume => "volume",
            Claim::Concentration => "concentration",
            Claim::Dh => "dh",
            Claim::Eta => "eta",
            Claim::Envelope => "envelope",
            Claim::CasimirLimit => "casimir-limit",
            Claim::Subleading => "subleading",
            Claim::Jacobian => "jacobian",
            Claim::UnitaryLimit => "unitary-limit",
            Claim::Coherence => "coherence",
            Claim::Graph => "graph",
        }
    }

    pub fn parse(name: &str) -> Option<Claim> {
        ALL.iter().copied().find(|c| c.name() == name)
    }

    pub fn describe(self) -> &'static str {
        match self {
            Claim::Volume => "SU(2) orbit volume stays 4 pi xi for every s",
            Claim::Concentration => "SU(2) volume fraction within eps of the pole cap, closed form and Monte Carlo",
            Claim::Dh => "KS distance of the sampled moment coordinate from uniform",
            Claim::Eta => "SU(2) volume-form coefficient on the cluster chart and its limit",
            Claim::Envelope => "scaled moment-map error stays bounded as s decreases",
            Claim::CasimirLimit => "Casimir coordinates converge to the leaf coordinates",
            Claim::Subleading => "subleading Casimir terms decay",
            Claim::Jacobian => "Jacobian of the Casimir map tends to the identity",
            Claim::UnitaryLimit => "unitary factor tends to a diagonal, and kDk* to D",
            Claim::Coherence => "off-diagonal decay tracks the subleading decay",
            Claim::Graph => "box sign pattern and solved leaf point approach",
        }
    }

    pub fn needs_points(self) -> bool {
        matches!(self, Claim::Eta | Claim::CasimirLimit | Claim::Subleading | Claim::Jacobian | Claim::UnitaryLimit | Claim::Coherence | Claim::Graph)
    }

    pub fn su2_only(self) -> bool {
        matches!(self, Claim::Volume | Claim::Concentration | Claim::Dh | Claim::Eta)
    }
}

/// Reports keyed by input id.
pub type Reports = Vec<(String, CheckReport)>;

pub fn evaluate(claim: Claim, v: &Validated) -> Result<Reports, Error> {
    let cfg = &v.config;
    let per_point = |f: &dyn Fn(&dressing_core::cluster::ClusterPoint) -> Result<CheckReport, Error>| -> Result<Reports, Error> {
        v.points.iter().enumerate().map(|(i, p)| Ok((format!("p{i}"), f(p)?))).collect()
    };
    match claim {
        Claim::Volume => Ok(vec![("xi".into(), volume(v))]),
        Claim::Concentration => Ok(vec![("xi".into(), concentration(v)?)]),
        Claim::Dh => Ok(vec![("xi".into(), dh(v)?)]),
        Claim::Eta => per_point(&|p| eta(v, p)),
        Claim::Envelope => Ok(vec![(
            "haar".into(),
            verify::check_envelope(&v.xi, cfg.big_cell_margin, &v.grid, cfg.haar_samples, cfg.seed)?,
        )]),
        Claim::CasimirLimit => per_point(&|p| verify::check_casimir_limit(p, &v.seed, &v.grid)),
        Claim::Subleading => per_point(&|p| verify::check_subleading(p, &v.seed, &v.grid)),
        Claim::Jacobian => per_point(&|p| verify::check_jacobian(p, &v.seed, &v.grid)),
        Claim::UnitaryLimit => per_point(&|p| verify::check_unitary_limit(p, &v.seed, &v.grid)),
        Claim::Coherence => per_point(&|p| verify::check_coherence(p, &v.seed, &v.grid)),
        Claim::Graph => {
            let opts = GraphOptions { upsilon: cfg.upsilon, ..GraphOptions::default() };
            per_point(&|p| {
                let margin = tropical::cone_margin(&v.seed, &p.lam);
                verify::check_graph_with(p, &v.seed, margin, cfg.eps, &v.grid, &opts)
            })
        }
    }
}

fn series(name: &str) -> Series {
    Series {
        name: name.into(),
        points: Vec::new(),
        fitted: Vec::new(),
        dropped: Vec::new(),
        fit: None,
        required_slope: None,
        pass: None,
    }
}

fn report(claim: &str, inputs: CheckInputs, grid: &SGrid, tolerance: f64, series: Vec<Series>) -> CheckReport {
    let verdicts: Vec<bool> = series.iter().filter_map(|s| s.pass).collect();
    CheckReport {
        claim: claim.into(),
        inputs,
        grid: grid.points.clone(),
        series,
        pass: if verdicts.is_empty() { None } else { Some(verdicts.iter().all(|b| *b)) },
        tolerance,
        notes: Vec::new(),
    }
}

fn xi_inputs(v: &Validated) -> CheckInputs {
    CheckInputs { n: 2, xi: v.xi.t.clone(), ..Default::default() }
}

fn volume(v: &Validated) -> CheckReport {
    let t = v.xi.t[0];
    let tol = v.config.tolerances.volume;
    let mut ser = series("volume_deviation");
    for &s in &v.grid.points {
        ser.points.push((s, (su2::cap_volume(-1.0, s, t) - su2::total_volume(t)).abs()));
    }
    ser.pass = Some(ser.points.iter().all(|p| p.1 <= tol));
    report("volume", xi_inputs(v), &v.grid, tol, vec![ser])
}

fn concentration(v: &Validated) -> Result<CheckReport, Error> {
    let t = v.xi.t[0];
    let cfg = &v.config;
    let eps = cfg.eps;
    let s0 = -(2.0 / eps).ln() / (2.0 * eps * t);
    let mut closed = series("fraction");
    let mut mc = series("monte_carlo");
    let mut mc_ok = true;
    for (i, &s) in v.grid.points.iter().enumerate() {
        let f = su2::concentration_fraction(eps, s, t)?;
        closed.points.push((s, f));
        let est = su2::concentration_mc(eps, s, t, cfg.samples, cfg.seed.wrapping_add(i as u64))?;
        mc_ok &= (est.value - f).abs() <= cfg.tolerances.monte_carlo;
        mc.points.push((s, est.value));
    }
    let deep: Vec<f64> = closed.points.iter().filter(|p| p.0 <= s0).map(|p| p.1).collect();
    closed.pass = (!deep.is_empty()).then(|| deep.iter().all(|f| *f >= 1.0 - eps));
    mc.pass = Some(mc_ok);
    let inputs = CheckInputs { eps: Some(eps), samples: Some(cfg.samples), rng_seed: Some(cfg.seed), ..xi_inputs(v) };
    let mut rep = report("concentration", inputs, &v.grid, cfg.tolerances.monte_carlo, vec![closed, mc]);
    rep.notes.push(format!("fraction >= 1 - eps is required for s <= {s0}"));
    Ok(rep)
}

fn dh(v: &Validated) -> Result<CheckReport, Error> {
    let t = v.xi.t[0];
    let cfg = &v.config;
    let mut ser = series("ks_distance");
    for (i, &s) in v.grid.points.iter().enumerate() {
        ser.points.push((s, su2::dh_ks_distance(s, t, cfg.samples, cfg.seed.wrapping_add(i as u64))?));
    }
    ser.pass = Some(ser.points.iter().all(|p| p.1 <= cfg.tolerances.ks));
    let inputs = CheckInputs { samples: Some(cfg.samples), rng_seed: Some(cfg.seed), ..xi_inputs(v) };
    Ok(report("dh", inputs, &v.grid, cfg.tolerances.ks, vec![ser]))
}

fn eta(v: &Validated, p: &dressing_core::cluster::ClusterPoint) -> Result<CheckReport, Error> {
    let tol = &v.config.tolerances;
    let t = -p.lam[0];
    let mut ser = series("eta");
    for &s in &v.grid.points {
        ser.points.push((s, su2::eta_coefficient(p, s)?));
    }
    let k = ser.points.len();
    let mut notes = Vec::new();
    if k >= 2 {
        let last = ser.points[k - 1].1;
        let cauchy = (last - ser.points[k - 2].1).abs();
        let vol = last * (2.0 * t) * (2.0 * PI);
        let rel = (vol - 4.0 * PI * t).abs() / (4.0 * PI * t);
        notes.push(format!("cauchy gap {cauchy:e}, limit volume {vol} (relative error {rel:e})"));
        ser.pass = Some(cauchy <= tol.cauchy && rel <= tol.eta_volume);
    }
    let inputs = CheckInputs {
        n: 2,
        lam: p.lam.clone(),
        phi: p.phi.clone(),
        cone_margin: Some(tropical::cone_margin(&v.seed, &p.lam)),
        ..Default::default()
    };
    let mut rep = report("eta", inputs, &v.grid, tol.cauchy, vec![ser]);
    rep.notes = notes;
    Ok(rep)
}
