//! Decay-rate fits and the claim engines that turn each asymptotic statement into a measured
//! series with a pass/fail verdict.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cluster::{self, ClusterPoint, SeedData};
use crate::error::{Error, Result};
use crate::iwasawa::{self, CartanPoint};
use crate::lie::UnitaryElement;
use crate::linalg::{self, c, real};
use crate::tropical;
use crate::{CMat, C64};

pub const DEFAULT_NOISE_FLOOR: f64 = 1e-13;
pub const MIN_FIT_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RangePolicy {
    /// Drop the point and record it.
    Skip,
    Fail,
}

/// Grid of negative scales, strictly decreasing, plus how its points enter a fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SGrid {
    pub points: Vec<f64>,
    pub on_range: RangePolicy,
    /// Fit only the deepest `window` resolvable points.
    pub window: Option<usize>,
    /// Values at or below this are treated as unresolved in engines that read them off k.
    pub noise_floor: f64,
}

impl SGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Invalid("empty s grid".into()));
        }
        if points.iter().any(|s| !(*s < 0.0) || !s.is_finite()) {
            return Err(Error::Invalid("s grid must be negative".into()));
        }
        if points.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::Invalid("s grid must be strictly decreasing".into()));
        }
        Ok(Self { points, on_range: RangePolicy::Skip, window: None, noise_floor: DEFAULT_NOISE_FLOOR })
    }

    /// {from, from - 1, ..., to} for integers from > to.
    pub fn integers(from: i32, to: i32) -> Result<Self> {
        Self::new((to..=from).rev().map(f64::from).collect())
    }

    /// {-1, ..., -40} fitted over its deepest ten resolvable points.
    pub fn deep() -> Self {
        let mut g = Self::integers(-1, -40).expect("valid grid");
        g.window = Some(10);
        g
    }

    pub fn with_window(mut self, w: Option<usize>) -> Self {
        self.window = w;
        self
    }

    pub fn with_policy(mut self, p: RangePolicy) -> Self {
        self.on_range = p;
        self
    }
}

impl Default for SGrid {
    fn default() -> Self {
        Self::integers(-1, -12).expect("valid grid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
}

/// Least-squares line through (s, log value).
pub fn fit_decay_rate(series: &[(f64, f64)]) -> Result<Fit> {
    if series.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints { needed: MIN_FIT_POINTS, got: series.len() });
    }
    if let Some(&(s, value)) = series.iter().find(|(_, v)| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::NonPositiveValue { s, value });
    }
    let xs: Vec<f64> = series.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = series.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept, max_residual) = linalg::line_fit(&xs, &ys);
    Ok(Fit { slope, intercept, max_residual })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub name: String,
    /// (s, value) for every grid point that produced a value.
    pub points: Vec<(f64, f64)>,
    /// Scales that entered the fit.
    pub fitted: Vec<f64>,
    /// Scales dropped with the reason.
    pub dropped: Vec<(f64, String)>,
    pub fit: Option<Fit>,
    pub required_slope: Option<f64>,
    pub pass: Option<bool>,
}

impl Series {
    fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            points: Vec::new(),
            fitted: Vec::new(),
            dropped: Vec::new(),
            fit: None,
            required_slope: None,
            pass: None,
        }
    }

    pub fn value_at(&self, s: f64) -> Option<f64> {
        self.points.iter().find(|p| p.0 == s).map(|p| p.1)
    }

    /// Fits the resolvable points (value above `floor`), optionally only the deepest window, and
    /// sets the verdict against `required` when `applicable`.
    fn close(&mut self, grid: &SGrid, floor: f64, required: f64, applicable: bool) {
        let mut usable: Vec<(f64, f64)> = Vec::new();
        for &(s, v) in &self.points {
            if v > floor && v.is_finite() {
                usable.push((s, v));
            } else {
                self.dropped.push((s, format!("value {v:e} at or below the floor {floor:e}")));
            }
        }
        if let Some(w) = grid.window {
            if usable.len() > w {
                usable = usable.split_off(usable.len() - w);
            }
        }
        self.fitted = usable.iter().map(|p| p.0).collect();
        self.required_slope = Some(required);
        match fit_decay_rate(&usable) {
            Ok(f) => {
                self.fit = Some(f);
                self.pass = applicable.then_some(f.slope >= required);
            }
            Err(_) => {
                self.pass = applicable.then_some(false);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct CheckInputs {
    pub n: usize,
    pub lam: Vec<f64>,
    pub phi: Vec<f64>,
    pub xi: Vec<f64>,
    pub cone_margin: Option<f64>,
    pub delta: Option<f64>,
    pub eps: Option<f64>,
    pub margin: Option<f64>,
    pub samples: Option<usize>,
    pub rng_seed: Option<u64>,
}

impl CheckInputs {
    fn of_point(p: &ClusterPoint, seed: &SeedData) -> Self {
        Self {
            n: seed.n,
            lam: p.lam.clone(),
            phi: p.phi.clone(),
            cone_margin: Some(tropical::cone_margin(seed, &p.lam)),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub claim: String,
    pub inputs: CheckInputs,
    pub grid: Vec<f64>,
    pub series: Vec<Series>,
    /// None when the claim does not apply to the inputs.
    pub pass: Option<bool>,
    pub tolerance: f64,
    pub notes: Vec<String>,
}

impl CheckReport {
    fn new(claim: &str, inputs: CheckInputs, grid: &SGrid, tolerance: f64) -> Self {
        Self {
            claim: claim.into(),
            inputs,
            grid: grid.points.clone(),
            series: Vec::new(),
            pass: None,
            tolerance,
            notes: Vec::new(),
        }
    }

    fn settle(&mut self) {
        let verdicts: Vec<bool> = self.series.iter().filter_map(|s| s.pass).collect();
        self.pass = if verdicts.is_empty() { None } else { Some(verdicts.iter().all(|v| *v)) };
    }

    /// Smallest fitted slope over the series.
    pub fn min_slope(&self) -> Option<f64> {
        self.series.iter().filter_map(|s| s.fit.map(|f| f.slope)).reduce(f64::min)
    }

    pub fn series(&self, name: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.name == name)
    }
}

/// Evaluates `f` at each grid point; per-point range failures follow the grid policy.
fn sweep<F>(grid: &SGrid, series: &mut [Series], mut f: F) -> Result<()>
where
    F: FnMut(f64) -> Result<Vec<f64>>,
{
    for &s in &grid.points {
        match f(s) {
            Ok(vals) => {
                for (ser, v) in series.iter_mut().zip(vals) {
                    ser.points.push((s, v));
                }
            }
            Err(e @ (Error::RangeExceeded(_) | Error::StepUnderflow(_))) => {
                if grid.on_range == RangePolicy::Fail {
                    return Err(e);
                }
                for ser in series.iter_mut() {
                    ser.dropped.push((s, e.to_string()));
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

/// Convergence of the Casimir coordinates to λ_{R⁻}: series |f_{-i} - λ_{-i}|.
pub fn check_casimir_limit(p: &ClusterPoint, seed: &SeedData, grid: &SGrid) -> Result<CheckReport> {
    let margin = tropical::cone_margin(seed, &p.lam);
    let required = 1.9 * margin;
    let mut rep = CheckReport::new("casimir-limit", CheckInputs::of_point(p, seed), grid, required);
    let mut series: Vec<Series> = (1..=seed.r).map(|i| Series::new(format!("f_err_{i}"))).collect();
    sweep(grid, &mut series, |s| {
        let g = cluster::casimir_deviation(p, s, seed)?;
        // g is ordered -r..-1; report i = 1..r
        Ok((1..=seed.r).map(|i| g[seed.r - i].abs()).collect())
    })?;
    let applicable = margin > 0.0;
    for (idx, ser) in series.iter_mut().enumerate() {
        ser.close(grid, 0.0, required, applicable);
        let i = idx + 1;
        if applicable && margin >= 0.8 {
            if let Some(v) = ser.value_at(-12.0) {
                let lam = p.lam[seed.r_pos(-(i as i32))];
                if v > 1e-6 * (1.0 + lam.abs()) {
                    ser.pass = Some(false);
                    rep.notes.push(format!("f_err_{i} at s = -12 is {v:e}"));
                }
            }
        }
    }
    if !applicable {
        rep.notes.push(format!("cone margin {margin} is not positive; not applicable"));
    }
    rep.series = series;
    rep.settle();
    Ok(rep)
}

/// Subleading Casimir terms relative to the leading one: series R_i.
pub fn check_subleading(p: &ClusterPoint, seed: &SeedData, grid: &SGrid) -> Result<CheckReport> {
    let margin = tropical::cone_margin(seed, &p.lam);
    let required = 2.0 * 0.95 * margin;
    let mut rep = CheckReport::new("subleading", CheckInputs::of_point(p, seed), grid, required);
    let phi = seed.phi_full(p);
    let mut series: Vec<Series> = (1..=seed.r).map(|i| Series::new(format!("subleading_{i}"))).collect();
    sweep(grid, &mut series, |s| (1..=seed.r).map(|i| seed.table.subleading_ratio(i, &p.lam, &phi, s)).collect())?;
    for ser in series.iter_mut() {
        ser.close(grid, 0.0, required, margin > 0.0);
    }
    rep.series = series;
    rep.settle();
    Ok(rep)
}

/// Deviation of D_{λ_{R⁻}}F from the identity (max-abs entry).
pub fn check_jacobian(p: &ClusterPoint, seed: &SeedData, grid: &SGrid) -> Result<CheckReport> {
    let margin = tropical::cone_margin(seed, &p.lam);
    let required = 0.95 * 2.0 * margin;
    let mut rep = CheckReport::new("jacobian", CheckInputs::of_point(p, seed), grid, required);
    let mut series = vec![Series::new("jacobian_deviation")];
    sweep(grid, &mut series, |s| {
        let j = cluster::jacobian_f(p, s, seed)?;
        Ok(vec![j.deviation.iter().fold(0.0_f64, |m, v| m.max(v.abs()))])
    })?;
    series[0].close(grid, 0.0, required, margin > 0.0);
    rep.series = series;
    rep.settle();
    Ok(rep)
}

/// Off-identity structure of the unitary part of 𝔏_s(p)𝔏_s(p)*: exterior minors, off-diagonal
/// entries, and the distance of k·D·k* to D.
pub fn check_unitary_limit(p: &ClusterPoint, seed: &SeedData, grid: &SGrid) -> Result<CheckReport> {
    let margin = tropical::cone_margin(seed, &p.lam);
    let required = 0.95 * margin;
    let mut rep = CheckReport::new("unitary-limit", CheckInputs::of_point(p, seed), grid, required);
    let mut series = vec![Series::new("exterior_minor"), Series::new("k_offdiag"), Series::new("orbit_distance")];
    let n = seed.n;
    sweep(grid, &mut series, |s| {
        let (d, k) = cluster::orbit_split_point(p, s, seed)?;
        Ok(unitary_measures(k.matrix(), &d.t, n).to_vec())
    })?;
    for ser in series.iter_mut() {
        ser.close(grid, grid.noise_floor, required, margin > 0.0);
    }
    rep.series = series;
    rep.settle();
    Ok(rep)
}

/// [max |Δ_{[l],J}(k)| over J ≠ [l], max off-diagonal |k_ij|, ‖k·D·k* - D‖_F].
pub fn unitary_measures(k: &CMat, d: &[f64], n: usize) -> [f64; 3] {
    let mut minor_max: f64 = 0.0;
    for l in 1..n {
        let rows: Vec<usize> = (0..l).collect();
        for cols in linalg::subsets(n, l) {
            if cols != rows {
                minor_max = minor_max.max(linalg::minor(k, &rows, &cols).norm());
            }
        }
    }
    let mut off: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                off = off.max(k[(i, j)].norm());
            }
        }
    }
    let dm = linalg::diag_real(d);
    let dist = linalg::frob(&(k * &dm * k.adjoint() - &dm));
    [minor_max, off, dist]
}

/// Same-exponent coherence: the off-diagonal decay of k is at least half the subleading Casimir
/// decay (the latter is a squared quantity), up to 0.05.
pub fn check_coherence(p: &ClusterPoint, seed: &SeedData, grid: &SGrid) -> Result<CheckReport> {
    let casimir = check_subleading(p, seed, grid)?;
    let unitary = check_unitary_limit(p, seed, grid)?;
    let mut rep = CheckReport::new("coherence", CheckInputs::of_point(p, seed), grid, 0.05);
    let a = casimir.min_slope();
    let b = unitary.series("k_offdiag").and_then(|s| s.fit).map(|f| f.slope);
    let mut ser = Series::new("slope_gap");
    if let (Some(a), Some(b)) = (a, b) {
        ser.points.push((0.0, b - (0.5 * a - 0.05)));
        ser.required_slope = Some(0.5 * a - 0.05);
        ser.pass = Some(b >= 0.5 * a - 0.05);
        rep.notes.push(format!("casimir slope {a}, off-diagonal slope {b}"));
    } else {
        ser.pass = Some(false);
        rep.notes.push("a slope could not be fitted".into());
    }
    rep.series = vec![ser];
    rep.settle();
    Ok(rep)
}

/// Haar-distributed element of SU(n) from the QR factorization of a complex Gaussian matrix.
pub fn haar_su(n: usize, rng: &mut impl rand::Rng) -> UnitaryElement {
    let g = DMatrix::<C64>::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re, im)
    });
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { real(1.0) };
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    let det = linalg::det(&q);
    let fix = det.conj() / det.norm();
    for i in 0..n {
        q[(i, n - 1)] *= fix;
    }
    UnitaryElement(q)
}

/// Big-cell membership with margin: |Δ_{[j], last j}(k)| ≥ margin for j = 1..n-1.
pub fn big_cell_member(k: &CMat, margin: f64) -> Result<()> {
    let n = k.nrows();
    for j in 1..n {
        let rows: Vec<usize> = (0..j).collect();
        let cols: Vec<usize> = (n - j..n).collect();
        let v = linalg::minor(k, &rows, &cols).norm();
        if v < margin {
            return Err(Error::SampleRejected(format!("antidiagonal minor {j} = {v} below {margin}")));
        }
    }
    Ok(())
}

/// Draws `count` Haar samples that pass the big-cell margin, redrawing rejected ones.
pub fn sample_big_cell(n: usize, margin: f64, count: usize, rng_seed: u64) -> Result<(Vec<UnitaryElement>, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut out = Vec::with_capacity(count);
    let mut rejected = 0;
    while out.len() < count {
        let k = haar_su(n, &mut rng);
        match big_cell_member(k.matrix(), margin) {
            Ok(()) => out.push(k),
            Err(Error::SampleRejected(_)) => {
                rejected += 1;
                if rejected > tropical::MAX_REJECTIONS {
                    return Err(Error::EmptyRegion(format!("big-cell margin {margin} rejects every draw")));
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok((out, rejected))
}

/// |s|·‖Ψ_s(kT) - w₀ξ‖ (max-abs norm).
pub fn scaled_moment_error(k: &UnitaryElement, xi: &CartanPoint, s: f64) -> Result<f64> {
    let psi = iwasawa::moment_map(k, xi, s)?;
    let w0 = xi.reversed();
    let err = psi.iter().zip(&w0).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(s.abs() * err)
}

/// Boundedness of the scaled moment-map error over given unitary points: sup over the points at
/// each s; bounded iff the deep-half max is at most 1.05 × the shallow-half max.
pub fn check_envelope_points(xi: &CartanPoint, ks: &[UnitaryElement], grid: &SGrid) -> Result<CheckReport> {
    let inputs = CheckInputs { n: xi.n(), xi: xi.t.clone(), samples: Some(ks.len()), ..Default::default() };
    let mut rep = CheckReport::new("envelope", inputs, grid, 1.05);
    let mut ser = Series::new("scaled_moment_error");
    for &s in &grid.points {
        let mut sup: f64 = 0.0;
        for k in ks {
            sup = sup.max(scaled_moment_error(k, xi, s)?);
        }
        ser.points.push((s, sup));
    }
    let half = ser.points.len() / 2;
    if half == 0 {
        return Err(Error::TooFewPoints { needed: 2, got: ser.points.len() });
    }
    let shallow = ser.points[..half].iter().fold(0.0_f64, |m, p| m.max(p.1));
    let deep = ser.points[half..].iter().fold(0.0_f64, |m, p| m.max(p.1));
    ser.pass = Some(deep <= 1.05 * shallow || deep == 0.0);
    rep.notes.push(format!("shallow-half max {shallow}, deep-half max {deep}"));
    rep.series = vec![ser];
    rep.settle();
    Ok(rep)
}

pub fn check_envelope(xi: &CartanPoint, margin: f64, grid: &SGrid, count: usize, rng_seed: u64) -> Result<CheckReport> {
    let (ks, rejected) = sample_big_cell(xi.n(), margin, count, rng_seed)?;
    let mut rep = check_envelope_points(xi, &ks, grid)?;
    rep.inputs.margin = Some(margin);
    rep.inputs.rng_seed = Some(rng_seed);
    rep.notes.push(format!("{rejected} draws rejected by the big-cell margin"));
    Ok(rep)
}

/// Implicit-graph existence and decay: box sign pattern per s, and the distance of the solved
/// λ*_{R⁻} from λ_{R⁻}(p).
pub fn check_graph(p: &ClusterPoint, seed: &SeedData, delta: f64, eps: f64, grid: &SGrid) -> Result<CheckReport> {
    check_graph_with(p, seed, delta, eps, grid, &cluster::GraphOptions::default())
}

pub fn check_graph_with(
    p: &ClusterPoint,
    seed: &SeedData,
    delta: f64,
    eps: f64,
    grid: &SGrid,
    opts: &cluster::GraphOptions,
) -> Result<CheckReport> {
    let mut inputs = CheckInputs::of_point(p, seed);
    inputs.delta = Some(delta);
    inputs.eps = Some(eps);
    let required = 1.9 * delta;
    let mut rep = CheckReport::new("graph", inputs, grid, required);
    let target = seed.lam_minus(p);
    let mut boxes = Series::new("box_sign");
    let mut dist = Series::new("solution_distance");
    let mut resid = Series::new("solve_residual");
    for &s in &grid.points {
        match cluster::box_sign_check(p, &target, eps, s, seed) {
            Ok(()) => boxes.points.push((s, 1.0)),
            Err(Error::BoxCheckFailed { face, side }) => {
                boxes.points.push((s, 0.0));
                rep.notes.push(format!("s = {s}: box face {face} ({side}) fails; s not deep enough"));
            }
            Err(e) => return Err(e),
        }
        match cluster::graph_solve_with(p, &target, s, seed, opts) {
            Ok(sol) => {
                dist.points.push((s, sol.offset.iter().fold(0.0_f64, |m, v| m.max(v.abs()))));
                resid.points.push((s, sol.residual));
            }
            Err(e @ Error::NewtonDiverged { .. }) => dist.dropped.push((s, e.to_string())),
            Err(e) => return Err(e),
        }
    }
    // threshold: shallowest s from which every deeper box check holds
    let mut threshold = None;
    for &(s, ok) in boxes.points.iter().rev() {
        if ok == 1.0 {
            threshold = Some(s);
        } else {
            break;
        }
    }
    match threshold {
        Some(t) => rep.notes.push(format!("box sign threshold s0 = {t}")),
        None => rep.notes.push("box sign check fails at the deepest s".into()),
    }
    boxes.pass = Some(threshold.is_some());
    let below: Vec<(f64, f64)> = match threshold {
        Some(t) => dist.points.iter().cloned().filter(|p| p.0 <= t).collect(),
        None => Vec::new(),
    };
    let mut dist_fit = Series { points: below, ..Series::new("solution_distance") };
    dist_fit.dropped = dist.dropped.clone();
    dist_fit.close(grid, 0.0, required, delta > 0.0);
    let worst = resid.points.iter().fold(0.0_f64, |m, p| m.max(p.1));
    resid.pass = Some(worst <= 1e-9);
    rep.series = vec![boxes, dist_fit, resid];
    rep.settle();
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::build_seed;

    fn sl2_p() -> ClusterPoint {
        ClusterPoint::new(vec![-1.0, 0.2], vec![0.0])
    }

    #[test]
    fn fit_examples() {
        let exact: Vec<(f64, f64)> = (1..=5).map(|k| (-(k as f64), (-2.0 * k as f64).exp())).collect();
        assert!((fit_decay_rate(&exact).unwrap().slope - 2.0).abs() < 1e-9);
        let scaled: Vec<(f64, f64)> = (1..=6).map(|k| (-(k as f64), 3.0 * (-1.2 * k as f64).exp())).collect();
        let f = fit_decay_rate(&scaled).unwrap();
        assert!((f.slope - 1.2).abs() < 1e-9 && (f.intercept - 3f64.ln()).abs() < 1e-9);
        let mix: Vec<(f64, f64)> = (2..=8).map(|k| {
            let s = -(k as f64);
            (s, (2.0 * s).exp() + (4.0 * s).exp())
        }).collect();
        // log of the mixture is 2s + log(1 + e^{2s}), which steepens the fit slightly above 2
        let m = fit_decay_rate(&mix).unwrap().slope;
        assert!((2.0..=2.01).contains(&m), "{m}");
        assert!(matches!(fit_decay_rate(&exact[..3]), Err(Error::TooFewPoints { .. })));
        assert!(matches!(fit_decay_rate(&[(-1.0, 1.0), (-2.0, 0.0), (-3.0, 1.0), (-4.0, 1.0)]), Err(Error::NonPositiveValue { .. })));
    }

    #[test]
    fn grid_validation() {
        assert!(SGrid::new(vec![-1.0, -1.0]).is_err());
        assert!(SGrid::new(vec![-1.0, 0.5]).is_err());
        assert_eq!(SGrid::default().points.len(), 12);
    }

    #[test]
    fn casimir_limit_su2() {
        let seed = build_seed(2, &[1]).unwrap();
        let rep = check_casimir_limit(&sl2_p(), &seed, &SGrid::default()).unwrap();
        assert_eq!(rep.pass, Some(true));
        let v = rep.series[0].value_at(-5.0).unwrap();
        assert!((v - 3.42e-5).abs() < 1e-7, "{v}");
        let boundary = ClusterPoint::new(vec![-1.0, -1.0], vec![0.0]);
        assert_eq!(check_casimir_limit(&boundary, &seed, &SGrid::default()).unwrap().pass, None);
    }

    #[test]
    fn unitary_limit_su2() {
        let seed = build_seed(2, &[1]).unwrap();
        let rep = check_unitary_limit(&sl2_p(), &seed, &SGrid::default()).unwrap();
        assert_eq!(rep.pass, Some(true), "{:?}", rep.series);
        let k21 = rep.series("k_offdiag").unwrap().value_at(-5.0).unwrap();
        assert!((k21 / 2.48e-3 - 1.0).abs() < 0.05, "{k21}");
    }

    #[test]
    fn envelope_fixed_point_and_equator() {
        let xi = CartanPoint::new(vec![1.0, -1.0]).unwrap();
        let w0 = UnitaryElement(CMat::from_row_slice(2, 2, &[real(0.0), real(-1.0), real(1.0), real(0.0)]));
        let grid = SGrid::integers(-2, -10).unwrap();
        let rep = check_envelope_points(&xi, &[w0], &grid).unwrap();
        assert!(rep.series[0].points.iter().all(|p| p.1 < 1e-12));
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let eq = UnitaryElement(CMat::from_row_slice(2, 2, &[real(r), real(r), real(-r), real(r)]));
        let rep = check_envelope_points(&xi, &[eq], &grid).unwrap();
        let v = rep.series[0].value_at(-10.0).unwrap();
        assert!((v - 2f64.ln() / 2.0).abs() < 1e-8);
        assert_eq!(rep.pass, Some(true));
    }

    #[test]
    fn graph_su2() {
        let seed = build_seed(2, &[1]).unwrap();
        let rep = check_graph(&sl2_p(), &seed, 0.8, 0.1, &SGrid::default()).unwrap();
        assert_eq!(rep.pass, Some(true), "{:?}", rep.notes);
    }
}
