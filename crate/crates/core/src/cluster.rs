//! Cluster seeds on G^{w₀,e}, the detropicalization map, Casimir coordinates, their Jacobian and
//! the implicit-graph solver.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::iwasawa::CartanPoint;
use crate::lie::{self, TriangularElement, UnitaryElement, WeylElement};
use crate::linalg::{self, real};
use crate::tropical::{MonomialSum, SymbolicTable};
use crate::{CMat, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct SeedData {
    pub n: usize,
    pub r: usize,
    pub m: usize,
    pub word: Vec<usize>,
    /// R in the order -r, ..., -1, 1, ..., m.
    pub r_index: Vec<i32>,
    /// S in increasing order.
    pub s_index: Vec<i32>,
    /// v_k per position of R.
    pub v: Vec<WeylElement>,
    /// Fundamental index i_k per position of R.
    pub fund: Vec<usize>,
    /// Closed-form inverse of the minor map plus compounds.
    pub table: SymbolicTable,
}

impl SeedData {
    pub fn r_pos(&self, k: i32) -> usize {
        self.r_index.iter().position(|&x| x == k).expect("index in R")
    }

    pub fn s_pos(&self, k: i32) -> Option<usize> {
        self.s_index.iter().position(|&x| x == k)
    }

    pub fn in_s(&self, k: i32) -> bool {
        self.s_pos(k).is_some()
    }

    /// φ spread over R, zero off S.
    pub fn phi_full(&self, p: &ClusterPoint) -> Vec<f64> {
        self.r_index
            .iter()
            .map(|&k| self.s_pos(k).map(|j| p.phi[j]).unwrap_or(0.0))
            .collect()
    }

    /// λ_{R⁻} in the order -r..-1.
    pub fn lam_minus(&self, p: &ClusterPoint) -> Vec<f64> {
        p.lam[..self.r].to_vec()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterPoint {
    /// λ indexed by R.
    pub lam: Vec<f64>,
    /// φ indexed by S, in [0, 2π).
    pub phi: Vec<f64>,
}

impl ClusterPoint {
    pub fn new(lam: Vec<f64>, phi: Vec<f64>) -> Self {
        let phi = phi.into_iter().map(linalg::wrap_angle).collect();
        Self { lam, phi }
    }

    pub fn with_lam_minus(&self, lm: &[f64]) -> Self {
        let mut lam = self.lam.clone();
        lam[..lm.len()].copy_from_slice(lm);
        Self { lam, phi: self.phi.clone() }
    }
}

fn mono(dim: usize, pairs: &[(usize, i32)]) -> MonomialSum {
    let mut a = vec![0; dim];
    for &(p, e) in pairs {
        a[p] += e;
    }
    MonomialSum::z_power(&a)
}

/// Entries of b as Laurent monomials in the cluster variables, for each supported word.
fn closed_form(n: usize, word: &[usize]) -> Result<Vec<Vec<MonomialSum>>> {
    match (n, word) {
        (2, [1]) => {
            // R = (-1, 1)
            let d = 2;
            Ok(vec![
                vec![mono(d, &[(1, 1)]), MonomialSum::zero(d)],
                vec![mono(d, &[(0, 1)]), mono(d, &[(1, -1)])],
            ])
        }
        (3, [1, 2, 1]) => {
            // R = (-2, -1, 1, 2, 3) at positions 0..4
            let d = 5;
            let z0 = MonomialSum::zero(d);
            Ok(vec![
                vec![mono(d, &[(4, 1)]), z0.clone(), z0.clone()],
                vec![mono(d, &[(2, 1)]), mono(d, &[(3, 1), (4, -1)]), z0.clone()],
                vec![
                    mono(d, &[(1, 1)]),
                    mono(d, &[(0, 1), (2, -1)]).add(&mono(d, &[(3, 1), (1, 1), (2, -1), (4, -1)])),
                    mono(d, &[(3, -1)]),
                ],
            ])
        }
        (3, [2, 1, 2]) => {
            let d = 5;
            let z0 = MonomialSum::zero(d);
            Ok(vec![
                vec![mono(d, &[(3, 1)]), z0.clone(), z0.clone()],
                vec![
                    mono(d, &[(0, 1), (3, 1), (2, -1)]).add(&mono(d, &[(4, 1), (1, 1), (2, -1)])),
                    mono(d, &[(4, 1), (3, -1)]),
                    z0.clone(),
                ],
                vec![mono(d, &[(1, 1)]), mono(d, &[(2, 1), (3, -1)]), mono(d, &[(4, -1)])],
            ])
        }
        _ => Err(Error::UnsupportedRank(n)),
    }
}

/// Seed for a reduced word of w₀ (simple indices 1-based).
pub fn build_seed(n: usize, word: &[usize]) -> Result<SeedData> {
    let cd = lie::CartanData::new(n)?;
    let w = WeylElement::from_word(n, word)?;
    let w0 = WeylElement::longest(n);
    if w.perm != w0.perm {
        return Err(Error::Invalid(format!("word {word:?} does not spell w0")));
    }
    let r = cd.r;
    let m = word.len();
    let mut r_index: Vec<i32> = (1..=r as i32).rev().map(|i| -i).collect();
    r_index.extend(1..=m as i32);
    let mut v = Vec::new();
    let mut fund = Vec::new();
    for &k in &r_index {
        if k < 0 {
            v.push(w0.clone());
            fund.push((-k) as usize);
        } else {
            let k = k as usize;
            // v_k = s_{i_m} ⋯ s_{i_{k+1}}, including k = 1; v_m = e
            let tail: Vec<usize> = word[k..].iter().rev().cloned().collect();
            v.push(WeylElement::from_word(n, &tail)?);
            fund.push(word[k - 1]);
        }
    }
    let mut s_index = Vec::new();
    for (pos, &k) in r_index.iter().enumerate() {
        let om = cd.fundamental_weight(fund[pos]);
        let moved = v[pos].act_on_weight(&om);
        if moved.iter().zip(&om).any(|(a, b)| (a - b).abs() > 1e-12) {
            s_index.push(k);
        }
    }
    s_index.sort_unstable();
    if s_index.len() != m || r_index.len() - s_index.len() != r {
        return Err(Error::Invalid(format!("seed counts |S| = {}, |R| = {}", s_index.len(), r_index.len())));
    }
    let table = SymbolicTable::from_entries(closed_form(n, word)?);
    Ok(SeedData { n, r, m, word: word.to_vec(), r_index, s_index, v, fund, table })
}

/// Default seed per rank: word (1) for SL(2), (1,2,1) for SL(3).
pub fn default_seed(n: usize) -> Result<SeedData> {
    match n {
        2 => build_seed(2, &[1]),
        3 => build_seed(3, &[1, 2, 1]),
        _ => Err(Error::UnsupportedRank(n)),
    }
}

/// (Δ_k(b)) over R, Δ_k = Δ_{v_k ω_{i_k}, ω_{i_k}}.
pub fn minors_map(b: &CMat, seed: &SeedData) -> Result<Vec<C64>> {
    let e = WeylElement::identity(seed.n);
    let mut out = Vec::with_capacity(seed.r_index.len());
    for (pos, &k) in seed.r_index.iter().enumerate() {
        let d = lie::generalized_minor(b, &seed.v[pos], &e, seed.fund[pos])?;
        if d.norm() < 1e-14 {
            return Err(Error::OffCell { index: k, value: d.norm() });
        }
        out.push(d);
    }
    Ok(out)
}

/// Cluster coordinates of a cell point: λ_k = log|Δ_k|/s, φ_k = -arg Δ_k on S.
pub fn coordinates_of(b: &CMat, s: f64, seed: &SeedData) -> Result<ClusterPoint> {
    if s == 0.0 {
        return Err(Error::ZeroScale);
    }
    let d = minors_map(b, seed)?;
    let mut lam = Vec::new();
    let mut phi = vec![0.0; seed.m];
    for (pos, &k) in seed.r_index.iter().enumerate() {
        lam.push(d[pos].norm().ln() / s);
        match seed.s_pos(k) {
            Some(j) => phi[j] = -d[pos].arg(),
            None => {
                if d[pos].re <= 0.0 || d[pos].im.abs() > 1e-10 * d[pos].norm() {
                    return Err(Error::Invalid(format!("minor {k} = {} is not real positive", d[pos])));
                }
            }
        }
    }
    Ok(ClusterPoint::new(lam, phi))
}

fn check_scale(s: f64) -> Result<()> {
    if s == 0.0 {
        return Err(Error::ZeroScale);
    }
    if s > 0.0 {
        return Err(Error::Invalid(format!("s = {s} must be negative")));
    }
    Ok(())
}

/// 𝔏_s(λ, φ) by the closed-form inverse of the seed.
pub fn detropicalize(p: &ClusterPoint, s: f64, seed: &SeedData) -> Result<TriangularElement> {
    check_scale(s)?;
    let b = seed.table.eval_entries(&p.lam, &seed.phi_full(p), s);
    if b.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::RangeExceeded("detropicalize".into()));
    }
    Ok(TriangularElement(b))
}

fn lower_positions(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..i {
            out.push((i, j));
        }
    }
    out
}

/// b from log-diagonal and (log-modulus, phase) of the strictly lower entries.
fn newton_matrix(n: usize, theta: &[f64]) -> CMat {
    let mut b = CMat::zeros(n, n);
    let mut acc = 0.0;
    for j in 0..n - 1 {
        b[(j, j)] = real(theta[j].exp());
        acc += theta[j];
    }
    b[(n - 1, n - 1)] = real((-acc).exp());
    for (q, &(i, j)) in lower_positions(n).iter().enumerate() {
        let base = n - 1 + 2 * q;
        b[(i, j)] = C64::from_polar(theta[base].exp(), theta[base + 1]);
    }
    b
}

fn newton_residual(theta: &[f64], log_targets: &[f64], phase_targets: &[f64], seed: &SeedData) -> Result<Vec<f64>> {
    let b = newton_matrix(seed.n, theta);
    let e = WeylElement::identity(seed.n);
    let mut res = Vec::with_capacity(theta.len());
    let mut phases = vec![0.0; seed.m];
    for (pos, &k) in seed.r_index.iter().enumerate() {
        let d = lie::minor_via_submatrix(&b, &seed.v[pos], &e, seed.fund[pos])?;
        if d.norm() == 0.0 || !d.norm().is_finite() {
            return Err(Error::NewtonDiverged { iterations: 0, residual: f64::INFINITY });
        }
        res.push(d.norm().ln() - log_targets[pos]);
        if let Some(j) = seed.s_pos(k) {
            phases[j] = linalg::angle_diff(d.arg(), phase_targets[j]);
        }
    }
    res.extend(phases);
    Ok(res)
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Damped Newton on the minors (log-modulus and phase residuals). Returns the solution and the
/// final residual.
fn newton_solve(
    theta0: Vec<f64>,
    log_targets: &[f64],
    phase_targets: &[f64],
    seed: &SeedData,
    max_iter: usize,
    tol: f64,
) -> Result<(Vec<f64>, f64)> {
    let dim = theta0.len();
    let mut theta = theta0;
    let mut res = newton_residual(&theta, log_targets, phase_targets, seed)?;
    let mut norm = inf_norm(&res);
    for it in 0..max_iter {
        if norm < tol {
            return Ok((theta, norm));
        }
        let h = 1e-7;
        let mut jac = DMatrix::<f64>::zeros(dim, dim);
        for c in 0..dim {
            let mut tp = theta.clone();
            let mut tm = theta.clone();
            tp[c] += h;
            tm[c] -= h;
            let rp = newton_residual(&tp, log_targets, phase_targets, seed)?;
            let rm = newton_residual(&tm, log_targets, phase_targets, seed)?;
            for r in 0..dim {
                let diff = if r >= seed.r_index.len() { linalg::angle_diff(rp[r], rm[r]) } else { rp[r] - rm[r] };
                jac[(r, c)] = diff / (2.0 * h);
            }
        }
        let rhs = -DVector::from_vec(res.clone());
        let step = jac.lu().solve(&rhs).ok_or(Error::NewtonDiverged { iterations: it, residual: norm })?;
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = theta.iter().zip(step.iter()).map(|(a, d)| a + t * d).collect();
            if let Ok(r) = newton_residual(&trial, log_targets, phase_targets, seed) {
                let nn = inf_norm(&r);
                if nn < norm {
                    theta = trial;
                    res = r;
                    norm = nn;
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-10 {
                return Err(Error::NewtonDiverged { iterations: it, residual: norm });
            }
        }
    }
    if norm < tol {
        Ok((theta, norm))
    } else {
        Err(Error::NewtonDiverged { iterations: max_iter, residual: norm })
    }
}

/// 𝔏_s(λ, φ) by damped Newton over the lower-triangular coordinates. Independent of the closed
/// form; used as its oracle. The targets are reached by a homotopy from the minors of a fixed
/// start point, with adaptive steps.
pub fn detropicalize_newton(p: &ClusterPoint, s: f64, seed: &SeedData) -> Result<TriangularElement> {
    check_scale(s)?;
    let n = seed.n;
    let dim = (n - 1) + n * (n - 1);
    let mut theta = vec![0.0; dim];
    for (q, _) in lower_positions(n).iter().enumerate() {
        theta[n - 1 + 2 * q + 1] = q as f64 + 0.5;
    }
    let b0 = newton_matrix(n, &theta);
    let e = WeylElement::identity(n);
    let mut log0 = Vec::new();
    let mut arg0 = vec![0.0; seed.m];
    for (pos, &k) in seed.r_index.iter().enumerate() {
        let d = lie::minor_via_submatrix(&b0, &seed.v[pos], &e, seed.fund[pos])?;
        log0.push(d.norm().ln());
        if let Some(j) = seed.s_pos(k) {
            arg0[j] = d.arg();
        }
    }
    let log_goal: Vec<f64> = p.lam.iter().map(|l| s * l).collect();
    let arg_step: Vec<f64> = p.phi.iter().zip(&arg0).map(|(f, a)| linalg::angle_diff(-f, *a)).collect();
    let targets = |tau: f64| -> (Vec<f64>, Vec<f64>) {
        let l = log0.iter().zip(&log_goal).map(|(a, b)| a + tau * (b - a)).collect();
        let a = arg0.iter().zip(&arg_step).map(|(a, d)| a + tau * d).collect();
        (l, a)
    };
    let mut tau: f64 = 0.0;
    let mut dtau: f64 = 0.125;
    while tau < 1.0 {
        let next = (tau + dtau).min(1.0);
        let (l, a) = targets(next);
        let tol = if next < 1.0 { 1e-8 } else { 1e-12 };
        match newton_solve(theta.clone(), &l, &a, seed, 60, tol) {
            Ok((t, _)) => {
                theta = t;
                tau = next;
                dtau = (dtau * 2.0).min(0.25);
            }
            Err(err) => {
                dtau *= 0.5;
                if dtau < 1e-4 {
                    return Err(err);
                }
            }
        }
    }
    Ok(TriangularElement(newton_matrix(n, &theta)))
}

/// G_i = log1p(R_i)/(2s) in the order -r..-1, where R_i is the subleading Casimir ratio.
fn casimir_correction(lam: &[f64], phi_full: &[f64], s: f64, seed: &SeedData) -> Result<Vec<f64>> {
    let mut g = vec![0.0; seed.r];
    for i in 1..=seed.r {
        let ratio = seed.table.subleading_ratio(i, lam, phi_full, s)?;
        g[seed.r - i] = ratio.ln_1p() / (2.0 * s);
    }
    Ok(g)
}

/// f_{-i} = (1/s)·log C_i(𝔏_s(p)) in the order -r..-1.
pub fn casimir_coords(p: &ClusterPoint, s: f64, seed: &SeedData) -> Result<Vec<f64>> {
    check_scale(s)?;
    let g = casimir_correction(&p.lam, &seed.phi_full(p), s, seed)?;
    Ok((0..seed.r).map(|j| p.lam[j] + g[j]).collect())
}

/// f - λ_{R⁻}, evaluated without cancellation.
pub fn casimir_deviation(p: &ClusterPoint, s: f64, seed: &SeedData) -> Result<Vec<f64>> {
    check_scale(s)?;
    casimir_correction(&p.lam, &seed.phi_full(p), s, seed)
}

/// Orbit splitting of 𝔏_s(p)·𝔏_s(p)* from the symbolic compounds, so that deep s does not
/// overflow the entries of b.
pub fn orbit_split_point(p: &ClusterPoint, s: f64, seed: &SeedData) -> Result<(CartanPoint, UnitaryElement)> {
    check_scale(s)?;
    let phi = seed.phi_full(p);
    let comps: Vec<_> = (1..seed.n).map(|l| seed.table.eval_level(l, &p.lam, &phi, s)).collect();
    crate::iwasawa::orbit_split_compounds(&comps, seed.n, 0.0, s)
}

pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone)]
pub struct Jacobian {
    /// r × (r + 2m): columns λ_R then φ_S.
    pub matrix: DMatrix<f64>,
    /// D_{λ_{R⁻}}F - I (r × r).
    pub deviation: DMatrix<f64>,
    /// Largest relative disagreement of the Richardson pair.
    pub pair_error: f64,
}

fn correction_at(x: &[f64], s: f64, seed: &SeedData) -> Result<Vec<f64>> {
    let nl = seed.r + seed.m;
    let lam = &x[..nl];
    let mut phi_full = vec![0.0; nl];
    for (j, &k) in seed.s_index.iter().enumerate() {
        phi_full[seed.r_pos(k)] = x[nl + j];
    }
    casimir_correction(lam, &phi_full, s, seed)
}

/// Central differences of G in every λ and φ direction with one Richardson step.
fn correction_jacobian(p: &ClusterPoint, s: f64, seed: &SeedData, cols: usize) -> Result<(DMatrix<f64>, f64)> {
    let mut x = p.lam.clone();
    x.extend(p.phi.iter());
    let g0 = correction_at(&x, s, seed)?;
    let r = seed.r;
    if g0.iter().all(|v| *v == 0.0) {
        return Err(Error::StepUnderflow(format!("subleading Casimir ratio underflows at s = {s}")));
    }
    let central = |c: usize, h: f64| -> Result<Vec<f64>> {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[c] += h;
        xm[c] -= h;
        let gp = correction_at(&xp, s, seed)?;
        let gm = correction_at(&xm, s, seed)?;
        Ok(gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * h)).collect())
    };
    let mut out = DMatrix::zeros(r, cols);
    let mut pair_error: f64 = 0.0;
    // natural derivative scale of G_i is |2s·G_i|
    let scale: Vec<f64> = g0.iter().map(|g| (2.0 * s * g).abs()).collect();
    for c in 0..cols {
        let d1 = central(c, FD_STEP)?;
        let d2 = central(c, FD_STEP / 2.0)?;
        for i in 0..r {
            let rich = (4.0 * d2[i] - d1[i]) / 3.0;
            out[(i, c)] = rich;
            let denom = rich.abs().max(scale[i]).max(f64::MIN_POSITIVE);
            pair_error = pair_error.max((d2[i] - d1[i]).abs() / denom);
        }
    }
    Ok((out, pair_error))
}

/// Finite-difference Jacobian of the Casimir coordinates (F = λ_{R⁻} + G).
pub fn jacobian_f(p: &ClusterPoint, s: f64, seed: &SeedData) -> Result<Jacobian> {
    check_scale(s)?;
    let r = seed.r;
    let cols = seed.r + 2 * seed.m;
    let (dg, pair_error) = correction_jacobian(p, s, seed, cols)?;
    if pair_error > 1e-6 {
        return Err(Error::StepUnderflow(format!("Richardson pair disagrees by {pair_error:e}")));
    }
    let mut matrix = dg.clone();
    for i in 0..r {
        matrix[(i, i)] += 1.0;
    }
    let deviation = dg.columns(0, r).into_owned();
    Ok(Jacobian { matrix, deviation, pair_error })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphOptions {
    /// Trust radius υ around the target.
    pub upsilon: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for GraphOptions {
    fn default() -> Self {
        Self { upsilon: 1.0, tol: 1e-13, max_iter: 60 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphSolution {
    pub lam_minus: Vec<f64>,
    /// λ*_{R⁻} - target, kept separately so that tiny offsets are not lost to rounding.
    pub offset: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Solves F(λ_{R⁻}, λ_{R⁺}, φ) = target for λ_{R⁻}, Newton on the offset from the target.
pub fn graph_solve(p: &ClusterPoint, target: &[f64], s: f64, seed: &SeedData) -> Result<GraphSolution> {
    graph_solve_with(p, target, s, seed, &GraphOptions::default())
}

pub fn graph_solve_with(p: &ClusterPoint, target: &[f64], s: f64, seed: &SeedData, opts: &GraphOptions) -> Result<GraphSolution> {
    check_scale(s)?;
    let r = seed.r;
    let resid = |x: &[f64]| -> Result<Vec<f64>> {
        let lm: Vec<f64> = target.iter().zip(x).map(|(t, d)| t + d).collect();
        let g = casimir_deviation(&p.with_lam_minus(&lm), s, seed)?;
        Ok(x.iter().zip(&g).map(|(a, b)| a + b).collect())
    };
    let mut x = vec![0.0; r];
    let mut res = resid(&x)?;
    let mut norm = inf_norm(&res);
    let mut it = 0;
    while it < opts.max_iter && norm > opts.tol {
        it += 1;
        let h = FD_STEP;
        let mut jac = DMatrix::<f64>::identity(r, r);
        for c in 0..r {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[c] += h;
            xm[c] -= h;
            let gp = resid(&xp)?;
            let gm = resid(&xm)?;
            for i in 0..r {
                jac[(i, c)] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        let step = jac
            .lu()
            .solve(&(-DVector::from_vec(res.clone())))
            .ok_or(Error::NewtonDiverged { iterations: it, residual: norm })?;
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, d)| a + t * d).collect();
            let rr = resid(&trial)?;
            let nn = inf_norm(&rr);
            if nn < norm || (nn <= norm && t == 1.0) {
                x = trial;
                res = rr;
                norm = nn;
                break;
            }
            t *= 0.5;
            if t < 1e-8 {
                // no further decrease available at this precision
                it = opts.max_iter;
                break;
            }
        }
        if inf_norm(&x) > opts.upsilon {
            return Err(Error::NewtonDiverged { iterations: it, residual: norm });
        }
    }
    if norm > 1e-9 {
        return Err(Error::NewtonDiverged { iterations: it, residual: norm });
    }
    let lam_minus = target.iter().zip(&x).map(|(t, d)| t + d).collect();
    Ok(GraphSolution { lam_minus, offset: x, residual: norm, iterations: it })
}

/// Poincaré–Miranda sign pattern of F - target on the faces of the ±ε box around the target.
pub fn box_sign_check(p: &ClusterPoint, target: &[f64], eps: f64, s: f64, seed: &SeedData) -> Result<()> {
    check_scale(s)?;
    let r = seed.r;
    let grid: Vec<f64> = if r == 1 { vec![0.0] } else { (0..5).map(|j| -eps + 2.0 * eps * j as f64 / 4.0).collect() };
    for face in 0..r {
        for (side, sign) in [("upper", 1.0), ("lower", -1.0)] {
            let mut offsets: Vec<Vec<f64>> = vec![vec![]];
            for c in 0..r {
                let choices: Vec<f64> = if c == face { vec![sign * eps] } else { grid.clone() };
                offsets = offsets
                    .into_iter()
                    .flat_map(|o| {
                        choices.iter().map(move |&v| {
                            let mut o2 = o.clone();
                            o2.push(v);
                            o2
                        })
                    })
                    .collect();
            }
            for off in offsets {
                let lm: Vec<f64> = target.iter().zip(&off).map(|(t, d)| t + d).collect();
                let g = casimir_deviation(&p.with_lam_minus(&lm), s, seed)?;
                let value = off[face] + g[face];
                if !(value * sign > 0.0) {
                    return Err(Error::BoxCheckFailed { face, side });
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn seeds() {
        let s2 = build_seed(2, &[1]).unwrap();
        assert_eq!(s2.r_index, vec![-1, 1]);
        assert_eq!(s2.s_index, vec![-1]);
        let s3 = build_seed(3, &[1, 2, 1]).unwrap();
        assert_eq!(s3.s_index, vec![-2, -1, 1]);
        // v_2 = s_1 fixes ω_2; Δ_2 = Δ_{ω_2,ω_2}, Δ_3 = Δ_{ω_1,ω_1}
        assert_eq!(s3.v[s3.r_pos(2)].perm, vec![1, 0, 2]);
        assert_eq!(s3.fund[s3.r_pos(2)], 2);
        assert_eq!(s3.fund[s3.r_pos(3)], 1);
        assert_eq!(s3.v[s3.r_pos(3)].perm, vec![0, 1, 2]);
        let alt = build_seed(3, &[2, 1, 2]).unwrap();
        assert_eq!(alt.s_index, vec![-2, -1, 1]);
        assert!(matches!(build_seed(3, &[1, 1, 2]), Err(Error::NonReducedWord(_))));
        assert!(build_seed(3, &[1, 2]).is_err());
    }

    #[test]
    fn minors_examples() {
        let seed = build_seed(3, &[1, 2, 1]).unwrap();
        let b = CMat::from_fn(3, 3, |i, j| real([[1.0, 0.0, 0.0], [2.0, 1.0, 0.0], [3.0, 4.0, 1.0]][i][j]));
        let d = minors_map(&b, &seed).unwrap();
        let mags: Vec<f64> = d.iter().map(|z| z.norm()).collect();
        assert_eq!(mags, vec![5.0, 3.0, 2.0, 1.0, 1.0]);
        assert!(matches!(minors_map(&CMat::identity(3, 3), &seed), Err(Error::OffCell { .. })));
    }

    #[test]
    fn su2_detropicalize_example() {
        let seed = build_seed(2, &[1]).unwrap();
        let p = ClusterPoint::new(vec![-2.0, 0.5], vec![std::f64::consts::FRAC_PI_2]);
        let b = detropicalize(&p, -1.0, &seed).unwrap();
        let m = b.matrix();
        assert!((m[(0, 0)].re - 0.606531).abs() < 1e-6);
        assert!((m[(1, 0)] - c(0.0, -7.389056)).norm() < 1e-6);
        assert!((m[(1, 1)].re - 0.5f64.exp()).abs() < 1e-15);
        assert_eq!(detropicalize(&p, 0.0, &seed).unwrap_err(), Error::ZeroScale);
    }

    #[test]
    fn su2_casimir_coords_examples() {
        let seed = build_seed(2, &[1]).unwrap();
        let p = ClusterPoint::new(vec![-1.0, 0.2], vec![0.0]);
        let f = casimir_coords(&p, -5.0, &seed).unwrap();
        let want = (10f64.exp() + 2f64.exp() + (-2f64).exp()).ln() / -10.0;
        assert!((f[0] - want).abs() < 1e-15);
        assert!((f[0] + 1.0000342).abs() < 1e-7);
        let q = ClusterPoint::new(vec![-0.7, 0.0], vec![0.0]);
        let s = -3.0;
        let f = casimir_coords(&q, s, &seed).unwrap();
        assert!((f[0] - (2.0 + (2.0 * s * -0.7f64).exp()).ln() / (2.0 * s)).abs() < 1e-14);
    }

    fn sl3_point() -> ClusterPoint {
        ClusterPoint::new(vec![-1.3, -0.6, 0.4, -0.2, 0.7], vec![0.3, 1.7, 4.0])
    }

    #[test]
    fn closed_form_inverts_minors() {
        for word in [[1, 2, 1], [2, 1, 2]] {
            let seed = build_seed(3, &word).unwrap();
            let p = sl3_point();
            for s in [-0.5, -1.0, -2.0] {
                let b = detropicalize(&p, s, &seed).unwrap();
                let q = coordinates_of(b.matrix(), s, &seed).unwrap();
                for (a, b) in p.lam.iter().zip(&q.lam) {
                    assert!((a - b).abs() < 1e-12, "{word:?} {a} {b}");
                }
                for (a, b) in p.phi.iter().zip(&q.phi) {
                    assert!(linalg::angle_diff(*a, *b).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn newton_agrees_with_closed_form() {
        let seed = build_seed(3, &[1, 2, 1]).unwrap();
        let p = sl3_point();
        let s = -0.8;
        let a = detropicalize(&p, s, &seed).unwrap();
        let b = detropicalize_newton(&p, s, &seed).unwrap();
        let d = linalg::max_abs(&(a.matrix() - b.matrix()));
        assert!(d < 1e-9 * linalg::max_abs(a.matrix()), "{d}");
        let seed2 = build_seed(2, &[1]).unwrap();
        let p2 = ClusterPoint::new(vec![-2.0, 0.5], vec![1.0]);
        let a = detropicalize(&p2, -1.0, &seed2).unwrap();
        let b = detropicalize_newton(&p2, -1.0, &seed2).unwrap();
        assert!(linalg::max_abs(&(a.matrix() - b.matrix())) < 1e-9);
    }

    #[test]
    fn jacobian_deviation_vanishes_deep() {
        let seed = build_seed(2, &[1]).unwrap();
        let p = ClusterPoint::new(vec![-1.0, 0.2], vec![0.4]);
        let j = jacobian_f(&p, -20.0, &seed).unwrap();
        assert!(j.deviation[(0, 0)].abs() <= 1e-10);
        assert_eq!(j.matrix.ncols(), 3);
    }

    #[test]
    fn graph_solve_recovers_target() {
        let seed = build_seed(2, &[1]).unwrap();
        let p = ClusterPoint::new(vec![-1.0, 0.2], vec![0.4]);
        let s = -10.0;
        let sol = graph_solve(&p, &[-1.0], s, &seed).unwrap();
        let q = p.with_lam_minus(&sol.lam_minus);
        let f = casimir_coords(&q, s, &seed).unwrap();
        assert!((f[0] + 1.0).abs() <= 1e-12);
        assert!((sol.lam_minus[0] + 1.0).abs() <= 1e-6);
        box_sign_check(&p, &[-1.0], 0.05, s, &seed).unwrap();
        let seed3 = default_seed(3).unwrap();
        let xi = crate::iwasawa::CartanPoint::new(vec![2.0, 0.5, -2.5]).unwrap();
        let p3 = crate::tropical::sample_leaf(&seed3, &xi, 0.3, 1, 4).unwrap().remove(0);
        let target = seed3.lam_minus(&p3);
        let sol = graph_solve(&p3, &target, -6.0, &seed3).unwrap();
        let f = casimir_coords(&p3.with_lam_minus(&sol.lam_minus), -6.0, &seed3).unwrap();
        assert!((f[0] - target[0]).abs() < 1e-12 && (f[1] - target[1]).abs() < 1e-12);
        box_sign_check(&p3, &target, 0.1, -6.0, &seed3).unwrap();
    }
}
