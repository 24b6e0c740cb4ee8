//! Iwasawa factorization G = AN₋K, dressing, the maps exp_E / log_E_inv, Casimirs, orbit
//! splitting and the torus moment map.
//!
//! Factorizations go through minors of row-normalized matrices (Cauchy–Binet) rather than a
//! Cholesky of g·g*, so entries of size e^{±300} stay representable and small entries keep
//! their relative accuracy.

use crate::error::{Error, Result};
use crate::lie::{GroupElement, TriangularElement, UnitaryElement};
use crate::linalg::{self, real, subsets};
use crate::{CMat, C64};

pub const EXP_GUARD: f64 = 700.0;
pub const GAP_TOL: f64 = 1e-9;

/// Real traceless diagonal, sorted non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct CartanPoint {
    pub t: Vec<f64>,
}

impl CartanPoint {
    pub fn new(t: Vec<f64>) -> Result<Self> {
        let sum: f64 = t.iter().sum();
        let scale = t.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        if sum.abs() > 1e-12 * scale {
            return Err(Error::Invalid(format!("trace {sum:e} is not zero")));
        }
        if t.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Invalid(format!("{t:?} is not sorted non-increasing")));
        }
        Ok(Self { t })
    }

    pub fn n(&self) -> usize {
        self.t.len()
    }

    pub fn min_gap(&self) -> f64 {
        self.t.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min)
    }

    pub fn is_regular(&self) -> bool {
        self.min_gap() > GAP_TOL
    }

    /// w₀·t (reversed order).
    pub fn reversed(&self) -> Vec<f64> {
        self.t.iter().rev().cloned().collect()
    }
}

/// Hermitian traceless matrix X = k·diag(t)·k*.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitPoint {
    pub x: CMat,
}

impl OrbitPoint {
    pub fn new(x: CMat) -> Result<Self> {
        let dev = linalg::frob(&(&x - x.adjoint()));
        if dev > 1e-10 * linalg::frob(&x).max(1.0) {
            return Err(Error::Invalid(format!("not Hermitian (|X - X*| = {dev:e})")));
        }
        Ok(Self { x })
    }

    pub fn from_split(k: &CMat, d: &[f64]) -> Self {
        let x = k * linalg::diag_real(d) * k.adjoint();
        Self { x: (&x + x.adjoint()) * real(0.5) }
    }

    /// Eigenvalues in non-increasing order.
    pub fn spectrum(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.x.clone().symmetric_eigen().eigenvalues.iter().cloned().collect();
        e.sort_by(|a, b| b.partial_cmp(a).unwrap());
        e
    }
}

fn range_check(m: &CMat, what: &str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::RangeExceeded(what.into()))
    }
}

/// Coefficients of the Plücker vector of rows 0..j of `g` over lexicographic j-subsets.
fn plucker_rows(g: &CMat, j: usize) -> Vec<C64> {
    let rows: Vec<usize> = (0..j).collect();
    subsets(g.ncols(), j).iter().map(|cols| linalg::minor(g, &rows, cols)).collect()
}

fn subset_index(n: usize, set: &[usize]) -> usize {
    subsets(n, set.len()).iter().position(|s| s == set).expect("subset")
}

/// Contraction ι_{conj(p)} q of an (l-1)-vector p into an l-vector q, both over lexicographic
/// subsets of 0..n. For unit Plücker vectors of nested subspaces this is the unit vector of the
/// bigger space orthogonal to the smaller one (up to the product of norms).
fn contract(n: usize, l: usize, p: &[C64], q: &[C64]) -> Vec<C64> {
    let small = subsets(n, l - 1);
    (0..n)
        .map(|m| {
            let mut acc = real(0.0);
            for (ki, k) in small.iter().enumerate() {
                if k.contains(&m) {
                    continue;
                }
                let above = k.iter().filter(|&&x| x > m).count();
                let sign = if above % 2 == 0 { 1.0 } else { -1.0 };
                let mut big = k.clone();
                big.push(m);
                big.sort_unstable();
                acc += p[ki].conj() * q[subset_index(n, &big)] * sign;
            }
            acc
        })
        .collect()
}

/// Raw Iwasawa factorization g = b·k of an invertible matrix (det need not be 1).
pub(crate) fn iwasawa_raw(g: &CMat) -> Result<(CMat, CMat)> {
    range_check(g, "iwasawa input")?;
    let n = g.nrows();
    let scales: Vec<f64> = (0..n).map(|i| g.row(i).iter().fold(0.0_f64, |m, z| m.max(z.norm()))).collect();
    if scales.contains(&0.0) {
        return Err(Error::CholeskyFailure("zero row".into()));
    }
    let gs = CMat::from_fn(n, n, |i, j| g[(i, j)] / scales[i]);
    let pl: Vec<Vec<C64>> = (0..=n).map(|j| plucker_rows(&gs, j)).collect();
    let dets: Vec<f64> = pl.iter().map(|p| p.iter().map(|z| z.norm_sqr()).sum()).collect();
    if dets.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
        return Err(Error::CholeskyFailure(format!("Gram minors {dets:?}")));
    }
    let mut b = CMat::zeros(n, n);
    let mut k = CMat::zeros(n, n);
    for j in 0..n {
        let norm = (dets[j] * dets[j + 1]).sqrt();
        b[(j, j)] = real((dets[j + 1] / dets[j]).sqrt() * scales[j]);
        for i in j + 1..n {
            let mut rows: Vec<usize> = (0..j).collect();
            rows.push(i);
            let cols = subsets(n, j + 1);
            let mut acc = real(0.0);
            for (ci, cs) in cols.iter().enumerate() {
                acc += linalg::minor(&gs, &rows, cs) * pl[j + 1][ci].conj();
            }
            b[(i, j)] = acc / norm * scales[i];
        }
        let u = contract(n, j + 1, &pl[j], &pl[j + 1]);
        for m in 0..n {
            k[(j, m)] = u[m] / norm;
        }
    }
    range_check(&b, "iwasawa factor")?;
    Ok((b, k))
}

/// g = b·k with b ∈ AN₋ (lower triangular, positive diagonal) and k ∈ SU(n).
pub fn iwasawa_factor(g: &GroupElement) -> Result<(TriangularElement, UnitaryElement)> {
    let (b, k) = iwasawa_raw(g.matrix())?;
    Ok((TriangularElement(b), UnitaryElement(k)))
}

/// Plain lower Cholesky factor of a positive definite matrix.
pub fn cholesky_lower(m: &CMat) -> Result<CMat> {
    m.clone()
        .cholesky()
        .map(|c| c.l())
        .ok_or_else(|| Error::CholeskyFailure("matrix is not numerically positive definite".into()))
}

/// Dressing action: the AN₋ factor of k·b.
pub fn dressing(k: &UnitaryElement, b: &TriangularElement) -> Result<TriangularElement> {
    let (bp, _) = iwasawa_raw(&(k.matrix() * b.matrix()))?;
    Ok(TriangularElement(bp))
}

/// Hermitian eigen-decomposition with eigenvalues sorted non-increasing.
fn hermitian_eigen(x: &CMat) -> (Vec<f64>, CMat) {
    let e = x.clone().symmetric_eigen();
    let n = x.nrows();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| e.eigenvalues[b].partial_cmp(&e.eigenvalues[a]).unwrap());
    let vals = idx.iter().map(|&i| e.eigenvalues[i]).collect();
    let vecs = CMat::from_fn(n, n, |r, c| e.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}

/// 𝔈_s(X): the AN₋ element b with b·b* = exp(2sX).
pub fn exp_e(s: f64, x: &OrbitPoint) -> Result<TriangularElement> {
    if s == 0.0 {
        return Err(Error::ZeroScale);
    }
    let (t, q) = hermitian_eigen(&x.x);
    let top = t.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if (2.0 * s * top).abs() > EXP_GUARD {
        return Err(Error::RangeExceeded(format!("|2 s t| = {} exceeds {EXP_GUARD}", (2.0 * s * top).abs())));
    }
    let g = CMat::from_fn(q.nrows(), q.ncols(), |i, j| q[(i, j)] * (s * t[j]).exp());
    let (b, _) = iwasawa_raw(&g)?;
    Ok(TriangularElement(b))
}

/// 𝔈_s⁻¹(b) = (1/2s)·log(b·b*).
pub fn log_e_inv(s: f64, b: &TriangularElement) -> Result<OrbitPoint> {
    if s == 0.0 {
        return Err(Error::ZeroScale);
    }
    // orbit_split assumes s < 0; for s > 0 the same X arises from -s and the inverse spectrum order
    match orbit_split_factor(b.matrix(), -s.abs()) {
        Ok((d, k)) => {
            let sign = if s < 0.0 { 1.0 } else { -1.0 };
            let dd: Vec<f64> = d.t.iter().map(|v| v * sign).collect();
            Ok(OrbitPoint::from_split(k.matrix(), &dd))
        }
        Err(Error::DegenerateSpectrum { .. }) => {
            let m = b.matrix() * b.matrix().adjoint();
            let (mu, q) = hermitian_eigen(&m);
            let d: Vec<f64> = mu.iter().map(|v| v.ln() / (2.0 * s)).collect();
            Ok(OrbitPoint::from_split(&q, &d))
        }
        Err(e) => Err(e),
    }
}

fn check_level(n: usize, i: usize) -> Result<()> {
    if i == 0 || i >= n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    Ok(())
}

/// C_i(b) = sqrt(Tr ∧^i(b b*)) = Frobenius norm of the i-th compound of b.
pub fn casimir(b: &TriangularElement, i: usize) -> Result<f64> {
    let n = b.n();
    check_level(n, i)?;
    let c = linalg::compound(b.matrix(), i);
    let scale = linalg::max_abs(&c);
    if !scale.is_finite() {
        return Err(Error::RangeExceeded("casimir".into()));
    }
    Ok(scale * linalg::frob(&(c / real(scale))))
}

/// C_i(b) from the elementary symmetric polynomial of the eigenvalues of b b*.
pub fn casimir_spectral(b: &TriangularElement, i: usize) -> Result<f64> {
    let n = b.n();
    check_level(n, i)?;
    let m = b.matrix() * b.matrix().adjoint();
    let (mu, _) = hermitian_eigen(&m);
    let e: f64 = subsets(n, i).iter().map(|s| s.iter().map(|&j| mu[j]).product::<f64>()).sum();
    Ok(e.sqrt())
}

/// Largest eigenpair of a 2×2 Hermitian matrix [[a, conj c],[c, d]] with known determinant.
/// Both components of the eigenvector keep relative accuracy.
fn top_eigen_2x2(a: f64, cc: C64, d: f64, det: f64) -> (f64, [C64; 2]) {
    let half = 0.5 * (a - d);
    let top = 0.5 * (a + d) + (half * half + cc.norm_sqr()).sqrt();
    let low = det / top;
    let c1 = [real(a - low), cc];
    let c2 = [cc.conj(), real(d - low)];
    let n1 = c1[0].norm_sqr() + c1[1].norm_sqr();
    let n2 = c2[0].norm_sqr() + c2[1].norm_sqr();
    let (v, nn) = if n1 >= n2 { (c1, n1) } else { (c2, n2) };
    let nn = nn.sqrt();
    (top, [v[0] / nn, v[1] / nn])
}

/// A compound matrix stored as `exp(offset) * matrix`.
#[derive(Debug, Clone)]
pub(crate) struct ScaledCompound {
    pub matrix: CMat,
    pub offset: f64,
}

/// Largest eigenpair of C·C* for a scaled compound C; returns (log eigenvalue, unit vector).
/// `log_det` is log|det C| and is only used for 2×2 blocks, where it avoids cancellation in
/// the small eigenvalue.
fn top_pair(c: &ScaledCompound, log_det: Option<f64>) -> Result<(f64, Vec<C64>)> {
    let scale = linalg::max_abs(&c.matrix);
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::RangeExceeded("compound scale".into()));
    }
    let cs = &c.matrix / real(scale);
    let a = &cs * cs.adjoint();
    let log_top_shift = 2.0 * (scale.ln() + c.offset);
    if a.nrows() == 2 {
        let det = match log_det {
            Some(l) => (2.0 * (l - 2.0 * c.offset - 2.0 * scale.ln())).exp(),
            None => (a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)]).re,
        };
        let (top, v) = top_eigen_2x2(a[(0, 0)].re, a[(1, 0)], a[(1, 1)].re, det);
        return Ok((top.ln() + log_top_shift, v.to_vec()));
    }
    let (vals, vecs) = hermitian_eigen(&a);
    Ok((vals[0].ln() + log_top_shift, vecs.column(0).iter().cloned().collect()))
}

/// Shared core of orbit splitting: compounds[l-1] is the l-th compound of b (standard basis,
/// lexicographic subsets) for l = 1..n-1; `log_det` is log|det b|.
pub(crate) fn orbit_split_compounds(compounds: &[ScaledCompound], n: usize, log_det: f64, s: f64) -> Result<(CartanPoint, UnitaryElement)> {
    if s >= 0.0 {
        return Err(Error::Invalid("orbit_split needs s < 0".into()));
    }
    let mut logs = vec![0.0];
    let mut pl: Vec<Vec<C64>> = vec![vec![real(1.0)]];
    for l in 1..n {
        let (lm, v) = top_pair(&compounds[l - 1], if n == 2 { Some(log_det) } else { None })?;
        logs.push(lm);
        pl.push(v);
    }
    logs.push(2.0 * log_det);
    pl.push(vec![real(1.0)]);
    // partial sums of 2s·D over the smallest entries
    let mut d = vec![0.0; n];
    for l in 1..=n {
        d[n - l] = (logs[l] - logs[l - 1]) / (2.0 * s);
    }
    let gap = d.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
    if !(gap > GAP_TOL) {
        return Err(Error::DegenerateSpectrum { gap });
    }
    let mut k = CMat::zeros(n, n);
    for l in 1..=n {
        let u = contract(n, l, &pl[l - 1], &pl[l]);
        let nn = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for m in 0..n {
            k[(m, n - l)] = u[m] / nn;
        }
    }
    fix_phases(&mut k);
    range_check(&k, "orbit_split")?;
    let sum: f64 = d.iter().sum();
    let mean = sum / n as f64;
    let d: Vec<f64> = d.iter().map(|v| v - mean).collect();
    Ok((CartanPoint { t: d }, UnitaryElement(k)))
}

/// Largest-modulus entry of each column but the last made real positive; the last column
/// absorbs det k = 1.
pub(crate) fn fix_phases(k: &mut CMat) {
    let n = k.nrows();
    for j in 0..n - 1 {
        let mut best = 0;
        for i in 1..n {
            if k[(i, j)].norm() > k[(best, j)].norm() {
                best = i;
            }
        }
        let z = k[(best, j)];
        let ph = z.conj() / z.norm();
        for i in 0..n {
            k[(i, j)] *= ph;
        }
    }
    let d = linalg::det(k);
    let ph = d.conj() / d.norm();
    for i in 0..n {
        k[(i, n - 1)] *= ph;
    }
}

/// Orbit splitting from the triangular factor: b b* = k·exp(2s·diag D)·k*.
pub fn orbit_split_factor(b: &CMat, s: f64) -> Result<(CartanPoint, UnitaryElement)> {
    let n = b.nrows();
    let comps: Vec<ScaledCompound> =
        (1..n).map(|l| ScaledCompound { matrix: linalg::compound(b, l), offset: 0.0 }).collect();
    let log_det = linalg::det(b).norm().ln();
    orbit_split_compounds(&comps, n, log_det, s)
}

/// Orbit splitting of a positive Hermitian matrix: M = k·exp(2s·diag D)·k*, D non-increasing.
pub fn orbit_split(m: &CMat, s: f64) -> Result<(CartanPoint, UnitaryElement)> {
    let b = cholesky_lower(m)?;
    orbit_split_factor(&b, s)
}

/// Ψ_s(k) = (1/s)·log of the diagonal of the AN₋ factor of k·exp(s·diag D).
pub fn moment_map(k: &UnitaryElement, d: &CartanPoint, s: f64) -> Result<Vec<f64>> {
    if s == 0.0 {
        return Err(Error::ZeroScale);
    }
    let km = k.matrix();
    let n = km.nrows();
    let mut lj = vec![0.0];
    for j in 1..=n {
        let rows: Vec<usize> = (0..j).collect();
        let terms: Vec<f64> = subsets(n, j)
            .iter()
            .map(|cols| {
                let m = linalg::minor(km, &rows, cols).norm_sqr();
                let dj: f64 = cols.iter().map(|&c| d.t[c]).sum();
                m.ln() + 2.0 * s * dj
            })
            .collect();
        lj.push(linalg::log_sum_exp(&terms));
    }
    let psi: Vec<f64> = (1..=n).map(|j| (lj[j] - lj[j - 1]) / (2.0 * s)).collect();
    if psi.iter().any(|v| !v.is_finite()) {
        return Err(Error::RangeExceeded("moment map".into()));
    }
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn r2() -> f64 {
        std::f64::consts::FRAC_1_SQRT_2
    }

    fn rot() -> CMat {
        CMat::from_row_slice(2, 2, &[real(r2()), real(r2()), real(-r2()), real(r2())])
    }

    #[test]
    fn factor_examples() {
        let g = GroupElement::new(CMat::from_row_slice(2, 2, &[real(1.0), real(1.0), real(0.0), real(1.0)])).unwrap();
        let (b, k) = iwasawa_factor(&g).unwrap();
        let bx = CMat::from_row_slice(2, 2, &[real(2f64.sqrt()), real(0.0), real(r2()), real(r2())]);
        assert!(linalg::frob(&(b.matrix() - bx)) < 1e-14);
        assert!(linalg::frob(&(k.matrix() - rot())) < 1e-15);
        let u = GroupElement::new(rot()).unwrap();
        let (b, k) = iwasawa_factor(&u).unwrap();
        assert!(linalg::dist_identity(b.matrix()) < 1e-15);
        assert!(linalg::frob(&(k.matrix() - rot())) < 1e-15);
    }

    #[test]
    fn exp_e_examples() {
        let x = OrbitPoint::new(linalg::diag_real(&[1.0, -1.0])).unwrap();
        let b = exp_e(-2.0, &x).unwrap();
        assert!((b.matrix()[(0, 0)].re - (-2f64).exp()).abs() < 1e-15);
        assert!((b.matrix()[(1, 1)].re - 2f64.exp()).abs() < 1e-14);
        let k = rot();
        let x = OrbitPoint::from_split(&k, &[1.0, -1.0]);
        let b = exp_e(-5.0, &x).unwrap();
        let want = 10f64.cosh().sqrt();
        assert!((b.matrix()[(0, 0)].re - want).abs() < 1e-12 * want);
        assert_eq!(exp_e(0.0, &x), Err(Error::ZeroScale));
        let big = OrbitPoint::new(linalg::diag_real(&[400.0, -400.0])).unwrap();
        assert!(matches!(exp_e(-1.0, &big), Err(Error::RangeExceeded(_))));
    }

    #[test]
    fn casimir_examples() {
        let b = TriangularElement::new(CMat::from_row_slice(2, 2, &[real(2.0), real(0.0), c(1.0, 1.0), real(0.5)])).unwrap();
        assert!((casimir(&b, 1).unwrap() - 2.5).abs() < 1e-15);
        assert!((casimir(&TriangularElement::identity(3), 2).unwrap() - 3f64.sqrt()).abs() < 1e-15);
        let (s, t) = (-3.0, 0.7);
        let d = TriangularElement::new(linalg::diag_real(&[(s * t as f64).exp(), (-s * t as f64).exp()])).unwrap();
        let want = ((2.0 * s * t as f64).exp() + (-2.0 * s * t as f64).exp()).sqrt();
        assert!((casimir(&d, 1).unwrap() - want).abs() < 1e-14 * want);
    }

    #[test]
    fn orbit_split_examples() {
        let m = linalg::diag_real(&[(-6f64).exp(), 6f64.exp()]);
        let (d, k) = orbit_split(&m, -3.0).unwrap();
        assert!((d.t[0] - 1.0).abs() < 1e-14 && (d.t[1] + 1.0).abs() < 1e-14);
        assert!(linalg::dist_identity(k.matrix()) < 1e-14);

        let b = CMat::from_row_slice(2, 2, &[real((-1f64).exp()), real(0.0), real(5f64.exp()), real(1f64.exp())]);
        let (d, k) = orbit_split_factor(&b, -5.0).unwrap();
        assert!((d.t[0] - 1.0000340).abs() < 1e-6);
        let k21 = k.matrix()[(1, 0)].norm();
        assert!((k21 - 2.478e-3).abs() < 1e-5);
        let back = k.matrix() * linalg::diag_real(&[(-10.0 * d.t[0]).exp(), (-10.0 * d.t[1]).exp()]) * k.matrix().adjoint();
        let m = &b * b.adjoint();
        assert!(linalg::frob(&(back - &m)) < 1e-12 * linalg::frob(&m));
        assert!(matches!(orbit_split(&CMat::identity(2, 2), -1.0), Err(Error::DegenerateSpectrum { .. })));
    }

    #[test]
    fn moment_map_examples() {
        let d = CartanPoint::new(vec![1.0, -1.0]).unwrap();
        let k = UnitaryElement::new(rot()).unwrap();
        let psi = moment_map(&k, &d, -5.0).unwrap();
        assert!((psi[0] + 0.9306853).abs() < 1e-7);
        assert!((psi[0] - (10f64.cosh().ln() / -10.0)).abs() < 1e-15);
        let id = UnitaryElement::identity(2);
        assert_eq!(moment_map(&id, &d, -3.0).unwrap(), vec![1.0, -1.0]);
        assert_eq!(moment_map(&id, &d, 0.0), Err(Error::ZeroScale));
    }
}
