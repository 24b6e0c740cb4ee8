//! Type A Cartan/Weyl data, Weyl lifts, generalized minors and exterior powers.

use crate::error::{Error, Result};
use crate::linalg::{self, real, subsets};
use crate::{CMat, C64};

pub const TOL: f64 = 1e-10;

/// Cartan data of sl(n). Indices of simple roots and fundamental weights are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CartanData {
    pub n: usize,
    pub r: usize,
}

impl CartanData {
    pub fn new(n: usize) -> Result<Self> {
        if !(2..=3).contains(&n) {
            return Err(Error::UnsupportedRank(n));
        }
        Ok(Self { n, r: n - 1 })
    }

    /// Traceless diagonal of the fundamental weight ω_i.
    pub fn fundamental_weight(&self, i: usize) -> Vec<f64> {
        let shift = i as f64 / self.n as f64;
        (0..self.n).map(|j| if j < i { 1.0 - shift } else { -shift }).collect()
    }

    /// Diagonal of the simple coroot α_j^∨ = E_jj − E_{j+1,j+1}.
    pub fn simple_coroot(&self, j: usize) -> Vec<f64> {
        (0..self.n)
            .map(|a| {
                if a + 1 == j {
                    1.0
                } else if a == j {
                    -1.0
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Trace form restricted to real diagonals.
    pub fn pairing(x: &[f64], y: &[f64]) -> f64 {
        x.iter().zip(y).map(|(a, b)| a * b).sum()
    }

    /// Chevalley generator E_i as the elementary matrix at (i, i+1).
    pub fn chevalley_e(&self, i: usize) -> CMat {
        CMat::from_fn(self.n, self.n, |a, b| real(if a + 1 == i && b == i { 1.0 } else { 0.0 }))
    }

    pub fn chevalley_f(&self, i: usize) -> CMat {
        self.chevalley_e(i).transpose()
    }

    /// Column set {1..i} carrying ω_i, zero-based.
    pub fn weight_columns(&self, i: usize) -> Vec<usize> {
        (0..i).collect()
    }
}

/// Weyl group element of S_n; `perm[a]` is the image of `a` (zero-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeylElement {
    pub perm: Vec<usize>,
    pub word: Option<Vec<usize>>,
}

impl WeylElement {
    pub fn identity(n: usize) -> Self {
        Self { perm: (0..n).collect(), word: Some(vec![]) }
    }

    /// Product s_{i_1} ⋯ s_{i_k} of simple reflections (1-based indices).
    pub fn from_word(n: usize, word: &[usize]) -> Result<Self> {
        let mut perm: Vec<usize> = (0..n).collect();
        for &i in word.iter().rev() {
            if i == 0 || i >= n {
                return Err(Error::IndexOutOfRange { index: i, n });
            }
            for p in perm.iter_mut() {
                if *p == i - 1 {
                    *p = i;
                } else if *p == i {
                    *p = i - 1;
                }
            }
        }
        let w = Self { perm, word: Some(word.to_vec()) };
        if w.length() != word.len() {
            return Err(Error::NonReducedWord(word.to_vec()));
        }
        Ok(w)
    }

    pub fn from_perm(perm: Vec<usize>) -> Self {
        Self { perm, word: None }
    }

    pub fn longest(n: usize) -> Self {
        let perm: Vec<usize> = (0..n).rev().collect();
        let mut w = Self::from_perm(perm);
        w.word = Some(w.reduced_word());
        w
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    /// Number of inversions.
    pub fn length(&self) -> usize {
        let p = &self.perm;
        let mut k = 0;
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                if p[i] > p[j] {
                    k += 1;
                }
            }
        }
        k
    }

    pub fn apply(&self, a: usize) -> usize {
        self.perm[a]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.n()];
        for (a, &b) in self.perm.iter().enumerate() {
            inv[b] = a;
        }
        Self::from_perm(inv)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self::from_perm(other.perm.iter().map(|&a| self.perm[a]).collect())
    }

    /// A reduced word obtained by peeling right descents.
    pub fn reduced_word(&self) -> Vec<usize> {
        let mut p = self.perm.clone();
        let mut rev = Vec::new();
        loop {
            // right descent: p(i) > p(i+1); w = w' s_i with shorter w'
            match (0..p.len().saturating_sub(1)).find(|&i| p[i] > p[i + 1]) {
                Some(i) => {
                    p.swap(i, i + 1);
                    rev.push(i + 1);
                }
                None => break,
            }
        }
        rev.reverse();
        rev
    }

    pub fn word_or_reduced(&self) -> Vec<usize> {
        self.word.clone().unwrap_or_else(|| self.reduced_word())
    }

    /// Action on a weight written as a diagonal vector: (wμ)_{w(a)} = μ_a.
    pub fn act_on_weight(&self, mu: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; mu.len()];
        for (a, &x) in mu.iter().enumerate() {
            out[self.perm[a]] = x;
        }
        out
    }
}

/// Lift of a simple reflection: block [[0,-1],[1,0]] at (i, i+1).
fn simple_lift(n: usize, i: usize) -> CMat {
    let mut m = CMat::identity(n, n);
    m[(i - 1, i - 1)] = real(0.0);
    m[(i, i)] = real(0.0);
    m[(i - 1, i)] = real(-1.0);
    m[(i, i - 1)] = real(1.0);
    m
}

/// Signed permutation lift w̄ = s̄_{i_1} ⋯ s̄_{i_k} along a reduced word.
pub fn weyl_lift(w: &WeylElement) -> Result<CMat> {
    let n = w.n();
    let word = w.word_or_reduced();
    let check = WeylElement::from_word(n, &word)?;
    if check.perm != w.perm {
        return Err(Error::Invalid(format!("word {word:?} does not spell {:?}", w.perm)));
    }
    let mut m = CMat::identity(n, n);
    for &i in &word {
        m *= simple_lift(n, i);
    }
    Ok(m)
}

/// Signs σ_a with w̄ e_a = σ_a e_{w(a)}.
pub fn lift_signs(w: &WeylElement) -> Result<Vec<f64>> {
    let m = weyl_lift(w)?;
    Ok((0..w.n()).map(|a| m[(w.apply(a), a)].re).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement(pub(crate) CMat);

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryElement(pub(crate) CMat);

#[derive(Debug, Clone, PartialEq)]
pub struct TriangularElement(pub(crate) CMat);

fn hadamard_bound(g: &CMat) -> f64 {
    g.row_iter().map(|r| r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).product()
}

fn check_square(m: &CMat) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::Dimension(format!("{}x{} is not square", m.nrows(), m.ncols())));
    }
    Ok(())
}

impl GroupElement {
    /// Checks det = 1 relative to the Hadamard bound of the rows.
    pub fn new(m: CMat) -> Result<Self> {
        check_square(&m)?;
        let d = linalg::det(&m);
        let scale = hadamard_bound(&m).max(1.0);
        if !d.re.is_finite() || !d.im.is_finite() {
            return Err(Error::RangeExceeded("determinant".into()));
        }
        if (d - real(1.0)).norm() > TOL * scale {
            return Err(Error::Invalid(format!("det = {d} is not 1")));
        }
        Ok(Self(m))
    }
    pub fn matrix(&self) -> &CMat {
        &self.0
    }
    pub fn into_matrix(self) -> CMat {
        self.0
    }
    pub fn n(&self) -> usize {
        self.0.nrows()
    }
}

impl UnitaryElement {
    pub fn new(m: CMat) -> Result<Self> {
        check_square(&m)?;
        let n = m.nrows();
        let dev = linalg::frob(&(&m * m.adjoint() - CMat::identity(n, n)));
        if dev > TOL {
            return Err(Error::Invalid(format!("|kk* - I| = {dev:e}")));
        }
        let d = linalg::det(&m);
        if (d - real(1.0)).norm() > TOL {
            return Err(Error::Invalid(format!("det = {d} is not 1")));
        }
        Ok(Self(m))
    }
    pub fn identity(n: usize) -> Self {
        Self(CMat::identity(n, n))
    }
    pub fn matrix(&self) -> &CMat {
        &self.0
    }
    pub fn into_matrix(self) -> CMat {
        self.0
    }
    pub fn to_group(&self) -> GroupElement {
        GroupElement(self.0.clone())
    }
}

impl TriangularElement {
    pub fn new(m: CMat) -> Result<Self> {
        check_square(&m)?;
        let n = m.nrows();
        let mut d = 1.0;
        for i in 0..n {
            for j in i + 1..n {
                if m[(i, j)] != real(0.0) {
                    return Err(Error::Invalid(format!("entry ({i},{j}) above the diagonal")));
                }
            }
            let x = m[(i, i)];
            if x.im != 0.0 || x.re <= 0.0 || !x.re.is_finite() {
                return Err(Error::Invalid(format!("diagonal entry {i} = {x}")));
            }
            d *= x.re;
        }
        if (d - 1.0).abs() > TOL {
            return Err(Error::Invalid(format!("det = {d} is not 1")));
        }
        Ok(Self(m))
    }
    pub fn identity(n: usize) -> Self {
        Self(CMat::identity(n, n))
    }
    pub fn matrix(&self) -> &CMat {
        &self.0
    }
    pub fn into_matrix(self) -> CMat {
        self.0
    }
    pub fn n(&self) -> usize {
        self.0.nrows()
    }
    pub fn to_group(&self) -> GroupElement {
        GroupElement(self.0.clone())
    }
}

/// Gaussian decomposition g = n₋ · h · n with unit triangular factors.
#[derive(Debug, Clone)]
pub struct Gauss {
    pub lower: CMat,
    pub diag: Vec<C64>,
    pub upper: CMat,
}

pub fn gaussian_decompose(g: &GroupElement) -> Result<Gauss> {
    let g = &g.0;
    let n = g.nrows();
    let mut u = g.clone();
    let mut l = CMat::identity(n, n);
    let mut lead = real(1.0);
    for k in 0..n {
        let p = u[(k, k)];
        lead *= p;
        if lead.norm() <= 1e-12 {
            return Err(Error::NotInG0 { index: k + 1, value: lead.norm() });
        }
        for i in k + 1..n {
            let f = u[(i, k)] / p;
            l[(i, k)] = f;
            for j in k..n {
                let t = u[(k, j)];
                u[(i, j)] -= f * t;
            }
        }
    }
    let diag: Vec<C64> = (0..n).map(|k| u[(k, k)]).collect();
    let upper = CMat::from_fn(n, n, |i, j| if j >= i { u[(i, j)] / diag[i] } else { real(0.0) });
    Ok(Gauss { lower: l, diag, upper })
}

/// Leading principal i×i minor: product of Gaussian pivots when they exist, direct determinant otherwise.
fn leading_minor(x: &CMat, i: usize) -> C64 {
    let n = x.nrows();
    let mut u = x.clone();
    let mut lead = real(1.0);
    for k in 0..i {
        let p = u[(k, k)];
        if p.norm() < 1e-12 * linalg::max_abs(&u).max(1e-300) {
            let idx: Vec<usize> = (0..i).collect();
            return linalg::minor(x, &idx, &idx);
        }
        lead *= p;
        for r in k + 1..n {
            let f = u[(r, k)] / p;
            for j in k..n {
                let t = u[(k, j)];
                u[(r, j)] -= f * t;
            }
        }
    }
    lead
}

fn finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

fn check_minor_index(g: &CMat, i: usize) -> Result<()> {
    let n = g.nrows();
    if i == 0 || i > n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    Ok(())
}

/// Δ_{ω_i,ω_i}(w̄⁻¹ g v̄): leading i×i minor of the lifted matrix.
pub fn minor_via_lifts(g: &CMat, w: &WeylElement, v: &WeylElement, i: usize) -> Result<C64> {
    check_minor_index(g, i)?;
    let x = weyl_lift(w)?.transpose() * g * weyl_lift(v)?;
    Ok(leading_minor(&x, i))
}

/// Signed determinant of g[w({1..i}), v({1..i})]; the sign comes from the lift signs and the
/// sorting permutations, since (w̄⁻¹ g v̄)_{ab} = σ^w_a σ^v_b g_{w(a), v(b)}.
pub fn minor_via_submatrix(g: &CMat, w: &WeylElement, v: &WeylElement, i: usize) -> Result<C64> {
    check_minor_index(g, i)?;
    let (rs, cs, sign) = submatrix_selection(w, v, i)?;
    Ok(linalg::minor(g, &rs, &cs) * sign)
}

fn submatrix_selection(w: &WeylElement, v: &WeylElement, i: usize) -> Result<(Vec<usize>, Vec<usize>, f64)> {
    let rows: Vec<usize> = (0..i).map(|a| w.apply(a)).collect();
    let cols: Vec<usize> = (0..i).map(|a| v.apply(a)).collect();
    let sw = lift_signs(w)?;
    let sv = lift_signs(v)?;
    let mut sign = linalg::sort_sign(&rows) * linalg::sort_sign(&cols);
    for a in 0..i {
        sign *= sw[a] * sv[a];
    }
    let mut rs = rows;
    rs.sort_unstable();
    let mut cs = cols;
    cs.sort_unstable();
    Ok((rs, cs, sign))
}

/// Δ_{wω_i, vω_i}(g), computed by both routes; they must agree to 1e-10 relative to the
/// size of the selected submatrix.
pub fn generalized_minor(g: &CMat, w: &WeylElement, v: &WeylElement, i: usize) -> Result<C64> {
    let lifted = minor_via_lifts(g, w, v, i)?;
    let direct = minor_via_submatrix(g, w, v, i)?;
    if !finite(direct) || !finite(lifted) {
        return Err(Error::RangeExceeded("generalized minor".into()));
    }
    let (rs, cs, _) = submatrix_selection(w, v, i)?;
    let sub = CMat::from_fn(i, i, |a, b| g[(rs[a], cs[b])]);
    let scale = direct.norm().max(lifted.norm()).max(1e-3 * hadamard_bound(&sub));
    if (direct - lifted).norm() > TOL * scale {
        return Err(Error::MinorMismatch { lifted: format!("{lifted}"), direct: format!("{direct}") });
    }
    Ok(direct)
}

/// Δ_{w₀μ,μ}(g) = ∏ Δ_{w₀ω_i,ω_i}(g)^{c_i}.
pub fn minor_dominant(g: &CMat, coeffs: &[i64]) -> Result<C64> {
    let n = g.nrows();
    let w0 = WeylElement::longest(n);
    let e = WeylElement::identity(n);
    let mut out = real(1.0);
    for (idx, &c) in coeffs.iter().enumerate() {
        if c < 0 {
            return Err(Error::NegativeCoefficient(c));
        }
        if c == 0 {
            continue;
        }
        let d = generalized_minor(g, &w0, &e, idx + 1)?;
        out *= d.powi(c as i32);
    }
    Ok(out)
}

/// Matrix of ∧^l g in the reversed weight basis v_j = e_{n+1-j}, subsets in lexicographic order.
/// Row 0 is the minimal-weight vector v_{[l]}.
pub fn exterior_rep(g: &CMat, l: usize) -> Result<CMat> {
    let n = g.nrows();
    if l == 0 || l >= n {
        return Err(Error::LevelOutOfRange { level: l, n });
    }
    Ok(exterior_rep_unchecked(g, l))
}

pub(crate) fn reversed_subsets(n: usize, l: usize) -> Vec<Vec<usize>> {
    subsets(n, l)
        .into_iter()
        .map(|s| {
            let mut o: Vec<usize> = s.iter().map(|&j| n - 1 - j).collect();
            o.sort_unstable();
            o
        })
        .collect()
}

pub(crate) fn exterior_rep_unchecked(g: &CMat, l: usize) -> CMat {
    let subs = reversed_subsets(g.nrows(), l);
    let k = subs.len();
    CMat::from_fn(k, k, |a, b| linalg::minor(g, &subs[a], &subs[b]))
}
