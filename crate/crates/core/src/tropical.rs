//! Laurent-monomial bookkeeping in the cluster variables z_k = e^{sλ_k - iφ_k}, the dominance
//! margin Φ̂, leaves and leaf sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cluster::{ClusterPoint, SeedData};
use crate::error::{Error, Result};
use crate::iwasawa::{CartanPoint, ScaledCompound};
use crate::lie::CartanData;
use crate::linalg::{self, real, subsets};
use crate::{CMat, C64};

/// c · exp(s·(lam·λ) - i·(phase·φ)); both exponent vectors are indexed by the seed's R order.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff: C64,
    pub lam: Vec<i32>,
    pub phase: Vec<i32>,
}

impl Monomial {
    fn dot(a: &[i32], x: &[f64]) -> f64 {
        a.iter().zip(x).map(|(&k, v)| k as f64 * v).sum()
    }

    pub fn log_modulus(&self, lam: &[f64], s: f64) -> f64 {
        s * Self::dot(&self.lam, lam)
    }

    pub fn eval(&self, lam: &[f64], phi: &[f64], s: f64) -> C64 {
        self.eval_shifted(lam, phi, s, 0.0)
    }

    /// Value divided by e^{shift}.
    pub fn eval_shifted(&self, lam: &[f64], phi: &[f64], s: f64, shift: f64) -> C64 {
        let m = (s * Self::dot(&self.lam, lam) - shift).exp();
        let ph = -Self::dot(&self.phase, phi);
        self.coeff * C64::from_polar(m, ph)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonomialSum {
    pub dim: usize,
    pub terms: Vec<Monomial>,
}

impl MonomialSum {
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: vec![] }
    }

    pub fn constant(dim: usize, c: C64) -> Self {
        Self { dim, terms: vec![Monomial { coeff: c, lam: vec![0; dim], phase: vec![0; dim] }] }.combined()
    }

    /// The monomial ∏ z_k^{a_k}.
    pub fn z_power(a: &[i32]) -> Self {
        let dim = a.len();
        Self { dim, terms: vec![Monomial { coeff: real(1.0), lam: a.to_vec(), phase: a.to_vec() }] }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Merges like terms and drops zero coefficients.
    pub fn combined(mut self) -> Self {
        let mut out: Vec<Monomial> = Vec::new();
        for t in self.terms.drain(..) {
            match out.iter_mut().find(|o| o.lam == t.lam && o.phase == t.phase) {
                Some(o) => o.coeff += t.coeff,
                None => out.push(t),
            }
        }
        out.retain(|t| t.coeff.norm() > 1e-13);
        Self { dim: self.dim, terms: out }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self { dim: self.dim, terms }.combined()
    }

    pub fn scale(&self, c: C64) -> Self {
        let terms = self.terms.iter().map(|t| Monomial { coeff: t.coeff * c, ..t.clone() }).collect();
        Self { dim: self.dim, terms }.combined()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &other.terms {
                terms.push(Monomial {
                    coeff: a.coeff * b.coeff,
                    lam: a.lam.iter().zip(&b.lam).map(|(x, y)| x + y).collect(),
                    phase: a.phase.iter().zip(&b.phase).map(|(x, y)| x + y).collect(),
                });
            }
        }
        Self { dim: self.dim, terms }.combined()
    }

    /// |f|² as a sum over pairs: λ-exponents add, phase exponents subtract.
    pub fn modulus_squared(&self) -> Self {
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &self.terms {
                terms.push(Monomial {
                    coeff: a.coeff * b.coeff.conj(),
                    lam: a.lam.iter().zip(&b.lam).map(|(x, y)| x + y).collect(),
                    phase: a.phase.iter().zip(&b.phase).map(|(x, y)| x - y).collect(),
                });
            }
        }
        Self { dim: self.dim, terms }.combined()
    }

    pub fn eval(&self, lam: &[f64], phi: &[f64], s: f64) -> C64 {
        self.eval_shifted(lam, phi, s, 0.0)
    }

    pub fn eval_shifted(&self, lam: &[f64], phi: &[f64], s: f64, shift: f64) -> C64 {
        self.terms.iter().map(|t| t.eval_shifted(lam, phi, s, shift)).sum()
    }

    pub fn max_log_modulus(&self, lam: &[f64], s: f64) -> f64 {
        self.terms.iter().map(|t| t.log_modulus(lam, s)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn lam_exponents(&self) -> Vec<Vec<i32>> {
        self.terms.iter().map(|t| t.lam.clone()).collect()
    }
}

fn permutations(k: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out.into_iter().map(|p| {
        let s = linalg::sort_sign(&p);
        (p, s)
    }).collect()
}

/// Symbolic Leibniz minor of a table of MonomialSums.
fn symbolic_minor(b: &[Vec<MonomialSum>], rows: &[usize], cols: &[usize]) -> MonomialSum {
    let dim = b[0][0].dim;
    let mut acc = MonomialSum::zero(dim);
    for (p, sign) in permutations(rows.len()) {
        let mut term = MonomialSum::constant(dim, real(sign));
        for (a, &pa) in p.iter().enumerate() {
            term = term.mul(&b[rows[a]][cols[pa]]);
            if term.is_zero() {
                break;
            }
        }
        acc = acc.add(&term);
    }
    acc
}

/// Entries of b and of its compounds as Laurent polynomials in the cluster variables.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicTable {
    pub n: usize,
    /// levels[l-1][a][c]: l-th compound in the standard basis, lexicographic subsets.
    pub levels: Vec<Vec<Vec<MonomialSum>>>,
    /// C_l² for l = 1..n-1.
    pub casimir_sq: Vec<MonomialSum>,
}

impl SymbolicTable {
    pub fn from_entries(entries: Vec<Vec<MonomialSum>>) -> Self {
        let n = entries.len();
        let mut levels = Vec::new();
        for l in 1..n {
            let subs = subsets(n, l);
            let lv: Vec<Vec<MonomialSum>> = subs
                .iter()
                .map(|r| subs.iter().map(|c| symbolic_minor(&entries, r, c)).collect())
                .collect();
            levels.push(lv);
        }
        let casimir_sq = levels
            .iter()
            .map(|lv| {
                let dim = entries[0][0].dim;
                lv.iter().flatten().fold(MonomialSum::zero(dim), |acc, e| acc.add(&e.modulus_squared()))
            })
            .collect();
        Self { n, levels, casimir_sq }
    }

    pub fn entries(&self) -> &Vec<Vec<MonomialSum>> {
        &self.levels[0]
    }

    /// Index of the lowest-weight/highest-weight entry (rows n-l..n-1, columns 0..l-1).
    pub fn lead_index(&self, l: usize) -> (usize, usize) {
        (subsets(self.n, l).len() - 1, 0)
    }

    pub fn lead(&self, l: usize) -> &MonomialSum {
        let (a, c) = self.lead_index(l);
        &self.levels[l - 1][a][c]
    }

    pub fn eval_entries(&self, lam: &[f64], phi: &[f64], s: f64) -> CMat {
        let e = self.entries();
        CMat::from_fn(self.n, self.n, |i, j| e[i][j].eval(lam, phi, s))
    }

    /// Level-l compound evaluated as exp(offset)·matrix with the largest term of modulus ~1.
    pub(crate) fn eval_level(&self, l: usize, lam: &[f64], phi: &[f64], s: f64) -> ScaledCompound {
        let lv = &self.levels[l - 1];
        let offset = lv
            .iter()
            .flatten()
            .map(|e| e.max_log_modulus(lam, s))
            .fold(f64::NEG_INFINITY, f64::max);
        let k = lv.len();
        let matrix = CMat::from_fn(k, k, |a, c| lv[a][c].eval_shifted(lam, phi, s, offset));
        ScaledCompound { matrix, offset }
    }

    /// Σ over non-leading compound entries of |entry|²/|lead|² at level l.
    pub fn subleading_ratio(&self, l: usize, lam: &[f64], phi: &[f64], s: f64) -> Result<f64> {
        let lead = self.lead(l);
        if lead.terms.len() != 1 {
            return Err(Error::Invalid(format!("level {l} lead is not a monomial")));
        }
        let shift = lead.terms[0].log_modulus(lam, s);
        let lead_abs = lead.terms[0].coeff.norm();
        let (la, lc) = self.lead_index(l);
        let mut acc = 0.0;
        for (a, row) in self.levels[l - 1].iter().enumerate() {
            for (c, e) in row.iter().enumerate() {
                if (a, c) != (la, lc) {
                    acc += e.eval_shifted(lam, phi, s, shift).norm_sqr();
                }
            }
        }
        let r = acc / (lead_abs * lead_abs);
        if !r.is_finite() {
            return Err(Error::RangeExceeded("subleading ratio".into()));
        }
        Ok(r)
    }

    /// Non-leading λ-exponents of C_l² (the leading one is twice the lead monomial's).
    pub fn subleading_exponents(&self, l: usize) -> Vec<Vec<i32>> {
        let lead: Vec<i32> = self.lead(l).terms[0].lam.iter().map(|x| 2 * x).collect();
        let mut out: Vec<Vec<i32>> = Vec::new();
        for t in &self.casimir_sq[l - 1].terms {
            if t.lam != lead && !out.contains(&t.lam) {
                out.push(t.lam.clone());
            }
        }
        out
    }
}

pub fn symbolic_entries(seed: &SeedData) -> Result<SymbolicTable> {
    if seed.n > 3 {
        return Err(Error::UnsupportedRank(seed.n));
    }
    Ok(seed.table.clone())
}

/// Φ̂(λ) = min over i and non-leading exponents e of C_i² of (e·λ/2 - λ_{-i}).
pub fn cone_margin(seed: &SeedData, lam: &[f64]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 1..seed.n {
        let lm = lam[seed.r_pos(-(i as i32))];
        for e in seed.table.subleading_exponents(i) {
            let v = 0.5 * Monomial::dot(&e, lam) - lm;
            best = best.min(v);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeafSpec {
    pub xi: CartanPoint,
    /// λ_{-1}, ..., λ_{-r}
    pub lam_minus: Vec<f64>,
}

impl LeafSpec {
    /// Value of λ_{-i}.
    pub fn lam(&self, i: usize) -> f64 {
        self.lam_minus[i - 1]
    }
}

pub fn leaf_of(xi: &CartanPoint) -> Result<LeafSpec> {
    if !xi.is_regular() {
        return Err(Error::DegenerateSpectrum { gap: xi.min_gap() });
    }
    let n = xi.n();
    let cd = CartanData::new(n)?;
    let w0 = crate::lie::WeylElement::longest(n);
    let mut out = Vec::new();
    for i in 1..n {
        let by_sum: f64 = xi.t[n - i..].iter().sum();
        let weight = w0.act_on_weight(&cd.fundamental_weight(i));
        let by_pairing = CartanData::pairing(&weight, &xi.t);
        if (by_sum - by_pairing).abs() > 1e-12 * (1.0 + by_sum.abs()) {
            return Err(Error::Invalid(format!("leaf routes disagree: {by_sum} vs {by_pairing}")));
        }
        out.push(by_sum);
    }
    Ok(LeafSpec { xi: xi.clone(), lam_minus: out })
}

pub const MAX_REJECTIONS: usize = 200_000;

/// Uniform rejection sample of the δ-cone fiber over the leaf of ξ.
pub fn sample_leaf(seed: &SeedData, xi: &CartanPoint, delta: f64, count: usize, rng_seed: u64) -> Result<Vec<ClusterPoint>> {
    let leaf = leaf_of(xi)?;
    let bound = leaf.lam_minus.iter().fold(0.0_f64, |m, v| m.max(v.abs())) + 1.0;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut out = Vec::with_capacity(count);
    let mut misses = 0usize;
    while out.len() < count {
        let mut lam = vec![0.0; seed.r + seed.m];
        for i in 1..=seed.r {
            lam[seed.r_pos(-(i as i32))] = leaf.lam(i);
        }
        for k in 1..=seed.m {
            lam[seed.r_pos(k as i32)] = rng.random_range(-bound..bound);
        }
        let phi: Vec<f64> = (0..seed.m).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        if cone_margin(seed, &lam) > delta {
            out.push(ClusterPoint::new(lam, phi));
            misses = 0;
        } else {
            misses += 1;
            if misses >= MAX_REJECTIONS {
                return Err(Error::EmptyRegion(format!(
                    "no point with margin > {delta} over the leaf {:?} after {MAX_REJECTIONS} draws",
                    leaf.lam_minus
                )));
            }
        }
    }
    Ok(out)
}
