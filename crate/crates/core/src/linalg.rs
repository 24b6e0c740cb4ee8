//! Small dense helpers: subset enumeration, minors, compounds.

use crate::{CMat, C64};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// All `l`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, l: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(l);
    fn rec(start: usize, n: usize, l: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == l {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < l - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, l, cur, out);
            cur.pop();
        }
    }
    rec(0, n, l, &mut cur, &mut out);
    out
}

/// Sign of the permutation that sorts `seq` (entries distinct).
pub fn sort_sign(seq: &[usize]) -> f64 {
    let mut inv = 0;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Determinant of the submatrix `g[rows, cols]` (rows/cols taken in the given order).
pub fn minor(g: &CMat, rows: &[usize], cols: &[usize]) -> C64 {
    debug_assert_eq!(rows.len(), cols.len());
    let e = |i: usize, j: usize| g[(rows[i], cols[j])];
    match rows.len() {
        0 => real(1.0),
        1 => e(0, 0),
        2 => e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0),
        3 => {
            e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1))
                - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
                + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0))
        }
        k => CMat::from_fn(k, k, e).determinant(),
    }
}

pub fn det(g: &CMat) -> C64 {
    let idx: Vec<usize> = (0..g.nrows()).collect();
    minor(g, &idx, &idx)
}

/// l-th compound matrix in the standard basis, lexicographic subsets.
pub fn compound(g: &CMat, l: usize) -> CMat {
    let subs = subsets(g.nrows(), l);
    let k = subs.len();
    CMat::from_fn(k, k, |a, b| minor(g, &subs[a], &subs[b]))
}

pub fn adjoint(g: &CMat) -> CMat {
    g.adjoint()
}

pub fn max_abs(g: &CMat) -> f64 {
    g.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn frob(g: &CMat) -> f64 {
    g.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Frobenius distance to the identity.
pub fn dist_identity(g: &CMat) -> f64 {
    let n = g.nrows();
    frob(&(g - CMat::identity(n, n)))
}

pub fn diag_real(d: &[f64]) -> CMat {
    let n = d.len();
    CMat::from_fn(n, n, |i, j| if i == j { real(d[i]) } else { real(0.0) })
}

/// Stable `log(sum exp(x))` over a nonempty slice; `-inf` entries are allowed.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Least-squares line `y = a x + b`; returns (a, b, max |residual|).
pub fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let a = sxy / sxx;
    let b = my - a * mx;
    let r = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - a * x - b).abs())
        .fold(0.0, f64::max);
    (a, b, r)
}

pub fn wrap_angle(x: f64) -> f64 {
    let t = std::f64::consts::TAU;
    let r = x.rem_euclid(t);
    if r >= t {
        0.0
    } else {
        r
    }
}

/// Signed difference of two angles folded into (-pi, pi].
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let mut d = (a - b).rem_euclid(2.0 * pi);
    if d > pi {
        d -= 2.0 * pi;
    }
    d
}
