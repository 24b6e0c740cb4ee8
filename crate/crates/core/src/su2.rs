//! Closed-form SU(2) geometry on the sphere K/T: density, volumes, moment coordinate,
//! concentration, and transport to and from the SL(2) cluster chart.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cluster::{self, ClusterPoint, SeedData};
use crate::error::{Error, Result};
use crate::linalg::{self, log_sum_exp};
use crate::tropical;

/// Point of the unit sphere in cylindrical coordinates. The polar angle θ is stored so that
/// points very close to the pole z = 1 keep their distance to it: 1 - z = 2 sin²(θ/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint {
    pub theta: f64,
    pub phi: f64,
}

impl SpherePoint {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::Invalid(format!("theta = {theta} outside [0, pi]")));
        }
        Ok(Self { theta, phi: linalg::wrap_angle(phi) })
    }

    pub fn from_z(z: f64, phi: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&z) {
            return Err(Error::Invalid(format!("z = {z} outside [-1, 1]")));
        }
        Self::new(z.acos(), phi)
    }

    pub fn z(&self) -> f64 {
        self.theta.cos()
    }

    /// (1 - z)/2 and (1 + z)/2 without cancellation.
    pub fn halves(&self) -> (f64, f64) {
        let h = 0.5 * self.theta;
        (h.sin().powi(2), h.cos().powi(2))
    }
}

fn halves_of_z(z: f64) -> (f64, f64) {
    (0.5 * (1.0 - z), 0.5 * (1.0 + z))
}

/// Density from lo = (1 - z)/2, hi = (1 + z)/2.
fn density_halves(lo: f64, hi: f64, s: f64, xi: f64) -> f64 {
    if s == 0.0 {
        return xi;
    }
    let a = 2.0 * s * xi;
    // sinh a / (2s (cosh a + z sinh a)), multiplied through by e^{-|a|}
    if a < 0.0 {
        (2.0 * a).exp_m1() / (2.0 * s * 2.0 * (hi * (2.0 * a).exp() + lo))
    } else {
        -(-2.0 * a).exp_m1() / (2.0 * s * 2.0 * (hi + lo * (-2.0 * a).exp()))
    }
}

/// Coefficient of ω^s_ξ = sinh(2sξ)/(2s(cosh 2sξ + z sinh 2sξ)) dz∧dφ; ξ at s = 0.
pub fn omega_density(z: f64, s: f64, xi: f64) -> f64 {
    let (lo, hi) = halves_of_z(z);
    density_halves(lo, hi, s, xi)
}

pub fn omega_density_at(p: &SpherePoint, s: f64, xi: f64) -> f64 {
    let (lo, hi) = p.halves();
    density_halves(lo, hi, s, xi)
}

/// log(cosh a + z sinh a) from the halves.
fn log_cosh_mix(lo: f64, hi: f64, a: f64) -> f64 {
    // cosh a + z sinh a = hi e^{a} + lo e^{-a}
    log_sum_exp(&[hi.ln() + a, lo.ln() - a])
}

fn psi_halves(lo: f64, hi: f64, s: f64, xi: f64) -> Result<f64> {
    if s == 0.0 {
        return Err(Error::ZeroScale);
    }
    let a = 2.0 * s * xi;
    Ok(log_cosh_mix(lo, hi, a) / (2.0 * s))
}

/// Ψ(z) = (1/2s)·log(cosh 2sξ + z sinh 2sξ).
pub fn moment_coordinate(z: f64, s: f64, xi: f64) -> Result<f64> {
    let (lo, hi) = halves_of_z(z);
    psi_halves(lo, hi, s, xi)
}

pub fn moment_coordinate_at(p: &SpherePoint, s: f64, xi: f64) -> Result<f64> {
    let (lo, hi) = p.halves();
    psi_halves(lo, hi, s, xi)
}

/// Volume of {z ≥ z₀}.
pub fn cap_volume(z0: f64, s: f64, xi: f64) -> f64 {
    if s == 0.0 {
        return TAU * xi * (1.0 - z0);
    }
    let psi = moment_coordinate(z0, s, xi).expect("s is nonzero");
    TAU * (xi - psi)
}

/// Volume of the band {-z₀ ≤ z ≤ z₀}.
pub fn band_volume(z0: f64, s: f64, xi: f64) -> f64 {
    cap_volume(-z0, s, xi) - cap_volume(z0, s, xi)
}

pub fn total_volume(xi: f64) -> f64 {
    2.0 * TAU * xi
}

/// Fraction of the volume in the cap {z ≥ 1 - ε}.
pub fn concentration_fraction(eps: f64, s: f64, xi: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 2.0) {
        return Err(Error::Invalid(format!("eps = {eps} outside (0, 2)")));
    }
    Ok(cap_volume(1.0 - eps, s, xi) / total_volume(xi))
}

/// Large-|s| expansion of the concentration fraction.
pub fn concentration_asymptote(eps: f64, s: f64, xi: f64) -> f64 {
    1.0 - (2.0 / eps).ln() / (4.0 * s.abs() * xi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_err: f64,
    pub samples: usize,
}

/// Monte Carlo concentration fraction: the complement {z < 1 - ε} is integrated with z uniform
/// there, where the density is bounded.
pub fn concentration_mc(eps: f64, s: f64, xi: f64, samples: usize, rng_seed: u64) -> Result<McEstimate> {
    if !(eps > 0.0 && eps < 2.0) {
        return Err(Error::Invalid(format!("eps = {eps} outside (0, 2)")));
    }
    if samples < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: samples });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let width = 2.0 - eps;
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..samples {
        let z = -1.0 + width * rng.random::<f64>();
        // φ is integrated exactly: the density does not depend on it
        let w = omega_density(z, s, xi) * width * TAU;
        sum += w;
        sq += w * w;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sq / n - mean * mean).max(0.0) * n / (n - 1.0);
    let total = total_volume(xi);
    Ok(McEstimate { value: 1.0 - mean / total, std_err: (var / n).sqrt() / total, samples })
}

/// Sampler for the normalized Liouville measure of ω^s_ξ, built from a numerically integrated
/// cumulative distribution in y = log(1 - z).
#[derive(Debug, Clone)]
pub struct LiouvilleSampler {
    ys: Vec<f64>,
    cdf: Vec<f64>,
    /// Numerical integral of the density over z ∈ [-1, 1].
    pub mass: f64,
}

/// Lower end of the y = log(1 - z) range: the density's transition sits near y = 4sξ, and the
/// mass below the cut is of order e^{y_min - 4sξ}.
pub fn y_min(s: f64, xi: f64) -> f64 {
    (4.0 * s * xi.abs() - 40.0).clamp(-700.0, -60.0)
}

/// The sampler's y range cannot reach the density's transition below this depth.
fn sampler_in_range(s: f64, xi: f64) -> Result<()> {
    if 4.0 * s * xi.abs() - 40.0 < -700.0 {
        return Err(Error::RangeExceeded(format!("Liouville sampler at s = {s}, xi = {xi} needs y below -700")));
    }
    Ok(())
}

impl LiouvilleSampler {
    pub fn new(s: f64, xi: f64, intervals: usize) -> Self {
        let pairs = intervals.max(2) / 2;
        let y_max = 2f64.ln();
        let y0 = y_min(s, xi);
        let h = (y_max - y0) / (2 * pairs) as f64;
        let g = |y: f64| {
            let lo = 0.5 * y.exp();
            let hi = 1.0 - lo;
            density_halves(lo, hi, s, xi) * y.exp()
        };
        let mut ys = vec![y0];
        let mut cdf = vec![0.0];
        let mut acc = 0.0;
        for k in 0..pairs {
            let y = y0 + 2.0 * k as f64 * h;
            acc += h / 3.0 * (g(y) + 4.0 * g(y + h) + g(y + 2.0 * h));
            ys.push(y + 2.0 * h);
            cdf.push(acc);
        }
        Self { ys, cdf, mass: acc }
    }

    /// Inverse of the cumulative distribution, u ∈ [0, 1].
    pub fn quantile(&self, u: f64) -> SpherePoint {
        let target = u * self.mass;
        let j = self.cdf.partition_point(|c| *c < target).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[j - 1], self.cdf[j]);
        let w = if c1 > c0 { (target - c0) / (c1 - c0) } else { 0.0 };
        let y = self.ys[j - 1] + w * (self.ys[j] - self.ys[j - 1]);
        // sin²(θ/2) = (1 - z)/2 = e^y/2
        let theta = 2.0 * (0.5 * y.exp()).sqrt().min(1.0).asin();
        SpherePoint { theta, phi: 0.0 }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> SpherePoint {
        let mut p = self.quantile(rng.random::<f64>());
        p.phi = rng.random_range(0.0..TAU);
        p
    }
}

/// Kolmogorov–Smirnov distance of a sample to the uniform law on [lo, hi].
pub fn ks_uniform(values: &mut [f64], lo: f64, hi: f64) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len() as f64;
    let mut d: f64 = 0.0;
    for (i, v) in values.iter().enumerate() {
        let f = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
        d = d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    d
}

/// KS distance of the Ψ-pushforward of Liouville samples to uniform[-ξ, ξ].
pub fn dh_ks_distance(s: f64, xi: f64, samples: usize, rng_seed: u64) -> Result<f64> {
    sampler_in_range(s, xi)?;
    let sampler = LiouvilleSampler::new(s, xi, 40_000);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut vals = Vec::with_capacity(samples);
    for _ in 0..samples {
        let p = sampler.sample(&mut rng);
        vals.push(moment_coordinate_at(&p, s, xi)?);
    }
    Ok(ks_uniform(&mut vals, -xi, xi))
}

fn sl2_seed() -> Result<SeedData> {
    cluster::build_seed(2, &[1])
}

/// Sphere point of 𝔈_s⁻¹(𝔏_s(p)) together with its orbit parameter t (ξ = diag(t, -t)).
pub fn transport_cluster_to_sphere(p: &ClusterPoint, s: f64) -> Result<(SpherePoint, f64)> {
    let seed = sl2_seed()?;
    let (d, k) = cluster::orbit_split_point(p, s, &seed)?;
    let k = k.matrix();
    let (k11, k21) = (k[(0, 0)], k[(1, 0)]);
    if k21.norm() == 0.0 || k11.norm() == 0.0 {
        return Err(Error::PoleSingular);
    }
    // X = k diag(t, -t) k*: z = X₁₁/t = 1 - 2|k₂₁|², arg X₂₁ = arg(k₂₁ conj k₁₁)
    let theta = 2.0 * k21.norm().atan2(k11.norm());
    let phi = (k21 * k11.conj()).arg();
    Ok((SpherePoint::new(theta, phi)?, d.t[0]))
}

/// Inverse transport: the cluster point whose image is `q` on the orbit of diag(t, -t).
pub fn transport_sphere_to_cluster(q: &SpherePoint, t: f64, s: f64) -> Result<ClusterPoint> {
    if s >= 0.0 {
        return Err(if s == 0.0 { Error::ZeroScale } else { Error::Invalid("s must be negative".into()) });
    }
    if !(t > 0.0) {
        return Err(Error::Invalid(format!("t = {t} must be positive")));
    }
    let (lo, hi) = q.halves();
    if lo == 0.0 || hi == 0.0 {
        return Err(Error::PoleSingular);
    }
    let x = 2.0 * s * t;
    // b₁₁² = cos²(θ/2) e^{2st} + sin²(θ/2) e^{-2st}
    let log_b11 = 0.5 * log_sum_exp(&[hi.ln() + x, lo.ln() - x]);
    // |b₂₁| = sin θ |sinh 2st| / b₁₁, arg b₂₁ = φ + π
    let log_sinh = x.abs() + (-(-2.0 * x.abs()).exp_m1()).ln() - 2f64.ln();
    let sin_theta = 2.0 * (lo * hi).sqrt();
    let log_b21 = sin_theta.ln() + log_sinh - log_b11;
    let lam1 = log_b11 / s;
    let lam_m1 = log_b21 / s;
    let phi_m1 = -(q.phi + PI);
    Ok(ClusterPoint::new(vec![lam_m1, lam1], vec![phi_m1]))
}

/// Map (λ₁, φ₋₁) ↦ (log θ, φ) at fixed λ₋₁, with the density factor at the base point.
fn chart_image(p: &ClusterPoint, s: f64) -> Result<(f64, f64, SpherePoint, f64)> {
    let (q, t) = transport_cluster_to_sphere(p, s)?;
    Ok((q.theta.ln(), q.phi, q, t))
}

/// Coefficient of the transported leaf form in (λ₁, φ₋₁) coordinates: ω^s_t(z)·sin θ times the
/// Jacobian determinant of (λ₁, φ₋₁) ↦ (θ, φ), by Richardson-extrapolated central differences.
pub fn eta_coefficient(p: &ClusterPoint, s: f64) -> Result<f64> {
    let (_, _, q0, t) = chart_image(p, s)?;
    let h = cluster::FD_STEP;
    let partials = |dir: usize, h: f64| -> Result<(f64, f64)> {
        let shift = |sign: f64| {
            let mut lam = p.lam.clone();
            let mut phi = p.phi.clone();
            if dir == 0 {
                lam[1] += sign * h;
            } else {
                phi[0] += sign * h;
            }
            ClusterPoint { lam, phi }
        };
        let (lp, fp, _, _) = chart_image(&shift(1.0), s)?;
        let (lm, fm, _, _) = chart_image(&shift(-1.0), s)?;
        Ok(((lp - lm) / (2.0 * h), linalg::angle_diff(fp, fm) / (2.0 * h)))
    };
    let mut cols = [[0.0; 2]; 2];
    let mut pair: f64 = 0.0;
    for dir in 0..2 {
        let (a1, b1) = partials(dir, h)?;
        let (a2, b2) = partials(dir, h / 2.0)?;
        let ra = (4.0 * a2 - a1) / 3.0;
        let rb = (4.0 * b2 - b1) / 3.0;
        pair = pair.max((a2 - a1).abs() / ra.abs().max(1.0)).max((b2 - b1).abs() / rb.abs().max(1.0));
        cols[dir] = [ra, rb];
    }
    if !pair.is_finite() || pair > 1e-4 {
        return Err(Error::StepUnderflow(format!("difference pair disagrees by {pair:e}")));
    }
    let det_log = cols[0][0] * cols[1][1] - cols[1][0] * cols[0][1];
    // dθ = θ d(log θ), dz = -sin θ dθ
    let jac = det_log * q0.theta * q0.theta.sin();
    let value = (omega_density_at(&q0, s, t) * jac).abs();
    if !value.is_finite() {
        return Err(Error::StepUnderflow("eta coefficient is not finite".into()));
    }
    Ok(value)
}

/// Liouville volume of the transported cone window {Φ̂ > δ} within the leaf of diag(ξ, -ξ),
/// by Monte Carlo with membership decided through the inverse transport.
pub fn cone_window_volume(xi: f64, delta: f64, s: f64, samples: usize, rng_seed: u64) -> Result<McEstimate> {
    sampler_in_range(s, xi)?;
    let seed = sl2_seed()?;
    let sampler = LiouvilleSampler::new(s, xi, 40_000);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut hits = 0usize;
    for _ in 0..samples {
        let q = sampler.sample(&mut rng);
        match transport_sphere_to_cluster(&q, xi, s) {
            Ok(p) => {
                if tropical::cone_margin(&seed, &p.lam) > delta {
                    hits += 1;
                }
            }
            Err(Error::PoleSingular) => {}
            Err(e) => return Err(e),
        }
    }
    let n = samples as f64;
    let frac = hits as f64 / n;
    let total = total_volume(xi);
    Ok(McEstimate { value: frac * total, std_err: (frac * (1.0 - frac) / n).sqrt() * total, samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_examples() {
        assert_eq!(omega_density(0.3, 0.0, 1.7), 1.7);
        assert!((omega_density(0.0, -1.0, 1.0) - 2f64.tanh() / 2.0).abs() < 1e-15);
        assert!((omega_density(0.0, -1.0, 1.0) - 0.4820138).abs() < 1e-7);
        assert!((omega_density(0.0, -1e-5, 1.0) - 1.0).abs() < 1e-8);
        // first-order term in s is -2sξ²z
        for z in [-0.9, 0.7] {
            let d = omega_density(z, -1e-5, 1.0) - 1.0;
            assert!((d - 2e-5 * z).abs() < 1e-8, "{d}");
        }
    }

    #[test]
    fn volumes() {
        for s in [0.0, -0.1, -5.0, -20.0] {
            assert!((cap_volume(-1.0, s, 1.0) - 4.0 * PI).abs() < 1e-9);
            assert_eq!(cap_volume(1.0, s, 1.0).abs(), 0.0);
        }
        let v = cap_volume(0.9, -10.0, 1.0);
        let want = PI / 10.0 * (20f64 + (0.05 * 20f64.exp() + 0.95 * (-20f64).exp()).ln());
        assert!((v - want).abs() < 1e-12, "{v} {want}");
    }

    #[test]
    fn moment_examples() {
        assert!((moment_coordinate(1.0, -3.0, 1.5).unwrap() - 1.5).abs() < 1e-15);
        assert!((moment_coordinate(-1.0, -3.0, 1.5).unwrap() + 1.5).abs() < 1e-15);
        let v = moment_coordinate(0.0, -5.0, 1.0).unwrap();
        assert!((v + 0.9306853).abs() < 1e-7);
        assert_eq!(moment_coordinate(0.0, 0.0, 1.0).unwrap_err(), Error::ZeroScale);
    }

    #[test]
    fn concentration_examples() {
        let f = concentration_fraction(0.1, -10.0, 1.0).unwrap();
        assert!((f - 0.9251067).abs() < 1e-7);
        assert!((concentration_fraction(0.1, 0.0, 1.0).unwrap() - 0.05).abs() < 1e-15);
        let f20 = concentration_fraction(0.1, -20.0, 1.0).unwrap();
        assert!((f20 - concentration_asymptote(0.1, -20.0, 1.0)).abs() <= 0.003);
        let mc = concentration_mc(0.1, -10.0, 1.0, 20_000, 3).unwrap();
        assert!((mc.value - f).abs() < 5.0 * mc.std_err + 1e-12);
    }

    #[test]
    fn sampler_mass_matches_total() {
        assert!(matches!(dh_ks_distance(-200.0, 1.0, 10, 1), Err(Error::RangeExceeded(_))));
        let s = LiouvilleSampler::new(-5.0, 1.0, 20_000);
        assert!((s.mass - 2.0).abs() < 1e-9);
        let q = s.quantile(0.5);
        assert!(moment_coordinate_at(&q, -5.0, 1.0).unwrap().abs() < 1e-6);
    }

    #[test]
    fn transport_example() {
        let p = ClusterPoint::new(vec![-1.0, 0.2], vec![0.0]);
        let (q, t) = transport_cluster_to_sphere(&p, -5.0).unwrap();
        let one_minus_z = 2.0 * (0.5 * q.theta).sin().powi(2);
        assert!((one_minus_z / 1.23e-5 - 1.0).abs() < 0.01, "{one_minus_z}");
        let back = transport_sphere_to_cluster(&q, t, -5.0).unwrap();
        for (a, b) in back.lam.iter().zip(&p.lam) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!(linalg::angle_diff(back.phi[0], p.phi[0]).abs() < 1e-8);
        // λ₁ is the moment coordinate
        let psi = moment_coordinate_at(&q, -5.0, t).unwrap();
        assert!((psi - 0.2).abs() < 1e-10);
    }

    #[test]
    fn eta_is_unit_deep() {
        let p = ClusterPoint::new(vec![-1.0, 0.0], vec![0.0]);
        let a = eta_coefficient(&p, -20.0).unwrap();
        let b = eta_coefficient(&p, -30.0).unwrap();
        assert!((a - b).abs() < 1e-4 && (a - 1.0).abs() < 1e-4, "{a} {b}");
    }
}
