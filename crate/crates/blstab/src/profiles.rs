//! Boundary-layer shear profiles `U(z)` and their heat-equation evolution.
//!
//! The admissible class: `U(0) = 0`, `U'(0) > 0`, strictly increasing, with
//! `U - U_+` and its first four derivatives decaying like `e^{-eta0 z}`.

use std::sync::Arc;

use libm::erf;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed-form or tabulated shear profile.
#[derive(Debug, Clone)]
pub enum ProfileKind {
    /// `U(z) = 1 - e^{-z}`.
    Exponential,
    /// `U(z) = erf(z / 2)`.
    Erf,
    /// Wall-bounded mixing layer `U = (tanh(b(z - z0)) + tanh(b z0)) / (1 + tanh(b z0))`.
    ///
    /// Monotone but inflected; Rayleigh-unstable for suitable `(b, z0)`. Used
    /// as the negative control and deliberately outside the admissible class.
    TanhShear { b: f64, z0: f64 },
    /// Non-monotone jet `U = c z e^{-z}`, failing the hypotheses on purpose.
    Jet,
    /// Two-column table `(z, U)` with natural cubic spline evaluation.
    Tabulated { z: Vec<f64>, u: Vec<f64>, spline: CubicSpline },
}

/// The base flow with evaluators for `U` and derivatives up to fourth order.
#[derive(Debug, Clone)]
pub struct ShearProfile {
    pub kind: ProfileKind,
    pub name: String,
    pub u_plus: f64,
    pub eta0: f64,
    /// Declared (not machine-checkable) real analyticity of the profile.
    pub analytic: bool,
}

pub type ProfileRef = Arc<ShearProfile>;

impl ShearProfile {
    pub fn exponential() -> ProfileRef {
        Arc::new(ShearProfile {
            kind: ProfileKind::Exponential,
            name: "exponential".into(),
            u_plus: 1.0,
            eta0: 0.9,
            analytic: true,
        })
    }

    pub fn erf_profile() -> ProfileRef {
        Arc::new(ShearProfile {
            kind: ProfileKind::Erf,
            name: "erf".into(),
            u_plus: 1.0,
            eta0: 0.9,
            analytic: true,
        })
    }

    pub fn tanh_shear(b: f64, z0: f64) -> ProfileRef {
        Arc::new(ShearProfile {
            kind: ProfileKind::TanhShear { b, z0 },
            name: format!("tanh-shear(b={b},z0={z0})"),
            u_plus: 1.0,
            eta0: 0.5,
            analytic: true,
        })
    }

    pub fn jet() -> ProfileRef {
        Arc::new(ShearProfile {
            kind: ProfileKind::Jet,
            name: "jet".into(),
            u_plus: 0.0,
            eta0: 0.5,
            analytic: true,
        })
    }

    pub fn tabulated(name: &str, z: Vec<f64>, u: Vec<f64>, eta0: f64, u_plus: f64) -> Result<ProfileRef> {
        if z.len() != u.len() || z.len() < 4 {
            return Err(Error::Config("tabulated profile needs >= 4 matching (z, U) rows".into()));
        }
        if z.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("tabulated profile z column must be strictly increasing".into()));
        }
        let spline = CubicSpline::fit(&z, &u);
        Ok(Arc::new(ShearProfile {
            kind: ProfileKind::Tabulated { z, u, spline },
            name: name.into(),
            u_plus,
            eta0,
            analytic: false,
        }))
    }

    /// k-th derivative of U, k = 0..=4.
    pub fn deriv(&self, k: usize, z: f64) -> f64 {
        match &self.kind {
            ProfileKind::Exponential => match k {
                0 => 1.0 - (-z).exp(),
                _ => {
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    sign * (-z).exp()
                }
            },
            ProfileKind::Erf => {
                // U = erf(z/2); U' = e^{-z^2/4}/sqrt(pi)
                let g = (-z * z / 4.0).exp() / std::f64::consts::PI.sqrt();
                match k {
                    0 => erf(z / 2.0),
                    1 => g,
                    2 => -0.5 * z * g,
                    3 => (0.25 * z * z - 0.5) * g,
                    4 => (0.75 * z - 0.125 * z * z * z) * g,
                    _ => unreachable!(),
                }
            }
            ProfileKind::TanhShear { b, z0 } => {
                let norm = 1.0 + (b * z0).tanh();
                let t = (b * (z - z0)).tanh();
                let sech2 = 1.0 - t * t;
                let v = match k {
                    0 => t + (b * z0).tanh(),
                    1 => b * sech2,
                    2 => -2.0 * b * b * t * sech2,
                    3 => b.powi(3) * sech2 * (6.0 * t * t - 2.0),
                    4 => b.powi(4) * sech2 * t * (16.0 - 24.0 * t * t),
                    _ => unreachable!(),
                };
                v / norm
            }
            ProfileKind::Jet => {
                let e = (-z).exp();
                match k {
                    0 => z * e,
                    1 => (1.0 - z) * e,
                    2 => (z - 2.0) * e,
                    3 => (3.0 - z) * e,
                    4 => (z - 4.0) * e,
                    _ => unreachable!(),
                }
            }
            ProfileKind::Tabulated { spline, .. } => spline.deriv(k, z),
        }
    }

    pub fn u(&self, z: f64) -> f64 {
        self.deriv(0, z)
    }

    pub fn d2u(&self, z: f64) -> f64 {
        self.deriv(2, z)
    }

    /// Forcing that holds the stationary layer in place: `f^P = -U''`.
    pub fn stationary_forcing(&self, z: f64) -> f64 {
        -self.deriv(2, z)
    }
}

/// Report of the quantitative admissibility checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub name: String,
    pub u_at_wall: f64,
    pub du_at_wall: f64,
    pub min_du: f64,
    pub min_du_at: f64,
    /// `sup_z |d^k (U - U_+)| e^{eta0 z}` for k = 0..=4.
    pub weighted_sup: [f64; 5],
    pub wall_ok: bool,
    pub slope_ok: bool,
    pub monotone_ok: bool,
    pub decay_ok: bool,
    pub pass: bool,
}

/// Check the quantitative profile hypotheses on a sample grid.
pub fn validate_profile(p: &ShearProfile, grid: &[f64], tol: f64) -> Result<ValidationReport> {
    if grid.is_empty() {
        return Err(Error::Usage("empty sample grid".into()));
    }
    if tol <= 0.0 {
        return Err(Error::Usage("tol must be positive".into()));
    }
    let mut min_du = f64::INFINITY;
    let mut min_du_at = 0.0;
    let mut weighted_sup = [0.0f64; 5];
    for &z in grid {
        for k in 0..=4 {
            let v = p.deriv(k, z);
            if !v.is_finite() {
                return Err(Error::Evaluation {
                    z,
                    msg: format!("derivative order {k} of profile '{}' is not finite", p.name),
                });
            }
            let base = if k == 0 { v - p.u_plus } else { v };
            let w = base.abs() * (p.eta0 * z).exp();
            if w > weighted_sup[k] {
                weighted_sup[k] = w;
            }
        }
        let du = p.deriv(1, z);
        if du < min_du {
            min_du = du;
            min_du_at = z;
        }
    }
    let u0 = p.u(0.0);
    let du0 = p.deriv(1, 0.0);
    let wall_ok = u0.abs() <= tol;
    let slope_ok = du0 > tol;
    let monotone_ok = min_du > 0.0;
    // decaying weighted sups must stay finite and of moderate size; the
    // sampled sup itself is the measured constant
    let decay_ok = weighted_sup.iter().all(|c| c.is_finite() && *c < 1e8);
    Ok(ValidationReport {
        name: p.name.clone(),
        u_at_wall: u0,
        du_at_wall: du0,
        min_du,
        min_du_at,
        weighted_sup,
        wall_ok,
        slope_ok,
        monotone_ok,
        decay_ok,
        pass: wall_ok && slope_ok && monotone_ok && decay_ok,
    })
}

/// Default sample grid for hypothesis checks: `[0, 40/eta0]`, uniformly spaced.
pub fn default_sample_grid(p: &ShearProfile, n: usize) -> Vec<f64> {
    let z_max = 40.0 / p.eta0;
    (0..n).map(|j| z_max * j as f64 / (n - 1) as f64).collect()
}

/// Half-line heat evolution of `U` with `U_s(s, 0) = 0` kept by odd extension.
///
/// Evaluated with Gauss-Hermite quadrature against the exact Gaussian kernel,
/// so there is no time-stepping error; `s` is the slow time `sqrt(nu) t`.
pub fn heat_evolve(p: &ShearProfile, s: f64, z: f64) -> Result<f64> {
    if s < 0.0 {
        return Err(Error::Domain(format!("heat evolution needs s >= 0, got {s}")));
    }
    if s == 0.0 {
        return Ok(p.u(z));
    }
    let width = (4.0 * s).sqrt();
    let (nodes, weights) = gauss_hermite_64();
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights.iter()) {
        let arg = z + width * x;
        let v = if arg >= 0.0 { p.u(arg) } else { -p.u(-arg) };
        acc += w * v;
    }
    Ok(acc / std::f64::consts::PI.sqrt())
}

/// Second z-derivative of the evolved profile.
///
/// Uses the heat equation itself: `dzz U_s = ds U_s`, evaluated by a symmetric
/// difference in the slow time. This sidesteps the kink the odd extension puts
/// into `U''` at the wall.
pub fn heat_evolve_d2(p: &ShearProfile, s: f64, z: f64) -> Result<f64> {
    if s < 0.0 {
        return Err(Error::Domain(format!("heat evolution needs s >= 0, got {s}")));
    }
    if s < 1e-6 {
        return Ok(p.d2u(z));
    }
    let h = (0.5 * s).min(1e-3);
    let up = heat_evolve(p, s + h, z)?;
    let dn = heat_evolve(p, s - h, z)?;
    Ok((up - dn) / (2.0 * h))
}

/// A profile together with its slow-time heat evolution.
#[derive(Debug, Clone)]
pub struct EvolvedProfile {
    pub base: ProfileRef,
    pub s: f64,
}

impl EvolvedProfile {
    pub fn new(base: ProfileRef, s: f64) -> Result<Self> {
        if s < 0.0 {
            return Err(Error::Domain("slow time must be nonnegative".into()));
        }
        Ok(EvolvedProfile { base, s })
    }

    pub fn u(&self, z: f64) -> f64 {
        heat_evolve(&self.base, self.s, z).expect("s validated at construction")
    }

    pub fn d2u(&self, z: f64) -> f64 {
        heat_evolve_d2(&self.base, self.s, z).expect("s validated at construction")
    }
}

/// 64-point Gauss-Hermite rule (weight `e^{-x^2}`), nodes/weights by Golub-Welsch
/// run once and cached.
fn gauss_hermite_64() -> &'static (Vec<f64>, Vec<f64>) {
    use std::sync::OnceLock;
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        // symmetric tridiagonal Jacobi matrix: off-diagonals sqrt(k/2)
        let n = 64usize;
        let mut diag = vec![0.0f64; n];
        let mut off: Vec<f64> = (1..n).map(|k| (k as f64 / 2.0).sqrt()).collect();
        // QL implicit-shift eigen decomposition, tracking first components
        let mut q0 = vec![0.0f64; n];
        q0[0] = 1.0;
        tql2_first_row(&mut diag, &mut off, &mut q0);
        let total = std::f64::consts::PI.sqrt();
        let mut pairs: Vec<(f64, f64)> = diag
            .iter()
            .zip(q0.iter())
            .map(|(&x, &q)| (x, total * q * q))
            .collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        (pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect())
    })
}

/// Symmetric tridiagonal eigensolve keeping only first eigenvector components.
pub(crate) fn tql2_first_row(d: &mut [f64], e: &mut Vec<f64>, q0: &mut [f64]) {
    let n = d.len();
    e.push(0.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter < 50, "tridiagonal eigensolve failed to converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0, 1.0);
            let mut p = 0.0;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = q0[i + 1];
                q0[i + 1] = s * q0[i] + c * f;
                q0[i] = c * q0[i] - s * f;
            }
            if r == 0.0 && m - l > 1 {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_passes_validation() {
        let p = ShearProfile::exponential();
        let grid = default_sample_grid(&p, 2000);
        let r = validate_profile(&p, &grid, 1e-8).unwrap();
        assert!(r.pass, "{r:?}");
        assert!((r.du_at_wall - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jet_fails_monotonicity_beyond_one() {
        let p = ShearProfile::jet();
        let grid: Vec<f64> = (0..500).map(|j| 5.0 * j as f64 / 499.0).collect();
        let r = validate_profile(&p, &grid, 1e-8).unwrap();
        assert!(!r.monotone_ok);
        assert!(!r.pass);
        assert!(r.min_du_at > 1.0, "U' = (1-z)e^-z first fails past z = 1, got {}", r.min_du_at);
    }

    #[test]
    fn erf_passes_with_measured_constants() {
        let p = ShearProfile::erf_profile();
        // dense sampling oracle
        let grid: Vec<f64> = (0..100_000).map(|j| 44.4 * j as f64 / 99_999.0).collect();
        let r = validate_profile(&p, &grid, 1e-8).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.weighted_sup.iter().all(|c| c.is_finite()));
    }

    #[test]
    fn erf_derivatives_match_symbolic() {
        // symbolic oracle: U'' = -(z/2) e^{-z^2/4}/sqrt(pi), forcing flips the sign
        let p = ShearProfile::erf_profile();
        for &z in &[0.0, 0.5, 1.3, 2.9] {
            let expect = z / (2.0 * std::f64::consts::PI.sqrt()) * (-z * z / 4.0).exp();
            assert!((p.stationary_forcing(z) - expect).abs() < 1e-14);
        }
        // finite-difference cross-check of third and fourth derivatives
        let h = 1e-5;
        for &z in &[0.4, 1.1, 2.2] {
            for k in 1..=4 {
                let fd = (p.deriv(k - 1, z + h) - p.deriv(k - 1, z - h)) / (2.0 * h);
                assert!(
                    (fd - p.deriv(k, z)).abs() < 1e-6,
                    "erf deriv {k} at {z}: fd {fd} vs {}",
                    p.deriv(k, z)
                );
            }
        }
    }

    #[test]
    fn exponential_forcing_closed_form() {
        let p = ShearProfile::exponential();
        for &z in &[0.0, 1.0, 3.5] {
            assert!((p.stationary_forcing(z) - (-z).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn heat_evolution_initial_condition_and_erf_closed_form() {
        let p = ShearProfile::erf_profile();
        for &z in &[0.0, 0.7, 2.0, 6.0] {
            assert!((heat_evolve(&p, 0.0, z).unwrap() - p.u(z)).abs() < 1e-15);
        }
        // odd-extension closed form: erf(z/2) evolves to erf(z / (2 sqrt(1+s)))
        for &s in &[0.1f64, 0.5, 2.0] {
            for &z in &[0.0, 0.4, 1.5, 4.0] {
                let exact = erf(z / (2.0 * (1.0 + s).sqrt()));
                let got = heat_evolve(&p, s, z).unwrap();
                assert!((got - exact).abs() < 1e-10, "s={s} z={z}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn heat_evolution_rejects_negative_time() {
        let p = ShearProfile::exponential();
        assert!(heat_evolve(&p, -0.1, 1.0).is_err());
    }

    #[test]
    fn heat_evolution_boundary_and_maximum_principle() {
        let p = ShearProfile::exponential();
        for &s in &[0.05, 0.3, 1.0, 4.0] {
            assert!(heat_evolve(&p, s, 0.0).unwrap().abs() < 1e-12);
            for &z in &[0.1, 1.0, 5.0, 20.0] {
                let v = heat_evolve(&p, s, z).unwrap();
                assert!((-1.0..=1.0).contains(&v), "s={s} z={z}: {v}");
            }
            // far field limit
            assert!((heat_evolve(&p, s, 35.0).unwrap() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn heat_evolution_linear_in_s_deviation() {
        // |U_s - U| <= 1.1 ||U''||_inf s for small s
        let p = ShearProfile::exponential();
        let d2_sup = 1.0; // |U''| = e^{-z} <= 1
        for &s in &[0.01, 0.05, 0.2] {
            let mut worst: f64 = 0.0;
            for j in 0..200 {
                let z = 20.0 * j as f64 / 199.0;
                let dev = (heat_evolve(&p, s, z).unwrap() - p.u(z)).abs();
                worst = worst.max(dev);
            }
            assert!(worst <= 1.1 * d2_sup * s, "s={s}: deviation {worst}");
        }
    }

    #[test]
    fn gauss_hermite_rule_integrates_polynomials() {
        let (x, w) = gauss_hermite_64();
        let m0: f64 = w.iter().sum();
        assert!((m0 - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        let m2: f64 = x.iter().zip(w).map(|(xi, wi)| xi * xi * wi).sum();
        assert!((m2 - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-11);
        let m10: f64 = x.iter().zip(w).map(|(xi, wi)| xi.powi(10) * wi).sum();
        assert!((m10 / (std::f64::consts::PI.sqrt() * 945.0 / 32.0) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn tabulated_profile_spline_tracks_closed_form() {
        let z: Vec<f64> = (0..400).map(|j| 30.0 * j as f64 / 399.0).collect();
        let u: Vec<f64> = z.iter().map(|&zz| 1.0 - (-zz).exp()).collect();
        let p = ShearProfile::tabulated("tab-exp", z, u, 0.9, 1.0).unwrap();
        for &zz in &[0.13, 1.9, 7.7] {
            assert!((p.u(zz) - (1.0 - (-zz).exp())).abs() < 1e-6);
            assert!((p.deriv(1, zz) - (-zz).exp()).abs() < 1e-4);
        }
    }
}

/// Cubic spline with clamped ends; the endpoint slopes are estimated from a
/// cubic fit through the outermost four samples, so a natural-boundary kink
/// never pollutes the wall region where the tables are used. Derivatives above
/// the spline's smoothness return the piecewise-polynomial values (zero for
/// the fourth), which is adequate for tabulated data.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>, // second derivatives at knots
}

/// Derivative at `at` of the cubic Lagrange interpolant through four samples.
fn cubic_end_slope(x: &[f64], y: &[f64], at: f64) -> f64 {
    let mut slope = 0.0;
    for i in 0..4 {
        let mut dl = 0.0;
        for j in 0..4 {
            if j == i {
                continue;
            }
            let mut term = 1.0 / (x[i] - x[j]);
            for k in 0..4 {
                if k != i && k != j {
                    term *= (at - x[k]) / (x[i] - x[k]);
                }
            }
            dl += term;
        }
        slope += y[i] * dl;
    }
    slope
}

impl CubicSpline {
    pub fn fit(x: &[f64], y: &[f64]) -> Self {
        let n = x.len();
        let mut a = vec![0.0; n];
        let mut b = vec![1.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            a[i] = h0 / 6.0;
            b[i] = (h0 + h1) / 3.0;
            c[i] = h1 / 6.0;
            d[i] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        }
        if n >= 4 {
            let s0 = cubic_end_slope(&x[..4], &y[..4], x[0]);
            let sn = cubic_end_slope(&x[n - 4..], &y[n - 4..], x[n - 1]);
            let h0 = x[1] - x[0];
            b[0] = h0 / 3.0;
            c[0] = h0 / 6.0;
            d[0] = (y[1] - y[0]) / h0 - s0;
            let hn = x[n - 1] - x[n - 2];
            a[n - 1] = hn / 6.0;
            b[n - 1] = hn / 3.0;
            d[n - 1] = sn - (y[n - 1] - y[n - 2]) / hn;
        }
        // Thomas algorithm
        let mut m = vec![0.0; n];
        let mut cp = vec![0.0; n];
        let mut dp = vec![0.0; n];
        cp[0] = c[0] / b[0];
        dp[0] = d[0] / b[0];
        for i in 1..n {
            let denom = b[i] - a[i] * cp[i - 1];
            cp[i] = c[i] / denom;
            dp[i] = (d[i] - a[i] * dp[i - 1]) / denom;
        }
        m[n - 1] = dp[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = dp[i] - cp[i] * m[i + 1];
        }
        CubicSpline {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
        }
    }

    fn segment(&self, z: f64) -> usize {
        match self.x.binary_search_by(|v| v.partial_cmp(&z).unwrap()) {
            Ok(i) => i.min(self.x.len() - 2),
            Err(i) => i.clamp(1, self.x.len() - 1) - 1,
        }
    }

    pub fn deriv(&self, k: usize, z: f64) -> f64 {
        let z = z.clamp(self.x[0], *self.x.last().unwrap());
        let i = self.segment(z);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - z) / h;
        let b = (z - self.x[i]) / h;
        match k {
            0 => {
                a * self.y[i]
                    + b * self.y[i + 1]
                    + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
            }
            1 => {
                (self.y[i + 1] - self.y[i]) / h
                    + ((3.0 * b * b - 1.0) * self.m[i + 1] - (3.0 * a * a - 1.0) * self.m[i]) * h / 6.0
            }
            2 => a * self.m[i] + b * self.m[i + 1],
            3 => (self.m[i + 1] - self.m[i]) / h,
            4 => 0.0,
            _ => unreachable!(),
        }
    }
}
