//! Inviscid (Rayleigh) and viscous (Orr-Sommerfeld) stability eigenproblems
//! for a shear flow over a wall, plus growth-rate scans, neutral-curve
//! tracing, and growing-mode construction.
//!
//! The viscous problem is posed in vorticity form,
//! `lambda w = sqrt(nu) Dalpha w - i alpha U w + i alpha U'' phi`,
//! `Dalpha phi = w`, `phi(0) = phi'(0) = 0`, decay upward. Discretely the
//! stream function is slaved to the interior vorticity through the double
//! Dirichlet solve, `phi'(0) = 0` becomes one linear constraint row, and the
//! wall vorticity is a free unknown with no evolution row; the resulting
//! pencil has a single infinite eigenvalue which a shift-inverted dense solve
//! handles without a generalized eigensolver. Only second derivatives appear,
//! so the matrices stay far better conditioned than the fourth-order
//! stream-function form.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Inverse, Solve};
use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{log_log_fit, LinFit};
use crate::grid::{apply_real, GridFunction, GridRef, ModeFamily};
use crate::profiles::ShearProfile;

/// One accepted viscous eigenpair.
#[derive(Debug, Clone)]
pub struct EigenSolution {
    pub alpha: f64,
    pub nu: f64,
    /// Temporal eigenvalue; growth iff `Re lambda > 0`.
    pub lambda: c64,
    /// Phase speed, `lambda = -i alpha c`, so `Im c > 0` iff growing.
    pub c: c64,
    pub phi: GridFunction,
    pub omega: GridFunction,
    /// Sup of the interior operator residual over the sup of omega.
    pub residual: f64,
}

/// Tuning knobs of the viscous eigensolve.
#[derive(Debug, Clone, Copy)]
pub struct OsOptions {
    /// Shift of the shift-inverted solve; `None` picks `2 nu^{1/4} - 0.3 i alpha`.
    pub shift: Option<c64>,
    /// Relative tail-energy bound beyond `z_top / 2` for accepted modes.
    pub tail_tol: f64,
    /// Relative operator-residual bound for accepted modes.
    pub residual_tol: f64,
    /// Minimum collocation nodes inside the sublayer `z < nu^{1/8}`.
    pub min_sublayer_nodes: usize,
}

impl Default for OsOptions {
    fn default() -> Self {
        OsOptions {
            shift: None,
            tail_tol: 1e-6,
            residual_tol: 1e-6,
            min_sublayer_nodes: 12,
        }
    }
}

/// An eigenvalue counts as unstable only above this scale-relative floor.
pub fn unstable_threshold(nu: f64) -> f64 {
    1e-10 * nu.powf(0.25)
}

/// Inverse of `Dalpha` with Dirichlet rows at both ends and the boundary
/// columns zeroed, so `phi = G omega` depends on the interior vorticity only.
pub(crate) fn dirichlet_alpha_inverse(grid: &GridRef, alpha: f64) -> Result<Array2<f64>> {
    let n = grid.n;
    let mut a_d = Array2::<f64>::zeros((n, n));
    for i in 1..n - 1 {
        for j in 0..n {
            a_d[[i, j]] = grid.d2[[i, j]];
        }
        a_d[[i, i]] -= alpha * alpha;
    }
    a_d[[0, 0]] = 1.0;
    a_d[[n - 1, n - 1]] = 1.0;
    let mut g = a_d.inv().map_err(Error::from)?;
    for i in 0..n {
        g[[i, 0]] = 0.0;
        g[[i, n - 1]] = 0.0;
    }
    Ok(g)
}

/// The linearized vorticity operator at one `(alpha, nu)`, with the
/// stream-function solve and the no-slip constraint row precomputed.
///
/// Shared by the eigensolver and the time propagator so both see the same
/// discrete operator.
pub struct LinearizedOp {
    pub grid: GridRef,
    pub alpha: f64,
    pub nu: f64,
    pub u: Array1<f64>,
    pub d2u: Array1<f64>,
    /// `phi = G w`: inverse of `Dalpha` with Dirichlet rows at both ends and
    /// the boundary columns zeroed; `phi` depends on interior vorticity only.
    pub g: Array2<f64>,
    /// No-slip constraint row: `phi'(0) = w_row . omega = 0`. At `alpha = 0`
    /// the wall conditions determine `phi` outright and the vorticity reduces
    /// to heat flow with the Neumann condition `omega'(0) = 0` (from
    /// Dirichlet heat flow of the shear velocity), so the row is `D1[0, .]`.
    pub w_row: Array1<f64>,
}

impl LinearizedOp {
    pub fn new(profile: &ShearProfile, grid: GridRef, alpha: f64, nu: f64) -> Result<Self> {
        let u = grid.z.mapv(|z| profile.deriv(0, z));
        let d2u = grid.z.mapv(|z| profile.deriv(2, z));
        Self::from_arrays(grid, alpha, nu, u, d2u)
    }

    /// Build from raw profile samples (used with heat-evolved profiles).
    pub fn from_arrays(
        grid: GridRef,
        alpha: f64,
        nu: f64,
        u: Array1<f64>,
        d2u: Array1<f64>,
    ) -> Result<Self> {
        if nu <= 0.0 {
            return Err(Error::Domain(format!("nu must be positive, got {nu}")));
        }
        if u.len() != grid.n || d2u.len() != grid.n {
            return Err(Error::Usage("profile sample length does not match grid".into()));
        }
        let n = grid.n;
        let g = dirichlet_alpha_inverse(&grid, alpha)?;
        let mut w_row = Array1::<f64>::zeros(n);
        if alpha == 0.0 {
            for j in 0..n {
                w_row[j] = grid.d1[[0, j]];
            }
        } else {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += grid.d1[[0, k]] * g[[k, j]];
                }
                w_row[j] = acc;
            }
        }
        Ok(LinearizedOp {
            grid,
            alpha,
            nu,
            u,
            d2u,
            g,
            w_row,
        })
    }

    /// Stream function of a full vorticity vector.
    pub fn phi_of(&self, omega: &Array1<c64>) -> Array1<c64> {
        apply_real(&self.g, omega)
    }

    /// `L omega` on all nodes (rows at the boundary nodes are formal).
    pub fn apply(&self, omega: &Array1<c64>) -> Array1<c64> {
        let n = self.grid.n;
        let sq = self.nu.sqrt();
        let lap = apply_real(&self.grid.d2, omega);
        let phi = self.phi_of(omega);
        let ia = c64::new(0.0, self.alpha);
        let mut out = Array1::from_elem(n, c64::new(0.0, 0.0));
        for j in 0..n {
            out[j] = sq * (lap[j] - self.alpha * self.alpha * omega[j]) - ia * self.u[j] * omega[j]
                + ia * self.d2u[j] * phi[j];
        }
        out
    }

    /// Pencil `A x = lambda B x` on `x = (omega_0 .. omega_{n-2})`:
    /// row 0 is the no-slip constraint (zero row in B), rows 1..n-2 are the
    /// vorticity equation at the interior nodes, the top value is pinned to 0.
    fn pencil_a(&self) -> Array2<c64> {
        let n = self.grid.n;
        let m = n - 1;
        let sq = self.nu.sqrt();
        let ia = c64::new(0.0, self.alpha);
        let mut a = Array2::from_elem((m, m), c64::new(0.0, 0.0));
        for j in 0..m {
            a[[0, j]] = c64::new(self.w_row[j], 0.0);
        }
        for i in 1..m {
            for j in 0..m {
                let mut v = c64::new(sq * self.grid.d2[[i, j]], 0.0);
                if i == j {
                    v -= c64::new(sq * self.alpha * self.alpha, 0.0) + ia * self.u[i];
                }
                v += ia * self.d2u[i] * self.g[[i, j]];
                a[[i, j]] = v;
            }
        }
        a
    }

    /// One inverse-iteration pass on the pencil: solve `(A - lambda B) y = B x`,
    /// then update `lambda` by the interior Rayleigh quotient. Tightens
    /// eigenpairs whose shift-inverted residual sits just above tolerance.
    fn refine_pair(
        &self,
        a: &Array2<c64>,
        lambda0: c64,
        x0: &Array1<c64>,
    ) -> Option<(c64, Array1<c64>)> {
        let m = a.nrows();
        let mut s = a.clone();
        for i in 1..m {
            s[[i, i]] -= lambda0;
        }
        let mut rhs = x0.clone();
        rhs[0] = c64::new(0.0, 0.0);
        let y = s.solve_into(rhs).ok()?;
        let sup = y.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if !(sup > 0.0 && sup.is_finite()) {
            return None;
        }
        let y = y.mapv(|v| v / sup);
        let ay = a.dot(&y);
        let mut num = c64::new(0.0, 0.0);
        let mut den = 0.0;
        for i in 1..m {
            num += y[i].conj() * ay[i];
            den += y[i].norm_sqr();
        }
        if den == 0.0 {
            return None;
        }
        Some((num / den, y))
    }

    /// Sup-normalized interior residual of a claimed eigenpair.
    pub fn residual(&self, omega: &Array1<c64>, lambda: c64) -> f64 {
        let l = self.apply(omega);
        let sup = omega.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
        let mut r: f64 = 0.0;
        for j in 1..self.grid.n - 1 {
            r = r.max((l[j] - lambda * omega[j]).norm());
        }
        r / sup
    }
}

/// Relative tail energy of a nodal field beyond `z_top / 2`.
fn tail_energy_ratio(grid: &GridRef, values: &Array1<c64>) -> f64 {
    let half = grid.z_top() / 2.0;
    let mut tail = 0.0;
    let mut total = 0.0;
    for j in 0..grid.n {
        let e = values[j].norm_sqr() * grid.weights[j];
        total += e;
        if grid.z[j] > half {
            tail += e;
        }
    }
    if total > 0.0 {
        tail / total
    } else {
        0.0
    }
}

/// Filtered viscous spectrum at one `(alpha, nu)`, sorted by `Re lambda`
/// descending. `alpha` may be negative (conjugate spectrum); zero is refused.
pub fn os_spectrum(
    profile: &ShearProfile,
    grid: GridRef,
    alpha: f64,
    nu: f64,
    opts: &OsOptions,
) -> Result<Vec<EigenSolution>> {
    if alpha == 0.0 {
        return Err(Error::Domain(
            "alpha = 0 reduces to pure diffusion; the scan records 0 by convention".into(),
        ));
    }
    let delta = nu.powf(0.125);
    let have = grid.nodes_below(delta);
    if have < opts.min_sublayer_nodes {
        let required = (grid.n * opts.min_sublayer_nodes) / have.max(1);
        return Err(Error::UnderResolved { required, have });
    }
    let op = LinearizedOp::new(profile, grid.clone(), alpha, nu)?;
    os_spectrum_of_op(&op, opts)
}

/// Eigensolve on a prebuilt operator (shared with the propagator tests).
pub fn os_spectrum_of_op(op: &LinearizedOp, opts: &OsOptions) -> Result<Vec<EigenSolution>> {
    let grid = &op.grid;
    let n = grid.n;
    let m = n - 1;
    let alpha = op.alpha;
    let nu = op.nu;
    let sigma = opts
        .shift
        .unwrap_or_else(|| c64::new(2.0 * nu.powf(0.25), -0.3 * alpha));
    let a = op.pencil_a();
    // X = (A - sigma B)^{-1} B with B = diag(0, 1, .., 1): invert the shifted
    // pencil, then drop the column of the undynamical wall unknown
    let mut s = a.clone();
    for i in 1..m {
        s[[i, i]] -= sigma;
    }
    let mut x = s.inv().map_err(|e| {
        Error::Eigensolver(format!("shifted pencil inversion failed (shift {sigma}): {e}"))
    })?;
    for i in 0..m {
        x[[i, 0]] = c64::new(0.0, 0.0);
    }
    let (mus, vecs) = x
        .eig()
        .map_err(|e| Error::Eigensolver(format!("dense eigensolve failed: {e}")))?;
    let mu_max = mus.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    let mut out = Vec::new();
    for (k, &mu) in mus.iter().enumerate() {
        if mu.norm() < 1e-10 * mu_max {
            continue; // the pencil's infinite eigenvalue and numerical nulls
        }
        let mut lambda = sigma + 1.0 / mu;
        let mut omega = Array1::from_elem(n, c64::new(0.0, 0.0));
        let mut sup = 0.0f64;
        for j in 0..m {
            omega[j] = vecs[[j, k]];
            sup = sup.max(omega[j].norm());
        }
        if sup == 0.0 {
            continue;
        }
        let scale = c64::new(1.0 / sup, 0.0);
        for j in 0..m {
            omega[j] *= scale;
        }
        if tail_energy_ratio(grid, &omega) > opts.tail_tol {
            continue;
        }
        let mut residual = op.residual(&omega, lambda);
        // inverse iteration recovers pairs that leave the shift-inverted solve
        // with residual slightly above tolerance
        let mut tries = 0;
        while residual > opts.residual_tol && residual < 1e-3 && tries < 3 {
            let Some((l2, x2)) = op.refine_pair(&a, lambda, &omega.slice(ndarray::s![..m]).to_owned())
            else {
                break;
            };
            let mut w2 = Array1::from_elem(n, c64::new(0.0, 0.0));
            for j in 0..m {
                w2[j] = x2[j];
            }
            let r2 = op.residual(&w2, l2);
            if r2 >= residual {
                break;
            }
            lambda = l2;
            omega = w2;
            residual = r2;
            tries += 1;
        }
        if residual > opts.residual_tol {
            continue;
        }
        if tail_energy_ratio(grid, &omega) > opts.tail_tol {
            continue;
        }
        let phi = op.phi_of(&omega);
        let c = lambda / c64::new(0.0, -alpha);
        out.push(EigenSolution {
            alpha,
            nu,
            lambda,
            c,
            phi: GridFunction::new(grid.clone(), phi)?.with_alpha(alpha),
            omega: GridFunction::new(grid.clone(), omega)?.with_alpha(alpha),
            residual,
        });
    }
    out.sort_by(|a, b| b.lambda.re.partial_cmp(&a.lambda.re).unwrap());
    // refinement can collapse near-degenerate candidates onto one pair
    let mut dedup: Vec<EigenSolution> = Vec::with_capacity(out.len());
    for sol in out {
        if dedup
            .iter()
            .all(|kept| (kept.lambda - sol.lambda).norm() > 1e-9 * (1.0 + sol.lambda.norm()))
        {
            dedup.push(sol);
        }
    }
    Ok(dedup)
}

/// Leading accepted eigenpair, `None` when the filtered spectrum is empty.
pub fn os_leading(
    profile: &ShearProfile,
    grid: GridRef,
    alpha: f64,
    nu: f64,
    opts: &OsOptions,
) -> Result<Option<EigenSolution>> {
    Ok(os_spectrum(profile, grid, alpha, nu, opts)?.into_iter().next())
}

/// Leading eigenvalue on the finite-difference backend, Richardson
/// extrapolated from node counts `2n` and `3n` (the backend's truncation
/// error is second order in the node spacing, and its uniform node layout
/// needs roughly twice the spectral count to resolve the wall sublayer).
pub fn os_leading_fd_extrapolated(
    profile: &ShearProfile,
    mapping: crate::grid::Mapping,
    n: usize,
    alpha: f64,
    nu: f64,
    opts: &OsOptions,
) -> Result<Option<c64>> {
    let coarse_grid =
        crate::grid::SemiInfiniteGrid::build(2 * n, crate::grid::Backend::FiniteDifference, mapping)?;
    let fine_grid =
        crate::grid::SemiInfiniteGrid::build(3 * n, crate::grid::Backend::FiniteDifference, mapping)?;
    let coarse = os_leading(profile, coarse_grid, alpha, nu, opts)?;
    let fine = os_leading(profile, fine_grid, alpha, nu, opts)?;
    Ok(match (coarse, fine) {
        (Some(c), Some(f)) => {
            // h_f = (2/3) h_c: error ratio (2/3)^2, so the limit is
            // f + (f - c) / ((3/2)^2 - 1)
            Some(f.lambda + (f.lambda - c.lambda) / 1.25)
        }
        _ => None,
    })
}

/// An accepted inviscid eigenpair with `Im c > 0`.
#[derive(Debug, Clone)]
pub struct RayleighMode {
    pub c: c64,
    pub phi: GridFunction,
}

/// Counts of candidates removed by each spurious-mode filter.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct RayleighRemoved {
    pub threshold: usize,
    pub semicircle: usize,
    pub tail: usize,
    pub resolution: usize,
}

#[derive(Debug, Clone)]
pub struct RayleighResult {
    pub alpha: f64,
    pub modes: Vec<RayleighMode>,
    pub removed: RayleighRemoved,
}

/// Raw discrete Rayleigh eigenvalues with `Im c` above the threshold.
fn rayleigh_candidates(
    profile: &ShearProfile,
    grid: &GridRef,
    alpha: f64,
) -> Result<Vec<(c64, Array1<c64>)>> {
    let n = grid.n;
    let ni = n - 2;
    let u = grid.z.mapv(|z| profile.deriv(0, z));
    let d2u = grid.z.mapv(|z| profile.deriv(2, z));
    let mut a = Array2::<f64>::zeros((ni, ni));
    let mut b = Array2::<f64>::zeros((ni, ni));
    for i in 0..ni {
        for j in 0..ni {
            let lap = grid.d2[[i + 1, j + 1]] - if i == j { alpha * alpha } else { 0.0 };
            b[[i, j]] = lap;
            a[[i, j]] = u[i + 1] * lap - if i == j { d2u[i + 1] } else { 0.0 };
        }
    }
    let m = b.inv().map_err(Error::from)?.dot(&a);
    let (cs, vecs) = m
        .eig()
        .map_err(|e| Error::Eigensolver(format!("Rayleigh eigensolve failed: {e}")))?;
    let mut out = Vec::new();
    for (k, &c) in cs.iter().enumerate() {
        if c.im > 1e-8 {
            let mut phi = Array1::from_elem(n, c64::new(0.0, 0.0));
            for j in 0..ni {
                phi[j + 1] = vecs[[j, k]];
            }
            let sup = phi.iter().map(|v| v.norm()).fold(0.0, f64::max);
            if sup > 0.0 {
                let s = c64::new(1.0 / sup, 0.0);
                phi.mapv_inplace(|v| v * s);
            }
            out.push((c, phi));
        }
    }
    Ok(out)
}

/// Unstable inviscid spectrum at one wavenumber; an empty mode list declares
/// spectral stability of the profile at this `alpha`.
///
/// Filters: `Im c > 1e-8` threshold, the Howard semicircle over the sampled
/// range of `U`, tail decay of the mode vorticity, and agreement under a
/// 3N/2 resolution change.
pub fn rayleigh_spectrum(
    profile: &ShearProfile,
    grid: GridRef,
    alpha: f64,
) -> Result<RayleighResult> {
    if alpha <= 0.0 {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    let mut removed = RayleighRemoved::default();
    let cands = rayleigh_candidates(profile, &grid, alpha)?;
    let fine_grid = crate::grid::SemiInfiniteGrid::build(grid.n * 3 / 2, grid.backend, grid.mapping)?;
    let fine: Vec<c64> = rayleigh_candidates(profile, &fine_grid, alpha)?
        .into_iter()
        .map(|(c, _)| c)
        .collect();
    let u_min = grid.z.iter().map(|&z| profile.deriv(0, z)).fold(f64::INFINITY, f64::min);
    let u_max = grid.z.iter().map(|&z| profile.deriv(0, z)).fold(f64::NEG_INFINITY, f64::max);
    let center = 0.5 * (u_min + u_max);
    let radius = 0.5 * (u_max - u_min);
    let mut modes = Vec::new();
    for (c, phi) in cands {
        let off = c64::new(c.re - center, c.im).norm();
        if off > radius * (1.0 + 1e-6) {
            removed.semicircle += 1;
            continue;
        }
        let omega = {
            let lap = apply_real(&grid.d2, &phi);
            let mut w = lap;
            for j in 0..grid.n {
                w[j] -= phi[j] * (alpha * alpha);
            }
            w
        };
        if tail_energy_ratio(&grid, &omega) > 1e-6 {
            removed.tail += 1;
            continue;
        }
        let matched = fine.iter().any(|&cf| (cf - c).norm() < 1e-4 * (1.0 + c.norm()));
        if !matched {
            removed.resolution += 1;
            continue;
        }
        modes.push(RayleighMode {
            c,
            phi: GridFunction::new(grid.clone(), phi)?.with_alpha(alpha),
        });
    }
    modes.sort_by(|a, b| b.c.im.partial_cmp(&a.c.im).unwrap());
    Ok(RayleighResult { alpha, modes, removed })
}

/// One row of a growth scan.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GrowthRow {
    pub nu: f64,
    /// Most unstable wavenumber, 0 when the whole range is stable.
    pub alpha_star: f64,
    /// `max_alpha Re lambda`, 0 by convention when stable.
    pub re_lambda: f64,
    pub im_lambda: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthScan {
    pub rows: Vec<GrowthRow>,
    /// `max over nu of nu^{-1/4} max_alpha Re lambda`.
    pub gamma0_estimate: f64,
    /// Log-log fit of `max Re lambda` against `nu` over the unstable rows.
    pub slope_fit: Option<LinFit>,
    pub alpha_slope_fit: Option<LinFit>,
}

/// Default scan bracket `[nu^{1/8}/4, 4 nu^{1/12}]`.
pub fn default_alpha_range(nu: f64) -> (f64, f64) {
    (nu.powf(0.125) / 4.0, 4.0 * nu.powf(1.0 / 12.0))
}

/// Leading growth rate as a function of `alpha`, `None` when stable there.
fn growth_at(
    profile: &ShearProfile,
    grid: &GridRef,
    alpha: f64,
    nu: f64,
    opts: &OsOptions,
) -> Result<Option<EigenSolution>> {
    let sol = os_leading(profile, grid.clone(), alpha, nu, opts)?;
    Ok(sol.filter(|s| s.lambda.re > unstable_threshold(nu)))
}

/// Maximize the leading growth rate over a wavenumber bracket: geometric scan
/// followed by golden-section refinement around the best sample.
pub fn max_growth(
    profile: &ShearProfile,
    grid: GridRef,
    nu: f64,
    alpha_range: (f64, f64),
    samples: usize,
    opts: &OsOptions,
) -> Result<(Option<(f64, EigenSolution)>, Vec<(f64, f64)>)> {
    let (lo, hi) = alpha_range;
    if !(lo > 0.0 && hi > lo) || samples < 4 {
        return Err(Error::Usage(format!(
            "bad scan range [{lo}, {hi}] or sample count {samples}"
        )));
    }
    let ratio = (hi / lo).powf(1.0 / (samples - 1) as f64);
    let mut table = Vec::with_capacity(samples);
    let mut best: Option<(usize, f64)> = None;
    for k in 0..samples {
        let alpha = lo * ratio.powi(k as i32);
        let re = growth_at(profile, &grid, alpha, nu, opts)?
            .map(|s| s.lambda.re)
            .unwrap_or(0.0);
        if re > 0.0 && best.map_or(true, |(_, b)| re > b) {
            best = Some((k, re));
        }
        table.push((alpha, re));
    }
    let Some((k_best, _)) = best else {
        return Ok((None, table));
    };
    // golden-section on the bracket formed by the neighbors of the best sample
    let mut a = table[k_best.saturating_sub(1)].0;
    let mut b = table[(k_best + 1).min(samples - 1)].0;
    let gr = 0.5 * (5.0f64.sqrt() - 1.0);
    let f = |alpha: f64| -> Result<f64> {
        Ok(growth_at(profile, &grid, alpha, nu, opts)?
            .map(|s| s.lambda.re)
            .unwrap_or(0.0))
    };
    let mut c1 = b - gr * (b - a);
    let mut c2 = a + gr * (b - a);
    let mut f1 = f(c1)?;
    let mut f2 = f(c2)?;
    for _ in 0..24 {
        if (b - a) < 1e-3 * b {
            break;
        }
        if f1 < f2 {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + gr * (b - a);
            f2 = f(c2)?;
        } else {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - gr * (b - a);
            f1 = f(c1)?;
        }
    }
    let alpha_star = if f1 > f2 { c1 } else { c2 };
    let sol = growth_at(profile, &grid, alpha_star, nu, opts)?
        .ok_or_else(|| Error::Numerical("refined maximizer lost the unstable mode".into()))?;
    Ok((Some((alpha_star, sol)), table))
}

/// Scan a viscosity grid, fit the growth-rate and wavenumber power laws, and
/// report the `gamma0` probe `max nu^{-1/4} Re lambda`.
pub fn estimate_gamma0(
    profile: &ShearProfile,
    grid: GridRef,
    nus: &[f64],
    samples: usize,
    opts: &OsOptions,
) -> Result<GrowthScan> {
    if nus.is_empty() {
        return Err(Error::Usage("empty viscosity grid".into()));
    }
    let mut rows = Vec::with_capacity(nus.len());
    for &nu in nus {
        let (best, _) = max_growth(profile, grid.clone(), nu, default_alpha_range(nu), samples, opts)?;
        let row = match best {
            Some((alpha_star, sol)) => GrowthRow {
                nu,
                alpha_star,
                re_lambda: sol.lambda.re,
                im_lambda: sol.lambda.im,
            },
            None => GrowthRow {
                nu,
                alpha_star: 0.0,
                re_lambda: 0.0,
                im_lambda: 0.0,
            },
        };
        rows.push(row);
    }
    let gamma0_estimate = rows
        .iter()
        .map(|r| r.re_lambda / r.nu.powf(0.25))
        .fold(0.0, f64::max);
    let xs: Vec<f64> = rows.iter().map(|r| r.nu).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.re_lambda).collect();
    let als: Vec<f64> = rows.iter().map(|r| r.alpha_star).collect();
    let unstable = rows.iter().filter(|r| r.re_lambda > 0.0).count();
    let slope_fit = if unstable >= 3 { log_log_fit(&xs, &ys).ok() } else { None };
    let alpha_slope_fit = if unstable >= 3 { log_log_fit(&xs, &als).ok() } else { None };
    Ok(GrowthScan {
        rows,
        gamma0_estimate,
        slope_fit,
        alpha_slope_fit,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NeutralRow {
    pub r: f64,
    pub nu: f64,
    pub alpha_low: Option<f64>,
    pub alpha_up: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NeutralCurve {
    pub rows: Vec<NeutralRow>,
    pub slope_low: Option<LinFit>,
    pub slope_up: Option<LinFit>,
}

/// Bisect the instability onset between a stable and an unstable wavenumber.
fn bisect_neutral(
    profile: &ShearProfile,
    grid: &GridRef,
    nu: f64,
    mut stable: f64,
    mut unstable: f64,
    opts: &OsOptions,
) -> Result<f64> {
    for _ in 0..30 {
        if (stable - unstable).abs() < 2e-3 * unstable.max(stable) {
            break;
        }
        let mid = (stable * unstable).sqrt();
        if growth_at(profile, grid, mid, nu, opts)?.is_some() {
            unstable = mid;
        } else {
            stable = mid;
        }
    }
    Ok((stable * unstable).sqrt())
}

/// Locate the lower and upper neutral wavenumbers for each Reynolds number
/// (`nu = R^{-2}`) and fit both branches in log-log.
pub fn trace_neutral_curve(
    profile: &ShearProfile,
    grid: GridRef,
    r_values: &[f64],
    scan_samples: usize,
    opts: &OsOptions,
) -> Result<NeutralCurve> {
    let mut rows = Vec::with_capacity(r_values.len());
    for &r in r_values {
        if r <= 0.0 {
            return Err(Error::Usage(format!("Reynolds number must be positive, got {r}")));
        }
        let nu = r.powi(-2);
        let (lo, hi) = (nu.powf(0.125) / 6.0, 6.0 * nu.powf(1.0 / 12.0));
        let ratio = (hi / lo).powf(1.0 / (scan_samples - 1) as f64);
        let mut flags = Vec::with_capacity(scan_samples);
        let mut alphas = Vec::with_capacity(scan_samples);
        for k in 0..scan_samples {
            let alpha = lo * ratio.powi(k as i32);
            alphas.push(alpha);
            flags.push(growth_at(profile, &grid, alpha, nu, opts)?.is_some());
        }
        let first = flags.iter().position(|&f| f);
        let last = flags.iter().rposition(|&f| f);
        let (alpha_low, alpha_up) = match (first, last) {
            (Some(i), Some(j)) => {
                let low = if i == 0 {
                    None // band extends past the bracket; widened bracket failed
                } else {
                    Some(bisect_neutral(profile, &grid, nu, alphas[i - 1], alphas[i], opts)?)
                };
                let up = if j == scan_samples - 1 {
                    None
                } else {
                    Some(bisect_neutral(profile, &grid, nu, alphas[j + 1], alphas[j], opts)?)
                };
                (low, up)
            }
            _ => (None, None),
        };
        rows.push(NeutralRow {
            r,
            nu,
            alpha_low,
            alpha_up,
        });
    }
    let both: Vec<&NeutralRow> = rows
        .iter()
        .filter(|r| r.alpha_low.is_some() && r.alpha_up.is_some())
        .collect();
    let (slope_low, slope_up) = if both.len() >= 3 {
        let rs: Vec<f64> = both.iter().map(|r| r.r).collect();
        let lows: Vec<f64> = both.iter().map(|r| r.alpha_low.unwrap()).collect();
        let ups: Vec<f64> = both.iter().map(|r| r.alpha_up.unwrap()).collect();
        (log_log_fit(&rs, &lows).ok(), log_log_fit(&rs, &ups).ok())
    } else {
        (None, None)
    };
    Ok(NeutralCurve {
        rows,
        slope_low,
        slope_up,
    })
}

/// Two-mode vorticity family `{+alpha, -alpha}` from an unstable eigenpair,
/// normalized so the reconstructed physical velocity has sup amplitude
/// `amplitude` at `t = 0`; `phase` rotates the complex coefficient.
pub fn build_growing_mode(sol: &EigenSolution, amplitude: f64, phase: f64) -> Result<ModeFamily> {
    if amplitude < 0.0 {
        return Err(Error::Usage("amplitude must be nonnegative".into()));
    }
    let mut fam = ModeFamily::new(sol.alpha);
    let coef = c64::from_polar(1.0, phase);
    let unit = sol.omega.scale(coef);
    let sup_v = physical_velocity_sup(&sol.phi.scale(coef), sol.alpha, 64);
    let scale = if sup_v > 0.0 { amplitude / sup_v } else { 0.0 };
    let plus = unit.scale(c64::new(scale, 0.0));
    let minus = plus.conj();
    fam.insert(1, plus);
    fam.insert(-1, minus);
    Ok(fam)
}

/// Sup over `x` samples and grid nodes of `|2 Re(e^{i alpha x} (d_z phi, -i alpha phi))|`.
pub fn physical_velocity_sup(phi: &GridFunction, alpha: f64, nx: usize) -> f64 {
    let v1 = phi.deriv();
    let mut sup: f64 = 0.0;
    for m in 0..nx {
        let theta = 2.0 * std::f64::consts::PI * m as f64 / nx as f64;
        let ph = c64::from_polar(1.0, theta);
        for j in 0..phi.grid.n {
            let a = 2.0 * (ph * v1.values[j]).re;
            let b = 2.0 * (ph * phi.values[j] * c64::new(0.0, -alpha)).re;
            sup = sup.max((a * a + b * b).sqrt());
        }
    }
    sup
}

/// Fitted layer scales of an eigenmode; the localized parts are modeled as
/// exponentially decaying envelopes whose scale is read off by first-moment
/// centroids, robust against the oscillation of `|omega|`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeStructure {
    /// Fitted wall-sublayer width.
    pub delta_bl_fit: f64,
    /// Predicted `nu^{1/8}`.
    pub delta_bl_pred: f64,
    /// Alternative prediction `(alpha |c| R)^{-1/2}` with `U(0) = 0`.
    pub delta_bl_pred_alt: f64,
    /// Fitted critical-layer width around `U(z) = Re c`.
    pub delta_cr_fit: f64,
    /// Predicted `(alpha R)^{-1/3}`.
    pub delta_cr_pred: f64,
    /// Height where `U = Re c`.
    pub z_critical: f64,
    /// Outer exponential decay rate of the stream function.
    pub tail_rate: f64,
    pub fit_ok: bool,
}

/// Solve `U(z) = value` for monotone profiles by bisection on the grid span.
fn height_of_speed(profile: &ShearProfile, value: f64, z_hi: f64) -> Option<f64> {
    let (mut a, mut b) = (0.0, z_hi);
    if profile.deriv(0, a) > value || profile.deriv(0, b) < value {
        return None;
    }
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        if profile.deriv(0, m) < value {
            a = m;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

pub fn mode_structure(sol: &EigenSolution, profile: &ShearProfile) -> Result<ModeStructure> {
    let grid = &sol.omega.grid;
    let nu = sol.nu;
    let alpha = sol.alpha.abs();
    let r = nu.powf(-0.5);
    let delta_bl_pred = nu.powf(0.125);
    let delta_cr_pred = (alpha * r).powf(-1.0 / 3.0);
    let delta_bl_pred_alt = (alpha * sol.c.norm() * r).powf(-0.5);
    let z_critical = height_of_speed(profile, sol.c.re.clamp(0.0, 1.0), grid.z_top())
        .unwrap_or(delta_cr_pred);
    // wall-layer centroid; the window stays below the critical layer so its
    // vorticity bump does not leak into the wall fit
    let window_bl = (6.0 * delta_bl_pred).min((0.8 * z_critical).max(1.5 * delta_bl_pred));
    let (mut m0, mut m1) = (0.0, 0.0);
    for j in 0..grid.n {
        if grid.z[j] <= window_bl {
            let w = sol.omega.values[j].norm() * grid.weights[j];
            m0 += w;
            m1 += grid.z[j] * w;
        }
    }
    let delta_bl_fit = if m0 > 0.0 { m1 / m0 } else { f64::NAN };
    // critical-layer centroid of |z - z_c| over [0, z_c + 6 delta_pred]
    let window_cr = z_critical + 6.0 * delta_cr_pred;
    let (mut c0, mut c1) = (0.0, 0.0);
    for j in 0..grid.n {
        if grid.z[j] <= window_cr {
            let w = sol.omega.values[j].norm() * grid.weights[j];
            c0 += w;
            c1 += (grid.z[j] - z_critical).abs() * w;
        }
    }
    let delta_cr_fit = if c0 > 0.0 { c1 / c0 } else { f64::NAN };
    // outer decay of the stream function on [z_top/4, z_top/2]
    let mut zs = Vec::new();
    let mut lps = Vec::new();
    for j in 0..grid.n {
        let z = grid.z[j];
        if z >= grid.z_top() / 4.0 && z <= grid.z_top() / 2.0 {
            let v = sol.phi.values[j].norm();
            if v > 0.0 {
                zs.push(z);
                lps.push(v.ln());
            }
        }
    }
    let tail_rate = if zs.len() >= 3 {
        -crate::fit::linear_fit(&zs, &lps)?.slope
    } else {
        f64::NAN
    };
    let fit_ok = delta_bl_fit.is_finite() && delta_cr_fit.is_finite() && delta_bl_fit > 0.0;
    Ok(ModeStructure {
        delta_bl_fit,
        delta_bl_pred,
        delta_bl_pred_alt,
        delta_cr_fit,
        delta_cr_pred,
        z_critical,
        tail_rate,
        fit_ok,
    })
}
