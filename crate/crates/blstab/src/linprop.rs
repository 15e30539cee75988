//! Time propagator for the linearized vorticity operator at one wavenumber,
//! plus empirical verification of the semigroup growth and derivative bounds.
//!
//! The stiff diffusion and the diagonal advection `-i alpha U` are advanced
//! by Crank-Nicolson; the compact stream-function coupling
//! `i alpha U'' Dalpha^{-1}` and any external forcing are explicit
//! (two-step Adams-Bashforth and trapezoid respectively). The no-slip
//! condition enters exactly as in the eigensolver: the wall vorticity is the
//! extra unknown fixed each step by the constraint row `phi'(0) = 0`, and the
//! top vorticity is pinned to zero. One LU factorization is reused for the
//! whole run.

use ndarray::{Array1, Array2, OwnedRepr};
use ndarray_linalg::{FactorizeInto, LUFactorized, Solve};
use num_complex::Complex64 as c64;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::norms::{bl_norm, c_nu_alpha, BLNormParams, DEFAULT_ALPHA_CUTOFF};
use crate::stability::LinearizedOp;

/// A completed propagation with snapshots and weighted-norm traces.
#[derive(Debug)]
pub struct PropagatorRun {
    pub alpha: f64,
    pub nu: f64,
    pub dt: f64,
    /// Snapshot times, starting at 0 and ending at `t_end`.
    pub times: Vec<f64>,
    pub snapshots: Vec<GridFunction>,
    pub dz_snapshots: Vec<GridFunction>,
    /// `||omega(t)||_{beta,gamma,1}` at each snapshot.
    pub norm_trace: Vec<f64>,
    /// `||dz omega(t)||_{beta,gamma,1}` at each snapshot.
    pub dz_norm_trace: Vec<f64>,
}

impl PropagatorRun {
    pub fn final_state(&self) -> &GridFunction {
        self.snapshots.last().expect("run holds at least the initial snapshot")
    }
}

/// Step-size heuristic: resolve the fastest advective phase `alpha U` with a
/// margin; diffusion is implicit and does not constrain `dt`.
pub fn default_dt(alpha: f64, t_end: f64) -> f64 {
    (0.1 / alpha.abs().max(0.2)).min(t_end / 64.0)
}

/// Advance `omega0` to `t_end`, keeping `n_snapshots + 1` equispaced
/// snapshots (including both endpoints). `forcing(t)` is added to the
/// interior vorticity equation when present.
pub fn propagate(
    op: &LinearizedOp,
    omega0: &GridFunction,
    t_end: f64,
    dt: f64,
    n_snapshots: usize,
    forcing: Option<&dyn Fn(f64) -> Array1<c64>>,
    params: &BLNormParams,
) -> Result<PropagatorRun> {
    if t_end <= 0.0 || dt <= 0.0 {
        return Err(Error::Usage(format!("need positive t_end and dt, got {t_end}, {dt}")));
    }
    if n_snapshots == 0 {
        return Err(Error::Usage("need at least one snapshot interval".into()));
    }
    let grid = &op.grid;
    let n = grid.n;
    if omega0.values.len() != n {
        return Err(Error::Usage("initial data length does not match the operator grid".into()));
    }
    // align dt so snapshots fall on step boundaries
    let steps_per_snap = ((t_end / n_snapshots as f64) / dt).ceil().max(1.0) as usize;
    let steps = steps_per_snap * n_snapshots;
    let dt = t_end / steps as f64;

    let mut stepper = ImexStepper::new(op, dt)?;
    let mut w = omega0.values.clone();
    w[n - 1] = c64::new(0.0, 0.0);
    let mut t = 0.0;

    let mut times = Vec::with_capacity(n_snapshots + 1);
    let mut snapshots = Vec::with_capacity(n_snapshots + 1);
    let mut dz_snapshots = Vec::with_capacity(n_snapshots + 1);
    let mut norm_trace = Vec::with_capacity(n_snapshots + 1);
    let mut dz_norm_trace = Vec::with_capacity(n_snapshots + 1);
    let mut record = |t: f64, w: &Array1<c64>| -> Result<()> {
        let f = GridFunction::new(grid.clone(), w.clone())?.with_alpha(op.alpha);
        let dz = f.deriv();
        norm_trace.push(bl_norm(&f, params));
        dz_norm_trace.push(bl_norm(&dz, params));
        times.push(t);
        snapshots.push(f);
        dz_snapshots.push(dz);
        Ok(())
    };
    record(0.0, &w)?;

    let mut f_now: Option<Array1<c64>> = forcing.map(|f| f(0.0));
    for step in 0..steps {
        let f_next = forcing.map(|f| f((step + 1) as f64 * dt));
        if let (Some(a), Some(b)) = (&f_now, &f_next) {
            if a.len() != n || b.len() != n {
                return Err(Error::Usage("forcing length does not match the grid".into()));
            }
        }
        stepper.step(op, &mut w, f_now.as_ref(), f_next.as_ref())?;
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "propagation diverged at t = {:.6}",
                t + dt
            )));
        }
        f_now = f_next;
        t += dt;
        if (step + 1) % steps_per_snap == 0 {
            record(t, &w)?;
        }
    }

    Ok(PropagatorRun {
        alpha: op.alpha,
        nu: op.nu,
        dt,
        times,
        snapshots,
        dz_snapshots,
        norm_trace,
        dz_norm_trace,
    })
}

/// One Crank-Nicolson/Adams-Bashforth step of the linearized equation,
/// factored once and reusable; the expansion ladder advances many coupled
/// modes in lockstep with one stepper per mode.
///
/// The implicit matrix has the no-slip constraint as row 0 and
/// `I - (dt/2)(sqrt(nu) Dalpha - i alpha U)` on the interior rows, acting on
/// `(omega_0 .. omega_{n-2})` with the top value pinned to zero.
pub(crate) struct ImexStepper {
    lu: LUFactorized<OwnedRepr<c64>>,
    dt: f64,
    prev_coupling: Option<Array1<c64>>,
}

impl ImexStepper {
    pub(crate) fn new(op: &LinearizedOp, dt: f64) -> Result<Self> {
        if dt <= 0.0 {
            return Err(Error::Usage(format!("step size must be positive, got {dt}")));
        }
        let n = op.grid.n;
        let m = n - 1;
        let sq = op.nu.sqrt();
        let a2 = op.alpha * op.alpha;
        let ia = c64::new(0.0, op.alpha);
        let mut mat = Array2::from_elem((m, m), c64::new(0.0, 0.0));
        for j in 0..m {
            mat[[0, j]] = c64::new(op.w_row[j], 0.0);
        }
        for i in 1..m {
            for j in 0..m {
                let mut v = c64::new(-0.5 * dt * sq * op.grid.d2[[i, j]], 0.0);
                if i == j {
                    v += 1.0 + 0.5 * dt * (sq * a2) + 0.5 * dt * ia * op.u[i];
                }
                mat[[i, j]] = v;
            }
        }
        let lu = mat
            .factorize_into()
            .map_err(|e| Error::Linalg(format!("implicit matrix factorization failed: {e}")))?;
        Ok(ImexStepper {
            lu,
            dt,
            prev_coupling: None,
        })
    }

    /// Explicit coupling term `i alpha U'' Dalpha^{-1} omega` on interior nodes.
    fn coupling(op: &LinearizedOp, w: &Array1<c64>) -> Array1<c64> {
        let n = op.grid.n;
        let phi = op.phi_of(w);
        let ia = c64::new(0.0, op.alpha);
        let mut out = Array1::from_elem(n, c64::new(0.0, 0.0));
        for j in 1..n - 1 {
            out[j] = ia * op.d2u[j] * phi[j];
        }
        out
    }

    /// Advance the full nodal vector `w` (top value pinned to zero) by `dt`;
    /// `f_now`/`f_next` are the forcing at the step endpoints (trapezoid).
    pub(crate) fn step(
        &mut self,
        op: &LinearizedOp,
        w: &mut Array1<c64>,
        f_now: Option<&Array1<c64>>,
        f_next: Option<&Array1<c64>>,
    ) -> Result<()> {
        let n = op.grid.n;
        let m = n - 1;
        let dt = self.dt;
        let sq = op.nu.sqrt();
        let a2 = op.alpha * op.alpha;
        let ia = c64::new(0.0, op.alpha);
        let cur_coupling = Self::coupling(op, w);
        // implicit half at the old level: sqrt(nu) Dalpha - i alpha U
        let lap = crate::grid::apply_real(&op.grid.d2, w);
        let (c_new, c_old) = if self.prev_coupling.is_some() {
            (1.5, -0.5)
        } else {
            (1.0, 0.0)
        };
        let prev = self.prev_coupling.as_ref().unwrap_or(&cur_coupling);
        let mut rhs = Array1::from_elem(m, c64::new(0.0, 0.0));
        for j in 1..m {
            let stiff = sq * (lap[j] - a2 * w[j]) - ia * op.u[j] * w[j];
            rhs[j] = w[j] + 0.5 * dt * stiff + dt * (c_new * cur_coupling[j] + c_old * prev[j]);
        }
        if let (Some(f0), Some(f1)) = (f_now, f_next) {
            for j in 1..m {
                rhs[j] += 0.5 * dt * (f0[j] + f1[j]);
            }
        }
        let x = self
            .lu
            .solve_into(rhs)
            .map_err(|e| Error::Linalg(format!("implicit step solve failed: {e}")))?;
        for j in 0..m {
            w[j] = x[j];
        }
        w[n - 1] = c64::new(0.0, 0.0);
        self.prev_coupling = Some(cur_coupling);
        Ok(())
    }
}

/// Envelope of the semigroup growth bound at `gamma1`:
/// `C_{nu,alpha} e^{gamma1 nu^{1/4} t} e^{-alpha^2 sqrt(nu) t / 4}`.
pub fn growth_envelope(alpha: f64, nu: f64, gamma1: f64, t: f64) -> f64 {
    c_nu_alpha(nu, alpha, DEFAULT_ALPHA_CUTOFF)
        * (gamma1 * nu.powf(0.25) * t).exp()
        * (-alpha * alpha * nu.sqrt() * t / 4.0).exp()
}

/// Result of fitting one envelope constant against a norm trace.
#[derive(Debug, Clone, Copy)]
pub struct EnvelopeFit {
    /// Smallest constant making the envelope an upper bound over the trace.
    pub constant: f64,
    /// Snapshot time where the constant is attained.
    pub t_attained: f64,
}

/// Fit `C_gamma` in
/// `||omega(t)|| <= C_gamma C_{nu,alpha} e^{gamma1 nu^{1/4} t} e^{-alpha^2 sqrt(nu) t/4} ||omega0||`.
pub fn verify_semigroup_bound(run: &PropagatorRun, gamma1: f64) -> Result<EnvelopeFit> {
    let base = run.norm_trace[0];
    if !(base > 0.0) {
        return Err(Error::Usage("initial norm must be positive".into()));
    }
    let mut best = (0.0f64, 0.0f64);
    for (k, &t) in run.times.iter().enumerate() {
        let ratio = run.norm_trace[k] / (growth_envelope(run.alpha, run.nu, gamma1, t) * base);
        if ratio > best.0 {
            best = (ratio, t);
        }
    }
    Ok(EnvelopeFit {
        constant: best.0,
        t_attained: best.1,
    })
}

/// Fit `C` in the derivative bound
/// `||dz omega(t)|| <= C C_{nu,alpha}(nu^{-1/8} + (sqrt(nu) t)^{-1/2}) e^{...} ||omega0||`;
/// the `t = 0` snapshot is skipped (infinite envelope).
pub fn verify_derivative_bound(run: &PropagatorRun, gamma1: f64) -> Result<EnvelopeFit> {
    let base = run.norm_trace[0];
    if !(base > 0.0) {
        return Err(Error::Usage("initial norm must be positive".into()));
    }
    let nu = run.nu;
    let mut best = (0.0f64, 0.0f64);
    for (k, &t) in run.times.iter().enumerate() {
        if t <= 0.0 {
            continue;
        }
        let env = growth_envelope(run.alpha, nu, gamma1, t)
            * (nu.powf(-0.125) + (nu.sqrt() * t).powf(-0.5));
        let ratio = run.dz_norm_trace[k] / (env * base);
        if ratio > best.0 {
            best = (ratio, t);
        }
    }
    Ok(EnvelopeFit {
        constant: best.0,
        t_attained: best.1,
    })
}
