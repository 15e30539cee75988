//! Approximate growing solution as a wavenumber ladder: correction modes
//! `omega_{j,n}` built by Duhamel iteration against the linear propagator,
//! with the quadratic transport operator `Q` and the slow-profile
//! perturbation operator `S` as level sources, plus the assembled
//! approximation and its residual.
//!
//! Level sources follow
//! `R_{j,n} = S omega_{j-1,n} + sum_{k+l+8p=j} sum_{n1+n2=n} Q(omega_{k,n1}, omega_{l,n2})`,
//! so with a stationary profile (`S = 0`) the first nonzero correction sits
//! at level `j = 8 p_exp`, and with a heat-evolving profile every level is
//! sourced. All levels advance in lockstep through one shared time loop so no
//! mode history has to be stored beyond the requested snapshots.

use std::collections::{BTreeMap, BTreeSet};

use ndarray::{Array1, Array2};
use ndarray_linalg::Inverse;
use num_complex::Complex64 as c64;

use crate::error::{Error, Result};
use crate::grid::{apply_real, GridFunction, GridRef, ModeFamily};
use crate::linprop::ImexStepper;
use crate::norms::{bl_norm, sup_alpha_norm, BLNormParams};
use crate::profiles::{heat_evolve, heat_evolve_d2, ShearProfile};
use crate::stability::{dirichlet_alpha_inverse, EigenSolution, LinearizedOp};

/// Stream-function solve at one ladder wavenumber, cached as a dense matrix.
///
/// For `alpha != 0` this is the double-Dirichlet inverse of `Dalpha`; the
/// zero mode has no decaying stream function, so there `u1` comes from
/// integrating `u1' = omega` up from the no-slip wall and `phi` is not used
/// (every `phi` occurrence in `Q` and `S` carries a factor of the mode index).
pub struct StreamSolve {
    pub grid: GridRef,
    pub alpha: f64,
    mat: Array2<f64>,
}

impl StreamSolve {
    pub fn new(grid: GridRef, alpha: f64) -> Result<Self> {
        let n = grid.n;
        let mat = if alpha != 0.0 {
            dirichlet_alpha_inverse(&grid, alpha)?
        } else {
            let mut m = Array2::<f64>::zeros((n, n));
            m[[0, 0]] = 1.0;
            for i in 1..n {
                for j in 0..n {
                    m[[i, j]] = grid.d1[[i, j]];
                }
            }
            let mut inv = m.inv().map_err(Error::from)?;
            // u1(0) = 0: drop the dependence on the rhs wall slot
            for i in 0..n {
                inv[[i, 0]] = 0.0;
            }
            inv
        };
        Ok(StreamSolve { grid, alpha, mat })
    }

    /// Stream function with `phi(0) = phi(top) = 0`; zero at `alpha = 0`.
    pub fn phi(&self, omega: &Array1<c64>) -> Array1<c64> {
        if self.alpha == 0.0 {
            Array1::from_elem(self.grid.n, c64::new(0.0, 0.0))
        } else {
            apply_real(&self.mat, omega)
        }
    }

    /// Horizontal velocity `dz phi`, or the wall-anchored integral of
    /// `omega` at the zero mode.
    pub fn u1(&self, omega: &Array1<c64>) -> Array1<c64> {
        if self.alpha == 0.0 {
            apply_real(&self.mat, omega)
        } else {
            apply_real(&self.grid.d1, &self.phi(omega))
        }
    }
}

/// Fourier-side transport term at mode `n = n1 + n2`:
/// `i alpha_nu (n2 u1[w1] w2 - n1 phi[w1] dz w2)`, the mode-`n` component of
/// `u . grad omega` with `u` reconstructed from `w1` at wavenumber
/// `n1 alpha_nu`. `inv_n1` must be the stream solve at that wavenumber.
pub fn apply_q(
    inv_n1: &StreamSolve,
    alpha_nu: f64,
    n1: i32,
    n2: i32,
    w1: &GridFunction,
    w2: &GridFunction,
) -> Result<GridFunction> {
    if (inv_n1.alpha - n1 as f64 * alpha_nu).abs() > 1e-12 * (1.0 + alpha_nu.abs()) {
        return Err(Error::Usage(format!(
            "stream solve at alpha = {} does not match mode n1 = {n1} of alpha_nu = {alpha_nu}",
            inv_n1.alpha
        )));
    }
    let vals = q_term(inv_n1, alpha_nu, n1, n2, &w1.values, &w2.values);
    Ok(GridFunction::new(w1.grid.clone(), vals)?.with_alpha((n1 + n2) as f64 * alpha_nu))
}

fn q_term(
    inv_n1: &StreamSolve,
    alpha_nu: f64,
    n1: i32,
    n2: i32,
    w1: &Array1<c64>,
    w2: &Array1<c64>,
) -> Array1<c64> {
    let grid = &inv_n1.grid;
    let n = grid.n;
    let ia = c64::new(0.0, alpha_nu);
    let u1 = inv_n1.u1(w1);
    let mut out = Array1::from_elem(n, c64::new(0.0, 0.0));
    for j in 0..n {
        out[j] = ia * (n2 as f64) * u1[j] * w2[j];
    }
    if n1 != 0 {
        let phi = inv_n1.phi(w1);
        let dzw2 = apply_real(&grid.d1, w2);
        for j in 0..n {
            out[j] -= ia * (n1 as f64) * phi[j] * dzw2[j];
        }
    }
    out
}

/// Sampled difference between the heat-evolved and the stationary profile at
/// slow time `s = sqrt(nu) t`.
#[derive(Debug, Clone)]
pub struct ProfilePerturbation {
    pub s: f64,
    /// `U_s(s, z) - U(z)` on the grid nodes.
    pub du: Array1<f64>,
    /// `dz^2 U_s(s, z) - U''(z)` on the grid nodes.
    pub dd2u: Array1<f64>,
}

pub fn profile_perturbation(
    profile: &ShearProfile,
    grid: &GridRef,
    nu: f64,
    t: f64,
) -> Result<ProfilePerturbation> {
    let s = nu.sqrt() * t;
    let mut du = Array1::<f64>::zeros(grid.n);
    let mut dd2u = Array1::<f64>::zeros(grid.n);
    for j in 0..grid.n {
        let z = grid.z[j];
        du[j] = heat_evolve(profile, s, z)? - profile.deriv(0, z);
        dd2u[j] = heat_evolve_d2(profile, s, z)? - profile.deriv(2, z);
    }
    Ok(ProfilePerturbation { s, du, dd2u })
}

/// Perturbed-operator term
/// `nu^{-1/8} [U_s - U] (i alpha_n omega) + nu^{-1/8} u2 [dz^2 U_s - U'']`,
/// with `u2 = -i alpha_n phi[omega]`. `None` perturbation (stationary
/// profile) gives zero identically.
pub fn apply_s(
    inv_n: &StreamSolve,
    nu: f64,
    pert: Option<&ProfilePerturbation>,
    w: &GridFunction,
) -> Result<GridFunction> {
    let vals = match pert {
        None => Array1::from_elem(inv_n.grid.n, c64::new(0.0, 0.0)),
        Some(p) => s_term(inv_n, nu, p, &w.values),
    };
    Ok(GridFunction::new(inv_n.grid.clone(), vals)?.with_alpha(inv_n.alpha))
}

fn s_term(
    inv_n: &StreamSolve,
    nu: f64,
    pert: &ProfilePerturbation,
    w: &Array1<c64>,
) -> Array1<c64> {
    let grid = &inv_n.grid;
    let n = grid.n;
    let ia = c64::new(0.0, inv_n.alpha);
    let scale = nu.powf(-0.125);
    let phi = inv_n.phi(w);
    let mut out = Array1::from_elem(n, c64::new(0.0, 0.0));
    for j in 0..n {
        let u2 = -ia * phi[j];
        out[j] = scale * (pert.du[j] * ia * w[j] + u2 * pert.dd2u[j]);
    }
    out
}

/// Whether the base profile is frozen or heat-evolving during the ladder run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderMode {
    Stationary,
    TimeDependent,
}

#[derive(Debug, Clone, Copy)]
pub struct LadderOptions {
    /// The expansion's amplitude exponent `p` (seed amplitude `nu^p`).
    pub p_exp: usize,
    /// Truncation order `M`.
    pub m_order: usize,
    pub mode: LadderMode,
    pub t_end: f64,
    pub dt: f64,
    pub n_snapshots: usize,
    /// Measured `nu^{-1/4} Re lambda` of the seed mode, used only inside
    /// bound envelopes.
    pub gamma0: f64,
}

/// The built ladder: snapshots of every mode `omega_{j,n}` on a shared time
/// grid, with the wavenumber workspaces kept for residual assembly.
pub struct ModeLadder {
    pub alpha_nu: f64,
    pub nu: f64,
    pub lambda_nu: c64,
    pub p_exp: usize,
    pub m_order: usize,
    pub gamma0: f64,
    pub mode: LadderMode,
    pub grid: GridRef,
    pub times: Vec<f64>,
    /// `entries[&(j, n)][ti]` is `omega_{j,n}` at `times[ti]`.
    pub entries: BTreeMap<(usize, i32), Vec<GridFunction>>,
    /// Failure markers `(j, n, message)` for levels the propagator lost;
    /// levels above the first failure are not built.
    pub failures: Vec<(usize, i32, String)>,
    streams: BTreeMap<i32, StreamSolve>,
}

/// Index pairs `(k, l)` with `k + l + 8 p = j`.
fn q_pairs(j: usize, p_exp: usize) -> Vec<(usize, usize)> {
    match j.checked_sub(8 * p_exp) {
        None => Vec::new(),
        Some(s) => (0..=s).map(|k| (k, s - k)).collect(),
    }
}

impl ModeLadder {
    /// Modes present at level `j`.
    pub fn support(&self, j: usize) -> Vec<i32> {
        self.entries.keys().filter(|(jj, _)| *jj == j).map(|&(_, n)| n).collect()
    }

    /// Exact support law: no entry with `|n| >= 2^{j+1}`.
    pub fn support_law_holds(&self) -> bool {
        self.entries
            .keys()
            .all(|&(j, n)| (n.unsigned_abs() as u64) < (1u64 << (j as u64 + 1)))
    }

    /// Max over entries and snapshots of `|omega_{j,-n} - conj omega_{j,n}|`.
    pub fn reality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (&(j, n), snaps) in &self.entries {
            if n < 0 {
                continue;
            }
            let Some(mirror) = self.entries.get(&(j, -n)) else {
                return f64::INFINITY;
            };
            for (a, b) in snaps.iter().zip(mirror) {
                for k in 0..a.values.len() {
                    worst = worst.max((a.values[k].conj() - b.values[k]).norm());
                }
            }
        }
        worst
    }

    /// `omega_app(t_i) = nu^p sum_{j <= M} nu^{j/8} omega_j` as a family.
    pub fn assemble(&self, ti: usize) -> Result<ModeFamily> {
        if ti >= self.times.len() {
            return Err(Error::Usage(format!("snapshot index {ti} out of range")));
        }
        let mut fam = ModeFamily::new(self.alpha_nu);
        let mut acc: BTreeMap<i32, Array1<c64>> = BTreeMap::new();
        for (&(j, n), snaps) in &self.entries {
            let coef = self.nu.powf(self.p_exp as f64 + j as f64 / 8.0);
            let slot = acc
                .entry(n)
                .or_insert_with(|| Array1::from_elem(self.grid.n, c64::new(0.0, 0.0)));
            for k in 0..self.grid.n {
                slot[k] += c64::new(coef, 0.0) * snaps[ti].values[k];
            }
        }
        for (n, vals) in acc {
            fam.insert(n, GridFunction::new(self.grid.clone(), vals)?);
        }
        Ok(fam)
    }

    /// Residual of the truncated expansion at snapshot `ti`: the leftover
    /// perturbation term `nu^{p+(M+1)/8} S omega_M` plus every transport pair
    /// `nu^{2p+(k+l)/8} Q(omega_k, omega_l)` with `k + l > M + 1 - 8p`.
    pub fn residual_report(
        &self,
        ti: usize,
        profile: &ShearProfile,
        params: &BLNormParams,
    ) -> Result<(ModeFamily, ResidualReport)> {
        if ti >= self.times.len() {
            return Err(Error::Usage(format!("snapshot index {ti} out of range")));
        }
        let t = self.times[ti];
        let p = self.p_exp;
        let m_ord = self.m_order;
        let nu = self.nu;
        let mut acc: BTreeMap<i32, Array1<c64>> = BTreeMap::new();
        let add = |n: i32, coef: f64, vals: &Array1<c64>, acc: &mut BTreeMap<i32, Array1<c64>>| {
            let slot = acc
                .entry(n)
                .or_insert_with(|| Array1::from_elem(self.grid.n, c64::new(0.0, 0.0)));
            for k in 0..self.grid.n {
                slot[k] += c64::new(coef, 0.0) * vals[k];
            }
        };
        let mut parts_sum = 0.0;
        // leftover S term
        let mut s_term_norm = 0.0;
        if self.mode == LadderMode::TimeDependent {
            let pert = profile_perturbation(profile, &self.grid, nu, t)?;
            let coef = nu.powf(p as f64 + (m_ord as f64 + 1.0) / 8.0);
            let mut s_fam = ModeFamily::new(self.alpha_nu);
            for (&(j, n), snaps) in &self.entries {
                if j != m_ord {
                    continue;
                }
                let inv = self.stream(n)?;
                let vals = s_term(inv, nu, &pert, &snaps[ti].values);
                add(n, coef, &vals, &mut acc);
                let scaled = vals.mapv(|v| v * coef);
                s_fam.insert(n, GridFunction::new(self.grid.clone(), scaled)?);
            }
            if !s_fam.is_empty() {
                s_term_norm = sup_alpha_norm(&s_fam, params)?;
                parts_sum += s_term_norm;
            }
        }
        // leftover transport pairs
        let mut q_term_norms = Vec::new();
        let floor = m_ord as i64 + 1 - 8 * p as i64;
        for k in 0..=m_ord {
            for l in 0..=m_ord {
                if (k + l) as i64 <= floor {
                    continue;
                }
                let coef = nu.powf(2.0 * p as f64 + (k + l) as f64 / 8.0);
                let mut fam = ModeFamily::new(self.alpha_nu);
                let mut touched: BTreeMap<i32, Array1<c64>> = BTreeMap::new();
                for n1 in self.support(k) {
                    for n2 in self.support(l) {
                        let w1 = &self.entries[&(k, n1)][ti].values;
                        let w2 = &self.entries[&(l, n2)][ti].values;
                        let inv = self.stream(n1)?;
                        let vals = q_term(inv, self.alpha_nu, n1, n2, w1, w2);
                        let slot = touched.entry(n1 + n2).or_insert_with(|| {
                            Array1::from_elem(self.grid.n, c64::new(0.0, 0.0))
                        });
                        for idx in 0..self.grid.n {
                            slot[idx] += vals[idx];
                        }
                    }
                }
                if touched.is_empty() {
                    continue;
                }
                for (n, vals) in touched {
                    add(n, coef, &vals, &mut acc);
                    let scaled = vals.mapv(|v| v * coef);
                    fam.insert(n, GridFunction::new(self.grid.clone(), scaled)?);
                }
                let norm = sup_alpha_norm(&fam, params)?;
                parts_sum += norm;
                q_term_norms.push(((k, l), norm));
            }
        }
        let mut total_fam = ModeFamily::new(self.alpha_nu);
        for (n, vals) in acc {
            total_fam.insert(n, GridFunction::new(self.grid.clone(), vals)?);
        }
        let total = if total_fam.is_empty() {
            0.0
        } else {
            sup_alpha_norm(&total_fam, params)?
        };
        let envelope = residual_envelope(nu, p, m_ord, self.gamma0, t);
        Ok((
            total_fam,
            ResidualReport {
                t,
                s_term_norm,
                q_term_norms,
                parts_sum,
                total,
                envelope,
            },
        ))
    }

    fn stream(&self, n: i32) -> Result<&StreamSolve> {
        self.streams
            .get(&n)
            .ok_or_else(|| Error::Usage(format!("no stream workspace for mode {n}")))
    }
}

/// Residual envelope
/// `nu^{1/4} sum_{j=M+1}^{2M} nu^{-1/4 floor(j/8p)} (nu^p e^{gamma0 nu^{1/4} t})^{1+j/(8p)}`.
pub fn residual_envelope(nu: f64, p_exp: usize, m_order: usize, gamma0: f64, t: f64) -> f64 {
    let p8 = 8.0 * p_exp as f64;
    let amp = nu.powf(p_exp as f64) * (gamma0 * nu.powf(0.25) * t).exp();
    let mut sum = 0.0;
    for j in (m_order + 1)..=(2 * m_order) {
        let fl = (j / (8 * p_exp)) as f64;
        sum += nu.powf(-0.25 * fl) * amp.powf(1.0 + j as f64 / p8);
    }
    nu.powf(0.25) * sum
}

/// Per-term norms of the expansion residual at one snapshot.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub t: f64,
    pub s_term_norm: f64,
    /// `((k, l), norm)` for each leftover transport pair.
    pub q_term_norms: Vec<((usize, usize), f64)>,
    /// Sum of the individual term norms (triangle-inequality upper bound).
    pub parts_sum: f64,
    pub total: f64,
    pub envelope: f64,
}

/// Build the ladder by lockstep time integration: at every step each level
/// `j >= 1` advances with trapezoidal forcing `R_{j,n}` evaluated from the
/// lower levels at both step endpoints (lower levels are updated first, so
/// both endpoint states exist without storing histories).
pub fn build_ladder(
    sol: &EigenSolution,
    profile: &ShearProfile,
    opts: &LadderOptions,
) -> Result<ModeLadder> {
    if opts.p_exp == 0 {
        return Err(Error::Usage("amplitude exponent p must be >= 1".into()));
    }
    if opts.t_end <= 0.0 || opts.dt <= 0.0 || opts.n_snapshots == 0 {
        return Err(Error::Usage("need positive t_end, dt, and snapshot count".into()));
    }
    let grid = sol.omega.grid.clone();
    let alpha_nu = sol.alpha;
    let nu = sol.nu;
    let time_dependent = opts.mode == LadderMode::TimeDependent;

    // supports per level from the source recurrence
    let mut sets: Vec<BTreeSet<i32>> = vec![BTreeSet::from([1, -1])];
    for j in 1..=opts.m_order {
        let mut s = BTreeSet::new();
        if time_dependent {
            s.extend(sets[j - 1].iter().copied());
        }
        for (k, l) in q_pairs(j, opts.p_exp) {
            for &n1 in &sets[k] {
                for &n2 in &sets[l] {
                    s.insert(n1 + n2);
                }
            }
        }
        // support law |n| < 2^{j+1} is automatic; assert rather than clamp
        debug_assert!(s.iter().all(|&n| (n.unsigned_abs() as u64) < (1u64 << (j as u64 + 1))));
        sets.push(s);
    }

    let mut all_modes: BTreeSet<i32> = BTreeSet::new();
    for s in &sets {
        all_modes.extend(s.iter().copied());
    }
    let mut streams = BTreeMap::new();
    let mut ops: BTreeMap<i32, LinearizedOp> = BTreeMap::new();
    for &n in &all_modes {
        streams.insert(n, StreamSolve::new(grid.clone(), n as f64 * alpha_nu)?);
        ops.insert(n, LinearizedOp::new(profile, grid.clone(), n as f64 * alpha_nu, nu)?);
    }

    let steps_per_snap = ((opts.t_end / opts.n_snapshots as f64) / opts.dt).ceil().max(1.0) as usize;
    let steps = steps_per_snap * opts.n_snapshots;
    let dt = opts.t_end / steps as f64;

    // steppers only for driven levels; negative modes mirror the positive ones
    let mut steppers: BTreeMap<(usize, i32), ImexStepper> = BTreeMap::new();
    for j in 1..=opts.m_order {
        for &n in &sets[j] {
            if n >= 0 {
                steppers.insert((j, n), ImexStepper::new(&ops[&n], dt)?);
            }
        }
    }

    let zero = Array1::from_elem(grid.n, c64::new(0.0, 0.0));
    let seed_plus = sol.omega.values.clone();
    let seed_minus = seed_plus.mapv(|v| v.conj());
    let mut old: BTreeMap<(usize, i32), Array1<c64>> = BTreeMap::new();
    old.insert((0, 1), seed_plus.clone());
    old.insert((0, -1), seed_minus.clone());
    for j in 1..=opts.m_order {
        for &n in &sets[j] {
            old.insert((j, n), zero.clone());
        }
    }

    let mut times = vec![0.0];
    let mut entries: BTreeMap<(usize, i32), Vec<GridFunction>> = BTreeMap::new();
    let mut failures: Vec<(usize, i32, String)> = Vec::new();
    let record = |bank: &BTreeMap<(usize, i32), Array1<c64>>,
                  entries: &mut BTreeMap<(usize, i32), Vec<GridFunction>>|
     -> Result<()> {
        for (&(j, n), w) in bank {
            let f = GridFunction::new(grid.clone(), w.clone())?.with_alpha(n as f64 * alpha_nu);
            entries.entry((j, n)).or_default().push(f);
        }
        Ok(())
    };
    record(&old, &mut entries)?;

    // forcing R_{j,n} from a given bank state at time t
    let forcing = |j: usize,
                   n: i32,
                   bank: &BTreeMap<(usize, i32), Array1<c64>>,
                   pert: Option<&ProfilePerturbation>|
     -> Array1<c64> {
        let mut out = Array1::from_elem(grid.n, c64::new(0.0, 0.0));
        if let Some(p) = pert {
            if let Some(w) = bank.get(&(j - 1, n)) {
                let sv = s_term(&streams[&n], nu, p, w);
                for k in 0..grid.n {
                    out[k] += sv[k];
                }
            }
        }
        for (k_lvl, l_lvl) in q_pairs(j, opts.p_exp) {
            for &n1 in &sets[k_lvl] {
                let n2 = n - n1;
                if !sets[l_lvl].contains(&n2) {
                    continue;
                }
                let w1 = &bank[&(k_lvl, n1)];
                let w2 = &bank[&(l_lvl, n2)];
                let qv = q_term(&streams[&n1], alpha_nu, n1, n2, w1, w2);
                for k in 0..grid.n {
                    out[k] += qv[k];
                }
            }
        }
        out
    };

    let mut pert_now: Option<ProfilePerturbation> = if time_dependent {
        Some(profile_perturbation(profile, &grid, nu, 0.0)?)
    } else {
        None
    };
    'time: for step in 0..steps {
        let t_next = (step + 1) as f64 * dt;
        let pert_next = if time_dependent {
            Some(profile_perturbation(profile, &grid, nu, t_next)?)
        } else {
            None
        };
        let mut new = old.clone();
        let e_plus = (sol.lambda * c64::new(t_next, 0.0)).exp();
        new.insert((0, 1), seed_plus.mapv(|v| v * e_plus));
        new.insert((0, -1), seed_minus.mapv(|v| v * e_plus.conj()));
        for j in 1..=opts.m_order {
            let modes: Vec<i32> = sets[j].iter().copied().filter(|&n| n >= 0).collect();
            for n in modes {
                let f_now = forcing(j, n, &old, pert_now.as_ref());
                let f_next = forcing(j, n, &new, pert_next.as_ref());
                let mut w = old[&(j, n)].clone();
                let res = steppers
                    .get_mut(&(j, n))
                    .expect("stepper exists for every driven level")
                    .step(&ops[&n], &mut w, Some(&f_now), Some(&f_next));
                let bad = res.is_err() || w.iter().any(|v| !v.is_finite());
                if bad {
                    let msg = res
                        .err()
                        .map(|e| e.to_string())
                        .unwrap_or_else(|| format!("non-finite state at t = {t_next:.6}"));
                    failures.push((j, n, msg));
                    break 'time;
                }
                new.insert((j, n), w.clone());
                if sets[j].contains(&-n) && n > 0 {
                    new.insert((j, -n), w.mapv(|v| v.conj()));
                }
            }
        }
        old = new;
        pert_now = pert_next;
        if (step + 1) % steps_per_snap == 0 {
            times.push(t_next);
            record(&old, &mut entries)?;
        }
    }

    Ok(ModeLadder {
        alpha_nu,
        nu,
        lambda_nu: sol.lambda,
        p_exp: opts.p_exp,
        m_order: opts.m_order,
        gamma0: opts.gamma0,
        mode: opts.mode,
        grid,
        times,
        entries,
        failures,
        streams,
    })
}

/// One fitted constant of the level bounds: the trace over snapshots of
/// `||(i alpha_n)^a dz^b omega_j|| / envelope` with envelope
/// `nu^{a/8} nu^{-b/8} nu^{-1/4 floor(j/8p)} e^{gamma0 (1 + j/8p) nu^{1/4} t}`.
#[derive(Debug, Clone, Copy)]
pub struct BoundCheck {
    pub j: usize,
    pub a: usize,
    pub b: usize,
    /// Max ratio over the trace (the fitted constant).
    pub c0: f64,
    /// Min ratio over the settled part of the trace (`t >= t_end / 4`).
    pub c0_min: f64,
    /// `c0_settled_max / c0_min`; 1 for identically zero levels.
    pub uniformity: f64,
}

pub fn check_inductive_bounds(
    ladder: &ModeLadder,
    a_max: usize,
    params: &BLNormParams,
) -> Result<Vec<BoundCheck>> {
    let nu = ladder.nu;
    let p8 = 8.0 * ladder.p_exp as f64;
    let t_end = *ladder.times.last().unwrap_or(&0.0);
    let mut out = Vec::new();
    for j in 0..=ladder.m_order {
        let support = ladder.support(j);
        for a in 0..=a_max {
            for b in 0..=1usize {
                let mut c0: f64 = 0.0;
                let mut settled_max: f64 = 0.0;
                let mut settled_min = f64::INFINITY;
                for (ti, &t) in ladder.times.iter().enumerate() {
                    let mut num: f64 = 0.0;
                    for &n in &support {
                        let f = &ladder.entries[&(j, n)][ti];
                        let alpha_n = (n as f64 * ladder.alpha_nu).abs();
                        let g = if b == 0 { f.clone() } else { f.deriv() };
                        num = num.max(alpha_n.powi(a as i32) * bl_norm(&g, params));
                    }
                    let env = nu.powf(a as f64 / 8.0)
                        * nu.powf(-(b as f64) / 8.0)
                        * nu.powf(-0.25 * (j / (8 * ladder.p_exp)) as f64)
                        * (ladder.gamma0 * (1.0 + j as f64 / p8) * nu.powf(0.25) * t).exp();
                    let ratio = num / env;
                    c0 = c0.max(ratio);
                    if t >= t_end / 4.0 {
                        settled_max = settled_max.max(ratio);
                        settled_min = settled_min.min(ratio);
                    }
                }
                let uniformity = if settled_max == 0.0 {
                    1.0
                } else {
                    settled_max / settled_min.max(f64::MIN_POSITIVE)
                };
                out.push(BoundCheck {
                    j,
                    a,
                    b,
                    c0,
                    c0_min: if settled_min.is_finite() { settled_min } else { 0.0 },
                    uniformity,
                });
            }
        }
    }
    Ok(out)
}
