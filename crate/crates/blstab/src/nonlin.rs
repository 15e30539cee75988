//! Truncated nonlinear experiment: evolve the perturbation vorticity about a
//! stationary shear profile on the wavenumber lattice `alpha_n = n alpha_nu`,
//! seeded with a small multiple of the leading viscous mode, and measure the
//! exponential phase and the amplitude-crossing times.
//!
//! Each mode advances with the shared IMEX stepper (linear part), while the
//! quadratic transport couples modes through a direct convolution that is
//! truncated at two thirds of the retained band. Direct mode products are
//! alias-free; the cut plays the role of the classical dealiasing pad and
//! keeps the top band available as a resolution sentinel.

use std::collections::BTreeMap;

use ndarray::Array1;
use num_complex::Complex64 as c64;

use crate::error::{Error, Result};
use crate::expansion::StreamSolve;
use crate::fit::{linear_fit, LinFit};
use crate::grid::{apply_real, GridFunction, GridRef, ModeFamily};
use crate::linprop::ImexStepper;
use crate::norms::{triple_norm, BLNormParams};
use crate::profiles::ShearProfile;
use crate::stability::{os_leading, EigenSolution, LinearizedOp, OsOptions};

/// Knobs of one nonlinear run.
#[derive(Debug, Clone, Copy)]
pub struct NonlinOptions {
    /// Amplitude exponent: the default seed amplitude is `nu^{p_exp}`.
    pub p_exp: usize,
    pub nu: f64,
    /// Seed wavenumber; `None` picks `2.6 nu^{1/8}`.
    pub alpha: Option<f64>,
    /// Velocity sup of the seed; `None` picks `nu^{p_exp}`.
    pub seed_amplitude: Option<f64>,
    pub t_end: f64,
    /// `None` picks a step resolving the fastest retained advection.
    pub dt: Option<f64>,
    /// Retained band `|n| <= n_modes`.
    pub n_modes: usize,
    pub n_snapshots: usize,
    /// Crossing threshold factor in the level `theta0 nu^{5/8}`.
    pub theta0: f64,
    /// Keep full mode states at every snapshot (memory-heavy diagnostics).
    pub keep_snapshots: bool,
}

impl NonlinOptions {
    pub fn defaults(nu: f64, t_end: f64) -> Self {
        NonlinOptions {
            p_exp: 1,
            nu,
            alpha: None,
            seed_amplitude: None,
            t_end,
            dt: None,
            n_modes: 8,
            n_snapshots: 64,
            theta0: 0.1,
            keep_snapshots: false,
        }
    }
}

/// Full spectral state at one instant with its amplitude diagnostics.
#[derive(Debug, Clone)]
pub struct SimState {
    pub t: f64,
    pub alpha_nu: f64,
    pub nu: f64,
    pub omega: ModeFamily,
    /// Horizontal velocity modes `dz phi_n` (wall integral of `omega_0` at n = 0).
    pub u1: ModeFamily,
    /// Vertical velocity modes `-i alpha_n phi_n`; zero at the wall every mode.
    pub u2: ModeFamily,
    /// Physical sup of the velocity perturbation.
    pub v_sup: f64,
    /// Physical sup of the vorticity perturbation.
    pub omega_sup: f64,
    pub triple: f64,
}

/// Scalar trace of a run at one snapshot.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct TimeSeriesPoint {
    pub t: f64,
    pub v_sup: f64,
    pub omega_sup: f64,
    pub triple: f64,
}

/// Outcome summary of a run.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Verdict {
    pub lambda_re: f64,
    pub lambda_im: f64,
    /// Log-linear growth rate of `v_sup` over the linear phase.
    pub growth_rate: Option<f64>,
    /// `|rate - Re lambda| / |Re lambda|`.
    pub rate_rel_err: Option<f64>,
    /// Predicted crossing time of `theta0 nu^{5/8}` from the seed amplitude.
    pub t1_predicted: Option<f64>,
    /// Measured crossing time of the same level.
    pub t1_measured: Option<f64>,
    pub t1_rel_err: Option<f64>,
    pub blow_up: bool,
    pub under_resolved: bool,
    pub final_omega_sup: f64,
}

pub struct ExperimentResult {
    pub series: Vec<TimeSeriesPoint>,
    pub verdict: Verdict,
    pub seed: EigenSolution,
    pub state: SimState,
    /// Populated only with `keep_snapshots`.
    pub snapshots: Vec<SimState>,
}

/// Post-run measurements on a scalar trace.
#[derive(Debug, Clone, serde::Serialize)]
pub struct InstabilityMeasure {
    pub rate_fit: LinFit,
    /// `(level, first crossing time of v_sup)` per requested level.
    pub t_cross: Vec<(f64, Option<f64>)>,
    pub final_omega_sup: f64,
    /// `omega_sup(end) / omega_sup(0)`; infinite when the seed is zero.
    pub vorticity_growth_factor: f64,
}

/// Mode convolution of the transport term over a symmetric family:
/// entry `n` collects `i alpha_nu (n2 u1_{n1} omega_{n2} - n1 phi_{n1} dz omega_{n2})`
/// over all retained `n1 + n2 = n` with `|n1|, |n2|, |n| <= cut`.
pub fn convective_term(omega: &ModeFamily, cut: i32) -> Result<ModeFamily> {
    let Some(f0) = omega.modes.values().next() else {
        return Err(Error::Usage("convective term of an empty family".into()));
    };
    let grid = f0.grid.clone();
    let mut streams = BTreeMap::new();
    for &n in omega.modes.keys() {
        if n >= 0 && n <= cut {
            streams.insert(n, StreamSolve::new(grid.clone(), n as f64 * omega.alpha_base)?);
        }
    }
    let mut bank: BTreeMap<i32, Array1<c64>> = BTreeMap::new();
    for (&n, f) in &omega.modes {
        if n >= 0 {
            bank.insert(n, f.values.clone());
        }
    }
    let out = convolve(&grid, omega.alpha_base, &bank, &streams, cut);
    let mut fam = ModeFamily::new(omega.alpha_base);
    for (n, vals) in out {
        fam.insert(-n, GridFunction::new(grid.clone(), vals.mapv(|v| v.conj()))?);
        fam.insert(n, GridFunction::new(grid.clone(), vals)?);
    }
    Ok(fam)
}

/// Convolution on the nonnegative half of a conjugate-symmetric bank; the
/// negative-mode factors are reconstructed by conjugation on the fly.
fn convolve(
    grid: &GridRef,
    alpha_nu: f64,
    bank: &BTreeMap<i32, Array1<c64>>,
    streams: &BTreeMap<i32, StreamSolve>,
    cut: i32,
) -> BTreeMap<i32, Array1<c64>> {
    let m = grid.n;
    // per-mode factors on the nonnegative half
    let mut u1 = BTreeMap::new();
    let mut phi = BTreeMap::new();
    let mut dzw = BTreeMap::new();
    for (&n, w) in bank {
        if n > cut {
            continue;
        }
        let s = &streams[&n];
        u1.insert(n, s.u1(w));
        phi.insert(n, s.phi(w));
        dzw.insert(n, apply_real(&grid.d1, w));
    }
    let fetch = |map: &BTreeMap<i32, Array1<c64>>, n: i32, j: usize| -> Option<c64> {
        if n >= 0 {
            map.get(&n).map(|v| v[j])
        } else {
            map.get(&-n).map(|v| v[j].conj())
        }
    };
    let ia = c64::new(0.0, alpha_nu);
    let mut out = BTreeMap::new();
    for n in 0..=cut {
        let mut acc = Array1::from_elem(m, c64::new(0.0, 0.0));
        let mut touched = false;
        for n1 in -cut..=cut {
            let n2 = n - n1;
            if n2.abs() > cut {
                continue;
            }
            let have = if n1 >= 0 { u1.contains_key(&n1) } else { u1.contains_key(&-n1) };
            let have2 = if n2 >= 0 { bank.contains_key(&n2) } else { bank.contains_key(&-n2) };
            if !have || !have2 {
                continue;
            }
            touched = true;
            for j in 0..m {
                let a = fetch(&u1, n1, j).unwrap() * fetch(bank, n2, j).unwrap() * (n2 as f64);
                let b = fetch(&phi, n1, j).unwrap() * fetch(&dzw, n2, j).unwrap() * (n1 as f64);
                acc[j] += ia * (a - b);
            }
        }
        if touched {
            out.insert(n, acc);
        }
    }
    out
}

fn build_state(
    grid: &GridRef,
    bank: &BTreeMap<i32, Array1<c64>>,
    streams: &BTreeMap<i32, StreamSolve>,
    alpha_nu: f64,
    nu: f64,
    t: f64,
    params: &BLNormParams,
) -> Result<SimState> {
    let mut omega = ModeFamily::new(alpha_nu);
    let mut u1 = ModeFamily::new(alpha_nu);
    let mut u2 = ModeFamily::new(alpha_nu);
    for (&n, w) in bank {
        let s = &streams[&n];
        let u1v = s.u1(w);
        let phi = s.phi(w);
        let ia_n = c64::new(0.0, n as f64 * alpha_nu);
        let u2v = phi.mapv(|v| -ia_n * v);
        let push = |fam: &mut ModeFamily, vals: &Array1<c64>| -> Result<()> {
            if n > 0 {
                fam.insert(-n, GridFunction::new(grid.clone(), vals.mapv(|v| v.conj()))?);
            }
            fam.insert(n, GridFunction::new(grid.clone(), vals.clone())?);
            Ok(())
        };
        push(&mut omega, w)?;
        push(&mut u1, &u1v)?;
        push(&mut u2, &u2v)?;
    }
    // physical sups on an x lattice fine enough for the retained band
    let nx = 8 * bank.len().max(2);
    let period = 2.0 * std::f64::consts::PI / alpha_nu;
    let mut v_sup: f64 = 0.0;
    let mut omega_sup: f64 = 0.0;
    for k in 0..nx {
        let x = period * k as f64 / nx as f64;
        for zi in 0..grid.n {
            let a = u1.physical_at(x, zi);
            let b = u2.physical_at(x, zi);
            v_sup = v_sup.max((a.norm_sqr() + b.norm_sqr()).sqrt());
            omega_sup = omega_sup.max(omega.physical_at(x, zi).norm());
        }
    }
    let triple = triple_norm(&omega, nu, params)?;
    Ok(SimState {
        t,
        alpha_nu,
        nu,
        omega,
        u1,
        u2,
        v_sup,
        omega_sup,
        triple,
    })
}

/// Evolve the seeded truncated system and summarize the outcome. `extra`
/// optionally adds a per-mode forcing `f(t, n)` on the nonnegative half
/// (remainder-equation experiments); the run itself stays unforced otherwise.
pub fn run_experiment(
    profile: &ShearProfile,
    grid: GridRef,
    opts: &NonlinOptions,
    extra: Option<&dyn Fn(f64, i32) -> Array1<c64>>,
) -> Result<ExperimentResult> {
    if opts.n_modes < 8 {
        return Err(Error::Usage(format!(
            "need at least 8 retained modes, got {}",
            opts.n_modes
        )));
    }
    if opts.t_end <= 0.0 || opts.n_snapshots == 0 {
        return Err(Error::Usage("need positive t_end and snapshot count".into()));
    }
    if opts.theta0 <= 0.0 {
        return Err(Error::Usage("theta0 must be positive".into()));
    }
    let nu = opts.nu;
    let alpha = opts.alpha.unwrap_or(2.6 * nu.powf(0.125));
    let amp = opts
        .seed_amplitude
        .unwrap_or_else(|| nu.powf(opts.p_exp as f64));
    if amp < 0.0 {
        return Err(Error::Usage("seed amplitude must be nonnegative".into()));
    }
    let params = BLNormParams::defaults(nu).with_p(opts.p_exp);
    let cut = (2 * opts.n_modes as i32) / 3;

    let sol = os_leading(profile, grid.clone(), alpha, nu, &OsOptions::default())?
        .ok_or_else(|| Error::Eigensolver("no accepted mode at the seed wavenumber".into()))?;

    let mut streams = BTreeMap::new();
    let mut ops = BTreeMap::new();
    for n in 0..=opts.n_modes as i32 {
        streams.insert(n, StreamSolve::new(grid.clone(), n as f64 * alpha)?);
        ops.insert(n, LinearizedOp::new(profile, grid.clone(), n as f64 * alpha, nu)?);
    }

    // seed scaled so the physical velocity sup of the +-1 pair equals amp
    let mut bank: BTreeMap<i32, Array1<c64>> = BTreeMap::new();
    let zero = Array1::from_elem(grid.n, c64::new(0.0, 0.0));
    for n in 0..=opts.n_modes as i32 {
        bank.insert(n, zero.clone());
    }
    if amp > 0.0 {
        bank.insert(1, sol.omega.values.clone());
        let unit = build_state(&grid, &bank, &streams, alpha, nu, 0.0, &params)?;
        if unit.v_sup <= 0.0 {
            return Err(Error::Numerical("seed mode has zero velocity".into()));
        }
        let scale = c64::new(amp / unit.v_sup, 0.0);
        bank.insert(1, sol.omega.values.mapv(|v| v * scale));
    }

    let dt = opts
        .dt
        .unwrap_or_else(|| (0.2 / (1.0 + alpha * cut as f64)).min(opts.t_end / (4.0 * opts.n_snapshots as f64)));
    let steps_per_snap = ((opts.t_end / opts.n_snapshots as f64) / dt).ceil().max(1.0) as usize;
    let steps = steps_per_snap * opts.n_snapshots;
    let dt = opts.t_end / steps as f64;
    let mut steppers: BTreeMap<i32, ImexStepper> = BTreeMap::new();
    for n in 0..=opts.n_modes as i32 {
        steppers.insert(n, ImexStepper::new(&ops[&n], dt)?);
    }

    let state0 = build_state(&grid, &bank, &streams, alpha, nu, 0.0, &params)?;
    let mut series = vec![TimeSeriesPoint {
        t: 0.0,
        v_sup: state0.v_sup,
        omega_sup: state0.omega_sup,
        triple: state0.triple,
    }];
    let mut snapshots = if opts.keep_snapshots {
        vec![state0.clone()]
    } else {
        Vec::new()
    };
    let mut last_state = state0;
    let mut blow_up = false;

    let mut prev_nl: Option<BTreeMap<i32, Array1<c64>>> = None;
    'time: for step in 0..steps {
        let t_now = step as f64 * dt;
        let t_next = t_now + dt;
        let cur_nl = convolve(&grid, alpha, &bank, &streams, cut);
        // second-order midpoint value of the quadratic term from the last
        // two evaluations (first step falls back to the endpoint value)
        let nl_half = |n: i32| -> Option<Array1<c64>> {
            let cur = cur_nl.get(&n)?;
            match prev_nl.as_ref().and_then(|p| p.get(&n)) {
                Some(prev) => {
                    let mut v = cur.mapv(|x| x * 1.5);
                    for j in 0..v.len() {
                        v[j] -= 0.5 * prev[j];
                    }
                    Some(v)
                }
                None => Some(cur.clone()),
            }
        };
        for n in 0..=opts.n_modes as i32 {
            let mut f_now = nl_half(n);
            let mut f_next = f_now.clone();
            if let Some(ext) = extra {
                let mut a = f_now.take().unwrap_or_else(|| zero.clone());
                let mut b = f_next.take().unwrap_or_else(|| zero.clone());
                let e0 = ext(t_now, n);
                let e1 = ext(t_next, n);
                for j in 0..grid.n {
                    a[j] += e0[j];
                    b[j] += e1[j];
                }
                f_now = Some(a);
                f_next = Some(b);
            }
            let mut w = bank[&n].clone();
            steppers
                .get_mut(&n)
                .expect("stepper per retained mode")
                .step(&ops[&n], &mut w, f_now.as_ref(), f_next.as_ref())?;
            if w.iter().any(|v| !v.is_finite()) {
                blow_up = true;
                break 'time;
            }
            bank.insert(n, w);
        }
        prev_nl = Some(cur_nl);
        if (step + 1) % steps_per_snap == 0 {
            let st = build_state(&grid, &bank, &streams, alpha, nu, t_next, &params)?;
            if amp > 0.0 && st.omega_sup > 1e6 * amp {
                blow_up = true;
            }
            series.push(TimeSeriesPoint {
                t: t_next,
                v_sup: st.v_sup,
                omega_sup: st.omega_sup,
                triple: st.triple,
            });
            if opts.keep_snapshots {
                snapshots.push(st.clone());
            }
            last_state = st;
            if blow_up {
                break 'time;
            }
        }
    }

    // resolution sentinel: relative energy in the top two convolved bands
    let mut e_top = 0.0;
    let mut e_tot = 0.0;
    for (&n, w) in &bank {
        let e: f64 = w.iter().map(|v| v.norm_sqr()).sum();
        let mult = if n == 0 { 1.0 } else { 2.0 };
        e_tot += mult * e;
        if n >= cut - 1 {
            e_top += mult * e;
        }
    }
    let under_resolved = e_tot > 0.0 && e_top / e_tot > 1e-3;

    let level_theta = opts.theta0 * nu.powf(0.625);
    let levels = [nu.powf(0.75), nu.powf(0.625), level_theta];
    let measure = if amp > 0.0 {
        measure_instability(&series, nu, &levels).ok()
    } else {
        None
    };
    let growth_rate = measure.as_ref().map(|m| m.rate_fit.slope);
    let rate_rel_err = growth_rate
        .filter(|_| sol.lambda.re != 0.0)
        .map(|r| (r - sol.lambda.re).abs() / sol.lambda.re.abs());
    let t1_predicted = (sol.lambda.re > 0.0 && amp > 0.0 && level_theta > amp)
        .then(|| (level_theta / amp).ln() / sol.lambda.re);
    let t1_measured = measure
        .as_ref()
        .and_then(|m| m.t_cross.iter().find(|(l, _)| *l == level_theta).and_then(|(_, t)| *t));
    let t1_rel_err = match (t1_predicted, t1_measured) {
        (Some(p), Some(m)) if p > 0.0 => Some((m - p).abs() / p),
        _ => None,
    };
    let verdict = Verdict {
        lambda_re: sol.lambda.re,
        lambda_im: sol.lambda.im,
        growth_rate,
        rate_rel_err,
        t1_predicted,
        t1_measured,
        t1_rel_err,
        blow_up,
        under_resolved,
        final_omega_sup: last_state.omega_sup,
    };
    Ok(ExperimentResult {
        series,
        verdict,
        seed: sol,
        state: last_state,
        snapshots,
    })
}

/// Log-linear fit of the exponential phase plus level-crossing times.
///
/// The linear phase is the window where `v_sup` has grown past the seed by
/// 20 percent but still sits below `0.01 nu^{5/8}`; fewer than three such
/// snapshots is a fit refusal.
pub fn measure_instability(
    series: &[TimeSeriesPoint],
    nu: f64,
    levels: &[f64],
) -> Result<InstabilityMeasure> {
    if series.len() < 3 {
        return Err(Error::Usage("need at least 3 snapshots to measure".into()));
    }
    let v0 = series[0].v_sup;
    if v0 <= 0.0 {
        return Err(Error::Usage("series starts from a zero seed".into()));
    }
    let cap = 0.01 * nu.powf(0.625);
    let mut ts = Vec::new();
    let mut ln_v = Vec::new();
    for p in series {
        if p.v_sup >= 1.2 * v0 && p.v_sup <= cap {
            ts.push(p.t);
            ln_v.push(p.v_sup.ln());
        }
    }
    if ts.len() < 3 {
        return Err(Error::Numerical(
            "no linear phase detected (seed too large or run too short)".into(),
        ));
    }
    let rate_fit = linear_fit(&ts, &ln_v)?;
    let mut t_cross = Vec::new();
    for &level in levels {
        let mut hit = None;
        for w in series.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if a.v_sup < level && b.v_sup >= level && a.v_sup > 0.0 {
                let f = (level.ln() - a.v_sup.ln()) / (b.v_sup.ln() - a.v_sup.ln());
                hit = Some(a.t + f * (b.t - a.t));
                break;
            }
        }
        if hit.is_none() && series[0].v_sup >= level {
            hit = Some(0.0);
        }
        t_cross.push((level, hit));
    }
    let w0 = series[0].omega_sup;
    let w_end = series.last().unwrap().omega_sup;
    Ok(InstabilityMeasure {
        rate_fit,
        t_cross,
        final_omega_sup: w_end,
        vorticity_growth_factor: if w0 > 0.0 { w_end / w0 } else { f64::INFINITY },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Backend, Mapping, SemiInfiniteGrid};

    fn grid(n: usize) -> GridRef {
        SemiInfiniteGrid::build(n, Backend::Spectral, Mapping::default_truncated()).unwrap()
    }

    fn synthetic(amp: f64, rate: f64, n: usize, dt: f64) -> Vec<TimeSeriesPoint> {
        (0..n)
            .map(|k| {
                let t = k as f64 * dt;
                let v = amp * (rate * t).exp();
                TimeSeriesPoint {
                    t,
                    v_sup: v,
                    omega_sup: 100.0 * v,
                    triple: v,
                }
            })
            .collect()
    }

    #[test]
    fn rejects_bad_arguments() {
        let p = ShearProfile::exponential();
        let g = grid(80);
        let mut o = NonlinOptions::defaults(1e-6, 10.0);
        o.n_modes = 4;
        assert!(run_experiment(&p, g.clone(), &o, None).is_err());
        let mut o = NonlinOptions::defaults(1e-6, -1.0);
        o.t_end = -1.0;
        assert!(run_experiment(&p, g.clone(), &o, None).is_err());
        let mut o = NonlinOptions::defaults(1e-6, 10.0);
        o.theta0 = 0.0;
        assert!(run_experiment(&p, g, &o, None).is_err());
    }

    #[test]
    fn zero_seed_state_is_exactly_stationary() {
        let p = ShearProfile::exponential();
        let g = grid(140);
        let mut o = NonlinOptions::defaults(1e-6, 50.0);
        o.seed_amplitude = Some(0.0);
        o.dt = Some(0.5);
        o.n_snapshots = 10;
        let r = run_experiment(&p, g, &o, None).unwrap();
        for pt in &r.series {
            assert!(pt.v_sup <= 1e-9, "velocity drift {} at t = {}", pt.v_sup, pt.t);
            assert!(pt.omega_sup <= 1e-9, "vorticity drift {} at t = {}", pt.omega_sup, pt.t);
        }
        assert!(!r.verdict.blow_up);
        assert!(!r.verdict.under_resolved);
    }

    #[test]
    fn synthetic_exponential_rate_and_crossings_recovered() {
        let nu = 1e-10f64;
        let rate = 0.01;
        let series = synthetic(1e-10, rate, 600, 1.0);
        let levels = [1e-9, 5e-9];
        let m = measure_instability(&series, nu, &levels).unwrap();
        assert!((m.rate_fit.slope - rate).abs() < 1e-9);
        for &(level, t) in &m.t_cross {
            let expect = (level / 1e-10f64).ln() / rate;
            let got = t.expect("level crossed");
            assert!((got - expect).abs() < 1e-6, "level {level}: {got} vs {expect}");
        }
        // doubling the seed shifts every crossing back by ln 2 / rate
        let series2 = synthetic(2e-10, rate, 600, 1.0);
        let m2 = measure_instability(&series2, nu, &levels).unwrap();
        let shift = 2.0f64.ln() / rate;
        for (&(_, t1), &(_, t2)) in m.t_cross.iter().zip(&m2.t_cross) {
            let d = t1.unwrap() - t2.unwrap();
            assert!((d - shift).abs() < 1e-6, "shift {d} vs {shift}");
        }
        assert!((m.vorticity_growth_factor - (rate * 599.0).exp()).abs() < 1e-3 * m.vorticity_growth_factor);
    }

    #[test]
    fn flat_series_is_a_fit_refusal() {
        let series = synthetic(1e-8, 0.0, 50, 1.0);
        assert!(measure_instability(&series, 1e-10, &[1e-7]).is_err());
    }

    #[test]
    fn nonlinear_run_keeps_reality_and_transfers_to_harmonics() {
        let p = ShearProfile::exponential();
        let g = grid(140);
        let nu = 1e-6;
        let mut o = NonlinOptions::defaults(nu, 40.0);
        o.seed_amplitude = Some(1e-3);
        o.dt = Some(0.1);
        o.n_snapshots = 8;
        o.keep_snapshots = true;
        let r = run_experiment(&p, g, &o, None).unwrap();
        assert!(!r.verdict.blow_up);
        let st = &r.state;
        assert!(st.omega.reality_defect() < 1e-12, "defect {}", st.omega.reality_defect());
        for (&n, f) in &st.u2.modes {
            assert!(
                f.values[0].norm() < 1e-14,
                "u2 mode {n} wall value {}",
                f.values[0].norm()
            );
        }
        // quadratic transfer populates the zero mode and the second harmonic
        assert!(st.omega.get(2).unwrap().sup_abs() > 0.0);
        assert!(st.omega.get(0).unwrap().sup_abs() > 0.0);
        // zero mode of a real field is real
        let im0 = st
            .omega
            .get(0)
            .unwrap()
            .values
            .iter()
            .map(|v| v.im.abs())
            .fold(0.0, f64::max);
        assert!(im0 < 1e-12, "zero-mode imaginary part {im0}");
    }

    #[test]
    fn enstrophy_budget_closes_on_interior_nodes() {
        // central-difference d/dt of the interior enstrophy matches
        // 2 Re <omega, L omega + N(omega)> from the same snapshots
        let p = ShearProfile::exponential();
        let g = grid(140);
        let nu = 1e-6;
        let mut o = NonlinOptions::defaults(nu, 10.0);
        o.seed_amplitude = Some(1e-3);
        o.dt = Some(0.05);
        o.n_snapshots = 40;
        o.keep_snapshots = true;
        let r = run_experiment(&p, g.clone(), &o, None).unwrap();
        let cut = (2 * o.n_modes as i32) / 3;
        let mid = 20;
        let enstrophy = |st: &SimState| -> f64 {
            let mut e = 0.0;
            for f in st.omega.modes.values() {
                for j in 1..g.n - 1 {
                    e += g.weights[j] * f.values[j].norm_sqr();
                }
            }
            e
        };
        let de = (enstrophy(&r.snapshots[mid + 1]) - enstrophy(&r.snapshots[mid - 1]))
            / (r.snapshots[mid + 1].t - r.snapshots[mid - 1].t);
        let st = &r.snapshots[mid];
        let nl = convective_term(&st.omega, cut).unwrap();
        let mut rhs = 0.0;
        for (&n, f) in &st.omega.modes {
            let op = LinearizedOp::new(&p, g.clone(), st.alpha_nu * n as f64, nu).unwrap();
            let lw = op.apply(&f.values);
            for j in 1..g.n - 1 {
                let mut total = lw[j];
                if let Some(q) = nl.get(n) {
                    total += q.values[j];
                }
                rhs += 2.0 * g.weights[j] * (f.values[j].conj() * total).re;
            }
        }
        let scale = de.abs().max(rhs.abs());
        assert!(
            (de - rhs).abs() < 0.05 * scale,
            "budget defect {} vs scale {scale}",
            (de - rhs).abs()
        );
    }

    #[test]
    fn linear_phase_rate_matches_the_seed_eigenvalue() {
        let p = ShearProfile::exponential();
        let g = grid(240);
        let nu = 1e-10f64;
        let mut o = NonlinOptions::defaults(nu, 6500.0);
        o.alpha = Some(2.5 * nu.powf(0.125));
        o.dt = Some(0.5);
        o.n_snapshots = 52;
        let r = run_experiment(&p, g, &o, None).unwrap();
        assert!(!r.verdict.blow_up);
        assert!(r.verdict.lambda_re > 0.0, "seed mode should grow, got {}", r.verdict.lambda_re);
        let rel = r.verdict.rate_rel_err.expect("linear phase fit");
        assert!(rel < 0.1, "rate error {rel}");
        // crossing of a mid-run level agrees with pure exponential growth
        let amp = r.series[0].v_sup;
        let level = 10.0 * amp;
        let m = measure_instability(&r.series, nu, &[level]).unwrap();
        let t = m.t_cross[0].1.expect("level crossed");
        let expect = (level / amp).ln() / r.verdict.lambda_re;
        assert!(
            (t - expect).abs() < 0.25 * expect,
            "crossing {t} vs predicted {expect}"
        );
    }
}
