use blstab::expansion::{build_ladder, LadderMode, LadderOptions};
use blstab::grid::{Backend, Mapping, SemiInfiniteGrid};
use blstab::norms::{bl_norm, BLNormParams};
use blstab::profiles::ShearProfile;
use blstab::stability::{os_leading, OsOptions};

fn main() {
    let p = ShearProfile::exponential();
    let g = SemiInfiniteGrid::build(
        240,
        Backend::Spectral,
        Mapping::Truncated { z_max: 50.0, cluster: 8.0 },
    )
    .unwrap();
    let nu = 1e-12f64;
    let alpha = 2.6 * nu.powf(0.125);
    let sol = os_leading(&p, g.clone(), alpha, nu, &OsOptions::default())
        .unwrap()
        .expect("growing seed");
    let gamma0 = sol.lambda.re / nu.powf(0.25);
    let t_star = (1.0 - 0.3) * (1.0 / nu).ln() / (gamma0 * nu.powf(0.25));
    let ladder = build_ladder(
        &sol,
        &p,
        &LadderOptions {
            p_exp: 1,
            m_order: 3,
            mode: LadderMode::TimeDependent,
            t_end: t_star,
            dt: 0.5,
            n_snapshots: 16,
            gamma0,
        },
    )
    .unwrap();
    let params = BLNormParams::defaults(nu);
    println!("gamma0 {gamma0:.4} t_star {t_star:.1}");
    for j in 1..=3usize {
        println!("level j={j}:");
        for (ti, &t) in ladder.times.iter().enumerate() {
            let mut num: f64 = 0.0;
            for n in ladder.support(j) {
                let f = &ladder.entries[&(j, n)][ti];
                num = num.max(bl_norm(f, &params));
            }
            let env = (gamma0 * (1.0 + j as f64 / 8.0) * nu.powf(0.25) * t).exp();
            println!("  x {:6.2} t {:9.1} ratio {:.4e}", gamma0 * nu.powf(0.25) * t, t, num / env);
        }
    }
}
