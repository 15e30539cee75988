//! Run configuration: one TOML file drives every subcommand, with CLI flags
//! overriding the output directory, worker count, and rng seed.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Backend, GridRef, Mapping, SemiInfiniteGrid};
use crate::profiles::{ProfileRef, ShearProfile};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    /// One of `exponential`, `erf`, `tanh`, `jet`, `table`.
    pub kind: String,
    #[serde(default = "one")]
    pub b: f64,
    #[serde(default = "one")]
    pub z0: f64,
    /// Two-column CSV `(z, U)` for `kind = "table"`.
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default = "default_eta0")]
    pub eta0: f64,
    #[serde(default = "one")]
    pub u_plus: f64,
}

fn one() -> f64 {
    1.0
}

fn default_eta0() -> f64 {
    0.5
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig {
            kind: "exponential".into(),
            b: 1.0,
            z0: 1.0,
            path: None,
            eta0: 0.5,
            u_plus: 1.0,
        }
    }
}

impl ProfileConfig {
    pub fn build(&self) -> Result<ProfileRef> {
        match self.kind.as_str() {
            "exponential" => Ok(ShearProfile::exponential()),
            "erf" => Ok(ShearProfile::erf_profile()),
            "tanh" => Ok(ShearProfile::tanh_shear(self.b, self.z0)),
            "jet" => Ok(ShearProfile::jet()),
            "table" => {
                let path = self.path.as_ref().ok_or_else(|| {
                    Error::Config("profile.path is required for kind = \"table\"".into())
                })?;
                if !path.exists() {
                    return Err(Error::Config(format!(
                        "profile.path does not exist: {}",
                        path.display()
                    )));
                }
                let mut zs = Vec::new();
                let mut us = Vec::new();
                let mut rdr = csv::ReaderBuilder::new()
                    .has_headers(false)
                    .comment(Some(b'#'))
                    .from_path(path)
                    .map_err(|e| Error::Config(format!("profile table: {e}")))?;
                for rec in rdr.records() {
                    let rec = rec.map_err(|e| Error::Config(format!("profile table: {e}")))?;
                    if rec.len() < 2 {
                        return Err(Error::Config("profile table rows need two columns".into()));
                    }
                    let parse = |s: &str, what: &str| -> Result<f64> {
                        s.trim()
                            .parse()
                            .map_err(|_| Error::Config(format!("profile table: bad {what} value '{s}'")))
                    };
                    zs.push(parse(&rec[0], "z")?);
                    us.push(parse(&rec[1], "U")?);
                }
                let name = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "table".into());
                ShearProfile::tabulated(&name, zs, us, self.eta0, self.u_plus)
            }
            other => Err(Error::Config(format!(
                "profile.kind must be one of exponential|erf|tanh|jet|table, got '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_n")]
    pub n: usize,
    /// `spectral` or `fd`.
    #[serde(default = "default_backend")]
    pub backend: String,
    /// `truncated` or `algebraic`.
    #[serde(default = "default_mapping")]
    pub mapping: String,
    #[serde(default = "default_z_max")]
    pub z_max: f64,
    #[serde(default = "default_cluster")]
    pub cluster: f64,
    #[serde(default = "default_scale")]
    pub scale: f64,
    #[serde(default = "default_z_cap")]
    pub z_cap: f64,
}

fn default_n() -> usize {
    240
}
fn default_backend() -> String {
    "spectral".into()
}
fn default_mapping() -> String {
    "truncated".into()
}
fn default_z_max() -> f64 {
    50.0
}
fn default_cluster() -> f64 {
    6.0
}
fn default_scale() -> f64 {
    4.0
}
fn default_z_cap() -> f64 {
    100.0
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            n: default_n(),
            backend: default_backend(),
            mapping: default_mapping(),
            z_max: default_z_max(),
            cluster: default_cluster(),
            scale: default_scale(),
            z_cap: default_z_cap(),
        }
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<GridRef> {
        let backend = match self.backend.as_str() {
            "spectral" => Backend::Spectral,
            "fd" => Backend::FiniteDifference,
            other => {
                return Err(Error::Config(format!(
                    "grid.backend must be spectral|fd, got '{other}'"
                )))
            }
        };
        let mapping = match self.mapping.as_str() {
            "truncated" => Mapping::Truncated {
                z_max: self.z_max,
                cluster: self.cluster,
            },
            "algebraic" => Mapping::Algebraic {
                scale: self.scale,
                z_cap: self.z_cap,
            },
            other => {
                return Err(Error::Config(format!(
                    "grid.mapping must be truncated|algebraic, got '{other}'"
                )))
            }
        };
        SemiInfiniteGrid::build(self.n, backend, mapping)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    /// Viscosity lattice, descending recommended.
    #[serde(default = "default_nu_grid")]
    pub nu: Vec<f64>,
    /// Wavenumber lattice for rayleigh-scan and os-scan.
    #[serde(default = "default_alpha_grid")]
    pub alpha: Vec<f64>,
    /// Reynolds lattice for neutral-curve (`nu = R^{-2}`).
    #[serde(default = "default_r_grid")]
    pub r: Vec<f64>,
    /// Coarse samples per wavenumber maximization.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_nu_grid() -> Vec<f64> {
    vec![1e-10, 1e-11, 1e-12]
}
fn default_alpha_grid() -> Vec<f64> {
    vec![0.1, 0.2, 0.4, 0.8, 1.2, 1.6, 2.0]
}
fn default_r_grid() -> Vec<f64> {
    vec![2e5, 1e6, 5e6]
}
fn default_samples() -> usize {
    8
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            nu: default_nu_grid(),
            alpha: default_alpha_grid(),
            r: default_r_grid(),
            samples: default_samples(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpansionConfig {
    #[serde(default = "default_p_exp")]
    pub p_exp: usize,
    #[serde(default = "default_m_order")]
    pub m_order: usize,
    /// Stopping exponent in `T_star`; must exceed 1/4.
    #[serde(default = "default_tau")]
    pub tau: f64,
    /// Heat-evolving base profile when true, frozen otherwise.
    #[serde(default = "default_true")]
    pub time_dependent: bool,
    /// `None` picks `T_star` of the run viscosity.
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_exp_snapshots")]
    pub n_snapshots: usize,
}

fn default_p_exp() -> usize {
    1
}
fn default_m_order() -> usize {
    3
}
fn default_tau() -> f64 {
    0.3
}
fn default_true() -> bool {
    true
}
fn default_exp_snapshots() -> usize {
    8
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        ExpansionConfig {
            p_exp: default_p_exp(),
            m_order: default_m_order(),
            tau: default_tau(),
            time_dependent: true,
            t_end: None,
            dt: None,
            n_snapshots: default_exp_snapshots(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinConfig {
    #[serde(default = "default_nonlin_nu")]
    pub nu: f64,
    #[serde(default = "default_p_exp")]
    pub p_exp: usize,
    #[serde(default)]
    pub seed_amplitude: Option<f64>,
    #[serde(default = "default_theta0")]
    pub theta0: f64,
    /// `None` picks the predicted `T_1` plus a margin.
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_n_modes")]
    pub n_modes: usize,
    #[serde(default = "default_nl_snapshots")]
    pub n_snapshots: usize,
}

fn default_nonlin_nu() -> f64 {
    1e-10
}
fn default_theta0() -> f64 {
    0.1
}
fn default_n_modes() -> usize {
    8
}
fn default_nl_snapshots() -> usize {
    64
}

impl Default for NonlinConfig {
    fn default() -> Self {
        NonlinConfig {
            nu: default_nonlin_nu(),
            p_exp: default_p_exp(),
            seed_amplitude: None,
            theta0: default_theta0(),
            t_end: None,
            dt: None,
            n_modes: default_n_modes(),
            n_snapshots: default_nl_snapshots(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemigroupConfig {
    #[serde(default = "default_sg_t_end")]
    pub t_end: f64,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_sg_random")]
    pub n_random: usize,
    /// `gamma1 = factor * gamma0`.
    #[serde(default = "default_gamma1_factor")]
    pub gamma1_factor: f64,
    #[serde(default = "default_sg_snapshots")]
    pub n_snapshots: usize,
}

fn default_sg_t_end() -> f64 {
    800.0
}
fn default_sg_random() -> usize {
    4
}
fn default_gamma1_factor() -> f64 {
    1.2
}
fn default_sg_snapshots() -> usize {
    32
}

impl Default for SemigroupConfig {
    fn default() -> Self {
        SemigroupConfig {
            t_end: default_sg_t_end(),
            dt: None,
            n_random: default_sg_random(),
            gamma1_factor: default_gamma1_factor(),
            n_snapshots: default_sg_snapshots(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub profile: ProfileConfig,
    pub grid: GridConfig,
    pub scan: ScanConfig,
    pub expansion: ExpansionConfig,
    pub nonlin: NonlinConfig,
    pub semigroup: SemigroupConfig,
    /// Exponent `p` of the weighted-norm family.
    pub norm_p: usize,
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        let cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("config {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.scan.nu.is_empty() {
            return Err(Error::Config("scan.nu must be nonempty".into()));
        }
        if self.scan.alpha.is_empty() {
            return Err(Error::Config("scan.alpha must be nonempty".into()));
        }
        if self.scan.r.is_empty() {
            return Err(Error::Config("scan.r must be nonempty".into()));
        }
        if self.scan.samples < 4 {
            return Err(Error::Config("scan.samples must be at least 4".into()));
        }
        for &nu in &self.scan.nu {
            if nu <= 0.0 {
                return Err(Error::Config(format!("scan.nu entries must be positive, got {nu}")));
            }
        }
        for &a in &self.scan.alpha {
            if a <= 0.0 {
                return Err(Error::Config(format!(
                    "scan.alpha entries must be positive, got {a}"
                )));
            }
        }
        for &r in &self.scan.r {
            if r <= 0.0 {
                return Err(Error::Config(format!("scan.r entries must be positive, got {r}")));
            }
        }
        if self.expansion.tau <= 0.25 {
            return Err(Error::Config("expansion.tau must exceed 0.25".into()));
        }
        if self.expansion.p_exp == 0 {
            return Err(Error::Config("expansion.p_exp must be at least 1".into()));
        }
        if self.nonlin.n_modes < 8 {
            return Err(Error::Config("nonlin.n_modes must be at least 8".into()));
        }
        if self.nonlin.theta0 <= 0.0 {
            return Err(Error::Config("nonlin.theta0 must be positive".into()));
        }
        if self.semigroup.gamma1_factor <= 1.0 {
            return Err(Error::Config("semigroup.gamma1_factor must exceed 1".into()));
        }
        self.profile.build()?;
        self.grid.build()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        let mut cfg = RunConfig::default();
        cfg.out_dir = PathBuf::from("out");
        cfg.validate().unwrap();
        assert_eq!(cfg.nonlin.n_modes, 8);
        assert!(cfg.expansion.time_dependent);
    }

    #[test]
    fn toml_roundtrip_and_unknown_field_rejection() {
        let cfg = RunConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back.grid.n, cfg.grid.n);
        let bad = format!("{text}\nnot_a_field = 3\n");
        assert!(toml::from_str::<RunConfig>(&bad).is_err());
    }

    #[test]
    fn bad_kinds_are_config_errors() {
        let mut cfg = RunConfig::default();
        cfg.profile.kind = "parabolic".into();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = RunConfig::default();
        cfg.grid.backend = "fem".into();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = RunConfig::default();
        cfg.scan.nu = vec![];
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = RunConfig::default();
        cfg.expansion.tau = 0.2;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn tabulated_profile_from_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("profile.csv");
        let mut text = String::new();
        for k in 0..40 {
            let z = k as f64 * 0.5;
            text.push_str(&format!("{z},{}\n", 1.0 - (-z as f64).exp()));
        }
        std::fs::write(&path, text).unwrap();
        let pc = ProfileConfig {
            kind: "table".into(),
            path: Some(path),
            ..ProfileConfig::default()
        };
        let p = pc.build().unwrap();
        assert!((p.u(1.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-3);
    }
}
