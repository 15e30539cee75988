//! Discretization of the half line `z >= 0`.
//!
//! Two interchangeable back-ends sit behind [`SemiInfiniteGrid`]: a mapped
//! Chebyshev collocation grid and a stretched second-order finite-difference
//! grid. Everything above this module is back-end agnostic, so the two grids
//! double as cross-validation oracles for each other.

use std::sync::Arc;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coordinate map from the reference interval onto `z >= 0`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub enum Mapping {
    /// Algebraic map `z = L (1 + xi) / (1 - xi + eps)` with `eps = 2 L / z_cap`.
    ///
    /// The small shift keeps the top node at a finite height `z_cap` instead of
    /// the mapped infinity; decaying functions are unaffected at double
    /// precision while constants and polynomials stay exactly representable.
    Algebraic { scale: f64, z_cap: f64 },
    /// Truncated domain `[0, z_max]` with a sinh stretch of strength `cluster`
    /// concentrating nodes at the wall.
    Truncated { z_max: f64, cluster: f64 },
}

impl Mapping {
    pub fn default_truncated() -> Self {
        Mapping::Truncated {
            z_max: 50.0,
            cluster: 6.0,
        }
    }

    pub fn default_algebraic() -> Self {
        Mapping::Algebraic {
            scale: 4.0,
            z_cap: 100.0,
        }
    }

    /// z as a function of s in [0, 1].
    fn z_of_s(&self, s: f64) -> f64 {
        match *self {
            Mapping::Algebraic { scale, z_cap } => {
                let eps = 2.0 * scale / z_cap;
                let xi = 2.0 * s - 1.0;
                scale * (1.0 + xi) / (1.0 - xi + eps)
            }
            Mapping::Truncated { z_max, cluster } => {
                z_max * (cluster * s).sinh() / cluster.sinh()
            }
        }
    }

    /// dz/ds.
    fn dz_ds(&self, s: f64) -> f64 {
        match *self {
            Mapping::Algebraic { scale, z_cap } => {
                let eps = 2.0 * scale / z_cap;
                let xi = 2.0 * s - 1.0;
                2.0 * scale * (2.0 + eps) / ((1.0 - xi + eps) * (1.0 - xi + eps))
            }
            Mapping::Truncated { z_max, cluster } => {
                z_max * cluster * (cluster * s).cosh() / cluster.sinh()
            }
        }
    }

    /// d2z/ds2.
    fn d2z_ds2(&self, s: f64) -> f64 {
        match *self {
            Mapping::Algebraic { scale, z_cap } => {
                let eps = 2.0 * scale / z_cap;
                let xi = 2.0 * s - 1.0;
                8.0 * scale * (2.0 + eps) / ((1.0 - xi + eps).powi(3))
            }
            Mapping::Truncated { z_max, cluster } => {
                z_max * cluster * cluster * (cluster * s).sinh() / cluster.sinh()
            }
        }
    }

    /// s as a function of z (inverse map).
    fn s_of_z(&self, z: f64) -> f64 {
        match *self {
            Mapping::Algebraic { scale, z_cap } => {
                let eps = 2.0 * scale / z_cap;
                let xi = (z * (1.0 + eps) - scale) / (z + scale);
                0.5 * (1.0 + xi)
            }
            Mapping::Truncated { z_max, cluster } => {
                (z * cluster.sinh() / z_max).asinh() / cluster
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Mapping::Algebraic { scale, z_cap } => {
                if scale <= 0.0 || z_cap <= 2.0 * scale {
                    return Err(Error::Config(format!(
                        "algebraic map needs scale > 0 and z_cap > 2*scale, got L={scale}, z_cap={z_cap}"
                    )));
                }
            }
            Mapping::Truncated { z_max, cluster } => {
                if z_max <= 0.0 || cluster <= 0.0 {
                    return Err(Error::Config(format!(
                        "truncated map needs z_max > 0 and cluster > 0, got z_max={z_max}, cluster={cluster}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
pub enum Backend {
    Spectral,
    FiniteDifference,
}

/// Nodes, differentiation operators and quadrature weights on `z >= 0`.
///
/// Nodes are stored in ascending order with `z[0] = 0`. Grids are immutable
/// after construction and are shared behind an `Arc`.
#[derive(Debug, Clone)]
pub struct SemiInfiniteGrid {
    pub backend: Backend,
    pub mapping: Mapping,
    pub n: usize,
    pub z: Array1<f64>,
    pub d1: Array2<f64>,
    pub d2: Array2<f64>,
    pub d3: Array2<f64>,
    pub d4: Array2<f64>,
    /// Quadrature weights for `\int_0^{z_top} f dz`.
    pub weights: Array1<f64>,
    /// Barycentric weights (spectral) in the reference variable, unused for FD.
    bary: Array1<f64>,
    /// Node positions in the reference variable `s in [0, 1]`.
    s_nodes: Array1<f64>,
}

pub type GridRef = Arc<SemiInfiniteGrid>;

/// Chebyshev-Lobatto differentiation matrix on [-1, 1], nodes `cos(pi j / n)`.
fn cheb_d(n: usize) -> (Array1<f64>, Array2<f64>) {
    let np = n + 1;
    let xi: Array1<f64> = Array1::from_iter((0..np).map(|j| (std::f64::consts::PI * j as f64 / n as f64).cos()));
    let c = |j: usize| -> f64 {
        let cj = if j == 0 || j == n { 2.0 } else { 1.0 };
        cj * if j % 2 == 0 { 1.0 } else { -1.0 }
    };
    let mut d = Array2::<f64>::zeros((np, np));
    for i in 0..np {
        for j in 0..np {
            if i != j {
                d[[i, j]] = c(i) / c(j) / (xi[i] - xi[j]);
            }
        }
    }
    // negative row sums on the diagonal kill the constant mode exactly
    for i in 0..np {
        let mut s = 0.0;
        for j in 0..np {
            if i != j {
                s += d[[i, j]];
            }
        }
        d[[i, i]] = -s;
    }
    (xi, d)
}

/// Clenshaw-Curtis weights on [-1, 1] for Lobatto nodes `cos(pi j / n)`.
fn clenshaw_curtis(n: usize) -> Array1<f64> {
    let np = n + 1;
    let mut w = Array1::<f64>::zeros(np);
    // w_j = sum over even k of c_k * m_k with m_k = 2/(1-k^2); direct cosine sums
    for j in 0..np {
        let mut s = 1.0; // k = 0 term: m_0/2 * ... folded below
        for k in (2..=n).step_by(2) {
            let factor = if k == n { 1.0 } else { 2.0 };
            s -= factor * (std::f64::consts::PI * (k * j) as f64 / n as f64).cos() / ((k * k - 1) as f64);
        }
        let cj = if j == 0 || j == n { 1.0 } else { 2.0 };
        w[j] = cj * s / n as f64;
    }
    w
}

impl SemiInfiniteGrid {
    pub fn build(n: usize, backend: Backend, mapping: Mapping) -> Result<GridRef> {
        if n < 8 {
            return Err(Error::Config(format!("grid needs N >= 8, got {n}")));
        }
        mapping.validate()?;
        let grid = match backend {
            Backend::Spectral => Self::build_spectral(n, mapping),
            Backend::FiniteDifference => Self::build_fd(n, mapping),
        };
        Ok(Arc::new(grid))
    }

    fn build_spectral(n: usize, mapping: Mapping) -> Self {
        let m = n - 1; // polynomial degree; n nodes
        let (xi, dxi) = cheb_d(m);
        // reverse so z ascends: node j in our order is Lobatto index m - j
        let s: Array1<f64> = Array1::from_iter((0..n).map(|j| 0.5 * (1.0 + xi[m - j])));
        let z: Array1<f64> = s.mapv(|si| mapping.z_of_s(si));
        // ds/dxi = 1/2, so d/ds = 2 d/dxi; reorder rows/cols to ascending
        let mut ds = Array2::<f64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                ds[[i, j]] = 2.0 * dxi[[m - i, m - j]];
            }
        }
        let ds2 = ds.dot(&ds);
        let zp: Array1<f64> = s.mapv(|si| mapping.dz_ds(si));
        let zpp: Array1<f64> = s.mapv(|si| mapping.d2z_ds2(si));
        let mut d1 = Array2::<f64>::zeros((n, n));
        let mut d2 = Array2::<f64>::zeros((n, n));
        for i in 0..n {
            let a1 = 1.0 / zp[i];
            let a2 = 1.0 / (zp[i] * zp[i]);
            let b = zpp[i] / (zp[i] * zp[i] * zp[i]);
            for j in 0..n {
                d1[[i, j]] = a1 * ds[[i, j]];
                d2[[i, j]] = a2 * ds2[[i, j]] - b * ds[[i, j]];
            }
        }
        let d3 = d1.dot(&d2);
        let d4 = d2.dot(&d2);
        let wcc = clenshaw_curtis(m);
        let weights: Array1<f64> =
            Array1::from_iter((0..n).map(|j| 0.5 * wcc[m - j] * zp[j]));
        let bary: Array1<f64> = Array1::from_iter((0..n).map(|j| {
            let lob = m - j;
            let w = if lob == 0 || lob == m { 0.5 } else { 1.0 };
            w * if lob % 2 == 0 { 1.0 } else { -1.0 }
        }));
        SemiInfiniteGrid {
            backend: Backend::Spectral,
            mapping,
            n,
            z,
            d1,
            d2,
            d3,
            d4,
            weights,
            bary,
            s_nodes: s,
        }
    }

    fn build_fd(n: usize, mapping: Mapping) -> Self {
        let h = 1.0 / (n - 1) as f64;
        let s: Array1<f64> = Array1::from_iter((0..n).map(|j| j as f64 * h));
        let z: Array1<f64> = s.mapv(|si| mapping.z_of_s(si));
        // uniform central differences in s, chain rule for z
        let mut ds = Array2::<f64>::zeros((n, n));
        let mut ds2 = Array2::<f64>::zeros((n, n));
        for i in 1..n - 1 {
            ds[[i, i - 1]] = -0.5 / h;
            ds[[i, i + 1]] = 0.5 / h;
            ds2[[i, i - 1]] = 1.0 / (h * h);
            ds2[[i, i]] = -2.0 / (h * h);
            ds2[[i, i + 1]] = 1.0 / (h * h);
        }
        // second-order one-sided stencils at the ends
        ds[[0, 0]] = -1.5 / h;
        ds[[0, 1]] = 2.0 / h;
        ds[[0, 2]] = -0.5 / h;
        ds[[n - 1, n - 1]] = 1.5 / h;
        ds[[n - 1, n - 2]] = -2.0 / h;
        ds[[n - 1, n - 3]] = 0.5 / h;
        for (row, cols) in [(0usize, [0usize, 1, 2, 3]), (n - 1, [n - 1, n - 2, n - 3, n - 4])] {
            let sign = 1.0;
            ds2[[row, cols[0]]] = sign * 2.0 / (h * h);
            ds2[[row, cols[1]]] = sign * -5.0 / (h * h);
            ds2[[row, cols[2]]] = sign * 4.0 / (h * h);
            ds2[[row, cols[3]]] = sign * -1.0 / (h * h);
        }
        let zp: Array1<f64> = s.mapv(|si| mapping.dz_ds(si));
        let zpp: Array1<f64> = s.mapv(|si| mapping.d2z_ds2(si));
        let mut d1 = Array2::<f64>::zeros((n, n));
        let mut d2 = Array2::<f64>::zeros((n, n));
        for i in 0..n {
            let a1 = 1.0 / zp[i];
            let a2 = 1.0 / (zp[i] * zp[i]);
            let b = zpp[i] / (zp[i] * zp[i] * zp[i]);
            for j in 0..n {
                d1[[i, j]] = a1 * ds[[i, j]];
                d2[[i, j]] = a2 * ds2[[i, j]] - b * ds[[i, j]];
            }
        }
        let d3 = d1.dot(&d2);
        let d4 = d2.dot(&d2);
        // trapezoid in s with the metric factor
        let mut weights = Array1::<f64>::zeros(n);
        for j in 0..n {
            let w = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
            weights[j] = w * h * zp[j];
        }
        SemiInfiniteGrid {
            backend: Backend::FiniteDifference,
            mapping,
            n,
            z,
            d1,
            d2,
            d3,
            d4,
            weights,
            bary: Array1::zeros(0),
            s_nodes: s,
        }
    }

    /// Highest node of the grid.
    pub fn z_top(&self) -> f64 {
        self.z[self.n - 1]
    }

    /// Number of nodes strictly inside `[0, delta)`.
    pub fn nodes_below(&self, delta: f64) -> usize {
        self.z.iter().filter(|&&zz| zz < delta).count()
    }

    /// Interpolate nodal values at an arbitrary `z >= 0`; exact at nodes.
    pub fn interpolate(&self, values: &Array1<c64>, z: f64) -> c64 {
        match self.backend {
            Backend::Spectral => {
                let s = self.mapping.s_of_z(z.max(0.0)).clamp(0.0, 1.0);
                // barycentric formula in s; nodes s_j ascending
                let mut num = c64::new(0.0, 0.0);
                let mut den = 0.0;
                for j in 0..self.n {
                    let diff = s - self.s_nodes[j];
                    if diff.abs() < 1e-14 {
                        return values[j];
                    }
                    let w = self.bary[j] / diff;
                    num += values[j] * w;
                    den += w;
                }
                num / den
            }
            Backend::FiniteDifference => {
                // local 3-point Lagrange in z
                let n = self.n;
                let k = match self.z.iter().position(|&zz| zz >= z) {
                    Some(k) => k.clamp(1, n - 2),
                    None => n - 2,
                };
                let (z0, z1, z2) = (self.z[k - 1], self.z[k], self.z[k + 1]);
                let l0 = (z - z1) * (z - z2) / ((z0 - z1) * (z0 - z2));
                let l1 = (z - z0) * (z - z2) / ((z1 - z0) * (z1 - z2));
                let l2 = (z - z0) * (z - z1) / ((z2 - z0) * (z2 - z1));
                values[k - 1] * l0 + values[k] * l1 + values[k + 1] * l2
            }
        }
    }

    /// Quadrature of nodal values over the grid.
    pub fn integrate(&self, values: &Array1<c64>) -> c64 {
        let mut acc = c64::new(0.0, 0.0);
        for j in 0..self.n {
            acc += values[j] * self.weights[j];
        }
        acc
    }
}

/// Complex-valued function sampled on a grid, optionally tagged with the
/// tangential wavenumber it lives at.
#[derive(Debug, Clone)]
pub struct GridFunction {
    pub grid: GridRef,
    pub values: Array1<c64>,
    pub alpha: Option<f64>,
}

impl GridFunction {
    pub fn new(grid: GridRef, values: Array1<c64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::Usage(format!(
                "value vector length {} does not match grid size {}",
                values.len(),
                grid.n
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Numerical("non-finite grid function values".into()));
        }
        Ok(GridFunction {
            grid,
            values,
            alpha: None,
        })
    }

    pub fn zeros(grid: GridRef) -> Self {
        let n = grid.n;
        GridFunction {
            grid,
            values: Array1::from_elem(n, c64::new(0.0, 0.0)),
            alpha: None,
        }
    }

    pub fn from_fn(grid: GridRef, f: impl Fn(f64) -> c64) -> Self {
        let values = grid.z.mapv(f);
        GridFunction {
            grid,
            values,
            alpha: None,
        }
    }

    pub fn from_real_fn(grid: GridRef, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |z| c64::new(f(z), 0.0))
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn deriv(&self) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            values: apply_real(&self.grid.d1, &self.values),
            alpha: self.alpha,
        }
    }

    pub fn deriv2(&self) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            values: apply_real(&self.grid.d2, &self.values),
            alpha: self.alpha,
        }
    }

    pub fn eval(&self, z: f64) -> c64 {
        self.grid.interpolate(&self.values, z)
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn conj(&self) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            values: self.values.mapv(|v| v.conj()),
            alpha: self.alpha.map(|a| -a),
        }
    }

    pub fn scale(&self, c: c64) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            values: self.values.mapv(|v| v * c),
            alpha: self.alpha,
        }
    }

    pub fn add(&self, other: &GridFunction) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            values: &self.values + &other.values,
            alpha: self.alpha,
        }
    }
}

/// A finite family of Fourier modes on the lattice `alpha_n = n alpha_base`.
///
/// Only a data container; reality of the physical field corresponds to
/// `omega_{-n} = conj(omega_n)`.
#[derive(Debug, Clone)]
pub struct ModeFamily {
    pub alpha_base: f64,
    pub modes: std::collections::BTreeMap<i32, GridFunction>,
}

impl ModeFamily {
    pub fn new(alpha_base: f64) -> Self {
        ModeFamily {
            alpha_base,
            modes: std::collections::BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, n: i32, mut f: GridFunction) {
        f.alpha = Some(n as f64 * self.alpha_base);
        self.modes.insert(n, f);
    }

    pub fn get(&self, n: i32) -> Option<&GridFunction> {
        self.modes.get(&n)
    }

    pub fn alpha_of(&self, n: i32) -> f64 {
        n as f64 * self.alpha_base
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Worst deviation from the reality symmetry `omega_{-n} = conj(omega_n)`.
    pub fn reality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (&n, f) in &self.modes {
            if let Some(g) = self.modes.get(&(-n)) {
                for (a, b) in f.values.iter().zip(g.values.iter()) {
                    worst = worst.max((a.conj() - b).norm());
                }
            }
        }
        worst
    }

    /// Physical-space evaluation at `(x, z_index)` by direct mode summation.
    pub fn physical_at(&self, x: f64, zi: usize) -> c64 {
        let mut acc = c64::new(0.0, 0.0);
        for (&n, f) in &self.modes {
            let phase = c64::from_polar(1.0, self.alpha_base * n as f64 * x);
            acc += phase * f.values[zi];
        }
        acc
    }

    /// Sup of |physical field| sampled on `nx` equispaced x points and all z nodes.
    pub fn physical_sup(&self, nx: usize) -> f64 {
        let Some(f0) = self.modes.values().next() else {
            return 0.0;
        };
        let period = 2.0 * std::f64::consts::PI / self.alpha_base;
        let nz = f0.grid.n;
        let mut sup: f64 = 0.0;
        for m in 0..nx {
            let x = period * m as f64 / nx as f64;
            for zi in 0..nz {
                sup = sup.max(self.physical_at(x, zi).norm());
            }
        }
        sup
    }
}

/// Apply a real matrix to a complex vector.
pub fn apply_real(m: &Array2<f64>, v: &Array1<c64>) -> Array1<c64> {
    let n = m.nrows();
    let mut out = Array1::from_elem(n, c64::new(0.0, 0.0));
    for i in 0..n {
        let row = m.row(i);
        let mut acc = c64::new(0.0, 0.0);
        for j in 0..row.len() {
            let a = row[j];
            if a != 0.0 {
                acc += v[j] * a;
            }
        }
        out[i] = acc;
    }
    out
}
