//! Wigner functions on phase space, `beta = q + i p`, normalized so that
//! `|W| <= 2/pi` and the vacuum is `(2/pi) exp(-2|beta|^2)`.
//!
//! Three sources produce fields:
//! - the displaced-parity formula `W(beta) = (2/pi) Tr[Pi D(beta)^dag rho D(beta)]` on a density matrix,
//! - closed forms for photon-added coherent states,
//! - the Gaussian Green's function of the damping Fokker-Planck equation applied to an initial field.

use std::f64::consts::FRAC_2_PI;
use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{laguerre, DensityMatrix, C64};
use crate::linalg::displacement;

/// Half-width of the default grid around the (displaced) state center.
pub const DEFAULT_HALF_WIDTH: f64 = 5.0;
pub const DEFAULT_POINTS: usize = 256;
/// Fewest samples per axis accepted for quadrature.
pub const MIN_QUADRATURE_POINTS: usize = 64;
/// Allowed deviation of the trapezoidal integral from one.
pub const NORMALIZATION_SLACK: f64 = 5e-3;
/// Mass allowed in the top quarter of the enlarged basis when displacing by matrix exponential.
pub const DISPLACED_TAIL_BOUND: f64 = 1e-8;

const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceGrid {
    pub q_min: f64,
    pub q_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub n_q: usize,
    pub n_p: usize,
}

impl PhaseSpaceGrid {
    pub fn new(q_range: (f64, f64), p_range: (f64, f64), n_q: usize, n_p: usize) -> Result<Self> {
        let ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && hi > lo;
        if !ok(q_range) {
            return Err(Error::invalid(
                "q_range",
                format!("{q_range:?} is not an increasing finite interval"),
            ));
        }
        if !ok(p_range) {
            return Err(Error::invalid(
                "p_range",
                format!("{p_range:?} is not an increasing finite interval"),
            ));
        }
        if n_q < 2 || n_p < 2 {
            return Err(Error::invalid("points", "need at least two samples per axis"));
        }
        Ok(Self {
            q_min: q_range.0,
            q_max: q_range.1,
            p_min: p_range.0,
            p_max: p_range.1,
            n_q,
            n_p,
        })
    }

    /// Square grid of `points x points` samples spanning `center +- half_width` on both axes.
    pub fn centered(center: C64, half_width: f64, points: usize) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::invalid("half_width", "must be positive"));
        }
        Self::new(
            (center.re - half_width, center.re + half_width),
            (center.im - half_width, center.im + half_width),
            points,
            points,
        )
    }

    /// Default quadrature grid for a state whose Wigner function is centered at `center`.
    pub fn for_state(center: C64) -> Self {
        Self::centered(center, DEFAULT_HALF_WIDTH, DEFAULT_POINTS).expect("default grid is valid")
    }

    pub fn dq(&self) -> f64 {
        (self.q_max - self.q_min) / (self.n_q - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / (self.n_p - 1) as f64
    }

    pub fn q(&self, i: usize) -> f64 {
        self.q_min + i as f64 * self.dq()
    }

    pub fn p(&self, j: usize) -> f64 {
        self.p_min + j as f64 * self.dp()
    }

    pub fn qs(&self) -> Vec<f64> {
        (0..self.n_q).map(|i| self.q(i)).collect()
    }

    pub fn ps(&self) -> Vec<f64> {
        (0..self.n_p).map(|j| self.p(j)).collect()
    }

    pub fn len(&self) -> usize {
        self.n_q * self.n_p
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WignerSource {
    ParityFormula,
    ClosedForm,
    Propagated,
}

/// Samples of `W(q, p)` on a grid, stored row-major with `q` as the slow index.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerField {
    grid: PhaseSpaceGrid,
    values: Vec<f64>,
    source: WignerSource,
}

impl WignerField {
    /// Checks finiteness, the `+-2/pi` bound, grid density and normalization.
    pub fn new(grid: PhaseSpaceGrid, values: Vec<f64>, source: WignerSource) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        if grid.n_q < MIN_QUADRATURE_POINTS || grid.n_p < MIN_QUADRATURE_POINTS {
            return Err(Error::GridTooCoarse(format!(
                "{}x{} samples, quadrature needs at least {MIN_QUADRATURE_POINTS} per axis",
                grid.n_q, grid.n_p
            )));
        }
        let limit = FRAC_2_PI + BOUND_SLACK;
        if let Some(bad) = values.iter().find(|w| !w.is_finite() || w.abs() > limit) {
            return Err(Error::InvalidState(format!("Wigner sample {bad} violates |W| <= 2/pi")));
        }
        let field = Self { grid, values, source };
        let integral = field.integral();
        if (integral - 1.0).abs() > NORMALIZATION_SLACK {
            return Err(Error::GridTooSmall(format!(
                "field integrates to {integral:.6} on q in [{}, {}], p in [{}, {}]",
                grid.q_min, grid.q_max, grid.p_min, grid.p_max
            )));
        }
        Ok(field)
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source(&self) -> WignerSource {
        self.source
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.n_p + j]
    }

    /// Trapezoidal integral over the grid.
    pub fn integral(&self) -> f64 {
        let (nq, np) = (self.grid.n_q, self.grid.n_p);
        let edge = |k: usize, n: usize| if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
        let mut sum = 0.0;
        for i in 0..nq {
            let wi = edge(i, nq);
            for j in 0..np {
                sum += wi * edge(j, np) * self.values[i * np + j];
            }
        }
        sum * self.grid.dq() * self.grid.dp()
    }

    /// Smallest sample and its `(q, p)` location.
    pub fn min(&self) -> (f64, (f64, f64)) {
        let (k, w) = self
            .values
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("grid is never empty");
        let (i, j) = (k / self.grid.n_p, k % self.grid.n_p);
        (w, (self.grid.q(i), self.grid.p(j)))
    }

    pub fn max_abs_difference(&self, other: &WignerField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::invalid("grid", "fields live on different grids"));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// `q,p,w` rows with a header line.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["q", "p", "w"])?;
        for i in 0..self.grid.n_q {
            for j in 0..self.grid.n_p {
                wtr.write_record(&[
                    fmt_num(self.grid.q(i)),
                    fmt_num(self.grid.p(j)),
                    fmt_num(self.value(i, j)),
                ])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    /// Gnuplot `nonuniform matrix` text: the first line is `n_q q_0 .. q_last`,
    /// each following line is `p_j W(q_0, p_j) .. W(q_last, p_j)`.
    pub fn write_gnuplot_matrix<W: Write>(&self, mut out: W) -> Result<()> {
        let mut line = vec![self.grid.n_q.to_string()];
        line.extend(self.grid.qs().into_iter().map(fmt_num));
        writeln!(out, "{}", line.join(" "))?;
        for j in 0..self.grid.n_p {
            let mut line = vec![fmt_num(self.grid.p(j))];
            line.extend((0..self.grid.n_q).map(|i| fmt_num(self.value(i, j))));
            writeln!(out, "{}", line.join(" "))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Shortest round-trip decimal for `x`.
pub(crate) fn fmt_num(x: f64) -> String {
    format!("{x:?}")
}

/// Displaced-parity evaluation of one density matrix at many phase-space points.
///
/// Uses the exact matrix elements of the displaced parity operator in the
/// number basis,
///
/// ```text
/// <n+k| D(b) Pi D(b)^dag |n> = (-1)^n sqrt(n!/(n+k)!) (2b)^k e^{-2|b|^2} L_n^(k)(4|b|^2),
/// ```
///
/// so the only truncation is that of `rho` itself. The normalized Laguerre
/// values `sqrt(n! k!/(n+k)!) L_n^(k)` obey a three-term recurrence that stays
/// in range for the grid sizes used here.
#[derive(Debug, Clone)]
pub struct ParityEvaluator {
    dim: usize,
    /// `bands[k][n] = rho[n][n+k]`
    bands: Vec<Vec<C64>>,
    /// `sqrt(n (n+k))` and `1/sqrt((n+1)(n+k+1))`, indexed `[k][n]`
    back: Vec<Vec<f64>>,
    fwd: Vec<Vec<f64>>,
}

impl ParityEvaluator {
    pub fn new(rho: &DensityMatrix) -> Self {
        let dim = rho.dim();
        let m = rho.elements();
        let bands = (0..dim)
            .map(|k| (0..dim - k).map(|n| m[(n, n + k)]).collect())
            .collect();
        let back = (0..dim)
            .map(|k| (0..dim - k).map(|n| ((n * (n + k)) as f64).sqrt()).collect())
            .collect();
        let fwd = (0..dim)
            .map(|k| {
                (0..dim - k)
                    .map(|n| 1.0 / (((n + 1) * (n + k + 1)) as f64).sqrt())
                    .collect()
            })
            .collect();
        Self { dim, bands, back, fwd }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, beta: C64) -> f64 {
        let r2 = beta.norm_sqr();
        if 2.0 * r2 > 700.0 {
            return 0.0;
        }
        let x = 4.0 * r2;
        let step = beta * 2.0;
        // (2 beta)^k e^{-2|beta|^2} / sqrt(k!)
        let mut prefactor = C64::new((-2.0 * r2).exp(), 0.0);
        let mut total = 0.0;
        for k in 0..self.dim {
            let band = &self.bands[k];
            let kf = k as f64;
            let mut g_prev = 1.0;
            let mut acc = band[0];
            if band.len() > 1 {
                let mut g = (1.0 + kf - x) / (kf + 1.0).sqrt();
                acc -= band[1] * g;
                let mut sign = 1.0;
                for n in 1..band.len() - 1 {
                    let nf = n as f64;
                    let next = ((2.0 * nf + 1.0 + kf - x) * g - self.back[k][n] * g_prev) * self.fwd[k][n];
                    g_prev = g;
                    g = next;
                    acc += band[n + 1] * (g * sign);
                    sign = -sign;
                }
            }
            let weight = if k == 0 { 1.0 } else { 2.0 };
            total += weight * (prefactor * acc).re;
            prefactor *= step / (kf + 1.0).sqrt();
        }
        FRAC_2_PI * total
    }

    /// Values on a tensor grid `qs x ps`, row-major with `q` slow.
    pub fn values_on(&self, qs: &[f64], ps: &[f64]) -> Vec<f64> {
        qs.par_iter()
            .flat_map_iter(|&q| ps.iter().map(move |&p| self.value(C64::new(q, p))))
            .collect()
    }
}

/// Pointwise displaced-parity value of `rho` at `beta = q + i p`.
pub fn wigner_at(rho: &DensityMatrix, beta: C64) -> f64 {
    ParityEvaluator::new(rho).value(beta)
}

/// Displaced-parity value with the displacement built as a matrix exponential
/// on an enlarged `dim_ext`-level basis.
pub fn wigner_at_truncated(rho: &DensityMatrix, beta: C64, dim_ext: usize) -> Result<f64> {
    if dim_ext < rho.dim() {
        return Err(Error::invalid("dim_ext", "must be at least the state dimension"));
    }
    let big = rho.resized(dim_ext)?;
    let d = displacement(beta, dim_ext);
    let shifted = d.adjoint() * big.elements() * d;
    let pops: Vec<f64> = shifted.diagonal().iter().map(|z| z.re).collect();
    let tail: f64 = pops[dim_ext - dim_ext / 4..].iter().sum();
    if tail > DISPLACED_TAIL_BOUND {
        return Err(Error::TruncationTooSmall {
            tail,
            dim: dim_ext,
            bound: DISPLACED_TAIL_BOUND,
        });
    }
    let parity: f64 = pops
        .iter()
        .enumerate()
        .map(|(n, p)| if n % 2 == 0 { *p } else { -p })
        .sum();
    Ok(FRAC_2_PI * parity)
}

pub fn wigner_from_density(rho: &DensityMatrix, grid: &PhaseSpaceGrid) -> Result<WignerField> {
    let values = ParityEvaluator::new(rho).values_on(&grid.qs(), &grid.ps());
    WignerField::new(*grid, values, WignerSource::ParityFormula)
}

/// Closed-form Wigner function of the photon-added coherent state of order `m`:
/// `(-1)^m (2/pi) L_m(|2 beta - alpha|^2) e^{-2|beta - alpha|^2} / L_m(-|alpha|^2)`.
pub fn wigner_pacs_closed(alpha: C64, m: usize, q: f64, p: f64) -> f64 {
    let beta = C64::new(q, p);
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * FRAC_2_PI * laguerre(m, (beta * 2.0 - alpha).norm_sqr()) * (-2.0 * (beta - alpha).norm_sqr()).exp()
        / laguerre(m, -alpha.norm_sqr())
}

/// Single-photon-added coherent state.
pub fn wigner_spacs_closed(alpha: C64, q: f64, p: f64) -> f64 {
    wigner_pacs_closed(alpha, 1, q, p)
}

/// Two-photon-added coherent state.
pub fn wigner_tpacs_closed(alpha: C64, q: f64, p: f64) -> f64 {
    wigner_pacs_closed(alpha, 2, q, p)
}

pub fn closed_form_field(alpha: C64, m: usize, grid: &PhaseSpaceGrid) -> Result<WignerField> {
    let ps = grid.ps();
    let values = grid
        .qs()
        .par_iter()
        .flat_map_iter(|&q| ps.iter().map(move |&p| wigner_pacs_closed(alpha, m, q, p)))
        .collect();
    WignerField::new(*grid, values, WignerSource::ClosedForm)
}

/// Separable Green's-function kernel of the damping Fokker-Planck equation on one axis,
/// with trapezoid weights of the source axis folded in.
fn kernel_matrix(targets: &[f64], sources: &[f64], spacing: f64, shrink: f64, spread: f64) -> DMatrix<f64> {
    let last = sources.len() - 1;
    DMatrix::from_fn(targets.len(), sources.len(), |i, a| {
        let w = if a == 0 || a == last { 0.5 * spacing } else { spacing };
        let d = targets[i] - shrink * sources[a];
        w * (-2.0 * d * d / spread).exp()
    })
}

fn check_propagation(field: &WignerField, gamma_t: f64) -> Result<()> {
    if !(gamma_t.is_finite() && gamma_t >= 0.0) {
        return Err(Error::invalid(
            "gamma_t",
            format!("must be finite and >= 0, got {gamma_t}"),
        ));
    }
    let g = field.grid;
    let peak = field.values.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    let mut edge = 0.0f64;
    for i in 0..g.n_q {
        edge = edge.max(field.value(i, 0).abs()).max(field.value(i, g.n_p - 1).abs());
    }
    for j in 0..g.n_p {
        edge = edge.max(field.value(0, j).abs()).max(field.value(g.n_q - 1, j).abs());
    }
    if edge > 1e-8 * peak {
        return Err(Error::GridTooSmall(format!(
            "source field reaches {edge:.3e} on the grid boundary; the kernel's 5-sigma tails would need data outside it"
        )));
    }
    if gamma_t > 0.0 {
        let spread = -(-gamma_t).exp_m1();
        // kernel width in source coordinates
        let sigma = (spread / 4.0).sqrt() / (-gamma_t / 2.0).exp();
        let h = g.dq().max(g.dp());
        if h > sigma {
            return Err(Error::GridTooCoarse(format!(
                "spacing {h:.4} exceeds the kernel width {sigma:.4} at gamma_t = {gamma_t}"
            )));
        }
    }
    Ok(())
}

/// Evolved Wigner function at the tensor points `qs x ps` (row-major, `q` slow):
///
/// ```text
/// W(q,p,t) = 2/(pi s) \int W(q',p',0) exp(-2[(q - c q')^2 + (p - c p')^2] / s) dq' dp',
/// s = 1 - e^{-gt},  c = e^{-gt/2}
/// ```
pub fn propagate_onto(field0: &WignerField, gamma_t: f64, qs: &[f64], ps: &[f64]) -> Result<Vec<f64>> {
    check_propagation(field0, gamma_t)?;
    let g = field0.grid;
    if gamma_t == 0.0 {
        let inside = |x: f64, lo: f64, hi: f64| x >= lo - 1e-12 && x <= hi + 1e-12;
        if qs.iter().all(|&q| inside(q, g.q_min, g.q_max)) && ps.iter().all(|&p| inside(p, g.p_min, g.p_max)) {
            return Ok(qs
                .iter()
                .flat_map(|&q| ps.iter().map(move |&p| bilinear(field0, q, p)))
                .collect());
        }
        return Err(Error::invalid(
            "targets",
            "points outside the source grid at gamma_t = 0",
        ));
    }
    let spread = -(-gamma_t).exp_m1();
    let shrink = (-gamma_t / 2.0).exp();
    let kq = kernel_matrix(qs, &g.qs(), g.dq(), shrink, spread);
    let kp = kernel_matrix(ps, &g.ps(), g.dp(), shrink, spread);
    let w0 = DMatrix::from_row_slice(g.n_q, g.n_p, &field0.values);
    let out = kq * w0 * kp.transpose() * (FRAC_2_PI / spread);
    // row-major copy
    Ok((0..qs.len())
        .flat_map(|i| (0..ps.len()).map(move |j| (i, j)))
        .map(|(i, j)| out[(i, j)])
        .collect())
}

/// Evolves `field0` by `gamma_t` onto its own grid.
pub fn propagate_wigner(field0: &WignerField, gamma_t: f64) -> Result<WignerField> {
    let g = field0.grid;
    let values = if gamma_t == 0.0 {
        check_propagation(field0, gamma_t)?;
        field0.values.clone()
    } else {
        propagate_onto(field0, gamma_t, &g.qs(), &g.ps())?
    };
    WignerField::new(g, values, WignerSource::Propagated)
}

fn bilinear(field: &WignerField, q: f64, p: f64) -> f64 {
    let g = field.grid;
    let locate = |x: f64, lo: f64, h: f64, n: usize| {
        let t = ((x - lo) / h).clamp(0.0, (n - 1) as f64);
        let i = (t.floor() as usize).min(n - 2);
        (i, t - i as f64)
    };
    let (i, tq) = locate(q, g.q_min, g.dq(), g.n_q);
    let (j, tp) = locate(p, g.p_min, g.dp(), g.n_p);
    let v = |a, b| field.value(a, b);
    (1.0 - tq) * ((1.0 - tp) * v(i, j) + tp * v(i, j + 1)) + tq * ((1.0 - tp) * v(i + 1, j) + tp * v(i + 1, j + 1))
}

/// `W(q, p)` along the whole `q` axis at fixed `p`, linearly interpolated between grid rows in `p`.
pub fn wigner_cut(field: &WignerField, p: f64) -> Result<Vec<(f64, f64)>> {
    let g = field.grid;
    let tol = 1e-12 * (g.p_max - g.p_min);
    if !(p >= g.p_min - tol && p <= g.p_max + tol) {
        return Err(Error::OutOfGrid {
            p,
            p_min: g.p_min,
            p_max: g.p_max,
        });
    }
    let t = ((p - g.p_min) / g.dp()).clamp(0.0, (g.n_p - 1) as f64);
    let j = (t.floor() as usize).min(g.n_p - 2);
    let frac = t - j as f64;
    Ok((0..g.n_q)
        .map(|i| {
            let w = (1.0 - frac) * field.value(i, j) + frac * field.value(i, j + 1);
            (g.q(i), w)
        })
        .collect())
}
