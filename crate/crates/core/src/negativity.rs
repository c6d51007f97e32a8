//! Total negative Wigner quasiprobability `P_NW = |∫_Ω W dq dp|`, with `Ω`
//! the region where `W < 0`.
//!
//! `Ω` is detected by the sign of grid samples. For states (as opposed to
//! precomputed fields) the negative region is located on a coarse scan,
//! confirmed by local minimization so that regions thinner than the coarse
//! spacing are not missed, and then integrated on a fine grid restricted to
//! its bounding box.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{build_pacs, density_from_state, DensityMatrix, PacsSpec, C64};
use crate::loss::{evolve, ChannelParams};
use crate::wigner::{wigner_pacs_closed, ParityEvaluator, WignerField};

/// Below this `P_NW` the negativity counts as invisible.
pub const DEFAULT_EPSILON: f64 = 1e-4;
/// Samples above `-NOISE_FLOOR` count as nonnegative. Far from the state the
/// displaced-parity sum cancels to ~1e-22 and keeps rounding noise up to ~1e-13.
pub const NOISE_FLOOR: f64 = 1e-10;
/// Default bisection bracket for the vanishing threshold.
pub const DEFAULT_BRACKET: (f64, f64) = (0.0, 3.0);
/// Bisection stops once the bracket is this narrow (result is its midpoint).
pub const THRESHOLD_WIDTH: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegativityResult {
    pub p_nw: f64,
    pub negative_cell_count: usize,
    pub min_value: f64,
    pub min_location: (f64, f64),
    pub grid_spacing: f64,
    /// Full and half resolution agree within the policy tolerance.
    pub converged: bool,
}

/// Sampling policy for negativity of a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPolicy {
    /// Coarse scan covers `center +- half_width`.
    pub half_width: f64,
    pub coarse_points: usize,
    /// Target spacing of the fine grid over the negative region.
    pub fine_spacing: f64,
    pub max_fine_points: usize,
    pub convergence_tol: f64,
}

impl Default for GridPolicy {
    fn default() -> Self {
        Self {
            half_width: 5.0,
            coarse_points: 128,
            fine_spacing: 0.005,
            max_fine_points: 1024,
            convergence_tol: 1e-4,
        }
    }
}

impl GridPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(Error::invalid("half_width", "must be positive"));
        }
        if self.coarse_points < 16 {
            return Err(Error::invalid("coarse_points", "need at least 16"));
        }
        if !(self.fine_spacing > 0.0 && self.fine_spacing < self.half_width) {
            return Err(Error::invalid(
                "fine_spacing",
                "must be positive and below the half width",
            ));
        }
        if self.max_fine_points < 8 {
            return Err(Error::invalid("max_fine_points", "need at least 8"));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::invalid("convergence_tol", "must be positive"));
        }
        Ok(())
    }

    /// Same policy with the fine spacing halved (and the cap raised to match).
    pub fn refined(&self) -> Self {
        Self {
            fine_spacing: self.fine_spacing / 2.0,
            max_fine_points: self.max_fine_points * 2,
            ..*self
        }
    }
}

/// A real function on phase space that can be sampled pointwise.
pub trait PhaseSpaceFunction: Sync {
    fn value(&self, q: f64, p: f64) -> f64;

    /// Row-major samples on `qs x ps`, `q` slow.
    fn values_on(&self, qs: &[f64], ps: &[f64]) -> Vec<f64> {
        qs.par_iter()
            .flat_map_iter(|&q| ps.iter().map(move |&p| self.value(q, p)))
            .collect()
    }
}

impl PhaseSpaceFunction for ParityEvaluator {
    fn value(&self, q: f64, p: f64) -> f64 {
        ParityEvaluator::value(self, C64::new(q, p))
    }

    fn values_on(&self, qs: &[f64], ps: &[f64]) -> Vec<f64> {
        ParityEvaluator::values_on(self, qs, ps)
    }
}

/// Closed-form Wigner function of an undamped photon-added coherent state.
#[derive(Debug, Clone, Copy)]
pub struct ClosedFormPacs {
    pub alpha: C64,
    pub m: usize,
}

impl PhaseSpaceFunction for ClosedFormPacs {
    fn value(&self, q: f64, p: f64) -> f64 {
        wigner_pacs_closed(self.alpha, self.m, q, p)
    }
}

struct Samples<'a> {
    qs: &'a [f64],
    ps: &'a [f64],
    values: &'a [f64],
}

impl Samples<'_> {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ps.len() + j]
    }

    /// Negative mass on the full lattice and on its even-index sublattice.
    fn negative_mass(&self) -> (f64, f64, usize) {
        let np = self.ps.len();
        let mut full = 0.0;
        let mut half = 0.0;
        let mut count = 0;
        for (k, &w) in self.values.iter().enumerate() {
            if w < -NOISE_FLOOR {
                full += w;
                count += 1;
                if (k / np).is_multiple_of(2) && (k % np).is_multiple_of(2) {
                    half += w;
                }
            }
        }
        let cell = spacing(self.qs) * spacing(self.ps);
        (full.abs() * cell, half.abs() * 4.0 * cell, count)
    }

    fn min(&self) -> (f64, (f64, f64)) {
        let np = self.ps.len();
        let (k, w) = self
            .values
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty sample set");
        (w, (self.qs[k / np], self.ps[k % np]))
    }
}

fn spacing(axis: &[f64]) -> f64 {
    (axis[axis.len() - 1] - axis[0]) / (axis.len() - 1) as f64
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

/// `P_NW` of a sampled field; convergence compares against the even-index sublattice.
pub fn total_negative_probability(field: &WignerField) -> NegativityResult {
    total_negative_probability_with(field, GridPolicy::default().convergence_tol)
}

pub fn total_negative_probability_with(field: &WignerField, tol: f64) -> NegativityResult {
    let g = field.grid();
    let (qs, ps) = (g.qs(), g.ps());
    let samples = Samples {
        qs: &qs,
        ps: &ps,
        values: field.values(),
    };
    let (p_nw, p_half, count) = samples.negative_mass();
    let (min_value, min_location) = samples.min();
    NegativityResult {
        p_nw,
        negative_cell_count: count,
        min_value,
        min_location,
        grid_spacing: g.dq().max(g.dp()),
        converged: (p_nw - p_half).abs() < tol,
    }
}

/// Pattern search for a local minimum starting at `start`.
fn local_minimum(f: &impl PhaseSpaceFunction, start: (f64, f64), step: f64) -> (f64, (f64, f64)) {
    const DIRS: [(f64, f64); 8] = [
        (1.0, 0.0),
        (-1.0, 0.0),
        (0.0, 1.0),
        (0.0, -1.0),
        (1.0, 1.0),
        (1.0, -1.0),
        (-1.0, 1.0),
        (-1.0, -1.0),
    ];
    let mut x = start;
    let mut fx = f.value(x.0, x.1);
    let mut s = step;
    let mut iters = 0;
    while s > 1e-6 && iters < 2000 {
        iters += 1;
        let best = DIRS
            .iter()
            .map(|(dq, dp)| (x.0 + s * dq, x.1 + s * dp))
            .map(|y| (f.value(y.0, y.1), y))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .expect("eight directions");
        if best.0 < fx {
            fx = best.0;
            x = best.1;
        } else {
            s *= 0.5;
        }
    }
    (fx, x)
}

/// Discrete interior local minima of a coarse scan, lowest first.
fn coarse_minima(s: &Samples<'_>, limit: usize) -> Vec<(f64, (f64, f64))> {
    let (nq, np) = (s.qs.len(), s.ps.len());
    let mut found = Vec::new();
    for i in 1..nq - 1 {
        for j in 1..np - 1 {
            let w = s.at(i, j);
            let is_min = (-1i64..=1).all(|di| {
                (-1i64..=1)
                    .all(|dj| (di == 0 && dj == 0) || w <= s.at((i as i64 + di) as usize, (j as i64 + dj) as usize))
            });
            if is_min {
                found.push((w, (s.qs[i], s.ps[j])));
            }
        }
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    found.truncate(limit);
    found
}

#[derive(Debug, Clone, Copy)]
struct Window {
    q: (f64, f64),
    p: (f64, f64),
}

impl Window {
    fn around(point: (f64, f64), pad: f64) -> Self {
        Self {
            q: (point.0 - pad, point.0 + pad),
            p: (point.1 - pad, point.1 + pad),
        }
    }

    fn union(self, other: Window) -> Self {
        Self {
            q: (self.q.0.min(other.q.0), self.q.1.max(other.q.1)),
            p: (self.p.0.min(other.p.0), self.p.1.max(other.p.1)),
        }
    }

    fn clamp(self, outer: Window) -> Self {
        Self {
            q: (self.q.0.max(outer.q.0), self.q.1.min(outer.q.1)),
            p: (self.p.0.max(outer.p.0), self.p.1.min(outer.p.1)),
        }
    }
}

/// `P_NW` of an arbitrary phase-space function whose support is centered at `center`.
pub fn negativity_of(f: &impl PhaseSpaceFunction, center: C64, policy: &GridPolicy) -> Result<NegativityResult> {
    policy.validate()?;
    let outer = Window::around((center.re, center.im), policy.half_width);
    let qs = linspace(outer.q.0, outer.q.1, policy.coarse_points);
    let ps = linspace(outer.p.0, outer.p.1, policy.coarse_points);
    let values = f.values_on(&qs, &ps);
    let coarse = Samples {
        qs: &qs,
        ps: &ps,
        values: &values,
    };
    let h = spacing(&qs).max(spacing(&ps));

    let mut window: Option<Window> = None;
    let mut grow = |w: Window| {
        window = Some(match window {
            Some(cur) => cur.union(w),
            None => w,
        })
    };
    for (k, &w) in values.iter().enumerate() {
        if w < -NOISE_FLOOR {
            grow(Window::around((qs[k / ps.len()], ps[k % ps.len()]), h));
        }
    }
    let (coarse_min, coarse_min_at) = coarse.min();
    let mut best = (coarse_min, coarse_min_at);
    for (_, start) in coarse_minima(&coarse, 12) {
        let (v, at) = local_minimum(f, start, h);
        if v < best.0 {
            best = (v, at);
        }
        if v < -NOISE_FLOOR {
            grow(Window::around(at, h));
        }
    }

    let Some(mut window) = window.map(|w| w.clamp(outer)) else {
        return Ok(NegativityResult {
            p_nw: 0.0,
            negative_cell_count: 0,
            min_value: best.0,
            min_location: best.1,
            grid_spacing: h,
            converged: true,
        });
    };

    let points =
        |lo: f64, hi: f64| (((hi - lo) / policy.fine_spacing).ceil() as usize + 1).clamp(8, policy.max_fine_points);
    for _ in 0..64 {
        let fq = linspace(window.q.0, window.q.1, points(window.q.0, window.q.1));
        let fp = linspace(window.p.0, window.p.1, points(window.p.0, window.p.1));
        let fine_values = f.values_on(&fq, &fp);
        let fine = Samples {
            qs: &fq,
            ps: &fp,
            values: &fine_values,
        };
        let (nq, np) = (fq.len(), fp.len());
        let neg_row = |i: usize| (0..np).any(|j| fine.at(i, j) < -NOISE_FLOOR);
        let neg_col = |j: usize| (0..nq).any(|i| fine.at(i, j) < -NOISE_FLOOR);
        let mut next = window;
        if neg_row(0) {
            next.q.0 -= h;
        }
        if neg_row(nq - 1) {
            next.q.1 += h;
        }
        if neg_col(0) {
            next.p.0 -= h;
        }
        if neg_col(np - 1) {
            next.p.1 += h;
        }
        let next = next.clamp(outer);
        let settled = next.q == window.q && next.p == window.p;
        if settled {
            let on_outer_edge = (neg_row(0) && window.q.0 <= outer.q.0)
                || (neg_row(nq - 1) && window.q.1 >= outer.q.1)
                || (neg_col(0) && window.p.0 <= outer.p.0)
                || (neg_col(np - 1) && window.p.1 >= outer.p.1);
            if on_outer_edge {
                return Err(Error::GridTooSmall(format!(
                    "negative region reaches the scan boundary at half width {}",
                    policy.half_width
                )));
            }
            let (p_nw, p_half, count) = fine.negative_mass();
            let fine_min = fine.min();
            let (min_value, min_location) = if fine_min.0 < best.0 { fine_min } else { best };
            return Ok(NegativityResult {
                p_nw,
                negative_cell_count: count,
                min_value,
                min_location,
                grid_spacing: spacing(&fq).max(spacing(&fp)),
                converged: (p_nw - p_half).abs() < policy.convergence_tol,
            });
        }
        window = next;
    }
    Err(Error::GridTooSmall(
        "negative region did not settle inside the scan window".into(),
    ))
}

/// Density matrix of the photon-added coherent state after loss `gamma_t`.
pub fn damped_pacs(spec: &PacsSpec, gamma_t: f64) -> Result<DensityMatrix> {
    let rho = density_from_state(&build_pacs(spec)?);
    evolve(&rho, &ChannelParams::new(gamma_t, spec.dim())?)
}

/// `P_NW` of the damped photon-added coherent state, via the displaced-parity formula.
pub fn pacs_negativity(spec: &PacsSpec, gamma_t: f64, policy: &GridPolicy) -> Result<NegativityResult> {
    let rho = damped_pacs(spec, gamma_t)?;
    let center = spec.alpha() * (-gamma_t / 2.0).exp();
    negativity_of(&ParityEvaluator::new(&rho), center, policy)
}

fn check_sorted(gamma_ts: &[f64]) -> Result<()> {
    if gamma_ts.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
        return Err(Error::invalid("gamma_t", "decay times must be finite and >= 0"));
    }
    if gamma_ts.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("gamma_t", "decay times must be sorted ascending"));
    }
    Ok(())
}

pub fn pnw_sweep(spec: &PacsSpec, gamma_ts: &[f64], policy: &GridPolicy) -> Result<Vec<(f64, NegativityResult)>> {
    check_sorted(gamma_ts)?;
    gamma_ts
        .par_iter()
        .map(|&gt| pacs_negativity(spec, gt, policy).map(|r| (gt, r)))
        .collect()
}

/// Smallest `gamma_t` with `P_NW < epsilon`, bisected on [`DEFAULT_BRACKET`].
pub fn vanishing_threshold(spec: &PacsSpec, epsilon: f64, policy: &GridPolicy) -> Result<f64> {
    vanishing_threshold_in(spec, epsilon, DEFAULT_BRACKET, policy)
}

pub fn vanishing_threshold_in(spec: &PacsSpec, epsilon: f64, bracket: (f64, f64), policy: &GridPolicy) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::invalid("epsilon", "must be positive"));
    }
    let (mut lo, mut hi) = bracket;
    if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::invalid(
            "bracket",
            format!("{bracket:?} is not an interval in [0, inf)"),
        ));
    }
    let visible = |gt: f64| pacs_negativity(spec, gt, policy).map(|r| r.p_nw >= epsilon);
    if !visible(lo)? {
        return Ok(lo);
    }
    if visible(hi)? {
        return Err(Error::NoThresholdInRange { epsilon, upper: hi });
    }
    while hi - lo > THRESHOLD_WIDTH {
        let mid = 0.5 * (lo + hi);
        if visible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Earliest `gamma_t` in `bracket` after which `P_NW(later) <= P_NW(earlier)`,
/// assuming `later` starts above and ends below.
pub fn pnw_crossover(
    earlier: &PacsSpec,
    later: &PacsSpec,
    bracket: (f64, f64),
    width: f64,
    policy: &GridPolicy,
) -> Result<f64> {
    let gap = |gt: f64| -> Result<f64> {
        Ok(pacs_negativity(later, gt, policy)?.p_nw - pacs_negativity(earlier, gt, policy)?.p_nw)
    };
    let (mut lo, mut hi) = bracket;
    if !(gap(lo)? > 0.0) || !(gap(hi)? < 0.0) {
        return Err(Error::invalid(
            "bracket",
            format!("{bracket:?} does not bracket a sign change"),
        ));
    }
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if gap(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `P_NW` of undamped photon-added coherent states versus `|alpha|` (real amplitudes).
pub fn pnw_vs_alpha(m: usize, alphas: &[f64], policy: &GridPolicy) -> Result<Vec<(f64, NegativityResult)>> {
    if !(1..=2).contains(&m) {
        return Err(Error::invalid(
            "m",
            format!("photon-addition order must be 1 or 2, got {m}"),
        ));
    }
    alphas
        .par_iter()
        .map(|&a| {
            let spec = PacsSpec::new(C64::new(a.abs(), 0.0), m)?;
            pacs_negativity(&spec, 0.0, policy).map(|r| (a.abs(), r))
        })
        .collect()
}

/// True when each value exceeds its predecessor by at most `slack`.
pub fn is_nonincreasing(values: &[f64], slack: f64) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] + slack)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::coherent_state;
    use crate::wigner::{closed_form_field, PhaseSpaceGrid};
    use std::f64::consts::LN_2;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    /// `2 e^{-1/2} - 1`, the negative mass of `|1>` inside radius 1/2.
    fn single_photon_pnw() -> f64 {
        2.0 * (-0.5f64).exp() - 1.0
    }

    #[test]
    fn coherent_state_has_no_negativity() {
        let alpha = C64::new(0.8, -0.2);
        let rho = density_from_state(&coherent_state(alpha, 40).unwrap());
        let r = negativity_of(&ParityEvaluator::new(&rho), alpha, &GridPolicy::default()).unwrap();
        assert_eq!(r.p_nw, 0.0);
        assert_eq!(r.negative_cell_count, 0);
        assert!(r.converged);
    }

    #[test]
    fn single_photon_anchor() {
        let spec = PacsSpec::new(c(0.0), 1).unwrap();
        let r = pacs_negativity(&spec, 0.0, &GridPolicy::default()).unwrap();
        assert!((r.p_nw - single_photon_pnw()).abs() < 1e-4, "{}", r.p_nw);
        assert!(r.converged);
        assert!(r.negative_cell_count > 0);
        assert!((r.min_value + std::f64::consts::FRAC_2_PI).abs() < 1e-9);
    }

    #[test]
    fn half_loss_single_photon_is_nonnegative() {
        let spec = PacsSpec::new(c(0.0), 1).unwrap();
        let r = pacs_negativity(&spec, LN_2, &GridPolicy::default()).unwrap();
        assert!(r.p_nw <= 1e-4);
    }

    #[test]
    fn field_route_agrees_with_adaptive_route() {
        let grid = PhaseSpaceGrid::centered(c(0.0), 5.0, 2001).unwrap();
        let field = closed_form_field(c(0.0), 1, &grid).unwrap();
        let r = total_negative_probability(&field);
        assert!((r.p_nw - single_photon_pnw()).abs() < 1e-4, "{}", r.p_nw);
        assert_eq!(r.min_value, field.min().0);
    }

    #[test]
    fn threshold_of_coherent_state_is_zero() {
        let spec = PacsSpec::new(c(0.7), 0).unwrap();
        assert_eq!(
            vanishing_threshold(&spec, DEFAULT_EPSILON, &GridPolicy::default()).unwrap(),
            0.0
        );
    }

    #[test]
    fn threshold_outside_bracket() {
        let spec = PacsSpec::new(c(0.0), 1).unwrap();
        let err = vanishing_threshold_in(&spec, 1e-4, (0.0, 0.3), &GridPolicy::default()).unwrap_err();
        assert!(matches!(err, Error::NoThresholdInRange { .. }));
    }

    #[test]
    fn sweep_requires_sorted_times() {
        let spec = PacsSpec::new(c(0.5), 1).unwrap();
        assert!(pnw_sweep(&spec, &[0.4, 0.2], &GridPolicy::default()).is_err());
    }

    #[test]
    fn pnw_vs_alpha_rejects_other_orders() {
        assert!(pnw_vs_alpha(3, &[0.5], &GridPolicy::default()).is_err());
    }

    #[test]
    fn monotone_helper() {
        assert!(is_nonincreasing(&[3.0, 2.0, 2.00005, 1.0], 1e-4));
        assert!(!is_nonincreasing(&[1.0, 1.1], 1e-4));
    }

    #[test]
    fn closed_form_function_matches_fock_route() {
        let alpha = C64::new(0.3, 0.4);
        let spec = PacsSpec::new(alpha, 2).unwrap();
        let a = negativity_of(&ClosedFormPacs { alpha, m: 2 }, alpha, &GridPolicy::default()).unwrap();
        let b = pacs_negativity(&spec, 0.0, &GridPolicy::default()).unwrap();
        assert!((a.p_nw - b.p_nw).abs() < 1e-9);
    }
}
