//! Parameter sweeps, closed-form trajectories and event detection.

use std::f64::consts::{PI, SQRT_2, TAU};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{linspace, Channel, ChannelSpec, NonMarkovParams};
use crate::error::{check_range, Error, Result};
use crate::measures::{correlation_report, CorrelationReport};
use crate::numerics::{fmt_sig12, tol};
use crate::states::{BellEigenvalues, DensityMatrix, EwlKind, StateSpec, XBloch};

/// Points for the default phase-damping grid over `p ∈ [0, 1]`.
pub const DEFAULT_PD_POINTS: usize = 401;
/// Points for the default non-Markovian grid.
pub const DEFAULT_NM_POINTS: usize = 8001;
/// Oscillation periods `2π/d` covered by the default non-Markovian grid.
pub const DEFAULT_NM_PERIODS: f64 = 8.0;
/// Points for the default random-field grid over `gt ∈ [0, 2π]`.
pub const DEFAULT_RF_POINTS: usize = 2001;

/// Measures along a one-parameter evolution.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trajectory {
    pub grid: Vec<f64>,
    pub reports: Vec<CorrelationReport>,
    pub kernel: Vec<f64>,
    #[serde(skip)]
    source: Option<Source>,
}

#[derive(Clone, Copy, Debug)]
struct Source {
    initial: DensityMatrix,
    channel: Channel,
}

impl Trajectory {
    /// Builds a trajectory from precomputed columns, checking shape and
    /// grid ordering. The result cannot be re-evaluated off grid.
    pub fn from_parts(grid: Vec<f64>, reports: Vec<CorrelationReport>, kernel: Vec<f64>) -> Result<Self> {
        check_grid(&grid)?;
        if reports.len() != grid.len() || kernel.len() != grid.len() {
            return Err(Error::validation("trajectory columns differ in length"));
        }
        Ok(Self {
            grid,
            reports,
            kernel,
            source: None,
        })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Exact report at an off-grid parameter, when the trajectory knows how
    /// it was produced.
    pub fn evaluate(&self, s: f64) -> Option<Result<CorrelationReport>> {
        self.source
            .map(|src| src.channel.apply(&src.initial, s).map(|rho| correlation_report(&rho)))
    }

    /// CSV with header `t,B,D_G,C,kernel`; a missing concurrence is `NaN`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,B,D_G,C,kernel\n");
        for ((t, r), k) in self.grid.iter().zip(&self.reports).zip(&self.kernel) {
            let c = r.c.map_or_else(|| "NaN".to_string(), fmt_sig12);
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                fmt_sig12(*t),
                fmt_sig12(r.b),
                fmt_sig12(r.d_g),
                c,
                fmt_sig12(*k)
            );
        }
        out
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::validation("empty grid"));
    }
    if grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::validation("grid has a non-finite value"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::validation("grid is not strictly increasing"));
    }
    Ok(())
}

/// The figure-matching default grid for a channel.
pub fn default_grid(channel: &Channel) -> Vec<f64> {
    let g = match channel {
        Channel::PhaseDamping => linspace(0.0, 1.0, DEFAULT_PD_POINTS),
        Channel::AmplitudeNonMarkov(prm) => {
            // Period 2π/d in units of 1/Γ.
            let period = TAU / prm.d() * prm.gam;
            linspace(0.0, DEFAULT_NM_PERIODS * period, DEFAULT_NM_POINTS)
        }
        Channel::RandomField { .. } => linspace(0.0, TAU, DEFAULT_RF_POINTS),
    };
    g.expect("default grids are well formed")
}

/// Evolves `initial` through `channel` at every grid parameter.
pub fn sweep(initial: &DensityMatrix, channel: &Channel, grid: &[f64]) -> Result<Trajectory> {
    check_grid(grid)?;
    let points: Vec<(CorrelationReport, f64)> = grid
        .par_iter()
        .enumerate()
        .map(|(index, &s)| {
            let at = |e: Error| Error::AtGridPoint {
                index,
                t: s,
                source: Box::new(e),
            };
            let rho = channel.apply(initial, s).map_err(at)?;
            let k = channel.kernel(s).map_err(at)?;
            Ok((correlation_report(&rho), k))
        })
        .collect::<Result<_>>()?;
    let (reports, kernel) = points.into_iter().unzip();
    Ok(Trajectory {
        grid: grid.to_vec(),
        reports,
        kernel,
        source: Some(Source {
            initial: *initial,
            channel: *channel,
        }),
    })
}

/// [`sweep`] driven by JSON specs; the channel's default grid applies when
/// the channel JSON has no grid.
pub fn sweep_spec(state: &StateSpec, channel: &ChannelSpec) -> Result<Trajectory> {
    let rho = state.build()?.density();
    let ch = channel.build()?;
    let grid = channel.explicit_grid(&ch)?.unwrap_or_else(|| default_grid(&ch));
    sweep(&rho, &ch, &grid)
}

/// `B = 2√(r² + 4(1−p)²α²β²r²)`, `D_G = 2(1−p)²α²β²r²` for an EWL state
/// after phase damping of strength `p`.
pub fn closed_form_ewl_pd(r: f64, alpha: f64, p: f64) -> Result<(f64, f64)> {
    check_range("r", r, 0.0, 1.0, "[0, 1]")?;
    check_range("alpha", alpha, 0.0, 1.0, "[0, 1]")?;
    check_range("p", p, 0.0, 1.0, "[0, 1]")?;
    let a2 = alpha * alpha;
    let q = (1.0 - p) * (1.0 - p) * a2 * (1.0 - a2) * r * r;
    Ok((2.0 * (r * r + 4.0 * q).sqrt(), 2.0 * q))
}

/// Bloch parameters of an EWL state after amplitude decay with survival
/// probability `P` on both qubits.
pub fn closed_form_ewl_nm(kind: EwlKind, r: f64, alpha: f64, p: f64) -> Result<XBloch> {
    check_range("r", r, 0.0, 1.0, "[0, 1]")?;
    check_range("alpha", alpha, 0.0, 1.0, "[0, 1]")?;
    check_range("P", p, 0.0, 1.0, "[0, 1]")?;
    let a2 = alpha * alpha;
    let b2 = 1.0 - a2;
    let coh = 2.0 * alpha * b2.sqrt() * r * p;
    Ok(match kind {
        EwlKind::Phi => {
            let c3 = 1.0 - 2.0 * p + (1.0 - r) * p * p;
            XBloch {
                c1: coh,
                c2: coh,
                c3,
                m: (b2 - a2) * r * p - (1.0 - p),
                n: (a2 - b2) * r * p - (1.0 - p),
            }
        }
        EwlKind::Psi => {
            let c3 = 1.0 - (1.0 - r) * p - 4.0 * (0.25 * (1.0 - r) + b2 * r) * p * (1.0 - p);
            let mn = (1.0 - r + 2.0 * b2 * r) * p - 1.0;
            XBloch {
                c1: coh,
                c2: -coh,
                c3,
                m: mn,
                n: mn,
            }
        }
    })
}

/// Bell weights of the worked random-field example at `t = 0`:
/// `λΨ⁺ = 0.9`, `λΨ⁻ = 0.1`.
pub fn rf_example_initial() -> BellEigenvalues {
    BellEigenvalues {
        psi_minus: 0.1,
        phi_minus: 0.0,
        phi_plus: 0.0,
        psi_plus: 0.9,
    }
}

/// `(B, D_G)` of the worked random-field example as a function of `f`.
pub fn closed_form_rf(f: f64) -> Result<(f64, f64)> {
    check_range("f", f, 0.0, 0.5, "[0, 1/2]")?;
    let b = 2.0 * SQRT_2 * ((0.9 - f).powi(2) + (0.1 - f).powi(2)).sqrt();
    let c1 = 0.8 - 1.6 * f;
    let d = if f <= 0.1 {
        (c1 * c1 + 0.64) / 4.0
    } else {
        (c1 * c1 + (1.0 - 2.0 * f).powi(2)) / 4.0
    };
    Ok((b, d))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    ViolationDeath,
    ViolationRevival,
    DiscordZero,
    #[serde(rename = "local_max_B")]
    LocalMaxB,
    #[serde(rename = "local_max_DG")]
    LocalMaxDg,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    pub time: f64,
    pub value: f64,
}

const BISECTION_STEPS: usize = 80;
const GOLDEN_TOL: f64 = 1e-12;

/// Scans a trajectory for violation death and revival (crossings of
/// `B = 2`), discord zeros and strict local maxima of `B` and `D_G`.
///
/// Crossings are interpolated linearly between bracketing grid points and
/// then bisected on the exact curve if the trajectory came from [`sweep`].
/// Events are returned in time order.
pub fn detect_events(traj: &Trajectory) -> Vec<Event> {
    let n = traj.len();
    if n < 3 {
        return Vec::new();
    }
    let t = &traj.grid;
    let b: Vec<f64> = traj.reports.iter().map(|r| r.b).collect();
    let d: Vec<f64> = traj.reports.iter().map(|r| r.d_g).collect();
    let exact = |s: f64, pick: fn(&CorrelationReport) -> f64| -> Option<f64> {
        match traj.evaluate(s)? {
            Ok(r) => Some(pick(&r)),
            Err(_) => None,
        }
    };
    let pick_b: fn(&CorrelationReport) -> f64 = |r| r.b;
    let pick_d: fn(&CorrelationReport) -> f64 = |r| r.d_g;
    let mut events = Vec::new();

    // Crossings of B = 2. A point with B exactly 2 counts as non-violating.
    for i in 0..n - 1 {
        let (s0, s1) = (b[i] - 2.0, b[i + 1] - 2.0);
        let kind = match (s0 > 0.0, s1 > 0.0) {
            (true, false) => EventKind::ViolationDeath,
            (false, true) => EventKind::ViolationRevival,
            _ => continue,
        };
        let mut time = t[i] + (t[i + 1] - t[i]) * s0 / (s0 - s1);
        let mut value = 2.0;
        if traj.source.is_some() {
            let (mut lo, mut hi) = (t[i], t[i + 1]);
            let lo_above = s0 > 0.0;
            let mut ok = true;
            for _ in 0..BISECTION_STEPS {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                match exact(mid, pick_b) {
                    Some(v) if (v - 2.0 > 0.0) == lo_above => lo = mid,
                    Some(_) => hi = mid,
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                time = 0.5 * (lo + hi);
                value = exact(time, pick_b).unwrap_or(2.0);
            }
        }
        events.push(Event { kind, time, value });
    }

    // Discord zeros: runs of grid points at or below the threshold, merged
    // at their smallest value, plus bracketed minima that refine below it.
    let mut i = 0;
    while i < n {
        if d[i] <= tol::DISCORD_ZERO {
            let start = i;
            while i + 1 < n && d[i + 1] <= tol::DISCORD_ZERO {
                i += 1;
            }
            let k = (start..=i).min_by(|&x, &y| d[x].total_cmp(&d[y])).unwrap_or(start);
            events.push(Event {
                kind: EventKind::DiscordZero,
                time: t[k],
                value: d[k],
            });
        } else if i > 0 && i + 1 < n && d[i] <= d[i - 1] && d[i] <= d[i + 1] && (d[i] < d[i - 1] || d[i] < d[i + 1]) {
            let refined = if traj.source.is_some() {
                golden_min(|s| exact(s, pick_d), t[i - 1], t[i + 1])
            } else {
                parabola_vertex(t[i - 1], t[i], t[i + 1], d[i - 1], d[i], d[i + 1])
            };
            if let Some((time, value)) = refined {
                if value <= tol::DISCORD_ZERO {
                    events.push(Event {
                        kind: EventKind::DiscordZero,
                        time,
                        value: value.max(0.0),
                    });
                }
            }
        }
        i += 1;
    }

    // Strict local maxima by neighbour comparison.
    for (kind, ys, pick) in [(EventKind::LocalMaxB, &b, pick_b), (EventKind::LocalMaxDg, &d, pick_d)] {
        let mut i = 1;
        while i + 1 < n {
            if !(ys[i] > ys[i - 1]) {
                i += 1;
                continue;
            }
            // A run of equal values (a peak straddled symmetrically by the
            // grid) counts once, at its centre.
            let mut j = i;
            while j + 1 < n && ys[j + 1] == ys[i] {
                j += 1;
            }
            if j + 1 < n && ys[j + 1] < ys[i] {
                let refined = if traj.source.is_some() {
                    golden_min(|s| exact(s, pick).map(|v| -v), t[i - 1], t[j + 1]).map(|(s, v)| (s, -v))
                } else {
                    None
                };
                let (time, value) = match refined {
                    Some((s, v)) if v >= ys[i] => (s, v),
                    _ => (0.5 * (t[i] + t[j]), ys[i]),
                };
                events.push(Event { kind, time, value });
            }
            i = j + 1;
        }
    }

    events.sort_by(|x, y| x.time.total_cmp(&y.time));
    events
}

/// Golden-section minimisation on `[a, b]`; the better end point wins if the
/// interior search does not improve on it.
fn golden_min(f: impl Fn(f64) -> Option<f64>, a: f64, b: f64) -> Option<(f64, f64)> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while hi - lo > GOLDEN_TOL * (1.0 + a.abs().max(b.abs())) {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2)?;
        }
    }
    let mid = 0.5 * (lo + hi);
    let mut best = (mid, f(mid)?);
    for s in [a, b] {
        let v = f(s)?;
        if v < best.1 {
            best = (s, v);
        }
    }
    Some(best)
}

/// Vertex of the parabola through three points.
fn parabola_vertex(x0: f64, x1: f64, x2: f64, y0: f64, y1: f64, y2: f64) -> Option<(f64, f64)> {
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let a = (d12 - d01) / (x2 - x0);
    if !(a > 0.0) {
        return None;
    }
    let bcoef = d01 - a * (x0 + x1);
    let x = -bcoef / (2.0 * a);
    let y = y1 + (x - x1) * (d01 + a * (x - x0));
    Some((x, y))
}

/// Measures at one zero of the kernel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroCheck {
    pub n: usize,
    pub time: f64,
    pub kernel: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "D_G")]
    pub d_g: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimultaneityReport {
    pub zeros: Vec<ZeroCheck>,
    pub all_ok: bool,
}

/// Checks that `D_G ≤ 1e−9` and `B ≤ 2 + 1e−9` at each supplied zero of the
/// kernel. Trajectories from [`sweep`] are evaluated exactly at each zero;
/// others are interpolated linearly. Times outside the grid are skipped.
pub fn simultaneity_check(traj: &Trajectory, zeros: &[f64]) -> SimultaneityReport {
    let mut out = Vec::new();
    let (Some(&first), Some(&last)) = (traj.grid.first(), traj.grid.last()) else {
        return SimultaneityReport {
            zeros: out,
            all_ok: true,
        };
    };
    for (k, &tz) in zeros.iter().enumerate() {
        if !(tz >= first && tz <= last) {
            continue;
        }
        let kernel = traj
            .source
            .and_then(|s| s.channel.kernel(tz).ok())
            .unwrap_or_else(|| interpolate(&traj.grid, &traj.kernel, tz));
        let (b, d_g) = match traj.evaluate(tz) {
            Some(Ok(r)) => (r.b, r.d_g),
            _ => {
                let bs: Vec<f64> = traj.reports.iter().map(|r| r.b).collect();
                let ds: Vec<f64> = traj.reports.iter().map(|r| r.d_g).collect();
                (interpolate(&traj.grid, &bs, tz), interpolate(&traj.grid, &ds, tz))
            }
        };
        out.push(ZeroCheck {
            n: k + 1,
            time: tz,
            kernel,
            b,
            d_g,
            ok: d_g <= tol::DISCORD_ZERO && b <= 2.0 + tol::DISCORD_ZERO,
        });
    }
    let all_ok = out.iter().all(|z| z.ok);
    SimultaneityReport { zeros: out, all_ok }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let i = xs.partition_point(|&v| v <= x);
    if i == 0 {
        return ys[0];
    }
    if i >= xs.len() {
        return ys[xs.len() - 1];
    }
    let w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    ys[i - 1] + w * (ys[i] - ys[i - 1])
}

/// Zeros of `P_t` as `Γt` values.
pub fn pt_zeros_dimensionless(prm: &NonMarkovParams, n_max: usize) -> Result<Vec<f64>> {
    Ok(crate::channels::pt_zeros(prm, n_max)?
        .into_iter()
        .map(|t| t * prm.gam)
        .collect())
}

/// Phase-damping strength at which the Werner-like EWL state (`α² = ½`)
/// stops violating: the root of `r²(1 + (1−p)²) = 1`. `None` when the
/// initial state does not violate.
pub fn ewl_pd_death_point(r: f64) -> Option<f64> {
    if !(r > 0.0 && r <= 1.0) || 2.0 * r * r <= 1.0 {
        return None;
    }
    let q = (1.0 / (r * r) - 1.0).sqrt();
    Some(1.0 - q)
}

/// Times `nπ/2` (maxima) and `(2n−1)π/4` (discord zeros) of the worked
/// random-field example inside `[0, gt_max]`.
pub fn rf_landmarks(gt_max: f64) -> (Vec<f64>, Vec<f64>) {
    let maxima = (0..).map(|n| n as f64 * PI / 2.0).take_while(|&x| x <= gt_max).collect();
    let zeros = (1..)
        .map(|n| (2 * n - 1) as f64 * PI / 4.0)
        .take_while(|&x| x <= gt_max)
        .collect();
    (maxima, zeros)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{amplitude_decay_set, apply_local_kraus, random_field_bell_update, random_field_f};
    use crate::measures::bloch_report;
    use crate::states::{ewl, to_bloch, BellDiagonal, EwlParams};

    const EPS: f64 = 1e-12;

    fn ewl_rho(kind: EwlKind, r: f64, a2: f64) -> DensityMatrix {
        ewl(&EwlParams::with_alpha_sq(kind, r, a2).unwrap()).density()
    }

    fn count(ev: &[Event], kind: EventKind) -> usize {
        ev.iter().filter(|e| e.kind == kind).count()
    }

    #[test]
    fn single_point_grid_is_initial_state() {
        let rho = ewl_rho(EwlKind::Psi, 0.7, 0.3);
        for ch in [
            Channel::PhaseDamping,
            Channel::AmplitudeNonMarkov(NonMarkovParams::from_ratio(0.01).unwrap()),
            Channel::RandomField { g: 1.0 },
        ] {
            let tr = sweep(&rho, &ch, &[0.0]).unwrap();
            let r0 = correlation_report(&rho);
            assert!((tr.reports[0].b - r0.b).abs() < EPS);
            assert!((tr.reports[0].d_g - r0.d_g).abs() < EPS);
        }
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let rho = DensityMatrix::maximally_mixed();
        assert!(sweep(&rho, &Channel::PhaseDamping, &[]).is_err());
        assert!(sweep(&rho, &Channel::PhaseDamping, &[0.5, 0.2]).is_err());
        let err = sweep(&rho, &Channel::PhaseDamping, &[0.5, 1.5]).unwrap_err();
        assert!(matches!(err, Error::AtGridPoint { index: 1, .. }));
    }

    #[test]
    fn phase_damping_sweep_matches_closed_form() {
        let r = 0.8;
        let tr = sweep(&ewl_rho(EwlKind::Phi, r, 0.5), &Channel::PhaseDamping, &default_grid(&Channel::PhaseDamping)).unwrap();
        for (p, rep) in tr.grid.iter().zip(&tr.reports) {
            let want = 2.0 * (r * r + (1.0 - p).powi(2) * r * r).sqrt();
            assert!((rep.b - want).abs() < EPS);
            let (b, d) = closed_form_ewl_pd(r, 0.5f64.sqrt(), *p).unwrap();
            assert!((rep.b - b).abs() < EPS && (rep.d_g - d).abs() < EPS);
        }
        for w in tr.reports.windows(2) {
            assert!(w[1].b < w[0].b);
        }
    }

    #[test]
    fn closed_form_pd_examples() {
        let (r, a) = (0.6, 0.8);
        let init = crate::measures::measures_x(&ewl(&EwlParams::new(EwlKind::Phi, r, a).unwrap()));
        let (b, d) = closed_form_ewl_pd(r, a, 0.0).unwrap();
        assert!((b - init.b).abs() < EPS && (d - init.d_g).abs() < EPS);
        assert_eq!(closed_form_ewl_pd(r, a, 1.0).unwrap(), (2.0 * r, 0.0));
        assert!(closed_form_ewl_pd(1.2, a, 0.5).is_err());
        for i in 0..20 {
            for j in 0..20 {
                for k in 0..20 {
                    let (r, a2, p) = (i as f64 / 19.0, j as f64 / 19.0, k as f64 / 19.0);
                    let (b, d) = closed_form_ewl_pd(r, a2.sqrt(), p).unwrap();
                    assert!((b * b - 4.0 * r * r - 8.0 * d).abs() < EPS);
                }
            }
        }
    }

    #[test]
    fn closed_form_nm_matches_dense_path() {
        for kind in [EwlKind::Phi, EwlKind::Psi] {
            for &(r, a2) in &[(1.0, 1.0 / 3.0), (0.85, 0.5), (0.4, 0.9), (0.0, 0.2)] {
                let p = EwlParams::with_alpha_sq(kind, r, a2).unwrap();
                let rho = ewl(&p).density();
                for i in 0..=20 {
                    let pt = i as f64 / 20.0;
                    let set = amplitude_decay_set(pt).unwrap();
                    let dense = to_bloch(&apply_local_kraus(&rho, &set, &set).unwrap());
                    let cf = closed_form_ewl_nm(kind, r, p.alpha, pt).unwrap();
                    let want = cf.bloch();
                    assert!(dense.max_abs_diff(&want) < EPS, "{kind:?} r={r} a2={a2} P={pt}");
                }
            }
        }
        let a = (1.0f64 / 3.0).sqrt();
        let b = (2.0f64 / 3.0).sqrt();
        let cf = closed_form_ewl_nm(EwlKind::Phi, 0.7, a, 0.4).unwrap();
        assert!((cf.c1 - 2.0 * a * b * 0.7 * 0.4).abs() < EPS);
        let z = closed_form_ewl_nm(EwlKind::Phi, 0.7, a, 0.0).unwrap();
        assert_eq!(z.as_array(), [0.0, 0.0, 1.0, -1.0, -1.0]);
        let one = closed_form_ewl_nm(EwlKind::Psi, 0.7, a, 1.0).unwrap();
        let init = ewl(&EwlParams::new(EwlKind::Psi, 0.7, a).unwrap()).bloch();
        for (x, y) in one.as_array().iter().zip(init.as_array()) {
            assert!((x - y).abs() < EPS);
        }
    }

    #[test]
    fn closed_form_rf_examples() {
        let (b, d) = closed_form_rf(0.0).unwrap();
        assert!((b - 2.0 * SQRT_2 * 0.82f64.sqrt()).abs() < EPS);
        assert!((d - 0.32).abs() < EPS);
        assert!(closed_form_rf(0.5).unwrap().1.abs() < EPS);
        let c1 = 0.8 - 1.6 * 0.1;
        let left = (c1 * c1 + 0.64) / 4.0;
        let right = (c1 * c1 + 0.8f64.powi(2)) / 4.0;
        assert!((left - right).abs() < EPS);
        assert!((closed_form_rf(0.1).unwrap().1 - closed_form_rf(0.1 + 1e-13).unwrap().1).abs() < 1e-12);
        assert!(closed_form_rf(0.6).is_err());
    }

    #[test]
    fn rf_sweep_matches_closed_form_and_update() {
        let l0 = rf_example_initial();
        let rho = BellDiagonal::from_eigenvalues(&l0).unwrap().density();
        let ch = Channel::RandomField { g: 1.0 };
        let tr = sweep(&rho, &ch, &default_grid(&ch)).unwrap();
        for ((gt, rep), f) in tr.grid.iter().zip(&tr.reports).zip(&tr.kernel) {
            assert_eq!(*f, random_field_f(*gt));
            let (b, d) = closed_form_rf(*f).unwrap();
            assert!((rep.b - b).abs() < EPS && (rep.d_g - d).abs() < EPS);
            let l = random_field_bell_update(&l0, *f).unwrap();
            let via_c = bloch_report(&BellDiagonal::from_eigenvalues(&l).unwrap().bloch(), None);
            assert!((via_c.b - rep.b).abs() < EPS);
        }
    }

    #[test]
    fn rf_periodicity() {
        let rho = BellDiagonal::from_eigenvalues(&rf_example_initial()).unwrap().density();
        let ch = Channel::RandomField { g: 1.0 };
        let grid: Vec<f64> = (0..200).map(|i| i as f64 * 0.013).collect();
        let shifted: Vec<f64> = grid.iter().map(|g| g + PI / 2.0).collect();
        let a = sweep(&rho, &ch, &grid).unwrap();
        let b = sweep(&rho, &ch, &shifted).unwrap();
        for (x, y) in a.reports.iter().zip(&b.reports) {
            assert!((x.b - y.b).abs() < EPS && (x.d_g - y.d_g).abs() < EPS);
        }
    }

    #[test]
    fn rf_events_on_fine_grid() {
        let rho = BellDiagonal::from_eigenvalues(&rf_example_initial()).unwrap().density();
        let ch = Channel::RandomField { g: 1.0 };
        let grid = linspace(0.0, TAU, 10_000).unwrap();
        let step = grid[1];
        let tr = sweep(&rho, &ch, &grid).unwrap();
        let ev = detect_events(&tr);
        let (maxima, zeros) = rf_landmarks(TAU);
        let bmax: Vec<&Event> = ev.iter().filter(|e| e.kind == EventKind::LocalMaxB).collect();
        // Interior maxima only: π/2, π, 3π/2.
        assert_eq!(bmax.len(), 3);
        let peak = 2.0 * SQRT_2 * 0.82f64.sqrt();
        for (e, m) in bmax.iter().zip(&maxima[1..]) {
            assert!((e.time - m).abs() <= step);
            assert!((e.value - peak).abs() < 1e-9);
        }
        let dmax = count(&ev, EventKind::LocalMaxDg);
        assert_eq!(dmax, 3);
        let dz: Vec<&Event> = ev.iter().filter(|e| e.kind == EventKind::DiscordZero).collect();
        assert_eq!(dz.len(), zeros.len());
        for (e, z) in dz.iter().zip(&zeros) {
            assert!((e.time - z).abs() <= step);
            assert!(e.value <= 1e-9);
        }
        // B falls to 1.6 between maxima, so each quarter period has one death
        // and one revival.
        assert_eq!(count(&ev, EventKind::ViolationDeath), 4);
        assert_eq!(count(&ev, EventKind::ViolationRevival), 4);
    }

    #[test]
    fn phi_psi_coincide_at_half() {
        let ch = Channel::AmplitudeNonMarkov(NonMarkovParams::from_ratio(1e-3).unwrap());
        let grid = linspace(0.0, 300.0, 601).unwrap();
        for r in [1.0, 0.85, 0.3] {
            let a = sweep(&ewl_rho(EwlKind::Phi, r, 0.5), &ch, &grid).unwrap();
            let b = sweep(&ewl_rho(EwlKind::Psi, r, 0.5), &ch, &grid).unwrap();
            // The violation amplitude coincides; below B = 2 the branches
            // differ through c₃, which carries an extra 2rP².
            for (x, y) in a.reports.iter().zip(&b.reports) {
                assert!((x.b.max(2.0) - y.b.max(2.0)).abs() < EPS);
            }
            let va: Vec<Event> = detect_events(&a)
                .into_iter()
                .filter(|e| matches!(e.kind, EventKind::ViolationDeath | EventKind::ViolationRevival))
                .collect();
            let vb: Vec<Event> = detect_events(&b)
                .into_iter()
                .filter(|e| matches!(e.kind, EventKind::ViolationDeath | EventKind::ViolationRevival))
                .collect();
            assert_eq!(va.len(), vb.len());
            for (x, y) in va.iter().zip(&vb) {
                assert_eq!(x.kind, y.kind);
                assert!((x.time - y.time).abs() < 1e-9);
            }
        }
        let a = sweep(&ewl_rho(EwlKind::Phi, 1.0, 0.5), &ch, &grid).unwrap();
        let b = sweep(&ewl_rho(EwlKind::Psi, 1.0, 0.5), &ch, &grid).unwrap();
        let raw_gap = a.reports.iter().zip(&b.reports).map(|(x, y)| (x.b - y.b).abs()).fold(0.0, f64::max);
        assert!(raw_gap > 1e-3);
    }

    #[test]
    fn phi_branch_alpha_symmetry_at_full_purity() {
        let ch = Channel::AmplitudeNonMarkov(NonMarkovParams::from_ratio(1e-3).unwrap());
        let grid = linspace(0.0, 300.0, 301).unwrap();
        let a = sweep(&ewl_rho(EwlKind::Phi, 1.0, 0.2), &ch, &grid).unwrap();
        let b = sweep(&ewl_rho(EwlKind::Phi, 1.0, 0.8), &ch, &grid).unwrap();
        for (x, y) in a.reports.iter().zip(&b.reports) {
            assert!((x.b - y.b).abs() < EPS);
        }
        let a = sweep(&ewl_rho(EwlKind::Psi, 1.0, 0.2), &ch, &grid).unwrap();
        let b = sweep(&ewl_rho(EwlKind::Psi, 1.0, 0.8), &ch, &grid).unwrap();
        let worst = a
            .reports
            .iter()
            .zip(&b.reports)
            .map(|(x, y)| (x.b - y.b).abs())
            .fold(0.0, f64::max);
        assert!(worst > 1e-3);
    }

    #[test]
    fn phase_damping_death_point() {
        let r = 0.9;
        let tr = sweep(&ewl_rho(EwlKind::Phi, r, 0.5), &Channel::PhaseDamping, &default_grid(&Channel::PhaseDamping)).unwrap();
        let ev = detect_events(&tr);
        let deaths: Vec<&Event> = ev.iter().filter(|e| e.kind == EventKind::ViolationDeath).collect();
        assert_eq!(deaths.len(), 1);
        let want = ewl_pd_death_point(r).unwrap();
        assert!((want - 0.5157).abs() < 1e-4);
        assert!((deaths[0].time - want).abs() < 1e-9);
        assert!((r * r * (1.0 + (1.0 - want).powi(2)) - 1.0).abs() < EPS);
        assert_eq!(count(&ev, EventKind::ViolationRevival), 0);
        assert_eq!(ewl_pd_death_point(0.7), None);
    }

    #[test]
    fn death_detection_without_source_interpolates() {
        let grid = linspace(0.0, 1.0, 401).unwrap();
        let r = 0.9;
        let a = 0.5f64.sqrt();
        let tr = sweep(&ewl_rho(EwlKind::Phi, r, 0.5), &Channel::PhaseDamping, &grid).unwrap();
        let bare = Trajectory::from_parts(tr.grid.clone(), tr.reports.clone(), tr.kernel.clone()).unwrap();
        let ev = detect_events(&bare);
        let death = ev.iter().find(|e| e.kind == EventKind::ViolationDeath).unwrap();
        assert!((death.time - ewl_pd_death_point(r).unwrap()).abs() < grid[1]);
        assert!(closed_form_ewl_pd(r, a, death.time).is_ok());
    }

    fn revivals(ratio: f64, kind: EwlKind, r: f64, a2: f64) -> usize {
        let ch = Channel::AmplitudeNonMarkov(NonMarkovParams::from_ratio(ratio).unwrap());
        let tr = sweep(&ewl_rho(kind, r, a2), &ch, &default_grid(&ch)).unwrap();
        count(&detect_events(&tr), EventKind::ViolationRevival)
    }

    #[test]
    fn revival_counts() {
        let strong = revivals(1e-3, EwlKind::Phi, 1.0, 0.5);
        assert!(strong >= 1);
        assert!(revivals(1e-3, EwlKind::Phi, 0.85, 0.5) < strong);
        assert_eq!(revivals(1e-1, EwlKind::Phi, 1.0, 0.5), 0);
        assert_eq!(revivals(1e-2, EwlKind::Phi, 1.0, 0.5), 0);
    }

    #[test]
    fn simultaneity_at_kernel_zeros() {
        let prm = NonMarkovParams::from_ratio(1e-4).unwrap();
        let ch = Channel::AmplitudeNonMarkov(prm);
        let zeros = pt_zeros_dimensionless(&prm, 3).unwrap();
        for kind in [EwlKind::Phi, EwlKind::Psi] {
            for a2 in [1.0 / 3.0, 0.5] {
                let tr = sweep(&ewl_rho(kind, 1.0, a2), &ch, &default_grid(&ch)).unwrap();
                let rep = simultaneity_check(&tr, &zeros);
                assert_eq!(rep.zeros.len(), 3);
                assert!(rep.all_ok, "{kind:?} {a2}: {rep:?}");
                let ev = detect_events(&tr);
                for z in &zeros {
                    assert!(ev
                        .iter()
                        .any(|e| e.kind == EventKind::DiscordZero && (e.time - z).abs() <= tr.grid[1]));
                }
            }
        }
        let tr = sweep(&ewl_rho(EwlKind::Phi, 1.0, 0.5), &ch, &[0.0, 1.0, 2.0]).unwrap();
        assert!(simultaneity_check(&tr, &[0.0]).zeros[0].b > 2.0);
    }

    #[test]
    fn default_grids() {
        assert_eq!(default_grid(&Channel::PhaseDamping).len(), 401);
        let prm = NonMarkovParams::from_ratio(1e-3).unwrap();
        let g = default_grid(&Channel::AmplitudeNonMarkov(prm));
        assert_eq!(g.len(), 8001);
        let period = TAU / prm.d();
        assert!((g[8000] - 8.0 * period).abs() < 1e-9);
        assert!(period / g[1] >= 20.0);
        let g = default_grid(&Channel::RandomField { g: 1.0 });
        assert_eq!((g.len(), g[2000]), (2001, TAU));
    }

    #[test]
    fn csv_layout() {
        let rho = ewl_rho(EwlKind::Phi, 1.0, 0.5);
        let tr = sweep(&rho, &Channel::PhaseDamping, &[0.0, 0.5, 1.0]).unwrap();
        let csv = tr.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,B,D_G,C,kernel");
        assert_eq!(lines.len(), 4);
        assert!(!csv.contains('\r'));
        let last: Vec<f64> = lines[3].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(last, vec![1.0, 2.0, 0.0, 0.0, 0.0]);
        let json = serde_json::to_value(&tr).unwrap();
        assert!(json["reports"][0]["B"].is_number());
        let back: Trajectory = serde_json::from_value(json).unwrap();
        assert_eq!(back.grid, tr.grid);
    }
}
