//! Trajectory diagnostics: ellipse fits, period and orientation, drift of
//! conserved quantities, and curve distances between trajectories.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fields::ClassicalSystem;
use crate::integrate::Trajectory;

pub const MIN_FIT_SAMPLES: usize = 16;
pub const MIN_PERIOD_SAMPLES: usize = 200;
/// Candidate periods scanned before refinement.
pub const PERIOD_GRID: usize = 2000;
pub const PERIOD_MIN_CANDIDATE: f64 = 0.05;
/// A period is reported only when its recurrence error is below this
/// fraction of the trajectory diameter.
pub const PERIOD_ACCEPT_FRACTION: f64 = 0.1;
/// Local minima within this fraction of the diameter of the global minimum
/// compete; the shortest wins.
pub const PERIOD_SLACK_FRACTION: f64 = 0.02;
pub const DRIFT_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("samples are collinear: line through {point} with direction angle {angle}")]
    Degenerate { point: Complex64, angle: f64 },
    #[error("window ({0}, {1}) is not inside the trajectory span ({2}, {3})")]
    Window(f64, f64, f64, f64),
    #[error("complex energy drift needs momenta")]
    MissingMomenta,
    #[error("trajectory is empty")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Orientation {
    Clockwise,
    Anticlockwise,
    Undetermined,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Clockwise => -1.0,
            Orientation::Anticlockwise => 1.0,
            Orientation::Undetermined => 0.0,
        }
    }
}

/// `x − center = A cos θ + i B sin θ`, axis-aligned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipseFit {
    pub a: f64,
    pub b: f64,
    pub center: Complex64,
    /// `θ` at the first sample.
    pub phase: f64,
    pub residual: f64,
    pub orientation: Orientation,
}

impl EllipseFit {
    /// `B` carrying the sense of traversal: negative for clockwise orbits,
    /// matching `A cos ωt + i B sin ωt` with a signed `B`.
    pub fn signed_b(&self) -> f64 {
        if self.orientation == Orientation::Clockwise {
            -self.b
        } else {
            self.b
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodEstimate {
    /// Shortest recurrence time; `None` when nothing recurs within
    /// [`PERIOD_ACCEPT_FRACTION`] of the diameter.
    pub period: Option<f64>,
    pub recurrence_error: f64,
    pub orientation: Orientation,
    /// Window length divided by the number of turns around the window
    /// centroid. Differs from `period` when an orbit closes only after
    /// several turns.
    pub loop_period: Option<f64>,
    pub diameter: f64,
}

pub fn centroid(points: &[Complex64]) -> Complex64 {
    let n = points.len().max(1) as f64;
    points.iter().sum::<Complex64>() / n
}

/// Largest distance between two points, via the convex hull.
pub fn diameter(points: &[Complex64]) -> f64 {
    let hull = convex_hull(points);
    let mut best: f64 = 0.0;
    for (i, p) in hull.iter().enumerate() {
        for q in &hull[i + 1..] {
            best = best.max((p - q).norm());
        }
    }
    best
}

fn convex_hull(points: &[Complex64]) -> Vec<Complex64> {
    let mut pts: Vec<Complex64> = points.to_vec();
    pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: Complex64, a: Complex64, b: Complex64| (a - o).re * (b - o).im - (a - o).im * (b - o).re;
    let mut hull: Vec<Complex64> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Complex64>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Twice the signed area swept around `center`; positive for
/// anticlockwise motion.
pub fn signed_area(points: &[Complex64], center: Complex64) -> f64 {
    points
        .windows(2)
        .map(|w| {
            let (p, q) = (w[0] - center, w[1] - center);
            p.re * (q.im - p.im) - p.im * (q.re - p.re)
        })
        .sum()
}

fn orientation_of(points: &[Complex64], center: Complex64, scale: f64) -> Orientation {
    let area = signed_area(points, center);
    if area.abs() <= 1e-12 * scale * scale {
        Orientation::Undetermined
    } else if area > 0.0 {
        Orientation::Anticlockwise
    } else {
        Orientation::Clockwise
    }
}

/// Least-squares axis-aligned ellipse through the samples.
pub fn fit_ellipse(traj: &Trajectory) -> Result<EllipseFit, AnalysisError> {
    fit_ellipse_points(&traj.positions)
}

pub fn fit_ellipse_points(points: &[Complex64]) -> Result<EllipseFit, AnalysisError> {
    if points.len() < MIN_FIT_SAMPLES {
        return Err(AnalysisError::TooFewSamples {
            need: MIN_FIT_SAMPLES,
            got: points.len(),
        });
    }
    let c = centroid(points);
    let shifted: Vec<Complex64> = points.iter().map(|p| p - c).collect();

    // Principal axes of the cloud detect collinear input.
    let n = shifted.len() as f64;
    let sxx = shifted.iter().map(|p| p.re * p.re).sum::<f64>() / n;
    let syy = shifted.iter().map(|p| p.im * p.im).sum::<f64>() / n;
    let sxy = shifted.iter().map(|p| p.re * p.im).sum::<f64>() / n;
    let tr = sxx + syy;
    let disc = ((sxx - syy).powi(2) + 4.0 * sxy * sxy).sqrt();
    let (l_max, l_min) = (0.5 * (tr + disc), 0.5 * (tr - disc));
    if l_max <= 0.0 || l_min <= 1e-20 * l_max {
        let angle = 0.5 * (2.0 * sxy).atan2(sxx - syy);
        return Err(AnalysisError::Degenerate { point: c, angle });
    }

    // u x² + v y² + d x + e y = 1, scaled for conditioning.
    let s = l_max.sqrt();
    let rows = shifted.len();
    let m = DMatrix::from_fn(rows, 4, |i, j| {
        let (x, y) = (shifted[i].re / s, shifted[i].im / s);
        match j {
            0 => x * x,
            1 => y * y,
            2 => x,
            _ => y,
        }
    });
    let rhs = DVector::from_element(rows, 1.0);
    let sol = m
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|_| AnalysisError::Degenerate { point: c, angle: 0.0 })?;
    let (u, v, d, e) = (sol[0], sol[1], sol[2], sol[3]);
    let (x0, y0) = (-d / (2.0 * u), -e / (2.0 * v));
    let g = 1.0 + u * x0 * x0 + v * y0 * y0;
    if !(u > 0.0 && v > 0.0 && g > 0.0) {
        let angle = 0.5 * (2.0 * sxy).atan2(sxx - syy);
        return Err(AnalysisError::Degenerate { point: c, angle });
    }
    let a = s * (g / u).sqrt();
    let b = s * (g / v).sqrt();
    let center = c + s * Complex64::new(x0, y0);

    let residual = (points
        .iter()
        .map(|p| {
            let q = p - center;
            let r = (q.re / a).powi(2) + (q.im / b).powi(2) - 1.0;
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    let first = points[0] - center;
    let phase = (first.im / b).atan2(first.re / a);
    Ok(EllipseFit {
        a,
        b,
        center,
        phase,
        residual,
        orientation: orientation_of(points, center, a.max(b)),
    })
}

/// Cubic interpolation on a uniform grid starting at `t0`.
fn interpolate(points: &[Complex64], t0: f64, dt: f64, t: f64) -> Complex64 {
    let n = points.len();
    let u = (t - t0) / dt;
    let i = (u.floor() as isize).clamp(1, n as isize - 3) as usize;
    let s = u - i as f64;
    let (p0, p1, p2, p3) = (points[i - 1], points[i], points[i + 1], points[i + 2]);
    // Lagrange basis on nodes -1, 0, 1, 2.
    let w0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
    let w1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
    let w2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
    let w3 = (s + 1.0) * s * (s - 1.0) / 6.0;
    w0 * p0 + w1 * p1 + w2 * p2 + w3 * p3
}

fn recurrence_error(points: &[Complex64], t0: f64, dt: f64, period: f64) -> f64 {
    let n = points.len();
    let t_end = t0 + dt * (n - 1) as f64;
    let mut worst: f64 = 0.0;
    for (k, p) in points.iter().enumerate() {
        let t = t0 + dt * k as f64;
        if t + period > t_end + 1e-12 * dt {
            break;
        }
        worst = worst.max((interpolate(points, t0, dt, t + period) - p).norm());
    }
    worst
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - r * (hi - lo);
    let mut d = lo + r * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - r * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + r * (hi - lo);
            fd = f(d);
        }
        if hi - lo < 1e-10 * hi.abs().max(1.0) {
            break;
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Recurrence period, turn period and sense of rotation on `window`.
pub fn detect_period(traj: &Trajectory, window: (f64, f64)) -> Result<PeriodEstimate, AnalysisError> {
    let (lo, hi) = window;
    let (first, last) = match (traj.times.first(), traj.times.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(AnalysisError::Empty),
    };
    let slack = 1e-9 * (last - first).abs().max(1.0);
    if !(lo < hi && lo >= first - slack && hi <= last + slack) {
        return Err(AnalysisError::Window(lo, hi, first, last));
    }
    let idx: Vec<usize> = (0..traj.times.len())
        .filter(|&i| traj.times[i] >= lo - slack && traj.times[i] <= hi + slack)
        .collect();
    if idx.len() < MIN_PERIOD_SAMPLES {
        return Err(AnalysisError::TooFewSamples {
            need: MIN_PERIOD_SAMPLES,
            got: idx.len(),
        });
    }
    let points: Vec<Complex64> = idx.iter().map(|&i| traj.positions[i]).collect();
    let t0 = traj.times[idx[0]];
    let span = traj.times[*idx.last().unwrap()] - t0;
    let dt = span / (points.len() - 1) as f64;
    let diam = diameter(&points);
    let center = centroid(&points);

    let t_max = span / 3.0;
    let candidates: Vec<f64> = (0..PERIOD_GRID)
        .map(|k| PERIOD_MIN_CANDIDATE + (t_max - PERIOD_MIN_CANDIDATE) * k as f64 / (PERIOD_GRID - 1) as f64)
        .collect();
    let errors: Vec<f64> = candidates
        .iter()
        .map(|&t| recurrence_error(&points, t0, dt, t))
        .collect();
    let best = errors.iter().copied().fold(f64::INFINITY, f64::min);
    let threshold = best + PERIOD_SLACK_FRACTION * diam;
    let last_k = PERIOD_GRID - 1;
    let chosen = (1..=last_k).find(|&k| {
        let left_ok = errors[k] <= errors[k - 1];
        let right_ok = k == last_k || errors[k] <= errors[k + 1];
        left_ok && right_ok && errors[k] <= threshold
    });
    let (period, recurrence) = match chosen {
        Some(k) => {
            let a = candidates[k - 1];
            let b = if k == last_k { candidates[k] } else { candidates[k + 1] };
            let (t, e) = golden_min(|t| recurrence_error(&points, t0, dt, t), a, b);
            if e <= errors[k] {
                (t, e)
            } else {
                (candidates[k], errors[k])
            }
        }
        None => (f64::NAN, best),
    };

    let turns = winding_number(&points, center);
    let loop_period = (turns.abs() >= 1.0).then(|| span / turns.abs());
    Ok(PeriodEstimate {
        period: (chosen.is_some() && recurrence <= PERIOD_ACCEPT_FRACTION * diam).then_some(period),
        recurrence_error: recurrence,
        orientation: orientation_of(&points, center, diam),
        loop_period,
        diameter: diam,
    })
}

/// Signed number of turns around `center`; positive anticlockwise.
pub fn winding_number(points: &[Complex64], center: Complex64) -> f64 {
    let total: f64 = points
        .windows(2)
        .map(|w| ((w[1] - center) / (w[0] - center)).arg())
        .sum();
    total / std::f64::consts::TAU
}

#[derive(Debug, Clone, Copy)]
pub enum DriftQuantity<'a> {
    AbsPosition,
    ComplexEnergy(&'a ClassicalSystem),
}

/// `max_t |q(t) − q(t₀)| / max(|q(t₀)|, floor)`.
pub fn conserved_drift(traj: &Trajectory, quantity: DriftQuantity<'_>) -> Result<f64, AnalysisError> {
    if traj.is_empty() {
        return Err(AnalysisError::Empty);
    }
    let values: Vec<Complex64> = match quantity {
        DriftQuantity::AbsPosition => traj.positions.iter().map(|x| Complex64::new(x.norm(), 0.0)).collect(),
        DriftQuantity::ComplexEnergy(system) => {
            let momenta = traj.momenta.as_ref().ok_or(AnalysisError::MissingMomenta)?;
            traj.positions
                .iter()
                .zip(momenta)
                .map(|(&x, &p)| system.hamiltonian(x, p))
                .collect()
        }
    };
    let q0 = values[0];
    let denom = q0.norm().max(DRIFT_FLOOR);
    Ok(values.iter().map(|q| (q - q0).norm()).fold(0.0, f64::max) / denom)
}

fn point_segment_distance_sq(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let (abx, aby) = (b.re - a.re, b.im - a.im);
    let (apx, apy) = (p.re - a.re, p.im - a.im);
    let (bpx, bpy) = (p.re - b.re, p.im - b.im);
    let ends = (apx * apx + apy * apy).min(bpx * bpx + bpy * bpy);
    let len2 = abx * abx + aby * aby;
    if len2 == 0.0 {
        return ends;
    }
    let s = (apx * abx + apy * aby) / len2;
    if s <= 0.0 || s >= 1.0 {
        return ends;
    }
    let (dx, dy) = (apx - s * abx, apy - s * aby);
    (dx * dx + dy * dy).min(ends)
}

/// Directed Hausdorff distance from the points `from` to the polyline `to`.
/// Segments are scanned outward from the previous point's nearest one, and
/// the scan stops as soon as the running maximum cannot grow.
fn directed_distance(from: &[Complex64], to: &[Complex64]) -> f64 {
    if to.len() == 1 {
        return from.iter().map(|p| (p - to[0]).norm()).fold(0.0, f64::max);
    }
    let segments = to.len() - 1;
    let dist = |p: Complex64, j: usize| point_segment_distance_sq(p, to[j], to[j + 1]);
    let mut worst_sq: f64 = 0.0;
    let mut hint = 0usize;
    for &p in from {
        let mut best = dist(p, hint);
        let mut best_j = hint;
        if best > worst_sq {
            for step in 1..segments {
                let mut any = false;
                for j in [hint.checked_add(step), hint.checked_sub(step)].into_iter().flatten() {
                    if j >= segments {
                        continue;
                    }
                    any = true;
                    let d = dist(p, j);
                    if d < best {
                        best = d;
                        best_j = j;
                    }
                }
                if best <= worst_sq || !any {
                    break;
                }
            }
        }
        hint = best_j;
        worst_sq = worst_sq.max(best);
    }
    worst_sq.sqrt()
}

/// Symmetric Hausdorff distance between the two sampled curves, each
/// taken as the polyline through its samples, divided by the larger of
/// the two diameters.
pub fn congruence_metric(traj_q: &Trajectory, traj_c: &Trajectory) -> Result<f64, AnalysisError> {
    curve_distance(&traj_q.positions, &traj_c.positions)
}

pub fn curve_distance(a: &[Complex64], b: &[Complex64]) -> Result<f64, AnalysisError> {
    if a.is_empty() || b.is_empty() {
        return Err(AnalysisError::Empty);
    }
    let h = directed_distance(a, b).max(directed_distance(b, a));
    let scale = diameter(a).max(diameter(b));
    Ok(if scale > 0.0 { h / scale } else { h })
}

/// Largest `|x − center|` in each consecutive cycle of length `cycle`.
pub fn cycle_extrema(traj: &Trajectory, cycle: f64, center: Complex64) -> Vec<f64> {
    let Some(&t0) = traj.times.first() else {
        return Vec::new();
    };
    // A sample on a cycle boundary closes the cycle that ends there.
    let cycle_of = |t: f64| (((t - t0) / cycle - 1e-9).ceil() as usize).saturating_sub(1);
    let mut out: Vec<f64> = Vec::new();
    let mut current = 0usize;
    let mut best: f64 = 0.0;
    for (&t, x) in traj.times.iter().zip(&traj.positions) {
        let k = cycle_of(t);
        if k != current {
            out.push(best);
            best = 0.0;
            current = k;
        }
        best = best.max((x - center).norm());
    }
    // Only completed cycles count.
    let u_last = (traj.times.last().copied().unwrap_or(t0) - t0) / cycle;
    if u_last >= 1.0 - 1e-9 && (u_last - u_last.round()).abs() < 1e-9 {
        out.push(best);
    }
    out
}

/// Central-difference velocities of a uniformly sampled trajectory.
pub fn sample_velocities(traj: &Trajectory) -> Vec<Complex64> {
    let (t, x) = (&traj.times, &traj.positions);
    let n = x.len();
    (0..n)
        .map(|i| {
            let (a, b) = if n < 2 {
                return Complex64::new(0.0, 0.0);
            } else if i == 0 {
                (0, 1)
            } else if i == n - 1 {
                (n - 2, n - 1)
            } else {
                (i - 1, i + 1)
            };
            (x[b] - x[a]) / (t[b] - t[a])
        })
        .collect()
}

/// Counts `(flat, total)` of samples with `Re x` inside `(lo, hi)` and the
/// number among them whose velocity satisfies `|v_i| < ratio·|v_r|`.
pub fn flat_sample_counts(traj: &Trajectory, band: (f64, f64), ratio: f64) -> (usize, usize) {
    let v = sample_velocities(traj);
    let mut flat = 0;
    let mut total = 0;
    for (x, v) in traj.positions.iter().zip(&v) {
        if x.re > band.0 && x.re < band.1 {
            total += 1;
            if v.im.abs() < ratio * v.re.abs() {
                flat += 1;
            }
        }
    }
    (flat, total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{classical_ho_solution, EnergySpec};
    use crate::integrate::{integrate_field, sample_times, IntegratorConfig};
    use crate::states::ModelParams;
    use crate::fields::HoCoherentField;
    use proptest::prelude::*;
    use std::f64::consts::{PI, SQRT_2, TAU};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sampled(t0: f64, t1: f64, n: usize, f: impl Fn(f64) -> Complex64) -> Trajectory {
        let ts = sample_times(t0, t1, n);
        let xs = ts.iter().map(|&t| f(t)).collect();
        Trajectory::from_samples(ts, xs, "synthetic")
    }

    #[test]
    fn unit_circle_fit() {
        let traj = sampled(0.0, TAU, 500, |t| Complex64::from_polar(1.0, t));
        let fit = fit_ellipse(&traj).unwrap();
        assert!((fit.a - 1.0).abs() < 1e-12 && (fit.b - 1.0).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
        assert!(fit.center.norm() < 1e-12);
        assert_eq!(fit.orientation, Orientation::Anticlockwise);
        assert!(fit.phase.abs() < 1e-12);
    }

    #[test]
    fn classical_ellipse_fit() {
        let p = ModelParams::default();
        let e = EnergySpec { energy: 4.5 };
        let traj = sampled(0.0, TAU, 2000, |t| classical_ho_solution(3.2, e, &p, t).unwrap());
        let fit = fit_ellipse(&traj).unwrap();
        assert!((fit.a - 3.2).abs() < 1e-8);
        assert!((fit.b - 1.24f64.sqrt()).abs() < 1e-8);
        assert!((fit.b - 1.11355).abs() < 1e-5);
    }

    #[test]
    fn coherent_trajectory_semi_axes_differ_by_root_two_lambda() {
        let field = HoCoherentField {
            params: ModelParams::default(),
            lambda: 2.1,
            kappa: 0.0,
        };
        let traj = integrate_field(&field, c(2.9, 0.0), (0.0, TAU), &IntegratorConfig::default()).unwrap();
        let fit = fit_ellipse(&traj).unwrap();
        assert!(fit.residual < 1e-6);
        assert!((fit.a - fit.signed_b() - SQRT_2 * 2.1).abs() < 1e-6);
    }

    #[test]
    fn collinear_samples_are_degenerate() {
        let traj = sampled(0.0, 1.0, 100, |t| c(1.0 + t, 2.0 + t));
        match fit_ellipse(&traj) {
            Err(AnalysisError::Degenerate { point, angle }) => {
                assert!((point - c(1.5, 2.5)).norm() < 1e-12);
                assert!((angle - PI / 4.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        let short = sampled(0.0, 1.0, 10, |t| c(t.cos(), t.sin()));
        assert!(matches!(fit_ellipse(&short), Err(AnalysisError::TooFewSamples { .. })));
    }

    #[test]
    fn circle_period_and_orientation() {
        let traj = sampled(0.0, 6.0 * PI, 3000, |t| Complex64::from_polar(1.0, t));
        let est = detect_period(&traj, (0.0, 6.0 * PI)).unwrap();
        let grid = (2.0 * PI - PERIOD_MIN_CANDIDATE) / (PERIOD_GRID - 1) as f64;
        assert!((est.period.unwrap() - TAU).abs() < grid);
        assert_eq!(est.orientation, Orientation::Anticlockwise);
        assert!((est.loop_period.unwrap() - TAU).abs() < 1e-9);

        let rev = sampled(0.0, 6.0 * PI, 3000, |t| Complex64::from_polar(1.0, -t));
        assert_eq!(detect_period(&rev, (0.0, 6.0 * PI)).unwrap().orientation, Orientation::Clockwise);
    }

    #[test]
    fn two_turn_orbit_reports_both_periods() {
        // Limaçon-like curve closing every 2 time units after two turns.
        let f = |t: f64| Complex64::from_polar(1.0, TAU * t) + 0.3 * Complex64::from_polar(1.0, PI * t);
        let traj = sampled(0.0, 12.0, 4000, f);
        let est = detect_period(&traj, (0.0, 12.0)).unwrap();
        assert!((est.period.unwrap() - 2.0).abs() < 1e-4);
        assert!((est.loop_period.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn aperiodic_motion_has_no_period() {
        let traj = sampled(0.0, 30.0, 3000, |t| c(t, 0.1 * t * t));
        let est = detect_period(&traj, (0.0, 30.0)).unwrap();
        assert!(est.period.is_none());
    }

    #[test]
    fn window_checks() {
        let traj = sampled(0.0, 10.0, 1000, |t| Complex64::from_polar(1.0, t));
        assert!(matches!(detect_period(&traj, (5.0, 11.0)), Err(AnalysisError::Window(..))));
        assert!(matches!(
            detect_period(&traj, (0.0, 1.0)),
            Err(AnalysisError::TooFewSamples { .. })
        ));
    }

    #[test]
    fn drift_examples() {
        let circle = sampled(0.0, TAU, 100, |t| Complex64::from_polar(2.0, t));
        assert!(conserved_drift(&circle, DriftQuantity::AbsPosition).unwrap() < 1e-15);
        let sys = ClassicalSystem::free(ModelParams::default());
        assert_eq!(
            conserved_drift(&circle, DriftQuantity::ComplexEnergy(&sys)),
            Err(AnalysisError::MissingMomenta)
        );
        let mut with_p = circle.clone();
        with_p.momenta = Some(vec![c(1.0, 0.5); 100]);
        assert_eq!(conserved_drift(&with_p, DriftQuantity::ComplexEnergy(&sys)).unwrap(), 0.0);
    }

    #[test]
    fn congruence_of_shifted_circles() {
        let a = sampled(0.0, TAU, 400, |t| Complex64::from_polar(1.0, t));
        let b = sampled(0.0, TAU, 400, |t| Complex64::from_polar(1.0, t) + 0.1);
        let d = congruence_metric(&a, &b).unwrap();
        // Hausdorff distance of unit circles offset by 0.1 is 0.1; diameter ≈ 2.
        assert!((d - 0.05).abs() < 1e-3, "{d}");
        assert_eq!(congruence_metric(&a, &a).unwrap(), 0.0);
        // Same curve, different phase and sampling.
        let c2 = sampled(1.0, 1.0 + TAU, 977, |t| Complex64::from_polar(1.0, t));
        assert!(congruence_metric(&a, &c2).unwrap() < 1e-4);
    }

    #[test]
    fn diameter_of_square() {
        let pts = [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(0.0, 1.0), c(0.5, 0.5)];
        assert!((diameter(&pts) - SQRT_2).abs() < 1e-15);
        assert_eq!(diameter(&[c(1.0, 1.0)]), 0.0);
    }

    #[test]
    fn cycle_extrema_of_decaying_spiral() {
        let traj = sampled(0.0, 5.0, 501, |t| Complex64::from_polar((-0.2 * t).exp(), TAU * t));
        let ext = cycle_extrema(&traj, 1.0, c(0.0, 0.0));
        assert_eq!(ext.len(), 5);
        assert!(ext.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn flat_counts() {
        let traj = sampled(0.0, 3.0, 301, |t| c(t, 0.01 * t));
        let (flat, total) = flat_sample_counts(&traj, (1.0, 2.0), 0.1);
        assert_eq!(flat, total);
        assert!(total > 90);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn congruence_is_symmetric(r1 in 0.2f64..3.0, r2 in 0.2f64..3.0, shift in -1.0f64..1.0) {
            let a = sampled(0.0, TAU, 200, |t| Complex64::from_polar(r1, t));
            let b = sampled(0.0, TAU, 150, |t| c(r2 * t.cos() + shift, 0.5 * r2 * t.sin()));
            let ab = congruence_metric(&a, &b).unwrap();
            let ba = congruence_metric(&b, &a).unwrap();
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab, ba);
            prop_assert_eq!(congruence_metric(&a, &a).unwrap(), 0.0);
        }

        #[test]
        fn ellipse_fit_recovers_parameters(
            a in 0.3f64..4.0,
            b in 0.3f64..4.0,
            cr in -2.0f64..2.0,
            ci in -2.0f64..2.0,
            phase in 0.0f64..TAU,
        ) {
            let traj = sampled(0.0, TAU, 300, |t| c(cr + a * (t + phase).cos(), ci + b * (t + phase).sin()));
            let fit = fit_ellipse(&traj).unwrap();
            prop_assert!((fit.a - a).abs() < 1e-9 * a.max(1.0));
            prop_assert!((fit.b - b).abs() < 1e-9 * b.max(1.0));
            prop_assert!((fit.center - c(cr, ci)).norm() < 1e-9);
            prop_assert!(fit.residual < 1e-9);
            prop_assert_eq!(fit.orientation, Orientation::Anticlockwise);
        }

        #[test]
        fn period_is_time_translation_invariant(shift in 0.0f64..10.0, omega in 0.8f64..3.0) {
            let f = |t: f64| Complex64::from_polar(1.0, omega * t) + 0.4 * Complex64::from_polar(1.0, -2.0 * omega * t);
            let base = sampled(0.0, 24.0, 2400, f);
            let moved = sampled(shift, shift + 24.0, 2400, f);
            let p0 = detect_period(&base, (0.0, 24.0)).unwrap().period.unwrap();
            let p1 = detect_period(&moved, (shift, shift + 24.0)).unwrap().period.unwrap();
            let grid = (8.0 - PERIOD_MIN_CANDIDATE) / (PERIOD_GRID - 1) as f64;
            prop_assert!((p0 - p1).abs() < grid, "{} vs {}", p0, p1);
            prop_assert!((p0 - TAU / omega).abs() < grid);
        }

        #[test]
        fn conjugation_reverses_orientation(r in 0.5f64..2.0, w in 0.5f64..3.0) {
            let fwd = sampled(0.0, 20.0, 1000, |t| Complex64::from_polar(r, w * t));
            let back = sampled(0.0, 20.0, 1000, |t| Complex64::from_polar(r, w * t).conj());
            let o1 = detect_period(&fwd, (0.0, 20.0)).unwrap().orientation;
            let o2 = detect_period(&back, (0.0, 20.0)).unwrap().orientation;
            prop_assert_eq!(o1.sign(), -o2.sign());
        }
    }
}
