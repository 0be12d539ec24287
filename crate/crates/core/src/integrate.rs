//! Integration of complex first-order fields and complex Hamiltonian
//! systems.
//!
//! The adaptive method is the Dormand–Prince 5(4) pair with its 4th-order
//! continuous extension, so output samples land on a uniform grid
//! independent of the internal steps. Every runtime failure (pole, domain
//! escape, step underflow, step budget) ends the run with a [`StopReason`];
//! only malformed arguments are errors.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fields::{classical_force, ClassicalSystem, FieldError, VelocityField};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrateError {
    #[error("invalid time span ({0}, {1})")]
    TimeSpan(f64, f64),
    #[error("initial point {0} is outside the open domain ({1}, {2})")]
    InitialPoint(Complex64, f64, f64),
    #[error("invalid integrator configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rk4Fixed,
    Rk45Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub method: Method,
    pub dt_init: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub dt_min: f64,
    pub max_steps: u64,
    /// Stage evaluations with `|ψ|` below this fraction of the running
    /// maximum along the trajectory are rejected.
    pub pole_psi_floor: f64,
    pub domain_margin: f64,
    /// Number of uniformly spaced output samples, endpoints included.
    pub samples: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::Rk45Adaptive,
            dt_init: 1e-3,
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            dt_min: 1e-12,
            max_steps: 10_000_000,
            pole_psi_floor: 1e-12,
            domain_margin: 1e-9,
            samples: 2000,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.rel_tol = tol;
        self.abs_tol = tol;
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    /// Every violated constraint, in declaration order.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.dt_init) {
            out.push(format!("dt_init must be positive, got {}", self.dt_init));
        }
        if !positive(self.dt_min) || self.dt_min >= self.dt_init {
            out.push(format!(
                "dt_min must be positive and below dt_init, got {}",
                self.dt_min
            ));
        }
        for (name, v) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if !(v > 0.0 && v < 1.0) {
                out.push(format!("{name} must lie in (0, 1), got {v}"));
            }
        }
        if self.max_steps == 0 {
            out.push("max_steps must be at least 1".into());
        }
        if !positive(self.pole_psi_floor) {
            out.push(format!(
                "pole_psi_floor must be positive, got {}",
                self.pole_psi_floor
            ));
        }
        if !(self.domain_margin >= 0.0 && self.domain_margin.is_finite()) {
            out.push(format!(
                "domain_margin must be nonnegative, got {}",
                self.domain_margin
            ));
        }
        if self.samples < 2 {
            out.push(format!("samples must be at least 2, got {}", self.samples));
        }
        out
    }

    fn validate(&self) -> Result<(), IntegrateError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(IntegrateError::Config(v.join("; ")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StopKind {
    Completed,
    PoleProximity,
    DomainEscape,
    StepUnderflow,
    MaxSteps,
}

/// Where and why a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StopReason {
    pub kind: StopKind,
    pub t: f64,
    pub x: Complex64,
    pub psi_abs: Option<f64>,
    pub step: Option<f64>,
}

impl StopReason {
    pub fn completed(&self) -> bool {
        self.kind == StopKind::Completed
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TrajectoryMeta {
    pub label: String,
    pub x0: Complex64,
    pub p0: Option<Complex64>,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    /// Complex Hamiltonian at each output sample (Hamiltonian runs only).
    pub hamiltonian: Option<Vec<Complex64>>,
}

/// Uniformly sampled complex path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub positions: Vec<Complex64>,
    pub momenta: Option<Vec<Complex64>>,
    pub stop: StopReason,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    /// A trajectory from precomputed samples, e.g. an analytic solution.
    pub fn from_samples(times: Vec<f64>, positions: Vec<Complex64>, label: impl Into<String>) -> Self {
        let last_t = times.last().copied().unwrap_or(0.0);
        let last_x = positions.last().copied().unwrap_or_default();
        let x0 = positions.first().copied().unwrap_or_default();
        Self {
            times,
            positions,
            momenta: None,
            stop: StopReason {
                kind: StopKind::Completed,
                t: last_t,
                x: last_x,
                psi_abs: None,
                step: None,
            },
            meta: TrajectoryMeta {
                label: label.into(),
                x0,
                ..Default::default()
            },
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_position(&self) -> Complex64 {
        *self.positions.last().expect("trajectory has at least one sample")
    }
}

/// Uniform grid with both endpoints exact.
pub fn sample_times(t0: f64, t1: f64, samples: usize) -> Vec<f64> {
    let n = samples.max(2);
    let mut ts: Vec<f64> = (0..n)
        .map(|k| t0 + (t1 - t0) * k as f64 / (n - 1) as f64)
        .collect();
    ts[n - 1] = t1;
    ts
}

type State<const N: usize> = [Complex64; N];

trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &State<N>) -> Result<(State<N>, Option<f64>), FieldError>;
    fn domain(&self) -> Option<(f64, f64)>;
}

struct FieldSystem<'a, F: VelocityField + ?Sized>(&'a F);

impl<F: VelocityField + ?Sized> OdeSystem<1> for FieldSystem<'_, F> {
    fn rhs(&self, t: f64, y: &State<1>) -> Result<(State<1>, Option<f64>), FieldError> {
        let s = self.0.sample(y[0], t)?;
        Ok(([s.velocity], s.psi_abs))
    }

    fn domain(&self) -> Option<(f64, f64)> {
        self.0.domain()
    }
}

struct HamiltonSystem<'a>(&'a ClassicalSystem);

impl OdeSystem<2> for HamiltonSystem<'_> {
    fn rhs(&self, _t: f64, y: &State<2>) -> Result<(State<2>, Option<f64>), FieldError> {
        let force = classical_force(self.0, y[0])?;
        Ok(([y[1] / self.0.params.mass, force], None))
    }

    fn domain(&self) -> Option<(f64, f64)> {
        None
    }
}

/// Integrate `ẋ = v(x, t)` from `x0` over `t_span`.
pub fn integrate_field<F: VelocityField + ?Sized>(
    field: &F,
    x0: Complex64,
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Trajectory, IntegrateError> {
    if let Some((lo, hi)) = field.domain() {
        if !(x0.re > lo && x0.re < hi) {
            return Err(IntegrateError::InitialPoint(x0, lo, hi));
        }
    }
    let run = solve(&FieldSystem(field), [x0], t_span, cfg)?;
    Ok(Trajectory {
        times: run.times,
        positions: run.states.iter().map(|s| s[0]).collect(),
        momenta: None,
        stop: run.stop,
        meta: TrajectoryMeta {
            x0,
            accepted_steps: run.accepted,
            rejected_steps: run.rejected,
            ..Default::default()
        },
    })
}

/// Integrate Hamilton's equations `ẋ = p/m`, `ṗ = F(x)` for complex
/// `(x, p)`. The complex Hamiltonian at every sample is kept in the meta.
pub fn integrate_hamiltonian(
    system: &ClassicalSystem,
    x0: Complex64,
    p0: Complex64,
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Trajectory, IntegrateError> {
    let run = solve(&HamiltonSystem(system), [x0, p0], t_span, cfg)?;
    let positions: Vec<Complex64> = run.states.iter().map(|s| s[0]).collect();
    let momenta: Vec<Complex64> = run.states.iter().map(|s| s[1]).collect();
    let hamiltonian = positions
        .iter()
        .zip(&momenta)
        .map(|(&x, &p)| system.hamiltonian(x, p))
        .collect();
    Ok(Trajectory {
        times: run.times,
        positions,
        momenta: Some(momenta),
        stop: run.stop,
        meta: TrajectoryMeta {
            x0,
            p0: Some(p0),
            accepted_steps: run.accepted,
            rejected_steps: run.rejected,
            hamiltonian: Some(hamiltonian),
            ..Default::default()
        },
    })
}

struct Run<const N: usize> {
    times: Vec<f64>,
    states: Vec<State<N>>,
    stop: StopReason,
    accepted: u64,
    rejected: u64,
}

impl<const N: usize> Run<N> {
    /// Append the last valid state of an interrupted run.
    fn push_last(&mut self, t: f64, y: State<N>) {
        if self.times.last().is_some_and(|&last| t > last) {
            self.times.push(t);
            self.states.push(y);
        }
    }

    fn finish(mut self, kind: StopKind, t: f64, y: State<N>, psi_abs: Option<f64>, step: Option<f64>) -> Self {
        if !matches!(kind, StopKind::Completed | StopKind::DomainEscape) {
            self.push_last(t, y);
        }
        self.stop = StopReason {
            kind,
            t,
            x: y[0],
            psi_abs,
            step,
        };
        self
    }
}

fn solve<const N: usize, S: OdeSystem<N>>(
    sys: &S,
    y0: State<N>,
    (t0, t1): (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Run<N>, IntegrateError> {
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(IntegrateError::TimeSpan(t0, t1));
    }
    cfg.validate()?;
    let ts = sample_times(t0, t1, cfg.samples);
    let run = Run {
        times: vec![t0],
        states: vec![y0],
        stop: StopReason {
            kind: StopKind::Completed,
            t: t0,
            x: y0[0],
            psi_abs: None,
            step: None,
        },
        accepted: 0,
        rejected: 0,
    };
    match cfg.method {
        Method::Rk45Adaptive => Ok(dopri5(sys, y0, &ts, cfg, run)),
        Method::Rk4Fixed => Ok(rk4(sys, y0, &ts, cfg, run)),
    }
}

fn axpy<const N: usize>(y: &State<N>, h: f64, terms: &[(f64, &State<N>)]) -> State<N> {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

fn outside<const N: usize>(sys: &impl OdeSystem<N>, y: &State<N>, margin: f64) -> bool {
    sys.domain()
        .is_some_and(|(lo, hi)| !(y[0].re > lo - margin && y[0].re < hi + margin))
}

fn finite<const N: usize>(y: &State<N>) -> bool {
    y.iter().all(|c| c.re.is_finite() && c.im.is_finite())
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

enum Attempt<const N: usize> {
    Ok {
        y_new: State<N>,
        k: [State<N>; 7],
        err: f64,
        psi_new: Option<f64>,
    },
    Pole {
        psi_abs: Option<f64>,
    },
}

#[allow(clippy::too_many_arguments)]
fn dopri_attempt<const N: usize, S: OdeSystem<N>>(
    sys: &S,
    t: f64,
    y: &State<N>,
    k1: &State<N>,
    h: f64,
    cfg: &IntegratorConfig,
    psi_floor: f64,
) -> Attempt<N> {
    let mut k = [*k1; 7];
    let stage = |tt: f64, yy: &State<N>| -> Result<(State<N>, Option<f64>), Option<f64>> {
        match sys.rhs(tt, yy) {
            Ok((v, psi)) => {
                if psi.is_some_and(|p| p < psi_floor) || !finite(&v) {
                    Err(psi)
                } else {
                    Ok((v, psi))
                }
            }
            Err(FieldError::PoleProximity { psi_abs, .. }) => Err(Some(psi_abs)),
            Err(_) => Err(None),
        }
    };
    macro_rules! eval {
        ($tt:expr, $yy:expr) => {
            match stage($tt, &$yy) {
                Ok(v) => v,
                Err(psi_abs) => return Attempt::Pole { psi_abs },
            }
        };
    }
    let y2 = axpy(y, h, &[(A21, &k[0])]);
    k[1] = eval!(t + C2 * h, y2).0;
    let y3 = axpy(y, h, &[(A31, &k[0]), (A32, &k[1])]);
    k[2] = eval!(t + C3 * h, y3).0;
    let y4 = axpy(y, h, &[(A41, &k[0]), (A42, &k[1]), (A43, &k[2])]);
    k[3] = eval!(t + C4 * h, y4).0;
    let y5 = axpy(y, h, &[(A51, &k[0]), (A52, &k[1]), (A53, &k[2]), (A54, &k[3])]);
    k[4] = eval!(t + C5 * h, y5).0;
    let y6 = axpy(
        y,
        h,
        &[(A61, &k[0]), (A62, &k[1]), (A63, &k[2]), (A64, &k[3]), (A65, &k[4])],
    );
    k[5] = eval!(t + h, y6).0;
    let y_new = axpy(
        y,
        h,
        &[(A71, &k[0]), (A73, &k[2]), (A74, &k[3]), (A75, &k[4]), (A76, &k[5])],
    );
    let (k7, psi_new) = eval!(t + h, y_new);
    k[6] = k7;

    let mut err: f64 = 0.0;
    for i in 0..N {
        let e = h * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
        let scale = cfg.abs_tol + cfg.rel_tol * y[i].norm().max(y_new[i].norm());
        err = err.max(e.norm() / scale);
    }
    if !err.is_finite() || !finite(&y_new) {
        return Attempt::Pole { psi_abs: psi_new };
    }
    Attempt::Ok {
        y_new,
        k,
        err,
        psi_new,
    }
}

fn dopri5<const N: usize, S: OdeSystem<N>>(
    sys: &S,
    y0: State<N>,
    ts: &[f64],
    cfg: &IntegratorConfig,
    mut run: Run<N>,
) -> Run<N> {
    let t_end = *ts.last().unwrap();
    let (mut k1, psi0) = match sys.rhs(ts[0], &y0) {
        Ok(v) if finite(&v.0) => v,
        Ok(_) => return run.finish(StopKind::PoleProximity, ts[0], y0, None, None),
        Err(FieldError::PoleProximity { psi_abs, .. }) => {
            return run.finish(StopKind::PoleProximity, ts[0], y0, Some(psi_abs), None)
        }
        Err(_) => return run.finish(StopKind::PoleProximity, ts[0], y0, None, None),
    };
    let mut psi_max = psi0.unwrap_or(0.0);
    let mut t = ts[0];
    let mut y = y0;
    let mut h = cfg.dt_init;
    let mut next = 1;

    loop {
        if t >= t_end {
            return run.finish(StopKind::Completed, t, y, None, None);
        }
        if run.accepted + run.rejected >= cfg.max_steps {
            return run.finish(StopKind::MaxSteps, t, y, None, Some(h));
        }
        let last = h >= t_end - t;
        if last {
            h = t_end - t;
        }
        match dopri_attempt(sys, t, &y, &k1, h, cfg, cfg.pole_psi_floor * psi_max) {
            Attempt::Pole { psi_abs } => {
                run.rejected += 1;
                h *= 0.5;
                if h < cfg.dt_min {
                    return run.finish(StopKind::PoleProximity, t, y, psi_abs, Some(h));
                }
            }
            Attempt::Ok {
                y_new,
                k,
                err,
                psi_new,
            } => {
                if err <= 1.0 {
                    if outside(sys, &y_new, cfg.domain_margin) {
                        run.push_last(t, y);
                        return run.finish(StopKind::DomainEscape, t + h, y_new, psi_new, Some(h));
                    }
                    run.accepted += 1;
                    let t_new = if last { t_end } else { t + h };
                    emit_dense(&mut run, ts, &mut next, t, t_new, h, &y, &y_new, &k);
                    t = t_new;
                    y = y_new;
                    k1 = k[6];
                    if let Some(p) = psi_new {
                        psi_max = psi_max.max(p);
                    }
                    let factor = if err == 0.0 {
                        5.0
                    } else {
                        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    h *= factor;
                } else {
                    run.rejected += 1;
                    h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                    if h < cfg.dt_min {
                        return run.finish(StopKind::StepUnderflow, t, y, None, Some(h));
                    }
                }
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn emit_dense<const N: usize>(
    run: &mut Run<N>,
    ts: &[f64],
    next: &mut usize,
    t: f64,
    t_new: f64,
    h: f64,
    y: &State<N>,
    y_new: &State<N>,
    k: &[State<N>; 7],
) {
    if *next >= ts.len() || ts[*next] > t_new {
        return;
    }
    // Continuous extension coefficients of the step.
    let mut r2 = [Complex64::new(0.0, 0.0); N];
    let mut r3 = r2;
    let mut r4 = r2;
    let mut r5 = r2;
    for i in 0..N {
        let ydiff = y_new[i] - y[i];
        let bspl = h * k[0][i] - ydiff;
        r2[i] = ydiff;
        r3[i] = bspl;
        r4[i] = ydiff - h * k[6][i] - bspl;
        r5[i] = h
            * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i] + D7 * k[6][i]);
    }
    while *next < ts.len() && ts[*next] <= t_new {
        let ts_k = ts[*next];
        let state = if ts_k == t_new {
            *y_new
        } else {
            let theta = (ts_k - t) / h;
            let theta1 = 1.0 - theta;
            let mut out = *y;
            for i in 0..N {
                out[i] = y[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i])));
            }
            out
        };
        run.times.push(ts_k);
        run.states.push(state);
        *next += 1;
    }
}

fn rk4<const N: usize, S: OdeSystem<N>>(
    sys: &S,
    y0: State<N>,
    ts: &[f64],
    cfg: &IntegratorConfig,
    mut run: Run<N>,
) -> Run<N> {
    let spacing = ts[1] - ts[0];
    let substeps = (spacing / cfg.dt_init).ceil().max(1.0) as u64;
    let h = spacing / substeps as f64;
    let mut y = y0;
    let mut t = ts[0];
    let f = |tt: f64, yy: &State<N>| -> Result<State<N>, Option<f64>> {
        match sys.rhs(tt, yy) {
            Ok((v, _)) if finite(&v) => Ok(v),
            Ok(_) => Err(None),
            Err(FieldError::PoleProximity { psi_abs, .. }) => Err(Some(psi_abs)),
            Err(_) => Err(None),
        }
    };
    for (idx, &target) in ts.iter().enumerate().skip(1) {
        for s in 0..substeps {
            if run.accepted >= cfg.max_steps {
                return run.finish(StopKind::MaxSteps, t, y, None, Some(h));
            }
            let step = (|| {
                let k1 = f(t, &y)?;
                let k2 = f(t + 0.5 * h, &axpy(&y, h, &[(0.5, &k1)]))?;
                let k3 = f(t + 0.5 * h, &axpy(&y, h, &[(0.5, &k2)]))?;
                let k4 = f(t + h, &axpy(&y, h, &[(1.0, &k3)]))?;
                Ok(axpy(
                    &y,
                    h,
                    &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)],
                ))
            })();
            let y_new = match step {
                Ok(v) if finite(&v) => v,
                Ok(_) => return run.finish(StopKind::PoleProximity, t, y, None, Some(h)),
                Err(psi) => return run.finish(StopKind::PoleProximity, t, y, psi, Some(h)),
            };
            let t_new = if s + 1 == substeps {
                target
            } else {
                ts[idx - 1] + (s + 1) as f64 * h
            };
            if outside(sys, &y_new, cfg.domain_margin) {
                run.push_last(t, y);
                return run.finish(StopKind::DomainEscape, t_new, y_new, None, Some(h));
            }
            run.accepted += 1;
            y = y_new;
            t = t_new;
        }
        run.times.push(target);
        run.states.push(y);
    }
    run.finish(StopKind::Completed, t, y, None, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{
        classical_ho_solution, initial_momentum, ClassicalSystem, EnergySpec, FieldSample, FnField,
        HoCoherentField, QuantumField,
    };
    use crate::states::{ModelParams, StateSpec, Wavefunction};
    use std::f64::consts::{PI, SQRT_2};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rotation() -> FnField<impl Fn(Complex64, f64) -> Complex64 + Sync> {
        FnField(|x: Complex64, _t: f64| Complex64::i() * x)
    }

    #[test]
    fn zero_field_gives_constant_trajectory() {
        let field = FnField(|_x: Complex64, _t: f64| c(0.0, 0.0));
        let traj = integrate_field(&field, c(1.0, 1.0), (0.0, 3.0), &IntegratorConfig::default()).unwrap();
        assert!(traj.stop.completed());
        assert_eq!(traj.len(), 2000);
        assert!(traj.positions.iter().all(|&x| x == c(1.0, 1.0)));
    }

    #[test]
    fn rotation_field_closes_circle() {
        let traj = integrate_field(&rotation(), c(1.0, 0.0), (0.0, 2.0 * PI), &IntegratorConfig::default()).unwrap();
        assert!(traj.stop.completed());
        assert!((traj.final_position() - c(1.0, 0.0)).norm() < 1e-8);
        for (t, x) in traj.times.iter().zip(&traj.positions) {
            assert!((x.norm() - 1.0).abs() < 1e-8);
            assert!((x - Complex64::from_polar(1.0, *t)).norm() < 1e-8);
        }
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*traj.times.last().unwrap(), 2.0 * PI);
    }

    #[test]
    fn coherent_closed_field_traces_ellipse() {
        let p = ModelParams::default();
        let field = HoCoherentField {
            params: p,
            lambda: 2.1,
            kappa: 0.0,
        };
        let traj = integrate_field(&field, c(2.5, 0.0), (0.0, 2.0 * PI), &IntegratorConfig::default()).unwrap();
        assert!((traj.final_position() - c(2.5, 0.0)).norm() < 1e-6);
        // Analytic solution A = x0, B = x0 - √2 λ.
        let b = 2.5 - SQRT_2 * 2.1;
        for (t, x) in traj.times.iter().zip(&traj.positions) {
            assert!((x - c(2.5 * t.cos(), b * t.sin())).norm() < 1e-8);
        }
    }

    #[test]
    fn tightening_tolerance_never_hurts() {
        let mut last = f64::INFINITY;
        for tol in [1e-6, 5e-7, 2.5e-7, 1.25e-7, 1e-8, 1e-10] {
            let cfg = IntegratorConfig::default().with_tolerance(tol);
            let traj = integrate_field(&rotation(), c(1.0, 0.0), (0.0, 2.0 * PI), &cfg).unwrap();
            let err = (traj.final_position() - c(1.0, 0.0)).norm();
            assert!(err <= last * 1.0000001, "tol {tol}: {err} > {last}");
            last = err;
        }
    }

    #[test]
    fn fixed_and_adaptive_agree() {
        let tol = 1e-8;
        let adaptive = IntegratorConfig::default().with_tolerance(tol);
        let fixed = IntegratorConfig {
            method: Method::Rk4Fixed,
            ..adaptive
        };
        let field = HoCoherentField {
            params: ModelParams::default(),
            lambda: 2.1,
            kappa: 0.0,
        };
        let a = integrate_field(&field, c(2.9, 0.0), (0.0, 2.0 * PI), &adaptive).unwrap();
        let b = integrate_field(&field, c(2.9, 0.0), (0.0, 2.0 * PI), &fixed).unwrap();
        assert!(b.stop.completed());
        assert_eq!(a.times, b.times);
        for (x, y) in a.positions.iter().zip(&b.positions) {
            assert!((x - y).norm() < 10.0 * tol);
        }
    }

    #[test]
    fn dense_output_within_error_bound_of_tight_reference() {
        let field = FnField(|x: Complex64, t: f64| c(0.0, 1.0) * x + c(0.3 * t.cos(), -0.1));
        let loose = IntegratorConfig::default().with_tolerance(1e-7);
        let tight = IntegratorConfig::default().with_tolerance(1e-9);
        let a = integrate_field(&field, c(0.5, 0.2), (0.0, 10.0), &loose).unwrap();
        let b = integrate_field(&field, c(0.5, 0.2), (0.0, 10.0), &tight).unwrap();
        let worst = a
            .positions
            .iter()
            .zip(&b.positions)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        // Global error of a 1e-7 run over ten time units.
        assert!(worst < 1e-5, "{worst}");
    }

    #[test]
    fn harmonic_launch_matches_analytic_ellipse() {
        let p = ModelParams::default();
        let sys = ClassicalSystem::harmonic(p);
        let e = EnergySpec { energy: 4.5 };
        let x0 = c(3.2, 0.0);
        let p0 = initial_momentum(&sys, x0, e);
        let traj = integrate_hamiltonian(&sys, x0, p0, (0.0, 2.0 * PI), &IntegratorConfig::default()).unwrap();
        for (t, x) in traj.times.iter().zip(&traj.positions) {
            assert!((x - classical_ho_solution(3.2, e, &p, *t).unwrap()).norm() < 1e-6);
        }
        let h = traj.meta.hamiltonian.as_ref().unwrap();
        assert!(h.iter().all(|v| (v - c(4.5, 0.0)).norm() < 1e-8));
    }

    #[test]
    fn free_particle_moves_parallel_to_real_axis() {
        let sys = ClassicalSystem::free(ModelParams::default());
        let x0 = c(0.0, 0.5);
        let p0 = initial_momentum(&sys, x0, EnergySpec { energy: 2.0 });
        let traj = integrate_hamiltonian(&sys, x0, p0, (0.0, 5.0), &IntegratorConfig::default()).unwrap();
        assert!(traj.positions.iter().all(|x| (x.im - 0.5).abs() < 1e-10));
        assert!((traj.final_position().re - 10.0).abs() < 1e-9);
    }

    #[test]
    fn poschl_teller_conserves_complex_energy() {
        let sys = ClassicalSystem::poschl_teller(1.5, ModelParams::default());
        let e = EnergySpec { energy: 2.25 };
        for x0 in [0.5, 0.7, 1.0] {
            let x0 = c(x0, 0.0);
            let p0 = initial_momentum(&sys, x0, e);
            let traj = integrate_hamiltonian(&sys, x0, p0, (0.0, 20.0), &IntegratorConfig::default()).unwrap();
            assert!(traj.stop.completed());
            let h = traj.meta.hamiltonian.unwrap();
            let drift = h.iter().map(|v| (v - h[0]).norm() / h[0].norm()).fold(0.0, f64::max);
            assert!(drift < 1e-8, "{drift}");
        }
    }

    #[test]
    fn escape_from_well_is_recorded() {
        // Constant drift to the right pushes Re(x) past π.
        let field = ConfinedDrift;
        let traj = integrate_field(&field, c(3.0, 0.0), (0.0, 5.0), &IntegratorConfig::default()).unwrap();
        assert_eq!(traj.stop.kind, StopKind::DomainEscape);
        assert!(traj.stop.x.re >= PI);
        assert!(traj.positions.iter().all(|x| x.re < PI + 1e-9));
    }

    struct ConfinedDrift;

    impl VelocityField for ConfinedDrift {
        fn sample(&self, _x: Complex64, _t: f64) -> Result<FieldSample, FieldError> {
            Ok(FieldSample::plain(c(1.0, 0.0)))
        }

        fn domain(&self) -> Option<(f64, f64)> {
            Some((0.0, PI))
        }
    }

    #[test]
    fn pole_on_path_stops_with_pole_proximity() {
        // ẋ = 1/(1 - x) reaches the pole at x = 1 in finite time t = 1/2.
        let field = FnField(|x: Complex64, _t: f64| 1.0 / (1.0 - x));
        let traj = integrate_field(&field, c(0.0, 0.0), (0.0, 2.0), &IntegratorConfig::default()).unwrap();
        assert_ne!(traj.stop.kind, StopKind::Completed);
        assert!(traj.positions.iter().all(|x| x.re.is_finite() && x.im.is_finite()));
        assert!(traj.stop.t <= 0.5 + 1e-6);
    }

    #[test]
    fn start_on_node_is_a_structured_stop() {
        let wf = Wavefunction::new(ModelParams::default(), StateSpec::HoEigen { n: 1 }).unwrap();
        let traj = integrate_field(&QuantumField::new(&wf), c(0.0, 0.0), (0.0, 1.0), &IntegratorConfig::default())
            .unwrap();
        assert_eq!(traj.stop.kind, StopKind::PoleProximity);
    }

    #[test]
    fn step_budget_is_enforced() {
        let cfg = IntegratorConfig {
            max_steps: 10,
            ..IntegratorConfig::default()
        };
        let traj = integrate_field(&rotation(), c(1.0, 0.0), (0.0, 100.0), &cfg).unwrap();
        assert_eq!(traj.stop.kind, StopKind::MaxSteps);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn argument_errors() {
        let cfg = IntegratorConfig::default();
        assert!(matches!(
            integrate_field(&rotation(), c(1.0, 0.0), (1.0, 1.0), &cfg),
            Err(IntegrateError::TimeSpan(..))
        ));
        assert!(matches!(
            integrate_field(&ConfinedDrift, c(-1.0, 0.0), (0.0, 1.0), &cfg),
            Err(IntegrateError::InitialPoint(..))
        ));
        let bad = IntegratorConfig {
            dt_min: 1.0,
            rel_tol: 2.0,
            ..cfg
        };
        assert_eq!(bad.violations().len(), 2);
        assert!(matches!(
            integrate_field(&rotation(), c(1.0, 0.0), (0.0, 1.0), &bad),
            Err(IntegrateError::Config(_))
        ));
    }
}
