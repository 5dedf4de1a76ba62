//! Method-of-steps integration of the coupled delay system.
//!
//! The first-order state is `(x, x', u)`. Each fixed RK4 step reads delayed
//! values from the dense history built so far:
//!
//! * `tau <= t0`: the initial-history expressions,
//! * inside a completed grid segment: cubic Hermite on values and derivatives,
//! * inside the step being computed (lag shorter than the stage offset): a
//!   quadratic through the last anchor value, its derivative and the current
//!   stage value. These lookups are counted in [`IntegrationStats`].
//!
//! `x''` and `u'` are stored as the right-hand side evaluated at each grid
//! point, never by differencing.

use std::io::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::expr::{EvalError, Expr};
use crate::model::{CoefficientSpec, SystemSpec};
use crate::stability::{self, Certificate, StabilityError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("end time {t_end} must exceed start time {t0}")]
    BadHorizon { t0: f64, t_end: f64 },
    #[error("evaluating {what} at t = {t}: {source}")]
    Eval {
        what: &'static str,
        t: f64,
        #[source]
        source: EvalError,
    },
    #[error("solution blew up (non-finite state) at t = {0}")]
    BlowUp(f64),
    #[error("fundamental-function hypotheses fail: {0}")]
    Lemma23Hypothesis(String),
    #[error("a-priori check needs a certified-stable certificate")]
    MissingCertificate,
    #[error(transparent)]
    Stability(#[from] StabilityError),
}

/// History of `x`, `x'` and `u` on `[t0 - max lag, t0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub phi1: Expr,
    pub phi2: Expr,
    pub psi: Expr,
}

impl InitialData {
    pub fn zero() -> Self {
        InitialData::constant(0.0, 0.0, 0.0)
    }

    pub fn constant(x: f64, dx: f64, u: f64) -> Self {
        InitialData { phi1: Expr::constant(x), phi2: Expr::constant(dx), psi: Expr::constant(u) }
    }
}

/// Forcing terms with declared sup bounds on `[t0, inf)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForcingSpec {
    pub f1: Expr,
    pub f2: Expr,
    pub bound1: f64,
    pub bound2: f64,
}

impl ForcingSpec {
    pub fn zero() -> Self {
        ForcingSpec::constant(0.0, 0.0)
    }

    pub fn constant(f1: f64, f2: f64) -> Self {
        ForcingSpec { f1: Expr::constant(f1), f2: Expr::constant(f2), bound1: f1.abs(), bound2: f2.abs() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IntegrationStats {
    pub steps: usize,
    /// Delayed lookups that fell inside the step being computed.
    pub short_lag_lookups: usize,
    pub warnings: Vec<String>,
}

/// Dense numerical solution on the grid `t0 + i*step`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t0: f64,
    pub step: f64,
    pub x: Vec<f64>,
    pub dx: Vec<f64>,
    pub ddx: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub history: InitialData,
    pub stats: IntegrationStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupNorms {
    pub x: f64,
    pub dx: f64,
    pub ddx: f64,
    pub u: f64,
    pub du: f64,
}

impl SupNorms {
    pub fn as_vector(&self) -> [f64; 5] {
        [self.x, self.dx, self.ddx, self.u, self.du]
    }
}

fn sup_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, &a| m.max(a.abs()))
}

impl Trajectory {
    /// Builds a trajectory from sampled `x` and `u` only (derivative channels zero).
    pub fn from_samples(t0: f64, step: f64, x: Vec<f64>, u: Vec<f64>) -> Self {
        assert_eq!(x.len(), u.len(), "channel lengths differ");
        let n = x.len();
        Trajectory {
            t0,
            step,
            x,
            dx: vec![0.0; n],
            ddx: vec![0.0; n],
            u,
            du: vec![0.0; n],
            history: InitialData::zero(),
            stats: IntegrationStats::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.step
    }

    pub fn end_time(&self) -> f64 {
        self.time(self.len().saturating_sub(1))
    }

    /// Sup norms over grid points with `t <= t1`.
    pub fn sup_norms_until(&self, t1: f64) -> SupNorms {
        let n = self.len().min(((t1 - self.t0) / self.step + 1e-9).floor() as usize + 1);
        SupNorms {
            x: sup_abs(&self.x[..n]),
            dx: sup_abs(&self.dx[..n]),
            ddx: sup_abs(&self.ddx[..n]),
            u: sup_abs(&self.u[..n]),
            du: sup_abs(&self.du[..n]),
        }
    }

    pub fn sup_norms(&self) -> SupNorms {
        self.sup_norms_until(self.end_time())
    }

    /// Value of `(x, x', u)` at any `t <= end_time`, using the same dense rule as the integrator.
    pub fn state_at(&self, t: f64) -> Result<[f64; 3], SimError> {
        if t <= self.t0 {
            return history_state(&self.history, t);
        }
        let last = self.len() - 1;
        let k = (((t - self.t0) / self.step).floor() as usize).min(last.saturating_sub(1));
        let theta = (t - self.time(k)) / self.step;
        let y0 = [self.x[k], self.dx[k], self.u[k]];
        let y1 = [self.x[k + 1], self.dx[k + 1], self.u[k + 1]];
        let m0 = [self.dx[k], self.ddx[k], self.du[k]];
        let m1 = [self.dx[k + 1], self.ddx[k + 1], self.du[k + 1]];
        Ok(std::array::from_fn(|c| hermite(y0[c], y1[c], m0[c], m1[c], self.step, theta)))
    }

    /// CSV with header `t,x,dx,ddx,u,du`, 17 significant digits per value.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,x,dx,ddx,u,du")?;
        for i in 0..self.len() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.time(i),
                self.x[i],
                self.dx[i],
                self.ddx[i],
                self.u[i],
                self.du[i]
            )?;
        }
        Ok(())
    }
}

fn hermite(y0: f64, y1: f64, m0: f64, m1: f64, h: f64, s: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1
}

fn history_state(h: &InitialData, t: f64) -> Result<[f64; 3], SimError> {
    let ev = |e: &Expr, what| e.eval(t).map_err(|source| SimError::Eval { what, t, source });
    Ok([ev(&h.phi1, "history x")?, ev(&h.phi2, "history dx")?, ev(&h.psi, "history u")?])
}

/// One classic RK4 step. `f` receives the stage index (0..4), stage time and stage state.
/// Returns the new state and the first-stage slope.
pub fn rk4_step<const N: usize, E>(
    t: f64,
    y: &[f64; N],
    h: f64,
    mut f: impl FnMut(usize, f64, &[f64; N]) -> Result<[f64; N], E>,
) -> Result<([f64; N], [f64; N]), E> {
    let axpy = |a: f64, k: &[f64; N]| -> [f64; N] { std::array::from_fn(|i| y[i] + a * k[i]) };
    let half = 0.5 * h;
    let k1 = f(0, t, y)?;
    let k2 = f(1, t + half, &axpy(half, &k1))?;
    let k3 = f(2, t + half, &axpy(half, &k2))?;
    let k4 = f(3, t + h, &axpy(h, &k3))?;
    let next = std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    Ok((next, k1))
}

/// Fixed-step RK4 for an ordinary system on `t0 + i*h`, `i = 0..=n`.
pub fn rk4_solve<const N: usize, E>(
    y0: [f64; N],
    t0: f64,
    h: f64,
    n: usize,
    mut f: impl FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
) -> Result<Vec<[f64; N]>, E> {
    let mut ys = Vec::with_capacity(n + 1);
    ys.push(y0);
    for i in 0..n {
        let t = t0 + i as f64 * h;
        let (next, _) = rk4_step(t, &ys[i], h, |_, s, y| f(s, y))?;
        ys.push(next);
    }
    Ok(ys)
}

fn grid_len(t0: f64, t_end: f64, step: f64) -> Result<usize, SimError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(SimError::BadStep(step));
    }
    if !(t_end > t0) {
        return Err(SimError::BadHorizon { t0, t_end });
    }
    Ok((((t_end - t0) / step).round() as usize).max(1))
}

struct Solver<'a> {
    spec: &'a SystemSpec,
    init: &'a InitialData,
    forcing: &'a ForcingSpec,
    t0: f64,
    h: f64,
    ys: Vec<[f64; 3]>,
    fs: Vec<[f64; 3]>,
    short_lag: usize,
}

impl Solver<'_> {
    fn eval(&self, e: &Expr, what: &'static str, t: f64) -> Result<f64, SimError> {
        e.eval(t).map_err(|source| SimError::Eval { what, t, source })
    }

    /// Component `c` of the state at `tau`. Derivatives are known at grid
    /// points `0..=anchor`; `(ts, ys)` is the stage currently being evaluated.
    fn lookup(&mut self, c: usize, tau: f64, anchor: Option<usize>, ts: f64, ys: &[f64; 3]) -> Result<f64, SimError> {
        if tau >= ts {
            return Ok(ys[c]);
        }
        if tau <= self.t0 {
            return Ok(history_state(self.init, tau)?[c]);
        }
        let a = anchor.expect("tau in (t0, ts) implies a completed grid point");
        let ta = self.t0 + a as f64 * self.h;
        if tau <= ta {
            let k = (((tau - self.t0) / self.h).floor() as usize).min(a - 1);
            let theta = (tau - (self.t0 + k as f64 * self.h)) / self.h;
            let (y0, y1, m0, m1) = (self.ys[k][c], self.ys[k + 1][c], self.fs[k][c], self.fs[k + 1][c]);
            return Ok(hermite(y0, y1, m0, m1, self.h, theta));
        }
        self.short_lag += 1;
        let width = ts - ta;
        let s = (tau - ta) / width;
        let (y0, m0) = (self.ys[a][c], self.fs[a][c]);
        Ok(y0 + width * m0 * s + (ys[c] - y0 - width * m0) * s * s)
    }

    fn delayed(
        &mut self,
        c: usize,
        lag: &Expr,
        what: &'static str,
        t: f64,
        anchor: Option<usize>,
        y: &[f64; 3],
    ) -> Result<f64, SimError> {
        let d = self.eval(lag, what, t)?;
        self.lookup(c, t - d, anchor, t, y)
    }

    fn rhs(&mut self, t: f64, y: &[f64; 3], anchor: Option<usize>) -> Result<[f64; 3], SimError> {
        let spec = self.spec;
        let dxd = self.delayed(1, &spec.h1.lag, "lag h1", t, anchor, y)?;
        let xd = self.delayed(0, &spec.h2.lag, "lag h2", t, anchor, y)?;
        let ud = self.delayed(2, &spec.h3.lag, "lag h3", t, anchor, y)?;
        let ug = self.delayed(2, &spec.g1.lag, "lag g1", t, anchor, y)?;
        let xg = self.delayed(0, &spec.g2.lag, "lag g2", t, anchor, y)?;
        let f1 = self.eval(&self.forcing.f1, "f1", t)?;
        let f2 = self.eval(&self.forcing.f2, "f2", t)?;
        let a1 = self.eval(&spec.a1.func, "a1", t)?;
        let a2 = self.eval(&spec.a2.func, "a2", t)?;
        let a3 = self.eval(&spec.a3.func, "a3", t)?;
        let b1 = self.eval(&spec.b1.func, "b1", t)?;
        let b2 = self.eval(&spec.b2.func, "b2", t)?;
        Ok([y[1], f1 - a1 * dxd - a2 * xd - a3 * ud, f2 - b1 * ug - b2 * xg])
    }
}

/// Integrates the forced system from `spec.t0` to `t_end` with a fixed step.
pub fn integrate(
    spec: &SystemSpec,
    init: &InitialData,
    forcing: &ForcingSpec,
    t_end: f64,
    step: f64,
) -> Result<Trajectory, SimError> {
    let t0 = spec.t0;
    let n = grid_len(t0, t_end, step)?;
    let mut warnings = Vec::new();
    if let Some(min_lag) = spec.min_positive_lag() {
        if step > min_lag / 10.0 {
            warnings.push(format!("step {step} exceeds a tenth of the smallest positive lag bound {min_lag}"));
        }
    }

    let mut solver = Solver {
        spec,
        init,
        forcing,
        t0,
        h: step,
        ys: Vec::with_capacity(n + 1),
        fs: Vec::with_capacity(n + 1),
        short_lag: 0,
    };
    solver.ys.push(history_state(init, t0)?);

    for i in 0..n {
        let t = t0 + i as f64 * step;
        let y = solver.ys[i];
        let (next, k1) = rk4_step(t, &y, step, |stage, ts, ys| {
            let anchor = if stage == 0 { i.checked_sub(1) } else { Some(i) };
            // Stage 0 at t_i computes f_i, which later stages use as the anchor slope.
            let k = solver.rhs(ts, ys, anchor)?;
            if stage == 0 {
                solver.fs.push(k);
            }
            Ok::<_, SimError>(k)
        })?;
        debug_assert_eq!(solver.fs[i], k1);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(SimError::BlowUp(t + step));
        }
        solver.ys.push(next);
    }
    let t_last = t0 + n as f64 * step;
    let y_last = solver.ys[n];
    let f_last = solver.rhs(t_last, &y_last, Some(n - 1))?;
    solver.fs.push(f_last);

    let short = solver.short_lag;
    if short > 0 {
        warnings.push(format!("{short} delayed lookups fell inside the current step"));
    }
    let (ys, fs) = (solver.ys, solver.fs);
    Ok(Trajectory {
        t0,
        step,
        x: ys.iter().map(|y| y[0]).collect(),
        dx: ys.iter().map(|y| y[1]).collect(),
        ddx: fs.iter().map(|f| f[1]).collect(),
        u: ys.iter().map(|y| y[2]).collect(),
        du: fs.iter().map(|f| f[2]).collect(),
        history: init.clone(),
        stats: IntegrationStats { steps: n, short_lag_lookups: short, warnings },
    })
}

/// `X(t, s)` of `x'' + a(t) x' + b(t) x = 0` with `x(s) = 0`, `x'(s) = 1`,
/// on the grid `s + i*step` up to `t_end`.
pub fn fundamental_function(a: &Expr, b: &Expr, s: f64, t_end: f64, step: f64) -> Result<Vec<f64>, SimError> {
    let n = grid_len(s, t_end, step)?;
    let ys = rk4_solve([0.0, 1.0], s, step, n, |t, y| {
        let av = a.eval(t).map_err(|source| SimError::Eval { what: "a", t, source })?;
        let bv = b.eval(t).map_err(|source| SimError::Eval { what: "b", t, source })?;
        Ok::<_, SimError>([y[1], -av * y[1] - bv * y[0]])
    })?;
    if let Some(i) = ys.iter().position(|y| !y[0].is_finite() || !y[1].is_finite()) {
        return Err(SimError::BlowUp(s + i as f64 * step));
    }
    Ok(ys.into_iter().map(|y| y[0]).collect())
}

#[derive(Debug, Clone)]
pub struct Lemma23Options {
    pub t0: f64,
    /// Start points `s` whose kernels are checked for positivity.
    pub s_samples: Vec<f64>,
    pub t_end: f64,
    pub step: f64,
    pub positivity_tol: f64,
    pub quadrature_tol: f64,
}

impl Lemma23Options {
    pub fn new(t0: f64, t_end: f64, step: f64) -> Self {
        let s_samples = (0..5).map(|k| t0 + (t_end - t0) * k as f64 / 5.0).collect();
        Lemma23Options { t0, s_samples, t_end, step, positivity_tol: 1e-12, quadrature_tol: 1e-3 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Lemma23Report {
    pub min_kernel: f64,
    pub positivity_holds: bool,
    pub max_integral: f64,
    pub integral_holds: bool,
    /// `(t, integral of X(t,s) b(s) ds over [t0, t])` on the quadrature mesh.
    pub integrals: Vec<(f64, f64)>,
}

/// Numerical check of kernel positivity and `int X(t,s) b(s) ds <= 1`.
///
/// The `s`-mesh has spacing `10*step`; each node gets its own kernel
/// integration, and the outer integral is trapezoidal.
pub fn check_lemma23(a: &CoefficientSpec, b: &CoefficientSpec, opts: &Lemma23Options) -> Result<Lemma23Report, SimError> {
    if !(a.lower > 0.0 && b.lower > 0.0) {
        return Err(SimError::Lemma23Hypothesis(format!(
            "need positive lower bounds, got a >= {} and b >= {}",
            a.lower, b.lower
        )));
    }
    if a.lower * a.lower < 4.0 * b.upper {
        return Err(SimError::Lemma23Hypothesis(format!(
            "alpha^2 = {} < 4B = {}",
            a.lower * a.lower,
            4.0 * b.upper
        )));
    }
    let stride = 10usize;
    let mesh = stride as f64 * opts.step;
    let nodes = ((opts.t_end - opts.t0) / mesh + 1e-9).floor() as usize;
    if nodes == 0 {
        return Err(SimError::BadHorizon { t0: opts.t0, t_end: opts.t_end });
    }

    let mut min_kernel = f64::INFINITY;
    for &s in &opts.s_samples {
        if s < opts.t_end {
            let k = fundamental_function(&a.func, &b.func, s, opts.t_end, opts.step)?;
            min_kernel = k[1..].iter().cloned().fold(min_kernel, f64::min);
        }
    }

    let t_last = opts.t0 + nodes as f64 * mesh;
    let mut kernels = Vec::with_capacity(nodes + 1);
    let mut weights = Vec::with_capacity(nodes + 1);
    for j in 0..=nodes {
        let s = opts.t0 + j as f64 * mesh;
        weights.push(b.func.eval(s).map_err(|source| SimError::Eval { what: "b", t: s, source })?);
        if j < nodes {
            let k = fundamental_function(&a.func, &b.func, s, t_last, opts.step)?;
            min_kernel = k[1..].iter().cloned().fold(min_kernel, f64::min);
            kernels.push(k);
        } else {
            kernels.push(vec![0.0]);
        }
    }

    let mut integrals = Vec::with_capacity(nodes);
    for m in 1..=nodes {
        let term = |j: usize| kernels[j][(m - j) * stride] * weights[j];
        let mut sum = 0.5 * (term(0) + term(m));
        for j in 1..m {
            sum += term(j);
        }
        integrals.push((opts.t0 + m as f64 * mesh, sum * mesh));
    }
    let max_integral = integrals.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(Lemma23Report {
        min_kernel,
        positivity_holds: min_kernel > -opts.positivity_tol,
        max_integral,
        integral_holds: max_integral <= 1.0 + opts.quadrature_tol,
        integrals,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelProbe {
    pub sup: f64,
    /// Sup over the first 80% of the horizon.
    pub sup_early: f64,
    pub stabilized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub x: ChannelProbe,
    pub dx: ChannelProbe,
    pub u: ChannelProbe,
    pub bounded: bool,
    /// Running sups `(t, |x|, |x'|, |u|)` at 50 checkpoints.
    pub running: Vec<(f64, f64, f64, f64)>,
    pub stats: IntegrationStats,
}

fn probe_channel(v: &[f64], cut: usize) -> ChannelProbe {
    let sup = sup_abs(v);
    let sup_early = sup_abs(&v[..cut]);
    ChannelProbe { sup, sup_early, stabilized: sup_early >= 0.99 * sup }
}

/// Zero-history response to bounded forcing; a channel has stabilized when its
/// running sup grew by less than 1% over the last fifth of the horizon.
pub fn bohl_perron_probe(
    spec: &SystemSpec,
    forcing: &ForcingSpec,
    t_end: f64,
    step: f64,
) -> Result<ProbeReport, SimError> {
    let traj = integrate(spec, &InitialData::zero(), forcing, t_end, step)?;
    let n = traj.len();
    let cut = ((0.8 * (n - 1) as f64).round() as usize + 1).min(n);
    let x = probe_channel(&traj.x, cut);
    let dx = probe_channel(&traj.dx, cut);
    let u = probe_channel(&traj.u, cut);
    let mut running = Vec::with_capacity(50);
    let (mut sx, mut sdx, mut su) = (0.0f64, 0.0f64, 0.0f64);
    let every = (n / 50).max(1);
    for i in 0..n {
        sx = sx.max(traj.x[i].abs());
        sdx = sdx.max(traj.dx[i].abs());
        su = su.max(traj.u[i].abs());
        if (i + 1) % every == 0 || i + 1 == n {
            running.push((traj.time(i), sx, sdx, su));
        }
    }
    Ok(ProbeReport {
        bounded: x.stabilized && dx.stabilized && u.stabilized,
        x,
        dx,
        u,
        running,
        stats: traj.stats,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AprioriReport {
    pub t1: f64,
    /// Measured `(|x|, |x'|, |x''|, |u|, |u'|)` sup norms on `[t0, t1]`.
    pub measured: [f64; 5],
    /// Sound majorant of the forcing vector.
    pub forcing_majorant: [f64; 5],
    /// `(I - A)^{-1}` applied to the forcing majorant.
    pub bound: [f64; 5],
    pub componentwise: [bool; 5],
    pub inequalities: Vec<InequalityCheck>,
    pub all_hold: bool,
    pub stats: IntegrationStats,
}

/// Relative slack allowed when comparing measured norms to bounds.
pub const APRIORI_REL_TOL: f64 = 1e-6;

fn leq(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + APRIORI_REL_TOL * rhs.abs().max(1e-12)
}

/// Compares measured sup norms of a zero-history forced run against the
/// bound `X_u <= (I - A)^{-1} F` and the five scalar estimates behind it.
pub fn verify_apriori(
    spec: &SystemSpec,
    forcing: &ForcingSpec,
    certificate: &Certificate,
    t1: f64,
    step: f64,
) -> Result<AprioriReport, SimError> {
    if !certificate.is_certified() {
        return Err(SimError::MissingCertificate);
    }
    let traj = integrate(spec, &InitialData::zero(), forcing, t1, step)?;
    let measured = traj.sup_norms().as_vector();
    let [x, dx, ddx, u, du] = measured;
    let (f1, f2) = (forcing.bound1, forcing.bound2);
    let f = [f1 / spec.a2.lower, f1 / spec.a1.lower, f1, f2 / spec.b1.lower, f2];
    let bound = stability::solve(&certificate.matrix.complement(), &f)?;
    let componentwise: [bool; 5] = std::array::from_fn(|i| leq(measured[i], bound[i]));

    let n = &certificate.norms;
    let (tau1, tau2, sigma1) = (spec.h1.max_lag, spec.h2.max_lag, spec.g1.max_lag);
    let check = |name, lhs: f64, rhs: f64| InequalityCheck { name, lhs, rhs, holds: leq(lhs, rhs) };
    let inequalities = vec![
        check("x_ddot", ddx, n.n_a1 * dx + n.n_a2 * x + n.n_a3 * u + f1),
        check("x_dot", dx, tau1 * ddx + n.r_a2_a1 * x + n.r_a3_a1 * u + f[1]),
        check("x", x, tau1 * n.r_a1_a2 * ddx + tau2 * dx + n.r_a3_a2 * u + f[0]),
        check("u_dot", du, n.n_b1 * u + n.n_b2 * x + f2),
        check("u", u, n.r_b2_b1 * x + sigma1 * du + f[3]),
    ];
    let all_hold = componentwise.iter().all(|&b| b) && inequalities.iter().all(|c| c.holds);
    Ok(AprioriReport {
        t1,
        measured,
        forcing_majorant: f,
        bound,
        componentwise,
        inequalities,
        all_hold,
        stats: traj.stats,
    })
}
