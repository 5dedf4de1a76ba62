//! System description, hypothesis validation and the sup-norm table.
//!
//! The coupled system is
//!
//! ```text
//! x''(t) + a1(t) x'(h1(t)) + a2(t) x(h2(t)) + a3(t) u(h3(t)) = f1(t)
//! u'(t)  + b1(t) u(g1(t))  + b2(t) x(g2(t))                  = f2(t)
//! ```
//!
//! Delays are given as lags `d(t) = t - h(t)`. Essential suprema are not
//! computed symbolically: each coefficient carries declared bounds, and
//! [`validate`] falsifies them by dense sampling.

use serde::Serialize;
use thiserror::Error;

use crate::expr::{EvalError, Expr};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{name}: declared lower bound {lower} exceeds upper bound {upper}")]
    InvertedBounds { name: String, lower: f64, upper: f64 },
    #[error("{name}: signed coefficient bounds |c(t)| so the lower bound must be >= 0, got {lower}")]
    NegativeMagnitudeBound { name: String, lower: f64 },
    #[error("{name}: declared maximum lag must be finite and >= 0, got {max_lag}")]
    BadMaxLag { name: String, max_lag: f64 },
    #[error("{name}: bound must be finite")]
    NonFiniteBound { name: String },
    #[error("start time t0 must be finite and >= 0, got {0}")]
    BadStartTime(f64),
    #[error("ratio norm {numerator}/{denominator}: denominator lower bound {lower} is not positive")]
    DivisionByZero {
        numerator: &'static str,
        denominator: &'static str,
        lower: f64,
    },
    #[error("sampled ratio {numerator}/{denominator} has zero denominator at t = {t}")]
    SampledDivisionByZero {
        numerator: &'static str,
        denominator: &'static str,
        t: f64,
    },
    #[error("grid step must be positive and horizon must exceed t0 (step {step}, horizon {horizon}, t0 {t0})")]
    BadGrid { step: f64, horizon: f64, t0: f64 },
    #[error("evaluating {name} at t = {t}: {source}")]
    Eval {
        name: String,
        t: f64,
        #[source]
        source: EvalError,
    },
}

/// A coefficient with its declared essential bounds on `[t0, inf)`.
///
/// For a signed coefficient (`a3`, `b2`) the bounds apply to `|c(t)|`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSpec {
    pub func: Expr,
    pub lower: f64,
    pub upper: f64,
    pub signed: bool,
}

impl CoefficientSpec {
    pub fn new(func: Expr, lower: f64, upper: f64) -> Self {
        CoefficientSpec { func, lower, upper, signed: false }
    }

    pub fn signed(func: Expr, upper: f64) -> Self {
        CoefficientSpec { func, lower: 0.0, upper, signed: true }
    }

    pub fn constant(value: f64) -> Self {
        CoefficientSpec::new(Expr::constant(value), value, value)
    }

    /// Signed coefficient that is identically zero.
    pub fn zero() -> Self {
        CoefficientSpec::signed(Expr::Num(0.0), 0.0)
    }

    fn check(&self, name: &str) -> Result<(), ModelError> {
        if !self.lower.is_finite() || !self.upper.is_finite() {
            return Err(ModelError::NonFiniteBound { name: name.to_string() });
        }
        if self.lower > self.upper {
            return Err(ModelError::InvertedBounds {
                name: name.to_string(),
                lower: self.lower,
                upper: self.upper,
            });
        }
        if self.signed && self.lower < 0.0 {
            return Err(ModelError::NegativeMagnitudeBound { name: name.to_string(), lower: self.lower });
        }
        Ok(())
    }

    fn within(&self, v: f64) -> bool {
        if self.signed {
            v.abs() <= self.upper + slack(self.upper)
        } else {
            self.lower - slack(self.lower) <= v && v <= self.upper + slack(self.upper)
        }
    }
}

/// Rounding allowance for pointwise bound checks: `0.25 + 0.05*cos(0)` is not exactly `0.3`.
pub const BOUND_SLACK: f64 = 1e-12;

fn slack(bound: f64) -> f64 {
    BOUND_SLACK * bound.abs().max(1.0)
}

/// A delay `h(t) = t - lag(t)` with declared bound `0 <= lag(t) <= max_lag`.
#[derive(Debug, Clone, PartialEq)]
pub struct DelaySpec {
    pub lag: Expr,
    pub max_lag: f64,
}

impl DelaySpec {
    pub fn new(lag: Expr, max_lag: f64) -> Self {
        DelaySpec { lag, max_lag }
    }

    pub fn constant(lag: f64) -> Self {
        DelaySpec::new(Expr::constant(lag), lag.max(0.0))
    }

    pub fn none() -> Self {
        DelaySpec::new(Expr::Num(0.0), 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientName {
    A1,
    A2,
    A3,
    B1,
    B2,
}

impl CoefficientName {
    pub const ALL: [CoefficientName; 5] = [
        CoefficientName::A1,
        CoefficientName::A2,
        CoefficientName::A3,
        CoefficientName::B1,
        CoefficientName::B2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CoefficientName::A1 => "a1",
            CoefficientName::A2 => "a2",
            CoefficientName::A3 => "a3",
            CoefficientName::B1 => "b1",
            CoefficientName::B2 => "b2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayName {
    H1,
    H2,
    H3,
    G1,
    G2,
}

impl DelayName {
    pub const ALL: [DelayName; 5] = [DelayName::H1, DelayName::H2, DelayName::H3, DelayName::G1, DelayName::G2];

    pub fn as_str(self) -> &'static str {
        match self {
            DelayName::H1 => "h1",
            DelayName::H2 => "h2",
            DelayName::H3 => "h3",
            DelayName::G1 => "g1",
            DelayName::G2 => "g2",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub a1: CoefficientSpec,
    pub a2: CoefficientSpec,
    pub a3: CoefficientSpec,
    pub b1: CoefficientSpec,
    pub b2: CoefficientSpec,
    pub h1: DelaySpec,
    pub h2: DelaySpec,
    pub h3: DelaySpec,
    pub g1: DelaySpec,
    pub g2: DelaySpec,
    pub t0: f64,
}

impl SystemSpec {
    /// Checks declared-bound consistency. Sampled behavior is left to [`validate`].
    pub fn check(&self) -> Result<(), ModelError> {
        if !(self.t0.is_finite() && self.t0 >= 0.0) {
            return Err(ModelError::BadStartTime(self.t0));
        }
        for name in CoefficientName::ALL {
            self.coefficient(name).check(name.as_str())?;
        }
        for name in DelayName::ALL {
            let d = self.delay(name);
            if !(d.max_lag.is_finite() && d.max_lag >= 0.0) {
                return Err(ModelError::BadMaxLag { name: name.as_str().to_string(), max_lag: d.max_lag });
            }
        }
        Ok(())
    }

    pub fn coefficient(&self, name: CoefficientName) -> &CoefficientSpec {
        match name {
            CoefficientName::A1 => &self.a1,
            CoefficientName::A2 => &self.a2,
            CoefficientName::A3 => &self.a3,
            CoefficientName::B1 => &self.b1,
            CoefficientName::B2 => &self.b2,
        }
    }

    pub fn coefficient_mut(&mut self, name: CoefficientName) -> &mut CoefficientSpec {
        match name {
            CoefficientName::A1 => &mut self.a1,
            CoefficientName::A2 => &mut self.a2,
            CoefficientName::A3 => &mut self.a3,
            CoefficientName::B1 => &mut self.b1,
            CoefficientName::B2 => &mut self.b2,
        }
    }

    pub fn delay(&self, name: DelayName) -> &DelaySpec {
        match name {
            DelayName::H1 => &self.h1,
            DelayName::H2 => &self.h2,
            DelayName::H3 => &self.h3,
            DelayName::G1 => &self.g1,
            DelayName::G2 => &self.g2,
        }
    }

    pub fn delay_mut(&mut self, name: DelayName) -> &mut DelaySpec {
        match name {
            DelayName::H1 => &mut self.h1,
            DelayName::H2 => &mut self.h2,
            DelayName::H3 => &mut self.h3,
            DelayName::G1 => &mut self.g1,
            DelayName::G2 => &mut self.g2,
        }
    }

    pub fn max_lag(&self) -> f64 {
        DelayName::ALL.iter().map(|&d| self.delay(d).max_lag).fold(0.0, f64::max)
    }

    /// Smallest strictly positive declared lag bound, if any.
    pub fn min_positive_lag(&self) -> Option<f64> {
        DelayName::ALL
            .iter()
            .map(|&d| self.delay(d).max_lag)
            .filter(|&m| m > 0.0)
            .min_by(f64::total_cmp)
    }

    /// The system (4.1)-(4.2) used throughout as the worked example.
    pub fn worked_example() -> SystemSpec {
        let p = |s: &str| Expr::parse(s).expect("built-in expression");
        SystemSpec {
            a1: CoefficientSpec::new(p("1+0.01*abs(sin(t))"), 1.0, 1.01),
            a2: CoefficientSpec::new(p("0.2+0.05*abs(cos(t))"), 0.2, 0.25),
            a3: CoefficientSpec::signed(p("-0.1*sin(10*t)"), 0.1),
            b1: CoefficientSpec::new(p("0.2+0.1*abs(cos(2*t))"), 0.2, 0.3),
            b2: CoefficientSpec::signed(p("0.1*cos(t)"), 0.1),
            h1: DelaySpec::new(p("0.1*abs(sin(3*t))"), 0.1),
            h2: DelaySpec::new(p("0.1*abs(cos(3*t))"), 0.1),
            h3: DelaySpec::new(p("8*sin(5*t)^2"), 8.0),
            g1: DelaySpec::new(p("0.1*sin(t)^2"), 0.1),
            g2: DelaySpec::new(p("5*cos(3*t)^2"), 5.0),
            t0: 0.0,
        }
    }
}

/// Sampling grid used to falsify declared bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationGrid {
    pub step: f64,
    pub horizon: f64,
}

impl ValidationGrid {
    /// `step = min(max lags, 1)/100`, `horizon = t0 + max(100, 20 * period_hint)`.
    pub fn default_for(spec: &SystemSpec, period_hint: Option<f64>) -> Self {
        let step = spec.min_positive_lag().unwrap_or(1.0).min(1.0) / 100.0;
        let span = period_hint.map_or(100.0, |p| (20.0 * p).max(100.0));
        ValidationGrid { step, horizon: spec.t0 + span }
    }

    /// Grid times `t0 + i*step` up to and including the horizon.
    pub fn times(&self, t0: f64) -> impl Iterator<Item = f64> {
        let step = self.step;
        let n = ((self.horizon - t0) / step + 1e-9).floor() as usize;
        (0..=n).map(move |i| t0 + i as f64 * step)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_violation: Option<Violation>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub grid_step: f64,
    pub horizon: f64,
    pub checks: Vec<ConditionCheck>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// First sample (smallest t) where `ok` fails, or where evaluation errors.
fn scan(
    expr: &Expr,
    grid: &ValidationGrid,
    t0: f64,
    ok: impl Fn(f64) -> bool,
) -> (Option<Violation>, Option<String>) {
    for t in grid.times(t0) {
        match expr.eval(t) {
            Ok(v) if ok(v) => {}
            Ok(v) => return (Some(Violation { t, value: v }), None),
            Err(e) => return (Some(Violation { t, value: f64::NAN }), Some(e.to_string())),
        }
    }
    (None, None)
}

/// Checks every hypothesis on the sampling grid. Violations are report entries.
pub fn validate(spec: &SystemSpec, grid: &ValidationGrid) -> ValidationReport {
    let mut checks = Vec::new();
    let t0 = spec.t0;

    for name in CoefficientName::ALL {
        let c = spec.coefficient(name);
        let (violation, err) = scan(&c.func, grid, t0, |v| c.within(v));
        let range = if c.signed {
            format!("|{}(t)| <= {}", name.as_str(), c.upper)
        } else {
            format!("{} <= {}(t) <= {}", c.lower, name.as_str(), c.upper)
        };
        let detail = match (&violation, err) {
            (_, Some(e)) => format!("{range}: evaluation failed: {e}"),
            (Some(v), None) => format!("{range} violated at t = {} (value {})", v.t, v.value),
            (None, None) => range,
        };
        checks.push(ConditionCheck {
            name: format!("bounds:{}", name.as_str()),
            passed: violation.is_none(),
            detail,
            first_violation: violation,
        });
    }

    for name in DelayName::ALL {
        let d = spec.delay(name);
        let (violation, err) = scan(&d.lag, grid, t0, |v| v >= -slack(0.0) && v <= d.max_lag + slack(d.max_lag));
        let range = format!("0 <= t - {}(t) <= {}", name.as_str(), d.max_lag);
        let detail = match (&violation, err) {
            (_, Some(e)) => format!("{range}: evaluation failed: {e}"),
            (Some(v), None) => format!("{range} violated at t = {} (lag {})", v.t, v.value),
            (None, None) => range,
        };
        checks.push(ConditionCheck {
            name: format!("lag:{}", name.as_str()),
            passed: violation.is_none(),
            detail,
            first_violation: violation,
        });
    }

    let alpha1 = spec.a1.lower;
    let a2_upper = spec.a2.upper;
    checks.push(ConditionCheck {
        name: "damping".to_string(),
        passed: alpha1 * alpha1 >= 4.0 * a2_upper,
        detail: format!("alpha1^2 = {} vs 4*A2 = {}", alpha1 * alpha1, 4.0 * a2_upper),
        first_violation: None,
    });

    for name in [CoefficientName::A1, CoefficientName::A2, CoefficientName::B1] {
        let lower = spec.coefficient(name).lower;
        checks.push(ConditionCheck {
            name: format!("positivity:{}", name.as_str()),
            passed: lower > 0.0,
            detail: format!("declared lower bound of {} is {}", name.as_str(), lower),
            first_violation: None,
        });
    }

    ValidationReport { grid_step: grid.step, horizon: grid.horizon, checks }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMode {
    /// Sound bound arithmetic on declared bounds.
    Declared,
    /// Grid suprema of the actual functions; sharper but not a proof.
    Sampled,
}

/// The ten sup norms that populate the majorant matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormTable {
    pub n_a1: f64,
    pub n_a2: f64,
    pub n_a3: f64,
    pub n_b1: f64,
    pub n_b2: f64,
    pub r_a2_a1: f64,
    pub r_a1_a2: f64,
    pub r_a3_a1: f64,
    pub r_a3_a2: f64,
    pub r_b2_b1: f64,
    pub mode: NormMode,
}

impl NormTable {
    pub fn entries(&self) -> [f64; 10] {
        [
            self.n_a1, self.n_a2, self.n_a3, self.n_b1, self.n_b2, self.r_a2_a1, self.r_a1_a2, self.r_a3_a1,
            self.r_a3_a2, self.r_b2_b1,
        ]
    }
}

fn declared_ratio(
    num: &CoefficientSpec,
    den: &CoefficientSpec,
    names: (&'static str, &'static str),
) -> Result<f64, ModelError> {
    if den.lower <= 0.0 {
        return Err(ModelError::DivisionByZero { numerator: names.0, denominator: names.1, lower: den.lower });
    }
    Ok(num.upper / den.lower)
}

fn sampled_sup(c: &CoefficientSpec, name: CoefficientName, t0: f64, grid: &ValidationGrid) -> Result<f64, ModelError> {
    let mut sup = 0.0f64;
    for t in grid.times(t0) {
        let v = c.func.eval(t).map_err(|source| ModelError::Eval { name: name.as_str().into(), t, source })?;
        sup = sup.max(v.abs());
    }
    Ok(sup)
}

fn sampled_ratio(
    num: &CoefficientSpec,
    den: &CoefficientSpec,
    names: (&'static str, &'static str),
    t0: f64,
    grid: &ValidationGrid,
) -> Result<f64, ModelError> {
    let mut sup = 0.0f64;
    for t in grid.times(t0) {
        let n = num.func.eval(t).map_err(|source| ModelError::Eval { name: names.0.into(), t, source })?;
        let d = den.func.eval(t).map_err(|source| ModelError::Eval { name: names.1.into(), t, source })?;
        if d == 0.0 {
            return Err(ModelError::SampledDivisionByZero { numerator: names.0, denominator: names.1, t });
        }
        sup = sup.max((n / d).abs());
    }
    Ok(sup)
}

/// Builds the norm table. `grid` is only consulted in sampled mode.
pub fn norm_bounds(spec: &SystemSpec, mode: NormMode, grid: &ValidationGrid) -> Result<NormTable, ModelError> {
    use CoefficientName::*;
    match mode {
        NormMode::Declared => Ok(NormTable {
            n_a1: spec.a1.upper,
            n_a2: spec.a2.upper,
            n_a3: spec.a3.upper,
            n_b1: spec.b1.upper,
            n_b2: spec.b2.upper,
            r_a2_a1: declared_ratio(&spec.a2, &spec.a1, ("a2", "a1"))?,
            r_a1_a2: declared_ratio(&spec.a1, &spec.a2, ("a1", "a2"))?,
            r_a3_a1: declared_ratio(&spec.a3, &spec.a1, ("a3", "a1"))?,
            r_a3_a2: declared_ratio(&spec.a3, &spec.a2, ("a3", "a2"))?,
            r_b2_b1: declared_ratio(&spec.b2, &spec.b1, ("b2", "b1"))?,
            mode,
        }),
        NormMode::Sampled => {
            if !(grid.step > 0.0 && grid.horizon > spec.t0) {
                return Err(ModelError::BadGrid { step: grid.step, horizon: grid.horizon, t0: spec.t0 });
            }
            let t0 = spec.t0;
            Ok(NormTable {
                n_a1: sampled_sup(&spec.a1, A1, t0, grid)?,
                n_a2: sampled_sup(&spec.a2, A2, t0, grid)?,
                n_a3: sampled_sup(&spec.a3, A3, t0, grid)?,
                n_b1: sampled_sup(&spec.b1, B1, t0, grid)?,
                n_b2: sampled_sup(&spec.b2, B2, t0, grid)?,
                r_a2_a1: sampled_ratio(&spec.a2, &spec.a1, ("a2", "a1"), t0, grid)?,
                r_a1_a2: sampled_ratio(&spec.a1, &spec.a2, ("a1", "a2"), t0, grid)?,
                r_a3_a1: sampled_ratio(&spec.a3, &spec.a1, ("a3", "a1"), t0, grid)?,
                r_a3_a2: sampled_ratio(&spec.a3, &spec.a2, ("a3", "a2"), t0, grid)?,
                r_b2_b1: sampled_ratio(&spec.b2, &spec.b1, ("b2", "b1"), t0, grid)?,
                mode,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn grid(step: f64, horizon: f64) -> ValidationGrid {
        ValidationGrid { step, horizon }
    }

    #[test]
    fn worked_example_validates() {
        let spec = SystemSpec::worked_example();
        spec.check().unwrap();
        let report = validate(&spec, &grid(0.01, 100.0));
        assert!(report.all_passed(), "{:#?}", report.first_failure());
        assert!(report.get("damping").unwrap().passed);
    }

    #[test]
    fn damping_failure() {
        let mut spec = SystemSpec::worked_example();
        spec.a2 = CoefficientSpec::new(Expr::parse("0.25").unwrap(), 0.2, 0.3);
        let report = validate(&spec, &grid(0.01, 10.0));
        let damping = report.get("damping").unwrap();
        assert!(!damping.passed);
        assert_eq!(report.first_failure().unwrap().name, "damping");
    }

    #[test]
    fn lag_violation_located() {
        let mut spec = SystemSpec::worked_example();
        spec.h1 = DelaySpec::new(Expr::parse("0.2*abs(sin(3*t))").unwrap(), 0.1);
        let report = validate(&spec, &grid(0.01, 100.0));
        let lag = report.get("lag:h1").unwrap();
        assert!(!lag.passed);
        // 0.2|sin 3t| first exceeds 0.1 just after t = pi/18; oracle: direct scan.
        let oracle = (0..)
            .map(|i| i as f64 * 0.01)
            .find(|&t| 0.2 * (3.0 * t as f64).sin().abs() > 0.1)
            .unwrap();
        let v = lag.first_violation.as_ref().unwrap();
        assert_eq!(v.t, oracle);
        assert!(v.t > PI / 18.0 && v.t < PI / 18.0 + 0.011);
    }

    #[test]
    fn coefficient_dip_below_lower_bound() {
        let mut spec = SystemSpec::worked_example();
        spec.a2.lower = 0.21;
        let report = validate(&spec, &grid(0.01, 10.0));
        let c = report.get("bounds:a2").unwrap();
        assert!(!c.passed);
        // 0.2 + 0.05|cos t| < 0.21 first when |cos t| < 0.2.
        let t = c.first_violation.as_ref().unwrap().t;
        assert!((t - (0.2f64).acos()).abs() < 0.011);
    }

    #[test]
    fn positivity_and_eval_errors_are_report_entries() {
        let mut spec = SystemSpec::worked_example();
        spec.a1 = CoefficientSpec::new(Expr::parse("1/(t-1)").unwrap(), -10.0, 10.0);
        let report = validate(&spec, &grid(0.5, 3.0));
        assert!(!report.get("positivity:a1").unwrap().passed);
        let b = report.get("bounds:a1").unwrap();
        assert!(!b.passed);
        assert!(b.detail.contains("division by zero"));
    }

    #[test]
    fn declared_norms_of_worked_example() {
        let spec = SystemSpec::worked_example();
        let n = norm_bounds(&spec, NormMode::Declared, &grid(0.01, 100.0)).unwrap();
        assert!((n.r_a1_a2 - 5.05).abs() < 1e-12);
        assert!((n.r_a3_a2 - 0.5).abs() < 1e-12);
        assert!((n.r_a2_a1 - 0.25).abs() < 1e-12);
        assert!((n.r_a3_a1 - 0.1).abs() < 1e-12);
        assert!((n.r_b2_b1 - 0.5).abs() < 1e-12);
        assert_eq!((n.n_a1, n.n_a2, n.n_a3, n.n_b1, n.n_b2), (1.01, 0.25, 0.1, 0.3, 0.1));
    }

    #[test]
    fn constant_coefficient_norms() {
        let spec = SystemSpec {
            a1: CoefficientSpec::constant(2.0),
            a2: CoefficientSpec::constant(1.0),
            a3: CoefficientSpec::zero(),
            b1: CoefficientSpec::constant(1.0),
            b2: CoefficientSpec::zero(),
            h1: DelaySpec::none(),
            h2: DelaySpec::none(),
            h3: DelaySpec::none(),
            g1: DelaySpec::none(),
            g2: DelaySpec::none(),
            t0: 0.0,
        };
        let n = norm_bounds(&spec, NormMode::Declared, &grid(0.1, 1.0)).unwrap();
        assert_eq!(n.n_a1, 2.0);
        assert_eq!(n.r_a1_a2, 2.0);
        assert_eq!((n.n_a3, n.r_a3_a1, n.r_a3_a2, n.n_b2, n.r_b2_b1), (0.0, 0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn sampled_is_sharper_than_declared() {
        let spec = SystemSpec::worked_example();
        let g = grid(0.001, 100.0);
        let sampled = norm_bounds(&spec, NormMode::Sampled, &g).unwrap();
        // Oracle: direct grid supremum of (1+0.01|sin t|)/(0.2+0.05|cos t|).
        let oracle = (0..=100_000)
            .map(|i| {
                let t = i as f64 * 0.001;
                (1.0 + 0.01 * t.sin().abs()) / (0.2 + 0.05 * t.cos().abs())
            })
            .fold(0.0, f64::max);
        assert!((sampled.r_a1_a2 - oracle).abs() < 1e-12);
        assert!(sampled.r_a1_a2 <= 5.05);
        let declared = norm_bounds(&spec, NormMode::Declared, &g).unwrap();
        for (s, d) in sampled.entries().iter().zip(declared.entries()) {
            assert!(*s <= d + 1e-15);
        }
    }

    #[test]
    fn ratio_with_nonpositive_denominator() {
        let mut spec = SystemSpec::worked_example();
        spec.a1.lower = 0.0;
        assert!(matches!(
            norm_bounds(&spec, NormMode::Declared, &grid(0.1, 1.0)),
            Err(ModelError::DivisionByZero { denominator: "a1", .. })
        ));
    }

    #[test]
    fn declared_bound_consistency() {
        let mut spec = SystemSpec::worked_example();
        spec.b1.lower = 0.5;
        assert!(matches!(spec.check(), Err(ModelError::InvertedBounds { .. })));
        let mut spec = SystemSpec::worked_example();
        spec.g2.max_lag = -1.0;
        assert!(matches!(spec.check(), Err(ModelError::BadMaxLag { .. })));
        let mut spec = SystemSpec::worked_example();
        spec.t0 = -1.0;
        assert!(matches!(spec.check(), Err(ModelError::BadStartTime(_))));
    }

    #[test]
    fn default_grid() {
        let spec = SystemSpec::worked_example();
        let g = ValidationGrid::default_for(&spec, None);
        assert!((g.step - 0.001).abs() < 1e-15);
        assert_eq!(g.horizon, 100.0);
        assert_eq!(ValidationGrid::default_for(&spec, Some(10.0)).horizon, 200.0);
    }

    proptest! {
        #[test]
        fn declared_norms_are_monotone_in_bounds(
            lowers in prop::array::uniform5(0.1f64..2.0),
            widths in prop::array::uniform5(0.0f64..1.0),
            which in 0usize..5,
            shrink in 0.0f64..0.09,
            grow in 0.0f64..1.0,
        ) {
            let mut spec = SystemSpec::worked_example();
            for (i, name) in CoefficientName::ALL.into_iter().enumerate() {
                let c = spec.coefficient_mut(name);
                if c.signed {
                    c.upper = lowers[i] + widths[i];
                } else {
                    c.lower = lowers[i];
                    c.upper = lowers[i] + widths[i];
                }
            }
            let g = grid(1.0, 1.0);
            let before = norm_bounds(&spec, NormMode::Declared, &g).unwrap();
            let c = spec.coefficient_mut(CoefficientName::ALL[which]);
            if !c.signed {
                c.lower -= shrink;
            }
            c.upper += grow;
            let after = norm_bounds(&spec, NormMode::Declared, &g).unwrap();
            for (b, a) in before.entries().iter().zip(after.entries()) {
                prop_assert!(a >= *b);
            }
        }
    }
}
