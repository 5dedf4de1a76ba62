//! JSON run configuration.
//!
//! ```json
//! {
//!   "system": {
//!     "t0": 0,
//!     "a1": {"expr": "1+0.01*abs(sin(t))", "lower": 1, "upper": 1.01},
//!     "a3": {"expr": "-0.1*sin(10*t)", "bound": 0.1},
//!     "h1": {"lag": "0.1*abs(sin(3*t))", "max": 0.1},
//!     ...
//!   },
//!   "initial":  {"x": "1", "dx": "0", "u": "1"},
//!   "forcing":  {"f1": {"expr": "0", "bound": 0}, "f2": {"expr": "0", "bound": 0}},
//!   "numerics": {"step": 0.005, "t_end": 400, "grid_step": 0.001, "horizon": 100,
//!                "period_hint": 6.3, "window": 10, "apriori_t1": 300,
//!                "tolerances": {"radius": 1e-10, "minor": 1e-12}},
//!   "outputs":  {"report": "report.json", "trajectory": "traj.csv", "plot_data": "env.dat"}
//! }
//! ```
//!
//! `a1`, `a2`, `b1` take `lower`/`upper`; the signed coefficients `a3`, `b2`
//! take `bound` on their absolute value. Every section except `system` is
//! optional. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde_json::{Map, Value};
use thiserror::Error;

use crate::expr::{Expr, ParseError};
use crate::model::{CoefficientName, CoefficientSpec, DelayName, DelaySpec, SystemSpec};
use crate::simulate::{ForcingSpec, InitialData};
use crate::stability::Tolerances;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("{pointer}: expression `{source_text}`: {error}")]
    Expression {
        pointer: String,
        source_text: String,
        error: ParseError,
    },
    #[error("{pointer}: {message}")]
    Validation { pointer: String, message: String },
}

impl ConfigError {
    pub fn pointer(&self) -> Option<&str> {
        match self {
            ConfigError::Schema { pointer, .. }
            | ConfigError::Expression { pointer, .. }
            | ConfigError::Validation { pointer, .. } => Some(pointer),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Numerics {
    pub step: Option<f64>,
    pub t_end: Option<f64>,
    pub grid_step: Option<f64>,
    pub horizon: Option<f64>,
    pub period_hint: Option<f64>,
    pub window: Option<f64>,
    pub apriori_t1: Option<f64>,
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outputs {
    pub report: Option<PathBuf>,
    pub trajectory: Option<PathBuf>,
    pub plot_data: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: SystemSpec,
    pub initial: InitialData,
    pub forcing: ForcingSpec,
    pub numerics: Numerics,
    pub outputs: Outputs,
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let bytes = std::fs::read(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_config(&bytes)
}

pub fn parse_config(bytes: &[u8]) -> Result<RunConfig, ConfigError> {
    let root: Value = serde_json::from_slice(bytes)?;
    let root = Obj::new(&root, "")?;
    root.only(&["system", "initial", "forcing", "numerics", "outputs"])?;

    let sys = root.required_obj("system")?;
    let system = parse_system(&sys)?;

    let initial = match root.optional_obj("initial")? {
        None => InitialData::zero(),
        Some(o) => {
            o.only(&["x", "dx", "u"])?;
            InitialData {
                phi1: o.optional_expr("x")?.unwrap_or(Expr::Num(0.0)),
                phi2: o.optional_expr("dx")?.unwrap_or(Expr::Num(0.0)),
                psi: o.optional_expr("u")?.unwrap_or(Expr::Num(0.0)),
            }
        }
    };

    let forcing = match root.optional_obj("forcing")? {
        None => ForcingSpec::zero(),
        Some(o) => {
            o.only(&["f1", "f2"])?;
            let term = |key: &str| -> Result<(Expr, f64), ConfigError> {
                match o.optional_obj(key)? {
                    None => Ok((Expr::Num(0.0), 0.0)),
                    Some(f) => {
                        f.only(&["expr", "bound"])?;
                        let bound = f.required_f64("bound")?;
                        if bound < 0.0 {
                            return Err(f.schema("bound", "must be >= 0"));
                        }
                        Ok((f.required_expr("expr")?, bound))
                    }
                }
            };
            let (f1, bound1) = term("f1")?;
            let (f2, bound2) = term("f2")?;
            ForcingSpec { f1, f2, bound1, bound2 }
        }
    };

    let numerics = match root.optional_obj("numerics")? {
        None => Numerics::default(),
        Some(o) => {
            o.only(&["step", "t_end", "grid_step", "horizon", "period_hint", "window", "apriori_t1", "tolerances"])?;
            let mut tolerances = Tolerances::default();
            if let Some(t) = o.optional_obj("tolerances")? {
                t.only(&["radius", "minor"])?;
                if let Some(v) = t.optional_positive("radius")? {
                    tolerances.radius = v;
                }
                if let Some(v) = t.optional_positive("minor")? {
                    tolerances.minor = v;
                }
            }
            Numerics {
                step: o.optional_positive("step")?,
                t_end: o.optional_positive("t_end")?,
                grid_step: o.optional_positive("grid_step")?,
                horizon: o.optional_positive("horizon")?,
                period_hint: o.optional_positive("period_hint")?,
                window: o.optional_positive("window")?,
                apriori_t1: o.optional_positive("apriori_t1")?,
                tolerances,
            }
        }
    };

    let outputs = match root.optional_obj("outputs")? {
        None => Outputs::default(),
        Some(o) => {
            o.only(&["report", "trajectory", "plot_data"])?;
            Outputs {
                report: o.optional_str("report")?.map(PathBuf::from),
                trajectory: o.optional_str("trajectory")?.map(PathBuf::from),
                plot_data: o.optional_str("plot_data")?.map(PathBuf::from),
            }
        }
    };

    Ok(RunConfig { system, initial, forcing, numerics, outputs })
}

fn parse_system(sys: &Obj<'_>) -> Result<SystemSpec, ConfigError> {
    let mut keys = vec!["t0"];
    keys.extend(CoefficientName::ALL.iter().map(|c| c.as_str()));
    keys.extend(DelayName::ALL.iter().map(|d| d.as_str()));
    sys.only(&keys)?;

    let t0 = sys.optional_f64("t0")?.unwrap_or(0.0);
    if !(t0 >= 0.0) {
        return Err(sys.schema("t0", "must be >= 0"));
    }

    let coefficient = |name: CoefficientName| -> Result<CoefficientSpec, ConfigError> {
        let o = sys.required_obj(name.as_str())?;
        let func = o.required_expr("expr")?;
        match name {
            CoefficientName::A3 | CoefficientName::B2 => {
                o.only(&["expr", "bound"])?;
                let bound = o.required_f64("bound")?;
                if bound < 0.0 {
                    return Err(o.schema("bound", "must be >= 0"));
                }
                Ok(CoefficientSpec::signed(func, bound))
            }
            _ => {
                o.only(&["expr", "lower", "upper"])?;
                let lower = o.required_f64("lower")?;
                let upper = o.required_f64("upper")?;
                if lower > upper {
                    return Err(o.schema("lower", "exceeds upper"));
                }
                Ok(CoefficientSpec::new(func, lower, upper))
            }
        }
    };
    let delay = |name: DelayName| -> Result<DelaySpec, ConfigError> {
        let o = sys.required_obj(name.as_str())?;
        o.only(&["lag", "max"])?;
        let lag = o.required_expr("lag")?;
        let max = o.required_f64("max")?;
        if max < 0.0 {
            return Err(o.schema("max", "must be >= 0"));
        }
        match lag.eval(t0) {
            Ok(v) if v < 0.0 => Err(ConfigError::Validation {
                pointer: format!("{}/lag", o.pointer),
                message: format!("negative lag {v} at t0 = {t0}; delays must satisfy 0 <= t - h(t)"),
            }),
            Ok(_) => Ok(DelaySpec::new(lag, max)),
            Err(e) => Err(ConfigError::Validation { pointer: format!("{}/lag", o.pointer), message: e.to_string() }),
        }
    };

    Ok(SystemSpec {
        a1: coefficient(CoefficientName::A1)?,
        a2: coefficient(CoefficientName::A2)?,
        a3: coefficient(CoefficientName::A3)?,
        b1: coefficient(CoefficientName::B1)?,
        b2: coefficient(CoefficientName::B2)?,
        h1: delay(DelayName::H1)?,
        h2: delay(DelayName::H2)?,
        h3: delay(DelayName::H3)?,
        g1: delay(DelayName::G1)?,
        g2: delay(DelayName::G2)?,
        t0,
    })
}

/// A JSON object together with its pointer, for error messages.
struct Obj<'a> {
    map: &'a Map<String, Value>,
    pointer: String,
}

impl<'a> Obj<'a> {
    fn new(v: &'a Value, pointer: &str) -> Result<Self, ConfigError> {
        match v {
            Value::Object(map) => Ok(Obj { map, pointer: pointer.to_string() }),
            _ => Err(ConfigError::Schema {
                pointer: if pointer.is_empty() { "/".into() } else { pointer.into() },
                message: "expected an object".into(),
            }),
        }
    }

    fn path(&self, key: &str) -> String {
        format!("{}/{}", self.pointer, key)
    }

    fn schema(&self, key: &str, message: &str) -> ConfigError {
        ConfigError::Schema { pointer: self.path(key), message: message.to_string() }
    }

    fn only(&self, allowed: &[&str]) -> Result<(), ConfigError> {
        match self.map.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(self.schema(k, "unknown field")),
            None => Ok(()),
        }
    }

    fn required(&self, key: &str) -> Result<&'a Value, ConfigError> {
        self.map.get(key).ok_or_else(|| self.schema(key, "missing required field"))
    }

    fn required_obj(&self, key: &str) -> Result<Obj<'a>, ConfigError> {
        Obj::new(self.required(key)?, &self.path(key))
    }

    fn optional_obj(&self, key: &str) -> Result<Option<Obj<'a>>, ConfigError> {
        self.map.get(key).map(|v| Obj::new(v, &self.path(key))).transpose()
    }

    fn required_f64(&self, key: &str) -> Result<f64, ConfigError> {
        self.optional_f64(key)?.ok_or_else(|| self.schema(key, "missing required field"))
    }

    fn optional_f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.map.get(key) {
            None => Ok(None),
            Some(v) => v.as_f64().map(Some).ok_or_else(|| self.schema(key, "expected a number")),
        }
    }

    fn optional_positive(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.optional_f64(key)? {
            Some(v) if !(v > 0.0) => Err(self.schema(key, "must be positive")),
            other => Ok(other),
        }
    }

    fn optional_str(&self, key: &str) -> Result<Option<&'a str>, ConfigError> {
        match self.map.get(key) {
            None => Ok(None),
            Some(v) => v.as_str().map(Some).ok_or_else(|| self.schema(key, "expected a string")),
        }
    }

    fn required_expr(&self, key: &str) -> Result<Expr, ConfigError> {
        self.optional_expr(key)?.ok_or_else(|| self.schema(key, "missing required field"))
    }

    /// Accepts an expression string or a bare number.
    fn optional_expr(&self, key: &str) -> Result<Option<Expr>, ConfigError> {
        match self.map.get(key) {
            None => Ok(None),
            Some(Value::Number(n)) => Ok(Some(Expr::constant(n.as_f64().unwrap_or(f64::NAN)))),
            Some(Value::String(s)) => Expr::parse(s).map(Some).map_err(|error| ConfigError::Expression {
                pointer: self.path(key),
                source_text: s.clone(),
                error,
            }),
            Some(_) => Err(self.schema(key, "expected an expression string")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = include_str!("../examples/paper_example.json");

    fn edit(f: impl FnOnce(&mut Value)) -> Vec<u8> {
        let mut v: Value = serde_json::from_str(EXAMPLE).unwrap();
        f(&mut v);
        serde_json::to_vec(&v).unwrap()
    }

    #[test]
    fn shipped_example_loads() {
        let cfg = parse_config(EXAMPLE.as_bytes()).unwrap();
        assert_eq!(cfg.system.a3.func, Expr::parse("-0.1*sin(10*t)").unwrap());
        assert_eq!(cfg.system, SystemSpec::worked_example());
        assert_eq!(cfg.initial, InitialData::constant(1.0, 0.0, 1.0));
    }

    #[test]
    fn missing_coefficient_names_pointer() {
        let bytes = edit(|v| {
            v["system"].as_object_mut().unwrap().remove("b1");
        });
        let err = parse_config(&bytes).unwrap_err();
        assert_eq!(err.pointer(), Some("/system/b1"), "{err}");
    }

    #[test]
    fn negative_lag_rejected() {
        let bytes = edit(|v| v["system"]["h2"]["lag"] = Value::from("-0.1"));
        let err = parse_config(&bytes).unwrap_err();
        assert!(matches!(err, ConfigError::Validation { .. }));
        assert_eq!(err.pointer(), Some("/system/h2/lag"));
    }

    #[test]
    fn expression_errors_carry_location() {
        let bytes = edit(|v| v["system"]["a1"]["expr"] = Value::from("1+0.01*abs(sin(t)"));
        match parse_config(&bytes).unwrap_err() {
            ConfigError::Expression { pointer, error: ParseError::Syntax { offset, .. }, .. } => {
                assert_eq!(pointer, "/system/a1/expr");
                assert_eq!(offset, 17);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn schema_errors() {
        let bytes = edit(|v| v["system"]["a2"]["upper"] = Value::from("big"));
        assert_eq!(parse_config(&bytes).unwrap_err().pointer(), Some("/system/a2/upper"));
        let bytes = edit(|v| v["numerics"]["stepp"] = Value::from(1));
        assert_eq!(parse_config(&bytes).unwrap_err().pointer(), Some("/numerics/stepp"));
        let bytes = edit(|v| v["numerics"]["step"] = Value::from(-1));
        assert_eq!(parse_config(&bytes).unwrap_err().pointer(), Some("/numerics/step"));
        assert!(matches!(parse_config(b"{"), Err(ConfigError::Json(_))));
        assert_eq!(parse_config(b"[]").unwrap_err().pointer(), Some("/"));
    }

    #[test]
    fn optional_sections_default() {
        let bytes = edit(|v| {
            let o = v.as_object_mut().unwrap();
            o.remove("initial");
            o.remove("forcing");
            o.remove("numerics");
            o.remove("outputs");
        });
        let cfg = parse_config(&bytes).unwrap();
        assert_eq!(cfg.initial, InitialData::zero());
        assert_eq!(cfg.forcing, ForcingSpec::zero());
        assert_eq!(cfg.numerics, Numerics::default());
    }
}
