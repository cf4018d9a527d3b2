use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cf::{EvalConfig, DEFAULT_MAX_N, DEFAULT_MAX_PERIOD, DEFAULT_WINDOWS};
use crate::error::{Error, Result};
use crate::irrational::{RMax, RhoSpec, DEFAULT_N_CAP};
use crate::scalar::{Scalar, DEFAULT_PRECISION};

/// A complete run description. Decimal values are strings so that no
/// digits are lost on the way in or out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(flatten)]
    pub source: SourceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision_bits: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval: Option<EvalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SourceSpec {
    Constant {
        a: String,
    },
    Gill {
        a: String,
        /// `"0"`, `"2^-i"`, `"1/i"`, `"1/i^2"`, …
        rule: String,
    },
    Explicit {
        values: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        limit: Option<String>,
    },
    Rational {
        p: u64,
        q: u64,
        /// `"harmonic"`, `"geometric"`, `"zero"`, or a perturbation rule
        /// such as `"1/i"` read as an external `rᵢ`.
        t_rule: String,
        /// Fixed `R`; picked from `seed` when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        r: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        margin: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        amplitude: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        certify_stages: Option<usize>,
    },
    Irrational {
        rho: RhoForm,
        stages: usize,
        #[serde(default)]
        r_max: RMaxSpec,
        #[serde(rename = "N_cap", default = "default_n_cap")]
        n_cap: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        margin: Option<String>,
    },
}

fn default_n_cap() -> u64 {
    DEFAULT_N_CAP
}

impl SourceSpec {
    pub fn mode(&self) -> &'static str {
        match self {
            SourceSpec::Constant { .. } => "constant",
            SourceSpec::Gill { .. } => "gill",
            SourceSpec::Explicit { .. } => "explicit",
            SourceSpec::Rational { .. } => "rational",
            SourceSpec::Irrational { .. } => "irrational",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum RhoForm {
    /// `(p + √d)/q`.
    Quadratic {
        p: i64,
        q: i64,
        d: i64,
    },
    Literal {
        digits: String,
    },
}

impl RhoForm {
    pub fn golden() -> Self {
        RhoForm::Quadratic { p: -3, q: -2, d: 5 }
    }

    pub fn to_spec(&self) -> RhoSpec {
        match self {
            RhoForm::Quadratic { p, q, d } => RhoSpec::Quadratic { p: *p, q: *q, d: *d },
            RhoForm::Literal { digits } => RhoSpec::Literal(digits.clone()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutoWord {
    Auto,
}

/// `"auto"` or a fixed count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RMaxSpec {
    Auto(AutoWord),
    Fixed(usize),
}

impl Default for RMaxSpec {
    fn default() -> Self {
        RMaxSpec::Auto(AutoWord::Auto)
    }
}

impl From<RMaxSpec> for RMax {
    fn from(r: RMaxSpec) -> Self {
        match r {
            RMaxSpec::Auto(_) => RMax::Auto,
            RMaxSpec::Fixed(n) => RMax::Fixed(n),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalSpec {
    #[serde(default = "default_max_n")]
    pub max_n: usize,
    /// Decimal; the mode's default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<String>,
    #[serde(default = "default_windows")]
    pub windows: usize,
    #[serde(default = "default_max_period")]
    pub max_period: usize,
}

fn default_max_n() -> usize {
    DEFAULT_MAX_N
}
fn default_windows() -> usize {
    DEFAULT_WINDOWS
}
fn default_max_period() -> usize {
    DEFAULT_MAX_PERIOD
}

impl Default for EvalSpec {
    fn default() -> Self {
        EvalSpec {
            max_n: DEFAULT_MAX_N,
            threshold: None,
            windows: DEFAULT_WINDOWS,
            max_period: DEFAULT_MAX_PERIOD,
        }
    }
}

impl EvalSpec {
    /// `default_threshold` applies when `threshold` is unset.
    pub fn to_config(&self, prec: u32, default_threshold: Scalar) -> Result<EvalConfig> {
        let mut config = EvalConfig::new(self.max_n, prec);
        config.threshold = match &self.threshold {
            Some(t) => Scalar::parse(t, prec)?,
            None => default_threshold,
        };
        config.windows = self.windows;
        config.max_period = self.max_period;
        if !config.threshold.is_positive() || config.windows == 0 {
            return Err(Error::InvalidConfig("threshold and windows must be positive".into()));
        }
        Ok(config)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

impl Scenario {
    pub fn new(source: SourceSpec) -> Self {
        Scenario {
            name: None,
            source,
            precision_bits: None,
            seed: None,
            eval: None,
            output: None,
        }
    }

    pub fn constant(a: &str) -> Self {
        Self::new(SourceSpec::Constant { a: a.into() })
    }

    pub fn gill(a: &str, rule: &str) -> Self {
        Self::new(SourceSpec::Gill {
            a: a.into(),
            rule: rule.into(),
        })
    }

    pub fn rational(p: u64, q: u64, t_rule: &str) -> Self {
        Self::new(SourceSpec::Rational {
            p,
            q,
            t_rule: t_rule.into(),
            r: None,
            margin: None,
            amplitude: None,
            certify_stages: None,
        })
    }

    pub fn irrational(rho: RhoForm, stages: usize) -> Self {
        Self::new(SourceSpec::Irrational {
            rho,
            stages,
            r_max: RMaxSpec::default(),
            n_cap: DEFAULT_N_CAP,
            t: None,
            margin: None,
        })
    }

    pub fn named(mut self, name: &str) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn with_precision(mut self, bits: u32) -> Self {
        self.precision_bits = Some(bits);
        self
    }

    pub fn with_eval(mut self, eval: EvalSpec) -> Self {
        self.eval = Some(eval);
        self
    }

    pub fn precision(&self) -> u32 {
        self.precision_bits.unwrap_or(DEFAULT_PRECISION)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn eval_spec(&self) -> EvalSpec {
        self.eval.clone().unwrap_or_default()
    }

    /// Name used for output directories and comparison rows.
    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.source.mode().to_string())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Scenario(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| Error::Scenario(format!("{}: {e}", path.display())))
    }

    /// A file holding either one scenario or an array of them.
    pub fn load_many(path: &Path) -> Result<Vec<Self>> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        if text.trim_start().starts_with('[') {
            serde_json::from_str(&text).map_err(|e| Error::Scenario(format!("{}: {e}", path.display())))
        } else {
            Self::from_json(&text).map(|s| vec![s])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn irrational_form_parses() {
        let text = r#"{ "mode": "irrational", "rho": { "form": "quadratic", "p": -3, "q": -2, "d": 5 },
                        "stages": 3, "r_max": "auto", "N_cap": 1000000, "precision_bits": 256 }"#;
        let s = Scenario::from_json(text).unwrap();
        assert_eq!(s.precision(), 256);
        match &s.source {
            SourceSpec::Irrational {
                rho,
                stages,
                r_max,
                n_cap,
                ..
            } => {
                assert_eq!(*rho, RhoForm::golden());
                assert_eq!((*stages, *n_cap), (3, 1_000_000));
                assert_eq!(RMax::from(*r_max), RMax::Auto);
            }
            other => panic!("{other:?}"),
        }
        let fixed = text.replace("\"auto\"", "40");
        match Scenario::from_json(&fixed).unwrap().source {
            SourceSpec::Irrational { r_max, .. } => assert_eq!(RMax::from(r_max), RMax::Fixed(40)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn round_trip_is_lossless() {
        let mut all = vec![
            Scenario::constant("0.2000000000000000000000000000000000000001").named("c"),
            Scenario::gill("1", "2^-i").with_precision(512),
            Scenario::new(SourceSpec::Explicit {
                values: vec!["1".into(), "0.5".into()],
                limit: Some("0.75".into()),
            }),
            Scenario::rational(1, 3, "harmonic"),
            Scenario::irrational(
                RhoForm::Literal {
                    digits: "0.381966".into(),
                },
                2,
            ),
        ];
        all[3].seed = Some(9);
        all[3].eval = Some(EvalSpec {
            threshold: Some("1e-9".into()),
            ..EvalSpec::default()
        });
        all[0].output = Some(OutputSpec {
            dir: Some("out".into()),
        });
        for s in all {
            let back = Scenario::from_json(&s.to_json().unwrap()).unwrap();
            assert_eq!(back, s);
        }
    }

    #[test]
    fn bad_input_is_a_scenario_error() {
        assert!(matches!(
            Scenario::from_json(r#"{"mode": "nope"}"#),
            Err(Error::Scenario(_))
        ));
        assert!(matches!(
            Scenario::from_json(r#"{"mode": "constant"}"#),
            Err(Error::Scenario(_))
        ));
        assert!(matches!(
            Scenario::from_json(
                r#"{"mode": "irrational", "rho": {"form": "quadratic", "p": 1, "q": 2, "d": 5}, "stages": 2, "r_max": "sometimes"}"#
            ),
            Err(Error::Scenario(_))
        ));
    }
}
