//! Scenario configuration: JSON schema, presets and validation.

use std::fmt;
use std::path::PathBuf;

use qdecay_core::{
    sample_lorentzian_modes, ComplexSignal64, CorrelationFunction64, LorentzianParams,
    MarkovParams64, Mode, ModeSet, QubitState64, TimeGrid64, C64, DEFAULT_BREAKDOWN_THRESHOLD,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    TclExact,
    TclOrder2,
    TclOrder4,
    NzExact,
    NzAnalytic,
    NzOrder2,
    NzOrder4,
    Markov,
    Ansatz,
    Oracle,
}

impl Method {
    pub const ALL: [Method; 11] = [
        Method::Exact,
        Method::TclExact,
        Method::TclOrder2,
        Method::TclOrder4,
        Method::NzExact,
        Method::NzAnalytic,
        Method::NzOrder2,
        Method::NzOrder4,
        Method::Markov,
        Method::Ansatz,
        Method::Oracle,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::TclExact => "tcl-exact",
            Method::TclOrder2 => "tcl-order2",
            Method::TclOrder4 => "tcl-order4",
            Method::NzExact => "nz-exact",
            Method::NzAnalytic => "nz-analytic",
            Method::NzOrder2 => "nz-order2",
            Method::NzOrder4 => "nz-order4",
            Method::Markov => "markov",
            Method::Ansatz => "ansatz",
            Method::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum CorrelationSpec {
    /// `f(τ) = ½γ₀λe^{−λ|τ|}`. With `units = "lambda"`, `gamma0` is `γ₀/λ`.
    Lorentzian { gamma0: f64, lambda: f64 },
    /// Explicit modes; `f(τ) = Σ|g_k|² e^{i(ω₀−ω_k)τ}`.
    Modes { omega0: f64, modes: Vec<ModeSpec> },
    /// Samples `f(i·h)` as `[re, im]` pairs.
    Tabulated { h: f64, values: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub g_re: f64,
    #[serde(default)]
    pub g_im: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub h: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    pub rho11: f64,
    #[serde(default)]
    pub re_rho10: f64,
    #[serde(default)]
    pub im_rho10: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    #[serde(default = "default_n_modes")]
    pub n_modes: usize,
    /// Half-width of the sampled band in units of `λ`.
    #[serde(default = "default_cutoff")]
    pub cutoff_width: f64,
}

fn default_n_modes() -> usize {
    2001
}

fn default_cutoff() -> f64 {
    20.0
}

impl Default for OracleSpec {
    fn default() -> Self {
        Self {
            n_modes: default_n_modes(),
            cutoff_width: default_cutoff(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub breakdown_threshold: f64,
    pub constraint: f64,
    pub identity: f64,
    pub choi: f64,
    pub trace: f64,
    pub hermitian: f64,
    pub contractivity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            breakdown_threshold: DEFAULT_BREAKDOWN_THRESHOLD,
            constraint: 1e-12,
            identity: 1e-6,
            choi: 1e-12,
            trace: 1e-12,
            hermitian: 1e-12,
            contractivity: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    /// Lorentzian `gamma0` is given relative to `lambda`.
    #[default]
    Lambda,
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkovSpec {
    pub gamma: f64,
    #[serde(default)]
    pub shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub correlation: CorrelationSpec,
    pub grid: GridSpec,
    pub initial_state: InitialState,
    pub methods: Vec<Method>,
    #[serde(default)]
    pub oracle: OracleSpec,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub units: Units,
    /// Lindblad rates for `markov` and `ansatz`; derived from `f` if absent.
    #[serde(default)]
    pub markov: Option<MarkovSpec>,
}

/// Command-line replacements for the grid spacing and end time.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GridOverride {
    pub h: Option<f64>,
    pub t_end: Option<f64>,
}

impl GridOverride {
    pub fn apply(self, config: &mut ScenarioConfig) {
        if let Some(h) = self.h {
            config.grid.h = h;
        }
        if let Some(t) = self.t_end {
            config.grid.t_end = t;
        }
    }
}

pub const PRESETS: [&str; 3] = [
    "lorentzian-weak",
    "lorentzian-strong",
    "lorentzian-verystrong",
];

impl ScenarioConfig {
    pub fn preset(name: &str) -> Result<Self, CliError> {
        let gamma0 = match name {
            "lorentzian-weak" => 0.2,
            "lorentzian-strong" => 1.0,
            "lorentzian-verystrong" => 5.0,
            _ => {
                return Err(CliError::config(
                    None,
                    format!(
                        "unknown preset '{name}', expected one of {}",
                        PRESETS.join(", ")
                    ),
                ))
            }
        };
        Ok(Self {
            correlation: CorrelationSpec::Lorentzian {
                gamma0,
                lambda: 1.0,
            },
            grid: GridSpec {
                h: 1e-3,
                t_end: 10.0,
            },
            initial_state: InitialState {
                rho11: 0.8,
                re_rho10: 0.4,
                im_rho10: 0.0,
            },
            methods: Method::ALL.to_vec(),
            oracle: OracleSpec::default(),
            output_dir: None,
            tolerances: Tolerances::default(),
            units: Units::Lambda,
            markov: None,
        })
    }

    /// Parses JSON text, applies grid overrides and validates the result;
    /// errors carry the offending line.
    pub fn from_json_with(text: &str, overrides: GridOverride) -> Result<Self, CliError> {
        let mut config: Self = serde_json::from_str(text)
            .map_err(|e| CliError::config(Some(e.line()), e.to_string()))?;
        overrides.apply(&mut config);
        config
            .validate()
            .map_err(|(key, msg)| CliError::config(Some(line_of(text, key)), msg))?;
        Ok(config)
    }

    /// Checks the invariants serde cannot express. On failure returns the
    /// JSON key to blame and a message.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        let finite_pos = |x: f64| x.is_finite() && x > 0.0;
        let GridSpec { h, t_end } = self.grid;
        if !finite_pos(h) {
            return Err(("h", format!("grid.h must be positive, got {h}")));
        }
        if !finite_pos(t_end) {
            return Err(("t_end", format!("grid.t_end must be positive, got {t_end}")));
        }
        let steps = t_end / h;
        if (steps - steps.round()).abs() > 1e-6 * steps.max(1.0) || steps.round() < 1.0 {
            return Err((
                "t_end",
                format!("grid.t_end = {t_end} is not a whole number of steps h = {h}"),
            ));
        }
        let s = self.initial_state;
        if !(0.0..=1.0).contains(&s.rho11) {
            return Err((
                "rho11",
                format!("initial_state.rho11 must lie in [0, 1], got {}", s.rho11),
            ));
        }
        let coh = s.re_rho10 * s.re_rho10 + s.im_rho10 * s.im_rho10;
        if !coh.is_finite() || coh > s.rho11 * (1.0 - s.rho11) + 1e-12 {
            return Err((
                "re_rho10",
                format!(
                    "|rho10|^2 = {coh} exceeds rho11(1 - rho11) = {}",
                    s.rho11 * (1.0 - s.rho11)
                ),
            ));
        }
        if self.methods.is_empty() {
            return Err(("methods", "at least one method is required".into()));
        }
        if let Some(m) = self
            .methods
            .iter()
            .enumerate()
            .find_map(|(i, m)| self.methods[..i].contains(m).then_some(m))
        {
            return Err(("methods", format!("method {m} listed twice")));
        }
        match &self.correlation {
            CorrelationSpec::Lorentzian { gamma0, lambda } => {
                if !finite_pos(*gamma0) || !finite_pos(*lambda) {
                    return Err((
                        "gamma0",
                        format!(
                            "Lorentzian needs gamma0 > 0 and lambda > 0, got ({gamma0}, {lambda})"
                        ),
                    ));
                }
            }
            CorrelationSpec::Modes { omega0, modes } => {
                let ok = omega0.is_finite()
                    && modes
                        .iter()
                        .all(|m| m.g_re.is_finite() && m.g_im.is_finite() && m.omega.is_finite());
                if !ok {
                    return Err(("modes", "mode parameters must be finite".into()));
                }
            }
            CorrelationSpec::Tabulated { h: th, values } => {
                if !finite_pos(*th) {
                    return Err((
                        "tabulated",
                        format!("tabulated step must be positive, got {th}"),
                    ));
                }
                if values.len() < 2 {
                    return Err((
                        "values",
                        "tabulated correlation needs at least two samples".into(),
                    ));
                }
                if *th > h * (1.0 + 1e-12) {
                    return Err((
                        "tabulated",
                        format!("tabulation step {th} is coarser than the grid step {h}"),
                    ));
                }
                if (values.len() - 1) as f64 * th < t_end * (1.0 - 1e-12) {
                    return Err((
                        "values",
                        format!(
                            "tabulation covers [0, {}] but the grid needs [0, {t_end}]",
                            (values.len() - 1) as f64 * th
                        ),
                    ));
                }
            }
        }
        let lorentzian = matches!(self.correlation, CorrelationSpec::Lorentzian { .. });
        if self.methods.contains(&Method::NzAnalytic) && !lorentzian {
            return Err((
                "methods",
                "nz-analytic needs a Lorentzian correlation".into(),
            ));
        }
        if self.methods.contains(&Method::Oracle)
            && matches!(self.correlation, CorrelationSpec::Tabulated { .. })
        {
            return Err((
                "methods",
                "oracle needs a Lorentzian or mode correlation".into(),
            ));
        }
        if self.methods.contains(&Method::Oracle)
            && lorentzian
            && (self.oracle.n_modes < 2 || !finite_pos(self.oracle.cutoff_width))
        {
            return Err((
                "oracle",
                "oracle needs n_modes >= 2 and cutoff_width > 0".into(),
            ));
        }
        if let Some(m) = self.markov {
            if !(m.gamma >= 0.0 && m.gamma.is_finite() && m.shift.is_finite()) {
                return Err((
                    "markov",
                    format!(
                        "markov needs gamma >= 0 and finite shift, got ({}, {})",
                        m.gamma, m.shift
                    ),
                ));
            }
        }
        let t = self.tolerances;
        let tols = [
            t.breakdown_threshold,
            t.constraint,
            t.identity,
            t.choi,
            t.trace,
            t.hermitian,
            t.contractivity,
        ];
        if tols.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err((
                "tolerances",
                "tolerances must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TimeGrid64, CliError> {
        TimeGrid64::spanning(self.grid.h, self.grid.t_end)
            .map_err(|e| CliError::config(None, e.to_string()))
    }

    pub fn initial_state(&self) -> QubitState64 {
        let s = self.initial_state;
        QubitState64::new(s.rho11, C64::new(s.re_rho10, s.im_rho10))
    }

    pub fn lorentzian(&self) -> Option<LorentzianParams<f64>> {
        match self.correlation {
            CorrelationSpec::Lorentzian { gamma0, lambda } => {
                let g0 = match self.units {
                    Units::Lambda => gamma0 * lambda,
                    Units::Absolute => gamma0,
                };
                LorentzianParams::new(g0, lambda).ok()
            }
            _ => None,
        }
    }

    pub fn correlation(&self) -> Result<CorrelationFunction64, CliError> {
        match &self.correlation {
            CorrelationSpec::Lorentzian { .. } => self
                .lorentzian()
                .map(CorrelationFunction64::Lorentzian)
                .ok_or_else(|| CliError::config(None, "invalid Lorentzian parameters".into())),
            CorrelationSpec::Modes { omega0, modes } => {
                let modes = modes
                    .iter()
                    .map(|m| Mode {
                        coupling: C64::new(m.g_re, m.g_im),
                        omega: m.omega,
                    })
                    .collect();
                ModeSet::new(*omega0, modes)
                    .map(CorrelationFunction64::DiscreteModes)
                    .map_err(|e| CliError::config(None, e.to_string()))
            }
            CorrelationSpec::Tabulated { h, values } => {
                let grid = TimeGrid64::new(*h, values.len() - 1)
                    .map_err(|e| CliError::config(None, e.to_string()))?;
                let samples = values.iter().map(|[re, im]| C64::new(*re, *im)).collect();
                ComplexSignal64::new(grid, samples)
                    .map(CorrelationFunction64::Tabulated)
                    .map_err(|e| CliError::config(None, e.to_string()))
            }
        }
    }

    /// Mode set driving the oracle.
    pub fn oracle_modes(&self) -> Result<ModeSet<f64>, CliError> {
        match (&self.correlation, self.lorentzian()) {
            (CorrelationSpec::Lorentzian { .. }, Some(p)) => {
                sample_lorentzian_modes(&p, 0.0, self.oracle.n_modes, self.oracle.cutoff_width)
                    .map_err(|e| CliError::config(None, e.to_string()))
            }
            _ => match self.correlation()? {
                CorrelationFunction64::DiscreteModes(m) => Ok(m),
                _ => Err(CliError::config(
                    None,
                    "oracle needs a Lorentzian or mode correlation".into(),
                )),
            },
        }
    }

    pub fn markov_params(
        &self,
        cf: &CorrelationFunction64,
        grid: &TimeGrid64,
    ) -> Result<MarkovParams64, CliError> {
        match self.markov {
            Some(m) => MarkovParams64::new(m.gamma, m.shift)
                .map_err(|e| CliError::config(None, e.to_string())),
            None => MarkovParams64::from_correlation(cf, grid)
                .map_err(|e| CliError::numeric("markov", e)),
        }
    }
}

/// 1-based line of the first occurrence of `"key"` in `text`, or 1.
fn line_of(text: &str, key: &str) -> usize {
    let needle = format!("\"{key}\"");
    text.lines()
        .position(|l| l.contains(&needle))
        .map_or(1, |i| i + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    const VALID: &str = r#"{
  "correlation": {"type": "lorentzian", "gamma0": 0.2, "lambda": 1.0},
  "grid": {"h": 0.01, "t_end": 2.0},
  "initial_state": {"rho11": 0.8, "re_rho10": 0.4},
  "methods": ["exact", "tcl-exact"]
}"#;

    fn expect_line(text: &str, line: usize) {
        match ScenarioConfig::from_json_with(text, GridOverride::default()) {
            Err(CliError::Config { line: Some(l), .. }) => assert_eq!(l, line, "{text}"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn parses_minimal_config_with_defaults() {
        let c = ScenarioConfig::from_json_with(VALID, GridOverride::default()).unwrap();
        assert_eq!(c.methods, vec![Method::Exact, Method::TclExact]);
        assert_eq!(c.units, Units::Lambda);
        assert_eq!(c.oracle, OracleSpec::default());
        assert_eq!(c.tolerances.breakdown_threshold, 1e-8);
        assert_eq!(c.grid().unwrap().len(), 201);
    }

    #[test]
    fn presets_validate() {
        for name in PRESETS {
            let c = ScenarioConfig::preset(name).unwrap();
            c.validate().unwrap();
            assert_eq!(c.methods.len(), 11);
        }
        assert!(ScenarioConfig::preset("lorentzian-medium").is_err());
    }

    #[test]
    fn units_scale_lorentzian_rate() {
        let mut c = ScenarioConfig::preset("lorentzian-weak").unwrap();
        c.correlation = CorrelationSpec::Lorentzian {
            gamma0: 0.2,
            lambda: 2.0,
        };
        assert_eq!(c.lorentzian().unwrap().gamma0(), 0.4);
        c.units = Units::Absolute;
        assert_eq!(c.lorentzian().unwrap().gamma0(), 0.2);
    }

    #[test]
    fn syntax_errors_report_line() {
        expect_line("{\n  \"grid\": {\"h\": 0.01,\n  \"t_end\": }\n}", 3);
    }

    #[test]
    fn semantic_errors_report_line() {
        expect_line(&VALID.replace("\"rho11\": 0.8", "\"rho11\": 1.5"), 4);
        expect_line(&VALID.replace("\"re_rho10\": 0.4", "\"re_rho10\": 0.6"), 4);
        expect_line(&VALID.replace("[\"exact\", \"tcl-exact\"]", "[]"), 5);
        expect_line(&VALID.replace("\"t_end\": 2.0", "\"t_end\": 2.005"), 3);
        expect_line(&VALID.replace("\"tcl-exact\"", "\"tcl-exakt\""), 5);
    }

    #[test]
    fn method_restrictions() {
        let modes = VALID
            .replace(
                r#"{"type": "lorentzian", "gamma0": 0.2, "lambda": 1.0}"#,
                r#"{"type": "modes", "omega0": 0.0, "modes": [{"g_re": 0.5, "omega": 0.0}]}"#,
            )
            .replace("\"tcl-exact\"", "\"nz-analytic\"");
        assert!(ScenarioConfig::from_json_with(&modes, GridOverride::default()).is_err());
        let tab = VALID
            .replace(
                r#"{"type": "lorentzian", "gamma0": 0.2, "lambda": 1.0}"#,
                r#"{"type": "tabulated", "h": 1.0, "values": [[0,0],[0,0],[0,0]]}"#,
            )
            .replace("\"tcl-exact\"", "\"oracle\"");
        assert!(ScenarioConfig::from_json_with(&tab, GridOverride::default()).is_err());
    }

    #[test]
    fn tabulated_must_cover_grid_finely() {
        let coarse = VALID.replace(
            r#"{"type": "lorentzian", "gamma0": 0.2, "lambda": 1.0}"#,
            r#"{"type": "tabulated", "h": 0.02, "values": [[0,0],[0,0]]}"#,
        );
        assert!(ScenarioConfig::from_json_with(&coarse, GridOverride::default()).is_err());
        let short = VALID.replace(
            r#"{"type": "lorentzian", "gamma0": 0.2, "lambda": 1.0}"#,
            r#"{"type": "tabulated", "h": 0.01, "values": [[0,0],[0,0]]}"#,
        );
        assert!(ScenarioConfig::from_json_with(&short, GridOverride::default()).is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            let json = serde_json::to_string(&m).unwrap();
            assert_eq!(json, format!("\"{}\"", m.name()));
            assert_eq!(serde_json::from_str::<Method>(&json).unwrap(), m);
        }
    }
}
