//! Analysis configuration and its flat `key = value` file format.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::assembly::BoundaryCondition;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("invalid value `{value}` for `{key}`")]
    BadValue { key: String, value: String },
    #[error("{0}")]
    Invalid(String),
}

/// How the coarse linear beam is refined to the analysis discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Refinement {
    /// Insert knots, then elevate: `C^0` across elements. Convergence sweeps
    /// vary the element count.
    H,
    /// Same `C^0` construction; convergence sweeps vary the degree.
    P,
    /// Elevate, then insert knots: `C^(p-1)` across elements.
    K,
}

impl Refinement {
    pub fn as_str(self) -> &'static str {
        match self {
            Refinement::H => "h",
            Refinement::P => "p",
            Refinement::K => "k",
        }
    }
}

impl fmt::Display for Refinement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Refinement {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "h" => Ok(Refinement::H),
            "p" => Ok(Refinement::P),
            "k" => Ok(Refinement::K),
            _ => Err(ConfigError::BadValue {
                key: "refinement".into(),
                value: s.into(),
            }),
        }
    }
}

pub const DEFAULT_NU: f64 = 0.3;
pub const DEFAULT_KAPPA: f64 = 5.0 / 6.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisConfig {
    pub bc: BoundaryCondition,
    pub h_over_l: f64,
    pub degree: usize,
    pub elements: usize,
    pub refinement: Refinement,
    /// Gauss points per element; `None` means `degree + 1`.
    pub quadrature_points: Option<usize>,
    pub n_modes: usize,
    pub nu: f64,
    pub kappa: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            bc: BoundaryCondition::PinnedPinned,
            h_over_l: 0.01,
            degree: 3,
            elements: 64,
            refinement: Refinement::K,
            quadrature_points: None,
            n_modes: 10,
            nu: DEFAULT_NU,
            kappa: DEFAULT_KAPPA,
        }
    }
}

const KEYS: [&str; 9] = [
    "bc",
    "h_over_l",
    "degree",
    "elements",
    "refinement",
    "quadrature_points",
    "n_modes",
    "nu",
    "kappa",
];

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue {
        key: key.into(),
        value: value.into(),
    })
}

impl AnalysisConfig {
    pub fn quadrature_points(&self) -> usize {
        self.quadrature_points.unwrap_or(self.degree + 1)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: String| Err(ConfigError::Invalid(m));
        if !(self.h_over_l > 0.0 && self.h_over_l <= 0.5) {
            return fail(format!("h_over_l must lie in (0, 0.5], got {}", self.h_over_l));
        }
        if self.degree == 0 {
            return fail("degree must be at least 1".into());
        }
        if self.elements == 0 {
            return fail("elements must be at least 1".into());
        }
        if self.n_modes == 0 {
            return fail("n_modes must be at least 1".into());
        }
        if let Some(q) = self.quadrature_points {
            if q == 0 || q > crate::quadrature::MAX_POINTS {
                return fail(format!("quadrature_points must be in 1..=16, got {q}"));
            }
        }
        if !(self.nu > 0.0 && self.nu < 0.5) {
            return fail(format!("nu must lie in (0, 0.5), got {}", self.nu));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return fail(format!("kappa must be positive, got {}", self.kappa));
        }
        Ok(())
    }

    /// Applies one `key = value` pair.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "bc" => {
                self.bc = value.parse().map_err(|_| ConfigError::BadValue {
                    key: key.into(),
                    value: value.into(),
                })?
            }
            "h_over_l" => self.h_over_l = parse_value(key, value)?,
            "degree" => self.degree = parse_value(key, value)?,
            "elements" => self.elements = parse_value(key, value)?,
            "refinement" => self.refinement = value.parse()?,
            "quadrature_points" => {
                self.quadrature_points = if value.eq_ignore_ascii_case("auto") {
                    None
                } else {
                    Some(parse_value(key, value)?)
                }
            }
            "n_modes" => self.n_modes = parse_value(key, value)?,
            "nu" => self.nu = parse_value(key, value)?,
            "kappa" => self.kappa = parse_value(key, value)?,
            _ => unreachable!("caller checks keys"),
        }
        Ok(())
    }

    /// Parses config text on top of the defaults. Blank lines and `#`
    /// comments are ignored.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(ConfigError::Syntax { line: i + 1 })?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey {
                    line: i + 1,
                    key: key.into(),
                });
            }
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Serializes every field; floats use shortest round-trip formatting.
    pub fn to_config_string(&self) -> String {
        let quad = self
            .quadrature_points
            .map_or_else(|| "auto".to_string(), |q| q.to_string());
        format!(
            "bc = {}\nh_over_l = {}\ndegree = {}\nelements = {}\nrefinement = {}\n\
             quadrature_points = {}\nn_modes = {}\nnu = {}\nkappa = {}\n",
            self.bc,
            self.h_over_l,
            self.degree,
            self.elements,
            self.refinement,
            quad,
            self.n_modes,
            self.nu,
            self.kappa
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults_follow_benchmark_captions() {
        let c = AnalysisConfig::default();
        assert_eq!(c.nu, 0.3);
        assert_eq!(c.kappa, 5.0 / 6.0);
        assert_eq!(c.quadrature_points(), 4);
    }

    #[test]
    fn parses_comments_and_overrides() {
        let text = "# table run\nbc = cc  # clamped\n\nh_over_l=0.05\nquadrature_points = 3\n";
        let c = AnalysisConfig::parse(text).unwrap();
        assert_eq!(c.bc, BoundaryCondition::ClampedClamped);
        assert_eq!(c.h_over_l, 0.05);
        assert_eq!(c.quadrature_points, Some(3));
        assert_eq!(c.degree, 3);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            AnalysisConfig::parse("degree 3"),
            Err(ConfigError::Syntax { line: 1 })
        ));
        assert!(matches!(
            AnalysisConfig::parse("colour = red"),
            Err(ConfigError::UnknownKey { .. })
        ));
        assert!(matches!(
            AnalysisConfig::parse("elements = many"),
            Err(ConfigError::BadValue { .. })
        ));
        assert!(matches!(
            AnalysisConfig::parse("elements = 0"),
            Err(ConfigError::Invalid(_))
        ));
        assert!(AnalysisConfig::parse("bc = fixed").is_err());
    }

    fn arb_config() -> impl Strategy<Value = AnalysisConfig> {
        (
            prop_oneof![
                Just(BoundaryCondition::PinnedPinned),
                Just(BoundaryCondition::ClampedClamped),
                Just(BoundaryCondition::ClampedFree),
                Just(BoundaryCondition::FreeFree)
            ],
            1e-4..0.5f64,
            1usize..8,
            1usize..200,
            prop_oneof![Just(Refinement::H), Just(Refinement::P), Just(Refinement::K)],
            proptest::option::of(1usize..=16),
            1usize..40,
            0.01..0.49f64,
            0.1..2.0f64,
        )
            .prop_map(|(bc, h, degree, elements, refinement, q, n, nu, kappa)| AnalysisConfig {
                bc,
                h_over_l: h,
                degree,
                elements,
                refinement,
                quadrature_points: q,
                n_modes: n,
                nu,
                kappa,
            })
    }

    proptest! {
        #[test]
        fn config_round_trip(cfg in arb_config()) {
            let back = AnalysisConfig::parse(&cfg.to_config_string()).unwrap();
            prop_assert_eq!(back, cfg);
        }
    }
}
