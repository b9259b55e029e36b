//! Run configuration: `key = value` files overlaid by command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde_json::{json, Value};
use sleeve_core::geometry::{
    ArchimedeanSpiral, Bezier, CircleArc, CurveRef, HalfEllipse, Segment, SpaceKnot,
};
use sleeve_core::oracle::{
    case_by_name, default_start, knot_scale, GradientMode, Profile, SleeveOracle, CASE_NAMES,
};
use sleeve_core::point::Point;

pub const DEFAULT_OUTPUT_DIR: &str = "sleeve-out";
pub const DEFAULT_EVAL_POINTS: usize = 100_000;
pub const DEFAULT_SIGMA: f64 = 1e-4;
pub const OUT_ENV: &str = "SLEEVE_OUT";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}:{line}: expected `key = value`, got {text:?}")]
    Syntax { path: String, line: usize, text: String },
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("invalid value {value:?} for {key}: {reason}")]
    BadValue { key: String, value: String, reason: String },
    #[error("unknown case {0:?} (expected one of {cases})", cases = CASE_NAMES.join(", "))]
    UnknownCase(String),
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl ConfigError {
    fn invalid(msg: impl Into<String>) -> Self {
        Self::Invalid(msg.into())
    }
}

/// One layer of settings; unset fields fall through to the layer below.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigLayer {
    pub case: Option<String>,
    pub curve: Option<String>,
    pub profile: Option<String>,
    pub rho: Option<f64>,
    pub target_error: Option<f64>,
    pub epsilon: Option<f64>,
    pub sigma: Option<f64>,
    pub tau: Option<f64>,
    pub gradient_mode: Option<String>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub force: Option<bool>,
    pub eval_points: Option<usize>,
    pub x0: Option<Vec<f64>>,
    pub endpoint_tol: Option<f64>,
    pub max_steps: Option<usize>,
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::BadValue {
        key: key.into(),
        value: value.into(),
        reason: e.to_string(),
    })
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    value
        .split(',')
        .map(|s| parse::<f64>(key, s.trim()))
        .collect()
}

impl ConfigLayer {
    /// Sets one key. Accepts `E` and `target_error`, dashes or underscores.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let (key, value) = (key.trim(), value.trim().trim_matches('"'));
        let norm = key.replace('-', "_");
        match norm.as_str() {
            "case" => self.case = Some(value.into()),
            "curve" => self.curve = Some(value.into()),
            "profile" => self.profile = Some(value.into()),
            "rho" => self.rho = Some(parse(key, value)?),
            "E" | "e" | "target_error" => self.target_error = Some(parse(key, value)?),
            "epsilon" | "eps" => self.epsilon = Some(parse(key, value)?),
            "sigma" => self.sigma = Some(parse(key, value)?),
            "tau" => self.tau = Some(parse(key, value)?),
            "gradient_mode" | "gradient" => self.gradient_mode = Some(value.into()),
            "seed" => self.seed = Some(parse(key, value)?),
            "output_dir" | "out" => self.output_dir = Some(value.into()),
            "force" => self.force = Some(parse(key, value)?),
            "eval_points" => self.eval_points = Some(parse(key, value)?),
            "x0" => self.x0 = Some(parse_list(key, value)?),
            "endpoint_tol" => self.endpoint_tol = Some(parse(key, value)?),
            "max_steps" => self.max_steps = Some(parse(key, value)?),
            _ => return Err(ConfigError::UnknownKey(key.into())),
        }
        Ok(())
    }

    pub fn parse_str(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let mut layer = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                path: origin.into(),
                line: i + 1,
                text: raw.into(),
            })?;
            layer.set(k, v)?;
        }
        Ok(layer)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse_str(&text, &path.display().to_string())
    }

    /// `other` wins wherever it is set.
    pub fn overlay(mut self, other: &ConfigLayer) -> Self {
        macro_rules! take {
            ($($f:ident),*) => {$( if other.$f.is_some() { self.$f = other.$f.clone(); } )*};
        }
        take!(
            case, curve, profile, rho, target_error, epsilon, sigma, tau, gradient_mode, seed,
            output_dir, force, eval_points, x0, endpoint_tol, max_steps
        );
        self
    }
}

/// A fully resolved, validated run configuration.
#[derive(Clone)]
pub struct RunConfig {
    /// Catalog name, or the custom curve description.
    pub name: String,
    pub curve: CurveRef,
    pub profile: Profile,
    pub rho: f64,
    pub target_error: f64,
    pub epsilon: f64,
    pub sigma: f64,
    pub gradient_mode: GradientMode,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub force: bool,
    pub eval_points: usize,
    pub x0: Point,
    pub endpoint_tol: Option<f64>,
    pub max_steps: Option<usize>,
}

impl fmt::Debug for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

/// Parses `name:p1,p2,…` into one of the built-in curve families.
pub fn parse_curve(desc: &str) -> Result<CurveRef, ConfigError> {
    let (name, args) = desc.split_once(':').unwrap_or((desc, ""));
    let bad = |reason: &str| ConfigError::BadValue {
        key: "curve".into(),
        value: desc.into(),
        reason: reason.into(),
    };
    let nums = |s: &str| -> Result<Vec<f64>, ConfigError> {
        if s.trim().is_empty() {
            Ok(Vec::new())
        } else {
            parse_list("curve", s)
        }
    };
    let curve: CurveRef = match name.trim() {
        "segment" => {
            let p = nums(args)?;
            if p.len() < 4 || p.len() % 2 != 0 {
                return Err(bad("segment needs start and end coordinates"));
            }
            let (a, b) = p.split_at(p.len() / 2);
            Arc::new(Segment::new(a.to_vec(), b.to_vec()))
        }
        "circle-arc" => match nums(args)?[..] {
            [r, t0, t1] if r > 0.0 && t1 > t0 => Arc::new(CircleArc::new(r, t0, t1)),
            _ => return Err(bad("circle-arc needs radius, θ0 < θ1")),
        },
        "half-ellipse" => match nums(args)?[..] {
            [a, b] if a > 0.0 && b > 0.0 => Arc::new(HalfEllipse { a, b }),
            _ => return Err(bad("half-ellipse needs positive semi-axes a, b")),
        },
        "spiral" => match nums(args)?[..] {
            [] => Arc::new(ArchimedeanSpiral::catalog()),
            [r0, r1, omega] => Arc::new(ArchimedeanSpiral { r0, r1, omega }),
            _ => return Err(bad("spiral takes r0, r1, omega")),
        },
        "knot" => match nums(args)?[..] {
            [] => Arc::new(SpaceKnot { scale: knot_scale() }),
            [scale] if scale > 0.0 => Arc::new(SpaceKnot { scale }),
            _ => return Err(bad("knot takes one positive scale")),
        },
        "bezier" => {
            let pts = args
                .split(';')
                .map(|p| parse_list("curve", p))
                .collect::<Result<Vec<_>, _>>()?;
            let d = pts.first().map_or(0, |p| p.len());
            if pts.len() < 2 || d < 2 || pts.iter().any(|p| p.len() != d) {
                return Err(bad("bezier needs at least two control points `x,y;x,y;…`"));
            }
            Arc::new(Bezier::new(pts))
        }
        _ => {
            return Err(bad(
                "expected segment, circle-arc, half-ellipse, spiral, knot or bezier",
            ))
        }
    };
    Ok(curve)
}

fn positive(name: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::invalid(format!("{name} = {v} must be positive")))
    }
}

impl ConfigLayer {
    /// Resolves against the catalog (default case `spiral`) and checks parameter domains.
    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        if self.case.is_some() && self.curve.is_some() {
            return Err(ConfigError::invalid("set either `case` or `curve`, not both"));
        }
        let (name, curve, mut profile, rho, target_error, mut sigma, mut mode, x0) =
            match &self.curve {
                Some(desc) => {
                    let curve = parse_curve(desc)?;
                    let rho = self
                        .rho
                        .ok_or_else(|| ConfigError::invalid("a custom curve needs `rho`"))?;
                    let e = self.target_error.ok_or_else(|| {
                        ConfigError::invalid("a custom curve needs a target error `E`")
                    })?;
                    (desc.clone(), curve, Profile::identity(), rho, e, DEFAULT_SIGMA, GradientMode::Exact, None)
                }
                None => {
                    let name = self.case.as_deref().unwrap_or("spiral");
                    let c = case_by_name(name).ok_or_else(|| ConfigError::UnknownCase(name.into()))?;
                    let rho = self.rho.unwrap_or(c.rho);
                    // The catalog start point sits ρ/2 off the curve; keep it only for the
                    // catalog ρ.
                    let x0 = (rho == c.rho).then_some(c.x0.clone());
                    let e = self.target_error.unwrap_or(c.target_error);
                    (c.name.to_string(), c.curve, c.profile, rho, e, c.sigma, c.gradient_mode, x0)
                }
            };
        let rho = positive("rho", rho)?;
        let target_error = positive("E", target_error)?;
        if target_error >= rho {
            return Err(ConfigError::invalid(format!("E = {target_error} must be below ρ = {rho}")));
        }
        if let Some(p) = &self.profile {
            profile = Profile::by_name(p).ok_or_else(|| ConfigError::BadValue {
                key: "profile".into(),
                value: p.clone(),
                reason: "expected identity, sine, tangent or square".into(),
            })?;
        }
        if let Some(s) = self.sigma {
            sigma = s;
        }
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(ConfigError::invalid(format!("σ = {sigma} must lie in (0, 1)")));
        }
        let epsilon = self.epsilon.unwrap_or(0.0);
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(ConfigError::invalid(format!("ε = {epsilon} must be ≥ 0")));
        }
        if epsilon >= target_error {
            return Err(ConfigError::invalid(format!(
                "ε = {epsilon} must be below E = {target_error}"
            )));
        }
        match (self.gradient_mode.as_deref(), self.tau) {
            (Some("exact"), Some(_)) => {
                return Err(ConfigError::invalid("`tau` requires the symmetric-difference gradient"))
            }
            (Some("exact"), None) => mode = GradientMode::Exact,
            (Some("fd" | "symmetric-difference"), tau) => {
                let tau = match (tau, mode) {
                    (Some(t), _) => t,
                    (None, GradientMode::SymmetricDifference { tau }) => tau,
                    (None, GradientMode::Exact) => 1e-8,
                };
                mode = GradientMode::SymmetricDifference { tau: positive("tau", tau)? };
            }
            (None, Some(tau)) => mode = GradientMode::SymmetricDifference { tau: positive("tau", tau)? },
            (None, None) => {}
            (Some(other), _) => {
                return Err(ConfigError::BadValue {
                    key: "gradient_mode".into(),
                    value: other.into(),
                    reason: "expected exact or fd".into(),
                })
            }
        }
        let x0 = match (&self.x0, x0) {
            (Some(p), _) => {
                if p.len() != curve.dim() {
                    return Err(ConfigError::invalid(format!(
                        "x0 has {} coordinates, the curve lives in dimension {}",
                        p.len(),
                        curve.dim()
                    )));
                }
                p.clone()
            }
            (None, Some(p)) => p,
            (None, None) => default_start(curve.as_ref(), rho),
        };
        let eval_points = self.eval_points.unwrap_or(DEFAULT_EVAL_POINTS);
        if let Some(t) = self.endpoint_tol {
            positive("endpoint_tol", t)?;
        }
        let output_dir = std::env::var_os(OUT_ENV)
            .map(PathBuf::from)
            .or_else(|| self.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
        Ok(RunConfig {
            name,
            curve,
            profile,
            rho,
            target_error,
            epsilon,
            sigma,
            gradient_mode: mode,
            seed: self.seed.unwrap_or(0),
            output_dir,
            force: self.force.unwrap_or(false),
            eval_points,
            x0,
            endpoint_tol: self.endpoint_tol,
            max_steps: self.max_steps,
        })
    }
}

impl RunConfig {
    pub fn oracle(&self) -> SleeveOracle {
        SleeveOracle::new(self.curve.clone(), self.profile.clone(), self.rho)
            .with_gradient_mode(self.gradient_mode)
            .with_projection_noise(self.epsilon, self.seed)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "case": self.name,
            "profile": self.profile.name,
            "dim": self.curve.dim(),
            "rho": self.rho,
            "E": self.target_error,
            "epsilon": self.epsilon,
            "sigma": self.sigma,
            "gradient_mode": self.gradient_mode,
            "seed": self.seed,
            "force": self.force,
            "eval_points": self.eval_points,
            "x0": self.x0,
            "endpoint_tol": self.endpoint_tol,
            "max_steps": self.max_steps,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_syntax_and_overlay() {
        let file = ConfigLayer::parse_str(
            "# comment\ncase = knot3d\nE = 0.02\nsigma=1e-3  # trailing\n\nx0 = 0.1, 0.2, 0.0\n",
            "test",
        )
        .unwrap();
        assert_eq!(file.case.as_deref(), Some("knot3d"));
        assert_eq!(file.x0, Some(vec![0.1, 0.2, 0.0]));
        let flags = ConfigLayer { target_error: Some(0.03), ..Default::default() };
        let merged = file.overlay(&flags);
        assert_eq!(merged.target_error, Some(0.03));
        assert_eq!(merged.sigma, Some(1e-3));
        assert!(matches!(
            ConfigLayer::parse_str("rho 1", "t"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            ConfigLayer::parse_str("colour = red", "t"),
            Err(ConfigError::UnknownKey(_))
        ));
    }

    #[test]
    fn catalog_defaults_and_domain_checks() {
        let c = ConfigLayer { case: Some("half-ellipse".into()), ..Default::default() }
            .resolve()
            .unwrap();
        assert_eq!(c.gradient_mode, GradientMode::SymmetricDifference { tau: 1e-8 });
        assert_eq!((c.rho, c.sigma), (0.125, 1e-4));
        let bad = |l: ConfigLayer| l.resolve().unwrap_err();
        assert!(matches!(bad(ConfigLayer { case: Some("torus".into()), ..Default::default() }), ConfigError::UnknownCase(_)));
        bad(ConfigLayer { epsilon: Some(0.5), ..Default::default() });
        bad(ConfigLayer { sigma: Some(2.0), ..Default::default() });
        bad(ConfigLayer { rho: Some(-1.0), ..Default::default() });
        bad(ConfigLayer { gradient_mode: Some("exact".into()), tau: Some(1e-6), ..Default::default() });
        bad(ConfigLayer { curve: Some("segment:0,0,1,0".into()), ..Default::default() });
    }

    #[test]
    fn custom_curves() {
        for desc in [
            "segment:-0.4,0,0.4,0",
            "circle-arc:0.3,0,3",
            "half-ellipse:0.5,0.25",
            "spiral",
            "knot",
            "bezier:-0.3,0;0,0.3;0.3,0",
        ] {
            parse_curve(desc).unwrap();
        }
        assert!(parse_curve("torus:1").is_err());
        assert!(parse_curve("segment:0,0,1").is_err());
        let c = ConfigLayer {
            curve: Some("circle-arc:0.3,0,3".into()),
            rho: Some(0.3),
            target_error: Some(1e-2),
            gradient_mode: Some("fd".into()),
            ..Default::default()
        }
        .resolve()
        .unwrap();
        assert_eq!(c.gradient_mode, GradientMode::SymmetricDifference { tau: 1e-8 });
        assert_eq!(c.x0.len(), 2);
    }
}
