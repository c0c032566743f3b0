//! The run configuration: everything that determines an output payload.
//! It is serialized into every output header, and `--config` reads it back
//! either from a JSON file or from the header of an earlier output.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use siegel_core::rotation::CFExpansion;
use siegel_core::{Error, Result, C64};

/// Environment variable supplying the default precision.
pub const PRECISION_ENV: &str = "SIEGEL_PRECISION";
/// Prefix of the header line carrying the configuration.
pub const CONFIG_PREFIX: &str = "# config: ";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Mantissa bits of the extended-precision scalar.
    pub precision: u32,
    /// CSV when omitted from a hand-written file.
    #[serde(default)]
    pub format: Format,
    pub command: Command,
}

impl RunConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.precision < siegel_core::numerics::MIN_PRECISION {
            return Err(Error::Precondition(format!(
                "precision must be at least {} bits, got {}",
                siegel_core::numerics::MIN_PRECISION,
                self.precision
            )));
        }
        Ok(())
    }

    /// Reads a configuration from a JSON file, or from the `# config:` line
    /// of a file written by an earlier run.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let text = String::from_utf8_lossy(&text);
        let json = if text.trim_start().starts_with('{') && !text.contains(CONFIG_PREFIX) {
            text.to_string()
        } else {
            text.lines()
                .find_map(|l| l.strip_prefix(CONFIG_PREFIX))
                .map(str::to_string)
                .ok_or_else(|| Error::Parse(format!("{}: no JSON and no '{CONFIG_PREFIX}' header", path.display())))?
        };
        // JSON output embeds the configuration under "config".
        let value: serde_json::Value =
            serde_json::from_str(&json).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let value = match value.get("config") {
            Some(inner) if value.get("rows").is_some() => inner.clone(),
            _ => value,
        };
        serde_json::from_value(value).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Convergents p_n/q_n with the approximation quality q_n²|θ − p_n/q_n|.
    Convergents(ConvergentsArgs),
    /// Partial Brjuno sums with tail bounds.
    Brjuno(BrjunoArgs),
    /// (1/q_n) log|b_n(a)| against −log r_hat(a) along the convergents.
    BnScaling(BnScalingArgs),
    /// Conformal radius of the Siegel disk at orders K/4, K/2, K.
    Radius(RadiusArgs),
    /// Escape / capture(k) / undecided classification of a parameter grid.
    Classify(GridArgs),
    /// Lyapunov exponent over a parameter grid.
    LyapunovMap(GridArgs),
    /// Discrete Laplacian of the Lyapunov field (slice bifurcation current).
    CurrentDensity(GridArgs),
    /// Fixed points of f_n^q near the origin by the argument principle.
    FixedPoints(FixedPointArgs),
    /// Variation of arg δ along a closed parameter path, per stage.
    Winding(WindingArgs),
    /// Empirical constant of the rotation drift bound per stage.
    Jellouli(JellouliArgs),
    /// Radius and capture depth along noble truncations of θ.
    NobleRadius(NobleArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Convergents(_) => "convergents",
            Command::Brjuno(_) => "brjuno",
            Command::BnScaling(_) => "bn-scaling",
            Command::Radius(_) => "radius",
            Command::Classify(_) => "classify",
            Command::LyapunovMap(_) => "lyapunov-map",
            Command::CurrentDensity(_) => "current-density",
            Command::FixedPoints(_) => "fixed-points",
            Command::Winding(_) => "winding",
            Command::Jellouli(_) => "jellouli",
            Command::NobleRadius(_) => "noble-radius",
        }
    }

    /// The library module doing the work, for error messages.
    pub fn module(&self) -> &'static str {
        match self {
            Command::Convergents(_) | Command::Brjuno(_) => "rotation",
            Command::Radius(_) => "siegel",
            Command::FixedPoints(_) | Command::Winding(_) | Command::Jellouli(_) => "parabolic",
            _ => "bifurc",
        }
    }
}

/// Continued fraction in `[a0;a1,...]` form, serialized as that string.
#[derive(Clone, Debug, PartialEq)]
pub struct Cf(pub CFExpansion);

impl FromStr for Cf {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.parse().map(Cf)
    }
}

impl fmt::Display for Cf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Serialize for Cf {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Cf {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(de::Error::custom)
    }
}

/// Complex parameter. Accepts `x`, `yi`, `x+yi`, `x-yi`, `i`, `-i` or
/// `x,y`; serialized as `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cx(pub C64);

impl FromStr for Cx {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_complex(s).map(Cx)
    }
}

impl fmt::Display for Cx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Cx {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        (self.0.re, self.0.im).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Cx {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Pair(f64, f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Pair(re, im) => Ok(Cx(C64::new(re, im))),
            Repr::Text(t) => t.parse().map_err(de::Error::custom),
        }
    }
}

pub fn parse_complex(s: &str) -> Result<C64> {
    let bad = || Error::Parse(format!("cannot parse complex number {s:?}"));
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let num = |x: &str| -> Result<f64> {
        match x {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => x.parse::<f64>().map_err(|_| bad()),
        }
    };
    let real = |x: &str| x.parse::<f64>().map_err(|_| bad());
    let z = if let Some((re, im)) = t.split_once(',') {
        C64::new(real(re)?, real(im)?)
    } else if let Some(body) = t.strip_suffix('i') {
        // Split at the last sign that is not a leading sign or an exponent sign.
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&j| (bytes[j] == b'+' || bytes[j] == b'-') && !matches!(bytes[j - 1], b'e' | b'E'));
        match split {
            Some(j) => C64::new(real(&body[..j])?, num(&body[j..])?),
            None => C64::new(0.0, num(body)?),
        }
    } else {
        C64::new(real(&t)?, 0.0)
    };
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(bad())
    }
}

/// Every argument struct has defaults for all fields, so configuration files
/// may omit any of them.
macro_rules! defaults_from_clap {
    ($($t:ty),*) => {$(
        impl Default for $t {
            fn default() -> Self {
                <$t as Parser>::parse_from(["siegel"])
            }
        }
    )*};
}

defaults_from_clap!(
    ConvergentsArgs,
    BrjunoArgs,
    BnScalingArgs,
    RadiusArgs,
    GridArgs,
    FixedPointArgs,
    WindingArgs,
    JellouliArgs,
    NobleArgs
);

const GOLDEN: &str = "[0;1,1,...]";

#[derive(Clone, Debug, PartialEq, Parser, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergentsArgs {
    #[arg(long, default_value = GOLDEN)]
    pub cf: Cf,
    /// Largest convergent index.
    #[arg(long, default_value_t = 10)]
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Parser, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BrjunoArgs {
    #[arg(long, default_value = GOLDEN)]
    pub cf: Cf,
    #[arg(long, default_value_t = 20)]
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Parser, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BnScalingArgs {
    #[arg(long, default_value = GOLDEN)]
    pub cf: Cf,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub a: Cx,
    #[arg(long, default_value_t = 0)]
    pub nmin: usize,
    #[arg(long, default_value_t = 15)]
    pub nmax: usize,
    /// Series order for r_hat.
    #[arg(long, default_value_t = 2048)]
    pub radius_order: usize,
    /// Precision ceiling for a single stage.
    #[arg(long, default_value_t = 2048)]
    pub max_bits: u32,
    /// Degeneracy gate threshold relative to the local median of |b_n|.
    #[arg(long, default_value_t = 0.05)]
    pub threshold: f64,
    /// Smallest q_n the final computed stage must reach for the check to pass.
    #[arg(long, default_value_t = 0)]
    pub min_final_q: i64,
}

#[derive(Clone, Debug, PartialEq, Parser, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadiusArgs {
    #[arg(long, default_value = GOLDEN)]
    pub cf: Cf,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub a: Cx,
    #[arg(long, default_value_t = 1024)]
    pub order: usize,
}

#[derive(Clone, Debug, PartialEq, Parser, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridArgs {
    #[arg(long, default_value = GOLDEN)]
    pub cf: Cf,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub center: Cx,
    #[arg(long, default_value_t = 2.0)]
    pub half_width: f64,
    /// Cells per axis.
    #[arg(long, default_value_t = 64)]
    pub resolution: usize,
    #[arg(long, default_value_t = 1000)]
    pub escape_budget: usize,
    #[arg(long, default_value_t = 200)]
    pub capture_budget: usize,
    #[arg(long, default_value_t = 0.9)]
    pub safety: f64,
    #[arg(long, default_value_t = 256)]
    pub series_order: usize,
    /// Absolute accuracy of Green and Lyapunov values.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq, Parser, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixedPointArgs {
    #[arg(long, default_value = GOLDEN)]
    pub cf: Cf,
    #[arg(long, default_value = "0.3+0.1i", allow_hyphen_values = true)]
    pub a: Cx,
    #[arg(long, default_value_t = 5)]
    pub nmin: usize,
    #[arg(long, default_value_t = 8)]
    pub nmax: usize,
    /// Contour |w| = r1 · r_hat in the linearizing coordinate.
    #[arg(long, default_value_t = 0.5)]
    pub r1: f64,
    /// Initial contour samples (doubled until the count is stable).
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
    #[arg(long, default_value_t = 256)]
    pub order: usize,
}

#[derive(Clone, Debug, PartialEq, Parser, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindingArgs {
    #[arg(long, default_value = GOLDEN)]
    pub cf: Cf,
    /// Centre of the circular parameter path; the default is captured at
    /// depth 1 for the golden mean, with |w| about half the disk radius.
    #[arg(long, default_value = "-0.625+1.864i", allow_hyphen_values = true)]
    pub a: Cx,
    #[arg(long, default_value_t = 0.01)]
    pub path_radius: f64,
    /// Points on the path (before adaptive refinement).
    #[arg(long, default_value_t = 64)]
    pub points: usize,
    #[arg(long, default_value_t = 7)]
    pub nmin: usize,
    #[arg(long, default_value_t = 10)]
    pub nmax: usize,
    /// Capture depth of the path parameters.
    #[arg(long, default_value_t = 1)]
    pub depth: usize,
    #[arg(long, default_value_t = 256)]
    pub series_order: usize,
    #[arg(long, default_value_t = 200)]
    pub capture_budget: usize,
    #[arg(long, default_value_t = 0.9)]
    pub safety: f64,
    /// Smallest parameter step of branch tracking.
    #[arg(long, default_value_t = 1e-12)]
    pub min_step: f64,
}

#[derive(Clone, Debug, PartialEq, Parser, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JellouliArgs {
    #[arg(long, default_value = GOLDEN)]
    pub cf: Cf,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub a: Cx,
    #[arg(long, default_value_t = 4)]
    pub nmin: usize,
    #[arg(long, default_value_t = 8)]
    pub nmax: usize,
    /// Samples lie on |z| = r0 · r_hat.
    #[arg(long, default_value_t = 0.5)]
    pub r0: f64,
    #[arg(long, default_value_t = 16)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 256)]
    pub order: usize,
}

#[derive(Clone, Debug, PartialEq, Parser, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NobleArgs {
    #[arg(long, default_value = "[0;2,2,2,2,2,2,2,2,2,2,2,2,2,2,2,2,2,2,2,2,2,2,2,2]")]
    pub cf: Cf,
    /// A parameter captured at θ (the default is captured at depth 1 for
    /// the default expansion).
    #[arg(long, default_value = "0.633+1.928i", allow_hyphen_values = true)]
    pub a: Cx,
    #[arg(long, default_value_t = 1)]
    pub nmin: usize,
    #[arg(long, default_value_t = 12)]
    pub nmax: usize,
    #[arg(long, default_value_t = 1024)]
    pub order: usize,
    #[arg(long, default_value_t = 200)]
    pub capture_budget: usize,
    #[arg(long, default_value_t = 0.9)]
    pub safety: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        let cases = [
            ("0", C64::new(0.0, 0.0)),
            ("i", C64::new(0.0, 1.0)),
            ("-i", C64::new(0.0, -1.0)),
            ("0.3+0.1i", C64::new(0.3, 0.1)),
            ("0.3 - 0.1i", C64::new(0.3, -0.1)),
            ("-2.5i", C64::new(0.0, -2.5)),
            ("1e-3+2E-3i", C64::new(1e-3, 2e-3)),
            ("-1e-3-i", C64::new(-1e-3, -1.0)),
            ("1.5,-2", C64::new(1.5, -2.0)),
            ("-4", C64::new(-4.0, 0.0)),
        ];
        for (s, z) in cases {
            assert_eq!(parse_complex(s).unwrap(), z, "{s}");
        }
        for s in ["", "x", "1+", "1+2j", "nan", "1,", "i1"] {
            assert!(parse_complex(s).is_err(), "{s}");
        }
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = RunConfig {
            precision: 256,
            format: Format::Csv,
            command: Command::BnScaling(BnScalingArgs { a: Cx(C64::new(0.0, 1.0)), ..Default::default() }),
        };
        let back: RunConfig = serde_json::from_str(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
        assert!(cfg.to_json().contains(r#""cf":"[0;1,1,...]""#), "{}", cfg.to_json());
    }

    #[test]
    fn partial_config_takes_defaults() {
        let cfg: RunConfig =
            serde_json::from_str(r#"{"precision":192,"format":"csv","command":{"radius":{"a":"0.3+0.1i"}}}"#).unwrap();
        let Command::Radius(r) = cfg.command else { panic!() };
        assert_eq!(r.a, Cx(C64::new(0.3, 0.1)));
        assert_eq!(r.order, 1024);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let r: std::result::Result<RunConfig, _> =
            serde_json::from_str(r#"{"precision":192,"format":"csv","command":{"radius":{"nope":1}}}"#);
        assert!(r.is_err());
    }
}
