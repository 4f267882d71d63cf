//! Argument types shared by the subcommands.

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use nn_harmonic::io::read_profile;
use nn_harmonic::psido::SymbolSpec;
use nn_harmonic::spherical::KType;
use nn_harmonic::transforms::RadialProfile;
use nn_harmonic::{Complex64, Result};
use serde::{Serialize, Serializer};

const MAX_GRID_POINTS: usize = 10_000_000;

/// A sample grid written `start:step:stop`, a comma list, or a single value.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    spec: String,
    pub values: Vec<f64>,
}

fn parse_float(s: &str) -> std::result::Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("not a finite number: {s:?}"))
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let values = if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            let [start, step, stop] = parts[..] else {
                return Err(format!("grid must be start:step:stop, got {s:?}"));
            };
            let (start, step, stop) = (parse_float(start)?, parse_float(step)?, parse_float(stop)?);
            if step <= 0.0 {
                return Err(format!("grid step must be positive, got {step}"));
            }
            if stop < start {
                return Err(format!("grid is empty: stop {stop} < start {start}"));
            }
            // tolerate stop values that are off by rounding
            let m = ((stop - start) / step + 1e-9).floor();
            if m >= MAX_GRID_POINTS as f64 {
                return Err(format!("grid has more than {MAX_GRID_POINTS} points"));
            }
            (0..=m as usize).map(|i| start + i as f64 * step).collect()
        } else {
            s.split(',')
                .map(parse_float)
                .collect::<std::result::Result<Vec<_>, _>>()?
        };
        Ok(Grid {
            spec: s.to_string(),
            values,
        })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec)
    }
}

impl Serialize for Grid {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.spec)
    }
}

/// A symbol given by builtin name, inline JSON, or `@path` to a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SymbolArg(pub SymbolSpec);

impl FromStr for SymbolArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let text = if let Some(path) = s.strip_prefix('@') {
            fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))?
        } else if s.trim_start().starts_with('{') {
            s.to_string()
        } else {
            serde_json::json!({ "name": s }).to_string()
        };
        serde_json::from_str(&text)
            .map(SymbolArg)
            .map_err(|e| format!("bad symbol {s:?}: {e}"))
    }
}

/// Input profile: a CSV file or the default smooth bump.
#[derive(Debug, Clone, Args, Serialize)]
pub struct ProfileSource {
    /// CSV with columns t,re,im (a two-column t,value file is read as real)
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Support radius of the default bump exp(1 - 1/(1 - (t/T)^2))
    #[arg(long, default_value_t = 3.0)]
    pub support: f64,
    /// Sample spacing of the default bump
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
}

impl ProfileSource {
    pub fn load(&self, n: i64) -> Result<RadialProfile> {
        if let Some(path) = &self.input {
            return read_profile(path, n);
        }
        if !(self.support > 0.0 && self.step > 0.0 && self.step < self.support) {
            return Err(nn_harmonic::Error::domain("bump needs 0 < step < support"));
        }
        let m = (self.support / self.step).round() as usize;
        let grid: Vec<f64> = (0..=m).map(|i| i as f64 * self.step).collect();
        let support = self.support;
        RadialProfile::from_fn(KType::new(n), grid, |t| {
            let u = t / support;
            Complex64::new(
                if u < 1.0 {
                    (1.0 - 1.0 / (1.0 - u * u)).exp()
                } else {
                    0.0
                },
                0.0,
            )
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Auto,
    Hypergeometric,
    Integral,
    Ode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Continuous,
    Discrete,
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    All,
    Geometry,
    Special,
    Spherical,
    Plancherel,
    Hc,
    Transforms,
    Lorentz,
    Psido,
}
