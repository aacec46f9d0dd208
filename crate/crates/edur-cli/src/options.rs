//! Parsed value types for the CLI flags.

use edur::{AxisObservable, CorrectionTarget};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?} (expected csv or json)")),
        }
    }
}

/// Counting mode for simulated intensities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CountsOpt {
    Exact,
    Poisson { mean_counts: f64 },
}

pub const DEFAULT_MEAN_COUNTS: f64 = 1e4;

impl std::str::FromStr for CountsOpt {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "exact" {
            return Ok(CountsOpt::Exact);
        }
        if s == "poisson" {
            return Ok(CountsOpt::Poisson {
                mean_counts: DEFAULT_MEAN_COUNTS,
            });
        }
        if let Some(rest) = s.strip_prefix("poisson:") {
            let mean: f64 = rest
                .parse()
                .map_err(|e| format!("counts mean {rest:?}: {e}"))?;
            if !mean.is_finite() || mean <= 0.0 {
                return Err(format!("counts mean must be positive, got {mean}"));
            }
            return Ok(CountsOpt::Poisson { mean_counts: mean });
        }
        Err(format!(
            "unknown counts mode {s:?} (expected exact, poisson, or poisson:MEAN)"
        ))
    }
}

/// Which correction branch(es) to apply after the first measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CorrectionOpt {
    Both,
    Optimal,
    AntiOptimal,
    None,
    Explicit { vartheta: f64, phi: f64 },
}

impl CorrectionOpt {
    /// Parse, converting explicit angles from degrees when asked.
    pub fn parse(s: &str, degrees: bool) -> Result<Self, String> {
        match s {
            "both" => return Ok(CorrectionOpt::Both),
            "optimal" => return Ok(CorrectionOpt::Optimal),
            "anti-optimal" => return Ok(CorrectionOpt::AntiOptimal),
            "none" => return Ok(CorrectionOpt::None),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("explicit:") {
            let (vt, ph) = rest
                .split_once(',')
                .ok_or_else(|| format!("explicit correction needs VARTHETA,PHI, got {rest:?}"))?;
            let vartheta: f64 = vt
                .trim()
                .parse()
                .map_err(|e| format!("correction vartheta {vt:?}: {e}"))?;
            let phi: f64 = ph
                .trim()
                .parse()
                .map_err(|e| format!("correction phi {ph:?}: {e}"))?;
            return Ok(CorrectionOpt::Explicit {
                vartheta: to_radians(vartheta, degrees),
                phi: to_radians(phi, degrees),
            });
        }
        Err(format!(
            "unknown correction {s:?} (expected both, optimal, anti-optimal, none, or explicit:VARTHETA,PHI)"
        ))
    }

    /// The labeled targets this option expands to for a given setting.
    pub fn targets(
        &self,
        oa: &AxisObservable,
        b: &AxisObservable,
    ) -> Result<Vec<(&'static str, CorrectionTarget)>, String> {
        Ok(match self {
            CorrectionOpt::Both => vec![
                ("optimal", CorrectionTarget::optimal_for(b)),
                ("anti-optimal", CorrectionTarget::anti_optimal_for(b)),
            ],
            CorrectionOpt::Optimal => vec![("optimal", CorrectionTarget::optimal_for(b))],
            CorrectionOpt::AntiOptimal => {
                vec![("anti-optimal", CorrectionTarget::anti_optimal_for(b))]
            }
            CorrectionOpt::None => vec![("none", CorrectionTarget::identity_for(oa))],
            CorrectionOpt::Explicit { vartheta, phi } => vec![(
                "explicit",
                CorrectionTarget::new(*vartheta, *phi).map_err(|e| e.to_string())?,
            )],
        })
    }
}

/// Convert a user-supplied angle at the boundary; files stay in radians.
pub fn to_radians(value: f64, degrees: bool) -> f64 {
    if degrees {
        value.to_radians()
    } else {
        value
    }
}
