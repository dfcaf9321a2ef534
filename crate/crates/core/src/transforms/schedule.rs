//! Severity schedules: the ordered parameter sweep each transformation
//! kind runs through, from least to most destructive.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::TransformError;

/// The eight transformation kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformKind {
    Amplitude,
    Clipping,
    Drop,
    Frame,
    HighPass,
    LowPass,
    Noise,
    Scale,
}

impl TransformKind {
    pub const ALL: [TransformKind; 8] = [
        TransformKind::Amplitude,
        TransformKind::Clipping,
        TransformKind::Drop,
        TransformKind::Frame,
        TransformKind::HighPass,
        TransformKind::LowPass,
        TransformKind::Noise,
        TransformKind::Scale,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TransformKind::Amplitude => "amplitude",
            TransformKind::Clipping => "clipping",
            TransformKind::Drop => "drop",
            TransformKind::Frame => "frame",
            TransformKind::HighPass => "highpass",
            TransformKind::LowPass => "lowpass",
            TransformKind::Noise => "noise",
            TransformKind::Scale => "scale",
        }
    }

    /// True for kinds whose output depends on the seed.
    pub fn is_stochastic(&self) -> bool {
        matches!(
            self,
            TransformKind::Drop | TransformKind::Frame | TransformKind::Noise
        )
    }

    /// Validate that `theta` is legal for this kind, independent of any
    /// particular clip. Cutoffs are additionally checked against Nyquist
    /// when a transformation is applied.
    pub fn validate_theta(&self, theta: f64) -> Result<(), TransformError> {
        let ok = match self {
            TransformKind::Amplitude => theta > 0.0 && theta.is_finite(),
            TransformKind::Clipping => theta > 0.0 && theta <= 1.0,
            TransformKind::Drop => (0.0..100.0).contains(&theta),
            TransformKind::Frame => theta >= 1.0 && theta.is_finite(),
            TransformKind::HighPass | TransformKind::LowPass => theta > 0.0 && theta.is_finite(),
            TransformKind::Noise => theta.is_finite(),
            TransformKind::Scale => theta > 0.0 && theta <= 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(TransformError::InvalidParameter(format!(
                "theta {theta} out of range for {self}"
            )))
        }
    }
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TransformKind {
    type Err = TransformError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "amplitude" | "amp" => Ok(TransformKind::Amplitude),
            "clipping" | "clip" => Ok(TransformKind::Clipping),
            "drop" => Ok(TransformKind::Drop),
            "frame" => Ok(TransformKind::Frame),
            "highpass" | "hp" => Ok(TransformKind::HighPass),
            "lowpass" | "lp" => Ok(TransformKind::LowPass),
            "noise" => Ok(TransformKind::Noise),
            "scale" => Ok(TransformKind::Scale),
            other => Err(TransformError::InvalidParameter(format!(
                "unknown transformation kind '{other}'"
            ))),
        }
    }
}

/// An ordered severity sweep for one transformation kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeveritySchedule {
    pub kind: TransformKind,
    pub thetas: Vec<f64>,
}

impl SeveritySchedule {
    pub fn new(kind: TransformKind, thetas: Vec<f64>) -> Result<Self, TransformError> {
        if thetas.is_empty() {
            return Err(TransformError::InvalidParameter(format!(
                "empty severity schedule for {kind}"
            )));
        }
        for &t in &thetas {
            kind.validate_theta(t)?;
        }
        Ok(Self { kind, thetas })
    }

    /// 1-based severity rank of a parameter within this sweep, if present.
    pub fn rank_of(&self, theta: f64) -> Option<u32> {
        self.thetas.iter().position(|&t| t == theta).map(|i| i as u32 + 1)
    }
}

/// The stock sweeps, least to most destructive, with the one extra
/// amplitude gain (2.0) appended after the attenuation ladder.
pub fn default_schedules() -> Vec<SeveritySchedule> {
    let rows: [(TransformKind, &[f64]); 8] = [
        (TransformKind::Amplitude, &[0.5, 0.4, 0.3, 0.2, 0.1, 2.0]),
        (TransformKind::Clipping, &[0.05, 0.04, 0.03, 0.02, 0.01]),
        (TransformKind::Drop, &[5.0, 10.0, 15.0, 20.0, 25.0]),
        (TransformKind::Frame, &[10.0, 20.0, 30.0, 40.0, 50.0]),
        (TransformKind::HighPass, &[500.0, 600.0, 700.0, 800.0, 900.0]),
        (TransformKind::LowPass, &[900.0, 800.0, 700.0, 600.0, 500.0]),
        (TransformKind::Noise, &[10.0, 8.0, 6.0, 4.0, 2.0]),
        (TransformKind::Scale, &[0.9, 0.8, 0.7, 0.6, 0.5]),
    ];
    rows.iter()
        .map(|(kind, thetas)| SeveritySchedule::new(*kind, thetas.to_vec()).unwrap())
        .collect()
}

/// Parse a schedule file: one kind per line, `kind theta theta ...`,
/// separators may be spaces, commas or a colon after the kind. Lines
/// starting with '#' and blank lines are ignored.
pub fn parse_schedules(text: &str) -> Result<Vec<SeveritySchedule>, TransformError> {
    let mut out: Vec<SeveritySchedule> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cleaned = line.replace([':', ','], " ");
        let mut parts = cleaned.split_whitespace();
        let kind: TransformKind = parts
            .next()
            .expect("non-empty line has a first token")
            .parse()
            .map_err(|e| TransformError::InvalidParameter(format!("line {}: {e}", lineno + 1)))?;
        let thetas = parts
            .map(|p| {
                p.parse::<f64>().map_err(|_| {
                    TransformError::InvalidParameter(format!(
                        "line {}: '{p}' is not a number",
                        lineno + 1
                    ))
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if out.iter().any(|s| s.kind == kind) {
            return Err(TransformError::InvalidParameter(format!(
                "line {}: duplicate schedule for {kind}",
                lineno + 1
            )));
        }
        out.push(SeveritySchedule::new(kind, thetas)?);
    }
    if out.is_empty() {
        return Err(TransformError::InvalidParameter(
            "schedule file defines no sweeps".into(),
        ));
    }
    Ok(out)
}

/// Load schedules from a file, or the defaults when `path` is `None`.
pub fn load_schedules(path: Option<&Path>) -> Result<Vec<SeveritySchedule>, TransformError> {
    match path {
        None => Ok(default_schedules()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| {
                TransformError::InvalidParameter(format!("cannot read {}: {e}", p.display()))
            })?;
            parse_schedules(&text)
        }
    }
}
