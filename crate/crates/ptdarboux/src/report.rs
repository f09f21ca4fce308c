//! Report documents: named checks with tolerances and verdicts, labeled
//! spectra, sampled functions, and deterministic JSON/CSV serialization.

use crate::config::RunConfig;
use crate::spectral::SpectralReport;
use num_complex::Complex64;
use serde::Serialize;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("could not write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Info,
}

/// One named measurement with its tolerance and verdict.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

impl Check {
    /// Pass iff value <= tolerance.
    pub fn bounded(name: impl Into<String>, value: f64, tolerance: f64) -> Check {
        Check {
            name: name.into(),
            value,
            tolerance,
            verdict: if value <= tolerance {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
        }
    }

    /// Pass iff value >= floor (e.g. deleted-level separations, slopes).
    pub fn at_least(name: impl Into<String>, value: f64, floor: f64) -> Check {
        Check {
            name: name.into(),
            value,
            tolerance: floor,
            verdict: if value >= floor {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
        }
    }

    /// Recorded for the reader without affecting the overall verdict.
    pub fn info(name: impl Into<String>, value: f64, tolerance: f64) -> Check {
        Check {
            name: name.into(),
            value,
            tolerance,
            verdict: Verdict::Info,
        }
    }
}

/// A spectral comparison attached to a named potential.
#[derive(Debug, Clone, Serialize)]
pub struct LabeledSpectrum {
    pub label: String,
    pub report: SpectralReport,
}

/// A sampled complex function, one row per grid point.
#[derive(Debug, Clone, Serialize)]
pub struct FunctionSamples {
    pub name: String,
    pub xs: Vec<f64>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl FunctionSamples {
    pub fn from_values(name: impl Into<String>, xs: &[f64], values: &[Complex64]) -> Self {
        FunctionSamples {
            name: name.into(),
            xs: xs.to_vec(),
            re: values.iter().map(|z| z.re).collect(),
            im: values.iter().map(|z| z.im).collect(),
        }
    }

    /// CSV with columns x, Re(f), Im(f).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,re,im\n");
        for i in 0..self.xs.len() {
            out.push_str(&format!(
                "{:.17e},{:.17e},{:.17e}\n",
                self.xs[i], self.re[i], self.im[i]
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub tool: &'static str,
    pub command: String,
    pub model: String,
    pub grid_half_width: f64,
    pub grid_points: usize,
    pub config: RunConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub metadata: RunMetadata,
    pub checks: Vec<Check>,
    pub spectra: Vec<LabeledSpectrum>,
    pub samples: Vec<FunctionSamples>,
}

impl ReportDocument {
    pub fn new(command: &str, model: String, grid: (f64, usize), config: RunConfig) -> Self {
        ReportDocument {
            schema_version: SCHEMA_VERSION,
            metadata: RunMetadata {
                tool: "ptdarboux",
                command: command.to_string(),
                model,
                grid_half_width: grid.0,
                grid_points: grid.1,
                config,
            },
            checks: Vec::new(),
            spectra: Vec::new(),
            samples: Vec::new(),
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict != Verdict::Fail)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| c.verdict == Verdict::Fail)
    }

    pub fn to_json(&self) -> Result<String, ReportError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Human-readable one-line-per-check summary.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let tag = match c.verdict {
                Verdict::Pass => "pass",
                Verdict::Fail => "FAIL",
                Verdict::Info => "info",
            };
            out.push_str(&format!(
                "[{tag}] {:<44} value {:>12.4e}  tol {:>9.1e}\n",
                c.name, c.value, c.tolerance
            ));
        }
        out
    }

    /// Write the document: JSON as a single file, CSV as one file per
    /// sampled function (plus a checks table) under `path` as a directory.
    pub fn write(
        &self,
        path: &Path,
        format: crate::config::OutputFormat,
    ) -> Result<(), ReportError> {
        let io_err = |p: &Path, source| ReportError::Io {
            path: p.display().to_string(),
            source,
        };
        match format {
            crate::config::OutputFormat::Json => {
                let mut file =
                    std::fs::File::create(path).map_err(|e| io_err(path, e))?;
                file.write_all(self.to_json()?.as_bytes())
                    .map_err(|e| io_err(path, e))?;
            }
            crate::config::OutputFormat::Csv => {
                std::fs::create_dir_all(path).map_err(|e| io_err(path, e))?;
                for s in &self.samples {
                    let f = path.join(format!("{}.csv", s.name));
                    std::fs::write(&f, s.to_csv()).map_err(|e| io_err(&f, e))?;
                }
                let mut table = String::from("name,value,tolerance,verdict\n");
                for c in &self.checks {
                    let v = match c.verdict {
                        Verdict::Pass => "pass",
                        Verdict::Fail => "fail",
                        Verdict::Info => "info",
                    };
                    table.push_str(&format!(
                        "{},{:.17e},{:.17e},{}\n",
                        c.name, c.value, c.tolerance, v
                    ));
                }
                let f = path.join("checks.csv");
                std::fs::write(&f, table).map_err(|e| io_err(&f, e))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::OutputFormat;

    fn doc() -> ReportDocument {
        let cfg = RunConfig::default();
        let mut d = ReportDocument::new("verify", "pt-oscillator".into(), (8.0, 1601), cfg);
        d.push(Check::bounded("alpha-check", 1e-14, 1e-12));
        d.push(Check::info("published-comparison", 0.5, 1e-9));
        d
    }

    #[test]
    fn verdicts_follow_tolerances() {
        assert_eq!(Check::bounded("a", 1.0, 2.0).verdict, Verdict::Pass);
        assert_eq!(Check::bounded("a", 3.0, 2.0).verdict, Verdict::Fail);
        assert_eq!(Check::at_least("a", 3.0, 2.0).verdict, Verdict::Pass);
        assert_eq!(Check::at_least("a", 1.0, 2.0).verdict, Verdict::Fail);
        assert_eq!(Check::info("a", 9.0, 1e-9).verdict, Verdict::Info);
    }

    #[test]
    fn info_checks_do_not_fail_the_document() {
        let mut d = doc();
        assert!(d.passed());
        d.push(Check::bounded("broken", 1.0, 1e-9));
        assert!(!d.passed());
        assert_eq!(d.first_failure().unwrap().name, "broken");
    }

    #[test]
    fn json_is_deterministic_and_versioned() {
        let d = doc();
        let a = d.to_json().unwrap();
        let b = d.to_json().unwrap();
        assert_eq!(a, b);
        let v: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(v["schema_version"], SCHEMA_VERSION);
        assert_eq!(v["checks"][0]["verdict"], "pass");
        assert_eq!(v["metadata"]["model"], "pt-oscillator");
    }

    #[test]
    fn csv_samples_round_to_seventeen_digits() {
        let s = FunctionSamples::from_values(
            "potential",
            &[0.0, 0.5],
            &[Complex64::new(1.0 / 3.0, -2.0), Complex64::new(0.1, 0.2)],
        );
        let csv = s.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "x,re,im");
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[1].parse::<f64>().unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn writes_json_and_csv_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let mut d = doc();
        d.samples.push(FunctionSamples::from_values(
            "potential",
            &[0.0],
            &[Complex64::new(1.0, 0.0)],
        ));
        let json_path = dir.path().join("report.json");
        d.write(&json_path, OutputFormat::Json).unwrap();
        assert!(json_path.exists());
        let csv_dir = dir.path().join("csv");
        d.write(&csv_dir, OutputFormat::Csv).unwrap();
        assert!(csv_dir.join("potential.csv").exists());
        assert!(csv_dir.join("checks.csv").exists());
    }
}
