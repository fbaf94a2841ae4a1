//! Run configuration: strict-schema JSON config files, flag merging, and
//! grid specifications.
//!
//! Precedence is total: command-line flag, then config-file value, then the
//! command's documented default. Unknown config keys are errors.

use std::path::PathBuf;

use serde::Deserialize;

use crate::CliError;

/// Grid specification "start:stop:count:scale" with scale linear|log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub log: bool,
}

impl GridSpec {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 4 {
            return Err(CliError::usage(format!(
                "grid spec must be start:stop:count:scale, got '{s}'"
            )));
        }
        let start: f64 = parts[0]
            .parse()
            .map_err(|_| CliError::usage(format!("bad grid start '{}'", parts[0])))?;
        let stop: f64 = parts[1]
            .parse()
            .map_err(|_| CliError::usage(format!("bad grid stop '{}'", parts[1])))?;
        let count: usize = parts[2]
            .parse()
            .map_err(|_| CliError::usage(format!("bad grid count '{}'", parts[2])))?;
        let log = match parts[3] {
            "linear" => false,
            "log" => true,
            other => {
                return Err(CliError::usage(format!(
                    "grid scale must be linear or log, got '{other}'"
                )))
            }
        };
        if count < 2 {
            return Err(CliError::usage("grid count must be >= 2".into()));
        }
        if !(stop > start) {
            return Err(CliError::usage("grid stop must exceed start".into()));
        }
        if log && !(start > 0.0) {
            return Err(CliError::usage("log grids require positive endpoints".into()));
        }
        Ok(Self { start, stop, count, log })
    }

    pub fn points(&self) -> Vec<f64> {
        let n = self.count;
        let mut out = Vec::with_capacity(n);
        if self.log {
            let (a, b) = (self.start.ln(), self.stop.ln());
            for i in 0..n {
                out.push((a + (b - a) * i as f64 / (n - 1) as f64).exp());
            }
        } else {
            for i in 0..n {
                out.push(self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64);
            }
        }
        // endpoints exact regardless of rounding in the interior
        out[0] = self.start;
        out[n - 1] = self.stop;
        out
    }

    pub fn spec_string(&self) -> String {
        format!(
            "{}:{}:{}:{}",
            self.start,
            self.stop,
            self.count,
            if self.log { "log" } else { "linear" }
        )
    }
}

// ---------------------------------------------------------------------------
// Config file schema (strict)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub network: Option<NetworkSection>,
    pub target: Option<TargetSection>,
    pub theta: Option<f64>,
    pub theta_db: Option<f64>,
    pub method: Option<String>,
    pub k: Option<Vec<usize>>,
    pub moments: Option<usize>,
    pub densities: Option<Vec<f64>>,
    pub window: Option<WindowSection>,
    pub mc: Option<McSection>,
    pub grids: Option<GridsSection>,
    pub output: Option<OutputSection>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub lambda: Option<f64>,
    pub alpha: Option<f64>,
    #[serde(rename = "R")]
    pub link_distance: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSection {
    pub nu: Option<f64>,
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub truncation_tol: Option<f64>,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridsSection {
    pub x: Option<String>,
    pub t: Option<String>,
    pub theta: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSection {
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
    pub format: Option<String>,
}

pub fn load_file(path: &std::path::Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// Merged settings
// ---------------------------------------------------------------------------

/// Everything a command might need, after flag/file/default merging.
/// Commands pull out what they require and reject what is missing.
#[derive(Debug, Clone)]
pub struct Settings {
    pub lambda: Option<f64>,
    pub alpha: Option<f64>,
    pub link_distance: Option<f64>,
    pub nu: Option<f64>,
    pub eps: Option<f64>,
    pub theta: Option<f64>,
    pub theta_db: Option<f64>,
    pub method: Option<crate::Method>,
    pub k: Vec<usize>,
    pub moments: Option<usize>,
    pub densities: Vec<f64>,
    pub window: Option<(f64, f64)>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub truncation_tol: Option<f64>,
    pub workers: Option<usize>,
    pub x_grid: Option<GridSpec>,
    pub t_grid: Option<GridSpec>,
    pub theta_grid: Option<GridSpec>,
    pub out: Option<PathBuf>,
    pub format: crate::OutputFormat,
}

impl Settings {
    /// Flags win over file values; defaults are applied by the commands.
    pub fn merge(args: &crate::CommonArgs, file: &FileConfig) -> Result<Self, CliError> {
        let net = file.network.clone().unwrap_or_default();
        let target = file.target.clone().unwrap_or_default();
        let mc = file.mc.clone().unwrap_or_default();
        let grids = file.grids.clone().unwrap_or_default();
        let output = file.output.clone().unwrap_or_default();

        let nu = args.nu.or(target.nu);
        let eps = args.eps.or(target.eps);
        if args.nu.is_some() && args.eps.is_some() {
            return Err(CliError::usage("--nu and --eps are mutually exclusive".into()));
        }

        let method = match &args.method {
            Some(m) => Some(*m),
            None => match &file.method {
                Some(s) => Some(crate::Method::parse(s)?),
                None => None,
            },
        };

        let format = match &args.format {
            Some(f) => *f,
            None => match output.format.as_deref() {
                Some("csv") => crate::OutputFormat::Csv,
                Some("json") => crate::OutputFormat::Json,
                Some(other) => {
                    return Err(CliError::usage(format!(
                        "output format must be csv or json, got '{other}'"
                    )))
                }
                None => crate::OutputFormat::Csv,
            },
        };

        let parse_grid = |flag: &Option<String>, file_val: &Option<String>| {
            match flag.as_ref().or(file_val.as_ref()) {
                Some(s) => GridSpec::parse(s).map(Some),
                None => Ok(None),
            }
        };

        let window = match &args.window {
            Some(s) => Some(parse_window(s)?),
            None => file.window.as_ref().map(|w| (w.width, w.height)),
        };

        Ok(Self {
            lambda: args.lambda.or(net.lambda),
            alpha: args.alpha.or(net.alpha),
            link_distance: args.link_distance.or(net.link_distance),
            nu,
            eps,
            theta: args.theta.or(file.theta),
            theta_db: args.theta_db.or(file.theta_db),
            method,
            k: if args.k.is_empty() {
                file.k.clone().unwrap_or_default()
            } else {
                args.k.clone()
            },
            moments: args.moments.or(file.moments),
            densities: if args.densities.is_empty() {
                file.densities.clone().unwrap_or_default()
            } else {
                args.densities.clone()
            },
            window,
            samples: args.samples.or(mc.samples),
            seed: args.seed.or(mc.seed),
            truncation_tol: args.tol.or(mc.truncation_tol),
            workers: args.workers.or(mc.workers),
            x_grid: parse_grid(&args.x_grid, &grids.x)?,
            t_grid: parse_grid(&args.t_grid, &grids.t)?,
            theta_grid: parse_grid(&args.theta_grid, &grids.theta)?,
            out: args.out.clone().or(output.path),
            format,
        })
    }

    pub fn network(&self) -> Result<metasir::NetworkParams, CliError> {
        let lambda = self
            .lambda
            .ok_or_else(|| CliError::usage("missing --lambda (or network.lambda)".into()))?;
        let alpha = self
            .alpha
            .ok_or_else(|| CliError::usage("missing --alpha (or network.alpha)".into()))?;
        let r = self
            .link_distance
            .ok_or_else(|| CliError::usage("missing --R (or network.R)".into()))?;
        metasir::NetworkParams::new(lambda, alpha, r).map_err(CliError::from)
    }

    /// Network with documented defaults for the figure-reproduction commands.
    pub fn network_or(&self, lambda: f64, alpha: f64, r: f64) -> Result<metasir::NetworkParams, CliError> {
        metasir::NetworkParams::new(
            self.lambda.unwrap_or(lambda),
            self.alpha.unwrap_or(alpha),
            self.link_distance.unwrap_or(r),
        )
        .map_err(CliError::from)
    }

    pub fn target(&self) -> Result<metasir::ReliabilityTarget, CliError> {
        match (self.nu, self.eps) {
            (Some(nu), None) => metasir::ReliabilityTarget::from_nu(nu).map_err(CliError::from),
            (None, Some(eps)) => {
                metasir::ReliabilityTarget::from_epsilon(eps).map_err(CliError::from)
            }
            (None, None) => Err(CliError::usage(
                "missing reliability target: pass --nu or --eps".into(),
            )),
            (Some(_), Some(_)) => {
                Err(CliError::usage("--nu and --eps are mutually exclusive".into()))
            }
        }
    }

    /// Linear SIR threshold, accepting --theta-db as 10^(dB/10).
    pub fn theta(&self) -> Result<metasir::SirThreshold, CliError> {
        let value = match (self.theta, self.theta_db) {
            (Some(t), None) => t,
            (None, Some(db)) => 10f64.powf(db / 10.0),
            (None, None) => {
                return Err(CliError::usage("missing --theta (or --theta-db)".into()))
            }
            (Some(_), Some(_)) => {
                return Err(CliError::usage(
                    "--theta and --theta-db are mutually exclusive".into(),
                ))
            }
        };
        metasir::SirThreshold::new(value).map_err(CliError::from)
    }

    pub fn mc_config(&self, default_tol: f64) -> Result<metasir::McConfig, CliError> {
        let cfg = metasir::McConfig::new(self.samples.unwrap_or(10_000), self.seed.unwrap_or(42))?
            .with_truncation_tol(self.truncation_tol.unwrap_or(default_tol))?
            .with_workers(self.workers);
        Ok(cfg)
    }
}

fn parse_window(s: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = s.split('x').collect();
    if parts.len() != 2 {
        return Err(CliError::usage(format!(
            "window must be WIDTHxHEIGHT, got '{s}'"
        )));
    }
    let w: f64 = parts[0]
        .parse()
        .map_err(|_| CliError::usage(format!("bad window width '{}'", parts[0])))?;
    let h: f64 = parts[1]
        .parse()
        .map_err(|_| CliError::usage(format!("bad window height '{}'", parts[1])))?;
    Ok((w, h))
}
