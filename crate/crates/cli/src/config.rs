//! Run configuration: JSON config file merged with command-line flags.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use smilansky_core::solvers::{Rect, DEFAULT_TOLERANCE};
use smilansky_core::SheetId;

/// Default scan resolution per axis.
pub const DEFAULT_RESOLUTION: usize = 201;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Keys accepted in a `--config` file. Every key is optional.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub eps: Option<f64>,
    pub sheet: Option<String>,
    pub truncation: Option<usize>,
    pub tolerance: Option<f64>,
    pub rect: Option<Rect>,
    pub resolution: Option<[usize; 2]>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }
}

/// Flags shared by the numerical subcommands; each overrides the config file.
#[derive(Args, Clone, Debug, Default)]
pub struct CommonArgs {
    /// JSON config file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Coupling constant in (0, 1)
    #[arg(long)]
    pub eps: Option<f64>,
    /// Sheet as a comma-separated member list; "" is the physical sheet
    #[arg(long = "E", value_name = "SHEET", allow_hyphen_values = true)]
    pub sheet: Option<String>,
    /// Jacobi truncation size
    #[arg(long)]
    pub truncation: Option<usize>,
    /// Residual tolerance on |det|
    #[arg(long = "tol")]
    pub tolerance: Option<f64>,
    /// Scan rectangle re_min,re_max,im_min,im_max
    #[arg(long, value_parser = parse_rect, allow_hyphen_values = true)]
    pub rect: Option<Rect>,
    /// Scan resolution N or N_RE,N_IM
    #[arg(long, value_parser = parse_resolution)]
    pub resolution: Option<[usize; 2]>,
    /// Output file; stdout when absent
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// Validated configuration, recorded verbatim in every JSON output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub eps: f64,
    pub sheet: SheetId,
    pub truncation: usize,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rect: Option<Rect>,
    pub resolution: [usize; 2],
    pub format: Format,
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

impl RunConfig {
    /// Merges file and flags, filling the truncation from `default_truncation`.
    pub fn resolve(args: &CommonArgs, default_truncation: usize) -> Result<Self, String> {
        let file = match &args.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let eps = args
            .eps
            .or(file.eps)
            .ok_or("eps is required (--eps or config key \"eps\")")?;
        let sheet_text = args.sheet.clone().or(file.sheet).unwrap_or_default();
        let sheet: SheetId = sheet_text.parse().map_err(|e| format!("{e}"))?;
        let cfg = RunConfig {
            eps,
            sheet,
            truncation: args.truncation.or(file.truncation).unwrap_or(default_truncation),
            tolerance: args.tolerance.or(file.tolerance).unwrap_or(DEFAULT_TOLERANCE),
            rect: args.rect.or(file.rect),
            resolution: args
                .resolution
                .or(file.resolution)
                .unwrap_or([DEFAULT_RESOLUTION; 2]),
            format: args.format.or(file.format).unwrap_or_default(),
            output: args.output.clone().or(file.output),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(format!("eps must lie in (0, 1), got {}", self.eps));
        }
        if self.truncation < 8 {
            return Err(format!("truncation must be at least 8, got {}", self.truncation));
        }
        if !(self.tolerance > 0.0 && self.tolerance <= 1e-2) {
            return Err(format!("tolerance must lie in (0, 1e-2], got {}", self.tolerance));
        }
        if let Some(r) = &self.rect {
            r.validate().map_err(|e| e.to_string())?;
        }
        if self.resolution.iter().any(|&n| n < 2) {
            return Err("resolution must be at least 2 per axis".into());
        }
        Ok(())
    }
}

fn parse_reals(s: &str, count: usize) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != count {
        return Err(format!("expected {count} comma-separated numbers, got \"{s}\""));
    }
    parts
        .iter()
        .map(|p| p.parse::<f64>().map_err(|e| format!("bad number \"{p}\": {e}")))
        .collect()
}

/// Parses `re,im`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let v = parse_reals(s, 2)?;
    Ok(Complex64::new(v[0], v[1]))
}

pub fn parse_rect(s: &str) -> Result<Rect, String> {
    let v = parse_reals(s, 4)?;
    Rect::new(v[0], v[1], v[2], v[3]).map_err(|e| e.to_string())
}

pub fn parse_resolution(s: &str) -> Result<[usize; 2], String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("bad resolution \"{p}\": {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [n] => Ok([n, n]),
        [a, b] => Ok([a, b]),
        _ => Err(format!("expected N or N_RE,N_IM, got \"{s}\"")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"eps": 0.2, "sheet": "1,2", "tolerance": 1e-9}"#).unwrap();
        let args = CommonArgs {
            config: Some(path),
            eps: Some(0.1),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(&args, 68).unwrap();
        assert_eq!(cfg.eps, 0.1);
        assert_eq!(cfg.sheet, SheetId::from_members([1, 2]));
        assert_eq!(cfg.tolerance, 1e-9);
        assert_eq!(cfg.truncation, 68);
        assert_eq!(cfg.resolution, [201, 201]);
    }

    #[test]
    fn invariants_are_enforced() {
        let base = CommonArgs {
            eps: Some(0.1),
            ..Default::default()
        };
        assert!(RunConfig::resolve(&base, 68).is_ok());
        let bad = [
            CommonArgs { eps: Some(1.0), ..base.clone() },
            CommonArgs { truncation: Some(7), ..base.clone() },
            CommonArgs { tolerance: Some(0.1), ..base.clone() },
            CommonArgs { tolerance: Some(0.0), ..base.clone() },
            CommonArgs { sheet: Some("1,x".into()), ..base.clone() },
            CommonArgs { eps: None, ..base.clone() },
        ];
        for b in bad {
            assert!(RunConfig::resolve(&b, 68).is_err(), "{b:?}");
        }
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"epsilon": 0.2}"#).unwrap();
        assert!(FileConfig::load(&path).is_err());
    }

    #[test]
    fn text_parsers() {
        assert_eq!(parse_complex("0.2,-0.5").unwrap(), Complex64::new(0.2, -0.5));
        assert!(parse_complex("0.2").is_err());
        assert!(parse_rect("1,0,-1,0").is_err());
        assert_eq!(parse_rect("0,1,-1,0").unwrap(), Rect::new(0.0, 1.0, -1.0, 0.0).unwrap());
        assert_eq!(parse_resolution("51").unwrap(), [51, 51]);
        assert_eq!(parse_resolution("51,21").unwrap(), [51, 21]);
        assert!(parse_resolution("1,2,3").is_err());
    }
}
