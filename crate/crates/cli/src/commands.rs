//! Subcommand implementations. Each returns the bytes to emit.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use smilansky_core::krein::{
    free_resolvent_form, i_n, s_poles_near, s_scalar, weighted_resolvent, y_n, ProfileFunction,
};
use smilansky_core::regions::{certify_free, eigenvalue_lower_bound, enclosure_indicator};
use smilansky_core::solvers::{
    bound_state, resonance_newton3, resonance_newton_full, resonances_near, scan, threshold_scan,
    ResonanceRecord, ScanOptions, ZeroCurves,
};
use smilansky_core::spectral::default_truncation;
use smilansky_core::{Error, SheetId};

use crate::config::{parse_complex, CommonArgs, Format, RunConfig};

/// Why a command failed, and how to report it.
#[derive(Debug)]
pub enum Failure {
    /// Bad input: message on stderr, exit code 1.
    Usage(String),
    /// Numerical failure: JSON status report, exit code 2.
    Numeric { error: Error, config: Value },
    Io(String),
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type CmdResult = Result<String, Failure>;

fn numeric(cfg: &Value) -> impl Fn(Error) -> Failure + '_ {
    move |error| {
        if error.is_usage() {
            Failure::Usage(error.to_string())
        } else {
            Failure::Numeric {
                error,
                config: cfg.clone(),
            }
        }
    }
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable output");
    s.push('\n');
    s
}

fn config_value(cfg: &RunConfig, extra: Value) -> Value {
    let mut v = serde_json::to_value(cfg).expect("serializable config");
    if let (Value::Object(m), Value::Object(e)) = (&mut v, extra) {
        m.extend(e);
    }
    v
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn usage(e: String) -> Failure {
    Failure::Usage(e)
}

// sheet

#[derive(Args, Debug)]
pub struct SheetArgs {
    /// Sheet as a comma-separated member list; "" is the physical sheet
    #[arg(long = "E", value_name = "SHEET", allow_hyphen_values = true)]
    pub sheet: String,
    /// Threshold index for the sector chain
    #[arg(long, default_value_t = 0)]
    pub chain_n: usize,
    /// Upper index for the threshold set; defaults to max(E) + 2
    #[arg(long)]
    pub n_max: Option<usize>,
}

fn braces(s: SheetId) -> String {
    format!("{{{s}}}")
}

fn index_list(v: &[usize]) -> String {
    let parts: Vec<String> = v.iter().map(|n| n.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

pub fn cmd_sheet(args: &SheetArgs) -> CmdResult {
    let sheet: SheetId = args.sheet.parse().map_err(|e: Error| usage(e.to_string()))?;
    let len = sheet.max_member().map_or(0, |m| m + 1).max(args.chain_n + 2).max(8);
    let vector: Vec<String> = (0..len).map(|n| sheet.branch(n as isize).to_string()).collect();
    let set = match args.n_max {
        Some(m) => sheet.threshold_set(m),
        None => sheet.threshold_set_complete(),
    };
    let chain = sheet.sector_chain(args.chain_n);
    let mut out = String::new();
    writeln!(out, "sheet E = {}", braces(sheet)).unwrap();
    writeln!(out, "characteristic vector l_0..l_{} = {}", len - 1, vector.join(" ")).unwrap();
    writeln!(out, "threshold set S(E) = {}", index_list(&set)).unwrap();
    writeln!(out, "rho(E, physical) = {}", sheet.rho(SheetId::PHYSICAL)).unwrap();
    writeln!(
        out,
        "sector chain at n = {}: E = {}, F = {}, G = {}, H = {}",
        args.chain_n,
        braces(chain.e),
        braces(chain.f),
        braces(chain.g),
        braces(chain.h)
    )
    .unwrap();
    Ok(out)
}

// bound-state

#[derive(Args, Debug)]
pub struct BoundStateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub fn cmd_bound_state(args: &BoundStateArgs) -> CmdResult {
    let cfg = RunConfig::resolve(&args.common, default_truncation(0)).map_err(usage)?;
    let config = config_value(&cfg, json!({}));
    let err = numeric(&config);
    let eps = cfg.eps;
    let predicted = 0.5 - eps.powi(4) / 16.0;
    let grid = [eps, eps / 2.0, eps / 4.0];
    let mut lambdas = Vec::new();
    for e in grid {
        lambdas.push(bound_state(e, cfg.truncation, cfg.tolerance).map_err(&err)?);
    }
    let lambda = lambdas[0];
    let errors: Vec<f64> = grid
        .iter()
        .zip(&lambdas)
        .map(|(e, l)| (l - (0.5 - e.powi(4) / 16.0)).abs())
        .collect();
    let slope = loglog_slope(&grid, &errors);
    if cfg.format == Format::Csv {
        let rows = grid.iter().zip(&errors).map(|(e, d)| {
            vec![e.to_string(), (0.5 - e.powi(4) / 16.0).to_string(), d.to_string()]
        });
        return csv_string(&["eps", "predicted", "error"], rows);
    }
    Ok(to_json(&json!({
        "status": "ok",
        "config": config,
        "lambda": lambda,
        "predicted": predicted,
        "error": (lambda - predicted).abs(),
        "lower_bound": eigenvalue_lower_bound(eps),
        "order_check": { "eps": grid, "errors": errors, "slope": slope },
    })))
}

// resonance

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    Full,
    Newton3,
    Both,
}

#[derive(Args, Debug)]
pub struct ResonanceArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Threshold index
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = MethodChoice::Full)]
    pub method: MethodChoice,
    /// Newton seed re,im; defaults to the weak-coupling prediction
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub seed: Option<Complex64>,
}

/// A resonance record together with its enclosure witness.
#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct ResonanceOutput {
    #[serde(flatten)]
    pub record: ResonanceRecord,
    pub enclosure_witness: usize,
}

fn with_witness(record: ResonanceRecord, eps: f64) -> Result<ResonanceOutput, Error> {
    let (_, enclosure_witness) = enclosure_indicator(record.lambda, eps)?;
    Ok(ResonanceOutput {
        record,
        enclosure_witness,
    })
}

const RECORD_HEADER: [&str; 12] = [
    "sheet",
    "threshold_n",
    "lambda_re",
    "lambda_im",
    "residual",
    "truncation",
    "predicted_re",
    "predicted_im",
    "method",
    "stability",
    "enclosure_witness",
    "eps",
];

fn record_row(o: &ResonanceOutput, eps: f64) -> Vec<String> {
    let r = &o.record;
    let method = serde_json::to_value(r.method).unwrap();
    vec![
        r.sheet.to_string(),
        r.threshold_n.to_string(),
        r.lambda.re.to_string(),
        r.lambda.im.to_string(),
        r.residual.to_string(),
        r.truncation.to_string(),
        r.predicted.re.to_string(),
        r.predicted.im.to_string(),
        method.as_str().unwrap_or_default().to_string(),
        r.stability.to_string(),
        o.enclosure_witness.to_string(),
        eps.to_string(),
    ]
}

pub fn cmd_resonance(args: &ResonanceArgs) -> CmdResult {
    let cfg = RunConfig::resolve(&args.common, default_truncation(args.n)).map_err(usage)?;
    let config = config_value(
        &cfg,
        json!({ "n": args.n, "method": args.method, "seed": args.seed }),
    );
    let err = numeric(&config);
    let (sheet, n, eps, size, tol) = (cfg.sheet, args.n, cfg.eps, cfg.truncation, cfg.tolerance);
    let mut records = Vec::new();
    if matches!(args.method, MethodChoice::Full | MethodChoice::Both) {
        records.push(resonance_newton_full(sheet, n, eps, size, tol, args.seed).map_err(&err)?);
    }
    if matches!(args.method, MethodChoice::Newton3 | MethodChoice::Both) {
        records.push(resonance_newton3(sheet, n, eps, size, tol).map_err(&err)?);
    }
    let outputs: Vec<ResonanceOutput> = records
        .into_iter()
        .map(|r| with_witness(r, eps))
        .collect::<Result<_, _>>()
        .map_err(&err)?;
    if cfg.format == Format::Csv {
        return csv_string(&RECORD_HEADER, outputs.iter().map(|o| record_row(o, eps)));
    }
    let mut report = json!({ "status": "ok", "config": config, "resonances": outputs });
    if outputs.len() == 2 {
        report["agreement"] = json!((outputs[0].record.lambda - outputs[1].record.lambda).norm());
    }
    Ok(to_json(&report))
}

// scan

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Scan the lower half-disc around this threshold on a log-polar grid
    /// instead of the Cartesian rectangle
    #[arg(long)]
    pub threshold_n: Option<usize>,
    /// Disc radius for --threshold-n
    #[arg(long, default_value_t = 0.1)]
    pub radius: f64,
    /// Also write the sample grid as CSV re,im,det_re,det_im
    #[arg(long)]
    pub samples: Option<PathBuf>,
    /// Also write the zero curves as CSV curve_id,kind,re,im
    #[arg(long)]
    pub curves: Option<PathBuf>,
}

fn samples_csv(z: &ZeroCurves) -> Result<String, Failure> {
    let rows = z.points.iter().zip(&z.values).map(|(p, d)| {
        vec![p.re.to_string(), p.im.to_string(), d.re.to_string(), d.im.to_string()]
    });
    csv_string(&["re", "im", "det_re", "det_im"], rows)
}

fn curves_csv(z: &ZeroCurves) -> Result<String, Failure> {
    let mut rows = Vec::new();
    for (id, c) in z.re_curves.iter().chain(&z.im_curves).enumerate() {
        for p in &c.points {
            rows.push(vec![
                id.to_string(),
                c.kind.as_str().to_string(),
                p.re.to_string(),
                p.im.to_string(),
            ]);
        }
    }
    csv_string(&["curve_id", "kind", "re", "im"], rows)
}

pub fn cmd_scan(args: &ScanArgs) -> CmdResult {
    let provisional = args.threshold_n.unwrap_or(0);
    let mut cfg = RunConfig::resolve(&args.common, default_truncation(provisional)).map_err(usage)?;
    if args.threshold_n.is_none() {
        let rect = cfg.rect.ok_or_else(|| usage("scan needs --rect or --threshold-n".into()))?;
        if args.common.truncation.is_none() {
            let n_star = (rect.re_max - 0.5).ceil().max(0.0) as usize;
            cfg.truncation = default_truncation(n_star);
        }
    }
    let config = config_value(
        &cfg,
        json!({ "threshold_n": args.threshold_n, "radius": args.threshold_n.map(|_| args.radius) }),
    );
    let err = numeric(&config);
    let opts = ScanOptions {
        truncation: cfg.truncation,
        tol: cfg.tolerance,
    };
    let [n_re, n_im] = cfg.resolution;
    let (curves, roots) = match args.threshold_n {
        Some(n) => {
            let z = threshold_scan(cfg.sheet, cfg.eps, n, args.radius, n_re, n_im, opts).map_err(&err)?;
            let roots = resonances_near(cfg.sheet, cfg.eps, n, args.radius, n_re, opts).map_err(&err)?;
            (z, roots)
        }
        None => {
            let rect = cfg.rect.expect("checked above");
            let z = scan(cfg.sheet, cfg.eps, rect, n_re, n_im, opts).map_err(&err)?;
            let roots = z.roots();
            (z, roots)
        }
    };
    if let Some(p) = &args.samples {
        std::fs::write(p, samples_csv(&curves)?)?;
    }
    if let Some(p) = &args.curves {
        std::fs::write(p, curves_csv(&curves)?)?;
    }
    if cfg.format == Format::Csv {
        return samples_csv(&curves);
    }
    let outputs: Vec<ResonanceOutput> = roots
        .into_iter()
        .map(|r| with_witness(r, cfg.eps))
        .collect::<Result<_, _>>()
        .map_err(&err)?;
    Ok(to_json(&json!({
        "status": "ok",
        "config": config,
        "mapping": curves.mapping,
        "grid": curves.rect,
        "re_curves": curves.re_curves.len(),
        "im_curves": curves.im_curves.len(),
        "intersections": curves.intersections,
        "resonances": outputs,
    })))
}

// freecheck

#[derive(Args, Debug)]
pub struct FreecheckArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Spectral parameter re,im
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub lambda: Complex64,
}

pub fn cmd_freecheck(args: &FreecheckArgs) -> CmdResult {
    let cfg = RunConfig::resolve(&args.common, default_truncation(0)).map_err(usage)?;
    let config = config_value(&cfg, json!({ "lambda": args.lambda }));
    let cert = certify_free(args.lambda, cfg.eps).map_err(numeric(&config))?;
    if cfg.format == Format::Csv {
        let row = vec![
            args.lambda.re.to_string(),
            args.lambda.im.to_string(),
            cfg.eps.to_string(),
            cert.certified().to_string(),
            cert.checked_up_to.to_string(),
            cert.min_margin.to_string(),
            cert.witness.to_string(),
        ];
        let header = ["re", "im", "eps", "certified", "checked_up_to", "min_margin", "witness"];
        return csv_string(&header, [row]);
    }
    Ok(to_json(&json!({
        "status": "ok",
        "config": config,
        "certified": cert.certified(),
        "enclosure": cert.witness != 0,
        "witness": cert.witness,
        "certificate": cert,
    })))
}

// krein

#[derive(Args, Debug)]
pub struct KreinArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Threshold channel
    #[arg(long)]
    pub n: usize,
    /// Spectral parameter re,im
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub lambda: Complex64,
    /// Profile CSV with header x,u on a uniform grid
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Box profile a,half_width,intervals used when no --profile is given
    #[arg(long, default_value = "1,2,400")]
    pub boxcar: String,
    /// Also search for poles of the channel scalar within this radius of the threshold
    #[arg(long)]
    pub poles_radius: Option<f64>,
}

fn parse_box(s: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if let [a, w, k] = parts[..] {
        let a = a.parse::<f64>().map_err(|e| e.to_string())?;
        let w = w.parse::<f64>().map_err(|e| e.to_string())?;
        let k = k.parse::<usize>().map_err(|e| e.to_string())?;
        Ok((a, w, k))
    } else {
        Err(format!("expected a,half_width,intervals, got \"{s}\""))
    }
}

pub fn cmd_krein(args: &KreinArgs) -> CmdResult {
    let cfg = RunConfig::resolve(&args.common, default_truncation(args.n)).map_err(usage)?;
    let profile = match &args.profile {
        Some(p) => ProfileFunction::from_csv_path(p).map_err(|e| usage(e.to_string()))?,
        None => {
            let (a, w, k) = parse_box(&args.boxcar).map_err(usage)?;
            ProfileFunction::boxcar(a, w, k).map_err(|e| usage(e.to_string()))?
        }
    };
    let config = config_value(
        &cfg,
        json!({
            "n": args.n,
            "lambda": args.lambda,
            "profile": args.profile.as_ref().map(|p| p.display().to_string()),
            "boxcar": args.profile.is_none().then(|| args.boxcar.clone()),
            "poles_radius": args.poles_radius,
        }),
    );
    let err = numeric(&config);
    let (lambda, n, eps, sheet, size) = (args.lambda, args.n, cfg.eps, cfg.sheet, cfg.truncation);
    let l = sheet.branch(n as isize);
    let s = s_scalar(lambda, eps, sheet, n, size).map_err(&err)?;
    let r = weighted_resolvent(lambda, eps, sheet, n, size, &profile).map_err(&err)?;
    let y = y_n(lambda, n, l).map_err(&err)?;
    let i = i_n(lambda, n, l, &profile).map_err(&err)?;
    let free = free_resolvent_form(lambda, n, l, &profile).map_err(&err)?;
    let poles = match args.poles_radius {
        Some(radius) => Some(
            s_poles_near(sheet, eps, n, radius, cfg.resolution[0], size, 10.0).map_err(&err)?,
        ),
        None => None,
    };
    if cfg.format == Format::Csv {
        let header = ["quantity", "re", "im"];
        let rows = [("s", s), ("r", r), ("y", y), ("i", i), ("free_form", free)]
            .into_iter()
            .map(|(k, v)| vec![k.to_string(), v.re.to_string(), v.im.to_string()]);
        return csv_string(&header, rows);
    }
    let mut report = json!({
        "status": "ok",
        "config": config,
        "branch": l,
        "s": s,
        "r": r,
        "y": y,
        "i": i,
        "free_form": free,
    });
    if let Some(p) = poles {
        report["s_poles"] = json!(p);
    }
    Ok(to_json(&report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let xs = [0.2, 0.1, 0.05];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powi(6)).collect();
        assert!((loglog_slope(&xs, &ys) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn sheet_report_example() {
        let out = cmd_sheet(&SheetArgs {
            sheet: "1,2,4,5".into(),
            chain_n: 0,
            n_max: None,
        })
        .unwrap();
        assert!(out.contains("threshold set S(E) = {1,4,6}"));
        assert!(out.contains("characteristic vector l_0..l_7 = 0 1 1 0 1 1 0 0"));
    }

    #[test]
    fn box_parser() {
        assert_eq!(parse_box("1,2,400").unwrap(), (1.0, 2.0, 400));
        assert!(parse_box("1,2").is_err());
    }
}
