//! Zero curves of `Re det` and `Im det` on sampled grids and their refined
//! intersections.
//!
//! Two grid shapes are supported. A Cartesian grid samples `λ = u + iv`
//! directly. A log-polar grid around a threshold samples
//! `λ = ν_n + exp(u + iv)`, `v ∈ [-π, 0]`: resonances born at `ν_n` sit at a
//! distance of order `ε⁴` from it, far below the cell size of any practical
//! Cartesian grid, while on the logarithmic scale they are well separated.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::contour::{chain, march, segment_intersection, CellSegment, CurveKind, Polyline};
use super::{resonance_newton_full, Method, ResonanceRecord, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::sheets::SheetId;
use crate::spectral::{default_truncation, det_value, threshold};

/// Closed rectangle of the complex plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let r = Rect {
            re_min,
            re_max,
            im_min,
            im_max,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.re_min, self.re_max, self.im_min, self.im_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.re_min >= self.re_max || self.im_min >= self.im_max {
            return Err(Error::InvalidParameter(format!("degenerate rectangle {self:?}")));
        }
        Ok(())
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (self.re_min..=self.re_max).contains(&z.re) && (self.im_min..=self.im_max).contains(&z.im)
    }
}

/// How grid coordinates `(u, v)` map to `λ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridMapping {
    /// `λ = u + iv`.
    Cartesian,
    /// `λ = centre + exp(u + iv)`.
    LogPolar { centre: f64 },
}

impl GridMapping {
    pub fn apply(&self, u: f64, v: f64) -> Complex64 {
        match *self {
            GridMapping::Cartesian => Complex64::new(u, v),
            GridMapping::LogPolar { centre } => centre + Complex64::new(u, v).exp(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanOptions {
    pub truncation: usize,
    pub tol: f64,
}

impl ScanOptions {
    /// Truncation suited to thresholds up to `n_star`, default tolerance.
    pub fn for_threshold(n_star: usize) -> Self {
        ScanOptions {
            truncation: default_truncation(n_star),
            tol: DEFAULT_TOLERANCE,
        }
    }
}

/// A crossing of a `Re det = 0` and an `Im det = 0` curve and what Newton made of it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanIntersection {
    pub point: Complex64,
    pub refined: Option<ResonanceRecord>,
    /// `converged`, `outside` (Newton left the scanned domain) or the solver error.
    pub status: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroCurves {
    /// The grid rectangle in `(u, v)` coordinates.
    pub rect: Rect,
    pub mapping: GridMapping,
    pub n_re: usize,
    pub n_im: usize,
    /// Sample points `λ`, row-major with `u` fastest.
    pub points: Vec<Complex64>,
    /// `det` at the sample points; NaN where evaluation hit a threshold.
    pub values: Vec<Complex64>,
    pub re_curves: Vec<Polyline>,
    pub im_curves: Vec<Polyline>,
    pub intersections: Vec<ScanIntersection>,
}

impl ZeroCurves {
    /// Distinct refined roots, ordered by real then imaginary part.
    pub fn roots(&self) -> Vec<ResonanceRecord> {
        dedup(
            self.intersections
                .iter()
                .filter_map(|x| x.refined.clone())
                .collect(),
        )
    }

    pub fn cell_size(&self) -> (f64, f64) {
        (
            (self.rect.re_max - self.rect.re_min) / (self.n_re - 1) as f64,
            (self.rect.im_max - self.rect.im_min) / (self.n_im - 1) as f64,
        )
    }
}

/// Merges records closer than `1e-8` (relative), keeping the smaller residual.
pub fn dedup(mut records: Vec<ResonanceRecord>) -> Vec<ResonanceRecord> {
    records.sort_by(|a, b| {
        a.lambda
            .re
            .total_cmp(&b.lambda.re)
            .then(a.lambda.im.total_cmp(&b.lambda.im))
    });
    let mut out: Vec<ResonanceRecord> = Vec::new();
    for r in records {
        let dup = out
            .iter_mut()
            .find(|o| (o.lambda - r.lambda).norm() <= 1e-8 * r.lambda.norm().max(1.0));
        match dup {
            Some(o) if r.residual < o.residual => *o = r,
            Some(_) => {}
            None => out.push(r),
        }
    }
    out
}

fn nearest_threshold(lambda: Complex64) -> usize {
    (lambda.re - 0.5).round().max(0.0) as usize
}

#[allow(clippy::too_many_arguments)]
fn scan_grid(
    sheet: SheetId,
    eps: f64,
    rect: Rect,
    mapping: GridMapping,
    nu: usize,
    nv: usize,
    opts: ScanOptions,
    threshold_n: Option<usize>,
    inside: &(dyn Fn(Complex64) -> bool + Sync),
) -> Result<ZeroCurves> {
    rect.validate()?;
    if nu < 2 || nv < 2 {
        return Err(Error::InvalidParameter("scan resolution must be at least 2x2".into()));
    }
    let du = (rect.re_max - rect.re_min) / (nu - 1) as f64;
    let dv = (rect.im_max - rect.im_min) / (nv - 1) as f64;
    let to_lambda = |x: f64, y: f64| mapping.apply(rect.re_min + x * du, rect.im_min + y * dv);

    let rows: Vec<Vec<(Complex64, Complex64)>> = (0..nv)
        .into_par_iter()
        .map(|j| {
            (0..nu)
                .map(|i| {
                    let z = to_lambda(i as f64, j as f64);
                    let d = det_value(z, eps, sheet, opts.truncation)
                        .map(|d| d.value())
                        .unwrap_or(Complex64::new(f64::NAN, f64::NAN));
                    (z, d)
                })
                .collect()
        })
        .collect();
    let (points, values): (Vec<Complex64>, Vec<Complex64>) = rows.into_iter().flatten().unzip();

    let re_field: Vec<f64> = values.iter().map(|d| d.re).collect();
    let im_field: Vec<f64> = values.iter().map(|d| d.im).collect();
    let re_segs = march(&re_field, nu, nv);
    let im_segs = march(&im_field, nu, nv);

    let polylines = |segs: &[CellSegment], kind| -> Vec<Polyline> {
        chain(segs)
            .into_iter()
            .map(|pts| Polyline {
                kind,
                points: pts.into_iter().map(|(x, y)| to_lambda(x, y)).collect(),
            })
            .collect()
    };
    let re_curves = polylines(&re_segs, CurveKind::Re);
    let im_curves = polylines(&im_segs, CurveKind::Im);

    let mut crossings: Vec<Complex64> = Vec::new();
    for p in &re_segs {
        for q in im_segs.iter().filter(|q| q.cell == p.cell) {
            if let Some((x, y)) = segment_intersection(p, q) {
                let z = to_lambda(x, y);
                let near = |w: &Complex64| (w - z).norm() <= 1e-12 * z.norm().max(1.0);
                if !crossings.iter().any(near) {
                    crossings.push(z);
                }
            }
        }
    }

    let intersections = crossings
        .into_par_iter()
        .map(|z| {
            let n = threshold_n.unwrap_or_else(|| nearest_threshold(z));
            match resonance_newton_full(sheet, n, eps, opts.truncation, opts.tol, Some(z)) {
                Ok(mut rec) if inside(rec.lambda) => {
                    rec.method = Method::Scan;
                    rec.threshold_n = threshold_n.unwrap_or_else(|| nearest_threshold(rec.lambda));
                    ScanIntersection {
                        point: z,
                        refined: Some(rec),
                        status: "converged".into(),
                    }
                }
                Ok(_) => ScanIntersection {
                    point: z,
                    refined: None,
                    status: "outside".into(),
                },
                Err(e) => ScanIntersection {
                    point: z,
                    refined: None,
                    status: e.to_string(),
                },
            }
        })
        .collect();

    Ok(ZeroCurves {
        rect,
        mapping,
        n_re: nu,
        n_im: nv,
        points,
        values,
        re_curves,
        im_curves,
        intersections,
    })
}

/// Samples `det(I + εJ_E(λ))` on a Cartesian `n_re × n_im` grid over `rect`,
/// extracts the zero curves and refines their crossings by Newton. Refined
/// roots leaving `rect` are dropped.
pub fn scan(
    sheet: SheetId,
    eps: f64,
    rect: Rect,
    n_re: usize,
    n_im: usize,
    opts: ScanOptions,
) -> Result<ZeroCurves> {
    scan_grid(
        sheet,
        eps,
        rect,
        GridMapping::Cartesian,
        n_re,
        n_im,
        opts,
        None,
        &|z| rect.contains(z),
    )
}

fn in_lower_disc(z: Complex64, centre: f64, radius: f64) -> bool {
    (z - centre).norm() <= radius && z.im <= 0.0
}

/// Log-polar scan of the lower half-disc `|λ - ν_n| ≤ radius`, covering
/// distances from `radius·10⁻⁹` to `radius`.
pub fn threshold_scan(
    sheet: SheetId,
    eps: f64,
    n: usize,
    radius: f64,
    n_rad: usize,
    n_ang: usize,
    opts: ScanOptions,
) -> Result<ZeroCurves> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
    }
    let centre = threshold(n);
    let rect = Rect::new((radius * 1e-9).ln(), radius.ln(), -std::f64::consts::PI, 0.0)?;
    scan_grid(
        sheet,
        eps,
        rect,
        GridMapping::LogPolar { centre },
        n_rad,
        n_ang,
        opts,
        Some(n),
        &|z| in_lower_disc(z, centre, radius),
    )
}

/// All refined roots in the lower half-disc `|λ - ν_n| ≤ radius`, from a
/// Cartesian scan of its bounding box and a log-polar scan around `ν_n`,
/// each at `resolution × resolution` samples.
pub fn resonances_near(
    sheet: SheetId,
    eps: f64,
    n: usize,
    radius: f64,
    resolution: usize,
    opts: ScanOptions,
) -> Result<Vec<ResonanceRecord>> {
    let centre = threshold(n);
    let rect = Rect::new(centre - radius, centre + radius, -radius, 0.0)?;
    let cart = scan_grid(
        sheet,
        eps,
        rect,
        GridMapping::Cartesian,
        resolution,
        resolution,
        opts,
        Some(n),
        &|z| in_lower_disc(z, centre, radius),
    )?;
    let polar = threshold_scan(sheet, eps, n, radius, resolution, resolution, opts)?;
    let mut all = cart.roots();
    all.extend(polar.roots());
    Ok(dedup(all))
}
