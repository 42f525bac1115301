//! Root finding for `det(I + εJ_E(λ)) = 0`.
//!
//! * [`bound_state`]: the eigenvalue below `ν_0` on the physical sheet.
//! * [`resonance_newton_full`]: Newton on the truncated determinant.
//! * [`resonance_newton3`]: Newton on the 3×3 reduction in the `κ`-plane.
//! * [`scan`] and [`threshold_scan`]: sampled zero curves of `Re det` and
//!   `Im det` and their refined intersections.

mod contour;
mod scan;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::localred::{kappa_det, lambda_of_kappa, sector_sheet, z_coefficient};
use crate::regions::eigenvalue_lower_bound;
use crate::sheets::{SheetId, MAX_INDEX};
use crate::spectral::{
    branch_sqrt, count_above, det_and_derivative, det_value, threshold, DetDerivative,
};

pub use contour::{march, CellSegment, CurveKind, Polyline};
pub use scan::{
    resonances_near, scan, threshold_scan, GridMapping, Rect, ScanIntersection, ScanOptions,
    ZeroCurves,
};

/// Newton iteration cap shared by all solvers.
pub const MAX_ITERATIONS: usize = 50;

/// Default bound on `|det|` at an accepted root.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    NewtonFull,
    Newton3,
    Scan,
}

/// A located zero of the truncated determinant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceRecord {
    pub sheet: SheetId,
    pub threshold_n: usize,
    pub lambda: Complex64,
    /// `|det|` of the size-`truncation` matrix at `lambda`.
    pub residual: f64,
    pub truncation: usize,
    /// Weak-coupling prediction from [`predicted_lambda`].
    pub predicted: Complex64,
    pub method: Method,
    /// Distance to the root recomputed at twice the truncation.
    pub stability: f64,
}

/// `ν_n - (ε⁴/16)[(2n+1) + 2n(n+1)i]`; for `n = 0` this is the bound-state
/// expansion `ν_0 - ε⁴/16`.
pub fn predicted_lambda(n: usize, eps: f64) -> Complex64 {
    let nf = n as f64;
    let e4 = eps.powi(4) / 16.0;
    Complex64::new(threshold(n), 0.0) - e4 * Complex64::new(2.0 * nf + 1.0, 2.0 * nf * (nf + 1.0))
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("eps must lie in (0, 1), got {eps}")))
    }
}

/// The sheet whose determinant continues sheet `sheet`'s lower half-plane
/// analytically to `λ`: itself for `Im λ ≤ 0`, otherwise the sheet adjacent
/// through the real interval below `λ`.
pub fn continued_sheet(sheet: SheetId, lambda: Complex64) -> SheetId {
    if lambda.im <= 0.0 || lambda.re < threshold(0) {
        return sheet;
    }
    let m = ((lambda.re - 0.5).floor() as isize).min(MAX_INDEX as isize - 1);
    sheet.adjacent_through(m)
}

fn eval_continued(lambda: Complex64, eps: f64, sheet: SheetId, size: usize) -> Result<DetDerivative> {
    det_and_derivative(lambda, eps, continued_sheet(sheet, lambda), size)
}

fn abs_det(lambda: Complex64, eps: f64, sheet: SheetId, size: usize) -> Result<f64> {
    Ok(det_value(lambda, eps, continued_sheet(sheet, lambda), size)?
        .value()
        .norm())
}

/// Damped Newton iteration on the continued determinant. Returns the root and
/// `|det|` there.
pub fn newton_determinant(
    sheet: SheetId,
    eps: f64,
    size: usize,
    seed: Complex64,
    tol: f64,
) -> Result<(Complex64, f64)> {
    let mut lambda = seed;
    let mut current = eval_continued(lambda, eps, sheet, size)?;
    for _ in 0..MAX_ITERATIONS {
        if current.value == Complex64::new(0.0, 0.0) {
            return Ok((lambda, 0.0));
        }
        if current.derivative == Complex64::new(0.0, 0.0) || !current.derivative.is_finite() {
            break;
        }
        let step = current.newton_step();
        if step.norm() <= 1e-14 * lambda.norm().max(1.0) {
            lambda -= step;
            let res = abs_det(lambda, eps, sheet, size)?;
            return if res <= tol {
                Ok((lambda, res))
            } else {
                Err(Error::NoConvergence {
                    iterations: MAX_ITERATIONS,
                    last: lambda,
                })
            };
        }
        let f0 = current.unscaled().0.norm();
        let mut t = 1.0;
        let mut next = None;
        for _ in 0..30 {
            let cand = lambda - t * step;
            match eval_continued(cand, eps, sheet, size) {
                Ok(d) if d.unscaled().0.norm() < f0 => {
                    next = Some((cand, d));
                    break;
                }
                Ok(_) | Err(Error::ThresholdCollision { .. }) => t *= 0.5,
                Err(e) => return Err(e),
            }
        }
        match next {
            Some((cand, d)) => {
                lambda = cand;
                current = d;
            }
            // no decrease along the Newton direction: at the noise floor
            None => {
                let res = abs_det(lambda, eps, sheet, size)?;
                if res <= tol {
                    return Ok((lambda, res));
                }
                break;
            }
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITERATIONS,
        last: lambda,
    })
}

fn check_lower(lambda: Complex64) -> Result<()> {
    if lambda.im > 1e-12 * lambda.norm().max(1.0) {
        Err(Error::UpperHalfPlane { lambda })
    } else {
        Ok(())
    }
}

/// Newton on the full truncated determinant of sheet `sheet`, seeded at
/// `seed` or at [`predicted_lambda`]. The root is recomputed at `2·size` to
/// measure truncation stability.
pub fn resonance_newton_full(
    sheet: SheetId,
    n: usize,
    eps: f64,
    size: usize,
    tol: f64,
    seed: Option<Complex64>,
) -> Result<ResonanceRecord> {
    check_eps(eps)?;
    let seed = seed.unwrap_or_else(|| predicted_lambda(n, eps));
    let (lambda, residual) = newton_determinant(sheet, eps, size, seed, tol)?;
    check_lower(lambda)?;
    let (doubled, _) = newton_determinant(sheet, eps, 2 * size, lambda, tol)?;
    Ok(ResonanceRecord {
        sheet,
        threshold_n: n,
        lambda,
        residual,
        truncation: size,
        predicted: predicted_lambda(n, eps),
        method: Method::NewtonFull,
        stability: (doubled - lambda).norm(),
    })
}

/// Newton in `κ` with a central-difference derivative. Iteration stops once the
/// induced change of `λ = ν_n - κ⁴` is at rounding level: `λ` itself carries an
/// absolute error of a few ulp, which near the threshold is far larger than
/// the relative resolution of `κ`.
fn newton_kappa(sheet: SheetId, n: usize, eps: f64, size: usize) -> Result<Complex64> {
    let mut kappa = 0.5 * eps * branch_sqrt(z_coefficient(sheet, n), 0);
    let g = |k: Complex64| kappa_det(k, eps, sheet, n, size);
    for _ in 0..MAX_ITERATIONS {
        let gk = g(kappa)?;
        let h = kappa.norm() * 1e-6;
        let dg = (g(kappa + h)? - g(kappa - h)?) / (2.0 * h);
        let step = gk / dg;
        if !step.is_finite() {
            break;
        }
        let before = lambda_of_kappa(kappa, n);
        kappa -= step;
        let after = lambda_of_kappa(kappa, n);
        if (after - before).norm() <= 1e-14 * after.norm().max(1.0) {
            return Ok(kappa);
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITERATIONS,
        last: lambda_of_kappa(kappa, n),
    })
}

fn braces(s: SheetId) -> String {
    format!("{{{s}}}")
}

/// Newton on `κ ↦ det(I + εB_{n,E}(ε, κ))` seeded at `ε z_{n,E}^{1/2} / 2`.
///
/// The root is a resonance on the lower half of sheet `sheet` only when the
/// sector of `κ` is attached to `sheet` itself; otherwise the zero belongs to
/// a neighbouring sheet and [`Error::SectorMismatch`] is returned.
pub fn resonance_newton3(
    sheet: SheetId,
    n: usize,
    eps: f64,
    size: usize,
    tol: f64,
) -> Result<ResonanceRecord> {
    check_eps(eps)?;
    let kappa = newton_kappa(sheet, n, eps, size)?;
    let found = sector_sheet(kappa, sheet, n);
    if found != sheet {
        return Err(Error::SectorMismatch {
            kappa,
            expected: braces(sheet),
            found: braces(found),
        });
    }
    let lambda = lambda_of_kappa(kappa, n);
    check_lower(lambda)?;
    let residual = det_value(lambda, eps, sheet, size)?.value().norm();
    if residual > tol {
        return Err(Error::NoConvergence {
            iterations: MAX_ITERATIONS,
            last: lambda,
        });
    }
    let doubled = lambda_of_kappa(newton_kappa(sheet, n, eps, 2 * size)?, n);
    Ok(ResonanceRecord {
        sheet,
        threshold_n: n,
        lambda,
        residual,
        truncation: size,
        predicted: predicted_lambda(n, eps),
        method: Method::Newton3,
        stability: (doubled - lambda).norm(),
    })
}

/// The eigenvalue `λ_1(ε) ∈ (0, ν_0)` on the physical sheet.
///
/// The number of eigenvalues below `ν_0 - δ`, `δ = 10⁻³ ε⁴/16`, is read off a
/// Sturm count; exactly one is required. Since `det(I + εJ(λ))` is real and
/// changes sign once on `[1 - (1/4 + ε⁴)^{1/2}, ν_0 - δ]`, bisection brackets
/// the root, and a Newton step polishes it when that lowers `|det|`.
pub fn bound_state(eps: f64, size: usize, tol: f64) -> Result<f64> {
    check_eps(eps)?;
    let hi = threshold(0) - 1e-3 * eps.powi(4) / 16.0;
    match count_above(hi, eps, size)? {
        0 => return Err(Error::NoRoot),
        1 => {}
        count => return Err(Error::MultiRoot { count }),
    }
    let f = |x: f64| -> Result<f64> {
        Ok(det_value(Complex64::new(x, 0.0), eps, SheetId::PHYSICAL, size)?
            .value()
            .re)
    };
    let mut lo = eigenvalue_lower_bound(eps).max(f64::MIN_POSITIVE);
    let mut hi = hi;
    let (mut f_lo, f_hi) = (f(lo)?, f(hi)?);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoRoot);
    }
    while hi - lo > f64::EPSILON * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if fm.signum() == f_lo.signum() {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    let mut root = if f(lo)?.abs() <= f(hi)?.abs() { lo } else { hi };
    let d = det_and_derivative(Complex64::new(root, 0.0), eps, SheetId::PHYSICAL, size)?;
    let polished = root - d.newton_step().re;
    if (lo..=hi).contains(&polished) && f(polished)?.abs() < f(root)?.abs() {
        root = polished;
    }
    let residual = f(root)?.abs();
    // for tiny eps the root hugs ν_0 where det is too steep for |det| ≤ tol to be
    // reachable in double precision; a root pinned to a few ulps is accepted
    let pinned = d.newton_step().norm() <= 4.0 * f64::EPSILON * root;
    if residual > tol && !pinned {
        return Err(Error::NoConvergence {
            iterations: MAX_ITERATIONS,
            last: Complex64::new(root, 0.0),
        });
    }
    Ok(root)
}
