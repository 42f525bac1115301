//! Scalar functions whose poles are the resonances.
//!
//! On channel `n` the free resolvent has kernel `e^{-r_n|x-x'|} / (2r_n)`.
//! Perturbing the channel by the coupling to the oscillator gives, for a
//! real test profile `u`,
//!
//! ```text
//! 𝔯(λ; u) = (R_n(λ)u, u) + I_n(λ; u)² / (2 y_n(λ)) · (𝔰(λ) - 1)
//! ```
//!
//! with `y_n = r_n √ν_n`, `η_n(x) = ν_n^{1/4} e^{-r_n|x|}`, `I_n = ∫ η_n u` and
//! `𝔰 = ((I + εJ_E(λ))^{-1} e_n, e_n)`. Continuing `𝔯` from one sheet to the
//! next only changes the branches, so its poles are the zeros of
//! `det(I + εJ_E(λ))`.
//!
//! On branch 1 the factor `e^{-r_n|x|}` grows with `|x|`. The quadratures are
//! still exact in the limit for compactly supported `u`, but widening the
//! support on such a branch worsens cancellation quickly.

use std::io::Read;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::sheets::SheetId;
use crate::spectral::{r_n, threshold, TruncatedJacobi};

/// A real profile `u` sampled on a uniform grid, zero at both ends.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileFunction {
    x0: f64,
    step: f64,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct Row {
    x: f64,
    u: f64,
}

impl ProfileFunction {
    /// Validates and stores samples `(x_k, u_k)`.
    pub fn new(xs: &[f64], us: &[f64]) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if xs.len() != us.len() {
            return bad("profile x and u columns differ in length".into());
        }
        if xs.len() < 3 {
            return bad("profile needs at least three samples".into());
        }
        if xs.iter().chain(us).any(|v| !v.is_finite()) {
            return bad("profile contains non-finite values".into());
        }
        let step = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
        if !(step > 0.0) {
            return bad("profile grid must be increasing".into());
        }
        for (k, x) in xs.iter().enumerate() {
            let want = xs[0] + k as f64 * step;
            if (x - want).abs() > 1e-9 * step.max(want.abs()) {
                return bad(format!("profile grid is not uniform at sample {k} (x = {x})"));
            }
        }
        if us[0] != 0.0 || us[us.len() - 1] != 0.0 {
            return bad("profile must vanish at both ends of its grid".into());
        }
        Ok(ProfileFunction {
            x0: xs[0],
            step,
            values: us.to_vec(),
        })
    }

    /// Reads a two-column CSV with header `x,u`.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
        if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "u" {
            return Err(Error::Parse(format!(
                "profile header must be `x,u`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let (mut xs, mut us) = (Vec::new(), Vec::new());
        for row in rdr.deserialize::<Row>() {
            let row = row.map_err(|e| Error::Parse(e.to_string()))?;
            xs.push(row.x);
            us.push(row.u);
        }
        Self::new(&xs, &us)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_csv(file)
    }

    /// Indicator of `[-a, a]` on `[-half_width, half_width]` with `intervals`
    /// grid cells. Nodes at `±a` carry the value 1/2, which keeps the
    /// trapezoidal rule second order across the jumps.
    pub fn boxcar(a: f64, half_width: f64, intervals: usize) -> Result<Self> {
        if !(a > 0.0 && half_width > a) || intervals < 2 {
            return Err(Error::InvalidParameter(format!(
                "boxcar needs 0 < a < half_width and >= 2 intervals (a = {a}, half_width = {half_width})"
            )));
        }
        let step = 2.0 * half_width / intervals as f64;
        let xs: Vec<f64> = (0..=intervals)
            .map(|k| -half_width + k as f64 * step)
            .collect();
        let tol = 1e-9 * step;
        let us: Vec<f64> = xs
            .iter()
            .map(|x| {
                let d = x.abs() - a;
                if d.abs() <= tol {
                    0.5
                } else if d < 0.0 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        Self::new(&xs, &us)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn x(&self, k: usize) -> f64 {
        self.x0 + k as f64 * self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Trapezoid weights times samples, `w_k u_k`.
    fn weighted(&self) -> Vec<f64> {
        let last = self.values.len() - 1;
        self.values
            .iter()
            .enumerate()
            .map(|(k, u)| {
                let w = if k == 0 || k == last { 0.5 } else { 1.0 };
                w * self.step * u
            })
            .collect()
    }
}

/// `y_n(λ) = r_n(λ) √ν_n` on branch `l`.
pub fn y_n(lambda: Complex64, n: usize, l: u8) -> Result<Complex64> {
    Ok(r_n(lambda, n, l)? * threshold(n).sqrt())
}

/// `η_n(λ; x) = ν_n^{1/4} e^{-r_n(λ)|x|}` on branch `l`.
pub fn eta_n(lambda: Complex64, n: usize, l: u8, x: f64) -> Result<Complex64> {
    Ok(threshold(n).powf(0.25) * (-r_n(lambda, n, l)? * x.abs()).exp())
}

/// `I_n(λ; u) = ∫ η_n(λ; x) u(x) dx` by the trapezoidal rule.
pub fn i_n(lambda: Complex64, n: usize, l: u8, u: &ProfileFunction) -> Result<Complex64> {
    let r = r_n(lambda, n, l)?;
    let scale = threshold(n).powf(0.25);
    Ok(u.weighted()
        .iter()
        .enumerate()
        .map(|(k, wu)| *wu * (-r * u.x(k).abs()).exp())
        .sum::<Complex64>()
        * scale)
}

/// `𝔰_{n,ε}^E(λ) = ((I + εJ_E(λ))^{-1} e_n, e_n)` on the size-`size` truncation.
pub fn s_scalar(lambda: Complex64, eps: f64, sheet: SheetId, n: usize, size: usize) -> Result<Complex64> {
    let m = TruncatedJacobi::build(lambda, eps, sheet, size)?;
    Ok(m.solve_unit_vector(n)?[n])
}

/// `(R_n(λ)u, u)`: double trapezoidal rule for the kernel `e^{-r|x-x'|}/(2r)`.
///
/// The kernel depends on `|k - k'|` only, so the sum is taken over diagonals.
pub fn free_resolvent_form(lambda: Complex64, n: usize, l: u8, u: &ProfileFunction) -> Result<Complex64> {
    let r = r_n(lambda, n, l)?;
    let wu = u.weighted();
    let m = wu.len();
    let ratio = (-r * u.step()).exp();
    let mut kernel = Complex64::new(1.0, 0.0);
    let mut total = Complex64::new(0.0, 0.0);
    for d in 0..m {
        let diag: f64 = (0..m - d).map(|k| wu[k] * wu[k + d]).sum();
        let mult = if d == 0 { 1.0 } else { 2.0 };
        total += kernel * (mult * diag);
        kernel *= ratio;
    }
    Ok(total / (2.0 * r))
}

/// The weighted resolvent `𝔯_{n,ε}^E(λ; u)`.
pub fn weighted_resolvent(
    lambda: Complex64,
    eps: f64,
    sheet: SheetId,
    n: usize,
    size: usize,
    u: &ProfileFunction,
) -> Result<Complex64> {
    let l = sheet.branch(n as isize);
    let form = free_resolvent_form(lambda, n, l, u)?;
    let i = i_n(lambda, n, l, u)?;
    let y = y_n(lambda, n, l)?;
    let s = s_scalar(lambda, eps, sheet, n, size)?;
    Ok(form + i * i / (2.0 * y) * (s - 1.0))
}

/// `max_m |𝔰_m(λ)|` over the channels `m ∈ {n-1, n, n+1}`; infinite when the
/// elimination meets a vanishing pivot.
pub fn s_peak(lambda: Complex64, eps: f64, sheet: SheetId, n: usize, size: usize) -> Result<f64> {
    let m = TruncatedJacobi::build(lambda, eps, sheet, size)?;
    let mut best: f64 = 0.0;
    for ch in n.saturating_sub(1)..=n + 1 {
        match m.solve_unit_vector(ch) {
            Ok(x) => best = best.max(x[ch].norm()),
            Err(Error::NearSingular { .. }) => return Ok(f64::INFINITY),
            Err(e) => return Err(e),
        }
    }
    Ok(best)
}

/// Refines a pole of `𝔰_n` by Newton on `1/𝔰_n` with a central-difference
/// derivative. Reaching a numerically singular elimination counts as arrival.
pub fn refine_s_pole(
    seed: Complex64,
    eps: f64,
    sheet: SheetId,
    n: usize,
    size: usize,
) -> Result<Complex64> {
    let f = |z: Complex64| s_scalar(z, eps, sheet, n, size).map(|s| s.inv());
    let mut lambda = seed;
    for _ in 0..crate::solvers::MAX_ITERATIONS {
        let h = 1e-7 * (lambda - threshold(n)).norm().max(1e-12);
        let vals = (f(lambda), f(lambda + h), f(lambda - h));
        let (g, gp, gm) = match vals {
            (Ok(a), Ok(b), Ok(c)) => (a, b, c),
            (Err(Error::NearSingular { .. }), _, _) => return Ok(lambda),
            (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => return Err(e),
        };
        let step = g / ((gp - gm) / (2.0 * h));
        if !step.is_finite() {
            break;
        }
        lambda -= step;
        if step.norm() <= 1e-14 * lambda.norm().max(1.0) {
            return Ok(lambda);
        }
    }
    Err(Error::NoConvergence {
        iterations: crate::solvers::MAX_ITERATIONS,
        last: lambda,
    })
}

/// Pole candidates of `𝔰` in the lower half-disc `|λ - ν_n| ≤ radius`:
/// strict local maxima of [`s_peak`] on a log-polar grid (as used by
/// [`crate::solvers::threshold_scan`]) exceeding `min_peak`, refined by
/// [`refine_s_pole`] and kept when `|𝔰|` then exceeds `10⁸`.
pub fn s_poles_near(
    sheet: SheetId,
    eps: f64,
    n: usize,
    radius: f64,
    resolution: usize,
    size: usize,
    min_peak: f64,
) -> Result<Vec<Complex64>> {
    let centre = threshold(n);
    let (u0, u1) = ((radius * 1e-9).ln(), radius.ln());
    let (v0, v1) = (-std::f64::consts::PI, 0.0);
    let nr = resolution;
    let at = |i: usize, j: usize| {
        let u = u0 + (u1 - u0) * i as f64 / (nr - 1) as f64;
        let v = v0 + (v1 - v0) * j as f64 / (nr - 1) as f64;
        centre + Complex64::new(u, v).exp()
    };
    let mut peak = vec![0.0; nr * nr];
    for j in 0..nr {
        for i in 0..nr {
            peak[j * nr + i] = s_peak(at(i, j), eps, sheet, n, size).unwrap_or(f64::NAN);
        }
    }
    let mut poles: Vec<Complex64> = Vec::new();
    for j in 1..nr - 1 {
        for i in 1..nr - 1 {
            let p = peak[j * nr + i];
            if !(p >= min_peak) {
                continue;
            }
            let neighbours = [(i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)];
            if neighbours.iter().all(|&(a, b)| !(peak[b * nr + a] >= p)) {
                let Ok(z) = refine_s_pole(at(i, j), eps, sheet, n, size) else {
                    continue;
                };
                let confirmed = s_peak(z, eps, sheet, n, size).is_ok_and(|v| v >= 1e8);
                let inside = (z - centre).norm() <= radius && z.im <= 0.0;
                let fresh = poles.iter().all(|w| (w - z).norm() > 1e-8 * z.norm());
                if confirmed && inside && fresh {
                    poles.push(z);
                }
            }
        }
    }
    Ok(poles)
}
