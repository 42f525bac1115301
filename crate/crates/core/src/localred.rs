//! Reduction of `det(I + εJ_E(λ))` to a 3×3 determinant near a threshold `ν_n`.
//!
//! Removing the two couplings that touch row `n` splits `J_E = S + T`, where
//! `S` is block diagonal (rows `0..n`, row `n`, rows `n+1..`). With
//! `R = (I + εS)^{-1}` the full condition becomes `det(I + εA) = 0` for a 3×3
//! matrix `A` built from `b_n`, `b_{n+1}` and the resolvent entries
//! `f_kl = (R e_{n+k-2}, e_{n+l-2})`.
//!
//! In the uniformizing variable `κ` (`λ = ν_n - κ⁴`) the four sheets around
//! `ν_n` are glued into one disc, one angular sector per sheet.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::Result;
use crate::sheets::SheetId;
use crate::spectral::{b_n, threshold, TruncatedJacobi};

type C3 = [[Complex64; 3]; 3];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `J_E = S + T` on the truncation, as off-diagonal sequences (no `ε`).
#[derive(Clone, Debug, PartialEq)]
pub struct JacobiSplit {
    /// Couplings of `S`: those of `J_E` with entries `n-1` and `n` zeroed.
    pub s: Vec<Complex64>,
    /// Couplings of `T`: `b_n` at `n-1`, `b_{n+1}` at `n`, zero elsewhere.
    pub t: Vec<Complex64>,
}

pub fn split(lambda: Complex64, sheet: SheetId, n: usize, size: usize) -> Result<JacobiSplit> {
    check_window(n, size)?;
    let full = TruncatedJacobi::build(lambda, 1.0, sheet, size)?;
    let mut s = full.offdiag().to_vec();
    let mut t = vec![ZERO; s.len()];
    for k in [n.wrapping_sub(1), n] {
        if k < s.len() {
            t[k] = s[k];
            s[k] = ZERO;
        }
    }
    Ok(JacobiSplit { s, t })
}

fn check_window(n: usize, size: usize) -> Result<()> {
    if n + 2 > size {
        return Err(crate::Error::InvalidParameter(format!(
            "threshold index {n} needs truncation > {}, got {size}",
            n + 1
        )));
    }
    Ok(())
}

/// `f_kl = (R e_{n+k-2}, e_{n+l-2})`, stored as `f[k-1][l-1]`; `e_{-1} = 0`.
pub fn f_scalars(lambda: Complex64, eps: f64, sheet: SheetId, n: usize, size: usize) -> Result<C3> {
    let sp = split(lambda, sheet, n, size)?;
    let m = TruncatedJacobi::from_offdiag(sp.s.iter().map(|c| eps * c).collect());
    let mut f = [[ZERO; 3]; 3];
    for k in 0..3 {
        let Some(row) = (n + k).checked_sub(1) else {
            continue;
        };
        let x = m.solve_unit_vector(row)?;
        for l in 0..3 {
            if let Some(col) = (n + l).checked_sub(1) {
                f[k][l] = x[col];
            }
        }
    }
    Ok(f)
}

/// The 3×3 matrix `A_{n,E}(ε, λ)` with the data it was built from.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalReduction {
    pub n: usize,
    pub sheet: SheetId,
    pub eps: f64,
    pub truncation: usize,
    pub lambda: Complex64,
    pub a: C3,
}

/// Coefficients of `det(I + εA) = 1 + εX + ε²Y + ε³Z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Det3Expansion {
    pub x: Complex64,
    pub y: Complex64,
    pub z: Complex64,
}

impl LocalReduction {
    pub fn matrix_i_plus_eps_a(&self) -> C3 {
        let mut m = self.a;
        for (k, row) in m.iter_mut().enumerate() {
            for v in row.iter_mut() {
                *v *= self.eps;
            }
            row[k] += ONE;
        }
        m
    }

    /// Full cofactor determinant of `I + εA`.
    pub fn det(&self) -> Complex64 {
        det_3x3(&self.matrix_i_plus_eps_a())
    }

    /// `X = tr A`, `Y` = sum of principal 2×2 minors, `Z = det A`.
    pub fn expansion(&self) -> Det3Expansion {
        let a = &self.a;
        let x = a[0][0] + a[1][1] + a[2][2];
        let minor = |i: usize, j: usize| a[i][i] * a[j][j] - a[i][j] * a[j][i];
        let y = minor(0, 1) + minor(0, 2) + minor(1, 2);
        Det3Expansion {
            x,
            y,
            z: det_3x3(a),
        }
    }

    /// `1 + εX + ε²Y`, the determinant with the rank-deficient cubic term dropped.
    pub fn reduced_det(&self) -> Complex64 {
        let e = self.expansion();
        ONE + self.eps * e.x + self.eps * self.eps * e.y
    }
}

pub fn det_3x3(m: &C3) -> Complex64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub fn local_matrix(
    lambda: Complex64,
    eps: f64,
    sheet: SheetId,
    n: usize,
    size: usize,
) -> Result<LocalReduction> {
    let f = f_scalars(lambda, eps, sheet, n, size)?;
    let bn = if n >= 1 { b_n(lambda, n, sheet)? } else { ZERO };
    let bn1 = b_n(lambda, n + 1, sheet)?;
    let delta = |i: usize, j: usize| if i == j { ONE } else { ZERO };
    let mut a = [[ZERO; 3]; 3];
    for (k, row) in a.iter_mut().enumerate() {
        for (l, v) in row.iter_mut().enumerate() {
            *v = bn * (f[0][k] * delta(1, l) + f[1][k] * delta(0, l))
                + bn1 * (f[1][k] * delta(2, l) + f[2][k] * delta(1, l));
        }
    }
    Ok(LocalReduction {
        n,
        sheet,
        eps,
        truncation: size,
        lambda,
        a,
    })
}

/// `det(I + εA_{n,E}(ε, λ))` by full cofactor expansion.
///
/// Debug builds also check it against `1 + εX + ε²Y`.
pub fn det3(lambda: Complex64, eps: f64, sheet: SheetId, n: usize, size: usize) -> Result<Complex64> {
    let red = local_matrix(lambda, eps, sheet, n, size)?;
    let full = red.det();
    debug_assert!(
        (full - red.reduced_det()).norm() <= 1e-10 * (1.0 + full.norm()),
        "cubic term of the 3x3 determinant does not vanish"
    );
    Ok(full)
}

/// `z_{n,E} = (-1)^{q+r}(n+1) + (-1)^{p+q+1} n i` for the branch triple
/// `(p, q, r) = (l_{n-1}, l_n, l_{n+1})`.
pub fn z_coefficient(sheet: SheetId, n: usize) -> Complex64 {
    let n_i = n as isize;
    let (p, q, r) = (sheet.branch(n_i - 1), sheet.branch(n_i), sheet.branch(n_i + 1));
    let sign = |e: u8| if e % 2 == 0 { 1.0 } else { -1.0 };
    Complex64::new(sign(q + r) * (n as f64 + 1.0), sign(p + q + 1) * n as f64)
}

/// Angular sectors of the `κ`-plane, each the union of two opposite
/// quarter-pi arcs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sector {
    /// `(-π, -3π/4] ∪ (0, π/4]`
    E,
    /// `(-3π/4, -π/2] ∪ (π/4, π/2]`
    F,
    /// `(-π/2, -π/4] ∪ (π/2, 3π/4]`
    G,
    /// `(-π/4, 0] ∪ (3π/4, π]`
    H,
}

/// Principal argument in `(-π, π]`.
pub fn principal_arg(z: Complex64) -> f64 {
    let a = z.im.atan2(z.re);
    if a <= -PI {
        PI
    } else {
        a
    }
}

pub fn sector_of(kappa: Complex64) -> Sector {
    let a = principal_arg(kappa);
    // fold the lower arcs onto the upper ones: the sectors are π-periodic
    let a = if a <= 0.0 { a + PI } else { a };
    let q = PI / 4.0;
    if a <= q {
        Sector::E
    } else if a <= 2.0 * q {
        Sector::F
    } else if a <= 3.0 * q {
        Sector::G
    } else {
        Sector::H
    }
}

/// The sheet on which `B_{n,E}(ε, κ)` is evaluated at `κ`.
///
/// With `E ∼_{n-1} F ∼_n G ∼_{n-1} H` as in [`SheetId::sector_chain`], the ray
/// `arg κ = 0` maps onto `(ν_{n-1}, ν_n)` and `arg κ = π/4` onto
/// `(ν_n, ν_{n+1})`. Continuity of the glued function therefore attaches the
/// sector after `Φ_E` (counter-clockwise) to the sheet reached from `E` through
/// `(ν_n, ν_{n+1})`, which is `H`, and the sector before `Φ_E` to `F`.
pub fn sector_sheet(kappa: Complex64, sheet: SheetId, n: usize) -> SheetId {
    let chain = sheet.sector_chain(n);
    match sector_of(kappa) {
        Sector::E => chain.e,
        Sector::F => chain.h,
        Sector::G => chain.g,
        Sector::H => chain.f,
    }
}

/// `λ = ν_n - κ⁴`.
pub fn lambda_of_kappa(kappa: Complex64, n: usize) -> Complex64 {
    Complex64::new(threshold(n), 0.0) - kappa.powi(4)
}

/// `det(I + εB_{n,E}(ε, κ))`: the 3×3 determinant at `λ = ν_n - κ⁴` on the
/// sheet selected by the sector of `κ`.
pub fn kappa_det(kappa: Complex64, eps: f64, sheet: SheetId, n: usize, size: usize) -> Result<Complex64> {
    let on = sector_sheet(kappa, sheet, n);
    det3(lambda_of_kappa(kappa, n), eps, on, n, size)
}
