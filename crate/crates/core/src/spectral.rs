//! Branch-aware entries of the Jacobi matrix `J_E(λ)` and the truncated
//! operator `I + εJ_E(λ)`.
//!
//! `J_E(λ)` has zero diagonal and off-diagonal entries `b_n^E(λ)`, `n ≥ 1`,
//! built from the square roots `r_n(λ) = (ν_n - λ)^{1/2}` taken on the branches
//! recorded by the sheet `E`. The condition `det(I + εJ_E(λ)) = 0` locates
//! eigenvalues (physical sheet) and resonances (other sheets).
//!
//! Everything here is pure and cheap: building a truncation of size `N` and
//! running the determinant recurrence are both `O(N)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sheets::SheetId;

/// Pivot magnitude under which a tridiagonal elimination is reported singular.
pub const SINGULAR_PIVOT: f64 = 1e-14;

/// Magnitude above which the determinant recurrence is rescaled by a power of two.
const RESCALE_ABOVE: f64 = 1e150;
const RESCALE_BITS: i32 = 498; // 2^498 ≈ 1e150

/// The threshold `ν_n = n + 1/2`.
#[inline]
pub fn threshold(n: usize) -> f64 {
    n as f64 + 0.5
}

/// Truncation size recommended for work near threshold index `n_star`.
pub fn default_truncation(n_star: usize) -> usize {
    4 * (n_star + 2) + 60
}

/// `|w|^{1/2} e^{i(arg(w)/2 + jπ)}` with the principal argument in `(-π, π]`.
///
/// The negative real axis always takes `arg = π`, independent of the sign of a
/// zero imaginary part. Returns 0 for `w = 0`.
pub fn branch_sqrt(w: Complex64, j: u8) -> Complex64 {
    let root = if w.im == 0.0 {
        if w.re >= 0.0 {
            Complex64::new(w.re.sqrt(), 0.0)
        } else {
            Complex64::new(0.0, (-w.re).sqrt())
        }
    } else {
        Complex64::from_polar(w.norm().sqrt(), 0.5 * w.im.atan2(w.re))
    };
    if j & 1 == 1 {
        -root
    } else {
        root
    }
}

/// `r_n(λ, l) = (ν_n - λ)^{1/2}_l`.
pub fn r_n(lambda: Complex64, n: usize, l: u8) -> Result<Complex64> {
    let w = Complex64::new(threshold(n), 0.0) - lambda;
    if w == Complex64::new(0.0, 0.0) {
        return Err(Error::ThresholdCollision { lambda, n });
    }
    Ok(branch_sqrt(w, l))
}

/// Square of the off-diagonal entry, `(b_n^E)² = n / (4 r_n r_{n-1})`.
///
/// The determinant, the elimination pivots and the 3×3 reduction depend only on
/// these squares, so they carry no outer square-root branch choice.
pub fn b_n_squared(lambda: Complex64, n: usize, sheet: SheetId) -> Result<Complex64> {
    debug_assert!(n >= 1);
    let rn = r_n(lambda, n, sheet.branch(n as isize))?;
    let rm = r_n(lambda, n - 1, sheet.branch(n as isize - 1))?;
    Ok(Complex64::new(n as f64, 0.0) / (4.0 * rn * rm))
}

/// The Jacobi entry `b_n^E(λ) = ½ (n / (r_n r_{n-1}))^{1/2}`, `n ≥ 1`.
pub fn b_n(lambda: Complex64, n: usize, sheet: SheetId) -> Result<Complex64> {
    assert!(n >= 1, "b_n is defined for n >= 1");
    let rn = r_n(lambda, n, sheet.branch(n as isize))?;
    let rm = r_n(lambda, n - 1, sheet.branch(n as isize - 1))?;
    Ok(0.5 * branch_sqrt(Complex64::new(n as f64, 0.0) / (rn * rm), 0))
}

/// `d b_n^E / dλ = b_n^E · ¼ (1/(ν_n - λ) + 1/(ν_{n-1} - λ))`.
pub fn db_n(lambda: Complex64, n: usize, sheet: SheetId) -> Result<Complex64> {
    let b = b_n(lambda, n, sheet)?;
    Ok(b * log_derivative_factor(lambda, n))
}

#[inline]
fn log_derivative_factor(lambda: Complex64, n: usize) -> Complex64 {
    let a = Complex64::new(threshold(n), 0.0) - lambda;
    let c = Complex64::new(threshold(n - 1), 0.0) - lambda;
    0.25 * (a.inv() + c.inv())
}

/// A determinant carried as `mantissa · 2^exponent`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledDet {
    pub mantissa: Complex64,
    pub exponent: i32,
}

impl ScaledDet {
    pub fn value(&self) -> Complex64 {
        self.mantissa * 2f64.powi(self.exponent)
    }
}

/// Value and λ-derivative of the truncated determinant, sharing one scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetDerivative {
    pub value: Complex64,
    pub derivative: Complex64,
    pub exponent: i32,
}

impl DetDerivative {
    /// The Newton step `D / D'`, independent of the tracked scale.
    pub fn newton_step(&self) -> Complex64 {
        self.value / self.derivative
    }

    pub fn unscaled(&self) -> (Complex64, Complex64) {
        let s = 2f64.powi(self.exponent);
        (self.value * s, self.derivative * s)
    }
}

/// The `N × N` truncation of `I + εJ_E(λ)`: unit diagonal and symmetric
/// (not Hermitian) off-diagonal `offdiag[k-1] = ε b_k^E(λ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedJacobi {
    offdiag: Vec<Complex64>,
    eps: f64,
    sheet: SheetId,
    lambda: Complex64,
}

impl TruncatedJacobi {
    pub fn build(lambda: Complex64, eps: f64, sheet: SheetId, size: usize) -> Result<Self> {
        if size < 1 {
            return Err(Error::InvalidParameter("truncation size must be >= 1".into()));
        }
        // ν_{N-1} is the last threshold entering b_{N-1}; reject every ν up to ν_N.
        r_n(lambda, size, 0)?;
        let offdiag = (1..size)
            .map(|k| b_n(lambda, k, sheet).map(|b| eps * b))
            .collect::<Result<Vec<_>>>()?;
        Ok(TruncatedJacobi {
            offdiag,
            eps,
            sheet,
            lambda,
        })
    }

    /// A unit-diagonal symmetric tridiagonal matrix with arbitrary couplings.
    pub fn from_offdiag(offdiag: Vec<Complex64>) -> Self {
        TruncatedJacobi {
            offdiag,
            eps: f64::NAN,
            sheet: SheetId::PHYSICAL,
            lambda: Complex64::new(f64::NAN, f64::NAN),
        }
    }

    pub fn size(&self) -> usize {
        self.offdiag.len() + 1
    }

    pub fn offdiag(&self) -> &[Complex64] {
        &self.offdiag
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn sheet(&self) -> SheetId {
        self.sheet
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    /// Leading-principal-minor recurrence `D_k = D_{k-1} - c_{k-1}² D_{k-2}`
    /// with power-of-two rescaling against overflow.
    pub fn det_scaled(&self) -> ScaledDet {
        let mut prev = Complex64::new(1.0, 0.0);
        let mut cur = Complex64::new(1.0, 0.0);
        let mut exponent = 0;
        for c in &self.offdiag {
            let next = cur - c * c * prev;
            prev = cur;
            cur = next;
            if cur.norm() > RESCALE_ABOVE {
                let s = 2f64.powi(-RESCALE_BITS);
                cur *= s;
                prev *= s;
                exponent += RESCALE_BITS;
            }
        }
        ScaledDet {
            mantissa: cur,
            exponent,
        }
    }

    pub fn det(&self) -> Complex64 {
        self.det_scaled().value()
    }

    /// Solves `M x = e_n` by tridiagonal elimination; `x[n]` is the diagonal
    /// resolvent entry `((I + εJ)^{-1} e_n, e_n)`.
    pub fn solve_unit_vector(&self, n: usize) -> Result<Vec<Complex64>> {
        let size = self.size();
        if n >= size {
            return Err(Error::InvalidParameter(format!(
                "unit vector index {n} outside truncation {size}"
            )));
        }
        let mut rhs = vec![Complex64::new(0.0, 0.0); size];
        rhs[n] = Complex64::new(1.0, 0.0);
        self.solve(rhs)
    }

    pub(crate) fn solve(&self, mut rhs: Vec<Complex64>) -> Result<Vec<Complex64>> {
        let size = self.size();
        let mut pivots = Vec::with_capacity(size);
        pivots.push(Complex64::new(1.0, 0.0));
        for k in 1..size {
            let c = self.offdiag[k - 1];
            let m = c / pivots[k - 1];
            let d = Complex64::new(1.0, 0.0) - m * c;
            if d.norm() < SINGULAR_PIVOT {
                return Err(Error::NearSingular {
                    row: k,
                    pivot: d.norm(),
                });
            }
            let r = rhs[k - 1];
            rhs[k] -= m * r;
            pivots.push(d);
        }
        let mut x = rhs;
        x[size - 1] /= pivots[size - 1];
        for k in (0..size - 1).rev() {
            let next = x[k + 1];
            x[k] = (x[k] - self.offdiag[k] * next) / pivots[k];
        }
        Ok(x)
    }
}

/// Determinant of the sheet-`E` truncation without materializing the matrix.
pub fn det_value(lambda: Complex64, eps: f64, sheet: SheetId, size: usize) -> Result<ScaledDet> {
    if size < 1 {
        return Err(Error::InvalidParameter("truncation size must be >= 1".into()));
    }
    r_n(lambda, size, 0)?;
    let one = Complex64::new(1.0, 0.0);
    let (mut d_prev, mut d_cur) = (one, one);
    let mut exponent = 0;
    let mut r_prev = r_n(lambda, 0, sheet.branch(0))?;
    let quarter_eps2 = 0.25 * eps * eps;
    for k in 1..size {
        let r_k = r_n(lambda, k, sheet.branch(k as isize))?;
        let c2 = quarter_eps2 * k as f64 / (r_k * r_prev);
        r_prev = r_k;
        let d_next = d_cur - c2 * d_prev;
        d_prev = d_cur;
        d_cur = d_next;
        if d_cur.norm() > RESCALE_ABOVE {
            let s = 2f64.powi(-RESCALE_BITS);
            d_cur *= s;
            d_prev *= s;
            exponent += RESCALE_BITS;
        }
    }
    Ok(ScaledDet {
        mantissa: d_cur,
        exponent,
    })
}

/// Determinant of the sheet-`E` truncation together with its λ-derivative.
///
/// With `c_k = ε b_k`, `(c_k²)' = 2 c_k c_k'` and
/// `D'_k = D'_{k-1} - (c²)'_{k-1} D_{k-2} - c²_{k-1} D'_{k-2}`.
pub fn det_and_derivative(
    lambda: Complex64,
    eps: f64,
    sheet: SheetId,
    size: usize,
) -> Result<DetDerivative> {
    if size < 1 {
        return Err(Error::InvalidParameter("truncation size must be >= 1".into()));
    }
    r_n(lambda, size, 0)?;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let (mut d_prev, mut d_cur) = (one, one);
    let (mut dd_prev, mut dd_cur) = (zero, zero);
    let mut exponent = 0;
    let mut r_prev = r_n(lambda, 0, sheet.branch(0))?;
    let mut inv_prev = (Complex64::new(threshold(0), 0.0) - lambda).inv();
    let quarter_eps2 = 0.25 * eps * eps;
    for k in 1..size {
        let r_k = r_n(lambda, k, sheet.branch(k as isize))?;
        let inv_k = (Complex64::new(threshold(k), 0.0) - lambda).inv();
        let c2 = quarter_eps2 * k as f64 / (r_k * r_prev);
        // (b²)' = b² · ½ (1/(ν_k-λ) + 1/(ν_{k-1}-λ))
        let dc2 = c2 * 0.5 * (inv_k + inv_prev);
        r_prev = r_k;
        inv_prev = inv_k;
        let d_next = d_cur - c2 * d_prev;
        let dd_next = dd_cur - dc2 * d_prev - c2 * dd_prev;
        d_prev = d_cur;
        d_cur = d_next;
        dd_prev = dd_cur;
        dd_cur = dd_next;
        if d_cur.norm().max(dd_cur.norm()) > RESCALE_ABOVE {
            let s = 2f64.powi(-RESCALE_BITS);
            d_cur *= s;
            d_prev *= s;
            dd_cur *= s;
            dd_prev *= s;
            exponent += RESCALE_BITS;
        }
    }
    Ok(DetDerivative {
        value: d_cur,
        derivative: dd_cur,
        exponent,
    })
}

/// Real off-diagonal entries of `J(λ)` on the physical sheet for real `λ < ν_0`.
pub fn physical_offdiag(lambda: f64, size: usize) -> Result<Vec<f64>> {
    if !(lambda < threshold(0)) {
        return Err(Error::InvalidParameter(format!(
            "physical Jacobi entries need real lambda < 1/2, got {lambda}"
        )));
    }
    Ok((1..size)
        .map(|n| {
            let a = (threshold(n) - lambda).powf(0.25);
            let c = (threshold(n - 1) - lambda).powf(0.25);
            (n as f64).sqrt() / (2.0 * a * c)
        })
        .collect())
}

/// Number of eigenvalues of the real symmetric truncation `J_∅^{(N)}(λ)`
/// strictly above `1/ε`, by a Sturm sequence.
///
/// For `λ ∈ (0, ν_0)` this approximates the number of eigenvalues of the
/// Hamiltonian in `(0, λ)`.
pub fn count_above(lambda: f64, eps: f64, size: usize) -> Result<usize> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let offdiag = physical_offdiag(lambda, size)?;
    Ok(size - sturm_count_below(&offdiag, 1.0 / eps))
}

/// Eigenvalues `< x` of the zero-diagonal symmetric tridiagonal matrix with the
/// given couplings (negative pivots of `LDLᵀ` of `T - x`).
pub fn sturm_count_below(offdiag: &[f64], x: f64) -> usize {
    let pivmin = f64::MIN_POSITIVE.sqrt() * (1.0 + x.abs());
    let mut q = -x;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    let mut count = usize::from(q < 0.0);
    for b in offdiag {
        q = -x - b * b / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn branch_sqrt_conventions() {
        assert_eq!(branch_sqrt(c(4.0, 0.0), 0), c(2.0, 0.0));
        assert_eq!(branch_sqrt(c(4.0, 0.0), 1), c(-2.0, 0.0));
        assert_eq!(branch_sqrt(c(-1.0, 0.0), 0), c(0.0, 1.0));
        // a signed zero does not move the negative axis off arg = π
        assert_eq!(branch_sqrt(c(-1.0, -0.0), 0), c(0.0, 1.0));
        assert_eq!(branch_sqrt(c(0.0, 0.0), 0), c(0.0, 0.0));
        let w = c(-3.0, -1e-300);
        assert!(branch_sqrt(w, 0).im < 0.0);
    }

    #[test]
    fn r_n_examples() {
        let half = 0.5f64.sqrt();
        assert!(close(r_n(c(0.0, 0.0), 0, 0).unwrap(), c(half, 0.0), 1e-15));
        assert!(close(r_n(c(0.0, 0.0), 0, 1).unwrap(), c(-half, 0.0), 1e-15));
        let v = r_n(c(1.5, -0.001), 1, 0).unwrap();
        let m = 0.001f64.sqrt() * (PI / 4.0).cos();
        assert!(close(v, c(m, m), 1e-12));
        assert!(matches!(
            r_n(c(2.5, 0.0), 2, 0),
            Err(Error::ThresholdCollision { n: 2, .. })
        ));
    }

    #[test]
    fn b_n_examples() {
        let b1 = b_n(c(0.0, 0.0), 1, SheetId::PHYSICAL).unwrap();
        assert!(close(b1, c(0.5372849659, 0.0), 1e-10));
        let b2 = b_n(c(0.0, 0.0), 2, SheetId::PHYSICAL).unwrap();
        assert!(close(b2, c(0.5081327482, 0.0), 1e-10));
        // flipping r_0 negates b_1²
        let lam = c(1.0, -1.0);
        let phys = b_n(lam, 1, SheetId::PHYSICAL).unwrap();
        let flip = b_n(lam, 1, SheetId::from_members([0])).unwrap();
        assert!(close(flip * flip, -(phys * phys), 1e-14));
        assert!((flip.norm() - phys.norm()).abs() < 1e-15);
    }

    #[test]
    fn db_n_matches_closed_form_and_finite_difference() {
        let d = db_n(c(0.0, 0.0), 1, SheetId::PHYSICAL).unwrap();
        assert!(close(d, c(0.3581899773, 0.0), 1e-9));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let lam = c(rng.gen_range(-1.0..6.0), rng.gen_range(-2.0..-0.05));
            let sheet = SheetId::from_mask(rng.gen_range(0..64));
            let n = rng.gen_range(1..8);
            let h = 1e-6;
            let fd = (b_n(lam + h, n, sheet).unwrap() - b_n(lam - h, n, sheet).unwrap()) / (2.0 * h);
            let an = db_n(lam, n, sheet).unwrap();
            assert!((fd - an).norm() <= 1e-7 * an.norm().max(1e-3), "{fd} vs {an}");
        }
    }

    #[test]
    fn build_examples() {
        let m = TruncatedJacobi::build(c(0.0, 0.0), 0.0, SheetId::PHYSICAL, 5).unwrap();
        assert!(m.offdiag().iter().all(|z| z.norm() == 0.0));
        assert_eq!(m.det(), c(1.0, 0.0));
        let m = TruncatedJacobi::build(c(0.0, 0.0), 0.5, SheetId::PHYSICAL, 3).unwrap();
        assert!(close(m.offdiag()[0], c(0.2686424829, 0.0), 1e-9));
        assert!(close(m.offdiag()[1], c(0.2540663741, 0.0), 1e-9));
        assert!(TruncatedJacobi::build(c(3.5, 0.0), 0.5, SheetId::PHYSICAL, 3).is_err());
        assert!(TruncatedJacobi::build(c(2.5, 0.0), 0.5, SheetId::PHYSICAL, 3).is_err());
        assert!(TruncatedJacobi::build(c(4.5, 0.0), 0.5, SheetId::PHYSICAL, 3).is_ok());
    }

    #[test]
    fn build_is_schwarz_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let lam = c(rng.gen_range(-1.0..8.0), rng.gen_range(-3.0..-1e-3));
            let sheet = SheetId::from_mask(rng.gen_range(0..256));
            let a = TruncatedJacobi::build(lam, 0.3, sheet, 30).unwrap();
            let b = TruncatedJacobi::build(lam.conj(), 0.3, sheet, 30).unwrap();
            for (x, y) in a.offdiag().iter().zip(b.offdiag()) {
                assert!(close(x.conj(), *y, 1e-14));
            }
        }
    }

    #[test]
    fn small_determinants() {
        let cc = c(0.3, -0.7);
        let m = TruncatedJacobi::from_offdiag(vec![cc]);
        assert!(close(m.det(), c(1.0, 0.0) - cc * cc, 1e-15));
        let r = det_and_derivative(c(0.2, 0.0), 0.0, SheetId::PHYSICAL, 12).unwrap();
        assert_eq!(r.unscaled(), (c(1.0, 0.0), c(0.0, 0.0)));
    }

    #[test]
    fn two_by_two_derivative() {
        let lam = c(0.7, -0.4);
        let eps = 0.4;
        let sheet = SheetId::from_members([0]);
        let b1 = b_n(lam, 1, sheet).unwrap();
        let db1 = db_n(lam, 1, sheet).unwrap();
        let (v, d) = det_and_derivative(lam, eps, sheet, 2).unwrap().unscaled();
        assert!(close(v, 1.0 - eps * eps * b1 * b1, 1e-14));
        assert!(close(d, -2.0 * eps * eps * b1 * db1, 1e-13));
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sheets = [SheetId::PHYSICAL, SheetId::from_members([0]), SheetId::from_members([1, 2, 4, 5])];
        for sheet in sheets {
            for _ in 0..30 {
                let lam = c(rng.gen_range(-0.5..7.0), rng.gen_range(-1.5..-0.05));
                let eps = rng.gen_range(0.05..0.9);
                let h = 1e-6;
                let f = |z| TruncatedJacobi::build(z, eps, sheet, 40).unwrap().det();
                let fd = (f(lam + h) - f(lam - h)) / (2.0 * h);
                let (_, d) = det_and_derivative(lam, eps, sheet, 40).unwrap().unscaled();
                assert!((fd - d).norm() <= 1e-6 * d.norm().max(1e-6), "{fd} vs {d}");
            }
        }
    }

    #[test]
    fn streaming_determinant_matches_built_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let lam = c(rng.gen_range(-0.5..7.0), rng.gen_range(-1.5..-0.01));
            let sheet = SheetId::from_mask(rng.gen_range(0..256));
            let eps = rng.gen_range(0.05..0.9);
            let a = TruncatedJacobi::build(lam, eps, sheet, 50).unwrap().det();
            let b = det_value(lam, eps, sheet, 50).unwrap().value();
            let (d, _) = det_and_derivative(lam, eps, sheet, 50).unwrap().unscaled();
            assert!((a - b).norm() <= 1e-13 * a.norm().max(1.0));
            assert!((a - d).norm() <= 1e-13 * a.norm().max(1.0));
        }
    }

    #[test]
    fn overflow_is_rescaled() {
        let m = TruncatedJacobi::from_offdiag(vec![c(0.0, 1e40); 20]);
        let s = m.det_scaled();
        assert!(s.exponent > 0);
        assert!(s.mantissa.norm().is_finite());
        // D_k = D_{k-1} + 1e80 D_{k-2}: D_20 = 11·1e800 to leading order
        let log10 = s.mantissa.norm().log10() + s.exponent as f64 * 2f64.log10();
        assert!((log10 - 800.0 - 11f64.log10()).abs() < 1e-6, "{log10}");
    }

    #[test]
    fn unit_vector_solves() {
        let m = TruncatedJacobi::build(c(0.3, 0.0), 0.0, SheetId::PHYSICAL, 6).unwrap();
        let x = m.solve_unit_vector(2).unwrap();
        for (k, v) in x.iter().enumerate() {
            assert_eq!(*v, if k == 2 { c(1.0, 0.0) } else { c(0.0, 0.0) });
        }
        let cc = c(0.4, 0.3);
        let m = TruncatedJacobi::from_offdiag(vec![cc]);
        let x = m.solve_unit_vector(0).unwrap();
        let den = 1.0 - cc * cc;
        assert!(close(x[0], 1.0 / den, 1e-15));
        assert!(close(x[1], -cc / den, 1e-15));
        let singular = TruncatedJacobi::from_offdiag(vec![c(1.0, 0.0)]);
        assert!(matches!(
            singular.solve_unit_vector(0),
            Err(Error::NearSingular { .. })
        ));
    }

    #[test]
    fn unit_vector_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let n = rng.gen_range(2..40);
            let off: Vec<Complex64> = (1..n)
                .map(|_| c(rng.gen_range(-0.45..0.45), rng.gen_range(-0.45..0.45)))
                .collect();
            let m = TruncatedJacobi::from_offdiag(off.clone());
            let j = rng.gen_range(0..n);
            let x = m.solve_unit_vector(j).unwrap();
            for k in 0..n {
                let mut y = x[k];
                if k > 0 {
                    y += off[k - 1] * x[k - 1];
                }
                if k + 1 < n {
                    y += off[k] * x[k + 1];
                }
                let e = if k == j { 1.0 } else { 0.0 };
                assert!((y - e).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn count_above_small_coupling_is_zero() {
        assert_eq!(count_above(0.25, 0.05, 200).unwrap(), 0);
        assert!(count_above(0.6, 0.05, 20).is_err());
    }

    #[test]
    fn tail_of_offdiag_tends_to_half() {
        let lam = c(1.3, -0.2);
        let mut worst: f64 = 0.0;
        for n in 10..400 {
            let b = b_n(lam, n, SheetId::PHYSICAL).unwrap();
            worst = worst.max((b - 0.5).norm() * n as f64);
        }
        // fitted C: |b_n - 1/2| ≤ C/n with a bounded C
        assert!(worst < 1.5, "C = {worst}");
        let far = b_n(lam, 100_000, SheetId::PHYSICAL).unwrap();
        assert!((far - 0.5).norm() < 1.5e-5);
    }
}
