//! Where eigenvalues and resonances can and cannot be.
//!
//! If `|ν_{n-1} - λ|·|ν_n - λ| > ε⁴n²` for every `n ≥ 1` then `‖εJ_E(λ)‖ < 1`
//! on every sheet (the moduli `|b_n^E|` do not depend on `E`), so
//! `I + εJ_E(λ)` is invertible and `λ` is neither an eigenvalue nor a
//! resonance. Only finitely many `n` need checking: beyond `N₀` the product
//! inequality follows from a quadratic bound.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::threshold;

/// Bottom of the essential spectrum of the Hamiltonian, `ν_0`.
pub const ESSENTIAL_SPECTRUM_BOTTOM: f64 = 0.5;

/// Essential spectrum `[-1, 1]` of every `J_E(λ)` (the entries tend to `1/2`).
pub const JACOBI_ESSENTIAL_SPECTRUM: (f64, f64) = (-1.0, 1.0);

/// Lower bound `1 - (1/4 + ε⁴)^{1/2}` for the eigenvalue below `ν_0`;
/// positive, hence informative, only for `ε⁴ < 3/4`.
pub fn eigenvalue_lower_bound(eps: f64) -> f64 {
    1.0 - (0.25 + eps.powi(4)).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreeRegionCertificate {
    pub lambda: Complex64,
    pub eps: f64,
    /// `N₀`: products are checked for `n = 1..=N₀`.
    pub checked_up_to: usize,
    /// `min_{n ≤ N₀} (|ν_{n-1} - λ||ν_n - λ| - ε⁴n²)`.
    pub min_margin: f64,
    pub tail_bound_ok: bool,
    /// Smallest `n ≤ N₀` whose product does not exceed `ε⁴n²`; 0 if none.
    pub witness: usize,
}

impl FreeRegionCertificate {
    /// `λ` is certified free of eigenvalues and resonances on all sheets.
    pub fn certified(&self) -> bool {
        self.min_margin > 0.0 && self.tail_bound_ok
    }
}

/// `N₀ = ⌈(t + (ε⁴t² + (1-ε⁴)/4)^{1/2}) / (1-ε⁴)⌉ + 1`, `t = max(Re λ, 0)`.
pub fn tail_start(lambda: Complex64, eps: f64) -> usize {
    let e4 = eps.powi(4);
    let t = lambda.re.max(0.0);
    ((t + (e4 * t * t + (1.0 - e4) / 4.0).sqrt()) / (1.0 - e4)).ceil() as usize + 1
}

fn check(lambda: Complex64, eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1), got {eps}")));
    }
    if !(lambda.re.is_finite() && lambda.im.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite lambda {lambda}")));
    }
    Ok(())
}

/// Checks the product inequality up to `N₀` and the tail bound beyond it.
pub fn certify_free(lambda: Complex64, eps: f64) -> Result<FreeRegionCertificate> {
    check(lambda, eps)?;
    let e4 = eps.powi(4);
    let n0 = tail_start(lambda, eps);
    let dist = |k: usize| (Complex64::new(threshold(k), 0.0) - lambda).norm();
    for k in 0..=n0 {
        if dist(k) == 0.0 {
            return Err(Error::ThresholdCollision { lambda, n: k });
        }
    }
    let mut min_margin = f64::INFINITY;
    let mut witness = 0;
    for n in 1..=n0 {
        let margin = dist(n - 1) * dist(n) - e4 * (n * n) as f64;
        if margin <= 0.0 && witness == 0 {
            witness = n;
        }
        min_margin = min_margin.min(margin);
    }
    // for n > N₀: |ν_{n-1} - λ||ν_n - λ| ≥ (n - t)² - 1/4 > ε⁴n², the quadratic
    // being increasing past its larger root
    let t = lambda.re.max(0.0);
    let m = (n0 + 1) as f64;
    let tail_bound_ok = m - 0.5 > t && (1.0 - e4) * m * m - 2.0 * t * m + t * t - 0.25 > 0.0;
    Ok(FreeRegionCertificate {
        lambda,
        eps,
        checked_up_to: n0,
        min_margin,
        tail_bound_ok,
        witness,
    })
}

/// Whether some `n ≤ N₀` has `|ν_{n-1} - λ||ν_n - λ| ≤ ε⁴n²`, with the smallest
/// such `n` (0 if none). Every resonance and eigenvalue satisfies this.
pub fn enclosure_indicator(lambda: Complex64, eps: f64) -> Result<(bool, usize)> {
    let c = certify_free(lambda, eps)?;
    Ok((c.witness != 0, c.witness))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sheets::SheetId;
    use crate::spectral::b_n;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn lower_bound_values() {
        assert_eq!(eigenvalue_lower_bound(0.0), 0.5);
        assert!(eigenvalue_lower_bound(0.75f64.powf(0.25)).abs() < 1e-15);
        assert!((eigenvalue_lower_bound(0.5) - 0.4409830056).abs() < 1e-10);
    }

    #[test]
    fn certificate_examples() {
        let cert = certify_free(c(0.2, -0.5), 0.3).unwrap();
        assert!(cert.certified());
        assert_eq!(enclosure_indicator(c(0.2, -0.5), 0.3).unwrap(), (false, 0));
        let near = certify_free(c(1.5, -1e-6), 0.1).unwrap();
        assert!(!near.certified());
        assert_eq!(near.witness, 1);
        assert!(matches!(
            certify_free(c(2.5, 0.0), 0.1),
            Err(Error::ThresholdCollision { n: 2, .. })
        ));
        assert!(certify_free(c(0.2, -0.5), 1.0).is_err());
    }

    #[test]
    fn enclosure_of_a_predicted_resonance() {
        let eps: f64 = 0.1;
        let lam = 4.5 - eps.powi(4) / 16.0 * c(9.0, 40.0);
        let (inside, n) = enclosure_indicator(lam, eps).unwrap();
        assert!(inside);
        assert!(n == 4 || n == 5);
    }

    #[test]
    fn moduli_of_entries_do_not_depend_on_sheet() {
        let lam = c(2.7, -0.4);
        for n in 1..20 {
            let m0 = b_n(lam, n, SheetId::PHYSICAL).unwrap().norm();
            for mask in [1u64, 2, 0b110110, 0xffff] {
                let m = b_n(lam, n, SheetId::from_mask(mask)).unwrap().norm();
                assert!((m - m0).abs() <= 1e-14 * m0);
            }
        }
    }

    proptest! {
        #[test]
        fn certificate_is_complement_of_enclosure(
            re in -3.0f64..12.0, im in -3.0f64..0.0, eps in 0.01f64..0.99
        ) {
            let lam = c(re, im);
            let cert = certify_free(lam, eps).unwrap();
            let (inside, _) = enclosure_indicator(lam, eps).unwrap();
            prop_assert!(cert.tail_bound_ok);
            prop_assert_eq!(cert.certified(), !inside);
        }

        #[test]
        fn certificate_is_monotone_in_eps(
            re in -3.0f64..12.0, im in -3.0f64..0.0, e1 in 0.01f64..0.99, e2 in 0.01f64..0.99
        ) {
            let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
            let lam = c(re, im);
            if certify_free(lam, hi).unwrap().certified() {
                prop_assert!(certify_free(lam, lo).unwrap().certified());
            }
        }

        #[test]
        fn tail_claim_holds_past_n0(
            re in -3.0f64..30.0, im in -5.0f64..0.0, eps in 0.01f64..0.99
        ) {
            let lam = c(re, im);
            let n0 = tail_start(lam, eps);
            let e4 = eps.powi(4);
            for n in n0 + 1..=n0 + 200 {
                let p = (threshold(n - 1) - lam).norm() * (threshold(n) - lam).norm();
                prop_assert!(p > e4 * (n * n) as f64);
            }
        }
    }
}
