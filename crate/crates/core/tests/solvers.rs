use num_complex::Complex64;
use smilansky_core::regions::certify_free;
use smilansky_core::solvers::{
    bound_state, predicted_lambda, resonance_newton3, resonance_newton_full, resonances_near, scan,
    Method, Rect, ScanOptions,
};
use smilansky_core::spectral::{default_truncation, det_value};
use smilansky_core::{threshold, Error, SheetId};

const TOL: f64 = 1e-10;

fn example() -> SheetId {
    SheetId::from_members([1, 2, 4, 5])
}

#[test]
fn bound_state_weak_coupling() {
    let l = bound_state(0.1, default_truncation(0), TOL).unwrap();
    assert!((l - 0.49999375).abs() <= 1e-5);
    assert!(l < 0.5);
    let d = det_value(Complex64::new(l, 0.0), 0.1, SheetId::PHYSICAL, default_truncation(0)).unwrap();
    assert!(d.value().norm() <= TOL);
}

#[test]
fn bound_state_at_moderate_coupling() {
    let l = bound_state(0.5, 60, TOL).unwrap();
    assert!((1.0 - 0.3125f64.sqrt()..0.5).contains(&l));
    let doubled = bound_state(0.5, 120, TOL).unwrap();
    assert!((l - doubled).abs() <= 1e-12);
    assert!(matches!(bound_state(1.0, 60, TOL), Err(Error::InvalidParameter(_))));
}

#[test]
fn resonance_of_first_example() {
    let eps: f64 = 0.1;
    let r = resonance_newton_full(SheetId::from_members([0]), 1, eps, default_truncation(1), TOL, None).unwrap();
    let want = Complex64::new(1.5 - 1.875e-5, -2.5e-5);
    assert!((r.predicted - want).norm() <= 1e-15);
    assert!((r.lambda - want).norm() <= eps.powi(5));
    assert!(r.residual <= TOL);
    assert!(r.lambda.im < 0.0);
    assert!(r.stability <= 1e-9);
    assert_eq!(r.method, Method::NewtonFull);
}

#[test]
fn methods_agree_and_conjugates_are_roots() {
    let size = default_truncation(4);
    let a = resonance_newton_full(example(), 4, 0.1, size, TOL, None).unwrap();
    let b = resonance_newton3(example(), 4, 0.1, size, TOL).unwrap();
    assert!((a.lambda - b.lambda).norm() <= 1e-9);
    for r in [&a, &b] {
        let conj = det_value(r.lambda.conj(), 0.1, r.sheet, size).unwrap().value();
        assert!(conj.norm() <= TOL);
    }
}

#[test]
fn newton3_respects_sectors() {
    let size = default_truncation(7);
    for n in [1, 4, 6] {
        let r = resonance_newton3(example(), n, 0.05, size, TOL).unwrap();
        assert_eq!(r.method, Method::Newton3);
        assert!(r.lambda.im < 0.0);
    }
    for n in [2, 3, 5, 7] {
        assert!(matches!(
            resonance_newton3(example(), n, 0.05, size, TOL),
            Err(Error::SectorMismatch { .. })
        ));
    }
    let l3 = resonance_newton3(SheetId::PHYSICAL, 0, 0.1, default_truncation(0), TOL).unwrap();
    let l1 = bound_state(0.1, default_truncation(0), TOL).unwrap();
    assert!((l3.lambda - l1).norm() <= 1e-9);
}

#[test]
fn physical_sheet_has_no_resonance_near_thresholds() {
    for n in 1..=4 {
        let near = |z: Complex64| (z - threshold(n)).norm() <= 0.1 && z.im < 0.0;
        match resonance_newton_full(SheetId::PHYSICAL, n, 0.05, default_truncation(n), TOL, None) {
            Ok(r) => assert!(!near(r.lambda), "n = {n}: {}", r.lambda),
            Err(_) => {}
        }
    }
}

#[test]
fn exactly_one_near_each_threshold_of_the_set() {
    let opts = ScanOptions::for_threshold(7);
    for sheet in [SheetId::PHYSICAL, SheetId::from_members([0])] {
        let set = sheet.threshold_set_complete();
        for n in 1..=7 {
            let roots = resonances_near(sheet, 0.05, n, 0.1, 201, opts).unwrap();
            let want = usize::from(set.contains(&n));
            assert_eq!(roots.len(), want, "E = {{{sheet}}}, n = {n}");
            for r in &roots {
                let p = predicted_lambda(n, 0.05);
                assert!((r.lambda - p).norm() <= 1e-6);
                assert!(r.stability <= 1e-9);
            }
        }
    }
}

#[test]
fn cartesian_scan_around_a_threshold() {
    let rect = Rect::new(4.4, 4.6, -0.1, -0.001).unwrap();
    let opts = ScanOptions::for_threshold(5);
    let z = scan(example(), 0.3, rect, 101, 101, opts).unwrap();
    let roots = z.roots();
    assert_eq!(roots.len(), 1);
    assert_eq!(roots[0].method, Method::Scan);
    assert!(!certify_free(roots[0].lambda, 0.3).unwrap().certified());
    for x in &z.intersections {
        if let Some(r) = &x.refined {
            assert!(r.residual <= TOL);
            assert_eq!(x.status, "converged");
        } else {
            assert_ne!(x.status, "converged");
        }
    }
    let pad = 1e-12;
    for c in z.re_curves.iter().chain(&z.im_curves) {
        for p in &c.points {
            assert!(p.re >= rect.re_min - pad && p.re <= rect.re_max + pad);
            assert!(p.im >= rect.im_min - pad && p.im <= rect.im_max + pad);
        }
    }
}

#[test]
fn physical_sheet_scan_is_empty() {
    let rect = Rect::new(0.6, 3.4, -0.5, -0.01).unwrap();
    let z = scan(SheetId::PHYSICAL, 0.3, rect, 101, 101, ScanOptions::for_threshold(4)).unwrap();
    assert!(z.roots().is_empty());
    assert_eq!(z.values.len(), 101 * 101);
}
