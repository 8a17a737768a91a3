use tasep::detprocess::{
    kernel_contour, kernel_m, phi_cap_contour, phi_cap_m, phi_conv, phi_conv_contour,
    psi_contour, psi_m, ContourGeometry, KernelIndex,
};
use tasep::{ModelParams, Rational, Scalar};

fn exact(num: i64, den: i64) -> ModelParams<Rational> {
    ModelParams::exact(num, den).unwrap()
}

#[test]
fn psi_and_phi_contours_match_residues() {
    let g = ContourGeometry::default();
    for (num, den) in [(1, 2), (1, 3), (1, 20)] {
        let ex = exact(num, den);
        let fl = ex.to_float();
        for m in [1, 3] {
            for tau in -1..8 {
                for k in -2..3 {
                    let c = psi_contour(k, tau, m, &fl, &g).unwrap();
                    let e = psi_m(k, tau, m, &ex).to_f64();
                    assert!((c - e).abs() < 1e-8 * e.abs().max(1.0), "psi k={k} tau={tau} m={m}: {c} vs {e}");
                }
                for j in 0..3 {
                    let c = phi_cap_contour(j, tau, m, &fl, &g).unwrap();
                    let e = phi_cap_m(j, tau, m, &ex).to_f64();
                    assert!((c - e).abs() < 1e-8, "phi j={j} tau={tau}: {c} vs {e}");
                }
            }
        }
    }
}

#[test]
fn phi_conv_contour_matches_closed_form() {
    let g = ContourGeometry::default();
    let ex = exact(2, 5);
    let fl = ex.to_float();
    for (n1, n2) in [(1, 2), (1, 3), (2, 4), (3, 3), (3, 1)] {
        for (t1, t2) in [(0, 0), (0, 4), (3, 1), (2, 7)] {
            let c = phi_conv_contour(n1, n2, t1, t2, &fl, &g).unwrap();
            let e = phi_conv(n1, n2, t1, t2, &ex).to_f64();
            assert!((c - e).abs() < 1e-9, "{n1} {n2} {t1} {t2}: {c} vs {e}");
        }
    }
}

#[test]
fn kernel_contour_matches_sum() {
    let g = ContourGeometry::default();
    for (num, den) in [(1, 2), (1, 3)] {
        let ex = exact(num, den);
        let fl = ex.to_float();
        let (x, nn) = (0, 3);
        let m = x + nn;
        for n1 in 1..=nn {
            for n2 in 1..=nn {
                for (t1, t2) in [(0, 0), (2, 5), (5, 2), (4, 4)] {
                    let a = KernelIndex::new(n1, t1);
                    let b = KernelIndex::new(n2, t2);
                    let c = kernel_contour(a, b, m, &fl, &g).unwrap();
                    let e = kernel_m(a, b, m, &ex).to_f64();
                    assert!((c - e).abs() < 1e-8, "{a:?} {b:?}: {c} vs {e}");
                }
            }
        }
    }
}
