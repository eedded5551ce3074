//! Bulk curves against boundary data.

use ehf::holo::{self, Branch, HoloChart};
use ehf::ode::Tolerance;

const R: f64 = 1.0;
const EPS: f64 = 1e-3;

fn primitive(x: f64) -> f64 {
    ((R + x) / (R - x)).ln()
}

#[test]
fn contour_slices_sit_above_their_boundary_cuts() {
    let curve = holo::extremal_curve(&HoloChart::symmetric(R, 1.0).unwrap(), EPS, 4000).unwrap();
    let cells = 20;
    // The curve ends at z = EPS, i.e. at |x| = sqrt(R^2 - EPS^2); cut the
    // boundary interval at the same points so both regulators agree.
    let end = (R * R - EPS * EPS).sqrt();
    let (a, b) = (-end, end);
    let edges: Vec<f64> = (0..=cells).map(|i| a + (b - a) * i as f64 / cells as f64).collect();
    let contour: Vec<f64> = edges.windows(2).map(|w| primitive(w[1]) - primitive(w[0])).collect();
    let cuts = holo::slice_by_contour(&curve, &contour).unwrap();
    assert_eq!(cuts.len(), cells - 1);
    for (cut, &x) in cuts.iter().zip(&edges[1..]) {
        let [cx, ct, cz] = cut.point;
        assert!((cx - x).abs() <= 0.02 * R, "cut at {cx}, boundary cut at {x}");
        assert!(ct.abs() < 1e-12);
        // Linear interpolation between samples sags inside the circle.
        assert!((cx * cx + cz * cz - R * R).abs() < 1e-5);
    }
    let seg = holo::segment_lengths(&curve, &cuts);
    let total: f64 = contour.iter().sum();
    for (s, c) in seg.iter().zip(&contour) {
        assert!((s / curve.length() - c / total).abs() < 1e-9);
    }
}

#[test]
fn rt_length_matches_the_log_cutoff() {
    for r in [0.5, 1.0, 3.0] {
        let c = holo::extremal_curve(&HoloChart::symmetric(r, 1.0).unwrap(), EPS, 2000).unwrap();
        assert!((c.length() - 2.0 * (2.0 * r / EPS).ln()).abs() < 1e-5, "R = {r}");
        assert!(c.wedge_excess(r) <= 1e-12);
    }
}

#[test]
fn higher_order_curves_leave_the_causal_wedge() {
    for n in [2.0, 3.0] {
        let c = holo::extremal_curve(&HoloChart::symmetric(R, n).unwrap(), EPS, 2000).unwrap();
        assert!(c.wedge_excess(R) > 0.1, "n = {n}: {}", c.wedge_excess(R));
        assert!(c.points.iter().all(|p| p[1] >= 0.0));
    }
}

#[test]
fn curve_lies_on_both_null_surfaces() {
    for n in [1.5, 2.0, 3.0] {
        let chart = HoloChart::symmetric(R, n).unwrap();
        let c = holo::extremal_curve(&chart, EPS, 300).unwrap();
        for p in c.points.iter().step_by(7) {
            let [x, t, z] = *p;
            let (u, v) = ((x + t) / 2.0, (x - t) / 2.0);
            let want = 2.0 / (z * z);
            for b in [Branch::Plus, Branch::Minus] {
                let r = holo::null_surface_r(u, v, &chart, b)
                    .unwrap()
                    .expect("real on the intersection");
                assert!((r - want).abs() <= 1e-6 * want, "n = {n}, {b:?}: {r} vs {want}");
            }
        }
    }
}

#[test]
fn boundary_flow_closed_form_matches_integration() {
    let chart = HoloChart::new(1.2, 0.8, 2.0).unwrap();
    let tol = Tolerance {
        rtol: 1e-12,
        atol: 1e-12,
    };
    for (u0, v0) in [(0.1, -0.2), (-0.3, 0.1), (0.0, 0.0)] {
        for s in [0.1, 0.5, 1.0] {
            let exact = holo::modular_flow_boundary(u0, v0, &chart, s).unwrap();
            let (u, v) = holo::modular_flow_boundary_rk(u0, v0, &chart, s, tol).unwrap();
            assert!((exact.u - u).abs() < 1e-9 && (exact.v - v).abs() < 1e-9);
        }
    }
    let edge = holo::modular_flow_boundary(0.6, 0.1, &chart, 0.7).unwrap();
    assert!(edge.fixed_point);
    assert_eq!(edge.u, 0.6);
}

#[test]
fn bulk_flow_scales_with_the_order() {
    let tol = Tolerance {
        rtol: 1e-11,
        atol: 1e-12,
    };
    let start = [0.1, -0.05, 3.0];
    let one = HoloChart::symmetric(R, 1.0).unwrap();
    let three = HoloChart::symmetric(R, 3.0).unwrap();
    let a = holo::modular_flow_bulk(start, &three, 0.2, 5, tol).unwrap();
    let b = holo::modular_flow_bulk(start, &one, 0.6, 5, tol).unwrap();
    for (p, q) in a.states.iter().zip(&b.states) {
        for i in 0..3 {
            assert!((p[i] - q[i]).abs() <= 1e-8 * q[i].abs().max(1.0));
        }
    }
}

#[test]
fn invalid_charts_are_rejected() {
    assert!(HoloChart::symmetric(1.0, 0.5).is_err());
    assert!(HoloChart::new(-1.0, 1.0, 1.0).is_err());
    assert!(holo::extremal_curve(&HoloChart::new(1.0, 2.0, 2.0).unwrap(), EPS, 100).is_err());
    assert!(holo::extremal_curve(&HoloChart::symmetric(1.0, 2.0).unwrap(), 0.6, 100).is_err());
}
