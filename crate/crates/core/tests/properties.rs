use curvbill_core::billiard::{jacobian, jacobian_with_step, step, twist_derivative, JACOBIAN_STEP};
use curvbill_core::string::{string_table, ConvexCaustic};
use curvbill_core::table::{disk_table, stadium_table};
use curvbill_core::{Geometry, PhasePoint, Table};
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::OnceLock;

fn ellipse() -> &'static Table {
    static T: OnceLock<Table> = OnceLock::new();
    T.get_or_init(|| string_table(&ConvexCaustic::segment(Geometry::Hyperbolic, 0.4).unwrap(), 0.2).unwrap())
}

fn stadium() -> &'static Table {
    static T: OnceLock<Table> = OnceLock::new();
    T.get_or_init(|| stadium_table(Geometry::Hyperbolic, 0.5, 1.0, 0.2).unwrap())
}

fn lift_distance(t: &Table, a: f64, b: f64) -> f64 {
    let l = t.length();
    let d = (a - b).rem_euclid(l);
    d.min(l - d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn time_reversal(u in 0.0..1.0f64, t in 0.02..PI - 0.02) {
        let table = ellipse();
        let p = PhasePoint::new(u * table.length(), t);
        let q = step(table, p).unwrap().reversed();
        let back = step(table, q).unwrap().reversed();
        prop_assert!(lift_distance(table, back.s, p.s) < 1e-9);
        prop_assert!((back.t - p.t).abs() < 1e-9);
    }

    #[test]
    fn stadium_twist_is_positive(u in 0.0..1.0f64, t in 0.01..PI - 0.01) {
        let table = stadium();
        let p = PhasePoint::new(u * table.length(), t);
        prop_assert!(twist_derivative(table, p).unwrap() > 0.0);
    }

    #[test]
    fn determinant_is_stable_under_halving(u in 0.0..1.0f64, t in 0.05..PI - 0.05) {
        let table = ellipse();
        let p = PhasePoint::new(u * table.length(), t);
        let det = |j: [[f64; 2]; 2]| j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let a = det(jacobian_with_step(table, p, JACOBIAN_STEP).unwrap());
        let b = det(jacobian_with_step(table, p, 0.5 * JACOBIAN_STEP).unwrap());
        prop_assert!((a - b).abs() < 1e-6 * a.abs().max(1.0));
        prop_assert!((det(jacobian(table, p).unwrap()) - b).abs() < 1e-6 * b.abs().max(1.0));
    }

    #[test]
    fn disk_preserves_angle(g in prop_oneof![Just(Geometry::Hyperbolic), Just(Geometry::Spherical)],
                            u in 0.0..1.0f64, t in 0.01..PI - 0.01) {
        let table = disk_table(g, 0.3).unwrap();
        let p = PhasePoint::new(u * table.length(), t);
        prop_assert!((step(&table, p).unwrap().t - t).abs() < 1e-10);
    }
}

#[test]
fn diametral_chord_of_the_unit_disk() {
    let table = disk_table(Geometry::Hyperbolic, 1.0).unwrap();
    let q = step(&table, PhasePoint::new(0.3, PI / 2.0)).unwrap();
    assert!((q.s - (0.3 + PI * 1f64.sinh())).abs() < 1e-10);
    assert!((q.t - PI / 2.0).abs() < 1e-10);
}
