use std::collections::HashMap;

use dfmix::directions::{ContinuousDirection, PrimitiveDirection};
use dfmix::linesearch::{
    coordinate_search, discrete_search, max_feasible_step, projected_continuous_search,
    LineSearchParams,
};
use dfmix::model::check_lattice_point;
use dfmix::{project_box, Bounds, VariablePartition};
use proptest::prelude::*;

/// Mixed test function on two continuous and two integer variables.
fn bumpy(x: &[f64], a: &[f64]) -> f64 {
    (x[0] - a[0]).powi(2) + (x[1] - a[1]).abs() + 0.3 * (x[2] - a[2]).powi(2) + (x[3] - a[3]).abs()
}

fn setup() -> (VariablePartition, Bounds) {
    let p = VariablePartition::split(2, 2).unwrap();
    let b = Bounds::new(vec![-3.0, -3.0, 0.0, 0.0], vec![3.0, 3.0, 12.0, 12.0], &p).unwrap();
    (p, b)
}

fn bits(x: &[f64]) -> Vec<u64> {
    x.iter().map(|v| v.to_bits()).collect()
}

proptest! {
    #[test]
    fn projection_is_idempotent(
        x in prop::collection::vec(-10.0f64..20.0, 4),
    ) {
        let (_, b) = setup();
        let once = project_box(&x, &b);
        prop_assert_eq!(project_box(&once, &b), once.clone());
        prop_assert!(b.contains(&once));
    }

    #[test]
    fn continuous_search_contract(
        a in prop::collection::vec(-4.0f64..4.0, 2),
        w in prop::collection::vec(-3.0f64..3.0, 2),
        dir in prop::collection::vec(-1.0f64..1.0, 2),
        z in prop::collection::vec(0u8..=12, 2),
        alpha0 in 1e-3f64..4.0,
    ) {
        let (p, b) = setup();
        let target = [a[0], a[1], 6.0, 6.0];
        let w = [w[0], w[1], f64::from(z[0]), f64::from(z[1])];
        let Ok(d) = ContinuousDirection::new(vec![dir[0], dir[1], 0.0, 0.0], &p) else {
            return Ok(());
        };
        let params = LineSearchParams::default();
        let mut cache: HashMap<Vec<u64>, f64> = HashMap::new();
        let fw = bumpy(&w, &target);
        let mut f = |x: &[f64]| {
            assert!(check_lattice_point(x, &p, &b).is_ok(), "trial outside the box");
            assert_eq!(&x[2..], &w[2..], "integer block changed");
            let v = bumpy(x, &target);
            cache.insert(bits(x), v);
            Ok(v)
        };
        let r = projected_continuous_search(alpha0, &w, fw, &d, &b, &params, &mut f).unwrap();
        if r.alpha == 0.0 {
            prop_assert_eq!(&r.direction, &d);
            prop_assert!(r.accepted.is_none());
        } else {
            prop_assert!(r.direction == d || r.direction == d.negated());
            let at = |t: f64| {
                let y: Vec<f64> = w.iter().zip(r.direction.as_slice()).map(|(wi, pi)| wi + t * pi).collect();
                project_box(&y, &b)
            };
            let fa = cache[&bits(&at(r.alpha))];
            prop_assert!(fa <= fw - params.gamma * r.alpha * r.alpha);
            let beta = r.alpha / params.delta;
            let next = at(beta);
            // the expansion either evaluated beta and rejected it, or stopped
            // because the projected point no longer moved
            if let Some(&fb) = cache.get(&bits(&next)) {
                prop_assert!(fb > fw - params.gamma * beta * beta || next == at(r.alpha));
            } else {
                prop_assert_eq!(next, at(r.alpha));
            }
        }
    }

    #[test]
    fn coordinate_search_never_leaves_the_box(
        w0 in -3.0f64..3.0,
        a in -6.0f64..6.0,
        alpha0 in 1e-3f64..10.0,
    ) {
        let (p, b) = setup();
        let w = [w0, 0.0, 4.0, 4.0];
        let target = [a, 0.0, 4.0, 4.0];
        let fw = bumpy(&w, &target);
        let mut f = |x: &[f64]| {
            assert!(check_lattice_point(x, &p, &b).is_ok());
            Ok(bumpy(x, &target))
        };
        let r = coordinate_search(alpha0, &w, fw, 0, &b, &LineSearchParams::default(), &mut f).unwrap();
        if let Some((y, fy)) = r.accepted {
            prop_assert!(b.contains(&y));
            prop_assert!(fy < fw);
        }
    }

    #[test]
    fn discrete_search_contract(
        a in prop::collection::vec(0.0f64..12.0, 2),
        z in prop::collection::vec(0u8..=12, 2),
        dir in prop::collection::vec(-3i64..=3, 2),
        alpha0 in 1u64..8,
        xi in 1e-3f64..5.0,
    ) {
        let (p, b) = setup();
        if dir.iter().all(|&c| c == 0) {
            return Ok(());
        }
        let Ok(d) = PrimitiveDirection::new(vec![0, 0, dir[0], dir[1]], &p) else {
            return Ok(());
        };
        let target = [0.5, 0.5, a[0], a[1]];
        let w = [0.5, -1.0, f64::from(z[0]), f64::from(z[1])];
        let fw = bumpy(&w, &target);
        let bar = max_feasible_step(&w, &d, &b);
        let mut f = |x: &[f64]| {
            assert!(check_lattice_point(x, &p, &b).is_ok(), "trial outside X∩Z");
            assert_eq!(&x[..2], &w[..2], "continuous block changed");
            Ok(bumpy(x, &target))
        };
        let r = discrete_search(alpha0, &w, fw, &d, xi, &b, &mut f).unwrap();
        prop_assert!(r.alpha <= bar);
        let at = |t: u64| -> Vec<f64> {
            w.iter().zip(d.as_slice()).map(|(wi, &pi)| wi + t as f64 * pi as f64).collect()
        };
        if r.alpha > 0 {
            prop_assert!(bumpy(&at(r.alpha), &target) <= fw - xi);
            let next = bar.min(2 * r.alpha);
            prop_assert!(r.alpha == bar || bumpy(&at(next), &target) > fw - xi);
        }
    }
}
