use dfmix::problems::{
    build_problem, constraint_family, list_problems, shipped_bases, BaseObjective, ProblemSpec,
    Suite,
};
use dfmix::Error;
use proptest::prelude::*;

/// Second, loop-based transcription of the six constraint families.
fn reference_family(family: u8, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut g = Vec::new();
    match family {
        1 | 2 | 5 | 6 => {
            let (a, c) = match family {
                1 => (2.0, 1.0),
                2 => (2.0, 2.5),
                _ => (0.5, 1.0),
            };
            for j in 0..n - 2 {
                let t = x[j + 1];
                g.push(3.0 * t - a * t * t - x[j] - 2.0 * x[j + 2] + c);
            }
            if family == 6 {
                g = vec![g.iter().sum()];
            }
        }
        3 => {
            for j in 0..n - 1 {
                let (u, v) = (x[j], x[j + 1]);
                g.push(u * u + v * v + u * v - 2.0 * u - 2.0 * v + 1.0);
            }
        }
        4 => {
            for j in 0..n - 1 {
                let (u, v) = (x[j], x[j + 1]);
                g.push(u * u + v * v + u * v - 1.0);
            }
        }
        _ => unreachable!(),
    }
    g
}

#[test]
fn family_examples() {
    assert_eq!(constraint_family(1, &[1.0, 1.0, 1.0]).unwrap(), vec![-1.0]);
    assert_eq!(constraint_family(4, &[0.0, 0.0]).unwrap(), vec![-1.0]);
    assert_eq!(constraint_family(3, &[1.0, 1.0]).unwrap(), vec![0.0]);
    assert!(matches!(
        constraint_family(1, &[1.0, 1.0]),
        Err(Error::DimensionTooSmall {
            family: 1,
            min: 3,
            n: 2
        })
    ));
    let lens: Vec<usize> = (1..=6)
        .map(|k| constraint_family(k, &[0.5; 7]).unwrap().len())
        .collect();
    assert_eq!(lens, vec![5, 5, 6, 6, 5, 1]);
}

#[test]
fn decode_map() {
    let mut spec = ProblemSpec::new(BaseObjective::Maxq, 2).unwrap();
    spec.original_lower[1] = -10.0;
    spec.original_upper[1] = 10.0;
    assert_eq!(spec.decode(&[0.3, 50.0])[1], 0.0);
    assert_eq!(spec.decode(&[0.3, 0.0])[1], -10.0);
    assert_eq!(spec.decode(&[0.3, 100.0])[1], 10.0);
    // continuous variables pass through
    assert_eq!(spec.decode(&[0.3, 0.0])[0], 0.3);
}

#[test]
fn maxq_value() {
    assert_eq!(BaseObjective::Maxq.evaluate(&[1.0, -2.0]), 4.0);
}

#[test]
fn suites() {
    let bound = list_problems(Suite::Bound);
    assert_eq!(bound.len(), shipped_bases().len());
    let maxq20 = bound.iter().find(|p| p.name() == "maxq(20)").unwrap();
    assert_eq!((maxq20.n_c, maxq20.n_z), (10, 10));
    let constrained = list_problems(Suite::Constrained);
    assert_eq!(constrained.len(), 6 * bound.len());
    for p in &constrained {
        let min = match p.family.unwrap() {
            3 | 4 => 2,
            _ => 3,
        };
        assert!(p.n() >= min);
        assert_eq!(ProblemSpec::parse(&p.name()).unwrap(), *p);
    }
}

#[test]
fn built_problems_start_inside_the_box() {
    for spec in list_problems(Suite::Constrained) {
        let p = build_problem(&spec).unwrap();
        assert!(p.bounds.contains(&p.start), "{}", spec.name());
        for &i in p.partition.integer() {
            assert_eq!(p.start[i], 50.0);
            assert_eq!((p.bounds.lower()[i], p.bounds.upper()[i]), (0.0, 100.0));
        }
    }
}

#[test]
fn unknown_names_are_rejected() {
    assert!(matches!(
        ProblemSpec::parse("nosuch(10)"),
        Err(Error::UnknownProblem(_))
    ));
    assert!(ProblemSpec::parse("maxq(20)/f9").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn families_match_reference(
        family in 1u8..=6,
        x in prop::collection::vec(-20.0f64..20.0, 3..12),
    ) {
        let ours = constraint_family(family, &x).unwrap();
        let theirs = reference_family(family, &x);
        prop_assert_eq!(ours.len(), theirs.len());
        for (a, b) in ours.iter().zip(&theirs) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()), "{} vs {}", a, b);
        }
    }

    #[test]
    fn oracle_sees_decoded_point(z in 0u8..=100, xc in -9.0f64..11.0) {
        let spec = ProblemSpec::parse("maxq(2)/f4").unwrap();
        let mut p = build_problem(&spec).unwrap();
        let x = [xc, f64::from(z)];
        let xt = spec.decode(&x);
        let r = p.call(&x).unwrap();
        prop_assert_eq!(r.f, BaseObjective::Maxq.evaluate(&xt));
        prop_assert_eq!(r.g, constraint_family(4, &xt).unwrap());
    }
}
