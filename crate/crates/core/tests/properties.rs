mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use sandpile::avalanche::avalanche;
use sandpile::circuit::{CircuitInstance, GateKind};
use sandpile::dynamics::{stabilize, Policy};
use sandpile::io::{parse_config, parse_model, write_config, write_model};
use sandpile::model::check_complete;
use sandpile::parallel1d::predict_1d;
use sandpile::prediction::{solve_first_col, solve_pred, solve_s_pred};
use sandpile::simulation::{firing_sequence_for, validate_firing_sequence};
use sandpile::{Cell, Configuration, SandpileModel};

fn models() -> Vec<SandpileModel> {
    vec![
        SandpileModel::von_neumann(1, 1).unwrap(),
        SandpileModel::von_neumann(1, 2).unwrap(),
        SandpileModel::kadanoff(2).unwrap(),
        SandpileModel::kadanoff(3).unwrap(),
        SandpileModel::decreasing(2, &[(1, 1), (3, 2)]).unwrap(),
        SandpileModel::von_neumann(2, 1).unwrap(),
        SandpileModel::moore(2, 1).unwrap(),
        SandpileModel::von_neumann(3, 1).unwrap(),
    ]
}

fn line_models() -> Vec<SandpileModel> {
    models().into_iter().filter(|m| m.dim() == 1).chain([
        SandpileModel::new(1, vec![(Cell::new(&[-2]), 1), (Cell::new(&[-1]), 1), (Cell::new(&[3]), 1)]).unwrap(),
    ]).collect()
}

/// A model and a configuration on [0,n)^d with contents below `cap * θ`.
fn instance(cap: u64) -> impl Strategy<Value = (SandpileModel, Configuration)> {
    (0..models().len()).prop_flat_map(move |i| {
        let m = models()[i].clone();
        let n = [12usize, 5, 3][m.dim() - 1];
        let cells = n.pow(m.dim() as u32);
        let top = cap * m.threshold() - 1;
        proptest::collection::vec(prop_oneof![Just(0u64), 0..=top], cells).prop_map(move |v| {
            let d = m.dim();
            let pairs = v.iter().enumerate().filter(|(_, &k)| k > 0).map(|(i, &k)| {
                let coords: Vec<i64> = (0..d).map(|j| ((i / n.pow(j as u32)) % n) as i64).collect();
                (Cell::new(&coords), k)
            });
            (m.clone(), Configuration::from_pairs(d, pairs).unwrap())
        })
    })
}

fn line_instance() -> impl Strategy<Value = (SandpileModel, Vec<u64>)> {
    (0..line_models().len()).prop_flat_map(|i| {
        let m = line_models()[i].clone();
        let t = m.threshold();
        (Just(m), proptest::collection::vec(0..t, 1..80)).prop_map(|(m, mut v)| {
            if v[0] == 0 {
                v[0] = 1;
            }
            (m, v)
        })
    })
}

fn to_config(v: &[u64]) -> Configuration {
    Configuration::from_pairs(1, v.iter().enumerate().filter(|(_, &k)| k > 0).map(|(i, &k)| ([i as i64], k))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_policy_reaches_the_reference((m, c) in instance(2), seed in any::<u64>()) {
        let (want, odo, _) = lexmin_run(&m, &grid(&c));
        for p in [Policy::Parallel, Policy::SequentialLexMin, Policy::SequentialRandom(seed)] {
            let s = stabilize(&m, &c, p).unwrap();
            prop_assert_eq!(grid(&s.configuration), want.clone());
            let got: Grid = s.odometer.iter().map(|(x, k)| (x.to_vec(), k)).collect();
            prop_assert_eq!(got, odo.clone());
            prop_assert_eq!(s.configuration.total(), c.total());
            prop_assert!(s.configuration.is_stable(m.threshold()));
        }
    }

    #[test]
    fn stabilization_is_idempotent((m, c) in instance(3)) {
        let s = stabilize(&m, &c, Policy::Parallel).unwrap();
        let again = stabilize(&m, &s.configuration, Policy::SequentialLexMin).unwrap();
        prop_assert_eq!(again.topplings, 0);
        prop_assert_eq!(again.configuration, s.configuration);
    }

    #[test]
    fn prediction_reads_the_odometer((m, c) in instance(2), x in proptest::collection::vec(-2i64..8, 3)) {
        let x = Cell::new(&x[..m.dim()]);
        let (_, odo, _) = lexmin_run(&m, &grid(&c));
        prop_assert_eq!(solve_pred(&m, &c, &x).unwrap(), odo.contains_key(&x.to_vec()));
    }

    #[test]
    fn grain_addition_prediction((m, c) in instance(1), x in proptest::collection::vec(-2i64..6, 3), y in proptest::collection::vec(0i64..4, 3)) {
        let (x, y) = (Cell::new(&x[..m.dim()]), Cell::new(&y[..m.dim()]));
        let p = avalanche(&m, &c, &y).unwrap();
        prop_assert_eq!(solve_s_pred(&m, &c, &x, &y).unwrap(), p.odometer.get(&x) > 0);
    }

    #[test]
    fn line_prediction_matches_dense_reference((m, v) in line_instance(), x in -4i64..90) {
        let nb: Vec<(i64, u64)> = m.neighbors().iter().map(|(u, w)| (u[0], *w)).collect();
        let pad = 40;
        let want = line_avalanche(&nb, m.threshold(), &v, 0, pad);
        let w = x + (pad as i64) >= 0 && ((x + pad as i64) as usize) < want.len() && want[(x + pad as i64) as usize];
        let c = to_config(&v);
        prop_assert_eq!(predict_1d(&m, &c, x).unwrap(), w);
        prop_assert_eq!(solve_first_col(&m, &c, &Cell::new(&[x])).unwrap(), w);
    }

    #[test]
    fn translation_does_not_change_line_prediction((m, v) in line_instance(), shift in -50i64..50, x in 0i64..80) {
        let c = to_config(&v);
        // translated moves every cell by minus the offset
        let moved = c.translated(&Cell::new(&[shift]));
        prop_assert_eq!(predict_1d(&m, &c, x).unwrap(), predict_1d(&m, &moved, x - shift).unwrap());
    }

    #[test]
    fn config_text_roundtrip((_m, c) in instance(4)) {
        prop_assert_eq!(parse_config(&write_config(&c)).unwrap(), c);
    }

    #[test]
    fn model_text_roundtrip(i in 0..8usize) {
        let m = &models()[i];
        prop_assert_eq!(&parse_model(&write_model(m)).unwrap(), m);
    }

    #[test]
    fn completeness_ignores_order_and_agrees_with_search(raw in proptest::collection::btree_set(proptest::collection::vec(-2i64..=2, 2), 1..5)) {
        let n: Vec<Vec<i64>> = raw.into_iter().filter(|v| v.iter().any(|&x| x != 0)).collect();
        prop_assume!(!n.is_empty());
        let cells: Vec<Cell> = n.iter().map(|v| Cell::new(v)).collect();
        let mut rev = cells.clone();
        rev.reverse();
        let got = check_complete(&cells, 2).unwrap();
        prop_assert_eq!(got, check_complete(&rev, 2).unwrap());
        prop_assert_eq!(got, bfs_spans(&n, 2, 8, 1));
    }

    #[test]
    fn random_circuits_evaluate_like_the_reference(seed in any::<u64>(), inputs in 1usize..8, layers in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let circ = CircuitInstance::random(&mut rng, inputs, layers, 4);
        let back = CircuitInstance::parse(&circ.to_text()).unwrap();
        prop_assert_eq!(back.evaluate(), circ.evaluate());
        // evaluation by layer order, independent of the library's evaluator
        let gates = circ.gates();
        let mut val = vec![false; gates.len()];
        let mut order: Vec<usize> = (0..gates.len()).collect();
        order.sort_by_key(|&i| gates[i].layer);
        for i in order {
            let ins: Vec<bool> = gates[i].inputs.iter().map(|&j| val[j]).collect();
            val[i] = match gates[i].kind {
                GateKind::Const0 => false,
                GateKind::Const1 => true,
                GateKind::And => ins.iter().all(|&b| b),
                GateKind::Or => ins.iter().any(|&b| b),
                _ => ins[0],
            };
        }
        prop_assert_eq!(circ.evaluate(), val[circ.output()]);
    }

    #[test]
    fn found_firing_sequences_are_valid((m, c) in instance(1), x in proptest::collection::vec(0i64..4, 3)) {
        let x = Cell::new(&x[..m.dim()]);
        prop_assume!(c.get(&x) + 1 == m.threshold());
        if let Ok(seq) = firing_sequence_for(&m, &c, &x) {
            prop_assert!(validate_firing_sequence(&m, &c, &seq.cells).is_ok());
            let p = avalanche(&m, &c, &x).unwrap();
            prop_assert_eq!(seq.end(&m), stabilize(&m, &c.add_grain(&x).unwrap(), Policy::Parallel).unwrap().configuration);
            prop_assert_eq!(seq.len(), p.len());
        }
    }
}
