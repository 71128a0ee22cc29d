//! Exact rational re-implementation of training and scoring, used to check
//! hand-derived values and the f64 implementation.

use num_rational::Ratio;
use oscerr::{
    classify_hypothesis, forward, train, train_prototypes, CategoryCodec, ClassifierModel,
    CorrectionLayer, LayerStack, NominalEncoding, Normalizer, NumericDataset, TrainConfig,
};
use proptest::prelude::*;

type Q = Ratio<i128>;

fn q(n: i128, d: i128) -> Q {
    Q::new(n, d)
}

fn abs(x: Q) -> Q {
    if x < Q::from_integer(0) {
        -x
    } else {
        x
    }
}

fn to_f64(x: Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

struct ExactRun {
    layers: Vec<Vec<Q>>,
    rows: Vec<Vec<Q>>,
    errors: Vec<Q>,
}

/// Training with a fixed layer count and no early stop.
fn exact_train(prototypes: &[Vec<Q>], targets: &[Q], layers: usize) -> ExactRun {
    let c = Q::from_integer(prototypes.len() as i128);
    let n = prototypes[0].len();
    let measure = |rows: &[Vec<Q>]| -> (Vec<Q>, Q) {
        let mut avg = vec![Q::from_integer(0); n];
        let mut total = Q::from_integer(0);
        for (row, &o) in rows.iter().zip(targets) {
            for j in 0..n {
                let e = abs(o - row[j]);
                avg[j] += e;
                total += e;
            }
        }
        (avg.into_iter().map(|a| a / c).collect(), total)
    };
    let mut rows = prototypes.to_vec();
    let (first, e0) = measure(&rows);
    let mut out = ExactRun {
        layers: vec![first],
        rows: Vec::new(),
        errors: vec![e0],
    };
    while out.layers.len() < layers {
        let prev = out.layers.last().unwrap().clone();
        for (row, &o) in rows.iter_mut().zip(targets) {
            for j in 0..n {
                row[j] = if row[j] <= o {
                    row[j] + prev[j]
                } else {
                    row[j] - prev[j]
                };
            }
        }
        let (layer, e) = measure(&rows);
        out.layers.push(layer);
        out.errors.push(e);
    }
    out.rows = rows;
    out
}

fn exact_output(row: &[Q], layers: &[Vec<Q>], o: Q) -> Q {
    let mut x = row.to_vec();
    for layer in layers {
        for j in 0..x.len() {
            x[j] = if x[j] <= o {
                x[j] + layer[j]
            } else {
                x[j] - layer[j]
            };
        }
    }
    x.iter().copied().sum::<Q>() / Q::from_integer(x.len() as i128)
}

fn no_plateau(max_layers: usize) -> TrainConfig {
    TrainConfig {
        plateau_enabled: false,
        ..TrainConfig::with_max_layers(max_layers)
    }
}

#[test]
fn two_category_trace_matches_hand_derivation() {
    let protos = vec![vec![q(1, 10)], vec![q(1, 2)]];
    let targets = vec![q(0, 1), q(1, 1)];
    let run = exact_train(&protos, &targets, 3);
    assert_eq!(
        run.layers,
        vec![vec![q(3, 10)], vec![q(1, 5)], vec![q(0, 1)]]
    );
    assert_eq!(run.rows, vec![vec![q(0, 1)], vec![q(1, 1)]]);
    assert_eq!(run.errors, vec![q(3, 5), q(2, 5), q(0, 1)]);

    // Row 0.1 under O=1: 0.1 -> 0.4 -> 0.6 -> 0.6
    assert_eq!(exact_output(&[q(1, 10)], &run.layers, q(1, 1)), q(3, 5));
    // Row 0.5 lands exactly on both targets.
    assert_eq!(exact_output(&[q(1, 2)], &run.layers, q(0, 1)), q(0, 1));
    assert_eq!(exact_output(&[q(1, 2)], &run.layers, q(1, 1)), q(1, 1));

    let stack =
        train_prototypes(vec![vec![0.1], vec![0.5]], vec![0.0, 1.0], &no_plateau(3)).unwrap();
    for (got, want) in stack.layers.iter().zip(&run.layers) {
        assert!((got.values()[0] - to_f64(want[0])).abs() < 1e-15);
    }
    for (got, want) in stack.meta.error_history.iter().zip(&run.errors) {
        assert!((got - to_f64(*want)).abs() < 1e-15);
    }
}

#[test]
fn three_category_trace_matches_within_rounding() {
    let protos = vec![
        vec![q(1, 5), q(7, 10)],
        vec![q(3, 5), q(1, 2)],
        vec![q(9, 10), q(3, 10)],
    ];
    let targets = vec![q(0, 1), q(1, 2), q(1, 1)];
    let run = exact_train(&protos, &targets, 4);
    let stack = train_prototypes(
        protos
            .iter()
            .map(|p| p.iter().map(|&v| to_f64(v)).collect())
            .collect(),
        targets.iter().map(|&t| to_f64(t)).collect(),
        &no_plateau(4),
    )
    .unwrap();
    for (got, want) in stack.layers.iter().zip(&run.layers) {
        for (g, w) in got.values().iter().zip(want) {
            assert!((g - to_f64(*w)).abs() < 1e-12, "{g} vs {w}");
        }
    }
}

fn model_from(stack: LayerStack, c: usize, n: usize) -> ClassifierModel {
    let labels: Vec<String> = (0..c).map(|k| format!("c{k}")).collect();
    ClassifierModel::new(
        stack,
        CategoryCodec::new(labels).unwrap(),
        Normalizer::from_bounds(vec![0.0; n], vec![1.0; n]).unwrap(),
        NominalEncoding::default(),
    )
    .unwrap()
}

/// Two categories, values on a 1/16 grid, power-of-two widths and group sizes keep
/// every f64 operation exact, so results must match the oracle bit for bit.
fn dyadic_fixture() -> impl Strategy<Value = (Vec<Vec<i128>>, Vec<usize>, usize)> {
    let pow2 = || prop::sample::select(vec![1usize, 2, 4]);
    (pow2(), pow2(), pow2()).prop_flat_map(|(n, a, b)| {
        (
            prop::collection::vec(prop::collection::vec(0i128..=16, n), a + b),
            Just([vec![0usize; a], vec![1usize; b]].concat()),
            1usize..=10,
        )
    })
}

proptest! {
    #[test]
    fn f64_training_matches_exact_oracle((grid, labels, layers) in dyadic_fixture()) {
        let n = grid[0].len();
        let rows: Vec<Vec<f64>> = grid.iter().map(|r| r.iter().map(|&v| v as f64 / 16.0).collect()).collect();
        let data = NumericDataset::new(rows, labels.clone()).unwrap();
        let codec = CategoryCodec::from_observed(["a", "b"]).unwrap();
        let stack = train(&data, &codec, &no_plateau(layers)).unwrap();

        let mut protos = vec![vec![Q::from_integer(0); n]; 2];
        let mut counts = [0i128; 2];
        for (r, &l) in grid.iter().zip(&labels) {
            for j in 0..n {
                protos[l][j] += q(r[j], 16);
            }
            counts[l] += 1;
        }
        for (p, k) in protos.iter_mut().zip(counts) {
            for v in p.iter_mut() {
                *v /= Q::from_integer(k);
            }
        }
        let run = exact_train(&protos, &[q(0, 1), q(1, 1)], layers);

        prop_assert_eq!(stack.layers.len(), run.layers.len());
        for (got, want) in stack.layers.iter().zip(&run.layers) {
            let want: Vec<f64> = want.iter().map(|&v| to_f64(v)).collect();
            prop_assert_eq!(got.values(), want.as_slice());
        }
        let model = model_from(stack, 2, n);
        for r in &grid {
            let row: Vec<f64> = r.iter().map(|&v| v as f64 / 16.0).collect();
            let exact_row: Vec<Q> = r.iter().map(|&v| q(v, 16)).collect();
            let p = classify_hypothesis(&row, &model).unwrap();
            for (k, o) in [q(0, 1), q(1, 1)].into_iter().enumerate() {
                let want = abs(exact_output(&exact_row, &run.layers, o) - o);
                prop_assert_eq!(p.hypothesis_residuals[k], to_f64(want));
            }
            let trace = forward(&row, model.layers(), 1.0).unwrap();
            prop_assert_eq!(trace.final_output, to_f64(exact_output(&exact_row, &run.layers, q(1, 1))));
        }
    }
}

#[test]
fn oracle_residual_of_prototype_equals_final_training_error() {
    let stack = train_prototypes(
        vec![vec![0.25, 0.75], vec![0.5, 0.125]],
        vec![0.0, 1.0],
        &no_plateau(5),
    )
    .unwrap();
    let final_rows = stack.meta.final_rows.clone();
    let protos = stack.meta.prototypes.clone();
    let model = model_from(stack, 2, 2);
    for (c, (proto, final_row)) in protos.iter().zip(&final_rows).enumerate() {
        let o = c as f64;
        let trace = forward(proto, &model.layers()[..model.m() - 1], o).unwrap();
        assert_eq!(trace.states.last().unwrap(), final_row);
        let full = oscerr::score_oracle(proto, &model, c).unwrap();
        let last = CorrectionLayer::new(model.layers()[model.m() - 1].values().to_vec()).unwrap();
        let expected_state = oscerr::transpose_row(final_row, &last, o).unwrap();
        let expected = (oscerr::aggregate_output(&expected_state).unwrap() - o).abs();
        assert_eq!(full.residual, expected);

        // Through the layers training actually applied, the residual is bounded
        // by the category's final per-variable error.
        let applied = oscerr::aggregate_output(final_row).unwrap();
        let per_category = &model.meta().category_corrections[model.m() - 1][c];
        assert!((applied - o).abs() <= per_category.sum() / per_category.len() as f64 + 1e-15);
    }
}
