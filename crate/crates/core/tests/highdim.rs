use hdlrt::dist::ks_uniform_distance;
use hdlrt::multisplit::{per_split_pvalue, split_indices};
use hdlrt::rng::{stream, substream};
use hdlrt::screening::screen;
use hdlrt::simlab::{gen_linear_model, Noise, Signal};
use hdlrt::{multisplit_test, Dims, HypothesisMatrix, MultiSplitConfig};

fn design() -> Dims {
    Dims::new(100, 120, 20, 120).unwrap()
}

#[test]
fn screening_covers_true_predictors() {
    let signal = Signal::Diagonal { rk: 5, value: 2.0 };
    let reps = 100;
    let mut covered = 0;
    for seed in 0..reps {
        let mut rng = stream(seed);
        let data = gen_linear_model(&mut rng, design(), &signal, 0.3, Noise::Gaussian).unwrap();
        let (s, _) = split_indices(&mut rng, 100, 0.3).unwrap();
        let half = data.rows(&s);
        let kept = screen(&half.x, &half.y, 0.2).unwrap().selected;
        assert_eq!(kept.len(), 24);
        covered += (0..5).all(|j| kept.contains(&j)) as usize;
    }
    assert!(
        covered as f64 / reps as f64 >= 0.85,
        "coverage {covered}/{reps}"
    );
}

#[test]
fn split_pvalues_are_uniform_under_the_null() {
    let c = HypothesisMatrix::identity(120);
    let pvals: Vec<f64> = (0..500u64)
        .map(|k| {
            let data = gen_linear_model(
                &mut substream(31, k),
                design(),
                &Signal::Null,
                0.3,
                Noise::Gaussian,
            )
            .unwrap();
            let cfg = MultiSplitConfig {
                seed: k,
                ..MultiSplitConfig::default()
            };
            per_split_pvalue(&data, &c, &cfg, 0).unwrap().p_value
        })
        .collect();
    let d = ks_uniform_distance(&pvals);
    assert!(d < 0.08, "KS distance {d}");
}

#[test]
fn multisplit_detects_a_strong_signal() {
    let data = gen_linear_model(
        &mut stream(5),
        design(),
        &Signal::Diagonal { rk: 5, value: 1.0 },
        0.3,
        Noise::Gaussian,
    )
    .unwrap();
    let c = HypothesisMatrix::leading(120, 120).unwrap();
    let cfg = MultiSplitConfig {
        j: 20,
        seed: 1,
        ..MultiSplitConfig::default()
    };
    let out = multisplit_test(&data, &c, &cfg).unwrap();
    assert!(out.reject && out.p_t < 1e-3, "p_t {}", out.p_t);
    assert_eq!(out.splits.len(), 20);
    assert!(out
        .splits
        .iter()
        .all(|s| s.selected.len() == 24 && s.m0 == 20));
}

#[test]
fn transformed_contrast_runs_end_to_end() {
    // C compares the first predictor with the last: not a column selection
    let mut c = nalgebra::DMatrix::zeros(1, 120);
    c[(0, 0)] = 1.0;
    c[(0, 119)] = -1.0;
    let c = HypothesisMatrix::new(c).unwrap();
    let data = gen_linear_model(
        &mut stream(6),
        design(),
        &Signal::SingleEntry(2.0),
        0.3,
        Noise::Gaussian,
    )
    .unwrap();
    let cfg = MultiSplitConfig {
        j: 10,
        seed: 2,
        ..MultiSplitConfig::default()
    };
    let out = multisplit_test(&data, &c, &cfg).unwrap();
    assert!(out
        .splits
        .iter()
        .all(|s| s.r_tested == 1 && s.selected.contains(&0)));
    assert!(out.reject, "p_t {}", out.p_t);
    assert!(out.null_hypothesis.contains("I_1"));
}
