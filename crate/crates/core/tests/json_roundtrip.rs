use probmorph::json::{
    affine_from_json, affine_to_json, bayes_model_from_json, bayes_model_to_json, format_g17,
    gaussian_from_json, gaussian_to_json, inversion_from_json, inversion_to_json, kernel_from_json,
    kernel_to_json, measure_from_json, measure_to_json, parse_value, supervised_model_from_json,
    supervised_model_to_json, to_canonical_string, training_set_from_json, training_set_to_json,
};
use probmorph::{bayes_invert, random, BayesModel, FiniteKernel, Rational};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Serializes canonically, re-parses, and re-serializes.
fn through_text(v: &serde_json::Value) -> (String, serde_json::Value) {
    let text = to_canonical_string(v);
    let back = parse_value(&text).unwrap();
    assert_eq!(
        to_canonical_string(&back),
        text,
        "canonical form is a fixed point"
    );
    (text, back)
}

proptest! {
    #[test]
    fn g17_round_trips_every_finite_double(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(format_g17(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn finite_documents_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random::space(&mut rng, 5);
        let y = random::space(&mut rng, 5);

        let m = random::probability::<Rational, _>(&mut rng, &x);
        let (_, back) = through_text(&measure_to_json(&m));
        prop_assert_eq!(measure_from_json::<Rational>(&back).unwrap(), m.clone());

        let mf = m.to_float();
        let (_, back) = through_text(&measure_to_json(&mf));
        prop_assert_eq!(measure_from_json::<f64>(&back).unwrap(), mf);

        let k: FiniteKernel<f64> = random::kernel(&mut rng, &x, &y);
        let (_, back) = through_text(&kernel_to_json(&k));
        prop_assert_eq!(kernel_from_json::<f64>(&back).unwrap(), k);

        let model = BayesModel::new(m, random::kernel::<Rational, _>(&mut rng, &x, &y)).unwrap();
        let (_, back) = through_text(&bayes_model_to_json(&model));
        prop_assert_eq!(bayes_model_from_json::<Rational>(&back).unwrap(), model.clone());

        let inv = bayes_invert(&model);
        let (_, back) = through_text(&inversion_to_json(&inv));
        prop_assert_eq!(inversion_from_json::<Rational>(&back).unwrap(), inv);
    }

    #[test]
    fn supervised_documents_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random::supervised_model::<Rational, _>(&mut rng, 4, 4, 3);
        let (_, back) = through_text(&supervised_model_to_json(&model));
        prop_assert_eq!(supervised_model_from_json::<Rational>(&back).unwrap(), model.clone());
        let s = random::training_set(&mut rng, &model, 4);
        let (_, back) = through_text(&training_set_to_json(&s));
        prop_assert_eq!(training_set_from_json(&back).unwrap(), s);
    }

    #[test]
    fn gaussian_documents_round_trip(seed in any::<u64>(), n in 1usize..5, m in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random::gaussian(&mut rng, n);
        let (_, back) = through_text(&gaussian_to_json(&g));
        prop_assert_eq!(gaussian_from_json(&back).unwrap(), g);
        let t = random::affine(&mut rng, n, m, seed % 2 == 0);
        let (_, back) = through_text(&affine_to_json(&t));
        prop_assert_eq!(affine_from_json(&back).unwrap(), t);
    }
}

#[test]
fn float_and_rational_backends_refuse_each_others_inversions() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = random::space(&mut rng, 3);
    let model = BayesModel::new(
        random::probability::<Rational, _>(&mut rng, &x),
        random::kernel(&mut rng, &x, &x),
    )
    .unwrap();
    let doc = inversion_to_json(&bayes_invert(&model));
    assert!(inversion_from_json::<f64>(&doc).is_err());
}
