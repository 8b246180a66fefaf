use probmorph::bayes::ae_equal;
use probmorph::kernel::{dirac_kernel, pullback, MeasurableMap};
use probmorph::measure::{
    absolutely_continuous, convolve, product_measure, radon_nikodym, tv_norm,
};
use probmorph::{
    compose, BoundedFunction, Error, FiniteKernel, FiniteMeasure, FiniteSpace, Rational, Scalar,
};
use proptest::collection::{btree_set, vec};
use proptest::prelude::*;

fn q(p: i64, d: i64) -> Rational {
    Rational::from_ratio(p, d)
}

fn normalize(w: &[i64]) -> Vec<Rational> {
    let total: i64 = w.iter().sum();
    w.iter().map(|&x| q(x, total)).collect()
}

fn prob_weights(n: usize) -> impl Strategy<Value = Vec<i64>> {
    vec(0i64..10, n).prop_filter("needs some mass", |w| w.iter().any(|&x| x > 0))
}

fn prob(n: usize) -> impl Strategy<Value = FiniteMeasure<Rational>> {
    prob_weights(n).prop_map(move |w| {
        FiniteMeasure::probability(FiniteSpace::range(n).unwrap(), normalize(&w)).unwrap()
    })
}

fn signed(n: usize) -> impl Strategy<Value = FiniteMeasure<Rational>> {
    vec((-9i64..10, 1i64..6), n).prop_map(move |w| {
        let w = w.into_iter().map(|(a, b)| q(a, b)).collect();
        FiniteMeasure::signed(FiniteSpace::range(n).unwrap(), w).unwrap()
    })
}

fn kernel(n: usize, m: usize) -> impl Strategy<Value = FiniteKernel<Rational>> {
    vec(prob_weights(m), n).prop_map(move |rows| {
        let rows = rows.iter().map(|r| normalize(r)).collect();
        FiniteKernel::new(
            FiniteSpace::range(n).unwrap(),
            FiniteSpace::range(m).unwrap(),
            rows,
        )
        .unwrap()
    })
}

/// A probability measure on a random finite subset of the integers.
fn lattice_measure() -> impl Strategy<Value = FiniteMeasure<Rational>> {
    btree_set(-6i64..6, 1..5).prop_flat_map(|support| {
        let n = support.len();
        prob_weights(n).prop_map(move |w| {
            let space = FiniteSpace::new(support.iter().map(|&i| i.into()).collect()).unwrap();
            FiniteMeasure::probability(space, normalize(&w)).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn tv_norm_is_a_norm((a, b) in (1usize..7).prop_flat_map(|n| (signed(n), signed(n))), c in (-5i64..6, 1i64..4)) {
        let c = q(c.0, c.1);
        let zero = Rational::from_ratio(0, 1);
        prop_assert!(tv_norm(&a) >= zero);
        prop_assert_eq!(tv_norm(&a) == zero, a.weights().iter().all(|w| *w == zero));
        prop_assert!(tv_norm(&a.add(&b).unwrap()) <= tv_norm(&a) + tv_norm(&b));
        prop_assert_eq!(tv_norm(&a.scale(&c)), tv_norm(&a) * num::Signed::abs(&c));
    }

    #[test]
    fn product_is_associative_after_flattening(a in prob(2), b in prob(3), c in prob(2)) {
        let left = product_measure(&[product_measure(&[a.clone(), b.clone()]).unwrap(), c.clone()]).unwrap();
        let right = product_measure(&[a.clone(), product_measure(&[b.clone(), c.clone()]).unwrap()]).unwrap();
        let flat = product_measure(&[a, b, c]).unwrap();
        prop_assert_eq!(left.relabel(|l| l.flatten()).unwrap(), flat.clone());
        prop_assert_eq!(right.relabel(|l| l.flatten()).unwrap(), flat);
    }

    #[test]
    fn convolution_is_commutative_and_associative(a in lattice_measure(), b in lattice_measure(), c in lattice_measure()) {
        prop_assert_eq!(convolve(&a, &b).unwrap(), convolve(&b, &a).unwrap());
        let left = convolve(&convolve(&a, &b).unwrap(), &c).unwrap();
        let right = convolve(&a, &convolve(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left.clone(), right);
        prop_assert!(left.is_probability());
    }

    #[test]
    fn density_reconstructs_dominated_measures((mu, nu) in (1usize..7).prop_flat_map(|n| (prob(n), prob(n)))) {
        match radon_nikodym(&nu, &mu) {
            Ok(f) => {
                prop_assert_eq!(mu.weighted_by(&f).unwrap(), nu.clone());
                prop_assert!(absolutely_continuous(&nu, &mu));
            }
            Err(Error::NotAbsolutelyContinuous { witness }) => {
                let zero = Rational::from_ratio(0, 1);
                prop_assert_eq!(mu.weight(&witness), Some(&zero));
                prop_assert!(nu.weight(&witness) != Some(&zero));
            }
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn dirac_embedding_is_a_functor(k1 in vec(0usize..4, 3), k2 in vec(0usize..5, 4)) {
        let s = |n| FiniteSpace::range(n).unwrap();
        let m1 = MeasurableMap::from_indices(s(3), s(4), k1).unwrap();
        let m2 = MeasurableMap::from_indices(s(4), s(5), k2).unwrap();
        let direct = dirac_kernel::<Rational>(&m1.then(&m2).unwrap());
        let composed = compose(&dirac_kernel(&m1), &dirac_kernel(&m2)).unwrap();
        prop_assert_eq!(direct, composed);
    }

    #[test]
    fn pullback_is_a_positive_unital_contraction(t in kernel(4, 3), f in vec((-9i64..10, 1i64..4), 3)) {
        let y = t.target().clone();
        let one = BoundedFunction::constant(y.clone(), q(1, 1));
        prop_assert_eq!(pullback(&t, &one).unwrap(), BoundedFunction::constant(t.source().clone(), q(1, 1)));
        let f = BoundedFunction::new(y.clone(), f.into_iter().map(|(a, b)| q(a, b)).collect()).unwrap();
        prop_assert!(pullback(&t, &f).unwrap().sup_norm() <= f.sup_norm());
        let abs = BoundedFunction::new(y, f.values().iter().map(num::Signed::abs).collect()).unwrap();
        prop_assert!(pullback(&t, &abs).unwrap().values().iter().all(|v| *v >= q(0, 1)));
    }

    #[test]
    fn composition_stays_stochastic_in_floats(t1 in kernel(3, 5), t2 in kernel(5, 4)) {
        let c = compose(&t1.to_float(), &t2.to_float()).unwrap();
        for row in c.rows() {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
        prop_assert!(c.max_abs_diff(&compose(&t1, &t2).unwrap().to_float()) <= 1e-15);
    }
}

#[test]
fn float_ae_equality_ignores_null_points() {
    let s = FiniteSpace::range(2).unwrap();
    let mu = FiniteMeasure::probability(s.clone(), vec![1.0, 0.0]).unwrap();
    let a = FiniteKernel::new(s.clone(), s.clone(), vec![vec![0.5, 0.5], vec![1.0, 0.0]]).unwrap();
    let b = FiniteKernel::new(s.clone(), s, vec![vec![0.5, 0.5], vec![0.0, 1.0]]).unwrap();
    assert!(ae_equal(&a, &b, &mu).unwrap());
    let both = FiniteMeasure::probability(mu.space().clone(), vec![0.5, 0.5]).unwrap();
    assert!(!ae_equal(&a, &b, &both).unwrap());
}

#[test]
fn rational_scalars_survive_float_round_trip() {
    let x = <Rational as Scalar>::from_f64(0.1).unwrap();
    assert_eq!(Scalar::to_f64(&x), 0.1);
    assert!(x != q(1, 10));
}
