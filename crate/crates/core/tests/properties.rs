use proptest::prelude::*;

use ordrank::large_deviations::{rate_at_zero_binary, rate_at_zero_ordinal};
use ordrank::model::{binarize, OrdinalModel, PatternDistribution, StrengthLink};
use ordrank::ranking::asymptotic_two_item;
use ordrank::seed::rng_for;

fn link() -> impl Strategy<Value = StrengthLink> {
    prop_oneof![
        Just("identity"),
        Just("cubic"),
        Just("tanhsig"),
        Just("logitnorm"),
        Just("logitlogistic"),
        Just("identity:2.5"),
    ]
    .prop_map(|s| s.parse().unwrap())
}

fn weights(max_k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, 1..=max_k)
}

fn model(link: StrengthLink, w: Vec<f64>) -> OrdinalModel {
    OrdinalModel::new(link, PatternDistribution::from_weights(w).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pmf_normalizes(l in link(), w in weights(10), gamma in -3.0f64..3.0) {
        let m = model(l, w);
        let total: f64 = m.pmf_table(gamma).iter().map(|(_, p)| p).sum();
        prop_assert!((total - 1.0).abs() < 1e-12, "total {}", total);
    }

    #[test]
    fn pmf_reflects(l in link(), w in weights(8), gamma in -3.0f64..3.0) {
        let m = model(l, w);
        for k in m.outcomes() {
            prop_assert_eq!(m.pmf(gamma, k).unwrap(), m.pmf(-gamma, -k).unwrap());
        }
    }

    #[test]
    fn sign_law_ignores_pattern(l in link(), a in weights(8), b in weights(8), gamma in -3.0f64..3.0) {
        let pa = model(l.clone(), a).prob_positive(gamma);
        let pb = model(l, b).prob_positive(gamma);
        prop_assert!((pa - pb).abs() < 1e-12);
    }

    #[test]
    fn moments_match_brute_force(l in link(), w in weights(8), gamma in -2.0f64..2.0) {
        let m = model(l, w);
        let table = m.pmf_table(gamma);
        let mean: f64 = table.iter().map(|(k, p)| *k as f64 * p).sum();
        let second: f64 = table.iter().map(|(k, p)| (*k as f64).powi(2) * p).sum();
        let mo = m.moments(gamma);
        prop_assert!((mo.mean - mean).abs() < 1e-10);
        prop_assert!((mo.variance - (second - mean * mean)).abs() < 1e-10);
    }

    #[test]
    fn log_mgf_is_convex(l in link(), w in weights(6), gamma in -1.5f64..1.5) {
        let m = model(l, w);
        let h = 1e-3;
        for i in 0..200 {
            let x = -3.0 + 0.03 * i as f64;
            let d2 = m.log_mgf(gamma, x + h) - 2.0 * m.log_mgf(gamma, x) + m.log_mgf(gamma, x - h);
            prop_assert!(d2 >= -1e-8, "second difference {} at λ = {}", d2, x);
        }
    }

    #[test]
    fn rates_even_in_gamma_and_positive(l in link(), w in weights(6), gamma in 0.05f64..1.0) {
        let m = model(l, w);
        let (o1, o2) = (rate_at_zero_ordinal(&m, gamma), rate_at_zero_ordinal(&m, -gamma));
        let (b1, b2) = (rate_at_zero_binary(&m, gamma), rate_at_zero_binary(&m, -gamma));
        prop_assert!(o1.rate > 0.0 && b1.rate > 0.0);
        prop_assert!((o1.rate - o2.rate).abs() <= 1e-12 * (1.0 + o1.rate));
        prop_assert!((b1.rate - b2.rate).abs() <= 1e-12 * (1.0 + b1.rate));
    }

    #[test]
    fn binary_limit_dominates_strictly(l in link(), w in weights(6), gamma in 0.05f64..1.0, rounds in 1usize..200) {
        prop_assume!(w.len() >= 2);
        let m = model(l, w);
        let lim = asymptotic_two_item(&m, gamma, rounds).unwrap();
        // Strictness is only visible before both limits round to 1.
        prop_assert!(lim.p_binary >= lim.p_ordinal);
        if lim.p_binary < 1.0 - 1e-9 {
            prop_assert!(lim.p_binary > lim.p_ordinal);
        }
    }
}

#[test]
fn k1_links_reduce_to_btl_and_thurstone_mosteller() {
    let btl = OrdinalModel::new(StrengthLink::btl(), PatternDistribution::uniform(1).unwrap());
    let tm = OrdinalModel::new(StrengthLink::thurstone_mosteller(), PatternDistribution::uniform(1).unwrap());
    for i in 0..=400 {
        let g = -8.0 + 0.04 * i as f64;
        assert!((btl.prob_positive(g) - 1.0 / (1.0 + (-g).exp())).abs() < 1e-10);
        assert!((tm.prob_positive(g) - ordrank::special::normal_cdf(g)).abs() < 1e-10);
    }
}

#[test]
fn million_draws_match_sign_probability() {
    let m = OrdinalModel::new(StrengthLink::identity(), PatternDistribution::abs_decay(4, 0.1).unwrap());
    let n = 1_000_000;
    let draws = m.sample(0.5, &mut rng_for(95, &[]), n);
    let p = m.prob_positive(0.5);
    let hat = draws.iter().filter(|y| **y > 0).count() as f64 / n as f64;
    let sd = (p * (1.0 - p) / n as f64).sqrt();
    assert!((hat - p).abs() < 3.0 * sd, "{hat} vs {p}");

    // Every outcome frequency, at a looser band to cover all 8 cells.
    for (k, pk) in m.pmf_table(0.5) {
        let f = draws.iter().filter(|y| **y == k).count() as f64 / n as f64;
        assert!((f - pk).abs() < 4.0 * (pk * (1.0 - pk) / n as f64).sqrt(), "k = {k}");
    }
}

#[test]
fn binarized_sign_mean_is_tanh() {
    let m = OrdinalModel::new(StrengthLink::identity(), PatternDistribution::abs_decay(4, 0.5).unwrap());
    let n = 100_000;
    let signs = binarize(&m.sample(0.2, &mut rng_for(104, &[]), n)).unwrap();
    let mean = signs.iter().map(|&s| s as f64).sum::<f64>() / n as f64;
    let t = 0.2f64.tanh();
    assert!((t - 0.197375).abs() < 1e-6);
    // Var(sign) = 1 − tanh².
    let sd = ((1.0 - t * t) / n as f64).sqrt();
    assert!((mean - t).abs() < 3.0 * sd, "{mean} vs {t}");
}
