use nilcollect::claims::{random_k_element, run_claims, sample_pairs, RunOptions};
use nilcollect::strata::{enumerate_words, rv_len, spec_context};
use nilcollect::{
    in_n, rv, rv_power_commutator, span_accumulate, BigInt, Error, Expr, SpanState,
    StratificationSpec,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn q(n: u64) -> BigInt {
    BigInt::from(n)
}

#[test]
fn additivity_and_zero_test_at_class_7() {
    let spec = StratificationSpec::two_power(&q(64), 7).unwrap();
    let ctx = spec_context(&spec).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let elems: Vec<_> = (0..120)
        .map(|k| random_k_element(&ctx, &spec, &mut rng, k % 3 == 0).unwrap())
        .collect();
    for pair in elems.windows(2) {
        let (u, v) = (&pair[0], &pair[1]);
        let sum = rv(&ctx, u, &spec).unwrap().add(&rv(&ctx, v, &spec).unwrap());
        assert_eq!(rv(&ctx, &ctx.multiply(u, v).unwrap(), &spec).unwrap(), sum);
        assert_eq!(rv(&ctx, u, &spec).unwrap().is_zero(), in_n(&ctx, u, &spec).unwrap());
    }
}

#[test]
fn coordinate_counts() {
    let two = StratificationSpec::two_power(&q(32), 13).unwrap();
    assert_eq!(rv_len(&spec_context(&two).unwrap()), 1375);
    let five = StratificationSpec::five_power(&q(25), 10).unwrap();
    assert_eq!(rv_len(&spec_context(&five).unwrap()), 224);
}

#[test]
fn thresholds_are_enforced() {
    assert!(matches!(StratificationSpec::two_power(&q(16), 7), Err(Error::InvalidSpec(_))));
    assert!(matches!(StratificationSpec::three_power(&q(9), 7), Err(Error::InvalidSpec(_))));
    assert!(matches!(StratificationSpec::five_power(&q(5), 7), Err(Error::InvalidSpec(_))));
    assert!(StratificationSpec::two_power(&q(48), 7).is_err());
}

#[test]
fn leading_coordinate_of_simplest_pair() {
    let spec = StratificationSpec::two_power(&q(32), 7).unwrap();
    let v = rv_power_commutator(&Expr::gen("a"), &Expr::gen("b"), &spec).unwrap();
    assert_eq!(v.at(3), 1);
    let v64 = rv_power_commutator(&Expr::gen("a"), &Expr::gen("b"), &spec.with_q(&q(64)).unwrap()).unwrap();
    assert_eq!(v, v64);
}

#[test]
fn word_enumeration_sizes() {
    assert_eq!(enumerate_words(1).len(), 4);
    assert_eq!(enumerate_words(2).len(), 16);
    assert_eq!(sample_pairs(20, 7), sample_pairs(20, 7));
}

#[test]
fn empty_pair_list_leaves_span_unchanged() {
    let spec = StratificationSpec::two_power(&q(32), 5).unwrap();
    let ctx = spec_context(&spec).unwrap();
    let state = SpanState::for_spec(&spec, &ctx).unwrap();
    let before = state.profile();
    let after = span_accumulate(state, &[], &spec).unwrap();
    assert_eq!(after.profile(), before);
    assert_eq!(before.log_order, 0);
}

#[test]
fn span_snapshot_length_two_class_7() {
    let spec = StratificationSpec::two_power(&q(32), 7).unwrap();
    let ctx = spec_context(&spec).unwrap();
    let words = enumerate_words(2);
    let pairs: Vec<(Expr, Expr)> = words
        .iter()
        .flat_map(|x| words.iter().map(move |y| (x.clone(), y.clone())))
        .collect();
    let state = span_accumulate(SpanState::for_spec(&spec, &ctx).unwrap(), &pairs, &spec).unwrap();
    let got = serde_json::to_value(state.profile()).unwrap();
    let want: serde_json::Value =
        serde_json::from_str(include_str!("snapshots/span_2power_q32_class7_len2.json")).unwrap();
    assert_eq!(got, want);
    for g in state.generators() {
        assert!(state.contains(g));
    }
}

#[test]
fn registry_is_deterministic() {
    for f in ["b*", "o*", "power-*"] {
        let opts = RunOptions { filter: Some(f.into()), ..Default::default() };
        let payload = || -> Vec<_> {
            run_claims(&opts)
                .unwrap()
                .into_iter()
                .map(|r| (r.id, r.parameters, r.evidence))
                .collect()
        };
        let first = payload();
        assert!(!first.is_empty());
        assert_eq!(first, payload());
    }
}
