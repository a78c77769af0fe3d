use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_bigint::BigInt;
use proptest::prelude::*;

use dcelab_core::lemma2::{self, Lemma2Config};
use dcelab_core::omega::{decode_input, encode_input};
use dcelab_core::prop3::{self, bit_weight, pair, unpair, Prop3Config};
use dcelab_core::solovay::{speedup, Clause, SolovayWitness, Verdict};
use dcelab_core::trace::{read_jsonl, to_jsonl};
use dcelab_core::{AdversarySuite, ApproxStream, Direction, Rational};

fn rational() -> impl Strategy<Value = Rational> {
    (-10_000i64..10_000, 1i64..10_000).prop_map(|(n, d)| Rational::frac(n, d))
}

fn nonzero() -> impl Strategy<Value = Rational> {
    rational().prop_filter("nonzero", |r| !r.is_zero())
}

/// Increasing table of `len` values in `[0, 1/2)` built from random
/// increments below `2^{-(s+2)}`.
fn increasing_table(len: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(0u32..=64, len).prop_map(|us| {
        let mut acc = Rational::zero();
        us.iter()
            .enumerate()
            .map(|(s, &u)| {
                acc += &(Rational::frac(u as i64, 64) * Rational::pow2_neg(s as u64 + 2));
                acc.clone()
            })
            .collect()
    })
}

fn table(values: Vec<Rational>) -> ApproxStream {
    ApproxStream::table(values, Direction::Increasing).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn field_laws(a in rational(), b in rational(), c in rational()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a + &Rational::zero(), a.clone());
        prop_assert_eq!(&a * &Rational::one(), a.clone());
        prop_assert_eq!(&a + &(-&a), Rational::zero());
        prop_assert_eq!(&(&a - &b) + &b, a.clone());
        if !b.is_zero() {
            let q = a.checked_div(&b).unwrap();
            prop_assert_eq!(&q * &b, a.clone());
        }
    }
}

proptest! {
    #[test]
    fn ordering_agrees_with_cross_multiplication(a in rational(), b in rational()) {
        // Denominators are positive in canonical form.
        let lhs: BigInt = a.numer() * b.denom();
        let rhs: BigInt = b.numer() * a.denom();
        prop_assert_eq!(a.cmp(&b), lhs.cmp(&rhs));
        prop_assert!(a.denom() > &BigInt::from(0));
    }

    #[test]
    fn text_form_round_trips(a in rational()) {
        let back: Rational = a.to_text().parse().unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn inverse_of_nonzero(a in nonzero()) {
        prop_assert_eq!(Rational::one().checked_div(&a).unwrap() * a, Rational::one());
    }

    #[test]
    fn abs_lt_pow2_neg_matches_definition(a in rational(), k in 0u64..40) {
        prop_assert_eq!(a.abs_lt_pow2_neg(k), a.abs() < Rational::pow2_neg(k));
    }

    #[test]
    fn speedup_stays_below_alpha_and_paced_by_beta(
        beta in increasing_table(40),
        factors in prop::collection::vec(0u32..=16, 40),
        p_num in 1i64..8,
    ) {
        let p = Rational::frac(p_num, 4);
        // Any increasing α will do here; the premise only matters for catch-up.
        let alpha: Vec<Rational> = factors.iter().scan(Rational::zero(), |acc, &f| {
            *acc += &Rational::frac(f as i64, 64);
            Some(acc.clone())
        }).collect();
        let mut g = speedup(table(alpha.clone()), table(beta.clone()), p.clone()).unwrap();
        let gamma = g.materialize(39).unwrap().to_vec();
        prop_assert_eq!(&gamma[0], &Rational::min_of(alpha[0].clone(), &p * &beta[0]));
        for s in 0..39 {
            prop_assert!(gamma[s] <= alpha[s]);
            prop_assert!(gamma[s] <= gamma[s + 1]);
            prop_assert!(&gamma[s + 1] - &gamma[s] <= &p * &(&beta[s + 1] - &beta[s]));
        }
    }

    #[test]
    fn solovay_verdicts_upward_closed_and_prefix_monotone(
        alpha in increasing_table(31),
        beta in increasing_table(31),
        clause in prop_oneof![Just(Clause::A), Just(Clause::B), Just(Clause::C)],
        qs in prop::collection::vec(1i64..64, 2..6),
    ) {
        let horizon = Some(30);
        let mut qs: Vec<Rational> = qs.into_iter().map(|n| Rational::frac(n, 8)).collect();
        qs.sort();
        let base = SolovayWitness::new(qs[0].clone(), clause, table(alpha), table(beta)).unwrap();
        let mut prev_holds = false;
        for q in &qs {
            let mut w = base.with_q(q.clone()).unwrap();
            let v = w.check(20, horizon).unwrap();
            prop_assert!(!prev_holds || v.holds(), "holds at a smaller q but not at {}", q);
            prev_holds = v.holds();
            for t in 0..20 {
                let vt = w.check(t, horizon).unwrap();
                match v {
                    Verdict::Holds => prop_assert!(vt.holds()),
                    Verdict::FailsAt(f) if t > f => prop_assert_eq!(vt, Verdict::FailsAt(f)),
                    Verdict::FailsAt(_) => prop_assert!(vt.holds()),
                }
            }
        }
    }

    #[test]
    fn pairing_is_a_bijection(k in 0u64..2000, n in 0u64..2000) {
        prop_assert_eq!(unpair(pair(k, n)), (k, n));
    }

    #[test]
    fn input_code_round_trips(n in 0u64..1_000_000) {
        let bits = encode_input(n);
        prop_assert_eq!(decode_input(&bits), Some(n));
        prop_assert_eq!(decode_input(&bits[..bits.len() - 1]), None);
    }
}

/// Up to eight suite entries: constant targets and trackers on either side.
fn suite_spec() -> impl Strategy<Value = Vec<(u8, i64, u8)>> {
    prop::collection::vec((0u8..3, 1i64..63, 0u8..3), 0..=8)
}

fn build_suite(spec: &[(u8, i64, u8)]) -> AdversarySuite {
    let streams = spec
        .iter()
        .enumerate()
        .map(|(pos, &(kind, num, lag))| {
            let dir = if pos % 2 == 0 {
                Direction::Increasing
            } else {
                Direction::Decreasing
            };
            let x = Rational::frac(num, 64);
            match kind {
                0 => ApproxStream::constant_target(x, dir, Rational::frac(1, 2)).unwrap(),
                1 => ApproxStream::constant(x, dir),
                _ => ApproxStream::tracker(x, dir, lag as usize, Rational::frac(1, 2)).unwrap(),
            }
        })
        .collect();
    AdversarySuite::from_positions(streams).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lemma2_random_suites_verify_and_replay(
        spec in suite_spec(),
        a_lim in 1i64..16,
        e_lim in 1i64..16,
        stages in 1usize..80,
    ) {
        let config = Lemma2Config {
            alpha: ApproxStream::constant_target(Rational::frac(a_lim, 16), Direction::Increasing, Rational::frac(1, 2)).unwrap(),
            eta: ApproxStream::constant_target(Rational::frac(e_lim, 16), Direction::Increasing, Rational::frac(1, 3)).unwrap(),
            suite: build_suite(&spec),
            stages,
        };
        let run = lemma2::run(config.clone()).unwrap();
        let report = lemma2::verify(&run.trace);
        prop_assert!(report.passed(), "{}", report.to_text());
        prop_assert_eq!(lemma2::replay(&run.trace).unwrap(), run.state.clone());
        // Same config, same bytes.
        let again = lemma2::run(config).unwrap();
        prop_assert_eq!(to_jsonl(&again.trace), to_jsonl(&run.trace));
        let parsed = read_jsonl(to_jsonl(&run.trace).as_bytes()).unwrap();
        prop_assert_eq!(parsed, run.trace);
        prop_assert!(run.state.beta < Rational::one());
    }

    #[test]
    fn prop3_random_suites_verify_replay_and_keep_bit_semantics(spec in suite_spec(), stages in 0usize..120) {
        let run = prop3::run(Prop3Config { suite: build_suite(&spec), stages }).unwrap();
        let report = prop3::verify(&run.trace);
        prop_assert!(report.passed(), "{}", report.to_text());
        prop_assert_eq!(prop3::replay(&run.trace).unwrap(), run.state.clone());

        let st = &run.state;
        let weight = |set: &BTreeSet<u64>| set.iter().fold(Rational::zero(), |acc, &n| &acc + &bit_weight(n));
        prop_assert_eq!(&st.alpha, &weight(&st.a));
        prop_assert_eq!(&st.beta, &weight(&st.b));
        prop_assert!(st.a.is_disjoint(&st.b));
        // Every value is handed out at most once.
        let distinct: BTreeSet<u64> = st.used.iter().copied().collect();
        prop_assert_eq!(distinct.len(), st.used.len());
        for (i, r) in st.requirements.iter().enumerate() {
            if let Some(c) = r.c {
                prop_assert_eq!(unpair(c).0, 2 * i as u64);
            }
            if let Some(d) = r.d {
                prop_assert_eq!(unpair(d).0, 2 * i as u64 + 1);
            }
        }
    }
}

#[test]
fn ordering_is_total_on_samples() {
    let xs: Vec<Rational> = (-20..=20)
        .flat_map(|n| (1..=6).map(move |d| Rational::frac(n, d)))
        .collect();
    for a in &xs {
        for b in &xs {
            let expected = (a.numer() * b.denom()).cmp(&(b.numer() * a.denom()));
            assert_eq!(a.cmp(b), expected);
            assert_eq!(a == b, expected == Ordering::Equal);
        }
    }
}
