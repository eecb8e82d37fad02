//! Property tests for the protocol algebra and the strategy guarantees.

use gtp::forecaster::SeqForecaster;
use gtp::game::{run_game, SkepticStrategy};
use gtp::protocol::{
    coin_reduce, payoff, witness_measure, ForecastMove, ProtocolSpec, RealityMove, SkepticMove,
    worst_case_payoff,
};
use gtp::reality::{EpsilonSequence, ScriptedReality};
use gtp::skeptic::{
    unit_bet, ConstantBet, Mixture, QuadraticCompensator, Sign, Truncated, UfghMultiplicative,
    WeightedCompensator,
};
use gtp::{within, GrowthFunction, Hedge};
use proptest::prelude::*;

fn bfqh1() -> ProtocolSpec {
    ProtocolSpec::bfqh(1.0).unwrap()
}

proptest! {
    // The two-point witness measure realizes its forecast: mean m, variance v,
    // support inside [-C, C].
    #[test]
    fn witness_measure_realizes_the_forecast(
        c in 0.1f64..10.0,
        mu in -0.999f64..0.999,
        vu in 0.0f64..1.0,
    ) {
        let m = mu * c;
        let v = vu * (c * c - m * m);
        let w = witness_measure(c, m, v).unwrap();
        prop_assert!(within(w.mean(), m, 1e-12, 1e-12), "mean {} vs {}", w.mean(), m);
        prop_assert!(within(w.variance(), v, 1e-12, 1e-12), "variance {} vs {}", w.variance(), v);
        for (z, weight) in w.points {
            prop_assert!(z.abs() <= c * (1.0 + 1e-12));
            prop_assert!((0.0..=1.0).contains(&weight));
        }
    }

    // The coin reduction preserves payoffs at both outcomes, to ulp level.
    #[test]
    fn coin_reduction_is_payoff_exact(
        stake in -1.0f64..1.0,
        hedge_stake in -1.0f64..1.0,
        p in 0.0f64..1.0,
    ) {
        let reduced = coin_reduce(stake, hedge_stake, p);
        let bfqh = bfqh1();
        let coin = ProtocolSpec::coin_toss();
        for x in [0.0, 1.0] {
            let a = payoff(&bfqh, &ForecastMove::coin(p), &SkepticMove::new(stake, hedge_stake), &RealityMove::new(x));
            let b = payoff(&coin, &ForecastMove::coin(p), &SkepticMove::new(reduced, 0.0), &RealityMove::new(x));
            prop_assert!((a - b).abs() <= 1e-15, "x={x}: {a} vs {b}");
        }
    }

    // Some move among {m, -C, +C} always has nonpositive payoff.
    #[test]
    fn three_point_coherence(
        mu in -1.0f64..1.0,
        vu in 0.0f64..1.0,
        stake in -50.0f64..50.0,
        hedge_stake in -50.0f64..50.0,
    ) {
        let m = mu;
        let v = vu * (1.0 - m * m);
        let spec = bfqh1();
        let f = ForecastMove::new(m, v);
        let s = SkepticMove::new(stake, hedge_stake);
        let best = [m, -1.0, 1.0]
            .iter()
            .map(|&x| payoff(&spec, &f, &s, &RealityMove::new(x)))
            .fold(f64::INFINITY, f64::min);
        prop_assert!(best <= 1e-12);
    }

    // The closed-form worst case really is a lower bound over the interval.
    #[test]
    fn worst_case_bounds_every_outcome(
        mu in -1.0f64..1.0,
        vu in 0.0f64..1.0,
        stake in -10.0f64..10.0,
        hedge_stake in -10.0f64..10.0,
        xu in -1.0f64..1.0,
    ) {
        let spec = bfqh1();
        let f = ForecastMove::new(mu, vu * (1.0 - mu * mu));
        let s = SkepticMove::new(stake, hedge_stake);
        let floor = worst_case_payoff(&spec, &f, &s);
        let actual = payoff(&spec, &f, &s, &RealityMove::new(xu));
        prop_assert!(floor <= actual + 1e-12, "{floor} vs {actual}");
    }

    // Hedge inversion is a right inverse of evaluation after regularization.
    #[test]
    fn hedge_inverse_roundtrip(
        r in 1.0f64..2.0,
        y in 0.0f64..1e6,
        mode in 0u8..2,
    ) {
        let reg = if mode == 0 { gtp::hedge::Regularization::H0 } else { gtp::hedge::Regularization::H1 };
        for hedge in [
            Hedge::quadratic().regularized(reg),
            Hedge::power(r).unwrap().regularized(reg),
            Hedge::custom("abs", |t| t, 1.0).unwrap().regularized(reg),
        ] {
            let t = hedge.inverse(y).unwrap();
            prop_assert!(
                within(hedge.eval(t), y, 1e-10, 1e-10),
                "{hedge}: inverse({y}) = {t}, eval back {}",
                hedge.eval(t)
            );
        }
    }

    // Truncation keeps D + gain nonnegative whatever the path does.
    #[test]
    fn truncation_safety(
        d in 1.0f64..10.0,
        seed in 0u64..500,
    ) {
        use rand::{Rng, SeedableRng};
        let spec = bfqh1();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let rounds = 300;
        let forecasts: Vec<ForecastMove> = (0..rounds)
            .map(|_| {
                let m = 2.0 * rng.gen::<f64>() - 1.0;
                ForecastMove::new(m, rng.gen::<f64>() * (1.0 - m * m))
            })
            .collect();
        let script: Vec<f64> = (0..rounds).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect();
        let mut sk = Truncated::new(&spec, Box::new(QuadraticCompensator::new(Sign::Minus)), d).unwrap();
        let trace = run_game(
            &spec,
            &mut SeqForecaster::new(forecasts),
            &mut sk,
            &mut ScriptedReality::new(script),
            rounds,
            1.0,
        )
        .unwrap();
        for r in &trace.rounds {
            prop_assert!(d + (r.capital_after - 1.0) >= -1e-12, "round {}", r.index);
        }
    }

    // Mixture capital is the weighted sum of component capitals.
    #[test]
    fn mixture_linearity(
        w1 in 0.1f64..2.0,
        w2 in 0.1f64..2.0,
        w3 in 0.1f64..2.0,
        seed in 0u64..500,
    ) {
        use rand::{Rng, SeedableRng};
        let spec = bfqh1();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let rounds = 200;
        let forecasts: Vec<ForecastMove> = (0..rounds)
            .map(|_| {
                let m = 2.0 * rng.gen::<f64>() - 1.0;
                ForecastMove::new(m, rng.gen::<f64>() * (1.0 - m * m))
            })
            .collect();
        let script: Vec<f64> = (0..rounds).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();

        let make = |which: usize| -> Box<dyn SkepticStrategy> {
            match which {
                0 => Box::new(unit_bet()),
                1 => Box::new(QuadraticCompensator::new(Sign::Plus)),
                _ => Box::new(WeightedCompensator::new(GrowthFunction::identity())),
            }
        };
        let mut mixture = Mixture::new(vec![(w1, make(0)), (w2, make(1)), (w3, make(2))]).unwrap();
        let mixed = run_game(
            &spec,
            &mut SeqForecaster::new(forecasts.clone()),
            &mut mixture,
            &mut ScriptedReality::new(script.clone()),
            rounds,
            1.0,
        )
        .unwrap();

        let mut component_gains = vec![0.0f64; rounds];
        for (w, which) in [(w1, 0usize), (w2, 1), (w3, 2)] {
            let mut part = make(which);
            let trace = run_game(
                &spec,
                &mut SeqForecaster::new(forecasts.clone()),
                part.as_mut(),
                &mut ScriptedReality::new(script.clone()),
                rounds,
                1.0,
            )
            .unwrap();
            for (acc, r) in component_gains.iter_mut().zip(&trace.rounds) {
                *acc += w * (r.capital_after - 1.0);
            }
        }
        for (r, expect) in mixed.rounds.iter().zip(&component_gains) {
            let gain = r.capital_after - 1.0;
            prop_assert!(within(gain, *expect, 1e-12, 1e-12), "round {}: {gain} vs {expect}", r.index);
        }
    }

    // On gated-on rounds the multiplicative factor never halves the capital,
    // and every factor obeys the log sandwich.
    #[test]
    fn multiplicative_floor_and_log_sandwich(
        seed in 0u64..200,
        epsilon in 0.01f64..0.24,
    ) {
        use rand::{Rng, SeedableRng};
        let spec = ProtocolSpec::unbounded();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut sk = UfghMultiplicative::new(&spec, epsilon, Sign::Plus, GrowthFunction::iterated_log(1)).unwrap();
        let mut capital = 1.0f64;
        for n in 1..=400 {
            let f = ForecastMove::new(4.0 * rng.gen::<f64>() - 2.0, 3.0 * rng.gen::<f64>() + 1e-6);
            let mv = sk.announce(n, &f);
            let x = f.price + 6.0 * rng.gen::<f64>() - 3.0;
            let step = gtp::game::PathStep {
                spec: &spec,
                index: n,
                forecast: f,
                outcome: RealityMove::new(x),
            };
            let gated = sk.gated_on();
            sk.finish_round(&step);
            let factor = sk.last_factor();
            if gated {
                prop_assert!(factor >= 0.5 - 1e-12, "round {n}: factor {factor}");
                let t = factor - 1.0;
                prop_assert!(t >= (1.0 + t).ln() - 1e-12);
                prop_assert!((1.0 + t).ln() >= t - t * t - 1e-12);
            } else {
                prop_assert!(factor == 1.0);
                prop_assert!(mv.is_zero());
            }
            capital *= factor;
            prop_assert!(within(capital, sk.capital(), 1e-9, 1e-12));
        }
    }

    // The ε-sequence keeps ε·a ≤ 1 with a nondecreasing level, and every
    // completed block contributed at least 1 to the weighted sum.
    #[test]
    fn epsilon_sequence_invariants(seed in 0u64..500) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut seq = EpsilonSequence::new();
        let mut level = seq.level();
        let mut weighted_sum = 0.0;
        for _ in 0..2000 {
            let a = rng.gen::<f64>() * 10.0 + 1e-9;
            let eps = seq.next_epsilon(a).unwrap();
            prop_assert!(eps * a <= 1.0 + 1e-15, "ε·a = {}", eps * a);
            prop_assert!(eps > 0.0);
            prop_assert!(seq.level() >= level);
            level = seq.level();
            weighted_sum += eps * a;
            prop_assert!(
                weighted_sum >= (seq.level() - 1) as f64 - 1e-9,
                "Σ ε·a = {weighted_sum} below completed block count {}",
                seq.level() - 1
            );
        }
    }

    // Emitted traces parse back identically and replay clean, and re-emission
    // is byte-identical.
    #[test]
    fn trace_roundtrip_and_replay(seed in 0u64..300) {
        use gtp::trace_io::{read_jsonl, replay_verify, write_jsonl};
        let spec = bfqh1();
        let mut fc = gtp::forecaster::RandomForecaster::new(&spec, seed);
        let mut sk = QuadraticCompensator::new(Sign::Plus);
        let mut re = gtp::reality::RandomIntervalReality::new(1.0, seed ^ 0xabcdef);
        let trace = run_game(&spec, &mut fc, &mut sk, &mut re, 60, 1.0).unwrap();

        let mut bytes = Vec::new();
        write_jsonl(&trace, Some(seed), &mut bytes).unwrap();
        let stored = read_jsonl(&mut bytes.as_slice()).unwrap();
        let report = replay_verify(&stored);
        prop_assert!(report.is_clean(), "{report}");

        let mut again = Vec::new();
        write_jsonl(&stored.into_game_trace(), Some(seed), &mut again).unwrap();
        prop_assert_eq!(bytes, again);
    }

    // A constant bet with no hedge leg realizes exactly stake · S_n.
    #[test]
    fn scalar_bet_identity(stake in -5.0f64..5.0, seed in 0u64..300) {
        let spec = ProtocolSpec::bounded(1.0).unwrap();
        let mut fc = gtp::forecaster::RandomForecaster::new(&spec, seed);
        let mut sk = ConstantBet::new(stake, 0.0);
        let mut re = gtp::reality::RandomSignReality::new(1.0, seed.wrapping_mul(77));
        let trace = run_game(&spec, &mut fc, &mut sk, &mut re, 100, 1.0).unwrap();
        let sums = trace.spread_sums();
        for (r, s) in trace.rounds.iter().zip(&sums[1..]) {
            prop_assert!(within(r.capital_after - 1.0, stake * s, 1e-9, 1e-12));
        }
    }
}
