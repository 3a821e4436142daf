mod common;

use common::race_by_linear_solve;
use cutwalk::generators::{BirthDeath, PlusOneMinusTwo, ScalarSpec};
use cutwalk::hitting::*;
use proptest::prelude::*;

fn bd_chain() -> impl Strategy<Value = BirthDeath> {
    prop_oneof![
        (0.0f64..3.0, prop::option::of(-1.0f64..3.0), 2u64..6)
            .prop_filter_map("not a probability", |(a, c, f)| BirthDeath::lamperti(a, c, f).ok()),
        (0.2f64..0.8, 1u64..4).prop_map(|(p, f)| BirthDeath::homogeneous(p, f).unwrap()),
    ]
}

/// `(chain, a, start, b)` with `a >= x_floor` and `a < start < b`.
fn race_case() -> impl Strategy<Value = (BirthDeath, u64, u64, u64)> {
    (bd_chain(), 0u64..200, 2u64..60).prop_flat_map(|(bd, off, width)| {
        let a = bd.x_floor() + off;
        let b = a + width;
        (Just(bd), Just(a), a + 1..b, Just(b))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn product_formula_matches_linear_solve((bd, a, s, b) in race_case()) {
        let exact = bd_exact_race(&bd, s, a, b).unwrap();
        let solved = race_by_linear_solve(|i| bd.up(i), a, b, s);
        prop_assert!((exact - solved).abs() <= 1e-10 * solved.max(1e-300) + 1e-14, "{} vs {}", exact, solved);
        let ladder = RaceLadder::new(&bd, a, b).unwrap();
        prop_assert!((ladder.probability(s) - exact).abs() <= 1e-10 * exact + 1e-14);
    }

    #[test]
    fn race_is_monotone((bd, a, s, b) in race_case()) {
        let p = bd_exact_race(&bd, s, a, b).unwrap();
        if s + 1 < b {
            prop_assert!(bd_exact_race(&bd, s + 1, a, b).unwrap() >= p);
        }
        prop_assert!(bd_exact_race(&bd, s, a, b + 5).unwrap() <= p);
        prop_assert!(never_return(&bd, a, s).unwrap() <= p * (1.0 + 1e-9) + 1e-14);
    }
}

#[test]
fn symmetric_walk_is_linear() {
    let bd = BirthDeath::homogeneous(0.5, 1).unwrap();
    for m in 1..20 {
        let p = bd_exact_race(&bd, 10 + m, 10, 30).unwrap();
        assert!((p - m as f64 / 20.0).abs() < 1e-14);
    }
}

#[test]
fn homogeneous_never_return() {
    for p in [0.55, 0.6, 0.75, 0.9] {
        let bd = BirthDeath::homogeneous(p, 1).unwrap();
        let want = 1.0 - (1.0 - p) / p;
        assert!((never_return(&bd, 5, 6).unwrap() - want).abs() < 1e-12, "p = {p}");
        let want2 = 1.0 - ((1.0 - p) / p).powi(3);
        assert!((never_return(&bd, 5, 8).unwrap() - want2).abs() < 1e-12);
    }
}

#[test]
fn never_return_is_the_limit_of_races() {
    let bd = BirthDeath::lamperti(2.0, None, 2).unwrap();
    let nr = never_return(&bd, 40, 41).unwrap();
    let mut last = 1.0;
    for b in [100u64, 1_000, 10_000, 100_000] {
        let r = bd_exact_race(&bd, 41, 40, b).unwrap();
        assert!(r <= last && r >= nr);
        last = r;
    }
    assert!((last - nr) / nr < 1e-2);
}

// For p = 1/2 + a/(4x) the scale increments behave like x^{-a}, so
// P_{x+1}(never hit x) ~ (a-1)/x.
#[test]
fn transient_escape_scales_like_one_over_x() {
    let bd = BirthDeath::lamperti(2.0, None, 2).unwrap();
    let v: Vec<f64> = [100u64, 1000, 10_000]
        .iter()
        .map(|&x| x as f64 * never_return(&bd, x, x + 1).unwrap())
        .collect();
    assert!(v.windows(2).all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs()));
    assert!((v[2] - 1.0).abs() < 1e-3, "{v:?}");
}

// With the extra c/(4x log x) term at a = 1 the increments behave like
// 1/(x log^c x), so P_{x+1}(never hit x) ~ (c-1)/(x log x).
#[test]
fn critical_escape_scales_like_one_over_x_log_x() {
    let bd = BirthDeath::lamperti(1.0, Some(2.0), 2).unwrap();
    for (x, tol) in [(1000u64, 2e-3), (10_000, 2e-4)] {
        let v = x as f64 * (x as f64).ln() * never_return(&bd, x, x + 1).unwrap();
        assert!((v - 1.0).abs() < tol, "x = {x}: {v}");
    }
}

#[test]
fn recurrent_chain_never_escapes() {
    let bd = BirthDeath::lamperti(0.5, None, 2).unwrap();
    assert_eq!(never_return(&bd, 10, 11).unwrap(), 0.0);
    let sym = BirthDeath::homogeneous(0.5, 1).unwrap();
    assert_eq!(never_return(&sym, 10, 11).unwrap(), 0.0);
}

#[test]
fn monte_carlo_race_brackets_the_exact_value() {
    let bd = BirthDeath::lamperti(1.5, None, 2).unwrap();
    let spec = ScalarSpec::BirthDeath(bd.clone());
    let exact = bd_exact_race(&bd, 25, 20, 40).unwrap();
    for engine in [RaceEngine::Steps { max_steps: 1 << 24 }, RaceEngine::Ladder] {
        let e = mc_race(&spec, 25.0, 20.0, 20.0, 20_000, 3, engine).unwrap();
        let se = (exact * (1.0 - exact) / 20_000.0).sqrt();
        assert!((e.estimate - exact).abs() < 4.0 * se, "{engine:?}: {} vs {exact}", e.estimate);
        assert_eq!(e.truncations, 0);
    }
}

#[test]
fn skip_free_chains_enter_the_target_exactly() {
    let spec = ScalarSpec::PlusOneMinusTwo(PlusOneMinusTwo::new(1.0, 2).unwrap());
    let race = mc_race(&spec, 30.0, 20.0, 20.0, 4000, 9, RaceEngine::default()).unwrap();
    let entry = targeted_entry_probability(&spec, 30.0, 20.0, 20.0, 4000, 9, 1 << 24).unwrap();
    assert_eq!(race.escapes, entry.escapes);
}

#[test]
fn closing_the_tail_removes_the_surrogate_bias() {
    let bd = BirthDeath::lamperti(1.0, Some(2.0), 2).unwrap();
    let spec = ScalarSpec::BirthDeath(bd.clone());
    let x = 1000u64;
    let exact = never_return(&bd, x, x + 1).unwrap();
    let opts = EscapeOptions {
        engine: RaceEngine::Ladder,
        close_tail: true,
        ..Default::default()
    };
    let n = 1 << 21;
    let e = mc_escape_forever(&spec, (x + 1) as f64, x as f64, n, 5, opts).unwrap();
    let se = (exact / n as f64).sqrt();
    assert!((e.estimate.estimate - exact).abs() < 4.0 * se, "{} vs {exact}", e.estimate.estimate);
    let open = mc_escape_forever(&spec, (x + 1) as f64, x as f64, 10, 5, EscapeOptions::default()).unwrap();
    assert!(open.surrogate_bias.unwrap() > exact);
}
