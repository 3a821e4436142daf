use cutwalk::cuts::detect_cutpoints;
use cutwalk::generators::{BirthDeath, ScalarSpec};
use cutwalk::hitting::never_return;
use cutwalk::rng::{derive, StreamId};
use cutwalk::skeleton::{excursion_minima, CutSkeleton};

/// Cut levels of a nearest-neighbour path from its excursion minima: `c` is
/// a cutpoint iff every later excursion, and the unfinished one at the top,
/// stays above `c`.
fn cut_levels_from_minima(xs: &[f64]) -> Vec<u64> {
    let d = excursion_minima(xs);
    let top = xs.iter().cloned().fold(0.0, f64::max) as u64;
    let eta_top = xs.iter().position(|&v| v as u64 == top).unwrap();
    let mut future = xs[eta_top..].iter().map(|&v| v as u64).min().unwrap();
    let mut out = Vec::new();
    for &(c, dc) in d.iter().rev() {
        if future > c {
            out.push(c);
        }
        future = future.min(dc);
    }
    out.reverse();
    out
}

#[test]
fn minima_reproduce_the_detector_on_paths() {
    let spec = ScalarSpec::BirthDeath(BirthDeath::lamperti(2.0, None, 2).unwrap());
    for r in 0..20 {
        let t = spec.simulate(0.0, 20_000, StreamId::new(11, r)).unwrap();
        let xs = t.positions();
        let top = t.max();
        let from_minima = cut_levels_from_minima(xs);
        let detected: Vec<u64> = detect_cutpoints(xs, 0.0)
            .unwrap()
            .iter()
            .filter(|c| c.x < top)
            .map(|c| c.x as u64)
            .collect();
        assert_eq!(from_minima, detected, "replica {r}");
    }
}

#[test]
fn cut_and_strong_frequencies_match_exact_values() {
    let bd = BirthDeath::lamperti(2.0, None, 2).unwrap();
    let skel = CutSkeleton::new(&bd, 200);
    let c = 40u64;
    let stay = never_return(&bd, c, c + 1).unwrap();
    let n = 40_000;
    let far = skel.stay_probability(61).unwrap();
    let mut rng = derive(21, 0);
    let (mut cut, mut strong) = (0u32, 0u32);
    for _ in 0..n {
        let b = skel.sample_block_given(30, 60, far, &mut rng).unwrap();
        let i = (c - 30) as usize;
        cut += b.cut[i] as u32;
        strong += b.strong[i] as u32;
    }
    let check = |k: u32, p: f64| {
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((k as f64 / n as f64 - p).abs() < 4.0 * se, "{k}/{n} vs {p}");
    };
    check(cut, stay);
    // strong: first step from c is up, then no return
    check(strong, bd.up(c) * stay);
}

#[test]
fn blocks_are_reproducible_and_consistent() {
    let bd = BirthDeath::lamperti(1.0, Some(2.0), 2).unwrap();
    let skel = CutSkeleton::new(&bd, 5000);
    let a = skel.sample_block(1000, 4000, &mut derive(3, 1)).unwrap();
    let b = skel.sample_block(1000, 4000, &mut derive(3, 1)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.hi(), 4000);
    for (c, s) in a.cut.iter().zip(&a.strong) {
        assert!(!s || *c);
    }
    let m = a.separating_measure(2000.0, 4000.0);
    let n = a.cutpoints().filter(|&c| (2000..4000).contains(&c)).count() as f64;
    assert_eq!(m, n);
    assert!(skel.sample_block(10, 5000, &mut derive(3, 2)).is_err());
}
