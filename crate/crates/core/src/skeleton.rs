//! Exact infinite-horizon cut structure of a nearest-neighbour birth–death
//! chain, sampled level by level.
//!
//! Let `η_y` be the hitting time of level `y` and `D_y` the lowest level seen
//! on `[η_y, η_{y+1}]`. The `D_y` are independent, and
//! `P(D_y >= z) = A/(A + 1)` with `A = Σ_{m=z}^{y} Π_{i=m}^{y} π_i`, `π_i = p_i/q_i`.
//! The lowest level after `η_c` satisfies the same law with `1` replaced by
//! `T_c = 1 / P_{c+1}(never hit c)`.
//!
//! Level `c` is a cutpoint iff `D_y >= c + 1` for every `y > c`, and a strong
//! cutpoint iff in addition `D_c = c`. The separating set contains `(k, k+1)`
//! exactly when `k` is a cutpoint, and the integer `k` exactly when `k` is a
//! strong cutpoint.

use rand::Rng;

use crate::error::{invalid, Result};
use crate::generators::BirthDeath;
use crate::hitting::never_return;

#[derive(Debug, Clone)]
pub struct CutSkeleton {
    bd: BirthDeath,
    pi: Vec<f64>,
}

impl CutSkeleton {
    /// Tabulates `π_i` for `i <= max_level`.
    pub fn new(bd: &BirthDeath, max_level: u64) -> Self {
        let pi = (0..=max_level)
            .map(|i| {
                let p = bd.up(i);
                if p >= 1.0 {
                    f64::INFINITY
                } else {
                    (-bd.log_ratio(i)).exp()
                }
            })
            .collect();
        CutSkeleton { bd: bd.clone(), pi }
    }

    pub fn max_level(&self) -> u64 {
        self.pi.len() as u64 - 1
    }

    /// `max(D, floor)` where `P(D >= z) = A(z)/(A(z) + t)`, scanning down from `y`.
    fn sample_min<R: Rng + ?Sized>(&self, y: u64, floor: u64, t: f64, rng: &mut R) -> u64 {
        if t == f64::INFINITY {
            return floor;
        }
        let v: f64 = rng.random();
        let need = t * v / (1.0 - v);
        let mut prod = 1.0;
        let mut a = 0.0;
        let mut z = y;
        while z > floor {
            prod *= self.pi[z as usize];
            a += prod;
            if a >= need {
                return z;
            }
            z -= 1;
        }
        floor
    }

    /// `max(D_y, floor)` for the excursion between `η_y` and `η_{y+1}`.
    pub fn sample_excursion_min<R: Rng + ?Sized>(&self, y: u64, floor: u64, rng: &mut R) -> u64 {
        self.sample_min(y, floor, 1.0, rng)
    }

    /// `P_{c+1}(never hit c)`, the only costly input of a block sample.
    pub fn stay_probability(&self, c: u64) -> Result<f64> {
        never_return(&self.bd, c, c + 1)
    }

    /// `max(min_{m >= η_c} X_m, floor)`.
    pub fn sample_final_min<R: Rng + ?Sized>(&self, c: u64, floor: u64, rng: &mut R) -> Result<u64> {
        let stay = self.stay_probability(c)?;
        Ok(self.final_min_given(c, floor, stay, rng))
    }

    fn final_min_given<R: Rng + ?Sized>(&self, c: u64, floor: u64, stay: f64, rng: &mut R) -> u64 {
        let t = if stay > 0.0 { 1.0 / stay } else { f64::INFINITY };
        self.sample_min(c, floor, t, rng)
    }

    /// Cutpoint and strong-cutpoint flags for the levels `lo..=hi`.
    pub fn sample_block<R: Rng + ?Sized>(&self, lo: u64, hi: u64, rng: &mut R) -> Result<SkeletonBlock> {
        let stay = self.stay_probability(hi + 1)?;
        self.sample_block_given(lo, hi, stay, rng)
    }

    /// As [`sample_block`](Self::sample_block), with `stay = stay_probability(hi + 1)` precomputed.
    pub fn sample_block_given<R: Rng + ?Sized>(&self, lo: u64, hi: u64, stay: f64, rng: &mut R) -> Result<SkeletonBlock> {
        if lo > hi || hi + 1 > self.max_level() {
            return Err(invalid(format!("block [{lo}, {hi}] outside the tabulated range")));
        }
        let n = (hi - lo + 1) as usize;
        let d: Vec<u64> = (lo..=hi).map(|y| self.sample_excursion_min(y, lo.saturating_sub(1), rng)).collect();
        let mut future_min = self.final_min_given(hi + 1, lo.saturating_sub(1), stay, rng);
        let mut cut = vec![false; n];
        let mut strong = vec![false; n];
        for c in (lo..=hi).rev() {
            let i = (c - lo) as usize;
            cut[i] = future_min > c;
            strong[i] = cut[i] && d[i] == c;
            future_min = future_min.min(d[i]);
        }
        Ok(SkeletonBlock { lo, cut, strong })
    }
}

/// Exact cut structure on a range of levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkeletonBlock {
    pub lo: u64,
    pub cut: Vec<bool>,
    pub strong: Vec<bool>,
}

impl SkeletonBlock {
    pub fn hi(&self) -> u64 {
        self.lo + self.cut.len() as u64 - 1
    }

    pub fn cutpoints(&self) -> impl Iterator<Item = u64> + '_ {
        self.cut.iter().enumerate().filter(|(_, &c)| c).map(|(i, _)| self.lo + i as u64)
    }

    pub fn strong_cutpoints(&self) -> impl Iterator<Item = u64> + '_ {
        self.strong.iter().enumerate().filter(|(_, &c)| c).map(|(i, _)| self.lo + i as u64)
    }

    /// Whether a cutpoint lies in `[a, b]`.
    pub fn has_cut_in(&self, a: f64, b: f64) -> bool {
        self.cutpoints().any(|c| a <= c as f64 && c as f64 <= b)
    }

    /// `|S ∩ [a, b]|` from the components `(k, k+1)`, `k` a cutpoint. Only
    /// exact when `[a, b - 1]` lies inside the block.
    pub fn separating_measure(&self, a: f64, b: f64) -> f64 {
        self.cutpoints()
            .map(|k| ((k + 1) as f64).min(b) - (k as f64).max(a))
            .filter(|&m| m > 0.0)
            .sum()
    }
}

/// `D_y` read off a path of a nearest-neighbour chain, for every level `y`
/// with `η_{y+1}` inside the path.
pub fn excursion_minima(xs: &[f64]) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let Some(&x0) = xs.first() else { return out };
    let mut level = x0 as u64;
    let mut low = level;
    for &x in &xs[1..] {
        let x = x as u64;
        if x > level {
            out.push((level, low));
            level = x;
            low = x;
        } else {
            low = low.min(x);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive;

    #[test]
    fn excursion_minima_from_a_path() {
        let xs = [0.0, 1.0, 0.0, 1.0, 2.0, 3.0, 2.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(excursion_minima(&xs), vec![(0, 0), (1, 0), (2, 2), (3, 1)]);
    }

    #[test]
    fn top_of_excursion_law_is_one_up_step() {
        let bd = BirthDeath::lamperti(2.0, None, 2).unwrap();
        let s = CutSkeleton::new(&bd, 200);
        let mut rng = derive(1, 0);
        let n = 40_000;
        let hits = (0..n).filter(|_| s.sample_excursion_min(100, 0, &mut rng) == 100).count();
        let p = bd.up(100);
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((hits as f64 / n as f64 - p).abs() < 4.0 * se);
    }
}
