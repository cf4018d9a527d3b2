use serde::Serialize;

use crate::cf::source::CoefficientSource;
use crate::error::Result;
use crate::scalar::Scalar;

/// Ratio below which successive dyadic block sums count as a convergent
/// tail.
pub const SUMMABLE_RATIO: f64 = 0.9;

/// `Σ_{2^j ≤ i < 2^{j+1}} |aᵢ − a|`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockSum {
    pub from: usize,
    pub to: usize,
    pub sum: Scalar,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GillProfile {
    pub limit: Scalar,
    /// `S_n = Σ_{i ≤ n} |aᵢ − a|` for `n = 1..=N`.
    #[serde(skip)]
    pub partial_sums: Vec<Scalar>,
    /// `(n, S_n)` at `n = 2^j` and at `N`.
    pub checkpoints: Vec<(usize, Scalar)>,
    pub block_sums: Vec<BlockSum>,
    pub summable_heuristic: bool,
}

impl GillProfile {
    pub fn total(&self) -> Option<&Scalar> {
        self.partial_sums.last()
    }
}

/// Partial sums of `|aᵢ − a|` and a summability guess: the last three
/// ratios of consecutive complete dyadic blocks must all be below
/// [`SUMMABLE_RATIO`]. Blocks that are exactly zero count as summable.
pub fn gill_check(src: &dyn CoefficientSource, a: &Scalar, n: usize) -> Result<GillProfile> {
    let prec = src.prec();
    let n = src.len().map_or(n, |len| len.min(n));
    let mut partial_sums = Vec::with_capacity(n);
    let mut running = Scalar::zero(prec);
    let mut blocks = Vec::new();
    let mut block = Scalar::zero(prec);
    let mut block_start = 1usize;
    for i in 1..=n {
        let d = (src.coefficient(i)? - a).abs();
        running = &running + &d;
        block = &block + &d;
        partial_sums.push(running.clone());
        if i + 1 == 2 * block_start {
            blocks.push(BlockSum {
                from: block_start,
                to: i,
                sum: std::mem::replace(&mut block, Scalar::zero(prec)),
            });
            block_start = i + 1;
        }
    }
    let mut checkpoints: Vec<(usize, Scalar)> = std::iter::successors(Some(1usize), |k| k.checked_mul(2))
        .take_while(|&k| k <= n)
        .map(|k| (k, partial_sums[k - 1].clone()))
        .collect();
    if n > 0 && checkpoints.last().map(|c| c.0) != Some(n) {
        checkpoints.push((n, partial_sums[n - 1].clone()));
    }
    let ratio = Scalar::from_f64(SUMMABLE_RATIO, prec);
    let tail = &blocks[blocks.len().saturating_sub(4)..];
    let summable_heuristic = tail.len() >= 2
        && tail.windows(2).all(|w| {
            if w[1].sum.is_zero() {
                true
            } else if w[0].sum.is_zero() {
                false
            } else {
                &w[1].sum / &w[0].sum < ratio
            }
        });
    Ok(GillProfile {
        limit: a.clone(),
        partial_sums,
        checkpoints,
        block_sums: blocks,
        summable_heuristic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::source::{ConstantSource, GillSource, PerturbationRule};

    const P: u32 = 128;

    fn gill(rule: &str) -> GillSource {
        GillSource::new(Scalar::one(P), PerturbationRule::parse(rule).unwrap()).unwrap()
    }

    #[test]
    fn constant_is_summable_with_zero_sums() {
        let src = ConstantSource::new(Scalar::one(P)).unwrap();
        let g = gill_check(&src, &Scalar::one(P), 1000).unwrap();
        assert!(g.partial_sums.iter().all(Scalar::is_zero));
        assert!(g.summable_heuristic);
    }

    #[test]
    fn geometric_sums_to_one() {
        let g = gill_check(&gill("2^-i"), &Scalar::one(P), 1000).unwrap();
        assert!((g.total().unwrap().to_f64() - 1.0).abs() < 1e-12);
        assert!(g.summable_heuristic);
    }

    #[test]
    fn harmonic_grows_like_log() {
        let g = gill_check(&gill("1/i"), &Scalar::one(P), 4096).unwrap();
        let h = g.total().unwrap().to_f64();
        assert!((h - (4096f64.ln() + 0.5772)).abs() < 1e-3);
        assert!(!g.summable_heuristic);
        assert_eq!(g.block_sums.len(), 12);
    }

    #[test]
    fn square_summable() {
        assert!(
            gill_check(&gill("1/i^2"), &Scalar::one(P), 4096)
                .unwrap()
                .summable_heuristic
        );
    }
}
