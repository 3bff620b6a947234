use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::step;
use crate::error::{Error, Result};
use crate::padic::{Params, ReducedFraction};

/// Data of a `k`-periodic point: `ell` nonzero digits `digits[i]` placed at
/// the strictly increasing positions `positions[i] < k`. The closing value
/// `ψ(ℓ) = k` is implicit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PeriodicSpec {
    pub k: usize,
    pub positions: Vec<usize>,
    pub digits: Vec<u32>,
}

impl PeriodicSpec {
    pub fn ell(&self) -> usize {
        self.positions.len()
    }

    /// `u = −(Σ_{i<ℓ} aᵢ p^{ψ(i)} q^{ℓ−i−1}) / (q^ℓ − p^k)`.
    pub fn value(&self, params: &Params) -> ReducedFraction {
        let ell = self.ell();
        let numerator: BigInt = self
            .positions
            .iter()
            .zip(&self.digits)
            .enumerate()
            .map(|(i, (&pos, &a))| {
                BigInt::from(a)
                    * params.p_big().pow(pos as u32)
                    * params.q_big().pow((ell - i - 1) as u32)
            })
            .sum();
        let denominator = params.q_big().pow(ell as u32) - params.p_big().pow(self.k as u32);
        assert!(!denominator.is_zero(), "q^ℓ = p^k is impossible for coprime p, q");
        -BigRational::new(numerator, denominator)
    }
}

/// Every `PeriodicSpec` for period `k` over digits `{1, …, p−1}`, ordered by
/// `ℓ`, then by position set (lexicographic), then by digit tuple.
/// There are `Σ_ℓ C(k, ℓ)(p−1)^ℓ = p^k` of them.
pub fn periodic_specs(k: usize, p: u64) -> impl Iterator<Item = PeriodicSpec> {
    (0..=k).flat_map(move |ell| {
        Combinations::new(k, ell).flat_map(move |positions| {
            DigitTuples::new(ell, p as u32).map(move |digits| PeriodicSpec {
                k,
                positions: positions.clone(),
                digits,
            })
        })
    })
}

/// All `u` with `g^k(u) = u`, deduplicated and sorted ascending. Each value
/// is checked by direct iteration.
pub fn enumerate_periodic(k: usize, params: &Params) -> Result<Vec<ReducedFraction>> {
    if k == 0 {
        return Err(Error::Precondition("period k must be at least 1".into()));
    }
    let mut out = Vec::new();
    for spec in periodic_specs(k, params.p()) {
        let u = spec.value(params);
        let mut v = u.clone();
        for _ in 0..k {
            v = step(&v, params)?;
        }
        assert_eq!(v, u, "g^{k}(u) = u for {spec:?}");
        out.push(u);
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Solutions `(k, ℓ)` of `q^ℓ − p^k = ∓1`, split by sign.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CatalanSolutions {
    /// `q^ℓ − p^k = −1`
    pub minus_one: Vec<(u32, u32)>,
    /// `q^ℓ − p^k = +1`
    pub plus_one: Vec<(u32, u32)>,
}

/// Exhaustive scan over `1 ≤ k ≤ k_max`, `0 ≤ ℓ ≤ ell_max`.
pub fn catalan_search(p: u64, q: u64, k_max: u32, ell_max: u32) -> CatalanSolutions {
    let (pb, qb) = (BigInt::from(p), BigInt::from(q));
    let mut minus_one = Vec::new();
    let mut plus_one = Vec::new();
    let mut pk = pb.clone();
    for k in 1..=k_max {
        let mut ql = BigInt::one();
        for ell in 0..=ell_max {
            let diff = &ql - &pk;
            if diff == -BigInt::one() {
                minus_one.push((k, ell));
            } else if diff.is_one() {
                plus_one.push((k, ell));
            }
            ql *= &qb;
        }
        pk *= &pb;
    }
    CatalanSolutions {
        minus_one,
        plus_one,
    }
}

/// `ell`-subsets of `{0, …, n−1}` in lexicographic order.
struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    fn new(n: usize, ell: usize) -> Self {
        Combinations {
            n,
            current: (ell <= n).then(|| (0..ell).collect()),
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let c = self.current.as_mut().unwrap();
        let ell = c.len();
        match (0..ell).rev().find(|&i| c[i] < self.n - ell + i) {
            Some(i) => {
                c[i] += 1;
                for j in i + 1..ell {
                    c[j] = c[j - 1] + 1;
                }
            }
            None => self.current = None,
        }
        Some(out)
    }
}

/// Tuples in `{1, …, p−1}^len`, lexicographic.
struct DigitTuples {
    p: u32,
    current: Option<Vec<u32>>,
}

impl DigitTuples {
    fn new(len: usize, p: u32) -> Self {
        DigitTuples {
            p,
            current: Some(vec![1; len]),
        }
    }
}

impl Iterator for DigitTuples {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let out = self.current.clone()?;
        let c = self.current.as_mut().unwrap();
        match (0..c.len()).rev().find(|&i| c[i] + 1 < self.p) {
            Some(i) => {
                c[i] += 1;
                for d in &mut c[i + 1..] {
                    *d = 1;
                }
            }
            None => self.current = None,
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::parse;

    fn ints(v: &[i64]) -> Vec<ReducedFraction> {
        v.iter().map(|n| parse(&n.to_string()).unwrap()).collect()
    }

    #[test]
    fn combinations_count() {
        assert_eq!(Combinations::new(5, 2).count(), 10);
        assert_eq!(Combinations::new(4, 0).count(), 1);
        assert_eq!(Combinations::new(4, 4).count(), 1);
        assert_eq!(
            Combinations::new(3, 2).collect::<Vec<_>>(),
            vec![vec![0, 1], vec![0, 2], vec![1, 2]]
        );
        assert_eq!(DigitTuples::new(2, 3).count(), 4);
        assert_eq!(DigitTuples::new(0, 3).count(), 1);
    }

    #[test]
    fn period_one_and_two() {
        let c = Params::collatz();
        assert_eq!(enumerate_periodic(1, &c).unwrap(), ints(&[-1, 0]));
        assert_eq!(enumerate_periodic(2, &c).unwrap(), ints(&[-1, 0, 1, 2]));
    }

    #[test]
    fn period_two_brute_force() {
        // every candidate with small height satisfying g²(u) = u must appear
        let c = Params::collatz();
        let found = enumerate_periodic(2, &c).unwrap();
        for den in (1..30).step_by(2) {
            for num in -60..60 {
                let u = BigRational::new(num.into(), BigInt::from(den));
                let v = step(&step(&u, &c).unwrap(), &c).unwrap();
                if v == u {
                    assert!(found.contains(&u), "{u}");
                }
            }
        }
    }

    #[test]
    fn minus_seventeen_has_period_eleven() {
        let all = enumerate_periodic(11, &Params::collatz()).unwrap();
        assert_eq!(all.len(), 2048);
        assert!(all.contains(&parse("-17").unwrap()));
    }

    #[test]
    fn census_small() {
        for (p, q) in [(2u64, 3u64), (3, 5), (5, 7)] {
            let params = Params::new(p, q).unwrap();
            for k in 1..=4 {
                let n = enumerate_periodic(k, &params).unwrap().len() as u64;
                assert_eq!(n, p.pow(k as u32));
            }
        }
        assert!(enumerate_periodic(0, &Params::collatz()).is_err());
    }

    #[test]
    fn spec_ordering() {
        let specs: Vec<_> = periodic_specs(2, 2).collect();
        assert_eq!(specs.len(), 4);
        assert_eq!(specs[0].ell(), 0);
        assert_eq!(specs[1].positions, vec![0]);
        assert_eq!(specs[2].positions, vec![1]);
        assert_eq!(specs[3].positions, vec![0, 1]);
    }

    #[test]
    fn catalan_examples() {
        let s = catalan_search(2, 3, 64, 64);
        assert_eq!(s.minus_one, vec![(1, 0), (2, 1)]);
        assert_eq!(s.plus_one, vec![(1, 1), (3, 2)]);
        let s = catalan_search(5, 7, 64, 64);
        assert!(s.minus_one.is_empty() && s.plus_one.is_empty());
    }

    #[test]
    fn catalan_matches_brute_force() {
        // u128 scan as an independent check of the big-integer one
        for (p, q) in [(2u128, 3u128), (3, 2), (2, 5), (7, 2)] {
            let mut minus = Vec::new();
            let mut plus = Vec::new();
            for k in 1u32..=30 {
                for ell in 0u32..=30 {
                    let (a, b) = (q.pow(ell) as i128, p.pow(k) as i128);
                    match a - b {
                        -1 => minus.push((k, ell)),
                        1 => plus.push((k, ell)),
                        _ => {}
                    }
                }
            }
            let s = catalan_search(p as u64, q as u64, 30, 30);
            assert_eq!(s.minus_one, minus);
            assert_eq!(s.plus_one, plus);
        }
    }
}
