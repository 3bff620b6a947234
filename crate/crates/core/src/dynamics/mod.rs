//! The generalized Collatz map `g_{p,q}` and its orbits.

mod cycle;
mod periodic;
mod search;

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::Serialize;

use crate::error::Result;
use crate::padic::{eps0, residue, Params, ReducedFraction};
use crate::rational;

pub use cycle::{cycle_identity, Cycle, CycleIdentity};
pub use periodic::{
    catalan_search, enumerate_periodic, periodic_specs, CatalanSolutions, PeriodicSpec,
};
pub use search::{integer_cycle_search, FoundCycle, SearchOptions, SearchReport};

/// The orbit digit `a = ε₀(−q·u)`; zero exactly when `p | u`.
pub fn orbit_digit(u: &ReducedFraction, params: &Params) -> Result<u64> {
    eps0(&(-(u * params.q_big())), params.p())
}

/// One application of `g_{p,q}`.
pub fn step(u: &ReducedFraction, params: &Params) -> Result<ReducedFraction> {
    let a = orbit_digit(u, params)?;
    Ok(step_with_digit(u, a, params))
}

pub(crate) fn step_with_digit(u: &ReducedFraction, a: u64, params: &Params) -> ReducedFraction {
    if a == 0 {
        // p | u, and the reduced denominator is prime to p
        BigRational::new(u.numer() / params.p_big(), u.denom().clone())
    } else {
        let num = (u.numer() * params.q_big() + u.denom() * BigInt::from(a)) / params.p_big();
        BigRational::new(num, u.denom().clone())
    }
}

/// Detected eventual periodicity: `states[preperiod + period] = states[preperiod]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CycleInfo {
    pub preperiod: usize,
    pub period: usize,
}

/// An orbit `u₀, u₁, …` together with its digits `aᵢ = ε₀(−q·uᵢ)` and the
/// cumulative nonzero-digit counts `r_k = #{i ≤ k : aᵢ ≠ 0}`.
#[derive(Clone, Debug, Serialize)]
pub struct OrbitRecord {
    pub params: Params,
    #[serde(serialize_with = "rational::serde_vec::serialize")]
    pub states: Vec<ReducedFraction>,
    pub digits: Vec<u32>,
    pub r: Vec<u64>,
    pub cycle: Option<CycleInfo>,
    pub truncated: bool,
}

impl OrbitRecord {
    /// Members of the terminal cycle, if one was detected.
    pub fn cycle_states(&self) -> Option<&[ReducedFraction]> {
        self.cycle
            .map(|c| &self.states[c.preperiod..c.preperiod + c.period])
    }

    /// Indices of the nonzero digits among those recorded.
    pub fn nonzero_positions(&self) -> Vec<usize> {
        self.digits
            .iter()
            .enumerate()
            .filter(|(_, &d)| d != 0)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Iterates `g` at most `max_steps` times, stopping at the first repeated
/// state. Exact states are hashed, so the preperiod is exact.
pub fn orbit(u: &ReducedFraction, params: &Params, max_steps: usize) -> Result<OrbitRecord> {
    let mut states = vec![u.clone()];
    let mut digits = Vec::new();
    let mut r = Vec::new();
    let mut seen: HashMap<ReducedFraction, usize> = HashMap::new();
    let mut count = 0u64;
    let mut cycle = None;
    loop {
        let n = states.len() - 1;
        let current = &states[n];
        let a = orbit_digit(current, params)?;
        if a != 0 {
            count += 1;
        }
        digits.push(a as u32);
        r.push(count);
        if let Some(&first) = seen.get(current) {
            cycle = Some(CycleInfo {
                preperiod: first,
                period: n - first,
            });
            break;
        }
        if n == max_steps {
            break;
        }
        seen.insert(current.clone(), n);
        let next = step_with_digit(current, a, params);
        debug_assert_eq!(
            &next * params.p_big(),
            if a == 0 {
                current.clone()
            } else {
                current * params.q_big()
            } + BigInt::from(a),
            "p·u_(n+1) = q^χ·u_n + a_n"
        );
        states.push(next);
    }
    Ok(OrbitRecord {
        params: params.clone(),
        states,
        digits,
        r,
        truncated: cycle.is_none(),
        cycle,
    })
}

/// Verdict of a bounded periodicity test. Running out of budget is never
/// reported as "not periodic".
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Periodicity {
    Periodic { preperiod: usize, period: usize },
    Truncated { steps: usize },
}

impl Periodicity {
    pub fn is_periodic(&self) -> bool {
        matches!(self, Periodicity::Periodic { .. })
    }
}

pub fn is_ultimately_periodic(
    u: &ReducedFraction,
    params: &Params,
    max_steps: usize,
) -> Result<Periodicity> {
    let rec = orbit(u, params, max_steps)?;
    Ok(match rec.cycle {
        Some(c) => Periodicity::Periodic {
            preperiod: c.preperiod,
            period: c.period,
        },
        None => Periodicity::Truncated { steps: max_steps },
    })
}

/// Brent's cycle finder: constant memory, for orbits too long to hash.
/// Reports the same exact `(preperiod, period)` as [`orbit`].
pub fn brent_periodicity(
    u: &ReducedFraction,
    params: &Params,
    max_steps: usize,
) -> Result<Periodicity> {
    let mut power = 1usize;
    let mut lambda = 1usize;
    let mut tortoise = u.clone();
    let mut hare = step(u, params)?;
    let mut spent = 1usize;
    while tortoise != hare {
        if spent >= max_steps {
            return Ok(Periodicity::Truncated { steps: max_steps });
        }
        if power == lambda {
            tortoise = hare.clone();
            power *= 2;
            lambda = 0;
        }
        hare = step(&hare, params)?;
        lambda += 1;
        spent += 1;
    }
    let mut tortoise = u.clone();
    let mut hare = u.clone();
    for _ in 0..lambda {
        hare = step(&hare, params)?;
    }
    let mut mu = 0;
    while tortoise != hare {
        tortoise = step(&tortoise, params)?;
        hare = step(&hare, params)?;
        mu += 1;
    }
    Ok(Periodicity::Periodic {
        preperiod: mu,
        period: lambda,
    })
}

/// For `q < p`, an upper bound on the number of distinct states of the orbit
/// of `u = a/b`, hence on the steps before a repeat.
///
/// Each step maps `a/b` to `a'/b'` with `b' | b` and
/// `|a'| ≤ (q|a| + (p−1)b)/p`, so `|a'| ≤ A = max(|a|, (p−1)b/(p−q))` along
/// the whole orbit. States live in `{a/b' : |a| ≤ A, b' | b}`.
pub fn periodicity_step_bound(u: &ReducedFraction, params: &Params) -> Option<BigUint> {
    if params.q() >= params.p() {
        return None;
    }
    let b = u.denom();
    let fixed = (b * BigInt::from(params.p() - 1)) / BigInt::from(params.p() - params.q()) + 1;
    let a = u.numer().abs().max(fixed);
    let divisors = BigInt::from(divisor_count_bound(b));
    let bound: BigInt = (a * 2 + 1) * divisors;
    bound.to_biguint()
}

/// Number of divisors of `b`, by trial division; falls back to `b` itself for
/// values too large to factor cheaply.
fn divisor_count_bound(b: &BigInt) -> BigInt {
    use num_traits::ToPrimitive;
    let Some(mut n) = b.to_u64() else {
        return b.clone();
    };
    let mut count = BigInt::one();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        let mut e = 0;
        while n % d == 0 {
            n /= d;
            e += 1;
        }
        count *= e + 1;
        d += 1;
    }
    if n > 1 {
        count *= 2;
    }
    count
}

/// Cheap integer step used by the exhaustive searches.
pub(crate) fn step_int(n: &BigInt, params: &Params) -> BigInt {
    let p = params.p();
    if residue(n, p) == 0 {
        n / params.p_big()
    } else {
        let qn = n * params.q_big();
        let a = residue(&-&qn, p);
        (qn + a) / params.p_big()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::parse;

    fn r(s: &str) -> ReducedFraction {
        parse(s).unwrap()
    }

    /// Direct transcription of the definition: divide when p | n, otherwise
    /// search for the unique residue a with p | q·n + a.
    fn oracle_step(n: i64, p: i64, q: i64) -> i64 {
        if n % p == 0 {
            return n / p;
        }
        let a = (0..p).find(|a| (q * n + a) % p == 0).unwrap();
        (q * n + a) / p
    }

    #[test]
    fn step_examples() {
        let c = Params::collatz();
        assert_eq!(step(&r("7"), &c).unwrap(), r("11"));
        assert_eq!(oracle_step(7, 2, 3), 11);
        let p513 = Params::new(5, 13).unwrap();
        assert_eq!(step(&r("-2"), &p513).unwrap(), r("-5"));
        for params in [c, p513, Params::new(7, 3).unwrap()] {
            assert_eq!(step(&r("0"), &params).unwrap(), r("0"));
        }
        assert!(step(&r("1/2"), &Params::collatz()).is_err());
    }

    #[test]
    fn step_matches_oracle_on_integers() {
        for (p, q) in [(2, 3), (3, 5), (5, 13), (7, 19), (5, 2)] {
            let params = Params::new(p, q).unwrap();
            for n in -300..300 {
                let got = step(&r(&n.to_string()), &params).unwrap();
                assert_eq!(got, r(&oracle_step(n, p as i64, q as i64).to_string()));
                assert_eq!(
                    step_int(&BigInt::from(n), &params),
                    BigInt::from(oracle_step(n, p as i64, q as i64))
                );
            }
        }
    }

    #[test]
    fn step_keeps_denominator_prime_to_p() {
        let params = Params::new(3, 5).unwrap();
        let mut u = r("7/10");
        for _ in 0..50 {
            u = step(&u, &params).unwrap();
            assert_ne!(residue(u.denom(), 3), 0);
        }
    }

    #[test]
    fn orbit_examples() {
        let c = Params::collatz();
        let rec = orbit(&r("1"), &c, 100).unwrap();
        assert_eq!(
            rec.cycle,
            Some(CycleInfo {
                preperiod: 0,
                period: 2
            })
        );
        assert_eq!(&rec.states[..3], &[r("1"), r("2"), r("1")]);

        let rec = orbit(&r("-17"), &c, 100).unwrap();
        let cyc: Vec<_> = rec.cycle_states().unwrap().to_vec();
        let expected: Vec<_> = [-17, -25, -37, -55, -82, -41, -61, -91, -136, -68, -34]
            .iter()
            .map(|n| r(&n.to_string()))
            .collect();
        assert_eq!(cyc, expected);

        let rec = orbit(&r("0"), &c, 10).unwrap();
        assert_eq!(
            rec.cycle,
            Some(CycleInfo {
                preperiod: 0,
                period: 1
            })
        );
    }

    #[test]
    fn orbit_truncation() {
        // 27 needs 70 steps to reach 1
        let rec = orbit(&r("27"), &Params::collatz(), 20).unwrap();
        assert!(rec.truncated);
        assert_eq!(rec.states.len(), 21);
        assert_eq!(rec.digits.len(), 21);
    }

    #[test]
    fn orbit_invariants() {
        let params = Params::new(3, 5).unwrap();
        let rec = orbit(&r("-101/7"), &params, 5000).unwrap();
        let c = rec.cycle.unwrap();
        assert_eq!(rec.states[c.preperiod + c.period], rec.states[c.preperiod]);
        for (i, u) in rec.states.iter().enumerate() {
            let divisible = crate::padic::padic_valuation(u, 3).map_or(true, |v| v >= 1);
            assert_eq!(rec.digits[i] == 0, divisible);
        }
        assert!(rec.r.windows(2).all(|w| w[1] - w[0] <= 1));
    }

    #[test]
    fn recurrence_and_partial_sums() {
        // p·u_{n+1} = q^χ u_n + a_n, and
        // u + Σ_{i≤n} a_i p^i / q^{r_i} = u_{n+1} p^{n+1} / q^{r_n}
        for (p, q, seed) in [(2, 3, "27"), (3, 7, "-5/4"), (5, 13, "123/7")] {
            let params = Params::new(p, q).unwrap();
            let u = r(seed);
            let rec = orbit(&u, &params, 60).unwrap();
            let pb = BigInt::from(p);
            let qb = BigInt::from(q);
            let mut sum = u.clone();
            for n in 0..rec.states.len() - 1 {
                let a = BigInt::from(rec.digits[n]);
                let chi = u32::from(rec.digits[n] != 0);
                assert_eq!(
                    &rec.states[n + 1] * &pb,
                    &rec.states[n] * qb.pow(chi) + &a
                );
                sum += BigRational::new(a * pb.pow(n as u32), qb.pow(rec.r[n] as u32));
                let rhs = &rec.states[n + 1] * BigRational::new(
                    pb.pow(n as u32 + 1),
                    qb.pow(rec.r[n] as u32),
                );
                assert_eq!(sum, rhs);
            }
        }
    }

    #[test]
    fn periodicity_examples() {
        let p52 = Params::new(5, 2).unwrap();
        let u = r("123456789");
        let bound = periodicity_step_bound(&u, &p52).unwrap();
        let budget = usize::try_from(bound).unwrap_or(usize::MAX).min(1_000_000);
        assert!(is_ultimately_periodic(&u, &p52, budget).unwrap().is_periodic());
        let c = Params::collatz();
        assert!(is_ultimately_periodic(&r("27"), &c, 1000).unwrap().is_periodic());
        assert_eq!(
            is_ultimately_periodic(&r("0"), &c, 10).unwrap(),
            Periodicity::Periodic {
                preperiod: 0,
                period: 1
            }
        );
        assert_eq!(
            is_ultimately_periodic(&r("27"), &c, 10).unwrap(),
            Periodicity::Truncated { steps: 10 }
        );
        assert!(periodicity_step_bound(&u, &c).is_none());
    }

    #[test]
    fn brent_agrees_with_hashing() {
        for (p, q, seed) in [(2, 3, "27"), (2, 3, "-17"), (3, 7, "-5/4"), (5, 2, "991/3")] {
            let params = Params::new(p, q).unwrap();
            let u = r(seed);
            assert_eq!(
                brent_periodicity(&u, &params, 10_000).unwrap(),
                is_ultimately_periodic(&u, &params, 10_000).unwrap()
            );
        }
        assert!(!brent_periodicity(&r("27"), &Params::collatz(), 5)
            .unwrap()
            .is_periodic());
    }

    #[test]
    fn small_q_orbits_stay_within_bound() {
        for (p, q) in [(5u64, 2u64), (7, 3), (5, 3)] {
            let params = Params::new(p, q).unwrap();
            for seed in ["9999", "-10000", "3/11", "-9973/10001", "1/9999"] {
                let u = r(seed);
                let bound = periodicity_step_bound(&u, &params).unwrap();
                let budget = usize::try_from(bound).unwrap().min(2_000_000);
                let rec = orbit(&u, &params, budget).unwrap();
                assert!(rec.cycle.is_some(), "{seed} under {params}");
                let b = BigInt::from(p - 1) * u.denom() / BigInt::from(p - q) + 1;
                let cap = u.numer().abs().max(b);
                assert!(rec.states.iter().all(|s| s.numer().abs() <= cap));
            }
        }
    }
}
