//! Heights and height drift along orbits.
//!
//! The height `H(u)` is the archimedean scale of `u` in base `p`:
//! `p^{H−1} ≤ |u| < p^H`. Along an orbit, each step divides by `p` and
//! nonzero digits also multiply by roughly `q`, so the drift `H(u_m) − H(u)`
//! is governed by how many of the first `m` digits of `φ(u)` are nonzero.

use std::cmp::Ordering;

use num_bigint::{BigInt, RandBigInt};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{orbit, step_int, CycleInfo};
use crate::error::{Error, Result};
use crate::padic::{Params, ReducedFraction};
use crate::rational::{self, ln_abs};

/// Compares `a` with `p^e · b` for positive `a`, `b`.
fn cmp_scaled(a: &BigInt, b: &BigInt, p: &BigInt, e: i64) -> Ordering {
    let scale = p.pow(e.unsigned_abs() as u32);
    if e >= 0 {
        a.cmp(&(b * scale))
    } else {
        (a * scale).cmp(b)
    }
}

/// The integer `H` with `p^{H−1} ≤ |u| < p^H`.
pub fn height(u: &ReducedFraction, p: u64) -> Result<i64> {
    if u.is_zero() {
        return Err(Error::Precondition("the height of 0 is undefined".into()));
    }
    if p < 2 {
        return Err(Error::InvalidParams(format!("base {p} is below 2")));
    }
    let (a, b) = (u.numer().abs(), u.denom().clone());
    let pb = BigInt::from(p);
    let mut h = (ln_abs(u) / (p as f64).ln()).floor() as i64 + 1;
    // the float estimate is off by at most one or two near powers of p
    while cmp_scaled(&a, &b, &pb, h - 1) == Ordering::Less {
        h -= 1;
    }
    while cmp_scaled(&a, &b, &pb, h) != Ordering::Less {
        h += 1;
    }
    Ok(h)
}

fn int_height(n: &BigInt, p: u64) -> i64 {
    if p == 2 {
        return n.bits() as i64;
    }
    height(&BigRational::from_integer(n.clone()), p).expect("nonzero")
}

/// `h(u) = max(|a|, |b|)` for `u = a/b` reduced.
pub fn height_naive(u: &ReducedFraction) -> BigInt {
    u.numer().abs().max(u.denom().clone())
}

/// `H` along the first `steps` states of the orbit of `u`.
#[derive(Clone, Debug, Serialize)]
pub struct HeightProfile {
    #[serde(with = "rational::serde_str")]
    pub seed: ReducedFraction,
    pub h0: i64,
    /// `H(u_n)`, `None` once the orbit reaches 0.
    pub h_series: Vec<Option<i64>>,
    /// `H(u_n) − H(u)`.
    pub drift_series: Vec<Option<i64>>,
}

pub fn height_profile(u: &ReducedFraction, params: &Params, steps: usize) -> Result<HeightProfile> {
    let h0 = height(u, params.p())?;
    let mut h_series = Vec::with_capacity(steps + 1);
    let mut v = u.clone();
    for i in 0..=steps {
        h_series.push((!v.is_zero()).then(|| height(&v, params.p())).transpose()?);
        if i < steps {
            v = crate::dynamics::step(&v, params)?;
        }
    }
    let drift_series = h_series.iter().map(|h| h.map(|h| h - h0)).collect();
    Ok(HeightProfile {
        seed: u.clone(),
        h0,
        h_series,
        drift_series,
    })
}

/// The tranche length: the largest `r ≥ 1` with `q^{r−1} < p^r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrancheLength {
    Finite(u32),
    /// `q < p`: the inequality holds for every `r`.
    Unbounded,
}

pub fn tranche_r(params: &Params) -> TrancheLength {
    if params.q() < params.p() {
        return TrancheLength::Unbounded;
    }
    let (p, q) = (params.p_big(), params.q_big());
    let mut r = 1u32;
    while q.pow(r) < p.pow(r + 1) {
        r += 1;
    }
    TrancheLength::Finite(r)
}

/// `q^{p−1} < p^p`, the condition under which the mean drift is negative.
pub fn candidate_test(params: &Params) -> bool {
    let p = params.p() as u32;
    params.q_big().pow(p - 1) < params.p_big().pow(p)
}

/// `α_i = max{k ≥ 0 : p^k < q^i}`, with `α_0 = −1` since the set is empty.
pub fn alpha(i: u32, params: &Params) -> i64 {
    let target = params.q_big().pow(i);
    let mut k = -1i64;
    let mut pk = BigInt::one();
    while pk < target {
        k += 1;
        pk *= params.p_big();
    }
    k
}

/// Counts over the first `m` tranches of `r` digits of `φ(u)`, with the
/// measured drift and the bounds it should respect when `H` stays large.
#[derive(Clone, Debug, Serialize)]
pub struct TrancheStats {
    pub r: u32,
    pub m: usize,
    /// `ell[i]`: tranches with exactly `i` nonzero digits.
    pub ell: Vec<u64>,
    /// Nonzero digits per tranche.
    pub e_list: Vec<u32>,
    /// Running `ℓ_r − ℓ_0` after each tranche.
    pub running_balance: Vec<i64>,
    /// `n = Σ i·ℓ_i`.
    pub nonzero_total: u64,
    pub h_start: i64,
    /// `H` at each tranche boundary; `None` after the orbit reaches 0.
    pub h_boundaries: Vec<Option<i64>>,
    pub drift: Option<i64>,
    /// `n − rm + ℓ_r`
    pub lower: i64,
    /// `n + (1−r)m + ℓ_r − ℓ_0`
    pub upper: i64,
    pub within_bounds: bool,
    /// Tranches whose own drift left `[e − r + [e=r], e − r + 1 + [e=r] − [e=0]]`.
    pub tranche_violations: Vec<usize>,
    /// Whether `H(u) > r·(m + 1)`, the threshold used here for "H large".
    pub height_precondition_met: bool,
}

pub fn tranche_stats(u: &ReducedFraction, params: &Params, m: usize) -> Result<TrancheStats> {
    let TrancheLength::Finite(r) = tranche_r(params) else {
        return Err(Error::Precondition(format!(
            "tranches are unbounded for q < p ({params})"
        )));
    };
    let h_start = height(u, params.p())?;
    let steps = r as usize * m;
    let mut states = Vec::with_capacity(steps + 1);
    let mut digits = Vec::with_capacity(steps);
    let mut v = u.clone();
    for _ in 0..steps {
        let a = crate::dynamics::orbit_digit(&v, params)?;
        digits.push(a as u32);
        states.push(v.clone());
        v = crate::dynamics::step(&v, params)?;
    }
    states.push(v);
    let heights: Vec<Option<i64>> = states
        .iter()
        .step_by(r as usize)
        .map(|s| (!s.is_zero()).then(|| height(s, params.p())).transpose())
        .collect::<Result<_>>()?;

    let mut ell = vec![0u64; r as usize + 1];
    let mut e_list = Vec::with_capacity(m);
    let mut running_balance = Vec::with_capacity(m);
    let mut tranche_violations = Vec::new();
    for (t, block) in digits.chunks(r as usize).enumerate() {
        let e = block.iter().filter(|&&d| d != 0).count() as u32;
        ell[e as usize] += 1;
        e_list.push(e);
        running_balance.push(ell[r as usize] as i64 - ell[0] as i64);
        if let (Some(h0), Some(h1)) = (heights[t], heights[t + 1]) {
            let (e, r) = (i64::from(e), i64::from(r));
            let full = i64::from(e == r);
            let empty = i64::from(e == 0);
            let lo = e - r + full;
            let hi = e - r + 1 + full - empty;
            if !(lo..=hi).contains(&(h1 - h0)) {
                tranche_violations.push(t);
            }
        }
    }
    let nonzero_total: u64 = ell.iter().enumerate().map(|(i, &l)| i as u64 * l).sum();
    let (n, ri, mi) = (nonzero_total as i64, i64::from(r), m as i64);
    let (l0, lr) = (ell[0] as i64, ell[r as usize] as i64);
    let lower = n - ri * mi + lr;
    let upper = n + (1 - ri) * mi + lr - l0;
    let drift = heights[m].map(|h| h - h_start);
    Ok(TrancheStats {
        r,
        m,
        ell,
        e_list,
        running_balance,
        nonzero_total,
        h_start,
        h_boundaries: heights,
        drift,
        lower,
        upper,
        within_bounds: drift.is_some_and(|d| (lower..=upper).contains(&d)),
        tranche_violations,
        height_precondition_met: h_start > ri * (mi + 1),
    })
}

/// `d = H(u_m) − H(u) − (α_nz − m)` with `nz` the number of nonzero digits
/// among the first `m`. Expected `|d| ≤ 2`.
#[derive(Clone, Debug, Serialize)]
pub struct NzDriftReport {
    pub m: usize,
    pub nz: u32,
    pub h_start: i64,
    pub h_end: i64,
    pub drift: i64,
    /// `None` when `nz = 0`; such rows are excluded from the check.
    pub alpha_nz: Option<i64>,
    pub deviation: Option<i64>,
    pub within: Option<bool>,
}

pub fn nz_drift_check(u: &ReducedFraction, params: &Params, m: usize) -> Result<NzDriftReport> {
    let h_start = height(u, params.p())?;
    if h_start <= m as i64 {
        return Err(Error::Precondition(format!(
            "H(u) = {h_start} must exceed m = {m}"
        )));
    }
    let mut v = u.clone();
    let mut nz = 0u32;
    for _ in 0..m {
        if crate::dynamics::orbit_digit(&v, params)? != 0 {
            nz += 1;
        }
        v = crate::dynamics::step(&v, params)?;
    }
    let h_end = height(&v, params.p())?;
    let drift = h_end - h_start;
    let alpha_nz = (nz > 0).then(|| alpha(nz, params));
    let deviation = alpha_nz.map(|a| drift - (a - m as i64));
    Ok(NzDriftReport {
        m,
        nz,
        h_start,
        h_end,
        drift,
        alpha_nz,
        deviation,
        within: deviation.map(|d| d.abs() <= 2),
    })
}

/// Which residue classes mod `p^m` to average over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SampleSpec {
    /// Every class, each with one representative.
    Full { rng_seed: u64 },
    /// `count` classes drawn uniformly.
    Random { count: usize, rng_seed: u64 },
    /// `Full` when `p^m ≤ 2^22`, otherwise `Random` with `count` samples.
    Auto { count: usize, rng_seed: u64 },
}

/// Largest class count enumerated in full by [`SampleSpec::Auto`].
pub const FULL_ENUMERATION_LIMIT: u64 = 1 << 22;

#[derive(Clone, Debug, Serialize)]
pub struct MeanDriftReport {
    pub p: u64,
    pub q: u64,
    pub m: u32,
    pub full_enumeration: bool,
    pub sample_size: u64,
    pub rng_seed: u64,
    /// Exact mean as `num/den`.
    #[serde(with = "rational::serde_str")]
    pub empirical_mean_exact: ReducedFraction,
    pub empirical_mean: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub within_bounds: bool,
}

/// Mean of `H(g^m(u_c)) − H(u_c)` over classes `c mod p^m`, with
/// representatives `u_c = c + p^m·K`, `K` uniform in `[p^m, 2p^m)`, so that
/// `H(u_c) > m`. The bounds are `m((p−1)/p · ln q/ln p − 1) ∓ 2`.
///
/// Each sample draws from its own ChaCha stream (indexed by the sample
/// number), so the result does not depend on the thread count.
pub fn mean_drift(params: &Params, m: u32, sample: SampleSpec) -> Result<MeanDriftReport> {
    if m == 0 {
        return Err(Error::Precondition("m must be at least 1".into()));
    }
    let modulus = params.p_big().pow(m);
    let classes_fit = modulus <= BigInt::from(FULL_ENUMERATION_LIMIT);
    let (full, count, rng_seed) = match sample {
        SampleSpec::Full { rng_seed } => {
            if !classes_fit {
                return Err(Error::Precondition(format!(
                    "{}^{m} classes are too many to enumerate",
                    params.p()
                )));
            }
            (true, u64::try_from(&modulus).expect("fits"), rng_seed)
        }
        SampleSpec::Random { count, rng_seed } => (false, count as u64, rng_seed),
        SampleSpec::Auto { count, rng_seed } if classes_fit => {
            let _ = count;
            (true, u64::try_from(&modulus).expect("fits"), rng_seed)
        }
        SampleSpec::Auto { count, rng_seed } => (false, count as u64, rng_seed),
    };
    if count == 0 {
        return Err(Error::Precondition("sample size must be positive".into()));
    }
    let twice = &modulus * 2;
    let total: i64 = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            rng.set_stream(i);
            let c = if full {
                BigInt::from(i)
            } else {
                rng.gen_bigint_range(&BigInt::zero(), &modulus)
            };
            let k = rng.gen_bigint_range(&modulus, &twice);
            let u = c + &modulus * k;
            let h0 = int_height(&u, params.p());
            let mut v = u;
            for _ in 0..m {
                v = step_int(&v, params);
            }
            int_height(&v, params.p()) - h0
        })
        .sum();
    let mean = BigRational::new(BigInt::from(total), BigInt::from(count));
    let empirical_mean = total as f64 / count as f64;
    let (p, q) = (params.p() as f64, params.q() as f64);
    let centre = f64::from(m) * ((p - 1.0) / p * q.ln() / p.ln() - 1.0);
    let (lower_bound, upper_bound) = (centre - 2.0, centre + 2.0);
    Ok(MeanDriftReport {
        p: params.p(),
        q: params.q(),
        m,
        full_enumeration: full,
        sample_size: count,
        rng_seed,
        empirical_mean_exact: mean,
        empirical_mean,
        lower_bound,
        upper_bound,
        within_bounds: (lower_bound..=upper_bound).contains(&empirical_mean),
    })
}

/// One row of [`asymptotic_ratios`], for step `n ≥ 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioRow {
    pub n: usize,
    /// `r_n / n`
    pub r_over_n: f64,
    /// `ψ(n) / n`, when `ψ(n)` falls inside the horizon.
    pub psi_over_n: Option<f64>,
    /// `H(u_n) / n`, unless `u_n = 0`.
    pub height_over_n: Option<f64>,
    /// `p · |u_{n+1}|^{1/n} · q^{−r_n/n}`, unless `u_{n+1} = 0`.
    pub growth: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RatiosReport {
    pub rows: Vec<RatioRow>,
    /// Set when the orbit closed a cycle within the horizon.
    pub periodic: Option<CycleInfo>,
}

pub fn asymptotic_ratios(
    u: &ReducedFraction,
    params: &Params,
    n_steps: usize,
) -> Result<RatiosReport> {
    let rec = orbit(u, params, n_steps + 1)?;
    let psi: Vec<usize> = rec.nonzero_positions();
    let (ln_p, ln_q) = ((params.p() as f64).ln(), (params.q() as f64).ln());
    let last = rec.states.len().saturating_sub(2).min(n_steps);
    let mut rows = Vec::with_capacity(last);
    for n in 1..=last {
        let nf = n as f64;
        let r_n = rec.r[n] as f64;
        let next = &rec.states[n + 1];
        rows.push(RatioRow {
            n,
            r_over_n: r_n / nf,
            psi_over_n: psi.get(n).map(|&i| i as f64 / nf),
            height_over_n: (!rec.states[n].is_zero())
                .then(|| height(&rec.states[n], params.p()).map(|h| h as f64 / nf))
                .transpose()?,
            growth: (!next.is_zero()).then(|| (ln_p + ln_abs(next) / nf - r_n / nf * ln_q).exp()),
        });
    }
    Ok(RatiosReport {
        rows,
        periodic: rec.cycle,
    })
}

/// `max ψ(n)/n` over `n ∈ [from, to]`, following the orbit of `u` for at
/// most `max_steps` steps. `None` if fewer than `to + 1` nonzero digits
/// appear within the budget.
pub fn psi_ratio_max(
    u: &ReducedFraction,
    params: &Params,
    from: usize,
    to: usize,
    max_steps: usize,
) -> Result<Option<f64>> {
    let psi = match crate::isometry::psi_function(u, params, to + 1, max_steps) {
        Ok(psi) => psi,
        Err(Error::BudgetExhausted(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    if psi.values.len() <= to {
        return Ok(None);
    }
    Ok((from.max(1)..=to)
        .map(|n| psi.values[n] as f64 / n as f64)
        .reduce(f64::max))
}

/// `H(u) = ⌊log_p |u|⌋ + 1` for a nonzero integer, by repeated division;
/// used as a test oracle.
#[cfg(test)]
fn height_by_division(n: &BigInt, p: u64) -> i64 {
    let mut n = n.abs();
    let mut h = 0;
    let pb = BigInt::from(p);
    while !n.is_zero() {
        n = num_integer::Integer::div_floor(&n, &pb);
        h += 1;
    }
    h
}
