//! The isometry `φ = φ_{p,q}` of `Z_p` sending `u` to the digit stream
//! `Σ aₙ pⁿ` of its orbit, `aₙ = ε₀(−q·uₙ)`.
//!
//! `φ` conjugates `g` to the digit shift: `φ(g(u)) = δ_p(φ(u))`. Its inverse
//! is `φ⁻¹(v) = −Σ aᵢ pⁱ / q^{rᵢ}` with `rᵢ` the number of nonzero digits
//! among `a₀, …, aᵢ`.

mod dlog;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{orbit, step_int, Periodicity};
use crate::error::{Error, Result};
use crate::padic::{
    hensel_digits, inverse_mod_prime, padic_valuation, residue, HenselDigits, PadicApprox, Params,
    ReducedFraction,
};
use crate::rational;

pub use dlog::{discrete_log, generates_all_levels};

/// Orbit of `num/den` under `g`, producing digits without storing states.
/// The denominator is kept fixed (not reduced), which is harmless since it
/// stays prime to `p`.
struct DigitStream<'a> {
    params: &'a Params,
    num: BigInt,
    den: BigInt,
    den_inv: u64,
}

impl<'a> DigitStream<'a> {
    fn new(u: &ReducedFraction, params: &'a Params) -> Result<Self> {
        let p = params.p();
        let d = residue(u.denom(), p);
        if d == 0 {
            return Err(Error::NotPadicInteger {
                value: u.to_string(),
                p,
            });
        }
        Ok(DigitStream {
            params,
            num: u.numer().clone(),
            den: u.denom().clone(),
            den_inv: inverse_mod_prime(d, p),
        })
    }
}

impl Iterator for DigitStream<'_> {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        let p = self.params.p();
        let r = residue(&self.num, p);
        if r == 0 {
            self.num /= self.params.p_big();
            return Some(0);
        }
        let qr = u128::from(r) * u128::from(self.params.q() % p) % u128::from(p);
        let neg = (u128::from(p) - qr) % u128::from(p);
        let a = (neg * u128::from(self.den_inv) % u128::from(p)) as u64;
        self.num = (&self.num * self.params.q_big() + &self.den * a) / self.params.p_big();
        Some(a as u32)
    }
}

/// First `n` digits of `φ(u)`.
pub fn phi(u: &ReducedFraction, params: &Params, n: usize) -> Result<PadicApprox> {
    let digits = DigitStream::new(u, params)?.take(n).collect();
    Ok(PadicApprox {
        p: params.p(),
        valuation_offset: 0,
        digits,
    })
}

/// Result of [`phi_exact`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum PhiExact {
    Periodic { digits: HenselDigits },
    /// No cycle was found within the step budget; nothing is claimed.
    Undetermined { steps: usize },
}

/// The exact digit stream of `φ(u)` once the orbit of `u` closes a cycle.
pub fn phi_exact(u: &ReducedFraction, params: &Params, max_steps: usize) -> Result<PhiExact> {
    let rec = orbit(u, params, max_steps)?;
    Ok(match rec.cycle {
        Some(c) => {
            let pre = rec.digits[..c.preperiod].to_vec();
            let period = rec.digits[c.preperiod..c.preperiod + c.period].to_vec();
            PhiExact::Periodic {
                digits: HenselDigits::new(params.p(), pre, period)?,
            }
        }
        None => PhiExact::Undetermined { steps: max_steps },
    })
}

/// `Σ dᵢ pⁱ / q^{rᵢ}` over a finite block, `rᵢ` counted within the block.
/// Returns the sum and the number of nonzero digits in the block.
fn block_sum(digits: &[u32], params: &Params) -> (BigRational, u32) {
    let mut sum = BigRational::zero();
    let mut p_pow = BigInt::one();
    let mut q_pow = BigInt::one();
    let mut count = 0u32;
    for &d in digits {
        if d != 0 {
            count += 1;
            q_pow *= params.q_big();
            sum += BigRational::new(&p_pow * BigInt::from(d), q_pow.clone());
        }
        p_pow *= params.p_big();
    }
    (sum, count)
}

/// `φ⁻¹(v)` for an eventually periodic stream `v`, exactly.
///
/// With `s`, `R₀` the length and nonzero count of the preperiod and `K`, `R`
/// those of the period, the tail contributes
/// `p^s/q^{R₀} · B / (1 − p^K/q^R)` where `B` is the block sum of one period.
pub fn phi_inverse_exact(v: &HenselDigits, params: &Params) -> Result<ReducedFraction> {
    if v.p() != params.p() {
        return Err(Error::Precondition(format!(
            "digits are {}-adic but the map is {}-adic",
            v.p(),
            params.p()
        )));
    }
    let (head, r0) = block_sum(v.preperiod(), params);
    let (block, r) = block_sum(v.period(), params);
    let s = v.preperiod().len() as u32;
    let k = v.period().len() as u32;
    let scale = BigRational::new(params.p_big().pow(s), params.q_big().pow(r0));
    let ratio = BigRational::new(params.p_big().pow(k), params.q_big().pow(r));
    let tail = scale * block / (BigRational::one() - ratio);
    Ok(-(head + tail))
}

/// The partial sum `−Σ_{i<N} aᵢ pⁱ / q^{rᵢ}` reduced mod `p^N`, as `N` digits.
pub fn phi_inverse_approx(v: &PadicApprox, params: &Params) -> Result<PadicApprox> {
    if v.p != params.p() {
        return Err(Error::Precondition(format!(
            "digits are {}-adic but the map is {}-adic",
            v.p,
            params.p()
        )));
    }
    let (sum, _) = block_sum(&v.digits, params);
    let mut out = hensel_digits(&-sum, params.p(), v.precision());
    out.valuation_offset = v.valuation_offset;
    Ok(out)
}

/// `φ` extended to `Q_p` by `φ(pᵐw) = pᵐφ(w)` with `w` a unit; the power of
/// `p` is carried in `valuation_offset`.
pub fn phi_qp(u: &ReducedFraction, params: &Params, n: usize) -> Result<PadicApprox> {
    let Some(m) = padic_valuation(u, params.p()) else {
        return Ok(PadicApprox::zero(params.p(), n));
    };
    let scale = BigRational::from_integer(params.p_big().pow(m.unsigned_abs() as u32));
    let unit = if m >= 0 { u / scale } else { u * scale };
    let mut out = phi(&unit, params, n)?;
    out.valuation_offset = m;
    Ok(out)
}

/// Compares `φ(g(u))` with `δ_p(φ(u))` on their first `n − 1` digits.
pub fn conjugation_check(u: &ReducedFraction, params: &Params, n: usize) -> Result<bool> {
    if n == 0 {
        return Ok(true);
    }
    let lhs = phi(&crate::dynamics::step(u, params)?, params, n - 1)?;
    let rhs = phi(u, params, n)?.delta_shift();
    Ok(lhs.digits == rhs.digits)
}

/// Indices `ψ(0) < ψ(1) < …` of the nonzero digits of `φ(u)`, with the
/// digits found there.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PsiFunction {
    pub values: Vec<u64>,
    pub digits: Vec<u32>,
    /// The orbit reached 0, so no further nonzero digits exist.
    pub exhausted: bool,
}

/// The first `count` values of `ψ_u`, following the orbit for at most
/// `max_steps` steps.
pub fn psi_function(
    u: &ReducedFraction,
    params: &Params,
    count: usize,
    max_steps: usize,
) -> Result<PsiFunction> {
    let mut stream = DigitStream::new(u, params)?;
    let mut values = Vec::with_capacity(count);
    let mut digits = Vec::with_capacity(count);
    let mut index = 0u64;
    while values.len() < count {
        if stream.num.is_zero() {
            return Ok(PsiFunction {
                values,
                digits,
                exhausted: true,
            });
        }
        if index as usize == max_steps {
            return Err(Error::BudgetExhausted(max_steps));
        }
        let a = stream.next().expect("digit stream is infinite");
        if a != 0 {
            values.push(index);
            digits.push(a);
        }
        index += 1;
    }
    Ok(PsiFunction {
        values,
        digits,
        exhausted: false,
    })
}

/// An integer approximating `u` 2-adically whose `(2,3)`-orbit is known to
/// be ultimately periodic.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DensityWitness {
    pub u: i64,
    pub n: usize,
    /// `ψ(0), …, ψ(n−1)` of `φ(u)`.
    pub psi: Vec<u64>,
    /// `ψ(n)`, when it exists.
    pub psi_n: Option<u64>,
    /// The exponent `k` placing the next nonzero digit of `φ(w)`.
    pub psi_prime_n: Option<u64>,
    #[serde(with = "rational::serde_str")]
    pub v_n: ReducedFraction,
    #[serde(serialize_with = "rational::serde_bigint::serialize")]
    pub w_n: BigInt,
    /// `e` with `|u − w|₂ = 2^{−e}`; `None` when `u = w`.
    pub achieved_distance_exponent: Option<u64>,
    /// Whether `e ≥ ψ(n)`; `None` when `ψ(n)` does not exist.
    pub meets_psi_n_bound: Option<bool>,
    pub w_orbit: Periodicity,
}

/// Builds the witness `w = (2^k − Sₙ)/3ⁿ` with
/// `Sₙ = Σ_{i<n} 2^{ψ(i)} 3^{n−1−i}` and `k` the least exponent above `ψ(n−1)`
/// with `2^k ≡ Sₙ (mod 3ⁿ)`. Then `φ(w) = vₙ = Σ_{i<n} 2^{ψ(i)} + 2^k/(1−4)`,
/// so `w` agrees with `u` on the digits of `φ` up to index `ψ(n−1)` and its
/// orbit falls into the cycle `{1, 2}`.
pub fn density_approximant(u: i64, n: usize, max_steps: usize) -> Result<DensityWitness> {
    if u < 0 {
        return Err(Error::Precondition(format!("density witnesses need u ≥ 0, got {u}")));
    }
    if n == 0 {
        return Err(Error::Precondition("n must be at least 1".into()));
    }
    let params = Params::collatz();
    if u == 0 {
        return Ok(DensityWitness {
            u,
            n,
            psi: Vec::new(),
            psi_n: None,
            psi_prime_n: None,
            v_n: BigRational::zero(),
            w_n: BigInt::zero(),
            achieved_distance_exponent: None,
            meets_psi_n_bound: None,
            w_orbit: Periodicity::Periodic {
                preperiod: 0,
                period: 1,
            },
        });
    }
    let ub = BigRational::from_integer(BigInt::from(u));
    let psi = psi_function(&ub, &params, n + 1, max_steps)?;
    debug_assert!(!psi.exhausted, "positive integers never reach 0");
    let psi_n = psi.values[n];
    let psi_head = &psi.values[..n];

    let s_n = psi_sum(psi_head, &[], &params);
    let (x, order) = discrete_log(2, &s_n, 3, n as u32)?;
    let floor = BigInt::from(psi_head[n - 1] + 1);
    let k = if x >= floor {
        x
    } else {
        &x + &order * (&floor - &x).div_ceil(&order)
    };
    let k = k
        .to_u64()
        .ok_or_else(|| Error::Precondition("exponent too large".into()))?;
    let two_k = BigInt::one() << k;
    let (w, rem) = (&two_k - &s_n).div_rem(&BigInt::from(3).pow(n as u32));
    assert!(rem.is_zero(), "2^k ≡ S_n (mod 3^n)");
    let head: BigInt = psi_head.iter().map(|&i| BigInt::one() << i).sum();
    let v_n = BigRational::from_integer(head) - BigRational::new(two_k, BigInt::from(3));

    let diff = BigInt::from(u) - &w;
    let achieved = (!diff.is_zero()).then(|| diff.trailing_zeros().unwrap_or(0));
    // g^k(w) = 1, so a budget of a few k steps suffices for Brent
    let w_orbit = brent_integer(&w, &params, max_steps.max(4 * k as usize + 16));
    Ok(DensityWitness {
        u,
        n,
        psi: psi_head.to_vec(),
        psi_n: Some(psi_n),
        psi_prime_n: Some(k),
        v_n,
        w_n: w,
        meets_psi_n_bound: Some(achieved.map_or(true, |e| e >= psi_n)),
        achieved_distance_exponent: achieved,
        w_orbit,
    })
}

/// `Σ_{i<n} aᵢ p^{ψ(i)} q^{n−1−i}`; `digits` empty means all ones.
fn psi_sum(psi: &[u64], digits: &[u32], params: &Params) -> BigInt {
    psi.iter().enumerate().fold(BigInt::zero(), |acc, (i, &e)| {
        let a = digits.get(i).copied().unwrap_or(1);
        acc * params.q_big() + params.p_big().pow(e as u32) * a
    })
}

/// Brent's algorithm on integer states.
fn brent_integer(u: &BigInt, params: &Params, max_steps: usize) -> Periodicity {
    let mut power = 1usize;
    let mut lambda = 1usize;
    let mut tortoise = u.clone();
    let mut hare = step_int(u, params);
    let mut spent = 1usize;
    while tortoise != hare {
        if spent >= max_steps {
            return Periodicity::Truncated { steps: max_steps };
        }
        if power == lambda {
            tortoise = hare.clone();
            power *= 2;
            lambda = 0;
        }
        hare = step_int(&hare, params);
        lambda += 1;
        spent += 1;
    }
    let mut tortoise = u.clone();
    let mut hare = u.clone();
    for _ in 0..lambda {
        hare = step_int(&hare, params);
    }
    let mut mu = 0;
    while tortoise != hare {
        tortoise = step_int(&tortoise, params);
        hare = step_int(&hare, params);
        mu += 1;
    }
    Periodicity::Periodic {
        preperiod: mu,
        period: lambda,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PsiPrimeEntry {
    pub n: usize,
    /// Least `k ≥ 0` with `ω·p^k ≡ Sₙ (mod qⁿ)`.
    pub k: u64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PsiPrimeSeries {
    pub entries: Vec<PsiPrimeEntry>,
    /// `min k/n` over the upper half of the computed range, a finite-horizon
    /// stand-in for the liminf.
    pub liminf_estimate: Option<f64>,
    /// Set when `φ(u)` has fewer than `n_max` nonzero digits.
    pub exhausted_at: Option<usize>,
}

/// `ψ'_ω(n)` for `n = 1, …, n_max`, with
/// `Sₙ = Σ_{i<n} a_{ψ(i)} p^{ψ(i)} q^{n−1−i}` built from the nonzero digits
/// of `φ(u)`. Needs `q` an odd prime with `p` generating every `(Z/qⁿZ)*`,
/// and `ω` a `q`-adic unit.
pub fn psi_prime_omega(
    u: &ReducedFraction,
    omega: &ReducedFraction,
    params: &Params,
    n_max: usize,
    max_steps: usize,
) -> Result<PsiPrimeSeries> {
    let (p, q) = (params.p(), params.q());
    if !generates_all_levels(p, q) {
        return Err(Error::InvalidParams(format!(
            "{p} does not generate the units modulo every power of {q}"
        )));
    }
    if residue(omega.numer(), q) == 0 || residue(omega.denom(), q) == 0 {
        return Err(Error::NotAUnit(omega.to_string(), q.to_string()));
    }
    let psi = psi_function(u, params, n_max, max_steps)?;
    let available = psi.values.len();
    let mut sums = Vec::with_capacity(available);
    let mut s = BigInt::zero();
    for (e, &a) in psi.values.iter().zip(&psi.digits) {
        s = s * params.q_big() + params.p_big().pow(*e as u32) * a;
        sums.push(s.clone());
    }
    let entries = sums
        .par_iter()
        .enumerate()
        .map(|(i, s_n)| {
            let n = i + 1;
            let modulus = params.q_big().pow(n as u32);
            let inv = omega
                .numer()
                .mod_floor(&modulus)
                .modinv(&modulus)
                .expect("ω is a unit");
            let target = (s_n * inv * omega.denom()).mod_floor(&modulus);
            let (x, _) = discrete_log(p, &target, q, n as u32)?;
            let k = x
                .to_u64()
                .ok_or_else(|| Error::Precondition("exponent too large".into()))?;
            Ok(PsiPrimeEntry {
                n,
                k,
                ratio: k as f64 / n as f64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let liminf_estimate = entries[entries.len() / 2..]
        .iter()
        .map(|e| e.ratio)
        .reduce(f64::min);
    Ok(PsiPrimeSeries {
        entries,
        liminf_estimate,
        exhausted_at: (available < n_max).then_some(available),
    })
}
