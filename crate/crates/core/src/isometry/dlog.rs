//! Discrete logarithms in `(Z/qⁿZ)*` for an odd prime `q`.
//!
//! When `base` generates `(Z/q²Z)*` it generates every `(Z/qⁿZ)*`, a cyclic
//! group of order `(q−1)qⁿ⁻¹`. The exponent is found mod `q−1` by a scan of
//! the residues mod `q`, then lifted one power of `q` at a time: knowing
//! `x mod (q−1)qʲ`, the next digit `t ∈ {0..q−1}` is the one for which
//! `base^(x + t·(q−1)qʲ) ≡ target (mod q^(j+2))`. All powers are kept mod `qⁿ`
//! so the whole computation costs `O(n·q)` multiplications.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::padic::is_prime;

/// `true` when `base` generates `(Z/qⁿZ)*` for every `n ≥ 1`.
pub fn generates_all_levels(base: u64, q: u64) -> bool {
    if q < 3 || !is_prime(q) || base % q == 0 {
        return false;
    }
    let order_mod_q = (1..q).find(|&k| mod_pow_u64(base, k, q) == 1).unwrap_or(0);
    let lifts = mod_pow_u64(base, q - 1, q * q) != 1;
    order_mod_q == q - 1 && lifts
}

fn mod_pow_u64(base: u64, mut exp: u64, m: u64) -> u64 {
    let m = u128::from(m);
    let mut b = u128::from(base) % m;
    let mut acc = 1u128 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// Returns `(x, order)` with `base^x ≡ target (mod qⁿ)`, `0 ≤ x < order`,
/// `order = (q−1)qⁿ⁻¹`.
pub fn discrete_log(base: u64, target: &BigInt, q: u64, n: u32) -> Result<(BigInt, BigInt)> {
    if n == 0 {
        return Err(Error::Precondition("modulus exponent must be at least 1".into()));
    }
    if !generates_all_levels(base, q) {
        return Err(Error::Precondition(format!(
            "{base} does not generate the units modulo powers of {q}"
        )));
    }
    let qb = BigInt::from(q);
    let modulus = qb.pow(n);
    let target = target.mod_floor(&modulus);
    if (&target % &qb).is_zero() {
        return Err(Error::NotAUnit(target.to_string(), q.to_string()));
    }
    let bb = BigInt::from(base);

    let t0 = (&target % &qb).to_u64().expect("residue below q");
    let x0 = (0..q - 1)
        .find(|&x| mod_pow_u64(base, x, q) == t0)
        .expect("base generates (Z/qZ)*");
    let mut x = BigInt::from(x0);
    let mut order = BigInt::from(q - 1);
    let mut power = bb.modpow(&x, &modulus);
    // base^order mod qⁿ, ≡ 1 mod q^(j+1) at level j
    let mut step = bb.modpow(&order, &modulus);
    let mut level_mod = qb.clone();
    for _ in 1..n {
        level_mod *= &qb;
        let want = &target % &level_mod;
        let mut candidate = power.clone();
        let mut found = None;
        for t in 0..q {
            if &candidate % &level_mod == want {
                found = Some(t);
                break;
            }
            candidate = candidate * &step % &modulus;
        }
        let t = found.ok_or_else(|| {
            Error::Precondition(format!("no discrete log of {target} modulo {modulus}"))
        })?;
        x += &order * t;
        power = candidate;
        order *= &qb;
        step = step.modpow(&qb, &modulus);
    }
    debug_assert_eq!(bb.modpow(&x, &modulus), target);
    debug_assert!(x < order && order == BigInt::from(q - 1) * qb.pow(n - 1));
    Ok((x, order))
}
