//! Exact base-`p` digit arithmetic on rationals.
//!
//! A rational `a/b` with `p ∤ b` is a p-adic integer; its Hensel expansion
//! `Σ aᵢ pⁱ` is eventually periodic and is computed here by iterating the
//! digit shift `u ↦ (u − ε₀(u)) / p` on exact values. Because the shift keeps
//! the reduced denominator fixed, the state is just the numerator, and a
//! repeated numerator closes the period.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational, always kept in lowest terms with a positive denominator.
pub type ReducedFraction = BigRational;

/// A validated `(p, q)` pair: `p` prime, `q ≥ 2`, `gcd(p, q) = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct Params {
    p: u64,
    q: u64,
    p_big: BigInt,
    q_big: BigInt,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    p: u64,
    q: u64,
}

impl TryFrom<RawParams> for Params {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        Params::new(raw.p, raw.q)
    }
}

impl From<Params> for RawParams {
    fn from(params: Params) -> Self {
        RawParams {
            p: params.p,
            q: params.q,
        }
    }
}

impl Params {
    pub fn new(p: u64, q: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidParams(format!("p = {p} is not prime")));
        }
        if p > u64::from(u32::MAX) {
            return Err(Error::InvalidParams(format!("p = {p} exceeds 32 bits")));
        }
        if q < 2 {
            return Err(Error::InvalidParams(format!("q = {q} must be at least 2")));
        }
        if q.gcd(&p) != 1 {
            return Err(Error::InvalidParams(format!("gcd(p, q) = gcd({p}, {q}) ≠ 1")));
        }
        Ok(Params {
            p,
            q,
            p_big: BigInt::from(p),
            q_big: BigInt::from(q),
        })
    }

    /// The classical pair `(2, 3)`.
    pub fn collatz() -> Self {
        Params::new(2, 3).expect("(2, 3) is valid")
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn p_big(&self) -> &BigInt {
        &self.p_big
    }

    pub fn q_big(&self) -> &BigInt {
        &self.q_big
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.p, self.q)
    }
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// `x mod p` in `[0, p)`.
pub(crate) fn residue(x: &BigInt, p: u64) -> u64 {
    x.mod_floor(&BigInt::from(p))
        .to_u64()
        .expect("residue is below p")
}

/// Inverse of `a` modulo the prime `p`; `a` must be nonzero mod `p`.
pub(crate) fn inverse_mod_prime(a: u64, p: u64) -> u64 {
    let (mut base, mut exp, mut acc) = (u128::from(a % p), p - 2, 1u128);
    let m = u128::from(p);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc as u64
}

fn require_integral(u: &ReducedFraction, p: u64) -> Result<()> {
    if residue(u.denom(), p) == 0 {
        return Err(Error::NotPadicInteger {
            value: u.to_string(),
            p,
        });
    }
    Ok(())
}

/// Digit of `num/den` at position 0, for `p ∤ den`.
fn leading_digit(num: &BigInt, den: &BigInt, p: u64) -> u64 {
    let a = residue(num, p);
    if a == 0 {
        return 0;
    }
    let b = residue(den, p);
    (u128::from(a) * u128::from(inverse_mod_prime(b, p)) % u128::from(p)) as u64
}

/// The residue `ε₀(u) ∈ {0, …, p−1}` with `u ≡ ε₀(u) (mod p)`.
pub fn eps0(u: &ReducedFraction, p: u64) -> Result<u64> {
    require_integral(u, p)?;
    Ok(leading_digit(u.numer(), u.denom(), p))
}

/// `ν_p(u)`, with `None` standing for `+∞` (`u = 0`).
pub fn padic_valuation(u: &ReducedFraction, p: u64) -> Option<i64> {
    if u.is_zero() {
        return None;
    }
    Some(int_valuation(u.numer(), p) as i64 - int_valuation(u.denom(), p) as i64)
}

pub(crate) fn int_valuation(n: &BigInt, p: u64) -> u64 {
    debug_assert!(!n.is_zero());
    let pb = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (quot, rem) = n.div_rem(&pb);
        if !rem.is_zero() {
            return v;
        }
        n = quot;
        v += 1;
    }
}

/// The digit shift `δ_p(u) = (u − ε₀(u)) / p` on exact values.
pub fn delta(u: &ReducedFraction, p: u64) -> Result<ReducedFraction> {
    let d = eps0(u, p)?;
    Ok((u - BigInt::from(d)) / BigInt::from(p))
}

/// A truncated element of `Q_p`: `p^valuation_offset · Σ_{i<N} digits[i]·pⁱ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PadicApprox {
    pub p: u64,
    pub valuation_offset: i64,
    pub digits: Vec<u32>,
}

impl PadicApprox {
    pub fn new(p: u64, valuation_offset: i64, digits: Vec<u32>) -> Result<Self> {
        if let Some(d) = digits.iter().find(|&&d| u64::from(d) >= p) {
            return Err(Error::Precondition(format!("digit {d} is not below p = {p}")));
        }
        Ok(PadicApprox {
            p,
            valuation_offset,
            digits,
        })
    }

    pub fn zero(p: u64, precision: usize) -> Self {
        PadicApprox {
            p,
            valuation_offset: 0,
            digits: vec![0; precision],
        }
    }

    pub fn precision(&self) -> usize {
        self.digits.len()
    }

    /// Exact value of the truncation.
    pub fn to_rational(&self) -> ReducedFraction {
        let unit = digits_value(&self.digits, self.p);
        let scale = BigInt::from(self.p).pow(self.valuation_offset.unsigned_abs() as u32);
        let unit = BigRational::from_integer(unit);
        if self.valuation_offset >= 0 {
            unit * scale
        } else {
            unit / scale
        }
    }

    /// First index at which the two digit lists disagree, over the common
    /// precision. `None` when they agree on all of it.
    pub fn first_difference(&self, other: &PadicApprox) -> Option<usize> {
        first_difference(&self.digits, &other.digits)
    }

    /// Drops the leading digit, mirroring `δ_p` on the unit expansion.
    pub fn delta_shift(&self) -> PadicApprox {
        PadicApprox {
            p: self.p,
            valuation_offset: self.valuation_offset,
            digits: self.digits.iter().skip(1).copied().collect(),
        }
    }
}

pub(crate) fn first_difference(a: &[u32], b: &[u32]) -> Option<usize> {
    a.iter().zip(b).position(|(x, y)| x != y)
}

fn digits_value(digits: &[u32], p: u64) -> BigInt {
    let pb = BigInt::from(p);
    digits
        .iter()
        .rev()
        .fold(BigInt::zero(), |acc, &d| acc * &pb + BigInt::from(d))
}

/// First `n` Hensel digits of `u`.
///
/// For `u ∈ Z_p` the result has offset 0. When `p` divides the denominator,
/// `u = p^v · w` with `v < 0` and the digits are those of `w`.
pub fn hensel_digits(u: &ReducedFraction, p: u64, n: usize) -> PadicApprox {
    let v = padic_valuation(u, p).unwrap_or(0);
    let (offset, unit) = if v < 0 {
        (v, u * BigInt::from(p).pow((-v) as u32))
    } else {
        (0, u.clone())
    };
    let den = unit.denom().clone();
    let pb = BigInt::from(p);
    let mut num = unit.numer().clone();
    let mut digits = Vec::with_capacity(n);
    for _ in 0..n {
        let d = leading_digit(&num, &den, p);
        num = (num - &den * BigInt::from(d)) / &pb;
        digits.push(d as u32);
    }
    PadicApprox {
        p,
        valuation_offset: offset,
        digits,
    }
}

/// An eventually periodic digit stream `preperiod · period^∞`, kept in
/// canonical form: the period is primitive and the preperiod is as short as
/// possible, so structural equality is equality of p-adic values.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawDigits", into = "RawDigits")]
pub struct HenselDigits {
    p: u64,
    preperiod: Vec<u32>,
    period: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct RawDigits {
    p: u64,
    preperiod: Vec<u32>,
    period: Vec<u32>,
}

impl TryFrom<RawDigits> for HenselDigits {
    type Error = Error;

    fn try_from(raw: RawDigits) -> Result<Self> {
        HenselDigits::new(raw.p, raw.preperiod, raw.period)
    }
}

impl From<HenselDigits> for RawDigits {
    fn from(h: HenselDigits) -> Self {
        RawDigits {
            p: h.p,
            preperiod: h.preperiod,
            period: h.period,
        }
    }
}

impl HenselDigits {
    pub fn new(p: u64, preperiod: Vec<u32>, period: Vec<u32>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidParams(format!("p = {p} is not prime")));
        }
        if period.is_empty() {
            return Err(Error::Precondition("period must be nonempty".into()));
        }
        if let Some(d) = preperiod.iter().chain(&period).find(|&&d| u64::from(d) >= p) {
            return Err(Error::Precondition(format!("digit {d} is not below p = {p}")));
        }
        let mut h = HenselDigits {
            p,
            preperiod,
            period,
        };
        h.canonicalize();
        Ok(h)
    }

    fn canonicalize(&mut self) {
        let len = self.period.len();
        if let Some(d) = (1..len)
            .filter(|d| len % d == 0)
            .find(|&d| (d..len).all(|i| self.period[i] == self.period[i - d]))
        {
            self.period.truncate(d);
        }
        while self.preperiod.last().is_some() && self.preperiod.last() == self.period.last() {
            self.preperiod.pop();
            self.period.rotate_right(1);
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn preperiod(&self) -> &[u32] {
        &self.preperiod
    }

    pub fn period(&self) -> &[u32] {
        &self.period
    }

    /// Digit at position `i`.
    pub fn digit(&self, i: usize) -> u32 {
        match i.checked_sub(self.preperiod.len()) {
            None => self.preperiod[i],
            Some(j) => self.period[j % self.period.len()],
        }
    }

    /// The infinite digit stream.
    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.preperiod
            .iter()
            .copied()
            .chain(self.period.iter().copied().cycle())
    }

    pub fn truncate(&self, n: usize) -> PadicApprox {
        PadicApprox {
            p: self.p,
            valuation_offset: 0,
            digits: self.iter().take(n).collect(),
        }
    }

    /// `δ_p` on the stream: every digit moves one place down.
    pub fn delta_shift(&self) -> HenselDigits {
        let mut h = self.clone();
        if h.preperiod.is_empty() {
            h.period.rotate_left(1);
        } else {
            h.preperiod.remove(0);
        }
        h
    }
}

impl fmt::Display for HenselDigits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
        write!(f, "[{}]({})^ω", join(&self.preperiod), join(&self.period))
    }
}

/// Exact eventually periodic expansion of a p-adic integral rational.
///
/// The digit shift keeps the reduced denominator fixed, so the numerators
/// form a sequence in a finite set; the first repeated numerator closes the
/// period.
pub fn detect_periodic_digits(u: &ReducedFraction, p: u64) -> Result<HenselDigits> {
    require_integral(u, p)?;
    let den = u.denom();
    let pb = BigInt::from(p);
    let mut seen: HashMap<BigInt, usize> = HashMap::new();
    let mut digits = Vec::new();
    let mut num = u.numer().clone();
    let start = loop {
        if let Some(&i) = seen.get(&num) {
            break i;
        }
        let d = leading_digit(&num, den, p);
        let next = (&num - den * BigInt::from(d)) / &pb;
        seen.insert(num, digits.len());
        digits.push(d as u32);
        num = next;
    };
    let period = digits.split_off(start);
    HenselDigits::new(p, digits, period)
}

/// The rational whose Hensel expansion is `h`:
/// `A + p^s · B / (1 − p^k)` with `A`, `B` the values of the preperiod and
/// period blocks, `s`, `k` their lengths.
pub fn rational_from_digits(h: &HenselDigits) -> ReducedFraction {
    let pb = BigInt::from(h.p);
    let head = digits_value(&h.preperiod, h.p);
    let block = digits_value(&h.period, h.p);
    let shift = pb.pow(h.preperiod.len() as u32);
    let denom = BigInt::one() - pb.pow(h.period.len() as u32);
    BigRational::from_integer(head) + BigRational::new(block * shift, denom)
}

/// `|u|_p` expressed as the exponent `e` with `|u|_p = p^{−e}`; `None` for `u = 0`.
pub fn distance_exponent(u: &ReducedFraction, v: &ReducedFraction, p: u64) -> Option<i64> {
    padic_valuation(&(u - v), p)
}

/// Absolute value helper used across modules.
pub(crate) fn abs_cmp_key(u: &ReducedFraction) -> (BigInt, bool, BigInt) {
    (u.numer().abs(), !u.is_negative(), u.denom().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::parse;
    use proptest::prelude::*;

    fn r(s: &str) -> ReducedFraction {
        parse(s).unwrap()
    }

    /// Long division oracle: digit i of a/b is found by solving
    /// `x ≡ a·b⁻¹ (mod p)` by brute force and subtracting.
    fn long_division(u: &ReducedFraction, p: u64, n: usize) -> Vec<u32> {
        let mut u = u.clone();
        let mut out = Vec::new();
        for _ in 0..n {
            let d = (0..p)
                .find(|&d| {
                    let diff = &u - BigInt::from(d);
                    diff.is_zero() || int_valuation(diff.numer(), p) > 0
                })
                .unwrap();
            out.push(d as u32);
            u = (u - BigInt::from(d)) / BigInt::from(p);
        }
        out
    }

    fn multiplicative_order(p: u64, b: u64) -> u64 {
        if b == 1 {
            return 1;
        }
        let mut x = p % b;
        let mut k = 1;
        while x != 1 {
            x = x * p % b;
            k += 1;
        }
        k
    }

    #[test]
    fn params_validation() {
        assert!(Params::new(2, 3).is_ok());
        assert!(Params::new(5, 2).is_ok());
        assert!(Params::new(4, 3).is_err());
        assert!(Params::new(3, 9).is_err());
        assert!(Params::new(3, 1).is_err());
        let json = serde_json::to_string(&Params::new(7, 19).unwrap()).unwrap();
        assert_eq!(json, r#"{"p":7,"q":19}"#);
        assert!(serde_json::from_str::<Params>(r#"{"p":6,"q":5}"#).is_err());
    }

    #[test]
    fn eps0_examples() {
        assert_eq!(eps0(&r("-21"), 2).unwrap(), 1);
        assert_eq!(eps0(&r("26"), 5).unwrap(), 1);
        assert_eq!(eps0(&r("-1/3"), 2).unwrap(), 1);
        // brute-force check of the last one: -1/3 - 1 = -4/3 has even numerator
        assert!(int_valuation((r("-1/3") - r("1")).numer(), 2) > 0);
        assert!(matches!(
            eps0(&r("1/2"), 2),
            Err(Error::NotPadicInteger { .. })
        ));
    }

    #[test]
    fn hensel_examples() {
        assert_eq!(hensel_digits(&r("-1"), 3, 4).digits, vec![2, 2, 2, 2]);
        assert_eq!(hensel_digits(&r("0"), 7, 5).digits, vec![0; 5]);
        assert_eq!(
            hensel_digits(&r("-1/3"), 2, 6).digits,
            long_division(&r("-1/3"), 2, 6)
        );
        assert_eq!(hensel_digits(&r("-1/3"), 2, 6).digits, vec![1, 0, 1, 0, 1, 0]);
    }

    #[test]
    fn hensel_extends_to_qp() {
        let h = hensel_digits(&r("5/12"), 2, 4);
        assert_eq!(h.valuation_offset, -2);
        assert_eq!(h.digits, hensel_digits(&r("5/3"), 2, 4).digits);
    }

    #[test]
    fn periodic_examples() {
        let h = detect_periodic_digits(&r("-1"), 2).unwrap();
        assert!(h.preperiod().is_empty());
        assert_eq!(h.period(), &[1]);
        let h = detect_periodic_digits(&r("7"), 2).unwrap();
        assert_eq!(h.preperiod(), &[1, 1, 1]);
        assert_eq!(h.period(), &[0]);
        let h = detect_periodic_digits(&r("-1/3"), 2).unwrap();
        assert!(h.preperiod().is_empty());
        assert_eq!(h.period(), &[1, 0]);
    }

    #[test]
    fn reconstruction_examples() {
        let h = |pre: Vec<u32>, per: Vec<u32>| HenselDigits::new(2, pre, per).unwrap();
        assert_eq!(rational_from_digits(&h(vec![], vec![1])), r("-1"));
        assert_eq!(rational_from_digits(&h(vec![0, 1], vec![0])), r("2"));
        assert_eq!(rational_from_digits(&h(vec![], vec![1, 0])), r("-1/3"));
    }

    #[test]
    fn canonical_form() {
        let h = HenselDigits::new(2, vec![0, 1, 0, 1], vec![0, 1, 0, 1]).unwrap();
        assert!(h.preperiod().is_empty());
        assert_eq!(h.period(), &[0, 1]);
        let h = HenselDigits::new(3, vec![1, 2], vec![1, 2, 1, 2]).unwrap();
        assert_eq!(h, HenselDigits::new(3, vec![], vec![1, 2]).unwrap());
        assert!(HenselDigits::new(3, vec![], vec![]).is_err());
        assert!(HenselDigits::new(3, vec![3], vec![0]).is_err());
    }

    #[test]
    fn shift_examples() {
        let h = HenselDigits::new(2, vec![], vec![1, 0]).unwrap();
        assert_eq!(h.delta_shift().period(), &[0, 1]);
        let m1 = HenselDigits::new(2, vec![], vec![1]).unwrap();
        assert_eq!(rational_from_digits(&m1.delta_shift()), r("-1"));
        let two = detect_periodic_digits(&r("2"), 2).unwrap();
        assert_eq!(rational_from_digits(&two.delta_shift()), r("1"));
        assert_eq!(delta(&r("2"), 2).unwrap(), r("1"));
        let a = PadicApprox::new(2, 0, vec![1, 0, 1]).unwrap();
        assert_eq!(a.delta_shift().digits, vec![0, 1]);
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(padic_valuation(&r("12"), 2), Some(2));
        assert_eq!(padic_valuation(&r("0"), 2), None);
        assert_eq!(padic_valuation(&r("5/6"), 3), Some(-1));
    }

    #[test]
    fn approx_value() {
        let a = PadicApprox::new(2, -1, vec![1, 1]).unwrap();
        assert_eq!(a.to_rational(), r("3/2"));
        assert!(PadicApprox::new(2, 0, vec![2]).is_err());
    }

    fn fraction(p: u64) -> impl Strategy<Value = ReducedFraction> {
        (-100_000i64..100_000, 1i64..2_000)
            .prop_filter("denominator coprime to p", move |(_, d)| d % p as i64 != 0)
            .prop_map(|(n, d)| BigRational::new(n.into(), d.into()))
    }

    fn prime() -> impl Strategy<Value = u64> {
        prop::sample::select(vec![2u64, 3, 5, 7])
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn round_trip((p, u) in prime().prop_flat_map(|p| (Just(p), fraction(p)))) {
            let h = detect_periodic_digits(&u, p).unwrap();
            prop_assert_eq!(rational_from_digits(&h), u);
        }

        #[test]
        fn truncation_agrees((p, u, n) in prime().prop_flat_map(|p| (Just(p), fraction(p), 0usize..=64))) {
            let h = detect_periodic_digits(&u, p).unwrap();
            prop_assert_eq!(hensel_digits(&u, p, n), h.truncate(n));
        }

        #[test]
        fn shift_semantics((p, u) in prime().prop_flat_map(|p| (Just(p), fraction(p)))) {
            let h = detect_periodic_digits(&u, p).unwrap();
            let d = eps0(&u, p).unwrap();
            let expected = (u - BigInt::from(d)) / BigInt::from(p);
            prop_assert_eq!(rational_from_digits(&h.delta_shift()), expected);
        }

        #[test]
        fn digit_distance_is_valuation(
            (p, u, v) in prime().prop_flat_map(|p| (Just(p), fraction(p), fraction(p)))
        ) {
            let a = hensel_digits(&u, p, 96);
            let b = hensel_digits(&v, p, 96);
            let h = a.first_difference(&b).map(|i| i as i64);
            let val = distance_exponent(&u, &v, p);
            match (h, val) {
                (None, Some(e)) => prop_assert!(e >= 96),
                (h, val) => prop_assert_eq!(h, val),
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn period_divides_order((p, u) in prime().prop_flat_map(|p| (Just(p), fraction(p)))) {
            let h = detect_periodic_digits(&u, p).unwrap();
            let b = u.denom().to_u64().unwrap();
            let ord = multiplicative_order(p, b);
            prop_assert_eq!(ord % h.period().len() as u64, 0);
        }
    }
}
