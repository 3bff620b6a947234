//! The analogue of `φ` on `F_p[[T]]`.
//!
//! The map `S(f) = f/T` if `f(0) = 0`, `S(f) = ((1+T)f − f(0))/T` otherwise,
//! plays the role of `g` with `1+T` in place of `q`. The coefficient stream
//! `φ(f) = Σ S^n(f)(0) Tⁿ` is an isometry of `F_p[[T]]`, with inverse
//! `Σ aₙ Tⁿ / (1+T)^{rₙ}`. Rational functions have eventually periodic
//! `S`-orbits since `S` never raises the height `max(deg P, deg Q)`.

mod poly;

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic::HenselDigits;

pub use poly::FpPoly;

/// `P/Q` over `F_p` in lowest terms with `Q` monic and `Q(0) ≠ 0`.
/// Zero is `0/1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FpRationalFunction {
    numerator: FpPoly,
    denominator: FpPoly,
}

impl FpRationalFunction {
    pub fn new(numerator: FpPoly, denominator: FpPoly) -> Result<Self> {
        if numerator.p() != denominator.p() {
            return Err(Error::Precondition("numerator and denominator over different fields".into()));
        }
        if denominator.is_zero() {
            return Err(Error::Precondition("zero denominator".into()));
        }
        let p = numerator.p();
        if numerator.is_zero() {
            return Ok(Self::zero(p));
        }
        let g = numerator.gcd(&denominator);
        let (num, _) = numerator.div_rem(&g);
        let (den, _) = denominator.div_rem(&g);
        if den.coeff(0) == 0 {
            return Err(Error::Precondition(format!(
                "({num})/({den}) has no power series expansion: denominator vanishes at 0"
            )));
        }
        let lead_inv = den.inv(den.leading());
        Ok(FpRationalFunction {
            numerator: num.scale(lead_inv),
            denominator: den.scale(lead_inv),
        })
    }

    /// Builds `P/Q` from coefficient lists.
    pub fn from_coeffs(p: u32, numerator: &[i64], denominator: &[i64]) -> Result<Self> {
        Self::new(
            FpPoly::new(p, numerator.iter().copied())?,
            FpPoly::new(p, denominator.iter().copied())?,
        )
    }

    pub fn zero(p: u32) -> Self {
        FpRationalFunction {
            numerator: FpPoly::zero(p),
            denominator: FpPoly::constant(p, 1),
        }
    }

    pub fn from_poly(poly: FpPoly) -> Self {
        let p = poly.p();
        FpRationalFunction {
            numerator: poly,
            denominator: FpPoly::constant(p, 1),
        }
    }

    pub fn p(&self) -> u32 {
        self.numerator.p()
    }

    pub fn numerator(&self) -> &FpPoly {
        &self.numerator
    }

    pub fn denominator(&self) -> &FpPoly {
        &self.denominator
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    /// `f(0) = P(0)/Q(0)`.
    pub fn at_zero(&self) -> u32 {
        let q0 = self.denominator.coeff(0);
        let inv = self.denominator.inv(q0);
        (u64::from(self.numerator.coeff(0)) * u64::from(inv) % u64::from(self.p())) as u32
    }

    pub fn add(&self, other: &Self) -> Self {
        let num = self
            .numerator
            .mul(&other.denominator)
            .add(&other.numerator.mul(&self.denominator));
        Self::new(num, self.denominator.mul(&other.denominator)).expect("Q(0)Q'(0) ≠ 0")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        FpRationalFunction {
            numerator: self.numerator.neg(),
            denominator: self.denominator.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(
            self.numerator.mul(&other.numerator),
            self.denominator.mul(&other.denominator),
        )
        .expect("Q(0)Q'(0) ≠ 0")
    }

    /// `self / other`; fails when the quotient has no power series expansion.
    pub fn div(&self, other: &Self) -> Result<Self> {
        if other.is_zero() {
            return Err(Error::Precondition("division by zero".into()));
        }
        Self::new(
            self.numerator.mul(&other.denominator),
            self.denominator.mul(&other.numerator),
        )
    }

    /// The first `n` coefficients of the power series.
    pub fn expand(&self, n: usize) -> FpSeriesApprox {
        let p = u64::from(self.p());
        let q0_inv = u64::from(self.denominator.inv(self.denominator.coeff(0)));
        let mut c: Vec<u32> = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = u64::from(self.numerator.coeff(k));
            for i in 1..=k.min(self.denominator.coeffs().len().saturating_sub(1)) {
                let sub = u64::from(self.denominator.coeff(i)) * u64::from(c[k - i]) % p;
                acc = (acc + p - sub) % p;
            }
            c.push((acc * q0_inv % p) as u32);
        }
        FpSeriesApprox {
            p: self.p(),
            coeffs: c,
        }
    }
}

impl fmt::Display for FpRationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denominator.degree() == Some(0) {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "({})/({})", self.numerator, self.denominator)
        }
    }
}

/// The first `N` coefficients of a power series over `F_p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FpSeriesApprox {
    pub p: u32,
    pub coeffs: Vec<u32>,
}

impl FpSeriesApprox {
    pub fn new(p: u32, coeffs: Vec<u32>) -> Result<Self> {
        poly::check_prime(p)?;
        if let Some(c) = coeffs.iter().find(|&&c| c >= p) {
            return Err(Error::Precondition(format!("coefficient {c} is not below p = {p}")));
        }
        Ok(FpSeriesApprox { p, coeffs })
    }

    pub fn precision(&self) -> usize {
        self.coeffs.len()
    }

    /// First index where the two truncations differ.
    pub fn first_difference(&self, other: &Self) -> Option<usize> {
        crate::padic::first_difference(&self.coeffs, &other.coeffs)
    }
}

/// One application of `S`.
pub fn smap(f: &FpRationalFunction) -> FpRationalFunction {
    let a = f.at_zero();
    let p = f.p();
    let num = if a == 0 {
        f.numerator.div_t()
    } else {
        FpPoly::one_plus_t(p)
            .mul(&f.numerator)
            .sub(&f.denominator.scale(a))
            .div_t()
    };
    FpRationalFunction::new(num, f.denominator.clone()).expect("the denominator is unchanged")
}

/// `S`-orbit of a rational function with its exact period.
#[derive(Clone, Debug, Serialize)]
pub struct SeriesOrbit {
    pub states: Vec<FpRationalFunction>,
    /// `(preperiod, period)`, absent only if `max_steps` ran out first.
    pub cycle: Option<(usize, usize)>,
}

/// Iterates `S` until a state repeats. Every state has height at most that
/// of `f` and the same denominator up to cancellation, so the orbit lives in
/// a finite set and always closes; `max_steps` is a safety net.
pub fn smap_orbit(f: &FpRationalFunction, max_steps: usize) -> SeriesOrbit {
    let mut seen: HashMap<FpRationalFunction, usize> = HashMap::new();
    let mut states = vec![f.clone()];
    loop {
        let n = states.len() - 1;
        let current = &states[n];
        if let Some(&first) = seen.get(current) {
            states.pop();
            return SeriesOrbit {
                states,
                cycle: Some((first, n - first)),
            };
        }
        if n == max_steps {
            return SeriesOrbit {
                states,
                cycle: None,
            };
        }
        seen.insert(current.clone(), n);
        let next = smap(current);
        states.push(next);
    }
}

/// `φ(f)`: coefficient `n` is `S^n(f)(0)`.
pub fn phi_series(f: &FpRationalFunction, n: usize) -> FpSeriesApprox {
    let mut coeffs = Vec::with_capacity(n);
    let mut g = f.clone();
    for i in 0..n {
        coeffs.push(g.at_zero());
        if i + 1 < n {
            g = smap(&g);
        }
    }
    FpSeriesApprox { p: f.p(), coeffs }
}

/// The exact, eventually periodic coefficient stream of `φ(f)`.
pub fn phi_series_exact(f: &FpRationalFunction, max_steps: usize) -> Result<HenselDigits> {
    let orbit = smap_orbit(f, max_steps);
    let (pre, period) = orbit.cycle.ok_or(Error::BudgetExhausted(max_steps))?;
    let digits: Vec<u32> = orbit.states.iter().map(FpRationalFunction::at_zero).collect();
    HenselDigits::new(
        u64::from(f.p()),
        digits[..pre].to_vec(),
        digits[pre..pre + period].to_vec(),
    )
}

/// `Σ_{n<N} aₙ Tⁿ / (1+T)^{rₙ}` truncated to `N` coefficients, with `rₙ` the
/// number of nonzero `aᵢ`, `i ≤ n`.
pub fn phi_series_inverse(g: &FpSeriesApprox) -> FpSeriesApprox {
    let p = u64::from(g.p);
    let n = g.precision();
    let mut acc = vec![0u64; n];
    // w = Tⁿ(1+T)^{−rₙ} truncated to N terms
    let mut w = vec![0u64; n];
    if n > 0 {
        w[0] = 1;
    }
    for (k, &a) in g.coeffs.iter().enumerate() {
        if k > 0 {
            w.rotate_right(1);
            w[0] = 0;
        }
        if a != 0 {
            // divide by 1+T: w'_i = w_i − w'_{i−1}
            for i in 1..n {
                w[i] = (w[i] + p - w[i - 1]) % p;
            }
            for i in 0..n {
                acc[i] = (acc[i] + u64::from(a) * w[i]) % p;
            }
        }
    }
    FpSeriesApprox {
        p: g.p,
        coeffs: acc.into_iter().map(|c| c as u32).collect(),
    }
}

/// `Σ aᵢ Tⁱ / (1+T)^{rᵢ}` over a block, and the number of nonzero digits.
fn block_sum(p: u32, digits: &[u32]) -> (FpRationalFunction, u32) {
    let mut sum = FpRationalFunction::zero(p);
    let mut count = 0u32;
    for (i, &a) in digits.iter().enumerate() {
        if a != 0 {
            count += 1;
            let term = FpRationalFunction::new(
                FpPoly::monomial(p, i).scale(a),
                FpPoly::one_plus_t(p).pow(count),
            )
            .expect("(1+T)(0) = 1");
            sum = sum.add(&term);
        }
    }
    (sum, count)
}

/// `φ⁻¹` of an eventually periodic stream, exactly:
/// `A + T^s/(1+T)^{R₀} · B / (1 − T^K/(1+T)^R)`.
pub fn phi_series_inverse_exact(v: &HenselDigits) -> Result<FpRationalFunction> {
    let p = u32::try_from(v.p()).map_err(|_| Error::InvalidParams("p too large".into()))?;
    let (head, r0) = block_sum(p, v.preperiod());
    let (block, r) = block_sum(p, v.period());
    let s = v.preperiod().len();
    let k = v.period().len();
    let scale = FpRationalFunction::new(FpPoly::monomial(p, s), FpPoly::one_plus_t(p).pow(r0))?;
    let ratio = FpRationalFunction::new(FpPoly::monomial(p, k), FpPoly::one_plus_t(p).pow(r))?;
    let one = FpRationalFunction::from_poly(FpPoly::constant(p, 1));
    let tail = scale.mul(&block).div(&one.sub(&ratio))?;
    Ok(head.add(&tail))
}

/// `max(deg P, deg Q)`, with `0` for the zero function.
pub fn series_height(f: &FpRationalFunction) -> usize {
    if f.is_zero() {
        return 0;
    }
    f.numerator
        .degree()
        .unwrap_or(0)
        .max(f.denominator.degree().unwrap_or(0))
}

/// The power series expansion of `f` as an eventually periodic stream,
/// found by iterating the coefficient shift `f ↦ (f − f(0))/T` until a
/// state repeats. The shift keeps the denominator and the height bounded.
pub fn expansion_exact(f: &FpRationalFunction, max_steps: usize) -> Result<HenselDigits> {
    let p = f.p();
    let mut seen: HashMap<FpRationalFunction, usize> = HashMap::new();
    let mut digits = Vec::new();
    let mut g = f.clone();
    let start = loop {
        if let Some(&i) = seen.get(&g) {
            break i;
        }
        if digits.len() == max_steps {
            return Err(Error::BudgetExhausted(max_steps));
        }
        let a = g.at_zero();
        let next = g.sub(&FpRationalFunction::from_poly(FpPoly::constant(p, a)));
        let next = FpRationalFunction::new(next.numerator.div_t(), next.denominator.clone())?;
        seen.insert(std::mem::replace(&mut g, next), digits.len());
        digits.push(a);
    };
    let period = digits.split_off(start);
    HenselDigits::new(u64::from(p), digits, period)
}

/// The rational function whose expansion is the eventually periodic stream `v`.
pub fn rational_from_series(v: &HenselDigits) -> Result<FpRationalFunction> {
    let p = u32::try_from(v.p()).map_err(|_| Error::InvalidParams("p too large".into()))?;
    let as_poly = |d: &[u32]| FpPoly::from_raw(p, d.to_vec());
    let head = FpRationalFunction::from_poly(as_poly(v.preperiod()));
    let block = FpRationalFunction::from_poly(as_poly(v.period()));
    let shift = FpRationalFunction::from_poly(FpPoly::monomial(p, v.preperiod().len()));
    let denom = FpRationalFunction::from_poly(
        FpPoly::constant(p, 1).sub(&FpPoly::monomial(p, v.period().len())),
    );
    Ok(head.add(&shift.mul(&block).div(&denom)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rf(p: u32, n: &[i64], d: &[i64]) -> FpRationalFunction {
        FpRationalFunction::from_coeffs(p, n, d).unwrap()
    }

    #[test]
    fn canonical_form() {
        let f = rf(3, &[2, 2], &[2, 2, 0]);
        assert_eq!(f, rf(3, &[1], &[1]));
        let f = rf(5, &[1], &[3, 2]);
        assert_eq!(f.denominator().leading(), 1);
        assert!(FpRationalFunction::from_coeffs(2, &[1], &[0, 1]).is_err());
        assert_eq!(rf(2, &[0, 1], &[0, 1, 1]), rf(2, &[1], &[1, 1]));
        assert!(rf(7, &[0], &[3]).is_zero());
    }

    #[test]
    fn smap_examples() {
        assert!(smap(&rf(2, &[1], &[1, 1])).is_zero());
        assert!(smap(&FpRationalFunction::zero(3)).is_zero());
        assert_eq!(smap(&rf(3, &[0, 1], &[1, 1])), rf(3, &[1], &[1, 1]));
        assert_eq!(smap(&rf(2, &[1], &[1])), rf(2, &[1], &[1]));
    }

    #[test]
    fn orbit_examples() {
        let o = smap_orbit(&rf(2, &[1], &[1, 1]), 100);
        assert_eq!(o.cycle, Some((1, 1)));
        let o = smap_orbit(&FpRationalFunction::zero(2), 100);
        assert_eq!(o.cycle, Some((0, 1)));
        // oracle: there are at most 2^3·2^2 = 32 numerators over the fixed
        // denominator 1+T+T² of degree ≤ 2, so the period is at most that
        let o = smap_orbit(&rf(2, &[1], &[1, 1, 1]), 100);
        let (pre, period) = o.cycle.unwrap();
        assert!(pre + period <= 32);
        assert!(o.states.iter().all(|s| series_height(s) <= 2));
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi_series(&rf(2, &[1], &[1, 1]), 5).coeffs, vec![1, 0, 0, 0, 0]);
        assert_eq!(phi_series(&FpRationalFunction::zero(2), 4).coeffs, vec![0; 4]);
        assert_eq!(phi_series(&rf(2, &[1], &[1]), 5).coeffs, vec![1; 5]);
        assert_eq!(rf(2, &[1], &[1, 1]).expand(5).coeffs, vec![1; 5]);
    }

    #[test]
    fn inverse_examples() {
        let one = FpSeriesApprox::new(2, vec![1, 0, 0, 0, 0, 0]).unwrap();
        assert_eq!(phi_series_inverse(&one), rf(2, &[1], &[1, 1]).expand(6));
        let zero = FpSeriesApprox::new(3, vec![0; 5]).unwrap();
        assert_eq!(phi_series_inverse(&zero).coeffs, vec![0; 5]);
        let ones = FpSeriesApprox::new(2, vec![1; 8]).unwrap();
        assert_eq!(phi_series_inverse(&ones).coeffs, [1, 0, 0, 0, 0, 0, 0, 0]);

        let all_ones = HenselDigits::new(2, vec![], vec![1]).unwrap();
        assert_eq!(phi_series_inverse_exact(&all_ones).unwrap(), rf(2, &[1], &[1]));
        let single = HenselDigits::new(2, vec![1], vec![0]).unwrap();
        assert_eq!(phi_series_inverse_exact(&single).unwrap(), rf(2, &[1], &[1, 1]));
        assert_eq!(rational_from_series(&all_ones).unwrap(), rf(2, &[1], &[1, 1]));
        assert_eq!(expansion_exact(&rf(2, &[1], &[1, 1]), 10).unwrap(), all_ones);
    }

    #[test]
    fn heights() {
        assert_eq!(series_height(&rf(2, &[1], &[1, 1])), 1);
        assert_eq!(series_height(&rf(2, &[1, 0, 1], &[1, 1, 0, 1])), 3);
        assert_eq!(series_height(&FpRationalFunction::zero(5)), 0);
    }

    fn field() -> impl Strategy<Value = u32> {
        prop_oneof![Just(2u32), Just(3), Just(5)]
    }

    /// Rational functions of height ≤ 8.
    fn rational(p: u32) -> impl Strategy<Value = FpRationalFunction> {
        let coeffs = proptest::collection::vec(0i64..p as i64, 0..=9);
        (coeffs.clone(), coeffs, 1i64..p as i64).prop_map(move |(n, mut d, d0)| {
            if d.is_empty() {
                d.push(d0);
            } else {
                d[0] = d0;
            }
            rf(p, &n, &d)
        })
    }

    fn field_and_pair() -> impl Strategy<Value = (FpRationalFunction, FpRationalFunction)> {
        field().prop_flat_map(|p| (rational(p), rational(p)))
    }

    fn small_field_function() -> impl Strategy<Value = FpRationalFunction> {
        prop_oneof![rational(2), rational(3)]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn isometry((f, g) in field_and_pair()) {
            let lhs = phi_series(&f, 64).first_difference(&phi_series(&g, 64));
            let rhs = f.expand(64).first_difference(&g.expand(64));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn height_is_monotone(f in field().prop_flat_map(rational)) {
            prop_assert!(series_height(&smap(&f)) <= series_height(&f));
        }

        #[test]
        fn rational_inputs_are_periodic(f in small_field_function()) {
            let orbit = smap_orbit(&f, 1_000_000);
            prop_assert!(orbit.cycle.is_some());
            let stream = phi_series_exact(&f, 1_000_000).unwrap();
            prop_assert_eq!(phi_series_inverse_exact(&stream).unwrap(), f.clone());
            prop_assert_eq!(phi_series_inverse(&phi_series(&f, 64)), f.expand(64));
            // the expansion of f is eventually periodic and determines f
            let expansion = expansion_exact(&f, 1_000_000).unwrap();
            prop_assert_eq!(rational_from_series(&expansion).unwrap(), f.clone());
            prop_assert_eq!(expansion.iter().take(64).collect::<Vec<_>>(), f.expand(64).coeffs);
        }

        #[test]
        fn periodic_streams_are_rational(
            p in prop_oneof![Just(2u32), Just(3)],
            pre in proptest::collection::vec(0u32..6, 0..=6),
            period in proptest::collection::vec(0u32..6, 1..=6),
        ) {
            let h = HenselDigits::new(
                u64::from(p),
                pre.into_iter().map(|d| d % p).collect(),
                period.into_iter().map(|d| d % p).collect(),
            ).unwrap();
            let f = phi_series_inverse_exact(&h).unwrap();
            let n = 80;
            let coeffs: Vec<u32> = h.iter().take(n).collect();
            prop_assert_eq!(&phi_series(&f, n).coeffs, &coeffs);
            let truncated = FpSeriesApprox::new(p, coeffs).unwrap();
            prop_assert_eq!(phi_series_inverse(&truncated), f.expand(n));
            let g = rational_from_series(&h).unwrap();
            prop_assert_eq!(g.expand(n).coeffs, h.iter().take(n).collect::<Vec<_>>());
        }
    }
}
