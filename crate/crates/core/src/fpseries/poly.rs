use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic::{inverse_mod_prime, is_prime};

/// A polynomial over `F_p`, lowest degree first, without trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FpPoly {
    p: u32,
    coeffs: Vec<u32>,
}

pub(crate) fn check_prime(p: u32) -> Result<()> {
    if !is_prime(u64::from(p)) {
        return Err(Error::InvalidParams(format!("p = {p} is not prime")));
    }
    Ok(())
}

impl FpPoly {
    /// Coefficients are reduced mod `p`.
    pub fn new(p: u32, coeffs: impl IntoIterator<Item = i64>) -> Result<Self> {
        check_prime(p)?;
        let coeffs = coeffs
            .into_iter()
            .map(|c| c.rem_euclid(i64::from(p)) as u32)
            .collect();
        Ok(Self::from_raw(p, coeffs))
    }

    pub(crate) fn from_raw(p: u32, mut coeffs: Vec<u32>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        FpPoly { p, coeffs }
    }

    pub fn zero(p: u32) -> Self {
        FpPoly { p, coeffs: vec![] }
    }

    pub fn constant(p: u32, c: u32) -> Self {
        Self::from_raw(p, vec![c % p])
    }

    /// `1 + T`
    pub fn one_plus_t(p: u32) -> Self {
        Self::from_raw(p, vec![1, 1])
    }

    /// `T^k`
    pub fn monomial(p: u32, k: usize) -> Self {
        let mut coeffs = vec![0; k + 1];
        coeffs[k] = 1;
        FpPoly { p, coeffs }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> u32 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn leading(&self) -> u32 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    fn mulmod(&self, a: u32, b: u32) -> u32 {
        (u64::from(a) * u64::from(b) % u64::from(self.p)) as u32
    }

    pub(crate) fn inv(&self, a: u32) -> u32 {
        inverse_mod_prime(u64::from(a), u64::from(self.p)) as u32
    }

    pub fn add(&self, other: &FpPoly) -> FpPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| ((u64::from(self.coeff(i)) + u64::from(other.coeff(i))) % u64::from(self.p)) as u32)
            .collect();
        Self::from_raw(self.p, coeffs)
    }

    pub fn neg(&self) -> FpPoly {
        let coeffs = self.coeffs.iter().map(|&c| (self.p - c) % self.p).collect();
        Self::from_raw(self.p, coeffs)
    }

    pub fn sub(&self, other: &FpPoly) -> FpPoly {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: u32) -> FpPoly {
        let coeffs = self.coeffs.iter().map(|&a| self.mulmod(a, c % self.p)).collect();
        Self::from_raw(self.p, coeffs)
    }

    pub fn mul(&self, other: &FpPoly) -> FpPoly {
        if self.is_zero() || other.is_zero() {
            return FpPoly::zero(self.p);
        }
        let p = u64::from(self.p);
        let mut acc = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                acc[i + j] = (acc[i + j] + u64::from(a) * u64::from(b)) % p;
            }
        }
        Self::from_raw(self.p, acc.into_iter().map(|c| c as u32).collect())
    }

    pub fn pow(&self, e: u32) -> FpPoly {
        (0..e).fold(FpPoly::constant(self.p, 1), |acc, _| acc.mul(self))
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &FpPoly) -> (FpPoly, FpPoly) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lead_inv = self.inv(divisor.leading());
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0u32; self.coeffs.len().saturating_sub(dd)];
        let p = u64::from(self.p);
        while rem.len() > dd {
            let top = rem.len() - 1;
            let c = self.mulmod(rem[top], lead_inv);
            let shift = top - dd;
            quot[shift] = c;
            for (i, &d) in divisor.coeffs.iter().enumerate() {
                let sub = u64::from(c) * u64::from(d) % p;
                rem[shift + i] = ((u64::from(rem[shift + i]) + p - sub) % p) as u32;
            }
            while rem.last() == Some(&0) {
                rem.pop();
            }
        }
        (Self::from_raw(self.p, quot), Self::from_raw(self.p, rem))
    }

    /// Monic greatest common divisor (zero when both are zero).
    pub fn gcd(&self, other: &FpPoly) -> FpPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn monic(&self) -> FpPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(self.inv(self.leading()))
    }

    /// Divides by `T`; the constant term must be zero.
    pub fn div_t(&self) -> FpPoly {
        debug_assert_eq!(self.coeff(0), 0);
        Self::from_raw(self.p, self.coeffs.iter().skip(1).copied().collect())
    }
}

impl fmt::Display for FpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| match (i, c) {
                (0, c) => c.to_string(),
                (1, 1) => "T".to_string(),
                (1, c) => format!("{c}T"),
                (i, 1) => format!("T^{i}"),
                (i, c) => format!("{c}T^{i}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}
