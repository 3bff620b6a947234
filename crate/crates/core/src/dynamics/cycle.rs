use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use super::{orbit_digit, step};
use crate::error::{Error, Result};
use crate::padic::{abs_cmp_key, Params, ReducedFraction};
use crate::rational;

/// A periodic orbit of `g`, rotated to start at its member of smallest
/// absolute numerator (negative before positive on ties).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Cycle {
    pub params: Params,
    #[serde(serialize_with = "rational::serde_vec::serialize")]
    members: Vec<ReducedFraction>,
}

impl Cycle {
    /// Builds a cycle from consecutive orbit members, verifying that `g` maps
    /// each member to the next (cyclically) and that members are distinct.
    pub fn new(params: &Params, members: Vec<ReducedFraction>) -> Result<Cycle> {
        if members.is_empty() {
            return Err(Error::Precondition("a cycle needs at least one member".into()));
        }
        let distinct: HashSet<_> = members.iter().collect();
        if distinct.len() != members.len() {
            return Err(Error::Precondition("cycle members must be distinct".into()));
        }
        for (i, u) in members.iter().enumerate() {
            let next = &members[(i + 1) % members.len()];
            if &step(u, params)? != next {
                return Err(Error::Precondition(format!(
                    "g({u}) ≠ {next}: not a cycle of g under {params}"
                )));
            }
        }
        let start = members
            .iter()
            .enumerate()
            .min_by_key(|(_, u)| abs_cmp_key(u))
            .map(|(i, _)| i)
            .unwrap();
        let mut members = members;
        members.rotate_left(start);
        Ok(Cycle {
            params: params.clone(),
            members,
        })
    }

    pub fn members(&self) -> &[ReducedFraction] {
        &self.members
    }

    /// The canonical first member.
    pub fn representative(&self) -> &ReducedFraction {
        &self.members[0]
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Sort key used for deterministic output.
    pub(crate) fn sort_key(&self) -> (BigInt, bool, BigInt, usize) {
        let (a, s, b) = abs_cmp_key(self.representative());
        (a, s, b, self.len())
    }

    /// Members joined with `;`, the CSV cell format.
    pub fn joined(&self) -> String {
        self.members
            .iter()
            .map(|u| u.to_string())
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// The exact identity `u = −N / D` for the first member `u` of a cycle of
/// length `k` with `ℓ` non-divisible steps:
/// `N = Σ_{i<ℓ} aᵢ p^{ψ(i)} q^{ℓ−1−i}`, `D = q^ℓ − p^k`, and
/// `quotient = N / D = −u`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CycleIdentity {
    pub k: usize,
    pub ell: usize,
    pub positions: Vec<usize>,
    pub digits: Vec<u32>,
    #[serde(serialize_with = "rational::serde_bigint::serialize")]
    pub numerator: BigInt,
    #[serde(serialize_with = "rational::serde_bigint::serialize")]
    pub denominator: BigInt,
    #[serde(with = "rational::serde_str")]
    pub quotient: ReducedFraction,
}

pub fn cycle_identity(cycle: &Cycle) -> Result<CycleIdentity> {
    let params = &cycle.params;
    let k = cycle.len();
    let mut positions = Vec::new();
    let mut digits = Vec::new();
    for (i, u) in cycle.members().iter().enumerate() {
        let a = orbit_digit(u, params)?;
        if a != 0 {
            positions.push(i);
            digits.push(a as u32);
        }
    }
    let ell = positions.len();
    let numerator: BigInt = positions
        .iter()
        .zip(&digits)
        .enumerate()
        .map(|(i, (&pos, &a))| {
            BigInt::from(a)
                * params.p_big().pow(pos as u32)
                * params.q_big().pow((ell - 1 - i) as u32)
        })
        .sum();
    let denominator = params.q_big().pow(ell as u32) - params.p_big().pow(k as u32);
    let quotient = BigRational::new(numerator.clone(), denominator.clone());
    assert_eq!(
        &quotient * &denominator,
        BigRational::from_integer(numerator.clone())
    );
    assert_eq!(
        &-quotient.clone(),
        cycle.representative(),
        "the first member satisfies u = −N/D"
    );
    Ok(CycleIdentity {
        k,
        ell,
        positions,
        digits,
        numerator,
        denominator,
        quotient,
    })
}
