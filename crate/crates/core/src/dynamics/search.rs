//! Exhaustive cycle search over a range of integer seeds.
//!
//! The range is cut into shards that run in parallel. Each shard keeps its
//! own memo of integers already classified, so a trajectory stops as soon as
//! it joins a path seen earlier in the shard. Shard results are merged by
//! canonical cycle key, which makes the output independent of scheduling and
//! of the thread count.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use super::{step_int, Cycle};
use crate::error::{Error, Result};
use crate::padic::Params;

#[derive(Clone, Debug, Serialize)]
pub struct SearchOptions {
    /// Steps allowed per seed before it is reported as truncated.
    pub max_steps: usize,
    /// A trajectory whose magnitude exceeds `2^escape_bits` is reported as
    /// escaped (suspected divergence) instead of being followed further.
    pub escape_bits: u64,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    pub shard_size: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            max_steps: 1_000_000,
            escape_bits: 512,
            threads: None,
            shard_size: 1024,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FoundCycle {
    pub cycle: Cycle,
    /// Number of seeds in the range whose orbit ends in this cycle.
    pub seed_count: u64,
    /// The seed closest to `u_min` that reaches it.
    pub first_seed: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchReport {
    pub params: Params,
    pub u_min: i64,
    pub u_max: i64,
    pub options: SearchOptions,
    pub cycles: Vec<FoundCycle>,
    /// Seeds that used up `max_steps` without closing a cycle.
    pub truncated_seeds: Vec<i64>,
    /// Seeds whose orbit crossed the escape bound.
    pub escaped_seeds: Vec<i64>,
}

impl SearchReport {
    pub fn find(&self, member: i64) -> Option<&FoundCycle> {
        let m = BigRational::from_integer(member.into());
        self.cycles.iter().find(|c| c.cycle.members().contains(&m))
    }
}

/// Finds every cycle reached from an integer seed in `[u_min, u_max]`.
pub fn integer_cycle_search(
    params: &Params,
    u_min: i64,
    u_max: i64,
    options: &SearchOptions,
) -> Result<SearchReport> {
    if u_min > u_max {
        return Err(Error::Precondition(format!("empty seed range {u_min}..{u_max}")));
    }
    let shard = options.shard_size.max(1) as i64;
    let starts: Vec<i64> = (0..)
        .map(|i| u_min.saturating_add(i * shard))
        .take_while(|&s| s <= u_max)
        .collect();
    let run = || -> Vec<ShardResult> {
        starts
            .par_iter()
            .map(|&s| run_shard(params, s, s.saturating_add(shard - 1).min(u_max), options))
            .collect()
    };
    let shards = match options.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Precondition(e.to_string()))?
            .install(run),
        None => run(),
    };

    let mut merged: BTreeMap<Vec<BigInt>, (u64, i64)> = BTreeMap::new();
    let mut truncated_seeds = Vec::new();
    let mut escaped_seeds = Vec::new();
    for shard in shards {
        for (members, count, first) in shard.cycles {
            let entry = merged.entry(members).or_insert((0, first));
            entry.0 += count;
            entry.1 = entry.1.min(first);
        }
        truncated_seeds.extend(shard.truncated);
        escaped_seeds.extend(shard.escaped);
    }
    let mut cycles = merged
        .into_iter()
        .map(|(members, (seed_count, first_seed))| {
            let members = members.into_iter().map(BigRational::from_integer).collect();
            Ok(FoundCycle {
                cycle: Cycle::new(params, members)?,
                seed_count,
                first_seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    cycles.sort_by_key(|c| c.cycle.sort_key());
    Ok(SearchReport {
        params: params.clone(),
        u_min,
        u_max,
        options: options.clone(),
        cycles,
        truncated_seeds,
        escaped_seeds,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Outcome {
    Cycle(usize),
    Truncated,
    Escaped,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Value {
    Small(i128),
    Big(BigInt),
}

impl Value {
    fn from_big(n: BigInt) -> Value {
        match n.to_i128() {
            Some(v) => Value::Small(v),
            None => Value::Big(n),
        }
    }

    fn to_big(&self) -> BigInt {
        match self {
            Value::Small(v) => BigInt::from(*v),
            Value::Big(b) => b.clone(),
        }
    }
}

struct SmallStepper {
    p: i128,
    q: i128,
}

impl SmallStepper {
    fn step(&self, n: i128) -> Option<i128> {
        let r = n.rem_euclid(self.p);
        if r == 0 {
            return Some(n / self.p);
        }
        let qn = n.checked_mul(self.q)?;
        let a = (-qn).rem_euclid(self.p);
        Some(qn.checked_add(a)? / self.p)
    }
}

struct ShardResult {
    /// canonical members, seed count, first seed
    cycles: Vec<(Vec<BigInt>, u64, i64)>,
    truncated: Vec<i64>,
    escaped: Vec<i64>,
}

fn run_shard(params: &Params, lo: i64, hi: i64, options: &SearchOptions) -> ShardResult {
    let stepper = SmallStepper {
        p: i128::from(params.p()),
        q: i128::from(params.q()),
    };
    let mut memo: HashMap<i128, Outcome> = HashMap::new();
    let mut cycles: Vec<(Vec<BigInt>, u64, i64)> = Vec::new();
    let mut truncated = Vec::new();
    let mut escaped = Vec::new();
    let mut path: Vec<Value> = Vec::new();
    let mut on_path: HashMap<Value, usize> = HashMap::new();

    for seed in lo..=hi {
        path.clear();
        on_path.clear();
        let mut x = Value::Small(i128::from(seed));
        let mut steps = 0usize;
        let outcome = loop {
            if let Value::Small(v) = x {
                if let Some(&o) = memo.get(&v) {
                    break o;
                }
            }
            if let Some(&i) = on_path.get(&x) {
                let members: Vec<BigInt> = path[i..].iter().map(Value::to_big).collect();
                cycles.push((canonical(members), 0, seed));
                break Outcome::Cycle(cycles.len() - 1);
            }
            if let Value::Big(b) = &x {
                if b.bits() > options.escape_bits {
                    break Outcome::Escaped;
                }
            }
            if steps == options.max_steps {
                break Outcome::Truncated;
            }
            let next = match &x {
                Value::Small(v) => match stepper.step(*v) {
                    Some(n) => Value::Small(n),
                    None => Value::from_big(step_int(&BigInt::from(*v), params)),
                },
                Value::Big(b) => Value::from_big(step_int(b, params)),
            };
            on_path.insert(x.clone(), path.len());
            path.push(std::mem::replace(&mut x, next));
            steps += 1;
        };
        for v in &path {
            if let Value::Small(s) = v {
                memo.insert(*s, outcome);
            }
        }
        match outcome {
            Outcome::Cycle(i) => {
                cycles[i].1 += 1;
                cycles[i].2 = cycles[i].2.min(seed);
            }
            Outcome::Truncated => truncated.push(seed),
            Outcome::Escaped => escaped.push(seed),
        }
    }
    ShardResult {
        cycles,
        truncated,
        escaped,
    }
}

/// Rotation starting at the smallest `|n|`, negative first on ties.
fn canonical(mut members: Vec<BigInt>) -> Vec<BigInt> {
    let start = members
        .iter()
        .enumerate()
        .min_by_key(|(_, n)| (n.magnitude().clone(), n.sign() != num_bigint::Sign::Minus))
        .map(|(i, _)| i)
        .unwrap_or(0);
    members.rotate_left(start);
    members
}
