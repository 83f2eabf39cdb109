//! Elkies/Atkin classification of small primes for a trace pair `(p, t)`.
//!
//! An odd prime `l != p` is Elkies when `t^2 - 4p` is a nonzero square mod
//! `l` and Atkin when it is a non-square. Primes dividing `t^2 - 4p` are kept
//! apart as [`Verdict::Ramified`]; whether they join the Elkies product is a
//! [`Convention`] choice.

use std::fmt;
use std::io::{self, Write};

use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;

use crate::arith::{is_prime, jacobi_odd, sieve_primes};
use crate::curves::TracePair;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Elkies,
    Atkin,
    Ramified,
    Excluded,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Elkies => "elkies",
            Verdict::Atkin => "atkin",
            Verdict::Ramified => "ramified",
            Verdict::Excluded => "excluded",
        })
    }
}

/// Whether primes dividing `t^2 - 4p` count towards the Elkies product.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Convention {
    pub ramified_as_elkies: bool,
}

impl Convention {
    pub fn counts_as_elkies(&self, verdict: Verdict) -> bool {
        match verdict {
            Verdict::Elkies => true,
            Verdict::Ramified => self.ramified_as_elkies,
            Verdict::Atkin | Verdict::Excluded => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PrimeClass {
    pub ell: u64,
    /// Jacobi symbol of `t^2 - 4p` modulo `ell`.
    pub symbol: i8,
    pub verdict: Verdict,
}

pub fn classify_prime(ell: u64, pair: &TracePair) -> Result<PrimeClass> {
    if ell == 2 {
        return Err(Error::domain("the prime 2 is never classified"));
    }
    if !is_prime(ell) {
        return Err(Error::domain(format!("{ell} is not prime")));
    }
    Ok(classify_odd_prime(ell, pair))
}

#[inline]
pub(crate) fn classify_odd_prime(ell: u64, pair: &TracePair) -> PrimeClass {
    let residue = pair.discriminant().rem_euclid(ell as i128) as u64;
    let symbol = jacobi_odd(residue, ell);
    let verdict = if ell == pair.p() {
        Verdict::Excluded
    } else {
        match symbol {
            1 => Verdict::Elkies,
            -1 => Verdict::Atkin,
            _ => Verdict::Ramified,
        }
    };
    PrimeClass {
        ell,
        symbol,
        verdict,
    }
}

/// Where the Elkies product first exceeds `4 sqrt(p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LpBound {
    /// The Elkies prime at which the product crosses the threshold.
    Prime(u64),
    /// The threshold was not reached by primes up to `limit`.
    Saturated { limit: u64 },
}

impl LpBound {
    pub fn is_saturated(&self) -> bool {
        matches!(self, LpBound::Saturated { .. })
    }

    pub fn prime(&self) -> Option<u64> {
        match *self {
            LpBound::Prime(l) => Some(l),
            LpBound::Saturated { .. } => None,
        }
    }

    /// `L_p` for a resolved bound, otherwise the limit it is known to exceed.
    pub fn value(&self) -> u64 {
        match *self {
            LpBound::Prime(l) => l,
            LpBound::Saturated { limit } => limit,
        }
    }
}

/// Exact test `product > 4 sqrt(p)`, i.e. `product^2 > 16p`.
pub fn exceeds_threshold(product: &BigUint, p: u64) -> bool {
    product * product > BigUint::from(16u128 * p as u128)
}

/// Classification of every odd prime up to a bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElkiesProfile {
    pub pair: TracePair,
    pub bound: u64,
    pub convention: Convention,
    /// One entry per odd prime in `[3, bound]`, ascending.
    pub classes: Vec<PrimeClass>,
    pub n_e: usize,
    pub n_a: usize,
    pub n_ramified: usize,
    pub n_excluded: usize,
    /// Product of the primes counted as Elkies under `convention`.
    pub elkies_product: BigUint,
    pub lp: LpBound,
    /// Elkies product at `lp` (or at `bound` when saturated).
    pub product_at_lp: BigUint,
}

impl ElkiesProfile {
    /// `16p`, the square of the `4 sqrt(p)` threshold.
    pub fn threshold_squared(&self) -> u128 {
        16 * self.pair.p() as u128
    }

    pub fn summary(&self) -> ProfileSummary {
        ProfileSummary {
            p: self.pair.p(),
            t: self.pair.t(),
            bound: self.bound,
            n_e: self.n_e,
            n_a: self.n_a,
            n_ramified: self.n_ramified,
            elkies_product: self.elkies_product.to_string(),
            lp: self.lp.prime(),
            saturated: self.lp.is_saturated(),
        }
    }

    /// Writes the `p,t,ell,symbol,verdict` table, header included.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "p,t,ell,symbol,verdict")?;
        for c in &self.classes {
            writeln!(
                out,
                "{},{},{},{},{}",
                self.pair.p(),
                self.pair.t(),
                c.ell,
                c.symbol,
                c.verdict
            )?;
        }
        Ok(())
    }
}

/// JSON shape of a profile summary; the product is a decimal string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProfileSummary {
    pub p: u64,
    pub t: i64,
    #[serde(rename = "L")]
    pub bound: u64,
    pub n_e: usize,
    pub n_a: usize,
    pub n_ramified: usize,
    pub elkies_product: String,
    #[serde(rename = "L_p")]
    pub lp: Option<u64>,
    pub saturated: bool,
}

pub fn classify_range(pair: &TracePair, bound: u64) -> Result<ElkiesProfile> {
    classify_range_with(pair, bound, Convention::default())
}

pub fn classify_range_with(
    pair: &TracePair,
    bound: u64,
    convention: Convention,
) -> Result<ElkiesProfile> {
    if bound < 3 {
        return Err(Error::domain(format!(
            "classification bound must be >= 3, got {bound}"
        )));
    }
    let primes = sieve_primes(bound)?;
    Ok(profile_from_primes(pair, bound, &primes, convention))
}

/// Builds a profile from an ascending prime list covering `bound`. Primes
/// above `bound` and the prime 2 are ignored.
pub fn profile_from_primes(
    pair: &TracePair,
    bound: u64,
    primes: &[u64],
    convention: Convention,
) -> ElkiesProfile {
    let mut profile = ElkiesProfile {
        pair: *pair,
        bound,
        convention,
        classes: Vec::new(),
        n_e: 0,
        n_a: 0,
        n_ramified: 0,
        n_excluded: 0,
        elkies_product: BigUint::one(),
        lp: LpBound::Saturated { limit: bound },
        product_at_lp: BigUint::one(),
    };
    for &ell in primes
        .iter()
        .filter(|&&l| l >= 3)
        .take_while(|&&l| l <= bound)
    {
        let class = classify_odd_prime(ell, pair);
        match class.verdict {
            Verdict::Elkies => profile.n_e += 1,
            Verdict::Atkin => profile.n_a += 1,
            Verdict::Ramified => profile.n_ramified += 1,
            Verdict::Excluded => profile.n_excluded += 1,
        }
        if convention.counts_as_elkies(class.verdict) {
            profile.elkies_product *= ell;
            if profile.lp.is_saturated() && exceeds_threshold(&profile.elkies_product, pair.p()) {
                profile.lp = LpBound::Prime(ell);
                profile.product_at_lp = profile.elkies_product.clone();
            }
        }
        profile.classes.push(class);
    }
    if profile.lp.is_saturated() {
        profile.product_at_lp = profile.elkies_product.clone();
    }
    profile
}

/// `L_p` and the Elkies product at that point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpResult {
    pub lp: LpBound,
    pub product: BigUint,
}

pub fn compute_lp(pair: &TracePair, sieve_limit: u64) -> Result<LpResult> {
    compute_lp_with(pair, sieve_limit, Convention::default())
}

pub fn compute_lp_with(
    pair: &TracePair,
    sieve_limit: u64,
    convention: Convention,
) -> Result<LpResult> {
    let primes = sieve_primes(sieve_limit)?;
    Ok(lp_from_primes(pair, sieve_limit, &primes, convention))
}

pub(crate) fn lp_from_primes(
    pair: &TracePair,
    limit: u64,
    primes: &[u64],
    convention: Convention,
) -> LpResult {
    // Below the crossing the product is at most 4 sqrt(p) < 2^33, so one
    // more prime factor keeps it well inside u128.
    let threshold = 16 * pair.p() as u128;
    let mut product = 1u128;
    for &ell in primes
        .iter()
        .filter(|&&l| l >= 3)
        .take_while(|&&l| l <= limit)
    {
        if convention.counts_as_elkies(classify_odd_prime(ell, pair).verdict) {
            product *= ell as u128;
            if product * product > threshold {
                return LpResult {
                    lp: LpBound::Prime(ell),
                    product: BigUint::from(product),
                };
            }
        }
    }
    LpResult {
        lp: LpBound::Saturated { limit },
        product: BigUint::from(product),
    }
}

/// Spread of `N_e / pi(L)` across a family of profiles sharing `L`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeuristicSummary {
    #[serde(rename = "L")]
    pub bound: u64,
    pub pi_l: usize,
    pub count: usize,
    pub ratios: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation of the ratios.
    pub spread: f64,
    pub min: f64,
    pub max: f64,
}

pub fn heuristic_deviation(profiles: &[ElkiesProfile]) -> Result<HeuristicSummary> {
    let first = profiles
        .first()
        .ok_or_else(|| Error::domain("heuristic summary needs at least one profile"))?;
    let bound = first.bound;
    if let Some(other) = profiles.iter().find(|pr| pr.bound != bound) {
        return Err(Error::domain(format!(
            "profiles disagree on L: {} and {}",
            bound, other.bound
        )));
    }
    let pi_l = sieve_primes(bound)?.len();
    let k = profiles.len() as u128;
    // integer moments make the summary independent of input order
    let s1: u128 = profiles.iter().map(|pr| pr.n_e as u128).sum();
    let s2: u128 = profiles.iter().map(|pr| (pr.n_e * pr.n_e) as u128).sum();
    let pi = pi_l as f64;
    let mean = s1 as f64 / (k as f64 * pi);
    let var_num = k * s2 - s1 * s1;
    let spread = (var_num as f64).sqrt() / (k as f64 * pi);
    let ratios: Vec<f64> = profiles.iter().map(|pr| pr.n_e as f64 / pi).collect();
    let n_min = profiles.iter().map(|pr| pr.n_e).min().unwrap_or(0);
    let n_max = profiles.iter().map(|pr| pr.n_e).max().unwrap_or(0);
    Ok(HeuristicSummary {
        bound,
        pi_l,
        count: profiles.len(),
        ratios,
        mean,
        spread,
        min: n_min as f64 / pi,
        max: n_max as f64 / pi,
    })
}
