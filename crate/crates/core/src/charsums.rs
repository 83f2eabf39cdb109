//! Exact evaluation of quadratic character sums.
//!
//! Covers the long sums `sum_{|t| <= T} (t^2 - a / m)`, the incomplete sums
//! `sum_{n <= N} ((n - u)(n - v) / m)` against their explicit upper bound,
//! and the sieve sum
//!
//! ```text
//! W = sum_{1 <= t <= T} sum_{Q/2 <= p <= Q} prod_{l in [M, L]} (1 + (t^2 - 4p / l))
//! ```
//!
//! evaluated both as written and expanded over square-free `m`. Sums are
//! exact integers; bounds and ratios are `f64`.

use std::io::{self, Write};
use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::arith::{
    enumerate_squarefree_products, factorize, gcd, is_squarefree, jacobi_odd, mobius,
    primes_in_range, sieve_primes, Factorization, SquarefreeProduct,
};
use crate::curves::QuadraticCharacter;
use crate::{Error, Result};

/// Default cap on Jacobi evaluations per call.
pub const DEFAULT_WORK_BUDGET: u64 = 1_000_000_000;

// Below this size a prime gets a lookup table instead of the Jacobi kernel.
const TABLE_PRIME_LIMIT: u64 = 1 << 16;

fn squarefree_odd(m: u64, what: &str) -> Result<Factorization> {
    if m == 0 || m.is_multiple_of(2) {
        return Err(Error::domain(format!(
            "{what}: modulus must be odd and positive, got {m}"
        )));
    }
    let f = factorize(m)?;
    if !f.is_squarefree() {
        return Err(Error::domain(format!(
            "{what}: modulus {m} is not square-free"
        )));
    }
    Ok(f)
}

/// Symmetric long sum over `|t| <= T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LongSumQuery {
    pub a: i64,
    pub m: u64,
    pub t_bound: u64,
}

impl LongSumQuery {
    pub fn new(a: i64, m: u64, t_bound: u64) -> Result<Self> {
        squarefree_odd(m, "long sum")?;
        if t_bound == 0 {
            return Err(Error::domain("long sum needs T >= 1"));
        }
        if gcd(a.rem_euclid(m as i64) as u64, m) != 1 {
            return Err(Error::domain(format!(
                "long sum needs gcd(a, m) = 1, got a={a}, m={m}"
            )));
        }
        Ok(LongSumQuery { a, m, t_bound })
    }
}

// (t^2 - a / m) for t = 0..m-1
fn long_period(a: i64, m: u64) -> Vec<i8> {
    let shift = a.rem_euclid(m as i64) as u64;
    let mut sq = 0u64;
    (0..m)
        .map(|t| {
            let v = jacobi_odd((sq + m - shift) % m, m);
            sq = (sq + 2 * t + 1) % m;
            v
        })
        .collect()
}

// sum of f(t) over 1 <= t <= n for f of period len(period)
fn periodic_prefix(period: &[i8], n: u64) -> i128 {
    let m = period.len() as u64;
    let full: i128 = period.iter().map(|&v| v as i128).sum();
    let (q, r) = (n / m, n % m);
    let tail: i128 = (1..=r).map(|t| period[(t % m) as usize] as i128).sum();
    q as i128 * full + tail
}

/// `sum_{|t| <= T} (t^2 - a / m)`; equals `2T + 1` for `m = 1`.
pub fn long_sum(q: &LongSumQuery) -> i128 {
    let period = long_period(q.a, q.m);
    period[0] as i128 + 2 * periodic_prefix(&period, q.t_bound)
}

/// One-sided variant `sum_{1 <= t <= T}`, the range used by the sieve sum.
pub fn long_sum_positive(q: &LongSumQuery) -> i128 {
    periodic_prefix(&long_period(q.a, q.m), q.t_bound)
}

/// Long sum against `T/m + C^omega(m) sqrt(m) log m` with `C = 1`.
pub fn long_sum_report(q: &LongSumQuery) -> CharSumReport {
    let start = Instant::now();
    let lhs = long_sum(q);
    let m = q.m as f64;
    let bound = q.t_bound as f64 / m + m.sqrt() * m.ln();
    CharSumReport::new(
        format!(
            "long_sum a={} m={} T={} (|t| <= T, C=1)",
            q.a, q.m, q.t_bound
        ),
        lhs,
        Some(bound),
        start,
    )
}

/// `sum_{t mod m} (t^2 - a / m)`, which is `mu(m)` for coprime `a`.
pub fn complete_sum(a: i64, m: u64) -> Result<i128> {
    squarefree_odd(m, "complete sum")?;
    if gcd(a.rem_euclid(m as i64) as u64, m) != 1 {
        return Err(Error::domain(format!(
            "complete sum needs gcd(a, m) = 1, got a={a}, m={m}"
        )));
    }
    Ok(long_period(a, m).iter().map(|&v| v as i128).sum())
}

/// Incomplete sum `sum_{1 <= n <= N} ((n - u)(n - v) / m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ShortSumQuery {
    pub u: i64,
    pub v: i64,
    pub m: u64,
    pub n: u64,
    pub r: u32,
}

impl ShortSumQuery {
    /// Checks both hypotheses of the explicit bound: every prime factor of
    /// `m` is at most `N^(1/9)`, and `N^r > m^3`.
    pub fn new(u: i64, v: i64, m: u64, n: u64, r: u32) -> Result<Self> {
        if m < 3 {
            return Err(Error::domain(format!("short sum needs m >= 3, got {m}")));
        }
        let f = squarefree_odd(m, "short sum")?;
        if n == 0 || r == 0 {
            return Err(Error::domain("short sum needs N >= 1 and r >= 1"));
        }
        let big_n = BigUint::from(n);
        if let Some(l) = f.primes().find(|&l| BigUint::from(l).pow(9) > big_n) {
            return Err(Error::domain(format!(
                "hypothesis violated: prime factor {l} of m={m} exceeds N^(1/9) for N={n}"
            )));
        }
        if big_n.pow(r) <= BigUint::from(m).pow(3) {
            return Err(Error::domain(format!(
                "hypothesis violated: N^r > m^3 fails for N={n}, r={r}, m={m}"
            )));
        }
        Ok(ShortSumQuery { u, v, m, n, r })
    }

    /// `4N (gcd(u - v, m) m^-1 tau(m)^(r^2 + 2r))^(1/(r 2^r))`, in log space.
    pub fn bound(&self) -> f64 {
        let diff = (self.u as i128 - self.v as i128).unsigned_abs();
        let g = gcd((diff % self.m as u128) as u64, self.m) as f64;
        let tau = (1u64 << factorize(self.m).map(|f| f.omega()).unwrap_or(0)) as f64;
        let r = self.r as f64;
        let exponent = 1.0 / (r * 2f64.powi(self.r as i32));
        let log_base = g.ln() - (self.m as f64).ln() + (r * r + 2.0 * r) * tau.ln();
        4.0 * self.n as f64 * (exponent * log_base).exp()
    }
}

// ((n - u)(n - v) / m) for n = 0..m-1
fn short_period(u: i64, v: i64, m: u64) -> Vec<i8> {
    let (u, v) = (u.rem_euclid(m as i64) as u64, v.rem_euclid(m as i64) as u64);
    (0..m)
        .map(|n| {
            let x = (n + m - u) % m;
            let y = (n + m - v) % m;
            jacobi_odd(((x as u128 * y as u128) % m as u128) as u64, m)
        })
        .collect()
}

/// Signed value of the incomplete sum.
pub fn short_sum_value(u: i64, v: i64, m: u64, n: u64) -> i128 {
    periodic_prefix(&short_period(u, v, m), n)
}

pub fn short_sum(q: &ShortSumQuery) -> CharSumReport {
    let start = Instant::now();
    let lhs = short_sum_value(q.u, q.v, q.m, q.n).abs();
    CharSumReport::new(
        format!(
            "short_sum u={} v={} m={} N={} r={}",
            q.u, q.v, q.m, q.n, q.r
        ),
        lhs,
        Some(q.bound()),
        start,
    )
}

/// `r` in `1..=r_max` with `N^r > m^3`.
pub fn admissible_r(n: u64, m: u64, r_max: u32) -> Vec<u32> {
    let m3 = BigUint::from(m).pow(3);
    (1..=r_max)
        .filter(|&r| BigUint::from(n).pow(r) > m3)
        .collect()
}

/// `gcd((u - v)^2, m) == gcd(u - v, m)`; holds whenever `m` is square-free.
pub fn gcd_identity_check(u: i64, v: i64, m: u64) -> Result<bool> {
    if m == 0 || !is_squarefree(m) {
        return Err(Error::domain(format!(
            "gcd identity needs a square-free m >= 1, got {m}"
        )));
    }
    let d = (u as i128 - v as i128).unsigned_abs();
    let m128 = m as u128;
    let lhs = gcd128(d * d % m128, m128);
    let rhs = gcd128(d % m128, m128);
    Ok(lhs == rhs)
}

fn gcd128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Uniform result of evaluating a character sum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharSumReport {
    pub query: String,
    #[serde(serialize_with = "as_decimal")]
    pub lhs: i128,
    pub bound: Option<f64>,
    pub ratio: Option<f64>,
    pub wall_time_ms: f64,
}

impl CharSumReport {
    fn new(query: String, lhs: i128, bound: Option<f64>, start: Instant) -> Self {
        CharSumReport {
            query,
            lhs,
            ratio: bound.map(|b| lhs.unsigned_abs() as f64 / b),
            bound,
            wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        }
    }
}

fn as_decimal<S: Serializer>(v: &i128, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Asymptotic parameters `L`, `M`, `T` attached to a size `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TheoremParams {
    #[serde(rename = "Q")]
    pub q: u64,
    #[serde(rename = "L")]
    pub l: u64,
    #[serde(rename = "M")]
    pub m: u64,
    #[serde(rename = "T")]
    pub t: u64,
    pub overridden: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamOverrides {
    pub l: u64,
    pub m: u64,
    pub t: u64,
}

/// `L = floor(0.3 log Q logloglog Q)`, `M = floor(log Q / logloglog Q)`,
/// `T = floor(sqrt Q)`, or the overrides verbatim.
pub fn theorem_parameters(q: u64, overrides: Option<ParamOverrides>) -> Result<TheoremParams> {
    if let Some(o) = overrides {
        if q < 16 {
            return Err(Error::domain(format!("Q must be at least 16, got {q}")));
        }
        return Ok(TheoremParams {
            q,
            l: o.l,
            m: o.m,
            t: o.t,
            overridden: true,
        });
    }
    let log_q = (q as f64).ln();
    // Q > e^(e^e), i.e. logloglog Q > 1; below that M exceeds log Q
    if log_q.ln() <= std::f64::consts::E {
        return Err(Error::domain(format!(
            "Q = {q} is outside the asymptotic regime Q > e^(e^e) ~ 3.81e6; pass explicit L, M, T instead"
        )));
    }
    let lll = log_q.ln().ln();
    Ok(TheoremParams {
        q,
        l: (0.3 * log_q * lll).floor() as u64,
        m: (log_q / lll).floor() as u64,
        t: crate::arith::isqrt(q),
        overridden: false,
    })
}

impl TheoremParams {
    /// `floor(logloglog Q)`, or 0 when that is not positive.
    pub fn r(&self) -> u32 {
        let lll = (self.q as f64).ln().ln().ln();
        if lll > 0.0 {
            lll.floor() as u32
        } else {
            0
        }
    }

    /// Product of the primes `<= M`.
    pub fn small_prime_product(&self) -> Result<BigUint> {
        Ok(sieve_primes(self.m)?
            .into_iter()
            .fold(BigUint::one(), |acc, l| acc * l))
    }

    pub fn prime_window(&self) -> Result<Vec<u64>> {
        prime_window(self.q)
    }
}

/// Primes `p` with `Q/2 <= p <= Q`.
pub fn prime_window(q: u64) -> Result<Vec<u64>> {
    primes_in_range(q.div_ceil(2), q)
}

enum Character {
    Table(QuadraticCharacter),
    Kernel,
}

impl Character {
    fn new(l: u64) -> Self {
        if l <= TABLE_PRIME_LIMIT {
            Character::Table(QuadraticCharacter::new(l))
        } else {
            Character::Kernel
        }
    }

    // (t^2 - 4p / l)
    #[inline]
    fn eval(&self, l: u64, t: u64, p: u64) -> i8 {
        let x = ((t % l) * (t % l) % l + l - (4 * (p % l)) % l) % l;
        match self {
            Character::Table(chi) => chi.symbol(x),
            Character::Kernel => jacobi_odd(x, l),
        }
    }
}

fn check_interval(lo: u64, hi: u64, t_bound: u64) -> Result<Vec<u64>> {
    if lo < 3 {
        return Err(Error::domain(format!(
            "prime interval must start at M >= 3, got {lo}"
        )));
    }
    if lo > hi {
        return Err(Error::domain(format!(
            "prime interval needs M <= L, got M={lo}, L={hi}"
        )));
    }
    if t_bound == 0 {
        return Err(Error::domain("sieve sum needs T >= 1"));
    }
    primes_in_range(lo, hi)
}

fn check_work(work: u128, budget: u64, what: &str) -> Result<()> {
    if work > budget as u128 {
        return Err(Error::resource(
            format!("{what} needs {work} symbol evaluations"),
            budget,
        ));
    }
    Ok(())
}

/// `W` evaluated as the product `prod (1 + chi_l)` for each `(t, p)`.
///
/// Each product is either 0 or `2^j` with `j` the number of `l` where the
/// symbol is `+1`, so partial results are histograms over `j` and combine
/// by exact addition in any order.
pub fn w_product(t_bound: u64, lo: u64, hi: u64, primes: &[u64], budget: u64) -> Result<BigUint> {
    let ells = check_interval(lo, hi, t_bound)?;
    let work = t_bound as u128 * primes.len() as u128 * ells.len().max(1) as u128;
    check_work(work, budget, "W product")?;
    let chars: Vec<(u64, Character)> = ells.iter().map(|&l| (l, Character::new(l))).collect();
    let k = ells.len();
    let histogram = primes
        .par_iter()
        .map(|&p| {
            let mut counts = vec![0u64; k + 1];
            't: for t in 1..=t_bound {
                let mut j = 0;
                for (l, chi) in &chars {
                    match chi.eval(*l, t, p) {
                        1 => j += 1,
                        -1 => continue 't,
                        _ => {}
                    }
                }
                counts[j] += 1;
            }
            counts
        })
        .reduce(
            || vec![0u64; k + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(histogram
        .iter()
        .enumerate()
        .fold(BigUint::zero(), |acc, (j, &c)| {
            acc + (BigUint::from(c) << j)
        }))
}

/// `S(m) = sum_{1 <= t <= T} sum_p (t^2 - 4p / m)` with a composite Jacobi
/// symbol per term.
pub fn s_m(m: &SquarefreeProduct, t_bound: u64, primes: &[u64]) -> i128 {
    match m.to_u64() {
        Some(1) => t_bound as i128 * primes.len() as i128,
        Some(mv) => primes
            .par_iter()
            .map(|&p| {
                let m128 = mv as u128;
                let four_p = 4 * (p as u128 % m128) % m128;
                (1..=t_bound)
                    .map(|t| {
                        let tt = t as u128 % m128;
                        let x = (tt * tt % m128 + m128 - four_p) % m128;
                        jacobi_odd(x as u64, mv) as i128
                    })
                    .sum::<i128>()
            })
            .sum(),
        // beyond one word: multiply the prime-modulus symbols
        None => primes
            .par_iter()
            .map(|&p| {
                (1..=t_bound)
                    .map(|t| {
                        m.factors
                            .iter()
                            .map(|&l| {
                                let x = ((t % l) * (t % l) % l + l - 4 * (p % l) % l) % l;
                                jacobi_odd(x, l) as i128
                            })
                            .product::<i128>()
                    })
                    .sum::<i128>()
            })
            .sum(),
    }
}

/// `S(m)` for a plain odd square-free modulus.
pub fn s_m_value(m: u64, t_bound: u64, primes: &[u64]) -> Result<i128> {
    let f = squarefree_odd(m, "S(m)")?;
    let member = SquarefreeProduct {
        factors: f.primes().collect(),
        value: BigUint::from(m),
    };
    Ok(s_m(&member, t_bound, primes))
}

/// One `(m, S(m))` row of the expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmTerm {
    pub m: BigUint,
    pub mobius: i8,
    pub s: i128,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WExpansion {
    pub w: BigInt,
    /// Ascending by `m`; the first row is the main term `S(1)`.
    pub terms: Vec<SmTerm>,
}

impl WExpansion {
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "m,S_m")?;
        for term in &self.terms {
            writeln!(out, "{},{}", term.m, term.s)?;
        }
        Ok(())
    }

    /// `sum mu(m) S(m)`, the signed variant of the expansion.
    pub fn mobius_weighted(&self) -> BigInt {
        self.terms
            .iter()
            .map(|t| BigInt::from(t.mobius as i128 * t.s))
            .sum()
    }
}

/// `W` as `sum_{m} S(m)` over all square-free products of primes in
/// `[lo, hi]`. Expanding `prod (1 + chi_l)` gives every `m` coefficient +1.
pub fn w_expanded(
    t_bound: u64,
    lo: u64,
    hi: u64,
    primes: &[u64],
    budget: u64,
) -> Result<WExpansion> {
    check_interval(lo, hi, t_bound)?;
    let set = enumerate_squarefree_products(lo, hi, None)?;
    let work = set.len() as u128 * t_bound as u128 * primes.len() as u128;
    check_work(work, budget, "W expansion")?;
    let terms: Vec<SmTerm> = set
        .members
        .iter()
        .map(|m| SmTerm {
            m: m.value.clone(),
            mobius: m.mobius(),
            s: s_m(m, t_bound, primes),
        })
        .collect();
    let w = terms.iter().map(|t| BigInt::from(t.s)).sum();
    Ok(WExpansion { w, terms })
}

/// Both evaluation orders of `W` side by side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WComparison {
    pub product: BigUint,
    pub expansion: WExpansion,
}

impl WComparison {
    pub fn agree(&self) -> bool {
        BigInt::from(self.product.clone()) == self.expansion.w
    }
}

pub fn compare_w(
    t_bound: u64,
    lo: u64,
    hi: u64,
    primes: &[u64],
    budget: u64,
) -> Result<WComparison> {
    Ok(WComparison {
        product: w_product(t_bound, lo, hi, primes, budget)?,
        expansion: w_expanded(t_bound, lo, hi, primes, budget)?,
    })
}

/// Result of a randomized or exhaustive identity sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub checks: u64,
    pub failures: Vec<String>,
    pub max_ratio: Option<f64>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// `complete_sum(a, m) == mu(m)` for every odd square-free `m <= m_max`
/// and `per_m` random `a` coprime to `m`.
pub fn complete_sum_sweep(m_max: u64, per_m: usize, seed: u64) -> SweepReport {
    let moduli: Vec<u64> = (1..=m_max)
        .step_by(2)
        .filter(|&m| is_squarefree(m))
        .collect();
    let failures: Vec<Vec<String>> = moduli
        .par_iter()
        .map(|&m| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ m.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let mu = mobius(m).unwrap_or(0) as i128;
            let mut bad = Vec::new();
            let mut drawn = 0;
            while drawn < per_m {
                let a: i64 = rng.gen_range(-1_000_000..1_000_000);
                if gcd(a.rem_euclid(m as i64) as u64, m) != 1 {
                    continue;
                }
                drawn += 1;
                match complete_sum(a, m) {
                    Ok(s) if s == mu => {}
                    Ok(s) => bad.push(format!("complete_sum({a}, {m}) = {s}, mu = {mu}")),
                    Err(e) => bad.push(format!("complete_sum({a}, {m}): {e}")),
                }
            }
            bad
        })
        .collect();
    SweepReport {
        checks: (moduli.len() * per_m) as u64,
        failures: failures.into_iter().flatten().collect(),
        max_ratio: None,
    }
}

/// Exhaustive `gcd((u-v)^2, m) = gcd(u-v, m)` over `u, v in [0, uv_max]`
/// and square-free `m <= m_max`.
pub fn gcd_identity_sweep(uv_max: i64, m_max: u64) -> SweepReport {
    let mut checks = 0;
    let mut failures = Vec::new();
    for m in (1..=m_max).filter(|&m| is_squarefree(m)) {
        for u in 0..=uv_max {
            for v in 0..=uv_max {
                checks += 1;
                if !matches!(gcd_identity_check(u, v, m), Ok(true)) {
                    failures.push(format!("u={u} v={v} m={m}"));
                }
            }
        }
    }
    SweepReport {
        checks,
        failures,
        max_ratio: None,
    }
}

/// Draws an admissible incomplete-sum query with `m <= m_max`.
///
/// `N` is spread log-uniformly over `[3^9, 10^15]`; `m` is a product of
/// distinct odd primes up to `N^(1/9)`. Half of the draws force
/// `v = u + k d` for a divisor `d` of `m` so the gcd factor is exercised.
pub fn random_short_query<R: Rng + ?Sized>(rng: &mut R, m_max: u64, r_max: u32) -> ShortSumQuery {
    let lo = (3f64.powi(9)).ln();
    let hi = 1e15f64.ln();
    loop {
        let n = rng.gen_range(lo..hi).exp() as u64;
        let cap = (n as f64).powf(1.0 / 9.0).floor() as u64 + 1;
        let pool: Vec<u64> = primes_in_range(3, cap)
            .unwrap_or_default()
            .into_iter()
            .filter(|&l| BigUint::from(l).pow(9) <= BigUint::from(n))
            .collect();
        if pool.is_empty() {
            continue;
        }
        let mut m = 1u64;
        for &l in &pool {
            if rng.gen_bool(0.5) && m * l <= m_max {
                m *= l;
            }
        }
        if m < 3 {
            continue;
        }
        let u: i64 = rng.gen_range(-1_000_000..=1_000_000);
        let v = if rng.gen_bool(0.5) {
            let divisors: Vec<u64> = (1..=m).filter(|d| m.is_multiple_of(*d)).collect();
            let d = divisors[rng.gen_range(0..divisors.len())] as i64;
            u + d * rng.gen_range(-50..=50)
        } else {
            rng.gen_range(-1_000_000..=1_000_000)
        };
        let Some(&r) = admissible_r(n, m, r_max).first() else {
            continue;
        };
        if let Ok(q) = ShortSumQuery::new(u, v, m, n, r) {
            return q;
        }
    }
}

/// Checks the explicit incomplete-sum bound on `count` random admissible
/// queries, for every admissible `r <= r_max`.
pub fn short_sum_sweep(count: usize, m_max: u64, r_max: u32, seed: u64) -> SweepReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = 0;
    let mut failures = Vec::new();
    let mut max_ratio = 0f64;
    for _ in 0..count {
        let base = random_short_query(&mut rng, m_max, r_max);
        let lhs = short_sum_value(base.u, base.v, base.m, base.n).unsigned_abs() as f64;
        for r in admissible_r(base.n, base.m, r_max) {
            let q = ShortSumQuery { r, ..base };
            let bound = q.bound();
            checks += 1;
            max_ratio = max_ratio.max(lhs / bound);
            if lhs > bound {
                failures.push(format!("{q:?}: |sum| = {lhs} > bound {bound}"));
            }
        }
    }
    SweepReport {
        checks,
        failures,
        max_ratio: Some(max_ratio),
    }
}

/// Largest ratio `|long_sum| / (T/m + sqrt(m) log m)` over odd square-free
/// `3 <= m <= m_max`, a few coprime `a` and `T` in `t_values`.
pub fn long_sum_sweep(m_max: u64, t_values: &[u64], seed: u64) -> SweepReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = 0;
    let mut max_ratio = 0f64;
    let mut failures = Vec::new();
    for m in (3..=m_max).step_by(2).filter(|&m| is_squarefree(m)) {
        for _ in 0..3 {
            let a = loop {
                let a: i64 = rng.gen_range(-1_000_000..1_000_000);
                if gcd(a.rem_euclid(m as i64) as u64, m) == 1 {
                    break a;
                }
            };
            for &t in t_values {
                match LongSumQuery::new(a, m, t) {
                    Ok(q) => {
                        checks += 1;
                        if let Some(r) = long_sum_report(&q).ratio {
                            max_ratio = max_ratio.max(r);
                        }
                    }
                    Err(e) => failures.push(e.to_string()),
                }
            }
        }
    }
    SweepReport {
        checks,
        failures,
        max_ratio: Some(max_ratio),
    }
}
