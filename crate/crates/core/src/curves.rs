//! Short Weierstrass curves `y^2 = x^3 + ax + b` over `F_p`, `p >= 5`:
//! exact point counts, traces of Frobenius and which traces occur.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{is_prime, isqrt};
use crate::{Error, Result};

/// Largest characteristic accepted by [`count_points`].
pub const DEFAULT_COUNT_LIMIT: u64 = 1 << 26;

/// Largest characteristic accepted by [`trace_spectrum`], which is `O(p^3)`.
pub const DEFAULT_SPECTRUM_LIMIT: u64 = 3000;

/// Curve `y^2 = x^3 + ax + b` over the prime field `F_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CurveParams {
    p: u64,
    a: u64,
    b: u64,
}

impl CurveParams {
    pub fn new(p: u64, a: u64, b: u64) -> Result<Self> {
        if p < 5 || !is_prime(p) {
            return Err(Error::domain(format!(
                "curve field needs a prime p >= 5, got {p}"
            )));
        }
        if a >= p || b >= p {
            return Err(Error::domain(format!(
                "coefficients must be reduced mod {p}, got a={a}, b={b}"
            )));
        }
        if discriminant(p, a, b) == 0 {
            return Err(Error::domain(format!(
                "singular curve: 4a^3 + 27b^2 = 0 mod {p} for a={a}, b={b}"
            )));
        }
        Ok(CurveParams { p, a, b })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn b(&self) -> u64 {
        self.b
    }
}

// 4a^3 + 27b^2 mod p; the factor -16 is a unit for p >= 5.
fn discriminant(p: u64, a: u64, b: u64) -> u64 {
    let (p, a, b) = (p as u128, a as u128, b as u128);
    let a3 = a * a % p * a % p;
    let b2 = b * b % p;
    ((4 * a3 + 27 * b2) % p) as u64
}

/// A prime `p` together with a trace `t` in the Hasse range `t^2 <= 4p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TracePair {
    p: u64,
    t: i64,
}

impl TracePair {
    pub fn new(p: u64, t: i64) -> Result<Self> {
        if p < 3 || !is_prime(p) {
            return Err(Error::domain(format!(
                "trace pair needs an odd prime p, got {p}"
            )));
        }
        if p > 1 << 62 {
            return Err(Error::domain(format!("p = {p} exceeds 2^62")));
        }
        if (t as i128) * (t as i128) > 4 * p as i128 {
            return Err(Error::domain(format!(
                "trace {t} violates the Hasse bound t^2 <= 4p for p = {p}"
            )));
        }
        Ok(TracePair { p, t })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn t(&self) -> i64 {
        self.t
    }

    /// Frobenius discriminant `t^2 - 4p`, never positive.
    pub fn discriminant(&self) -> i128 {
        (self.t as i128) * (self.t as i128) - 4 * self.p as i128
    }

    /// Point count of any curve with this trace.
    pub fn order(&self) -> u64 {
        (self.p as i128 + 1 - self.t as i128) as u64
    }
}

/// Largest `|t|` allowed by `t^2 <= 4p`.
pub fn hasse_radius(p: u64) -> i64 {
    isqrt(4 * p) as i64
}

/// Quadratic character of `F_p` as a lookup table built from the squares.
#[derive(Debug, Clone)]
pub struct QuadraticCharacter {
    p: u64,
    table: Vec<i8>,
}

impl QuadraticCharacter {
    pub fn new(p: u64) -> Self {
        let mut table = vec![-1i8; p as usize];
        table[0] = 0;
        for x in 1..=(p - 1) / 2 {
            table[(x * x % p) as usize] = 1;
        }
        QuadraticCharacter { p, table }
    }

    #[inline]
    pub fn symbol(&self, x: u64) -> i8 {
        self.table[(x % self.p) as usize]
    }

    /// `sum over x of chi(x^3 + ax + b)`; the curve has `p + 1 + sum` points.
    fn cubic_sum(&self, a: u64, b: u64) -> i64 {
        let p = self.p;
        let mut sum = 0i64;
        for x in 0..p {
            let x2 = x * x % p;
            let rhs = ((x2 + a) % p * x + b) % p;
            sum += self.table[rhs as usize] as i64;
        }
        sum
    }
}

/// `#E(F_p)` including the point at infinity, with the default size limit.
pub fn count_points(curve: &CurveParams) -> Result<u64> {
    count_points_with_limit(curve, DEFAULT_COUNT_LIMIT)
}

pub fn count_points_with_limit(curve: &CurveParams, limit: u64) -> Result<u64> {
    if curve.p > limit {
        return Err(Error::resource(
            format!(
                "point counting over F_{} is above the counting limit",
                curve.p
            ),
            limit,
        ));
    }
    let chi = QuadraticCharacter::new(curve.p);
    Ok(count_with(&chi, curve))
}

/// Counts points reusing a character table for `curve.p()`.
pub fn count_with(chi: &QuadraticCharacter, curve: &CurveParams) -> u64 {
    debug_assert_eq!(chi.p, curve.p);
    (curve.p as i64 + 1 + chi.cubic_sum(curve.a, curve.b)) as u64
}

pub fn trace(curve: &CurveParams) -> Result<TracePair> {
    let n = count_points(curve)?;
    TracePair::new(curve.p, curve.p as i64 + 1 - n as i64)
}

/// One witness curve per attained trace over a fixed `F_p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceSpectrum {
    pub p: u64,
    pub witnesses: BTreeMap<i64, CurveParams>,
}

impl TraceSpectrum {
    /// Traces in `[-2 sqrt p, 2 sqrt p]` with no witness.
    pub fn missing(&self) -> Vec<i64> {
        let r = hasse_radius(self.p);
        (-r..=r)
            .filter(|t| !self.witnesses.contains_key(t))
            .collect()
    }
}

pub fn trace_spectrum(p: u64) -> Result<TraceSpectrum> {
    trace_spectrum_with_limit(p, DEFAULT_SPECTRUM_LIMIT)
}

/// Enumerates nonsingular `(a, b)` in lexicographic order and keeps the
/// first curve reaching each trace.
///
/// Rows of `a` are processed in parallel blocks and merged in `a` order, so
/// the witness map does not depend on the schedule. Enumeration stops once
/// every trace in the Hasse range has a witness; later curves could not
/// displace a lexicographically earlier one.
pub fn trace_spectrum_with_limit(p: u64, limit: u64) -> Result<TraceSpectrum> {
    if p < 5 || !is_prime(p) {
        return Err(Error::domain(format!(
            "trace spectrum needs a prime p >= 5, got {p}"
        )));
    }
    if p > limit {
        return Err(Error::resource(
            format!("trace spectrum of F_{p} is above the spectrum limit"),
            limit,
        ));
    }
    let chi = QuadraticCharacter::new(p);
    let full = 2 * hasse_radius(p) as usize + 1;
    let block = rayon::current_num_threads().max(1) as u64 * 4;
    let mut witnesses = BTreeMap::new();
    let mut a0 = 0;
    while a0 < p && witnesses.len() < full {
        let rows: Vec<Vec<(i64, u64)>> = (a0..(a0 + block).min(p))
            .into_par_iter()
            .map(|a| spectrum_row(&chi, a))
            .collect();
        for (a, row) in (a0..).zip(rows) {
            for (t, b) in row {
                witnesses.entry(t).or_insert(CurveParams { p, a, b });
            }
        }
        a0 += block;
    }
    Ok(TraceSpectrum { p, witnesses })
}

// First b (ascending) for each trace among nonsingular curves with this a.
fn spectrum_row(chi: &QuadraticCharacter, a: u64) -> Vec<(i64, u64)> {
    let p = chi.p;
    let cubic: Vec<u64> = (0..p).map(|x| (x * x % p + a) % p * x % p).collect();
    let mut seen = BTreeMap::new();
    for b in 0..p {
        if discriminant(p, a, b) == 0 {
            continue;
        }
        let mut sum = 0i64;
        for &c in &cubic {
            let v = c + b;
            let v = if v >= p { v - p } else { v };
            sum += chi.table[v as usize] as i64;
        }
        // t = p + 1 - #E = -sum
        seen.entry(-sum).or_insert(b);
    }
    seen.into_iter().collect()
}

/// First curve, in `(a, b)` lexicographic order, with the requested trace.
/// `budget` caps the number of nonsingular curves counted.
pub fn curve_with_trace(pair: &TracePair, budget: u64) -> Result<CurveParams> {
    let p = pair.p;
    if p < 5 {
        return Err(Error::domain("curve search needs p >= 5"));
    }
    if p > DEFAULT_COUNT_LIMIT {
        return Err(Error::resource(
            format!("point counting over F_{p} is above the counting limit"),
            DEFAULT_COUNT_LIMIT,
        ));
    }
    let chi = QuadraticCharacter::new(p);
    let target = -pair.t;
    let mut attempts = 0u64;
    for a in 0..p {
        for b in 0..p {
            if discriminant(p, a, b) == 0 {
                continue;
            }
            if attempts == budget {
                return Err(Error::NotFound(format!(
                    "no curve with trace {} over F_{p} within {budget} attempts",
                    pair.t
                )));
            }
            attempts += 1;
            if chi.cubic_sum(a, b) == target {
                return Ok(CurveParams { p, a, b });
            }
        }
    }
    Err(Error::NotFound(format!(
        "no curve with trace {} over F_{p}",
        pair.t
    )))
}

/// Outcome of checking that every Hasse-range trace occurs over `F_p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeuringReport {
    pub p: u64,
    pub traces_expected: usize,
    pub traces_found: usize,
    pub missing: Vec<i64>,
    pub holds: bool,
}

pub fn verify_deuring(p: u64) -> Result<DeuringReport> {
    let spectrum = trace_spectrum(p)?;
    let missing = spectrum.missing();
    Ok(DeuringReport {
        p,
        traces_expected: 2 * hasse_radius(p) as usize + 1,
        traces_found: spectrum.witnesses.len(),
        holds: missing.is_empty(),
        missing,
    })
}

/// A uniformly random nonsingular curve over `F_p`.
pub fn random_curve<R: Rng + ?Sized>(p: u64, rng: &mut R) -> Result<CurveParams> {
    if p < 5 || !is_prime(p) {
        return Err(Error::domain(format!(
            "curve field needs a prime p >= 5, got {p}"
        )));
    }
    loop {
        let (a, b) = (rng.gen_range(0..p), rng.gen_range(0..p));
        if discriminant(p, a, b) != 0 {
            return Ok(CurveParams { p, a, b });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::sieve_primes;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Counts affine solutions of y^2 = x^3 + ax + b by brute force.
    fn naive_count(p: u64, a: u64, b: u64) -> u64 {
        let mut n = 1;
        for x in 0..p {
            let rhs = (x * x % p * x + a * x + b) % p;
            for y in 0..p {
                if y * y % p == rhs {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn count_examples() {
        let c = CurveParams::new(5, 0, 1).unwrap();
        assert_eq!(naive_count(5, 0, 1), 6);
        assert_eq!(count_points(&c).unwrap(), 6);
        assert_eq!(trace(&c).unwrap().t(), 0);

        let c = CurveParams::new(5, 1, 0).unwrap();
        assert_eq!(naive_count(5, 1, 0), 4);
        assert_eq!(count_points(&c).unwrap(), 4);
        assert_eq!(trace(&c).unwrap().t(), 2);

        let c = CurveParams::new(7, 1, 1).unwrap();
        let t = 8 - count_points(&c).unwrap() as i64;
        assert!(t.abs() <= 5);
    }

    #[test]
    fn curve_validation() {
        assert!(CurveParams::new(3, 1, 1).is_err());
        assert!(CurveParams::new(9, 1, 1).is_err());
        assert!(CurveParams::new(5, 0, 0).is_err());
        assert!(CurveParams::new(5, 5, 1).is_err());
        assert!(count_points_with_limit(&CurveParams::new(101, 1, 1).unwrap(), 100).is_err());
    }

    #[test]
    fn trace_pair_validation() {
        assert!(TracePair::new(5, 4).is_ok());
        assert!(TracePair::new(5, -4).is_ok());
        assert!(TracePair::new(5, 5).is_err());
        assert!(TracePair::new(4, 0).is_err());
        assert_eq!(TracePair::new(5, 0).unwrap().discriminant(), -20);
    }

    #[test]
    fn character_sum_agrees_with_naive_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for p in sieve_primes(200).unwrap().into_iter().filter(|&p| p >= 5) {
            for _ in 0..20 {
                let c = random_curve(p, &mut rng).unwrap();
                let n = count_points(&c).unwrap();
                assert_eq!(n, naive_count(p, c.a(), c.b()), "{c:?}");
                let t = p as i64 + 1 - n as i64;
                assert!(t * t <= 4 * p as i64, "Hasse fails for {c:?}");
            }
        }
    }

    #[test]
    fn quadratic_twist_negates_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for p in sieve_primes(200).unwrap().into_iter().filter(|&p| p >= 5) {
            let chi = QuadraticCharacter::new(p);
            let d = (2..p).find(|&d| chi.symbol(d) == -1).unwrap();
            for _ in 0..5 {
                let c = random_curve(p, &mut rng).unwrap();
                let twisted =
                    CurveParams::new(p, c.a() * d % p * d % p, c.b() * d % p * d % p * d % p)
                        .unwrap();
                assert_eq!(trace(&twisted).unwrap().t(), -trace(&c).unwrap().t());
            }
        }
    }

    #[test]
    fn spectra_of_small_fields() {
        let s5 = trace_spectrum(5).unwrap();
        assert_eq!(
            s5.witnesses.keys().copied().collect::<Vec<_>>(),
            (-4..=4).collect::<Vec<_>>()
        );
        let s7 = trace_spectrum(7).unwrap();
        assert_eq!(
            s7.witnesses.keys().copied().collect::<Vec<_>>(),
            (-5..=5).collect::<Vec<_>>()
        );
        for s in [&s5, &s7] {
            for (&t, c) in &s.witnesses {
                assert_eq!(trace(c).unwrap().t(), t);
            }
        }
        assert_eq!(trace_spectrum(7).unwrap(), s7);
        assert!(trace_spectrum(4).is_err());
        assert!(trace_spectrum_with_limit(101, 100).is_err());
    }

    #[test]
    fn spectrum_witnesses_are_lexicographically_first() {
        for p in [11u64, 13, 17] {
            let s = trace_spectrum(p).unwrap();
            for (&t, c) in &s.witnesses {
                let pair = TracePair::new(p, t).unwrap();
                assert_eq!(curve_with_trace(&pair, u64::MAX).unwrap(), *c);
            }
        }
    }

    #[test]
    fn curves_with_given_trace() {
        let c = curve_with_trace(&TracePair::new(5, 0).unwrap(), 100).unwrap();
        assert_eq!((c.a(), c.b()), (0, 1));
        let c = curve_with_trace(&TracePair::new(11, -4).unwrap(), u64::MAX).unwrap();
        assert_eq!(count_points(&c).unwrap(), 16);
        let err = curve_with_trace(&TracePair::new(11, -4).unwrap(), 1);
        assert!(matches!(err, Err(Error::NotFound(_))));
    }

    #[test]
    fn deuring_small() {
        assert!(verify_deuring(5).unwrap().holds);
        let r = verify_deuring(7).unwrap();
        assert!(r.holds);
        assert_eq!(r.traces_expected, 11);
    }
}
