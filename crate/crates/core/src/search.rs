//! Scans for trace pairs `(p, t)` whose small Elkies primes are scarce.
//!
//! The classification of `l` depends only on `t^2 - 4p`, and every `t` with
//! `t^2 <= 4p` is the trace of some curve over `F_p`, so the scanner works on
//! trace pairs directly. A witness curve can be attached afterwards with
//! [`crate::curves::curve_with_trace`].

use std::cmp::Ordering;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use num_bigint::BigUint;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{is_prime, jacobi_odd, primes_in_range, sieve_primes};
use crate::curves::{hasse_radius, TracePair};
use crate::elkies::{profile_from_primes, Convention, LpBound};
use crate::{with_workers, Error, Result};

/// Default cap on symbol evaluations for one scan.
pub const DEFAULT_SCAN_BUDGET: u64 = 2_000_000_000;

/// `(t^2 - 4p / l) != 1` for every prime `l` in `[lo, hi]`.
pub fn check_cond1(pair: &TracePair, lo: u64, hi: u64) -> Result<bool> {
    if lo < 3 || lo > hi {
        return Err(Error::domain(format!(
            "condition interval needs 3 <= M <= L, got M={lo}, L={hi}"
        )));
    }
    let d = pair.discriminant();
    Ok(primes_in_range(lo, hi)?
        .into_iter()
        .all(|l| jacobi_odd(d.rem_euclid(l as i128) as u64, l) != 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    /// Every `t` with `t^2 <= 4p`.
    AllTraces,
    /// `k` distinct traces per prime drawn from the seeded generator.
    HasseSample(usize),
}

impl FromStr for SearchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "all-traces" {
            return Ok(SearchMode::AllTraces);
        }
        s.strip_prefix("hasse-sample:")
            .and_then(|k| k.parse().ok())
            .filter(|&k| k >= 1)
            .map(SearchMode::HasseSample)
            .ok_or_else(|| {
                Error::domain(format!(
                    "unknown mode {s:?}; use all-traces or hasse-sample:<k>"
                ))
            })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchConfig {
    pub prime_lo: u64,
    pub prime_hi: u64,
    pub lcap: u64,
    pub mode: SearchMode,
    /// Records with `L_p / log p` below this are dropped.
    pub threshold: f64,
    /// Thread count; 0 uses the global pool.
    pub workers: usize,
    pub seed: u64,
    /// Cap on symbol evaluations; primes past it are not scanned.
    pub budget: u64,
    /// Optional `[M, L]` on which the no-Elkies condition is tested.
    pub cond_interval: Option<(u64, u64)>,
    pub convention: Convention,
}

impl SearchConfig {
    pub fn new(prime_lo: u64, prime_hi: u64, lcap: u64) -> Self {
        SearchConfig {
            prime_lo,
            prime_hi,
            lcap,
            mode: SearchMode::AllTraces,
            threshold: 0.0,
            workers: 0,
            seed: 0,
            budget: DEFAULT_SCAN_BUDGET,
            cond_interval: None,
            convention: Convention::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.prime_lo < 5 {
            return Err(Error::domain(format!(
                "scan needs prime_lo >= 5, got {}",
                self.prime_lo
            )));
        }
        if self.prime_hi < self.prime_lo {
            return Err(Error::domain(format!(
                "empty prime range [{}, {}]",
                self.prime_lo, self.prime_hi
            )));
        }
        if self.prime_hi > 1 << 62 {
            return Err(Error::domain("scan range must stay below 2^62"));
        }
        if self.lcap < 3 {
            return Err(Error::domain(format!(
                "L cap must be >= 3, got {}",
                self.lcap
            )));
        }
        if let SearchMode::HasseSample(0) = self.mode {
            return Err(Error::domain("sample size must be >= 1"));
        }
        if let Some((lo, hi)) = self.cond_interval {
            if lo < 3 || lo > hi {
                return Err(Error::domain(format!(
                    "condition interval needs 3 <= M <= L, got M={lo}, L={hi}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchRecord {
    pub pair: TracePair,
    pub lp: LpBound,
    /// Product of all Elkies primes up to the cap.
    pub elkies_product_at_cap: BigUint,
    /// `L_p / log p`; a saturated record uses the cap as a lower bound.
    pub ratio_logp: f64,
    /// `L_p / (log p logloglog p)` when `logloglog p > 0`.
    pub ratio_logloglog: Option<f64>,
    /// The interval, when the no-Elkies condition held on it.
    pub cond1_interval: Option<(u64, u64)>,
}

pub const CSV_HEADER: &str = "p,t,L_p,saturated,elkies_product,ratio_logp,ratio_logloglog";

impl SearchRecord {
    fn new(
        pair: TracePair,
        lp: LpBound,
        product: BigUint,
        cond1_interval: Option<(u64, u64)>,
    ) -> Self {
        let log_p = (pair.p() as f64).ln();
        let lll = log_p.ln().ln();
        let lp_value = lp.value() as f64;
        SearchRecord {
            pair,
            lp,
            elkies_product_at_cap: product,
            ratio_logp: lp_value / log_p,
            ratio_logloglog: (lll > 0.0).then(|| lp_value / (log_p * lll)),
            cond1_interval,
        }
    }

    /// One CSV line without the newline. The trailing `cond1` column is
    /// written only when `with_cond` is set.
    pub fn to_csv(&self, with_cond: bool) -> String {
        let mut line = format!(
            "{},{},{},{},{},{},{}",
            self.pair.p(),
            self.pair.t(),
            self.lp.value(),
            self.lp.is_saturated(),
            self.elkies_product_at_cap,
            self.ratio_logp,
            self.ratio_logloglog
                .map(|r| r.to_string())
                .unwrap_or_default()
        );
        if with_cond {
            line.push(',');
            if let Some((lo, hi)) = self.cond1_interval {
                line.push_str(&format!("{lo}:{hi}"));
            }
        }
        line
    }

    pub fn from_csv(line: &str) -> Result<Self> {
        let bad = |what: &str| Error::domain(format!("malformed record {line:?}: {what}"));
        let cols: Vec<&str> = line.trim_end().split(',').collect();
        if cols.len() != 7 && cols.len() != 8 {
            return Err(bad("expected 7 or 8 columns"));
        }
        let p: u64 = cols[0].parse().map_err(|_| bad("p"))?;
        let t: i64 = cols[1].parse().map_err(|_| bad("t"))?;
        let lp_value: u64 = cols[2].parse().map_err(|_| bad("L_p"))?;
        let saturated: bool = cols[3].parse().map_err(|_| bad("saturated"))?;
        let product: BigUint = cols[4].parse().map_err(|_| bad("elkies_product"))?;
        let ratio_logp: f64 = cols[5].parse().map_err(|_| bad("ratio_logp"))?;
        let ratio_logloglog = match cols[6] {
            "" => None,
            s => Some(s.parse().map_err(|_| bad("ratio_logloglog"))?),
        };
        let cond1_interval = match cols.get(7) {
            None | Some(&"") => None,
            Some(s) => {
                let (lo, hi) = s.split_once(':').ok_or_else(|| bad("cond1"))?;
                Some((
                    lo.parse().map_err(|_| bad("cond1"))?,
                    hi.parse().map_err(|_| bad("cond1"))?,
                ))
            }
        };
        Ok(SearchRecord {
            pair: TracePair::new(p, t)?,
            lp: if saturated {
                LpBound::Saturated { limit: lp_value }
            } else {
                LpBound::Prime(lp_value)
            },
            elkies_product_at_cap: product,
            ratio_logp,
            ratio_logloglog,
            cond1_interval,
        })
    }
}

pub fn write_records<W: Write>(
    records: &[SearchRecord],
    with_cond: bool,
    mut out: W,
) -> io::Result<()> {
    if with_cond {
        writeln!(out, "{CSV_HEADER},cond1")?;
    } else {
        writeln!(out, "{CSV_HEADER}")?;
    }
    for r in records {
        writeln!(out, "{}", r.to_csv(with_cond))?;
    }
    Ok(())
}

pub fn read_records<R: BufRead>(input: R) -> Result<Vec<SearchRecord>> {
    let mut lines = input.lines();
    match lines.next() {
        Some(Ok(h)) if h.starts_with(CSV_HEADER) => {}
        _ => return Err(Error::domain("missing record CSV header")),
    }
    lines
        .map(|l| {
            l.map_err(|e| Error::domain(e.to_string()))
                .and_then(|l| SearchRecord::from_csv(&l))
        })
        .collect()
}

/// Records are ordered by descending ratio, then ascending `(p, t)`.
fn record_order(a: &SearchRecord, b: &SearchRecord) -> Ordering {
    b.ratio_logp
        .total_cmp(&a.ratio_logp)
        .then_with(|| a.pair.cmp(&b.pair))
}

#[derive(Debug, Clone)]
pub struct ScanOutcome {
    pub records: Vec<SearchRecord>,
    pub primes_scanned: usize,
    pub primes_in_range: usize,
    /// Set when the budget stopped the scan before the end of the range.
    pub truncated: bool,
    pub work: u64,
}

fn traces_for(p: u64, mode: SearchMode, seed: u64) -> Vec<i64> {
    let r = hasse_radius(p);
    match mode {
        SearchMode::AllTraces => (-r..=r).collect(),
        SearchMode::HasseSample(k) => {
            let width = (2 * r + 1) as usize;
            // one stream per prime keeps sampling independent of scheduling
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ p.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let mut ts: Vec<i64> = sample(&mut rng, width, k.min(width))
                .into_iter()
                .map(|i| i as i64 - r)
                .collect();
            ts.sort_unstable();
            ts
        }
    }
}

fn trace_count(p: u64, mode: SearchMode) -> u64 {
    let width = 2 * hasse_radius(p) as u64 + 1;
    match mode {
        SearchMode::AllTraces => width,
        SearchMode::HasseSample(k) => width.min(k as u64),
    }
}

pub fn scan_primes(config: &SearchConfig) -> Result<ScanOutcome> {
    config.validate()?;
    let primes = primes_in_range(config.prime_lo, config.prime_hi)?;
    let ells = sieve_primes(config.lcap)?;
    let cond_primes = match config.cond_interval {
        Some((lo, hi)) => primes_in_range(lo, hi)?,
        None => Vec::new(),
    };
    let per_trace = ells.len().saturating_sub(1).max(1) as u64;

    let mut work = 0u64;
    let mut take = 0;
    for &p in &primes {
        let cost = trace_count(p, config.mode) * per_trace;
        if work + cost > config.budget {
            break;
        }
        work += cost;
        take += 1;
    }
    let scanned = &primes[..take];

    let (ells, cond_primes) = (&ells, &cond_primes);
    let mut records: Vec<SearchRecord> = with_workers(config.workers, || {
        scanned
            .par_iter()
            .flat_map_iter(|&p| {
                traces_for(p, config.mode, config.seed)
                    .into_iter()
                    .map(move |t| {
                        evaluate(
                            TracePair::new(p, t).expect("trace in Hasse range"),
                            ells,
                            cond_primes,
                            config,
                        )
                    })
            })
            .filter(|r| r.ratio_logp >= config.threshold)
            .collect()
    });
    records.sort_by(record_order);
    Ok(ScanOutcome {
        records,
        primes_scanned: take,
        primes_in_range: primes.len(),
        truncated: take < primes.len(),
        work,
    })
}

fn evaluate(
    pair: TracePair,
    ells: &[u64],
    cond_primes: &[u64],
    config: &SearchConfig,
) -> SearchRecord {
    let profile = profile_from_primes(&pair, config.lcap, ells, config.convention);
    let d = pair.discriminant();
    let cond = config.cond_interval.filter(|_| {
        cond_primes
            .iter()
            .all(|&l| jacobi_odd(d.rem_euclid(l as i128) as u64, l) != 1)
    });
    SearchRecord::new(pair, profile.lp, profile.elkies_product, cond)
}

// Larger is worse: saturated beats any prime, then smaller product,
// smaller |t|, positive t.
fn badness(a: &SearchRecord, b: &SearchRecord) -> Ordering {
    a.lp.is_saturated()
        .cmp(&b.lp.is_saturated())
        .then_with(|| a.lp.value().cmp(&b.lp.value()))
        .then_with(|| b.elkies_product_at_cap.cmp(&a.elkies_product_at_cap))
        .then_with(|| b.pair.t().abs().cmp(&a.pair.t().abs()))
        .then_with(|| (a.pair.t() > 0).cmp(&(b.pair.t() > 0)))
}

/// The trace over `F_p` with the largest `L_p` below `lcap`.
pub fn worst_trace(p: u64, lcap: u64) -> Result<SearchRecord> {
    worst_trace_with(p, lcap, Convention::default())
}

pub fn worst_trace_with(p: u64, lcap: u64, convention: Convention) -> Result<SearchRecord> {
    if lcap < 3 {
        return Err(Error::domain(format!("L cap must be >= 3, got {lcap}")));
    }
    if p < 3 || !is_prime(p) {
        return Err(Error::domain(format!("{p} is not an odd prime")));
    }
    let ells = sieve_primes(lcap)?;
    let r = hasse_radius(p);
    let mut config = SearchConfig::new(p, p, lcap);
    config.convention = convention;
    (-r..=r)
        .map(|t| {
            evaluate(
                TracePair::new(p, t).expect("trace in Hasse range"),
                &ells,
                &[],
                &config,
            )
        })
        .max_by(badness)
        .ok_or_else(|| Error::domain("no traces"))
}

/// Smallest `t >= 0` with `n = 4p - t^2` for a prime `p`, searching
/// `t <= n`.
///
/// `4p - t^2` is `0 mod 4` for even `t` and `3 mod 4` for odd `t`, so an
/// odd `n = 1 mod 4` never has a representation; those return `None`
/// without a search.
pub fn represent_4p_minus_t2(n: u64) -> Result<Option<(u64, u64)>> {
    if n < 5 || n.is_multiple_of(2) {
        return Err(Error::domain(format!(
            "representation needs an odd n >= 5, got {n}"
        )));
    }
    if n > 1 << 40 {
        return Err(Error::domain(format!("n = {n} exceeds 2^40")));
    }
    if n % 4 == 1 {
        return Ok(None);
    }
    Ok((1..=n).step_by(2).find_map(|t| {
        let p = (n + t * t) / 4;
        is_prime(p).then_some((p, t))
    }))
}

/// Every `n = 3 mod 8` in `[lo, hi]` with no representation `4p - t^2`.
///
/// `3 mod 8` is the only odd class reachable with odd `p`: odd `t` gives
/// `t^2 = 1 mod 8`, so `4p - t^2 = 3 mod 8`. The other odd classes fail by
/// congruence alone (apart from `7 = 4*2 - 1`).
pub fn coverage_sweep(lo: u64, hi: u64, budget: u64) -> Result<Vec<u64>> {
    if hi < lo {
        return Ok(Vec::new());
    }
    let count = (hi - lo) / 8 + 1;
    if count > budget {
        return Err(Error::resource(
            format!("coverage sweep over [{lo}, {hi}]"),
            budget,
        ));
    }
    let first = lo.max(11) + (8 + 3 - lo.max(11) % 8) % 8;
    let candidates: Vec<u64> = (first..=hi).step_by(8).collect();
    candidates
        .par_iter()
        .filter_map(|&n| match represent_4p_minus_t2(n) {
            Ok(Some(_)) => None,
            Ok(None) => Some(Ok(n)),
            Err(e) => Some(Err(e)),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elkies::compute_lp;

    fn pair(p: u64, t: i64) -> TracePair {
        TracePair::new(p, t).unwrap()
    }

    #[test]
    fn cond1_examples() {
        assert!(check_cond1(&pair(7, 1), 3, 3).unwrap());
        assert!(!check_cond1(&pair(5, 0), 3, 3).unwrap());
        assert!(check_cond1(&pair(5, 0), 24, 28).unwrap());
        assert!(check_cond1(&pair(5, 0), 2, 3).is_err());
    }

    #[test]
    fn scan_single_prime() {
        let out = scan_primes(&SearchConfig::new(5, 5, 37)).unwrap();
        assert_eq!(out.records.len(), 9);
        assert!(!out.truncated);
        let r0 = out.records.iter().find(|r| r.pair.t() == 0).unwrap();
        assert_eq!(r0.lp, LpBound::Prime(7));
        for r in &out.records {
            assert_eq!(r.lp, compute_lp(&r.pair, 37).unwrap().lp);
        }
        assert!(out
            .records
            .windows(2)
            .all(|w| record_order(&w[0], &w[1]) != Ordering::Greater));
    }

    #[test]
    fn threshold_filters_everything() {
        let mut c = SearchConfig::new(5, 7, 37);
        c.threshold = f64::INFINITY;
        assert!(scan_primes(&c).unwrap().records.is_empty());
    }

    #[test]
    fn invalid_configs() {
        assert!(scan_primes(&SearchConfig::new(7, 5, 37)).is_err());
        assert!(scan_primes(&SearchConfig::new(3, 5, 37)).is_err());
        assert!(scan_primes(&SearchConfig::new(5, 7, 2)).is_err());
    }

    #[test]
    fn budget_truncates_deterministically() {
        let mut c = SearchConfig::new(1000, 1100, 50);
        c.budget = 10_000;
        let a = scan_primes(&c).unwrap();
        assert!(a.truncated);
        assert!(a.primes_scanned < a.primes_in_range);
        let b = scan_primes(&c).unwrap();
        assert_eq!(a.records, b.records);
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let mut c = SearchConfig::new(2000, 2300, 80);
        c.workers = 1;
        let one = scan_primes(&c).unwrap();
        c.workers = 4;
        let four = scan_primes(&c).unwrap();
        assert_eq!(one.records, four.records);
    }

    #[test]
    fn sampling_is_seeded() {
        let mut c = SearchConfig::new(10_000, 10_200, 60);
        c.mode = SearchMode::HasseSample(7);
        c.seed = 99;
        let a = scan_primes(&c).unwrap();
        assert_eq!(a.records.len(), 7 * a.primes_scanned);
        assert_eq!(a.records, scan_primes(&c).unwrap().records);
        c.seed = 100;
        assert_ne!(a.records, scan_primes(&c).unwrap().records);
        assert_eq!(
            "hasse-sample:7".parse::<SearchMode>().unwrap(),
            SearchMode::HasseSample(7)
        );
        assert!("hasse-sample:0".parse::<SearchMode>().is_err());
    }

    #[test]
    fn worst_trace_small() {
        let w = worst_trace(5, 37).unwrap();
        let all = scan_primes(&SearchConfig::new(5, 5, 37)).unwrap();
        assert!(all
            .records
            .iter()
            .all(|r| r.lp.value() <= w.lp.value() || w.lp.is_saturated()));
        // with only l = 3 nothing reaches 4 sqrt 5
        let w3 = worst_trace(5, 3).unwrap();
        assert!(w3.lp.is_saturated());
        assert_eq!(w3.elkies_product_at_cap, BigUint::from(1u32));
        assert_eq!(w3.pair.t(), 1);
        for p in [101u64, 1009] {
            let w = worst_trace(p, 200).unwrap();
            let base = worst_trace(p, 200).unwrap();
            assert_eq!(w, base);
            let t1 = scan_primes(&SearchConfig::new(p, p, 200))
                .unwrap()
                .records
                .into_iter()
                .find(|r| r.pair.t() == 1)
                .unwrap();
            assert!(w.ratio_logp >= t1.ratio_logp);
        }
    }

    #[test]
    fn worst_trace_monotone_in_cap() {
        for p in [5u64, 53, 211, 1009] {
            let values: Vec<u64> = [3u64, 5, 11, 23, 47, 97, 199]
                .iter()
                .map(|&cap| worst_trace(p, cap).unwrap().lp.value())
                .collect();
            assert!(values.windows(2).all(|w| w[0] <= w[1]), "p={p}: {values:?}");
        }
    }

    #[test]
    fn cond1_matches_trivial_elkies_product() {
        let ells = sieve_primes(60).unwrap();
        // p itself is excluded from the product but has symbol +1 whenever
        // p does not divide t, so the equivalence needs p outside [M, L]
        for p in [67u64, 71, 101, 211] {
            let r = hasse_radius(p);
            for t in -r..=r {
                let pr = pair(p, t);
                let prof = profile_from_primes(&pr, 60, &ells, Convention::default());
                for (lo, hi) in [(3u64, 7u64), (11, 29), (13, 60)] {
                    let sub: BigUint = prof
                        .classes
                        .iter()
                        .filter(|c| {
                            c.ell >= lo
                                && c.ell <= hi
                                && c.verdict == crate::elkies::Verdict::Elkies
                        })
                        .map(|c| BigUint::from(c.ell))
                        .product();
                    let cond = check_cond1(&pr, lo, hi).unwrap();
                    assert_eq!(cond, sub == BigUint::from(1u32), "p={p} t={t} [{lo},{hi}]");
                }
            }
        }
    }

    #[test]
    fn cond_interval_on_records() {
        let mut c = SearchConfig::new(7, 7, 37);
        c.cond_interval = Some((3, 3));
        let out = scan_primes(&c).unwrap();
        let r1 = out.records.iter().find(|r| r.pair.t() == 1).unwrap();
        assert_eq!(r1.cond1_interval, Some((3, 3)));
    }

    #[test]
    fn representation_examples() {
        assert_eq!(represent_4p_minus_t2(19).unwrap(), Some((5, 1)));
        assert_eq!(represent_4p_minus_t2(13).unwrap(), None);
        assert_eq!(represent_4p_minus_t2(7).unwrap(), Some((2, 1)));
        assert!(represent_4p_minus_t2(12).is_err());
        // brute force over n = 4p - t^2 with the congruence claim
        let primes = sieve_primes(2000).unwrap();
        for n in (5..400u64).step_by(2) {
            let brute = (0..=n).find_map(|t| {
                let s = n + t * t;
                (s % 4 == 0 && primes.binary_search(&(s / 4)).is_ok()).then_some((s / 4, t))
            });
            assert_eq!(represent_4p_minus_t2(n).unwrap(), brute, "n={n}");
        }
    }

    #[test]
    fn coverage_examples() {
        let ex = coverage_sweep(5, 101, 1000).unwrap();
        for &n in &ex {
            assert_eq!(n % 8, 3);
            assert_eq!(represent_4p_minus_t2(n).unwrap(), None);
        }
        assert!(coverage_sweep(10, 5, 1000).unwrap().is_empty());
        assert!(coverage_sweep(5, 1_000_000, 10).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let mut c = SearchConfig::new(100_003, 100_103, 60);
        c.cond_interval = Some((13, 31));
        let out = scan_primes(&c).unwrap();
        for with_cond in [false, true] {
            let mut buf = Vec::new();
            write_records(&out.records, with_cond, &mut buf).unwrap();
            let back = read_records(&buf[..]).unwrap();
            if with_cond {
                assert_eq!(back, out.records);
            } else {
                let stripped: Vec<_> = out
                    .records
                    .iter()
                    .cloned()
                    .map(|mut r| {
                        r.cond1_interval = None;
                        r
                    })
                    .collect();
                assert_eq!(back, stripped);
            }
        }
    }
}
