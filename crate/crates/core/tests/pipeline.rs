use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use elkies::arith::sieve_primes;
use elkies::curves::{count_points, curve_with_trace, random_curve, trace, TracePair};
use elkies::elkies::{classify_range, compute_lp, Verdict};
use elkies::search::{read_records, scan_primes, write_records, SearchConfig, SearchMode};

#[test]
fn curve_to_profile_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for p in [101u64, 1009, 10_007] {
        let curve = random_curve(p, &mut rng).unwrap();
        let pair = trace(&curve).unwrap();
        assert_eq!(pair.order(), count_points(&curve).unwrap());
        let found = curve_with_trace(&pair, 1 << 24).unwrap();
        assert_eq!(trace(&found).unwrap(), pair);

        let lp = compute_lp(&pair, 1 << 16).unwrap();
        let profile = classify_range(&pair, lp.lp.value()).unwrap();
        assert_eq!(profile.lp, lp.lp);
        let elkies: Vec<u64> = profile
            .classes
            .iter()
            .filter(|c| c.verdict == Verdict::Elkies)
            .map(|c| c.ell)
            .collect();
        assert_eq!(elkies.len(), profile.n_e);
        let odd = sieve_primes(lp.lp.value()).unwrap().len() - 1;
        assert_eq!(
            profile.n_e + profile.n_a + profile.n_ramified + profile.n_excluded,
            odd
        );
    }
}

#[test]
fn scan_records_survive_csv() {
    let mut config = SearchConfig::new(1000, 1100, 60);
    config.mode = SearchMode::HasseSample(5);
    config.cond_interval = Some((11, 23));
    let outcome = scan_primes(&config).unwrap();
    assert!(!outcome.truncated);
    assert_eq!(outcome.records.len(), outcome.primes_scanned * 5);

    let mut csv = Vec::new();
    write_records(&outcome.records, true, &mut csv).unwrap();
    let back = read_records(csv.as_slice()).unwrap();
    assert_eq!(back, outcome.records);

    for record in &back {
        let pair = TracePair::new(record.pair.p(), record.pair.t()).unwrap();
        assert_eq!(compute_lp(&pair, 60).unwrap().lp, record.lp);
    }
}
