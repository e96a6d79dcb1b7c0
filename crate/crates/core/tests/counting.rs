mod support;

use std::collections::BTreeMap;

use campana::arith::squareful_decompose;
use campana::counting::*;
use campana::localdensity::{BinaryFormParams, FiberIndex};
use num_rational::Ratio;

fn fiber(y: [u64; 3]) -> FiberIndex {
    FiberIndex::new(y[0] as i64, y[1] as i64, y[2] as i64).unwrap()
}

fn positive_solutions(y: [u64; 3], b: u64) -> u64 {
    count_conic_plus(&fiber(y), (b as f64).sqrt(), false).unwrap().record.raw_count / 4
}

#[test]
fn squareful_list_matches_products() {
    let hit = support::squareful_by_products(1_000_000);
    let expected: Vec<u64> = (1..=1_000_000u64).filter(|&z| hit[z as usize]).collect();
    assert_eq!(squareful_list(1_000_000), expected);
}

#[test]
fn n1_matches_box_scan() {
    for b in [9u64, 50, 200, 1000] {
        assert_eq!(count_n1(b).raw_count, support::n1_raw_by_scan(b), "B = {b}");
    }
}

#[test]
fn n1_is_three_times_the_positive_count() {
    for b in [100u64, 1_000, 10_000, 100_000, 1_000_000] {
        let n1 = count_n1(b).exact();
        let tilde = count_n1_tilde(b).exact();
        assert_eq!(n1, tilde * Ratio::from_integer(3), "B = {b}");
    }
}

#[test]
fn no_triples_with_two_positive_summands_and_negative_sum() {
    assert_eq!(count_impossible_sign_pattern(100_000), 0);
}

#[test]
fn fibers_partition_the_count() {
    for b in [100u64, 10_000] {
        let fibers = fiber_counts(b);
        let total: u64 = fibers.values().sum();
        assert_eq!(total, count_n1(b).raw_count);
        let mut by_function = 0u64;
        for key in fibers.keys() {
            by_function += thin_fiber_count(&fiber(*key), b).unwrap().raw_count;
        }
        assert_eq!(by_function, total);
    }
}

#[test]
fn worked_fiber_example() {
    // [1 : 8] has 1 = 1^2 1^3, 8 = 1^2 2^3, 9 = 3^2 1^3
    assert_eq!(squareful_decompose(8).unwrap().y, 2);
    let y = fiber([1, 2, 1]);
    assert!(thin_fiber_count(&y, 9).unwrap().raw_count > 0);
    assert_eq!(thin_fiber_count(&fiber([1, 1, 1]), 9).unwrap().raw_count, 0);
}

/// Each fiber collects points from three sign patterns of the conic; the
/// positive solutions of the conic with its entries permuted count them.
#[test]
fn thin_fibers_from_permuted_conics() {
    let b = 10_000;
    for (key, &raw) in &fiber_counts(b) {
        let [y0, y1, y2] = *key;
        let expected = positive_solutions([y0, y1, y2], b)
            + positive_solutions([y2, y1, y0], b)
            + positive_solutions([y2, y0, y1], b);
        assert_eq!(raw, 2 * expected, "fiber {key:?}");
    }
}

/// Summed over all orderings of the entries, thin fibers are 3/4 of the
/// conic counts.
#[test]
fn thin_fibers_over_permutation_orbits() {
    let b = 10_000;
    let fibers = fiber_counts(b);
    let mut orbits: BTreeMap<[u64; 3], (u64, u64)> = BTreeMap::new();
    for (key, &raw) in &fibers {
        let mut sorted = *key;
        sorted.sort_unstable();
        orbits.entry(sorted).or_default().0 += raw;
    }
    for (sorted, entry) in orbits.iter_mut() {
        let mut perms = BTreeMap::new();
        let [a, b_, c] = *sorted;
        for p in [[a, b_, c], [a, c, b_], [b_, a, c], [b_, c, a], [c, a, b_], [c, b_, a]] {
            perms.insert(p, ());
        }
        for p in perms.keys() {
            entry.1 += count_conic_plus(&fiber(*p), 100.0, false).unwrap().record.raw_count;
        }
    }
    for (sorted, (thin_raw, conic)) in orbits {
        // thin = thin_raw / 2, so thin = 3/4 conic reads 2 thin_raw = 3 conic
        assert_eq!(2 * thin_raw, 3 * conic, "orbit {sorted:?}");
    }
}

#[test]
fn thin_set_counts() {
    let b = 10_000;
    let fibers = fiber_counts(b);
    let mut prev = 0;
    for m in 1..=30 {
        let c = thin_set_counts_from(&fibers, m, b).raw_count;
        assert!(c >= prev);
        prev = c;
    }
    assert_eq!(thin_set_count(b, b).raw_count, count_n1(b).raw_count);
    assert_eq!(thin_set_count(1, 9).raw_count, 0);
    let pure_squares = thin_fiber_count(&fiber([1, 1, 1]), b).unwrap();
    assert_eq!(thin_set_counts_from(&fibers, 1, b), pure_squares);
}

#[test]
fn conic_counts_match_scan() {
    for y in [[1u64, 1, 1], [1, 2, 1], [2, 1, 1], [1, 1, 2], [3, 1, 1], [1, 5, 1], [2, 3, 1], [1, 1, 3], [5, 1, 3]] {
        for t in [5u64, 30, 100] {
            let scan = support::conic_points_by_scan(y, t);
            let c = count_conic_plus(&fiber(y), t as f64, true).unwrap();
            assert_eq!(c.record.raw_count, scan.len() as u64, "y = {y:?}, T = {t}");
            let points: Vec<[i64; 3]> = c.points.unwrap().iter().map(|p| [p.x0, p.x1, p.x2]).collect();
            let mut scan = scan;
            scan.sort_unstable();
            assert_eq!(points, scan);
        }
    }
}

#[test]
fn conic_examples() {
    let c = count_conic_plus(&fiber([1, 1, 1]), 5.0, true).unwrap();
    assert_eq!(c.record.raw_count, 8);
    for t in [10.0, 100.0] {
        assert_eq!(count_conic_plus(&fiber([1, 1, 3]), t, false).unwrap().record.raw_count, 0);
    }
    assert!(count_conic_plus(&FiberIndex::new(-1, 1, 1).unwrap(), 10.0, false).is_err());
    assert!(count_conic_plus(&fiber([1, 1, 1]), 0.0, false).is_err());
}

#[test]
fn divisor_method_matches_scan() {
    for y0 in [1u64, 2, 3, 5, 6, 7] {
        let y = fiber([y0, 1, 1]);
        assert_eq!(conic_positive_solutions(&y, 1_000_000, false), conic_positive_solutions(&y, 1_000_000, true));
        let y = fiber([1, y0, 1]);
        assert_eq!(conic_positive_solutions(&y, 1_000_000, false), conic_positive_solutions(&y, 1_000_000, true));
    }
}

#[test]
fn conic_count_near_its_constant() {
    let c = count_conic_plus(&fiber([1, 1, 1]), 1e5, false).unwrap();
    let ratio = c.record.value() / 1e5 / (4.0 / std::f64::consts::PI);
    assert!((ratio - 1.0).abs() < 0.05);
}

#[test]
fn binary_counts_match_box_scan() {
    for (a, b) in [(1u64, 1u64), (1, 5), (5, 13), (13, 17)] {
        let p = BinaryFormParams::new(a, b).unwrap();
        for bound in [1u64, 2, 10, 60] {
            let r = count_n_binary(&p, bound).unwrap();
            assert_eq!(r.raw_count, support::binary_raw_by_scan(a, b, bound), "({a},{b}) B = {bound}");
            assert_eq!(r.divisor, 2);
        }
    }
}

#[test]
fn binary_decomposition_identity_holds() {
    for (a, b) in [(1u64, 5u64), (5, 13)] {
        let p = BinaryFormParams::new(a, b).unwrap();
        for bound in [1u64, 7, 50, 200] {
            let (lhs, rhs) = binary_decomposition_identity(&p, bound).unwrap();
            assert_eq!(lhs, rhs, "({a},{b}) B = {bound}");
        }
    }
}

#[test]
fn nv_vanishes_for_v_sharing_a_prime_with_ab() {
    let p = BinaryFormParams::new(5, 13).unwrap();
    for v in [5u64, 13, 10, 39] {
        assert_eq!(count_nv_binary(&p, v, 100).unwrap().raw_count, 0);
    }
}

#[test]
fn small_solutions() {
    let p = BinaryFormParams::new(1, 1).unwrap();
    assert_eq!(small_coprime_solution(&p, 1, 100).unwrap(), Some((3, 4, 5)));
    let p = BinaryFormParams::new(1, 5).unwrap();
    assert_eq!(small_coprime_solution(&p, 1, 100).unwrap(), Some((2, 1, 3)));
    // 3 = x^2 + 5 y^2 mod 4 has no solution with x, y coprime, so v = 3 gives nothing
    assert_eq!(small_coprime_solution(&p, 3, 200).unwrap(), None);
    assert!(small_coprime_solution(&p, 5, 100).is_err());
}

#[test]
fn slope_reports() {
    let recs: Vec<CountRecord> = [100u64, 400, 900].iter().map(|&b| CountRecord::new(b, 6 * (b as f64).sqrt() as u64, 2)).collect();
    let s = slope(&recs, Ratio::new(1, 2)).unwrap();
    assert!((s.last - 3.0).abs() < 1e-12);
    assert!(s.ratios.iter().all(|r| (r.1 - 3.0).abs() < 1e-12));
    assert!(slope(&recs[..1], Ratio::new(1, 2)).is_err());
    assert!(slope(&[recs[1], recs[0]], Ratio::new(1, 2)).is_err());
}

#[test]
fn cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cache = CountCache::new(dir.path());
    let records: Vec<CountRecord> = [100u64, 1000, 10_000].iter().map(|&b| count_n1(b)).collect();
    cache.store("n1", &records).unwrap();
    assert_eq!(cache.load("n1").unwrap(), records);
    assert_eq!(cache.get("n1", 1000).unwrap(), Some(count_n1(1000)));
    assert_eq!(cache.get("n1", 5).unwrap(), None);
}
