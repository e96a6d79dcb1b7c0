use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use anyhow::{bail, Context, Result};
use campana::arith::is_squarefree;
use campana::constants::*;
use campana::counting::*;
use campana::eulerprod::*;
use campana::localdensity::*;
use num_rational::Ratio;
use serde_json::{json, Value};

use crate::report::{Comparison, ConstantOut, CountSeries, Report, Table};

pub struct RunConfig {
    pub prime_cutoff: u64,
    pub cbv_truncation: u64,
    pub count_budget: Option<u64>,
    pub cache: CountCache,
    pub recompute: bool,
}

const N1_BUDGET: u64 = 100_000_000;
const BINARY_BUDGET: u64 = MAX_BINARY_BOUND;
const CONIC_BUDGET: u64 = 100_000;
const THINSET_M_PREDICTED: u64 = 300;

fn budget(cfg: &RunConfig, default: u64, what: &str, requested: u64) -> Result<()> {
    let limit = cfg.count_budget.unwrap_or(default);
    if requested > limit {
        bail!("{what} = {requested} exceeds the count budget {limit}; raise it with --count-budget");
    }
    if requested == 0 {
        bail!("{what} must be positive");
    }
    Ok(())
}

/// Powers of ten from `start` below `max`, then `max` itself.
fn ladder(start: u64, max: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut b = start;
    while b < max {
        out.push(b);
        b *= 10;
    }
    out.push(max);
    out
}

/// Cached records where available, freshly computed ones otherwise; new
/// records are merged into the cache, which rejects any disagreement.
fn cached_counts(
    cfg: &RunConfig,
    key: &str,
    bounds: &[u64],
    mut compute: impl FnMut(u64) -> Result<CountRecord>,
) -> Result<Vec<CountRecord>> {
    let cached = if cfg.recompute { Vec::new() } else { cfg.cache.load(key)? };
    let mut out = Vec::new();
    let mut fresh = Vec::new();
    for &b in bounds {
        match cached.iter().find(|r| r.bound == b) {
            Some(r) => {
                eprintln!("{key}: B = {b} read from cache");
                out.push(*r);
            }
            None => {
                let r = compute(b)?;
                fresh.push(r);
                out.push(r);
            }
        }
    }
    if !fresh.is_empty() {
        cfg.cache
            .store(key, &fresh)
            .with_context(|| format!("updating cache in {}", cfg.cache.dir().display()))?;
    }
    Ok(out)
}

pub fn constants_three(cfg: &RunConfig, report: &mut Report) -> Result<()> {
    let pred = c_pstva_three(cfg.prime_cutoff)?;
    let fiber = c_bv(cfg.cbv_truncation)?;
    report.constants.push(ConstantOut::new(
        &pred,
        "accelerated Euler product of (1 - 1/p) sigma_p, times sigma_inf / 4",
    ));
    report.constants.push(ConstantOut::new(
        &fiber,
        "sum of fiber constants over y0 y1 y2 <= truncation; tail extrapolated from three partial sums",
    ));
    let p = &report.constants[0];
    let f = &report.constants[1];
    let three_f = crate::report::Interval {
        lo: 3.0 * f.lower_bound,
        hi: f64::INFINITY,
    };
    let cmp = Comparison::new(&p.name, p.bounds(), p.value, "3 c_bv", three_f, 3.0 * f.estimate);
    report.comparisons.push(cmp);
    let routes = (pred.value - pred.components["closed_form_route"]).abs();
    report.check(
        "two assembly routes agree",
        routes <= 1e-10,
        format!("|difference| = {routes:.3e}"),
    );
    Ok(())
}

pub fn constants_binary(cfg: &RunConfig, report: &mut Report, params: &BinaryFormParams) -> Result<()> {
    let pred = c_pstva_binary(params, cfg.prime_cutoff)?;
    let chars = c_binary_chars(params, cfg.prime_cutoff)?;
    let vsum = c_binary_vsum(params, cfg.cbv_truncation)?;
    report.constants.push(ConstantOut::new(&pred, "accelerated Euler product times the archimedean factor"));
    report.constants.push(ConstantOut::new(
        &chars,
        "R times the signed sum of character-twisted Euler products",
    ));
    report.constants.push(ConstantOut::new(&vsum, "sum of c_v over v <= truncation with a divisor-sum tail bound"));
    let (p, c) = (&report.constants[0], &report.constants[1]);
    let cmp = Comparison::new(&p.name, p.bounds(), p.value, &c.name, c.bounds(), c.value);
    report.comparisons.push(cmp);
    let diff = (vsum.value - chars.value).abs();
    let allowed = vsum.tail_estimate + chars.tail_estimate + 1e-3 * chars.value;
    report.check(
        "v-sum and character routes agree",
        diff <= allowed,
        format!("|difference| = {diff:.3e} <= {allowed:.3e}"),
    );
    Ok(())
}

fn c_bv_estimate(cfg: &RunConfig) -> Result<f64> {
    Ok(c_bv(cfg.cbv_truncation)?.estimate())
}

pub fn count_n1_cmd(cfg: &RunConfig, report: &mut Report, bmax: u64) -> Result<()> {
    budget(cfg, N1_BUDGET, "B", bmax)?;
    let bounds = ladder(1_000.min(bmax), bmax);
    let n1 = cached_counts(cfg, "n1", &bounds, |b| Ok(count_n1(b)))?;
    let tilde = cached_counts(cfg, "n1_tilde", &bounds, |b| Ok(count_n1_tilde(b)))?;
    for (a, t) in n1.iter().zip(&tilde) {
        let ok = a.exact() == t.exact() * Ratio::from_integer(3);
        report.check(
            &format!("N1 = 3 N1~ at B = {}", a.bound),
            ok,
            format!("{} = 3 * {}", a.exact(), t.exact()),
        );
    }
    let mut series = CountSeries::new("n1", "n1", &n1);
    if n1.len() >= 2 {
        let s = slope(&n1, Ratio::new(1, 2))?;
        series = series.with_slope(&s, "1/2", "3 c_bv", 3.0 * c_bv_estimate(cfg)?);
    }
    report.counts.push(series);
    report.counts.push(CountSeries::new("n1_tilde", "n1_tilde", &tilde));
    Ok(())
}

pub fn count_binary_cmd(cfg: &RunConfig, report: &mut Report, params: &BinaryFormParams, bmax: u64) -> Result<()> {
    budget(cfg, BINARY_BUDGET, "B", bmax)?;
    let key = cache_key_binary(params);
    let bounds = ladder(100.min(bmax), bmax);
    let recs = cached_counts(cfg, &key, &bounds, |b| Ok(count_n_binary(params, b)?))?;
    let small = bmax.min(100);
    let (lhs, rhs) = binary_decomposition_identity(params, small)?;
    report.check(
        &format!("decomposition identity at B = {small}"),
        lhs == rhs,
        format!("2 N(B) = {lhs}, sum of N_v(B) = {rhs}"),
    );
    let mut series = CountSeries::new(&key, &key, &recs);
    if recs.len() >= 2 {
        let s = slope(&recs, Ratio::from_integer(1))?;
        let c = c_binary_chars(params, cfg.prime_cutoff)?.value;
        series = series.with_slope(&s, "1", "c", c);
    }
    report.counts.push(series);
    Ok(())
}

pub fn count_conic_cmd(cfg: &RunConfig, report: &mut Report, y: &FiberIndex, t: u64) -> Result<()> {
    budget(cfg, CONIC_BUDGET, "T", t)?;
    let key = cache_key_conic(y);
    let bounds = ladder(1_000.min(t), t);
    let recs = cached_counts(cfg, &key, &bounds, |b| Ok(count_conic_plus(y, b as f64, false)?.record))?;
    let constant = peyre_fiber_constant(y)?;
    let mut series = CountSeries::new(&key, &key, &recs);
    if recs.len() >= 2 {
        let s = slope(&recs, Ratio::from_integer(1))?;
        series = series.with_slope(&s, "1", "fiber constant", constant);
    } else {
        let s = SlopeReport {
            ratios: vec![(t, recs[0].value() / t as f64)],
            last: recs[0].value() / t as f64,
        };
        series = series.with_slope(&s, "1", "fiber constant", constant);
    }
    report.counts.push(series);
    Ok(())
}

pub fn verify_counterexample(cfg: &RunConfig, report: &mut Report, params: &BinaryFormParams) -> Result<()> {
    let m = counterexample_margin(params, cfg.prime_cutoff)?;
    let c = m.conditions;
    report.check(
        "hypotheses",
        c.all(),
        format!(
            "a = b = 1 mod 4: {}, (a|b) = -1: {}, residues mod 3 and 7: {}, (a|5) = -1 and (b|5) = 1: {}",
            c.congruence, c.mutual_nonresidue, c.residues_mod_3_and_7, c.split_at_5
        ),
    );
    report.check(
        "margin S(chi3) - S(chi1) - S(chi2) < 0",
        m.enclosure.hi < 0.0,
        format!("enclosure [{:.12}, {:.12}]", m.enclosure.lo, m.enclosure.hi),
    );
    if let Some(ub) = m.upper_bound {
        report.check(
            "ratio over all primes < 16",
            ub.ratio_all_primes.hi < 16.0,
            format!("{:.9}", ub.ratio_all_primes.mid()),
        );
        report.check(
            "ratio over p <= 7 > 8",
            ub.ratio_small_primes.lo > 8.0,
            format!("{:.9}", ub.ratio_small_primes.mid()),
        );
        report.check(
            "upper bound on the margin < 0",
            ub.bound.hi < 0.0 && m.enclosure.hi <= ub.bound.hi,
            format!("margin <= {:.9}", ub.bound.mid()),
        );
    }
    let mut t = Table::new("character terms", &["k", "l", "sign", "product"]);
    for (k, l, s, v) in &m.terms {
        t.push(vec![json!(k), json!(l), json!(s), json!(v)]);
    }
    report.tables.push(t);
    constants_binary(cfg, report, params)?;
    let relation = report.comparisons[0].relation;
    report.check(
        "c < c_pstva",
        relation == crate::report::Relation::Greater,
        format!("{:?}", relation).to_lowercase(),
    );
    Ok(())
}

pub fn verify_densities(report: &mut Report) -> Result<()> {
    let depth = 6;
    let mut t = Table::new("three-point densities", &["p", "oracle", "closed_form", "difference", "tail_bound"]);
    let mut ok = true;
    for p in [2u64, 3, 5, 7, 11, 13] {
        let o = sigma_p_three_oracle(p, depth)?;
        let c = sigma_p_three(p);
        ok &= (o.value - c).abs() <= o.tail_bound;
        t.push(vec![json!(p), json!(o.value), json!(c), json!((o.value - c).abs()), json!(o.tail_bound)]);
    }
    report.tables.push(t);
    report.check("three-point oracle within tail bound", ok, format!("depth {depth}, p <= 13"));

    let mut t = Table::new(
        "binary-form densities",
        &["a", "b", "p", "oracle", "closed_form", "difference", "tail_bound"],
    );
    let mut ok = true;
    for (a, b) in [(1u64, 5u64), (5, 13), (13, 17), (37, 109)] {
        let params = BinaryFormParams::new(a, b)?;
        for p in [2u64, 3, 5, 7, 11, 13] {
            let o = sigma_p_binary_oracle(p, &params, depth)?;
            let c = sigma_p_binary(p, &params);
            ok &= (o.value - c).abs() <= o.tail_bound;
            t.push(vec![
                json!(a),
                json!(b),
                json!(p),
                json!(o.value),
                json!(c),
                json!((o.value - c).abs()),
                json!(o.tail_bound),
            ]);
        }
    }
    report.tables.push(t);
    report.check("binary-form oracle within tail bound", ok, format!("depth {depth}, p <= 13"));

    let entries = [1i64, -1, 2, -2, 3, -3, 5, -5, 6, -6, 7, -7];
    let mut bad = Vec::new();
    let mut n = 0;
    for &a in &entries {
        for &b in &entries {
            for &c in &entries {
                let Ok(y) = FiberIndex::new(a, b, c) else { continue };
                n += 1;
                if sigma_2y_limit(&y, 12)? != Ratio::from_integer(sigma_2y_closed(&y) as u64) {
                    bad.push(y.entries());
                }
            }
        }
    }
    report.check(
        "2-adic closed form equals the level-12 count",
        bad.is_empty(),
        format!("{n} fibers, mismatches {bad:?}"),
    );
    Ok(())
}

fn fiber(key: [u64; 3]) -> Result<FiberIndex> {
    Ok(FiberIndex::new(key[0] as i64, key[1] as i64, key[2] as i64)?)
}

pub fn verify_identities(cfg: &RunConfig, report: &mut Report) -> Result<()> {
    let top = cfg.count_budget.unwrap_or(1_000_000).min(1_000_000);
    for b in ladder(100.min(top), top) {
        let (n1, t) = (count_n1(b), count_n1_tilde(b));
        report.check(
            &format!("N1 = 3 N1~ at B = {b}"),
            n1.exact() == t.exact() * Ratio::from_integer(3),
            format!("{} = 3 * {}", n1.exact(), t.exact()),
        );
    }
    let b = 10_000;
    report.check(
        "no triples with z0, z1 > 0 > z2",
        count_impossible_sign_pattern(b) == 0,
        format!("B = {b}"),
    );
    let fibers = fiber_counts(b);
    let total: u64 = fibers.values().sum();
    let n1 = count_n1(b);
    report.check(
        "fiber partition",
        total == n1.raw_count,
        format!("B = {b}: sum over {} fibers {} = N1 {}", fibers.len(), Ratio::new(total, 2), n1.exact()),
    );

    let positive = |y: [u64; 3]| -> Result<u64> {
        Ok(count_conic_plus(&fiber(y)?, 100.0, false)?.record.raw_count / 4)
    };
    let mut t = Table::new(
        "thin fibers at B = 10000",
        &["y0", "y1", "y2", "thin_count", "three_quarters_conic", "permuted_conic_sum"],
    );
    let mut relation_bad = 0;
    let mut permuted_bad = 0;
    for (key, &raw) in &fibers {
        let [y0, y1, y2] = *key;
        let thin = Ratio::new(raw, 2);
        let conic = count_conic_plus(&fiber(*key)?, 100.0, false)?.record.exact() * Ratio::new(3, 4);
        let permuted = positive([y0, y1, y2])? + positive([y2, y1, y0])? + positive([y2, y0, y1])?;
        relation_bad += (thin != conic) as usize;
        permuted_bad += (thin != Ratio::from_integer(permuted)) as usize;
        t.push(vec![
            json!(y0),
            json!(y1),
            json!(y2),
            json!(thin.to_string()),
            json!(conic.to_string()),
            json!(permuted),
        ]);
    }
    report.tables.push(t);
    report.check(
        "thin fiber count = 3/4 conic count, fiber by fiber",
        relation_bad == 0,
        format!("{relation_bad} of {} fibers differ", fibers.len()),
    );
    report.check(
        "thin fiber count = positive solutions of three permuted conics",
        permuted_bad == 0,
        format!("{permuted_bad} of {} fibers differ", fibers.len()),
    );
    let mut orbits: BTreeMap<[u64; 3], u64> = BTreeMap::new();
    for (key, &raw) in &fibers {
        let mut s = *key;
        s.sort_unstable();
        *orbits.entry(s).or_default() += raw;
    }
    let mut orbit_bad = 0;
    for (s, thin_raw) in &orbits {
        let [a, b, c] = *s;
        let perms: BTreeSet<[u64; 3]> =
            [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]].into_iter().collect();
        let mut conic = 0;
        for p in perms {
            conic += count_conic_plus(&fiber(p)?, 100.0, false)?.record.raw_count;
        }
        orbit_bad += (2 * thin_raw != 3 * conic) as usize;
    }
    report.check(
        "thin fiber count = 3/4 conic count, summed over permutations",
        orbit_bad == 0,
        format!("{orbit_bad} of {} orbits differ", orbits.len()),
    );

    for (a, bb) in [(1u64, 5u64), (5, 13)] {
        let p = BinaryFormParams::new(a, bb)?;
        let mut ok = true;
        for bound in [10u64, 50, 100, 200] {
            let (l, r) = binary_decomposition_identity(&p, bound)?;
            ok &= l == r;
        }
        report.check(
            &format!("binary decomposition identity for ({a},{bb})"),
            ok,
            "B = 10, 50, 100, 200".into(),
        );
    }
    Ok(())
}

pub fn thinset(cfg: &RunConfig, report: &mut Report, m: u64, b: u64) -> Result<()> {
    budget(cfg, N1_BUDGET, "B", b)?;
    if m == 0 {
        bail!("M must be positive");
    }
    let fibers = fiber_counts(b);
    let n1 = count_n1(b);
    let three_cbv = 3.0 * c_bv_estimate(cfg)?;

    // fiber-constant mass by largest entry, for entries up to the predicted range
    let top = m.min(THINSET_M_PREDICTED);
    let sqfree: Vec<bool> = (0..=top).map(is_squarefree).collect();
    let mut by_max = vec![0.0f64; top as usize + 1];
    for a in 1..=top {
        for c in 1..=top {
            for d in 1..=top {
                if !(sqfree[a as usize] && sqfree[c as usize] && sqfree[d as usize]) {
                    continue;
                }
                let Ok(y) = FiberIndex::new(a as i64, c as i64, d as i64) else { continue };
                by_max[a.max(c).max(d) as usize] += peyre_fiber_constant(&y)?;
            }
        }
    }

    let mut rows: Vec<u64> = (1..=m.min(30)).collect();
    if m > 30 {
        rows.push(m);
    }
    let mut t = Table::new(
        "thin sets",
        &["M", "thin_count", "remaining_count", "remaining_predicted_constant"],
    );
    let mut mass = 0.0;
    let mut next = 1;
    let mut prev_pred = f64::INFINITY;
    let mut monotone = true;
    for &mm in &rows {
        let thin = thin_set_counts_from(&fibers, mm, b);
        let remaining = n1.exact() - thin.exact();
        let predicted = if mm <= top {
            while next <= mm {
                mass += by_max[next as usize];
                next += 1;
            }
            // 3 c_BV less (3/pi) times the fiber sum, i.e. 3/4 of the fiber constants
            let p = three_cbv - 0.75 * mass;
            monotone &= p <= prev_pred;
            prev_pred = p;
            json!(p)
        } else {
            Value::Null
        };
        t.push(vec![json!(mm), json!(thin.exact().to_string()), json!(remaining.to_string()), predicted]);
    }
    report.tables.push(t);
    report.check(
        "remaining predicted constant decreases with M",
        monotone,
        format!("3 c_bv = {three_cbv:.6}, 3/pi = {:.6}", 3.0 / PI),
    );
    Ok(())
}
