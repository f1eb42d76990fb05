//! Exact and simulated trace moments `E[Tr M^k · Tr conj(M)^l]` for the
//! circular Gaussian centrosymmetric ensemble.
//!
//! Two exact routes are provided and cross-checked against each other:
//!
//! * **Enumeration** walks every index tuple `(i_1..i_k, j_1..j_l)`, maps each
//!   factor `x_{i_a i_{a+1}}` to its free variable under the mirror pairing
//!   `(i, j) ~ (n-1-i, n-1-j)` and applies `E[u^p conj(u)^q] = δ_pq p!`.
//! * **Wick matching** sums over bijections between unconjugated and
//!   conjugated factors, counting the index tuples for which every matched
//!   pair lands on the same free variable. It needs only `n^k` outer
//!   iterations and is used when enumeration would exceed its budget.
//!
//! Both produce an integer count `S`; the moment is `S / n^{(k+l)/2}`.

use std::fmt;

use num_complex::Complex64;
use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::trace_powers;
use crate::parallel::map_indexed;
use crate::rng::SeedStream;
use crate::sampling::{sample_centrosymmetric, EntryDistribution, EntryKind};

/// Largest number of index tuples the enumeration route will visit.
pub const ENUMERATION_BUDGET: u128 = 100_000_000;
pub const MIN_MC_TRIALS: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentQuery {
    pub n: usize,
    /// Power of `M`.
    pub k: u32,
    /// Power of `conj(M)`; zero asks for `E[Tr M^k]`.
    pub l: u32,
}

impl MomentQuery {
    pub fn new(n: usize, k: u32, l: u32) -> Result<Self> {
        if n == 0 || k == 0 {
            return Err(Error::InvalidArgument(format!(
                "moment query needs n >= 1 and k >= 1, got n={n}, k={k}"
            )));
        }
        Ok(Self { n, k, l })
    }

    pub fn enumeration_size(&self) -> u128 {
        (self.n as u128).saturating_pow(self.k + self.l)
    }
}

/// A reduced non-negative rational. Serialized as `[numerator, denominator]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[u128; 2]", into = "[u128; 2]")]
pub struct ExactMoment {
    numerator: u128,
    denominator: u128,
}

impl ExactMoment {
    pub fn new(numerator: u128, denominator: u128) -> Self {
        assert!(denominator > 0);
        let g = numerator.gcd(&denominator);
        Self {
            numerator: numerator / g,
            denominator: denominator / g,
        }
    }

    pub fn zero() -> Self {
        Self::new(0, 1)
    }

    pub fn numerator(&self) -> u128 {
        self.numerator
    }

    pub fn denominator(&self) -> u128 {
        self.denominator
    }

    pub fn is_zero(&self) -> bool {
        self.numerator == 0
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.to_f64(), 0.0)
    }
}

impl From<[u128; 2]> for ExactMoment {
    fn from([num, den]: [u128; 2]) -> Self {
        Self::new(num, den.max(1))
    }
}

impl From<ExactMoment> for [u128; 2] {
    fn from(m: ExactMoment) -> Self {
        [m.numerator, m.denominator]
    }
}

impl fmt::Display for ExactMoment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactMethod {
    Enumeration,
    WickMatching,
}

fn require_gaussian(dist: &EntryDistribution) -> Result<()> {
    match dist.kind {
        EntryKind::StandardComplexGaussian => Ok(()),
        #[allow(unreachable_patterns)]
        _ => Err(Error::UnsupportedDistribution(dist.descriptor.clone())),
    }
}

#[inline]
fn free_variable(n: usize, i: usize, j: usize) -> usize {
    let (mi, mj) = (n - 1 - i, n - 1 - j);
    if (i, j) <= (mi, mj) {
        i * n + j
    } else {
        mi * n + mj
    }
}

fn factorial(p: u32) -> u128 {
    (1..=p as u128).product()
}

/// `n^{(k+l)/2}`, or `None` when `k + l` is odd.
fn scaling(n: usize, k: u32, l: u32) -> Option<u128> {
    ((k + l) % 2 == 0).then(|| (n as u128).pow((k + l) / 2))
}

fn finish(q: MomentQuery, count: u128) -> ExactMoment {
    match scaling(q.n, q.k, q.l) {
        Some(den) => ExactMoment::new(count, den),
        None => {
            // An odd number of factors cannot be split into balanced pairs.
            debug_assert_eq!(count, 0);
            ExactMoment::zero()
        }
    }
}

/// Gaussian expectation of one monomial given its index tuple.
fn monomial_weight(n: usize, idx_k: &[usize], idx_l: &[usize], counts: &mut Vec<(usize, u32, u32)>) -> u128 {
    counts.clear();
    let mut bump = |id: usize, conj: bool| {
        match counts.iter_mut().find(|c| c.0 == id) {
            Some(c) if conj => c.2 += 1,
            Some(c) => c.1 += 1,
            None => counts.push((id, u32::from(!conj), u32::from(conj))),
        }
    };
    let k = idx_k.len();
    for a in 0..k {
        bump(free_variable(n, idx_k[a], idx_k[(a + 1) % k]), false);
    }
    let l = idx_l.len();
    for b in 0..l {
        bump(free_variable(n, idx_l[b], idx_l[(b + 1) % l]), true);
    }
    let mut w = 1u128;
    for &(_, p, q) in counts.iter() {
        if p != q {
            return 0;
        }
        w *= factorial(p);
    }
    w
}

/// Advances `digits` as a base-`n` odometer; false once it wraps.
fn advance(digits: &mut [usize], n: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < n {
            return true;
        }
        *d = 0;
    }
    false
}

/// Exact moment by direct enumeration of all `n^{k+l}` index tuples.
pub fn exact_mixed_trace_moment(q: MomentQuery, dist: &EntryDistribution) -> Result<ExactMoment> {
    require_gaussian(dist)?;
    let tuples = q.enumeration_size();
    if tuples > ENUMERATION_BUDGET {
        return Err(Error::BudgetExceeded {
            tuples,
            budget: ENUMERATION_BUDGET,
        });
    }
    let (n, k, l) = (q.n, q.k as usize, q.l as usize);
    let count: u128 = (0..n)
        .into_par_iter()
        .map(|first| {
            let mut rest = vec![0usize; k + l - 1];
            let mut idx = vec![0usize; k + l];
            let mut counts = Vec::with_capacity(k + l);
            let mut sum = 0u128;
            loop {
                idx[0] = first;
                idx[1..].copy_from_slice(&rest);
                sum += monomial_weight(n, &idx[..k], &idx[k..], &mut counts);
                if !advance(&mut rest, n) {
                    break;
                }
            }
            sum
        })
        .sum();
    Ok(finish(q, count))
}

/// `E[Tr M^k]`.
pub fn exact_single_trace_moment(n: usize, k: u32, dist: &EntryDistribution) -> Result<ExactMoment> {
    exact_mixed_trace_moment(MomentQuery::new(n, k, 0)?, dist)
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// Exact moment by summing over Wick matchings.
///
/// For a bijection `σ` from the `k` unconjugated factors to the `l = k`
/// conjugated ones, a tuple contributes when every `x_{i_a i_{a+1}}` and
/// `x_{j_σ(a) j_σ(a)+1}` are the same free variable, i.e. equal or mirror
/// images. Fixing the `j` tuple and a mirror flag per factor determines
/// the `i` tuple, so the count needs `n^k · k! · 2^k` steps.
pub fn wick_mixed_trace_moment(q: MomentQuery, dist: &EntryDistribution) -> Result<ExactMoment> {
    require_gaussian(dist)?;
    if q.k != q.l {
        // No bijection between factor sets of different sizes.
        return Ok(ExactMoment::zero());
    }
    let n = q.n;
    let k = q.k as usize;
    let work = (n as u128).saturating_pow(q.k) * factorial(q.k) * (1u128 << k);
    if work > 64 * ENUMERATION_BUDGET {
        return Err(Error::BudgetExceeded {
            tuples: work,
            budget: 64 * ENUMERATION_BUDGET,
        });
    }
    let perms = permutations(k);
    let mirror = |i: usize, flip: bool| if flip { n - 1 - i } else { i };

    let count: u128 = (0..n)
        .into_par_iter()
        .map(|first| {
            let mut rest = vec![0usize; k - 1];
            let mut j = vec![0usize; k];
            let mut i = vec![0usize; k];
            let mut seen: Vec<Vec<usize>> = Vec::with_capacity(1 << k);
            let mut sum = 0u128;
            loop {
                j[0] = first;
                j[1..].copy_from_slice(&rest);
                for sigma in &perms {
                    seen.clear();
                    for flags in 0u32..(1 << k) {
                        let flip = |a: usize| flags >> a & 1 == 1;
                        for a in 0..k {
                            i[a] = mirror(j[sigma[a]], flip(a));
                        }
                        let consistent = (0..k).all(|a| i[(a + 1) % k] == mirror(j[(sigma[a] + 1) % k], flip(a)));
                        if consistent && !seen.contains(&i) {
                            seen.push(i.clone());
                        }
                    }
                    sum += seen.len() as u128;
                }
                if !advance(&mut rest, n) {
                    break;
                }
            }
            sum
        })
        .sum();
    Ok(finish(q, count))
}

/// Exact moment, by enumeration when it fits the budget and by Wick
/// matching otherwise.
pub fn exact_moment(q: MomentQuery, dist: &EntryDistribution) -> Result<(ExactMoment, ExactMethod)> {
    if q.enumeration_size() <= ENUMERATION_BUDGET {
        Ok((exact_mixed_trace_moment(q, dist)?, ExactMethod::Enumeration))
    } else {
        Ok((wick_mixed_trace_moment(q, dist)?, ExactMethod::WickMatching))
    }
}

/// Large-`n` limit: `2k` when `k = l`, else 0. A single trace (`l = 0`)
/// also tends to 0.
pub fn asymptotic_prediction(k: u32, l: u32) -> f64 {
    if k == l {
        2.0 * k as f64
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    #[serde(with = "complex_pair")]
    pub mean: Complex64,
    /// Standard error of the complex mean, `sqrt(se_re^2 + se_im^2)`.
    pub se: f64,
    pub trials: usize,
}

impl McEstimate {
    /// Whether `target` lies within `sigmas` standard errors.
    pub fn agrees_with(&self, target: Complex64, sigmas: f64) -> bool {
        (self.mean - target).norm() <= sigmas * self.se
    }
}

/// Monte Carlo estimates for every `k in 1..=kmax`, `l in 0..=lmax`, all
/// from the same samples. Trial `t` uses substream `t` of `master_seed`.
pub struct McGrid {
    pub n: usize,
    pub kmax: u32,
    pub lmax: u32,
    estimates: Vec<McEstimate>,
}

impl McGrid {
    pub fn get(&self, k: u32, l: u32) -> Option<McEstimate> {
        if k == 0 || k > self.kmax || l > self.lmax {
            return None;
        }
        Some(self.estimates[((k - 1) * (self.lmax + 1) + l) as usize])
    }
}

pub fn mc_trace_moment_grid(
    n: usize,
    kmax: u32,
    lmax: u32,
    trials: usize,
    master_seed: u64,
    dist: &EntryDistribution,
    threads: Option<usize>,
) -> Result<McGrid> {
    if trials < MIN_MC_TRIALS {
        return Err(Error::InvalidArgument(format!(
            "Monte Carlo moments need at least {MIN_MC_TRIALS} trials, got {trials}"
        )));
    }
    if n == 0 || kmax == 0 {
        return Err(Error::InvalidArgument("need n >= 1 and kmax >= 1".into()));
    }
    let width = (lmax + 1) as usize;
    let cells = kmax as usize * width;
    let per_trial = map_indexed(trials as u64, threads, |t| -> Result<Vec<Complex64>> {
        let m = sample_centrosymmetric(n, dist, SeedStream::new(master_seed, t))?;
        let tr = trace_powers(m.matrix(), kmax.max(lmax))?;
        let mut out = Vec::with_capacity(cells);
        for k in 1..=kmax as usize {
            for l in 0..width {
                out.push(if l == 0 { tr[k - 1] } else { tr[k - 1] * tr[l - 1].conj() });
            }
        }
        Ok(out)
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let tf = trials as f64;
    let estimates = (0..cells)
        .map(|c| {
            let mean = per_trial.iter().map(|v| v[c]).sum::<Complex64>() / tf;
            let var_re = per_trial.iter().map(|v| (v[c].re - mean.re).powi(2)).sum::<f64>() / (tf - 1.0);
            let var_im = per_trial.iter().map(|v| (v[c].im - mean.im).powi(2)).sum::<f64>() / (tf - 1.0);
            McEstimate {
                mean,
                se: ((var_re + var_im) / tf).sqrt(),
                trials,
            }
        })
        .collect();
    Ok(McGrid {
        n,
        kmax,
        lmax,
        estimates,
    })
}

pub fn mc_trace_moment(
    q: MomentQuery,
    trials: usize,
    master_seed: u64,
    dist: &EntryDistribution,
    threads: Option<usize>,
) -> Result<McEstimate> {
    let grid = mc_trace_moment_grid(q.n, q.k, q.l, trials, master_seed, dist, threads)?;
    Ok(grid.get(q.k, q.l).expect("query lies inside its own grid"))
}

/// Result record `{n, k, l, exact, method, mc, prediction}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentResult {
    pub n: usize,
    pub k: u32,
    pub l: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactMoment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<ExactMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McEstimate>,
    pub prediction: f64,
}

mod complex_pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gauss() -> EntryDistribution {
        EntryDistribution::default()
    }

    fn exact(n: usize, k: u32, l: u32) -> ExactMoment {
        exact_mixed_trace_moment(MomentQuery::new(n, k, l).unwrap(), &gauss()).unwrap()
    }

    fn wick(n: usize, k: u32, l: u32) -> ExactMoment {
        wick_mixed_trace_moment(MomentQuery::new(n, k, l).unwrap(), &gauss()).unwrap()
    }

    #[test]
    fn hand_counted_values() {
        assert_eq!(exact(4, 1, 1), ExactMoment::new(2, 1));
        assert_eq!(exact(5, 1, 1), ExactMoment::new(9, 5));
        assert_eq!(exact(4, 1, 2), ExactMoment::zero());
    }

    #[test]
    fn single_traces_vanish() {
        assert!(exact_single_trace_moment(4, 2, &gauss()).unwrap().is_zero());
        assert!(exact_single_trace_moment(5, 3, &gauss()).unwrap().is_zero());
        assert!(exact_single_trace_moment(3, 1, &gauss()).unwrap().is_zero());
    }

    #[test]
    fn one_by_one_matches_gaussian_moments() {
        // M = x with |x|^2 ~ Exp(1): E[x^k conj(x)^k] = k!.
        for k in 1..=4 {
            assert_eq!(exact(1, k, k), ExactMoment::new(factorial(k), 1));
        }
    }

    #[test]
    fn two_by_two_hand_count() {
        // Tr M = 2a, so E|Tr M|^2 = 4 E|a|^2 = 4 / 2.
        assert_eq!(exact(2, 1, 1), ExactMoment::new(2, 1));
    }

    #[test]
    fn enumeration_and_wick_agree() {
        for n in 1..=5 {
            for k in 1..=3 {
                for l in 0..=3 {
                    assert_eq!(exact(n, k, l), wick(n, k, l), "n={n} k={k} l={l}");
                }
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let q = MomentQuery::new(64, 3, 3).unwrap();
        assert!(matches!(
            exact_mixed_trace_moment(q, &gauss()),
            Err(Error::BudgetExceeded { .. })
        ));
        let (_, method) = exact_moment(q, &gauss()).unwrap();
        assert_eq!(method, ExactMethod::WickMatching);
    }

    #[test]
    fn predictions() {
        assert_eq!(asymptotic_prediction(1, 1), 2.0);
        assert_eq!(asymptotic_prediction(5, 5), 10.0);
        assert_eq!(asymptotic_prediction(2, 3), 0.0);
    }

    #[test]
    fn mc_requires_enough_trials() {
        let q = MomentQuery::new(4, 1, 1).unwrap();
        assert!(mc_trace_moment(q, 10, 1, &gauss(), Some(1)).is_err());
    }

    #[test]
    fn mc_agrees_with_exact_small() {
        let q = MomentQuery::new(4, 1, 1).unwrap();
        let est = mc_trace_moment(q, 20_000, 17, &gauss(), None).unwrap();
        assert!(est.agrees_with(exact(4, 1, 1).to_complex(), 4.0), "{est:?}");
    }

    #[test]
    fn record_json_shape() {
        let r = MomentResult {
            n: 4,
            k: 1,
            l: 1,
            exact: Some(ExactMoment::new(2, 1)),
            exact_text: Some("2/1".into()),
            method: Some(ExactMethod::Enumeration),
            mc: Some(McEstimate { mean: Complex64::new(2.01, 0.0), se: 0.02, trials: 1000 }),
            prediction: 2.0,
        };
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["exact"], serde_json::json!([2, 1]));
        assert_eq!(v["mc"]["mean"], serde_json::json!([2.01, 0.0]));
        assert_eq!(v["mc"]["trials"], 1000);
        assert_eq!(v["method"], "enumeration");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn conjugation_symmetry(n in 1usize..=5, k in 1u32..=3, l in 1u32..=3) {
            // Values are real, so conj(exact(n, l, k)) is exact(n, l, k).
            prop_assert_eq!(exact(n, k, l), exact(n, l, k));
        }

        #[test]
        fn unequal_powers_vanish(n in 1usize..=5, k in 1u32..=3, l in 0u32..=3) {
            prop_assume!(k != l);
            prop_assert!(exact(n, k, l).is_zero());
        }
    }
}
