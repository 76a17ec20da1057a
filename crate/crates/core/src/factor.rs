//! Factorizations, length sets and delta sets.
//!
//! Factorizations are taken with respect to the generator list of the view
//! (sorted ascending). Length sets are computed through the difference
//! semigroup `U = <a_i - a_1 : i >= 2>`: a length `l` occurs for `x` iff
//! `r = x - l*a_1` lies in `U` with a representation of at most `l` parts,
//! i.e. iff `r + a_1 * mu(r) <= x` where `mu` is the minimum length in `U`.

use std::collections::{BTreeSet, HashMap};

use num_integer::Integer;
use thiserror::Error;

use crate::numsg::{NumsgError, SemigroupView};

pub const DEFAULT_FACTORIZATION_CAP: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FactorError {
    #[error(transparent)]
    Semigroup(#[from] NumsgError),
    #[error("{predicted} factorizations predicted, above the cap of {cap}")]
    TooManyFactorizations { predicted: u128, cap: u128 },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Factorization {
    pub coeffs: Vec<u64>,
}

impl Factorization {
    pub fn length(&self) -> u64 {
        self.coeffs.iter().sum()
    }

    pub fn evaluate(&self, gens: &[u64]) -> u64 {
        self.coeffs.iter().zip(gens).map(|(z, a)| z * a).sum()
    }
}

/// Number of factorizations of `m` (coin-change count), saturating.
pub fn count_factorizations(gens: &[u64], m: u64) -> u128 {
    let mut ways = vec![0u128; m as usize + 1];
    ways[0] = 1;
    for &a in gens {
        for t in a as usize..=m as usize {
            ways[t] = ways[t].saturating_add(ways[t - a as usize]);
        }
    }
    ways[m as usize]
}

pub fn factorizations(view: &SemigroupView, m: u64) -> Result<Vec<Factorization>, FactorError> {
    factorizations_capped(view, m, DEFAULT_FACTORIZATION_CAP)
}

/// All factorizations of `m`, ordered by the last coordinate first, then the
/// one before it, and so on (so `(10,0,0)` precedes `(7,2,0)` precedes `(0,0,3)`).
pub fn factorizations_capped(
    view: &SemigroupView,
    m: u64,
    cap: u128,
) -> Result<Vec<Factorization>, FactorError> {
    let gens = view.gens();
    let predicted = count_factorizations(gens, m);
    if predicted > cap {
        return Err(FactorError::TooManyFactorizations { predicted, cap });
    }
    if predicted == 0 {
        return Ok(Vec::new());
    }
    // reach[i][t]: t is a combination of gens[0..=i].
    let mut reach = Vec::with_capacity(gens.len());
    let mut prev = vec![false; m as usize + 1];
    prev[0] = true;
    for &a in gens {
        let mut cur = prev.clone();
        for t in a as usize..=m as usize {
            cur[t] |= cur[t - a as usize];
        }
        reach.push(cur.clone());
        prev = cur;
    }
    let mut out = Vec::with_capacity(predicted as usize);
    let mut z = vec![0u64; gens.len()];
    enumerate(gens, &reach, gens.len() - 1, m, &mut z, &mut out);
    Ok(out)
}

fn enumerate(
    gens: &[u64],
    reach: &[Vec<bool>],
    idx: usize,
    rem: u64,
    z: &mut [u64],
    out: &mut Vec<Factorization>,
) {
    if idx == 0 {
        if rem.is_multiple_of(gens[0]) {
            z[0] = rem / gens[0];
            out.push(Factorization { coeffs: z.to_vec() });
        }
        return;
    }
    let a = gens[idx];
    for c in 0..=rem / a {
        let r = rem - c * a;
        if reach[idx - 1][r as usize] {
            z[idx] = c;
            enumerate(gens, reach, idx - 1, r, z, out);
        }
    }
    z[idx] = 0;
}

fn distinct_gens(view: &SemigroupView) -> Vec<u64> {
    let mut g = view.gens().to_vec();
    g.dedup();
    g
}

/// Minimum number of parts over representations in `<steps>`, for `0..=limit`.
fn min_lengths(steps: &[u64], limit: usize) -> Vec<u32> {
    let mut mu = vec![u32::MAX; limit + 1];
    mu[0] = 0;
    for t in 1..=limit {
        mu[t] = steps
            .iter()
            .filter(|&&b| b as usize <= t)
            .map(|&b| mu[t - b as usize])
            .filter(|&v| v != u32::MAX)
            .min()
            .map_or(u32::MAX, |v| v + 1);
    }
    mu
}

/// Sorted distinct lengths of the factorizations of `m`; empty when `m` is not an element.
pub fn length_set(view: &SemigroupView, m: u64) -> Vec<u64> {
    if !view.contains(m) {
        return Vec::new();
    }
    let a = distinct_gens(view);
    let a1 = a[0];
    let diffs: Vec<u64> = a[1..].iter().map(|x| x - a1).collect();
    let mu = min_lengths(&diffs, m as usize);
    (0..=m / a1)
        .filter(|&l| {
            let r = (m - l * a1) as usize;
            mu[r] != u32::MAX && u64::from(mu[r]) <= l
        })
        .collect()
}

fn successive_differences(lengths: &[u64]) -> Vec<u64> {
    let set: BTreeSet<u64> = lengths.windows(2).map(|w| w[1] - w[0]).collect();
    set.into_iter().collect()
}

pub fn delta_of_element(view: &SemigroupView, m: u64) -> Vec<u64> {
    successive_differences(&length_set(view, m))
}

/// `2 k a_k^2`, the default scan bound for [`delta_of_semigroup`].
pub fn default_delta_bound(view: &SemigroupView) -> u64 {
    let a = distinct_gens(view);
    let ak = *a.last().expect("nonempty");
    2 * a.len() as u64 * ak * ak
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaScan {
    pub values: Vec<u64>,
    /// True when the scan reached the default bound. The bound is heuristic.
    pub complete: bool,
}

/// Union of `delta_of_element(m)` over the elements `m <= scan_bound`, found by
/// carrying length sets forward with `L(t) = U_i (L(t - a_i) + 1)`.
pub fn delta_of_semigroup(view: &SemigroupView, scan_bound: u64) -> Result<DeltaScan, FactorError> {
    if !view.is_numerical() {
        return Err(NumsgError::NotNumerical { gcd: view.gcd() }.into());
    }
    let a = distinct_gens(view);
    let a1 = a[0];
    let ak = *a.last().expect("nonempty");
    let slots = ak as usize + 1;
    // Slot t holds L(t) as a bitset over [ceil(t/ak), t/a1].
    let mut ring: Vec<Option<(u64, Vec<u64>)>> = vec![None; slots];
    ring[0] = Some((0, vec![1]));
    let mut deltas = BTreeSet::new();
    for t in 1..=scan_bound {
        let lo = t.div_ceil(ak);
        let hi = t / a1;
        let mut entry = None;
        if lo <= hi {
            let width = (hi - lo + 1) as usize;
            let mut bits = vec![0u64; width.div_ceil(64)];
            let mut any = false;
            for &g in a.iter().filter(|&&g| g <= t) {
                if let Some((plo, pbits)) = &ring[((t - g) % slots as u64) as usize] {
                    or_shifted(&mut bits, pbits, (plo + 1 - lo) as usize);
                    any = true;
                }
            }
            if any {
                collect_gaps(&bits, &mut deltas);
                entry = Some((lo, bits));
            }
        }
        ring[(t % slots as u64) as usize] = entry;
    }
    Ok(DeltaScan {
        values: deltas.into_iter().collect(),
        complete: scan_bound >= default_delta_bound(view),
    })
}

fn or_shifted(dst: &mut [u64], src: &[u64], offset: usize) {
    let (ws, bs) = (offset / 64, offset % 64);
    for (i, &w) in src.iter().enumerate() {
        if w == 0 {
            continue;
        }
        if let Some(d) = dst.get_mut(i + ws) {
            *d |= w << bs;
        }
        if bs > 0 {
            if let Some(d) = dst.get_mut(i + ws + 1) {
                *d |= w >> (64 - bs);
            }
        }
    }
}

fn collect_gaps(bits: &[u64], out: &mut BTreeSet<u64>) {
    let mut prev: Option<usize> = None;
    for (i, &word) in bits.iter().enumerate() {
        let mut w = word;
        while w != 0 {
            let pos = i * 64 + w.trailing_zeros() as usize;
            if let Some(p) = prev {
                out.insert((pos - p) as u64);
            }
            prev = Some(pos);
            w &= w - 1;
        }
    }
}

/// The full delta set `Delta(S)`.
///
/// Lengths of `x` correspond to the elements `r` of `U` in the class of `x`
/// modulo `a_1` with `w(r) = r + a_1 mu(r) <= x`; consecutive lengths are
/// consecutive such `r`, `a_1 * delta` apart. So `Delta(S)` collects the gaps
/// of every sublevel set `{r : w(r) <= x}` in every class. Elements of a class
/// closer than `D = a_1 C b_k / a_k` (with `C` the excess of `mu(r)` over
/// `r / b_k`) are the only ones whose `w` order can disagree with their order.
/// Past the point where `U` contains every multiple of `g` and
/// `mu(r) = mu(r - b_k) + 1`, shifting by `b_k` maps every sublevel pattern
/// onto a pattern of another class, so it is enough to replay insertions up to
/// a finite limit.
pub fn delta_set(view: &SemigroupView) -> Result<Vec<u64>, FactorError> {
    if !view.is_numerical() {
        return Err(NumsgError::NotNumerical { gcd: view.gcd() }.into());
    }
    let a = distinct_gens(view);
    if a.len() == 1 {
        return Ok(Vec::new());
    }
    let a1 = a[0];
    let ak = *a.last().expect("nonempty");
    let diffs: Vec<u64> = a[1..].iter().map(|x| x - a1).collect();
    let g = diffs.iter().fold(0u64, |acc, &d| acc.gcd(&d));
    let reduced: Vec<u64> = diffs.iter().map(|d| d / g).collect();
    let bk = *diffs.last().expect("nonempty");
    let bkr = bk / g;
    let b_prev = if reduced.len() >= 2 { reduced[reduced.len() - 2] } else { 0 };

    let u_view = SemigroupView::build(&reduced)?;
    let r_full = g * (u_view.frobenius()? + 1) as u64;
    let x_mu = (bkr - 1) * b_prev + 1;
    let r_mu = g * x_mu;

    let mut mu = min_lengths(&reduced, (x_mu + bkr) as usize);
    let excess = mu
        .iter()
        .enumerate()
        .filter(|(_, &m)| m != u32::MAX)
        .map(|(x, &m)| bkr * u64::from(m) - x as u64)
        .max()
        .unwrap_or(0);
    let window = a1 * g * excess / ak;
    let step = g * a1;
    let r_base = r_full.max(r_mu) + window + step;
    let r_lim = r_base + bk + window + step;
    let r_ext = r_lim + step + window;
    mu = min_lengths(&reduced, (r_ext / g) as usize);

    let mut classes: HashMap<u64, Vec<(u64, u64)>> = HashMap::new();
    for (x, &m) in mu.iter().enumerate() {
        if m == u32::MAX {
            continue;
        }
        let r = g * x as u64;
        classes
            .entry(r % a1)
            .or_default()
            .push((r + a1 * u64::from(m), r));
    }

    let mut deltas = BTreeSet::new();
    for mut elems in classes.into_values() {
        let horizon = elems
            .iter()
            .filter(|&&(_, r)| r > r_lim)
            .map(|&(w, _)| w)
            .min()
            .expect("every class has elements past the limit");
        elems.sort_unstable();
        let mut present = BTreeSet::new();
        let mut i = 0;
        while i < elems.len() && elems[i].0 < horizon {
            let w = elems[i].0;
            let start = i;
            while i < elems.len() && elems[i].0 == w {
                present.insert(elems[i].1);
                i += 1;
            }
            for &(_, r) in &elems[start..i] {
                if let Some(&p) = present.range(..r).next_back() {
                    deltas.insert((r - p) / a1);
                }
                if let Some(&s) = present.range(r + 1..).next() {
                    deltas.insert((s - r) / a1);
                }
            }
        }
    }
    Ok(deltas.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn view(g: &[u64]) -> SemigroupView {
        SemigroupView::build(g).unwrap()
    }

    fn brute_factorizations(gens: &[u64], m: u64) -> BTreeSet<Vec<u64>> {
        fn rec(gens: &[u64], i: usize, rem: u64, cur: &mut Vec<u64>, out: &mut BTreeSet<Vec<u64>>) {
            if i == gens.len() {
                if rem == 0 {
                    out.insert(cur.clone());
                }
                return;
            }
            for c in 0..=rem / gens[i] {
                cur.push(c);
                rec(gens, i + 1, rem - c * gens[i], cur, out);
                cur.pop();
            }
        }
        let mut out = BTreeSet::new();
        rec(gens, 0, m, &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn mcnugget_sixty() {
        let s = view(&[6, 9, 20]);
        let f: Vec<Vec<u64>> = factorizations(&s, 60)
            .unwrap()
            .into_iter()
            .map(|f| f.coeffs)
            .collect();
        assert_eq!(
            f,
            vec![vec![10, 0, 0], vec![7, 2, 0], vec![4, 4, 0], vec![1, 6, 0], vec![0, 0, 3]]
        );
        assert_eq!(f.iter().cloned().collect::<BTreeSet<_>>(), brute_factorizations(&[6, 9, 20], 60));
        assert_eq!(length_set(&s, 60), vec![3, 7, 8, 9, 10]);
        assert_eq!(delta_of_element(&s, 60), vec![1, 4]);
    }

    #[test]
    fn trivial_elements() {
        let s = view(&[3, 5, 7]);
        assert_eq!(factorizations(&s, 0).unwrap(), vec![Factorization { coeffs: vec![0, 0, 0] }]);
        assert!(factorizations(&s, 1).unwrap().is_empty());
        assert_eq!(length_set(&s, 0), vec![0]);
        assert!(length_set(&s, 1).is_empty());
        assert!(delta_of_element(&s, 0).is_empty());
        assert!(delta_of_element(&s, 1).is_empty());
        let t = view(&[2, 3]);
        assert_eq!(length_set(&t, 6), vec![2, 3]);
        assert_eq!(delta_of_element(&t, 6), vec![1]);
    }

    #[test]
    fn cap_guards_memory() {
        let s = view(&[1, 2, 3]);
        let err = factorizations_capped(&s, 1000, 1000).unwrap_err();
        assert!(matches!(err, FactorError::TooManyFactorizations { cap: 1000, .. }));
        assert_eq!(count_factorizations(&[6, 9, 20], 60), 5);
    }

    #[test]
    fn semigroup_delta_sets() {
        let s = view(&[6, 9, 20]);
        let scan = delta_of_semigroup(&s, default_delta_bound(&s)).unwrap();
        assert!(scan.complete);
        assert!(scan.values.contains(&1) && scan.values.contains(&4));
        assert_eq!(delta_set(&s).unwrap(), scan.values);

        let t = view(&[2, 3]);
        assert_eq!(delta_of_semigroup(&t, default_delta_bound(&t)).unwrap().values, vec![1]);
        assert_eq!(delta_set(&t).unwrap(), vec![1]);

        let n = view(&[1]);
        assert!(delta_of_semigroup(&n, 100).unwrap().values.is_empty());
        assert!(delta_set(&n).unwrap().is_empty());

        let partial = delta_of_semigroup(&s, 10).unwrap();
        assert!(!partial.complete);

        assert!(delta_of_semigroup(&view(&[4, 6]), 10).is_err());
        assert!(delta_set(&view(&[4, 6])).is_err());
    }

    #[test]
    fn two_generator_delta_is_the_difference() {
        for (a, b) in [(5u64, 7u64), (7, 10), (13, 22), (343, 515)] {
            assert_eq!(delta_set(&view(&[a, b])).unwrap(), vec![b - a]);
        }
    }

    #[test]
    fn exact_delta_agrees_with_long_scans() {
        // Scans far past 2 k a_2 a_k^2 + a_1 a_k, where delta sets of elements repeat.
        for g in [&[5u64, 8, 9][..], &[7, 9, 16], &[4, 11, 13, 17], &[10, 11, 19], &[6, 7, 15]] {
            let s = view(g);
            let k = g.len() as u64;
            let bound = 2 * k * g[1] * g[k as usize - 1].pow(2) + g[0] * g[k as usize - 1];
            assert_eq!(delta_set(&s).unwrap(), delta_of_semigroup(&s, bound).unwrap().values, "{g:?}");
        }
    }

    fn numerical_gens() -> impl Strategy<Value = Vec<u64>> {
        prop::collection::vec(2u64..16, 2..5).prop_filter("gcd 1", |g| {
            g.iter().fold(0u64, |a, &b| a.gcd(&b)) == 1
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn factorizations_are_complete_and_exact(g in numerical_gens(), m in 0u64..80) {
            let s = view(&g);
            let fs = factorizations(&s, m).unwrap();
            for f in &fs {
                prop_assert_eq!(f.evaluate(s.gens()), m);
            }
            let got: BTreeSet<Vec<u64>> = fs.iter().map(|f| f.coeffs.clone()).collect();
            prop_assert_eq!(got.len(), fs.len());
            prop_assert_eq!(got, brute_factorizations(s.gens(), m));
            let lengths: BTreeSet<u64> = fs.iter().map(Factorization::length).collect();
            let ls = length_set(&s, m);
            prop_assert_eq!(&ls, &lengths.into_iter().collect::<Vec<_>>());
            if let (Some(lo), Some(hi)) = (ls.first(), ls.last()) {
                prop_assert!(ls.len() as u64 <= hi - lo + 1);
            }
        }

        #[test]
        fn element_deltas_lie_in_the_semigroup_delta(g in numerical_gens()) {
            let s = view(&g);
            let bound = 400;
            let scan = delta_of_semigroup(&s, bound).unwrap();
            let exact = delta_set(&s).unwrap();
            for m in 0..=bound {
                for d in delta_of_element(&s, m) {
                    prop_assert!(scan.values.contains(&d));
                }
            }
            for d in &scan.values {
                prop_assert!(exact.contains(d));
            }
        }

        #[test]
        fn exact_delta_matches_scan(g in prop::collection::vec(2u64..13, 2..4)
            .prop_filter("gcd 1", |g| g.iter().fold(0u64, |a, &b| a.gcd(&b)) == 1)) {
            let s = view(&g);
            let a = s.gens();
            let k = a.len() as u64;
            let ak = a[a.len() - 1];
            let bound = 2 * k * a[1] * ak * ak + a[0] * ak;
            prop_assert_eq!(delta_set(&s).unwrap(), delta_of_semigroup(&s, bound).unwrap().values);
        }
    }
}
