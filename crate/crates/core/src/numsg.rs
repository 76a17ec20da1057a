//! Invariants of a single numerical semigroup `S = <a_1, ..., a_k>`.
//!
//! Membership is answered from the Apéry set of `S / d` with respect to its
//! multiplicity, computed once at build time as shortest paths on the residues
//! modulo the multiplicity. Every query is then O(1), which keeps sweeps over
//! generators of size ~10^4 cheap.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_integer::Integer;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumsgError {
    #[error("semigroup has gcd {gcd} > 1 and is not numerical")]
    NotNumerical { gcd: u64 },
    #[error("{0} is not an element of the semigroup")]
    NotMember(u64),
    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: u64 },
    #[error("a semigroup needs at least one generator, all positive")]
    InvalidGenerators,
}

#[derive(Debug, Clone)]
pub struct SemigroupView {
    gens: Vec<u64>,
    gcd: u64,
    /// Smallest generator of `S / gcd`.
    reduced_mult: u64,
    /// `apery[r]` is the least element of `S / gcd` congruent to `r` mod `reduced_mult`.
    apery: Vec<u64>,
}

impl SemigroupView {
    pub fn build(gens: &[u64]) -> Result<Self, NumsgError> {
        if gens.is_empty() || gens.contains(&0) {
            return Err(NumsgError::InvalidGenerators);
        }
        let mut sorted = gens.to_vec();
        sorted.sort_unstable();
        let gcd = sorted.iter().fold(0u64, |g, &a| g.gcd(&a));
        let reduced: Vec<u64> = sorted.iter().map(|a| a / gcd).collect();
        let m = reduced[0];
        let apery = apery_by_shortest_paths(&reduced, m);
        Ok(Self {
            gens: sorted,
            gcd,
            reduced_mult: m,
            apery,
        })
    }

    pub fn gens(&self) -> &[u64] {
        &self.gens
    }

    pub fn gcd(&self) -> u64 {
        self.gcd
    }

    /// Least positive element.
    pub fn multiplicity(&self) -> u64 {
        self.gens[0]
    }

    pub fn is_numerical(&self) -> bool {
        self.gcd == 1
    }

    /// The numerical semigroup `S / d`.
    pub fn normalized(&self) -> SemigroupView {
        Self {
            gens: self.gens.iter().map(|a| a / self.gcd).collect(),
            gcd: 1,
            reduced_mult: self.reduced_mult,
            apery: self.apery.clone(),
        }
    }

    pub fn contains(&self, t: u64) -> bool {
        if !t.is_multiple_of(self.gcd) {
            return false;
        }
        let t = t / self.gcd;
        t >= self.apery[(t % self.reduced_mult) as usize]
    }

    pub fn contains_i64(&self, t: i64) -> bool {
        t >= 0 && self.contains(t as u64)
    }

    fn require_numerical(&self) -> Result<(), NumsgError> {
        if self.is_numerical() {
            Ok(())
        } else {
            Err(NumsgError::NotNumerical { gcd: self.gcd })
        }
    }

    /// Membership table over `[0, bound]` from the coin-problem recurrence
    /// `t in S <=> t - a_i in S` for some generator `a_i <= t`.
    pub fn membership_table(&self, bound: u64) -> Vec<bool> {
        let mut table = vec![false; bound as usize + 1];
        table[0] = true;
        for t in 1..=bound as usize {
            table[t] = self
                .gens
                .iter()
                .any(|&a| (a as usize) <= t && table[t - a as usize]);
        }
        table
    }

    /// Largest gap, with -1 for `S = N`.
    pub fn frobenius(&self) -> Result<i64, NumsgError> {
        self.require_numerical()?;
        let max = *self.apery.iter().max().expect("nonempty");
        Ok(max as i64 - self.reduced_mult as i64)
    }

    pub fn genus(&self) -> Result<u64, NumsgError> {
        self.require_numerical()?;
        // The gaps congruent to r are r, r + m, ..., w_r - m.
        Ok(self.apery.iter().map(|w| w / self.reduced_mult).sum())
    }

    pub fn gaps(&self) -> Result<Vec<u64>, NumsgError> {
        let f = self.frobenius()?;
        Ok((0..=f).map(|t| t as u64).filter(|&t| !self.contains(t)).collect())
    }

    /// `Ap(S, x)` for `x` a positive element, sorted.
    pub fn apery_set(&self, x: u64) -> Result<Vec<u64>, NumsgError> {
        self.require_numerical()?;
        if x == 0 || !self.contains(x) {
            return Err(NumsgError::NotMember(x));
        }
        if x == self.reduced_mult {
            return Ok(self.sorted_apery());
        }
        let mut out: Vec<u64> = (0..x)
            .map(|r| {
                let mut t = r;
                while !self.contains(t) {
                    t += x;
                }
                t
            })
            .collect();
        out.sort_unstable();
        Ok(out)
    }

    fn sorted_apery(&self) -> Vec<u64> {
        let mut out = self.apery.clone();
        out.sort_unstable();
        out
    }

    /// The `i`-th smallest element (1-based) of the Apéry set with respect to the multiplicity.
    pub fn ith_apery_element(&self, i: usize) -> Result<u64, NumsgError> {
        self.require_numerical()?;
        let m = self.reduced_mult;
        if i == 0 || i as u64 > m {
            return Err(NumsgError::IndexOutOfRange { index: i, max: m });
        }
        Ok(self.sorted_apery()[i - 1])
    }

    fn is_apery_element(&self, v: u64) -> bool {
        self.apery[(v % self.reduced_mult) as usize] == v
    }

    /// Pseudo-Frobenius numbers. Every one of them is `w - m` for some `w` in
    /// `Ap(S, m)` such that no `w + a_i` stays in `Ap(S, m)`.
    pub fn pseudo_frobenius(&self) -> Result<Vec<i64>, NumsgError> {
        self.require_numerical()?;
        let m = self.reduced_mult as i64;
        let mut pf: Vec<i64> = self
            .apery
            .iter()
            .filter(|&&w| self.gens.iter().all(|&a| !self.is_apery_element(w + a)))
            .map(|&w| w as i64 - m)
            .collect();
        pf.sort_unstable();
        Ok(pf)
    }

    pub fn semigroup_type(&self) -> Result<usize, NumsgError> {
        Ok(self.pseudo_frobenius()?.len())
    }

    pub fn is_symmetric(&self) -> Result<bool, NumsgError> {
        let f = self.frobenius()?;
        Ok((0..=f).all(|z| self.contains_i64(z) || self.contains_i64(f - z)))
    }

    pub fn is_pseudo_symmetric(&self) -> Result<bool, NumsgError> {
        let f = self.frobenius()?;
        if f < 0 || f % 2 != 0 {
            return Ok(false);
        }
        Ok((0..=f).all(|x| self.contains_i64(x) || self.contains_i64(f - x) || 2 * x == f))
    }

    /// `N` itself is not irreducible: irreducibility needs a proper semigroup.
    pub fn is_irreducible(&self) -> Result<bool, NumsgError> {
        let f = self.frobenius()?;
        if f < 0 {
            return Ok(false);
        }
        if f % 2 != 0 {
            self.is_symmetric()
        } else {
            self.is_pseudo_symmetric()
        }
    }

    pub fn fundamental_gaps(&self) -> Result<Vec<u64>, NumsgError> {
        let f = self.frobenius()?;
        Ok((1..=f.max(0) as u64)
            .filter(|&x| !self.contains(x) && self.contains(2 * x) && self.contains(3 * x))
            .collect())
    }
}

/// Least element of `<gens>` in each residue class modulo `m` (Dijkstra on `Z/m`).
fn apery_by_shortest_paths(gens: &[u64], m: u64) -> Vec<u64> {
    let mut dist = vec![u64::MAX; m as usize];
    dist[0] = 0;
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((0u64, 0u64)));
    let steps: Vec<u64> = gens.iter().copied().filter(|a| a % m != 0).collect();
    while let Some(Reverse((d, r))) = heap.pop() {
        if d > dist[r as usize] {
            continue;
        }
        for &a in &steps {
            let next = ((r + a) % m) as usize;
            let nd = d + a;
            if nd < dist[next] {
                dist[next] = nd;
                heap.push(Reverse((nd, next as u64)));
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Definitional reference values from a brute-force membership table.
    struct Oracle {
        member: Vec<bool>,
        bound: i64,
    }

    impl Oracle {
        fn new(gens: &[u64]) -> Self {
            let bound = (gens.iter().max().unwrap() * gens.iter().max().unwrap() * 4 + 10) as usize;
            let mut member = vec![false; bound + 1];
            member[0] = true;
            for t in 1..=bound {
                member[t] = gens.iter().any(|&a| a as usize <= t && member[t - a as usize]);
            }
            Self {
                member,
                bound: bound as i64,
            }
        }
        fn has(&self, t: i64) -> bool {
            t >= 0 && (t > self.bound || self.member[t as usize])
        }
        fn gaps(&self) -> Vec<i64> {
            (0..=self.bound).filter(|&t| !self.has(t)).collect()
        }
        fn frobenius(&self) -> i64 {
            self.gaps().last().copied().unwrap_or(-1)
        }
        fn pf(&self) -> Vec<i64> {
            let f = self.frobenius();
            if f < 0 {
                return vec![-1];
            }
            (0..=f)
                .filter(|&x| !self.has(x))
                .filter(|&x| (1..=f + x + 1).filter(|&s| self.has(s)).all(|s| self.has(x + s)))
                .collect()
        }
    }

    fn view(g: &[u64]) -> SemigroupView {
        SemigroupView::build(g).unwrap()
    }

    #[test]
    fn three_five_seven() {
        let s = view(&[3, 5, 7]);
        assert!(s.is_numerical());
        assert_eq!(s.gcd(), 1);
        assert_eq!(s.frobenius().unwrap(), 4);
        assert_eq!(s.gaps().unwrap(), vec![1, 2, 4]);
        assert_eq!(s.genus().unwrap(), 3);
        assert_eq!(s.apery_set(3).unwrap(), vec![0, 5, 7]);
        assert_eq!(s.ith_apery_element(1).unwrap(), 0);
        assert_eq!(s.ith_apery_element(2).unwrap(), 5);
        assert_eq!(s.pseudo_frobenius().unwrap(), vec![2, 4]);
        assert_eq!(s.semigroup_type().unwrap(), 2);
        assert!(!s.is_symmetric().unwrap());
        assert!(s.is_pseudo_symmetric().unwrap());
        assert!(s.is_irreducible().unwrap());
        // 1: 2 is a gap; 2: 4 is a gap; 4: 8 and 12 are elements.
        assert_eq!(s.fundamental_gaps().unwrap(), vec![4]);
    }

    #[test]
    fn two_three() {
        let s = view(&[2, 3]);
        assert_eq!(s.frobenius().unwrap(), 1);
        assert_eq!(s.gaps().unwrap(), vec![1]);
        assert_eq!(s.genus().unwrap(), 1);
        assert_eq!(s.apery_set(2).unwrap(), vec![0, 3]);
        assert_eq!(s.ith_apery_element(2).unwrap(), 3);
        assert_eq!(s.pseudo_frobenius().unwrap(), vec![1]);
        assert!(s.is_symmetric().unwrap());
        assert!(s.is_irreducible().unwrap());
        assert_eq!(s.fundamental_gaps().unwrap(), vec![1]);
    }

    #[test]
    fn three_four_is_symmetric() {
        let s = view(&[3, 4]);
        let o = Oracle::new(&[3, 4]);
        let f = o.frobenius();
        let brute = o.gaps().iter().all(|&z| o.has(f - z));
        assert!(brute);
        assert_eq!(s.is_symmetric().unwrap(), brute);
    }

    #[test]
    fn naturals_conventions() {
        let s = view(&[1]);
        assert!(s.is_numerical());
        assert_eq!(s.frobenius().unwrap(), -1);
        assert_eq!(s.genus().unwrap(), 0);
        assert_eq!(s.apery_set(1).unwrap(), vec![0]);
        assert_eq!(s.semigroup_type().unwrap(), 1);
        assert!(s.is_symmetric().unwrap());
        assert!(!s.is_irreducible().unwrap());
        assert!(s.fundamental_gaps().unwrap().is_empty());
        assert!(s.gaps().unwrap().is_empty());
    }

    #[test]
    fn non_numerical_is_refused() {
        let s = view(&[4, 6]);
        assert_eq!(s.gcd(), 2);
        assert!(!s.is_numerical());
        assert_eq!(s.frobenius(), Err(NumsgError::NotNumerical { gcd: 2 }));
        assert_eq!(s.genus(), Err(NumsgError::NotNumerical { gcd: 2 }));
        assert!(s.contains(10) && !s.contains(2) && !s.contains(11));
        let t = s.normalized();
        assert_eq!(t.gens(), &[2, 3]);
        assert_eq!(t.frobenius().unwrap(), 1);
    }

    #[test]
    fn error_paths() {
        assert_eq!(SemigroupView::build(&[]).unwrap_err(), NumsgError::InvalidGenerators);
        assert_eq!(SemigroupView::build(&[3, 0]).unwrap_err(), NumsgError::InvalidGenerators);
        let s = view(&[3, 5, 7]);
        assert_eq!(s.apery_set(4), Err(NumsgError::NotMember(4)));
        assert_eq!(s.apery_set(0), Err(NumsgError::NotMember(0)));
        assert_eq!(
            s.ith_apery_element(4),
            Err(NumsgError::IndexOutOfRange { index: 4, max: 3 })
        );
        assert!(s.ith_apery_element(0).is_err());
    }

    #[test]
    fn frobenius_is_always_pseudo_frobenius() {
        for g in [&[5u64, 7, 9][..], &[6, 9, 20], &[4, 7], &[10, 11, 12, 13]] {
            let s = view(g);
            let f = s.frobenius().unwrap();
            assert!(s.pseudo_frobenius().unwrap().contains(&f));
        }
    }

    fn numerical_gens() -> impl Strategy<Value = Vec<u64>> {
        prop::collection::vec(1u64..40, 1..5).prop_filter("gcd 1", |g| {
            g.iter().fold(0u64, |a, &b| a.gcd(&b)) == 1
        })
    }

    proptest! {
        #[test]
        fn matches_brute_force(g in numerical_gens()) {
            let s = view(&g);
            let o = Oracle::new(&g);
            prop_assert_eq!(s.frobenius().unwrap(), o.frobenius());
            prop_assert_eq!(s.genus().unwrap() as usize, o.gaps().len());
            prop_assert_eq!(s.pseudo_frobenius().unwrap(), o.pf());
            let f = o.frobenius();
            let sym = o.gaps().iter().all(|&z| o.has(f - z));
            prop_assert_eq!(s.is_symmetric().unwrap(), sym);
            let fg: Vec<u64> = o.gaps().into_iter()
                .filter(|&x| o.has(2 * x) && o.has(3 * x)).map(|x| x as u64).collect();
            prop_assert_eq!(s.fundamental_gaps().unwrap(), fg);
        }

        #[test]
        fn apery_table_agrees_with_coin_dp(g in prop::collection::vec(1u64..30, 1..5)) {
            let s = view(&g);
            let bound = if s.is_numerical() { (s.gens()[0] * s.gens()[1.min(s.gens().len() - 1)]).max(1) } else { 200 };
            let table = s.membership_table(bound);
            for (t, &m) in table.iter().enumerate() {
                prop_assert_eq!(s.contains(t as u64), m, "t = {}", t);
            }
            if let Ok(f) = s.frobenius() {
                prop_assert!(table.iter().skip((f + 1) as usize).all(|&m| m));
            }
        }

        #[test]
        fn apery_identities(g in numerical_gens()) {
            let s = view(&g);
            let f = s.frobenius().unwrap();
            let genus = s.genus().unwrap() as i64;
            let m = s.multiplicity();
            for x in (m..=m + 10).filter(|&x| s.contains(x)) {
                let ap = s.apery_set(x).unwrap();
                prop_assert_eq!(ap.len() as u64, x);
                prop_assert_eq!(*ap.last().unwrap() as i64 - x as i64, f);
                // Selmer: genus = (1/x) sum(w) - (x - 1)/2, cleared of denominators.
                let sum: i64 = ap.iter().map(|&w| w as i64).sum();
                prop_assert_eq!(2 * sum - x as i64 * (x as i64 - 1), 2 * x as i64 * genus);
            }
        }

        #[test]
        fn symmetry_cross_checks(g in numerical_gens()) {
            let s = view(&g);
            let f = s.frobenius().unwrap();
            let genus = s.genus().unwrap() as i64;
            let sym = s.is_symmetric().unwrap();
            prop_assert_eq!(sym, 2 * genus == f + 1);
            prop_assert_eq!(sym, s.semigroup_type().unwrap() == 1);
            if s.is_pseudo_symmetric().unwrap() {
                prop_assert_eq!(2 * genus, f + 2);
            }
        }
    }
}
