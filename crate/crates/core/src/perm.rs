//! Permutations of `{0, .., k-1}` in one-line notation.
//!
//! Products are written left to right: `a.then(&b)` applies `a` first, then
//! `b`. This matches how a layered program applies its layers in order.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm(Vec<usize>);

impl Perm {
    /// Returns `None` unless `image` is a bijection on `0..image.len()`.
    pub fn new(image: Vec<usize>) -> Option<Perm> {
        let mut seen = vec![false; image.len()];
        for &v in &image {
            if v >= image.len() || std::mem::replace(&mut seen[v], true) {
                return None;
            }
        }
        Some(Perm(image))
    }

    pub fn identity(k: usize) -> Perm {
        Perm((0..k).collect())
    }

    /// Build from one or more 1-based cycles, e.g. `&[&[1, 2, 3, 4, 5]]`.
    pub fn from_cycles(k: usize, cycles: &[&[usize]]) -> Perm {
        let mut p: Vec<usize> = (0..k).collect();
        for c in cycles {
            for t in 0..c.len() {
                p[c[t] - 1] = c[(t + 1) % c.len()] - 1;
            }
        }
        Perm::new(p).expect("cycles must be disjoint and in range")
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn apply(&self, point: usize) -> usize {
        self.0[point]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(k, &v)| k == v)
    }

    pub fn inverse(&self) -> Perm {
        let mut r = vec![0; self.0.len()];
        for (k, &v) in self.0.iter().enumerate() {
            r[v] = k;
        }
        Perm(r)
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Perm) -> Perm {
        assert_eq!(self.degree(), next.degree());
        Perm(self.0.iter().map(|&v| next.0[v]).collect())
    }

    /// `rho⁻¹ · self · rho`: relabels every point `v` as `rho(v)`.
    pub fn conjugate_by(&self, rho: &Perm) -> Perm {
        rho.inverse().then(self).then(rho)
    }

    pub fn pow(&self, e: usize) -> Perm {
        (0..e).fold(Perm::identity(self.degree()), |acc, _| acc.then(self))
    }

    /// True when the permutation is a single cycle through every point.
    pub fn is_full_cycle(&self) -> bool {
        let k = self.degree();
        if k == 0 {
            return false;
        }
        let mut v = self.0[0];
        let mut len = 1;
        while v != 0 {
            v = self.0[v];
            len += 1;
        }
        len == k
    }

    /// All permutations of degree `k` in lexicographic order of their
    /// one-line images.
    pub fn all(k: usize) -> Vec<Perm> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (0..k).collect();
        loop {
            out.push(Perm(cur.clone()));
            // next lexicographic permutation
            let Some(i) = (1..k).rev().find(|&i| cur[i - 1] < cur[i]) else {
                break;
            };
            let j = (i..k).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
            cur.swap(i - 1, j);
            cur[i..].reverse();
        }
        out
    }
}

impl fmt::Display for Perm {
    /// Cycle notation with 1-based points; the identity prints as `()`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut done = vec![false; self.degree()];
        let mut wrote = false;
        for s in 0..self.degree() {
            if done[s] || self.0[s] == s {
                continue;
            }
            write!(f, "(")?;
            let mut v = s;
            let mut first = true;
            while !done[v] {
                done[v] = true;
                if !first {
                    write!(f, " ")?;
                }
                write!(f, "{}", v + 1)?;
                first = false;
                v = self.0[v];
            }
            write!(f, ")")?;
            wrote = true;
        }
        if !wrote {
            write!(f, "()")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_perm(k: usize) -> impl Strategy<Value = Perm> {
        Just((0..k).collect::<Vec<_>>())
            .prop_shuffle()
            .prop_map(|v| Perm::new(v).unwrap())
    }

    #[test]
    fn basics() {
        let c = Perm::from_cycles(5, &[&[1, 2, 3, 4, 5]]);
        assert_eq!(c.as_slice(), &[1, 2, 3, 4, 0]);
        assert!(c.is_full_cycle());
        assert!(c.pow(5).is_identity());
        assert!(!c.pow(2).is_identity());
        assert_eq!(c.to_string(), "(1 2 3 4 5)");
        assert_eq!(Perm::identity(3).to_string(), "()");
        assert!(Perm::new(vec![0, 0, 1]).is_none());
        assert!(Perm::new(vec![0, 3, 1]).is_none());
        let t = Perm::from_cycles(5, &[&[1, 2], &[3, 4]]);
        assert!(!t.is_full_cycle());
    }

    #[test]
    fn enumeration_is_lexicographic_and_complete() {
        let all = Perm::all(5);
        assert_eq!(all.len(), 120);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(
            Perm::all(5).iter().filter(|p| p.is_full_cycle()).count(),
            24
        );
    }

    proptest! {
        #[test]
        fn group_laws(a in arb_perm(5), b in arb_perm(5), c in arb_perm(5)) {
            prop_assert_eq!(a.then(&b).then(&c), a.then(&b.then(&c)));
            prop_assert!(a.then(&a.inverse()).is_identity());
            for v in 0..5 {
                prop_assert_eq!(a.then(&b).apply(v), b.apply(a.apply(v)));
            }
            // conjugation relabels points
            let conj = a.conjugate_by(&b);
            for v in 0..5 {
                prop_assert_eq!(conj.apply(b.apply(v)), b.apply(a.apply(v)));
            }
        }
    }
}
