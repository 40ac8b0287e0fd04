//! Decomposition-type rules: which earlier generator a product `x_t · m_j`
//! is sent to, and which application orders of the variables are allowed
//! when chaining the rule.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ideal::OrderedIdeal;

/// Which permutations of `α` are used when gluing the chains of a cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainPolicy {
    /// Every permutation of `α`.
    All,
    /// Variables in the same support gap of the source generator are applied
    /// in descending order; across gaps any interleaving is allowed.
    SupportGap,
}

impl fmt::Display for ChainPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChainPolicy::All => write!(f, "all"),
            ChainPolicy::SupportGap => write!(f, "support-gap"),
        }
    }
}

/// A table `(j, t) ↦ g` on the products `x_t m_j`, `t ∈ set(m_j)`, together
/// with a chaining policy for each generator.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DecompRule {
    policies: Vec<ChainPolicy>,
    /// `table[j]` maps `t ∈ set(m_j)` to a generator index `g < j`.
    table: Vec<BTreeMap<usize, usize>>,
}

impl DecompRule {
    /// Validates divisibility `m_g | x_t m_j`, `g < j`, and that the table is
    /// defined exactly on `set(m_j)`.
    pub fn from_table(
        ideal: &OrderedIdeal,
        policy: ChainPolicy,
        table: Vec<BTreeMap<usize, usize>>,
    ) -> Result<Self> {
        Self::from_rows(ideal, vec![policy; ideal.len()], table)
    }

    /// Like [`from_table`](Self::from_table) with one policy per generator.
    pub fn from_rows(
        ideal: &OrderedIdeal,
        policies: Vec<ChainPolicy>,
        table: Vec<BTreeMap<usize, usize>>,
    ) -> Result<Self> {
        let sets = ideal.set_table()?;
        if table.len() != ideal.len() {
            return Err(Error::IndexOutOfRange(table.len()));
        }
        if policies.len() != ideal.len() {
            return Err(Error::IndexOutOfRange(policies.len()));
        }
        for (j, row) in table.iter().enumerate() {
            let keys: Vec<usize> = row.keys().copied().collect();
            if keys != sets[j] {
                return Err(Error::AlphaNotInSet(j));
            }
            for (&t, &g) in row {
                if g >= j || !ideal.gen(g).divides(&ideal.gen(j).mul_var(t)) {
                    return Err(Error::NotInSet { gen: j, var: t });
                }
            }
        }
        Ok(DecompRule { policies, table })
    }

    /// The decomposition function b: first generator dividing `x_t m_j`.
    pub fn canonical_b(ideal: &OrderedIdeal) -> Result<Self> {
        let sets = ideal.set_table()?;
        let table = sets
            .iter()
            .enumerate()
            .map(|(j, set)| set.iter().map(|&t| (t, ideal.decomp_b_step(j, t))).collect())
            .collect();
        Ok(DecompRule { policies: vec![ChainPolicy::All; ideal.len()], table })
    }

    /// The rule c: `c(x_t m) = x_t m / x_{i_k}` for the smallest support index
    /// `i_k ≥ t` of `m`, chained under [`ChainPolicy::SupportGap`]. Fails when
    /// some `c(x_t m)` is not an earlier generator.
    pub fn c_rule(ideal: &OrderedIdeal) -> Result<Self> {
        let sets = ideal.set_table()?;
        let mut table = Vec::with_capacity(ideal.len());
        for (j, set) in sets.iter().enumerate() {
            let mut row = BTreeMap::new();
            for &t in set {
                let g = c_target(ideal, j, t).ok_or(Error::NotCointerval)?;
                if g >= j {
                    return Err(Error::NotCointerval);
                }
                row.insert(t, g);
            }
            table.push(row);
        }
        Ok(DecompRule { policies: vec![ChainPolicy::SupportGap; ideal.len()], table })
    }

    pub fn policies(&self) -> &[ChainPolicy] {
        &self.policies
    }

    /// The policy used for cells with source `m_j`.
    pub fn policy(&self, j: usize) -> ChainPolicy {
        self.policies[j]
    }

    /// The common policy, if every generator uses the same one.
    pub fn uniform_policy(&self) -> Option<ChainPolicy> {
        let first = *self.policies.first()?;
        self.policies.iter().all(|&p| p == first).then_some(first)
    }

    pub fn with_policy(&self, policy: ChainPolicy) -> Self {
        DecompRule { policies: vec![policy; self.table.len()], table: self.table.clone() }
    }

    pub fn table(&self) -> &[BTreeMap<usize, usize>] {
        &self.table
    }

    /// `rule(x_t m_j)` when `t ∈ set(m_j)`.
    pub fn target(&self, j: usize, t: usize) -> Option<usize> {
        self.table[j].get(&t).copied()
    }

    /// One chain step: `rule(x_t m_j)` when `t ∈ set(m_j)`, otherwise `j`.
    pub fn step(&self, j: usize, t: usize) -> usize {
        self.target(j, t).unwrap_or(j)
    }

    /// The variables of `α` whose rule-terms enter the differential: all of
    /// `α` under [`ChainPolicy::All`], the per-gap maxima under
    /// [`ChainPolicy::SupportGap`].
    pub fn lead_vars(&self, ideal: &OrderedIdeal, j: usize, alpha: &[usize]) -> Vec<usize> {
        match self.policies[j] {
            ChainPolicy::All => alpha.to_vec(),
            ChainPolicy::SupportGap => gap_maxima(ideal, j, alpha),
        }
    }

    /// Whether `sigma` (an application order of `α`) is allowed from `m_j`.
    pub fn admissible(&self, ideal: &OrderedIdeal, j: usize, sigma: &[usize]) -> bool {
        match self.policies[j] {
            ChainPolicy::All => true,
            ChainPolicy::SupportGap => {
                let support = ideal.gen(j).support();
                for (a, &s) in sigma.iter().enumerate() {
                    for &t in &sigma[a + 1..] {
                        if support_block(&support, s) == support_block(&support, t) && s < t {
                            return false;
                        }
                    }
                }
                true
            }
        }
    }

    /// 1-based `(gen, var, target)` triples, ordered by generator then variable.
    pub fn entries_one_based(&self) -> Vec<[usize; 3]> {
        self.table
            .iter()
            .enumerate()
            .flat_map(|(j, row)| row.iter().map(move |(&t, &g)| [j + 1, t + 1, g + 1]))
            .collect()
    }
}

/// Index `k` of the smallest support element `i_k ≥ t`; `support.len()` when
/// `t` lies above the whole support.
pub fn support_block(support: &[usize], t: usize) -> usize {
    support.partition_point(|&i| i < t)
}

/// Per-gap maxima of `α` with respect to the support of `m_j`.
pub fn gap_maxima(ideal: &OrderedIdeal, j: usize, alpha: &[usize]) -> Vec<usize> {
    let support = ideal.gen(j).support();
    let mut best: BTreeMap<usize, usize> = BTreeMap::new();
    for &t in alpha {
        let blk = support_block(&support, t);
        let e = best.entry(blk).or_insert(t);
        if t > *e {
            *e = t;
        }
    }
    let mut out: Vec<usize> = best.into_values().collect();
    out.sort_unstable();
    out
}

/// Generator index of `x_t m_j / x_{i_k}` where `i_k` is the smallest support
/// index of `m_j` with `t ≤ i_k`.
pub fn c_target(ideal: &OrderedIdeal, j: usize, t: usize) -> Option<usize> {
    let m = ideal.gen(j);
    let support = m.support();
    let k = support_block(&support, t);
    let ik = *support.get(k)?;
    let mut e = m.mul_var(t).exponents().to_vec();
    e[ik] -= 1;
    ideal.index_of(&crate::Monomial::from_exponents(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideal::parse_ideal;

    #[test]
    fn support_blocks() {
        let support = [3, 4]; // x4x5
        assert_eq!(support_block(&support, 0), 0);
        assert_eq!(support_block(&support, 2), 0);
        assert_eq!(support_block(&support, 3), 0);
        assert_eq!(support_block(&support, 4), 1);
        assert_eq!(support_block(&support, 5), 2);
    }

    #[test]
    fn b_and_c_on_running_example() {
        let i = parse_ideal("x1*x2, x1*x3, x1*x5, x2*x3, x2*x5, x3*x5, x4*x5").unwrap();
        let b = DecompRule::canonical_b(&i).unwrap();
        let c = DecompRule::c_rule(&i).unwrap();
        // x2x5 (index 4) times x1: b gives x1x2, c gives x1x5
        assert_eq!(b.target(4, 0), Some(0));
        assert_eq!(c.target(4, 0), Some(2));
        assert_eq!(c.step(4, 1), 4);
        assert_eq!(c.lead_vars(&i, 5, &[0, 1]), vec![1]);
        assert_eq!(c.lead_vars(&i, 4, &[0, 2]), vec![0, 2]);
        assert!(c.admissible(&i, 6, &[2, 1, 0]));
        assert!(!c.admissible(&i, 6, &[0, 1, 2]));
        assert!(b.admissible(&i, 6, &[0, 1, 2]));
    }

    #[test]
    fn from_table_validates() {
        let i = parse_ideal("x1*x2, x1*x3").unwrap();
        let ok = vec![BTreeMap::new(), BTreeMap::from([(1, 0)])];
        assert!(DecompRule::from_table(&i, ChainPolicy::All, ok).is_ok());
        let wrong_key = vec![BTreeMap::new(), BTreeMap::from([(2, 0)])];
        assert!(DecompRule::from_table(&i, ChainPolicy::All, wrong_key).is_err());
        let self_map = vec![BTreeMap::new(), BTreeMap::from([(1, 1)])];
        assert!(DecompRule::from_table(&i, ChainPolicy::All, self_map).is_err());
    }
}
