//! The space of decomposition rules for a fixed order, and canonical
//! combinatorial types of the complexes they produce.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::cointerval::{hom_boundary, HomComplex};
use crate::complex::{check_dd_zero, rule_resolution, LabeledChainComplex};
use crate::ek::{complex_for_rule, CwComplex};
use crate::error::{Error, Result};
use crate::ideal::{is_subset, OrderedIdeal};
use crate::rule::{support_block, ChainPolicy, DecompRule};

/// Default bound on the number of candidate tables per policy.
pub const DEFAULT_RULE_BOUND: u128 = 1_000_000;

fn candidates(ideal: &OrderedIdeal, j: usize, t: usize) -> Vec<usize> {
    let target = ideal.gen(j).mul_var(t);
    (0..j).filter(|&g| ideal.gen(g).divides(&target)).collect()
}

/// Number of tables `(j, t) ↦ g` with `g < j` and `m_g | x_t m_j`.
pub fn search_space_size(ideal: &OrderedIdeal) -> Result<u128> {
    let sets = ideal.set_table()?;
    let mut size: u128 = 1;
    for (j, set) in sets.iter().enumerate() {
        for &t in set {
            size = size.saturating_mul(candidates(ideal, j, t).len() as u128);
        }
        if policy_matters(ideal, set, j) {
            size = size.saturating_mul(2);
        }
    }
    Ok(size)
}

/// Whether the two policies can differ on cells with source `m_j`: some two
/// variables of `set(m_j)` share a support gap.
fn policy_matters(ideal: &OrderedIdeal, set: &[usize], j: usize) -> bool {
    let support = ideal.gen(j).support();
    let blocks: Vec<usize> = set.iter().map(|&t| support_block(&support, t)).collect();
    blocks.windows(2).any(|w| w[0] == w[1])
}

/// Row-local constraints of row `j`'s policy, evaluated once rows `0..=j`
/// are set.
fn row_ok(ideal: &OrderedIdeal, sets: &[Vec<usize>], policy: ChainPolicy, table: &[BTreeMap<usize, usize>], j: usize) -> bool {
    let step = |g: usize, t: usize| table[g].get(&t).copied().unwrap_or(g);
    let set = &sets[j];
    match policy {
        ChainPolicy::All => {
            for &g in table[j].values() {
                if !is_subset(&sets[g], set) {
                    return false;
                }
            }
            for (a, &s) in set.iter().enumerate() {
                for &t in &set[a + 1..] {
                    if step(step(j, t), s) != step(step(j, s), t) {
                        return false;
                    }
                }
            }
            true
        }
        ChainPolicy::SupportGap => {
            let support = ideal.gen(j).support();
            for (a, &s) in set.iter().enumerate() {
                for &t in &set[a + 1..] {
                    let same = support_block(&support, s) == support_block(&support, t);
                    if same {
                        // s < t: applying t first, then s, lands where s alone does
                        if step(step(j, t), s) != step(j, s) {
                            return false;
                        }
                    } else if step(step(j, t), s) != step(step(j, s), t) {
                        return false;
                    }
                }
            }
            true
        }
    }
}

/// Statistics of one enumeration run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EnumerationStats {
    pub search_space: u128,
    /// Tables surviving the row constraints, over all policy choices.
    pub pruned_candidates: usize,
    pub failed_dd: usize,
    pub failed_geometry: usize,
    pub duplicates: usize,
}

/// Every rule whose rows pass their policy's commutation constraints, whose
/// induced differential squares to zero, and whose geometric pipeline
/// succeeds. Each generator picks its own policy (only where the choice can
/// matter). Rules inducing the same differential are merged, keeping the
/// first in enumeration order: rows in generator order, `All` before
/// `SupportGap`, targets in lexicographic order.
pub fn enumerate_regular_rules(ideal: &OrderedIdeal, bound: u128) -> Result<(Vec<DecompRule>, EnumerationStats)> {
    let sets = ideal.set_table()?.clone();
    let size = search_space_size(ideal)?;
    if size > bound {
        return Err(Error::SearchSpaceTooLarge { size, bound });
    }
    let mut stats = EnumerationStats { search_space: size, ..Default::default() };
    let mut tables: Vec<Candidate> = Vec::new();
    let mut current = (vec![ChainPolicy::All; ideal.len()], vec![BTreeMap::new(); ideal.len()]);
    search_rows(ideal, &sets, 0, &mut current, &mut tables);
    stats.pruned_candidates = tables.len();
    let evaluated: Vec<Option<std::result::Result<(DecompRule, LabeledChainComplex), bool>>> = tables
        .into_par_iter()
        .map(|(policies, table)| {
            let rule = DecompRule::from_rows(ideal, policies, table).ok()?;
            let res = rule_resolution(ideal, &rule).ok()?;
            if !check_dd_zero(&res).zero {
                return Some(Err(true));
            }
            if complex_for_rule(ideal, &rule).is_err() {
                return Some(Err(false));
            }
            Some(Ok((rule, res)))
        })
        .collect();
    let mut seen: Vec<LabeledChainComplex> = Vec::new();
    let mut out = Vec::new();
    for e in evaluated.into_iter().flatten() {
        match e {
            Err(true) => stats.failed_dd += 1,
            Err(false) => stats.failed_geometry += 1,
            Ok((rule, res)) => {
                if seen.contains(&res) {
                    stats.duplicates += 1;
                } else {
                    seen.push(res);
                    out.push(rule);
                }
            }
        }
    }
    Ok((out, stats))
}

type Candidate = (Vec<ChainPolicy>, Vec<BTreeMap<usize, usize>>);

fn search_rows(ideal: &OrderedIdeal, sets: &[Vec<usize>], j: usize, current: &mut Candidate, out: &mut Vec<Candidate>) {
    if j == ideal.len() {
        out.push(current.clone());
        return;
    }
    let set = &sets[j];
    let cands: Vec<Vec<usize>> = set.iter().map(|&t| candidates(ideal, j, t)).collect();
    // where the policies induce the same chains, a row may satisfy either
    // policy's constraints
    let matters = policy_matters(ideal, set, j);
    let policies: &[ChainPolicy] = if matters { &[ChainPolicy::All, ChainPolicy::SupportGap] } else { &[ChainPolicy::All] };
    for &policy in policies {
        current.0[j] = policy;
        let mut choice = vec![0usize; set.len()];
        loop {
            current.1[j] = set.iter().zip(&choice).zip(&cands).map(|((&t, &c), cs)| (t, cs[c])).collect();
            let ok = row_ok(ideal, sets, policy, &current.1, j)
                || (!matters && row_ok(ideal, sets, ChainPolicy::SupportGap, &current.1, j));
            if ok {
                search_rows(ideal, sets, j + 1, current, out);
            }
            // odometer over the row's choices
            let mut k = set.len();
            let done = loop {
                if k == 0 {
                    break true;
                }
                k -= 1;
                choice[k] += 1;
                if choice[k] < cands[k].len() {
                    break false;
                }
                choice[k] = 0;
            };
            if done {
                break;
            }
        }
    }
    current.0[j] = ChainPolicy::All;
    current.1[j].clear();
}

/// Dimensions in canonical order, then sorted cover pairs.
pub type CanonicalForm = (Vec<usize>, Vec<(usize, usize)>);

/// Cells with dimensions and covering relations (`covers[c]` = faces of `c`
/// one dimension down).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FacePoset {
    pub dims: Vec<usize>,
    pub covers: Vec<Vec<usize>>,
}

impl FacePoset {
    pub fn from_cw(x: &CwComplex) -> Self {
        FacePoset {
            dims: x.cells().iter().map(|c| c.dim()).collect(),
            covers: (0..x.cells().len()).map(|id| x.boundary(id).iter().map(|&(f, _)| f).collect()).collect(),
        }
    }

    pub fn from_hom(x: &HomComplex) -> Self {
        FacePoset {
            dims: x.cells().iter().map(|c| c.dim()).collect(),
            covers: x
                .cells()
                .iter()
                .map(|c| hom_boundary(c).iter().map(|(f, _)| x.cell_id(f).expect("faces are cells")).collect())
                .collect(),
        }
    }

    /// The closed cell generated by `top`: `top` and all its faces.
    pub fn closure(&self, top: usize) -> FacePoset {
        let mut keep = BTreeSet::from([top]);
        let mut stack = vec![top];
        while let Some(c) = stack.pop() {
            for &f in &self.covers[c] {
                if keep.insert(f) {
                    stack.push(f);
                }
            }
        }
        let ids: Vec<usize> = keep.into_iter().collect();
        let pos = |c: usize| ids.binary_search(&c).unwrap();
        FacePoset {
            dims: ids.iter().map(|&c| self.dims[c]).collect(),
            covers: ids.iter().map(|&c| self.covers[c].iter().map(|&f| pos(f)).collect()).collect(),
        }
    }

    pub fn f_vector(&self) -> Vec<usize> {
        let mut f = vec![0; self.dims.iter().max().map_or(0, |d| d + 1)];
        for &d in &self.dims {
            f[d] += 1;
        }
        f
    }

    fn up(&self) -> Vec<Vec<usize>> {
        let mut up = vec![Vec::new(); self.dims.len()];
        for (c, fs) in self.covers.iter().enumerate() {
            for &f in fs {
                up[f].push(c);
            }
        }
        up
    }

    /// Color refinement to a stable partition; colors are ranks of
    /// signatures so they depend only on the isomorphism class.
    fn refine(&self, up: &[Vec<usize>], mut colors: Vec<usize>) -> Vec<usize> {
        loop {
            let sigs: Vec<(usize, Vec<usize>, Vec<usize>)> = (0..colors.len())
                .map(|v| {
                    let mut d: Vec<usize> = self.covers[v].iter().map(|&f| colors[f]).collect();
                    let mut u: Vec<usize> = up[v].iter().map(|&c| colors[c]).collect();
                    d.sort_unstable();
                    u.sort_unstable();
                    (colors[v], d, u)
                })
                .collect();
            let distinct: BTreeSet<&(usize, Vec<usize>, Vec<usize>)> = sigs.iter().collect();
            let rank: BTreeMap<&(usize, Vec<usize>, Vec<usize>), usize> =
                distinct.iter().enumerate().map(|(i, s)| (*s, i)).collect();
            let next: Vec<usize> = sigs.iter().map(|s| rank[s]).collect();
            let before = colors.iter().collect::<BTreeSet<_>>().len();
            let after = distinct.len();
            colors = next;
            if after == before {
                return colors;
            }
        }
    }

    fn encode(&self, colors: &[usize]) -> CanonicalForm {
        let mut order: Vec<usize> = (0..colors.len()).collect();
        order.sort_by_key(|&v| colors[v]);
        let mut pos = vec![0; colors.len()];
        for (p, &v) in order.iter().enumerate() {
            pos[v] = p;
        }
        let dims = order.iter().map(|&v| self.dims[v]).collect();
        let mut edges: Vec<(usize, usize)> = self
            .covers
            .iter()
            .enumerate()
            .flat_map(|(c, fs)| fs.iter().map(move |&f| (c, f)))
            .map(|(c, f)| (pos[c], pos[f]))
            .collect();
        edges.sort_unstable();
        (dims, edges)
    }

    fn search(&self, up: &[Vec<usize>], colors: Vec<usize>, best: &mut Option<CanonicalForm>) {
        let colors = self.refine(up, colors);
        let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (v, &c) in colors.iter().enumerate() {
            classes.entry(c).or_default().push(v);
        }
        let Some(cell) = classes.values().filter(|vs| vs.len() > 1).min_by_key(|vs| vs.len()) else {
            let code = self.encode(&colors);
            if best.as_ref().is_none_or(|b| code < *b) {
                *best = Some(code);
            }
            return;
        };
        for &v in cell {
            let ind: Vec<usize> = colors.iter().enumerate().map(|(u, &c)| 2 * c + usize::from(u != v)).collect();
            self.search(up, ind, best);
        }
    }

    /// Lexicographically smallest encoding over all refinement-compatible
    /// labelings; equal exactly for isomorphic posets.
    pub fn canonical_form(&self) -> CanonicalForm {
        let up = self.up();
        let mut best = None;
        self.search(&up, self.dims.clone(), &mut best);
        best.unwrap_or_default()
    }

    /// Hex SHA-256 of the canonical form.
    pub fn fingerprint(&self) -> String {
        let (dims, edges) = self.canonical_form();
        let mut h = Sha256::new();
        h.update(format!("{dims:?};{edges:?}").as_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Canonical fingerprint of the face poset of a complex.
pub fn combinatorial_type(x: &CwComplex) -> String {
    FacePoset::from_cw(x).fingerprint()
}

/// One member of a decomposition family.
#[derive(Clone, Debug)]
pub struct FamilyMember {
    pub rule: DecompRule,
    pub complex: CwComplex,
    pub fingerprint: String,
}

/// The enumerated rules with their complexes and fingerprints.
pub fn rule_family(ideal: &OrderedIdeal, bound: u128) -> Result<(Vec<FamilyMember>, EnumerationStats)> {
    let (rules, stats) = enumerate_regular_rules(ideal, bound)?;
    let members = rules
        .into_par_iter()
        .map(|rule| {
            let complex = complex_for_rule(ideal, &rule)?;
            let fingerprint = combinatorial_type(&complex);
            Ok(FamilyMember { rule, complex, fingerprint })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((members, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::Symbol;
    use crate::ideal::parse_ideal;

    const RUNNING: &str = "x1*x2, x1*x3, x1*x5, x2*x3, x2*x5, x3*x5, x4*x5";

    #[test]
    fn maximal_and_principal() {
        for n in 1..=4 {
            let gens: Vec<String> = (1..=n).map(|k| format!("x{k}")).collect();
            let i = parse_ideal(&gens.join(", ")).unwrap();
            let (rules, _) = enumerate_regular_rules(&i, DEFAULT_RULE_BOUND).unwrap();
            assert_eq!(rules.len(), 1, "n = {n}");
        }
        let single = parse_ideal("x1*x2^2").unwrap();
        assert_eq!(enumerate_regular_rules(&single, DEFAULT_RULE_BOUND).unwrap().0.len(), 1);
    }

    #[test]
    fn running_family_contains_b_and_c() {
        let i = parse_ideal(RUNNING).unwrap();
        let (members, _) = rule_family(&i, DEFAULT_RULE_BOUND).unwrap();
        let b = DecompRule::canonical_b(&i).unwrap();
        let c = DecompRule::c_rule(&i).unwrap();
        let res = |r: &DecompRule| rule_resolution(&i, r).unwrap();
        assert!(members.iter().any(|m| res(&m.rule) == res(&b)));
        assert!(members.iter().any(|m| res(&m.rule) == res(&c)));
        let types: BTreeSet<&String> = members.iter().map(|m| &m.fingerprint).collect();
        assert!(types.len() >= 2);
    }

    #[test]
    fn bound_is_enforced() {
        let i = parse_ideal(RUNNING).unwrap();
        assert!(matches!(enumerate_regular_rules(&i, 1), Err(Error::SearchSpaceTooLarge { .. })));
    }

    #[test]
    fn fingerprints_respect_isomorphism() {
        let a = FacePoset { dims: vec![0, 0, 1], covers: vec![vec![], vec![], vec![0, 1]] };
        let b = FacePoset { dims: vec![1, 0, 0], covers: vec![vec![1, 2], vec![], vec![]] };
        assert_eq!(a.fingerprint(), b.fingerprint());
        let path = FacePoset { dims: vec![0, 0, 0, 1, 1], covers: vec![vec![], vec![], vec![], vec![0, 1], vec![1, 2]] };
        let split = FacePoset { dims: vec![0, 0, 0, 0, 1, 1], covers: vec![vec![], vec![], vec![], vec![], vec![0, 1], vec![2, 3]] };
        assert_ne!(path.fingerprint(), split.fingerprint());

        let i = parse_ideal(RUNNING).unwrap();
        let ek = complex_for_rule(&i, &DecompRule::canonical_b(&i).unwrap()).unwrap();
        let hom = complex_for_rule(&i, &DecompRule::c_rule(&i).unwrap()).unwrap();
        let top = Symbol::new(6, vec![0, 1, 2]);
        let ek_top = FacePoset::from_cw(&ek).closure(ek.cell_id(&top).unwrap());
        let hom_top = FacePoset::from_cw(&hom).closure(hom.cell_id(&top).unwrap());
        assert_ne!(ek_top.fingerprint(), hom_top.fingerprint());
        assert_ne!(combinatorial_type(&ek), combinatorial_type(&hom));
    }
}
