//! Deterministic test corpora: Borel-fixed ideals, cointerval d-graphs,
//! squarefree strongly stable ideals, the two worked examples and seeded
//! random ideals with linear quotients.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cointerval::{is_cointerval, DGraph};
use crate::ideal::{find_linear_quotient_order, minimalize, parse_ideal, OrderedIdeal};
use crate::monomial::Monomial;

pub const EXAMPLE_ONE: &str = "x1*x3*x4, x1*x3*x5, x1*x2*x4, x1*x4*x5, x2*x3*x4, x2*x3*x5";
pub const RUNNING_EXAMPLE: &str = "x1*x2, x1*x3, x1*x5, x2*x3, x2*x5, x3*x5, x4*x5";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Stable,
    Cointerval,
    SquarefreeStable,
    Example,
    Random,
}

/// Properties computed for every corpus entry.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Tags {
    pub linear_quotients: bool,
    pub regular: bool,
    pub cointerval: bool,
    pub stable: bool,
    pub squarefree: bool,
    pub equigenerated: bool,
}

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: String,
    pub family: Family,
    pub ideal: OrderedIdeal,
    pub tags: Tags,
    /// The d-graph, when the ideal is a squarefree equigenerated edge ideal.
    pub graph: Option<DGraph>,
}

impl CorpusEntry {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "name": self.name,
            "family": self.family,
            "ideal": self.ideal.to_json(),
            "tags": self.tags,
        })
    }
}

/// Which families to generate and how large.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusSpec {
    pub stable_max_vars: usize,
    pub stable_max_degree: u32,
    /// Pairs of seeds of different degrees are added up to this many variables.
    pub stable_pair_vars: usize,
    pub cointerval_max_d: usize,
    pub cointerval_max_vars: usize,
    pub squarefree_max_vars: usize,
    pub squarefree_max_degree: usize,
    pub random_count: usize,
    pub random_max_gens: usize,
    pub random_max_vars: usize,
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            stable_max_vars: 4,
            stable_max_degree: 3,
            stable_pair_vars: 3,
            cointerval_max_d: 3,
            cointerval_max_vars: 6,
            squarefree_max_vars: 6,
            squarefree_max_degree: 3,
            random_count: 200,
            random_max_gens: 8,
            random_max_vars: 6,
            seed: 0x5eed,
        }
    }
}

impl CorpusSpec {
    /// Only the structured families, without random ideals.
    pub fn structured() -> Self {
        CorpusSpec { random_count: 0, ..Default::default() }
    }
}

fn is_strongly_stable(ideal: &OrderedIdeal) -> bool {
    let n = ideal.nvars();
    ideal.gens().iter().all(|m| {
        m.support().into_iter().all(|j| {
            (0..j).all(|i| {
                let moved = m.div(&Monomial::var(n, j)).unwrap().mul_var(i);
                ideal.contains(&moved)
            })
        })
    })
}

/// Tags computed from the ideal as ordered.
pub fn compute_tags(ideal: &OrderedIdeal) -> Tags {
    let lq = ideal.linear_quotients().is_ok();
    let regular = lq && ideal.check_regularity().map(|r| r.regular).unwrap_or(false);
    let graph = DGraph::from_ideal(ideal).ok();
    let deg = ideal.gen(0).degree();
    Tags {
        linear_quotients: lq,
        regular,
        cointerval: graph.as_ref().is_some_and(is_cointerval),
        stable: is_strongly_stable(ideal),
        squarefree: ideal.gens().iter().all(Monomial::is_squarefree),
        equigenerated: ideal.gens().iter().all(|g| g.degree() == deg),
    }
}

fn entry(name: String, family: Family, ideal: OrderedIdeal) -> CorpusEntry {
    let tags = compute_tags(&ideal);
    let graph = DGraph::from_ideal(&ideal).ok();
    CorpusEntry { name, family, ideal, tags, graph }
}

/// Puts generators in (degree, lex) order, or the smallest order with linear
/// quotients if that one has none.
pub fn standard_order(n: usize, mut gens: Vec<Monomial>) -> OrderedIdeal {
    gens.sort_by(|a, b| a.degree().cmp(&b.degree()).then_with(|| a.lex_cmp(b)));
    let ideal = OrderedIdeal::new(n, gens).expect("minimal generators");
    if ideal.linear_quotients().is_ok() {
        return ideal;
    }
    match find_linear_quotient_order(n, ideal.gens()) {
        Some(order) => ideal.reordered(&order),
        None => ideal,
    }
}

/// Minimal generators of the smallest strongly stable ideal containing the
/// seeds: closed under `x_j ↦ x_i` for `i < j`.
pub fn borel_closure(n: usize, seeds: &[Monomial]) -> Vec<Monomial> {
    let mut seen: BTreeSet<Vec<u32>> = BTreeSet::new();
    let mut stack: Vec<Monomial> = seeds.to_vec();
    while let Some(m) = stack.pop() {
        if !seen.insert(m.exponents().to_vec()) {
            continue;
        }
        for j in m.support() {
            for i in 0..j {
                stack.push(m.div(&Monomial::var(n, j)).unwrap().mul_var(i));
            }
        }
    }
    minimalize(seen.into_iter().map(Monomial::from_exponents).collect())
}

/// Squarefree analogue: moves only onto variables not already present.
pub fn squarefree_borel_closure(n: usize, seeds: &[Monomial]) -> Vec<Monomial> {
    let mut seen: BTreeSet<Vec<u32>> = BTreeSet::new();
    let mut stack: Vec<Monomial> = seeds.to_vec();
    while let Some(m) = stack.pop() {
        if !seen.insert(m.exponents().to_vec()) {
            continue;
        }
        for j in m.support() {
            for i in (0..j).filter(|&i| m.exponents()[i] == 0) {
                stack.push(m.div(&Monomial::var(n, j)).unwrap().mul_var(i));
            }
        }
    }
    minimalize(seen.into_iter().map(Monomial::from_exponents).collect())
}

/// All monomials of degree `deg` in `n` variables.
pub fn monomials_of_degree(n: usize, deg: u32) -> Vec<Monomial> {
    fn rec(n: usize, i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if i + 1 == n {
            cur[i] = left;
            out.push(Monomial::from_exponents(cur.clone()));
            cur[i] = 0;
            return;
        }
        for e in (0..=left).rev() {
            cur[i] = e;
            rec(n, i + 1, left - e, cur, out);
        }
        cur[i] = 0;
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(n, 0, deg, &mut vec![0; n], &mut out);
    }
    out
}

fn uses_last_var(m: &Monomial) -> bool {
    m.exponents().last().is_some_and(|&e| e > 0)
}

/// Principal Borel ideals of every seed, and two-seed Borel ideals with
/// seeds of different degrees. An ideal lives in `n` variables only when a
/// seed involves `x_n`, so each ideal appears once.
pub fn stable_family(spec: &CorpusSpec) -> Vec<CorpusEntry> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for n in 1..=spec.stable_max_vars {
        let by_deg: Vec<Vec<Monomial>> = (1..=spec.stable_max_degree).map(|d| monomials_of_degree(n, d)).collect();
        let mut seed_sets: Vec<Vec<Monomial>> = Vec::new();
        for ms in &by_deg {
            for m in ms.iter().filter(|m| uses_last_var(m)) {
                seed_sets.push(vec![m.clone()]);
            }
        }
        if n <= spec.stable_pair_vars {
            for (a, da) in by_deg.iter().enumerate() {
                for db in &by_deg[a + 1..] {
                    for p in da {
                        for q in db {
                            if uses_last_var(p) || uses_last_var(q) {
                                seed_sets.push(vec![p.clone(), q.clone()]);
                            }
                        }
                    }
                }
            }
        }
        for seeds in seed_sets {
            let gens = borel_closure(n, &seeds);
            if !seen.insert((n, gens.clone())) {
                continue;
            }
            let name = format!(
                "borel[{}]",
                seeds.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
            );
            out.push(entry(name, Family::Stable, standard_order(n, gens)));
        }
    }
    out
}

type EdgeSet = BTreeSet<Vec<usize>>;

/// Edge sets of every cointerval `d`-graph on the vertices `first..n`.
fn cointerval_edge_sets(d: usize, first: usize, n: usize, memo: &mut BTreeMap<(usize, usize), Vec<BTreeSet<Vec<usize>>>>) -> Vec<BTreeSet<Vec<usize>>> {
    if let Some(v) = memo.get(&(d, first)) {
        return v.clone();
    }
    let result = if d == 1 {
        // every vertex subset
        let verts: Vec<usize> = (first..n).collect();
        (0u32..1 << verts.len())
            .map(|mask| verts.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &v)| vec![v]).collect())
            .collect()
    } else {
        // layers L_first ⊇ L_{first+1} ⊇ …, L_v a cointerval (d−1)-graph above v
        let mut acc: Vec<BTreeSet<Vec<usize>>> = vec![BTreeSet::new()];
        // (edges so far, the layer just added)
        let mut partial: Vec<(EdgeSet, EdgeSet)> = vec![(BTreeSet::new(), BTreeSet::new())];
        for v in (first..n).rev() {
            let options = cointerval_edge_sets(d - 1, v + 1, n, memo);
            let mut next = Vec::new();
            for (edges, below) in &partial {
                for layer in options.iter().filter(|l| below.is_subset(l)) {
                    let mut e = edges.clone();
                    e.extend(layer.iter().map(|rest| {
                        let mut full = vec![v];
                        full.extend(rest);
                        full
                    }));
                    next.push((e, layer.clone()));
                }
            }
            partial = next;
        }
        acc.clear();
        acc.extend(partial.into_iter().map(|(e, _)| e));
        acc
    };
    memo.insert((d, first), result.clone());
    result
}

/// Nonempty cointerval d-graphs, `d ≤ max_d`, on at most `max_vars`
/// vertices, with every vertex in some edge (graphs with unused vertices are
/// order-preserving relabelings of these).
pub fn cointerval_family(max_d: usize, max_vars: usize) -> Vec<DGraph> {
    let mut out = Vec::new();
    for n in 1..=max_vars {
        for d in 1..=max_d.min(n) {
            let mut memo = BTreeMap::new();
            for edges in cointerval_edge_sets(d, 0, n, &mut memo) {
                let used: BTreeSet<usize> = edges.iter().flatten().copied().collect();
                if used.len() != n {
                    continue;
                }
                out.push(DGraph::on_range(d, n, edges).expect("edges in range"));
            }
        }
    }
    out
}

fn cointerval_entries(spec: &CorpusSpec) -> Vec<CorpusEntry> {
    cointerval_family(spec.cointerval_max_d, spec.cointerval_max_vars)
        .into_iter()
        .map(|g| {
            let ideal = g.edge_ideal().expect("nonempty graph");
            let name = format!("cointerval[{}]", g.to_text().lines().skip(1).collect::<Vec<_>>().join(";"));
            let mut e = entry(name, Family::Cointerval, ideal);
            e.graph = Some(g);
            e
        })
        .collect()
}

/// Squarefree strongly stable ideals generated in one degree: closures of
/// one seed or of two seeds of the same degree.
pub fn squarefree_stable_family(spec: &CorpusSpec) -> Vec<CorpusEntry> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for n in 1..=spec.squarefree_max_vars {
        for d in 1..=spec.squarefree_max_degree.min(n) {
            let seeds: Vec<Monomial> = monomials_of_degree(n, d as u32)
                .into_iter()
                .filter(|m| m.is_squarefree())
                .collect();
            let mut seed_sets: Vec<Vec<Monomial>> = seeds.iter().filter(|m| uses_last_var(m)).map(|m| vec![m.clone()]).collect();
            for (a, p) in seeds.iter().enumerate() {
                for q in &seeds[a + 1..] {
                    if uses_last_var(p) || uses_last_var(q) {
                        seed_sets.push(vec![p.clone(), q.clone()]);
                    }
                }
            }
            for s in seed_sets {
                let gens = squarefree_borel_closure(n, &s);
                if !seen.insert((n, gens.clone())) {
                    continue;
                }
                let name = format!("sqfree-borel[{}]", s.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(","));
                out.push(entry(name, Family::SquarefreeStable, OrderedIdeal::new(n, gens).expect("minimal")));
            }
        }
    }
    out
}

pub fn examples() -> Vec<CorpusEntry> {
    vec![
        entry("example-one".into(), Family::Example, parse_ideal(EXAMPLE_ONE).expect("valid")),
        entry("running-example".into(), Family::Example, parse_ideal(RUNNING_EXAMPLE).expect("valid")),
    ]
}

/// Random ideals with linear quotients and regular decomposition function.
/// Generators are appended one at a time, keeping only candidates that are
/// incomparable with the current ones and give a variable-generated colon
/// ideal; the result is kept if the decomposition function is regular.
pub fn random_family(spec: &CorpusSpec) -> Vec<CorpusEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    while out.len() < spec.random_count {
        let n = rng.gen_range(2..=spec.random_max_vars);
        let k = rng.gen_range(1..=spec.random_max_gens);
        let mut gens: Vec<Monomial> = Vec::new();
        let mut attempts = 0;
        while gens.len() < k && attempts < 200 {
            attempts += 1;
            let exps: Vec<u32> = (0..n).map(|_| if rng.gen_bool(0.45) { rng.gen_range(1..=2) } else { 0 }).collect();
            let m = Monomial::from_exponents(exps);
            if m.is_one() || gens.iter().any(|g| g.divides(&m) || m.divides(g)) {
                continue;
            }
            let mut trial = gens.clone();
            trial.push(m);
            let ideal = OrderedIdeal::new(n, trial.clone()).expect("incomparable");
            if ideal.linear_quotients().is_ok() {
                gens = trial;
            }
        }
        let ideal = OrderedIdeal::new(n, gens).expect("nonempty");
        if !ideal.check_regularity().map(|r| r.regular).unwrap_or(false) {
            continue;
        }
        if !seen.insert((n, ideal.gens().to_vec())) {
            continue;
        }
        out.push(entry(format!("random-{}", out.len()), Family::Random, ideal));
    }
    out
}

/// The whole corpus, in a fixed order.
pub fn gen_corpus(spec: &CorpusSpec) -> Vec<CorpusEntry> {
    let mut out = examples();
    out.extend(stable_family(spec));
    out.extend(cointerval_entries(spec));
    out.extend(squarefree_stable_family(spec));
    out.extend(random_family(spec));
    out
}
