//! Ordered monomial ideals, colon ideals and the linear-quotient machinery.
//!
//! Generator and variable indices are 0-based throughout the API. The text
//! grammar and every serialized form use 1-based indices.

use std::collections::HashSet;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monomial::Monomial;

/// `set(m_j)` for every generator, as sorted 0-based variable indices.
pub type SetTable = Vec<Vec<usize>>;

/// First position where a generator order stops having linear quotients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LqFailure {
    /// 0-based generator index whose colon ideal is not variable-generated.
    pub j: usize,
    /// A minimal generator of that colon ideal of degree > 1.
    pub witness: Monomial,
}

impl From<LqFailure> for Error {
    fn from(f: LqFailure) -> Self {
        Error::NotLinearQuotients { j: f.j, witness: f.witness }
    }
}

#[derive(Debug, Clone)]
pub struct OrderedIdeal {
    n: usize,
    gens: Vec<Monomial>,
    sets: OnceLock<std::result::Result<SetTable, LqFailure>>,
}

impl PartialEq for OrderedIdeal {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.gens == other.gens
    }
}

impl Eq for OrderedIdeal {}

#[derive(Serialize, Deserialize)]
struct IdealJson {
    n: usize,
    gens: Vec<Vec<u32>>,
}

impl OrderedIdeal {
    /// Builds an ideal from generators in the given order. Rejects duplicates
    /// and generating sets where one generator divides another.
    pub fn new(n: usize, gens: Vec<Monomial>) -> Result<Self> {
        if gens.is_empty() {
            return Err(Error::MalformedMonomial("ideal has no generators".into()));
        }
        for g in &gens {
            if g.nvars() != n {
                return Err(Error::MalformedMonomial(format!(
                    "{g} has {} exponents, expected {n}",
                    g.nvars()
                )));
            }
            if g.is_one() {
                return Err(Error::MalformedMonomial("the unit ideal is not supported".into()));
            }
        }
        for (i, a) in gens.iter().enumerate() {
            for b in &gens[i + 1..] {
                if a == b {
                    return Err(Error::DuplicateGenerator(a.clone()));
                }
            }
        }
        for a in &gens {
            for b in &gens {
                if a != b && a.divides(b) {
                    return Err(Error::NonMinimalGenerators {
                        divisor: a.clone(),
                        multiple: b.clone(),
                    });
                }
            }
        }
        Ok(OrderedIdeal { n, gens, sets: OnceLock::new() })
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn gens(&self) -> &[Monomial] {
        &self.gens
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn gen(&self, j: usize) -> &Monomial {
        &self.gens[j]
    }

    pub fn index_of(&self, m: &Monomial) -> Option<usize> {
        self.gens.iter().position(|g| g == m)
    }

    /// The same generators listed in `order` (a permutation of `0..k`).
    pub fn reordered(&self, order: &[usize]) -> OrderedIdeal {
        OrderedIdeal {
            n: self.n,
            gens: order.iter().map(|&i| self.gens[i].clone()).collect(),
            sets: OnceLock::new(),
        }
    }

    pub fn contains(&self, m: &Monomial) -> bool {
        self.gens.iter().any(|g| g.divides(m))
    }

    pub fn lcm_all(&self) -> Monomial {
        self.gens.iter().fold(Monomial::one(self.n), |acc, g| acc.lcm(g))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let parsed: IdealJson =
            serde_json::from_str(text).map_err(|e| Error::MalformedMonomial(e.to_string()))?;
        let gens = parsed.gens.into_iter().map(Monomial::from_exponents).collect();
        OrderedIdeal::new(parsed.n, gens)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(IdealJson {
            n: self.n,
            gens: self.gens.iter().map(|g| g.exponents().to_vec()).collect(),
        })
        .expect("ideal serializes")
    }

    /// Minimal generators of `⟨m_1, …, m_{j-1}⟩ : m_j`, sorted lexicographically.
    pub fn colon_by_generator(&self, j: usize) -> Result<Vec<Monomial>> {
        if j >= self.gens.len() {
            return Err(Error::IndexOutOfRange(j));
        }
        let mj = &self.gens[j];
        let quotients = self.gens[..j].iter().map(|mi| {
            mi.div(&mi.gcd(mj)).expect("gcd divides")
        });
        Ok(minimalize(quotients.collect()))
    }

    /// Success gives `set(m_j)` for every generator; failure the first
    /// generator whose colon ideal is not generated by variables.
    pub fn linear_quotients(&self) -> std::result::Result<&SetTable, LqFailure> {
        self.sets
            .get_or_init(|| self.compute_sets())
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Like [`linear_quotients`](Self::linear_quotients) with the failure
    /// folded into [`Error`].
    pub fn set_table(&self) -> Result<&SetTable> {
        self.linear_quotients().map_err(|f| f.into())
    }

    fn compute_sets(&self) -> std::result::Result<SetTable, LqFailure> {
        let mut table = Vec::with_capacity(self.gens.len());
        for j in 0..self.gens.len() {
            let colon = self.colon_by_generator(j).expect("index in range");
            let mut set = Vec::with_capacity(colon.len());
            for q in colon {
                if q.degree() != 1 {
                    return Err(LqFailure { j, witness: q });
                }
                set.push(q.support()[0]);
            }
            set.sort_unstable();
            table.push(set);
        }
        Ok(table)
    }

    /// Index of the first generator dividing `m` (the decomposition function b).
    pub fn decomp_b(&self, m: &Monomial) -> Result<usize> {
        self.gens
            .iter()
            .position(|g| g.divides(m))
            .ok_or_else(|| Error::NotInIdeal(m.clone()))
    }

    /// `b(x_t · m_j)` as a generator index.
    pub fn decomp_b_step(&self, j: usize, t: usize) -> usize {
        self.decomp_b(&self.gens[j].mul_var(t)).expect("x_t m_j lies in the ideal")
    }

    /// Exhaustive test of `set(b(x_t m)) ⊆ set(m)` and of the commutation
    /// `b(x_s b(x_t m)) = b(x_t b(x_s m))`, reported independently.
    pub fn check_regularity(&self) -> Result<RegularityReport> {
        let sets = self.set_table()?;
        let mut witnesses = Vec::new();
        let mut star_witnesses = Vec::new();
        for (j, set) in sets.iter().enumerate() {
            for &t in set {
                let g = self.decomp_b_step(j, t);
                if !is_subset(&sets[g], set) {
                    witnesses.push((j, t));
                }
            }
            for (a, &s) in set.iter().enumerate() {
                for &t in &set[a + 1..] {
                    let via_t = self.decomp_b_step(self.decomp_b_step(j, t), s);
                    let via_s = self.decomp_b_step(self.decomp_b_step(j, s), t);
                    if via_t != via_s {
                        star_witnesses.push((j, s, t));
                    }
                }
            }
        }
        Ok(RegularityReport {
            regular: witnesses.is_empty(),
            witnesses,
            star_commutes: star_witnesses.is_empty(),
            star_witnesses,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RegularityReport {
    pub regular: bool,
    /// `(j, t)` pairs with `set(b(x_t m_j)) ⊄ set(m_j)`.
    pub witnesses: Vec<(usize, usize)>,
    pub star_commutes: bool,
    /// `(j, s, t)` triples where the two iterated decompositions differ.
    pub star_witnesses: Vec<(usize, usize, usize)>,
}

pub(crate) fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.binary_search(x).is_ok())
}

/// Unique minimal generating set of the ideal generated by `mons`, sorted
/// lexicographically with `x1` largest.
pub fn minimalize(mut mons: Vec<Monomial>) -> Vec<Monomial> {
    mons.sort_by(|a, b| a.degree().cmp(&b.degree()).then_with(|| a.lex_cmp(b)));
    mons.dedup();
    let mut out: Vec<Monomial> = Vec::new();
    for m in mons {
        if !out.iter().any(|g| g.divides(&m)) {
            out.push(m);
        }
    }
    out.sort_by(|a, b| a.lex_cmp(b));
    out
}

/// Parses a comma- or newline-separated list of monomials. Each monomial is
/// either `x<i>` factors joined by `*` (with optional `^e`), or a bracketed
/// exponent tuple such as `(1,0,1)`. A JSON object `{"n":…,"gens":[…]}` is
/// accepted as well.
pub fn parse_ideal(text: &str) -> Result<OrderedIdeal> {
    let trimmed = text.trim();
    if trimmed.starts_with('{') {
        return OrderedIdeal::from_json(trimmed);
    }
    let tokens = split_top_level(trimmed);
    if tokens.is_empty() {
        return Err(Error::MalformedMonomial("empty input".into()));
    }
    enum Parsed {
        Vars(Vec<(usize, u32)>),
        Tuple(Vec<u32>),
    }
    let mut parsed = Vec::new();
    for tok in &tokens {
        if tok.starts_with('(') || tok.starts_with('[') {
            parsed.push(Parsed::Tuple(parse_tuple(tok)?));
        } else {
            parsed.push(Parsed::Vars(parse_product(tok)?));
        }
    }
    let tuple_len = parsed.iter().find_map(|p| match p {
        Parsed::Tuple(t) => Some(t.len()),
        _ => None,
    });
    let max_var = parsed
        .iter()
        .filter_map(|p| match p {
            Parsed::Vars(v) => v.iter().map(|(i, _)| *i + 1).max(),
            _ => None,
        })
        .max()
        .unwrap_or(0);
    let n = match tuple_len {
        Some(len) if len < max_var => {
            return Err(Error::MalformedMonomial(format!(
                "tuple length {len} is smaller than the largest variable index {max_var}"
            )))
        }
        Some(len) => len,
        None => max_var,
    };
    let mut gens = Vec::with_capacity(parsed.len());
    for p in parsed {
        match p {
            Parsed::Tuple(t) => {
                if t.len() != n {
                    return Err(Error::MalformedMonomial(format!(
                        "exponent tuples must all have length {n}"
                    )));
                }
                gens.push(Monomial::from_exponents(t));
            }
            Parsed::Vars(v) => {
                let mut e = vec![0u32; n];
                for (i, p) in v {
                    e[i] += p;
                }
                gens.push(Monomial::from_exponents(e));
            }
        }
    }
    OrderedIdeal::new(n, gens)
}

fn split_top_level(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in text.chars() {
        match ch {
            '(' | '[' => {
                depth += 1;
                cur.push(ch);
            }
            ')' | ']' => {
                depth -= 1;
                cur.push(ch);
            }
            ',' | '\n' | ';' if depth == 0 => {
                let t = cur.trim().to_string();
                if !t.is_empty() {
                    out.push(t);
                }
                cur.clear();
            }
            _ => cur.push(ch),
        }
    }
    let t = cur.trim().to_string();
    if !t.is_empty() {
        out.push(t);
    }
    out
}

fn parse_tuple(tok: &str) -> Result<Vec<u32>> {
    let inner = tok
        .strip_prefix(['(', '['])
        .and_then(|s| s.strip_suffix([')', ']']))
        .ok_or_else(|| Error::MalformedMonomial(tok.to_string()))?;
    inner
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<u32>()
                .map_err(|_| Error::MalformedMonomial(tok.to_string()))
        })
        .collect()
}

fn parse_product(tok: &str) -> Result<Vec<(usize, u32)>> {
    let bad = || Error::MalformedMonomial(tok.to_string());
    let mut out = Vec::new();
    for factor in tok.split('*') {
        let factor = factor.trim();
        let rest = factor.strip_prefix('x').ok_or_else(bad)?;
        let (idx, pow) = match rest.split_once('^') {
            Some((i, p)) => (i, p.trim().parse::<u32>().map_err(|_| bad())?),
            None => (rest, 1),
        };
        if idx.is_empty() || !idx.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let i: usize = idx.parse().map_err(|_| bad())?;
        if i == 0 || pow == 0 {
            return Err(bad());
        }
        out.push((i - 1, pow));
    }
    Ok(out)
}

/// Searches for a generator order with linear quotients. Candidates are tried
/// in input-index order, so the result is the lexicographically smallest
/// successful permutation of `0..k`.
pub fn find_linear_quotient_order(n: usize, gens: &[Monomial]) -> Option<Vec<usize>> {
    let k = gens.len();
    if k == 0 {
        return Some(Vec::new());
    }
    debug_assert!(gens.iter().all(|g| g.nvars() == n));
    // quot[g][i] = m_i / gcd(m_i, m_g)
    let quot: Vec<Vec<Monomial>> = gens
        .iter()
        .map(|mg| gens.iter().map(|mi| mi.div(&mi.gcd(mg)).unwrap()).collect())
        .collect();
    let words = k.div_ceil(64);
    let mut placed = vec![0u64; words];
    let mut order = Vec::with_capacity(k);
    let mut dead: HashSet<Vec<u64>> = HashSet::new();

    fn can_follow(quot: &[Vec<Monomial>], placed: &[u64], order: &[usize], g: usize) -> bool {
        let _ = placed;
        order.iter().all(|&i| {
            let q = &quot[g][i];
            q.degree() == 1
                || order
                    .iter()
                    .any(|&i2| quot[g][i2].degree() == 1 && quot[g][i2].divides(q))
        })
    }

    fn dfs(
        quot: &[Vec<Monomial>],
        placed: &mut Vec<u64>,
        order: &mut Vec<usize>,
        dead: &mut HashSet<Vec<u64>>,
    ) -> bool {
        let k = quot.len();
        if order.len() == k {
            return true;
        }
        if dead.contains(placed) {
            return false;
        }
        for g in 0..k {
            if placed[g / 64] >> (g % 64) & 1 == 1 {
                continue;
            }
            if !can_follow(quot, placed, order, g) {
                continue;
            }
            placed[g / 64] |= 1 << (g % 64);
            order.push(g);
            if dfs(quot, placed, order, dead) {
                return true;
            }
            order.pop();
            placed[g / 64] &= !(1 << (g % 64));
        }
        dead.insert(placed.clone());
        false
    }

    if dfs(&quot, &mut placed, &mut order, &mut dead) {
        Some(order)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const EXAMPLE_ONE: &str = "x1*x3*x4, x1*x3*x5, x1*x2*x4, x1*x4*x5, x2*x3*x4, x2*x3*x5";
    pub(crate) const RUNNING: &str = "x1*x2, x1*x3, x1*x5, x2*x3, x2*x5, x3*x5, x4*x5";

    fn mono(n: usize, vars1: &[usize]) -> Monomial {
        let v: Vec<usize> = vars1.iter().map(|v| v - 1).collect();
        Monomial::from_support(n, &v)
    }

    #[test]
    fn parse_small() {
        let i = parse_ideal("x1*x3*x4, x1*x3*x5").unwrap();
        assert_eq!(i.nvars(), 5);
        assert_eq!(i.gens()[0].exponents(), &[1, 0, 1, 1, 0]);
        assert_eq!(i.gens()[1].exponents(), &[1, 0, 1, 0, 1]);
    }

    #[test]
    fn parse_tuples_and_newlines() {
        let i = parse_ideal("(1,0,1)\n[0,2,0]").unwrap();
        assert_eq!(i.nvars(), 3);
        assert_eq!(i.gens()[1].exponents(), &[0, 2, 0]);
        let j = parse_ideal("x1^2, x1*x2").unwrap();
        assert_eq!(j.gens()[0].exponents(), &[2, 0]);
    }

    #[test]
    fn parse_json() {
        let i = parse_ideal(r#"{"n": 3, "gens": [[1,1,0],[0,1,1]]}"#).unwrap();
        assert_eq!(i.len(), 2);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_ideal("x1*x2, x1*x2*x3"),
            Err(Error::NonMinimalGenerators { .. })
        ));
        assert!(matches!(parse_ideal("x1*x2, x2*x1"), Err(Error::DuplicateGenerator(_))));
        assert!(matches!(parse_ideal("x1*y2"), Err(Error::MalformedMonomial(_))));
        assert!(matches!(parse_ideal("x0"), Err(Error::MalformedMonomial(_))));
        assert!(matches!(parse_ideal(""), Err(Error::MalformedMonomial(_))));
        assert!(matches!(parse_ideal("(1,0),(1,0,1)"), Err(Error::MalformedMonomial(_))));
    }

    #[test]
    fn example_one_parses() {
        let i = parse_ideal(EXAMPLE_ONE).unwrap();
        assert_eq!(i.len(), 6);
        assert_eq!(i.nvars(), 5);
    }

    #[test]
    fn colon_examples() {
        let i = parse_ideal(EXAMPLE_ONE).unwrap();
        assert_eq!(i.colon_by_generator(5).unwrap(), vec![mono(5, &[1]), mono(5, &[4])]);
        assert!(i.colon_by_generator(0).unwrap().is_empty());
        assert_eq!(i.colon_by_generator(6), Err(Error::IndexOutOfRange(6)));
        let small = parse_ideal("x1*x2, x1*x3").unwrap();
        assert_eq!(small.colon_by_generator(1).unwrap(), vec![mono(3, &[2])]);
    }

    #[test]
    fn linear_quotient_tables() {
        let i = parse_ideal(EXAMPLE_ONE).unwrap();
        let sets = i.linear_quotients().unwrap();
        assert_eq!(sets[3], vec![1, 2]); // set(x1x4x5) = {2,3}
        let r = parse_ideal(RUNNING).unwrap();
        let sets = r.linear_quotients().unwrap();
        assert_eq!(sets[4], vec![0, 2]); // set(x2x5) = {1,3}
        assert_eq!(sets[5], vec![0, 1]); // set(x3x5) = {1,2}
        let sizes: Vec<usize> = sets.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![0, 1, 2, 1, 2, 2, 3]);
    }

    #[test]
    fn linear_quotient_failure_witness() {
        let i = parse_ideal("x1*x2, x3*x4").unwrap();
        let f = i.linear_quotients().unwrap_err();
        assert_eq!(f.j, 1);
        assert_eq!(f.witness, mono(4, &[1, 2]));
    }

    #[test]
    fn sets_match_colon_generators() {
        for text in [EXAMPLE_ONE, RUNNING] {
            let i = parse_ideal(text).unwrap();
            let sets = i.linear_quotients().unwrap();
            for (j, set) in sets.iter().enumerate() {
                let colon = i.colon_by_generator(j).unwrap();
                let vars: Vec<usize> = colon.iter().map(|q| q.support()[0]).collect();
                let mut sorted = vars.clone();
                sorted.sort();
                assert_eq!(&sorted, set);
            }
        }
    }

    #[test]
    fn decomp_b_examples() {
        let i = parse_ideal(EXAMPLE_ONE).unwrap();
        assert_eq!(i.decomp_b(&mono(5, &[1, 2, 4, 5])).unwrap(), 2);
        assert_eq!(i.decomp_b(&mono(5, &[1, 2, 3, 4])).unwrap(), 0);
        for j in 0..i.len() {
            assert_eq!(i.decomp_b(i.gen(j)).unwrap(), j);
        }
        assert!(matches!(i.decomp_b(&mono(5, &[1])), Err(Error::NotInIdeal(_))));
    }

    #[test]
    fn decomp_b_steps_go_backwards() {
        for text in [EXAMPLE_ONE, RUNNING] {
            let i = parse_ideal(text).unwrap();
            let sets = i.linear_quotients().unwrap().clone();
            for (j, set) in sets.iter().enumerate() {
                for &t in set {
                    let g = i.decomp_b_step(j, t);
                    assert!(g < j);
                    assert!(i.gen(g).divides(&i.gen(j).mul_var(t)));
                    assert_eq!(i.gen(g).degree(), i.gen(j).degree());
                }
            }
        }
    }

    #[test]
    fn regularity_examples() {
        let i = parse_ideal(EXAMPLE_ONE).unwrap();
        let rep = i.check_regularity().unwrap();
        assert!(rep.regular && rep.star_commutes);
        let single = parse_ideal("x1*x2^2").unwrap();
        assert!(single.check_regularity().unwrap().regular);
        let r = parse_ideal(RUNNING).unwrap();
        assert!(r.check_regularity().unwrap().regular);
        let bad = parse_ideal("x1*x2, x3*x4").unwrap();
        assert!(matches!(bad.check_regularity(), Err(Error::NotLinearQuotients { .. })));
    }

    #[test]
    fn order_search() {
        let i = parse_ideal(EXAMPLE_ONE).unwrap();
        let shuffled: Vec<Monomial> = [5, 2, 0, 4, 1, 3].iter().map(|&j| i.gen(j).clone()).collect();
        let order = find_linear_quotient_order(5, &shuffled).unwrap();
        let ordered = OrderedIdeal::new(5, order.iter().map(|&j| shuffled[j].clone()).collect()).unwrap();
        assert!(ordered.linear_quotients().is_ok());

        assert_eq!(find_linear_quotient_order(2, &[mono(2, &[1, 2])]), Some(vec![0]));
        let bad = [mono(4, &[1, 2]), mono(4, &[3, 4])];
        assert_eq!(find_linear_quotient_order(4, &bad), None);
    }

    #[test]
    fn order_search_is_lexicographically_smallest() {
        // brute force over all permutations of a small ideal
        let i = parse_ideal("x2*x3, x1*x2, x3*x4, x1*x3").unwrap();
        let gens = i.gens().to_vec();
        let mut best: Option<Vec<usize>> = None;
        let mut perm: Vec<usize> = (0..gens.len()).collect();
        permute_all(&mut perm, 0, &mut |p| {
            let o = i.reordered(p);
            if o.linear_quotients().is_ok() && best.as_ref().is_none_or(|b| p < &b[..]) {
                best = Some(p.to_vec());
            }
        });
        assert_eq!(find_linear_quotient_order(4, &gens), best);
    }

    fn permute_all(p: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
        if k == p.len() {
            f(p);
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            permute_all(p, k + 1, f);
            p.swap(k, i);
        }
    }
}
