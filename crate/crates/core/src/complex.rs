//! Graded free chain complexes over the polynomial ring with monomial-entry
//! differentials, Koszul complexes, mapping cones and the mapping-cone
//! resolutions of ideals with linear quotients.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::ideal::{is_subset, OrderedIdeal};
use crate::monomial::Monomial;
use crate::rule::DecompRule;

/// Basis symbol `(m_gen; α)` of homological degree `|α| + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    pub gen: usize,
    pub alpha: Vec<usize>,
}

impl Symbol {
    pub fn new(gen: usize, alpha: Vec<usize>) -> Self {
        Symbol { gen, alpha }
    }

    pub fn degree(&self) -> usize {
        self.alpha.len() + 1
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a: Vec<String> = self.alpha.iter().map(|t| (t + 1).to_string()).collect();
        write!(f, "(m{}; {{{}}})", self.gen + 1, a.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasisLabel {
    /// The free module `R` in homological degree 0.
    Unit,
    Symbol(Symbol),
    /// A subset of variables (Koszul) or generators (Taylor), 0-based.
    Face(Vec<usize>),
    /// A cell `σ_1 × ⋯ × σ_d` of a homomorphism complex, 0-based vertices.
    Cell(Vec<Vec<usize>>),
    /// An element of the shifted source inside a mapping cone.
    Cone(Box<BasisLabel>),
}

impl BasisLabel {
    fn to_json(&self) -> Value {
        match self {
            BasisLabel::Unit => json!("unit"),
            BasisLabel::Symbol(s) => {
                json!([s.gen + 1, s.alpha.iter().map(|t| t + 1).collect::<Vec<_>>()])
            }
            BasisLabel::Face(f) => json!({"face": f.iter().map(|t| t + 1).collect::<Vec<_>>()}),
            BasisLabel::Cell(blocks) => json!({
                "blocks": blocks.iter().map(|b| b.iter().map(|v| v + 1).collect::<Vec<_>>()).collect::<Vec<_>>()
            }),
            BasisLabel::Cone(inner) => json!({"cone": inner.to_json()}),
        }
    }
}

/// A polynomial entry: signed integer multiples of monomials.
pub type Poly = BTreeMap<Monomial, i64>;

fn poly_add_term(p: &mut Poly, m: Monomial, c: i64) {
    if c == 0 {
        return;
    }
    let e = p.entry(m).or_insert(0);
    *e += c;
    if *e == 0 {
        let key = p.iter().find(|(_, v)| **v == 0).map(|(k, _)| k.clone());
        if let Some(k) = key {
            p.remove(&k);
        }
    }
}

/// Column-major sparse matrix of polynomial entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: usize,
    cols: Vec<BTreeMap<usize, Poly>>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols: vec![BTreeMap::new(); cols] }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn add_term(&mut self, row: usize, col: usize, coeff: i64, mono: Monomial) {
        assert!(row < self.rows, "row {row} out of range");
        let col_map = &mut self.cols[col];
        let p = col_map.entry(row).or_default();
        poly_add_term(p, mono, coeff);
        if p.is_empty() {
            col_map.remove(&row);
        }
    }

    pub fn column(&self, col: usize) -> &BTreeMap<usize, Poly> {
        &self.cols[col]
    }

    pub fn get(&self, row: usize, col: usize) -> Option<&Poly> {
        self.cols[col].get(&row)
    }

    /// `(row, col, poly)` in column-then-row order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &Poly)> {
        self.cols
            .iter()
            .enumerate()
            .flat_map(|(c, col)| col.iter().map(move |(&r, p)| (r, c, p)))
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(BTreeMap::len).sum()
    }

    /// `self · rhs`.
    pub fn mul(&self, rhs: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.ncols(), rhs.nrows());
        let mut out = SparseMatrix::zeros(self.rows, rhs.ncols());
        for (c, col) in rhs.cols.iter().enumerate() {
            for (&mid, p) in col {
                for (&r, q) in &self.cols[mid] {
                    for (mp, cp) in p {
                        for (mq, cq) in q {
                            out.add_term(r, c, cp * cq, mp.mul(mq));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(BTreeMap::is_empty)
    }
}

/// Graded free complex `0 ← C_0 ← C_1 ← …` with labeled bases, a multidegree
/// for every basis element, and `diffs[i-1] = d_i : C_i → C_{i-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledChainComplex {
    n: usize,
    bases: Vec<Vec<BasisLabel>>,
    mdeg: Vec<Vec<Monomial>>,
    diffs: Vec<SparseMatrix>,
}

impl LabeledChainComplex {
    pub fn new(
        n: usize,
        bases: Vec<Vec<BasisLabel>>,
        mdeg: Vec<Vec<Monomial>>,
        diffs: Vec<SparseMatrix>,
    ) -> Self {
        assert_eq!(bases.len(), mdeg.len());
        assert_eq!(diffs.len(), bases.len().saturating_sub(1));
        for (i, d) in diffs.iter().enumerate() {
            assert_eq!(d.nrows(), bases[i].len());
            assert_eq!(d.ncols(), bases[i + 1].len());
        }
        LabeledChainComplex { n, bases, mdeg, diffs }
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    /// Number of homological degrees stored (`0..len`).
    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.bases.iter().map(Vec::len).collect()
    }

    pub fn rank(&self, i: usize) -> usize {
        self.bases.get(i).map_or(0, Vec::len)
    }

    pub fn basis(&self, i: usize) -> &[BasisLabel] {
        &self.bases[i]
    }

    pub fn multidegrees(&self, i: usize) -> &[Monomial] {
        &self.mdeg[i]
    }

    /// `d_i : C_i → C_{i-1}` for `1 ≤ i < len`.
    pub fn diff(&self, i: usize) -> &SparseMatrix {
        &self.diffs[i - 1]
    }

    /// Returns the complex with every basis relabeled by `f`.
    pub fn relabel(mut self, f: impl Fn(&BasisLabel) -> BasisLabel) -> Self {
        for b in &mut self.bases {
            for l in b.iter_mut() {
                *l = f(l);
            }
        }
        self
    }

    /// Reorders every basis by label.
    pub fn canonicalize(&self) -> Self {
        let perms: Vec<Vec<usize>> = self
            .bases
            .iter()
            .map(|b| {
                let mut idx: Vec<usize> = (0..b.len()).collect();
                idx.sort_by(|&x, &y| b[x].cmp(&b[y]));
                idx
            })
            .collect();
        let inverse: Vec<Vec<usize>> = perms
            .iter()
            .map(|p| {
                let mut inv = vec![0; p.len()];
                for (new, &old) in p.iter().enumerate() {
                    inv[old] = new;
                }
                inv
            })
            .collect();
        let bases = self
            .bases
            .iter()
            .zip(&perms)
            .map(|(b, p)| p.iter().map(|&i| b[i].clone()).collect())
            .collect();
        let mdeg = self
            .mdeg
            .iter()
            .zip(&perms)
            .map(|(b, p)| p.iter().map(|&i| b[i].clone()).collect())
            .collect();
        let diffs = self
            .diffs
            .iter()
            .enumerate()
            .map(|(k, d)| {
                let mut out = SparseMatrix::zeros(d.nrows(), d.ncols());
                for (r, c, p) in d.iter() {
                    for (m, v) in p {
                        out.add_term(inverse[k][r], inverse[k + 1][c], *v, m.clone());
                    }
                }
                out
            })
            .collect();
        LabeledChainComplex { n: self.n, bases, mdeg, diffs }
    }

    /// `(degree, row label, column label) ↦ entry` for label-based comparison.
    pub fn entry_map(&self) -> BTreeMap<(usize, BasisLabel, BasisLabel), Poly> {
        let mut out = BTreeMap::new();
        for i in 1..self.len() {
            for (r, c, p) in self.diff(i).iter() {
                out.insert((i, self.bases[i - 1][r].clone(), self.bases[i][c].clone()), p.clone());
            }
        }
        out
    }

    /// Every nonzero entry `(r, c)` satisfies `mdeg(c) = mono · mdeg(r)`.
    pub fn check_homogeneous(&self) -> bool {
        (1..self.len()).all(|i| {
            self.diff(i).iter().all(|(r, c, p)| {
                p.keys().all(|m| m.mul(&self.mdeg[i - 1][r]) == self.mdeg[i][c])
            })
        })
    }

    /// Graded ranks: `(homological degree, multidegree) ↦ count`.
    pub fn graded_ranks(&self) -> BTreeMap<(usize, Monomial), usize> {
        let mut out = BTreeMap::new();
        for (i, degs) in self.mdeg.iter().enumerate() {
            for m in degs {
                *out.entry((i, m.clone())).or_insert(0) += 1;
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let diff: Vec<Value> = (1..self.len())
            .map(|i| {
                let entries: Vec<Value> = self
                    .diff(i)
                    .iter()
                    .flat_map(|(r, c, p)| {
                        p.iter().map(move |(m, v)| json!([r, c, v, m.exponents()]))
                    })
                    .collect();
                json!({"deg": i, "entries": entries})
            })
            .collect();
        json!({
            "n": self.n,
            "ranks": self.ranks(),
            "basis": self.bases.iter().map(|b| b.iter().map(BasisLabel::to_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "multidegrees": self.mdeg.iter().map(|b| b.iter().map(|m| m.exponents().to_vec()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "diff": diff,
        })
    }
}

/// Outcome of [`check_dd_zero`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DdReport {
    pub zero: bool,
    /// `(i, row, col)`: first nonzero entry of `d_{i-1} ∘ d_i`.
    pub witness: Option<(usize, usize, usize)>,
}

/// Exact symbolic check that consecutive differentials compose to zero.
pub fn check_dd_zero(c: &LabeledChainComplex) -> DdReport {
    for i in 2..c.len() {
        let prod = c.diff(i - 1).mul(c.diff(i));
        let first = prod.iter().next().map(|(r, col, _)| (i, r, col));
        if first.is_some() {
            return DdReport { zero: false, witness: first };
        }
    }
    DdReport { zero: true, witness: None }
}

/// True iff no differential entry has a unit monomial coefficient.
pub fn check_minimal(c: &LabeledChainComplex) -> bool {
    (1..c.len()).all(|i| c.diff(i).iter().all(|(_, _, p)| p.keys().all(|m| m.degree() > 0)))
}

/// Incrementally assembles a complex from labeled basis elements.
#[derive(Debug)]
pub struct ComplexBuilder {
    n: usize,
    bases: Vec<Vec<BasisLabel>>,
    mdeg: Vec<Vec<Monomial>>,
    index: Vec<HashMap<BasisLabel, usize>>,
    terms: Vec<(usize, usize, usize, i64, Monomial)>,
}

impl ComplexBuilder {
    pub fn new(n: usize) -> Self {
        ComplexBuilder { n, bases: Vec::new(), mdeg: Vec::new(), index: Vec::new(), terms: Vec::new() }
    }

    pub fn add_basis(&mut self, deg: usize, label: BasisLabel, mdeg: Monomial) -> usize {
        while self.bases.len() <= deg {
            self.bases.push(Vec::new());
            self.mdeg.push(Vec::new());
            self.index.push(HashMap::new());
        }
        if let Some(&i) = self.index[deg].get(&label) {
            return i;
        }
        let i = self.bases[deg].len();
        self.index[deg].insert(label.clone(), i);
        self.bases[deg].push(label);
        self.mdeg[deg].push(mdeg);
        i
    }

    pub fn lookup(&self, deg: usize, label: &BasisLabel) -> Option<usize> {
        self.index.get(deg).and_then(|m| m.get(label).copied())
    }

    /// Adds `coeff · mono · row` to `d(col)`; `col` lives in degree `deg`.
    pub fn add_term(&mut self, deg: usize, col: usize, row: usize, coeff: i64, mono: Monomial) {
        self.terms.push((deg, row, col, coeff, mono));
    }

    pub fn finish(self) -> LabeledChainComplex {
        let mut diffs: Vec<SparseMatrix> = (1..self.bases.len())
            .map(|i| SparseMatrix::zeros(self.bases[i - 1].len(), self.bases[i].len()))
            .collect();
        for (deg, row, col, coeff, mono) in self.terms {
            diffs[deg - 1].add_term(row, col, coeff, mono);
        }
        LabeledChainComplex::new(self.n, self.bases, self.mdeg, diffs)
    }
}

fn sign(k: usize) -> i64 {
    if k.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

fn subsets_of_size(items: &[usize], size: usize) -> Vec<Vec<usize>> {
    fn rec(items: &[usize], size: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            if items.len() - i < size - cur.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, size, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, size, 0, &mut Vec::new(), &mut out);
    out
}

pub(crate) fn all_subsets(items: &[usize]) -> Vec<Vec<usize>> {
    (0..=items.len()).flat_map(|s| subsets_of_size(items, s)).collect()
}

fn without(alpha: &[usize], t: usize) -> Vec<usize> {
    alpha.iter().copied().filter(|&x| x != t).collect()
}

/// Koszul complex on the variables `vars`, every multidegree multiplied by
/// `shift`: `d(S) = Σ_k (-1)^k x_{s_k} (S ∖ s_k)` with `k` 0-based.
pub fn koszul_complex(vars: &[usize], shift: &Monomial) -> LabeledChainComplex {
    let n = shift.nvars();
    let mut vars = vars.to_vec();
    vars.sort_unstable();
    vars.dedup();
    let mut b = ComplexBuilder::new(n);
    for size in 0..=vars.len() {
        for s in subsets_of_size(&vars, size) {
            let md = shift.mul(&Monomial::from_support(n, &s));
            b.add_basis(size, BasisLabel::Face(s), md);
        }
    }
    for size in 1..=vars.len() {
        for s in subsets_of_size(&vars, size) {
            let col = b.lookup(size, &BasisLabel::Face(s.clone())).unwrap();
            for (k, &t) in s.iter().enumerate() {
                let row = b.lookup(size - 1, &BasisLabel::Face(without(&s, t))).unwrap();
                b.add_term(size, col, row, sign(k), Monomial::var(n, t));
            }
        }
    }
    b.finish()
}

/// Degree-wise map `ψ_i : G_i → F_i`.
#[derive(Clone, Debug)]
pub struct ChainMap {
    pub source: LabeledChainComplex,
    pub target: LabeledChainComplex,
    /// `maps[i]` has `target.rank(i)` rows and `source.rank(i)` columns.
    pub maps: Vec<SparseMatrix>,
}

impl ChainMap {
    pub fn new(source: LabeledChainComplex, target: LabeledChainComplex, maps: Vec<SparseMatrix>) -> Self {
        ChainMap { source, target, maps }
    }

    fn map(&self, i: usize) -> SparseMatrix {
        self.maps
            .get(i)
            .cloned()
            .unwrap_or_else(|| SparseMatrix::zeros(self.target.rank(i), self.source.rank(i)))
    }

    /// First degree `i ≥ 1` where `d_F ψ_i ≠ ψ_{i-1} d_G`.
    pub fn commutes(&self) -> std::result::Result<(), usize> {
        let top = self.source.len().max(self.target.len());
        for i in 1..top {
            let lhs = if i < self.target.len() {
                self.target.diff(i).mul(&self.map(i))
            } else {
                SparseMatrix::zeros(self.target.rank(i - 1), self.source.rank(i))
            };
            let rhs = if i < self.source.len() {
                self.map(i - 1).mul(self.source.diff(i))
            } else {
                SparseMatrix::zeros(self.target.rank(i - 1), self.source.rank(i))
            };
            if lhs != rhs {
                return Err(i);
            }
        }
        Ok(())
    }
}

/// Mapping cone `C(ψ) = G[1] ⊕ F` with
/// `d(g, f) = (−d_G g, ψ(g) + d_F f)`. Degree `i` lists `G_{i-1}` (labels
/// wrapped in [`BasisLabel::Cone`]) before `F_i`.
pub fn mapping_cone(psi: &ChainMap) -> Result<LabeledChainComplex> {
    psi.commutes().map_err(Error::NonCommutingChainMap)?;
    let g = &psi.source;
    let f = &psi.target;
    let n = g.nvars().max(f.nvars());
    let len = if g.is_empty() { f.len() } else { (g.len() + 1).max(f.len()) };
    let mut bases = Vec::with_capacity(len);
    let mut mdeg = Vec::with_capacity(len);
    for i in 0..len {
        let mut b = Vec::new();
        let mut m = Vec::new();
        if i >= 1 && i - 1 < g.len() {
            b.extend(g.basis(i - 1).iter().map(|l| BasisLabel::Cone(Box::new(l.clone()))));
            m.extend(g.multidegrees(i - 1).iter().cloned());
        }
        if i < f.len() {
            b.extend(f.basis(i).iter().cloned());
            m.extend(f.multidegrees(i).iter().cloned());
        }
        bases.push(b);
        mdeg.push(m);
    }
    let mut diffs = Vec::with_capacity(len.saturating_sub(1));
    for i in 1..len {
        let g_lo = if i >= 2 { g.rank(i - 2) } else { 0 };
        let g_hi = g.rank(i - 1);
        let mut d = SparseMatrix::zeros(bases[i - 1].len(), bases[i].len());
        // columns from G_{i-1}
        if i >= 2 && i - 1 < g.len() {
            for (r, c, p) in g.diff(i - 1).iter() {
                for (m, v) in p {
                    d.add_term(r, c, -v, m.clone());
                }
            }
        }
        if i - 1 < g.len() {
            for (r, c, p) in psi.map(i - 1).iter() {
                for (m, v) in p {
                    d.add_term(g_lo + r, c, *v, m.clone());
                }
            }
        }
        // columns from F_i
        if i < f.len() {
            for (r, c, p) in f.diff(i).iter() {
                for (m, v) in p {
                    d.add_term(g_lo + r, g_hi + c, *v, m.clone());
                }
            }
        }
        diffs.push(d);
    }
    Ok(LabeledChainComplex::new(n, bases, mdeg, diffs))
}

fn symbol_mdeg(ideal: &OrderedIdeal, s: &Symbol) -> Monomial {
    ideal.gen(s.gen).mul(&Monomial::from_support(ideal.nvars(), &s.alpha))
}

/// Resolution of `R/I` on the symbols `(m_j; α)`, `α ⊆ set(m_j)`, with
/// differential
/// `d(m;α) = Σ_i (-1)^i x_{j_i}(m; α∖j_i) + Σ_{j_i ∈ T(α)} (-1)^{i-1} (x_{j_i} m / r(x_{j_i} m)) (r(x_{j_i} m); α∖j_i)`
/// where `T(α)` is [`DecompRule::lead_vars`] and `i` is the 1-based position
/// in sorted `α`. Symbols `(g; β)` with `β ⊄ set(m_g)` are zero.
pub fn rule_resolution(ideal: &OrderedIdeal, rule: &DecompRule) -> Result<LabeledChainComplex> {
    let sets = ideal.set_table()?;
    let n = ideal.nvars();
    let mut b = ComplexBuilder::new(n);
    b.add_basis(0, BasisLabel::Unit, Monomial::one(n));
    let mut symbols = Vec::new();
    for (j, set) in sets.iter().enumerate() {
        for alpha in all_subsets(set) {
            symbols.push(Symbol::new(j, alpha));
        }
    }
    symbols.sort_by(|a, b| a.alpha.len().cmp(&b.alpha.len()).then_with(|| a.cmp(b)));
    for s in &symbols {
        b.add_basis(s.degree(), BasisLabel::Symbol(s.clone()), symbol_mdeg(ideal, s));
    }
    for s in &symbols {
        let deg = s.degree();
        let col = b.lookup(deg, &BasisLabel::Symbol(s.clone())).unwrap();
        let m = ideal.gen(s.gen);
        if s.alpha.is_empty() {
            b.add_term(1, col, 0, 1, m.clone());
            continue;
        }
        for (pos, &t) in s.alpha.iter().enumerate() {
            let face = Symbol::new(s.gen, without(&s.alpha, t));
            let row = b.lookup(deg - 1, &BasisLabel::Symbol(face)).unwrap();
            b.add_term(deg, col, row, sign(pos + 1), Monomial::var(n, t));
        }
        let lead = rule.lead_vars(ideal, s.gen, &s.alpha);
        for (pos, &t) in s.alpha.iter().enumerate() {
            if !lead.contains(&t) {
                continue;
            }
            let g = rule.target(s.gen, t).ok_or(Error::NotInSet { gen: s.gen, var: t })?;
            let beta = without(&s.alpha, t);
            if !is_subset(&beta, &sets[g]) {
                continue;
            }
            let coeff = m.mul_var(t).div(ideal.gen(g)).expect("rule target divides x_t m");
            let row = b.lookup(deg - 1, &BasisLabel::Symbol(Symbol::new(g, beta))).unwrap();
            b.add_term(deg, col, row, sign(pos), coeff);
        }
    }
    Ok(b.finish())
}

/// The minimal resolution of an ideal with linear quotients and a regular
/// decomposition function, with the differential
/// `d(m;α) = Σ(-1)^i x_{j_i}(m;α∖j_i) − Σ(-1)^i (x_{j_i}m / b(x_{j_i}m)) (b(x_{j_i}m); α∖j_i)`.
pub fn ht_resolution(ideal: &OrderedIdeal) -> Result<LabeledChainComplex> {
    let report = ideal.check_regularity()?;
    if !report.regular {
        return Err(Error::NotRegular);
    }
    rule_resolution(ideal, &DecompRule::canonical_b(ideal)?)
}

/// The comparison map `ψ : K(set(m_j))·m_j → F^{(j-1)}` of one mapping-cone
/// step, given by the rule-terms of [`rule_resolution`].
fn cone_step_map(
    ideal: &OrderedIdeal,
    rule: &DecompRule,
    j: usize,
    koszul: &LabeledChainComplex,
    prev: &LabeledChainComplex,
) -> Result<Vec<SparseMatrix>> {
    let sets = ideal.set_table()?;
    let n = ideal.nvars();
    let m = ideal.gen(j);
    let mut maps = Vec::with_capacity(koszul.len());
    let prev_index: Vec<HashMap<&BasisLabel, usize>> = (0..prev.len())
        .map(|i| prev.basis(i).iter().enumerate().map(|(k, l)| (l, k)).collect())
        .collect();
    for i in 0..koszul.len() {
        let mut map = SparseMatrix::zeros(prev.rank(i), koszul.rank(i));
        for (c, label) in koszul.basis(i).iter().enumerate() {
            let BasisLabel::Face(alpha) = label else { unreachable!() };
            if alpha.is_empty() {
                let row = prev_index[0][&BasisLabel::Unit];
                map.add_term(row, c, 1, m.clone());
                continue;
            }
            let lead = rule.lead_vars(ideal, j, alpha);
            for (pos, &t) in alpha.iter().enumerate() {
                if !lead.contains(&t) {
                    continue;
                }
                let g = rule.target(j, t).ok_or(Error::NotInSet { gen: j, var: t })?;
                let beta = without(alpha, t);
                if !is_subset(&beta, &sets[g]) {
                    continue;
                }
                let coeff = m.mul_var(t).div(ideal.gen(g)).expect("rule target divides x_t m");
                let target = BasisLabel::Symbol(Symbol::new(g, beta));
                let row = *prev_index
                    .get(i)
                    .and_then(|ix| ix.get(&target))
                    .ok_or_else(|| Error::NotACellComplex(format!("missing symbol in step {j}")))?;
                map.add_term(row, c, sign(pos), coeff);
            }
        }
        debug_assert_eq!(map.nrows(), prev.rank(i));
        let _ = n;
        maps.push(map);
    }
    Ok(maps)
}

/// Builds the same resolution generator by generator as an iterated mapping
/// cone of Koszul complexes; each step verifies that `ψ` is a chain map.
pub fn iterated_cone_resolution(ideal: &OrderedIdeal, rule: &DecompRule) -> Result<LabeledChainComplex> {
    let sets = ideal.set_table()?.clone();
    let n = ideal.nvars();
    let mut b = ComplexBuilder::new(n);
    b.add_basis(0, BasisLabel::Unit, Monomial::one(n));
    let mut current = b.finish();
    for (j, set) in sets.iter().enumerate() {
        let k = koszul_complex(set, ideal.gen(j));
        let maps = cone_step_map(ideal, rule, j, &k, &current)?;
        let psi = ChainMap::new(k, current, maps);
        current = mapping_cone(&psi)?.relabel(|l| match l {
            BasisLabel::Cone(inner) => match inner.as_ref() {
                BasisLabel::Face(alpha) => BasisLabel::Symbol(Symbol::new(j, alpha.clone())),
                other => other.clone(),
            },
            other => other.clone(),
        });
    }
    Ok(current.canonicalize())
}

/// Per-degree signs `s_i` with `d_i^a = s_i · d_i^b` entrywise after matching
/// basis labels. Returns a description of the first mismatch otherwise.
pub fn compare_up_to_degree_sign(
    a: &LabeledChainComplex,
    b: &LabeledChainComplex,
) -> std::result::Result<Vec<i64>, String> {
    if a.ranks() != b.ranks() {
        return Err(format!("ranks differ: {:?} vs {:?}", a.ranks(), b.ranks()));
    }
    for i in 0..a.len() {
        let mut la: Vec<&BasisLabel> = a.basis(i).iter().collect();
        let mut lb: Vec<&BasisLabel> = b.basis(i).iter().collect();
        la.sort();
        lb.sort();
        if la != lb {
            return Err(format!("bases differ in degree {i}"));
        }
    }
    let ea = a.entry_map();
    let eb = b.entry_map();
    let mut signs = vec![0i64; a.len()];
    if !signs.is_empty() {
        signs[0] = 1;
    }
    for i in 1..a.len() {
        let keys_a: Vec<_> = ea.keys().filter(|k| k.0 == i).collect();
        let keys_b: Vec<_> = eb.keys().filter(|k| k.0 == i).collect();
        if keys_a != keys_b {
            let missing = keys_a
                .iter()
                .find(|k| !eb.contains_key(k))
                .or_else(|| keys_b.iter().find(|k| !ea.contains_key(k)));
            return Err(format!("support differs in degree {i}: {missing:?}"));
        }
        let mut s = 0i64;
        for k in keys_a {
            let pa = &ea[k];
            let pb = &eb[k];
            let cand = if pa == pb {
                1
            } else if pa.iter().map(|(m, v)| (m, -v)).eq(pb.iter().map(|(m, v)| (m, *v))) {
                -1
            } else {
                return Err(format!("entry {k:?} differs: {pa:?} vs {pb:?}"));
            };
            if s == 0 {
                s = cand;
            } else if s != cand {
                return Err(format!("inconsistent sign in degree {i} at {k:?}"));
            }
        }
        signs[i] = if s == 0 { 1 } else { s };
    }
    Ok(signs)
}

/// Binomial counts `Σ_j C(|set(m_j)|, i-1)` for `i ≥ 1`, with 1 in degree 0.
pub fn symbol_counts(sets: &[Vec<usize>]) -> Vec<usize> {
    let top = sets.iter().map(Vec::len).max().unwrap_or(0);
    let mut out = vec![0usize; top + 2];
    out[0] = 1;
    for s in sets {
        let p = s.len();
        let mut c = 1usize;
        for i in 0..=p {
            out[i + 1] += c;
            c = c * (p - i) / (i + 1);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideal::parse_ideal;

    const EXAMPLE_ONE: &str = "x1*x3*x4, x1*x3*x5, x1*x2*x4, x1*x4*x5, x2*x3*x4, x2*x3*x5";
    const RUNNING: &str = "x1*x2, x1*x3, x1*x5, x2*x3, x2*x5, x3*x5, x4*x5";

    fn mono(n: usize, vars1: &[usize]) -> Monomial {
        let v: Vec<usize> = vars1.iter().map(|v| v - 1).collect();
        Monomial::from_support(n, &v)
    }

    #[test]
    fn koszul_ranks_and_differential() {
        let shift = mono(5, &[2, 3, 5]);
        let k = koszul_complex(&[0, 3], &shift);
        assert_eq!(k.ranks(), vec![1, 2, 1]);
        let col = k.basis(2).iter().position(|l| *l == BasisLabel::Face(vec![0, 3])).unwrap();
        let r4 = k.basis(1).iter().position(|l| *l == BasisLabel::Face(vec![3])).unwrap();
        let r1 = k.basis(1).iter().position(|l| *l == BasisLabel::Face(vec![0])).unwrap();
        assert_eq!(k.diff(2).get(r4, col), Some(&Poly::from([(mono(5, &[1]), 1)])));
        assert_eq!(k.diff(2).get(r1, col), Some(&Poly::from([(mono(5, &[4]), -1)])));
        assert!(check_dd_zero(&k).zero);
        assert!(k.check_homogeneous());

        let k0 = koszul_complex(&[], &mono(3, &[1]));
        assert_eq!(k0.ranks(), vec![1]);
        let k3 = koszul_complex(&[0, 1, 2], &Monomial::one(3));
        assert_eq!(k3.ranks(), vec![1, 3, 3, 1]);
        assert!(check_dd_zero(&k3).zero);
    }

    #[test]
    fn cone_of_zero_and_identity() {
        let empty = LabeledChainComplex::new(1, vec![], vec![], vec![]);
        let zero = ChainMap::new(empty.clone(), empty, vec![]);
        assert_eq!(mapping_cone(&zero).unwrap().ranks(), Vec::<usize>::new());

        let mut b = ComplexBuilder::new(1);
        b.add_basis(0, BasisLabel::Unit, Monomial::one(1));
        let f = b.finish();
        let mut id = SparseMatrix::zeros(1, 1);
        id.add_term(0, 0, 1, Monomial::one(1));
        let cone = mapping_cone(&ChainMap::new(f.clone(), f, vec![id])).unwrap();
        assert_eq!(cone.ranks(), vec![1, 1]);
        assert_eq!(cone.diff(1).get(0, 0), Some(&Poly::from([(Monomial::one(1), 1)])));
        assert!(!check_minimal(&cone));
    }

    #[test]
    fn cone_rejects_non_chain_map() {
        let k = koszul_complex(&[0], &Monomial::one(2));
        let mut b = ComplexBuilder::new(2);
        b.add_basis(0, BasisLabel::Unit, Monomial::one(2));
        let f = b.finish();
        // ψ_0 = x2 forces d_F ψ_1 = x1 x2 but F_1 = 0
        let mut psi0 = SparseMatrix::zeros(1, 1);
        psi0.add_term(0, 0, 1, mono(2, &[2]));
        let psi = ChainMap::new(k, f, vec![psi0]);
        assert!(matches!(mapping_cone(&psi), Err(Error::NonCommutingChainMap(1))));
    }

    #[test]
    fn ht_example_one_entry() {
        let i = parse_ideal(EXAMPLE_ONE).unwrap();
        let c = ht_resolution(&i).unwrap();
        assert!(check_dd_zero(&c).zero);
        assert!(check_minimal(&c));
        assert!(c.check_homogeneous());
        // d(x2x3x5; {1}) = -x1 (x2x3x5; ∅) + x2 (x1x3x5; ∅)
        let col = c.basis(2).iter().position(|l| *l == BasisLabel::Symbol(Symbol::new(5, vec![0]))).unwrap();
        let own = c.basis(1).iter().position(|l| *l == BasisLabel::Symbol(Symbol::new(5, vec![]))).unwrap();
        let other = c.basis(1).iter().position(|l| *l == BasisLabel::Symbol(Symbol::new(1, vec![]))).unwrap();
        assert_eq!(c.diff(2).get(own, col), Some(&Poly::from([(mono(5, &[1]), -1)])));
        assert_eq!(c.diff(2).get(other, col), Some(&Poly::from([(mono(5, &[2]), 1)])));
        assert_eq!(c.diff(2).column(col).len(), 2);
    }

    #[test]
    fn ht_running_example_ranks_and_cone_agreement() {
        let i = parse_ideal(RUNNING).unwrap();
        let c = ht_resolution(&i).unwrap();
        assert_eq!(c.ranks(), vec![1, 7, 11, 6, 1]);
        assert_eq!(symbol_counts(i.set_table().unwrap()), vec![1, 7, 11, 6, 1]);
        assert!(check_dd_zero(&c).zero);
        assert!(check_minimal(&c));
        let cones = iterated_cone_resolution(&i, &DecompRule::canonical_b(&i).unwrap()).unwrap();
        assert_eq!(cones, c.canonicalize());
    }

    #[test]
    fn maximal_ideal_is_koszul() {
        let i = parse_ideal("x1, x2, x3, x4").unwrap();
        let c = ht_resolution(&i).unwrap();
        assert_eq!(c.ranks(), vec![1, 4, 6, 4, 1]);
        assert!(check_dd_zero(&c).zero);
        assert!(check_minimal(&c));
    }

    #[test]
    fn sign_flip_is_detected() {
        let i = parse_ideal(RUNNING).unwrap();
        let c = ht_resolution(&i).unwrap();
        let mut diffs: Vec<SparseMatrix> = (1..c.len()).map(|k| c.diff(k).clone()).collect();
        let (r, col, p) = {
            let (r, col, p) = diffs[1].iter().next().unwrap();
            (r, col, p.clone())
        };
        for (m, v) in &p {
            diffs[1].add_term(r, col, -2 * v, m.clone());
        }
        let bases = (0..c.len()).map(|k| c.basis(k).to_vec()).collect();
        let mdeg = (0..c.len()).map(|k| c.multidegrees(k).to_vec()).collect();
        let bad = LabeledChainComplex::new(c.nvars(), bases, mdeg, diffs);
        let rep = check_dd_zero(&bad);
        assert!(!rep.zero);
        assert!(rep.witness.is_some());
    }

    #[test]
    fn compare_detects_sign_patterns() {
        let i = parse_ideal(RUNNING).unwrap();
        let c = ht_resolution(&i).unwrap();
        assert_eq!(compare_up_to_degree_sign(&c, &c).unwrap(), vec![1; 5]);
        let c_neg = LabeledChainComplex::new(
            c.nvars(),
            (0..c.len()).map(|k| c.basis(k).to_vec()).collect(),
            (0..c.len()).map(|k| c.multidegrees(k).to_vec()).collect(),
            (1..c.len())
                .map(|k| {
                    let mut d = c.diff(k).clone();
                    if k == 2 {
                        let mut neg = SparseMatrix::zeros(d.nrows(), d.ncols());
                        for (r, col, p) in d.iter() {
                            for (m, v) in p {
                                neg.add_term(r, col, -v, m.clone());
                            }
                        }
                        d = neg;
                    }
                    d
                })
                .collect(),
        );
        assert_eq!(compare_up_to_degree_sign(&c_neg, &c).unwrap(), vec![1, 1, -1, 1, 1]);
    }

    #[test]
    fn rejects_irregular_or_non_lq() {
        let bad = parse_ideal("x1*x2, x3*x4").unwrap();
        assert!(matches!(ht_resolution(&bad), Err(Error::NotLinearQuotients { .. })));
    }
}
