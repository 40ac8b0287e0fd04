//! Cointerval d-graphs, their homomorphism complexes, and the decomposition
//! rule c that realizes the homomorphism complex as an iterated mapping cone.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde_json::{json, Value};

use crate::complex::{rule_resolution, BasisLabel, ComplexBuilder, LabeledChainComplex, Symbol};
use crate::ek::{build_cell_with, write_off, GlueCell};
use crate::error::{Error, Result};
use crate::ideal::{is_subset, OrderedIdeal};
use crate::monomial::Monomial;
use crate::rule::{gap_maxima, support_block, DecompRule};

/// A d-uniform hypergraph. Vertices are 0-based internally and 1-based in
/// text form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DGraph {
    d: usize,
    vertices: BTreeSet<usize>,
    edges: BTreeSet<Vec<usize>>,
}

impl DGraph {
    /// Edges are sorted internally; each must have `d` distinct vertices from
    /// `vertices`.
    pub fn new(d: usize, vertices: BTreeSet<usize>, edges: impl IntoIterator<Item = Vec<usize>>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for mut e in edges {
            e.sort_unstable();
            e.dedup();
            if e.len() != d {
                return Err(Error::MalformedGraph(format!("edge {e:?} does not have {d} distinct vertices")));
            }
            if let Some(v) = e.iter().find(|v| !vertices.contains(v)) {
                return Err(Error::MalformedGraph(format!("vertex {} is not in the vertex set", v + 1)));
            }
            set.insert(e);
        }
        Ok(DGraph { d, vertices, edges: set })
    }

    /// A d-graph on `[n]`.
    pub fn on_range(d: usize, n: usize, edges: impl IntoIterator<Item = Vec<usize>>) -> Result<Self> {
        DGraph::new(d, (0..n).collect(), edges)
    }

    pub fn complete(d: usize, n: usize) -> Self {
        let edges = crate::complex::all_subsets(&(0..n).collect::<Vec<_>>()).into_iter().filter(|e| e.len() == d);
        DGraph::on_range(d, n, edges).expect("complete graph is well formed")
    }

    /// Text form: a header line `d n`, then one edge per line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::MalformedGraph("missing header".into()))?;
        let nums = parse_ints(header)?;
        let [d, n] = nums[..] else {
            return Err(Error::MalformedGraph(format!("header must be `d n`, got `{header}`")));
        };
        if d == 0 {
            return Err(Error::MalformedGraph("d must be positive".into()));
        }
        let mut edges = Vec::new();
        for line in lines {
            let e = parse_ints(line)?;
            if e.iter().any(|&v| v == 0 || v > n) {
                return Err(Error::MalformedGraph(format!("vertex out of range in `{line}`")));
            }
            edges.push(e.into_iter().map(|v| v - 1).collect());
        }
        DGraph::on_range(d, n, edges)
    }

    /// The squarefree equigenerated ideal viewed as a d-graph on `[n]`.
    pub fn from_ideal(ideal: &OrderedIdeal) -> Result<Self> {
        let d = ideal.gens().first().map_or(1, |g| g.degree() as usize);
        let mut edges = Vec::new();
        for g in ideal.gens() {
            if !g.is_squarefree() || g.degree() as usize != d {
                return Err(Error::MalformedGraph(format!("{g} is not a squarefree monomial of degree {d}")));
            }
            edges.push(g.support());
        }
        DGraph::on_range(d, ideal.nvars(), edges)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn vertices(&self) -> &BTreeSet<usize> {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<Vec<usize>> {
        &self.edges
    }

    pub fn contains_edge(&self, e: &[usize]) -> bool {
        self.edges.contains(e)
    }

    /// Number of variables of the edge ideal.
    pub fn nvars(&self) -> usize {
        self.vertices.iter().next_back().map_or(0, |v| v + 1)
    }

    /// Edge ideal with generators in lexicographic order.
    pub fn edge_ideal(&self) -> Result<OrderedIdeal> {
        let n = self.nvars();
        let mut gens: Vec<Monomial> = self.edges.iter().map(|e| Monomial::from_support(n, e)).collect();
        gens.sort_by(|a, b| a.lex_cmp(b));
        OrderedIdeal::new(n, gens)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.d, self.nvars());
        for e in &self.edges {
            let v: Vec<String> = e.iter().map(|v| (v + 1).to_string()).collect();
            s.push_str(&v.join(" "));
            s.push('\n');
        }
        s
    }
}

impl fmt::Display for DGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<String> =
            self.edges.iter().map(|e| e.iter().map(|v| (v + 1).to_string()).collect::<Vec<_>>().join("")).collect();
        write!(f, "{{{}}}", edges.join(","))
    }
}

fn parse_ints(line: &str) -> Result<Vec<usize>> {
    line.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Error::MalformedGraph(format!("not an integer: `{t}`"))))
        .collect()
}

/// The `v`-layer: edges `e ∖ v` for edges whose smallest vertex is `v`, as a
/// (d−1)-graph on the vertices above `v`. Vertices below `v` can never carry
/// a layer edge; keeping them would make the nesting condition fail on
/// complete graphs.
pub fn v_layer(h: &DGraph, v: usize) -> DGraph {
    assert!(h.d >= 2, "layers need d ≥ 2");
    let vertices: BTreeSet<usize> = h.vertices.range(v + 1..).copied().collect();
    let edges: BTreeSet<Vec<usize>> = h.edges.iter().filter(|e| e[0] == v).map(|e| e[1..].to_vec()).collect();
    DGraph { d: h.d - 1, vertices, edges }
}

/// Recursive definition: every 1-graph is cointerval; for `d > 1` all layers
/// are cointerval and the `j`-layer is a subgraph of the `i`-layer for `i < j`.
pub fn is_cointerval(h: &DGraph) -> bool {
    if h.d <= 1 {
        return true;
    }
    let layers: Vec<DGraph> = h.vertices.iter().map(|&v| v_layer(h, v)).collect();
    if !layers.iter().all(is_cointerval) {
        return false;
    }
    layers.windows(2).all(|w| w[1].edges.is_subset(&w[0].edges))
}

/// The exchange characterization read literally: for every edge
/// `i_1 < … < i_d`, every `t`, and every `j_1 ≤ i_1, …, j_t ≤ i_t` for which
/// `j_1 … j_t i_{t+1} … i_d` is strictly increasing, that tuple is an edge.
pub fn is_cointerval_exchange(h: &DGraph) -> bool {
    exchange_violations(h).is_empty()
}

/// Every `(edge, replaced tuple)` violating the exchange condition.
pub fn exchange_violations(h: &DGraph) -> Vec<(Vec<usize>, Vec<usize>)> {
    fn rec(h: &DGraph, edge: &[usize], t: usize, prefix: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, Vec<usize>)>) {
        let k = prefix.len();
        if k == t {
            let mut cand = prefix.clone();
            cand.extend_from_slice(&edge[t..]);
            let increasing = cand.windows(2).all(|w| w[0] < w[1]);
            if increasing && !h.contains_edge(&cand) && !out.iter().any(|(e, c)| e == edge && *c == cand) {
                out.push((edge.to_vec(), cand));
            }
            return;
        }
        let lo = prefix.last().map_or(0, |&p| p + 1);
        for j in lo..=edge[k] {
            if !h.vertices.contains(&j) {
                continue;
            }
            prefix.push(j);
            rec(h, edge, t, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for e in &h.edges {
        for t in 1..=h.d {
            rec(h, e, t, &mut Vec::new(), &mut out);
        }
    }
    out
}

/// A cell `σ_1 × ⋯ × σ_d` of the homomorphism complex, blocks strictly
/// increasing (`max σ_ℓ < min σ_{ℓ+1}`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HomCell {
    pub blocks: Vec<Vec<usize>>,
}

impl HomCell {
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum::<usize>() - self.blocks.len()
    }

    /// `Π_ℓ Π_{v ∈ σ_ℓ} x_v`.
    pub fn label(&self, n: usize) -> Monomial {
        let all: Vec<usize> = self.blocks.iter().flatten().copied().collect();
        Monomial::from_support(n, &all)
    }

    /// All product tuples `(v_1, …, v_d)`, `v_ℓ ∈ σ_ℓ`.
    pub fn product_vertices(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for b in &self.blocks {
            out = out
                .into_iter()
                .flat_map(|p: Vec<usize>| {
                    b.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        out
    }
}

impl fmt::Display for HomCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| format!("{{{}}}", b.iter().map(|v| (v + 1).to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Signed faces of a cell: removing the `j`-th element of block `ℓ`
/// (1-based, only when the block keeps an element) carries the sign
/// `(-1)^{ℓ-1+j+|σ_1|+⋯+|σ_{ℓ-1}|}`.
pub fn hom_boundary(cell: &HomCell) -> Vec<(HomCell, i64)> {
    let mut out = Vec::new();
    let mut before = 0usize;
    for (l0, block) in cell.blocks.iter().enumerate() {
        if block.len() >= 2 {
            for j0 in 0..block.len() {
                let mut blocks = cell.blocks.clone();
                blocks[l0].remove(j0);
                let exp = l0 + (j0 + 1) + before;
                out.push((HomCell { blocks }, if exp.is_multiple_of(2) { 1 } else { -1 }));
            }
        }
        before += block.len();
    }
    out
}

/// All cells of `X_H`.
#[derive(Clone, Debug)]
pub struct HomComplex {
    n: usize,
    d: usize,
    cells: Vec<HomCell>,
    index: HashMap<HomCell, usize>,
}

impl HomComplex {
    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn cells(&self) -> &[HomCell] {
        &self.cells
    }

    pub fn cell_id(&self, c: &HomCell) -> Option<usize> {
        self.index.get(c).copied()
    }

    pub fn f_vector(&self) -> Vec<usize> {
        let top = self.cells.iter().map(HomCell::dim).max();
        let mut f = vec![0; top.map_or(0, |d| d + 1)];
        for c in &self.cells {
            f[c.dim()] += 1;
        }
        f
    }

    /// Labeled cellular chain complex, basis labels [`BasisLabel::Cell`].
    pub fn chain_complex(&self) -> LabeledChainComplex {
        let mut b = ComplexBuilder::new(self.n);
        b.add_basis(0, BasisLabel::Unit, Monomial::one(self.n));
        for c in &self.cells {
            b.add_basis(c.dim() + 1, BasisLabel::Cell(c.blocks.clone()), c.label(self.n));
        }
        for c in &self.cells {
            let deg = c.dim() + 1;
            let col = b.lookup(deg, &BasisLabel::Cell(c.blocks.clone())).unwrap();
            let label = c.label(self.n);
            if c.dim() == 0 {
                b.add_term(1, col, 0, 1, label);
                continue;
            }
            for (f, s) in hom_boundary(c) {
                let row = b.lookup(deg - 1, &BasisLabel::Cell(f.blocks.clone())).expect("faces are cells");
                let coeff = label.div(&f.label(self.n)).unwrap();
                b.add_term(deg, col, row, s, coeff);
            }
        }
        b.finish()
    }

    pub fn to_json(&self) -> Value {
        let cells: Vec<Value> = self
            .cells
            .iter()
            .enumerate()
            .map(|(id, c)| {
                let label = c.label(self.n);
                let boundary: Vec<Value> = if c.dim() == 0 {
                    Vec::new()
                } else {
                    hom_boundary(c)
                        .into_iter()
                        .map(|(f, s)| json!([self.index[&f], s, label.div(&f.label(self.n)).unwrap().exponents()]))
                        .collect()
                };
                json!({
                    "id": id,
                    "dim": c.dim(),
                    "blocks": c.blocks.iter().map(|b| b.iter().map(|v| v + 1).collect::<Vec<_>>()).collect::<Vec<_>>(),
                    "label": label.exponents(),
                    "boundary": boundary,
                })
            })
            .collect();
        json!({"n": self.n, "d": self.d, "f_vector": self.f_vector(), "cells": cells})
    }

    /// OFF export of the vertices and the cells of dimension ≤ 2 (cells of
    /// dimension 2 are polygons or triangles; higher cells are skipped).
    pub fn to_off(&self) -> String {
        let verts: Vec<&HomCell> = self.cells.iter().filter(|c| c.dim() == 0).collect();
        let points: Vec<Monomial> = verts.iter().map(|c| c.label(self.n)).collect();
        let vid: HashMap<Vec<usize>, usize> =
            verts.iter().enumerate().map(|(i, c)| (c.blocks.iter().map(|b| b[0]).collect(), i)).collect();
        let mut polys = BTreeSet::new();
        for c in self.cells.iter().filter(|c| (1..=2).contains(&c.dim())) {
            let mut ids: Vec<usize> = c.product_vertices().iter().map(|v| vid[v]).collect();
            if ids.len() == 4 {
                // a square {a,b}×{c,d}: order the corners around the boundary
                ids.swap(2, 3);
            }
            polys.insert(ids);
        }
        write_off(&points, &polys)
    }
}

/// Enumerates every blockwise-increasing tuple whose product vertices are all
/// edges of `h`.
pub fn build_hom_complex(h: &DGraph) -> HomComplex {
    let n = h.nvars();
    let d = h.d;
    let prefixes: Vec<BTreeSet<Vec<usize>>> =
        (0..=d).map(|l| h.edges.iter().map(|e| e[..l].to_vec()).collect()).collect();
    let mut cells = Vec::new();
    fn rec(
        h: &DGraph,
        prefixes: &[BTreeSet<Vec<usize>>],
        blocks: &mut Vec<Vec<usize>>,
        partial: &[Vec<usize>],
        out: &mut Vec<HomCell>,
    ) {
        let l = blocks.len();
        if l == h.d {
            out.push(HomCell { blocks: blocks.clone() });
            return;
        }
        let lo = blocks.last().map_or(0, |b| b.last().unwrap() + 1);
        let cands: Vec<usize> = h
            .vertices
            .range(lo..)
            .copied()
            .filter(|&v| {
                partial.iter().all(|p| {
                    let mut q = p.clone();
                    q.push(v);
                    prefixes[l + 1].contains(&q)
                })
            })
            .collect();
        for sub in crate::complex::all_subsets(&cands) {
            if sub.is_empty() {
                continue;
            }
            let next: Vec<Vec<usize>> = partial
                .iter()
                .flat_map(|p| {
                    sub.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
            blocks.push(sub);
            rec(h, prefixes, blocks, &next, out);
            blocks.pop();
        }
    }
    rec(h, &prefixes, &mut Vec::new(), &[Vec::new()], &mut cells);
    cells.sort_by(|a, b| a.dim().cmp(&b.dim()).then_with(|| a.cmp(b)));
    let index = cells.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
    HomComplex { n, d, cells, index }
}

/// Face → symbol: `m = Π x_{max σ_ℓ}`, `α = ∪ (σ_ℓ ∖ max σ_ℓ)`.
pub fn symbol_of_face(ideal: &OrderedIdeal, cell: &HomCell) -> Result<Symbol> {
    let n = ideal.nvars();
    let maxima: Vec<usize> = cell.blocks.iter().map(|b| *b.last().expect("blocks are nonempty")).collect();
    let m = Monomial::from_support(n, &maxima);
    let gen = ideal.index_of(&m).ok_or(Error::NotInIdeal(m))?;
    let mut alpha: Vec<usize> = cell.blocks.iter().flat_map(|b| b[..b.len() - 1].iter().copied()).collect();
    alpha.sort_unstable();
    if !is_subset(&alpha, &ideal.set_table()?[gen]) {
        return Err(Error::SymbolNotInComplex { gen, alpha });
    }
    Ok(Symbol::new(gen, alpha))
}

/// Symbol → face: `σ_ℓ = {i_ℓ} ∪ {j ∈ α : i_{ℓ-1} < j < i_ℓ}`.
pub fn face_of_symbol(ideal: &OrderedIdeal, s: &Symbol) -> Result<HomCell> {
    if s.gen >= ideal.len() {
        return Err(Error::IndexOutOfRange(s.gen));
    }
    if !is_subset(&s.alpha, &ideal.set_table()?[s.gen]) {
        return Err(Error::AlphaNotInSet(s.gen));
    }
    let support = ideal.gen(s.gen).support();
    let not_face = || Error::SymbolNotInComplex { gen: s.gen, alpha: s.alpha.clone() };
    if !ideal.gen(s.gen).is_squarefree() {
        return Err(not_face());
    }
    let mut blocks: Vec<Vec<usize>> = support.iter().map(|_| Vec::new()).collect();
    for &j in &s.alpha {
        let k = support_block(&support, j);
        if k >= support.len() || support[k] == j {
            return Err(not_face());
        }
        blocks[k].push(j);
    }
    for (b, &i) in blocks.iter_mut().zip(&support) {
        b.push(i);
    }
    let cell = HomCell { blocks };
    let n = ideal.nvars();
    if !cell.product_vertices().iter().all(|v| ideal.index_of(&Monomial::from_support(n, v)).is_some()) {
        return Err(not_face());
    }
    Ok(cell)
}

/// `A_1, …, A_d` for the generator `m = x_{i_1} ⋯ x_{i_d}`: `A_ℓ` collects the
/// `j` with `i_{ℓ-1} < j < i_ℓ` for which replacing `x_{i_ℓ}` by `x_j` stays in
/// the ideal.
pub fn partition_a(ideal: &OrderedIdeal, m: usize) -> Vec<Vec<usize>> {
    let g = ideal.gen(m);
    let support = g.support();
    let n = ideal.nvars();
    (0..support.len())
        .map(|l| {
            let lo = if l == 0 { 0 } else { support[l - 1] + 1 };
            (lo..support[l])
                .filter(|&j| {
                    let mut e = g.mul_var(j).exponents().to_vec();
                    e[support[l]] -= 1;
                    ideal.contains(&Monomial::from_exponents(e)) && j < n
                })
                .collect()
        })
        .collect()
}

/// `T(α)`: the maxima of the nonempty `α ∩ A_ℓ`, ascending.
pub fn compute_t(ideal: &OrderedIdeal, m: usize, alpha: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = partition_a(ideal, m)
        .iter()
        .filter_map(|a| alpha.iter().copied().filter(|j| a.contains(j)).max())
        .collect();
    out.sort_unstable();
    out
}

/// `c(x_i m) = x_i m / x_{j_k}` for the smallest support index `j_k ≥ i` of
/// the generator `m`.
pub fn decomp_c(ideal: &OrderedIdeal, m: &Monomial, i: usize) -> Result<Monomial> {
    let j = ideal.index_of(m).ok_or_else(|| Error::NotInIdeal(m.clone()))?;
    if !ideal.set_table()?[j].contains(&i) {
        return Err(Error::NotInSet { gen: j, var: i });
    }
    let support = m.support();
    let k = support_block(&support, i);
    let jk = *support.get(k).ok_or(Error::NotInSet { gen: j, var: i })?;
    Ok(m.mul_var(i).div(&Monomial::var(m.nvars(), jk)).expect("x_{j_k} divides m"))
}

/// Whether the ideal is the lex-ordered edge ideal of a cointerval d-graph.
pub fn is_cointerval_ideal(ideal: &OrderedIdeal) -> bool {
    let Ok(h) = DGraph::from_ideal(ideal) else { return false };
    let lex_ordered = ideal.gens().windows(2).all(|w| w[0].lex_cmp(&w[1]).is_lt());
    lex_ordered && is_cointerval(&h)
}

/// The rule c; the ideal must be a lex-ordered cointerval edge ideal.
pub fn c_rule(ideal: &OrderedIdeal) -> Result<DecompRule> {
    if !is_cointerval_ideal(ideal) {
        return Err(Error::NotCointerval);
    }
    DecompRule::c_rule(ideal)
}

/// The resolution on the symbols with differential
/// `d(m;α) = Σ(-1)^i x_{j_i}(m;α∖j_i) + Σ_{j_i∈T(α)} (-1)^{i-1} (x_{j_i}m / c(x_{j_i}m)) (c(x_{j_i}m); α∖j_i)`.
pub fn homcone_resolution(ideal: &OrderedIdeal) -> Result<LabeledChainComplex> {
    rule_resolution(ideal, &c_rule(ideal)?)
}

/// Union of the c-chains over the admissible permutations of `α`.
pub fn admissible_perm_cells(ideal: &OrderedIdeal, m: usize, alpha: &[usize]) -> Result<GlueCell> {
    build_cell_with(ideal, &c_rule(ideal)?, m, alpha)
}

/// `T(α)` as computed by the rule machinery, for cross-checking.
pub fn lead_vars_c(ideal: &OrderedIdeal, m: usize, alpha: &[usize]) -> Vec<usize> {
    gap_maxima(ideal, m, alpha)
}
