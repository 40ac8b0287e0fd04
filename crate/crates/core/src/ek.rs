//! Geometric realization of the mapping-cone resolution: chain simplices
//! `ch(m, α, σ)` on generator exponent vectors, the glued cells `U(m, α)`,
//! and the assembled CW complex with its labeled cellular chain complex.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::complex::{all_subsets, BasisLabel, ComplexBuilder, LabeledChainComplex, Symbol};
use crate::error::{Error, Result};
use crate::ideal::{is_subset, OrderedIdeal};
use crate::linalg::affinely_independent;
use crate::monomial::Monomial;
use crate::rule::DecompRule;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SimplexChain {
    pub source: usize,
    pub alpha: Vec<usize>,
    pub sigma: Vec<usize>,
    /// `vertices[0] = source`, `vertices[k] = rule(x_{σ_k} vertices[k-1])`.
    pub vertices: Vec<usize>,
    pub degenerate: bool,
}

impl SimplexChain {
    pub fn dim(&self) -> usize {
        self.sigma.len()
    }
}

/// `ch(m, α, σ)` for the rule.
pub fn ch_simplex_with(
    ideal: &OrderedIdeal,
    rule: &DecompRule,
    m: usize,
    alpha: &[usize],
    sigma: &[usize],
) -> Result<SimplexChain> {
    let sets = ideal.set_table()?;
    if m >= ideal.len() {
        return Err(Error::IndexOutOfRange(m));
    }
    let mut sorted = sigma.to_vec();
    sorted.sort_unstable();
    if !is_subset(alpha, &sets[m]) || sorted != alpha {
        return Err(Error::AlphaNotInSet(m));
    }
    let mut vertices = Vec::with_capacity(sigma.len() + 1);
    vertices.push(m);
    let mut cur = m;
    for &t in sigma {
        cur = rule.step(cur, t);
        vertices.push(cur);
    }
    let distinct: BTreeSet<usize> = vertices.iter().copied().collect();
    let degenerate = distinct.len() != vertices.len();
    Ok(SimplexChain { source: m, alpha: alpha.to_vec(), sigma: sigma.to_vec(), vertices, degenerate })
}

/// `ch(m, α, σ)` for the decomposition function b.
pub fn ch_simplex(ideal: &OrderedIdeal, m: usize, alpha: &[usize], sigma: &[usize]) -> Result<SimplexChain> {
    ch_simplex_with(ideal, &DecompRule::canonical_b(ideal)?, m, alpha, sigma)
}

/// Swap-push: the first variable whose step stays put is moved towards the
/// front until its step moves, and this repeats until the chain is
/// non-degenerate.
pub fn nondegenerate_lift_with(
    ideal: &OrderedIdeal,
    rule: &DecompRule,
    m: usize,
    alpha: &[usize],
    sigma: &[usize],
) -> Result<Vec<usize>> {
    let start = ch_simplex_with(ideal, rule, m, alpha, sigma)?;
    if !start.degenerate {
        return Err(Error::AlreadyNondegenerate);
    }
    let p = sigma.len();
    let mut cur = sigma.to_vec();
    for _ in 0..=p * p {
        let chain = ch_simplex_with(ideal, rule, m, alpha, &cur)?;
        let Some(s) = (1..=p).find(|&k| chain.vertices[k] == chain.vertices[k - 1]) else {
            let want: BTreeSet<usize> = start.vertices.iter().copied().collect();
            let got: BTreeSet<usize> = chain.vertices.iter().copied().collect();
            if want.is_subset(&got) {
                return Ok(cur);
            }
            return Err(Error::LiftFailed(m));
        };
        // σ_s (1-based) stalls at vertices[s-1]; push it back until it moves.
        let mut pos = s - 1;
        while pos > 0 && rule.step(chain.vertices[pos - 1], cur[pos]) == chain.vertices[pos - 1] {
            cur.swap(pos - 1, pos);
            pos -= 1;
        }
        if pos > 0 {
            cur.swap(pos - 1, pos);
        }
    }
    Err(Error::LiftFailed(m))
}

pub fn nondegenerate_lift(ideal: &OrderedIdeal, m: usize, alpha: &[usize], sigma: &[usize]) -> Result<Vec<usize>> {
    nondegenerate_lift_with(ideal, &DecompRule::canonical_b(ideal)?, m, alpha, sigma)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FacetKind {
    /// Shared with the chain of the adjacent transposition `partner`.
    Interior { partner: Vec<usize> },
    Exterior,
}

/// Classifies the facet of a non-degenerate chain that omits the vertex at
/// position `dropped`.
pub fn classify_facet_with(
    ideal: &OrderedIdeal,
    rule: &DecompRule,
    chain: &SimplexChain,
    dropped: usize,
) -> Result<FacetKind> {
    if chain.degenerate {
        return Err(Error::DegenerateChain);
    }
    let p = chain.dim();
    if dropped > p {
        return Err(Error::IndexOutOfRange(dropped));
    }
    if dropped == 0 || dropped == p {
        return Ok(FacetKind::Exterior);
    }
    let mut partner = chain.sigma.clone();
    partner.swap(dropped - 1, dropped);
    if !rule.admissible(ideal, chain.source, &partner) {
        return Ok(FacetKind::Exterior);
    }
    let other = ch_simplex_with(ideal, rule, chain.source, &chain.alpha, &partner)?;
    let shares = (0..=p).filter(|&k| k != dropped).all(|k| other.vertices[k] == chain.vertices[k]);
    if !other.degenerate && shares {
        Ok(FacetKind::Interior { partner })
    } else {
        Ok(FacetKind::Exterior)
    }
}

pub fn classify_facet(ideal: &OrderedIdeal, chain: &SimplexChain, dropped: usize) -> Result<FacetKind> {
    classify_facet_with(ideal, &DecompRule::canonical_b(ideal)?, chain, dropped)
}

/// Sign of the permutation carrying `sigma` to its descending arrangement.
pub fn orientation_sign(sigma: &[usize]) -> i64 {
    let mut ascending = 0usize;
    for a in 0..sigma.len() {
        for b in a + 1..sigma.len() {
            if sigma[a] < sigma[b] {
                ascending += 1;
            }
        }
    }
    if ascending.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `(-1)^{p(p-1)/2}`: the dimension-dependent factor that makes the glued
/// orientations agree with the algebraic differential.
fn dimension_sign(p: usize) -> i64 {
    if (p * p.saturating_sub(1) / 2).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlueCell {
    pub source: usize,
    pub alpha: Vec<usize>,
    /// Non-degenerate member chains with their orientation signs.
    pub simplices: Vec<(SimplexChain, i64)>,
}

impl GlueCell {
    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn symbol(&self) -> Symbol {
        Symbol::new(self.source, self.alpha.clone())
    }

    /// Simplicial boundary of the oriented union, keyed by the facet's vertex
    /// list (in chain order). Interior facets cancel.
    pub fn geometric_boundary(&self) -> BTreeMap<Vec<usize>, i64> {
        let mut out: BTreeMap<Vec<usize>, i64> = BTreeMap::new();
        for (ch, sgn) in &self.simplices {
            for i in 0..ch.vertices.len() {
                let mut face = ch.vertices.clone();
                face.remove(i);
                let s = if i % 2 == 0 { *sgn } else { -*sgn };
                *out.entry(face).or_insert(0) += s;
            }
        }
        out.retain(|_, v| *v != 0);
        out
    }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, x);
            out.push(tail);
        }
    }
    out
}

/// Admissible non-degenerate chains of `(m, α)`, in lexicographic order of σ.
pub fn member_chains(ideal: &OrderedIdeal, rule: &DecompRule, m: usize, alpha: &[usize]) -> Result<Vec<SimplexChain>> {
    let mut out = Vec::new();
    for sigma in permutations(alpha) {
        if !rule.admissible(ideal, m, &sigma) {
            continue;
        }
        let ch = ch_simplex_with(ideal, rule, m, alpha, &sigma)?;
        if !ch.degenerate {
            out.push(ch);
        }
    }
    Ok(out)
}

/// `U(m, α)` for the rule: the union of its non-degenerate admissible chains,
/// oriented by `(-1)^{p(p-1)/2} ε(σ)`. Interior facets must occur in exactly
/// two members with cancelling induced orientations.
pub fn build_cell_with(ideal: &OrderedIdeal, rule: &DecompRule, m: usize, alpha: &[usize]) -> Result<GlueCell> {
    let p = alpha.len();
    let kappa = dimension_sign(p);
    let simplices: Vec<(SimplexChain, i64)> = member_chains(ideal, rule, m, alpha)?
        .into_iter()
        .map(|ch| {
            let s = kappa * orientation_sign(&ch.sigma);
            (ch, s)
        })
        .collect();
    if simplices.is_empty() {
        return Err(Error::NotACellComplex(format!("no non-degenerate chain for {}", Symbol::new(m, alpha.to_vec()))));
    }
    let mut induced: HashMap<Vec<usize>, Vec<i64>> = HashMap::new();
    for (ch, sgn) in &simplices {
        for i in 0..=p {
            let mut face = ch.vertices.clone();
            face.remove(i);
            induced.entry(face).or_default().push(if i % 2 == 0 { *sgn } else { -*sgn });
        }
    }
    for signs in induced.values() {
        match signs.len() {
            1 => {}
            2 if signs[0] + signs[1] == 0 => {}
            2 => return Err(Error::OrientationClash { gen: m, alpha: alpha.to_vec() }),
            k => {
                return Err(Error::NotACellComplex(format!(
                    "facet of {} lies in {k} simplices",
                    Symbol::new(m, alpha.to_vec())
                )))
            }
        }
    }
    Ok(GlueCell { source: m, alpha: alpha.to_vec(), simplices })
}

pub fn build_cell(ideal: &OrderedIdeal, m: usize, alpha: &[usize]) -> Result<GlueCell> {
    build_cell_with(ideal, &DecompRule::canonical_b(ideal)?, m, alpha)
}

fn without(alpha: &[usize], t: usize) -> Vec<usize> {
    alpha.iter().copied().filter(|&x| x != t).collect()
}

/// The signed faces of `U(m, α)` predicted by the algebraic differential:
/// `Σ_i (-1)^i U(m, α∖j_i) + Σ_{j_i ∈ T(α)} (-1)^{i-1} U(rule(x_{j_i} m), α∖j_i)`,
/// omitting faces `(g, β)` with `β ⊄ set(m_g)`. For a vertex the boundary is
/// the empty cell, returned as an empty list.
pub fn cell_boundary_with(ideal: &OrderedIdeal, rule: &DecompRule, cell: &GlueCell) -> Result<Vec<(Symbol, i64)>> {
    let sets = ideal.set_table()?;
    let mut out: BTreeMap<Symbol, i64> = BTreeMap::new();
    let lead = rule.lead_vars(ideal, cell.source, &cell.alpha);
    for (pos, &t) in cell.alpha.iter().enumerate() {
        let i = pos + 1;
        let beta = without(&cell.alpha, t);
        *out.entry(Symbol::new(cell.source, beta.clone())).or_insert(0) += if i % 2 == 0 { 1 } else { -1 };
        if lead.contains(&t) {
            let g = rule.target(cell.source, t).ok_or(Error::NotInSet { gen: cell.source, var: t })?;
            if is_subset(&beta, &sets[g]) {
                *out.entry(Symbol::new(g, beta)).or_insert(0) += if i % 2 == 0 { -1 } else { 1 };
            }
        }
    }
    Ok(out.into_iter().filter(|(_, v)| *v != 0).collect())
}

pub fn cell_boundary(ideal: &OrderedIdeal, cell: &GlueCell) -> Result<Vec<(Symbol, i64)>> {
    cell_boundary_with(ideal, &DecompRule::canonical_b(ideal)?, cell)
}

/// CW complex assembled from all glued cells `U(m, α)`, `α ⊆ set(m)`.
#[derive(Clone, Debug)]
pub struct CwComplex {
    n: usize,
    gens: Vec<Monomial>,
    rule: DecompRule,
    /// Cells sorted by dimension, then symbol.
    cells: Vec<GlueCell>,
    index: HashMap<Symbol, usize>,
    /// Geometric boundary of each cell as `(cell id, sign)`.
    boundary: Vec<Vec<(usize, i64)>>,
}

impl CwComplex {
    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn rule(&self) -> &DecompRule {
        &self.rule
    }

    pub fn cells(&self) -> &[GlueCell] {
        &self.cells
    }

    pub fn cell(&self, id: usize) -> &GlueCell {
        &self.cells[id]
    }

    pub fn cell_id(&self, s: &Symbol) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn boundary(&self, id: usize) -> &[(usize, i64)] {
        &self.boundary[id]
    }

    pub fn dim(&self) -> Option<usize> {
        self.cells.last().map(GlueCell::dim)
    }

    pub fn f_vector(&self) -> Vec<usize> {
        let mut f = vec![0; self.dim().map_or(0, |d| d + 1)];
        for c in &self.cells {
            f[c.dim()] += 1;
        }
        f
    }

    /// `m · x_α`, which is also the lcm of the cell's vertex labels.
    pub fn label(&self, id: usize) -> Monomial {
        let c = &self.cells[id];
        self.gens[c.source].mul(&Monomial::from_support(self.n, &c.alpha))
    }

    /// Topological `∂∂ = 0`.
    pub fn check_dd_zero(&self) -> bool {
        self.cells.iter().enumerate().all(|(id, _)| {
            let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
            for &(f, s) in &self.boundary[id] {
                for &(g, t) in &self.boundary[f] {
                    *acc.entry(g).or_insert(0) += s * t;
                }
            }
            acc.values().all(|&v| v == 0)
        })
    }

    /// Every non-degenerate member simplex has affinely independent vertices.
    pub fn simplices_affinely_independent(&self) -> bool {
        self.cells.iter().all(|c| {
            c.simplices.iter().all(|(ch, _)| {
                let pts: Vec<Vec<i64>> = ch
                    .vertices
                    .iter()
                    .map(|&v| self.gens[v].exponents().iter().map(|&e| e as i64).collect())
                    .collect();
                affinely_independent(&pts)
            })
        })
    }

    pub fn to_json(&self) -> Value {
        let cells: Vec<Value> = self
            .cells
            .iter()
            .enumerate()
            .map(|(id, c)| {
                let label = self.label(id);
                json!({
                    "id": id,
                    "dim": c.dim(),
                    "source": c.source + 1,
                    "alpha": c.alpha.iter().map(|t| t + 1).collect::<Vec<_>>(),
                    "simplices": c.simplices.iter().map(|(ch, s)| json!({
                        "vertices": ch.vertices.iter().map(|v| v + 1).collect::<Vec<_>>(),
                        "sigma": ch.sigma.iter().map(|t| t + 1).collect::<Vec<_>>(),
                        "sign": s,
                    })).collect::<Vec<_>>(),
                    "label": label.exponents(),
                    "boundary": self.boundary[id].iter().map(|&(f, s)| {
                        let coeff = label.div(&self.label(f)).expect("face label divides cell label");
                        json!([f, s, coeff.exponents()])
                    }).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({
            "n": self.n,
            "generators": self.gens.iter().map(|g| g.exponents().to_vec()).collect::<Vec<_>>(),
            "rule": {"policies": self.rule.policies(), "table": self.rule.entries_one_based()},
            "f_vector": self.f_vector(),
            "cells": cells,
        })
    }

    /// OFF export of the member simplices of all cells of dimension ≤ 3.
    /// Constant coordinates are dropped and the first three remaining kept.
    pub fn to_off(&self) -> String {
        let mut polys: BTreeSet<Vec<usize>> = BTreeSet::new();
        for c in self.cells.iter().filter(|c| c.dim() <= 3) {
            for (ch, _) in &c.simplices {
                let mut v = ch.vertices.clone();
                v.sort_unstable();
                if v.len() <= 3 {
                    polys.insert(v);
                } else {
                    for skip in 0..v.len() {
                        let mut f = v.clone();
                        f.remove(skip);
                        polys.insert(f);
                    }
                }
            }
        }
        write_off(&self.gens, &polys)
    }
}

pub(crate) fn write_off(points: &[Monomial], polys: &BTreeSet<Vec<usize>>) -> String {
    let n = points.first().map_or(0, Monomial::nvars);
    let varying: Vec<usize> = (0..n)
        .filter(|&k| points.iter().any(|p| p.exponents()[k] != points[0].exponents()[k]))
        .collect();
    let kept: Vec<usize> = varying.iter().copied().take(3).collect();
    let mut s = String::from("OFF\n");
    let names: Vec<String> = kept.iter().map(|k| format!("x{}", k + 1)).collect();
    let _ = writeln!(s, "# projection: coordinates {} of {n}", if names.is_empty() { "none".into() } else { names.join(",") });
    let _ = writeln!(s, "{} {} 0", points.len(), polys.len());
    for p in points {
        let mut coords: Vec<String> = kept.iter().map(|&k| p.exponents()[k].to_string()).collect();
        while coords.len() < 3 {
            coords.push("0".into());
        }
        let _ = writeln!(s, "{}", coords.join(" "));
    }
    for f in polys {
        let idx: Vec<String> = f.iter().map(usize::to_string).collect();
        let _ = writeln!(s, "{} {}", f.len(), idx.join(" "));
    }
    s
}

/// Runs the geometric pipeline for an arbitrary rule: builds every cell,
/// computes each geometric boundary simplex by simplex, and resolves the
/// surviving facets into lower cells.
pub fn complex_for_rule(ideal: &OrderedIdeal, rule: &DecompRule) -> Result<CwComplex> {
    let sets = ideal.set_table()?;
    let mut symbols: Vec<Symbol> = sets
        .iter()
        .enumerate()
        .flat_map(|(j, set)| all_subsets(set).into_iter().map(move |a| Symbol::new(j, a)))
        .collect();
    symbols.sort_by(|a, b| a.alpha.len().cmp(&b.alpha.len()).then_with(|| a.cmp(b)));
    let cells: Vec<GlueCell> = symbols
        .par_iter()
        .map(|s| build_cell_with(ideal, rule, s.gen, &s.alpha))
        .collect::<Result<_>>()?;
    let index: HashMap<Symbol, usize> = cells.iter().enumerate().map(|(i, c)| (c.symbol(), i)).collect();

    // vertex list of every member simplex → (owning cell, orientation)
    let mut owner: HashMap<Vec<usize>, (usize, i64)> = HashMap::new();
    for (id, c) in cells.iter().enumerate() {
        for (ch, s) in &c.simplices {
            if let Some(&(other, _)) = owner.get(&ch.vertices) {
                return Err(Error::NotACellComplex(format!(
                    "simplex {:?} lies in cells {} and {}",
                    ch.vertices,
                    cells[other].symbol(),
                    c.symbol()
                )));
            }
            owner.insert(ch.vertices.clone(), (id, *s));
        }
    }
    let boundary: Vec<Vec<(usize, i64)>> = cells
        .par_iter()
        .map(|c| resolve_boundary(c, &cells, &owner))
        .collect::<Result<_>>()?;
    let x = CwComplex { n: ideal.nvars(), gens: ideal.gens().to_vec(), rule: rule.clone(), cells, index, boundary };
    if !x.check_dd_zero() {
        return Err(Error::NotACellComplex("boundary of boundary is nonzero".into()));
    }
    Ok(x)
}

fn resolve_boundary(
    cell: &GlueCell,
    cells: &[GlueCell],
    owner: &HashMap<Vec<usize>, (usize, i64)>,
) -> Result<Vec<(usize, i64)>> {
    if cell.dim() == 0 {
        return Ok(Vec::new());
    }
    let mut coeff: BTreeMap<usize, i64> = BTreeMap::new();
    let mut hits: BTreeMap<usize, usize> = BTreeMap::new();
    for (face, v) in cell.geometric_boundary() {
        let &(id, orient) = owner.get(&face).ok_or_else(|| {
            Error::NotACellComplex(format!("facet {face:?} of {} is not a simplex of any cell", cell.symbol()))
        })?;
        let c = v * orient;
        match coeff.get(&id) {
            Some(&prev) if prev != c => {
                return Err(Error::NotACellComplex(format!(
                    "cell {} meets {} with inconsistent orientation",
                    cell.symbol(),
                    cells[id].symbol()
                )))
            }
            _ => {
                coeff.insert(id, c);
            }
        }
        *hits.entry(id).or_insert(0) += 1;
    }
    for (&id, &k) in &hits {
        if k != cells[id].simplices.len() {
            return Err(Error::NotACellComplex(format!(
                "boundary of {} covers only part of {}",
                cell.symbol(),
                cells[id].symbol()
            )));
        }
    }
    Ok(coeff.into_iter().collect())
}

/// The complex for the decomposition function b; requires regularity.
pub fn build_ek_cw(ideal: &OrderedIdeal) -> Result<CwComplex> {
    if !ideal.check_regularity()?.regular {
        return Err(Error::NotRegular);
    }
    complex_for_rule(ideal, &DecompRule::canonical_b(ideal)?)
}

/// Labeled cellular chain complex: cell `(m, α)` in homological degree
/// `|α| + 1` with label `m x_α`, the empty cell as the unit, and coefficients
/// `label(cell) / label(face)`.
pub fn cellular_chain_complex(x: &CwComplex) -> LabeledChainComplex {
    let mut b = ComplexBuilder::new(x.n);
    b.add_basis(0, BasisLabel::Unit, Monomial::one(x.n));
    let cols: Vec<usize> = x
        .cells
        .iter()
        .enumerate()
        .map(|(id, c)| b.add_basis(c.dim() + 1, BasisLabel::Symbol(c.symbol()), x.label(id)))
        .collect();
    for (id, c) in x.cells.iter().enumerate() {
        let deg = c.dim() + 1;
        let label = x.label(id);
        if c.dim() == 0 {
            b.add_term(1, cols[id], 0, 1, label);
            continue;
        }
        for &(f, s) in &x.boundary[id] {
            let coeff = label.div(&x.label(f)).expect("face label divides cell label");
            b.add_term(deg, cols[id], cols[f], s, coeff);
        }
    }
    b.finish()
}

/// Compares the geometric boundary of every cell with [`cell_boundary_with`].
pub fn check_boundary_formula(ideal: &OrderedIdeal, x: &CwComplex) -> Result<()> {
    for (id, c) in x.cells.iter().enumerate() {
        if c.dim() == 0 {
            continue;
        }
        let formula: BTreeMap<Symbol, i64> = cell_boundary_with(ideal, &x.rule, c)?.into_iter().collect();
        let geometric: BTreeMap<Symbol, i64> =
            x.boundary[id].iter().map(|&(f, s)| (x.cells[f].symbol(), s)).collect();
        if formula != geometric {
            return Err(Error::MismatchWithAlgebraicDifferential(format!(
                "{}: formula {:?} vs geometry {:?}",
                c.symbol(),
                formula,
                geometric
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BallCheck {
    Ball,
    NotBall(String),
    /// Dimension above 3 is not examined.
    Unchecked,
}

fn euler_characteristic(facets: &[Vec<usize>]) -> i64 {
    let mut faces: BTreeSet<Vec<usize>> = BTreeSet::new();
    for f in facets {
        for s in all_subsets(f) {
            if !s.is_empty() {
                faces.insert(s);
            }
        }
    }
    faces.iter().map(|f| if f.len() % 2 == 1 { 1 } else { -1 }).sum()
}

fn connected(nodes: &BTreeSet<usize>, edges: &[(usize, usize)]) -> bool {
    let Some(&start) = nodes.iter().next() else { return true };
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        for &(a, b) in edges {
            let next = if a == u { b } else if b == u { a } else { continue };
            if seen.insert(next) {
                stack.push(next);
            }
        }
    }
    seen.len() == nodes.len()
}

/// Combinatorial ball test for cells of dimension ≤ 3: a pure pseudomanifold
/// with boundary, connected through codimension one, with Euler
/// characteristic 1, whose boundary is a connected pseudomanifold with the
/// Euler characteristic of a sphere (and connected vertex links in dimension 3).
pub fn ball_check(cell: &GlueCell) -> BallCheck {
    let p = cell.dim();
    if p > 3 {
        return BallCheck::Unchecked;
    }
    let tops: Vec<Vec<usize>> = cell
        .simplices
        .iter()
        .map(|(ch, _)| {
            let mut v = ch.vertices.clone();
            v.sort_unstable();
            v
        })
        .collect();
    if p == 0 {
        return if tops.len() == 1 { BallCheck::Ball } else { BallCheck::NotBall("several vertices".into()) };
    }
    let mut facet_count: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for (k, t) in tops.iter().enumerate() {
        for skip in 0..t.len() {
            let mut f = t.clone();
            f.remove(skip);
            facet_count.entry(f).or_default().push(k);
        }
    }
    let mut dual = Vec::new();
    for owners in facet_count.values() {
        match owners.len() {
            1 => {}
            2 => dual.push((owners[0], owners[1])),
            k => return BallCheck::NotBall(format!("a facet lies in {k} simplices")),
        }
    }
    if !connected(&(0..tops.len()).collect(), &dual) {
        return BallCheck::NotBall("not connected through facets".into());
    }
    if euler_characteristic(&tops) != 1 {
        return BallCheck::NotBall("Euler characteristic differs from 1".into());
    }
    let bdry: Vec<Vec<usize>> = facet_count.iter().filter(|(_, o)| o.len() == 1).map(|(f, _)| f.clone()).collect();
    let sphere_chi = if p % 2 == 1 { 2 } else { 0 };
    if euler_characteristic(&bdry) != sphere_chi {
        return BallCheck::NotBall("boundary Euler characteristic is not that of a sphere".into());
    }
    if p >= 2 {
        let mut ridges: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for f in &bdry {
            for skip in 0..f.len() {
                let mut r = f.clone();
                r.remove(skip);
                *ridges.entry(r).or_insert(0) += 1;
            }
        }
        if ridges.values().any(|&k| k != 2) {
            return BallCheck::NotBall("boundary is not a pseudomanifold".into());
        }
        let verts: BTreeSet<usize> = bdry.iter().flatten().copied().collect();
        let edges: Vec<(usize, usize)> = ridges
            .keys()
            .filter(|r| r.len() == 2)
            .map(|r| (r[0], r[1]))
            .chain(bdry.iter().filter(|f| f.len() == 2).map(|f| (f[0], f[1])))
            .collect();
        if !connected(&verts, &edges) {
            return BallCheck::NotBall("boundary is disconnected".into());
        }
    }
    if p == 3 {
        let verts: BTreeSet<usize> = bdry.iter().flatten().copied().collect();
        for &v in &verts {
            let link: Vec<(usize, usize)> = bdry
                .iter()
                .filter(|f| f.contains(&v))
                .map(|f| {
                    let rest: Vec<usize> = f.iter().copied().filter(|&u| u != v).collect();
                    (rest[0], rest[1])
                })
                .collect();
            let nodes: BTreeSet<usize> = link.iter().flat_map(|&(a, b)| [a, b]).collect();
            if !connected(&nodes, &link) {
                return BallCheck::NotBall(format!("vertex link of m{} is disconnected", v + 1));
            }
        }
    }
    BallCheck::Ball
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{check_dd_zero, check_minimal, compare_up_to_degree_sign, ht_resolution, rule_resolution};
    use crate::ideal::parse_ideal;

    const EXAMPLE_ONE: &str = "x1*x3*x4, x1*x3*x5, x1*x2*x4, x1*x4*x5, x2*x3*x4, x2*x3*x5";
    const RUNNING: &str = "x1*x2, x1*x3, x1*x5, x2*x3, x2*x5, x3*x5, x4*x5";

    #[test]
    fn example_one_chains() {
        let i = parse_ideal(EXAMPLE_ONE).unwrap();
        // x1x4x5 is generator 3; x2 = var 1, x3 = var 2
        let deg = ch_simplex(&i, 3, &[1, 2], &[2, 1]).unwrap();
        assert!(deg.degenerate);
        assert_eq!(deg.vertices, vec![3, 0, 0]);
        let nd = ch_simplex(&i, 3, &[1, 2], &[1, 2]).unwrap();
        assert!(!nd.degenerate);
        assert_eq!(nd.vertices, vec![3, 2, 0]);
        assert_eq!(nondegenerate_lift(&i, 3, &[1, 2], &[2, 1]).unwrap(), vec![1, 2]);
        assert!(matches!(nondegenerate_lift(&i, 3, &[1, 2], &[1, 2]), Err(Error::AlreadyNondegenerate)));
        let single = ch_simplex(&i, 4, &[], &[]).unwrap();
        assert_eq!(single.vertices, vec![4]);
        assert!(!single.degenerate);
        assert!(matches!(ch_simplex(&i, 3, &[0], &[0]), Err(Error::AlphaNotInSet(3))));
    }

    #[test]
    fn example_one_facets_and_cell() {
        let i = parse_ideal(EXAMPLE_ONE).unwrap();
        let nd = ch_simplex(&i, 3, &[1, 2], &[1, 2]).unwrap();
        assert_eq!(classify_facet(&i, &nd, 1).unwrap(), FacetKind::Exterior);
        assert_eq!(classify_facet(&i, &nd, 0).unwrap(), FacetKind::Exterior);
        let deg = ch_simplex(&i, 3, &[1, 2], &[2, 1]).unwrap();
        assert!(matches!(classify_facet(&i, &deg, 1), Err(Error::DegenerateChain)));
        let cell = build_cell(&i, 3, &[1, 2]).unwrap();
        assert_eq!(cell.simplices.len(), 1);
        assert_eq!(ball_check(&cell), BallCheck::Ball);
    }

    #[test]
    fn orientation_signs() {
        assert_eq!(orientation_sign(&[1, 2]), -1);
        assert_eq!(orientation_sign(&[3, 2, 1]), 1);
        assert_eq!(orientation_sign(&[2, 1, 3]), -orientation_sign(&[1, 2, 3]));
    }

    #[test]
    fn running_example_top_cell() {
        let i = parse_ideal(RUNNING).unwrap();
        let cell = build_cell(&i, 6, &[0, 1, 2]).unwrap();
        assert!(cell.simplices.len() >= 2);
        assert_eq!(ball_check(&cell), BallCheck::Ball);
        let b = DecompRule::canonical_b(&i).unwrap();
        for (ch, _) in &cell.simplices {
            for dropped in 0..=3 {
                let kind = classify_facet(&i, ch, dropped).unwrap();
                let mut face = ch.vertices.clone();
                face.remove(dropped);
                let containing = member_chains(&i, &b, 6, &[0, 1, 2])
                    .unwrap()
                    .iter()
                    .filter(|o| face.iter().all(|v| o.vertices.contains(v)))
                    .count();
                match kind {
                    FacetKind::Interior { .. } => assert_eq!(containing, 2),
                    FacetKind::Exterior => assert_eq!(containing, 1),
                }
            }
        }
    }

    #[test]
    fn ek_complex_matches_algebra() {
        for text in [RUNNING, EXAMPLE_ONE, "x1, x2, x3"] {
            let i = parse_ideal(text).unwrap();
            let x = build_ek_cw(&i).unwrap();
            check_boundary_formula(&i, &x).unwrap();
            assert!(x.simplices_affinely_independent());
            let cc = cellular_chain_complex(&x);
            let ht = ht_resolution(&i).unwrap();
            let signs = compare_up_to_degree_sign(&cc, &ht).unwrap();
            assert!(signs.iter().all(|&s| s == 1), "{text}: {signs:?}");
        }
        let x = build_ek_cw(&parse_ideal(RUNNING).unwrap()).unwrap();
        assert_eq!(x.f_vector(), vec![7, 11, 6, 1]);
    }

    #[test]
    fn c_rule_complex_is_the_product_cell() {
        let i = parse_ideal(RUNNING).unwrap();
        let c = DecompRule::c_rule(&i).unwrap();
        let x = complex_for_rule(&i, &c).unwrap();
        check_boundary_formula(&i, &x).unwrap();
        let top = x.cell(x.cell_id(&Symbol::new(6, vec![0, 1, 2])).unwrap());
        assert_eq!(top.simplices.len(), 1);
        assert_eq!(top.simplices[0].0.vertices, vec![6, 5, 4, 2]);
        let cc = cellular_chain_complex(&x);
        let alg = rule_resolution(&i, &c).unwrap();
        assert!(check_dd_zero(&alg).zero);
        assert!(check_minimal(&alg));
        assert_eq!(compare_up_to_degree_sign(&cc, &alg).unwrap(), vec![1; 5]);
    }

    #[test]
    fn off_export_projects() {
        let i = parse_ideal("x1*x2, x1*x3, x2*x3").unwrap();
        let off = build_ek_cw(&i).unwrap().to_off();
        assert!(off.starts_with("OFF\n# projection: coordinates x1,x2,x3 of 3\n3 "));
    }
}
