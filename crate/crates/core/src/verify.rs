//! Ground-truth oracles: the Taylor complex, multigraded Betti numbers from
//! its strands, and the acyclicity criterion for labeled cell complexes.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::complex::{BasisLabel, ComplexBuilder, LabeledChainComplex};
use crate::error::{Error, Result};
use crate::ideal::OrderedIdeal;
use crate::linalg::{homology_dims, ExactMatrix, RankConfig};
use crate::monomial::Monomial;

/// Default bound on the number of generators for Taylor computations.
pub const DEFAULT_TAYLOR_BOUND: usize = 16;

fn check_bound(ideal: &OrderedIdeal, bound: usize) -> Result<()> {
    if ideal.len() > bound {
        return Err(Error::TooManyGenerators { k: ideal.len(), bound });
    }
    Ok(())
}

fn mask_members(mask: u32, k: usize) -> Vec<usize> {
    (0..k).filter(|&i| mask >> i & 1 == 1).collect()
}

/// lcm of every subset, indexed by bitmask.
fn subset_lcms(ideal: &OrderedIdeal) -> Vec<Monomial> {
    let k = ideal.len();
    let mut out = vec![Monomial::one(ideal.nvars()); 1 << k];
    for mask in 1u32..(1 << k) {
        let low = mask.trailing_zeros() as usize;
        out[mask as usize] = out[(mask & (mask - 1)) as usize].lcm(ideal.gen(low));
    }
    out
}

/// The full simplex on the generators with lcm labels; the empty face is the
/// unit. `d(S) = Σ_k (-1)^k (lcm S / lcm(S ∖ s_k)) (S ∖ s_k)`.
pub fn taylor_complex(ideal: &OrderedIdeal, bound: usize) -> Result<LabeledChainComplex> {
    check_bound(ideal, bound)?;
    let k = ideal.len();
    let lcms = subset_lcms(ideal);
    let mut masks: Vec<u32> = (0u32..(1 << k)).collect();
    masks.sort_by_cached_key(|m| (m.count_ones(), mask_members(*m, k)));
    let mut b = ComplexBuilder::new(ideal.nvars());
    let label = |mask: u32| {
        if mask == 0 {
            BasisLabel::Unit
        } else {
            BasisLabel::Face(mask_members(mask, k))
        }
    };
    let mut pos = vec![0usize; 1 << k];
    for &m in &masks {
        pos[m as usize] = b.add_basis(m.count_ones() as usize, label(m), lcms[m as usize].clone());
    }
    for &m in masks.iter().filter(|&&m| m != 0) {
        let deg = m.count_ones() as usize;
        for (idx, s) in mask_members(m, k).into_iter().enumerate() {
            let face = m & !(1 << s);
            let coeff = lcms[m as usize].div(&lcms[face as usize]).unwrap();
            b.add_term(deg, pos[m as usize], pos[face as usize], if idx % 2 == 0 { 1 } else { -1 }, coeff);
        }
    }
    Ok(b.finish())
}

/// Multigraded Betti numbers `β_{i,b}` of `R/I`, homological degree `i`
/// (so `β_{0,1} = 1`).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BettiTable {
    pub n: usize,
    pub entries: BTreeMap<(usize, Monomial), usize>,
}

impl BettiTable {
    /// Betti table read off a minimal complex: one basis element per
    /// generator of each free module.
    pub fn from_minimal_complex(c: &LabeledChainComplex) -> Self {
        BettiTable { n: c.nvars(), entries: c.graded_ranks() }
    }

    pub fn get(&self, i: usize, b: &Monomial) -> usize {
        self.entries.get(&(i, b.clone())).copied().unwrap_or(0)
    }

    /// `β_i = Σ_b β_{i,b}` for `i = 0 … max`.
    pub fn totals(&self) -> Vec<usize> {
        let top = self.entries.keys().map(|(i, _)| *i).max().map_or(0, |i| i + 1);
        let mut out = vec![0; top];
        for ((i, _), v) in &self.entries {
            out[*i] += v;
        }
        out
    }

    /// `(i, total degree) ↦ β`.
    pub fn graded(&self) -> BTreeMap<(usize, u32), usize> {
        let mut out = BTreeMap::new();
        for ((i, b), v) in &self.entries {
            *out.entry((*i, b.degree())).or_insert(0) += v;
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("i");
        for k in 1..=self.n {
            let _ = write!(s, ",x{k}");
        }
        s.push_str(",value\n");
        for ((i, b), v) in &self.entries {
            let exps: Vec<String> = b.exponents().iter().map(u32::to_string).collect();
            let _ = writeln!(s, "{i},{},{v}", exps.join(","));
        }
        s
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "totals": self.totals(),
            "entries": self.entries.iter().map(|((i, b), v)| json!({"i": i, "b": b.exponents(), "value": v})).collect::<Vec<_>>(),
        })
    }
}

/// `β_{i,b} = dim H_i` of the degree-`b` part of the Taylor complex tensored
/// with the residue field: faces with lcm exactly `b` and the unit-coefficient
/// part of the differential.
pub fn multigraded_betti(ideal: &OrderedIdeal, bound: usize, cfg: RankConfig) -> Result<BettiTable> {
    check_bound(ideal, bound)?;
    let k = ideal.len();
    let lcms = subset_lcms(ideal);
    let mut groups: HashMap<&Monomial, Vec<u32>> = HashMap::new();
    for mask in 0u32..(1 << k) {
        groups.entry(&lcms[mask as usize]).or_default().push(mask);
    }
    let groups: Vec<(&Monomial, Vec<u32>)> = groups.into_iter().collect();
    let per: Vec<Vec<((usize, Monomial), usize)>> = groups
        .par_iter()
        .map(|(b, masks)| {
            let h = strand_homology(masks, k, cfg);
            h.into_iter().enumerate().filter(|(_, v)| *v > 0).map(|(i, v)| ((i, (*b).clone()), v)).collect()
        })
        .collect();
    Ok(BettiTable { n: ideal.nvars(), entries: per.into_iter().flatten().collect() })
}

fn strand_homology(masks: &[u32], k: usize, cfg: RankConfig) -> Vec<usize> {
    let top = masks.iter().map(|m| m.count_ones() as usize).max().unwrap_or(0);
    let mut by_deg: Vec<Vec<u32>> = vec![Vec::new(); top + 1];
    for &m in masks {
        by_deg[m.count_ones() as usize].push(m);
    }
    let index: Vec<HashMap<u32, usize>> =
        by_deg.iter().map(|ms| ms.iter().enumerate().map(|(i, &m)| (m, i)).collect()).collect();
    let dims: Vec<usize> = by_deg.iter().map(Vec::len).collect();
    let diffs: Vec<ExactMatrix> = (1..=top)
        .map(|deg| {
            let cols = by_deg[deg]
                .iter()
                .map(|&m| {
                    mask_members(m, k)
                        .into_iter()
                        .enumerate()
                        .filter_map(|(idx, s)| {
                            let face = m & !(1 << s);
                            index[deg - 1].get(&face).map(|&r| (r, if idx % 2 == 0 { 1 } else { -1 }))
                        })
                        .collect()
                })
                .collect();
            ExactMatrix::new(dims[deg - 1], cols)
        })
        .collect();
    homology_dims(&dims, &diffs, cfg)
}

/// All lcms of nonempty subsets of the generators.
pub fn lcm_lattice(ideal: &OrderedIdeal) -> BTreeSet<Monomial> {
    let mut lattice: BTreeSet<Monomial> = ideal.gens().iter().cloned().collect();
    let mut frontier: Vec<Monomial> = lattice.iter().cloned().collect();
    while let Some(a) = frontier.pop() {
        for g in ideal.gens() {
            let l = a.lcm(g);
            if lattice.insert(l.clone()) {
                frontier.push(l);
            }
        }
    }
    lattice
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CellularReport {
    pub resolution: bool,
    /// A multidegree whose strand has homology.
    pub witness: Option<Monomial>,
    /// Homology of the witness strand, by homological degree.
    pub witness_homology: Vec<usize>,
    pub generators_match: bool,
}

/// Checks that a labeled complex (degree 0 the unit, cells in degree ≥ 1 with
/// monomial labels) is a free resolution of `R/I`: its degree-1 labels are
/// the generators and every strand `X_{≤b}`, `b` in the lcm lattice, is
/// acyclic once augmented by the empty cell.
pub fn check_cellular_resolution(c: &LabeledChainComplex, ideal: &OrderedIdeal, cfg: RankConfig) -> Result<CellularReport> {
    for i in 1..c.len() {
        for (r, col, p) in c.diff(i).iter() {
            let face = &c.multidegrees(i - 1)[r];
            let cell = &c.multidegrees(i)[col];
            if !face.divides(cell) || p.len() != 1 || p.keys().next() != cell.div(face).as_ref() {
                return Err(Error::NonMonotoneLabels);
            }
        }
    }
    let mut deg1: Vec<Monomial> = if c.len() > 1 { c.multidegrees(1).to_vec() } else { Vec::new() };
    deg1.sort();
    let mut gens = ideal.gens().to_vec();
    gens.sort();
    let generators_match = deg1 == gens;

    let lattice: Vec<Monomial> = lcm_lattice(ideal).into_iter().collect();
    let flat = Flat::new(c);
    let results: Vec<(Monomial, Vec<usize>)> = lattice
        .par_iter()
        .filter_map(|b| {
            let h = lower_strand_homology(&flat, b, cfg);
            h.iter().any(|&x| x > 0).then(|| (b.clone(), h))
        })
        .collect();
    let first = results.into_iter().min_by(|a, b| a.0.degree().cmp(&b.0.degree()).then_with(|| a.0.cmp(&b.0)));
    let resolution = first.is_none() && generators_match;
    let (witness, witness_homology) = match first {
        Some((b, h)) => (Some(b), h),
        None => (None, Vec::new()),
    };
    Ok(CellularReport { resolution, witness, witness_homology, generators_match })
}

/// Differentials with bare integer coefficients, built once per complex and
/// shared by every strand.
struct Flat {
    mdeg: Vec<Vec<Monomial>>,
    /// `cols[i][c]` lists `(row, coeff)` of column `c` of `d_i`.
    cols: Vec<Vec<Vec<(usize, i64)>>>,
}

impl Flat {
    fn new(c: &LabeledChainComplex) -> Self {
        let mdeg = (0..c.len()).map(|i| c.multidegrees(i).to_vec()).collect();
        let cols = (0..c.len())
            .map(|i| {
                if i == 0 {
                    return Vec::new();
                }
                (0..c.rank(i))
                    .map(|col| c.diff(i).column(col).iter().map(|(&r, p)| (r, *p.values().next().unwrap())).collect())
                    .collect()
            })
            .collect();
        Flat { mdeg, cols }
    }
}

/// Homology of the subcomplex of basis elements with label dividing `b`.
fn lower_strand_homology(c: &Flat, b: &Monomial, cfg: RankConfig) -> Vec<usize> {
    let keep: Vec<Vec<usize>> = c.mdeg.iter().map(|ms| (0..ms.len()).filter(|&k| ms[k].divides(b)).collect()).collect();
    let dims: Vec<usize> = keep.iter().map(Vec::len).collect();
    let top = dims.iter().rposition(|&d| d > 0).map_or(0, |t| t + 1);
    let dims = dims[..top].to_vec();
    let diffs: Vec<ExactMatrix> = (1..top)
        .map(|i| {
            let mut row_pos = vec![usize::MAX; c.mdeg[i - 1].len()];
            for (p, &r) in keep[i - 1].iter().enumerate() {
                row_pos[r] = p;
            }
            let cols = keep[i]
                .iter()
                .map(|&col| {
                    c.cols[i][col]
                        .iter()
                        .filter(|&&(r, _)| row_pos[r] != usize::MAX)
                        .map(|&(r, v)| (row_pos[r], v))
                        .collect()
                })
                .collect();
            ExactMatrix::new(dims[i - 1], cols)
        })
        .collect();
    if dims.is_empty() {
        return Vec::new();
    }
    homology_dims(&dims, &diffs, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{check_dd_zero, ht_resolution, symbol_counts};
    use crate::ek::{build_ek_cw, cellular_chain_complex};
    use crate::ideal::parse_ideal;

    const RUNNING: &str = "x1*x2, x1*x3, x1*x5, x2*x3, x2*x5, x3*x5, x4*x5";
    const EXAMPLE_ONE: &str = "x1*x3*x4, x1*x3*x5, x1*x2*x4, x1*x4*x5, x2*x3*x4, x2*x3*x5";

    #[test]
    fn taylor_ranks() {
        let t = taylor_complex(&parse_ideal("x1, x2").unwrap(), 16).unwrap();
        assert_eq!(t.ranks(), vec![1, 2, 1]);
        let t = taylor_complex(&parse_ideal(RUNNING).unwrap(), 16).unwrap();
        assert_eq!(t.ranks(), vec![1, 7, 21, 35, 35, 21, 7, 1]);
        assert!(check_dd_zero(&t).zero);
        assert!(t.check_homogeneous());
        let t = taylor_complex(&parse_ideal("x1*x2").unwrap(), 16).unwrap();
        assert_eq!(t.ranks(), vec![1, 1]);
        assert!(matches!(taylor_complex(&parse_ideal(RUNNING).unwrap(), 3), Err(Error::TooManyGenerators { .. })));
    }

    #[test]
    fn betti_totals() {
        let cfg = RankConfig::default();
        let i = parse_ideal(RUNNING).unwrap();
        let b = multigraded_betti(&i, 16, cfg).unwrap();
        assert_eq!(b.totals(), vec![1, 7, 11, 6, 1]);
        assert_eq!(b, BettiTable::from_minimal_complex(&ht_resolution(&i).unwrap()));
        let m = parse_ideal("x1, x2, x3, x4").unwrap();
        assert_eq!(multigraded_betti(&m, 16, cfg).unwrap().totals(), vec![1, 4, 6, 4, 1]);
        let e = parse_ideal(EXAMPLE_ONE).unwrap();
        assert_eq!(
            multigraded_betti(&e, 16, RankConfig::rational_only()).unwrap().totals(),
            symbol_counts(e.set_table().unwrap())
        );
    }

    #[test]
    fn csv_layout() {
        let b = multigraded_betti(&parse_ideal("x1, x2").unwrap(), 16, RankConfig::default()).unwrap();
        let csv = b.to_csv();
        assert!(csv.starts_with("i,x1,x2,value\n0,0,0,1\n"));
        assert!(csv.contains("2,1,1,1\n"));
    }

    #[test]
    fn acyclicity() {
        let cfg = RankConfig::default();
        let i = parse_ideal(RUNNING).unwrap();
        let ek = cellular_chain_complex(&build_ek_cw(&i).unwrap());
        assert!(check_cellular_resolution(&ek, &i, cfg).unwrap().resolution);
        let t = taylor_complex(&i, 16).unwrap();
        assert!(check_cellular_resolution(&t, &i, cfg).unwrap().resolution);

        // hollow triangle: drop the 2-face of the Taylor complex on three generators
        let tri = parse_ideal("x1*x2, x1*x3, x2*x3").unwrap();
        let full = taylor_complex(&tri, 16).unwrap();
        let hollow = LabeledChainComplex::new(
            3,
            (0..3).map(|k| full.basis(k).to_vec()).collect(),
            (0..3).map(|k| full.multidegrees(k).to_vec()).collect(),
            (1..3).map(|k| full.diff(k).clone()).collect(),
        );
        let rep = check_cellular_resolution(&hollow, &tri, RankConfig::rational_only()).unwrap();
        assert!(!rep.resolution);
        assert_eq!(rep.witness, Some(Monomial::from_support(3, &[0, 1, 2])));
        assert_eq!(rep.witness_homology, vec![0, 0, 1]);
    }
}
