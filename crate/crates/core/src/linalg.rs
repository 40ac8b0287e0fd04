//! Exact ranks of sparse integer matrices: fraction-free elimination over the
//! integers (rank over ℚ) and a prime-field pre-filter.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Default pre-filter prime, `2^31 - 1`.
pub const DEFAULT_PRIME: u64 = 2_147_483_647;

/// Sparse integer matrix stored by columns; `cols[c]` holds `(row, value)`
/// pairs with strictly increasing rows and nonzero values.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExactMatrix {
    nrows: usize,
    cols: Vec<Vec<(usize, i64)>>,
}

impl ExactMatrix {
    pub fn new(nrows: usize, mut cols: Vec<Vec<(usize, i64)>>) -> Self {
        for col in &mut cols {
            col.retain(|&(_, v)| v != 0);
            col.sort_unstable_by_key(|&(r, _)| r);
            debug_assert!(col.windows(2).all(|w| w[0].0 < w[1].0));
            debug_assert!(col.iter().all(|&(r, _)| r < nrows));
        }
        ExactMatrix { nrows, cols }
    }

    pub fn from_dense(rows: &[Vec<i64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let cols = (0..ncols)
            .map(|c| (0..nrows).map(|r| (r, rows[r][c])).collect())
            .collect();
        ExactMatrix::new(nrows, cols)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn columns(&self) -> &[Vec<(usize, i64)>] {
        &self.cols
    }
}

/// Which arithmetic the rank computations use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RankConfig {
    /// `Some(p)`: run over GF(p) first and confirm over ℚ only where the
    /// prime-field answer could differ. `None`: ℚ only.
    pub prime: Option<u64>,
}

impl Default for RankConfig {
    fn default() -> Self {
        RankConfig { prime: Some(DEFAULT_PRIME) }
    }
}

impl RankConfig {
    pub fn rational_only() -> Self {
        RankConfig { prime: None }
    }

    pub fn with_prime(p: u64) -> Result<Self> {
        validate_prime(p)?;
        Ok(RankConfig { prime: Some(p) })
    }

    /// Reads `RESOLVE_PRIME` when set, else the default prime.
    pub fn from_env() -> Result<Self> {
        match std::env::var("RESOLVE_PRIME") {
            Ok(s) => {
                let p: u64 = s.trim().parse().map_err(|_| Error::InvalidPrime(0))?;
                RankConfig::with_prime(p)
            }
            Err(_) => Ok(RankConfig::default()),
        }
    }
}

/// Accepts primes with `2^20 < p < 2^32`.
pub fn validate_prime(p: u64) -> Result<()> {
    if p <= 1 << 20 || p >= 1 << 32 {
        return Err(Error::InvalidPrime(p));
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return Err(Error::InvalidPrime(p));
        }
        d += 1;
    }
    Ok(())
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

/// Column reduction with pivot = largest row index. `clear` lists columns
/// known to reduce to zero; they are skipped. Returns the pivot row of every
/// column (`None` when it reduced to zero).
pub fn pivots_mod_p(m: &ExactMatrix, p: u64, clear: &[bool]) -> Vec<Option<usize>> {
    let mut owner: Vec<Option<usize>> = vec![None; m.nrows];
    let mut reduced: Vec<Vec<(usize, u64)>> = Vec::with_capacity(m.ncols());
    let mut out = Vec::with_capacity(m.ncols());
    for (c, col) in m.cols.iter().enumerate() {
        if clear.get(c).copied().unwrap_or(false) {
            reduced.push(Vec::new());
            out.push(None);
            continue;
        }
        let mut v: Vec<(usize, u64)> =
            col.iter().map(|&(r, x)| (r, x.rem_euclid(p as i64) as u64)).filter(|&(_, x)| x != 0).collect();
        while let Some(&(low, val)) = v.last() {
            let Some(k) = owner[low] else { break };
            let piv = &reduced[k];
            let inv = pow_mod(piv.last().unwrap().1, p - 2, p);
            let factor = val * inv % p;
            v = axpy_mod(&v, piv, p - factor, p);
        }
        if let Some(&(low, _)) = v.last() {
            owner[low] = Some(c);
            out.push(Some(low));
        } else {
            out.push(None);
        }
        reduced.push(v);
    }
    out
}

/// `a + f·b` over GF(p) on sorted sparse vectors.
fn axpy_mod(a: &[(usize, u64)], b: &[(usize, u64)], f: u64, p: u64) -> Vec<(usize, u64)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ra = a.get(i).map_or(usize::MAX, |x| x.0);
        let rb = b.get(j).map_or(usize::MAX, |x| x.0);
        if ra < rb {
            out.push(a[i]);
            i += 1;
        } else if rb < ra {
            out.push((rb, b[j].1 * f % p));
            j += 1;
        } else {
            let v = (a[i].1 + b[j].1 * f) % p;
            if v != 0 {
                out.push((ra, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Pivot rows over ℚ via fraction-free integer column elimination: a column
/// with the same pivot as an earlier one is replaced by
/// `a·col − b·piv` and divided by the content of the result.
pub fn pivots_rational(m: &ExactMatrix, clear: &[bool]) -> Vec<Option<usize>> {
    let mut owner: Vec<Option<usize>> = vec![None; m.nrows];
    let mut reduced: Vec<Vec<(usize, BigInt)>> = Vec::with_capacity(m.ncols());
    let mut out = Vec::with_capacity(m.ncols());
    for (c, col) in m.cols.iter().enumerate() {
        if clear.get(c).copied().unwrap_or(false) {
            reduced.push(Vec::new());
            out.push(None);
            continue;
        }
        let mut v: Vec<(usize, BigInt)> = col.iter().map(|&(r, x)| (r, BigInt::from(x))).collect();
        while let Some((low, val)) = v.last().cloned() {
            let Some(k) = owner[low] else { break };
            let piv = &reduced[k];
            let pval = &piv.last().unwrap().1;
            let g = val.gcd(pval);
            let a = pval / &g;
            let b = &val / &g;
            v = combine_int(&v, &a, piv, &b);
            normalize_content(&mut v);
        }
        if let Some((low, _)) = v.last() {
            owner[*low] = Some(c);
            out.push(Some(*low));
        } else {
            out.push(None);
        }
        reduced.push(v);
    }
    out
}

/// `a·x − b·y` on sorted sparse integer vectors.
fn combine_int(x: &[(usize, BigInt)], a: &BigInt, y: &[(usize, BigInt)], b: &BigInt) -> Vec<(usize, BigInt)> {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        let rx = x.get(i).map_or(usize::MAX, |e| e.0);
        let ry = y.get(j).map_or(usize::MAX, |e| e.0);
        if rx < ry {
            out.push((rx, a * &x[i].1));
            i += 1;
        } else if ry < rx {
            out.push((ry, -(b * &y[j].1)));
            j += 1;
        } else {
            let v = a * &x[i].1 - b * &y[j].1;
            if !v.is_zero() {
                out.push((rx, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

fn normalize_content(v: &mut [(usize, BigInt)]) {
    let mut g = BigInt::zero();
    for (_, x) in v.iter() {
        g = g.gcd(x);
        if g.is_one() {
            return;
        }
    }
    if g.is_zero() {
        return;
    }
    for (_, x) in v.iter_mut() {
        *x = &*x / &g;
    }
}

/// Rank over GF(p).
pub fn rank_mod_p(m: &ExactMatrix, p: u64) -> usize {
    pivots_mod_p(m, p, &[]).iter().flatten().count()
}

/// Rank over ℚ.
pub fn rank_rational(m: &ExactMatrix) -> usize {
    pivots_rational(m, &[]).iter().flatten().count()
}

/// Dense fraction-free Gaussian elimination (Bareiss) over arbitrary
/// precision integers; an independent check of [`rank_rational`].
pub fn rank_bareiss(rows: &[Vec<i64>]) -> usize {
    let mut a: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let nrows = a.len();
    let ncols = a.first().map_or(0, Vec::len);
    let mut prev = BigInt::one();
    let mut rank = 0;
    for col in 0..ncols {
        if rank == nrows {
            break;
        }
        let Some(piv) = (rank..nrows).find(|&r| !a[r][col].is_zero()) else { continue };
        a.swap(rank, piv);
        for r in rank + 1..nrows {
            for c in col + 1..ncols {
                let v = (&a[rank][col] * &a[r][c] - &a[r][col] * &a[rank][c]) / &prev;
                a[r][c] = v;
            }
            a[r][col] = BigInt::zero();
        }
        prev = a[rank][col].clone();
        rank += 1;
    }
    rank
}

/// Exact rank over ℚ. With a prime configured, the GF(p) rank is accepted
/// when it is already maximal; otherwise ℚ decides and disagreements are
/// logged.
pub fn exact_rank(m: &ExactMatrix, cfg: RankConfig) -> usize {
    if let Some(p) = cfg.prime {
        let rp = rank_mod_p(m, p);
        if rp == m.nrows().min(m.ncols()) {
            return rp;
        }
        let rq = rank_rational(m);
        if rq != rp {
            log::warn!("GF({p}) rank {rp} disagrees with rational rank {rq}; using the rational rank");
        }
        return rq;
    }
    rank_rational(m)
}

/// Ranks of the maps `d_1, …, d_{len-1}` of a chain complex, computed top
/// down with clearing. `diffs[i-1]` maps degree `i` to degree `i-1`.
fn complex_ranks(diffs: &[ExactMatrix], field: Option<u64>) -> Vec<usize> {
    let mut ranks = vec![0; diffs.len()];
    let mut clear: Vec<bool> = Vec::new();
    for i in (0..diffs.len()).rev() {
        let m = &diffs[i];
        if clear.len() != m.ncols() {
            clear = vec![false; m.ncols()];
        }
        let piv = match field {
            Some(p) => pivots_mod_p(m, p, &clear),
            None => pivots_rational(m, &clear),
        };
        ranks[i] = piv.iter().flatten().count();
        clear = vec![false; m.nrows()];
        for r in piv.into_iter().flatten() {
            clear[r] = true;
        }
    }
    ranks
}

/// Homology dimensions `dim H_i` over ℚ of a complex with `dims[i]` basis
/// elements in degree `i`.
pub fn homology_dims(dims: &[usize], diffs: &[ExactMatrix], cfg: RankConfig) -> Vec<usize> {
    assert_eq!(diffs.len() + 1, dims.len().max(1));
    let from_ranks = |ranks: &[usize]| -> Vec<usize> {
        (0..dims.len())
            .map(|i| {
                let out = if i >= 1 { ranks[i - 1] } else { 0 };
                let inc = ranks.get(i).copied().unwrap_or(0);
                dims[i] - out - inc
            })
            .collect()
    };
    if let Some(p) = cfg.prime {
        let hp = from_ranks(&complex_ranks(diffs, Some(p)));
        if hp.iter().all(|&h| h == 0) {
            return hp;
        }
        let hq = from_ranks(&complex_ranks(diffs, None));
        if hq != hp {
            log::warn!("GF({p}) homology {hp:?} disagrees with rational homology {hq:?}; using the rational result");
        }
        return hq;
    }
    from_ranks(&complex_ranks(diffs, None))
}

/// Whether the vectors `p_1 − p_0, …, p_k − p_0` are linearly independent.
pub fn affinely_independent(points: &[Vec<i64>]) -> bool {
    if points.len() <= 1 {
        return true;
    }
    let base = &points[0];
    let rows: Vec<Vec<i64>> =
        points[1..].iter().map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect()).collect();
    rank_bareiss(&rows) == rows.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_ranks() {
        let id = ExactMatrix::from_dense(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        assert_eq!(rank_rational(&id), 3);
        assert_eq!(rank_mod_p(&id, DEFAULT_PRIME), 3);
        let zero = ExactMatrix::from_dense(&[vec![0, 0], vec![0, 0]]);
        assert_eq!(exact_rank(&zero, RankConfig::default()), 0);
        // vertices × edges of the hollow triangle
        let tri = vec![vec![-1, -1, 0], vec![1, 0, -1], vec![0, 1, 1]];
        assert_eq!(exact_rank(&ExactMatrix::from_dense(&tri), RankConfig::rational_only()), 2);
        assert_eq!(rank_bareiss(&tri), 2);
    }

    #[test]
    fn prime_dependent_rank() {
        // singular mod p but not over ℚ
        let p = 1_048_583u64; // smallest prime above 2^20
        validate_prime(p).unwrap();
        let m = ExactMatrix::from_dense(&[vec![p as i64, 0], vec![0, 1]]);
        assert_eq!(rank_mod_p(&m, p), 1);
        assert_eq!(exact_rank(&m, RankConfig::with_prime(p).unwrap()), 2);
    }

    #[test]
    fn prime_validation() {
        assert!(validate_prime(DEFAULT_PRIME).is_ok());
        assert!(validate_prime(7).is_err());
        assert!(validate_prime((1 << 21) + 1).is_err());
    }

    #[test]
    fn hollow_triangle_homology() {
        let d1 = ExactMatrix::from_dense(&[vec![1, 1, 1]]);
        let d2 = ExactMatrix::from_dense(&[vec![-1, -1, 0], vec![1, 0, -1], vec![0, 1, 1]]);
        let h = homology_dims(&[1, 3, 3], &[d1.clone(), d2], RankConfig::default());
        assert_eq!(h, vec![0, 0, 1]);
        let d3 = ExactMatrix::new(3, vec![vec![(0, 1), (1, -1), (2, 1)]]);
        let d2 = ExactMatrix::from_dense(&[vec![-1, -1, 0], vec![1, 0, -1], vec![0, 1, 1]]);
        let h = homology_dims(&[1, 3, 3, 1], &[d1, d2, d3], RankConfig::rational_only());
        assert_eq!(h, vec![0, 0, 0, 0]);
    }

    #[test]
    fn affine_independence() {
        assert!(affinely_independent(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]));
        assert!(!affinely_independent(&[vec![1, 0], vec![1, 0]]));
        assert!(!affinely_independent(&[vec![0, 0], vec![1, 1], vec![2, 2]]));
    }
}
