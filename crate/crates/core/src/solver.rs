//! Direct solver for the complex symmetric saddle-point systems `ℳ X = C`.
//!
//! The matrix is treated as bordered block-diagonal: removing a border set (the
//! system variables) splits the remaining graph into independent blocks (one ring per
//! environment oscillator). Each block is factorized densely with partial pivoting,
//! its contribution is folded into the border's Schur complement, and the Schur
//! complement is factorized last. Without a border every connected component is a
//! block on its own.
//!
//! A [`Factorization`] is immutable once built; concurrent solves against the same
//! factorization are safe (`Factorization: Sync`).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::assembly::QuadraticForm;
use crate::error::{Error, Result};
use crate::sparse::SparseSymMatrix;

/// Relative pivot threshold; pivots below this times `max|ℳ|` are treated as singular.
pub const PIVOT_TOLERANCE: f64 = 1e-14;

/// Largest dimension accepted by [`solve_dense_oracle`].
pub const DENSE_ORACLE_LIMIT: usize = 2000;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Row-major dense LU with partial pivoting.
#[derive(Debug, Clone)]
struct DenseLu {
    n: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
    min_pivot: f64,
    max_pivot: f64,
}

impl DenseLu {
    /// `labels[j]` names column `j` in singularity errors.
    fn factor(mut a: Vec<Complex64>, n: usize, threshold: f64, labels: &[usize]) -> Result<Self> {
        debug_assert_eq!(a.len(), n * n);
        let mut perm: Vec<usize> = (0..n).collect();
        let (mut min_pivot, mut max_pivot) = (f64::INFINITY, 0.0f64);
        for k in 0..n {
            let (p, size) =
                (k..n)
                    .map(|r| (r, a[r * n + k].norm()))
                    .fold(
                        (k, -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if size <= threshold {
                return Err(Error::Singular {
                    index: labels[k],
                    pivot: size,
                    threshold,
                });
            }
            min_pivot = min_pivot.min(size);
            max_pivot = max_pivot.max(size);
            if p != k {
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
            }
            let inv = 1.0 / a[k * n + k];
            let (head, tail) = a.split_at_mut((k + 1) * n);
            let pivot_row = &head[k * n..];
            for row in tail.chunks_exact_mut(n) {
                let f = row[k] * inv;
                if f == ZERO {
                    continue;
                }
                row[k] = f;
                for c in k + 1..n {
                    row[c] -= f * pivot_row[c];
                }
            }
        }
        Ok(Self {
            n,
            lu: a,
            perm,
            min_pivot,
            max_pivot,
        })
    }

    fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: Complex64 = row.iter().zip(&x[..i]).map(|(l, v)| l * v).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            let s: Complex64 = row.iter().zip(&x[i + 1..]).map(|(u, v)| u * v).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        x
    }
}

#[derive(Debug, Clone)]
struct Block {
    /// Global indices of the block variables, ascending.
    nodes: Vec<usize>,
    lu: DenseLu,
    /// Border positions coupled to this block.
    coupled: Vec<usize>,
    /// `A_kk⁻¹ A_kb`, column-major `nodes.len() × coupled.len()`.
    w: Vec<Complex64>,
    /// Entries of `A_bk` as (border position, block-local index, value).
    border_rows: Vec<(usize, usize, Complex64)>,
}

#[derive(Debug, Clone)]
pub struct Factorization {
    d: usize,
    border: Vec<usize>,
    blocks: Vec<Block>,
    schur: DenseLu,
    condition_estimate: Option<f64>,
}

/// Factorizes `ℳ`, using the system variables as the border.
pub fn factorize(form: &QuadraticForm) -> Result<Factorization> {
    Factorization::with_border(&form.m, &form.system)
}

pub fn solve(fact: &Factorization, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
    fact.solve(rhs)
}

impl Factorization {
    pub fn new(m: &SparseSymMatrix) -> Result<Self> {
        Self::with_border(m, &[])
    }

    pub fn with_border(m: &SparseSymMatrix, border: &[usize]) -> Result<Self> {
        let d = m.dim();
        let threshold = PIVOT_TOLERANCE * m.max_abs();
        let mut border: Vec<usize> = border.to_vec();
        border.sort_unstable();
        border.dedup();
        if let Some(&last) = border.last() {
            if last >= d {
                return Err(Error::Dimension {
                    expected: d,
                    got: last + 1,
                });
            }
        }
        let mut border_pos = vec![usize::MAX; d];
        for (p, &g) in border.iter().enumerate() {
            border_pos[g] = p;
        }
        let is_border = |i: usize| border_pos[i] != usize::MAX;

        // connected components of the interior graph
        let mut parent: Vec<usize> = (0..d).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for (i, j, _) in m.iter() {
            if i < j && !is_border(i) && !is_border(j) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
        let mut block_of = vec![usize::MAX; d];
        let mut members: Vec<Vec<usize>> = Vec::new();
        let mut root_block = vec![usize::MAX; d];
        for i in (0..d).filter(|&i| !is_border(i)) {
            let r = find(&mut parent, i);
            if root_block[r] == usize::MAX {
                root_block[r] = members.len();
                members.push(Vec::new());
            }
            block_of[i] = root_block[r];
            members[root_block[r]].push(i);
        }

        let nb = border.len();
        let mut schur: Vec<Complex64> = vec![ZERO; nb * nb];
        for (p, &g) in border.iter().enumerate() {
            for (j, v) in m.row(g) {
                if is_border(j) {
                    schur[p * nb + border_pos[j]] += v;
                }
            }
        }

        let mut blocks = Vec::with_capacity(members.len());
        for (b, nodes) in members.into_iter().enumerate() {
            let s = nodes.len();
            let mut local = std::collections::HashMap::with_capacity(s);
            for (l, &g) in nodes.iter().enumerate() {
                local.insert(g, l);
            }
            let mut dense = vec![ZERO; s * s];
            let mut coupled = Vec::new();
            let mut a_kb: Vec<(usize, usize, Complex64)> = Vec::new();
            for (l, &g) in nodes.iter().enumerate() {
                for (j, v) in m.row(g) {
                    if is_border(j) {
                        a_kb.push((l, border_pos[j], v));
                        coupled.push(border_pos[j]);
                    } else {
                        debug_assert_eq!(block_of[j], b);
                        dense[l * s + local[&j]] += v;
                    }
                }
            }
            coupled.sort_unstable();
            coupled.dedup();
            let mut border_rows = Vec::new();
            for &p in &coupled {
                for (j, v) in m.row(border[p]) {
                    if let Some(&l) = local.get(&j) {
                        border_rows.push((p, l, v));
                    }
                }
            }

            let lu = DenseLu::factor(dense, s, threshold, &nodes)?;
            let mcols = coupled.len();
            let mut w = Vec::with_capacity(s * mcols);
            for &p in &coupled {
                let mut col = vec![ZERO; s];
                for &(l, q, v) in &a_kb {
                    if q == p {
                        col[l] += v;
                    }
                }
                w.extend(lu.solve(&col));
            }
            // S_pq -= Σ_l A_{p,l} W_{l,q}
            for &(p, l, v) in &border_rows {
                for (c, &q) in coupled.iter().enumerate() {
                    schur[p * nb + q] -= v * w[c * s + l];
                }
            }
            blocks.push(Block {
                nodes,
                lu,
                coupled,
                w,
                border_rows,
            });
        }

        let schur = DenseLu::factor(schur, nb, threshold, &border)?;
        let (lo, hi) = blocks
            .iter()
            .map(|b| &b.lu)
            .chain(std::iter::once(&schur))
            .filter(|lu| lu.n > 0)
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), lu| {
                (lo.min(lu.min_pivot), hi.max(lu.max_pivot))
            });
        let condition_estimate = (hi > 0.0 && lo.is_finite()).then(|| hi / lo);
        Ok(Self {
            d,
            border,
            blocks,
            schur,
            condition_estimate,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Ratio of largest to smallest pivot magnitude; a cheap lower bound on the condition number.
    pub fn condition_estimate(&self) -> Option<f64> {
        self.condition_estimate
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn solve(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
        if rhs.len() != self.d {
            return Err(Error::Dimension {
                expected: self.d,
                got: rhs.len(),
            });
        }
        let mut r_border: Vec<Complex64> = self.border.iter().map(|&g| rhs[g]).collect();
        let partial: Vec<Vec<Complex64>> = self
            .blocks
            .iter()
            .map(|b| {
                let local: Vec<Complex64> = b.nodes.iter().map(|&g| rhs[g]).collect();
                let y = b.lu.solve(&local);
                for &(p, l, v) in &b.border_rows {
                    r_border[p] -= v * y[l];
                }
                y
            })
            .collect();
        let x_border = self.schur.solve(&r_border);
        let mut x = vec![ZERO; self.d];
        for (&g, &v) in self.border.iter().zip(&x_border) {
            x[g] = v;
        }
        for (b, mut y) in self.blocks.iter().zip(partial) {
            let s = b.nodes.len();
            for (c, &q) in b.coupled.iter().enumerate() {
                let xq = x_border[q];
                for (yl, wl) in y.iter_mut().zip(&b.w[c * s..(c + 1) * s]) {
                    *yl -= wl * xq;
                }
            }
            for (&g, v) in b.nodes.iter().zip(y) {
                x[g] = v;
            }
        }
        Ok(x)
    }
}

/// Gaussian elimination with partial pivoting on the densified `ℳ` (test oracle).
pub fn solve_dense_oracle(form: &QuadraticForm, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
    solve_dense(&form.m, rhs)
}

pub fn solve_dense(m: &SparseSymMatrix, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
    let d = m.dim();
    if d > DENSE_ORACLE_LIMIT {
        return Err(Error::SizeGuard {
            d,
            limit: DENSE_ORACLE_LIMIT,
        });
    }
    if rhs.len() != d {
        return Err(Error::Dimension {
            expected: d,
            got: rhs.len(),
        });
    }
    let threshold = PIVOT_TOLERANCE * m.max_abs();
    let lu = DMatrix::from_row_slice(d, d, &m.to_dense()).lu();
    let u = lu.u();
    for i in 0..d {
        let pivot = u[(i, i)].norm();
        if pivot <= threshold {
            return Err(Error::Singular {
                index: i,
                pivot,
                threshold,
            });
        }
    }
    let b = nalgebra::DVector::from_column_slice(rhs);
    let x = lu
        .solve(&b)
        .ok_or_else(|| Error::Inconsistent("dense LU solve failed".into()))?;
    Ok(x.iter().copied().collect())
}

/// `‖ℳx − rhs‖∞`.
pub fn residual_inf(m: &SparseSymMatrix, x: &[Complex64], rhs: &[Complex64]) -> f64 {
    m.mul_vec(x)
        .iter()
        .zip(rhs)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}
