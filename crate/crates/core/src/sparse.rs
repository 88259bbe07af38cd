use std::io::Write;

use num_complex::Complex64;

/// Compressed-row complex matrix holding both triangles of a symmetric pattern.
///
/// Built from triplets through [`SymmetricBuilder`]; duplicate insertions are summed.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

#[derive(Debug, Clone)]
pub struct SymmetricBuilder {
    n: usize,
    triplets: Vec<(usize, usize, Complex64)>,
}

impl SymmetricBuilder {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            triplets: Vec::new(),
        }
    }

    /// Adds `v` at `(i, j)` and `(j, i)`.
    pub fn add(&mut self, i: usize, j: usize, v: Complex64) {
        assert!(
            i < self.n && j < self.n,
            "entry ({i}, {j}) outside {0}x{0}",
            self.n
        );
        self.triplets.push((i, j, v));
        if i != j {
            self.triplets.push((j, i, v));
        }
    }

    pub fn build(mut self) -> SparseSymMatrix {
        // stable sort keeps insertion order, so mirrored entries are summed identically
        self.triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut cols = Vec::with_capacity(self.triplets.len());
        let mut vals: Vec<Complex64> = Vec::with_capacity(self.triplets.len());
        let mut last = None;
        for (i, j, v) in self.triplets {
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..self.n {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseSymMatrix {
            n: self.n,
            row_ptr,
            cols,
            vals,
        }
    }
}

impl SparseSymMatrix {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries, counting both triangles.
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()]
            .iter()
            .copied()
            .zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(p) => self.vals[r.start + p],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// `(row, col, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    /// `xᵀ M x` without conjugation.
    pub fn bilinear(&self, x: &[Complex64], y: &[Complex64]) -> Complex64 {
        self.iter().map(|(i, j, v)| x[i] * v * y[j]).sum()
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.n * self.n];
        for (i, j, v) in self.iter() {
            out[i * self.n + j] = v;
        }
        out
    }

    /// Sets row and column `i` to zero, keeping the pattern.
    pub fn zero_row_and_column(&mut self, i: usize) {
        let zero = Complex64::new(0.0, 0.0);
        for r in 0..self.n {
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                if r == i || self.cols[p] == i {
                    self.vals[p] = zero;
                }
            }
        }
    }

    /// Coordinate dump, one `row col re im` line per stored entry, sorted by `(row, col)`.
    pub fn write_coordinates<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (i, j, v) in self.iter() {
            writeln!(w, "{i} {j} {:.17e} {:.17e}", v.re, v.im)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn duplicates_are_summed_and_mirrored() {
        let mut b = SymmetricBuilder::new(3);
        b.add(0, 1, c(1.0, 2.0));
        b.add(1, 0, c(0.5, 0.0));
        b.add(2, 2, c(3.0, 0.0));
        b.add(2, 2, c(0.0, -1.0));
        let m = b.build();
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(0, 1), c(1.5, 2.0));
        assert_eq!(m.get(1, 0), c(1.5, 2.0));
        assert_eq!(m.get(2, 2), c(3.0, -1.0));
        assert_eq!(m.get(0, 0), c(0.0, 0.0));
        let y = m.mul_vec(&[c(1.0, 0.0), c(0.0, 1.0), c(2.0, 0.0)]);
        assert_eq!(y, vec![c(-2.0, 1.5), c(1.5, 2.0), c(6.0, -2.0)]);
    }

    #[test]
    fn coordinate_dump_is_sorted() {
        let mut b = SymmetricBuilder::new(2);
        b.add(1, 1, c(2.0, 0.0));
        b.add(0, 1, c(0.0, 1.0));
        let mut out = Vec::new();
        b.build().write_coordinates(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let keys: Vec<_> = text
            .lines()
            .map(|l| {
                let f: Vec<_> = l.split_whitespace().collect();
                (
                    f[0].parse::<usize>().unwrap(),
                    f[1].parse::<usize>().unwrap(),
                )
            })
            .collect();
        assert_eq!(keys, vec![(0, 1), (1, 0), (1, 1)]);
    }
}
