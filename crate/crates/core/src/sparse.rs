//! Sparse complex operators on the two-mode Fock space.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

/// Occupation numbers `|a, b>` of the two interferometer modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ModePair {
    pub a: u32,
    pub b: u32,
}

impl ModePair {
    pub const fn new(a: u32, b: u32) -> Self {
        Self { a, b }
    }

    pub const fn total(self) -> u32 {
        self.a + self.b
    }
}

impl fmt::Display for ModePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{},{}>", self.a, self.b)
    }
}

/// All occupation pairs with `a + b <= n_max`, ordered by total then `a`.
pub fn truncated_basis(n_max: u32) -> Vec<ModePair> {
    (0..=n_max)
        .flat_map(|n| (0..=n).map(move |a| ModePair::new(a, n - a)))
        .collect()
}

/// Operator stored as `|row><col| -> amplitude`. Missing keys are zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseOperator {
    entries: BTreeMap<(ModePair, ModePair), Complex64>,
}

impl SparseOperator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn identity(n_max: u32) -> Self {
        let mut op = Self::new();
        for basis in truncated_basis(n_max) {
            op.add(basis, basis, Complex64::new(1.0, 0.0));
        }
        op
    }

    /// Accumulates `value` onto the `(row, col)` entry.
    pub fn add(&mut self, row: ModePair, col: ModePair, value: Complex64) {
        *self.entries.entry((row, col)).or_default() += value;
    }

    pub fn get(&self, row: ModePair, col: ModePair) -> Complex64 {
        self.entries.get(&(row, col)).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ModePair, ModePair, Complex64)> + '_ {
        self.entries.iter().map(|(&(r, c), &v)| (r, c, v))
    }

    /// Largest total photon number appearing in any row or column.
    pub fn max_photons(&self) -> u32 {
        self.entries
            .keys()
            .map(|(r, c)| r.total().max(c.total()))
            .max()
            .unwrap_or(0)
    }

    pub fn trace(&self) -> Complex64 {
        self.iter().filter(|(r, c, _)| r == c).map(|(_, _, v)| v).sum()
    }

    /// `Tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &SparseOperator) -> Complex64 {
        self.iter().map(|(r, c, v)| v * other.get(c, r)).sum()
    }

    pub fn matmul(&self, other: &SparseOperator) -> SparseOperator {
        let mut by_row: BTreeMap<ModePair, Vec<(ModePair, Complex64)>> = BTreeMap::new();
        for (r, c, v) in other.iter() {
            by_row.entry(r).or_default().push((c, v));
        }
        let mut out = SparseOperator::new();
        for (r, k, v) in self.iter() {
            if let Some(row) = by_row.get(&k) {
                for &(c, w) in row {
                    out.add(r, c, v * w);
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> SparseOperator {
        let entries = self.iter().map(|(r, c, v)| ((c, r), v.conj())).collect();
        SparseOperator { entries }
    }

    /// Largest entrywise modulus of `self - other` over the union of supports.
    pub fn max_abs_diff(&self, other: &SparseOperator) -> f64 {
        let lhs = self.iter().map(|(r, c, v)| (v - other.get(r, c)).norm());
        let rhs = other
            .iter()
            .filter(|(r, c, _)| !self.entries.contains_key(&(*r, *c)))
            .map(|(_, _, v)| v.norm());
        lhs.chain(rhs).fold(0.0, f64::max)
    }

    /// `max |A[r,c] - conj(A[c,r])|`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn to_dense(&self, basis: &[ModePair]) -> DMatrix<Complex64> {
        let index: BTreeMap<ModePair, usize> =
            basis.iter().enumerate().map(|(i, &b)| (b, i)).collect();
        let mut dense = DMatrix::zeros(basis.len(), basis.len());
        for (r, c, v) in self.iter() {
            if let (Some(&i), Some(&j)) = (index.get(&r), index.get(&c)) {
                dense[(i, j)] += v;
            }
        }
        dense
    }

    /// Eigenvalues of the Hermitian part on the truncated basis, ascending.
    ///
    /// Blocks are formed per total photon number over the occupied support
    /// (the operators here conserve photon number) and each block is
    /// diagonalised through its real symmetric embedding
    /// `[[Re, -Im], [Im, Re]]`, which doubles every eigenvalue's multiplicity.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let full = truncated_basis(self.max_photons()).len();
        let mut blocks: BTreeMap<u32, Vec<ModePair>> = BTreeMap::new();
        for (r, c, _) in self.iter() {
            for p in [r, c] {
                let block = blocks.entry(p.total()).or_default();
                if !block.contains(&p) {
                    block.push(p);
                }
            }
        }

        let mut values = Vec::with_capacity(full);
        for basis in blocks.values() {
            let dense = self.to_dense(basis);
            let n = basis.len();
            let embedded = DMatrix::from_fn(2 * n, 2 * n, |i, j| {
                let (z, w) = (dense[(i % n, j % n)], dense[(j % n, i % n)].conj());
                let h = (z + w) * 0.5;
                match (i < n, j < n) {
                    (true, true) | (false, false) => h.re,
                    (true, false) => -h.im,
                    (false, true) => h.im,
                }
            });
            let mut ev: Vec<f64> = SymmetricEigen::new(embedded).eigenvalues.iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            values.extend(ev.into_iter().step_by(2));
        }
        values.resize(full.max(values.len()), 0.0);
        values.sort_by(f64::total_cmp);
        values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn basis_size_and_order() {
        let basis = truncated_basis(3);
        assert_eq!(basis.len(), 10);
        assert_eq!(basis[0], ModePair::new(0, 0));
        assert_eq!(basis[1], ModePair::new(0, 1));
        assert_eq!(basis[9], ModePair::new(3, 0));
    }

    #[test]
    fn product_and_trace_agree() {
        let (x, y) = (ModePair::new(1, 0), ModePair::new(0, 1));
        let mut a = SparseOperator::new();
        a.add(x, y, c(0.0, 1.0));
        a.add(y, x, c(0.0, -1.0));
        let sq = a.matmul(&a);
        assert_eq!(sq.get(x, x), c(1.0, 0.0));
        assert_eq!(sq.get(y, y), c(1.0, 0.0));
        assert_eq!(sq.get(x, y), c(0.0, 0.0));
        assert_eq!(a.trace_product(&a), sq.trace());
        assert_eq!(a.hermiticity_defect(), 0.0);
    }

    #[test]
    fn eigenvalues_of_projector() {
        let (x, y) = (ModePair::new(1, 0), ModePair::new(0, 1));
        let mut p = SparseOperator::new();
        for (r, cc) in [(x, x), (x, y), (y, x), (y, y)] {
            p.add(r, cc, c(0.5, 0.0));
        }
        let ev = p.hermitian_eigenvalues();
        assert_eq!(ev.len(), 3);
        assert!(ev[0].abs() < 1e-15 && ev[1].abs() < 1e-15);
        assert!((ev[2] - 1.0).abs() < 1e-15);
    }
}
