//! Thin in-place wrapper around faer's partial-pivoting LU.
//!
//! All calls run sequentially (`Par::Seq`) so that results do not depend on the
//! number of threads available to the process.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::lu::partial_pivoting::{factor, solve};
use faer::perm::PermRef;
use faer::{MatMut, MatRef, Par};
use num_complex::Complex64;

pub(crate) struct DenseLu {
    /// Packed unit-lower L and upper U, column-major.
    factors: Vec<Complex64>,
    dim: usize,
    perm_fwd: Vec<usize>,
    perm_bwd: Vec<usize>,
}

impl DenseLu {
    /// Factors the column-major `dim x dim` matrix held in `storage`.
    pub(crate) fn factor(mut storage: Vec<Complex64>, dim: usize) -> Self {
        assert_eq!(storage.len(), dim * dim);
        let mut perm_fwd = vec![0usize; dim];
        let mut perm_bwd = vec![0usize; dim];
        {
            let mat = MatMut::from_column_major_slice_mut(&mut storage, dim, dim);
            let mut buf = MemBuffer::new(factor::lu_in_place_scratch::<usize, Complex64>(
                dim,
                dim,
                Par::Seq,
                Default::default(),
            ));
            factor::lu_in_place(
                mat,
                &mut perm_fwd,
                &mut perm_bwd,
                Par::Seq,
                MemStack::new(&mut buf),
                Default::default(),
            );
        }
        Self {
            factors: storage,
            dim,
            perm_fwd,
            perm_bwd,
        }
    }

    pub(crate) fn dim(&self) -> usize {
        self.dim
    }

    fn view(&self) -> MatRef<'_, Complex64> {
        MatRef::from_column_major_slice(&self.factors, self.dim, self.dim)
    }

    fn perm(&self) -> PermRef<'_, usize> {
        PermRef::new_checked(&self.perm_fwd, &self.perm_bwd, self.dim)
    }

    /// Smallest `|U_ii|`.
    pub(crate) fn min_pivot(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.factors[i * self.dim + i].norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Overwrites `rhs` with `A^{-1} rhs`.
    pub(crate) fn solve_in_place(&self, rhs: &mut [Complex64]) {
        assert_eq!(rhs.len(), self.dim);
        let lu = self.view();
        let mut buf = MemBuffer::new(solve::solve_in_place_scratch::<usize, Complex64>(
            self.dim,
            1,
            Par::Seq,
        ));
        solve::solve_in_place(
            lu,
            lu,
            self.perm(),
            MatMut::from_column_major_slice_mut(rhs, self.dim, 1),
            Par::Seq,
            MemStack::new(&mut buf),
        );
    }

    /// Overwrites `rhs` with `A^{-H} rhs`.
    pub(crate) fn solve_adjoint_in_place(&self, rhs: &mut [Complex64]) {
        assert_eq!(rhs.len(), self.dim);
        let lu = self.view();
        let mut buf = MemBuffer::new(solve::solve_transpose_in_place_scratch::<usize, Complex64>(
            self.dim,
            1,
            Par::Seq,
        ));
        solve::solve_transpose_in_place(
            lu.conjugate(),
            lu.conjugate(),
            self.perm(),
            MatMut::from_column_major_slice_mut(rhs, self.dim, 1),
            Par::Seq,
            MemStack::new(&mut buf),
        );
    }
}
