//! Tabulated form of the discretized coupled operator.
//!
//! On the trapezoid grid every block entry factors as
//!
//! ```text
//! B[(n1,i),(n2,j)] = delta + G_{n1}(x_i - x_j) * c s_{n1}(x_j) w_j * s_{n2}(x_j)
//! ```
//!
//! with `s_n(x) = sin(n pi x / L)` and `c = 4 m1 mu0 / (hbar^2 L)`. The
//! dependence on the source channel `n2` is a single factor `s_{n2}(x_j)`, so
//! `B = I + U V` where `V` contracts the channels at each node,
//! `(V Phi)_j = sum_n s_n(x_j) Phi_n(x_j)`, and `U` spreads a nodal field back
//! over the channels through the Green's functions. This gives matrix-free
//! products with `B` and `B^H` and, through `R = I + V U` (`N x N`), an exact
//! reduction of the `NT x NT` solve.

use num_complex::Complex64;

use crate::kernel::{box_sine, greens, KernelContext};
use crate::nystrom::Discretization;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone)]
pub(crate) struct CoupledOperator {
    n_nodes: usize,
    truncation: usize,
    /// `s_n(x_j)`, channel-major.
    sines: Vec<f64>,
    /// `G_n(x_d)` for node offsets `d = 0..N`, channel-major.
    greens: Vec<Complex64>,
    /// `c s_n(x_j) w_j`, channel-major.
    column_factors: Vec<f64>,
    /// Stacked `f_n(x_i)`, channel-major.
    rhs: Vec<Complex64>,
}

impl CoupledOperator {
    pub(crate) fn new(ctx: &KernelContext, disc: &Discretization) -> Self {
        let n_nodes = disc.len();
        let truncation = ctx.truncation();
        let length = ctx.config().box_length;
        let c = ctx.coupling_prefactor();
        let nodes = disc.nodes();
        let weights = disc.weights();

        let mut sines = Vec::with_capacity(truncation * n_nodes);
        let mut greens_table = Vec::with_capacity(truncation * n_nodes);
        let mut column_factors = Vec::with_capacity(truncation * n_nodes);
        for channel in ctx.table().channels() {
            for (&x, &w) in nodes.iter().zip(weights) {
                let s = box_sine(channel.index, x, length);
                sines.push(s);
                column_factors.push(c * s * w);
            }
            greens_table.extend(nodes.iter().map(|&x| greens(channel, x)));
        }

        let mut op = Self {
            n_nodes,
            truncation,
            sines,
            greens: greens_table,
            column_factors,
            rhs: Vec::new(),
        };
        // f_n = -U applied to the nodal source s_{n0}(x_j) exp(i k0 x_j).
        let n0 = ctx.config().n0;
        let source: Vec<Complex64> = (0..n_nodes)
            .map(|j| op.sine(n0 - 1, j) * ctx.incident_wave(nodes[j]))
            .collect();
        op.rhs = op.spread(&source).into_iter().map(|v| -v).collect();
        op
    }

    pub(crate) fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub(crate) fn truncation(&self) -> usize {
        self.truncation
    }

    pub(crate) fn dim(&self) -> usize {
        self.n_nodes * self.truncation
    }

    pub(crate) fn rhs(&self) -> &[Complex64] {
        &self.rhs
    }

    #[inline]
    fn sine(&self, n: usize, j: usize) -> f64 {
        self.sines[n * self.n_nodes + j]
    }

    #[inline]
    fn green(&self, n: usize, i: usize, j: usize) -> Complex64 {
        self.greens[n * self.n_nodes + i.abs_diff(j)]
    }

    #[inline]
    fn factor(&self, n: usize, j: usize) -> f64 {
        self.column_factors[n * self.n_nodes + j]
    }

    /// Entry `B[row, col]` with 0-based channel-major indices.
    #[cfg(test)]
    pub(crate) fn entry(&self, row: usize, col: usize) -> Complex64 {
        let (n1, i) = (row / self.n_nodes, row % self.n_nodes);
        let (n2, j) = (col / self.n_nodes, col % self.n_nodes);
        let k = self.green(n1, i, j) * (self.factor(n1, j) * self.sine(n2, j));
        if row == col {
            k + 1.0
        } else {
            k
        }
    }

    /// Fills column-major dense storage of `B`.
    pub(crate) fn fill_dense(&self, storage: &mut Vec<Complex64>) {
        let dim = self.dim();
        let n_nodes = self.n_nodes;
        storage.clear();
        for n2 in 0..self.truncation {
            for j in 0..n_nodes {
                let s2 = self.sine(n2, j);
                for n1 in 0..self.truncation {
                    let coef = self.factor(n1, j) * s2;
                    let row = &self.greens[n1 * n_nodes..(n1 + 1) * n_nodes];
                    storage.extend((0..n_nodes).map(|i| row[i.abs_diff(j)] * coef));
                }
                let col = n2 * n_nodes + j;
                storage[col * dim + col] += 1.0;
            }
        }
    }

    /// `(V Phi)_j = sum_n s_n(x_j) Phi_n(x_j)`.
    pub(crate) fn contract(&self, phi: &[Complex64]) -> Vec<Complex64> {
        let mut psi = vec![ZERO; self.n_nodes];
        for n in 0..self.truncation {
            let block = &phi[n * self.n_nodes..(n + 1) * self.n_nodes];
            for (j, p) in psi.iter_mut().enumerate() {
                *p += block[j] * self.sine(n, j);
            }
        }
        psi
    }

    /// `(V^H psi)_{n,j} = s_n(x_j) psi_j`.
    pub(crate) fn contract_adjoint(&self, psi: &[Complex64]) -> Vec<Complex64> {
        (0..self.truncation)
            .flat_map(|n| (0..self.n_nodes).map(move |j| (n, j)))
            .map(|(n, j)| psi[j] * self.sine(n, j))
            .collect()
    }

    /// `(U psi)_{n,i} = sum_j G_n(x_i - x_j) c s_n(x_j) w_j psi_j`.
    pub(crate) fn spread(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.dim()];
        for n in 0..self.truncation {
            let scaled: Vec<Complex64> = (0..self.n_nodes)
                .map(|j| psi[j] * self.factor(n, j))
                .collect();
            for i in 0..self.n_nodes {
                let mut acc = ZERO;
                for (j, s) in scaled.iter().enumerate() {
                    acc += self.green(n, i, j) * s;
                }
                out[n * self.n_nodes + i] = acc;
            }
        }
        out
    }

    /// `(U^H y)_j = sum_{n,i} conj(G_n(x_i - x_j)) c s_n(x_j) w_j y_{n,i}`.
    pub(crate) fn spread_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.n_nodes];
        for n in 0..self.truncation {
            let block = &y[n * self.n_nodes..(n + 1) * self.n_nodes];
            for (j, o) in out.iter_mut().enumerate() {
                let mut acc = ZERO;
                for (i, v) in block.iter().enumerate() {
                    acc += self.green(n, i, j).conj() * v;
                }
                *o += acc * self.factor(n, j);
            }
        }
        out
    }

    /// Matrix-free `B Phi`.
    pub(crate) fn apply(&self, phi: &[Complex64]) -> Vec<Complex64> {
        let mut out = self.spread(&self.contract(phi));
        for (o, p) in out.iter_mut().zip(phi) {
            *o += p;
        }
        out
    }

    /// Reduced matrix `R = I + V U`, column-major `N x N`.
    pub(crate) fn reduced_matrix(&self) -> Vec<Complex64> {
        let n_nodes = self.n_nodes;
        let mut r = vec![ZERO; n_nodes * n_nodes];
        for n in 0..self.truncation {
            for j in 0..n_nodes {
                let u = self.factor(n, j);
                if u == 0.0 {
                    continue;
                }
                let col = &mut r[j * n_nodes..(j + 1) * n_nodes];
                for (i, entry) in col.iter_mut().enumerate() {
                    *entry += self.green(n, i, j) * (self.sine(n, i) * u);
                }
            }
        }
        for i in 0..n_nodes {
            r[i * n_nodes + i] += 1.0;
        }
        r
    }

    /// `||B||_inf` without forming `B`.
    pub(crate) fn norm_inf(&self) -> f64 {
        let n_nodes = self.n_nodes;
        let sine_sums: Vec<f64> = (0..n_nodes)
            .map(|j| (0..self.truncation).map(|n| self.sine(n, j).abs()).sum())
            .collect();
        let mut best = 0.0f64;
        for n1 in 0..self.truncation {
            for i in 0..n_nodes {
                let mut row = 0.0;
                for j in 0..n_nodes {
                    row += self.green(n1, i, j).norm() * self.factor(n1, j).abs() * sine_sums[j];
                }
                let diag = self.green(n1, i, i) * (self.factor(n1, i) * self.sine(n1, i));
                row += (diag + 1.0).norm() - diag.norm();
                best = best.max(row);
            }
        }
        best
    }

    /// `||B||_1` without forming `B`.
    pub(crate) fn norm_one(&self) -> f64 {
        let n_nodes = self.n_nodes;
        // sum_i |G_n(x_i - x_j)| for each (n, j)
        let green_sums: Vec<f64> = (0..self.truncation)
            .flat_map(|n| (0..n_nodes).map(move |j| (n, j)))
            .map(|(n, j)| (0..n_nodes).map(|i| self.green(n, i, j).norm()).sum())
            .collect();
        let mut best = 0.0f64;
        for j in 0..n_nodes {
            let base: f64 = (0..self.truncation)
                .map(|n1| self.factor(n1, j).abs() * green_sums[n1 * n_nodes + j])
                .sum();
            for n2 in 0..self.truncation {
                let s2 = self.sine(n2, j);
                let diag = self.green(n2, j, j) * (self.factor(n2, j) * s2);
                let col = s2.abs() * base + (diag + 1.0).norm() - diag.norm();
                best = best.max(col);
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{build_channels, ProblemConfig};

    fn operator(g: f64, lk0: f64, n0: usize, t: usize, n: usize) -> (KernelContext, Discretization, CoupledOperator) {
        let config = ProblemConfig::dimensionless(g, lk0, n0).unwrap();
        let ctx = KernelContext::new(config, build_channels(&config, t).unwrap());
        let disc = Discretization::trapezoid(1.0, n).unwrap();
        let op = CoupledOperator::new(&ctx, &disc);
        (ctx, disc, op)
    }

    fn probe(dim: usize, seed: u64) -> Vec<Complex64> {
        (0..dim)
            .map(|i| {
                let t = (i as u64 * 2654435761 + seed) % 1000;
                Complex64::new(t as f64 / 500.0 - 1.0, ((t * 7) % 1000) as f64 / 500.0 - 1.0)
            })
            .collect()
    }

    fn dense(op: &CoupledOperator) -> Vec<Complex64> {
        let mut m = Vec::new();
        op.fill_dense(&mut m);
        m
    }

    #[test]
    fn entries_match_kernel_definition() {
        let (ctx, disc, op) = operator(1.7, 6.0, 2, 5, 9);
        let x = disc.nodes();
        let w = disc.weights();
        let m = dense(&op);
        let dim = op.dim();
        for n1 in 1..=5 {
            for n2 in 1..=5 {
                for i in 0..9 {
                    for j in 0..9 {
                        let row = (n1 - 1) * 9 + i;
                        let col = (n2 - 1) * 9 + j;
                        let mut expected = ctx.nystrom_kernel(n1, n2, x[i], x[j]).unwrap() * w[j];
                        if row == col {
                            expected += 1.0;
                        }
                        let got = m[col * dim + row];
                        assert!((got - expected).norm() < 1e-14, "{row} {col}");
                        assert_eq!(got, op.entry(row, col));
                    }
                }
            }
        }
    }

    #[test]
    fn grid_rhs_matches_kernel_rhs() {
        let (ctx, disc, op) = operator(2.0, 9.0, 3, 8, 41);
        for n in 1..=8 {
            for (i, &x) in disc.nodes().iter().enumerate() {
                let direct = ctx.rhs(n, x, &disc).unwrap();
                let tabulated = op.rhs()[(n - 1) * 41 + i];
                assert!((direct - tabulated).norm() < 1e-13 * (1.0 + direct.norm()));
            }
        }
    }

    #[test]
    fn matrix_free_products_match_dense() {
        let (_, _, op) = operator(-3.0, 11.0, 1, 6, 13);
        let m = dense(&op);
        let dim = op.dim();
        let v = probe(dim, 7);
        let applied = op.apply(&v);
        for r in 0..dim {
            let expected: Complex64 = (0..dim).map(|c| m[c * dim + r] * v[c]).sum();
            assert!((applied[r] - expected).norm() < 1e-12);
        }
        // <U psi, y> == <psi, U^H y> and <V phi, psi> == <phi, V^H psi>
        let psi = probe(13, 3);
        let y = probe(dim, 11);
        let lhs: Complex64 = op.spread(&psi).iter().zip(&y).map(|(a, b)| a.conj() * b).sum();
        let rhs: Complex64 = psi.iter().zip(op.spread_adjoint(&y)).map(|(a, b)| a.conj() * b).sum();
        assert!((lhs - rhs).norm() < 1e-12);
        let lhs: Complex64 = op.contract(&v).iter().zip(&psi).map(|(a, b)| a.conj() * b).sum();
        let rhs: Complex64 = v.iter().zip(op.contract_adjoint(&psi)).map(|(a, b)| a.conj() * b).sum();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn reduced_matrix_is_identity_plus_vu() {
        let (_, _, op) = operator(4.0, 7.5, 2, 7, 11);
        let r = op.reduced_matrix();
        let e = |j: usize| {
            let mut v = vec![ZERO; 11];
            v[j] = Complex64::new(1.0, 0.0);
            v
        };
        for j in 0..11 {
            let col = op.contract(&op.spread(&e(j)));
            for i in 0..11 {
                let expected = col[i] + if i == j { 1.0 } else { 0.0 };
                assert!((r[j * 11 + i] - expected).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn structured_norms_match_dense() {
        for (g, lk0, n0, t, n) in [(1.0, 3.0, 1, 4, 7), (-60.0, 14.0, 2, 9, 12), (1e4, 21.0, 5, 12, 10)] {
            let (_, _, op) = operator(g, lk0, n0, t, n);
            let m = dense(&op);
            let dim = op.dim();
            let inf = (0..dim)
                .map(|r| (0..dim).map(|c| m[c * dim + r].norm()).sum::<f64>())
                .fold(0.0, f64::max);
            let one = (0..dim)
                .map(|c| (0..dim).map(|r| m[c * dim + r].norm()).sum::<f64>())
                .fold(0.0, f64::max);
            assert!((op.norm_inf() - inf).abs() <= 1e-12 * inf);
            assert!((op.norm_one() - one).abs() <= 1e-12 * one);
        }
    }

    #[test]
    fn zero_coupling_is_identity() {
        let (_, _, op) = operator(0.0, 5.0, 1, 4, 6);
        let m = dense(&op);
        let dim = op.dim();
        for r in 0..dim {
            for c in 0..dim {
                let expected = if r == c { 1.0 } else { 0.0 };
                assert_eq!(m[c * dim + r], Complex64::new(expected, 0.0));
            }
        }
        assert!(op.rhs().iter().all(|v| v.norm() == 0.0));
    }
}
