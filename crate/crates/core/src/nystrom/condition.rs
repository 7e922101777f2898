use num_complex::Complex64;

const MAX_ITERATIONS: usize = 5;

/// Hager-Higham estimate of `||A^{-1}||_1` from solves with `A` and `A^H`.
///
/// The result is a lower bound that is almost always within a small factor
/// of the true value.
pub(crate) fn inverse_norm1_estimate(
    dim: usize,
    mut solve: impl FnMut(&mut [Complex64]),
    mut solve_adjoint: impl FnMut(&mut [Complex64]),
) -> f64 {
    if dim == 0 {
        return 0.0;
    }
    let mut x = vec![Complex64::new(1.0 / dim as f64, 0.0); dim];
    let mut estimate = 0.0;
    let mut last_index = usize::MAX;
    for iteration in 0..MAX_ITERATIONS {
        solve(&mut x);
        let norm: f64 = x.iter().map(|v| v.norm()).sum();
        if iteration > 0 && norm <= estimate {
            break;
        }
        estimate = norm;
        let mut z: Vec<Complex64> = x
            .iter()
            .map(|v| {
                let a = v.norm();
                if a == 0.0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    v / a
                }
            })
            .collect();
        solve_adjoint(&mut z);
        let (index, zmax) = z
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.norm()))
            .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
        let zx: f64 = z.iter().zip(&x).map(|(a, b)| (a.conj() * b).re).sum();
        if iteration > 0 && (zmax <= zx || index == last_index) {
            break;
        }
        last_index = index;
        x.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        x[index] = Complex64::new(1.0, 0.0);
    }
    estimate
}
