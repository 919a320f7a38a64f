//! Modified Ruiz equilibration of the KKT data.
//!
//! Finds diagonal `D` (variables), `E` (constraints) and a cost factor `c` so
//! that the scaled problem
//!
//! ```text
//!     min ½ x̃ᵀ (c D P D) x̃ + (c D q)ᵀ x̃   s.t.  E l <= (E A D) x̃ <= E u
//! ```
//!
//! has KKT columns of roughly unit infinity norm. Solutions map back through
//! `x = D x̃`, `y = E ỹ / c`, `z = E⁻¹ z̃`.

use super::sparse::CscMatrix;
use crate::scalar::Real;

const MIN_SCALING: f64 = 1e-4;
const MAX_SCALING: f64 = 1e4;

#[derive(Debug, Clone)]
pub struct Scaling<T> {
    pub d: Vec<T>,
    pub e: Vec<T>,
    pub d_inv: Vec<T>,
    pub e_inv: Vec<T>,
    pub c: T,
    pub c_inv: T,
}

impl<T: Real> Scaling<T> {
    pub fn identity(n: usize, m: usize) -> Self {
        Self {
            d: vec![T::one(); n],
            e: vec![T::one(); m],
            d_inv: vec![T::one(); n],
            e_inv: vec![T::one(); m],
            c: T::one(),
            c_inv: T::one(),
        }
    }
}

fn limit<T: Real>(norm: T) -> T {
    // Columns that are nearly empty are left alone.
    if norm < T::of(MIN_SCALING) {
        T::one()
    } else {
        norm.min(T::of(MAX_SCALING))
    }
}

fn norm_inf<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

/// Equilibrates `p` (upper triangle), `q` and `a` in place and returns the
/// accumulated scaling. Bounds are scaled by the caller with `e`.
pub fn ruiz_equilibrate<T: Real>(
    p: &mut CscMatrix<T>,
    q: &mut [T],
    a: &mut CscMatrix<T>,
    passes: usize,
) -> Scaling<T> {
    let n = p.ncols;
    let m = a.nrows;
    let mut s = Scaling::identity(n, m);

    for _ in 0..passes {
        let p_cols = p.sym_upper_col_norms_inf();
        let a_cols = a.col_norms_inf();
        let a_rows = a.row_norms_inf();
        let d_step: Vec<T> = (0..n)
            .map(|j| T::one() / limit(p_cols[j].max(a_cols[j])).sqrt())
            .collect();
        let e_step: Vec<T> = a_rows.iter().map(|&r| T::one() / limit(r).sqrt()).collect();

        p.scale(&d_step, &d_step);
        a.scale(&e_step, &d_step);
        for j in 0..n {
            q[j] *= d_step[j];
            s.d[j] *= d_step[j];
        }
        for i in 0..m {
            s.e[i] *= e_step[i];
        }

        // Cost scaling keeps P and q at unit magnitude on average.
        let p_cols = p.sym_upper_col_norms_inf();
        let mean_p = if n > 0 {
            p_cols.iter().copied().sum::<T>() / T::of(n as f64)
        } else {
            T::zero()
        };
        let c_step = T::one() / limit(mean_p.max(norm_inf(q)));
        p.scale_all(c_step);
        q.iter_mut().for_each(|v| *v *= c_step);
        s.c *= c_step;
    }

    s.d_inv = s.d.iter().map(|&v| T::one() / v).collect();
    s.e_inv = s.e.iter().map(|&v| T::one() / v).collect();
    s.c_inv = T::one() / s.c;
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balances_badly_scaled_columns() {
        let mut p = CscMatrix::from_triplets(2, 2, &[(0, 0, 1e4), (1, 1, 1e-2)]);
        let mut a = CscMatrix::from_triplets(2, 2, &[(0, 0, 1e3), (1, 1, 1.0), (0, 1, 1.0)]);
        let mut q = vec![1.0, 1.0];
        let original_a = a.clone();
        let s = ruiz_equilibrate(&mut p, &mut q, &mut a, 10);
        let cols = a.col_norms_inf();
        let spread = cols.iter().cloned().fold(0.0, f64::max) / cols.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread < 10.0, "column norms after scaling: {cols:?}");
        // Scaled entries equal E A D entrywise.
        for (r, c, v) in original_a.triplets() {
            let scaled = a.to_dense()[r][c];
            assert!((scaled - s.e[r] * v * s.d[c]).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_passes_is_identity() {
        let mut p = CscMatrix::<f64>::identity(2);
        let mut a = CscMatrix::identity(2);
        let mut q = vec![3.0, 4.0];
        let s = ruiz_equilibrate(&mut p, &mut q, &mut a, 0);
        assert_eq!(s.d, vec![1.0, 1.0]);
        assert_eq!(s.c, 1.0);
        assert_eq!(q, vec![3.0, 4.0]);
    }
}
