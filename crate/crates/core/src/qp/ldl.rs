//! Sparse LDLᵀ factorization of quasi-definite matrices.
//!
//! Up-looking factorization driven by the elimination tree, on a reverse
//! Cuthill-McKee permutation of the input. Quasi-definite matrices admit an
//! LDLᵀ factorization for every symmetric permutation, so no pivoting is done;
//! instead each pivot's sign is checked against the expected inertia.

use std::collections::VecDeque;

use thiserror::Error;

use super::sparse::CscMatrix;
use crate::scalar::Real;

const NONE: usize = usize::MAX;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LdlError {
    #[error("input must be square and store only its upper triangle")]
    NotUpperTriangular,
    #[error("zero pivot at original index {0}")]
    ZeroPivot(usize),
    #[error("pivot at original index {index} has sign {found}, expected {expected}")]
    WrongInertia { index: usize, expected: i8, found: i8 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Ordering {
    Natural,
    #[default]
    ReverseCuthillMcKee,
}

#[derive(Debug, Clone)]
pub struct LdlFactor<T> {
    n: usize,
    /// perm[new] = old
    perm: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<T>,
    d_inv: Vec<T>,
    work: Vec<T>,
}

impl<T: Real> LdlFactor<T> {
    /// Factors the symmetric matrix whose upper triangle is `upper`.
    ///
    /// `signs`, when given, holds the expected sign (+1/-1) of every pivot,
    /// indexed by original row.
    pub fn new(upper: &CscMatrix<T>, signs: Option<&[i8]>, ordering: Ordering) -> Result<Self, LdlError> {
        if upper.nrows != upper.ncols || !upper.is_upper_triangular() {
            return Err(LdlError::NotUpperTriangular);
        }
        let n = upper.ncols;
        let perm = match ordering {
            Ordering::Natural => (0..n).collect(),
            Ordering::ReverseCuthillMcKee => reverse_cuthill_mckee(upper),
        };
        let mut iperm = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }
        let permuted = permute_upper(upper, &iperm);

        let (etree, lnz) = elimination_tree(&permuted);
        let mut lp = vec![0usize; n + 1];
        for i in 0..n {
            lp[i + 1] = lp[i] + lnz[i];
        }
        let mut factor = Self {
            n,
            perm,
            li: vec![0; lp[n]],
            lx: vec![T::zero(); lp[n]],
            lp,
            d_inv: vec![T::zero(); n],
            work: vec![T::zero(); n],
        };
        factor.numeric(&permuted, &etree, signs)?;
        Ok(factor)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz_l(&self) -> usize {
        self.lp[self.n]
    }

    fn numeric(&mut self, a: &CscMatrix<T>, etree: &[usize], signs: Option<&[i8]>) -> Result<(), LdlError> {
        let n = self.n;
        let mut d = vec![T::zero(); n];
        let mut y_vals = vec![T::zero(); n];
        let mut y_used = vec![false; n];
        let mut y_idx = vec![0usize; n];
        let mut elim = vec![0usize; n];
        let mut next_space: Vec<usize> = self.lp[..n].to_vec();

        for k in 0..n {
            let mut nnz_y = 0;
            d[k] = T::zero();
            for p in a.colptr[k]..a.colptr[k + 1] {
                let bidx = a.rowval[p];
                if bidx == k {
                    d[k] = a.nzval[p];
                    continue;
                }
                y_vals[bidx] = a.nzval[p];
                if !y_used[bidx] {
                    y_used[bidx] = true;
                    elim[0] = bidx;
                    let mut n_elim = 1;
                    let mut next = etree[bidx];
                    while next != NONE && next < k {
                        if y_used[next] {
                            break;
                        }
                        y_used[next] = true;
                        elim[n_elim] = next;
                        n_elim += 1;
                        next = etree[next];
                    }
                    while n_elim > 0 {
                        n_elim -= 1;
                        y_idx[nnz_y] = elim[n_elim];
                        nnz_y += 1;
                    }
                }
            }

            for i in (0..nnz_y).rev() {
                let c = y_idx[i];
                let slot = next_space[c];
                let yc = y_vals[c];
                for j in self.lp[c]..slot {
                    let r = self.li[j];
                    y_vals[r] -= self.lx[j] * yc;
                }
                self.li[slot] = k;
                let l = yc * self.d_inv[c];
                self.lx[slot] = l;
                d[k] -= yc * l;
                next_space[c] += 1;
                y_vals[c] = T::zero();
                y_used[c] = false;
            }

            let orig = self.perm[k];
            if d[k] == T::zero() || !d[k].is_finite() {
                return Err(LdlError::ZeroPivot(orig));
            }
            if let Some(signs) = signs {
                let found = if d[k] > T::zero() { 1 } else { -1 };
                if found != signs[orig] {
                    return Err(LdlError::WrongInertia {
                        index: orig,
                        expected: signs[orig],
                        found,
                    });
                }
            }
            self.d_inv[k] = T::one() / d[k];
        }
        Ok(())
    }

    /// Solves `K x = b` in place.
    pub fn solve_in_place(&mut self, b: &mut [T]) {
        debug_assert_eq!(b.len(), self.n);
        let x = &mut self.work;
        for (new, &old) in self.perm.iter().enumerate() {
            x[new] = b[old];
        }
        for i in 0..self.n {
            let xi = x[i];
            if xi != T::zero() {
                for j in self.lp[i]..self.lp[i + 1] {
                    x[self.li[j]] -= self.lx[j] * xi;
                }
            }
        }
        for i in 0..self.n {
            x[i] *= self.d_inv[i];
        }
        for i in (0..self.n).rev() {
            let mut acc = x[i];
            for j in self.lp[i]..self.lp[i + 1] {
                acc -= self.lx[j] * x[self.li[j]];
            }
            x[i] = acc;
        }
        for (new, &old) in self.perm.iter().enumerate() {
            b[old] = x[new];
        }
    }
}

fn permute_upper<T: Real>(upper: &CscMatrix<T>, iperm: &[usize]) -> CscMatrix<T> {
    let trip: Vec<_> = upper
        .triplets()
        .map(|(r, c, v)| {
            let (a, b) = (iperm[r], iperm[c]);
            (a.min(b), a.max(b), v)
        })
        .collect();
    CscMatrix::from_triplets(upper.nrows, upper.ncols, &trip)
}

/// Elimination tree and per-column nonzero counts of L.
fn elimination_tree<T>(a: &CscMatrix<T>) -> (Vec<usize>, Vec<usize>) {
    let n = a.ncols;
    let mut work = vec![NONE; n];
    let mut lnz = vec![0usize; n];
    let mut etree = vec![NONE; n];
    for j in 0..n {
        work[j] = j;
        for p in a.colptr[j]..a.colptr[j + 1] {
            let mut i = a.rowval[p];
            while work[i] != j {
                if etree[i] == NONE {
                    etree[i] = j;
                }
                lnz[i] += 1;
                work[i] = j;
                i = etree[i];
            }
        }
    }
    (etree, lnz)
}

/// Bandwidth-reducing ordering of the symmetric pattern of `upper`.
/// Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee<T>(upper: &CscMatrix<T>) -> Vec<usize> {
    let n = upper.ncols;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for c in 0..n {
        for k in upper.colptr[c]..upper.colptr[c + 1] {
            let r = upper.rowval[k];
            if r != c {
                adj[r].push(c);
                adj[c].push(r);
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();

    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (degree[v], v));

    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(seed, &adj, &degree);
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = adj[v].iter().copied().filter(|&u| !visited[u]).collect();
            nbrs.sort_by_key(|&u| (degree[u], u));
            for u in nbrs {
                visited[u] = true;
                queue.push_back(u);
            }
        }
    }
    order.reverse();
    order
}

/// Walks to the far end of the BFS level structure a few times to find a
/// start node with large eccentricity.
fn pseudo_peripheral(seed: usize, adj: &[Vec<usize>], degree: &[usize]) -> usize {
    let mut start = seed;
    let mut best_depth = 0;
    let mut dist = vec![usize::MAX; adj.len()];
    let mut touched = Vec::new();
    for _ in 0..4 {
        for &t in &touched {
            dist[t] = usize::MAX;
        }
        touched.clear();
        let mut queue = VecDeque::from([start]);
        dist[start] = 0;
        touched.push(start);
        let mut last_level = vec![start];
        let mut depth = 0;
        while let Some(v) = queue.pop_front() {
            for &u in &adj[v] {
                if dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    touched.push(u);
                    if dist[u] > depth {
                        depth = dist[u];
                        last_level.clear();
                    }
                    if dist[u] == depth {
                        last_level.push(u);
                    }
                    queue.push_back(u);
                }
            }
        }
        if depth <= best_depth && best_depth > 0 {
            break;
        }
        best_depth = depth;
        let candidate = *last_level.iter().min_by_key(|&&v| (degree[v], v)).unwrap();
        if candidate == start {
            break;
        }
        start = candidate;
    }
    for &t in &touched {
        dist[t] = usize::MAX;
    }
    start
}
