use super::ldl::{LdlFactor, Ordering};
use super::scaling::{ruiz_equilibrate, Scaling};
use super::sparse::CscMatrix;
use super::{is_inf_lower, is_inf_upper, QpError, QpProblem, QpSolution, Status};
use crate::scalar::Real;

/// Solver parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings<T> {
    /// ADMM step size for inequality rows.
    pub rho: T,
    /// Step-size multiplier for equality rows.
    pub eq_rho_factor: T,
    /// Primal regularization of the KKT matrix.
    pub sigma: T,
    /// Over-relaxation.
    pub alpha: T,
    pub eps_abs: T,
    pub eps_rel: T,
    pub eps_prim_inf: T,
    pub eps_dual_inf: T,
    pub max_iter: usize,
    /// Residuals and infeasibility certificates are evaluated every this many
    /// iterations.
    pub check_interval: usize,
    pub scaling_passes: usize,
    /// Rebalance `rho` from the residual ratio, refactoring when it moves by
    /// more than `adaptive_rho_tolerance`.
    pub adaptive_rho: bool,
    pub adaptive_rho_interval: usize,
    pub adaptive_rho_tolerance: T,
    /// Refine the ADMM iterate by solving the KKT system of the guessed active
    /// set.
    pub polish: bool,
    pub polish_delta: T,
    pub polish_refine_iter: usize,
    pub ordering: Ordering,
}

impl<T: Real> Default for Settings<T> {
    fn default() -> Self {
        Self {
            rho: T::of(0.1),
            eq_rho_factor: T::of(1e3),
            sigma: T::of(1e-6),
            alpha: T::of(1.6),
            eps_abs: T::of(1e-5),
            eps_rel: T::of(1e-5),
            eps_prim_inf: T::of(1e-5),
            eps_dual_inf: T::of(1e-5),
            max_iter: 4000,
            check_interval: 5,
            scaling_passes: 10,
            adaptive_rho: true,
            adaptive_rho_interval: 25,
            adaptive_rho_tolerance: T::of(5.0),
            polish: false,
            polish_delta: T::of(1e-6),
            polish_refine_iter: 3,
            ordering: Ordering::ReverseCuthillMcKee,
        }
    }
}

const RHO_MIN: f64 = 1e-6;
const RHO_MAX: f64 = 1e6;
/// With polish enabled, an active-set guess is tried this often and ends
/// the solve once it meets the absolute tolerance.
const POLISH_PROBE_INTERVAL: usize = 100;
/// Active-set corrections tried before a polish attempt is abandoned.
const POLISH_ROUNDS: usize = 10;
/// Rows with `u - l` below this are treated as equalities.
const EQ_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RowKind {
    Free,
    Inequality,
    Equality,
}

/// Operator-splitting solver holding the scaled problem, its KKT
/// factorization and the current iterates.
#[derive(Debug, Clone)]
pub struct Solver<T> {
    n: usize,
    m: usize,
    settings: Settings<T>,
    // scaled data
    p: CscMatrix<T>,
    q: Vec<T>,
    a: CscMatrix<T>,
    l: Vec<T>,
    u: Vec<T>,
    // unscaled bounds, for infeasibility certificates
    l_orig: Vec<T>,
    u_orig: Vec<T>,
    scaling: Scaling<T>,
    kinds: Vec<RowKind>,
    rho: T,
    rho_vec: Vec<T>,
    rho_inv: Vec<T>,
    factor: LdlFactor<T>,
    x: Vec<T>,
    z: Vec<T>,
    y: Vec<T>,
}

struct Residuals<T> {
    prim: T,
    dual: T,
    prim_scale: T,
    dual_scale: T,
    /// Same quantities in the scaled space, used for step-size adaptation.
    prim_scaled_ratio: T,
    dual_scaled_ratio: T,
}

fn norm_inf<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

fn norm_inf_scaled<T: Real>(v: &[T], s: &[T]) -> T {
    v.iter().zip(s).fold(T::zero(), |m, (&x, &w)| m.max((x * w).abs()))
}

impl<T: Real> Solver<T> {
    pub fn new(problem: &QpProblem<T>, settings: Settings<T>) -> Result<Self, QpError> {
        problem.validate()?;
        let n = problem.num_vars();
        let m = problem.num_constraints();
        let mut p = problem.p.clone();
        let mut q = problem.q.clone();
        let mut a = problem.a.clone();
        let scaling = ruiz_equilibrate(&mut p, &mut q, &mut a, settings.scaling_passes);

        let scale_bound = |b: T, e: T| {
            if b.abs() >= T::of(super::INFINITY_THRESHOLD) {
                b
            } else {
                b * e
            }
        };
        let l: Vec<T> = (0..m).map(|i| scale_bound(problem.l[i], scaling.e[i])).collect();
        let u: Vec<T> = (0..m).map(|i| scale_bound(problem.u[i], scaling.e[i])).collect();
        let kinds: Vec<RowKind> = (0..m)
            .map(|i| {
                let (lo, hi) = (problem.l[i], problem.u[i]);
                if is_inf_lower(lo) && is_inf_upper(hi) {
                    RowKind::Free
                } else if hi - lo < T::of(EQ_TOL) {
                    RowKind::Equality
                } else {
                    RowKind::Inequality
                }
            })
            .collect();

        let rho = settings.rho;
        let mut solver = Self {
            n,
            m,
            p,
            q,
            a,
            l,
            u,
            l_orig: problem.l.clone(),
            u_orig: problem.u.clone(),
            scaling,
            kinds,
            rho,
            rho_vec: vec![T::zero(); m],
            rho_inv: vec![T::zero(); m],
            factor: LdlFactor::new(&CscMatrix::identity(0), None, Ordering::Natural)?,
            x: vec![T::zero(); n],
            z: vec![T::zero(); m],
            y: vec![T::zero(); m],
            settings,
        };
        solver.set_rho(rho)?;
        Ok(solver)
    }

    pub fn settings(&self) -> &Settings<T> {
        &self.settings
    }

    fn set_rho(&mut self, rho: T) -> Result<(), QpError> {
        self.rho = rho;
        for i in 0..self.m {
            self.rho_vec[i] = match self.kinds[i] {
                RowKind::Free => T::of(RHO_MIN),
                RowKind::Inequality => rho,
                RowKind::Equality => rho * self.settings.eq_rho_factor,
            };
            self.rho_inv[i] = T::one() / self.rho_vec[i];
        }
        let kkt = self.kkt_matrix(self.settings.sigma, &self.rho_inv, None);
        let signs: Vec<i8> = (0..self.n + self.m).map(|i| if i < self.n { 1 } else { -1 }).collect();
        self.factor = LdlFactor::new(&kkt, Some(&signs), self.settings.ordering)?;
        Ok(())
    }

    /// Upper triangle of `[P + σI, Aᵀ; A, -diag(neg_diag)]`, optionally
    /// restricted to a subset of constraint rows.
    fn kkt_matrix(&self, sigma: T, neg_diag: &[T], rows: Option<&[usize]>) -> CscMatrix<T> {
        let n = self.n;
        let mut trip: Vec<(usize, usize, T)> = Vec::with_capacity(self.p.nnz() + self.a.nnz() + n + self.m);
        trip.extend(self.p.triplets());
        trip.extend((0..n).map(|j| (j, j, sigma)));
        match rows {
            None => {
                trip.extend(self.a.triplets().map(|(i, j, v)| (j, n + i, v)));
                trip.extend((0..self.m).map(|i| (n + i, n + i, -neg_diag[i])));
                CscMatrix::from_triplets(n + self.m, n + self.m, &trip)
            }
            Some(rows) => {
                let mut map = vec![usize::MAX; self.m];
                for (k, &r) in rows.iter().enumerate() {
                    map[r] = k;
                }
                trip.extend(
                    self.a
                        .triplets()
                        .filter(|&(i, _, _)| map[i] != usize::MAX)
                        .map(|(i, j, v)| (j, n + map[i], v)),
                );
                trip.extend((0..rows.len()).map(|k| (n + k, n + k, -neg_diag[k])));
                CscMatrix::from_triplets(n + rows.len(), n + rows.len(), &trip)
            }
        }
    }

    /// Starts the next solve from an unscaled primal/dual pair.
    pub fn warm_start(&mut self, primal: &[T], dual: &[T]) -> Result<(), QpError> {
        if primal.len() != self.n || dual.len() != self.m {
            return Err(QpError::Dimension(format!(
                "warm start has {} primal / {} dual entries, expected {} / {}",
                primal.len(),
                dual.len(),
                self.n,
                self.m
            )));
        }
        let s = &self.scaling;
        for j in 0..self.n {
            self.x[j] = primal[j] * s.d_inv[j];
        }
        for i in 0..self.m {
            self.y[i] = dual[i] * s.e_inv[i] * s.c;
        }
        self.a.mul_vec(&self.x, &mut self.z);
        Ok(())
    }

    pub fn cold_start(&mut self) {
        self.x.iter_mut().for_each(|v| *v = T::zero());
        self.z.iter_mut().for_each(|v| *v = T::zero());
        self.y.iter_mut().for_each(|v| *v = T::zero());
    }

    fn project(&self, i: usize, v: T) -> T {
        v.max(self.l[i]).min(self.u[i])
    }

    fn residuals(&self, ax: &[T], px: &[T], aty: &[T]) -> Residuals<T> {
        let s = &self.scaling;
        let mut prim = T::zero();
        let mut prim_scaled = T::zero();
        for i in 0..self.m {
            let r = ax[i] - self.z[i];
            prim = prim.max((r * s.e_inv[i]).abs());
            prim_scaled = prim_scaled.max(r.abs());
        }
        let prim_scale = norm_inf_scaled(ax, &s.e_inv).max(norm_inf_scaled(&self.z, &s.e_inv));

        let mut dual = T::zero();
        let mut dual_scaled = T::zero();
        for j in 0..self.n {
            let r = px[j] + self.q[j] + aty[j];
            dual = dual.max((r * s.d_inv[j]).abs());
            dual_scaled = dual_scaled.max(r.abs());
        }
        dual *= s.c_inv;
        let dual_scale = s.c_inv
            * norm_inf_scaled(px, &s.d_inv)
                .max(norm_inf_scaled(aty, &s.d_inv))
                .max(norm_inf_scaled(&self.q, &s.d_inv));

        let tiny = T::of(1e-10);
        let prim_den = norm_inf(ax).max(norm_inf(&self.z)) + tiny;
        let dual_den = norm_inf(px).max(norm_inf(aty)).max(norm_inf(&self.q)) + tiny;
        Residuals {
            prim,
            dual,
            prim_scale,
            dual_scale,
            prim_scaled_ratio: prim_scaled / prim_den,
            dual_scaled_ratio: dual_scaled / dual_den,
        }
    }

    fn converged(&self, r: &Residuals<T>) -> bool {
        let st = &self.settings;
        r.prim <= st.eps_abs + st.eps_rel * r.prim_scale && r.dual <= st.eps_abs + st.eps_rel * r.dual_scale
    }

    fn primal_infeasible(&self, dy_scaled: &[T]) -> bool {
        if self.m == 0 {
            return false;
        }
        let s = &self.scaling;
        let mut w: Vec<T> = dy_scaled.iter().zip(&s.e).map(|(&d, &e)| d * e).collect();
        for i in 0..self.m {
            if is_inf_upper(self.u_orig[i]) {
                w[i] = w[i].min(T::zero());
            }
            if is_inf_lower(self.l_orig[i]) {
                w[i] = w[i].max(T::zero());
            }
        }
        let norm = norm_inf(&w);
        if norm <= T::of(1e-30) {
            return false;
        }
        let mut support = T::zero();
        for i in 0..self.m {
            if w[i] > T::zero() {
                support += self.u_orig[i] * w[i];
            } else if w[i] < T::zero() {
                support += self.l_orig[i] * w[i];
            }
        }
        let eps = self.settings.eps_prim_inf;
        if support >= -eps * norm {
            return false;
        }
        let back: Vec<T> = w.iter().zip(&s.e_inv).map(|(&v, &e)| v * e).collect();
        let mut aty = vec![T::zero(); self.n];
        self.a.tmul_vec(&back, &mut aty);
        norm_inf_scaled(&aty, &s.d_inv) <= eps * norm
    }

    fn dual_infeasible(&self, dx_scaled: &[T]) -> bool {
        let s = &self.scaling;
        let norm = norm_inf_scaled(dx_scaled, &s.d);
        if norm <= T::of(1e-30) {
            return false;
        }
        let eps = self.settings.eps_dual_inf;
        let qdx: T = self.q.iter().zip(dx_scaled).map(|(&a, &b)| a * b).sum::<T>() * s.c_inv;
        if qdx >= -eps * norm {
            return false;
        }
        let mut pdx = vec![T::zero(); self.n];
        self.p.sym_upper_mul_vec(dx_scaled, &mut pdx);
        if s.c_inv * norm_inf_scaled(&pdx, &s.d_inv) > eps * norm {
            return false;
        }
        let mut adx = vec![T::zero(); self.m];
        self.a.mul_vec(dx_scaled, &mut adx);
        for i in 0..self.m {
            let v = adx[i] * s.e_inv[i];
            if !is_inf_upper(self.u_orig[i]) && v > eps * norm {
                return false;
            }
            if !is_inf_lower(self.l_orig[i]) && v < -eps * norm {
                return false;
            }
        }
        true
    }

    /// Runs ADMM from the current iterates.
    pub fn solve(&mut self) -> Result<QpSolution<T>, QpError> {
        let (n, m) = (self.n, self.m);
        let alpha = self.settings.alpha;
        let one_m_alpha = T::one() - alpha;
        let sigma = self.settings.sigma;
        let check = self.settings.check_interval.max(1);

        let mut rhs = vec![T::zero(); n + m];
        let mut x_prev = self.x.clone();
        let mut y_prev = self.y.clone();
        let mut ax = vec![T::zero(); m];
        let mut px = vec![T::zero(); n];
        let mut aty = vec![T::zero(); n];

        let mut status = Status::MaxIterations;
        let mut iterations = self.settings.max_iter;
        let mut last = None;

        for iter in 1..=self.settings.max_iter {
            x_prev.copy_from_slice(&self.x);
            y_prev.copy_from_slice(&self.y);

            for j in 0..n {
                rhs[j] = sigma * self.x[j] - self.q[j];
            }
            for i in 0..m {
                rhs[n + i] = self.z[i] - self.rho_inv[i] * self.y[i];
            }
            self.factor.solve_in_place(&mut rhs);

            for j in 0..n {
                self.x[j] = alpha * rhs[j] + one_m_alpha * self.x[j];
            }
            for i in 0..m {
                let z_tilde = self.z[i] + self.rho_inv[i] * (rhs[n + i] - self.y[i]);
                let z_relaxed = alpha * z_tilde + one_m_alpha * self.z[i];
                let z_new = self.project(i, z_relaxed + self.rho_inv[i] * self.y[i]);
                self.y[i] += self.rho_vec[i] * (z_relaxed - z_new);
                self.z[i] = z_new;
            }

            let at_check = iter % check == 0 || iter == self.settings.max_iter;
            if !at_check {
                continue;
            }
            self.a.mul_vec(&self.x, &mut ax);
            self.p.sym_upper_mul_vec(&self.x, &mut px);
            self.a.tmul_vec(&self.y, &mut aty);
            let r = self.residuals(&ax, &px, &aty);
            if self.converged(&r) {
                status = Status::Solved;
                iterations = iter;
                last = Some(r);
                break;
            }
            if self.settings.polish && iter % POLISH_PROBE_INTERVAL == 0 {
                if let Some(polished) = self.polish_early(iter)? {
                    return Ok(polished);
                }
            }
            let dy: Vec<T> = self.y.iter().zip(&y_prev).map(|(&a, &b)| a - b).collect();
            if self.primal_infeasible(&dy) {
                status = Status::PrimalInfeasible;
                iterations = iter;
                last = Some(r);
                break;
            }
            let dx: Vec<T> = self.x.iter().zip(&x_prev).map(|(&a, &b)| a - b).collect();
            if self.dual_infeasible(&dx) {
                status = Status::DualInfeasible;
                iterations = iter;
                last = Some(r);
                break;
            }

            if self.settings.adaptive_rho
                && iter % self.settings.adaptive_rho_interval.max(1) == 0
                && iter < self.settings.max_iter
            {
                let ratio = (r.prim_scaled_ratio / (r.dual_scaled_ratio + T::of(1e-30))).sqrt();
                let new_rho = (self.rho * ratio).max(T::of(RHO_MIN)).min(T::of(RHO_MAX));
                let tol = self.settings.adaptive_rho_tolerance;
                if new_rho > self.rho * tol || new_rho < self.rho / tol {
                    self.set_rho(new_rho)?;
                }
            }
            last = Some(r);
        }

        let r = match last {
            Some(r) => r,
            None => {
                self.a.mul_vec(&self.x, &mut ax);
                self.p.sym_upper_mul_vec(&self.x, &mut px);
                self.a.tmul_vec(&self.y, &mut aty);
                self.residuals(&ax, &px, &aty)
            }
        };

        let mut solution = self.unscaled_solution(status, iterations, r.prim, r.dual);
        if self.settings.polish {
            let polished = match status {
                Status::Solved => self.polish(&solution)?,
                Status::MaxIterations => self.polish_early(iterations)?,
                _ => None,
            };
            if let Some(polished) = polished {
                solution = polished;
            }
        }
        Ok(solution)
    }

    fn unscaled_solution(&self, status: Status, iterations: usize, prim: T, dual: T) -> QpSolution<T> {
        let s = &self.scaling;
        let primal: Vec<T> = self.x.iter().zip(&s.d).map(|(&v, &d)| v * d).collect();
        let dual_vec: Vec<T> = self.y.iter().zip(&s.e).map(|(&v, &e)| v * e * s.c_inv).collect();
        let objective = self.unscaled_objective(&self.x);
        QpSolution {
            primal,
            dual: dual_vec,
            status,
            iterations,
            primal_residual: prim,
            dual_residual: dual,
            objective,
            polished: false,
        }
    }

    fn unscaled_objective(&self, x_scaled: &[T]) -> T {
        let mut px = vec![T::zero(); self.n];
        self.p.sym_upper_mul_vec(x_scaled, &mut px);
        let half = T::of(0.5);
        let quad: T = x_scaled.iter().zip(&px).map(|(&a, &b)| half * a * b).sum();
        let lin: T = x_scaled.iter().zip(&self.q).map(|(&a, &b)| a * b).sum();
        (quad + lin) * self.scaling.c_inv
    }

    /// Keeps the polished point when it is at least as accurate as the ADMM
    /// iterate.
    fn polish(&self, admm: &QpSolution<T>) -> Result<Option<QpSolution<T>>, QpError> {
        let floor = T::of(1e-10);
        Ok(self.polish_candidate(admm.iterations)?.filter(|p| {
            p.primal_residual <= admm.primal_residual.max(floor) && p.dual_residual <= admm.dual_residual.max(floor)
        }))
    }

    /// Polished point accepted only if it meets the absolute tolerance on its
    /// own, for terminating before ADMM converges.
    fn polish_early(&self, iterations: usize) -> Result<Option<QpSolution<T>>, QpError> {
        let eps = self.settings.eps_abs;
        Ok(self
            .polish_candidate(iterations)?
            .filter(|p| p.primal_residual <= eps && p.dual_residual <= eps))
    }

    /// Solves the equality-constrained problem of the active set guessed from
    /// the current iterate. A guess with wrongly signed multipliers or
    /// violated inactive rows is corrected and re-solved a few times, so a
    /// near-degenerate ADMM iterate still lands on a vertex.
    fn polish_candidate(&self, iterations: usize) -> Result<Option<QpSolution<T>>, QpError> {
        let m = self.m;
        // -1 lower, +1 upper, 0 equality; None inactive.
        let mut active: Vec<Option<i8>> = (0..m)
            .map(|i| {
                if self.kinds[i] == RowKind::Equality {
                    Some(0)
                } else if self.z[i] - self.l[i] < -self.y[i] && !is_inf_lower(self.l[i]) {
                    Some(-1)
                } else if self.u[i] - self.z[i] < self.y[i] && !is_inf_upper(self.u[i]) {
                    Some(1)
                } else {
                    None
                }
            })
            .collect();
        let sign_tol = T::of(1e-9);
        for _ in 0..POLISH_ROUNDS {
            let Some((x, y)) = self.solve_active_set(&active) else {
                return Ok(None);
            };
            let mut ax = vec![T::zero(); m];
            self.a.mul_vec(&x, &mut ax);
            let mut changed = false;
            for i in 0..m {
                match active[i] {
                    Some(-1) if y[i] > sign_tol => active[i] = None,
                    Some(1) if y[i] < -sign_tol => active[i] = None,
                    Some(_) => continue,
                    None => {
                        let tol = sign_tol * T::one().max(ax[i].abs());
                        if ax[i] > self.u[i] + tol {
                            active[i] = Some(1);
                        } else if ax[i] < self.l[i] - tol {
                            active[i] = Some(-1);
                        } else {
                            continue;
                        }
                    }
                }
                changed = true;
            }
            if !changed {
                return Ok(Some(self.polished_solution(&x, &y, &ax, iterations)));
            }
        }
        Ok(None)
    }

    /// Primal and full-length dual of the KKT system with the given rows
    /// held at their bounds.
    fn solve_active_set(&self, active: &[Option<i8>]) -> Option<(Vec<T>, Vec<T>)> {
        let n = self.n;
        let rows: Vec<usize> = (0..self.m).filter(|&i| active[i].is_some()).collect();
        let targets: Vec<T> = rows
            .iter()
            .map(|&i| if active[i] == Some(-1) { self.l[i] } else { self.u[i] })
            .collect();
        let delta = self.settings.polish_delta;
        let k = rows.len();
        let reg = vec![delta; k];
        let kkt = self.kkt_matrix(delta, &reg, Some(&rows));
        let signs: Vec<i8> = (0..n + k).map(|i| if i < n { 1 } else { -1 }).collect();
        let mut factor = LdlFactor::new(&kkt, Some(&signs), self.settings.ordering).ok()?;

        let a_red = self.a.select_rows(&rows);
        let mut b = vec![T::zero(); n + k];
        for j in 0..n {
            b[j] = -self.q[j];
        }
        b[n..].copy_from_slice(&targets);
        let mut sol = b.clone();
        factor.solve_in_place(&mut sol);

        // Iterative refinement against the unregularized KKT matrix.
        let mut px = vec![T::zero(); n];
        let mut aty = vec![T::zero(); n];
        let mut ax = vec![T::zero(); k];
        for _ in 0..self.settings.polish_refine_iter {
            self.p.sym_upper_mul_vec(&sol[..n], &mut px);
            a_red.tmul_vec(&sol[n..], &mut aty);
            a_red.mul_vec(&sol[..n], &mut ax);
            let mut res = vec![T::zero(); n + k];
            for j in 0..n {
                res[j] = b[j] - px[j] - aty[j];
            }
            for r in 0..k {
                res[n + r] = b[n + r] - ax[r];
            }
            factor.solve_in_place(&mut res);
            for (s, d) in sol.iter_mut().zip(&res) {
                *s += *d;
            }
        }
        if !sol.iter().all(|v| v.is_finite()) {
            return None;
        }
        let mut y = vec![T::zero(); self.m];
        for (idx, &row) in rows.iter().enumerate() {
            y[row] = sol[n + idx];
        }
        sol.truncate(n);
        Some((sol, y))
    }

    fn polished_solution(&self, x_pol: &[T], y_pol: &[T], ax_full: &[T], iterations: usize) -> QpSolution<T> {
        let (n, m) = (self.n, self.m);
        let z_pol: Vec<T> = (0..m).map(|i| self.project(i, ax_full[i])).collect();

        let mut px = vec![T::zero(); n];
        self.p.sym_upper_mul_vec(x_pol, &mut px);
        let mut aty = vec![T::zero(); n];
        self.a.tmul_vec(y_pol, &mut aty);
        let s = &self.scaling;
        let prim = (0..m).fold(T::zero(), |acc, i| acc.max(((ax_full[i] - z_pol[i]) * s.e_inv[i]).abs()));
        let dual = s.c_inv * (0..n).fold(T::zero(), |acc, j| acc.max(((px[j] + self.q[j] + aty[j]) * s.d_inv[j]).abs()));

        let primal: Vec<T> = x_pol.iter().zip(&s.d).map(|(&v, &d)| v * d).collect();
        let dual_vec: Vec<T> = y_pol.iter().zip(&s.e).map(|(&v, &e)| v * e * s.c_inv).collect();
        QpSolution {
            primal,
            dual: dual_vec,
            status: Status::Solved,
            iterations,
            primal_residual: prim,
            dual_residual: dual,
            objective: self.unscaled_objective(x_pol),
            polished: true,
        }
    }
}

/// One-shot solve, optionally warm-started from an unscaled primal/dual pair.
pub fn solve<T: Real>(
    problem: &QpProblem<T>,
    warm: Option<(&[T], &[T])>,
    settings: &Settings<T>,
) -> Result<QpSolution<T>, QpError> {
    let mut solver = Solver::new(problem, settings.clone())?;
    if let Some((x, y)) = warm {
        solver.warm_start(x, y)?;
    }
    solver.solve()
}
