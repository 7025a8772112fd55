//! Kernel equation `G(φ) = G₀(φ) − R_V(φ) = 0` with the dNLS part
//! `G₀(φ) = −(a/μ²)Δφ + mφ − |φ|^{2p}φ`.

use crate::continuum::{abs_pow, check_exponent, focusing_power};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, SymmetricSequence};
use crate::linalg::{lanczos_extremes, minres_weighted, wdot, Tridiagonal, TridiagonalLu};
use crate::range::{solve_range, RangeOperator, RangeOptions, RangeReport};
use crate::spectral::{Collocation, KernelField, Nonlinearity, TimeFourierField};
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

/// Dense eigen-diagnostics up to this many unknowns; Lanczos above.
const DENSE_LIMIT: usize = 2000;

#[derive(Clone, Debug)]
pub struct DnlsProblem {
    lattice: Lattice,
    a: f64,
    p: f64,
    m: f64,
}

impl DnlsProblem {
    pub fn new(lattice: Lattice, a: f64, p: f64, m: f64) -> Result<Self> {
        check_exponent(lattice.dim(), p)?;
        if !(a > 0.0 && a < 0.5) {
            return Err(Error::InvalidParameter(format!("coupling a = {a} outside (0, 1/2)")));
        }
        let mu = lattice.mu();
        if !(m > 0.0 && m * mu * mu < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "m μ² = {} must lie in (0, 1/2)",
                m * mu * mu
            )));
        }
        Ok(Self { lattice, a, p, m })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn mu(&self) -> f64 {
        self.lattice.mu()
    }

    fn coupling(&self) -> f64 {
        self.a / (self.mu() * self.mu())
    }

    fn check(&self, phi: &SymmetricSequence) -> Result<()> {
        if phi.lattice() != &self.lattice {
            return Err(Error::GridMismatch("sequence lattice differs from the problem".into()));
        }
        Ok(())
    }

    fn g0_values(&self, phi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; phi.len()];
        self.lattice.laplacian_into(phi, &mut out);
        let c = self.coupling();
        for (o, x) in out.iter_mut().zip(phi) {
            *o = -c * *o + self.m * x - focusing_power(*x, self.p);
        }
        out
    }

    /// `G₀(φ)`.
    pub fn g0(&self, phi: &SymmetricSequence) -> Result<SymmetricSequence> {
        self.check(phi)?;
        SymmetricSequence::from_values(self.lattice, self.g0_values(phi.values()))
    }

    /// `G₀'(φ) h = −(a/μ²)Δh + m h − (2p+1)|φ|^{2p} h`.
    pub fn g0_derivative(&self, phi: &SymmetricSequence, h: &SymmetricSequence) -> Result<SymmetricSequence> {
        self.check(phi)?;
        self.check(h)?;
        let diag = self.jacobian_diagonal(phi.values());
        let mut out = vec![0.0; h.values().len()];
        apply_jacobian(&self.lattice, self.coupling(), &diag, h.values(), &mut out);
        SymmetricSequence::from_values(self.lattice, out)
    }

    fn jacobian_diagonal(&self, phi: &[f64]) -> Vec<f64> {
        phi.iter()
            .map(|x| self.m - (2.0 * self.p + 1.0) * abs_pow(*x, 2.0 * self.p))
            .collect()
    }

    /// `H₀(φ) = μⁿ[(a/2μ²) Σ_{|j−k|=1} |φ_j − φ_k|² − (1/(p+1)) Σ |φ_j|^{2p+2}]`,
    /// the sum running over ordered neighbour pairs.
    pub fn h0(&self, phi: &SymmetricSequence) -> f64 {
        h0(phi, self.a, self.p)
    }
}

/// See [`DnlsProblem::h0`].
pub fn h0(phi: &SymmetricSequence, a: f64, p: f64) -> f64 {
    let mu = phi.grid().mu();
    let n = phi.grid().dim() as i32;
    // Σ over ordered pairs of |φ_j − φ_k|² is 2⟨φ, −Δφ⟩.
    mu.powi(n) * (a / (mu * mu) * phi.dirichlet_form() - phi.power_sum(2.0 * p + 2.0) / (p + 1.0))
}

/// `N(φ) = μⁿ Σ |φ_j|²`.
pub fn n_constraint(phi: &SymmetricSequence) -> f64 {
    phi.norm_l2_mu().powi(2)
}

fn apply_jacobian(lattice: &Lattice, coupling: f64, diag: &[f64], h: &[f64], out: &mut [f64]) {
    lattice.laplacian_into(h, out);
    for ((o, x), d) in out.iter_mut().zip(h).zip(diag) {
        *o = -coupling * *o + d * x;
    }
}

/// Inverse of `G₀'(φ)`: pivoted tridiagonal LU in 1D, weighted MINRES in 2D.
struct JacobianSolver<'a> {
    lattice: &'a Lattice,
    coupling: f64,
    diag: Vec<f64>,
    weights: Vec<f64>,
    lu: Option<TridiagonalLu>,
}

impl<'a> JacobianSolver<'a> {
    fn new(prob: &'a DnlsProblem, phi: &[f64]) -> Result<Self> {
        let diag = prob.jacobian_diagonal(phi);
        let coupling = prob.coupling();
        let lu = if prob.lattice.dim() == 1 {
            let (dl, d, du) = prob.lattice.laplacian_tridiagonal();
            Some(
                Tridiagonal {
                    lower: dl.iter().map(|x| -coupling * x).collect(),
                    diag: d.iter().zip(&diag).map(|(x, g)| -coupling * x + g).collect(),
                    upper: du.iter().map(|x| -coupling * x).collect(),
                }
                .factor()?,
            )
        } else {
            None
        };
        Ok(Self {
            lattice: &prob.lattice,
            coupling,
            diag,
            weights: prob.lattice.weights(),
            lu,
        })
    }

    fn apply(&self, h: &[f64], out: &mut [f64]) {
        apply_jacobian(self.lattice, self.coupling, &self.diag, h, out);
    }

    fn solve(&self, rhs: &[f64], rel_tol: f64) -> Result<Vec<f64>> {
        match &self.lu {
            Some(lu) => {
                let mut x = rhs.to_vec();
                lu.solve_in_place(&mut x);
                Ok(x)
            }
            None => {
                let mut x = vec![0.0; rhs.len()];
                minres_weighted(|v, o| self.apply(v, o), rhs, &mut x, &self.weights, rel_tol, 20_000)?;
                Ok(x)
            }
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct NewtonReport {
    pub iterations: usize,
    /// `‖G‖_{ℓ²_μ}` before each step and after the last.
    pub residual_history: Vec<f64>,
    pub damped_steps: usize,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl NewtonOptions {
    pub fn dnls() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 60,
        }
    }

    pub fn kernel() -> Self {
        Self {
            tol: 1e-11,
            max_iter: 40,
        }
    }
}

fn norm_l2_mu(lattice: &Lattice, x: &[f64]) -> f64 {
    (lattice.mu().powi(lattice.dim() as i32) * lattice.dot(x, x)).sqrt()
}

fn norm_q(lattice: &Lattice, x: &[f64]) -> f64 {
    let mut lx = vec![0.0; x.len()];
    lattice.laplacian_into(x, &mut lx);
    let mu = lattice.mu();
    (lattice.dot(x, x) - lattice.dot(x, &lx) / (mu * mu)).max(0.0).sqrt()
}

/// Relative step change at which the inner `G₀'⁻¹ R_V'` iteration stops.
const INNER_TOL: f64 = 1e-8;

/// Krylov tolerance for an inexact Newton step at residual `r`.
fn forcing(r: f64, tol: f64) -> f64 {
    (0.01 * tol / r).clamp(1e-14, 1e-4)
}

/// Newton iteration for `G₀(Φ) = 0` from `init` (the sampled continuum profile).
pub fn solve_dnls_ground_state(
    prob: &DnlsProblem,
    init: &SymmetricSequence,
    opts: &NewtonOptions,
) -> Result<(SymmetricSequence, NewtonReport)> {
    prob.check(init)?;
    let lat = prob.lattice;
    let mut phi = init.values().to_vec();
    let mut g = prob.g0_values(&phi);
    let mut r = norm_l2_mu(&lat, &g);
    let mut report = NewtonReport::default();
    report.residual_history.push(r);
    while r >= opts.tol {
        if report.iterations >= opts.max_iter {
            return Err(Error::NoConvergence {
                stage: "dnls ground state",
                iterations: report.iterations,
                residual: r,
            });
        }
        report.iterations += 1;
        let solver = JacobianSolver::new(prob, &phi)?;
        let rhs: Vec<f64> = g.iter().map(|x| -x).collect();
        let delta = solver.solve(&rhs, forcing(r, opts.tol))?;
        // Full step first; halve while the residual grows.
        let mut step = 1.0;
        loop {
            let trial: Vec<f64> = phi.iter().zip(&delta).map(|(x, d)| x + step * d).collect();
            let gt = prob.g0_values(&trial);
            let rt = norm_l2_mu(&lat, &gt);
            if rt < r || step < 1e-3 {
                if step < 1.0 {
                    report.damped_steps += 1;
                }
                if !(rt < r) && !(rt.is_finite()) {
                    return Err(Error::NoConvergence {
                        stage: "dnls ground state",
                        iterations: report.iterations,
                        residual: rt,
                    });
                }
                phi = trial;
                g = gt;
                r = rt;
                break;
            }
            step *= 0.5;
        }
        report.residual_history.push(r);
    }
    report.residual = r;
    Ok((SymmetricSequence::from_values(lat, phi)?, report))
}

/// Everything the range equation needs.
#[derive(Clone, Debug)]
pub struct RangeContext {
    pub op: RangeOperator,
    pub nl: Nonlinearity,
    pub col: Collocation,
    pub opts: RangeOptions,
}

/// `R_V(φ) = μ^{−2−1/p} Π_V[N(v e₁ + w(v)) − N(v e₁)]` with `v = μ^{1/p}φ`.
/// Returns the remainder together with the range solution.
pub fn r_v(
    phi: &SymmetricSequence,
    prob: &DnlsProblem,
    ctx: &RangeContext,
    warm: Option<&TimeFourierField>,
) -> Result<(SymmetricSequence, TimeFourierField, RangeReport)> {
    prob.check(phi)?;
    let (r, w, rep) = r_v_values(phi.values(), prob, ctx, warm)?;
    Ok((SymmetricSequence::from_values(prob.lattice, r)?, w, rep))
}

fn r_v_values(
    phi: &[f64],
    prob: &DnlsProblem,
    ctx: &RangeContext,
    warm: Option<&TimeFourierField>,
) -> Result<(Vec<f64>, TimeFourierField, RangeReport)> {
    let mu = prob.mu();
    let amp = mu.powf(1.0 / prob.p);
    let v: Vec<f64> = phi.iter().map(|x| amp * x).collect();
    let vk = KernelField(SymmetricSequence::from_values(prob.lattice, v.clone())?);
    let (w, rep) = solve_range(&vk, &ctx.op, &ctx.nl, &ctx.col, &ctx.opts, warm)?;
    let scale = mu.powf(-2.0 - 1.0 / prob.p);
    let diff = ctx.col.harmonic1_difference(&v, &w, &ctx.nl)?;
    Ok((diff.into_iter().map(|x| scale * x).collect(), w, rep))
}

#[derive(Clone, Debug)]
pub struct KernelSolution {
    pub phi: SymmetricSequence,
    pub w: TimeFourierField,
    pub report: KernelReport,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct KernelReport {
    pub newton: NewtonReport,
    /// Contraction rate of the inner `G₀'⁻¹ R_V'` iteration, per Newton step.
    pub inner_rates: Vec<f64>,
    pub remainder_norm: f64,
    /// `‖R_V(Φ)‖_{ℓ²_μ}` at the starting point.
    pub remainder_at_dnls: f64,
    pub distance_to_dnls_q_mu: f64,
    pub range: RangeReport,
}

#[derive(Clone, Debug)]
pub struct KernelOptions {
    pub newton: NewtonOptions,
    /// Drop `R_V` (the kernel equation reduces to `G₀ = 0`).
    pub without_remainder: bool,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self {
            newton: NewtonOptions::kernel(),
            without_remainder: false,
        }
    }
}

/// Newton continuation of `G = G₀ − R_V` from the dNLS ground state `Φ`.
///
/// Each Newton system `(G₀' − R_V')δ = −G` is solved by the iteration
/// `δ ← G₀'⁻¹(−G + R_V'δ)`, with `R_V'δ` from a forward difference.
pub fn solve_kernel(
    prob: &DnlsProblem,
    dnls: &SymmetricSequence,
    ctx: &RangeContext,
    opts: &KernelOptions,
) -> Result<KernelSolution> {
    prob.check(dnls)?;
    let lat = prob.lattice;
    let mut phi = dnls.values().to_vec();
    let remainder = |phi: &[f64], warm: Option<&TimeFourierField>| {
        if opts.without_remainder {
            let w = TimeFourierField::zeros(lat, ctx.op.l_max(), ctx.op.set())?;
            Ok((vec![0.0; phi.len()], w, RangeReport::default()))
        } else {
            r_v_values(phi, prob, ctx, warm)
        }
    };
    let (mut rv, mut w, mut range_rep) = remainder(&phi, None)?;
    let residual_of = |phi: &[f64], rv: &[f64]| -> Vec<f64> {
        prob.g0_values(phi).iter().zip(rv).map(|(a, b)| a - b).collect()
    };
    let mut g = residual_of(&phi, &rv);
    let mut r = norm_l2_mu(&lat, &g);
    let mut report = KernelReport::default();
    report.remainder_at_dnls = norm_l2_mu(&lat, &rv);
    report.newton.residual_history.push(r);
    let tol = opts.newton.tol;
    while r >= tol {
        if report.newton.iterations >= opts.newton.max_iter {
            return Err(Error::NoConvergence {
                stage: "kernel equation",
                iterations: report.newton.iterations,
                residual: r,
            });
        }
        report.newton.iterations += 1;
        let solver = JacobianSolver::new(prob, &phi)?;
        let krylov_tol = forcing(r, tol);
        let neg_g: Vec<f64> = g.iter().map(|x| -x).collect();
        let mut delta = solver.solve(&neg_g, krylov_tol)?;
        let mut rate: f64 = 0.0;
        if !opts.without_remainder {
            let phi_q = norm_q(&lat, &phi);
            let mut prev_change = f64::INFINITY;
            for _ in 0..50 {
                let dq = norm_q(&lat, &delta);
                if dq == 0.0 {
                    break;
                }
                let eps = 1e-6 * (1.0 + phi_q) / dq;
                let shifted: Vec<f64> = phi.iter().zip(&delta).map(|(x, d)| x + eps * d).collect();
                let (rv_shift, _, _) = r_v_values(&shifted, prob, ctx, Some(&w))?;
                let rhs: Vec<f64> = neg_g
                    .iter()
                    .zip(rv_shift.iter().zip(&rv))
                    .map(|(gm, (a, b))| gm + (a - b) / eps)
                    .collect();
                let next = solver.solve(&rhs, krylov_tol)?;
                let change: Vec<f64> = next.iter().zip(&delta).map(|(a, b)| a - b).collect();
                let change = norm_q(&lat, &change);
                delta = next;
                if prev_change.is_finite() && prev_change > 0.0 {
                    rate = change / prev_change;
                    if rate > 0.9 {
                        return Err(Error::Divergence {
                            stage: "kernel newton step",
                            rate,
                        });
                    }
                }
                prev_change = change;
                // The difference quotient is good to ~1e-6 relative; iterating past
                // 1e-8 only chases its rounding noise.
                if change <= INNER_TOL * norm_q(&lat, &delta) {
                    break;
                }
            }
        }
        report.inner_rates.push(rate);
        let mut step = 1.0;
        loop {
            let trial: Vec<f64> = phi.iter().zip(&delta).map(|(x, d)| x + step * d).collect();
            let (rv_t, w_t, rep_t) = remainder(&trial, Some(&w))?;
            let gt = residual_of(&trial, &rv_t);
            let rt = norm_l2_mu(&lat, &gt);
            if rt < r || step < 1e-3 {
                if step < 1.0 {
                    report.newton.damped_steps += 1;
                }
                if !rt.is_finite() {
                    return Err(Error::NoConvergence {
                        stage: "kernel equation",
                        iterations: report.newton.iterations,
                        residual: rt,
                    });
                }
                phi = trial;
                rv = rv_t;
                w = w_t;
                range_rep = rep_t;
                g = gt;
                r = rt;
                break;
            }
            step *= 0.5;
        }
        report.newton.residual_history.push(r);
    }
    report.newton.residual = r;
    report.remainder_norm = norm_l2_mu(&lat, &rv);
    let diff: Vec<f64> = phi.iter().zip(dnls.values()).map(|(a, b)| a - b).collect();
    let mu_n = lat.mu().powi(lat.dim() as i32);
    report.distance_to_dnls_q_mu = mu_n.sqrt() * norm_q(&lat, &diff);
    report.range = range_rep;
    Ok(KernelSolution {
        phi: SymmetricSequence::from_values(lat, phi)?,
        w,
        report,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HessianReport {
    /// `d = ⟨G₀'(Φ)Φ, Φ⟩`.
    pub d: f64,
    /// `|d + 2p Σ Φ^{2p+2}|`.
    pub identity_error: f64,
    pub relative_identity_error: f64,
    /// Smallest eigenvalue of `G₀'(Φ)` on `{h : ⟨h, Φ⟩ = 0}` within the symmetry class.
    pub tangent_min_eigenvalue: f64,
    pub min_singular_value: f64,
    pub consistent: bool,
}

/// Non-degeneracy diagnostics of `G₀'(Φ)` at a dNLS solution.
pub fn hessian_diagnostics(phi: &SymmetricSequence, prob: &DnlsProblem) -> Result<HessianReport> {
    prob.check(phi)?;
    let lat = prob.lattice;
    let x = phi.values();
    let solver = JacobianSolver::new(prob, x)?;
    let mut gx = vec![0.0; x.len()];
    solver.apply(x, &mut gx);
    let d = lat.dot(&gx, x);
    let identity = -2.0 * prob.p * phi.power_sum(2.0 * prob.p + 2.0);
    let identity_error = (d - identity).abs();
    let relative_identity_error = identity_error / d.abs();
    let (tangent_min_eigenvalue, min_singular_value) = if lat.len() <= DENSE_LIMIT {
        dense_spectrum(&solver, x)
    } else {
        iterative_spectrum(&solver, x)?
    };
    Ok(HessianReport {
        d,
        identity_error,
        relative_identity_error,
        tangent_min_eigenvalue,
        min_singular_value,
        consistent: relative_identity_error <= 1e-8,
    })
}

/// Works with `S = D^{1/2} A D^{−1/2}`, symmetric since `A` is self-adjoint in the
/// orbit-weighted product.
fn dense_spectrum(solver: &JacobianSolver, phi: &[f64]) -> (f64, f64) {
    let n = phi.len();
    let sw: Vec<f64> = solver.weights.iter().map(|w| w.sqrt()).collect();
    let mut s = DMatrix::<f64>::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        solver.apply(&e, &mut col);
        e[j] = 0.0;
        for i in 0..n {
            if col[i] != 0.0 {
                s[(i, j)] = sw[i] * col[i] / sw[j];
            }
        }
    }
    let s = 0.5 * (&s + s.transpose());
    let eig = SymmetricEigen::new(s.clone()).eigenvalues;
    let min_sv = eig.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let big = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let mut u = nalgebra::DVector::from_iterator(n, phi.iter().zip(&sw).map(|(x, w)| x * w));
    u /= u.norm();
    let p = DMatrix::<f64>::identity(n, n) - &u * u.transpose();
    let c = 1e3 * big.max(1.0);
    let restricted = &p * s * &p + c * &u * u.transpose();
    let eig = SymmetricEigen::new(restricted).eigenvalues;
    let tangent = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    (tangent, min_sv)
}

/// Lanczos on inverse operators: `(PAP)⁻¹` on the tangent space and `A⁻¹`.
fn iterative_spectrum(solver: &JacobianSolver, phi: &[f64]) -> Result<(f64, f64)> {
    let w = &solver.weights;
    let nrm = wdot(w, phi, phi).sqrt();
    let u: Vec<f64> = phi.iter().map(|x| x / nrm).collect();
    let project = |x: &mut [f64]| {
        let c = wdot(w, x, &u);
        x.iter_mut().zip(&u).for_each(|(a, b)| *a -= c * b);
    };
    let mut tmp = vec![0.0; phi.len()];
    let restricted = |x: &[f64], out: &mut [f64], tmp: &mut Vec<f64>| {
        tmp.copy_from_slice(x);
        project(tmp);
        solver.apply(tmp, out);
        project(out);
    };
    let mut start: Vec<f64> = (0..phi.len()).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
    project(&mut start);

    let mut failure = None;
    let (_, inv_max) = lanczos_extremes(
        |x, out| {
            let mut b = x.to_vec();
            project(&mut b);
            let mut y = vec![0.0; b.len()];
            match minres_weighted(|v, o| restricted(v, o, &mut tmp), &b, &mut y, w, 1e-10, 20_000) {
                Ok(_) => {}
                Err(e) => failure = Some(e),
            }
            project(&mut y);
            out.copy_from_slice(&y);
        },
        &start,
        w,
        30,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let tangent = 1.0 / inv_max;

    let mut failure = None;
    let start: Vec<f64> = (0..phi.len()).map(|i| 1.0 + 0.1 * ((i * 104729) % 17) as f64).collect();
    let (inv_lo, inv_hi) = lanczos_extremes(
        |x, out| {
            out.iter_mut().for_each(|v| *v = 0.0);
            if let Err(e) = minres_weighted(|v, o| solver.apply(v, o), x, out, w, 1e-10, 20_000) {
                failure = Some(e);
            }
        },
        &start,
        w,
        30,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let min_sv = 1.0 / inv_lo.abs().max(inv_hi.abs());
    Ok((tangent, min_sv))
}
