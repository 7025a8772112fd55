//! Range equation `w = L⁻¹ Π_W N(v e₁ + w)` with
//! `L = ω²∂_tt + 1 − aΔ`, i.e. `(1 − ω²l²) − aΔ` on harmonic `l`.

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::linalg::{cg_weighted, Tridiagonal, TridiagonalLu};
use crate::spectral::{project_w, Collocation, HarmonicSet, KernelField, Nonlinearity, TimeFourierField};
use serde::{Deserialize, Serialize};

/// Symbols closer to zero than this are treated as resonant.
pub const RESONANCE_MARGIN: f64 = 1e-8;
/// Picard iterations stop contracting above this rate.
pub const CONTRACTION_GUARD: f64 = 0.9;
const KRYLOV_TOL: f64 = 1e-13;

#[derive(Clone, Debug)]
enum Solver {
    Direct(TridiagonalLu),
    /// CG on `sign · A_l`, which is positive definite.
    Krylov { sign: f64 },
}

/// The per-harmonic operators `(1 − ω²l²) I − aΔ` for `l ≠ 1`.
#[derive(Clone, Debug)]
pub struct RangeOperator {
    lattice: Lattice,
    omega: f64,
    a: f64,
    l_max: usize,
    set: HarmonicSet,
    solvers: Vec<(usize, Solver)>,
    neumann_bound: f64,
    symbol_margin: f64,
}

impl RangeOperator {
    pub fn new(lattice: Lattice, omega: f64, a: f64, l_max: usize, set: HarmonicSet) -> Result<Self> {
        if !(a > 0.0 && a < 0.5) {
            return Err(Error::InvalidParameter(format!("coupling a = {a} outside (0, 1/2)")));
        }
        if !((omega * omega - 1.0).abs() < 0.5) || !(omega > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "frequency ω = {omega} violates |ω² − 1| < 1/2"
            )));
        }
        let spread = 4.0 * lattice.dim() as f64 * a;
        let mut solvers = Vec::new();
        let mut neumann_bound: f64 = 0.0;
        let mut symbol_margin = f64::INFINITY;
        for l in set.harmonics(l_max) {
            if l == 1 {
                continue;
            }
            let c = 1.0 - omega * omega * (l * l) as f64;
            // The symbol c + a s, s ∈ [0, 4n], is affine in s.
            let (lo, hi) = (c, c + spread);
            let margin = if lo * hi <= 0.0 { 0.0 } else { lo.abs().min(hi.abs()) };
            if margin < RESONANCE_MARGIN {
                return Err(Error::Resonance { harmonic: l, margin });
            }
            symbol_margin = symbol_margin.min(margin);
            neumann_bound = neumann_bound.max(spread / c.abs());
            let solver = if lattice.dim() == 1 {
                let (dl, d, du) = lattice.laplacian_tridiagonal();
                Solver::Direct(
                    Tridiagonal {
                        lower: dl.iter().map(|x| -a * x).collect(),
                        diag: d.iter().map(|x| c - a * x).collect(),
                        upper: du.iter().map(|x| -a * x).collect(),
                    }
                    .factor()?,
                )
            } else {
                Solver::Krylov { sign: c.signum() }
            };
            solvers.push((l, solver));
        }
        Ok(Self {
            lattice,
            omega,
            a,
            l_max,
            set,
            solvers,
            neumann_bound,
            symbol_margin,
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn set(&self) -> HarmonicSet {
        self.set
    }

    /// `max_l a‖Δ‖ / |1 − ω²l²|` with `‖Δ‖ ≤ 4n`; below 1 the Neumann series converges.
    pub fn neumann_bound(&self) -> f64 {
        self.neumann_bound
    }

    /// Smallest distance of any symbol from zero.
    pub fn symbol_margin(&self) -> f64 {
        self.symbol_margin
    }

    fn symbol_shift(&self, l: usize) -> f64 {
        1.0 - self.omega * self.omega * (l * l) as f64
    }

    /// `out = ((1 − ω²l²) − aΔ) x`.
    pub fn apply_harmonic(&self, l: usize, x: &[f64], out: &mut [f64]) {
        let c = self.symbol_shift(l);
        self.lattice.laplacian_into(x, out);
        for (o, v) in out.iter_mut().zip(x) {
            *o = c * v - self.a * *o;
        }
    }

    /// Solves `L h = g` harmonic by harmonic; `g` must have no harmonic-1 part.
    pub fn invert(&self, g: &TimeFourierField) -> Result<TimeFourierField> {
        if g.lattice() != &self.lattice || g.l_max() != self.l_max || g.set() != self.set {
            return Err(Error::GridMismatch("range operator built for another layout".into()));
        }
        if g.harmonic(1).is_some_and(|c| c.iter().any(|x| *x != 0.0)) {
            return Err(Error::InvalidParameter(
                "right-hand side has a kernel (harmonic 1) component".into(),
            ));
        }
        let mut h = TimeFourierField::zeros(self.lattice, self.l_max, self.set)?;
        let weights = self.lattice.weights();
        for (l, solver) in &self.solvers {
            let rhs = g.harmonic(*l).expect("solver harmonics are stored");
            let out = h.harmonic_mut(*l).expect("solver harmonics are stored");
            match solver {
                Solver::Direct(lu) => {
                    out.copy_from_slice(rhs);
                    lu.solve_in_place(out);
                }
                Solver::Krylov { sign } => {
                    let b: Vec<f64> = rhs.iter().map(|x| sign * x).collect();
                    let mut x = vec![0.0; b.len()];
                    cg_weighted(
                        |v, o| {
                            self.apply_harmonic(*l, v, o);
                            o.iter_mut().for_each(|y| *y *= sign);
                        },
                        &b,
                        &mut x,
                        &weights,
                        KRYLOV_TOL,
                        10_000,
                    )?;
                    out.copy_from_slice(&x);
                }
            }
        }
        Ok(h)
    }
}

/// `w₀(v) = L⁻¹ Π_W N(v e₁)`.
pub fn w0(v: &KernelField, op: &RangeOperator, nl: &Nonlinearity, col: &Collocation) -> Result<TimeFourierField> {
    let u = TimeFourierField::embed(v, op.l_max, op.set)?;
    op.invert(&project_w(&col.apply_n(&u, nl)?))
}

#[derive(Clone, Debug)]
pub struct RangeOptions {
    /// Absolute tolerance on successive iterates in X₂.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for RangeOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 200,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct RangeReport {
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub contraction_estimate: f64,
    pub norm_w_x2: f64,
    pub norm_nv_x0: f64,
    /// `‖w‖_{X₂} / ‖N(v e₁)‖_{X₀}`.
    pub ratio: f64,
    pub neumann_bound: f64,
    pub symbol_margin: f64,
    pub tail_ratio: f64,
}

/// Picard iteration for the range equation, optionally warm-started.
pub fn solve_range(
    v: &KernelField,
    op: &RangeOperator,
    nl: &Nonlinearity,
    col: &Collocation,
    opts: &RangeOptions,
    warm: Option<&TimeFourierField>,
) -> Result<(TimeFourierField, RangeReport)> {
    let base = TimeFourierField::embed(v, op.l_max, op.set)?;
    let mut w = match warm {
        Some(w) => project_w(w),
        None => TimeFourierField::zeros(op.lattice, op.l_max, op.set)?,
    };
    let norm_nv = col.apply_n(&base, nl)?.norm_x0();
    let mut history: Vec<f64> = Vec::new();
    let mut rate: f64 = 0.0;
    for it in 1..=opts.max_iter {
        let next = op.invert(&project_w(&col.apply_n(&base.add(&w)?, nl)?))?;
        let diff = next.sub(&w)?.norm_x2();
        w = next;
        let size = w.norm_x2();
        let floor = 64.0 * f64::EPSILON * size;
        if let Some(prev) = history.last() {
            if *prev > 0.0 && diff > 1e3 * floor {
                rate = diff / prev;
                if it > 2 && rate > CONTRACTION_GUARD {
                    return Err(Error::Divergence { stage: "range equation", rate });
                }
            }
        }
        history.push(diff);
        if diff < opts.tol || diff <= floor {
            let report = RangeReport {
                iterations: it,
                residual_history: history,
                contraction_estimate: rate,
                norm_w_x2: size,
                norm_nv_x0: norm_nv,
                ratio: if norm_nv > 0.0 { size / norm_nv } else { 0.0 },
                neumann_bound: op.neumann_bound,
                symbol_margin: op.symbol_margin,
                tail_ratio: w.tail_ratio(),
            };
            return Ok((w, report));
        }
    }
    Err(Error::NoConvergence {
        stage: "range equation",
        iterations: opts.max_iter,
        residual: *history.last().unwrap_or(&f64::NAN),
    })
}
