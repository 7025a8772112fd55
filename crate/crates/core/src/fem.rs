//! Piecewise-linear interpolation of lattice fields: hat functions in 1D,
//! and in 2D triangles `T⁺_{h,k} = {(h,k), (h+1,k), (h,k+1)}` and
//! `T⁻_{h,k} = {(h,k), (h−1,k), (h,k−1)}`, so every node carries a
//! hexagonal pyramid.

use crate::continuum::{abs_pow, sample_reference, solve_ground_state, ModeSpec};
use crate::error::{Error, Result};
use crate::fit::{fit_loglog, SlopeFit};
use crate::lattice::{GridSpec, SymmetricSequence};
use crate::quadrature::{integrate_triangle, GaussRule};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

const ELEMENT_TOL: f64 = 1e-10;

/// `Υ(x) = Σ_j ψ_j s_j(x/μ)` with nodes at the lattice positions.
#[derive(Clone, Debug)]
pub struct FemInterpolant {
    seq: SymmetricSequence,
    /// Full-box values padded by one zero layer on every side.
    padded: Vec<f64>,
    lo: i64,
    width: usize,
    shift: [f64; 2],
}

impl FemInterpolant {
    pub fn new(seq: SymmetricSequence) -> Self {
        let lat = *seq.lattice();
        let dim = lat.dim();
        let lo = (0..dim).map(|a| *lat.axis_range(a).start()).min().unwrap_or(0) - 1;
        let hi = lat.grid().k() as i64 + 1;
        let width = (hi - lo + 1) as usize;
        let mut padded = vec![0.0; width.pow(dim as u32)];
        match dim {
            1 => {
                for j in lat.axis_range(0) {
                    padded[(j - lo) as usize] = seq.get(&[j]);
                }
            }
            _ => {
                for j1 in lat.axis_range(0) {
                    for j2 in lat.axis_range(1) {
                        padded[(j1 - lo) as usize * width + (j2 - lo) as usize] = seq.get(&[j1, j2]);
                    }
                }
            }
        }
        let mut shift = [0.0; 2];
        for (a, s) in shift.iter_mut().enumerate().take(dim) {
            *s = lat.symmetry().offset(a).shift();
        }
        Self {
            seq,
            padded,
            lo,
            width,
            shift,
        }
    }

    pub fn sequence(&self) -> &SymmetricSequence {
        &self.seq
    }

    fn mu(&self) -> f64 {
        self.seq.grid().mu()
    }

    fn dim(&self) -> usize {
        self.seq.grid().dim()
    }

    /// Node value with zero outside the padded box.
    fn node(&self, j: &[i64]) -> f64 {
        let idx = |x: i64| {
            let i = x - self.lo;
            (i >= 0 && (i as usize) < self.width).then_some(i as usize)
        };
        match j.len() {
            1 => idx(j[0]).map_or(0.0, |i| self.padded[i]),
            _ => match (idx(j[0]), idx(j[1])) {
                (Some(a), Some(b)) => self.padded[a * self.width + b],
                _ => 0.0,
            },
        }
    }

    /// Element range `lo..hi` covering the support on each axis.
    fn element_range(&self) -> std::ops::Range<i64> {
        self.lo..self.lo + self.width as i64 - 1
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mu = self.mu();
        match self.dim() {
            1 => {
                let xi = x[0] / mu - self.shift[0];
                let j = xi.floor();
                let t = xi - j;
                let j = j as i64;
                (1.0 - t) * self.node(&[j]) + t * self.node(&[j + 1])
            }
            _ => {
                let xi = [x[0] / mu - self.shift[0], x[1] / mu - self.shift[1]];
                let (h, k) = (xi[0].floor(), xi[1].floor());
                let (s, t) = (xi[0] - h, xi[1] - k);
                let (h, k) = (h as i64, k as i64);
                if s + t <= 1.0 {
                    let c = self.node(&[h, k]);
                    c + s * (self.node(&[h + 1, k]) - c) + t * (self.node(&[h, k + 1]) - c)
                } else {
                    // T⁻ of the opposite corner (h+1, k+1).
                    let c = self.node(&[h + 1, k + 1]);
                    c + (1.0 - s) * (self.node(&[h, k + 1]) - c) + (1.0 - t) * (self.node(&[h + 1, k]) - c)
                }
            }
        }
    }

    /// `∫|∇Υ|²`, exact element by element.
    pub fn grad_energy(&self) -> f64 {
        let mu = self.mu();
        let range = self.element_range();
        match self.dim() {
            1 => {
                let mut s = 0.0;
                for j in range {
                    let d = self.node(&[j + 1]) - self.node(&[j]);
                    s += d * d;
                }
                s / mu
            }
            _ => {
                // Each triangle has area μ²/2 and gradient (Δ₁, Δ₂)/μ.
                let mut s = 0.0;
                for h in range.clone() {
                    for k in range.clone() {
                        let c = self.node(&[h, k]);
                        let r = self.node(&[h + 1, k]);
                        let u = self.node(&[h, k + 1]);
                        let d = self.node(&[h + 1, k + 1]);
                        s += (r - c).powi(2) + (u - c).powi(2) + (d - u).powi(2) + (d - r).powi(2);
                    }
                }
                0.5 * s
            }
        }
    }

    /// `(G_c, G_d, R_G)` with `G_c = ∫|Υ|^{q+2}`, `G_d = μⁿ Σ|ψ_j|^{q+2}`.
    pub fn functional_remainder(&self, q: f64) -> Result<(f64, f64, f64)> {
        if !(q >= 1.0) {
            return Err(Error::InvalidParameter(format!("q = {q} must be at least 1")));
        }
        let e = q + 2.0;
        let mu = self.mu();
        let range = self.element_range();
        let gc = match self.dim() {
            1 => {
                let rule = GaussRule::new(8);
                let mut s = 0.0;
                for j in range {
                    let (a, b) = (self.node(&[j]), self.node(&[j + 1]));
                    if a == 0.0 && b == 0.0 {
                        continue;
                    }
                    let f = |t: f64| abs_pow(a + t * (b - a), e);
                    s += if a * b < 0.0 {
                        let root = a / (a - b);
                        rule.integrate_adaptive(&f, 0.0, root, ELEMENT_TOL)
                            + rule.integrate_adaptive(&f, root, 1.0, ELEMENT_TOL)
                    } else {
                        rule.integrate_adaptive(&f, 0.0, 1.0, ELEMENT_TOL)
                    };
                }
                s * mu
            }
            _ => {
                let polynomial = e.fract() == 0.0 && e <= 5.0;
                let mut s = 0.0;
                let mut tri = |v: [f64; 3]| {
                    if v.iter().all(|x| *x == 0.0) {
                        return;
                    }
                    let same_sign = v.iter().all(|x| *x >= 0.0) || v.iter().all(|x| *x <= 0.0);
                    // Reference triangle (0,0), (1,0), (0,1); area ½.
                    let f = |x: [f64; 2]| abs_pow(v[0] + x[0] * (v[1] - v[0]) + x[1] * (v[2] - v[0]), e);
                    let depth = if polynomial && same_sign { 0 } else { 8 };
                    s += integrate_triangle(&f, [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], ELEMENT_TOL, depth);
                };
                for h in range.clone() {
                    for k in range.clone() {
                        let c = self.node(&[h, k]);
                        let r = self.node(&[h + 1, k]);
                        let u = self.node(&[h, k + 1]);
                        let d = self.node(&[h + 1, k + 1]);
                        tri([c, r, u]);
                        tri([d, u, r]);
                    }
                }
                s * mu * mu
            }
        };
        let gd = mu.powi(self.dim() as i32) * self.seq.power_sum(e);
        Ok((gc, gd, gc - gd))
    }

    /// Samples `Υ` on a regular grid with `per_cell` points per lattice cell,
    /// over the support.
    pub fn write_sampled_csv<W: Write>(&self, per_cell: usize, w: W) -> Result<()> {
        let per_cell = per_cell.max(1);
        let mu = self.mu();
        let mut wtr = csv::Writer::from_writer(w);
        let range = self.element_range();
        let n = (range.end - range.start) as usize * per_cell;
        let coord = |axis: usize, i: usize| mu * (range.start as f64 + self.shift[axis] + i as f64 / per_cell as f64);
        match self.dim() {
            1 => {
                wtr.write_record(["x", "value"])?;
                for i in 0..=n {
                    let x = coord(0, i);
                    wtr.write_record([x.to_string(), self.eval(&[x]).to_string()])?;
                }
            }
            _ => {
                wtr.write_record(["x1", "x2", "value"])?;
                for i in 0..=n {
                    for k in 0..=n {
                        let x = [coord(0, i), coord(1, k)];
                        wtr.write_record([x[0].to_string(), x[1].to_string(), self.eval(&x).to_string()])?;
                    }
                }
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

/// `μⁿ Σ|v_j|^q / ‖v‖_{Q_μ}^q`.
pub fn power_ratio(v: &SymmetricSequence, q: f64) -> f64 {
    let mu_n = v.grid().mu().powi(v.grid().dim() as i32);
    let qn = v.norm_q_mu();
    if qn == 0.0 {
        return 0.0;
    }
    mu_n * v.power_sum(q) / qn.powf(q)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FemRecord {
    pub mu: f64,
    pub grad_energy: f64,
    pub dirichlet_side: f64,
    pub identity_error: f64,
    pub g_c: f64,
    pub g_d: f64,
    pub r_g: f64,
    pub power_ratio: f64,
}

/// Identity and remainder figures for one sequence with exponent `q`.
pub fn fem_record(seq: &SymmetricSequence, q: f64) -> Result<FemRecord> {
    let interp = FemInterpolant::new(seq.clone());
    let mu = seq.grid().mu();
    let n = seq.grid().dim() as i32;
    let grad_energy = interp.grad_energy();
    let dirichlet_side = mu.powi(n - 2) * seq.dirichlet_form();
    let (g_c, g_d, r_g) = interp.functional_remainder(q)?;
    Ok(FemRecord {
        mu,
        grad_energy,
        dirichlet_side,
        identity_error: (grad_energy - dirichlet_side).abs() / dirichlet_side.abs().max(f64::MIN_POSITIVE),
        g_c,
        g_d,
        r_g,
        power_ratio: power_ratio(seq, q + 2.0),
    })
}

/// Remainder sweep over sampled ground states `ψ_c(|μj|)` with exponent `q = 2p`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FemSweep {
    pub n: usize,
    pub p: f64,
    pub records: Vec<FemRecord>,
    /// Log-log fit of `|R_G|` against μ.
    pub slope: Option<SlopeFit>,
}

pub fn fem_sweep(n: usize, p: f64, mu_list: &[f64], decay_budget: f64) -> Result<FemSweep> {
    let gs = solve_ground_state(n, p, 1e-8)?;
    let mode = ModeSpec::new(n, 1)?;
    let records = mu_list
        .par_iter()
        .map(|&mu| {
            let grid = GridSpec::covering(n, mu, decay_budget)?;
            let psi = sample_reference(&gs, grid, mode, 1.0)?;
            fem_record(&psi, 2.0 * p)
        })
        .collect::<Result<Vec<_>>>()?;
    let slope = if records.len() >= 3 {
        let mus: Vec<f64> = records.iter().map(|r| r.mu).collect();
        let rg: Vec<f64> = records.iter().map(|r| r.r_g.abs()).collect();
        fit_loglog(&mus, &rg).ok()
    } else {
        None
    };
    Ok(FemSweep { n, p, records, slope })
}
