//! Continuum NLS ground state `−Δψ + mψ = ψ^{2p+1}`, `∫ψ² = 1`, and its
//! restriction to the lattice.

use crate::error::{Error, Result};
use crate::lattice::{GridSpec, Lattice, Offset, SymmetricSequence, Symmetry};
use crate::linalg::Tridiagonal;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::io::Write;

/// Radial grid step of the stored profile, in length units.
pub const PROFILE_STEP: f64 = 0.01;
/// Radial extent of the stored profile.
pub const PROFILE_EXTENT: f64 = 200.0;
const TAIL_LIMIT: f64 = 1e-10;

/// `|s|^{2p} s`, with the `0^{2p} = 0` convention.
#[inline]
pub fn focusing_power(s: f64, p: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else if p == 0.5 {
        s.abs() * s
    } else if p == 1.0 {
        s * s * s
    } else {
        (2.0 * p * s.abs().ln()).exp() * s
    }
}

/// `|s|^q` with `0^q = 0`.
#[inline]
pub fn abs_pow(s: f64, q: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        (q * s.abs().ln()).exp()
    }
}

pub fn check_exponent(dim: usize, p: f64) -> Result<()> {
    if dim != 1 && dim != 2 {
        return Err(Error::InvalidParameter(format!("dimension {dim} not in {{1,2}}")));
    }
    if !(p >= 0.5 && p < 2.0 / dim as f64) {
        return Err(Error::InvalidParameter(format!(
            "p = {p} outside [1/2, {})",
            2.0 / dim as f64
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Sech {
    amplitude: f64,
    rate: f64,
}

/// Radial ground-state profile with its multiplier `m`.
#[derive(Clone, Debug)]
pub struct GroundStateProfile {
    dim: usize,
    p: f64,
    m: f64,
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
    residual: f64,
    normalization: f64,
    closed_form: Option<Sech>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProfileMeta {
    pub n: usize,
    pub p: f64,
    pub m: f64,
    pub residual: f64,
    pub normalization: f64,
    pub step: f64,
    pub points: usize,
}

impl GroundStateProfile {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// Max-norm Euler–Lagrange residual on the radial grid.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// `∫_{ℝⁿ} ψ²`.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn radii(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| i as f64 * self.step)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn extent(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.step
    }

    /// ψ_c at radius `r`; zero past the stored extent.
    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        if let Some(s) = self.closed_form {
            let sech = 1.0 / (s.rate * r).cosh();
            return s.amplitude * sech.powf(1.0 / self.p);
        }
        let x = r / self.step;
        let i = x.floor() as usize;
        if i + 1 >= self.values.len() {
            return 0.0;
        }
        let t = x - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.slopes[i] * self.step, self.slopes[i + 1] * self.step);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * d1
    }

    pub fn meta(&self) -> ProfileMeta {
        ProfileMeta {
            n: self.dim,
            p: self.p,
            m: self.m,
            residual: self.residual,
            normalization: self.normalization,
            step: self.step,
            points: self.values.len(),
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["r", "value"])?;
        for (r, v) in self.radii().zip(&self.values) {
            wtr.write_record([r.to_string(), v.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, &self.meta())?;
        Ok(())
    }

    fn from_grid(
        dim: usize,
        p: f64,
        m: f64,
        step: f64,
        values: Vec<f64>,
        residual: f64,
        closed_form: Option<Sech>,
    ) -> Result<Self> {
        let last = *values.last().unwrap_or(&0.0);
        if last.abs() > TAIL_LIMIT {
            return Err(Error::Guard(format!(
                "ground-state tail {last:.3e} at the last radius exceeds {TAIL_LIMIT:.0e}"
            )));
        }
        let normalization = radial_mass(dim, step, &values);
        let slopes = pchip_slopes(step, &values);
        Ok(Self {
            dim,
            p,
            m,
            step,
            values,
            slopes,
            residual,
            normalization,
            closed_form,
        })
    }
}

/// `∫_{ℝⁿ} f(|x|)²` by the trapezoid rule on a uniform radial grid.
fn radial_mass(dim: usize, h: f64, f: &[f64]) -> f64 {
    let n = f.len();
    let mut s = 0.0;
    for (i, v) in f.iter().enumerate() {
        let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
        let r = i as f64 * h;
        s += w * v * v * if dim == 1 { 1.0 } else { r };
    }
    s * h * if dim == 1 { 2.0 } else { 2.0 * std::f64::consts::PI }
}

/// Monotone cubic (Fritsch–Butland) slopes; zero slope at r = 0 and at the end.
fn pchip_slopes(h: f64, y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut d = vec![0.0; n];
    for i in 1..n.saturating_sub(1) {
        let a = (y[i] - y[i - 1]) / h;
        let b = (y[i + 1] - y[i]) / h;
        if a * b > 0.0 {
            d[i] = 2.0 * a * b / (a + b);
        }
    }
    d
}

/// Ground state of the radial problem for `n ∈ {1, 2}`, `½ ≤ p < 2/n`.
///
/// In 1D the profile is the closed-form sech family; in 2D it is the
/// Petviashvili fixed point on a radial finite-difference grid.
pub fn solve_ground_state(dim: usize, p: f64, tol: f64) -> Result<GroundStateProfile> {
    check_exponent(dim, p)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    match dim {
        1 => sech_ground_state(p, tol),
        _ => petviashvili_ground_state(dim, p, tol),
    }
}

/// 1D: ψ = A sech^{1/p}(p√m x) with A = ((p+1)m)^{1/(2p)}.
fn sech_ground_state(p: f64, tol: f64) -> Result<GroundStateProfile> {
    // ∫ sech^{2/p} = √π Γ(1/p) / Γ(1/p + 1/2)
    let integral = std::f64::consts::PI.sqrt() * gamma(1.0 / p) / gamma(1.0 / p + 0.5);
    let m = (p / (integral * (p + 1.0).powf(1.0 / p))).powf(1.0 / (1.0 / p - 0.5));
    let shape = Sech {
        amplitude: ((p + 1.0) * m).powf(0.5 / p),
        rate: p * m.sqrt(),
    };
    // sech^{1/p}(ηx) ≤ (2e^{−ηx})^{1/p}: extend the grid until the tail is negligible.
    let tail_radius = (2.0 * shape.amplitude.powf(p) / (0.1 * TAIL_LIMIT).powf(p)).ln() / shape.rate;
    let extent = PROFILE_EXTENT.max(tail_radius);
    let n = (extent / PROFILE_STEP).ceil() as usize + 1;
    let mut values = Vec::with_capacity(n);
    let mut residual: f64 = 0.0;
    for i in 0..n {
        let x = i as f64 * PROFILE_STEP;
        let s = 1.0 / (shape.rate * x).cosh();
        let th = (shape.rate * x).tanh();
        let psi = shape.amplitude * s.powf(1.0 / p);
        let psi_xx = psi * shape.rate * shape.rate / p * (th * th / p - s * s);
        let r = -psi_xx + m * psi - focusing_power(psi, p);
        residual = residual.max(r.abs());
        values.push(psi);
    }
    if residual > tol {
        return Err(Error::NoConvergence {
            stage: "ground state",
            iterations: 0,
            residual,
        });
    }
    GroundStateProfile::from_grid(1, p, m, PROFILE_STEP, values, residual, Some(shape))
}

/// Radial finite-difference Laplacian on `r_i = i h`, Dirichlet past the end.
fn radial_laplacian(dim: usize, h: f64, len: usize) -> Tridiagonal {
    let h2 = h * h;
    let mut lower = vec![0.0; len];
    let mut diag = vec![0.0; len];
    let mut upper = vec![0.0; len];
    diag[0] = -2.0 * dim as f64 / h2;
    upper[0] = 2.0 * dim as f64 / h2;
    for i in 1..len {
        let c = (dim as f64 - 1.0) / (2.0 * h * i as f64 * h);
        lower[i] = 1.0 / h2 - c;
        diag[i] = -2.0 / h2;
        if i + 1 < len {
            upper[i] = 1.0 / h2 + c;
        }
    }
    Tridiagonal { lower, diag, upper }
}

/// `max |−Δ_h f + m f − f^{2p+1}|`.
fn radial_residual(lap: &Tridiagonal, f: &[f64], m: f64, p: f64) -> f64 {
    let mut lf = vec![0.0; f.len()];
    lap.apply(f, &mut lf);
    f.iter()
        .zip(&lf)
        .map(|(v, l)| (-l + m * v - focusing_power(*v, p)).abs())
        .fold(0.0, f64::max)
}

/// Solves `−Δ_h Q + Q = Q^{2p+1}` by Petviashvili iteration.
fn petviashvili(dim: usize, p: f64, h: f64, len: usize, tol: f64) -> Result<(Vec<f64>, f64)> {
    let lap = radial_laplacian(dim, h, len);
    let mut op = lap.clone();
    for i in 0..len {
        op.lower[i] = -op.lower[i];
        op.diag[i] = 1.0 - op.diag[i];
        op.upper[i] = -op.upper[i];
    }
    let lu = op.factor()?;
    let weights: Vec<f64> = (0..len)
        .map(|i| if dim == 1 || i == 0 { h } else { i as f64 * h * h })
        .collect();
    let gamma_exp = (2.0 * p + 1.0) / (2.0 * p);
    let mut q: Vec<f64> = (0..len)
        .map(|i| {
            let r = i as f64 * h;
            2.0 * (-r * r / 2.0).exp()
        })
        .collect();
    let mut lq = vec![0.0; len];
    let max_iter = 2000;
    for _ in 0..max_iter {
        let nq: Vec<f64> = q.iter().map(|v| focusing_power(*v, p)).collect();
        op.apply(&q, &mut lq);
        let num: f64 = weights.iter().zip(&lq).zip(&q).map(|((w, a), b)| w * a * b).sum();
        let den: f64 = weights.iter().zip(&nq).zip(&q).map(|((w, a), b)| w * a * b).sum();
        let factor = (num / den).powf(gamma_exp);
        let mut next = nq;
        lu.solve_in_place(&mut next);
        let scale = next.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut change: f64 = 0.0;
        for (qi, ni) in q.iter_mut().zip(&next) {
            let v = factor * ni;
            change = change.max((v - *qi).abs());
            *qi = v;
        }
        if change <= 1e-15 * scale * factor.max(1.0) * 10.0 {
            break;
        }
    }
    let residual = radial_residual(&lap, &q, 1.0, p);
    if !(residual <= tol) {
        return Err(Error::NoConvergence {
            stage: "ground state",
            iterations: max_iter,
            residual,
        });
    }
    Ok((q, residual))
}

fn petviashvili_ground_state(dim: usize, p: f64, tol: f64) -> Result<GroundStateProfile> {
    let exponent = 1.0 / (1.0 / p - dim as f64 / 2.0);
    // First pass fixes m; the second samples Q so that ψ lands on the target grid.
    let coarse_len = (40.0 / PROFILE_STEP) as usize + 1;
    let (q, _) = petviashvili(dim, p, PROFILE_STEP, coarse_len, tol)?;
    let m1 = radial_mass(dim, PROFILE_STEP, &q).powf(-exponent);

    let hq = PROFILE_STEP * m1.sqrt();
    let len = (PROFILE_EXTENT / PROFILE_STEP).round() as usize + 1;
    let (q, _) = petviashvili(dim, p, hq, len, tol)?;
    let m = radial_mass(dim, hq, &q).powf(-exponent);

    let amp = m.powf(0.5 / p);
    let step = hq / m.sqrt();
    let values: Vec<f64> = q.iter().map(|v| amp * v).collect();
    let residual = radial_residual(&radial_laplacian(dim, step, len), &values, m, p);
    if !(residual <= tol) {
        return Err(Error::NoConvergence {
            stage: "ground state",
            iterations: 0,
            residual,
        });
    }
    GroundStateProfile::from_grid(dim, p, m, step, values, residual, None)
}

/// One of the `2ⁿ` reference modes: per-axis centring at a site or a bond.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeSpec {
    dim: usize,
    index: usize,
}

impl ModeSpec {
    /// `index ∈ 1..=2ⁿ`: 1D 1 = ST, 2 = P; 2D 1 = ST, 2 = H1 (0, ½),
    /// 3 = H2 (½, 0), 4 = P (½, ½).
    pub fn new(dim: usize, index: usize) -> Result<Self> {
        if !(dim == 1 || dim == 2) || index == 0 || index > 1 << dim {
            return Err(Error::InvalidParameter(format!("no mode {index} in dimension {dim}")));
        }
        Ok(Self { dim, index })
    }

    pub fn parse(dim: usize, name: &str) -> Result<Self> {
        let index = match (dim, name.to_ascii_lowercase().as_str()) {
            (_, "st") => 1,
            (1, "p") => 2,
            (2, "h1") => 2,
            (2, "h2") => 3,
            (2, "p") => 4,
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "unknown mode {name:?} in dimension {dim}"
                )))
            }
        };
        Self::new(dim, index)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn name(&self) -> &'static str {
        match (self.dim, self.index) {
            (_, 1) => "st",
            (1, _) => "p",
            (_, 2) => "h1",
            (_, 3) => "h2",
            _ => "p",
        }
    }

    pub fn offsets(&self) -> Vec<Offset> {
        let bits = self.index - 1;
        (0..self.dim)
            .map(|axis| {
                // The last axis carries the low bit.
                if bits >> (self.dim - 1 - axis) & 1 == 1 {
                    Offset::Bond
                } else {
                    Offset::Site
                }
            })
            .collect()
    }

    pub fn symmetry(&self) -> Symmetry {
        Symmetry::new(&self.offsets()).expect("mode offsets match the dimension")
    }
}

/// Samples `ψ_c(|μ(j + offset)| / ℓ)` on the lattice of the given mode.
pub fn sample_reference(
    gs: &GroundStateProfile,
    grid: GridSpec,
    mode: ModeSpec,
    length_scale: f64,
) -> Result<SymmetricSequence> {
    if grid.dim() != gs.dim() || mode.dim() != gs.dim() {
        return Err(Error::GridMismatch(format!(
            "profile dimension {} vs grid {} / mode {}",
            gs.dim(),
            grid.dim(),
            mode.dim()
        )));
    }
    if !(length_scale > 0.0) {
        return Err(Error::InvalidParameter("length scale must be positive".into()));
    }
    let lattice = Lattice::new(grid, mode.symmetry())?;
    SymmetricSequence::from_positions(lattice, |x| {
        gs.eval(x[0].hypot(x[1]) / length_scale)
    })
}

/// `ω(μ) = √(1 − mμ²)`.
pub fn omega(mu: f64, m: f64) -> Result<f64> {
    let lambda = m * mu * mu;
    if !(lambda < 1.0) || !(mu > 0.0) {
        return Err(Error::InvalidParameter(format!("m μ² = {lambda} must lie in [0, 1)")));
    }
    Ok((1.0 - lambda).sqrt())
}

/// `Ψ(t) = μ^{1/p} cos(ωt) ψ`.
pub fn reference_solution(
    psi: &SymmetricSequence,
    mu: f64,
    p: f64,
    m: f64,
    t: f64,
) -> Result<SymmetricSequence> {
    let w = omega(mu, m)?;
    Ok(psi.scaled(mu.powf(1.0 / p) * (w * t).cos()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_1d_ground_state_matches_hand_algebra() {
        let gs = solve_ground_state(1, 1.0, 1e-8).unwrap();
        assert!((gs.m() - 1.0 / 16.0).abs() < 1e-14);
        assert!((gs.eval(0.0) - 2f64.sqrt() / 4.0).abs() < 1e-15);
        let x: f64 = 3.7;
        let exact = 2f64.sqrt() / 4.0 / (x / 4.0).cosh();
        assert!((gs.eval(x) - exact).abs() < 1e-15);
        assert!((gs.normalization() - 1.0).abs() < 1e-8);
        assert!(gs.residual() < 1e-12);
    }

    #[test]
    fn closed_form_is_normalized_for_fractional_p() {
        for p in [0.5, 0.75, 1.5] {
            let gs = solve_ground_state(1, p, 1e-8).unwrap();
            assert!((gs.normalization() - 1.0).abs() < 1e-8, "p={p}: {}", gs.normalization());
            assert!(gs.residual() < 1e-10);
        }
    }

    #[test]
    fn petviashvili_reproduces_the_sech_family() {
        // The generic radial solver run in 1D must land on the closed form.
        let (q, res) = petviashvili(1, 1.0, 0.01, 4001, 1e-8).unwrap();
        assert!(res < 1e-8);
        let m = radial_mass(1, 0.01, &q).powf(-2.0);
        assert!((m - 1.0 / 16.0).abs() < 1e-5, "m = {m}");
        assert!((q[0] - 2f64.sqrt()).abs() < 1e-4);
    }

    #[test]
    fn two_dimensional_profile_is_monotone_and_normalized() {
        let gs = solve_ground_state(2, 0.5, 1e-8).unwrap();
        assert!(gs.residual() < 1e-8);
        assert!((gs.normalization() - 1.0).abs() < 1e-8);
        assert!(gs.values().windows(2).all(|w| w[1] <= w[0] + 1e-15));
        assert!(gs.values().iter().all(|v| *v >= 0.0));
        assert!((gs.step - PROFILE_STEP).abs() < 1e-3);
    }

    /// Radial shooting for `Q'' + (n−1)/r Q' − Q + Q^{2p+1} = 0` with bisection on Q(0).
    fn shoot_q0(dim: usize, p: f64) -> f64 {
        let rhs = |r: f64, y: [f64; 2]| {
            let damp = if r > 0.0 { (dim as f64 - 1.0) / r * y[1] } else { 0.0 };
            [y[1], -damp + y[0] - focusing_power(y[0], p)]
        };
        // +1: overshoots through zero; −1: turns back up.
        let classify = |q0: f64| -> i32 {
            let h = 1e-3;
            let eps = 1e-4;
            let q2 = (q0 - focusing_power(q0, p)) / dim as f64;
            let mut r = eps;
            let mut y = [q0 + 0.5 * q2 * eps * eps, q2 * eps];
            while r < 30.0 {
                let k1 = rhs(r, y);
                let k2 = rhs(r + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]]);
                let k3 = rhs(r + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]]);
                let k4 = rhs(r + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
                for c in 0..2 {
                    y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
                }
                r += h;
                if y[0] < 0.0 {
                    return 1;
                }
                if y[1] > 0.0 {
                    return -1;
                }
            }
            0
        };
        let (mut lo, mut hi) = (1.0001f64, 10.0f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            match classify(mid) {
                1 => hi = mid,
                -1 => lo = mid,
                _ => return mid,
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn shooting_agrees_with_petviashvili_in_2d() {
        let gs = solve_ground_state(2, 0.5, 1e-8).unwrap();
        let q0_shoot = shoot_q0(2, 0.5);
        // ψ(0) = m^{1/(2p)} Q(0)
        let q0_fd = gs.eval(0.0) / gs.m();
        assert!(
            (q0_shoot - q0_fd).abs() < 1e-3 * q0_shoot,
            "shooting {q0_shoot} vs fixed point {q0_fd}"
        );
    }

    #[test]
    fn pchip_is_exact_on_grid_points() {
        let gs = solve_ground_state(2, 0.5, 1e-8).unwrap();
        for i in [0, 7, 150, 1234] {
            let r = i as f64 * gs.step;
            assert_eq!(gs.eval(r), gs.values()[i]);
        }
        assert_eq!(gs.eval(gs.extent() + 1.0), 0.0);
    }

    #[test]
    fn exponent_range_is_enforced() {
        assert!(solve_ground_state(1, 0.4, 1e-8).is_err());
        assert!(solve_ground_state(2, 1.0, 1e-8).is_err());
        assert!(solve_ground_state(3, 0.5, 1e-8).is_err());
    }

    #[test]
    fn mode_offsets() {
        let names: Vec<_> = (1..=4)
            .map(|i| ModeSpec::new(2, i).unwrap().offsets())
            .collect();
        assert_eq!(names[0], vec![Offset::Site, Offset::Site]);
        assert_eq!(names[1], vec![Offset::Site, Offset::Bond]);
        assert_eq!(names[2], vec![Offset::Bond, Offset::Site]);
        assert_eq!(names[3], vec![Offset::Bond, Offset::Bond]);
        assert_eq!(ModeSpec::parse(1, "P").unwrap().offsets(), vec![Offset::Bond]);
        assert!(ModeSpec::parse(1, "h1").is_err());
        assert!(ModeSpec::new(1, 3).is_err());
    }

    #[test]
    fn sampled_modes() {
        let gs = solve_ground_state(1, 1.0, 1e-8).unwrap();
        let grid = GridSpec::new(1, 800, 0.1).unwrap();
        let st = sample_reference(&gs, grid, ModeSpec::new(1, 1).unwrap(), 1.0).unwrap();
        assert!((st.get(&[0]) - 2f64.sqrt() / 4.0).abs() < 1e-15);
        let pm = sample_reference(&gs, grid, ModeSpec::new(1, 2).unwrap(), 1.0).unwrap();
        for j in -800..=799 {
            assert_eq!(pm.get(&[j]), pm.get(&[-1 - j]));
        }
        assert!(pm.get(&[800]).abs() < 1e-8);
        assert!(st.get(&[800]).abs() < 1e-8);
    }

    #[test]
    fn frequency_law() {
        let w = omega(0.1, 1.0 / 16.0).unwrap();
        assert!((w - 0.999_687_45).abs() < 5e-9);
        assert!(omega(5.0, 1.0 / 16.0).is_err());
    }

    #[test]
    fn reference_solution_at_special_times() {
        let gs = solve_ground_state(1, 1.0, 1e-8).unwrap();
        let grid = GridSpec::new(1, 800, 0.1).unwrap();
        let psi = sample_reference(&gs, grid, ModeSpec::new(1, 1).unwrap(), 1.0).unwrap();
        let m = gs.m();
        let at0 = reference_solution(&psi, 0.1, 1.0, m, 0.0).unwrap();
        assert_eq!(at0, psi.scaled(0.1));
        let w = omega(0.1, m).unwrap();
        let quarter = reference_solution(&psi, 0.1, 1.0, m, std::f64::consts::PI / (2.0 * w)).unwrap();
        assert!(quarter.sup_norm() < 1e-16);
    }
}
