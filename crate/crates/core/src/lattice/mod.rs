//! Truncated lattice fields with a reflection symmetry.
//!
//! A field lives on the index box `[-K, K]^n` (shifted to `[-K-1, K]` on axes
//! whose symmetry centre sits on a bond) and is zero outside it. Every field is
//! symmetric under the reflection of each axis about its centre, so only the
//! fundamental domain `{0..=K}^n` is stored. Full-box values are recovered by
//! mapping an index to its orbit representative, which makes the symmetry exact
//! by construction.
//!
//! Inner products and norms are those of the full box: a representative carries
//! the size of its orbit as a weight.

pub(crate) mod io;

pub use io::{read_binary, read_csv, write_binary, write_csv};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Default decay budget `K·μ ≥ R_min`, in continuum length units.
pub const DEFAULT_DECAY_BUDGET: f64 = 80.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    k: usize,
    mu: f64,
}

impl GridSpec {
    /// Grid with the default decay budget.
    pub fn new(dim: usize, k: usize, mu: f64) -> Result<Self> {
        Self::with_decay_budget(dim, k, mu, DEFAULT_DECAY_BUDGET)
    }

    /// Grid whose truncation radius must satisfy `k·mu >= r_min`.
    pub fn with_decay_budget(dim: usize, k: usize, mu: f64, r_min: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidParameter(format!("dimension {dim} not in {{1, 2}}")));
        }
        if k < 2 {
            return Err(Error::InvalidParameter(format!("truncation radius K={k} < 2")));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!("mu={mu} must be positive")));
        }
        if (k as f64) * mu < r_min {
            return Err(Error::InvalidParameter(format!(
                "K*mu = {} below decay budget {r_min}",
                k as f64 * mu
            )));
        }
        Ok(Self { dim, k, mu })
    }

    /// Smallest grid meeting the decay budget `r_min`.
    pub fn covering(dim: usize, mu: f64, r_min: f64) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(Error::InvalidParameter(format!("mu={mu} must be positive")));
        }
        let k = ((r_min / mu) - 1e-9).ceil().max(2.0) as usize;
        Self::with_decay_budget(dim, k, mu, r_min)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

/// Position of the reflection centre on one axis: a lattice site (offset 0)
/// or a bond midpoint (offset ½).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Offset {
    Site,
    Bond,
}

impl Offset {
    pub fn shift(self) -> f64 {
        match self {
            Offset::Site => 0.0,
            Offset::Bond => 0.5,
        }
    }

    /// Reflection of a full index about the centre.
    pub fn reflect(self, j: i64) -> i64 {
        match self {
            Offset::Site => -j,
            Offset::Bond => -1 - j,
        }
    }

    /// Orbit representative (the non-negative member) of a full index.
    pub fn representative(self, j: i64) -> i64 {
        if j >= 0 {
            j
        } else {
            self.reflect(j)
        }
    }

    /// Lowest full index of the box on this axis.
    pub fn lowest(self, k: usize) -> i64 {
        match self {
            Offset::Site => -(k as i64),
            Offset::Bond => -(k as i64) - 1,
        }
    }

    fn multiplicity(self, r: usize) -> f64 {
        match (self, r) {
            (Offset::Site, 0) => 1.0,
            _ => 2.0,
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            Offset::Site => 0,
            Offset::Bond => 1,
        }
    }

    pub(crate) fn from_code(c: u8) -> Result<Self> {
        match c {
            0 => Ok(Offset::Site),
            1 => Ok(Offset::Bond),
            _ => Err(Error::Format(format!("unknown offset code {c}"))),
        }
    }
}

/// Per-axis reflection centres.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Symmetry {
    dim: usize,
    offsets: [Offset; 2],
}

impl Symmetry {
    pub fn new(offsets: &[Offset]) -> Result<Self> {
        match offsets {
            [a] => Ok(Self {
                dim: 1,
                offsets: [*a, Offset::Site],
            }),
            [a, b] => Ok(Self {
                dim: 2,
                offsets: [*a, *b],
            }),
            _ => Err(Error::InvalidParameter(format!(
                "{} offsets given, expected 1 or 2",
                offsets.len()
            ))),
        }
    }

    pub fn site_centred(dim: usize) -> Self {
        Self {
            dim,
            offsets: [Offset::Site; 2],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn offsets(&self) -> &[Offset] {
        &self.offsets[..self.dim]
    }

    pub fn offset(&self, axis: usize) -> Offset {
        self.offsets[axis]
    }
}

/// A grid together with a symmetry class: the layout of a stored field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    grid: GridSpec,
    symmetry: Symmetry,
}

impl Lattice {
    pub fn new(grid: GridSpec, symmetry: Symmetry) -> Result<Self> {
        if grid.dim != symmetry.dim {
            return Err(Error::InvalidParameter(format!(
                "grid dimension {} does not match symmetry dimension {}",
                grid.dim, symmetry.dim
            )));
        }
        Ok(Self { grid, symmetry })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn symmetry(&self) -> &Symmetry {
        &self.symmetry
    }

    pub fn dim(&self) -> usize {
        self.grid.dim
    }

    pub fn mu(&self) -> f64 {
        self.grid.mu
    }

    /// Representatives per axis.
    pub fn side(&self) -> usize {
        self.grid.k + 1
    }

    /// Number of stored values.
    pub fn len(&self) -> usize {
        self.side().pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of full-box sites.
    pub fn full_len(&self) -> usize {
        (0..self.dim())
            .map(|a| match self.symmetry.offsets[a] {
                Offset::Site => 2 * self.grid.k + 1,
                Offset::Bond => 2 * self.grid.k + 2,
            })
            .product()
    }

    pub fn coords(&self, idx: usize) -> [usize; 2] {
        match self.dim() {
            1 => [idx, 0],
            _ => [idx / self.side(), idx % self.side()],
        }
    }

    pub fn index(&self, coords: [usize; 2]) -> usize {
        match self.dim() {
            1 => coords[0],
            _ => coords[0] * self.side() + coords[1],
        }
    }

    /// Orbit size of a stored value.
    pub fn multiplicity(&self, idx: usize) -> f64 {
        let c = self.coords(idx);
        (0..self.dim())
            .map(|a| self.symmetry.offsets[a].multiplicity(c[a]))
            .product()
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.multiplicity(i)).collect()
    }

    /// Continuum position `μ(j + offset)` of a stored value (non-negative coordinates).
    pub fn position(&self, idx: usize) -> [f64; 2] {
        let c = self.coords(idx);
        let mut x = [0.0; 2];
        for a in 0..self.dim() {
            x[a] = self.grid.mu * (c[a] as f64 + self.symmetry.offsets[a].shift());
        }
        x
    }

    /// Euclidean distance of a stored value's site from the symmetry centre.
    pub fn radius(&self, idx: usize) -> f64 {
        let x = self.position(idx);
        (x[0] * x[0] + x[1] * x[1]).sqrt()
    }

    /// Storage index for a full-box index, `None` outside the box.
    pub fn representative(&self, full: &[i64]) -> Option<usize> {
        debug_assert_eq!(full.len(), self.dim());
        let mut c = [0usize; 2];
        for a in 0..self.dim() {
            let r = self.symmetry.offsets[a].representative(full[a]);
            if r > self.grid.k as i64 {
                return None;
            }
            c[a] = r as usize;
        }
        Some(self.index(c))
    }

    /// Full index range on one axis.
    pub fn axis_range(&self, axis: usize) -> std::ops::RangeInclusive<i64> {
        self.symmetry.offsets[axis].lowest(self.grid.k)..=self.grid.k as i64
    }

    /// All full-box indices in lexicographic order.
    pub fn full_indices(&self) -> Vec<[i64; 2]> {
        match self.dim() {
            1 => self.axis_range(0).map(|j| [j, 0]).collect(),
            _ => {
                let mut out = Vec::with_capacity(self.full_len());
                for j1 in self.axis_range(0) {
                    for j2 in self.axis_range(1) {
                        out.push([j1, j2]);
                    }
                }
                out
            }
        }
    }

    /// Orbit-weighted inner product, equal to the full-box `ℓ²` product.
    pub fn dot(&self, x: &[f64], y: &[f64]) -> f64 {
        match self.dim() {
            1 => {
                let o = self.symmetry.offsets[0];
                x.iter()
                    .zip(y)
                    .enumerate()
                    .map(|(r, (a, b))| o.multiplicity(r) * a * b)
                    .sum()
            }
            _ => {
                let s = self.side();
                let [o1, o2] = self.symmetry.offsets;
                let mut acc = 0.0;
                for r1 in 0..s {
                    let m1 = o1.multiplicity(r1);
                    let row = r1 * s;
                    let mut racc = 0.0;
                    for r2 in 0..s {
                        racc += o2.multiplicity(r2) * x[row + r2] * y[row + r2];
                    }
                    acc += m1 * racc;
                }
                acc
            }
        }
    }

    /// Discrete Laplacian with zero values outside the box, on stored values.
    pub fn laplacian_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.len());
        debug_assert_eq!(out.len(), self.len());
        let k = self.grid.k;
        match self.dim() {
            1 => {
                let o = self.symmetry.offsets[0];
                for r in 0..=k {
                    let left = if r > 0 {
                        x[r - 1]
                    } else {
                        match o {
                            Offset::Site => x[1],
                            Offset::Bond => x[0],
                        }
                    };
                    let right = if r < k { x[r + 1] } else { 0.0 };
                    out[r] = left + right - 2.0 * x[r];
                }
            }
            _ => {
                let s = self.side();
                let [o1, o2] = self.symmetry.offsets;
                for r1 in 0..s {
                    let row = r1 * s;
                    let up_row = if r1 > 0 {
                        Some((r1 - 1) * s)
                    } else {
                        match o1 {
                            Offset::Site => Some(s),
                            Offset::Bond => Some(0),
                        }
                    };
                    let down_row = if r1 < k { Some((r1 + 1) * s) } else { None };
                    for r2 in 0..s {
                        let c = x[row + r2];
                        let mut acc = -4.0 * c;
                        acc += up_row.map_or(0.0, |u| x[u + r2]);
                        acc += down_row.map_or(0.0, |d| x[d + r2]);
                        acc += if r2 > 0 {
                            x[row + r2 - 1]
                        } else {
                            match o2 {
                                Offset::Site => x[row + 1],
                                Offset::Bond => c,
                            }
                        };
                        acc += if r2 < k { x[row + r2 + 1] } else { 0.0 };
                        out[row + r2] = acc;
                    }
                }
            }
        }
    }

    /// Tridiagonal coefficients `(lower, diag, upper)` of the 1D reduced
    /// Laplacian: `(Δx)_r = lower[r] x_{r-1} + diag[r] x_r + upper[r] x_{r+1}`.
    pub(crate) fn laplacian_tridiagonal(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        assert_eq!(self.dim(), 1, "tridiagonal form exists in 1D only");
        let n = self.len();
        let mut lower = vec![1.0; n];
        let mut diag = vec![-2.0; n];
        let mut upper = vec![1.0; n];
        lower[0] = 0.0;
        upper[n - 1] = 0.0;
        match self.symmetry.offsets[0] {
            Offset::Site => upper[0] = 2.0,
            Offset::Bond => diag[0] = -1.0,
        }
        (lower, diag, upper)
    }
}

/// A real field on a truncated lattice with exact reflection symmetry.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricSequence {
    lattice: Lattice,
    values: Vec<f64>,
}

impl SymmetricSequence {
    pub fn zeros(lattice: Lattice) -> Self {
        Self {
            values: vec![0.0; lattice.len()],
            lattice,
        }
    }

    /// Builds a field from its fundamental-domain values.
    pub fn from_values(lattice: Lattice, values: Vec<f64>) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::InvalidParameter(format!(
                "{} values for a lattice of {} representatives",
                values.len(),
                lattice.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite value {v}")));
        }
        Ok(Self { lattice, values })
    }

    /// Samples `f` at the continuum position `μ(j + offset)` of each representative.
    pub fn from_positions(lattice: Lattice, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let values = (0..lattice.len()).map(|i| f(lattice.position(i))).collect();
        Self::from_values(lattice, values)
    }

    /// Symmetrizes full-box data by averaging each orbit.
    pub fn from_full(lattice: Lattice, full: &[f64]) -> Result<Self> {
        if full.len() != lattice.full_len() {
            return Err(Error::InvalidParameter(format!(
                "{} full-box values for a box of {}",
                full.len(),
                lattice.full_len()
            )));
        }
        let mut sums = vec![0.0; lattice.len()];
        for (j, v) in lattice.full_indices().iter().zip(full) {
            let r = lattice
                .representative(&j[..lattice.dim()])
                .expect("box index has a representative");
            sums[r] += v;
        }
        for (i, s) in sums.iter_mut().enumerate() {
            *s /= lattice.multiplicity(i);
        }
        Self::from_values(lattice, sums)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn grid(&self) -> &GridSpec {
        &self.lattice.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at a full-box index; zero outside the box.
    pub fn get(&self, full: &[i64]) -> f64 {
        self.lattice
            .representative(full)
            .map_or(0.0, |r| self.values[r])
    }

    /// Values over the full box in [`Lattice::full_indices`] order.
    pub fn to_full(&self) -> Vec<f64> {
        self.lattice
            .full_indices()
            .iter()
            .map(|j| self.get(&j[..self.lattice.dim()]))
            .collect()
    }

    /// Largest difference between the expanded field and its reflections.
    pub fn reflection_defect(&self) -> f64 {
        let d = self.lattice.dim();
        let mut worst = 0.0f64;
        for j in self.lattice.full_indices() {
            let v = self.get(&j[..d]);
            for axis in 0..d {
                let mut r = j;
                r[axis] = self.lattice.symmetry.offsets[axis].reflect(j[axis]);
                worst = worst.max((v - self.get(&r[..d])).abs());
            }
        }
        worst
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            lattice: self.lattice,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            lattice: self.lattice,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub(crate) fn check_same(&self, other: &Self) -> Result<()> {
        if self.lattice != other.lattice {
            return Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.lattice, other.lattice
            )));
        }
        Ok(())
    }

    pub fn laplacian(&self) -> Self {
        let mut out = vec![0.0; self.values.len()];
        self.lattice.laplacian_into(&self.values, &mut out);
        Self {
            lattice: self.lattice,
            values: out,
        }
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.lattice.dot(&self.values, &other.values)
    }

    /// `⟨x, −Δx⟩`, the bond sum of squared differences.
    pub fn dirichlet_form(&self) -> f64 {
        let lap = self.laplacian();
        -self.dot(&lap)
    }

    pub fn norm_l2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// `‖x‖_Q` with the grid's μ.
    pub fn norm_q(&self) -> f64 {
        q_norm_sq(self, self.grid().mu).sqrt()
    }

    /// `‖x‖_{ℓ²_μ} = μ^{n/2}‖x‖_{ℓ²}`.
    pub fn norm_l2_mu(&self) -> f64 {
        self.grid().mu.powf(self.grid().dim as f64 / 2.0) * self.norm_l2()
    }

    /// `‖x‖_{Q_μ} = μ^{n/2}‖x‖_Q`.
    pub fn norm_q_mu(&self) -> f64 {
        self.grid().mu.powf(self.grid().dim as f64 / 2.0) * self.norm_q()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `(Σ_j |x_j|^q)^{1/q}` over the full box.
    pub fn norm_lq(&self, q: f64) -> f64 {
        let s: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| self.lattice.multiplicity(i) * v.abs().powf(q))
            .sum();
        s.powf(1.0 / q)
    }

    /// `Σ_j |x_j|^q` over the full box.
    pub fn power_sum(&self, q: f64) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| self.lattice.multiplicity(i) * v.abs().powf(q))
            .sum()
    }

    /// The discrete Sobolev bound `sup|x_j| ≤ 2√μ‖x‖_Q`.
    pub fn satisfies_sobolev_bound(&self) -> bool {
        let mu = self.grid().mu;
        self.sup_norm() <= 2.0 * mu.sqrt() * self.norm_q() * (1.0 + 1e-12)
    }
}

fn q_norm_sq(x: &SymmetricSequence, mu: f64) -> f64 {
    x.dot(x) + x.dirichlet_form() / (mu * mu)
}

fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("mu={mu} must be positive")))
    }
}

/// `‖x‖²_Q = ‖x‖² + μ⁻²⟨x, −Δx⟩`.
pub fn norm_q(x: &SymmetricSequence, mu: f64) -> Result<f64> {
    check_mu(mu)?;
    Ok(q_norm_sq(x, mu).sqrt())
}

pub fn norm_l2_mu(x: &SymmetricSequence, mu: f64) -> Result<f64> {
    check_mu(mu)?;
    Ok(mu.powf(x.grid().dim as f64 / 2.0) * x.norm_l2())
}

pub fn norm_q_mu(x: &SymmetricSequence, mu: f64) -> Result<f64> {
    check_mu(mu)?;
    Ok(mu.powf(x.grid().dim as f64 / 2.0) * q_norm_sq(x, mu).sqrt())
}

/// Checks `‖x‖_{ℓ^q} ≤ ‖x‖_{ℓ²}` and `‖x‖_{ℓ^∞} ≤ ‖x‖_{ℓ²}`.
pub fn sample_embedding_checks(x: &SymmetricSequence, q: f64) -> Result<bool> {
    if !(q >= 2.0) {
        return Err(Error::InvalidParameter(format!("embedding exponent q={q} < 2")));
    }
    let l2 = x.norm_l2();
    let slack = 1.0 + 1e-12;
    Ok(x.norm_lq(q) <= l2 * slack && x.sup_norm() <= l2 * slack)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(k: usize, mu: f64, o: Offset) -> Lattice {
        Lattice::new(
            GridSpec::with_decay_budget(1, k, mu, 0.0).unwrap(),
            Symmetry::new(&[o]).unwrap(),
        )
        .unwrap()
    }

    fn plane(k: usize, mu: f64, o1: Offset, o2: Offset) -> Lattice {
        Lattice::new(
            GridSpec::with_decay_budget(2, k, mu, 0.0).unwrap(),
            Symmetry::new(&[o1, o2]).unwrap(),
        )
        .unwrap()
    }

    fn delta(lat: Lattice) -> SymmetricSequence {
        let mut v = vec![0.0; lat.len()];
        v[0] = 1.0;
        SymmetricSequence::from_values(lat, v).unwrap()
    }

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(GridSpec::new(3, 10, 0.1).is_err());
        assert!(GridSpec::with_decay_budget(1, 1, 0.1, 0.0).is_err());
        assert!(GridSpec::with_decay_budget(1, 10, 0.0, 0.0).is_err());
        // 10 * 0.1 = 1 < 80
        assert!(GridSpec::new(1, 10, 0.1).is_err());
        assert!(GridSpec::new(1, 800, 0.1).is_ok());
        assert_eq!(GridSpec::covering(1, 0.1, 80.0).unwrap().k(), 800);
    }

    #[test]
    fn delta_stencil_1d() {
        let d = delta(line(5, 1.0, Offset::Site));
        let lap = d.laplacian();
        assert_eq!(lap.get(&[0]), -2.0);
        assert_eq!(lap.get(&[1]), 1.0);
        assert_eq!(lap.get(&[-1]), 1.0);
        assert_eq!(lap.get(&[2]), 0.0);
    }

    #[test]
    fn delta_stencil_2d() {
        let d = delta(plane(4, 1.0, Offset::Site, Offset::Site));
        let lap = d.laplacian();
        assert_eq!(lap.get(&[0, 0]), -4.0);
        for nb in [[1, 0], [-1, 0], [0, 1], [0, -1]] {
            assert_eq!(lap.get(&nb), 1.0);
        }
        assert_eq!(lap.get(&[1, 1]), 0.0);
    }

    #[test]
    fn constant_field_is_harmonic_in_the_interior() {
        for lat in [
            line(6, 1.0, Offset::Site),
            line(6, 1.0, Offset::Bond),
            plane(5, 1.0, Offset::Bond, Offset::Site),
        ] {
            let c = SymmetricSequence::from_positions(lat, |_| 3.5).unwrap();
            let lap = c.laplacian();
            for j in lat.full_indices() {
                let j = &j[..lat.dim()];
                let interior = (0..lat.dim()).all(|a| {
                    let r = lat.axis_range(a);
                    j[a] > *r.start() && j[a] < *r.end()
                });
                if interior {
                    assert_eq!(lap.get(j), 0.0, "at {j:?}");
                }
            }
        }
    }

    #[test]
    fn bond_centred_reflection() {
        let lat = line(4, 0.5, Offset::Bond);
        let x = SymmetricSequence::from_positions(lat, |p| (-p[0]).exp()).unwrap();
        for j in lat.axis_range(0) {
            assert_eq!(x.get(&[j]), x.get(&[-1 - j]));
        }
        assert_eq!(lat.full_len(), 10);
        assert_eq!(x.reflection_defect(), 0.0);
    }

    #[test]
    fn delta_q_norm() {
        let d = delta(line(5, 1.0, Offset::Site));
        assert_eq!(d.dirichlet_form(), 2.0);
        assert!((d.norm_q() - 3f64.sqrt()).abs() < 1e-15);
        assert!(d.satisfies_sobolev_bound());
        assert_eq!(d.sup_norm(), 1.0);
    }

    #[test]
    fn zero_sequence_norms() {
        let z = SymmetricSequence::zeros(plane(3, 0.5, Offset::Site, Offset::Bond));
        assert_eq!(z.norm_l2(), 0.0);
        assert_eq!(z.norm_q(), 0.0);
        assert_eq!(z.norm_l2_mu(), 0.0);
        assert_eq!(z.norm_q_mu(), 0.0);
        assert_eq!(z.sup_norm(), 0.0);
    }

    #[test]
    fn explicit_mu_is_validated() {
        let d = delta(line(5, 1.0, Offset::Site));
        assert!(norm_q(&d, 0.0).is_err());
        assert!(norm_l2_mu(&d, -1.0).is_err());
        assert!(norm_q_mu(&d, 2.0).is_ok());
        assert!((norm_l2_mu(&d, 4.0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn two_site_embedding() {
        // Bond-centred lattice: the orbit {0, -1} gives the pair (1, 1).
        let lat = line(3, 1.0, Offset::Bond);
        let mut v = vec![0.0; lat.len()];
        v[0] = 1.0;
        let x = SymmetricSequence::from_values(lat, v).unwrap();
        assert!((x.norm_lq(4.0) - 2f64.powf(0.25)).abs() < 1e-15);
        assert!((x.norm_l2() - 2f64.sqrt()).abs() < 1e-15);
        assert!(sample_embedding_checks(&x, 4.0).unwrap());
        assert!(sample_embedding_checks(&x, 1.5).is_err());
    }

    #[test]
    fn delta_embedding_is_tight() {
        let d = delta(line(3, 1.0, Offset::Site));
        assert_eq!(d.norm_lq(6.0), 1.0);
        assert_eq!(d.norm_l2(), 1.0);
        assert!(sample_embedding_checks(&d, 6.0).unwrap());
    }

    #[test]
    fn full_box_round_trip() {
        let lat = plane(3, 0.7, Offset::Bond, Offset::Site);
        let x = SymmetricSequence::from_positions(lat, |p| 1.0 + p[0] - 0.3 * p[1]).unwrap();
        let y = SymmetricSequence::from_full(lat, &x.to_full()).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn tridiagonal_matches_stencil() {
        for o in [Offset::Site, Offset::Bond] {
            let lat = line(6, 1.0, o);
            let x = SymmetricSequence::from_positions(lat, |p| (p[0] * 0.7).cos() + 0.1 * p[0])
                .unwrap();
            let (l, d, u) = lat.laplacian_tridiagonal();
            let lap = x.laplacian();
            let v = x.values();
            for r in 0..lat.len() {
                let mut acc = d[r] * v[r];
                if r > 0 {
                    acc += l[r] * v[r - 1];
                }
                if r + 1 < lat.len() {
                    acc += u[r] * v[r + 1];
                }
                assert!((acc - lap.values()[r]).abs() < 1e-14);
            }
        }
    }
}
