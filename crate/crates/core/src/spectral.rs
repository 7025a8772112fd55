//! Cosine-in-time representation of lattice fields,
//! `u_j(t) = Σ_l u_{j,l} cos(lt)`, and the nonlinearity `N(u) = β|u|^{2p}u`
//! evaluated by collocation.

use crate::continuum::focusing_power;
use crate::error::{Error, Result};
use crate::lattice::io::{read_lattice_header, read_values, write_lattice_header, write_values};
use crate::lattice::{Lattice, SymmetricSequence};
use crate::quadrature::tanh_sinh;
use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{Read, Write};

/// Default highest retained harmonic.
pub const DEFAULT_L_MAX: usize = 15;

const MAGIC: &[u8; 4] = b"KGTF";
const VERSION: u32 = 1;

/// `c₁(p) = ∫₀^{2π} |cos t|^{2p} cos² t dt`.
pub fn c1(p: f64) -> f64 {
    // Four equal quarter periods; the integrand is smooth inside [0, π/2].
    4.0 * tanh_sinh(|t| t.cos().max(0.0).powf(2.0 * p + 2.0), 0.0, PI / 2.0, 1e-15)
}

/// Coupling constant that makes the harmonic-1 coefficient of `N(v cos t)`
/// equal to `|v|^{2p} v`.
pub fn beta(p: f64) -> f64 {
    PI / c1(p)
}

/// Quadrature weight `∫₀^{2π} cos²(lt) dt`.
pub fn harmonic_weight(l: usize) -> f64 {
    if l == 0 {
        2.0 * PI
    } else {
        PI
    }
}

/// Which harmonics a field stores.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HarmonicSet {
    /// `0, 1, …, L_max`.
    All,
    /// `1, 3, 5, …`: enough for odd-in-amplitude nonlinearities seeded by `cos t`.
    Odd,
}

impl HarmonicSet {
    fn code(self) -> u8 {
        match self {
            HarmonicSet::All => 0,
            HarmonicSet::Odd => 1,
        }
    }

    fn from_code(c: u8) -> Result<Self> {
        match c {
            0 => Ok(HarmonicSet::All),
            1 => Ok(HarmonicSet::Odd),
            _ => Err(Error::Format(format!("harmonic set code {c}"))),
        }
    }

    pub fn harmonics(self, l_max: usize) -> Vec<usize> {
        match self {
            HarmonicSet::All => (0..=l_max).collect(),
            HarmonicSet::Odd => (1..=l_max).step_by(2).collect(),
        }
    }

    fn slot(self, l: usize, l_max: usize) -> Option<usize> {
        if l > l_max {
            return None;
        }
        match self {
            HarmonicSet::All => Some(l),
            HarmonicSet::Odd => (l % 2 == 1).then_some(l / 2),
        }
    }
}

/// The kernel component: the harmonic-1 coefficient sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelField(pub SymmetricSequence);

impl KernelField {
    pub fn sequence(&self) -> &SymmetricSequence {
        &self.0
    }
}

/// Cosine coefficients `u_{j,l}` for the stored harmonics.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeFourierField {
    lattice: Lattice,
    l_max: usize,
    set: HarmonicSet,
    harmonics: Vec<usize>,
    coeffs: Vec<Vec<f64>>,
}

impl TimeFourierField {
    pub fn zeros(lattice: Lattice, l_max: usize, set: HarmonicSet) -> Result<Self> {
        if l_max < 1 {
            return Err(Error::InvalidParameter("L_max must be at least 1".into()));
        }
        let harmonics = set.harmonics(l_max);
        let coeffs = vec![vec![0.0; lattice.len()]; harmonics.len()];
        Ok(Self {
            lattice,
            l_max,
            set,
            harmonics,
            coeffs,
        })
    }

    /// `v e₁`.
    pub fn embed(v: &KernelField, l_max: usize, set: HarmonicSet) -> Result<Self> {
        let mut u = Self::zeros(*v.0.lattice(), l_max, set)?;
        u.set_harmonic(1, &v.0)?;
        Ok(u)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn set(&self) -> HarmonicSet {
        self.set
    }

    pub fn harmonics(&self) -> &[usize] {
        &self.harmonics
    }

    /// Stored coefficients of harmonic `l`, if it is stored.
    pub fn harmonic(&self, l: usize) -> Option<&[f64]> {
        self.set.slot(l, self.l_max).map(|s| &self.coeffs[s][..])
    }

    pub fn harmonic_mut(&mut self, l: usize) -> Option<&mut [f64]> {
        self.set.slot(l, self.l_max).map(|s| &mut self.coeffs[s][..])
    }

    /// Harmonic `l` as a sequence; zero if not stored.
    pub fn harmonic_sequence(&self, l: usize) -> SymmetricSequence {
        match self.harmonic(l) {
            Some(c) => SymmetricSequence::from_values(self.lattice, c.to_vec())
                .expect("stored coefficients are finite"),
            None => SymmetricSequence::zeros(self.lattice),
        }
    }

    pub fn set_harmonic(&mut self, l: usize, x: &SymmetricSequence) -> Result<()> {
        if *x.lattice() != self.lattice {
            return Err(Error::GridMismatch("harmonic lattice differs from the field".into()));
        }
        let slot = self
            .set
            .slot(l, self.l_max)
            .ok_or_else(|| Error::InvalidParameter(format!("harmonic {l} is not stored")))?;
        self.coeffs[slot].copy_from_slice(x.values());
        Ok(())
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.lattice != other.lattice || self.l_max != other.l_max || self.set != other.set {
            return Err(Error::GridMismatch("time-Fourier fields differ in layout".into()));
        }
        Ok(())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            for (x, y) in a.iter_mut().zip(b) {
                *x = f(*x, *y);
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().flatten().for_each(|x| *x *= c);
        out
    }

    /// `Σ_l ρ(l) w_l ‖u_l‖²`.
    fn weighted_sum(&self, rho: impl Fn(f64) -> f64) -> f64 {
        self.harmonics
            .iter()
            .zip(&self.coeffs)
            .map(|(&l, c)| rho(l as f64) * harmonic_weight(l) * self.lattice.dot(c, c))
            .sum()
    }

    /// `‖u‖²_{X₂} = Σ_l (1 + l² + l⁴) w_l ‖u_l‖²_{ℓ²}`.
    pub fn norm_x2(&self) -> f64 {
        self.weighted_sum(|l| 1.0 + l * l + l.powi(4)).sqrt()
    }

    /// `‖u‖²_{X₀} = Σ_l w_l ‖u_l‖²_{ℓ²} = ∫₀^{2π} ‖u(t)‖² dt`.
    pub fn norm_x0(&self) -> f64 {
        self.weighted_sum(|_| 1.0).sqrt()
    }

    /// `‖u_l‖_{ℓ²}` per stored harmonic.
    pub fn harmonic_norms(&self) -> Vec<(usize, f64)> {
        self.harmonics
            .iter()
            .zip(&self.coeffs)
            .map(|(&l, c)| (l, self.lattice.dot(c, c).sqrt()))
            .collect()
    }

    /// Largest coefficient magnitude among stored even harmonics.
    pub fn even_content(&self) -> f64 {
        self.harmonics
            .iter()
            .zip(&self.coeffs)
            .filter(|(l, _)| *l % 2 == 0)
            .flat_map(|(_, c)| c.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `‖u_{L_max}‖ / max_l ‖u_l‖` over the highest stored harmonic.
    pub fn tail_ratio(&self) -> f64 {
        let norms = self.harmonic_norms();
        let top = norms.iter().map(|(_, n)| *n).fold(0.0, f64::max);
        if top == 0.0 {
            return 0.0;
        }
        norms.last().map_or(0.0, |(_, n)| n / top)
    }

    /// `u(t)` as a sequence.
    pub fn at_time(&self, t: f64) -> SymmetricSequence {
        let mut out = vec![0.0; self.lattice.len()];
        for (&l, c) in self.harmonics.iter().zip(&self.coeffs) {
            let w = (l as f64 * t).cos();
            for (o, v) in out.iter_mut().zip(c) {
                *o += w * v;
            }
        }
        SymmetricSequence::from_values(self.lattice, out).expect("finite")
    }

    /// `∂_t u(t)` as a sequence.
    pub fn derivative_at_time(&self, t: f64) -> SymmetricSequence {
        let mut out = vec![0.0; self.lattice.len()];
        for (&l, c) in self.harmonics.iter().zip(&self.coeffs) {
            let w = -(l as f64) * (l as f64 * t).sin();
            for (o, v) in out.iter_mut().zip(c) {
                *o += w * v;
            }
        }
        SymmetricSequence::from_values(self.lattice, out).expect("finite")
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_u32::<LittleEndian>(VERSION)?;
        write_lattice_header(&self.lattice, &mut w)?;
        w.write_u64::<LittleEndian>(self.l_max as u64)?;
        w.write_u8(self.set.code())?;
        for &l in &self.harmonics {
            write_values(&self.harmonic_sequence(l), &mut w)?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("not a time-Fourier field file".into()));
        }
        let version = r.read_u32::<LittleEndian>()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let lattice = read_lattice_header(&mut r)?;
        let l_max = r.read_u64::<LittleEndian>()? as usize;
        let set = HarmonicSet::from_code(r.read_u8()?)?;
        let mut u = Self::zeros(lattice, l_max, set)?;
        for l in set.harmonics(l_max) {
            let x = read_values(lattice, &mut r)?;
            u.set_harmonic(l, &x)?;
        }
        Ok(u)
    }

    /// CSV of one harmonic's coefficients over the full box.
    pub fn write_harmonic_csv<W: Write>(&self, l: usize, w: W) -> Result<()> {
        crate::lattice::write_csv(&self.harmonic_sequence(l), w)
    }
}

/// `Π_V u`: the harmonic-1 component.
pub fn project_v(u: &TimeFourierField) -> KernelField {
    KernelField(u.harmonic_sequence(1))
}

/// `Π_W u`: everything except harmonic 1.
pub fn project_w(u: &TimeFourierField) -> TimeFourierField {
    let mut out = u.clone();
    if let Some(c) = out.harmonic_mut(1) {
        c.iter_mut().for_each(|x| *x = 0.0);
    }
    out
}

/// `s ↦ β|s|^{2p}s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Nonlinearity {
    pub p: f64,
    pub beta: f64,
}

impl Nonlinearity {
    /// The normalized nonlinearity `β = π / c₁(p)`.
    pub fn normalized(p: f64) -> Self {
        Self { p, beta: beta(p) }
    }

    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        self.beta * focusing_power(s, self.p)
    }
}

/// Collocation in time: midpoint samples of a half (or quarter) period and
/// the matching discrete cosine projections.
#[derive(Clone, Debug)]
pub struct Collocation {
    set: HarmonicSet,
    l_max: usize,
    times: Vec<f64>,
    /// `cos(l t_k)`, one row per stored harmonic.
    basis: Vec<Vec<f64>>,
    /// Projection weights, one row per stored harmonic.
    proj: Vec<Vec<f64>>,
}

impl Collocation {
    /// Full-period sample count `M = 8(L_max + 1)`.
    pub fn new(l_max: usize, set: HarmonicSet) -> Self {
        Self::with_samples(l_max, set, 8 * (l_max + 1))
    }

    /// `samples` is the full-period count `M`; it is rounded up to a multiple of 4.
    pub fn with_samples(l_max: usize, set: HarmonicSet, samples: usize) -> Self {
        let m_half = samples.max(2 * (l_max + 1)).div_ceil(4) * 2;
        let (times, factor): (Vec<f64>, f64) = match set {
            HarmonicSet::All => (
                (0..m_half).map(|k| PI * (k as f64 + 0.5) / m_half as f64).collect(),
                2.0 / m_half as f64,
            ),
            // Odd harmonics are antisymmetric about π/2: the quarter period suffices.
            HarmonicSet::Odd => (
                (0..m_half / 2).map(|k| PI * (k as f64 + 0.5) / m_half as f64).collect(),
                4.0 / m_half as f64,
            ),
        };
        let harmonics = set.harmonics(l_max);
        let basis: Vec<Vec<f64>> = harmonics
            .iter()
            .map(|&l| times.iter().map(|t| (l as f64 * t).cos()).collect())
            .collect();
        let proj = harmonics
            .iter()
            .zip(&basis)
            .map(|(&l, row)| {
                let f = if l == 0 { 0.5 * factor } else { factor };
                row.iter().map(|c| f * c).collect()
            })
            .collect();
        Self {
            set,
            l_max,
            times,
            basis,
            proj,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    fn check(&self, u: &TimeFourierField) -> Result<()> {
        if u.set != self.set || u.l_max != self.l_max {
            return Err(Error::GridMismatch("collocation built for another layout".into()));
        }
        Ok(())
    }

    /// Values of one site's series at the collocation times.
    fn synth(&self, u: &TimeFourierField, site: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for (row, c) in self.basis.iter().zip(&u.coeffs) {
            let a = c[site];
            if a != 0.0 {
                for (o, b) in out.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
    }

    fn analyse(&self, values: &[f64], out: &mut TimeFourierField, site: usize) {
        for (row, c) in self.proj.iter().zip(out.coeffs.iter_mut()) {
            c[site] = row.iter().zip(values).map(|(a, b)| a * b).sum();
        }
    }

    /// `N(u)` with coefficients up to `L_max`.
    pub fn apply_n(&self, u: &TimeFourierField, nl: &Nonlinearity) -> Result<TimeFourierField> {
        self.apply_pointwise(u, |s| nl.eval(s))
    }

    /// Applies `f` at every collocation time and site, then projects back.
    pub fn apply_pointwise(
        &self,
        u: &TimeFourierField,
        f: impl Fn(f64) -> f64,
    ) -> Result<TimeFourierField> {
        self.check(u)?;
        let mut out = TimeFourierField::zeros(u.lattice, u.l_max, u.set)?;
        let mut vals = vec![0.0; self.times.len()];
        for site in 0..u.lattice.len() {
            self.synth(u, site, &mut vals);
            vals.iter_mut().for_each(|x| *x = f(*x));
            self.analyse(&vals, &mut out, site);
        }
        Ok(out)
    }

    /// Harmonic-1 coefficient of `N(v e₁ + w) − N(v e₁)`, differenced pointwise in time.
    pub fn harmonic1_difference(
        &self,
        v: &[f64],
        w: &TimeFourierField,
        nl: &Nonlinearity,
    ) -> Result<Vec<f64>> {
        self.check(w)?;
        let s1 = self.set.slot(1, self.l_max).expect("harmonic 1 is always stored");
        let cos1 = &self.basis[s1];
        let proj1 = &self.proj[s1];
        let mut vals = vec![0.0; self.times.len()];
        let mut out = vec![0.0; v.len()];
        for (site, o) in out.iter_mut().enumerate() {
            self.synth(w, site, &mut vals);
            let mut acc = 0.0;
            for k in 0..vals.len() {
                let base = v[site] * cos1[k];
                acc += proj1[k] * (nl.eval(base + vals[k]) - nl.eval(base));
            }
            *o = acc;
        }
        Ok(out)
    }

    /// Max over sites and collocation times of `|u_j(t_k)|`.
    pub fn sup_over_samples(&self, u: &TimeFourierField) -> Result<f64> {
        self.check(u)?;
        let mut vals = vec![0.0; self.times.len()];
        let mut best: f64 = 0.0;
        for site in 0..u.lattice.len() {
            self.synth(u, site, &mut vals);
            best = vals.iter().fold(best, |m, v| m.max(v.abs()));
        }
        Ok(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{GridSpec, Offset, Symmetry};
    use proptest::prelude::*;

    fn lattice(dim: usize, k: usize, bond: bool) -> Lattice {
        let o = if bond { Offset::Bond } else { Offset::Site };
        Lattice::new(
            GridSpec::with_decay_budget(dim, k, 0.1, 0.0).unwrap(),
            Symmetry::new(&vec![o; dim]).unwrap(),
        )
        .unwrap()
    }

    /// c₁(p) = 2√π Γ(p + 3/2) / Γ(p + 2).
    fn c1_closed(p: f64) -> f64 {
        use statrs::function::gamma::gamma;
        2.0 * PI.sqrt() * gamma(p + 1.5) / gamma(p + 2.0)
    }

    #[test]
    fn c1_reference_values() {
        assert!((c1(1.0) - 3.0 * PI / 4.0).abs() < 1e-12 * c1(1.0));
        assert!((c1(0.5) - 8.0 / 3.0).abs() < 1e-12);
        assert!((c1(0.0) - PI).abs() < 1e-12);
        for p in [0.5, 0.6, 0.75, 1.0, 1.3, 1.9] {
            assert!((c1(p) - c1_closed(p)).abs() < 1e-12 * c1(p), "p={p}");
        }
    }

    #[test]
    fn cubic_identity() {
        let lat = lattice(1, 4, false);
        let v = SymmetricSequence::from_values(lat, vec![0.7, -0.3, 0.2, 0.0, 1.1]).unwrap();
        let nl = Nonlinearity { p: 1.0, beta: 1.0 };
        for set in [HarmonicSet::All, HarmonicSet::Odd] {
            let u = TimeFourierField::embed(&KernelField(v.clone()), 7, set).unwrap();
            let n = Collocation::new(7, set).apply_n(&u, &nl).unwrap();
            for &l in n.harmonics() {
                for (got, x) in n.harmonic(l).unwrap().iter().zip(v.values()) {
                    let want = match l {
                        1 => 0.75 * x * x * x,
                        3 => 0.25 * x * x * x,
                        _ => 0.0,
                    };
                    assert!((got - want).abs() < 1e-13, "l={l}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn normalized_beta_makes_harmonic_one_exact() {
        let lat = lattice(1, 3, true);
        let v = SymmetricSequence::from_values(lat, vec![0.9, -0.4, 0.05, 0.3]).unwrap();
        for p in [0.5, 0.8, 1.0] {
            let nl = Nonlinearity::normalized(p);
            let u = TimeFourierField::embed(&KernelField(v.clone()), 31, HarmonicSet::Odd).unwrap();
            let col = Collocation::with_samples(31, HarmonicSet::Odd, 4096);
            let n = col.apply_n(&u, &nl).unwrap();
            for (got, x) in n.harmonic(1).unwrap().iter().zip(v.values()) {
                let want = focusing_power(*x, p);
                assert!((got - want).abs() < 1e-10 * want.abs().max(1e-3), "p={p}");
            }
        }
    }

    #[test]
    fn projectors_partition() {
        let lat = lattice(2, 3, false);
        let mut u = TimeFourierField::zeros(lat, 5, HarmonicSet::All).unwrap();
        for (i, c) in u.coeffs.iter_mut().flatten().enumerate() {
            *c = (i as f64 * 0.37).sin();
        }
        let v = project_v(&u);
        let w = project_w(&u);
        let back = w.add(&TimeFourierField::embed(&v, 5, HarmonicSet::All).unwrap()).unwrap();
        assert_eq!(back, u);
        assert!(w.harmonic(1).unwrap().iter().all(|x| *x == 0.0));

        let only1 = TimeFourierField::embed(&v, 5, HarmonicSet::All).unwrap();
        assert!(project_w(&only1).norm_x0() == 0.0);
        let mut only3 = TimeFourierField::zeros(lat, 5, HarmonicSet::All).unwrap();
        only3.harmonic_mut(3).unwrap()[0] = 1.0;
        assert_eq!(project_v(&only3).0.sup_norm(), 0.0);
    }

    #[test]
    fn zero_maps_to_zero() {
        let lat = lattice(1, 3, false);
        let u = TimeFourierField::zeros(lat, 5, HarmonicSet::All).unwrap();
        let n = Collocation::new(5, HarmonicSet::All)
            .apply_n(&u, &Nonlinearity::normalized(0.5))
            .unwrap();
        assert_eq!(n.norm_x2(), 0.0);
    }

    #[test]
    fn parseval_weights() {
        // ∫₀^{2π} (a + b cos t + c cos 2t)² dt = 2π a² + π b² + π c²
        let lat = lattice(1, 2, false);
        let mut u = TimeFourierField::zeros(lat, 2, HarmonicSet::All).unwrap();
        u.harmonic_mut(0).unwrap()[0] = 0.5;
        u.harmonic_mut(1).unwrap()[0] = 2.0;
        u.harmonic_mut(2).unwrap()[0] = -1.0;
        let direct = crate::quadrature::tanh_sinh(
            |t| (0.5 + 2.0 * t.cos() - (2.0 * t).cos()).powi(2),
            0.0,
            2.0 * PI,
            1e-15,
        );
        assert!((u.norm_x0().powi(2) - direct).abs() < 1e-12);
        let x2 = 2.0 * PI * 0.25 + PI * 3.0 * 4.0 + PI * 21.0;
        assert!((u.norm_x2().powi(2) - x2).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn collocation_round_trip(seed in prop::collection::vec(-1.0f64..1.0, 40), odd: bool) {
            let set = if odd { HarmonicSet::Odd } else { HarmonicSet::All };
            let lat = lattice(1, 4, false);
            let mut u = TimeFourierField::zeros(lat, 7, set).unwrap();
            for (c, s) in u.coeffs.iter_mut().flatten().zip(seed.iter().cycle()) {
                *c = *s;
            }
            let col = Collocation::with_samples(7, set, 16);
            let back = col.apply_pointwise(&u, |s| s).unwrap();
            for (a, b) in back.coeffs.iter().flatten().zip(u.coeffs.iter().flatten()) {
                prop_assert!((a - b).abs() < 1e-13);
            }
        }

        #[test]
        fn odd_inputs_stay_odd(amp in prop::collection::vec(-1.0f64..1.0, 5), p in 0.5f64..1.5) {
            let lat = lattice(1, 4, false);
            let v = SymmetricSequence::from_values(lat, amp).unwrap();
            let u = TimeFourierField::embed(&KernelField(v), 9, HarmonicSet::All).unwrap();
            let n = Collocation::new(9, HarmonicSet::All).apply_n(&u, &Nonlinearity::normalized(p)).unwrap();
            prop_assert!(n.even_content() < 1e-14);
        }
    }

    #[test]
    fn binary_round_trip_and_csv() {
        let lat = lattice(2, 3, true);
        let mut u = TimeFourierField::zeros(lat, 5, HarmonicSet::Odd).unwrap();
        for (i, c) in u.coeffs.iter_mut().flatten().enumerate() {
            *c = 1.0 / (1.0 + i as f64);
        }
        let mut buf = Vec::new();
        u.write_binary(&mut buf).unwrap();
        assert_eq!(TimeFourierField::read_binary(&buf[..]).unwrap(), u);
        let mut csv = Vec::new();
        u.write_harmonic_csv(3, &mut csv).unwrap();
        assert!(String::from_utf8(csv).unwrap().starts_with("j1,j2,value\n"));
    }

    #[test]
    fn harmonic1_difference_matches_full_evaluation() {
        let lat = lattice(1, 3, false);
        let nl = Nonlinearity::normalized(0.5);
        let col = Collocation::new(9, HarmonicSet::Odd);
        let v = vec![0.3, 0.1, -0.05, 0.0];
        let mut w = TimeFourierField::zeros(lat, 9, HarmonicSet::Odd).unwrap();
        w.harmonic_mut(3).unwrap().copy_from_slice(&[0.01, -0.002, 0.003, 0.0]);
        let d = col.harmonic1_difference(&v, &w, &nl).unwrap();
        let vf = TimeFourierField::embed(
            &KernelField(SymmetricSequence::from_values(lat, v.clone()).unwrap()),
            9,
            HarmonicSet::Odd,
        )
        .unwrap();
        let full = col.apply_n(&vf.add(&w).unwrap(), &nl).unwrap();
        let base = col.apply_n(&vf, &nl).unwrap();
        for i in 0..4 {
            let want = full.harmonic(1).unwrap()[i] - base.harmonic(1).unwrap()[i];
            assert!((d[i] - want).abs() < 1e-16);
        }
    }
}
