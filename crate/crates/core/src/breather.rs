//! The assembled breather `q(t) = v(ωt) + w(v)(ωt)` and its validation:
//! KG residuals, distance to the reference solution, μ-sweeps and an
//! independent leapfrog run over one period.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::continuum::{self, GroundStateProfile, ModeSpec, ProfileMeta};
use crate::error::{Error, Result};
use crate::fit::{fit_loglog, SlopeFit};
use crate::kernel::{
    hessian_diagnostics, solve_dnls_ground_state, solve_kernel, DnlsProblem, HessianReport, KernelOptions,
    KernelReport, NewtonOptions, NewtonReport, RangeContext,
};
use crate::lattice::{GridSpec, Lattice, SymmetricSequence, DEFAULT_DECAY_BUDGET};
use crate::range::{RangeOperator, RangeOptions};
use crate::spectral::{
    c1, harmonic_weight, project_w, Collocation, HarmonicSet, KernelField, Nonlinearity, TimeFourierField,
    DEFAULT_L_MAX,
};

/// Physical parameters of one breather.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BreatherParams {
    pub n: usize,
    pub p: f64,
    pub a: f64,
    pub mu: f64,
    /// `st`, `p`, `h1`, `h2`.
    pub mode: String,
}

impl BreatherParams {
    pub fn mode_spec(&self) -> Result<ModeSpec> {
        ModeSpec::parse(self.n, &self.mode)
    }

    fn check(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a < 0.5) {
            return Err(Error::InvalidParameter(format!("a = {} outside (0, 1/2)", self.a)));
        }
        continuum::check_exponent(self.n, self.p)?;
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidParameter(format!("mu = {} must be positive", self.mu)));
        }
        self.mode_spec().map(|_| ())
    }
}

/// Numerical settings; every field has a default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BreatherConfig {
    pub l_max: usize,
    pub harmonics: HarmonicSet,
    /// Truncation radius; derived from `decay_budget` when absent.
    pub k: Option<usize>,
    pub decay_budget: f64,
    pub profile_tol: f64,
    pub dnls_tol: f64,
    pub kernel_tol: f64,
    pub range_tol: f64,
    pub range_max_iter: usize,
    /// Time samples per half period for residual and sup-norm checks.
    pub samples: Option<usize>,
    /// Compute the Hessian diagnostics at the dNLS ground state.
    pub hessian: bool,
}

impl Default for BreatherConfig {
    fn default() -> Self {
        Self {
            l_max: DEFAULT_L_MAX,
            harmonics: HarmonicSet::Odd,
            k: None,
            decay_budget: DEFAULT_DECAY_BUDGET,
            profile_tol: 1e-8,
            dnls_tol: NewtonOptions::dnls().tol,
            kernel_tol: NewtonOptions::kernel().tol,
            range_tol: RangeOptions::default().tol,
            range_max_iter: RangeOptions::default().max_iter,
            samples: None,
            hessian: true,
        }
    }
}

impl BreatherConfig {
    pub fn samples(&self) -> usize {
        self.samples.unwrap_or(4 * (self.l_max + 1))
    }

    fn grid(&self, n: usize, mu: f64) -> Result<GridSpec> {
        match self.k {
            Some(k) => GridSpec::with_decay_budget(n, k, mu, 0.0),
            None => GridSpec::covering(n, mu, self.decay_budget),
        }
    }
}

/// Pointwise and discrete residuals of the KG equation.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct KgResidual {
    /// `max |ω²u″ + u − aΔu − N(u)|` at the sample times, with `N` applied pointwise.
    pub pointwise: f64,
    /// Same, for the band-limited residual of the collocated system the solver works with.
    pub discrete: f64,
    pub samples: usize,
}

/// Distance between the breather and the reference solution `Ψ`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ReferenceError {
    pub e_h2: f64,
    pub e_sup: f64,
    /// `Σ_l 2√μ ‖c_l‖_Q`, an upper bound for `e_sup`.
    pub sobolev_bound: f64,
    pub chain_holds: bool,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct BreatherReport {
    pub profile: Option<ProfileMeta>,
    pub k: usize,
    pub sites: usize,
    pub dnls: NewtonReport,
    pub hessian: Option<HessianReport>,
    pub kernel: KernelReport,
    pub residual: KgResidual,
    pub reference: ReferenceError,
    pub symmetry_error: f64,
    pub harmonic_norms: Vec<(usize, f64)>,
    pub harmonic1_dominant: bool,
    pub norm_w_x2: f64,
    /// `‖w‖_{X₀} / ‖u‖_{X₀}`.
    pub tail_fraction: f64,
    /// `μⁿ Σ ψ²`.
    pub reference_mass: f64,
    pub dnls_minus_reference_q_mu: f64,
    pub kernel_minus_dnls_q_mu: f64,
}

#[derive(Clone, Debug)]
pub struct Breather {
    pub params: BreatherParams,
    pub config: BreatherConfig,
    pub mode: ModeSpec,
    pub omega: f64,
    pub m: f64,
    pub nl: Nonlinearity,
    /// Sampled continuum profile.
    pub psi: SymmetricSequence,
    /// dNLS ground state `Φ`.
    pub dnls: SymmetricSequence,
    /// Kernel solution `φ`.
    pub phi: SymmetricSequence,
    /// `u = μ^{1/p} φ e₁ + w` in rescaled time.
    pub u: TimeFourierField,
    pub report: BreatherReport,
}

/// Runs the pipeline with a freshly computed continuum profile.
pub fn assemble(params: &BreatherParams, cfg: &BreatherConfig) -> Result<Breather> {
    params.check()?;
    let gs = continuum::solve_ground_state(params.n, params.p, cfg.profile_tol).map_err(|e| e.in_stage("continuum"))?;
    assemble_with_profile(&gs, params, cfg)
}

/// Runs dNLS → range → kernel on the sampled profile `gs`.
pub fn assemble_with_profile(gs: &GroundStateProfile, params: &BreatherParams, cfg: &BreatherConfig) -> Result<Breather> {
    params.check()?;
    if gs.dim() != params.n || gs.p() != params.p {
        return Err(Error::InvalidParameter("profile does not match (n, p)".into()));
    }
    let mode = params.mode_spec()?;
    let (mu, a, p, n) = (params.mu, params.a, params.p, params.n);
    let m = gs.m();
    let grid = cfg.grid(n, mu).map_err(|e| e.in_stage("lattice"))?;
    let psi = continuum::sample_reference(gs, grid, mode, a.sqrt()).map_err(|e| e.in_stage("lattice"))?;
    let lat = *psi.lattice();

    let prob = DnlsProblem::new(lat, a, p, m).map_err(|e| e.in_stage("dnls"))?;
    let dnls_opts = NewtonOptions {
        tol: cfg.dnls_tol,
        ..NewtonOptions::dnls()
    };
    let (dnls, dnls_rep) = solve_dnls_ground_state(&prob, &psi, &dnls_opts).map_err(|e| e.in_stage("dnls"))?;
    let hessian = if cfg.hessian {
        Some(hessian_diagnostics(&dnls, &prob).map_err(|e| e.in_stage("dnls"))?)
    } else {
        None
    };

    let omega = continuum::omega(mu, m).map_err(|e| e.in_stage("range"))?;
    let nl = Nonlinearity::normalized(p);
    let ctx = RangeContext {
        op: RangeOperator::new(lat, omega, a, cfg.l_max, cfg.harmonics).map_err(|e| e.in_stage("range"))?,
        nl,
        col: Collocation::new(cfg.l_max, cfg.harmonics),
        opts: RangeOptions {
            tol: cfg.range_tol,
            max_iter: cfg.range_max_iter,
        },
    };
    let kopts = KernelOptions {
        newton: NewtonOptions {
            tol: cfg.kernel_tol,
            ..NewtonOptions::kernel()
        },
        without_remainder: false,
    };
    let sol = solve_kernel(&prob, &dnls, &ctx, &kopts).map_err(|e| e.in_stage("kernel"))?;

    let v = KernelField(sol.phi.scaled(mu.powf(1.0 / p)));
    let u = TimeFourierField::embed(&v, cfg.l_max, cfg.harmonics)?.add(&sol.w)?;

    let samples = cfg.samples();
    let residual = kg_residual(&u, a, omega, &nl, samples).map_err(|e| e.in_stage("validate"))?;
    let reference = error_vs_reference(&u, &psi, mu, p, omega, samples).map_err(|e| e.in_stage("validate"))?;
    let harmonic_norms = u.harmonic_norms();
    let h1 = harmonic_norms.iter().find(|(l, _)| *l == 1).map_or(0.0, |x| x.1);
    let harmonic1_dominant = harmonic_norms.iter().all(|&(l, x)| l == 1 || x < h1);
    let w = project_w(&u);
    let mu_n = mu.powi(n as i32);
    let report = BreatherReport {
        profile: Some(gs.meta()),
        k: grid.k(),
        sites: lat.len(),
        dnls: dnls_rep,
        hessian,
        kernel: sol.report,
        residual,
        reference,
        symmetry_error: symmetry_error(&u),
        harmonic1_dominant,
        harmonic_norms,
        norm_w_x2: w.norm_x2(),
        tail_fraction: ratio(w.norm_x0(), u.norm_x0()),
        reference_mass: mu_n * psi.dot(&psi),
        dnls_minus_reference_q_mu: dnls.sub(&psi)?.norm_q_mu(),
        kernel_minus_dnls_q_mu: sol.phi.sub(&dnls)?.norm_q_mu(),
    };
    Ok(Breather {
        params: params.clone(),
        config: cfg.clone(),
        mode,
        omega,
        m,
        nl,
        psi,
        dnls,
        phi: sol.phi,
        u,
        report,
    })
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Largest reflection defect over the stored harmonics of `u`.
pub fn symmetry_error(u: &TimeFourierField) -> f64 {
    u.harmonics()
        .iter()
        .map(|&l| u.harmonic_sequence(l).reflection_defect())
        .fold(0.0, f64::max)
}

/// Sample times `π(k + ½)/M`, `k < M`, covering the half period; cosine series are even
/// and `2π`-periodic, so this covers every time.
fn half_period_midpoints(m: usize) -> Vec<f64> {
    (0..m).map(|k| PI * (k as f64 + 0.5) / m as f64).collect()
}

/// Writes `Σ_l f(l) c_l cos(l t)` into `out`.
fn synthesize(u: &TimeFourierField, t: f64, f: impl Fn(f64) -> f64, out: &mut [f64]) {
    out.iter_mut().for_each(|x| *x = 0.0);
    for &l in u.harmonics() {
        let lf = l as f64;
        let c = f(lf) * (lf * t).cos();
        if c == 0.0 {
            continue;
        }
        for (o, x) in out.iter_mut().zip(u.harmonic(l).expect("stored")) {
            *o += c * x;
        }
    }
}

/// KG residual `r(t) = ω²u″ + u − aΔu − β|u|^{2p}u` of a rescaled-time field, over
/// `samples ≥ 4(L_max + 1)` midpoints of the half period.
pub fn kg_residual(u: &TimeFourierField, a: f64, omega: f64, nl: &Nonlinearity, samples: usize) -> Result<KgResidual> {
    let need = 4 * (u.l_max() + 1);
    if samples < need {
        return Err(Error::InvalidParameter(format!("{samples} time samples; need at least {need}")));
    }
    let lat = *u.lattice();
    let len = lat.len();
    let times = half_period_midpoints(samples);
    let w2 = omega * omega;

    // Band-limited residual of the collocated system: harmonic 1 carries the exact
    // projection of N(v cos t), as in the kernel equation.
    let col = Collocation::new(u.l_max(), u.set());
    let nu = col.apply_n(u, nl)?;
    let v = u.harmonic(1).ok_or_else(|| Error::GridMismatch("field lacks harmonic 1".into()))?;
    let nv = col.apply_n(&TimeFourierField::embed(&KernelField(u.harmonic_sequence(1)), u.l_max(), u.set())?, nl)?;
    let exact_scale = nl.beta * c1(nl.p) / PI;
    let mut rho = TimeFourierField::zeros(lat, u.l_max(), u.set())?;
    let mut lap = vec![0.0; len];
    for &l in u.harmonics() {
        let ul = u.harmonic(l).expect("stored");
        lat.laplacian_into(ul, &mut lap);
        let sym = 1.0 - w2 * (l * l) as f64;
        let nl_l = nu.harmonic(l).expect("stored");
        let out = rho.harmonic_mut(l).expect("stored");
        for j in 0..len {
            let mut r = sym * ul[j] - a * lap[j] - nl_l[j];
            if l == 1 {
                r += nv.harmonic(1).expect("stored")[j] - exact_scale * continuum::focusing_power(v[j], nl.p);
            }
            out[j] = r;
        }
    }

    let mut val = vec![0.0; len];
    let mut acc = vec![0.0; len];
    let mut pointwise: f64 = 0.0;
    let mut discrete: f64 = 0.0;
    for &t in &times {
        synthesize(u, t, |_| 1.0, &mut val);
        synthesize(u, t, |l| 1.0 - w2 * l * l, &mut acc);
        lat.laplacian_into(&val, &mut lap);
        for j in 0..len {
            let r = acc[j] - a * lap[j] - nl.eval(val[j]);
            pointwise = pointwise.max(r.abs());
        }
        synthesize(&rho, t, |_| 1.0, &mut val);
        discrete = val.iter().fold(discrete, |m, x| m.max(x.abs()));
    }
    Ok(KgResidual {
        pointwise,
        discrete,
        samples,
    })
}

/// Errors of `q(s) = u(ωs)` against `Ψ(s) = μ^{1/p} cos(ωs) ψ` over one period `T = 2π/ω`.
///
/// `e_H2² = Σ_l (1 + (ωl)² + (ωl)⁴)(w_l/ω)‖c_l‖²`, `e_sup` over `samples + 1`
/// equispaced times of the half period including both ends.
pub fn error_vs_reference(
    u: &TimeFourierField,
    psi: &SymmetricSequence,
    mu: f64,
    p: f64,
    omega: f64,
    samples: usize,
) -> Result<ReferenceError> {
    if psi.lattice() != u.lattice() {
        return Err(Error::GridMismatch("reference and breather live on different lattices".into()));
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one time sample".into()));
    }
    let mut diff = u.clone();
    let amp = mu.powf(1.0 / p);
    for (d, s) in diff
        .harmonic_mut(1)
        .ok_or_else(|| Error::GridMismatch("field lacks harmonic 1".into()))?
        .iter_mut()
        .zip(psi.values())
    {
        *d -= amp * s;
    }
    let lat = *u.lattice();
    let mut h2 = 0.0;
    let mut bound = 0.0;
    for &l in diff.harmonics() {
        let c = diff.harmonic_sequence(l);
        let wl = omega * l as f64;
        h2 += (1.0 + wl * wl + wl.powi(4)) * harmonic_weight(l) / omega * c.dot(&c);
        bound += 2.0 * mu.sqrt() * c.norm_q();
    }
    let mut val = vec![0.0; lat.len()];
    let mut e_sup: f64 = 0.0;
    for k in 0..=samples {
        synthesize(&diff, PI * k as f64 / samples as f64, |_| 1.0, &mut val);
        e_sup = val.iter().fold(e_sup, |m, x| m.max(x.abs()));
    }
    Ok(ReferenceError {
        e_h2: h2.sqrt(),
        e_sup,
        sobolev_bound: bound,
        chain_holds: e_sup <= bound * (1.0 + 1e-12) + f64::MIN_POSITIVE,
    })
}

/// Outcome of a leapfrog run.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct IntegrationReport {
    pub return_error: f64,
    /// `max_t |E(t) − E(0)| / |E(0)|`.
    pub energy_drift: f64,
    pub steps: usize,
    pub periods: usize,
    pub dt: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct IntegrationOptions {
    pub steps_per_period: usize,
    pub periods: usize,
    pub drift_bound: f64,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self {
            steps_per_period: 100_000,
            periods: 1,
            drift_bound: 1e-6,
        }
    }
}

/// Lattice energy `Σ D[½q̇² + V(q)] + (a/2)⟨q, −Δq⟩` with `V(s) = s²/2 − β|s|^{2p+2}/(2p+2)`.
fn energy(lat: &Lattice, q: &[f64], qd: &[f64], lap: &[f64], a: f64, nl: &Nonlinearity) -> f64 {
    let e = 2.0 * nl.p + 2.0;
    let local: Vec<f64> = q
        .iter()
        .zip(qd)
        .map(|(x, v)| 0.5 * v * v + 0.5 * x * x - nl.beta / e * x.abs().powf(e))
        .collect();
    let ones = vec![1.0; q.len()];
    lat.dot(&local, &ones) - 0.5 * a * lat.dot(q, lap)
}

/// Störmer–Verlet for `q̈ = aΔq − V′(q)` from `(q₀, 0)` over whole periods `2π/ω`.
///
/// Returns `‖q(T) − q₀‖/‖q₀‖ + ‖q̇(T)‖/(ω‖q₀‖)`, with `0/0 = 0`.
pub fn integrate_period(
    q0: &SymmetricSequence,
    a: f64,
    omega: f64,
    nl: &Nonlinearity,
    opts: &IntegrationOptions,
) -> Result<IntegrationReport> {
    if opts.steps_per_period == 0 || opts.periods == 0 {
        return Err(Error::InvalidParameter("need at least one step and one period".into()));
    }
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter(format!("omega = {omega} must be positive")));
    }
    let lat = *q0.lattice();
    let len = lat.len();
    let steps = opts.steps_per_period * opts.periods;
    let dt = 2.0 * PI / omega / opts.steps_per_period as f64;
    let mut q = q0.values().to_vec();
    let mut qd = vec![0.0; len];
    let mut lap = vec![0.0; len];
    let mut force = vec![0.0; len];
    let accel = |q: &[f64], lap: &mut [f64], force: &mut [f64]| {
        lat.laplacian_into(q, lap);
        for j in 0..q.len() {
            force[j] = a * lap[j] - q[j] + nl.eval(q[j]);
        }
    };
    accel(&q, &mut lap, &mut force);
    let e0 = energy(&lat, &q, &qd, &lap, a, nl);
    let scale = if e0 != 0.0 { e0.abs() } else { 1.0 };
    let mut drift: f64 = 0.0;
    for _ in 0..steps {
        for j in 0..len {
            qd[j] += 0.5 * dt * force[j];
            q[j] += dt * qd[j];
        }
        accel(&q, &mut lap, &mut force);
        for j in 0..len {
            qd[j] += 0.5 * dt * force[j];
        }
        let e = energy(&lat, &q, &qd, &lap, a, nl);
        drift = drift.max((e - e0).abs() / scale);
    }
    if !(drift <= opts.drift_bound) {
        return Err(Error::EnergyDrift {
            drift,
            bound: opts.drift_bound,
        });
    }
    let n0 = lat.dot(q0.values(), q0.values()).sqrt();
    let dq: Vec<f64> = q.iter().zip(q0.values()).map(|(x, y)| x - y).collect();
    let return_error = if n0 == 0.0 {
        0.0
    } else {
        lat.dot(&dq, &dq).sqrt() / n0 + lat.dot(&qd, &qd).sqrt() / (omega * n0)
    };
    Ok(IntegrationReport {
        return_error,
        energy_drift: drift,
        steps,
        periods: opts.periods,
        dt,
    })
}

impl Breather {
    /// `u(0)`, the initial displacement of the physical solution.
    pub fn initial_state(&self) -> SymmetricSequence {
        self.u.at_time(0.0)
    }

    /// `Ψ(0) = μ^{1/p} ψ`.
    pub fn reference_initial_state(&self) -> SymmetricSequence {
        self.psi.scaled(self.params.mu.powf(1.0 / self.params.p))
    }

    pub fn integrate(&self, opts: &IntegrationOptions) -> Result<IntegrationReport> {
        integrate_period(&self.initial_state(), self.params.a, self.omega, &self.nl, opts)
    }

    pub fn record(&self, field_file: &str) -> BreatherRecord {
        BreatherRecord {
            params: self.params.clone(),
            config: self.config.clone(),
            omega: self.omega,
            m: self.m,
            beta: self.nl.beta,
            report: self.report.clone(),
            field_file: field_file.to_string(),
        }
    }

    /// Writes `<stem>.json`, `<stem>.kgtf` (the field `u`) and `<stem>_phi.csv`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let field = format!("{stem}.kgtf");
        self.u.write_binary(BufWriter::new(File::create(dir.join(&field))?))?;
        crate::lattice::io::write_csv(&self.phi, BufWriter::new(File::create(dir.join(format!("{stem}_phi.csv")))?))?;
        let json = dir.join(format!("{stem}.json"));
        serde_json::to_writer_pretty(BufWriter::new(File::create(&json)?), &self.record(&field))?;
        Ok(json)
    }
}

/// The JSON side of a stored breather.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BreatherRecord {
    pub params: BreatherParams,
    pub config: BreatherConfig,
    pub omega: f64,
    pub m: f64,
    pub beta: f64,
    pub report: BreatherReport,
    /// Binary field file, relative to the JSON file.
    pub field_file: String,
}

/// Reads a breather record and its field.
pub fn load(json: &Path) -> Result<(BreatherRecord, TimeFourierField)> {
    let rec: BreatherRecord = serde_json::from_reader(BufReader::new(File::open(json)?))?;
    let dir = json.parent().unwrap_or_else(|| Path::new("."));
    let u = TimeFourierField::read_binary(BufReader::new(File::open(dir.join(&rec.field_file))?))?;
    Ok((rec, u))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValidationReport {
    pub residual: KgResidual,
    pub reference: ReferenceError,
    pub symmetry_error: f64,
    pub integration: Option<IntegrationReport>,
    /// The same run seeded with `Ψ(0)`.
    pub reference_integration: Option<IntegrationReport>,
}

/// Re-checks a stored breather independently of the solver state.
pub fn validate(rec: &BreatherRecord, u: &TimeFourierField, integrate: Option<&IntegrationOptions>) -> Result<ValidationReport> {
    let params = &rec.params;
    params.check()?;
    let nl = Nonlinearity {
        p: params.p,
        beta: rec.beta,
    };
    let samples = rec.config.samples().max(4 * (u.l_max() + 1));
    let residual = kg_residual(u, params.a, rec.omega, &nl, samples)?;
    let gs = continuum::solve_ground_state(params.n, params.p, rec.config.profile_tol).map_err(|e| e.in_stage("continuum"))?;
    let psi = continuum::sample_reference(&gs, *u.lattice().grid(), params.mode_spec()?, params.a.sqrt())?;
    if psi.lattice() != u.lattice() {
        return Err(Error::GridMismatch("stored field does not match the mode lattice".into()));
    }
    let reference = error_vs_reference(u, &psi, params.mu, params.p, rec.omega, samples)?;
    let (integration, reference_integration) = match integrate {
        Some(opts) => {
            let q = integrate_period(&u.at_time(0.0), params.a, rec.omega, &nl, opts)?;
            let r = integrate_period(&psi.scaled(params.mu.powf(1.0 / params.p)), params.a, rec.omega, &nl, opts)?;
            (Some(q), Some(r))
        }
        None => (None, None),
    };
    Ok(ValidationReport {
        residual,
        reference,
        symmetry_error: symmetry_error(u),
        integration,
        reference_integration,
    })
}

/// One μ of a scaling study.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ScalingRow {
    pub mu: f64,
    pub e_h2: f64,
    pub e_sup: f64,
    pub norm_w_x2: f64,
    pub tail_fraction: f64,
    pub dnls_minus_reference_q_mu: f64,
    pub kernel_minus_dnls_q_mu: f64,
    pub remainder_at_dnls: f64,
    pub residual_pointwise: f64,
    pub residual_discrete: f64,
    pub chain_holds: bool,
    pub harmonic1_dominant: bool,
    /// Failure message; the row is excluded from the fits.
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SlopeEntry {
    pub quantity: String,
    /// Predicted exponent, where one exists.
    pub target: Option<f64>,
    pub fit: Option<SlopeFit>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalingTable {
    pub n: usize,
    pub p: f64,
    pub a: f64,
    pub mode: String,
    pub rows: Vec<ScalingRow>,
    pub slopes: Vec<SlopeEntry>,
}

/// Quantities fitted against μ, with their predicted exponents.
fn fitted_quantities(n: usize, p: f64) -> Vec<(&'static str, Option<f64>, fn(&ScalingRow) -> f64)> {
    let nf = n as f64;
    let r = 1.0 / p - nf / 2.0 + 1.0;
    vec![
        ("e_h2", Some(r), |x| x.e_h2),
        ("e_sup", Some(r + 0.5), |x| x.e_sup),
        ("norm_w_x2", Some(r + 1.0), |x| x.norm_w_x2),
        ("tail_fraction", None, |x| x.tail_fraction),
        ("dnls_minus_reference_q_mu", Some(1.0), |x| x.dnls_minus_reference_q_mu),
        ("kernel_minus_dnls_q_mu", Some(2.0 - nf / 2.0), |x| x.kernel_minus_dnls_q_mu),
        ("remainder_at_dnls", Some(2.0 - nf / 2.0), |x| x.remainder_at_dnls),
    ]
}

impl ScalingTable {
    pub fn slope(&self, quantity: &str) -> Option<&SlopeFit> {
        self.slopes.iter().find(|s| s.quantity == quantity)?.fit.as_ref()
    }

    pub fn survivors(&self) -> impl Iterator<Item = &ScalingRow> {
        self.rows.iter().filter(|r| r.error.is_none())
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for row in &self.rows {
            wr.serialize(row)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Runs `assemble` for every μ (concurrently) and fits log-log slopes on the survivors.
pub fn scaling_study(
    n: usize,
    p: f64,
    a: f64,
    mode: &str,
    mu_list: &[f64],
    cfg: &BreatherConfig,
) -> Result<ScalingTable> {
    if mu_list.len() < 4 {
        return Err(Error::InvalidParameter(format!("{} values of mu; a study needs 4", mu_list.len())));
    }
    if mu_list.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::InvalidParameter("mu list must be strictly decreasing".into()));
    }
    let base = BreatherParams {
        n,
        p,
        a,
        mu: mu_list[0],
        mode: mode.to_string(),
    };
    base.check()?;
    let gs = continuum::solve_ground_state(n, p, cfg.profile_tol).map_err(|e| e.in_stage("continuum"))?;
    let rows: Vec<ScalingRow> = mu_list
        .par_iter()
        .map(|&mu| {
            let params = BreatherParams { mu, ..base.clone() };
            match assemble_with_profile(&gs, &params, cfg) {
                Ok(b) => {
                    let r = &b.report;
                    ScalingRow {
                        mu,
                        e_h2: r.reference.e_h2,
                        e_sup: r.reference.e_sup,
                        norm_w_x2: r.norm_w_x2,
                        tail_fraction: r.tail_fraction,
                        dnls_minus_reference_q_mu: r.dnls_minus_reference_q_mu,
                        kernel_minus_dnls_q_mu: r.kernel_minus_dnls_q_mu,
                        remainder_at_dnls: r.kernel.remainder_at_dnls,
                        residual_pointwise: r.residual.pointwise,
                        residual_discrete: r.residual.discrete,
                        chain_holds: r.reference.chain_holds,
                        harmonic1_dominant: r.harmonic1_dominant,
                        error: None,
                    }
                }
                Err(e) => ScalingRow {
                    mu,
                    error: Some(e.to_string()),
                    ..ScalingRow::default()
                },
            }
        })
        .collect();
    let ok: Vec<&ScalingRow> = rows.iter().filter(|r| r.error.is_none()).collect();
    let mus: Vec<f64> = ok.iter().map(|r| r.mu).collect();
    let slopes = fitted_quantities(n, p)
        .into_iter()
        .map(|(name, target, get)| {
            let ys: Vec<f64> = ok.iter().map(|r| get(r)).collect();
            let fit = if ok.len() >= 4 { fit_loglog(&mus, &ys).ok() } else { None };
            SlopeEntry {
                quantity: name.to_string(),
                target,
                fit,
            }
        })
        .collect();
    Ok(ScalingTable {
        n,
        p,
        a,
        mode: mode.to_string(),
        rows,
        slopes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Offset;
    use crate::lattice::Symmetry;

    fn lattice_1d(k: usize, mu: f64) -> Lattice {
        Lattice::new(GridSpec::with_decay_budget(1, k, mu, 0.0).unwrap(), Symmetry::new(&[Offset::Site]).unwrap()).unwrap()
    }

    fn small_params(mode: &str) -> (BreatherParams, BreatherConfig) {
        let params = BreatherParams {
            n: 1,
            p: 1.0,
            a: 0.25,
            mu: 0.2,
            mode: mode.into(),
        };
        let cfg = BreatherConfig {
            decay_budget: 40.0,
            hessian: false,
            ..BreatherConfig::default()
        };
        (params, cfg)
    }

    #[test]
    fn zero_field_has_zero_residual_and_return_error() {
        let lat = lattice_1d(20, 0.5);
        let u = TimeFourierField::zeros(lat, 15, HarmonicSet::Odd).unwrap();
        let nl = Nonlinearity::normalized(1.0);
        let r = kg_residual(&u, 0.25, 0.99, &nl, 64).unwrap();
        assert_eq!(r.pointwise, 0.0);
        assert_eq!(r.discrete, 0.0);
        assert!(kg_residual(&u, 0.25, 0.99, &nl, 63).is_err());
        let rep = integrate_period(&u.at_time(0.0), 0.25, 0.99, &nl, &IntegrationOptions {
            steps_per_period: 100,
            ..IntegrationOptions::default()
        })
        .unwrap();
        assert_eq!(rep.return_error, 0.0);
    }

    #[test]
    fn linear_mode_residual_matches_hand_value() {
        // Single site excited in harmonic 1, decoupled lattice: r(t) = (1 − ω²)c cos t − β c³cos³t.
        let lat = lattice_1d(20, 0.5);
        let mut u = TimeFourierField::zeros(lat, 3, HarmonicSet::Odd).unwrap();
        let c = 1e-3;
        u.harmonic_mut(1).unwrap()[0] = c;
        let nl = Nonlinearity { p: 1.0, beta: 1.0 };
        let omega: f64 = 0.9;
        let samples = 400;
        let r = kg_residual(&u, 0.0, omega, &nl, samples).unwrap();
        let expect = half_period_midpoints(samples)
            .iter()
            .map(|t| ((1.0 - omega * omega) * c * t.cos() - (c * t.cos()).powi(3)).abs())
            .fold(0.0, f64::max);
        assert!((r.pointwise - expect).abs() < 1e-15);
    }

    #[test]
    fn reference_error_of_reference_is_zero() {
        let lat = lattice_1d(30, 0.2);
        let psi = SymmetricSequence::from_positions(lat, |x| (-x[0] * x[0]).exp()).unwrap();
        let (mu, p) = (0.2, 1.0);
        let u = TimeFourierField::embed(&KernelField(psi.scaled(mu)), 5, HarmonicSet::Odd).unwrap();
        let e = error_vs_reference(&u, &psi, mu, p, 0.99, 64).unwrap();
        assert_eq!(e.e_h2, 0.0);
        assert_eq!(e.e_sup, 0.0);
        assert!(e.chain_holds);
    }

    #[test]
    fn reference_error_hand_value() {
        // Difference c δ₀ in harmonic 3 only: e_H2² = (1 + 9ω² + 81ω⁴)(π/ω)c², e_sup = c.
        let lat = lattice_1d(30, 0.2);
        let psi = SymmetricSequence::zeros(lat);
        let mut u = TimeFourierField::zeros(lat, 5, HarmonicSet::Odd).unwrap();
        let c = 0.01;
        u.harmonic_mut(3).unwrap()[0] = c;
        let w: f64 = 0.95;
        let e = error_vs_reference(&u, &psi, 0.2, 1.0, w, 64).unwrap();
        let expect = ((1.0 + 9.0 * w * w + 81.0 * w.powi(4)) * PI / w).sqrt() * c;
        assert!((e.e_h2 - expect).abs() < 1e-15);
        assert!((e.e_sup - c).abs() < 1e-15);
        assert!(e.chain_holds);
        let other = lattice_1d(31, 0.2);
        assert!(error_vs_reference(&u, &SymmetricSequence::zeros(other), 0.2, 1.0, w, 64).is_err());
    }

    #[test]
    fn leapfrog_linear_oscillator_returns() {
        // Decoupled site with β = 0: q = q₀ cos s, period 2π.
        let lat = lattice_1d(10, 0.5);
        let mut q0 = vec![0.0; lat.len()];
        q0[0] = 0.3;
        let q0 = SymmetricSequence::from_values(lat, q0).unwrap();
        let nl = Nonlinearity { p: 1.0, beta: 0.0 };
        let run = |steps| {
            integrate_period(&q0, 0.0, 1.0, &nl, &IntegrationOptions {
                steps_per_period: steps,
                periods: 1,
                drift_bound: 1e-3,
            })
            .unwrap()
        };
        let coarse = run(1000);
        let fine = run(2000);
        // Second order: halving the step quarters the error.
        let order = (coarse.return_error / fine.return_error).log2();
        assert!((order - 2.0).abs() < 0.1, "order {order}");
        assert!(fine.energy_drift < 1e-5);
    }

    #[test]
    fn energy_drift_guard_trips() {
        let lat = lattice_1d(10, 0.5);
        let mut q0 = vec![0.0; lat.len()];
        q0[0] = 0.3;
        let q0 = SymmetricSequence::from_values(lat, q0).unwrap();
        let nl = Nonlinearity { p: 1.0, beta: 0.0 };
        let err = integrate_period(&q0, 0.0, 1.0, &nl, &IntegrationOptions {
            steps_per_period: 10,
            periods: 1,
            drift_bound: 1e-12,
        })
        .unwrap_err();
        assert!(matches!(err, Error::EnergyDrift { .. }));
    }

    #[test]
    fn assembled_breather_small_grid() {
        let (params, cfg) = small_params("st");
        let b = assemble(&params, &cfg).unwrap();
        let r = &b.report;
        assert!(r.residual.pointwise < 1e-10, "{:?}", r.residual);
        assert!(r.residual.discrete < 1e-10, "{:?}", r.residual);
        assert!(r.harmonic1_dominant);
        assert!(r.symmetry_error < 1e-13);
        assert!(r.reference.chain_holds);
        assert!((b.omega - (1.0 - b.m * 0.04f64).sqrt()).abs() < 1e-15);
        // Harmonic 1 of u is μ^{1/p} φ.
        let h1 = b.u.harmonic(1).unwrap();
        for (x, y) in h1.iter().zip(b.phi.values()) {
            assert!((x - 0.2 * y).abs() <= 1e-16 * x.abs().max(1e-300) + 1e-18);
        }
    }

    #[test]
    fn assemble_is_deterministic() {
        let (params, cfg) = small_params("p");
        let a = assemble(&params, &cfg).unwrap();
        let b = assemble(&params, &cfg).unwrap();
        assert_eq!(a.u, b.u);
    }

    #[test]
    fn assemble_tags_the_failing_stage() {
        let (mut params, cfg) = small_params("st");
        params.a = 0.7;
        assert!(matches!(assemble(&params, &cfg), Err(Error::InvalidParameter(_))));
        params.a = 0.25;
        params.mu = 0.2;
        let tight = BreatherConfig {
            range_max_iter: 1,
            ..cfg
        };
        let err = assemble(&params, &tight).unwrap_err();
        assert!(matches!(err, Error::Stage { stage: "kernel", .. }), "{err}");
    }

    #[test]
    fn record_round_trip() {
        let (params, cfg) = small_params("st");
        let b = assemble(&params, &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let json = b.write(dir.path(), "st").unwrap();
        let (rec, u) = load(&json).unwrap();
        assert_eq!(u, b.u);
        assert_eq!(rec.params, params);
        let v = validate(&rec, &u, None).unwrap();
        assert_eq!(v.residual.pointwise, b.report.residual.pointwise);
        assert_eq!(v.reference.e_h2, b.report.reference.e_h2);
    }
}
