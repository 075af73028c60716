//! Full-run orchestration: trajectories with per-step diagnostics,
//! self-convergence refinement studies, defect-rate studies and the
//! empirical step-size threshold.
//!
//! A trajectory is advanced in coefficient space. The maintained spectrum
//! has exact zeros wherever the field has no content, which is what keeps
//! the modified-energy weights finite, and it pins the mass (the `k = 0`
//! coefficient) bit for bit across the whole run.
//!
//! For the linear-first composition the modified energy is monitored at
//! the linearly smoothed points `S_L u^n`: those form an orbit of the
//! nonlinear-first scheme, and the raw `S_N` images carry fresh cubic tail
//! the energy's growing weights do not control.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::energy::{
    self, StabilityCertificate, certificate_from_parts, e1_quadratic, potential_energy,
};
use crate::error::{Error, Result};
use crate::field::{C64, RealField, SpectralField};
use crate::fit::log_log_slope;
use crate::grid::Grid2D;
use crate::norms::sobolev_norm;
use crate::propagators::{SolverParams, SplitOrder, Stepper};
use crate::transform::Workspace;

/// Runs abort (flagged unstable) once the sup norm passes this.
pub const BLOWUP_GUARD: f64 = 1e6;

/// One explicit Fourier mode of an initial field:
/// `amplitude * cos(k . x + phase)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeSpec {
    pub k: (i64, i64),
    pub amplitude: f64,
    pub phase: f64,
}

/// How initial data is produced. Every variant yields a real, mean-zero
/// field.
#[derive(Clone, Debug)]
pub enum InitialDataSpec {
    /// Sum of explicit cosine modes.
    Modes(Vec<ModeSpec>),
    /// Seeded random field supported on `0 < |k|_inf <= band`, scaled to a
    /// prescribed `H^1` norm.
    RandomBandLimited { seed: u64, band: u32, h1_norm: f64 },
    /// A pre-loaded field (e.g. from a snapshot); its mean is removed and
    /// the transform's round-off floor is cleared.
    Field(RealField),
}

impl InitialDataSpec {
    /// Build the spectral representation on `grid`. Modes and random data
    /// are exact outside their band.
    pub fn realize(&self, grid: Grid2D, ws: &mut Workspace) -> Result<SpectralField> {
        match self {
            InitialDataSpec::Modes(modes) => {
                if modes.is_empty() {
                    return Err(Error::Params("mode list is empty".into()));
                }
                let mut spec = SpectralField::zeros(grid);
                let half = grid.n() as i64 / 2;
                let area = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
                for m in modes {
                    let (k1, k2) = m.k;
                    if k1 == 0 && k2 == 0 {
                        return Err(Error::Params(
                            "mode k = (0, 0) violates the mean-zero constraint".into(),
                        ));
                    }
                    if k1.abs() >= half || k2.abs() >= half {
                        return Err(Error::Params(format!(
                            "mode k = ({k1}, {k2}) outside the paired lattice for n = {}",
                            grid.n()
                        )));
                    }
                    if !(m.amplitude.is_finite() && m.phase.is_finite()) {
                        return Err(Error::Params("mode amplitude/phase must be finite".into()));
                    }
                    // amplitude cos(k.x + phase) has coefficient
                    // (amplitude/2) e^{i phase} (2 pi)^2 at k
                    let c = C64::from_polar(0.5 * m.amplitude * area, m.phase);
                    let prev = spec.coeff(k1, k2);
                    spec.set_coeff(k1, k2, prev + c);
                    let prev = spec.coeff(-k1, -k2);
                    spec.set_coeff(-k1, -k2, prev + c.conj());
                }
                Ok(spec)
            }
            InitialDataSpec::RandomBandLimited {
                seed,
                band,
                h1_norm,
            } => random_band_limited(grid, *seed, *band, *h1_norm),
            InitialDataSpec::Field(f) => {
                if f.grid() != grid {
                    return Err(Error::Params(format!(
                        "field grid n = {} does not match requested n = {}",
                        f.grid().n(),
                        grid.n()
                    )));
                }
                let mut spec = ws.forward(f)?;
                spec.set_coeff(0, 0, C64::new(0.0, 0.0));
                spec.denoise(energy::COEFF_NOISE_RTOL);
                Ok(spec)
            }
        }
    }
}

/// Random mean-zero field with uniformly drawn mode amplitudes in
/// `[0.5, 1.5)` and phases, scaled to `||.||_{H^1} = h1_norm`.
/// Deterministic in the seed.
pub fn random_band_limited(
    grid: Grid2D,
    seed: u64,
    band: u32,
    h1_norm: f64,
) -> Result<SpectralField> {
    let half = grid.n() as i64 / 2;
    if band == 0 || (band as i64) >= half {
        return Err(Error::Params(format!(
            "band must satisfy 1 <= band < n/2, got band = {band}, n = {}",
            grid.n()
        )));
    }
    if !(h1_norm > 0.0 && h1_norm.is_finite()) {
        return Err(Error::Params(format!(
            "target H^1 norm must be positive, got {h1_norm}"
        )));
    }
    let b = band as i64;
    let area = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spec = SpectralField::zeros(grid);
    // one draw per mode pair, visiting the lexicographically positive half
    for k1 in 0..=b {
        let k2_range: Vec<i64> = if k1 == 0 {
            (1..=b).collect()
        } else {
            (-b..=b).collect()
        };
        for k2 in k2_range {
            let amp: f64 = rng.gen_range(0.5..1.5);
            let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let c = C64::from_polar(0.5 * amp * area, phase);
            spec.set_coeff(k1, k2, c);
            spec.set_coeff(-k1, -k2, c.conj());
        }
    }
    let h1 = sobolev_norm(&spec, 1.0);
    let scale = h1_norm / h1;
    for c in spec.coeffs_mut() {
        *c *= scale;
    }
    Ok(spec)
}

/// Per-step diagnostics record. Energy columns whose quadratic part
/// overflows are `NaN` with an indeterminate (absent) certificate.
#[derive(Clone, Copy, Debug)]
pub struct StepRecord {
    pub step: u64,
    pub time: f64,
    pub mass: f64,
    pub e_classical: f64,
    pub e1_quadratic: f64,
    pub e1_potential: f64,
    pub e1_total: f64,
    pub linf: f64,
    pub h1: f64,
    pub hk0: f64,
    /// `||u^n - u^{n-1}||_2` of the actual iterates.
    pub inc_l2: f64,
    pub cert: Option<StabilityCertificate>,
}

#[derive(Clone, Debug)]
pub struct RunDiagnostics {
    pub params: SolverParams,
    pub k0: u32,
    pub records: Vec<StepRecord>,
    /// Step at which the blow-up guard tripped, if it did.
    pub unstable_at: Option<u64>,
}

impl RunDiagnostics {
    pub fn is_unstable(&self) -> bool {
        self.unstable_at.is_some()
    }
}

struct CertPoint {
    spec: SpectralField,
    nodes: RealField,
    e1_quad: Option<f64>,
    e1_pot: f64,
}

impl CertPoint {
    fn new(spec: SpectralField, nodes: RealField, p: &SolverParams) -> Self {
        let e1_quad = e1_quadratic(&spec, p.nu, p.tau).ok();
        let e1_pot = potential_energy(&nodes);
        Self {
            spec,
            nodes,
            e1_quad,
            e1_pot,
        }
    }

    fn e1_total(&self) -> Option<f64> {
        self.e1_quad.map(|q| q + self.e1_pot)
    }
}

/// Advance `steps` steps from `u0`, recording one diagnostics row per step
/// and certifying every consecutive pair of monitored points. Aborts with
/// partial records (flagged unstable) if the sup norm passes the guard;
/// that is the expected outcome above the step-size threshold, not an
/// error.
pub fn run(
    u0: &InitialDataSpec,
    p: &SolverParams,
    steps: usize,
    k0: u32,
    ws: &mut Workspace,
) -> Result<RunDiagnostics> {
    run_observed(u0, p, steps, k0, ws, &mut |_, _| Ok(()))
}

/// [`run`] with a per-step observer that sees the iterate's nodal values
/// (snapshot writers hook in here). An observer error aborts the run.
pub fn run_observed(
    u0: &InitialDataSpec,
    p: &SolverParams,
    steps: usize,
    k0: u32,
    ws: &mut Workspace,
    observer: &mut dyn FnMut(u64, &RealField) -> Result<()>,
) -> Result<RunDiagnostics> {
    p.validate()?;
    if steps == 0 {
        return Err(Error::Params("steps must be >= 1".into()));
    }
    let grid = p.grid();
    let stepper = Stepper::new(p)?;
    let state0 = u0.realize(grid, ws)?;
    state0.require_mean_zero()?;
    let (nodes0, _) = ws.inverse_raw(&state0);

    // monitored chain: the state itself (nonlinear-first order) or its
    // linear smoothing (linear-first order); in either case it obeys
    // x -> S_L(S_N(x)), and for the linear-first order the actual iterate
    // is recovered as u^n = S_N(monitored^{n-1})
    let mut state_nodes = nodes0.clone();
    let mut cert_prev = match p.order {
        SplitOrder::Ln => CertPoint::new(state0, nodes0, p),
        SplitOrder::Nl => {
            let c = stepper.apply_linear(&state0);
            let (cn, _) = ws.inverse_raw(&c);
            CertPoint::new(c, cn, p)
        }
    };

    let mut records = Vec::with_capacity(steps);
    let mut unstable_at = None;

    for n in 1..=steps as u64 {
        // state diagnostics for this step (mass, classical energy, norms)
        let (cert, state_mass, state_gradient, state_h1, state_hk0, next_nodes) = match p.order {
            SplitOrder::Ln => {
                let inner = stepper.nonlinear_inner(&cert_prev.spec, ws);
                let next = stepper.apply_linear(&inner);
                let (nn, _) = ws.inverse_raw(&next);
                let mass = next.mass();
                let grad = energy::gradient_energy(&next, p.nu);
                let h1 = sobolev_norm(&next, 1.0);
                let hk0 = sobolev_norm(&next, k0 as f64);
                let cert = CertPoint::new(next, nn.clone(), p);
                (cert, mass, grad, h1, hk0, nn)
            }
            SplitOrder::Nl => {
                let next = stepper.nonlinear_inner(&cert_prev.spec, ws);
                let (nn, _) = ws.inverse_raw(&next);
                let mass = next.mass();
                let grad = energy::gradient_energy(&next, p.nu);
                let h1 = sobolev_norm(&next, 1.0);
                let hk0 = sobolev_norm(&next, k0 as f64);
                let c = stepper.apply_linear(&next);
                let (cn, _) = ws.inverse_raw(&c);
                (CertPoint::new(c, cn, p), mass, grad, h1, hk0, nn)
            }
        };

        let cert_record = match (cert_prev.e1_total(), cert.e1_total()) {
            (Some(e1_w), Some(e1_u)) => {
                let inc = cert_prev.nodes.l2_distance(&cert.nodes);
                Some(certificate_from_parts(
                    n,
                    e1_w,
                    e1_u,
                    inc * inc,
                    cert_prev.nodes.linf(),
                    cert.nodes.linf(),
                    p,
                ))
            }
            _ => None,
        };

        let linf = next_nodes.linf();
        records.push(StepRecord {
            step: n,
            time: n as f64 * p.tau,
            mass: state_mass,
            e_classical: state_gradient + potential_energy(&next_nodes),
            e1_quadratic: cert.e1_quad.unwrap_or(f64::NAN),
            e1_potential: cert.e1_pot,
            e1_total: cert.e1_total().unwrap_or(f64::NAN),
            linf,
            h1: state_h1,
            hk0: state_hk0,
            inc_l2: state_nodes.l2_distance(&next_nodes),
            cert: cert_record,
        });
        observer(n, &next_nodes)?;

        if !linf.is_finite() || linf > BLOWUP_GUARD {
            unstable_at = Some(n);
            break;
        }

        state_nodes = next_nodes;
        cert_prev = cert;
    }

    Ok(RunDiagnostics {
        params: *p,
        k0,
        records,
        unstable_at,
    })
}

// -- step-size threshold ---------------------------------------------------

/// Probe one step size: does the modified energy decay monotonically along
/// the monitored chain for `probe_steps` steps? Blow-up or an undefined
/// energy counts as failure.
pub(crate) fn e1_monotone_probe(
    u0_spec: &SpectralField,
    p: &SolverParams,
    probe_steps: usize,
    ws: &mut Workspace,
) -> Result<bool> {
    let stepper = Stepper::new(p)?;
    // the monitored chain obeys x -> S_L(S_N(x)) for either order
    let mut x = match p.order {
        SplitOrder::Ln => u0_spec.clone(),
        SplitOrder::Nl => stepper.apply_linear(u0_spec),
    };
    let mut prev_e1: Option<f64> = None;
    for _ in 1..=probe_steps {
        let inner = stepper.nonlinear_inner(&x, ws);
        x = stepper.apply_linear(&inner);
        let (nodes, _) = ws.inverse_raw(&x);
        let linf = nodes.linf();
        if !linf.is_finite() || linf > BLOWUP_GUARD {
            return Ok(false);
        }
        let e1 = match e1_quadratic(&x, p.nu, p.tau) {
            Ok(q) => q + potential_energy(&nodes),
            Err(_) => return Ok(false),
        };
        if let Some(prev) = prev_e1 {
            if e1 > prev + energy::CERT_SLACK * (1.0 + prev) {
                return Ok(false);
            }
        }
        prev_e1 = Some(e1);
    }
    Ok(true)
}

/// Largest step size (to the bracket tolerance) for which the monitored
/// energy decays monotonically over the probe horizon. The bracket bottom
/// must decay, else it is rejected; if the top also decays the result is
/// only a lower bound.
pub(crate) fn tau_star_bisection_spec(
    u0_spec: &SpectralField,
    p: &SolverParams,
    opts: &crate::energy::BisectOpts,
    ws: &mut Workspace,
) -> Result<crate::energy::TauStarEstimate> {
    use crate::energy::TauStarEstimate;
    if !(opts.tau_lo > 0.0 && opts.tau_hi > opts.tau_lo && opts.rel_tol > 0.0) {
        return Err(Error::Params(format!(
            "bad bracket [{}, {}] or tolerance {}",
            opts.tau_lo, opts.tau_hi, opts.rel_tol
        )));
    }
    if opts.probe_steps < 2 {
        return Err(Error::Params("probe_steps must be >= 2".into()));
    }
    if !e1_monotone_probe(u0_spec, &p.with_tau(opts.tau_lo), opts.probe_steps, ws)? {
        return Err(Error::BracketRejected {
            tau_lo: opts.tau_lo,
        });
    }
    if e1_monotone_probe(u0_spec, &p.with_tau(opts.tau_hi), opts.probe_steps, ws)? {
        return Ok(TauStarEstimate::AtLeast(opts.tau_hi));
    }
    let mut lo = opts.tau_lo;
    let mut hi = opts.tau_hi;
    while hi / lo - 1.0 > opts.rel_tol {
        let mid = (lo * hi).sqrt();
        if e1_monotone_probe(u0_spec, &p.with_tau(mid), opts.probe_steps, ws)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(TauStarEstimate::Bracketed(lo))
}

/// Bisection entry point on an initial-data spec; see
/// [`crate::energy::threshold`] for the estimate that pairs this with the
/// formula value.
pub fn tau_star_bisection(
    u0: &InitialDataSpec,
    p: &SolverParams,
    probe_steps: usize,
    bracket: (f64, f64),
    ws: &mut Workspace,
) -> Result<crate::energy::TauStarEstimate> {
    p.validate()?;
    let spec = u0.realize(p.grid(), ws)?;
    let opts = crate::energy::BisectOpts {
        tau_lo: bracket.0,
        tau_hi: bracket.1,
        probe_steps,
        ..Default::default()
    };
    tau_star_bisection_spec(&spec, p, &opts, ws)
}

// -- convergence study -------------------------------------------------

#[derive(Clone, Debug)]
pub struct ConvergenceStudy {
    pub taus: Vec<f64>,
    /// `sup_{n >= 1, n tau <= T} ||u^n_tau - u_ref(n tau)||_2` per tau.
    pub errors: Vec<f64>,
    pub fitted_order: f64,
    pub t_horizon: f64,
    pub reference_spec: String,
}

fn exact_multiple(whole: f64, part: f64) -> Result<u64> {
    let q = whole / part;
    let r = q.round();
    if r < 1.0 || (q - r).abs() > 1e-9 * q.max(1.0) {
        return Err(Error::NonDivisible {
            tau: part,
            base: whole,
        });
    }
    Ok(r as u64)
}

/// Self-convergence refinement study: one reference trajectory at
/// `tau_ref` (default `min(taus)/32`), with every coarse run advanced in
/// lockstep and compared at its own step times. All `taus` must divide `T`
/// and be multiples of `tau_ref`; no interpolation in time happens.
pub fn convergence_study(
    u0: &InitialDataSpec,
    p: &SolverParams,
    t_horizon: f64,
    taus: &[f64],
    tau_ref: Option<f64>,
    ws: &mut Workspace,
) -> Result<ConvergenceStudy> {
    p.validate()?;
    if taus.len() < 2 {
        return Err(Error::Params("convergence study needs >= 2 taus".into()));
    }
    if !(t_horizon > 0.0 && t_horizon.is_finite()) {
        return Err(Error::Params(format!("bad horizon T = {t_horizon}")));
    }
    let tau_min = taus.iter().cloned().fold(f64::MAX, f64::min);
    if !(tau_min > 0.0) {
        return Err(Error::Params("taus must be positive".into()));
    }
    let tau_ref = tau_ref.unwrap_or(tau_min / 32.0);
    if tau_ref > tau_min / 32.0 * (1.0 + 1e-12) {
        return Err(Error::Params(format!(
            "tau_ref = {tau_ref:.3e} must be at most min(taus)/32 = {:.3e}",
            tau_min / 32.0
        )));
    }

    let ref_steps = exact_multiple(t_horizon, tau_ref)?;
    let mut strides = Vec::with_capacity(taus.len());
    for &tau in taus {
        exact_multiple(t_horizon, tau)?;
        strides.push(exact_multiple(tau, tau_ref)?);
    }

    let grid = p.grid();
    let u0_spec = u0.realize(grid, ws)?;

    let ref_stepper = Stepper::new(&p.with_tau(tau_ref))?;
    let coarse_steppers: Vec<Stepper> = taus
        .iter()
        .map(|&tau| Stepper::new(&p.with_tau(tau)))
        .collect::<Result<_>>()?;

    let mut ref_state = u0_spec.clone();
    let mut coarse_states: Vec<SpectralField> = vec![u0_spec; taus.len()];
    let mut errors = vec![0.0_f64; taus.len()];

    for r in 1..=ref_steps {
        ref_state = ref_stepper.composed(&ref_state, ws);
        for (j, stride) in strides.iter().enumerate() {
            if r % stride == 0 {
                coarse_states[j] = coarse_steppers[j].composed(&coarse_states[j], ws);
                errors[j] = errors[j].max(coarse_states[j].l2_distance(&ref_state));
            }
        }
    }

    let fitted_order = log_log_slope(taus, &errors)?;
    Ok(ConvergenceStudy {
        taus: taus.to_vec(),
        errors,
        fitted_order,
        t_horizon,
        reference_spec: format!("self-convergence, tau_ref = {tau_ref:.6e}"),
    })
}

// -- defect-rate study ----------------------------------------------------

#[derive(Clone, Debug)]
pub struct DefectRateStudy {
    pub taus: Vec<f64>,
    pub defects: Vec<f64>,
    /// Least-squares slope of `log ||g||_2` against `log tau`.
    pub slope: f64,
}

/// Size of the one-step defect at the initial field across a `tau` sweep.
pub fn defect_rate_study(
    u0: &InitialDataSpec,
    p: &SolverParams,
    taus: &[f64],
    ws: &mut Workspace,
) -> Result<DefectRateStudy> {
    p.validate()?;
    if taus.len() < 2 {
        return Err(Error::Params("defect study needs >= 2 taus".into()));
    }
    let spec = u0.realize(p.grid(), ws)?;
    let mut defects = Vec::with_capacity(taus.len());
    for &tau in taus {
        let stepper = Stepper::new(&p.with_tau(tau))?;
        let g = stepper.defect(&spec, ws);
        defects.push(g.l2());
    }
    let slope = log_log_slope(taus, &defects)?;
    Ok(DefectRateStudy {
        taus: taus.to_vec(),
        defects,
        slope,
    })
}
