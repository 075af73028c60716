//! Periodic biharmonic heat kernels and smoothing-constant measurements.
//!
//! `K = F^{-1}(exp(-beta |k|^4))` is the kernel of `exp(-beta Delta^2)` on
//! the torus; its mean-zero part `K~` drops the `k = 0` mode, so
//! `K - K~ = (2 pi)^{-2}` identically. As `beta -> 0` the `L^p` norms of
//! `K~` scale like `beta^{-2(1/4 - 1/(4p))}`; `kernel_norm_sweep` measures
//! the exponent by regression over a `beta` sweep.

use crate::error::{Error, Result};
use crate::field::{C64, RealField, SpectralField};
use crate::fit::log_log_slope;
use crate::grid::Grid2D;
use crate::norms::lp_norm;
use crate::propagators::SolverParams;
use crate::sweep;
use crate::transform::Workspace;

/// `exp(-beta (n/3)^4) < 1e-14`: spectral content above the dealias band
/// must be negligible before node values of the kernel mean anything.
const RESOLUTION_LOG: f64 = 32.236191301916641; // ln(1e14)

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelVariant {
    /// `F^{-1}(exp(-beta |k|^4))`.
    Full,
    /// The mean-zero part: zero mode removed.
    MeanZero,
}

/// One point of a kernel-norm sweep.
#[derive(Clone, Copy, Debug)]
pub struct KernelStudyResult {
    pub beta: f64,
    /// Lebesgue exponent; `f64::INFINITY` for the sup norm.
    pub p: f64,
    pub norm_value: f64,
    /// `-2 (1/4 - 1/(4p))` in dimension 2.
    pub predicted_exponent: f64,
    /// Least-squares slope of `log norm` against `log beta` over the sweep
    /// this point belongs to.
    pub fitted_exponent: f64,
}

/// Smallest admissible even grid size for a given `beta`.
pub fn min_resolution(beta: f64) -> usize {
    let n = 3.0 * (RESOLUTION_LOG / beta).powf(0.25);
    let mut m = (n.floor() as usize) + 1;
    if m % 2 == 1 {
        m += 1;
    }
    m.max(8)
}

/// Grid used by the sweeps: the resolution guard plus enough nodes to see
/// the kernel peak, which concentrates at scale `beta^{1/4}`.
pub fn grid_for_beta(beta: f64) -> Result<Grid2D> {
    let peak = (10.0 * beta.powf(-0.25)).ceil() as usize;
    let mut n = min_resolution(beta).max(peak).max(32);
    if n % 2 == 1 {
        n += 1;
    }
    Grid2D::new(n)
}

/// Nodal values of the periodic kernel. Rejects grids failing the
/// resolution guard, reporting the minimal admissible size.
pub fn build_kernel(
    beta: f64,
    variant: KernelVariant,
    grid: Grid2D,
    ws: &mut Workspace,
) -> Result<RealField> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Params(format!("beta must be positive, got {beta}")));
    }
    let min_n = min_resolution(beta);
    if grid.n() < min_n {
        return Err(Error::KernelResolution {
            beta,
            n: grid.n(),
            min_n,
        });
    }
    let n = grid.n();
    let mut spec = SpectralField::zeros(grid);
    for m1 in 0..n {
        let k1 = grid.signed_k(m1) as f64;
        for m2 in 0..n {
            let k2 = grid.signed_k(m2) as f64;
            let s = k1 * k1 + k2 * k2;
            spec.coeffs_mut()[m1 * n + m2] = C64::new((-beta * s * s).exp(), 0.0);
        }
    }
    if variant == KernelVariant::MeanZero {
        spec.coeffs_mut()[0] = C64::new(0.0, 0.0);
    }
    ws.inverse(&spec)
}

/// `L^p` norms of the kernel over a `beta` sweep, with the scaling exponent
/// fitted by least squares. The betas must span at least two decades below
/// one. Kernels for different betas are built independently, so the sweep
/// fans out across workers.
pub fn kernel_norm_sweep(
    variant: KernelVariant,
    p: f64,
    betas: &[f64],
) -> Result<Vec<KernelStudyResult>> {
    if betas.len() < 2 {
        return Err(Error::Params("beta sweep needs at least two points".into()));
    }
    let max = betas.iter().cloned().fold(f64::MIN, f64::max);
    let min = betas.iter().cloned().fold(f64::MAX, f64::min);
    if !(max < 1.0 && min > 0.0 && max / min >= 100.0) {
        return Err(Error::Params(format!(
            "betas must span >= 2 decades below 1, got [{min:.3e}, {max:.3e}]"
        )));
    }
    if !(p >= 1.0) {
        return Err(Error::Params(format!("p must be >= 1, got {p}")));
    }

    let norms = sweep::try_map(betas, |&beta| -> Result<f64> {
        let grid = grid_for_beta(beta)?;
        let mut ws = Workspace::new(grid);
        let kernel = build_kernel(beta, variant, grid, &mut ws)?;
        Ok(if p.is_infinite() {
            kernel.linf()
        } else {
            lp_norm(&kernel, p)
        })
    })?;

    let fitted = log_log_slope(betas, &norms)?;
    let predicted = -2.0 * (0.25 - 0.25 / p); // 1/p = 0 at p = inf
    Ok(betas
        .iter()
        .zip(&norms)
        .map(|(&beta, &norm_value)| KernelStudyResult {
            beta,
            p,
            norm_value,
            predicted_exponent: predicted,
            fitted_exponent: fitted,
        })
        .collect())
}

/// Which smoothing estimate a ratio probes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmoothingKind {
    /// `||exp(-nu tau Delta^2) g||_inf` against `(nu tau)^{-1/8} ||g||_4`,
    /// for mean-zero `g`.
    SupFromL4,
    /// `||tau Delta exp(-nu tau Delta^2) g||_inf` against
    /// `tau (nu tau)^{-7/8} ||g||_{4/3}`.
    LaplacianSupFromL43,
}

/// Ratio of the smoothed sup norm to the estimate's right side without its
/// constant; sweeping this over a corpus measures the constant from below.
pub fn smoothing_ratio(
    g: &RealField,
    nu: f64,
    tau: f64,
    kind: SmoothingKind,
    ws: &mut Workspace,
) -> Result<f64> {
    let p = SolverParams::new(nu, tau, g.grid().n())?;
    let spec = ws.forward(g)?;
    let nt = nu * tau;
    match kind {
        SmoothingKind::SupFromL4 => {
            spec.require_mean_zero()?;
            let l4 = lp_norm(g, 4.0);
            if l4 == 0.0 {
                return Err(Error::ZeroField("smoothing ratio needs ||g||_4 > 0"));
            }
            let smoothed = crate::propagators::step_linear_spec(&spec, &p, tau)?;
            let (nodes, _) = ws.inverse_raw(&smoothed);
            Ok(nodes.linf() / (nt.powf(-0.125) * l4))
        }
        SmoothingKind::LaplacianSupFromL43 => {
            let l43 = lp_norm(g, 4.0 / 3.0);
            if l43 == 0.0 {
                return Err(Error::ZeroField("smoothing ratio needs ||g||_{4/3} > 0"));
            }
            let smoothed = crate::propagators::step_linear_spec(&spec, &p, tau)?;
            let lap = crate::multiplier::MultiplierSpec::laplacian(g.grid()).apply(&smoothed);
            let (nodes, _) = ws.inverse_raw(&lap);
            Ok(tau * nodes.linf() / (tau * nt.powf(-0.875) * l43))
        }
    }
}
