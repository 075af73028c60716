//! Lebesgue and Sobolev norms.
//!
//! `L^p` norms use node quadrature with weight `h^2`; `L^inf` is the node
//! max. Sobolev norms are spectral sums with the Plancherel normalization
//! `(2 pi)^{-2}`: `H^s` uses Japanese-bracket weights `(1 + |k|^2)^s`, the
//! homogeneous seminorms use `|k|^{2s}` over `k != 0`.

use std::f64::consts::PI;

use crate::error::Result;
use crate::field::{RealField, SpectralField};
use crate::transform::Workspace;

/// The fixed norm bundle recorded along runs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Norms {
    pub l2: f64,
    pub l4: f64,
    pub linf: f64,
    pub h1: f64,
}

/// Node-quadrature `L^p` norm for `1 <= p < inf`.
pub fn lp_norm(f: &RealField, p: f64) -> f64 {
    assert!(p >= 1.0 && p.is_finite());
    let s: f64 = f.values().iter().map(|v| v.abs().powf(p)).sum();
    (s * f.grid().cell_weight()).powf(1.0 / p)
}

pub fn linf_norm(f: &RealField) -> f64 {
    f.linf()
}

/// `H^s` norm with weights `(1 + |k|^2)^s`.
pub fn sobolev_norm(f: &SpectralField, s: f64) -> f64 {
    let n = f.grid().n();
    let int_s = if s.fract() == 0.0 && s.abs() <= 64.0 {
        Some(s as i32)
    } else {
        None
    };
    let mut total = 0.0;
    for m1 in 0..n {
        let k1 = f.grid().signed_k(m1) as f64;
        for m2 in 0..n {
            let k2 = f.grid().signed_k(m2) as f64;
            let base = 1.0 + k1 * k1 + k2 * k2;
            let w = match int_s {
                Some(i) => base.powi(i),
                None => base.powf(s),
            };
            total += w * f.coeffs()[m1 * n + m2].norm_sqr();
        }
    }
    total.sqrt() / (2.0 * PI)
}

/// Homogeneous seminorm `|| |grad|^s f ||_2`. Negative orders require a
/// mean-zero field.
pub fn homogeneous_norm(f: &SpectralField, s: f64) -> Result<f64> {
    if s < 0.0 {
        f.require_mean_zero()?;
    }
    let n = f.grid().n();
    let mut total = 0.0;
    for m1 in 0..n {
        let k1 = f.grid().signed_k(m1) as f64;
        for m2 in 0..n {
            let k2 = f.grid().signed_k(m2) as f64;
            if k1 == 0.0 && k2 == 0.0 {
                continue;
            }
            total += (k1 * k1 + k2 * k2).powf(s) * f.coeffs()[m1 * n + m2].norm_sqr();
        }
    }
    Ok(total.sqrt() / (2.0 * PI))
}

/// The norm bundle: `L^2`, `L^4`, `L^inf` from the nodes, `H^1` from the
/// spectrum.
pub fn norms(f: &RealField, ws: &mut Workspace) -> Result<Norms> {
    let spec = ws.forward(f)?;
    Ok(Norms {
        l2: f.l2(),
        l4: lp_norm(f, 4.0),
        linf: f.linf(),
        h1: sobolev_norm(&spec, 1.0),
    })
}

/// Subtract the node average.
pub fn project_mean_zero(f: &RealField) -> RealField {
    let mean = f.node_mean();
    let values = f.values().iter().map(|v| v - mean).collect();
    RealField::from_values(f.grid(), values).expect("finite by construction")
}
