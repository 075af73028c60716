//! Forward/inverse Fourier transforms between nodal values and coefficients.
//!
//! `forward` approximates `f_hat(k) = integral f(x) exp(-i k.x) dx` by the
//! node sum with weight `h^2`; this is exact for trigonometric polynomials
//! of degree < n/2. `inverse` evaluates
//! `f(x) = (2 pi)^{-2} sum_k f_hat(k) exp(i k.x)` at the nodes.
//!
//! A `Workspace` owns the FFT plans and scratch buffers for one grid size.
//! It may be reused freely within a thread but is not meant to be shared
//! concurrently; parallel sweeps give each worker its own instance.

use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{C64, RealField, SpectralField};
use crate::grid::Grid2D;

/// Relative tolerance on the Hermitian-symmetry check in `inverse`.
pub const SYMMETRY_RTOL: f64 = 1e-10;
/// Relative tolerance on the imaginary residue left after `inverse`.
pub const IMAG_RTOL: f64 = 1e-12;

pub struct Workspace {
    grid: Grid2D,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    buf: Vec<C64>,
    tmp: Vec<C64>,
    scratch: Vec<C64>,
}

impl Workspace {
    pub fn new(grid: Grid2D) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(grid.n());
        let inv = planner.plan_fft_inverse(grid.n());
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        Self {
            grid,
            fwd,
            inv,
            buf: vec![C64::new(0.0, 0.0); grid.len()],
            tmp: vec![C64::new(0.0, 0.0); grid.len()],
            scratch: vec![C64::new(0.0, 0.0); scratch_len],
        }
    }

    #[inline]
    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    /// Physical values -> Fourier coefficients.
    pub fn forward(&mut self, f: &RealField) -> Result<SpectralField> {
        f.check_finite("forward input")?;
        Ok(self.forward_raw(f))
    }

    /// Coefficients -> physical values, rejecting inputs whose Hermitian
    /// symmetry deviates by more than `1e-10` relative to the largest
    /// coefficient.
    pub fn inverse(&mut self, f: &SpectralField) -> Result<RealField> {
        let scale = f.max_abs();
        let dev = f.symmetry_deviation();
        if dev > SYMMETRY_RTOL * scale {
            return Err(Error::SymmetryViolation {
                dev: if scale > 0.0 { dev / scale } else { dev },
                tol: SYMMETRY_RTOL,
            });
        }
        let (out, imag_residue) = self.inverse_raw(f);
        let ref_mag = out.linf().max(f64::MIN_POSITIVE);
        if imag_residue > IMAG_RTOL * ref_mag {
            return Err(Error::SymmetryViolation {
                dev: imag_residue / ref_mag,
                tol: IMAG_RTOL,
            });
        }
        Ok(out)
    }

    /// Transform without the finiteness check; used on buffers whose
    /// provenance already guarantees it.
    pub(crate) fn forward_raw(&mut self, f: &RealField) -> SpectralField {
        let n = self.grid.n();
        for (b, v) in self.buf.iter_mut().zip(f.values()) {
            *b = C64::new(*v, 0.0);
        }
        self.fft2(true);
        // Node offset -pi contributes (-1)^{k1+k2}; h^2 is the quadrature
        // weight of the node sum.
        let h2 = self.grid.cell_weight();
        let mut coeffs = vec![C64::new(0.0, 0.0); self.grid.len()];
        for m1 in 0..n {
            let s1 = if m1 % 2 == 0 { 1.0 } else { -1.0 };
            for m2 in 0..n {
                let s = if m2 % 2 == 0 { s1 } else { -s1 };
                coeffs[m1 * n + m2] = self.buf[m1 * n + m2] * (h2 * s);
            }
        }
        SpectralField::from_raw(self.grid, coeffs)
    }

    /// Inverse transform without checks; returns the field and the largest
    /// imaginary residue encountered.
    pub(crate) fn inverse_raw(&mut self, f: &SpectralField) -> (RealField, f64) {
        let n = self.grid.n();
        for m1 in 0..n {
            let s1 = if m1 % 2 == 0 { 1.0 } else { -1.0 };
            for m2 in 0..n {
                let s = if m2 % 2 == 0 { s1 } else { -s1 };
                self.buf[m1 * n + m2] = f.coeffs()[m1 * n + m2] * s;
            }
        }
        self.fft2(false);
        let norm = 1.0 / (4.0 * PI * PI);
        let mut values = Vec::with_capacity(self.grid.len());
        let mut residue = 0.0_f64;
        for b in &self.buf {
            values.push(b.re * norm);
            residue = residue.max(b.im.abs() * norm);
        }
        (RealField::from_raw(self.grid, values), residue)
    }

    /// In-place 2D FFT over `self.buf`: rows, transpose, rows, transpose.
    fn fft2(&mut self, forward: bool) {
        let n = self.grid.n();
        let plan = if forward { &self.fwd } else { &self.inv };
        for row in self.buf.chunks_exact_mut(n) {
            plan.process_with_scratch(row, &mut self.scratch);
        }
        transpose(&self.buf, &mut self.tmp, n);
        for row in self.tmp.chunks_exact_mut(n) {
            plan.process_with_scratch(row, &mut self.scratch);
        }
        transpose(&self.tmp, &mut self.buf, n);
    }
}

fn transpose(src: &[C64], dst: &mut [C64], n: usize) {
    for i in 0..n {
        for j in 0..n {
            dst[j * n + i] = src[i * n + j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_round_trip() {
        let g = Grid2D::new(8).unwrap();
        let mut ws = Workspace::new(g);
        let f = RealField::zeros(g);
        let spec = ws.forward(&f).unwrap();
        assert!(spec.max_abs() == 0.0);
        let back = ws.inverse(&spec).unwrap();
        assert!(back.linf() == 0.0);
    }

    #[test]
    fn rejects_asymmetric_coefficients() {
        let g = Grid2D::new(8).unwrap();
        let mut ws = Workspace::new(g);
        let mut spec = SpectralField::zeros(g);
        spec.set_coeff(1, 0, C64::new(1.0, 1.0));
        // conjugate partner missing entirely
        assert!(matches!(
            ws.inverse(&spec),
            Err(Error::SymmetryViolation { .. })
        ));
    }

    #[test]
    fn rejects_non_finite_input() {
        let g = Grid2D::new(8).unwrap();
        let mut ws = Workspace::new(g);
        let mut f = RealField::zeros(g);
        f.values_mut()[5] = f64::INFINITY;
        assert!(matches!(ws.forward(&f), Err(Error::NonFinite { .. })));
    }
}
