//! Scalar fields in their two representations: nodal values on the grid
//! and Fourier coefficients on the wavenumber lattice.
//!
//! The transform convention is `f_hat(k) = integral of f(x) exp(-i k.x) dx`,
//! so a real field satisfies `coeff(-k) = conj(coeff(k))` and the `k = 0`
//! coefficient is the integral (mass) of the field.

use rustfft::num_complex::Complex;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::Grid2D;

pub type C64 = Complex<f64>;

/// Relative tolerance for the mean-zero test on the zero coefficient.
pub const MEAN_ZERO_RTOL: f64 = 1e-12;

/// A real scalar field sampled at the grid nodes, row-major: index
/// `(j1, j2)` holds the value at `(x_{j1}, x_{j2})`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealField {
    grid: Grid2D,
    values: Vec<f64>,
}

impl RealField {
    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    /// Wrap raw nodal values. Rejects non-finite entries, naming the first
    /// offending node.
    pub fn from_values(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Params(format!(
                "value buffer has length {}, grid wants {}",
                values.len(),
                grid.len()
            )));
        }
        let f = Self { grid, values };
        f.check_finite("field values")?;
        Ok(f)
    }

    pub(crate) fn from_raw(grid: Grid2D, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    /// Sample a closure at the nodes.
    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for j1 in 0..n {
            let x1 = grid.node(j1);
            for j2 in 0..n {
                values.push(f(x1, grid.node(j2)));
            }
        }
        Self { grid, values }
    }

    pub fn check_finite(&self, what: &'static str) -> Result<()> {
        let n = self.grid.n();
        for (i, v) in self.values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    what,
                    index: (i / n, i % n),
                });
            }
        }
        Ok(())
    }

    #[inline]
    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn get(&self, j1: usize, j2: usize) -> f64 {
        self.values[j1 * self.grid.n() + j2]
    }

    /// Node average.
    pub fn node_mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Quadrature approximation of the integral over the torus.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_weight()
    }

    pub fn linf(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// L2 norm by node quadrature.
    pub fn l2(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_weight()).sqrt()
    }

    /// L2 distance by node quadrature; panics on grid mismatch.
    pub fn l2_distance(&self, other: &RealField) -> f64 {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        (s * self.grid.cell_weight()).sqrt()
    }
}

/// Fourier coefficients of a real field, stored in DFT order.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid2D,
    coeffs: Vec<C64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            grid,
            coeffs: vec![C64::new(0.0, 0.0); grid.len()],
        }
    }

    pub(crate) fn from_raw(grid: Grid2D, coeffs: Vec<C64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.len());
        Self { grid, coeffs }
    }

    #[inline]
    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    #[inline]
    pub(crate) fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }

    /// Coefficient at a signed wavenumber pair.
    pub fn coeff(&self, k1: i64, k2: i64) -> C64 {
        let n = self.grid.n();
        self.coeffs[self.grid.dft_index(k1) * n + self.grid.dft_index(k2)]
    }

    pub fn set_coeff(&mut self, k1: i64, k2: i64, v: C64) {
        let n = self.grid.n();
        let idx = self.grid.dft_index(k1) * n + self.grid.dft_index(k2);
        self.coeffs[idx] = v;
    }

    /// The integral of the field (the `k = 0` coefficient).
    pub fn mass(&self) -> f64 {
        self.coeffs[0].re
    }

    /// L2 norm of the field by the Plancherel identity.
    pub fn l2(&self) -> f64 {
        let s: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        s.sqrt() / (2.0 * PI)
    }

    /// L2 distance to another coefficient array by Plancherel.
    pub fn l2_distance(&self, other: &SpectralField) -> f64 {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let s: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        s.sqrt() / (2.0 * PI)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.norm()))
    }

    /// Largest deviation from Hermitian symmetry, `max |X(m) - conj(X(-m))|`,
    /// taken over the full DFT index set (Nyquist rows are self-paired).
    pub fn symmetry_deviation(&self) -> f64 {
        let n = self.grid.n();
        let mut dev = 0.0_f64;
        for m1 in 0..n {
            let p1 = (n - m1) % n;
            for m2 in 0..n {
                let p2 = (n - m2) % n;
                let d = (self.coeffs[m1 * n + m2] - self.coeffs[p1 * n + p2].conj()).norm();
                dev = dev.max(d);
            }
        }
        dev
    }

    /// Mean-zero test: `|coeff(0)|` at most `1e-12` relative to the L2 norm.
    pub fn is_mean_zero(&self) -> bool {
        self.coeffs[0].norm() <= MEAN_ZERO_RTOL * 2.0 * PI * self.l2()
    }

    pub(crate) fn require_mean_zero(&self) -> Result<()> {
        if self.is_mean_zero() {
            Ok(())
        } else {
            Err(Error::NotMeanZero {
                mass: self.coeffs[0].norm(),
                scale: 2.0 * PI * self.l2(),
            })
        }
    }

    /// Zero every mode with `|k_j| > n/3` in either component.
    pub fn dealiased(&self) -> SpectralField {
        let mut out = self.clone();
        out.truncate_two_thirds();
        out
    }

    pub(crate) fn truncate_two_thirds(&mut self) {
        let n = self.grid.n();
        let g = self.grid;
        for m1 in 0..n {
            let keep1 = g.dealias_keep(g.signed_k(m1));
            for m2 in 0..n {
                if !(keep1 && g.dealias_keep(g.signed_k(m2))) {
                    self.coeffs[m1 * n + m2] = C64::new(0.0, 0.0);
                }
            }
        }
    }

    /// Zero the unpaired `k = -n/2` rows and columns.
    pub(crate) fn zero_nyquist(&mut self) {
        let n = self.grid.n();
        let ny = n / 2;
        for m2 in 0..n {
            self.coeffs[ny * n + m2] = C64::new(0.0, 0.0);
        }
        for m1 in 0..n {
            self.coeffs[m1 * n + ny] = C64::new(0.0, 0.0);
        }
    }

    /// Zero coefficients below `rtol` times the largest magnitude. Returns
    /// the number of modes kept.
    pub(crate) fn denoise(&mut self, rtol: f64) -> usize {
        let floor = rtol * self.max_abs();
        let mut kept = 0;
        for c in self.coeffs.iter_mut() {
            if c.norm() <= floor {
                *c = C64::new(0.0, 0.0);
            } else {
                kept += 1;
            }
        }
        kept
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_values_names_first_bad_node() {
        let g = Grid2D::new(8).unwrap();
        let mut v = vec![0.0; 64];
        v[19] = f64::NAN;
        match RealField::from_values(g, v) {
            Err(Error::NonFinite { index, .. }) => assert_eq!(index, (2, 3)),
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }

    #[test]
    fn coeff_indexing_round_trips() {
        let g = Grid2D::new(8).unwrap();
        let mut f = SpectralField::zeros(g);
        f.set_coeff(-3, 2, C64::new(1.5, -0.5));
        assert_eq!(f.coeff(-3, 2), C64::new(1.5, -0.5));
        assert_eq!(f.coeff(3, 2), C64::new(0.0, 0.0));
    }

    #[test]
    fn mean_zero_flag() {
        let g = Grid2D::new(8).unwrap();
        let mut f = SpectralField::zeros(g);
        f.set_coeff(1, 0, C64::new(1.0, 0.0));
        f.set_coeff(-1, 0, C64::new(1.0, 0.0));
        assert!(f.is_mean_zero());
        f.set_coeff(0, 0, C64::new(1e-3, 0.0));
        assert!(!f.is_mean_zero());
        // zero field is mean-zero
        assert!(SpectralField::zeros(g).is_mean_zero());
    }

    #[test]
    fn dealias_zeroes_top_third() {
        let g = Grid2D::new(12).unwrap();
        let mut f = SpectralField::zeros(g);
        f.set_coeff(4, 0, C64::new(1.0, 0.0));
        f.set_coeff(5, 0, C64::new(1.0, 0.0));
        let d = f.dealiased();
        assert_eq!(d.coeff(4, 0), C64::new(1.0, 0.0));
        assert_eq!(d.coeff(5, 0), C64::new(0.0, 0.0));
    }
}
