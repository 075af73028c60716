//! Uniform collocation grid on the periodic square `[-pi, pi)^2`.
//!
//! Nodes are `x_j = -pi + j*h` with `h = 2*pi/n`, and the spectral side
//! lives on the integer wavenumber lattice `k in {-n/2, ..., n/2-1}^2`.
//! Coefficients are stored in DFT order (index `m` maps to `k = m` for
//! `m < n/2` and `k = m - n` otherwise).

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid2D {
    n: usize,
}

impl Grid2D {
    /// `n` must be even and at least 8.
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::Params(format!(
                "grid size must be even and >= 8, got {n}"
            )));
        }
        Ok(Self { n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of nodes (and of retained Fourier modes).
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Mesh width `2*pi/n`.
    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Quadrature weight per node; node-sum times this equals the integral
    /// over the torus exactly for trigonometric polynomials of degree < n/2.
    #[inline]
    pub fn cell_weight(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    /// Physical coordinate of node index `j` in one dimension.
    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        -PI + j as f64 * self.spacing()
    }

    /// Signed wavenumber for DFT index `m`.
    #[inline]
    pub fn signed_k(&self, m: usize) -> i64 {
        if m < self.n / 2 {
            m as i64
        } else {
            m as i64 - self.n as i64
        }
    }

    /// DFT index of a signed wavenumber in `[-n/2, n/2)`.
    #[inline]
    pub fn dft_index(&self, k: i64) -> usize {
        debug_assert!(-(self.n as i64) / 2 <= k && k < self.n as i64 / 2);
        k.rem_euclid(self.n as i64) as usize
    }

    /// Two-thirds rule: a mode survives dealiasing iff `|k| <= n/3`
    /// componentwise.
    #[inline]
    pub fn dealias_keep(&self, k: i64) -> bool {
        3 * k.abs() <= self.n as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_and_small() {
        assert!(Grid2D::new(7).is_err());
        assert!(Grid2D::new(6).is_err());
        assert!(Grid2D::new(9).is_err());
        assert!(Grid2D::new(8).is_ok());
    }

    #[test]
    fn wavenumber_layout() {
        let g = Grid2D::new(8).unwrap();
        let ks: Vec<i64> = (0..8).map(|m| g.signed_k(m)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        for m in 0..8 {
            if g.signed_k(m) != -4 {
                assert_eq!(g.dft_index(g.signed_k(m)), m);
            }
        }
    }

    #[test]
    fn nodes_cover_half_open_square() {
        let g = Grid2D::new(16).unwrap();
        assert!((g.node(0) + PI).abs() < 1e-15);
        assert!(g.node(15) < PI);
        assert!((g.cell_weight() * 256.0 - 4.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn dealias_cutoff() {
        let g = Grid2D::new(128).unwrap();
        assert!(g.dealias_keep(42));
        assert!(!g.dealias_keep(43));
        assert!(!g.dealias_keep(-64));
    }
}
