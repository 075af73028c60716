//! Fourier multipliers: diagonal operators `coeff(k) -> m(k) coeff(k)`.
//!
//! Every differential and semigroup operator used by the solver is one of
//! these: the Laplacian `-|k|^2`, fractional gradients `|k|^s`, the
//! biharmonic heat factor `exp(-beta |k|^4)` and its resolvent
//! `(1 + a|k|^4)^{-1}`.

use crate::error::{Error, Result};
use crate::field::{C64, SpectralField};
use crate::grid::Grid2D;

/// Treatment of the `k = 0` coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZeroMode {
    /// Leave the zero mode unchanged.
    Identity,
    /// Zero it out; required whenever the symbol formula is singular at 0.
    Annihilate,
}

#[derive(Clone, Debug)]
pub struct MultiplierSpec {
    grid: Grid2D,
    values: Vec<f64>,
    zero_mode: ZeroMode,
}

impl MultiplierSpec {
    /// Sample a symbol `m(k1, k2)` on the lattice. The symbol must be finite
    /// away from 0 and even in `k`; odd symbols would break realness.
    pub fn from_symbol(
        grid: Grid2D,
        zero_mode: ZeroMode,
        symbol: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let n = grid.n();
        let mut values = vec![0.0; grid.len()];
        for m1 in 0..n {
            let k1 = grid.signed_k(m1);
            for m2 in 0..n {
                let k2 = grid.signed_k(m2);
                if k1 == 0 && k2 == 0 {
                    continue;
                }
                let v = symbol(k1 as f64, k2 as f64);
                if !v.is_finite() {
                    return Err(Error::Params(format!(
                        "multiplier symbol not finite at k = ({k1}, {k2})"
                    )));
                }
                values[m1 * n + m2] = v;
            }
        }
        if zero_mode == ZeroMode::Identity {
            let v = symbol(0.0, 0.0);
            if !v.is_finite() {
                return Err(Error::Params(
                    "symbol singular at k = 0 requires the annihilate rule".into(),
                ));
            }
            values[0] = v;
        }
        // Evenness: value at k must match value at -k (Nyquist rows are
        // self-paired under the mod-n mirror).
        for m1 in 0..n {
            let p1 = (n - m1) % n;
            for m2 in 0..n {
                let p2 = (n - m2) % n;
                let a = values[m1 * n + m2];
                let b = values[p1 * n + p2];
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()) {
                    return Err(Error::OddSymbol {
                        k: (grid.signed_k(m1), grid.signed_k(m2)),
                    });
                }
            }
        }
        Ok(Self {
            grid,
            values,
            zero_mode,
        })
    }

    /// `-|k|^2`, the Laplacian.
    pub fn laplacian(grid: Grid2D) -> Self {
        Self::from_symbol(grid, ZeroMode::Annihilate, |k1, k2| -(k1 * k1 + k2 * k2))
            .expect("radial symbol")
    }

    /// `|k|^s 1_{k != 0}`, fractional gradient powers.
    pub fn grad_pow(grid: Grid2D, s: f64) -> Self {
        Self::from_symbol(grid, ZeroMode::Annihilate, |k1, k2| {
            (k1 * k1 + k2 * k2).powf(s / 2.0)
        })
        .expect("radial symbol")
    }

    /// `exp(-beta |k|^4)`, the biharmonic heat factor. Preserves the mass.
    pub fn heat(grid: Grid2D, beta: f64) -> Self {
        Self::from_symbol(grid, ZeroMode::Identity, |k1, k2| {
            let k2sum = k1 * k1 + k2 * k2;
            (-beta * k2sum * k2sum).exp()
        })
        .expect("radial symbol")
    }

    /// `(1 + a |k|^4)^{-1}`, the implicit biharmonic resolvent.
    pub fn resolvent(grid: Grid2D, a: f64) -> Self {
        Self::from_symbol(grid, ZeroMode::Identity, |k1, k2| {
            let k2sum = k1 * k1 + k2 * k2;
            1.0 / (1.0 + a * k2sum * k2sum)
        })
        .expect("radial symbol")
    }

    /// `(1 + a|k|^4) exp(-a|k|^4) - 1`, the gap between the exponential and
    /// its first Pade approximant, evaluated stably near 0 where it behaves
    /// like `-(a|k|^4)^2 / 2`.
    pub fn semigroup_resolvent_gap(grid: Grid2D, a: f64) -> Self {
        Self::from_symbol(grid, ZeroMode::Annihilate, |k1, k2| {
            let k2sum = k1 * k1 + k2 * k2;
            pade_gap(a * k2sum * k2sum)
        })
        .expect("radial symbol")
    }

    #[inline]
    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn zero_mode(&self) -> ZeroMode {
        self.zero_mode
    }

    /// Apply the multiplier; Hermitian symmetry is preserved because the
    /// symbol is real and even.
    pub fn apply(&self, f: &SpectralField) -> SpectralField {
        assert_eq!(self.grid, f.grid(), "grid mismatch");
        let mut out = f.clone();
        for (c, m) in out.coeffs_mut().iter_mut().zip(&self.values) {
            *c *= *m;
        }
        if self.zero_mode == ZeroMode::Annihilate {
            out.coeffs_mut()[0] = C64::new(0.0, 0.0);
        } else {
            out.coeffs_mut()[0] = f.coeffs()[0] * self.values[0];
        }
        out
    }
}

/// `(1 + x) exp(-x) - 1` with full relative accuracy for small `x`, where
/// direct evaluation cancels catastrophically.
pub(crate) fn pade_gap(x: f64) -> f64 {
    if x < 1e-3 {
        // expm1(x) - x = x^2/2 + x^3/6 + x^4/24 + ...
        let series = x * x * (0.5 + x * (1.0 / 6.0 + x * (1.0 / 24.0 + x / 120.0)));
        -(-x).exp() * series
    } else {
        -(-x).exp() * (x.exp_m1() - x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_symbol_rejected() {
        let g = Grid2D::new(8).unwrap();
        let r = MultiplierSpec::from_symbol(g, ZeroMode::Annihilate, |k1, _| k1);
        assert!(matches!(r, Err(Error::OddSymbol { .. })));
    }

    #[test]
    fn singular_symbol_needs_annihilate() {
        let g = Grid2D::new(8).unwrap();
        let r = MultiplierSpec::from_symbol(g, ZeroMode::Identity, |k1, k2| {
            1.0 / (k1 * k1 + k2 * k2)
        });
        assert!(r.is_err());
        assert!(MultiplierSpec::grad_pow(g, -1.0).values()[0] == 0.0);
    }

    #[test]
    fn identity_multiplier_is_identity() {
        let g = Grid2D::new(8).unwrap();
        let m = MultiplierSpec::from_symbol(g, ZeroMode::Identity, |_, _| 1.0).unwrap();
        let mut f = SpectralField::zeros(g);
        f.set_coeff(2, -1, C64::new(0.3, 0.7));
        f.set_coeff(-2, 1, C64::new(0.3, -0.7));
        f.set_coeff(0, 0, C64::new(2.0, 0.0));
        let out = m.apply(&f);
        assert_eq!(out.coeffs(), f.coeffs());
    }

    #[test]
    fn pade_gap_small_x() {
        // direct evaluation is trustworthy away from the cancellation zone
        for &x in &[1e-2_f64, 0.1, 1.0, 20.0] {
            let exact = -(-x).exp() * (x.exp() - 1.0 - x);
            let got = pade_gap(x);
            assert!(
                (got - exact).abs() <= 1e-10 * exact.abs().max(1e-300),
                "x={x}: {got} vs {exact}"
            );
        }
        // leading order -x^2/2 where direct evaluation would cancel
        for &x in &[1e-8_f64, 1e-7, 1e-5] {
            assert!((pade_gap(x) / (-x * x / 2.0) - 1.0).abs() < 1e-4, "x={x}");
        }
    }
}
