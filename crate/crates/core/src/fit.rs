//! Least-squares slope fitting for refinement studies.

use crate::error::{Error, Result};

/// Slope of `ln y` against `ln x` by ordinary least squares. Inputs must be
/// positive and finite, with at least two points.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Params(format!(
            "slope fit needs matching lists with >= 2 points, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let mut lx = Vec::with_capacity(xs.len());
    let mut ly = Vec::with_capacity(ys.len());
    for (&x, &y) in xs.iter().zip(ys) {
        if !(x > 0.0 && x.is_finite() && y > 0.0 && y.is_finite()) {
            return Err(Error::Params(format!(
                "slope fit needs positive finite data, got ({x}, {y})"
            )));
        }
        lx.push(x.ln());
        ly.push(y.ln());
    }
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in lx.iter().zip(&ly) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    if den == 0.0 {
        return Err(Error::Params("slope fit needs distinct abscissae".into()));
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::log_log_slope;

    #[test]
    fn recovers_power_law() {
        let xs: Vec<f64> = (1..7).map(|j| 2.0_f64.powi(-j)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.7 * x.powf(1.5)).collect();
        let s = log_log_slope(&xs, &ys).unwrap();
        assert!((s - 1.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_data() {
        assert!(log_log_slope(&[1.0, 2.0], &[1.0, 0.0]).is_err());
        assert!(log_log_slope(&[1.0], &[1.0]).is_err());
    }
}
