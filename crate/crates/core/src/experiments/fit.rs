//! Least-squares slope fits on log-log data.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% confidence interval for the slope; `None` with fewer than three points.
    pub interval: Option<[f64; 2]>,
    pub points: usize,
}

impl SlopeFit {
    /// `exp(intercept)`: the fitted prefactor `K` in `y ≈ K x^slope`.
    pub fn prefactor(&self) -> f64 {
        self.intercept.exp()
    }
}

/// Fits `log y = intercept + slope · log x`. Pairs with non-positive or
/// non-finite entries are skipped; `None` if fewer than two remain.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Option<SlopeFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let interval = (n > 2).then(|| {
        let sse: f64 = pts
            .iter()
            .map(|p| (p.1 - intercept - slope * p.0).powi(2))
            .sum();
        let se = (sse / (nf - 2.0) / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, nf - 2.0)
            .expect("positive degrees of freedom")
            .inverse_cdf(0.975);
        [slope - t * se, slope + t * se]
    });
    Some(SlopeFit {
        slope,
        intercept,
        interval,
        points: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let xs = [1e-3, 2e-3, 4e-3, 8e-3];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(1.5)).collect();
        let fit = fit_loglog(&xs, &ys).unwrap();
        assert!((fit.slope - 1.5).abs() < 1e-12);
        assert!((fit.prefactor() - 3.0).abs() < 1e-10);
        let [lo, hi] = fit.interval.unwrap();
        assert!(hi - lo < 1e-10);
    }

    #[test]
    fn interval_uses_student_t() {
        // Residuals ±δ around slope 1 at four points.
        let xs = [1.0, std::f64::consts::E, std::f64::consts::E.powi(2), std::f64::consts::E.powi(3)];
        let d = 0.1f64;
        let ys: Vec<f64> = xs
            .iter()
            .zip([d, -d, -d, d])
            .map(|(x, r)| x * r.exp())
            .collect();
        let fit = fit_loglog(&xs, &ys).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-12);
        // sxx = 5, sse = 4 δ², se = sqrt(2δ²/5), t(0.975, 2) = 4.302653.
        let se = (2.0 * d * d / 5.0f64).sqrt();
        let [lo, hi] = fit.interval.unwrap();
        assert!(((hi - lo) / 2.0 - 4.302653 * se).abs() < 1e-5);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_loglog(&[1.0], &[1.0]).is_none());
        assert!(fit_loglog(&[1.0, 1.0], &[1.0, 2.0]).is_none());
        let fit = fit_loglog(&[1.0, 2.0, 0.0], &[1.0, 2.0, 5.0]).unwrap();
        assert_eq!(fit.points, 2);
        assert!(fit.interval.is_none());
    }
}
