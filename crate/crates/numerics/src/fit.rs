//! Least-squares line fits in log-log coordinates.

use serde::Serialize;

/// Straight-line fit `log y ≈ slope · log x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute deviation of a point from the line, in log units.
    pub max_deviation: f64,
}

/// Fits a line through `(ln x, ln y)`; needs two distinct abscissae and
/// positive data.
pub fn fit_loglog(points: &[(f64, f64)]) -> Option<LogLogFit> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 || logs.len() != points.len() {
        return None;
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_deviation = logs
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).abs())
        .fold(0.0, f64::max);
    Some(LogLogFit {
        slope,
        intercept,
        max_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_laws_are_fitted_exactly() {
        let pts: Vec<(f64, f64)> = (1..8)
            .map(|k| (k as f64, 3.0 * (k as f64).powf(-1.5)))
            .collect();
        let f = fit_loglog(&pts).unwrap();
        assert!((f.slope + 1.5).abs() < 1e-12);
        assert!((f.intercept - 3.0f64.ln()).abs() < 1e-12);
        assert!(f.max_deviation < 1e-12);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        assert!(fit_loglog(&[(1.0, 1.0)]).is_none());
        assert!(fit_loglog(&[(2.0, 1.0), (2.0, 3.0)]).is_none());
        assert!(fit_loglog(&[(1.0, 1.0), (2.0, 0.0)]).is_none());
    }
}
