use crate::error::{Error, Result};

/// Absolute slack on the window ends, so grid times like `22 × 0.05` land inside `[.., 1.1]`.
pub const WINDOW_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub rms: f64,
    pub window: (f64, f64),
    pub count: usize,
}

/// Unweighted least squares `y ≈ slope·t + intercept` over points with `lo ≤ t ≤ hi`.
pub fn fit_linear(points: &[(f64, f64)], window: (f64, f64)) -> Result<FitResult> {
    let (lo, hi) = window;
    let sel: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(t, _)| t >= lo - WINDOW_SLACK && t <= hi + WINDOW_SLACK)
        .collect();
    let n = sel.len();
    if n < 2 {
        return Err(Error::FitWindow { lo, hi, count: n });
    }
    let nf = n as f64;
    let t_mean = sel.iter().map(|p| p.0).sum::<f64>() / nf;
    let y_mean = sel.iter().map(|p| p.1).sum::<f64>() / nf;
    let (mut stt, mut sty) = (0.0, 0.0);
    for &(t, y) in &sel {
        stt += (t - t_mean) * (t - t_mean);
        sty += (t - t_mean) * (y - y_mean);
    }
    if stt == 0.0 {
        return Err(Error::FitWindow { lo, hi, count: 1 });
    }
    let slope = sty / stt;
    let intercept = y_mean - slope * t_mean;
    let rms = (sel
        .iter()
        .map(|&(t, y)| (y - slope * t - intercept).powi(2))
        .sum::<f64>()
        / nf)
        .sqrt();
    Ok(FitResult {
        slope,
        intercept,
        rms,
        window,
        count: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let pts: Vec<_> = (0..10)
            .map(|i| (i as f64 * 0.1, 2.0 * i as f64 * 0.1 + 1.0))
            .collect();
        let f = fit_linear(&pts, (0.0, 1.0)).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12);
        assert!(f.rms < 1e-12);
        assert_eq!(f.count, 10);
    }

    #[test]
    fn constant_series() {
        let pts: Vec<_> = (0..5).map(|i| (i as f64, 3.5)).collect();
        let f = fit_linear(&pts, (0.0, 10.0)).unwrap();
        assert_eq!((f.slope, f.intercept), (0.0, 3.5));
    }

    #[test]
    fn window_selects_points() {
        let pts: Vec<_> = (0..20)
            .map(|i| (i as f64 * 0.1, if i < 5 { 100.0 } else { i as f64 * 0.1 }))
            .collect();
        let f = fit_linear(&pts, (0.5, 1.9)).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-12);
        assert!(matches!(
            fit_linear(&pts, (0.52, 0.58)),
            Err(Error::FitWindow { count: 0, .. })
        ));
        assert!(matches!(
            fit_linear(&pts[..1], (0.0, 1.0)),
            Err(Error::FitWindow { count: 1, .. })
        ));
    }
}
