use serde::{Deserialize, Serialize};

use super::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub gamma: f64,
    pub failures: usize,
    pub shots: usize,
}

impl FitPoint {
    pub fn p(&self) -> f64 {
        self.failures as f64 / self.shots as f64
    }

    pub fn sigma(&self) -> f64 {
        let p = self.p();
        (p * (1.0 - p) / self.shots as f64).sqrt()
    }
}

/// `p_L ≈ prefactor * gamma^nu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub nu: f64,
    pub sigma_nu: f64,
    pub prefactor: f64,
    /// Decay rates of the fitted points.
    pub gammas: Vec<f64>,
}

/// Weighted least squares of `ln p` against `ln gamma` over the `k`
/// lowest-rate points with at least `min_failures` failures (and some
/// successes). Each point is weighted by `(p / sigma)^2`.
pub fn fit_scaling_exponent(
    points: &[FitPoint],
    k: usize,
    min_failures: usize,
) -> Result<ExponentFit, BenchError> {
    let mut ok: Vec<FitPoint> = points
        .iter()
        .copied()
        .filter(|p| p.failures >= min_failures.max(1) && p.failures < p.shots)
        .collect();
    ok.sort_by(|a, b| a.gamma.total_cmp(&b.gamma));
    let need = k.max(2);
    if ok.len() < need {
        return Err(BenchError::InsufficientPoints {
            have: ok.len(),
            need,
        });
    }
    ok.truncate(need);
    let (mut s, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for pt in &ok {
        let (x, y) = (pt.gamma.ln(), pt.p().ln());
        let w = (pt.p() / pt.sigma()).powi(2);
        s += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    let det = s * sxx - sx * sx;
    let nu = (s * sxy - sx * sy) / det;
    let icpt = (sxx * sy - sx * sxy) / det;
    Ok(ExponentFit {
        nu,
        sigma_nu: (s / det).sqrt(),
        prefactor: icpt.exp(),
        gammas: ok.iter().map(|p| p.gamma).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_a_square_law() {
        // failures = 1e8 * g^2 at 1e6 shots: exact powers of ten.
        let pts: Vec<FitPoint> = [1e-3, 1e-2, 1e-1, 3e-3, 3e-2]
            .iter()
            .map(|&g| FitPoint {
                gamma: g,
                failures: (1e8 * g * g).round() as usize,
                shots: 1_000_000,
            })
            .collect();
        let f = fit_scaling_exponent(&pts, 4, 10).unwrap();
        assert_eq!(f.gammas, vec![1e-3, 3e-3, 1e-2, 3e-2]);
        assert!((f.nu - 2.0).abs() < 1e-9, "{f:?}");
        assert!((f.prefactor - 100.0).abs() < 1e-6);
    }

    #[test]
    fn skips_points_without_failures() {
        let pts = [
            FitPoint { gamma: 1e-4, failures: 3, shots: 1000 },
            FitPoint { gamma: 1e-3, failures: 20, shots: 1000 },
        ];
        assert!(matches!(
            fit_scaling_exponent(&pts, 2, 10),
            Err(BenchError::InsufficientPoints { have: 1, need: 2 })
        ));
    }
}
