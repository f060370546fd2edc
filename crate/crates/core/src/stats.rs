//! Small descriptive-statistics helpers shared by the fit and herald modules.

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation with the `n - 1` denominator.
pub fn std_dev(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() as f64 - 1.0)).sqrt()
}

/// Sample means, standard deviations and Pearson correlation of paired data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairMoments {
    pub mean1: f64,
    pub mean2: f64,
    pub std1: f64,
    pub std2: f64,
    pub correlation: f64,
}

pub fn pair_moments(xs: &[f64], ys: &[f64]) -> PairMoments {
    debug_assert_eq!(xs.len(), ys.len());
    let (m1, m2) = (mean(xs), mean(ys));
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - m1, y - m2);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    let n1 = xs.len() as f64 - 1.0;
    PairMoments {
        mean1: m1,
        mean2: m2,
        std1: (sxx / n1).sqrt(),
        std2: (syy / n1).sqrt(),
        correlation: sxy / (sxx * syy).sqrt(),
    }
}

/// Linear-interpolated quantile of already sorted data, `q` in `[0, 1]`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

/// Least-squares line `y = slope x + intercept`, plus the largest absolute residual.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let worst = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| (y - slope * x - intercept).abs())
        .fold(0.0, f64::max);
    (slope, intercept, worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_endpoints_and_midpoint() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&v, 0.0), 1.0);
        assert_eq!(quantile_sorted(&v, 1.0), 4.0);
        assert_eq!(quantile_sorted(&v, 0.5), 2.5);
    }

    #[test]
    fn perfect_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 1.0).collect();
        let (s, b, w) = fit_line(&xs, &ys);
        assert!((s - 2.5).abs() < 1e-15 && (b + 1.0).abs() < 1e-15 && w < 1e-15);
    }

    #[test]
    fn anticorrelated_pairs() {
        let m = pair_moments(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]);
        assert!((m.correlation + 1.0).abs() < 1e-15);
        assert_eq!(m.std1, 1.0);
    }
}
