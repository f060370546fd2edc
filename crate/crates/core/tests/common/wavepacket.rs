//! Monte-Carlo arrival-time correlation of a dispersed biphoton.
//!
//! The spectral amplitude `exp(-(ν1-ν2)²/σ² - (ν1+ν2)²τp²/4)` picks up the
//! phase `β L ν²` in each arm. A 2D FFT gives the time-domain amplitude; arrival
//! times are then drawn from `|ψ(t1, t2)|²` on the grid and their Pearson
//! correlation is returned with its large-sample standard error.

use rand::RngExt;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

pub struct McCorrelation {
    pub r: f64,
    pub std_error: f64,
    pub grid: usize,
    pub mean_t1: f64,
    /// Sample standard deviation of t1.
    pub std1: f64,
}

fn fft2(data: &mut [Complex64], n: usize) {
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_inverse(n);
    for row in data.chunks_mut(n) {
        fft.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = data[i * n + j];
        }
        fft.process(&mut col);
        for i in 0..n {
            data[i * n + j] = col[i];
        }
    }
}

/// `sigma` in 1/s, `tau_p` in s, `beta_l = β L` in s².
pub fn dispersed_correlation(sigma: f64, tau_p: f64, beta_l: f64, samples: usize, seed: u64) -> McCorrelation {
    // Grid sizing only: spectral spread from the intensity |φ|², temporal spread
    // bounded by the free spread plus the chirp-induced spread of each band.
    let var_plus = 1.0 / (tau_p * tau_p);
    let var_minus = sigma * sigma / 4.0;
    let s_nu = (0.25 * (var_plus + var_minus)).sqrt();
    let nu_range = 2.0 * 9.0 * s_nu;
    let k = beta_l.abs();
    let t_free = tau_p.max(2.0 / sigma);
    let t_chirp = 2.0 * k * (var_plus.max(var_minus)).sqrt();
    let t_extent = 2.0 * 12.0 * (t_free + t_chirp);
    let t_narrow = (1.0 / sigma).min(tau_p) * 0.25;
    let mut n = 256usize;
    loop {
        let dnu = 2.0 * std::f64::consts::PI / t_extent;
        let needed_range = nu_range.max(2.0 * std::f64::consts::PI / t_narrow);
        if n as f64 * dnu >= needed_range || n >= 4096 {
            break;
        }
        n *= 2;
    }
    let dnu = (2.0 * std::f64::consts::PI / t_extent).max(nu_range / n as f64);
    let dt = 2.0 * std::f64::consts::PI / (n as f64 * dnu);

    let nu = |i: usize| (i as f64 - (n / 2) as f64) * dnu;
    let mut amp = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        let v1 = nu(i);
        for j in 0..n {
            let v2 = nu(j);
            let d = v1 - v2;
            let s = v1 + v2;
            let mag = (-(d * d) / (sigma * sigma) - s * s * tau_p * tau_p / 4.0).exp();
            let phase = beta_l * (v1 * v1 + v2 * v2);
            amp[i * n + j] = Complex64::from_polar(mag, phase);
        }
    }
    fft2(&mut amp, n);

    let mut cdf = Vec::with_capacity(n * n);
    let mut acc = 0.0;
    for z in &amp {
        acc += z.norm_sqr();
        cdf.push(acc);
    }
    let time = |m: usize| {
        let m = m as isize;
        let m = if m >= (n / 2) as isize { m - n as isize } else { m };
        m as f64 * dt
    };
    let mut rng = super::rng(seed);
    let (mut s1, mut s2, mut s11, mut s22, mut s12) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for _ in 0..samples {
        let u = rng.random::<f64>() * acc;
        let idx = cdf.partition_point(|&c| c < u).min(n * n - 1);
        let (x, y) = (time(idx / n), time(idx % n));
        s1 += x;
        s2 += y;
        s11 += x * x;
        s22 += y * y;
        s12 += x * y;
    }
    let m = samples as f64;
    let (m1, m2) = (s1 / m, s2 / m);
    let c11 = s11 / m - m1 * m1;
    let c22 = s22 / m - m2 * m2;
    let c12 = s12 / m - m1 * m2;
    let r = c12 / (c11 * c22).sqrt();
    McCorrelation {
        r,
        std_error: (1.0 - r * r) / m.sqrt(),
        grid: n,
        mean_t1: m1,
        std1: c11.sqrt(),
    }
}
