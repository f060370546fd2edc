//! Adaptive Gauss–Kronrod (7/15) quadrature.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point Kronrod estimate and its difference from the embedded Gauss rule.
pub fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Integral of `f` over `[a, b]` to `abs_tol`. The interval is first cut into
/// 64 panels so narrow features are not missed, then panels are bisected until
/// their error estimate meets the tolerance or reaches roundoff.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64) -> f64 {
    const PANELS: usize = 64;
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, floor: f64, whole: (f64, f64), depth: u32) -> f64 {
        let (v, err) = whole;
        if err <= tol.max(floor) || depth > 40 {
            return v;
        }
        let m = 0.5 * (a + b);
        let l = gk15(f, a, m);
        let r = gk15(f, m, b);
        rec(f, a, m, 0.5 * tol, floor, l, depth + 1) + rec(f, m, b, 0.5 * tol, floor, r, depth + 1)
    }
    if a == b {
        return 0.0;
    }
    let h = (b - a) / PANELS as f64;
    let panels: Vec<(f64, f64, (f64, f64))> = (0..PANELS)
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = if i + 1 == PANELS { b } else { lo + h };
            (lo, hi, gk15(f, lo, hi))
        })
        .collect();
    let scale: f64 = panels.iter().map(|p| p.2 .0.abs()).sum();
    let floor = 1e-15 * scale;
    panels
        .into_iter()
        .map(|(lo, hi, est)| rec(f, lo, hi, abs_tol / PANELS as f64, floor, est, 0))
        .sum()
}

/// Nested integral over `x ∈ [ax, bx]`, `y ∈ [ay, by]`.
pub fn integrate2(
    f: &dyn Fn(f64, f64) -> f64,
    (ax, bx): (f64, f64),
    (ay, by): (f64, f64),
    abs_tol: f64,
) -> f64 {
    let span = bx - ax;
    let inner = |x: f64| integrate(&|y| f(x, y), ay, by, abs_tol / span.abs().max(1e-300));
    integrate(&inner, ax, bx, abs_tol)
}

