//! Adaptive Gauss-Kronrod quadrature and the generalized exponential
//! integral `E_p(z) = int_1^inf e^(-z t) t^(-p) dt`.

use crate::error::{Error, Result};

// 15-point Kronrod nodes on [-1, 1] (non-negative half) with the embedded
// 7-point Gauss weights.
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

const MAX_INTERVALS: usize = 2000;

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let pair = f(c - x) + f(c + x);
        kron += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// `int_a^b f(x) dx` to roughly `rel_tol` relative accuracy.
///
/// Globally adaptive: the interval with the largest error estimate is
/// bisected until the summed estimate meets the tolerance, drops to the
/// roundoff level, or the interval budget runs out.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    let (v, e) = kronrod(&f, a, b);
    let mut parts = vec![(a, b, v, e)];
    let (mut value, mut err) = (v, e);
    while parts.len() < MAX_INTERVALS {
        let target = (rel_tol * value.abs()).max(4.0 * f64::EPSILON * value.abs());
        if err <= target {
            break;
        }
        let worst = (0..parts.len())
            .max_by(|&i, &j| parts[i].3.total_cmp(&parts[j].3))
            .expect("non-empty");
        let (lo, hi, v, e) = parts[worst];
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let left = kronrod(&f, lo, mid);
        let right = kronrod(&f, mid, hi);
        value += left.0 + right.0 - v;
        err += left.1 + right.1 - e;
        parts[worst] = (lo, mid, left.0, left.1);
        parts.push((mid, hi, right.0, right.1));
    }
    // re-sum to shed the drift of the running update
    parts.iter().map(|p| p.2).sum()
}

/// `ln(1e18)`: beyond this the factor `e^(-z(t-1))` is below `1e-18`.
const TAIL_CUTOFF: f64 = 41.446_531_673_892_82;

/// `E_p(z)` for `p > 1`, `z >= 0`.
///
/// With `t = e^u` the integral is `int_0^U exp(-z e^u + (1-p) u) du`, cut at
/// `e^U = 1 + 41.45/z` so the dropped tail is below `1e-18` of the integrand at `u = 0`.
pub fn gen_exp_integral(p: f64, z: f64) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!("E_p(z) needs p > 1, got p = {p}")));
    }
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("E_p(z) needs z >= 0, got z = {z}")));
    }
    if z == 0.0 {
        return Ok(1.0 / (p - 1.0));
    }
    // factor e^(-z) out so the integrand starts at 1
    let g = |u: f64| (-z * u.exp_m1() + (1.0 - p) * u).exp();
    let upper = (TAIL_CUTOFF / z).ln_1p();
    // the (1-p) u decay can be far slower than the cutoff, so integrate piecewise
    let mut total = 0.0;
    let mut lo = 0.0;
    while lo < upper {
        let hi = (lo + 1.0 + lo).min(upper);
        total += integrate(g, lo, hi, 1e-14);
        lo = hi;
    }
    Ok((-z).exp() * total)
}

/// `z` with `E_p(z) = x`, for `0 < x < 1/(p-1)`, by bracketing and bisection.
pub fn gen_exp_integral_inverse(p: f64, x: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::Domain(format!("E_p needs p > 1, got p = {p}")));
    }
    let top = 1.0 / (p - 1.0);
    if !(x > 0.0 && x < top) {
        return Err(Error::Domain(format!("E_p^-1(x) needs 0 < x < {top}, got x = {x}")));
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while gen_exp_integral(p, hi)? > x {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::Domain(format!("E_p^-1({x}) beyond bracket")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gen_exp_integral(p, mid)? > x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
