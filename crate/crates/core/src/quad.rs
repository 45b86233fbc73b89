//! Adaptive Gauss–Kronrod quadrature (7–15 pair) with worst-interval-first
//! subdivision, plus the u/(1-u) map used for semi-infinite momentum axes.

use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Value, error estimate and evaluation count of a finished quadrature.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

// 15-point Kronrod abscissae (positive half) and weights; the 7-point Gauss
// weights sit under the odd-indexed abscissae. Standard QUADPACK dqk15 data.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// One Gauss–Kronrod 7-15 panel on [a, b]: (integral, error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut res_abs = kronrod.abs();
    let mut fv = [0.0f64; 14];
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv[j] = f1;
        fv[j + 7] = f2;
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = kronrod * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv[j] - mean).abs() + (fv[j + 7] - mean).abs());
    }
    let err = rescale_error(
        (kronrod - gauss) * half,
        res_abs * half.abs(),
        res_asc * half.abs(),
    );
    (kronrod * half, err)
}

#[derive(PartialEq)]
struct Interval {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl Eq for Interval {}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Adaptively integrate `f` over [a, b] to absolute tolerance `abs_tol`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
) -> Result<QuadratureResult> {
    const MAX_INTERVALS: usize = 4096;
    if !(a < b) {
        return Err(Error::InvalidParameter(format!(
            "integration interval [{a}, {b}] is empty"
        )));
    }
    let mut heap = BinaryHeap::new();
    let (v, e) = gk15(&f, a, b);
    let mut evaluations = 15;
    heap.push(Interval {
        a,
        b,
        value: v,
        error: e,
    });
    let mut total_error = e;
    while total_error > abs_tol && heap.len() < MAX_INTERVALS {
        let worst = heap.pop().expect("heap never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval at floating-point resolution; keep its estimate
            total_error -= worst.error;
            heap.push(Interval {
                error: 0.0,
                ..worst
            });
            continue;
        }
        total_error -= worst.error;
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        evaluations += 30;
        total_error += e1 + e2;
        heap.push(Interval {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Interval {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    let value = crate::numeric::compensated_sum(heap.iter().map(|i| i.value));
    if total_error > abs_tol {
        return Err(Error::QuadratureTolerance {
            error: total_error,
            requested: abs_tol,
        });
    }
    Ok(QuadratureResult {
        value,
        error_estimate: total_error,
        evaluations,
    })
}

/// Integrate `f` over (0, ∞) through the substitution p = scale·u/(1-u),
/// which maps the axis onto (0, 1) with weight scale/(1-u)².
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(
    f: F,
    scale: f64,
    abs_tol: f64,
) -> Result<QuadratureResult> {
    assert!(scale > 0.0);
    integrate(
        |u| {
            let w = 1.0 - u;
            let p = scale * u / w;
            f(p) * scale / (w * w)
        },
        0.0,
        1.0,
        abs_tol,
    )
}

/// Integrate `f` over (-∞, ∞) by splitting at 0 and mapping each half.
pub fn integrate_real_line<F: Fn(f64) -> f64 + Copy>(
    f: F,
    scale: f64,
    abs_tol: f64,
) -> Result<QuadratureResult> {
    let pos = integrate_semi_infinite(f, scale, 0.5 * abs_tol)?;
    let neg = integrate_semi_infinite(move |p| f(-p), scale, 0.5 * abs_tol)?;
    Ok(QuadratureResult {
        value: pos.value + neg.value,
        error_estimate: pos.error_estimate + neg.error_estimate,
        evaluations: pos.evaluations + neg.evaluations,
    })
}

/// Iterated 2D quadrature: an adaptive outer pass whose integrand is an
/// adaptive inner integral, both on semi-infinite axes mapped to (0, 1).
/// The inner pass runs at a tolerance small against the outer one.
pub fn integrate_2d_semi_infinite<F: Fn(f64, f64) -> f64>(
    f: F,
    scale_x: f64,
    scale_y: f64,
    abs_tol: f64,
) -> Result<QuadratureResult> {
    use std::cell::Cell;
    let inner_tol = 0.02 * abs_tol;
    let inner_failed = Cell::new(false);
    let inner_evals = Cell::new(0usize);
    let outer = integrate_semi_infinite(
        |x| match integrate_semi_infinite(|y| f(x, y), scale_y, inner_tol) {
            Ok(r) => {
                inner_evals.set(inner_evals.get() + r.evaluations);
                r.value
            }
            Err(_) => {
                inner_failed.set(true);
                0.0
            }
        },
        scale_x,
        abs_tol,
    )?;
    if inner_failed.get() {
        return Err(Error::QuadratureTolerance {
            error: f64::NAN,
            requested: inner_tol,
        });
    }
    Ok(QuadratureResult {
        value: outer.value,
        error_estimate: outer.error_estimate,
        evaluations: outer.evaluations + inner_evals.get(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn exponential_tail() {
        let r = integrate_semi_infinite(|p| (-p).exp(), 1.0, 1e-12).unwrap();
        assert_relative_eq!(r.value, 1.0, epsilon = 1e-11);
    }

    #[test]
    fn lorentzian_over_real_line() {
        let r = integrate_real_line(|x| 1.0 / (1.0 + x * x), 1.0, 1e-11).unwrap();
        assert_relative_eq!(r.value, PI, epsilon = 1e-10);
    }

    #[test]
    fn product_gaussian_2d() {
        // ∫∫_0^∞ e^{-x-y} dx dy = 1
        let r = integrate_2d_semi_infinite(|x, y| (-x - y).exp(), 1.0, 1.0, 1e-9).unwrap();
        assert_relative_eq!(r.value, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn error_estimate_below_request() {
        let r = integrate(|x| x.sin(), 0.0, PI, 1e-12).unwrap();
        assert_relative_eq!(r.value, 2.0, epsilon = 1e-12);
        assert!(r.error_estimate <= 1e-12);
    }
}
