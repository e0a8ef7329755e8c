//! Adaptive Gauss–Kronrod (7/15) quadrature with global bisection, plus a
//! helper for polynomially decaying integrands on `[a, ∞)`.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_3,
    0.949_107_912_342_758_524_526_189_684_047_9,
    0.864_864_423_359_769_072_789_712_788_640_9,
    0.741_531_185_599_394_439_863_864_773_280_8,
    0.586_087_235_467_691_130_294_144_845_693_0,
    0.405_845_151_377_397_166_906_606_412_076_9,
    0.207_784_955_007_898_467_600_689_403_773_2,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_20,
    0.104_790_010_322_250_183_839_876_322_541_5,
    0.140_653_259_715_525_918_745_189_590_510_2,
    0.169_004_726_639_267_902_826_583_426_598_6,
    0.190_350_578_064_785_409_913_256_402_421_0,
    0.204_432_940_075_298_892_414_161_999_234_6,
    0.209_482_141_084_727_828_012_999_174_891_7,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_1,
    0.279_705_391_489_276_667_901_467_771_423_8,
    0.381_830_050_505_118_944_950_369_775_489_0,
    0.417_959_183_673_469_387_755_102_040_816_3,
];

const MAX_INTERVALS: usize = 4000;

/// Result of a quadrature call: value and estimated absolute error.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        // Gauss nodes are the odd-indexed Kronrod nodes.
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    (value, err)
}

/// Integrates `f` over the finite interval `[a, b]` until the estimated
/// error is below `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Quadrature(format!("non-finite limits [{a}, {b}]")));
    }
    if a == b {
        return Ok(Integral { value: 0.0, abs_error: 0.0 });
    }
    let (v, e) = gk15(&f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    let mut total = v;
    let mut total_err = e;
    loop {
        if !total.is_finite() {
            return Err(Error::Quadrature(format!("non-finite integrand on [{a}, {b}]")));
        }
        if total_err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(Integral { value: total, abs_error: total_err });
        }
        if intervals.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature(format!(
                "no convergence on [{a}, {b}] after {MAX_INTERVALS} subdivisions (error {total_err:e})"
            )));
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, v0, e0) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // Interval can no longer be split in f64; accept what we have.
            return Ok(Integral { value: total, abs_error: total_err });
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        total += v1 + v2 - v0;
        total_err += e1 + e2 - e0;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

/// Integrates `f` over `[a, ∞)` for `a > 0` and `f` with polynomial decay.
///
/// Uses `x = a·e^s`, which turns polynomial decay into exponential decay, and
/// cuts the `s` range where the transformed integrand falls below `1e-16` of
/// its largest sampled magnitude.
pub fn integrate_upper_tail<F: Fn(f64) -> f64>(f: F, a: f64, rel_tol: f64) -> Result<Integral> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Quadrature(format!("lower limit must be positive and finite, got {a}")));
    }
    let g = |s: f64| {
        let x = a * s.exp();
        if x.is_infinite() {
            0.0
        } else {
            f(x) * x
        }
    };
    let mut peak = g(0.0).abs();
    let mut upper = 1.0_f64;
    loop {
        // sample the stretch (upper/2, upper] for the running peak
        for i in 1..=8 {
            let s = upper * (0.5 + 0.5 * i as f64 / 8.0);
            peak = peak.max(g(s).abs());
        }
        let tail = g(upper).abs();
        if tail <= 1e-16 * peak || upper >= 4096.0 {
            break;
        }
        upper *= 2.0;
    }
    if peak == 0.0 {
        return Ok(Integral { value: 0.0, abs_error: 0.0 });
    }
    // break the range at powers of two so narrow peaks near zero are resolved
    let mut value = 0.0;
    let mut abs_error = 0.0;
    let mut lo = 0.0;
    let mut hi = 0.5_f64.min(upper);
    while lo < upper {
        let piece = integrate(&g, lo, hi, rel_tol, 0.0)?;
        value += piece.value;
        abs_error += piece.abs_error;
        lo = hi;
        hi = (hi * 2.0).min(upper);
    }
    Ok(Integral { value, abs_error })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12, 0.0).unwrap();
        assert!((r.value - 0.0).abs() < 1e-12);
        let r = integrate(|x| x.powi(5), -1.0, 3.0, 1e-12, 0.0).unwrap();
        assert!((r.value - (729.0 - 1.0) / 6.0).abs() < 1e-9);
    }

    #[test]
    fn integrable_endpoint_singularity() {
        let r = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-10, 0.0).unwrap();
        assert!((r.value - 2.0).abs() < 1e-8, "{}", r.value);
    }

    #[test]
    fn pareto_tail() {
        // ∫_3^∞ x^{-2.5} dx = 3^{-1.5}/1.5
        let r = integrate_upper_tail(|x: f64| x.powf(-2.5), 3.0, 1e-10).unwrap();
        let exact = 3f64.powf(-1.5) / 1.5;
        assert!(((r.value - exact) / exact).abs() < 1e-9);
    }

    #[test]
    fn slow_decay_tail() {
        // ∫_1^∞ x^{-1.2} dx = 5
        let r = integrate_upper_tail(|x: f64| x.powf(-1.2), 1.0, 1e-10).unwrap();
        assert!((r.value - 5.0).abs() < 1e-6, "{}", r.value);
    }

    #[test]
    fn rejects_bad_limits() {
        assert!(integrate(|x| x, 0.0, f64::INFINITY, 1e-8, 0.0).is_err());
        assert!(integrate_upper_tail(|x| x, 0.0, 1e-8).is_err());
    }
}
