//! Quadrature on uniform samples and adaptive Simpson for closures.

use crate::error::{Error, Result};

/// Composite Simpson when the number of intervals is even, composite
/// trapezoid otherwise. `values` are samples at spacing `h`.
pub fn composite(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    if (n - 1) % 2 == 0 {
        simpson(values, h)
    } else {
        trapezoid(values, h)
    }
}

pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..n - 1].iter().sum();
    h * (inner + 0.5 * (values[0] + values[n - 1]))
}

/// Composite Simpson; requires an even number of intervals.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    debug_assert!(n >= 3 && (n - 1) % 2 == 0);
    let mut odd = 0.0;
    let mut even = 0.0;
    for (k, v) in values.iter().enumerate().take(n - 1).skip(1) {
        if k % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    h / 3.0 * (values[0] + values[n - 1] + 4.0 * odd + 2.0 * even)
}

/// Composite-quadrature weights matching [`composite`] for `n` samples.
pub fn composite_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n];
    if n < 2 {
        return w;
    }
    if (n - 1) % 2 == 0 {
        for (k, wk) in w.iter_mut().enumerate() {
            *wk = if k == 0 || k == n - 1 {
                h / 3.0
            } else if k % 2 == 1 {
                4.0 * h / 3.0
            } else {
                2.0 * h / 3.0
            };
        }
    } else {
        w.fill(h);
        w[0] = 0.5 * h;
        w[n - 1] = 0.5 * h;
    }
    w
}

/// Adaptive Simpson with the Richardson correction on accepted panels.
///
/// `tol` is an absolute tolerance on the whole interval. Fails when the
/// recursion exhausts `max_depth` on some panel without meeting its share of
/// the tolerance; the error carries the best estimate.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: f64, max_depth: u32) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut worst = 0.0_f64;
    let value = recurse(&f, a, b, fa, fm, fb, whole, tol, max_depth, &mut worst);
    if worst > 0.0 {
        return Err(Error::ToleranceNotMet {
            tol,
            estimate: value,
            error: worst,
        });
    }
    Ok(value)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    worst: &mut f64,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    if depth == 0 {
        *worst = worst.max(delta.abs() / 15.0);
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, worst)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn simpson_is_exact_for_cubics() {
        let h = 0.25;
        let v: Vec<f64> = (0..=8).map(|k| (k as f64 * h).powi(3)).collect();
        assert_relative_eq!(composite(&v, h), 2.0_f64.powi(4) / 4.0, max_relative = 1e-14);
    }

    #[test]
    fn odd_interval_count_falls_back_to_trapezoid() {
        let v = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(composite(&v, 1.0), 4.5);
    }

    #[test]
    fn weights_match_composite() {
        for n in [2, 3, 4, 9, 10] {
            let v: Vec<f64> = (0..n).map(|k| ((k * k) as f64).sin()).collect();
            let w = composite_weights(n, 0.3);
            let dot: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
            assert_relative_eq!(dot, composite(&v, 0.3), max_relative = 1e-14);
        }
    }

    #[test]
    fn adaptive_handles_sharp_layers() {
        let got = adaptive_simpson(|x| 76.0 * (-76.0 * x).exp(), 0.0, 10.0, 1e-13, 50).unwrap();
        assert_relative_eq!(got, 1.0 - (-760.0f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn adaptive_reports_exhausted_depth() {
        let err = adaptive_simpson(|x| x.sqrt(), 0.0, 1.0, 1e-15, 3).unwrap_err();
        assert!(matches!(err, Error::ToleranceNotMet { .. }));
    }
}
