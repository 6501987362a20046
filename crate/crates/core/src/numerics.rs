//! Scalar root finding and 1-D extremization used throughout the crate.
//!
//! The closures are fallible so that geometric failures (a ray leaving the
//! hemisphere, a point falling inside a caustic) surface unchanged instead of
//! being smuggled through as NaN.

use crate::error::{Error, Result};

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Brent's method on a bracket `[a, b]` with `f(a)` and `f(b)` of opposite sign.
///
/// Terminates when the bracket is below `xtol` (absolute) plus a few ulps of the
/// current iterate, or when an exact zero is hit.
pub fn brent<F>(mut f: F, a: f64, b: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let fa = f(a)?;
    let fb = f(b)?;
    brent_with_values(&mut f, a, fa, b, fb, xtol)
}

/// Like [`brent`] when the endpoint values are already known.
pub fn brent_with_values<F>(f: &mut F, a: f64, fa: f64, b: f64, fb: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut fa, mut b, mut fb) = (a, fa, b, fb);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Solver(format!(
            "root not bracketed: f({a}) = {fa:e}, f({b}) = {fb:e}"
        )));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Err(Error::Solver("brent: iteration limit".into()))
}

/// Golden-section search for the maximum of a unimodal function on `[a, b]`.
/// Returns `(argmax, max)`.
pub fn golden_max<F>(mut f: F, a: f64, b: f64, xtol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (a, b);
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while (b - a).abs() > xtol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = f(x1)?;
        }
    }
    Ok(if f1 > f2 { (x1, f1) } else { (x2, f2) })
}

/// Golden-section search for the minimum. Returns `(argmin, min)`.
pub fn golden_min<F>(mut f: F, a: f64, b: f64, xtol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (x, v) = golden_max(|x| f(x).map(|y| -y), a, b, xtol)?;
    Ok((x, -v))
}

/// Two-stage maximization over a periodic parameter: a uniform grid of `n`
/// samples followed by golden-section refinement around the best sample.
pub fn periodic_max<F>(mut f: F, period: f64, n: usize, xtol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let h = period / n as f64;
    let mut best = (0.0, f64::NEG_INFINITY);
    for k in 0..n {
        let x = k as f64 * h;
        let v = f(x)?;
        if v > best.1 {
            best = (x, v);
        }
    }
    let (x, v) = golden_max(&mut f, best.0 - h, best.0 + h, xtol)?;
    Ok(if v >= best.1 { (x, v) } else { best })
}

/// Lagrange basis weights (value, first and second derivative) for six
/// equispaced nodes at 0..=5, evaluated at `x` in node units.
pub(crate) fn lagrange6(x: f64) -> ([f64; 6], [f64; 6], [f64; 6]) {
    let mut w0 = [0.0; 6];
    let mut w1 = [0.0; 6];
    let mut w2 = [0.0; 6];
    let d: [f64; 6] = std::array::from_fn(|m| x - m as f64);
    for j in 0..6 {
        let mut denom = 1.0;
        for m in 0..6 {
            if m != j {
                denom *= j as f64 - m as f64;
            }
        }
        // value
        let mut p = 1.0;
        for m in 0..6 {
            if m != j {
                p *= d[m];
            }
        }
        // first derivative: sum over the dropped factor
        let mut p1 = 0.0;
        for a in 0..6 {
            if a == j {
                continue;
            }
            let mut q = 1.0;
            for m in 0..6 {
                if m != j && m != a {
                    q *= d[m];
                }
            }
            p1 += q;
        }
        // second derivative: sum over ordered pairs of dropped factors
        let mut p2 = 0.0;
        for a in 0..6 {
            if a == j {
                continue;
            }
            for b in 0..6 {
                if b == j || b == a {
                    continue;
                }
                let mut q = 1.0;
                for m in 0..6 {
                    if m != j && m != a && m != b {
                        q *= d[m];
                    }
                }
                p2 += q;
            }
        }
        w0[j] = p / denom;
        w1[j] = p1 / denom;
        w2[j] = p2 / denom;
    }
    (w0, w1, w2)
}

/// Six-point Lagrange interpolation of scalar samples on a uniform grid,
/// clamping the stencil to the available range.
pub(crate) fn interp_uniform(values: &[f64], x0: f64, h: f64, x: f64) -> f64 {
    let n = values.len();
    debug_assert!(n >= 6);
    let u = (x - x0) / h;
    let i0 = (u.floor() as isize - 2).clamp(0, n as isize - 6) as usize;
    let (w, _, _) = lagrange6(u - i0 as f64);
    (0..6).map(|j| w[j] * values[i0 + j]).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_cubic_root() {
        let r = brent(|x| Ok(x * x * x - 2.0), 0.0, 2.0, 1e-15).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn brent_rejects_unbracketed() {
        assert!(brent(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, v) = golden_max(|x| Ok(-(x - 0.3) * (x - 0.3) + 1.0), -1.0, 2.0, 1e-10).unwrap();
        assert!((x - 0.3).abs() < 1e-8);
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lagrange_reproduces_quintic_and_derivatives() {
        let f = |x: f64| 1.0 + x - 0.5 * x * x + 0.1 * x.powi(3) - 0.02 * x.powi(5);
        let df = |x: f64| 1.0 - x + 0.3 * x * x - 0.1 * x.powi(4);
        let d2f = |x: f64| -1.0 + 0.6 * x - 0.4 * x.powi(3);
        let x = 2.37;
        let (w0, w1, w2) = lagrange6(x);
        let vals: Vec<f64> = (0..6).map(|m| f(m as f64)).collect();
        let v: f64 = (0..6).map(|j| w0[j] * vals[j]).sum();
        let d1: f64 = (0..6).map(|j| w1[j] * vals[j]).sum();
        let d2: f64 = (0..6).map(|j| w2[j] * vals[j]).sum();
        assert!((v - f(x)).abs() < 1e-12);
        assert!((d1 - df(x)).abs() < 1e-11);
        assert!((d2 - d2f(x)).abs() < 1e-10);
    }
}
