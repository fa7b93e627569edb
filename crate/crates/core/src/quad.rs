//! Adaptive Simpson quadrature.

/// Integral value together with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

const MAX_DEPTH: u32 = 48;

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
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
) -> Quadrature {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    if depth >= MAX_DEPTH || delta.abs() <= 15.0 * tol || m <= a || m >= b {
        return Quadrature {
            value: left + right + delta / 15.0,
            error: delta.abs() / 15.0,
        };
    }
    let l = recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1);
    let r = recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
    Quadrature {
        value: l.value + r.value,
        error: l.error + r.error,
    }
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Quadrature {
    if b <= a {
        return Quadrature { value: 0.0, error: 0.0 };
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, b - a);
    recurse(&f, a, b, fa, fm, fb, whole, tol, 0)
}

/// Integrates a nonnegative, eventually decreasing `f` over `[a, inf)`.
///
/// The range is covered by pieces `[a + h(2^k - 1), a + h(2^(k+1) - 1)]`.
/// Pieces are added until the latest contributes less than `rel_tol` of
/// the running total and `stop(right_end)` holds, or `max_pieces` is hit.
pub fn integrate_to_infinity<F, S>(
    f: F,
    a: f64,
    h: f64,
    rel_tol: f64,
    stop: S,
    max_pieces: usize,
) -> Quadrature
where
    F: Fn(f64) -> f64,
    S: Fn(f64) -> bool,
{
    let mut total = Quadrature { value: 0.0, error: 0.0 };
    let mut lo = a;
    let mut width = h;
    for _ in 0..max_pieces {
        let hi = lo + width;
        // Local tolerance relative to what has been accumulated so far; the
        // first piece gets a scale from a crude estimate.
        let crude = adaptive_simpson(&f, lo, hi, f64::INFINITY).value.abs();
        let scale = (total.value.abs() + crude).max(f64::MIN_POSITIVE);
        let piece = adaptive_simpson(&f, lo, hi, 0.01 * rel_tol * scale);
        total.value += piece.value;
        total.error += piece.error;
        lo = hi;
        width *= 2.0;
        if piece.value.abs() <= rel_tol * total.value.abs() && stop(lo) {
            break;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let q = adaptive_simpson(|x| x * x * x, 0.0, 2.0, 1e-12);
        assert!((q.value - 4.0).abs() < 1e-12);
    }

    #[test]
    fn exponential_half_line() {
        let q = integrate_to_infinity(|x| (-x).exp(), 0.0, 1.0, 1e-12, |u| u > 40.0, 64);
        assert!((q.value - 1.0).abs() < 1e-10, "{q:?}");
    }

    #[test]
    fn power_law_half_line() {
        // int_1^inf x^{-2.5} dx = 1 / 1.5
        let q = integrate_to_infinity(|x| x.powf(-2.5), 1.0, 1.0, 1e-12, |u| u > 1e9, 80);
        assert!((q.value - 1.0 / 1.5).abs() < 1e-8, "{q:?}");
    }

    #[test]
    fn empty_interval() {
        assert_eq!(adaptive_simpson(|x| x, 1.0, 1.0, 1e-9).value, 0.0);
    }
}
