//! Adaptive Simpson quadrature.

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`, splitting first
/// at every point of `breaks` that lies inside the interval.
pub(crate) fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&c| c > a && c < b).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut nodes = Vec::with_capacity(cuts.len() + 2);
    nodes.push(a);
    nodes.extend(cuts);
    nodes.push(b);
    let share = tol / (nodes.len() - 1) as f64;
    nodes
        .windows(2)
        .map(|w| {
            // Pre-split each piece so that narrow features are not missed.
            let pieces = 16;
            let h = (w[1] - w[0]) / pieces as f64;
            (0..pieces)
                .map(|i| {
                    let lo = w[0] + i as f64 * h;
                    let hi = if i + 1 == pieces { w[1] } else { lo + h };
                    simpson_start(f, lo, hi, share / pieces as f64)
                })
                .sum::<f64>()
        })
        .sum()
}

fn simpson_start(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn recurse(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_step() {
        let v = integrate(&|x| x * x, 0.0, 3.0, &[], 1e-12);
        assert!((v - 9.0).abs() < 1e-12);
        let step = |x: f64| if x < 0.3 { 0.0 } else { 2.0 };
        assert!((integrate(&step, 0.0, 1.0, &[0.3], 1e-12) - 1.4).abs() < 1e-12);
        assert!((integrate(&step, 0.0, 1.0, &[], 1e-12) - 1.4).abs() < 1e-9);
        assert_eq!(integrate(&|x| x, 1.0, 1.0, &[], 1e-9), 0.0);
    }
}
