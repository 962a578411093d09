//! Gauss-Legendre quadrature on finite intervals.
//!
//! Every time integral in this crate (gauge phase, potential substeps,
//! averaging residuals) goes through the composite rules here, so node
//! placement policy lives in one place: callers state a maximum node
//! spacing and the rule picks enough panels to honor it.

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
///
/// Newton iteration on the Legendre polynomial, seeded with the Chebyshev
/// angle estimate. Exact for polynomials of degree 2n-1. Only the first
/// half of the roots is solved; the rest follow by symmetry.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be at least 1");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // P_n(x) and P_n'(x) by the three-term recurrence.
    let eval = |x: f64| -> (f64, f64) {
        let mut p0 = 1.0;
        let mut p1 = x;
        for k in 2..=n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let (p, prev) = if n == 1 { (x, 1.0) } else { (p1, p0) };
        (p, n as f64 * (x * p - prev) / (x * x - 1.0))
    };
    for i in 0..(n + 1) / 2 {
        // Initial guess: Chebyshev points approximate Legendre roots well.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = eval(x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        // The weight needs the derivative at the converged root, not at
        // the last Newton iterate.
        let (_, dp) = eval(x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// An n-point rule mapped onto [a, b]: `sum_j w_j f(x_j)`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, order: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(order);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(&weights) {
        acc += w * f(mid + half * x);
    }
    half * acc
}

/// Composite rule over [a, b] with per-panel order `order` and enough
/// panels that adjacent nodes are no farther apart than `max_spacing`.
pub fn integrate_composite<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    order: usize,
    max_spacing: f64,
) -> f64 {
    assert!(max_spacing > 0.0, "node spacing bound must be positive");
    if a == b {
        return 0.0;
    }
    let panels = panel_count(b - a, order, max_spacing);
    let (nodes, weights) = gauss_legendre(order);
    let width = (b - a) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let half = 0.5 * width;
        let mid = lo + half;
        let mut panel = 0.0;
        for (x, w) in nodes.iter().zip(&weights) {
            panel += w * f(mid + half * x);
        }
        acc += half * panel;
    }
    acc
}

/// Number of equal panels so that `order` nodes per panel keep the average
/// node spacing at or below `max_spacing`.
pub fn panel_count(length: f64, order: usize, max_spacing: f64) -> usize {
    let needed = (length.abs() / (order as f64 * max_spacing)).ceil();
    (needed as usize).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn low_order_nodes_match_reference_values() {
        // Classical tabulated roots and weights.
        let (n2, w2) = gauss_legendre(2);
        assert_relative_eq!(n2[1], 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(w2[0], 1.0, epsilon = 1e-15);

        let (n3, w3) = gauss_legendre(3);
        assert_relative_eq!(n3[2], (3f64 / 5.0).sqrt(), epsilon = 1e-15);
        assert_relative_eq!(w3[1], 8.0 / 9.0, epsilon = 1e-15);
        assert_relative_eq!(w3[0], 5.0 / 9.0, epsilon = 1e-15);

        let (n5, w5) = gauss_legendre(5);
        // Largest root and its weight for n = 5.
        assert_relative_eq!(n5[4], 0.906179845938664, epsilon = 1e-14);
        assert_relative_eq!(w5[4], 0.236926885056189, epsilon = 1e-14);
    }

    #[test]
    fn weights_sum_to_interval_measure() {
        for n in [1, 2, 3, 4, 8, 16, 32, 64] {
            let (_, w) = gauss_legendre(n);
            let total: f64 = w.iter().sum();
            assert_relative_eq!(total, 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        // n = 4 integrates x^7 exactly on [0, 2]: 2^8 / 8 = 32.
        let val = integrate(|x| x.powi(7), 0.0, 2.0, 4);
        assert_relative_eq!(val, 32.0, epsilon = 1e-12);
        // ... and shows a visible error on x^8 (degree 2n).
        let val8 = integrate(|x| x.powi(8), 0.0, 2.0, 4);
        assert!((val8 - 2f64.powi(9) / 9.0).abs() > 1e-6);
    }

    #[test]
    fn composite_resolves_oscillatory_integrand() {
        // Integral of cos(omega t) over [0, 1] = sin(omega)/omega. With
        // 8-point panels, spacing pi/(4 omega) puts 8 nodes on each fast
        // period and is good to ~1e-10 absolute; a 4x finer spacing
        // reaches roundoff. Both regimes are relied on elsewhere.
        let omega: f64 = 200.0;
        let exact = omega.sin() / omega;
        let coarse = integrate_composite(
            |t| (omega * t).cos(),
            0.0,
            1.0,
            8,
            std::f64::consts::PI / (4.0 * omega),
        );
        assert!((coarse - exact).abs() < 1e-9, "coarse err {:e}", coarse - exact);
        let fine = integrate_composite(
            |t| (omega * t).cos(),
            0.0,
            1.0,
            8,
            std::f64::consts::PI / (16.0 * omega),
        );
        assert_relative_eq!(fine, exact, max_relative = 1e-12);
    }

    #[test]
    fn panel_count_honors_spacing_bound() {
        let panels = panel_count(1.0, 8, 0.01);
        // 8 nodes per panel, spacing <= 0.01 needs >= 12.5 panels.
        assert_eq!(panels, 13);
        assert_eq!(panel_count(0.0, 8, 0.01), 1);
    }

    #[test]
    fn composite_degenerate_interval_is_zero() {
        assert_eq!(integrate_composite(|_| 1.0, 3.0, 3.0, 8, 0.1), 0.0);
    }
}
