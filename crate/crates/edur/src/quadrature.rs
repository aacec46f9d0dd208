//! Gauss-Hermite nodes and weights for averaging over Gaussian rotation
//! noise, plus a midpoint rule for the uniform alternative.

/// Nodes and weights for integrating f against exp(-x^2) on the real
/// line with an n-point Gauss-Hermite rule.
///
/// Newton iteration on the orthonormal Hermite recurrence; the standard
/// construction for this rule.
pub fn gauss_hermite(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..(n + 1) / 2 {
        // Initial guesses for the i-th largest root.
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[0],
            3 => 1.91 * z - 0.91 * nodes[1],
            _ => 2.0 * z - nodes[i - 2],
        };
        let mut ln_pp = 0.0;
        for _ in 0..200 {
            // Orthonormal Hermite values at z, rescaled on the fly so
            // large orders do not overflow; the Newton ratio p1/pp is
            // scale free and the weight only needs log|pp|.
            let mut p1 = std::f64::consts::PI.powf(-0.25);
            let mut p2 = 0.0f64;
            let mut log_scale = 0.0f64;
            for j in 1..=n {
                let jf = j as f64;
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
                if p1.abs() > 1e100 {
                    p1 *= 1e-100;
                    p2 *= 1e-100;
                    log_scale += 100.0 * std::f64::consts::LN_10;
                }
            }
            let pp = (2.0 * nf).sqrt() * p2;
            ln_pp = pp.abs().ln() + log_scale;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 3e-14 {
                break;
            }
        }
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        weights[i] = (2.0f64.ln() - 2.0 * ln_pp).exp();
        weights[n - 1 - i] = weights[i];
    }
    nodes.into_iter().zip(weights).collect()
}

/// Sample points and equal weights for the midpoint rule on [lo, hi];
/// weights sum to 1.
pub fn midpoint(lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let h = (hi - lo) / n as f64;
    (0..n)
        .map(|i| (lo + (i as f64 + 0.5) * h, 1.0 / n as f64))
        .collect()
}
