//! Gauss–Legendre rules and real spherical harmonics.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// `P_n` from the Chebyshev initial guesses.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss–Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Number of real spherical harmonics of degree `≤ lmax`.
pub fn harmonic_count(lmax: usize) -> usize {
    (lmax + 1) * (lmax + 1)
}

#[inline]
pub fn harmonic_index(l: usize, m: isize) -> usize {
    (l * l) as isize as usize + (l as isize + m) as usize
}

/// Real orthonormal spherical harmonics `Y_lm(θ, φ)` for `l ≤ lmax`, written
/// into `out` in [`harmonic_index`] order. `cos_theta` and `phi` give the
/// direction; `m < 0` carries `sin(|m|φ)`, `m > 0` carries `cos(mφ)`.
pub fn real_harmonics(lmax: usize, cos_theta: f64, phi: f64, out: &mut [f64]) {
    debug_assert!(out.len() >= harmonic_count(lmax));
    let x = cos_theta.clamp(-1.0, 1.0);
    let sin_theta = (1.0 - x * x).max(0.0).sqrt();
    let sqrt2 = std::f64::consts::SQRT_2;
    // p̄_mm, advanced along the diagonal.
    let mut pmm = 1.0 / (4.0 * PI).sqrt();
    for m in 0..=lmax {
        if m > 0 {
            pmm *= ((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * sin_theta;
        }
        let (cm, sm) = if m == 0 {
            (1.0, 0.0)
        } else {
            let a = m as f64 * phi;
            (sqrt2 * a.cos(), sqrt2 * a.sin())
        };
        let mut store = |l: usize, p: f64| {
            if m == 0 {
                out[harmonic_index(l, 0)] = p;
            } else {
                out[harmonic_index(l, m as isize)] = p * cm;
                out[harmonic_index(l, -(m as isize))] = p * sm;
            }
        };
        store(m, pmm);
        if m == lmax {
            break;
        }
        let mut p_prev = pmm;
        let mut p = ((2 * m + 3) as f64).sqrt() * x * pmm;
        store(m + 1, p);
        for l in (m + 2)..=lmax {
            let lf = l as f64;
            let mf = m as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            let next = a * (x * p - b * p_prev);
            p_prev = p;
            p = next;
            store(l, p);
        }
    }
}
