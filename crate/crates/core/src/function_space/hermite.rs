//! Orthonormal Hermite functions `e_k(t) = (2^k k! √π)^{-1/2} H_k(t) e^{-t²/2}`.
//!
//! These diagonalize the oscillator Hamiltonian `A = -d²/dt² + t² + 1` with `A e_k = (2k+2) e_k`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

/// `π^{-1/4}`
const PI_M_QUARTER: f64 = 0.751_125_544_464_942_5;

/// Values `e_0(x), …, e_{n-1}(x)` by the three-term recurrence.
///
/// The Gaussian factor is carried in log form so that large-order functions far from the
/// origin do not underflow before the polynomial part has grown.
pub fn hermite_functions(x: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    let gauss_log = -0.5 * x * x;
    let mut log_scale = 0.0;
    let mut prev = 0.0;
    let mut cur = PI_M_QUARTER;
    out.push(cur * gauss_log.exp());
    for k in 0..n - 1 {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > 1e150 {
            cur *= 1e-150;
            prev *= 1e-150;
            log_scale += 150.0 * std::f64::consts::LN_10;
        }
        out.push(cur * (gauss_log + log_scale).exp());
    }
    out
}

/// Integrals `∫_a^b e_k(t) dt` for `k < n`.
///
/// Uses `e_k' = √(k/2) e_{k-1} − √((k+1)/2) e_{k+1}`, which gives the forward recurrence
/// `I_{k+1} = √(k/(k+1)) I_{k-1} − √(2/(k+1)) [e_k]_a^b`. The homogeneous part contracts, so
/// rounding does not accumulate.
pub fn hermite_interval_integrals(a: f64, b: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    let (sa, sb) = (a * FRAC_1_SQRT_2, b * FRAC_1_SQRT_2);
    // Difference of erf in the numerically favourable tail.
    let erf_diff = if sa >= 0.0 {
        libm::erfc(sa) - libm::erfc(sb)
    } else if sb <= 0.0 {
        libm::erfc(-sb) - libm::erfc(-sa)
    } else {
        libm::erf(sb) - libm::erf(sa)
    };
    out.push(PI_M_QUARTER * (PI / 2.0).sqrt() * erf_diff);
    if n == 1 {
        return out;
    }
    let ea = hermite_functions(a, n - 1);
    let eb = hermite_functions(b, n - 1);
    out.push(-SQRT_2 * (eb[0] - ea[0]));
    for k in 1..n - 1 {
        let kf = k as f64;
        let next = (kf / (kf + 1.0)).sqrt() * out[k - 1] - (2.0 / (kf + 1.0)).sqrt() * (eb[k] - ea[k]);
        out.push(next);
    }
    out
}

/// Eigenvalue of `A` on `e_k`.
pub fn oscillator_eigenvalue(k: usize) -> f64 {
    2.0 * k as f64 + 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_orders_closed_form() {
        let x: f64 = 0.7;
        let e = hermite_functions(x, 3);
        let g = PI_M_QUARTER * (-x * x / 2.0).exp();
        assert!((e[0] - g).abs() < 1e-15);
        assert!((e[1] - SQRT_2 * x * g).abs() < 1e-15);
        assert!((e[2] - (2.0 * x * x - 1.0) / SQRT_2 * g).abs() < 1e-15);
    }

    #[test]
    fn far_tail_of_high_order_does_not_underflow() {
        // The turning point of e_1000 is √2001 ≈ 44.7; at x = 40 it is oscillatory, not tiny.
        let e = hermite_functions(40.0, 1001);
        assert!(e[1000].abs() > 1e-4, "{}", e[1000]);
        assert!(e[0] == 0.0 || e[0] < 1e-300);
    }

    #[test]
    fn indicator_integral_of_e1() {
        // ∫_0^1 e_1 = √2 π^{-1/4} (1 − e^{-1/2})
        let i = hermite_interval_integrals(0.0, 1.0, 2);
        let exact = SQRT_2 * PI_M_QUARTER * (1.0 - (-0.5f64).exp());
        assert!((i[1] - exact).abs() < 1e-15);
    }

    #[test]
    fn odd_functions_integrate_to_zero_on_symmetric_intervals() {
        let i = hermite_interval_integrals(-2.5, 2.5, 40);
        for k in (1..40).step_by(2) {
            assert!(i[k].abs() < 1e-14, "k={k}: {}", i[k]);
        }
    }
}
