//! Special functions used by the mode generators.

/// Bessel function of the first kind `J_n(x)` for integer order.
///
/// Miller's backward recurrence normalized with `J_0 + 2 Σ J_{2k} = 1`. Stable
/// for all `x`, with cost linear in `max(n, |x|)`.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    let order = n.unsigned_abs();
    // J_{-n} = (-1)^n J_n and J_n(-x) = (-1)^n J_n(x)
    let mut sign = if n < 0 && order % 2 == 1 { -1.0 } else { 1.0 };
    if x < 0.0 && order % 2 == 1 {
        sign = -sign;
    }
    sign * bessel_j_nonneg(order, x.abs())
}

fn bessel_j_nonneg(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    const BIG: f64 = 1e250;
    let scale = (n as f64).max(x);
    let mut start = scale as usize + 20 + (40.0 * scale).sqrt() as usize;
    start += start % 2;

    let two_over_x = 2.0 / x;
    let mut above = 0.0; // J_{k+1}
    let mut cur = 1e-30; // J_k, k = start
    let mut even_sum = 0.0;
    let mut result = 0.0;
    for k in (1..=start).rev() {
        let below = k as f64 * two_over_x * cur - above;
        above = cur;
        cur = below;
        let order = k - 1;
        if cur.abs() > BIG {
            cur /= BIG;
            above /= BIG;
            even_sum /= BIG;
            result /= BIG;
        }
        if order == n as usize {
            result = cur;
        }
        if order > 0 && order % 2 == 0 {
            even_sum += 2.0 * cur;
        }
    }
    result / (cur + even_sum)
}

/// Generalized Laguerre polynomial `L_p^α(x)` by the three-term recurrence.
pub fn assoc_laguerre(p: u32, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if p == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..p {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Integral representation `J_n(x) = (1/π) ∫_0^π cos(nτ - x sin τ) dτ`,
    /// trapezoid over the full period (spectrally accurate).
    fn bessel_quadrature(n: i32, x: f64) -> f64 {
        let m = 4096;
        let h = 2.0 * PI / m as f64;
        (0..m)
            .map(|i| {
                let t = i as f64 * h;
                (n as f64 * t - x * t.sin()).cos()
            })
            .sum::<f64>()
            * h
            / (2.0 * PI)
    }

    #[test]
    fn known_values() {
        let cases = [
            (0, 1.0, 0.765_197_686_557_966_6),
            (1, 1.0, 0.440_050_585_744_933_5),
            (1, 10.0, 0.043_472_746_168_861_44),
            (0, 100.0, 0.019_985_850_304_223_122),
            (2, 0.001, 1.249_999_895_833_333e-7),
        ];
        for (n, x, expect) in cases {
            let got = bessel_j(n, x);
            assert!((got - expect).abs() < 1e-13, "J_{n}({x}) = {got}, expected {expect}");
        }
    }

    #[test]
    fn known_zeros() {
        let zeros = [(0, 2.404_825_557_695_773), (0, 5.520_078_110_286_311), (1, 3.831_705_970_207_512), (2, 5.135_622_301_840_683), (4, 7.588_342_434_503_804)];
        for (n, z) in zeros {
            assert!(bessel_j(n, z).abs() < 1e-13, "J_{n}({z}) = {}", bessel_j(n, z));
        }
    }

    #[test]
    fn matches_integral_representation() {
        for n in 0..6 {
            for &x in &[0.05, 0.7, 3.3, 12.0, 47.5, 120.0, 171.0] {
                let a = bessel_j(n, x);
                let b = bessel_quadrature(n, x);
                assert!((a - b).abs() < 1e-12, "n={n} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn negative_order_and_argument() {
        for n in 1..5 {
            let s = if n % 2 == 1 { -1.0 } else { 1.0 };
            assert!((bessel_j(-n, 2.7) - s * bessel_j(n, 2.7)).abs() < 1e-15);
            assert!((bessel_j(n, -2.7) - s * bessel_j(n, 2.7)).abs() < 1e-15);
        }
        assert_eq!(bessel_j(0, 0.0), 1.0);
        assert_eq!(bessel_j(3, 0.0), 0.0);
    }

    fn binom(n: f64, k: u32) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i as f64) / (i as f64 + 1.0))
    }

    /// Explicit sum `Σ_i (-1)^i C(p+α, p-i) x^i / i!`.
    fn laguerre_sum(p: u32, alpha: f64, x: f64) -> f64 {
        let mut fact = 1.0;
        (0..=p)
            .map(|i| {
                if i > 0 {
                    fact *= i as f64;
                }
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                s * binom(p as f64 + alpha, p - i) * x.powi(i as i32) / fact
            })
            .sum()
    }

    #[test]
    fn laguerre_matches_explicit_sum() {
        for p in 0..=10 {
            for &alpha in &[0.0, 1.0, 2.0, 4.0, 7.0] {
                for &x in &[0.0, 0.3, 1.5, 4.0, 9.0] {
                    let a = assoc_laguerre(p, alpha, x);
                    let b = laguerre_sum(p, alpha, x);
                    assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "L_{p}^{alpha}({x}): {a} vs {b}");
                }
            }
        }
    }
}
