//! Bessel functions of the first kind, integer order, by power series.
//! Accurate to machine precision for |x| ≲ 10, which covers every
//! carrier-modulation argument used here.

pub fn bessel_j(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
    }
    let q = -half * half;
    let mut sum = term;
    for k in 1..200 {
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert!((bessel_j(0, 0.0) - 1.0).abs() < 1e-15);
        assert_eq!(bessel_j(1, 0.0), 0.0);
        assert!((bessel_j(0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-14);
        assert!((bessel_j(1, 1.0) - 0.440_050_585_744_933_5).abs() < 1e-14);
        assert!((bessel_j(2, 0.2) - 0.004_983_354_152_783_565).abs() < 1e-15);
        assert!((bessel_j(3, 2.5) - 0.216_600_391_039_113_58).abs() < 1e-13);
    }

    #[test]
    fn recurrence() {
        for &x in &[0.1, 0.7, 1.9, 4.2] {
            for n in 1..5 {
                let lhs = bessel_j(n - 1, x) + bessel_j(n + 1, x);
                let rhs = 2.0 * n as f64 / x * bessel_j(n, x);
                assert!((lhs - rhs).abs() < 1e-13, "n={n} x={x}");
            }
        }
    }
}
