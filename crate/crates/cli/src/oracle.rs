//! Closed-form Dirichlet eigenvalues used by the validation suite.

use std::f64::consts::PI;

/// The `count` smallest eigenvalues of `(-1, 1) x (-l, l)`, from
/// `π² (m²/4 + n²/(4 l²))` over `m, n ≥ 1`.
pub fn rectangle_eigenvalues(l: f64, count: usize) -> Vec<f64> {
    let mut all = Vec::new();
    let k = count + 1;
    for m in 1..=k {
        for n in 1..=k {
            let (m, n) = (m as f64, n as f64);
            all.push(PI * PI * (m * m / 4.0 + n * n / (4.0 * l * l)));
        }
    }
    all.sort_by(f64::total_cmp);
    all.truncate(count);
    all
}

/// Bessel function of the first kind of integer order by its power series,
/// accurate to about 1e-14 for `0 ≤ x ≤ 12`.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    let h = 0.5 * x;
    let mut term = (1..=n).fold(1.0, |a, k| a * h / k as f64);
    let mut sum = term;
    for k in 1..200 {
        term *= -h * h / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// The `k`-th positive zero of `J_n` (k ≥ 1): a sign-change scan followed
/// by bisection to full precision.
pub fn bessel_zero(n: u32, k: usize) -> f64 {
    let step = 0.05;
    let mut a = if n == 0 { step } else { n as f64 };
    let mut found = 0;
    loop {
        let b = a + step;
        if bessel_j(n, a).signum() != bessel_j(n, b).signum() {
            found += 1;
            if found == k {
                let (mut lo, mut hi) = (a, b);
                let flo = bessel_j(n, lo).signum();
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if bessel_j(n, mid).signum() == flo {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                return 0.5 * (lo + hi);
            }
        }
        a = b;
    }
}

/// Dirichlet eigenvalues of the unit disk below the cut: `j_{n,k}²` with
/// multiplicity two for `n ≥ 1`, sorted.
pub fn disk_eigenvalues(count: usize) -> Vec<f64> {
    let mut all = Vec::new();
    for n in 0..6u32 {
        for k in 1..4 {
            let j = bessel_zero(n, k);
            all.push(j * j);
            if n > 0 {
                all.push(j * j);
            }
        }
    }
    all.sort_by(f64::total_cmp);
    all.truncate(count);
    all
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabulated_zeros() {
        assert!((bessel_zero(0, 1) - 2.404_825_557_695_773).abs() < 1e-12);
        assert!((bessel_zero(1, 1) - 3.831_705_970_207_512).abs() < 1e-12);
        assert!((bessel_zero(0, 2) - 5.520_078_110_286_311).abs() < 1e-12);
    }

    #[test]
    fn rectangle_ordering() {
        let v = rectangle_eigenvalues(0.5, 3);
        let want = [1.25, 2.0, 3.25].map(|c| c * PI * PI);
        for (a, b) in v.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
