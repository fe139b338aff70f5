//! The smoothed junction profile `g_h = f_h (1 - chi_h)`.


use super::domain::{DomainParams, JunctionMode};
use super::GeometryError;

/// Smooth step: 0 for `s <= 0`, 1 for `s >= 1`, built from `exp(-1/s)`.
pub fn step(s: f64) -> f64 {
    let e = |u: f64| if u > 0.0 { (-1.0 / u).exp() } else { 0.0 };
    let a = e(s);
    let b = e(1.0 - s);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// Cutoff `chi_h`: equal to 1 on `[-r-5h/8, -r-3h/8]`, supported in
/// `(-r-7h/8, -r-h/8)`.
pub fn cutoff(x: f64, r: f64, h: f64) -> f64 {
    let q = h / 4.0;
    let rise = step((x - (-r - 7.0 * h / 8.0)) / q);
    let fall = step(((-r - h / 8.0) - x) / q);
    rise * fall
}

/// Junction profile `g_h(x)` on `[-r-h, -r]`.
pub fn junction_profile(x: f64, p: &DomainParams) -> Result<f64, GeometryError> {
    if let JunctionMode::Sharp = p.junction_mode {
        return Err(GeometryError::SharpJunction);
    }
    let (lo, hi) = (-p.r - p.h, -p.r);
    if !(x >= lo && x <= hi) {
        return Err(GeometryError::Domain { x, lo, hi });
    }
    let rm = p.r + p.h / 2.0;
    let f = if x < -rm { 0.0 } else { (rm * rm - x * x).max(0.0).sqrt() };
    Ok(f * (1.0 - cutoff(x, p.r, p.h)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn filleted() -> DomainParams {
        DomainParams { junction_mode: JunctionMode::Filleted(0.02), ..DomainParams::default() }
    }

    #[test]
    fn profile_vanishes_on_the_left_and_on_the_plateau() {
        let p = filleted();
        assert_eq!(junction_profile(-p.r - p.h, &p).unwrap(), 0.0);
        assert_eq!(junction_profile(-p.r - p.h / 2.0, &p).unwrap(), 0.0);
    }

    #[test]
    fn profile_rejects_points_outside_and_sharp_mode() {
        let p = filleted();
        assert!(matches!(junction_profile(-p.r + 0.01, &p), Err(GeometryError::Domain { .. })));
        assert_eq!(junction_profile(-2.01, &DomainParams::default()), Err(GeometryError::SharpJunction));
    }

    #[test]
    fn cutoff_plateau_and_support() {
        let (r, h) = (2.0, 0.05);
        for k in 0..=20 {
            let x = -r - 5.0 * h / 8.0 + k as f64 * (h / 4.0) / 20.0;
            assert_eq!(cutoff(x, r, h), 1.0);
        }
        assert_eq!(cutoff(-r - h, r, h), 0.0);
        assert_eq!(cutoff(-r, r, h), 0.0);
        assert_eq!(cutoff(-r - 7.0 * h / 8.0, r, h), 0.0);
    }
}
