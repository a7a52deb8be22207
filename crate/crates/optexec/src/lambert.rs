//! Principal branch of the Lambert W function.
//!
//! W0(z) solves w e^w = z for z >= -1/e, with W0 >= -1. Halley iteration from
//! a regime-dependent starting point: a branch-point series near -1/e, a
//! rational seed on the middle range, and the two-log asymptotic for large z.
//! The iteration is stopped on the residual |w e^w - z| <= 1e-13 max(1, |z|),
//! comfortably inside the 1e-12 contract of the callers.

use crate::error::{Error, Result};

const INV_E: f64 = 1.0 / std::f64::consts::E;

/// Principal branch W0.
pub fn lambert_w0(z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::domain(format!(
            "lambert_w0 needs finite input, got {z}"
        )));
    }
    if z < -INV_E {
        // Allow rounding-level undershoot of the branch point.
        if z > -INV_E - 1e-14 {
            return Ok(-1.0);
        }
        return Err(Error::domain(format!(
            "lambert_w0 is real only for z >= -1/e; got {z}"
        )));
    }
    if z == 0.0 {
        return Ok(0.0);
    }

    let mut w = if z < -0.25 {
        // Branch-point series in p = sqrt(2 (e z + 1)).
        let p = (2.0 * (std::f64::consts::E * z + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 * p * p * p / 72.0
    } else if z < std::f64::consts::E {
        // Pade-style seed, exact at 0 and decent through z = e.
        z / (1.0 + z * (1.0 + z / (2.0 + z)))
    } else {
        // w ~ ln z - ln ln z + ln ln z / ln z.
        let l1 = z.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };

    let tol = 1e-13 * z.abs().max(1.0);
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - z;
        if f.abs() <= tol {
            return Ok(w);
        }
        // Halley step: f' = e^w (1 + w), f'' = e^w (2 + w).
        let wp1 = w + 1.0;
        let denom = ew * wp1 - f * (w + 2.0) / (2.0 * wp1);
        let step = f / denom;
        w -= step;
        if w < -1.0 {
            w = -1.0 + 1e-16;
        }
    }
    let residual = (w * w.exp() - z).abs();
    if residual <= 1e-12 * z.abs().max(1.0) {
        Ok(w)
    } else {
        Err(Error::solver(
            z,
            format!("lambert_w0 failed to converge, residual {residual:e}"),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert!((lambert_w0(std::f64::consts::E).unwrap() - 1.0).abs() < 1e-14);
        assert!((lambert_w0(-INV_E).unwrap() + 1.0).abs() < 1e-7);
        // Omega constant.
        assert!((lambert_w0(1.0).unwrap() - 0.567_143_290_409_783_8).abs() < 1e-14);
    }

    #[test]
    fn residual_contract_holds_across_the_domain() {
        let mut z = -INV_E + 1e-12;
        let mut points = vec![z, -0.25, -1e-8, 1e-8, 0.5, 1.0, 2.0];
        z = 1.0;
        for _ in 0..40 {
            z *= 2.7;
            points.push(z);
        }
        for &p in &points {
            let w = lambert_w0(p).unwrap();
            assert!(
                (w * w.exp() - p).abs() <= 1e-12 * p.abs().max(1.0),
                "z = {p:e}"
            );
            assert!(w >= -1.0);
        }
    }

    #[test]
    fn round_trip_from_the_w_side() {
        for k in -30..=30 {
            let w = k as f64 * 0.37;
            if w < -1.0 {
                continue;
            }
            let z = w * w.exp();
            let back = lambert_w0(z).unwrap();
            assert!(
                (back - w).abs() <= 1e-10 * w.abs().max(1.0),
                "w = {w}, got {back}"
            );
        }
    }

    #[test]
    fn domain_errors() {
        assert!(lambert_w0(-1.0).is_err());
        assert!(lambert_w0(f64::NAN).is_err());
        assert!(lambert_w0(f64::INFINITY).is_err());
    }
}
