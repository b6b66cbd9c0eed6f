use alloc::vec::Vec;

use libm::fabs;

use crate::{Error, Result};

/// Tolerance and work budget for [`integrate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    pub absolute_tolerance: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            absolute_tolerance: 1e-10,
            max_subdivisions: 1 << 16,
        }
    }
}

impl QuadratureSpec {
    pub fn new(absolute_tolerance: f64, max_subdivisions: usize) -> Result<Self> {
        if !(absolute_tolerance > 0.0) || max_subdivisions < 1 {
            return Err(Error::domain(
                "quadrature needs a positive tolerance and at least one subdivision",
            ));
        }
        Ok(Self {
            absolute_tolerance,
            max_subdivisions,
        })
    }
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
}

const INITIAL_PANELS: usize = 8;

/// Adaptive Simpson quadrature of `f` over the finite interval `[a, b]`.
///
/// Panels are bisected until the Richardson error estimate of each is
/// within its share of the absolute tolerance. Running out of subdivisions
/// returns [`Error::Convergence`] carrying the best estimate.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("integration bounds must be finite"));
    }
    if a > b {
        return Err(Error::domain("integration needs a <= b"));
    }
    if a == b {
        return Ok(0.0);
    }
    let width = (b - a) / INITIAL_PANELS as f64;
    let min_width = (b - a) * 1e-13;
    let mut stack: Vec<Panel> = Vec::with_capacity(64);
    for i in 0..INITIAL_PANELS {
        let pa = a + width * i as f64;
        let pb = if i + 1 == INITIAL_PANELS { b } else { pa + width };
        let (fa, fb, fm) = (f(pa), f(pb), f(0.5 * (pa + pb)));
        stack.push(Panel {
            a: pa,
            b: pb,
            fa,
            fm,
            fb,
            whole: (pb - pa) / 6.0 * (fa + 4.0 * fm + fb),
            tol: spec.absolute_tolerance / INITIAL_PANELS as f64,
        });
    }

    let mut total = 0.0;
    let mut subdivisions = 0usize;
    let mut exhausted = false;
    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let lm = 0.5 * (p.a + m);
        let rm = 0.5 * (m + p.b);
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
        let right = (p.b - m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
        let delta = left + right - p.whole;
        if fabs(delta) <= 15.0 * p.tol || (p.b - p.a) < min_width || exhausted {
            total += left + right + delta / 15.0;
            continue;
        }
        subdivisions += 1;
        if subdivisions > spec.max_subdivisions {
            exhausted = true;
            total += left + right + delta / 15.0;
            continue;
        }
        stack.push(Panel {
            a: p.a,
            b: m,
            fa: p.fa,
            fm: flm,
            fb: p.fm,
            whole: left,
            tol: 0.5 * p.tol,
        });
        stack.push(Panel {
            a: m,
            b: p.b,
            fa: p.fm,
            fm: frm,
            fb: p.fb,
            whole: right,
            tol: 0.5 * p.tol,
        });
    }
    if exhausted {
        Err(Error::Convergence { estimate: total })
    } else {
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::std_normal_pdf;

    #[test]
    fn gaussian_mass() {
        let v = integrate(std_normal_pdf, -8.0, 8.0, &QuadratureSpec::default()).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn linear() {
        let v = integrate(|x| x, 0.0, 1.0, &QuadratureSpec::default()).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn first_moment_of_half_normal() {
        let v = integrate(|x| x * std_normal_pdf(x), 0.0, 8.0, &QuadratureSpec::default()).unwrap();
        assert!((v - 0.398_942_3).abs() < 1e-7);
    }

    #[test]
    fn empty_interval() {
        assert_eq!(integrate(|x| x, 2.0, 2.0, &QuadratureSpec::default()).unwrap(), 0.0);
        assert!(integrate(|x| x, 2.0, 1.0, &QuadratureSpec::default()).is_err());
    }

    #[test]
    fn budget_exhaustion_reports_estimate() {
        let spec = QuadratureSpec::new(1e-14, 4).unwrap();
        let r = integrate(|x| libm::sin(50.0 * x) * libm::exp(x), 0.0, 10.0, &spec);
        match r {
            Err(Error::Convergence { estimate }) => assert!(estimate.is_finite()),
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn invalid_spec() {
        assert!(QuadratureSpec::new(0.0, 10).is_err());
        assert!(QuadratureSpec::new(1e-8, 0).is_err());
    }
}
