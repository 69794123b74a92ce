//! `M_eps(x, y) = max * (rho_eps ⊗ rho_eps)`, the regularized maximum.

use super::mollifier::Mollifier;
use crate::error::Result;
use crate::quad::GaussRule;

/// Outer rule over the support of `rho_eps`: panels x order.
const OUTER_PANELS: usize = 16;
const OUTER_ORDER: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxSmoother {
    kernel: Mollifier,
}

pub fn make_max_smoother(eps: f64) -> Result<MaxSmoother> {
    Ok(MaxSmoother {
        kernel: Mollifier::new(eps)?,
    })
}

impl MaxSmoother {
    pub fn eps(&self) -> f64 {
        self.kernel.eps()
    }

    /// `int max(a, y - t) rho_eps(t) dt`, split at the kink `t = y - a`.
    fn inner(&self, a: f64, y: f64) -> f64 {
        let k = &self.kernel;
        let cut = y - a;
        let below = k.cdf(cut);
        y * below - k.first_moment_below(cut) + a * (1.0 - below)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let eps = self.eps();
        if x - y >= 2.0 * eps {
            return x;
        }
        if x - y <= -2.0 * eps {
            return y;
        }
        let rule = GaussRule::get(OUTER_ORDER);
        let h = 2.0 * eps / OUTER_PANELS as f64;
        // dividing by the discrete mass keeps affine integrands exact
        let (mut total, mut mass) = (0.0, 0.0);
        for p in 0..OUTER_PANELS {
            let a = -eps + h * p as f64;
            for (s, w) in rule.mapped(a, a + h) {
                let wr = w * self.kernel.density(s);
                total += wr * self.inner(x - s, y);
                mass += wr;
            }
        }
        total / mass
    }
}

/// `int int |max(s, t)| rho(s) rho(t)` over the unit square, the constant in
/// `|M_eps - max| <= eps C`.
pub fn max_smoother_constant() -> f64 {
    let k = Mollifier::new(1.0).expect("unit width");
    let rule = GaussRule::get(OUTER_ORDER);
    let h = 2.0 / OUTER_PANELS as f64;
    let mut total = 0.0;
    for p in 0..OUTER_PANELS {
        let a = -1.0 + h * p as f64;
        for (s, w) in rule.mapped(a, a + h) {
            // int |max(s, t)| rho(t) dt: below s the max is s, above it is t
            let below = k.cdf(s);
            let m1_above = k.first_moment_below(1.0) - k.first_moment_below(s);
            let pos_above = if s >= 0.0 {
                m1_above
            } else {
                k.first_moment_below(1.0) - k.first_moment_below(0.0) - (k.first_moment_below(0.0) - k.first_moment_below(s))
            };
            total += w * k.density(s) * (s.abs() * below + pos_above);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent oracle: plain tensor Gauss-Legendre over the square.
    fn tensor(eps: f64, x: f64, y: f64) -> f64 {
        let m = Mollifier::new(eps).unwrap();
        let q = crate::quad::Composite::default().with_nodes_per_unit((400.0 / eps) as usize);
        q.integrate(-eps, eps, |s| {
            m.density(s)
                * q.integrate_with_breaks(-eps, eps, &[y - x + s], |t| (x - s).max(y - t) * m.density(t))
                    .unwrap()
                    .value
        })
        .unwrap()
        .value
    }

    #[test]
    fn exact_regions() {
        let m = make_max_smoother(0.5).unwrap();
        assert_eq!(m.eval(3.0, 2.0), 3.0);
        assert_eq!(m.eval(-1.0, 0.0), 0.0);
        // just inside the window the quadrature matches the exact value
        assert!((m.eval(0.999_999, 0.0) - 0.999_999).abs() < 1e-9);
    }

    #[test]
    fn agrees_with_tensor_oracle() {
        for &(eps, x, y) in &[(1.0, 0.0, 0.0), (0.3, 0.1, -0.2), (0.05, 0.0, 0.04)] {
            let m = make_max_smoother(eps).unwrap();
            assert!((m.eval(x, y) - tensor(eps, x, y)).abs() < 1e-9, "{eps} {x} {y}");
        }
        let m0 = make_max_smoother(1.0).unwrap().eval(0.0, 0.0);
        assert!(m0 > 0.0);
    }

    #[test]
    fn convergence_bound() {
        let c = max_smoother_constant();
        assert!(c > 0.0 && c < 1.0);
        for eps in [0.5, 0.1, 0.01, 0.001] {
            let m = make_max_smoother(eps).unwrap();
            for &(x, y) in &[(0.0, 0.0), (0.3, 0.3 + 0.5 * eps), (-1.0, -1.0 - eps)] {
                assert!((m.eval(x, y) - x.max(y)).abs() <= eps * c + 1e-12);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn monotone_and_above_both(x in -1.0f64..1.0, y in -1.0f64..1.0, dx in 0.0f64..0.5, eps in 0.01f64..0.5) {
            let m = make_max_smoother(eps).unwrap();
            let v = m.eval(x, y);
            prop_assert!(v >= x - 1e-12 && v >= y - 1e-12);
            prop_assert!(m.eval(x + dx, y) >= v - 1e-12);
            prop_assert!(m.eval(x, y + dx) >= v - 1e-12);
        }

        #[test]
        fn midpoint_convex(x1 in -1.0f64..1.0, y1 in -1.0f64..1.0, x2 in -1.0f64..1.0, y2 in -1.0f64..1.0, eps in 0.01f64..0.5) {
            let m = make_max_smoother(eps).unwrap();
            let mid = m.eval(0.5 * (x1 + x2), 0.5 * (y1 + y2));
            prop_assert!(mid <= 0.5 * (m.eval(x1, y1) + m.eval(x2, y2)) + 1e-9);
        }

        #[test]
        fn nondecreasing_in_eps(x in -1.0f64..1.0, y in -1.0f64..1.0, e1 in 0.01f64..0.5, k in 1.0f64..3.0) {
            let a = make_max_smoother(e1).unwrap().eval(x, y);
            let b = make_max_smoother(e1 * k).unwrap().eval(x, y);
            prop_assert!(b >= a - 1e-12);
        }
    }
}
