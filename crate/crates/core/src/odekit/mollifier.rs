//! The standard bump `rho(t) = N exp(-1/(1 - t^2))` on `(-1, 1)` and its
//! rescalings `rho_eps(t) = rho(t/eps)/eps`.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::quad::GaussRule;

const PANELS: usize = 128;
const PANEL_ORDER: usize = 20;

fn raw_bump(t: f64) -> f64 {
    let q = 1.0 - t * t;
    if q <= 0.0 {
        0.0
    } else {
        (-1.0 / q).exp()
    }
}

/// Cumulative partial moments `int_{-1}^{x} t^k raw(t) dt` at panel edges.
struct BumpTables {
    norm: f64,
    /// `cum[k][j]`: moment `k` up to edge `j`, unnormalized.
    cum: [Vec<f64>; 3],
}

fn tables() -> &'static BumpTables {
    static TABLES: OnceLock<BumpTables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let rule = GaussRule::get(PANEL_ORDER);
        let h = 2.0 / PANELS as f64;
        let mut cum = [vec![0.0; PANELS + 1], vec![0.0; PANELS + 1], vec![0.0; PANELS + 1]];
        for j in 0..PANELS {
            let a = -1.0 + h * j as f64;
            for (k, table) in cum.iter_mut().enumerate() {
                let piece = rule.integrate(a, a + h, |t| t.powi(k as i32) * raw_bump(t));
                table[j + 1] = table[j] + piece;
            }
        }
        BumpTables {
            norm: 1.0 / cum[0][PANELS],
            cum,
        }
    })
}

/// `rho(t)`, normalized to unit mass.
pub fn bump(t: f64) -> f64 {
    tables().norm * raw_bump(t)
}

/// `int_{-1}^{x} t^k rho(t) dt` for `k in {0, 1, 2}`.
pub fn bump_partial_moment(k: usize, x: f64) -> f64 {
    assert!(k < 3, "only moments 0..=2 are tabulated");
    let tab = tables();
    if x <= -1.0 {
        return 0.0;
    }
    let x = x.min(1.0);
    let h = 2.0 / PANELS as f64;
    let j = (((x + 1.0) / h).floor() as usize).min(PANELS - 1);
    let edge = -1.0 + h * j as f64;
    let piece = GaussRule::get(PANEL_ORDER).integrate(edge, x, |t| t.powi(k as i32) * raw_bump(t));
    tab.norm * (tab.cum[k][j] + piece)
}

/// `rho_eps(t) = rho(t/eps)/eps`, supported in `[-eps, eps]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mollifier {
    eps: f64,
}

impl Mollifier {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::Parameter(format!("mollifier width must be positive, got {eps}")));
        }
        Ok(Self { eps })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn density(&self, t: f64) -> f64 {
        bump(t / self.eps) / self.eps
    }

    /// `int_{-inf}^{x} rho_eps`.
    pub fn cdf(&self, x: f64) -> f64 {
        bump_partial_moment(0, x / self.eps)
    }

    /// `int_{-inf}^{x} s rho_eps(s) ds`.
    pub fn first_moment_below(&self, x: f64) -> f64 {
        self.eps * bump_partial_moment(1, x / self.eps)
    }

    /// `int_{-inf}^{x} s^2 rho_eps(s) ds`.
    pub fn second_moment_below(&self, x: f64) -> f64 {
        self.eps * self.eps * bump_partial_moment(2, x / self.eps)
    }

    /// `int_{-inf}^{x} (x - s) rho_eps(s) ds`, the ramp smoothed by `rho_eps`.
    pub fn ramp(&self, x: f64) -> f64 {
        if x >= self.eps {
            return x;
        }
        if x <= -self.eps {
            return 0.0;
        }
        x * self.cdf(x) - self.first_moment_below(x)
    }

    /// `int_{-inf}^{x} (x - s)^2 / 2 rho_eps(s) ds`.
    pub fn half_square(&self, x: f64) -> f64 {
        if x >= self.eps {
            return 0.5 * (x * x + self.second_moment_below(self.eps));
        }
        if x <= -self.eps {
            return 0.0;
        }
        0.5 * (x * x * self.cdf(x) - 2.0 * x * self.first_moment_below(x) + self.second_moment_below(x))
    }

    /// Total mass by quadrature (should be 1).
    pub fn mass(&self) -> f64 {
        crate::quad::Composite::default()
            .with_nodes_per_unit((64.0 / self.eps) as usize)
            .integrate(-self.eps, self.eps, |t| self.density(t))
            .map(|e| e.value)
            .unwrap_or(f64::NAN)
    }
}
