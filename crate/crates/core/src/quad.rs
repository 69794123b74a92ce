//! Composite Gauss–Legendre quadrature with panel doubling.
//!
//! Every 1-D integral in the crate goes through [`Composite`]: the interval
//! (optionally split at breakpoints where the integrand has kinks) is cut into
//! panels of equal width, each panel gets a fixed Gauss–Legendre rule, and the
//! panel width is halved until two successive estimates agree.

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};

/// Nodes and weights of an n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Cached n-point rule.
    pub fn get(n: usize) -> Arc<GaussRule> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussRule>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().unwrap();
        map.entry(n)
            .or_insert_with(|| {
                let degree = NonZeroUsize::new(n.max(1)).unwrap();
                let rule = GaussLegendre::new(degree);
                let (nodes, weights) = rule.as_node_weight_pairs().iter().copied().unzip();
                Arc::new(GaussRule { nodes, weights })
            })
            .clone()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// A quadrature result with the change observed at the last refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Composite Gauss–Legendre rule: `order`-point panels, `nodes_per_unit`
/// nodes per unit length at level 0, panel width halved per level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Composite {
    pub order: usize,
    pub nodes_per_unit: usize,
    pub rel_tol: f64,
    pub max_level: u32,
}

impl Default for Composite {
    fn default() -> Self {
        Self {
            order: 16,
            nodes_per_unit: 32,
            rel_tol: 1e-10,
            max_level: 5,
        }
    }
}

impl Composite {
    pub fn with_nodes_per_unit(mut self, n: usize) -> Self {
        self.nodes_per_unit = n.max(1);
        self
    }

    fn panel_width(&self, level: u32) -> f64 {
        self.order as f64 / (self.nodes_per_unit as f64 * f64::from(1u32 << level))
    }

    /// Visits every (node, weight) of the level-`level` rule on `[a, b]`,
    /// with panels aligned to `breaks` that fall strictly inside.
    pub fn for_each_node<V: FnMut(f64, f64)>(
        &self,
        a: f64,
        b: f64,
        breaks: &[f64],
        level: u32,
        mut visit: V,
    ) {
        if !(b > a) {
            return;
        }
        let rule = GaussRule::get(self.order);
        let width = self.panel_width(level);
        let mut cuts: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
        cuts.push(a);
        let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
        inner.sort_by(f64::total_cmp);
        cuts.extend(inner);
        cuts.push(b);
        for piece in cuts.windows(2) {
            let (lo, hi) = (piece[0], piece[1]);
            if hi <= lo {
                continue;
            }
            let panels = ((hi - lo) / width).ceil().max(1.0) as usize;
            let h = (hi - lo) / panels as f64;
            for p in 0..panels {
                let pa = lo + h * p as f64;
                let pb = if p + 1 == panels { hi } else { pa + h };
                for (x, w) in rule.mapped(pa, pb) {
                    visit(x, w);
                }
            }
        }
    }

    fn sum_level<F: FnMut(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        breaks: &[f64],
        level: u32,
        f: &mut F,
    ) -> (f64, f64) {
        let mut total = 0.0;
        let mut l1 = 0.0;
        self.for_each_node(a, b, breaks, level, |x, w| {
            let v = w * f(x);
            total += v;
            l1 += v.abs();
        });
        (total, l1)
    }

    /// Integrates `f` over `[a, b]`, refining until two levels agree.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, f: F) -> Result<Estimate> {
        self.integrate_with_breaks(a, b, &[], f)
    }

    pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        breaks: &[f64],
        mut f: F,
    ) -> Result<Estimate> {
        if a == b {
            return Ok(Estimate {
                value: 0.0,
                error: 0.0,
            });
        }
        if b < a {
            let e = self.integrate_with_breaks(b, a, breaks, f)?;
            return Ok(Estimate {
                value: -e.value,
                error: e.error,
            });
        }
        let (mut prev, _) = self.sum_level(a, b, breaks, 0, &mut f);
        for level in 1..=self.max_level {
            let (cur, l1) = self.sum_level(a, b, breaks, level, &mut f);
            let change = (cur - prev).abs();
            if !cur.is_finite() {
                return Err(Error::Refinement {
                    estimate: cur,
                    change,
                });
            }
            if change <= self.rel_tol * cur.abs() + 1e-14 * l1 {
                return Ok(Estimate {
                    value: cur,
                    error: change,
                });
            }
            prev = cur;
        }
        Err(Error::Refinement {
            estimate: prev,
            change: f64::NAN,
        })
    }
}

/// Length of the truncated tail so that an integrand decaying like
/// `exp(-decay * s)` loses less than `1e-13` of its mass past the cutoff.
pub fn relative_tail_length(decay: f64) -> f64 {
    13.0 * std::f64::consts::LN_10 / decay
}
