//! Model domains (disk, ball, polydisc) with a Green-pole weight `psi`, an
//! auxiliary weight `phi`, and quadrature over the sublevel sets `{psi < -t}`.
//!
//! The main integration path substitutes `s = -psi`. On a model domain
//! `psi = 2p log m` for a gauge `m` homogeneous in `p` pole coordinates, so
//!
//! ```text
//! int_{psi < -t} F dλ = 1/(2p) int_t^inf e^{-s} ( int_link F(m(s) ξ) dσ(ξ) ) ds,
//! m(s) = e^{-s/(2p)}.
//! ```
//!
//! The link is the unit sphere for the ball and the distinguished boundary
//! pieces of the polydisc otherwise (split into sectors by which coordinate
//! attains the max). A plain polar tensor rule is kept as a cross-check.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{MultiIndex, Polynomial};
use crate::quad::{relative_tail_length, Composite, GaussRule};
use crate::weightlab::{ClassReport, Condition, ConditionFlag, WeightFunction, Witness};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind {
    Disk,
    Ball { n: usize },
    Polydisc { radii: Vec<f64> },
}

/// Which pole function plays the role of `psi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum PsiSpec {
    /// `2n G_D(., o)`.
    #[default]
    Green,
    /// `2k max_{j > n-k} log(|z_j| / r_j)`, the pole weight of the slice
    /// `{z_{n-k+1} = ... = z_n = 0}` of a polydisc.
    SliceLog { codim: usize },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum PhiSpec {
    #[default]
    Zero,
    /// `phi = a |z|^2`.
    RadialPower { a: f64 },
    /// `phi = 2 log |h|`.
    LogModulus { h: Polynomial },
}

impl PhiSpec {
    pub fn eval(&self, z: &[Complex64]) -> f64 {
        match self {
            PhiSpec::Zero => 0.0,
            PhiSpec::RadialPower { a } => a * norm_sq(z),
            PhiSpec::LogModulus { h } => 2.0 * h.eval(z).norm().ln(),
        }
    }

    /// `e^{-phi(z)}` without going through the logarithm.
    pub fn weight(&self, z: &[Complex64]) -> f64 {
        match self {
            PhiSpec::Zero => 1.0,
            PhiSpec::RadialPower { a } => (-a * norm_sq(z)).exp(),
            PhiSpec::LogModulus { h } => 1.0 / h.eval(z).norm_sqr(),
        }
    }

    /// True when `phi` depends only on `|z_1|, ..., |z_n|`.
    pub fn is_reinhardt(&self) -> bool {
        match self {
            PhiSpec::Zero | PhiSpec::RadialPower { .. } => true,
            PhiSpec::LogModulus { h } => h.terms().count() <= 1,
        }
    }
}

fn norm_sq(z: &[Complex64]) -> f64 {
    z.iter().map(Complex64::norm_sqr).sum()
}

/// Surface area of the unit sphere `S^{2j-1}` in `C^j`.
pub fn sphere_area(j: usize) -> f64 {
    assert!(j >= 1, "sphere S^(2j-1) needs j >= 1");
    2.0 * PI.powi(j as i32) / factorial(j - 1)
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// The ideal `F` that extensions must agree with the datum modulo.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum IdealSpec {
    /// `(z_1, ..., z_n)^k`: jets of order `< k` at the pole are pinned.
    MaxIdealPower { order: u32 },
    /// Ideal of the slice `{z'' = 0}` (last `codim` coordinates): the
    /// restriction to the slice is pinned.
    CoordinateSlice { codim: usize },
}

impl IdealSpec {
    /// Whether the coefficient of `z^alpha` is fixed by the constraint.
    pub fn pins(&self, alpha: &MultiIndex) -> bool {
        match *self {
            IdealSpec::MaxIdealPower { order } => alpha.degree() < order,
            IdealSpec::CoordinateSlice { codim } => {
                let n = alpha.dim();
                alpha.0[n.saturating_sub(codim)..].iter().all(|&e| e == 0)
            }
        }
    }

    /// `F - f` lies in the ideal, up to coefficients below `tol`.
    pub fn contains_difference(&self, big_f: &Polynomial, f: &Polynomial, tol: f64) -> bool {
        big_f.sub(f).terms().all(|(a, c)| !self.pins(a) || c.norm() <= tol)
    }

    /// Decay rate in `s` of `|F - f|^2` near the pole, for tail truncation.
    pub fn pole_decay(&self, pole_dim: usize) -> f64 {
        match *self {
            IdealSpec::MaxIdealPower { order } => f64::from(order) / pole_dim as f64,
            IdealSpec::CoordinateSlice { codim } => 1.0 / codim as f64,
        }
    }
}

/// A model domain with pole at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainModel {
    pub kind: DomainKind,
    #[serde(default)]
    pub psi: PsiSpec,
    #[serde(default)]
    pub phi: PhiSpec,
}

impl DomainModel {
    pub fn new(kind: DomainKind, phi: PhiSpec) -> Result<Self> {
        Self::with_psi(kind, PsiSpec::Green, phi)
    }

    pub fn disk() -> Self {
        Self {
            kind: DomainKind::Disk,
            psi: PsiSpec::Green,
            phi: PhiSpec::Zero,
        }
    }

    pub fn with_psi(kind: DomainKind, psi: PsiSpec, phi: PhiSpec) -> Result<Self> {
        let dom = Self { kind, psi, phi };
        dom.validate()?;
        Ok(dom)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            DomainKind::Disk => {}
            DomainKind::Ball { n } if *n == 0 => {
                return Err(Error::Parameter("ball dimension must be at least 1".into()))
            }
            DomainKind::Ball { .. } => {}
            DomainKind::Polydisc { radii } => {
                if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
                    return Err(Error::Parameter(format!("polydisc radii must be positive, got {radii:?}")));
                }
            }
        }
        if let PsiSpec::SliceLog { codim } = self.psi {
            if !matches!(self.kind, DomainKind::Polydisc { .. }) {
                return Err(Error::Parameter("slice pole weights are only modelled on polydiscs".into()));
            }
            if codim == 0 || codim > self.dim() {
                return Err(Error::Parameter(format!("slice codimension {codim} out of range")));
            }
        }
        match &self.phi {
            PhiSpec::RadialPower { a } if !(*a >= 0.0) => {
                Err(Error::Parameter(format!("radial_power needs a >= 0, got {a}")))
            }
            PhiSpec::LogModulus { h } if h.dim() != self.dim() || h.is_zero() => {
                Err(Error::Parameter("log_modulus polynomial must be nonzero in the domain dimension".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            DomainKind::Disk => 1,
            DomainKind::Ball { n } => *n,
            DomainKind::Polydisc { radii } => radii.len(),
        }
    }

    fn radii(&self) -> Vec<f64> {
        match &self.kind {
            DomainKind::Polydisc { radii } => radii.clone(),
            _ => vec![1.0; self.dim()],
        }
    }

    fn is_ball(&self) -> bool {
        matches!(self.kind, DomainKind::Disk | DomainKind::Ball { .. })
    }

    /// Number of coordinates the pole weight depends on; `psi = 2p log m`.
    pub fn pole_dim(&self) -> usize {
        match self.psi {
            PsiSpec::Green => self.dim(),
            PsiSpec::SliceLog { codim } => codim,
        }
    }

    fn first_pole(&self) -> usize {
        self.dim() - self.pole_dim()
    }

    /// Gauge `m` with `psi = 2p log m`.
    pub fn gauge(&self, z: &[Complex64]) -> f64 {
        if self.is_ball() {
            return norm_sq(z).sqrt();
        }
        let radii = self.radii();
        (self.first_pole()..self.dim())
            .map(|j| z[j].norm() / radii[j])
            .fold(0.0, f64::max)
    }

    pub fn psi(&self, z: &[Complex64]) -> f64 {
        2.0 * self.pole_dim() as f64 * self.gauge(z).ln()
    }

    pub fn contains(&self, z: &[Complex64]) -> bool {
        if self.is_ball() {
            return norm_sq(z) < 1.0;
        }
        z.iter().zip(self.radii()).all(|(zj, r)| zj.norm() < r)
    }

    /// Gauge radius of `{psi < -t}`.
    pub fn sublevel_scale(&self, t: f64) -> f64 {
        (-t / (2.0 * self.pole_dim() as f64)).exp()
    }

    pub fn in_sublevel(&self, z: &[Complex64], t: f64) -> bool {
        self.contains(z) && self.psi(z) < -t
    }

    /// Point `m ξ` at gauge `m` in direction `xi` (free coordinates kept).
    fn scale_point(&self, xi: &[Complex64], m: f64, out: &mut [Complex64]) {
        let first = self.first_pole();
        for (j, (o, x)) in out.iter_mut().zip(xi).enumerate() {
            *o = if j >= first { x * m } else { *x };
        }
    }
}

/// Resolution of the quadrature over sublevel sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    /// Gauss–Legendre nodes per unit of `s` at the coarsest level.
    pub nodes_per_unit: usize,
    /// Gauss–Legendre nodes per real link direction.
    pub link_nodes: usize,
    /// Trapezoid nodes per angle when the integrand is not rotation invariant.
    pub angular: usize,
    /// Radial nodes per coordinate for the raw tensor cross-check.
    pub resolution: usize,
    pub rel_tol: f64,
    /// The integrand depends only on `|z_j|`: angles are integrated by a
    /// single node, which is exact and keeps higher dimensions cheap.
    #[serde(default)]
    pub invariant: bool,
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        Self {
            nodes_per_unit: 32,
            link_nodes: 24,
            angular: 64,
            resolution: 256,
            rel_tol: 1e-10,
            invariant: false,
        }
    }
}

impl QuadratureGrid {
    pub fn invariant(mut self) -> Self {
        self.invariant = true;
        self
    }

    fn composite(&self) -> Composite {
        Composite {
            rel_tol: self.rel_tol,
            ..Composite::default()
        }
        .with_nodes_per_unit(self.nodes_per_unit)
    }
}

#[derive(Debug, Clone)]
struct LinkPoint {
    xi: Vec<Complex64>,
    weight: f64,
}

/// Quadrature on the link `{m = 1}` (times the free coordinates), reused
/// for every shell `m = e^{-s/(2p)}`.
#[derive(Debug, Clone)]
pub struct ShellRule {
    dom: DomainModel,
    points: Vec<LinkPoint>,
}

/// Angles: one node of weight `2 pi` when the integrand is rotation invariant.
fn angle_nodes(count: usize, invariant: bool) -> Vec<(f64, f64)> {
    if invariant {
        return vec![(0.0, 2.0 * PI)];
    }
    let h = 2.0 * PI / count as f64;
    (0..count).map(|i| (h * i as f64, h)).collect()
}

/// Tensor product of `dims` copies of a 1-D rule.
fn tensor<T: Copy>(rule: &[T], dims: usize) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for _ in 0..dims {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                rule.iter().map(move |&x| {
                    let mut v = prefix.clone();
                    v.push(x);
                    v
                })
            })
            .collect();
    }
    out
}

/// Largest link rule [`ShellRule::new`] will build.
pub const MAX_LINK_POINTS: usize = 1 << 21;

fn unit_interval(n: usize) -> Vec<(f64, f64)> {
    GaussRule::get(n).mapped(0.0, 1.0).collect()
}

impl ShellRule {
    /// `invariant`: the integrand depends only on `|z_j|`, so angles are
    /// integrated exactly by a single node.
    pub fn new(dom: &DomainModel, grid: &QuadratureGrid, invariant: bool) -> Result<Self> {
        let p = dom.pole_dim();
        let first = dom.first_pole();
        let radii = dom.radii();
        let angles = angle_nodes(grid.angular, invariant);
        let (na, nl) = (angles.len() as f64, grid.link_nodes as f64);
        let sectors = if dom.is_ball() { 1.0 } else { p as f64 };
        let count = (nl * na).powi(first as i32) * sectors * nl.powi(p as i32 - 1) * na.powi(p as i32);
        if count > MAX_LINK_POINTS as f64 {
            return Err(Error::Parameter(format!(
                "link rule needs {count:.3e} points (limit {MAX_LINK_POINTS}); \
                 use an invariant grid or fewer angular nodes"
            )));
        }
        let unit = unit_interval(grid.link_nodes);
        let mut points = Vec::new();

        // free coordinates: polar rule on each disc
        let free_pts: Vec<(Vec<Complex64>, f64)> = {
            let mut acc = vec![(Vec::new(), 1.0)];
            for r in radii.iter().take(first) {
                let mut next = Vec::new();
                for (prefix, w) in &acc {
                    for &(rho, wr) in &unit {
                        for &(th, wt) in &angles {
                            let mut v: Vec<Complex64> = prefix.clone();
                            v.push(Complex64::from_polar(r * rho, th));
                            next.push((v, w * wr * wt * r * r * rho));
                        }
                    }
                }
                acc = next;
            }
            acc
        };

        let angle_sets = tensor(&angles, p);
        if dom.is_ball() {
            // sphere via xi_j = sqrt(x_j) e^{i theta_j}, x on the simplex,
            // d sigma = 2^{1-n} dx dtheta; simplex by stick breaking
            for u in tensor(&unit, p - 1) {
                let mut x = Vec::with_capacity(p);
                let mut rest = 1.0;
                let mut jac = 1.0;
                for &(ui, wi) in &u {
                    x.push(rest * ui);
                    jac *= rest * wi;
                    rest *= 1.0 - ui;
                }
                x.push(rest);
                for th in &angle_sets {
                    let xi: Vec<Complex64> = x
                        .iter()
                        .zip(th)
                        .map(|(&xj, &(t, _))| Complex64::from_polar(xj.max(0.0).sqrt(), t))
                        .collect();
                    let wt: f64 = th.iter().map(|a| a.1).product();
                    points.push(LinkPoint {
                        xi,
                        weight: jac * wt * 2f64.powi(1 - p as i32),
                    });
                }
            }
        } else {
            // sector j: |xi_j| = r_j, |xi_k| = r_k y_k; weight prod r^2 prod y_k
            let scale: f64 = radii[first..].iter().map(|r| r * r).product();
            for j in 0..p {
                for y in tensor(&unit, p - 1) {
                    for th in &angle_sets {
                        let mut xi = Vec::with_capacity(p);
                        let mut w = scale;
                        let mut yi = y.iter();
                        for k in 0..p {
                            let r = radii[first + k];
                            let modulus = if k == j {
                                r
                            } else {
                                let &(yk, wk) = yi.next().unwrap();
                                w *= yk * wk;
                                r * yk
                            };
                            xi.push(Complex64::from_polar(modulus, th[k].0));
                            w *= th[k].1;
                        }
                        points.push(LinkPoint { xi, weight: w });
                    }
                }
            }
        }

        let points = if first == 0 {
            points
        } else {
            let mut out = Vec::with_capacity(points.len() * free_pts.len());
            for (free, wf) in &free_pts {
                for lp in &points {
                    let mut xi = free.clone();
                    xi.extend_from_slice(&lp.xi);
                    out.push(LinkPoint {
                        xi,
                        weight: wf * lp.weight,
                    });
                }
            }
            out
        };
        Ok(Self {
            dom: dom.clone(),
            points,
        })
    }

    pub fn domain(&self) -> &DomainModel {
        &self.dom
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Visits the points of the shell `{-psi = s}` with link weights.
    pub fn for_each_shell_point<V: FnMut(&[Complex64], f64)>(&self, s: f64, mut visit: V) {
        let m = (-s / (2.0 * self.dom.pole_dim() as f64)).exp();
        let mut z = vec![Complex64::new(0.0, 0.0); self.dom.dim()];
        for lp in &self.points {
            self.dom.scale_point(&lp.xi, m, &mut z);
            visit(&z, lp.weight);
        }
    }

    /// `1/(2p) int_a^b e^{-s} sum_link w f(z, s) ds` for a vector-valued
    /// integrand; `f(z, s, w, acc)` must add `w * value` into `acc`.
    pub fn integrate<F>(
        &self,
        grid: &QuadratureGrid,
        a: f64,
        b: f64,
        breaks: &[f64],
        len: usize,
        f: F,
    ) -> Result<Vec<Complex64>>
    where
        F: Fn(&[Complex64], f64, f64, &mut [Complex64]) + Sync,
    {
        let zero = vec![Complex64::new(0.0, 0.0); len];
        if !(b > a) {
            return Ok(zero);
        }
        let q = grid.composite();
        let pref = 1.0 / (2.0 * self.dom.pole_dim() as f64);
        let level_sum = |level: u32| -> Vec<Complex64> {
            let mut nodes = Vec::new();
            q.for_each_node(a, b, breaks, level, |x, w| nodes.push((x, w)));
            let parts: Vec<Vec<Complex64>> = nodes
                .par_iter()
                .map(|&(s, w)| {
                    let mut acc = vec![Complex64::new(0.0, 0.0); len];
                    let scale = pref * w * (-s).exp();
                    self.for_each_shell_point(s, |z, lw| f(z, s, scale * lw, &mut acc));
                    acc
                })
                .collect();
            let mut total = zero.clone();
            for part in parts {
                for (t, v) in total.iter_mut().zip(part) {
                    *t += v;
                }
            }
            total
        };
        let mut prev = level_sum(0);
        for level in 1..=q.max_level {
            let cur = level_sum(level);
            let size = cur.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let change = cur
                .iter()
                .zip(&prev)
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max);
            if change <= grid.rel_tol * size + 1e-300 {
                return Ok(cur);
            }
            prev = cur;
        }
        let size = prev.iter().map(|v| v.norm()).fold(0.0, f64::max);
        Err(Error::Refinement {
            estimate: size,
            change: f64::NAN,
        })
    }

    /// Scalar version of [`ShellRule::integrate`].
    pub fn integrate_scalar<F>(&self, grid: &QuadratureGrid, a: f64, b: f64, breaks: &[f64], f: F) -> Result<f64>
    where
        F: Fn(&[Complex64], f64) -> f64 + Sync,
    {
        let v = self.integrate(grid, a, b, breaks, 1, |z, s, w, acc| acc[0] += w * f(z, s))?;
        Ok(v[0].re)
    }
}

/// `int_{psi < -t} F dλ` for a bounded integrand `F(z, s)` with `s = -psi(z)`.
pub fn sublevel_volume_integral<F>(dom: &DomainModel, t: f64, integrand: F, grid: &QuadratureGrid) -> Result<f64>
where
    F: Fn(&[Complex64], f64) -> f64 + Sync,
{
    sublevel_integral_with_decay(dom, t, 1.0, integrand, grid)
}

/// As [`sublevel_volume_integral`] when `e^{-s} F` is known to decay like
/// `e^{-decay s}`.
pub fn sublevel_integral_with_decay<F>(
    dom: &DomainModel,
    t: f64,
    decay: f64,
    integrand: F,
    grid: &QuadratureGrid,
) -> Result<f64>
where
    F: Fn(&[Complex64], f64) -> f64 + Sync,
{
    if !(t >= 0.0) {
        return Err(Error::Parameter(format!("sublevel parameter must be >= 0, got {t}")));
    }
    let rule = ShellRule::new(dom, grid, grid.invariant)?;
    rule.integrate_scalar(grid, t, t + relative_tail_length(decay), &[], integrand)
}

/// `int_{-1-t < psi < -t} F dλ`.
pub fn strip_integral<F>(dom: &DomainModel, t: f64, integrand: F, grid: &QuadratureGrid) -> Result<f64>
where
    F: Fn(&[Complex64], f64) -> f64 + Sync,
{
    if !(t >= 0.0) {
        return Err(Error::Parameter(format!("strip parameter must be >= 0, got {t}")));
    }
    ShellRule::new(dom, grid, grid.invariant)?.integrate_scalar(grid, t, t + 1.0, &[], integrand)
}

/// Cross-check path: polar Gauss–Legendre in every `|z_j|` (`resolution`
/// nodes) and trapezoid angles, over `{psi < -t}` written as nested bounds.
pub fn raw_sublevel_integral<F>(dom: &DomainModel, t: f64, integrand: F, resolution: usize, angular: usize) -> Result<f64>
where
    F: Fn(&[Complex64]) -> f64 + Sync,
{
    if !(t >= 0.0) {
        return Err(Error::Parameter(format!("sublevel parameter must be >= 0, got {t}")));
    }
    let n = dom.dim();
    let scale = dom.sublevel_scale(t);
    let radii = dom.radii();
    let first = dom.first_pole();
    let rule = GaussRule::get(resolution);
    let angles = angle_nodes(angular, false);

    // bound on |z_j| given the moduli chosen so far
    let bound = |j: usize, moduli: &[f64]| -> f64 {
        if dom.is_ball() {
            let used: f64 = moduli.iter().map(|r| r * r).sum();
            (scale * scale - used).max(0.0).sqrt()
        } else if j >= first {
            radii[j] * scale
        } else {
            radii[j]
        }
    };

    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(&[Complex64]) -> f64>(
        j: usize,
        n: usize,
        z: &mut Vec<Complex64>,
        moduli: &mut Vec<f64>,
        rule: &GaussRule,
        angles: &[(f64, f64)],
        bound: &dyn Fn(usize, &[f64]) -> f64,
        f: &F,
    ) -> f64 {
        if j == n {
            return f(z);
        }
        let hi = bound(j, moduli);
        let mut total = 0.0;
        for (rho, wr) in rule.mapped(0.0, hi) {
            moduli.push(rho);
            for &(th, wt) in angles {
                z.push(Complex64::from_polar(rho, th));
                total += wr * wt * rho * recurse(j + 1, n, z, moduli, rule, angles, bound, f);
                z.pop();
            }
            moduli.pop();
        }
        total
    }

    // parallel over the outermost radial node
    let hi0 = bound(0, &[]);
    let outer: Vec<(f64, f64)> = rule.mapped(0.0, hi0).collect();
    let parts: Vec<f64> = outer
        .par_iter()
        .map(|&(rho, wr)| {
            let mut sum = 0.0;
            let mut moduli = vec![rho];
            for &(th, wt) in &angles {
                let mut z = vec![Complex64::from_polar(rho, th)];
                sum += wr * wt * rho * recurse(1, n, &mut z, &mut moduli, &rule, &angles, &bound, &integrand);
            }
            sum
        })
        .collect();
    Ok(parts.iter().sum())
}

/// Condition (3) of `P_T`: `e^{-phi} c(-psi)` bounded below on the compact
/// set `{m <= compact_radius}` with a small cap around the pole removed.
pub fn check_condition3(dom: &DomainModel, c: &WeightFunction, compact_radius: f64) -> Result<ClassReport> {
    if !(compact_radius > 0.0 && compact_radius < 1.0) {
        return Err(Error::Parameter(format!(
            "compact radius must lie in (0, 1), got {compact_radius}"
        )));
    }
    let grid = QuadratureGrid {
        link_nodes: 8,
        angular: 16,
        ..QuadratureGrid::default()
    };
    let rule = ShellRule::new(dom, &grid, dom.phi.is_reinhardt())?;
    let p = dom.pole_dim() as f64;
    let cap = 1e-3 * compact_radius;
    let mut min = f64::INFINITY;
    let mut witness = None;
    for i in 0..=64 {
        let m = cap + (compact_radius - cap) * f64::from(i) / 64.0;
        let s = -2.0 * p * m.ln();
        let cs = c.eval(s);
        rule.for_each_shell_point(s, |z, _| {
            let v = dom.phi.weight(z) * cs;
            if v < min {
                min = v;
                witness = Some(Witness::Point(z.to_vec()));
            }
        });
    }
    let holds = min > 0.0 && min.is_finite();
    Ok(ClassReport {
        in_class: holds,
        flags: vec![ConditionFlag {
            condition: Condition::LocalLowerBound,
            holds,
        }],
        witness,
        integral: None,
        lower_bound: Some(min),
        indeterminate: Vec::new(),
        tolerance: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball(n: usize) -> DomainModel {
        DomainModel::new(DomainKind::Ball { n }, PhiSpec::Zero).unwrap()
    }

    fn polydisc(radii: Vec<f64>) -> DomainModel {
        DomainModel::new(DomainKind::Polydisc { radii }, PhiSpec::Zero).unwrap()
    }

    #[test]
    fn disk_area_and_zero() {
        let g = QuadratureGrid::default();
        for t in [0.0, 0.7, 3.0] {
            let v = sublevel_volume_integral(&DomainModel::disk(), t, |_, _| 1.0, &g).unwrap();
            assert!((v - PI * (-t).exp()).abs() < 1e-8, "t = {t}");
        }
        assert_eq!(sublevel_volume_integral(&ball(2), 0.5, |_, _| 0.0, &g).unwrap(), 0.0);
    }

    #[test]
    fn classical_volumes() {
        let g = QuadratureGrid::default().invariant();
        let v = sublevel_volume_integral(&ball(2), 0.0, |_, _| 1.0, &g).unwrap();
        assert!((v - PI * PI / 2.0).abs() < 1e-6);
        let v = sublevel_volume_integral(&ball(3), 0.0, |_, _| 1.0, &g).unwrap();
        assert!((v - PI.powi(3) / 6.0).abs() < 1e-8);
        let v = sublevel_volume_integral(&polydisc(vec![1.0, 0.5]), 0.0, |_, _| 1.0, &g).unwrap();
        assert!((v - PI * PI * 0.25).abs() < 1e-8);
        assert!((sphere_area(2) - 2.0 * PI * PI).abs() < 1e-14);
    }

    #[test]
    fn scaling_law() {
        let g = QuadratureGrid::default().invariant();
        for dom in [ball(2), polydisc(vec![1.0, 2.0]), ball(1)] {
            let base = sublevel_volume_integral(&dom, 0.0, |_, _| 1.0, &g).unwrap();
            for t in [0.5, 2.0, 6.0] {
                let v = sublevel_volume_integral(&dom, t, |_, _| 1.0, &g).unwrap();
                assert!((v - (-t).exp() * base).abs() <= 1e-8 * base);
            }
        }
    }

    #[test]
    fn moment_oracles() {
        // int_{|z|<1} |z|^{2k} = pi/(k+1); ball n=2: int |z1|^2 = pi^2/6
        let g = QuadratureGrid::default().invariant();
        for k in 0..4 {
            let v = sublevel_volume_integral(&DomainModel::disk(), 0.0, |z, _| z[0].norm_sqr().powi(k), &g).unwrap();
            assert!((v - PI / f64::from(k + 1)).abs() < 1e-10);
        }
        let v = sublevel_volume_integral(&ball(2), 0.0, |z, _| z[0].norm_sqr(), &g).unwrap();
        assert!((v - PI * PI / 6.0).abs() < 1e-10);
    }

    #[test]
    fn oversized_link_rule_is_refused() {
        let dom = DomainModel::new(DomainKind::Ball { n: 3 }, PhiSpec::Zero).unwrap();
        let g = QuadratureGrid::default();
        assert!(matches!(ShellRule::new(&dom, &g, false), Err(Error::Parameter(_))));
        assert!(ShellRule::new(&dom, &g, true).is_ok());
    }

    #[test]
    fn reinhardt_orthogonality() {
        let g = QuadratureGrid {
            angular: 16,
            ..QuadratureGrid::default()
        };
        let dom = polydisc(vec![1.0, 1.0]);
        let rule = ShellRule::new(&dom, &g, false).unwrap();
        let a = MultiIndex(vec![2, 1]);
        let b = MultiIndex(vec![1, 1]);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut norm = 0.0;
        rule.for_each_shell_point(0.8, |z, w| {
            acc += w * a.eval(z) * b.eval(z).conj() * (-norm_sq(z)).exp();
            norm += w * a.modulus_sq(z);
        });
        assert!(acc.norm() < 1e-15 * norm.max(1.0));
    }

    #[test]
    fn substitution_identity() {
        let c = WeightFunction::exp_rate(0.0, 0.5);
        let gt = crate::weightlab::GTransform::new(&c).unwrap();
        let g = QuadratureGrid::default();
        for t in [0.0, 1.0, 4.0] {
            let v = sublevel_integral_with_decay(&DomainModel::disk(), t, 0.5, |_, s| c.eval(s), &g.invariant()).unwrap();
            assert!((v - PI * gt.eval(t)).abs() < 1e-9 * v);
        }
    }

    #[test]
    fn strip_examples() {
        let g = QuadratureGrid::default();
        for t in [0.0, 2.0, 5.0] {
            let v = strip_integral(&DomainModel::disk(), t, |z, _| 1.0 / z[0].norm_sqr(), &g).unwrap();
            assert!((v - PI).abs() < 1e-8);
        }
        let bidisc = DomainModel::with_psi(
            DomainKind::Polydisc { radii: vec![1.0, 1.0] },
            PsiSpec::SliceLog { codim: 1 },
            PhiSpec::Zero,
        )
        .unwrap();
        let v = strip_integral(&bidisc, 1.5, |_, s| s.exp(), &g.invariant()).unwrap();
        assert!((v - PI * PI).abs() < 1e-6);
        assert_eq!(strip_integral(&bidisc, 1.5, |_, _| 0.0, &g).unwrap(), 0.0);
    }

    #[test]
    fn raw_path_agrees() {
        let g = QuadratureGrid::default();
        let dom = DomainModel::new(DomainKind::Disk, PhiSpec::RadialPower { a: 1.0 }).unwrap();
        let t = 0.5;
        let radial = sublevel_volume_integral(&dom, t, |z, _| dom.phi.weight(z), &g).unwrap();
        let raw = raw_sublevel_integral(&dom, t, |z| dom.phi.weight(z), 64, 16).unwrap();
        assert!((radial - raw).abs() < 1e-10 * radial);
        assert!((radial - PI * (1.0 - (-(-t).exp()).exp())).abs() < 1e-9);

        let b2 = ball(2);
        let radial = sublevel_volume_integral(&b2, 1.0, |z, _| z[1].norm_sqr(), &g.invariant()).unwrap();
        let raw = raw_sublevel_integral(&b2, 1.0, |z| z[1].norm_sqr(), 48, 4).unwrap();
        assert!((radial - raw).abs() < 1e-3 * radial);
    }

    #[test]
    fn condition3_examples() {
        let d = DomainModel::disk();
        let r = check_condition3(&d, &WeightFunction::constant(0.0), 0.9).unwrap();
        assert!(r.in_class);
        assert_eq!(r.lower_bound, Some(1.0));

        let gauss = DomainModel::new(DomainKind::Disk, PhiSpec::RadialPower { a: 1.0 }).unwrap();
        let r = check_condition3(&gauss, &WeightFunction::constant(0.0), 0.9).unwrap();
        assert!((r.lower_bound.unwrap() - (-0.81f64).exp()).abs() < 1e-12);

        let r = check_condition3(&d, &WeightFunction::exp_rate(0.0, 0.5), 0.9).unwrap();
        match r.witness {
            Some(Witness::Point(z)) => assert!((z[0].norm() - 0.9).abs() < 1e-12),
            other => panic!("unexpected witness {other:?}"),
        }
        assert!(check_condition3(&d, &WeightFunction::constant(0.0), 1.0).is_err());
    }

    #[test]
    fn ideal_membership() {
        let k2 = IdealSpec::MaxIdealPower { order: 2 };
        assert!(k2.pins(&MultiIndex(vec![1, 0])));
        assert!(!k2.pins(&MultiIndex(vec![1, 1])));
        let slice = IdealSpec::CoordinateSlice { codim: 1 };
        assert!(slice.pins(&MultiIndex(vec![3, 0])));
        assert!(!slice.pins(&MultiIndex(vec![0, 1])));
        let f = Polynomial::constant(2, 1.0);
        let big = f.clone().with_term(MultiIndex(vec![0, 2]), Complex64::new(3.0, 0.0));
        assert!(k2.contains_difference(&big, &f, 0.0));
        assert!(slice.contains_difference(&big, &f, 0.0));
        let bad = f.clone().with_term(MultiIndex(vec![1, 0]), Complex64::new(1.0, 0.0));
        assert!(!k2.contains_difference(&bad, &f, 0.0));
    }

    #[test]
    fn config_shapes() {
        let d: DomainModel = toml::from_str(
            "kind = { kind = \"ball\", n = 2 }\nphi = { tag = \"radial_power\", a = 1.0 }\n",
        )
        .unwrap();
        assert_eq!(d.kind, DomainKind::Ball { n: 2 });
        assert_eq!(d.psi, PsiSpec::Green);
        assert!(DomainModel::new(DomainKind::Ball { n: 0 }, PhiSpec::Zero).is_err());
        assert!(DomainModel::with_psi(DomainKind::Disk, PsiSpec::SliceLog { codim: 1 }, PhiSpec::Zero).is_err());
    }
}
