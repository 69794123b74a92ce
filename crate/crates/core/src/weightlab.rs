//! Weight functions `c` on `(T, +inf)`, the admissibility classes they may
//! belong to, and the transform `g(t) = int_t^inf c(s) e^{-s} ds`.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{relative_tail_length, Composite, Estimate};

/// Absolute monotonicity tolerance on consecutive `c(t) e^{-t}` values.
pub const TAU_MONO: f64 = 1e-12;
/// Strictness margin for the class `C_T` inequality.
pub const TAU_STRICT: f64 = 1e-12;
/// Admissible remainder of a truncated tail integral.
pub const TAIL_TOLERANCE: f64 = 1e-12;

/// Exponential envelope `c(s) e^{-s} <= c0 * e^{-beta s}` for `s > T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub c0: f64,
    pub beta: f64,
}

impl TailBound {
    pub fn remainder(&self, t: f64) -> f64 {
        self.c0 * (-self.beta * t).exp() / self.beta
    }

    /// Smallest `t` whose remainder is below `tol`.
    pub fn absolute_cutoff(&self, tol: f64) -> f64 {
        (self.c0 / (self.beta * tol)).ln() / self.beta
    }
}

/// Monotone piecewise-cubic (Fritsch–Carlson) interpolant of tabulated data.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::Parameter("tabulated weight needs at least two (t, c) rows".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Grid("tabulated t values must be strictly increasing".into()));
        }
        if let Some((x, y)) = xs.iter().zip(&ys).find(|(_, y)| !(**y > 0.0)) {
            return Err(Error::NonPositiveWeight { t: *x, value: *y });
        }
        let n = xs.len();
        let delta: Vec<f64> = (0..n - 1)
            .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
            .collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = delta[0];
        slopes[n - 1] = delta[n - 2];
        for i in 1..n - 1 {
            slopes[i] = if delta[i - 1] * delta[i] <= 0.0 {
                0.0
            } else {
                let h0 = xs[i] - xs[i - 1];
                let h1 = xs[i + 1] - xs[i];
                let w0 = 2.0 * h1 + h0;
                let w1 = h1 + 2.0 * h0;
                (w0 + w1) / (w0 / delta[i - 1] + w1 / delta[i])
            };
        }
        Ok(Self { xs, ys, slopes })
    }

    pub fn from_csv(path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            t: f64,
            c: f64,
        }
        let mut reader = csv::Reader::from_path(path)
            .map_err(|e| Error::Parameter(format!("{}: {e}", path.display())))?;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for row in reader.deserialize::<Row>() {
            let row = row.map_err(|e| Error::Parameter(format!("{}: {e}", path.display())))?;
            xs.push(row.t);
            ys.push(row.c);
        }
        Self::new(xs, ys)
    }

    fn segment(&self, x: f64) -> usize {
        match self.xs.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.xs.len() - 2),
        }
    }

    /// Value and derivative; flat outside the table.
    pub fn eval_with_deriv(&self, x: f64) -> (f64, f64) {
        let last = self.xs.len() - 1;
        if x <= self.xs[0] {
            return (self.ys[0], 0.0);
        }
        if x >= self.xs[last] {
            return (self.ys[last], 0.0);
        }
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let s = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let value = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1;
        let dvalue = (6.0 * s2 - 6.0 * s) * y0
            + (3.0 * s2 - 4.0 * s + 1.0) * m0
            + (-6.0 * s2 + 6.0 * s) * y1
            + (3.0 * s2 - 2.0 * s) * m1;
        (value, dvalue / h)
    }

    pub fn max_value(&self) -> f64 {
        self.ys.iter().copied().fold(f64::MIN, f64::max)
    }
}

/// Closed-form families a weight can come from.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightFamily {
    Constant { value: f64 },
    /// `c(t) = e^{alpha t}`.
    ExpRate { alpha: f64 },
    /// `c(t) = p(t) / q(t)`, coefficients in ascending powers.
    Rational { num: Vec<f64>, den: Vec<f64> },
    Tabulated(Arc<MonotoneCubic>),
}

fn horner(coefs: &[f64], t: f64) -> (f64, f64) {
    coefs.iter().rev().fold((0.0, 0.0), |(p, dp), &c| (p * t + c, dp * t + p))
}

/// A positive weight `c` on `(T, +inf)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightFunction {
    lower: f64,
    family: WeightFamily,
    tail: Option<TailBound>,
}

impl WeightFunction {
    pub fn new(lower: f64, family: WeightFamily) -> Self {
        let tail = default_tail(lower, &family);
        Self { lower, family, tail }
    }

    /// `c == 1` on `(T, +inf)`.
    pub fn constant(lower: f64) -> Self {
        Self::new(lower, WeightFamily::Constant { value: 1.0 })
    }

    pub fn exp_rate(lower: f64, alpha: f64) -> Self {
        Self::new(lower, WeightFamily::ExpRate { alpha })
    }

    pub fn rational(lower: f64, num: Vec<f64>, den: Vec<f64>) -> Self {
        Self::new(lower, WeightFamily::Rational { num, den })
    }

    pub fn tabulated(lower: f64, table: MonotoneCubic) -> Self {
        Self::new(lower, WeightFamily::Tabulated(Arc::new(table)))
    }

    /// Overrides the declared tail envelope.
    pub fn with_tail(mut self, tail: TailBound) -> Self {
        self.tail = Some(tail);
        self
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn family(&self) -> &WeightFamily {
        &self.family
    }

    pub fn tail(&self) -> Option<TailBound> {
        self.tail
    }

    pub fn tail_or_err(&self) -> Result<TailBound> {
        self.tail
            .ok_or_else(|| Error::NotIntegrable(format!("{:?}", self.family)))
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.family {
            WeightFamily::Constant { value } => *value,
            WeightFamily::ExpRate { alpha } => (alpha * t).exp(),
            WeightFamily::Rational { num, den } => horner(num, t).0 / horner(den, t).0,
            WeightFamily::Tabulated(table) => table.eval_with_deriv(t).0,
        }
    }

    pub fn deriv(&self, t: f64) -> f64 {
        match &self.family {
            WeightFamily::Constant { .. } => 0.0,
            WeightFamily::ExpRate { alpha } => alpha * (alpha * t).exp(),
            WeightFamily::Rational { num, den } => {
                let (p, dp) = horner(num, t);
                let (q, dq) = horner(den, t);
                (dp * q - p * dq) / (q * q)
            }
            WeightFamily::Tabulated(table) => table.eval_with_deriv(t).1,
        }
    }

    /// `c(t) e^{-t}`.
    pub fn density(&self, t: f64) -> f64 {
        self.eval(t) * (-t).exp()
    }

    /// Evaluates `c(t)` after checking `t > T` and positivity.
    pub fn checked(&self, t: f64) -> Result<f64> {
        if !(t > self.lower) {
            return Err(Error::Domain { t, lower: self.lower });
        }
        let value = self.eval(t);
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::NonPositiveWeight { t, value });
        }
        Ok(value)
    }

    /// Upper limit used when integrating `c e^{-s}` from `t` to infinity.
    pub fn tail_cutoff(&self, t: f64) -> Result<f64> {
        let tail = self.tail_or_err()?;
        Ok((t + relative_tail_length(tail.beta)).max(tail.absolute_cutoff(TAIL_TOLERANCE)))
    }

    /// `int_t^inf c(s) e^{-s} ds`.
    pub fn tail_integral(&self, t: f64) -> Result<Estimate> {
        let upper = self.tail_cutoff(t)?;
        Composite::default().integrate(t, upper, |s| self.density(s))
    }

    /// `H(t) = int_T^t c(s) e^{-s} ds`.
    pub fn mass_from_start(&self, t: f64) -> Result<Estimate> {
        Composite::default().integrate(self.lower, t, |s| self.density(s))
    }

    /// `I(t) = int_T^t H(t2) dt2 = int_T^t (t - s) c(s) e^{-s} ds`.
    pub fn iterated_mass(&self, t: f64) -> Result<Estimate> {
        Composite::default().integrate(self.lower, t, |s| (t - s) * self.density(s))
    }

    /// `sup c'/c` over `grid`, with the point where it is attained.
    pub fn max_log_derivative(&self, grid: &[f64]) -> (f64, f64) {
        grid.iter()
            .map(|&t| (self.deriv(t) / self.eval(t), t))
            .fold((f64::NEG_INFINITY, f64::NAN), |acc, x| if x.0 > acc.0 { x } else { acc })
    }
}

fn default_tail(lower: f64, family: &WeightFamily) -> Option<TailBound> {
    match family {
        WeightFamily::Constant { value } if *value > 0.0 => Some(TailBound {
            c0: *value,
            beta: 1.0,
        }),
        WeightFamily::Constant { .. } => None,
        WeightFamily::ExpRate { alpha } if *alpha < 1.0 => Some(TailBound {
            c0: 1.0,
            beta: 1.0 - alpha,
        }),
        WeightFamily::ExpRate { .. } => None,
        WeightFamily::Rational { num, den } => {
            // sampled envelope with beta = 1/2 and a 5% margin
            let start = if lower.is_finite() { lower } else { -50.0 };
            let mut sup: f64 = 0.0;
            for i in 1..=40_000 {
                let s = start + 0.01 * f64::from(i);
                let c = horner(num, s).0 / horner(den, s).0;
                if !(c > 0.0) || !c.is_finite() {
                    return None;
                }
                sup = sup.max(c * (-0.5 * s).exp());
            }
            Some(TailBound {
                c0: 1.05 * sup,
                beta: 0.5,
            })
        }
        WeightFamily::Tabulated(table) => Some(TailBound {
            c0: table.max_value(),
            beta: 1.0,
        }),
    }
}

/// The condition a [`ClassReport`] flag refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Integrable,
    DensityNonincreasing,
    LiminfPositive,
    StrictInequality,
    LogDerivativeBound,
    LocalLowerBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionFlag {
    pub condition: Condition,
    pub holds: bool,
}

/// Where a condition was first seen to fail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Time(f64),
    Point(Vec<Complex64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub in_class: bool,
    pub flags: Vec<ConditionFlag>,
    pub witness: Option<Witness>,
    /// `int_T^inf c e^{-t}` when it was computed.
    pub integral: Option<f64>,
    /// Smallest sampled value of the quantity being bounded below.
    pub lower_bound: Option<f64>,
    /// Grid points where both sides vanish and no verdict is possible.
    pub indeterminate: Vec<f64>,
    pub tolerance: f64,
}

impl ClassReport {
    fn from_flags(flags: Vec<ConditionFlag>, tolerance: f64) -> Self {
        Self {
            in_class: flags.iter().all(|f| f.holds),
            flags,
            witness: None,
            integral: None,
            lower_bound: None,
            indeterminate: Vec::new(),
            tolerance,
        }
    }

    pub fn holds(&self, condition: Condition) -> Option<bool> {
        self.flags
            .iter()
            .find(|f| f.condition == condition)
            .map(|f| f.holds)
    }
}

fn validate_grid(c: &WeightFunction, grid: &[f64], min_len: usize) -> Result<()> {
    if grid.len() < min_len {
        return Err(Error::Grid(format!(
            "need at least {min_len} grid points, got {}",
            grid.len()
        )));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Grid("grid must be strictly increasing".into()));
    }
    for &t in grid {
        c.checked(t)?;
    }
    Ok(())
}

/// Membership in `P_T` with condition (3) in its `phi == 0` form.
pub fn check_class_p(c: &WeightFunction, grid: &[f64], liminf_floor: f64) -> Result<ClassReport> {
    if !(liminf_floor > 0.0) {
        return Err(Error::Parameter("liminf floor must be positive".into()));
    }
    validate_grid(c, grid, 16)?;

    let integral = match c.tail() {
        Some(_) => Some(c.tail_integral(c.lower())?.value),
        None => None,
    };
    let integrable = integral.is_some_and(f64::is_finite);

    let mut witness = None;
    if !integrable {
        witness = Some(Witness::Time(grid[0]));
    }
    let mut nonincreasing = true;
    for w in grid.windows(2) {
        if c.density(w[1]) - c.density(w[0]) > TAU_MONO {
            nonincreasing = false;
            witness = Some(Witness::Time(w[0]));
            break;
        }
    }

    let tail_start = grid.len() - grid.len() / 4;
    let tail_min = grid[tail_start..]
        .iter()
        .map(|&t| c.eval(t))
        .fold(f64::INFINITY, f64::min);
    let liminf_ok = tail_min > liminf_floor;
    if !liminf_ok && witness.is_none() {
        witness = Some(Witness::Time(grid[grid.len() - 1]));
    }

    let mut report = ClassReport::from_flags(
        vec![
            ConditionFlag {
                condition: Condition::Integrable,
                holds: integrable,
            },
            ConditionFlag {
                condition: Condition::DensityNonincreasing,
                holds: nonincreasing,
            },
            ConditionFlag {
                condition: Condition::LiminfPositive,
                holds: liminf_ok,
            },
        ],
        TAU_MONO,
    );
    report.witness = witness;
    report.integral = integral;
    report.lower_bound = Some(tail_min);
    Ok(report)
}

/// Below this size both sides of the `C_T` inequality are treated as zero.
const VANISHING: f64 = 1e-10;

/// The class `C_T`: `H(t)^2 > c(t) e^{-t} I(t)` at every grid point.
pub fn check_class_c(c: &WeightFunction, grid: &[f64]) -> Result<ClassReport> {
    validate_grid(c, grid, 1)?;
    c.tail_or_err()?;
    let mut holds = true;
    let mut witness = None;
    let mut indeterminate = Vec::new();
    let mut min_margin = f64::INFINITY;
    for &t in grid {
        let h = c.mass_from_start(t)?.value;
        let i = c.iterated_mass(t)?.value;
        let lhs = h * h;
        let rhs = c.density(t) * i;
        if lhs < VANISHING && rhs < VANISHING {
            indeterminate.push(t);
            continue;
        }
        let margin = lhs - rhs;
        min_margin = min_margin.min(margin);
        if margin < TAU_STRICT && holds {
            holds = false;
            witness = Some(Witness::Time(t));
        }
    }
    let mut report = ClassReport::from_flags(
        vec![ConditionFlag {
            condition: Condition::StrictInequality,
            holds,
        }],
        TAU_STRICT,
    );
    report.witness = witness;
    report.indeterminate = indeterminate;
    report.lower_bound = min_margin.is_finite().then_some(min_margin);
    Ok(report)
}

/// `c'(t)/c(t) < bound` on every grid point.
pub fn log_derivative_margin(c: &WeightFunction, grid: &[f64], bound: f64) -> Result<ClassReport> {
    validate_grid(c, grid, 1)?;
    let mut witness = None;
    let mut worst = f64::NEG_INFINITY;
    for &t in grid {
        let rate = c.deriv(t) / c.eval(t);
        worst = worst.max(rate);
        if rate >= bound && witness.is_none() {
            witness = Some(Witness::Time(t));
        }
    }
    let mut report = ClassReport::from_flags(
        vec![ConditionFlag {
            condition: Condition::LogDerivativeBound,
            holds: witness.is_none(),
        }],
        0.0,
    );
    report.witness = witness;
    report.lower_bound = Some(bound - worst);
    Ok(report)
}

/// Precomputed `g(t) = int_t^inf c e^{-s} ds` with its inverse.
#[derive(Debug, Clone)]
pub struct GTransform {
    weight: WeightFunction,
    total: f64,
    nodes: Vec<f64>,
    table: Vec<f64>,
}

/// Builds `g` on `[T, t_max]` with `n_nodes` table nodes.
pub fn build_g(c: &WeightFunction, t_max: f64, n_nodes: usize) -> Result<GTransform> {
    let tail = c.tail_or_err()?;
    if !(t_max > c.lower()) || n_nodes < 2 {
        return Err(Error::Parameter("build_g needs t_max > T and at least two nodes".into()));
    }
    let remainder = tail.remainder(t_max);
    if remainder >= TAIL_TOLERANCE {
        return Err(Error::TailBound {
            t_max,
            remainder,
            tolerance: TAIL_TOLERANCE,
        });
    }
    let step = (t_max - c.lower()) / (n_nodes - 1) as f64;
    let nodes: Vec<f64> = (0..n_nodes)
        .map(|i| if i + 1 == n_nodes { t_max } else { c.lower() + step * i as f64 })
        .collect();
    let quad = Composite::default();
    let mut table = vec![0.0; n_nodes];
    table[n_nodes - 1] = c.tail_integral(t_max)?.value;
    for i in (0..n_nodes - 1).rev() {
        let piece = quad.integrate(nodes[i], nodes[i + 1], |s| c.density(s))?.value;
        table[i] = table[i + 1] + piece;
    }
    Ok(GTransform {
        weight: c.clone(),
        total: table[0],
        nodes,
        table,
    })
}

impl GTransform {
    /// Table over `[T, absolute cutoff]`, 16 nodes per unit length.
    pub fn new(c: &WeightFunction) -> Result<Self> {
        let tail = c.tail_or_err()?;
        let t_max = tail.absolute_cutoff(TAIL_TOLERANCE * 0.5).max(c.lower() + 1.0);
        let n = (((t_max - c.lower()) * 16.0).ceil() as usize).max(2);
        build_g(c, t_max, n)
    }

    pub fn weight(&self) -> &WeightFunction {
        &self.weight
    }

    /// `g(T)`.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn t_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn eval(&self, t: f64) -> f64 {
        let lower = self.weight.lower();
        if t <= lower {
            return self.total;
        }
        if t >= self.t_max() {
            return self
                .weight
                .tail_integral(t)
                .map(|e| e.value)
                .unwrap_or(0.0);
        }
        let step = self.nodes[1] - self.nodes[0];
        let i = (((t - lower) / step).floor() as usize).min(self.nodes.len() - 2);
        let upper = self.nodes[i + 1];
        let piece = crate::quad::GaussRule::get(24).integrate(t, upper, |s| self.weight.density(s));
        self.table[i + 1] + piece
    }

    /// `g'(t) = -c(t) e^{-t}`.
    pub fn deriv(&self, t: f64) -> f64 {
        -self.weight.density(t)
    }

    /// `g^{-1}(r)` for `r in (0, g(T)]` by bisection.
    pub fn inverse(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) || r > self.total * (1.0 + 1e-15) {
            return Err(Error::Parameter(format!(
                "r = {r} outside (0, {}]",
                self.total
            )));
        }
        let lower = self.weight.lower();
        if r >= self.total {
            return Ok(lower);
        }
        let mut lo = lower;
        let mut hi = lower + 1.0;
        while self.eval(hi) > r {
            lo = hi;
            hi = lower + 2.0 * (hi - lower);
            if hi - lower > 1e6 {
                return Err(Error::Parameter(format!("r = {r} too small to invert")));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval(mid) > r {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}
