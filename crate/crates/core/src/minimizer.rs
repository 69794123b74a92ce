//! `G(t; c)` as a constrained minimum-norm problem over a truncated monomial
//! basis, the weighted Bergman kernel of `{psi < -t}`, and the two
//! structural checks built on them (orthogonality of the minimizer and the
//! cutoff extension inequality).
//!
//! Gram convention: `P_ij = int z^{alpha_j} conj(z^{alpha_i}) w`, so the
//! norm of `sum x_i z^{alpha_i}` is `x^H P x`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domains::{DomainModel, IdealSpec, QuadratureGrid, ShellRule};
use crate::error::{Error, Result};
use crate::odekit::make_cutoff;
use crate::poly::{monomials_up_to, MultiIndex, Polynomial};
use crate::quad::relative_tail_length;
use crate::weightlab::WeightFunction;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Degree-to-degree change below which `G` counts as converged.
pub const DEGREE_TOLERANCE: f64 = 1e-8;

/// Weighted space `A^2({psi < -t}, e^{-phi} c(-psi))` truncated to
/// polynomials of degree `<= basis_degree`.
#[derive(Debug, Clone)]
pub struct BergmanSpace {
    pub domain: DomainModel,
    pub weight: WeightFunction,
    pub basis_degree: u32,
    pub grid: QuadratureGrid,
}

impl BergmanSpace {
    pub fn new(domain: DomainModel, weight: WeightFunction, basis_degree: u32) -> Self {
        Self {
            domain,
            weight,
            basis_degree,
            grid: QuadratureGrid::default(),
        }
    }

    pub fn with_grid(mut self, grid: QuadratureGrid) -> Self {
        self.grid = grid;
        self
    }

    pub fn with_weight(&self, weight: WeightFunction) -> Self {
        Self {
            weight,
            ..self.clone()
        }
    }

    pub fn basis(&self) -> Vec<MultiIndex> {
        monomials_up_to(self.domain.dim(), self.basis_degree)
    }

    /// Radial symmetry detector: `c(-psi)` is always a function of the
    /// gauge, so only `phi` decides.
    pub fn is_radial(&self) -> bool {
        self.domain.phi.is_reinhardt()
    }

    fn check_t(&self, t: f64) -> Result<()> {
        if !(t >= 0.0) || t < self.weight.lower() {
            return Err(Error::Domain {
                t,
                lower: self.weight.lower().max(0.0),
            });
        }
        Ok(())
    }
}

/// Moment matrices `int z^{alpha_j} conj(z^{alpha_i}) w_k` over `s in [a, b]`
/// for several weights at once; only diagonals when `diagonal`.
#[allow(clippy::too_many_arguments)]
fn moment_matrices<W>(
    dom: &DomainModel,
    grid: &QuadratureGrid,
    monos: &[MultiIndex],
    a: f64,
    b: f64,
    breaks: &[f64],
    diagonal: bool,
    n_weights: usize,
    weights: W,
) -> Result<Vec<DMatrix<Complex64>>>
where
    W: Fn(&[Complex64], f64, &mut [f64]) + Sync,
{
    let n = monos.len();
    let pairs: Vec<(usize, usize)> = if diagonal {
        (0..n).map(|i| (i, i)).collect()
    } else {
        (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect()
    };
    let per = pairs.len();
    let rule = ShellRule::new(dom, grid, diagonal)?;
    let raw = rule.integrate(grid, a, b, breaks, per * n_weights, |z, s, lw, acc| {
        let mut wv = vec![0.0; n_weights];
        weights(z, s, &mut wv);
        let vals: Vec<Complex64> = monos.iter().map(|m| m.eval(z)).collect();
        for (p, &(i, j)) in pairs.iter().enumerate() {
            let prod = vals[j] * vals[i].conj();
            for (k, wk) in wv.iter().enumerate() {
                acc[k * per + p] += prod * (lw * wk);
            }
        }
    })?;
    let mut out = Vec::with_capacity(n_weights);
    for k in 0..n_weights {
        let mut m = DMatrix::from_element(n, n, ZERO);
        for (p, &(i, j)) in pairs.iter().enumerate() {
            let v = raw[k * per + p];
            if i == j {
                m[(i, i)] = Complex64::new(v.re, 0.0);
            } else {
                m[(i, j)] = v;
                m[(j, i)] = v.conj();
            }
        }
        out.push(m);
    }
    Ok(out)
}

/// Cholesky factor of `S P S` with `S = diag(P_ii)^{-1/2}`.
#[derive(Debug, Clone)]
struct ScaledCholesky {
    scale: DVector<f64>,
    chol: nalgebra::Cholesky<Complex64, nalgebra::Dyn>,
    min_pivot: f64,
}

impl ScaledCholesky {
    fn new(p: &DMatrix<Complex64>, t: f64) -> Result<Self> {
        let n = p.nrows();
        let scale = DVector::from_iterator(
            n,
            (0..n).map(|i| {
                let d = p[(i, i)].re;
                if d > 0.0 {
                    1.0 / d.sqrt()
                } else {
                    f64::NAN
                }
            }),
        );
        if scale.iter().any(|s| !s.is_finite()) {
            return Err(Error::NotPositiveDefinite { t });
        }
        let scaled = DMatrix::from_fn(n, n, |i, j| p[(i, j)] * (scale[i] * scale[j]));
        let chol = nalgebra::Cholesky::new(scaled).ok_or(Error::NotPositiveDefinite { t })?;
        let l = chol.l_dirty();
        let min_pivot = (0..n).map(|i| l[(i, i)].re.powi(2)).fold(f64::INFINITY, f64::min);
        Ok(Self { scale, chol, min_pivot })
    }

    /// `P^{-1} v`.
    fn solve(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        let sv = v.component_mul(&self.scale.map(|s| Complex64::new(s, 0.0)));
        let y = self.chol.solve(&sv);
        y.component_mul(&self.scale.map(|s| Complex64::new(s, 0.0)))
    }
}

/// Gram matrix of the monomial basis on `{psi < -t}`.
#[derive(Debug, Clone)]
pub struct GramSystem {
    pub t: f64,
    pub basis: Vec<MultiIndex>,
    pub matrix: DMatrix<Complex64>,
    /// Assembled through the diagonal fast path.
    pub diagonal: bool,
    /// Smallest pivot of the diagonally scaled Cholesky factor.
    pub min_pivot: f64,
    /// Spectral condition number of the diagonally scaled matrix.
    pub condition: f64,
}

impl GramSystem {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `max |P_ij - conj(P_ji)|` relative to the largest entry.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim();
        let size = self.matrix.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst / size.max(f64::MIN_POSITIVE)
    }

    /// `x^H P x` for coefficients in basis order.
    pub fn norm_sq(&self, x: &[Complex64]) -> f64 {
        let v = DVector::from_column_slice(x);
        (v.adjoint() * &self.matrix * &v)[(0, 0)].re
    }

    /// Coefficients of `p` in basis order; `None` if `p` leaves the basis.
    pub fn coordinates(&self, p: &Polynomial) -> Option<Vec<Complex64>> {
        let mut x = vec![ZERO; self.dim()];
        for (a, c) in p.terms() {
            let i = self.basis.iter().position(|b| b == a)?;
            x[i] = *c;
        }
        Some(x)
    }

    fn leading(&self, size: usize) -> GramSystem {
        let m = self.matrix.view((0, 0), (size, size)).into_owned();
        GramSystem {
            t: self.t,
            basis: self.basis[..size].to_vec(),
            matrix: m,
            diagonal: self.diagonal,
            min_pivot: self.min_pivot,
            condition: self.condition,
        }
    }
}

fn scaled_condition(p: &DMatrix<Complex64>) -> f64 {
    let n = p.nrows();
    let scaled = DMatrix::from_fn(n, n, |i, j| p[(i, j)] / (p[(i, i)].re * p[(j, j)].re).sqrt());
    let eig = nalgebra::SymmetricEigen::new(scaled).eigenvalues;
    let max = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Assembles the Gram matrix by the radial-substitution path.
pub fn assemble_gram(space: &BergmanSpace, t: f64) -> Result<GramSystem> {
    space.check_t(t)?;
    let basis = space.basis();
    let c = &space.weight;
    let upper = c.tail_cutoff(t)?;
    let diagonal = space.is_radial();
    let dom = &space.domain;
    let mats = moment_matrices(dom, &space.grid, &basis, t, upper, &[], diagonal, 1, |z, s, w| {
        w[0] = dom.phi.weight(z) * c.eval(s);
    })?;
    let matrix = mats.into_iter().next().unwrap();
    let factor = ScaledCholesky::new(&matrix, t)?;
    Ok(GramSystem {
        t,
        condition: scaled_condition(&matrix),
        min_pivot: factor.min_pivot,
        basis,
        matrix,
        diagonal,
    })
}

/// Datum plus ideal constraint defining `G(t; c)`.
#[derive(Debug, Clone)]
pub struct ExtensionProblem {
    pub space: BergmanSpace,
    pub ideal: IdealSpec,
    pub datum: Polynomial,
}

impl ExtensionProblem {
    /// Fails when the pinned part of `datum` vanishes; use
    /// [`ExtensionProblem::degenerate`] for that case.
    pub fn new(space: BergmanSpace, ideal: IdealSpec, datum: Polynomial) -> Result<Self> {
        if datum.dim() != space.domain.dim() {
            return Err(Error::Parameter("datum dimension differs from the domain".into()));
        }
        let p = Self { space, ideal, datum };
        if p.jet().is_zero() {
            return Err(Error::Parameter(
                "datum has zero jet; request the degenerate problem explicitly".into(),
            ));
        }
        Ok(p)
    }

    /// The all-zero problem, whose minimum is `0`.
    pub fn degenerate(space: BergmanSpace, ideal: IdealSpec) -> Self {
        let n = space.domain.dim();
        Self {
            space,
            ideal,
            datum: Polynomial::zero(n),
        }
    }

    /// The pinned part of the datum.
    pub fn jet(&self) -> Polynomial {
        self.datum.filter(|a| self.ideal.pins(a))
    }

    pub fn is_degenerate(&self) -> bool {
        self.jet().is_zero()
    }

    /// Basis monomials whose coefficients are free (members of the ideal).
    pub fn free_monomials(&self) -> Vec<MultiIndex> {
        self.space
            .basis()
            .into_iter()
            .filter(|a| !self.ideal.pins(a))
            .collect()
    }

    pub fn with_space(&self, space: BergmanSpace) -> Self {
        Self {
            space,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalIntegralResult {
    pub t: f64,
    /// `G(t)`; `+inf` with `infeasible` set when no extension exists in the basis.
    pub value: f64,
    pub minimizer: Polynomial,
    pub basis_degree: u32,
    pub condition: f64,
    pub min_pivot: f64,
    /// `|G_d - G_{d-1}| / G_d`, `NaN` when degree `d - 1` cannot carry the jet.
    pub degree_change: f64,
    pub converged: bool,
    pub infeasible: bool,
}

/// Pinned coefficients fixed, free block solved by scaled Cholesky.
fn solve_constrained(
    gram: &GramSystem,
    ideal: &IdealSpec,
    jet: &Polynomial,
) -> Result<Option<(f64, Vec<Complex64>)>> {
    let n = gram.dim();
    let mut x = vec![ZERO; n];
    for (a, c) in jet.terms() {
        match gram.basis.iter().position(|b| b == a) {
            Some(i) => x[i] = *c,
            None => return Ok(None),
        }
    }
    let free: Vec<usize> = (0..n).filter(|&i| !ideal.pins(&gram.basis[i])).collect();
    let pinned: Vec<usize> = (0..n).filter(|&i| ideal.pins(&gram.basis[i])).collect();
    if !free.is_empty() {
        let a = DMatrix::from_fn(free.len(), free.len(), |i, j| gram.matrix[(free[i], free[j])]);
        let rhs = DVector::from_iterator(
            free.len(),
            free.iter().map(|&i| pinned.iter().map(|&j| gram.matrix[(i, j)] * x[j]).sum::<Complex64>()),
        );
        let factor = ScaledCholesky::new(&a, gram.t)?;
        let y = factor.solve(&rhs);
        for (k, &i) in free.iter().enumerate() {
            x[i] = -y[k];
        }
    }
    Ok(Some((gram.norm_sq(&x), x)))
}

fn polynomial_from(basis: &[MultiIndex], x: &[Complex64], n: usize) -> Polynomial {
    Polynomial::from_terms(n, basis.iter().cloned().zip(x.iter().copied()))
}

/// Solves `min x^H P x` subject to the pinned jet.
pub fn minimal_integral(problem: &ExtensionProblem, t: f64) -> Result<MinimalIntegralResult> {
    let gram = assemble_gram(&problem.space, t)?;
    minimal_from_gram(problem, &gram)
}

/// As [`minimal_integral`] with a precomputed Gram system.
pub fn minimal_from_gram(problem: &ExtensionProblem, gram: &GramSystem) -> Result<MinimalIntegralResult> {
    let n = problem.space.domain.dim();
    let d = problem.space.basis_degree;
    let jet = problem.jet();
    let base = MinimalIntegralResult {
        t: gram.t,
        value: 0.0,
        minimizer: Polynomial::zero(n),
        basis_degree: d,
        condition: gram.condition,
        min_pivot: gram.min_pivot,
        degree_change: 0.0,
        converged: true,
        infeasible: false,
    };
    if jet.is_zero() {
        return Ok(base);
    }
    let Some((value, x)) = solve_constrained(gram, &problem.ideal, &jet)? else {
        return Ok(MinimalIntegralResult {
            value: f64::INFINITY,
            converged: false,
            degree_change: f64::NAN,
            infeasible: true,
            ..base
        });
    };
    let degree_change = if d == 0 {
        f64::NAN
    } else {
        let size = monomials_up_to(n, d - 1).len();
        match solve_constrained(&gram.leading(size), &problem.ideal, &jet)? {
            Some((lower, _)) => (lower - value).abs() / value.abs().max(f64::MIN_POSITIVE),
            None => f64::NAN,
        }
    };
    Ok(MinimalIntegralResult {
        value,
        minimizer: polynomial_from(&gram.basis, &x, n),
        degree_change,
        converged: degree_change <= DEGREE_TOLERANCE,
        ..base
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BergmanEvaluation {
    pub t: f64,
    pub value: Complex64,
    /// Spectral condition number of the scaled Gram matrix.
    pub condition: f64,
}

/// `K(z, w) = sum b_i(z) (P^{-1})_ij conj(b_j(w))` on `{psi < -t}`.
pub fn bergman_kernel(space: &BergmanSpace, t: f64, z: &[Complex64], w: &[Complex64]) -> Result<BergmanEvaluation> {
    let gram = assemble_gram(space, t)?;
    bergman_from_gram(space, &gram, z, w)
}

/// Kernel from a precomputed Gram system; `z`, `w` must lie in the closure of `D_t`.
pub fn bergman_from_gram(
    space: &BergmanSpace,
    gram: &GramSystem,
    z: &[Complex64],
    w: &[Complex64],
) -> Result<BergmanEvaluation> {
    let dom = &space.domain;
    for p in [z, w] {
        let inside = p.iter().all(|c| c.norm() == 0.0) || dom.psi(p) <= -gram.t + 1e-12;
        if p.len() != dom.dim() || !inside || !(dom.contains(p) || p.iter().all(|c| c.norm() == 0.0)) {
            return Err(Error::Parameter(format!("kernel point {p:?} is outside the sublevel set")));
        }
    }
    let factor = ScaledCholesky::new(&gram.matrix, gram.t)?;
    let bw = DVector::from_iterator(gram.dim(), gram.basis.iter().map(|a| a.eval(w).conj()));
    let y = factor.solve(&bw);
    let value = gram.basis.iter().zip(y.iter()).map(|(a, yi)| a.eval(z) * yi).sum();
    Ok(BergmanEvaluation {
        t: gram.t,
        value,
        condition: gram.condition,
    })
}

/// `max |‖F‖² + ‖h‖² - ‖F + h‖²| / ‖F + h‖²` over ideal members `h`.
pub fn verify_pythagoras(problem: &ExtensionProblem, t: f64, perturbations: &[Polynomial]) -> Result<f64> {
    let gram = assemble_gram(&problem.space, t)?;
    let min = minimal_from_gram(problem, &gram)?;
    if min.infeasible {
        return Err(Error::Hypothesis("minimal integral is infeasible".into()));
    }
    let xf = gram
        .coordinates(&min.minimizer)
        .ok_or_else(|| Error::Parameter("minimizer outside basis".into()))?;
    let mut worst: f64 = 0.0;
    for h in perturbations {
        if h.terms().any(|(a, c)| problem.ideal.pins(a) && c.norm() > 0.0) {
            return Err(Error::Parameter(format!("perturbation has a pinned coefficient: {h:?}")));
        }
        let xh = gram
            .coordinates(h)
            .ok_or_else(|| Error::Parameter("perturbation outside basis".into()))?;
        let sum: Vec<Complex64> = xf.iter().zip(&xh).map(|(a, b)| a + b).collect();
        let total = gram.norm_sq(&sum);
        let lhs = gram.norm_sq(&xf) + gram.norm_sq(&xh);
        if total > 0.0 {
            worst = worst.max((lhs - total).abs() / total);
        }
    }
    Ok(worst)
}

/// Which weight the cutoff extension inequality is evaluated with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionMode {
    /// Weight `e^{-phi-psi}` on both sides and `F~ - F` in the ideal near
    /// the pole, the form in which the inequality is used to build
    /// extensions.
    #[default]
    Twisted,
    /// Weight `e^{-phi}` with `F~` free.
    Literal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionReport {
    pub mode: ExtensionMode,
    pub t0: f64,
    pub width: f64,
    /// `min over F~ of int_M |F~ - (1 - b(psi)) F|^2 e^{-phi(-psi) + v(psi)} c(-v(psi))`.
    pub lhs: f64,
    /// `C int_T^{t0+B} c e^{-s}`.
    pub rhs: f64,
    /// `C = (1/B) int_{-t0-B < psi < -t0} |F|^2 e^{-phi(-psi)}`.
    pub constant: f64,
    pub extension: Polynomial,
    pub pass: bool,
}

/// Searches the basis for `F~` with the smallest left side, `F` being the
/// minimizer on `{psi < -t0}`.
pub fn verify_extension_inequality(
    problem: &ExtensionProblem,
    t0: f64,
    width: f64,
    mode: ExtensionMode,
) -> Result<ExtensionReport> {
    let cut = make_cutoff(t0, width)?;
    let space = &problem.space;
    let dom = &space.domain;
    let n = dom.dim();
    let c = &space.weight;
    let twisted = mode == ExtensionMode::Twisted;

    let f = minimal_integral(problem, t0)?.minimizer;
    let jet = if twisted { problem.jet() } else { Polynomial::zero(n) };

    // R = P0 + b(psi) P1 with P0 = jet - F and P1 = F
    let p0 = jet.sub(&f);
    let p1 = f.clone();
    let unknowns: Vec<MultiIndex> = if twisted {
        problem.free_monomials()
    } else {
        space.basis()
    };
    let mut monos = unknowns.clone();
    for (a, _) in p0.terms().chain(p1.terms()) {
        if !monos.contains(a) {
            monos.push(a.clone());
        }
    }
    let index = |a: &MultiIndex| monos.iter().position(|b| b == a).unwrap();

    let invariant = space.is_radial() && f.terms().count() <= 1 && jet.terms().count() <= 1;
    let decay = if twisted {
        problem.ideal.pole_decay(dom.pole_dim())
    } else {
        1.0
    };
    let [k0, k1] = cut.kinks_in_s();
    let upper = k1 + relative_tail_length(decay.min(1.0));
    let twist = |s: f64| if twisted { s } else { 0.0 };
    let cutoff_weight = |z: &[Complex64], s: f64| -> f64 {
        let v = cut.v(-s);
        dom.phi.weight(z) * (twist(s) + v).exp() * c.eval(-v)
    };
    let mats = moment_matrices(dom, &space.grid, &monos, 0.0, upper, &[k0, k1], invariant, 3, |z, s, w| {
        let base = cutoff_weight(z, s);
        let b = cut.b(-s);
        w[0] = base;
        w[1] = base * b;
        w[2] = base * b * b;
    })?;
    let (g0, g1, g2) = (&mats[0], &mats[1], &mats[2]);

    let coef = |p: &Polynomial| DVector::from_iterator(monos.len(), monos.iter().map(|a| p.coefficient(a)));
    let (v0, v1) = (coef(&p0), coef(&p1));
    let q = (v0.adjoint() * g0 * &v0)[(0, 0)].re
        + 2.0 * (v0.adjoint() * g1 * &v1)[(0, 0)].re
        + (v1.adjoint() * g2 * &v1)[(0, 0)].re;
    let r_full = g0 * &v0 + g1 * &v1;
    let ids: Vec<usize> = unknowns.iter().map(index).collect();
    let mut lhs = q;
    let mut extension = jet.clone();
    if !ids.is_empty() && q > 0.0 {
        let a = DMatrix::from_fn(ids.len(), ids.len(), |i, j| g0[(ids[i], ids[j])]);
        let r = DVector::from_iterator(ids.len(), ids.iter().map(|&i| r_full[i]));
        let factor = ScaledCholesky::new(&a, t0)?;
        let x = -factor.solve(&r);
        lhs = q + (r.adjoint() * &x)[(0, 0)].re;
        for (k, &i) in ids.iter().enumerate() {
            extension = extension.with_term(monos[i].clone(), x[k]);
        }
    }

    let strip = ShellRule::new(dom, &space.grid, invariant)?.integrate_scalar(&space.grid, k0, k1, &[], |z, s| {
        f.eval(z).norm_sqr() * dom.phi.weight(z) * twist(s).exp()
    })?;
    let constant = strip / width;
    let mass = c.mass_from_start(k1)?.value;
    let rhs = constant * mass;
    Ok(ExtensionReport {
        mode,
        t0,
        width,
        lhs: lhs.max(0.0),
        rhs,
        constant,
        extension,
        pass: lhs <= rhs * (1.0 + 1e-9),
    })
}
