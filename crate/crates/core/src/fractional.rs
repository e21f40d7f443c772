//! Successive-approximation solver for the nonlinear fractional two-point
//! boundary value problem with zero boundary data on `[0, 1]`.
//!
//! The problem is recast as the fixed-point equation
//! `g(rho) = int_0^1 A(rho, eta) omega(eta, g(eta)) d eta` for the kernel
//!
//! ```text
//! A(rho, eta) = ([rho (1 - eta)]^(q-1) - (rho - eta)^(q-1)) / Gamma(q)   eta <= rho
//!             =  [rho (1 - eta)]^(q-1) / Gamma(q)                        rho <= eta
//! ```
//!
//! with order `q` in (1, 2], which reduces to the classical
//! `eta (1 - rho) / rho (1 - eta)` kernel at `q = 2` and vanishes on the rows
//! `rho = 0` and `rho = 1`, so solutions satisfy the boundary conditions
//! exactly.
//!
//! Quadrature is composite Simpson on a uniform odd-node grid. Each kernel
//! row has a kink at `eta = rho`, which always falls on a grid node; the row
//! integral is taken as two Simpson sweeps split at that node (odd interval
//! counts get a 3/8 block) so the kink never sits inside a panel.

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::gamma;
use thiserror::Error;

use crate::expr::{eval, EvalError, Expr};

#[derive(Debug, Error)]
pub enum FracError {
    #[error("order must lie in (1, 2], got {0}")]
    BadOrder(f64),
    #[error("grid_n must be odd and >= 3, got {0}")]
    BadGrid(usize),
    #[error("sigma must lie in (0, 1), got {0}")]
    BadSigma(f64),
    #[error("tol must be > 0, got {0}")]
    BadTol(f64),
    #[error("max_iter must be >= 1")]
    BadMaxIter,
    #[error("grid function has {got} values, kernel grid has {expected}")]
    GridMismatch { expected: usize, got: usize },
    #[error("omega evaluation failed at node {node} (rho = {rho}): {source}")]
    OmegaEval {
        node: usize,
        rho: f64,
        source: EvalError,
    },
    #[error(
        "divergence detected: successive distance grew for {streak} consecutive steps \
         (last distances: {tail:?})"
    )]
    Diverged { streak: usize, tail: Vec<f64> },
}

/// Quadrature weights for `int f` over `[nodes[a], nodes[b]]` on a uniform
/// grid with spacing `h`, accumulated into `w`. Even interval counts use
/// composite Simpson; odd counts >= 3 finish with a 3/8 block to stay 4th
/// order. Single-interval segments are handled separately by the product
/// rules below.
fn accumulate_segment_weights(w: &mut [f64], a: usize, b: usize, h: f64) {
    let m = b - a;
    if m < 2 {
        return;
    }
    let simpson_until = if m.is_multiple_of(2) { b } else { b - 3 };
    let mut k = a;
    while k < simpson_until {
        w[k] += h / 3.0;
        w[k + 1] += 4.0 * h / 3.0;
        w[k + 2] += h / 3.0;
        k += 2;
    }
    if !m.is_multiple_of(2) {
        let s = simpson_until;
        w[s] += 3.0 * h / 8.0;
        w[s + 1] += 9.0 * h / 8.0;
        w[s + 2] += 9.0 * h / 8.0;
        w[s + 3] += 3.0 * h / 8.0;
    }
}

/// Product-rule coefficients for `int_0^rho A(rho, eta) f(eta) d eta` on the
/// single-interval lower segment of row 1 (`rho = h`): `f` is replaced by
/// its linear interpolant and the kernel moments are integrated in closed
/// form, which also captures the `(rho - eta)^(q-1)` endpoint behavior
/// exactly. Returns the coefficients for the nodes `0` and `1`.
fn product_lower_edge(order: f64, gamma_q: f64, h: f64) -> (f64, f64) {
    let q = order;
    let rho = h;
    let rp = rho.powf(q - 1.0);
    let omr = 1.0 - rho;
    // i0 = int A, i1 = int eta * A over [0, rho]
    let i0 = (rp * (1.0 - omr.powf(q)) / q - rho.powf(q) / q) / gamma_q;
    let i1 = (rp * ((1.0 - omr.powf(q)) / q - (1.0 - omr.powf(q + 1.0)) / (q + 1.0))
        - rho.powf(q + 1.0) / (q * (q + 1.0)))
        / gamma_q;
    (i0 - i1 / h, i1 / h)
}

/// Product-rule coefficients for `int_rho^1 A(rho, eta) f(eta) d eta` on the
/// single-interval upper segment of row `n - 2` (`rho = 1 - h`). Returns the
/// coefficients for the nodes `n - 2` and `n - 1`.
fn product_upper_edge(order: f64, gamma_q: f64, h: f64) -> (f64, f64) {
    let q = order;
    let rho = 1.0 - h;
    let rp = rho.powf(q - 1.0);
    let hq = h.powf(q);
    // with tau = 1 - eta, the hat at node n-2 is tau/h, at node n-1 (h-tau)/h
    let m0 = rp * hq / (q + 1.0) / gamma_q;
    let m1 = rp * hq / (q * (q + 1.0)) / gamma_q;
    (m0, m1)
}

/// The discretized Green kernel: uniform nodes, the matrix `A(rho_i, eta_j)`,
/// and per-row quadrature coefficients split at the row's kink node. A
/// coefficient already folds the kernel value in, so
/// `int A(rho_i, eta) f(eta) d eta ~ sum_j quad[i][j] f(eta_j)`.
#[derive(Debug, Clone)]
pub struct GreenKernel {
    order: f64,
    gamma_q: f64,
    nodes: Vec<f64>,
    matrix: Vec<Vec<f64>>,
    quad: Vec<Vec<f64>>,
}

fn kernel_value(order: f64, gamma_q: f64, rho: f64, eta: f64) -> f64 {
    let p = order - 1.0;
    let outer = (rho * (1.0 - eta)).powf(p);
    if eta <= rho {
        (outer - (rho - eta).powf(p)) / gamma_q
    } else {
        outer / gamma_q
    }
}

/// Builds the kernel on `grid_n` uniform nodes over `[0, 1]`.
pub fn build_kernel(order: f64, grid_n: usize) -> Result<GreenKernel, FracError> {
    if order.is_nan() || order <= 1.0 || order > 2.0 {
        return Err(FracError::BadOrder(order));
    }
    if grid_n < 3 || grid_n.is_multiple_of(2) {
        return Err(FracError::BadGrid(grid_n));
    }
    let gamma_q = gamma(order);
    let h = 1.0 / (grid_n - 1) as f64;
    let nodes: Vec<f64> = (0..grid_n).map(|i| i as f64 * h).collect();
    let build_row = |i: usize| -> (Vec<f64>, Vec<f64>) {
        let rho = nodes[i];
        let row: Vec<f64> = nodes
            .iter()
            .map(|&eta| kernel_value(order, gamma_q, rho, eta))
            .collect();
        let mut weights = vec![0.0; grid_n];
        accumulate_segment_weights(&mut weights, 0, i, h);
        accumulate_segment_weights(&mut weights, i, grid_n - 1, h);
        let mut quad: Vec<f64> = row.iter().zip(weights.iter()).map(|(a, w)| a * w).collect();
        if i == 1 {
            let (m0, m1) = product_lower_edge(order, gamma_q, h);
            quad[0] += m0;
            quad[1] += m1;
        }
        if i == grid_n - 2 {
            let (m0, m1) = product_upper_edge(order, gamma_q, h);
            quad[grid_n - 2] += m0;
            quad[grid_n - 1] += m1;
        }
        (row, quad)
    };
    let rows: Vec<(Vec<f64>, Vec<f64>)> = if grid_n >= 129 {
        (0..grid_n).into_par_iter().map(build_row).collect()
    } else {
        (0..grid_n).map(build_row).collect()
    };
    let mut matrix = Vec::with_capacity(grid_n);
    let mut quad = Vec::with_capacity(grid_n);
    for (row, coeffs) in rows {
        matrix.push(row);
        quad.push(coeffs);
    }
    Ok(GreenKernel {
        order,
        gamma_q,
        nodes,
        matrix,
        quad,
    })
}

impl GreenKernel {
    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn gamma_q(&self) -> f64 {
        self.gamma_q
    }

    pub fn grid_n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.matrix[i][j]
    }

    /// Quadrature of `eta -> A(rho_i, eta) f(eta)` given samples of `f` at
    /// the grid nodes.
    pub fn row_quadrature(&self, i: usize, f_at_nodes: &[f64]) -> f64 {
        self.quad[i]
            .iter()
            .zip(f_at_nodes.iter())
            .map(|(c, f)| c * f)
            .sum()
    }

    /// Quadrature of the plain row `eta -> A(rho_i, eta)`.
    pub fn row_integral(&self, i: usize) -> f64 {
        self.quad[i].iter().sum()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Condition2Report {
    /// `sup_rho int_0^1 A(rho, eta) d eta` over the grid rows.
    pub value: f64,
    /// Grid point where the supremum is attained.
    pub at_rho: f64,
    pub exceeds_one: bool,
}

/// Audits the kernel-mass condition: the row integrals must stay below one
/// for the operator to inherit the nonlinearity's contraction factor. The
/// tool reports the number; it never assumes the bound.
pub fn condition2_audit(kernel: &GreenKernel) -> Condition2Report {
    let mut value = f64::NEG_INFINITY;
    let mut at_rho = 0.0;
    for i in 0..kernel.grid_n() {
        let integral = kernel.row_integral(i);
        if integral > value {
            value = integral;
            at_rho = kernel.nodes[i];
        }
    }
    Condition2Report {
        value,
        at_rho,
        exceeds_one: value > 1.0,
    }
}

/// A function sampled on the kernel grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Self {
        GridFunction { values }
    }

    pub fn zeros(n: usize) -> Self {
        GridFunction {
            values: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn sup_distance(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(other.values.iter())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

/// One application of the integral operator: Simpson evaluation of
/// `int A(rho_i, eta) omega(eta, g(eta)) d eta` at every node. Rows `rho = 0`
/// and `rho = 1` are identically zero, so the output meets the boundary
/// conditions exactly.
pub fn apply_operator(
    kernel: &GreenKernel,
    omega: &Expr,
    g: &GridFunction,
) -> Result<GridFunction, FracError> {
    if g.len() != kernel.grid_n() {
        return Err(FracError::GridMismatch {
            expected: kernel.grid_n(),
            got: g.len(),
        });
    }
    let mut integrand = Vec::with_capacity(kernel.grid_n());
    for (node, (&eta, &gv)) in kernel.nodes.iter().zip(g.values.iter()).enumerate() {
        let value = eval(omega, eta, gv).map_err(|source| FracError::OmegaEval {
            node,
            rho: eta,
            source,
        })?;
        integrand.push(value);
    }
    let n = kernel.grid_n();
    let values: Vec<f64> = if n >= 129 {
        (0..n)
            .into_par_iter()
            .map(|i| kernel.row_quadrature(i, &integrand))
            .collect()
    } else {
        (0..n).map(|i| kernel.row_quadrature(i, &integrand)).collect()
    };
    Ok(GridFunction::new(values))
}

#[derive(Debug, Clone, Serialize)]
pub struct LipschitzReport {
    pub max_ratio: f64,
    pub passes: bool,
    /// `(rho, e, f, ratio)` for the worst observed slope.
    pub witness: Option<(f64, f64, f64, f64)>,
    pub samples: usize,
    pub bound: f64,
    /// Sample triples where omega itself failed to evaluate.
    pub eval_failures: usize,
}

/// Kronecker low-discrepancy sweep: `frac(k * sqrt(p))` for a fixed prime per
/// dimension. Deterministic and reasonably equidistributed.
fn kronecker(k: usize, alpha: f64) -> f64 {
    (k as f64 * alpha).fract()
}

/// Samples `|omega(rho, e) - omega(rho, f)| / |e - f|` over a deterministic
/// low-discrepancy sweep of `[0,1] x [-b, b]^2` and reports the worst slope.
/// This is a falsifier, not a prover: passing does not certify the constant.
pub fn lipschitz_audit_with_bound(
    omega: &Expr,
    sigma: f64,
    samples: usize,
    b: f64,
) -> LipschitzReport {
    let sqrt2 = std::f64::consts::SQRT_2;
    let sqrt3 = 3.0_f64.sqrt();
    let sqrt5 = 5.0_f64.sqrt();
    let mut max_ratio: f64 = 0.0;
    let mut witness = None;
    let mut eval_failures = 0;
    for k in 1..=samples {
        let rho = kronecker(k, sqrt2);
        let e = (2.0 * kronecker(k, sqrt3) - 1.0) * b;
        let f = (2.0 * kronecker(k, sqrt5) - 1.0) * b;
        if (e - f).abs() < 1e-12 {
            continue;
        }
        let (ve, vf) = match (eval(omega, rho, e), eval(omega, rho, f)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => {
                eval_failures += 1;
                continue;
            }
        };
        let ratio = (ve - vf).abs() / (e - f).abs();
        if ratio > max_ratio {
            max_ratio = ratio;
            witness = Some((rho, e, f, ratio));
        }
    }
    // relative guard so a slope exactly at sigma is not falsified by rounding
    LipschitzReport {
        max_ratio,
        passes: max_ratio <= sigma * (1.0 + 1e-9),
        witness,
        samples,
        bound: b,
        eval_failures,
    }
}

/// [`lipschitz_audit_with_bound`] with the default witness box `[-10, 10]`.
pub fn lipschitz_audit(omega: &Expr, sigma: f64, samples: usize) -> LipschitzReport {
    lipschitz_audit_with_bound(omega, sigma, samples, 10.0)
}

/// A fractional boundary value problem instance.
#[derive(Debug, Clone)]
pub struct FractionalBvp {
    pub order: f64,
    pub omega: Expr,
    pub omega_source: String,
    pub sigma: f64,
    pub grid_n: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl FractionalBvp {
    pub fn new(
        order: f64,
        omega: Expr,
        omega_source: String,
        sigma: f64,
        grid_n: usize,
        tol: f64,
        max_iter: usize,
    ) -> Result<Self, FracError> {
        if order.is_nan() || order <= 1.0 || order > 2.0 {
            return Err(FracError::BadOrder(order));
        }
        if sigma.is_nan() || sigma <= 0.0 || sigma >= 1.0 {
            return Err(FracError::BadSigma(sigma));
        }
        if grid_n < 3 || grid_n.is_multiple_of(2) {
            return Err(FracError::BadGrid(grid_n));
        }
        if tol.is_nan() || tol <= 0.0 {
            return Err(FracError::BadTol(tol));
        }
        if max_iter < 1 {
            return Err(FracError::BadMaxIter);
        }
        Ok(FractionalBvp {
            order,
            omega,
            omega_source,
            sigma,
            grid_n,
            tol,
            max_iter,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub solution: GridFunction,
    pub nodes: Vec<f64>,
    pub iterations: usize,
    pub successive_dists: Vec<f64>,
    pub contraction_ratios: Vec<f64>,
    pub residual: f64,
    pub condition2_value: f64,
    pub converged: bool,
}

const DIVERGENCE_STREAK: usize = 5;

/// Picard iteration from `g = 0` with the a-posteriori Banach stopping rule
/// `|g_{k+1} - g_k| <= tol (1 - sigma) / sigma`, which certifies a residual
/// at the `tol` level on success. Growth of the successive distance for five
/// consecutive steps is reported as divergence, carrying the distance trace.
pub fn solve(bvp: &FractionalBvp) -> Result<SolveReport, FracError> {
    let kernel = build_kernel(bvp.order, bvp.grid_n)?;
    let condition2 = condition2_audit(&kernel);
    let threshold = bvp.tol * (1.0 - bvp.sigma) / bvp.sigma;

    let mut current = GridFunction::zeros(bvp.grid_n);
    let mut dists = Vec::new();
    let mut iterations = 0;
    let mut streak = 0;
    let mut converged = false;

    while iterations < bvp.max_iter {
        let next = apply_operator(&kernel, &bvp.omega, &current)?;
        iterations += 1;
        let d = next.sup_distance(&current);
        if let Some(&prev) = dists.last() {
            if d > prev {
                streak += 1;
                if streak >= DIVERGENCE_STREAK {
                    dists.push(d);
                    let tail = dists.iter().rev().take(DIVERGENCE_STREAK + 1).rev().copied().collect();
                    return Err(FracError::Diverged {
                        streak: DIVERGENCE_STREAK,
                        tail,
                    });
                }
            } else {
                streak = 0;
            }
        }
        dists.push(d);
        current = next;
        if d <= threshold {
            converged = true;
            break;
        }
    }

    let image = apply_operator(&kernel, &bvp.omega, &current)?;
    let residual = image.sup_distance(&current);
    let contraction_ratios = dists
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .collect();

    Ok(SolveReport {
        solution: current,
        nodes: kernel.nodes().to_vec(),
        iterations,
        successive_dists: dists,
        contraction_ratios,
        residual,
        condition2_value: condition2.value,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn quadratic_kernel_matches_classic_form() {
        let kernel = build_kernel(2.0, 21).unwrap();
        for (i, &rho) in kernel.nodes().iter().enumerate() {
            for (j, &eta) in kernel.nodes().iter().enumerate() {
                let expected = if eta <= rho {
                    eta * (1.0 - rho)
                } else {
                    rho * (1.0 - eta)
                };
                assert!((kernel.value(i, j) - expected).abs() < 1e-14);
            }
        }
        // A(0.5, 0.5) = 0.25
        assert!((kernel.value(10, 10) - 0.25).abs() < 1e-15);
        // boundary rows vanish identically
        for j in 0..kernel.grid_n() {
            assert_eq!(kernel.value(0, j), 0.0);
            assert!(kernel.value(kernel.grid_n() - 1, j).abs() < 1e-15);
        }
    }

    #[test]
    fn fractional_kernel_value_matches_high_precision_oracle() {
        // ((0.375)^0.5 - (0.25)^0.5) / Gamma(1.5), evaluated independently
        // before the build
        let kernel = build_kernel(1.5, 5).unwrap();
        // nodes 0, 0.25, 0.5, 0.75, 1: (rho, eta) = (0.5, 0.25) is (2, 1)
        let expected = 0.12679871539491467;
        assert!((kernel.value(2, 1) - expected).abs() < 1e-14);
        assert!((kernel.gamma_q() - 0.886226925452758).abs() < 1e-13);
    }

    #[test]
    fn kernel_entries_are_nonnegative() {
        for &order in &[1.1, 1.5, 1.9, 2.0] {
            let kernel = build_kernel(order, 51).unwrap();
            for i in 0..kernel.grid_n() {
                for j in 0..kernel.grid_n() {
                    assert!(
                        kernel.value(i, j) >= -1e-15,
                        "negative entry at order {order}, ({i}, {j})"
                    );
                }
            }
        }
    }

    #[test]
    fn order_outside_range_is_rejected() {
        assert!(matches!(build_kernel(1.0, 11), Err(FracError::BadOrder(_))));
        assert!(matches!(build_kernel(2.5, 11), Err(FracError::BadOrder(_))));
        assert!(matches!(build_kernel(2.0, 10), Err(FracError::BadGrid(_))));
    }

    #[test]
    fn condition2_matches_closed_form_at_q2() {
        let kernel = build_kernel(2.0, 201).unwrap();
        let report = condition2_audit(&kernel);
        assert!((report.value - 0.125).abs() < 1e-8);
        assert!((report.at_rho - 0.5).abs() < 1e-12);
        assert!(!report.exceeds_one);

        // row integrals match rho (1 - rho) / 2 everywhere
        for (i, &rho) in kernel.nodes().iter().enumerate() {
            let expected = rho * (1.0 - rho) / 2.0;
            assert!((kernel.row_integral(i) - expected).abs() < 1e-12);
        }

        // coarse grid against the same closed form, loose tolerance
        let coarse = build_kernel(2.0, 3).unwrap();
        let report = condition2_audit(&coarse);
        assert!((report.value - 0.125).abs() < 1e-2);
    }

    #[test]
    fn operator_on_constant_omega_matches_closed_form() {
        let kernel = build_kernel(2.0, 201).unwrap();
        let omega = parse("0").unwrap();
        let zero = apply_operator(&kernel, &omega, &GridFunction::zeros(201)).unwrap();
        assert_eq!(zero.sup_norm(), 0.0);

        let omega = parse("1.5").unwrap();
        let image = apply_operator(&kernel, &omega, &GridFunction::zeros(201)).unwrap();
        for (i, &rho) in kernel.nodes().iter().enumerate() {
            let expected = 1.5 * rho * (1.0 - rho) / 2.0;
            assert!((image.values()[i] - expected).abs() < 1e-8);
        }
        // zero boundary exactly
        assert_eq!(image.values()[0], 0.0);
        assert_eq!(image.values()[200], 0.0);

        // omega = g with g == 1 reduces to the constant case
        let omega = parse("g").unwrap();
        let ones = GridFunction::new(vec![1.0; 201]);
        let image = apply_operator(&kernel, &omega, &ones).unwrap();
        for (i, &rho) in kernel.nodes().iter().enumerate() {
            assert!((image.values()[i] - rho * (1.0 - rho) / 2.0).abs() < 1e-8);
        }
    }

    #[test]
    fn operator_reports_the_failing_node() {
        let kernel = build_kernel(2.0, 5).unwrap();
        let omega = parse("1/g").unwrap();
        let err = apply_operator(&kernel, &omega, &GridFunction::zeros(5)).unwrap_err();
        match err {
            FracError::OmegaEval { node, .. } => assert_eq!(node, 0),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn operator_is_affine_bounded_by_sigma_times_mass() {
        let kernel = build_kernel(1.5, 101).unwrap();
        let cond2 = condition2_audit(&kernel).value;
        let omega = parse("0.4*g + rho").unwrap();
        let a = GridFunction::new((0..101).map(|i| (i as f64 * 0.13).sin()).collect());
        let b = GridFunction::new((0..101).map(|i| (i as f64 * 0.07).cos()).collect());
        let fa = apply_operator(&kernel, &omega, &a).unwrap();
        let fb = apply_operator(&kernel, &omega, &b).unwrap();
        let lhs = fa.sup_distance(&fb);
        let rhs = 0.4 * cond2 * a.sup_distance(&b);
        assert!(lhs <= rhs + 1e-12, "{lhs} > {rhs}");
    }

    #[test]
    fn lipschitz_audit_examples() {
        let linear = parse("0.3*g").unwrap();
        let report = lipschitz_audit(&linear, 0.3, 2000);
        assert!((report.max_ratio - 0.3).abs() < 1e-12);
        assert!(report.passes);

        let sine = parse("0.5*sin(g) + rho").unwrap();
        let report = lipschitz_audit(&sine, 0.5, 2000);
        assert!(report.max_ratio <= 0.5 + 1e-12);
        assert!(report.passes);

        let square = parse("g*g").unwrap();
        let report = lipschitz_audit(&square, 0.9, 2000);
        assert!(!report.passes);
        let (_, e, f, ratio) = report.witness.unwrap();
        assert!((e + f).abs() > 0.9);
        assert!(ratio > 0.9);
    }

    #[test]
    fn solve_constant_omega_in_two_iterations() {
        let bvp = FractionalBvp::new(
            2.0,
            parse("1").unwrap(),
            "1".into(),
            0.5,
            201,
            1e-10,
            50,
        )
        .unwrap();
        let report = solve(&bvp).unwrap();
        assert!(report.converged);
        assert_eq!(report.iterations, 2);
        assert!(report.residual <= 1e-10);
        for (i, &rho) in report.nodes.iter().enumerate() {
            let expected = rho * (1.0 - rho) / 2.0;
            assert!((report.solution.values()[i] - expected).abs() < 1e-8);
        }
    }

    #[test]
    fn solve_zero_omega_in_one_iteration() {
        let bvp =
            FractionalBvp::new(2.0, parse("0").unwrap(), "0".into(), 0.5, 51, 1e-10, 50).unwrap();
        let report = solve(&bvp).unwrap();
        assert!(report.converged);
        assert_eq!(report.iterations, 1);
        assert_eq!(report.solution.sup_norm(), 0.0);
    }

    #[test]
    fn solve_affine_fractional_case_contracts() {
        let bvp = FractionalBvp::new(
            1.5,
            parse("0.3*g + 1").unwrap(),
            "0.3*g + 1".into(),
            0.3,
            201,
            1e-10,
            100,
        )
        .unwrap();
        let report = solve(&bvp).unwrap();
        assert!(report.converged);
        assert!(report.residual <= 1e-10);
        let cap = 0.3 * report.condition2_value + 1e-6;
        for &ratio in &report.contraction_ratios {
            assert!(ratio <= cap, "{ratio} > {cap}");
        }
        // residual <= last successive distance / (1 - sigma)
        let last = *report.successive_dists.last().unwrap();
        assert!(report.residual <= last / (1.0 - 0.3) + 1e-18);
        // boundary values exact
        assert_eq!(report.solution.values()[0], 0.0);
        assert_eq!(report.solution.values()[200], 0.0);
    }

    #[test]
    fn fractional_solution_matches_independent_quadrature_oracle() {
        // fixed-point values for q = 1.5, omega = 0.3 g + 1 computed before
        // the build with adaptive Gauss-Kronrod quadrature on a 401-node
        // piecewise-linear iterate (a scheme independent of the split
        // Simpson weights used here); agreement observed at 2e-5
        let anchors = [(50usize, 0.3029299848), (100, 0.2836152380), (150, 0.1714931660)];
        let bvp = FractionalBvp::new(
            1.5,
            parse("0.3*g + 1").unwrap(),
            "0.3*g + 1".into(),
            0.3,
            201,
            1e-12,
            200,
        )
        .unwrap();
        let report = solve(&bvp).unwrap();
        for (node, expected) in anchors {
            let got = report.solution.values()[node];
            assert!(
                (got - expected).abs() < 1e-4,
                "node {node}: {got} vs oracle {expected}"
            );
        }
    }

    #[test]
    fn divergence_is_detected_and_carries_trace() {
        // slope 20 with kernel mass ~ 1/8 gives operator gain ~ 2.5
        let bvp = FractionalBvp::new(
            2.0,
            parse("20*g + 1").unwrap(),
            "20*g + 1".into(),
            0.9,
            51,
            1e-10,
            200,
        )
        .unwrap();
        match solve(&bvp) {
            Err(FracError::Diverged { streak, tail }) => {
                assert_eq!(streak, 5);
                assert!(tail.len() >= 5);
                assert!(tail.windows(2).all(|w| w[1] > w[0]));
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn quadrature_is_fourth_order_on_a_smooth_nonpolynomial_case() {
        // q = 2 with a curved forcing term so Simpson error is genuinely
        // O(h^4): compare converged solutions across grid halvings
        let solve_at = |grid_n: usize| {
            let bvp = FractionalBvp::new(
                2.0,
                parse("exp(rho)").unwrap(),
                "exp(rho)".into(),
                0.5,
                grid_n,
                1e-13,
                50,
            )
            .unwrap();
            solve(&bvp).unwrap()
        };
        let coarse = solve_at(51);
        let mid = solve_at(101);
        let fine = solve_at(201);
        // sample the shared nodes (every node of the coarse grid)
        let err = |a: &SolveReport, b: &SolveReport, stride: usize| {
            a.solution
                .values()
                .iter()
                .enumerate()
                .map(|(i, v)| (v - b.solution.values()[i * stride]).abs())
                .fold(0.0f64, f64::max)
        };
        let e_coarse = err(&coarse, &fine, 4);
        let e_mid = err(&mid, &fine, 2);
        assert!(
            e_coarse / e_mid > 12.0,
            "expected >= 4th order, got ratio {}",
            e_coarse / e_mid
        );
    }
}
