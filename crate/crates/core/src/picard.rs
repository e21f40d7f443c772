//! Picard bisequence iteration on finite bipolar spaces: trace construction
//! for covariant and contravariant maps, geometric a-priori error bounds,
//! cycle detection, fixed-point census, weak-Picard and Picard-continuity
//! checks.
//!
//! Covariant scheduling advances both sides independently,
//! `g[k+1] = F g[k]`, `h[k+1] = F h[k]`; contravariant scheduling interleaves
//! them, `h[k] = F g[k]`, `g[k+1] = F h[k]`, so the whole trace is determined
//! by the left start. On finite spaces every trace terminates within
//! `|left|*|right| + 1` steps by first-repeated-state detection, which keeps
//! the engine total on non-contractive inputs.

use serde::Serialize;
use std::collections::HashMap;
use thiserror::Error;

use crate::contraction::{
    CoefficientFamily, ContractionCertificate, ContractionError, ContractionSpec, MappingSpec,
    Variance,
};
use crate::fmt17;
use crate::space::FiniteBipolarSpace;

#[derive(Debug, Error)]
pub enum PicardError {
    #[error("unknown left start label {0:?}")]
    UnknownLeftStart(String),
    #[error("unknown right start label {0:?}")]
    UnknownRightStart(String),
    #[error("max_iter must be >= 1")]
    BadMaxIter,
    #[error("tol must be > 0, got {0}")]
    BadTol(f64),
    #[error("horizon must be >= 1")]
    BadHorizon,
    #[error("bound parameters invalid: {0}")]
    BadBoundParams(String),
    #[error(transparent)]
    Contraction(#[from] ContractionError),
}

/// Parameters of the tail estimate `(M/(1-pi))^(1/rho) * pi^(k/rho)`
/// (contravariant traces use exponent `2k/rho`).
#[derive(Debug, Clone, Serialize)]
pub struct ErrorBoundParams {
    pub m: f64,
    pub pi: f64,
    pub rho_index: usize,
    pub mode: Variance,
}

impl ErrorBoundParams {
    pub fn new(m: f64, pi: f64, rho_index: usize, mode: Variance) -> Result<Self, PicardError> {
        if pi.is_nan() || pi <= 0.0 || pi >= 1.0 {
            return Err(PicardError::BadBoundParams(format!(
                "pi must lie in (0,1), got {pi}"
            )));
        }
        if rho_index < 1 {
            return Err(PicardError::BadBoundParams(format!(
                "rho_index must be >= 1, got {rho_index}"
            )));
        }
        if !m.is_finite() || m < 0.0 {
            return Err(PicardError::BadBoundParams(format!(
                "M must be a finite non-negative real, got {m}"
            )));
        }
        Ok(ErrorBoundParams {
            m,
            pi,
            rho_index,
            mode,
        })
    }

    pub fn bound(&self, kappa: usize) -> f64 {
        let inv_rho = 1.0 / self.rho_index as f64;
        let base = (self.m / (1.0 - self.pi)).powf(inv_rho);
        let steps = match self.mode {
            Variance::Covariant => kappa as f64,
            Variance::Contravariant => 2.0 * kappa as f64,
        };
        base * self.pi.powf(steps * inv_rho)
    }
}

/// Tail estimate at index `kappa` for the given parameters.
pub fn a_priori_bound(params: &ErrorBoundParams, kappa: usize) -> f64 {
    params.bound(kappa)
}

/// `M` from the start data: covariant mode adds the sums over `(g0, h1)`
/// and `(g0, h0)`; contravariant mode counts the `(g0, h1)` sum twice.
pub fn compute_m(
    space: &FiniteBipolarSpace,
    map: &MappingSpec,
    coeffs: &CoefficientFamily,
    spec: &ContractionSpec,
    start_left: &str,
    start_right: &str,
) -> Result<f64, PicardError> {
    map.check_against(space)?;
    coeffs.check_dims(space)?;
    let g0 = space
        .left_index(start_left)
        .ok_or_else(|| PicardError::UnknownLeftStart(start_left.to_string()))?;
    let sum = |i: usize, j: usize| -> f64 {
        let d = space.dist_at(i, j);
        (0..=coeffs.degree())
            .map(|u| coeffs.value(u, i, j) * d.powi(u as i32))
            .sum()
    };
    let total = match map.variance {
        Variance::Covariant => {
            let h0 = space
                .right_index(start_right)
                .ok_or_else(|| PicardError::UnknownRightStart(start_right.to_string()))?;
            let h1 = map.right_image(h0);
            sum(g0, h1) + sum(g0, h0)
        }
        Variance::Contravariant => {
            // h0 = F g0, g1 = F h0, h1 = F g1
            let h0 = map.left_image(g0);
            let g1 = map.right_image(h0);
            let h1 = map.left_image(g1);
            2.0 * sum(g0, h1)
        }
    };
    Ok(total / spec.q_lower)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IterationStatus {
    Converged,
    CycleDetected,
    MaxIterations,
}

#[derive(Debug, Clone, Serialize)]
pub struct Bisequence {
    pub g: Vec<usize>,
    pub h: Vec<usize>,
    pub mode: Variance,
}

#[derive(Debug, Clone)]
pub struct IterationConfig {
    pub max_iter: usize,
    pub tol: f64,
    pub bound_params: Option<ErrorBoundParams>,
}

impl Default for IterationConfig {
    fn default() -> Self {
        IterationConfig {
            max_iter: 10_000,
            tol: 1e-12,
            bound_params: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IterationOutcome {
    pub trace: Bisequence,
    pub status: IterationStatus,
    pub fixed_point: Option<String>,
    pub cycle: Option<Vec<String>>,
    pub observed_distances: Vec<f64>,
    pub bounds: Option<Vec<f64>>,
}

/// Runs the bisequence from the given starts until the pair state repeats
/// (cycle length 1 means convergence), a longer cycle is detected, or
/// `max_iter` applications of the map.
pub fn iterate(
    space: &FiniteBipolarSpace,
    map: &MappingSpec,
    start_left: &str,
    start_right: &str,
    config: &IterationConfig,
) -> Result<IterationOutcome, PicardError> {
    map.check_against(space)?;
    if config.max_iter < 1 {
        return Err(PicardError::BadMaxIter);
    }
    if config.tol.is_nan() || config.tol <= 0.0 {
        return Err(PicardError::BadTol(config.tol));
    }
    let g0 = space
        .left_index(start_left)
        .ok_or_else(|| PicardError::UnknownLeftStart(start_left.to_string()))?;
    let h0 = space
        .right_index(start_right)
        .ok_or_else(|| PicardError::UnknownRightStart(start_right.to_string()))?;

    let mut g = vec![g0];
    let mut h = match map.variance {
        Variance::Covariant => vec![h0],
        // the interleaving identity pins h0 to F g0; the supplied right
        // start is validated but superseded
        Variance::Contravariant => vec![map.left_image(g0)],
    };

    let step = |gi: usize, hi: usize| -> (usize, usize) {
        match map.variance {
            Variance::Covariant => (map.left_image(gi), map.right_image(hi)),
            Variance::Contravariant => {
                let g_next = map.right_image(hi);
                (g_next, map.left_image(g_next))
            }
        }
    };

    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    seen.insert((g[0], h[0]), 0);
    let mut status = IterationStatus::MaxIterations;
    let mut fixed_point = None;
    let mut cycle = None;

    for k in 0..config.max_iter {
        let cur = (g[k], h[k]);
        let next = step(cur.0, cur.1);
        if next == cur {
            // stationary pair; for contravariant maps this is a genuine
            // fixed point only when both components are the same point
            if map.variance == Variance::Contravariant && !space.is_overlap(cur.0, cur.1) {
                status = IterationStatus::CycleDetected;
                cycle = Some(vec![
                    space.left_labels()[cur.0].clone(),
                    space.right_labels()[cur.1].clone(),
                ]);
            } else {
                status = IterationStatus::Converged;
                fixed_point = Some(space.left_labels()[cur.0].clone());
            }
            break;
        }
        if let Some(&first) = seen.get(&next) {
            status = IterationStatus::CycleDetected;
            let states = first..=k;
            let left_cycle: Vec<usize> = g[states.clone()].to_vec();
            let labels = if left_cycle.windows(2).any(|w| w[0] != w[1]) {
                left_cycle
                    .iter()
                    .map(|&i| space.left_labels()[i].clone())
                    .collect()
            } else {
                h[states].iter().map(|&j| space.right_labels()[j].clone()).collect()
            };
            cycle = Some(labels);
            break;
        }
        seen.insert(next, k + 1);
        g.push(next.0);
        h.push(next.1);
    }

    let observed_distances: Vec<f64> = g
        .iter()
        .zip(h.iter())
        .map(|(&i, &j)| space.dist_at(i, j))
        .collect();
    let bounds = config
        .bound_params
        .as_ref()
        .map(|params| (0..g.len()).map(|k| params.bound(k)).collect());

    Ok(IterationOutcome {
        trace: Bisequence {
            g,
            h,
            mode: map.variance,
        },
        status,
        fixed_point,
        cycle,
        observed_distances,
        bounds,
    })
}

/// Trace export: one record per index with the observed distance and, when
/// bound parameters were supplied, the a-priori bound.
pub fn render_trace(space: &FiniteBipolarSpace, outcome: &IterationOutcome) -> String {
    let mut out = String::new();
    for k in 0..outcome.trace.g.len() {
        let bound = match &outcome.bounds {
            Some(b) => fmt17(b[k]),
            None => "-".to_string(),
        };
        out.push_str(&format!(
            "{} {} {} {} {}\n",
            k,
            space.left_labels()[outcome.trace.g[k]],
            space.right_labels()[outcome.trace.h[k]],
            fmt17(outcome.observed_distances[k]),
            bound
        ));
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedPoints {
    pub left: Vec<String>,
    pub right: Vec<String>,
}

/// Exact enumeration of fixed points on each side. For contravariant maps a
/// point is fixed when its image is the same underlying point through a
/// declared overlap pair.
pub fn all_fixed_points(space: &FiniteBipolarSpace, map: &MappingSpec) -> FixedPoints {
    let mut left = Vec::new();
    let mut right = Vec::new();
    match map.variance {
        Variance::Covariant => {
            for i in 0..space.n_left() {
                if map.left_image(i) == i {
                    left.push(space.left_labels()[i].clone());
                }
            }
            for j in 0..space.n_right() {
                if map.right_image(j) == j {
                    right.push(space.right_labels()[j].clone());
                }
            }
        }
        Variance::Contravariant => {
            for i in 0..space.n_left() {
                if space.is_overlap(i, map.left_image(i)) {
                    left.push(space.left_labels()[i].clone());
                }
            }
            for j in 0..space.n_right() {
                if space.is_overlap(map.right_image(j), j) {
                    right.push(space.right_labels()[j].clone());
                }
            }
        }
    }
    FixedPoints { left, right }
}

#[derive(Debug, Clone, Serialize)]
pub struct WeaklyPicardReport {
    pub holds: bool,
    pub fixed: FixedPoints,
    pub offending_left: Vec<String>,
    pub offending_right: Vec<String>,
}

/// Follows the single-side orbit of `start` under `next`, returning whether
/// it reaches a self-loop (as opposed to entering a cycle of length >= 2).
fn orbit_reaches_fixed(n: usize, start: usize, next: impl Fn(usize) -> usize) -> bool {
    let mut seen = vec![false; n];
    let mut x = start;
    loop {
        if seen[x] {
            return false;
        }
        seen[x] = true;
        let y = next(x);
        if y == x {
            return true;
        }
        x = y;
    }
}

/// True iff the fixed-point set is non-empty and every start leads the
/// bisequence into a fixed point (no cycles of length >= 2 anywhere).
pub fn check_weakly_picard(space: &FiniteBipolarSpace, map: &MappingSpec) -> WeaklyPicardReport {
    let fixed = all_fixed_points(space, map);
    let mut offending_left = Vec::new();
    let mut offending_right = Vec::new();
    match map.variance {
        Variance::Covariant => {
            for i in 0..space.n_left() {
                if !orbit_reaches_fixed(space.n_left(), i, |x| map.left_image(x)) {
                    offending_left.push(space.left_labels()[i].clone());
                }
            }
            for j in 0..space.n_right() {
                if !orbit_reaches_fixed(space.n_right(), j, |x| map.right_image(x)) {
                    offending_right.push(space.right_labels()[j].clone());
                }
            }
        }
        Variance::Contravariant => {
            // left starts follow F h = F(F g); stationarity must land on an
            // overlap pair to count as a fixed point of the union map
            for i in 0..space.n_left() {
                let composed = |x: usize| map.right_image(map.left_image(x));
                let reaches = {
                    let mut seen = vec![false; space.n_left()];
                    let mut x = i;
                    loop {
                        if seen[x] {
                            break false;
                        }
                        seen[x] = true;
                        let y = composed(x);
                        if y == x {
                            break space.is_overlap(x, map.left_image(x));
                        }
                        x = y;
                    }
                };
                if !reaches {
                    offending_left.push(space.left_labels()[i].clone());
                }
            }
            for j in 0..space.n_right() {
                let composed = |x: usize| map.left_image(map.right_image(x));
                let reaches = {
                    let mut seen = vec![false; space.n_right()];
                    let mut x = j;
                    loop {
                        if seen[x] {
                            break false;
                        }
                        seen[x] = true;
                        let y = composed(x);
                        if y == x {
                            break space.is_overlap(map.right_image(x), x);
                        }
                        x = y;
                    }
                };
                if !reaches {
                    offending_right.push(space.right_labels()[j].clone());
                }
            }
        }
    }
    let holds = (!fixed.left.is_empty() || !fixed.right.is_empty())
        && offending_left.is_empty()
        && offending_right.is_empty();
    WeaklyPicardReport {
        holds,
        fixed,
        offending_left,
        offending_right,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PicardContinuityReport {
    pub picard_continuous: bool,
    pub checked: usize,
    pub violations: Vec<(String, String)>,
    pub inconclusive: Vec<(String, String)>,
}

/// Exact Picard-continuity scan on a finite space: for every start pair
/// whose orbit distance settles to zero, the mapped orbit distance must
/// settle to zero as well. Starts whose orbit has not entered its cycle
/// within `horizon` steps are reported as inconclusive.
pub fn check_picard_continuity_finite(
    space: &FiniteBipolarSpace,
    map: &MappingSpec,
    horizon: usize,
) -> Result<PicardContinuityReport, PicardError> {
    if horizon < 1 {
        return Err(PicardError::BadHorizon);
    }
    map.check_against(space)?;
    let step = |x: usize| -> usize {
        match map.variance {
            Variance::Covariant => map.left_image(x),
            Variance::Contravariant => map.right_image(map.left_image(x)),
        }
    };
    let mut violations = Vec::new();
    let mut inconclusive = Vec::new();
    let mut checked = 0;
    for g in 0..space.n_left() {
        // orbit of g in the left set with entry index of its cycle
        let mut order = Vec::new();
        let mut position = HashMap::new();
        let mut x = g;
        let (tail_start, cycle_len) = loop {
            if let Some(&first) = position.get(&x) {
                break (first, order.len() - first);
            }
            position.insert(x, order.len());
            order.push(x);
            x = step(x);
        };
        let cycle = &order[tail_start..tail_start + cycle_len];
        for h in 0..space.n_right() {
            checked += 1;
            if tail_start > horizon {
                inconclusive.push((
                    space.left_labels()[g].clone(),
                    space.right_labels()[h].clone(),
                ));
                continue;
            }
            let orbit_converges = cycle.iter().all(|&p| space.dist_at(p, h) == 0.0);
            if orbit_converges {
                let mapped_converges = cycle.iter().all(|&p| match map.variance {
                    Variance::Covariant => {
                        space.dist_at(map.left_image(p), map.right_image(h)) == 0.0
                    }
                    Variance::Contravariant => {
                        space.dist_at(map.right_image(h), map.left_image(p)) == 0.0
                    }
                });
                if !mapped_converges {
                    violations.push((
                        space.left_labels()[g].clone(),
                        space.right_labels()[h].clone(),
                    ));
                }
            }
        }
    }
    Ok(PicardContinuityReport {
        picard_continuous: violations.is_empty(),
        checked,
        violations,
        inconclusive,
    })
}

/// A one-dimensional interval model with the standard metric `|e - f|`,
/// both poles sampled from the same interval.
#[derive(Debug, Clone, Copy)]
pub struct IntervalModel {
    pub lo: f64,
    pub hi: f64,
    pub step: fn(f64) -> f64,
}

/// Sampled Picard-continuity check on an interval model: starts and targets
/// are a uniform grid including both endpoints, orbits run to `horizon`, and
/// pairs whose orbit is still moving at the horizon without matching the
/// target are reported inconclusive rather than judged.
pub fn check_picard_continuity_interval(
    model: &IntervalModel,
    horizon: usize,
    tol: f64,
    samples: usize,
) -> Result<PicardContinuityReport, PicardError> {
    if horizon < 1 {
        return Err(PicardError::BadHorizon);
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(PicardError::BadTol(tol));
    }
    let grid: Vec<f64> = if samples <= 1 {
        vec![model.lo]
    } else {
        (0..samples)
            .map(|k| model.lo + (model.hi - model.lo) * k as f64 / (samples - 1) as f64)
            .collect()
    };
    let mut violations = Vec::new();
    let mut inconclusive = Vec::new();
    let mut checked = 0;
    for &g in &grid {
        let mut orbit = Vec::with_capacity(horizon + 2);
        orbit.push(g);
        for _ in 0..=horizon {
            let last = *orbit.last().expect("orbit non-empty");
            orbit.push((model.step)(last));
        }
        let settled = (orbit[horizon] - orbit[horizon - 1]).abs() <= tol;
        for &h in &grid {
            checked += 1;
            if (orbit[horizon] - h).abs() <= tol {
                let mapped = (orbit[horizon + 1] - (model.step)(h)).abs() <= tol;
                if !mapped {
                    violations.push((fmt17(g), fmt17(h)));
                }
            } else if !settled {
                inconclusive.push((fmt17(g), fmt17(h)));
            }
        }
    }
    Ok(PicardContinuityReport {
        picard_continuous: violations.is_empty(),
        checked,
        violations,
        inconclusive,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct UniquenessReport {
    pub certificate_valid: bool,
    pub fixed: FixedPoints,
    pub consistent: bool,
    pub diagnostic: Option<String>,
    pub summary: String,
}

/// Cross-checks a certificate against the enumerated fixed points: a holding
/// certificate with more than one fixed point per side is a theorem
/// violation and is reported as a diagnostic; without a holding certificate
/// only the counts are reported, with no claim.
pub fn uniqueness_check(
    space: &FiniteBipolarSpace,
    map: &MappingSpec,
    certificate: &ContractionCertificate,
) -> UniquenessReport {
    let fixed = all_fixed_points(space, map);
    let certificate_valid = certificate.holds;
    let (nl, nr) = (fixed.left.len(), fixed.right.len());
    if certificate_valid {
        if nl <= 1 && nr <= 1 {
            UniquenessReport {
                certificate_valid,
                consistent: true,
                diagnostic: None,
                summary: format!(
                    "certificate holds; fixed points unique ({nl} left, {nr} right)"
                ),
                fixed,
            }
        } else {
            let diagnostic = format!(
                "theorem violation: certificate holds but fixed points are not unique \
                 (left: {}; right: {})",
                fixed.left.join(", "),
                fixed.right.join(", ")
            );
            UniquenessReport {
                certificate_valid,
                consistent: false,
                diagnostic: Some(diagnostic),
                summary: format!(
                    "certificate holds but {nl} left / {nr} right fixed points found"
                ),
                fixed,
            }
        }
    } else {
        UniquenessReport {
            certificate_valid,
            consistent: true,
            diagnostic: None,
            summary: format!(
                "{nl} left fixed point(s), {nr} right fixed point(s); no uniqueness claim"
            ),
            fixed,
        }
    }
}
