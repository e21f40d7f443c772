//! Machine-checked reconstructions of the worked examples the rest of the
//! crate is exercised against, plus byte-stable golden renderings of their
//! computed reports.
//!
//! The five-point table case is reconstructed in the only reading consistent
//! with its reference columns: five-point left and right sets, the distance
//! zero exactly on the shared fixed point `(e1, f1)`, and one on every other
//! pair (equal indices included — the reference row `(3,5)` needs
//! `d(e4, f4) = 1`). The reference columns are reproduced verbatim; where
//! the candidate inequalities disagree with them, the golden files record
//! the computed values next to the reference values rather than resolving
//! the conflict.

use std::io;
use std::path::{Path, PathBuf};

use crate::contraction::{
    verify_pc, CoeffTable, CoefficientFamily, ContractionSpec, MappingSpec, Variance,
};
use crate::fmt17;
use crate::picard::{check_picard_continuity_interval, IntervalModel};
use crate::space::FiniteBipolarSpace;

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

/// Plain discrete metric on indices: distance one iff indices differ, equal
/// indices declared as the same point.
pub fn discrete_space(n: usize) -> FiniteBipolarSpace {
    let dist = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
        .collect();
    let overlap = (0..n).map(|i| (i, i)).collect();
    FiniteBipolarSpace::new(labels("e", n), labels("f", n), dist, overlap)
        .expect("discrete space construction is total")
}

/// The five-point example space: distance zero only on the shared point
/// `(e1, f1)`, one everywhere else.
pub fn example31_space() -> FiniteBipolarSpace {
    let dist = (0..5)
        .map(|i| {
            (0..5)
                .map(|j| if (i, j) == (0, 0) { 0.0 } else { 1.0 })
                .collect()
        })
        .collect();
    FiniteBipolarSpace::new(labels("e", 5), labels("f", 5), dist, vec![(0, 0)])
        .expect("example space construction is total")
}

/// The example self-map applied index-wise on both sides:
/// `1 -> 1, 2 -> 3, 3 -> 4, 4 -> 2, 5 -> 4`.
pub fn example31_map() -> MappingSpec {
    let table = vec![0, 2, 3, 1, 3];
    MappingSpec::new(Variance::Covariant, table.clone(), table)
}

/// The reference symmetric `q_0` table with zero diagonal.
pub fn example31_q0() -> Vec<Vec<f64>> {
    let mut table = vec![vec![0.0; 5]; 5];
    let mut set = |i: usize, j: usize, v: f64| {
        table[i - 1][j - 1] = v;
        table[j - 1][i - 1] = v;
    };
    set(1, 2, 4.0);
    set(2, 3, 4.0);
    set(1, 3, 3.0);
    set(3, 4, 3.0);
    set(2, 5, 5.0);
    set(3, 5, 5.0);
    set(1, 4, 2.0);
    set(1, 5, 1.0);
    set(2, 4, 7.0);
    set(4, 5, 8.0);
    table
}

/// The `q_0` values exposed as an auxiliary lookup table (no metric claims).
pub fn example31_aux_q0_space() -> FiniteBipolarSpace {
    FiniteBipolarSpace::new(labels("e", 5), labels("f", 5), example31_q0(), vec![])
        .expect("aux table construction is total")
}

/// One reference table row: pair indices (0-based) and the two reference
/// columns, `lhs = q0(Fe, Ff) + d(Fe, Ff)` and the unscaled
/// `q0(e, f) + d(e, f)`.
#[derive(Debug, Clone, Copy)]
pub struct ReferenceRow {
    pub left: usize,
    pub right: usize,
    pub lhs: f64,
    pub rhs_unscaled: f64,
}

pub struct PcTableCase {
    pub space: FiniteBipolarSpace,
    pub aux_q0: FiniteBipolarSpace,
    pub map: MappingSpec,
    pub coeffs: CoefficientFamily,
    pub spec: ContractionSpec,
    pub reference_rows: Vec<ReferenceRow>,
}

/// The full five-point polynomial-contraction case: degree 1, `q1 == 1`,
/// `q0` per the reference list, `pi = 1/2`, `rho = 1`, `Q = 1`.
pub fn example_pc_table() -> PcTableCase {
    let coeffs = CoefficientFamily::new(
        1,
        vec![CoeffTable::Table(example31_q0()), CoeffTable::Constant(1.0)],
    )
    .expect("example coefficients are well-formed");
    let spec = ContractionSpec::new(1, 0.5, 1, 1.0, None, None)
        .expect("example spec is well-formed");
    let rows = [
        (1, 2, 4.0, 5.0),
        (1, 3, 3.0, 4.0),
        (1, 4, 5.0, 3.0),
        (1, 5, 3.0, 2.0),
        (2, 3, 4.0, 5.0),
        (2, 4, 5.0, 8.0),
        (2, 5, 4.0, 6.0),
        (3, 4, 8.0, 4.0),
        (3, 5, 1.0, 6.0),
        (4, 5, 8.0, 9.0),
    ];
    PcTableCase {
        space: example31_space(),
        aux_q0: example31_aux_q0_space(),
        map: example31_map(),
        coeffs,
        spec,
        reference_rows: rows
            .iter()
            .map(|&(i, j, lhs, rhs)| ReferenceRow {
                left: i - 1,
                right: j - 1,
                lhs,
                rhs_unscaled: rhs,
            })
            .collect(),
    }
}

/// One row of the non-expansive case table: the pair labels,
/// both metrics, and both image distances (the map is constant, so the
/// images are always zero).
#[derive(Debug, Clone)]
pub struct NonExpRow {
    pub pair: (&'static str, &'static str),
    pub d1: f64,
    pub d2: f64,
    pub image_d1: f64,
    pub image_d2: f64,
}

pub struct NonExpansiveCase {
    /// Cross-pair space under the symbol-discrete metric (all ones).
    pub theta1: FiniteBipolarSpace,
    /// Cross-pair space under the two-valued metric (all twos).
    pub theta2: FiniteBipolarSpace,
    pub table: Vec<NonExpRow>,
    /// The same map on the literal sets `{e1, e2}` / `{e1, f2}` (shared
    /// `e1`), usable with the covariant almost-contraction verifier.
    pub almost_space: FiniteBipolarSpace,
    pub almost_map: MappingSpec,
    pub almost_coeffs: CoefficientFamily,
    pub almost_spec: ContractionSpec,
}

/// The two-plus-two-point non-expansive example: everything maps to `e1`,
/// two metrics tabulated over the four reference pairs.
pub fn example_nonexpansive() -> NonExpansiveCase {
    let theta1 = FiniteBipolarSpace::new(
        labels("e", 2),
        labels("f", 2),
        vec![vec![1.0, 1.0], vec![1.0, 1.0]],
        vec![],
    )
    .expect("theta1 space construction is total");
    let theta2 = FiniteBipolarSpace::new(
        labels("e", 2),
        labels("f", 2),
        vec![vec![2.0, 2.0], vec![2.0, 2.0]],
        vec![],
    )
    .expect("theta2 space construction is total");
    let table = vec![
        NonExpRow {
            pair: ("e1", "e2"),
            d1: 1.0,
            d2: 1.0,
            image_d1: 0.0,
            image_d2: 0.0,
        },
        NonExpRow {
            pair: ("e1", "f1"),
            d1: 1.0,
            d2: 2.0,
            image_d1: 0.0,
            image_d2: 0.0,
        },
        NonExpRow {
            pair: ("e2", "f2"),
            d1: 1.0,
            d2: 2.0,
            image_d1: 0.0,
            image_d2: 0.0,
        },
        NonExpRow {
            pair: ("f1", "f2"),
            d1: 1.0,
            d2: 1.0,
            image_d1: 0.0,
            image_d2: 0.0,
        },
    ];
    // left {e1, e2}, right {e1, f2}: e1 shared, constant map to it
    let almost_space = FiniteBipolarSpace::new(
        vec!["e1".into(), "e2".into()],
        vec!["e1".into(), "f2".into()],
        vec![vec![0.0, 1.0], vec![1.0, 1.0]],
        vec![(0, 0)],
    )
    .expect("shared-point space construction is total");
    let almost_map = MappingSpec::new(Variance::Covariant, vec![0, 0], vec![0, 0]);
    let almost_coeffs =
        CoefficientFamily::constants(&[0.0, 1.0]).expect("constant family is well-formed");
    let almost_spec = ContractionSpec::new(1, 0.5, 1, 1.0, None, Some(vec![10.0, 10.0]))
        .expect("almost spec is well-formed");
    NonExpansiveCase {
        theta1,
        theta2,
        table,
        almost_space,
        almost_map,
        almost_coeffs,
        almost_spec,
    }
}

fn interval_step(x: f64) -> f64 {
    // F e = q on [q, w), (q + w)/3 at w, with q = 0, w = 1
    if x < 1.0 {
        0.0
    } else {
        1.0 / 3.0
    }
}

pub struct IntervalPicardCase {
    pub model: IntervalModel,
    pub lo: f64,
    pub hi: f64,
}

/// The interval example on `[0, 1]`: constant `0` on `[0, 1)`, `1/3` at `1`.
/// Discontinuous at the right endpoint yet Picard-continuous, with every
/// orbit collapsing to `0` within three steps.
pub fn example_interval_picard() -> IntervalPicardCase {
    IntervalPicardCase {
        model: IntervalModel {
            lo: 0.0,
            hi: 1.0,
            step: interval_step,
        },
        lo: 0.0,
        hi: 1.0,
    }
}

/// Orbit of the interval map from `start`, `steps + 1` values.
pub fn interval_orbit(case: &IntervalPicardCase, start: f64, steps: usize) -> Vec<f64> {
    let mut orbit = Vec::with_capacity(steps + 1);
    orbit.push(start);
    for _ in 0..steps {
        let last = *orbit.last().expect("orbit non-empty");
        orbit.push((case.model.step)(last));
    }
    orbit
}

fn render_pc_table() -> String {
    let case = example_pc_table();
    let cert = verify_pc(&case.space, &case.map, &case.coeffs, &case.spec)
        .expect("example instance evaluates");
    let label = |i: usize, j: usize| {
        format!(
            "({},{})",
            case.space.left_labels()[i],
            case.space.right_labels()[j]
        )
    };
    let mut out = String::new();
    out.push_str("example_pc_table\n");
    out.push_str("reference columns (pair, lhs, unscaled rhs):\n");
    for row in &case.reference_rows {
        let computed = cert
            .rows
            .iter()
            .find(|r| (r.left, r.right) == (row.left, row.right))
            .expect("certificate covers all pairs");
        out.push_str(&format!(
            "{} {} {}\n",
            label(row.left, row.right),
            fmt17(computed.lhs),
            fmt17(computed.rhs_unscaled),
        ));
    }
    out.push_str("zero-term-scaled reading violations (pair, lhs, rhs):\n");
    for row in &case.reference_rows {
        let computed = cert
            .rows
            .iter()
            .find(|r| (r.left, r.right) == (row.left, row.right))
            .expect("certificate covers all pairs");
        if computed.lhs > computed.rhs_zero_scaled {
            out.push_str(&format!(
                "{} {} {}\n",
                label(row.left, row.right),
                fmt17(computed.lhs),
                fmt17(computed.rhs_zero_scaled),
            ));
        }
    }
    out.push_str(&format!(
        "definition reading holds: {}\n",
        cert.holds
    ));
    out.push_str(&format!(
        "violations under definition reading: {}\n",
        cert.violations.len()
    ));
    out
}

fn render_nonexpansive() -> String {
    let case = example_nonexpansive();
    let mut out = String::new();
    out.push_str("example_nonexpansive\n");
    out.push_str("rows (pair, d1, d2, image d1, image d2):\n");
    let mut non_expansive = true;
    for row in &case.table {
        non_expansive &= row.image_d1 <= row.d1 && row.image_d2 <= row.d2;
        out.push_str(&format!(
            "({},{}) {} {} {} {}\n",
            row.pair.0,
            row.pair.1,
            fmt17(row.d1),
            fmt17(row.d2),
            fmt17(row.image_d1),
            fmt17(row.image_d2),
        ));
    }
    out.push_str(&format!("non-expansive under both metrics: {non_expansive}\n"));
    out
}

fn render_interval_picard() -> String {
    let case = example_interval_picard();
    let mut out = String::new();
    out.push_str("example_interval_picard\n");
    for start in [1.0, 0.7] {
        let orbit = interval_orbit(&case, start, 3);
        let rendered: Vec<String> = orbit.iter().map(|&x| fmt17(x)).collect();
        out.push_str(&format!("orbit from {}: {}\n", fmt17(start), rendered.join(" -> ")));
    }
    let report = check_picard_continuity_interval(&case.model, 8, 1e-9, 41)
        .expect("interval scan parameters are valid");
    out.push_str(&format!("picard-continuous: {}\n", report.picard_continuous));
    out.push_str(&format!(
        "inconclusive entries at horizon 8: {}\n",
        report.inconclusive.len()
    ));
    // classical discontinuity at the right endpoint: the left-limit differs
    // from the image of the endpoint
    let left_limit = (case.model.step)(1.0 - 1e-9);
    let at_end = (case.model.step)(1.0);
    out.push_str(&format!(
        "left-limit at 1: {}, image of 1: {}, gap: {}\n",
        fmt17(left_limit),
        fmt17(at_end),
        fmt17((at_end - left_limit).abs())
    ));
    out
}

pub struct CorpusCase {
    pub name: &'static str,
    pub render: fn() -> String,
}

/// All corpus cases with their golden renderers, in file order.
pub fn cases() -> Vec<CorpusCase> {
    vec![
        CorpusCase {
            name: "example_pc_table",
            render: render_pc_table,
        },
        CorpusCase {
            name: "example_nonexpansive",
            render: render_nonexpansive,
        },
        CorpusCase {
            name: "example_interval_picard",
            render: render_interval_picard,
        },
    ]
}

/// Regenerates every golden file under `dir`, returning the written paths.
pub fn regen_goldens(dir: &Path) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for case in cases() {
        let path = dir.join(format!("{}.golden.txt", case.name));
        std::fs::write(&path, (case.render)())?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contraction::verify_almost_pc;
    use crate::space::check_axioms;

    #[test]
    fn every_corpus_space_passes_the_axioms() {
        for space in [
            discrete_space(5),
            example31_space(),
            example_nonexpansive().theta1,
            example_nonexpansive().theta2,
            example_nonexpansive().almost_space,
        ] {
            let report = check_axioms(&space);
            assert!(report.all_ok(), "violations: {:?}", report.violations);
        }
    }

    #[test]
    fn aux_q0_lookup_matches_reference_values() {
        let aux = example31_aux_q0_space();
        assert_eq!(aux.distance("e2", "f4").unwrap(), 7.0);
        assert_eq!(aux.distance("e4", "f2").unwrap(), 7.0);
        assert_eq!(aux.distance("e1", "f5").unwrap(), 1.0);
        assert_eq!(aux.distance("e3", "f3").unwrap(), 0.0);
    }

    #[test]
    fn reference_columns_are_reproduced_for_all_ten_rows() {
        let case = example_pc_table();
        let cert = verify_pc(&case.space, &case.map, &case.coeffs, &case.spec).unwrap();
        for row in &case.reference_rows {
            let computed = cert
                .rows
                .iter()
                .find(|r| (r.left, r.right) == (row.left, row.right))
                .unwrap();
            assert_eq!(
                computed.lhs, row.lhs,
                "lhs mismatch at ({}, {})",
                row.left, row.right
            );
            assert_eq!(
                computed.rhs_unscaled, row.rhs_unscaled,
                "unscaled rhs mismatch at ({}, {})",
                row.left, row.right
            );
        }
    }

    #[test]
    fn nonexpansive_table_scan_holds_and_almost_instance_verifies() {
        let case = example_nonexpansive();
        for row in &case.table {
            assert!(row.image_d1 <= row.d1);
            assert!(row.image_d2 <= row.d2);
            assert_eq!(row.image_d1, 0.0);
            assert_eq!(row.image_d2, 0.0);
        }
        let cert = verify_almost_pc(
            &case.almost_space,
            &case.almost_map,
            &case.almost_coeffs,
            &case.almost_spec,
        )
        .unwrap();
        assert!(cert.holds);
        // the constant map sends every pair to the shared point: lhs rows 0
        for row in &cert.rows {
            assert_eq!(row.lhs, 0.0);
        }
    }

    #[test]
    fn interval_orbits_collapse_and_are_picard_continuous() {
        let case = example_interval_picard();
        let orbit = interval_orbit(&case, 1.0, 3);
        assert_eq!(orbit, vec![1.0, 1.0 / 3.0, 0.0, 0.0]);
        let orbit = interval_orbit(&case, 0.7, 2);
        assert_eq!(orbit, vec![0.7, 0.0, 0.0]);
        // settles to q from every sampled start within three steps
        for k in 0..=20 {
            let start = k as f64 / 20.0;
            let orbit = interval_orbit(&case, start, 5);
            assert_eq!(orbit[3], 0.0);
            assert_eq!(orbit[5], 0.0);
        }
        let report = check_picard_continuity_interval(&case.model, 8, 1e-9, 41).unwrap();
        assert!(report.picard_continuous);
        assert!(report.inconclusive.is_empty());
    }

    #[test]
    fn truncated_horizon_reports_inconclusive_entries() {
        let case = example_interval_picard();
        // horizon 1: the orbit from 1.0 is still moving (1 -> 1/3), so pairs
        // against it are inconclusive rather than judged
        let report = check_picard_continuity_interval(&case.model, 1, 1e-9, 41).unwrap();
        assert!(!report.inconclusive.is_empty());
    }

    #[test]
    fn golden_rendering_is_stable_across_runs() {
        for case in cases() {
            let a = (case.render)();
            let b = (case.render)();
            assert_eq!(a, b, "rendering of {} is unstable", case.name);
            assert!(!a.is_empty());
        }
    }
}
