//! Exhaustive certification of polynomial-type contraction inequalities on
//! finite bipolar spaces.
//!
//! A mapping `F` is certified against the inequality
//!
//! ```text
//! sum_{u=0..s} q_u(Fe, Ff) d^u(Fe, Ff)  <=  pi * sum_{u=0..s} q_u(e, f) d^u(e, f)
//! ```
//!
//! over every pair `(e, f)` of the space (the almost variant enlarges the
//! right side by `pi * sum q_u(e,f) * H_u * d^u(Fe, f)`). Hand-worked tables
//! for this inequality family are often ambiguous about where the factor
//! `pi` applies, so each certificate row also records the unscaled
//! right-hand sum and the reading that scales only the degree-0 term; the
//! tool arbitrates between the candidate inequalities instead of guessing.

use serde::Serialize;
use thiserror::Error;

use crate::space::FiniteBipolarSpace;
use crate::DEFAULT_TOL;

#[derive(Debug, Error)]
pub enum ContractionError {
    #[error("coefficient family needs degree >= 1, got {0}")]
    BadDegree(usize),
    #[error("coefficient family declares degree {degree} but has {got} tables (need degree+1)")]
    TableCount { degree: usize, got: usize },
    #[error("q_{upsilon}[{row}][{col}] = {value} is not a finite non-negative real")]
    BadCoefficient {
        upsilon: usize,
        row: usize,
        col: usize,
        value: f64,
    },
    #[error("q_{upsilon} table is {rows}x{cols}, space is {nl}x{nr}")]
    DimensionMismatch {
        upsilon: usize,
        rows: usize,
        cols: usize,
        nl: usize,
        nr: usize,
    },
    #[error("pi must lie in (0,1), got {0}")]
    BadPi(f64),
    #[error("rho_index must lie in 1..=degree ({degree}), got {got}")]
    BadRhoIndex { degree: usize, got: usize },
    #[error("Q lower bound must be > 0, got {0}")]
    BadLowerBound(f64),
    #[error("W upper bounds must have one entry per degree 1..={expected}, got {got}")]
    BadUpperBounds { expected: usize, got: usize },
    #[error("W_{upsilon} must be > 0, got {value}")]
    BadUpperBound { upsilon: usize, value: f64 },
    #[error("H almost-terms must have one entry per degree 0..={expected}, got {got}")]
    BadAlmostTerms { expected: usize, got: usize },
    #[error("H_{upsilon} must be >= 0 and finite, got {value}")]
    BadAlmostTerm { upsilon: usize, value: f64 },
    #[error("{side} map has {got} entries, expected {expected}")]
    MapLength {
        side: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{side} map image {image} at position {pos} is outside the target set (size {target})")]
    MapImageOutOfRange {
        side: &'static str,
        pos: usize,
        image: usize,
        target: usize,
    },
    #[error("almost contraction requires almost_terms (H) in the spec")]
    MissingAlmostTerms,
    #[error("the almost mixed term d(f, Fe) is only evaluable for covariant maps")]
    AlmostContravariant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variance {
    /// left -> left, right -> right
    Covariant,
    /// left -> right, right -> left
    Contravariant,
}

/// A self-map of the union given as index lookup tables over both sides.
#[derive(Debug, Clone)]
pub struct MappingSpec {
    pub variance: Variance,
    left_map: Vec<usize>,
    right_map: Vec<usize>,
}

impl MappingSpec {
    pub fn new(variance: Variance, left_map: Vec<usize>, right_map: Vec<usize>) -> Self {
        MappingSpec {
            variance,
            left_map,
            right_map,
        }
    }

    pub fn left_image(&self, i: usize) -> usize {
        self.left_map[i]
    }

    pub fn right_image(&self, j: usize) -> usize {
        self.right_map[j]
    }

    pub fn left_map(&self) -> &[usize] {
        &self.left_map
    }

    pub fn right_map(&self) -> &[usize] {
        &self.right_map
    }

    /// Totality and image-range validation against a concrete space.
    pub fn check_against(&self, space: &FiniteBipolarSpace) -> Result<(), ContractionError> {
        let (nl, nr) = (space.n_left(), space.n_right());
        if self.left_map.len() != nl {
            return Err(ContractionError::MapLength {
                side: "left",
                expected: nl,
                got: self.left_map.len(),
            });
        }
        if self.right_map.len() != nr {
            return Err(ContractionError::MapLength {
                side: "right",
                expected: nr,
                got: self.right_map.len(),
            });
        }
        let (left_target, right_target) = match self.variance {
            Variance::Covariant => (nl, nr),
            Variance::Contravariant => (nr, nl),
        };
        for (pos, &image) in self.left_map.iter().enumerate() {
            if image >= left_target {
                return Err(ContractionError::MapImageOutOfRange {
                    side: "left",
                    pos,
                    image,
                    target: left_target,
                });
            }
        }
        for (pos, &image) in self.right_map.iter().enumerate() {
            if image >= right_target {
                return Err(ContractionError::MapImageOutOfRange {
                    side: "right",
                    pos,
                    image,
                    target: right_target,
                });
            }
        }
        Ok(())
    }
}

/// One coefficient function `q_u`, either constant over all pairs or a dense
/// table aligned with the space.
#[derive(Debug, Clone)]
pub enum CoeffTable {
    Constant(f64),
    Table(Vec<Vec<f64>>),
}

impl CoeffTable {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        match self {
            CoeffTable::Constant(c) => *c,
            CoeffTable::Table(rows) => rows[i][j],
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, CoeffTable::Constant(_))
    }
}

/// The family `q_0 .. q_sigma` of coefficient functions.
#[derive(Debug, Clone)]
pub struct CoefficientFamily {
    degree: usize,
    tables: Vec<CoeffTable>,
}

impl CoefficientFamily {
    pub fn new(degree: usize, tables: Vec<CoeffTable>) -> Result<Self, ContractionError> {
        if degree < 1 {
            return Err(ContractionError::BadDegree(degree));
        }
        if tables.len() != degree + 1 {
            return Err(ContractionError::TableCount {
                degree,
                got: tables.len(),
            });
        }
        for (upsilon, table) in tables.iter().enumerate() {
            match table {
                CoeffTable::Constant(c) => {
                    if !c.is_finite() || *c < 0.0 {
                        return Err(ContractionError::BadCoefficient {
                            upsilon,
                            row: 0,
                            col: 0,
                            value: *c,
                        });
                    }
                }
                CoeffTable::Table(rows) => {
                    for (row, entries) in rows.iter().enumerate() {
                        for (col, &value) in entries.iter().enumerate() {
                            if !value.is_finite() || value < 0.0 {
                                return Err(ContractionError::BadCoefficient {
                                    upsilon,
                                    row,
                                    col,
                                    value,
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(CoefficientFamily { degree, tables })
    }

    /// Constant family from plain scalars `q_0 .. q_sigma`.
    pub fn constants(values: &[f64]) -> Result<Self, ContractionError> {
        let degree = values.len().saturating_sub(1);
        Self::new(
            degree,
            values.iter().map(|&c| CoeffTable::Constant(c)).collect(),
        )
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn table(&self, upsilon: usize) -> &CoeffTable {
        &self.tables[upsilon]
    }

    pub fn value(&self, upsilon: usize, i: usize, j: usize) -> f64 {
        self.tables[upsilon].value(i, j)
    }

    pub fn check_dims(&self, space: &FiniteBipolarSpace) -> Result<(), ContractionError> {
        for (upsilon, table) in self.tables.iter().enumerate() {
            if let CoeffTable::Table(rows) = table {
                let cols = rows.first().map(|r| r.len()).unwrap_or(0);
                if rows.len() != space.n_left()
                    || rows.iter().any(|r| r.len() != space.n_right())
                {
                    return Err(ContractionError::DimensionMismatch {
                        upsilon,
                        rows: rows.len(),
                        cols,
                        nl: space.n_left(),
                        nr: space.n_right(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Scalar side of a contraction hypothesis: the constant `pi`, the index
/// `rho` whose coefficient is bounded below by `Q`, optional per-degree upper
/// bounds `W` (continuity bundle), and optional almost-terms `H`.
#[derive(Debug, Clone)]
pub struct ContractionSpec {
    pub pi: f64,
    /// 1-based polynomial degree whose coefficient carries the lower bound.
    pub rho_index: usize,
    /// The declared lower bound `Q_rho > 0`.
    pub q_lower: f64,
    /// `W_u` for `u = 1..=degree`, when provided.
    pub upper_bounds: Option<Vec<f64>>,
    /// `H_u` for `u = 0..=degree`, when provided (almost contractions).
    pub almost_terms: Option<Vec<f64>>,
}

impl ContractionSpec {
    pub fn new(
        degree: usize,
        pi: f64,
        rho_index: usize,
        q_lower: f64,
        upper_bounds: Option<Vec<f64>>,
        almost_terms: Option<Vec<f64>>,
    ) -> Result<Self, ContractionError> {
        if pi.is_nan() || pi <= 0.0 || pi >= 1.0 {
            return Err(ContractionError::BadPi(pi));
        }
        if rho_index < 1 || rho_index > degree {
            return Err(ContractionError::BadRhoIndex {
                degree,
                got: rho_index,
            });
        }
        if !q_lower.is_finite() || q_lower <= 0.0 {
            return Err(ContractionError::BadLowerBound(q_lower));
        }
        if let Some(w) = &upper_bounds {
            if w.len() != degree {
                return Err(ContractionError::BadUpperBounds {
                    expected: degree,
                    got: w.len(),
                });
            }
            for (k, &value) in w.iter().enumerate() {
                if !value.is_finite() || value <= 0.0 {
                    return Err(ContractionError::BadUpperBound {
                        upsilon: k + 1,
                        value,
                    });
                }
            }
        }
        if let Some(h) = &almost_terms {
            if h.len() != degree + 1 {
                return Err(ContractionError::BadAlmostTerms {
                    expected: degree,
                    got: h.len(),
                });
            }
            for (upsilon, &value) in h.iter().enumerate() {
                if !value.is_finite() || value < 0.0 {
                    return Err(ContractionError::BadAlmostTerm { upsilon, value });
                }
            }
        }
        Ok(ContractionSpec {
            pi,
            rho_index,
            q_lower,
            upper_bounds,
            almost_terms,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    Pc,
    AlmostPc,
}

/// Per-pair evaluation of the inequality. `rhs` is the reading that decides
/// `holds`; `rhs_unscaled` and `rhs_zero_scaled` are the two alternative
/// readings kept for arbitration (see module docs).
#[derive(Debug, Clone, Serialize)]
pub struct CertificateRow {
    pub left: usize,
    pub right: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub rhs_unscaled: f64,
    pub rhs_zero_scaled: f64,
    pub slack: f64,
}

/// Outcome of the `q_0 == 0` / `q_rho >= Q` / `q_u <= W_u` scans. Witnesses
/// are `(upsilon, left, right, value)` of the first offending entry in
/// row-major order.
#[derive(Debug, Clone, Serialize)]
pub struct SideConditionReport {
    pub q0_is_zero: bool,
    pub q0_witness: Option<(usize, usize, f64)>,
    pub lower_ok: bool,
    pub lower_witness: Option<(usize, usize, f64)>,
    /// `None` when no upper bounds were declared.
    pub upper_ok: Option<bool>,
    pub upper_witness: Option<(usize, usize, usize, f64)>,
}

impl SideConditionReport {
    /// All conditions that were actually declared pass.
    pub fn declared_pass(&self) -> bool {
        self.lower_ok && self.upper_ok.unwrap_or(true)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractionCertificate {
    pub kind: CertificateKind,
    pub holds: bool,
    pub rows: Vec<CertificateRow>,
    /// `(left, right)` index pairs whose slack is below `-tol`.
    pub violations: Vec<(usize, usize)>,
    pub side_conditions: SideConditionReport,
    pub tol: f64,
}

/// Scans the coefficient family against the declared side conditions. This
/// needs no space: constants are checked directly and tables entry-by-entry.
pub fn check_side_conditions(
    coeffs: &CoefficientFamily,
    spec: &ContractionSpec,
) -> SideConditionReport {
    let scan_violating = |table: &CoeffTable, bad: &dyn Fn(f64) -> bool| match table {
        CoeffTable::Constant(c) => {
            if bad(*c) {
                Some((0, 0, *c))
            } else {
                None
            }
        }
        CoeffTable::Table(rows) => {
            for (i, row) in rows.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    if bad(v) {
                        return Some((i, j, v));
                    }
                }
            }
            None
        }
    };

    let q0_witness = scan_violating(coeffs.table(0), &|v| v != 0.0);
    let lower_witness = scan_violating(coeffs.table(spec.rho_index), &|v| v < spec.q_lower);

    let (upper_ok, upper_witness) = match &spec.upper_bounds {
        None => (None, None),
        Some(bounds) => {
            let mut witness = None;
            for upsilon in 1..=coeffs.degree() {
                let w = bounds[upsilon - 1];
                if let Some((i, j, v)) = scan_violating(coeffs.table(upsilon), &|v| v > w) {
                    witness = Some((upsilon, i, j, v));
                    break;
                }
            }
            (Some(witness.is_none()), witness)
        }
    };

    SideConditionReport {
        q0_is_zero: q0_witness.is_none(),
        q0_witness,
        lower_ok: lower_witness.is_none(),
        lower_witness,
        upper_ok,
        upper_witness,
    }
}

/// The continuity hypothesis bundle: the inequality holds, `q_0 == 0`, upper
/// bounds are declared and satisfied, and the lower bound is satisfied. The
/// flag feeds the Picard engine's mode selection.
pub fn implied_continuity(cert: &ContractionCertificate, side: &SideConditionReport) -> bool {
    cert.holds && side.q0_is_zero && side.upper_ok == Some(true) && side.lower_ok
}

fn poly_sum(coeffs: &CoefficientFamily, i: usize, j: usize, d: f64) -> f64 {
    // d^0 is 1 even when d == 0, so the upsilon=0 term is exactly q_0(e,f)
    (0..=coeffs.degree())
        .map(|upsilon| coeffs.value(upsilon, i, j) * d.powi(upsilon as i32))
        .sum()
}

fn evaluate(
    space: &FiniteBipolarSpace,
    map: &MappingSpec,
    coeffs: &CoefficientFamily,
    spec: &ContractionSpec,
    kind: CertificateKind,
    tol: f64,
) -> Result<ContractionCertificate, ContractionError> {
    map.check_against(space)?;
    coeffs.check_dims(space)?;
    let almost = match kind {
        CertificateKind::Pc => None,
        CertificateKind::AlmostPc => {
            if map.variance == Variance::Contravariant {
                return Err(ContractionError::AlmostContravariant);
            }
            Some(
                spec.almost_terms
                    .as_ref()
                    .ok_or(ContractionError::MissingAlmostTerms)?,
            )
        }
    };

    let mut rows = Vec::with_capacity(space.n_left() * space.n_right());
    let mut violations = Vec::new();
    for i in 0..space.n_left() {
        for j in 0..space.n_right() {
            // image pair evaluable in left x right order
            let (img_l, img_r) = match map.variance {
                Variance::Covariant => (map.left_image(i), map.right_image(j)),
                // Fe lands right, Ff lands left: the evaluable pair is (Ff, Fe)
                Variance::Contravariant => (map.right_image(j), map.left_image(i)),
            };
            let d_img = space.dist_at(img_l, img_r);
            let lhs = poly_sum(coeffs, img_l, img_r, d_img);

            let d = space.dist_at(i, j);
            let rhs_unscaled = poly_sum(coeffs, i, j, d);
            let mut rhs = spec.pi * rhs_unscaled;
            if let Some(h) = almost {
                // mixed term d(f, Fe), evaluated as d(Fe, f)
                let d_mixed = space.dist_at(map.left_image(i), j);
                let almost_sum: f64 = (0..=coeffs.degree())
                    .map(|upsilon| {
                        coeffs.value(upsilon, i, j) * h[upsilon] * d_mixed.powi(upsilon as i32)
                    })
                    .sum();
                rhs += spec.pi * almost_sum;
            }
            let rhs_zero_scaled = spec.pi * coeffs.value(0, i, j)
                + (1..=coeffs.degree())
                    .map(|upsilon| coeffs.value(upsilon, i, j) * d.powi(upsilon as i32))
                    .sum::<f64>();

            let slack = rhs - lhs;
            if slack < -tol {
                violations.push((i, j));
            }
            rows.push(CertificateRow {
                left: i,
                right: j,
                lhs,
                rhs,
                rhs_unscaled,
                rhs_zero_scaled,
                slack,
            });
        }
    }

    let side_conditions = check_side_conditions(coeffs, spec);
    let holds = violations.is_empty() && side_conditions.declared_pass();
    Ok(ContractionCertificate {
        kind,
        holds,
        rows,
        violations,
        side_conditions,
        tol,
    })
}

/// Certifies the polynomial contraction inequality over every pair of the
/// space, in row-major input order.
pub fn verify_pc(
    space: &FiniteBipolarSpace,
    map: &MappingSpec,
    coeffs: &CoefficientFamily,
    spec: &ContractionSpec,
) -> Result<ContractionCertificate, ContractionError> {
    verify_pc_with_tol(space, map, coeffs, spec, DEFAULT_TOL)
}

pub fn verify_pc_with_tol(
    space: &FiniteBipolarSpace,
    map: &MappingSpec,
    coeffs: &CoefficientFamily,
    spec: &ContractionSpec,
    tol: f64,
) -> Result<ContractionCertificate, ContractionError> {
    evaluate(space, map, coeffs, spec, CertificateKind::Pc, tol)
}

/// Certifies the almost variant: the right side gains the mixed terms
/// `pi * q_u(e,f) * H_u * d^u(Fe, f)`. Covariant maps only.
pub fn verify_almost_pc(
    space: &FiniteBipolarSpace,
    map: &MappingSpec,
    coeffs: &CoefficientFamily,
    spec: &ContractionSpec,
) -> Result<ContractionCertificate, ContractionError> {
    evaluate(space, map, coeffs, spec, CertificateKind::AlmostPc, DEFAULT_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn example_table_rows_match_reference_columns() {
        let case = corpus::example_pc_table();
        let cert = verify_pc(&case.space, &case.map, &case.coeffs, &case.spec).unwrap();
        // row (e1, f2): LHS 4, unscaled column 5
        let row = cert
            .rows
            .iter()
            .find(|r| (r.left, r.right) == (0, 1))
            .unwrap();
        assert_eq!(row.lhs, 4.0);
        assert_eq!(row.rhs_unscaled, 5.0);
        // against the zero-term-scaled reading: rhs = 0.5*4 + 1 = 3, slack -1
        assert_eq!(row.rhs_zero_scaled, 3.0);
        assert_eq!(row.rhs_zero_scaled - row.lhs, -1.0);
        // (3,4): 8 vs 4 unscaled, 2.5 zero-scaled
        let row = cert
            .rows
            .iter()
            .find(|r| (r.left, r.right) == (2, 3))
            .unwrap();
        assert_eq!(row.lhs, 8.0);
        assert_eq!(row.rhs_unscaled, 4.0);
        assert_eq!(row.rhs_zero_scaled, 2.5);
        assert!(!cert.holds);
    }

    #[test]
    fn identity_map_is_not_a_contraction_on_discrete_space() {
        let space = corpus::example31_space();
        let n = space.n_left();
        let map = MappingSpec::new(
            Variance::Covariant,
            (0..n).collect(),
            (0..n).collect(),
        );
        let coeffs = CoefficientFamily::constants(&[0.0, 1.0]).unwrap();
        let spec = ContractionSpec::new(1, 0.5, 1, 1.0, None, None).unwrap();
        let cert = verify_pc(&space, &map, &coeffs, &spec).unwrap();
        assert!(!cert.holds);
        // rows with zero distance hold; rows with d = 1 have slack 0.5-1 < 0
        for row in &cert.rows {
            let d = space.dist_at(row.left, row.right);
            if d == 0.0 {
                assert!(row.slack >= 0.0);
            } else {
                assert!(row.slack < 0.0);
            }
        }
    }

    #[test]
    fn almost_pc_contains_pc_and_degenerate_space_holds() {
        // any PC-holding instance also passes the almost variant
        let space = corpus::discrete_space(3);
        let map = MappingSpec::new(Variance::Covariant, vec![0, 0, 0], vec![0, 0, 0]);
        let coeffs = CoefficientFamily::constants(&[0.0, 1.0]).unwrap();
        let spec = ContractionSpec::new(1, 0.5, 1, 1.0, None, Some(vec![1.0, 1.0])).unwrap();
        let pc = verify_pc(&space, &map, &coeffs, &spec).unwrap();
        assert!(pc.holds);
        let almost = verify_almost_pc(&space, &map, &coeffs, &spec).unwrap();
        assert!(almost.holds);
        for (a, b) in pc.rows.iter().zip(almost.rows.iter()) {
            assert!(b.rhs >= a.rhs);
        }

        let one = FiniteBipolarSpace::new(
            vec!["p".into()],
            vec!["p".into()],
            vec![vec![0.0]],
            vec![(0, 0)],
        )
        .unwrap();
        let map = MappingSpec::new(Variance::Covariant, vec![0], vec![0]);
        let spec = ContractionSpec::new(1, 0.5, 1, 1.0, None, Some(vec![2.0, 2.0])).unwrap();
        let cert = verify_almost_pc(&one, &map, &coeffs, &spec).unwrap();
        assert!(cert.holds);
        assert!(cert.rows.iter().all(|r| r.slack >= 0.0));
    }

    #[test]
    fn almost_pc_with_zero_h_equals_pc_rows() {
        let space = corpus::example31_space();
        let case = corpus::example_pc_table();
        let spec_zero_h = ContractionSpec::new(1, 0.5, 1, 1.0, None, Some(vec![0.0, 0.0])).unwrap();
        let pc = verify_pc(&space, &case.map, &case.coeffs, &case.spec).unwrap();
        let almost = verify_almost_pc(&space, &case.map, &case.coeffs, &spec_zero_h).unwrap();
        for (a, b) in pc.rows.iter().zip(almost.rows.iter()) {
            assert_eq!(a.rhs.to_bits(), b.rhs.to_bits());
            assert_eq!(a.slack.to_bits(), b.slack.to_bits());
        }
    }

    #[test]
    fn almost_pc_rejects_contravariant_maps() {
        let space = corpus::discrete_space(2);
        let map = MappingSpec::new(Variance::Contravariant, vec![0, 0], vec![0, 0]);
        let coeffs = CoefficientFamily::constants(&[0.0, 1.0]).unwrap();
        let spec = ContractionSpec::new(1, 0.5, 1, 1.0, None, Some(vec![1.0, 1.0])).unwrap();
        assert!(matches!(
            verify_almost_pc(&space, &map, &coeffs, &spec),
            Err(ContractionError::AlmostContravariant)
        ));
    }

    #[test]
    fn side_conditions_on_example_coefficients() {
        let case = corpus::example_pc_table();
        let side = check_side_conditions(&case.coeffs, &case.spec);
        // q1 == 1 >= Q = 1 passes
        assert!(side.lower_ok);
        // q0 is not identically zero; first nonzero in row-major order is (e1, f2) -> 4
        assert!(!side.q0_is_zero);
        assert_eq!(side.q0_witness, Some((0, 1, 4.0)));

        let coeffs = CoefficientFamily::constants(&[0.0, 0.5]).unwrap();
        let spec = ContractionSpec::new(1, 0.5, 1, 1.0, None, None).unwrap();
        let side = check_side_conditions(&coeffs, &spec);
        assert!(!side.lower_ok);
        assert_eq!(side.lower_witness, Some((0, 0, 0.5)));
    }

    #[test]
    fn implied_continuity_hypothesis_bundle() {
        let space = corpus::discrete_space(3);
        let map = MappingSpec::new(Variance::Covariant, vec![0, 0, 0], vec![0, 0, 0]);
        let coeffs = CoefficientFamily::constants(&[0.0, 1.0]).unwrap();
        let spec = ContractionSpec::new(1, 0.5, 1, 1.0, Some(vec![1.0]), None).unwrap();
        let cert = verify_pc(&space, &map, &coeffs, &spec).unwrap();
        assert!(implied_continuity(&cert, &cert.side_conditions));

        // Example 3.1 fails: q0 is nonzero (and the inequality does not hold)
        let case = corpus::example_pc_table();
        let cert = verify_pc(&case.space, &case.map, &case.coeffs, &case.spec).unwrap();
        assert!(!implied_continuity(&cert, &cert.side_conditions));
    }

    #[test]
    fn pi_monotonicity_on_example_instance() {
        let case = corpus::example_pc_table();
        let pis = [0.3, 0.5, 0.7, 0.9];
        let mut last_held = false;
        for &pi in &pis {
            let spec = ContractionSpec::new(1, pi, 1, 1.0, None, None).unwrap();
            let cert = verify_pc(&case.space, &case.map, &case.coeffs, &spec).unwrap();
            assert!(
                !last_held || cert.holds,
                "holds must be monotone in pi (failed at pi={pi})"
            );
            last_held = cert.holds;
        }
    }

    #[test]
    fn pi_monotonicity_crosses_the_transition() {
        // additive chain with shrink factor exactly 1/2: fails below it,
        // holds from it onward
        let radii = [0.0, 1.0, 2.0];
        let dist: Vec<Vec<f64>> = (0..3)
            .map(|i| (0..3).map(|j| radii[i] + radii[j]).collect())
            .collect();
        let space = FiniteBipolarSpace::new(
            vec!["a1".into(), "a2".into(), "a3".into()],
            vec!["b1".into(), "b2".into(), "b3".into()],
            dist,
            vec![(0, 0)],
        )
        .unwrap();
        let map = MappingSpec::new(Variance::Covariant, vec![0, 0, 1], vec![0, 0, 1]);
        let coeffs = CoefficientFamily::constants(&[0.0, 1.0]).unwrap();
        let mut last_held = false;
        for pi in [0.3, 0.4, 0.5, 0.6, 0.9] {
            let spec = ContractionSpec::new(1, pi, 1, 1.0, None, None).unwrap();
            let cert = verify_pc(&space, &map, &coeffs, &spec).unwrap();
            assert_eq!(cert.holds, pi >= 0.5, "at pi={pi}");
            assert!(!last_held || cert.holds);
            last_held = cert.holds;
        }
    }

    #[test]
    fn constant_families_agree_with_scalar_route() {
        // independent scalar implementation of the constant-coefficient
        // inequality sum_{u>=1} q_u d^u(Fe,Ff) <= pi sum_{u>=1} q_u d^u(e,f)
        let space = corpus::discrete_space(4);
        let map = MappingSpec::new(Variance::Covariant, vec![0, 0, 1, 2], vec![0, 0, 1, 2]);
        let q = [0.0, 2.0, 0.75];
        let coeffs = CoefficientFamily::constants(&q).unwrap();
        let spec = ContractionSpec::new(2, 0.5, 1, 2.0, None, None).unwrap();
        let cert = verify_pc(&space, &map, &coeffs, &spec).unwrap();
        for row in &cert.rows {
            let d_img = space.dist_at(map.left_image(row.left), map.right_image(row.right));
            let d = space.dist_at(row.left, row.right);
            let scalar_lhs: f64 = (1..=2).map(|u| q[u] * d_img.powi(u as i32)).sum();
            let scalar_rhs: f64 = (1..=2).map(|u| q[u] * d.powi(u as i32)).sum();
            assert_eq!(row.lhs, scalar_lhs);
            assert_eq!(row.rhs, 0.5 * scalar_rhs);
            assert_eq!(row.slack < -cert.tol, cert.violations.contains(&(row.left, row.right)));
        }
    }

    #[test]
    fn slacks_are_bit_reproducible() {
        let case = corpus::example_pc_table();
        let a = verify_pc(&case.space, &case.map, &case.coeffs, &case.spec).unwrap();
        let b = verify_pc(&case.space, &case.map, &case.coeffs, &case.spec).unwrap();
        for (x, y) in a.rows.iter().zip(b.rows.iter()) {
            assert_eq!(x.slack.to_bits(), y.slack.to_bits());
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let space = corpus::discrete_space(3);
        let coeffs = CoefficientFamily::new(
            1,
            vec![
                CoeffTable::Table(vec![vec![0.0, 0.0], vec![0.0, 0.0]]),
                CoeffTable::Constant(1.0),
            ],
        )
        .unwrap();
        let map = MappingSpec::new(Variance::Covariant, vec![0, 0, 0], vec![0, 0, 0]);
        let spec = ContractionSpec::new(1, 0.5, 1, 1.0, None, None).unwrap();
        assert!(matches!(
            verify_pc(&space, &map, &coeffs, &spec),
            Err(ContractionError::DimensionMismatch { .. })
        ));
    }
}
