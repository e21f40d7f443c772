//! Finite bipolar metric spaces and exhaustive verification of their axioms.
//!
//! A bipolar metric space is a triple `(E, P, d)` where the distance is only
//! defined between a left set `E` and a right set `P`. Points shared by both
//! sets are declared explicitly through `overlap` pairs instead of being
//! inferred from labels, because label reuse in hand-written tables is
//! ambiguous. Three axioms are checked:
//!
//! 1. separation: `d(e, f) = 0` exactly for declared overlap pairs,
//! 2. symmetry on the overlap: `d(p, r) = d(r, p)` whenever both orders are
//!    expressible through overlap pairs,
//! 3. the tetrahedral inequality
//!    `d(e, f) <= d(e, z) + d(r, z) + d(r, f)` over all quadruples.

use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

use crate::DEFAULT_TOL;

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("space must have at least one left and one right point")]
    Empty,
    #[error("distance table has {got} rows, expected {expected} (one per left point)")]
    RowCount { expected: usize, got: usize },
    #[error("dist[{row}] has {got} entries, expected {expected} (one per right point)")]
    RowLength { row: usize, expected: usize, got: usize },
    #[error("dist[{row}][{col}] = {value} is not a finite non-negative real")]
    BadDistance { row: usize, col: usize, value: f64 },
    #[error("overlap pair ({left}, {right}) is out of range")]
    OverlapOutOfRange { left: usize, right: usize },
    #[error("duplicate {side} label {label:?}")]
    DuplicateLabel { side: &'static str, label: String },
    #[error("unknown left label {0:?}")]
    UnknownLeftLabel(String),
    #[error("unknown right label {0:?}")]
    UnknownRightLabel(String),
}

/// A finite bipolar metric space: ordered left/right label lists, a dense
/// distance table (rows indexed by left order, columns by right order), and
/// the pairs declared to be the same underlying point.
#[derive(Debug, Clone)]
pub struct FiniteBipolarSpace {
    left: Vec<String>,
    right: Vec<String>,
    dist: Vec<Vec<f64>>,
    overlap: Vec<(usize, usize)>,
    overlap_set: BTreeSet<(usize, usize)>,
}

impl FiniteBipolarSpace {
    /// Builds a space, validating shape, finiteness, and non-negativity of
    /// the table. Axioms are *not* enforced here; [`check_axioms`] reports on
    /// them so that deliberately broken spaces can be examined.
    pub fn new(
        left: Vec<String>,
        right: Vec<String>,
        dist: Vec<Vec<f64>>,
        overlap: Vec<(usize, usize)>,
    ) -> Result<Self, SpaceError> {
        if left.is_empty() || right.is_empty() {
            return Err(SpaceError::Empty);
        }
        for (side, labels) in [("left", &left), ("right", &right)] {
            let mut seen = BTreeSet::new();
            for label in labels.iter() {
                if !seen.insert(label.clone()) {
                    return Err(SpaceError::DuplicateLabel {
                        side,
                        label: label.clone(),
                    });
                }
            }
        }
        if dist.len() != left.len() {
            return Err(SpaceError::RowCount {
                expected: left.len(),
                got: dist.len(),
            });
        }
        for (row, entries) in dist.iter().enumerate() {
            if entries.len() != right.len() {
                return Err(SpaceError::RowLength {
                    row,
                    expected: right.len(),
                    got: entries.len(),
                });
            }
            for (col, &value) in entries.iter().enumerate() {
                if !value.is_finite() || value < 0.0 {
                    return Err(SpaceError::BadDistance { row, col, value });
                }
            }
        }
        for &(i, j) in &overlap {
            if i >= left.len() || j >= right.len() {
                return Err(SpaceError::OverlapOutOfRange { left: i, right: j });
            }
        }
        let overlap_set = overlap.iter().copied().collect();
        Ok(Self {
            left,
            right,
            dist,
            overlap,
            overlap_set,
        })
    }

    pub fn n_left(&self) -> usize {
        self.left.len()
    }

    pub fn n_right(&self) -> usize {
        self.right.len()
    }

    pub fn left_labels(&self) -> &[String] {
        &self.left
    }

    pub fn right_labels(&self) -> &[String] {
        &self.right
    }

    pub fn left_index(&self, label: &str) -> Option<usize> {
        self.left.iter().position(|l| l == label)
    }

    pub fn right_index(&self, label: &str) -> Option<usize> {
        self.right.iter().position(|l| l == label)
    }

    pub fn overlap_pairs(&self) -> &[(usize, usize)] {
        &self.overlap
    }

    pub fn is_overlap(&self, i: usize, j: usize) -> bool {
        self.overlap_set.contains(&(i, j))
    }

    /// Distance by index. Indices must be in range.
    pub fn dist_at(&self, i: usize, j: usize) -> f64 {
        self.dist[i][j]
    }

    /// Distance by label; a plain table lookup, total over the domain.
    pub fn distance(&self, e: &str, f: &str) -> Result<f64, SpaceError> {
        let i = self
            .left_index(e)
            .ok_or_else(|| SpaceError::UnknownLeftLabel(e.to_string()))?;
        let j = self
            .right_index(f)
            .ok_or_else(|| SpaceError::UnknownRightLabel(f.to_string()))?;
        Ok(self.dist[i][j])
    }

    /// Overwrites a single table entry, keeping shape validation. Used for
    /// what-if analysis of axiom failures.
    pub fn set_distance(&mut self, i: usize, j: usize, value: f64) -> Result<(), SpaceError> {
        if !value.is_finite() || value < 0.0 {
            return Err(SpaceError::BadDistance {
                row: i,
                col: j,
                value,
            });
        }
        self.dist[i][j] = value;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axiom {
    Separation,
    OverlapSymmetry,
    Tetrahedral,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axiom::Separation => write!(f, "axiom1(separation)"),
            Axiom::OverlapSymmetry => write!(f, "axiom2(overlap symmetry)"),
            Axiom::Tetrahedral => write!(f, "axiom3(tetrahedral)"),
        }
    }
}

/// A concrete axiom failure: which axiom, the witnessing point labels, and
/// the two sides of the violated relation.
#[derive(Debug, Clone, Serialize)]
pub struct AxiomViolation {
    pub axiom: Axiom,
    pub witness: Vec<String>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub axiom1_ok: bool,
    pub axiom2_ok: bool,
    pub axiom3_ok: bool,
    pub violations: Vec<AxiomViolation>,
}

impl AxiomReport {
    pub fn all_ok(&self) -> bool {
        self.axiom1_ok && self.axiom2_ok && self.axiom3_ok
    }
}

/// Checks the three bipolar axioms with the default tetrahedral tolerance.
pub fn check_axioms(space: &FiniteBipolarSpace) -> AxiomReport {
    check_axioms_with_tol(space, DEFAULT_TOL)
}

/// Checks the three bipolar axioms. Axioms 1 and 2 compare exactly (inputs
/// are user-given constants); the tetrahedral inequality uses the absolute
/// tolerance `tol` to absorb rounding in derived tables.
///
/// The quadruple scan for axiom 3 covers all `|left|^2 * |right|^2` tuples
/// and is parallelized over the first left point; violation order stays
/// deterministic (sorted by witness index).
pub fn check_axioms_with_tol(space: &FiniteBipolarSpace, tol: f64) -> AxiomReport {
    let nl = space.n_left();
    let nr = space.n_right();
    let mut violations = Vec::new();

    // axiom 1: zero distance exactly on declared overlap pairs
    for i in 0..nl {
        for j in 0..nr {
            let d = space.dist_at(i, j);
            let declared = space.is_overlap(i, j);
            if (d == 0.0) != declared {
                violations.push(AxiomViolation {
                    axiom: Axiom::Separation,
                    witness: vec![space.left[i].clone(), space.right[j].clone()],
                    lhs: d,
                    rhs: 0.0,
                });
            }
        }
    }
    let axiom1_ok = violations.is_empty();

    // axiom 2: for overlap points p=(i1,j1), r=(i2,j2): d(p,r) = d(r,p),
    // i.e. dist[i1][j2] == dist[i2][j1]
    let before = violations.len();
    for &(i1, j1) in &space.overlap {
        for &(i2, j2) in &space.overlap {
            let forward = space.dist_at(i1, j2);
            let backward = space.dist_at(i2, j1);
            if forward != backward {
                violations.push(AxiomViolation {
                    axiom: Axiom::OverlapSymmetry,
                    witness: vec![
                        space.left[i1].clone(),
                        space.right[j1].clone(),
                        space.left[i2].clone(),
                        space.right[j2].clone(),
                    ],
                    lhs: forward,
                    rhs: backward,
                });
            }
        }
    }
    let axiom2_ok = violations.len() == before;

    // axiom 3: d(e,f) <= d(e,z) + d(r,z) + d(r,f) for e,r in left, z,f in right
    let mut tetra: Vec<AxiomViolation> = (0..nl)
        .into_par_iter()
        .map(|e| {
            let mut local = Vec::new();
            for r in 0..nl {
                for z in 0..nr {
                    for f in 0..nr {
                        let lhs = space.dist_at(e, f);
                        let rhs =
                            space.dist_at(e, z) + space.dist_at(r, z) + space.dist_at(r, f);
                        if lhs > rhs + tol {
                            local.push(AxiomViolation {
                                axiom: Axiom::Tetrahedral,
                                witness: vec![
                                    space.left[e].clone(),
                                    space.left[r].clone(),
                                    space.right[z].clone(),
                                    space.right[f].clone(),
                                ],
                                lhs,
                                rhs,
                            });
                        }
                    }
                }
            }
            local
        })
        .flatten()
        .collect();
    let axiom3_ok = tetra.is_empty();
    violations.append(&mut tetra);

    AxiomReport {
        axiom1_ok,
        axiom2_ok,
        axiom3_ok,
        violations,
    }
}
