//! Deterministic random-instance builders for property tests.
//!
//! Contractive instances follow a sink construction: points are ordered
//! along a spanning chain with radii `r[0] = 0`, `r[k] = a * (1/pi)^k`, the
//! metric is the additive `d(i, j) = r[i] + s[j]` (zero exactly on the sink
//! pair), and the map sends each point either one step down the chain or
//! straight to the sink. Every hop shrinks its radius by at least the factor
//! `pi`, so the polynomial contraction inequality holds for the generated
//! `pi` with constant coefficients, and the declared lower bound
//! `Q = u * q_rho` with `u <= 0.9` leaves real slack in the certified
//! bounds.

use rand::Rng;

use crate::contraction::{CoefficientFamily, ContractionSpec, MappingSpec, Variance};
use crate::space::FiniteBipolarSpace;

#[derive(Debug)]
pub struct ContractiveInstance {
    pub space: FiniteBipolarSpace,
    pub map: MappingSpec,
    pub coeffs: CoefficientFamily,
    pub spec: ContractionSpec,
    pub start_left: String,
    pub start_right: String,
}

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn chain_radii(n: usize, scale: f64, growth: f64) -> Vec<f64> {
    let mut radii = vec![0.0; n];
    if n > 1 {
        radii[1] = scale * growth;
        for k in 2..n {
            radii[k] = radii[k - 1] * growth;
        }
    }
    radii
}

/// Map table that sends index 0 to itself and every other index either one
/// step down the chain or straight to the sink.
fn sink_map_table(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    (0..n)
        .map(|i| {
            if i == 0 {
                0
            } else if rng.gen_bool(0.5) {
                i - 1
            } else {
                0
            }
        })
        .collect()
}

/// A random instance guaranteed to satisfy the polynomial contraction
/// inequality with the generated `pi` and side conditions. The declared
/// `pi` sits 5% above the chain's true shrink factor so every certificate
/// row has slack well clear of float noise even at large radii.
pub fn sink_instance(rng: &mut impl Rng, variance: Variance) -> ContractiveInstance {
    let n = rng.gen_range(2..=8);
    let shrink = rng.gen_range(0.2..=0.75);
    let pi = shrink * 1.05;
    let growth = 1.0 / shrink;
    let scale = rng.gen_range(0.1..=2.0);
    let radii = chain_radii(n, scale, growth);

    let dist: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| radii[i] + radii[j]).collect())
        .collect();
    let space = FiniteBipolarSpace::new(labels("e", n), labels("f", n), dist, vec![(0, 0)])
        .expect("sink space construction is total");

    let map = MappingSpec::new(variance, sink_map_table(rng, n), sink_map_table(rng, n));

    let degree = rng.gen_range(1..=3);
    let mut q = vec![0.0];
    for _ in 0..degree {
        q.push(rng.gen_range(0.5..=3.0));
    }
    let coeffs = CoefficientFamily::constants(&q).expect("constant family is well-formed");
    let rho_index = rng.gen_range(1..=degree);
    let q_lower = q[rho_index] * rng.gen_range(0.5..=0.9);
    let upper = Some(q[1..].to_vec());
    let spec = ContractionSpec::new(degree, pi, rho_index, q_lower, upper, None)
        .expect("generated spec is well-formed");

    let start_left = format!("e{}", rng.gen_range(1..=n));
    let start_right = format!("f{}", rng.gen_range(1..=n));
    ContractiveInstance {
        space,
        map,
        coeffs,
        spec,
        start_left,
        start_right,
    }
}

/// An unconstrained instance (random covariant map over the sole-overlap
/// discrete space): its certificate may or may not hold.
pub fn arbitrary_instance(
    rng: &mut impl Rng,
) -> (FiniteBipolarSpace, MappingSpec, CoefficientFamily, ContractionSpec) {
    let n = rng.gen_range(2..=6);
    let dist: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if (i, j) == (0, 0) { 0.0 } else { 1.0 })
                .collect()
        })
        .collect();
    let space = FiniteBipolarSpace::new(labels("e", n), labels("f", n), dist, vec![(0, 0)])
        .expect("space construction is total");
    let left: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
    let right: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
    let map = MappingSpec::new(Variance::Covariant, left, right);
    let degree = rng.gen_range(1..=2);
    let mut q = vec![0.0];
    for _ in 0..degree {
        q.push(rng.gen_range(0.5..=2.0));
    }
    let coeffs = CoefficientFamily::constants(&q).expect("constant family is well-formed");
    let q_lower = q[1] * rng.gen_range(0.5..=0.9);
    let spec = ContractionSpec::new(degree, rng.gen_range(0.2..=0.8), 1, q_lower, None, None)
        .expect("generated spec is well-formed");
    (space, map, coeffs, spec)
}
