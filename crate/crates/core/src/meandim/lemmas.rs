//! Exact checks of the transport estimates on faces of `L_n`.

use super::instance::{decompose_measure, xi_embed, LnInstance, Part};
use super::MeanDimError;
use crate::lp::{LinearProgram, Relation, Sense};
use crate::rational::{self, Q};
use crate::simplex::{separation_violation, FaceRef};
use crate::transport::{dynamical_wasserstein, Cluster, DiscreteMeasure};
use num_traits::{One, Zero};
use std::collections::BTreeSet;

/// `min_{ν on S} max_{g∈F_n} W(gμ, gν)` as one linear program.
///
/// `ν` ranges over all probability measures on `S`, so the value is at most
/// `W_{F_n}(μ, Ξ(A_m))` when `S = S_{Ξ(A_m)}`.
pub fn distance_to_support_lower_bound(
    inst: &LnInstance,
    mu: &DiscreteMeasure,
    support: &BTreeSet<usize>,
) -> Result<Q, MeanDimError> {
    if support.is_empty() {
        return Err(MeanDimError::Parameter("empty target support"));
    }
    match &inst.clusters {
        Some(trees) => lower_bound_by_clusters(trees, mu, support),
        None => lower_bound_by_plans(inst, mu, support),
    }
}

/// Dendrogram form: `W(gμ, gν) = Σ_C w_C |μ(C) - ν(C)|` for each `g`.
fn lower_bound_by_clusters(
    trees: &[Vec<Cluster>],
    mu: &DiscreteMeasure,
    support: &BTreeSet<usize>,
) -> Result<Q, MeanDimError> {
    let dst: Vec<usize> = support.iter().copied().collect();
    let mut lp = LinearProgram::new(Sense::Minimize, 0);
    let z = lp.add_var(Q::one(), false);
    let nu: Vec<usize> = dst.iter().map(|_| lp.add_var(Q::zero(), false)).collect();
    lp.add_constraint(nu.iter().map(|&v| (v, Q::one())).collect(), Relation::Eq, Q::one());
    for tree in trees {
        let mut cost = vec![(z, -Q::one())];
        for c in tree {
            let inside: Vec<usize> = (0..dst.len()).filter(|&j| c.points.contains(&dst[j])).collect();
            let mass = mu.mass_of(&c.points);
            if c.weight.is_zero() || (inside.is_empty() && mass.is_zero()) {
                continue;
            }
            let s = lp.add_var(Q::zero(), false);
            let mut up: Vec<(usize, Q)> = inside.iter().map(|&j| (nu[j], Q::one())).collect();
            let mut down: Vec<(usize, Q)> = inside.iter().map(|&j| (nu[j], -Q::one())).collect();
            up.push((s, -Q::one()));
            down.push((s, -Q::one()));
            lp.add_constraint(up, Relation::Le, mass.clone());
            lp.add_constraint(down, Relation::Le, -mass);
            cost.push((s, c.weight.clone()));
        }
        lp.add_constraint(cost, Relation::Le, Q::zero());
    }
    lp.solve().optimal().map(|s| s.value).ok_or(MeanDimError::Lp("distance program has no optimum"))
}

/// Transport-plan form: one coupling of `μ` and `ν` per group element.
fn lower_bound_by_plans(
    inst: &LnInstance,
    mu: &DiscreteMeasure,
    support: &BTreeSet<usize>,
) -> Result<Q, MeanDimError> {
    let src: Vec<(usize, Q)> = mu.weights().iter().map(|(p, w)| (*p, w.clone())).collect();
    let dst: Vec<usize> = support.iter().copied().collect();
    let mut lp = LinearProgram::new(Sense::Minimize, 0);
    let z = lp.add_var(Q::one(), false);
    let nu: Vec<usize> = dst.iter().map(|_| lp.add_var(Q::zero(), false)).collect();
    lp.add_constraint(nu.iter().map(|&v| (v, Q::one())).collect(), Relation::Eq, Q::one());
    for entry in inst.action.entries() {
        let pi: Vec<Vec<usize>> = src.iter().map(|_| dst.iter().map(|_| lp.add_var(Q::zero(), false)).collect()).collect();
        for (i, (_, w)) in src.iter().enumerate() {
            lp.add_constraint(pi[i].iter().map(|&v| (v, Q::one())).collect(), Relation::Eq, w.clone());
        }
        for (j, &v) in nu.iter().enumerate() {
            let mut row: Vec<(usize, Q)> = pi.iter().map(|r| (r[j], Q::one())).collect();
            row.push((v, -Q::one()));
            lp.add_constraint(row, Relation::Eq, Q::zero());
        }
        let mut cost = vec![(z, -Q::one())];
        for (i, (p, _)) in src.iter().enumerate() {
            for (j, q) in dst.iter().enumerate() {
                let d = entry.metric.d(entry.image[p], entry.image[q]);
                if !d.is_zero() {
                    cost.push((pi[i][j], d.clone()));
                }
            }
        }
        lp.add_constraint(cost, Relation::Le, Q::zero());
    }
    lp.solve().optimal().map(|s| s.value).ok_or(MeanDimError::Lp("distance program has no optimum"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComponentReport {
    /// `μ(S_{Ā_m})`.
    pub beta: Q,
    /// `W_{F_n}(μ, μ'')` for the `A`-component `μ''`.
    pub upper: Q,
    pub upper_bound: Q,
    pub lower: Q,
    pub lower_bound: Q,
}

impl ComponentReport {
    pub fn upper_ok(&self) -> bool {
        self.upper <= self.upper_bound
    }

    pub fn lower_ok(&self) -> bool {
        self.lower >= self.lower_bound
    }

    pub fn passed(&self) -> bool {
        self.upper_ok() && self.lower_ok()
    }
}

/// The `A_m`-component of `Ξ(t)`, or the face barycenter when it has no mass.
fn face_component(inst: &LnInstance, t: &[Vec<Q>], face: &FaceRef) -> Result<(Q, DiscreteMeasure), MeanDimError> {
    let d = decompose_measure(inst, t, face)?;
    let m = match d.on_face {
        Part::Measure { measure, .. } => measure,
        Part::Unused => {
            let mut u = t.to_vec();
            let l = face.size() as i64;
            u[face.factor] =
                (0..face.k).map(|a| if face.indices().contains(&a) { rational::frac(1, l) } else { Q::zero() }).collect();
            xi_embed(inst, &u)?
        }
    };
    Ok((Q::one() - d.lambda, m))
}

/// `β·diam ≥ W_{F_n}(μ, A_m) ≥ β·γ` with `β = μ(S_{Ā_m})`.
pub fn component_check(inst: &LnInstance, t: &[Vec<Q>], face: &FaceRef) -> Result<ComponentReport, MeanDimError> {
    let mu = xi_embed(inst, t)?;
    let (beta, component) = face_component(inst, t, face)?;
    let (upper, _) = dynamical_wasserstein(&mu, &component, &inst.action)?;
    let lower = distance_to_support_lower_bound(inst, &mu, &inst.face_support(face))?;
    Ok(ComponentReport {
        upper_bound: &beta * &inst.diam,
        lower_bound: &beta * &inst.gamma,
        beta,
        upper,
        lower,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum AvoidanceOutcome {
    /// Some face is not within `ε` even by the lower bound, or the faces
    /// have empty intersection.
    Vacuous { lowers: Vec<Q> },
    Pass { lowers: Vec<Q>, upper: Q, bound: Q },
    Fail { lowers: Vec<Q>, upper: Q, bound: Q },
}

impl AvoidanceOutcome {
    pub fn is_fail(&self) -> bool {
        matches!(self, AvoidanceOutcome::Fail { .. })
    }
}

/// `W_{F_n}(μ, ⋂A_m) ≤ diam·k_m·ε/γ` for a family of facets of `Δ_{k_m}`
/// each within `ε` of `μ`.
///
/// The hypothesis is tested on the linear-program lower bound, which is a
/// weaker requirement than the true distance being below `ε`; the
/// conclusion is tested on a transport upper bound.
pub fn avoidance_check(
    inst: &LnInstance,
    t: &[Vec<Q>],
    family: &[FaceRef],
    eps: &Q,
) -> Result<AvoidanceOutcome, MeanDimError> {
    let m = family.first().ok_or(MeanDimError::Parameter("empty face family"))?.factor;
    let k = inst.index.k(m);
    if family.iter().any(|f| f.factor != m || f.size() + 1 != k) {
        return Err(MeanDimError::Shape("family must be facets of one factor".into()));
    }
    for f in family {
        inst.check_face(f)?;
    }
    let mu = xi_embed(inst, t)?;
    let mut lowers = Vec::new();
    for f in family {
        lowers.push(distance_to_support_lower_bound(inst, &mu, &inst.face_support(f))?);
    }
    if lowers.iter().any(|l| l >= eps) {
        return Ok(AvoidanceOutcome::Vacuous { lowers });
    }
    let common: BTreeSet<usize> =
        (0..k).filter(|a| family.iter().all(|f| f.indices().contains(a))).collect();
    let Ok(meet) = FaceRef::new(m, k, common) else {
        return Ok(AvoidanceOutcome::Vacuous { lowers });
    };
    let (_, component) = face_component(inst, t, &meet)?;
    let (upper, _) = dynamical_wasserstein(&mu, &component, &inst.action)?;
    let bound = &inst.diam * rational::int(k as i64) * eps / &inst.gamma;
    Ok(if upper <= bound {
        AvoidanceOutcome::Pass { lowers, upper, bound }
    } else {
        AvoidanceOutcome::Fail { lowers, upper, bound }
    })
}

/// A sample point lying in balls that meet the facets of its own support.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparationViolation {
    pub sample: usize,
    pub factor: usize,
    /// `(ball center, facet)` pairs.
    pub pairs: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparationReport {
    pub radius: Q,
    pub samples: usize,
    /// Number of (sample, ball) memberships.
    pub memberships: usize,
    pub violations: Vec<SeparationViolation>,
}

impl SeparationReport {
    pub fn separating(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Covers the samples by open `W_{F_n}`-balls of the given radius around
/// each sample and tests separation at every sample point.
///
/// A ball meets the facet `{x_q = 0}` of factor `m` when one of its sampled
/// members has `t_{m,q} = 0`.
pub fn separation_probe(inst: &LnInstance, samples: &[Vec<Vec<Q>>], radius: &Q) -> Result<SeparationReport, MeanDimError> {
    let measures: Vec<DiscreteMeasure> = samples.iter().map(|t| xi_embed(inst, t)).collect::<Result<_, _>>()?;
    let n = samples.len();
    let mut inside = vec![vec![false; n]; n];
    for a in 0..n {
        inside[a][a] = true;
        for b in a + 1..n {
            let (w, _) = dynamical_wasserstein(&measures[a], &measures[b], &inst.action)?;
            inside[a][b] = &w < radius;
            inside[b][a] = inside[a][b];
        }
    }
    let zeros = |p: usize, m: usize| -> u64 {
        samples[p][m].iter().enumerate().filter(|(_, x)| x.is_zero()).fold(0, |acc, (q, _)| acc | 1 << q)
    };
    let mut violations = Vec::new();
    for m in inst.index.nontrivial() {
        let k = inst.index.k(m);
        let met: Vec<u64> = (0..n).map(|c| (0..n).filter(|&p| inside[c][p]).fold(0, |acc, p| acc | zeros(p, m))).collect();
        for p in 0..n {
            let balls: Vec<usize> = (0..n).filter(|&c| inside[c][p]).collect();
            let faces: Vec<u64> = balls.iter().map(|&c| met[c]).collect();
            let support = !zeros(p, m) & ((1u64 << k) - 1);
            if let Some(v) = separation_violation(k, support, &faces) {
                violations.push(SeparationViolation {
                    sample: p,
                    factor: m,
                    pairs: v.into_iter().map(|(e, a)| (balls[e], a)).collect(),
                });
            }
        }
    }
    let memberships = inside.iter().flatten().filter(|&&x| x).count();
    Ok(SeparationReport { radius: radius.clone(), samples: n, memberships, violations })
}

#[cfg(test)]
mod tests {
    use super::super::instance::tests::{full_shift_instance, golden_instance};
    use super::*;
    use crate::rational::{frac, int};
    use crate::transport::wasserstein1;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::time::Instant;

    fn vertex(k: usize, q: usize) -> Vec<Q> {
        (0..k).map(|a| if a == q { int(1) } else { int(0) }).collect()
    }

    #[test]
    fn lower_bound_agrees_with_plain_transport_for_one_shift() {
        // With a single group element the program is W(μ, S) over ν on S.
        let inst = golden_instance();
        let mu = DiscreteMeasure::uniform(&[0, 1, 2, 3]);
        let s: BTreeSet<usize> = [0].into();
        let lb = distance_to_support_lower_bound(&inst, &mu, &s).unwrap();
        let wf = dynamical_wasserstein(&mu, &DiscreteMeasure::dirac(0), &inst.action).unwrap().0;
        assert_eq!(lb, wf);
    }

    #[test]
    fn cluster_and_plan_programs_agree() {
        let inst = golden_instance();
        assert!(inst.clusters.is_some());
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for i in 0..30 {
            let t = inst.sample_point(&mut rng);
            let face = FaceRef::new(i % 2, 2, [i / 2 % 2]).unwrap();
            let mu = xi_embed(&inst, &t).unwrap();
            let s = inst.face_support(&face);
            let trees = inst.clusters.as_ref().unwrap();
            assert_eq!(lower_bound_by_clusters(trees, &mu, &s).unwrap(), lower_bound_by_plans(&inst, &mu, &s).unwrap());
        }
        let full = full_shift_instance();
        let mu = xi_embed(&full, &[vec![frac(1, 2), frac(1, 2), int(0), int(0)], vertex(4, 3)]).unwrap();
        let s = full.face_support(&FaceRef::new(0, 4, [2, 3]).unwrap());
        let trees = full.clusters.as_ref().unwrap();
        assert_eq!(lower_bound_by_clusters(trees, &mu, &s).unwrap(), lower_bound_by_plans(&full, &mu, &s).unwrap());
    }

    #[test]
    fn vertex_to_opposite_face() {
        let inst = full_shift_instance();
        let t = vec![vertex(4, 0), vertex(4, 0)];
        let face = FaceRef::new(0, 4, [1, 2, 3]).unwrap();
        let r = component_check(&inst, &t, &face).unwrap();
        assert_eq!(r.beta, int(1));
        assert!(r.passed(), "{r:?}");
        assert!(r.lower >= inst.gamma);
        let on = component_check(&inst, &t, &FaceRef::new(0, 4, [0, 1]).unwrap()).unwrap();
        assert_eq!((on.beta.clone(), on.upper.clone(), on.lower.clone()), (int(0), int(0), int(0)));
    }

    #[test]
    fn component_sweep() {
        let inst = full_shift_instance();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for i in 0..40 {
            let t = inst.sample_point(&mut rng);
            let m = i % 2;
            let face = FaceRef::new(m, 4, (0..4).filter(|a| ((i / 2) % 15 + 1) >> a & 1 == 1)).unwrap();
            let r = component_check(&inst, &t, &face).unwrap();
            assert!(r.passed(), "{t:?} {face}: {r:?}");
        }
    }

    #[test]
    fn lower_bound_below_every_face_point() {
        let inst = golden_instance();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let t = inst.sample_point(&mut rng);
            let face = FaceRef::new(1, 2, [0]).unwrap();
            let mu = xi_embed(&inst, &t).unwrap();
            let lb = distance_to_support_lower_bound(&inst, &mu, &inst.face_support(&face)).unwrap();
            for _ in 0..5 {
                let mut u = inst.sample_point(&mut rng);
                u[1] = vertex(2, 0);
                let nu = xi_embed(&inst, &u).unwrap();
                assert!(lb <= dynamical_wasserstein(&mu, &nu, &inst.action).unwrap().0);
            }
        }
    }

    #[test]
    fn largest_program_is_tractable() {
        let mut inst = full_shift_instance();
        inst.clusters = None;
        let mu = xi_embed(&inst, &[vec![frac(1, 4); 4], vec![frac(1, 4); 4]]).unwrap();
        let face = FaceRef::new(0, 4, [0, 1, 2]).unwrap();
        let start = Instant::now();
        let lb = distance_to_support_lower_bound(&inst, &mu, &inst.face_support(&face)).unwrap();
        assert!(lb >= frac(1, 4) * &inst.gamma);
        assert!(start.elapsed().as_secs() < 60);
    }

    #[test]
    fn avoidance_outcomes() {
        let inst = full_shift_instance();
        let eps = inst.epsilon.clone();
        let t = vec![vertex(4, 0), vec![frac(1, 4); 4]];
        let family = vec![FaceRef::facet(0, 4, 1), FaceRef::facet(0, 4, 2)];
        match avoidance_check(&inst, &t, &family, &eps).unwrap() {
            AvoidanceOutcome::Pass { upper, .. } => assert_eq!(upper, int(0)),
            other => panic!("{other:?}"),
        }
        let far = vec![vertex(4, 1), vec![frac(1, 4); 4]];
        assert!(matches!(avoidance_check(&inst, &far, &family, &eps).unwrap(), AvoidanceOutcome::Vacuous { .. }));
        // Mass 1/64 off the facets keeps both lower bounds under ε.
        let near = vec![vec![frac(63, 64), frac(1, 128), frac(1, 128), int(0)], vertex(4, 3)];
        match avoidance_check(&inst, &near, &family, &eps).unwrap() {
            AvoidanceOutcome::Pass { upper, bound, .. } => assert!(upper <= bound),
            AvoidanceOutcome::Vacuous { lowers } => panic!("{lowers:?}"),
            AvoidanceOutcome::Fail { .. } => panic!("fail"),
        }
    }

    #[test]
    fn avoidance_rejects_mixed_families() {
        let inst = full_shift_instance();
        let t = vec![vertex(4, 0), vertex(4, 0)];
        let family = vec![FaceRef::facet(0, 4, 1), FaceRef::facet(1, 4, 2)];
        assert!(avoidance_check(&inst, &t, &family, &inst.epsilon).is_err());
    }

    #[test]
    fn separation_small_balls_separate_and_large_ones_do_not() {
        let inst = golden_instance();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut samples: Vec<Vec<Vec<Q>>> = (0..24).map(|_| inst.sample_point(&mut rng)).collect();
        let eta = &inst.epsilon / int(4);
        for a in 0..2 {
            samples.push(vec![vertex(2, a), vertex(2, 0)]);
            samples.push(vec![vec![int(1) - &eta, eta.clone()], vertex(2, 0)]);
        }
        let small = separation_probe(&inst, &samples, &(&inst.epsilon / int(2))).unwrap();
        assert!(small.separating(), "{:?}", small.violations);
        assert!(small.memberships > samples.len());
        let big = separation_probe(&inst, &samples, &int(2)).unwrap();
        assert!(!big.separating());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn component_is_within_beta_diam(seed in 0u64..1000, m in 0usize..2, q in 0usize..2) {
            let inst = golden_instance();
            let t = inst.sample_point(&mut ChaCha8Rng::seed_from_u64(seed));
            let face = FaceRef::new(m, 2, [q]).unwrap();
            let (beta, comp) = face_component(&inst, &t, &face).unwrap();
            let mu = xi_embed(&inst, &t).unwrap();
            for e in inst.action.entries() {
                let (w, _) = wasserstein1(&mu, &comp, &e.metric).unwrap();
                prop_assert!(w <= &beta * &inst.diam);
            }
        }
    }
}
