use super::{epsilon_i, gamma_i, restrict_tiling, IndexM, MeanDimError};
use crate::group::{tile_decompose, FiniteSubset, TilingScheme};
use crate::rational::{self, Q};
use crate::simplex::FaceRef;
use crate::symbolic::{
    assignment_from_bits, cylinder_distance, find_independence_set, realize_witness, shift_metric, Configuration,
    Cylinder, SearchBudget, SubshiftSpec,
};
use crate::transport::{ultrametric_clusters, ActionEntry, ActionTable, Cluster, DiscreteMeasure, FiniteMetric};
use num_traits::{One, Signed, Zero};
use rand::Rng;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Debug)]
pub struct InstanceOptions {
    /// Use this `J_n` instead of searching; every assignment is realized.
    pub j_override: Option<FiniteSubset>,
    pub max_j: usize,
    pub budget: SearchBudget,
}

impl Default for InstanceOptions {
    fn default() -> Self {
        InstanceOptions { j_override: None, max_j: 4, budget: SearchBudget::default() }
    }
}

/// `L_n = Ξ(∏_m Δ_{k_m})` for one `n` and one portion, with exact distances
/// between the translated witnesses `g·x_w`, `g ∈ F_n`.
#[derive(Clone, Debug)]
pub struct LnInstance {
    pub spec: SubshiftSpec,
    pub u0: Cylinder,
    pub u1: Cylinder,
    pub n: usize,
    pub portion: usize,
    pub f_n: FiniteSubset,
    pub index: IndexM,
    /// `x_w` for `w ∈ {0,1}^{J_n}`, bit `b` of `w` is the assignment at `J[b]`.
    pub witnesses: Vec<Configuration>,
    pub metric: FiniteMetric,
    pub action: ActionTable,
    /// Dendrogram of each entry of `action`, when every one is ultrametric.
    pub clusters: Option<Vec<Vec<Cluster>>>,
    pub portion_sets: Vec<FiniteSubset>,
    /// `|J_n|/|F_n|`.
    pub delta: Q,
    pub diam: Q,
    pub gamma: Q,
    pub epsilon: Q,
}

fn witness_metric(
    spec: &SubshiftSpec,
    configs: &[Configuration],
    pad: u64,
) -> Result<FiniteMetric, MeanDimError> {
    let ctx = *spec.ctx();
    let n = configs.len();
    let mut table = vec![vec![Q::zero(); n]; n];
    for a in 0..n {
        for b in a + 1..n {
            let radius = configs[a].window_radius(&ctx).max(configs[b].window_radius(&ctx)) + pad;
            let d = shift_metric(&ctx, &configs[a], &configs[b], radius);
            if !d.exact {
                return Err(MeanDimError::Truncated(a, b));
            }
            table[a][b] = d.value.clone();
            table[b][a] = d.value;
        }
    }
    Ok(FiniteMetric::from_table(table)?)
}

impl LnInstance {
    pub fn build(
        spec: &SubshiftSpec,
        u0: Cylinder,
        u1: Cylinder,
        scheme: &TilingScheme,
        n: usize,
        portion: usize,
        opts: &InstanceOptions,
    ) -> Result<Self, MeanDimError> {
        let f_n = scheme.folner.set(n).ok_or(MeanDimError::Parameter("no such F_n"))?.clone();
        let j = match &opts.j_override {
            Some(j) => {
                if !j.difference(&f_n).is_empty() {
                    return Err(MeanDimError::Shape("J_n must lie inside F_n".into()));
                }
                j.clone()
            }
            None => {
                let r = find_independence_set(spec, &u0, &u1, &f_n, opts.budget)?;
                if !r.certified {
                    return Err(MeanDimError::Uncertified(n));
                }
                r.j
            }
        };
        if j.len() > opts.max_j {
            return Err(MeanDimError::TooLarge { size: j.len(), cap: opts.max_j });
        }
        let tiles = tile_decompose(scheme, n, portion)?;
        let index = IndexM::new(j.clone(), restrict_tiling(&j, &tiles))?;
        let witnesses = (0..1u64 << j.len())
            .map(|w| realize_witness(spec, &j, &assignment_from_bits(w, j.len()), &u0, &u1))
            .collect::<Result<Vec<_>, _>>()?;
        let ctx = *spec.ctx();
        let pad = 2 * (spec.memory() as u64 + 1) + f_n.radius(&ctx);
        let metric = witness_metric(spec, &witnesses, pad)?;
        let mut entries = Vec::new();
        for g in f_n.iter() {
            let moved: Vec<Configuration> = witnesses.iter().map(|x| x.shifted(&ctx, g)).collect();
            entries.push(ActionEntry {
                g: *g,
                image: (0..witnesses.len()).map(|w| (w, w)).collect(),
                metric: witness_metric(spec, &moved, pad)?,
            });
        }
        let action = ActionTable::new(entries);
        let clusters = action.entries().iter().map(|e| ultrametric_clusters(&e.metric)).collect();
        let ks = scheme.folner.portion(portion).ok_or(MeanDimError::Parameter("no such portion"))?;
        let portion_sets: Vec<FiniteSubset> = ks.map(|k| scheme.folner.set(k).unwrap().clone()).collect();
        let sizes: Vec<usize> = portion_sets.iter().map(|f| f.len()).collect();
        let d_u = cylinder_distance(&u0, &u1)?;
        let diam = Q::one();
        let gamma = gamma_i(&ctx, &portion_sets, &d_u)?;
        let epsilon = epsilon_i(&gamma, &diam, &sizes)?;
        let delta = rational::frac(j.len() as i64, f_n.len() as i64);
        Ok(LnInstance {
            spec: spec.clone(),
            u0,
            u1,
            n,
            portion,
            f_n,
            index,
            witnesses,
            metric,
            action,
            clusters,
            portion_sets,
            delta,
            diam,
            gamma,
            epsilon,
        })
    }

    pub fn witness_count(&self) -> usize {
        self.witnesses.len()
    }

    /// `S_{Ξ(A_m)}`: witnesses whose slot `m` lies in `A`.
    pub fn face_support(&self, face: &FaceRef) -> BTreeSet<usize> {
        (0..self.witness_count()).filter(|&w| face.indices().contains(&self.index.slot(face.factor, w))).collect()
    }

    pub fn check_face(&self, face: &FaceRef) -> Result<(), MeanDimError> {
        if face.factor >= self.index.len() || face.k != self.index.k(face.factor) {
            return Err(MeanDimError::Shape(format!("face {face} does not fit L_n")));
        }
        Ok(())
    }

    pub fn check_point(&self, t: &[Vec<Q>]) -> Result<(), MeanDimError> {
        if t.len() != self.index.len() {
            return Err(MeanDimError::Shape(format!("{} factors, expected {}", t.len(), self.index.len())));
        }
        for (m, row) in t.iter().enumerate() {
            if row.len() != self.index.k(m) {
                return Err(MeanDimError::Shape(format!("factor {m} has {} coordinates", row.len())));
            }
            if row.iter().any(|x| x.is_negative()) || row.iter().sum::<Q>() != Q::one() {
                return Err(MeanDimError::Shape(format!("factor {m} is not a probability vector")));
            }
        }
        Ok(())
    }

    /// Random points of `∏_m Δ_{k_m}`: vertices, face points and interior
    /// points in equal proportion, with small integer weights.
    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> Vec<Vec<Q>> {
        self.index
            .ks()
            .into_iter()
            .map(|k| {
                let mask: Vec<bool> = match rng.gen_range(0..3) {
                    0 => {
                        let q = rng.gen_range(0..k);
                        (0..k).map(|a| a == q).collect()
                    }
                    1 => {
                        let mut m: Vec<bool> = (0..k).map(|_| rng.gen_bool(0.5)).collect();
                        let q = rng.gen_range(0..k);
                        m[q] = true;
                        m
                    }
                    _ => vec![true; k],
                };
                let raw: Vec<i64> = mask.iter().map(|&on| if on { rng.gen_range(1..=8) } else { 0 }).collect();
                let total: i64 = raw.iter().sum();
                raw.into_iter().map(|v| rational::frac(v, total)).collect()
            })
            .collect()
    }
}

/// `Θ(t)_𝐢 = ∏_m t_{m,𝐢_m}`, with `𝐢` in mixed radix, factor 0 most significant.
pub fn theta_embed(t: &[Vec<Q>]) -> Vec<Q> {
    let mut out = vec![Q::one()];
    for row in t {
        out = out.iter().flat_map(|p| row.iter().map(move |x| p * x)).collect();
    }
    out
}

/// `Ξ(t) = Σ_w ∏_m t_{m,slot_m(w)} δ_{x_w}`.
pub fn xi_embed(inst: &LnInstance, t: &[Vec<Q>]) -> Result<DiscreteMeasure, MeanDimError> {
    inst.check_point(t)?;
    let mut weights = BTreeMap::new();
    for w in 0..inst.witness_count() {
        let p: Q = (0..t.len()).map(|m| t[m][inst.index.slot(m, w)].clone()).product();
        if !p.is_zero() {
            weights.insert(w, p);
        }
    }
    Ok(DiscreteMeasure::new(weights)?)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Part {
    Measure { t: Vec<Vec<Q>>, measure: DiscreteMeasure },
    /// Zero weight in the decomposition.
    Unused,
}

impl Part {
    pub fn measure(&self) -> Option<&DiscreteMeasure> {
        match self {
            Part::Measure { measure, .. } => Some(measure),
            Part::Unused => None,
        }
    }
}

/// `Ξ(t) = λ·Ξ(t') + (1-λ)·Ξ(t'')` with `t' ∈ A_m` and `t'' ∈ Ā_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub lambda: Q,
    pub on_face: Part,
    pub off_face: Part,
}

pub fn decompose_measure(inst: &LnInstance, t: &[Vec<Q>], face: &FaceRef) -> Result<Decomposition, MeanDimError> {
    inst.check_point(t)?;
    inst.check_face(face)?;
    let m = face.factor;
    let lambda: Q = face.indices().iter().map(|&a| t[m][a].clone()).sum();
    let part = |inside: bool, mass: &Q| -> Result<Part, MeanDimError> {
        if mass.is_zero() {
            return Ok(Part::Unused);
        }
        let mut u = t.to_vec();
        u[m] = (0..face.k)
            .map(|a| if face.indices().contains(&a) == inside { &t[m][a] / mass } else { Q::zero() })
            .collect();
        let measure = xi_embed(inst, &u)?;
        Ok(Part::Measure { t: u, measure })
    };
    let on_face = part(true, &lambda)?;
    let off_face = part(false, &(Q::one() - &lambda))?;
    Ok(Decomposition { lambda, on_face, off_face })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::group::{build_dyadic_tiling, Element, GroupContext};
    use crate::rational::{frac, int};
    use crate::transport::{dynamical_wasserstein, wasserstein1};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn full_shift_instance() -> LnInstance {
        let scheme = build_dyadic_tiling(2).unwrap();
        let spec = SubshiftSpec::full_shift(GroupContext::LINE, "01").unwrap();
        LnInstance::build(&spec, Cylinder::new('0'), Cylinder::new('1'), &scheme, 2, 0, &InstanceOptions::default())
            .unwrap()
    }

    pub(crate) fn golden_instance() -> LnInstance {
        let scheme = build_dyadic_tiling(2).unwrap();
        let opts = InstanceOptions { j_override: Some(FiniteSubset::line(&[0, 2])), ..Default::default() };
        LnInstance::build(&SubshiftSpec::golden_mean(), Cylinder::new('0'), Cylinder::new('1'), &scheme, 2, 0, &opts)
            .unwrap()
    }

    fn rational_point(ks: &[usize], raw: &[u8]) -> Vec<Vec<Q>> {
        let mut it = raw.iter().cycle();
        ks.iter()
            .map(|&k| {
                let v: Vec<i64> = (0..k).map(|_| *it.next().unwrap() as i64 % 5).collect();
                let s: i64 = v.iter().sum();
                if s == 0 {
                    return (0..k).map(|a| if a == 0 { int(1) } else { int(0) }).collect();
                }
                v.into_iter().map(|x| frac(x, s)).collect()
            })
            .collect()
    }

    #[test]
    fn full_shift_layout() {
        let inst = full_shift_instance();
        assert_eq!(inst.index.ks(), vec![4, 4]);
        assert_eq!(inst.witness_count(), 16);
        assert_eq!((inst.gamma.clone(), inst.epsilon.clone()), (frac(1, 2), frac(1, 32)));
        // x_w restricted to {0,1,2,3} spells out w bit by bit.
        for (w, x) in inst.witnesses.iter().enumerate() {
            for b in 0..4 {
                let want = if w >> b & 1 == 1 { '1' } else { '0' };
                assert_eq!(x.eval(&Element::Line(b as i64)), want);
            }
        }
        assert_eq!(inst.index.slot(0, 0b1110), 0b10);
        assert_eq!(inst.index.slot(1, 0b1110), 0b11);
    }

    #[test]
    fn witness_distances_follow_first_disagreement() {
        let inst = full_shift_instance();
        // Witnesses differing first at coordinate 2 (and agreeing on 0, 1).
        assert_eq!(inst.metric.d(0b0000, 0b0100), &frac(1, 4));
        let at1 = inst.action.entry(&Element::Line(1)).unwrap();
        assert_eq!(at1.metric.d(0b0000, 0b0100), &frac(1, 2));
        assert_eq!(at1.metric.d(0b0000, 0b0010), &int(1));
        let at3 = inst.action.entry(&Element::Line(3)).unwrap();
        assert_eq!(at3.metric.d(0b0000, 0b0001), &frac(1, 8));
    }

    #[test]
    fn golden_instance_layout() {
        let inst = golden_instance();
        assert_eq!(inst.index.ks(), vec![2, 2]);
        assert!(inst.witnesses.iter().all(|x| x.admissible(&inst.spec)));
        let mu = xi_embed(&inst, &[vec![frac(1, 2), frac(1, 2)], vec![int(1), int(0)]]).unwrap();
        assert_eq!(mu.support(), BTreeSet::from([0, 1]));
    }

    #[test]
    fn dirac_at_vertices() {
        let inst = full_shift_instance();
        for w in 0..16 {
            let t: Vec<Vec<Q>> = (0..2)
                .map(|m| (0..4).map(|a| if a == inst.index.slot(m, w) { int(1) } else { int(0) }).collect())
                .collect();
            assert_eq!(xi_embed(&inst, &t).unwrap(), DiscreteMeasure::dirac(w));
        }
    }

    #[test]
    fn rejects_malformed_points() {
        let inst = full_shift_instance();
        assert!(xi_embed(&inst, &[vec![int(1), int(0), int(0), int(0)]]).is_err());
        let bad = vec![vec![frac(1, 2); 4], vec![int(1), int(0), int(0), int(0)]];
        assert!(xi_embed(&inst, &bad).is_err());
        let opts = InstanceOptions { j_override: Some(FiniteSubset::interval(0, 4)), max_j: 3, ..Default::default() };
        let scheme = build_dyadic_tiling(2).unwrap();
        let spec = SubshiftSpec::full_shift(GroupContext::LINE, "01").unwrap();
        let r = LnInstance::build(&spec, Cylinder::new('0'), Cylinder::new('1'), &scheme, 2, 0, &opts);
        assert!(matches!(r, Err(MeanDimError::TooLarge { size: 4, cap: 3 })));
    }

    #[test]
    fn golden_rejects_dependent_override() {
        let scheme = build_dyadic_tiling(2).unwrap();
        let opts = InstanceOptions { j_override: Some(FiniteSubset::line(&[0, 1])), ..Default::default() };
        let r = LnInstance::build(&SubshiftSpec::golden_mean(), Cylinder::new('0'), Cylinder::new('1'), &scheme, 2, 0, &opts);
        assert!(matches!(r, Err(MeanDimError::Symbolic(_))));
    }

    #[test]
    fn sampled_points_are_valid() {
        let inst = full_shift_instance();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let t = inst.sample_point(&mut rng);
            assert!(inst.check_point(&t).is_ok());
        }
    }

    proptest! {
        #[test]
        fn theta_is_a_probability_vector(raw in proptest::collection::vec(0u8..5, 16)) {
            let t = rational_point(&[4, 2, 3], &raw);
            let th = theta_embed(&t);
            prop_assert_eq!(th.len(), 24);
            prop_assert_eq!(th.iter().sum::<Q>(), int(1));
        }

        #[test]
        fn xi_agrees_with_theta(raw in proptest::collection::vec(0u8..5, 8)) {
            let inst = full_shift_instance();
            let t = rational_point(&inst.index.ks(), &raw);
            let th = theta_embed(&t);
            let mu = xi_embed(&inst, &t).unwrap();
            for w in 0..16 {
                let idx = inst.index.slot(0, w) * 4 + inst.index.slot(1, w);
                prop_assert_eq!(mu.weight(w), th[idx].clone());
            }
        }

        #[test]
        fn xi_is_affine_in_each_factor(
            raw in proptest::collection::vec(0u8..5, 8),
            alt in proptest::collection::vec(0u8..5, 4),
            m in 0usize..2,
            l in 0i64..=6,
        ) {
            let inst = full_shift_instance();
            let t = rational_point(&inst.index.ks(), &raw);
            let mut u = t.clone();
            u[m] = rational_point(&[4], &alt).remove(0);
            let lam = frac(l, 6);
            let mut mixed = t.clone();
            mixed[m] = (0..4).map(|a| &lam * &t[m][a] + (int(1) - &lam) * &u[m][a]).collect();
            let lhs = xi_embed(&inst, &mixed).unwrap();
            let rhs = DiscreteMeasure::mix(&lam, &xi_embed(&inst, &t).unwrap(), &xi_embed(&inst, &u).unwrap());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn decomposition_is_exact(raw in proptest::collection::vec(0u8..5, 8), m in 0usize..2, mask in 1u8..15) {
            let inst = full_shift_instance();
            let t = rational_point(&inst.index.ks(), &raw);
            let face = FaceRef::new(m, 4, (0..4).filter(|a| mask >> a & 1 == 1)).unwrap();
            let d = decompose_measure(&inst, &t, &face).unwrap();
            let mu = xi_embed(&inst, &t).unwrap();
            let s_a = inst.face_support(&face);
            prop_assert_eq!(mu.mass_of(&s_a), d.lambda.clone());
            match (&d.on_face, &d.off_face) {
                (Part::Measure { measure: p, .. }, Part::Measure { measure: q, .. }) => {
                    prop_assert!(p.support().is_subset(&s_a));
                    prop_assert!(q.support().is_disjoint(&s_a));
                    prop_assert_eq!(DiscreteMeasure::mix(&d.lambda, p, q), mu);
                }
                (Part::Measure { measure: p, .. }, Part::Unused) => {
                    prop_assert_eq!(d.lambda.clone(), int(1));
                    prop_assert_eq!(p, &mu);
                }
                (Part::Unused, Part::Measure { measure: q, .. }) => {
                    prop_assert_eq!(d.lambda.clone(), int(0));
                    prop_assert_eq!(q, &mu);
                }
                (Part::Unused, Part::Unused) => prop_assert!(false),
            }
        }

        #[test]
        fn dynamical_distance_dominates_each_translate(raw in proptest::collection::vec(0u8..5, 16)) {
            let inst = full_shift_instance();
            let (a, b) = raw.split_at(8);
            let mu = xi_embed(&inst, &rational_point(&inst.index.ks(), a)).unwrap();
            let nu = xi_embed(&inst, &rational_point(&inst.index.ks(), b)).unwrap();
            let (wf, _) = dynamical_wasserstein(&mu, &nu, &inst.action).unwrap();
            for e in inst.action.entries() {
                prop_assert!(wasserstein1(&mu, &nu, &e.metric).unwrap().0 <= wf);
            }
            prop_assert!(wf <= inst.diam);
        }
    }
}
