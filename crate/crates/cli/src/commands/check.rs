use super::{q, scheme};
use crate::output::OutDir;
use crate::{Ctx, Status};
use anyhow::Result;
use mdlab::meandim::{
    decompose_measure, component_check, avoidance_check, separation_probe, density_check, select_dense_tiles, xi_embed,
    InstanceOptions, AvoidanceOutcome, LnInstance, Part,
};
use mdlab::rational::{self, Q};
use mdlab::simplex::FaceRef;
use mdlab::transport::DiscreteMeasure;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct CheckRow {
    pub sample: usize,
    pub lemma: String,
    pub face: String,
    pub outcome: String,
    pub value: String,
    pub bound: String,
}

/// One sampled task: a point, a face for the decomposition checks and a
/// family of facets for the intersection check.
struct Task {
    t: Vec<Vec<Q>>,
    face: FaceRef,
    family: Vec<FaceRef>,
}

fn random_subset(rng: &mut ChaCha8Rng, k: usize, proper: bool) -> Vec<usize> {
    loop {
        let s: Vec<usize> = (0..k).filter(|_| rng.gen_bool(0.5)).collect();
        if !s.is_empty() && (!proper || s.len() < k) {
            return s;
        }
    }
}

/// Even tasks sit within `ε/2` of the facet intersection, so the
/// intersection check is usually not vacuous.
fn tasks(inst: &LnInstance, count: usize, seed: u64) -> Vec<Task> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slots = inst.index.nontrivial();
    (0..count)
        .map(|i| {
            let m = slots[rng.gen_range(0..slots.len())];
            let k = inst.index.k(m);
            let face = FaceRef::new(m, k, random_subset(&mut rng, k, true)).expect("valid face");
            let missing = random_subset(&mut rng, k, true);
            let family: Vec<FaceRef> = missing.iter().map(|&a| FaceRef::facet(m, k, a)).collect();
            let mut t = inst.sample_point(&mut rng);
            if i % 2 == 0 {
                let keep: Vec<usize> = (0..k).filter(|a| !missing.contains(a)).collect();
                let eta = &inst.epsilon / rational::int(2);
                let spill = &eta / rational::int(missing.len() as i64);
                let share = (Q::one() - &eta) / rational::int(keep.len() as i64);
                t[m] = (0..k).map(|a| if missing.contains(&a) { spill.clone() } else { share.clone() }).collect();
            }
            Task { t, face, family }
        })
        .collect()
}

fn row(sample: usize, lemma: &str, face: String, ok: bool, value: &Q, bound: &Q) -> CheckRow {
    CheckRow {
        sample,
        lemma: lemma.into(),
        face,
        outcome: if ok { "pass" } else { "fail" }.into(),
        value: q(value),
        bound: q(bound),
    }
}

fn run_task(inst: &LnInstance, i: usize, task: &Task) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    let mu = xi_embed(inst, &task.t)?;
    let d = decompose_measure(inst, &task.t, &task.face)?;
    let lambda_direct = mu.mass_of(&inst.face_support(&task.face));
    let rebuilt = match (&d.on_face, &d.off_face) {
        (Part::Measure { measure: a, .. }, Part::Measure { measure: b, .. }) => DiscreteMeasure::mix(&d.lambda, a, b),
        (Part::Measure { measure, .. }, Part::Unused) | (Part::Unused, Part::Measure { measure, .. }) => measure.clone(),
        (Part::Unused, Part::Unused) => anyhow::bail!("decomposition lost all mass"),
    };
    let ok = rebuilt == mu && lambda_direct == d.lambda;
    rows.push(row(i, "decompose", task.face.to_string(), ok, &d.lambda, &lambda_direct));
    let r42 = component_check(inst, &task.t, &task.face)?;
    rows.push(row(i, "component_upper", task.face.to_string(), r42.upper_ok(), &r42.upper, &r42.upper_bound));
    rows.push(row(i, "component_lower", task.face.to_string(), r42.lower_ok(), &r42.lower, &r42.lower_bound));
    let names: Vec<String> = task.family.iter().map(|f| f.to_string()).collect();
    let fam = names.join(" ");
    match avoidance_check(inst, &task.t, &task.family, &inst.epsilon)? {
        AvoidanceOutcome::Vacuous { lowers } => rows.push(CheckRow {
            sample: i,
            lemma: "avoidance".into(),
            face: fam,
            outcome: "vacuous".into(),
            value: lowers.iter().max().map(q).unwrap_or_default(),
            bound: q(&inst.epsilon),
        }),
        AvoidanceOutcome::Pass { upper, bound, .. } => rows.push(row(i, "avoidance", fam, true, &upper, &bound)),
        AvoidanceOutcome::Fail { upper, bound, .. } => rows.push(row(i, "avoidance", fam, false, &upper, &bound)),
    }
    Ok(rows)
}

pub fn run(ctx: &Ctx) -> Result<Status> {
    let scheme = scheme(ctx)?;
    let spec = ctx.cfg.subshift()?;
    let (u0, u1) = ctx.cfg.cylinders();
    let opts = InstanceOptions { j_override: ctx.cfg.j_override(), max_j: ctx.cfg.max_j, budget: ctx.cfg.search_budget() };
    let inst = LnInstance::build(&spec, u0, u1, &scheme, ctx.cfg.n, ctx.cfg.portion, &opts)?;
    if inst.index.nontrivial().is_empty() {
        anyhow::bail!("J_n is empty, nothing to check");
    }
    let tasks = tasks(&inst, ctx.cfg.check_samples, ctx.seed);
    let per_task: Vec<Result<Vec<CheckRow>>> = tasks.par_iter().enumerate().map(|(i, t)| run_task(&inst, i, t)).collect();
    let mut rows = Vec::new();
    for r in per_task {
        rows.extend(r?);
    }
    let points: Vec<Vec<Vec<Q>>> = tasks.iter().map(|t| t.t.clone()).collect();
    let radius = &inst.epsilon / rational::int(2);
    let probe = separation_probe(&inst, &points, &radius)?;
    rows.push(CheckRow {
        sample: points.len(),
        lemma: "separation".into(),
        face: format!("{} balls", probe.samples),
        outcome: if probe.separating() { "pass" } else { "fail" }.into(),
        value: probe.violations.len().to_string(),
        bound: q(&radius),
    });
    let blocks = inst.index.blocks();
    let dense = select_dense_tiles(blocks, &inst.delta);
    let pairs: Vec<(usize, usize)> = inst
        .portion_sets
        .iter()
        .enumerate()
        .map(|(o, f)| {
            let j = scheme.folner.portion(inst.portion).map_or(0, |r| *r.start()) + o;
            (f.len(), dense.get(&j).map_or(0, |c| c.len()))
        })
        .collect();
    let r45 = density_check(inst.f_n.len(), inst.index.j().len(), &inst.delta, &pairs)?;
    rows.push(row(points.len(), "density", String::new(), r45.ok, &rational::int(r45.lhs as i64), &r45.rhs));
    let failed = rows.iter().filter(|r| r.outcome == "fail").count();
    let vacuous = rows.iter().filter(|r| r.outcome == "vacuous").count();
    let out = OutDir::create(&ctx.cfg.out_dir())?;
    out.write_csv("check.csv", &rows)?;
    println!(
        "instance n={} |J|={} ks={:?} γ={} ε={}",
        inst.n,
        inst.index.j().len(),
        inst.index.ks(),
        q(&inst.gamma),
        q(&inst.epsilon)
    );
    println!("{} checks, {} failed, {} vacuous", rows.len(), failed, vacuous);
    Ok(if failed == 0 { Status::Ok } else { Status::CheckFailed })
}
