use super::q;
use crate::output::OutDir;
use crate::{Ctx, Status};
use anyhow::{anyhow, bail, Context, Result};
use mdlab::group::Element;
use mdlab::rational::{self, Q};
use mdlab::transport::{dynamical_wasserstein, kr_dual, wasserstein1, ActionEntry, ActionTable, DiscreteMeasure, FiniteMetric};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// Points, a distance table, two measures and optional group translates.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureFile {
    pub points: Vec<String>,
    pub distances: Vec<Vec<String>>,
    pub mu: BTreeMap<String, String>,
    pub nu: BTreeMap<String, String>,
    #[serde(default)]
    pub action: Vec<ActionSpec>,
}

/// Distances between the translates `g·p`, in the order of `points`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSpec {
    pub g: Element,
    pub distances: Vec<Vec<String>>,
}

#[derive(Serialize)]
struct PlanRow {
    from: String,
    to: String,
    mass: String,
}

#[derive(Serialize)]
struct Summary {
    primal: String,
    dual: String,
    agree: bool,
    potential: BTreeMap<String, String>,
    dynamical: Option<String>,
    argmax: Option<Element>,
}

fn table(points: &[String], raw: &[Vec<String>]) -> Result<FiniteMetric> {
    let rows = raw
        .iter()
        .map(|r| r.iter().map(|s| rational::parse(s).map_err(|e| anyhow!("{e:?}"))).collect::<Result<Vec<Q>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(FiniteMetric::new(points.to_vec(), rows)?)
}

fn measure(points: &[String], raw: &BTreeMap<String, String>) -> Result<DiscreteMeasure> {
    let mut pairs = Vec::new();
    for (label, w) in raw {
        let p = points.iter().position(|x| x == label).ok_or_else(|| anyhow!("unknown point {label}"))?;
        pairs.push((p, rational::parse(w).map_err(|e| anyhow!("{e:?}"))?));
    }
    Ok(DiscreteMeasure::from_pairs(pairs)?)
}

pub fn run(ctx: &Ctx, input: Option<&Path>) -> Result<Status> {
    let Some(path) = input.map(Path::to_path_buf).or_else(|| ctx.cfg.measures.clone()) else {
        bail!("transport needs a measure file");
    };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let file: MeasureFile = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let metric = table(&file.points, &file.distances)?;
    let mu = measure(&file.points, &file.mu)?;
    let nu = measure(&file.points, &file.nu)?;
    let (primal, plan) = wasserstein1(&mu, &nu, &metric)?;
    let dual = kr_dual(&mu, &nu, &metric)?;
    let identity: BTreeMap<usize, usize> = (0..file.points.len()).map(|p| (p, p)).collect();
    let entries = file
        .action
        .iter()
        .map(|a| Ok(ActionEntry { g: a.g, image: identity.clone(), metric: table(&file.points, &a.distances)? }))
        .collect::<Result<Vec<_>>>()?;
    let dynamical = if entries.is_empty() { None } else { Some(dynamical_wasserstein(&mu, &nu, &ActionTable::new(entries))?) };
    let summary = Summary {
        primal: q(&primal),
        dual: q(&dual.value),
        agree: primal == dual.value,
        potential: dual.potential.iter().map(|(p, f)| (file.points[*p].clone(), q(f))).collect(),
        dynamical: dynamical.as_ref().map(|d| q(&d.0)),
        argmax: dynamical.map(|d| d.1),
    };
    let rows: Vec<PlanRow> = plan
        .iter()
        .map(|(a, b, m)| PlanRow { from: file.points[*a].clone(), to: file.points[*b].clone(), mass: q(m) })
        .collect();
    let out = OutDir::create(&ctx.cfg.out_dir())?;
    out.write_csv("plan.csv", &rows)?;
    out.write_json("transport.json", &summary)?;
    println!("W primal = {}", summary.primal);
    println!("W dual   = {}", summary.dual);
    if let (Some(d), Some(g)) = (&summary.dynamical, &summary.argmax) {
        println!("W_F      = {d} (attained at g={g})");
    }
    Ok(if summary.agree { Status::Ok } else { Status::CheckFailed })
}
