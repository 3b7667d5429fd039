use super::{q, scheme};
use crate::output::OutDir;
use crate::{Ctx, Status};
use anyhow::Result;
use mdlab::meandim::{mdim_lower_bound, BoundReport};
use mdlab::rational::{self, Q};
use mdlab::symbolic::{cylinder_distance, IndependenceWitness};
use serde::Serialize;

#[derive(Serialize)]
struct BoundCsvRow {
    n: usize,
    f_n: usize,
    j_n: usize,
    delta_n: String,
    certified: bool,
    dim_bound: String,
    normalized: String,
    normalized_approx: String,
    density: bool,
}

#[derive(Serialize)]
struct TileCsvRow {
    n: usize,
    j: usize,
    size: usize,
    centers: usize,
    dense: usize,
}

#[derive(Serialize)]
pub struct GrowthRow {
    pub source: String,
    pub portion: Option<usize>,
    pub size: usize,
    pub delta: String,
    pub mdim_bound: String,
    pub mdim_bound_approx: String,
}

#[derive(Serialize)]
struct Summary {
    portion: usize,
    portion_sizes: Vec<usize>,
    delta: String,
    diam: String,
    gamma: String,
    epsilon: String,
    mdim_bound: String,
    density_all: bool,
}

fn approx(x: &Q) -> String {
    format!("{:.6}", rational::to_f64(x))
}

/// Portion-wise bounds followed by the formula at every size `1..=max`.
pub fn growth_rows(portions: &[(usize, Vec<usize>)], delta: &Q, max: usize) -> Result<Vec<GrowthRow>> {
    let mut rows = Vec::new();
    for (i, sizes) in portions {
        let b = mdim_lower_bound(delta, sizes)?;
        rows.push(GrowthRow {
            source: "portion".into(),
            portion: Some(*i),
            size: *sizes.iter().max().expect("non-empty portion"),
            delta: q(delta),
            mdim_bound_approx: approx(&b),
            mdim_bound: q(&b),
        });
    }
    for s in 1..=max {
        let b = mdim_lower_bound(delta, &[s])?;
        rows.push(GrowthRow {
            source: "formula".into(),
            portion: None,
            size: s,
            delta: q(delta),
            mdim_bound_approx: approx(&b),
            mdim_bound: q(&b),
        });
    }
    Ok(rows)
}

pub fn run(ctx: &Ctx) -> Result<Status> {
    let scheme = scheme(ctx)?;
    let spec = ctx.cfg.subshift()?;
    let (u0, u1) = ctx.cfg.cylinders();
    let d_u = cylinder_distance(&u0, &u1)?;
    let witness = IndependenceWitness::build(&spec, u0, u1, scheme.folner.sets(), ctx.cfg.search_budget())?;
    let report = BoundReport::build(&scheme, &witness, ctx.cfg.portion, &d_u, &Q::from_integer(1.into()))?;
    let rows: Vec<BoundCsvRow> = report
        .rows
        .iter()
        .map(|r| BoundCsvRow {
            n: r.n,
            f_n: r.f_n,
            j_n: r.j_n,
            delta_n: q(&r.delta_n),
            certified: r.certified,
            dim_bound: r.dim_bound.to_string(),
            normalized: q(&r.normalized),
            normalized_approx: approx(&r.normalized),
            density: r.density,
        })
        .collect();
    let tiles: Vec<TileCsvRow> = report
        .rows
        .iter()
        .flat_map(|r| r.tiles.iter().map(|t| TileCsvRow { n: r.n, j: t.j, size: t.size, centers: t.centers, dense: t.dense }))
        .collect();
    let portions: Vec<(usize, Vec<usize>)> = (0..scheme.folner.portion_count())
        .filter_map(|i| {
            let ks = scheme.folner.portion(i)?;
            Some((i, ks.map(|k| scheme.folner.set(k).map_or(0, |f| f.len())).collect()))
        })
        .collect();
    let growth = growth_rows(&portions, &report.delta, ctx.cfg.growth_max)?;
    let density_all = report.rows.iter().all(|r| r.density);
    let summary = Summary {
        portion: report.portion,
        portion_sizes: report.portion_sizes.clone(),
        delta: q(&report.delta),
        diam: q(&report.diam),
        gamma: q(&report.gamma),
        epsilon: q(&report.epsilon),
        mdim_bound: q(&report.mdim_bound),
        density_all,
    };
    let out = OutDir::create(&ctx.cfg.out_dir())?;
    out.write_csv("bound.csv", &rows)?;
    out.write_csv("tiles.csv", &tiles)?;
    out.write_csv("growth.csv", &growth)?;
    out.write_json("bound.json", &summary)?;
    println!(
        "portion {} sizes {:?}: δ={} γ={} ε={} mdim ≥ {}",
        summary.portion, summary.portion_sizes, summary.delta, summary.gamma, summary.epsilon, summary.mdim_bound
    );
    for r in &rows {
        println!("n={} |F_n|={} dim bound {} (per element {})", r.n, r.f_n, r.dim_bound, r.normalized);
    }
    for g in growth.iter().filter(|g| g.source == "portion") {
        println!("portion {:?} (|F_j| ≤ {}): mdim ≥ {}", g.portion.unwrap_or(0), g.size, g.mdim_bound);
    }
    Ok(if density_all { Status::Ok } else { Status::CheckFailed })
}
