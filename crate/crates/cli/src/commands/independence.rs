use super::{q, scheme};
use crate::output::OutDir;
use crate::{Ctx, Status};
use anyhow::Result;
use mdlab::symbolic::IndependenceWitness;
use serde::Serialize;

#[derive(Serialize)]
struct Row {
    n: usize,
    f_size: usize,
    j_size: usize,
    delta: String,
    running_min: String,
    certified: bool,
    exhaustive: bool,
    j: String,
}

#[derive(Serialize)]
struct Summary {
    declared_delta: Option<String>,
    reverified: bool,
}

pub fn run(ctx: &Ctx) -> Result<Status> {
    let scheme = scheme(ctx)?;
    let spec = ctx.cfg.subshift()?;
    let (u0, u1) = ctx.cfg.cylinders();
    let w = IndependenceWitness::build(&spec, u0, u1, scheme.folner.sets(), ctx.cfg.search_budget())?;
    let rows: Vec<Row> = w
        .delta_table()
        .into_iter()
        .zip(&w.records)
        .map(|(d, r)| Row {
            n: d.n,
            f_size: d.f_size,
            j_size: d.j_size,
            delta: q(&d.delta),
            running_min: q(&d.running_min),
            certified: d.certified,
            exhaustive: r.result.exhaustive,
            j: r.result.j.to_string(),
        })
        .collect();
    let summary = Summary { declared_delta: w.declared_delta().as_ref().map(q), reverified: w.reverify(&spec) };
    let out = OutDir::create(&ctx.cfg.out_dir())?;
    out.write_csv("independence.csv", &rows)?;
    out.write_json("independence.json", &summary)?;
    for r in &rows {
        println!("n={} |F|={} |J|={} δ={} certified={}", r.n, r.f_size, r.j_size, r.delta, r.certified);
    }
    Ok(if summary.reverified { Status::Ok } else { Status::CheckFailed })
}
