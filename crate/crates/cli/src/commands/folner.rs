use super::{q, scheme};
use crate::config::Family;
use crate::output::OutDir;
use crate::{Ctx, Status};
use anyhow::Result;
use mdlab::group::{folner_defect, is_tempered, ow_limit, FiniteSubset};
use mdlab::rational;
use mdlab::symbolic::count_patterns;
use num_traits::ToPrimitive;
use serde::Serialize;

#[derive(Serialize)]
struct FolnerRow {
    n: usize,
    size: usize,
    max_defect: String,
    tempered_ratio: String,
}

#[derive(Serialize)]
struct EntropyRow {
    n: usize,
    patterns: String,
    quotient: String,
}

#[derive(Serialize)]
struct Summary {
    tempered: bool,
    bound: u64,
    worst_ratio: String,
    entropy_at_max: Option<String>,
}

pub fn log2_big(x: &num_bigint::BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("finite below 2^1000").log2();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().expect("64 bits").log2() + shift as f64
}

pub fn run(ctx: &Ctx) -> Result<Status> {
    let scheme = scheme(ctx)?;
    let group = scheme.ctx;
    let sets = scheme.folner.sets();
    let report = is_tempered(&group, sets, &rational::int(ctx.cfg.tempered_bound as i64));
    let gens = group.generators();
    let rows: Vec<FolnerRow> = sets
        .iter()
        .enumerate()
        .map(|(i, f)| FolnerRow {
            n: i + 1,
            size: f.len(),
            max_defect: q(&gens.iter().map(|g| folner_defect(&group, f, g)).max().expect("generators")),
            tempered_ratio: if i == 0 { String::new() } else { q(&report.ratios[i - 1]) },
        })
        .collect();
    let out = OutDir::create(&ctx.cfg.out_dir())?;
    out.write_csv("folner.csv", &rows)?;
    let mut entropy_at_max = None;
    if ctx.cfg.family == Family::Line {
        let spec = ctx.cfg.subshift()?;
        let intervals: Vec<FiniteSubset> = (1..=ctx.cfg.entropy_len as i64).map(|n| FiniteSubset::interval(0, n)).collect();
        let counts: Vec<_> = intervals.iter().map(|f| count_patterns(&spec, f)).collect();
        let quotients = ow_limit(|f| log2_big(&counts[f.len() - 1]), &intervals)?;
        let erows: Vec<EntropyRow> = intervals
            .iter()
            .zip(&counts)
            .zip(&quotients)
            .map(|((f, c), v)| EntropyRow { n: f.len(), patterns: c.to_string(), quotient: format!("{v:.6}") })
            .collect();
        entropy_at_max = erows.last().map(|r| r.quotient.clone());
        out.write_csv("entropy.csv", &erows)?;
    }
    let summary = Summary {
        tempered: report.tempered,
        bound: ctx.cfg.tempered_bound,
        worst_ratio: q(&report.worst_ratio),
        entropy_at_max,
    };
    out.write_json("folner.json", &summary)?;
    println!("tempered (M={}): {} (worst ratio {})", summary.bound, summary.tempered, summary.worst_ratio);
    if let Some(e) = &summary.entropy_at_max {
        println!("entropy quotient at n={}: {e}", ctx.cfg.entropy_len);
    }
    Ok(Status::Ok)
}
