use crate::output::OutDir;
use crate::{Ctx, Status};
use anyhow::Result;
use mdlab::rational;
use mdlab::simplex::{boundary_claim_check, min_separating_order, ProductPoint, ProductSpec, SeparatingBudget};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Serialize)]
pub struct Row {
    pub product: String,
    pub min_order: Option<usize>,
    pub complete: bool,
    pub nodes: u64,
    /// `Σ(k_i - 1)`.
    pub dimension: usize,
    /// `Σ k_i`.
    pub vertex_sum: usize,
    pub dimension_bound: Option<bool>,
    pub vertex_sum_bound: Option<bool>,
    pub boundary_samples: usize,
    pub boundary_violations: Option<usize>,
}

/// Random boundary points: small integer weights, one factor forced onto a
/// facet by zeroing at least one coordinate.
pub fn boundary_samples(spec: &ProductSpec, count: usize, rng: &mut ChaCha8Rng) -> Vec<ProductPoint> {
    (0..count)
        .map(|_| {
            let hit = rng.gen_range(0..spec.factors());
            let coords = spec
                .ks()
                .iter()
                .enumerate()
                .map(|(i, &k)| {
                    let mut raw: Vec<i64> = (0..k).map(|_| rng.gen_range(0..=6)).collect();
                    let zero = if i == hit { rng.gen_range(0..k) } else { k - 1 };
                    if i == hit {
                        raw[zero] = 0;
                    }
                    if raw.iter().all(|&v| v == 0) {
                        raw[(zero + 1) % k] = 1;
                    }
                    let s: i64 = raw.iter().sum();
                    raw.into_iter().map(|v| rational::frac(v, s)).collect()
                })
                .collect();
            ProductPoint::new(spec, coords).expect("valid point")
        })
        .collect()
}

pub fn evaluate(ks: &[usize], samples: usize, seed: u64) -> Result<(Row, bool)> {
    let spec = ProductSpec::new(ks.to_vec())?;
    let res = min_separating_order(&spec, SeparatingBudget::default());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = None;
    if let Some(cover) = &res.witness {
        let points = boundary_samples(&spec, samples, &mut rng);
        violations = Some(boundary_claim_check(cover, &points)?.violations.len());
    }
    let name: Vec<String> = ks.iter().map(|k| format!("Δ{k}")).collect();
    let row = Row {
        product: name.join("×"),
        min_order: res.min_order,
        complete: res.complete,
        nodes: res.nodes,
        dimension: spec.dimension(),
        vertex_sum: spec.vertex_sum(),
        dimension_bound: res.dimension_bound_holds(),
        vertex_sum_bound: res.vertex_sum_bound_holds(),
        boundary_samples: if res.witness.is_some() { samples } else { 0 },
        boundary_violations: violations,
    };
    let ok = row.dimension_bound != Some(false) && violations.unwrap_or(0) == 0;
    Ok((row, ok))
}

pub fn run(ctx: &Ctx) -> Result<Status> {
    let mut rows = Vec::new();
    let mut ok = true;
    for (i, ks) in ctx.cfg.products.iter().enumerate() {
        let (row, good) = evaluate(ks, ctx.cfg.samples, ctx.seed.wrapping_add(i as u64))?;
        println!(
            "{}: min order {:?} (Σ(k-1) = {}, Σk = {}), boundary violations {:?}",
            row.product, row.min_order, row.dimension, row.vertex_sum, row.boundary_violations
        );
        ok &= good;
        rows.push(row);
    }
    let out = OutDir::create(&ctx.cfg.out_dir())?;
    out.write_csv("lebesgue.csv", &rows)?;
    Ok(if ok { Status::Ok } else { Status::CheckFailed })
}
