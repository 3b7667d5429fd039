use super::scheme;
use crate::output::OutDir;
use crate::{Ctx, Status};
use anyhow::{Context, Result};
use mdlab::group::{verify_tiling, TilingDocument, TilingScheme};
use serde::Serialize;
use std::path::Path;

#[derive(Serialize)]
struct TileRow {
    n: usize,
    k: usize,
    portion: usize,
    center: String,
    size: usize,
}

pub fn run(ctx: &Ctx, input: Option<&Path>) -> Result<Status> {
    let input = input.map(Path::to_path_buf).or_else(|| ctx.cfg.tiling.clone());
    let scheme = match &input {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let doc: TilingDocument = serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
            TilingScheme::try_from(doc)?
        }
        None => scheme(ctx)?,
    };
    let out = OutDir::create(&ctx.cfg.out_dir())?;
    if let Err(v) = verify_tiling(&scheme) {
        println!("{v}");
        return Ok(Status::CheckFailed);
    }
    let mut rows = Vec::new();
    for (&(k, n), centers) in &scheme.centers {
        let portion = scheme.portion_of(k).unwrap_or(usize::MAX);
        let size = scheme.folner.set(k).map_or(0, |f| f.len());
        for c in centers.iter() {
            rows.push(TileRow { n, k, portion, center: c.to_string(), size });
        }
    }
    out.write_json("tiling.json", &TilingDocument::from(&scheme))?;
    out.write_csv("tiles.csv", &rows)?;
    println!("tiling ok: {} sets, {} portions, {} translates", scheme.folner.len(), scheme.folner.portion_count(), rows.len());
    Ok(Status::Ok)
}
