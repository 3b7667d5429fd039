pub mod bound;
pub mod check;
pub mod folner;
pub mod independence;
pub mod lebesgue;
pub mod tile;
pub mod transport;

use mdlab::group::{build_box_tiling, build_dyadic_tiling, TilingScheme};
use mdlab::rational::{self, Q};

use crate::config::Family;
use crate::Ctx;

pub fn q(x: &Q) -> String {
    rational::format(x)
}

pub fn scheme(ctx: &Ctx) -> anyhow::Result<TilingScheme> {
    Ok(match ctx.cfg.family {
        Family::Line => build_dyadic_tiling(ctx.cfg.depth)?,
        Family::Grid => build_box_tiling(ctx.cfg.depth)?,
    })
}
