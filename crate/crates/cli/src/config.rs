use anyhow::{bail, Context, Result};
use mdlab::group::{Element, FiniteSubset, GroupContext, GroupFamily};
use mdlab::symbolic::{Cylinder, SearchBudget, SubshiftDoc, SubshiftSpec};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    #[default]
    Line,
    Grid,
}

impl Family {
    pub fn ctx(self) -> GroupContext {
        match self {
            Family::Line => GroupContext::LINE,
            Family::Grid => GroupContext::GRID,
        }
    }

    pub fn group_family(self) -> GroupFamily {
        self.ctx().family
    }
}

/// Everything a run reads; relative paths resolve against the config file.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub family: Family,
    /// Subshift document (TOML); the full shift on `01` when absent.
    pub subshift: Option<PathBuf>,
    pub symbols: (char, char),
    pub depth: usize,
    pub portion: usize,
    /// `n` of the `check` instance.
    pub n: usize,
    /// Fixed `J_n` for `check`, bypassing the search.
    pub j: Option<Vec<Element>>,
    pub budget: u64,
    pub certify_cap: u64,
    pub max_j: usize,
    pub samples: usize,
    pub check_samples: usize,
    pub entropy_len: usize,
    pub tempered_bound: u64,
    pub products: Vec<Vec<usize>>,
    pub growth_max: usize,
    pub tiling: Option<PathBuf>,
    pub measures: Option<PathBuf>,
    /// Output directory; `mdlab-out` in the working directory by default.
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let search = SearchBudget::default();
        RunConfig {
            family: Family::Line,
            subshift: None,
            symbols: ('0', '1'),
            depth: 4,
            portion: 0,
            n: 2,
            j: None,
            budget: search.realize_calls,
            certify_cap: search.certify_cap,
            max_j: 4,
            samples: 1000,
            check_samples: 24,
            entropy_len: 20,
            tempered_bound: 2,
            products: vec![vec![2], vec![3], vec![2, 2]],
            growth_max: 64,
            tiling: None,
            measures: None,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(RunConfig::default()) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: RunConfig = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.subshift, &mut cfg.tiling, &mut cfg.measures, &mut cfg.out].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 || self.certify_cap == 0 || self.max_j == 0 || self.samples == 0 || self.check_samples == 0 {
            bail!("budgets, caps and sample counts must be positive");
        }
        if self.depth < 2 {
            bail!("depth must be at least 2");
        }
        if self.symbols.0 == self.symbols.1 {
            bail!("the two cylinder symbols must differ");
        }
        if self.products.iter().any(|p| p.is_empty() || p.iter().any(|&k| k < 2)) {
            bail!("every product needs factors with k ≥ 2");
        }
        Ok(())
    }

    pub fn subshift(&self) -> Result<SubshiftSpec> {
        match &self.subshift {
            None => Ok(SubshiftSpec::full_shift(self.family.ctx(), "01")?),
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading subshift {}", p.display()))?;
                let doc: SubshiftDoc = toml::from_str(&text).with_context(|| format!("parsing subshift {}", p.display()))?;
                if doc.family != self.family.group_family() {
                    bail!("subshift family {:?} does not match the configured group", doc.family);
                }
                Ok(SubshiftSpec::from_doc(&doc)?)
            }
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("mdlab-out"))
    }

    pub fn cylinders(&self) -> (Cylinder, Cylinder) {
        (Cylinder::new(self.symbols.0), Cylinder::new(self.symbols.1))
    }

    pub fn search_budget(&self) -> SearchBudget {
        SearchBudget { realize_calls: self.budget, certify_cap: self.certify_cap }
    }

    pub fn j_override(&self) -> Option<FiniteSubset> {
        self.j.clone().map(FiniteSubset::new)
    }
}
