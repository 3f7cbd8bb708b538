//! Where maps and orbits come from: files, built-in names, shorthands.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;

use plzig::factorize::{minc_beta, split};
use plzig::plmap::{compose, iterate_with_budget};
use plzig::rational::rat;
use plzig::{minc_map, BackwardOrbit, Case, PLMap};

pub const BUILTINS: &[&str] = &["minc", "tent", "identity", "s", "t", "s-prime", "t-prime", "g"];

pub fn builtin(name: &str) -> Result<PLMap> {
    let f2 = || iterate_with_budget(&minc_map(), 2, usize::MAX).expect("unbounded");
    let pair = |case: Case| split(&f2(), case, &minc_beta(case)).expect("Minc factorization");
    Ok(match name {
        "minc" => minc_map(),
        "tent" => PLMap::new([(rat(0, 1), rat(0, 1)), (rat(1, 2), rat(1, 1)), (rat(1, 1), rat(0, 1))])?,
        "identity" => PLMap::identity(),
        "s" => pair(Case::Case1).s,
        "t" => pair(Case::Case1).t,
        "s-prime" => pair(Case::Case2).s,
        "t-prime" => pair(Case::Case2).t,
        "g" => {
            let p = pair(Case::Case1);
            compose(&p.s, &p.t)
        }
        _ => bail!("unknown built-in map {name:?} (known: {})", BUILTINS.join(", ")),
    })
}

/// A map named either by file or by built-in, optionally iterated.
#[derive(Debug, Clone, Args)]
pub struct MapArgs {
    /// Map file: one `x y` breakpoint per line, `#` starts a comment.
    #[arg(value_name = "MAP", conflicts_with = "builtin")]
    pub file: Option<PathBuf>,
    /// Use a built-in map instead of a file.
    #[arg(long, value_name = "NAME")]
    pub builtin: Option<String>,
    /// Replace the map by its n-th iterate.
    #[arg(long, value_name = "N")]
    pub iterate: Option<usize>,
}

impl MapArgs {
    /// Loads the map; `default` is used when neither a file nor a built-in
    /// is given.
    pub fn load(&self, default: Option<&str>) -> Result<PLMap> {
        let f = match (&self.file, &self.builtin, default) {
            (Some(path), _, _) => read_map(path)?,
            (None, Some(name), _) => builtin(name)?,
            (None, None, Some(name)) => builtin(name)?,
            (None, None, None) => bail!("no map given: pass a map file or --builtin NAME"),
        };
        match self.iterate {
            Some(0) => bail!("--iterate must be at least 1"),
            Some(n) => Ok(iterate_with_budget(&f, n, usize::MAX)?),
            None => Ok(f),
        }
    }
}

pub fn read_map(path: &Path) -> Result<PLMap> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    PLMap::from_map_file(&text).with_context(|| format!("parsing map file {}", path.display()))
}

/// `builtin:NAME` or a file path.
pub fn map_spec(spec: &str) -> Result<PLMap> {
    match spec.strip_prefix("builtin:") {
        Some(name) => builtin(name),
        None => read_map(Path::new(spec)),
    }
}

/// `const:q` or an orbit file.
pub fn orbit_spec(spec: &str) -> Result<BackwardOrbit> {
    if spec.starts_with("const:") {
        return BackwardOrbit::parse_spec(spec).with_context(|| format!("parsing orbit {spec:?}"));
    }
    let text = fs::read_to_string(spec).with_context(|| format!("reading {spec}"))?;
    BackwardOrbit::parse(&text).with_context(|| format!("parsing orbit file {spec}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use plzig::rational::rat;

    #[test]
    fn builtins_load() {
        for name in BUILTINS {
            builtin(name).unwrap();
        }
        assert!(builtin("nope").is_err());
        let g = builtin("g").unwrap();
        assert_eq!(g.eval(&rat(1, 2)).unwrap(), rat(1, 2));
        let f2 = compose(&builtin("t").unwrap(), &builtin("s").unwrap());
        assert_eq!(f2, iterate_with_budget(&minc_map(), 2, usize::MAX).unwrap());
    }

    #[test]
    fn orbit_shorthand() {
        let o = orbit_spec("const:1/2").unwrap();
        assert_eq!(o.get(5), &rat(1, 2));
        assert!(orbit_spec("const:abc").is_err());
        assert!(orbit_spec("/no/such/file").is_err());
    }
}
