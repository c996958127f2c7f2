//! On-disk catalog cache. Building the order-12 catalog means canonizing
//! about four million partitions, so it is done once and stored as JSON:
//!
//! ```text
//! { "format": 1, "m": 8, "classes": [ { "k": 4, "t": 1, "d": 1, "h": 2, "a": 22,
//!                                        "weights": [[0,2,1,1], ...] }, ... ] }
//! ```
//!
//! Loading re-derives every canonical key and coefficient and rejects files
//! that disagree.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::catalog::{build_catalog_with_limit, canonical_form, coefficient, factorial_product, Catalog, GraphClass};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::partition::MultiGraph;

const FORMAT: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogDoc {
    format: u32,
    m: usize,
    classes: Vec<ClassDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassDoc {
    k: usize,
    t: usize,
    d: u64,
    h: u64,
    a: i64,
    weights: Vec<Vec<u32>>,
}

/// `$CEEF_CACHE`, else `$XDG_CACHE_HOME/ceef`, else `$HOME/.cache/ceef`.
pub fn default_dir() -> Option<PathBuf> {
    let var = |k: &str| std::env::var_os(k).filter(|v| !v.is_empty()).map(PathBuf::from);
    var("CEEF_CACHE")
        .or_else(|| var("XDG_CACHE_HOME").map(|p| p.join("ceef")))
        .or_else(|| var("HOME").map(|p| p.join(".cache").join("ceef")))
}

pub fn catalog_path(dir: &Path, m: usize) -> PathBuf {
    dir.join(format!("catalog-m{m}.json"))
}

pub fn catalog_to_json(c: &Catalog) -> String {
    let doc = CatalogDoc {
        format: FORMAT,
        m: c.m,
        classes: c
            .classes
            .iter()
            .map(|g| ClassDoc {
                k: g.k,
                t: g.t,
                d: g.d,
                h: g.h,
                a: g.a,
                weights: g.representative.weights(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string(&doc).expect("catalog serializes");
    s.push('\n');
    s
}

pub fn catalog_from_json(text: &str) -> Result<Catalog> {
    let doc: CatalogDoc = serde_json::from_str(text)?;
    if doc.format != FORMAT {
        return Err(Error::Schema(format!("unsupported catalog format {}", doc.format)));
    }
    let m = doc.m;
    let mut classes: Vec<GraphClass> = Vec::with_capacity(doc.classes.len());
    for (i, cd) in doc.classes.into_iter().enumerate() {
        let bad = |msg: String| Error::Schema(format!("classes[{i}]: {msg}"));
        let representative = MultiGraph::from_weights(cd.weights)?;
        let k = representative.node_count();
        if k != cd.k || k < 2 || k > m {
            return Err(bad(format!("k = {} does not match the graph", cd.k)));
        }
        if representative.edge_count() as usize != m {
            return Err(bad(format!("graph has {} edges, expected {m}", representative.edge_count())));
        }
        let key = canonical_form(&representative);
        if let Some(prev) = classes.last() {
            let ordered = prev.k > k || (prev.k == k && prev.key < key && cd.t == prev.t + 1);
            if !ordered {
                return Err(bad("classes out of canonical order".into()));
            }
        }
        if classes.last().is_none_or(|p| p.k != k) && cd.t != 1 {
            return Err(bad(format!("t = {} should start at 1", cd.t)));
        }
        let h = factorial_product(representative.block_sizes())?;
        if h != cd.h {
            return Err(bad(format!("h = {} but the graph gives {h}", cd.h)));
        }
        if cd.d == 0 {
            return Err(bad("d must be positive".into()));
        }
        let a = coefficient(m, k, cd.d, h)?;
        if a != cd.a {
            return Err(bad(format!("a = {} but d and h give {a}", cd.a)));
        }
        classes.push(GraphClass {
            m,
            k,
            t: cd.t,
            representative,
            key,
            d: cd.d,
            h,
            a,
        });
    }
    Ok(Catalog { m, classes })
}

pub fn save(dir: &Path, c: &Catalog) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = catalog_path(dir, c.m);
    // Write then rename so readers never see a partial file.
    let tmp = dir.join(format!(".catalog-m{}.{}.tmp", c.m, std::process::id()));
    fs::write(&tmp, catalog_to_json(c))?;
    fs::rename(&tmp, &path)?;
    Ok(path)
}

pub fn load(dir: &Path, m: usize) -> Result<Option<Catalog>> {
    let path = catalog_path(dir, m);
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let c = catalog_from_json(&text)?;
    if c.m != m {
        return Err(Error::Schema(format!("{} holds order {}, expected {m}", path.display(), c.m)));
    }
    Ok(Some(c))
}

/// Loads the catalog from `dir` if present, otherwise builds and stores it.
/// A corrupt cache file is rebuilt and overwritten.
pub fn get_or_build(dir: Option<&Path>, m: usize, max_order: usize, exec: Exec) -> Result<Catalog> {
    if let Some(dir) = dir {
        if let Ok(Some(c)) = load(dir, m) {
            return Ok(c);
        }
    }
    let c = build_catalog_with_limit(m, max_order, exec)?;
    if let Some(dir) = dir {
        save(dir, &c)?;
    }
    Ok(c)
}
