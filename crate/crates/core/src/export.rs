//! JSON and CSV renderings of trees, decompositions and cell functions.

use serde::Serialize;

use crate::dyadic::{CellFunction, DyadicTree};
use crate::error::{Error, Result};
use crate::geometry::SpaceModel;
use crate::haar::{HaarDecomposition, HaarSystem};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Serialize)]
pub struct CubeRecord {
    pub address: String,
    pub level: usize,
    pub measure: f64,
    pub measure_exact: Option<String>,
    pub parent: Option<String>,
    pub children: Vec<String>,
    pub point: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TreeRecord {
    pub model: String,
    #[serde(rename = "J")]
    pub max_level: usize,
    pub cubes: Vec<CubeRecord>,
}

pub fn tree_record<T: Scalar, M: SpaceModel<T>>(tree: &DyadicTree<T, M>) -> TreeRecord {
    let model = tree.model();
    let mut cubes = Vec::with_capacity(tree.cube_count());
    for (j, level) in tree.levels().iter().enumerate() {
        for c in level {
            let parent = c
                .parent
                .map(|p| model.format_address(&tree.level(j - 1)[p].address));
            let children = match tree.levels().get(j + 1) {
                Some(next) => next[c.children.clone()]
                    .iter()
                    .map(|k| model.format_address(&k.address))
                    .collect(),
                None => Vec::new(),
            };
            cubes.push(CubeRecord {
                address: model.format_address(&c.address),
                level: c.level,
                measure: c.measure.as_f64(),
                measure_exact: model.measure_exact(&c.address),
                parent,
                children,
                point: model.coordinates(&c.point),
            });
        }
    }
    TreeRecord {
        model: model.name().to_string(),
        max_level: tree.max_level(),
        cubes,
    }
}

pub const DECOMPOSITION_HEADER: &str = "cube_address,level,cube_measure,wavelet_index,coefficient";

/// One row per coefficient. The top scaling coefficient comes first with
/// `wavelet_index = -1`.
pub fn decomposition_csv<T: Scalar, M: SpaceModel<T>>(
    tree: &DyadicTree<T, M>,
    sys: &HaarSystem<T>,
    d: &HaarDecomposition<T>,
) -> Result<String> {
    if sys.tree_id() != tree.id() || d.wavelets.len() != sys.len() {
        return Err(Error::TreeMismatch);
    }
    let model = tree.model();
    let top = tree.top();
    let mut out = String::from(DECOMPOSITION_HEADER);
    out.push('\n');
    out.push_str(&format!(
        "{},0,{},-1,{}\n",
        model.format_address(&top.address),
        top.measure.as_f64(),
        d.top_scaling.as_f64()
    ));
    for (h, c) in sys.wavelets().iter().zip(&d.wavelets) {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            model.format_address(&h.address),
            h.level,
            h.cube_measure.as_f64(),
            h.index,
            c.as_f64()
        ));
    }
    Ok(out)
}

fn rows(text: &str, header: &str) -> Result<Vec<(usize, Vec<String>)>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == header => {}
        _ => {
            return Err(Error::ParseAddress {
                input: text.lines().next().unwrap_or_default().to_string(),
                reason: format!("expected header `{header}`"),
            })
        }
    }
    Ok(lines
        .map(|(i, l)| (i + 1, l.split(',').map(|f| f.trim().to_string()).collect()))
        .collect())
}

fn number<T: Scalar>(line: usize, field: &str) -> Result<T> {
    field.parse::<f64>().map(T::lit).map_err(|_| Error::ParseAddress {
        input: field.to_string(),
        reason: format!("line {}: not a number", line + 1),
    })
}

/// Reads back the output of [`decomposition_csv`].
pub fn parse_decomposition_csv<T: Scalar, M: SpaceModel<T>>(
    tree: &DyadicTree<T, M>,
    sys: &HaarSystem<T>,
    text: &str,
) -> Result<HaarDecomposition<T>> {
    let mut d = HaarDecomposition::zeros(sys);
    for (line, r) in rows(text, DECOMPOSITION_HEADER)? {
        if r.len() != 5 {
            return Err(Error::ParseAddress {
                input: r.join(","),
                reason: format!("line {}: expected 5 fields", line + 1),
            });
        }
        let address = tree.model().parse_address(&r[0])?;
        let c = number::<T>(line, &r[4])?;
        if r[3] == "-1" {
            d.top_scaling = c;
            continue;
        }
        let index: usize = r[3].parse().map_err(|_| Error::ParseAddress {
            input: r[3].clone(),
            reason: format!("line {}: bad wavelet index", line + 1),
        })?;
        let id = sys.find(&address, index).ok_or_else(|| Error::InvalidAddress {
            address: r[0].clone(),
            reason: format!("no wavelet with index {index}"),
        })?;
        d.wavelets[id] = c;
    }
    Ok(d)
}

pub const FUNCTION_HEADER: &str = "leaf_address,value";

pub fn function_csv<T: Scalar, M: SpaceModel<T>>(
    tree: &DyadicTree<T, M>,
    f: &CellFunction<T>,
) -> Result<String> {
    tree.check(f)?;
    let mut out = String::from(FUNCTION_HEADER);
    out.push('\n');
    for (c, v) in tree.leaves().iter().zip(f.values()) {
        out.push_str(&format!("{},{}\n", tree.model().format_address(&c.address), v.as_f64()));
    }
    Ok(out)
}

/// Reads `leaf_address,value` rows; every leaf must appear exactly once.
pub fn parse_function_csv<T: Scalar, M: SpaceModel<T>>(
    tree: &DyadicTree<T, M>,
    text: &str,
) -> Result<CellFunction<T>> {
    let n = tree.leaf_count();
    let mut values: Vec<Option<T>> = vec![None; n];
    for (line, r) in rows(text, FUNCTION_HEADER)? {
        if r.len() != 2 {
            return Err(Error::ParseAddress {
                input: r.join(","),
                reason: format!("line {}: expected 2 fields", line + 1),
            });
        }
        let a = tree.model().parse_address(&r[0])?;
        let i = tree.leaf_index(&a)?;
        if values[i].replace(number(line, &r[1])?).is_some() {
            return Err(Error::InvalidAddress {
                address: r[0].clone(),
                reason: "listed twice".into(),
            });
        }
    }
    let missing = values.iter().filter(|v| v.is_none()).count();
    if missing > 0 {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: n - missing,
        });
    }
    CellFunction::new(tree, values.into_iter().flatten().collect())
}

/// Representative-point coordinates and value per leaf, for plotting.
pub fn plot_csv<T: Scalar, M: SpaceModel<T>>(
    tree: &DyadicTree<T, M>,
    f: &CellFunction<T>,
) -> Result<String> {
    tree.check(f)?;
    let dims = tree.leaves().first().map_or(0, |c| tree.model().coordinates(&c.point).len());
    let names = ["x", "y", "z"];
    let mut out: String = names[..dims.min(3)].iter().map(|n| format!("{n},")).collect();
    out.push_str("value\n");
    for (c, v) in tree.leaves().iter().zip(f.values()) {
        for x in tree.model().coordinates(&c.point) {
            out.push_str(&format!("{x},"));
        }
        out.push_str(&format!("{}\n", v.as_f64()));
    }
    Ok(out)
}
