//! JSON form of grid modules.
//!
//! ```json
//! {"field": 2, "lo": [0], "hi": [3],
//!  "stabilized_left": [false], "stabilized_right": [true],
//!  "dims": [0, 1, 1, 1],
//!  "maps": [{"axis": 0, "from": [1], "matrix": [[1]]}, ...]}
//! ```
//! `dims` is row-major with the last axis varying fastest. Maps between a
//! zero stalk and anything may be omitted.

use serde::{Deserialize, Serialize};

use super::GridModule;
use crate::error::{Error, Result};
use crate::exactalg::{Field, Matrix};
use crate::poset::GridPoset;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleJson {
    pub field: u32,
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
    pub stabilized_left: Vec<bool>,
    pub stabilized_right: Vec<bool>,
    pub dims: Vec<usize>,
    #[serde(default)]
    pub maps: Vec<MapJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapJson {
    pub axis: usize,
    pub from: Vec<i64>,
    pub matrix: Vec<Vec<i64>>,
}

impl GridModule {
    pub fn to_json(&self) -> ModuleJson {
        let g = self.grid();
        let mut maps = Vec::new();
        for axis in 0..self.dim() {
            for idx in 0..g.len() {
                if let Some(m) = self.cover_map(axis, idx) {
                    if m.rows() > 0 && m.cols() > 0 {
                        maps.push(MapJson {
                            axis,
                            from: g.point(idx),
                            matrix: m.to_nested(),
                        });
                    }
                }
            }
        }
        ModuleJson {
            field: self.field().modulus(),
            lo: g.lo().to_vec(),
            hi: g.hi().to_vec(),
            stabilized_left: self.stab_left().to_vec(),
            stabilized_right: self.stab_right().to_vec(),
            dims: self.dims().to_vec(),
            maps,
        }
    }

    /// Parses and checks functoriality.
    pub fn from_json(j: &ModuleJson) -> Result<GridModule> {
        let field = Field::new(j.field)?;
        let grid = GridPoset::new(j.lo.clone(), j.hi.clone()).map_err(|e| Error::Schema(e.to_string()))?;
        if j.dims.len() != grid.len() {
            return Err(Error::Schema(format!("{} dims for a box of {} points", j.dims.len(), grid.len())));
        }
        let n = grid.dim();
        let mut given: Vec<Vec<Option<Matrix>>> = vec![vec![None; grid.len()]; n];
        for m in &j.maps {
            if m.axis >= n {
                return Err(Error::Schema(format!("axis {} in dimension {n}", m.axis)));
            }
            let idx = grid
                .index(&m.from)
                .filter(|&i| grid.cover(i, m.axis).is_some())
                .ok_or_else(|| Error::Schema(format!("no cover from {:?} along axis {}", m.from, m.axis)))?;
            let cols = m.matrix.first().map_or(j.dims[idx], |r| r.len());
            let mat = Matrix::from_nested(field, cols, &m.matrix).map_err(|e| Error::Schema(e.to_string()))?;
            given[m.axis][idx] = Some(mat);
        }
        let mut missing = None;
        let module = GridModule::new(
            field,
            grid.clone(),
            j.dims.clone(),
            |axis, idx| {
                let t = grid.cover(idx, axis).unwrap();
                given[axis][idx].take().unwrap_or_else(|| {
                    if j.dims[idx] > 0 && j.dims[t] > 0 {
                        missing.get_or_insert((axis, idx));
                    }
                    Matrix::zeros(field, j.dims[t], j.dims[idx])
                })
            },
            j.stabilized_left.clone(),
            j.stabilized_right.clone(),
        )
        .map_err(|e| Error::Schema(e.to_string()))?;
        if let Some((axis, idx)) = missing {
            return Err(Error::Schema(format!(
                "missing map from {:?} along axis {axis}",
                grid.point(idx)
            )));
        }
        if !module.validate() {
            return Err(Error::Schema("structure maps do not commute".into()));
        }
        Ok(module)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let g = GridPoset::new(vec![0, 0], vec![1, 2]).unwrap();
        let pts: Vec<Vec<i64>> = g.points().filter(|p| p[1] >= 1).collect();
        let m = GridModule::interval_module(Field::F2, &g, &pts)
            .unwrap()
            .with_flags(vec![true, false], vec![false, true])
            .unwrap();
        let text = serde_json::to_string(&m.to_json()).unwrap();
        let back: ModuleJson = serde_json::from_str(&text).unwrap();
        assert_eq!(GridModule::from_json(&back).unwrap(), m);
    }

    #[test]
    fn rejects_missing_maps() {
        let j = ModuleJson {
            field: 2,
            lo: vec![0],
            hi: vec![1],
            stabilized_left: vec![false],
            stabilized_right: vec![false],
            dims: vec![1, 1],
            maps: vec![],
        };
        assert!(matches!(GridModule::from_json(&j), Err(Error::Schema(_))));
    }
}
