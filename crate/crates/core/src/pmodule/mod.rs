//! Persistence modules on grid boxes and on finite preorders.
//!
//! A [`GridModule`] stores stalks and cover maps on a finite box together with
//! per-axis boundary flags, and stands for a module on all of `Z^n`: reads
//! beyond a stabilized edge repeat the edge, reads beyond any other edge are
//! zero. Extending every non-stabilized side by one zero layer and flagging
//! everything stabilized gives the *clamped* form, in which the `Z^n` module
//! is the pullback of a finite module along the clamp map. Pullback along the
//! clamp is fully faithful, so Hom-spaces, limits and colimits of such modules
//! are computed on any box containing the clamped boxes involved.

mod finite;
mod hom;
pub mod json;

pub use finite::{cosections, direct_image_cosheaf, direct_image_sheaf, inverse_image, sections, PosetModule};
pub use hom::{hom_basis, hom_space, internal_hom, poset_hom_basis, poset_hom_space, HomSpace};
pub(crate) use hom::grid_hom_same_box;

use crate::error::{Error, Result};
use crate::exactalg::{self, Field, Matrix};
use crate::poset::{GridPoset, PrincipalKind, PrincipalSet};

/// A functor from a grid box (extended to `Z^n` by the boundary flags) to
/// finite-dimensional vector spaces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridModule {
    field: Field,
    grid: GridPoset,
    dims: Vec<usize>,
    /// `maps[axis][idx]` is the map from point `idx` one step up along `axis`.
    maps: Vec<Vec<Option<Matrix>>>,
    stab_left: Vec<bool>,
    stab_right: Vec<bool>,
}

/// Componentwise linear maps between two modules on the same index set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Morphism {
    pub components: Vec<Matrix>,
}

pub type NaturalTransformation = Morphism;

impl GridModule {
    /// Builds a module from stalk dimensions and a map for every cover. Shapes
    /// are checked; functoriality is left to [`GridModule::validate`].
    pub fn new(
        field: Field,
        grid: GridPoset,
        dims: Vec<usize>,
        mut cover_map: impl FnMut(usize, usize) -> Matrix,
        stab_left: Vec<bool>,
        stab_right: Vec<bool>,
    ) -> Result<GridModule> {
        let n = grid.dim();
        if dims.len() != grid.len() || stab_left.len() != n || stab_right.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} dims and {}/{} flags for a box of {} points in dimension {}",
                dims.len(),
                stab_left.len(),
                stab_right.len(),
                grid.len(),
                n
            )));
        }
        let mut maps = vec![vec![None; grid.len()]; n];
        for axis in 0..n {
            for idx in 0..grid.len() {
                if let Some(j) = grid.cover(idx, axis) {
                    let m = cover_map(axis, idx);
                    if m.shape() != (dims[j], dims[idx]) || m.field() != field {
                        return Err(Error::InvalidModule(format!(
                            "map at {:?} along axis {axis} has shape {:?}, expected {:?}",
                            grid.point(idx),
                            m.shape(),
                            (dims[j], dims[idx])
                        )));
                    }
                    maps[axis][idx] = Some(m);
                }
            }
        }
        Ok(GridModule {
            field,
            grid,
            dims,
            maps,
            stab_left,
            stab_right,
        })
    }

    pub fn zero(field: Field, grid: GridPoset) -> GridModule {
        let n = grid.dim();
        let dims = vec![0; grid.len()];
        GridModule::new(field, grid, dims, |_, _| Matrix::zeros(field, 0, 0), vec![false; n], vec![false; n])
            .unwrap()
    }

    /// `k[A]`: one-dimensional on `A`, identities inside `A`, zero elsewhere.
    /// The empty set gives the zero module.
    pub fn interval_module(field: Field, grid: &GridPoset, set: &[Vec<i64>]) -> Result<GridModule> {
        if !set.is_empty() && !grid.is_interval(set) {
            return Err(Error::NotInterval(format!("{set:?}")));
        }
        let mut dims = vec![0; grid.len()];
        for p in set {
            dims[grid.index(p).unwrap()] = 1;
        }
        GridModule::indicator(field, grid.clone(), dims, vec![false; grid.dim()], vec![false; grid.dim()])
    }

    /// Module with 0/1 stalks and identity maps wherever both ends are 1.
    pub fn indicator(
        field: Field,
        grid: GridPoset,
        dims: Vec<usize>,
        stab_left: Vec<bool>,
        stab_right: Vec<bool>,
    ) -> Result<GridModule> {
        let d = dims.clone();
        let g = grid.clone();
        GridModule::new(
            field,
            grid,
            dims,
            |axis, idx| {
                let j = g.cover(idx, axis).unwrap();
                if d[idx] == 1 && d[j] == 1 {
                    Matrix::identity(field, 1)
                } else {
                    Matrix::zeros(field, d[j], d[idx])
                }
            },
            stab_left,
            stab_right,
        )
    }

    /// `k[U_x]` or `k[D_x]` restricted to the box, with the given flags.
    pub fn principal(
        field: Field,
        grid: &GridPoset,
        set: &PrincipalSet,
        stab_left: Vec<bool>,
        stab_right: Vec<bool>,
    ) -> Result<GridModule> {
        let dims = grid
            .points()
            .map(|y| {
                let inside = match set.kind {
                    PrincipalKind::Up => crate::poset::leq(&set.base, &y),
                    PrincipalKind::Down => crate::poset::leq(&y, &set.base),
                };
                inside as usize
            })
            .collect();
        GridModule::indicator(field, grid.clone(), dims, stab_left, stab_right)
    }

    pub fn with_flags(mut self, stab_left: Vec<bool>, stab_right: Vec<bool>) -> Result<GridModule> {
        if stab_left.len() != self.grid.dim() || stab_right.len() != self.grid.dim() {
            return Err(Error::DimensionMismatch("flag vectors".into()));
        }
        self.stab_left = stab_left;
        self.stab_right = stab_right;
        Ok(self)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn grid(&self) -> &GridPoset {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn stab_left(&self) -> &[bool] {
        &self.stab_left
    }

    pub fn stab_right(&self) -> &[bool] {
        &self.stab_right
    }

    pub fn dim_at_index(&self, idx: usize) -> usize {
        self.dims[idx]
    }

    pub fn is_zero(&self) -> bool {
        self.dims.iter().all(|&d| d == 0)
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn cover_map(&self, axis: usize, idx: usize) -> Option<&Matrix> {
        self.maps[axis][idx].as_ref()
    }

    /// Box index whose stalk is read at `z in Z^n`, or `None` for a zero read.
    pub fn resolve(&self, z: &[i64]) -> Option<usize> {
        let mut c = Vec::with_capacity(z.len());
        for k in 0..self.dim() {
            let (lo, hi) = (self.grid.lo()[k], self.grid.hi()[k]);
            let v = z[k];
            if v < lo {
                if !self.stab_left[k] {
                    return None;
                }
                c.push(lo);
            } else if v > hi {
                if !self.stab_right[k] {
                    return None;
                }
                c.push(hi);
            } else {
                c.push(v);
            }
        }
        self.grid.index(&c)
    }

    /// Stalk dimension at any point of `Z^n`.
    pub fn dim_at(&self, z: &[i64]) -> usize {
        self.resolve(z).map_or(0, |i| self.dims[i])
    }

    /// Structure map between box points `i <= j`.
    pub fn map_between(&self, i: usize, j: usize) -> Matrix {
        let mut cur = i;
        let mut acc = Matrix::identity(self.field, self.dims[i]);
        for axis in 0..self.dim() {
            let target = self.grid.coord(j, axis);
            assert!(self.grid.coord(cur, axis) <= target, "map_between needs i <= j");
            while self.grid.coord(cur, axis) < target {
                let m = self.maps[axis][cur].as_ref().unwrap();
                acc = m.mul(&acc);
                cur = self.grid.cover(cur, axis).unwrap();
            }
        }
        acc
    }

    /// Structure map `M_a -> M_b` for `a <= b` in `Z^n`.
    pub fn map_z(&self, a: &[i64], b: &[i64]) -> Matrix {
        match (self.resolve(a), self.resolve(b)) {
            (Some(i), Some(j)) => self.map_between(i, j),
            _ => Matrix::zeros(self.field, self.dim_at(b), self.dim_at(a)),
        }
    }

    /// Functoriality: every elementary square of covers commutes.
    pub fn validate(&self) -> bool {
        let g = &self.grid;
        for idx in 0..g.len() {
            for a in 0..self.dim() {
                for b in a + 1..self.dim() {
                    let (Some(ia), Some(ib)) = (g.cover(idx, a), g.cover(idx, b)) else {
                        continue;
                    };
                    let top = g.cover(ia, b).unwrap();
                    let via_a = self.maps[b][ia].as_ref().unwrap().mul(self.maps[a][idx].as_ref().unwrap());
                    let via_b = self.maps[a][ib].as_ref().unwrap().mul(self.maps[b][idx].as_ref().unwrap());
                    debug_assert_eq!(g.cover(ib, a), Some(top));
                    if via_a != via_b {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// `M(a)_x = M_{x+a}`.
    pub fn shift(&self, a: &[i64]) -> GridModule {
        let neg: Vec<i64> = a.iter().map(|v| -v).collect();
        GridModule {
            grid: self.grid.translate(&neg),
            ..self.clone()
        }
    }

    /// The box of the clamped form.
    pub fn clamp_box(&self) -> GridPoset {
        let lo = (0..self.dim())
            .map(|k| self.grid.lo()[k] - !self.stab_left[k] as i64)
            .collect();
        let hi = (0..self.dim())
            .map(|k| self.grid.hi()[k] + !self.stab_right[k] as i64)
            .collect();
        GridPoset::new(lo, hi).unwrap()
    }

    /// The same `Z^n` module stored on its clamp box with every edge stabilized.
    pub fn clamped(&self) -> GridModule {
        self.lift(&self.clamp_box()).unwrap()
    }

    /// The same `Z^n` module stored on `b` with every edge stabilized; `b`
    /// must contain the clamp box.
    pub fn lift(&self, b: &GridPoset) -> Result<GridModule> {
        if !b.contains_box(&self.clamp_box()) {
            return Err(Error::OutOfBox(format!(
                "box {:?}..{:?} does not contain the clamp box {:?}..{:?}",
                b.lo(),
                b.hi(),
                self.clamp_box().lo(),
                self.clamp_box().hi()
            )));
        }
        let resolved: Vec<Option<usize>> = b.points().map(|z| self.resolve(&z)).collect();
        let dims = resolved.iter().map(|r| r.map_or(0, |i| self.dims[i])).collect();
        let n = self.dim();
        GridModule::new(
            self.field,
            b.clone(),
            dims,
            |axis, idx| {
                let j = b.cover(idx, axis).unwrap();
                match (resolved[idx], resolved[j]) {
                    (Some(s), Some(t)) if s == t => Matrix::identity(self.field, self.dims[s]),
                    (Some(s), Some(t)) => self.maps[axis][s].clone().unwrap_or_else(|| self.map_between(s, t)),
                    (s, t) => Matrix::zeros(
                        self.field,
                        t.map_or(0, |i| self.dims[i]),
                        s.map_or(0, |i| self.dims[i]),
                    ),
                }
            },
            vec![true; n],
            vec![true; n],
        )
    }

    /// Reads the module on an arbitrary box, keeping stabilization only along
    /// edges where `b` reaches or passes the stabilized edge of `self`.
    pub fn restrict(&self, b: &GridPoset) -> GridModule {
        let hull = self.clamp_box().hull(b);
        let big = self.lift(&hull).unwrap();
        let n = self.dim();
        let stab_left = (0..n)
            .map(|k| b.lo()[k] <= self.clamp_box().lo()[k])
            .collect();
        let stab_right = (0..n)
            .map(|k| b.hi()[k] >= self.clamp_box().hi()[k])
            .collect();
        let idx: Vec<usize> = b.points().map(|p| hull.index(&p).unwrap()).collect();
        let dims = idx.iter().map(|&i| big.dims[i]).collect();
        GridModule::new(
            self.field,
            b.clone(),
            dims,
            |axis, i| big.maps[axis][idx[i]].clone().unwrap(),
            stab_left,
            stab_right,
        )
        .unwrap()
    }

    /// Same field, box and flags.
    pub fn same_base(&self, other: &GridModule) -> bool {
        self.field == other.field
            && self.grid == other.grid
            && self.stab_left == other.stab_left
            && self.stab_right == other.stab_right
    }

    pub fn direct_sum(&self, other: &GridModule) -> Result<GridModule> {
        if !self.same_base(other) {
            return Err(Error::BaseMismatch("direct sum of modules on different boxes".into()));
        }
        let dims = self.dims.iter().zip(&other.dims).map(|(a, b)| a + b).collect();
        GridModule::new(
            self.field,
            self.grid.clone(),
            dims,
            |axis, idx| {
                let a = self.maps[axis][idx].as_ref().unwrap();
                let b = other.maps[axis][idx].as_ref().unwrap();
                block_diag(self.field, &[a, b])
            },
            self.stab_left.clone(),
            self.stab_right.clone(),
        )
    }

    /// Direct sum of modules on a common box after lifting all of them to
    /// the hull of their clamp boxes.
    pub fn direct_sum_all(field: Field, dim: usize, parts: &[GridModule]) -> GridModule {
        if parts.is_empty() {
            return GridModule::zero(field, GridPoset::new(vec![0; dim], vec![0; dim]).unwrap());
        }
        let mut hull = parts[0].clamp_box();
        for p in &parts[1..] {
            hull = hull.hull(&p.clamp_box());
        }
        let mut acc = parts[0].lift(&hull).unwrap();
        for p in &parts[1..] {
            acc = acc.direct_sum(&p.lift(&hull).unwrap()).unwrap();
        }
        acc
    }

    /// Image of a morphism between modules on the same base.
    pub fn image(src: &GridModule, dst: &GridModule, phi: &Morphism) -> Result<(GridModule, Vec<Matrix>)> {
        if !src.same_base(dst) {
            return Err(Error::BaseMismatch("image of a morphism between different bases".into()));
        }
        let bases: Vec<Matrix> = phi
            .components
            .iter()
            .map(column_basis)
            .collect();
        let dims = bases.iter().map(|b| b.cols()).collect();
        let m = GridModule::new(
            dst.field,
            dst.grid.clone(),
            dims,
            |axis, idx| {
                let j = dst.grid.cover(idx, axis).unwrap();
                let pushed = dst.maps[axis][idx].as_ref().unwrap().mul(&bases[idx]);
                exactalg::solve_exact(&bases[j], &pushed)
            },
            dst.stab_left.clone(),
            dst.stab_right.clone(),
        )?;
        Ok((m, bases))
    }
}

/// Block diagonal matrix.
pub fn block_diag(field: Field, blocks: &[&Matrix]) -> Matrix {
    let rows = blocks.iter().map(|b| b.rows()).sum();
    let cols = blocks.iter().map(|b| b.cols()).sum();
    let mut out = Matrix::zeros(field, rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.put_block(r, c, b);
        r += b.rows();
        c += b.cols();
    }
    out
}

/// Columns forming a basis of the column space.
pub fn column_basis(m: &Matrix) -> Matrix {
    let (_, piv) = m.rref();
    let cols: Vec<Matrix> = piv.iter().map(|&c| m.block(0, c, m.rows(), 1)).collect();
    let refs: Vec<&Matrix> = cols.iter().collect();
    Matrix::hstack(m.field(), m.rows(), &refs)
}

impl Morphism {
    pub fn identity(m: &GridModule) -> Morphism {
        Morphism {
            components: m.dims.iter().map(|&d| Matrix::identity(m.field, d)).collect(),
        }
    }

    pub fn zero(src: &GridModule, dst: &GridModule) -> Morphism {
        Morphism {
            components: src
                .dims
                .iter()
                .zip(&dst.dims)
                .map(|(&s, &t)| Matrix::zeros(src.field, t, s))
                .collect(),
        }
    }

    /// `self` after `first`.
    pub fn compose(&self, first: &Morphism) -> Morphism {
        Morphism {
            components: self
                .components
                .iter()
                .zip(&first.components)
                .map(|(a, b)| a.mul(b))
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    /// Shapes match and every naturality square on a cover commutes.
    pub fn is_natural(&self, src: &GridModule, dst: &GridModule) -> bool {
        if !src.same_base(dst) || self.components.len() != src.grid.len() {
            return false;
        }
        for (i, c) in self.components.iter().enumerate() {
            if c.shape() != (dst.dims[i], src.dims[i]) {
                return false;
            }
        }
        for axis in 0..src.dim() {
            for idx in 0..src.grid.len() {
                if src.grid.cover(idx, axis).is_none() {
                    continue;
                }
                let j = src.grid.cover(idx, axis).unwrap();
                let lhs = dst.maps[axis][idx].as_ref().unwrap().mul(&self.components[idx]);
                let rhs = self.components[j].mul(src.maps[axis][idx].as_ref().unwrap());
                if lhs != rhs {
                    return false;
                }
            }
        }
        true
    }
}
