//! Modules on finite preorders: sections, cosections, direct and inverse images.

use super::{GridModule, Morphism};
use crate::error::{Error, Result};
use crate::exactalg::{self, Field, Matrix};
use crate::poset::{FinitePreorder, GridPoset, MonotoneMap};

/// A functor from a finite preorder to vector spaces, storing the map of
/// every related pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PosetModule {
    field: Field,
    base: FinitePreorder,
    dims: Vec<usize>,
    /// `maps[i * n + j]` for `i <= j`.
    maps: Vec<Option<Matrix>>,
}

impl PosetModule {
    /// Builds a module from a map for every related pair `i <= j`. Shapes are
    /// checked; functoriality is left to [`PosetModule::validate`].
    pub fn new(
        field: Field,
        base: FinitePreorder,
        dims: Vec<usize>,
        mut pair_map: impl FnMut(usize, usize) -> Matrix,
    ) -> Result<PosetModule> {
        let n = base.len();
        if dims.len() != n {
            return Err(Error::DimensionMismatch(format!("{} dims for {} elements", dims.len(), n)));
        }
        let mut maps = vec![None; n * n];
        for i in 0..n {
            for j in 0..n {
                if !base.leq(i, j) {
                    continue;
                }
                let m = if i == j {
                    Matrix::identity(field, dims[i])
                } else {
                    pair_map(i, j)
                };
                if m.shape() != (dims[j], dims[i]) {
                    return Err(Error::InvalidModule(format!(
                        "map {i} -> {j} has shape {:?}, expected {:?}",
                        m.shape(),
                        (dims[j], dims[i])
                    )));
                }
                maps[i * n + j] = Some(m);
            }
        }
        Ok(PosetModule {
            field,
            base,
            dims,
            maps,
        })
    }

    pub fn zero(field: Field, base: FinitePreorder) -> PosetModule {
        let n = base.len();
        PosetModule::new(field, base, vec![0; n], |_, _| Matrix::zeros(field, 0, 0)).unwrap()
    }

    /// Constant module with stalk `k^d` and identity maps.
    pub fn constant(field: Field, base: FinitePreorder, d: usize) -> PosetModule {
        let n = base.len();
        PosetModule::new(field, base, vec![d; n], |_, _| Matrix::identity(field, d)).unwrap()
    }

    /// Indicator module of `set` (must be convex, otherwise `validate` fails).
    pub fn indicator(field: Field, base: FinitePreorder, mask: &[bool]) -> PosetModule {
        let dims: Vec<usize> = mask.iter().map(|&b| b as usize).collect();
        let d = dims.clone();
        PosetModule::new(field, base, dims, |i, j| {
            if d[i] == 1 && d[j] == 1 {
                Matrix::identity(field, 1)
            } else {
                Matrix::zeros(field, d[j], d[i])
            }
        })
        .unwrap()
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn base(&self) -> &FinitePreorder {
        &self.base
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.dims.iter().all(|&d| d == 0)
    }

    /// Structure map for `i <= j`.
    pub fn map(&self, i: usize, j: usize) -> &Matrix {
        self.maps[i * self.base.len() + j]
            .as_ref()
            .expect("map requested for unrelated elements")
    }

    /// Identities on `i <= i` and `M(j,k) M(i,j) = M(i,k)` for every chain.
    pub fn validate(&self) -> bool {
        let n = self.base.len();
        for i in 0..n {
            if *self.map(i, i) != Matrix::identity(self.field, self.dims[i]) {
                return false;
            }
            for j in 0..n {
                if !self.base.leq(i, j) {
                    continue;
                }
                for k in 0..n {
                    if self.base.leq(j, k) && self.map(j, k).mul(self.map(i, j)) != *self.map(i, k) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// The module of a grid box viewed on the box as a finite poset (flags are
    /// dropped; use the clamped form to keep `Z^n` semantics in a finite box).
    pub fn from_grid(m: &GridModule) -> PosetModule {
        let g = m.grid();
        let base = g.to_preorder();
        PosetModule::new(m.field(), base, m.dims().to_vec(), |i, j| m.map_between(i, j)).unwrap()
    }

    /// Inverse of [`PosetModule::from_grid`] for modules whose base is the
    /// preorder of `grid`.
    pub fn to_grid(&self, grid: &GridPoset, stab_left: Vec<bool>, stab_right: Vec<bool>) -> Result<GridModule> {
        if grid.len() != self.len() {
            return Err(Error::BaseMismatch("grid size differs from the poset".into()));
        }
        GridModule::new(
            self.field,
            grid.clone(),
            self.dims.clone(),
            |axis, idx| self.map(idx, grid.cover(idx, axis).unwrap()).clone(),
            stab_left,
            stab_right,
        )
    }

    /// Reindexes along a monotone assignment from another preorder.
    fn pull(&self, source: &FinitePreorder, assign: &[usize]) -> PosetModule {
        let dims = assign.iter().map(|&y| self.dims[y]).collect();
        PosetModule::new(self.field, source.clone(), dims, |i, j| self.map(assign[i], assign[j]).clone()).unwrap()
    }

    /// Reindexes along the identity of the underlying set onto a finer
    /// preorder (one contained in the base relation).
    pub fn refine(&self, finer: &FinitePreorder) -> Result<PosetModule> {
        if !finer.is_subrelation_of(&self.base) {
            return Err(Error::NonMonotone("the new preorder is not contained in the base".into()));
        }
        let id: Vec<usize> = (0..self.len()).collect();
        Ok(self.pull(finer, &id))
    }

    /// Module on the skeleton, reading each class at its representative.
    pub fn on_skeleton(&self) -> (PosetModule, Vec<usize>) {
        let (sk, class, reps) = self.base.skeleton();
        (self.pull(&sk, &reps), class)
    }

    pub fn direct_sum(&self, other: &PosetModule) -> Result<PosetModule> {
        if self.base != other.base {
            return Err(Error::BaseMismatch("direct sum over different preorders".into()));
        }
        let dims = self.dims.iter().zip(&other.dims).map(|(a, b)| a + b).collect();
        PosetModule::new(self.field, self.base.clone(), dims, |i, j| {
            super::block_diag(self.field, &[self.map(i, j), other.map(i, j)])
        })
    }

    /// Pairs to impose naturality on: covers for partial orders, every
    /// related pair otherwise.
    pub(crate) fn constraint_pairs(&self) -> Vec<(usize, usize)> {
        if self.base.is_partial_order() {
            self.base.covers()
        } else {
            let n = self.len();
            (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .filter(|&(i, j)| i != j && self.base.leq(i, j))
                .collect()
        }
    }

    pub fn is_natural(&self, dst: &PosetModule, phi: &Morphism) -> bool {
        if self.base != dst.base || phi.components.len() != self.len() {
            return false;
        }
        for i in 0..self.len() {
            if phi.components[i].shape() != (dst.dims[i], self.dims[i]) {
                return false;
            }
        }
        self.constraint_pairs().into_iter().all(|(i, j)| {
            dst.map(i, j).mul(&phi.components[i]) == phi.components[j].mul(self.map(i, j))
        })
    }

    /// Block offsets of the stalks of `set` inside their direct sum.
    fn offsets(&self, set: &[usize]) -> (Vec<usize>, usize) {
        let mut off = Vec::with_capacity(set.len());
        let mut t = 0;
        for &s in set {
            off.push(t);
            t += self.dims[s];
        }
        (off, t)
    }

    /// Columns spanning the limit over `set`, inside `⊕_{s in set} M_s`.
    pub(crate) fn sections_basis(&self, set: &[usize]) -> Matrix {
        let (off, total) = self.offsets(set);
        let mut blocks: Vec<Matrix> = Vec::new();
        for (a, &s) in set.iter().enumerate() {
            for (b, &t) in set.iter().enumerate() {
                if a == b || !self.base.leq(s, t) || self.dims[t] == 0 {
                    continue;
                }
                let mut row = Matrix::zeros(self.field, self.dims[t], total);
                row.put_block(0, off[a], self.map(s, t));
                let neg = Matrix::identity(self.field, self.dims[t]).scale(self.field.neg(1));
                row.put_block(0, off[b], &neg);
                blocks.push(row);
            }
        }
        let refs: Vec<&Matrix> = blocks.iter().collect();
        exactalg::kernel_basis(&Matrix::vstack(self.field, total, &refs))
    }

    /// Cokernel projection of the colimit over `set`, out of `⊕_{s in set} M_s`.
    pub(crate) fn cosections_projection(&self, set: &[usize]) -> Matrix {
        let (off, total) = self.offsets(set);
        let mut blocks: Vec<Matrix> = Vec::new();
        for (a, &s) in set.iter().enumerate() {
            for (b, &t) in set.iter().enumerate() {
                if a == b || !self.base.leq(s, t) || self.dims[s] == 0 {
                    continue;
                }
                let mut col = Matrix::zeros(self.field, total, self.dims[s]);
                col.put_block(off[a], 0, &Matrix::identity(self.field, self.dims[s]));
                col.put_block(off[b], 0, &self.map(s, t).scale(self.field.neg(1)));
                blocks.push(col);
            }
        }
        let refs: Vec<&Matrix> = blocks.iter().collect();
        exactalg::cokernel_projection(&Matrix::hstack(self.field, total, &refs))
    }

    /// Restriction of sections from `big` to `small` (a subset), in the
    /// bases returned by `sections_basis`.
    pub(crate) fn restriction(&self, big: &[usize], kb: &Matrix, small: &[usize], ks: &Matrix) -> Matrix {
        let (off, _) = self.offsets(big);
        let mut rows = Vec::new();
        for &s in small {
            let a = big.iter().position(|&x| x == s).expect("restriction to a non-subset");
            rows.extend(off[a]..off[a] + self.dims[s]);
        }
        let projected = kb.select_rows(&rows);
        exactalg::solve_exact(ks, &projected)
    }

    /// Corestriction of cosections from `small` into `big` (a superset).
    pub(crate) fn corestriction(&self, small: &[usize], qs: &Matrix, big: &[usize], qb: &Matrix) -> Matrix {
        let (off_s, total_s) = self.offsets(small);
        let (off_b, total_b) = self.offsets(big);
        let mut inj = Matrix::zeros(self.field, total_b, total_s);
        for (a, &s) in small.iter().enumerate() {
            let b = big.iter().position(|&x| x == s).expect("corestriction into a non-superset");
            inj.put_block(off_b[b], off_s[a], &Matrix::identity(self.field, self.dims[s]));
        }
        qb.mul(&inj).mul(&exactalg::right_inverse(qs))
    }
}

/// Dimension of the limit `Γ(S; M)`.
pub fn sections(m: &PosetModule, set: &[usize]) -> Result<usize> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(m.sections_basis(set).cols())
}

/// Dimension of the colimit `L(S; M)`.
pub fn cosections(m: &PosetModule, set: &[usize]) -> Result<usize> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(m.cosections_projection(set).rows())
}

fn check_source(f: &MonotoneMap, m: &PosetModule) -> Result<()> {
    if f.source() != m.base() {
        return Err(Error::BaseMismatch("module is not on the source of the map".into()));
    }
    Ok(())
}

/// Sheaf direct image: stalk at `y` is `Γ(f⁻¹(U_y); F)`, maps are restrictions.
/// An empty preimage gives a zero stalk.
pub fn direct_image_sheaf(f: &MonotoneMap, m: &PosetModule) -> Result<PosetModule> {
    check_source(f, m)?;
    let q = f.target();
    let pre: Vec<Vec<usize>> = (0..q.len())
        .map(|y| {
            let mask: Vec<bool> = (0..q.len()).map(|z| q.leq(y, z)).collect();
            f.preimage(&mask)
        })
        .collect();
    let bases: Vec<Matrix> = pre.iter().map(|s| m.sections_basis(s)).collect();
    let dims = bases.iter().map(|b| b.cols()).collect();
    PosetModule::new(m.field(), q.clone(), dims, |y, z| {
        m.restriction(&pre[y], &bases[y], &pre[z], &bases[z])
    })
}

/// Cosheaf direct image: stalk at `y` is `L(f⁻¹(D_y); F)`, maps are
/// corestrictions.
pub fn direct_image_cosheaf(f: &MonotoneMap, m: &PosetModule) -> Result<PosetModule> {
    check_source(f, m)?;
    let q = f.target();
    let pre: Vec<Vec<usize>> = (0..q.len())
        .map(|y| {
            let mask: Vec<bool> = (0..q.len()).map(|z| q.leq(z, y)).collect();
            f.preimage(&mask)
        })
        .collect();
    let projs: Vec<Matrix> = pre.iter().map(|s| m.cosections_projection(s)).collect();
    let dims = projs.iter().map(|p| p.rows()).collect();
    PosetModule::new(m.field(), q.clone(), dims, |y, z| {
        m.corestriction(&pre[y], &projs[y], &pre[z], &projs[z])
    })
}

/// `f⁻¹G`: stalk `G_{f(x)}`, maps `G_{f(a) <= f(b)}`.
pub fn inverse_image(f: &MonotoneMap, g: &PosetModule) -> Result<PosetModule> {
    if f.target() != g.base() {
        return Err(Error::BaseMismatch("module is not on the target of the map".into()));
    }
    Ok(g.pull(f.source(), f.assignment()))
}

#[cfg(test)]
mod tests {
    use super::super::hom::poset_hom_space;
    use super::*;

    fn f2() -> Field {
        Field::F2
    }

    fn line_module(lo: i64, hi: i64, support: &[i64]) -> PosetModule {
        let g = GridPoset::line(lo, hi).unwrap();
        let pts: Vec<Vec<i64>> = support.iter().map(|&x| vec![x]).collect();
        PosetModule::from_grid(&GridModule::interval_module(f2(), &g, &pts).unwrap())
    }

    #[test]
    fn sections_examples() {
        let m = line_module(0, 5, &[2, 3, 4, 5]);
        let all: Vec<usize> = (0..6).collect();
        assert_eq!(sections(&m, &all).unwrap(), 0);
        assert_eq!(cosections(&m, &all).unwrap(), 1);
        for x in 0..6 {
            let up = m.base().up_set(x);
            let down = m.base().down_set(x);
            assert_eq!(sections(&m, &up).unwrap(), m.dims()[x]);
            assert_eq!(cosections(&m, &down).unwrap(), m.dims()[x]);
        }
        assert!(matches!(sections(&m, &[]), Err(Error::EmptySet)));
    }

    #[test]
    fn direct_image_examples() {
        let src = GridPoset::line(0, 2).unwrap().to_preorder();
        let tgt = GridPoset::line(0, 1).unwrap().to_preorder();
        let f = MonotoneMap::new(src.clone(), tgt.clone(), vec![0, 1, 1]).unwrap();
        let m = line_module(0, 2, &[1, 2]);
        let pushed = direct_image_cosheaf(&f, &m).unwrap();
        assert_eq!(pushed.dims(), &[0, 1]);
        assert!(pushed.validate());

        let id = MonotoneMap::identity(&src);
        assert_eq!(direct_image_sheaf(&id, &m).unwrap().dims(), m.dims());
        assert_eq!(direct_image_cosheaf(&id, &m).unwrap().dims(), m.dims());

        // constant map to q = 0 in a 2-chain
        let c = MonotoneMap::new(src.clone(), tgt.clone(), vec![0, 0, 0]).unwrap();
        let full = sections(&m, &[0, 1, 2]).unwrap();
        let s = direct_image_sheaf(&c, &m).unwrap();
        assert_eq!(s.dims(), &[full, 0]);
    }

    #[test]
    fn inverse_image_examples() {
        let src = GridPoset::line(0, 2).unwrap().to_preorder();
        let tgt = GridPoset::line(0, 5).unwrap().to_preorder();
        let g = line_module(0, 5, &[1, 2, 3]);
        let inc = MonotoneMap::new(src.clone(), tgt.clone(), vec![0, 1, 2]).unwrap();
        assert_eq!(inverse_image(&inc, &g).unwrap().dims(), &[0, 1, 1]);
        let c = MonotoneMap::new(src, tgt.clone(), vec![2, 2, 2]).unwrap();
        let pulled = inverse_image(&c, &g).unwrap();
        assert_eq!(pulled.dims(), &[1, 1, 1]);
        assert!(pulled.validate());
        let id = MonotoneMap::identity(&tgt);
        assert_eq!(inverse_image(&id, &g).unwrap(), g);
    }

    #[test]
    fn adjunction_small_case() {
        let src = GridPoset::line(0, 2).unwrap().to_preorder();
        let tgt = GridPoset::line(0, 1).unwrap().to_preorder();
        let f = MonotoneMap::new(src, tgt, vec![0, 1, 1]).unwrap();
        let m = line_module(0, 2, &[0, 1]);
        let g = line_module(0, 1, &[0, 1]);
        let lhs = poset_hom_space(&inverse_image(&f, &g).unwrap(), &m).unwrap();
        let rhs = poset_hom_space(&g, &direct_image_sheaf(&f, &m).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
        let lhs = poset_hom_space(&direct_image_cosheaf(&f, &m).unwrap(), &g).unwrap();
        let rhs = poset_hom_space(&m, &inverse_image(&f, &g).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }
}
