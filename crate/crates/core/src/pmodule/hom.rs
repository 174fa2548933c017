//! Spaces of natural transformations and the internal hom.

use super::{GridModule, Morphism, PosetModule};
use crate::error::{Error, Result};
use crate::exactalg::{self, Field, Matrix};
use crate::poset::GridPoset;

/// Layout of the unknowns `φ_i` (row-major, `dst_i x src_i`) of a naturality
/// system. Points where either stalk vanishes carry no unknowns.
pub(crate) struct HomLayout {
    field: Field,
    src: Vec<usize>,
    dst: Vec<usize>,
    off: Vec<usize>,
    total: usize,
}

impl HomLayout {
    pub(crate) fn new(field: Field, src: &[usize], dst: &[usize]) -> HomLayout {
        let mut off = Vec::with_capacity(src.len());
        let mut total = 0;
        for (s, d) in src.iter().zip(dst) {
            off.push(total);
            total += s * d;
        }
        HomLayout {
            field,
            src: src.to_vec(),
            dst: dst.to_vec(),
            off,
            total,
        }
    }

    pub(crate) fn total(&self) -> usize {
        self.total
    }

    /// Rows expressing `D φ_i - φ_j S = 0` for a pair `i -> j` with maps
    /// `S: src_i -> src_j` and `D: dst_i -> dst_j`.
    fn constraint(&self, i: usize, j: usize, s: &Matrix, d: &Matrix) -> Option<Matrix> {
        let (si, sj, di, dj) = (self.src[i], self.src[j], self.dst[i], self.dst[j]);
        if dj == 0 || si == 0 || (di == 0 && sj == 0) {
            return None;
        }
        let f = self.field;
        let mut rows = Matrix::zeros(f, dj * si, self.total);
        for r in 0..dj {
            for c in 0..si {
                let row = r * si + c;
                for t in 0..di {
                    let v = d.get(r, t);
                    if v != 0 {
                        let col = self.off[i] + t * si + c;
                        rows.set(row, col, f.add(rows.get(row, col), v));
                    }
                }
                for t in 0..sj {
                    let v = s.get(t, c);
                    if v != 0 {
                        let col = self.off[j] + r * sj + t;
                        rows.set(row, col, f.sub(rows.get(row, col), v));
                    }
                }
            }
        }
        Some(rows)
    }

    pub(crate) fn solve<'a>(&self, pairs: impl Iterator<Item = (usize, usize, &'a Matrix, &'a Matrix)>) -> Vec<Vec<u32>> {
        let blocks: Vec<Matrix> = pairs.filter_map(|(i, j, s, d)| self.constraint(i, j, s, d)).collect();
        let refs: Vec<&Matrix> = blocks.iter().collect();
        let system = Matrix::vstack(self.field, self.total, &refs);
        let k = exactalg::kernel_basis(&system);
        (0..k.cols()).map(|c| k.col_vec(c)).collect()
    }

    pub(crate) fn to_morphism(&self, v: &[u32]) -> Morphism {
        Morphism {
            components: (0..self.src.len())
                .map(|i| {
                    let mut m = Matrix::zeros(self.field, self.dst[i], self.src[i]);
                    for r in 0..self.dst[i] {
                        for c in 0..self.src[i] {
                            m.set(r, c, v[self.off[i] + r * self.src[i] + c]);
                        }
                    }
                    m
                })
                .collect(),
        }
    }

    pub(crate) fn flatten(&self, phi: &Morphism) -> Vec<u32> {
        let mut v = vec![0; self.total];
        for (i, m) in phi.components.iter().enumerate() {
            for r in 0..self.dst[i] {
                for c in 0..self.src[i] {
                    v[self.off[i] + r * self.src[i] + c] = m.get(r, c);
                }
            }
        }
        v
    }
}

/// A basis of `Hom(M, N)` for `Z^n` modules, realized on a common box where
/// both modules are stored in clamped form.
#[derive(Clone, Debug)]
pub struct HomSpace {
    pub grid: GridPoset,
    pub source: GridModule,
    pub target: GridModule,
    pub basis: Vec<Morphism>,
}

impl HomSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

fn check_compatible(m: &GridModule, n: &GridModule) -> Result<()> {
    if m.field() != n.field() || m.dim() != n.dim() {
        return Err(Error::BaseMismatch(format!(
            "modules over F_{} in dimension {} and F_{} in dimension {}",
            m.field().modulus(),
            m.dim(),
            n.field().modulus(),
            n.dim()
        )));
    }
    Ok(())
}

/// Natural transformations between two modules on the same box and flags.
pub(crate) fn grid_hom_same_box(m: &GridModule, n: &GridModule) -> (HomLayout, Vec<Morphism>) {
    let layout = HomLayout::new(m.field(), m.dims(), n.dims());
    let g = m.grid().clone();
    let pairs = (0..m.dim()).flat_map(|axis| {
        let g = g.clone();
        (0..g.len()).filter_map(move |idx| g.cover(idx, axis).map(|j| (axis, idx, j)))
    });
    let pairs: Vec<(usize, usize, usize)> = pairs.collect();
    let sols = layout.solve(
        pairs
            .iter()
            .map(|&(axis, i, j)| (i, j, m.cover_map(axis, i).unwrap(), n.cover_map(axis, i).unwrap())),
    );
    let basis = sols.iter().map(|v| layout.to_morphism(v)).collect();
    (layout, basis)
}

pub fn hom_basis(m: &GridModule, n: &GridModule) -> Result<HomSpace> {
    check_compatible(m, n)?;
    let b = m.clamp_box().hull(&n.clamp_box());
    let (ml, nl) = (m.lift(&b)?, n.lift(&b)?);
    let (_, basis) = grid_hom_same_box(&ml, &nl);
    Ok(HomSpace {
        grid: b,
        source: ml,
        target: nl,
        basis,
    })
}

pub fn hom_space(m: &GridModule, n: &GridModule) -> Result<usize> {
    Ok(hom_basis(m, n)?.dim())
}

/// Natural transformations between modules on the same finite preorder.
pub fn poset_hom_basis(m: &PosetModule, n: &PosetModule) -> Result<Vec<Morphism>> {
    if m.base() != n.base() || m.field() != n.field() {
        return Err(Error::BaseMismatch("modules on different preorders".into()));
    }
    let layout = HomLayout::new(m.field(), m.dims(), n.dims());
    let pairs = m.constraint_pairs();
    let sols = layout.solve(pairs.iter().map(|&(i, j)| (i, j, m.map(i, j), n.map(i, j))));
    Ok(sols.iter().map(|v| layout.to_morphism(v)).collect())
}

pub fn poset_hom_space(m: &PosetModule, n: &PosetModule) -> Result<usize> {
    Ok(poset_hom_basis(m, n)?.len())
}

/// `Hom(M, N)_x = Hom(M, N(x))`, with maps given by post-composition with the
/// structure maps `N(x) -> N(x + e_k)`. The result lives on
/// `[lo_N - hi_M, hi_N - lo_M]` (clamped boxes) with every edge stabilized,
/// beyond which it is constant.
pub fn internal_hom(m: &GridModule, n: &GridModule) -> Result<GridModule> {
    check_compatible(m, n)?;
    let field = m.field();
    let (em, en) = (m.clamp_box(), n.clamp_box());
    let d = m.dim();
    let out = GridPoset::new(
        (0..d).map(|k| en.lo()[k] - em.hi()[k]).collect(),
        (0..d).map(|k| en.hi()[k] - em.lo()[k]).collect(),
    )?;
    struct Stalk {
        grid: GridPoset,
        layout: HomLayout,
        basis_cols: Matrix,
        basis: Vec<Morphism>,
    }
    let stalks: Vec<Stalk> = out
        .points()
        .map(|x| {
            let nx = n.shift(&x);
            let b = em.hull(&nx.clamp_box());
            let (ml, nl) = (m.lift(&b).unwrap(), nx.lift(&b).unwrap());
            let (layout, basis) = grid_hom_same_box(&ml, &nl);
            let cols: Vec<Matrix> = basis
                .iter()
                .map(|phi| Matrix::column(field, &layout.flatten(phi)))
                .collect();
            let refs: Vec<&Matrix> = cols.iter().collect();
            let basis_cols = Matrix::hstack(field, layout.total(), &refs);
            Stalk {
                grid: b,
                layout,
                basis_cols,
                basis,
            }
        })
        .collect();
    let dims = stalks.iter().map(|s| s.basis.len()).collect();
    GridModule::new(
        field,
        out.clone(),
        dims,
        |axis, idx| {
            let x = out.point(idx);
            let j = out.cover(idx, axis).unwrap();
            let (from, to) = (&stalks[idx], &stalks[j]);
            let cols: Vec<Matrix> = from
                .basis
                .iter()
                .map(|phi| {
                    let comps = to
                        .grid
                        .points()
                        .map(|z| {
                            // component of phi at z (clamped into its own box), then N_{x+z} -> N_{x+z+e}
                            let zc: Vec<i64> = (0..d)
                                .map(|k| z[k].clamp(from.grid.lo()[k], from.grid.hi()[k]))
                                .collect();
                            let c = &phi.components[from.grid.index(&zc).unwrap()];
                            let a: Vec<i64> = (0..d).map(|k| x[k] + z[k]).collect();
                            let mut b = a.clone();
                            b[axis] += 1;
                            n.map_z(&a, &b).mul(c)
                        })
                        .collect();
                    Matrix::column(field, &to.layout.flatten(&Morphism { components: comps }))
                })
                .collect();
            let refs: Vec<&Matrix> = cols.iter().collect();
            let pushed = Matrix::hstack(field, to.layout.total(), &refs);
            exactalg::solve_exact(&to.basis_cols, &pushed)
        },
        vec![true; d],
        vec![true; d],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> Field {
        Field::F2
    }

    fn interval(lo: i64, hi: i64, support: &[i64]) -> GridModule {
        let g = GridPoset::line(lo, hi).unwrap();
        let pts: Vec<Vec<i64>> = support.iter().map(|&x| vec![x]).collect();
        GridModule::interval_module(f2(), &g, &pts).unwrap()
    }

    #[test]
    fn hom_examples() {
        let m = interval(0, 1, &[0, 1]);
        assert_eq!(hom_space(&m, &m).unwrap(), 1);
        assert_eq!(hom_space(&interval(0, 1, &[0]), &interval(0, 1, &[1])).unwrap(), 0);
        let mm = m.direct_sum(&m).unwrap();
        assert_eq!(hom_space(&m, &mm).unwrap(), 2 * hom_space(&m, &m).unwrap());
        // k[1,3) -> k[0,2) is nonzero, the other direction is zero
        assert_eq!(hom_space(&interval(0, 4, &[1, 2]), &interval(0, 4, &[0, 1])).unwrap(), 1);
        assert_eq!(hom_space(&interval(0, 4, &[0, 1]), &interval(0, 4, &[1, 2])).unwrap(), 0);
    }

    #[test]
    fn hom_basis_is_natural() {
        let m = interval(0, 4, &[1, 2, 3]);
        let n = interval(0, 4, &[0, 1, 2]);
        let h = hom_basis(&m, &n).unwrap();
        assert_eq!(h.dim(), 1);
        assert!(h.basis[0].is_natural(&h.source, &h.target));
    }

    #[test]
    fn internal_hom_examples() {
        let g = GridPoset::line(0, 5).unwrap();
        let all: Vec<Vec<i64>> = g.points().collect();
        let m = GridModule::interval_module(f2(), &g, &all)
            .unwrap()
            .with_flags(vec![false], vec![true])
            .unwrap();
        let h = internal_hom(&m, &m).unwrap();
        assert!(h.validate());
        for x in -10..10 {
            assert_eq!(h.dim_at(&[x]), (x >= 0) as usize, "x = {x}");
        }
        let z = GridModule::zero(f2(), g.clone());
        assert!(internal_hom(&m, &z).unwrap().is_zero());

        let a = interval(0, 4, &[1, 2, 3]);
        let b = interval(0, 4, &[0, 1, 2, 3]);
        let h = internal_hom(&a, &b).unwrap();
        assert_eq!(h.dim_at(&[0]), hom_space(&a, &b).unwrap());
        assert!(h.validate());
    }
}
