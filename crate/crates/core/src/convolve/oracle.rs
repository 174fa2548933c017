//! Sheaf and cosheaf convolution of grid modules as a limit over
//! `{(a, b) : a + b >= x}` or a colimit over `{(a, b) : a + b <= x}`.
//!
//! Both factors are stored stabilized on boxes `E_A`, `E_B`, so the diagram
//! factors through the clamp map onto `E_A x E_B`. The clamp image of the
//! sheaf index set is the up-set of pairs with, per axis, `α = hi_A`,
//! `β = hi_B` or `α + β >= x`; the cosheaf image is the dual down-set. A limit
//! over an up-set is the subspace of families on its minimal elements that
//! agree at joins, and it suffices to impose agreement on pairs of minimal
//! elements that are neighbours along a single axis. Colimits are dual.

use crate::error::{Error, Result};
use crate::exactalg::{self, Field, Matrix};
use crate::interval::Mode;
use crate::pmodule::{GridModule, Morphism};
use crate::poset::{self, GridPoset};

/// Extremal elements `(α, β)` on one axis, with `α` increasing and `β`
/// strictly decreasing: minimal elements for the sheaf side, maximal for
/// the cosheaf side.
fn staircase(mode: Mode, x: i64, (lo_a, hi_a): (i64, i64), (lo_b, hi_b): (i64, i64)) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    match mode {
        Mode::Sheaf => {
            let beta = |al: i64| if al == hi_a { lo_b } else { (x - al).clamp(lo_b, hi_b) };
            for al in lo_a..=hi_a {
                if al == lo_a || beta(al) < beta(al - 1) {
                    out.push((al, beta(al)));
                }
            }
        }
        Mode::Cosheaf => {
            let beta = |al: i64| if al == lo_a { hi_b } else { (x - al).clamp(lo_b, hi_b) };
            for al in lo_a..=hi_a {
                if al == hi_a || beta(al) > beta(al + 1) {
                    out.push((al, beta(al)));
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
struct Elem {
    ia: usize,
    ib: usize,
    a: Vec<i64>,
    b: Vec<i64>,
}

/// Extremal elements at one point and the neighbour pairs with their join
/// (sheaf) or meet (cosheaf), given as box indices.
#[derive(Clone, Debug)]
struct IndexSet {
    elems: Vec<Elem>,
    links: Vec<(usize, usize, usize, usize)>,
}

fn index_set(mode: Mode, x: &[i64], abox: &GridPoset, bbox: &GridPoset) -> IndexSet {
    let n = x.len();
    let stairs: Vec<Vec<(i64, i64)>> = (0..n)
        .map(|k| {
            staircase(
                mode,
                x[k],
                (abox.lo()[k], abox.hi()[k]),
                (bbox.lo()[k], bbox.hi()[k]),
            )
        })
        .collect();
    let lens: Vec<usize> = stairs.iter().map(Vec::len).collect();
    let count: usize = lens.iter().product();
    let mut strides = vec![1; n];
    for k in (0..n.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * lens[k + 1];
    }
    let tuple = |mut e: usize| -> Vec<usize> {
        let mut t = vec![0; n];
        for k in 0..n {
            t[k] = e / strides[k];
            e %= strides[k];
        }
        t
    };
    let mut elems = Vec::with_capacity(count);
    let mut links = Vec::new();
    for e in 0..count {
        let t = tuple(e);
        let a: Vec<i64> = (0..n).map(|k| stairs[k][t[k]].0).collect();
        let b: Vec<i64> = (0..n).map(|k| stairs[k][t[k]].1).collect();
        for k in 0..n {
            if t[k] + 1 < lens[k] {
                let (mut ja, mut jb) = (a.clone(), b.clone());
                let (next_a, next_b) = stairs[k][t[k] + 1];
                match mode {
                    Mode::Sheaf => ja[k] = next_a,
                    Mode::Cosheaf => jb[k] = next_b,
                }
                links.push((e, e + strides[k], abox.index(&ja).unwrap(), bbox.index(&jb).unwrap()));
            }
        }
        elems.push(Elem {
            ia: abox.index(&a).unwrap(),
            ib: bbox.index(&b).unwrap(),
            a,
            b,
        });
    }
    IndexSet { elems, links }
}

#[derive(Clone, Debug)]
struct Stalk {
    index: IndexSet,
    off: Vec<usize>,
    total: usize,
    /// Sheaf side: kernel basis (columns). Cosheaf side: cokernel projection.
    basis: Matrix,
    /// Cosheaf side: a right inverse of the projection.
    rinv: Option<Matrix>,
}

/// A convolution together with the per-point data needed to push morphisms
/// of the factors through it.
#[derive(Clone, Debug)]
pub(crate) struct Convolved {
    pub module: GridModule,
    mode: Mode,
    abox: GridPoset,
    bbox: GridPoset,
    stalks: Vec<Stalk>,
}

fn pair_map(a: &GridModule, b: &GridModule, (ia, ib): (usize, usize), (ja, jb): (usize, usize)) -> Matrix {
    a.map_between(ia, ja).kron(&b.map_between(ib, jb))
}

/// Per axis, the range of points outside which the convolution is constant.
pub(crate) fn safe_range(abox: &GridPoset, bbox: &GridPoset) -> GridPoset {
    let n = abox.dim();
    GridPoset::new(
        (0..n).map(|k| abox.lo()[k] + bbox.lo()[k] - 1).collect(),
        (0..n).map(|k| abox.hi()[k] + bbox.hi()[k] + 1).collect(),
    )
    .unwrap()
}

fn check_window(window: &GridPoset, safe: &GridPoset) -> Result<()> {
    if window.dim() != safe.dim() {
        return Err(Error::DimensionMismatch(format!(
            "window of dimension {} for modules of dimension {}",
            window.dim(),
            safe.dim()
        )));
    }
    for k in 0..safe.dim() {
        if window.lo()[k] < safe.lo()[k] {
            return Err(Error::WindowOutsideSafeRange {
                axis: k,
                side: "lower",
                requested: window.lo()[k],
                limit: safe.lo()[k],
            });
        }
        if window.hi()[k] > safe.hi()[k] {
            return Err(Error::WindowOutsideSafeRange {
                axis: k,
                side: "upper",
                requested: window.hi()[k],
                limit: safe.hi()[k],
            });
        }
    }
    Ok(())
}

fn check_pair(m: &GridModule, n: &GridModule) -> Result<()> {
    if m.field() != n.field() || m.dim() != n.dim() {
        return Err(Error::BaseMismatch("convolution factors over different fields or dimensions".into()));
    }
    Ok(())
}

/// Convolution of two stabilized modules on `window` (which must lie in the
/// safe range of their boxes).
pub(crate) fn convolve_stabilized(mode: Mode, a: &GridModule, b: &GridModule, window: &GridPoset) -> Result<Convolved> {
    let field = a.field();
    let (abox, bbox) = (a.grid().clone(), b.grid().clone());
    let safe = safe_range(&abox, &bbox);
    check_window(window, &safe)?;
    let stalks: Vec<Stalk> = window
        .points()
        .map(|x| stalk(mode, field, a, b, &x, &abox, &bbox))
        .collect();
    let dims: Vec<usize> = stalks
        .iter()
        .map(|s| match mode {
            Mode::Sheaf => s.basis.cols(),
            Mode::Cosheaf => s.basis.rows(),
        })
        .collect();
    let n = window.dim();
    let module = GridModule::new(
        field,
        window.clone(),
        dims,
        |axis, idx| {
            let j = window.cover(idx, axis).unwrap();
            transition(mode, field, a, b, &stalks[idx], &stalks[j])
        },
        (0..n).map(|k| window.lo()[k] == safe.lo()[k]).collect(),
        (0..n).map(|k| window.hi()[k] == safe.hi()[k]).collect(),
    )?;
    Ok(Convolved {
        module,
        mode,
        abox,
        bbox,
        stalks,
    })
}

fn stalk(mode: Mode, field: Field, a: &GridModule, b: &GridModule, x: &[i64], abox: &GridPoset, bbox: &GridPoset) -> Stalk {
    let index = index_set(mode, x, abox, bbox);
    let mut off = Vec::with_capacity(index.elems.len());
    let mut total = 0;
    for e in &index.elems {
        off.push(total);
        total += a.dim_at_index(e.ia) * b.dim_at_index(e.ib);
    }
    let neg = field.neg(1);
    let (basis, rinv) = match mode {
        Mode::Sheaf => {
            let mut blocks = Vec::new();
            for &(p, q, ja, jb) in &index.links {
                let d = a.dim_at_index(ja) * b.dim_at_index(jb);
                if d == 0 {
                    continue;
                }
                let (ep, eq) = (&index.elems[p], &index.elems[q]);
                let mut row = Matrix::zeros(field, d, total);
                row.put_block(0, off[p], &pair_map(a, b, (ep.ia, ep.ib), (ja, jb)));
                row.put_block(0, off[q], &pair_map(a, b, (eq.ia, eq.ib), (ja, jb)).scale(neg));
                blocks.push(row);
            }
            let refs: Vec<&Matrix> = blocks.iter().collect();
            (exactalg::kernel_basis(&Matrix::vstack(field, total, &refs)), None)
        }
        Mode::Cosheaf => {
            let mut blocks = Vec::new();
            for &(p, q, ma, mb) in &index.links {
                let d = a.dim_at_index(ma) * b.dim_at_index(mb);
                if d == 0 {
                    continue;
                }
                let (ep, eq) = (&index.elems[p], &index.elems[q]);
                let mut col = Matrix::zeros(field, total, d);
                col.put_block(off[p], 0, &pair_map(a, b, (ma, mb), (ep.ia, ep.ib)));
                col.put_block(off[q], 0, &pair_map(a, b, (ma, mb), (eq.ia, eq.ib)).scale(neg));
                blocks.push(col);
            }
            let refs: Vec<&Matrix> = blocks.iter().collect();
            let q = exactalg::cokernel_projection(&Matrix::hstack(field, total, &refs));
            let r = exactalg::right_inverse(&q);
            (q, Some(r))
        }
    };
    Stalk {
        index,
        off,
        total,
        basis,
        rinv,
    }
}

/// Structure map between the stalks at `x` and at `y >= x`.
fn transition(mode: Mode, field: Field, a: &GridModule, b: &GridModule, from: &Stalk, to: &Stalk) -> Matrix {
    let mut t = Matrix::zeros(field, to.total, from.total);
    match mode {
        Mode::Sheaf => {
            // every new minimal element lies above some old one
            for (qi, q) in to.index.elems.iter().enumerate() {
                let (pi, p) = from
                    .index
                    .elems
                    .iter()
                    .enumerate()
                    .find(|(_, p)| poset::leq(&p.a, &q.a) && poset::leq(&p.b, &q.b))
                    .expect("index sets shrink along the order");
                t.put_block(to.off[qi], from.off[pi], &pair_map(a, b, (p.ia, p.ib), (q.ia, q.ib)));
            }
            exactalg::solve_exact(&to.basis, &t.mul(&from.basis))
        }
        Mode::Cosheaf => {
            for (pi, p) in from.index.elems.iter().enumerate() {
                let (qi, q) = to
                    .index
                    .elems
                    .iter()
                    .enumerate()
                    .find(|(_, q)| poset::leq(&p.a, &q.a) && poset::leq(&p.b, &q.b))
                    .expect("index sets grow along the order");
                t.put_block(to.off[qi], from.off[pi], &pair_map(a, b, (p.ia, p.ib), (q.ia, q.ib)));
            }
            to.basis.mul(&t).mul(from.rinv.as_ref().unwrap())
        }
    }
}

impl Convolved {
    /// The map `φ ⊗ ψ` induced between two convolutions over the same boxes
    /// and window; `φ` and `ψ` are morphisms of the stabilized factors.
    pub(crate) fn induced(&self, dst: &Convolved, phi: &Morphism, psi: &Morphism) -> Result<Morphism> {
        if self.mode != dst.mode
            || self.abox != dst.abox
            || self.bbox != dst.bbox
            || self.module.grid() != dst.module.grid()
        {
            return Err(Error::BaseMismatch("induced map between convolutions over different boxes".into()));
        }
        let field = self.module.field();
        let components = self
            .stalks
            .iter()
            .zip(&dst.stalks)
            .map(|(s, d)| {
                let mut big = Matrix::zeros(field, d.total, s.total);
                for (i, e) in s.index.elems.iter().enumerate() {
                    big.put_block(d.off[i], s.off[i], &phi.components[e.ia].kron(&psi.components[e.ib]));
                }
                match self.mode {
                    Mode::Sheaf => exactalg::solve_exact(&d.basis, &big.mul(&s.basis)),
                    Mode::Cosheaf => d.basis.mul(&big).mul(s.rinv.as_ref().unwrap()),
                }
            })
            .collect();
        Ok(Morphism { components })
    }
}

/// The range of points outside which `M ∗ N` and `M • N` are constant.
pub fn safe_window(m: &GridModule, n: &GridModule) -> Result<GridPoset> {
    check_pair(m, n)?;
    Ok(safe_range(&m.clamp_box(), &n.clamp_box()))
}

fn oracle(mode: Mode, m: &GridModule, n: &GridModule, window: Option<&GridPoset>) -> Result<GridModule> {
    check_pair(m, n)?;
    let (a, b) = (m.clamped(), n.clamped());
    let w = match window {
        Some(w) => w.clone(),
        None => safe_range(a.grid(), b.grid()),
    };
    Ok(convolve_stabilized(mode, &a, &b, &w)?.module)
}

/// `(M ∗ N)_x = lim_{a + b >= x} M_a ⊗ N_b`, on `window` (default: the whole
/// safe range, with stabilized edges).
pub fn sheaf_convolve_oracle(m: &GridModule, n: &GridModule, window: Option<&GridPoset>) -> Result<GridModule> {
    oracle(Mode::Sheaf, m, n, window)
}

/// `(M • N)_x = colim_{a + b <= x} M_a ⊗ N_b`, which is the graded tensor
/// product.
pub fn cosheaf_convolve_oracle(m: &GridModule, n: &GridModule, window: Option<&GridPoset>) -> Result<GridModule> {
    oracle(Mode::Cosheaf, m, n, window)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::PrincipalSet;

    fn f2() -> Field {
        Field::F2
    }

    fn bar(lo: i64, hi: i64, b: i64, d: i64) -> GridModule {
        let g = GridPoset::line(lo, hi).unwrap();
        let pts: Vec<Vec<i64>> = (b..d).map(|x| vec![x]).collect();
        GridModule::interval_module(f2(), &g, &pts).unwrap()
    }

    fn support(m: &GridModule, range: std::ops::RangeInclusive<i64>) -> Vec<i64> {
        range.filter(|&x| m.dim_at(&[x]) > 0).collect()
    }

    #[test]
    fn staircases() {
        assert_eq!(staircase(Mode::Sheaf, 0, (0, 2), (0, 2)), vec![(0, 0)]);
        assert_eq!(staircase(Mode::Sheaf, 3, (0, 2), (0, 2)), vec![(0, 2), (2, 0)]);
        assert_eq!(staircase(Mode::Sheaf, 2, (0, 3), (0, 3)), vec![(0, 2), (1, 1), (2, 0)]);
        assert_eq!(staircase(Mode::Cosheaf, 2, (0, 3), (0, 3)), vec![(0, 3), (1, 1), (3, 0)]);
    }

    #[test]
    fn sheaf_of_bars() {
        // right-sampled [1,3) is {2,3}, [0,2) is {1,2}, and [3,5) is {4,5}
        let c = sheaf_convolve_oracle(&bar(0, 6, 2, 4), &bar(0, 6, 1, 3), None).unwrap();
        assert!(c.validate());
        assert_eq!(support(&c, -5..=20), vec![4, 5]);
        for x in 4..5 {
            assert_eq!(c.map_z(&[x], &[x + 1]), Matrix::identity(f2(), 1));
        }
    }

    #[test]
    fn cosheaf_of_bars() {
        let c = cosheaf_convolve_oracle(&bar(0, 6, 0, 2), &bar(0, 6, 0, 3), None).unwrap();
        assert!(c.validate());
        assert_eq!(support(&c, -5..=20), vec![0, 1]);
    }

    #[test]
    fn units_and_translations() {
        let g = GridPoset::line(-1, 6).unwrap();
        let m = bar(0, 6, 1, 4);
        for s in [0, 2, -1] {
            let d = GridModule::principal(f2(), &g, &PrincipalSet::down(vec![s]), vec![true], vec![false]).unwrap();
            let c = sheaf_convolve_oracle(&m, &d, None).unwrap();
            assert_eq!(support(&c, -10..=20), (1 + s..4 + s).collect::<Vec<_>>(), "D_{s}");
            let u = GridModule::principal(f2(), &g, &PrincipalSet::up(vec![s]), vec![false], vec![true]).unwrap();
            let c = cosheaf_convolve_oracle(&m, &u, None).unwrap();
            assert_eq!(support(&c, -10..=20), (1 + s..4 + s).collect::<Vec<_>>(), "U_{s}");
        }
    }

    #[test]
    fn window_errors() {
        let m = bar(0, 4, 1, 3);
        let w = safe_window(&m, &m).unwrap();
        let too_far = GridPoset::line(w.lo()[0] - 1, w.hi()[0]).unwrap();
        let err = sheaf_convolve_oracle(&m, &m, Some(&too_far)).unwrap_err();
        assert!(matches!(err, Error::WindowOutsideSafeRange { axis: 0, side: "lower", .. }));
        let too_far = GridPoset::line(w.lo()[0], w.hi()[0] + 3).unwrap();
        let err = cosheaf_convolve_oracle(&m, &m, Some(&too_far)).unwrap_err();
        assert!(matches!(err, Error::WindowOutsideSafeRange { axis: 0, side: "upper", .. }));
        let inner = GridPoset::line(2, 5).unwrap();
        let c = cosheaf_convolve_oracle(&m, &m, Some(&inner)).unwrap();
        assert_eq!(c.stab_left(), &[false]);
    }

    #[test]
    fn two_parameter_units() {
        let g = GridPoset::new(vec![0, 0], vec![2, 2]).unwrap();
        let pts: Vec<Vec<i64>> = g.points().filter(|p| p[0] + p[1] <= 2 && p[0] >= 1).collect();
        let m = GridModule::interval_module(f2(), &g, &pts).unwrap();
        let u = GridModule::principal(f2(), &g, &PrincipalSet::up(vec![0, 1]), vec![false; 2], vec![true; 2]).unwrap();
        let c = cosheaf_convolve_oracle(&m, &u, None).unwrap();
        assert!(c.validate());
        for p in GridPoset::new(vec![-2, -2], vec![5, 5]).unwrap().points() {
            assert_eq!(c.dim_at(&p), m.dim_at(&[p[0], p[1] - 1]), "{p:?}");
        }
        let d = GridModule::principal(f2(), &g, &PrincipalSet::down(vec![1, 0]), vec![true; 2], vec![false; 2]).unwrap();
        let c = sheaf_convolve_oracle(&m, &d, None).unwrap();
        assert!(c.validate());
        for p in GridPoset::new(vec![-2, -2], vec![5, 5]).unwrap().points() {
            assert_eq!(c.dim_at(&p), m.dim_at(&[p[0] - 1, p[1]]), "{p:?}");
        }
    }
}
