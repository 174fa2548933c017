//! Seeded random instances: barcodes, grid and poset modules, posets,
//! monotone maps and small simplicial complexes.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::exactalg::{Field, Matrix};
use crate::interval::{Barcode, Ext, Interval};
use crate::pmodule::{GridModule, Morphism, PosetModule};
use crate::poset::{self, FinitePreorder, GridPoset};
use crate::stability::SimplicialComplex;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `[a, b)` with `lo <= a < b <= hi`.
pub fn interval(rng: &mut impl Rng, lo: i64, hi: i64) -> Interval {
    let a = rng.gen_range(lo..hi);
    let b = rng.gen_range(a + 1..=hi);
    Interval::co_int(a, b)
}

/// Up to `max_bars` bars with integer ends in `[lo, hi]`; with
/// `infinite_prob > 0` some bars get an infinite right end.
pub fn barcode(rng: &mut impl Rng, max_bars: usize, lo: i64, hi: i64, infinite_prob: f64) -> Barcode {
    let k = rng.gen_range(0..=max_bars);
    Barcode::from_intervals((0..k).map(|_| {
        let i = interval(rng, lo, hi);
        if rng.gen_bool(infinite_prob) {
            Interval::co(i.left.value, Ext::PosInf)
        } else {
            i
        }
    }))
}

/// Image of a random morphism `⊕ k[U_{x_i}] -> ⊕ k[D_{y_j}]` on `grid`,
/// with at most `max_gens` summands on each side. Such a morphism is any
/// choice of scalars `c_ij`, acting by `c_ij` on `U_{x_i} ∩ D_{y_j}`, so
/// stalks have dimension at most `max_gens`.
pub fn grid_module(rng: &mut impl Rng, field: Field, grid: &GridPoset, max_gens: usize) -> GridModule {
    let pts: Vec<Vec<i64>> = grid.points().collect();
    let ups: Vec<Vec<i64>> = (0..rng.gen_range(1..=max_gens)).map(|_| pts.choose(rng).unwrap().clone()).collect();
    let downs: Vec<Vec<i64>> = (0..rng.gen_range(1..=max_gens)).map(|_| pts.choose(rng).unwrap().clone()).collect();
    let coef: Vec<Vec<u32>> = downs
        .iter()
        .map(|_| ups.iter().map(|_| rng.gen_range(0..field.modulus())).collect())
        .collect();
    let n = grid.dim();
    let flags = vec![false; n];
    let sum = |set: &[Vec<i64>], up: bool| {
        let parts: Vec<GridModule> = set
            .iter()
            .map(|x| {
                let dims = pts
                    .iter()
                    .map(|z| if up { poset::leq(x, z) } else { poset::leq(z, x) } as usize)
                    .collect();
                GridModule::indicator(field, grid.clone(), dims, flags.clone(), flags.clone()).unwrap()
            })
            .collect();
        let mut acc = GridModule::zero(field, grid.clone());
        for p in &parts {
            acc = acc.direct_sum(p).unwrap();
        }
        acc
    };
    let (src, dst) = (sum(&ups, true), sum(&downs, false));
    let components = pts
        .iter()
        .map(|z| {
            let cols: Vec<usize> = (0..ups.len()).filter(|&i| poset::leq(&ups[i], z)).collect();
            let rows: Vec<usize> = (0..downs.len()).filter(|&j| poset::leq(z, &downs[j])).collect();
            let mut m = Matrix::zeros(field, rows.len(), cols.len());
            for (r, &j) in rows.iter().enumerate() {
                for (c, &i) in cols.iter().enumerate() {
                    m.set(r, c, coef[j][i]);
                }
            }
            m
        })
        .collect();
    let phi = Morphism { components };
    debug_assert!(phi.is_natural(&src, &dst));
    GridModule::image(&src, &dst, &phi).unwrap().0
}

/// A one-parameter module on `[lo, hi]` as in [`grid_module`].
pub fn line_module(rng: &mut impl Rng, field: Field, lo: i64, hi: i64, max_gens: usize) -> GridModule {
    grid_module(rng, field, &GridPoset::line(lo, hi).unwrap(), max_gens)
}

/// A random partial order on `0..n` refining the index order.
pub fn partial_order(rng: &mut impl Rng, n: usize, edge_prob: f64) -> FinitePreorder {
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(edge_prob) {
                pairs.push((i, j));
            }
        }
    }
    FinitePreorder::from_relations(n, &pairs).unwrap()
}

/// Image of a random morphism from a sum of principal up-set modules to a
/// sum of principal down-set modules on a finite poset.
pub fn poset_module(rng: &mut impl Rng, field: Field, base: &FinitePreorder, max_gens: usize) -> PosetModule {
    let n = base.len();
    let ups: Vec<usize> = (0..rng.gen_range(1..=max_gens)).map(|_| rng.gen_range(0..n)).collect();
    let downs: Vec<usize> = (0..rng.gen_range(1..=max_gens)).map(|_| rng.gen_range(0..n)).collect();
    let coef: Vec<Vec<u32>> = downs
        .iter()
        .map(|_| ups.iter().map(|_| rng.gen_range(0..field.modulus())).collect())
        .collect();
    let at = |z: usize| -> Matrix {
        let cols: Vec<usize> = (0..ups.len()).filter(|&i| base.leq(ups[i], z)).collect();
        let rows: Vec<usize> = (0..downs.len()).filter(|&j| base.leq(z, downs[j])).collect();
        let mut m = Matrix::zeros(field, rows.len(), cols.len());
        for (r, &j) in rows.iter().enumerate() {
            for (c, &i) in cols.iter().enumerate() {
                m.set(r, c, coef[j][i]);
            }
        }
        m
    };
    let images: Vec<Matrix> = (0..n).map(|z| crate::pmodule::column_basis(&at(z))).collect();
    let dims = images.iter().map(Matrix::cols).collect();
    let dst = crate::convolve::principal_sum(field, base, &downs, crate::convolve::ResolutionKind::Injective);
    PosetModule::new(field, base.clone(), dims, |i, j| {
        crate::exactalg::solve_matrix(&images[j], &dst.map(i, j).mul(&images[i]))
            .unwrap()
            .expect("the image is a submodule")
    })
    .unwrap()
}

/// Monotone integer values on a poset whose order refines the index order:
/// each value is at least the values below it.
pub fn monotone_values(rng: &mut impl Rng, base: &FinitePreorder, dim: usize, max_step: i64) -> Vec<Vec<i64>> {
    let n = base.len();
    let mut vals: Vec<Vec<i64>> = Vec::with_capacity(n);
    for j in 0..n {
        let v = (0..dim)
            .map(|k| {
                let floor = (0..j).filter(|&i| base.leq(i, j)).map(|i| vals[i][k]).max().unwrap_or(0);
                floor + rng.gen_range(0..=max_step)
            })
            .collect();
        vals.push(v);
    }
    vals
}

/// A perturbation of monotone values, kept monotone, with sup-distance at
/// most `bound` from the input.
pub fn perturb_monotone(rng: &mut impl Rng, base: &FinitePreorder, vals: &[Vec<i64>], bound: i64) -> Vec<Vec<i64>> {
    let n = base.len();
    let mut out: Vec<Vec<i64>> = Vec::with_capacity(n);
    for j in 0..n {
        let v = (0..vals[j].len())
            .map(|k| {
                let floor = (0..j).filter(|&i| base.leq(i, j)).map(|i| out[i][k]).max().unwrap_or(i64::MIN);
                let want = vals[j][k] + rng.gen_range(-bound..=bound);
                // raising to the floor stays within the bound: the floor is at
                // most vals[i][k] + bound <= vals[j][k] + bound
                want.max(floor)
            })
            .collect();
        out.push(v);
    }
    out
}

/// A random complex on up to `max_vertices` vertices with at most
/// `max_simplices` simplices: all vertices, some edges, and triangles whose
/// edges are present.
pub fn simplicial_complex(rng: &mut impl Rng, max_vertices: usize, max_simplices: usize) -> SimplicialComplex {
    let nv = rng.gen_range(1..=max_vertices.min(max_simplices));
    let mut simplices: Vec<Vec<usize>> = (0..nv).map(|v| vec![v]).collect();
    let mut edges: Vec<(usize, usize)> = (0..nv).flat_map(|i| (i + 1..nv).map(move |j| (i, j))).collect();
    edges.shuffle(rng);
    let mut chosen = Vec::new();
    for (i, j) in edges {
        if simplices.len() >= max_simplices {
            break;
        }
        if rng.gen_bool(0.6) {
            simplices.push(vec![i, j]);
            chosen.push((i, j));
        }
    }
    let has = |a: usize, b: usize| chosen.contains(&(a.min(b), a.max(b)));
    for i in 0..nv {
        for j in i + 1..nv {
            for k in j + 1..nv {
                if simplices.len() < max_simplices && has(i, j) && has(j, k) && has(i, k) && rng.gen_bool(0.4) {
                    simplices.push(vec![i, j, k]);
                }
            }
        }
    }
    SimplicialComplex::new(simplices).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modules_are_valid() {
        let mut r = rng(1);
        for _ in 0..30 {
            let g = GridPoset::new(vec![0, 0], vec![2, 3]).unwrap();
            let m = grid_module(&mut r, Field::F2, &g, 2);
            assert!(m.validate());
            assert!(m.dims().iter().all(|&d| d <= 2));
            let p = partial_order(&mut r, 5, 0.4);
            let pm = poset_module(&mut r, Field::new(3).unwrap(), &p, 2);
            assert!(pm.validate());
            let v = monotone_values(&mut r, &p, 2, 2);
            assert!(poset::is_monotone_into_grid(&p, &v));
            let w = perturb_monotone(&mut r, &p, &v, 2);
            assert!(poset::is_monotone_into_grid(&p, &w));
            assert!(v.iter().zip(&w).all(|(a, b)| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 2)));
        }
    }

    #[test]
    fn deterministic() {
        let a = barcode(&mut rng(7), 5, 0, 10, 0.2);
        let b = barcode(&mut rng(7), 5, 0, 10, 0.2);
        assert_eq!(a, b);
    }
}
