//! Injective and projective resolutions of modules on finite posets and on
//! grid boxes.
//!
//! Injective terms are sums of `k[D_x]`, built from socles: the socle at `x`
//! is the common kernel of the maps to the upper covers of `x`. Projective
//! (flat) terms are sums of `k[U_x]`, built from the generators at `x`, the
//! part of `M_x` not reached from lower covers. On a grid box stored with all
//! edges stabilized these are the down-sets and up-sets of `Z^n` obtained by
//! pulling back along the clamp map.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactalg::{self, Field, Matrix};
use crate::pmodule::{GridModule, Morphism, PosetModule};
use crate::poset::{FinitePreorder, GridPoset};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResolutionKind {
    Projective,
    Injective,
}

/// `0 -> M -> E^0 -> E^1 -> ...` (injective) or `... -> P_1 -> P_0 -> M -> 0`
/// (projective). `generators[j]` lists the base point of every principal
/// summand of `terms[j]`, in summand order.
#[derive(Clone, Debug)]
pub struct Resolution {
    pub kind: ResolutionKind,
    pub module: PosetModule,
    pub generators: Vec<Vec<usize>>,
    pub terms: Vec<PosetModule>,
    /// Injective: `terms[j] -> terms[j + 1]`. Projective: `terms[j + 1] -> terms[j]`.
    pub differentials: Vec<Morphism>,
    /// Injective: `M -> terms[0]`. Projective: `terms[0] -> M`.
    pub augmentation: Morphism,
}

/// `⊕_s k[D_{gens[s]}]` or `⊕_s k[U_{gens[s]}]` with selection matrices.
pub fn principal_sum(field: Field, base: &FinitePreorder, gens: &[usize], kind: ResolutionKind) -> PosetModule {
    let inside = |g: usize, z: usize| match kind {
        ResolutionKind::Injective => base.leq(z, g),
        ResolutionKind::Projective => base.leq(g, z),
    };
    let present: Vec<Vec<usize>> = (0..base.len())
        .map(|z| (0..gens.len()).filter(|&s| inside(gens[s], z)).collect())
        .collect();
    let dims = present.iter().map(Vec::len).collect();
    PosetModule::new(field, base.clone(), dims, |i, j| {
        let mut m = Matrix::zeros(field, present[j].len(), present[i].len());
        for (c, s) in present[i].iter().enumerate() {
            if let Some(r) = present[j].iter().position(|t| t == s) {
                m.set(r, c, 1);
            }
        }
        m
    })
    .unwrap()
}

fn check_poset(m: &PosetModule) -> Result<()> {
    if !m.base().is_partial_order() {
        return Err(Error::Unsupported(
            "resolutions are built on partial orders; pass to the skeleton first".into(),
        ));
    }
    Ok(())
}

fn present(base: &FinitePreorder, gens: &[usize], z: usize, kind: ResolutionKind) -> Vec<usize> {
    (0..gens.len())
        .filter(|&s| match kind {
            ResolutionKind::Injective => base.leq(z, gens[s]),
            ResolutionKind::Projective => base.leq(gens[s], z),
        })
        .collect()
}

/// Embedding of `M` into a sum of `k[D_x]`, one copy per socle dimension.
fn injective_hull(m: &PosetModule) -> (PosetModule, Vec<usize>, Morphism) {
    let field = m.field();
    let base = m.base();
    let covers = base.covers();
    let mut gens = Vec::new();
    let mut retractions = Vec::new();
    for x in 0..base.len() {
        let outgoing: Vec<&Matrix> = covers.iter().filter(|c| c.0 == x).map(|&(_, y)| m.map(x, y)).collect();
        let socle = exactalg::kernel_basis(&Matrix::vstack(field, m.dims()[x], &outgoing));
        for _ in 0..socle.cols() {
            gens.push(x);
        }
        retractions.push(exactalg::left_inverse(&socle));
    }
    let e = principal_sum(field, base, &gens, ResolutionKind::Injective);
    let components = (0..base.len())
        .map(|z| {
            let rows: Vec<Matrix> = present(base, &gens, z, ResolutionKind::Injective)
                .into_iter()
                .map(|s| {
                    let x = gens[s];
                    let copy = gens[..s].iter().filter(|&&g| g == x).count();
                    retractions[x].block(copy, 0, 1, m.dims()[x]).mul(m.map(z, x))
                })
                .collect();
            let refs: Vec<&Matrix> = rows.iter().collect();
            Matrix::vstack(field, m.dims()[z], &refs)
        })
        .collect();
    (e, gens, Morphism { components })
}

/// Surjection onto `M` from a sum of `k[U_x]`, one copy per generator.
fn projective_cover(m: &PosetModule) -> (PosetModule, Vec<usize>, Morphism) {
    let field = m.field();
    let base = m.base();
    let covers = base.covers();
    let mut gens = Vec::new();
    let mut lifts = Vec::new();
    for x in 0..base.len() {
        let incoming: Vec<&Matrix> = covers.iter().filter(|c| c.1 == x).map(|&(y, _)| m.map(y, x)).collect();
        let q = exactalg::cokernel_projection(&Matrix::hstack(field, m.dims()[x], &incoming));
        for _ in 0..q.rows() {
            gens.push(x);
        }
        lifts.push(exactalg::right_inverse(&q));
    }
    let p = principal_sum(field, base, &gens, ResolutionKind::Projective);
    let components = (0..base.len())
        .map(|z| {
            let cols: Vec<Matrix> = present(base, &gens, z, ResolutionKind::Projective)
                .into_iter()
                .map(|s| {
                    let x = gens[s];
                    let copy = gens[..s].iter().filter(|&&g| g == x).count();
                    m.map(x, z).mul(&lifts[x].block(0, copy, m.dims()[x], 1))
                })
                .collect();
            let refs: Vec<&Matrix> = cols.iter().collect();
            Matrix::hstack(field, m.dims()[z], &refs)
        })
        .collect();
    (p, gens, Morphism { components })
}

/// Cokernel of `phi: M -> E` with its projection `E -> C`.
fn cokernel(e: &PosetModule, phi: &Morphism) -> (PosetModule, Morphism) {
    let field = e.field();
    let proj: Vec<Matrix> = phi.components.iter().map(exactalg::cokernel_projection).collect();
    let rinv: Vec<Matrix> = proj.iter().map(exactalg::right_inverse).collect();
    let dims = proj.iter().map(Matrix::rows).collect();
    let c = PosetModule::new(field, e.base().clone(), dims, |i, j| proj[j].mul(e.map(i, j)).mul(&rinv[i])).unwrap();
    (c, Morphism { components: proj })
}

/// Kernel of `phi: P -> M` with its inclusion `K -> P`.
fn kernel(p: &PosetModule, phi: &Morphism) -> (PosetModule, Morphism) {
    let field = p.field();
    let incl: Vec<Matrix> = phi.components.iter().map(exactalg::kernel_basis).collect();
    let dims = incl.iter().map(Matrix::cols).collect();
    let k = PosetModule::new(field, p.base().clone(), dims, |i, j| {
        exactalg::solve_exact(&incl[j], &p.map(i, j).mul(&incl[i]))
    })
    .unwrap();
    (k, Morphism { components: incl })
}

fn zero_morphism(field: Field, src: &[usize], dst: &[usize]) -> Morphism {
    Morphism {
        components: src.iter().zip(dst).map(|(&s, &d)| Matrix::zeros(field, d, s)).collect(),
    }
}

/// Injective resolution with at most `cap` terms.
pub fn poset_injective_resolution(m: &PosetModule, cap: usize) -> Result<Resolution> {
    check_poset(m)?;
    let mut cur = m.clone();
    let mut terms = Vec::new();
    let mut generators = Vec::new();
    let mut differentials = Vec::new();
    let mut augmentation = zero_morphism(m.field(), m.dims(), &vec![0; m.len()]);
    let mut prev: Option<Morphism> = None;
    while !cur.is_zero() {
        if terms.len() == cap {
            return Err(Error::ResolutionCapExceeded(cap));
        }
        let (e, gens, emb) = injective_hull(&cur);
        match &prev {
            None => augmentation = emb.clone(),
            Some(p) => differentials.push(emb.compose(p)),
        }
        let (c, proj) = cokernel(&e, &emb);
        terms.push(e);
        generators.push(gens);
        prev = Some(proj);
        cur = c;
    }
    Ok(Resolution {
        kind: ResolutionKind::Injective,
        module: m.clone(),
        generators,
        terms,
        differentials,
        augmentation,
    })
}

/// Projective resolution by sums of `k[U_x]` with at most `cap` terms.
pub fn poset_projective_resolution(m: &PosetModule, cap: usize) -> Result<Resolution> {
    check_poset(m)?;
    let mut cur = m.clone();
    let mut terms = Vec::new();
    let mut generators = Vec::new();
    let mut differentials = Vec::new();
    let mut augmentation = zero_morphism(m.field(), &vec![0; m.len()], m.dims());
    let mut prev: Option<Morphism> = None;
    while !cur.is_zero() {
        if terms.len() == cap {
            return Err(Error::ResolutionCapExceeded(cap));
        }
        let (p, gens, eps) = projective_cover(&cur);
        match &prev {
            None => augmentation = eps.clone(),
            Some(incl) => differentials.push(incl.compose(&eps)),
        }
        let (k, incl) = kernel(&p, &eps);
        terms.push(p);
        generators.push(gens);
        prev = Some(incl);
        cur = k;
    }
    Ok(Resolution {
        kind: ResolutionKind::Projective,
        module: m.clone(),
        generators,
        terms,
        differentials,
        augmentation,
    })
}

/// Exactness of `0 -> V_0 -> V_1 -> ... -> V_k -> 0` from ranks and
/// vanishing composites.
fn exact_sequence(dims: &[usize], maps: &[&Matrix]) -> bool {
    let ranks: Vec<usize> = maps.iter().map(|m| exactalg::rank(m)).collect();
    for (j, &d) in dims.iter().enumerate() {
        let incoming = if j == 0 { 0 } else { ranks[j - 1] };
        let outgoing = if j < maps.len() { ranks[j] } else { 0 };
        if d != incoming + outgoing {
            return false;
        }
    }
    maps.windows(2).all(|w| w[1].mul(w[0]).is_zero())
}

impl Resolution {
    /// The resolved module, the terms and all maps, written as one sequence
    /// `0 -> V_0 -> ... -> V_k -> 0` of modules.
    fn sequence(&self) -> (Vec<&PosetModule>, Vec<&Morphism>) {
        match self.kind {
            ResolutionKind::Injective => {
                let mut mods = vec![&self.module];
                mods.extend(self.terms.iter());
                let mut maps = Vec::new();
                if !self.terms.is_empty() {
                    maps.push(&self.augmentation);
                }
                maps.extend(self.differentials.iter());
                (mods, maps)
            }
            ResolutionKind::Projective => {
                let mut mods: Vec<&PosetModule> = self.terms.iter().rev().collect();
                mods.push(&self.module);
                let mut maps: Vec<&Morphism> = self.differentials.iter().rev().collect();
                if !self.terms.is_empty() {
                    maps.push(&self.augmentation);
                }
                (mods, maps)
            }
        }
    }

    /// Exact at every point, every map natural.
    pub fn is_exact(&self) -> bool {
        let (mods, maps) = self.sequence();
        if maps.len() + 1 != mods.len() {
            return false;
        }
        for (j, phi) in maps.iter().enumerate() {
            if !mods[j].is_natural(mods[j + 1], phi) {
                return false;
            }
        }
        (0..self.module.len()).all(|z| {
            let dims: Vec<usize> = mods.iter().map(|m| m.dims()[z]).collect();
            let comps: Vec<&Matrix> = maps.iter().map(|m| &m.components[z]).collect();
            exact_sequence(&dims, &comps)
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// A resolution of a grid module, computed on its clamp box and read back
/// as `Z^n` modules with every edge stabilized.
#[derive(Clone, Debug)]
pub struct GridResolution {
    pub kind: ResolutionKind,
    pub grid: GridPoset,
    pub module: GridModule,
    pub generators: Vec<Vec<Vec<i64>>>,
    pub terms: Vec<GridModule>,
    pub differentials: Vec<Morphism>,
    pub augmentation: Morphism,
    poset: Resolution,
}

impl GridResolution {
    pub fn is_exact(&self) -> bool {
        self.poset.is_exact()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The finite-poset resolution this was read from.
    pub fn on_box(&self) -> &Resolution {
        &self.poset
    }
}

/// Default term cap for modules on `Z^n`.
pub fn default_cap(n: usize) -> usize {
    2 * n + 1
}

fn grid_resolution(m: &GridModule, cap: Option<usize>, kind: ResolutionKind) -> Result<GridResolution> {
    let c = m.clamped();
    let grid = c.grid().clone();
    let n = grid.dim();
    let pm = PosetModule::from_grid(&c);
    let cap = cap.unwrap_or(default_cap(n));
    let res = match kind {
        ResolutionKind::Injective => poset_injective_resolution(&pm, cap)?,
        ResolutionKind::Projective => poset_projective_resolution(&pm, cap)?,
    };
    let terms = res
        .terms
        .iter()
        .map(|t| t.to_grid(&grid, vec![true; n], vec![true; n]))
        .collect::<Result<Vec<_>>>()?;
    Ok(GridResolution {
        kind,
        generators: res
            .generators
            .iter()
            .map(|g| g.iter().map(|&i| grid.point(i)).collect())
            .collect(),
        grid,
        module: c,
        terms,
        differentials: res.differentials.clone(),
        augmentation: res.augmentation.clone(),
        poset: res,
    })
}

/// `0 -> M -> ⊕ k[D] -> ...`; the default cap is `2n + 1` terms.
pub fn injective_resolution(m: &GridModule, length_cap: Option<usize>) -> Result<GridResolution> {
    grid_resolution(m, length_cap, ResolutionKind::Injective)
}

/// `... -> ⊕ k[U] -> M -> 0`; the default cap is `2n + 1` terms.
pub fn projective_resolution(m: &GridModule, length_cap: Option<usize>) -> Result<GridResolution> {
    grid_resolution(m, length_cap, ResolutionKind::Projective)
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

    #[test]
    fn two_term_injective_resolution_of_a_bar() {
        let m = bar(0, 6, 2, 5);
        let r = injective_resolution(&m, None).unwrap();
        assert!(r.is_exact());
        assert_eq!(r.generators, vec![vec![vec![4]], vec![vec![1]]]);
        for x in -5..10 {
            assert_eq!(r.terms[0].dim_at(&[x]), (x <= 4) as usize);
            assert_eq!(r.terms[1].dim_at(&[x]), (x <= 1) as usize);
        }
    }

    #[test]
    fn principal_modules_resolve_to_themselves() {
        let g = GridPoset::line(0, 4).unwrap();
        let d = GridModule::principal(f2(), &g, &PrincipalSet::down(vec![2]), vec![true], vec![false]).unwrap();
        let r = injective_resolution(&d, None).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r.generators[0], vec![vec![2]]);
        let u = GridModule::principal(f2(), &g, &PrincipalSet::up(vec![1]), vec![false], vec![true]).unwrap();
        let r = projective_resolution(&u, None).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r.generators[0], vec![vec![1]]);
        assert!(r.is_exact());
    }

    #[test]
    fn two_term_projective_resolution_of_a_bar() {
        let r = projective_resolution(&bar(0, 6, 2, 5), None).unwrap();
        assert!(r.is_exact());
        assert_eq!(r.generators, vec![vec![vec![2]], vec![vec![5]]]);
    }

    #[test]
    fn zero_module() {
        let z = GridModule::zero(f2(), GridPoset::line(0, 3).unwrap());
        let r = injective_resolution(&z, None).unwrap();
        assert!(r.is_empty() && r.is_exact());
    }

    #[test]
    fn two_parameter_resolutions() {
        let g = GridPoset::new(vec![0, 0], vec![2, 2]).unwrap();
        let pts: Vec<Vec<i64>> = g.points().filter(|p| p[0] + p[1] >= 1 && p[0] + p[1] <= 3).collect();
        let m = GridModule::interval_module(f2(), &g, &pts).unwrap();
        for r in [injective_resolution(&m, None).unwrap(), projective_resolution(&m, None).unwrap()] {
            assert!(r.is_exact());
            assert!(r.len() <= 3);
        }
        assert!(matches!(injective_resolution(&m, Some(1)), Err(Error::ResolutionCapExceeded(1))));
    }

    #[test]
    fn broken_resolution_is_caught() {
        let mut r = injective_resolution(&bar(0, 6, 2, 5), None).unwrap().on_box().clone();
        r.differentials[0] = zero_morphism(f2(), r.terms[0].dims(), r.terms[1].dims());
        assert!(!r.is_exact());
    }
}
