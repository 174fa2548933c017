//! Interleaving distances: bottleneck matchings of barcodes, explicit
//! ε-interleavings of grid modules, and the convolution distance in the
//! zero-differential regime.

use petgraph::algo::maximum_matching;
use petgraph::graph::{NodeIndex, UnGraph};

use crate::convolve::{decompose_1d, Decomposition, GridComplex};
use crate::error::{Error, Result};
use crate::exactalg::{self, Matrix};
use crate::interval::{ext_distance, half_length, Barcode, Ext, GradedBarcode, Interval, Rational};
use crate::pmodule::{grid_hom_same_box, GridModule, Morphism};
use crate::poset::GridPoset;

/// Bars of the first barcode matched to bars of the second, as indices into
/// [`Barcode::expanded`]; `None` on one side means the bar is matched to the
/// diagonal.
pub type Matching = Vec<(Option<usize>, Option<usize>)>;

#[derive(Clone, Debug)]
pub struct DistanceResult {
    pub value: Ext,
    /// The value is an upper bound rather than the exact distance.
    pub bound_only: bool,
    pub matching: Option<Matching>,
    pub certificate: Option<EpsilonCertificate>,
}

impl DistanceResult {
    fn exact(value: Ext, matching: Option<Matching>) -> DistanceResult {
        DistanceResult {
            value,
            bound_only: false,
            matching,
            certificate: None,
        }
    }
}

fn pair_cost(a: &Interval, b: &Interval) -> Option<Rational> {
    let l = ext_distance(a.left.value, b.left.value)?;
    let r = ext_distance(a.right.value, b.right.value)?;
    Some(l.max(r))
}

/// A perfect matching of `A ∪ diag(B)` with `B ∪ diag(A)` in which every
/// used edge costs at most `eps`, if one exists.
fn matching_within(a: &[Interval], b: &[Interval], eps: Rational) -> Option<Matching> {
    let (n, m) = (a.len(), b.len());
    let mut g: UnGraph<(), ()> = UnGraph::default();
    // 0..n: A, n..n+m: diagonal copies of B, then B, then diagonal copies of A
    let nodes: Vec<NodeIndex> = (0..2 * (n + m)).map(|_| g.add_node(())).collect();
    let (da, bb, db) = (n, n + m, n + 2 * m);
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            if pair_cost(x, y).is_some_and(|c| c <= eps) {
                g.add_edge(nodes[i], nodes[bb + j], ());
            }
        }
        if half_length(x).is_some_and(|h| h <= eps) {
            g.add_edge(nodes[i], nodes[db + i], ());
        }
    }
    for (j, y) in b.iter().enumerate() {
        if half_length(y).is_some_and(|h| h <= eps) {
            g.add_edge(nodes[da + j], nodes[bb + j], ());
        }
        for i in 0..n {
            g.add_edge(nodes[da + j], nodes[db + i], ());
        }
    }
    let mm = maximum_matching(&g);
    if !mm.is_perfect() {
        return None;
    }
    let mut out = Vec::new();
    for i in 0..n {
        let mate = mm.mate(nodes[i]).unwrap().index();
        out.push(if mate >= bb && mate < db {
            (Some(i), Some(mate - bb))
        } else {
            (Some(i), None)
        });
    }
    for j in 0..m {
        if mm.mate(nodes[bb + j]).unwrap().index() == da + j {
            out.push((None, Some(j)));
        }
    }
    Some(out)
}

fn candidates(a: &[Interval], b: &[Interval]) -> Vec<Rational> {
    let mut c = vec![Rational::from_integer(0)];
    for x in a {
        for y in b {
            c.extend(ext_distance(x.left.value, y.left.value));
            c.extend(ext_distance(x.right.value, y.right.value));
        }
    }
    c.extend(a.iter().chain(b).filter_map(half_length));
    c.sort();
    c.dedup();
    c
}

/// Smallest candidate threshold admitting a matching, with the matching.
fn bottleneck_search(a: &[Interval], b: &[Interval]) -> Option<(Rational, Matching)> {
    let cand = candidates(a, b);
    matching_within(a, b, *cand.last().unwrap())?;
    let (mut lo, mut hi) = (0usize, cand.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if matching_within(a, b, cand[mid]).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let best = matching_within(a, b, cand[lo]).unwrap();
    Some((cand[lo], best))
}

/// The bottleneck distance, which is the interleaving distance of the
/// corresponding interval-decomposable modules.
pub fn bottleneck_distance(a: &Barcode, b: &Barcode) -> DistanceResult {
    let (xa, xb) = (a.expanded(), b.expanded());
    match bottleneck_search(&xa, &xb) {
        Some((v, mm)) => DistanceResult::exact(Ext::Fin(v), Some(mm)),
        None => DistanceResult::exact(Ext::PosInf, None),
    }
}

pub fn interleaving_distance_barcodes(a: &Barcode, b: &Barcode) -> DistanceResult {
    bottleneck_distance(a, b)
}

/// Largest cost of a matching; `None` when some matched cost is infinite.
pub fn matching_cost(a: &Barcode, b: &Barcode, mm: &Matching) -> Option<Rational> {
    let (xa, xb) = (a.expanded(), b.expanded());
    let mut worst = Rational::from_integer(0);
    for &(i, j) in mm {
        let c = match (i, j) {
            (Some(i), Some(j)) => pair_cost(&xa[i], &xb[j])?,
            (Some(i), None) => half_length(&xa[i])?,
            (None, Some(j)) => half_length(&xb[j])?,
            (None, None) => continue,
        };
        worst = worst.max(c);
    }
    Some(worst)
}

/// An ε-interleaving `f: M(-ε) -> N`, `g: N(-ε) -> M` of `Z^n` modules, with
/// `ε` acting along the diagonal. Components are stored at every point of a
/// box containing the clamp boxes of `M`, `N` and their shifts by `ε` and
/// `2ε`; outside it all four modules, and hence `f` and `g`, are constant.
#[derive(Clone, Debug)]
pub struct EpsilonCertificate {
    pub epsilon: i64,
    pub grid: GridPoset,
    pub m: GridModule,
    pub n: GridModule,
    /// `f[x]: M_{x-ε} -> N_x`.
    pub f: Vec<Matrix>,
    /// `g[x]: N_{x-ε} -> M_x`.
    pub g: Vec<Matrix>,
}

fn diag(n: usize, e: i64) -> Vec<i64> {
    vec![e; n]
}

fn offset(p: &[i64], e: i64) -> Vec<i64> {
    p.iter().map(|v| v + e).collect()
}

fn clamp_to(g: &GridPoset, p: &[i64]) -> usize {
    let q: Vec<i64> = (0..g.dim()).map(|k| p[k].clamp(g.lo()[k], g.hi()[k])).collect();
    g.index(&q).unwrap()
}

/// Box on which an ε-interleaving of `m` and `n` is stored.
pub fn certificate_box(m: &GridModule, n: &GridModule, eps: i64) -> GridPoset {
    let d = m.dim();
    let (em, en) = (m.clamp_box(), n.clamp_box());
    let mut b = em.hull(&en);
    for k in 1..=2 {
        b = b.hull(&em.translate(&diag(d, k * eps))).hull(&en.translate(&diag(d, k * eps)));
    }
    b
}

impl EpsilonCertificate {
    /// The identity interleaving of a module with itself at `ε = 0`.
    pub fn identity(m: &GridModule) -> EpsilonCertificate {
        let grid = certificate_box(m, m, 0);
        let id: Vec<Matrix> = grid.points().map(|p| Matrix::identity(m.field(), m.dim_at(&p))).collect();
        EpsilonCertificate {
            epsilon: 0,
            grid,
            m: m.clone(),
            n: m.clone(),
            f: id.clone(),
            g: id,
        }
    }

    /// The same certificate with the roles of `M` and `N` exchanged.
    pub fn swapped(&self) -> EpsilonCertificate {
        EpsilonCertificate {
            epsilon: self.epsilon,
            grid: self.grid.clone(),
            m: self.n.clone(),
            n: self.m.clone(),
            f: self.g.clone(),
            g: self.f.clone(),
        }
    }

    pub fn validate(&self) -> bool {
        certificate_validate(self)
    }
}

fn half_validates(b: &GridPoset, eps: i64, m: &GridModule, n: &GridModule, f: &[Matrix], g: &[Matrix]) -> bool {
    let field = m.field();
    if f.len() != b.len() || g.len() != b.len() {
        return false;
    }
    for (x, p) in b.points().enumerate() {
        let back = offset(&p, -eps);
        if f[x].shape() != (n.dim_at(&p), m.dim_at(&back)) || f[x].field() != field {
            return false;
        }
        for axis in 0..b.dim() {
            let Some(y) = b.cover(x, axis) else { continue };
            let q = b.point(y);
            let lhs = f[y].mul(&m.map_z(&back, &offset(&q, -eps)));
            let rhs = n.map_z(&p, &q).mul(&f[x]);
            if lhs != rhs {
                return false;
            }
        }
        // g_x f_{x-ε} = M_{x-2ε <= x}
        let prev = clamp_to(b, &back);
        if g[x].cols() != f[prev].rows() || f[prev].cols() != m.dim_at(&offset(&p, -2 * eps)) {
            return false;
        }
        if g[x].mul(&f[prev]) != m.map_z(&offset(&p, -2 * eps), &p) {
            return false;
        }
    }
    true
}

/// Exact check of the shapes, naturality of `f` and `g`, and both triangle
/// identities.
pub fn certificate_validate(c: &EpsilonCertificate) -> bool {
    c.epsilon >= 0
        && c.m.field() == c.n.field()
        && c.m.dim() == c.n.dim()
        && c.grid.dim() == c.m.dim()
        && c.grid.contains_box(&certificate_box(&c.m, &c.n, c.epsilon))
        && half_validates(&c.grid, c.epsilon, &c.m, &c.n, &c.f, &c.g)
        && half_validates(&c.grid, c.epsilon, &c.n, &c.m, &c.g, &c.f)
}

fn check_pair(m: &GridModule, n: &GridModule, eps: i64) -> Result<()> {
    if m.field() != n.field() || m.dim() != n.dim() {
        return Err(Error::BaseMismatch("interleaving modules over different fields or dimensions".into()));
    }
    if eps < 0 {
        return Err(Error::OutOfBox(format!("epsilon {eps} is negative")));
    }
    Ok(())
}

/// `f_x = B^N_x D (B^M_{x-ε})^{-1}` where `D` sends each matched summand of
/// `M` to its partner in `N` wherever both are alive.
fn matched_components(
    b: &GridPoset,
    eps: i64,
    dm: &Decomposition,
    dn: &Decomposition,
    pairs: &[(usize, usize)],
) -> Vec<Matrix> {
    let field = dm.module.field();
    let inverse = |d: &Decomposition, x: usize| {
        exactalg::solve_exact(&d.basis[x], &Matrix::identity(field, d.basis[x].rows()))
    };
    b.points()
        .map(|p| {
            let (z, w) = (p[0], p[0] - eps);
            let xn = clamp_to(dn.module.grid(), &[z]);
            let xm = clamp_to(dm.module.grid(), &[w]);
            let (an, am) = (&dn.alive[xn], &dm.alive[xm]);
            let mut d = Matrix::zeros(field, an.len(), am.len());
            for &(s, t) in pairs {
                if let (Some(c), Some(r)) = (am.iter().position(|&v| v == s), an.iter().position(|&v| v == t)) {
                    d.set(r, c, 1);
                }
            }
            dn.basis[xn].mul(&d).mul(&inverse(dm, xm))
        })
        .collect()
}

/// One-parameter route: decompose both modules, match their lattice bars
/// within `ε`, and build the interleaving summand by summand.
fn feasible_1d(m: &GridModule, n: &GridModule, eps: i64) -> Result<Option<EpsilonCertificate>> {
    let (dm, dn) = (decompose_1d(m)?, decompose_1d(n)?);
    let Some(mm) = matching_within(&dm.bars, &dn.bars, Rational::from_integer(eps)) else {
        return Ok(None);
    };
    let pairs: Vec<(usize, usize)> = mm
        .iter()
        .filter_map(|&(i, j)| Some((i?, j?)))
        .collect();
    let flipped: Vec<(usize, usize)> = pairs.iter().map(|&(s, t)| (t, s)).collect();
    let grid = certificate_box(m, n, eps);
    let f = matched_components(&grid, eps, &dm, &dn, &pairs);
    let g = matched_components(&grid, eps, &dn, &dm, &flipped);
    let c = EpsilonCertificate {
        epsilon: eps,
        grid,
        m: dm.module.clone(),
        n: dn.module.clone(),
        f,
        g,
    };
    debug_assert!(certificate_validate(&c));
    Ok(Some(c))
}

/// Largest number of candidate morphisms `f` the exhaustive search visits.
pub const SEARCH_LIMIT: u64 = 1 << 16;

/// Exhaustive route: every `f` in `Hom(M(-ε), N)` over `F_p`, with `g` then
/// determined by the affine system of the two triangle identities.
pub fn interleaving_feasible_exhaustive(m: &GridModule, n: &GridModule, eps: i64) -> Result<Option<EpsilonCertificate>> {
    check_pair(m, n, eps)?;
    let field = m.field();
    let p = u64::from(field.modulus());
    let d = m.dim();
    let b = certificate_box(m, n, eps);
    let ms = m.shift(&diag(d, -eps)).lift(&b)?;
    let ns = n.shift(&diag(d, -eps)).lift(&b)?;
    let (ml, nl) = (m.lift(&b)?, n.lift(&b)?);
    let (_, fb) = grid_hom_same_box(&ms, &nl);
    let (_, gb) = grid_hom_same_box(&ns, &ml);
    let h = fb.len() as u32;
    let count = p.checked_pow(h).filter(|&c| c <= SEARCH_LIMIT).ok_or_else(|| {
        Error::SearchTooLarge(format!("{p}^{h} candidate morphisms exceed the limit {SEARCH_LIMIT}"))
    })?;
    let pts: Vec<Vec<i64>> = b.points().collect();
    let prev: Vec<usize> = pts.iter().map(|q| clamp_to(&b, &offset(q, -eps))).collect();
    let tm: Vec<Matrix> = pts.iter().map(|q| m.map_z(&offset(q, -2 * eps), q)).collect();
    let tn: Vec<Matrix> = pts.iter().map(|q| n.map_z(&offset(q, -2 * eps), q)).collect();
    let flat = |ms: &[Matrix]| -> Vec<u32> { ms.iter().flat_map(|x| x.entries().iter().copied()).collect() };
    let rhs = {
        let mut v = flat(&tm);
        v.extend(flat(&tn));
        v
    };
    let combine = |zero: &Morphism, basis: &[Morphism], coef: &[u32]| -> Vec<Matrix> {
        let mut acc = zero.components.clone();
        for (f, &c) in basis.iter().zip(coef) {
            if c != 0 {
                for (a, x) in acc.iter_mut().zip(&f.components) {
                    *a = a.add(&x.scale(c));
                }
            }
        }
        acc
    };
    let (zero_f, zero_g) = (Morphism::zero(&ms, &nl), Morphism::zero(&ns, &ml));
    let mut coef = vec![0u32; h as usize];
    for _ in 0..count {
        let f = combine(&zero_f, &fb, &coef);
        // column k: the triangle residues of the k-th basis morphism of g
        let cols: Vec<Matrix> = gb
            .iter()
            .map(|gk| {
                let mut v: Vec<u32> = (0..pts.len()).flat_map(|x| gk.components[x].mul(&f[prev[x]]).entries().to_vec()).collect();
                v.extend((0..pts.len()).flat_map(|x| f[x].mul(&gk.components[prev[x]]).entries().to_vec()));
                Matrix::column(field, &v)
            })
            .collect();
        let refs: Vec<&Matrix> = cols.iter().collect();
        let system = Matrix::hstack(field, rhs.len(), &refs);
        if let Some(c) = exactalg::solve(&system, &rhs)? {
            let g = combine(&zero_g, &gb, &c);
            let cert = EpsilonCertificate {
                epsilon: eps,
                grid: b,
                m: m.clone(),
                n: n.clone(),
                f,
                g,
            };
            debug_assert!(certificate_validate(&cert));
            return Ok(Some(cert));
        }
        // next coefficient vector in base p
        for v in coef.iter_mut() {
            *v += 1;
            if u64::from(*v) < p {
                break;
            }
            *v = 0;
        }
    }
    Ok(None)
}

/// An ε-interleaving of `m` and `n`, if one exists. One-parameter modules
/// go through their interval decompositions; otherwise the search is
/// exhaustive.
pub fn interleaving_feasible(m: &GridModule, n: &GridModule, eps: i64) -> Result<Option<EpsilonCertificate>> {
    check_pair(m, n, eps)?;
    if m.dim() == 1 {
        feasible_1d(m, n, eps)
    } else {
        interleaving_feasible_exhaustive(m, n, eps)
    }
}

/// The least `ε <= max_eps` admitting an interleaving, with its certificate.
pub fn minimal_interleaving(m: &GridModule, n: &GridModule, max_eps: i64) -> Result<Option<EpsilonCertificate>> {
    for eps in 0..=max_eps {
        if let Some(c) = interleaving_feasible(m, n, eps)? {
            return Ok(Some(c));
        }
    }
    Ok(None)
}

/// Interleaving distance of one-parameter lattice modules: the least integer
/// `ε` at or above the bottleneck distance of their barcodes, certified.
pub fn interleaving_distance_modules(m: &GridModule, n: &GridModule) -> Result<DistanceResult> {
    check_pair(m, n, 0)?;
    if m.dim() != 1 {
        return Err(Error::Unsupported(
            "interleaving distance of multiparameter modules; use minimal_interleaving on a bounded range".into(),
        ));
    }
    let (dm, dn) = (decompose_1d(m)?, decompose_1d(n)?);
    let Some((v, mm)) = bottleneck_search(&dm.bars, &dn.bars) else {
        return Ok(DistanceResult::exact(Ext::PosInf, None));
    };
    let eps = v.ceil().to_integer();
    let cert = feasible_1d(m, n, eps)?;
    Ok(DistanceResult {
        value: Ext::int(eps),
        bound_only: false,
        matching: Some(mm),
        certificate: cert,
    })
}

/// Degreewise maximum of bottleneck distances. Exact for barcodes
/// concentrated in one common degree; an upper bound otherwise.
pub fn convolution_distance(x: &GradedBarcode, y: &GradedBarcode) -> DistanceResult {
    let mut degrees: Vec<i32> = x.degrees().chain(y.degrees()).map(|(d, _)| d).collect();
    degrees.sort();
    degrees.dedup();
    let mut value = Ext::int(0);
    for &d in &degrees {
        value = value.max(bottleneck_distance(&x.degree(d), &y.degree(d)).value);
    }
    DistanceResult {
        value,
        bound_only: degrees.len() > 1,
        matching: None,
        certificate: None,
    }
}

/// [`convolution_distance`] of the cohomology barcodes of two complexes of
/// one-parameter lattice modules with zero differentials, with each degree
/// rounded up to an integer interleaving.
pub fn convolution_distance_complexes(x: &GridComplex, y: &GridComplex) -> Result<DistanceResult> {
    if !x.has_zero_differentials() || !y.has_zero_differentials() {
        return Err(Error::NonzeroDifferential);
    }
    let (hx, hy) = (x.cohomology().barcodes()?, y.cohomology().barcodes()?);
    let r = convolution_distance(&hx, &hy);
    Ok(DistanceResult {
        value: match r.value {
            Ext::Fin(v) => Ext::Fin(v.ceil()),
            e => e,
        },
        ..r
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convolve::barcode_module;
    use crate::exactalg::Field;
    use proptest::prelude::*;

    fn co(a: i64, b: i64) -> Interval {
        Interval::co_int(a, b)
    }

    fn bc(v: &[(i64, i64)]) -> Barcode {
        Barcode::from_intervals(v.iter().map(|&(a, b)| co(a, b)))
    }

    fn q(a: i64, b: i64) -> Ext {
        Ext::Fin(Rational::new(a, b))
    }

    fn lattice(b: &Barcode) -> GridModule {
        barcode_module(Field::F2, b).unwrap()
    }

    #[test]
    fn bottleneck_examples() {
        assert_eq!(bottleneck_distance(&bc(&[(0, 2)]), &bc(&[(0, 2)])).value, q(0, 1));
        assert_eq!(bottleneck_distance(&bc(&[(0, 2)]), &Barcode::new()).value, q(1, 1));
        assert_eq!(bottleneck_distance(&bc(&[(0, 4)]), &bc(&[(1, 5)])).value, q(1, 1));
        assert_eq!(bottleneck_distance(&bc(&[(0, 1)]), &bc(&[(5, 6)])).value, q(1, 2));
        let inf = Barcode::from_intervals([Interval::co(Ext::int(0), Ext::PosInf)]);
        assert_eq!(bottleneck_distance(&inf, &Barcode::new()).value, Ext::PosInf);
        let later = Barcode::from_intervals([Interval::co(Ext::int(3), Ext::PosInf)]);
        assert_eq!(bottleneck_distance(&inf, &later).value, q(3, 1));
    }

    #[test]
    fn matching_attains_value() {
        let (a, b) = (bc(&[(0, 4), (2, 3), (5, 9)]), bc(&[(1, 5), (6, 8)]));
        let r = bottleneck_distance(&a, &b);
        let mm = r.matching.unwrap();
        assert_eq!(Ext::Fin(matching_cost(&a, &b, &mm).unwrap()), r.value);
        assert_eq!(mm.iter().filter(|p| p.0.is_some()).count(), 3);
        assert_eq!(mm.iter().filter(|p| p.1.is_some()).count(), 2);
    }

    #[test]
    fn feasibility_examples() {
        let m = lattice(&bc(&[(0, 2)]));
        let c = interleaving_feasible(&m, &m, 0).unwrap().unwrap();
        assert!(certificate_validate(&c));
        assert!(certificate_validate(&EpsilonCertificate::identity(&m)));
        let z = GridModule::zero(Field::F2, GridPoset::line(0, 0).unwrap());
        let c = interleaving_feasible(&m, &z, 1).unwrap().unwrap();
        assert!(certificate_validate(&c));
        assert!(c.f.iter().chain(&c.g).all(Matrix::is_zero));
        assert!(interleaving_feasible(&m, &z, 0).unwrap().is_none());
        assert!(interleaving_feasible_exhaustive(&m, &z, 0).unwrap().is_none());
        assert!(interleaving_feasible_exhaustive(&m, &z, 1).unwrap().is_some());
        assert!(interleaving_feasible(&m, &z, -1).is_err());
    }

    #[test]
    fn broken_certificate_rejected() {
        let m = lattice(&bc(&[(0, 5)]));
        let mut c = interleaving_feasible(&m, &m, 1).unwrap().unwrap();
        assert!(certificate_validate(&c));
        for g in c.g.iter_mut() {
            *g = Matrix::zeros(Field::F2, g.rows(), g.cols());
        }
        assert!(!certificate_validate(&c));
    }

    #[test]
    fn two_parameter_exhaustive() {
        let g = GridPoset::new(vec![0, 0], vec![2, 2]).unwrap();
        let sq: Vec<Vec<i64>> = g.points().filter(|p| p[0] <= 1 && p[1] <= 1).collect();
        let m = GridModule::interval_module(Field::F2, &g, &sq).unwrap();
        let z = GridModule::zero(Field::F2, g.clone());
        assert!(interleaving_feasible(&m, &z, 0).unwrap().is_none());
        let c = interleaving_feasible(&m, &z, 1).unwrap().unwrap();
        assert!(certificate_validate(&c));
        let c = interleaving_feasible(&m, &m.shift(&[1, 1]), 1).unwrap().unwrap();
        assert!(certificate_validate(&c));
    }

    #[test]
    fn convolution_distance_examples() {
        let x = GradedBarcode::concentrated(0, bc(&[(0, 2)]));
        let mut y = x.clone();
        y.insert(1, bc(&[(5, 6)]));
        let r = convolution_distance(&x, &y);
        assert_eq!(r.value, q(1, 2));
        assert!(r.bound_only);
        let r = convolution_distance(&x, &x);
        assert_eq!(r.value, q(0, 1));
        assert!(!r.bound_only);
        let a = GradedBarcode::concentrated(0, bc(&[(0, 4)]));
        let b = GradedBarcode::concentrated(0, bc(&[(1, 5)]));
        assert_eq!(convolution_distance(&a, &b).value, q(1, 1));
    }

    #[test]
    fn nonzero_differentials_rejected() {
        let a = lattice(&bc(&[(1, 4)]));
        let id = Morphism::identity(&a);
        let c = GridComplex::new(0, vec![a.clone(), a.clone()], vec![id]).unwrap();
        assert!(matches!(convolution_distance_complexes(&c, &c), Err(Error::NonzeroDifferential)));
        let d = GridComplex::concentrated(0, a);
        assert_eq!(convolution_distance_complexes(&d, &d).unwrap().value, q(0, 1));
    }

    fn small_barcode() -> impl Strategy<Value = Barcode> {
        prop::collection::vec((0i64..8, 1i64..5), 0..4)
            .prop_map(|v| Barcode::from_intervals(v.into_iter().map(|(a, l)| co(a, a + l))))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn pseudometric(a in small_barcode(), b in small_barcode(), c in small_barcode()) {
            let d = |x: &Barcode, y: &Barcode| bottleneck_distance(x, y).value.finite().unwrap();
            prop_assert_eq!(d(&a, &a), Rational::from_integer(0));
            prop_assert_eq!(d(&a, &b), d(&b, &a));
            prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
        }

        #[test]
        fn lattice_distance_is_rounded_bottleneck(a in small_barcode(), b in small_barcode()) {
            let (m, n) = (lattice(&a), lattice(&b));
            let r = interleaving_distance_modules(&m, &n).unwrap();
            let d = bottleneck_distance(&a, &b).value.finite().unwrap();
            prop_assert_eq!(r.value, Ext::Fin(d.ceil()));
            let cert = r.certificate.unwrap();
            prop_assert!(certificate_validate(&cert));
            prop_assert!(certificate_validate(&cert.swapped()));
            if cert.epsilon > 0 {
                prop_assert!(interleaving_feasible(&m, &n, cert.epsilon - 1).unwrap().is_none());
            }
            prop_assert!(interleaving_feasible(&m, &n, cert.epsilon + 1).unwrap().is_some());
        }
    }

    #[test]
    fn routes_agree_on_small_modules() {
        let mut r = crate::random::rng(3);
        for _ in 0..25 {
            let m = crate::random::line_module(&mut r, Field::F2, 0, 4, 2);
            let n = crate::random::line_module(&mut r, Field::F2, 0, 4, 2);
            for eps in 0..3 {
                let a = interleaving_feasible(&m, &n, eps).unwrap();
                match interleaving_feasible_exhaustive(&m, &n, eps) {
                    Ok(b) => assert_eq!(a.is_some(), b.is_some(), "eps {eps}"),
                    Err(Error::SearchTooLarge(_)) => {}
                    Err(e) => panic!("{e}"),
                }
                if let Some(c) = a {
                    assert!(certificate_validate(&c));
                }
            }
        }
    }
}
