//! Stability checks: sublevel-set persistence of vertex functions on
//! simplicial complexes, and derived direct images of modules on finite
//! posets along two nearby monotone maps into `Z^n`.

use std::collections::{BTreeMap, HashMap};

use num_traits::Signed;
use serde_json::{json, Map, Value};

use crate::convolve::{barcode_extract, default_cap, poset_injective_resolution, Resolution};
use crate::distance::{bottleneck_distance, certificate_box, certificate_validate, EpsilonCertificate};
use crate::error::{Error, Result};
use crate::exactalg::{self, Field, Matrix};
use crate::interval::{Barcode, Ext, Interval, Rational};
use crate::pmodule::{GridModule, PosetModule};
use crate::poset::{self, FinitePreorder, GridPoset};

/// A finite abstract simplicial complex; simplices are sorted vertex lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialComplex {
    simplices: Vec<Vec<usize>>,
}

impl SimplicialComplex {
    /// Sorts and deduplicates, then checks that every face is present.
    pub fn new(simplices: Vec<Vec<usize>>) -> Result<SimplicialComplex> {
        let mut s: Vec<Vec<usize>> = simplices
            .into_iter()
            .map(|mut v| {
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect();
        if s.iter().any(Vec::is_empty) {
            return Err(Error::Schema("empty simplex".into()));
        }
        s.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        s.dedup();
        let have: std::collections::HashSet<&Vec<usize>> = s.iter().collect();
        for x in &s {
            if x.len() < 2 {
                continue;
            }
            for k in 0..x.len() {
                let mut face = x.clone();
                face.remove(k);
                if !have.contains(&face) {
                    return Err(Error::Schema(format!("face {face:?} of {x:?} is missing")));
                }
            }
        }
        Ok(SimplicialComplex { simplices: s })
    }

    pub fn simplices(&self) -> &[Vec<usize>] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn vertices(&self) -> Vec<usize> {
        self.simplices.iter().filter(|s| s.len() == 1).map(|s| s[0]).collect()
    }

    /// The boundary of a square: 4 vertices, 4 edges.
    pub fn square() -> SimplicialComplex {
        SimplicialComplex::new(vec![
            vec![0],
            vec![1],
            vec![2],
            vec![3],
            vec![0, 1],
            vec![0, 2],
            vec![1, 3],
            vec![2, 3],
        ])
        .unwrap()
    }

    pub fn to_json(&self) -> Value {
        json!({ "simplices": self.simplices })
    }

    pub fn from_json(v: &Value) -> Result<SimplicialComplex> {
        #[derive(serde::Deserialize)]
        struct J {
            simplices: Vec<Vec<usize>>,
        }
        let j: J = serde_json::from_value(v.clone()).map_err(|e| Error::Schema(e.to_string()))?;
        SimplicialComplex::new(j.simplices)
    }
}

/// Rational values on vertices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VertexFunction {
    pub values: BTreeMap<usize, Rational>,
}

impl VertexFunction {
    pub fn new(values: impl IntoIterator<Item = (usize, Rational)>) -> VertexFunction {
        VertexFunction {
            values: values.into_iter().collect(),
        }
    }

    pub fn from_ints(values: &[i64]) -> VertexFunction {
        VertexFunction::new(values.iter().enumerate().map(|(v, &x)| (v, Rational::from_integer(x))))
    }

    pub fn get(&self, v: usize) -> Option<Rational> {
        self.values.get(&v).copied()
    }

    pub fn shifted(&self, c: Rational) -> VertexFunction {
        VertexFunction::new(self.values.iter().map(|(&v, &x)| (v, x + c)))
    }

    /// `max_v |f(v) - g(v)|` over the vertices of `k`.
    pub fn sup_distance(&self, other: &VertexFunction, k: &SimplicialComplex) -> Result<Rational> {
        let mut worst = Rational::from_integer(0);
        for v in k.vertices() {
            let (a, b) = (value(self, v)?, value(other, v)?);
            worst = worst.max((a - b).abs());
        }
        Ok(worst)
    }

    pub fn to_json(&self) -> Value {
        let m: Map<String, Value> = self
            .values
            .iter()
            .map(|(v, x)| (v.to_string(), Ext::Fin(*x).to_json()))
            .collect();
        Value::Object(m)
    }

    pub fn from_json(v: &Value) -> Result<VertexFunction> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Schema("a vertex function is an object of vertex -> value".into()))?;
        let mut values = BTreeMap::new();
        for (k, x) in obj {
            let id: usize = k.parse().map_err(|_| Error::Schema(format!("vertex id {k:?} is not an integer")))?;
            let r = Ext::from_json(x)?
                .finite()
                .ok_or_else(|| Error::Schema(format!("value of vertex {id} is infinite")))?;
            values.insert(id, r);
        }
        Ok(VertexFunction { values })
    }
}

fn value(f: &VertexFunction, v: usize) -> Result<Rational> {
    f.get(v)
        .ok_or_else(|| Error::Schema(format!("vertex function has no value at vertex {v}")))
}

/// Simplices in filtration order: by lower-star value, then dimension, then
/// lexicographically; with their values.
fn filtration(k: &SimplicialComplex, f: &VertexFunction) -> Result<Vec<(Rational, Vec<usize>)>> {
    let mut out = Vec::with_capacity(k.len());
    for s in k.simplices() {
        let mut top = value(f, s[0])?;
        for &v in &s[1..] {
            top = top.max(value(f, v)?);
        }
        out.push((top, s.clone()));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.len().cmp(&b.1.len())).then_with(|| a.1.cmp(&b.1)));
    Ok(out)
}

/// Barcode of `H_degree` of the lower-star filtration over `F_p`, by
/// reduction of the boundary matrix. Zero-length bars are dropped.
pub fn sublevel_persistence_over(
    field: Field,
    k: &SimplicialComplex,
    f: &VertexFunction,
    degree: i64,
) -> Result<Barcode> {
    if degree < 0 {
        return Err(Error::Schema(format!("homological degree {degree} is negative")));
    }
    let d = degree as usize;
    let order = filtration(k, f)?;
    let pos: HashMap<&Vec<usize>, usize> = order.iter().enumerate().map(|(i, (_, s))| (s, i)).collect();
    // sparse columns, sorted by row
    let mut cols: Vec<Vec<(usize, u32)>> = order
        .iter()
        .map(|(_, s)| {
            let mut c: Vec<(usize, u32)> = if s.len() == 1 {
                vec![]
            } else {
                (0..s.len())
                    .map(|i| {
                        let mut face = s.clone();
                        face.remove(i);
                        let sign = if i % 2 == 0 { 1 } else { field.neg(1) };
                        (pos[&face], sign)
                    })
                    .collect()
            };
            c.sort_unstable();
            c
        })
        .collect();
    let mut owner: HashMap<usize, usize> = HashMap::new();
    let mut killed = vec![false; order.len()];
    let mut bars = Vec::new();
    for j in 0..cols.len() {
        while let Some(&(low, lv)) = cols[j].last() {
            let Some(&o) = owner.get(&low) else { break };
            let ov = cols[o].last().unwrap().1;
            let factor = field.mul(lv, field.inv(ov));
            cols[j] = axpy(field, &cols[j], field.neg(factor), &cols[o]);
        }
        if let Some(&(low, _)) = cols[j].last() {
            owner.insert(low, j);
            killed[low] = true;
            let (birth, death) = (order[low].0, order[j].0);
            if order[low].1.len() == d + 1 && birth < death {
                bars.push(Interval::co(Ext::Fin(birth), Ext::Fin(death)));
            }
        }
    }
    for (j, (v, s)) in order.iter().enumerate() {
        if s.len() == d + 1 && cols[j].is_empty() && !killed[j] {
            bars.push(Interval::co(Ext::Fin(*v), Ext::PosInf));
        }
    }
    Ok(Barcode::from_intervals(bars))
}

fn axpy(field: Field, a: &[(usize, u32)], s: u32, b: &[(usize, u32)]) -> Vec<(usize, u32)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let (r, v) = match (a.get(i), b.get(j)) {
            (Some(&(ra, va)), Some(&(rb, vb))) if ra == rb => {
                i += 1;
                j += 1;
                (ra, field.add(va, field.mul(s, vb)))
            }
            (Some(&(ra, va)), Some(&(rb, _))) if ra < rb => {
                i += 1;
                (ra, va)
            }
            (Some(&(ra, va)), None) => {
                i += 1;
                (ra, va)
            }
            (_, Some(&(rb, vb))) => {
                j += 1;
                (rb, field.mul(s, vb))
            }
            (None, None) => unreachable!(),
        };
        if v != 0 {
            out.push((r, v));
        }
    }
    out
}

/// [`sublevel_persistence_over`] with coefficients in `F_2`.
pub fn sublevel_persistence(k: &SimplicialComplex, f: &VertexFunction, degree: i64) -> Result<Barcode> {
    sublevel_persistence_over(Field::F2, k, f, degree)
}

/// `H_0` of the lower-star filtration by union-find with the elder rule.
pub fn h0_union_find(k: &SimplicialComplex, f: &VertexFunction) -> Result<Barcode> {
    let order = filtration(k, f)?;
    let mut parent: HashMap<usize, usize> = HashMap::new();
    let mut birth: HashMap<usize, Rational> = HashMap::new();
    fn find(p: &mut HashMap<usize, usize>, x: usize) -> usize {
        let mut r = x;
        while p[&r] != r {
            r = p[&r];
        }
        let mut c = x;
        while p[&c] != r {
            let next = p[&c];
            p.insert(c, r);
            c = next;
        }
        r
    }
    let mut bars = Vec::new();
    for (v, s) in &order {
        match s.len() {
            1 => {
                parent.insert(s[0], s[0]);
                birth.insert(s[0], *v);
            }
            2 => {
                let (a, b) = (find(&mut parent, s[0]), find(&mut parent, s[1]));
                if a == b {
                    continue;
                }
                // the younger component dies
                let (old, young) = if (birth[&a], a) <= (birth[&b], b) { (a, b) } else { (b, a) };
                if birth[&young] < *v {
                    bars.push(Interval::co(Ext::Fin(birth[&young]), Ext::Fin(*v)));
                }
                parent.insert(young, old);
            }
            _ => {}
        }
    }
    let roots: Vec<usize> = parent.keys().copied().filter(|&x| parent[&x] == x).collect();
    for r in roots {
        bars.push(Interval::co(Ext::Fin(birth[&r]), Ext::PosInf));
    }
    Ok(Barcode::from_intervals(bars))
}

#[derive(Clone, Debug)]
pub struct StabilityReport {
    pub degree: i64,
    pub barcode_f: Barcode,
    pub barcode_g: Barcode,
    pub distance: Ext,
    pub sup_norm: Rational,
    pub holds: bool,
}

impl StabilityReport {
    pub fn to_json(&self) -> Value {
        json!({
            "degree": self.degree,
            "barcode_f": self.barcode_f.to_json(),
            "barcode_g": self.barcode_g.to_json(),
            "distance": self.distance.to_json(),
            "sup_norm": Ext::Fin(self.sup_norm).to_json(),
            "holds": self.holds,
        })
    }
}

/// Compares `d_I(H_n f, H_n g)` with `||f - g||_∞` exactly.
pub fn stability_check(
    k: &SimplicialComplex,
    f: &VertexFunction,
    g: &VertexFunction,
    degree: i64,
) -> Result<StabilityReport> {
    let (bf, bg) = (sublevel_persistence(k, f, degree)?, sublevel_persistence(k, g, degree)?);
    let distance = bottleneck_distance(&bf, &bg).value;
    let sup_norm = f.sup_distance(g, k)?;
    Ok(StabilityReport {
        degree,
        holds: distance <= Ext::Fin(sup_norm),
        barcode_f: bf,
        barcode_g: bg,
        distance,
        sup_norm,
    })
}

/// Cohomology data of `Γ(S; E^•)` for one index set `S`: per degree, the
/// section basis, the cocycles in section coordinates, and the projection
/// onto cohomology with a right inverse.
struct Local {
    sections: Vec<Matrix>,
    cocycles: Vec<Matrix>,
    proj: Vec<Matrix>,
    lift: Vec<Matrix>,
}

struct SectionComplex<'a> {
    res: &'a Resolution,
    cache: HashMap<Vec<usize>, Local>,
}

impl<'a> SectionComplex<'a> {
    fn new(res: &'a Resolution) -> SectionComplex<'a> {
        SectionComplex {
            res,
            cache: HashMap::new(),
        }
    }

    fn degrees(&self) -> usize {
        self.res.terms.len()
    }

    fn local(&mut self, set: &[usize]) -> &Local {
        if !self.cache.contains_key(set) {
            let l = self.compute(set);
            self.cache.insert(set.to_vec(), l);
        }
        &self.cache[set]
    }

    /// `d^i` on sections over `set`, in section bases.
    fn differential(&self, i: usize, set: &[usize], k0: &Matrix, k1: &Matrix) -> Matrix {
        let (src, dst) = (&self.res.terms[i], &self.res.terms[i + 1]);
        let field = src.field();
        let blocks: Vec<&Matrix> = set.iter().map(|&q| &self.res.differentials[i].components[q]).collect();
        let rows: usize = set.iter().map(|&q| dst.dims()[q]).sum();
        let cols: usize = set.iter().map(|&q| src.dims()[q]).sum();
        let big = crate::pmodule::block_diag(field, &blocks);
        debug_assert_eq!(big.shape(), (rows, cols));
        exactalg::solve_exact(k1, &big.mul(k0))
    }

    fn compute(&self, set: &[usize]) -> Local {
        let n = self.degrees();
        let field = self.res.module.field();
        let sections: Vec<Matrix> = self.res.terms.iter().map(|t| t.sections_basis(set)).collect();
        let diffs: Vec<Matrix> = (0..n.saturating_sub(1))
            .map(|i| self.differential(i, set, &sections[i], &sections[i + 1]))
            .collect();
        let mut cocycles = Vec::with_capacity(n);
        let mut proj = Vec::with_capacity(n);
        let mut lift = Vec::with_capacity(n);
        for i in 0..n {
            let z = match diffs.get(i) {
                Some(d) => exactalg::kernel_basis(d),
                None => Matrix::identity(field, sections[i].cols()),
            };
            let b = match i.checked_sub(1) {
                Some(j) => exactalg::solve_exact(&z, &diffs[j]),
                None => Matrix::zeros(field, z.cols(), 0),
            };
            let q = exactalg::cokernel_projection(&b);
            lift.push(exactalg::right_inverse(&q));
            proj.push(q);
            cocycles.push(z);
        }
        Local {
            sections,
            cocycles,
            proj,
            lift,
        }
    }

    /// The map `H^i Γ(big) -> H^i Γ(small)` induced by restriction.
    fn restrict(&mut self, i: usize, big: &[usize], small: &[usize]) -> Matrix {
        self.local(big);
        self.local(small);
        let (lb, ls) = (&self.cache[big], &self.cache[small]);
        let r = self.res.terms[i].restriction(big, &lb.sections[i], small, &ls.sections[i]);
        let pushed = r.mul(&lb.cocycles[i]).mul(&lb.lift[i]);
        ls.proj[i].mul(&exactalg::solve_exact(&ls.cocycles[i], &pushed))
    }

    fn dim(&mut self, i: usize, set: &[usize]) -> usize {
        self.local(set).proj[i].rows()
    }
}

fn preimage_up(values: &[Vec<i64>], z: &[i64]) -> Vec<usize> {
    (0..values.len()).filter(|&q| poset::leq(z, &values[q])).collect()
}

/// `R^i f_* F` on the box `grid`, stabilized on the left: stalk at `z` is
/// `H^i Γ(f⁻¹(U_z); E)`.
fn direct_image_module(sc: &mut SectionComplex, i: usize, values: &[Vec<i64>], grid: &GridPoset) -> GridModule {
    let field = sc.res.module.field();
    let pre: Vec<Vec<usize>> = grid.points().map(|z| preimage_up(values, &z)).collect();
    let dims = pre.iter().map(|s| sc.dim(i, s)).collect();
    let n = grid.dim();
    GridModule::new(
        field,
        grid.clone(),
        dims,
        |axis, x| {
            let y = grid.cover(x, axis).unwrap();
            sc.restrict(i, &pre[x], &pre[y])
        },
        vec![true; n],
        vec![false; n],
    )
    .expect("restrictions compose")
}

/// `Φ_x: H^i Γ(f⁻¹U_{x-ε}) -> H^i Γ(g⁻¹U_x)`, a restriction because
/// `g <= f + ε`.
fn shifted_restrictions(
    sc: &mut SectionComplex,
    i: usize,
    from: &[Vec<i64>],
    to: &[Vec<i64>],
    eps: i64,
    grid: &GridPoset,
) -> Vec<Matrix> {
    grid.points()
        .map(|x| {
            let back: Vec<i64> = x.iter().map(|v| v - eps).collect();
            sc.restrict(i, &preimage_up(from, &back), &preimage_up(to, &x))
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct DegreeReport {
    pub degree: usize,
    /// Interleaving distance of the two derived images (one-parameter
    /// targets only).
    pub distance: Option<Ext>,
    pub certificate: EpsilonCertificate,
    pub certificate_valid: bool,
    pub holds: bool,
}

#[derive(Clone, Debug)]
pub struct DirectImageReport {
    pub sup_norm: i64,
    pub degrees: Vec<DegreeReport>,
    pub holds: bool,
    /// The comparison is a degreewise upper bound built from chain-level
    /// interleavings, not the derived convolution distance itself.
    pub bound_only: bool,
}

impl DirectImageReport {
    pub fn to_json(&self) -> Value {
        json!({
            "sup_norm": self.sup_norm.to_string(),
            "holds": self.holds,
            "bound_only": self.bound_only,
            "degrees": self.degrees.iter().map(|d| json!({
                "degree": d.degree,
                "distance": d.distance.map(Ext::to_json),
                "epsilon": d.certificate.epsilon.to_string(),
                "certificate_valid": d.certificate_valid,
                "holds": d.holds,
            })).collect::<Vec<_>>(),
        })
    }
}

fn sup_norm(f: &[Vec<i64>], g: &[Vec<i64>]) -> i64 {
    f.iter()
        .zip(g)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
        .max()
        .unwrap_or(0)
}

fn target_box(f: &[Vec<i64>], g: &[Vec<i64>], dim: usize) -> GridPoset {
    let pts = || f.iter().chain(g);
    let lo = (0..dim).map(|k| pts().map(|p| p[k]).min().unwrap()).collect();
    let hi = (0..dim).map(|k| pts().map(|p| p[k]).max().unwrap()).collect();
    GridPoset::new(lo, hi).unwrap()
}

/// Derived direct images `R f_* F` and `R g_* F` along monotone maps from a
/// finite partial order into `Z^n`, compared degree by degree with
/// `ε = ||f - g||_∞`: the restriction maps `Φ`, `Ψ` between preimages are
/// checked as an ε-interleaving of the cohomology modules, and for one
/// parameter the barcode distance is computed and compared with `ε`.
pub fn direct_image_stability_check(
    q: &FinitePreorder,
    module: &PosetModule,
    f: &[Vec<i64>],
    g: &[Vec<i64>],
) -> Result<DirectImageReport> {
    if module.base() != q {
        return Err(Error::BaseMismatch("module is not on the given poset".into()));
    }
    poset::check_monotone_into_grid(q, f)?;
    poset::check_monotone_into_grid(q, g)?;
    let dim = f.first().map_or(1, Vec::len);
    if f.iter().chain(g).any(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch("maps into grids of different dimensions".into()));
    }
    let eps = sup_norm(f, g);
    if q.is_empty() {
        return Ok(DirectImageReport {
            sup_norm: eps,
            degrees: vec![],
            holds: true,
            bound_only: true,
        });
    }
    let res = poset_injective_resolution(module, default_cap(dim).max(q.len() + 1))?;
    let mut sc = SectionComplex::new(&res);
    let t = target_box(f, g, dim);
    let mut degrees = Vec::new();
    for i in 0..sc.degrees() {
        let hf = direct_image_module(&mut sc, i, f, &t);
        let hg = direct_image_module(&mut sc, i, g, &t);
        let b = certificate_box(&hf, &hg, eps);
        let cert = EpsilonCertificate {
            epsilon: eps,
            f: shifted_restrictions(&mut sc, i, f, g, eps, &b),
            g: shifted_restrictions(&mut sc, i, g, f, eps, &b),
            grid: b,
            m: hf,
            n: hg,
        };
        let valid = certificate_validate(&cert);
        let distance = if dim == 1 {
            Some(bottleneck_distance(&barcode_extract(&cert.m)?, &barcode_extract(&cert.n)?).value)
        } else {
            None
        };
        let holds = valid && distance.is_none_or(|d| d <= Ext::int(eps));
        degrees.push(DegreeReport {
            degree: i,
            distance,
            certificate: cert,
            certificate_valid: valid,
            holds,
        });
    }
    Ok(DirectImageReport {
        sup_norm: eps,
        holds: degrees.iter().all(|d| d.holds),
        degrees,
        bound_only: true,
    })
}

/// Pulls `module` (on the preorder `base`) back to the refinement `X_fg` of
/// `base` in which `f` and `g` are monotone, then runs
/// [`direct_image_stability_check`] on its skeleton.
pub fn pullback_stability_check(
    base: &FinitePreorder,
    module: &PosetModule,
    f: &[Vec<i64>],
    g: &[Vec<i64>],
) -> Result<DirectImageReport> {
    let xfg = poset::pullback_refinement(base, &[f.to_vec(), g.to_vec()])?;
    let pulled = module.refine(&xfg)?;
    let (sk, _, reps) = xfg.skeleton();
    let (on_sk, _) = pulled.on_skeleton();
    let pick = |v: &[Vec<i64>]| reps.iter().map(|&r| v[r].clone()).collect::<Vec<_>>();
    direct_image_stability_check(&sk, &on_sk, &pick(f), &pick(g))
}

/// The cells of the square boundary (4 vertices, then 4 edges) under the
/// face order, with the projection onto the first axis at doubled scale:
/// vertices at their coordinate, edges at their midpoint.
pub fn square_face_poset() -> (FinitePreorder, Vec<Vec<i64>>) {
    // vertices (0,0) (1,0) (0,1) (1,1) -> x = 0, 2, 0, 2 at doubled scale
    let k = SimplicialComplex::square();
    let cells = k.simplices();
    let mut pairs = Vec::new();
    for (i, a) in cells.iter().enumerate() {
        for (j, b) in cells.iter().enumerate() {
            if i != j && a.iter().all(|v| b.contains(v)) {
                pairs.push((i, j));
            }
        }
    }
    let order = FinitePreorder::from_relations(cells.len(), &pairs).unwrap();
    let x = [0, 2, 0, 2];
    let proj = cells
        .iter()
        .map(|c| vec![c.iter().map(|&v| x[v]).sum::<i64>() / c.len() as i64])
        .collect();
    (order, proj)
}

/// The projection of the circle to the line is not continuous for the
/// Alexandrov topology on the line: it is not monotone on the face poset.
pub fn projection_is_monotone() -> bool {
    let (order, proj) = square_face_poset();
    poset::is_monotone_into_grid(&order, &proj)
}
