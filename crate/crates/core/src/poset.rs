//! Finite grid posets in `Z^n`, finite preorders, and monotone maps.

use crate::error::{Error, Result};

/// A box `[lo, hi]` in `Z^n` with the product order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GridPoset {
    lo: Vec<i64>,
    hi: Vec<i64>,
    strides: Vec<usize>,
    len: usize,
}

impl GridPoset {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Result<GridPoset> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::DimensionMismatch(format!(
                "box bounds of lengths {} and {}",
                lo.len(),
                hi.len()
            )));
        }
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Err(Error::InvalidModule(format!("empty box {lo:?}..{hi:?}")));
        }
        let n = lo.len();
        let mut strides = vec![1usize; n];
        for k in (0..n.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * (hi[k + 1] - lo[k + 1] + 1) as usize;
        }
        let len = strides[0] * (hi[0] - lo[0] + 1) as usize;
        Ok(GridPoset {
            lo,
            hi,
            strides,
            len,
        })
    }

    /// One-parameter box `[lo, hi]`.
    pub fn line(lo: i64, hi: i64) -> Result<GridPoset> {
        GridPoset::new(vec![lo], vec![hi])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn hi(&self) -> &[i64] {
        &self.hi
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn extent(&self, axis: usize) -> usize {
        (self.hi[axis] - self.lo[axis] + 1) as usize
    }

    pub fn contains(&self, p: &[i64]) -> bool {
        p.len() == self.dim()
            && p
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(x, (l, h))| l <= x && x <= h)
    }

    pub fn index(&self, p: &[i64]) -> Option<usize> {
        if !self.contains(p) {
            return None;
        }
        Some(
            p.iter()
                .zip(&self.lo)
                .zip(&self.strides)
                .map(|((x, l), s)| (x - l) as usize * s)
                .sum(),
        )
    }

    pub fn point(&self, idx: usize) -> Vec<i64> {
        debug_assert!(idx < self.len);
        let mut rem = idx;
        let mut p = Vec::with_capacity(self.dim());
        for k in 0..self.dim() {
            p.push(self.lo[k] + (rem / self.strides[k]) as i64);
            rem %= self.strides[k];
        }
        p
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.len).map(move |i| self.point(i))
    }

    /// Coordinate of point `idx` along `axis`.
    pub fn coord(&self, idx: usize, axis: usize) -> i64 {
        self.lo[axis] + ((idx / self.strides[axis]) % self.extent(axis)) as i64
    }

    /// The point one step up along `axis`, if it stays in the box.
    pub fn cover(&self, idx: usize, axis: usize) -> Option<usize> {
        if self.coord(idx, axis) < self.hi[axis] {
            Some(idx + self.strides[axis])
        } else {
            None
        }
    }

    /// The point one step down along `axis`, if it stays in the box.
    pub fn cocover(&self, idx: usize, axis: usize) -> Option<usize> {
        if self.coord(idx, axis) > self.lo[axis] {
            Some(idx - self.strides[axis])
        } else {
            None
        }
    }

    pub fn leq(&self, a: &[i64], b: &[i64]) -> Result<bool> {
        for p in [a, b] {
            if !self.contains(p) {
                return Err(Error::OutOfBox(format!("{p:?} not in {:?}..{:?}", self.lo, self.hi)));
            }
        }
        Ok(leq(a, b))
    }

    pub fn principal_points(&self, s: &PrincipalSet) -> Vec<Vec<i64>> {
        self.points()
            .filter(|y| match s.kind {
                PrincipalKind::Up => leq(&s.base, y),
                PrincipalKind::Down => leq(y, &s.base),
            })
            .collect()
    }

    /// Convex and zigzag-connected. The empty set is not an interval.
    pub fn is_interval(&self, set: &[Vec<i64>]) -> bool {
        if set.is_empty() || set.iter().any(|p| !self.contains(p)) {
            return false;
        }
        let mut member = vec![false; self.len];
        for p in set {
            member[self.index(p).unwrap()] = true;
        }
        let idxs: Vec<usize> = (0..self.len).filter(|&i| member[i]).collect();
        let pts: Vec<Vec<i64>> = idxs.iter().map(|&i| self.point(i)).collect();
        for a in &pts {
            for b in &pts {
                if leq(a, b) {
                    let sub = GridPoset::new(a.clone(), b.clone()).unwrap();
                    if sub.points().any(|c| !member[self.index(&c).unwrap()]) {
                        return false;
                    }
                }
            }
        }
        let mut parent: Vec<usize> = (0..pts.len()).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                if leq(&pts[i], &pts[j]) || leq(&pts[j], &pts[i]) {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    parent[ri] = rj;
                }
            }
        }
        let root = find(&mut parent, 0);
        (0..pts.len()).all(|i| find(&mut parent, i) == root)
    }

    /// Smallest box containing both.
    pub fn hull(&self, other: &GridPoset) -> GridPoset {
        assert_eq!(self.dim(), other.dim());
        GridPoset::new(
            self.lo.iter().zip(&other.lo).map(|(a, b)| *a.min(b)).collect(),
            self.hi.iter().zip(&other.hi).map(|(a, b)| *a.max(b)).collect(),
        )
        .unwrap()
    }

    pub fn contains_box(&self, other: &GridPoset) -> bool {
        self.dim() == other.dim() && self.contains(&other.lo) && self.contains(&other.hi)
    }

    pub fn translate(&self, v: &[i64]) -> GridPoset {
        GridPoset::new(
            self.lo.iter().zip(v).map(|(a, b)| a + b).collect(),
            self.hi.iter().zip(v).map(|(a, b)| a + b).collect(),
        )
        .unwrap()
    }

    /// The grid viewed as an abstract finite poset (same indexing).
    pub fn to_preorder(&self) -> FinitePreorder {
        let pts: Vec<Vec<i64>> = self.points().collect();
        let n = pts.len();
        let mut rel = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                rel[i * n + j] = leq(&pts[i], &pts[j]);
            }
        }
        FinitePreorder { n, rel }
    }
}

/// Componentwise order on `Z^n`.
pub fn leq(a: &[i64], b: &[i64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x <= y)
}

pub fn join(a: &[i64], b: &[i64]) -> Result<Vec<i64>> {
    same_dim(a, b)?;
    Ok(a.iter().zip(b).map(|(x, y)| *x.max(y)).collect())
}

pub fn meet(a: &[i64], b: &[i64]) -> Result<Vec<i64>> {
    same_dim(a, b)?;
    Ok(a.iter().zip(b).map(|(x, y)| *x.min(y)).collect())
}

fn same_dim(a: &[i64], b: &[i64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "points of dimension {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PrincipalKind {
    Up,
    Down,
}

/// `U_x` or `D_x`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PrincipalSet {
    pub base: Vec<i64>,
    pub kind: PrincipalKind,
}

impl PrincipalSet {
    pub fn up(base: Vec<i64>) -> PrincipalSet {
        PrincipalSet {
            base,
            kind: PrincipalKind::Up,
        }
    }

    pub fn down(base: Vec<i64>) -> PrincipalSet {
        PrincipalSet {
            base,
            kind: PrincipalKind::Down,
        }
    }
}

/// A reflexive, transitive relation on `0..n`, stored densely.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FinitePreorder {
    n: usize,
    rel: Vec<bool>,
}

impl FinitePreorder {
    /// Checks reflexivity and transitivity of the given relation matrix.
    pub fn new(n: usize, rel: Vec<bool>) -> Result<FinitePreorder> {
        if rel.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "relation of size {} on {} elements",
                rel.len(),
                n
            )));
        }
        let p = FinitePreorder { n, rel };
        if !p.is_reflexive() || !p.is_transitive() {
            return Err(Error::InvalidModule("relation is not a preorder".into()));
        }
        Ok(p)
    }

    /// Reflexive-transitive closure of the given pairs `(i, j)` meaning `i <= j`.
    pub fn from_relations(n: usize, pairs: &[(usize, usize)]) -> Result<FinitePreorder> {
        let mut rel = vec![false; n * n];
        for i in 0..n {
            rel[i * n + i] = true;
        }
        for &(i, j) in pairs {
            if i >= n || j >= n {
                return Err(Error::OutOfBox(format!("pair ({i}, {j}) on {n} elements")));
            }
            rel[i * n + j] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if rel[i * n + k] {
                    for j in 0..n {
                        if rel[k * n + j] {
                            rel[i * n + j] = true;
                        }
                    }
                }
            }
        }
        Ok(FinitePreorder { n, rel })
    }

    pub fn discrete(n: usize) -> FinitePreorder {
        FinitePreorder::from_relations(n, &[]).unwrap()
    }

    pub fn chain(n: usize) -> FinitePreorder {
        let pairs: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        FinitePreorder::from_relations(n, &pairs).unwrap()
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.rel[i * self.n + j]
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.n).all(|i| self.leq(i, i))
    }

    pub fn is_transitive(&self) -> bool {
        for i in 0..self.n {
            for j in 0..self.n {
                if !self.leq(i, j) {
                    continue;
                }
                for k in 0..self.n {
                    if self.leq(j, k) && !self.leq(i, k) {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn is_partial_order(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || !(self.leq(i, j) && self.leq(j, i))))
    }

    pub fn up_set(&self, i: usize) -> Vec<usize> {
        (0..self.n).filter(|&j| self.leq(i, j)).collect()
    }

    pub fn down_set(&self, i: usize) -> Vec<usize> {
        (0..self.n).filter(|&j| self.leq(j, i)).collect()
    }

    /// Pairs `i < j` with nothing strictly between them (for partial orders).
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if i == j || !self.leq(i, j) || self.leq(j, i) {
                    continue;
                }
                let between = (0..self.n).any(|k| {
                    k != i
                        && k != j
                        && self.leq(i, k)
                        && self.leq(k, j)
                        && !self.leq(k, i)
                        && !self.leq(j, k)
                });
                if !between {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Relation holding when it holds in both.
    pub fn intersect(&self, other: &FinitePreorder) -> Result<FinitePreorder> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "preorders on {} and {} elements",
                self.n, other.n
            )));
        }
        Ok(FinitePreorder {
            n: self.n,
            rel: self.rel.iter().zip(&other.rel).map(|(a, b)| *a && *b).collect(),
        })
    }

    pub fn is_subrelation_of(&self, other: &FinitePreorder) -> bool {
        self.n == other.n && self.rel.iter().zip(&other.rel).all(|(a, b)| !*a || *b)
    }

    /// Quotient by the equivalence `i <= j <= i`. Returns the poset, the class
    /// of every element, and one representative per class.
    pub fn skeleton(&self) -> (FinitePreorder, Vec<usize>, Vec<usize>) {
        let mut class = vec![usize::MAX; self.n];
        let mut reps = Vec::new();
        for i in 0..self.n {
            if class[i] != usize::MAX {
                continue;
            }
            let c = reps.len();
            reps.push(i);
            for j in i..self.n {
                if self.leq(i, j) && self.leq(j, i) {
                    class[j] = c;
                }
            }
        }
        let m = reps.len();
        let mut rel = vec![false; m * m];
        for a in 0..m {
            for b in 0..m {
                rel[a * m + b] = self.leq(reps[a], reps[b]);
            }
        }
        (FinitePreorder { n: m, rel }, class, reps)
    }
}

/// An order-preserving assignment between finite preorders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotoneMap {
    source: FinitePreorder,
    target: FinitePreorder,
    assign: Vec<usize>,
}

impl MonotoneMap {
    pub fn new(
        source: FinitePreorder,
        target: FinitePreorder,
        assign: Vec<usize>,
    ) -> Result<MonotoneMap> {
        if assign.len() != source.len() || assign.iter().any(|&y| y >= target.len()) {
            return Err(Error::DimensionMismatch(
                "assignment does not match source and target sizes".into(),
            ));
        }
        if let Some((a, b)) = first_violation(&source, |a, b| target.leq(assign[a], assign[b])) {
            return Err(Error::NonMonotone(format!(
                "{a} <= {b} but {} is not below {}",
                assign[a], assign[b]
            )));
        }
        Ok(MonotoneMap {
            source,
            target,
            assign,
        })
    }

    pub fn identity(p: &FinitePreorder) -> MonotoneMap {
        MonotoneMap {
            source: p.clone(),
            target: p.clone(),
            assign: (0..p.len()).collect(),
        }
    }

    pub fn source(&self) -> &FinitePreorder {
        &self.source
    }

    pub fn target(&self) -> &FinitePreorder {
        &self.target
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assign
    }

    pub fn apply(&self, i: usize) -> usize {
        self.assign[i]
    }

    /// Elements of the source mapped into `set` (given as a membership mask).
    pub fn preimage(&self, mask: &[bool]) -> Vec<usize> {
        (0..self.source.len()).filter(|&i| mask[self.assign[i]]).collect()
    }
}

fn first_violation(
    source: &FinitePreorder,
    ok: impl Fn(usize, usize) -> bool,
) -> Option<(usize, usize)> {
    for a in 0..source.len() {
        for b in 0..source.len() {
            if source.leq(a, b) && !ok(a, b) {
                return Some((a, b));
            }
        }
    }
    None
}

/// Whether `values` (one grid point per element) is order preserving.
pub fn is_monotone_into_grid(source: &FinitePreorder, values: &[Vec<i64>]) -> bool {
    values.len() == source.len() && first_violation(source, |a, b| leq(&values[a], &values[b])).is_none()
}

pub fn check_monotone_into_grid(source: &FinitePreorder, values: &[Vec<i64>]) -> Result<()> {
    if values.len() != source.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} values for {} elements",
            values.len(),
            source.len()
        )));
    }
    match first_violation(source, |a, b| leq(&values[a], &values[b])) {
        None => Ok(()),
        Some((a, b)) => Err(Error::NonMonotone(format!(
            "{a} <= {b} but {:?} is not below {:?}",
            values[a], values[b]
        ))),
    }
}

/// Specialization preorder of the topology on `0..n` generated by the
/// preimages of all up-sets under each map: `x <= y` iff `f(x) <= f(y)` for
/// every map `f`.
pub fn pullback_preorder(n: usize, maps: &[Vec<Vec<i64>>]) -> Result<FinitePreorder> {
    for m in maps {
        if m.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "map with {} values on {} elements",
                m.len(),
                n
            )));
        }
    }
    let mut rel = vec![true; n * n];
    for m in maps {
        for i in 0..n {
            for j in 0..n {
                if !leq(&m[i], &m[j]) {
                    rel[i * n + j] = false;
                }
            }
        }
    }
    FinitePreorder::new(n, rel)
}

/// The pullback preorder refined by an existing topology on the set: a
/// set is open when it is open in `base` or a preimage of an up-set.
pub fn pullback_refinement(base: &FinitePreorder, maps: &[Vec<Vec<i64>>]) -> Result<FinitePreorder> {
    pullback_preorder(base.len(), maps)?.intersect(base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sq() -> GridPoset {
        GridPoset::new(vec![0, 0], vec![1, 1]).unwrap()
    }

    #[test]
    fn leq_examples() {
        let g = GridPoset::new(vec![0, 0], vec![3, 3]).unwrap();
        assert!(g.leq(&[1, 3], &[2, 3]).unwrap());
        assert!(!g.leq(&[1, 3], &[2, 2]).unwrap());
        assert!(g.leq(&[1, 1], &[1, 1]).unwrap());
        assert!(matches!(g.leq(&[4, 0], &[0, 0]), Err(Error::OutOfBox(_))));
    }

    #[test]
    fn lattice_ops() {
        assert_eq!(join(&[1, 3], &[2, 0]).unwrap(), vec![2, 3]);
        assert_eq!(meet(&[1, 3], &[2, 0]).unwrap(), vec![1, 0]);
        assert_eq!(join(&[1, 3], &[1, 3]).unwrap(), vec![1, 3]);
        assert!(join(&[1], &[1, 2]).is_err());
    }

    #[test]
    fn principal_examples() {
        let g = GridPoset::line(0, 4).unwrap();
        let up: Vec<i64> = g.principal_points(&PrincipalSet::up(vec![2])).into_iter().map(|p| p[0]).collect();
        assert_eq!(up, vec![2, 3, 4]);
        let down: Vec<i64> =
            g.principal_points(&PrincipalSet::down(vec![2])).into_iter().map(|p| p[0]).collect();
        assert_eq!(down, vec![0, 1, 2]);
        assert_eq!(sq().principal_points(&PrincipalSet::up(vec![0, 0])).len(), 4);
    }

    #[test]
    fn interval_examples() {
        let g = GridPoset::line(0, 5).unwrap();
        assert!(g.is_interval(&[vec![1], vec![2], vec![3]]));
        assert!(!g.is_interval(&[vec![1], vec![3]]));
        assert!(!sq().is_interval(&[vec![0, 1], vec![1, 0]]));
        assert!(sq().is_interval(&[vec![0, 1], vec![1, 0], vec![1, 1]]));
    }

    #[test]
    fn indexing_round_trip() {
        let g = GridPoset::new(vec![-1, 2, 0], vec![1, 4, 1]).unwrap();
        assert_eq!(g.len(), 18);
        for i in 0..g.len() {
            let p = g.point(i);
            assert_eq!(g.index(&p), Some(i));
            for k in 0..3 {
                assert_eq!(g.coord(i, k), p[k]);
                if let Some(j) = g.cover(i, k) {
                    let mut q = p.clone();
                    q[k] += 1;
                    assert_eq!(g.point(j), q);
                    assert_eq!(g.cocover(j, k), Some(i));
                }
            }
        }
    }

    #[test]
    fn pullback_examples() {
        // injective monotone image: induced order on the image
        let f = vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1]];
        let p = pullback_preorder(4, std::slice::from_ref(&f)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(p.leq(i, j), leq(&f[i], &f[j]));
            }
        }
        let c = pullback_preorder(3, &[vec![vec![5]; 3]]).unwrap();
        assert!((0..3).all(|i| (0..3).all(|j| c.leq(i, j))));
        let twice = pullback_preorder(4, &[f.clone(), f.clone()]).unwrap();
        assert_eq!(twice, p);
    }

    #[test]
    fn skeleton_collapses_cycles() {
        let p = FinitePreorder::from_relations(3, &[(0, 1), (1, 0), (1, 2)]).unwrap();
        let (s, class, reps) = p.skeleton();
        assert_eq!(s.len(), 2);
        assert_eq!(class, vec![0, 0, 1]);
        assert_eq!(reps, vec![0, 2]);
        assert!(s.is_partial_order());
    }

    #[test]
    fn monotone_map_rejects_violations() {
        let c = FinitePreorder::chain(3);
        assert!(MonotoneMap::new(c.clone(), c.clone(), vec![0, 1, 1]).is_ok());
        assert!(matches!(
            MonotoneMap::new(c.clone(), c, vec![1, 0, 2]),
            Err(Error::NonMonotone(_))
        ));
    }

    fn arb_pt() -> impl Strategy<Value = Vec<i64>> {
        prop::collection::vec(-3i64..4, 2)
    }

    proptest! {
        #[test]
        fn order_axioms(a in arb_pt(), b in arb_pt(), c in arb_pt()) {
            prop_assert!(leq(&a, &a));
            if leq(&a, &b) && leq(&b, &a) { prop_assert_eq!(&a, &b); }
            if leq(&a, &b) && leq(&b, &c) { prop_assert!(leq(&a, &c)); }
            prop_assert_eq!(meet(&a, &join(&a, &b).unwrap()).unwrap(), a.clone());
            prop_assert_eq!(join(&a, &meet(&a, &b).unwrap()).unwrap(), a);
        }

        #[test]
        fn principal_sets_are_intervals(x in arb_pt(), up in any::<bool>()) {
            let g = GridPoset::new(vec![-3, -3], vec![3, 3]).unwrap();
            let s = if up { PrincipalSet::up(x) } else { PrincipalSet::down(x) };
            prop_assert!(g.is_interval(&g.principal_points(&s)));
        }

        #[test]
        fn pullback_is_preorder(vals in prop::collection::vec(prop::collection::vec(arb_pt(), 5), 1..3)) {
            let p = pullback_preorder(5, &vals).unwrap();
            prop_assert!(p.is_reflexive());
            prop_assert!(p.is_transitive());
        }
    }
}
