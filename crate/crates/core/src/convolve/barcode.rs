//! Barcodes of one-parameter grid modules and lattice realizations of
//! barcodes.
//!
//! A lattice bar `[b, d)` with integer ends stands for the points
//! `b, ..., d - 1` of `Z`; infinite ends are allowed. A real bar `[a, b)`
//! samples to the lattice either as the points `a..b-1` (left sampling) or
//! as `a+1..b` (right sampling). Left sampling matches the cosheaf formulas
//! bar for bar; right sampling matches the sheaf formulas, and sends
//! `k(-inf, b)` to the principal down-set of `b`.

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactalg::{self, Field, Matrix};
use crate::interval::{translate, Barcode, Ext, Interval, Mode, Rational};
use crate::pmodule::GridModule;
use crate::poset::GridPoset;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    Left,
    Right,
}

impl Sampling {
    /// The sampling under which the lattice oracle reproduces the real-line
    /// formulas of `mode`.
    pub fn for_mode(mode: Mode) -> Sampling {
        match mode {
            Mode::Sheaf => Sampling::Right,
            Mode::Cosheaf => Sampling::Left,
        }
    }
}

fn integer(e: Ext) -> Result<Option<i64>> {
    match e {
        Ext::Fin(r) if r.is_integer() => Ok(Some(r.to_integer())),
        Ext::Fin(r) => Err(Error::Unsupported(format!("non-integer endpoint {r} on the lattice"))),
        _ => Ok(None),
    }
}

fn check_lattice(b: &Barcode) -> Result<()> {
    for (i, _) in b.bars() {
        if !i.is_half_open() {
            return Err(Error::Unsupported(format!("lattice bars are half-open, got {i}")));
        }
        integer(i.left.value)?;
        integer(i.right.value)?;
    }
    Ok(())
}

/// Real half-open bars with integer ends to lattice bars.
pub fn to_lattice(b: &Barcode, s: Sampling) -> Result<Barcode> {
    check_lattice(b)?;
    Ok(match s {
        Sampling::Left => b.clone(),
        Sampling::Right => translate(b, Rational::from_integer(1)),
    })
}

/// Inverse of [`to_lattice`].
pub fn from_lattice(b: &Barcode, s: Sampling) -> Result<Barcode> {
    check_lattice(b)?;
    Ok(match s {
        Sampling::Left => b.clone(),
        Sampling::Right => translate(b, Rational::from_integer(-1)),
    })
}

/// The direct sum of interval modules of a lattice barcode. The box runs
/// from one below the smallest finite end to the largest finite end, every
/// edge stabilized.
pub fn barcode_module(field: Field, b: &Barcode) -> Result<GridModule> {
    check_lattice(b)?;
    let mut ends = Vec::new();
    for (i, _) in b.bars() {
        ends.extend(integer(i.left.value)?);
        ends.extend(integer(i.right.value)?);
    }
    let lo = ends.iter().min().map_or(0, |v| v - 1);
    let hi = ends.iter().max().copied().unwrap_or(0).max(lo);
    barcode_module_on(field, b, &GridPoset::line(lo, hi)?)
}

/// As [`barcode_module`], on a given stabilized box, which must contain one
/// point below every finite birth and every finite death.
pub fn barcode_module_on(field: Field, b: &Barcode, grid: &GridPoset) -> Result<GridModule> {
    check_lattice(b)?;
    let (lo, hi) = (grid.lo()[0], grid.hi()[0]);
    let mut parts = Vec::new();
    for i in b.expanded() {
        let birth = integer(i.left.value)?.unwrap_or(i64::MIN);
        let death = integer(i.right.value)?.unwrap_or(i64::MAX);
        if (birth != i64::MIN && birth <= lo) || (death != i64::MAX && death > hi) {
            return Err(Error::OutOfBox(format!("bar {i} does not fit the box [{lo}, {hi}]")));
        }
        let dims = (lo..=hi).map(|x| (birth <= x && x < death) as usize).collect();
        parts.push(GridModule::indicator(field, grid.clone(), dims, vec![true], vec![true])?);
    }
    let mut acc = GridModule::zero(field, grid.clone()).with_flags(vec![true], vec![true])?;
    for p in &parts {
        acc = acc.direct_sum(p)?;
    }
    Ok(acc)
}

fn check_one_parameter(m: &GridModule) -> Result<()> {
    if m.dim() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "barcodes need a one-parameter module, got dimension {}",
            m.dim()
        )));
    }
    if !m.validate() {
        return Err(Error::InvalidModule("structure maps do not compose".into()));
    }
    Ok(())
}

fn lattice_bar(birth: i64, last: i64, lo: i64, hi: i64) -> Interval {
    let b = if birth == lo { Ext::NegInf } else { Ext::int(birth) };
    let d = if last == hi { Ext::PosInf } else { Ext::int(last + 1) };
    Interval::co(b, d)
}

/// The lattice barcode of a one-parameter module, by inclusion-exclusion of
/// the ranks `r(i, j)` of `M_i -> M_j` on its clamp box.
pub fn barcode_extract(m: &GridModule) -> Result<Barcode> {
    check_one_parameter(m)?;
    let c = m.clamped();
    let (lo, hi) = (c.grid().lo()[0], c.grid().hi()[0]);
    let r = |i: i64, j: i64| -> i64 {
        if i < lo || j > hi {
            return 0;
        }
        exactalg::rank(&c.map_z(&[i], &[j])) as i64
    };
    let mut bars = Vec::new();
    for i in lo..=hi {
        for j in i..=hi {
            let mult = r(i, j) - r(i - 1, j) - r(i, j + 1) + r(i - 1, j + 1);
            debug_assert!(mult >= 0);
            if mult > 0 {
                bars.push((lattice_bar(i, j, lo, hi), mult as usize));
            }
        }
    }
    Ok(Barcode::from_bars(bars))
}

/// An explicit isomorphism from a one-parameter module to a direct sum of
/// interval modules, on the clamp box of the module.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub module: GridModule,
    /// Lattice bars, one per summand.
    pub bars: Vec<Interval>,
    /// Summands alive at each box point, in increasing order.
    pub alive: Vec<Vec<usize>>,
    /// Invertible change of basis at each point: column `c` is the vector of
    /// summand `alive[x][c]`.
    pub basis: Vec<Matrix>,
}

impl Decomposition {
    pub fn barcode(&self) -> Barcode {
        Barcode::from_intervals(self.bars.iter().copied())
    }

    /// Every basis is square and invertible, and every cover map sends the
    /// vector of a summand to the vector of the same summand or to zero when
    /// the summand dies.
    pub fn verify(&self) -> bool {
        let m = &self.module;
        let g = m.grid();
        let field = m.field();
        for x in 0..g.len() {
            let b = &self.basis[x];
            if b.rows() != m.dim_at_index(x) || b.cols() != b.rows() || exactalg::rank(b) != b.rows() {
                return false;
            }
            let Some(y) = g.cover(x, 0) else { continue };
            let pushed = m.cover_map(0, x).unwrap().mul(b);
            for (c, s) in self.alive[x].iter().enumerate() {
                let expected = match self.alive[y].iter().position(|t| t == s) {
                    Some(p) => self.basis[y].block(0, p, self.basis[y].rows(), 1),
                    None => Matrix::zeros(field, m.dim_at_index(y), 1),
                };
                if pushed.block(0, c, pushed.rows(), 1) != expected {
                    return false;
                }
            }
        }
        true
    }

    /// Box index and alive-position of summand `s` at `z in Z`, following
    /// the stabilized edges.
    pub fn locate(&self, s: usize, z: i64) -> Option<(usize, usize)> {
        let g = self.module.grid();
        let x = g.index(&[z.clamp(g.lo()[0], g.hi()[0])]).unwrap();
        self.alive[x].iter().position(|&t| t == s).map(|p| (x, p))
    }
}

/// Interval decomposition by column reduction of the relations of a
/// minimal presentation, with the youngest generator as pivot.
pub fn decompose_1d(m: &GridModule) -> Result<Decomposition> {
    check_one_parameter(m)?;
    let c = m.clamped();
    let field = c.field();
    let g = c.grid().clone();
    let (lo, hi) = (g.lo()[0], g.hi()[0]);
    let len = g.len();
    // generators: (birth index, vector in M_birth), sorted by birth
    let mut gens: Vec<(usize, Matrix)> = Vec::new();
    for x in 0..len {
        let d = c.dim_at_index(x);
        let incoming = match g.cocover(x, 0) {
            Some(w) => c.cover_map(0, w).unwrap().clone(),
            None => Matrix::zeros(field, d, 0),
        };
        let q = exactalg::cokernel_projection(&incoming);
        let lift = exactalg::right_inverse(&q);
        for k in 0..lift.cols() {
            gens.push((x, lift.block(0, k, d, 1)));
        }
    }
    let ng = gens.len();
    let eps = |x: usize, upto: usize| -> Matrix {
        let cols: Vec<Matrix> = gens[..upto].iter().map(|(b, v)| c.map_between(*b, x).mul(v)).collect();
        let refs: Vec<&Matrix> = cols.iter().collect();
        Matrix::hstack(field, c.dim_at_index(x), &refs)
    };
    let mut pivot_of: Vec<Option<(Vec<u32>, usize)>> = vec![None; ng];
    let mut relations: Vec<Matrix> = Vec::new();
    for x in 0..len {
        let upto = gens.iter().take_while(|(b, _)| *b <= x).count();
        let ker = exactalg::kernel_basis(&eps(x, upto));
        for k in 0..ker.cols() {
            let mut v = vec![0; ng];
            v[..upto].copy_from_slice(&ker.col_vec(k));
            let col = Matrix::column(field, &v);
            let mut stacked: Vec<&Matrix> = relations.iter().collect();
            let before = exactalg::rank(&Matrix::hstack(field, ng, &stacked));
            stacked.push(&col);
            if exactalg::rank(&Matrix::hstack(field, ng, &stacked)) == before {
                continue;
            }
            relations.push(col);
            // reduce against earlier relations sharing the pivot
            loop {
                let p = v.iter().rposition(|&e| e != 0).expect("new relations are nonzero");
                match &pivot_of[p] {
                    Some((w, _)) => {
                        let factor = field.mul(v[p], field.inv(w[p]));
                        for i in 0..ng {
                            v[i] = field.sub(v[i], field.mul(factor, w[i]));
                        }
                    }
                    None => {
                        pivot_of[p] = Some((v.clone(), x));
                        break;
                    }
                }
            }
        }
    }
    // new generator vectors: normalized reduced relations for paired
    // generators, the generator itself otherwise
    let mut bars = Vec::with_capacity(ng);
    let mut start_vec = Vec::with_capacity(ng);
    for (gi, (birth, v)) in gens.iter().enumerate() {
        match &pivot_of[gi] {
            Some((w, death)) => {
                let inv = field.inv(w[gi]);
                let mut acc = Matrix::zeros(field, c.dim_at_index(*birth), 1);
                for (gj, &coef) in w.iter().enumerate() {
                    if coef != 0 {
                        let (bj, vj) = &gens[gj];
                        acc = acc.add(&c.map_between(*bj, *birth).mul(vj).scale(field.mul(coef, inv)));
                    }
                }
                bars.push(lattice_bar(g.coord(*birth, 0), g.coord(*death, 0) - 1, lo, hi));
                start_vec.push(acc);
            }
            None => {
                bars.push(lattice_bar(g.coord(*birth, 0), hi, lo, hi));
                start_vec.push(v.clone());
            }
        }
    }
    let mut alive = vec![Vec::new(); len];
    let mut basis = Vec::with_capacity(len);
    for x in 0..len {
        let mut cols = Vec::new();
        for (s, (birth, _)) in gens.iter().enumerate() {
            if *birth > x {
                continue;
            }
            if let Some((_, death)) = &pivot_of[s] {
                if *death <= x {
                    continue;
                }
            }
            alive[x].push(s);
            cols.push(c.map_between(*birth, x).mul(&start_vec[s]));
        }
        let refs: Vec<&Matrix> = cols.iter().collect();
        basis.push(Matrix::hstack(field, c.dim_at_index(x), &refs));
    }
    Ok(Decomposition {
        module: c,
        bars,
        alive,
        basis,
    })
}

/// Largest absolute finite endpoint, used to size boxes.
pub fn max_abs_endpoint(b: &Barcode) -> i64 {
    b.bars()
        .iter()
        .flat_map(|(i, _)| [i.left.value, i.right.value])
        .filter_map(|e| e.finite())
        .map(|r| r.abs().ceil().to_integer())
        .max()
        .unwrap_or(0)
}
