//! Cochain complexes of grid modules and their cohomology.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exactalg::{self, Matrix};
use crate::interval::GradedBarcode;
use crate::pmodule::{GridModule, Morphism};

use super::barcode::barcode_extract;

/// `C^lowest -> C^{lowest+1} -> ...`, all terms on the same box and flags.
/// Chain complexes are stored with negated degrees.
#[derive(Clone, Debug)]
pub struct GridComplex {
    lowest: i32,
    terms: Vec<GridModule>,
    differentials: Vec<Morphism>,
}

impl GridComplex {
    /// Checks shapes, naturality and `d ∘ d = 0`.
    pub fn new(lowest: i32, terms: Vec<GridModule>, differentials: Vec<Morphism>) -> Result<GridComplex> {
        if terms.is_empty() {
            return Err(Error::InvalidComplex("a complex needs at least one term".into()));
        }
        if differentials.len() + 1 != terms.len() {
            return Err(Error::InvalidComplex(format!(
                "{} terms need {} differentials, got {}",
                terms.len(),
                terms.len() - 1,
                differentials.len()
            )));
        }
        for t in &terms[1..] {
            if !t.same_base(&terms[0]) {
                return Err(Error::InvalidComplex("terms on different boxes".into()));
            }
        }
        for (j, d) in differentials.iter().enumerate() {
            if !d.is_natural(&terms[j], &terms[j + 1]) {
                return Err(Error::InvalidComplex(format!("differential {j} is not a morphism")));
            }
        }
        for w in differentials.windows(2) {
            if !w[1].compose(&w[0]).is_zero() {
                return Err(Error::InvalidComplex("d ∘ d is nonzero".into()));
            }
        }
        Ok(GridComplex {
            lowest,
            terms,
            differentials,
        })
    }

    /// A single module in degree `degree`.
    pub fn concentrated(degree: i32, m: GridModule) -> GridComplex {
        GridComplex {
            lowest: degree,
            terms: vec![m],
            differentials: vec![],
        }
    }

    pub fn lowest(&self) -> i32 {
        self.lowest
    }

    pub fn terms(&self) -> &[GridModule] {
        &self.terms
    }

    pub fn differentials(&self) -> &[Morphism] {
        &self.differentials
    }

    pub fn has_zero_differentials(&self) -> bool {
        self.differentials.iter().all(Morphism::is_zero)
    }

    /// `H^j = ker d^j / im d^{j-1}` at every point, with the induced maps.
    pub fn cohomology(&self) -> GradedModule {
        let mut degrees = BTreeMap::new();
        for j in 0..self.terms.len() {
            let h = self.cohomology_at(j);
            if !h.is_zero() {
                degrees.insert(self.lowest + j as i32, h);
            }
        }
        GradedModule { degrees }
    }

    fn cohomology_at(&self, j: usize) -> GridModule {
        let c = &self.terms[j];
        let field = c.field();
        let grid = c.grid().clone();
        struct Sub {
            k: Matrix,
            q: Matrix,
            rinv: Matrix,
        }
        let subs: Vec<Sub> = (0..grid.len())
            .map(|x| {
                let d = c.dim_at_index(x);
                let k = match self.differentials.get(j) {
                    Some(out) => exactalg::kernel_basis(&out.components[x]),
                    None => Matrix::identity(field, d),
                };
                let incoming = match j.checked_sub(1) {
                    Some(i) => exactalg::solve_exact(&k, &self.differentials[i].components[x]),
                    None => Matrix::zeros(field, k.cols(), 0),
                };
                let q = exactalg::cokernel_projection(&incoming);
                let rinv = exactalg::right_inverse(&q);
                Sub { k, q, rinv }
            })
            .collect();
        let dims = subs.iter().map(|s| s.q.rows()).collect();
        GridModule::new(
            field,
            grid.clone(),
            dims,
            |axis, x| {
                let y = grid.cover(x, axis).unwrap();
                let t = c.cover_map(axis, x).unwrap();
                let (a, b) = (&subs[x], &subs[y]);
                let pushed = t.mul(&a.k).mul(&a.rinv);
                b.q.mul(&exactalg::solve_exact(&b.k, &pushed))
            },
            c.stab_left().to_vec(),
            c.stab_right().to_vec(),
        )
        .expect("shapes are consistent by construction")
    }
}

/// Modules indexed by degree; zero degrees are not stored.
#[derive(Clone, Debug, Default)]
pub struct GradedModule {
    pub degrees: BTreeMap<i32, GridModule>,
}

impl GradedModule {
    pub fn degree(&self, d: i32) -> Option<&GridModule> {
        self.degrees.get(&d)
    }

    pub fn is_zero(&self) -> bool {
        self.degrees.is_empty()
    }

    /// Lattice barcodes of every degree (one-parameter modules only).
    pub fn barcodes(&self) -> Result<GradedBarcode> {
        let mut g = GradedBarcode::new();
        for (&d, m) in &self.degrees {
            g.insert(d, barcode_extract(m)?);
        }
        Ok(g)
    }

    /// Reindexes by `d -> -d`, turning cochain degrees into homological ones.
    pub fn negate_degrees(self) -> GradedModule {
        GradedModule {
            degrees: self.degrees.into_iter().map(|(d, m)| (-d, m)).collect(),
        }
    }
}
