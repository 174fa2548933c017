//! Convolution of persistence modules on `Z^n`: external tensor products,
//! the limit and colimit formulas, and derived convolutions computed by
//! applying them termwise to resolutions.

mod barcode;
mod complex;
mod oracle;
mod resolution;

pub use barcode::{
    barcode_extract, barcode_module, barcode_module_on, decompose_1d, from_lattice, max_abs_endpoint, to_lattice,
    Decomposition, Sampling,
};
pub use complex::{GradedModule, GridComplex};
pub use oracle::{cosheaf_convolve_oracle, safe_window, sheaf_convolve_oracle};
pub use resolution::{
    default_cap, injective_resolution, poset_injective_resolution, poset_projective_resolution, principal_sum,
    projective_resolution, GridResolution, Resolution, ResolutionKind,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Mode;
use crate::pmodule::{GridModule, Morphism};
use crate::poset::GridPoset;

/// `M ⊠ N` on the product box: stalk `M_a ⊗ N_b` at `(a, b)` and Kronecker
/// products of structure maps.
pub type ProductModule = GridModule;

pub fn external_tensor(m: &GridModule, n: &GridModule) -> Result<ProductModule> {
    if m.field() != n.field() {
        return Err(Error::BaseMismatch("external tensor over different fields".into()));
    }
    let field = m.field();
    let (gm, gn) = (m.grid(), n.grid());
    let dm = m.dim();
    let lo = gm.lo().iter().chain(gn.lo()).copied().collect();
    let hi = gm.hi().iter().chain(gn.hi()).copied().collect();
    let grid = GridPoset::new(lo, hi)?;
    let split = |idx: usize| {
        let p = grid.point(idx);
        (gm.index(&p[..dm]).unwrap(), gn.index(&p[dm..]).unwrap())
    };
    let dims = (0..grid.len())
        .map(|idx| {
            let (a, b) = split(idx);
            m.dim_at_index(a) * n.dim_at_index(b)
        })
        .collect();
    let flags = |x: &[bool], y: &[bool]| x.iter().chain(y).copied().collect::<Vec<bool>>();
    GridModule::new(
        field,
        grid.clone(),
        dims,
        |axis, idx| {
            let (a, b) = split(idx);
            if axis < dm {
                m.cover_map(axis, a)
                    .unwrap()
                    .kron(&crate::exactalg::Matrix::identity(field, n.dim_at_index(b)))
            } else {
                crate::exactalg::Matrix::identity(field, m.dim_at_index(a)).kron(n.cover_map(axis - dm, b).unwrap())
            }
        },
        flags(m.stab_left(), n.stab_left()),
        flags(m.stab_right(), n.stab_right()),
    )
}

/// Which factor a derived convolution resolves.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    First,
    #[default]
    Second,
}

/// Applies the convolution termwise to a resolution of one factor and
/// returns the resulting complex (cochain degrees; chain complexes negated).
pub fn convolution_complex(
    mode: Mode,
    m: &GridModule,
    n: &GridModule,
    window: Option<&GridPoset>,
    side: Side,
) -> Result<Option<GridComplex>> {
    if m.field() != n.field() || m.dim() != n.dim() {
        return Err(Error::BaseMismatch("convolution factors over different fields or dimensions".into()));
    }
    let (fixed, resolved) = match side {
        Side::First => (n, m),
        Side::Second => (m, n),
    };
    let res = match mode {
        Mode::Sheaf => injective_resolution(resolved, None)?,
        Mode::Cosheaf => projective_resolution(resolved, None)?,
    };
    if res.is_empty() {
        return Ok(None);
    }
    let a = fixed.clamped();
    let id = Morphism::identity(&a);
    let w = match window {
        Some(w) => w.clone(),
        None => oracle::safe_range(a.grid(), &res.grid),
    };
    let conv: Vec<oracle::Convolved> = res
        .terms
        .iter()
        .map(|t| match side {
            Side::Second => oracle::convolve_stabilized(mode, &a, t, &w),
            Side::First => oracle::convolve_stabilized(mode, t, &a, &w),
        })
        .collect::<Result<_>>()?;
    let push = |from: usize, to: usize, d: &Morphism| match side {
        Side::Second => conv[from].induced(&conv[to], &id, d),
        Side::First => conv[from].induced(&conv[to], d, &id),
    };
    let k = conv.len();
    Ok(Some(match mode {
        Mode::Sheaf => {
            let diffs = (0..k - 1)
                .map(|j| push(j, j + 1, &res.differentials[j]))
                .collect::<Result<_>>()?;
            GridComplex::new(0, conv.iter().map(|c| c.module.clone()).collect(), diffs)?
        }
        Mode::Cosheaf => {
            // cochain position i holds P_{k-1-i}
            let diffs = (0..k - 1)
                .map(|i| push(k - 1 - i, k - 2 - i, &res.differentials[k - 2 - i]))
                .collect::<Result<_>>()?;
            GridComplex::new(
                -(k as i32 - 1),
                conv.iter().rev().map(|c| c.module.clone()).collect(),
                diffs,
            )?
        }
    }))
}

/// `H^i(M ∗^R N)` from an injective resolution of one factor.
pub fn derived_sheaf_convolve(
    m: &GridModule,
    n: &GridModule,
    window: Option<&GridPoset>,
    side: Side,
) -> Result<GradedModule> {
    Ok(convolution_complex(Mode::Sheaf, m, n, window, side)?
        .map(|c| c.cohomology())
        .unwrap_or_default())
}

/// `H_i(M •^L N)` from a flat resolution of one factor, indexed by the
/// homological degree `i >= 0`.
pub fn derived_cosheaf_convolve(
    m: &GridModule,
    n: &GridModule,
    window: Option<&GridPoset>,
    side: Side,
) -> Result<GradedModule> {
    Ok(convolution_complex(Mode::Cosheaf, m, n, window, side)?
        .map(|c| c.cohomology().negate_degrees())
        .unwrap_or_default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::Field;
    use crate::interval::{Barcode, GradedBarcode, Interval};
    use crate::poset::PrincipalSet;

    fn f2() -> Field {
        Field::F2
    }

    fn lattice(b: i64, d: i64) -> GridModule {
        let g = GridPoset::line(b - 1, d).unwrap();
        let pts: Vec<Vec<i64>> = (b..d).map(|x| vec![x]).collect();
        GridModule::interval_module(f2(), &g, &pts).unwrap()
    }

    fn co(a: i64, b: i64) -> Interval {
        Interval::co_int(a, b)
    }

    #[test]
    fn external_tensor_examples() {
        let g = GridPoset::line(0, 1).unwrap();
        let a = GridModule::interval_module(f2(), &g, &[vec![0], vec![1]]).unwrap();
        let b = GridModule::interval_module(f2(), &g, &[vec![0]]).unwrap();
        let t = external_tensor(&a, &b).unwrap();
        assert!(t.validate());
        assert_eq!(t.dims(), &[1, 0, 1, 0]);
        let z = GridModule::zero(f2(), g.clone());
        assert!(external_tensor(&a, &z).unwrap().is_zero());
    }

    #[test]
    fn derived_sheaf_of_bars() {
        // right samples of [1,3) and [0,2)
        let h = derived_sheaf_convolve(&lattice(2, 4), &lattice(1, 3), None, Side::Second).unwrap();
        let bars = h.barcodes().unwrap();
        assert_eq!(bars.degree(0), Barcode::from_intervals([co(4, 6)]));
        assert_eq!(bars.degree(1), Barcode::from_intervals([co(2, 4)]));
        let g = derived_sheaf_convolve(&lattice(2, 4), &lattice(1, 3), None, Side::First).unwrap();
        assert_eq!(g.barcodes().unwrap(), bars);
        let under = sheaf_convolve_oracle(&lattice(2, 4), &lattice(1, 3), None).unwrap();
        assert_eq!(barcode_extract(&under).unwrap(), bars.degree(0));
    }

    #[test]
    fn derived_cosheaf_of_bars() {
        let h = derived_cosheaf_convolve(&lattice(0, 2), &lattice(0, 3), None, Side::Second).unwrap();
        let bars = h.barcodes().unwrap();
        assert_eq!(bars.degree(0), Barcode::from_intervals([co(0, 2)]));
        assert_eq!(bars.degree(1), Barcode::from_intervals([co(3, 5)]));
    }

    #[test]
    fn injective_and_flat_factors_are_acyclic() {
        let g = GridPoset::line(-2, 4).unwrap();
        let d = GridModule::principal(f2(), &g, &PrincipalSet::down(vec![1]), vec![true], vec![false]).unwrap();
        let h = derived_sheaf_convolve(&lattice(0, 3), &d, None, Side::Second).unwrap();
        assert_eq!(h.degrees.keys().copied().collect::<Vec<_>>(), vec![0]);
        let u = GridModule::principal(f2(), &g, &PrincipalSet::up(vec![1]), vec![false], vec![true]).unwrap();
        let h = derived_cosheaf_convolve(&lattice(0, 3), &u, None, Side::Second).unwrap();
        assert_eq!(
            h.barcodes().unwrap(),
            GradedBarcode::concentrated(0, Barcode::from_intervals([co(1, 4)]))
        );
        let z = GridModule::zero(f2(), g);
        assert!(derived_sheaf_convolve(&z, &d, None, Side::Second).unwrap().is_zero());
        assert!(derived_cosheaf_convolve(&z, &lattice(0, 3), None, Side::First).unwrap().is_zero());
    }

    #[test]
    fn infinite_bars() {
        // [0, inf) right-sampled is {1, 2, ...}; [0,2) is {1, 2}
        let g = GridPoset::line(0, 3).unwrap();
        let up = GridModule::principal(f2(), &g, &PrincipalSet::up(vec![1]), vec![false], vec![true]).unwrap();
        let h = derived_sheaf_convolve(&up, &lattice(1, 3), None, Side::Second).unwrap();
        let bars = h.barcodes().unwrap();
        assert!(bars.degree(0).is_empty());
        assert_eq!(bars.degree(1), Barcode::from_intervals([co(1, 3)]));
        let down = GridModule::principal(f2(), &g, &PrincipalSet::down(vec![1]), vec![true], vec![false]).unwrap();
        let h = derived_sheaf_convolve(&lattice(1, 3), &down, None, Side::Second).unwrap();
        let bars = h.barcodes().unwrap();
        assert!(bars.degree(1).is_empty());
        assert_eq!(bars.degree(0), Barcode::from_intervals([co(2, 4)]));
    }

    #[test]
    fn two_parameter_derived() {
        let g = GridPoset::new(vec![0, 0], vec![2, 2]).unwrap();
        let pts: Vec<Vec<i64>> = g.points().filter(|p| p[0] + p[1] <= 2).collect();
        let m = GridModule::interval_module(f2(), &g, &pts).unwrap();
        let s = derived_sheaf_convolve(&m, &m, None, Side::Second).unwrap();
        let t = derived_sheaf_convolve(&m, &m, None, Side::First).unwrap();
        for d in [0, 1, 2] {
            let (a, b) = (s.degree(d), t.degree(d));
            assert_eq!(a.map(|x| x.total_dim()), b.map(|x| x.total_dim()), "degree {d}");
        }
        let under = sheaf_convolve_oracle(&m, &m, None).unwrap();
        assert_eq!(s.degree(0).map_or(0, |x| x.total_dim()), under.total_dim());
    }
}
