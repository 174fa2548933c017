//! Acceptance suite. Prints one line per criterion and exits non-zero if
//! any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;

use sheafconv::cli::{adjunction_trial, oracle_compare, perturb_vertex_function, random_vertex_function, trial_box};
use sheafconv::convolve::{
    barcode_extract, barcode_module, cosheaf_convolve_oracle, injective_resolution, poset_injective_resolution,
    poset_projective_resolution, projective_resolution, sheaf_convolve_oracle, to_lattice, GridComplex, Sampling,
};
use sheafconv::distance::{
    convolution_distance, convolution_distance_complexes, interleaving_distance_barcodes, minimal_interleaving,
};
use sheafconv::exactalg::{rank, Field};
use sheafconv::interval::{translate, Barcode, Ext, GradedBarcode, Interval, Mode, Rational};
use sheafconv::pmodule::{cosections, sections, GridModule, PosetModule};
use sheafconv::poset::{GridPoset, PrincipalSet};
use sheafconv::random;
use sheafconv::stability::{direct_image_stability_check, stability_check, sublevel_persistence, VertexFunction};
use sheafconv::Result;

type Outcome = Result<(bool, String)>;

fn tally(pass: usize, total: usize) -> (bool, String) {
    (pass == total, format!("{pass}/{total}"))
}

/// Equal rank functions on every comparable pair of `window`.
fn same_ranks(a: &GridModule, b: &GridModule, window: &GridPoset) -> bool {
    let pts: Vec<Vec<i64>> = window.points().collect();
    pts.iter().all(|p| {
        pts.iter()
            .filter(|q| sheafconv::poset::leq(p, q))
            .all(|q| rank(&a.map_z(p, q)) == rank(&b.map_z(p, q)))
    })
}

/// `(p, q) -> (p - s, q - s)` ranks of `m` against the ranks of `c`.
fn shifted_ranks(c: &GridModule, m: &GridModule, s: i64, window: &GridPoset) -> bool {
    let pts: Vec<Vec<i64>> = window.points().collect();
    let back = |p: &[i64]| p.iter().map(|x| x - s).collect::<Vec<_>>();
    pts.iter().all(|p| {
        pts.iter()
            .filter(|q| sheafconv::poset::leq(p, q))
            .all(|q| rank(&c.map_z(p, q)) == rank(&m.map_z(&back(p), &back(q))))
    })
}

fn up(field: Field, s: i64, n: usize) -> GridModule {
    let g = GridPoset::new(vec![s - 1; n], vec![s + 1; n]).unwrap();
    GridModule::principal(field, &g, &PrincipalSet::up(vec![s; n]), vec![false; n], vec![true; n]).unwrap()
}

fn down(field: Field, s: i64, n: usize) -> GridModule {
    let g = GridPoset::new(vec![s - 1; n], vec![s + 1; n]).unwrap();
    GridModule::principal(field, &g, &PrincipalSet::down(vec![s; n]), vec![true; n], vec![false; n]).unwrap()
}

fn closed_form_vs_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = random::rng(101);
    let grid = trial_box();
    let mut pass = 0;
    for _ in 0..200 {
        let a = Barcode::from_intervals([random::interval(&mut rng, 0, 10)]);
        let b = Barcode::from_intervals([random::interval(&mut rng, 0, 10)]);
        let ok = [Mode::Sheaf, Mode::Cosheaf]
            .into_iter()
            .map(|m| oracle_compare(Field::F2, &a, &b, m, Some(&grid), None).map(|c| c.pass))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .all(|p| p);
        pass += ok as usize;
    }
    let secs = start.elapsed().as_secs_f64();
    let (ok, detail) = tally(pass, 200);
    Ok((ok && secs < 60.0, format!("{detail} pairs, {secs:.1}s")))
}

fn distances_agree() -> Outcome {
    let mut rng = random::rng(202);
    let half = Rational::new(1, 2);
    let mut pass = 0;
    for _ in 0..50 {
        let a = random::barcode(&mut rng, 5, 0, 10, 0.2);
        let b = random::barcode(&mut rng, 5, 0, 10, 0.2);
        let bars = interleaving_distance_barcodes(&a, &b).value;
        let conv = convolution_distance(&GradedBarcode::concentrated(0, a.clone()), &GradedBarcode::concentrated(0, b.clone()));
        // spacing 1/2: doubled ends on the integer lattice
        let two = Rational::from_integer(2);
        let (ma, mb) = (barcode_module(Field::F2, &a.scale(two))?, barcode_module(Field::F2, &b.scale(two))?);
        let eps = match minimal_interleaving(&ma, &mb, 44)? {
            Some(c) => Ext::Fin(Rational::from_integer(c.epsilon) * half),
            None => Ext::PosInf,
        };
        let complexes = convolution_distance_complexes(&GridComplex::concentrated(0, ma), &GridComplex::concentrated(0, mb))?;
        let all = [conv.value, eps, complexes.value.scale(half)].iter().all(|&v| v == bars);
        pass += (all && !conv.bound_only) as usize;
    }
    Ok(tally(pass, 50))
}

fn translation_laws() -> Outcome {
    let mut rng = random::rng(303);
    let f = Field::F2;
    let mut pass = 0;
    for t in 0..100 {
        let (s, e) = (rng.gen_range(0..=3), rng.gen_range(0..=3));
        let ok = if t % 2 == 0 {
            let b = random::barcode(&mut rng, 4, 0, 8, 0.3);
            let m = barcode_module(f, &b)?;
            let shift = |x: &GridModule, by: i64, mode: Mode| -> Result<Barcode> {
                barcode_extract(&match mode {
                    Mode::Cosheaf => cosheaf_convolve_oracle(x, &up(f, by, 1), None)?,
                    Mode::Sheaf => sheaf_convolve_oracle(x, &down(f, by, 1), None)?,
                })
            };
            let mut ok = true;
            for mode in [Mode::Cosheaf, Mode::Sheaf] {
                ok &= shift(&m, 0, mode)? == b;
                ok &= shift(&m, s, mode)? == translate(&b, Rational::from_integer(s));
                let once = match mode {
                    Mode::Cosheaf => cosheaf_convolve_oracle(&m, &up(f, e, 1), None)?,
                    Mode::Sheaf => sheaf_convolve_oracle(&m, &down(f, e, 1), None)?,
                };
                ok &= shift(&once, s, mode)? == shift(&m, e + s, mode)?;
            }
            ok
        } else {
            let g = GridPoset::new(vec![0, 0], vec![2, 2]).unwrap();
            let m = random::grid_module(&mut rng, f, &g, 2);
            let w = GridPoset::new(vec![-1, -1], vec![9, 9]).unwrap();
            let mut ok = true;
            for by in [0, s] {
                ok &= shifted_ranks(&cosheaf_convolve_oracle(&m, &up(f, by, 2), None)?, &m, by, &w);
                ok &= shifted_ranks(&sheaf_convolve_oracle(&m, &down(f, by, 2), None)?, &m, by, &w);
            }
            let twice = cosheaf_convolve_oracle(&cosheaf_convolve_oracle(&m, &up(f, e, 2), None)?, &up(f, s, 2), None)?;
            ok &= same_ranks(&twice, &cosheaf_convolve_oracle(&m, &up(f, e + s, 2), None)?, &w);
            let twice = sheaf_convolve_oracle(&sheaf_convolve_oracle(&m, &down(f, e, 2), None)?, &down(f, s, 2), None)?;
            ok &= same_ranks(&twice, &sheaf_convolve_oracle(&m, &down(f, e + s, 2), None)?, &w);
            ok
        };
        pass += ok as usize;
    }
    // global cosections of M • k[U_δ] and sections of M ∗ k[D_δ], over a
    // window outside of which every module involved is constant
    let (mut global, mut nonzero) = (0, 0);
    for t in 0..20 {
        let n = 1 + t % 2;
        let g = GridPoset::new(vec![0; n], vec![2; n]).unwrap();
        let base = random::grid_module(&mut rng, f, &g, 2);
        let w = GridPoset::new(vec![-6; n], vec![10; n]).unwrap();
        let x: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=2)).collect();
        let (no, yes) = (vec![false; n], vec![true; n]);
        let dims = |m: &GridModule, colimit: bool| -> Result<usize> {
            let pm = PosetModule::from_grid(&m.lift(&w)?);
            let all: Vec<usize> = (0..pm.len()).collect();
            if colimit {
                cosections(&pm, &all)
            } else {
                sections(&pm, &all)
            }
        };
        // a stabilized summand keeps the global dimension positive
        let co = base.clone().with_flags(no.clone(), yes.clone())?.direct_sum(&GridModule::principal(
            f,
            &g,
            &PrincipalSet::up(x.clone()),
            no.clone(),
            yes.clone(),
        )?)?;
        let sh = base
            .with_flags(yes.clone(), no.clone())?
            .direct_sum(&GridModule::principal(f, &g, &PrincipalSet::down(x), yes, no)?)?;
        let co_dims = (0..=3)
            .map(|d| dims(&cosheaf_convolve_oracle(&co, &up(f, d, n), None)?, true))
            .collect::<Result<Vec<_>>>()?;
        let sh_dims = (0..=3)
            .map(|d| dims(&sheaf_convolve_oracle(&sh, &down(f, d, n), None)?, false))
            .collect::<Result<Vec<_>>>()?;
        let ok = co_dims.iter().all(|&x| x == dims(&co, true).unwrap())
            && sh_dims.iter().all(|&x| x == dims(&sh, false).unwrap());
        nonzero += (co_dims[0] + sh_dims[0] > 0) as usize;
        global += ok as usize;
    }
    Ok((pass == 100 && global == 20, format!("{pass}/100 cases, {global}/20 global invariance, {nonzero} with nonzero globals")))
}

fn symmetry() -> Outcome {
    let mut rng = random::rng(404);
    let mut pass = 0;
    for t in 0..100 {
        let field = if t % 3 == 0 { Field::new(3)? } else { Field::F2 };
        let ok = if t % 4 == 3 {
            let g = GridPoset::new(vec![0, 0], vec![2, 1]).unwrap();
            let (m, n) = (random::grid_module(&mut rng, field, &g, 2), random::grid_module(&mut rng, field, &g, 2));
            let w = GridPoset::new(vec![-1, -1], vec![6, 4]).unwrap();
            same_ranks(&sheaf_convolve_oracle(&m, &n, None)?, &sheaf_convolve_oracle(&n, &m, None)?, &w)
                && same_ranks(&cosheaf_convolve_oracle(&m, &n, None)?, &cosheaf_convolve_oracle(&n, &m, None)?, &w)
        } else {
            let m = random::line_module(&mut rng, field, 0, 6, 3);
            let n = random::line_module(&mut rng, field, 2, 7, 3);
            barcode_extract(&sheaf_convolve_oracle(&m, &n, None)?)? == barcode_extract(&sheaf_convolve_oracle(&n, &m, None)?)?
                && barcode_extract(&cosheaf_convolve_oracle(&m, &n, None)?)?
                    == barcode_extract(&cosheaf_convolve_oracle(&n, &m, None)?)?
        };
        pass += ok as usize;
    }
    Ok(tally(pass, 100))
}

fn adjunctions() -> Outcome {
    let mut rng = random::rng(505);
    let mut pass = 0;
    for t in 0..50 {
        let field = if t % 2 == 0 { Field::F2 } else { Field::new(3)? };
        pass += adjunction_trial(&mut rng, field)?.iter().all(|(l, r)| l == r) as usize;
    }
    Ok(tally(pass, 50))
}

/// `d(B, B + c) = |c|` is forced when the earliest-born bar has length at
/// least `2|c|`: matching it elsewhere or to the diagonal costs `|c|`.
fn shift_is_tight(b: &Barcode, c: Rational) -> bool {
    let c = if c < Rational::from_integer(0) { -c } else { c };
    b.expanded()
        .iter()
        .min_by_key(|i| i.left)
        .is_some_and(|i| i.length().is_none_or(|l| l >= c * 2))
}

fn stability() -> Outcome {
    let mut rng = random::rng(606);
    let mut pass = 0;
    let (mut tight, mut tight_pass) = (0, 0);
    for _ in 0..100 {
        let k = random::simplicial_complex(&mut rng, 8, 20);
        let f = random_vertex_function(&mut rng, &k);
        let g = perturb_vertex_function(&mut rng, &f);
        let mut ok = true;
        for d in [0, 1] {
            ok &= stability_check(&k, &f, &g, d)?.holds;
        }
        let c = Rational::new(rng.gen_range(-10..=10), 10);
        let h: VertexFunction = f.shifted(c);
        for d in [0, 1] {
            let rep = stability_check(&k, &f, &h, d)?;
            ok &= rep.holds;
            if shift_is_tight(&sublevel_persistence(&k, &f, d)?, c) {
                tight += 1;
                tight_pass += (rep.distance == Ext::Fin(if c < Rational::from_integer(0) { -c } else { c })) as usize;
            }
        }
        pass += ok as usize;
    }
    let mut direct = 0;
    for t in 0..50 {
        let q = random::partial_order(&mut rng, 4 + t % 3, 0.5);
        let m = random::poset_module(&mut rng, Field::F2, &q, 2);
        let dim = 1 + t % 2;
        let f = random::monotone_values(&mut rng, &q, dim, 2);
        let g = random::perturb_monotone(&mut rng, &q, &f, 2);
        direct += direct_image_stability_check(&q, &m, &f, &g)?.holds as usize;
    }
    let ok = pass == 100 && tight_pass == tight && direct == 50;
    Ok((
        ok,
        format!("{pass}/100 sublevel, {tight_pass}/{tight} uniform shifts tight, {direct}/50 direct images (chain-level bound)"),
    ))
}

fn random_module(rng: &mut impl Rng, t: usize) -> PosetModule {
    match t % 3 {
        0 => PosetModule::from_grid(&random::line_module(rng, Field::F2, 0, 5, 3)),
        1 => {
            let g = GridPoset::new(vec![0, 0], vec![2, 2]).unwrap();
            PosetModule::from_grid(&random::grid_module(rng, Field::new(3).unwrap(), &g, 3))
        }
        _ => {
            let q = random::partial_order(rng, 6, 0.4);
            random::poset_module(rng, Field::F2, &q, 3)
        }
    }
}

fn curry() -> Outcome {
    let mut rng = random::rng(707);
    let mut pass = 0;
    for t in 0..50 {
        let m = random_module(&mut rng, t);
        let base = m.base().clone();
        let mut ok = true;
        for x in 0..m.len() {
            ok &= sections(&m, &base.up_set(x))? == m.dims()[x];
            ok &= cosections(&m, &base.down_set(x))? == m.dims()[x];
        }
        pass += ok as usize;
    }
    Ok(tally(pass, 50))
}

fn resolutions() -> Outcome {
    let mut rng = random::rng(808);
    let mut exact = 0;
    for t in 0..40 {
        let ok = if t % 2 == 0 {
            let n = 1 + t % 4 / 2;
            let g = GridPoset::new(vec![0; n], vec![3 - n as i64; n]).unwrap();
            let m = random::grid_module(&mut rng, Field::F2, &g, 3);
            injective_resolution(&m, None)?.is_exact() && projective_resolution(&m, None)?.is_exact()
        } else {
            let m = random_module(&mut rng, 2);
            poset_injective_resolution(&m, 8)?.is_exact() && poset_projective_resolution(&m, 8)?.is_exact()
        };
        exact += ok as usize;
    }
    // k[a, b) has k(-∞, b) -> k(-∞, a) as its injective resolution
    let mut two_term = 0;
    for _ in 0..20 {
        let i = random::interval(&mut rng, 0, 10);
        let (a, b) = (i.left.value, i.right.value);
        let lattice = |x: Interval| to_lattice(&Barcode::from_intervals([x]), Sampling::Right);
        let m = barcode_module(Field::F2, &lattice(i)?)?;
        let r = injective_resolution(&m, None)?;
        let ok = r.is_exact()
            && r.len() == 2
            && barcode_extract(&r.terms[0])? == lattice(Interval::co(Ext::NegInf, b))?
            && barcode_extract(&r.terms[1])? == lattice(Interval::co(Ext::NegInf, a))?
            && !r.differentials[0].is_zero();
        two_term += ok as usize;
    }
    Ok((exact == 40 && two_term == 20, format!("{exact}/40 exact, {two_term}/20 two-term")))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("closed form matches the derived oracle", closed_form_vs_oracle),
        ("convolution distance = interleaving distance", distances_agree),
        ("translation laws", translation_laws),
        ("symmetry of both convolutions", symmetry),
        ("adjunction dimension equalities", adjunctions),
        ("sublevel and direct-image stability", stability),
        ("sections and cosections over principal sets", curry),
        ("resolution exactness", resolutions),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let (ok, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
        println!("criterion {}: {} - {name} ({detail})", n + 1, if ok { "PASS" } else { "FAIL" });
        failed += !ok as usize;
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
