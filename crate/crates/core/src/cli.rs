//! Command-line front end. Every subcommand prints one JSON document on
//! standard output. Exit codes: 0 on success, 1 when a verification fails,
//! 2 on unreadable or malformed input.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::Rng;
use serde_json::{json, Value};

use crate::convolve::{
    barcode_extract, barcode_module_on, cosheaf_convolve_oracle, derived_cosheaf_convolve, derived_sheaf_convolve,
    sheaf_convolve_oracle, to_lattice, GradedModule, Sampling, Side,
};
use crate::distance::{bottleneck_distance, convolution_distance};
use crate::error::{Error, Result};
use crate::exactalg::{self, Field};
use crate::interval::{convolve_barcodes, Barcode, Ext, GradedBarcode, Interval, Mode, Rational};
use crate::pmodule::{
    direct_image_cosheaf, direct_image_sheaf, hom_space, internal_hom, inverse_image, poset_hom_space, GridModule,
    PosetModule,
};
use crate::poset::{GridPoset, MonotoneMap};
use crate::random;
use crate::stability::{direct_image_stability_check, stability_check, SimplicialComplex, VertexFunction};

#[derive(Debug, Parser)]
#[command(name = "sheafconv", version, about = "Sheaf and cosheaf convolutions of persistence modules")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
#[group(multiple = false)]
pub struct ModeFlags {
    /// Sheaf convolution (limits).
    #[arg(long)]
    pub sheaf: bool,
    /// Cosheaf convolution, i.e. the graded tensor product (colimits).
    #[arg(long)]
    pub cosheaf: bool,
}

impl ModeFlags {
    fn modes(&self) -> Vec<Mode> {
        match (self.sheaf, self.cosheaf) {
            (true, _) => vec![Mode::Sheaf],
            (_, true) => vec![Mode::Cosheaf],
            _ => vec![Mode::Sheaf, Mode::Cosheaf],
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convolve two barcode files with the closed forms.
    Convolve {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        mode: ModeFlags,
        #[arg(long)]
        derived: bool,
        /// Field for the lattice fallback.
        #[arg(long, default_value_t = 2)]
        field: u32,
    },
    /// Interleaving distance of two barcodes, or convolution distance of two
    /// graded barcodes.
    Distance {
        a: PathBuf,
        b: PathBuf,
        /// Compare a single degree of graded inputs.
        #[arg(long)]
        degree: Option<i32>,
    },
    /// Compare the closed forms with the lattice oracle, on two barcode
    /// files or on random interval pairs with endpoints in [0, 10].
    Oracle {
        a: Option<PathBuf>,
        b: Option<PathBuf>,
        #[command(flatten)]
        mode: ModeFlags,
        #[arg(long, default_value_t = 2)]
        field: u32,
        /// Evaluation window `lo,hi` applied on every axis.
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
    /// Sublevel persistence stability for a complex and two vertex functions,
    /// or random trials when no files are given.
    Stability {
        complex: Option<PathBuf>,
        f: Option<PathBuf>,
        g: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        degree: i64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
    /// Random dimension checks of the adjunctions.
    AdjunctionCheck {
        #[arg(long, default_value_t = 2)]
        field: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
}

/// Outcome of a command: the JSON document and the exit code.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub output: Value,
}

fn ok(output: Value) -> Outcome {
    Outcome { code: 0, output }
}

fn verdict(pass: bool, output: Value) -> Outcome {
    Outcome {
        code: if pass { 0 } else { 1 },
        output,
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn read_barcode(path: &Path) -> Result<Barcode> {
    Barcode::from_json(&read_json(path)?)
}

fn parse_window(s: &str, dim: usize) -> Result<GridPoset> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [lo, hi] = parts[..] else {
        return Err(Error::Schema(format!("window {s:?} is not of the form lo,hi")));
    };
    let p = |t: &str| t.parse::<i64>().map_err(|_| Error::Schema(format!("window bound {t:?} is not an integer")));
    GridPoset::new(vec![p(lo)?; dim], vec![p(hi)?; dim])
}

/// Lattice points of a real interval, as a lattice bar.
fn lattice_points(i: &Interval) -> Option<Interval> {
    let lo = match i.left.value {
        Ext::Fin(r) if r.is_integer() && !i.left.closed => Ext::Fin(r + 1),
        Ext::Fin(r) => Ext::Fin(r.ceil()),
        e => e,
    };
    let hi = match i.right.value {
        Ext::Fin(r) if r.is_integer() && !i.right.closed => Ext::Fin(r),
        Ext::Fin(r) => Ext::Fin(r.floor() + 1),
        e => e,
    };
    (lo < hi).then(|| Interval::co(lo, hi))
}

fn lattice_box(bars: &[&Barcode]) -> GridPoset {
    let ends: Vec<i64> = bars
        .iter()
        .flat_map(|b| b.bars().iter())
        .flat_map(|(i, _)| [i.left.value, i.right.value])
        .filter_map(|e| e.finite().map(|r| r.to_integer()))
        .collect();
    let lo = ends.iter().min().map_or(0, |v| v - 1);
    let hi = ends.iter().max().map_or(0, |v| v + 1);
    GridPoset::line(lo, hi).unwrap()
}

fn lattice_convolve(field: Field, a: &Barcode, b: &Barcode, mode: Mode, derived: bool) -> Result<GradedBarcode> {
    let pts = |x: &Barcode| Barcode::from_bars(x.bars().iter().filter_map(|(i, k)| lattice_points(i).map(|l| (l, *k))));
    let (la, lb) = (pts(a), pts(b));
    let grid = lattice_box(&[&la, &lb]);
    let (ma, mb) = (barcode_module_on(field, &la, &grid)?, barcode_module_on(field, &lb, &grid)?);
    if derived {
        derived_convolve(mode, &ma, &mb, None)?.barcodes()
    } else {
        let m = match mode {
            Mode::Sheaf => sheaf_convolve_oracle(&ma, &mb, None)?,
            Mode::Cosheaf => cosheaf_convolve_oracle(&ma, &mb, None)?,
        };
        Ok(GradedBarcode::concentrated(0, barcode_extract(&m)?))
    }
}

fn derived_convolve(mode: Mode, a: &GridModule, b: &GridModule, window: Option<&GridPoset>) -> Result<GradedModule> {
    match mode {
        Mode::Sheaf => derived_sheaf_convolve(a, b, window, Side::Second),
        Mode::Cosheaf => derived_cosheaf_convolve(a, b, window, Side::Second),
    }
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Sheaf => "sheaf",
        Mode::Cosheaf => "cosheaf",
    }
}

/// Closed-form derived convolution, sampled to the lattice, next to the
/// lattice oracle computed through a resolution.
#[derive(Clone, Debug)]
pub struct OracleComparison {
    pub mode: Mode,
    pub expected: GradedBarcode,
    pub got: GradedBarcode,
    pub pass: bool,
}

impl OracleComparison {
    pub fn to_json(&self) -> Value {
        json!({
            "mode": mode_name(self.mode),
            "expected": self.expected.to_json(),
            "got": self.got.to_json(),
            "pass": self.pass,
        })
    }
}

/// Number of lattice bars containing `i..=j`.
fn rank_of(b: &Barcode, i: i64, j: i64) -> usize {
    b.bars()
        .iter()
        .filter(|(x, _)| x.left.value <= Ext::int(i) && Ext::int(j) < x.right.value)
        .map(|(_, k)| k)
        .sum()
}

/// Compares degree by degree. The barcodes are realized on `grid` (default:
/// one step around all finite ends). Without a window the extracted
/// barcodes must be equal; with one, the rank functions must agree on it.
pub fn oracle_compare(
    field: Field,
    a: &Barcode,
    b: &Barcode,
    mode: Mode,
    grid: Option<&GridPoset>,
    window: Option<&GridPoset>,
) -> Result<OracleComparison> {
    let s = Sampling::for_mode(mode);
    let closed = convolve_barcodes(a, b, mode, true)?;
    let mut expected = GradedBarcode::new();
    for (d, bc) in closed.degrees() {
        expected.insert(d, to_lattice(bc, s)?);
    }
    let (la, lb) = (to_lattice(a, s)?, to_lattice(b, s)?);
    let g = grid.cloned().unwrap_or_else(|| lattice_box(&[&la, &lb]));
    let (ma, mb) = (barcode_module_on(field, &la, &g)?, barcode_module_on(field, &lb, &g)?);
    let h = derived_convolve(mode, &ma, &mb, window)?;
    let pass = match window {
        None => {
            let got = h.barcodes()?;
            let pass = got == expected;
            return Ok(OracleComparison {
                mode,
                expected,
                got,
                pass,
            });
        }
        Some(w) => {
            let mut ds: Vec<i32> = expected.degrees().map(|(d, _)| d).chain(h.degrees.keys().copied()).collect();
            ds.sort();
            ds.dedup();
            ds.iter().all(|&d| {
                let e = expected.degree(d);
                (w.lo()[0]..=w.hi()[0]).all(|i| {
                    (i..=w.hi()[0]).all(|j| {
                        let r = h.degree(d).map_or(0, |m| exactalg::rank(&m.map_z(&[i], &[j])));
                        r == rank_of(&e, i, j)
                    })
                })
            })
        }
    };
    let got = h.barcodes()?;
    Ok(OracleComparison {
        mode,
        expected,
        got,
        pass,
    })
}

/// The common box used for random trials with endpoints in `[0, 10]`; its
/// safe range contains `[-2, 22]`.
pub fn trial_box() -> GridPoset {
    GridPoset::line(-1, 12).unwrap()
}

/// Random vertex values `k/10` with `0 <= k <= 50`.
pub fn random_vertex_function(rng: &mut impl Rng, k: &SimplicialComplex) -> VertexFunction {
    VertexFunction::new(
        k.vertices()
            .into_iter()
            .map(|v| (v, Rational::new(rng.gen_range(0..=50), 10))),
    )
}

/// `f` moved by at most `3/10` at every vertex.
pub fn perturb_vertex_function(rng: &mut impl Rng, f: &VertexFunction) -> VertexFunction {
    VertexFunction::new(
        f.values
            .iter()
            .map(|(&v, &x)| (v, x + Rational::new(rng.gen_range(-3..=3), 10))),
    )
}

/// Both sides of the four adjunction dimension equalities on one random
/// instance: `f⁻¹ ⊣ f_*`, `f_† ⊣ f⁻¹`, `⊗_gr ⊣ Hom`, and `Hom(M, L)` as the
/// stalk of the internal hom at the origin.
pub fn adjunction_trial(rng: &mut impl Rng, field: Field) -> Result<[(usize, usize); 4]> {
    let dim = rng.gen_range(1..=2);
    let mut boxed = || GridPoset::new(vec![0; dim], (0..dim).map(|_| rng.gen_range(0..=3)).collect()).unwrap();
    let (src, tgt) = (boxed(), boxed());
    let (sp, tp) = (src.to_preorder(), tgt.to_preorder());
    let vals = random::monotone_values(rng, &sp, dim, 1);
    let assign = vals
        .iter()
        .map(|v| {
            let c: Vec<i64> = (0..dim).map(|k| v[k].min(tgt.hi()[k])).collect();
            tgt.index(&c).unwrap()
        })
        .collect();
    let f = MonotoneMap::new(sp, tp, assign)?;
    let fm = PosetModule::from_grid(&random::grid_module(rng, field, &src, 2));
    let gm = PosetModule::from_grid(&random::grid_module(rng, field, &tgt, 2));
    let pulled = inverse_image(&f, &gm)?;
    let first = (
        poset_hom_space(&pulled, &fm)?,
        poset_hom_space(&gm, &direct_image_sheaf(&f, &fm)?)?,
    );
    let second = (
        poset_hom_space(&direct_image_cosheaf(&f, &fm)?, &gm)?,
        poset_hom_space(&fm, &pulled)?,
    );
    let m = random::grid_module(rng, field, &src, 2);
    let n = random::grid_module(rng, field, &src, 2);
    let l = random::grid_module(rng, field, &src, 2);
    let third = (
        hom_space(&cosheaf_convolve_oracle(&m, &n, None)?, &l)?,
        hom_space(&m, &internal_hom(&n, &l)?)?,
    );
    let fourth = (internal_hom(&m, &l)?.dim_at(&vec![0; dim]), hom_space(&m, &l)?);
    Ok([first, second, third, fourth])
}

fn counts(pass: usize, fail: usize, failures: Vec<Value>) -> Value {
    let mut v = json!({ "pass": pass, "fail": fail });
    if !failures.is_empty() {
        v["failures"] = Value::Array(failures);
    }
    v
}

fn field_of(p: u32) -> Result<Field> {
    Field::new(p).map_err(|_| Error::Schema(format!("{p} is not a prime")))
}

fn cmd_convolve(a: &Path, b: &Path, mode: &ModeFlags, derived: bool, field: u32) -> Result<Outcome> {
    let (a, b) = (read_barcode(a)?, read_barcode(b)?);
    let m = match mode.modes()[..] {
        [m] => m,
        _ => return Err(Error::Schema("convolve needs --sheaf or --cosheaf".into())),
    };
    match convolve_barcodes(&a, &b, m, derived) {
        Ok(g) => Ok(ok(g.to_json())),
        Err(Error::Unsupported(why)) => {
            let g = lattice_convolve(field_of(field)?, &a, &b, m, derived)?;
            let mut out = g.to_json();
            out["lattice_oracle"] = Value::Bool(true);
            out["reason"] = Value::String(why);
            Ok(ok(out))
        }
        Err(e) => Err(e),
    }
}

fn cmd_distance(a: &Path, b: &Path, degree: Option<i32>) -> Result<Outcome> {
    let (va, vb) = (read_json(a)?, read_json(b)?);
    let graded = va.get("degrees").is_some() || vb.get("degrees").is_some();
    let r = if graded {
        let as_graded = |v: &Value| -> Result<GradedBarcode> {
            if v.get("degrees").is_some() {
                GradedBarcode::from_json(v)
            } else {
                Ok(GradedBarcode::concentrated(0, Barcode::from_json(v)?))
            }
        };
        let (x, y) = (as_graded(&va)?, as_graded(&vb)?);
        match degree {
            Some(d) => bottleneck_distance(&x.degree(d), &y.degree(d)),
            None => convolution_distance(&x, &y),
        }
    } else {
        bottleneck_distance(&Barcode::from_json(&va)?, &Barcode::from_json(&vb)?)
    };
    Ok(ok(json!({ "value": r.value.to_string(), "bound_only": r.bound_only })))
}

#[allow(clippy::too_many_arguments)]
fn cmd_oracle(
    a: Option<&Path>,
    b: Option<&Path>,
    mode: &ModeFlags,
    field: u32,
    window: Option<&str>,
    seed: u64,
    trials: usize,
) -> Result<Outcome> {
    let field = field_of(field)?;
    let window = window.map(|w| parse_window(w, 1)).transpose()?;
    let modes = mode.modes();
    let (mut pass, mut fail, mut failures) = (0, 0, Vec::new());
    let mut record = |a: &Barcode, b: &Barcode, grid: Option<&GridPoset>| -> Result<()> {
        let mut all = true;
        let mut diffs = Vec::new();
        for &m in &modes {
            let c = oracle_compare(field, a, b, m, grid, window.as_ref())?;
            if !c.pass {
                all = false;
                diffs.push(c.to_json());
            }
        }
        if all {
            pass += 1;
        } else {
            fail += 1;
            failures.push(json!({ "a": a.to_json(), "b": b.to_json(), "diffs": diffs }));
        }
        Ok(())
    };
    match (a, b) {
        (Some(a), Some(b)) => record(&read_barcode(a)?, &read_barcode(b)?, None)?,
        (None, None) => {
            let mut rng = random::rng(seed);
            let grid = trial_box();
            for _ in 0..trials {
                let (i, j) = (random::interval(&mut rng, 0, 10), random::interval(&mut rng, 0, 10));
                record(&Barcode::from_intervals([i]), &Barcode::from_intervals([j]), Some(&grid))?;
            }
        }
        _ => return Err(Error::Schema("oracle takes two barcode files or none".into())),
    }
    Ok(verdict(fail == 0, counts(pass, fail, failures)))
}

fn cmd_stability(files: Option<(&Path, &Path, &Path)>, degree: i64, seed: u64, trials: usize) -> Result<Outcome> {
    if let Some((k, f, g)) = files {
        let k = SimplicialComplex::from_json(&read_json(k)?)?;
        let (f, g) = (VertexFunction::from_json(&read_json(f)?)?, VertexFunction::from_json(&read_json(g)?)?);
        let rep = stability_check(&k, &f, &g, degree)?;
        return Ok(verdict(rep.holds, rep.to_json()));
    }
    let mut rng = random::rng(seed);
    let (mut pass, mut fail, mut failures) = (0, 0, Vec::new());
    for _ in 0..trials {
        let k = random::simplicial_complex(&mut rng, 8, 20);
        let f = random_vertex_function(&mut rng, &k);
        let g = perturb_vertex_function(&mut rng, &f);
        let mut all = true;
        for d in [0, 1] {
            let rep = stability_check(&k, &f, &g, d)?;
            if !rep.holds {
                all = false;
                failures.push(json!({ "complex": k.to_json(), "f": f.to_json(), "g": g.to_json(), "report": rep.to_json() }));
            }
        }
        if all {
            pass += 1;
        } else {
            fail += 1;
        }
    }
    let (mut dpass, mut dfail) = (0, 0);
    for trial in 0..trials {
        let q = random::partial_order(&mut rng, 4, 0.5);
        let m = random::poset_module(&mut rng, Field::F2, &q, 2);
        let dim = 1 + trial % 2;
        let f = random::monotone_values(&mut rng, &q, dim, 2);
        let g = random::perturb_monotone(&mut rng, &q, &f, 2);
        if direct_image_stability_check(&q, &m, &f, &g)?.holds {
            dpass += 1;
        } else {
            dfail += 1;
        }
    }
    let out = json!({
        "sublevel": counts(pass, fail, failures),
        "direct_image": { "pass": dpass, "fail": dfail, "bound_only": true },
    });
    Ok(verdict(fail == 0 && dfail == 0, out))
}

fn cmd_adjunction(field: u32, seed: u64, trials: usize) -> Result<Outcome> {
    let field = field_of(field)?;
    let mut rng = random::rng(seed);
    let (mut pass, mut fail, mut failures) = (0, 0, Vec::new());
    for t in 0..trials {
        let sides = adjunction_trial(&mut rng, field)?;
        if sides.iter().all(|(l, r)| l == r) {
            pass += 1;
        } else {
            fail += 1;
            failures.push(json!({ "trial": t, "sides": sides.to_vec() }));
        }
    }
    Ok(verdict(fail == 0, counts(pass, fail, failures)))
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Convolve {
            a,
            b,
            mode,
            derived,
            field,
        } => cmd_convolve(a, b, mode, *derived, *field),
        Command::Distance { a, b, degree } => cmd_distance(a, b, *degree),
        Command::Oracle {
            a,
            b,
            mode,
            field,
            window,
            seed,
            trials,
        } => cmd_oracle(a.as_deref(), b.as_deref(), mode, *field, window.as_deref(), *seed, *trials),
        Command::Stability {
            complex,
            f,
            g,
            degree,
            seed,
            trials,
        } => {
            let files = match (complex, f, g) {
                (Some(k), Some(f), Some(g)) => Some((k.as_path(), f.as_path(), g.as_path())),
                (None, None, None) => None,
                _ => return Err(Error::Schema("stability takes a complex and two functions, or nothing".into())),
            };
            cmd_stability(files, *degree, *seed, *trials)
        }
        Command::AdjunctionCheck { field, seed, trials } => cmd_adjunction(*field, *seed, *trials),
    }
}

/// Parses arguments, runs, prints, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(out) => {
            println!("{}", serde_json::to_string(&out.output).unwrap());
            out.code
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": e.to_string() }));
            match e {
                Error::Schema(_) | Error::Json(_) | Error::Io(_) | Error::InvalidField(_) => 2,
                Error::WindowOutsideSafeRange { .. } | Error::Unsupported(_) | Error::OutOfBox(_) => 2,
                _ => 1,
            }
        }
    }
}
