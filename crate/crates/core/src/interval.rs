//! One-parameter intervals and barcodes with exact rational endpoints, and
//! the closed-form convolutions of half-open interval modules.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub type Rational = Rational64;

/// A rational number or an infinite end of the line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ext {
    NegInf,
    Fin(Rational),
    PosInf,
}

impl Ext {
    pub fn int(v: i64) -> Ext {
        Ext::Fin(Rational::from_integer(v))
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Ext::Fin(_))
    }

    pub fn finite(self) -> Option<Rational> {
        match self {
            Ext::Fin(r) => Some(r),
            _ => None,
        }
    }

    /// Sum in the extended line. Panics on `-inf + inf`, which callers rule out.
    pub fn add(self, other: Ext) -> Ext {
        match (self, other) {
            (Ext::Fin(a), Ext::Fin(b)) => Ext::Fin(a + b),
            (Ext::NegInf, Ext::PosInf) | (Ext::PosInf, Ext::NegInf) => {
                panic!("indeterminate sum of opposite infinities")
            }
            (Ext::NegInf, _) | (_, Ext::NegInf) => Ext::NegInf,
            _ => Ext::PosInf,
        }
    }

    pub fn shift(self, s: Rational) -> Ext {
        self.add(Ext::Fin(s))
    }

    pub fn scale(self, c: Rational) -> Ext {
        assert!(c > Rational::zero());
        match self {
            Ext::Fin(a) => Ext::Fin(a * c),
            e => e,
        }
    }

    /// Parses `"3"`, `"-1/2"`, `"inf"`, `"-inf"`, or a JSON number.
    pub fn from_json(v: &Value) -> Result<Ext> {
        match v {
            Value::String(s) => parse_ext(s),
            Value::Number(n) => parse_ext(&n.to_string()),
            other => Err(Error::Schema(format!("expected a number or string endpoint, got {other}"))),
        }
    }

    pub fn to_json(self) -> Value {
        Value::String(self.to_string())
    }
}

impl fmt::Display for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ext::NegInf => write!(f, "-inf"),
            Ext::PosInf => write!(f, "inf"),
            Ext::Fin(r) => write!(f, "{}", r),
        }
    }
}

/// Exact rational from `"p/q"`, an integer, or a finite decimal such as `0.25`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Schema(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    if s.contains(['e', 'E']) {
        let (m, e) = s.split_once(['e', 'E']).unwrap();
        let base = parse_rational(m)?;
        let e: i32 = e.parse().map_err(|_| bad())?;
        let ten = Rational::from_integer(10);
        return Ok(if e >= 0 { base * ten.pow(e) } else { base / ten.pow(-e) });
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.trim_start().starts_with('-');
        let whole: i64 = if int.is_empty() || int == "-" { 0 } else { int.parse().map_err(|_| bad())? };
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) || frac.len() > 17 {
            return Err(bad());
        }
        let den = 10i64.pow(frac.len() as u32);
        let f: i64 = frac.parse().map_err(|_| bad())?;
        let mut r = Rational::from_integer(whole.abs()) + Rational::new(f, den);
        if neg {
            r = -r;
        }
        return Ok(r);
    }
    Ok(Rational::from_integer(s.parse().map_err(|_| bad())?))
}

fn parse_ext(s: &str) -> Result<Ext> {
    match s.trim() {
        "inf" | "+inf" | "infinity" | "Infinity" => Ok(Ext::PosInf),
        "-inf" | "-infinity" | "-Infinity" => Ok(Ext::NegInf),
        t => parse_rational(t).map(Ext::Fin),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Endpoint {
    pub value: Ext,
    pub closed: bool,
}

/// An interval of the real line. Infinite ends are always open.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interval {
    pub left: Endpoint,
    pub right: Endpoint,
}

impl Interval {
    pub fn new(left: Endpoint, right: Endpoint) -> Result<Interval> {
        if (!left.value.is_finite() && left.closed) || (!right.value.is_finite() && right.closed) {
            return Err(Error::Schema("infinite endpoints must be open".into()));
        }
        if left.value == Ext::PosInf || right.value == Ext::NegInf {
            return Err(Error::Schema("interval with a misplaced infinite endpoint".into()));
        }
        Ok(Interval { left, right })
    }

    /// `[a, b)`, with the left end open when `a = -inf`.
    pub fn co(a: Ext, b: Ext) -> Interval {
        Interval {
            left: Endpoint {
                value: a,
                closed: a.is_finite(),
            },
            right: Endpoint {
                value: b,
                closed: false,
            },
        }
    }

    pub fn co_int(a: i64, b: i64) -> Interval {
        Interval::co(Ext::int(a), Ext::int(b))
    }

    /// `[a, a]`.
    pub fn singleton(a: Rational) -> Interval {
        let e = Endpoint {
            value: Ext::Fin(a),
            closed: true,
        };
        Interval { left: e, right: e }
    }

    pub fn is_empty(&self) -> bool {
        match self.left.value.cmp(&self.right.value) {
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => !(self.left.closed && self.right.closed && self.left.value.is_finite()),
            std::cmp::Ordering::Greater => true,
        }
    }

    /// Of the form `[a, b)` with `a` finite or `-inf`.
    pub fn is_half_open(&self) -> bool {
        self.left.closed == self.left.value.is_finite() && !self.right.closed
    }

    pub fn is_singleton(&self) -> bool {
        self.left.value == self.right.value && !self.is_empty()
    }

    pub fn translate(&self, s: Rational) -> Interval {
        Interval {
            left: Endpoint {
                value: self.left.value.shift(s),
                ..self.left
            },
            right: Endpoint {
                value: self.right.value.shift(s),
                ..self.right
            },
        }
    }

    pub fn scale(&self, c: Rational) -> Interval {
        Interval {
            left: Endpoint {
                value: self.left.value.scale(c),
                ..self.left
            },
            right: Endpoint {
                value: self.right.value.scale(c),
                ..self.right
            },
        }
    }

    /// Length, `None` when infinite.
    pub fn length(&self) -> Option<Rational> {
        Some(self.right.value.finite()? - self.left.value.finite()?)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.left.closed { '[' } else { '(' },
            self.left.value,
            self.right.value,
            if self.right.closed { ']' } else { ')' }
        )
    }
}

/// A finite multiset of nonempty intervals, kept sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Barcode {
    bars: Vec<(Interval, usize)>,
}

impl Barcode {
    pub fn new() -> Barcode {
        Barcode::default()
    }

    /// Drops empty intervals and merges repeats.
    pub fn from_bars(bars: impl IntoIterator<Item = (Interval, usize)>) -> Barcode {
        let mut map: BTreeMap<Interval, usize> = BTreeMap::new();
        for (i, m) in bars {
            if m > 0 && !i.is_empty() {
                *map.entry(i).or_default() += m;
            }
        }
        Barcode {
            bars: map.into_iter().collect(),
        }
    }

    pub fn from_intervals(bars: impl IntoIterator<Item = Interval>) -> Barcode {
        Barcode::from_bars(bars.into_iter().map(|i| (i, 1)))
    }

    pub fn bars(&self) -> &[(Interval, usize)] {
        &self.bars
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn total_multiplicity(&self) -> usize {
        self.bars.iter().map(|(_, m)| m).sum()
    }

    /// Each interval repeated by its multiplicity.
    pub fn expanded(&self) -> Vec<Interval> {
        self.bars
            .iter()
            .flat_map(|(i, m)| std::iter::repeat_n(*i, *m))
            .collect()
    }

    pub fn union(&self, other: &Barcode) -> Barcode {
        Barcode::from_bars(self.bars.iter().chain(&other.bars).copied())
    }

    pub fn scale(&self, c: Rational) -> Barcode {
        Barcode::from_bars(self.bars.iter().map(|(i, m)| (i.scale(c), *m)))
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(BarcodeJson {
            bars: self.bars.iter().map(|(i, m)| BarJson::from_interval(i, *m)).collect(),
        })
        .unwrap()
    }

    pub fn from_json(v: &Value) -> Result<Barcode> {
        let j: BarcodeJson = serde_json::from_value(v.clone()).map_err(|e| Error::Schema(e.to_string()))?;
        let mut bars = Vec::new();
        for b in &j.bars {
            bars.push(b.to_interval()?);
        }
        Ok(Barcode::from_bars(bars))
    }
}

impl fmt::Display for Barcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, (i, m)) in self.bars.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{i}")?;
            if *m > 1 {
                write!(f, "x{m}")?;
            }
        }
        write!(f, "}}")
    }
}

#[derive(Serialize, Deserialize)]
struct BarcodeJson {
    bars: Vec<BarJson>,
}

#[derive(Serialize, Deserialize)]
struct BarJson {
    left: Value,
    right: Value,
    left_closed: Option<bool>,
    right_closed: Option<bool>,
    mult: Option<usize>,
}

impl BarJson {
    fn from_interval(i: &Interval, m: usize) -> BarJson {
        BarJson {
            left: i.left.value.to_json(),
            right: i.right.value.to_json(),
            left_closed: Some(i.left.closed),
            right_closed: Some(i.right.closed),
            mult: Some(m),
        }
    }

    fn to_interval(&self) -> Result<(Interval, usize)> {
        let l = Ext::from_json(&self.left)?;
        let r = Ext::from_json(&self.right)?;
        let lc = self.left_closed.unwrap_or(l.is_finite());
        let rc = self.right_closed.unwrap_or(false);
        let i = Interval::new(Endpoint { value: l, closed: lc }, Endpoint { value: r, closed: rc })?;
        Ok((i, self.mult.unwrap_or(1)))
    }
}

/// Barcodes indexed by degree; empty degrees are not stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct GradedBarcode {
    degrees: BTreeMap<i32, Barcode>,
}

impl GradedBarcode {
    pub fn new() -> GradedBarcode {
        GradedBarcode::default()
    }

    pub fn concentrated(degree: i32, b: Barcode) -> GradedBarcode {
        let mut g = GradedBarcode::new();
        g.insert(degree, b);
        g
    }

    pub fn insert(&mut self, degree: i32, b: Barcode) {
        if b.is_empty() {
            self.degrees.remove(&degree);
        } else {
            self.degrees.insert(degree, b);
        }
    }

    pub fn add(&mut self, degree: i32, b: &Barcode) {
        let cur = self.degree(degree).union(b);
        self.insert(degree, cur);
    }

    /// The barcode in `degree` (empty if absent).
    pub fn degree(&self, degree: i32) -> Barcode {
        self.degrees.get(&degree).cloned().unwrap_or_default()
    }

    pub fn degrees(&self) -> impl Iterator<Item = (i32, &Barcode)> {
        self.degrees.iter().map(|(d, b)| (*d, b))
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn to_json(&self) -> Value {
        Value::Object(
            [(
                "degrees".to_string(),
                Value::Array(
                    self.degrees
                        .iter()
                        .map(|(d, b)| {
                            let mut o = serde_json::Map::new();
                            o.insert("degree".into(), Value::from(*d));
                            o.insert("bars".into(), b.to_json()["bars"].clone());
                            Value::Object(o)
                        })
                        .collect(),
                ),
            )]
            .into_iter()
            .collect(),
        )
    }

    pub fn from_json(v: &Value) -> Result<GradedBarcode> {
        let arr = v
            .get("degrees")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Schema("graded barcode needs a \"degrees\" array".into()))?;
        let mut g = GradedBarcode::new();
        for entry in arr {
            let d = entry
                .get("degree")
                .and_then(Value::as_i64)
                .ok_or_else(|| Error::Schema("degree entry without an integer \"degree\"".into()))?;
            let bars = Barcode::from_json(&serde_json::json!({ "bars": entry.get("bars").cloned().unwrap_or(Value::Array(vec![])) }))?;
            g.add(d as i32, &bars);
        }
        Ok(g)
    }
}

impl fmt::Display for GradedBarcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.degrees.iter().map(|(d, b)| format!("{d}: {b}")).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// `(a, b)` of a half-open interval, rejecting anything else.
fn half_open(i: &Interval) -> Result<(Ext, Ext)> {
    if !i.is_half_open() || i.is_empty() {
        return Err(Error::Unsupported(format!(
            "closed forms cover nonempty intervals [a,b) only, got {i}"
        )));
    }
    if i.left.value == Ext::NegInf && i.right.value == Ext::PosInf {
        return Err(Error::Unsupported("convolution with the constant module".into()));
    }
    Ok((i.left.value, i.right.value))
}

fn bar(a: Ext, b: Ext) -> Barcode {
    Barcode::from_intervals([Interval::co(a, b)])
}

/// `[a,b) * [c,d) = [max(a+d, b+c), b+d)`.
pub fn sheaf_convolve_underived(i: &Interval, j: &Interval) -> Result<Barcode> {
    Ok(sheaf_convolve_derived(i, j)?.degree(0))
}

/// Degree 0 `[max(a+d, b+c), b+d)`, degree 1 `[a+c, min(a+d, b+c))`. A
/// factor `(-inf, s)` is injective and shifts the other factor by `s`.
pub fn sheaf_convolve_derived(i: &Interval, j: &Interval) -> Result<GradedBarcode> {
    let (a, b) = half_open(i)?;
    let (c, d) = half_open(j)?;
    if let (Ext::NegInf, Ext::Fin(s)) = (c, d) {
        return Ok(GradedBarcode::concentrated(0, translate(&Barcode::from_intervals([*i]), s)));
    }
    if let (Ext::NegInf, Ext::Fin(s)) = (a, b) {
        return Ok(GradedBarcode::concentrated(0, translate(&Barcode::from_intervals([*j]), s)));
    }
    let mut g = GradedBarcode::new();
    g.insert(0, bar(a.add(d).max(b.add(c)), b.add(d)));
    g.insert(1, bar(a.add(c), a.add(d).min(b.add(c))));
    Ok(g)
}

/// `[a,b) • [c,d) = [a+c, min(a+d, b+c))`.
pub fn cosheaf_convolve_underived(i: &Interval, j: &Interval) -> Result<Barcode> {
    Ok(cosheaf_convolve_derived(i, j)?.degree(0))
}

/// Degree 0 `[a+c, min(a+d, b+c))`, degree 1 `[max(a+d, b+c), b+d)`. A
/// factor `[s, inf)` is flat and shifts the other factor by `s`.
pub fn cosheaf_convolve_derived(i: &Interval, j: &Interval) -> Result<GradedBarcode> {
    let (a, b) = half_open(i)?;
    let (c, d) = half_open(j)?;
    if let (Ext::Fin(s), Ext::PosInf) = (c, d) {
        return Ok(GradedBarcode::concentrated(0, translate(&Barcode::from_intervals([*i]), s)));
    }
    if let (Ext::Fin(s), Ext::PosInf) = (a, b) {
        return Ok(GradedBarcode::concentrated(0, translate(&Barcode::from_intervals([*j]), s)));
    }
    let mut g = GradedBarcode::new();
    g.insert(0, bar(a.add(c), a.add(d).min(b.add(c))));
    g.insert(1, bar(a.add(d).max(b.add(c)), b.add(d)));
    Ok(g)
}

/// Shifts every bar by `+s`, the effect of convolving with `k[U_s]` or `k[D_s]`.
pub fn translate(b: &Barcode, s: Rational) -> Barcode {
    Barcode::from_bars(b.bars().iter().map(|(i, m)| (i.translate(s), *m)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Sheaf,
    Cosheaf,
}

/// Degreewise union over all pairs of bars, with multiplicities multiplied.
pub fn convolve_barcodes(a: &Barcode, b: &Barcode, mode: Mode, derived: bool) -> Result<GradedBarcode> {
    let mut out = GradedBarcode::new();
    for (i, m) in a.bars() {
        for (j, n) in b.bars() {
            let g = match mode {
                Mode::Sheaf => sheaf_convolve_derived(i, j)?,
                Mode::Cosheaf => cosheaf_convolve_derived(i, j)?,
            };
            for (d, bc) in g.degrees() {
                if !derived && d != 0 {
                    continue;
                }
                let scaled = Barcode::from_bars(bc.bars().iter().map(|(x, k)| (*x, k * m * n)));
                out.add(d, &scaled);
            }
        }
    }
    Ok(out)
}

/// Half of the length of a finite interval.
pub fn half_length(i: &Interval) -> Option<Rational> {
    i.length().map(|l| l / Rational::from_integer(2))
}

/// `|x - y|` in the extended line; `None` means infinite.
pub fn ext_distance(x: Ext, y: Ext) -> Option<Rational> {
    match (x, y) {
        (Ext::Fin(a), Ext::Fin(b)) => Some((a - b).abs()),
        (p, q) if p == q => Some(Rational::zero()),
        _ => None,
    }
}
