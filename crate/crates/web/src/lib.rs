//! Browser bindings. Every entry point takes and returns JSON text; errors
//! come back as `{"error": "..."}`.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use sheafconv::cli::oracle_compare;
use sheafconv::distance::bottleneck_distance;
use sheafconv::exactalg::Field;
use sheafconv::interval::{convolve_barcodes, Barcode, Mode};
use sheafconv::stability::{sublevel_persistence, SimplicialComplex, VertexFunction};
use sheafconv::Result;

fn respond(r: Result<Value>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

fn parse(text: &str) -> Result<Value> {
    Ok(serde_json::from_str(text)?)
}

fn mode_of(name: &str) -> Result<Mode> {
    match name {
        "sheaf" => Ok(Mode::Sheaf),
        "cosheaf" => Ok(Mode::Cosheaf),
        _ => Err(sheafconv::Error::Schema(format!("unknown mode {name:?}"))),
    }
}

pub fn convolve_impl(a: &str, b: &str, mode: &str) -> Result<Value> {
    let (a, b) = (Barcode::from_json(&parse(a)?)?, Barcode::from_json(&parse(b)?)?);
    let mode = mode_of(mode)?;
    let derived = convolve_barcodes(&a, &b, mode, true)?;
    let check = oracle_compare(Field::F2, &a, &b, mode, None, None)?;
    Ok(json!({
        "closed_form": derived.to_json(),
        "lattice_expected": check.expected.to_json(),
        "lattice_oracle": check.got.to_json(),
        "agree": check.pass,
    }))
}

pub fn distance_impl(a: &str, b: &str) -> Result<Value> {
    let (a, b) = (Barcode::from_json(&parse(a)?)?, Barcode::from_json(&parse(b)?)?);
    let r = bottleneck_distance(&a, &b);
    let (ea, eb) = (a.expanded(), b.expanded());
    let pairs: Vec<Value> = r
        .matching
        .unwrap_or_default()
        .into_iter()
        .map(|(i, j)| {
            json!([
                i.map_or("diagonal".to_string(), |i| ea[i].to_string()),
                j.map_or("diagonal".to_string(), |j| eb[j].to_string()),
            ])
        })
        .collect();
    Ok(json!({ "value": r.value.to_string(), "matching": pairs }))
}

pub fn sublevel_impl(complex: &str, f: &str, degree: i64) -> Result<Value> {
    let k = SimplicialComplex::from_json(&parse(complex)?)?;
    let f = VertexFunction::from_json(&parse(f)?)?;
    Ok(sublevel_persistence(&k, &f, degree)?.to_json())
}

/// Derived convolution of two barcodes in closed form, checked against the
/// lattice oracle. `mode` is `"sheaf"` or `"cosheaf"`.
#[wasm_bindgen]
pub fn convolve(a: &str, b: &str, mode: &str) -> String {
    respond(convolve_impl(a, b, mode))
}

/// Bottleneck distance with an optimal matching.
#[wasm_bindgen]
pub fn distance(a: &str, b: &str) -> String {
    respond(distance_impl(a, b))
}

/// Lower-star persistence of a vertex function.
#[wasm_bindgen]
pub fn sublevel(complex: &str, f: &str, degree: i32) -> String {
    respond(sublevel_impl(complex, f, degree as i64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convolve_two_bars() {
        let a = r#"{"bars":[{"left":0,"right":2}]}"#;
        let b = r#"{"bars":[{"left":0,"right":3}]}"#;
        let v = convolve_impl(a, b, "cosheaf").unwrap();
        assert_eq!(v["agree"], true);
        let d = &v["closed_form"]["degrees"];
        assert_eq!(d[0]["degree"], 0);
        assert_eq!(d[0]["bars"][0]["right"], "2");
        assert_eq!(d[1]["bars"][0]["left"], "3");
        assert!(convolve(a, b, "neither").contains("error"));
    }

    #[test]
    fn matching_is_reported() {
        let v = distance_impl(r#"{"bars":[{"left":0,"right":4}]}"#, r#"{"bars":[{"left":1,"right":4}]}"#).unwrap();
        assert_eq!(v["value"], "1");
        assert_eq!(v["matching"][0], json!(["[0, 4)", "[1, 4)"]));
    }

    #[test]
    fn triangle_boundary() {
        let k = r#"{"simplices":[[0],[1],[2],[0,1],[1,2],[0,2]]}"#;
        let v = sublevel_impl(k, r#"{"0":0,"1":1,"2":2}"#, 1).unwrap();
        assert_eq!(v["bars"][0]["left"], "2");
        assert_eq!(v["bars"][0]["right"], "inf");
        assert!(sublevel(k, "{", 0).contains("error"));
    }
}
