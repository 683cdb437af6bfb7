//! Browser bindings: classification JSON, portrait SVG and the elliptic
//! parameter map. Each export wraps a plain function that also runs natively.

use quadrapt::blowup::{integrate_portrait, portrait_svg as render_svg};
use quadrapt::localmodel::{LocalModel, Region};
use quadrapt::report::{classify, elliptic_parameter_map_svg, versioned};
use wasm_bindgen::prelude::*;

fn region(name: &str) -> Result<Region, String> {
    name.parse::<Region>().map_err(|e| e.to_string())
}

pub fn classify_json(region_name: &str, a: f64, b: f64, c: f64, d: f64) -> Result<String, String> {
    let r = classify(region(region_name)?, [a, b, c, d]).map_err(|e| e.to_string())?;
    serde_json::to_string_pretty(&versioned("classification", &r)).map_err(|e| e.to_string())
}

#[allow(clippy::too_many_arguments)]
pub fn portrait_svg(
    region_name: &str,
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    half_width: f64,
    density: usize,
    size: f64,
) -> Result<String, String> {
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err("half width must be positive".into());
    }
    if !(1..=40).contains(&density) {
        return Err("density must lie in 1..=40".into());
    }
    let m = LocalModel::new(region(region_name)?, [a, b, c, d]);
    if !m.is_simple() {
        return Err("model is not simple (ad - bc = 0)".into());
    }
    let bbox = [-half_width, -half_width, half_width, half_width];
    let p = integrate_portrait(&m, bbox, density).map_err(|e| e.to_string())?;
    Ok(render_svg(&p, size))
}

pub fn elliptic_map_svg(n: usize, r: f64, size: f64) -> Result<String, String> {
    elliptic_parameter_map_svg(n, r, size).map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = classifyJson)]
pub fn classify_json_js(region_name: &str, a: f64, b: f64, c: f64, d: f64) -> Result<String, String> {
    classify_json(region_name, a, b, c, d)
}

#[allow(clippy::too_many_arguments)]
#[wasm_bindgen(js_name = portraitSvg)]
pub fn portrait_svg_js(
    region_name: &str,
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    half_width: f64,
    density: usize,
    size: f64,
) -> Result<String, String> {
    portrait_svg(region_name, a, b, c, d, half_width, density, size)
}

#[wasm_bindgen(js_name = ellipticMapSvg)]
pub fn elliptic_map_svg_js(n: usize, r: f64, size: f64) -> Result<String, String> {
    elliptic_map_svg(n, r, size)
}
