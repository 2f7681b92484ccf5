//! Browser demo bindings: sample and deform polygons and polyhedra live.

use polyhedra::polygon;
use polyhedra::quantum;
use polyhedra::sampler;
use wasm_bindgen::prelude::wasm_bindgen;

/// Sample a closed polygon, walk it along a chain of coordinate-plane
/// rotations parameterized by `t`, and render the convex reconstruction.
///
/// `t = 0` shows the seed polygon; sliding `t` deforms it continuously
/// while the perimeter and closure stay fixed.
#[wasm_bindgen]
pub fn polygon_svg(n: usize, perimeter: f64, seed: u64, t: f64) -> Result<String, String> {
    let mut rng = sampler::stream_rng(seed, 0);
    let mut config = polygon::sample_polygon(n, perimeter, &mut rng).map_err(|e| e.to_string())?;
    if t != 0.0 {
        for k in 0..n {
            config = config
                .rotate_pair(k, (k + 2) % n, t * (1.0 + 0.3 * k as f64) / n as f64)
                .map_err(|e| e.to_string())?;
        }
    }
    let poly = polygon::reconstruct(&config).map_err(|e| e.to_string())?;
    Ok(poly.to_svg())
}

/// Edge lengths of the same deformed polygon, as a JSON array (drives the
/// length-distribution bars next to the drawing).
#[wasm_bindgen]
pub fn polygon_lengths(n: usize, perimeter: f64, seed: u64, t: f64) -> Result<String, String> {
    let mut rng = sampler::stream_rng(seed, 0);
    let mut config = polygon::sample_polygon(n, perimeter, &mut rng).map_err(|e| e.to_string())?;
    if t != 0.0 {
        for k in 0..n {
            config = config
                .rotate_pair(k, (k + 2) % n, t * (1.0 + 0.3 * k as f64) / n as f64)
                .map_err(|e| e.to_string())?;
        }
    }
    let lengths: Vec<String> = config
        .edges()
        .iter()
        .map(|z| format!("{:.6}", z.norm_sqr()))
        .collect();
    Ok(format!("[{}]", lengths.join(",")))
}

/// A Haar-random framed polyhedron: face normal vectors, face areas, and
/// shape diagnostics, as JSON for the star plot.
#[wasm_bindgen]
pub fn polyhedron_json(n: usize, lambda: f64, seed: u64) -> Result<String, String> {
    let mut rng = sampler::stream_rng(seed, 0);
    let e = sampler::sample_polyhedron(n, lambda, &mut rng).map_err(|e| e.to_string())?;
    let vectors = e.vectors();
    let rows: Vec<String> = vectors
        .iter()
        .map(|(v, norm)| format!("[{:.6},{:.6},{:.6},{:.6}]", v.x, v.y, v.z, norm))
        .collect();
    let vs: Vec<polyhedra::Vec3> = vectors.iter().map(|(v, _)| *v).collect();
    let tr_theta = polyhedra::moments::tr_theta_sq(&vs);
    let (c, area) = e.closure_vector();
    Ok(format!(
        "{{\"vectors\":[{}],\"total_area\":{:.6},\"closure_residual\":{:.3e},\"tr_theta_sq\":{:.6},\"mean_area_exact\":{:.6}}}",
        rows.join(","),
        area,
        c.norm(),
        tr_theta,
        2.0 * lambda / n as f64,
    ))
}

/// Intertwiner dimension table `d_N[J]` for `J = 0..=j_max`, with the
/// large-area asymptotic and its ratio, as JSON rows.
#[wasm_bindgen]
pub fn dimension_table(n: usize, j_max: u32) -> Result<String, String> {
    let mut rows = Vec::new();
    for j in 0..=j_max {
        let exact = quantum::dimension(n, 2 * j).map_err(|e| e.to_string())?;
        let asym = if n >= 3 && j >= 1 {
            quantum::asymptotic_dimension(n, 2 * j).map_err(|e| e.to_string())?
        } else {
            f64::NAN
        };
        let exact_str = exact.to_string();
        let ratio = if asym.is_finite() {
            asym / exact_str.parse::<f64>().unwrap_or(f64::NAN)
        } else {
            f64::NAN
        };
        rows.push(format!(
            "{{\"j\":{j},\"exact\":\"{exact_str}\",\"asymptotic\":\"{asym:.4e}\",\"ratio\":\"{ratio:.4}\"}}"
        ));
    }
    Ok(format!("[{}]", rows.join(",")))
}
