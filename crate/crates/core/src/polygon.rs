//! Convex polygons from complex edge variables: the 2d analog.
//!
//! One complex variable per edge; the normal vector of edge `j` is the
//! complex square `z_j^2` (so flipping the sign of `z_j` is a gauge move),
//! the edge length is `|z_j|^2`, and a configuration bounds a convex
//! polygon exactly when `sum_j z_j^2 = 0`. An SL(2,R) pair of moves (a
//! global phase and an inverse rescaling of real and imaginary parts)
//! closes any non-degenerate configuration, and the orthogonal group O(N)
//! acts on closed configurations, preserving perimeter and closure while
//! deforming the shape.

use crate::ensemble::f64_17;
use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, StandardNormal};

/// A point or direction in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn cross(&self, o: &Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }
}

/// `N` complex edge variables (length units per squared component).
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonConfig {
    edges: Vec<Complex64>,
}

impl PolygonConfig {
    pub fn new(edges: Vec<Complex64>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::TooFew {
                need: 2,
                got: edges.len(),
            });
        }
        Ok(PolygonConfig { edges })
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn edges(&self) -> &[Complex64] {
        &self.edges
    }

    /// `(sum_j z_j^2, sum_j |z_j|^2)`: the closure defect and perimeter.
    pub fn closure_and_perimeter(&self) -> (Complex64, f64) {
        let mut c = Complex64::new(0.0, 0.0);
        let mut e = 0.0;
        for z in &self.edges {
            c += z * z;
            e += z.norm_sqr();
        }
        (c, e)
    }

    pub fn is_closed(&self, tolerance: f64) -> bool {
        let (c, e) = self.closure_and_perimeter();
        c.norm() <= tolerance * e
    }

    /// Close by the SL(2,R) action: rotate every edge by a common phase so
    /// the closure defect is real nonnegative, then rescale real and
    /// imaginary parts by `exp(-eta)` and `exp(eta)` to balance them.
    /// Fails when `|sum z^2|` equals the perimeter (an all-collinear
    /// configuration, e.g. every `z_j` real).
    pub fn close(&self) -> Result<(PolygonConfig, f64, f64)> {
        let (c, e) = self.closure_and_perimeter();
        if e <= 0.0 {
            return Err(Error::ZeroArea);
        }
        if c.norm() >= e * (1.0 - 1e-14) {
            return Err(Error::NonClosable);
        }
        let theta = if c.norm() == 0.0 { 0.0 } else { -c.arg() / 2.0 };
        let phase = Complex64::from_polar(1.0, theta);
        let rotated: Vec<Complex64> = self.edges.iter().map(|z| phase * z).collect();
        let mut re_sq = 0.0;
        let mut im_sq = 0.0;
        for z in &rotated {
            re_sq += z.re * z.re;
            im_sq += z.im * z.im;
        }
        let eta = 0.25 * (re_sq / im_sq).ln();
        let (down, up) = ((-eta).exp(), eta.exp());
        let closed = PolygonConfig {
            edges: rotated
                .iter()
                .map(|z| Complex64::new(down * z.re, up * z.im))
                .collect(),
        };
        Ok((closed, theta, eta))
    }

    /// Mix the edges by an orthogonal matrix; preserves perimeter and
    /// closure exactly.
    pub fn apply_orthogonal(&self, o: &[Vec<f64>]) -> Result<PolygonConfig> {
        let n = self.len();
        if o.len() != n || o.iter().any(|row| row.len() != n) {
            return Err(Error::Domain("matrix dimension mismatch".into()));
        }
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for row in o.iter() {
                    s += row[i] * row[j];
                }
                if i == j {
                    s -= 1.0;
                }
                worst = worst.max(s.abs());
            }
        }
        if worst > 1e-10 {
            return Err(Error::NotUnitary(worst));
        }
        Ok(PolygonConfig {
            edges: (0..n)
                .map(|i| {
                    self.edges
                        .iter()
                        .zip(&o[i])
                        .map(|(z, &oij)| oij * z)
                        .sum()
                })
                .collect(),
        })
    }

    /// Rotation by angle `t` in the `(i, j)` coordinate plane: the flow of
    /// the o(N) generator pair.
    pub fn rotate_pair(&self, i: usize, j: usize, t: f64) -> Result<PolygonConfig> {
        let n = self.len();
        if i >= n || j >= n || i == j {
            return Err(Error::Domain("need two distinct edge indices".into()));
        }
        let (s, c) = t.sin_cos();
        let mut edges = self.edges.clone();
        let zi = edges[i];
        let zj = edges[j];
        edges[i] = c * zi - s * zj;
        edges[j] = s * zi + c * zj;
        Ok(PolygonConfig { edges })
    }

    /// Polygon JSON with 17-significant-digit doubles.
    pub fn to_json(&self) -> String {
        let mut s = format!("{{\"n\": {}, \"edges\": [", self.len());
        for (k, z) in self.edges.iter().enumerate() {
            if k > 0 {
                s.push_str(", ");
            }
            s.push_str(&format!("[{}, {}]", f64_17(z.re), f64_17(z.im)));
        }
        s.push_str("]}");
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(serde::Deserialize)]
        struct Raw {
            n: usize,
            edges: Vec<[f64; 2]>,
        }
        let raw: Raw = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if raw.n != raw.edges.len() {
            return Err(Error::Parse("edge count mismatch".into()));
        }
        PolygonConfig::new(
            raw.edges
                .iter()
                .map(|e| Complex64::new(e[0], e[1]))
                .collect(),
        )
    }
}

/// One reconstructed edge: outward normal, length, and how many input
/// variables were merged into it (parallel normals collapse).
#[derive(Debug, Clone)]
pub struct PolygonEdge {
    pub normal: Vec2,
    pub length: f64,
    pub multiplicity: u32,
}

/// A closed convex polygon: the ordered vertex chain plus its edges.
#[derive(Debug, Clone)]
pub struct Polygon {
    pub vertices: Vec<Vec2>,
    pub edges: Vec<PolygonEdge>,
}

impl Polygon {
    pub fn perimeter(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    /// Area from the shoelace formula.
    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        let mut acc = 0.0;
        for i in 0..n {
            let a = &self.vertices[i];
            let b = &self.vertices[(i + 1) % n];
            acc += a.cross(b);
        }
        acc.abs() / 2.0
    }

    /// Outward normals recomputed from the vertex chain, for cross-checks.
    pub fn normals_from_vertices(&self) -> Vec<Vec2> {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let a = &self.vertices[i];
                let b = &self.vertices[(i + 1) % n];
                Vec2::new(-(b.y - a.y), b.x - a.x)
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        let join = |items: Vec<String>| items.join(", ");
        let verts = join(
            self.vertices
                .iter()
                .map(|v| format!("[{}, {}]", f64_17(v.x), f64_17(v.y)))
                .collect(),
        );
        let normals = join(
            self.edges
                .iter()
                .map(|e| format!("[{}, {}]", f64_17(e.normal.x), f64_17(e.normal.y)))
                .collect(),
        );
        let lengths = join(self.edges.iter().map(|e| f64_17(e.length)).collect());
        let mult = join(
            self.edges
                .iter()
                .map(|e| e.multiplicity.to_string())
                .collect(),
        );
        format!(
            "{{\"vertices\": [{verts}], \"normals\": [{normals}], \"edge_lengths\": [{lengths}], \"multiplicities\": [{mult}]}}"
        )
    }

    /// A standalone SVG drawing: the closed path in a unit-scaled viewBox.
    pub fn to_svg(&self) -> String {
        let mut min = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            min.x = min.x.min(v.x);
            min.y = min.y.min(v.y);
            max.x = max.x.max(v.x);
            max.y = max.y.max(v.y);
        }
        let extent = (max.x - min.x).max(max.y - min.y).max(1e-12);
        let cx = (min.x + max.x) / 2.0;
        let cy = (min.y + max.y) / 2.0;
        let mut d = String::new();
        for (k, v) in self.vertices.iter().enumerate() {
            let x = (v.x - cx) / extent;
            // SVG y grows downward
            let y = -(v.y - cy) / extent;
            d.push_str(&format!(
                "{}{:.6} {:.6} ",
                if k == 0 { "M" } else { "L" },
                x,
                y
            ));
        }
        d.push('Z');
        format!(
            concat!(
                "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"-0.6 -0.6 1.2 1.2\">",
                "<path d=\"{}\" fill=\"#cfe3ff\" stroke=\"#1f3a63\" stroke-width=\"0.008\"/>",
                "</svg>"
            ),
            d
        )
    }
}

/// Rebuild the convex polygon bounded by a closed configuration.
///
/// Normals are the squares `z_j^2`, ordered by angle; parallel normals are
/// merged into a single edge of summed length (the sort needs strict
/// ordering). Each vertex step is the normal rotated a quarter turn,
/// `v_{i+1} - v_i = (n_y, -n_x)`, and the chain is anchored so the vertex
/// centroid sits at the origin.
pub fn reconstruct(config: &PolygonConfig) -> Result<Polygon> {
    let (c, e) = config.closure_and_perimeter();
    if e <= 0.0 {
        return Err(Error::ZeroArea);
    }
    if c.norm() > 1e-10 * e {
        return Err(Error::Domain(format!(
            "configuration is not closed (defect {:.3e} of perimeter)",
            c.norm() / e
        )));
    }
    for (idx, z) in config.edges().iter().enumerate() {
        if z.norm_sqr() == 0.0 {
            return Err(Error::ZeroEdge(idx));
        }
    }
    let tau = 2.0 * std::f64::consts::PI;
    let mut normals: Vec<(f64, Complex64)> = config
        .edges()
        .iter()
        .map(|z| {
            let n = z * z;
            (n.arg().rem_euclid(tau), n)
        })
        .collect();
    normals.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // merge parallel normals
    let angle_tol = 1e-10;
    let mut merged: Vec<(f64, Complex64, u32)> = Vec::new();
    for &(angle, n) in &normals {
        match merged.last_mut() {
            Some((prev, acc, count)) if angle - *prev < angle_tol => {
                *acc += n;
                *count += 1;
            }
            _ => merged.push((angle, n, 1)),
        }
    }
    // first and last may also be parallel modulo a full turn
    if merged.len() > 1 {
        let wrap = merged[0].0 + tau - merged.last().unwrap().0;
        if wrap < angle_tol {
            let (_, n, count) = merged.pop().unwrap();
            merged[0].1 += n;
            merged[0].2 += count;
        }
    }
    let edges: Vec<PolygonEdge> = merged
        .iter()
        .map(|&(_, n, count)| PolygonEdge {
            normal: Vec2::new(n.re, n.im),
            length: n.norm(),
            multiplicity: count,
        })
        .collect();
    // vertex chain from the quarter-turned normals
    let mut vertices = Vec::with_capacity(edges.len());
    let mut cursor = Vec2::default();
    for edge in &edges {
        vertices.push(cursor);
        cursor = Vec2::new(cursor.x + edge.normal.y, cursor.y - edge.normal.x);
    }
    if cursor.norm() > 1e-10 * e {
        return Err(Error::Domain(format!(
            "vertex chain failed to close (gap {:.3e})",
            cursor.norm()
        )));
    }
    // convexity: consecutive steps never turn clockwise
    let m = edges.len();
    for i in 0..m {
        let a = &edges[i];
        let b = &edges[(i + 1) % m];
        let step_a = Vec2::new(a.normal.y, -a.normal.x);
        let step_b = Vec2::new(b.normal.y, -b.normal.x);
        if step_a.cross(&step_b) < -1e-10 * e * e {
            return Err(Error::Domain(
                "reconstruction produced a reflex turn".into(),
            ));
        }
    }
    // anchor: centroid of the vertex chain at the origin
    let inv = 1.0 / m as f64;
    let centroid = vertices.iter().fold(Vec2::default(), |acc, v| {
        Vec2::new(acc.x + v.x * inv, acc.y + v.y * inv)
    });
    for v in vertices.iter_mut() {
        v.x -= centroid.x;
        v.y -= centroid.y;
    }
    Ok(Polygon { vertices, edges })
}

/// A Haar-uniform closed polygon configuration of given perimeter: the
/// first two columns of a Haar orthogonal matrix, scaled by
/// `sqrt(perimeter/2)`, read as real and imaginary parts.
pub fn sample_polygon(n: usize, perimeter: f64, rng: &mut ChaCha8Rng) -> Result<PolygonConfig> {
    if n < 2 {
        return Err(Error::TooFew { need: 2, got: n });
    }
    if perimeter <= 0.0 {
        return Err(Error::Domain("perimeter must be positive".into()));
    }
    let mut re: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    let mut im: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    normalize(&mut re);
    project_out(&re, &mut im);
    normalize(&mut im);
    project_out(&re, &mut im);
    normalize(&mut im);
    let s = (perimeter / 2.0).sqrt();
    PolygonConfig::new(
        re.iter()
            .zip(&im)
            .map(|(&r, &i)| Complex64::new(s * r, s * i))
            .collect(),
    )
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= norm;
    }
}

fn project_out(v: &[f64], w: &mut [f64]) {
    let overlap: f64 = v.iter().zip(w.iter()).map(|(a, b)| a * b).sum();
    for (wi, vi) in w.iter_mut().zip(v) {
        *wi -= overlap * vi;
    }
}

/// Independent route to the same distribution, mirroring the recursive
/// unitary-column parametrization with the phases demoted to signs: the
/// last coordinate of a uniform point on S^(k-1) is a shifted
/// Beta((k-1)/2, (k-1)/2) variable.
pub fn sample_polygon_recursive(
    n: usize,
    perimeter: f64,
    rng: &mut ChaCha8Rng,
) -> Result<PolygonConfig> {
    if n < 2 {
        return Err(Error::TooFew { need: 2, got: n });
    }
    let sign = |rng: &mut ChaCha8Rng| if rng.gen::<bool>() { 1.0f64 } else { -1.0 };
    // base case: a uniform planar direction and its perpendicular, with a
    // sign ambiguity on the latter
    let alpha = rng.gen::<f64>() * std::f64::consts::FRAC_PI_2;
    let (s1, s2, s3) = (sign(rng), sign(rng), sign(rng));
    let mut v = vec![s1 * alpha.cos(), s2 * alpha.sin()];
    let mut w = vec![-s3 * s1 * alpha.sin(), s3 * s2 * alpha.cos()];
    for k in 3..=n {
        let beta_v = Beta::new((k as f64 - 1.0) / 2.0, (k as f64 - 1.0) / 2.0).unwrap();
        let t: f64 = 2.0 * beta_v.sample(rng) - 1.0;
        let cos_alpha = (1.0 - t * t).max(0.0).sqrt();
        let prev_v = v.clone();
        for vi in v.iter_mut() {
            *vi *= cos_alpha;
        }
        v.push(t);
        // w sits on S^(k-2) inside the complement of v; its coordinate
        // along the lifted last axis follows Beta((k-2)/2, (k-2)/2)
        // (the arcsine law at k = 3)
        let beta_w = Beta::new((k as f64 - 2.0) / 2.0, (k as f64 - 2.0) / 2.0).unwrap();
        let u: f64 = 2.0 * beta_w.sample(rng) - 1.0;
        let cos_beta = (1.0 - u * u).max(0.0).sqrt();
        for (wi, pv) in w.iter_mut().zip(&prev_v) {
            *wi = cos_beta * *wi - u * t * pv;
        }
        w.push(u * cos_alpha);
    }
    let s = (perimeter / 2.0).sqrt();
    PolygonConfig::new(
        v.iter()
            .zip(&w)
            .map(|(&r, &i)| Complex64::new(s * r, s * i))
            .collect(),
    )
}

/// A glued-polygon network: one complex variable per half-link, a closure
/// constraint per vertex, and a length-matching constraint per link.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ComplexNetwork {
    pub n_vertices: usize,
    pub links: Vec<NetworkLink>,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct NetworkLink {
    pub source: usize,
    pub target: usize,
    /// Half-link variable on the source side, as `[re, im]`.
    pub z_source: [f64; 2],
    /// Half-link variable on the target side.
    pub z_target: [f64; 2],
}

/// Per-constraint residuals of a network.
#[derive(Debug, Clone)]
pub struct NetworkReport {
    /// `(vertex, |sum z^2|, perimeter)` per vertex with incident links.
    pub vertex_residuals: Vec<(usize, f64, f64)>,
    /// `(link index, length mismatch, larger length)` per link.
    pub link_residuals: Vec<(usize, f64, f64)>,
    pub pass: bool,
}

/// Check every vertex closure and link length-matching constraint against
/// `1e-10` of the local scale. An empty network passes vacuously.
pub fn validate_network(net: &ComplexNetwork) -> NetworkReport {
    let mut per_vertex: Vec<Vec<Complex64>> = vec![Vec::new(); net.n_vertices];
    for link in &net.links {
        per_vertex[link.source].push(Complex64::new(link.z_source[0], link.z_source[1]));
        per_vertex[link.target].push(Complex64::new(link.z_target[0], link.z_target[1]));
    }
    let mut pass = true;
    let mut vertex_residuals = Vec::new();
    for (v, zs) in per_vertex.iter().enumerate() {
        if zs.is_empty() {
            continue;
        }
        let defect: Complex64 = zs.iter().map(|z| z * z).sum();
        let perimeter: f64 = zs.iter().map(|z| z.norm_sqr()).sum();
        if defect.norm() > 1e-10 * perimeter {
            pass = false;
        }
        vertex_residuals.push((v, defect.norm(), perimeter));
    }
    let mut link_residuals = Vec::new();
    for (idx, link) in net.links.iter().enumerate() {
        let ls = Complex64::new(link.z_source[0], link.z_source[1]).norm_sqr();
        let lt = Complex64::new(link.z_target[0], link.z_target[1]).norm_sqr();
        let scale = ls.max(lt);
        if (ls - lt).abs() > 1e-10 * scale {
            pass = false;
        }
        link_residuals.push((idx, (ls - lt).abs(), scale));
    }
    NetworkReport {
        vertex_residuals,
        link_residuals,
        pass,
    }
}
