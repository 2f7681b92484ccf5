//! Collections of spinors up to closure: the framed polyhedron phase space.
//!
//! An ensemble of `N >= 2` spinors carries a 2x2 density matrix
//! `X = sum_i |z_i><z_i|`. The ensemble is closed (is a framed polyhedron)
//! when `X` is proportional to the identity, i.e. the closure vector
//! `C = Tr(X sigma)` vanishes. Any open ensemble with `det X > 0` can be
//! closed by an SL(2,C) transform; the holomorphic observables
//! `F_ij = [z_i|z_j>` are invariant under that closing and determine the
//! ensemble up to SL(2,C) (up to SU(2) once closed).

use crate::linalg::CMatrix;
use crate::spinor::{spinor_to_vector, Spinor, Vec3};
use crate::{tol, Error, Result};
use num_complex::Complex64;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

/// A 2x2 complex matrix, the common substrate of [`Sl2c`] and [`Su2`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Mat2 {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn identity() -> Self {
        Mat2::new(C1, C0, C0, C1)
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    pub fn adjoint(&self) -> Mat2 {
        Mat2::new(self.a.conj(), self.c.conj(), self.b.conj(), self.d.conj())
    }

    pub fn inverse(&self) -> Mat2 {
        let det = self.det();
        Mat2::new(self.d / det, -self.b / det, -self.c / det, self.a / det)
    }

    pub fn apply(&self, z: &Spinor) -> Spinor {
        Spinor {
            z0: self.a * z.z0 + self.b * z.z1,
            z1: self.c * z.z0 + self.d * z.z1,
        }
    }

    /// Max-entry distance from the identity of `M^dagger M`.
    pub fn unitarity_residual(&self) -> f64 {
        let g = self.adjoint().mul(self);
        ((g.a - C1).norm())
            .max(g.b.norm())
            .max(g.c.norm())
            .max((g.d - C1).norm())
    }

    /// Outer product `|u>[v|` built from a spinor and a dual row.
    fn ket_fbra(u: &Spinor, v: &Spinor) -> Mat2 {
        // [v| = (-v1, v0)
        Mat2::new(-u.z0 * v.z1, u.z0 * v.z0, -u.z1 * v.z1, u.z1 * v.z0)
    }

    /// Outer product `|u><v|`.
    fn ket_bra(u: &Spinor, v: &Spinor) -> Mat2 {
        Mat2::new(
            u.z0 * v.z0.conj(),
            u.z0 * v.z1.conj(),
            u.z1 * v.z0.conj(),
            u.z1 * v.z1.conj(),
        )
    }
}

/// An SL(2,C) transform: `det = 1` within 1e-12.
#[derive(Debug, Clone, Copy)]
pub struct Sl2c(pub Mat2);

impl Sl2c {
    pub fn new(m: Mat2) -> Result<Self> {
        let r = (m.det() - C1).norm();
        if r > tol::TOL_CLOSURE {
            return Err(Error::Domain(format!(
                "determinant differs from 1 by {r:.3e}"
            )));
        }
        Ok(Sl2c(m))
    }

    pub fn identity() -> Self {
        Sl2c(Mat2::identity())
    }

    pub fn inverse(&self) -> Sl2c {
        Sl2c(self.0.inverse())
    }
}

/// An SU(2) rotation: unitary with `det = 1` within 1e-12.
#[derive(Debug, Clone, Copy)]
pub struct Su2(pub Mat2);

impl Su2 {
    pub fn new(m: Mat2) -> Result<Self> {
        let ru = m.unitarity_residual();
        let rd = (m.det() - C1).norm();
        if ru > tol::TOL_CLOSURE || rd > tol::TOL_CLOSURE {
            return Err(Error::NotUnitary(ru.max(rd)));
        }
        Ok(Su2(m))
    }

    pub fn identity() -> Self {
        Su2(Mat2::identity())
    }

    /// Rotation by `angle` about the unit axis, acting on vectors through
    /// the Pauli sandwich with the right-hand rule.
    pub fn from_axis_angle(axis: &Vec3, angle: f64) -> Su2 {
        let n = axis.norm();
        let (ux, uy, uz) = if n == 0.0 {
            (0.0, 0.0, 1.0)
        } else {
            (axis.x / n, axis.y / n, axis.z / n)
        };
        let (s, c) = (angle / 2.0).sin_cos();
        // exp(-i angle/2 u.sigma)
        Su2(Mat2::new(
            Complex64::new(c, -s * uz),
            Complex64::new(-s * uy, -s * ux),
            Complex64::new(s * uy, -s * ux),
            Complex64::new(c, s * uz),
        ))
    }

    /// The rotation taking the direction of `from` onto the direction of `to`.
    pub fn rotation_between(from: &Vec3, to: &Vec3) -> Result<Su2> {
        let nf = from.norm();
        let nt = to.norm();
        if nf == 0.0 || nt == 0.0 {
            return Err(Error::DegenerateNormal);
        }
        let f = from.scale(1.0 / nf);
        let t = to.scale(1.0 / nt);
        let cross = Vec3::new(
            f.y * t.z - f.z * t.y,
            f.z * t.x - f.x * t.z,
            f.x * t.y - f.y * t.x,
        );
        let dot = f.dot(&t).clamp(-1.0, 1.0);
        if cross.norm() < 1e-15 {
            if dot > 0.0 {
                return Ok(Su2::identity());
            }
            // antipodal: rotate pi about any axis orthogonal to `f`
            let axis = if f.x.abs() < 0.9 {
                Vec3::new(0.0, -f.z, f.y)
            } else {
                Vec3::new(f.z, 0.0, -f.x)
            };
            return Ok(Su2::from_axis_angle(&axis, std::f64::consts::PI));
        }
        Ok(Su2::from_axis_angle(&cross, dot.acos()))
    }
}

/// An ordered list of `N >= 2` spinors: a framed polyhedron when closed.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorEnsemble {
    spinors: Vec<Spinor>,
}

/// The invariant coordinates: Hermitian `E_ij = <z_i|z_j>` and
/// antisymmetric `F_ij = [z_i|z_j>`.
#[derive(Debug, Clone)]
pub struct ObservableMatrices {
    pub n: usize,
    pub e: Vec<Complex64>,
    pub f: Vec<Complex64>,
}

/// The first two columns of the unitary matrix that generates a closed
/// ensemble from the squeezed reference configuration, plus the area scale.
#[derive(Debug, Clone)]
pub struct UnitaryFrame {
    pub col0: Vec<Complex64>,
    pub col1: Vec<Complex64>,
    pub lambda: f64,
}

impl UnitaryFrame {
    /// Max deviation of the two columns from orthonormality.
    pub fn orthonormality_residual(&self) -> f64 {
        let mut n0 = 0.0;
        let mut n1 = 0.0;
        let mut cross = C0;
        for (a, b) in self.col0.iter().zip(&self.col1) {
            n0 += a.norm_sqr();
            n1 += b.norm_sqr();
            cross += a.conj() * b;
        }
        (n0 - 1.0).abs().max((n1 - 1.0).abs()).max(cross.norm())
    }

    /// Rebuild the spinor ensemble `z_k = sqrt(lambda) (col0_k, col1_k)`.
    pub fn to_ensemble(&self) -> Result<SpinorEnsemble> {
        let s = self.lambda.sqrt();
        SpinorEnsemble::new(
            self.col0
                .iter()
                .zip(&self.col1)
                .map(|(a, b)| Spinor::new(s * a, s * b))
                .collect(),
        )
    }
}

impl SpinorEnsemble {
    pub fn new(spinors: Vec<Spinor>) -> Result<Self> {
        if spinors.len() < 2 {
            return Err(Error::TooFew {
                need: 2,
                got: spinors.len(),
            });
        }
        Ok(SpinorEnsemble { spinors })
    }

    /// The squeezed reference configuration: `(1,0), (0,1), 0, ..., 0`.
    pub fn reference(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFew { need: 2, got: n });
        }
        let mut spinors = vec![Spinor::zero(); n];
        spinors[0] = Spinor::new(C1, C0);
        spinors[1] = Spinor::new(C0, C1);
        SpinorEnsemble::new(spinors)
    }

    pub fn len(&self) -> usize {
        self.spinors.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spinors(&self) -> &[Spinor] {
        &self.spinors
    }

    /// Total area `2 lambda = sum_i <z_i|z_i>`.
    pub fn total_area(&self) -> f64 {
        self.spinors.iter().map(|z| z.norm_sq()).sum()
    }

    /// The normal vectors and their norms.
    pub fn vectors(&self) -> Vec<(Vec3, f64)> {
        self.spinors.iter().map(spinor_to_vector).collect()
    }

    /// Closure vector `C = sum_i <z_i|sigma|z_i>` and total area.
    pub fn closure_vector(&self) -> (Vec3, f64) {
        let mut c = Vec3::default();
        let mut area = 0.0;
        for z in &self.spinors {
            let (v, n) = spinor_to_vector(z);
            c = c.add(&v);
            area += n;
        }
        (c, area)
    }

    pub fn is_closed(&self, tolerance: f64) -> bool {
        let (c, area) = self.closure_vector();
        c.norm() <= tolerance * area
    }

    /// Density matrix `X = sum_i |z_i><z_i|`.
    fn density_matrix(&self) -> Mat2 {
        let mut x = Mat2::new(C0, C0, C0, C0);
        for z in &self.spinors {
            x.a += z.z0 * z.z0.conj();
            x.b += z.z0 * z.z1.conj();
            x.c += z.z1 * z.z0.conj();
            x.d += z.z1 * z.z1.conj();
        }
        x
    }

    /// Close an open ensemble by the SL(2,C) transform read off the
    /// eigendecomposition of the density matrix.
    ///
    /// Writes `X = g diag(d+, d-) g^dagger` with `g` in SU(2), forms
    /// `L = g sqrt(diag) / (det X)^(1/4)` and applies `L^{-1}`. The result
    /// has `X = sqrt(det X) I`, i.e. total area `sqrt((2 lambda)^2 - |C|^2)`,
    /// and the same `F` matrix as the input. Returns the applied transform
    /// `T = L^{-1}` (so `apply_sl2c(T, input) == output`).
    pub fn close(&self) -> Result<(SpinorEnsemble, Sl2c)> {
        let x = self.density_matrix();
        let tr = (x.a + x.d).re;
        if tr <= 0.0 {
            return Err(Error::ZeroArea);
        }
        let det = x.det().re;
        // det X = ((2 lambda)^2 - |C|^2)/4; rank-1 X cannot be closed
        if det <= tr * tr * 1e-30 {
            return Err(Error::NonClosable);
        }
        let (dplus, dminus, g) = hermitian_2x2_eig(&x);
        let quarter = det.powf(0.25);
        let lam_inv = Mat2::new(
            Complex64::new(quarter / dplus.sqrt(), 0.0),
            C0,
            C0,
            Complex64::new(quarter / dminus.sqrt(), 0.0),
        )
        .mul(&g.0.adjoint());
        let transform = Sl2c::new(lam_inv)?;
        let closed = self.apply_mat2(&lam_inv);
        Ok((closed, transform))
    }

    /// Independent closing route: rotate the closure vector onto the z-axis,
    /// then rescale the two spinor components by inverse quartic-root factors
    /// so the balance equation holds.
    pub fn close_by_rescaling(&self) -> Result<(SpinorEnsemble, Sl2c)> {
        let (c, area) = self.closure_vector();
        if area <= 0.0 {
            return Err(Error::ZeroArea);
        }
        let cn = c.norm();
        let lambda = area / 2.0;
        if lambda - cn / 2.0 <= lambda * 1e-15 {
            return Err(Error::NonClosable);
        }
        let rot = if cn == 0.0 {
            Su2::identity()
        } else {
            // rotate C onto +z by acting on the spinors
            Su2::rotation_between(&c, &Vec3::new(0.0, 0.0, 1.0))?
        };
        let rotated = self.apply_mat2(&rot.0);
        let (c2, _) = rotated.closure_vector();
        debug_assert!(c2.x.abs() + c2.y.abs() <= 1e-9 * area);
        let mu = ((lambda - cn / 2.0) / (lambda + cn / 2.0)).powf(0.25);
        let rescale = Mat2::new(
            Complex64::new(mu, 0.0),
            C0,
            C0,
            Complex64::new(1.0 / mu, 0.0),
        );
        let total = rescale.mul(&rot.0);
        let transform = Sl2c::new(total)?;
        Ok((rotated.apply_mat2(&rescale), transform))
    }

    fn apply_mat2(&self, m: &Mat2) -> SpinorEnsemble {
        SpinorEnsemble {
            spinors: self.spinors.iter().map(|z| m.apply(z)).collect(),
        }
    }

    pub fn apply_sl2c(&self, t: &Sl2c) -> SpinorEnsemble {
        self.apply_mat2(&t.0)
    }

    pub fn apply_su2(&self, g: &Su2) -> SpinorEnsemble {
        self.apply_mat2(&g.0)
    }

    /// Mix the spinors by a unitary matrix: `z'_i = sum_j U_ij z_j`.
    ///
    /// Preserves the total area and the closure vector.
    pub fn apply_unitary(&self, u: &CMatrix) -> Result<SpinorEnsemble> {
        if u.n != self.len() {
            return Err(Error::Domain(format!(
                "matrix dimension {} does not match ensemble size {}",
                u.n,
                self.len()
            )));
        }
        let r = u.unitarity_residual();
        if r > tol::TOL_INVARIANT {
            return Err(Error::NotUnitary(r));
        }
        let n = self.len();
        let mut out = vec![Spinor::zero(); n];
        for (i, oi) in out.iter_mut().enumerate() {
            let mut z0 = C0;
            let mut z1 = C0;
            for (j, zj) in self.spinors.iter().enumerate() {
                let uij = u.at(i, j);
                z0 += uij * zj.z0;
                z1 += uij * zj.z1;
            }
            *oi = Spinor::new(z0, z1);
        }
        Ok(SpinorEnsemble { spinors: out })
    }

    /// The invariant matrices `E_ij = <z_i|z_j>` and `F_ij = [z_i|z_j>`.
    pub fn observables(&self) -> ObservableMatrices {
        let n = self.len();
        let mut e = vec![C0; n * n];
        let mut f = vec![C0; n * n];
        for i in 0..n {
            for j in 0..n {
                e[i * n + j] = self.spinors[i].dot(&self.spinors[j]);
                f[i * n + j] = self.spinors[i].fdot(&self.spinors[j]);
            }
        }
        ObservableMatrices { n, e, f }
    }

    /// Cross-ratios `Z_i = (zeta_i - zeta_1)/(zeta_3 - zeta_2)` for `i >= 4`
    /// in the stereographic chart `zeta = z1/z0`.
    pub fn cross_ratios(&self) -> Result<Vec<Complex64>> {
        let n = self.len();
        if n <= 3 {
            return Ok(Vec::new());
        }
        for k in 0..3 {
            if self.spinors[k].z0.norm() == 0.0 {
                return Err(Error::ChartSingularity);
            }
        }
        let z1 = self.spinors[0].zeta();
        let z2 = self.spinors[1].zeta();
        let z3 = self.spinors[2].zeta();
        let denom = z3 - z2;
        if denom.norm() == 0.0 {
            return Err(Error::ChartSingularity);
        }
        let mut out = Vec::with_capacity(n - 3);
        for zi in &self.spinors[3..] {
            if zi.z0.norm() == 0.0 {
                return Err(Error::ChartSingularity);
            }
            out.push((zi.zeta() - z1) / denom);
        }
        Ok(out)
    }

    /// Cross-ratios recomputed through the `F` observables,
    /// `Z_i = (F_1i / F_23) (z0_2 z0_3)/(z0_1 z0_i)`.
    pub fn cross_ratios_from_f(&self) -> Result<Vec<Complex64>> {
        let n = self.len();
        if n <= 3 {
            return Ok(Vec::new());
        }
        for k in 0..3 {
            if self.spinors[k].z0.norm() == 0.0 {
                return Err(Error::ChartSingularity);
            }
        }
        let f23 = self.spinors[1].fdot(&self.spinors[2]);
        if f23.norm() == 0.0 {
            return Err(Error::ChartSingularity);
        }
        let lead = self.spinors[1].z0 * self.spinors[2].z0 / self.spinors[0].z0;
        let mut out = Vec::with_capacity(n - 3);
        for zi in &self.spinors[3..] {
            if zi.z0.norm() == 0.0 {
                return Err(Error::ChartSingularity);
            }
            let f1i = self.spinors[0].fdot(zi);
            out.push(f1i / f23 * lead / zi.z0);
        }
        Ok(out)
    }

    /// Read off the two unitary columns of a closed ensemble,
    /// `z_k = sqrt(lambda) (U_k1, U_k2)`.
    pub fn reconstruct_frame(&self) -> Result<UnitaryFrame> {
        let area = self.total_area();
        if area <= 0.0 {
            return Err(Error::ZeroArea);
        }
        let lambda = area / 2.0;
        let s = lambda.sqrt();
        Ok(UnitaryFrame {
            col0: self.spinors.iter().map(|z| z.z0 / s).collect(),
            col1: self.spinors.iter().map(|z| z.z1 / s).collect(),
            lambda,
        })
    }

    /// Ensemble JSON: `{"n": .., "spinors": [[re0,im0,re1,im1], ..]}` with
    /// every double printed to 17 significant digits so reads are bit-exact.
    pub fn to_json(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("{{\"n\": {}, \"spinors\": [", self.len()));
        for (k, z) in self.spinors.iter().enumerate() {
            if k > 0 {
                s.push_str(", ");
            }
            s.push_str(&format!(
                "[{}, {}, {}, {}]",
                f64_17(z.z0.re),
                f64_17(z.z0.im),
                f64_17(z.z1.re),
                f64_17(z.z1.im)
            ));
        }
        s.push_str("]}");
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(serde::Deserialize)]
        struct Raw {
            n: usize,
            spinors: Vec<[f64; 4]>,
        }
        let raw: Raw =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if raw.n != raw.spinors.len() {
            return Err(Error::Parse(format!(
                "declared n={} but {} spinors present",
                raw.n,
                raw.spinors.len()
            )));
        }
        SpinorEnsemble::new(
            raw.spinors
                .iter()
                .map(|r| Spinor::from_reals(r[0], r[1], r[2], r[3]))
                .collect(),
        )
    }
}

/// 17 significant digits: enough to reproduce any IEEE-754 double exactly.
pub fn f64_17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Analytic eigendecomposition of a positive Hermitian 2x2 matrix.
///
/// Returns `(d+, d-, g)` with `d+ >= d-` and `g` in SU(2) whose columns are
/// the eigenvectors; the second column is the dual of the first, which makes
/// `det g = 1` automatic. Degenerate matrices get `g = I`.
fn hermitian_2x2_eig(x: &Mat2) -> (f64, f64, Su2) {
    let a = x.a.re;
    let d = x.d.re;
    let b = x.b; // x.c = conj(b)
    let tr = a + d;
    let gap = ((a - d) * (a - d) + 4.0 * b.norm_sqr()).sqrt();
    let dplus = (tr + gap) / 2.0;
    let dminus = (tr - gap) / 2.0;
    if gap <= tr * 1e-15 {
        return (dplus, dminus, Su2::identity());
    }
    // eigenvector for d+, picking the better-conditioned of the two row forms
    let u = if a >= d {
        Spinor::new(Complex64::new(dplus - d, 0.0), b.conj())
    } else {
        Spinor::new(b, Complex64::new(dplus - a, 0.0))
    };
    let norm = u.norm_sq().sqrt();
    let u = Spinor::new(u.z0 / norm, u.z1 / norm);
    let v = u.dual();
    let g = Mat2::new(u.z0, v.z0, u.z1, v.z1);
    (dplus, dminus, Su2(g))
}

impl ObservableMatrices {
    #[inline]
    pub fn e(&self, i: usize, j: usize) -> Complex64 {
        self.e[i * self.n + j]
    }

    #[inline]
    pub fn f(&self, i: usize, j: usize) -> Complex64 {
        self.f[i * self.n + j]
    }

    pub fn trace_e(&self) -> f64 {
        (0..self.n).map(|i| self.e(i, i).re).sum()
    }

    /// Max-entry residual of the projector identity `E^2 = (Tr E / 2) E`
    /// satisfied by closed ensembles.
    pub fn e_projector_residual(&self) -> f64 {
        let lambda = self.trace_e() / 2.0;
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut s = C0;
                for k in 0..n {
                    s += self.e(i, k) * self.e(k, j);
                }
                worst = worst.max((s - lambda * self.e(i, j)).norm());
            }
        }
        worst
    }

    /// `sum_ij |F_ij|^2`, equal to `2 lambda^2` on closed ensembles.
    pub fn f_norm_sq(&self) -> f64 {
        self.f.iter().map(|v| v.norm_sqr()).sum()
    }

    /// `V_i . V_j` recovered from the Hermitian observables:
    /// `2|E_ij|^2 - V_i V_j`.
    pub fn vector_dot_from_e(&self, i: usize, j: usize) -> f64 {
        2.0 * self.e(i, j).norm_sqr() - self.e(i, i).re * self.e(j, j).re
    }

    /// `V_i . V_j` recovered from the holomorphic observables:
    /// `V_i V_j - 2|F_ij|^2`.
    pub fn vector_dot_from_f(&self, i: usize, j: usize) -> f64 {
        self.e(i, i).re * self.e(j, j).re - 2.0 * self.f(i, j).norm_sqr()
    }

    pub fn max_abs_f(&self) -> f64 {
        self.f.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Entrywise distance between the `F` matrices of two ensembles.
    pub fn f_distance(&self, other: &ObservableMatrices) -> f64 {
        self.f
            .iter()
            .zip(&other.f)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Worst normalized violation of the Plucker relations
/// `F_ij F_kl - F_ik F_jl + F_il F_jk = 0` over all index quadruples.
///
/// Normalized by `max|F|^2`; identically zero matrices report zero.
pub fn plucker_residual(obs: &ObservableMatrices) -> f64 {
    let n = obs.n;
    let scale = obs.max_abs_f().powi(2);
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                for l in (k + 1)..n {
                    let r = obs.f(i, j) * obs.f(k, l) - obs.f(i, k) * obs.f(j, l)
                        + obs.f(i, l) * obs.f(j, k);
                    worst = worst.max(r.norm());
                }
            }
        }
    }
    worst / scale
}

/// Recover the SL(2,C) transform mapping `w` onto `z` from equal `F`
/// matrices: `L = (|z_l>[w_k| - |z_k>[w_l|) / [w_k|w_l>` for the pivot pair
/// `(k,l)` with the largest `|F_kl|`.
pub fn match_by_f(z: &SpinorEnsemble, w: &SpinorEnsemble) -> Result<Sl2c> {
    if z.len() != w.len() {
        return Err(Error::Domain("ensembles differ in size".into()));
    }
    let fz = z.observables();
    let fw = w.observables();
    let scale = fz.max_abs_f().max(fw.max_abs_f());
    if scale == 0.0 {
        return Err(Error::RankDeficient);
    }
    let dist = fz.f_distance(&fw);
    if dist > tol::TOL_INVARIANT * scale {
        return Err(Error::FMismatch(dist));
    }
    // pivot on the largest |F_kl| of w for a stable division
    let n = w.len();
    let (mut bk, mut bl, mut best) = (0, 1, 0.0);
    for k in 0..n {
        for l in 0..n {
            let m = fw.f(k, l).norm();
            if m > best {
                best = m;
                bk = k;
                bl = l;
            }
        }
    }
    if best == 0.0 {
        return Err(Error::RankDeficient);
    }
    let pivot = w.spinors()[bk].fdot(&w.spinors()[bl]);
    let m1 = Mat2::ket_fbra(&z.spinors()[bl], &w.spinors()[bk]);
    let m2 = Mat2::ket_fbra(&z.spinors()[bk], &w.spinors()[bl]);
    let lam = Mat2::new(
        (m1.a - m2.a) / pivot,
        (m1.b - m2.b) / pivot,
        (m1.c - m2.c) / pivot,
        (m1.d - m2.d) / pivot,
    );
    let r = (lam.det() - C1).norm();
    if r > tol::TOL_RECOVER {
        return Err(Error::Domain(format!(
            "recovered matrix determinant off by {r:.3e}"
        )));
    }
    // normalize the tiny roundoff so downstream det checks stay exact-ish
    Sl2c::new(lam).or_else(|_| {
        let s = lam.det().sqrt();
        Sl2c::new(Mat2::new(lam.a / s, lam.b / s, lam.c / s, lam.d / s))
    })
}

/// SU(2) recovery for two closed ensembles with equal `F` matrices:
/// `g = (|z_k><w_k| + |z_k][w_k|) / sqrt(<w_k|w_k><z_k|z_k>)`.
///
/// Returns `(g, degenerate)`; a zero-area pair is matched by the identity
/// with the degenerate flag set, since any rotation works.
pub fn match_by_f_closed(z: &SpinorEnsemble, w: &SpinorEnsemble) -> Result<(Su2, bool)> {
    if z.len() != w.len() {
        return Err(Error::Domain("ensembles differ in size".into()));
    }
    let fz = z.observables();
    let fw = w.observables();
    let scale = fz.max_abs_f().max(fw.max_abs_f());
    let dist = fz.f_distance(&fw);
    if dist > tol::TOL_INVARIANT * scale.max(1e-300) {
        return Err(Error::FMismatch(dist));
    }
    if z.total_area() == 0.0 {
        return Ok((Su2::identity(), true));
    }
    // pivot on the spinor of largest norm
    let k = (0..w.len())
        .max_by(|&a, &b| {
            w.spinors()[a]
                .norm_sq()
                .partial_cmp(&w.spinors()[b].norm_sq())
                .unwrap()
        })
        .unwrap();
    let zk = &z.spinors()[k];
    let wk = &w.spinors()[k];
    let denom = (wk.norm_sq() * zk.norm_sq()).sqrt();
    if denom == 0.0 {
        return Err(Error::RankDeficient);
    }
    let m1 = Mat2::ket_bra(zk, wk);
    // |z_k][w_k| = |dual z_k> [ ... no: ket dual, bra dual row <.| of dual
    let zd = zk.dual();
    let wd = wk.dual();
    let m2 = Mat2::ket_bra(&zd, &wd);
    let g = Mat2::new(
        (m1.a + m2.a) / denom,
        (m1.b + m2.b) / denom,
        (m1.c + m2.c) / denom,
        (m1.d + m2.d) / denom,
    );
    let r = g.unitarity_residual().max((g.det() - C1).norm());
    if r > tol::TOL_RECOVER {
        return Err(Error::Domain(format!(
            "recovered rotation off unitarity by {r:.3e}"
        )));
    }
    Ok((Su2(g), false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn reference_is_closed_with_unit_observables() {
        let omega = SpinorEnsemble::reference(2).unwrap();
        let (cvec, area) = omega.closure_vector();
        assert!(cvec.norm() < 1e-15);
        assert_eq!(area, 2.0);
        let obs = omega.observables();
        assert_eq!(obs.e(0, 0), c(1.0, 0.0));
        assert_eq!(obs.e(0, 1), c(0.0, 0.0));
        assert_eq!(obs.f(0, 1), c(1.0, 0.0));
        assert_eq!(obs.f(1, 0), c(-1.0, 0.0));
        let frame = omega.reconstruct_frame().unwrap();
        assert!(frame.orthonormality_residual() < 1e-15);
        assert_eq!(frame.col0[0], c(1.0, 0.0));
        assert_eq!(frame.col1[1], c(1.0, 0.0));
    }

    #[test]
    fn parallel_spinors_closure() {
        let e = SpinorEnsemble::new(vec![
            Spinor::from_reals(1.0, 0.0, 0.0, 0.0),
            Spinor::from_reals(1.0, 0.0, 0.0, 0.0),
        ])
        .unwrap();
        let (cvec, area) = e.closure_vector();
        assert_eq!((cvec.x, cvec.y, cvec.z), (0.0, 0.0, 2.0));
        assert_eq!(area, 2.0);
    }

    #[test]
    fn close_three_spinor_fixture() {
        // 2 lambda = 3, |C| = 1 -> closed area sqrt(9 - 1)
        let e = SpinorEnsemble::new(vec![
            Spinor::from_reals(1.0, 0.0, 0.0, 0.0),
            Spinor::from_reals(1.0, 0.0, 0.0, 0.0),
            Spinor::from_reals(0.0, 0.0, 1.0, 0.0),
        ])
        .unwrap();
        let (closed, _) = e.close().unwrap();
        let target = 8.0f64.sqrt();
        assert!((closed.total_area() - target).abs() < 1e-10 * target);
        assert!(closed.is_closed(1e-12));
        let d = e.observables().f_distance(&closed.observables());
        assert!(d < 1e-10);
    }

    #[test]
    fn closing_closed_input_is_identity_up_to_su2() {
        let omega = SpinorEnsemble::reference(4).unwrap();
        let (closed, t) = omega.close().unwrap();
        assert!((closed.total_area() - omega.total_area()).abs() < 1e-12);
        // transform must be unitary (identity up to a left SU(2) factor)
        assert!(t.0.unitarity_residual() < 1e-10);
    }

    #[test]
    fn both_closing_routes_agree() {
        let mut rng = sampler::stream_rng(11, 0);
        let e = sampler::random_open_ensemble(6, &mut rng);
        let (c1, _) = e.close().unwrap();
        let (c2, _) = e.close_by_rescaling().unwrap();
        assert!(c1.is_closed(1e-12));
        assert!(c2.is_closed(1e-11));
        assert!((c1.total_area() - c2.total_area()).abs() < 1e-10 * c1.total_area());
        let d = c1.observables().f_distance(&c2.observables());
        assert!(d < 1e-10, "F residual {d}");
        // F is invariant against the *input* as well
        assert!(e.observables().f_distance(&c1.observables()) < 1e-10);
    }

    #[test]
    fn closing_handles_antiparallel_closure_vector() {
        // closure vector along -z exercises the antipodal rotation branch
        let e = SpinorEnsemble::new(vec![
            Spinor::from_reals(0.0, 0.0, 1.0, 0.0),
            Spinor::from_reals(0.0, 0.0, 1.2, 0.0),
            Spinor::from_reals(1.0, 0.0, 0.0, 0.0),
        ])
        .unwrap();
        let (c, _) = e.closure_vector();
        assert!(c.z < 0.0);
        for route in [e.close().unwrap().0, e.close_by_rescaling().unwrap().0] {
            assert!(route.is_closed(1e-11));
            assert!(e.observables().f_distance(&route.observables()) < 1e-10);
        }
    }

    #[test]
    fn closing_is_idempotent_up_to_su2() {
        let mut rng = sampler::stream_rng(13, 0);
        let closed = sampler::sample_polyhedron(5, 1.2, &mut rng).unwrap();
        let (again, t) = closed.close().unwrap();
        // the applied transform is unitary and F is untouched
        assert!(t.0.unitarity_residual() < 1e-10);
        let d = closed.observables().f_distance(&again.observables());
        assert!(d < 1e-10);
        assert!((again.total_area() - closed.total_area()).abs() < 1e-10);
    }

    #[test]
    fn rank_one_input_not_closable() {
        let e = SpinorEnsemble::new(vec![
            Spinor::from_reals(1.0, 0.0, 0.0, 0.0),
            Spinor::from_reals(2.0, 0.0, 0.0, 0.0),
        ])
        .unwrap();
        assert!(matches!(e.close(), Err(Error::NonClosable)));
    }

    #[test]
    fn unitary_action_preserves_area_and_closure() {
        let mut rng = sampler::stream_rng(3, 0);
        let e = sampler::sample_polyhedron(5, 1.3, &mut rng).unwrap();
        let u = sampler::sample_haar_unitary(5, &mut rng);
        let moved = e.apply_unitary(&u).unwrap();
        assert!((moved.total_area() - e.total_area()).abs() <= 1e-12 * e.total_area());
        assert!(moved.is_closed(1e-12));
        // permutations act by permuting spinors
        let p = crate::linalg::permutation_matrix(&[1, 2, 0, 4, 3]);
        let perm = e.apply_unitary(&p).unwrap();
        assert_eq!(perm.spinors()[1], e.spinors()[0]);
        assert!((perm.total_area() - e.total_area()).abs() <= 1e-12 * e.total_area());
        // identity leaves the ensemble untouched
        let id = e.apply_unitary(&CMatrix::identity(5)).unwrap();
        assert_eq!(id.spinors(), e.spinors());
    }

    #[test]
    fn closed_ensemble_identities() {
        let mut rng = sampler::stream_rng(7, 0);
        let e = sampler::sample_polyhedron(6, 2.0, &mut rng).unwrap();
        let obs = e.observables();
        let lambda = obs.trace_e() / 2.0;
        assert!(obs.e_projector_residual() <= 1e-10 * lambda * lambda);
        assert!((obs.f_norm_sq() - 2.0 * lambda * lambda).abs() <= 1e-10 * lambda * lambda);
        assert!(plucker_residual(&obs) <= 1e-12);
        // the two observable expressions for V_i . V_j agree, and match
        // the geometric dot products
        let vectors = e.vectors();
        for i in 0..6 {
            for j in 0..6 {
                let from_e = obs.vector_dot_from_e(i, j);
                let from_f = obs.vector_dot_from_f(i, j);
                assert!((from_e - from_f).abs() < 1e-10);
                assert!((from_e - vectors[i].0.dot(&vectors[j].0)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn plucker_detects_corruption() {
        let mut rng = sampler::stream_rng(19, 0);
        let e = sampler::sample_polyhedron(5, 1.0, &mut rng).unwrap();
        let mut obs = e.observables();
        assert!(plucker_residual(&obs) <= 1e-12);
        obs.f[1 * 5 + 2] += c(1.0, 0.0);
        obs.f[2 * 5 + 1] -= c(1.0, 0.0);
        assert!(plucker_residual(&obs) > 0.1);
        let zero = ObservableMatrices {
            n: 3,
            e: vec![C0; 9],
            f: vec![C0; 9],
        };
        assert_eq!(plucker_residual(&zero), 0.0);
    }

    #[test]
    fn match_by_f_identity_and_plant() {
        let mut rng = sampler::stream_rng(23, 0);
        let z = sampler::random_open_ensemble(5, &mut rng);
        let lam = match_by_f(&z, &z).unwrap();
        assert!((lam.0.a - c(1.0, 0.0)).norm() < 1e-8);
        assert!((lam.0.d - c(1.0, 0.0)).norm() < 1e-8);

        // plant a known SL(2,C) and recover it
        let planted = Sl2c::new(Mat2::new(c(1.2, 0.3), c(0.4, -0.2), c(0.1, 0.5), {
            // solve d so that det = 1
            let a = c(1.2, 0.3);
            let b = c(0.4, -0.2);
            let cc = c(0.1, 0.5);
            (c(1.0, 0.0) + b * cc) / a
        }))
        .unwrap();
        let w = z.clone();
        let z2 = w.apply_sl2c(&planted);
        let rec = match_by_f(&z2, &w).unwrap();
        for (got, want) in [
            (rec.0.a, planted.0.a),
            (rec.0.b, planted.0.b),
            (rec.0.c, planted.0.c),
            (rec.0.d, planted.0.d),
        ] {
            assert!((got - want).norm() < 1e-8);
        }
        for (zi, wi) in z2.spinors().iter().zip(w.spinors()) {
            let mapped = rec.0.apply(wi);
            assert!((mapped.z0 - zi.z0).norm() < 1e-8);
            assert!((mapped.z1 - zi.z1).norm() < 1e-8);
        }
    }

    #[test]
    fn match_by_f_rejects_mismatch_and_zero() {
        let mut rng = sampler::stream_rng(29, 0);
        let z = sampler::random_open_ensemble(4, &mut rng);
        let w = sampler::random_open_ensemble(4, &mut rng);
        assert!(matches!(match_by_f(&z, &w), Err(Error::FMismatch(_))));
        let zeros = SpinorEnsemble::new(vec![Spinor::zero(), Spinor::zero()]).unwrap();
        assert!(matches!(
            match_by_f(&zeros, &zeros),
            Err(Error::RankDeficient)
        ));
    }

    #[test]
    fn closed_match_recovers_su2() {
        let mut rng = sampler::stream_rng(31, 0);
        let w = sampler::sample_polyhedron(5, 1.7, &mut rng).unwrap();
        let g0 = Su2::from_axis_angle(&Vec3::new(0.3, -0.4, 0.85), 1.1);
        let z = w.apply_su2(&g0);
        let (g, degenerate) = match_by_f_closed(&z, &w).unwrap();
        assert!(!degenerate);
        // recovery is up to a global sign
        let same = (g.0.a - g0.0.a).norm() < 1e-8 && (g.0.b - g0.0.b).norm() < 1e-8;
        let flipped = (g.0.a + g0.0.a).norm() < 1e-8 && (g.0.b + g0.0.b).norm() < 1e-8;
        assert!(same || flipped);
        for (zi, wi) in z.spinors().iter().zip(w.spinors()) {
            let mapped = g.0.apply(wi);
            assert!((mapped.z0 - zi.z0).norm() < 1e-8);
            assert!((mapped.z1 - zi.z1).norm() < 1e-8);
        }
        // E matrices agree as a consequence
        let ez = z.observables();
        let ew = w.observables();
        let mut worst = 0.0f64;
        for k in 0..ez.e.len() {
            worst = worst.max((ez.e[k] - ew.e[k]).norm());
        }
        assert!(worst < 1e-10);
        // w = z gives the identity
        let (gid, _) = match_by_f_closed(&w, &w).unwrap();
        let near_id = (gid.0.a - c(1.0, 0.0)).norm() < 1e-8 && gid.0.b.norm() < 1e-8;
        let near_neg = (gid.0.a + c(1.0, 0.0)).norm() < 1e-8 && gid.0.b.norm() < 1e-8;
        assert!(near_id || near_neg);
    }

    #[test]
    fn cross_ratio_chart_and_f_form_agree() {
        let zeta = [c(0.0, 0.0), c(2.0, 0.0), c(1.0, 0.0), c(3.0, 0.0)];
        let spinors = zeta
            .iter()
            .map(|&t| Spinor::new(c(1.0, 0.0), t))
            .collect::<Vec<_>>();
        let e = SpinorEnsemble::new(spinors).unwrap();
        let zs = e.cross_ratios().unwrap();
        assert_eq!(zs.len(), 1);
        assert!((zs[0] - c(-3.0, 0.0)).norm() < 1e-12);
        let zf = e.cross_ratios_from_f().unwrap();
        assert!((zs[0] - zf[0]).norm() < 1e-10);

        // after a global SU(2) the chart moves, but the two formulas still
        // agree on the transformed ensemble
        let g = Su2::from_axis_angle(&Vec3::new(1.0, 2.0, -0.5), 0.9);
        let rotated = e.apply_su2(&g);
        let chart = rotated.cross_ratios().unwrap();
        let via_f = rotated.cross_ratios_from_f().unwrap();
        assert!((chart[0] - via_f[0]).norm() < 1e-8);

        let n3 = SpinorEnsemble::reference(3).unwrap();
        assert!(n3.cross_ratios().unwrap().is_empty());
    }

    #[test]
    fn cross_ratio_chart_singularity() {
        let e = SpinorEnsemble::reference(4).unwrap(); // z_2 = (0,1) breaks the chart
        assert!(matches!(e.cross_ratios(), Err(Error::ChartSingularity)));
    }

    #[test]
    fn frame_roundtrips_through_sampler() {
        let mut rng = sampler::stream_rng(5, 2);
        let e = sampler::sample_polyhedron(7, 0.8, &mut rng).unwrap();
        let frame = e.reconstruct_frame().unwrap();
        assert!(frame.orthonormality_residual() <= 1e-12);
        let back = frame.to_ensemble().unwrap();
        for (a, b) in back.spinors().iter().zip(e.spinors()) {
            assert!((a.z0 - b.z0).norm() < 1e-14);
            assert!((a.z1 - b.z1).norm() < 1e-14);
        }
    }

    #[test]
    fn json_roundtrip_is_bit_exact() {
        let mut rng = sampler::stream_rng(41, 1);
        let e = sampler::sample_polyhedron(4, 1.0 / 3.0, &mut rng).unwrap();
        let text = e.to_json();
        let back = SpinorEnsemble::from_json(&text).unwrap();
        for (a, b) in back.spinors().iter().zip(e.spinors()) {
            assert_eq!(a.z0.re.to_bits(), b.z0.re.to_bits());
            assert_eq!(a.z0.im.to_bits(), b.z0.im.to_bits());
            assert_eq!(a.z1.re.to_bits(), b.z1.re.to_bits());
            assert_eq!(a.z1.im.to_bits(), b.z1.im.to_bits());
        }
    }

    #[test]
    fn su2_rotation_convention() {
        // rotating the north pole onto +x must transport the vector with it
        let from = Vec3::new(0.0, 0.0, 1.0);
        let to = Vec3::new(1.0, 0.0, 0.0);
        let g = Su2::rotation_between(&from, &to).unwrap();
        let z = Spinor::from_reals(1.0, 0.0, 0.0, 0.0);
        let (v, _) = spinor_to_vector(&g.0.apply(&z));
        assert!((v.x - 1.0).abs() < 1e-12 && v.y.abs() < 1e-12 && v.z.abs() < 1e-12);
    }
}
