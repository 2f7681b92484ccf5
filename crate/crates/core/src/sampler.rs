//! Deterministic Haar sampling.
//!
//! The polyhedron sampler draws the first two columns of a Haar-random
//! unitary matrix through the recursive angle parametrization, whose
//! marginals have closed-form inverse CDFs, so every draw is closed to
//! machine precision by construction. A Ginibre-pair sampler provides an
//! independent route to the same distribution, and full Haar unitaries
//! back the Weingarten and Itzykson-Zuber Monte Carlo oracles.
//!
//! Every sampler is a pure function of a [`rand_chacha::ChaCha8Rng`];
//! use [`stream_rng`] to derive the `(seed, stream)` generators that make
//! parallel runs reproducible.

use crate::ensemble::UnitaryFrame;
use crate::linalg::CMatrix;
use crate::spinor::{Spinor, Vec3};
use crate::{Error, Result, SpinorEnsemble};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

/// The generator for a given `(seed, stream)` pair. Streams never overlap,
/// so one stream per Monte Carlo batch gives worker-count-independent runs.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// The angles of the recursive two-column parametrization of U(N):
/// `theta_1..theta_N`, `phi_2..phi_N` in `[0, 2pi)` and
/// `alpha_2..alpha_N`, `beta_3..beta_N` in `[0, pi/2]` (4N-4 in total).
#[derive(Debug, Clone)]
pub struct AngleCoordinates {
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl AngleCoordinates {
    pub fn n(&self) -> usize {
        self.theta.len()
    }

    /// Haar-distributed angles: phases uniform, `alpha_k` with density
    /// `sin(a) cos^(2k-3)(a)` and `beta_k` with density `sin(b) cos^(2k-5)(b)`,
    /// both drawn by inverse CDF.
    pub fn sample(n: usize, rng: &mut ChaCha8Rng) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFew { need: 2, got: n });
        }
        let tau = 2.0 * std::f64::consts::PI;
        let theta: Vec<f64> = (0..n).map(|_| tau * rng.gen::<f64>()).collect();
        let phi: Vec<f64> = (0..n - 1).map(|_| tau * rng.gen::<f64>()).collect();
        let alpha: Vec<f64> = (2..=n).map(|k| alpha_inverse_cdf(k, rng.gen())).collect();
        let beta: Vec<f64> = (3..=n).map(|k| beta_inverse_cdf(k, rng.gen())).collect();
        Ok(AngleCoordinates {
            theta,
            phi,
            alpha,
            beta,
        })
    }
}

/// Inverse CDF of `sin(a) cos^(2k-3)(a)` on `[0, pi/2]`: the CDF is
/// `1 - cos^(2k-2)(a)`.
pub fn alpha_inverse_cdf(k: usize, u: f64) -> f64 {
    (1.0 - u).powf(1.0 / (2 * k - 2) as f64).clamp(-1.0, 1.0).acos()
}

/// Inverse CDF of `sin(b) cos^(2k-5)(b)`: the CDF is `1 - cos^(2k-4)(b)`.
pub fn beta_inverse_cdf(k: usize, u: f64) -> f64 {
    (1.0 - u).powf(1.0 / (2 * k - 4) as f64).clamp(-1.0, 1.0).acos()
}

/// Build the two orthonormal unitary columns from the angles, as a frame
/// of unit scale.
///
/// Base case N=2:
/// `v = (e^(i th1) cos a2, e^(i th2) sin a2)`,
/// `w = e^(i phi2) (-e^(i th1) sin a2, e^(i th2) cos a2)`;
/// each further index appends one component to `v` and mixes `w` with `v`.
pub fn angles_to_columns(a: &AngleCoordinates) -> UnitaryFrame {
    let (col0, col1) = angle_recursion(a);
    UnitaryFrame {
        col0,
        col1,
        lambda: 1.0,
    }
}

fn angle_recursion(a: &AngleCoordinates) -> (Vec<Complex64>, Vec<Complex64>) {
    let n = a.n();
    assert!(n >= 2, "need at least two faces");
    let mut v = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    let e = |t: f64| Complex64::from_polar(1.0, t);
    let (s2, c2) = a.alpha[0].sin_cos();
    v.push(e(a.theta[0]) * c2);
    v.push(e(a.theta[1]) * s2);
    w.push(e(a.phi[0]) * -e(a.theta[0]) * s2);
    w.push(e(a.phi[0]) * e(a.theta[1]) * c2);
    for k in 3..=n {
        let (sa, ca) = a.alpha[k - 2].sin_cos();
        let (sb, cb) = a.beta[k - 3].sin_cos();
        let ephi = e(a.phi[k - 2]);
        let etheta = e(a.theta[k - 1]);
        for i in 0..k - 1 {
            w[i] = cb * w[i] - ephi * sa * sb * v[i];
        }
        w.push(ephi * etheta * ca * sb);
        for vi in v.iter_mut().take(k - 1) {
            *vi *= ca;
        }
        v.push(etheta * sa);
    }
    (v, w)
}

/// A Haar-uniform framed polyhedron with `N` faces and total area `2 lambda`.
///
/// `z_k = sqrt(lambda) (v_k, w_k)` for the recursively sampled columns, so
/// the closure constraint holds to machine precision on every draw.
pub fn sample_polyhedron(n: usize, lambda: f64, rng: &mut ChaCha8Rng) -> Result<SpinorEnsemble> {
    if lambda <= 0.0 {
        return Err(Error::Domain("lambda must be positive".into()));
    }
    let a = AngleCoordinates::sample(n, rng)?;
    let mut frame = angles_to_columns(&a);
    frame.lambda = lambda;
    frame.to_ensemble()
}

fn gaussian_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Independent oracle for [`sample_polyhedron`]: orthonormalize a pair of
/// complex Ginibre vectors. Gram-Schmidt keeps the triangular factor's
/// diagonal real positive, which is exactly the Haar-fixing convention.
pub fn sample_gaussian_closed(
    n: usize,
    lambda: f64,
    rng: &mut ChaCha8Rng,
) -> Result<SpinorEnsemble> {
    if n < 2 {
        return Err(Error::TooFew { need: 2, got: n });
    }
    if lambda <= 0.0 {
        return Err(Error::Domain("lambda must be positive".into()));
    }
    let mut v: Vec<Complex64> = (0..n).map(|_| gaussian_complex(rng)).collect();
    let mut w: Vec<Complex64> = (0..n).map(|_| gaussian_complex(rng)).collect();
    normalize(&mut v);
    project_out(&v, &mut w);
    normalize(&mut w);
    // second pass scrubs the O(eps * condition) Gram-Schmidt residue
    project_out(&v, &mut w);
    normalize(&mut w);
    let s = lambda.sqrt();
    SpinorEnsemble::new(
        v.iter()
            .zip(&w)
            .map(|(vi, wi)| Spinor::new(s * vi, s * wi))
            .collect(),
    )
}

fn normalize(v: &mut [Complex64]) {
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= norm;
    }
}

fn project_out(v: &[Complex64], w: &mut [Complex64]) {
    let overlap: Complex64 = v.iter().zip(w.iter()).map(|(a, b)| a.conj() * b).sum();
    for (wi, vi) in w.iter_mut().zip(v) {
        *wi -= overlap * vi;
    }
}

/// A Haar-distributed N x N unitary: complex Ginibre matrix followed by
/// modified Gram-Schmidt (run twice), which plays the role of QR with the
/// R-diagonal phase correction built in.
pub fn sample_haar_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|_| (0..n).map(|_| gaussian_complex(rng)).collect())
        .collect();
    for _pass in 0..2 {
        for j in 0..n {
            let (head, tail) = cols.split_at_mut(j);
            let col = &mut tail[0];
            for prev in head.iter() {
                project_out(prev, col);
            }
            normalize(col);
        }
    }
    let mut m = CMatrix::zeros(n);
    for (j, col) in cols.iter().enumerate() {
        for (i, &x) in col.iter().enumerate() {
            m.set(i, j, x);
        }
    }
    m
}

/// The closure-free ensemble: norms are Dirichlet(2,..,2) scaled to total
/// `2 lambda`, directions i.i.d. uniform on the sphere.
pub fn sample_free_ensemble(n: usize, lambda: f64, rng: &mut ChaCha8Rng) -> Result<Vec<Vec3>> {
    if n < 1 {
        return Err(Error::TooFew { need: 1, got: n });
    }
    if lambda <= 0.0 {
        return Err(Error::Domain("lambda must be positive".into()));
    }
    let gamma = Gamma::new(2.0, 1.0).expect("valid shape");
    let mut norms: Vec<f64> = (0..n).map(|_| gamma.sample(rng)).collect();
    let total: f64 = norms.iter().sum();
    let scale = 2.0 * lambda / total;
    for v in norms.iter_mut() {
        *v *= scale;
    }
    Ok(norms
        .into_iter()
        .map(|v| {
            let z = 2.0 * rng.gen::<f64>() - 1.0;
            let phi = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
            let r = (1.0 - z * z).max(0.0).sqrt();
            Vec3::new(v * r * phi.cos(), v * r * phi.sin(), v * z)
        })
        .collect())
}

/// Unconstrained complex-Gaussian spinors (a generic open configuration);
/// used by closing tests and by the coherent-state Monte Carlo.
pub fn random_open_ensemble(n: usize, rng: &mut ChaCha8Rng) -> SpinorEnsemble {
    SpinorEnsemble::new(
        (0..n)
            .map(|_| Spinor::new(gaussian_complex(rng), gaussian_complex(rng)))
            .collect(),
    )
    .expect("n >= 2")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_case_angles() {
        let a = AngleCoordinates {
            theta: vec![0.0, 0.0],
            phi: vec![0.0],
            alpha: vec![0.0],
            beta: vec![],
        };
        let f = angles_to_columns(&a);
        assert!((f.col0[0].re - 1.0).abs() < 1e-15 && f.col0[1].norm() < 1e-15);
        assert!((f.col1[1].re - 1.0).abs() < 1e-15 && f.col1[0].norm() < 1e-15);

        let a = AngleCoordinates {
            theta: vec![0.0, 0.0],
            phi: vec![0.0],
            alpha: vec![std::f64::consts::FRAC_PI_2],
            beta: vec![],
        };
        let f = angles_to_columns(&a);
        assert!(f.col0[0].norm() < 1e-15 && (f.col0[1].re - 1.0).abs() < 1e-15);
        assert!((f.col1[0].re + 1.0).abs() < 1e-15 && f.col1[1].norm() < 1e-15);
    }

    #[test]
    fn columns_orthonormal_at_random_angles() {
        let mut rng = stream_rng(1, 0);
        for _ in 0..50 {
            let a = AngleCoordinates::sample(7, &mut rng).unwrap();
            let frame = angles_to_columns(&a);
            assert!(frame.orthonormality_residual() <= 1e-12);
        }
    }

    #[test]
    fn every_draw_is_closed() {
        let mut rng = stream_rng(2, 0);
        for n in [2usize, 3, 5, 16] {
            let e = sample_polyhedron(n, 1.5, &mut rng).unwrap();
            assert!(e.is_closed(1e-12));
            assert!((e.total_area() - 3.0).abs() <= 1e-12 * 3.0);
            let g = sample_gaussian_closed(n, 1.5, &mut rng).unwrap();
            assert!(g.is_closed(1e-12));
        }
        assert!(sample_polyhedron(1, 1.0, &mut rng).is_err());
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = stream_rng(3, 1);
        for n in [1usize, 2, 5, 9] {
            let u = sample_haar_unitary(n, &mut rng);
            assert!(u.unitarity_residual() <= 1e-12, "n={n}");
        }
    }

    #[test]
    fn determinism_per_stream() {
        let mut a = stream_rng(9, 4);
        let mut b = stream_rng(9, 4);
        let ea = sample_polyhedron(6, 2.0, &mut a).unwrap();
        let eb = sample_polyhedron(6, 2.0, &mut b).unwrap();
        assert_eq!(ea.spinors(), eb.spinors());
        let mut c = stream_rng(9, 5);
        let ec = sample_polyhedron(6, 2.0, &mut c).unwrap();
        assert_ne!(ea.spinors(), ec.spinors());
    }

    #[test]
    fn free_ensemble_totals() {
        let mut rng = stream_rng(4, 0);
        let vs = sample_free_ensemble(8, 1.25, &mut rng).unwrap();
        let total: f64 = vs.iter().map(|v| v.norm()).sum();
        assert!((total - 2.5).abs() < 1e-12);
    }

    #[test]
    fn haar_unitary_entry_moments() {
        // E[|U11|^2] = 1/N, E[|U11|^4] = 2/(N(N+1)), E[|Tr U|^2] = 1
        let n = 4usize;
        let samples = 100_000usize;
        let mut rng = stream_rng(6, 0);
        let (mut m2, mut m4, mut tr2) = (0.0f64, 0.0f64, 0.0f64);
        let (mut s2, mut s4, mut str2) = (0.0f64, 0.0f64, 0.0f64);
        for _ in 0..samples {
            let u = sample_haar_unitary(n, &mut rng);
            let a = u.at(0, 0).norm_sqr();
            let t: Complex64 = (0..n).map(|i| u.at(i, i)).sum();
            let tn = t.norm_sqr();
            m2 += a;
            m4 += a * a;
            tr2 += tn;
            s2 += a * a;
            s4 += a * a * a * a;
            str2 += tn * tn;
        }
        let fs = samples as f64;
        let check = |mean_acc: f64, sq_acc: f64, exact: f64| {
            let mean = mean_acc / fs;
            let var = (sq_acc / fs - mean * mean).max(0.0);
            let se = (var / fs).sqrt();
            assert!(
                (mean - exact).abs() <= 3.0 * se,
                "mean {mean} vs {exact} (se {se})"
            );
        };
        check(m2, s2, 1.0 / n as f64);
        check(m4, s4, 2.0 / (n as f64 * (n as f64 + 1.0)));
        check(tr2, str2, 1.0);
        // N=2: |U11|^2 is uniform on [0,1], so E[|U11|^4] = 1/3
        let mut rng = stream_rng(6, 1);
        let (mut m, mut s) = (0.0, 0.0);
        for _ in 0..samples {
            let u = sample_haar_unitary(2, &mut rng);
            let a = u.at(0, 0).norm_sqr();
            m += a * a;
            s += a * a * a * a;
        }
        check(m, s, 1.0 / 3.0);
    }

    #[test]
    fn left_invariance_of_traces() {
        // statistics of Tr(U0 U) match statistics of Tr(U)
        let n = 4usize;
        let draws = 100_000usize;
        let mut rng = stream_rng(14, 0);
        let u0 = sample_haar_unitary(n, &mut rng);
        let mut plain: Vec<f64> = Vec::with_capacity(draws);
        let mut shifted: Vec<f64> = Vec::with_capacity(draws);
        for _ in 0..draws {
            let u = sample_haar_unitary(n, &mut rng);
            let t: Complex64 = (0..n).map(|i| u.at(i, i)).sum();
            plain.push(t.re);
            let m = u0.mul(&u);
            let t0: Complex64 = (0..n).map(|i| m.at(i, i)).sum();
            shifted.push(t0.re);
        }
        let d = crate::mc::ks_two_sample(&mut plain, &mut shifted);
        let crit = crate::mc::ks_critical(0.01, draws as f64 / 2.0);
        assert!(d < crit, "KS {d} vs {crit}");
    }

    #[test]
    fn two_polyhedron_samplers_agree() {
        // the angle recursion and the Ginibre-pair route draw from the
        // same ensemble: first-face area and area pair within combined
        // three standard errors
        let n = 8usize;
        let lambda = 1.0;
        let draws = 100_000usize;
        let mut rng = stream_rng(15, 0);
        let mut acc = [[0.0f64; 2]; 2]; // route x {V0, V0*V1}
        let mut sq = [[0.0f64; 2]; 2];
        for _ in 0..draws {
            for (route, e) in [
                sample_polyhedron(n, lambda, &mut rng).unwrap(),
                sample_gaussian_closed(n, lambda, &mut rng).unwrap(),
            ]
            .iter()
            .enumerate()
            {
                let v0 = e.spinors()[0].norm_sq();
                let v1 = e.spinors()[1].norm_sq();
                acc[route][0] += v0;
                acc[route][1] += v0 * v1;
                sq[route][0] += v0 * v0;
                sq[route][1] += v0 * v1 * v0 * v1;
            }
        }
        let fs = draws as f64;
        for stat in 0..2 {
            let (ma, mb) = (acc[0][stat] / fs, acc[1][stat] / fs);
            let va = (sq[0][stat] / fs - ma * ma).max(0.0) / fs;
            let vb = (sq[1][stat] / fs - mb * mb).max(0.0) / fs;
            let se = (va + vb).sqrt();
            assert!((ma - mb).abs() <= 3.0 * se, "stat {stat}: {ma} vs {mb}");
        }
    }

    #[test]
    fn alpha_marginal_matches_inverse_cdf() {
        // chi-square against the k=3 density sin(a) cos^3(a), 20 equal bins
        let mut rng = stream_rng(5, 0);
        let n = 100_000usize;
        let bins = 20usize;
        let mut counts = vec![0usize; bins];
        for _ in 0..n {
            let a = alpha_inverse_cdf(3, rng.gen());
            // CDF value is uniform by construction; bin it through the CDF
            let u = 1.0 - a.cos().powi(4);
            counts[((u * bins as f64) as usize).min(bins - 1)] += 1;
        }
        let expected = n as f64 / bins as f64;
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        // 1% critical value for 19 degrees of freedom
        assert!(chi2 < 36.191, "chi2 = {chi2}");
    }

    #[test]
    fn marginal_ks_tests() {
        // alpha_3 against CDF 1 - cos^4, beta_4 against 1 - cos^4
        let mut rng = stream_rng(16, 0);
        let draws = 100_000usize;
        let mut alphas: Vec<f64> = (0..draws).map(|_| alpha_inverse_cdf(3, rng.gen())).collect();
        let d = crate::mc::ks_statistic(&mut alphas, |a| 1.0 - a.cos().powi(4));
        assert!(d < crate::mc::ks_critical(0.01, draws as f64), "alpha KS {d}");
        let mut betas: Vec<f64> = (0..draws).map(|_| beta_inverse_cdf(4, rng.gen())).collect();
        let d = crate::mc::ks_statistic(&mut betas, |b| 1.0 - b.cos().powi(4));
        assert!(d < crate::mc::ks_critical(0.01, draws as f64), "beta KS {d}");
    }

    #[test]
    fn mean_face_area_matches_isotropy() {
        // <V_i> = 2 lambda / N = 0.2 at N = 10, lambda = 1
        let draws = 100_000usize;
        let mut rng = stream_rng(17, 0);
        let (mut acc, mut sq) = (0.0f64, 0.0f64);
        for _ in 0..draws {
            let e = sample_polyhedron(10, 1.0, &mut rng).unwrap();
            let v = e.spinors()[0].norm_sq();
            acc += v;
            sq += v * v;
        }
        let mean = acc / draws as f64;
        let se = ((sq / draws as f64 - mean * mean) / draws as f64).sqrt();
        assert!((mean - 0.2).abs() <= 3.0 * se);
    }
}
