//! The Itzykson-Zuber integral and its use as a generating function.
//!
//! For diagonal `X`, `Y` with distinct eigenvalues,
//! `int dU exp(i theta Tr(Y U^dag X U))` is a ratio of the determinant
//! `det(exp(i theta x_j y_k))` to the two Vandermonde determinants, times
//! `(i theta)^(-N(N-1)/2)` and the superfactorial `prod_{k<N} k!` that
//! normalizes the Haar measure (the constant is fixed by the theta -> 0
//! limit being 1, and checked here against Monte Carlo).
//!
//! The polyhedron ensemble corresponds to the projector spectrum
//! `Y = diag(1,1,0,..,0)`, a doubly degenerate limit of the determinant
//! formula. That limit is evaluated in closed form by replacing the
//! degenerate columns with derivative columns, and is cross-checked against
//! an epsilon-extrapolation of the generic formula and against Monte Carlo.

use crate::linalg::determinant;
use crate::mc::{BatchEstimate, McConfig};
use crate::quantum::{complete_homogeneous, schur_eval};
use crate::sampler::sample_haar_unitary;
use crate::weingarten::{factorial, partitions, schur_dimension, sn_dimension, Rational};
use crate::{Error, Result};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;

/// Two real spectra and the coupling constant of the IZ exponent.
#[derive(Debug, Clone)]
pub struct SpectralPair {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub theta: f64,
}

impl SpectralPair {
    pub fn new(x: Vec<f64>, y: Vec<f64>, theta: f64) -> Result<Self> {
        if x.len() != y.len() || x.is_empty() {
            return Err(Error::Domain(
                "spectra must be nonempty and equal in length".into(),
            ));
        }
        Ok(SpectralPair { x, y, theta })
    }

    fn scale(&self) -> f64 {
        self.x
            .iter()
            .chain(&self.y)
            .fold(0.0f64, |a, &v| a.max(v.abs()))
            .max(1e-300)
    }

    fn min_gap(values: &[f64]) -> f64 {
        let mut gap = f64::INFINITY;
        for i in 0..values.len() {
            for j in (i + 1)..values.len() {
                gap = gap.min((values[i] - values[j]).abs());
            }
        }
        gap
    }
}

/// Log-magnitude and sign of a Vandermonde product `prod_{i<j}(v_j - v_i)`,
/// kept factored to delay underflow at larger N.
fn vandermonde_log(values: &[f64]) -> (f64, f64) {
    let mut log_mag = 0.0f64;
    let mut sign = 1.0f64;
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            let d = values[j] - values[i];
            log_mag += d.abs().ln();
            sign *= d.signum();
        }
    }
    (log_mag, sign)
}

fn superfactorial_ln(n: usize) -> f64 {
    (1..n)
        .map(|k| factorial(k as u32).to_f64().unwrap().ln())
        .sum()
}

/// The determinant form of the IZ integral. Requires both spectra to have
/// pairwise gaps above `1e-10` of the overall scale; degenerate spectra
/// belong to [`iz_degenerate_y`].
pub fn iz_determinant(p: &SpectralPair) -> Result<Complex64> {
    let n = p.x.len();
    let scale = p.scale();
    if SpectralPair::min_gap(&p.x) < 1e-10 * scale || SpectralPair::min_gap(&p.y) < 1e-10 * scale
    {
        return Err(Error::DegenerateSpectrum(1e-10 * scale));
    }
    if n == 1 {
        return Ok(Complex64::from_polar(1.0, p.theta * p.x[0] * p.y[0]));
    }
    // small couplings hit catastrophic cancellation in the determinant;
    // switch to the convergent character series there
    if p.theta.abs() * scale * scale < 0.2 {
        return Ok(iz_series(&p.x, &p.y, p.theta, n));
    }
    let rows: Vec<Vec<Complex64>> = p
        .x
        .iter()
        .map(|&xj| {
            p.y.iter()
                .map(|&yk| Complex64::from_polar(1.0, p.theta * xj * yk))
                .collect()
        })
        .collect();
    let det = determinant(rows);
    let (lvx, sx) = vandermonde_log(&p.x);
    let (lvy, sy) = vandermonde_log(&p.y);
    let pairs = (n * (n - 1) / 2) as i32;
    let it = Complex64::new(0.0, p.theta);
    let log_mag = -(pairs as f64) * it.norm().ln() - lvx - lvy + superfactorial_ln(n);
    let correction = Complex64::from_polar(log_mag.exp() * sx * sy, it.arg() * (-pairs as f64));
    Ok(det * correction)
}

/// Convergent expansion
/// `sum_k (i theta)^k / k! sum_{lambda |- k} f^lambda s_lambda(x)
/// s_lambda(y) / s_{lambda,N}(1)`, used where the determinant cancels.
fn iz_series(x: &[f64], y: &[f64], theta: f64, big_n: usize) -> Complex64 {
    let kmax = 20u32;
    let cx: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let cy: Vec<Complex64> = y.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let hx = complete_homogeneous(&cx, 2 * kmax as usize);
    let hy = complete_homogeneous(&cy, 2 * kmax as usize);
    let mut acc = Complex64::new(1.0, 0.0);
    let mut it_pow = Complex64::new(1.0, 0.0);
    let it = Complex64::new(0.0, theta);
    for k in 1..=kmax {
        it_pow *= it;
        let mut level = 0.0f64;
        for lam in partitions(k) {
            if lam.rows() > big_n {
                continue;
            }
            let dim_un = schur_dimension(&lam, big_n as u32).to_f64().unwrap();
            let f_dim = sn_dimension(&lam).to_f64().unwrap();
            let sx = schur_eval(lam.parts(), &hx).re;
            let sy = schur_eval(lam.parts(), &hy).re;
            level += f_dim * sx * sy / dim_un;
        }
        let term = it_pow * (level / factorial(k).to_f64().unwrap());
        acc += term;
        if term.norm() < 1e-18 * acc.norm() {
            break;
        }
    }
    acc
}

/// Monte Carlo oracle: the Haar mean of `exp(i theta Tr(Y U^dag X U))`,
/// with batch-means standard errors per component.
pub fn iz_mc(p: &SpectralPair, cfg: &McConfig) -> (Complex64, (f64, f64)) {
    let n = p.x.len();
    let accs = crate::mc::run_batches(
        cfg,
        || (0.0f64, 0.0f64, 0u64),
        |rng, count, acc| {
            for _ in 0..count {
                let u = sample_haar_unitary(n, rng);
                let mut tr = 0.0;
                for k in 0..n {
                    if p.x[k] == 0.0 {
                        continue;
                    }
                    for j in 0..n {
                        if p.y[j] == 0.0 {
                            continue;
                        }
                        tr += p.y[j] * p.x[k] * u.at(k, j).norm_sqr();
                    }
                }
                let v = Complex64::from_polar(1.0, p.theta * tr);
                acc.0 += v.re;
                acc.1 += v.im;
                acc.2 += 1;
            }
        },
    );
    let res: Vec<f64> = accs.iter().map(|a| a.0).collect();
    let ims: Vec<f64> = accs.iter().map(|a| a.1).collect();
    let counts: Vec<u64> = accs.iter().map(|a| a.2).collect();
    let re = BatchEstimate::from_batch_sums(&res, &counts);
    let im = BatchEstimate::from_batch_sums(&ims, &counts);
    (Complex64::new(re.mean, im.mean), (re.stderr, im.stderr))
}

/// Exact coefficient of `(i theta lambda)^n` in the face-area generating
/// function: `(n+1) (N-1)! / (n+N-1)!`. Multiplying by `n!` recovers the
/// closed moment `<V^n>/lambda^n` as a rational identity.
pub fn area_series_coeff(n_faces: usize, power: u32) -> Result<Rational> {
    if n_faces < 2 {
        return Err(Error::TooFew {
            need: 2,
            got: n_faces,
        });
    }
    let nn = n_faces as u32;
    Ok(Rational::from_integer(BigInt::from(power + 1))
        * Rational::new(
            BigInt::from(factorial(nn - 1)),
            BigInt::from(factorial(nn + power - 1)),
        ))
}

/// Partial sum of `<exp(i theta V_i)> = 1 + sum_n (N-1)!/(n+N-1)! (n+1)
/// (i theta lambda)^n`.
pub fn area_generating_series(
    n_faces: usize,
    lambda: f64,
    theta: f64,
    n_max: u32,
) -> Result<Complex64> {
    let mut acc = Complex64::new(1.0, 0.0);
    let base = Complex64::new(0.0, theta * lambda);
    let mut power = Complex64::new(1.0, 0.0);
    for n in 1..=n_max {
        power *= base;
        let c = area_series_coeff(n_faces, n)?;
        acc += power * (c.numer().to_f64().unwrap() / c.denom().to_f64().unwrap());
    }
    Ok(acc)
}

/// The IZ integral against the projector spectrum `Y = diag(1,1,0,..,0)`,
/// by the closed-form limit of the determinant formula.
///
/// Collapsing `y -> (1,1,0,..,0)` replaces the two `y = 1` columns with
/// `exp(i theta x)` and its derivative column, and the `N-2` zero columns
/// with the monomials `1, x, .., x^(N-3)`; the prefactor collapses to
/// `(N-1)!(N-2)! (i theta)^(4-2N)`. The published permutation-sum form of
/// this limit disagrees with the epsilon-extrapolated determinant (its
/// monomial exponents and theta power do not match under any constant
/// rescaling); it is kept as [`iz_degenerate_y_printed`] for the record.
pub fn iz_degenerate_y(x: &[f64], theta: f64) -> Result<Complex64> {
    let n = degenerate_domain(x)?;
    if theta == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let rows: Vec<Vec<Complex64>> = x
        .iter()
        .map(|&xj| {
            let e = Complex64::from_polar(1.0, theta * xj);
            let mut row = Vec::with_capacity(n);
            row.push(e);
            row.push(xj * e);
            let mut mono = Complex64::new(1.0, 0.0);
            for _ in 0..n - 2 {
                row.push(mono);
                mono *= xj;
            }
            row
        })
        .collect();
    let det = determinant(rows);
    let (lvx, sx) = vandermonde_log(x);
    let it = Complex64::new(0.0, theta);
    let power = 4i32 - 2 * n as i32;
    let it_factor =
        Complex64::from_polar((power as f64 * it.norm().ln()).exp(), power as f64 * it.arg());
    let fact = (factorial(n as u32 - 1) * factorial(n as u32 - 2))
        .to_f64()
        .unwrap();
    Ok(det * it_factor * ((-lvx).exp() * sx * fact))
}

/// The literal published permutation-sum display for the degenerate-Y
/// limit, under the same global normalization as [`iz_degenerate_y`].
/// Kept for the mismatch report; do not use for numerics.
pub fn iz_degenerate_y_printed(x: &[f64], theta: f64) -> Result<Complex64> {
    let n = degenerate_domain(x)?;
    let perms = crate::weingarten::all_permutations(n);
    let mut sum = Complex64::new(0.0, 0.0);
    for p in &perms {
        let sign = if p.transposition_distance() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        let mut mono = 1.0f64;
        for (slot, power) in (0..n - 2).zip((1..=(n - 2) as i32).rev()) {
            mono *= x[p.apply(slot)].powi(power);
        }
        let e1 = Complex64::from_polar(1.0, theta * x[p.apply(n - 2)]);
        let xn = x[p.apply(n - 1)];
        let e2 = xn * Complex64::from_polar(1.0, theta * xn);
        sum += sign * mono * e1 * e2;
    }
    let i_power = Complex64::new(0.0, 1.0).powi((n * (n + 1) / 2) as i32);
    let theta_power = theta.powi(3 * (n as i32 - 3) + 1);
    let denom = (1..=(n as u32).saturating_sub(3))
        .map(factorial)
        .product::<num_bigint::BigUint>()
        * factorial(n as u32 - 1);
    let numerator = i_power * theta_power * sum / denom.to_f64().unwrap();
    let (lvx, sx) = vandermonde_log(x);
    let it = Complex64::new(0.0, theta);
    let pairs = (n * (n - 1) / 2) as i32;
    let it_factor = Complex64::from_polar(
        (-(pairs as f64) * it.norm().ln()).exp(),
        -(pairs as f64) * it.arg(),
    );
    Ok(numerator * it_factor * (superfactorial_ln(n).exp() * (-lvx).exp() * sx))
}

fn degenerate_domain(x: &[f64]) -> Result<usize> {
    let n = x.len();
    if n < 4 {
        return Err(Error::Domain(
            "degenerate-Y closed form applies for N >= 4".into(),
        ));
    }
    if n > 8 {
        return Err(Error::Domain(
            "degenerate-Y evaluation capped at N = 8".into(),
        ));
    }
    let scale = x.iter().fold(0.0f64, |a, &v| a.max(v.abs())).max(1e-300);
    if SpectralPair::min_gap(x) < 1e-10 * scale {
        return Err(Error::DegenerateSpectrum(1e-10 * scale));
    }
    Ok(n)
}

/// Richardson extrapolation of [`iz_determinant`] in the eigenvalue
/// regulator: `y = (1 + e, 1 + 2e, 3e, .., Ne)` at `e = 1e-4` and `5e-5`
/// (the coarser pair `1e-3`, `5e-4` leaves a ~1e-5 linear-in-`e^2`
/// residue, too big to serve as a 1e-5 oracle).
pub fn iz_degenerate_extrapolated(x: &[f64], theta: f64) -> Result<Complex64> {
    let eval = |eps: f64| -> Result<Complex64> {
        let n = x.len();
        let mut y = vec![0.0; n];
        y[0] = 1.0 + eps;
        y[1] = 1.0 + 2.0 * eps;
        for (k, slot) in y.iter_mut().enumerate().skip(2) {
            *slot = (k + 1) as f64 * eps;
        }
        iz_determinant(&SpectralPair::new(x.to_vec(), y, theta)?)
    };
    let e1 = 1e-4;
    let e2 = 5e-5;
    let f1 = eval(e1)?;
    let f2 = eval(e2)?;
    Ok(f2 + (f2 - f1) * (e2 / (e1 - e2)))
}
