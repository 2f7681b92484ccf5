//! The quantized polyhedron: SU(2) intertwiner spaces.
//!
//! Quantization sends face areas to doubled spins, and the framed
//! polyhedra with total area `2J` to the irreducible U(N) representation
//! with two-row highest weight `[J, J]`. This module computes the exact
//! dimensions of those spaces (and of fixed-overall-spin variants), trace
//! moments of face-area operators, the U(N) character as a Schur
//! polynomial, and coherent-intertwiner overlaps, each paired with a
//! brute-force or Monte Carlo oracle.
//!
//! Spins are doubled to integers everywhere: an argument `two_j = 3`
//! means `j = 3/2`. Trace and character operations additionally require
//! the total `J` to be a whole integer (odd totals carry no invariants).

use crate::ensemble::SpinorEnsemble;
use crate::linalg::determinant;
use crate::mc::{BatchEstimate, McConfig};
use crate::sampler::random_open_ensemble;
use crate::weingarten::{factorial, Rational};
use crate::{Error, Result};
use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};

/// `C(n, k)` with the empty-product convention `C(n, 0) = 1` for any `n`,
/// and zero whenever the choice is impossible.
pub fn binomial(n: i64, k: u64) -> BigUint {
    if k == 0 {
        return BigUint::one();
    }
    if n < k as i64 {
        return BigUint::zero();
    }
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..k {
        num *= BigUint::from((n as u64) - i);
        den *= BigUint::from(i + 1);
    }
    num / den
}

fn require_integer_total(two_j: u32) -> Result<u64> {
    if two_j % 2 != 0 {
        return Err(Error::Domain(format!(
            "total spin 2J = {two_j} must be even: odd totals have no invariant states"
        )));
    }
    Ok(u64::from(two_j / 2))
}

/// Exact dimension of the intertwiner space with `N` faces and fixed total
/// area `2J`: `d_N[J] = C(N+J-1, J) C(N+J-2, J) / (J+1)`.
pub fn dimension(n_faces: usize, two_j: u32) -> Result<BigUint> {
    if n_faces < 2 {
        return Err(Error::TooFew {
            need: 2,
            got: n_faces,
        });
    }
    let j = require_integer_total(two_j)?;
    let n = n_faces as i64;
    let prod = binomial(n + j as i64 - 1, j) * binomial(n + j as i64 - 2, j);
    let (q, r) = num_integer::Integer::div_rem(&prod, &BigUint::from(j + 1));
    debug_assert!(r.is_zero());
    Ok(q)
}

/// Dimension of the fixed-overall-spin space `d_N[J, Jc]`, counting states
/// of total area `2J` that recouple to overall spin `Jc`:
/// `(2Jc+1)/(J+Jc+1) C(N+J+Jc-1, J+Jc) C(N+J-Jc-2, J-Jc)`.
///
/// Zero when `Jc > J` or the integrality classes of `J` and `Jc` differ.
pub fn dimension_fixed_spin(n_faces: usize, two_j: u32, two_jc: u32) -> Result<BigUint> {
    if n_faces < 1 {
        return Err(Error::TooFew {
            need: 1,
            got: n_faces,
        });
    }
    if two_jc > two_j || (two_j + two_jc) % 2 != 0 {
        return Ok(BigUint::zero());
    }
    let n = n_faces as i64;
    let sum = u64::from((two_j + two_jc) / 2); // J + Jc
    let diff = u64::from((two_j - two_jc) / 2); // J - Jc
    let prod = BigUint::from(u64::from(two_jc) + 1)
        * binomial(n + sum as i64 - 1, sum)
        * binomial(n + diff as i64 - 2, diff);
    let (q, r) = num_integer::Integer::div_rem(&prod, &BigUint::from(sum + 1));
    debug_assert!(r.is_zero());
    Ok(q)
}

/// Multiplicity of overall spin `Jc` in the tensor product of the given
/// (doubled) spins, by dynamic programming over intermediate couplings.
pub fn covariant_count(two_spins: &[u32], two_jc: u32) -> BigUint {
    let mut mult: Vec<BigUint> = vec![BigUint::one()];
    for &two_s in two_spins {
        let new_top = mult.len() - 1 + two_s as usize;
        let mut next = vec![BigUint::zero(); new_top + 1];
        for (two_k, count) in mult.iter().enumerate() {
            if count.is_zero() {
                continue;
            }
            let lo = two_k.abs_diff(two_s as usize);
            let hi = two_k + two_s as usize;
            let mut out = lo;
            while out <= hi {
                next[out] += count;
                out += 2;
            }
        }
        mult = next;
    }
    mult.get(two_jc as usize).cloned().unwrap_or_default()
}

/// Multiplicity of the invariant (spin 0) in the tensor product: the
/// brute-force oracle for the hook-formula dimensions.
pub fn dimension_by_coupling(two_spins: &[u32]) -> BigUint {
    covariant_count(two_spins, 0)
}

/// Every composition of `2J` into `n` doubled spins.
pub fn spin_lists(n_faces: usize, two_j: u32) -> Vec<Vec<u32>> {
    fn rec(slots: usize, remaining: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slots == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for take in 0..=remaining {
            prefix.push(take);
            rec(slots - 1, remaining - take, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n_faces > 0 {
        rec(n_faces, two_j, &mut Vec::new(), &mut out);
    }
    out
}

/// Status of the two candidate sum rules tying `d_N[J, Jc]` to the
/// `(N+1)`-face dimension.
#[derive(Debug, Clone)]
pub struct SumRuleReport {
    pub target: BigUint,
    /// The literal published sum `sum_{Jc <= J} d_N[J, Jc]`.
    pub literal: BigUint,
    /// The leg-peeling sum `sum_{Jc} d_N[J - Jc, Jc]`.
    pub peeled: BigUint,
    pub literal_holds: bool,
    pub peeled_holds: bool,
}

/// Evaluate both candidate identities against `d_{N+1}[J]`. The
/// leg-peeling form is the one that holds; the literal form is reported,
/// not amended.
pub fn sum_rule_check(n_faces: usize, two_j: u32) -> Result<SumRuleReport> {
    let target = dimension(n_faces + 1, two_j)?;
    let mut literal = BigUint::zero();
    let mut two_jc = two_j % 2;
    while two_jc <= two_j {
        literal += dimension_fixed_spin(n_faces, two_j, two_jc)?;
        two_jc += 2;
    }
    let mut peeled = BigUint::zero();
    for two_jc in 0..=two_j {
        peeled += dimension_fixed_spin(n_faces, two_j - two_jc, two_jc)?;
    }
    Ok(SumRuleReport {
        literal_holds: literal == target,
        peeled_holds: peeled == target,
        target,
        literal,
        peeled,
    })
}

/// The leg-peeling spectral weight `d_{N-1}[J - j, j] / d_N[J]` attached
/// to a face carrying spin `j`, summed against `f(2j)`.
pub fn spectral_mean<F>(n_faces: usize, two_j: u32, f: F) -> Result<Rational>
where
    F: Fn(u32) -> Rational,
{
    if n_faces < 2 {
        return Err(Error::TooFew {
            need: 2,
            got: n_faces,
        });
    }
    let total = dimension(n_faces, two_j)?;
    if total.is_zero() {
        return Err(Error::Domain("empty intertwiner space".into()));
    }
    let mut acc = Rational::zero();
    for two_s in 0..=two_j {
        let count = dimension_fixed_spin(n_faces - 1, two_j - two_s, two_s)?;
        if count.is_zero() {
            continue;
        }
        acc += f(two_s) * Rational::from_integer(BigInt::from(count));
    }
    Ok(acc / Rational::from_integer(BigInt::from(total)))
}

/// Trace moments of the face-area operator over the intertwiner space.
///
/// `power = 1` is the mean doubled spin `<2j> = 2J/N`; `power = 2` is the
/// quantized squared norm, i.e. the Casimir `<4j(j+1)> = 6J(J+N)/(N(N+1))`;
/// higher powers are the plain spectral moments `<(2j)^power>`. All values
/// come from the leg-peeling spectral sum; the closed forms for powers 1
/// and 2 are available from [`trace_moment_v_closed`].
pub fn trace_moment_v(n_faces: usize, two_j: u32, power: u32) -> Result<Rational> {
    require_integer_total(two_j)?;
    spectral_mean(n_faces, two_j, |two_s| match power {
        1 => Rational::from_integer(BigInt::from(two_s)),
        2 => Rational::from_integer(BigInt::from(two_s) * BigInt::from(two_s + 2)),
        p => {
            let mut acc = BigInt::one();
            for _ in 0..p {
                acc *= BigInt::from(two_s);
            }
            Rational::from_integer(acc)
        }
    })
}

/// Closed forms `2J/N` and `6J(J+N)/(N(N+1))` for powers 1 and 2.
pub fn trace_moment_v_closed(n_faces: usize, two_j: u32, power: u32) -> Result<Option<Rational>> {
    require_integer_total(two_j)?;
    let n = BigInt::from(n_faces as u64);
    let j = Rational::new(BigInt::from(two_j), BigInt::from(2));
    Ok(match power {
        1 => Some(
            Rational::from_integer(BigInt::from(2)) * j / Rational::from_integer(n),
        ),
        2 => Some(
            Rational::from_integer(BigInt::from(6))
                * &j
                * (&j + Rational::from_integer(n.clone()))
                / Rational::from_integer(&n * (&n + BigInt::one())),
        ),
        _ => None,
    })
}

/// Report pairing the spectral-sum factorial moment with the published
/// closed form.
#[derive(Debug, Clone)]
pub struct FactorialMoment {
    pub spectral: Rational,
    pub closed: Rational,
    pub agree: bool,
}

/// `<2j (2j+1) .. (2j+m)>` over the intertwiner space: the spectral sum is
/// the authority, and the published closed form
/// `J((m+2)J + 2N + m - 2)(m+1)! C(N+J+m-2, m-1)/C(N+m, m-1)` (read in its
/// factorial-ratio form, which also covers `m <= 1`) is evaluated
/// alongside with the agreement recorded.
pub fn factorial_moment(n_faces: usize, two_j: u32, m: u32) -> Result<FactorialMoment> {
    let j = require_integer_total(two_j)?;
    let spectral = spectral_mean(n_faces, two_j, |two_s| {
        let mut acc = BigInt::one();
        for k in 0..=m {
            acc *= BigInt::from(two_s + k);
        }
        Rational::from_integer(acc)
    })?;
    let n = n_faces as u64;
    // J((m+2)J + 2N + m - 2) (m+1)! (N+J+m-2)!/(N+J-1)! (N-1)!/(N+m)!
    let lead = Rational::from_integer(
        BigInt::from(j) * BigInt::from((m as u64 + 2) * j + 2 * n + m as u64 - 2),
    ) * Rational::from_integer(BigInt::from(factorial(m + 1)));
    // (N+J+m-2)!/(N+J-1)! = prod_{t=0}^{m-2} (N+J+t), or 1/(N+J-1) at m=0
    let mut ratio1 = BigInt::one();
    let mut den1 = BigInt::one();
    if m >= 2 {
        for t in 0..=(m as u64) - 2 {
            ratio1 *= BigInt::from(n + j + t);
        }
    } else if m == 0 {
        den1 = BigInt::from(n + j - 1);
    }
    // (N-1)!/(N+m)! = 1 / prod_{t=0}^{m} (N+t)
    let mut den2 = BigInt::one();
    for t in 0..=(m as u64) {
        den2 *= BigInt::from(n + t);
    }
    let closed = lead * Rational::new(ratio1, den1 * den2);
    Ok(FactorialMoment {
        agree: spectral == closed,
        spectral,
        closed,
    })
}

/// Pair correlations between distinct face-area operators.
#[derive(Debug, Clone)]
pub struct SpinCorrelations {
    /// `<V_i V_k> = J^2 2(2N-1)/((N-1)N(N+1)) - 6J/((N-1)(N+1))`.
    pub area_pair: Rational,
    /// `<vec V_i . vec V_k> = -6J(J+N)/((N-1)N(N+1))`.
    pub vector_dot_pair: Rational,
}

pub fn spin_correlations(n_faces: usize, two_j: u32) -> Result<SpinCorrelations> {
    if n_faces < 3 {
        return Err(Error::TooFew {
            need: 3,
            got: n_faces,
        });
    }
    require_integer_total(two_j)?;
    let n = BigInt::from(n_faces as u64);
    let j = Rational::new(BigInt::from(two_j), BigInt::from(2));
    let denom = Rational::from_integer(
        (&n - BigInt::one()) * &n * (&n + BigInt::one()),
    );
    let area_pair = &j * &j
        * Rational::from_integer(BigInt::from(2) * (BigInt::from(2) * &n - BigInt::one()))
        / denom.clone()
        - Rational::from_integer(BigInt::from(6)) * &j
            / Rational::from_integer((&n - BigInt::one()) * (&n + BigInt::one()));
    let vector_dot_pair = Rational::from_integer(BigInt::from(-6))
        * &j
        * (&j + Rational::from_integer(n.clone()))
        / denom;
    Ok(SpinCorrelations {
        area_pair,
        vector_dot_pair,
    })
}

/// Complete homogeneous symmetric polynomials `h_0 .. h_max` of the given
/// values, by the stable one-variable-at-a-time recursion.
pub fn complete_homogeneous(values: &[Complex64], max_degree: usize) -> Vec<Complex64> {
    let mut h = vec![Complex64::new(0.0, 0.0); max_degree + 1];
    h[0] = Complex64::new(1.0, 0.0);
    for &x in values {
        for m in 1..=max_degree {
            let carry = h[m - 1] * x;
            h[m] += carry;
        }
    }
    h
}

/// Schur polynomial from a precomputed `h` table via Jacobi-Trudi:
/// `s_lambda = det(h_{lambda_i - i + j})`.
pub fn schur_eval(shape: &[u32], h: &[Complex64]) -> Complex64 {
    let r = shape.len();
    if r == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let rows: Vec<Vec<Complex64>> = (0..r)
        .map(|i| {
            (0..r)
                .map(|jcol| {
                    let idx = shape[i] as i64 - i as i64 + jcol as i64;
                    if idx < 0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        h[idx as usize]
                    }
                })
                .collect()
        })
        .collect();
    determinant(rows)
}

/// The U(N) character of the `[J, J]` representation at a diagonal
/// unitary: `s_(J,J)(e^(i theta_1), .., e^(i theta_N))`, via Jacobi-Trudi
/// `h_J^2 - h_(J+1) h_(J-1)` (finite at coinciding angles, unlike the
/// generalized Vandermonde ratio).
pub fn character(n_faces: usize, two_j: u32, thetas: &[f64]) -> Result<Complex64> {
    let j = require_integer_total(two_j)? as usize;
    if thetas.len() != n_faces {
        return Err(Error::Domain(format!(
            "expected {n_faces} angles, got {}",
            thetas.len()
        )));
    }
    let xs: Vec<Complex64> = thetas
        .iter()
        .map(|&t| Complex64::from_polar(1.0, t))
        .collect();
    let h = complete_homogeneous(&xs, j + 1);
    if j == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    Ok(h[j] * h[j] - h[j + 1] * h[j - 1])
}

/// The generalized-Vandermonde ratio form of the character, usable only at
/// well-separated angles; kept as a cross-check of [`character`].
pub fn character_vandermonde(n_faces: usize, two_j: u32, thetas: &[f64]) -> Result<Complex64> {
    let j = require_integer_total(two_j)?;
    if thetas.len() != n_faces {
        return Err(Error::Domain("angle count mismatch".into()));
    }
    let n = n_faces;
    let mut min_gap = f64::INFINITY;
    for a in 0..n {
        for b in (a + 1)..n {
            let gap = (Complex64::from_polar(1.0, thetas[a]) - Complex64::from_polar(1.0, thetas[b]))
                .norm();
            min_gap = min_gap.min(gap);
        }
    }
    if min_gap < 1e-6 {
        return Err(Error::DegenerateSpectrum(1e-6));
    }
    let weight: Vec<u64> = (0..n)
        .map(|i| {
            let l = if i < 2 { j } else { 0 };
            l + (n - 1 - i) as u64
        })
        .collect();
    let numer: Vec<Vec<Complex64>> = (0..n)
        .map(|jcol| {
            weight
                .iter()
                .map(|&w| Complex64::from_polar(1.0, thetas[jcol] * w as f64))
                .collect()
        })
        .collect();
    let denom: Vec<Vec<Complex64>> = (0..n)
        .map(|jcol| {
            (0..n)
                .map(|i| Complex64::from_polar(1.0, thetas[jcol] * (n - 1 - i) as f64))
                .collect()
        })
        .collect();
    Ok(determinant(numer) / determinant(denom))
}

/// Coherent intertwiner overlap `<J,{z} | J,{w}>`, with both published
/// routes evaluated: the 2x2 determinant `det(sum_i |w_i><z_i|)^J` and the
/// holomorphic pairing `(1/2 sum_ij F^w_ij conj(F^z_ij))^J`.
#[derive(Debug, Clone, Copy)]
pub struct CoherentOverlap {
    pub value: Complex64,
    /// Distance between the two evaluation routes.
    pub cross_residual: f64,
}

pub fn coherent_overlap(
    two_j: u32,
    z: &SpinorEnsemble,
    w: &SpinorEnsemble,
) -> Result<CoherentOverlap> {
    let j = require_integer_total(two_j)? as i32;
    if z.len() != w.len() {
        return Err(Error::Domain("ensembles differ in size".into()));
    }
    // M_AB = sum_i w_i^A conj(z_i^B)
    let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (wi, zi) in w.spinors().iter().zip(z.spinors()) {
        let wv = [wi.z0, wi.z1];
        let zv = [zi.z0, zi.z1];
        for (a, &wa) in wv.iter().enumerate() {
            for (b, &zb) in zv.iter().enumerate() {
                m[a][b] += wa * zb.conj();
            }
        }
    }
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let via_det = det.powi(j);
    let mut pairing = Complex64::new(0.0, 0.0);
    for (i, wi) in w.spinors().iter().enumerate() {
        for (k, wk) in w.spinors().iter().enumerate() {
            let fw = wi.fdot(wk);
            let fz = z.spinors()[i].fdot(&z.spinors()[k]);
            pairing += fw * fz.conj();
        }
    }
    let via_f = (pairing * 0.5).powi(j);
    let scale = via_det.norm().max(via_f.norm()).max(1e-300);
    Ok(CoherentOverlap {
        value: via_det,
        cross_residual: (via_det - via_f).norm() / scale,
    })
}

/// Squared norm `<J,{z} | J,{z}> = (1/2 sum |F_ij|^2)^J`, equal to
/// `2^(-2J) ((sum V_i)^2 - |sum vec V_i|^2)^J`.
pub fn coherent_norm(two_j: u32, z: &SpinorEnsemble) -> Result<f64> {
    let j = require_integer_total(two_j)? as i32;
    let obs = z.observables();
    Ok((obs.f_norm_sq() / 2.0).powi(j))
}

fn mc_guard(n_faces: usize, two_j: u32) -> Result<u64> {
    let j = require_integer_total(two_j)?;
    if n_faces > 8 || j > 4 {
        return Err(Error::Domain(
            "Monte Carlo guard: N <= 8 and J <= 4 keep the det^J variance sane".into(),
        ));
    }
    Ok(j)
}

/// Monte Carlo for `d_N[J]` as a Gaussian spinor integral:
/// the mean of `det(sum_i |z_i><z_i|)^J / (J!(J+1)!)` over standard
/// complex Gaussian spinors.
pub fn dimension_mc(n_faces: usize, two_j: u32, cfg: &McConfig) -> Result<BatchEstimate> {
    let j = mc_guard(n_faces, two_j)?;
    let norm = (factorial(j as u32) * factorial(j as u32 + 1))
        .to_f64()
        .unwrap();
    Ok(crate::mc::estimate_mean(cfg, move |rng| {
        let e = random_open_ensemble(n_faces, rng);
        let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
        for z in e.spinors() {
            let zv = [z.z0, z.z1];
            for (a, &za) in zv.iter().enumerate() {
                for (b, &zb) in zv.iter().enumerate() {
                    m[a][b] += za * zb.conj();
                }
            }
        }
        let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).re;
        det.powi(j as i32) / norm
    }))
}

/// Monte Carlo for the character at a diagonal unitary: the Gaussian mean
/// of `((1/2) sum_ij e^(i(theta_i + theta_j)) |F_ij|^2)^J / (J!(J+1)!)`.
pub fn character_mc(
    n_faces: usize,
    two_j: u32,
    thetas: &[f64],
    cfg: &McConfig,
) -> Result<(Complex64, (f64, f64))> {
    let j = mc_guard(n_faces, two_j)?;
    if thetas.len() != n_faces {
        return Err(Error::Domain("angle count mismatch".into()));
    }
    let phases: Vec<Complex64> = thetas
        .iter()
        .map(|&t| Complex64::from_polar(1.0, t))
        .collect();
    let norm = (factorial(j as u32) * factorial(j as u32 + 1))
        .to_f64()
        .unwrap();
    let accs = crate::mc::run_batches(
        cfg,
        || (0.0f64, 0.0f64, 0u64),
        |rng, count, acc| {
            for _ in 0..count {
                let e = random_open_ensemble(n_faces, rng);
                let mut s = Complex64::new(0.0, 0.0);
                for (i, zi) in e.spinors().iter().enumerate() {
                    for (k, zk) in e.spinors().iter().enumerate().skip(i + 1) {
                        let f = zi.fdot(zk);
                        s += phases[i] * phases[k] * f.norm_sqr();
                    }
                }
                let v = s.powi(j as i32) / norm;
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
    Ok((Complex64::new(re.mean, im.mean), (re.stderr, im.stderr)))
}

/// Large-area expansion of the dimension:
/// `J^(2N-4)/((N-1)!(N-2)!) + N J^(2N-5)/((N-1)!(N-3)!)`, leading term
/// only at `N = 3`.
pub fn asymptotic_dimension(n_faces: usize, two_j: u32) -> Result<f64> {
    if n_faces < 3 {
        return Err(Error::TooFew {
            need: 3,
            got: n_faces,
        });
    }
    let j = require_integer_total(two_j)? as f64;
    let n = n_faces as u32;
    let lead = j.powi(2 * n as i32 - 4)
        / (factorial(n - 1).to_f64().unwrap() * factorial(n - 2).to_f64().unwrap());
    if n_faces == 3 {
        return Ok(lead);
    }
    let sub = n as f64 * j.powi(2 * n as i32 - 5)
        / (factorial(n - 1).to_f64().unwrap() * factorial(n - 3).to_f64().unwrap());
    Ok(lead + sub)
}
