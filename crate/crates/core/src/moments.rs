//! Closed-form ensemble averages and the Monte Carlo estimators that
//! check them.
//!
//! All exact values are big rationals with the power of the area scale
//! `lambda` kept separate, so factorial ratios never touch floating point
//! until a report is written. The shape fluctuation tensor
//! `Theta^ab = sum_i V_i^a V_i^b - (1/3) delta^ab V_i^2` gets special
//! treatment: the published coefficient tensor for `<Theta Theta>` fails
//! the tracelessness contraction, so this module also derives the
//! correlation exactly through the Weingarten engine and ships both, with
//! the derived one cross-checked against Monte Carlo.

use crate::mc::{estimate_mean, BatchEstimate, McConfig};
use crate::sampler;
use crate::spinor::Vec3;
use crate::weingarten::{
    factorial, rational_to_f64, vector_polynomial_average, Rational, VectorAxis,
};
use crate::{Error, Result};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::collections::HashMap;

fn rat_int(n: u64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn fact_rat(n: u32) -> Rational {
    Rational::from_integer(BigInt::from(factorial(n)))
}

/// Coefficient of `lambda^(2N-4)` in the density of framed polyhedra:
/// `1 / ((N-1)! (N-2)!)`.
pub fn density_coeff(n: usize) -> Result<Rational> {
    if n < 2 {
        return Err(Error::TooFew { need: 2, got: n });
    }
    Ok(Rational::one() / (fact_rat(n as u32 - 1) * fact_rat(n as u32 - 2)))
}

/// `rho_N[lambda] = lambda^(2N-4) / ((N-1)!(N-2)!)`.
pub fn density(n: usize, lambda: f64) -> Result<f64> {
    Ok(rational_to_f64(&density_coeff(n)?) * lambda.powi(2 * n as i32 - 4))
}

/// The same density computed as the normalized product of sphere volumes,
/// `(pi/4) pi^(-2N) Vol(S_{2N-1}) Vol(S_{2N-3})`. The powers of pi cancel
/// identically, so this returns an exact rational too; disagreement with
/// [`density_coeff`] would flag a bookkeeping bug.
pub fn density_coeff_sphere_volumes(n: usize) -> Result<Rational> {
    if n < 2 {
        return Err(Error::TooFew { need: 2, got: n });
    }
    let nn = n as u32;
    // Vol(S_{2N-1}) = 2 pi^N / (N-1)!, Vol(S_{2N-3}) = 2 pi^(N-1) / (N-2)!
    // rational parts and pi exponents tracked separately
    let coeff = Rational::new(BigInt::from(1), BigInt::from(4))
        * rat_int(2)
        * rat_int(2)
        / (fact_rat(nn - 1) * fact_rat(nn - 2));
    let pi_power = 1i64 - 2 * n as i64 + n as i64 + (n as i64 - 1);
    if pi_power != 0 {
        return Err(Error::Domain(format!(
            "pi exponent {pi_power} does not cancel"
        )));
    }
    Ok(coeff)
}

/// Coefficient of `lambda^(2N-1)` in the closure-free density:
/// `2^(2N-1) / (2N-1)!` (the paper's expression with its scale written as
/// `2 lambda`).
pub fn density_free_coeff(n: usize) -> Result<Rational> {
    if n < 2 {
        return Err(Error::TooFew { need: 2, got: n });
    }
    let m = 2 * n as u32 - 1;
    Ok(Rational::from_integer(BigInt::from(2).pow(m)) / fact_rat(m))
}

pub fn density_free(n: usize, lambda: f64) -> Result<f64> {
    Ok(rational_to_f64(&density_free_coeff(n)?) * lambda.powi(2 * n as i32 - 1))
}

/// Coefficient of `lambda^n` in `<V^n> = lambda^n (n+1)! (N-1)! / (N+n-1)!`.
pub fn moment_v_coeff(n_faces: usize, power: u32) -> Result<Rational> {
    if n_faces < 2 {
        return Err(Error::TooFew {
            need: 2,
            got: n_faces,
        });
    }
    let nn = n_faces as u32;
    Ok(fact_rat(power + 1) * fact_rat(nn - 1) / fact_rat(nn + power - 1))
}

pub fn moment_v(n_faces: usize, lambda: f64, power: u32) -> Result<f64> {
    Ok(rational_to_f64(&moment_v_coeff(n_faces, power)?) * lambda.powi(power as i32))
}

/// Coefficient of `lambda^n` in the closure-free moment
/// `<V^n>^(0) = (2 lambda)^n (n+1)! (2N-1)! / (2N+n-1)!`.
pub fn moment_v_free_coeff(n_faces: usize, power: u32) -> Result<Rational> {
    if n_faces < 1 {
        return Err(Error::TooFew {
            need: 1,
            got: n_faces,
        });
    }
    let m = 2 * n_faces as u32;
    Ok(Rational::from_integer(BigInt::from(2).pow(power)) * fact_rat(power + 1)
        * fact_rat(m - 1)
        / fact_rat(m + power - 1))
}

pub fn moment_v_free(n_faces: usize, lambda: f64, power: u32) -> Result<f64> {
    Ok(rational_to_f64(&moment_v_free_coeff(n_faces, power)?) * lambda.powi(power as i32))
}

/// The quadratic correlators (coefficients of `lambda^2`), closed and free.
#[derive(Debug, Clone)]
pub struct PairCorrelations {
    /// `<V_i V_j>` for distinct faces.
    pub v_pair: Rational,
    /// `<V_i^a V_i^b>` diagonal coefficient (times `delta^ab`).
    pub comp_same: Rational,
    /// `<V_i^a V_j^b>` diagonal coefficient for distinct faces.
    pub comp_pair: Rational,
    /// Free-ensemble `<V_i V_j>`, distinct faces.
    pub v_pair_free: Rational,
    /// Free-ensemble `<V_i^a V_j^b>`, identically zero.
    pub comp_pair_free: Rational,
}

pub fn corr_pairs(n_faces: usize) -> Result<PairCorrelations> {
    if n_faces < 3 {
        return Err(Error::TooFew {
            need: 3,
            got: n_faces,
        });
    }
    let n = BigInt::from(n_faces as u64);
    let one = BigInt::one();
    Ok(PairCorrelations {
        v_pair: Rational::new(
            BigInt::from(2) * (BigInt::from(2) * &n - &one),
            (&n - &one) * &n * (&n + &one),
        ),
        comp_same: Rational::new(BigInt::from(2), &n * (&n + &one)),
        comp_pair: Rational::new(BigInt::from(-2), &n * (&n * &n - &one)),
        v_pair_free: Rational::new(
            BigInt::from(2) * BigInt::from(4),
            &n * (BigInt::from(2) * &n + &one),
        ),
        comp_pair_free: Rational::zero(),
    })
}

/// The printed two-term formula for the quartic integral
/// `int dU U_ij conj(U)_ab U_mv conj(U)_kl`, kept as an independent route
/// against [`crate::weingarten::polynomial_integral`] at order 2.
#[allow(clippy::too_many_arguments)]
pub fn quartic_unitary_integral(
    i: usize,
    j: usize,
    alpha: usize,
    beta: usize,
    mu: usize,
    nu: usize,
    k: usize,
    l: usize,
    big_n: u32,
) -> Rational {
    let d = |a: usize, b: usize| a == b;
    let n = BigInt::from(big_n);
    let n2 = &n * &n;
    let mut total = Rational::zero();
    if d(i, alpha) && d(k, mu) && d(j, beta) && d(l, nu) {
        total += Rational::new(BigInt::one(), n2.clone());
    }
    let block = Rational::new(BigInt::one(), &n2 - BigInt::one());
    if d(i, k) && d(alpha, mu) && d(j, l) && d(beta, nu) {
        total += block.clone();
    }
    if d(i, k) && d(alpha, mu) && d(j, beta) && d(l, nu) {
        total -= block.clone() / Rational::from_integer(n.clone());
    }
    if d(i, alpha) && d(k, mu) && d(j, l) && d(beta, nu) {
        total -= block.clone() / Rational::from_integer(n.clone());
    }
    if d(i, alpha) && d(k, mu) && d(j, beta) && d(l, nu) {
        total += block / Rational::from_integer(n2);
    }
    total
}

/// The shape tensor `Theta^ab` of a set of normal vectors.
pub fn theta_tensor(vectors: &[Vec3]) -> [[f64; 3]; 3] {
    let mut t = [[0.0f64; 3]; 3];
    for v in vectors {
        let comp = [v.x, v.y, v.z];
        let norm_sq = v.dot(v);
        for a in 0..3 {
            for b in 0..3 {
                t[a][b] += comp[a] * comp[b];
            }
            t[a][a] -= norm_sq / 3.0;
        }
    }
    t
}

/// `Tr Theta^2 = sum_ij (V_i . V_j)^2 - (1/3) (sum_i V_i^2)^2`.
pub fn tr_theta_sq(vectors: &[Vec3]) -> f64 {
    let t = theta_tensor(vectors);
    let mut acc = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            acc += t[a][b] * t[b][a];
        }
    }
    acc
}

/// Exact isotropic coefficients of `<Theta^ab Theta^cd>`, as coefficients
/// of `lambda^4` in `a delta^ab delta^cd + b (delta^ac delta^bd +
/// delta^ad delta^bc)`.
#[derive(Debug, Clone)]
pub struct ThetaCorrelation {
    /// Derived through the Weingarten engine; satisfies `3a + 2b = 0`.
    pub derived_a: Rational,
    pub derived_b: Rational,
    /// `<Tr Theta^2> = 3a + 12b`, derived.
    pub derived_tr: Rational,
    /// The published coefficients, shipped for reference only: their
    /// `a = b` contraction does not vanish although `Theta` is traceless.
    pub printed_a: Rational,
    pub printed_b: Rational,
    /// The published `<Tr Theta^2>` (which carries `lambda^2`, not
    /// `lambda^4`); evaluated at `lambda = 1` for comparison.
    pub printed_tr: Rational,
}

/// Compute `<Theta^ab Theta^cd>` exactly at a handful of index choices and
/// read off the two isotropic coefficients.
pub fn theta_correlation_exact(n_faces: usize) -> Result<ThetaCorrelation> {
    if n_faces < 2 {
        return Err(Error::TooFew {
            need: 2,
            got: n_faces,
        });
    }
    let big_n = n_faces as u32;
    let mut memo: HashMap<([usize; 4], bool), Rational> = HashMap::new();
    let axes = [VectorAxis::Norm, VectorAxis::X, VectorAxis::Y, VectorAxis::Z];
    let mut t4 = |a: usize, b: usize, c: usize, d: usize, same: bool| -> Result<Rational> {
        if let Some(v) = memo.get(&([a, b, c, d], same)) {
            return Ok(v.clone());
        }
        let j = usize::from(!same);
        let value = vector_polynomial_average(
            &[(0, axes[a]), (0, axes[b]), (j, axes[c]), (j, axes[d])],
            big_n,
        )?;
        memo.insert(([a, b, c, d], same), value.clone());
        Ok(value)
    };
    // <Theta^ab Theta^cd> summed over the i=j and i!=j index patterns
    let mut contract = |a: usize, b: usize, c: usize, d: usize| -> Result<Rational> {
        let third = Rational::new(BigInt::from(1), BigInt::from(3));
        let ninth = &third * &third;
        let mut total = Rational::zero();
        for (same, weight) in [(true, n_faces as u64), (false, (n_faces * (n_faces - 1)) as u64)]
        {
            let mut term = t4(a, b, c, d, same)?;
            if c == d {
                for e in 1..=3 {
                    term -= &third * t4(a, b, e, e, same)?;
                }
            }
            if a == b {
                for e in 1..=3 {
                    term -= &third * t4(e, e, c, d, same)?;
                }
            }
            if a == b && c == d {
                for e in 1..=3 {
                    for f in 1..=3 {
                        term += &ninth * t4(e, e, f, f, same)?;
                    }
                }
            }
            total += term * rat_int(weight);
        }
        Ok(total)
    };
    let derived_a = contract(1, 1, 2, 2)?;
    let derived_b = contract(1, 2, 1, 2)?;
    let mut derived_tr = Rational::zero();
    for e in 1..=3 {
        for f in 1..=3 {
            derived_tr += contract(e, f, e, f)?;
        }
    }
    // published forms, for the record
    let n = BigInt::from(n_faces as u64);
    let one = BigInt::one();
    let denom = Rational::from_integer(
        BigInt::from(3) * (&n - &one) * &n * (&n + &one) * (&n + BigInt::from(2))
            * (&n + BigInt::from(3)),
    );
    let printed_a = Rational::from_integer(
        BigInt::from(16) * (&n * &n + &n - BigInt::from(2)),
    ) / denom.clone();
    let printed_b =
        Rational::from_integer(BigInt::from(-24) * (&n - &one)) / denom;
    let printed_tr = Rational::from_integer(BigInt::from(4) * (&n - BigInt::from(4)))
        / Rational::from_integer(&n * (&n + &one) * (&n + BigInt::from(2)) * (&n + BigInt::from(3)));
    Ok(ThetaCorrelation {
        derived_a,
        derived_b,
        derived_tr,
        printed_a,
        printed_b,
        printed_tr,
    })
}

/// One row of an exact-versus-Monte-Carlo comparison.
#[derive(Debug, Clone)]
pub struct MomentReport {
    pub observable: String,
    pub n: usize,
    pub lambda: f64,
    pub exact: f64,
    pub estimate: Option<BatchEstimate>,
}

impl MomentReport {
    pub fn z_score(&self) -> Option<f64> {
        self.estimate.map(|e| e.z_score(self.exact))
    }

    pub fn csv_header() -> &'static str {
        "observable,N,lambda,exact,mc_mean,mc_stderr,z_score,samples,seed"
    }

    pub fn csv_row(&self, seed: u64) -> String {
        match self.estimate {
            Some(e) => format!(
                "{},{},{},{:.17e},{:.17e},{:.17e},{:.4},{},{}",
                self.observable,
                self.n,
                self.lambda,
                self.exact,
                e.mean,
                e.stderr,
                e.z_score(self.exact),
                e.samples,
                seed
            ),
            None => format!(
                "{},{},{},{:.17e},,,,0,{}",
                self.observable, self.n, self.lambda, self.exact, seed
            ),
        }
    }
}

struct Accumulator {
    sums: Vec<f64>,
    count: u64,
}

/// The closed-ensemble moment table: exact values against Monte Carlo over
/// the two-column Haar sampler. Zero-sample configs produce exact-only rows.
pub fn run_closed_suite(n: usize, lambda: f64, cfg: &McConfig) -> Result<Vec<MomentReport>> {
    let pairs = corr_pairs(n.max(3))?;
    let l2 = lambda * lambda;
    let theta = theta_correlation_exact(n)?;
    // single-face statistics come from face 0: averaging V over all faces
    // would be constant (the total area is fixed), degenerating the z-score
    let mut observables: Vec<(String, f64)> = vec![
        ("mean_area".into(), moment_v(n, lambda, 1)?),
        ("mean_area_sq".into(), moment_v(n, lambda, 2)?),
        ("area_pair".into(), rational_to_f64(&pairs.v_pair) * l2),
        (
            "component_same_zz".into(),
            rational_to_f64(&pairs.comp_same) * l2,
        ),
        (
            "component_pair_zz".into(),
            rational_to_f64(&pairs.comp_pair) * l2,
        ),
        ("component_pair_xy".into(), 0.0),
    ];
    for (a, b) in [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)] {
        observables.push((format!("theta_{a}{b}"), 0.0));
    }
    observables.push((
        "tr_theta_sq".into(),
        rational_to_f64(&theta.derived_tr) * l2 * l2,
    ));
    let slots = observables.len();
    if cfg.samples == 0 {
        return Ok(observables
            .into_iter()
            .map(|(name, exact)| MomentReport {
                observable: name,
                n,
                lambda,
                exact,
                estimate: None,
            })
            .collect());
    }
    let accs = crate::mc::run_batches(
        cfg,
        || Accumulator {
            sums: vec![0.0; slots],
            count: 0,
        },
        |rng, count, acc| {
            for _ in 0..count {
                let e = sampler::sample_polyhedron(n, lambda, rng).expect("valid config");
                let vectors = e.vectors();
                let mut mean_v2 = 0.0;
                for (_, norm) in &vectors {
                    mean_v2 += norm * norm;
                }
                acc.sums[0] += vectors[0].1;
                acc.sums[1] += mean_v2 / n as f64;
                acc.sums[2] += vectors[0].1 * vectors[1].1;
                acc.sums[3] += vectors[0].0.z * vectors[0].0.z;
                acc.sums[4] += vectors[0].0.z * vectors[1].0.z;
                acc.sums[5] += vectors[0].0.x * vectors[1].0.y;
                let vs: Vec<Vec3> = vectors.iter().map(|(v, _)| *v).collect();
                let t = theta_tensor(&vs);
                for (slot, (a, b)) in [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]
                    .iter()
                    .enumerate()
                {
                    acc.sums[6 + slot] += t[*a][*b];
                }
                acc.sums[12] += tr_theta_sq(&vs);
                acc.count += 1;
            }
        },
    );
    Ok(finish_reports(observables, accs, n, lambda))
}

/// The closure-free table: plain `<V^n>` moments plus the closure-defect
/// spread `<|sum_i V_i|^2> = 3 (2 lambda)^2 / (2N+1)`.
pub fn run_free_suite(n: usize, lambda: f64, cfg: &McConfig) -> Result<Vec<MomentReport>> {
    let mut observables: Vec<(String, f64)> = (1..=4u32)
        .map(|p| {
            Ok((
                format!("free_mean_area_pow{p}"),
                moment_v_free(n, lambda, p)?,
            ))
        })
        .collect::<Result<_>>()?;
    observables.push((
        "free_closure_defect_sq".into(),
        3.0 * (2.0 * lambda) * (2.0 * lambda) / (2.0 * n as f64 + 1.0),
    ));
    observables.push((
        "free_area_pair".into(),
        2.0 * (2.0 * lambda) * (2.0 * lambda) / (n as f64 * (2.0 * n as f64 + 1.0)),
    ));
    observables.push((
        "free_component_same_zz".into(),
        (2.0 * lambda) * (2.0 * lambda) / (n as f64 * (2.0 * n as f64 + 1.0)),
    ));
    observables.push(("free_component_pair_zz".into(), 0.0));
    let slots = observables.len();
    if cfg.samples == 0 {
        return Ok(observables
            .into_iter()
            .map(|(name, exact)| MomentReport {
                observable: name,
                n,
                lambda,
                exact,
                estimate: None,
            })
            .collect());
    }
    let accs = crate::mc::run_batches(
        cfg,
        || Accumulator {
            sums: vec![0.0; slots],
            count: 0,
        },
        |rng, count, acc| {
            for _ in 0..count {
                let vs = sampler::sample_free_ensemble(n, lambda, rng).expect("valid config");
                // p = 1 over all faces is the fixed total: use face 0 there
                acc.sums[0] += vs[0].norm();
                for p in 2..=4usize {
                    let mean: f64 = vs.iter().map(|v| v.norm().powi(p as i32)).sum::<f64>()
                        / n as f64;
                    acc.sums[p - 1] += mean;
                }
                let total = vs.iter().fold(Vec3::default(), |a, v| a.add(v));
                acc.sums[4] += total.dot(&total);
                acc.sums[5] += vs[0].norm() * vs[1].norm();
                acc.sums[6] += vs[0].z * vs[0].z;
                acc.sums[7] += vs[0].z * vs[1].z;
                acc.count += 1;
            }
        },
    );
    Ok(finish_reports(observables, accs, n, lambda))
}

/// Estimate `<Tr Theta^2>` over the closed ensemble.
pub fn estimate_tr_theta_sq(n: usize, lambda: f64, cfg: &McConfig) -> BatchEstimate {
    estimate_mean(cfg, |rng| {
        let e = sampler::sample_polyhedron(n, lambda, rng).expect("valid config");
        let vs: Vec<Vec3> = e.vectors().iter().map(|(v, _)| *v).collect();
        tr_theta_sq(&vs)
    })
}

fn finish_reports(
    observables: Vec<(String, f64)>,
    accs: Vec<Accumulator>,
    n: usize,
    lambda: f64,
) -> Vec<MomentReport> {
    let counts: Vec<u64> = accs.iter().map(|a| a.count).collect();
    observables
        .into_iter()
        .enumerate()
        .map(|(slot, (name, exact))| {
            let sums: Vec<f64> = accs.iter().map(|a| a.sums[slot]).collect();
            MomentReport {
                observable: name,
                n,
                lambda,
                exact,
                estimate: Some(BatchEstimate::from_batch_sums(&sums, &counts)),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weingarten::polynomial_integral;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn density_fixtures() {
        assert_eq!(density_coeff(2).unwrap(), rat(1, 1));
        assert!((density(2, 3.7).unwrap() - 1.0).abs() < 1e-15);
        assert!((density(3, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((density(4, 2.0).unwrap() - 4.0 / 3.0).abs() < 1e-12);
        for n in 2..=20 {
            assert_eq!(
                density_coeff(n).unwrap(),
                density_coeff_sphere_volumes(n).unwrap()
            );
        }
        assert!(density_coeff(1).is_err());
    }

    #[test]
    fn moment_fixtures() {
        assert_eq!(moment_v_coeff(10, 0).unwrap(), rat(1, 1));
        assert!((moment_v(10, 1.0, 1).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(moment_v_coeff(10, 2).unwrap(), rat(6, 110));
        // lambda-scaling covariance: coefficient times lambda^n
        let m = moment_v(7, 2.0, 3).unwrap();
        let m_scaled = moment_v(7, 1.0, 3).unwrap();
        assert!((m - 8.0 * m_scaled).abs() < 1e-15 * m.abs());
    }

    #[test]
    fn free_moment_fixtures() {
        assert_eq!(moment_v_free_coeff(5, 1).unwrap(), rat(2, 5));
        assert_eq!(moment_v_free_coeff(5, 2).unwrap(), rat(12, 55));
        // closed and free moments agree at large N for fixed power
        let closed = moment_v_coeff(10_000, 3).unwrap();
        let free = moment_v_free_coeff(10_000, 3).unwrap();
        let ratio = rational_to_f64(&(closed / free));
        assert!((ratio - 1.0).abs() < 1e-3);
    }

    #[test]
    fn pair_sum_rules_exact() {
        for n in [3usize, 4, 8, 16] {
            let pairs = corr_pairs(n).unwrap();
            // sum_ij <V_i V_j> = N<V^2> + N(N-1)<V_i V_j> = 4 lambda^2
            let total = rat_int(n as u64) * moment_v_coeff(n, 2).unwrap()
                + rat_int((n * (n - 1)) as u64) * pairs.v_pair.clone();
            assert_eq!(total, rat(4, 1));
            // sum_ij <V_i^a V_j^b> = 0 componentwise
            let comp = rat_int(n as u64) * pairs.comp_same.clone()
                + rat_int((n * (n - 1)) as u64) * pairs.comp_pair.clone();
            assert_eq!(comp, Rational::zero());
        }
    }

    #[test]
    fn pair_values_match_weingarten_engine() {
        use VectorAxis::*;
        let n = 5usize;
        let pairs = corr_pairs(n).unwrap();
        assert_eq!(
            pairs.v_pair,
            vector_polynomial_average(&[(0, Norm), (1, Norm)], n as u32).unwrap()
        );
        assert_eq!(
            pairs.comp_same,
            vector_polynomial_average(&[(0, Z), (0, Z)], n as u32).unwrap()
        );
        assert_eq!(
            pairs.comp_pair,
            vector_polynomial_average(&[(0, Z), (1, Z)], n as u32).unwrap()
        );
    }

    #[test]
    fn quartic_integral_matches_collins() {
        for big_n in [2u32, 3, 5] {
            for (i, j, al, be, mu, nu, k, l) in [
                (0usize, 0usize, 0usize, 0usize, 0usize, 0usize, 0usize, 0usize),
                (0, 0, 0, 0, 1, 1, 1, 1),
                (0, 1, 0, 1, 1, 0, 1, 0),
                (0, 0, 1, 0, 1, 0, 0, 0),
            ] {
                if [i, j, al, be, mu, nu, k, l].iter().any(|&x| x >= big_n as usize) {
                    continue;
                }
                let printed = quartic_unitary_integral(i, j, al, be, mu, nu, k, l, big_n);
                let collins =
                    polynomial_integral(&[i, mu], &[j, nu], &[al, k], &[be, l], big_n).unwrap();
                assert_eq!(printed, collins, "N={big_n}");
            }
        }
        // |U11|^4 and |U11|^2 |U22|^2 fixtures
        assert_eq!(
            quartic_unitary_integral(0, 0, 0, 0, 0, 0, 0, 0, 4),
            rat(2, 20)
        );
        assert_eq!(
            quartic_unitary_integral(0, 0, 0, 0, 1, 1, 1, 1, 2),
            rat(1, 3)
        );
    }

    #[test]
    fn theta_correlation_closed_form() {
        // derived coefficients satisfy tracelessness and match
        // b = 8/(N(N+1)(N+3)), a = -2b/3, tr = 10b
        for n in [4usize, 5, 6] {
            let t = theta_correlation_exact(n).unwrap();
            let nn = n as i64;
            let b = rat(8, nn * (nn + 1) * (nn + 3));
            assert_eq!(t.derived_b, b);
            assert_eq!(t.derived_a, rat(-2, 3) * b.clone());
            assert_eq!(t.derived_tr, rat(10, 1) * b);
            let zero_trace = rat(3, 1) * t.derived_a + rat(2, 1) * t.derived_b;
            assert_eq!(zero_trace, Rational::zero());
            // the printed tensor fails that contraction
            let printed_trace = rat(3, 1) * t.printed_a + rat(2, 1) * t.printed_b;
            assert_ne!(printed_trace, Rational::zero());
        }
    }

    #[test]
    fn theta_tensor_is_traceless_and_symmetric() {
        let mut rng = crate::sampler::stream_rng(33, 0);
        let e = crate::sampler::sample_polyhedron(7, 1.3, &mut rng).unwrap();
        let vs: Vec<Vec3> = e.vectors().iter().map(|(v, _)| *v).collect();
        let t = theta_tensor(&vs);
        let scale = vs.iter().map(|v| v.dot(v)).sum::<f64>();
        assert!((t[0][0] + t[1][1] + t[2][2]).abs() <= 1e-12 * scale);
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(t[a][b], t[b][a]);
            }
        }
    }

    #[test]
    fn zero_sample_suite_has_exact_rows_only() {
        let reports = run_closed_suite(4, 1.0, &McConfig::new(0, 1)).unwrap();
        assert!(reports.iter().all(|r| r.estimate.is_none()));
        assert!(reports[0].csv_row(1).ends_with(",,,,0,1"));
    }
}
