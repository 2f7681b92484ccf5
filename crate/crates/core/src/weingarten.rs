//! Exact Weingarten calculus for polynomial integrals over U(N).
//!
//! The systematic integral of a monomial in unitary matrix entries is a
//! double sum over permutations weighted by the Weingarten function
//! `Wg(sigma) = (1/n!^2) sum_{L |- n} chi^L(1)^2 chi^L(sigma) / s_{L,N}(1)`.
//! Everything here is exact: symmetric-group characters come from the
//! Murnaghan-Nakayama recursion, unitary-group dimensions from the
//! hook-content formula, and all arithmetic is big-rational. Floating point
//! appears only in the large-N Catalan asymptotics.

use crate::{Error, Result};
use num_bigint::{BigInt, BigUint};
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::HashMap;
use std::sync::Mutex;
use std::sync::OnceLock;

pub type Rational = Ratio<BigInt>;

/// A partition: weakly decreasing positive parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition(Vec<u32>);

impl Partition {
    pub fn new(mut parts: Vec<u32>) -> Result<Self> {
        parts.retain(|&p| p > 0);
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Domain("parts must be weakly decreasing".into()));
        }
        Ok(Partition(parts))
    }

    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn rows(&self) -> usize {
        self.0.len()
    }
}

impl std::fmt::Display for Partition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// All partitions of `n` in ascending lexicographic order of part lists.
pub fn partitions(n: u32) -> Vec<Partition> {
    fn rec(n: u32, max: u32, prefix: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if n == 0 {
            out.push(Partition(prefix.clone()));
            return;
        }
        for p in 1..=n.min(max) {
            prefix.push(p);
            rec(n - p, p, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return vec![Partition::empty()];
    }
    rec(n, n, &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// A permutation of `{0..n-1}` stored by images.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(Error::Domain("not a bijection".into()));
            }
            seen[i] = true;
        }
        Ok(Permutation(images))
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    /// `self` after `other`: `(self * other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation(other.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0usize; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Permutation(inv)
    }

    pub fn cycle_type(&self) -> Partition {
        let n = self.0.len();
        let mut seen = vec![false; n];
        let mut lens = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0u32;
            let mut j = start;
            while !seen[j] {
                seen[j] = true;
                j = self.0[j];
                len += 1;
            }
            lens.push(len);
        }
        lens.sort_unstable_by(|a, b| b.cmp(a));
        Partition(lens)
    }

    /// Number of cycles, written `l(sigma)`.
    pub fn cycle_count(&self) -> usize {
        self.cycle_type().rows()
    }

    /// Minimal number of transpositions, `|sigma| = n - l(sigma)`.
    pub fn transposition_distance(&self) -> usize {
        self.n() - self.cycle_count()
    }

    /// A canonical permutation with the given cycle type.
    pub fn from_cycle_type(ct: &Partition) -> Permutation {
        let mut images = Vec::with_capacity(ct.weight() as usize);
        let mut base = 0usize;
        for &len in ct.parts() {
            let len = len as usize;
            for k in 0..len {
                images.push(base + (k + 1) % len);
            }
            base += len;
        }
        Permutation(images)
    }
}

/// Every permutation of `{0..n-1}`, in lexicographic order of image lists.
pub fn all_permutations(n: usize) -> Vec<Permutation> {
    fn rec(remaining: &mut Vec<usize>, prefix: &mut Vec<usize>, out: &mut Vec<Permutation>) {
        if remaining.is_empty() {
            out.push(Permutation(prefix.clone()));
            return;
        }
        for idx in 0..remaining.len() {
            let v = remaining.remove(idx);
            prefix.push(v);
            rec(remaining, prefix, out);
            prefix.pop();
            remaining.insert(idx, v);
        }
    }
    let mut out = Vec::new();
    rec(&mut (0..n).collect(), &mut Vec::new(), &mut out);
    out
}

/// Size of the conjugacy class with the given cycle type.
pub fn class_size(ct: &Partition) -> BigUint {
    let n = ct.weight();
    let mut centralizer = BigUint::one();
    let mut mult: HashMap<u32, u32> = HashMap::new();
    for &p in ct.parts() {
        *mult.entry(p).or_insert(0) += 1;
    }
    for (&len, &m) in &mult {
        centralizer *= BigUint::from(len).pow(m) * factorial(m);
    }
    factorial(n) / centralizer
}

pub fn factorial(n: u32) -> BigUint {
    (1..=n).map(BigUint::from).fold(BigUint::one(), |a, b| a * b)
}

/// The `c`-th Catalan number `(2c)! / (c! (c+1)!)`.
pub fn catalan(c: u32) -> BigUint {
    factorial(2 * c) / (factorial(c) * factorial(c + 1))
}

fn char_memo() -> &'static Mutex<HashMap<(Vec<u32>, Vec<u32>), i64>> {
    static MEMO: OnceLock<Mutex<HashMap<(Vec<u32>, Vec<u32>), i64>>> = OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Character of the symmetric group, `chi^lambda(cycle type)`, by the
/// Murnaghan-Nakayama border-strip recursion.
pub fn sn_character(lambda: &Partition, class: &Partition) -> Result<i64> {
    if lambda.weight() != class.weight() {
        return Err(Error::Domain(format!(
            "weight mismatch: {} vs {}",
            lambda.weight(),
            class.weight()
        )));
    }
    Ok(mn_recurse(lambda.parts(), class.parts()))
}

fn mn_recurse(shape: &[u32], class: &[u32]) -> i64 {
    if shape.is_empty() {
        return 1;
    }
    let key = (shape.to_vec(), class.to_vec());
    if let Some(&v) = char_memo().lock().unwrap().get(&key) {
        return v;
    }
    let k = class[0];
    let rest = &class[1..];
    let r = shape.len();
    let mut total = 0i64;
    // remove a border strip of k cells ending in row j, starting in row i
    for i in 0..r {
        for j in i..r {
            let mut new: Vec<i64> = shape.iter().map(|&x| x as i64).collect();
            for m in i..j {
                new[m] = shape[m + 1] as i64 - 1;
            }
            new[j] = shape[i] as i64 - k as i64 + (j - i) as i64;
            if new[j] < 0 {
                continue;
            }
            let removed: i64 =
                shape.iter().map(|&x| x as i64).sum::<i64>() - new.iter().sum::<i64>();
            if removed != k as i64 {
                continue;
            }
            let mut valid = new.iter().all(|&x| x >= 0)
                && new
                    .iter()
                    .zip(shape)
                    .all(|(&x, &orig)| x <= orig as i64);
            valid = valid && new.windows(2).all(|w| w[0] >= w[1]);
            if !valid {
                continue;
            }
            let ns: Vec<u32> = new.iter().filter(|&&x| x > 0).map(|&x| x as u32).collect();
            total += if (j - i) % 2 == 1 { -1 } else { 1 } * mn_recurse(&ns, rest);
        }
    }
    char_memo().lock().unwrap().insert(key, total);
    total
}

/// Dimension of the irreducible U(N) representation with highest weight
/// `lambda`, by the hook-content formula; zero when `lambda` has more than
/// `N` rows.
pub fn schur_dimension(lambda: &Partition, big_n: u32) -> BigInt {
    let shape = lambda.parts();
    if shape.len() > big_n as usize {
        return BigInt::zero();
    }
    let conj: Vec<u32> = if shape.is_empty() {
        Vec::new()
    } else {
        (0..shape[0])
            .map(|j| shape.iter().filter(|&&r| r > j).count() as u32)
            .collect()
    };
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for (i, &row) in shape.iter().enumerate() {
        for j in 0..row as usize {
            num *= BigInt::from(big_n as i64 + j as i64 - i as i64);
            let hook = (row as i64 - j as i64) + (conj[j] as i64 - i as i64) - 1;
            den *= BigInt::from(hook);
        }
    }
    num / den
}

/// Dimension of the S_n irreducible labeled by `lambda` (hook lengths).
pub fn sn_dimension(lambda: &Partition) -> BigUint {
    let shape = lambda.parts();
    if shape.is_empty() {
        return BigUint::one();
    }
    let conj: Vec<u32> = (0..shape[0])
        .map(|j| shape.iter().filter(|&&r| r > j).count() as u32)
        .collect();
    let mut hooks = BigUint::one();
    for (i, &row) in shape.iter().enumerate() {
        for j in 0..row as usize {
            let hook = (row as u64 - j as u64) + (conj[j] as u64 - i as u64) - 1;
            hooks *= BigUint::from(hook);
        }
    }
    factorial(lambda.weight()) / hooks
}

fn wg_memo() -> &'static Mutex<HashMap<(u32, u32, Vec<u32>), Rational>> {
    static MEMO: OnceLock<Mutex<HashMap<(u32, u32, Vec<u32>), Rational>>> = OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Exact Weingarten value for a cycle type; requires `N >= n` where the
/// Gram matrix is invertible.
pub fn weingarten_exact_class(n: u32, big_n: u32, class: &Partition) -> Result<Rational> {
    if big_n < n {
        return Err(Error::SingularRegime {
            n: n as usize,
            big_n: big_n as usize,
        });
    }
    if class.weight() != n {
        return Err(Error::Domain("cycle type weight must equal n".into()));
    }
    let key = (n, big_n, class.parts().to_vec());
    if let Some(v) = wg_memo().lock().unwrap().get(&key) {
        return Ok(v.clone());
    }
    let id_class = Partition(vec![1; n as usize]);
    let mut total = Rational::zero();
    for lam in partitions(n) {
        let dim = schur_dimension(&lam, big_n);
        if dim.is_zero() {
            continue;
        }
        let chi_id = BigInt::from(sn_character(&lam, &id_class)?);
        let chi = BigInt::from(sn_character(&lam, class)?);
        total += Rational::new(&chi_id * &chi_id * chi, dim);
    }
    let nfact = BigInt::from(factorial(n));
    let value = total / Rational::from_integer(&nfact * &nfact);
    wg_memo().lock().unwrap().insert(key, value.clone());
    Ok(value)
}

/// Exact Weingarten value of a permutation (depends only on its cycle type).
pub fn weingarten_exact(big_n: u32, sigma: &Permutation) -> Result<Rational> {
    weingarten_exact_class(sigma.n() as u32, big_n, &sigma.cycle_type())
}

/// Leading large-N behavior: `N^-(n+|sigma|) prod_cycles (-1)^|c| Catalan(|c|)`.
pub fn weingarten_asymptotic(big_n: u32, sigma: &Permutation) -> f64 {
    weingarten_asymptotic_class(big_n, sigma.n() as u32, &sigma.cycle_type())
}

pub fn weingarten_asymptotic_class(big_n: u32, n: u32, class: &Partition) -> f64 {
    let dist: u32 = class.parts().iter().map(|&c| c - 1).sum();
    let mut coeff = 1.0f64;
    for &c in class.parts() {
        let cat = catalan(c - 1).to_f64().unwrap_or(f64::INFINITY);
        coeff *= if (c - 1) % 2 == 1 { -cat } else { cat };
    }
    coeff * (big_n as f64).powi(-((n + dist) as i32))
}

/// Gram matrix of the permutation representation, `M_st = N^(l(s^-1 t))`,
/// over all of S_n in the order of [`all_permutations`].
pub fn gram_matrix(n: usize, big_n: u32) -> (Vec<Permutation>, Vec<Vec<BigInt>>) {
    let perms = all_permutations(n);
    let base = BigInt::from(big_n);
    let powers: Vec<BigInt> = (0..=n).map(|k| base.pow(k as u32)).collect();
    let m = perms
        .iter()
        .map(|s| {
            let si = s.inverse();
            perms
                .iter()
                .map(|t| powers[si.compose(t).cycle_count()].clone())
                .collect()
        })
        .collect();
    (perms, m)
}

/// Verify that the Weingarten function is the pseudo-inverse of the Gram
/// matrix: `sum_t Wg(s^-1 t) N^(l(t^-1 r)) = delta_sr`, exactly.
pub fn gram_inverse_check(n: usize, big_n: u32) -> Result<bool> {
    let perms = all_permutations(n);
    let base = BigInt::from(big_n);
    let powers: Vec<Rational> = (0..=n)
        .map(|k| Rational::from_integer(base.pow(k as u32)))
        .collect();
    let wg: Vec<Rational> = perms
        .iter()
        .map(|p| weingarten_exact(big_n, p))
        .collect::<Result<_>>()?;
    for s in &perms {
        let si = s.inverse();
        for r in &perms {
            let mut acc = Rational::zero();
            for (t, _) in perms.iter().enumerate() {
                let ti = perms[t].inverse();
                let wg_idx = perm_index(&perms, &si.compose(&perms[t]));
                acc += &wg[wg_idx] * &powers[ti.compose(r).cycle_count()];
            }
            let expect = if s == r {
                Rational::one()
            } else {
                Rational::zero()
            };
            if acc != expect {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn perm_index(perms: &[Permutation], p: &Permutation) -> usize {
    perms.iter().position(|q| q == p).expect("closed under composition")
}

/// Degree cap for [`polynomial_integral`] and
/// [`vector_polynomial_average`]; S_n enumeration beyond this is wasteful.
pub const MAX_DEGREE: usize = 6;

/// The systematic polynomial integral over U(N):
/// `int dU U_{i1 j1}..U_{in jn} conj(U)_{k1 l1}..conj(U)_{kn ln}`.
///
/// Sums `Wg(sigma tau^-1)` over the permutation pairs matching the row and
/// column index patterns. Callers with unequal numbers of `U` and `conj(U)`
/// factors get zero by the signature (the arity is symmetric here).
pub fn polynomial_integral(
    rows_i: &[usize],
    cols_j: &[usize],
    rows_k: &[usize],
    cols_l: &[usize],
    big_n: u32,
) -> Result<Rational> {
    let n = rows_i.len();
    if cols_j.len() != n || rows_k.len() != n || cols_l.len() != n {
        return Err(Error::Domain("index tuples must share one length".into()));
    }
    if n == 0 {
        return Ok(Rational::one());
    }
    if n > MAX_DEGREE {
        return Err(Error::DegreeCap {
            got: n,
            cap: MAX_DEGREE,
        });
    }
    if (big_n as usize) < n {
        return Err(Error::SingularRegime {
            n,
            big_n: big_n as usize,
        });
    }
    // sigma matches U rows to conj(U) rows; tau matches the columns
    let sigmas = matching_permutations(rows_i, rows_k);
    if sigmas.is_empty() {
        return Ok(Rational::zero());
    }
    let taus = matching_permutations(cols_j, cols_l);
    let mut total = Rational::zero();
    for sigma in &sigmas {
        for tau in &taus {
            let rel = tau.inverse().compose(sigma);
            total += weingarten_exact_class(n as u32, big_n, &rel.cycle_type())?;
        }
    }
    Ok(total)
}

/// All permutations `p` with `a[m] == b[p(m)]`, found by backtracking.
fn matching_permutations(a: &[usize], b: &[usize]) -> Vec<Permutation> {
    let n = a.len();
    let mut out = Vec::new();
    let mut used = vec![false; n];
    let mut images = vec![0usize; n];
    fn rec(
        m: usize,
        a: &[usize],
        b: &[usize],
        used: &mut [bool],
        images: &mut [usize],
        out: &mut Vec<Permutation>,
    ) {
        let n = a.len();
        if m == n {
            out.push(Permutation(images.to_vec()));
            return;
        }
        for cand in 0..n {
            if !used[cand] && b[cand] == a[m] {
                used[cand] = true;
                images[m] = cand;
                rec(m + 1, a, b, used, images, out);
                used[cand] = false;
            }
        }
    }
    rec(0, a, b, &mut used, &mut images, &mut out);
    out
}

/// Component selector for [`vector_polynomial_average`] factors: the norm
/// `V_k` (identity in spinor space) or a vector component `V_k^a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorAxis {
    Norm,
    X,
    Y,
    Z,
}

// Pauli entries as (re, im) integers; axis-major, then row A, column B.
const PAULI: [[[(i64, i64); 2]; 2]; 4] = [
    [[(1, 0), (0, 0)], [(0, 0), (1, 0)]],   // identity (norm)
    [[(0, 0), (1, 0)], [(1, 0), (0, 0)]],   // sigma_x
    [[(0, 0), (0, -1)], [(0, 1), (0, 0)]],  // sigma_y
    [[(1, 0), (0, 0)], [(0, 0), (-1, 0)]],  // sigma_z
];

/// Exact Haar average of a monomial in face-area norms and normal-vector
/// components, as the coefficient of `lambda^degree`.
///
/// Each factor `(k, axis)` stands for `V_k` or `V_k^axis`; the expansion
/// `V_k^a = lambda sum_AB conj(U)_kA sigma^a_AB U_kB` turns the average
/// into a polynomial integral over U(N), contracted here with the Pauli
/// entries. The imaginary part cancels; a nonzero one is a bug.
pub fn vector_polynomial_average(factors: &[(usize, VectorAxis)], big_n: u32) -> Result<Rational> {
    let n = factors.len();
    if n == 0 {
        return Ok(Rational::one());
    }
    if n > MAX_DEGREE {
        return Err(Error::DegreeCap {
            got: n,
            cap: MAX_DEGREE,
        });
    }
    let rows: Vec<usize> = factors.iter().map(|&(k, _)| k).collect();
    if rows.iter().any(|&k| k >= big_n as usize) {
        return Err(Error::Domain("face index out of range".into()));
    }
    let axes: Vec<usize> = factors
        .iter()
        .map(|&(_, a)| match a {
            VectorAxis::Norm => 0,
            VectorAxis::X => 1,
            VectorAxis::Y => 2,
            VectorAxis::Z => 3,
        })
        .collect();
    let mut re = Rational::zero();
    let mut im = Rational::zero();
    // A_m, B_m range over the two spinor components of each factor
    for assign in 0..(1usize << (2 * n)) {
        let a_of = |m: usize| (assign >> m) & 1;
        let b_of = |m: usize| (assign >> (n + m)) & 1;
        let mut cre = 1i64;
        let mut cim = 0i64;
        for m in 0..n {
            let (pre, pim) = PAULI[axes[m]][a_of(m)][b_of(m)];
            let (nre, nim) = (cre * pre - cim * pim, cre * pim + cim * pre);
            cre = nre;
            cim = nim;
            if cre == 0 && cim == 0 {
                break;
            }
        }
        if cre == 0 && cim == 0 {
            continue;
        }
        let cols_b: Vec<usize> = (0..n).map(b_of).collect();
        let cols_a: Vec<usize> = (0..n).map(a_of).collect();
        let integral = polynomial_integral(&rows, &cols_b, &rows, &cols_a, big_n)?;
        if cre != 0 {
            re += Rational::from_integer(BigInt::from(cre)) * &integral;
        }
        if cim != 0 {
            im += Rational::from_integer(BigInt::from(cim)) * integral;
        }
    }
    debug_assert!(im.is_zero(), "imaginary part must cancel");
    if !im.is_zero() {
        return Err(Error::Domain("nonzero imaginary part".into()));
    }
    Ok(re)
}

/// `Wg` value as a float, for reports.
pub fn rational_to_f64(r: &Rational) -> f64 {
    let num = r.numer().to_f64().unwrap_or(f64::NAN);
    let den = r.denom().to_f64().unwrap_or(f64::NAN);
    if num.is_finite() && den.is_finite() && den != 0.0 {
        num / den
    } else {
        // fall back through a quotient of magnitudes for huge entries
        let (q, rem) = (
            r.numer() / r.denom(),
            r.numer() % r.denom(),
        );
        q.to_f64().unwrap_or(f64::NAN)
            + (rem.to_f64().unwrap_or(0.0) / r.denom().to_f64().unwrap_or(f64::INFINITY))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn partition_counts() {
        assert_eq!(partitions(0).len(), 1);
        assert_eq!(partitions(3).len(), 3);
        assert_eq!(partitions(5).len(), 7);
        assert_eq!(partitions(6).len(), 11);
    }

    #[test]
    fn characters_small_cases() {
        let triv = Partition::new(vec![3]).unwrap();
        for class in partitions(3) {
            assert_eq!(sn_character(&triv, &class).unwrap(), 1);
        }
        let sign2 = Partition::new(vec![1, 1]).unwrap();
        let swap = Partition::new(vec![2]).unwrap();
        assert_eq!(sn_character(&sign2, &swap).unwrap(), -1);
        let mixed = Partition::new(vec![2, 1]).unwrap();
        let three_cycle = Partition::new(vec![3]).unwrap();
        assert_eq!(sn_character(&mixed, &three_cycle).unwrap(), -1);
        assert!(sn_character(&mixed, &swap).is_err());
    }

    #[test]
    fn character_orthogonality_rows() {
        for n in 1..=6u32 {
            let classes = partitions(n);
            let lams = partitions(n);
            let nfact = BigInt::from(factorial(n));
            for a in &lams {
                for b in &lams {
                    let mut acc = BigInt::zero();
                    for ct in &classes {
                        let size = BigInt::from(class_size(ct));
                        acc += size
                            * BigInt::from(sn_character(a, ct).unwrap())
                            * BigInt::from(sn_character(b, ct).unwrap());
                    }
                    let expect = if a == b { nfact.clone() } else { BigInt::zero() };
                    assert_eq!(acc, expect, "n={n} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn character_orthogonality_columns() {
        let n = 5u32;
        let classes = partitions(n);
        let lams = partitions(n);
        for ca in &classes {
            for cb in &classes {
                let mut acc = BigInt::zero();
                for lam in &lams {
                    acc += BigInt::from(sn_character(lam, ca).unwrap())
                        * BigInt::from(sn_character(lam, cb).unwrap());
                }
                let expect = if ca == cb {
                    BigInt::from(factorial(n)) / BigInt::from(class_size(ca))
                } else {
                    BigInt::zero()
                };
                assert_eq!(acc, expect);
            }
        }
    }

    #[test]
    fn schur_dimensions() {
        let single = Partition::new(vec![1]).unwrap();
        assert_eq!(schur_dimension(&single, 7), BigInt::from(7));
        let anti = Partition::new(vec![1, 1]).unwrap();
        assert_eq!(schur_dimension(&anti, 3), BigInt::from(3));
        let two_row = Partition::new(vec![1, 1, 1, 1]).unwrap();
        assert_eq!(schur_dimension(&two_row, 3), BigInt::zero());
        // (J,J) at J=1, N=4 equals the intertwiner dimension 6
        let jj = Partition::new(vec![1, 1]).unwrap();
        assert_eq!(schur_dimension(&jj, 4), BigInt::from(6));
    }

    #[test]
    fn weingarten_small_orders() {
        let n5 = 5u32;
        let e1 = Partition::new(vec![1]).unwrap();
        assert_eq!(weingarten_exact_class(1, n5, &e1).unwrap(), rat(1, 5));
        let e2 = Partition::new(vec![1, 1]).unwrap();
        let t2 = Partition::new(vec![2]).unwrap();
        assert_eq!(weingarten_exact_class(2, n5, &e2).unwrap(), rat(1, 24));
        assert_eq!(weingarten_exact_class(2, n5, &t2).unwrap(), rat(-1, 120));
        // N=3 rows from inverting [[9,3],[3,9]]
        assert_eq!(weingarten_exact_class(2, 3, &e2).unwrap(), rat(1, 8));
        assert_eq!(weingarten_exact_class(2, 3, &t2).unwrap(), rat(-1, 24));
        assert!(weingarten_exact_class(3, 2, &Partition::new(vec![3]).unwrap()).is_err());
    }

    #[test]
    fn weingarten_is_class_function() {
        let mut rng = crate::sampler::stream_rng(10, 0);
        use rand::seq::SliceRandom;
        let perms = all_permutations(4);
        for _ in 0..10 {
            let sigma = perms.choose(&mut rng).unwrap();
            let rho = perms.choose(&mut rng).unwrap();
            let conj = rho.compose(sigma).compose(&rho.inverse());
            assert_eq!(
                weingarten_exact(6, sigma).unwrap(),
                weingarten_exact(6, &conj).unwrap()
            );
        }
    }

    #[test]
    fn gram_matrix_and_inverse() {
        let (perms, m) = gram_matrix(2, 4);
        assert_eq!(perms.len(), 2);
        assert_eq!(m[0][0], BigInt::from(16));
        assert_eq!(m[0][1], BigInt::from(4));
        assert!(gram_inverse_check(2, 5).unwrap());
        assert!(gram_inverse_check(3, 4).unwrap());
        assert!(gram_inverse_check(4, 6).unwrap());
    }

    #[test]
    fn catalan_numbers() {
        assert_eq!(catalan(0), BigUint::from(1u32));
        assert_eq!(catalan(3), BigUint::from(5u32));
        assert_eq!(catalan(10), BigUint::from(16796u32));
        // recurrence oracle C_{n+1} = sum_k C_k C_{n-k}
        for n in 0..10u32 {
            let direct = catalan(n + 1);
            let mut acc = BigUint::zero();
            for k in 0..=n {
                acc += catalan(k) * catalan(n - k);
            }
            assert_eq!(direct, acc);
        }
    }

    #[test]
    fn asymptotic_matches_exact_at_large_n() {
        let big = 100u32;
        for ct in [vec![1, 1], vec![2], vec![1, 1, 1], vec![2, 1], vec![3]] {
            let class = Partition::new(ct).unwrap();
            let n = class.weight();
            let exact = rational_to_f64(&weingarten_exact_class(n, big, &class).unwrap());
            let asym = weingarten_asymptotic_class(big, n, &class);
            assert!(
                (asym / exact - 1.0).abs() < 1e-3,
                "class {class}: {asym} vs {exact}"
            );
        }
        // identity of S_n is exactly N^-n at leading order
        let e3 = Permutation::identity(3);
        assert_eq!(weingarten_asymptotic(10, &e3), 1e-3);
        // a 3-cycle carries +Catalan(2) = 2 at leading order
        let three_cycle = Partition::new(vec![3]).unwrap();
        let lead = weingarten_asymptotic_class(10, 3, &three_cycle);
        assert!((lead * 1e5 - 2.0).abs() < 1e-12);
        // a transposition carries -Catalan(1) = -1
        let swap = Partition::new(vec![2]).unwrap();
        assert!((weingarten_asymptotic_class(10, 2, &swap) * 1e3 + 1.0).abs() < 1e-12);
    }

    #[test]
    fn polynomial_integrals_match_closed_forms() {
        let n = 5u32;
        assert_eq!(
            polynomial_integral(&[0], &[0], &[0], &[0], n).unwrap(),
            rat(1, 5)
        );
        // int |U11|^4 = 2/(N(N+1))
        assert_eq!(
            polynomial_integral(&[0, 0], &[0, 0], &[0, 0], &[0, 0], n).unwrap(),
            rat(2, 30)
        );
        // int |U11|^2 |U22|^2 = 1/(N^2-1); N=2 gives 1/3
        assert_eq!(
            polynomial_integral(&[0, 1], &[0, 1], &[0, 1], &[0, 1], n).unwrap(),
            rat(1, 24)
        );
        assert_eq!(
            polynomial_integral(&[0, 1], &[0, 1], &[0, 1], &[0, 1], 2).unwrap(),
            rat(1, 3)
        );
        // mismatched rows vanish
        assert_eq!(
            polynomial_integral(&[0], &[0], &[1], &[0], n).unwrap(),
            Rational::zero()
        );
    }

    #[test]
    fn vector_averages_reproduce_moment_formulas() {
        use VectorAxis::*;
        let n = 6u32;
        let nn = 6i64;
        assert_eq!(
            vector_polynomial_average(&[(0, Norm)], n).unwrap(),
            rat(2, nn)
        );
        assert_eq!(
            vector_polynomial_average(&[(0, Norm), (0, Norm)], n).unwrap(),
            rat(6, nn * (nn + 1))
        );
        assert_eq!(
            vector_polynomial_average(&[(0, Norm), (1, Norm)], n).unwrap(),
            rat(2 * (2 * nn - 1), (nn - 1) * nn * (nn + 1))
        );
        assert_eq!(
            vector_polynomial_average(&[(0, Z), (0, Z)], n).unwrap(),
            rat(2, nn * (nn + 1))
        );
        assert_eq!(
            vector_polynomial_average(&[(0, Z), (1, Z)], n).unwrap(),
            rat(-2, nn * (nn * nn - 1))
        );
        assert_eq!(
            vector_polynomial_average(&[(0, X), (1, Y)], n).unwrap(),
            Rational::zero()
        );
        assert_eq!(
            vector_polynomial_average(&[(0, X)], n).unwrap(),
            Rational::zero()
        );
    }
}
