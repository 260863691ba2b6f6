//! Exact combinatorics and the gamma/beta functions.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{GwjError, Result};

/// Largest argument sum for which integer beta values go through exact
/// big-integer arithmetic.
const EXACT_BETA_LIMIT: u64 = 170;

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// `Γ(x)`, exact (correctly rounded) at the positive integers up to 171.
pub fn gamma(x: f64) -> f64 {
    if x.fract() == 0.0 && (1.0..=171.0).contains(&x) {
        return factorial(x as u64 - 1).to_f64().unwrap_or(f64::INFINITY);
    }
    statrs::function::gamma::gamma(x)
}

fn as_small_int(x: f64) -> Option<u64> {
    (x.fract() == 0.0 && x >= 1.0 && x <= EXACT_BETA_LIMIT as f64).then_some(x as u64)
}

fn check_beta_args(a: f64, b: f64) -> Result<()> {
    if a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0 {
        Ok(())
    } else {
        Err(GwjError::domain(format!("beta function needs positive finite arguments, got ({a}, {b})")))
    }
}

/// `ln β(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    check_beta_args(a, b)?;
    Ok(beta(a, b)?.ln())
}

/// `β(a, b)`; exact for small integer arguments, log-gamma otherwise.
pub fn beta(a: f64, b: f64) -> Result<f64> {
    check_beta_args(a, b)?;
    if let (Some(ia), Some(ib)) = (as_small_int(a), as_small_int(b)) {
        if ia + ib <= EXACT_BETA_LIMIT {
            return Ok(ratio_to_f64(&inv_beta_int(ia, ib).recip()));
        }
    }
    let v = statrs::function::beta::ln_beta(a, b).exp();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(GwjError::Overflow(format!("β({a}, {b}) is not representable")))
    }
}

/// `1/β(a, b) = (a + b − 1)·C(a + b − 2, a − 1)` for positive integers.
pub fn inv_beta_int(a: u64, b: u64) -> BigRational {
    let n = BigUint::from(a + b - 1) * binomial(a + b - 2, a - 1);
    BigRational::from_integer(BigInt::from(n))
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for j in 0..k {
        acc = acc * (n - j) / (j + 1);
    }
    acc
}

/// `(2n − 1)!! = ∏_{i=1}^{n} (2i − 1)`; equals 1 for `n = 0`.
pub fn double_factorial_odd(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * (2 * i - 1))
}

/// `∏_{i=1}^{n} (2θi − 1)`; every factor must be positive.
pub fn generalized_odd_product(theta: f64, n: u64) -> Result<f64> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(GwjError::domain(format!("θ must be finite and > 0, got {theta}")));
    }
    if n == 0 {
        return Err(GwjError::domain("n must be ≥ 1"));
    }
    let factors = (1..=n)
        .map(|i| {
            let v = 2.0 * theta * i as f64 - 1.0;
            if v > 0.0 {
                Ok(v)
            } else {
                Err(GwjError::domain(format!(
                    "factor 2θi − 1 = {v} is not positive at i = {i}, θ = {theta}"
                )))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    stable_product(&BigRational::one(), &factors)
}

/// RSS constant `c_{i,n} = C(2i−2, i−1)·C(2n−2i, n−i) / C(2n−1, n−1)`.
pub fn coeff_c(i: u64, n: u64) -> Result<BigRational> {
    if i < 1 || i > n {
        return Err(GwjError::domain(format!("coeff_c needs 1 ≤ i ≤ n, got i = {i}, n = {n}")));
    }
    let num = binomial(2 * i - 2, i - 1) * binomial(2 * n - 2 * i, n - i);
    let den = binomial(2 * n - 1, n - 1);
    Ok(BigRational::new(num.into(), den.into()))
}

/// `Q_n = nⁿ·∏_{i=1}^{n} c_{i,n}`.
pub fn q_n(n: u64) -> Result<BigRational> {
    if n == 0 {
        return Err(GwjError::domain("n must be ≥ 1"));
    }
    let mut q = BigRational::from_integer(BigInt::from(BigUint::from(n).pow(n as u32)));
    for i in 1..=n {
        q *= coeff_c(i, n)?;
    }
    Ok(q)
}

/// `(n!)² / (2n − 1)!!`, the prefactor of the unequal-set designs.
pub fn unequal_set_prefactor(n: u64) -> BigRational {
    let f = factorial(n);
    BigRational::new((&f * &f).into(), double_factorial_odd(n).into())
}

fn biguint_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 60;
    (x >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of a positive rational without going through `f64`.
pub fn ratio_ln(r: &BigRational) -> f64 {
    let n = r.numer().magnitude();
    let d = r.denom().magnitude();
    biguint_ln(n) - biguint_ln(d)
}

/// Nearest `f64` to a positive rational (infinite when out of range).
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| ratio_ln(r).exp())
}

const DIRECT_LO: f64 = 1e-300;
const DIRECT_HI: f64 = 1e300;

/// `prefactor·∏ factors` for nonnegative factors. Multiplies directly when
/// every operand is comfortably in range, otherwise accumulates logarithms.
pub fn stable_product(prefactor: &BigRational, factors: &[f64]) -> Result<f64> {
    if let Some(bad) = factors.iter().find(|f| !(f.is_finite() && **f >= 0.0)) {
        return Err(GwjError::domain(format!("product factor {bad} is not a finite nonnegative number")));
    }
    if factors.iter().any(|&f| f == 0.0) || prefactor.is_zero() {
        return Ok(0.0);
    }
    let pre = ratio_to_f64(prefactor);
    let in_range = |v: f64| (DIRECT_LO..=DIRECT_HI).contains(&v.abs());
    if in_range(pre) && factors.iter().all(|&f| in_range(f)) {
        let v = factors.iter().fold(pre, |acc, f| acc * f);
        if v.is_finite() && v != 0.0 {
            return Ok(v);
        }
    }
    let ln = ratio_ln(prefactor) + factors.iter().map(|f| f.ln()).sum::<f64>();
    let v = ln.exp();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(GwjError::Overflow(format!("product overflows (log value {ln})")))
    }
}
