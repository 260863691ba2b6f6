//! Analytic GWJ expressions for the unequal-set designs.
//!
//! Resolved combinations (weight `w(x) = x^m`):
//!
//! - uniform, power(θ), Pareto(α): minRSSU and maxRSSU
//! - exponential(λ): minRSSU
//! - PHF over any base: minRSSU; PRHF over any base: maxRSSU. These two reduce
//!   to beta expectations of the base kernel `Λ₀` with parameter `2θi − 1` and
//!   still need one quadrature per factor.
//!
//! Everything else reports "no closed form" (`Ok(None)`).

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::dist::{Distribution, Weight};
use crate::error::{GwjError, Result};
use crate::gwj::{propagate_product_error, Engine, GwjResult, Method, Scheme, SchemeSpec};
use crate::special::{self, beta, gamma, generalized_odd_product, stable_product};

/// Lookup key: family, weight exponent, design and set size.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormKey {
    pub dist: Distribution,
    pub m: f64,
    pub scheme: Scheme,
    pub n: u32,
}

impl ClosedFormKey {
    pub fn new(dist: &Distribution, w: &Weight, spec: SchemeSpec) -> Self {
        ClosedFormKey {
            dist: dist.clone(),
            m: w.exponent(),
            scheme: spec.scheme,
            n: spec.n,
        }
    }
}

fn half() -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(2))
}

fn require(cond: bool, what: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(GwjError::domain(what()))
    }
}

fn from_factors(factors: Vec<f64>) -> Result<GwjResult> {
    Ok(GwjResult {
        value: -stable_product(&half(), &factors)?,
        method: Method::ClosedForm,
        abs_error_estimate: 0.0,
        per_factor: factors,
    })
}

/// Per-factor closed form `i ↦ −2J^w(X_{r:k})` for `i = 1..=n`.
fn factor_table(n: u32, f: impl Fn(f64) -> Result<f64>) -> Result<Vec<f64>> {
    (1..=n).map(|i| f(i as f64)).collect()
}

/// Closed-form GWJ of the key, `Ok(None)` when no closed form is tabulated.
///
/// The engine is only used by the PHF/PRHF reductions, which integrate the
/// base kernel.
pub fn closed_form_gwj(key: &ClosedFormKey, engine: &Engine) -> Result<Option<GwjResult>> {
    let (m, n) = (key.m, key.n);
    if n == 0 {
        return Err(GwjError::domain("set size n must be ≥ 1"));
    }
    if !(m.is_finite() && m >= 0.0) {
        return Err(GwjError::domain(format!("weight exponent must be ≥ 0, got {m}")));
    }
    use Distribution as D;
    use Scheme::{MaxRssu, MinRssu};
    let r = match (&key.dist, key.scheme) {
        (D::Uniform01, MinRssu) => from_factors(factor_table(n, |i| Ok(i * i * beta(m + 1.0, 2.0 * i - 1.0)?))?)?,
        (D::Uniform01, MaxRssu) => from_factors(factor_table(n, |i| Ok(i * i / (m + 2.0 * i - 1.0)))?)?,
        (D::Power { theta }, MinRssu) => {
            let th = *theta;
            require(m + 2.0 * th - 1.0 > 0.0, || {
                format!("power minRSSU needs m + 2θ − 1 > 0 (θ = {th}, m = {m})")
            })?;
            let a = (m + th - 1.0) / th + 1.0;
            from_factors(factor_table(n, |i| Ok(i * i * th * beta(a, 2.0 * i - 1.0)?))?)?
        }
        (D::Power { theta }, MaxRssu) => {
            let th = *theta;
            require(m + 2.0 * th - 1.0 > 0.0, || {
                format!("power maxRSSU needs m + 2θ − 1 > 0 (θ = {th}, m = {m})")
            })?;
            from_factors(factor_table(n, |i| Ok(i * i * th * th / (2.0 * i * th + m - 1.0)))?)?
        }
        (D::Exponential { rate }, MinRssu) => {
            let lam = *rate;
            let g = gamma(m + 1.0);
            let per_factor = factor_table(n, |i| {
                Ok(i * i * lam.powf(1.0 - m) * g / (2.0 * i).powf(m + 1.0))
            })?;
            // −½·(λ^{1−m})ⁿ·(Γ(m+1)/2^{m+1})ⁿ·(n!)^{1−m}
            let nf = n as f64;
            let base = lam.powf(1.0 - m) * g / 2f64.powf(m + 1.0);
            let direct = -0.5 * base.powi(n as i32) * special::gamma(nf + 1.0).powf(1.0 - m);
            let value = if direct.is_finite() && direct != 0.0 {
                direct
            } else {
                let ln_nfact = special::ln_gamma(nf + 1.0);
                let ln = nf * (1.0 - m) * lam.ln() + nf * (g.ln() - (m + 1.0) * std::f64::consts::LN_2)
                    + (1.0 - m) * ln_nfact;
                -0.5 * ln.exp()
            };
            if !value.is_finite() {
                return Err(GwjError::Overflow("exponential minRSSU closed form overflows".into()));
            }
            GwjResult {
                value,
                method: Method::ClosedForm,
                abs_error_estimate: 0.0,
                per_factor,
            }
        }
        (D::Pareto { alpha }, MinRssu) => {
            let al = *alpha;
            require(2.0 * al - m + 1.0 > 0.0, || {
                format!("Pareto minRSSU needs 2α − m + 1 > 0 (α = {al}, m = {m})")
            })?;
            from_factors(factor_table(n, |i| Ok(i * i * al * al / (2.0 * i * al - m + 1.0)))?)?
        }
        (D::Pareto { alpha }, MaxRssu) => {
            let al = *alpha;
            require(m < 2.0 * al + 1.0, || {
                format!("Pareto maxRSSU needs m < 2α + 1 (α = {al}, m = {m})")
            })?;
            let b = (2.0 * al - m + 1.0) / al;
            from_factors(factor_table(n, |i| Ok(i * i * al * beta(2.0 * i - 1.0, b)?))?)?
        }
        (D::Phf { base, theta }, MinRssu) => proportional(engine, base, *theta, m, n, false)?,
        (D::Prhf { base, theta }, MaxRssu) => proportional(engine, base, *theta, m, n, true)?,
        _ => return Ok(None),
    };
    Ok(Some(r))
}

/// PHF minRSSU (`upper = false`) or PRHF maxRSSU (`upper = true`):
/// `−(n!)²θ²ⁿ / (2∏(2θi−1)) · ∏ E[Λ₀(B)]` with `B = B_{1,2θi−1}` or
/// `B_{2θi−1,1}` respectively.
fn proportional(engine: &Engine, base: &Distribution, theta: f64, m: f64, n: u32, upper: bool) -> Result<GwjResult> {
    generalized_odd_product(theta, n as u64)?;
    let w = if m == 0.0 { Weight::Constant } else { Weight::Power(m) };
    let mut expectations = Vec::with_capacity(n as usize);
    let mut errors = Vec::with_capacity(n as usize);
    let mut coefs = Vec::with_capacity(n as usize);
    for i in 1..=n {
        let k = 2.0 * theta * i as f64 - 1.0;
        let (a, b) = if upper { (k, 1.0) } else { (1.0, k) };
        let r = engine.beta_weighted_mean(base, &w, a, b)?;
        expectations.push(r.value);
        errors.push(r.abs_error);
        let fi = i as f64;
        coefs.push(fi * fi * theta * theta / k);
    }
    let per_factor: Vec<f64> = coefs.iter().zip(&expectations).map(|(c, e)| c * e).collect();
    let nf = special::factorial(n as u64);
    let pre = BigRational::from_integer((&nf * &nf).into()) * half();
    let theta_part: Vec<f64> = std::iter::repeat_n(theta * theta, n as usize)
        .chain((1..=n).map(|i| 1.0 / (2.0 * theta * i as f64 - 1.0)))
        .collect();
    let constant = stable_product(&pre, &theta_part)?;
    let c_rat = BigRational::from_float(constant).unwrap_or_else(|| BigRational::from_integer(0.into()));
    let value = -stable_product(&c_rat, &expectations)?;
    Ok(GwjResult {
        value,
        method: Method::ClosedForm,
        abs_error_estimate: propagate_product_error(&c_rat, &expectations, &errors),
        per_factor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(d: Distribution, m: f64, scheme: Scheme, n: u32) -> ClosedFormKey {
        ClosedFormKey { dist: d, m, scheme, n }
    }

    fn cf(k: ClosedFormKey) -> Option<f64> {
        closed_form_gwj(&k, &Engine::default()).unwrap().map(|r| r.value)
    }

    #[test]
    fn examples() {
        assert_eq!(cf(key(Distribution::Uniform01, 0.0, Scheme::MaxRssu, 1)), Some(-0.5));
        let v = cf(key(Distribution::exponential(1.0).unwrap(), 1.0, Scheme::MinRssu, 2)).unwrap();
        assert!((v + 1.0 / 32.0).abs() < 1e-15);
        // Quadrature truth for Pareto(2), m = 1, n = 2: factors 4/4 and 16/8.
        let v = cf(key(Distribution::pareto(2.0).unwrap(), 1.0, Scheme::MinRssu, 2)).unwrap();
        assert!((v + 1.0).abs() < 1e-14, "{v}");
    }

    #[test]
    fn unsupported_keys_are_none() {
        assert_eq!(cf(key(Distribution::Uniform01, 0.0, Scheme::Rss, 2)), None);
        assert_eq!(cf(key(Distribution::exponential(1.0).unwrap(), 0.0, Scheme::MaxRssu, 2)), None);
        let phf = Distribution::phf(Distribution::Uniform01, 2.0).unwrap();
        assert_eq!(cf(key(phf, 0.0, Scheme::MaxRssu, 2)), None);
    }

    #[test]
    fn invalid_regions_are_domain_errors() {
        let e = Engine::default();
        let bad = [
            key(Distribution::pareto(0.5).unwrap(), 2.0, Scheme::MaxRssu, 1),
            key(Distribution::pareto(0.5).unwrap(), 2.0, Scheme::MinRssu, 1),
            key(Distribution::power(0.5).unwrap(), 0.0, Scheme::MinRssu, 1),
            key(Distribution::phf(Distribution::Uniform01, 0.5).unwrap(), 0.0, Scheme::MinRssu, 1),
        ];
        for k in bad {
            assert!(matches!(closed_form_gwj(&k, &e), Err(GwjError::Domain(_))), "{k:?}");
        }
    }

    #[test]
    fn exponential_unweighted_reduction() {
        for lam in [0.5, 1.0, 2.0] {
            let mut fact = 1.0;
            for n in 1..=6u32 {
                fact *= n as f64;
                let v = cf(key(Distribution::exponential(lam).unwrap(), 0.0, Scheme::MinRssu, n)).unwrap();
                let expect = -fact * lam.powi(n as i32) / 2f64.powi(n as i32 + 1);
                assert!(((v - expect) / expect).abs() < 1e-13, "λ={lam} n={n}");
            }
        }
    }

    #[test]
    fn unit_theta_matches_base() {
        let e = Engine::default();
        for base in [Distribution::Uniform01, Distribution::pareto(2.0).unwrap(), Distribution::power(2.0).unwrap()] {
            for n in 1..=4 {
                let phf = Distribution::phf(base.clone(), 1.0).unwrap();
                let prhf = Distribution::prhf(base.clone(), 1.0).unwrap();
                let a = closed_form_gwj(&key(phf, 1.0, Scheme::MinRssu, n), &e).unwrap().unwrap().value;
                let b = closed_form_gwj(&key(base.clone(), 1.0, Scheme::MinRssu, n), &e).unwrap().unwrap().value;
                assert!(((a - b) / b).abs() < 1e-10, "{base} min n={n}: {a} vs {b}");
                let a = closed_form_gwj(&key(prhf, 1.0, Scheme::MaxRssu, n), &e).unwrap().unwrap().value;
                let b = closed_form_gwj(&key(base.clone(), 1.0, Scheme::MaxRssu, n), &e).unwrap().unwrap().value;
                assert!(((a - b) / b).abs() < 1e-10, "{base} max n={n}: {a} vs {b}");
            }
        }
    }
}
