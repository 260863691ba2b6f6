//! GWJ of a single law and of SRS, RSS, minRSSU and maxRSSU samples.
//!
//! Each design's value is `−½·C·∏ᵢ E[Λ(B_{aᵢ,bᵢ})]` for a design constant `C`
//! and beta parameters `(aᵢ, bᵢ)`:
//!
//! | design  | `C`                 | `(aᵢ, bᵢ)`           |
//! |---------|---------------------|----------------------|
//! | SRS     | 1                   | (1, 1)               |
//! | RSS     | `Q_n`               | (2i−1, 2n−2i+1)      |
//! | minRSSU | `(n!)²/(2n−1)!!`    | (1, 2i−1)            |
//! | maxRSSU | `(n!)²/(2n−1)!!`    | (2i−1, 1)            |
//!
//! A second, independent route integrates squared order-statistic densities
//! in the original variable ([`Engine::gwj_order_statistics`]).

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dist::{Distribution, Weight};
use crate::error::{GwjError, Result};
use crate::quad::{integrate_support_gap, integrate_unit, QuadConfig, QuadResult};
use crate::special::{self, ratio_to_f64, stable_product};

pub use crate::special::{coeff_c, double_factorial_odd, generalized_odd_product, q_n};

/// Sampling design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Srs,
    Rss,
    MinRssu,
    MaxRssu,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Srs, Scheme::Rss, Scheme::MinRssu, Scheme::MaxRssu];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Srs => "srs",
            Scheme::Rss => "rss",
            Scheme::MinRssu => "minrssu",
            Scheme::MaxRssu => "maxrssu",
        }
    }

    /// Beta parameters of the `i`-th factor (1-based) at set size `n`.
    pub fn beta_params(&self, i: u32, n: u32) -> (f64, f64) {
        let (i, n) = (i as f64, n as f64);
        match self {
            Scheme::Srs => (1.0, 1.0),
            Scheme::Rss => (2.0 * i - 1.0, 2.0 * n - 2.0 * i + 1.0),
            Scheme::MinRssu => (1.0, 2.0 * i - 1.0),
            Scheme::MaxRssu => (2.0 * i - 1.0, 1.0),
        }
    }

    /// `(r, k)`: the `i`-th retained unit is the `r`-th smallest of `k`.
    pub fn order_statistic(&self, i: u32, n: u32) -> (u32, u32) {
        match self {
            Scheme::Srs => (1, 1),
            Scheme::Rss => (i, n),
            Scheme::MinRssu => (1, i),
            Scheme::MaxRssu => (i, i),
        }
    }

    /// Exact design constant `C` (see module docs).
    pub fn constant(&self, n: u32) -> Result<BigRational> {
        match self {
            Scheme::Srs => Ok(BigRational::one()),
            Scheme::Rss => q_n(n as u64),
            Scheme::MinRssu | Scheme::MaxRssu => Ok(special::unequal_set_prefactor(n as u64)),
        }
    }

    /// Exact multiplier turning `E[Λ(B)]` of factor `i` into `−2J^w` of the
    /// retained order statistic.
    pub fn factor_multiplier(&self, i: u32, n: u32) -> Result<BigRational> {
        let int = |v: u64| BigRational::from_integer(BigInt::from(v));
        let i64_ = i as u64;
        Ok(match self {
            Scheme::Srs => BigRational::one(),
            Scheme::Rss => int(n as u64) * coeff_c(i64_, n as u64)?,
            Scheme::MinRssu | Scheme::MaxRssu => {
                BigRational::new(BigInt::from(i64_ * i64_), BigInt::from(2 * i64_ - 1))
            }
        })
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = GwjError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "srs" => Ok(Scheme::Srs),
            "rss" => Ok(Scheme::Rss),
            "minrssu" | "min" => Ok(Scheme::MinRssu),
            "maxrssu" | "max" => Ok(Scheme::MaxRssu),
            _ => Err(GwjError::Parse(format!(
                "unknown scheme '{s}' (expected srs, rss, minrssu or maxrssu)"
            ))),
        }
    }
}

impl Serialize for Scheme {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Scheme {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// A design together with its set size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SchemeSpec {
    pub scheme: Scheme,
    pub n: u32,
}

impl SchemeSpec {
    pub fn new(scheme: Scheme, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(GwjError::domain("set size n must be ≥ 1"));
        }
        Ok(SchemeSpec { scheme, n })
    }
}

/// How a value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ClosedForm => "closed",
            Method::Quadrature => "quad",
            Method::MonteCarlo => "mc",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Method {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// A GWJ value with provenance and error metadata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GwjResult {
    pub value: f64,
    pub method: Method,
    pub abs_error_estimate: f64,
    /// The factors `−2J^w(·)` of the retained units; `value = −½∏ per_factor`.
    pub per_factor: Vec<f64>,
}

/// Quadrature-backed GWJ evaluator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Engine {
    pub quad: QuadConfig,
    /// Largest accepted set size.
    pub n_cap: u32,
}

impl Default for Engine {
    fn default() -> Self {
        Engine {
            quad: QuadConfig::default(),
            n_cap: 50,
        }
    }
}

/// First-order error of `scale·∏ values` given per-value absolute errors.
pub(crate) fn propagate_product_error(scale: &BigRational, values: &[f64], errors: &[f64]) -> f64 {
    let mut total = 0.0;
    for k in 0..values.len() {
        let others: Vec<f64> = values
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, v)| *v)
            .collect();
        let partial = stable_product(scale, &others).unwrap_or(f64::INFINITY);
        total += partial * errors[k];
    }
    total
}

impl Engine {
    pub fn new(quad: QuadConfig) -> Self {
        Engine {
            quad,
            ..Engine::default()
        }
    }

    fn check_n(&self, n: u32) -> Result<()> {
        if n == 0 {
            Err(GwjError::domain("set size n must be ≥ 1"))
        } else if n > self.n_cap {
            Err(GwjError::domain(format!("set size {n} exceeds the cap {}", self.n_cap)))
        } else {
            Ok(())
        }
    }

    /// `∫₀¹ Λ(u)·uᵖ(1−u)^q du` for `p, q > −1`.
    pub fn lambda_moment(&self, d: &Distribution, w: &Weight, p: f64, q: f64) -> Result<QuadResult> {
        let mut overflow = false;
        let r = integrate_unit(
            |u, t| {
                let lam = d.lambda_c(w, u, t);
                if !lam.is_finite() {
                    overflow = true;
                }
                if lam == 0.0 {
                    0.0
                } else {
                    lam * pow0(u, p) * pow0(t, q)
                }
            },
            &self.quad,
        );
        match r {
            Err(GwjError::Integration { .. }) if overflow => Err(GwjError::Overflow(format!(
                "Λ for {d} with weight {w} is not finite inside (0, 1)"
            ))),
            other => other,
        }
    }

    /// `E[Λ(B_{a,b})]`: the unnormalised beta kernel integrated against Λ and
    /// divided by `β(a, b)`.
    pub fn beta_weighted_mean(&self, d: &Distribution, w: &Weight, a: f64, b: f64) -> Result<QuadResult> {
        let beta = special::beta(a, b)?;
        let r = self.lambda_moment(d, w, a - 1.0, b - 1.0)?;
        Ok(QuadResult {
            value: r.value / beta,
            abs_error: r.abs_error / beta,
            ..r
        })
    }

    /// `J^w(X) = −½∫₀¹ Λ(u) du`.
    pub fn gwj_point(&self, d: &Distribution, w: &Weight) -> Result<GwjResult> {
        self.gwj(d, w, SchemeSpec { scheme: Scheme::Srs, n: 1 })
    }

    /// The beta expectations `E[Λ(B_{aᵢ,bᵢ})]` for every factor of a design.
    pub fn beta_expectations(&self, d: &Distribution, w: &Weight, spec: SchemeSpec) -> Result<Vec<QuadResult>> {
        self.check_n(spec.n)?;
        if spec.scheme == Scheme::Srs {
            let r = self.beta_weighted_mean(d, w, 1.0, 1.0)?;
            return Ok(vec![r; spec.n as usize]);
        }
        (1..=spec.n)
            .into_par_iter()
            .map(|i| {
                let (a, b) = spec.scheme.beta_params(i, spec.n);
                self.beta_weighted_mean(d, w, a, b)
            })
            .collect()
    }

    /// GWJ of the design through the beta-expectation product.
    pub fn gwj(&self, d: &Distribution, w: &Weight, spec: SchemeSpec) -> Result<GwjResult> {
        let expectations = self.beta_expectations(d, w, spec)?;
        let values: Vec<f64> = expectations.iter().map(|r| r.value).collect();
        let errors: Vec<f64> = expectations.iter().map(|r| r.abs_error).collect();
        let half = BigRational::new(1.into(), 2.into());
        let scale = spec.scheme.constant(spec.n)? * &half;
        let value = -stable_product(&scale, &values)?;
        let abs_error_estimate = propagate_product_error(&scale, &values, &errors);
        let per_factor = (1..=spec.n)
            .zip(&values)
            .map(|(i, e)| Ok(ratio_to_f64(&spec.scheme.factor_multiplier(i, spec.n)?) * e))
            .collect::<Result<Vec<_>>>()?;
        Ok(GwjResult {
            value,
            method: Method::Quadrature,
            abs_error_estimate,
            per_factor,
        })
    }

    pub fn gwj_srs(&self, d: &Distribution, w: &Weight, n: u32) -> Result<GwjResult> {
        self.gwj(d, w, SchemeSpec { scheme: Scheme::Srs, n })
    }

    pub fn gwj_rss(&self, d: &Distribution, w: &Weight, n: u32) -> Result<GwjResult> {
        self.gwj(d, w, SchemeSpec { scheme: Scheme::Rss, n })
    }

    pub fn gwj_minrssu(&self, d: &Distribution, w: &Weight, n: u32) -> Result<GwjResult> {
        self.gwj(d, w, SchemeSpec { scheme: Scheme::MinRssu, n })
    }

    pub fn gwj_maxrssu(&self, d: &Distribution, w: &Weight, n: u32) -> Result<GwjResult> {
        self.gwj(d, w, SchemeSpec { scheme: Scheme::MaxRssu, n })
    }

    /// `−2J^w(X_{r:k}) = ∫ w(x)·f_{r:k}(x)² dx`, integrated over the support
    /// of `X` using the order-statistic density directly.
    pub fn order_statistic_factor(&self, d: &Distribution, w: &Weight, r: u32, k: u32) -> Result<QuadResult> {
        if r == 0 || r > k {
            return Err(GwjError::domain(format!("order statistic {r}:{k} is undefined")));
        }
        // ln of k!/((r−1)!(k−r)!) = ln(k·C(k−1, r−1))
        let ln_c = ((k as f64).ln())
            + special::ratio_ln(&BigRational::from_integer(
                special::binomial((k - 1) as u64, (r - 1) as u64).into(),
            ));
        let (rm1, kmr) = ((r - 1) as f64, (k - r) as f64);
        integrate_support_gap(
            &d.support(),
            |x, gap| {
                let (lc, ls, lp) = d.ln_parts(x, gap);
                let dens2 = (2.0 * (ln_c + mul0(rm1, lc) + mul0(kmr, ls) + lp)).exp();
                if dens2 == 0.0 {
                    0.0
                } else {
                    w.eval(x) * dens2
                }
            },
            &self.quad,
        )
    }

    /// GWJ of the design as `−½∏ −2J^w(X_{rᵢ:kᵢ})`, each factor integrated in
    /// the original variable. Independent of the beta-expectation route.
    pub fn gwj_order_statistics(&self, d: &Distribution, w: &Weight, spec: SchemeSpec) -> Result<GwjResult> {
        self.check_n(spec.n)?;
        let factors = (1..=spec.n)
            .into_par_iter()
            .map(|i| {
                let (r, k) = spec.scheme.order_statistic(i, spec.n);
                self.order_statistic_factor(d, w, r, k)
            })
            .collect::<Result<Vec<_>>>()?;
        let values: Vec<f64> = factors.iter().map(|r| r.value).collect();
        let errors: Vec<f64> = factors.iter().map(|r| r.abs_error).collect();
        let half = BigRational::new(1.into(), 2.into());
        Ok(GwjResult {
            value: -stable_product(&half, &values)?,
            method: Method::Quadrature,
            abs_error_estimate: propagate_product_error(&half, &values, &errors),
            per_factor: values,
        })
    }
}

#[inline]
fn pow0(x: f64, p: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else {
        x.powf(p)
    }
}

#[inline]
fn mul0(c: f64, l: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        c * l
    }
}
