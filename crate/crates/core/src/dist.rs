//! Parametric distribution catalog and weight functions.
//!
//! Every downstream formula is written in terms of the weighted
//! quantile-density kernel `Λ(u) = w(F⁻¹(u))·f(F⁻¹(u))`. Near `u = 1` the
//! complement `1 − u` cannot be recovered from `u` in double precision, so the
//! internal evaluation paths take the pair `(u, 1 − u)` explicitly and every
//! family computes its quantile and quantile-density from whichever of the two
//! is numerically appropriate.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{GwjError, Result};
use crate::quad::Gap;

/// Closed support interval `[lower, upper]`; `upper` may be `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub lower: f64,
    pub upper: f64,
}

impl Support {
    pub fn is_bounded(&self) -> bool {
        self.upper.is_finite()
    }
}

/// A continuous law on a nonnegative support.
///
/// Construct through the checked constructors ([`Distribution::power`],
/// [`Distribution::phf`], ...) or by parsing a spec string such as
/// `phf:exp:2:0.5`.
#[derive(Debug, Clone, PartialEq)]
pub enum Distribution {
    /// Uniform on (0, 1).
    Uniform01,
    /// `F(x) = x^θ` on (0, 1).
    Power { theta: f64 },
    /// `F(x) = 1 − e^{−λx}` on (0, ∞).
    Exponential { rate: f64 },
    /// `F(x) = 1 − x^{−α}` on (1, ∞).
    Pareto { alpha: f64 },
    /// Proportional hazard family: survival `(1 − F₀)^θ`.
    Phf { base: Box<Distribution>, theta: f64 },
    /// Proportional reversed hazard family: cdf `F₀^θ`.
    Prhf { base: Box<Distribution>, theta: f64 },
    /// `scale·X + shift` for `X ~ base`; used for location/scale comparisons.
    Affine {
        base: Box<Distribution>,
        scale: f64,
        shift: f64,
    },
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(GwjError::domain(format!("{name} must be finite and > 0, got {v}")))
    }
}

/// `x^p`, with the convention `x^0 = 1` even when `x` is 0 or infinite.
#[inline]
fn powr(x: f64, p: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else {
        x.powf(p)
    }
}

/// `c·l` with `0·(±∞) = 0`.
#[inline]
fn scaled(c: f64, l: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        c * l
    }
}

/// `(ln u, ln t)` for a complementary pair `t = 1 − u`, each taken from the
/// member that carries full precision.
#[inline]
fn ln_pair(u: f64, t: f64) -> (f64, f64) {
    if u <= t {
        (u.ln(), (-u).ln_1p())
    } else {
        ((-t).ln_1p(), t.ln())
    }
}

impl Distribution {
    pub fn uniform() -> Self {
        Distribution::Uniform01
    }

    pub fn power(theta: f64) -> Result<Self> {
        Ok(Distribution::Power {
            theta: positive("power θ", theta)?,
        })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Ok(Distribution::Exponential {
            rate: positive("exponential λ", rate)?,
        })
    }

    pub fn pareto(alpha: f64) -> Result<Self> {
        Ok(Distribution::Pareto {
            alpha: positive("Pareto α", alpha)?,
        })
    }

    pub fn phf(base: Distribution, theta: f64) -> Result<Self> {
        Ok(Distribution::Phf {
            base: Box::new(base),
            theta: positive("PHF θ", theta)?,
        })
    }

    pub fn prhf(base: Distribution, theta: f64) -> Result<Self> {
        Ok(Distribution::Prhf {
            base: Box::new(base),
            theta: positive("PRHF θ", theta)?,
        })
    }

    /// `scale·X + shift`. The transformed support must stay nonnegative so that
    /// power weights remain defined.
    pub fn affine(base: Distribution, scale: f64, shift: f64) -> Result<Self> {
        let scale = positive("affine scale", scale)?;
        if !shift.is_finite() {
            return Err(GwjError::domain("affine shift must be finite"));
        }
        let lower = scale * base.support().lower + shift;
        if lower < 0.0 {
            return Err(GwjError::domain(format!(
                "affine transform moves the support below 0 (lower endpoint {lower})"
            )));
        }
        Ok(Distribution::Affine {
            base: Box::new(base),
            scale,
            shift,
        })
    }

    pub fn support(&self) -> Support {
        match self {
            Distribution::Uniform01 | Distribution::Power { .. } => Support {
                lower: 0.0,
                upper: 1.0,
            },
            Distribution::Exponential { .. } => Support {
                lower: 0.0,
                upper: f64::INFINITY,
            },
            Distribution::Pareto { .. } => Support {
                lower: 1.0,
                upper: f64::INFINITY,
            },
            Distribution::Phf { base, .. } | Distribution::Prhf { base, .. } => base.support(),
            Distribution::Affine { base, scale, shift } => {
                let s = base.support();
                Support {
                    lower: scale * s.lower + shift,
                    upper: scale * s.upper + shift,
                }
            }
        }
    }

    /// `F⁻¹(u)` given `u` and its exact complement `t = 1 − u`.
    pub(crate) fn quantile_c(&self, u: f64, t: f64) -> f64 {
        match self {
            Distribution::Uniform01 => u,
            Distribution::Power { theta } => u.powf(1.0 / theta),
            Distribution::Exponential { rate } => -ln_pair(u, t).1 / rate,
            Distribution::Pareto { alpha } => t.powf(-1.0 / alpha),
            Distribution::Phf { base, theta } => {
                let lt = ln_pair(u, t).1 / theta;
                base.quantile_c(-lt.exp_m1(), lt.exp())
            }
            Distribution::Prhf { base, theta } => {
                let lu = ln_pair(u, t).0 / theta;
                base.quantile_c(lu.exp(), -lu.exp_m1())
            }
            Distribution::Affine { base, scale, shift } => scale * base.quantile_c(u, t) + shift,
        }
    }

    /// `f(F⁻¹(u))` given `u` and `t = 1 − u`. At `u ∈ {0, 1}` this is the
    /// one-sided limit, possibly infinite.
    pub(crate) fn density_at_quantile_c(&self, u: f64, t: f64) -> f64 {
        match self {
            Distribution::Uniform01 => 1.0,
            Distribution::Power { theta } => theta * powr(u, (theta - 1.0) / theta),
            Distribution::Exponential { rate } => rate * t,
            Distribution::Pareto { alpha } => alpha * t.powf((alpha + 1.0) / alpha),
            Distribution::Phf { base, theta } => {
                let lt = ln_pair(u, t).1 / theta;
                theta * base.density_at_quantile_c(-lt.exp_m1(), lt.exp())
                    * powr(t, (theta - 1.0) / theta)
            }
            Distribution::Prhf { base, theta } => {
                let lu = ln_pair(u, t).0 / theta;
                theta * base.density_at_quantile_c(lu.exp(), -lu.exp_m1())
                    * powr(u, (theta - 1.0) / theta)
            }
            Distribution::Affine { base, scale, .. } => base.density_at_quantile_c(u, t) / scale,
        }
    }

    /// `Λ(u) = w(F⁻¹(u))·f(F⁻¹(u))` on the `(u, 1 − u)` pair; raw, may be
    /// non-finite.
    pub(crate) fn lambda_c(&self, w: &Weight, u: f64, t: f64) -> f64 {
        if w.is_constant() {
            return self.density_at_quantile_c(u, t);
        }
        let (x, f) = self.quantile_density_c(u, t);
        if f == 0.0 {
            return 0.0;
        }
        w.eval(x) * f
    }

    /// `(F⁻¹(u), f(F⁻¹(u)))` sharing the work of nested laws.
    fn quantile_density_c(&self, u: f64, t: f64) -> (f64, f64) {
        match self {
            Distribution::Phf { base, theta } => {
                let lt = ln_pair(u, t).1 / theta;
                let (x, f) = base.quantile_density_c(-lt.exp_m1(), lt.exp());
                (x, theta * f * powr(t, (theta - 1.0) / theta))
            }
            Distribution::Prhf { base, theta } => {
                let lu = ln_pair(u, t).0 / theta;
                let (x, f) = base.quantile_density_c(lu.exp(), -lu.exp_m1());
                (x, theta * f * powr(u, (theta - 1.0) / theta))
            }
            Distribution::Affine { base, scale, shift } => {
                let (x, f) = base.quantile_density_c(u, t);
                (scale * x + shift, f / scale)
            }
            _ => (self.quantile_c(u, t), self.density_at_quantile_c(u, t)),
        }
    }

    pub(crate) fn ln_cdf(&self, x: f64) -> f64 {
        match self {
            Distribution::Uniform01 => x.ln(),
            Distribution::Power { theta } => theta * x.ln(),
            Distribution::Exponential { rate } => (-(-rate * x).exp_m1()).ln(),
            Distribution::Pareto { alpha } => (-(-alpha * x.ln()).exp_m1()).ln(),
            Distribution::Phf { base, theta } => (-(theta * base.ln_sf(x)).exp_m1()).ln(),
            Distribution::Prhf { base, theta } => theta * base.ln_cdf(x),
            Distribution::Affine { base, scale, shift } => base.ln_cdf((x - shift) / scale),
        }
    }

    pub(crate) fn ln_sf(&self, x: f64) -> f64 {
        match self {
            Distribution::Uniform01 => (-x).ln_1p(),
            Distribution::Power { theta } => (-(theta * x.ln()).exp_m1()).ln(),
            Distribution::Exponential { rate } => -rate * x,
            Distribution::Pareto { alpha } => -alpha * x.ln(),
            Distribution::Phf { base, theta } => theta * base.ln_sf(x),
            Distribution::Prhf { base, theta } => (-(theta * base.ln_cdf(x)).exp_m1()).ln(),
            Distribution::Affine { base, scale, shift } => base.ln_sf((x - shift) / scale),
        }
    }

    /// `(ln F, ln S, ln f)` at `x`. Next to a finite endpoint the parts are
    /// computed from the exact gap instead of `x`.
    pub(crate) fn ln_parts(&self, x: f64, gap: Gap) -> (f64, f64, f64) {
        let s = self.support();
        match gap {
            Gap::Lower(h) if s.lower.is_finite() => self.ln_parts_side(true, h),
            Gap::Upper(g) if s.upper.is_finite() => self.ln_parts_side(false, g),
            _ => (self.ln_cdf(x), self.ln_sf(x), self.ln_pdf(x)),
        }
    }

    /// Parts at distance `g` from the lower (`lower = true`) or upper
    /// endpoint. Exponential and Pareto laws have only a lower endpoint.
    fn ln_parts_side(&self, lower: bool, g: f64) -> (f64, f64, f64) {
        let one_minus = |l: f64| (-l.exp_m1()).ln();
        match self {
            Distribution::Uniform01 => {
                let (lx, lc) = if lower { (g.ln(), (-g).ln_1p()) } else { ((-g).ln_1p(), g.ln()) };
                (lx, lc, 0.0)
            }
            Distribution::Power { theta } => {
                let lx = if lower { g.ln() } else { (-g).ln_1p() };
                (theta * lx, one_minus(theta * lx), theta.ln() + scaled(theta - 1.0, lx))
            }
            Distribution::Exponential { rate } => (one_minus(-rate * g), -rate * g, rate.ln() - rate * g),
            Distribution::Pareto { alpha } => {
                let lx = g.ln_1p();
                (one_minus(-alpha * lx), -alpha * lx, alpha.ln() - (alpha + 1.0) * lx)
            }
            Distribution::Phf { base, theta } => {
                let (_, ls, lp) = base.ln_parts_side(lower, g);
                (one_minus(theta * ls), theta * ls, theta.ln() + lp + scaled(theta - 1.0, ls))
            }
            Distribution::Prhf { base, theta } => {
                let (lc, _, lp) = base.ln_parts_side(lower, g);
                (theta * lc, one_minus(theta * lc), theta.ln() + lp + scaled(theta - 1.0, lc))
            }
            Distribution::Affine { base, scale, .. } => {
                let (lc, ls, lp) = base.ln_parts_side(lower, g / scale);
                (lc, ls, lp - scale.ln())
            }
        }
    }

    /// Cumulative probability `F(x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        let s = self.support();
        if x <= s.lower {
            0.0
        } else if x >= s.upper {
            1.0
        } else {
            self.ln_cdf(x).exp()
        }
    }

    /// Survival probability `1 − F(x)`, computed without cancellation.
    pub fn sf(&self, x: f64) -> f64 {
        let s = self.support();
        if x <= s.lower {
            1.0
        } else if x >= s.upper {
            0.0
        } else {
            self.ln_sf(x).exp()
        }
    }

    pub(crate) fn ln_pdf(&self, x: f64) -> f64 {
        match self {
            Distribution::Uniform01 => 0.0,
            Distribution::Power { theta } => theta.ln() + scaled(theta - 1.0, x.ln()),
            Distribution::Exponential { rate } => rate.ln() - rate * x,
            Distribution::Pareto { alpha } => alpha.ln() - (alpha + 1.0) * x.ln(),
            Distribution::Phf { base, theta } => {
                theta.ln() + base.ln_pdf(x) + scaled(theta - 1.0, base.ln_sf(x))
            }
            Distribution::Prhf { base, theta } => {
                theta.ln() + base.ln_pdf(x) + scaled(theta - 1.0, base.ln_cdf(x))
            }
            Distribution::Affine { base, scale, shift } => base.ln_pdf((x - shift) / scale) - scale.ln(),
        }
    }

    /// Density formula without endpoint handling; may be non-finite at an
    /// endpoint.
    pub(crate) fn pdf_raw(&self, x: f64) -> f64 {
        match self {
            Distribution::Uniform01 => 1.0,
            Distribution::Power { theta } => theta * powr(x, theta - 1.0),
            Distribution::Exponential { rate } => rate * (-rate * x).exp(),
            Distribution::Pareto { alpha } => alpha * x.powf(-alpha - 1.0),
            _ => self.ln_pdf(x).exp(),
        }
    }

    /// Density `f(x)`. Zero outside the support; at an endpoint the one-sided
    /// limit is returned when it is finite, otherwise a domain error.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        let s = self.support();
        if x.is_nan() {
            return Err(GwjError::domain("density at NaN"));
        }
        if x < s.lower || x > s.upper {
            return Ok(0.0);
        }
        let v = self.pdf_raw(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(GwjError::domain(format!(
                "density of {self} has no finite limit at x = {x}"
            )))
        }
    }

    /// `F⁻¹(u)` for `u ∈ (0, 1)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        check_open_unit(u)?;
        Ok(self.quantile_c(u, 1.0 - u))
    }

    /// `f(F⁻¹(u))` for `u ∈ (0, 1)`.
    pub fn density_at_quantile(&self, u: f64) -> Result<f64> {
        check_open_unit(u)?;
        Ok(self.density_at_quantile_c(u, 1.0 - u))
    }

    /// The weighted quantile-density kernel `Λ(u) = w(F⁻¹(u))·f(F⁻¹(u))`.
    pub fn lambda_w(&self, w: &Weight, u: f64) -> Result<f64> {
        check_open_unit(u)?;
        let v = self.lambda_c(w, u, 1.0 - u);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(GwjError::Overflow(format!(
                "Λ for {self} with weight {w} is not finite at u = {u}"
            )))
        }
    }

    /// Hazard rate `f(x)/(1 − F(x))`. Zero below the support.
    pub fn hazard_rate(&self, x: f64) -> Result<f64> {
        let s = self.support();
        if x.is_nan() || x >= s.upper {
            return Err(GwjError::domain(format!(
                "hazard rate of {self} is undefined at x = {x} (right endpoint {})",
                s.upper
            )));
        }
        if x < s.lower {
            return Ok(0.0);
        }
        let sf = self.sf(x);
        let f = self.pdf(x)?;
        if sf <= 0.0 {
            return Err(GwjError::domain(format!("survival of {self} vanishes at x = {x}")));
        }
        Ok(f / sf)
    }

    /// Density at the left support endpoint, as a one-sided limit (`f(0)` for
    /// the catalog families that start at 0; 0 when the support starts later).
    pub fn density_at_origin(&self) -> f64 {
        if self.support().lower > 0.0 {
            0.0
        } else {
            self.density_at_quantile_c(0.0, 1.0)
        }
    }

    /// Supremum of the density when the catalog knows it analytically.
    pub fn density_sup(&self) -> Option<f64> {
        match self {
            Distribution::Uniform01 => Some(1.0),
            Distribution::Power { theta } => Some(if *theta >= 1.0 { *theta } else { f64::INFINITY }),
            Distribution::Exponential { rate } => Some(*rate),
            Distribution::Pareto { alpha } => Some(*alpha),
            Distribution::Phf { .. } | Distribution::Prhf { .. } => None,
            Distribution::Affine { base, scale, .. } => base.density_sup().map(|m| m / scale),
        }
    }

    /// Supremum of the hazard rate when the catalog knows it analytically.
    pub fn hazard_sup(&self) -> Option<f64> {
        match self {
            Distribution::Uniform01 | Distribution::Power { .. } => Some(f64::INFINITY),
            Distribution::Exponential { rate } => Some(*rate),
            Distribution::Pareto { alpha } => Some(*alpha),
            Distribution::Phf { base, theta } => base.hazard_sup().map(|h| theta * h),
            Distribution::Prhf { .. } => None,
            Distribution::Affine { base, scale, .. } => base.hazard_sup().map(|h| h / scale),
        }
    }
}

fn check_open_unit(u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(GwjError::domain(format!("probability must lie in (0, 1), got {u}")))
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Uniform01 => write!(f, "uniform"),
            Distribution::Power { theta } => write!(f, "power:{theta}"),
            Distribution::Exponential { rate } => write!(f, "exp:{rate}"),
            Distribution::Pareto { alpha } => write!(f, "pareto:{alpha}"),
            Distribution::Phf { base, theta } => write!(f, "phf:{base}:{theta}"),
            Distribution::Prhf { base, theta } => write!(f, "prhf:{base}:{theta}"),
            Distribution::Affine { base, scale, shift } => write!(f, "affine:{base}:{scale}:{shift}"),
        }
    }
}

fn parse_num(s: &str, what: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| GwjError::Parse(format!("invalid {what} '{s}'")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(GwjError::Parse(format!("{what} must be finite, got '{s}'")))
    }
}

fn reparse(e: GwjError) -> GwjError {
    match e {
        GwjError::Domain(m) => GwjError::Parse(m),
        other => other,
    }
}

impl FromStr for Distribution {
    type Err = GwjError;

    /// Grammar: `uniform | power:θ | exp:λ | pareto:α | phf:BASE:θ |
    /// prhf:BASE:θ | affine:BASE:SCALE:SHIFT`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (s, None),
        };
        fn need<'a>(r: Option<&'a str>, s: &str) -> Result<&'a str> {
            r.filter(|r| !r.is_empty())
                .ok_or_else(|| GwjError::Parse(format!("missing parameters in '{s}'")))
        }
        let wrapped = |r: &str| -> Result<(Distribution, f64)> {
            let (base, p) = r
                .rsplit_once(':')
                .ok_or_else(|| GwjError::Parse(format!("expected '{head}:BASE:THETA', got '{s}'")))?;
            Ok((base.parse()?, parse_num(p, "θ")?))
        };
        match head.to_ascii_lowercase().as_str() {
            "uniform" | "unif" if rest.is_none() => Ok(Distribution::Uniform01),
            "power" => Distribution::power(parse_num(need(rest, s)?, "θ")?).map_err(reparse),
            "exp" | "exponential" => Distribution::exponential(parse_num(need(rest, s)?, "λ")?).map_err(reparse),
            "pareto" => Distribution::pareto(parse_num(need(rest, s)?, "α")?).map_err(reparse),
            "phf" => {
                let (b, th) = wrapped(need(rest, s)?)?;
                Distribution::phf(b, th).map_err(reparse)
            }
            "prhf" => {
                let (b, th) = wrapped(need(rest, s)?)?;
                Distribution::prhf(b, th).map_err(reparse)
            }
            "affine" => {
                let mut it = need(rest, s)?.rsplitn(3, ':');
                let (shift, scale, base) = match (it.next(), it.next(), it.next()) {
                    (Some(sh), Some(sc), Some(b)) => (sh, sc, b),
                    _ => {
                        return Err(GwjError::Parse(format!(
                            "expected 'affine:BASE:SCALE:SHIFT', got '{s}'"
                        )))
                    }
                };
                Distribution::affine(base.parse()?, parse_num(scale, "scale")?, parse_num(shift, "shift")?)
                    .map_err(reparse)
            }
            _ => Err(GwjError::Parse(format!("unknown distribution '{s}'"))),
        }
    }
}

impl Serialize for Distribution {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Distribution {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Nonnegative weight function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    /// `w(x) = 1`.
    Constant,
    /// `w(x) = x^m`, `m ≥ 0`.
    Power(f64),
}

impl Weight {
    pub fn power(m: f64) -> Result<Self> {
        if m.is_finite() && m >= 0.0 {
            Ok(Weight::Power(m))
        } else {
            Err(GwjError::domain(format!("weight exponent must be finite and ≥ 0, got {m}")))
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Weight::Constant => 1.0,
            Weight::Power(m) if m == 1.0 => x,
            Weight::Power(m) if m == 2.0 => x * x,
            Weight::Power(m) => powr(x, m),
        }
    }

    /// Exponent `m` of the power family (0 for the constant weight).
    pub fn exponent(&self) -> f64 {
        match *self {
            Weight::Constant => 0.0,
            Weight::Power(m) => m,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.exponent() == 0.0
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Constant => write!(f, "const"),
            Weight::Power(m) => write!(f, "pow:{m}"),
        }
    }
}

impl FromStr for Weight {
    type Err = GwjError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.split_once(':') {
            None if s.eq_ignore_ascii_case("const") => Ok(Weight::Constant),
            Some((h, m)) if h.eq_ignore_ascii_case("pow") => {
                Weight::power(parse_num(m, "weight exponent")?).map_err(reparse)
            }
            _ => Err(GwjError::Parse(format!("unknown weight '{s}' (expected 'const' or 'pow:M')"))),
        }
    }
}

impl Serialize for Weight {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Weight {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
