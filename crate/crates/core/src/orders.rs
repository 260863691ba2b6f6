//! Grid certificates for stochastic orders and aging classes.
//!
//! Every check evaluates its defining functional on the interior probability
//! grid `u_j = j/(N+1)` and reports the largest relative violation. These are
//! numerical certificates, not proofs.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::dist::{Distribution, Weight};
use crate::error::{GwjError, Result};

pub const DEFAULT_GRID: usize = 2048;
pub const DEFAULT_TOL: f64 = 1e-9;
/// Smallest accepted grid.
pub const MIN_GRID: usize = 100;
/// Points per axis of the triangular grids (superadditivity, NBU).
const TRIANGLE: usize = 128;
/// Half-width of the zero band used by [`delta_regions`].
pub const DELTA_ZERO_BAND: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Dispersive,
    Star,
    ConvexTransform,
    Superadditive,
    HazardRate,
}

impl Relation {
    pub const ALL: [Relation; 5] = [
        Relation::Dispersive,
        Relation::Star,
        Relation::ConvexTransform,
        Relation::Superadditive,
        Relation::HazardRate,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Relation::Dispersive => "dispersive",
            Relation::Star => "star",
            Relation::ConvexTransform => "convex",
            Relation::Superadditive => "superadditive",
            Relation::HazardRate => "hazard",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Relation {
    type Err = GwjError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dispersive" | "disp" => Ok(Relation::Dispersive),
            "star" => Ok(Relation::Star),
            "convex" | "convex-transform" => Ok(Relation::ConvexTransform),
            "superadditive" | "su" => Ok(Relation::Superadditive),
            "hazard" | "hazard-rate" | "hr" => Ok(Relation::HazardRate),
            _ => Err(GwjError::Parse(format!(
                "unknown relation '{s}' (expected dispersive, star, convex, superadditive or hazard)"
            ))),
        }
    }
}

impl Serialize for Relation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    ALeB,
    BLeA,
    Equal,
    Incomparable,
}

impl Direction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::ALeB => "A_le_B",
            Direction::BLeA => "B_le_A",
            Direction::Equal => "Equal",
            Direction::Incomparable => "Incomparable",
        }
    }

    /// True when `A ≤ B` is certified (including equality).
    pub fn a_le_b(&self) -> bool {
        matches!(self, Direction::ALeB | Direction::Equal)
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Direction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderReport {
    pub relation: Relation,
    pub direction: Direction,
    pub grid_size: usize,
    /// Relative violation of the reported direction (the smaller of the two
    /// when incomparable, the larger when equal).
    pub max_violation: f64,
    /// Probability where the reported violation peaks, or where the
    /// inequality is tightest.
    pub witness_u: Option<f64>,
}

/// Largest positive excursion of a signed violation series, with its location.
#[derive(Debug, Clone, Copy)]
struct Peak {
    value: f64,
    at: Option<f64>,
}

impl Peak {
    fn new() -> Self {
        Peak {
            value: f64::NEG_INFINITY,
            at: None,
        }
    }

    fn push(&mut self, v: f64, at: f64) {
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if v > self.value {
            self.value = v;
            self.at = Some(at);
        }
    }

    fn violation(&self) -> f64 {
        self.value.max(0.0)
    }
}

/// `(a − b)/max(|a|, |b|)` with `0/0 = 0`; the signed amount by which `a`
/// exceeds `b`.
#[inline]
fn rel_excess(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if a.is_infinite() || b.is_infinite() {
        return if a > b { 1.0 } else { -1.0 };
    }
    (a - b) / a.abs().max(b.abs())
}

/// Interior grid `(u_j, 1 − u_j)` for `j = 1..=n`, complements exact.
pub fn unit_grid(n: usize) -> Vec<(f64, f64)> {
    let d = (n + 1) as f64;
    (1..=n).map(|j| (j as f64 / d, (n + 1 - j) as f64 / d)).collect()
}

fn check_grid(grid: usize) -> Result<()> {
    if grid < MIN_GRID {
        Err(GwjError::domain(format!("grid size must be ≥ {MIN_GRID}, got {grid}")))
    } else {
        Ok(())
    }
}

fn decide(relation: Relation, grid_size: usize, ab: Peak, ba: Peak, tol: f64) -> OrderReport {
    let (vab, vba) = (ab.violation(), ba.violation());
    let (direction, max_violation, witness_u) = if vab <= tol && vba <= tol {
        let w = if vab >= vba { ab.at } else { ba.at };
        (Direction::Equal, vab.max(vba), w)
    } else if vab <= tol {
        (Direction::ALeB, vab, ab.at)
    } else if vba <= tol {
        (Direction::BLeA, vba, ba.at)
    } else if vab <= vba {
        (Direction::Incomparable, vab, ab.at)
    } else {
        (Direction::Incomparable, vba, ba.at)
    };
    OrderReport {
        relation,
        direction,
        grid_size,
        max_violation,
        witness_u,
    }
}

/// Nondecreasing test of a series: peak relative drop, located at `at[j]`.
fn drops(values: &[f64], at: &[f64]) -> Peak {
    let mut p = Peak::new();
    for j in 0..values.len().saturating_sub(1) {
        p.push(rel_excess(values[j], values[j + 1]), at[j + 1]);
    }
    p
}

fn rises(values: &[f64], at: &[f64]) -> Peak {
    let mut p = Peak::new();
    for j in 0..values.len().saturating_sub(1) {
        p.push(rel_excess(values[j + 1], values[j]), at[j + 1]);
    }
    p
}

/// Superadditivity violation of `ψ = G⁻¹∘F` on a triangular grid of
/// `F`-quantiles: peak of `(ψ(x) + ψ(y) − ψ(x + y))` relative.
fn superadditive_peak(a: &Distribution, b: &Distribution) -> Peak {
    let pts = unit_grid(TRIANGLE);
    let xs: Vec<f64> = pts.iter().map(|&(u, t)| a.quantile_c(u, t)).collect();
    let psi = |x: f64| -> f64 {
        let s = a.support();
        if x >= s.upper {
            return b.support().upper;
        }
        let (lc, ls) = (a.ln_cdf(x), a.ln_sf(x));
        let (u, t) = if lc < ls { (lc.exp(), -lc.exp_m1()) } else { (-ls.exp_m1(), ls.exp()) };
        b.quantile_c(u, t)
    };
    let ps: Vec<f64> = xs.iter().map(|&x| psi(x)).collect();
    let mut peak = Peak::new();
    for i in 0..xs.len() {
        for j in i..xs.len() {
            let s = xs[i] + xs[j];
            if s >= a.support().upper {
                continue;
            }
            let lhs = psi(s);
            peak.push(rel_excess(ps[i] + ps[j], lhs), pts[j].0);
        }
    }
    peak
}

/// Certify `A ≤ B`, `B ≤ A`, both, or neither for a relation.
pub fn check_order(a: &Distribution, b: &Distribution, relation: Relation, grid: usize, tol: f64) -> Result<OrderReport> {
    check_grid(grid)?;
    let pts = unit_grid(grid);
    let us: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let (ab, ba) = match relation {
        Relation::Dispersive => {
            // A ≤_disp B ⇔ f(F⁻¹(u)) ≥ g(G⁻¹(u))
            let (mut ab, mut ba) = (Peak::new(), Peak::new());
            for &(u, t) in &pts {
                let (fa, fb) = (a.density_at_quantile_c(u, t), b.density_at_quantile_c(u, t));
                ab.push(rel_excess(fb, fa), u);
                ba.push(rel_excess(fa, fb), u);
            }
            (ab, ba)
        }
        Relation::Star => {
            let r: Vec<f64> = pts.iter().map(|&(u, t)| b.quantile_c(u, t) / a.quantile_c(u, t)).collect();
            (drops(&r, &us), rises(&r, &us))
        }
        Relation::ConvexTransform => {
            let qa: Vec<f64> = pts.iter().map(|&(u, t)| a.quantile_c(u, t)).collect();
            let qb: Vec<f64> = pts.iter().map(|&(u, t)| b.quantile_c(u, t)).collect();
            let slopes: Vec<f64> = (0..grid - 1).map(|j| (qb[j + 1] - qb[j]) / (qa[j + 1] - qa[j])).collect();
            (drops(&slopes, &us[..grid - 1]), rises(&slopes, &us[..grid - 1]))
        }
        Relation::Superadditive => (superadditive_peak(a, b), superadditive_peak(b, a)),
        Relation::HazardRate => {
            // A ≤_hr B ⇔ r_A(x) ≥ r_B(x)
            let upper = a.support().upper.min(b.support().upper);
            let mut xs: Vec<(f64, f64)> = Vec::with_capacity(2 * grid);
            for &(u, t) in &pts {
                for d in [a, b] {
                    let x = d.quantile_c(u, t);
                    if x < upper {
                        xs.push((x, u));
                    }
                }
            }
            let (mut ab, mut ba) = (Peak::new(), Peak::new());
            for (x, u) in xs {
                let (ra, rb) = (a.hazard_rate(x)?, b.hazard_rate(x)?);
                ab.push(rel_excess(rb, ra), u);
                ba.push(rel_excess(ra, rb), u);
            }
            (ab, ba)
        }
    };
    Ok(decide(relation, grid, ab, ba, tol))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AgingClass {
    Ifr,
    Dfr,
    Ifra,
    Nbu,
    DecreasingDensity,
}

impl AgingClass {
    pub const ALL: [AgingClass; 5] = [
        AgingClass::Ifr,
        AgingClass::Dfr,
        AgingClass::Ifra,
        AgingClass::Nbu,
        AgingClass::DecreasingDensity,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            AgingClass::Ifr => "IFR",
            AgingClass::Dfr => "DFR",
            AgingClass::Ifra => "IFRA",
            AgingClass::Nbu => "NBU",
            AgingClass::DecreasingDensity => "decreasing-density",
        }
    }
}

impl fmt::Display for AgingClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AgingClass {
    type Err = GwjError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ifr" => Ok(AgingClass::Ifr),
            "dfr" => Ok(AgingClass::Dfr),
            "ifra" => Ok(AgingClass::Ifra),
            "nbu" => Ok(AgingClass::Nbu),
            "decreasing-density" | "decdensity" | "dd" => Ok(AgingClass::DecreasingDensity),
            _ => Err(GwjError::Parse(format!(
                "unknown aging class '{s}' (expected ifr, dfr, ifra, nbu or decreasing-density)"
            ))),
        }
    }
}

impl Serialize for AgingClass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgingReport {
    pub class: AgingClass,
    pub holds: bool,
    pub grid_size: usize,
    pub max_violation: f64,
    /// Point of the support where the violation peaks.
    pub witness_x: Option<f64>,
}

/// Grid test of an aging class (non-strict inequalities throughout).
pub fn aging_class_check(d: &Distribution, class: AgingClass, grid: usize, tol: f64) -> Result<AgingReport> {
    check_grid(grid)?;
    let pts = unit_grid(grid);
    let xs: Vec<f64> = pts.iter().map(|&(u, t)| d.quantile_c(u, t)).collect();
    let hazard = || -> Vec<f64> { pts.iter().map(|&(u, t)| d.density_at_quantile_c(u, t) / t).collect() };
    let mut peak = match class {
        AgingClass::Ifr => drops(&hazard(), &xs),
        AgingClass::Dfr => rises(&hazard(), &xs),
        AgingClass::Ifra => {
            let r: Vec<f64> = pts.iter().zip(&xs).map(|(&(_, t), &x)| -t.ln() / x).collect();
            drops(&r, &xs)
        }
        AgingClass::Nbu => {
            // H(x + y) ≥ H(x) + H(y) with H = −ln(1 − F)
            let tri = unit_grid(TRIANGLE);
            let tx: Vec<f64> = tri.iter().map(|&(u, t)| d.quantile_c(u, t)).collect();
            let th: Vec<f64> = tri.iter().map(|&(_, t)| -t.ln()).collect();
            let upper = d.support().upper;
            let mut p = Peak::new();
            for i in 0..tx.len() {
                for j in i..tx.len() {
                    let s = tx[i] + tx[j];
                    if s >= upper {
                        continue;
                    }
                    p.push(rel_excess(th[i] + th[j], -d.ln_sf(s)), s);
                }
            }
            p
        }
        AgingClass::DecreasingDensity => {
            let f: Vec<f64> = pts.iter().map(|&(u, t)| d.density_at_quantile_c(u, t)).collect();
            let mut p = rises(&f, &xs);
            if d.support().lower > 0.0 {
                // the density jumps up from 0 at the left endpoint
                p.push(1.0, d.support().lower);
            }
            p
        }
    };
    if peak.at.is_none() {
        peak.value = 0.0;
    }
    let v = peak.violation();
    Ok(AgingReport {
        class,
        holds: v <= tol,
        grid_size: grid,
        max_violation: v,
        witness_x: peak.at,
    })
}

/// Sign partition of `Δ(u) = Λ_A^{w₁}(u) − Λ_B^{w₂}(u)` over the grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaRegions {
    pub grid_size: usize,
    /// Grid points with `Δ > 0`.
    pub a1: Vec<f64>,
    /// Grid points with `Δ < 0`.
    pub a2: Vec<f64>,
}

pub fn delta_regions(a: &Distribution, w1: &Weight, b: &Distribution, w2: &Weight, grid: usize) -> Result<DeltaRegions> {
    check_grid(grid)?;
    let (mut a1, mut a2) = (Vec::new(), Vec::new());
    for (u, t) in unit_grid(grid) {
        let delta = a.lambda_c(w1, u, t) - b.lambda_c(w2, u, t);
        if delta > DELTA_ZERO_BAND {
            a1.push(u);
        } else if delta < -DELTA_ZERO_BAND {
            a2.push(u);
        }
    }
    Ok(DeltaRegions { grid_size: grid, a1, a2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp(l: f64) -> Distribution {
        Distribution::exponential(l).unwrap()
    }

    fn dir(a: &Distribution, b: &Distribution, r: Relation) -> Direction {
        check_order(a, b, r, DEFAULT_GRID, DEFAULT_TOL).unwrap().direction
    }

    #[test]
    fn dispersive_examples() {
        assert_eq!(dir(&exp(2.0), &exp(1.0), Relation::Dispersive), Direction::ALeB);
        assert_eq!(dir(&Distribution::Uniform01, &Distribution::Uniform01, Relation::Dispersive), Direction::Equal);
        assert_eq!(dir(&Distribution::Uniform01, &exp(1.0), Relation::Dispersive), Direction::ALeB);
        assert_eq!(dir(&exp(1.0), &exp(2.0), Relation::Dispersive), Direction::BLeA);
    }

    #[test]
    fn shape_orders() {
        let u = Distribution::Uniform01;
        // −ln(1 − x) is convex, star-shaped and superadditive on (0, 1)
        for r in [Relation::ConvexTransform, Relation::Star, Relation::Superadditive] {
            assert_eq!(dir(&u, &exp(1.0), r), Direction::ALeB, "{r}");
        }
        // scale families are equal in every shape order
        for r in [Relation::ConvexTransform, Relation::Star, Relation::Superadditive] {
            assert_eq!(dir(&exp(1.0), &exp(3.0), r), Direction::Equal, "{r}");
        }
        // power(2) vs power(0.5): G⁻¹(F(x)) = x⁴ is convex
        let p2 = Distribution::power(2.0).unwrap();
        let ph = Distribution::power(0.5).unwrap();
        assert_eq!(dir(&p2, &ph, Relation::ConvexTransform), Direction::ALeB);
    }

    #[test]
    fn hazard_order() {
        assert_eq!(dir(&exp(2.0), &exp(1.0), Relation::HazardRate), Direction::ALeB);
        assert_eq!(dir(&Distribution::Uniform01, &exp(1.0), Relation::HazardRate), Direction::ALeB);
        let r = check_order(&exp(0.5), &Distribution::pareto(1.0).unwrap(), Relation::HazardRate, 256, 1e-9).unwrap();
        assert_eq!(r.direction, Direction::Incomparable);
        assert!(r.max_violation > 0.0 && r.witness_u.is_some());
    }

    #[test]
    fn small_grid_rejected() {
        assert!(check_order(&exp(1.0), &exp(2.0), Relation::Dispersive, 99, 1e-9).is_err());
    }

    #[test]
    fn aging_examples() {
        let holds = |d: &Distribution, c| aging_class_check(d, c, DEFAULT_GRID, DEFAULT_TOL).unwrap().holds;
        for l in [0.5, 1.0, 3.0] {
            assert!(holds(&exp(l), AgingClass::Ifr));
            assert!(holds(&exp(l), AgingClass::Dfr));
            assert!(holds(&exp(l), AgingClass::Ifra));
            assert!(holds(&exp(l), AgingClass::Nbu));
            assert!(holds(&exp(l), AgingClass::DecreasingDensity));
        }
        let p1 = Distribution::pareto(1.0).unwrap();
        assert!(holds(&p1, AgingClass::Dfr));
        assert!(!holds(&p1, AgingClass::Ifr));
        assert!(!holds(&p1, AgingClass::DecreasingDensity));
        let u = Distribution::Uniform01;
        assert!(holds(&u, AgingClass::Ifr));
        assert!(!holds(&u, AgingClass::Dfr));
        assert!(holds(&u, AgingClass::Ifra));
        assert!(holds(&u, AgingClass::Nbu));
        assert!(holds(&u, AgingClass::DecreasingDensity));
        assert!(!holds(&Distribution::power(2.0).unwrap(), AgingClass::DecreasingDensity));
    }

    #[test]
    fn delta_examples() {
        let c = Weight::Constant;
        let same = delta_regions(&exp(1.5), &c, &exp(1.5), &c, 500).unwrap();
        assert!(same.a1.is_empty() && same.a2.is_empty());
        let r = delta_regions(&Distribution::Uniform01, &c, &exp(1.0), &c, 500).unwrap();
        assert_eq!(r.a1.len(), 500);
        let r = delta_regions(&exp(1.0), &c, &exp(2.0), &c, 500).unwrap();
        assert_eq!(r.a2.len(), 500);
        assert!(r.a1.is_empty());
    }
}
