//! Numerical verification of the comparison, monotonicity and bound results.
//!
//! Each registry entry checks its hypotheses on grids, evaluates both sides of
//! the concluded inequalities with the engine and reports the slack. The
//! verdict is `NOT_APPLICABLE` whenever a required hypothesis fails; only
//! configurations whose hypotheses hold can produce `PASS` or `FAIL`.
//!
//! The comparison proofs order `Λ_X^{w₁}(u)` and `Λ_Y^{w₂}(u)` pointwise. With a
//! non-constant weight that needs the weights evaluated at the two quantile
//! functions to be ordered too. This "weight step" is checked as an extra
//! required hypothesis and labelled as a proof step.

use std::fmt;

use num_rational::BigRational;
use serde::{Serialize, Serializer};

use crate::closed_form::{closed_form_gwj, ClosedFormKey};
use crate::dist::{Distribution, Weight};
use crate::error::{GwjError, Result};
use crate::gwj::{Engine, Scheme, SchemeSpec};
use crate::orders::{self, aging_class_check, check_order, unit_grid, AgingClass, Direction, Relation};
use crate::special::{self, ratio_to_f64};

/// Identifiers accepted by [`verify_theorem`].
pub const THEOREM_IDS: [&str; 19] = [
    "thm2.1",
    "thm3.1a",
    "thm3.1b",
    "thm3.1c",
    "thm3.1d",
    "cor3.1",
    "cor3.2",
    "cor3.3",
    "prop-decdensity",
    "prop-ifr-bound",
    "prop-hazard-bound",
    "thm4.1",
    "thm4.2",
    "cor4.1-phf",
    "cor4.2-prhf",
    "thm5.1",
    "thm5.2",
    "thm5.3",
    "thm5.4",
];

/// Default conclusion tolerance (relative to the larger side, floored at 1).
pub const DEFAULT_TOL: f64 = 1e-10;

/// Grid used for density and hazard suprema that are not known analytically.
const SUP_GRID: usize = 10_000;

/// One-line statement of a registry entry.
pub fn describe(id: &str) -> Option<&'static str> {
    Some(match id {
        "thm2.1" => "Z = φ(X), φ(0) = 0, w(φ(x))/φ'(x) ≤ (≥) w(x) ⇒ J(X) ≤ (≥) J(Z) for minRSSU and maxRSSU",
        "thm3.1a" => "w₁ increasing, w₁ ≥ w₂, X ≤disp Y ⇒ J^{w₁}(X) ≤ J^{w₂}(Y) for minRSSU",
        "thm3.1b" => "w₁ increasing, w₁ ≤ w₂, X ≥disp Y ⇒ J^{w₁}(X) ≥ J^{w₂}(Y) for minRSSU",
        "thm3.1c" => "w₁ increasing, w₁ ≥ w₂, X ≤disp Y ⇒ J^{w₁}(X) ≤ J^{w₂}(Y) for maxRSSU",
        "thm3.1d" => "w₁ increasing, w₁ ≤ w₂, X ≥disp Y ⇒ J^{w₁}(X) ≥ J^{w₂}(Y) for maxRSSU",
        "cor3.1" => "w increasing, X ≤disp (≥disp) Y ⇒ J(X) ≤ (≥) J(Y) for minRSSU and maxRSSU",
        "cor3.2" => "Y = aX + b, a ≥ 1, w increasing ⇒ J(X) ≤ J(Y) for minRSSU and maxRSSU",
        "cor3.3" => "f(0) ≥ g(0) > 0, X ≤su/≤*/≤c Y, w₁ increasing, w₁ ≥ w₂ ⇒ J^{w₁}(X) ≤ J^{w₂}(Y)",
        "prop-decdensity" => "decreasing density, f(0) ≤ 1, w = x^m ⇒ J(X) ≥ J(U(0,1)) for minRSSU and maxRSSU",
        "prop-ifr-bound" => "IFR (IFRA, NBU), f(0) ≥ λ, w = x^m ⇒ J_min(X) ≤ J_min(Exp(λ))",
        "prop-hazard-bound" => "r(x) ≤ λ, w = x^m ⇒ J_max(X) ≥ −½(λ²Γ(m+1)/(2λ)^{m+1})ⁿ",
        "thm4.1" => "Λ ≥ 1 ⇒ minRSSU GWJ non-increasing in n",
        "thm4.2" => "Λ ≥ 1 ⇒ maxRSSU GWJ non-increasing in n",
        "cor4.1-phf" => "PHF with θ > 1/4 and Λ₀ ≥ 1 ⇒ minRSSU GWJ non-increasing in n",
        "cor4.2-prhf" => "PRHF with θ > 1/4 and Λ₀ ≥ 1 ⇒ maxRSSU GWJ non-increasing in n",
        "thm5.1" => "J_min, J_max ≥ (n!)²·J_SRS",
        "thm5.2" => "DFR, w increasing ⇒ J_max ≥ J_RSS ≥ J_min",
        "thm5.3" => "f ≤ M, w ≤ k ⇒ J_min, J_max ≥ −(n!)²kⁿMⁿ/(2(2n−1)!!)",
        "thm5.4" => "κ = ∫Λ² ⇒ J_min, J_max ≥ −(n!)²κ^{n/2}/(2√∏(4i−3))",
        _ => return None,
    })
}

/// Inputs of a verification run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremConfig {
    pub dist_a: Distribution,
    pub dist_b: Option<Distribution>,
    pub weight_a: Weight,
    pub weight_b: Option<Weight>,
    pub n_min: u32,
    pub n_max: u32,
    /// Grid size for hypothesis certificates.
    pub grid: usize,
    /// Conclusion tolerance, relative to `max(1, |lhs|, |rhs|)`.
    pub tol: f64,
    /// Tolerance of the grid certificates.
    pub grid_tol: f64,
    /// Slope `a` of `φ(x) = a·x + b` (thm2.1, cor3.2).
    pub scale: Option<f64>,
    /// Intercept `b` of `φ` (thm2.1, cor3.2).
    pub shift: Option<f64>,
    /// Shape order of cor3.3.
    pub relation: Option<Relation>,
    /// Rate `λ` of the exponential comparison law (prop-ifr-bound, prop-hazard-bound).
    pub rate: Option<f64>,
}

impl TheoremConfig {
    pub fn new(dist_a: Distribution) -> Self {
        TheoremConfig {
            dist_a,
            dist_b: None,
            weight_a: Weight::Constant,
            weight_b: None,
            n_min: 1,
            n_max: 5,
            grid: orders::DEFAULT_GRID,
            tol: DEFAULT_TOL,
            grid_tol: orders::DEFAULT_TOL,
            scale: None,
            shift: None,
            relation: None,
            rate: None,
        }
    }

    fn weight_b(&self) -> Weight {
        self.weight_b.unwrap_or(self.weight_a)
    }

    fn dist_b(&self) -> Result<&Distribution> {
        self.dist_b
            .as_ref()
            .ok_or_else(|| GwjError::Parse("this result compares two laws; a second distribution is required".into()))
    }
}

/// Default configuration of a registry entry.
pub fn default_config(id: &str) -> Result<TheoremConfig> {
    let exp = |r: f64| Distribution::exponential(r).expect("valid rate");
    let mut c = TheoremConfig::new(exp(1.0));
    match id {
        "thm2.1" => {
            c.scale = Some(2.0);
            c.shift = Some(0.0);
        }
        "thm3.1a" | "thm3.1c" | "cor3.1" => {
            c.dist_a = exp(2.0);
            c.dist_b = Some(exp(1.0));
        }
        "thm3.1b" | "thm3.1d" => {
            c.dist_b = Some(exp(2.0));
        }
        "cor3.2" => {
            c.scale = Some(1.5);
            c.shift = Some(0.5);
        }
        "cor3.3" => {
            c.dist_a = Distribution::Uniform01;
            c.dist_b = Some(exp(1.0));
            c.relation = Some(Relation::ConvexTransform);
        }
        "prop-decdensity" | "thm5.3" | "thm5.4" | "thm5.1" => {}
        "prop-ifr-bound" => {
            c.dist_a = Distribution::Uniform01;
            c.rate = Some(1.0);
        }
        "prop-hazard-bound" => {
            c.dist_a = Distribution::pareto(2.0).expect("valid shape");
            c.rate = Some(2.0);
        }
        "thm4.1" | "thm4.2" => {
            c.dist_a = Distribution::Uniform01;
            c.n_max = 8;
        }
        "cor4.1-phf" => {
            c.dist_a = Distribution::phf(Distribution::Uniform01, 2.0).expect("valid θ");
            c.n_max = 8;
        }
        "cor4.2-prhf" => {
            c.dist_a = Distribution::prhf(Distribution::Uniform01, 2.0).expect("valid θ");
            c.n_max = 8;
        }
        "thm5.2" => c.dist_a = Distribution::pareto(2.0).expect("valid shape"),
        _ => return Err(unknown(id)),
    }
    Ok(c)
}

fn unknown(id: &str) -> GwjError {
    GwjError::Parse(format!("unknown theorem id '{id}' (known: {})", THEOREM_IDS.join(", ")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::NotApplicable => "NOT_APPLICABLE",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hypothesis {
    pub name: String,
    pub holds: bool,
    /// Informational hypotheses are reported but do not gate the verdict.
    pub required: bool,
    pub detail: String,
}

/// One evaluated inequality `lhs ≥ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs − rhs`.
    pub margin: f64,
    pub holds: bool,
    /// Uncounted checks are auxiliary and do not gate the verdict.
    pub counted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictReport {
    pub theorem_id: String,
    pub verdict: Verdict,
    pub hypotheses: Vec<Hypothesis>,
    /// All counted checks hold (evaluated even when not applicable).
    pub conclusion_holds: bool,
    /// Smallest counted margin.
    pub margin: f64,
    pub checks: Vec<Check>,
    pub config: TheoremConfig,
    pub reason: Option<String>,
}

impl VerdictReport {
    pub fn failed_hypotheses(&self) -> Vec<&Hypothesis> {
        self.hypotheses.iter().filter(|h| h.required && !h.holds).collect()
    }
}

struct Ctx<'a> {
    cfg: &'a TheoremConfig,
    engine: &'a Engine,
    hyps: Vec<Hypothesis>,
    checks: Vec<Check>,
}

impl<'a> Ctx<'a> {
    fn hyp(&mut self, name: impl Into<String>, holds: bool, required: bool, detail: impl Into<String>) -> bool {
        self.hyps.push(Hypothesis {
            name: name.into(),
            holds,
            required,
            detail: detail.into(),
        });
        holds
    }

    fn check_ge(&mut self, label: impl Into<String>, lhs: f64, rhs: f64, counted: bool) {
        let margin = lhs - rhs;
        let scale = 1f64.max(lhs.abs()).max(rhs.abs());
        let holds = lhs == rhs || margin >= -self.cfg.tol * scale;
        self.checks.push(Check {
            label: label.into(),
            lhs,
            rhs,
            margin,
            holds,
            counted,
        });
    }

    fn gwj(&self, d: &Distribution, w: &Weight, scheme: Scheme, n: u32) -> Result<f64> {
        Ok(self.engine.gwj(d, w, SchemeSpec::new(scheme, n)?)?.value)
    }

    fn sizes(&self) -> std::ops::RangeInclusive<u32> {
        self.cfg.n_min..=self.cfg.n_max
    }

    fn grid(&self) -> Vec<(f64, f64)> {
        unit_grid(self.cfg.grid)
    }

    /// `w` non-decreasing over the quantile grids of the given laws.
    fn weight_increasing(&mut self, name: &str, w: &Weight, laws: &[&Distribution]) -> bool {
        let mut xs: Vec<f64> = laws
            .iter()
            .flat_map(|d| self.grid().into_iter().map(move |(u, t)| d.quantile_c(u, t)))
            .collect();
        xs.sort_by(f64::total_cmp);
        let tol = self.cfg.grid_tol;
        let ok = xs.windows(2).all(|p| ge(w.eval(p[1]), w.eval(p[0]), tol));
        self.hyp(format!("{name} = {w} is increasing"), ok, true, "checked on the quantile grid")
    }

    /// `w₁(x) ≥ w₂(x)` (or `≤` when `upper` is false) on the supports of the given laws.
    fn weight_dominates(&mut self, w1: &Weight, w2: &Weight, laws: &[&Distribution], w1_above: bool) -> bool {
        let tol = self.cfg.grid_tol;
        let mut worst: Option<f64> = None;
        for d in laws {
            for (u, t) in self.grid() {
                let x = d.quantile_c(u, t);
                let (hi, lo) = if w1_above { (w1.eval(x), w2.eval(x)) } else { (w2.eval(x), w1.eval(x)) };
                if !ge(hi, lo, tol) {
                    worst.get_or_insert(x);
                }
            }
        }
        let rel = if w1_above { "≥" } else { "≤" };
        let detail = match worst {
            None => "holds on the quantile grid".to_string(),
            Some(x) => format!("fails at x = {x}"),
        };
        self.hyp(format!("w₁ = {w1} {rel} w₂ = {w2}"), worst.is_none(), true, detail)
    }

    /// Proof step `w₁(F⁻¹(u)) ≥ w₂(G⁻¹(u))` (or `≤`) for all `u`.
    fn weight_step(&mut self, x: &Distribution, w1: &Weight, y: &Distribution, w2: &Weight, w1_above: bool) -> bool {
        let tol = self.cfg.grid_tol;
        let mut worst: Option<f64> = None;
        if !(w1.is_constant() && w2.is_constant()) {
            for (u, t) in self.grid() {
                let a = w1.eval(x.quantile_c(u, t));
                let b = w2.eval(y.quantile_c(u, t));
                let ok = if w1_above { ge(a, b, tol) } else { ge(b, a, tol) };
                if !ok {
                    worst.get_or_insert(u);
                }
            }
        }
        let rel = if w1_above { "≥" } else { "≤" };
        let detail = match worst {
            None => "holds on the probability grid".to_string(),
            Some(u) => format!("fails at u = {u}"),
        };
        self.hyp(
            format!("proof step: w₁(F_X⁻¹(u)) {rel} w₂(F_Y⁻¹(u))"),
            worst.is_none(),
            true,
            detail,
        )
    }

    fn order(&mut self, a: &Distribution, b: &Distribution, rel: Relation) -> Result<Direction> {
        Ok(check_order(a, b, rel, self.cfg.grid, self.cfg.grid_tol)?.direction)
    }

    fn aging(&mut self, d: &Distribution, class: AgingClass, required: bool) -> Result<bool> {
        let r = aging_class_check(d, class, self.cfg.grid, self.cfg.grid_tol)?;
        let detail = format!("max violation {:.3e}", r.max_violation);
        Ok(self.hyp(format!("X is {class}"), r.holds, required, detail))
    }

    /// `J_A ≤ J_B` (when `a_le_b`) for every `n` and both unequal-set designs.
    fn compare_designs(
        &mut self,
        a: &Distribution,
        wa: &Weight,
        b: &Distribution,
        wb: &Weight,
        a_le_b: bool,
        schemes: &[Scheme],
    ) -> Result<()> {
        for &s in schemes {
            for n in self.sizes() {
                let ja = self.gwj(a, wa, s, n)?;
                let jb = self.gwj(b, wb, s, n)?;
                if a_le_b {
                    self.check_ge(format!("{s} n={n}: J(Y) ≥ J(X)"), jb, ja, true);
                } else {
                    self.check_ge(format!("{s} n={n}: J(X) ≥ J(Y)"), ja, jb, true);
                }
            }
        }
        Ok(())
    }

    fn decreasing_in_n(&mut self, d: &Distribution, w: &Weight, s: Scheme) -> Result<()> {
        let mut prev = self.gwj(d, w, s, self.cfg.n_min)?;
        for n in self.cfg.n_min + 1..=self.cfg.n_max {
            let cur = self.gwj(d, w, s, n)?;
            self.check_ge(format!("{s}: J(n={}) ≥ J(n={n})", n - 1), prev, cur, true);
            prev = cur;
        }
        Ok(())
    }

    fn inf_lambda(&self, d: &Distribution, w: &Weight) -> f64 {
        self.grid()
            .into_iter()
            .map(|(u, t)| d.lambda_c(w, u, t))
            .fold(f64::INFINITY, f64::min)
    }
}

fn half() -> BigRational {
    BigRational::new(1.into(), 2.into())
}

/// `a ≥ b` up to a relative tolerance.
fn ge(a: f64, b: f64, tol: f64) -> bool {
    a >= b || a - b >= -tol * a.abs().max(b.abs())
}

const UNEQUAL: [Scheme; 2] = [Scheme::MinRssu, Scheme::MaxRssu];

fn scheme_of(id: &str) -> Scheme {
    if id.ends_with('a') || id.ends_with('b') {
        Scheme::MinRssu
    } else {
        Scheme::MaxRssu
    }
}

/// Runs one registry entry.
///
/// Unknown ids are usage errors. Failures while evaluating hypotheses or the
/// conclusion (divergent integrals, invalid transformations) produce a
/// `NOT_APPLICABLE` report carrying the reason.
pub fn verify_theorem(id: &str, cfg: &TheoremConfig, engine: &Engine) -> Result<VerdictReport> {
    if !THEOREM_IDS.contains(&id) {
        return Err(unknown(id));
    }
    if cfg.n_min == 0 || cfg.n_min > cfg.n_max {
        return Err(GwjError::Parse(format!(
            "invalid set-size range {}..={} (need 1 ≤ n_min ≤ n_max)",
            cfg.n_min, cfg.n_max
        )));
    }
    if cfg.grid < orders::MIN_GRID {
        return Err(GwjError::Parse(format!("grid must have at least {} points", orders::MIN_GRID)));
    }
    let mut ctx = Ctx {
        cfg,
        engine,
        hyps: Vec::new(),
        checks: Vec::new(),
    };
    let outcome = match id {
        "thm2.1" => thm2_1(&mut ctx),
        "thm3.1a" | "thm3.1c" => thm3_1(&mut ctx, scheme_of(id), true),
        "thm3.1b" | "thm3.1d" => thm3_1(&mut ctx, scheme_of(id), false),
        "cor3.1" => cor3_1(&mut ctx),
        "cor3.2" => cor3_2(&mut ctx),
        "cor3.3" => cor3_3(&mut ctx),
        "prop-decdensity" => prop_decdensity(&mut ctx),
        "prop-ifr-bound" => prop_ifr_bound(&mut ctx),
        "prop-hazard-bound" => prop_hazard_bound(&mut ctx),
        "thm4.1" => thm4(&mut ctx, Scheme::MinRssu),
        "thm4.2" => thm4(&mut ctx, Scheme::MaxRssu),
        "cor4.1-phf" => cor4(&mut ctx, false),
        "cor4.2-prhf" => cor4(&mut ctx, true),
        "thm5.1" => thm5_1(&mut ctx),
        "thm5.2" => thm5_2(&mut ctx),
        "thm5.3" => thm5_3(&mut ctx),
        "thm5.4" => thm5_4(&mut ctx),
        _ => unreachable!(),
    };
    let mut reason = match outcome {
        Ok(()) => None,
        Err(e) if e.is_usage() => return Err(e),
        Err(e) => Some(format!("could not evaluate: {e}")),
    };
    let counted: Vec<&Check> = ctx.checks.iter().filter(|c| c.counted).collect();
    let conclusion_holds = !counted.is_empty() && counted.iter().all(|c| c.holds);
    let margin = counted.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min);
    let failed: Vec<&str> = ctx.hyps.iter().filter(|h| h.required && !h.holds).map(|h| h.name.as_str()).collect();
    let verdict = if reason.is_some() {
        Verdict::NotApplicable
    } else if !failed.is_empty() {
        reason = Some(format!("hypothesis not satisfied: {}", failed.join("; ")));
        Verdict::NotApplicable
    } else if counted.is_empty() {
        reason = Some("no conclusion was evaluated".into());
        Verdict::NotApplicable
    } else if conclusion_holds {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(VerdictReport {
        theorem_id: id.to_string(),
        verdict,
        hypotheses: ctx.hyps,
        conclusion_holds,
        margin: if margin.is_finite() { margin } else { f64::NAN },
        checks: ctx.checks,
        config: cfg.clone(),
        reason,
    })
}

fn thm2_1(c: &mut Ctx) -> Result<()> {
    let x = c.cfg.dist_a.clone();
    let w = c.cfg.weight_a;
    let a = c.cfg.scale.unwrap_or(2.0);
    let b = c.cfg.shift.unwrap_or(0.0);
    c.hyp("φ(x) = a·x + b is increasing", a > 0.0, true, format!("a = {a}"));
    c.hyp("φ(0) = 0", b == 0.0, true, format!("b = {b}"));
    if !(a > 0.0 && b == 0.0) {
        return Ok(());
    }
    let z = Distribution::affine(x.clone(), a, 0.0)?;
    // ratio condition w(φ(x))/φ'(x) against w(x)
    let tol = c.cfg.grid_tol;
    let (mut le, mut ge_) = (true, true);
    for (u, t) in c.grid() {
        let q = x.quantile_c(u, t);
        let lhs = w.eval(a * q) / a;
        let rhs = w.eval(q);
        le &= ge(rhs, lhs, tol);
        ge_ &= ge(lhs, rhs, tol);
    }
    c.hyp("w(φ(x))/φ'(x) ≤ w(x)", le, false, "selects J(X) ≤ J(Z)");
    c.hyp("w(φ(x))/φ'(x) ≥ w(x)", ge_, false, "selects J(X) ≥ J(Z)");
    c.hyp("one of the ratio conditions holds", le || ge_, true, "");
    if le {
        c.compare_designs(&x, &w, &z, &w, true, &UNEQUAL)?;
    }
    if ge_ {
        c.compare_designs(&x, &w, &z, &w, false, &UNEQUAL)?;
    }
    Ok(())
}

fn endpoint_info(c: &mut Ctx, x: &Distribution, y: &Distribution) {
    let (ux, uy) = (x.support().upper, y.support().upper);
    c.hyp(
        "common finite right endpoint",
        ux == uy && ux.is_finite(),
        false,
        format!("u_X = {ux}, u_Y = {uy}; replaced by the weight proof step"),
    );
}

fn thm3_1(c: &mut Ctx, scheme: Scheme, x_le_y: bool) -> Result<()> {
    let x = c.cfg.dist_a.clone();
    let y = c.cfg.dist_b()?.clone();
    let (w1, w2) = (c.cfg.weight_a, c.cfg.weight_b());
    endpoint_info(c, &x, &y);
    c.weight_increasing("w₁", &w1, &[&x, &y]);
    c.weight_dominates(&w1, &w2, &[&x, &y], x_le_y);
    let dir = c.order(&x, &y, Relation::Dispersive)?;
    let ok = if x_le_y { dir.a_le_b() } else { matches!(dir, Direction::BLeA | Direction::Equal) };
    let rel = if x_le_y { "X ≤disp Y" } else { "X ≥disp Y" };
    c.hyp(rel, ok, true, format!("grid direction {dir}"));
    c.weight_step(&x, &w1, &y, &w2, x_le_y);
    c.compare_designs(&x, &w1, &y, &w2, x_le_y, &[scheme])
}

fn cor3_1(c: &mut Ctx) -> Result<()> {
    let x = c.cfg.dist_a.clone();
    let y = c.cfg.dist_b()?.clone();
    let w = c.cfg.weight_a;
    endpoint_info(c, &x, &y);
    c.weight_increasing("w", &w, &[&x, &y]);
    let dir = c.order(&x, &y, Relation::Dispersive)?;
    let comparable = dir != Direction::Incomparable;
    c.hyp("X and Y dispersively ordered", comparable, true, format!("grid direction {dir}"));
    if !comparable {
        return Ok(());
    }
    if dir.a_le_b() {
        c.weight_step(&x, &w, &y, &w, true);
        c.compare_designs(&x, &w, &y, &w, true, &UNEQUAL)?;
    }
    if matches!(dir, Direction::BLeA | Direction::Equal) {
        c.weight_step(&x, &w, &y, &w, false);
        c.compare_designs(&x, &w, &y, &w, false, &UNEQUAL)?;
    }
    Ok(())
}

fn cor3_2(c: &mut Ctx) -> Result<()> {
    let x = c.cfg.dist_a.clone();
    let w = c.cfg.weight_a;
    let a = c.cfg.scale.unwrap_or(1.5);
    let b = c.cfg.shift.unwrap_or(0.0);
    c.hyp("a ≥ 1", a >= 1.0, true, format!("a = {a}, b = {b}"));
    let y = match Distribution::affine(x.clone(), a, b) {
        Ok(y) => y,
        Err(e) => {
            c.hyp("aX + b is a nonnegative law", false, true, e.to_string());
            return Ok(());
        }
    };
    c.weight_increasing("w", &w, &[&x, &y]);
    let dir = c.order(&x, &y, Relation::Dispersive)?;
    c.hyp("X ≤disp Y", dir.a_le_b(), true, format!("grid direction {dir}"));
    c.weight_step(&x, &w, &y, &w, true);
    c.compare_designs(&x, &w, &y, &w, true, &UNEQUAL)
}

fn cor3_3(c: &mut Ctx) -> Result<()> {
    let x = c.cfg.dist_a.clone();
    let y = c.cfg.dist_b()?.clone();
    let (w1, w2) = (c.cfg.weight_a, c.cfg.weight_b());
    let rel = c.cfg.relation.unwrap_or(Relation::ConvexTransform);
    c.hyp(
        "shape order is superadditive, star or convex",
        matches!(rel, Relation::Superadditive | Relation::Star | Relation::ConvexTransform),
        true,
        format!("relation {rel}"),
    );
    let dir = c.order(&x, &y, rel)?;
    let comparable = dir != Direction::Incomparable;
    c.hyp(format!("X and Y ordered in {rel}"), comparable, true, format!("grid direction {dir}"));
    if !comparable {
        return Ok(());
    }
    let x_le_y = dir.a_le_b();
    let (f0, g0) = (x.density_at_origin(), y.density_at_origin());
    // the lemma behind the shape-to-dispersive step needs the smaller law to
    // carry the larger density at the origin
    let (hi, lo) = if x_le_y { (f0, g0) } else { (g0, f0) };
    let name = if x_le_y { "f(0) ≥ g(0) > 0" } else { "g(0) ≥ f(0) > 0" };
    c.hyp(name, hi >= lo && lo > 0.0, true, format!("f(0) = {f0}, g(0) = {g0}"));
    c.weight_increasing("w₁", &w1, &[&x, &y]);
    c.weight_dominates(&w1, &w2, &[&x, &y], x_le_y);
    c.weight_step(&x, &w1, &y, &w2, x_le_y);
    c.compare_designs(&x, &w1, &y, &w2, x_le_y, &UNEQUAL)
}

fn uniform_value(c: &Ctx, m: f64, scheme: Scheme, n: u32) -> Result<f64> {
    let key = ClosedFormKey {
        dist: Distribution::Uniform01,
        m,
        scheme,
        n,
    };
    closed_form_gwj(&key, c.engine)?
        .map(|r| r.value)
        .ok_or_else(|| GwjError::domain("uniform closed form unavailable"))
}

fn prop_decdensity(c: &mut Ctx) -> Result<()> {
    let x = c.cfg.dist_a.clone();
    let w = c.cfg.weight_a;
    let m = w.exponent();
    c.aging(&x, AgingClass::DecreasingDensity, true)?;
    let f0 = x.density_at_origin();
    c.hyp("f(0) ≤ 1", f0 <= 1.0 + c.cfg.grid_tol, true, format!("f(0) = {f0}"));
    c.weight_step(&Distribution::Uniform01, &w, &x, &w, true);
    for s in UNEQUAL {
        for n in c.sizes() {
            let j = c.gwj(&x, &w, s, n)?;
            let bound = uniform_value(c, m, s, n)?;
            c.check_ge(format!("{s} n={n}: J(X) ≥ bound"), j, bound, true);
        }
    }
    Ok(())
}

fn prop_ifr_bound(c: &mut Ctx) -> Result<()> {
    let x = c.cfg.dist_a.clone();
    let w = c.cfg.weight_a;
    let f0 = x.density_at_origin();
    let lam = c.cfg.rate.unwrap_or(f0);
    c.aging(&x, AgingClass::Ifr, false)?;
    c.aging(&x, AgingClass::Ifra, false)?;
    c.aging(&x, AgingClass::Nbu, true)?;
    c.hyp("λ > 0", lam > 0.0 && lam.is_finite(), true, format!("λ = {lam}"));
    c.hyp("f(0) ≥ λ", f0 >= lam * (1.0 - c.cfg.grid_tol), true, format!("f(0) = {f0}, λ = {lam}"));
    if !(lam > 0.0 && lam.is_finite()) {
        return Ok(());
    }
    let z = Distribution::exponential(lam)?;
    c.weight_step(&x, &w, &z, &w, true);
    for n in c.sizes() {
        let j = c.gwj(&x, &w, Scheme::MinRssu, n)?;
        let key = ClosedFormKey::new(&z, &w, SchemeSpec::new(Scheme::MinRssu, n)?);
        let bound = closed_form_gwj(&key, c.engine)?.expect("exponential minRSSU closed form").value;
        c.check_ge(format!("minRSSU n={n}: bound ≥ J(X)"), bound, j, true);
    }
    Ok(())
}

/// Supremum of `g` over the probability grid, refined by golden section
/// around the best grid point.
fn grid_sup(g: impl Fn(f64, f64) -> f64) -> f64 {
    let pts = unit_grid(SUP_GRID);
    let mut best = (f64::NEG_INFINITY, 0usize);
    for (j, &(u, t)) in pts.iter().enumerate() {
        let v = g(u, t);
        if v.is_nan() {
            return f64::INFINITY;
        }
        if v > best.0 {
            best = (v, j);
        }
    }
    let h = 1.0 / (SUP_GRID + 1) as f64;
    let (mut lo, mut hi) = (pts[best.1].0 - h, pts[best.1].0 + h);
    let eval = |u: f64| if u > 0.0 && u < 1.0 { g(u, 1.0 - u) } else { f64::NEG_INFINITY };
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let (p, q) = (hi - r * (hi - lo), lo + r * (hi - lo));
        if eval(p) >= eval(q) {
            hi = q;
        } else {
            lo = p;
        }
    }
    let ends = g(0.0, 1.0).max(g(1.0, 0.0));
    best.0.max(eval(0.5 * (lo + hi))).max(if ends.is_nan() { f64::NEG_INFINITY } else { ends })
}

fn density_sup(d: &Distribution) -> f64 {
    d.density_sup().unwrap_or_else(|| grid_sup(|u, t| d.density_at_quantile_c(u, t)))
}

fn hazard_sup(d: &Distribution) -> f64 {
    d.hazard_sup().unwrap_or_else(|| {
        grid_sup(|u, t| if t > 0.0 { d.density_at_quantile_c(u, t) / t } else { f64::NEG_INFINITY })
    })
}

fn prop_hazard_bound(c: &mut Ctx) -> Result<()> {
    let x = c.cfg.dist_a.clone();
    let w = c.cfg.weight_a;
    let m = w.exponent();
    let h = hazard_sup(&x);
    let lam = c.cfg.rate.unwrap_or(h);
    c.hyp("λ > 0", lam > 0.0 && lam.is_finite(), true, format!("λ = {lam}"));
    c.hyp("r(x) ≤ λ", h <= lam * (1.0 + c.cfg.grid_tol), true, format!("sup r = {h}, λ = {lam}"));
    if !(lam > 0.0 && lam.is_finite()) {
        return Ok(());
    }
    let z = Distribution::exponential(lam)?;
    c.weight_step(&x, &w, &z, &w, false);
    // the chain J(Z_{1:1}) ≤ J(Z_{i:i}) compares stochastically increasing laws
    c.hyp("proof step: w non-increasing", w.is_constant(), true, format!("w = {w}"));
    let factor = lam * lam * special::gamma(m + 1.0) / (2.0 * lam).powf(m + 1.0);
    for n in c.sizes() {
        let bound = -0.5 * factor.powi(n as i32);
        let jmax = c.gwj(&x, &w, Scheme::MaxRssu, n)?;
        c.check_ge(format!("maxRSSU n={n}: J(X) ≥ bound"), jmax, bound, true);
        let jmin = c.gwj(&x, &w, Scheme::MinRssu, n)?;
        c.check_ge(format!("minRSSU n={n}: J(X) ≥ bound (auxiliary)"), jmin, bound, false);
    }
    Ok(())
}

fn thm4(c: &mut Ctx, scheme: Scheme) -> Result<()> {
    let x = c.cfg.dist_a.clone();
    let w = c.cfg.weight_a;
    let inf = c.inf_lambda(&x, &w);
    c.hyp("Λ(u) ≥ 1", inf >= 1.0 - c.cfg.grid_tol, true, format!("grid inf Λ = {inf}"));
    c.decreasing_in_n(&x, &w, scheme)
}

fn cor4(c: &mut Ctx, prhf: bool) -> Result<()> {
    let x = c.cfg.dist_a.clone();
    let w = c.cfg.weight_a;
    let (base, theta, scheme, family) = match (&x, prhf) {
        (Distribution::Phf { base, theta }, false) => (base.as_ref().clone(), *theta, Scheme::MinRssu, "PHF"),
        (Distribution::Prhf { base, theta }, true) => (base.as_ref().clone(), *theta, Scheme::MaxRssu, "PRHF"),
        _ => {
            let family = if prhf { "PRHF" } else { "PHF" };
            c.hyp(format!("X is a {family} law"), false, true, format!("got {x}"));
            return Ok(());
        }
    };
    c.hyp(format!("X is a {family} law"), true, true, format!("{x}"));
    c.hyp("θ > 1/4", theta > 0.25, true, format!("θ = {theta}"));
    let inf = c.inf_lambda(&base, &w);
    c.hyp("Λ₀(u) ≥ 1", inf >= 1.0 - c.cfg.grid_tol, true, format!("grid inf Λ₀ = {inf}"));
    c.decreasing_in_n(&x, &w, scheme)
}

fn thm5_1(c: &mut Ctx) -> Result<()> {
    let x = c.cfg.dist_a.clone();
    let w = c.cfg.weight_a;
    for n in c.sizes() {
        let nf = special::factorial(n as u64);
        let sq = ratio_to_f64(&BigRational::from_integer((&nf * &nf).into()));
        let bound = sq * c.gwj(&x, &w, Scheme::Srs, n)?;
        for s in UNEQUAL {
            let j = c.gwj(&x, &w, s, n)?;
            c.check_ge(format!("{s} n={n}: J ≥ (n!)²·J_SRS"), j, bound, true);
        }
    }
    Ok(())
}

fn thm5_2(c: &mut Ctx) -> Result<()> {
    let x = c.cfg.dist_a.clone();
    let w = c.cfg.weight_a;
    c.aging(&x, AgingClass::Dfr, true)?;
    c.weight_increasing("w", &w, &[&x]);
    // the order statistics are stochastically increasing, so the weight step
    // needs w non-increasing as well
    c.hyp("proof step: w constant on the support", w.is_constant(), true, format!("w = {w}"));
    for n in c.sizes() {
        let jmax = c.gwj(&x, &w, Scheme::MaxRssu, n)?;
        let jrss = c.gwj(&x, &w, Scheme::Rss, n)?;
        let jmin = c.gwj(&x, &w, Scheme::MinRssu, n)?;
        c.check_ge(format!("n={n}: J_max ≥ J_RSS"), jmax, jrss, true);
        c.check_ge(format!("n={n}: J_RSS ≥ J_min"), jrss, jmin, true);
    }
    Ok(())
}

fn thm5_3(c: &mut Ctx) -> Result<()> {
    let x = c.cfg.dist_a.clone();
    let w = c.cfg.weight_a;
    let big_m = density_sup(&x);
    let k = if w.is_constant() { 1.0 } else { w.eval(x.support().upper) };
    c.hyp("density bounded: f ≤ M < ∞", big_m.is_finite(), true, format!("M = {big_m}"));
    c.hyp("weight bounded on the support: w ≤ k < ∞", k.is_finite(), true, format!("k = {k}"));
    if !(big_m.is_finite() && k.is_finite()) {
        return Ok(());
    }
    for n in c.sizes() {
        let pre = special::unequal_set_prefactor(n as u64) * half();
        let bound = -special::stable_product(&pre, &vec![k * big_m; n as usize])?;
        for s in UNEQUAL {
            let j = c.gwj(&x, &w, s, n)?;
            c.check_ge(format!("{s} n={n}: J ≥ bound"), j, bound, true);
        }
    }
    Ok(())
}

fn thm5_4(c: &mut Ctx) -> Result<()> {
    let x = c.cfg.dist_a.clone();
    let w = c.cfg.weight_a;
    let kappa = match crate::quad::integrate_unit(
        |u, t| {
            let l = x.lambda_c(&w, u, t);
            l * l
        },
        &c.engine.quad,
    ) {
        Ok(r) => r.value,
        Err(e) => {
            c.hyp("κ = ∫Λ² finite", false, true, e.to_string());
            return Ok(());
        }
    };
    c.hyp("κ = ∫Λ² finite", kappa.is_finite(), true, format!("κ = {kappa}"));
    for n in c.sizes() {
        let nf = special::factorial(n as u64);
        let pre = BigRational::from_integer((&nf * &nf).into()) * half();
        let mut factors = vec![kappa.sqrt(); n as usize];
        factors.extend((1..=n).map(|i| 1.0 / ((4 * i - 3) as f64).sqrt()));
        let bound = -special::stable_product(&pre, &factors)?;
        for s in UNEQUAL {
            let j = c.gwj(&x, &w, s, n)?;
            c.check_ge(format!("{s} n={n}: J ≥ bound"), j, bound, true);
        }
    }
    Ok(())
}
