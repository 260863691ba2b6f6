//! Globally adaptive Gauss–Kronrod (10/21) quadrature.
//!
//! Integrals over (0, 1) are split at ½ and the right half is integrated in
//! the complement variable `t = 1 − u`, so both singular endpoints sit at 0
//! where double precision is densest. Nodes never touch an endpoint.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::dist::Support;
use crate::error::{GwjError, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_217_089_305,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Tolerances and limits for the adaptive scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of bisections before the integral is declared
    /// non-convergent.
    pub max_subdivisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            max_subdivisions: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
    pub subdivisions: usize,
}

struct Panel {
    seg: usize,
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error)
    }
}

/// One 21-point Kronrod panel on `[a, b]` with the QUADPACK error heuristic.
fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64, bool) {
    let centr = 0.5 * (a + b);
    let hlgth = 0.5 * (b - a);
    let fc = f(centr);
    let mut resg = 0.0;
    let mut resk = WGK[10] * fc;
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = hlgth * XGK[j];
        let f1 = f(centr - dx);
        let f2 = f(centr + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        let s = f1 + f2;
        resk += WGK[j] * s;
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * s;
        }
    }
    let reskh = resk * 0.5;
    let mut resasc = WGK[10] * (fc - reskh).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let result = resk * hlgth;
    resabs *= hlgth.abs();
    resasc *= hlgth.abs();
    let mut abserr = ((resk - resg) * hlgth).abs();
    if resasc != 0.0 && abserr != 0.0 {
        abserr = resasc * (200.0 * abserr / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        abserr = abserr.max(50.0 * f64::EPSILON * resabs);
    }
    let finite = result.is_finite() && abserr.is_finite();
    (result, abserr, finite)
}

/// Adaptive integration of `f(seg, x)` over several segments at once; the
/// global error budget is shared across segments.
fn adaptive<F: FnMut(usize, f64) -> f64>(
    mut f: F,
    segments: &[(usize, f64, f64)],
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    let mut total = 0.0;
    let mut err = 0.0;
    for &(seg, a, b) in segments {
        let (value, error, ok) = gk21(&mut |x| f(seg, x), a, b);
        evaluations += 21;
        if !ok {
            return Err(non_finite(value, error));
        }
        total += value;
        err += error;
        heap.push(Panel { seg, a, b, value, error });
    }
    let mut subdivisions = 0;
    loop {
        if err <= cfg.abs_tol.max(cfg.rel_tol * total.abs()) {
            // Re-sum to remove drift from the running updates.
            let (v, e) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
            if e <= cfg.abs_tol.max(cfg.rel_tol * v.abs()) {
                return Ok(QuadResult {
                    value: v,
                    abs_error: e,
                    evaluations,
                    subdivisions,
                });
            }
            total = v;
            err = e;
        }
        if subdivisions >= cfg.max_subdivisions {
            return Err(GwjError::Integration {
                reason: format!(
                    "no convergence after {subdivisions} subdivisions (integral may diverge)"
                ),
                estimate: total,
                abs_error: err,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            return Err(GwjError::Integration {
                reason: "panel too narrow to bisect (non-integrable singularity?)".into(),
                estimate: total,
                abs_error: err,
            });
        }
        let seg = worst.seg;
        let (v1, e1, ok1) = gk21(&mut |x| f(seg, x), worst.a, mid);
        let (v2, e2, ok2) = gk21(&mut |x| f(seg, x), mid, worst.b);
        evaluations += 42;
        subdivisions += 1;
        if !(ok1 && ok2) {
            return Err(non_finite(total, err));
        }
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.error;
        heap.push(Panel { seg, a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { seg, a: mid, b: worst.b, value: v2, error: e2 });
    }
}

fn non_finite(estimate: f64, abs_error: f64) -> GwjError {
    GwjError::Integration {
        reason: "integrand produced a non-finite value".into(),
        estimate,
        abs_error,
    }
}

/// `∫₀¹ g(u, 1 − u) du`. The integrand receives `u` and its exact complement.
pub fn integrate_unit<G: FnMut(f64, f64) -> f64>(mut g: G, cfg: &QuadConfig) -> Result<QuadResult> {
    adaptive(
        |seg, s| if seg == 0 { g(s, 1.0 - s) } else { g(1.0 - s, s) },
        &[(0, 0.0, 0.5), (1, 0.0, 0.5)],
        cfg,
    )
}

/// Position of an integration node: its exact distance to the nearer finite
/// endpoint, which `x` alone loses within an ulp of that endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gap {
    Lower(f64),
    Upper(f64),
    /// Far tail of a semi-infinite interval.
    Tail,
}

/// `∫ f(x, gap) dx` over a support interval. Finite intervals are split at
/// the midpoint and each half is mapped by `x = endpoint ± s²`, which smooths
/// integrable power singularities at the ends; a semi-infinite interval
/// `[a, ∞)` is mapped by `x = a + s/(1 − s)`.
pub fn integrate_support_gap<F: FnMut(f64, Gap) -> f64>(support: &Support, mut f: F, cfg: &QuadConfig) -> Result<QuadResult> {
    let (a, b) = (support.lower, support.upper);
    if !a.is_finite() || b <= a {
        return Err(GwjError::domain(format!("unsupported integration range [{a}, {b}]")));
    }
    if b.is_finite() {
        let r = (0.5 * (b - a)).sqrt();
        adaptive(
            |seg, s| {
                let g = s * s;
                let v = if seg == 0 { f(a + g, Gap::Lower(g)) } else { f(b - g, Gap::Upper(g)) };
                if v == 0.0 {
                    0.0
                } else {
                    2.0 * s * v
                }
            },
            &[(0, 0.0, r), (1, 0.0, r)],
            cfg,
        )
    } else {
        adaptive(
            |seg, s| {
                if seg == 0 {
                    let d = 1.0 - s;
                    let h = s / d;
                    f(a + h, Gap::Lower(h)) / (d * d)
                } else {
                    let v = f(a + (1.0 - s) / s, Gap::Tail);
                    if v == 0.0 {
                        0.0
                    } else {
                        v / (s * s)
                    }
                }
            },
            &[(0, 0.0, 0.5), (1, 0.0, 0.5)],
            cfg,
        )
    }
}

/// `∫ f(x) dx` over a support interval; see [`integrate_support_gap`].
pub fn integrate_support<F: FnMut(f64) -> f64>(support: &Support, mut f: F, cfg: &QuadConfig) -> Result<QuadResult> {
    integrate_support_gap(support, |x, _| f(x), cfg)
}

/// `∫ₐᵇ f(x) dx` on a finite interval.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult> {
    integrate_support(&Support { lower: a, upper: b }, f, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> QuadConfig {
        QuadConfig::default()
    }

    #[test]
    fn polynomials_are_exact() {
        let r = integrate_unit(|u, _| u * u * u, &cfg()).unwrap();
        assert!((r.value - 0.25).abs() < 1e-15);
        assert_eq!(r.subdivisions, 0);
    }

    #[test]
    fn endpoint_singularities() {
        let r = integrate_unit(|u, _| u.powf(-0.5), &cfg()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-11, "{}", r.value);
        let r = integrate_unit(|_, t| t.powf(-0.5), &cfg()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-11, "{}", r.value);
        let r = integrate_unit(|_, t| t * (-t.ln()).powi(2), &cfg()).unwrap();
        assert!((r.value - 0.25).abs() < 1e-12, "{}", r.value);
    }

    #[test]
    fn divergence_is_reported() {
        for g in [|u: f64, _t: f64| 1.0 / u, |_u: f64, t: f64| t.powf(-1.5)] {
            let e = integrate_unit(g, &cfg()).unwrap_err();
            assert!(matches!(e, GwjError::Integration { .. }), "{e}");
        }
    }

    #[test]
    fn semi_infinite() {
        let s = Support { lower: 0.0, upper: f64::INFINITY };
        let r = integrate_support(&s, |x| (-x).exp(), &cfg()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        let s = Support { lower: 1.0, upper: f64::INFINITY };
        let r = integrate_support(&s, |x| x.powi(-4), &cfg()).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn finite_interval() {
        let r = integrate(|x| x.sin(), 0.0, std::f64::consts::PI, &cfg()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-13);
        assert!(r.abs_error < 1e-12);
    }

    #[test]
    fn nan_integrand_is_an_error() {
        assert!(integrate_unit(|_, _| f64::NAN, &cfg()).is_err());
    }
}
