//! Monte Carlo cross-check of the GWJ factors.
//!
//! Factor `i` of a design is `E[Λ(B_{aᵢ,bᵢ})]`; it is estimated by averaging
//! Λ over beta variates built from products of uniform powers. Every factor has its own ChaCha stream derived from
//! `(seed, i)`, so estimates are reproducible regardless of evaluation order.

use rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dist::{Distribution, Weight};
use crate::error::{GwjError, Result};
use crate::gwj::{Scheme, SchemeSpec};
use crate::special::{ratio_to_f64, stable_product};

/// Smallest accepted number of draws per factor.
pub const MIN_DRAWS: u64 = 1000;

/// Fraction of non-finite draws above which an estimate is refused.
pub const MAX_REJECT_FRACTION: f64 = 1e-3;

/// Monte Carlo estimate of one factor `−2J^w(·)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub accepted: u64,
    pub rejected: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub n_draws: u64,
    pub seed: u64,
    pub rejected: u64,
    pub per_factor: Vec<FactorEstimate>,
}

/// An open-interval uniform `u = (k + ½)·2⁻⁵²` and its complement `1 − u`,
/// which is exact for this lattice. Consumes one `next_u64`.
#[inline]
pub fn open_uniform<R: RngCore + ?Sized>(rng: &mut R) -> (f64, f64) {
    const SCALE: f64 = 1.0 / (1u64 << 52) as f64;
    let k = (rng.next_u64() >> 12) as f64;
    let u = (k + 0.5) * SCALE;
    (u, 1.0 - u)
}

/// The stream that feeds factor `i` (1-based) under `seed`.
pub fn factor_rng(seed: u64, i: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    rng
}

/// One physical sample from the design: entry `i` is the retained unit of set
/// `i`. Consumes `n` uniforms for SRS, `n(n+1)/2` for minRSSU/maxRSSU and `n²`
/// for RSS.
pub fn draw_scheme_sample<R: RngCore + ?Sized>(d: &Distribution, spec: SchemeSpec, rng: &mut R) -> Vec<f64> {
    let n = spec.n as usize;
    let mut out = Vec::with_capacity(n);
    let mut set: Vec<(f64, f64)> = Vec::with_capacity(n);
    for i in 1..=n {
        let size = match spec.scheme {
            Scheme::Srs => 1,
            Scheme::Rss => n,
            Scheme::MinRssu | Scheme::MaxRssu => i,
        };
        set.clear();
        set.extend((0..size).map(|_| open_uniform(rng)));
        let (u, t) = match spec.scheme {
            Scheme::Srs => set[0],
            Scheme::MinRssu => set.iter().copied().min_by(|a, b| a.0.total_cmp(&b.0)).unwrap(),
            Scheme::MaxRssu => set.iter().copied().max_by(|a, b| a.0.total_cmp(&b.0)).unwrap(),
            Scheme::Rss => *set.select_nth_unstable_by(i - 1, |a, b| a.0.total_cmp(&b.0)).1,
        };
        out.push(d.quantile_c(u, t));
    }
    out
}

/// A `B_{a,b}` variate (integer `a`, `b`) with its complement: the `a`-th
/// order statistic of `N = a + b − 1` uniforms, peeled off from the nearer
/// end. The largest of `N` uniforms is `V^{1/N}` and, given it, the rest are
/// uniform below it, so `min(a, b)` uniforms suffice.
fn beta_variate<R: RngCore>(rng: &mut R, a: u32, b: u32) -> (f64, f64) {
    if a == 1 && b == 1 {
        return open_uniform(rng);
    }
    let n = a + b - 1;
    let steps = a.min(b);
    let mut l = 0.0;
    for j in 0..steps {
        let (v, _) = open_uniform(rng);
        l += v.ln() / (n - j) as f64;
    }
    if b <= a {
        (l.exp(), -l.exp_m1())
    } else {
        (-l.exp_m1(), l.exp())
    }
}

/// Mean and standard error of `Λ(B_{a,b})` from `n_draws` variates.
pub fn mc_beta_mean(d: &Distribution, w: &Weight, a: u32, b: u32, n_draws: u64, rng: &mut ChaCha8Rng) -> Result<FactorEstimate> {
    let (mut count, mut mean, mut m2) = (0u64, 0.0f64, 0.0f64);
    let mut rejected = 0u64;
    for _ in 0..n_draws {
        let (u, t) = beta_variate(rng, a, b);
        let x = d.lambda_c(w, u, t);
        if !x.is_finite() {
            rejected += 1;
            continue;
        }
        count += 1;
        let delta = x - mean;
        mean += delta / count as f64;
        m2 += delta * (x - mean);
    }
    if rejected as f64 > MAX_REJECT_FRACTION * n_draws as f64 {
        return Err(GwjError::Estimation(format!(
            "{rejected} of {n_draws} draws of Λ were not finite for {d}"
        )));
    }
    let var = if count > 1 { m2 / (count - 1) as f64 } else { 0.0 };
    Ok(FactorEstimate {
        mean,
        std_error: (var / count as f64).sqrt(),
        accepted: count,
        rejected,
    })
}

/// Estimate of factor `i` (1-based) of a design: `E[Λ(B_{aᵢ,bᵢ})]` from the
/// stream `(seed, i)`. The same `(a, b, i, seed)` always gives the same value,
/// so factors shared between set sizes may be reused.
pub fn mc_factor(d: &Distribution, w: &Weight, spec: SchemeSpec, i: u32, n_draws: u64, seed: u64) -> Result<FactorEstimate> {
    if n_draws < MIN_DRAWS {
        return Err(GwjError::domain(format!("need at least {MIN_DRAWS} draws, got {n_draws}")));
    }
    if i == 0 || i > spec.n {
        return Err(GwjError::domain(format!("factor {i} is out of range for n = {}", spec.n)));
    }
    let (a, b) = spec.scheme.beta_params(i, spec.n);
    let mut rng = factor_rng(seed, i);
    mc_beta_mean(d, w, a as u32, b as u32, n_draws, &mut rng)
}

/// Combine raw factor estimates `E[Λ(B)]` into a design estimate with the
/// exact design constant; the standard error follows the delta method.
pub fn mc_assemble(spec: SchemeSpec, raw: &[FactorEstimate], n_draws: u64, seed: u64) -> Result<McEstimate> {
    if raw.len() != spec.n as usize {
        return Err(GwjError::domain(format!("expected {} factors, got {}", spec.n, raw.len())));
    }
    let half = num_rational::BigRational::new(1.into(), 2.into());
    let scale = spec.scheme.constant(spec.n)? * half;
    let means: Vec<f64> = raw.iter().map(|f| f.mean).collect();
    let estimate = -stable_product(&scale, &means)?;
    let mut var = 0.0;
    for k in 0..means.len() {
        let others: Vec<f64> = means.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, v)| *v).collect();
        let g = stable_product(&scale, &others)?;
        var += (g * raw[k].std_error).powi(2);
    }
    let per_factor = raw
        .iter()
        .enumerate()
        .map(|(k, f)| {
            let c = ratio_to_f64(&spec.scheme.factor_multiplier(k as u32 + 1, spec.n)?);
            Ok(FactorEstimate {
                mean: c * f.mean,
                std_error: c * f.std_error,
                ..f.clone()
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(McEstimate {
        estimate,
        std_error: var.sqrt(),
        n_draws,
        seed,
        rejected: raw.iter().map(|f| f.rejected).sum(),
        per_factor,
    })
}

/// Monte Carlo GWJ of a design: every factor from its own stream, then
/// [`mc_assemble`].
pub fn mc_gwj(d: &Distribution, w: &Weight, spec: SchemeSpec, n_draws: u64, seed: u64) -> Result<McEstimate> {
    if spec.n == 0 {
        return Err(GwjError::domain("set size n must be ≥ 1"));
    }
    let raw = (1..=spec.n)
        .into_par_iter()
        .map(|i| mc_factor(d, w, spec, i, n_draws, seed))
        .collect::<Result<Vec<_>>>()?;
    mc_assemble(spec, &raw, n_draws, seed)
}

/// Agreement rule for a Monte Carlo estimate against a reference value:
/// within three standard errors, plus a roundoff floor so that zero-variance
/// integrands still compare equal.
pub fn agrees(mc: &McEstimate, reference: f64) -> bool {
    (mc.estimate - reference).abs() <= 3.0 * mc.std_error + 1e-12 * reference.abs().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gwj::Engine;

    struct Counting<R> {
        inner: R,
        calls: u64,
    }

    impl<R: RngCore> RngCore for Counting<R> {
        fn next_u32(&mut self) -> u32 {
            self.calls += 1;
            self.inner.next_u32()
        }
        fn next_u64(&mut self) -> u64 {
            self.calls += 1;
            self.inner.next_u64()
        }
        fn fill_bytes(&mut self, dst: &mut [u8]) {
            self.calls += 1;
            self.inner.fill_bytes(dst)
        }
    }

    #[test]
    fn unit_accounting() {
        let d = Distribution::exponential(1.0).unwrap();
        for n in 1..=6u32 {
            for (scheme, units) in [
                (Scheme::Srs, n),
                (Scheme::Rss, n * n),
                (Scheme::MinRssu, n * (n + 1) / 2),
                (Scheme::MaxRssu, n * (n + 1) / 2),
            ] {
                let mut rng = Counting { inner: factor_rng(7, 0), calls: 0 };
                let s = draw_scheme_sample(&d, SchemeSpec { scheme, n }, &mut rng);
                assert_eq!(s.len(), n as usize);
                assert_eq!(rng.calls, units as u64, "{scheme} n={n}");
            }
        }
    }

    fn entry_mean(d: &Distribution, scheme: Scheme, n: u32, idx: usize, draws: usize) -> (f64, f64) {
        let mut rng = factor_rng(2024, 0);
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..draws {
            let x = draw_scheme_sample(d, SchemeSpec { scheme, n }, &mut rng)[idx];
            s += x;
            s2 += x * x;
        }
        let m = s / draws as f64;
        let var = s2 / draws as f64 - m * m;
        (m, (var / draws as f64).sqrt())
    }

    #[test]
    fn design_entries_have_the_right_law() {
        let (m, se) = entry_mean(&Distribution::Uniform01, Scheme::MaxRssu, 3, 2, 1_000_000);
        assert!((m - 0.75).abs() <= 3.0 * se, "{m} ± {se}");
        let (m, se) = entry_mean(&Distribution::exponential(1.0).unwrap(), Scheme::MinRssu, 3, 2, 1_000_000);
        assert!((m - 1.0 / 3.0).abs() <= 3.0 * se, "{m} ± {se}");
        let (m, _) = entry_mean(&Distribution::Uniform01, Scheme::MinRssu, 1, 0, 10_000);
        assert!((m - 0.5).abs() < 0.02);
    }

    #[test]
    fn estimates_match_examples() {
        let exp1 = Distribution::exponential(1.0).unwrap();
        let r = mc_gwj(&exp1, &Weight::Constant, SchemeSpec { scheme: Scheme::MinRssu, n: 3 }, 1_000_000, 11).unwrap();
        assert!(agrees(&r, -0.375), "{r:?}");
        for n in 1..=4 {
            let r = mc_gwj(&Distribution::Uniform01, &Weight::Constant, SchemeSpec { scheme: Scheme::Srs, n }, 1_000_000, 5).unwrap();
            assert_eq!(r.std_error, 0.0);
            assert!(agrees(&r, -0.5));
        }
        let r = mc_gwj(&Distribution::Uniform01, &Weight::Constant, SchemeSpec { scheme: Scheme::Rss, n: 2 }, 1_000_000, 5).unwrap();
        assert!(agrees(&r, -8.0 / 9.0), "{r:?}");
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let d = Distribution::pareto(2.0).unwrap();
        let spec = SchemeSpec { scheme: Scheme::Rss, n: 3 };
        let a = mc_gwj(&d, &Weight::Power(1.0), spec, 5000, 99).unwrap();
        let b = mc_gwj(&d, &Weight::Power(1.0), spec, 5000, 99).unwrap();
        let c = mc_gwj(&d, &Weight::Power(1.0), spec, 5000, 100).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
        assert_ne!(a.estimate, c.estimate);
    }

    #[test]
    fn too_few_draws() {
        let spec = SchemeSpec { scheme: Scheme::Srs, n: 1 };
        assert!(mc_gwj(&Distribution::Uniform01, &Weight::Constant, spec, 999, 1).is_err());
    }

    #[test]
    fn per_factor_means_track_quadrature() {
        let d = Distribution::phf(Distribution::exponential(1.0).unwrap(), 2.0).unwrap();
        let w = Weight::Power(1.0);
        let spec = SchemeSpec { scheme: Scheme::MaxRssu, n: 3 };
        let mc = mc_gwj(&d, &w, spec, 200_000, 3).unwrap();
        let q = Engine::default().gwj(&d, &w, spec).unwrap();
        for (f, p) in mc.per_factor.iter().zip(&q.per_factor) {
            assert!((f.mean - p).abs() <= 4.0 * f.std_error, "{} vs {p}", f.mean);
        }
    }
}
