use std::fmt;
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use gwj_core::{AgingClass, Distribution, GwjError, Relation, Scheme, Weight};

/// Default seed when neither `--seed` nor `GWJ_SEED` is given.
pub const DEFAULT_SEED: u64 = 20_240_101;
pub const DEFAULT_MC_DRAWS: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// GWJ values for the requested laws, designs and set sizes.
    Compute,
    /// One row per (law, design, n); needs at least one --dist.
    Table,
    /// Run theorem checks from the registry.
    Verify,
    /// Stochastic-order and aging-class certificates.
    Orders,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodSel {
    Closed,
    Quad,
    Mc,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Output {
    Csv,
    Json,
    Text,
}

/// A `--scheme` value: one design or `all`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeSel {
    All,
    One(Scheme),
}

impl FromStr for SchemeSel {
    type Err = GwjError;

    fn from_str(s: &str) -> Result<Self, GwjError> {
        if s.trim().eq_ignore_ascii_case("all") {
            Ok(SchemeSel::All)
        } else {
            s.parse().map(SchemeSel::One)
        }
    }
}

impl fmt::Display for SchemeSel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeSel::All => f.write_str("all"),
            SchemeSel::One(s) => f.write_str(s.as_str()),
        }
    }
}

#[cfg(test)]
fn value_name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value().expect("no skipped variants").get_name().to_string()
}

/// General weighted extropy of ranked set sampling designs.
///
/// Exit codes: 0 success, 1 a verified conclusion failed, 2 usage error,
/// 3 numerical error.
#[derive(Debug, Clone, PartialEq, Parser)]
#[command(name = "gwj", version)]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,

    /// Distribution spec, e.g. uniform, power:2, exp:1, pareto:1, phf:exp:1:2,
    /// prhf:uniform:0.5, affine:exp:1:2:0.5. Repeatable.
    #[arg(long = "dist", value_name = "SPEC")]
    pub dists: Vec<Distribution>,

    /// Second law for two-sample checks.
    #[arg(long, value_name = "SPEC")]
    pub dist_b: Option<Distribution>,

    /// Weight spec: const or pow:M.
    #[arg(long, value_name = "SPEC")]
    pub weight: Option<Weight>,

    /// Weight of the second law.
    #[arg(long, value_name = "SPEC")]
    pub weight_b: Option<Weight>,

    /// srs, rss, minrssu, maxrssu or all. Repeatable.
    #[arg(long = "scheme", value_name = "SCHEME")]
    pub schemes: Vec<SchemeSel>,

    /// Single set size.
    #[arg(long, conflicts_with_all = ["n_min", "n_max"])]
    pub n: Option<u32>,

    #[arg(long)]
    pub n_min: Option<u32>,

    #[arg(long)]
    pub n_max: Option<u32>,

    #[arg(long, value_enum, default_value_t = MethodSel::Quad)]
    pub method: MethodSel,

    /// Monte Carlo draws per factor.
    #[arg(long, default_value_t = DEFAULT_MC_DRAWS)]
    pub mc_draws: u64,

    #[arg(long, env = "GWJ_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    #[arg(long, value_enum, default_value_t = Output::Csv)]
    pub output: Output,

    /// Tolerance of order certificates (orders) or of verified conclusions (verify).
    #[arg(long)]
    pub tol: Option<f64>,

    /// Grid size of order and hypothesis certificates.
    #[arg(long)]
    pub grid: Option<usize>,

    /// Theorem id from the registry, or all. Repeatable.
    #[arg(long = "theorem", value_name = "ID")]
    pub theorems: Vec<String>,

    /// Slope a of φ(x) = a·x + b.
    #[arg(long)]
    pub scale: Option<f64>,

    /// Intercept b of φ(x) = a·x + b.
    #[arg(long, allow_hyphen_values = true)]
    pub shift: Option<f64>,

    /// dispersive, star, convex, superadditive or hazard.
    #[arg(long)]
    pub relation: Option<Relation>,

    /// Rate λ of the exponential comparison law.
    #[arg(long)]
    pub rate: Option<f64>,

    /// ifr, dfr, ifra, nbu or decreasing-density.
    #[arg(long)]
    pub aging: Option<AgingClass>,
}

impl RunConfig {
    /// Command line that parses back to an equal configuration.
    #[cfg(test)]
    pub fn to_args(&self) -> Vec<String> {
        let mut a = vec!["gwj".to_string(), value_name(&self.command)];
        let mut push = |flag: &str, v: String| {
            a.push(format!("--{flag}"));
            a.push(v);
        };
        for d in &self.dists {
            push("dist", d.to_string());
        }
        if let Some(d) = &self.dist_b {
            push("dist-b", d.to_string());
        }
        if let Some(w) = &self.weight {
            push("weight", w.to_string());
        }
        if let Some(w) = &self.weight_b {
            push("weight-b", w.to_string());
        }
        for s in &self.schemes {
            push("scheme", s.to_string());
        }
        let opt = |v: Option<u32>| v.map(|x| x.to_string());
        for (flag, v) in [("n", opt(self.n)), ("n-min", opt(self.n_min)), ("n-max", opt(self.n_max))] {
            if let Some(v) = v {
                push(flag, v);
            }
        }
        push("method", value_name(&self.method));
        push("mc-draws", self.mc_draws.to_string());
        push("seed", self.seed.to_string());
        push("output", value_name(&self.output));
        if let Some(t) = self.tol {
            push("tol", t.to_string());
        }
        if let Some(g) = self.grid {
            push("grid", g.to_string());
        }
        for t in &self.theorems {
            push("theorem", t.clone());
        }
        for (flag, v) in [("scale", self.scale), ("shift", self.shift), ("rate", self.rate)] {
            if let Some(v) = v {
                push(flag, v.to_string());
            }
        }
        if let Some(r) = self.relation {
            push("relation", r.as_str().to_string());
        }
        if let Some(c) = self.aging {
            push("aging", c.as_str().to_string());
        }
        a
    }

    pub fn weight_or_default(&self) -> Weight {
        self.weight.unwrap_or(Weight::Constant)
    }

    /// Requested designs; all four when none are given.
    pub fn scheme_list(&self) -> Vec<Scheme> {
        let mut out = Vec::new();
        let sels = if self.schemes.is_empty() { &[SchemeSel::All][..] } else { &self.schemes[..] };
        for s in sels {
            let add: Vec<Scheme> = match s {
                SchemeSel::All => Scheme::ALL.to_vec(),
                SchemeSel::One(s) => vec![*s],
            };
            for s in add {
                if !out.contains(&s) {
                    out.push(s);
                }
            }
        }
        out
    }

    /// Set-size range, `default` when no size flag is given.
    pub fn n_range(&self, default: (u32, u32)) -> Result<(u32, u32), GwjError> {
        let (lo, hi) = match (self.n, self.n_min, self.n_max) {
            (Some(n), _, _) => (n, n),
            (None, None, None) => default,
            (None, lo, hi) => {
                let lo = lo.unwrap_or(1);
                (lo, hi.unwrap_or(lo.max(default.1)))
            }
        };
        if lo == 0 || lo > hi {
            return Err(GwjError::Parse(format!("invalid set-size range {lo}..={hi}")));
        }
        Ok((lo, hi))
    }
}
