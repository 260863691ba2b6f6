use gwj_core::mc::{self, McEstimate};
use gwj_core::orders::{self, AgingClass, Relation};
use gwj_core::verify::{self, VerdictReport};
use gwj_core::{
    aging_class_check, check_order, closed_form_gwj, default_config, mc_gwj, verify_theorem, ClosedFormKey, Distribution,
    Engine, GwjError, GwjResult, Result, SchemeSpec, Verdict, Weight, THEOREM_IDS,
};
use rayon::prelude::*;

use crate::config::{Command, MethodSel, Output, RunConfig};
use crate::output::{Cell, Table};

/// Relative closed-form vs quadrature gap that raises the disagreement flag.
pub const CLOSED_QUAD_TOL: f64 = 1e-8;

pub const VALUE_HEADER: [&str; 14] = [
    "dist",
    "weight",
    "scheme",
    "n",
    "method",
    "value",
    "error_estimate",
    "closed",
    "quad",
    "mc",
    "mc_std_error",
    "mc_draws",
    "seed",
    "flag",
];

pub const VERIFY_HEADER: [&str; 13] = [
    "theorem",
    "verdict",
    "margin",
    "conclusion_holds",
    "checks",
    "failed_hypotheses",
    "reason",
    "dist_a",
    "dist_b",
    "weight_a",
    "weight_b",
    "n_min",
    "n_max",
];

pub const ORDERS_HEADER: [&str; 8] = ["kind", "dist_a", "dist_b", "test", "result", "max_violation", "witness", "grid"];

/// Command output plus whether a verified conclusion failed.
pub enum Rendered {
    Table(Table),
    /// Pre-serialised JSON lines.
    Lines(Vec<String>),
}

pub struct Outcome {
    pub rendered: Rendered,
    pub failed: bool,
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    if let Some(t) = cfg.tol {
        if !(t.is_finite() && t >= 0.0) {
            return Err(GwjError::Parse(format!("--tol must be finite and ≥ 0, got {t}")));
        }
    }
    if let Some(g) = cfg.grid {
        if g < orders::MIN_GRID {
            return Err(GwjError::Parse(format!("--grid must be at least {}, got {g}", orders::MIN_GRID)));
        }
    }
    let engine = Engine::default();
    match cfg.command {
        Command::Compute => values(cfg, &engine, (1, 1)),
        Command::Table => values(cfg, &engine, (1, 5)),
        Command::Verify => verify_cmd(cfg, &engine),
        Command::Orders => orders_cmd(cfg),
    }
}

fn table_outcome(t: Table) -> Outcome {
    Outcome {
        rendered: Rendered::Table(t),
        failed: false,
    }
}

fn rel_gap(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn closed(engine: &Engine, d: &Distribution, w: &Weight, spec: SchemeSpec) -> Result<Option<GwjResult>> {
    closed_form_gwj(&ClosedFormKey::new(d, w, spec), engine)
}

fn value_row(cfg: &RunConfig, engine: &Engine, d: &Distribution, w: &Weight, spec: SchemeSpec) -> Result<Vec<Cell>> {
    let mut row: Vec<Cell> = vec![
        d.to_string().into(),
        w.to_string().into(),
        spec.scheme.as_str().into(),
        spec.n.into(),
        cfg.method_name().into(),
    ];
    let mc_cells = |e: &McEstimate| -> [Cell; 4] {
        [e.estimate.into(), e.std_error.into(), e.n_draws.into(), e.seed.into()]
    };
    let empty4 = || [Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty];
    match cfg.method {
        MethodSel::Closed => {
            let r = closed(engine, d, w, spec)?.ok_or_else(|| {
                GwjError::Domain(format!("no closed form for {d} with {} under {}", w, spec.scheme))
            })?;
            row.extend([r.value.into(), r.abs_error_estimate.into(), r.value.into(), Cell::Empty]);
            row.extend(empty4());
        }
        MethodSel::Quad => {
            let r = engine.gwj(d, w, spec)?;
            row.extend([r.value.into(), r.abs_error_estimate.into(), Cell::Empty, r.value.into()]);
            row.extend(empty4());
        }
        MethodSel::Mc => {
            let e = mc_gwj(d, w, spec, cfg.mc_draws, cfg.seed)?;
            row.extend([e.estimate.into(), e.std_error.into(), Cell::Empty, Cell::Empty]);
            row.extend(mc_cells(&e));
        }
        MethodSel::All => {
            let q = engine.gwj(d, w, spec)?;
            let c = closed(engine, d, w, spec)?;
            let e = mc_gwj(d, w, spec, cfg.mc_draws, cfg.seed)?;
            let flag = c.as_ref().is_some_and(|c| rel_gap(c.value, q.value) > CLOSED_QUAD_TOL) || !mc::agrees(&e, q.value);
            row.extend([q.value.into(), q.abs_error_estimate.into(), c.map(|c| c.value).into(), q.value.into()]);
            row.extend(mc_cells(&e));
            row.push(flag.into());
            return Ok(row);
        }
    }
    row.push(false.into());
    Ok(row)
}

impl RunConfig {
    fn method_name(&self) -> &'static str {
        match self.method {
            MethodSel::Closed => "closed",
            MethodSel::Quad => "quad",
            MethodSel::Mc => "mc",
            MethodSel::All => "all",
        }
    }
}

fn values(cfg: &RunConfig, engine: &Engine, default_n: (u32, u32)) -> Result<Outcome> {
    if cfg.dists.is_empty() {
        return Err(GwjError::Parse("at least one --dist is required".into()));
    }
    let (lo, hi) = cfg.n_range(default_n)?;
    if hi > engine.n_cap {
        return Err(GwjError::Parse(format!("set size {hi} exceeds the cap {}", engine.n_cap)));
    }
    let w = cfg.weight_or_default();
    let mut jobs: Vec<(&Distribution, SchemeSpec)> = Vec::new();
    for d in &cfg.dists {
        for s in cfg.scheme_list() {
            for n in lo..=hi {
                jobs.push((d, SchemeSpec::new(s, n)?));
            }
        }
    }
    let rows = jobs
        .par_iter()
        .map(|(d, spec)| value_row(cfg, engine, d, &w, *spec))
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(&VALUE_HEADER);
    for r in rows {
        t.push(r);
    }
    Ok(table_outcome(t))
}

fn theorem_ids(cfg: &RunConfig) -> Result<Vec<&str>> {
    if cfg.theorems.is_empty() {
        return Err(GwjError::Parse("at least one --theorem is required (or --theorem all)".into()));
    }
    let mut ids: Vec<&str> = Vec::new();
    for t in &cfg.theorems {
        let add: Vec<&str> = if t.eq_ignore_ascii_case("all") {
            THEOREM_IDS.to_vec()
        } else {
            vec![THEOREM_IDS.iter().copied().find(|id| *id == t.as_str()).ok_or_else(|| {
                GwjError::Parse(format!("unknown theorem id '{t}' (known: {})", THEOREM_IDS.join(", ")))
            })?]
        };
        for id in add {
            if !ids.contains(&id) {
                ids.push(id);
            }
        }
    }
    Ok(ids)
}

/// Registry default for `id` with the command-line overrides applied.
pub fn theorem_config(cfg: &RunConfig, id: &str) -> Result<verify::TheoremConfig> {
    let mut c = default_config(id)?;
    if let Some(d) = cfg.dists.first() {
        c.dist_a = d.clone();
    }
    if cfg.dist_b.is_some() {
        c.dist_b = cfg.dist_b.clone();
    }
    if let Some(w) = cfg.weight {
        c.weight_a = w;
    }
    if cfg.weight_b.is_some() {
        c.weight_b = cfg.weight_b;
    }
    let (lo, hi) = cfg.n_range((c.n_min, c.n_max))?;
    c.n_min = lo;
    c.n_max = hi;
    if let Some(g) = cfg.grid {
        c.grid = g;
    }
    if let Some(t) = cfg.tol {
        c.tol = t;
    }
    c.scale = cfg.scale.or(c.scale);
    c.shift = cfg.shift.or(c.shift);
    c.relation = cfg.relation.or(c.relation);
    c.rate = cfg.rate.or(c.rate);
    Ok(c)
}

fn verify_row(r: &VerdictReport) -> Vec<Cell> {
    let failed: Vec<&str> = r.failed_hypotheses().iter().map(|h| h.name.as_str()).collect();
    let c = &r.config;
    vec![
        r.theorem_id.clone().into(),
        r.verdict.as_str().into(),
        r.margin.into(),
        r.conclusion_holds.into(),
        (r.checks.iter().filter(|c| c.counted).count() as u64).into(),
        failed.join("; ").into(),
        r.reason.clone().unwrap_or_default().into(),
        c.dist_a.to_string().into(),
        c.dist_b.as_ref().map(|d| d.to_string()).unwrap_or_default().into(),
        c.weight_a.to_string().into(),
        c.weight_b.map(|w| w.to_string()).unwrap_or_default().into(),
        c.n_min.into(),
        c.n_max.into(),
    ]
}

fn verify_cmd(cfg: &RunConfig, engine: &Engine) -> Result<Outcome> {
    let ids = theorem_ids(cfg)?;
    let configs = ids.iter().map(|id| theorem_config(cfg, id)).collect::<Result<Vec<_>>>()?;
    let reports = ids
        .par_iter()
        .zip(configs.par_iter())
        .map(|(id, c)| verify_theorem(id, c, engine))
        .collect::<Result<Vec<_>>>()?;
    let failed = reports.iter().any(|r| r.verdict == Verdict::Fail);
    let rendered = if cfg.output == Output::Json {
        let lines = reports
            .iter()
            .map(|r| serde_json::to_string(r).map_err(|e| GwjError::Parse(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Rendered::Lines(lines)
    } else {
        let mut t = Table::new(&VERIFY_HEADER);
        for r in &reports {
            t.push(verify_row(r));
        }
        Rendered::Table(t)
    };
    Ok(Outcome { rendered, failed })
}

fn orders_cmd(cfg: &RunConfig) -> Result<Outcome> {
    if cfg.dists.is_empty() {
        return Err(GwjError::Parse("at least one --dist is required".into()));
    }
    let grid = cfg.grid.unwrap_or(orders::DEFAULT_GRID);
    let tol = cfg.tol.unwrap_or(orders::DEFAULT_TOL);
    let mut t = Table::new(&ORDERS_HEADER);
    if let Some(b) = &cfg.dist_b {
        let relations = cfg.relation.map_or(Relation::ALL.to_vec(), |r| vec![r]);
        for a in &cfg.dists {
            let reports = relations
                .par_iter()
                .map(|&rel| check_order(a, b, rel, grid, tol))
                .collect::<Result<Vec<_>>>()?;
            for r in reports {
                t.push(vec![
                    "order".into(),
                    a.to_string().into(),
                    b.to_string().into(),
                    r.relation.as_str().into(),
                    r.direction.as_str().into(),
                    r.max_violation.into(),
                    r.witness_u.into(),
                    (r.grid_size as u64).into(),
                ]);
            }
        }
    }
    if cfg.dist_b.is_none() || cfg.aging.is_some() {
        let classes = cfg.aging.map_or(AgingClass::ALL.to_vec(), |c| vec![c]);
        for a in &cfg.dists {
            let reports = classes
                .par_iter()
                .map(|&class| aging_class_check(a, class, grid, tol))
                .collect::<Result<Vec<_>>>()?;
            for r in reports {
                t.push(vec![
                    "aging".into(),
                    a.to_string().into(),
                    "".into(),
                    r.class.as_str().into(),
                    r.holds.into(),
                    r.max_violation.into(),
                    r.witness_x.into(),
                    (r.grid_size as u64).into(),
                ]);
            }
        }
    }
    Ok(table_outcome(t))
}
