//! Subcommands as pure functions from a configuration to a [`Document`].

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use trilayer_core::interfaces::Model;
use trilayer_core::model::{ModelConfig, Rates};
use trilayer_core::stationary::StationaryState;

use crate::error::{CliError, Result};
use crate::output::{Cell, Document, Table};

/// `start:stop:count`, inclusive of both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self> {
        if !start.is_finite() || !stop.is_finite() {
            return Err(CliError::Usage(format!("grid bounds must be finite: {start}:{stop}")));
        }
        if count < 2 {
            return Err(CliError::Usage(format!("grid needs at least 2 points, got {count}")));
        }
        if !(start < stop) {
            return Err(CliError::Usage(format!(
                "grid must be strictly increasing, got {start}:{stop}"
            )));
        }
        Ok(GridSpec { start, stop, count })
    }

    /// Endpoints are exact; interior points are `start + i·step`.
    pub fn points(&self) -> Vec<f64> {
        let last = self.count - 1;
        let step = (self.stop - self.start) / last as f64;
        (0..self.count)
            .map(|i| if i == last { self.stop } else { self.start + i as f64 * step })
            .collect()
    }
}

impl FromStr for GridSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || CliError::Usage(format!("grid must be start:stop:count, got {s:?}"));
        let mut parts = s.split(':');
        let (Some(a), Some(b), Some(n), None) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(bad());
        };
        let start = a.trim().parse().map_err(|_| bad())?;
        let stop = b.trim().parse().map_err(|_| bad())?;
        let count = n.trim().parse().map_err(|_| bad())?;
        GridSpec::new(start, stop, count)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    SigmaBar,
    Nu1,
    Nu2,
    SigmaQ,
    SigmaD,
    Lambda1,
    Lambda2,
    Mu,
}

impl SweepParam {
    pub const ALL: [SweepParam; 8] = [
        SweepParam::SigmaBar,
        SweepParam::Nu1,
        SweepParam::Nu2,
        SweepParam::SigmaQ,
        SweepParam::SigmaD,
        SweepParam::Lambda1,
        SweepParam::Lambda2,
        SweepParam::Mu,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::SigmaBar => "sigma_bar",
            SweepParam::Nu1 => "nu1",
            SweepParam::Nu2 => "nu2",
            SweepParam::SigmaQ => "sigma_Q",
            SweepParam::SigmaD => "sigma_D",
            SweepParam::Lambda1 => "lambda1",
            SweepParam::Lambda2 => "lambda2",
            SweepParam::Mu => "mu",
        }
    }

    /// Writes `value` into the matching field of `cfg`.
    pub fn apply(self, cfg: &mut ModelConfig, value: f64) -> Result<()> {
        let th = &mut cfg.thresholds;
        match self {
            SweepParam::SigmaBar => cfg.sigma_bar = value,
            SweepParam::Nu1 => th.nu1 = value,
            SweepParam::Nu2 => th.nu2 = value,
            SweepParam::SigmaQ => th.sigma_q = value,
            SweepParam::SigmaD => th.sigma_d = value,
            SweepParam::Lambda1 | SweepParam::Lambda2 | SweepParam::Mu => {
                let Rates::Linear(l) = &mut cfg.rates else {
                    return Err(CliError::Usage(format!(
                        "{} applies to linear rates only",
                        self.as_str()
                    )));
                };
                match self {
                    SweepParam::Lambda1 => l.lambda1 = value,
                    SweepParam::Lambda2 => l.lambda2 = value,
                    _ => l.mu = value,
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepParam {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        SweepParam::ALL.into_iter().find(|p| p.as_str() == s).ok_or_else(|| {
            let names: Vec<_> = SweepParam::ALL.iter().map(|p| p.as_str()).collect();
            CliError::Usage(format!("unknown sweep parameter {s:?}; expected one of {names:?}"))
        })
    }
}

fn positive(flag: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{flag} must be positive and finite, got {v}")))
    }
}

fn build_model(cfg: &ModelConfig) -> Result<Model> {
    let valid = cfg.clone().validate()?;
    Ok(Model::new(valid)?)
}

/// Critical radii at the configured `σ̄` and the critical supply values.
pub fn run_critical(cfg: &ModelConfig) -> Result<Document> {
    let model = build_model(cfg)?;
    let radii = model.critical_radii(cfg.sigma_bar)?;
    let cv = model.critical_values()?;
    Ok(Document::default()
        .field("sigma_bar", cfg.sigma_bar)
        .field("eta_star", radii.eta_star)
        .field("R_star", radii.r_star)
        .field("R_sub_star", radii.r_sub_star)
        .field("R_q_star", radii.r_q_star)
        .field("sigma_star", cv.sigma_star)
        .field("sigma_sub_star", cv.sigma_sub_star))
}

/// The dormant tumor at the configured `σ̄`.
pub fn run_stationary(cfg: &ModelConfig) -> Result<Document> {
    let model = build_model(cfg)?;
    let StationaryState { kind, residual } = model.stationary_solution(cfg.sigma_bar)?;
    Ok(Document::default()
        .field("sigma_bar", cfg.sigma_bar)
        .field("kind", kind.as_str())
        .field("R_s", kind.radius())
        .field("eta_s", kind.eta())
        .field("rho_s", kind.rho())
        .field("residual", residual))
}

/// The nutrient profile of the tumor of radius `radius`.
pub fn run_profile(cfg: &ModelConfig, radius: f64) -> Result<Document> {
    positive("R", radius)?;
    let model = build_model(cfg)?;
    let profile = model.assemble_profile(radius, cfg.sigma_bar)?;
    let mut table = Table::new(&["r", "sigma", "dsigma", "layer"]);
    for s in profile.samples() {
        table.push(vec![s.r.into(), s.sigma.into(), s.dsigma.into(), s.layer.as_str().into()]);
    }
    Ok(Document::default()
        .field("sigma_bar", cfg.sigma_bar)
        .field("R", radius)
        .field("rho", profile.rho())
        .field("eta", profile.eta())
        .table("profile", table))
}

/// The radius trajectory from `r0`. The `events` table is the secondary
/// output.
pub fn run_evolve(cfg: &ModelConfig, r0: f64, t_end: f64, sample_dt: f64) -> Result<Document> {
    positive("R0", r0)?;
    positive("t-end", t_end)?;
    positive("sample-dt", sample_dt)?;
    let model = build_model(cfg)?;
    let traj = model.evolve(r0, cfg.sigma_bar, t_end, sample_dt)?;

    let mut samples = Table::new(&["t", "R", "rho", "eta", "state"]);
    for s in &traj.samples {
        samples.push(vec![
            s.t.into(),
            s.r.into(),
            s.rho.into(),
            s.eta.into(),
            s.state.as_str().into(),
        ]);
    }
    let mut events = Table::new(&["t", "from", "to"]);
    for e in &traj.events {
        events.push(vec![e.t.into(), e.from.as_str().into(), e.to.as_str().into()]);
    }
    let r_s = match traj.terminal {
        trilayer_core::evolution::Terminal::ConvergedToStationary { r_s } => Some(r_s),
        _ => None,
    };
    Ok(Document::default()
        .field("sigma_bar", cfg.sigma_bar)
        .field("R0", r0)
        .field("t_end", t_end)
        .field("sample_dt", sample_dt)
        .field("terminal", traj.terminal.as_str())
        .field("R_s", r_s)
        .table("samples", samples)
        .table("events", events))
}

pub const SWEEP_COLUMNS: [&str; 9] = [
    "sigma_star",
    "sigma_sub_star",
    "R_star",
    "R_sub_star",
    "kind",
    "R_s",
    "eta_s",
    "rho_s",
    "error",
];

fn sweep_row(base: &ModelConfig, param: SweepParam, value: f64) -> Vec<Cell> {
    let mut row = vec![Cell::from(value)];
    let result = (|| -> Result<Vec<Cell>> {
        let mut cfg = base.clone();
        param.apply(&mut cfg, value)?;
        let model = build_model(&cfg)?;
        let cv = model.critical_values()?;
        let supply = model.supply(cfg.sigma_bar)?;
        let radii = *supply.radii();
        let kind = supply.stationary(&cv)?.kind;
        Ok(vec![
            cv.sigma_star.into(),
            cv.sigma_sub_star.into(),
            radii.r_star.into(),
            radii.r_sub_star.into(),
            kind.as_str().into(),
            kind.radius().into(),
            kind.eta().into(),
            kind.rho().into(),
            Cell::Empty,
        ])
    })();
    match result {
        Ok(cells) => row.extend(cells),
        Err(e) => {
            row.extend(std::iter::repeat_n(Cell::Empty, SWEEP_COLUMNS.len() - 1));
            row.push(Cell::text(row_error(&e)));
        }
    }
    row
}

fn row_error(e: &CliError) -> String {
    match e {
        CliError::Invalid(ce) => {
            let names: Vec<_> = ce.violations.iter().map(|v| v.name()).collect();
            format!("AssumptionViolated: {}", names.join("; "))
        }
        CliError::Solve(se) => se.name().to_string(),
        other => other.to_string(),
    }
}

/// One row per grid point, in grid order. Rows are evaluated in parallel
/// and failures are recorded per row.
pub fn run_sweep(cfg: &ModelConfig, param: SweepParam, grid: GridSpec) -> Result<Document> {
    let points = grid.points();
    let rows: Vec<Vec<Cell>> = points.par_iter().map(|&v| sweep_row(cfg, param, v)).collect();
    let mut columns = vec![param.as_str()];
    columns.extend(SWEEP_COLUMNS);
    let mut table = Table::new(&columns);
    for row in rows {
        table.push(row);
    }
    Ok(Document::default().field("param", param.as_str()).table("sweep", table))
}
