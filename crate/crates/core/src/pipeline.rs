//! End-to-end runs: build a relaxation, realize it, solve it and summarize.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::{extract_minimizer, gauge_distance, solve_qsdp};
use crate::realize::{to_real_economical, to_real_naive, Mode};
use crate::relax::{build, build_rsos1, RelaxOptions, QPOP};
use crate::sdp::{backend_from_env, solve_with, RealSDP, SolverOptions, Status};
use crate::Quaternion;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Qsos,
    QsosStrengthened,
    Rsos1,
    Sparse,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Qsos, Method::QsosStrengthened, Method::Rsos1, Method::Sparse];

    pub fn name(self) -> &'static str {
        match self {
            Method::Qsos => "qsos",
            Method::QsosStrengthened => "qsos_strengthened",
            Method::Rsos1 => "rsos1",
            Method::Sparse => "sparse",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        Method::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| Error::InvalidOptions(format!("unknown method '{s}'")))
    }

    /// `base` adjusted for this method.
    pub fn options(self, base: &RelaxOptions) -> RelaxOptions {
        match self {
            Method::Qsos | Method::Rsos1 => base.clone().sparse(false).strengthen(false),
            Method::QsosStrengthened => base.clone().sparse(false).strengthen(true),
            Method::Sparse => base.clone().sparse(true).strengthen(false),
        }
    }
}

/// Summary of a rank-one extraction attempt.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractionSummary {
    pub rank: usize,
    pub second_ratio: f64,
    pub completed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidate: Option<Vec<[f64; 4]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective_at_candidate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_residual: Option<f64>,
    pub tight: bool,
    /// Distance to the known ground truth after gauge alignment.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gauge_error: Option<f64>,
}

/// One solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    pub realization: String,
    pub bound: f64,
    pub status: String,
    /// Quaternion Gram/multiplier block sizes (negative for real blocks).
    pub blocks: Vec<i64>,
    /// Equations of the quaternion program.
    pub constraints: usize,
    /// Block structure and equation count of the solved real program.
    pub real_blocks: Vec<i64>,
    pub real_constraints: usize,
    pub iterations: usize,
    pub time: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extraction: Option<ExtractionSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extraction_error: Option<String>,
}

impl Report {
    pub fn usable(&self) -> bool {
        self.status == Status::Optimal.as_str() || self.status == Status::NearOptimal.as_str()
    }
}

/// Options of a single run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub relax: RelaxOptions,
    pub mode: Mode,
    pub tol: f64,
    pub extract: bool,
    pub truth: Option<Vec<Quaternion>>,
}

impl RunConfig {
    pub fn new(relax: RelaxOptions) -> Self {
        RunConfig { relax, mode: Mode::Economical, tol: crate::sdp::DEFAULT_TOL, extract: false, truth: None }
    }
}

/// The real program solved for `method` under `cfg`.
pub fn realize(p: &QPOP, method: Method, cfg: &RunConfig) -> Result<RealSDP> {
    if method == Method::Rsos1 {
        return build_rsos1(p);
    }
    let q = build(p, &method.options(&cfg.relax))?;
    Ok(match cfg.mode {
        Mode::Economical => to_real_economical(&q)?.0,
        Mode::Naive => to_real_naive(&q)?.0,
    })
}

fn q4(q: &Quaternion) -> [f64; 4] {
    [q.r, q.i, q.j, q.k]
}

pub fn run(p: &QPOP, method: Method, cfg: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    if method == Method::Rsos1 {
        let real = build_rsos1(p)?;
        let backend = backend_from_env()?;
        let s = solve_with(backend.as_ref(), &real, &SolverOptions { tol: cfg.tol, ..SolverOptions::default() });
        return Ok(Report {
            method,
            order: Some(1),
            realization: "real".into(),
            bound: s.value(),
            status: s.status.as_str().into(),
            blocks: vec![],
            constraints: 0,
            real_blocks: real.block_struct.clone(),
            real_constraints: real.m(),
            iterations: s.iterations,
            time: start.elapsed().as_secs_f64(),
            extraction: None,
            extraction_error: None,
        });
    }
    let opts = method.options(&cfg.relax);
    let q = build(p, &opts)?;
    let blocks = q.blocks.iter().map(|b| if b.real { -(b.dim as i64) } else { b.dim as i64 }).collect();
    let constraints = q.constraints.len();
    let solved = solve_qsdp(q, cfg.mode, cfg.tol)?;
    let mut report = Report {
        method,
        order: Some(opts.order),
        realization: match cfg.mode {
            Mode::Economical => "economical".into(),
            Mode::Naive => "naive".into(),
        },
        bound: solved.bound(),
        status: solved.status().as_str().into(),
        blocks,
        constraints,
        real_blocks: solved.real.block_struct.clone(),
        real_constraints: solved.real.m(),
        iterations: solved.solution.iterations,
        time: 0.0,
        extraction: None,
        extraction_error: None,
    };
    if cfg.extract && report.usable() {
        match extract_minimizer(p, &solved, 1e-6) {
            Ok(e) => {
                let c = e.certificate.as_ref();
                report.extraction = Some(ExtractionSummary {
                    rank: e.rank_report.rank,
                    second_ratio: e.rank_report.second_ratio(),
                    completed: e.completed,
                    candidate: c.and_then(|c| c.candidate.as_ref()).map(|x| x.iter().map(q4).collect()),
                    objective_at_candidate: c.map(|c| c.objective_at_candidate),
                    gap: c.map(|c| c.gap),
                    max_residual: c.map(|c| c.constraint_residuals.iter().fold(0.0, |a: f64, b| a.max(*b))),
                    tight: c.is_some_and(|c| c.tight),
                    gauge_error: match (c.and_then(|c| c.candidate.as_ref()), &cfg.truth) {
                        (Some(x), Some(t)) if x.len() == t.len() => Some(gauge_distance(x, t)),
                        _ => None,
                    },
                });
            }
            Err(e) => report.extraction_error = Some(e.to_string()),
        }
    }
    report.time = start.elapsed().as_secs_f64();
    Ok(report)
}
