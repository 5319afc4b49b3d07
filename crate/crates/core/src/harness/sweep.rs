//! Sweeps: the reference pairs, readout-schedule comparison and random check sets.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::eligible_stabilizers;
use super::experiment::{block_resource, run_experiment, ExperimentConfig, ExperimentRecord, PlanSpec, Variant};
use crate::clinr::{Schedule, REFERENCE_PAIRS};
use crate::error::{Error, Result};

/// Single check of the schedule comparison (the first stabilizer of pair S1).
pub const SINGLE_CHECK: &str = "X6 Y8 Z12 Z13 Y15 Z16 Y17";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SweepKind {
    /// Direct baseline plus every reference pair.
    Pairs,
    /// Direct, unverified gadget, one MCM check, one ECM check and the S6 pair.
    Schedules,
    /// `plans_per_r` random all-MCM plans for each `r` in `1..=r_max`.
    Random {
        #[serde(default = "default_r_max")]
        r_max: usize,
        #[serde(default = "default_plans")]
        plans_per_r: usize,
        #[serde(default = "default_cap")]
        weight_cap: usize,
    },
}

fn default_r_max() -> usize {
    5
}
fn default_plans() -> usize {
    10
}
fn default_cap() -> usize {
    8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub sweep: SweepKind,
    pub shots: usize,
    #[serde(default)]
    pub seed: u64,
    /// Applied to every generated config; defaults to the base direct config.
    #[serde(default)]
    pub base: Option<ExperimentConfig>,
}

/// One row of a sweep report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub sweep: String,
    pub label: String,
    /// Number of checks.
    pub r: usize,
    pub record: ExperimentRecord,
}

fn base_of(spec: &SweepSpec) -> ExperimentConfig {
    spec.base
        .clone()
        .unwrap_or_else(|| ExperimentConfig::direct(spec.shots, spec.seed))
}

fn derive(base: &ExperimentConfig, name: &str, plan: Option<PlanSpec>, shots: usize, seed: u64) -> ExperimentConfig {
    let mut c = match plan {
        None => ExperimentConfig::direct(shots, seed),
        Some(p) => ExperimentConfig::clinr(name, p, shots, seed),
    };
    c.name = name.into();
    c.noise = base.noise.clone();
    c.schedule = base.schedule;
    if let (Variant::Clinr { resource: r0, .. }, Variant::Clinr { resource, .. }) = (&base.variant, &mut c.variant)
    {
        *resource = r0.clone();
    }
    c
}

/// `(label, r, config)` for each point; seeds are `seed + index`.
pub fn sweep_configs(spec: &SweepSpec) -> Result<Vec<(String, usize, ExperimentConfig)>> {
    let base = base_of(spec);
    let mut pts: Vec<(String, usize, Option<PlanSpec>)> = vec![("direct".into(), 0, None)];
    match &spec.sweep {
        SweepKind::Pairs => {
            for (l, _, _) in REFERENCE_PAIRS {
                pts.push((l.into(), 2, Some(PlanSpec::reference(l))));
            }
        }
        SweepKind::Schedules => {
            pts.push((
                "none".into(),
                0,
                Some(PlanSpec::checks(&[(SINGLE_CHECK, Schedule::Unverified)])),
            ));
            pts.push(("mcm".into(), 1, Some(PlanSpec::checks(&[(SINGLE_CHECK, Schedule::Mcm)]))));
            pts.push(("ecm".into(), 1, Some(PlanSpec::checks(&[(SINGLE_CHECK, Schedule::Ecm)]))));
            pts.push(("1+1".into(), 2, Some(PlanSpec::reference("S6"))));
        }
        SweepKind::Random {
            r_max,
            plans_per_r,
            weight_cap,
        } => {
            let stabs = eligible_stabilizers(*weight_cap)?;
            if stabs.len() < *r_max {
                return Err(Error::Config("too few eligible stabilizers".into()));
            }
            let n = block_resource()?.n;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            for r in 1..=*r_max {
                for k in 0..*plans_per_r {
                    let picks = rand::seq::index::sample(&mut rng, stabs.len(), r);
                    let texts: Vec<String> = picks.iter().map(|i| stabs[i].to_sparse(n)).collect();
                    let checks: Vec<(&str, Schedule)> = texts.iter().map(|t| (t.as_str(), Schedule::Mcm)).collect();
                    pts.push((format!("r{r}-{k}"), r, Some(PlanSpec::checks(&checks))));
                }
            }
        }
    }
    Ok(pts
        .into_iter()
        .enumerate()
        .map(|(i, (label, r, plan))| {
            let cfg = derive(&base, &label, plan, spec.shots, spec.seed.wrapping_add(i as u64));
            (label, r, cfg)
        })
        .collect())
}

/// Runs configs as independent jobs; output order follows input order.
pub fn run_all(cfgs: &[ExperimentConfig]) -> Result<Vec<ExperimentRecord>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        cfgs.par_iter().map(run_experiment).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        cfgs.iter().map(run_experiment).collect()
    }
}

pub fn sweep_name(k: &SweepKind) -> &'static str {
    match k {
        SweepKind::Pairs => "pairs",
        SweepKind::Schedules => "schedules",
        SweepKind::Random { .. } => "random",
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepPoint>> {
    let pts = sweep_configs(spec)?;
    let cfgs: Vec<ExperimentConfig> = pts.iter().map(|(_, _, c)| c.clone()).collect();
    let recs = run_all(&cfgs)?;
    Ok(pts
        .into_iter()
        .zip(recs)
        .map(|((label, r, _), record)| SweepPoint {
            sweep: sweep_name(&spec.sweep).into(),
            label,
            r,
            record,
        })
        .collect())
}
