//! Machine-readable run reports.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dispatch::Commitment;
use crate::error::Result;
use crate::grid::GridInstance;
use crate::vqa::{Aggregate, StageTimings, UcRun, VqaConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodRecord {
    pub trial: usize,
    pub period: usize,
    pub seed: u64,
    pub load: f64,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub commitment: Option<Commitment>,
    pub powers: Vec<f64>,
    pub total_cost: Option<f64>,
    pub marginal_price: Option<f64>,
    pub candidates_evaluated: usize,
    pub iterations: usize,
    pub final_energy: Option<f64>,
    pub fallback: bool,
    pub exact_cost: Option<f64>,
    pub error_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub trial: usize,
    pub period: usize,
    #[serde(flatten)]
    pub stages: StageTimings,
}

/// Results of a multi-period run. Wall-clock data lives in `timings`, which
/// is the only part that varies between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub instance: String,
    pub n_units: usize,
    pub config: VqaConfig,
    pub periods: Vec<PeriodRecord>,
    pub aggregate: Aggregate,
    pub timings: Vec<TimingRecord>,
}

impl RunReport {
    pub fn new(instance: &GridInstance, loads: &[f64], config: &VqaConfig, run: &UcRun) -> Self {
        let mut periods = Vec::with_capacity(run.runs.len());
        let mut timings = Vec::new();
        for r in &run.runs {
            let load = loads[r.period];
            let record = match &r.outcome {
                Ok(h) => {
                    let s = &h.solution;
                    timings.push(TimingRecord {
                        trial: r.trial,
                        period: r.period,
                        stages: h.timings,
                    });
                    PeriodRecord {
                        trial: r.trial,
                        period: r.period,
                        seed: r.seed,
                        load,
                        status: "ok".into(),
                        message: None,
                        commitment: Some(s.commitment),
                        powers: s.dispatch.powers.clone(),
                        total_cost: Some(s.dispatch.total_cost),
                        marginal_price: Some(s.dispatch.marginal_price),
                        candidates_evaluated: s.candidates_evaluated,
                        iterations: s.iterations,
                        final_energy: Some(s.final_energy).filter(|e| e.is_finite()),
                        fallback: s.fallback,
                        exact_cost: s.exact_cost,
                        error_pct: s.error_pct,
                    }
                }
                Err(message) => PeriodRecord {
                    trial: r.trial,
                    period: r.period,
                    seed: r.seed,
                    load,
                    status: "failed".into(),
                    message: Some(message.clone()),
                    commitment: None,
                    powers: Vec::new(),
                    total_cost: None,
                    marginal_price: None,
                    candidates_evaluated: 0,
                    iterations: 0,
                    final_energy: None,
                    fallback: false,
                    exact_cost: run.exact_costs[r.period],
                    error_pct: None,
                },
            };
            periods.push(record);
        }
        Self {
            schema_version: SCHEMA_VERSION,
            instance: instance.name().to_string(),
            n_units: instance.len(),
            config: config.clone(),
            periods,
            aggregate: run.aggregate.clone(),
            timings,
        }
    }

    pub fn to_json<W: Write>(&self, sink: W) -> Result<()> {
        serde_json::to_writer_pretty(sink, self)?;
        Ok(())
    }

    /// One row per `(trial, period)`. Contains no timing data.
    pub fn write_summary_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record([
            "trial",
            "period",
            "load",
            "status",
            "assignment",
            "cost",
            "exact",
            "error_pct",
            "iterations",
            "candidates",
            "fallback",
        ])?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for p in &self.periods {
            w.write_record([
                p.trial.to_string(),
                p.period.to_string(),
                p.load.to_string(),
                p.status.clone(),
                p.commitment.map(|c| c.to_string()).unwrap_or_default(),
                opt(p.total_cost),
                opt(p.exact_cost),
                opt(p.error_pct),
                p.iterations.to_string(),
                p.candidates_evaluated.to_string(),
                p.fallback.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::builtin_instance;
    use crate::vqa::solve_uc;

    #[test]
    fn summary_and_json_for_three_units() {
        let (g, profile) = builtin_instance("uc3").unwrap();
        let config = VqaConfig {
            seed: 5,
            compute_error: true,
            ..VqaConfig::new(126_200.0)
        };
        let run = solve_uc(&g, &profile, &config).unwrap();
        let report = RunReport::new(&g, profile.loads(), &config, &run);
        assert_eq!(report.periods.len(), 4);
        assert_eq!(report.timings.len(), 4);

        let mut csv = Vec::new();
        report.write_summary_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        let first: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(&first[..5], &["0", "0", "170", "ok", "001"]);
        let cost: f64 = first[5].parse().unwrap();
        assert!((cost - 1264.5).abs() < 1e-9);
        assert_eq!(first[7], "0");

        let mut json = Vec::new();
        report.to_json(&mut json).unwrap();
        let back: RunReport = serde_json::from_slice(&json).unwrap();
        assert_eq!(back.periods, report.periods);
        assert_eq!(back.schema_version, 1);
    }
}
