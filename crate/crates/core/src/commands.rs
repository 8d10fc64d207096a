//! Batch commands behind the `qkd` binary. Each produces CSV text with
//! numbers in 10-significant-digit scientific notation and rows ordered by
//! loss, then protocol name.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::Deserialize;

use crate::error::Error;
use crate::estimators::{
    ayki_q00_range, default_truncation, estimate_ayki, estimate_nondecoy, estimate_passive_bounded,
    estimate_weak_decoy, GroupIntervals, KeyGroups,
};
use crate::finite::fluctuation_sweep;
use crate::keyrate::{rate_total, KeyRateReport};
use crate::observables::{GroupStats, ObservedStatistics};
use crate::optimizer::{mu_sweep, optimize_mu};
use crate::protocol::{Evaluation, Protocol, TriggerDetector};
use crate::scenario::ScenarioConfig;

pub const SWEEP_HEADER: [&str; 12] = [
    "loss_db", "protocol", "mu_star", "r_total", "r_j0", "r_j1", "q_mu_0", "q_mu_1", "e_mu_0",
    "e_mu_1", "y1_lower", "e1_upper",
];
pub const OPTIMIZE_HEADER: [&str; 4] = ["loss_db", "protocol", "mu_star", "rate_star"];
pub const FLUCTUATION_HEADER: [&str; 6] = [
    "loss_db",
    "protocol",
    "mu_star",
    "nu_star",
    "signal_fraction",
    "rate",
];
pub const ANALYZE_HEADER: [&str; 12] = [
    "protocol", "mu", "nu", "r_total", "r_j0", "r_j1", "q_mu_0", "q_mu_1", "e_mu_0", "e_mu_1",
    "y1_lower", "e1_upper",
];

/// Failure of a command, split by exit status.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CommandError {
    /// Bad configuration or input data (exit status 2).
    #[error("{0}")]
    Validation(String),
    /// Failure while computing or writing results (exit status 1).
    #[error("{0}")]
    Runtime(String),
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Validation(_) => 2,
            CommandError::Runtime(_) => 1,
        }
    }
}

impl From<Error> for CommandError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Domain { .. } => CommandError::Validation(e.to_string()),
            other => CommandError::Runtime(other.to_string()),
        }
    }
}

/// Fixed 10-significant-digit scientific notation.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.9e}")
}

fn to_csv(header: &[&str], rows: &[Vec<String>]) -> Result<String, CommandError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let runtime = |e: csv::Error| CommandError::Runtime(e.to_string());
    w.write_record(header).map_err(runtime)?;
    for r in rows {
        w.write_record(r).map_err(runtime)?;
    }
    let bytes = w.into_inner().map_err(|e| CommandError::Runtime(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CommandError::Runtime(e.to_string()))
}

/// Groups `j >= 1` merged, so trigger detectors with more than two outcomes
/// still fit the two-group columns.
fn split_groups(obs: &ObservedStatistics, report: &KeyRateReport) -> [f64; 6] {
    let q0 = obs.gain(0);
    let e0 = obs.qber(0);
    let (mut q1, mut errors1) = (0.0, 0.0);
    for g in obs.groups.iter().skip(1) {
        q1 += g.gain;
        errors1 += g.error_count();
    }
    let e1 = if q1 > 0.0 { errors1 / q1 } else { 0.0 };
    let r0 = report.groups[0].clamped;
    let r1: f64 = report.groups.iter().skip(1).map(|g| g.clamped).sum();
    [r0, r1, q0, q1, e0, e1]
}

fn sweep_row(e: &Evaluation) -> Vec<String> {
    let [r0, r1, q0, q1, e0, e1] = split_groups(&e.obs, &e.report);
    let mut row = vec![fmt_num(e.loss_db), e.protocol.name().to_string(), fmt_num(e.report.mu), fmt_num(e.report.total)];
    row.extend([r0, r1, q0, q1, e0, e1, e.report.bounds.y1_lower, e.report.bounds.e1_reported()].map(fmt_num));
    row
}

/// Key rate per `(loss, protocol)` at the optimal `mu`, with the statistics
/// and bounds behind it.
pub fn cmd_sweep(cfg: &ScenarioConfig) -> Result<String, CommandError> {
    let setup = cfg.setup();
    let jobs: Vec<(f64, Protocol)> = cfg
        .loss_db
        .points()
        .into_iter()
        .flat_map(|l| cfg.sorted_protocols().into_iter().map(move |p| (l, p)))
        .collect();
    let rows: Vec<Vec<String>> = jobs
        .par_iter()
        .map(|&(loss, protocol)| {
            let best = optimize_mu(&setup, protocol, loss, cfg.mu_interval)?;
            let e = setup.evaluate(protocol, best.mu_star, loss)?;
            Ok(sweep_row(&e))
        })
        .collect::<Result<_, Error>>()?;
    to_csv(&SWEEP_HEADER, &rows)
}

/// Optimal `mu` and rate per `(loss, protocol)`.
pub fn cmd_optimize(cfg: &ScenarioConfig) -> Result<String, CommandError> {
    let rows = mu_sweep(&cfg.setup(), &cfg.sorted_protocols(), &cfg.loss_db.points(), cfg.mu_interval)?;
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![fmt_num(r.loss_db), r.protocol.name().into(), fmt_num(r.mu_star), fmt_num(r.rate_star)])
        .collect();
    to_csv(&OPTIMIZE_HEADER, &rows)
}

/// Fluctuation-aware optimal rates; each protocol's rows end at its cutoff.
pub fn cmd_fluctuation(cfg: &ScenarioConfig) -> Result<String, CommandError> {
    let fl = cfg
        .fluctuation
        .as_ref()
        .ok_or_else(|| CommandError::Validation("the fluctuation command needs a fluctuation block".into()))?;
    let rows = fluctuation_sweep(&cfg.setup(), &cfg.sorted_protocols(), &cfg.loss_db.points(), fl, cfg.mu_interval)?;
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let weak = r.protocol == Protocol::Weak;
            vec![
                fmt_num(r.loss_db),
                r.protocol.name().into(),
                fmt_num(r.choice.mu),
                if weak { fmt_num(r.choice.nu) } else { String::new() },
                fmt_num(r.choice.signal_fraction),
                fmt_num(r.rate),
            ]
        })
        .collect();
    to_csv(&FLUCTUATION_HEADER, &rows)
}

#[derive(Debug, Deserialize)]
struct CountRow {
    intensity: f64,
    j: usize,
    pulses: f64,
    detections: f64,
    errors: f64,
}

/// Observed statistics per intensity, from raw counts.
pub fn read_counts(text: &str, groups: usize) -> Result<BTreeMap<u64, ObservedStatistics>, CommandError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut table: BTreeMap<u64, Vec<Option<GroupStats>>> = BTreeMap::new();
    for (k, record) in reader.deserialize::<CountRow>().enumerate() {
        // header is line 1
        let line = k + 2;
        let bad = |m: String| CommandError::Validation(format!("line {line}: {m}"));
        let r = record.map_err(|e| bad(format!("malformed row ({e})")))?;
        if !(r.intensity > 0.0 && r.intensity.is_finite()) {
            return Err(bad(format!("intensity {} must be positive", r.intensity)));
        }
        if r.j >= groups {
            return Err(bad(format!("j = {} exceeds the detector resolution {}", r.j, groups - 1)));
        }
        if !(r.pulses > 0.0) {
            return Err(bad("pulses must be positive".into()));
        }
        if !(r.detections >= 0.0 && r.detections <= r.pulses) {
            return Err(bad(format!("detections {} exceed pulses {}", r.detections, r.pulses)));
        }
        if !(r.errors >= 0.0 && r.errors <= r.detections) {
            return Err(bad(format!("errors {} exceed detections {}", r.errors, r.detections)));
        }
        let slot = table.entry(r.intensity.to_bits()).or_insert_with(|| vec![None; groups]);
        if slot[r.j].is_some() {
            return Err(bad(format!("duplicate row for intensity {} and j = {}", r.intensity, r.j)));
        }
        slot[r.j] = Some(GroupStats {
            gain: r.detections / r.pulses,
            qber: if r.detections > 0.0 { r.errors / r.detections } else { 0.0 },
            trigger_prob: 0.0,
        });
    }
    if table.is_empty() {
        return Err(CommandError::Validation("measured data has no rows".into()));
    }
    table
        .into_iter()
        .map(|(bits, slots)| {
            let mu = f64::from_bits(bits);
            let groups = slots
                .into_iter()
                .enumerate()
                .map(|(j, g)| {
                    g.ok_or_else(|| CommandError::Validation(format!("intensity {mu} has no row for j = {j}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok((bits, ObservedStatistics { mu, groups }))
        })
        .collect()
}

/// Result of analysing measured counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub protocol: Protocol,
    pub nu: Option<f64>,
    pub obs: ObservedStatistics,
    pub report: KeyRateReport,
}

impl Analysis {
    pub fn text_report(&self) -> String {
        let mut s = format!("protocol        {}\n", self.protocol);
        s += &format!("mu              {}\n", self.obs.mu);
        if let Some(nu) = self.nu {
            s += &format!("nu              {nu}\n");
        }
        for (j, g) in self.obs.groups.iter().enumerate() {
            s += &format!("group {j}         Q = {:.6e}  E = {:.6e}\n", g.gain, g.qber);
        }
        s += &format!("Y1 lower bound  {:.6e}\n", self.report.bounds.y1_lower);
        s += &format!("e1 upper bound  {:.6e}\n", self.report.bounds.e1_reported());
        for (j, g) in self.report.groups.iter().enumerate() {
            s += &format!("R_{j}             {:.6e}\n", g.clamped);
        }
        s += &format!("key rate        {:.6e} bits per pulse\n", self.report.total);
        s
    }

    pub fn csv(&self) -> Result<String, CommandError> {
        let [r0, r1, q0, q1, e0, e1] = split_groups(&self.obs, &self.report);
        let mut row = vec![
            self.protocol.name().to_string(),
            fmt_num(self.obs.mu),
            self.nu.map(fmt_num).unwrap_or_default(),
            fmt_num(self.report.total),
        ];
        row.extend([r0, r1, q0, q1, e0, e1, self.report.bounds.y1_lower, self.report.bounds.e1_reported()].map(fmt_num));
        to_csv(&ANALYZE_HEADER, &[row])
    }
}

/// Runs the configured estimator on measured counts.
pub fn analyze_counts(cfg: &ScenarioConfig, protocol: Protocol, text: &str) -> Result<Analysis, CommandError> {
    let det = cfg.detector.response()?;
    let data = read_counts(text, det.resolution() + 1)?;
    let mut intensities: Vec<ObservedStatistics> = data.into_values().collect();
    intensities.sort_by(|a, b| b.mu.total_cmp(&a.mu));
    let single = |name: &str| -> Result<ObservedStatistics, CommandError> {
        if intensities.len() != 1 {
            return Err(CommandError::Validation(format!(
                "protocol '{name}' expects one intensity, found {}",
                intensities.len()
            )));
        }
        Ok(intensities[0].clone())
    };
    let eta_a = match cfg.detector {
        TriggerDetector::Threshold { eta_a, .. } => Some(eta_a),
        TriggerDetector::Pnr { .. } => None,
    };
    let need_threshold = || {
        eta_a.ok_or_else(|| CommandError::Validation(format!("protocol '{protocol}' needs a threshold trigger detector")))
    };
    let params = &cfg.protocol_params;
    let (obs, nu, report) = match protocol {
        Protocol::NonDecoy => {
            let obs = single("nondecoy")?;
            let b = estimate_nondecoy(&obs, obs.mu, need_threshold()?);
            (obs.clone(), None, rate_total(&b, &obs, params))
        }
        Protocol::Ayki => {
            let obs = single("ayki")?;
            let (_, hi) = ayki_q00_range(&obs);
            let b = estimate_ayki(&obs, obs.mu, need_threshold()?, hi)?;
            (obs.clone(), None, rate_total(&b, &obs, params))
        }
        Protocol::Passive => {
            let obs = single("passive")?;
            let t = default_truncation(obs.mu, &det);
            let b = estimate_passive_bounded(&GroupIntervals::exact(&obs), &det, t, cfg.passive_coupling)?;
            (obs.clone(), None, rate_total(&b, &obs, params))
        }
        Protocol::Weak => {
            if intensities.len() != 2 {
                return Err(CommandError::Validation(format!(
                    "protocol 'weak' expects two intensities, found {}",
                    intensities.len()
                )));
            }
            let (signal, decoy) = (&intensities[0], &intensities[1]);
            let groups = cfg.weak_decoy.map_or(KeyGroups::default(), |w| w.key_groups);
            let b = estimate_weak_decoy(signal, decoy, signal.mu, decoy.mu, need_threshold()?, groups)?;
            (signal.clone(), Some(decoy.mu), rate_total(&b, signal, params))
        }
        Protocol::Infinite | Protocol::Pnr => {
            return Err(CommandError::Validation(format!(
                "protocol '{protocol}' needs the channel model and cannot analyse measured data"
            )))
        }
    };
    Ok(Analysis {
        protocol,
        nu,
        obs,
        report,
    })
}

/// Reads the measured data named in the configuration and analyses it.
pub fn cmd_analyze(cfg: &ScenarioConfig) -> Result<Analysis, CommandError> {
    let a = cfg
        .analysis
        .as_ref()
        .ok_or_else(|| CommandError::Validation("the analyze command needs an analysis block".into()))?;
    let path = cfg.resolve(&a.data);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CommandError::Validation(format!("cannot read {}: {e}", path.display())))?;
    analyze_counts(cfg, a.protocol, &text)
}

/// Writes `text` to `path`, creating parent directories.
pub fn write_output(path: &Path, text: &str) -> Result<(), CommandError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CommandError::Runtime(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CommandError::Runtime(format!("{}: {e}", path.display())))
}
