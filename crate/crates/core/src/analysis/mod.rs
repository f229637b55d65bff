//! Monte Carlo harness and the estimators built on it.
//!
//! Every trial draws from its own ChaCha8 generator seeded by
//! [`mix`]`(master, trial index)`. Losses come from stream 0 and bit flips
//! from stream 1, and each stream consumes exactly one uniform per edge, so a
//! trial's loss and error patterns are nested across `p_loss` and `p_comp`
//! and independent of how trials are scheduled.

pub mod boundary;
pub mod fit;
pub mod percolation;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::degrade::{
    apply_losses, detect_loss_percolation, form_superplaquettes, restored_weights,
};
use crate::error::{check_probability, Error, Result};
use crate::homology::{trial_failed, CrossingTable};
use crate::lattice::ToricLattice;
use crate::matching::{build_syndrome_graph, matching_to_correction, min_weight_perfect_matching};
use crate::noise::{compute_syndrome, sample_errors};

pub const LOSS_STREAM: u64 = 0;
pub const ERROR_STREAM: u64 = 1;

/// Description of [`mix`] for run manifests.
pub const SEED_MIXING: &str =
    "seed = splitmix64(master ^ splitmix64(trial_index)); ChaCha8Rng::seed_from_u64(seed), stream 0 = losses, stream 1 = bit flips";

/// The splitmix64 finaliser (Steele, Lea & Flood), applied to `x + γ`.
#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trial seed.
#[inline]
pub fn mix(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

pub fn trial_rng(master: u64, index: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(master, index));
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialParams {
    pub size: usize,
    pub p_loss: f64,
    pub p_comp: f64,
    pub tau: f64,
}

impl TrialParams {
    fn validate(&self) -> Result<()> {
        ToricLattice::new(self.size)?;
        check_probability("p_loss", self.p_loss)?;
        if !(0.0..0.5).contains(&self.p_comp) {
            return Err(Error::Domain {
                name: "p_comp",
                value: self.p_comp,
                domain: "[0, 1/2)",
            });
        }
        if !(self.tau >= 0.0) {
            return Err(Error::Domain {
                name: "tau",
                value: self.tau,
                domain: "tau >= 0",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub seed_index: u64,
    pub size: usize,
    pub p_loss: f64,
    pub p_comp: f64,
    pub tau: f64,
    pub failed: bool,
    pub loss_blocked: bool,
    pub syndrome_size: usize,
    /// Seconds.
    pub wall_time: f64,
}

/// Outcome of one loss/error realisation decoded at several `τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    /// Failure flag per requested `τ`.
    pub failed: Vec<bool>,
    pub loss_blocked: bool,
    pub syndrome_size: usize,
}

/// Full pipeline for one trial, decoding the same syndrome once per `τ`.
pub fn decode_trial(
    lattice: &ToricLattice,
    p_loss: f64,
    p_comp: f64,
    taus: &[f64],
    master: u64,
    index: u64,
) -> Result<TrialOutcome> {
    let loss = apply_losses(lattice, p_loss, &mut trial_rng(master, index, LOSS_STREAM))?;
    let blocking = detect_loss_percolation(lattice, &loss);
    if p_comp == 0.0 {
        return Ok(TrialOutcome {
            failed: vec![blocking.any(); taus.len()],
            loss_blocked: blocking.any(),
            syndrome_size: 0,
        });
    }
    let partition = form_superplaquettes(lattice, &loss);
    let degraded = restored_weights(lattice, &loss, &partition, p_comp)?;
    let error = sample_errors(&loss, p_comp, &mut trial_rng(master, index, ERROR_STREAM))?;
    let syndrome = compute_syndrome(&degraded, &error);
    let table = CrossingTable::new(&degraded);
    let error_class = table.class_of(error.edges());
    let mut failed = Vec::with_capacity(taus.len());
    if syndrome.is_empty() {
        failed.resize(taus.len(), trial_failed(error_class, blocking));
    } else {
        let graph = build_syndrome_graph(&degraded, &syndrome, 0.0)?;
        for &tau in taus {
            let graph = graph.with_tau(tau);
            let matching = min_weight_perfect_matching(&graph)?;
            let correction = matching_to_correction(&degraded, &graph, &matching);
            let class = error_class.sum(&table.class_of(correction.edges()));
            failed.push(trial_failed(class, blocking));
        }
    }
    Ok(TrialOutcome {
        failed,
        loss_blocked: blocking.any(),
        syndrome_size: syndrome.len(),
    })
}

pub fn run_trial(params: &TrialParams, master: u64, index: u64) -> Result<TrialRecord> {
    params.validate()?;
    let lattice = ToricLattice::new(params.size)?;
    let start = Instant::now();
    let outcome = decode_trial(
        &lattice,
        params.p_loss,
        params.p_comp,
        &[params.tau],
        master,
        index,
    )?;
    Ok(TrialRecord {
        seed_index: index,
        size: params.size,
        p_loss: params.p_loss,
        p_comp: params.p_comp,
        tau: params.tau,
        failed: outcome.failed[0],
        loss_blocked: outcome.loss_blocked,
        syndrome_size: outcome.syndrome_size,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Trials `0..n_trials` in index order, run on the current rayon pool.
pub fn run_trials(params: &TrialParams, n_trials: u64, master: u64) -> Result<Vec<TrialRecord>> {
    params.validate()?;
    (0..n_trials)
        .into_par_iter()
        .map(|i| run_trial(params, master, i))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PfailEstimate {
    pub n_trials: u64,
    pub n_fail: u64,
    pub n_loss_blocked: u64,
    pub p_fail: f64,
    /// Binomial standard error of `p_fail`.
    pub stderr: f64,
}

impl PfailEstimate {
    pub fn from_counts(n_trials: u64, n_fail: u64, n_loss_blocked: u64) -> Self {
        let p = n_fail as f64 / n_trials as f64;
        Self {
            n_trials,
            n_fail,
            n_loss_blocked,
            p_fail: p,
            stderr: (p * (1.0 - p) / n_trials as f64).sqrt(),
        }
    }

    pub fn from_records(records: &[TrialRecord]) -> Self {
        let fails = records.iter().filter(|r| r.failed).count() as u64;
        let blocked = records.iter().filter(|r| r.loss_blocked).count() as u64;
        Self::from_counts(records.len() as u64, fails, blocked)
    }
}

pub fn estimate_pfail(params: &TrialParams, n_trials: u64, master: u64) -> Result<PfailEstimate> {
    let mut out = estimate_pfail_taus(
        params.size,
        params.p_loss,
        params.p_comp,
        &[params.tau],
        n_trials,
        master,
    )?;
    Ok(out.remove(0))
}

/// One estimate per `τ`, every `τ` decoding the same trials.
pub fn estimate_pfail_taus(
    size: usize,
    p_loss: f64,
    p_comp: f64,
    taus: &[f64],
    n_trials: u64,
    master: u64,
) -> Result<Vec<PfailEstimate>> {
    if n_trials == 0 {
        return Err(Error::Domain {
            name: "n_trials",
            value: 0.0,
            domain: "n_trials >= 1",
        });
    }
    for &tau in taus {
        TrialParams {
            size,
            p_loss,
            p_comp,
            tau,
        }
        .validate()?;
    }
    let lattice = ToricLattice::new(size)?;
    let outcomes: Vec<TrialOutcome> = (0..n_trials)
        .into_par_iter()
        .map(|i| decode_trial(&lattice, p_loss, p_comp, taus, master, i))
        .collect::<Result<_>>()?;
    let blocked = outcomes.iter().filter(|o| o.loss_blocked).count() as u64;
    Ok((0..taus.len())
        .map(|k| {
            let fails = outcomes.iter().filter(|o| o.failed[k]).count() as u64;
            PfailEstimate::from_counts(n_trials, fails, blocked)
        })
        .collect())
}

/// Two decoders run on identical trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairedComparison {
    pub n_trials: u64,
    pub fail_a: u64,
    pub fail_b: u64,
    /// Trials failed by `a` only.
    pub only_a: u64,
    /// Trials failed by `b` only.
    pub only_b: u64,
    /// McNemar statistic `(only_a - only_b) / sqrt(only_a + only_b)`;
    /// positive when `b` fails less often.
    pub z: f64,
}

impl PairedComparison {
    /// One-sided test that `b` fails less often than `a`.
    pub fn b_better_at(&self, z_critical: f64) -> bool {
        self.z > z_critical
    }
}

/// One-sided 95% critical value of the standard normal.
pub const Z_95: f64 = 1.644_853_626_951_472_2;

/// Compare `τ = tau_a` against `τ = tau_b` on the same trials.
pub fn paired_tau_comparison(
    size: usize,
    p_loss: f64,
    p_comp: f64,
    (tau_a, tau_b): (f64, f64),
    n_trials: u64,
    master: u64,
) -> Result<PairedComparison> {
    for tau in [tau_a, tau_b] {
        TrialParams {
            size,
            p_loss,
            p_comp,
            tau,
        }
        .validate()?;
    }
    let lattice = ToricLattice::new(size)?;
    let pairs: Vec<(bool, bool)> = (0..n_trials)
        .into_par_iter()
        .map(|i| {
            decode_trial(&lattice, p_loss, p_comp, &[tau_a, tau_b], master, i)
                .map(|o| (o.failed[0], o.failed[1]))
        })
        .collect::<Result<_>>()?;
    let count = |f: &dyn Fn(&(bool, bool)) -> bool| pairs.iter().filter(|p| f(p)).count() as u64;
    let only_a = count(&|&(a, b)| a && !b);
    let only_b = count(&|&(a, b)| !a && b);
    let discordant = (only_a + only_b) as f64;
    Ok(PairedComparison {
        n_trials,
        fail_a: count(&|p| p.0),
        fail_b: count(&|p| p.1),
        only_a,
        only_b,
        z: if discordant > 0.0 {
            (only_a as f64 - only_b as f64) / discordant.sqrt()
        } else {
            0.0
        },
    })
}
