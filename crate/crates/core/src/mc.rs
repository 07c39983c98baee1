//! Seeded Monte Carlo trajectories through the protocol's measurement branches.
//!
//! Each round draws the parity from the closed-form even probability of
//! the current parameters, then an X outcome with probability 1/2, and on
//! odd parity advances the parameters through [`recycle_params`].
//!
//! # Streams
//!
//! Randomness comes from ChaCha8 keyed by the master seed. Shot `i` of
//! [`estimate`] reads ChaCha stream `i`, and [`sample_run`] reads stream 0,
//! so shot `i` never depends on the total shot count or on thread
//! scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::p_even_formula;
use crate::ecp::{recycle_params, MessageLog, Verdict, WClassParams, XOutcome};
use crate::error::{Error, Result};
use crate::pcd::Parity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub parity: Parity,
    pub x_outcome: XOutcome,
    pub correction_applied: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    /// Standard W state obtained in this round (1-based).
    Success { round: usize },
    /// Every one of `rounds` rounds came out odd.
    Exhausted { rounds: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub seed: u64,
    pub stream: u64,
    pub rounds: Vec<RoundRecord>,
    pub status: Status,
    pub log: MessageLog,
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn sample_run(params: &WClassParams, max_rounds: usize, seed: u64) -> Result<Trajectory> {
    sample_stream(params, max_rounds, seed, 0)
}

/// Even-parity probability of each round along the all-odd path. The
/// recursion is deterministic, so every shot shares this schedule.
fn even_schedule(params: &WClassParams, max_rounds: usize) -> Result<Vec<f64>> {
    if max_rounds < 1 {
        return Err(Error::invalid("at least one round is required"));
    }
    let mut current = *params;
    let mut schedule = Vec::with_capacity(max_rounds);
    for round in 1..=max_rounds {
        schedule.push(p_even_formula(&current));
        if round < max_rounds {
            current = recycle_params(&current)?;
        }
    }
    Ok(schedule)
}

/// Draws one round: parity first, then the ancilla X outcome.
fn draw_round(rng: &mut ChaCha8Rng, p_even: f64) -> RoundRecord {
    let parity = if rng.random::<f64>() < p_even { Parity::Even } else { Parity::Odd };
    let x_outcome = if rng.random::<bool>() { XOutcome::Plus } else { XOutcome::Minus };
    RoundRecord { parity, x_outcome, correction_applied: x_outcome == XOutcome::Minus }
}

fn run_schedule(schedule: &[f64], seed: u64, stream: u64) -> Trajectory {
    let mut rng = stream_rng(seed, stream);
    let max_rounds = schedule.len();
    let mut rounds = Vec::new();
    let mut log = MessageLog::new();
    let mut status = Status::Exhausted { rounds: max_rounds };

    for (i, &p_even) in schedule.iter().enumerate() {
        let round = i + 1;
        let record = draw_round(&mut rng, p_even);
        rounds.push(record);
        log.broadcast(round, Verdict::after(record.parity, round, max_rounds));
        if record.parity == Parity::Even {
            status = Status::Success { round };
            break;
        }
    }
    Trajectory { seed, stream, rounds, status, log }
}

/// Same draws as [`run_schedule`], keeping only the success round.
fn success_round(schedule: &[f64], seed: u64, stream: u64) -> Option<usize> {
    let mut rng = stream_rng(seed, stream);
    schedule
        .iter()
        .position(|&p_even| draw_round(&mut rng, p_even).parity == Parity::Even)
        .map(|i| i + 1)
}

/// One trajectory drawn from stream `stream` of `seed`.
pub fn sample_stream(
    params: &WClassParams,
    max_rounds: usize,
    seed: u64,
    stream: u64,
) -> Result<Trajectory> {
    Ok(run_schedule(&even_schedule(params, max_rounds)?, seed, stream))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotStats {
    pub shots: u64,
    /// `successes_per_round[k]` counts shots that succeeded in round `k + 1`.
    pub successes_per_round: Vec<u64>,
    pub exhausted: u64,
}

impl ShotStats {
    pub fn max_rounds(&self) -> usize {
        self.successes_per_round.len()
    }

    /// Empirical probability of success within `n` rounds.
    pub fn p_hat(&self, n: usize) -> f64 {
        let hits: u64 = self.successes_per_round.iter().take(n).sum();
        hits as f64 / self.shots as f64
    }

    /// Binomial standard error `√(P̂(1 − P̂)/shots)`.
    pub fn std_err(&self, n: usize) -> f64 {
        let p = self.p_hat(n);
        (p * (1.0 - p) / self.shots as f64).sqrt()
    }

    /// Mean round of success among successful shots.
    pub fn mean_success_round(&self) -> Option<f64> {
        let hits: u64 = self.successes_per_round.iter().sum();
        (hits > 0).then(|| {
            let weighted: u64 = self
                .successes_per_round
                .iter()
                .enumerate()
                .map(|(k, &c)| (k as u64 + 1) * c)
                .sum();
            weighted as f64 / hits as f64
        })
    }
}

/// Aggregates `shots` trajectories drawn from streams `0..shots` of `seed`.
pub fn estimate(params: &WClassParams, max_rounds: usize, shots: u64, seed: u64) -> Result<ShotStats> {
    if shots < 1 {
        return Err(Error::invalid("at least one shot is required"));
    }
    let schedule = even_schedule(params, max_rounds)?;
    let tally = |mut counts: Vec<u64>, stream: u64| {
        match success_round(&schedule, seed, stream) {
            Some(round) => counts[round - 1] += 1,
            None => counts[max_rounds] += 1,
        }
        counts
    };
    let merge = |a: Vec<u64>, b: Vec<u64>| a.iter().zip(&b).map(|(x, y)| x + y).collect::<Vec<_>>();

    let mut counts = (0..shots)
        .into_par_iter()
        .fold(|| vec![0u64; max_rounds + 1], tally)
        .reduce(|| vec![0u64; max_rounds + 1], merge);
    let exhausted = counts.pop().expect("exhausted slot");
    Ok(ShotStats { shots, successes_per_round: counts, exhausted })
}
