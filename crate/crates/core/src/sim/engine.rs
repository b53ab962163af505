use thiserror::Error;

use super::config::{ConfigError, QueueCap, RejectionPolicy, SelectionPolicy, SimulationConfig};
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Manuscript {
    pub id: u64,
    /// Days since simulation start.
    pub arrival_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Accepted {
    pub manuscript: Manuscript,
    pub decision_time: f64,
    /// 1-based index of the meeting that accepted the manuscript.
    pub meeting_index: u64,
}

impl Accepted {
    pub fn waiting_time(&self) -> f64 {
        self.decision_time - self.manuscript.arrival_time
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rejected {
    pub manuscript: Manuscript,
    pub rejection_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub accepted: Vec<Accepted>,
    pub rejected: Vec<Rejected>,
    pub in_queue_at_end: Vec<Manuscript>,
    /// `(meeting_index, queue length just before selection)` for every meeting.
    pub queue_lengths: Vec<(u64, usize)>,
    pub config: SimulationConfig,
}

impl SimulationTrace {
    pub fn total_arrivals(&self) -> usize {
        self.accepted.len() + self.rejected.len() + self.in_queue_at_end.len()
    }

    /// Number of manuscripts accepted at each meeting, indexed from meeting 1.
    pub fn accepted_per_meeting(&self) -> Vec<usize> {
        let mut counts = vec![0; self.config.horizon_periods as usize];
        for a in &self.accepted {
            counts[(a.meeting_index - 1) as usize] += 1;
        }
        counts
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("invalid injected arrivals: {0}")]
    Arrivals(String),
}

/// Arrival instants of a homogeneous Poisson process with rate
/// `lambda_per_period / period_days` per day on `[0, horizon_periods * period_days)`.
///
/// Inter-arrival gaps are drawn with [`SimRng::exponential`] until the
/// horizon is passed; the output is ascending.
pub fn generate_arrivals(
    lambda_per_period: f64,
    period_days: f64,
    horizon_periods: u64,
    rng: &mut SimRng,
) -> Vec<f64> {
    let mut arrivals = Vec::new();
    if lambda_per_period <= 0.0 {
        return arrivals;
    }
    let rate = lambda_per_period / period_days;
    let end = horizon_periods as f64 * period_days;
    arrivals.reserve((lambda_per_period * horizon_periods as f64 * 1.05) as usize + 16);
    let mut t = 0.0;
    loop {
        t += rng.exponential(rate);
        if t >= end {
            return arrivals;
        }
        arrivals.push(t);
    }
}

/// Puts `manuscript` into `queue`, applying `policy` when the queue is full.
/// Returns the manuscript that was turned away, if any.
///
/// # Panics
///
/// If the queue is already longer than `cap`.
pub fn admit_arrival(
    queue: &mut Vec<Manuscript>,
    manuscript: Manuscript,
    cap: QueueCap,
    policy: RejectionPolicy,
    rng: &mut SimRng,
) -> Option<Manuscript> {
    if cap.admits(queue.len()) {
        queue.push(manuscript);
        return None;
    }
    assert_eq!(
        Some(queue.len()),
        cap.limit(),
        "queue length exceeds its cap"
    );
    match policy {
        RejectionPolicy::Lifo => Some(manuscript),
        RejectionPolicy::Random => {
            let victim = rng.index_below(queue.len() + 1);
            if victim == queue.len() {
                Some(manuscript)
            } else {
                let dropped = queue.remove(victim);
                queue.push(manuscript);
                Some(dropped)
            }
        }
    }
}

/// Removes up to `capacity` manuscripts from `queue` and returns them in
/// arrival order. The rest of the queue keeps its order.
///
/// RANDOM selection draws a uniform subset with a partial Fisher-Yates
/// shuffle over queue positions.
pub fn step_meeting(
    queue: &mut Vec<Manuscript>,
    policy: SelectionPolicy,
    capacity: usize,
    meeting_time: f64,
    rng: &mut SimRng,
) -> Vec<Manuscript> {
    debug_assert!(queue.iter().all(|m| m.arrival_time < meeting_time));
    let take = capacity.min(queue.len());
    if take == queue.len() {
        return std::mem::take(queue);
    }
    match policy {
        SelectionPolicy::Fifo => queue.drain(..take).collect(),
        SelectionPolicy::Random => {
            let mut positions: Vec<usize> = (0..queue.len()).collect();
            for i in 0..take {
                let j = i + rng.index_below(positions.len() - i);
                positions.swap(i, j);
            }
            let mut chosen = vec![false; queue.len()];
            for &p in &positions[..take] {
                chosen[p] = true;
            }
            let mut selected = Vec::with_capacity(take);
            let mut remaining = Vec::with_capacity(queue.len() - take);
            for (m, pick) in queue.drain(..).zip(chosen) {
                if pick {
                    selected.push(m);
                } else {
                    remaining.push(m);
                }
            }
            *queue = remaining;
            selected
        }
    }
}

/// Runs the model with Poisson arrivals drawn from `config.seed`.
///
/// The generator produces the whole arrival stream first; the same stream
/// then drives the rejection and selection policies.
pub fn simulate(config: &SimulationConfig) -> Result<SimulationTrace, SimError> {
    config.validate()?;
    let mut rng = SimRng::seeded(config.seed);
    let arrivals = generate_arrivals(
        config.lambda_per_period,
        config.period_days,
        config.horizon_periods,
        &mut rng,
    );
    Ok(run(config, &arrivals, &mut rng))
}

/// Runs the model on an explicit, ascending list of arrival times in
/// `[0, horizon_periods * period_days)`.
pub fn simulate_with_arrivals(
    config: &SimulationConfig,
    arrivals: &[f64],
) -> Result<SimulationTrace, SimError> {
    config.validate()?;
    let end = config.horizon_periods as f64 * config.period_days;
    if let Some(bad) = arrivals.iter().find(|t| !(t.is_finite() && **t >= 0.0 && **t < end)) {
        return Err(SimError::Arrivals(format!(
            "arrival time {bad} outside [0, {end})"
        )));
    }
    if arrivals.windows(2).any(|w| w[1] < w[0]) {
        return Err(SimError::Arrivals("arrival times must be ascending".into()));
    }
    let mut rng = SimRng::seeded(config.seed);
    Ok(run(config, arrivals, &mut rng))
}

fn run(config: &SimulationConfig, arrivals: &[f64], rng: &mut SimRng) -> SimulationTrace {
    let mut queue: Vec<Manuscript> = Vec::new();
    let mut accepted = Vec::with_capacity(arrivals.len());
    let mut rejected = Vec::new();
    let mut queue_lengths = Vec::with_capacity(config.horizon_periods as usize);
    let mut pending = arrivals.iter().enumerate().peekable();

    for meeting_index in 1..=config.horizon_periods {
        let meeting_time = meeting_index as f64 * config.period_days;
        while let Some((id, &t)) = pending.next_if(|(_, &t)| t < meeting_time) {
            let manuscript = Manuscript {
                id: id as u64,
                arrival_time: t,
            };
            if let Some(out) = admit_arrival(
                &mut queue,
                manuscript,
                config.queue_cap,
                config.rejection_policy,
                rng,
            ) {
                rejected.push(Rejected {
                    manuscript: out,
                    rejection_time: t,
                });
            }
        }
        queue_lengths.push((meeting_index, queue.len()));
        let selected = step_meeting(
            &mut queue,
            config.selection_policy,
            config.capacity_per_meeting,
            meeting_time,
            rng,
        );
        accepted.extend(selected.into_iter().map(|manuscript| Accepted {
            manuscript,
            decision_time: meeting_time,
            meeting_index,
        }));
    }
    debug_assert!(pending.next().is_none());

    SimulationTrace {
        accepted,
        rejected,
        in_queue_at_end: queue,
        queue_lengths,
        config: config.clone(),
    }
}
