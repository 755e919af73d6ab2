use std::io::{self, Write};

use serde::Serialize;

use super::{Event, SimConfig, SimError};
use crate::policy::QueueState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Horizon,
    /// The watched queue emptied.
    Emptied,
    EventBudget,
}

/// Recorded run. Sample `k` is event number `stride * (k + 1)` plus the final
/// event; states are stored flat, `nodes` entries per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub scale: u64,
    pub horizon: f64,
    pub seed: u64,
    pub replication: u64,
    pub stride: u64,
    pub nodes: usize,
    pub initial_state: QueueState,
    pub times: Vec<f64>,
    pub classes: Vec<usize>,
    pub matched: Vec<Option<usize>>,
    pub states: Vec<u64>,
    pub final_state: QueueState,
    pub arrivals: Vec<u64>,
    pub events: u64,
    /// Real time the run stopped at.
    pub end_time: f64,
    /// Real time at which each queue was first empty.
    pub first_empty: Vec<Option<f64>>,
    pub termination: Termination,
    last: Option<Event>,
    last_recorded: bool,
}

impl SimTrace {
    pub(super) fn start(config: &SimConfig, p: usize) -> Self {
        let q = &config.initial_state.0;
        SimTrace {
            scale: config.scale,
            horizon: config.horizon,
            seed: config.seed,
            replication: config.replication,
            stride: config.trace_stride,
            nodes: p,
            initial_state: config.initial_state.clone(),
            times: Vec::new(),
            classes: Vec::new(),
            matched: Vec::new(),
            states: Vec::new(),
            final_state: config.initial_state.clone(),
            arrivals: vec![0; p],
            events: 0,
            end_time: 0.0,
            first_empty: q.iter().map(|&x| (x == 0).then_some(0.0)).collect(),
            termination: Termination::Horizon,
            last: None,
            last_recorded: false,
        }
    }

    #[inline]
    pub(crate) fn record(&mut self, ev: &Event, q: &[u64]) {
        self.events += 1;
        self.arrivals[ev.class] += 1;
        if let Some(j) = ev.matched {
            if q[j] == 0 && self.first_empty[j].is_none() {
                self.first_empty[j] = Some(ev.time);
            }
        }
        self.last_recorded = self.events.is_multiple_of(self.stride);
        if self.last_recorded {
            self.push(ev, q);
        }
        self.last = Some(*ev);
    }

    fn push(&mut self, ev: &Event, q: &[u64]) {
        self.times.push(ev.time);
        self.classes.push(ev.class);
        self.matched.push(ev.matched);
        self.states.extend_from_slice(q);
    }

    pub(super) fn finish(&mut self, q: Vec<u64>, end_time: f64) {
        if let (Some(ev), false) = (self.last, self.last_recorded) {
            self.push(&ev, &q);
        }
        self.final_state = QueueState(q);
        self.end_time = end_time;
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, k: usize) -> &[u64] {
        &self.states[k * self.nodes..(k + 1) * self.nodes]
    }

    /// `(t / n, Q_i(t) / n)` at every sample.
    pub fn scaled_path(&self, i: usize) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.scale as f64;
        (0..self.len()).map(move |k| (self.times[k] / n, self.state(k)[i] as f64 / n))
    }

    /// Scaled time actually simulated.
    pub fn scaled_end(&self) -> f64 {
        self.end_time / self.scale as f64
    }

    /// CSV with header `t,class,matched,q_1..q_p`; labels are 1-based and
    /// `matched = 0` means the arrival waited. Times are real time.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string(), "class".into(), "matched".into()];
        header.extend((1..=self.nodes).map(|i| format!("q_{i}")));
        w.write_record(&header)?;
        for k in 0..self.len() {
            let mut row = vec![
                format!("{}", self.times[k]),
                (self.classes[k] + 1).to_string(),
                self.matched[k].map_or(0, |j| j + 1).to_string(),
            ];
            row.extend(self.state(k).iter().map(u64::to_string));
            w.write_record(&row)?;
        }
        w.flush()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HittingTime {
    /// Scaled time of the first visit to zero.
    At(f64),
    /// Not observed; `horizon` is the scaled time actually simulated.
    NeverWithinHorizon { horizon: f64 },
}

impl HittingTime {
    pub fn time(self) -> Option<f64> {
        match self {
            HittingTime::At(t) => Some(t),
            HittingTime::NeverWithinHorizon { .. } => None,
        }
    }
}

/// First scaled time at which queue `i` is empty.
pub fn hitting_time(trace: &SimTrace, i: usize) -> HittingTime {
    match trace.first_empty[i] {
        Some(t) => HittingTime::At(t / trace.scale as f64),
        None => HittingTime::NeverWithinHorizon { horizon: trace.scaled_end() },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftEstimate {
    pub node: usize,
    /// Scaled queue units per unit of scaled time.
    pub slope: f64,
    /// Ordinary least-squares standard error; it ignores the serial
    /// correlation of the path, so compare slopes across seeds instead.
    pub stderr: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

pub const MIN_DRIFT_SAMPLES: usize = 100;

/// Least-squares slope of the scaled queue `i` over a scaled time window.
///
/// The default window is `[0.1 T, min(T, 0.9 ρ)]` with `T` the simulated
/// horizon and `ρ` the observed hitting time of `i` (if any).
pub fn drift_estimate(trace: &SimTrace, i: usize, window: Option<(f64, f64)>) -> Result<DriftEstimate, SimError> {
    let horizon = trace.scaled_end();
    let window = window.unwrap_or_else(|| {
        let rho = hitting_time(trace, i).time().unwrap_or(f64::INFINITY);
        (0.1 * horizon, horizon.min(0.9 * rho))
    });
    let pts: Vec<(f64, f64)> = trace.scaled_path(i).filter(|&(t, _)| t >= window.0 && t <= window.1).collect();
    let fit = ols(&pts).ok_or(SimError::InsufficientSamples { got: pts.len(), need: MIN_DRIFT_SAMPLES })?;
    Ok(DriftEstimate { node: i, slope: fit.0, stderr: fit.1, window, samples: pts.len() })
}

/// Slope and its standard error; `None` below [`MIN_DRIFT_SAMPLES`] points.
pub(crate) fn ols(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    let m = pts.len();
    if m < MIN_DRIFT_SAMPLES {
        return None;
    }
    let mf = m as f64;
    let tx = pts.iter().map(|p| p.0).sum::<f64>() / mf;
    let ty = pts.iter().map(|p| p.1).sum::<f64>() / mf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - tx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - tx) * (p.1 - ty)).sum();
    let slope = sxy / sxx;
    let ssr: f64 = pts.iter().map(|p| (p.1 - ty - slope * (p.0 - tx)).powi(2)).sum();
    Some((slope, (ssr / (mf - 2.0) / sxx).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(slope: f64, m: usize) -> SimTrace {
        let cfg = SimConfig::new(10, m as f64, QueueState(vec![0, 1000]), 0);
        let mut tr = SimTrace::start(&cfg, 2);
        for k in 1..=m {
            let t = k as f64 * 10.0;
            let q = (1000.0 + slope * t).round() as u64;
            tr.record(&Event { time: t, class: 1, matched: None }, &[0, q]);
        }
        tr.finish(vec![0, 0], m as f64 * 10.0);
        tr
    }

    #[test]
    fn exact_line() {
        let tr = synthetic(2.0, 500);
        let d = drift_estimate(&tr, 1, Some((0.0, 1e9))).unwrap();
        assert!((d.slope - 2.0).abs() < 1e-12);
        assert!(d.stderr < 1e-12);
    }

    #[test]
    fn too_few_samples() {
        let tr = synthetic(1.0, 50);
        assert_eq!(drift_estimate(&tr, 1, None), Err(SimError::InsufficientSamples { got: 46, need: 100 }));
    }

    #[test]
    fn hitting_time_zero_start() {
        let tr = synthetic(1.0, 10);
        assert_eq!(hitting_time(&tr, 0), HittingTime::At(0.0));
        assert_eq!(hitting_time(&tr, 1), HittingTime::NeverWithinHorizon { horizon: 10.0 });
    }

    #[test]
    fn csv_layout() {
        let tr = synthetic(0.0, 2);
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "t,class,matched,q_1,q_2\n10,2,0,0,1000\n20,2,0,0,1000\n");
    }
}
