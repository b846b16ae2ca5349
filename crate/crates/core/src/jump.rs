//! Seeded simulator of single-ion shelving trajectories.
//!
//! The ion alternates between a bright manifold, where laser-driven cycling
//! produces detectable fluorescence, and the dark metastable shelf. Dwell
//! times are exponential in both directions (rate-equation dynamics: the
//! observable dwell statistics depend only on the transition rates), photon
//! counts per time bin are Poisson in the bright fraction of the bin, and
//! every random draw flows from one explicit seed so a run is reproducible
//! bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Transition rates of the shelving level scheme.
///
/// `bright_rate` is the detected fluorescence rate while the ion cycles;
/// `shelve_rate` the rate of lamp-driven departures toward the metastable
/// level; `unshelve_rate` the metastable decay rate (inverse shelf
/// lifetime). `intermediate_lifetime` models the short-lived upper level
/// crossed on the way to the shelf; it is collapsed to zero by default
/// because it sits many orders below any practical bin width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelScheme {
    pub bright_rate: f64,
    pub shelve_rate: f64,
    pub unshelve_rate: f64,
    pub intermediate_lifetime: f64,
}

impl LevelScheme {
    pub fn new(bright_rate: f64, shelve_rate: f64, unshelve_rate: f64) -> Result<Self, SimError> {
        let s = Self {
            bright_rate,
            shelve_rate,
            unshelve_rate,
            intermediate_lifetime: 0.0,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_intermediate_lifetime(mut self, lifetime_s: f64) -> Result<Self, SimError> {
        self.intermediate_lifetime = lifetime_s;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<(), SimError> {
        let finite = self.bright_rate.is_finite()
            && self.shelve_rate.is_finite()
            && self.unshelve_rate.is_finite()
            && self.intermediate_lifetime.is_finite();
        if !finite {
            return Err(SimError::InvalidConfig("rates must be finite".into()));
        }
        if self.bright_rate < 0.0 || self.shelve_rate < 0.0 || self.intermediate_lifetime < 0.0 {
            return Err(SimError::InvalidConfig("rates must be non-negative".into()));
        }
        if self.unshelve_rate <= 0.0 {
            return Err(SimError::InvalidConfig(
                "unshelve_rate must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// When a trajectory stops: after a fixed laboratory duration, or once a
/// target number of complete dark periods has been recorded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopCriterion {
    Duration(f64),
    TargetDarkPeriods(u64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryConfig {
    pub bin_width_s: f64,
    pub seed: u64,
    pub stop: StopCriterion,
    pub detection_efficiency: f64,
}

impl TrajectoryConfig {
    pub fn new(seed: u64, stop: StopCriterion) -> Self {
        Self {
            bin_width_s: 1.0,
            seed,
            stop,
            detection_efficiency: 1.0,
        }
    }

    pub fn with_bin_width(mut self, bin_width_s: f64) -> Self {
        self.bin_width_s = bin_width_s;
        self
    }

    pub fn with_detection_efficiency(mut self, eff: f64) -> Self {
        self.detection_efficiency = eff;
        self
    }

    fn validate(&self) -> Result<(), SimError> {
        if !(self.bin_width_s > 0.0) || !self.bin_width_s.is_finite() {
            return Err(SimError::InvalidConfig("bin width must be positive".into()));
        }
        if !(self.detection_efficiency > 0.0 && self.detection_efficiency <= 1.0) {
            return Err(SimError::InvalidConfig(
                "detection efficiency must lie in (0, 1]".into(),
            ));
        }
        match self.stop {
            StopCriterion::Duration(t) if !(t > 0.0) || !t.is_finite() => Err(
                SimError::InvalidConfig("stop duration must be positive".into()),
            ),
            StopCriterion::TargetDarkPeriods(0) => Err(SimError::InvalidConfig(
                "target dark periods must be >= 1".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Advisory check: a bin much wider than the shelf lifetime cannot
    /// resolve dark periods.
    pub fn warnings(&self, scheme: &LevelScheme) -> Vec<String> {
        let mut out = Vec::new();
        let shelf = 1.0 / scheme.unshelve_rate;
        if self.bin_width_s > 0.1 * shelf {
            out.push(format!(
                "bin width {} s is not small against the shelf lifetime {} s; \
                 dark-period edges will be poorly resolved",
                self.bin_width_s, shelf
            ));
        }
        out
    }
}

/// Ground-truth shelving event: fluorescence stops at `shelve_time_s` and
/// returns at `unshelve_time_s`. `censored` marks periods that overlap the
/// end of the recorded trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpRecord {
    pub shelve_time_s: f64,
    pub unshelve_time_s: f64,
    pub censored: bool,
}

impl JumpRecord {
    pub fn dwell_s(&self) -> f64 {
        self.unshelve_time_s - self.shelve_time_s
    }
}

/// Binned photon counts over laboratory time.
#[derive(Debug, Clone, PartialEq)]
pub struct FluorescenceTrace {
    pub bin_width_s: f64,
    pub counts: Vec<u32>,
    pub t_start_s: f64,
}

impl FluorescenceTrace {
    pub fn duration_s(&self) -> f64 {
        self.counts.len() as f64 * self.bin_width_s
    }
}

/// Raw event chain before binning.
struct EventChain {
    records: Vec<JumpRecord>,
    end_time_s: f64,
}

/// Generate alternating bright/dark events from `t` up to `horizon`.
fn extend_chain(
    rng: &mut ChaCha8Rng,
    scheme: &LevelScheme,
    records: &mut Vec<JumpRecord>,
    mut t: f64,
    horizon: f64,
) {
    if scheme.shelve_rate == 0.0 {
        return;
    }
    loop {
        let wait = exp_variate(rng, scheme.shelve_rate);
        let onset = t + wait;
        if onset >= horizon {
            return;
        }
        let delay = if scheme.intermediate_lifetime > 0.0 {
            exp_variate(rng, 1.0 / scheme.intermediate_lifetime)
        } else {
            0.0
        };
        let dwell = exp_variate(rng, scheme.unshelve_rate);
        let unshelve = onset + delay + dwell;
        records.push(JumpRecord {
            shelve_time_s: onset,
            unshelve_time_s: unshelve,
            censored: false,
        });
        t = unshelve;
        if t >= horizon {
            return;
        }
    }
}

fn exp_variate(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    // Inverse CDF on (0, 1]; guards the u = 0 corner.
    let u: f64 = rng.gen::<f64>();
    let u = if u <= 0.0 { f64::MIN_POSITIVE } else { u };
    -u.ln() / rate
}

fn build_chain(
    rng: &mut ChaCha8Rng,
    scheme: &LevelScheme,
    config: &TrajectoryConfig,
) -> EventChain {
    let w = config.bin_width_s;
    match config.stop {
        StopCriterion::Duration(t_stop) => {
            let mut records = Vec::new();
            let end = (t_stop / w).ceil().max(1.0) * w;
            extend_chain(rng, scheme, &mut records, 0.0, end);
            EventChain {
                records,
                end_time_s: end,
            }
        }
        StopCriterion::TargetDarkPeriods(m) => {
            // Phase 1: accumulate M complete dark periods.
            let mut records = Vec::new();
            let mut t = 0.0;
            if scheme.shelve_rate > 0.0 {
                while records.len() < m as usize {
                    let wait = exp_variate(rng, scheme.shelve_rate);
                    let onset = t + wait;
                    let delay = if scheme.intermediate_lifetime > 0.0 {
                        exp_variate(rng, 1.0 / scheme.intermediate_lifetime)
                    } else {
                        0.0
                    };
                    let dwell = exp_variate(rng, scheme.unshelve_rate);
                    let unshelve = onset + delay + dwell;
                    records.push(JumpRecord {
                        shelve_time_s: onset,
                        unshelve_time_s: unshelve,
                        censored: false,
                    });
                    t = unshelve;
                }
            }
            // Phase 2: pad with further bins so the final dark period does
            // not touch the trace boundary, continuing the chain honestly.
            let end = ((t / w).ceil() + 2.0) * w;
            extend_chain(rng, scheme, &mut records, t, end);
            EventChain {
                records,
                end_time_s: end,
            }
        }
    }
}

/// Overlap of `[a, b)` with the union of dark intervals, assuming records are
/// ordered and non-overlapping.
fn dark_overlap(records: &[JumpRecord], a: f64, b: f64) -> f64 {
    let mut acc = 0.0;
    for r in records {
        if r.shelve_time_s >= b {
            break;
        }
        let lo = r.shelve_time_s.max(a);
        let hi = r.unshelve_time_s.min(b);
        if hi > lo {
            acc += hi - lo;
        }
    }
    acc
}

fn simulate_with_stream(
    scheme: &LevelScheme,
    config: &TrajectoryConfig,
    stream: u64,
) -> Result<(FluorescenceTrace, Vec<JumpRecord>), SimError> {
    scheme.validate()?;
    config.validate()?;
    if scheme.bright_rate == 0.0 {
        return Err(SimError::InvalidConfig(
            "bright_rate must be positive for fluorescence detection".into(),
        ));
    }

    // Stream order is part of the reproducibility contract: all event times
    // are drawn first, then the per-bin photon counts in bin order.
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(stream);

    let chain = build_chain(&mut rng, scheme, config);
    let w = config.bin_width_s;
    let n_bins = (chain.end_time_s / w).round().max(1.0) as usize;

    let mut records = chain.records;
    for r in &mut records {
        if r.unshelve_time_s > chain.end_time_s {
            r.censored = true;
        }
    }

    let mut counts = Vec::with_capacity(n_bins);
    let mut cursor = 0usize; // first record that can still overlap future bins
    for k in 0..n_bins {
        let a = k as f64 * w;
        let b = a + w;
        while cursor < records.len() && records[cursor].unshelve_time_s <= a {
            cursor += 1;
        }
        let dark = dark_overlap(&records[cursor..], a, b);
        let lambda = scheme.bright_rate * (w - dark).max(0.0) * config.detection_efficiency;
        let c = if lambda > 0.0 {
            let poisson = Poisson::new(lambda)
                .map_err(|e| SimError::InvalidConfig(format!("poisson rate: {e}")))?;
            poisson.sample(&mut rng) as u32
        } else {
            0
        };
        counts.push(c);
    }

    Ok((
        FluorescenceTrace {
            bin_width_s: w,
            counts,
            t_start_s: 0.0,
        },
        records,
    ))
}

/// Simulate one shelving trajectory.
///
/// Identical `(scheme, config)` values produce bit-identical output; the
/// returned [`JumpRecord`]s are the exact event times underlying the binned
/// trace.
pub fn simulate_trajectory(
    scheme: &LevelScheme,
    config: &TrajectoryConfig,
) -> Result<(FluorescenceTrace, Vec<JumpRecord>), SimError> {
    simulate_with_stream(scheme, config, 0)
}

/// Simulate independent trajectories with per-trajectory RNG streams derived
/// from the master seed by counter. Trajectories run in parallel but the
/// result order is the trajectory index, so output is independent of
/// scheduling.
pub fn run_ensemble(
    scheme: &LevelScheme,
    config: &TrajectoryConfig,
    n_trajectories: usize,
) -> Result<Vec<(FluorescenceTrace, Vec<JumpRecord>)>, SimError> {
    (0..n_trajectories)
        .into_par_iter()
        .map(|i| simulate_with_stream(scheme, config, i as u64))
        .collect()
}
