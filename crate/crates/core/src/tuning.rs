//! Random-walk proposal scales with multiplicative burn-in adaptation.

/// Proposal standard deviations are kept inside this range.
pub const MIN_PROPOSAL_SD: f64 = 1e-4;
pub const MAX_PROPOSAL_SD: f64 = 10.0;
const STEP: f64 = 1.1;

/// Target acceptance for scalar random-walk updates.
pub const SCALAR_TARGET: f64 = 0.4;
/// Target acceptance for single-site updates of a vector block.
pub const VECTOR_TARGET: f64 = 0.3;

/// A set of proposal SDs (one per tuned coordinate, or one shared by a block)
/// together with acceptance counters.
#[derive(Debug, Clone, PartialEq)]
pub struct ProposalScales {
    name: &'static str,
    sd: Vec<f64>,
    target: f64,
    window_accepted: Vec<u64>,
    window_attempts: Vec<u64>,
    accepted: u64,
    attempts: u64,
}

impl ProposalScales {
    pub fn new(name: &'static str, len: usize, initial_sd: f64, target: f64) -> Self {
        ProposalScales {
            name,
            sd: vec![initial_sd.clamp(MIN_PROPOSAL_SD, MAX_PROPOSAL_SD); len],
            target,
            window_accepted: vec![0; len],
            window_attempts: vec![0; len],
            accepted: 0,
            attempts: 0,
        }
    }

    pub fn scalar(name: &'static str, initial_sd: f64) -> Self {
        Self::new(name, 1, initial_sd, SCALAR_TARGET)
    }

    pub fn block(name: &'static str, initial_sd: f64) -> Self {
        Self::new(name, 1, initial_sd, VECTOR_TARGET)
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    #[inline]
    pub fn sd(&self, k: usize) -> f64 {
        self.sd[k]
    }

    pub fn sds(&self) -> &[f64] {
        &self.sd
    }

    #[inline]
    pub fn record(&mut self, k: usize, accepted: bool) {
        self.window_attempts[k] += 1;
        self.attempts += 1;
        if accepted {
            self.window_accepted[k] += 1;
            self.accepted += 1;
        }
    }

    /// Scale each SD up by 10% if its acceptance over the window beat the
    /// target, down by 10% otherwise, then open a new window.
    pub fn adapt(&mut self) {
        for k in 0..self.sd.len() {
            let n = self.window_attempts[k];
            if n == 0 {
                continue;
            }
            let rate = self.window_accepted[k] as f64 / n as f64;
            let sd = if rate > self.target {
                self.sd[k] * STEP
            } else {
                self.sd[k] / STEP
            };
            self.sd[k] = sd.clamp(MIN_PROPOSAL_SD, MAX_PROPOSAL_SD);
            self.window_accepted[k] = 0;
            self.window_attempts[k] = 0;
        }
    }

    /// Zero all counters; called when burn-in ends.
    pub fn reset_counts(&mut self) {
        self.window_accepted.iter_mut().for_each(|c| *c = 0);
        self.window_attempts.iter_mut().for_each(|c| *c = 0);
        self.accepted = 0;
        self.attempts = 0;
    }

    /// Pooled acceptance rate since the last reset; `None` before any attempt.
    pub fn acceptance_rate(&self) -> Option<f64> {
        (self.attempts > 0).then(|| self.accepted as f64 / self.attempts as f64)
    }
}
