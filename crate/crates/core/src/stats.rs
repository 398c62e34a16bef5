//! Derived metrics and the SBDR analytic oracle.

use serde::Serialize;

use crate::dram::AccessClass;
use crate::error::{Error, Result};
use crate::timing::{cycles_to_ns, Ps, TimingParams};

/// Counters accumulated over one simulation run.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SimReport {
    pub total_core_cycles: u64,
    /// DRAM tick at which the last request completed.
    pub total_dram_cycles: u64,
    pub reads: u64,
    pub writes: u64,
    pub hits: u64,
    pub empties: u64,
    pub misses: u64,
    /// Non-memory instructions plus one per memory request.
    pub total_instructions: u64,
    pub latency_cycles_hit: u64,
    pub latency_cycles_empty: u64,
    pub latency_cycles_miss: u64,
    pub premature_closes: u64,
    pub policy_final_idle: u32,
    pub dram_clock_mhz: u32,
}

impl SimReport {
    pub fn accesses(&self) -> u64 {
        self.hits + self.empties + self.misses
    }

    pub fn count(&self, class: AccessClass) -> u64 {
        match class {
            AccessClass::Hit => self.hits,
            AccessClass::Empty => self.empties,
            AccessClass::Miss => self.misses,
        }
    }

    pub fn latency_sum_cycles(&self, class: AccessClass) -> u64 {
        match class {
            AccessClass::Hit => self.latency_cycles_hit,
            AccessClass::Empty => self.latency_cycles_empty,
            AccessClass::Miss => self.latency_cycles_miss,
        }
    }

    pub fn latency_sum_ns(&self, class: AccessClass) -> f64 {
        cycles_to_ns(self.latency_sum_cycles(class), self.dram_clock_mhz)
    }

    pub fn avg_latency_ns(&self, class: AccessClass) -> Option<f64> {
        let n = self.count(class);
        (n > 0).then(|| self.latency_sum_ns(class) / n as f64)
    }

    pub fn ratio(&self, class: AccessClass) -> f64 {
        let total = self.accesses();
        if total == 0 {
            0.0
        } else {
            self.count(class) as f64 / total as f64
        }
    }

    pub fn rbmpki(&self) -> f64 {
        // total_instructions >= accesses >= 1 for any run over a non-empty trace
        rbmpki(self.misses, self.total_instructions).unwrap_or(0.0)
    }

    pub fn summary(&self) -> ReportSummary {
        ReportSummary {
            total_core_cycles: self.total_core_cycles,
            reads: self.reads,
            writes: self.writes,
            hits: self.hits,
            empties: self.empties,
            misses: self.misses,
            rbmpki: self.rbmpki(),
            avg_latency_ns: ClassLatency {
                hit: self.avg_latency_ns(AccessClass::Hit),
                empty: self.avg_latency_ns(AccessClass::Empty),
                miss: self.avg_latency_ns(AccessClass::Miss),
            },
            policy_final_idle: self.policy_final_idle,
        }
    }
}

/// The JSON report shape.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportSummary {
    pub total_core_cycles: u64,
    pub reads: u64,
    pub writes: u64,
    pub hits: u64,
    pub empties: u64,
    pub misses: u64,
    pub rbmpki: f64,
    pub avg_latency_ns: ClassLatency,
    pub policy_final_idle: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassLatency {
    pub hit: Option<f64>,
    pub empty: Option<f64>,
    pub miss: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonReport {
    pub t_default: u64,
    pub t_prac: u64,
    pub overhead: f64,
}

impl ComparisonReport {
    pub fn new(t_default: u64, t_prac: u64) -> Result<Self> {
        Ok(ComparisonReport {
            t_default,
            t_prac,
            overhead: overhead(t_default, t_prac)?,
        })
    }
}

/// Row-buffer misses per thousand instructions.
pub fn rbmpki(misses: u64, instructions: u64) -> Result<f64> {
    if instructions == 0 {
        return Err(Error::InvalidArgument("instruction count must be positive".into()));
    }
    Ok(misses as f64 * 1000.0 / instructions as f64)
}

/// Relative slowdown of `t_prac` over `t_default`; negative for a speedup.
pub fn overhead(t_default: u64, t_prac: u64) -> Result<f64> {
    if t_default == 0 {
        return Err(Error::InvalidArgument("baseline time must be positive".into()));
    }
    Ok((t_prac as f64 - t_default as f64) / t_default as f64)
}

/// Sample Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidArgument(format!(
            "series lengths differ ({} vs {})",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::InvalidArgument("need at least two points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::InvalidArgument("series has zero variance".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogCorrelation {
    pub r: f64,
    pub used: usize,
    /// Indices of points dropped because their RBMPKI was zero.
    pub excluded: Vec<usize>,
}

/// Pearson r between `ln(rbmpki)` and `overhead`. Points with zero RBMPKI
/// have no logarithm and are excluded rather than shifted.
pub fn log_rbmpki_correlation(rbmpki: &[f64], overhead: &[f64]) -> Result<LogCorrelation> {
    if rbmpki.len() != overhead.len() {
        return Err(Error::InvalidArgument("series lengths differ".into()));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut excluded = Vec::new();
    for (i, (&r, &oh)) in rbmpki.iter().zip(overhead).enumerate() {
        if r > 0.0 {
            xs.push(r.ln());
            ys.push(oh);
        } else {
            excluded.push(i);
        }
    }
    Ok(LogCorrelation {
        r: pearson(&xs, &ys)?,
        used: xs.len(),
        excluded,
    })
}

/// Steady-state per-access period of the SBDR loop: the ACT-to-ACT critical
/// path `max(tRAS, tRCD + tRTP) + tRP`.
pub fn sbdr_oracle(params: &TimingParams) -> Ps {
    params.t_ras.max(params.t_rcd + params.t_rtp) + params.t_rp
}
