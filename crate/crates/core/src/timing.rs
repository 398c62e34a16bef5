//! DRAM timing-parameter tables.
//!
//! Durations are held as integer picoseconds so that fractional-nanosecond
//! values such as tRTP = 7.5 ns stay exact. The engine never sees these
//! directly; it works on a [`TimingCycles`] table produced once by
//! [`TimingParams::cycles`].

use std::fmt;
use std::ops::{Add, Sub};
use std::str::FromStr;

use crate::error::{Error, Result};

/// A duration in integer picoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Ps(pub i64);

impl Ps {
    pub const ZERO: Ps = Ps(0);

    pub const fn from_ps(ps: i64) -> Self {
        Ps(ps)
    }

    pub const fn from_ns(ns: i64) -> Self {
        Ps(ns * 1000)
    }

    /// Rounds to the nearest picosecond. Decimal inputs with at most three
    /// fractional digits convert exactly.
    pub fn from_ns_f64(ns: f64) -> Self {
        Ps((ns * 1000.0).round() as i64)
    }

    pub fn as_ns_f64(self) -> f64 {
        self.0 as f64 / 1000.0
    }

    pub fn max(self, other: Ps) -> Ps {
        Ps(self.0.max(other.0))
    }
}

impl Add for Ps {
    type Output = Ps;
    fn add(self, rhs: Ps) -> Ps {
        Ps(self.0 + rhs.0)
    }
}

impl Sub for Ps {
    type Output = Ps;
    fn sub(self, rhs: Ps) -> Ps {
        Ps(self.0 - rhs.0)
    }
}

impl fmt::Display for Ps {
    /// Formats as nanoseconds without trailing zeros, e.g. `7.5`, `16`, `3.333`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let (whole, frac) = (abs / 1000, abs % 1000);
        if frac == 0 {
            write!(f, "{sign}{whole}")
        } else {
            let digits = format!("{frac:03}");
            write!(f, "{sign}{whole}.{}", digits.trim_end_matches('0'))
        }
    }
}

/// Converts a duration to DRAM command-clock cycles, rounding up.
///
/// Computed as `ceil(ps * MHz / 10^6)` in integer arithmetic.
pub fn ns_to_cycles(duration: Ps, clock_mhz: u32) -> Result<u64> {
    if clock_mhz == 0 {
        return Err(Error::InvalidConfig("clock_mhz must be positive".into()));
    }
    if duration.0 < 0 {
        return Err(Error::InvalidArgument(format!(
            "duration must be non-negative, got {duration} ns"
        )));
    }
    let num = duration.0 as u128 * clock_mhz as u128;
    Ok(num.div_ceil(1_000_000) as u64)
}

/// Converts a cycle count back to nanoseconds (inexact; for reporting only).
pub fn cycles_to_ns(cycles: u64, clock_mhz: u32) -> f64 {
    cycles as f64 * 1000.0 / clock_mhz as f64
}

/// Command-clock frequency shared by both DDR5-4800 presets.
pub const DDR5_4800_CLOCK_MHZ: u32 = 2400;

/// Eight command clocks at 2400 MHz, used for tCCDL and tBL defaults.
pub const EIGHT_CLOCKS_AT_2400: Ps = Ps::from_ps(3333);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TimingPreset {
    DefaultDdr5_4800,
    PracDdr5_4800,
}

impl FromStr for TimingPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "default" | "default_ddr5_4800" => Ok(TimingPreset::DefaultDdr5_4800),
            "prac" | "prac_ddr5_4800" => Ok(TimingPreset::PracDdr5_4800),
            other => Err(Error::InvalidArgument(format!(
                "unknown timing preset {other:?} (expected \"default\" or \"prac\")"
            ))),
        }
    }
}

impl fmt::Display for TimingPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TimingPreset::DefaultDdr5_4800 => "default",
            TimingPreset::PracDdr5_4800 => "prac",
        })
    }
}

/// A full DRAM timing table in nanoseconds (stored as picoseconds).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimingParams {
    /// ACT to PRE.
    pub t_ras: Ps,
    /// PRE to ACT.
    pub t_rp: Ps,
    /// ACT to ACT, same bank.
    pub t_rc: Ps,
    /// ACT to RD/WR.
    pub t_rcd: Ps,
    /// RD to first data.
    pub t_cl: Ps,
    /// RD to PRE.
    pub t_rtp: Ps,
    /// End of write burst to PRE.
    pub t_wr: Ps,
    /// Column command to column command of the same type.
    pub t_ccdl: Ps,
    /// WR to first write data.
    pub t_cwl: Ps,
    /// Burst duration.
    pub t_bl: Ps,
    pub clock_mhz: u32,
}

/// Names of the duration fields, in table order. These are also the
/// config-file keys with a `_ns` suffix.
pub const FIELD_NAMES: [&str; 10] = [
    "t_ras", "t_rp", "t_rc", "t_rcd", "t_cl", "t_rtp", "t_wr", "t_ccdl", "t_cwl", "t_bl",
];

impl TimingParams {
    pub fn preset(name: TimingPreset) -> Self {
        match name {
            TimingPreset::DefaultDdr5_4800 => TimingParams {
                t_ras: Ps::from_ns(32),
                t_rp: Ps::from_ns(16),
                t_rc: Ps::from_ns(48),
                t_rcd: Ps::from_ns(16),
                t_cl: Ps::from_ns(16),
                t_rtp: Ps::from_ps(7500),
                t_wr: Ps::from_ns(30),
                t_ccdl: EIGHT_CLOCKS_AT_2400,
                t_cwl: Ps::from_ns(16),
                t_bl: EIGHT_CLOCKS_AT_2400,
                clock_mhz: DDR5_4800_CLOCK_MHZ,
            },
            TimingPreset::PracDdr5_4800 => TimingParams {
                t_ras: Ps::from_ns(16),
                t_rp: Ps::from_ns(36),
                t_rc: Ps::from_ns(52),
                t_rcd: Ps::from_ns(16),
                t_cl: Ps::from_ns(16),
                t_rtp: Ps::from_ns(5),
                t_wr: Ps::from_ns(10),
                t_ccdl: EIGHT_CLOCKS_AT_2400,
                t_cwl: Ps::from_ns(16),
                t_bl: EIGHT_CLOCKS_AT_2400,
                clock_mhz: DDR5_4800_CLOCK_MHZ,
            },
        }
    }

    pub fn default_ddr5_4800() -> Self {
        Self::preset(TimingPreset::DefaultDdr5_4800)
    }

    pub fn prac_ddr5_4800() -> Self {
        Self::preset(TimingPreset::PracDdr5_4800)
    }

    pub fn field(&self, name: &str) -> Option<Ps> {
        let v = match name {
            "t_ras" => self.t_ras,
            "t_rp" => self.t_rp,
            "t_rc" => self.t_rc,
            "t_rcd" => self.t_rcd,
            "t_cl" => self.t_cl,
            "t_rtp" => self.t_rtp,
            "t_wr" => self.t_wr,
            "t_ccdl" => self.t_ccdl,
            "t_cwl" => self.t_cwl,
            "t_bl" => self.t_bl,
            _ => return None,
        };
        Some(v)
    }

    pub fn field_mut(&mut self, name: &str) -> Option<&mut Ps> {
        let v = match name {
            "t_ras" => &mut self.t_ras,
            "t_rp" => &mut self.t_rp,
            "t_rc" => &mut self.t_rc,
            "t_rcd" => &mut self.t_rcd,
            "t_cl" => &mut self.t_cl,
            "t_rtp" => &mut self.t_rtp,
            "t_wr" => &mut self.t_wr,
            "t_ccdl" => &mut self.t_ccdl,
            "t_cwl" => &mut self.t_cwl,
            "t_bl" => &mut self.t_bl,
            _ => return None,
        };
        Some(v)
    }

    /// tRC as the engine enforces it: `max(t_rc, t_ras + t_rp)`.
    pub fn effective_t_rc(&self) -> Ps {
        self.t_rc.max(self.t_ras + self.t_rp)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut errors = Vec::new();
        let mut normalizations = Vec::new();

        if self.clock_mhz == 0 {
            errors.push("clock_mhz must be positive".to_string());
        }
        for name in FIELD_NAMES {
            let v = self.field(name).expect("known field");
            // tCCDL and tBL may be zero in degenerate configurations.
            let zero_ok = matches!(name, "t_ccdl" | "t_bl");
            if v.0 < 0 || (v.0 == 0 && !zero_ok) {
                errors.push(format!("{name} must be positive, got {v} ns"));
            }
        }

        let effective = self.effective_t_rc();
        if effective != self.t_rc {
            normalizations.push(Normalization {
                field: "t_rc",
                given: self.t_rc,
                effective,
            });
        }

        ValidationReport {
            valid: errors.is_empty(),
            normalizations,
            errors,
        }
    }

    /// Quantizes the table to command-clock cycles. Fails if the table does
    /// not validate.
    pub fn cycles(&self) -> Result<TimingCycles> {
        let report = self.validate();
        if !report.valid {
            return Err(Error::InvalidConfig(report.errors.join("; ")));
        }
        let clk = self.clock_mhz;
        let c = |p: Ps| ns_to_cycles(p, clk);
        Ok(TimingCycles {
            ras: c(self.t_ras)?,
            rp: c(self.t_rp)?,
            rc: c(self.effective_t_rc())?,
            rcd: c(self.t_rcd)?,
            cl: c(self.t_cl)?,
            rtp: c(self.t_rtp)?,
            wr: c(self.t_wr)?,
            ccdl: c(self.t_ccdl)?,
            cwl: c(self.t_cwl)?,
            bl: c(self.t_bl)?,
            clock_mhz: clk,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalization {
    pub field: &'static str,
    pub given: Ps,
    pub effective: Ps,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub valid: bool,
    pub normalizations: Vec<Normalization>,
    pub errors: Vec<String>,
}

/// The timing table in integer command-clock cycles. `rc` is already the
/// effective value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimingCycles {
    pub ras: u64,
    pub rp: u64,
    pub rc: u64,
    pub rcd: u64,
    pub cl: u64,
    pub rtp: u64,
    pub wr: u64,
    pub ccdl: u64,
    pub cwl: u64,
    pub bl: u64,
    pub clock_mhz: u32,
}

impl TimingCycles {
    pub fn to_ns(&self, cycles: u64) -> f64 {
        cycles_to_ns(cycles, self.clock_mhz)
    }

    /// Offset from a WR command to the end of its data burst.
    pub fn write_burst(&self) -> u64 {
        self.cwl + self.bl
    }
}
