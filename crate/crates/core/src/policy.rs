//! Page policies: open, close, and the adaptive idle-timer policy.
//!
//! The adaptive policy is driven by four idletime-register style fields:
//! a tracking window length, an initial idle-close delay, an overdue page
//! close (miss) threshold and a premature page close threshold. Counters
//! accumulate over a tumbling window of `win_size` requests; at window
//! completion the idle delay is halved when misses exceed `opc_th`, or
//! doubled when premature closes exceed `ppc_th`.

use std::fmt;
use std::str::FromStr;

use crate::dram::AccessClass;
use crate::error::{Error, Result};

pub const WIN_SIZE_MAX: u32 = 255;
pub const IDLE_MAX: u32 = 63;
pub const THRESHOLD_MAX: u32 = 127;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    Open,
    Close,
    Adaptive,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 3] = [PolicyKind::Open, PolicyKind::Adaptive, PolicyKind::Close];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Open => "open",
            PolicyKind::Close => "close",
            PolicyKind::Adaptive => "adaptive",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "open" => Ok(PolicyKind::Open),
            "close" => Ok(PolicyKind::Close),
            "adaptive" => Ok(PolicyKind::Adaptive),
            other => Err(Error::InvalidArgument(format!(
                "unknown page policy {other:?} (expected open, close or adaptive)"
            ))),
        }
    }
}

/// Step rule applied to the idle delay at window completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum AdjustRule {
    /// Halve on overdue closes, double on premature closes.
    #[default]
    Geometric,
}

/// Whether one policy state is shared by the channel or kept per bank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PolicyScope {
    #[default]
    Channel,
    Bank,
}

impl FromStr for PolicyScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "channel" => Ok(PolicyScope::Channel),
            "bank" => Ok(PolicyScope::Bank),
            other => Err(Error::InvalidArgument(format!(
                "unknown policy scope {other:?} (expected channel or bank)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    pub win_size: u32,
    /// Initial idle-close delay in controller cycles.
    pub idle_page_rst_val: u32,
    pub opc_th: u32,
    pub ppc_th: u32,
    pub idle_min: u32,
    pub idle_max: u32,
    pub adjust: AdjustRule,
    pub scope: PolicyScope,
}

impl PolicyConfig {
    pub fn preset(kind: PolicyKind) -> Self {
        let (win_size, idle, opc_th, ppc_th) = match kind {
            PolicyKind::Open => (255, 63, 127, 0),
            PolicyKind::Adaptive => (64, 8, 6, 6),
            PolicyKind::Close => (1, 0, 0, 127),
        };
        PolicyConfig {
            kind,
            win_size,
            idle_page_rst_val: idle,
            opc_th,
            ppc_th,
            idle_min: 0,
            idle_max: IDLE_MAX,
            adjust: AdjustRule::Geometric,
            scope: PolicyScope::Channel,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(1..=WIN_SIZE_MAX).contains(&self.win_size) {
            errs.push(format!("win_size {} outside [1, {WIN_SIZE_MAX}]", self.win_size));
        }
        if self.idle_page_rst_val > IDLE_MAX {
            errs.push(format!(
                "idle_page_rst_val {} outside [0, {IDLE_MAX}]",
                self.idle_page_rst_val
            ));
        }
        if self.idle_max > IDLE_MAX {
            errs.push(format!("idle_max {} outside [0, {IDLE_MAX}]", self.idle_max));
        }
        if self.opc_th > THRESHOLD_MAX {
            errs.push(format!("opc_th {} outside [0, {THRESHOLD_MAX}]", self.opc_th));
        }
        if self.ppc_th > THRESHOLD_MAX {
            errs.push(format!("ppc_th {} outside [0, {THRESHOLD_MAX}]", self.ppc_th));
        }
        if !(self.idle_min <= self.idle_page_rst_val && self.idle_page_rst_val <= self.idle_max) {
            errs.push(format!(
                "need idle_min <= idle_page_rst_val <= idle_max, got {} / {} / {}",
                self.idle_min, self.idle_page_rst_val, self.idle_max
            ));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(errs.join("; ")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PolicyState {
    pub current_idle: u32,
    pub window_fill: u32,
    pub window_miss: u32,
    pub window_premature: u32,
    /// Completed windows so far.
    pub windows: u64,
}

/// The result of one serviced request, as seen by the policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Outcome {
    pub class: AccessClass,
    /// The access would have hit had the idle timer not closed its row.
    /// Only meaningful for [`AccessClass::Empty`].
    pub premature: bool,
}

impl PolicyState {
    pub fn new(config: &PolicyConfig) -> Self {
        PolicyState {
            current_idle: config.idle_page_rst_val,
            window_fill: 0,
            window_miss: 0,
            window_premature: 0,
            windows: 0,
        }
    }

    /// Cycles after the last column access at which an idle row is closed;
    /// `None` means never.
    pub fn idle_deadline(&self, config: &PolicyConfig) -> Option<u64> {
        match config.kind {
            PolicyKind::Open => None,
            PolicyKind::Close => Some(0),
            PolicyKind::Adaptive => Some(self.current_idle as u64),
        }
    }

    pub fn record_outcome(&mut self, config: &PolicyConfig, outcome: Outcome) {
        self.window_fill += 1;
        if outcome.class == AccessClass::Miss {
            self.window_miss += 1;
        }
        if outcome.premature && outcome.class == AccessClass::Empty {
            self.window_premature += 1;
        }
        if self.window_fill < config.win_size {
            return;
        }

        if config.kind == PolicyKind::Adaptive {
            self.current_idle = match config.adjust {
                AdjustRule::Geometric => {
                    if self.window_miss > config.opc_th {
                        (self.current_idle / 2).max(config.idle_min)
                    } else if self.window_premature > config.ppc_th {
                        (self.current_idle * 2).max(1).min(config.idle_max)
                    } else {
                        self.current_idle
                    }
                }
            };
        }
        self.window_fill = 0;
        self.window_miss = 0;
        self.window_premature = 0;
        self.windows += 1;
    }
}
