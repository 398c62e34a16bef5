//! Per-bank row-buffer state machine.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::timing::TimingCycles;

pub type Tick = u64;
pub type RowId = u64;
pub type ColId = u64;
pub type BankId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AccessClass {
    Hit,
    Empty,
    Miss,
}

impl AccessClass {
    pub fn as_str(self) -> &'static str {
        match self {
            AccessClass::Hit => "hit",
            AccessClass::Empty => "empty",
            AccessClass::Miss => "miss",
        }
    }
}

impl fmt::Display for AccessClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CommandKind {
    Act,
    Rd,
    Wr,
    Pre,
}

impl CommandKind {
    pub fn mnemonic(self) -> &'static str {
        match self {
            CommandKind::Act => "ACT",
            CommandKind::Rd => "RD",
            CommandKind::Wr => "WR",
            CommandKind::Pre => "PRE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Command {
    Act { bank: BankId, row: RowId },
    Rd { bank: BankId, col: ColId },
    Wr { bank: BankId, col: ColId },
    Pre { bank: BankId },
}

impl Command {
    pub fn kind(&self) -> CommandKind {
        match self {
            Command::Act { .. } => CommandKind::Act,
            Command::Rd { .. } => CommandKind::Rd,
            Command::Wr { .. } => CommandKind::Wr,
            Command::Pre { .. } => CommandKind::Pre,
        }
    }

    pub fn bank(&self) -> BankId {
        match *self {
            Command::Act { bank, .. }
            | Command::Rd { bank, .. }
            | Command::Wr { bank, .. }
            | Command::Pre { bank } => bank,
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Command::Act { bank, row } => write!(f, "ACT bank={bank} row={row}"),
            Command::Rd { bank, col } => write!(f, "RD bank={bank} col={col}"),
            Command::Wr { bank, col } => write!(f, "WR bank={bank} col={col}"),
            Command::Pre { bank } => write!(f, "PRE bank={bank}"),
        }
    }
}

/// One line of the command log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IssuedCommand {
    pub tick: Tick,
    pub cmd: Command,
}

impl fmt::Display for IssuedCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.tick, self.cmd)
    }
}

impl FromStr for IssuedCommand {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let bad = |token: &str, message: &str| Error::Parse {
            line: 0,
            token: token.to_string(),
            message: message.to_string(),
        };
        let mut parts = line.split_whitespace();
        let tick_tok = parts.next().ok_or_else(|| bad(line, "empty command line"))?;
        let tick: Tick = tick_tok.parse().map_err(|_| bad(tick_tok, "tick"))?;
        let kind_tok = parts.next().ok_or_else(|| bad(line, "missing command"))?;

        fn keyed<'a>(tok: Option<&'a str>, key: &str) -> Option<&'a str> {
            tok?.strip_prefix(key)?.strip_prefix('=')
        }
        let bank_tok = parts.next();
        let bank: BankId = keyed(bank_tok, "bank")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad(bank_tok.unwrap_or(""), "expected bank=<id>"))?;
        let arg_tok = parts.next();
        let arg = |key: &str| -> Result<u64> {
            keyed(arg_tok, key)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| bad(arg_tok.unwrap_or(""), &format!("expected {key}=<id>")))
        };
        let cmd = match kind_tok {
            "ACT" => Command::Act {
                bank,
                row: arg("row")?,
            },
            "RD" => Command::Rd {
                bank,
                col: arg("col")?,
            },
            "WR" => Command::Wr {
                bank,
                col: arg("col")?,
            },
            "PRE" => {
                if let Some(extra) = arg_tok {
                    return Err(bad(extra, "PRE takes no argument"));
                }
                Command::Pre { bank }
            }
            other => return Err(bad(other, "unknown command")),
        };
        if let Some(extra) = parts.next() {
            return Err(bad(extra, "trailing token"));
        }
        Ok(IssuedCommand { tick, cmd })
    }
}

/// Row-buffer status and the last-command timestamps of one bank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BankState {
    pub open_row: Option<RowId>,
    pub last_act: Option<Tick>,
    pub last_pre: Option<Tick>,
    pub last_rd_issue: Option<Tick>,
    pub last_wr_issue: Option<Tick>,
    pub last_wr_burst_end: Option<Tick>,
    /// Row closed by the most recent PRE. Kept across the following ACT.
    pub last_closed_row: Option<RowId>,
}

impl BankState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_precharged(&self) -> bool {
        self.open_row.is_none()
    }

    pub fn classify(&self, target_row: RowId) -> AccessClass {
        match self.open_row {
            Some(r) if r == target_row => AccessClass::Hit,
            None => AccessClass::Empty,
            Some(_) => AccessClass::Miss,
        }
    }

    fn describe(&self) -> String {
        match self.open_row {
            Some(r) => format!("open(row={r})"),
            None => "precharged".to_string(),
        }
    }

    fn check_legal(&self, cmd: &Command) -> Result<()> {
        let legal = match cmd.kind() {
            CommandKind::Act => self.is_precharged(),
            CommandKind::Rd | CommandKind::Wr | CommandKind::Pre => !self.is_precharged(),
        };
        if legal {
            Ok(())
        } else {
            Err(Error::ProtocolViolation {
                command: cmd.to_string(),
                state: self.describe(),
                reason: match cmd.kind() {
                    CommandKind::Act => "ACT requires a precharged bank".into(),
                    _ => format!("{} requires an open row", cmd.kind().mnemonic()),
                },
            })
        }
    }

    /// Earliest tick at or after `now` at which `cmd` satisfies every timing
    /// constraint against this bank's history.
    pub fn earliest_issue(&self, cmd: &Command, t: &TimingCycles, now: Tick) -> Result<Tick> {
        self.check_legal(cmd)?;
        let after = |ts: Option<Tick>, gap: u64| ts.map_or(0, |v| v + gap);
        let deadline = match cmd.kind() {
            CommandKind::Act => after(self.last_pre, t.rp).max(after(self.last_act, t.rc)),
            CommandKind::Rd => after(self.last_act, t.rcd).max(after(self.last_rd_issue, t.ccdl)),
            CommandKind::Wr => after(self.last_act, t.rcd).max(after(self.last_wr_issue, t.ccdl)),
            CommandKind::Pre => after(self.last_act, t.ras)
                .max(after(self.last_rd_issue, t.rtp))
                .max(after(self.last_wr_burst_end, t.wr)),
        };
        Ok(now.max(deadline))
    }

    /// Returns the state after issuing `cmd` at tick `at`.
    pub fn apply(&self, cmd: &Command, at: Tick, t: &TimingCycles) -> Result<BankState> {
        let earliest = self.earliest_issue(cmd, t, at)?;
        if earliest > at {
            return Err(Error::ProtocolViolation {
                command: cmd.to_string(),
                state: self.describe(),
                reason: format!("issued at tick {at}, earliest legal tick is {earliest}"),
            });
        }
        let mut next = *self;
        match *cmd {
            Command::Act { row, .. } => {
                next.open_row = Some(row);
                next.last_act = Some(at);
            }
            Command::Pre { .. } => {
                next.last_closed_row = next.open_row.take();
                next.last_pre = Some(at);
            }
            Command::Rd { .. } => next.last_rd_issue = Some(at),
            Command::Wr { .. } => {
                next.last_wr_issue = Some(at);
                next.last_wr_burst_end = Some(at + t.write_burst());
            }
        }
        Ok(next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timing::TimingParams;

    fn default_cycles() -> TimingCycles {
        TimingParams::default_ddr5_4800().cycles().unwrap()
    }

    fn prac_cycles() -> TimingCycles {
        TimingParams::prac_ddr5_4800().cycles().unwrap()
    }

    #[test]
    fn classify_cases() {
        let mut b = BankState::new();
        assert_eq!(b.classify(5), AccessClass::Empty);
        b.open_row = Some(5);
        assert_eq!(b.classify(5), AccessClass::Hit);
        assert_eq!(b.classify(9), AccessClass::Miss);
        // no mutation
        assert_eq!(b.open_row, Some(5));
    }

    fn act_then_rd(t: &TimingCycles) -> BankState {
        let b = BankState::new()
            .apply(&Command::Act { bank: 0, row: 1 }, 0, t)
            .unwrap();
        let rd = Command::Rd { bank: 0, col: 0 };
        let at = b.earliest_issue(&rd, t, 0).unwrap();
        assert_eq!(at, t.rcd);
        b.apply(&rd, at, t).unwrap()
    }

    #[test]
    fn earliest_pre_default() {
        let t = default_cycles();
        let b = act_then_rd(&t);
        // max(tRAS = 32 ns, tRCD + tRTP = 23.5 ns) -> tRAS binds, 77 cycles
        let pre = b.earliest_issue(&Command::Pre { bank: 0 }, &t, 0).unwrap();
        assert_eq!(pre, t.ras);
        assert_eq!(pre, 77);
    }

    #[test]
    fn earliest_pre_prac() {
        let t = prac_cycles();
        let b = act_then_rd(&t);
        // max(16 ns, 16 + 5 ns) -> tRCD + tRTP binds: 39 + 12 cycles
        let pre = b.earliest_issue(&Command::Pre { bank: 0 }, &t, 0).unwrap();
        assert_eq!(pre, t.rcd + t.rtp);
        assert_eq!(pre, 51);
    }

    #[test]
    fn act_after_pre() {
        let t = default_cycles();
        let b = BankState {
            last_pre: Some(1000),
            ..BankState::new()
        };
        let act = Command::Act { bank: 0, row: 3 };
        assert_eq!(b.earliest_issue(&act, &t, 0).unwrap(), 1000 + t.rp);
        assert_eq!(b.earliest_issue(&act, &t, 5000).unwrap(), 5000);
    }

    #[test]
    fn apply_semantics() {
        let t = default_cycles();
        let b = BankState::new()
            .apply(&Command::Act { bank: 0, row: 7 }, 10, &t)
            .unwrap();
        assert_eq!(b.open_row, Some(7));
        assert_eq!(b.last_act, Some(10));

        let w = b.apply(&Command::Wr { bank: 0, col: 3 }, 100, &t).unwrap();
        // tCWL 16 ns + tBL 3.333 ns = 39 + 8 cycles
        assert_eq!(w.last_wr_burst_end, Some(147));
        assert_eq!(w.last_wr_issue, Some(100));

        let pre_at = w.earliest_issue(&Command::Pre { bank: 0 }, &t, 0).unwrap();
        assert_eq!(pre_at, 147 + t.wr);
        let p = w.apply(&Command::Pre { bank: 0 }, pre_at, &t).unwrap();
        assert_eq!(p.open_row, None);
        assert_eq!(p.last_pre, Some(pre_at));
        assert_eq!(p.last_closed_row, Some(7));
        assert_eq!(p.last_act, Some(10));
    }

    #[test]
    fn illegal_commands_rejected() {
        let t = default_cycles();
        let empty = BankState::new();
        for cmd in [
            Command::Rd { bank: 0, col: 0 },
            Command::Wr { bank: 0, col: 0 },
            Command::Pre { bank: 0 },
        ] {
            assert!(matches!(
                empty.earliest_issue(&cmd, &t, 0),
                Err(Error::ProtocolViolation { .. })
            ));
        }
        let open = empty.apply(&Command::Act { bank: 0, row: 1 }, 0, &t).unwrap();
        assert!(open.apply(&Command::Act { bank: 0, row: 2 }, 500, &t).is_err());
        // too early
        let err = open.apply(&Command::Rd { bank: 0, col: 0 }, 5, &t).unwrap_err();
        assert!(matches!(err, Error::ProtocolViolation { .. }), "{err}");
    }

    #[test]
    fn ccdl_spacing() {
        let t = default_cycles();
        let b = act_then_rd(&t);
        let next = b.earliest_issue(&Command::Rd { bank: 0, col: 1 }, &t, 0).unwrap();
        assert_eq!(next, t.rcd + t.ccdl);
        // a write is not held back by the previous read's tCCDL
        let wr = b.earliest_issue(&Command::Wr { bank: 0, col: 1 }, &t, 0).unwrap();
        assert_eq!(wr, t.rcd);
    }

    #[test]
    fn command_log_line_roundtrip() {
        for c in [
            IssuedCommand { tick: 0, cmd: Command::Act { bank: 3, row: 77 } },
            IssuedCommand { tick: 39, cmd: Command::Rd { bank: 3, col: 12 } },
            IssuedCommand { tick: 41, cmd: Command::Wr { bank: 0, col: 1 } },
            IssuedCommand { tick: 116, cmd: Command::Pre { bank: 31 } },
        ] {
            let line = c.to_string();
            assert_eq!(line.parse::<IssuedCommand>().unwrap(), c);
        }
        assert_eq!(
            IssuedCommand { tick: 5, cmd: Command::Act { bank: 2, row: 9 } }.to_string(),
            "5 ACT bank=2 row=9"
        );
        assert!("5 ACT bank=2".parse::<IssuedCommand>().is_err());
        assert!("5 NOP bank=2".parse::<IssuedCommand>().is_err());
        assert!("x PRE bank=2".parse::<IssuedCommand>().is_err());
    }
}
