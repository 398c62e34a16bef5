//! Independent command-log checker.
//!
//! Re-derives legality from a finished command log by comparing command
//! pairs directly, without going through [`crate::dram::BankState`]. The
//! engine's scheduler and this checker should never disagree.

use std::collections::BTreeMap;
use std::fmt;

use crate::dram::{BankId, Command, IssuedCommand};
use crate::error::{Error, Result};
use crate::timing::TimingCycles;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Log index of the later command.
    pub index: usize,
    /// Log index of the earlier command, for pairwise rules.
    pub earlier: Option<usize>,
    pub rule: &'static str,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.earlier {
            Some(e) => write!(f, "cmd #{} vs #{}: {} ({})", self.index, e, self.rule, self.detail),
            None => write!(f, "cmd #{}: {} ({})", self.index, self.rule, self.detail),
        }
    }
}

/// Minimum gap between an earlier and a later command on the same bank, or
/// `None` when the pair is unconstrained.
fn min_gap(earlier: &Command, later: &Command, t: &TimingCycles) -> Option<(&'static str, u64)> {
    use Command::*;
    match (earlier, later) {
        (Act { .. }, Act { .. }) => Some(("tRC", t.rc)),
        (Pre { .. }, Act { .. }) => Some(("tRP", t.rp)),
        (Act { .. }, Rd { .. }) | (Act { .. }, Wr { .. }) => Some(("tRCD", t.rcd)),
        (Rd { .. }, Rd { .. }) | (Wr { .. }, Wr { .. }) => Some(("tCCDL", t.ccdl)),
        (Act { .. }, Pre { .. }) => Some(("tRAS", t.ras)),
        (Rd { .. }, Pre { .. }) => Some(("tRTP", t.rtp)),
        (Wr { .. }, Pre { .. }) => Some(("tCWL+tBL+tWR", t.cwl + t.bl + t.wr)),
        _ => None,
    }
}

/// Checks every same-bank command pair in `log` against the pairwise
/// minimum-gap rules, plus open/closed state legality and per-bank tick
/// ordering. Returns all violations found.
pub fn check_log(log: &[IssuedCommand], t: &TimingCycles) -> Vec<Violation> {
    let mut violations = Vec::new();
    let mut per_bank: BTreeMap<BankId, Vec<usize>> = BTreeMap::new();
    for (i, c) in log.iter().enumerate() {
        per_bank.entry(c.cmd.bank()).or_default().push(i);
    }

    // No rule spans more than this many ticks, so the backward scan can stop
    // once the distance exceeds it.
    let horizon = [t.rc, t.rp, t.rcd, t.ccdl, t.ras, t.rtp, t.cwl + t.bl + t.wr]
        .into_iter()
        .max()
        .unwrap_or(0);

    for indices in per_bank.values() {
        let mut open: Option<u64> = None;
        for (pos, &j) in indices.iter().enumerate() {
            let later = &log[j];

            if pos > 0 {
                let prev = &log[indices[pos - 1]];
                if later.tick < prev.tick {
                    violations.push(Violation {
                        index: j,
                        earlier: Some(indices[pos - 1]),
                        rule: "order",
                        detail: format!("tick {} precedes {}", later.tick, prev.tick),
                    });
                }
            }

            match later.cmd {
                Command::Act { row, .. } => {
                    if let Some(r) = open {
                        violations.push(Violation {
                            index: j,
                            earlier: None,
                            rule: "state",
                            detail: format!("ACT while row {r} is open"),
                        });
                    }
                    open = Some(row);
                }
                Command::Pre { .. } | Command::Rd { .. } | Command::Wr { .. } => {
                    if open.is_none() {
                        violations.push(Violation {
                            index: j,
                            earlier: None,
                            rule: "state",
                            detail: format!("{} with no open row", later.cmd.kind().mnemonic()),
                        });
                    }
                    if matches!(later.cmd, Command::Pre { .. }) {
                        open = None;
                    }
                }
            }

            for &i in indices[..pos].iter().rev() {
                let earlier = &log[i];
                let gap = later.tick.saturating_sub(earlier.tick);
                if gap > horizon {
                    break;
                }
                if let Some((rule, need)) = min_gap(&earlier.cmd, &later.cmd, t) {
                    if gap < need {
                        violations.push(Violation {
                            index: j,
                            earlier: Some(i),
                            rule,
                            detail: format!("gap {gap} < {need} cycles"),
                        });
                    }
                }
            }
        }
    }
    violations.sort_by_key(|v| (v.index, v.earlier));
    violations
}

/// Parses a textual command log (one command per line; blank lines and
/// `#` comments ignored).
pub fn parse_log(text: &str) -> Result<Vec<IssuedCommand>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let cmd = trimmed.parse::<IssuedCommand>().map_err(|e| match e {
            Error::Parse { token, message, .. } => Error::Parse {
                line: n + 1,
                token,
                message,
            },
            other => other,
        })?;
        out.push(cmd);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timing::TimingParams;

    fn t() -> TimingCycles {
        TimingParams::default_ddr5_4800().cycles().unwrap()
    }

    fn log(text: &str) -> Vec<IssuedCommand> {
        parse_log(text).unwrap()
    }

    #[test]
    fn clean_sequence_passes() {
        // ACT, RD at tRCD, PRE at tRAS, ACT at tRAS + tRP
        let l = log("0 ACT bank=0 row=1\n39 RD bank=0 col=0\n77 PRE bank=0\n116 ACT bank=0 row=2\n155 RD bank=0 col=0\n");
        assert!(check_log(&l, &t()).is_empty());
    }

    #[test]
    fn detects_each_rule() {
        let tc = t();
        let cases = [
            ("0 ACT bank=0 row=1\n38 RD bank=0 col=0\n", "tRCD"),
            ("0 ACT bank=0 row=1\n76 PRE bank=0\n", "tRAS"),
            ("0 ACT bank=0 row=1\n77 PRE bank=0\n115 ACT bank=0 row=2\n", "tRP"),
            ("0 ACT bank=0 row=1\n39 RD bank=0 col=0\n46 RD bank=0 col=1\n", "tCCDL"),
            ("0 ACT bank=0 row=1\n70 RD bank=0 col=0\n87 PRE bank=0\n", "tRTP"),
            ("0 ACT bank=0 row=1\n39 WR bank=0 col=0\n100 PRE bank=0\n", "tCWL+tBL+tWR"),
        ];
        for (text, rule) in cases {
            let v = check_log(&log(text), &tc);
            assert!(v.iter().any(|x| x.rule == rule), "{rule}: {v:?}");
        }
    }

    #[test]
    fn detects_trc_when_trc_exceeds_ras_plus_rp() {
        let mut p = TimingParams::default_ddr5_4800();
        p.t_rc = crate::timing::Ps::from_ns(60);
        let tc = p.cycles().unwrap();
        let v = check_log(&log("0 ACT bank=0 row=1\n77 PRE bank=0\n116 ACT bank=0 row=2\n"), &tc);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, "tRC");
    }

    #[test]
    fn detects_state_and_order_errors() {
        let tc = t();
        let v = check_log(&log("0 RD bank=0 col=0\n"), &tc);
        assert_eq!(v[0].rule, "state");
        let v = check_log(&log("0 ACT bank=0 row=1\n500 ACT bank=0 row=2\n"), &tc);
        assert!(v.iter().any(|x| x.rule == "state"));
        let v = check_log(&log("500 ACT bank=1 row=1\n10 RD bank=1 col=0\n"), &tc);
        assert!(v.iter().any(|x| x.rule == "order"));
    }

    #[test]
    fn banks_are_independent() {
        let l = log("0 ACT bank=0 row=1\n1 ACT bank=1 row=1\n2 ACT bank=2 row=5\n");
        assert!(check_log(&l, &t()).is_empty());
    }

    #[test]
    fn parse_log_reports_line() {
        let err = parse_log("# c\n0 ACT bank=0 row=1\n1 FOO bank=0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }
}
