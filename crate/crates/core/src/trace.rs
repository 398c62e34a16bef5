//! Memory traces: the text format and synthetic generators.
//!
//! One request per line: `<nonmem> <R|W> <0xHEXADDR>`, where `nonmem` is
//! the number of non-memory instructions retired before the access. Lines
//! starting with `#` and blank lines are skipped. Generators emit a
//! `# generator: <name> <key=value>...` header that parses back into the
//! trace metadata.

use std::fmt::{self, Write as _};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dram::{BankId, RowId};
use crate::error::{Error, Result};
use crate::mapping::{AddressMapping, Field};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Read,
    Write,
}

impl Op {
    pub fn letter(self) -> char {
        match self {
            Op::Read => 'R',
            Op::Write => 'W',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MemRequest {
    pub nonmem: u64,
    pub op: Op,
    pub address: u64,
}

impl fmt::Display for MemRequest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {:#X}", self.nonmem, self.op.letter(), self.address)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GeneratorInfo {
    pub name: String,
    pub params: Vec<(String, String)>,
}

impl GeneratorInfo {
    pub fn param(&self, key: &str) -> Option<&str> {
        self.params
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Trace {
    pub name: String,
    pub generator: Option<GeneratorInfo>,
    pub requests: Vec<MemRequest>,
    /// 1-based source line of each request; empty for generated traces.
    pub lines: Vec<usize>,
}

impl Trace {
    pub fn from_requests(name: impl Into<String>, requests: Vec<MemRequest>) -> Self {
        Trace {
            name: name.into(),
            generator: None,
            requests,
            lines: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    pub fn source_line(&self, index: usize) -> Option<usize> {
        self.lines.get(index).copied()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        if let Some(g) = &self.generator {
            out.push_str("# generator: ");
            out.push_str(&g.name);
            for (k, v) in &g.params {
                let _ = write!(out, " {k}={v}");
            }
            out.push('\n');
        }
        for r in &self.requests {
            let _ = writeln!(out, "{r}");
        }
        out
    }
}

fn parse_err(line: usize, token: &str, message: &str) -> Error {
    Error::Parse {
        line,
        token: token.to_string(),
        message: message.to_string(),
    }
}

fn parse_generator(line: usize, rest: &str) -> Result<GeneratorInfo> {
    let mut toks = rest.split_whitespace();
    let name = toks
        .next()
        .ok_or_else(|| parse_err(line, "", "generator header without a name"))?;
    let mut params = Vec::new();
    for t in toks {
        let (k, v) = t
            .split_once('=')
            .ok_or_else(|| parse_err(line, t, "expected key=value"))?;
        params.push((k.to_string(), v.to_string()));
    }
    Ok(GeneratorInfo {
        name: name.to_string(),
        params,
    })
}

pub fn parse(text: &str) -> Result<Trace> {
    let mut trace = Trace {
        name: "trace".to_string(),
        ..Default::default()
    };
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(rest) = comment.trim_start().strip_prefix("generator:") {
                let g = parse_generator(line_no, rest)?;
                trace.name = g.name.clone();
                trace.generator = Some(g);
            }
            continue;
        }

        let mut toks = line.split_whitespace();
        let (Some(n_tok), Some(op_tok), Some(addr_tok)) = (toks.next(), toks.next(), toks.next())
        else {
            return Err(parse_err(line_no, line, "expected `<nonmem> <R|W> <0xADDR>`"));
        };
        if let Some(extra) = toks.next() {
            return Err(parse_err(line_no, extra, "trailing token"));
        }
        let nonmem = n_tok
            .parse::<u64>()
            .map_err(|_| parse_err(line_no, n_tok, "instruction count"))?;
        let op = match op_tok {
            "R" | "r" => Op::Read,
            "W" | "w" => Op::Write,
            _ => return Err(parse_err(line_no, op_tok, "expected R or W")),
        };
        let address = addr_tok
            .strip_prefix("0x")
            .or_else(|| addr_tok.strip_prefix("0X"))
            .and_then(|h| u64::from_str_radix(h, 16).ok())
            .ok_or_else(|| parse_err(line_no, addr_tok, "expected 0x-prefixed hex address"))?;
        trace.requests.push(MemRequest {
            nonmem,
            op,
            address,
        });
        trace.lines.push(line_no);
    }
    Ok(trace)
}

/// Same-bank different-row microbenchmark: `pairs` iterations of a read to
/// `row_a` followed by a read to `row_b`, both in `bank`, with no
/// intervening instructions.
pub fn gen_sbdr(
    pairs: usize,
    bank: BankId,
    row_a: RowId,
    row_b: RowId,
    mapping: &AddressMapping,
) -> Result<Trace> {
    if row_a == row_b {
        return Err(Error::InvalidArgument(format!(
            "SBDR needs two different rows, got {row_a} twice"
        )));
    }
    if pairs == 0 {
        return Err(Error::InvalidArgument("SBDR needs at least one pair".into()));
    }
    let addr = |row| {
        mapping.address_of(bank, row, 0).ok_or_else(|| {
            Error::InvalidArgument(format!("bank {bank} / row {row} not addressable"))
        })
    };
    let (a, b) = (addr(row_a)?, addr(row_b)?);
    let requests = (0..pairs)
        .flat_map(|_| [a, b])
        .map(|address| MemRequest {
            nonmem: 0,
            op: Op::Read,
            address,
        })
        .collect();
    Ok(Trace {
        name: "sbdr".into(),
        generator: Some(GeneratorInfo {
            name: "sbdr".into(),
            params: vec![
                ("pairs".into(), pairs.to_string()),
                ("bank".into(), bank.to_string()),
                ("row_a".into(), row_a.to_string()),
                ("row_b".into(), row_b.to_string()),
            ],
        }),
        requests,
        lines: Vec::new(),
    })
}

/// Parameters for [`gen_mixed`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedParams {
    pub n: usize,
    /// Probability that a request targets a different row than the last
    /// one used in its bank.
    pub miss_ratio: f64,
    /// Requests are spread uniformly over banks `0..banks`.
    pub banks: usize,
    pub seed: u64,
    /// Non-memory instruction gaps are uniform in `0..=nonmem_max`.
    pub nonmem_max: u64,
    pub write_ratio: f64,
}

impl MixedParams {
    pub fn new(n: usize, miss_ratio: f64, banks: usize, seed: u64) -> Self {
        MixedParams {
            n,
            miss_ratio,
            banks,
            seed,
            nonmem_max: 200,
            write_ratio: 0.0,
        }
    }
}

/// Seeded synthetic workload with a controlled row-conflict fraction.
pub fn gen_mixed(p: &MixedParams, mapping: &AddressMapping) -> Result<Trace> {
    let frac = |v: f64, what: &str| {
        if (0.0..=1.0).contains(&v) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("{what} must be in [0, 1], got {v}")))
        }
    };
    frac(p.miss_ratio, "miss_ratio")?;
    frac(p.write_ratio, "write_ratio")?;
    if p.n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if p.banks == 0 || p.banks > mapping.total_banks() {
        return Err(Error::InvalidArgument(format!(
            "banks must be in [1, {}], got {}",
            mapping.total_banks(),
            p.banks
        )));
    }
    let rows = mapping.count(Field::Row);
    if rows < 2 {
        return Err(Error::InvalidArgument("mapping needs at least two rows".into()));
    }
    let lines_per_row = (mapping.count(Field::Column) / 64).max(1);

    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut last_row: Vec<Option<RowId>> = vec![None; p.banks];
    let mut requests = Vec::with_capacity(p.n);
    for _ in 0..p.n {
        let bank = rng.gen_range(0..p.banks);
        let nonmem = rng.gen_range(0..=p.nonmem_max);
        let row = match last_row[bank] {
            None => rng.gen_range(0..rows),
            Some(prev) if rng.gen_bool(p.miss_ratio) => {
                let r = rng.gen_range(0..rows - 1);
                if r >= prev {
                    r + 1
                } else {
                    r
                }
            }
            Some(prev) => prev,
        };
        last_row[bank] = Some(row);
        let column = (rng.gen_range(0..lines_per_row) * 64) % mapping.count(Field::Column);
        let op = if rng.gen_bool(p.write_ratio) {
            Op::Write
        } else {
            Op::Read
        };
        let address = mapping
            .address_of(bank, row, column)
            .expect("generated coordinates are in range");
        requests.push(MemRequest {
            nonmem,
            op,
            address,
        });
    }

    Ok(Trace {
        name: "mixed".into(),
        generator: Some(GeneratorInfo {
            name: "mixed".into(),
            params: vec![
                ("n".into(), p.n.to_string()),
                ("miss_ratio".into(), p.miss_ratio.to_string()),
                ("banks".into(), p.banks.to_string()),
                ("seed".into(), p.seed.to_string()),
                ("nonmem_max".into(), p.nonmem_max.to_string()),
                ("write_ratio".into(), p.write_ratio.to_string()),
            ],
        }),
        requests,
        lines: Vec::new(),
    })
}

/// Fraction of requests that target a different row than the previous
/// request to the same bank. First touches of a bank are not counted.
pub fn conflict_fraction(trace: &Trace, mapping: &AddressMapping) -> Option<f64> {
    let mut last = std::collections::HashMap::new();
    let (mut counted, mut conflicts) = (0u64, 0u64);
    for r in &trace.requests {
        let d = mapping.decode(r.address)?;
        let bank = mapping.flat_bank(&d);
        if let Some(prev) = last.insert(bank, d.row) {
            counted += 1;
            if prev != d.row {
                conflicts += 1;
            }
        }
    }
    (counted > 0).then(|| conflicts as f64 / counted as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_examples() {
        let t = parse("7 R 0x1A40\n").unwrap();
        assert_eq!(
            t.requests,
            vec![MemRequest {
                nonmem: 7,
                op: Op::Read,
                address: 0x1A40
            }]
        );
        let t = parse("0 W 0x0").unwrap();
        assert_eq!(
            t.requests[0],
            MemRequest {
                nonmem: 0,
                op: Op::Write,
                address: 0
            }
        );
    }

    #[test]
    fn parse_skips_comments_and_blanks() {
        let t = parse("# hello\n\n  \n3 R 0x40\n# bye\n4 W 0x80\n").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.lines, vec![4, 6]);
    }

    #[test]
    fn parse_errors_carry_line_and_token() {
        let err = parse("7 X 0x1A40").unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 1,
                token: "X".into(),
                message: "expected R or W".into()
            }
        );
        match parse("1 R 0x0\n# c\nfoo R 0x10\n").unwrap_err() {
            Error::Parse { line, token, .. } => {
                assert_eq!(line, 3);
                assert_eq!(token, "foo");
            }
            e => panic!("{e}"),
        }
        assert!(matches!(parse("1 R 123"), Err(Error::Parse { token, .. }) if token == "123"));
        assert!(matches!(parse("1 R"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("1 R 0x1 extra"), Err(Error::Parse { token, .. }) if token == "extra"));
    }

    #[test]
    fn sbdr_layout() {
        let m = AddressMapping::default();
        let t = gen_sbdr(2, 5, 10, 20, &m).unwrap();
        let rows: Vec<_> = t
            .requests
            .iter()
            .map(|r| m.decode(r.address).unwrap().row)
            .collect();
        assert_eq!(rows, vec![10, 20, 10, 20]);
        assert!(t.requests.iter().all(|r| r.nonmem == 0 && r.op == Op::Read));

        let one = gen_sbdr(1, 5, 10, 20, &m).unwrap();
        assert_eq!(one.len(), 2);
    }

    #[test]
    fn sbdr_all_same_bank() {
        let m = AddressMapping::default();
        let t = gen_sbdr(100, 17, 3, 4, &m).unwrap();
        assert_eq!(t.len(), 200);
        for r in &t.requests {
            let d = m.decode(r.address).unwrap();
            assert_eq!(m.flat_bank(&d), 17);
        }
    }

    #[test]
    fn sbdr_rejects_bad_args() {
        let m = AddressMapping::default();
        assert!(matches!(gen_sbdr(1, 0, 4, 4, &m), Err(Error::InvalidArgument(_))));
        assert!(gen_sbdr(0, 0, 1, 2, &m).is_err());
        assert!(gen_sbdr(1, 99, 1, 2, &m).is_err());
    }

    #[test]
    fn mixed_conflict_fraction() {
        let m = AddressMapping::default();
        let t = gen_mixed(&MixedParams::new(10_000, 0.3, 4, 42), &m).unwrap();
        let f = conflict_fraction(&t, &m).unwrap();
        assert!((0.28..=0.32).contains(&f), "{f}");
    }

    #[test]
    fn mixed_boundaries() {
        let m = AddressMapping::default();
        let zero = gen_mixed(&MixedParams::new(2000, 0.0, 4, 1), &m).unwrap();
        assert_eq!(conflict_fraction(&zero, &m), Some(0.0));
        let one = gen_mixed(&MixedParams::new(2000, 1.0, 4, 1), &m).unwrap();
        assert_eq!(conflict_fraction(&one, &m), Some(1.0));
    }

    #[test]
    fn mixed_rejects_bad_args() {
        let m = AddressMapping::default();
        for p in [
            MixedParams::new(10, 1.5, 4, 0),
            MixedParams::new(10, -0.1, 4, 0),
            MixedParams::new(10, f64::NAN, 4, 0),
            MixedParams::new(0, 0.5, 4, 0),
            MixedParams::new(10, 0.5, 0, 0),
            MixedParams::new(10, 0.5, 33, 0),
        ] {
            assert!(matches!(gen_mixed(&p, &m), Err(Error::InvalidArgument(_))), "{p:?}");
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let m = AddressMapping::default();
        let p = MixedParams {
            write_ratio: 0.25,
            ..MixedParams::new(500, 0.4, 8, 7)
        };
        assert_eq!(gen_mixed(&p, &m).unwrap(), gen_mixed(&p, &m).unwrap());
        let q = MixedParams { seed: 8, ..p };
        assert_ne!(gen_mixed(&p, &m).unwrap().requests, gen_mixed(&q, &m).unwrap().requests);
    }

    #[test]
    fn generator_header_roundtrips() {
        let m = AddressMapping::default();
        let t = gen_mixed(&MixedParams::new(50, 0.3, 2, 42), &m).unwrap();
        let text = t.render();
        assert!(text.starts_with("# generator: mixed n=50 miss_ratio=0.3 banks=2 seed=42"));
        let back = parse(&text).unwrap();
        assert_eq!(back.generator, t.generator);
        assert_eq!(back.requests, t.requests);
        assert_eq!(back.name, "mixed");
        assert_eq!(back.generator.unwrap().param("seed"), Some("42"));
    }

    fn request() -> impl Strategy<Value = MemRequest> {
        (any::<u64>(), any::<bool>(), any::<u64>()).prop_map(|(nonmem, w, address)| MemRequest {
            nonmem,
            op: if w { Op::Write } else { Op::Read },
            address,
        })
    }

    proptest! {
        #[test]
        fn render_parse_roundtrip(reqs in proptest::collection::vec(request(), 0..50)) {
            let t = Trace::from_requests("t", reqs);
            let back = parse(&t.render()).unwrap();
            prop_assert_eq!(back.requests, t.requests);
        }
    }
}
