//! Physical address to (rank, bank group, bank, row, column) mapping.

use std::fmt;
use std::str::FromStr;

use crate::dram::{BankId, ColId, RowId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    Column,
    BankGroup,
    Bank,
    Rank,
    Row,
}

impl Field {
    pub const ALL: [Field; 5] = [
        Field::Column,
        Field::BankGroup,
        Field::Bank,
        Field::Rank,
        Field::Row,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Field::Column => "column",
            Field::BankGroup => "bank_group",
            Field::Bank => "bank",
            Field::Rank => "rank",
            Field::Row => "row",
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Field::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown mapping field {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct DecodedAddress {
    pub column: u64,
    pub bank_group: u64,
    pub bank: u64,
    pub rank: u64,
    pub row: u64,
}

impl DecodedAddress {
    fn get(&self, f: Field) -> u64 {
        match f {
            Field::Column => self.column,
            Field::BankGroup => self.bank_group,
            Field::Bank => self.bank,
            Field::Rank => self.rank,
            Field::Row => self.row,
        }
    }

    fn set(&mut self, f: Field, v: u64) {
        match f {
            Field::Column => self.column = v,
            Field::BankGroup => self.bank_group = v,
            Field::Bank => self.bank = v,
            Field::Rank => self.rank = v,
            Field::Row => self.row = v,
        }
    }
}

/// Contiguous bit fields laid out from the least significant address bit
/// upward. Every field appears exactly once; a field may be zero bits wide.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AddressMapping {
    layout: Vec<(Field, u32)>,
}

impl Default for AddressMapping {
    /// 16 GiB single-rank DDR5 x8: 8 KiB rows, 8 bank groups of 4 banks,
    /// 64K rows. Column bits lowest, then bank group, bank, rank, row.
    fn default() -> Self {
        AddressMapping {
            layout: vec![
                (Field::Column, 13),
                (Field::BankGroup, 3),
                (Field::Bank, 2),
                (Field::Rank, 0),
                (Field::Row, 16),
            ],
        }
    }
}

impl AddressMapping {
    pub fn new(layout: Vec<(Field, u32)>) -> Result<Self> {
        for f in Field::ALL {
            let n = layout.iter().filter(|(g, _)| *g == f).count();
            if n != 1 {
                return Err(Error::InvalidConfig(format!(
                    "mapping must list field {f} exactly once, found {n}"
                )));
            }
        }
        if layout.len() != Field::ALL.len() {
            return Err(Error::InvalidConfig("mapping has extra fields".into()));
        }
        let total: u32 = layout.iter().map(|(_, b)| b).sum();
        if total > 63 {
            return Err(Error::InvalidConfig(format!(
                "mapping covers {total} bits, at most 63 supported"
            )));
        }
        Ok(AddressMapping { layout })
    }

    pub fn layout(&self) -> &[(Field, u32)] {
        &self.layout
    }

    pub fn bits(&self, f: Field) -> u32 {
        self.layout
            .iter()
            .find(|(g, _)| *g == f)
            .map(|(_, b)| *b)
            .expect("validated layout")
    }

    pub fn count(&self, f: Field) -> u64 {
        1u64 << self.bits(f)
    }

    pub fn total_bits(&self) -> u32 {
        self.layout.iter().map(|(_, b)| b).sum()
    }

    /// Banks across all ranks and bank groups.
    pub fn total_banks(&self) -> usize {
        (self.count(Field::Rank) * self.count(Field::BankGroup) * self.count(Field::Bank)) as usize
    }

    pub fn decode(&self, address: u64) -> Option<DecodedAddress> {
        if address >> self.total_bits() != 0 {
            return None;
        }
        let mut out = DecodedAddress::default();
        let mut shift = 0;
        for &(f, bits) in &self.layout {
            let mask = (1u64 << bits) - 1;
            out.set(f, (address >> shift) & mask);
            shift += bits;
        }
        Some(out)
    }

    pub fn encode(&self, d: &DecodedAddress) -> Option<u64> {
        let mut addr = 0u64;
        let mut shift = 0;
        for &(f, bits) in &self.layout {
            let v = d.get(f);
            if v >> bits != 0 {
                return None;
            }
            addr |= v << shift;
            shift += bits;
        }
        Some(addr)
    }

    /// Flat bank index: rank-major, then bank group, then bank.
    pub fn flat_bank(&self, d: &DecodedAddress) -> BankId {
        let bgs = self.count(Field::BankGroup);
        let banks = self.count(Field::Bank);
        ((d.rank * bgs + d.bank_group) * banks + d.bank) as BankId
    }

    /// Inverse of [`flat_bank`](Self::flat_bank).
    pub fn split_bank(&self, flat: BankId) -> DecodedAddress {
        let banks = self.count(Field::Bank);
        let bgs = self.count(Field::BankGroup);
        let flat = flat as u64;
        DecodedAddress {
            bank: flat % banks,
            bank_group: (flat / banks) % bgs,
            rank: flat / (banks * bgs),
            ..Default::default()
        }
    }

    /// Address of `(bank, row, column)`, or `None` if any part is out of range.
    pub fn address_of(&self, bank: BankId, row: RowId, column: ColId) -> Option<u64> {
        if bank >= self.total_banks() {
            return None;
        }
        let d = DecodedAddress {
            row,
            column,
            ..self.split_bank(bank)
        };
        self.encode(&d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_geometry() {
        let m = AddressMapping::default();
        assert_eq!(m.total_bits(), 34);
        assert_eq!(m.total_banks(), 32);
        assert_eq!(m.count(Field::Row), 65536);
    }

    #[test]
    fn decode_fields() {
        let m = AddressMapping::default();
        let addr = (5u64 << 18) | (2 << 16) | (3 << 13) | 0x40;
        let d = m.decode(addr).unwrap();
        assert_eq!(d.column, 0x40);
        assert_eq!(d.bank_group, 3);
        assert_eq!(d.bank, 2);
        assert_eq!(d.row, 5);
        assert_eq!(m.flat_bank(&d), 3 * 4 + 2);
        assert!(m.decode(1u64 << 34).is_none());
    }

    #[test]
    fn rejects_bad_layouts() {
        assert!(AddressMapping::new(vec![(Field::Row, 10)]).is_err());
        let dup = vec![
            (Field::Column, 13),
            (Field::Column, 1),
            (Field::BankGroup, 3),
            (Field::Bank, 2),
            (Field::Rank, 0),
            (Field::Row, 16),
        ];
        assert!(AddressMapping::new(dup).is_err());
        let wide = vec![
            (Field::Column, 40),
            (Field::BankGroup, 3),
            (Field::Bank, 2),
            (Field::Rank, 0),
            (Field::Row, 30),
        ];
        assert!(AddressMapping::new(wide).is_err());
    }

    #[test]
    fn address_of_out_of_range() {
        let m = AddressMapping::default();
        assert!(m.address_of(32, 0, 0).is_none());
        assert!(m.address_of(0, 1 << 16, 0).is_none());
        assert!(m.address_of(0, 0, 1 << 13).is_none());
    }

    proptest! {
        #[test]
        fn decode_encode_roundtrip(addr in 0u64..(1u64 << 34)) {
            let m = AddressMapping::default();
            let d = m.decode(addr).unwrap();
            prop_assert_eq!(m.encode(&d), Some(addr));
        }

        #[test]
        fn bank_split_roundtrip(
            rank_bits in 0u32..3, bg_bits in 0u32..4, bank_bits in 0u32..3,
            seed in any::<u64>(),
        ) {
            let m = AddressMapping::new(vec![
                (Field::Row, 10),
                (Field::Rank, rank_bits),
                (Field::Column, 8),
                (Field::Bank, bank_bits),
                (Field::BankGroup, bg_bits),
            ]).unwrap();
            let flat = (seed % m.total_banks() as u64) as usize;
            let addr = m.address_of(flat, 3, 7).unwrap();
            let d = m.decode(addr).unwrap();
            prop_assert_eq!(m.flat_bank(&d), flat);
            prop_assert_eq!((d.row, d.column), (3, 7));
        }
    }
}
