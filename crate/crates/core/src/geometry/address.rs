use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Path from the top cube to a dyadic cube: one child digit (1-based) per level.
///
/// The generic text form is `"j:d1d2...dj"`, with `"0:"` for the top cube.
/// Models with a different external convention (the half-line uses the
/// interval index) provide their own parser through
/// [`SpaceModel::parse_address`](super::SpaceModel::parse_address).
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Address {
    digits: Vec<u8>,
}

impl Address {
    pub fn root() -> Self {
        Self::default()
    }

    /// Builds an address from raw digits. Digits must be at least 1; whether
    /// they are valid children is checked by the model.
    pub fn from_digits(digits: Vec<u8>) -> Result<Self> {
        if let Some(pos) = digits.iter().position(|&d| d == 0) {
            return Err(Error::InvalidAddress {
                address: format!("{digits:?}"),
                reason: format!("digit {pos} is 0; child digits start at 1"),
            });
        }
        Ok(Self { digits })
    }

    pub fn level(&self) -> usize {
        self.digits.len()
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn child(&self, digit: u8) -> Self {
        debug_assert!(digit >= 1);
        let mut digits = self.digits.clone();
        digits.push(digit);
        Self { digits }
    }

    pub fn parent(&self) -> Option<Self> {
        let (_, rest) = self.digits.split_last()?;
        Some(Self {
            digits: rest.to_vec(),
        })
    }

    /// Ancestor at `level` (the address itself if `level >= self.level()`).
    pub fn prefix(&self, level: usize) -> Self {
        Self {
            digits: self.digits[..level.min(self.digits.len())].to_vec(),
        }
    }

    pub fn is_prefix_of(&self, other: &Address) -> bool {
        other.digits.starts_with(&self.digits)
    }

    /// Longest common prefix, i.e. the smallest cube containing both cells.
    pub fn common_prefix(&self, other: &Address) -> Self {
        let n = self
            .digits
            .iter()
            .zip(&other.digits)
            .take_while(|(a, b)| a == b)
            .count();
        self.prefix(n)
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.level())?;
        for d in &self.digits {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Address({self})")
    }
}

impl FromStr for Address {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = |reason: &str| Error::ParseAddress {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let (level, digits) = s.split_once(':').ok_or_else(|| err("missing ':'"))?;
        let level: usize = level.trim().parse().map_err(|_| err("level is not an integer"))?;
        let digits = digits
            .trim()
            .chars()
            .map(|c| match c.to_digit(10) {
                Some(d) if d >= 1 => Ok(d as u8),
                _ => Err(err("digits must be in 1..=9")),
            })
            .collect::<Result<Vec<u8>>>()?;
        if digits.len() != level {
            return Err(err("number of digits differs from the level"));
        }
        Ok(Self { digits })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(s: &str) -> Address {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(a("0:"), Address::root());
        assert_eq!(a("3:123").digits(), &[1, 2, 3]);
        assert_eq!(a("3:123").to_string(), "3:123");
        assert!("2:1".parse::<Address>().is_err());
        assert!("1:0".parse::<Address>().is_err());
        assert!("12".parse::<Address>().is_err());
    }

    #[test]
    fn prefixes() {
        assert_eq!(a("2:12").common_prefix(&a("2:13")), a("1:1"));
        assert_eq!(a("2:22").common_prefix(&a("2:22")), a("2:22"));
        assert_eq!(a("2:11").common_prefix(&a("2:31")), Address::root());
        assert!(a("1:2").is_prefix_of(&a("3:213")));
        assert_eq!(a("3:213").parent(), Some(a("2:21")));
        assert_eq!(Address::root().parent(), None);
    }
}
