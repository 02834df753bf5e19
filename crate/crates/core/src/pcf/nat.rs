use std::fmt;
use std::rc::Rc;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

/// Arbitrary-precision natural number with an inline fast path.
///
/// `Big` only ever holds values above `u64::MAX`, so the derived ordering
/// and equality are numeric.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Nat {
    Small(u64),
    Big(Rc<BigUint>),
}

impl Nat {
    pub const ZERO: Nat = Nat::Small(0);

    fn from_big(b: BigUint) -> Nat {
        match b.to_u64() {
            Some(n) => Nat::Small(n),
            None => Nat::Big(Rc::new(b)),
        }
    }

    fn to_big(&self) -> BigUint {
        match self {
            Nat::Small(n) => BigUint::from(*n),
            Nat::Big(b) => (**b).clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Nat::Small(0))
    }

    pub fn to_u64(&self) -> Option<u64> {
        match self {
            Nat::Small(n) => Some(*n),
            Nat::Big(_) => None,
        }
    }

    pub fn add(&self, other: &Nat) -> Nat {
        if let (Nat::Small(a), Nat::Small(b)) = (self, other) {
            if let Some(c) = a.checked_add(*b) {
                return Nat::Small(c);
            }
        }
        Nat::from_big(self.to_big() + other.to_big())
    }

    /// Truncated subtraction: `a - b` is 0 when `b > a`.
    pub fn monus(&self, other: &Nat) -> Nat {
        if self <= other {
            return Nat::ZERO;
        }
        match (self, other) {
            (Nat::Small(a), Nat::Small(b)) => Nat::Small(a - b),
            _ => Nat::from_big(self.to_big() - other.to_big()),
        }
    }

    pub fn mul(&self, other: &Nat) -> Nat {
        if let (Nat::Small(a), Nat::Small(b)) = (self, other) {
            if let Some(c) = a.checked_mul(*b) {
                return Nat::Small(c);
            }
        }
        Nat::from_big(self.to_big() * other.to_big())
    }

    /// Integer division; `None` on a zero divisor.
    pub fn div(&self, other: &Nat) -> Option<Nat> {
        if other.is_zero() {
            return None;
        }
        Some(match (self, other) {
            (Nat::Small(a), Nat::Small(b)) => Nat::Small(a / b),
            _ => Nat::from_big(self.to_big() / other.to_big()),
        })
    }

    pub fn parse(digits: &str) -> Option<Nat> {
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        match digits.parse::<u64>() {
            Ok(n) => Some(Nat::Small(n)),
            Err(_) => BigUint::parse_bytes(digits.as_bytes(), 10).map(Nat::from_big),
        }
    }
}

impl From<u64> for Nat {
    fn from(n: u64) -> Nat {
        Nat::Small(n)
    }
}

impl Default for Nat {
    fn default() -> Self {
        Nat::ZERO
    }
}

impl fmt::Display for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Nat::Small(n) => write!(f, "{n}"),
            Nat::Big(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Debug for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
