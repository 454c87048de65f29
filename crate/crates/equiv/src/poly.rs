use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// A real polynomial, coefficients stored lowest degree first with
/// trailing zeros trimmed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of the polynomial; the zero polynomial has none.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, degree: usize) -> f64 {
        self.coeffs.get(degree).copied().unwrap_or(0.0)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degrees 1 and above with nonzero coefficients, ascending.
    pub fn nonzero_degrees_above_zero(&self) -> Vec<usize> {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, &c)| c != 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0.0 {
                continue;
            }
            if !first {
                write!(f, " {} ", if c < 0.0 { "-" } else { "+" })?;
            } else if c < 0.0 {
                write!(f, "-")?;
            }
            first = false;
            let mag = c.abs();
            match i {
                0 => write!(f, "{mag}")?,
                1 => {
                    if mag != 1.0 {
                        write!(f, "{mag} ")?;
                    }
                    write!(f, "S")?;
                }
                _ => {
                    if mag != 1.0 {
                        write!(f, "{mag} ")?;
                    }
                    write!(f, "S^{i}")?;
                }
            }
        }
        Ok(())
    }
}

/// Parses a comma-separated coefficient list, lowest degree first:
/// `"1,0,-2"` is `1 - 2 S^2`.
impl FromStr for Polynomial {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut coeffs = Vec::new();
        for (i, part) in s.split(',').enumerate() {
            let c: f64 = part
                .trim()
                .parse()
                .map_err(|_| format!("coefficient {} ({:?}) is not a number", i, part.trim()))?;
            if !c.is_finite() {
                return Err(format!("coefficient {i} must be finite"));
            }
            coeffs.push(c);
        }
        Ok(Polynomial::new(coeffs))
    }
}
