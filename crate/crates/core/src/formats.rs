//! JSON file formats for weight families and weight sequences.
//!
//! ```json
//! {"d":3,"N":2,"weights":[{"I":[0,0,0],"j":1,"re":0.5,"im":0.0}, …]}
//! {"d":2,"N":2,"beta":[{"I":[0,0],"value":1.0}, …]}
//! ```
//!
//! `j` is 1-based. Every entry must be present; there are no implicit zeros.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ShiftError};
use crate::multiindex::MultiIndex;
use crate::weights::{BetaFamily, WeightFamily};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeightEntry {
    #[serde(rename = "I")]
    pub index: MultiIndex,
    pub j: usize,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeightFile {
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub weights: Vec<WeightEntry>,
}

impl WeightFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_family(&self) -> Result<WeightFamily> {
        let entries = self
            .weights
            .iter()
            .map(|e| {
                if e.j == 0 || e.j > self.d {
                    return Err(ShiftError::Argument(format!(
                        "axis j={} out of range 1..={} at I={}",
                        e.j, self.d, e.index
                    )));
                }
                Ok((e.index.clone(), e.j - 1, Complex64::new(e.re, e.im)))
            })
            .collect::<Result<Vec<_>>>()?;
        WeightFamily::from_entries(self.d, self.n, entries)
    }
}

impl From<&WeightFamily> for WeightFile {
    fn from(w: &WeightFamily) -> Self {
        WeightFile {
            d: w.d(),
            n: w.n(),
            weights: w
                .entries()
                .map(|(i, j, x)| WeightEntry {
                    index: i.clone(),
                    j: j + 1,
                    re: x.re,
                    im: x.im,
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BetaEntry {
    #[serde(rename = "I")]
    pub index: MultiIndex,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BetaFile {
    pub d: usize,
    /// Weight level; `β` entries cover `|I| ≤ N+1`.
    #[serde(rename = "N")]
    pub n: usize,
    pub beta: Vec<BetaEntry>,
}

impl BetaFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_family(&self) -> Result<BetaFamily> {
        BetaFamily::from_entries(
            self.d,
            self.n,
            self.beta.iter().map(|e| (e.index.clone(), e.value)),
        )
    }
}

impl From<&BetaFamily> for BetaFile {
    fn from(b: &BetaFamily) -> Self {
        BetaFile {
            d: b.d(),
            n: b.n(),
            beta: b
                .entries()
                .map(|(i, v)| BetaEntry {
                    index: i.clone(),
                    value: v,
                })
                .collect(),
        }
    }
}
