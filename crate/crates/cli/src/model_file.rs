//! The JSON model specification read by every subcommand.

use std::path::Path;

use cpsurf::meron::{Branch, MeronSpec};
use cpsurf::{Chirality, Complex64, HolomorphicVectorSpec, Poly, RationalFunction, Solution};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const FORMAT_VERSION: u32 = 1;

/// Ascending complex coefficients, each written as `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RationalSpec {
    pub numerator: Vec<[f64; 2]>,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub denominator: Vec<[f64; 2]>,
}

fn one() -> Vec<[f64; 2]> {
    vec![[1.0, 0.0]]
}

fn is_one(d: &Vec<[f64; 2]>) -> bool {
    *d == one()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeronBlock {
    #[serde(rename = "F")]
    pub f: RationalSpec,
    pub c: [f64; 2],
    pub branch: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpecFile {
    pub format_version: u32,
    #[serde(rename = "N")]
    pub n: usize,
    pub f: Vec<RationalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chirality: Option<Chirality>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meron: Option<MeronBlock>,
}

fn complex(field: &str, v: [f64; 2]) -> CliResult<Complex64> {
    if !(v[0].is_finite() && v[1].is_finite()) {
        return Err(CliError::input(format!("{field}: non-finite coefficient {:?}", v)));
    }
    Ok(Complex64::new(v[0], v[1]))
}

fn coeffs(field: &str, v: &[[f64; 2]]) -> CliResult<Vec<Complex64>> {
    if v.is_empty() {
        return Err(CliError::input(format!("{field}: empty coefficient list")));
    }
    v.iter().enumerate().map(|(i, &z)| complex(&format!("{field}[{i}]"), z)).collect()
}

impl RationalSpec {
    pub fn from_poly(coeffs: &[Complex64]) -> Self {
        RationalSpec { numerator: coeffs.iter().map(|z| [z.re, z.im]).collect(), denominator: one() }
    }

    pub fn to_rational(&self, field: &str) -> CliResult<RationalFunction> {
        let num = coeffs(&format!("{field}.numerator"), &self.numerator)?;
        let den = coeffs(&format!("{field}.denominator"), &self.denominator)?;
        RationalFunction::new(Poly::new(num), Poly::new(den))
            .map_err(|e| CliError::core(format!("{field}.denominator"), e))
    }
}

impl ModelSpecFile {
    pub fn veronese(n: usize) -> CliResult<Self> {
        let spec = HolomorphicVectorSpec::veronese(n).map_err(|e| CliError::core("--n", e))?;
        let f = spec
            .components()
            .iter()
            .map(|r| RationalSpec::from_poly(r.numerator().coeffs()))
            .collect();
        Ok(ModelSpecFile { format_version: FORMAT_VERSION, n, f, k: None, chirality: None, meron: None })
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        let spec: ModelSpecFile =
            serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(CliError::input(format!(
                "format_version: expected {FORMAT_VERSION}, got {}",
                self.format_version
            )));
        }
        if self.n < 2 {
            return Err(CliError::input(format!("N: must be at least 2, got {}", self.n)));
        }
        if self.f.len() != self.n {
            return Err(CliError::input(format!("f: {} components given for N = {}", self.f.len(), self.n)));
        }
        self.holomorphic()?;
        if let Some(k) = self.k {
            if k >= self.n {
                return Err(CliError::input(format!("k: tower depth {k} exceeds N - 1 = {}", self.n - 1)));
            }
        }
        if self.meron.is_some() {
            self.meron_spec()?;
        }
        Ok(())
    }

    pub fn holomorphic(&self) -> CliResult<HolomorphicVectorSpec> {
        let comps = self
            .f
            .iter()
            .enumerate()
            .map(|(i, r)| r.to_rational(&format!("f[{i}]")))
            .collect::<CliResult<Vec<_>>>()?;
        HolomorphicVectorSpec::new(comps).map_err(|e| CliError::core("f", e))
    }

    /// The solution at depth `k`, with `--k` taking precedence over the file.
    pub fn solution(&self, k: Option<usize>) -> CliResult<Solution> {
        let k = k.or(self.k).unwrap_or(0);
        let chirality = self.chirality.unwrap_or(Chirality::Holomorphic);
        Solution::new(self.holomorphic()?, k, chirality).map_err(|e| CliError::core("k", e))
    }

    pub fn meron_spec(&self) -> CliResult<MeronSpec> {
        let m = self.meron.as_ref().ok_or_else(|| CliError::input("meron: block missing from model"))?;
        let f = m.f.to_rational("meron.F")?;
        let c = complex("meron.c", m.c)?;
        let branch = Branch::from_sign(m.branch).map_err(|e| CliError::core("meron.branch", e))?;
        MeronSpec::new(f, c, branch).map_err(|e| CliError::core("meron", e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn veronese_roundtrip() {
        let s = ModelSpecFile::veronese(3).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        let back: ModelSpecFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        back.validate().unwrap();
        assert_eq!(s.f[1].numerator, vec![[0.0, 0.0], [2f64.sqrt(), 0.0]]);
    }

    #[test]
    fn rejects_wrong_component_count() {
        let mut s = ModelSpecFile::veronese(3).unwrap();
        s.f.pop();
        let e = s.validate().unwrap_err();
        assert!(e.to_string().starts_with("f:"));
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn rejects_zero_denominator() {
        let mut s = ModelSpecFile::veronese(2).unwrap();
        s.f[1].denominator = vec![[0.0, 0.0]];
        assert!(s.validate().unwrap_err().to_string().contains("f[1].denominator"));
    }

    #[test]
    fn rejects_bad_meron() {
        let mut s = ModelSpecFile::veronese(3).unwrap();
        s.meron = Some(MeronBlock { f: RationalSpec::from_poly(&[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]), c: [1.0, 0.0], branch: 2 });
        assert!(s.validate().unwrap_err().to_string().starts_with("meron.branch"));
    }
}
