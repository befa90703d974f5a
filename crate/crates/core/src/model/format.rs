//! Profile files (one JSON object) and instance files (one valuation per line).
//!
//! Numbers are written with 17 significant digits, which reproduces every
//! `f64` sample bit for bit when read back.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use super::{Instance, MarketParams, PricingProfile};
use crate::error::{Error, Result};
use crate::grid::GridFn;
use crate::scalar::Scalar;

/// On-disk shape of a profile.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileDocument {
    #[serde(rename = "L")]
    pub lower: f64,
    #[serde(rename = "U")]
    pub upper: f64,
    pub k: usize,
    pub delta_cap: usize,
    pub delta_risk: f64,
    pub alpha: f64,
    pub grid_size: usize,
    pub reservation: Vec<usize>,
    pub levels: Vec<Vec<f64>>,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_array(out: &mut String, xs: impl Iterator<Item = f64>) {
    out.push('[');
    for (i, x) in xs.enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&num(x));
    }
    out.push(']');
}

impl<T: Scalar> PricingProfile<T> {
    pub fn to_document_string(&self) -> String {
        let p = &self.params;
        let mut s = String::new();
        s.push_str("{\n");
        let _ = writeln!(s, "  \"L\": {},", num(p.lower.as_f64()));
        let _ = writeln!(s, "  \"U\": {},", num(p.upper.as_f64()));
        let _ = writeln!(s, "  \"k\": {},", p.k);
        let _ = writeln!(s, "  \"delta_cap\": {},", p.delta_cap);
        let _ = writeln!(s, "  \"delta_risk\": {},", num(p.delta_risk.as_f64()));
        let _ = writeln!(s, "  \"alpha\": {},", num(self.alpha.as_f64()));
        let _ = writeln!(s, "  \"grid_size\": {},", self.grid_size());
        let q: Vec<String> = self.reservation.iter().map(|q| q.to_string()).collect();
        let _ = writeln!(s, "  \"reservation\": [{}],", q.join(","));
        s.push_str("  \"levels\": [\n");
        for (i, f) in self.levels.iter().enumerate() {
            s.push_str("    ");
            write_array(&mut s, f.samples().iter().map(|x| x.as_f64()));
            s.push_str(if i + 1 < self.levels.len() { ",\n" } else { "\n" });
        }
        s.push_str("  ]\n}\n");
        s
    }

    pub fn from_document_str(text: &str) -> Result<Self> {
        let doc: ProfileDocument = serde_json::from_str(text)?;
        Self::from_document(doc)
    }

    pub fn from_document(doc: ProfileDocument) -> Result<Self> {
        let conv = |x: f64| T::from_f64(x).ok_or_else(|| Error::Format(format!("{x} not representable")));
        let params = MarketParams {
            lower: conv(doc.lower)?,
            upper: conv(doc.upper)?,
            k: doc.k,
            delta_cap: doc.delta_cap,
            delta_risk: conv(doc.delta_risk)?,
        };
        let mut levels = Vec::with_capacity(doc.levels.len());
        for (i, samples) in doc.levels.into_iter().enumerate() {
            if samples.len() != doc.grid_size + 1 {
                return Err(Error::Format(format!(
                    "level {} has {} samples, expected grid_size + 1 = {}",
                    i + 1,
                    samples.len(),
                    doc.grid_size + 1
                )));
            }
            let samples = samples.into_iter().map(conv).collect::<Result<Vec<T>>>()?;
            levels.push(GridFn::from_samples(samples)?);
        }
        if levels.is_empty() {
            return Err(Error::Format("profile has no levels".into()));
        }
        PricingProfile::new(params, conv(doc.alpha)?, doc.reservation, levels)
    }
}

pub fn write_profile<T: Scalar>(profile: &PricingProfile<T>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, profile.to_document_string())?;
    Ok(())
}

pub fn read_profile<T: Scalar>(path: impl AsRef<Path>) -> Result<PricingProfile<T>> {
    PricingProfile::from_document_str(&std::fs::read_to_string(path)?)
}

/// Parses one decimal valuation per line; `#` starts a comment.
pub fn parse_instance<T: Scalar>(text: &str) -> Result<Instance<T>> {
    let mut valuations = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let v: f64 = body
            .parse()
            .map_err(|_| Error::Format(format!("line {}: cannot parse valuation {body:?}", lineno + 1)))?;
        if !v.is_finite() {
            return Err(Error::Format(format!("line {}: non-finite valuation", lineno + 1)));
        }
        valuations.push(T::lit(v));
    }
    Ok(Instance::new(valuations))
}

pub fn read_instance<T: Scalar>(path: impl AsRef<Path>) -> Result<Instance<T>> {
    parse_instance(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_parsing_skips_comments_and_blanks() {
        let inst: Instance<f64> = parse_instance("# header\n1.5\n\n  2 # trailing\n3e1\n").unwrap();
        assert_eq!(inst.valuations, vec![1.5, 2.0, 30.0]);
    }

    #[test]
    fn instance_parse_error_names_line() {
        let err = parse_instance::<f64>("1\nabc\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn document_rejects_wrong_sample_count() {
        let text = r#"{"L":1,"U":2,"k":1,"delta_cap":0,"delta_risk":1,"alpha":1.5,"grid_size":2,"reservation":[1],"levels":[[1,2]]}"#;
        let err = PricingProfile::<f64>::from_document_str(text).unwrap_err();
        assert!(err.to_string().contains("expected grid_size + 1"), "{err}");
    }

    #[test]
    fn document_rejects_unknown_fields() {
        let text = r#"{"L":1,"U":2,"k":1,"delta_cap":0,"delta_risk":1,"alpha":1.5,"grid_size":1,"reservation":[1],"levels":[[1,2]],"x":0}"#;
        assert!(PricingProfile::<f64>::from_document_str(text).is_err());
    }
}
