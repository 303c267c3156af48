//! File formats: system lists (JSON), numeric CSV output.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tf::RationalTF;

/// One input system: identifier plus descending-power coefficient lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemRecord {
    pub id: String,
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

impl SystemRecord {
    pub fn from_tf(id: impl Into<String>, g: &RationalTF) -> Self {
        SystemRecord {
            id: id.into(),
            num: if g.num().is_zero() {
                vec![0.0]
            } else {
                g.num().coeffs().to_vec()
            },
            den: g.den().coeffs().to_vec(),
        }
    }

    pub fn to_tf(&self) -> Result<RationalTF> {
        RationalTF::new(&self.num, &self.den)
    }
}

/// Labelled set of canonical systems.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSet {
    pub ids: Vec<String>,
    pub systems: Vec<RationalTF>,
}

impl SystemSet {
    pub fn from_records(records: &[SystemRecord]) -> Result<Self> {
        let mut ids = Vec::with_capacity(records.len());
        let mut systems = Vec::with_capacity(records.len());
        for r in records {
            let g = r
                .to_tf()
                .map_err(|e| Error::Parse(format!("system {}: {e}", r.id)))?;
            if ids.contains(&r.id) {
                return Err(Error::Parse(format!("duplicate system id {}", r.id)));
            }
            ids.push(r.id.clone());
            systems.push(g);
        }
        Ok(SystemSet { ids, systems })
    }

    pub fn records(&self) -> Vec<SystemRecord> {
        self.ids
            .iter()
            .zip(&self.systems)
            .map(|(id, g)| SystemRecord::from_tf(id.clone(), g))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.systems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.systems.is_empty()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let records: Vec<SystemRecord> =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_records(&records)
    }

    pub fn to_json(&self) -> String {
        to_json_pretty(&self.records())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

pub fn to_json_pretty<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_file(path, &to_json_pretty(value))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Formats with 9 significant digits in the style of C's `%.9g`.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.8e}", x);
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mant), sign, exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// CSV with a header row and numeric columns.
pub fn csv_table(header: &[String], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| fmt_sig(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig_formatting() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(0.316227766016838), "0.316227766");
        assert_eq!(fmt_sig(-2.5), "-2.5");
        assert_eq!(fmt_sig(1234567890123.0), "1.23456789e+12");
        assert_eq!(fmt_sig(1.5e-7), "1.5e-07");
        assert_eq!(fmt_sig(0.0001), "0.0001");
        assert_eq!(fmt_sig(f64::INFINITY), "inf");
    }

    #[test]
    fn records_round_trip() {
        let text = r#"[{"id":"a","num":[1],"den":[1,1]},{"id":"b","num":[2,0],"den":[2,2]}]"#;
        let set = SystemSet::from_json(text).unwrap();
        assert_eq!(set.len(), 2);
        let again = SystemSet::from_json(&set.to_json()).unwrap();
        assert_eq!(again, set);
    }

    #[test]
    fn rejects_improper_and_duplicates() {
        assert!(SystemSet::from_json(r#"[{"id":"a","num":[1,0,0],"den":[1,1]}]"#).is_err());
        assert!(SystemSet::from_json(
            r#"[{"id":"a","num":[1],"den":[1,1]},{"id":"a","num":[1],"den":[1,2]}]"#
        )
        .is_err());
    }
}
