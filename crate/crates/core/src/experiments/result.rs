use serde::{Deserialize, Serialize};

use crate::tomography::{CharacteristicGrid, WignerGrid};

use super::scenario::ScenarioKind;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

/// One row per scan point.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<Column>,
    #[serde(with = "nonfinite::rows")]
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(cols: &[(&str, &str)]) -> Table {
        Table {
            columns: cols.iter().map(|(n, u)| Column { name: n.to_string(), unit: u.to_string() }).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c.name == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub label: String,
    pub x_name: String,
    pub x_unit: String,
    #[serde(with = "nonfinite::seq")]
    pub x: Vec<f64>,
    #[serde(with = "nonfinite::seq")]
    pub y: Vec<f64>,
}

/// A scalar result; `sigma` is its 1σ uncertainty (zero for exact values).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub name: String,
    #[serde(with = "nonfinite")]
    pub value: f64,
    #[serde(with = "nonfinite")]
    pub sigma: f64,
    pub unit: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: Option<u64>,
    pub shots: Option<u32>,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub name: String,
    pub kind: ScenarioKind,
    pub table: Table,
    pub curves: Vec<Curve>,
    pub summary: Vec<Quantity>,
    pub chi: Option<CharacteristicGrid>,
    pub wigner: Option<WignerGrid>,
    pub notes: Vec<String>,
    pub provenance: Provenance,
}

impl ScenarioResult {
    pub fn quantity(&self, name: &str) -> Option<&Quantity> {
        self.summary.iter().find(|q| q.name == name)
    }
}

pub(crate) fn q(name: &str, value: f64, sigma: f64, unit: &str) -> Quantity {
    Quantity { name: name.into(), value, sigma, unit: unit.into() }
}

pub(crate) fn curve(label: &str, x_name: &str, x_unit: &str, x: Vec<f64>, y: Vec<f64>) -> Curve {
    Curve { label: label.into(), x_name: x_name.into(), x_unit: x_unit.into(), x, y }
}

/// JSON has no NaN or ±∞, so those travel as the strings "NaN", "inf" and
/// "-inf"; finite values stay plain numbers.
mod nonfinite {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    fn encode(v: f64) -> Repr {
        match v {
            v if v.is_finite() => Repr::Num(v),
            v if v.is_nan() => Repr::Text("NaN".into()),
            v if v > 0.0 => Repr::Text("inf".into()),
            _ => Repr::Text("-inf".into()),
        }
    }

    fn decode<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
        match r {
            Repr::Num(v) => Ok(v),
            Repr::Text(s) => match s.as_str() {
                "NaN" => Ok(f64::NAN),
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                _ => Err(E::custom(format!("expected a number, \"NaN\", \"inf\" or \"-inf\", got \"{s}\""))),
            },
        }
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        encode(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        decode(Repr::deserialize(d)?)
    }

    pub mod seq {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(v.iter().map(|&x| encode(x)))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            Vec::<Repr>::deserialize(d)?.into_iter().map(decode).collect()
        }
    }

    pub mod rows {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(v.iter().map(|r| r.iter().map(|&x| encode(x)).collect::<Vec<_>>()))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<f64>>, D::Error> {
            Vec::<Vec<Repr>>::deserialize(d)?.into_iter().map(|r| r.into_iter().map(decode).collect()).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_values_round_trip() {
        let mut t = Table::new(&[("a", "1"), ("b", "s")]);
        t.rows.push(vec![f64::NAN, 0.1 + 0.2]);
        t.rows.push(vec![f64::INFINITY, f64::NEG_INFINITY]);
        let qv = q("x", 1.0 / 3.0, f64::NAN, "1");
        let js = serde_json::to_string(&(t.clone(), qv.clone())).unwrap();
        assert!(js.contains("\"NaN\"") && js.contains("\"-inf\""));
        let (t2, q2): (Table, Quantity) = serde_json::from_str(&js).unwrap();
        assert!(t2.rows[0][0].is_nan() && q2.sigma.is_nan());
        assert_eq!(t2.rows[0][1], 0.1 + 0.2);
        assert_eq!(t2.rows[1], t.rows[1]);
        assert_eq!(q2.value, qv.value);
        assert!(serde_json::from_str::<Quantity>(r#"{"name":"x","value":"nan?","sigma":0,"unit":""}"#).is_err());
    }
}
