//! Inverse temperatures that may be infinite. JSON has no infinity, so an
//! infinite value is written as the string "inf".

use serde::{de, Deserialize, Deserializer, Serializer};

pub fn serialize<S: Serializer>(beta: &f64, s: S) -> Result<S::Ok, S::Error> {
    if beta.is_infinite() && *beta > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*beta)
    }
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }
    match Raw::deserialize(d)? {
        Raw::Num(x) => Ok(x),
        Raw::Text(t) => parse(&t).map_err(de::Error::custom),
    }
}

/// Parses a nonnegative inverse temperature; accepts `inf`.
pub fn parse(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let x = match t.to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "+inf" => f64::INFINITY,
        _ => t.parse::<f64>().map_err(|e| format!("invalid inverse temperature {t:?}: {e}"))?,
    };
    if x >= 0.0 {
        Ok(x)
    } else {
        Err(format!("inverse temperature must be >= 0, got {t}"))
    }
}

/// Same encoding for a list, used by sweep grids.
pub mod many {
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    struct Item(#[serde(deserialize_with = "super::deserialize")] f64);

    pub fn serialize<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
        struct Item<'a>(&'a f64);
        impl serde::Serialize for Item<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                super::serialize(self.0, s)
            }
        }
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&Item(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Ok(Vec::<Item>::deserialize(d)?.into_iter().map(|i| i.0).collect())
    }
}
