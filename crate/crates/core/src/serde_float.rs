//! JSON has no literal for ±∞ or NaN. Fields that can hold them are written
//! as numbers when finite and as `"inf"`, `"-inf"` or `"nan"` otherwise.

use alloc::vec::Vec;
use core::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy)]
struct Ext(f64);

impl Serialize for Ext {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_finite() {
            s.serialize_f64(v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for Ext {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Ext;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Ext, E> {
                Ok(Ext(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Ext, E> {
                Ok(Ext(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Ext, E> {
                Ok(Ext(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Ext, E> {
                match v {
                    "inf" => Ok(Ext(f64::INFINITY)),
                    "-inf" => Ok(Ext(f64::NEG_INFINITY)),
                    "nan" => Ok(Ext(f64::NAN)),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    Ext(*v).serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ext::deserialize(d).map(|e| e.0)
}

pub mod option {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.map(Ext).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Ok(Option::<Ext>::deserialize(d)?.map(|e| e.0))
    }
}

pub mod pair {
    use super::*;

    pub fn serialize<S: Serializer>(v: &(f64, f64), s: S) -> Result<S::Ok, S::Error> {
        (Ext(v.0), Ext(v.1)).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(f64, f64), D::Error> {
        let (a, b) = <(Ext, Ext)>::deserialize(d)?;
        Ok((a.0, b.0))
    }
}

pub mod vec_option {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Option<f64>], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|o| o.map(Ext)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Option<f64>>, D::Error> {
        Ok(Vec::<Option<Ext>>::deserialize(d)?
            .into_iter()
            .map(|o| o.map(|e| e.0))
            .collect())
    }
}
