//! Floating-point scalar abstraction shared by the tree, boosting and
//! statistics kernels.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point: `f32` or `f64`.
///
/// Feature values are always stored as `f64`; the scalar parameter governs
/// gradient statistics, leaf weights, gains and special-function evaluation.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Default + Debug + Display + Sum + Send + Sync + 'static
{
    /// Converts an `f64` constant, rounding to the nearest representable value.
    fn lit(v: f64) -> Self;

    /// Widens to `f64` (exact for both supported types).
    fn widen(self) -> f64;

    fn from_usize_lossy(v: usize) -> Self {
        Self::lit(v as f64)
    }
}

impl Scalar for f32 {
    #[inline]
    fn lit(v: f64) -> Self {
        v as f32
    }

    #[inline]
    fn widen(self) -> f64 {
        f64::from(self)
    }
}

impl Scalar for f64 {
    #[inline]
    fn lit(v: f64) -> Self {
        v
    }

    #[inline]
    fn widen(self) -> f64 {
        self
    }
}

/// Serde adapter writing a scalar as a JSON number with 17 significant
/// digits, which round-trips `f64` bit-exactly. Non-finite values are
/// written as the strings `"inf"`, `"-inf"` and `"nan"`.
pub mod decimal17 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use serde_json::value::RawValue;

    use super::Scalar;

    pub fn format(v: f64) -> String {
        if v.is_nan() {
            "\"nan\"".to_string()
        } else if v.is_infinite() {
            if v > 0.0 { "\"inf\"" } else { "\"-inf\"" }.to_string()
        } else {
            format!("{v:.16e}")
        }
    }

    pub fn parse(text: &str) -> Result<f64, String> {
        let text = text.trim();
        match text {
            "\"nan\"" => Ok(f64::NAN),
            "\"inf\"" => Ok(f64::INFINITY),
            "\"-inf\"" => Ok(f64::NEG_INFINITY),
            _ => text
                .parse::<f64>()
                .map_err(|e| format!("invalid number {text:?}: {e}")),
        }
    }

    pub fn serialize<T: Scalar, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        let raw = RawValue::from_string(format(v.widen())).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }

    struct NumberVisitor;

    impl serde::de::Visitor<'_> for NumberVisitor {
        type Value = f64;

        fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
            f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
        }

        fn visit_f64<E: serde::de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }

        fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<f64, E> {
            match v {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                _ => Err(E::custom(format!("invalid number {v:?}"))),
            }
        }
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<T, D::Error> {
        d.deserialize_any(NumberVisitor).map(T::lit)
    }

    /// Same encoding for plain `f64` fields (feature thresholds).
    pub mod f64 {
        use super::*;

        pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
            super::serialize(v, s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
            super::deserialize(d)
        }
    }

    /// Sequences of scalars.
    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<T: Scalar, S: Serializer>(v: &[T], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for x in v {
                let raw =
                    RawValue::from_string(format(x.widen())).map_err(serde::ser::Error::custom)?;
                seq.serialize_element(&raw)?;
            }
            seq.end()
        }

        pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<Vec<T>, D::Error> {
            struct Item(f64);
            impl<'de> Deserialize<'de> for Item {
                fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                    d.deserialize_any(super::NumberVisitor).map(Item)
                }
            }
            let items: Vec<Item> = Deserialize::deserialize(d)?;
            Ok(items.into_iter().map(|i| T::lit(i.0)).collect())
        }
    }

    /// Row-major nested sequences.
    pub mod matrix {
        use super::*;
        use serde::ser::SerializeSeq;

        struct Row<'a, T>(&'a [T]);

        impl<T: Scalar> Serialize for Row<'_, T> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                super::vec::serialize(self.0, s)
            }
        }

        pub fn serialize<T: Scalar, S: Serializer>(m: &[Vec<T>], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(m.len()))?;
            for row in m {
                seq.serialize_element(&Row(row))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<T>>, D::Error> {
            struct RowOf<T>(Vec<T>);
            impl<'de, T: Scalar> Deserialize<'de> for RowOf<T> {
                fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                    super::vec::deserialize(d).map(RowOf)
                }
            }
            let rows: Vec<RowOf<T>> = Deserialize::deserialize(d)?;
            Ok(rows.into_iter().map(|r| r.0).collect())
        }
    }
}
