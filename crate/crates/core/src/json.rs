//! Decimal-string numbers for the JSON interfaces.

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Result;
use crate::numeric::Scalar;

/// A number carried as text so rational values survive serialization.
/// Deserializes from either a JSON string or a JSON number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NumText(pub String);

impl NumText {
    pub fn of<S: Scalar>(v: &S) -> Self {
        NumText(v.to_decimal())
    }

    pub fn value<S: Scalar>(&self) -> Result<S> {
        S::parse(&self.0)
    }
}

impl Serialize for NumText {
    fn serialize<Z: Serializer>(&self, serializer: Z) -> std::result::Result<Z::Ok, Z::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for NumText {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct NumVisitor;

        impl Visitor<'_> for NumVisitor {
            type Value = NumText;

            fn expecting(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str("a number or a decimal string")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<NumText, E> {
                Ok(NumText(v.to_string()))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<NumText, E> {
                Ok(NumText(v.to_string()))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<NumText, E> {
                Ok(NumText(v.to_string()))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<NumText, E> {
                Ok(NumText(format!("{v:?}")))
            }
        }

        deserializer.deserialize_any(NumVisitor)
    }
}
