//! `{re, im}` encoding for complex fields, for use with `#[serde(with)]`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Serialize, Deserialize)]
struct ReIm {
    re: f64,
    im: f64,
}

impl From<Complex64> for ReIm {
    fn from(z: Complex64) -> Self {
        ReIm { re: z.re, im: z.im }
    }
}

impl From<ReIm> for Complex64 {
    fn from(z: ReIm) -> Self {
        Complex64::new(z.re, z.im)
    }
}

pub mod scalar {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        ReIm::from(*z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        ReIm::deserialize(d).map(Complex64::from)
    }
}

pub mod pair {
    use super::*;

    pub fn serialize<S: Serializer>(z: &[Complex64; 2], s: S) -> Result<S::Ok, S::Error> {
        [ReIm::from(z[0]), ReIm::from(z[1])].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[Complex64; 2], D::Error> {
        let [a, b] = <[ReIm; 2]>::deserialize(d)?;
        Ok([a.into(), b.into()])
    }
}

pub mod map {
    use super::*;

    pub fn serialize<S: Serializer>(m: &BTreeMap<String, Complex64>, s: S) -> Result<S::Ok, S::Error> {
        let out: BTreeMap<&String, ReIm> = m.iter().map(|(k, v)| (k, ReIm::from(*v))).collect();
        out.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, Complex64>, D::Error> {
        let raw = BTreeMap::<String, ReIm>::deserialize(d)?;
        Ok(raw.into_iter().map(|(k, v)| (k, v.into())).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug, PartialEq, Serialize, Deserialize)]
    struct Probe {
        #[serde(with = "scalar")]
        z: Complex64,
        #[serde(with = "pair")]
        w: [Complex64; 2],
        #[serde(with = "map")]
        m: BTreeMap<String, Complex64>,
    }

    #[test]
    fn round_trip() {
        let p = Probe {
            z: Complex64::new(1.5, -0.25),
            w: [Complex64::new(0.0, 1.0), Complex64::new(-3.0, 1e-300)],
            m: [("d_1".to_string(), Complex64::new(2.0, 0.0))].into_iter().collect(),
        };
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains(r#""z":{"re":1.5,"im":-0.25}"#), "{s}");
        assert_eq!(serde_json::from_str::<Probe>(&s).unwrap(), p);
    }
}
