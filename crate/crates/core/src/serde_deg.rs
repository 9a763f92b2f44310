//! Serde adapters that keep angles in radians in memory and degrees on disk.

use serde::{Deserialize, Deserializer, Serializer};

pub fn serialize<S: Serializer>(rad: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(degrees(*rad))
}

/// Degrees with conversion noise removed, so that 15° prints as 15.
pub fn degrees(rad: f64) -> f64 {
    let d = rad.to_degrees();
    let snapped = (d * 1e9).round() / 1e9;
    if (d - snapped).abs() <= 1e-12 * d.abs().max(1.0) {
        snapped
    } else {
        d
    }
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    f64::deserialize(d).map(f64::to_radians)
}

pub mod vec {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(rad: &[f64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(rad.iter().map(|r| super::degrees(*r)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<f64>::deserialize(d).map(|v| v.into_iter().map(f64::to_radians).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::degrees;

    #[test]
    fn snaps_conversion_noise_only() {
        assert_eq!(degrees(15f64.to_radians()), 15.0);
        assert_eq!(degrees(-112.5f64.to_radians()), -112.5);
        assert_eq!(
            degrees(0.1234567891234f64.to_radians()),
            0.1234567891234f64.to_radians().to_degrees()
        );
        for d in [15.0f64, 22.5, 112.5, 0.2, -5.0, 359.9] {
            assert_eq!(degrees(d.to_radians()).to_radians(), f64::to_radians(d));
        }
    }
}
