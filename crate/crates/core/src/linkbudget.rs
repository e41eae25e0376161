//! Physical link budget and the normalized channel model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Physical description of the two-hop scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkScenario {
    /// Source-relay distance, meters.
    pub d_sr: f64,
    /// Relay-destination distance, meters.
    pub d_rd: f64,
    /// Carrier frequency, hertz.
    pub f_c: f64,
    /// Path-loss exponent.
    pub gamma: f64,
    /// Bandwidth, hertz.
    pub bandwidth: f64,
    /// Noise power spectral density, dBm/Hz, at both receivers.
    pub noise_psd_dbm_hz: f64,
    /// Relay-side override of `noise_psd_dbm_hz`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_psd_relay_dbm_hz: Option<f64>,
    /// Destination-side override of `noise_psd_dbm_hz`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_psd_dest_dbm_hz: Option<f64>,
    pub p_s_dbm: f64,
    pub p_r_dbm: f64,
    /// Self-interference suppression `1/alpha_hat` in dB; `+inf` is ideal full duplex.
    #[serde(with = "suppression_db")]
    pub si_suppression_db: f64,
}

impl LinkScenario {
    /// 2.4 GHz carrier, exponent 3, 200 kHz, -170 dBm/Hz, 500 m hops,
    /// 25 dBm at both nodes, 130 dB suppression.
    pub fn reference() -> Self {
        Self {
            d_sr: 500.0,
            d_rd: 500.0,
            f_c: 2.4e9,
            gamma: 3.0,
            bandwidth: 200e3,
            noise_psd_dbm_hz: -170.0,
            noise_psd_relay_dbm_hz: None,
            noise_psd_dest_dbm_hz: None,
            p_s_dbm: 25.0,
            p_r_dbm: 25.0,
            si_suppression_db: 130.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("d_sr", self.d_sr),
            ("d_rd", self.d_rd),
            ("f_c", self.f_c),
            ("bandwidth", self.bandwidth),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if !(self.gamma >= 2.0 && self.gamma.is_finite()) {
            return Err(Error::Config(format!(
                "gamma must be at least 2, got {}",
                self.gamma
            )));
        }
        let finite = [
            ("noise_psd_dbm_hz", Some(self.noise_psd_dbm_hz)),
            ("noise_psd_relay_dbm_hz", self.noise_psd_relay_dbm_hz),
            ("noise_psd_dest_dbm_hz", self.noise_psd_dest_dbm_hz),
            ("p_s_dbm", Some(self.p_s_dbm)),
            ("p_r_dbm", Some(self.p_r_dbm)),
        ];
        for (name, v) in finite {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(Error::Config(format!("{name} must be finite, got {v}")));
                }
            }
        }
        if self.si_suppression_db.is_nan() || self.si_suppression_db == f64::NEG_INFINITY {
            return Err(Error::Config(format!(
                "si_suppression_db must be finite or +inf, got {}",
                self.si_suppression_db
            )));
        }
        Ok(())
    }

    /// Total noise power at the relay, watts.
    pub fn relay_noise_w(&self) -> f64 {
        dbm_to_watts(self.noise_psd_relay_dbm_hz.unwrap_or(self.noise_psd_dbm_hz)) * self.bandwidth
    }

    /// Total noise power at the destination, watts.
    pub fn dest_noise_w(&self) -> f64 {
        dbm_to_watts(self.noise_psd_dest_dbm_hz.unwrap_or(self.noise_psd_dbm_hz)) * self.bandwidth
    }
}

/// Serializes infinite suppression as the string `"inf"` so that JSON, which
/// has no infinity literal, can carry the ideal case.
mod suppression_db {
    use serde::de::{self, Deserializer, Visitor};
    use serde::Serializer;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    struct DbVisitor;

    impl Visitor<'_> for DbVisitor {
        type Value = f64;

        fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
            f.write_str("a number of dB or \"inf\"")
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            match v.trim().to_ascii_lowercase().as_str() {
                "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
                other => other
                    .parse()
                    .map_err(|_| E::custom(format!("invalid suppression {v:?}"))),
            }
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        d.deserialize_any(DbVisitor)
    }
}

/// Channel after folding the link gains into the noise and interference terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct NormalizedChannel<T: Real> {
    /// Source average power, watts.
    pub p_s: T,
    /// Relay average power, watts.
    pub p_r: T,
    /// Relay noise divided by the source-relay gain.
    pub sigma_r_sq: T,
    /// Destination noise divided by the relay-destination gain.
    pub sigma_d_sq: T,
    /// Residual self-interference amplification divided by the source-relay gain.
    pub alpha: T,
}

impl<T: Real> NormalizedChannel<T> {
    pub fn new(p_s: T, p_r: T, sigma_r_sq: T, sigma_d_sq: T, alpha: T) -> Result<Self> {
        let ch = Self {
            p_s,
            p_r,
            sigma_r_sq,
            sigma_d_sq,
            alpha,
        };
        ch.validate()?;
        Ok(ch)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [("p_s", self.p_s), ("p_r", self.p_r), ("alpha", self.alpha)];
        for (name, v) in fields {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::domain(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        for (name, v) in [
            ("sigma_r_sq", self.sigma_r_sq),
            ("sigma_d_sq", self.sigma_d_sq),
        ] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::domain(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn with_alpha(self, alpha: T) -> Self {
        Self { alpha, ..self }
    }

    /// Converts to another precision.
    pub fn cast<U: Real>(&self) -> NormalizedChannel<U> {
        let c = |v: T| U::lit(v.to_f64_lossy());
        NormalizedChannel {
            p_s: c(self.p_s),
            p_r: c(self.p_r),
            sigma_r_sq: c(self.sigma_r_sq),
            sigma_d_sq: c(self.sigma_d_sq),
            alpha: c(self.alpha),
        }
    }
}

/// Free-space style path gain `(c / (4 pi f_c))^2 d^-gamma`.
pub fn path_loss_gain(f_c: f64, d: f64, gamma: f64) -> Result<f64> {
    if !(f_c > 0.0) || !(d > 0.0) || !gamma.is_finite() {
        return Err(Error::domain(format!(
            "path loss needs positive frequency and distance (f_c = {f_c}, d = {d}, gamma = {gamma})"
        )));
    }
    let k = SPEED_OF_LIGHT / (4.0 * std::f64::consts::PI * f_c);
    Ok(k * k * d.powf(-gamma))
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * (w / 1e-3).log10()
}

/// Maps a physical scenario onto the normalized channel.
pub fn normalize_scenario<T: Real>(s: &LinkScenario) -> Result<NormalizedChannel<T>> {
    s.validate()?;
    let h_sr = path_loss_gain(s.f_c, s.d_sr, s.gamma)?;
    let h_rd = path_loss_gain(s.f_c, s.d_rd, s.gamma)?;
    let alpha_hat = if s.si_suppression_db == f64::INFINITY {
        0.0
    } else {
        10f64.powf(-s.si_suppression_db / 10.0)
    };
    NormalizedChannel::new(
        T::lit(dbm_to_watts(s.p_s_dbm)),
        T::lit(dbm_to_watts(s.p_r_dbm)),
        T::lit(s.relay_noise_w() / h_sr),
        T::lit(s.dest_noise_w() / h_rd),
        T::lit(alpha_hat / h_sr),
    )
}

/// Bits per real symbol to bits per second, with `2 * bandwidth` real
/// symbols per second.
pub fn rate_to_bps<T: Real>(c: T, bandwidth: T) -> T {
    T::lit(2.0) * bandwidth * c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn path_gain_reference_values() {
        // Evaluated with 30-digit arithmetic.
        assert!(
            rel(
                path_loss_gain(2.4e9, 1.0, 3.0).unwrap(),
                9.880_961_210_318_49e-5
            ) < 1e-13
        );
        assert!(
            rel(
                path_loss_gain(2.4e9, 300.0, 3.0).unwrap(),
                3.659_615_263_080_92e-12
            ) < 1e-13
        );
        assert!(
            rel(
                path_loss_gain(2.4e9, 500.0, 3.0).unwrap(),
                7.904_768_968_254_79e-13
            ) < 1e-13
        );
    }

    #[test]
    fn path_gain_rejects_bad_input() {
        assert!(path_loss_gain(0.0, 1.0, 3.0).is_err());
        assert!(path_loss_gain(1e9, -1.0, 3.0).is_err());
    }

    #[test]
    fn reference_noise_and_alpha() {
        let s = LinkScenario::reference();
        assert!(rel(s.relay_noise_w(), 2e-15) < 1e-12);
        let ch: NormalizedChannel<f64> = normalize_scenario(&s).unwrap();
        assert!(rel(ch.alpha, 0.126_505_911_053_942) < 1e-12);
        assert!(rel(ch.p_s, 10f64.powf(2.5) * 1e-3) < 1e-15);
    }

    #[test]
    fn ideal_full_duplex_has_zero_alpha() {
        let s = LinkScenario {
            si_suppression_db: f64::INFINITY,
            ..LinkScenario::reference()
        };
        let ch: NormalizedChannel<f64> = normalize_scenario(&s).unwrap();
        assert_eq!(ch.alpha, 0.0);
    }

    #[test]
    fn rate_conversion() {
        assert_eq!(rate_to_bps(0.0, 200e3), 0.0);
        assert_eq!(rate_to_bps(1.0, 200e3), 400e3);
    }

    #[test]
    fn destination_ceiling_near_1_84_mbps() {
        let s = LinkScenario {
            d_rd: 300.0,
            ..LinkScenario::reference()
        };
        let snr = dbm_to_watts(s.p_r_dbm) * path_loss_gain(s.f_c, s.d_rd, s.gamma).unwrap()
            / s.dest_noise_w();
        let bps = rate_to_bps(crate::scalar::awgn_capacity(snr), s.bandwidth);
        assert!((bps / 1e6 - 1.84).abs() < 0.02, "{bps}");
    }

    #[test]
    fn suppression_accepts_inf_string() {
        let mut v = serde_json::to_value(LinkScenario::reference()).unwrap();
        v["si_suppression_db"] = serde_json::json!("inf");
        let s: LinkScenario = serde_json::from_value(v).unwrap();
        assert_eq!(s.si_suppression_db, f64::INFINITY);
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains(r#""si_suppression_db":"inf""#));
        let t: LinkScenario =
            toml::from_str(&toml::to_string(&LinkScenario::reference()).unwrap()).unwrap();
        assert_eq!(t, LinkScenario::reference());
    }

    #[test]
    fn override_noise_per_node() {
        let s = LinkScenario {
            noise_psd_dest_dbm_hz: Some(-160.0),
            ..LinkScenario::reference()
        };
        assert!(rel(s.dest_noise_w(), 2e-14) < 1e-12);
        assert!(rel(s.relay_noise_w(), 2e-15) < 1e-12);
    }
}
