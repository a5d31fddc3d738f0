//! System parameters and their JSON file representation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A positive rational path-loss exponent p/q in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RationalExponent {
    p: u32,
    q: u32,
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl RationalExponent {
    pub fn new(p: u32, q: u32) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::config(
                "alpha2",
                format!("{p}/{q} must have positive numerator and denominator"),
            ));
        }
        let g = gcd(p, q);
        Ok(RationalExponent { p: p / g, q: q / g })
    }

    pub fn integer(p: u32) -> Result<Self> {
        Self::new(p, 1)
    }

    /// Best rational approximation with denominator ≤ 1000, accepted only if
    /// it reproduces `x` to 1e-9 relative.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::config("alpha2", format!("{x} is not a positive finite number")));
        }
        // continued-fraction convergents
        let (mut h0, mut h1) = (0u64, 1u64);
        let (mut k0, mut k1) = (1u64, 0u64);
        let mut r = x;
        for _ in 0..40 {
            let a = r.floor();
            if a > 1e9 {
                break;
            }
            let a = a as u64;
            let h2 = a * h1 + h0;
            let k2 = a * k1 + k0;
            if k2 > 1000 || h2 > u32::MAX as u64 {
                break;
            }
            (h0, h1, k0, k1) = (h1, h2, k1, k2);
            if ((h1 as f64 / k1 as f64) - x).abs() <= 1e-9 * x {
                return Self::new(h1 as u32, k1 as u32);
            }
            let frac = r - a as f64;
            if frac < 1e-12 {
                break;
            }
            r = 1.0 / frac;
        }
        Err(Error::config(
            "alpha2",
            format!("{x} is not a rational with denominator <= 1000; give it as \"p/q\""),
        ))
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    /// Number of Meijer-G parameters in the closed-form outage expression.
    pub fn meijer_order(&self) -> usize {
        self.p as usize + 4 * self.q as usize
    }
}

impl fmt::Display for RationalExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q == 1 {
            write!(f, "{}", self.p)
        } else {
            write!(f, "{}/{}", self.p, self.q)
        }
    }
}

impl FromStr for RationalExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((a, b)) = s.split_once('/') {
            let p = a
                .trim()
                .parse::<u32>()
                .map_err(|_| Error::config("alpha2", format!("bad numerator in {s:?}")))?;
            let q = b
                .trim()
                .parse::<u32>()
                .map_err(|_| Error::config("alpha2", format!("bad denominator in {s:?}")))?;
            Self::new(p, q)
        } else {
            let x = s
                .parse::<f64>()
                .map_err(|_| Error::config("alpha2", format!("cannot parse {s:?}")))?;
            Self::from_f64(x)
        }
    }
}

impl Serialize for RationalExponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for RationalExponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(deserializer)? {
            Raw::Num(x) => RationalExponent::from_f64(x),
            Raw::Text(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// Azimuth/elevation pair in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub azimuth: f64,
    pub elevation: f64,
}

impl Direction {
    pub fn from_degrees(azimuth: f64, elevation: f64) -> Self {
        Direction {
            azimuth: azimuth.to_radians(),
            elevation: elevation.to_radians(),
        }
    }

    fn to_degrees(self) -> Self {
        Direction {
            azimuth: self.azimuth.to_degrees(),
            elevation: self.elevation.to_degrees(),
        }
    }

    fn to_radians(self) -> Self {
        Direction::from_degrees(self.azimuth, self.elevation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Angles {
    /// Arrival at the surface from the source.
    pub sr_aoa: Direction,
    /// Departure at the source toward the surface.
    pub sr_aod: Direction,
    /// Departure at the surface toward the legitimate user.
    pub rd_aod: Direction,
    /// Reference departure at the surface toward eavesdroppers.
    pub re_aod: Direction,
}

impl Angles {
    /// Default geometry: the eavesdropper reference direction mirrors the user's
    /// elevation about the broadside so both array-kernel offsets are
    /// δ₁ = 0 and δ₂ = 1.
    pub fn reference() -> Self {
        Angles {
            sr_aoa: Direction::from_degrees(30.0, 60.0),
            sr_aod: Direction::from_degrees(20.0, 70.0),
            rd_aod: Direction::from_degrees(30.0, 60.0),
            re_aod: Direction::from_degrees(30.0, 120.0),
        }
    }
}

/// Physical and geometric parameters, SI units, angles in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub n_ris: usize,
    pub n_tx: usize,
    pub d_sr: f64,
    pub d_rd: f64,
    pub alpha1: f64,
    pub alpha2: RationalExponent,
    pub rician_eps: f64,
    pub beta0: f64,
    pub eve_density: f64,
    pub eve_radius: f64,
    pub p_tx: f64,
    pub noise_d: f64,
    pub noise_e: f64,
    pub spacing_ratio: f64,
    pub angles: Angles,
    /// Target secrecy rate in nats.
    pub c_th: f64,
}

pub const DEFAULT_BETA0: f64 = 1e-3;

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

fn integer_sqrt(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n).then_some(r)
}

impl SystemConfig {
    fn base(n_ris: usize, n_tx: usize, alpha2: RationalExponent, rho_e_db: f64) -> Self {
        let p_tx = 1.0;
        SystemConfig {
            n_ris,
            n_tx,
            d_sr: 30.0,
            d_rd: 40.0,
            alpha1: 2.0,
            alpha2,
            rician_eps: 2.0,
            beta0: DEFAULT_BETA0,
            eve_density: 1e-3,
            eve_radius: 200.0,
            p_tx,
            noise_d: p_tx / db_to_linear(30.0),
            noise_e: p_tx / db_to_linear(rho_e_db),
            spacing_ratio: 0.5,
            angles: Angles::reference(),
            c_th: 0.05,
        }
    }

    /// SOP-vs-transmit-SNR scenario with free-space exponents and a 30 dB
    /// eavesdropper link budget.
    pub fn fig3(n_ris: usize, n_tx: usize) -> Self {
        Self::base(n_ris, n_tx, RationalExponent { p: 2, q: 1 }, 30.0)
    }

    /// High-SNR diversity scenario: N = K = 16, 60 dB eavesdropper budget.
    pub fn fig7(alpha2: RationalExponent) -> Self {
        Self::base(16, 16, alpha2, 60.0)
    }

    pub fn sqrt_n(&self) -> usize {
        integer_sqrt(self.n_ris).expect("validated config")
    }

    pub fn rho_d(&self) -> f64 {
        self.p_tx / self.noise_d
    }

    pub fn rho_e(&self) -> f64 {
        self.p_tx / self.noise_e
    }

    /// Large-scale gain of the source-to-surface link.
    pub fn nu(&self) -> f64 {
        self.beta0 * self.d_sr.powf(-self.alpha1)
    }

    /// Large-scale gain of the surface-to-user link.
    pub fn mu_d(&self) -> f64 {
        self.beta0 * self.d_rd.powf(-self.alpha2.value())
    }

    /// Large-scale gain toward an eavesdropper at planar radius `r`.
    pub fn mu_e(&self, r: f64) -> f64 {
        self.beta0 * r.powf(-self.alpha2.value())
    }

    pub fn phi(&self) -> f64 {
        self.c_th.exp()
    }

    pub fn with_rho_d_db(mut self, db: f64) -> Self {
        self.noise_d = self.p_tx / db_to_linear(db);
        self
    }

    pub fn with_rho_e_db(mut self, db: f64) -> Self {
        self.noise_e = self.p_tx / db_to_linear(db);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_ris == 0 || integer_sqrt(self.n_ris).is_none() {
            return Err(Error::config(
                "n_ris",
                format!("{} is not a positive perfect square", self.n_ris),
            ));
        }
        if self.n_tx == 0 || integer_sqrt(self.n_tx).is_none() {
            return Err(Error::config(
                "n_tx",
                format!("{} is not a positive perfect square", self.n_tx),
            ));
        }
        let positive = [
            ("d_sr", self.d_sr),
            ("d_rd", self.d_rd),
            ("beta0", self.beta0),
            ("eve_radius", self.eve_radius),
            ("p_tx", self.p_tx),
            ("noise_d", self.noise_d),
            ("noise_e", self.noise_e),
            ("spacing_ratio", self.spacing_ratio),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::config(name, format!("{v} must be positive and finite")));
            }
        }
        if !(self.alpha1 >= 2.0) || !self.alpha1.is_finite() {
            return Err(Error::config(
                "alpha1",
                format!("{} must be a finite value >= 2", self.alpha1),
            ));
        }
        for (name, v) in [
            ("rician_eps", self.rician_eps),
            ("eve_density", self.eve_density),
            ("c_th", self.c_th),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::config(name, format!("{v} must be nonnegative and finite")));
            }
        }
        let a = &self.angles;
        for (name, d) in [
            ("sr_aoa", a.sr_aoa),
            ("sr_aod", a.sr_aod),
            ("rd_aod", a.rd_aod),
            ("re_aod", a.re_aod),
        ] {
            if !d.azimuth.is_finite() || !d.elevation.is_finite() {
                return Err(Error::config(&format!("angles.{name}"), "angles must be finite"));
            }
        }
        for (name, v) in [("rho_d", self.rho_d()), ("nu", self.nu()), ("mu_d", self.mu_d())] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::config(
                    name,
                    format!("derived value {v} must be positive and finite"),
                ));
            }
        }
        Ok(())
    }

    /// Names accepted by [`SystemConfig::set_field`].
    pub const SWEEPABLE: [&'static str; 17] = [
        "n_ris",
        "n_tx",
        "d_sr",
        "d_rd",
        "alpha1",
        "alpha2",
        "rician_eps",
        "beta0",
        "eve_density",
        "eve_radius",
        "p_tx",
        "noise_d",
        "noise_e",
        "spacing_ratio",
        "c_th",
        "rho_d_db",
        "rho_e_db",
    ];

    /// Sets a scalar field by name. `rho_d_db` / `rho_e_db` adjust the noise
    /// powers so that the transmit SNR hits the requested value.
    pub fn set_field(&mut self, name: &str, value: f64) -> Result<()> {
        let as_count = |v: f64| -> Result<usize> {
            if v >= 1.0 && v.fract() == 0.0 && v < 1e9 {
                Ok(v as usize)
            } else {
                Err(Error::config(name, format!("{v} is not a positive integer")))
            }
        };
        match name {
            "n_ris" => self.n_ris = as_count(value)?,
            "n_tx" => self.n_tx = as_count(value)?,
            "d_sr" => self.d_sr = value,
            "d_rd" => self.d_rd = value,
            "alpha1" => self.alpha1 = value,
            "alpha2" => self.alpha2 = RationalExponent::from_f64(value)?,
            "rician_eps" => self.rician_eps = value,
            "beta0" => self.beta0 = value,
            "eve_density" => self.eve_density = value,
            "eve_radius" => self.eve_radius = value,
            "p_tx" => self.p_tx = value,
            "noise_d" => self.noise_d = value,
            "noise_e" => self.noise_e = value,
            "spacing_ratio" => self.spacing_ratio = value,
            "c_th" => self.c_th = value,
            "rho_d_db" => self.noise_d = self.p_tx / db_to_linear(value),
            "rho_e_db" => self.noise_e = self.p_tx / db_to_linear(value),
            _ => {
                return Err(Error::config(
                    name,
                    format!("not a sweepable field; expected one of {}", Self::SWEEPABLE.join(", ")),
                ))
            }
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: ConfigFile = serde_json::from_str(s).map_err(|e| Error::config("config", e.to_string()))?;
        file.into_config()
    }

    pub fn to_file(&self) -> ConfigFile {
        ConfigFile::from_config(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnglesDeg {
    pub sr_aoa: Direction,
    pub sr_aod: Direction,
    pub rd_aod: Direction,
    pub re_aod: Direction,
}

/// On-disk configuration: same field names, angles in degrees, and the
/// transmit SNRs optionally given in dB instead of noise powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub n_ris: usize,
    pub n_tx: usize,
    pub d_sr: f64,
    pub d_rd: f64,
    pub alpha1: f64,
    pub alpha2: RationalExponent,
    pub rician_eps: f64,
    #[serde(default = "default_beta0")]
    pub beta0: f64,
    pub eve_density: f64,
    pub eve_radius: f64,
    #[serde(default = "default_p_tx")]
    pub p_tx: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_e: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_d_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_e_db: Option<f64>,
    #[serde(default = "default_spacing")]
    pub spacing_ratio: f64,
    pub angles: AnglesDeg,
    pub c_th: f64,
}

fn default_beta0() -> f64 {
    DEFAULT_BETA0
}
fn default_p_tx() -> f64 {
    1.0
}
fn default_spacing() -> f64 {
    0.5
}

fn pick_noise(field: &str, noise: Option<f64>, rho_db: Option<f64>, p_tx: f64) -> Result<f64> {
    match (noise, rho_db) {
        (Some(n), None) => Ok(n),
        (None, Some(db)) => Ok(p_tx / db_to_linear(db)),
        (Some(_), Some(_)) => Err(Error::config(
            field,
            "give either the noise power or the transmit SNR in dB, not both",
        )),
        (None, None) => Err(Error::config(
            field,
            "missing: give the noise power or the transmit SNR in dB",
        )),
    }
}

impl ConfigFile {
    pub fn into_config(self) -> Result<SystemConfig> {
        let noise_d = pick_noise("noise_d", self.noise_d, self.rho_d_db, self.p_tx)?;
        let noise_e = pick_noise("noise_e", self.noise_e, self.rho_e_db, self.p_tx)?;
        let a = self.angles;
        let cfg = SystemConfig {
            n_ris: self.n_ris,
            n_tx: self.n_tx,
            d_sr: self.d_sr,
            d_rd: self.d_rd,
            alpha1: self.alpha1,
            alpha2: self.alpha2,
            rician_eps: self.rician_eps,
            beta0: self.beta0,
            eve_density: self.eve_density,
            eve_radius: self.eve_radius,
            p_tx: self.p_tx,
            noise_d,
            noise_e,
            spacing_ratio: self.spacing_ratio,
            angles: Angles {
                sr_aoa: a.sr_aoa.to_radians(),
                sr_aod: a.sr_aod.to_radians(),
                rd_aod: a.rd_aod.to_radians(),
                re_aod: a.re_aod.to_radians(),
            },
            c_th: self.c_th,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_config(cfg: &SystemConfig) -> Self {
        let a = cfg.angles;
        ConfigFile {
            n_ris: cfg.n_ris,
            n_tx: cfg.n_tx,
            d_sr: cfg.d_sr,
            d_rd: cfg.d_rd,
            alpha1: cfg.alpha1,
            alpha2: cfg.alpha2,
            rician_eps: cfg.rician_eps,
            beta0: cfg.beta0,
            eve_density: cfg.eve_density,
            eve_radius: cfg.eve_radius,
            p_tx: cfg.p_tx,
            noise_d: Some(cfg.noise_d),
            noise_e: Some(cfg.noise_e),
            rho_d_db: None,
            rho_e_db: None,
            spacing_ratio: cfg.spacing_ratio,
            angles: AnglesDeg {
                sr_aoa: a.sr_aoa.to_degrees(),
                sr_aod: a.sr_aod.to_degrees(),
                rd_aod: a.rd_aod.to_degrees(),
                re_aod: a.re_aod.to_degrees(),
            },
            c_th: cfg.c_th,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_reduction_and_parsing() {
        let r = RationalExponent::new(6, 2).unwrap();
        assert_eq!((r.p(), r.q()), (3, 1));
        assert_eq!(
            "5/2".parse::<RationalExponent>().unwrap(),
            RationalExponent::new(5, 2).unwrap()
        );
        assert_eq!(
            "4".parse::<RationalExponent>().unwrap(),
            RationalExponent::integer(4).unwrap()
        );
        assert_eq!(
            RationalExponent::from_f64(2.5).unwrap(),
            RationalExponent::new(5, 2).unwrap()
        );
        assert_eq!(
            RationalExponent::from_f64(10.0 / 3.0).unwrap(),
            RationalExponent::new(10, 3).unwrap()
        );
        assert!(RationalExponent::from_f64(std::f64::consts::PI).is_err());
        assert!(RationalExponent::new(0, 1).is_err());
        assert_eq!(RationalExponent::new(3, 1).unwrap().meijer_order(), 7);
    }

    #[test]
    fn rational_serde_accepts_number_or_string() {
        let a: RationalExponent = serde_json::from_str("3").unwrap();
        let b: RationalExponent = serde_json::from_str("\"7/2\"").unwrap();
        assert_eq!(a.value(), 3.0);
        assert_eq!(b.value(), 3.5);
        assert_eq!(serde_json::to_string(&b).unwrap(), "\"7/2\"");
    }

    #[test]
    fn builtin_scenarios_validate() {
        for (n, k) in [(16, 4), (64, 16)] {
            let c = SystemConfig::fig3(n, k);
            c.validate().unwrap();
            assert!((linear_to_db(c.rho_e()) - 30.0).abs() < 1e-12);
        }
        let c = SystemConfig::fig7(RationalExponent::integer(4).unwrap());
        c.validate().unwrap();
        assert!((linear_to_db(c.rho_e()) - 60.0).abs() < 1e-12);
        assert_eq!(c.beta0, 1e-3);
    }

    #[test]
    fn validation_names_the_field() {
        let mut c = SystemConfig::fig3(64, 16);
        c.n_ris = 15;
        match c.validate() {
            Err(Error::Config { field, reason }) => {
                assert_eq!(field, "n_ris");
                assert!(reason.contains("perfect square"));
            }
            other => panic!("{other:?}"),
        }
        let mut c = SystemConfig::fig3(64, 16);
        c.eve_radius = -1.0;
        assert!(matches!(c.validate(), Err(Error::Config { field, .. }) if field == "eve_radius"));
    }

    #[test]
    fn file_roundtrip_and_db_inputs() {
        let c = SystemConfig::fig3(64, 16).with_rho_d_db(40.0);
        let text = serde_json::to_string(&c.to_file()).unwrap();
        let back = SystemConfig::from_json_str(&text).unwrap();
        assert_eq!(back.n_ris, 64);
        assert!((back.angles.re_aod.elevation - c.angles.re_aod.elevation).abs() < 1e-15);
        assert!((back.rho_d() / c.rho_d() - 1.0).abs() < 1e-12);

        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let obj = v.as_object_mut().unwrap();
        obj.remove("noise_d");
        obj.insert("rho_d_db".into(), 20.0.into());
        let c2 = SystemConfig::from_json_str(&v.to_string()).unwrap();
        assert!((linear_to_db(c2.rho_d()) - 20.0).abs() < 1e-12);

        v.as_object_mut().unwrap().insert("noise_d".into(), 1.0.into());
        assert!(SystemConfig::from_json_str(&v.to_string()).is_err());
    }

    #[test]
    fn set_field_by_name() {
        let mut c = SystemConfig::fig3(64, 16);
        c.set_field("rho_d_db", 50.0).unwrap();
        assert!((linear_to_db(c.rho_d()) - 50.0).abs() < 1e-12);
        c.set_field("alpha2", 4.0).unwrap();
        assert_eq!(c.alpha2.p(), 4);
        assert!(c.set_field("n_ris", 15.5).is_err());
        assert!(c.set_field("no_such_field", 1.0).is_err());
    }
}
