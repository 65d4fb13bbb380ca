//! Synthetic weather/galloping data whose labels follow the Den Hartog
//! instability criterion `dC_L/da + C_D < 0`.
//!
//! Features for each class are drawn from per-feature truncated normals.
//! A candidate row is kept for the galloping class only if the criterion
//! fires on it, and for the normal class only if it does not, so clean labels
//! always agree with the criterion while the class sizes hit the requested
//! fraction exactly. Symmetric label noise is applied afterwards.
//!
//! The angle of attack never enters directly: its effect is folded into the
//! wet-snow/ice proxy (precipitation near freezing plus accreted ice).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::{Dataset, FeatureId, Label, WeatherSample, NUM_FEATURES};
use crate::error::{Error, Result};

/// Rejection rounds allowed per class before the config is declared infeasible.
const MAX_ROUNDS: usize = 100;

/// Draws allowed per truncated-normal value.
const MAX_TRUNCATION_TRIES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AeroCoefficients {
    pub lift_slope: f64,
    pub drag: f64,
}

impl AeroCoefficients {
    pub fn new(lift_slope: f64, drag: f64) -> Result<Self> {
        if !lift_slope.is_finite() || !drag.is_finite() || drag < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "invalid aerodynamic coefficients ({lift_slope}, {drag})"
            )));
        }
        Ok(Self { lift_slope, drag })
    }
}

/// Constants of the weather-to-aerodynamics map:
///
/// ```text
/// lift_slope = a0 - a1 * precipitation * exp(-(temperature / t0)^2) - a2 * ice_thickness
/// drag       = b0 + b1 * wind_speed^2
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AeroParams {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub t0: f64,
    pub b0: f64,
    pub b1: f64,
}

impl Default for AeroParams {
    fn default() -> Self {
        Self {
            a0: 0.3,
            a1: 1.0,
            a2: 0.0,
            t0: 4.0,
            b0: 0.2,
            b1: 0.04,
        }
    }
}

impl AeroParams {
    fn validate(&self) -> Result<()> {
        let all = [self.a0, self.a1, self.a2, self.t0, self.b0, self.b1];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite aerodynamic constant".into()));
        }
        if self.a1 < 0.0 || self.a2 < 0.0 || self.b0 < 0.0 || self.b1 < 0.0 || self.t0 <= 0.0 {
            return Err(Error::InvalidParameter(
                "a1, a2, b0, b1 must be >= 0 and t0 > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Normal(loc, scale) restricted to `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedNormal {
    pub loc: f64,
    pub scale: f64,
    pub lower: f64,
    pub upper: f64,
}

impl TruncatedNormal {
    pub const fn new(loc: f64, scale: f64, lower: f64, upper: f64) -> Self {
        Self {
            loc,
            scale,
            lower,
            upper,
        }
    }

    fn validate(&self, what: &str) -> Result<()> {
        let ok = [self.loc, self.scale, self.lower, self.upper]
            .iter()
            .all(|v| v.is_finite())
            && self.scale > 0.0
            && self.lower < self.upper;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("bad distribution for {what}: {self:?}")))
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> Result<f64> {
        let normal = Normal::new(self.loc, self.scale)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        for _ in 0..MAX_TRUNCATION_TRIES {
            let v = normal.sample(rng);
            if (self.lower..=self.upper).contains(&v) {
                return Ok(v);
            }
        }
        Err(Error::Infeasible(format!(
            "truncation interval [{}, {}] has negligible mass under N({}, {})",
            self.lower, self.upper, self.loc, self.scale
        )))
    }
}

/// Per-class feature distributions, indexed by feature ordinal.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassDistributions {
    pub galloping: [TruncatedNormal; NUM_FEATURES],
    pub normal: [TruncatedNormal; NUM_FEATURES],
}

impl Default for ClassDistributions {
    fn default() -> Self {
        const T: fn(f64, f64, f64, f64) -> TruncatedNormal = TruncatedNormal::new;
        Self {
            galloping: [
                T(9.0, 3.0, 0.0, 30.0),
                T(80.0, 12.0, 0.0, 100.0),
                T(0.0, 2.5, -30.0, 40.0),
                T(8.0, 3.0, 0.0, 30.0),
                T(1.5, 2.0, 0.0, 20.0),
                T(0.8, 1.5, -6.0, 6.0),
                T(0.45, 0.35, 0.0, 3.0),
            ],
            normal: [
                T(4.0, 3.0, 0.0, 30.0),
                T(74.0, 15.0, 0.0, 100.0),
                T(-1.0, 9.0, -30.0, 40.0),
                T(1.0, 2.0, 0.0, 30.0),
                T(1.0, 1.8, 0.0, 20.0),
                T(0.5, 1.5, -6.0, 6.0),
                T(0.35, 0.3, 0.0, 3.0),
            ],
        }
    }
}

impl ClassDistributions {
    pub fn for_label(&self, label: Label) -> &[TruncatedNormal; NUM_FEATURES] {
        match label {
            Label::Galloping => &self.galloping,
            Label::Normal => &self.normal,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_total: usize,
    pub galloping_fraction: f64,
    pub label_noise: f64,
    pub seed: u64,
    pub aero: AeroParams,
    pub distributions: ClassDistributions,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_total: 10_000,
            galloping_fraction: Self::DEFAULT_GALLOPING_FRACTION,
            label_noise: Self::DEFAULT_LABEL_NOISE,
            seed: 0,
            aero: AeroParams::default(),
            distributions: ClassDistributions::default(),
        }
    }
}

impl SynthConfig {
    /// 25,414 galloping records out of 80,596.
    pub const DEFAULT_GALLOPING_FRACTION: f64 = 0.315;
    pub const DEFAULT_LABEL_NOISE: f64 = 0.02;

    pub fn new(n_total: usize, seed: u64) -> Self {
        Self {
            n_total,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_total == 0 {
            return Err(Error::InvalidParameter("n_total must be positive".into()));
        }
        if !(self.galloping_fraction > 0.0 && self.galloping_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "galloping fraction {} outside (0, 1)",
                self.galloping_fraction
            )));
        }
        if !(0.0..0.5).contains(&self.label_noise) {
            return Err(Error::InvalidParameter(format!(
                "label noise {} outside [0, 0.5)",
                self.label_noise
            )));
        }
        self.aero.validate()?;
        for f in FeatureId::ALL {
            self.distributions.galloping[f.ordinal()].validate(f.name())?;
            self.distributions.normal[f.ordinal()].validate(f.name())?;
        }
        Ok(())
    }

    /// Reads a flat `key = value` file. Missing keys keep their defaults;
    /// unknown keys are an error. Distribution keys take four numbers:
    /// `galloping.temperature = loc scale lower upper`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|(line, message)| Error::Parse {
            path: path.to_path_buf(),
            row: line,
            column: 1,
            message,
        })
    }

    fn parse(text: &str) -> std::result::Result<Self, (usize, String)> {
        let mut cfg = Self::default();
        let mut seen = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or((n, format!("expected `key = value`, found `{line}`")))?;
            if seen.insert(key.to_string(), n).is_some() {
                return Err((n, format!("duplicate key `{key}`")));
            }
            cfg.set(key, value).map_err(|m| (n, m))?;
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let num = |v: &str| -> std::result::Result<f64, String> {
            v.parse::<f64>().map_err(|_| format!("`{key}`: bad number `{v}`"))
        };
        match key {
            "n_total" => self.n_total = value.parse().map_err(|_| format!("bad n_total `{value}`"))?,
            "seed" => self.seed = value.parse().map_err(|_| format!("bad seed `{value}`"))?,
            "galloping_fraction" => self.galloping_fraction = num(value)?,
            "label_noise" => self.label_noise = num(value)?,
            "a0" => self.aero.a0 = num(value)?,
            "a1" => self.aero.a1 = num(value)?,
            "a2" => self.aero.a2 = num(value)?,
            "t0" => self.aero.t0 = num(value)?,
            "b0" => self.aero.b0 = num(value)?,
            "b1" => self.aero.b1 = num(value)?,
            _ => {
                let (class, feature) = key
                    .split_once('.')
                    .ok_or_else(|| format!("unknown key `{key}`"))?;
                let feature = FeatureId::from_name(feature)
                    .ok_or_else(|| format!("unknown feature in `{key}`"))?;
                let table = match class {
                    "galloping" => &mut self.distributions.galloping,
                    "normal" => &mut self.distributions.normal,
                    _ => return Err(format!("unknown key `{key}`")),
                };
                let v = value
                    .split_whitespace()
                    .map(num)
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                let [loc, scale, lower, upper] = v[..] else {
                    return Err(format!("`{key}` needs `loc scale lower upper`"));
                };
                table[feature.ordinal()] = TruncatedNormal::new(loc, scale, lower, upper);
            }
        }
        Ok(())
    }

    /// Text form accepted by [`SynthConfig::load`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n_total = {}", self.n_total);
        let _ = writeln!(s, "galloping_fraction = {:?}", self.galloping_fraction);
        let _ = writeln!(s, "label_noise = {:?}", self.label_noise);
        let _ = writeln!(s, "seed = {}", self.seed);
        let a = &self.aero;
        for (k, v) in [("a0", a.a0), ("a1", a.a1), ("a2", a.a2), ("t0", a.t0), ("b0", a.b0), ("b1", a.b1)] {
            let _ = writeln!(s, "{k} = {v:?}");
        }
        let _ = writeln!(s, "# loc scale lower upper");
        for (class, table) in [
            ("galloping", &self.distributions.galloping),
            ("normal", &self.distributions.normal),
        ] {
            for f in FeatureId::ALL {
                let d = table[f.ordinal()];
                let _ = writeln!(
                    s,
                    "{class}.{} = {:?} {:?} {:?} {:?}",
                    f.name(),
                    d.loc,
                    d.scale,
                    d.lower,
                    d.upper
                );
            }
        }
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// Strict inequality: a slope exactly cancelling drag is stable.
pub fn den_hartog_trigger(coeff: AeroCoefficients) -> bool {
    coeff.lift_slope + coeff.drag < 0.0
}

pub fn aero_from_weather(sample: &WeatherSample, params: &AeroParams) -> AeroCoefficients {
    aero_from_features(&sample.features, params)
}

fn aero_from_features(x: &[f64; NUM_FEATURES], p: &AeroParams) -> AeroCoefficients {
    let wind = x[FeatureId::WindSpeed.ordinal()];
    let temp = x[FeatureId::Temperature.ordinal()];
    let precip = x[FeatureId::Precipitation.ordinal()];
    let ice = x[FeatureId::IceThickness.ordinal()];
    let lift_slope = p.a0 - p.a1 * precip * (-(temp / p.t0).powi(2)).exp() - p.a2 * ice;
    let drag = p.b0 + p.b1 * wind * wind;
    AeroCoefficients { lift_slope, drag }
}

/// Den Hartog label of a feature vector, before any noise.
pub fn clean_label(sample: &WeatherSample, params: &AeroParams) -> Label {
    if den_hartog_trigger(aero_from_weather(sample, params)) {
        Label::Galloping
    } else {
        Label::Normal
    }
}

fn draw_class<R: Rng>(
    config: &SynthConfig,
    label: Label,
    count: usize,
    rng: &mut R,
) -> Result<Vec<[f64; NUM_FEATURES]>> {
    let dists = config.distributions.for_label(label);
    let want = label == Label::Galloping;
    let mut kept = Vec::with_capacity(count);
    let (mut drawn, mut accepted) = (0usize, 0usize);
    for _ in 0..MAX_ROUNDS {
        let need = count - kept.len();
        if need == 0 {
            break;
        }
        // batch size from the running acceptance estimate
        let rate = (accepted + 1) as f64 / (drawn + 1) as f64;
        let batch = ((need as f64 / rate).ceil() as usize).clamp(need, need.max(1) * 1000);
        for _ in 0..batch {
            let mut x = [0.0; NUM_FEATURES];
            for (v, d) in x.iter_mut().zip(dists) {
                *v = d.sample(rng)?;
            }
            drawn += 1;
            if den_hartog_trigger(aero_from_features(&x, &config.aero)) == want {
                accepted += 1;
                if kept.len() < count {
                    kept.push(x);
                }
            }
        }
    }
    if kept.len() < count {
        return Err(Error::Infeasible(format!(
            "{label} class: {} of {count} samples after {MAX_ROUNDS} rounds ({accepted} of {drawn} candidates accepted)",
            kept.len()
        )));
    }
    Ok(kept)
}

/// Generates `n_total` samples, `round(n_total * galloping_fraction)` of them
/// galloping before label noise, in shuffled order.
pub fn generate(config: &SynthConfig) -> Result<Dataset> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n_gal = (config.n_total as f64 * config.galloping_fraction).round() as usize;
    let gal = draw_class(config, Label::Galloping, n_gal, &mut rng)?;
    let nor = draw_class(config, Label::Normal, config.n_total - n_gal, &mut rng)?;

    let mut rows: Vec<([f64; NUM_FEATURES], Label)> = gal
        .into_iter()
        .map(|x| (x, Label::Galloping))
        .chain(nor.into_iter().map(|x| (x, Label::Normal)))
        .collect();
    for (_, label) in rows.iter_mut() {
        if rng.random::<f64>() < config.label_noise {
            *label = label.flipped();
        }
    }
    rows.shuffle(&mut rng);
    Ok(Dataset::from_samples(
        rows.into_iter()
            .map(|(features, label)| WeatherSample { features, label }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weather(wind: f64, temp: f64, precip: f64) -> WeatherSample {
        WeatherSample::new([wind, 80.0, temp, precip, 0.0, 0.0, 0.3], Label::Normal).unwrap()
    }

    #[test]
    fn trigger_sign() {
        assert!(den_hartog_trigger(AeroCoefficients::new(-2.0, 1.0).unwrap()));
        assert!(!den_hartog_trigger(AeroCoefficients::new(0.0, 0.0).unwrap()));
        assert!(!den_hartog_trigger(AeroCoefficients::new(-0.5, 1.0).unwrap()));
        assert!(AeroCoefficients::new(0.0, -0.1).is_err());
    }

    #[test]
    fn aero_monotonicity() {
        let p = AeroParams::default();
        for wind in [0.0, 5.0, 20.0] {
            let c = aero_from_weather(&weather(wind, 25.0, 0.0), &p);
            assert!(c.lift_slope >= 0.0);
            assert!(!den_hartog_trigger(c));
        }
        let dry = aero_from_weather(&weather(5.0, 0.0, 0.0), &p);
        let wet = aero_from_weather(&weather(5.0, 0.0, 5.0), &p);
        assert!(wet.lift_slope < dry.lift_slope);
        let calm = aero_from_weather(&weather(0.0, 0.0, 3.0), &p);
        let windy = aero_from_weather(&weather(10.0, 0.0, 3.0), &p);
        assert!(windy.drag > calm.drag);
        let warm = aero_from_weather(&weather(5.0, 6.0, 5.0), &p);
        assert!(warm.lift_slope > wet.lift_slope);
    }

    #[test]
    fn class_sizes_and_clean_labels() {
        let cfg = SynthConfig {
            label_noise: 0.0,
            ..SynthConfig::new(2_000, 3)
        };
        let ds = generate(&cfg).unwrap();
        assert_eq!(ds.len(), 2_000);
        assert_eq!(ds.class_count(Label::Galloping), 630);
        for i in 0..ds.len() {
            let s = ds.sample(i).unwrap();
            assert_eq!(clean_label(&s, &cfg.aero), s.label);
        }
    }

    #[test]
    fn deterministic() {
        let cfg = SynthConfig::new(500, 11);
        assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
        let other = SynthConfig::new(500, 12);
        assert_ne!(generate(&cfg).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn infeasible_config() {
        let mut cfg = SynthConfig::new(100, 0);
        // galloping class can never be wet near freezing
        cfg.distributions.galloping[FeatureId::Temperature.ordinal()] =
            TruncatedNormal::new(30.0, 1.0, 25.0, 40.0);
        assert!(matches!(generate(&cfg), Err(Error::Infeasible(_))));
    }

    #[test]
    fn invalid_config() {
        let mut cfg = SynthConfig::new(100, 0);
        cfg.label_noise = 0.5;
        assert!(generate(&cfg).is_err());
        cfg.label_noise = 0.0;
        cfg.galloping_fraction = 1.0;
        assert!(generate(&cfg).is_err());
    }

    #[test]
    fn config_text_round_trip() {
        let mut cfg = SynthConfig::new(1234, 99);
        cfg.aero.a2 = 0.125;
        cfg.distributions.normal[2] = TruncatedNormal::new(-3.5, 7.0, -30.0, 35.0);
        assert_eq!(SynthConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn config_errors() {
        assert!(SynthConfig::parse("n_total = 10\nbogus = 1").is_err());
        assert_eq!(SynthConfig::parse("a0 = 1\n\na0 = 2").unwrap_err().0, 3);
        assert!(SynthConfig::parse("galloping.humidity = 1 2 3").is_err());
        let cfg = SynthConfig::parse("# comment\nlabel_noise = 0.1 # trailing\n").unwrap();
        assert_eq!(cfg.label_noise, 0.1);
    }
}
