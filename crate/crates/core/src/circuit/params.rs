use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::checkpoint::{self, NamedValues};
use crate::error::{Error, Result};

pub const PARAMS_PER_LAYER: usize = 14;

/// Where the observation displacements go.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EncodingVariant {
    /// Encode once after the initial squeezing.
    SingleEncode,
    /// Encode again in front of every layer.
    Reupload,
}

impl fmt::Display for EncodingVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EncodingVariant::SingleEncode => "single",
            EncodingVariant::Reupload => "reupload",
        })
    }
}

impl FromStr for EncodingVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" | "single-encode" => Ok(EncodingVariant::SingleEncode),
            "reupload" => Ok(EncodingVariant::Reupload),
            other => Err(Error::Parse(format!("unknown encoding variant {other:?}"))),
        }
    }
}

/// Trainable parameters of one layer. Per-mode arrays are indexed by mode.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LayerParams {
    pub bs1_theta: f64,
    pub bs1_phi: f64,
    pub disp: [f64; 2],
    pub rot1: [f64; 2],
    pub bs2_theta: f64,
    pub bs2_phi: f64,
    pub squeeze: [f64; 2],
    pub rot2: [f64; 2],
    pub kerr: [f64; 2],
}

/// `(gate, slot)` names in flat order.
const SLOT_NAMES: [(&str, &str); PARAMS_PER_LAYER] = [
    ("bs1", "theta"),
    ("bs1", "phi"),
    ("disp", "0"),
    ("disp", "1"),
    ("rot1", "0"),
    ("rot1", "1"),
    ("bs2", "theta"),
    ("bs2", "phi"),
    ("squeeze", "0"),
    ("squeeze", "1"),
    ("rot2", "0"),
    ("rot2", "1"),
    ("kerr", "0"),
    ("kerr", "1"),
];

/// Flat offsets of the in-layer displacement and squeezing magnitudes.
pub(crate) const ACTIVE_SLOTS: [usize; 4] = [2, 3, 8, 9];

impl LayerParams {
    pub fn to_flat(&self) -> [f64; PARAMS_PER_LAYER] {
        [
            self.bs1_theta,
            self.bs1_phi,
            self.disp[0],
            self.disp[1],
            self.rot1[0],
            self.rot1[1],
            self.bs2_theta,
            self.bs2_phi,
            self.squeeze[0],
            self.squeeze[1],
            self.rot2[0],
            self.rot2[1],
            self.kerr[0],
            self.kerr[1],
        ]
    }

    pub fn from_flat(v: &[f64]) -> Result<Self> {
        if v.len() != PARAMS_PER_LAYER {
            return Err(Error::Shape(format!(
                "a layer has {PARAMS_PER_LAYER} parameters, got {}",
                v.len()
            )));
        }
        Ok(LayerParams {
            bs1_theta: v[0],
            bs1_phi: v[1],
            disp: [v[2], v[3]],
            rot1: [v[4], v[5]],
            bs2_theta: v[6],
            bs2_phi: v[7],
            squeeze: [v[8], v[9]],
            rot2: [v[10], v[11]],
            kerr: [v[12], v[13]],
        })
    }

    /// The same layer with the two modes relabeled.
    pub fn mode_swapped(&self) -> Self {
        let swap = |a: [f64; 2]| [a[1], a[0]];
        LayerParams {
            bs1_theta: self.bs1_theta,
            bs1_phi: PI - self.bs1_phi,
            disp: swap(self.disp),
            rot1: swap(self.rot1),
            bs2_theta: self.bs2_theta,
            bs2_phi: PI - self.bs2_phi,
            squeeze: swap(self.squeeze),
            rot2: swap(self.rot2),
            kerr: swap(self.kerr),
        }
    }
}

/// All trainable parameters of the photonic policy.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    pub layers: Vec<LayerParams>,
    pub variant: EncodingVariant,
}

impl PolicyParams {
    pub fn zeros(layers: usize, variant: EncodingVariant) -> Self {
        PolicyParams {
            layers: vec![LayerParams::default(); layers],
            variant,
        }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.to_flat()).collect()
    }

    pub fn set_flat(&mut self, v: &[f64]) -> Result<()> {
        if v.len() != self.layers.len() * PARAMS_PER_LAYER {
            return Err(Error::Shape(format!(
                "expected {} parameters, got {}",
                self.layers.len() * PARAMS_PER_LAYER,
                v.len()
            )));
        }
        for (layer, chunk) in self.layers.iter_mut().zip(v.chunks(PARAMS_PER_LAYER)) {
            *layer = LayerParams::from_flat(chunk)?;
        }
        Ok(())
    }

    pub fn mode_swapped(&self) -> Self {
        PolicyParams {
            layers: self.layers.iter().map(LayerParams::mode_swapped).collect(),
            variant: self.variant,
        }
    }

    /// `layer.<i>.<gate>.<slot>` names in flat order.
    pub fn names(&self) -> Vec<String> {
        (0..self.layers.len())
            .flat_map(|i| {
                SLOT_NAMES
                    .iter()
                    .map(move |(gate, slot)| format!("layer.{i}.{gate}.{slot}"))
            })
            .collect()
    }

    pub fn to_named(&self) -> NamedValues {
        self.names().into_iter().zip(self.to_flat()).collect()
    }

    pub fn to_checkpoint(&self) -> String {
        checkpoint::format(&format!("photonic policy, variant {}", self.variant), &self.to_named())
    }

    /// Rebuilds parameters from a checkpoint; every name must be present exactly once.
    pub fn from_checkpoint(text: &str, variant: EncodingVariant) -> Result<Self> {
        let named = checkpoint::parse(text)?;
        let layers = named
            .iter()
            .filter_map(|(k, _)| k.strip_prefix("layer.")?.split('.').next()?.parse::<usize>().ok())
            .max()
            .map_or(0, |m| m + 1);
        let mut params = PolicyParams::zeros(layers, variant);
        let values = checkpoint::lookup_all(&named, &params.names())?;
        params.set_flat(&values)?;
        Ok(params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn flat_layout_and_names() {
        let p = PolicyParams::zeros(3, EncodingVariant::Reupload);
        let names = p.names();
        assert_eq!(names.len(), 42);
        assert_eq!(names[0], "layer.0.bs1.theta");
        assert_eq!(names[9], "layer.0.squeeze.1");
        assert_eq!(names[41], "layer.2.kerr.1");
        for (i, slot) in ACTIVE_SLOTS.iter().enumerate() {
            let n = &names[*slot];
            assert!(n.contains(if i < 2 { "disp" } else { "squeeze" }), "{n}");
        }
    }

    #[test]
    fn checkpoint_rejects_missing_and_unknown_names() {
        let p = PolicyParams::zeros(1, EncodingVariant::SingleEncode);
        let text = p.to_checkpoint();
        let missing: String = text.lines().filter(|l| !l.contains("kerr.1")).map(|l| format!("{l}\n")).collect();
        assert!(PolicyParams::from_checkpoint(&missing, EncodingVariant::SingleEncode).is_err());
        let extra = format!("{text}layer.0.bogus.0 = 1\n");
        assert!(PolicyParams::from_checkpoint(&extra, EncodingVariant::SingleEncode).is_err());
    }

    proptest! {
        #[test]
        fn checkpoint_round_trip_is_exact(values in proptest::collection::vec(-1e3f64..1e3, 28)) {
            let mut p = PolicyParams::zeros(2, EncodingVariant::Reupload);
            p.set_flat(&values).unwrap();
            let back = PolicyParams::from_checkpoint(&p.to_checkpoint(), EncodingVariant::Reupload).unwrap();
            prop_assert_eq!(back, p);
        }
    }
}
