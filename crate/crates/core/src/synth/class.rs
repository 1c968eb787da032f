use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The eight jamming families recognised by the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum JammingClass {
    /// Continuous wave with random amplitude at a fixed frequency.
    CwjA,
    /// Continuous wave with fixed amplitude at a random frequency.
    CwjW,
    /// Cosine amplitude modulation of a carrier.
    Amj,
    /// Noise amplitude modulation of a carrier.
    Namj,
    /// Frequency-shifted narrowband noise.
    Nbnj,
    /// Sum of several tones.
    Mtj,
    /// Linear frequency sweep.
    Lfmj,
    /// Band-limited noise gated by a periodic pulse.
    Ppnj,
}

pub const NUM_CLASSES: usize = 8;

impl JammingClass {
    pub const ALL: [JammingClass; NUM_CLASSES] = [
        JammingClass::CwjA,
        JammingClass::CwjW,
        JammingClass::Amj,
        JammingClass::Namj,
        JammingClass::Nbnj,
        JammingClass::Mtj,
        JammingClass::Lfmj,
        JammingClass::Ppnj,
    ];

    pub fn id(self) -> usize {
        self as usize
    }

    pub fn from_id(id: usize) -> Result<Self, Error> {
        Self::ALL
            .get(id)
            .copied()
            .ok_or_else(|| Error::param(format!("class id {id} outside 0..{NUM_CLASSES}")))
    }

    pub fn name(self) -> &'static str {
        match self {
            JammingClass::CwjA => "CWJ_A",
            JammingClass::CwjW => "CWJ_W",
            JammingClass::Amj => "AMJ",
            JammingClass::Namj => "NAMJ",
            JammingClass::Nbnj => "NBNJ",
            JammingClass::Mtj => "MTJ",
            JammingClass::Lfmj => "LFMJ",
            JammingClass::Ppnj => "PPNJ",
        }
    }
}

impl fmt::Display for JammingClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for JammingClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::param(format!("unknown jamming class `{s}`")))
    }
}
