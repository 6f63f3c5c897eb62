//! Object categories and robot-condition labels shared by every module.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unrecognized {kind} `{value}`")]
pub struct ParseLabelError {
    pub kind: &'static str,
    pub value: String,
}

/// The four object categories, in the fixed order used for every tie-break.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    RigidFixed,
    RigidMovable,
    SoftFixed,
    SoftMovable,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::RigidFixed,
        Category::RigidMovable,
        Category::SoftFixed,
        Category::SoftMovable,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Category> {
        Self::ALL.get(i).copied()
    }

    pub fn code(self) -> &'static str {
        match self {
            Category::RigidFixed => "RF",
            Category::RigidMovable => "RM",
            Category::SoftFixed => "SF",
            Category::SoftMovable => "SM",
        }
    }

    pub fn is_soft(self) -> bool {
        matches!(self, Category::SoftFixed | Category::SoftMovable)
    }

    pub fn is_fixed(self) -> bool {
        matches!(self, Category::RigidFixed | Category::SoftFixed)
    }

    /// Parses a label field where `unknown` means "no label".
    pub fn parse_label(s: &str) -> Result<Option<Category>, ParseLabelError> {
        match s.trim() {
            "unknown" => Ok(None),
            other => other.parse().map(Some),
        }
    }

    pub fn label_code(label: Option<Category>) -> &'static str {
        label.map_or("unknown", Category::code)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Category {
    type Err = ParseLabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "RF" => Ok(Category::RigidFixed),
            "RM" => Ok(Category::RigidMovable),
            "SF" => Ok(Category::SoftFixed),
            "SM" => Ok(Category::SoftMovable),
            other => Err(ParseLabelError {
                kind: "category",
                value: other.to_string(),
            }),
        }
    }
}

/// A velocity or stiffness setting of the arm controller.
///
/// `Nominal` is the single setting used by stereotyped-motion datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Setting {
    Low,
    High,
    Nominal,
}

impl Setting {
    pub fn code(self) -> &'static str {
        match self {
            Setting::Low => "low",
            Setting::High => "high",
            Setting::Nominal => "nominal",
        }
    }

    pub fn parse_optional(s: &str) -> Result<Option<Setting>, ParseLabelError> {
        match s.trim() {
            "none" => Ok(None),
            other => other.parse().map(Some),
        }
    }

    pub fn optional_code(s: Option<Setting>) -> &'static str {
        s.map_or("none", Setting::code)
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Setting {
    type Err = ParseLabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "low" => Ok(Setting::Low),
            "high" => Ok(Setting::High),
            "nominal" => Ok(Setting::Nominal),
            other => Err(ParseLabelError {
                kind: "setting",
                value: other.to_string(),
            }),
        }
    }
}

/// Arm velocity and joint stiffness settings under which a trial was recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Condition {
    pub velocity: Setting,
    pub stiffness: Setting,
}

impl Condition {
    pub const NOMINAL: Condition = Condition {
        velocity: Setting::Nominal,
        stiffness: Setting::Nominal,
    };

    /// The 2×2 grid of varied-parameter conditions, velocity-major.
    pub const VARIED: [Condition; 4] = [
        Condition { velocity: Setting::Low, stiffness: Setting::Low },
        Condition { velocity: Setting::Low, stiffness: Setting::High },
        Condition { velocity: Setting::High, stiffness: Setting::Low },
        Condition { velocity: Setting::High, stiffness: Setting::High },
    ];

    pub fn new(velocity: Setting, stiffness: Setting) -> Self {
        Self { velocity, stiffness }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v-{}/k-{}", self.velocity, self.stiffness)
    }
}
