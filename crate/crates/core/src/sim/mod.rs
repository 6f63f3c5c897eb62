//! Synthetic contact data: a lumped arm/object model, a taxel renderer and
//! a seeded dataset generator.

mod dataset;
mod model;
mod render;

pub use dataset::{
    generate_dataset, generate_trial, joint_stiffness_to_linear, joint_velocity_to_linear, trial_seed,
    Dataset, DatasetEntry, DatasetSpec, GeneratorConfig, MaterialParams, LEVER_ARM, MANIFEST_FILE,
};
pub use model::{critical_damping, simulate, Material, SimScenario, SimTrajectory, GRAVITY};
pub use render::{render_taxels, RenderParams, RenderedTrial};

use crate::taxel::TaxelError;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("integration diverged at t = {t} s; the time step is too large for the stiffness")]
    UnstableIntegration { t: f64 },
    #[error("invalid render parameters: {0}")]
    InvalidRender(String),
    #[error("invalid dataset spec: {0}")]
    InvalidSpec(String),
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
    #[error("cell {cell}: {source}")]
    Cell {
        cell: String,
        #[source]
        source: Box<SimError>,
    },
    #[error(transparent)]
    Taxel(#[from] TaxelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
