//! Dataset construction, few-shot subsetting and experiment reports.

pub mod dataset;
pub mod experiment;
pub mod flops;
pub mod overlap;
pub mod svg;
pub mod tsne;

pub use experiment::{
    class_names, confusion_svg, mean_curve, run_cell, run_sweep, sweep_csv, write_cell_outputs, Cell, CellResult,
    ExperimentConfig, GanArtifacts, SweepConfig, SweepRow,
};
pub use flops::{count_flops, FlopsReport, LayerFlops, Totals, REFERENCE_FLOPS, REFERENCE_PARAMS};
pub use overlap::cluster_overlap;
pub use tsne::{conditional_affinities, tsne_project, ProjectionResult, Source, TsneConfig};
pub use dataset::{
    build_dataset, default_jnr_grid, draw_jnr, subset_split, to_tensor, Dataset, DatasetManifest, DatasetRequest,
    SubsetSpec,
};
