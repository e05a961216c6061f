//! Region-country-year panels: ingestion, design matrices and cluster assignment.

mod cluster;
mod csvio;
mod dataset;
mod design;
mod geo;

pub use cluster::{assign_clusters, ClusterAssignment, ClusterScheme};
pub use csvio::{load_csv, read_csv, save_csv, write_csv, ColumnMapping};
pub use dataset::{PanelDataset, PanelObservation};
pub use design::{
    build_design, build_predictor_design, ColumnKind, ColumnLabel, DesignMatrix, DroppedRow, FixedEffect,
    ModelSpec, ModeratorAlignment, RowKey, TermSpec, DEFAULT_LAG_CEILING,
};
pub use geo::{haversine_km, GeoPoint, EARTH_RADIUS_KM};
