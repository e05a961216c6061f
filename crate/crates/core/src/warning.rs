use std::fmt;

/// Non-fatal conditions attached to results. Warnings never turn into errors.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// Fewer than [`FEW_CLUSTERS`] clusters; clustered inference is unreliable.
    FewClusters(usize),
    /// A single cluster makes the clustered meat collapse to zero.
    SingleCluster,
    /// Outcome has zero total variation; R² reported as 0.
    ZeroOutcomeVariance,
    /// Maximized correlation parameter sits at the edge of its admissible interval.
    RhoNearBoundary { rho: f64, bound: f64 },
    /// Validation rows whose fixed-effect level never appeared in training.
    UnseenLevels(usize),
    /// Columns dropped as collinear before fitting.
    Collinear(Vec<String>),
}

pub const FEW_CLUSTERS: usize = 40;

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::FewClusters(g) => write!(f, "only {g} clusters; clustered inference is unreliable below {FEW_CLUSTERS}"),
            Warning::SingleCluster => write!(f, "G=1 degenerate: one cluster, clustered covariance is zero"),
            Warning::ZeroOutcomeVariance => write!(f, "outcome has zero variance; R^2 set to 0"),
            Warning::RhoNearBoundary { rho, bound } => {
                write!(f, "rho estimate {rho} is at the admissible boundary {bound}")
            }
            Warning::UnseenLevels(n) => {
                write!(f, "{n} validation rows had fixed-effect levels unseen in training")
            }
            Warning::Collinear(cols) => write!(f, "collinear columns dropped: {}", cols.join(", ")),
        }
    }
}
