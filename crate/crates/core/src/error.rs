use alloc::string::String;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("node {0} is not in the graph")]
    UnknownNode(u32),
    #[error("node pair requires two distinct nodes, got {0} twice")]
    IdenticalPair(u32),
    #[error("graph is empty")]
    EmptyGraph,
    #[error("graph has no links")]
    NoLinks,
    #[error("negative link weight {weight} on ({u}, {v})")]
    NegativeWeight { u: u32, v: u32, weight: f64 },
    #[error("partition covers {partition_nodes} nodes but the graph has {graph_nodes}")]
    PartitionMismatch {
        partition_nodes: usize,
        graph_nodes: usize,
    },
    #[error("unknown community id {0}")]
    UnknownCommunity(u32),
    #[error("partitions cover different node sets ({left} vs {right} nodes)")]
    NodeSetMismatch { left: usize, right: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("feature vector has {got} entries, model was trained on {expected}")]
    FeatureLengthMismatch { expected: usize, got: usize },
    #[error("voting requires exactly 3 member models, got {0}")]
    VoteMemberCount(usize),
    #[error("cross-validation needs at least {folds} samples, dataset has {samples}")]
    TooFewSamples { folds: usize, samples: usize },
    #[error("dataset must contain both classes")]
    SingleClassDataset,
    #[error("link ({u}, {v}) has no out-of-fold probability")]
    MissingLikelihood { u: u32, v: u32 },
    #[error("total pair similarity is zero")]
    ZeroSimilarityMass,
    #[error("series must have equal length and at least 3 points")]
    ShortSeries,
    #[error("series has zero variance")]
    ZeroVariance,
    #[error("baseline value is zero")]
    ZeroBaseline,
}

pub type Result<T> = core::result::Result<T, Error>;
