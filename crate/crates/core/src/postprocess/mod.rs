//! Point estimates of the partition from a posterior sample (Binder loss,
//! PAM on the mean dissimilarity, expected variation of information) and
//! per-cluster posterior summaries.

mod pam;
mod partition;
mod summary;
mod vi;

pub use pam::{mean_silhouette, pam, select_partition_pam, Medoids, PamSelection};
pub use partition::{
    binder_loss, mean_similarity, select_partition_binder, Partition, SimilarityMatrix,
    UniquePartitions,
};
pub use summary::{
    interval_code, match_clusters, quartile_code, summarize_clusters, ClusterReport,
    ClusterSummary, HeatCode, Quantiles,
};
pub use vi::{complete_linkage, expected_vi, linkage_cuts, select_partition_vi, vi_distance, ViSelection};
