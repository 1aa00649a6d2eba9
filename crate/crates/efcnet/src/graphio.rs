//! Loads a dataset directory (subject CSVs plus `labels.csv`) into labeled
//! connectivity graphs.
//!
//! Graph construction is the expensive part (one edge-connectivity matrix
//! per subject), and subjects are independent, so it runs on the rayon pool.
//! Order and content are independent of the thread count: subject `i`'s
//! graph lands at position `i` regardless of completion order.

use std::path::Path;

use rayon::prelude::*;

use efcnet_core::graph::{build_graph, BrainGraph};

use crate::csvio::{read_labels, read_series};
use crate::error::Result;

/// Reads `dir/labels.csv` and `dir/{subject_id}.csv` for every listed
/// subject, preserving manifest order.
pub fn load_dataset(dir: &Path) -> Result<Vec<BrainGraph>> {
    let manifest = read_labels(&dir.join("labels.csv"))?;
    log::info!("loading {} subjects from {}", manifest.len(), dir.display());
    manifest
        .par_iter()
        .map(|(id, class)| {
            let ts = read_series(&dir.join(format!("{id}.csv")))?;
            build_graph(&ts, *class).map_err(Into::into)
        })
        .collect()
}
