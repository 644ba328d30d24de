//! Fixtures shared by the criterion benchmarks.

use ppclust_core::bench::{blob_instance, stand_in, DatasetLadder};
use ppclust_core::Dataset;

/// The reference rung (31,250 records, 4 attributes) as normalized Gaussian data.
pub fn reference_dataset() -> Dataset {
    let ladder = DatasetLadder::standard();
    stand_in(ladder.reference(), 1).expect("valid rung")
}

/// Seven well-separated clusters of `records` points in four dimensions.
pub fn blobs(records: usize) -> Dataset {
    blob_instance(records, 4, 7, 1).expect("valid blobs").0
}
