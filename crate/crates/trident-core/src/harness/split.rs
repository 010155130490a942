//! Leave-one-antenna-out fold splitting.

use super::{DatasetManifest, HarnessError};

/// Partitions manifest records by antenna: records whose `antenna_id` equals
/// `held_out` form the test set, everything else the training set. Returns
/// index vectors into `manifest.records`, each in manifest order.
pub fn split_leave_one_antenna_out(
    manifest: &DatasetManifest,
    held_out: usize,
) -> Result<(Vec<usize>, Vec<usize>), HarnessError> {
    let antennas: Vec<usize> = manifest.records.iter().map(|r| r.antenna_id).collect();
    split_indices(&antennas, held_out)
}

/// Same partition over a bare per-record antenna list (used once records are
/// already loaded in memory).
pub(crate) fn split_indices(
    antennas: &[usize],
    held_out: usize,
) -> Result<(Vec<usize>, Vec<usize>), HarnessError> {
    if !antennas.contains(&held_out) {
        let mut available: Vec<usize> = antennas.to_vec();
        available.sort_unstable();
        available.dedup();
        return Err(HarnessError::UnknownAntenna { requested: held_out, available });
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (index, &antenna) in antennas.iter().enumerate() {
        if antenna == held_out {
            test.push(index);
        } else {
            train.push(index);
        }
    }
    if train.is_empty() {
        return Err(HarnessError::EmptySplit { antenna: held_out, side: "training" });
    }
    Ok((train, test))
}
