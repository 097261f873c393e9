use crate::model::{Detection, Observation, Target, WatchlistEntry};

/// Plates match exactly; faces match within `t_face` differing bits.
pub fn entry_matches(entry: &WatchlistEntry, d: &Detection, t_face: u32) -> bool {
    match (&entry.target, &d.observation) {
        (Target::Plate(a), Observation::Plate(b)) => a == b,
        (Target::Face(a), Observation::Face(b)) => a.hamming(*b) <= t_face,
        _ => false,
    }
}

/// Ids of the entries `d` matches, in entry order.
pub fn matching_entries<'a>(d: &'a Detection, entries: &'a [WatchlistEntry], t_face: u32) -> impl Iterator<Item = u64> + 'a {
    entries.iter().filter(move |e| entry_matches(e, d, t_face)).map(|e| e.entry_id)
}
