//! Dominance-closure passes over ordered connection arrays.
//!
//! Profile-ordered arrays are closed by a backward sweep holding the still
//! relevant dominant connections in a sweep buffer, followed by a second
//! backward scan on "day -1" that catches dominators across the periodic
//! midnight border. Arrival-connection arrays are closed by a single forward
//! pass, since their order puts every potential dominator first.

use super::{
    compare_arrivals, compare_connections, dominates_arrival, dominates_periodic,
    equivalent_arrivals, ArrivalConnection, ConnLike, OrderKind,
};
use crate::time::MINUTES_PER_DAY;
use crate::timetable::{StationId, Timetable};

/// Working set of a backward sweep: the connections that can still dominate
/// something at the current departure-time cursor. An entry expires once it
/// departs at least the source transfer time after the cursor and arrives
/// more than the target transfer time after the best retained arrival.
pub struct SweepBuffer {
    transfer_from: u32,
    transfer_to: u32,
    entries: Vec<BufEntry>,
}

struct BufEntry {
    index: usize,
    dep: i64,
    arr: u32,
}

impl SweepBuffer {
    pub fn new(transfer_from: u32, transfer_to: u32) -> Self {
        SweepBuffer {
            transfer_from,
            transfer_to,
            entries: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, index: usize, dep: i64, arr: u32) {
        self.entries.push(BufEntry { index, dep, arr });
    }

    /// Moves the cursor to an earlier departure time and evicts entries whose
    /// windows have expired.
    pub fn advance(&mut self, cursor: i64) {
        let window = cursor + self.transfer_from as i64;
        let mature_min = self
            .entries
            .iter()
            .filter(|e| e.dep >= window)
            .map(|e| e.arr)
            .min();
        let Some(mu) = mature_min else { return };
        let keep_arr = mu.saturating_add(self.transfer_to);
        self.entries.retain(|e| e.dep < window || e.arr <= keep_arr);
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|e| e.index)
    }

    pub fn remove(&mut self, index: usize) {
        self.entries.retain(|e| e.index != index);
    }
}

/// Closes a tagged connection list under periodic dominance for an edge
/// `(from, to)` and returns the survivors in canonical profile order. The
/// tag is a preference rank: among equivalent connections the lowest rank
/// survives (ties resolved by canonical order).
pub fn close_profile<T: ConnLike>(
    mut items: Vec<(u32, T)>,
    from: StationId,
    to: StationId,
    tt: &Timetable,
) -> Vec<T> {
    items.sort_by(|a, b| {
        compare_connections(OrderKind::Profile, a.1.conn(), b.1.conn(), tt).then(a.0.cmp(&b.0))
    });
    collapse_equivalents(&mut items, tt);

    let n = items.len();
    let mut keep = vec![true; n];
    let transfer_from = tt.transfer(from);
    let transfer_to = tt.transfer(to);
    let mut buf = SweepBuffer::new(transfer_from, transfer_to);

    // Day-0 pass: each connection against the retained later-departing ones.
    for i in (0..n).rev() {
        let c = items[i].1.conn();
        buf.advance(c.dep as i64);
        let dominated = buf
            .indices()
            .any(|j| dominates_periodic(items[j].1.conn(), c, tt));
        if dominated {
            keep[i] = false;
        } else {
            buf.push(i, c.dep as i64, c.arr);
        }
    }

    // Day -1 pass: the same survivors again, shifted one day back, against
    // the buffer left over from the first pass. This removes connections
    // whose dominator departs after midnight.
    for i in (0..n).rev() {
        if !keep[i] {
            continue;
        }
        if buf.is_empty() {
            break;
        }
        let c = items[i].1.conn();
        buf.advance(c.dep as i64 - MINUTES_PER_DAY as i64);
        let dominated = buf
            .indices()
            .any(|j| j != i && keep[j] && dominates_periodic(items[j].1.conn(), c, tt));
        if dominated {
            keep[i] = false;
            buf.remove(i);
        }
    }

    let mut out = Vec::with_capacity(n);
    for (i, (_, item)) in items.into_iter().enumerate() {
        if keep[i] {
            out.push(item);
        }
    }
    out
}

/// Collapses runs of equivalent connections to one representative each,
/// keeping the lowest preference rank. Equivalent connections share
/// departure, arrival, and criticality flags, so they are adjacent in
/// canonical order up to the stop-event keys.
fn collapse_equivalents<T: ConnLike>(items: &mut Vec<(u32, T)>, tt: &Timetable) {
    let mut out: Vec<(u32, T)> = Vec::with_capacity(items.len());
    let drained: Vec<(u32, T)> = std::mem::take(items);
    let mut group: Vec<(u32, T)> = Vec::new();
    let flush = |group: &mut Vec<(u32, T)>, out: &mut Vec<(u32, T)>| {
        // Partition the equal-(dep, len, flags) group into equivalence
        // classes and keep the best-ranked member of each.
        let mut classes: Vec<(u32, T)> = Vec::new();
        for (rank, item) in group.drain(..) {
            match classes
                .iter_mut()
                .find(|(_, rep)| super::equivalent_connections(rep.conn(), item.conn(), tt))
            {
                Some(slot) => {
                    if rank < slot.0 {
                        *slot = (rank, item);
                    }
                }
                None => classes.push((rank, item)),
            }
        }
        out.append(&mut classes);
    };
    for (rank, item) in drained {
        let same_group = group.last().is_some_and(|(_, g)| {
            let (a, b) = (g.conn(), item.conn());
            a.dep == b.dep
                && a.arr == b.arr
                && a.critical_dep(tt) == b.critical_dep(tt)
                && a.critical_arr(tt) == b.critical_arr(tt)
        });
        if !same_group {
            flush(&mut group, &mut out);
        }
        group.push((rank, item));
    }
    flush(&mut group, &mut out);
    *items = out;
}

/// Closes a preference-tagged arrival-connection list: sorts so that no
/// entry dominates an earlier one, then keeps each entry that no retained
/// non-equivalent entry dominates. Among equivalents the lowest rank wins.
pub fn close_arrivals(
    mut tagged: Vec<(u32, ArrivalConnection)>,
    tt: &Timetable,
) -> Vec<ArrivalConnection> {
    tagged.sort_by(|a, b| {
        a.1.arr
            .cmp(&b.1.arr)
            .then_with(|| {
                super::arrival_sort_rank(&a.1, tt).cmp(&super::arrival_sort_rank(&b.1, tt))
            })
            .then(a.0.cmp(&b.0))
            .then(a.1.z2.cmp(&b.1.z2))
    });
    let mut out: Vec<ArrivalConnection> = Vec::with_capacity(tagged.len());
    'cand: for (_, cand) in tagged {
        for kept in &out {
            if equivalent_arrivals(kept, &cand, tt) || dominates_arrival(kept, &cand, tt) {
                continue 'cand;
            }
        }
        out.push(cand);
    }
    out.sort_by(|a, b| compare_arrivals(a, b, tt));
    out
}
