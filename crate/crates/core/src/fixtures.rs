//! Small hand-built timetables used by unit tests and the `selftest`
//! command. Both exercise corner cases of transfer handling: an overnight
//! line where a tight transfer forbids the faster onward train, and a line
//! that revisits a station on the same train.

pub use crate::timetable::TimetableBuilder;
use crate::timetable::{ElemId, TimedLeg, Timetable};

/// Five stations A..E, transfer time 5 everywhere. One overnight train
/// A -> B -> C -> D plus two C -> E trains an hour apart; the earlier one
/// leaves only 3 minutes after the through train reaches C.
///
/// Elementary connections, in order:
/// 0: A->B 23:05 0:55   1: B->C 1:02 2:57   2: C->D 3:00 4:20
/// 3: C->E 3:00 4:00    4: C->E 4:00 5:00
pub fn overnight_line() -> Timetable {
    let mut b = TimetableBuilder::new();
    let a = b.station("A", 5);
    let s_b = b.station("B", 5);
    let c = b.station("C", 5);
    let d = b.station("D", 5);
    let e = b.station("E", 5);
    b.train(&[
        (a, "-", "23:05"),
        (s_b, "0:55", "1:02"),
        (c, "2:57", "3:00"),
        (d, "4:20", "-"),
    ]);
    b.train(&[(c, "-", "3:00"), (e, "4:00", "-")]);
    b.train(&[(c, "-", "4:00"), (e, "5:00", "-")]);
    b.build()
}

/// Journey A -> E on the overnight line taking the later C -> E train:
/// consistent with one transfer, arriving day 1 at 5:00.
pub fn overnight_journey_via_late_train() -> Vec<TimedLeg> {
    vec![
        TimedLeg {
            conn: ElemId(0),
            dep: 1385,
            arr: 1495,
        },
        TimedLeg {
            conn: ElemId(1),
            dep: 1502,
            arr: 1617,
        },
        TimedLeg {
            conn: ElemId(4),
            dep: 1680,
            arr: 1740,
        },
    ]
}

/// Same journey but boarding the earlier C -> E train: the 3-minute gap at C
/// is below the 5-minute transfer time, so this sequence is inconsistent.
pub fn overnight_journey_via_early_train() -> Vec<TimedLeg> {
    vec![
        TimedLeg {
            conn: ElemId(0),
            dep: 1385,
            arr: 1495,
        },
        TimedLeg {
            conn: ElemId(1),
            dep: 1502,
            arr: 1617,
        },
        TimedLeg {
            conn: ElemId(3),
            dep: 1620,
            arr: 1680,
        },
    ]
}

/// Four stations where one train runs A -> B -> C -> B -> D within five
/// minutes. Transfer time 5 at every station, so at B nobody can change
/// between the two visits; staying on the train via C is the only way
/// from A to D, arriving 12:04.
pub fn loop_line() -> Timetable {
    let mut b = TimetableBuilder::new();
    let a = b.station("A", 5);
    let s_b = b.station("B", 5);
    let c = b.station("C", 5);
    let d = b.station("D", 5);
    b.train(&[
        (a, "-", "12:00"),
        (s_b, "12:01", "12:01"),
        (c, "12:02", "12:02"),
        (s_b, "12:03", "12:03"),
        (d, "12:04", "-"),
    ]);
    b.build()
}
