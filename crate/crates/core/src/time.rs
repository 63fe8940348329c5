//! Minute-based time arithmetic on a periodic daily timetable.
//!
//! Within-day times are minutes in `[0, 1439]`. Absolute times count minutes
//! from midnight of day 0, so `t = day * 1440 + minute_of_day`.

use std::fmt;

pub const MINUTES_PER_DAY: u32 = 1440;

/// Absolute time in minutes from day-0 midnight.
pub type Minutes = u32;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("time of day {0} out of range [0, 1439]")]
pub struct TimeOfDayError(pub u32);

/// A validated minute-of-day in `[0, 1439]`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeOfDay(u16);

impl TimeOfDay {
    pub fn new(minutes: u32) -> Result<Self, TimeOfDayError> {
        if minutes >= MINUTES_PER_DAY {
            Err(TimeOfDayError(minutes))
        } else {
            Ok(TimeOfDay(minutes as u16))
        }
    }

    pub fn from_hm(hours: u32, minutes: u32) -> Result<Self, TimeOfDayError> {
        Self::new(hours * 60 + minutes)
    }

    pub fn minutes(self) -> u32 {
        self.0 as u32
    }
}

impl fmt::Display for TimeOfDay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}:{:02}", self.0 / 60, self.0 % 60)
    }
}

impl fmt::Debug for TimeOfDay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Smallest nonnegative `l` with `l = t2 - t1 (mod 1440)`.
pub fn cycle_difference(t1: TimeOfDay, t2: TimeOfDay) -> u32 {
    let (a, b) = (t1.minutes(), t2.minutes());
    (b + MINUTES_PER_DAY - a) % MINUTES_PER_DAY
}

/// Day index of an absolute time.
pub fn day_of(t: Minutes) -> u32 {
    t / MINUTES_PER_DAY
}

/// Minute-of-day of an absolute time.
pub fn minute_of_day(t: Minutes) -> TimeOfDay {
    TimeOfDay((t % MINUTES_PER_DAY) as u16)
}

/// First absolute time `>= from` whose minute-of-day equals `tod`.
pub fn next_instance(from: Minutes, tod: TimeOfDay) -> Minutes {
    from + cycle_difference(minute_of_day(from), tod)
}

/// Formats an absolute time as `d+hh:mm`.
pub fn format_abs(t: Minutes) -> String {
    format!("{}+{}", day_of(t), minute_of_day(t))
}

/// Parses `hh:mm` (within-day) or `d+hh:mm` (absolute) into absolute minutes.
pub fn parse_abs(s: &str) -> Option<Minutes> {
    let (day, rest) = match s.split_once('+') {
        Some((d, rest)) => (d.parse::<u32>().ok()?, rest),
        None => (0, s),
    };
    let tod = parse_hm(rest)?;
    Some(day * MINUTES_PER_DAY + tod.minutes())
}

/// Parses `hh:mm` into a time of day. Hours up to 23 only.
pub fn parse_hm(s: &str) -> Option<TimeOfDay> {
    let (h, m) = s.split_once(':')?;
    if h.is_empty() || m.len() != 2 {
        return None;
    }
    let h: u32 = h.parse().ok()?;
    let m: u32 = m.parse().ok()?;
    if m >= 60 {
        return None;
    }
    TimeOfDay::from_hm(h, m).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tod(m: u32) -> TimeOfDay {
        TimeOfDay::new(m).unwrap()
    }

    #[test]
    fn cycle_difference_wraps_midnight() {
        // 23:05 -> 0:55 is 1:50 = 110 minutes
        assert_eq!(cycle_difference(tod(23 * 60 + 5), tod(55)), 110);
        assert_eq!(cycle_difference(tod(600), tod(600)), 0);
        assert_eq!(cycle_difference(tod(600), tod(540)), 1380);
    }

    #[test]
    fn cycle_difference_sums_to_day_or_zero() {
        for a in (0..MINUTES_PER_DAY).step_by(97) {
            for b in (0..MINUTES_PER_DAY).step_by(89) {
                let s = cycle_difference(tod(a), tod(b)) + cycle_difference(tod(b), tod(a));
                assert!(s == 0 || s == MINUTES_PER_DAY, "{a} {b} -> {s}");
            }
        }
    }

    #[test]
    fn time_of_day_rejects_out_of_range() {
        assert!(TimeOfDay::new(1440).is_err());
        assert!(TimeOfDay::new(1439).is_ok());
    }

    #[test]
    fn next_instance_is_aligned_and_minimal() {
        assert_eq!(next_instance(1500, tod(30)), 2910);
        assert_eq!(next_instance(1470, tod(30)), 1470);
        assert_eq!(next_instance(0, tod(0)), 0);
    }

    #[test]
    fn abs_format_round_trips() {
        for t in [0, 55, 1385, 1740, 3 * 1440 + 725] {
            assert_eq!(parse_abs(&format_abs(t)), Some(t));
        }
        assert_eq!(parse_abs("23:05"), Some(1385));
        assert_eq!(parse_abs("1+05:00"), Some(1740));
        assert_eq!(parse_abs("24:00"), None);
        assert_eq!(parse_abs("x"), None);
    }
}
