//! The timetable text format: one directive per line, `#` comments.
//!
//! ```text
//! STATION <id> <transfer-minutes> <name>
//! TRAIN <id>
//! STOP <station-id> <arr hh:mm|-> <dep hh:mm|->
//! ```
//!
//! A train needs at least two stops; the first has no arrival, the last no
//! departure. Consecutive stop times advance by cycle difference, so
//! overnight legs simply wrap past midnight.

use crate::time::{parse_hm, TimeOfDay};
use crate::timetable::{
    ElementaryConnection, EventId, Station, StationId, StopEvent, Timetable, TrainId,
};

/// Traffic-day count assigned to parsed timetables; the format itself does
/// not carry one since trains operate daily.
pub const DEFAULT_TRAFFIC_DAYS: u32 = 7;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        msg: msg.into(),
    })
}

fn split_token(s: &str) -> (&str, &str) {
    let s = s.trim_start();
    match s.find(char::is_whitespace) {
        Some(i) => (&s[..i], &s[i..]),
        None => (s, ""),
    }
}

type PendingStop = (StationId, Option<TimeOfDay>, Option<TimeOfDay>, usize);

fn finish_train(tt: &mut Timetable, stops: &mut Vec<PendingStop>) -> Result<(), ParseError> {
    if stops.is_empty() {
        return Ok(());
    }
    if stops.len() < 2 {
        return err(stops[0].3, "train needs at least two stops");
    }
    let train = TrainId(tt.events.iter().map(|e| e.train.0 + 1).max().unwrap_or(0));
    let n = stops.len();
    let mut prev: Option<(EventId, StationId, TimeOfDay)> = None;
    for (i, (station, arrival, departure, line)) in stops.drain(..).enumerate() {
        if i == 0 && arrival.is_some() {
            return err(line, "first stop of a train must have arrival '-'");
        }
        if i + 1 == n && departure.is_some() {
            return err(line, "last stop of a train must have departure '-'");
        }
        if i > 0 && arrival.is_none() {
            return err(line, "intermediate stop needs an arrival time");
        }
        if i + 1 < n && departure.is_none() {
            return err(line, "intermediate stop needs a departure time");
        }
        tt.events.push(StopEvent {
            station,
            arrival,
            departure,
            train,
        });
        let z = EventId(tt.events.len() as u32 - 1);
        if let Some((z1, s1, dep)) = prev {
            tt.elementary.push(ElementaryConnection {
                z1,
                z2: z,
                from: s1,
                to: station,
                dep,
                arr: arrival.expect("checked above"),
            });
        }
        prev = departure.map(|d| (z, station, d));
    }
    Ok(())
}

pub fn parse_timetable(text: &str) -> Result<Timetable, ParseError> {
    let mut tt = Timetable {
        traffic_days: DEFAULT_TRAFFIC_DAYS,
        ..Timetable::default()
    };
    let mut stops: Vec<PendingStop> = Vec::new();
    let mut in_train = false;

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        match fields.next().unwrap() {
            "STATION" => {
                if in_train {
                    finish_train(&mut tt, &mut stops)?;
                    in_train = false;
                }
                // the name is everything after the third token
                let rest = line["STATION".len()..].trim_start();
                let (id_tok, rest) = split_token(rest);
                let (transfer_tok, name) = split_token(rest);
                let id: u32 = match id_tok.parse().ok() {
                    Some(v) => v,
                    None => return err(lineno, "STATION needs a numeric id"),
                };
                if id as usize != tt.stations.len() {
                    return err(
                        lineno,
                        format!(
                            "station ids must be dense and ascending, expected {}",
                            tt.stations.len()
                        ),
                    );
                }
                let transfer: u32 = match transfer_tok.parse().ok() {
                    Some(v) if v < 1440 => v,
                    _ => return err(lineno, "STATION needs a transfer time in [0, 1439]"),
                };
                let name = name.trim();
                if name.is_empty() {
                    return err(lineno, "STATION needs a name");
                }
                tt.stations.push(Station {
                    name: name.to_string(),
                    transfer,
                });
            }
            "TRAIN" => {
                finish_train(&mut tt, &mut stops)?;
                let id: u32 = match fields.next().and_then(|s| s.parse().ok()) {
                    Some(v) => v,
                    None => return err(lineno, "TRAIN needs a numeric id"),
                };
                let expected = tt.events.iter().map(|e| e.train.0 + 1).max().unwrap_or(0);
                if id != expected {
                    return err(
                        lineno,
                        format!("train ids must be dense and ascending, expected {expected}"),
                    );
                }
                in_train = true;
            }
            "STOP" => {
                if !in_train {
                    return err(lineno, "STOP outside of a TRAIN block");
                }
                let station: u32 = match fields.next().and_then(|s| s.parse().ok()) {
                    Some(v) => v,
                    None => return err(lineno, "STOP needs a station id"),
                };
                if station as usize >= tt.stations.len() {
                    return err(lineno, format!("unknown station {station}"));
                }
                let mut time = |what: &str| -> Result<Option<TimeOfDay>, ParseError> {
                    match fields.next() {
                        Some("-") => Ok(None),
                        Some(s) => match parse_hm(s) {
                            Some(t) => Ok(Some(t)),
                            None => err(lineno, format!("bad {what} time '{s}'")),
                        },
                        None => err(lineno, format!("STOP needs an {what} time or '-'")),
                    }
                };
                let arrival = time("arrival")?;
                let departure = time("departure")?;
                stops.push((StationId(station), arrival, departure, lineno));
            }
            other => return err(lineno, format!("unknown directive '{other}'")),
        }
    }
    finish_train(&mut tt, &mut stops)?;
    Ok(tt)
}

fn fmt_opt(t: Option<TimeOfDay>) -> String {
    match t {
        Some(t) => t.to_string(),
        None => "-".to_string(),
    }
}

/// Canonical printer; `parse_timetable(print_timetable(tt)) == tt` for any
/// timetable with the default traffic days.
pub fn print_timetable(tt: &Timetable) -> String {
    let mut out = String::new();
    for (i, s) in tt.stations.iter().enumerate() {
        out.push_str(&format!("STATION {} {} {}\n", i, s.transfer, s.name));
    }
    let train_count = tt.events.iter().map(|e| e.train.0 + 1).max().unwrap_or(0);
    for train in 0..train_count {
        out.push_str(&format!("TRAIN {train}\n"));
        for ev in tt.events.iter().filter(|e| e.train.0 == train) {
            out.push_str(&format!(
                "STOP {} {} {}\n",
                ev.station.0,
                fmt_opt(ev.arrival),
                fmt_opt(ev.departure),
            ));
        }
    }
    out
}
