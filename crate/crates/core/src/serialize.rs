//! Versioned binary serialization of hierarchies: magic `SGCH1`, fixed-width
//! little-endian integers, length-prefixed sequences. Loading rebuilds all
//! lookup indices, so a round trip answers every query identically.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Write};
use std::path::Path;

use crate::ch::{ContractionParams, Hierarchy};
use crate::conn::{ConnSource, Connection, EdgeConnectionSet, ViaRecord};
use crate::graph::StationGraph;
use crate::time::TimeOfDay;
use crate::timetable::{
    ElemId, ElementaryConnection, EventId, Station, StationId, StopEvent, Timetable, TrainId,
};

const MAGIC: &[u8; 5] = b"SGCH1";
const VERSION: u16 = 1;
const ABSENT: u32 = u32::MAX;

#[derive(Debug, thiserror::Error)]
pub enum SerializeError {
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("bad magic, not a hierarchy file")]
    BadMagic,
    #[error("unsupported version {0}")]
    BadVersion(u16),
    #[error("malformed file: {0}")]
    Malformed(&'static str),
}

pub fn save_hierarchy(h: &Hierarchy, path: &Path) -> Result<(), SerializeError> {
    let bytes = to_bytes(h);
    std::fs::write(path, bytes)?;
    Ok(())
}

pub fn load_hierarchy(path: &Path) -> Result<Hierarchy, SerializeError> {
    let bytes = std::fs::read(path)?;
    from_bytes(&bytes)
}

pub fn to_bytes(h: &Hierarchy) -> Vec<u8> {
    let mut w = Vec::new();
    w.extend_from_slice(MAGIC);
    put_u16(&mut w, VERSION);
    // thread count is a runtime choice, not part of the artifact
    put_u32(&mut w, h.params.hop_limit);
    put_u32(&mut w, h.params.transfer_limit);
    put_u32(&mut w, h.params.duration_slack);

    let tt = h.graph.timetable();
    put_u32(&mut w, tt.traffic_days);
    put_u32(&mut w, tt.stations.len() as u32);
    for s in &tt.stations {
        put_u32(&mut w, s.transfer);
        put_str(&mut w, &s.name);
    }
    put_u32(&mut w, tt.events.len() as u32);
    for e in &tt.events {
        put_u32(&mut w, e.station.0);
        put_u32(&mut w, e.arrival.map(|t| t.minutes()).unwrap_or(ABSENT));
        put_u32(&mut w, e.departure.map(|t| t.minutes()).unwrap_or(ABSENT));
        put_u32(&mut w, e.train.0);
    }
    put_u32(&mut w, tt.elementary.len() as u32);
    for c in &tt.elementary {
        put_u32(&mut w, c.z1.0);
        put_u32(&mut w, c.z2.0);
        put_u32(&mut w, c.from.0);
        put_u32(&mut w, c.to.0);
        put_u32(&mut w, c.dep.minutes());
        put_u32(&mut w, c.arr.minutes());
    }
    for r in &h.rank {
        put_u32(&mut w, *r);
    }

    let edges: Vec<(StationId, StationId, &EdgeConnectionSet)> = (0..tt.stations.len() as u32)
        .flat_map(|u| {
            h.graph
                .out_edges(StationId(u))
                .map(move |(t, e)| (StationId(u), t, e))
        })
        .collect();
    put_u32(&mut w, edges.len() as u32);
    for (u, t, set) in edges {
        put_u32(&mut w, u.0);
        put_u32(&mut w, t.0);
        put_u32(&mut w, set.len() as u32);
        for c in set.connections() {
            put_conn(&mut w, c);
        }
    }
    w
}

pub fn from_bytes(bytes: &[u8]) -> Result<Hierarchy, SerializeError> {
    let mut r = Reader { bytes, pos: 0 };
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(SerializeError::BadMagic);
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(SerializeError::BadVersion(version));
    }
    let params = ContractionParams {
        hop_limit: r.u32()?,
        transfer_limit: r.u32()?,
        duration_slack: r.u32()?,
        threads: 1,
    };
    let traffic_days = r.u32()?;
    let n_stations = r.u32()? as usize;
    let mut stations = Vec::with_capacity(n_stations);
    for _ in 0..n_stations {
        let transfer = r.u32()?;
        let name = r.string()?;
        stations.push(Station { name, transfer });
    }
    let n_events = r.u32()? as usize;
    let mut events = Vec::with_capacity(n_events);
    for _ in 0..n_events {
        let station = StationId(r.u32()?);
        let arrival = r.opt_time()?;
        let departure = r.opt_time()?;
        let train = TrainId(r.u32()?);
        events.push(StopEvent {
            station,
            arrival,
            departure,
            train,
        });
    }
    let n_elem = r.u32()? as usize;
    let mut elementary = Vec::with_capacity(n_elem);
    for _ in 0..n_elem {
        elementary.push(ElementaryConnection {
            z1: EventId(r.u32()?),
            z2: EventId(r.u32()?),
            from: StationId(r.u32()?),
            to: StationId(r.u32()?),
            dep: r.time()?,
            arr: r.time()?,
        });
    }
    let tt = Timetable {
        stations,
        events,
        elementary,
        traffic_days,
    };
    if !tt.validate().is_empty() {
        return Err(SerializeError::Malformed("timetable fails validation"));
    }
    let mut rank = Vec::with_capacity(n_stations);
    for _ in 0..n_stations {
        rank.push(r.u32()?);
    }

    let n_edges = r.u32()? as usize;
    let mut out: Vec<BTreeMap<StationId, EdgeConnectionSet>> = vec![BTreeMap::new(); n_stations];
    let mut rev: Vec<BTreeSet<StationId>> = vec![BTreeSet::new(); n_stations];
    for _ in 0..n_edges {
        let u = StationId(r.u32()?);
        let t = StationId(r.u32()?);
        if u.index() >= n_stations || t.index() >= n_stations {
            return Err(SerializeError::Malformed("edge endpoint out of range"));
        }
        let n_conns = r.u32()? as usize;
        let mut conns = Vec::with_capacity(n_conns);
        for _ in 0..n_conns {
            conns.push(r.conn(0)?);
        }
        let set = EdgeConnectionSet::from_closed(conns, u, t, &tt);
        out[u.index()].insert(t, set);
        rev[t.index()].insert(u);
    }
    if !r.done() {
        return Err(SerializeError::Malformed("trailing bytes"));
    }
    let graph = StationGraph::from_parts(tt, out, rev);
    Ok(Hierarchy {
        graph,
        rank,
        params,
    })
}

fn put_u16(w: &mut Vec<u8>, v: u16) {
    w.write_all(&v.to_le_bytes()).unwrap();
}

fn put_u32(w: &mut Vec<u8>, v: u32) {
    w.write_all(&v.to_le_bytes()).unwrap();
}

fn put_str(w: &mut Vec<u8>, s: &str) {
    put_u32(w, s.len() as u32);
    w.extend_from_slice(s.as_bytes());
}

fn put_conn(w: &mut Vec<u8>, c: &Connection) {
    put_u32(w, c.z1.0);
    put_u32(w, c.z2.0);
    put_u32(w, c.dep);
    put_u32(w, c.arr);
    match &c.source {
        ConnSource::Elem(id) => {
            w.push(0);
            put_u32(w, id.0);
        }
        ConnSource::Via(v) => {
            w.push(1);
            put_u32(w, v.middle.0);
            put_u32(w, v.right_offset);
            put_conn(w, &v.left);
            put_conn(w, &v.right);
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn read_exact(&mut self, buf: &mut [u8]) -> Result<(), SerializeError> {
        let end = self.pos + buf.len();
        if end > self.bytes.len() {
            return Err(SerializeError::Malformed("truncated"));
        }
        buf.copy_from_slice(&self.bytes[self.pos..end]);
        self.pos = end;
        Ok(())
    }

    fn u16(&mut self) -> Result<u16, SerializeError> {
        let mut b = [0u8; 2];
        self.read_exact(&mut b)?;
        Ok(u16::from_le_bytes(b))
    }

    fn u32(&mut self) -> Result<u32, SerializeError> {
        let mut b = [0u8; 4];
        self.read_exact(&mut b)?;
        Ok(u32::from_le_bytes(b))
    }

    fn u8(&mut self) -> Result<u8, SerializeError> {
        let mut b = [0u8; 1];
        self.read_exact(&mut b)?;
        Ok(b[0])
    }

    fn string(&mut self) -> Result<String, SerializeError> {
        let len = self.u32()? as usize;
        let mut b = vec![0u8; len];
        self.read_exact(&mut b)?;
        String::from_utf8(b).map_err(|_| SerializeError::Malformed("invalid utf8"))
    }

    fn time(&mut self) -> Result<TimeOfDay, SerializeError> {
        TimeOfDay::new(self.u32()?).map_err(|_| SerializeError::Malformed("time out of range"))
    }

    fn opt_time(&mut self) -> Result<Option<TimeOfDay>, SerializeError> {
        let v = self.u32()?;
        if v == ABSENT {
            Ok(None)
        } else {
            Ok(Some(TimeOfDay::new(v).map_err(|_| {
                SerializeError::Malformed("time out of range")
            })?))
        }
    }

    fn conn(&mut self, depth: u32) -> Result<Connection, SerializeError> {
        if depth > 4096 {
            return Err(SerializeError::Malformed("via nesting too deep"));
        }
        let z1 = EventId(self.u32()?);
        let z2 = EventId(self.u32()?);
        let dep = self.u32()?;
        let arr = self.u32()?;
        let source = match self.u8()? {
            0 => ConnSource::Elem(ElemId(self.u32()?)),
            1 => {
                let middle = StationId(self.u32()?);
                let right_offset = self.u32()?;
                let left = self.conn(depth + 1)?;
                let right = self.conn(depth + 1)?;
                ConnSource::Via(std::sync::Arc::new(ViaRecord {
                    middle,
                    left,
                    right,
                    right_offset,
                }))
            }
            _ => return Err(SerializeError::Malformed("unknown connection source tag")),
        };
        Ok(Connection {
            z1,
            z2,
            dep,
            arr,
            source,
        })
    }

    fn done(&self) -> bool {
        self.pos == self.bytes.len()
    }
}
