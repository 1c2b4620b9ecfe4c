//! The reference SUT: an embedded time-series store with per-sensor
//! append-only segment files and lossless codecs.
//!
//! On-disk layout (documented, bit-exact):
//!
//! ```text
//! <root>/
//!   MANIFEST.json            sensor -> (node, file, kind) map + topology
//!   node_<j>/                one directory per logical node
//!     <sensor>.seg           append-only sequence of segment records
//! ```
//!
//! Each segment record is a fixed 36-byte header followed by the codec
//! payload, all integers little-endian:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "TSG1"
//! 4       1     codec id (0 none, 1 delta_varint, 2 xor_float, 3 dict_string)
//! 5       1     value kind (0 integer, 1 float, 2 string)
//! 6       2     reserved, zero
//! 8       4     point count (u32)
//! 12      8     first timestamp, ms (i64)
//! 20      8     last timestamp, ms (i64)
//! 28      4     payload length (u32)
//! 32      4     CRC32 (IEEE) of the payload (u32)
//! 36      ...   payload (see the codec module for payload layouts)
//! ```
//!
//! Sensors are partitioned across nodes by id hash. `scale_out` adds a node
//! and migrates roughly `1/(m+1)` of the sensors to it in a background
//! thread while traffic continues; per-sensor locks make each move atomic.
//! Queries see flushed segments only (read-your-own-writes holds after
//! `flush`, not before). `disk_usage` is everything under the root,
//! manifest included.

use std::collections::HashMap;
use std::fs;
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::thread::JoinHandle;

use tsbench_core::codec::{decode_segment, encode_segment, CodecId};
use tsbench_core::query::Row;
use tsbench_core::rng::mix64;
use tsbench_core::workload::query::{AggFn, QuerySpec, QueryTemplate};
use tsbench_core::{DataPoint, Timestamp, Value, ValueKind};

use super::{Descriptor, InsertAck, ScaleOutOutcome, SutAdapter, SutError};

const MAGIC: [u8; 4] = *b"TSG1";
const HEADER_LEN: usize = 36;
const MANIFEST: &str = "MANIFEST.json";

#[derive(Debug, Clone, Copy)]
pub struct StoreConfig {
    pub initial_nodes: u32,
    pub scalable: bool,
    pub segment_points: u32,
    /// Store segments uncompressed (the `none` codec) instead of the
    /// per-kind codecs. The incompressible baseline for compression tests.
    pub raw_codec: bool,
}

impl Default for StoreConfig {
    fn default() -> Self {
        StoreConfig { initial_nodes: 1, scalable: true, segment_points: 4096, raw_codec: false }
    }
}

#[derive(Debug, Clone, Copy)]
struct SegMeta {
    offset: u64,
    payload_len: u32,
    codec: CodecId,
    first_ts: Timestamp,
    last_ts: Timestamp,
}

struct SensorState {
    file: String,
    node: u32,
    kind: Option<ValueKind>,
    buffer: Vec<(Timestamp, Value)>,
    segments: Vec<SegMeta>,
}

struct StoreInner {
    root: PathBuf,
    cfg: StoreConfig,
    nodes: AtomicU32,
    sensors: RwLock<HashMap<Arc<str>, Arc<Mutex<SensorState>>>>,
    migration: Mutex<Option<JoinHandle<()>>>,
    manifest_lock: Mutex<()>,
}

pub struct ReferenceStore {
    inner: Arc<StoreInner>,
}

fn node_dir(root: &Path, node: u32) -> PathBuf {
    root.join(format!("node_{node}"))
}

fn sensor_hash(id: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in id.as_bytes() {
        h = mix64(h ^ *b as u64);
    }
    h
}

fn file_name_for(id: &str) -> String {
    let safe = id.len() <= 100
        && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-' || b == b'.');
    if safe {
        format!("{id}.seg")
    } else {
        format!("s{:016x}.seg", sensor_hash(id))
    }
}

fn kind_byte(kind: ValueKind) -> u8 {
    match kind {
        ValueKind::Integer => 0,
        ValueKind::Float => 1,
        ValueKind::Text => 2,
    }
}

fn kind_from_byte(b: u8) -> Option<ValueKind> {
    match b {
        0 => Some(ValueKind::Integer),
        1 => Some(ValueKind::Float),
        2 => Some(ValueKind::Text),
        _ => None,
    }
}

impl ReferenceStore {
    /// Create a fresh store under `root`, wiping any previous contents.
    pub fn create(root: &Path, cfg: StoreConfig) -> Result<Self, SutError> {
        if cfg.initial_nodes == 0 || cfg.segment_points == 0 {
            return Err(SutError::Unavailable("nodes and segment_points must be positive".into()));
        }
        if root.exists() {
            fs::remove_dir_all(root)?;
        }
        fs::create_dir_all(root)?;
        for n in 0..cfg.initial_nodes {
            fs::create_dir_all(node_dir(root, n))?;
        }
        let store = ReferenceStore {
            inner: Arc::new(StoreInner {
                root: root.to_path_buf(),
                cfg,
                nodes: AtomicU32::new(cfg.initial_nodes),
                sensors: RwLock::new(HashMap::new()),
                migration: Mutex::new(None),
                manifest_lock: Mutex::new(()),
            }),
        };
        store.inner.write_manifest()?;
        Ok(store)
    }

    /// Open an existing store read-mostly (a second client connection).
    /// Rebuilds the segment index by scanning each sensor file.
    pub fn open(root: &Path) -> Result<Self, SutError> {
        let manifest = Manifest::read(&root.join(MANIFEST))?;
        let cfg = StoreConfig {
            initial_nodes: manifest.initial_nodes,
            scalable: manifest.scalable,
            segment_points: manifest.segment_points,
            raw_codec: manifest.raw_codec,
        };
        let mut sensors = HashMap::new();
        for (id, entry) in &manifest.sensors {
            let path = node_dir(root, entry.node).join(&entry.file);
            let segments = scan_segments(&path)?;
            let kind = segments.first().map(|_| entry.kind()).transpose()?;
            sensors.insert(
                Arc::from(id.as_str()),
                Arc::new(Mutex::new(SensorState {
                    file: entry.file.clone(),
                    node: entry.node,
                    kind,
                    buffer: Vec::new(),
                    segments,
                })),
            );
        }
        Ok(ReferenceStore {
            inner: Arc::new(StoreInner {
                root: root.to_path_buf(),
                cfg,
                nodes: AtomicU32::new(manifest.nodes),
                sensors: RwLock::new(sensors),
                migration: Mutex::new(None),
                manifest_lock: Mutex::new(()),
            }),
        })
    }
}

impl StoreInner {
    fn sensor_entry(&self, id: &Arc<str>) -> Arc<Mutex<SensorState>> {
        if let Some(state) = self.sensors.read().unwrap().get(id) {
            return state.clone();
        }
        let mut map = self.sensors.write().unwrap();
        map.entry(id.clone())
            .or_insert_with(|| {
                let nodes = self.nodes.load(Ordering::Acquire);
                Arc::new(Mutex::new(SensorState {
                    file: file_name_for(id),
                    node: (sensor_hash(id) % nodes as u64) as u32,
                    kind: None,
                    buffer: Vec::new(),
                    segments: Vec::new(),
                }))
            })
            .clone()
    }

    fn lookup(&self, id: &str) -> Option<Arc<Mutex<SensorState>>> {
        self.sensors.read().unwrap().get(id).cloned()
    }

    /// Encode and append the buffered points as one segment record.
    fn flush_sensor(&self, state: &mut SensorState) -> Result<(), SutError> {
        if state.buffer.is_empty() {
            return Ok(());
        }
        let kind = state.kind.expect("buffered sensors have a kind");
        let codec = if self.cfg.raw_codec { CodecId::None } else { CodecId::for_kind(kind) };
        let payload = encode_segment(&state.buffer, codec)?;
        let count = state.buffer.len() as u32;
        let first_ts = state.buffer.first().unwrap().0;
        let last_ts = state.buffer.last().unwrap().0;

        let mut header = Vec::with_capacity(HEADER_LEN);
        header.extend_from_slice(&MAGIC);
        header.push(codec.as_u8());
        header.push(kind_byte(kind));
        header.extend_from_slice(&0u16.to_le_bytes());
        header.extend_from_slice(&count.to_le_bytes());
        header.extend_from_slice(&first_ts.to_le_bytes());
        header.extend_from_slice(&last_ts.to_le_bytes());
        header.extend_from_slice(&(payload.len() as u32).to_le_bytes());
        header.extend_from_slice(&crc32fast::hash(&payload).to_le_bytes());

        let path = node_dir(&self.root, state.node).join(&state.file);
        let mut file = fs::OpenOptions::new().create(true).append(true).open(&path)?;
        let offset = file.seek(SeekFrom::End(0))?;
        file.write_all(&header)?;
        file.write_all(&payload)?;
        file.sync_data()?;

        state.segments.push(SegMeta {
            offset,
            payload_len: payload.len() as u32,
            codec,
            first_ts,
            last_ts,
        });
        state.buffer.clear();
        Ok(())
    }

    /// Decode every flushed point of one sensor that overlaps `[start, end]`,
    /// sorted by timestamp.
    fn sensor_points(
        &self,
        id: &str,
        start: Timestamp,
        end: Timestamp,
    ) -> Result<Vec<(Timestamp, Value)>, SutError> {
        let Some(entry) = self.lookup(id) else { return Ok(Vec::new()) };
        // Snapshot location and overlapping segment metadata, then read with
        // the sensor unlocked. A concurrent migration renames the file
        // atomically, so a read that loses the race re-resolves and retries.
        for _attempt in 0..4 {
            let (node, file, segs) = {
                let state = entry.lock().unwrap();
                let segs: Vec<SegMeta> = state
                    .segments
                    .iter()
                    .filter(|m| m.first_ts <= end && m.last_ts >= start)
                    .copied()
                    .collect();
                (state.node, state.file.clone(), segs)
            };
            if segs.is_empty() {
                return Ok(Vec::new());
            }
            match self.read_segments(node, &file, &segs, start, end) {
                Ok(points) => {
                    let mut points = points;
                    points.sort_by_key(|(t, _)| *t);
                    return Ok(points);
                }
                Err(SutError::Io(e)) if e.kind() == std::io::ErrorKind::NotFound => continue,
                Err(other) => return Err(other),
            }
        }
        Err(SutError::Unavailable("sensor file moved repeatedly during reads".into()))
    }

    fn read_segments(
        &self,
        node: u32,
        file: &str,
        segs: &[SegMeta],
        start: Timestamp,
        end: Timestamp,
    ) -> Result<Vec<(Timestamp, Value)>, SutError> {
        let path = node_dir(&self.root, node).join(file);
        let mut f = fs::File::open(&path)?;
        let mut out = Vec::new();
        for meta in segs {
            f.seek(SeekFrom::Start(meta.offset + HEADER_LEN as u64))?;
            let mut payload = vec![0u8; meta.payload_len as usize];
            f.read_exact(&mut payload)?;
            let mut points = decode_segment(&payload, meta.codec)?;
            points.retain(|(t, _)| *t >= start && *t <= end);
            out.append(&mut points);
        }
        Ok(out)
    }

    fn write_manifest(&self) -> Result<(), SutError> {
        let _guard = self.manifest_lock.lock().unwrap();
        let mut manifest = Manifest {
            version: 1,
            nodes: self.nodes.load(Ordering::Acquire),
            initial_nodes: self.cfg.initial_nodes,
            scalable: self.cfg.scalable,
            segment_points: self.cfg.segment_points,
            raw_codec: self.cfg.raw_codec,
            sensors: std::collections::BTreeMap::new(),
        };
        for (id, entry) in self.sensors.read().unwrap().iter() {
            let state = entry.lock().unwrap();
            manifest.sensors.insert(
                id.to_string(),
                ManifestSensor {
                    node: state.node,
                    file: state.file.clone(),
                    kind: state.kind.map(kind_byte).unwrap_or(255),
                },
            );
        }
        let tmp = self.root.join("MANIFEST.tmp");
        fs::write(&tmp, serde_json::to_vec_pretty(&manifest).expect("manifest serializes"))?;
        fs::rename(&tmp, self.root.join(MANIFEST))?;
        Ok(())
    }

    fn join_migration(&self) {
        if let Some(handle) = self.migration.lock().unwrap().take() {
            let _ = handle.join();
        }
    }
}

#[derive(serde::Serialize, serde::Deserialize)]
struct Manifest {
    version: u32,
    nodes: u32,
    initial_nodes: u32,
    scalable: bool,
    segment_points: u32,
    #[serde(default)]
    raw_codec: bool,
    sensors: std::collections::BTreeMap<String, ManifestSensor>,
}

#[derive(serde::Serialize, serde::Deserialize)]
struct ManifestSensor {
    node: u32,
    file: String,
    kind: u8,
}

impl ManifestSensor {
    fn kind(&self) -> Result<ValueKind, SutError> {
        kind_from_byte(self.kind)
            .ok_or_else(|| SutError::Corrupt(format!("manifest kind byte {}", self.kind)))
    }
}

impl Manifest {
    fn read(path: &Path) -> Result<Self, SutError> {
        let bytes = fs::read(path)?;
        serde_json::from_slice(&bytes)
            .map_err(|e| SutError::Corrupt(format!("manifest parse: {e}")))
    }
}

fn scan_segments(path: &Path) -> Result<Vec<SegMeta>, SutError> {
    let mut segments = Vec::new();
    let mut file = match fs::File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(segments),
        Err(e) => return Err(e.into()),
    };
    let len = file.metadata()?.len();
    let mut offset = 0u64;
    let mut header = [0u8; HEADER_LEN];
    while offset + HEADER_LEN as u64 <= len {
        file.seek(SeekFrom::Start(offset))?;
        file.read_exact(&mut header)?;
        if header[0..4] != MAGIC {
            return Err(SutError::Corrupt(format!("bad segment magic at offset {offset}")));
        }
        let codec = CodecId::from_u8(header[4])
            .ok_or_else(|| SutError::Corrupt(format!("bad codec id {}", header[4])))?;
        let first_ts = i64::from_le_bytes(header[12..20].try_into().unwrap());
        let last_ts = i64::from_le_bytes(header[20..28].try_into().unwrap());
        let payload_len = u32::from_le_bytes(header[28..32].try_into().unwrap());
        segments.push(SegMeta { offset, payload_len, codec, first_ts, last_ts });
        offset += (HEADER_LEN as u32 + payload_len) as u64;
    }
    if offset != len {
        return Err(SutError::Corrupt("trailing bytes after last segment".into()));
    }
    Ok(segments)
}

fn dir_size(path: &Path) -> std::io::Result<u64> {
    let mut total = 0;
    for entry in fs::read_dir(path)? {
        let entry = entry?;
        let meta = entry.metadata()?;
        if meta.is_dir() {
            total += dir_size(&entry.path())?;
        } else {
            total += meta.len();
        }
    }
    Ok(total)
}

// Query evaluation over decoded segments. Independent of the brute-force
// oracle in the core crate, but pinned to the same semantics (see its module
// docs): inclusive ranges, (sensor, timestamp) row order, canonical function
// order, ascending-timestamp folds.

fn fold_avg(points: &[(Timestamp, Value)]) -> Result<Value, SutError> {
    let mut sum = 0.0f64;
    for (_, v) in points {
        match v.as_f64() {
            Some(x) => sum += x,
            None => {
                return Err(tsbench_core::Error::MalformedQuery {
                    reason: "avg over a string sensor".into(),
                }
                .into())
            }
        }
    }
    Ok(Value::Float(sum / points.len() as f64))
}

fn fold_extreme(points: &[(Timestamp, Value)], want_max: bool) -> Value {
    let mut best = &points[0].1;
    for (_, v) in &points[1..] {
        let greater = match (v, best) {
            (Value::Float(a), Value::Float(b)) => a.total_cmp(b).is_gt(),
            (Value::Integer(a), Value::Integer(b)) => a > b,
            (Value::Text(a), Value::Text(b)) => a.as_bytes() > b.as_bytes(),
            _ => false,
        };
        if greater == want_max {
            best = v;
        }
    }
    best.clone()
}

fn fold(points: &[(Timestamp, Value)], func: AggFn) -> Result<Value, SutError> {
    match func {
        AggFn::Avg => fold_avg(points),
        AggFn::Max => Ok(fold_extreme(points, true)),
        AggFn::Min => Ok(fold_extreme(points, false)),
        AggFn::First => Ok(points[0].1.clone()),
        AggFn::Last => Ok(points[points.len() - 1].1.clone()),
    }
}

impl StoreInner {
    fn eval_query(&self, spec: &QuerySpec) -> Result<Vec<Row>, SutError> {
        spec.validate()?;
        let mut rows = Vec::new();
        // spec.sensors is sorted and deduplicated by construction.
        for sensor in &spec.sensors {
            let points = self.sensor_points(sensor, spec.start_ms, spec.end_ms)?;
            if points.is_empty() {
                continue;
            }
            match spec.template {
                QueryTemplate::TimeRange => {
                    rows.extend(points.into_iter().map(|(t, v)| Row::Point {
                        sensor: sensor.clone(),
                        timestamp_ms: t,
                        value: v,
                    }));
                }
                QueryTemplate::Filtered => {
                    let cond = spec.condition.as_ref().unwrap();
                    rows.extend(points.into_iter().filter(|(_, v)| cond.matches(v)).map(
                        |(t, v)| Row::Point { sensor: sensor.clone(), timestamp_ms: t, value: v },
                    ));
                }
                QueryTemplate::Aggregation => {
                    for func in &spec.agg_functions {
                        rows.push(Row::Aggregate {
                            sensor: sensor.clone(),
                            func: *func,
                            value: fold(&points, *func)?,
                        });
                    }
                }
                QueryTemplate::Downsample => {
                    let unit = spec.unit_ms;
                    let mut i = 0;
                    while i < points.len() {
                        let bucket = (points[i].0 - spec.start_ms) / unit;
                        let mut j = i + 1;
                        while j < points.len() && (points[j].0 - spec.start_ms) / unit == bucket {
                            j += 1;
                        }
                        rows.push(Row::Bucket {
                            sensor: sensor.clone(),
                            bucket_start_ms: spec.start_ms + bucket * unit,
                            value: fold(&points[i..j], spec.bucket_agg)?,
                        });
                        i = j;
                    }
                }
            }
        }
        Ok(rows)
    }
}

impl SutAdapter for ReferenceStore {
    fn descriptor(&self) -> Descriptor {
        Descriptor {
            name: "reference".into(),
            nodes: self.inner.nodes.load(Ordering::Acquire),
            scalable: self.inner.cfg.scalable,
            verifiable: true,
        }
    }

    fn insert(&self, batch: &[DataPoint]) -> Result<InsertAck, SutError> {
        if batch.is_empty() {
            return Ok(InsertAck::default());
        }
        // Validate the whole batch before mutating anything.
        let mut last_seen: HashMap<&str, Timestamp> = HashMap::new();
        let mut kinds: HashMap<&str, ValueKind> = HashMap::new();
        for p in batch {
            if let Some(prev) = last_seen.get(p.sensor.as_ref()) {
                if p.timestamp_ms <= *prev {
                    return Err(SutError::OrderingViolation {
                        sensor: p.sensor.to_string(),
                        reason: format!("{} after {prev}", p.timestamp_ms),
                    });
                }
            }
            last_seen.insert(p.sensor.as_ref(), p.timestamp_ms);
            let kind = kinds.entry(p.sensor.as_ref()).or_insert_with(|| p.value.kind());
            if *kind != p.value.kind() {
                return Err(SutError::KindChange {
                    sensor: p.sensor.to_string(),
                    reason: format!("{} then {}", kind.name(), p.value.kind().name()),
                });
            }
        }

        let mut ack = InsertAck::default();
        let mut i = 0;
        while i < batch.len() {
            // Consecutive run of one sensor.
            let sensor = &batch[i].sensor;
            let mut j = i + 1;
            while j < batch.len() && batch[j].sensor == *sensor {
                j += 1;
            }
            let entry = self.inner.sensor_entry(sensor);
            let mut state = entry.lock().unwrap();
            if let Some(kind) = state.kind {
                if kind != batch[i].value.kind() {
                    return Err(SutError::KindChange {
                        sensor: sensor.to_string(),
                        reason: format!("{} then {}", kind.name(), batch[i].value.kind().name()),
                    });
                }
            } else {
                state.kind = Some(batch[i].value.kind());
            }
            for p in &batch[i..j] {
                state.buffer.push((p.timestamp_ms, p.value.clone()));
                ack.points += 1;
                ack.bytes += p.encoded_size();
            }
            if state.buffer.len() >= self.inner.cfg.segment_points as usize {
                self.inner.flush_sensor(&mut state)?;
            }
            drop(state);
            i = j;
        }
        Ok(ack)
    }

    fn query(&self, spec: &QuerySpec) -> Result<Vec<Row>, SutError> {
        self.inner.eval_query(spec)
    }

    fn scale_out(&self) -> Result<ScaleOutOutcome, SutError> {
        if !self.inner.cfg.scalable {
            return Ok(ScaleOutOutcome::NonScalable);
        }
        self.inner.join_migration();
        let new_nodes = self.inner.nodes.load(Ordering::Acquire) + 1;
        fs::create_dir_all(node_dir(&self.inner.root, new_nodes - 1))?;
        self.inner.nodes.store(new_nodes, Ordering::Release);

        // Pick roughly 1/(m+1) of the sensors and move them in the
        // background, one atomic rename per sensor.
        let movers: Vec<Arc<str>> = self
            .inner
            .sensors
            .read()
            .unwrap()
            .keys()
            .filter(|id| mix64(sensor_hash(id) ^ new_nodes as u64).is_multiple_of(new_nodes as u64))
            .cloned()
            .collect();
        let inner = self.inner.clone();
        let handle = std::thread::spawn(move || {
            for id in movers {
                let Some(entry) = inner.lookup(&id) else { continue };
                let mut state = entry.lock().unwrap();
                if state.node == new_nodes - 1 {
                    continue;
                }
                let from = node_dir(&inner.root, state.node).join(&state.file);
                let to = node_dir(&inner.root, new_nodes - 1).join(&state.file);
                if from.exists() && fs::rename(&from, &to).is_err() {
                    continue;
                }
                state.node = new_nodes - 1;
            }
            let _ = inner.write_manifest();
        });
        *self.inner.migration.lock().unwrap() = Some(handle);
        Ok(ScaleOutOutcome::ScaledTo(self.descriptor()))
    }

    fn disk_usage(&self) -> Result<u64, SutError> {
        self.inner.join_migration();
        Ok(dir_size(&self.inner.root)?)
    }

    fn flush(&self) -> Result<(), SutError> {
        let entries: Vec<Arc<Mutex<SensorState>>> =
            self.inner.sensors.read().unwrap().values().cloned().collect();
        for entry in entries {
            let mut state = entry.lock().unwrap();
            self.inner.flush_sensor(&mut state)?;
        }
        self.inner.write_manifest()?;
        Ok(())
    }

    fn cleanup(&self) -> Result<(), SutError> {
        self.inner.join_migration();
        self.inner.sensors.write().unwrap().clear();
        self.inner.nodes.store(self.inner.cfg.initial_nodes, Ordering::Release);
        if self.inner.root.exists() {
            fs::remove_dir_all(&self.inner.root)?;
        }
        fs::create_dir_all(&self.inner.root)?;
        for n in 0..self.inner.cfg.initial_nodes {
            fs::create_dir_all(node_dir(&self.inner.root, n))?;
        }
        self.inner.write_manifest()?;
        Ok(())
    }
}

impl Drop for ReferenceStore {
    fn drop(&mut self) {
        self.inner.join_migration();
    }
}
