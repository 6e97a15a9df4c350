//! Binary tensor files, trace export and model output.
//!
//! Tensor file layout (all little-endian):
//!
//! ```text
//! magic  b"DNT1"
//! N      u32
//! shape  N x u64
//! data   prod(shape) x f64, mode 0 fastest
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::solver::{Algorithm, ModeRecord, SolveTrace, SolverConfig, TraceLevel, TuckerModel};
use crate::tensor::DenseTensor;

pub const MAGIC: &[u8; 4] = b"DNT1";
pub const TRACE_SCHEMA: u32 = 1;

pub fn write_tensor<W: Write>(t: &DenseTensor, mut sink: W) -> Result<()> {
    sink.write_all(MAGIC)?;
    let order = u32::try_from(t.order()).map_err(|_| Error::ShapeOverflow)?;
    sink.write_all(&order.to_le_bytes())?;
    for &d in t.shape() {
        sink.write_all(&(d as u64).to_le_bytes())?;
    }
    for v in t.as_slice() {
        sink.write_all(&v.to_le_bytes())?;
    }
    sink.flush()?;
    Ok(())
}

fn read_exact_or<R: Read>(src: &mut R, buf: &mut [u8], err: fn() -> Error) -> Result<()> {
    src.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => err(),
        _ => Error::Io(e),
    })
}

pub fn read_tensor<R: Read>(mut source: R) -> Result<DenseTensor> {
    let mut magic = [0u8; 4];
    read_exact_or(&mut source, &mut magic, || Error::BadMagic)?;
    if &magic != MAGIC {
        return Err(Error::BadMagic);
    }
    let mut word = [0u8; 4];
    read_exact_or(&mut source, &mut word, || Error::Malformed("truncated header".into()))?;
    let order = u32::from_le_bytes(word) as usize;
    if order == 0 {
        return Err(Error::Malformed("tensor has zero modes".into()));
    }
    let mut shape = Vec::with_capacity(order.min(64));
    let mut volume: usize = 1;
    for _ in 0..order {
        let mut dword = [0u8; 8];
        read_exact_or(&mut source, &mut dword, || Error::Malformed("truncated header".into()))?;
        let d = usize::try_from(u64::from_le_bytes(dword)).map_err(|_| Error::ShapeOverflow)?;
        if d == 0 {
            return Err(Error::Malformed("zero-length mode".into()));
        }
        volume = volume.checked_mul(d).ok_or(Error::ShapeOverflow)?;
        shape.push(d);
    }
    let bytes = volume.checked_mul(8).ok_or(Error::ShapeOverflow)?;
    let mut payload = Vec::new();
    (&mut source).take(bytes as u64).read_to_end(&mut payload)?;
    if payload.len() < bytes {
        return Err(Error::TruncatedPayload);
    }
    let mut probe = [0u8; 1];
    if source.read(&mut probe)? != 0 {
        return Err(Error::Malformed("trailing bytes after payload".into()));
    }
    let data: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    DenseTensor::new(shape, data)
}

pub fn write_tensor_file(t: &DenseTensor, path: impl AsRef<Path>) -> Result<()> {
    write_tensor(t, BufWriter::new(File::create(path)?))
}

pub fn read_tensor_file(path: impl AsRef<Path>) -> Result<DenseTensor> {
    read_tensor(BufReader::new(File::open(path)?))
}

/// SHA-256 of the tensor's file encoding, hex encoded.
pub fn tensor_digest(t: &DenseTensor) -> String {
    let mut bytes = Vec::with_capacity(12 + 8 * (t.order() + t.len()));
    write_tensor(t, &mut bytes).expect("writing to a Vec cannot fail");
    hex::encode(Sha256::digest(&bytes))
}

/// Paths written by [`write_model`]: the core, then one file per factor.
pub fn model_paths(prefix: &Path, order: usize) -> (PathBuf, Vec<PathBuf>) {
    let with = |suffix: String| {
        let mut s = prefix.as_os_str().to_owned();
        s.push(suffix);
        PathBuf::from(s)
    };
    let core = with(".core.dnt".into());
    let factors = (0..order).map(|n| with(format!(".factor{n}.dnt"))).collect();
    (core, factors)
}

/// Writes the core and every factor (as a two-mode tensor) next to `prefix`.
pub fn write_model(model: &TuckerModel, prefix: &Path) -> Result<Vec<PathBuf>> {
    let (core_path, factor_paths) = model_paths(prefix, model.factors.len());
    write_tensor_file(&model.core, &core_path)?;
    for (f, path) in model.factors.iter().zip(&factor_paths) {
        let m = f.as_matrix();
        let t = DenseTensor::new(vec![m.rows(), m.cols()], m.as_slice().to_vec())?;
        write_tensor_file(&t, path)?;
    }
    let mut all = vec![core_path];
    all.extend(factor_paths);
    Ok(all)
}

/// Reads the files written by [`write_model`] back as matrices.
pub fn read_model_factors(prefix: &Path, order: usize) -> Result<Vec<crate::matrix::Matrix>> {
    let (_, paths) = model_paths(prefix, order);
    paths
        .iter()
        .map(|p| {
            let t = read_tensor_file(p)?;
            if t.order() != 2 {
                return Err(Error::Malformed(format!("{} is not a matrix", p.display())));
            }
            let (rows, cols) = (t.shape()[0], t.shape()[1]);
            crate::matrix::Matrix::from_col_major(rows, cols, t.into_vec())
        })
        .collect()
}

/// One trace row: the per-sweep quantities of the convergence plots.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub sweep: usize,
    pub objective: f64,
    pub rel_change: f64,
    pub kkt_aggregate: Option<f64>,
    pub gap_min: f64,
    pub min_mode_gap_index: usize,
    pub degenerate_any: bool,
    pub wall_ms: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
struct TraceRowWithModes<'a> {
    #[serde(flatten)]
    row: TraceRow,
    modes: &'a [ModeRecord],
}

#[derive(Clone, Debug, Serialize)]
struct InputInfo<'a> {
    shape: &'a [usize],
    sha256: String,
}

#[derive(Serialize)]
struct TraceDocument<'a> {
    schema: u32,
    algorithm: Algorithm,
    config: &'a SolverConfig,
    input: InputInfo<'a>,
    ranks: &'a [usize],
    tensor_norm_sq: f64,
    initial_objective: f64,
    stop_reason: &'a crate::solver::StopReason,
    final_kkt_aggregate: f64,
    records: Vec<TraceRowWithModes<'a>>,
}

pub fn trace_rows(trace: &SolveTrace) -> Vec<TraceRow> {
    trace
        .records
        .iter()
        .map(|r| TraceRow {
            sweep: r.sweep,
            objective: r.objective,
            rel_change: r.rel_change,
            kkt_aggregate: r.kkt.as_ref().map(|k| k.aggregate_normalized),
            gap_min: r.gap_min(),
            min_mode_gap_index: r.min_gap_mode(),
            degenerate_any: r.degenerate_any(),
            wall_ms: r.wall_ms,
        })
        .collect()
}

/// Writes the trace as a JSON document with a `schema` header, the full
/// solver config and a digest of the input tensor.
pub fn write_trace_json<W: Write>(trace: &SolveTrace, input: &DenseTensor, mut sink: W) -> Result<()> {
    let full = trace.config.trace_level == TraceLevel::Full;
    let records = trace_rows(trace)
        .into_iter()
        .zip(&trace.records)
        .map(|(row, rec)| TraceRowWithModes { row, modes: if full { &rec.modes } else { &[] } })
        .collect();
    let doc = TraceDocument {
        schema: TRACE_SCHEMA,
        algorithm: trace.config.algorithm,
        config: &trace.config,
        input: InputInfo { shape: input.shape(), sha256: tensor_digest(input) },
        ranks: &trace.ranks,
        tensor_norm_sq: trace.tensor_norm_sq,
        initial_objective: trace.initial_objective,
        stop_reason: &trace.stop_reason,
        final_kkt_aggregate: trace.final_kkt.aggregate_normalized,
        records,
    };
    serde_json::to_writer_pretty(&mut sink, &doc)?;
    sink.write_all(b"\n")?;
    sink.flush()?;
    Ok(())
}

/// Same columns as the JSON records, one row per sweep.
pub fn write_trace_csv<W: Write>(trace: &SolveTrace, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    for row in trace_rows(trace) {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
