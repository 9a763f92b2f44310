//! Point cloud files.
//!
//! Binary layout (little-endian): magic `PCBL`, `u32` point count, `u8`
//! has-labels flag, then per point three `f32` coordinates `x, y, z` followed
//! by a `u16` label when the flag is set. CSV files carry a header row with
//! columns `x,y,z` and optionally `label`.

use std::io::{Read, Write};
use std::path::Path;

use super::PointCloud;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"PCBL";

pub fn read_binary<R: Read>(mut reader: R) -> Result<PointCloud> {
    let mut header = [0u8; 9];
    reader.read_exact(&mut header)?;
    if &header[..4] != MAGIC {
        return Err(Error::Parse("point cloud: bad magic, expected PCBL".into()));
    }
    let count = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let has_labels = match header[8] {
        0 => false,
        1 => true,
        other => {
            return Err(Error::Parse(format!(
                "point cloud: has_labels flag {other} is not 0 or 1"
            )))
        }
    };

    let stride = 12 + if has_labels { 2 } else { 0 };
    let mut body = Vec::new();
    reader.read_to_end(&mut body)?;
    if body.len() != count * stride {
        return Err(Error::Parse(format!(
            "point cloud: header declares {count} points ({} bytes) but body has {} bytes",
            count * stride,
            body.len()
        )));
    }

    let mut points = Vec::with_capacity(count);
    let mut labels = has_labels.then(|| Vec::with_capacity(count));
    for rec in body.chunks_exact(stride) {
        let f = |i: usize| f32::from_le_bytes(rec[i * 4..i * 4 + 4].try_into().unwrap()) as f64;
        points.push([f(0), f(1), f(2)]);
        if let Some(l) = labels.as_mut() {
            l.push(u16::from_le_bytes([rec[12], rec[13]]) as u32);
        }
    }
    PointCloud::new(points, labels)
}

pub fn write_binary<W: Write>(cloud: &PointCloud, mut writer: W) -> Result<()> {
    let count = u32::try_from(cloud.len())
        .map_err(|_| Error::validation("points", "more than u32::MAX points"))?;
    writer.write_all(MAGIC)?;
    writer.write_all(&count.to_le_bytes())?;
    writer.write_all(&[cloud.labels.is_some() as u8])?;
    for (i, p) in cloud.points.iter().enumerate() {
        for c in p {
            writer.write_all(&(*c as f32).to_le_bytes())?;
        }
        if let Some(labels) = &cloud.labels {
            let l = u16::try_from(labels[i])
                .map_err(|_| Error::validation("labels", "label exceeds u16"))?;
            writer.write_all(&l.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_csv<R: Read>(reader: R) -> Result<PointCloud> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (Some(xi), Some(yi), Some(zi)) = (col("x"), col("y"), col("z")) else {
        return Err(Error::Parse("point cloud CSV needs x,y,z columns".into()));
    };
    let li = col("label");

    let mut points = Vec::new();
    let mut labels = li.map(|_| Vec::new());
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let num = |i: usize| -> Result<f64> {
            record
                .get(i)
                .unwrap_or("")
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("point cloud CSV row {}: {e}", row + 2)))
        };
        points.push([num(xi)?, num(yi)?, num(zi)?]);
        if let (Some(i), Some(l)) = (li, labels.as_mut()) {
            let v =
                record.get(i).unwrap_or("").parse::<u32>().map_err(|e| {
                    Error::Parse(format!("point cloud CSV row {} label: {e}", row + 2))
                })?;
            l.push(v);
        }
    }
    PointCloud::new(points, labels)
}

pub fn write_csv<W: Write>(cloud: &PointCloud, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    if cloud.labels.is_some() {
        w.write_record(["x", "y", "z", "label"])?;
    } else {
        w.write_record(["x", "y", "z"])?;
    }
    for (i, p) in cloud.points.iter().enumerate() {
        let mut rec = vec![p[0].to_string(), p[1].to_string(), p[2].to_string()];
        if let Some(labels) = &cloud.labels {
            rec.push(labels[i].to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a cloud, choosing CSV for `.csv` paths and the binary layout otherwise.
pub fn read_path(path: &Path) -> Result<PointCloud> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        read_csv(file)
    } else {
        read_binary(file)
    }
}
