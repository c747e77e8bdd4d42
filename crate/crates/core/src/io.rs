//! JSON-Lines sequence files: one frame per line,
//! `{"v":1,"t":..,"sensor":..,"pts":[[range,azimuth,vr,rcs],..],"gt":{"class":[..],"inst":[..]},"odom":[vx,omega]}`.
//!
//! `gt` and `odom` are optional and the RCS column may be omitted. Class codes
//! are 0 = static, 1 = moving, 2 = false positive. A missing `v` reads as the
//! current version; any other version is rejected.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::{normalize_azimuth, EgoMotionState, GroundTruthLabels, PointClass, RadarFrame, RadarPoint};

pub const FRAME_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct FrameRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    v: Option<u32>,
    t: f64,
    #[serde(default)]
    sensor: u8,
    pts: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gt: Option<GtRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    odom: Option<[f64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
struct GtRecord {
    class: Vec<u8>,
    inst: Vec<Option<u32>>,
}

pub fn encode_frame(frame: &RadarFrame) -> String {
    let record = FrameRecord {
        v: Some(FRAME_FORMAT_VERSION),
        t: frame.timestamp,
        sensor: frame.sensor_id,
        pts: frame
            .points
            .iter()
            .map(|p| match p.rcs {
                Some(rcs) => vec![p.range, p.azimuth, p.radial_velocity, rcs],
                None => vec![p.range, p.azimuth, p.radial_velocity],
            })
            .collect(),
        gt: frame.gt.as_ref().map(|gt| GtRecord {
            class: gt.class.iter().map(|c| c.code()).collect(),
            inst: gt.instance.clone(),
        }),
        odom: frame.odom.map(|o| [o.speed, o.yaw_rate]),
    };
    serde_json::to_string(&record).expect("frame records always serialize")
}

/// Parses one line. Azimuths are wrapped into `[-π, π)`.
pub fn decode_frame(line: &str) -> Result<RadarFrame> {
    let fmt_err = |message: String| Error::Format {
        context: "frame".into(),
        message,
    };
    let record: FrameRecord = serde_json::from_str(line).map_err(|e| fmt_err(e.to_string()))?;
    if let Some(v) = record.v {
        if v != FRAME_FORMAT_VERSION {
            return Err(Error::Version {
                what: "frame record",
                found: v,
                expected: FRAME_FORMAT_VERSION,
            });
        }
    }
    let points = record
        .pts
        .iter()
        .enumerate()
        .map(|(i, p)| match p.as_slice() {
            &[r, a, vr] => Ok(RadarPoint::new(r, normalize_azimuth(a), vr)),
            &[r, a, vr, rcs] => Ok(RadarPoint::new(r, normalize_azimuth(a), vr).with_rcs(rcs)),
            _ => Err(fmt_err(format!("point {i} has {} columns, expected 3 or 4", p.len()))),
        })
        .collect::<Result<Vec<_>>>()?;
    let gt = match record.gt {
        None => None,
        Some(g) => {
            if g.class.len() != points.len() || g.inst.len() != points.len() {
                return Err(fmt_err(format!(
                    "gt has {} classes / {} instance ids for {} points",
                    g.class.len(),
                    g.inst.len(),
                    points.len()
                )));
            }
            let class = g
                .class
                .iter()
                .map(|&c| PointClass::from_code(c).ok_or_else(|| fmt_err(format!("unknown class code {c}"))))
                .collect::<Result<Vec<_>>>()?;
            Some(GroundTruthLabels {
                class,
                instance: g.inst,
            })
        }
    };
    Ok(RadarFrame {
        timestamp: record.t,
        sensor_id: record.sensor,
        points,
        gt,
        odom: record.odom.map(|[v, w]| EgoMotionState::new(v, w)),
    })
}

pub fn write_frames<W: Write>(mut out: W, frames: &[RadarFrame]) -> std::io::Result<()> {
    for f in frames {
        out.write_all(encode_frame(f).as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_frames<R: BufRead>(input: R) -> Result<Vec<RadarFrame>> {
    let mut frames = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::Format {
            context: format!("line {}", lineno + 1),
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let frame = decode_frame(&line).map_err(|e| match e {
            Error::Format { message, .. } => Error::Format {
                context: format!("line {}", lineno + 1),
                message,
            },
            other => other,
        })?;
        frames.push(frame);
    }
    Ok(frames)
}

pub fn write_sequence(path: impl AsRef<Path>, frames: &[RadarFrame]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_frames(BufWriter::new(file), frames).map_err(|e| Error::io(path, e))
}

pub fn read_sequence(path: impl AsRef<Path>) -> Result<Vec<RadarFrame>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_frames(BufReader::new(file)).map_err(|e| match e {
        Error::Format { context, message } => Error::Format {
            context: format!("{}: {context}", path.display()),
            message,
        },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_matches_documented_layout() {
        let frame = RadarFrame {
            timestamp: 1.25,
            sensor_id: 3,
            points: vec![RadarPoint::new(10.0, 0.5, -3.0).with_rcs(2.0)],
            gt: Some(GroundTruthLabels {
                class: vec![PointClass::Moving],
                instance: vec![Some(7)],
            }),
            odom: Some(EgoMotionState::new(8.0, 0.1)),
        };
        let line = encode_frame(&frame);
        assert_eq!(
            line,
            r#"{"v":1,"t":1.25,"sensor":3,"pts":[[10.0,0.5,-3.0,2.0]],"gt":{"class":[1],"inst":[7]},"odom":[8.0,0.1]}"#
        );
        assert_eq!(decode_frame(&line).unwrap(), frame);
    }

    #[test]
    fn optional_fields_and_three_columns() {
        let f = decode_frame(r#"{"t":0.0,"sensor":1,"pts":[[1.0,4.0,0.5]]}"#).unwrap();
        assert!(f.gt.is_none() && f.odom.is_none());
        assert_eq!(f.points[0].rcs, None);
        // ingestion wraps the azimuth
        assert!((f.points[0].azimuth - (4.0 - 2.0 * std::f64::consts::PI)).abs() < 1e-15);
    }

    #[test]
    fn unknown_version_rejected() {
        let err = decode_frame(r#"{"v":2,"t":0.0,"sensor":1,"pts":[]}"#).unwrap_err();
        assert!(matches!(err, Error::Version { found: 2, .. }));
    }

    #[test]
    fn malformed_points_rejected() {
        assert!(decode_frame(r#"{"t":0.0,"pts":[[1.0,2.0]]}"#).is_err());
        assert!(decode_frame(r#"{"t":0.0,"pts":[[1.0,0.0,0.0]],"gt":{"class":[5],"inst":[null]}}"#).is_err());
        assert!(decode_frame(r#"{"t":0.0,"pts":[[1.0,0.0,0.0]],"gt":{"class":[],"inst":[]}}"#).is_err());
    }

    #[test]
    fn reader_reports_line_number() {
        let text = "{\"t\":0.0,\"pts\":[]}\nnot json\n";
        let err = read_frames(text.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }
}
