//! Point files for `fit` and `predict`: `group,item,score,f1,f2,…`.
//!
//! An optional header row is skipped when its first field is not numeric. An
//! empty score marks an unscored point.

use std::io::{Read, Write};

use rankpursuit::{DataPoint, ScoredDataset, UnscoredDataset};

use crate::error::{HarnessError, Result};

fn data_err(line: usize, msg: impl std::fmt::Display) -> HarnessError {
    HarnessError::Data(format!("line {line}: {msg}"))
}

pub fn read_points<R: Read>(reader: R) -> Result<Vec<DataPoint>> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut points = Vec::new();
    let mut dim = None;
    for (i, record) in csv.records().enumerate() {
        let line = i + 1;
        let record = record.map_err(|e| data_err(line, e))?;
        if i == 0 && record.get(0).is_some_and(|f| f.parse::<u64>().is_err()) {
            continue;
        }
        if record.len() < 4 {
            return Err(data_err(line, "expected group,item,score and at least one feature"));
        }
        let group = record[0].parse::<u64>().map_err(|e| data_err(line, e))?;
        let item = record[1].parse::<u64>().map_err(|e| data_err(line, e))?;
        let score = match &record[2] {
            "" => None,
            s => Some(s.parse::<f64>().map_err(|e| data_err(line, e))?),
        };
        let features = record
            .iter()
            .skip(3)
            .map(|f| f.parse::<f64>().map_err(|e| data_err(line, e)))
            .collect::<Result<Vec<_>>>()?;
        if *dim.get_or_insert(features.len()) != features.len() {
            return Err(data_err(line, "feature count differs from the first row"));
        }
        points.push(match score {
            Some(s) => DataPoint::scored(group, item, features, s),
            None => DataPoint::unscored(group, item, features),
        });
    }
    Ok(points)
}

/// Splits points into the scored and unscored sets.
pub fn partition(points: Vec<DataPoint>) -> Result<(ScoredDataset, UnscoredDataset)> {
    let (scored, unscored): (Vec<_>, Vec<_>) = points.into_iter().partition(|p| p.score.is_some());
    if scored.is_empty() {
        return Err(HarnessError::Data("no scored points".into()));
    }
    Ok((ScoredDataset::new(scored)?, UnscoredDataset::new(unscored)?))
}

pub fn write_predictions<W: Write>(points: &[DataPoint], predictions: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| HarnessError::Data(e.to_string());
    w.write_record(["group", "item", "prediction"]).map_err(io)?;
    for (p, f) in points.iter().zip(predictions) {
        w.write_record([p.group_id.to_string(), p.item_id.to_string(), f.to_string()]).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_points<W: Write>(points: &[DataPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| HarnessError::Data(e.to_string());
    for p in points {
        let mut row = vec![p.group_id.to_string(), p.item_id.to_string(), p.score.map_or(String::new(), |s| s.to_string())];
        row.extend(p.features.iter().map(f64::to_string));
        w.write_record(&row).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_unscored_rows() {
        let text = "group,item,score,f1,f2\n1,10,2.5,0.1,0.2\n1,11,,0.3,0.4\n2,10,-1,0.5,0.6\n";
        let pts = read_points(text.as_bytes()).unwrap();
        assert_eq!(pts.len(), 3);
        assert_eq!(pts[1].score, None);
        assert_eq!(pts[2].features, vec![0.5, 0.6]);
        let (s, u) = partition(pts).unwrap();
        assert_eq!((s.len(), u.len()), (2, 1));
    }

    #[test]
    fn round_trip() {
        let pts = vec![
            DataPoint::scored(3, 1, vec![0.1, -2.0], 1.0 / 3.0),
            DataPoint::unscored(3, 2, vec![1e-300, 7.0]),
        ];
        let mut buf = Vec::new();
        write_points(&pts, &mut buf).unwrap();
        assert_eq!(read_points(buf.as_slice()).unwrap(), pts);
    }

    #[test]
    fn ragged_rows_fail() {
        assert!(read_points("1,1,1,0.5\n1,2,1,0.5,0.6\n".as_bytes()).is_err());
        assert!(read_points("1,1,x,0.5\n".as_bytes()).is_err());
    }
}
