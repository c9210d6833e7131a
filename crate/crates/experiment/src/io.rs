//! Data files: one object per line, optional `label:<n>` prefix.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use simsearch_core::{DataSet, ObjectRecord, Space};

use crate::error::{Error, Result};

/// Reads up to `max_num` objects (`0` = all). Blank lines are skipped.
///
/// Objects with a dense dimensionality must all agree on it.
pub fn load_dataset(space: &dyn Space, path: &Path, max_num: usize) -> Result<DataSet> {
    let recs = read_records(space, path, max_num)?;
    Ok(DataSet::from_records(space.name(), recs))
}

/// Like [`load_dataset`] but keeps the records as they are, e.g. for pivot files.
pub fn read_records(space: &dyn Space, path: &Path, max_num: usize) -> Result<Vec<ObjectRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_records(space, BufReader::new(file), max_num).map_err(|e| match e {
        Error::Core(source) => Error::Data {
            path: path.into(),
            source,
        },
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn parse_records(space: &dyn Space, reader: impl BufRead, max_num: usize) -> Result<Vec<ObjectRecord>> {
    let mut out = Vec::new();
    let mut dim: Option<(usize, usize)> = None;
    for (lineno, line) in reader.lines().enumerate() {
        if max_num > 0 && out.len() == max_num {
            break;
        }
        let line = line.map_err(|e| Error::io("<input>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = space
            .parse_line(out.len() as u32, &line)
            .map_err(|e| e.at_line(lineno + 1))?;
        if let Some(d) = space.dimension(rec.view()) {
            match dim {
                None => dim = Some((d, lineno + 1)),
                Some((want, first)) if want != d => {
                    return Err(simsearch_core::Error::Parse {
                        line: Some(lineno + 1),
                        msg: format!("dimension {d} differs from {want} (line {first})"),
                    }
                    .into())
                }
                _ => {}
            }
        }
        out.push(rec);
    }
    Ok(out)
}

/// Writes records in the same text format, labels included.
pub fn write_dataset(space: &dyn Space, data: &DataSet, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in data.iter() {
        let prefix = simsearch_core::text::label_prefix(r.label());
        writeln!(w, "{prefix}{}", space.format(r.view())).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use simsearch_core::{create_space, DistType};

    #[test]
    fn dense_lines() {
        let space = create_space("l2", DistType::Float).unwrap();
        let text = "label:2 1 2 3\n\n4 5 6\n7 8 9\n";
        let recs = parse_records(&*space, text.as_bytes(), 0).unwrap();
        assert_eq!(recs.len(), 3);
        assert_eq!(recs[0].label(), 2);
        assert_eq!(recs[1].label(), -1);
        assert_eq!(parse_records(&*space, text.as_bytes(), 2).unwrap().len(), 2);
        let err = parse_records(&*space, "1 2\n1 2 3\n".as_bytes(), 0).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn round_trip() {
        let space = create_space("l2", DistType::Float).unwrap();
        let recs = parse_records(&*space, "label:1 0.5 1.5\n2 3\n".as_bytes(), 0).unwrap();
        let data = DataSet::from_records("l2", recs);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.txt");
        write_dataset(&*space, &data, &p).unwrap();
        assert_eq!(load_dataset(&*space, &p, 0).unwrap(), data);
    }
}
