//! Observation sets, train/validation/test sampling and file formats.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::generate::{MtlData, MtlTask};
use crate::error::{Error, Result};

/// Fraction of the sampled entries held out for validation.
pub const VALIDATION_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub fn as_str(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "train" => Some(Split::Train),
            "validation" => Some(Split::Validation),
            "test" => Some(Split::Test),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub row: usize,
    pub col: usize,
    pub value: f64,
    pub split: Split,
}

/// Sparse observations of a `rows × cols` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSet {
    rows: usize,
    cols: usize,
    entries: Vec<Entry>,
}

impl ObservationSet {
    /// Validates bounds, finiteness and uniqueness of `(row, col)`.
    pub fn new(rows: usize, cols: usize, entries: Vec<Entry>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(entries.len());
        for e in &entries {
            if e.row >= rows || e.col >= cols {
                return Err(Error::Validation(format!(
                    "entry ({}, {}) lies outside a {rows}x{cols} matrix",
                    e.row, e.col
                )));
            }
            if !e.value.is_finite() {
                return Err(Error::Validation(format!(
                    "entry ({}, {}) is not finite",
                    e.row, e.col
                )));
            }
            if !seen.insert((e.row, e.col)) {
                return Err(Error::DuplicateEntry {
                    row: e.row,
                    col: e.col,
                });
            }
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    /// Every entry of a dense matrix, tagged `Train`.
    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut entries = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                entries.push(Entry {
                    row: i,
                    col: j,
                    value: m[(i, j)],
                    split: Split::Train,
                });
            }
        }
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &Entry> + '_ {
        self.entries.iter().filter(move |e| e.split == split)
    }

    pub fn count(&self, split: Split) -> usize {
        self.split(split).count()
    }

    /// Observations of one split as `(row, col, value)` triples.
    pub fn triples(&self, split: Split) -> Vec<(usize, usize, f64)> {
        self.split(split).map(|e| (e.row, e.col, e.value)).collect()
    }

    /// Re-tags the entries; `tags` must have one entry per observation.
    pub fn with_splits(&self, tags: &[Split]) -> Result<Self> {
        if tags.len() != self.entries.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} split tags, got {}",
                self.entries.len(),
                tags.len()
            )));
        }
        let entries = self
            .entries
            .iter()
            .zip(tags)
            .map(|(e, &split)| Entry { split, ..*e })
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }
}

/// How many entries to sample for training and validation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SampleMode {
    /// Fraction of all available entries.
    GlobalFraction(f64),
    /// Fixed number of entries per row.
    PerRowCount(usize),
    /// Fraction of each row's available entries.
    PerRowFraction(f64),
}

/// Samples train/validation entries from `source`; the rest become test.
///
/// Of the sampled entries, `round(10%)` are tagged validation.
pub fn sample_mask(source: &ObservationSet, mode: SampleMode, seed: u64) -> Result<ObservationSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = source.len();
    let check_fraction = |f: f64| {
        if (0.0..=1.0).contains(&f) {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "sampling fraction must lie in [0, 1], got {f}"
            )))
        }
    };
    let mut sampled: Vec<usize> = match mode {
        SampleMode::GlobalFraction(f) => {
            check_fraction(f)?;
            let take = (f * n as f64).round() as usize;
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut rng);
            idx.truncate(take);
            idx
        }
        SampleMode::PerRowCount(_) | SampleMode::PerRowFraction(_) => {
            let mut by_row: Vec<Vec<usize>> = vec![Vec::new(); source.rows];
            for (i, e) in source.entries.iter().enumerate() {
                by_row[e.row].push(i);
            }
            let mut out = Vec::new();
            for (row, mut idx) in by_row.into_iter().enumerate() {
                let take = match mode {
                    SampleMode::PerRowCount(c) => {
                        if c > idx.len() {
                            return Err(Error::InvalidParams(format!(
                                "row {row} has {} entries, cannot sample {c}",
                                idx.len()
                            )));
                        }
                        c
                    }
                    SampleMode::PerRowFraction(f) => {
                        check_fraction(f)?;
                        (f * idx.len() as f64).round() as usize
                    }
                    SampleMode::GlobalFraction(_) => unreachable!(),
                };
                idx.shuffle(&mut rng);
                idx.truncate(take);
                out.extend(idx);
            }
            out
        }
    };
    sampled.shuffle(&mut rng);
    let n_val = (VALIDATION_FRACTION * sampled.len() as f64).round() as usize;
    let mut tags = vec![Split::Test; n];
    for (pos, &i) in sampled.iter().enumerate() {
        tags[i] = if pos < n_val {
            Split::Validation
        } else {
            Split::Train
        };
    }
    source.with_splits(&tags)
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, line: usize, what: &str) -> Result<T> {
    let raw = field.ok_or_else(|| Error::Parse {
        line,
        message: format!("missing {what}"),
    })?;
    raw.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("cannot parse {what} from {raw:?}"),
    })
}

/// Reads MovieLens `u.data`: `user<TAB>item<TAB>rating<TAB>timestamp`,
/// 1-based ids, ratings in `1..=5`. Entries are tagged `Train`.
pub fn load_movielens(path: impl AsRef<Path>) -> Result<ObservationSet> {
    parse_movielens(BufReader::new(File::open(path)?))
}

pub fn parse_movielens(reader: impl BufRead) -> Result<ObservationSet> {
    let mut entries = Vec::new();
    let (mut rows, mut cols) = (0, 0);
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected 4 tab-separated fields, found {}", fields.len()),
            });
        }
        let user: usize = parse_field(Some(fields[0]), lineno, "user id")?;
        let item: usize = parse_field(Some(fields[1]), lineno, "item id")?;
        let rating: f64 = parse_field(Some(fields[2]), lineno, "rating")?;
        let _: u64 = parse_field(Some(fields[3]), lineno, "timestamp")?;
        if user == 0 || item == 0 {
            return Err(Error::Parse {
                line: lineno,
                message: "ids are 1-based".into(),
            });
        }
        if !(1.0..=5.0).contains(&rating) {
            return Err(Error::Validation(format!(
                "line {lineno}: rating {rating} outside 1..5"
            )));
        }
        rows = rows.max(user);
        cols = cols.max(item);
        entries.push(Entry {
            row: user - 1,
            col: item - 1,
            value: rating,
            split: Split::Train,
        });
    }
    ObservationSet::new(rows, cols, entries)
}

/// Marker for a missing Jester rating.
pub const JESTER_MISSING: f64 = 99.0;
pub const JESTER_COLUMNS: usize = 100;

/// Reads a dense Jester CSV: one user per line, 100 comma-separated ratings in
/// `[-10, 10]`, `99` for missing. Entries are tagged `Train`.
pub fn load_jester(path: impl AsRef<Path>) -> Result<ObservationSet> {
    parse_jester(BufReader::new(File::open(path)?))
}

pub fn parse_jester(reader: impl BufRead) -> Result<ObservationSet> {
    let mut entries = Vec::new();
    let mut rows = 0;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != JESTER_COLUMNS {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected {JESTER_COLUMNS} columns, found {}", fields.len()),
            });
        }
        for (col, f) in fields.iter().enumerate() {
            let v: f64 = parse_field(Some(f), lineno, "rating")?;
            if v == JESTER_MISSING {
                continue;
            }
            if !(-10.0..=10.0).contains(&v) {
                return Err(Error::Validation(format!(
                    "line {lineno}, column {}: rating {v} outside [-10, 10]",
                    col + 1
                )));
            }
            entries.push(Entry {
                row: rows,
                col,
                value: v,
                split: Split::Train,
            });
        }
        rows += 1;
    }
    ObservationSet::new(rows, JESTER_COLUMNS, entries)
}

/// Writes the lossless text form: a `shape<TAB>rows<TAB>cols` header, then one
/// `row<TAB>col<TAB>value<TAB>split` line per entry.
pub fn write_triplets(set: &ObservationSet, mut out: impl Write) -> Result<()> {
    writeln!(out, "shape\t{}\t{}", set.rows, set.cols)?;
    for e in &set.entries {
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            e.row,
            e.col,
            e.value,
            e.split.as_str()
        )?;
    }
    Ok(())
}

pub fn read_triplets(reader: impl BufRead) -> Result<ObservationSet> {
    let mut lines = reader.lines().enumerate();
    let (rows, cols) = loop {
        let Some((i, line)) = lines.next() else {
            return Err(Error::Parse {
                line: 1,
                message: "missing shape header".into(),
            });
        };
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut f = line.split('\t');
        if f.next() != Some("shape") {
            return Err(Error::Parse {
                line: i + 1,
                message: "expected shape header".into(),
            });
        }
        let r: usize = parse_field(f.next(), i + 1, "row count")?;
        let c: usize = parse_field(f.next(), i + 1, "column count")?;
        break (r, c);
    };
    let mut entries = Vec::new();
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut f = line.split('\t');
        let row = parse_field(f.next(), i + 1, "row")?;
        let col = parse_field(f.next(), i + 1, "column")?;
        let value = parse_field(f.next(), i + 1, "value")?;
        let tag: String = parse_field(f.next(), i + 1, "split")?;
        let split = Split::parse(&tag).ok_or_else(|| Error::Parse {
            line: i + 1,
            message: format!("unknown split {tag:?}"),
        })?;
        entries.push(Entry {
            row,
            col,
            value,
            split,
        });
    }
    ObservationSet::new(rows, cols, entries)
}

/// Reads multitask data from CSV lines `task,split,target,x_1,…,x_p`.
///
/// `task` is a 0-based index, `split` one of `train|validation|test`. A bias
/// feature is prepended, so the model dimension is `p + 1`. A first line
/// starting with `task` is treated as a header.
pub fn load_mtl_csv(path: impl AsRef<Path>) -> Result<MtlData> {
    parse_mtl_csv(BufReader::new(File::open(path)?))
}

pub fn parse_mtl_csv(reader: impl BufRead) -> Result<MtlData> {
    let mut rows: Vec<(usize, Split, f64, Vec<f64>)> = Vec::new();
    let mut width = None;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || (rows.is_empty() && trimmed.starts_with("task")) {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() < 4 {
            return Err(Error::Parse {
                line: lineno,
                message: "expected task,split,target and at least one feature".into(),
            });
        }
        if *width.get_or_insert(fields.len()) != fields.len() {
            return Err(Error::Parse {
                line: lineno,
                message: format!(
                    "expected {} fields, found {}",
                    width.unwrap_or(0),
                    fields.len()
                ),
            });
        }
        let task: usize = parse_field(Some(fields[0]), lineno, "task index")?;
        let split = Split::parse(fields[1].trim()).ok_or_else(|| Error::Parse {
            line: lineno,
            message: format!("unknown split {:?}", fields[1]),
        })?;
        let target: f64 = parse_field(Some(fields[2]), lineno, "target")?;
        let mut x = vec![1.0];
        for f in &fields[3..] {
            x.push(parse_field(Some(f), lineno, "feature")?);
        }
        if !target.is_finite() || x.iter().any(|v: &f64| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "line {lineno}: non-finite value"
            )));
        }
        rows.push((task, split, target, x));
    }
    let Some(width) = width else {
        return Err(Error::InvalidInput(
            "multitask file has no data rows".into(),
        ));
    };
    let dim = width - 2;
    let tasks = rows.iter().map(|r| r.0).max().map_or(0, |t| t + 1);
    let build = |split: Split| -> Vec<MtlTask> {
        (0..tasks)
            .map(|t| {
                let sel: Vec<&(usize, Split, f64, Vec<f64>)> =
                    rows.iter().filter(|r| r.0 == t && r.1 == split).collect();
                let x = DMatrix::from_fn(sel.len(), dim, |i, j| sel[i].3[j]);
                let y = nalgebra::DVector::from_iterator(sel.len(), sel.iter().map(|r| r.2));
                MtlTask { x, y }
            })
            .collect()
    };
    let data = MtlData {
        dim,
        train: build(Split::Train),
        validation: build(Split::Validation),
        test: build(Split::Test),
        truth: None,
    };
    if let Some(t) = data.train.iter().position(|t| t.y.is_empty()) {
        return Err(Error::Validation(format!("task {t} has no training rows")));
    }
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(n: usize, m: usize) -> ObservationSet {
        ObservationSet::from_dense(&DMatrix::from_fn(n, m, |i, j| (i * m + j) as f64))
    }

    #[test]
    fn rejects_duplicates_and_out_of_range() {
        let e = |r, c| Entry {
            row: r,
            col: c,
            value: 1.0,
            split: Split::Train,
        };
        assert!(matches!(
            ObservationSet::new(2, 2, vec![e(0, 0), e(0, 0)]),
            Err(Error::DuplicateEntry { row: 0, col: 0 })
        ));
        assert!(ObservationSet::new(2, 2, vec![e(2, 0)]).is_err());
    }

    #[test]
    fn full_sampling_leaves_no_test() {
        let s = sample_mask(&dense(10, 10), SampleMode::GlobalFraction(1.0), 1).unwrap();
        assert_eq!(s.count(Split::Test), 0);
        assert_eq!(s.count(Split::Validation), 10);
    }

    #[test]
    fn per_row_count_is_exact() {
        let s = sample_mask(&dense(5, 100), SampleMode::PerRowCount(20), 3).unwrap();
        for r in 0..5 {
            let n = s
                .entries()
                .iter()
                .filter(|e| e.row == r && e.split != Split::Test)
                .count();
            assert_eq!(n, 20);
        }
        assert_eq!(s.count(Split::Validation), 10);
        assert!(sample_mask(&dense(2, 3), SampleMode::PerRowCount(4), 0).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_mask(&dense(8, 8), SampleMode::GlobalFraction(0.3), 7).unwrap();
        let b = sample_mask(&dense(8, 8), SampleMode::GlobalFraction(0.3), 7).unwrap();
        assert_eq!(a, b);
        let c = sample_mask(&dense(8, 8), SampleMode::GlobalFraction(0.3), 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn movielens_toy() {
        let s = parse_movielens("1\t1\t5\t0\n2\t3\t3\t0\n1\t2\t1\t0\n".as_bytes()).unwrap();
        assert_eq!((s.rows(), s.cols(), s.len()), (2, 3, 3));
        assert_eq!(s.entries()[1].row, 1);
        assert_eq!(s.entries()[1].col, 2);
        assert!(matches!(
            parse_movielens("1\t1\t5\t0\n1\t1\t4\t0\n".as_bytes()),
            Err(Error::DuplicateEntry { .. })
        ));
        assert!(matches!(
            parse_movielens("1\t1\tx\t0\n".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_movielens("1\t1\t6\t0\n".as_bytes()),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn jester_rows() {
        let missing = vec!["99"; 100].join(",");
        let mut half: Vec<String> = (0..100)
            .map(|i| if i < 36 { "1.5".into() } else { "99".into() })
            .collect();
        let text = format!("{missing}\n{}\n", half.join(","));
        let s = parse_jester(text.as_bytes()).unwrap();
        assert_eq!((s.rows(), s.len()), (2, 36));
        half[0] = "10.5".into();
        assert!(matches!(
            parse_jester(half.join(",").as_bytes()),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            parse_jester("1,2,3".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn mtl_csv() {
        let text =
            "task,split,target,x1,x2\n0,train,1.5,0.1,0.2\n1,train,2,0.3,0.4\n0,test,1,1,1\n";
        let d = parse_mtl_csv(text.as_bytes()).unwrap();
        assert_eq!(d.dim, 3);
        assert_eq!(d.tasks(), 2);
        assert_eq!(
            d.train[0].x.row(0).iter().cloned().collect::<Vec<_>>(),
            vec![1.0, 0.1, 0.2]
        );
        assert_eq!(d.test[1].y.len(), 0);
        assert!(matches!(
            parse_mtl_csv("0,train,1\n".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_mtl_csv("1,train,1,2\n".as_bytes()),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn triplets_round_trip() {
        let mut m = DMatrix::from_fn(3, 4, |i, j| (i as f64 + 0.1) / (j as f64 + 0.3));
        m[(0, 0)] = -1e-300;
        let s = sample_mask(
            &ObservationSet::from_dense(&m),
            SampleMode::GlobalFraction(0.5),
            2,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_triplets(&s, &mut buf).unwrap();
        assert_eq!(read_triplets(buf.as_slice()).unwrap(), s);
    }
}
