use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RatingsFormat {
    /// `user\titem\trating\ttimestamp`, no header.
    #[serde(rename = "movielens-100k-tab")]
    MovielensTab,
    /// Headed CSV with `user,item,rating` and an optional `timestamp` column.
    GenericCsv,
}

impl FromStr for RatingsFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "movielens-100k-tab" => Ok(RatingsFormat::MovielensTab),
            "generic-csv" => Ok(RatingsFormat::GenericCsv),
            other => Err(Error::Config(format!(
                "unknown ratings format {other:?} (expected movielens-100k-tab or generic-csv)"
            ))),
        }
    }
}

impl fmt::Display for RatingsFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RatingsFormat::MovielensTab => "movielens-100k-tab",
            RatingsFormat::GenericCsv => "generic-csv",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rating {
    pub user: u64,
    pub item: u64,
    pub rating: f64,
    #[serde(default)]
    pub timestamp: Option<i64>,
}

/// Ratings with at most one record per (user, item).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RatingsTable {
    records: Vec<Rating>,
}

impl RatingsTable {
    /// Applies the duplicate policy: the later timestamp wins, and on equal
    /// or missing timestamps the later row wins.
    pub fn from_records(rows: Vec<Rating>) -> Self {
        let mut keep: HashMap<(u64, u64), usize> = HashMap::new();
        let mut records: Vec<Rating> = Vec::with_capacity(rows.len());
        for r in rows {
            match keep.get(&(r.user, r.item)) {
                Some(&idx) => {
                    let old = &records[idx];
                    let newer = match (old.timestamp, r.timestamp) {
                        (Some(a), Some(b)) => b >= a,
                        _ => true,
                    };
                    if newer {
                        records[idx] = r;
                    }
                }
                None => {
                    keep.insert((r.user, r.item), records.len());
                    records.push(r);
                }
            }
        }
        RatingsTable { records }
    }

    pub fn records(&self) -> &[Rating] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

pub fn load_ratings(path: &Path, format: RatingsFormat) -> Result<RatingsTable> {
    let file = std::fs::File::open(path).map_err(|e| Error::file(path, e))?;
    parse_ratings(file, format)
}

pub fn parse_ratings<R: Read>(reader: R, format: RatingsFormat) -> Result<RatingsTable> {
    let rows = match format {
        RatingsFormat::MovielensTab => parse_tab(BufReader::new(reader))?,
        RatingsFormat::GenericCsv => parse_csv(reader)?,
    };
    if rows.is_empty() {
        return Err(Error::CorruptData("ratings file has no records".into()));
    }
    Ok(RatingsTable::from_records(rows))
}

fn parse_tab<R: BufRead>(reader: R) -> Result<Vec<Rating>> {
    let mut rows = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim_end_matches('\r').split('\t').collect();
        let err = |msg: String| Error::Parse { line: line_no, msg };
        if fields.len() != 4 {
            return Err(err(format!("expected 4 tab-separated fields, found {}", fields.len())));
        }
        let field = |i: usize, name: &str| -> Result<i64> {
            fields[i]
                .trim()
                .parse()
                .map_err(|_| err(format!("bad {name} {:?}", fields[i])))
        };
        let user = field(0, "user")?;
        let item = field(1, "item")?;
        let rating = field(2, "rating")?;
        let timestamp = field(3, "timestamp")?;
        if user < 0 || item < 0 {
            return Err(err("negative identifier".into()));
        }
        rows.push(Rating {
            user: user as u64,
            item: item as u64,
            rating: rating as f64,
            timestamp: Some(timestamp),
        });
    }
    Ok(rows)
}

fn parse_csv<R: Read>(reader: R) -> Result<Vec<Rating>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut rows = Vec::new();
    for (idx, rec) in rdr.deserialize::<Rating>().enumerate() {
        let line = idx + 2;
        let r = rec.map_err(|e| Error::Parse {
            line,
            msg: e.to_string(),
        })?;
        if !r.rating.is_finite() {
            return Err(Error::Parse {
                line,
                msg: "rating must be finite".into(),
            });
        }
        rows.push(r);
    }
    Ok(rows)
}
