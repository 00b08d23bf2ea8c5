use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};

use super::RatingsTable;
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"ORDPAIRS";
const VERSION: u32 = 1;

/// Non-zero rating differences per item pair, oriented `r_i − r_j` with `i < j`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PairComparisons {
    pairs: BTreeMap<(u64, u64), Vec<f64>>,
}

impl PairComparisons {
    /// Adds differences for `(i, j)` in either orientation; zeros are dropped.
    pub fn push(&mut self, i: u64, j: u64, diffs: &[f64]) -> Result<()> {
        if i == j {
            return Err(Error::domain(format!("item {i} compared with itself")));
        }
        let flip = i > j;
        let key = if flip { (j, i) } else { (i, j) };
        let entry = self.pairs.entry(key).or_default();
        entry.extend(
            diffs
                .iter()
                .filter(|d| **d != 0.0)
                .map(|d| if flip { -d } else { *d }),
        );
        if entry.is_empty() {
            self.pairs.remove(&key);
        }
        Ok(())
    }

    pub fn get(&self, i: u64, j: u64) -> Option<&[f64]> {
        self.pairs.get(&(i, j)).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(u64, u64), &Vec<f64>)> {
        self.pairs.iter()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn total_comparisons(&self) -> usize {
        self.pairs.values().map(Vec::len).sum()
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_u32::<LittleEndian>(VERSION)?;
        w.write_u64::<LittleEndian>(self.pairs.len() as u64)?;
        for (&(i, j), diffs) in &self.pairs {
            w.write_u64::<LittleEndian>(i)?;
            w.write_u64::<LittleEndian>(j)?;
            w.write_u64::<LittleEndian>(diffs.len() as u64)?;
            for d in diffs {
                w.write_f64::<LittleEndian>(*d)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let corrupt = |what: &str| Error::CorruptData(format!("pairs file: {what}"));
        let eof = |e: std::io::Error| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                Error::CorruptData("pairs file is truncated".into())
            } else {
                Error::Io(e)
            }
        };
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(eof)?;
        if &magic != MAGIC {
            return Err(corrupt("bad magic"));
        }
        let version = r.read_u32::<LittleEndian>().map_err(eof)?;
        if version != VERSION {
            return Err(corrupt(&format!("unsupported version {version}")));
        }
        let count = r.read_u64::<LittleEndian>().map_err(eof)?;
        let mut out = PairComparisons::default();
        for _ in 0..count {
            let i = r.read_u64::<LittleEndian>().map_err(eof)?;
            let j = r.read_u64::<LittleEndian>().map_err(eof)?;
            let len = r.read_u64::<LittleEndian>().map_err(eof)?;
            if i >= j {
                return Err(corrupt("pair not in i < j orientation"));
            }
            let mut diffs = Vec::with_capacity(len.min(1 << 20) as usize);
            for _ in 0..len {
                let d = r.read_f64::<LittleEndian>().map_err(eof)?;
                if d == 0.0 || !d.is_finite() {
                    return Err(corrupt("zero or non-finite difference"));
                }
                diffs.push(d);
            }
            if out.pairs.insert((i, j), diffs).is_some() {
                return Err(corrupt("duplicate pair"));
            }
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(corrupt("trailing bytes"));
        }
        Ok(out)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::file(path, e))?;
        self.write_to(std::io::BufWriter::new(f))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::file(path, e))?;
        Self::read_from(std::io::BufReader::new(f))
    }
}

/// Keeps items with at least `min_ratings_per_item` ratings, then emits one
/// difference per user and retained pair they rated both of.
pub fn build_pair_comparisons(table: &RatingsTable, min_ratings_per_item: usize) -> Result<PairComparisons> {
    if min_ratings_per_item == 0 {
        return Err(Error::domain("min_ratings_per_item must be at least 1"));
    }
    let mut counts: HashMap<u64, usize> = HashMap::new();
    for r in table.records() {
        *counts.entry(r.item).or_default() += 1;
    }
    let mut by_user: BTreeMap<u64, Vec<(u64, f64)>> = BTreeMap::new();
    for r in table.records() {
        if counts[&r.item] >= min_ratings_per_item {
            by_user.entry(r.user).or_default().push((r.item, r.rating));
        }
    }
    let mut out = PairComparisons::default();
    for items in by_user.values_mut() {
        items.sort_by_key(|(item, _)| *item);
        for (a, &(i, ri)) in items.iter().enumerate() {
            for &(j, rj) in &items[a + 1..] {
                let d = ri - rj;
                if d != 0.0 {
                    out.pairs.entry((i, j)).or_default().push(d);
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    /// Inclusive lower edge of `|difference|`.
    pub lower: f64,
    /// Upper edge; inclusive for integer bins and for the last custom bin.
    pub upper: f64,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bins: Vec<HistogramBin>,
    pub total: u64,
    /// Counts never increase with magnitude (informational).
    pub non_increasing: bool,
}

/// Histogram of `|difference|`. Without `edges`, integer data get one bin per
/// magnitude `1..=max`; otherwise bins are `[e_k, e_{k+1})`.
pub fn ordinal_histogram(pairs: &PairComparisons, edges: Option<&[f64]>) -> Result<Histogram> {
    let mags: Vec<f64> = pairs.pairs.values().flatten().map(|d| d.abs()).collect();
    if mags.is_empty() {
        return Err(Error::domain("histogram of an empty comparison set"));
    }
    let bins = match edges {
        Some(e) => {
            if e.len() < 2 || e.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::domain("bin edges must be strictly increasing"));
            }
            let mut bins: Vec<HistogramBin> = e
                .windows(2)
                .map(|w| HistogramBin {
                    lower: w[0],
                    upper: w[1],
                    count: 0,
                })
                .collect();
            let last = bins.len() - 1;
            let (lo, hi) = (e[0], e[e.len() - 1]);
            for m in mags.iter().filter(|m| (lo..=hi).contains(*m)) {
                let idx = e.partition_point(|edge| edge <= m);
                bins[(idx - 1).min(last)].count += 1;
            }
            bins
        }
        None => {
            if mags.iter().any(|m| m.fract() != 0.0) {
                return Err(Error::domain(
                    "non-integer differences need explicit bin edges",
                ));
            }
            let max = mags.iter().copied().fold(0.0, f64::max) as usize;
            let mut bins: Vec<HistogramBin> = (1..=max)
                .map(|m| HistogramBin {
                    lower: m as f64,
                    upper: m as f64,
                    count: 0,
                })
                .collect();
            for m in &mags {
                bins[*m as usize - 1].count += 1;
            }
            bins
        }
    };
    let total = bins.iter().map(|b| b.count).sum();
    let non_increasing = bins.windows(2).all(|w| w[0].count >= w[1].count);
    Ok(Histogram {
        bins,
        total,
        non_increasing,
    })
}
