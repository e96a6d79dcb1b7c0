//! On-disk cache of exact counts: one CSV file per counting problem with the
//! header `B,raw_count,divisor`, rows sorted by `B`.

use std::fs;
use std::path::{Path, PathBuf};

use super::CountRecord;
use crate::error::{Error, Result};
use crate::localdensity::{BinaryFormParams, FiberIndex};

/// Environment variable overriding the cache directory.
pub const CACHE_DIR_ENV: &str = "CAMPANA_CACHE_DIR";

pub fn cache_key_binary(params: &BinaryFormParams) -> String {
    format!("binary_a{}_b{}", params.a(), params.b())
}

pub fn cache_key_conic(y: &FiberIndex) -> String {
    let [a, b, c] = y.entries();
    format!("conic_y{a}_{b}_{c}")
}

fn cache_err(e: impl std::fmt::Display) -> Error {
    Error::Cache(e.to_string())
}

#[derive(Clone, Debug)]
pub struct CountCache {
    dir: PathBuf,
}

impl CountCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        CountCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, key: &str) -> Result<PathBuf> {
        let ok = !key.is_empty()
            && key
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
        if !ok {
            return Err(Error::Cache(format!("invalid cache key {key:?}")));
        }
        Ok(self.dir.join(format!("{key}.csv")))
    }

    /// Records for `key`, sorted by `B`; empty when nothing is cached.
    pub fn load(&self, key: &str) -> Result<Vec<CountRecord>> {
        let path = self.path(key)?;
        if !path.exists() {
            return Ok(Vec::new());
        }
        let mut reader = csv::Reader::from_path(&path).map_err(cache_err)?;
        let headers = reader.headers().map_err(cache_err)?.clone();
        if headers != vec!["B", "raw_count", "divisor"] {
            return Err(Error::Cache(format!("{} has unexpected header", path.display())));
        }
        let mut out = Vec::new();
        for row in reader.deserialize() {
            let rec: CountRecord = row.map_err(cache_err)?;
            if rec.divisor == 0 {
                return Err(Error::Cache(format!("{} has a zero divisor", path.display())));
            }
            out.push(rec);
        }
        if out.windows(2).any(|w| w[0].bound >= w[1].bound) {
            return Err(Error::Cache(format!("{} is not sorted by B", path.display())));
        }
        Ok(out)
    }

    pub fn get(&self, key: &str, bound: u64) -> Result<Option<CountRecord>> {
        Ok(self.load(key)?.into_iter().find(|r| r.bound == bound))
    }

    /// Merge `records` into the file for `key`. A record that disagrees with
    /// a cached one at the same `B` is an error.
    pub fn store(&self, key: &str, records: &[CountRecord]) -> Result<()> {
        let path = self.path(key)?;
        let mut all = self.load(key)?;
        for r in records {
            match all.iter().find(|c| c.bound == r.bound) {
                Some(c) if c == r => {}
                Some(c) => {
                    return Err(Error::Cache(format!(
                        "{key}: cached {c:?} conflicts with computed {r:?}"
                    )))
                }
                None => all.push(*r),
            }
        }
        all.sort_by_key(|r| r.bound);
        fs::create_dir_all(&self.dir).map_err(cache_err)?;
        let tmp = path.with_extension("csv.tmp");
        {
            let mut w = csv::Writer::from_path(&tmp).map_err(cache_err)?;
            if all.is_empty() {
                w.write_record(["B", "raw_count", "divisor"]).map_err(cache_err)?;
            }
            for r in &all {
                w.serialize(r).map_err(cache_err)?;
            }
            w.flush().map_err(cache_err)?;
        }
        fs::rename(&tmp, &path).map_err(cache_err)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_merge() {
        let dir = tempfile::tempdir().unwrap();
        let cache = CountCache::new(dir.path());
        assert!(cache.load("n1").unwrap().is_empty());
        let a = CountRecord::new(1000, 10, 2);
        let b = CountRecord::new(100, 4, 2);
        cache.store("n1", &[a]).unwrap();
        cache.store("n1", &[b, a]).unwrap();
        assert_eq!(cache.load("n1").unwrap(), vec![b, a]);
        let text = fs::read_to_string(cache.path("n1").unwrap()).unwrap();
        assert_eq!(text, "B,raw_count,divisor\n100,4,2\n1000,10,2\n");
        assert!(cache.store("n1", &[CountRecord::new(100, 6, 2)]).is_err());
        assert!(cache.path("../x").is_err());
    }

    #[test]
    fn keys() {
        let p = BinaryFormParams::new(1, 5).unwrap();
        assert_eq!(cache_key_binary(&p), "binary_a1_b5");
        let y = FiberIndex::new(1, 1, 1).unwrap();
        assert_eq!(cache_key_conic(&y), "conic_y1_1_1");
    }

    #[test]
    fn rejects_bad_header() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("n1.csv"), "x,y,z\n1,2,3\n").unwrap();
        assert!(CountCache::new(dir.path()).load("n1").is_err());
    }
}
