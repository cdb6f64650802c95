//! On-disk cache of exact count tables.
//!
//! One file per (size model, family, parameter). The first line is
//!
//! ```text
//! spec=a,b,c,d family=<name> params=max_n=<n>,max_level=<m>[,<k>=<v>] version=1
//! ```
//!
//! followed by one line `m n value` per stored entry (`m n q value` for the
//! q-abstraction family), values in decimal.

use std::fs;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use thiserror::Error;

use super::table::{CountTable, LayoutError};
use super::{Exact, Family};
use crate::size_model::SizeSpec;

/// Overrides the cache directory when set.
pub const CACHE_DIR_ENV: &str = "LAMCOUNT_CACHE_DIR";

const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("{path}:{line}: {msg}")]
    Format { path: PathBuf, line: usize, msg: String },
    #[error("{path}: cached table does not match its header ({msg})")]
    Layout { path: PathBuf, msg: String },
}

/// Directory named by the environment override, if any.
pub fn env_cache_dir() -> Option<PathBuf> {
    std::env::var_os(CACHE_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

pub fn cache_path(dir: &Path, spec: &SizeSpec, family: Family) -> PathBuf {
    let mut name = format!("{}-{}_{}_{}_{}", family.name(), spec.a(), spec.b(), spec.c(), spec.d());
    if let Some((k, v)) = family.param() {
        name.push_str(&format!("-{k}{v}"));
    }
    name.push_str(".tbl");
    dir.join(name)
}

fn header(table: &CountTable<Exact>) -> String {
    let mut params = format!("max_n={},max_level={}", table.max_n(), table.max_level());
    if let Some((k, v)) = table.family().param() {
        params.push_str(&format!(",{k}={v}"));
    }
    format!("spec={} family={} params={} version={VERSION}", table.spec(), table.family().name(), params)
}

pub fn write_table<W: Write>(mut w: W, table: &CountTable<Exact>) -> io::Result<()> {
    writeln!(w, "{}", header(table))?;
    for (m, n, q, v) in table.cells() {
        match q {
            Some(q) => writeln!(w, "{m} {n} {q} {v}")?,
            None => writeln!(w, "{m} {n} {v}")?,
        }
    }
    w.flush()
}

/// Writes the table to its cache file, replacing any previous one.
pub fn save_table(dir: &Path, table: &CountTable<Exact>) -> Result<PathBuf, CacheError> {
    fs::create_dir_all(dir)?;
    let path = cache_path(dir, &table.spec(), table.family());
    let tmp = path.with_extension("tmp");
    write_table(BufWriter::new(fs::File::create(&tmp)?), table)?;
    fs::rename(&tmp, &path)?;
    Ok(path)
}

struct Header {
    spec: SizeSpec,
    family: Family,
    max_n: u64,
    max_level: u64,
}

fn parse_header(line: &str) -> Result<Header, String> {
    let mut spec = None;
    let mut family_name = None;
    let mut params = None;
    let mut version = None;
    for field in line.split_whitespace() {
        let (k, v) = field.split_once('=').ok_or_else(|| format!("bad header field {field:?}"))?;
        match k {
            "spec" => spec = Some(v.parse::<SizeSpec>().map_err(|e| e.to_string())?),
            "family" => family_name = Some(v.to_string()),
            "params" => params = Some(v.to_string()),
            "version" => version = Some(v.parse::<u32>().map_err(|e| e.to_string())?),
            _ => return Err(format!("unknown header field {k:?}")),
        }
    }
    if version != Some(VERSION) {
        return Err(format!("unsupported version {version:?}"));
    }
    let (spec, family_name, params) = match (spec, family_name, params) {
        (Some(s), Some(f), Some(p)) => (s, f, p),
        _ => return Err("incomplete header".into()),
    };
    let (mut max_n, mut max_level, mut extra) = (None, None, None);
    for kv in params.split(',') {
        let (k, v) = kv.split_once('=').ok_or_else(|| format!("bad parameter {kv:?}"))?;
        let v: u64 = v.parse().map_err(|_| format!("bad parameter value {kv:?}"))?;
        match k {
            "max_n" => max_n = Some(v),
            "max_level" => max_level = Some(v),
            _ => extra = Some((k.to_string(), v)),
        }
    }
    let family = Family::from_parts(&family_name, extra.as_ref().map(|e| e.1))
        .filter(|f| f.param().map(|p| p.0) == extra.as_ref().map(|e| e.0.as_str()))
        .ok_or_else(|| format!("unknown family {family_name:?} with parameters {params:?}"))?;
    match (max_n, max_level) {
        (Some(max_n), Some(max_level)) => Ok(Header { spec, family, max_n, max_level }),
        _ => Err("missing max_n or max_level".into()),
    }
}

pub fn read_table<R: BufRead>(r: R, path: &Path) -> Result<CountTable<Exact>, CacheError> {
    let format = |line: usize, msg: String| CacheError::Format { path: path.to_path_buf(), line, msg };
    let mut lines = r.lines();
    let first = lines.next().ok_or_else(|| format(1, "empty file".into()))??;
    let h = parse_header(&first).map_err(|msg| format(1, msg))?;
    let with_q = matches!(h.family, Family::QAbstractions { .. });
    let mut cells = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 2;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let want = if with_q { 4 } else { 3 };
        if fields.len() != want {
            return Err(format(lineno, format!("expected {want} fields, found {}", fields.len())));
        }
        let int = |s: &str| s.parse::<u64>().map_err(|_| format(lineno, format!("bad integer {s:?}")));
        let value = fields[want - 1]
            .parse::<BigUint>()
            .map_err(|_| format(lineno, format!("bad count {:?}", fields[want - 1])))?;
        let q = if with_q { Some(int(fields[2])?) } else { None };
        cells.push((int(fields[0])?, int(fields[1])?, q, value));
    }
    CountTable::from_cells(h.spec, h.family, h.max_n, h.max_level, cells).map_err(|e| CacheError::Layout {
        path: path.to_path_buf(),
        msg: match e {
            LayoutError::Missing { m, n, q } => format!("missing entry m={m} n={n} q={q:?}"),
            LayoutError::Unexpected { m, n, q } => format!("unexpected entry m={m} n={n} q={q:?}"),
            LayoutError::Inconsistent { m, n } => format!("inconsistent normal-form entry m={m} n={n}"),
        },
    })
}

/// Loads the cached table for `(spec, family)`, if a file exists.
pub fn load_table(dir: &Path, spec: &SizeSpec, family: Family) -> Result<Option<CountTable<Exact>>, CacheError> {
    let path = cache_path(dir, spec, family);
    let file = match fs::File::open(&path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let table = read_table(BufReader::new(file), &path)?;
    if table.spec() != *spec || table.family() != family {
        return Err(CacheError::Layout { path, msg: "header names another table".into() });
    }
    Ok(Some(table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::size_model::Preset;

    #[test]
    fn header_format() {
        let t = CountTable::build(Preset::Natural.spec(), Family::BoundedSuccessors { h: 2 }, 5, 1, Exact);
        let mut buf = Vec::new();
        write_table(&mut buf, &t).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let first = text.lines().next().unwrap();
        assert_eq!(first, "spec=1,1,1,1 family=bounded-h params=max_n=5,max_level=1,h=2 version=1");
        assert!(text.lines().nth(1).unwrap().split(' ').count() == 3);
    }

    #[test]
    fn save_and_load_are_exact() {
        let dir = std::env::temp_dir().join(format!("lamcount-cache-test-{}", std::process::id()));
        let spec = Preset::Binary.spec();
        for family in [Family::MOpen, Family::NormalForm, Family::QAbstractions { max_q: 2 }] {
            let t = CountTable::build(spec, family, 60, 2, Exact);
            save_table(&dir, &t).unwrap();
            let back = load_table(&dir, &spec, family).unwrap().unwrap();
            assert_eq!(back.storage, t.storage);
        }
        assert!(load_table(&dir, &spec, Family::Unrestricted).unwrap().is_none());
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn rejects_damaged_files() {
        let p = Path::new("x.tbl");
        let bad_header = "spec=1,1,1,1 family=m-open params=max_n=2 version=1\n";
        assert!(matches!(read_table(bad_header.as_bytes(), p), Err(CacheError::Format { line: 1, .. })));
        let bad_line = "spec=1,1,1,1 family=m-open params=max_n=0,max_level=0 version=1\n0 0 x\n";
        assert!(matches!(read_table(bad_line.as_bytes(), p), Err(CacheError::Format { line: 2, .. })));
        let short = "spec=1,1,1,1 family=m-open params=max_n=1,max_level=0 version=1\n0 0 0\n";
        assert!(matches!(read_table(short.as_bytes(), p), Err(CacheError::Layout { .. })));
    }
}
