//! On-disk dataset container: a versioned, line-oriented text format holding
//! the user list, both item lists, and both matrices as sorted coordinate
//! pairs. Writing is deterministic, so identical datasets produce identical
//! bytes.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::data::{ClickMatrix, DualDomainDataset};
use crate::error::{Error, Result};

const MAGIC: &str = "d2d-dataset v1";

pub fn save_dataset(ds: &DualDomainDataset, path: &Path) -> Result<()> {
    for id in ds
        .users()
        .iter()
        .chain(ds.domain_a().item_index())
        .chain(ds.domain_b().item_index())
    {
        if id.contains('\n') || id.contains('\r') {
            return Err(Error::Data(format!("id {id:?} contains a line break")));
        }
    }
    let file = File::create(path)
        .map_err(|e| Error::Data(format!("cannot create dataset cache {}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "users {}", ds.n_users())?;
    writeln!(w, "items_a {}", ds.domain_a().n_items())?;
    writeln!(w, "items_b {}", ds.domain_b().n_items())?;
    for u in ds.users() {
        writeln!(w, "{u}")?;
    }
    for i in ds.domain_a().item_index() {
        writeln!(w, "{i}")?;
    }
    for i in ds.domain_b().item_index() {
        writeln!(w, "{i}")?;
    }
    for (tag, m) in [("clicks_a", ds.domain_a()), ("clicks_b", ds.domain_b())] {
        writeln!(w, "{tag} {}", m.nnz())?;
        for u in 0..m.n_users() {
            for &i in m.row_items(u) {
                writeln!(w, "{u} {i}")?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_dataset(path: &Path) -> Result<DualDomainDataset> {
    let file = File::open(path)
        .map_err(|e| Error::Data(format!("cannot open dataset cache {}: {e}", path.display())))?;
    let mut lines = Lines::new(BufReader::new(file), path);

    let magic = lines.next_line()?;
    if magic != MAGIC {
        return Err(lines.err(format!("expected header '{MAGIC}', found '{magic}'")));
    }
    let n_users = lines.counted("users")?;
    let n_items_a = lines.counted("items_a")?;
    let n_items_b = lines.counted("items_b")?;

    let users: Vec<String> = (0..n_users).map(|_| lines.next_line()).collect::<Result<_>>()?;
    let items_a: Vec<String> = (0..n_items_a).map(|_| lines.next_line()).collect::<Result<_>>()?;
    let items_b: Vec<String> = (0..n_items_b).map(|_| lines.next_line()).collect::<Result<_>>()?;

    let rows_a = lines.coords("clicks_a", n_users, n_items_a)?;
    let rows_b = lines.coords("clicks_b", n_users, n_items_b)?;
    if let Some(extra) = lines.peek()?.map(|s| s.to_string()) {
        return Err(lines.err(format!("unexpected trailing line '{extra}'")));
    }

    let domain_a = ClickMatrix::new(users.clone(), items_a, rows_a)?;
    let domain_b = ClickMatrix::new(users, items_b, rows_b)?;
    DualDomainDataset::new(domain_a, domain_b)
}

/// Line reader that tracks position for error messages.
struct Lines<'p, R> {
    reader: R,
    path: &'p Path,
    lineno: usize,
    pending: Option<String>,
}

impl<'p, R: BufRead> Lines<'p, R> {
    fn new(reader: R, path: &'p Path) -> Self {
        Lines {
            reader,
            path,
            lineno: 0,
            pending: None,
        }
    }

    fn err(&self, message: String) -> Error {
        Error::Parse {
            location: format!("{}:line {}", self.path.display(), self.lineno),
            message,
        }
    }

    fn peek(&mut self) -> Result<Option<&str>> {
        if self.pending.is_none() {
            let mut buf = String::new();
            let n = self.reader.read_line(&mut buf)?;
            if n == 0 {
                return Ok(None);
            }
            self.lineno += 1;
            while buf.ends_with('\n') || buf.ends_with('\r') {
                buf.pop();
            }
            self.pending = Some(buf);
        }
        Ok(self.pending.as_deref())
    }

    fn next_line(&mut self) -> Result<String> {
        self.peek()?;
        self.pending
            .take()
            .ok_or_else(|| self.err("unexpected end of file".to_string()))
    }

    /// Parses a `<tag> <count>` line.
    fn counted(&mut self, tag: &str) -> Result<usize> {
        let line = self.next_line()?;
        let rest = line
            .strip_prefix(tag)
            .and_then(|r| r.strip_prefix(' '))
            .ok_or_else(|| self.err(format!("expected '{tag} <count>', found '{line}'")))?;
        rest.parse()
            .map_err(|_| self.err(format!("count '{rest}' is not an integer")))
    }

    /// Parses a coordinate section: header then `row col` pairs, which must
    /// arrive sorted.
    fn coords(&mut self, tag: &str, n_users: usize, n_items: usize) -> Result<Vec<Vec<u32>>> {
        let nnz = self.counted(tag)?;
        let mut rows: Vec<Vec<u32>> = vec![Vec::new(); n_users];
        for _ in 0..nnz {
            let line = self.next_line()?;
            let (u, i) = line
                .split_once(' ')
                .and_then(|(u, i)| Some((u.parse::<usize>().ok()?, i.parse::<u32>().ok()?)))
                .ok_or_else(|| self.err(format!("expected 'row col', found '{line}'")))?;
            if u >= n_users || i as usize >= n_items {
                return Err(self.err(format!("coordinate {u} {i} out of range")));
            }
            rows[u].push(i);
        }
        Ok(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{build_dual_domain, synthetic_clusters, SyntheticSpec};
    use std::collections::BTreeSet;

    fn sample() -> DualDomainDataset {
        let a: BTreeSet<_> = [
            ("u1".to_string(), "x".to_string()),
            ("u2".to_string(), "x".to_string()),
            ("u2".to_string(), "y".to_string()),
        ]
        .into();
        let b: BTreeSet<_> = [
            ("u1".to_string(), "p q".to_string()), // ids may contain spaces
            ("u2".to_string(), "r".to_string()),
        ]
        .into();
        build_dual_domain(&a, &b).unwrap()
    }

    #[test]
    fn round_trip_preserves_dataset() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.txt");
        let ds = sample();
        save_dataset(&ds, &path).unwrap();
        let loaded = load_dataset(&path).unwrap();
        assert_eq!(ds, loaded);
    }

    #[test]
    fn save_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("one.txt");
        let p2 = dir.path().join("two.txt");
        let ds = synthetic_clusters(&SyntheticSpec {
            n_users: 40,
            ..SyntheticSpec::default()
        });
        save_dataset(&ds, &p1).unwrap();
        save_dataset(&ds, &p2).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn truncated_file_names_the_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.txt");
        let ds = sample();
        save_dataset(&ds, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let cut: String = text.lines().take(5).map(|l| format!("{l}\n")).collect();
        std::fs::write(&path, cut).unwrap();
        let err = load_dataset(&path).unwrap_err();
        assert!(err.to_string().contains("line"), "{err}");
    }

    #[test]
    fn wrong_magic_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.txt");
        std::fs::write(&path, "some other file\n").unwrap();
        let err = load_dataset(&path).unwrap_err();
        assert!(err.to_string().contains("d2d-dataset v1"), "{err}");
    }
}
