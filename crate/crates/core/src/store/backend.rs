//! Storage backends. Paths are `/`-separated and relative to the backend
//! root.

use std::fs;
use std::io::{self, Read, Seek, SeekFrom};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

pub trait ReadSeek: Read + Seek + Send {}

impl<T: Read + Seek + Send> ReadSeek for T {}

/// What the store needs from a file system: sequential reads with seek,
/// atomic whole-file creation, directory listing and rename.
pub trait StorageBackend: Send + Sync {
    fn open(&self, path: &str) -> io::Result<Box<dyn ReadSeek>>;

    /// Creates `path` with `data`; readers never observe a partial file.
    fn create_atomic(&self, path: &str, data: &[u8]) -> io::Result<()>;

    /// Names of the immediate children of `dir`, sorted.
    fn list(&self, dir: &str) -> io::Result<Vec<String>>;

    fn rename(&self, from: &str, to: &str) -> io::Result<()>;

    fn exists(&self, path: &str) -> bool;

    fn size(&self, path: &str) -> io::Result<u64>;
}

#[derive(Clone, Debug)]
pub struct LocalFs {
    root: PathBuf,
}

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

impl LocalFs {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn resolve(&self, path: &str) -> PathBuf {
        let mut p = self.root.clone();
        p.extend(path.split('/').filter(|s| !s.is_empty()));
        p
    }
}

impl StorageBackend for LocalFs {
    fn open(&self, path: &str) -> io::Result<Box<dyn ReadSeek>> {
        Ok(Box::new(fs::File::open(self.resolve(path))?))
    }

    fn create_atomic(&self, path: &str, data: &[u8]) -> io::Result<()> {
        let target = self.resolve(path);
        if let Some(parent) = target.parent() {
            fs::create_dir_all(parent)?;
        }
        let n = TMP_COUNTER.fetch_add(1, Ordering::Relaxed);
        let tmp = target.with_extension(format!("tmp-{}-{n}", std::process::id()));
        fs::write(&tmp, data)?;
        fs::rename(&tmp, &target)
    }

    fn list(&self, dir: &str) -> io::Result<Vec<String>> {
        let dir = self.resolve(dir);
        if !dir.is_dir() {
            return Ok(Vec::new());
        }
        let mut names = fs::read_dir(dir)?
            .map(|e| e.map(|e| e.file_name().to_string_lossy().into_owned()))
            .collect::<io::Result<Vec<_>>>()?;
        names.sort();
        Ok(names)
    }

    fn rename(&self, from: &str, to: &str) -> io::Result<()> {
        let to = self.resolve(to);
        if let Some(parent) = to.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::rename(self.resolve(from), to)
    }

    fn exists(&self, path: &str) -> bool {
        self.resolve(path).exists()
    }

    fn size(&self, path: &str) -> io::Result<u64> {
        Ok(fs::metadata(self.resolve(path))?.len())
    }
}

/// Read-side counters collected by [`InstrumentedBackend`].
#[derive(Debug, Default)]
pub struct IoCounters {
    pub opens: AtomicU64,
    pub read_calls: AtomicU64,
    pub bytes_read: AtomicU64,
    /// Largest single `read` request seen.
    pub max_read_len: AtomicU64,
}

impl IoCounters {
    pub fn snapshot(&self) -> IoSnapshot {
        IoSnapshot {
            opens: self.opens.load(Ordering::Relaxed),
            read_calls: self.read_calls.load(Ordering::Relaxed),
            bytes_read: self.bytes_read.load(Ordering::Relaxed),
            max_read_len: self.max_read_len.load(Ordering::Relaxed),
        }
    }

    pub fn reset(&self) {
        self.opens.store(0, Ordering::Relaxed);
        self.read_calls.store(0, Ordering::Relaxed);
        self.bytes_read.store(0, Ordering::Relaxed);
        self.max_read_len.store(0, Ordering::Relaxed);
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IoSnapshot {
    pub opens: u64,
    pub read_calls: u64,
    pub bytes_read: u64,
    pub max_read_len: u64,
}

/// Wraps a backend and counts every byte read through it.
pub struct InstrumentedBackend<B> {
    inner: B,
    counters: Arc<IoCounters>,
}

impl<B: StorageBackend> InstrumentedBackend<B> {
    pub fn new(inner: B) -> Self {
        Self { inner, counters: Arc::default() }
    }

    pub fn counters(&self) -> Arc<IoCounters> {
        Arc::clone(&self.counters)
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }
}

struct CountingReader {
    inner: Box<dyn ReadSeek>,
    counters: Arc<IoCounters>,
}

impl Read for CountingReader {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.counters.read_calls.fetch_add(1, Ordering::Relaxed);
        self.counters.bytes_read.fetch_add(n as u64, Ordering::Relaxed);
        self.counters.max_read_len.fetch_max(buf.len() as u64, Ordering::Relaxed);
        Ok(n)
    }
}

impl Seek for CountingReader {
    fn seek(&mut self, pos: SeekFrom) -> io::Result<u64> {
        self.inner.seek(pos)
    }
}

impl<B: StorageBackend> StorageBackend for InstrumentedBackend<B> {
    fn open(&self, path: &str) -> io::Result<Box<dyn ReadSeek>> {
        self.counters.opens.fetch_add(1, Ordering::Relaxed);
        Ok(Box::new(CountingReader { inner: self.inner.open(path)?, counters: Arc::clone(&self.counters) }))
    }

    fn create_atomic(&self, path: &str, data: &[u8]) -> io::Result<()> {
        self.inner.create_atomic(path, data)
    }

    fn list(&self, dir: &str) -> io::Result<Vec<String>> {
        self.inner.list(dir)
    }

    fn rename(&self, from: &str, to: &str) -> io::Result<()> {
        self.inner.rename(from, to)
    }

    fn exists(&self, path: &str) -> bool {
        self.inner.exists(path)
    }

    fn size(&self, path: &str) -> io::Result<u64> {
        self.inner.size(path)
    }
}

impl<B: StorageBackend + ?Sized> StorageBackend for Arc<B> {
    fn open(&self, path: &str) -> io::Result<Box<dyn ReadSeek>> {
        (**self).open(path)
    }

    fn create_atomic(&self, path: &str, data: &[u8]) -> io::Result<()> {
        (**self).create_atomic(path, data)
    }

    fn list(&self, dir: &str) -> io::Result<Vec<String>> {
        (**self).list(dir)
    }

    fn rename(&self, from: &str, to: &str) -> io::Result<()> {
        (**self).rename(from, to)
    }

    fn exists(&self, path: &str) -> bool {
        (**self).exists(path)
    }

    fn size(&self, path: &str) -> io::Result<u64> {
        (**self).size(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn local_fs_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let fs = InstrumentedBackend::new(LocalFs::new(dir.path()));
        fs.create_atomic("g/a/b.tgf", b"hello").unwrap();
        assert!(fs.exists("g/a/b.tgf"));
        assert_eq!(fs.list("g/a").unwrap(), vec!["b.tgf"]);
        assert_eq!(fs.list("g/missing").unwrap(), Vec::<String>::new());
        let mut s = String::new();
        fs.open("g/a/b.tgf").unwrap().read_to_string(&mut s).unwrap();
        assert_eq!(s, "hello");
        assert_eq!(fs.counters().snapshot().bytes_read, 5);
        fs.rename("g/a/b.tgf", "g/c.tgf").unwrap();
        assert_eq!(fs.size("g/c.tgf").unwrap(), 5);
        assert!(!fs.exists("g/a/b.tgf"));
    }
}
