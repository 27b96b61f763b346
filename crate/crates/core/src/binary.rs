//! Seekable binary phrase-table format, read on demand.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! "MLPT1"                       magic, 5 bytes
//! u8      origin                0 = trained, 1 = one-to-one
//! u32     max_n
//! u32 len + bytes               topic (empty for trained tables)
//! u32     group count G         distinct source phrases
//! u32     entry count E
//! u64 × G                       absolute offset of each group, groups sorted
//!                               by the UTF-8 bytes of the source phrase
//! groups:
//!   u32 len + bytes             source phrase, tokens joined by one space
//!   u32     target count
//!   (u32 len + bytes, f64)      target phrase and weight, sorted by target
//! u32     CRC-32 (IEEE) of every preceding byte
//! ```
//!
//! A lookup binary-searches the offset index and reads only the index slots
//! it probes plus the matching group.

use std::fs::File;
use std::io::{self, Read};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::corpus::{join_tokens, split_phrase, Token};
use crate::error::{Error, Result};
use crate::num::Real;
use crate::phrasetable::{PhraseLookup, PhraseTable, PhraseTableEntry, TableOrigin};

pub const MAGIC: &[u8; 5] = b"MLPT1";

/// Random-access byte storage behind an on-demand table.
pub trait ByteSource: Send + Sync {
    fn read_at(&self, offset: u64, buf: &mut [u8]) -> io::Result<()>;
    fn size(&self) -> u64;
}

impl ByteSource for Vec<u8> {
    fn read_at(&self, offset: u64, buf: &mut [u8]) -> io::Result<()> {
        let start = usize::try_from(offset).map_err(|_| io::ErrorKind::UnexpectedEof)?;
        let slice = start
            .checked_add(buf.len())
            .and_then(|end| self.get(start..end))
            .ok_or(io::ErrorKind::UnexpectedEof)?;
        buf.copy_from_slice(slice);
        Ok(())
    }

    fn size(&self) -> u64 {
        self.len() as u64
    }
}

impl ByteSource for File {
    fn read_at(&self, offset: u64, buf: &mut [u8]) -> io::Result<()> {
        std::os::unix::fs::FileExt::read_exact_at(self, buf, offset)
    }

    fn size(&self) -> u64 {
        self.metadata().map(|m| m.len()).unwrap_or(0)
    }
}

/// Counts bytes read through it; used to check that lookups stay local.
pub struct CountingSource<S> {
    inner: S,
    bytes_read: AtomicU64,
}

impl<S: ByteSource> CountingSource<S> {
    pub fn new(inner: S) -> Self {
        CountingSource { inner, bytes_read: AtomicU64::new(0) }
    }

    pub fn bytes_read(&self) -> u64 {
        self.bytes_read.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.bytes_read.store(0, Ordering::Relaxed);
    }
}

impl<S: ByteSource> ByteSource for CountingSource<S> {
    fn read_at(&self, offset: u64, buf: &mut [u8]) -> io::Result<()> {
        self.bytes_read.fetch_add(buf.len() as u64, Ordering::Relaxed);
        self.inner.read_at(offset, buf)
    }

    fn size(&self) -> u64 {
        self.inner.size()
    }
}

fn put_u32(out: &mut Vec<u8>, value: usize) -> Result<()> {
    let value = u32::try_from(value).map_err(|_| Error::BinaryFormat("count exceeds u32".into()))?;
    out.extend_from_slice(&value.to_le_bytes());
    Ok(())
}

fn put_str(out: &mut Vec<u8>, text: &str) -> Result<()> {
    put_u32(out, text.len())?;
    out.extend_from_slice(text.as_bytes());
    Ok(())
}

/// Encodes a table in the layout described in the module docs.
pub fn serialize_binary<F: Real>(table: &PhraseTable<F>) -> Result<Vec<u8>> {
    let mut groups: Vec<(String, Vec<(String, f64)>)> = table
        .sources()
        .map(|source| {
            let mut targets: Vec<(String, f64)> =
                table.targets(source).iter().map(|(t, w)| (join_tokens(t), w.as_f64())).collect();
            targets.sort_by(|a, b| a.0.cmp(&b.0));
            (join_tokens(source), targets)
        })
        .collect();
    groups.sort_by(|a, b| a.0.as_bytes().cmp(b.0.as_bytes()));

    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    let topic = match &table.origin {
        TableOrigin::Trained => {
            out.push(0);
            ""
        }
        TableOrigin::OneToOne(topic) => {
            out.push(1);
            topic.as_str()
        }
    };
    put_u32(&mut out, table.max_n)?;
    put_str(&mut out, topic)?;
    put_u32(&mut out, groups.len())?;
    put_u32(&mut out, table.len())?;

    let index_at = out.len();
    out.resize(index_at + 8 * groups.len(), 0);
    for (i, (source, targets)) in groups.iter().enumerate() {
        let offset = out.len() as u64;
        out[index_at + 8 * i..index_at + 8 * (i + 1)].copy_from_slice(&offset.to_le_bytes());
        put_str(&mut out, source)?;
        put_u32(&mut out, targets.len())?;
        for (target, weight) in targets {
            put_str(&mut out, target)?;
            out.extend_from_slice(&weight.to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    Ok(out)
}

/// Handle over a serialized table; reads groups lazily.
pub struct OnDemandTable<S> {
    source: S,
    pub origin: TableOrigin,
    pub max_n: usize,
    group_count: u64,
    entry_count: u64,
    index_at: u64,
}

impl<S: ByteSource> std::fmt::Debug for OnDemandTable<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OnDemandTable")
            .field("origin", &self.origin)
            .field("max_n", &self.max_n)
            .field("groups", &self.group_count)
            .field("entries", &self.entry_count)
            .finish()
    }
}

fn corrupt(what: &str) -> Error {
    Error::BinaryFormat(what.to_string())
}

/// Verifies magic and checksum of an in-memory buffer and opens it.
pub fn open_ondemand(bytes: Vec<u8>) -> Result<OnDemandTable<Vec<u8>>> {
    OnDemandTable::open(bytes)
}

/// Opens a table file; the checksum pass streams the file without keeping it.
pub fn open_file(path: &Path) -> Result<OnDemandTable<File>> {
    OnDemandTable::open(File::open(path)?)
}

struct Cursor<'a, S> {
    source: &'a S,
    pos: u64,
}

impl<S: ByteSource> Cursor<'_, S> {
    fn bytes(&mut self, len: usize) -> Result<Vec<u8>> {
        let mut buf = vec![0; len];
        self.source.read_at(self.pos, &mut buf).map_err(|_| corrupt("truncated"))?;
        self.pos += len as u64;
        Ok(buf)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        let mut buf = [0; 4];
        self.source.read_at(self.pos, &mut buf).map_err(|_| corrupt("truncated"))?;
        self.pos += 4;
        Ok(u32::from_le_bytes(buf))
    }

    fn u64(&mut self) -> Result<u64> {
        let mut buf = [0; 8];
        self.source.read_at(self.pos, &mut buf).map_err(|_| corrupt("truncated"))?;
        self.pos += 8;
        Ok(u64::from_le_bytes(buf))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }

    fn string(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        String::from_utf8(self.bytes(len)?).map_err(|_| corrupt("invalid UTF-8"))
    }
}

impl<S: ByteSource> OnDemandTable<S> {
    pub fn open(source: S) -> Result<Self> {
        let size = source.size();
        if size < MAGIC.len() as u64 + 4 {
            return Err(corrupt("file too short"));
        }
        let mut magic = [0; 5];
        source.read_at(0, &mut magic)?;
        if &magic != MAGIC {
            return Err(corrupt("bad magic"));
        }
        verify_checksum(&source, size)?;

        let mut cursor = Cursor { source: &source, pos: MAGIC.len() as u64 };
        let origin_tag = cursor.u8()?;
        let max_n = cursor.u32()? as usize;
        let topic = cursor.string()?;
        let origin = match origin_tag {
            0 => TableOrigin::Trained,
            1 => TableOrigin::OneToOne(topic),
            _ => return Err(corrupt("unknown origin tag")),
        };
        let group_count = u64::from(cursor.u32()?);
        let entry_count = u64::from(cursor.u32()?);
        let index_at = cursor.pos;
        if index_at + 8 * group_count + 4 > size {
            return Err(corrupt("index past end of file"));
        }
        Ok(OnDemandTable { source, origin, max_n, group_count, entry_count, index_at })
    }

    pub fn group_count(&self) -> u64 {
        self.group_count
    }

    pub fn entry_count(&self) -> u64 {
        self.entry_count
    }

    pub fn byte_source(&self) -> &S {
        &self.source
    }

    fn group_offset(&self, i: u64) -> Result<u64> {
        Cursor { source: &self.source, pos: self.index_at + 8 * i }.u64()
    }

    fn group_source(&self, offset: u64) -> Result<String> {
        Cursor { source: &self.source, pos: offset }.string()
    }

    fn read_group(&self, offset: u64) -> Result<(String, Vec<(String, f64)>)> {
        let mut cursor = Cursor { source: &self.source, pos: offset };
        let source = cursor.string()?;
        let count = cursor.u32()?;
        let mut targets = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let target = cursor.string()?;
            let weight = cursor.f64()?;
            targets.push((target, weight));
        }
        Ok((source, targets))
    }

    /// Entries for one source phrase; an unknown phrase gives an empty list.
    pub fn try_lookup<F: Real>(&self, phrase: &[Token]) -> Result<Vec<PhraseTableEntry<F>>> {
        let key = join_tokens(phrase);
        let (mut lo, mut hi) = (0u64, self.group_count);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            let offset = self.group_offset(mid)?;
            let probe = self.group_source(offset)?;
            match probe.as_bytes().cmp(key.as_bytes()) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => {
                    let (_, targets) = self.read_group(offset)?;
                    return Ok(targets
                        .into_iter()
                        .map(|(target, weight)| PhraseTableEntry {
                            source: phrase.to_vec(),
                            target: split_phrase(&target),
                            weight: F::of(weight),
                        })
                        .collect());
                }
            }
        }
        Ok(Vec::new())
    }

    /// Reads every group into an in-memory table.
    pub fn load_all<F: Real>(&self) -> Result<PhraseTable<F>> {
        let mut table = PhraseTable::new(self.origin.clone());
        for i in 0..self.group_count {
            let (source, targets) = self.read_group(self.group_offset(i)?)?;
            let source = split_phrase(&source);
            for (target, weight) in targets {
                table.insert(source.clone(), split_phrase(&target), F::of(weight));
            }
        }
        table.max_n = table.max_n.max(self.max_n);
        Ok(table)
    }
}

fn verify_checksum<S: ByteSource>(source: &S, size: u64) -> Result<()> {
    let body = size - 4;
    let mut hasher = crc32fast::Hasher::new();
    let mut buf = vec![0; 64 * 1024];
    let mut pos = 0;
    while pos < body {
        let len = (body - pos).min(buf.len() as u64) as usize;
        source.read_at(pos, &mut buf[..len])?;
        hasher.update(&buf[..len]);
        pos += len as u64;
    }
    let mut stored = [0; 4];
    source.read_at(body, &mut stored)?;
    if hasher.finalize() != u32::from_le_bytes(stored) {
        return Err(corrupt("checksum mismatch"));
    }
    Ok(())
}

/// Reads a whole table file into memory, checksum included.
pub fn load_file<F: Real>(path: &Path) -> Result<PhraseTable<F>> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    open_ondemand(bytes)?.load_all()
}

impl<F: Real, S: ByteSource> PhraseLookup<F> for OnDemandTable<S> {
    fn lookup(&self, source: &[Token]) -> Vec<PhraseTableEntry<F>> {
        // The checksum was verified at open; a read failure here means the
        // backing file changed underneath us.
        self.try_lookup(source).unwrap_or_default()
    }

    fn max_source_len(&self) -> usize {
        self.max_n
    }
}
