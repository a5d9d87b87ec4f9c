// Copyright 2026 tangleshare contributors
// SPDX-License-Identifier: Apache-2.0

//! Content-addressed object store. Objects are keyed by the SHA-256 of
//! their stored bytes and re-hashed on every read, so silent corruption is
//! always detected. Callers are expected to seal sensitive objects before
//! storing them; the store itself never sees a key.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::crypto::{sha256, stream_xor, Digest};
use crate::payload::Payload;

/// Payloads up to this many bytes are carried inline in a message; larger
/// ones go to the object store and are referenced by digest.
pub const INLINE_MAX_DEFAULT: usize = 256;

const OBJECT_STREAM_TAG: &[u8] = b"obj";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("object {0} not found")]
    NotFound(Digest),
    #[error("object {expected} failed integrity check: stored bytes hash to {actual}")]
    IntegrityFailure { expected: Digest, actual: Digest },
    #[error("payload does not reference a stored object")]
    NotAnObject,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// File-backed store; one file per object under `<dir>/objects/<hex digest>`.
pub struct ObjectStore {
    objects_dir: PathBuf,
}

impl ObjectStore {
    pub fn open(dir: &Path) -> io::Result<Self> {
        let objects_dir = dir.join("objects");
        fs::create_dir_all(&objects_dir)?;
        Ok(Self { objects_dir })
    }

    fn path_of(&self, digest: &Digest) -> PathBuf {
        self.objects_dir.join(digest.to_string())
    }

    /// Store `data` and return its digest. Re-storing identical bytes is a
    /// no-op and returns the same digest.
    pub fn put(&self, data: &[u8]) -> Result<Digest, StoreError> {
        let digest = sha256(&[data]);
        let path = self.path_of(&digest);
        if !path.exists() {
            let tmp = path.with_extension("tmp");
            fs::write(&tmp, data)?;
            fs::rename(&tmp, &path)?;
        }
        Ok(digest)
    }

    pub fn get(&self, digest: &Digest) -> Result<Vec<u8>, StoreError> {
        let path = self.path_of(digest);
        let data = match fs::read(&path) {
            Ok(data) => data,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                return Err(StoreError::NotFound(*digest))
            }
            Err(e) => return Err(e.into()),
        };
        let actual = sha256(&[&data]);
        if actual != *digest {
            return Err(StoreError::IntegrityFailure { expected: *digest, actual });
        }
        Ok(data)
    }

    pub fn contains(&self, digest: &Digest) -> bool {
        self.path_of(digest).exists()
    }

    /// Digests of all stored objects, sorted.
    pub fn list(&self) -> Result<Vec<Digest>, StoreError> {
        let mut out = Vec::new();
        for entry in fs::read_dir(&self.objects_dir)? {
            let name = entry?.file_name();
            if let Some(digest) = name.to_str().and_then(|s| s.parse::<Digest>().ok()) {
                out.push(digest);
            }
        }
        out.sort();
        Ok(out)
    }
}

/// Encrypt object bytes under `key` before they leave the owner's machine.
/// Uses a stream separate from message encryption so the two never share
/// keystream.
pub fn seal_object(key: &[u8; 32], data: &[u8]) -> Vec<u8> {
    stream_xor(key, OBJECT_STREAM_TAG, data)
}

/// Inverse of [`seal_object`].
pub fn open_object(key: &[u8; 32], sealed: &[u8]) -> Vec<u8> {
    stream_xor(key, OBJECT_STREAM_TAG, sealed)
}

/// Place `data` either inline or, when it exceeds `inline_max`, sealed in
/// the object store behind a digest reference.
pub fn stash(
    store: &ObjectStore,
    key: &[u8; 32],
    data: &[u8],
    inline_max: usize,
) -> Result<Payload, StoreError> {
    if data.len() <= inline_max {
        return Ok(Payload::Inline(data.to_vec()));
    }
    let digest = store.put(&seal_object(key, data))?;
    Ok(Payload::ObjectRef(digest))
}

/// Recover the original bytes behind a payload produced by [`stash`].
pub fn resolve(store: &ObjectStore, key: &[u8; 32], payload: &Payload) -> Result<Vec<u8>, StoreError> {
    match payload {
        Payload::Inline(data) => Ok(data.clone()),
        Payload::ObjectRef(digest) => Ok(open_object(key, &store.get(digest)?)),
        _ => Err(StoreError::NotAnObject),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(tag: u8) -> [u8; 32] {
        sha256(&[b"object key", &[tag]]).0
    }

    #[test]
    fn put_get_round_trip_and_idempotence() {
        let dir = tempfile::tempdir().unwrap();
        let store = ObjectStore::open(dir.path()).unwrap();
        let digest = store.put(b"camera frame").unwrap();
        assert_eq!(digest, sha256(&[b"camera frame"]));
        assert_eq!(store.put(b"camera frame").unwrap(), digest);
        assert_eq!(store.get(&digest).unwrap(), b"camera frame");
        assert!(store.contains(&digest));
    }

    #[test]
    fn get_unknown_is_not_found() {
        let dir = tempfile::tempdir().unwrap();
        let store = ObjectStore::open(dir.path()).unwrap();
        let missing = sha256(&[b"missing"]);
        assert!(matches!(store.get(&missing), Err(StoreError::NotFound(d)) if d == missing));
    }

    #[test]
    fn corrupted_file_fails_integrity_check() {
        let dir = tempfile::tempdir().unwrap();
        let store = ObjectStore::open(dir.path()).unwrap();
        let digest = store.put(b"pristine").unwrap();
        std::fs::write(dir.path().join("objects").join(digest.to_string()), b"tampered").unwrap();
        assert!(matches!(store.get(&digest), Err(StoreError::IntegrityFailure { .. })));
    }

    #[test]
    fn list_is_sorted() {
        let dir = tempfile::tempdir().unwrap();
        let store = ObjectStore::open(dir.path()).unwrap();
        for i in 0..5u8 {
            store.put(&[i; 10]).unwrap();
        }
        let listed = store.list().unwrap();
        assert_eq!(listed.len(), 5);
        assert!(listed.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn seal_open_round_trip_and_key_separation() {
        let data = b"lidar point cloud".to_vec();
        let sealed = seal_object(&key(1), &data);
        assert_ne!(sealed, data);
        assert_eq!(open_object(&key(1), &sealed), data);
        assert_ne!(open_object(&key(2), &sealed), data);
        // Different stream tag than message encryption under the same key.
        assert_ne!(sealed, stream_xor(&key(1), b"msg", &data));
    }

    #[test]
    fn stash_respects_the_inline_boundary() {
        let dir = tempfile::tempdir().unwrap();
        let store = ObjectStore::open(dir.path()).unwrap();
        let k = key(3);

        let small = vec![7u8; INLINE_MAX_DEFAULT];
        let payload = stash(&store, &k, &small, INLINE_MAX_DEFAULT).unwrap();
        assert_eq!(payload, Payload::Inline(small.clone()));
        assert_eq!(resolve(&store, &k, &payload).unwrap(), small);

        let large = vec![8u8; INLINE_MAX_DEFAULT + 1];
        let payload = stash(&store, &k, &large, INLINE_MAX_DEFAULT).unwrap();
        match &payload {
            Payload::ObjectRef(digest) => {
                assert!(store.contains(digest));
                // Stored bytes are sealed, not plaintext.
                assert_ne!(store.get(digest).unwrap(), large);
            }
            other => panic!("expected object reference, got {other:?}"),
        }
        assert_eq!(resolve(&store, &k, &payload).unwrap(), large);
    }

    #[test]
    fn resolve_rejects_non_object_payloads() {
        let dir = tempfile::tempdir().unwrap();
        let store = ObjectStore::open(dir.path()).unwrap();
        let payload = Payload::TxAddress(sha256(&[b"x"]));
        assert!(matches!(resolve(&store, &key(0), &payload), Err(StoreError::NotAnObject)));
    }
}
