//! On-disk formats: the schema document, the corpus manifest and the
//! annotation store (one JSON header line followed by one record per line).

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AnnotationRecord, AttributeSchema, ImageRef};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("record ({image_id}, {category}) refers to a category missing from the schema")]
    UnknownCategory { image_id: String, category: String },
    #[error("duplicate image id in manifest: {0}")]
    DuplicateImage(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `contents` to `path` through a sibling temp file and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)
}

/// Canonical schema document: pretty JSON with a trailing newline.
pub fn schema_to_string(schema: &AttributeSchema) -> String {
    let mut s = serde_json::to_string_pretty(schema).expect("schema serializes");
    s.push('\n');
    s
}

pub fn schema_from_str(text: &str) -> Result<AttributeSchema, serde_json::Error> {
    serde_json::from_str(text)
}

pub fn read_schema(path: &Path) -> Result<AttributeSchema, StoreError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    schema_from_str(&text).map_err(|e| StoreError::Format {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

pub fn write_schema(path: &Path, schema: &AttributeSchema) -> Result<(), StoreError> {
    write_atomic(path, schema_to_string(schema).as_bytes()).map_err(io_err(path))
}

/// Reads a JSONL manifest of [`ImageRef`]s. Blank lines are skipped.
pub fn read_manifest(path: &Path) -> Result<Vec<ImageRef>, StoreError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut images = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let image: ImageRef = serde_json::from_str(&line).map_err(|e| StoreError::Format {
            path: path.to_path_buf(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        if !seen.insert(image.id.clone()) {
            return Err(StoreError::DuplicateImage(image.id));
        }
        images.push(image);
    }
    Ok(images)
}

pub fn write_manifest(path: &Path, images: &[ImageRef]) -> Result<(), StoreError> {
    let mut out = String::new();
    for image in images {
        out.push_str(&serde_json::to_string(image).expect("image ref serializes"));
        out.push('\n');
    }
    write_atomic(path, out.as_bytes()).map_err(io_err(path))
}

#[derive(Serialize, Deserialize)]
struct StoreHeader {
    schema: AttributeSchema,
    alpha: f64,
}

#[derive(Serialize)]
struct StoreHeaderRef<'a> {
    schema: &'a AttributeSchema,
    alpha: f64,
}

/// Corpus-wide annotations, at most one record per (image, category).
#[derive(Clone, Debug, PartialEq)]
pub struct AnnotationStore {
    pub schema: AttributeSchema,
    pub alpha: f64,
    records: BTreeMap<(String, String), AnnotationRecord>,
}

impl AnnotationStore {
    pub fn new(schema: AttributeSchema, alpha: f64) -> Self {
        AnnotationStore {
            schema,
            alpha,
            records: BTreeMap::new(),
        }
    }

    /// Inserts or replaces the record for its (image, category) key.
    pub fn insert(&mut self, record: AnnotationRecord) -> Result<(), StoreError> {
        if self.schema.category(&record.category_name).is_none() {
            return Err(StoreError::UnknownCategory {
                image_id: record.image_id,
                category: record.category_name,
            });
        }
        self.records
            .insert((record.image_id.clone(), record.category_name.clone()), record);
        Ok(())
    }

    pub fn get(&self, image_id: &str, category: &str) -> Option<&AnnotationRecord> {
        self.records.get(&(image_id.to_string(), category.to_string()))
    }

    pub fn contains(&self, image_id: &str, category: &str) -> bool {
        self.get(image_id, category).is_some()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// All records ordered by (image id, category name).
    pub fn records(&self) -> impl Iterator<Item = &AnnotationRecord> {
        self.records.values()
    }

    pub fn records_for<'a>(&'a self, category: &'a str) -> impl Iterator<Item = &'a AnnotationRecord> + 'a {
        self.records.values().filter(move |r| r.category_name == category)
    }

    fn header_line(&self) -> String {
        serde_json::to_string(&StoreHeaderRef {
            schema: &self.schema,
            alpha: self.alpha,
        })
        .expect("store header serializes")
    }

    /// Canonical store file contents.
    pub fn to_jsonl(&self) -> String {
        let mut out = self.header_line();
        out.push('\n');
        for record in self.records.values() {
            out.push_str(&record_line(record));
            out.push('\n');
        }
        out
    }

    /// Parses store file contents. A final line without a terminating newline
    /// that fails to parse is treated as an interrupted append and dropped.
    pub fn from_jsonl(text: &str, path: &Path) -> Result<Self, StoreError> {
        let fmt_err = |line: usize, message: String| StoreError::Format {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = text.split_inclusive('\n').enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| fmt_err(1, "empty store file".to_string()))?;
        let header: StoreHeader =
            serde_json::from_str(header.trim_end()).map_err(|e| fmt_err(1, e.to_string()))?;
        let mut store = AnnotationStore::new(header.schema, header.alpha);
        for (idx, line) in lines {
            let terminated = line.ends_with('\n');
            let body = line.trim_end();
            if body.is_empty() {
                continue;
            }
            match serde_json::from_str::<AnnotationRecord>(body) {
                Ok(record) => store.insert(record)?,
                Err(e) if !terminated => {
                    log::warn!("{}: dropping truncated final record: {e}", path.display());
                }
                Err(e) => return Err(fmt_err(idx + 1, e.to_string())),
            }
        }
        Ok(store)
    }

    pub fn read(path: &Path) -> Result<Self, StoreError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_jsonl(&text, path)
    }

    pub fn write(&self, path: &Path) -> Result<(), StoreError> {
        write_atomic(path, self.to_jsonl().as_bytes()).map_err(io_err(path))
    }
}

fn record_line(record: &AnnotationRecord) -> String {
    serde_json::to_string(record).expect("record serializes")
}

/// Appends records to a store file as they complete so an interrupted run
/// can resume without recomputing them.
pub struct StoreAppender {
    path: PathBuf,
    out: BufWriter<File>,
}

impl StoreAppender {
    /// Opens `path` for appending, writing the header of `store` first when
    /// the file does not exist yet.
    pub fn open(path: &Path, store: &AnnotationStore) -> Result<Self, StoreError> {
        if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(io_err(path))?;
        }
        let fresh = !path.exists();
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(io_err(path))?;
        let mut out = BufWriter::new(file);
        if fresh {
            writeln!(out, "{}", store.header_line()).map_err(io_err(path))?;
            out.flush().map_err(io_err(path))?;
        }
        Ok(StoreAppender {
            path: path.to_path_buf(),
            out,
        })
    }

    pub fn append(&mut self, record: &AnnotationRecord) -> Result<(), StoreError> {
        writeln!(self.out, "{}", record_line(record)).map_err(io_err(&self.path))?;
        self.out.flush().map_err(io_err(&self.path))
    }
}
