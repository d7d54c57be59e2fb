//! Embedding matrices and their on-disk formats.
//!
//! Text format (word2vec-text compatible): a `V dim` header line followed by
//! one `key v_1 ... v_dim` line per row.
//!
//! Binary format: the magic bytes `CVEC1`, little-endian `u64` V and `u64`
//! dim, V keys each as a little-endian `u64` byte length followed by UTF-8
//! bytes, then V×dim little-endian `f32` values in row-major order.

use std::collections::HashMap;
use std::fmt::{Debug, Display};
use std::io::{BufRead, Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_traits::{Float, FromPrimitive, ToPrimitive};

use crate::error::{Error, Result};
use crate::vocab::concept_key;

/// Floating point type usable for embedding parameters.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Default + Debug + Display + Send + Sync + 'static
{
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).unwrap()
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub const BINARY_MAGIC: &[u8; 5] = b"CVEC1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmbeddingFormat {
    Text,
    Binary,
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Real> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<F>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [F] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[F] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [F] {
        &mut self.data
    }

    /// First non-finite row, if any.
    pub fn first_non_finite_row(&self) -> Option<usize> {
        self.data
            .iter()
            .position(|v| !v.is_finite())
            .map(|p| p / self.cols.max(1))
    }
}

/// Input (published) and output embedding matrices over one key space.
///
/// Stores loaded from disk only carry the input matrix.
#[derive(Clone, Debug)]
pub struct EmbeddingStore<F = f32> {
    keys: Vec<String>,
    index: HashMap<String, usize>,
    input: Matrix<F>,
    output: Option<Matrix<F>>,
}

impl<F: Real> EmbeddingStore<F> {
    pub fn new(keys: Vec<String>, input: Matrix<F>, output: Option<Matrix<F>>) -> Result<Self> {
        if keys.len() != input.rows() {
            return Err(Error::DimensionMismatch {
                expected: keys.len(),
                found: input.rows(),
            });
        }
        if let Some(out) = &output {
            if out.rows() != input.rows() || out.cols() != input.cols() {
                return Err(Error::DimensionMismatch {
                    expected: input.rows() * input.cols(),
                    found: out.rows() * out.cols(),
                });
            }
        }
        let mut index = HashMap::with_capacity(keys.len());
        for (i, k) in keys.iter().enumerate() {
            if index.insert(k.clone(), i).is_some() {
                return Err(Error::Config(format!("duplicate embedding key {k}")));
            }
        }
        Ok(EmbeddingStore {
            keys,
            index,
            input,
            output,
        })
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.input.cols()
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn key(&self, id: usize) -> &str {
        &self.keys[id]
    }

    pub fn id(&self, key: &str) -> Option<usize> {
        self.index.get(key).copied()
    }

    /// Row id of a concept, looked up under its `c:`-prefixed key.
    pub fn concept_id(&self, concept_id: &str) -> Option<usize> {
        self.index.get(&concept_key(concept_id)).copied()
    }

    /// Looks a key up as given, falling back to the concept key.
    pub fn lookup(&self, key: &str) -> Option<usize> {
        self.id(key).or_else(|| self.concept_id(key))
    }

    pub fn input(&self) -> &Matrix<F> {
        &self.input
    }

    pub fn output(&self) -> Option<&Matrix<F>> {
        self.output.as_ref()
    }

    pub fn input_mut(&mut self) -> &mut Matrix<F> {
        &mut self.input
    }

    pub fn output_mut(&mut self) -> Option<&mut Matrix<F>> {
        self.output.as_mut()
    }

    /// Both matrices, mutably. `None` when the store has no output matrix.
    pub fn parameters_mut(&mut self) -> Option<(&mut Matrix<F>, &mut Matrix<F>)> {
        let input = &mut self.input;
        self.output.as_mut().map(|output| (input, output))
    }

    pub fn embedding(&self, id: usize) -> &[F] {
        self.input.row(id)
    }

    pub fn concept_embedding(&self, concept_id: &str) -> Option<&[F]> {
        self.concept_id(concept_id).map(|id| self.input.row(id))
    }

    pub fn into_parts(self) -> (Vec<String>, Matrix<F>, Option<Matrix<F>>) {
        (self.keys, self.input, self.output)
    }
}

impl EmbeddingStore<f32> {
    pub fn write<W: Write>(&self, writer: W, format: EmbeddingFormat) -> Result<()> {
        match format {
            EmbeddingFormat::Text => write_text(writer, &self.keys, &self.input),
            EmbeddingFormat::Binary => write_binary(writer, &self.keys, &self.input),
        }
    }

    /// Reads either format, detected from the leading magic bytes.
    pub fn read<R: BufRead>(mut reader: R, source_name: &str) -> Result<Self> {
        let is_binary = reader.fill_buf()?.starts_with(BINARY_MAGIC);
        let (keys, input) = if is_binary {
            read_binary(reader, source_name)?
        } else {
            read_text(reader, source_name)?
        };
        EmbeddingStore::new(keys, input, None)
    }

    pub fn save(&self, path: &std::path::Path, format: EmbeddingFormat) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write(std::io::BufWriter::new(file), format)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read(std::io::BufReader::new(file), &path.display().to_string())
    }
}

fn check_key(key: &str) -> Result<()> {
    if key.is_empty() || key.chars().any(char::is_whitespace) {
        return Err(Error::Config(format!(
            "embedding key {key:?} is empty or contains whitespace"
        )));
    }
    Ok(())
}

pub fn write_text<W: Write>(mut writer: W, keys: &[String], matrix: &Matrix<f32>) -> Result<()> {
    writeln!(writer, "{} {}", matrix.rows(), matrix.cols())?;
    for (i, key) in keys.iter().enumerate() {
        check_key(key)?;
        writer.write_all(key.as_bytes())?;
        for v in matrix.row(i) {
            // Shortest representation that parses back to the same f32.
            write!(writer, " {v}")?;
        }
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_binary<W: Write>(mut writer: W, keys: &[String], matrix: &Matrix<f32>) -> Result<()> {
    writer.write_all(BINARY_MAGIC)?;
    writer.write_u64::<LittleEndian>(matrix.rows() as u64)?;
    writer.write_u64::<LittleEndian>(matrix.cols() as u64)?;
    for key in keys {
        writer.write_u64::<LittleEndian>(key.len() as u64)?;
        writer.write_all(key.as_bytes())?;
    }
    for &v in matrix.as_slice() {
        writer.write_f32::<LittleEndian>(v)?;
    }
    writer.flush()?;
    Ok(())
}

fn read_text<R: BufRead>(reader: R, source_name: &str) -> Result<(Vec<String>, Matrix<f32>)> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::format(source_name, 1, "missing `V dim` header"))??;
    let mut parts = header.split_whitespace().map(str::parse::<usize>);
    let (rows, cols) = match (parts.next(), parts.next(), parts.next()) {
        (Some(Ok(r)), Some(Ok(c)), None) => (r, c),
        _ => return Err(Error::format(source_name, 1, "malformed `V dim` header")),
    };

    let mut keys = Vec::with_capacity(rows);
    let mut data = Vec::with_capacity(rows * cols);
    for (idx, line) in lines.enumerate() {
        let line = line?;
        let line_no = idx + 2;
        if line.trim().is_empty() {
            continue;
        }
        if keys.len() == rows {
            return Err(Error::format(
                source_name,
                line_no,
                format!("more than {rows} rows"),
            ));
        }
        let mut fields = line.split_whitespace();
        keys.push(fields.next().unwrap().to_owned());
        let before = data.len();
        for field in fields {
            let v: f32 = field.parse().map_err(|_| {
                Error::format(source_name, line_no, format!("invalid number {field:?}"))
            })?;
            data.push(v);
        }
        if data.len() - before != cols {
            return Err(Error::format(
                source_name,
                line_no,
                format!("expected {cols} components, found {}", data.len() - before),
            ));
        }
    }
    if keys.len() != rows {
        return Err(Error::format(
            source_name,
            keys.len() + 1,
            format!("header declares {rows} rows, found {}", keys.len()),
        ));
    }
    Ok((keys, Matrix::from_vec(rows, cols, data)?))
}

fn read_binary<R: Read>(mut reader: R, source_name: &str) -> Result<(Vec<String>, Matrix<f32>)> {
    let bad = |msg: &str| Error::format(source_name, 0, msg);
    let mut magic = [0u8; 5];
    reader.read_exact(&mut magic)?;
    if &magic != BINARY_MAGIC {
        return Err(bad("bad magic"));
    }
    let rows = reader.read_u64::<LittleEndian>()? as usize;
    let cols = reader.read_u64::<LittleEndian>()? as usize;
    let mut keys = Vec::with_capacity(rows.min(1 << 24));
    for _ in 0..rows {
        let len = reader.read_u64::<LittleEndian>()? as usize;
        let mut buf = vec![0u8; len];
        reader.read_exact(&mut buf)?;
        keys.push(String::from_utf8(buf).map_err(|_| bad("key is not UTF-8"))?);
    }
    let n = rows
        .checked_mul(cols)
        .ok_or_else(|| bad("matrix size overflows"))?;
    let mut data = vec![0f32; n];
    reader
        .read_f32_into::<LittleEndian>(&mut data)
        .map_err(|_| bad("truncated matrix data (dimension mismatch)"))?;
    let mut trailing = [0u8; 1];
    if reader.read(&mut trailing)? != 0 {
        return Err(bad("trailing bytes after matrix (dimension mismatch)"));
    }
    Ok((keys, Matrix::from_vec(rows, cols, data)?))
}
