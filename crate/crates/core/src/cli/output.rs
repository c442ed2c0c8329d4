use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

use crate::numeric::fmt17;

/// Compact JSON with every float written to 17 significant digits.
struct Float17;

impl Formatter for Float17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }
}

pub fn to_json<T: Serialize>(value: &T) -> io::Result<String> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, Float17);
    value.serialize(&mut ser).map_err(io::Error::other)?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(io::Error::other)
}

/// Output files, all created (and truncated) before any work starts.
pub struct Artifacts {
    files: BTreeMap<&'static str, File>,
}

impl Artifacts {
    pub fn prepare(dir: &Path, names: &[&'static str]) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        let mut files = BTreeMap::new();
        for &name in names {
            files.insert(name, File::create(dir.join(name))?);
        }
        Ok(Artifacts { files })
    }

    pub fn write(&mut self, name: &'static str, contents: &str) -> io::Result<()> {
        let file = self.files.get_mut(name).ok_or_else(|| {
            io::Error::new(io::ErrorKind::NotFound, format!("artifact {name} was not prepared"))
        })?;
        file.write_all(contents.as_bytes())?;
        file.flush()
    }

    pub fn write_json<T: Serialize>(&mut self, name: &'static str, value: &T) -> io::Result<()> {
        self.write(name, &to_json(value)?)
    }
}
