//! Output formatting and atomic file emission.

use std::io::Write;
use std::path::Path;

use clusterbench::error::Error;

use crate::manifest::RunManifest;
use crate::Body;

/// Format with 12 significant digits in positional notation. Fixed
/// precision keeps command output byte-stable across runs.
pub fn fmt12(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000000".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).clamp(0, 17) as usize;
    format!("{x:.decimals$}")
}

/// Round every float in a JSON tree to 12 significant digits.
pub fn round_json(value: &mut serde_json::Value) {
    match value {
        serde_json::Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if n.is_f64() {
                    let rounded: f64 = fmt12(f).parse().unwrap_or(f);
                    if let Some(num) = serde_json::Number::from_f64(rounded) {
                        *value = serde_json::Value::Number(num);
                    }
                }
            }
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(round_json),
        serde_json::Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

/// Where command output goes: stdout, or an atomically written file with a
/// run manifest alongside.
pub struct OutputSink<'a> {
    out: Option<&'a Path>,
}

impl<'a> OutputSink<'a> {
    pub fn new(out: Option<&'a Path>) -> Self {
        OutputSink { out }
    }

    pub fn emit(
        &self,
        command: &str,
        params: &serde_json::Value,
        body: &Body,
    ) -> Result<(), Error> {
        let text = match body {
            Body::Csv(csv) => csv.clone(),
            Body::Json(value) => {
                let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
                s.push('\n');
                s
            }
        };
        match self.out {
            None => {
                print!("{text}");
                Ok(())
            }
            Some(path) => {
                write_atomic(path, text.as_bytes())?;
                let manifest = RunManifest::new(command, params.clone(), path, text.as_bytes());
                let manifest_path = manifest_path(path);
                write_atomic(&manifest_path, manifest.to_json().as_bytes())?;
                Ok(())
            }
        }
    }
}

pub fn manifest_path(out: &Path) -> std::path::PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

/// Write via a temp file in the same directory and rename into place.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = path.with_extension("tmp-write");
    let io_err = |e: std::io::Error| Error::Domain(format!("cannot write {}: {e}", path.display()));
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir).map_err(io_err)?;
    }
    let mut f = std::fs::File::create(&tmp).map_err(io_err)?;
    f.write_all(bytes).map_err(io_err)?;
    f.sync_all().map_err(io_err)?;
    std::fs::rename(&tmp, path).map_err(io_err)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt12_examples() {
        assert_eq!(fmt12(6.0 / 7.0), "0.857142857143");
        assert_eq!(fmt12(21.0 / 22.0), "0.954545454545");
        assert_eq!(fmt12(1.0), "1.00000000000");
        assert_eq!(fmt12(26492.0), "26492.0000000");
        assert_eq!(fmt12(-0.5), "-0.500000000000");
        assert_eq!(fmt12(0.0), "0.00000000000");
    }

    #[test]
    fn round_json_touches_only_floats() {
        let mut v = serde_json::json!({
            "int": 26492u64,
            "float": 0.12345678901234567,
            "nested": [ {"x": 1.0e-13} ],
            "text": "keep",
        });
        round_json(&mut v);
        assert_eq!(v["int"], serde_json::json!(26492u64));
        assert_eq!(v["float"].as_f64().unwrap(), 0.123456789012);
        assert_eq!(v["text"], "keep");
    }
}
