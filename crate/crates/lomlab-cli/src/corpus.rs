//! The shipped corpus of worked instances.

use std::io;
use std::path::Path;

/// One corpus file, unparsed.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub file: String,
    pub bytes: Vec<u8>,
}

macro_rules! embed {
    ($name:literal) => {
        (concat!($name, ".json"), include_str!(concat!("../corpus/", $name, ".json")))
    };
}

const EMBEDDED: &[(&str, &str)] = &[
    embed!("complex_m2"),
    embed!("complex_m2_conjugated"),
    embed!("complex_m2_nonunital"),
    embed!("full_m3"),
    embed!("pair_canonical"),
    embed!("pair_degenerate"),
    embed!("pair_tilted"),
    embed!("pcs_growing"),
    embed!("pcs_unit"),
    embed!("quaternion_m1"),
    embed!("quaternion_m2_conjugated"),
    embed!("quaternion_m2_nonunital"),
    embed!("ranges_identical"),
    embed!("ranges_power"),
    embed!("ranges_shifted"),
    embed!("ranges_tiny"),
    embed!("real_m2_nonunital"),
    embed!("real_m3_conjugated"),
    embed!("rep_twisted"),
    embed!("rep_untwisted"),
    embed!("triangular"),
];

pub fn embedded() -> Vec<CorpusEntry> {
    EMBEDDED
        .iter()
        .map(|(file, text)| CorpusEntry { file: (*file).to_string(), bytes: text.as_bytes().to_vec() })
        .collect()
}

/// Every `*.json` file directly inside `dir`, in name order.
pub fn load_dir(dir: &Path) -> io::Result<Vec<CorpusEntry>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "json") && path.is_file() {
            let file = path.file_name().expect("file name").to_string_lossy().into_owned();
            out.push(CorpusEntry { file, bytes: std::fs::read(&path)? });
        }
    }
    out.sort_by(|a, b| a.file.cmp(&b.file));
    Ok(out)
}
