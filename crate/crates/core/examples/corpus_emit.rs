//! Writes every corpus entry as model JSON into a directory (default: a
//! temp dir) and prints the content hashes.

use std::collections::BTreeMap;

fn main() {
    let dir = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("trajlens-corpus"));
    std::fs::create_dir_all(&dir).unwrap();
    for (name, _, about) in trajlens::corpus::catalog() {
        let entry = trajlens::corpus::by_name(name, &BTreeMap::new()).unwrap();
        let path = dir.join(format!("{name}.json"));
        std::fs::write(&path, entry.model.to_json_string()).unwrap();
        println!("{}  {}  {about}", &entry.model.content_hash()[..12], path.display());
    }
}
