use std::path::PathBuf;

fn main() {
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
    let dir = PathBuf::from(std::env::var("CARGO_MANIFEST_DIR").expect("set by cargo"));
    let config = cbindgen::Config::from_file(dir.join("cbindgen.toml")).expect("cbindgen.toml parses");
    let header = cbindgen::Builder::new()
        .with_config(config)
        .with_src(dir.join("src/lib.rs"))
        .generate()
        .expect("header generation");
    let path = dir.join("include/pvtau.h");
    let mut bytes = Vec::new();
    header.write(&mut bytes);
    // only touch the file when it changes, so dependants are not rebuilt
    if std::fs::read(&path).ok().as_deref() != Some(&bytes[..]) {
        std::fs::create_dir_all(path.parent().expect("has parent")).expect("include dir");
        std::fs::write(&path, bytes).expect("header written");
    }
}
