// Regenerates the C header into OUT_DIR on every build. The committed copy in
// include/optexec.h stays authoritative; the header_matches_the_committed_copy
// test compares the two and fails when they drift.

use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    let out_dir = PathBuf::from(env::var("OUT_DIR").unwrap());
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");

    let config = cbindgen::Config::from_file(crate_dir.join("cbindgen.toml"))
        .expect("cbindgen.toml must parse");
    let generated = out_dir.join("optexec.h");
    cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("header generation must succeed")
        .write_to_file(&generated);
    println!(
        "cargo:rustc-env=OPTEXEC_GENERATED_HEADER={}",
        generated.display()
    );
}
