use std::env;
use std::path::PathBuf;

fn main() {
    let dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=build.rs");
    let config = cbindgen::Config {
        usize_is_size_t: true,
        ..Default::default()
    };
    cbindgen::Builder::new()
        .with_config(config)
        .with_crate(&dir)
        .with_language(cbindgen::Language::C)
        .with_include_guard("TQB_H")
        .with_cpp_compat(true)
        .with_documentation(true)
        .with_autogen_warning("/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */")
        .generate()
        .expect("cbindgen failed")
        .write_to_file(dir.join("include/tqb.h"));
}
