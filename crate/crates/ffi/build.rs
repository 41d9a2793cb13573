use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());

    let mut config = cbindgen::Config::default();
    config.language = cbindgen::Language::C;
    config.include_guard = Some("MONGE_H".to_string());
    config.autogen_warning =
        Some("/* Generated by cbindgen from the monge-ffi crate; do not edit. */".to_string());
    config.documentation = true;
    config.enumeration.prefix_with_name = true;
    config.cpp_compat = true;

    cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("cbindgen should parse the FFI surface")
        .write_to_file(crate_dir.join("include").join("monge.h"));

    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=build.rs");
}
