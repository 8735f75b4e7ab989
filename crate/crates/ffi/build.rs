use std::env;

fn main() {
    let crate_dir = env::var("CARGO_MANIFEST_DIR").unwrap();
    let config = cbindgen::Config {
        language: cbindgen::Language::C,
        include_guard: Some("RESPN_H".to_string()),
        documentation: true,
        cpp_compat: true,
        header: Some("/* C interface for the respn simulation library. */".to_string()),
        enumeration: cbindgen::EnumConfig {
            prefix_with_name: true,
            ..Default::default()
        },
        ..Default::default()
    };
    cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("cbindgen failed to generate the header")
        .write_to_file(format!("{crate_dir}/include/respn.h"));
    println!("cargo:rerun-if-changed=src/lib.rs");
}
