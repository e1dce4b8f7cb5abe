use std::path::PathBuf;

fn main() {
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");

    let crate_dir = PathBuf::from(std::env::var("CARGO_MANIFEST_DIR").unwrap());
    let header = crate_dir.join("include").join("bibrank.h");
    std::fs::create_dir_all(header.parent().unwrap()).expect("create include directory");

    let config = cbindgen::Config::from_file(crate_dir.join("cbindgen.toml"))
        .expect("read cbindgen.toml");
    match cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
    {
        Ok(bindings) => {
            bindings.write_to_file(&header);
        }
        Err(error) => {
            // Keep the committed header usable when generation is not
            // possible (e.g. offline toolchain without cbindgen parsing).
            if header.exists() {
                println!("cargo:warning=cbindgen failed ({error}); keeping committed header");
            } else {
                panic!("cbindgen failed and no committed header exists: {error}");
            }
        }
    }
}
