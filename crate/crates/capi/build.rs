use std::env;
use std::path::PathBuf;

fn main() {
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");

    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    let out_dir = PathBuf::from(env::var("OUT_DIR").unwrap());
    let header = out_dir.join("bfp.h");

    match cbindgen::generate(&crate_dir) {
        Ok(bindings) => {
            bindings.write_to_file(&header);
            // stable copy next to the crate for consumers that vendor it
            let include_dir = crate_dir.join("include");
            if std::fs::create_dir_all(&include_dir).is_ok() {
                let _ = std::fs::copy(&header, include_dir.join("bfp.h"));
            }
        }
        Err(err) => panic!("failed to generate C header: {err}"),
    }
}
