fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").unwrap();
    let out = std::path::Path::new(&crate_dir).join("include/blstab.h");
    std::fs::create_dir_all(out.parent().unwrap()).unwrap();
    match cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_language(cbindgen::Language::C)
        .with_include_guard("BLSTAB_H")
        .with_cpp_compat(true)
        .generate()
    {
        Ok(b) => {
            b.write_to_file(&out);
        }
        // keep builds working when header generation fails (for example
        // while the crate itself does not yet parse); rustc will report
        // the underlying problem anyway
        Err(e) => println!("cargo:warning=cbindgen skipped: {e}"),
    }
    println!("cargo:rerun-if-changed=src/lib.rs");
}
