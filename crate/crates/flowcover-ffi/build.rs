fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").unwrap();
    println!("cargo:rerun-if-changed=src/lib.rs");
    match cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_language(cbindgen::Language::C)
        .with_include_guard("FLOWCOVER_H")
        .with_cpp_compat(true)
        .generate()
    {
        Ok(header) => {
            header.write_to_file(format!("{crate_dir}/include/flowcover.h"));
        }
        Err(e) => println!("cargo:warning=header generation skipped: {e}"),
    }
}
