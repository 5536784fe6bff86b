use std::path::PathBuf;
use std::process::Command;

fn header() -> (PathBuf, String) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/symgp.h");
    let text = std::fs::read_to_string(&path).expect("header is generated by the build script");
    (path, text)
}

#[test]
fn header_declares_every_export() {
    let (_, text) = header();
    let src = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("src/lib.rs")).unwrap();
    let exported: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exported.len() >= 15);
    for name in exported {
        assert!(text.contains(&format!("{name}(")), "{name} missing from header");
    }
    for ty in ["SymgpStatus", "SymgpMetric", "SymgpCategory", "SymgpPose", "SymgpGp"] {
        assert!(text.contains(ty));
    }
}

#[test]
fn header_compiles_as_c() {
    let (path, _) = header();
    let dir = tempfile::tempdir().unwrap();
    let main = dir.path().join("main.c");
    std::fs::write(
        &main,
        "#include \"symgp.h\"\nint main(void) {\n  SymgpPointSet *s = NULL;\n  SymgpStatus st = symgp_pointset_generate(\"cube\", 0, &s);\n  symgp_pointset_free(s);\n  return st == SYMGP_STATUS_OK ? 0 : 1;\n}\n",
    )
    .unwrap();
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(path.parent().unwrap())
        .arg(&main)
        .status();
    match status {
        Ok(s) => assert!(s.success(), "C compiler rejected the header"),
        Err(_) => eprintln!("no C compiler available; skipped"),
    }
}
