//! Compiles a small C program against the generated header and, when the
//! static library is present, links and runs it.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "risdrl.h"

int main(void) {
    RisdrlConfig *cfg = NULL;
    if (risdrl_config_new(&cfg) != RISDRL_STATUS_OK) return 10;
    RisdrlComplexity p, c;
    if (risdrl_complexity(cfg, 20, &p, &c) != RISDRL_STATUS_OK) return 11;
    if (p.parameters >= c.parameters) return 12;
    double red = 0.0;
    if (risdrl_reduction(cfg, 20, RISDRL_CHI_MULTIPLICATIONS, &red) != RISDRL_STATUS_OK) return 13;
    RisdrlStatus s = risdrl_reduction(NULL, 20, RISDRL_CHI_PARAMETERS, &red);
    if (s != RISDRL_STATUS_NULL_POINTER) return 14;
    char msg[128];
    if (risdrl_last_error_message(msg, sizeof msg) == 0 || strstr(msg, "null") == NULL) return 15;
    printf("%s %.4f\n", risdrl_version(), red);
    risdrl_config_free(cfg);
    return 0;
}
"#;

fn include_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include")
}

fn cc() -> Option<String> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .map(String::from)
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let Some(cc) = cc() else {
        eprintln!("no C compiler found, skipping");
        return;
    };
    let dir = tempfile_dir("syntax");
    let src = dir.join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();
    for extra in [&["-std=c99"][..], &["-x", "c++", "-std=c++11"][..]] {
        let out = Command::new(&cc)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-I"])
            .arg(include_dir())
            .args(extra)
            .arg(&src)
            .output()
            .unwrap();
        assert!(out.status.success(), "{extra:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn c_program_links_and_runs() {
    let Some(cc) = cc() else {
        eprintln!("no C compiler found, skipping");
        return;
    };
    // integration test binaries live in <target>/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let lib = profile_dir.join("librisdrl_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built, skipping link test", lib.display());
        return;
    }
    let dir = tempfile_dir("link");
    let src = dir.join("main.c");
    let bin = dir.join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let out = Command::new(&cc)
        .arg("-I")
        .arg(include_dir())
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    let stdout = String::from_utf8(run.stdout).unwrap();
    assert!(stdout.starts_with(env!("CARGO_PKG_VERSION")), "{stdout}");
}

fn tempfile_dir(tag: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(format!("c_header_{tag}"));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
