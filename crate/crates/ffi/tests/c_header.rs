//! Compiles a C program against the generated header and the static
//! library, then runs it.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "gridlocal.h"

int main(void) {
    GlParams p = gl_params_default();
    p.kappa = 3;
    GlMatch *m = NULL;
    if (gl_run("log-boost", "parity", &p, 5, &m) != GL_STATUS_OK) return 10;
    char *jsonl = NULL;
    if (gl_match_transcript(m, &jsonl) != GL_STATUS_OK) return 11;
    int64_t bad = 0;
    if (gl_verify_jsonl(jsonl, &bad) != GL_STATUS_OK || bad != -1) return 12;
    gl_string_free(jsonl);
    gl_match_free(m);
    if (gl_run("log-boost", "nobody", &p, 5, &m) != GL_STATUS_INVALID_CONFIG) return 13;
    if (strstr(gl_last_error(), "nobody") == NULL) return 14;
    puts("ok");
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let exe = std::env::current_exe().unwrap();
    let profile = exe.parent().and_then(|d| d.parent()).unwrap().to_path_buf();
    let lib = profile.join("libgridlocal_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    let bin = dir.path().join("smoke");
    std::fs::write(&src, PROGRAM).unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
