//! Compiles a C program against the generated header and the static library.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "latent_translate.h"

#define N 40
#define D 3

int main(void) {
    double x[N * D], y[N * D];
    double c = cos(0.7), s = sin(0.7);
    for (int i = 0; i < N; i++) {
        double a = sin(1.3 * i), b = cos(0.4 * i * i), e = sin(0.9 * i + 1.0);
        x[i * D + 0] = a; x[i * D + 1] = b; x[i * D + 2] = e;
        y[i * D + 0] = c * a - s * b; y[i * D + 1] = s * a + c * b; y[i * D + 2] = -e;
    }
    LtSpace *xs = NULL, *ys = NULL, *mapped = NULL;
    LtTranslator *t = NULL;
    if (lt_space_new(x, N, D, &xs) != LT_STATUS_OK) return 1;
    if (lt_space_new(y, N, D, &ys) != LT_STATUS_OK) return 1;
    size_t idx[10];
    for (size_t i = 0; i < 10; i++) idx[i] = i;
    if (lt_translator_fit(xs, ys, idx, idx, 10, LT_METHOD_ORTHO, LT_SCALING_NONE, &t) != LT_STATUS_OK) return 2;
    if (lt_translator_apply(t, xs, &mapped) != LT_STATUS_OK) return 3;
    double mse = 1.0;
    if (lt_latent_mse(mapped, ys, &mse) != LT_STATUS_OK || mse > 1e-20) return 4;

    LtSpace *missing = NULL;
    if (lt_space_read("/nonexistent/file.lten", &missing) != LT_STATUS_DATA) return 5;
    if (lt_last_error_message() == NULL) return 6;

    lt_space_free(mapped);
    lt_translator_free(t);
    lt_space_free(xs);
    lt_space_free(ys);
    printf("ok %s\n", lt_version());
    return 0;
}
"#;

fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let lib = artifact_dir().join("liblatent_translate_ffi.a");
    assert!(lib.exists(), "missing {}", lib.display());
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("client.c");
    let bin = dir.path().join("client");
    std::fs::write(&src, PROGRAM).unwrap();

    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".to_owned());
    let status = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("C compiler runs");
    assert!(status.success());

    let out = Command::new(&bin).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
