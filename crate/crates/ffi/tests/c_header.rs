//! Compiles and runs a small C program against the generated header and
//! the static library, proving the ABI surface is usable from C.

use std::env;
use std::fs;
use std::path::PathBuf;
use std::process::Command;

const C_PROGRAM: &str = r#"
#include <assert.h>
#include <math.h>
#include <stdio.h>
#include "respn.h"

static const char *CHAIN =
    "{"
    "  \"format_version\": 1,"
    "  \"places\": [ { \"id\": \"p1\", \"initial_tokens\": 1 }, { \"id\": \"p2\" } ],"
    "  \"transitions\": ["
    "    {"
    "      \"id\": \"t\","
    "      \"duration\": { \"kind\": \"constant\", \"value\": 2.0 },"
    "      \"inputs\": [ { \"place\": \"p1\", \"weight\": 1 } ],"
    "      \"outputs\": [ { \"place\": \"p2\", \"weight\": 1 } ]"
    "    }"
    "  ],"
    "  \"goal\": { \"tokens\": [ { \"place\": \"p2\", \"cmp\": \">=\", \"count\": 1 } ] }"
    "}";

int main(void) {
    RespnNet *net = NULL;
    if (respn_net_parse(CHAIN, &net) != RespnStatus_Ok) {
        fprintf(stderr, "parse: %s\n", respn_last_error());
        return 1;
    }
    if (respn_net_validate(net, NULL) != RespnStatus_Ok) {
        fprintf(stderr, "validate: %s\n", respn_last_error());
        return 1;
    }
    RespnSimParams params = respn_sim_params_default();
    params.seed = 7;
    RespnTrace *trace = NULL;
    if (respn_simulate(net, params, &trace) != RespnStatus_Ok) {
        fprintf(stderr, "simulate: %s\n", respn_last_error());
        return 1;
    }
    assert(respn_trace_outcome(trace) == 0);
    assert(fabs(respn_trace_final_time(trace) - 2.0) < 1e-12);
    assert(respn_trace_token_count(trace, "p2") == 1);
    char *csv = respn_trace_events_csv(trace);
    assert(csv != NULL);
    respn_string_free(csv);
    assert(fabs(respn_device_availability(0.9, 2) - 0.99) < 1e-12);
    respn_trace_free(trace);
    respn_net_free(net);
    printf("c-abi-ok\n");
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // OUT_DIR looks like <target>/<profile>/build/<pkg>-<hash>/out.
    let out = PathBuf::from(env!("OUT_DIR"));
    out.ancestors().nth(3).expect("profile dir under target").to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let include_dir = manifest.join("include");
    let lib_dir = target_dir();
    let staticlib = lib_dir.join("librespn_ffi.a");
    assert!(staticlib.exists(), "static library missing at {}", staticlib.display());

    let work = tempfile::tempdir().unwrap();
    let source = work.path().join("demo.c");
    fs::write(&source, C_PROGRAM).unwrap();
    let binary = work.path().join("demo");

    let compile = Command::new("cc")
        .arg(&source)
        .arg("-I")
        .arg(&include_dir)
        .arg(staticlib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&binary)
        .output()
        .expect("cc is available");
    assert!(
        compile.status.success(),
        "compile failed:\n{}",
        String::from_utf8_lossy(&compile.stderr)
    );

    let run = Command::new(&binary).output().expect("demo runs");
    assert!(run.status.success(), "demo failed:\n{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "c-abi-ok");
}
