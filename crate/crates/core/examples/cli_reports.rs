//! Drive the command-line front end in-process and print its JSON report.
//!
//!     cargo run --example cli_reports

fn main() {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let args = [
        "freespec".to_string(),
        "verify".into(),
        format!("{data}/chain.json"),
        format!("{data}/candidate_b05.json"),
        "--budget".into(),
        "20".into(),
        "--format".into(),
        "json".into(),
    ];
    let (code, out, err) = freespec::cli::run_args(args);
    print!("{out}{err}");
    println!("exit code {code}");
}
